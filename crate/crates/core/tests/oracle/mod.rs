//! Brute-force reference implementations and the randomized suites that
//! compare the library against them. Shared with the acceptance runner.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;

use gbsk_core::ball::{build_ball, compute_set_density, distribution_measure, generate_balls, wdm, BallBudget, GranularBall};
use gbsk_core::metrics::{accuracy, ami, ari};
use gbsk_core::peaks::{compute_delta, peak_stats};
use gbsk_core::rng::stream;
use gbsk_core::skeleton::construct_forest;
use gbsk_core::Points;
use rand::Rng;

pub const CASES: u64 = 100;

pub type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s.sqrt()
}

/// Random balls with densities from a small pool so ties are common.
pub fn random_balls<R: Rng>(rng: &mut R, t: usize, dim: usize) -> Vec<GranularBall> {
    let tie_heavy = rng.random_bool(0.5);
    (0..t)
        .map(|_| GranularBall {
            members: vec![0],
            center: (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect(),
            radius: 0.0,
            density: if tie_heavy {
                rng.random_range(0..4) as f64
            } else {
                rng.random_range(0.0..50.0)
            },
            dm: 0.0,
        })
        .collect()
}

fn higher(balls: &[GranularBall], q: usize, j: usize) -> bool {
    balls[q].density > balls[j].density || (balls[q].density == balls[j].density && q < j)
}

/// Nearest higher ball per ball, by double loop; `None` for the top ball.
pub fn brute_parents(balls: &[GranularBall]) -> Vec<Option<usize>> {
    let t = balls.len();
    let mut out = vec![None; t];
    for j in 0..t {
        let mut best = f64::INFINITY;
        for q in 0..t {
            if q != j && higher(balls, q, j) {
                let d = euclid(&balls[q].center, &balls[j].center);
                if d < best {
                    best = d;
                    out[j] = Some(q);
                }
            }
        }
    }
    out
}

pub fn brute_delta(balls: &[GranularBall]) -> Vec<f64> {
    let t = balls.len();
    let mut max_pair = 0.0f64;
    for a in 0..t {
        for b in 0..t {
            max_pair = max_pair.max(euclid(&balls[a].center, &balls[b].center));
        }
    }
    brute_parents(balls)
        .iter()
        .enumerate()
        .map(|(j, p)| match p {
            Some(q) => euclid(&balls[*q].center, &balls[j].center),
            None => max_pair,
        })
        .collect()
}

/// Hand-evaluated center, radius, DM, WDM and density examples.
pub fn suite_formulas() -> Check {
    let tol = 1e-9;
    let data = [0.0, 0.0, 2.0, 0.0];
    let p = Points::new(&data, 2).unwrap();
    let b = build_ball(p, vec![0, 1]).unwrap();
    ensure(b.center == [1.0, 0.0] && close(b.radius, 1.0, tol), || format!("center/radius {b:?}"))?;
    ensure(close(b.dm, 1.0 / 1.01, tol), || format!("dm {}", b.dm))?;
    let single = build_ball(p, vec![0]).unwrap();
    ensure(close(single.dm, 100.0, tol), || format!("single dm {}", single.dm))?;

    let data = [0.0, 0.0, 0.0, 2.0, 0.0, 4.0];
    let tri = build_ball(Points::new(&data, 2).unwrap(), vec![0, 1, 2]).unwrap();
    ensure(close(tri.radius, 2.0, tol), || format!("triple radius {}", tri.radius))?;

    let ball = |n: usize, dm: f64| GranularBall {
        members: (0..n).collect(),
        center: vec![0.0],
        radius: 0.0,
        density: 0.0,
        dm,
    };
    let w = wdm(&ball(10, 1.0), &ball(5, 4.0), &ball(5, 2.0)).unwrap();
    ensure(close(w, 3.0, tol), || format!("wdm {w}"))?;
    let w = wdm(&ball(10, 1.0), &ball(2, 1.0), &ball(8, 6.0)).unwrap();
    ensure(close(w, 5.0, tol), || format!("wdm {w}"))?;
    ensure(close(distribution_measure(0.99), 1.0, tol), || "dm(0.99)".into())?;

    let mut set = [ball(5, 0.0), ball(1, 0.0)];
    set[0].radius = 1.5;
    compute_set_density(&mut set, 0.5);
    ensure(close(set[0].density, 2.5, tol) && set[1].density == 0.0, || {
        format!("density {} {}", set[0].density, set[1].density)
    })
}

/// Delta and gamma against the double loop, exact.
pub fn suite_delta(cases: u64) -> Check {
    for case in 0..cases {
        let mut rng = stream(0xde17a, 0, case);
        let t = rng.random_range(1..=200);
        let dim = rng.random_range(1..=4);
        let balls = random_balls(&mut rng, t, dim);
        let got = compute_delta(&balls).map_err(|e| e.to_string())?;
        let want = brute_delta(&balls);
        ensure(got == want, || format!("case {case}: delta differs"))?;
        let stats = peak_stats(&balls).map_err(|e| e.to_string())?;
        for j in 0..t {
            ensure(stats.gamma[j] == balls[j].density * want[j], || format!("case {case}: gamma {j}"))?;
        }
    }
    Ok(())
}

/// Forest structure on random key-ball sets.
pub fn suite_forest(cases: u64) -> Check {
    for case in 0..cases {
        let mut rng = stream(0xf0e57, 0, case);
        let w = rng.random_range(1..=200);
        let dim = rng.random_range(1..=3);
        let balls = random_balls(&mut rng, w, dim);
        let k = rng.random_range(1..=w.min(20));
        let forest = construct_forest(&balls, k).map_err(|e| e.to_string())?;

        // roots are the k largest gamma, ties to the lower index
        let gamma: Vec<f64> = balls.iter().zip(brute_delta(&balls)).map(|(b, d)| b.density * d).collect();
        let mut by_gamma: Vec<usize> = (0..w).collect();
        by_gamma.sort_by(|&a, &b| gamma[b].partial_cmp(&gamma[a]).unwrap().then(a.cmp(&b)));
        ensure(forest.roots == by_gamma[..k], || format!("case {case}: roots"))?;

        let nearest = brute_parents(&balls);
        for j in 0..w {
            let is_root = forest.roots.contains(&j);
            let want = if is_root { None } else { nearest[j] };
            ensure(forest.parents[j] == want, || format!("case {case}: parent of {j}"))?;
            if let Some(p) = forest.parents[j] {
                ensure(higher(&balls, p, j), || format!("case {case}: parent {p} not above {j}"))?;
            }
            // parent chain reaches a root within W steps and carries its label
            let mut at = j;
            let mut steps = 0;
            while let Some(p) = forest.parents[at] {
                at = p;
                steps += 1;
                ensure(steps <= w, || format!("case {case}: cycle through {j}"))?;
            }
            ensure(forest.roots.contains(&at), || format!("case {case}: {j} ends at non-root {at}"))?;
            ensure(forest.labels[j] == forest.labels[at], || format!("case {case}: label of {j}"))?;
            ensure((1..=k as u32).contains(&forest.labels[j]), || format!("case {case}: label range"))?;
        }
    }
    Ok(())
}

/// Random point sets, some with duplicate rows, through ball generation.
pub fn random_points<R: Rng>(rng: &mut R) -> (Vec<f64>, usize) {
    let n = rng.random_range(1..=300);
    let d = rng.random_range(1..=5);
    let dup = rng.random_bool(0.3);
    let mut data = Vec::with_capacity(n * d);
    for i in 0..n {
        if dup && i > 0 && rng.random_bool(0.4) {
            let src = rng.random_range(0..i);
            data.extend_from_within(src * d..(src + 1) * d);
        } else {
            let blob = rng.random_range(0..3) as f64 * 10.0;
            data.extend((0..d).map(|_| blob + rng.random_range(-1.0..1.0)));
        }
    }
    (data, d)
}

pub fn random_budget<R: Rng>(rng: &mut R) -> BallBudget {
    if rng.random_bool(0.25) {
        BallBudget::Unlimited
    } else {
        BallBudget::Bounded(rng.random_range(1..=40))
    }
}

/// Every generated ball set covers each index exactly once.
pub fn suite_partition(cases: u64) -> Check {
    for case in 0..cases {
        let mut rng = stream(0x9a27, 0, case);
        let (data, d) = random_points(&mut rng);
        let budget = random_budget(&mut rng);
        let n = data.len() / d;
        let set = generate_balls(Points::new(&data, d).unwrap(), budget, &mut rng).map_err(|e| e.to_string())?;
        let mut seen = vec![0u32; n];
        for b in &set.balls {
            for &i in &b.members {
                ensure(i < n, || format!("case {case}: index {i} out of range"))?;
                seen[i] += 1;
            }
        }
        ensure(seen.iter().all(|&c| c == 1), || format!("case {case}: coverage {seen:?}"))?;
    }
    Ok(())
}

/// All set partitions of `n` points as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<u8>> {
    fn grow(prefix: &mut Vec<u8>, max: u8, n: usize, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for b in 0..=max + 1 {
            prefix.push(b);
            grow(prefix, max.max(b), n, out);
            prefix.pop();
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut prefix = vec![0u8];
    grow(&mut prefix, 0, n, &mut out);
    out
}

/// Contiguous-block labelings, one per integer partition of `n`.
pub fn block_partitions(n: usize) -> Vec<Vec<u8>> {
    fn parts(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            parts(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut sizes = Vec::new();
    parts(n, n, &mut Vec::new(), &mut sizes);
    sizes
        .into_iter()
        .map(|s| s.iter().enumerate().flat_map(|(b, &len)| std::iter::repeat_n(b as u8, len)).collect())
        .collect()
}

fn choose2(x: usize) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// ARI from explicit pair counting over all point pairs.
pub fn brute_ari(a: &[u8], b: &[u8]) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b) = (0usize, 0usize, 0usize);
    for i in 0..n {
        for j in i + 1..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => both += 1,
                (true, false) => only_a += 1,
                (false, true) => only_b += 1,
                _ => {}
            }
        }
    }
    let total = choose2(n);
    let pa = (both + only_a) as f64;
    let pb = (both + only_b) as f64;
    let expected = if total > 0.0 { pa * pb / total } else { 0.0 };
    let max = 0.5 * (pa + pb);
    if max == expected {
        1.0
    } else {
        (both as f64 - expected) / (max - expected)
    }
}

fn entropy(a: &[u8]) -> f64 {
    let n = a.len() as f64;
    let mut counts = [0usize; 256];
    a.iter().for_each(|&x| counts[x as usize] += 1);
    counts.iter().filter(|&&c| c > 0).map(|&c| c as f64 / n).map(|p| -p * p.ln()).sum()
}

fn mi(a: &[u8], b: &[u8]) -> f64 {
    const L: usize = 16;
    let n = a.len() as f64;
    let mut joint = [[0usize; L]; L];
    let mut ca = [0usize; L];
    let mut cb = [0usize; L];
    for (&x, &y) in a.iter().zip(b) {
        joint[x as usize][y as usize] += 1;
        ca[x as usize] += 1;
        cb[y as usize] += 1;
    }
    let mut sum = 0.0;
    for x in 0..L {
        for y in 0..L {
            let c = joint[x][y] as f64;
            if c > 0.0 {
                sum += c / n * (c * n / (ca[x] as f64 * cb[y] as f64)).ln();
            }
        }
    }
    sum
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    fn heap(k: usize, idx: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(idx.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, idx, out);
            let j = if k.is_multiple_of(2) { i } else { 0 };
            idx.swap(j, k - 1);
        }
    }
    heap(n, &mut idx, &mut out);
    out
}

fn sizes_key(a: &[u8]) -> Vec<usize> {
    let mut counts = [0usize; 256];
    a.iter().for_each(|&x| counts[x as usize] += 1);
    let mut s: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
    s.sort();
    s
}

/// Expected MI: mean of MI over every permutation of `b`'s point order.
pub struct EmiOracle {
    perms: HashMap<usize, Vec<Vec<usize>>>,
    cache: HashMap<(Vec<usize>, Vec<usize>), f64>,
}

impl EmiOracle {
    pub fn new() -> Self {
        Self {
            perms: HashMap::new(),
            cache: HashMap::new(),
        }
    }

    pub fn emi(&mut self, a: &[u8], b: &[u8]) -> f64 {
        let key = (sizes_key(a), sizes_key(b));
        if let Some(&v) = self.cache.get(&key) {
            return v;
        }
        let n = a.len();
        let perms = self.perms.entry(n).or_insert_with(|| permutations(n));
        let mut shuffled = vec![0u8; n];
        let mut sum = 0.0;
        for p in perms.iter() {
            for (i, &pi) in p.iter().enumerate() {
                shuffled[i] = b[pi];
            }
            sum += mi(a, &shuffled);
        }
        let v = sum / perms.len() as f64;
        self.cache.insert(key, v);
        v
    }

    pub fn ami(&mut self, a: &[u8], b: &[u8]) -> f64 {
        let n = a.len();
        let (ka, kb) = (sizes_key(a).len(), sizes_key(b).len());
        if (ka == kb && ka <= 1) || (ka == n && kb == n) {
            return 1.0;
        }
        let emi = self.emi(a, b);
        let denom = 0.5 * (entropy(a) + entropy(b)) - emi;
        (mi(a, b) - emi) / denom
    }
}

/// Best matching by trying every injection of the smaller label set.
pub fn brute_acc(a: &[u8], b: &[u8]) -> f64 {
    brute_acc_with(a, b, &mut HashMap::new())
}

fn brute_acc_with(a: &[u8], b: &[u8], perms: &mut HashMap<usize, Vec<Vec<usize>>>) -> f64 {
    let ka = *a.iter().max().unwrap() as usize + 1;
    let kb = *b.iter().max().unwrap() as usize + 1;
    let (small, large, a_small) = if ka <= kb { (ka, kb, true) } else { (kb, ka, false) };
    let mut best = 0;
    // enumerate injections small -> large via permutations of the large set
    for perm in perms.entry(large).or_insert_with(|| permutations(large)).iter() {
        let hits = a
            .iter()
            .zip(b)
            .filter(|&(&x, &y)| {
                let (s, l) = if a_small { (x, y) } else { (y, x) };
                (s as usize) < small && perm[s as usize] == l as usize
            })
            .count();
        best = best.max(hits);
    }
    best as f64 / a.len() as f64
}

/// Every partition pair on `n_max` points or fewer, up to relabeling and
/// point order: the first side runs over contiguous block partitions and
/// the second over all set partitions.
pub fn suite_metrics(n_max: usize) -> Check {
    let tol = 1e-9;
    let mut emi = EmiOracle::new();
    let mut perms = HashMap::new();
    for n in 1..=n_max {
        let all = set_partitions(n);
        for a in block_partitions(n) {
            for b in &all {
                let got = ari(&a, b).unwrap();
                let want = brute_ari(&a, b);
                ensure(close(got, want, tol), || format!("ari {a:?} {b:?}: {got} vs {want}"))?;
                let got = ami(&a, b).unwrap();
                let want = emi.ami(&a, b);
                ensure(close(got, want, tol), || format!("ami {a:?} {b:?}: {got} vs {want}"))?;
                let got = accuracy(&a, b).unwrap();
                let want = brute_acc_with(&a, b, &mut perms);
                ensure(close(got, want, tol), || format!("acc {a:?} {b:?}: {got} vs {want}"))?;
            }
        }
    }
    Ok(())
}
