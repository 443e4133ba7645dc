//! Granular-balls: construction, 2-means bisection and two-stage generation.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::dataset::Points;
use crate::{Error, Result};

/// Smoothing term of the distribution measure, in data units.
pub const TAU: f64 = 0.01;

const KMEANS_RESTARTS: usize = 3;
const LLOYD_MAX_ITERS: usize = 100;
const LLOYD_REL_TOL: f64 = 1e-6;

/// Splitting-stage children must hold at least this many points. A lone
/// point has zero density and can never act as a peak.
pub const MIN_CHILD_MEMBERS: usize = 2;

/// A granular-ball over a subset of a point set.
///
/// `members` index rows of the [`Points`] the ball was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct GranularBall {
    pub members: Vec<usize>,
    /// Arithmetic mean of the member points.
    pub center: Vec<f64>,
    /// Largest member-to-center Euclidean distance.
    pub radius: f64,
    /// Set-relative density; zero until the owning [`BallSet`] fills it in.
    pub density: f64,
    /// Distribution measure `1 / (radius + TAU)`.
    pub dm: f64,
}

impl GranularBall {
    #[inline]
    pub fn member_count(&self) -> usize {
        self.members.len()
    }
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(dist2(a, b))
}

pub fn distribution_measure(radius: f64) -> f64 {
    1.0 / (radius + TAU)
}

/// Center, radius and DM of the ball holding `members`. Density is left at 0.
pub fn build_ball(points: Points<'_>, members: Vec<usize>) -> Result<GranularBall> {
    if members.is_empty() {
        return Err(Error::EmptyBall);
    }
    let d = points.dim();
    let mut center = vec![0.0; d];
    for &i in &members {
        for (c, x) in center.iter_mut().zip(points.row(i)) {
            *c += x;
        }
    }
    let inv = 1.0 / members.len() as f64;
    center.iter_mut().for_each(|c| *c *= inv);
    let radius = libm::sqrt(
        members
            .iter()
            .map(|&i| dist2(points.row(i), &center))
            .fold(0.0, f64::max),
    );
    Ok(GranularBall {
        members,
        center,
        radius,
        density: 0.0,
        dm: distribution_measure(radius),
    })
}

/// Member-count-weighted mean of the children's distribution measures.
pub fn wdm(parent: &GranularBall, left: &GranularBall, right: &GranularBall) -> Result<f64> {
    let n = parent.member_count();
    let children = left.member_count() + right.member_count();
    if children != n || n == 0 {
        return Err(Error::CountMismatch {
            parent: n,
            children,
        });
    }
    let n = n as f64;
    Ok(left.member_count() as f64 / n * left.dm + right.member_count() as f64 / n * right.dm)
}

struct TwoMeans {
    right: Vec<bool>,
    sse: f64,
    empty: bool,
}

fn lloyd(points: Points<'_>, members: &[usize], mut centers: Vec<f64>, scale: f64) -> TwoMeans {
    let d = points.dim();
    let mut sums = vec![0.0; 2 * d];
    for _ in 0..LLOYD_MAX_ITERS {
        sums.iter_mut().for_each(|s| *s = 0.0);
        let mut counts = [0usize; 2];
        for &i in members {
            let p = points.row(i);
            let side = usize::from(dist2(p, &centers[d..]) < dist2(p, &centers[..d]));
            counts[side] += 1;
            for (s, x) in sums[side * d..(side + 1) * d].iter_mut().zip(p) {
                *s += x;
            }
        }
        if counts[0] == 0 || counts[1] == 0 {
            break;
        }
        let mut shift = 0.0f64;
        for (side, &count) in counts.iter().enumerate() {
            let inv = 1.0 / count as f64;
            let block = side * d..(side + 1) * d;
            let moved: f64 = centers[block.clone()]
                .iter_mut()
                .zip(&sums[block])
                .map(|(c, s)| {
                    let next = s * inv;
                    let delta = (next - *c) * (next - *c);
                    *c = next;
                    delta
                })
                .sum();
            shift = shift.max(libm::sqrt(moved));
        }
        if shift <= LLOYD_REL_TOL * scale {
            break;
        }
    }
    let mut right = Vec::with_capacity(members.len());
    let mut sse = 0.0;
    let mut counts = [0usize; 2];
    for &i in members {
        let p = points.row(i);
        let dl = dist2(p, &centers[..d]);
        let dr = dist2(p, &centers[d..]);
        let side = dr < dl;
        sse += if side { dr } else { dl };
        counts[usize::from(side)] += 1;
        right.push(side);
    }
    TwoMeans {
        right,
        sse,
        empty: counts[0] == 0 || counts[1] == 0,
    }
}

/// Splits `ball` in two with k-means++ seeded 2-means (best of three
/// restarts by SSE). Falls back to a median cut on the highest-variance
/// axis if Lloyd leaves a side empty.
///
/// Returns [`Error::TerminalBall`] when every member coincides.
pub fn bisect<R: Rng + ?Sized>(
    points: Points<'_>,
    ball: &GranularBall,
    rng: &mut R,
) -> Result<(GranularBall, GranularBall)> {
    let members = &ball.members;
    let m = members.len();
    if m < 2 {
        return Err(Error::TerminalBall);
    }
    let d = points.dim();
    let scale = ball.radius.max(f64::MIN_POSITIVE);
    let mut weights = vec![0.0; m];
    let mut best: Option<TwoMeans> = None;
    for _ in 0..KMEANS_RESTARTS {
        let first = points.row(members[rng.random_range(0..m)]);
        let mut total = 0.0;
        for (w, &i) in weights.iter_mut().zip(members) {
            *w = dist2(points.row(i), first);
            total += *w;
        }
        if total <= 0.0 {
            return Err(Error::TerminalBall);
        }
        let mut target = rng.random::<f64>() * total;
        let mut pick = m - 1;
        for (j, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                pick = j;
                if target < w {
                    break;
                }
                target -= w;
            }
        }
        let mut centers = Vec::with_capacity(2 * d);
        centers.extend_from_slice(first);
        centers.extend_from_slice(points.row(members[pick]));
        let run = lloyd(points, members, centers, scale);
        let better = match &best {
            None => true,
            Some(b) => (b.empty && !run.empty) || (b.empty == run.empty && run.sse < b.sse),
        };
        if better {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let (left, right) = if best.empty {
        median_split(points, members)?
    } else {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (&i, &r) in members.iter().zip(&best.right) {
            if r {
                right.push(i);
            } else {
                left.push(i);
            }
        }
        (left, right)
    };
    Ok((build_ball(points, left)?, build_ball(points, right)?))
}

fn median_split(points: Points<'_>, members: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let d = points.dim();
    let m = members.len() as f64;
    let mut axis = 0;
    let mut best_var = 0.0;
    for j in 0..d {
        let mean = members.iter().map(|&i| points.row(i)[j]).sum::<f64>() / m;
        let var = members
            .iter()
            .map(|&i| (points.row(i)[j] - mean) * (points.row(i)[j] - mean))
            .sum::<f64>();
        if var > best_var {
            best_var = var;
            axis = j;
        }
    }
    if best_var <= 0.0 {
        return Err(Error::TerminalBall);
    }
    let mut sorted = members.to_vec();
    sorted.sort_by(|&a, &b| {
        points.row(a)[axis]
            .total_cmp(&points.row(b)[axis])
            .then(a.cmp(&b))
    });
    let right = sorted.split_off(sorted.len() / 2);
    Ok((sorted, right))
}

/// Upper bound on the number of balls produced by the splitting stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallBudget {
    Bounded(usize),
    Unlimited,
}

impl BallBudget {
    /// `-1` (or any negative value) means unlimited.
    pub fn from_signed(m: i64) -> Result<Self> {
        match m {
            m if m < 0 => Ok(Self::Unlimited),
            0 => Err(Error::InvalidParameter(
                "ball budget must be >= 1 or -1 for unlimited".into(),
            )),
            m => Ok(Self::Bounded(m as usize)),
        }
    }

    pub fn as_signed(self) -> i64 {
        match self {
            Self::Bounded(m) => m as i64,
            Self::Unlimited => -1,
        }
    }
}

/// Balls covering one point set, with densities filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSet {
    pub balls: Vec<GranularBall>,
    /// Mean radius over `balls`.
    pub mean_radius: f64,
    /// Median radius over `balls`.
    pub median_radius: f64,
    /// Radius at or above which the refinement stage bisected balls.
    pub refine_threshold: f64,
    pub source_point_count: usize,
}

impl BallSet {
    /// Computes radius statistics and densities over the final ball list.
    pub fn from_balls(mut balls: Vec<GranularBall>, source_point_count: usize) -> Self {
        let (mean_radius, median_radius) = radius_stats(&balls);
        compute_set_density(&mut balls, median_radius);
        Self {
            balls,
            mean_radius,
            median_radius,
            refine_threshold: f64::NAN,
            source_point_count,
        }
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }
}

/// `(mean, median)` of the ball radii; zeros for an empty list.
pub fn radius_stats(balls: &[GranularBall]) -> (f64, f64) {
    if balls.is_empty() {
        return (0.0, 0.0);
    }
    let mut radii: Vec<f64> = balls.iter().map(|b| b.radius).collect();
    let mean = radii.iter().sum::<f64>() / radii.len() as f64;
    radii.sort_by(f64::total_cmp);
    let mid = radii.len() / 2;
    let median = if radii.len() % 2 == 1 {
        radii[mid]
    } else {
        0.5 * (radii[mid - 1] + radii[mid])
    };
    (mean, median)
}

/// Sets `density = N / (radius + median_radius)` for every multi-point ball
/// and 0 for singletons. A zero denominator (coincident points in a set
/// whose median radius is 0) falls back to `TAU`.
pub fn compute_set_density(balls: &mut [GranularBall], median_radius: f64) {
    for b in balls {
        let n = b.member_count();
        b.density = if n == 1 {
            0.0
        } else {
            let denom = b.radius + median_radius;
            n as f64 / if denom > 0.0 { denom } else { TAU }
        };
    }
}

/// One split decision made while generating balls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitDecision {
    pub refining: bool,
    pub parent_members: usize,
    pub parent_dm: f64,
    /// `NaN` during refinement, where no WDM test is made.
    pub wdm: f64,
    pub accepted: bool,
}

/// Covers every row of `points` with granular-balls.
///
/// Stage 1 splits breadth-first from the whole-set ball. A split is kept when
/// the children's weighted DM is at least the parent's and neither child is
/// a lone point; otherwise the parent is finished. Once finished plus queued
/// balls reach `budget`, the queue is kept unsplit. Stage 2 bisects every
/// ball whose radius reaches twice the larger of the stage-1 mean and median
/// radius, with that threshold fixed up front.
pub fn generate_balls<R: Rng + ?Sized>(
    points: Points<'_>,
    budget: BallBudget,
    rng: &mut R,
) -> Result<BallSet> {
    generate_balls_observed(points, budget, rng, |_| {})
}

/// [`generate_balls`] with a callback for every split decision.
pub fn generate_balls_observed<R, F>(
    points: Points<'_>,
    budget: BallBudget,
    rng: &mut R,
    mut observe: F,
) -> Result<BallSet>
where
    R: Rng + ?Sized,
    F: FnMut(&SplitDecision),
{
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = points.len();
    let mut queue = VecDeque::new();
    queue.push_back(build_ball(points, (0..n).collect())?);
    let mut done: Vec<GranularBall> = Vec::new();

    while let Some(gb) = queue.pop_front() {
        match bisect(points, &gb, rng) {
            Ok((left, right)) => {
                let w = wdm(&gb, &left, &right)?;
                let accepted = w >= gb.dm
                    && left.member_count() >= MIN_CHILD_MEMBERS
                    && right.member_count() >= MIN_CHILD_MEMBERS;
                observe(&SplitDecision {
                    refining: false,
                    parent_members: gb.member_count(),
                    parent_dm: gb.dm,
                    wdm: w,
                    accepted,
                });
                if accepted {
                    queue.push_back(left);
                    queue.push_back(right);
                } else {
                    done.push(gb);
                }
            }
            Err(Error::TerminalBall) => done.push(gb),
            Err(e) => return Err(e),
        }
        if let BallBudget::Bounded(m) = budget {
            if done.len() + queue.len() >= m {
                done.extend(queue.drain(..));
                break;
            }
        }
    }

    let (mean_r, median_r) = radius_stats(&done);
    let threshold = 2.0 * mean_r.max(median_r);
    let mut queue: VecDeque<GranularBall> = done.into();
    let mut out = Vec::with_capacity(queue.len());
    while let Some(gb) = queue.pop_front() {
        if gb.radius >= threshold {
            match bisect(points, &gb, rng) {
                Ok((left, right)) => {
                    observe(&SplitDecision {
                        refining: true,
                        parent_members: gb.member_count(),
                        parent_dm: gb.dm,
                        wdm: f64::NAN,
                        accepted: true,
                    });
                    queue.push_back(left);
                    queue.push_back(right);
                }
                Err(Error::TerminalBall) => out.push(gb),
                Err(e) => return Err(e),
            }
        } else {
            out.push(gb);
        }
    }
    let mut set = BallSet::from_balls(out, n);
    set.refine_threshold = threshold;
    Ok(set)
}
