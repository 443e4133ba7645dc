//! Key balls, the skeleton forest and label propagation.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::ball::{generate_balls, BallBudget, BallSet, GranularBall};
use crate::dataset::Points;
use crate::peaks::{density_order, identify_peak_balls, nearest_higher};
use crate::{Error, Result};

/// Balls regenerated over the pooled representative centers.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyBallSet {
    pub balls: Vec<GranularBall>,
}

impl KeyBallSet {
    /// `W`, the number of key balls.
    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn centers(&self) -> impl Iterator<Item = &[f64]> {
        self.balls.iter().map(|b| b.center.as_slice())
    }
}

impl From<BallSet> for KeyBallSet {
    fn from(set: BallSet) -> Self {
        Self { balls: set.balls }
    }
}

/// Runs unbounded ball generation over the pooled centers.
pub fn build_key_balls<R: Rng + ?Sized>(centers: Points<'_>, rng: &mut R) -> Result<KeyBallSet> {
    generate_balls(centers, BallBudget::Unlimited, rng).map(KeyBallSet::from)
}

/// One tree per cluster over the key balls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonForest {
    /// Parent key ball, `None` for roots.
    pub parents: Vec<Option<usize>>,
    /// Root key balls in label order (gamma descending).
    pub roots: Vec<usize>,
    /// Cluster label `1..=k` per key ball.
    pub labels: Vec<u32>,
}

impl SkeletonForest {
    /// Parent ids with `-1` marking roots.
    pub fn parent_ids(&self) -> Vec<i64> {
        self.parents
            .iter()
            .map(|p| p.map_or(-1, |p| p as i64))
            .collect()
    }

    /// Number of parent-child edges, `W - k`.
    pub fn edge_count(&self) -> usize {
        self.parents.iter().filter(|p| p.is_some()).count()
    }
}

/// Picks the `k` peak balls as roots, hangs every other ball off its nearest
/// higher-density ball and propagates root labels down the trees.
pub fn construct_forest(balls: &[GranularBall], k: usize) -> Result<SkeletonForest> {
    let w = balls.len();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > w {
        return Err(Error::InsufficientKeyBalls { w, k });
    }
    let roots = identify_peak_balls(balls, k)?;
    let (_, nearest) = nearest_higher(balls)?;
    let mut is_root = vec![false; w];
    for &r in &roots {
        is_root[r] = true;
    }
    let parents: Vec<Option<usize>> = (0..w)
        .map(|j| if is_root[j] { None } else { nearest[j] })
        .collect();

    let mut labels = vec![0u32; w];
    for (label, &r) in roots.iter().enumerate() {
        labels[r] = label as u32 + 1;
    }
    // parents always rank above their children, so one pass in rank order
    // sees every parent labelled first
    for j in density_order(balls) {
        if let Some(p) = parents[j] {
            labels[j] = labels[p];
        }
    }
    Ok(SkeletonForest {
        parents,
        roots,
        labels,
    })
}

/// Index of the key ball whose center is nearest to `p`, ties to the lower index.
#[inline]
pub fn nearest_center(p: &[f64], centers: &[f64], dim: usize) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    'centers: for (j, c) in centers.chunks_exact(dim).enumerate() {
        let mut acc = 0.0;
        for (x, y) in p.iter().zip(c) {
            acc += (x - y) * (x - y);
            // partial sums only grow; a tie can never win
            if acc >= best_d {
                continue 'centers;
            }
        }
        best_d = acc;
        best = j;
    }
    best
}

const LABEL_CHUNK: usize = 4096;

/// Labels every point with the label of its nearest key ball.
pub fn label_points(points: Points<'_>, forest: &SkeletonForest, key_balls: &[GranularBall]) -> Vec<u32> {
    let d = points.dim();
    let centers: Vec<f64> = key_balls.iter().flat_map(|b| b.center.iter().copied()).collect();
    let mut out = vec![0u32; points.len()];
    crate::par::for_each_chunk(&mut out, LABEL_CHUNK, |start, chunk| {
        for (off, slot) in chunk.iter_mut().enumerate() {
            *slot = forest.labels[nearest_center(points.row(start + off), &centers, d)];
        }
    });
    out
}
