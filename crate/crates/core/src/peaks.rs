//! Density-peak statistics over granular-balls.
//!
//! Balls are totally ordered by density, descending, with the lower index
//! winning ties. "Higher" below always means earlier in that order, so the
//! nearest-higher distance is defined for every ball but one.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::ball::{dist, GranularBall};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PeakStats {
    /// Distance to the nearest higher-density ball center.
    pub delta: Vec<f64>,
    /// `density * delta`.
    pub gamma: Vec<f64>,
    /// Ball indices sorted by gamma descending, ties to the lower index.
    pub order: Vec<usize>,
}

/// `true` when ball `q` ranks above ball `j`.
#[inline]
pub fn is_higher(balls: &[GranularBall], q: usize, j: usize) -> bool {
    let (rq, rj) = (balls[q].density, balls[j].density);
    rq > rj || (rq == rj && q < j)
}

/// Ball indices by density descending, ties to the lower index.
pub fn density_order(balls: &[GranularBall]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by(|&a, &b| {
        balls[b]
            .density
            .total_cmp(&balls[a].density)
            .then(a.cmp(&b))
    });
    order
}

/// Nearest-higher-density distance per ball, plus the nearest higher ball
/// itself (`None` for the top-ranked ball).
///
/// The top ball gets the largest pairwise center distance in the set, 0 for
/// a single ball.
pub fn nearest_higher(balls: &[GranularBall]) -> Result<(Vec<f64>, Vec<Option<usize>>)> {
    if balls.is_empty() {
        return Err(Error::EmptyInput);
    }
    let t = balls.len();
    let order = density_order(balls);
    let mut delta = alloc::vec![0.0; t];
    let mut parent = alloc::vec![None; t];
    let mut max_pair = 0.0f64;
    // Walking in rank order, the higher set of order[r] is exactly order[..r].
    for (rank, &j) in order.iter().enumerate() {
        let cj = &balls[j].center;
        let mut best = f64::INFINITY;
        let mut best_q = None;
        for &q in &order[..rank] {
            let dq = dist(cj, &balls[q].center);
            max_pair = max_pair.max(dq);
            if dq < best || (dq == best && best_q.is_some_and(|b| q < b)) {
                best = dq;
                best_q = Some(q);
            }
        }
        if best_q.is_some() {
            delta[j] = best;
            parent[j] = best_q;
        }
    }
    delta[order[0]] = max_pair;
    Ok((delta, parent))
}

pub fn compute_delta(balls: &[GranularBall]) -> Result<Vec<f64>> {
    nearest_higher(balls).map(|(delta, _)| delta)
}

pub fn peak_stats(balls: &[GranularBall]) -> Result<PeakStats> {
    let delta = compute_delta(balls)?;
    let gamma: Vec<f64> = balls
        .iter()
        .zip(&delta)
        .map(|(b, d)| b.density * d)
        .collect();
    let order = gamma_order(&gamma);
    Ok(PeakStats {
        delta,
        gamma,
        order,
    })
}

pub(crate) fn gamma_order(gamma: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gamma.len()).collect();
    order.sort_by(|&a, &b| match gamma[b].total_cmp(&gamma[a]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    order
}

/// Indices of the `k` balls with the largest gamma, best first.
pub fn identify_peak_balls(balls: &[GranularBall], k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > balls.len() {
        return Err(Error::InsufficientBalls {
            requested: k,
            available: balls.len(),
        });
    }
    let mut order = peak_stats(balls)?.order;
    order.truncate(k);
    Ok(order)
}
