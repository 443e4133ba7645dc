//! Point matrices, random sample sets and synthetic Gaussian blobs.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::rng::{self, stage};
use crate::{Error, Result};

/// Borrowed row-major view of `len` points in `dim` dimensions.
#[derive(Debug, Clone, Copy)]
pub struct Points<'a> {
    data: &'a [f64],
    dim: usize,
}

impl<'a> Points<'a> {
    pub fn new(data: &'a [f64], dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("dimension must be at least 1".to_string()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::Shape(format!(
                "{} values do not divide into rows of {dim}",
                data.len()
            )));
        }
        Ok(Self { data, dim })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &'a [f64] {
        self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &'a [f64]> + 'a {
        self.data.chunks_exact(self.dim)
    }
}

/// An immutable `n x d` point matrix with optional ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    dim: usize,
    labels: Option<Vec<i64>>,
}

impl Dataset {
    /// Validates shape and finiteness. Errors name the offending row.
    pub fn new(points: Vec<f64>, dim: usize, labels: Option<Vec<i64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("dimension must be at least 1".to_string()));
        }
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !points.len().is_multiple_of(dim) {
            return Err(Error::Shape(format!(
                "{} values do not divide into rows of {dim}",
                points.len()
            )));
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        let n = points.len() / dim;
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::LengthMismatch {
                    left: l.len(),
                    right: n,
                });
            }
        }
        Ok(Self {
            points,
            dim,
            labels,
        })
    }

    pub fn n(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn d(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> Points<'_> {
        Points {
            data: &self.points,
            dim: self.dim,
        }
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn into_parts(self) -> (Vec<f64>, usize, Option<Vec<i64>>) {
        (self.points, self.dim, self.labels)
    }

    /// Rescales every column to `[0, 1]`. Constant columns become 0.
    pub fn normalize_min_max(&mut self) {
        let d = self.dim;
        for col in 0..d {
            let (lo, hi) = self
                .points
                .iter()
                .skip(col)
                .step_by(d)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            let span = hi - lo;
            for v in self.points.iter_mut().skip(col).step_by(d) {
                *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
            }
        }
    }
}

/// One random sample set: indices into the parent dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    /// 1-based position among the `s` sample sets.
    pub sample_index: usize,
    /// Unique, ascending row indices.
    pub indices: Vec<usize>,
}

impl SampleSet {
    /// Copies the sampled rows into a contiguous row-major buffer.
    pub fn gather(&self, points: Points<'_>) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.indices.len() * points.dim());
        for &i in &self.indices {
            out.extend_from_slice(points.row(i));
        }
        out
    }
}

/// `round(n * alpha)` clamped to `[min(n, floor.max(1)), n]`.
pub fn sample_size(n: usize, alpha: f64, floor: usize) -> usize {
    let raw = libm::round(n as f64 * alpha) as usize;
    let lower = n.min(floor.max(1));
    raw.clamp(lower, n)
}

/// Draws `s` independent sample sets without replacement within a set.
pub fn sample(dataset: &Dataset, s: usize, alpha: f64, master_seed: u64) -> Result<Vec<SampleSet>> {
    sample_with_floor(dataset, s, alpha, master_seed, 1)
}

/// Like [`sample`] with a lower bound on the set size (the pipeline passes
/// `2k` so every sample can yield `k` representatives).
pub fn sample_with_floor(
    dataset: &Dataset,
    s: usize,
    alpha: f64,
    master_seed: u64,
    floor: usize,
) -> Result<Vec<SampleSet>> {
    if s == 0 {
        return Err(Error::InvalidParameter("s must be at least 1".to_string()));
    }
    check_alpha(alpha)?;
    let n = dataset.n();
    let size = sample_size(n, alpha, floor);
    Ok(crate::par::map_range(s, |i| {
        let mut rng = rng::stream(master_seed, stage::SAMPLE, i as u64);
        let mut indices = if size == n {
            (0..n).collect()
        } else {
            rand::seq::index::sample(&mut rng, n, size).into_vec()
        };
        indices.sort_unstable();
        SampleSet {
            sample_index: i + 1,
            indices,
        }
    }))
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )))
    }
}

/// Isotropic Gaussian blobs on a jittered grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub cluster_count: usize,
    pub points_per_cluster: usize,
    pub dimension: usize,
    /// Grid pitch between neighbouring centers.
    pub center_spread: f64,
    pub cluster_std: f64,
    pub seed: u64,
}

/// Center jitter as a fraction of the grid pitch, per axis.
const CENTER_JITTER: f64 = 0.1;

impl SyntheticSpec {
    /// Grid centers, one row per cluster, before point sampling.
    pub fn centers(&self) -> Vec<f64> {
        let k = self.cluster_count;
        let d = self.dimension;
        let mut side = 1usize;
        while side.checked_pow(d as u32).is_some_and(|cells| cells < k) {
            side += 1;
        }
        let mut rng = rng::stream(self.seed, stage::SYNTHETIC, 0);
        let mut centers = Vec::with_capacity(k * d);
        for c in 0..k {
            let mut cell = c;
            for _ in 0..d {
                let digit = if side > 1 { cell % side } else { 0 };
                cell = if side > 1 { cell / side } else { 0 };
                let jitter = rng.random_range(-CENTER_JITTER..=CENTER_JITTER);
                centers.push((digit as f64 + jitter) * self.center_spread);
            }
        }
        centers
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.cluster_count == 0 || spec.points_per_cluster == 0 || spec.dimension == 0 {
        return Err(Error::InvalidParameter(
            "cluster count, points per cluster and dimension must be positive".to_string(),
        ));
    }
    if !(spec.cluster_std > 0.0 && spec.cluster_std.is_finite()) {
        return Err(Error::InvalidParameter("cluster std must be positive".to_string()));
    }
    if !spec.center_spread.is_finite() {
        return Err(Error::InvalidParameter("center spread must be finite".to_string()));
    }
    let d = spec.dimension;
    let centers = spec.centers();
    let n = spec.cluster_count * spec.points_per_cluster;
    let mut rng = rng::stream(spec.seed, stage::SYNTHETIC, 1);
    let mut points = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for (c, center) in centers.chunks_exact(d).enumerate() {
        for _ in 0..spec.points_per_cluster {
            for &mu in center {
                let z: f64 = rng.sample(StandardNormal);
                points.push(mu + spec.cluster_std * z);
            }
            labels.push(c as i64);
        }
    }
    Dataset::new(points, d, Some(labels))
}
