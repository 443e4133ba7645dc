//! The five-step GBSK pipeline, the AGBSK preset and the ablation variants.

use alloc::format;
use alloc::vec::Vec;
use core::time::Duration;

use crate::ball::{generate_balls, BallBudget, GranularBall};
use crate::dataset::{check_alpha, sample_size, sample_with_floor, Dataset, Points};
use crate::par::{self, Stopwatch};
use crate::peaks::identify_peak_balls;
use crate::rng::{self, stage};
use crate::skeleton::{build_key_balls, construct_forest, label_points, KeyBallSet, SkeletonForest};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    Standard,
    /// Balls over the whole dataset, forest over all of them.
    NoSampling,
    /// Sampling as usual, but every sample ball goes straight into the forest.
    NoRepresentativeBalls,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::NoSampling => "no-sampling",
            Variant::NoRepresentativeBalls => "no-representative-balls",
        }
    }
}

impl core::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Variant::Standard),
            "no-sampling" => Ok(Variant::NoSampling),
            "no-representative-balls" | "no-rep-balls" => Ok(Variant::NoRepresentativeBalls),
            other => Err(Error::InvalidParameter(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbskParams {
    /// Number of sample sets.
    pub s: usize,
    /// Sampling proportion in `(0, 1]`.
    pub alpha: f64,
    /// Ball budget per sample set.
    pub budget: BallBudget,
    /// Number of clusters.
    pub k: usize,
    pub master_seed: u64,
    pub variant: Variant,
}

impl GbskParams {
    pub fn validate(&self) -> Result<()> {
        if self.s == 0 {
            return Err(Error::InvalidParameter("s must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        check_alpha(self.alpha)?;
        if let BallBudget::Bounded(m) = self.budget {
            if m < self.k {
                return Err(Error::InvalidParameter(format!(
                    "M = {m} must be at least k = {}",
                    self.k
                )));
            }
        }
        Ok(())
    }
}

/// The one-parameter preset: `s = 30`, `alpha = 1/sqrt(n)`, `M = 10k`.
pub fn agbsk_params(n: usize, k: usize, master_seed: u64) -> GbskParams {
    GbskParams {
        s: 30,
        alpha: default_alpha(n),
        budget: default_budget(k),
        k,
        master_seed,
        variant: Variant::Standard,
    }
}

pub fn default_alpha(n: usize) -> f64 {
    (1.0 / libm::sqrt(n.max(1) as f64)).min(1.0)
}

pub fn default_budget(k: usize) -> BallBudget {
    BallBudget::Bounded(10 * k)
}

/// Wall-clock time per pipeline step (zero without the `std` feature).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepTimings {
    pub sampling: Duration,
    pub representatives: Duration,
    pub key_balls: Duration,
    pub skeleton: Duration,
    pub labeling: Duration,
}

impl StepTimings {
    pub fn total(&self) -> Duration {
        self.sampling + self.representatives + self.key_balls + self.skeleton + self.labeling
    }

    /// Steps 1 to 5 in order.
    pub fn steps(&self) -> [Duration; 5] {
        [
            self.sampling,
            self.representatives,
            self.key_balls,
            self.skeleton,
            self.labeling,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Diagnostics {
    /// Points per sample set (0 when sampling is skipped).
    pub sample_size: usize,
    pub balls_per_sample: Vec<usize>,
    /// Centers pooled into the key-ball / forest stage.
    pub rep_ball_count: usize,
    /// `W`, nodes of the skeleton forest.
    pub key_ball_count: usize,
    pub root_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    /// Cluster label `1..=k` per input row.
    pub labels: Vec<u32>,
    pub timings: StepTimings,
    pub diagnostics: Diagnostics,
    pub key_balls: KeyBallSet,
    pub forest: SkeletonForest,
}

/// Runs the variant selected in `params`.
pub fn run_gbsk(dataset: &Dataset, params: &GbskParams) -> Result<ClusteringResult> {
    params.validate()?;
    match params.variant {
        Variant::Standard => run_sampled(dataset, params),
        _ => run_ablation(dataset, params),
    }
}

/// Runs one of the ablation variants. Rejects [`Variant::Standard`].
pub fn run_ablation(dataset: &Dataset, params: &GbskParams) -> Result<ClusteringResult> {
    params.validate()?;
    match params.variant {
        Variant::Standard => Err(Error::InvalidParameter(
            "run_ablation needs a non-standard variant".into(),
        )),
        Variant::NoSampling => run_unsampled(dataset, params),
        Variant::NoRepresentativeBalls => run_sampled(dataset, params),
    }
}

struct SampleOutcome {
    ball_count: usize,
    pooled: Vec<GranularBall>,
}

fn run_sampled(dataset: &Dataset, params: &GbskParams) -> Result<ClusteringResult> {
    let mut timings = StepTimings::default();
    let mut diagnostics = Diagnostics::default();
    let points = dataset.points();
    let d = dataset.d();
    let k = params.k;
    let pool_all = params.variant == Variant::NoRepresentativeBalls;

    // Step 1: sample sets
    let clock = Stopwatch::start();
    let floor = 2 * k;
    let samples = sample_with_floor(dataset, params.s, params.alpha, params.master_seed, floor)?;
    diagnostics.sample_size = sample_size(dataset.n(), params.alpha, floor);
    timings.sampling = clock.elapsed();

    // Step 2: balls per sample, then representatives
    let clock = Stopwatch::start();
    let outcomes: Vec<Result<SampleOutcome>> = par::map_range(samples.len(), |i| {
        let data = samples[i].gather(points);
        let view = Points::new(&data, d)?;
        let mut rng = rng::stream(params.master_seed, stage::SAMPLE_BALLS, i as u64);
        let set = generate_balls(view, params.budget, &mut rng)?;
        let ball_count = set.len();
        let pooled = if pool_all {
            set.balls
        } else {
            // a sample whose first split was refused can hold fewer than k balls
            identify_peak_balls(&set.balls, k.min(set.len()))?
                .into_iter()
                .map(|p| set.balls[p].clone())
                .collect()
        };
        Ok(SampleOutcome { ball_count, pooled })
    });
    let mut pooled = Vec::new();
    for outcome in outcomes {
        let outcome = outcome?;
        diagnostics.balls_per_sample.push(outcome.ball_count);
        pooled.extend(outcome.pooled);
    }
    diagnostics.rep_ball_count = pooled.len();
    timings.representatives = clock.elapsed();

    // Step 3: key balls over the pooled centers
    let clock = Stopwatch::start();
    let key_balls = if pool_all {
        KeyBallSet { balls: pooled }
    } else {
        let centers: Vec<f64> = pooled.iter().flat_map(|b| b.center.iter().copied()).collect();
        let mut rng = rng::stream(params.master_seed, stage::KEY_BALLS, 0);
        build_key_balls(Points::new(&centers, d)?, &mut rng)?
    };
    timings.key_balls = clock.elapsed();

    finish(dataset, params, key_balls, timings, diagnostics)
}

fn run_unsampled(dataset: &Dataset, params: &GbskParams) -> Result<ClusteringResult> {
    let mut timings = StepTimings::default();
    let mut diagnostics = Diagnostics::default();

    let clock = Stopwatch::start();
    let mut rng = rng::stream(params.master_seed, stage::FULL_BALLS, 0);
    let set = generate_balls(dataset.points(), BallBudget::Unlimited, &mut rng)?;
    diagnostics.balls_per_sample.push(set.len());
    diagnostics.rep_ball_count = set.len();
    timings.key_balls = clock.elapsed();

    finish(dataset, params, KeyBallSet::from(set), timings, diagnostics)
}

/// Steps 4 and 5: forest over the key balls, then point labels.
fn finish(
    dataset: &Dataset,
    params: &GbskParams,
    key_balls: KeyBallSet,
    mut timings: StepTimings,
    mut diagnostics: Diagnostics,
) -> Result<ClusteringResult> {
    let clock = Stopwatch::start();
    let forest = construct_forest(&key_balls.balls, params.k)?;
    diagnostics.key_ball_count = key_balls.len();
    diagnostics.root_count = forest.roots.len();
    timings.skeleton = clock.elapsed();

    let clock = Stopwatch::start();
    let labels = label_points(dataset.points(), &forest, &key_balls.balls);
    timings.labeling = clock.elapsed();

    Ok(ClusteringResult {
        labels,
        timings,
        diagnostics,
        key_balls,
        forest,
    })
}
