//! Parameter-grid benchmarks and runtime scaling summaries.

use std::io::Write;
use std::path::{Path, PathBuf};

use gbsk_core::dataset::generate_synthetic;
use gbsk_core::metrics::scores;
use gbsk_core::pipeline::{default_alpha, default_budget, Variant};
use gbsk_core::{run_gbsk, BallBudget, Dataset, GbskParams, SyntheticSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::io::{load_dataset, read_labels, Format};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("dataset {name}: {msg}")]
    Dataset { name: String, msg: String },
    #[error("scaling report needs at least 2 dataset sizes, found {0}")]
    InsufficientSizes(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SyntheticPlan {
    pub cluster_count: usize,
    pub points_per_cluster: usize,
    pub dimension: usize,
    #[serde(default = "default_spread")]
    pub center_spread: f64,
    #[serde(default = "default_std")]
    pub cluster_std: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_spread() -> f64 {
    10.0
}

fn default_std() -> f64 {
    1.0
}

impl From<&SyntheticPlan> for SyntheticSpec {
    fn from(p: &SyntheticPlan) -> Self {
        SyntheticSpec {
            cluster_count: p.cluster_count,
            points_per_cluster: p.points_per_cluster,
            dimension: p.dimension,
            center_spread: p.center_spread,
            cluster_std: p.cluster_std,
            seed: p.seed,
        }
    }
}

/// A generated dataset or a file on disk. Exactly one of `synthetic` and
/// `path` must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetPlan {
    pub name: String,
    #[serde(default)]
    pub synthetic: Option<SyntheticPlan>,
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// `csv` or `bin`; guessed from the extension when absent.
    #[serde(default)]
    pub format: Option<String>,
    /// Last CSV column holds ground-truth labels.
    #[serde(default)]
    pub has_labels: bool,
    /// Ground-truth labels file, one integer per line.
    #[serde(default)]
    pub truth: Option<PathBuf>,
    /// Cluster count; defaults to the synthetic cluster count.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub normalize: bool,
}

/// Lists of values to sweep. An absent list means the preset default
/// (`s = 30`, `alpha = 1/sqrt(n)`, `M = 10k`, standard variant).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ParamGrid {
    #[serde(default)]
    pub s: Option<Vec<usize>>,
    #[serde(default)]
    pub alpha: Option<Vec<f64>>,
    /// `-1` for unlimited.
    #[serde(default)]
    pub m: Option<Vec<i64>>,
    #[serde(default)]
    pub variant: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchPlan {
    pub datasets: Vec<DatasetPlan>,
    #[serde(default)]
    pub grid: ParamGrid,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default = "zero_seed")]
    pub seeds: Vec<u64>,
    /// Run cells in parallel. Timings are then not comparable; meant for
    /// label-only sweeps.
    #[serde(default)]
    pub parallel_cells: bool,
}

fn one() -> usize {
    1
}

fn zero_seed() -> Vec<u64> {
    vec![0]
}

fn nonempty<T>(name: &str, list: &Option<Vec<T>>) -> Result<(), BenchError> {
    match list {
        Some(v) if v.is_empty() => Err(BenchError::Plan(format!("grid.{name} is empty"))),
        _ => Ok(()),
    }
}

impl BenchPlan {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let plan: BenchPlan = serde_json::from_str(text).map_err(|e| BenchError::Plan(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.repetitions == 0 {
            return Err(BenchError::Plan("repetitions must be at least 1".into()));
        }
        if self.datasets.is_empty() {
            return Err(BenchError::Plan("no datasets".into()));
        }
        if self.seeds.is_empty() {
            return Err(BenchError::Plan("no seeds".into()));
        }
        nonempty("s", &self.grid.s)?;
        nonempty("alpha", &self.grid.alpha)?;
        nonempty("m", &self.grid.m)?;
        nonempty("variant", &self.grid.variant)?;
        for ds in &self.datasets {
            if ds.synthetic.is_some() == ds.path.is_some() {
                return Err(BenchError::Plan(format!(
                    "dataset {}: set exactly one of synthetic and path",
                    ds.name
                )));
            }
            if ds.path.is_some() && ds.k.is_none() {
                return Err(BenchError::Plan(format!("dataset {}: k is required for files", ds.name)));
            }
        }
        Ok(())
    }
}

/// A loaded dataset with its cluster count.
pub struct Prepared {
    pub name: String,
    pub dataset: Dataset,
    pub k: usize,
    pub truth: Option<Vec<i64>>,
}

pub fn prepare(plan: &DatasetPlan, base: &Path) -> Result<Prepared, BenchError> {
    let fail = |msg: String| BenchError::Dataset {
        name: plan.name.clone(),
        msg,
    };
    let mut dataset = if let Some(syn) = &plan.synthetic {
        generate_synthetic(&syn.into()).map_err(|e| fail(e.to_string()))?
    } else {
        let path = base.join(plan.path.as_ref().expect("validated"));
        let format = match &plan.format {
            Some(f) => f.parse::<Format>().map_err(fail)?,
            None => Format::from_path(&path),
        };
        load_dataset(&path, format, plan.has_labels).map_err(|e| fail(e.to_string()))?
    };
    if plan.normalize {
        dataset.normalize_min_max();
    }
    let truth = match &plan.truth {
        Some(p) => Some(read_labels(&base.join(p)).map_err(|e| fail(e.to_string()))?),
        None => dataset.labels().map(<[i64]>::to_vec),
    };
    if let Some(t) = &truth {
        if t.len() != dataset.n() {
            return Err(fail(format!("{} truth labels for {} points", t.len(), dataset.n())));
        }
    }
    let k = plan
        .k
        .or(plan.synthetic.as_ref().map(|s| s.cluster_count))
        .expect("validated");
    Ok(Prepared {
        name: plan.name.clone(),
        dataset,
        k,
        truth,
    })
}

/// One repetition of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRow {
    pub dataset: String,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub s: usize,
    pub alpha: f64,
    pub m: i64,
    pub variant: String,
    pub seed: u64,
    pub rep: usize,
    /// Steps 1 to 5 in milliseconds, `None` when the run failed.
    pub steps_ms: Option<[f64; 5]>,
    pub total_ms: Option<f64>,
    pub key_balls: Option<usize>,
    pub acc: Option<f64>,
    pub ari: Option<f64>,
    pub ami: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    dataset: usize,
    s: usize,
    alpha: Option<f64>,
    m: Option<i64>,
    variant: Variant,
    seed: u64,
}

fn expand(plan: &BenchPlan, datasets: usize) -> Result<Vec<Cell>, BenchError> {
    let s_list: Vec<usize> = plan.grid.s.clone().unwrap_or_else(|| vec![30]);
    let alpha_list: Vec<Option<f64>> = plan
        .grid
        .alpha
        .as_ref()
        .map_or(vec![None], |v| v.iter().copied().map(Some).collect());
    let m_list: Vec<Option<i64>> = plan
        .grid
        .m
        .as_ref()
        .map_or(vec![None], |v| v.iter().copied().map(Some).collect());
    let variants: Vec<Variant> = match &plan.grid.variant {
        None => vec![Variant::Standard],
        Some(v) => v
            .iter()
            .map(|s| s.parse().map_err(|e: gbsk_core::Error| BenchError::Plan(e.to_string())))
            .collect::<Result<_, _>>()?,
    };
    let mut cells = Vec::new();
    for dataset in 0..datasets {
        for &s in &s_list {
            for &alpha in &alpha_list {
                for &m in &m_list {
                    for &variant in &variants {
                        for &seed in &plan.seeds {
                            cells.push(Cell {
                                dataset,
                                s,
                                alpha,
                                m,
                                variant,
                                seed,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(cells)
}

fn run_cell(data: &Prepared, cell: &Cell, repetitions: usize) -> Vec<BenchRow> {
    let n = data.dataset.n();
    let alpha = cell.alpha.unwrap_or_else(|| default_alpha(n));
    let budget = match cell.m {
        None => Ok(default_budget(data.k)),
        Some(m) => BallBudget::from_signed(m),
    };
    let row = |rep: usize| BenchRow {
        dataset: data.name.clone(),
        n,
        d: data.dataset.d(),
        k: data.k,
        s: cell.s,
        alpha,
        m: budget.as_ref().map_or(0, |b| b.as_signed()),
        variant: cell.variant.name().to_string(),
        seed: cell.seed,
        rep,
        steps_ms: None,
        total_ms: None,
        key_balls: None,
        acc: None,
        ari: None,
        ami: None,
        error: None,
    };
    (0..repetitions)
        .map(|rep| {
            let mut out = row(rep);
            let outcome = budget.clone().and_then(|budget| {
                let params = GbskParams {
                    s: cell.s,
                    alpha,
                    budget,
                    k: data.k,
                    master_seed: cell.seed,
                    variant: cell.variant,
                };
                run_gbsk(&data.dataset, &params)
            });
            match outcome {
                Ok(result) => {
                    out.steps_ms = Some(result.timings.steps().map(|t| t.as_secs_f64() * 1e3));
                    out.total_ms = Some(result.timings.total().as_secs_f64() * 1e3);
                    out.key_balls = Some(result.diagnostics.key_ball_count);
                    if let Some(truth) = &data.truth {
                        if let Ok(sc) = scores(&result.labels, truth) {
                            out.acc = Some(sc.acc);
                            out.ari = Some(sc.ari);
                            out.ami = Some(sc.ami);
                        }
                    }
                }
                Err(e) => out.error = Some(e.to_string()),
            }
            out
        })
        .collect()
}

/// Runs every (dataset, parameter combination, seed) cell `repetitions`
/// times. Failed runs are recorded in the row's `error` field. Dataset
/// generation and loading are not timed. Relative paths resolve against
/// `base`.
pub fn run_bench(plan: &BenchPlan, base: &Path) -> Result<Vec<BenchRow>, BenchError> {
    plan.validate()?;
    let prepared: Vec<Prepared> = plan
        .datasets
        .iter()
        .map(|d| prepare(d, base))
        .collect::<Result<_, _>>()?;
    let cells = expand(plan, prepared.len())?;
    let rows: Vec<Vec<BenchRow>> = if plan.parallel_cells {
        cells
            .par_iter()
            .map(|c| run_cell(&prepared[c.dataset], c, plan.repetitions))
            .collect()
    } else {
        cells
            .iter()
            .map(|c| {
                log::info!("{} s={} seed={}", prepared[c.dataset].name, c.s, c.seed);
                run_cell(&prepared[c.dataset], c, plan.repetitions)
            })
            .collect()
    };
    Ok(rows.into_iter().flatten().collect())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub const RESULTS_HEADER: &str = "dataset,n,d,k,s,alpha,m,variant,seed,rep,step1_ms,step2_ms,step3_ms,step4_ms,step5_ms,total_ms,key_balls,acc,ari,ami,error";

/// One line per repetition.
pub fn write_results_csv<W: Write>(w: &mut W, rows: &[BenchRow]) -> std::io::Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(RESULTS_HEADER.split(','))?;
    for r in rows {
        let steps: Vec<String> = (0..5).map(|i| opt(r.steps_ms.map(|s| s[i]))).collect();
        let mut rec = vec![
            r.dataset.clone(),
            r.n.to_string(),
            r.d.to_string(),
            r.k.to_string(),
            r.s.to_string(),
            r.alpha.to_string(),
            r.m.to_string(),
            r.variant.clone(),
            r.seed.to_string(),
            r.rep.to_string(),
        ];
        rec.extend(steps);
        rec.extend([
            opt(r.total_ms),
            opt(r.key_balls),
            opt(r.acc),
            opt(r.ari),
            opt(r.ami),
            r.error.clone().unwrap_or_default(),
        ]);
        out.write_record(&rec)?;
    }
    out.flush()
}

/// Mean and 95% Student-t half-width; the half-width is `None` below two samples.
pub fn mean_ci(xs: &[f64]) -> Option<(f64, Option<f64>)> {
    if xs.is_empty() {
        return None;
    }
    let r = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / r;
    if xs.len() < 2 {
        return Some((mean, None));
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (r - 1.0);
    let t = StudentsT::new(0.0, 1.0, r - 1.0).ok()?.inverse_cdf(0.975);
    Some((mean, Some(t * (var / r).sqrt())))
}

/// Aggregate over the repetitions of one (dataset, parameters, seed) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CellSummary {
    pub dataset: String,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub s: usize,
    pub alpha: f64,
    pub m: i64,
    pub variant: String,
    pub seed: u64,
    pub repetitions: usize,
    pub failures: usize,
    pub total_ms_mean: Option<f64>,
    pub total_ms_ci95: Option<f64>,
    pub steps_ms_mean: Option<[f64; 5]>,
    pub steps_ms_ci95: Option<[f64; 5]>,
    pub acc: Option<f64>,
    pub ari: Option<f64>,
    pub ami: Option<f64>,
    pub first_error: Option<String>,
}

type CellKey = (String, usize, i64, u64, u64, String);

fn key(r: &BenchRow) -> CellKey {
    (r.dataset.clone(), r.s, r.m, r.alpha.to_bits(), r.seed, r.variant.clone())
}

pub fn summarize(rows: &[BenchRow]) -> Vec<CellSummary> {
    let mut order: Vec<CellKey> = Vec::new();
    let mut groups: std::collections::HashMap<CellKey, Vec<&BenchRow>> = Default::default();
    for r in rows {
        let k = key(r);
        if !groups.contains_key(&k) {
            order.push(k.clone());
        }
        groups.entry(k).or_default().push(r);
    }
    order
        .iter()
        .map(|k| {
            let g = &groups[k];
            let first = g[0];
            let ok: Vec<&&BenchRow> = g.iter().filter(|r| r.error.is_none()).collect();
            let totals: Vec<f64> = ok.iter().filter_map(|r| r.total_ms).collect();
            let total = mean_ci(&totals);
            let steps: Vec<Option<(f64, Option<f64>)>> = (0..5)
                .map(|i| {
                    let xs: Vec<f64> = ok.iter().filter_map(|r| r.steps_ms.map(|s| s[i])).collect();
                    mean_ci(&xs)
                })
                .collect();
            let steps_mean = steps.iter().map(|s| s.map(|(m, _)| m)).collect::<Option<Vec<_>>>();
            let steps_ci = steps.iter().map(|s| s.and_then(|(_, c)| c)).collect::<Option<Vec<_>>>();
            let avg = |f: fn(&BenchRow) -> Option<f64>| {
                let xs: Vec<f64> = ok.iter().filter_map(|r| f(r)).collect();
                mean_ci(&xs).map(|(m, _)| m)
            };
            CellSummary {
                dataset: first.dataset.clone(),
                n: first.n,
                d: first.d,
                k: first.k,
                s: first.s,
                alpha: first.alpha,
                m: first.m,
                variant: first.variant.clone(),
                seed: first.seed,
                repetitions: g.len(),
                failures: g.len() - ok.len(),
                total_ms_mean: total.map(|(m, _)| m),
                total_ms_ci95: total.and_then(|(_, c)| c),
                steps_ms_mean: steps_mean.map(|v| [v[0], v[1], v[2], v[3], v[4]]),
                steps_ms_ci95: steps_ci.map(|v| [v[0], v[1], v[2], v[3], v[4]]),
                acc: avg(|r| r.acc),
                ari: avg(|r| r.ari),
                ami: avg(|r| r.ami),
                first_error: g.iter().find_map(|r| r.error.clone()),
            }
        })
        .collect()
}

pub const SUMMARY_HEADER: &str = "dataset,n,d,k,s,alpha,m,variant,seed,repetitions,failures,total_ms_mean,total_ms_ci95,step1_ms_mean,step1_ms_ci95,step2_ms_mean,step2_ms_ci95,step3_ms_mean,step3_ms_ci95,step4_ms_mean,step4_ms_ci95,step5_ms_mean,step5_ms_ci95,acc,ari,ami,error";

/// One line per cell; CI columns are empty with fewer than two successful repetitions.
pub fn write_summary_csv<W: Write>(w: &mut W, cells: &[CellSummary]) -> std::io::Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(SUMMARY_HEADER.split(','))?;
    for c in cells {
        let mut rec = vec![
            c.dataset.clone(),
            c.n.to_string(),
            c.d.to_string(),
            c.k.to_string(),
            c.s.to_string(),
            c.alpha.to_string(),
            c.m.to_string(),
            c.variant.clone(),
            c.seed.to_string(),
            c.repetitions.to_string(),
            c.failures.to_string(),
            opt(c.total_ms_mean),
            opt(c.total_ms_ci95),
        ];
        for i in 0..5 {
            rec.push(opt(c.steps_ms_mean.map(|s| s[i])));
            rec.push(opt(c.steps_ms_ci95.map(|s| s[i])));
        }
        rec.extend([opt(c.acc), opt(c.ari), opt(c.ami), c.first_error.clone().unwrap_or_default()]);
        out.write_record(&rec)?;
    }
    out.flush()
}

/// Least-squares slope of `ln(time)` against `ln(n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScalingSummary {
    pub sizes: Vec<usize>,
    /// Median total runtime per size, milliseconds.
    pub median_total_ms: Vec<f64>,
    pub slope: f64,
    /// Runtime growth between consecutive sizes, rescaled to a doubling of n.
    pub doubling_ratios: Vec<f64>,
    /// Slope above [`SLOPE_LIMIT`].
    pub regression: bool,
}

pub const SLOPE_LIMIT: f64 = 1.3;

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Scaling of total runtime in `n` over `(n, total_ms)` samples.
pub fn scaling_from_samples(samples: &[(usize, f64)]) -> Result<ScalingSummary, BenchError> {
    let mut sizes: Vec<usize> = samples.iter().map(|s| s.0).collect();
    sizes.sort();
    sizes.dedup();
    if sizes.len() < 2 {
        return Err(BenchError::InsufficientSizes(sizes.len()));
    }
    let median_total_ms: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            let mut xs: Vec<f64> = samples.iter().filter(|s| s.0 == n).map(|s| s.1).collect();
            median(&mut xs)
        })
        .collect();
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = median_total_ms.iter().map(|t| t.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let doubling_ratios = (1..sizes.len())
        .map(|i| {
            let growth = median_total_ms[i] / median_total_ms[i - 1];
            growth.powf(2f64.ln() / (xs[i] - xs[i - 1]))
        })
        .collect();
    Ok(ScalingSummary {
        sizes,
        median_total_ms,
        slope,
        doubling_ratios,
        regression: slope > SLOPE_LIMIT,
    })
}

/// Scaling over all successful rows, regardless of parameters.
pub fn scaling_report(rows: &[BenchRow]) -> Result<ScalingSummary, BenchError> {
    let samples: Vec<(usize, f64)> = rows.iter().filter_map(|r| r.total_ms.map(|t| (r.n, t))).collect();
    scaling_from_samples(&samples)
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchSummary {
    pub cells: Vec<CellSummary>,
    /// Absent when the plan covers fewer than two dataset sizes.
    pub scaling: Option<ScalingSummary>,
}

/// Writes `results.csv`, `summary.csv` and `summary.json` into `dir`.
pub fn write_outputs(dir: &Path, rows: &[BenchRow]) -> Result<BenchSummary, BenchError> {
    std::fs::create_dir_all(dir)?;
    let cells = summarize(rows);
    write_results_csv(&mut std::fs::File::create(dir.join("results.csv"))?, rows)?;
    write_summary_csv(&mut std::fs::File::create(dir.join("summary.csv"))?, &cells)?;
    let summary = BenchSummary {
        cells,
        scaling: scaling_report(rows).ok(),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(std::io::Error::other)?;
    std::fs::write(dir.join("summary.json"), json)?;
    Ok(summary)
}
