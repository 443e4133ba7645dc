//! JSON run reports.

use std::time::Duration;

use gbsk_core::metrics::Scores;
use gbsk_core::pipeline::{ClusteringResult, StepTimings};
use gbsk_core::GbskParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ParamsReport {
    pub s: usize,
    pub alpha: f64,
    /// `-1` for an unlimited ball budget.
    pub m: i64,
    pub k: usize,
    pub seed: u64,
    pub variant: String,
}

impl From<&GbskParams> for ParamsReport {
    fn from(p: &GbskParams) -> Self {
        Self {
            s: p.s,
            alpha: p.alpha,
            m: p.budget.as_signed(),
            k: p.k,
            seed: p.master_seed,
            variant: p.variant.name().to_string(),
        }
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TimingsReport {
    pub step1: f64,
    pub step2: f64,
    pub step3: f64,
    pub step4: f64,
    pub step5: f64,
    pub total: f64,
}

impl From<&StepTimings> for TimingsReport {
    fn from(t: &StepTimings) -> Self {
        let [step1, step2, step3, step4, step5] = t.steps().map(ms);
        Self {
            step1,
            step2,
            step3,
            step4,
            step5,
            total: ms(t.total()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagnosticsReport {
    pub sample_size: usize,
    pub balls_per_sample: Vec<usize>,
    pub rep_ball_count: usize,
    pub key_ball_count: usize,
    pub root_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub acc: f64,
    pub ari: f64,
    pub ami: f64,
}

impl From<Scores> for MetricsReport {
    fn from(s: Scores) -> Self {
        Self {
            acc: s.acc,
            ari: s.ari,
            ami: s.ami,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub n: usize,
    pub d: usize,
    pub params: ParamsReport,
    /// Milliseconds per step; dataset loading is excluded.
    pub step_timings_ms: TimingsReport,
    pub diagnostics: DiagnosticsReport,
    /// Present when ground truth was available.
    pub metrics: Option<MetricsReport>,
}

impl RunReport {
    pub fn new(n: usize, d: usize, params: &GbskParams, result: &ClusteringResult, scores: Option<Scores>) -> Self {
        let diag = &result.diagnostics;
        Self {
            n,
            d,
            params: params.into(),
            step_timings_ms: (&result.timings).into(),
            diagnostics: DiagnosticsReport {
                sample_size: diag.sample_size,
                balls_per_sample: diag.balls_per_sample.clone(),
                rep_ball_count: diag.rep_ball_count,
                key_ball_count: diag.key_ball_count,
                root_count: diag.root_count,
            },
            metrics: scores.map(Into::into),
        }
    }
}
