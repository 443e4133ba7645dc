//! External clustering quality: matched accuracy, ARI and AMI.
//!
//! All three take label slices of any ordered type and are invariant under
//! relabeling. Logarithms are natural.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Counts of (predicted cluster, true class) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub total: u64,
}

fn dense_ids<L: Ord + Copy>(labels: &[L]) -> (Vec<usize>, usize) {
    let mut map = BTreeMap::new();
    for &l in labels {
        let next = map.len();
        map.entry(l).or_insert(next);
    }
    (labels.iter().map(|l| map[l]).collect(), map.len())
}

impl ContingencyTable {
    pub fn new<A: Ord + Copy, B: Ord + Copy>(predicted: &[A], truth: &[B]) -> Result<Self> {
        if predicted.len() != truth.len() {
            return Err(Error::LengthMismatch {
                left: predicted.len(),
                right: truth.len(),
            });
        }
        let (p, rows) = dense_ids(predicted);
        let (t, cols) = dense_ids(truth);
        let mut counts = vec![0u64; rows * cols];
        for (&a, &b) in p.iter().zip(&t) {
            counts[a * cols + b] += 1;
        }
        Ok(Self::from_counts(rows, cols, counts))
    }

    /// Builds a table from a row-major `rows x cols` count matrix.
    pub fn from_counts(rows: usize, cols: usize, counts: Vec<u64>) -> Self {
        assert_eq!(counts.len(), rows * cols, "count matrix shape");
        let mut row_sums = vec![0u64; rows];
        let mut col_sums = vec![0u64; cols];
        for r in 0..rows {
            for c in 0..cols {
                row_sums[r] += counts[r * cols + c];
                col_sums[c] += counts[r * cols + c];
            }
        }
        let total = row_sums.iter().sum();
        Self {
            rows,
            cols,
            counts,
            row_sums,
            col_sums,
            total,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.counts[r * self.cols + c]
    }

    /// Largest number of points on the diagonal of any one-to-one matching
    /// between rows and columns.
    pub fn best_matching(&self) -> u64 {
        let n = self.rows.max(self.cols);
        if n == 0 {
            return 0;
        }
        let mut cost = vec![0i64; n * n];
        for r in 0..self.rows {
            for c in 0..self.cols {
                cost[r * n + c] = -(self.get(r, c) as i64);
            }
        }
        let assignment = hungarian(&cost, n);
        assignment
            .iter()
            .enumerate()
            .filter(|&(r, &c)| r < self.rows && c < self.cols)
            .map(|(r, &c)| self.get(r, c))
            .sum()
    }
}

/// Minimum-cost perfect assignment on an `n x n` matrix. Returns the column
/// assigned to each row.
fn hungarian(cost: &[i64], n: usize) -> Vec<usize> {
    const INF: i64 = i64::MAX / 4;
    // 1-based potentials; column 0 is a sentinel
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r0 = owner[col0];
            let mut delta = INF;
            let mut col1 = 0;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let cur = cost[(r0 - 1) * n + (col - 1)] - u[r0] - v[col];
                if cur < minv[col] {
                    minv[col] = cur;
                    way[col] = col0;
                }
                if minv[col] < delta {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for col in 1..=n {
        if owner[col] > 0 {
            assignment[owner[col] - 1] = col - 1;
        }
    }
    assignment
}

/// Fraction of points on the best one-to-one cluster/class matching.
pub fn accuracy<A: Ord + Copy, B: Ord + Copy>(predicted: &[A], truth: &[B]) -> Result<f64> {
    if predicted.is_empty() {
        return Err(Error::EmptyInput);
    }
    let table = ContingencyTable::new(predicted, truth)?;
    Ok(table.best_matching() as f64 / table.total as f64)
}

#[inline]
fn pairs(x: u64) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index under the permutation model.
pub fn ari<A: Ord + Copy, B: Ord + Copy>(predicted: &[A], truth: &[B]) -> Result<f64> {
    let table = ContingencyTable::new(predicted, truth)?;
    Ok(ari_from_table(&table))
}

pub fn ari_from_table(table: &ContingencyTable) -> f64 {
    let index: f64 = table.counts.iter().map(|&c| pairs(c)).sum();
    let sum_rows: f64 = table.row_sums.iter().map(|&c| pairs(c)).sum();
    let sum_cols: f64 = table.col_sums.iter().map(|&c| pairs(c)).sum();
    let all = pairs(table.total);
    let expected = if all > 0.0 { sum_rows * sum_cols / all } else { 0.0 };
    let max = 0.5 * (sum_rows + sum_cols);
    if max == expected {
        // both partitions are trivial in the same way (all-in-one or all singletons)
        return 1.0;
    }
    (index - expected) / (max - expected)
}

fn entropy(sums: &[u64], total: u64) -> f64 {
    let n = total as f64;
    sums.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * libm::log(p)
        })
        .sum()
}

pub fn mutual_information(table: &ContingencyTable) -> f64 {
    let n = table.total as f64;
    let mut mi = 0.0;
    for r in 0..table.rows {
        for c in 0..table.cols {
            let nij = table.get(r, c);
            if nij == 0 {
                continue;
            }
            let nij = nij as f64;
            let a = table.row_sums[r] as f64;
            let b = table.col_sums[c] as f64;
            mi += nij / n * (libm::log(nij) + libm::log(n) - libm::log(a) - libm::log(b));
        }
    }
    mi.max(0.0)
}

/// Expected mutual information of two random labelings with the table's
/// marginals (hypergeometric model).
pub fn expected_mutual_information(table: &ContingencyTable) -> f64 {
    let n = table.total;
    let nf = n as f64;
    let lg = |x: u64| libm::lgamma(x as f64 + 1.0);
    let lg_n = lg(n);
    let mut emi = 0.0;
    for &a in &table.row_sums {
        for &b in &table.col_sums {
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            let fixed = lg(a) + lg(b) + lg(n - a) + lg(n - b) - lg_n;
            let log_ab = libm::log(a as f64) + libm::log(b as f64);
            for nij in lo..=hi {
                let x = nij as f64;
                let log_p = fixed - lg(nij) - lg(a - nij) - lg(b - nij) - lg(n + nij - a - b);
                emi += x / nf * (libm::log(nf * x) - log_ab) * libm::exp(log_p);
            }
        }
    }
    emi
}

/// Adjusted mutual information with arithmetic-mean normalization.
pub fn ami<A: Ord + Copy, B: Ord + Copy>(predicted: &[A], truth: &[B]) -> Result<f64> {
    let table = ContingencyTable::new(predicted, truth)?;
    Ok(ami_from_table(&table))
}

pub fn ami_from_table(table: &ContingencyTable) -> f64 {
    let (r, c) = (table.rows, table.cols);
    // both sides carry no information (single cluster, or every point alone)
    if (r == c && r <= 1) || (r as u64 == table.total && c as u64 == table.total) {
        return 1.0;
    }
    let mi = mutual_information(table);
    let emi = expected_mutual_information(table);
    let h_rows = entropy(&table.row_sums, table.total);
    let h_cols = entropy(&table.col_sums, table.total);
    let norm = 0.5 * (h_rows + h_cols);
    let mut denom = norm - emi;
    if denom < 0.0 {
        denom = denom.min(-f64::EPSILON);
    } else {
        denom = denom.max(f64::EPSILON);
    }
    (mi - emi) / denom
}

/// ACC, ARI and AMI in one pass over the contingency table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub acc: f64,
    pub ari: f64,
    pub ami: f64,
}

pub fn scores<A: Ord + Copy, B: Ord + Copy>(predicted: &[A], truth: &[B]) -> Result<Scores> {
    if predicted.is_empty() {
        return Err(Error::EmptyInput);
    }
    let table = ContingencyTable::new(predicted, truth)?;
    Ok(Scores {
        acc: table.best_matching() as f64 / table.total as f64,
        ari: ari_from_table(&table),
        ami: ami_from_table(&table),
    })
}
