//! External clustering validation measures (adjusted Rand, adjusted mutual
//! information, homogeneity/completeness/V-measure), disagreement-based
//! ground-truth ambiguity, and Spearman rank correlation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ClamsError, Result};
use crate::types::Clustering;

/// How unassigned (−1) points are treated when two clusterings are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NoiseHandling {
    /// Drop a point when it is unassigned in either clustering. A lasso
    /// omission is "no judgment", not a judged noise cluster.
    #[default]
    ExcludePairwise,
    /// Give each unassigned point its own singleton cluster (sensitivity
    /// check).
    TreatAsSingletons,
}

/// Joint label counts over the points included in a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    row_totals: Vec<u64>,
    col_totals: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_totals(&self) -> &[u64] {
        &self.row_totals
    }

    pub fn col_totals(&self) -> &[u64] {
        &self.col_totals
    }
}

/// Builds the contingency table of two clusterings with the default
/// (exclude-pairwise) noise handling.
pub fn contingency(a: &Clustering, b: &Clustering) -> Result<ContingencyTable> {
    contingency_with(a, b, NoiseHandling::ExcludePairwise)
}

pub fn contingency_with(
    a: &Clustering,
    b: &Clustering,
    noise: NoiseHandling,
) -> Result<ContingencyTable> {
    if a.len() != b.len() {
        return Err(ClamsError::LengthMismatch(a.len(), b.len()));
    }
    // Deterministic compact relabeling via ordered maps; fresh ids beyond the
    // real labels host the singleton treatment.
    let mut row_ids: BTreeMap<i64, usize> = BTreeMap::new();
    let mut col_ids: BTreeMap<i64, usize> = BTreeMap::new();
    let mut included: Vec<(usize, usize)> = Vec::new();
    let mut extra_rows = 0usize;
    let mut extra_cols = 0usize;
    for (&la, &lb) in a.labels().iter().zip(b.labels()) {
        match noise {
            NoiseHandling::ExcludePairwise => {
                if la < 0 || lb < 0 {
                    continue;
                }
            }
            NoiseHandling::TreatAsSingletons => {}
        }
        let ra = if la >= 0 {
            let next = row_ids.len();
            *row_ids.entry(la).or_insert(next)
        } else {
            extra_rows += 1;
            usize::MAX - extra_rows
        };
        let cb = if lb >= 0 {
            let next = col_ids.len();
            *col_ids.entry(lb).or_insert(next)
        } else {
            extra_cols += 1;
            usize::MAX - extra_cols
        };
        included.push((ra, cb));
    }
    if included.is_empty() {
        return Err(ClamsError::EmptyOverlap);
    }
    // Map the provisional singleton ids into the compact index space.
    let n_rows = row_ids.len() + extra_rows;
    let n_cols = col_ids.len() + extra_cols;
    let mut counts = vec![vec![0u64; n_cols]; n_rows];
    let mut next_row = row_ids.len();
    let mut next_col = col_ids.len();
    let mut row_remap: BTreeMap<usize, usize> = BTreeMap::new();
    let mut col_remap: BTreeMap<usize, usize> = BTreeMap::new();
    for (ra, cb) in included {
        let r = if ra >= row_ids.len() {
            *row_remap.entry(ra).or_insert_with(|| {
                let v = next_row;
                next_row += 1;
                v
            })
        } else {
            ra
        };
        let c = if cb >= col_ids.len() {
            *col_remap.entry(cb).or_insert_with(|| {
                let v = next_col;
                next_col += 1;
                v
            })
        } else {
            cb
        };
        counts[r][c] += 1;
    }
    let row_totals: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
    let col_totals: Vec<u64> = (0..n_cols).map(|c| counts.iter().map(|r| r[c]).sum()).collect();
    let total = row_totals.iter().sum();
    Ok(ContingencyTable {
        counts,
        row_totals,
        col_totals,
        total,
    })
}

fn comb2(n: u64) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// Adjusted Rand index from a contingency table (Hubert–Arabie adjustment).
pub fn ari_from_table(t: &ContingencyTable) -> f64 {
    let index: f64 = t
        .counts
        .iter()
        .flat_map(|row| row.iter())
        .map(|&c| comb2(c))
        .sum();
    let sum_rows: f64 = t.row_totals.iter().map(|&c| comb2(c)).sum();
    let sum_cols: f64 = t.col_totals.iter().map(|&c| comb2(c)).sum();
    let pairs = comb2(t.total);
    if pairs == 0.0 {
        return 1.0;
    }
    // Scaled by the pair count so small cases stay exact: all terms are
    // integers (products of pair counts) before the one division.
    let numerator = pairs * index - sum_rows * sum_cols;
    let denominator = pairs * 0.5 * (sum_rows + sum_cols) - sum_rows * sum_cols;
    if denominator.abs() < 1e-9 {
        // Both partitions are trivially identical (all one cluster or all
        // singletons).
        1.0
    } else {
        numerator / denominator
    }
}

/// Standard adjusted Rand index; 1 for identical partitions, 0 expected for
/// independent random labelings.
pub fn adjusted_rand(a: &Clustering, b: &Clustering) -> Result<f64> {
    Ok(ari_from_table(&contingency(a, b)?))
}

fn entropy(totals: &[u64], n: f64) -> f64 {
    totals
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn mutual_information(t: &ContingencyTable) -> f64 {
    let n = t.total as f64;
    let mut mi = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let nij = c as f64;
            mi += nij / n * ((n * nij) / (t.row_totals[i] as f64 * t.col_totals[j] as f64)).ln();
        }
    }
    mi
}

/// Expected mutual information under the hypergeometric (permutation) model.
fn expected_mutual_information(t: &ContingencyTable) -> f64 {
    let n = t.total;
    let nf = n as f64;
    // ln k! table for all counts that appear.
    let mut lnfact = vec![0.0f64; (n + 1) as usize];
    for i in 1..=n as usize {
        lnfact[i] = lnfact[i - 1] + (i as f64).ln();
    }
    let lf = |x: u64| lnfact[x as usize];
    let mut emi = 0.0;
    for &ai in &t.row_totals {
        if ai == 0 {
            continue;
        }
        for &bj in &t.col_totals {
            if bj == 0 {
                continue;
            }
            let start = 1.max((ai + bj).saturating_sub(n));
            let end = ai.min(bj);
            for nij in start..=end {
                let nijf = nij as f64;
                let log_term = ((nf * nijf) / (ai as f64 * bj as f64)).ln();
                let log_prob = lf(ai) + lf(bj) + lf(n - ai) + lf(n - bj)
                    - lf(n)
                    - lf(nij)
                    - lf(ai - nij)
                    - lf(bj - nij)
                    - lf(n + nij - ai - bj);
                emi += (nijf / nf) * log_term * log_prob.exp();
            }
        }
    }
    emi
}

/// Adjusted mutual information with the arithmetic-mean normalizer and
/// natural-log entropies; 0/0 maps to 0.
pub fn adjusted_mutual_info(a: &Clustering, b: &Clustering) -> Result<f64> {
    let t = contingency(a, b)?;
    Ok(ami_from_table(&t))
}

pub fn ami_from_table(t: &ContingencyTable) -> f64 {
    let n = t.total as f64;
    let h_a = entropy(&t.row_totals, n);
    let h_b = entropy(&t.col_totals, n);
    let mi = mutual_information(t);
    let emi = expected_mutual_information(t);
    let denom = 0.5 * (h_a + h_b) - emi;
    if denom.abs() < 1e-12 {
        0.0
    } else {
        (mi - emi) / denom
    }
}

/// Homogeneity, completeness, and V-measure of predicted clusters `b`
/// against reference classes `a`.
pub fn homogeneity_completeness_v(a: &Clustering, b: &Clustering) -> Result<(f64, f64, f64)> {
    let t = contingency(a, b)?;
    Ok(hcv_from_table(&t))
}

pub fn hcv_from_table(t: &ContingencyTable) -> (f64, f64, f64) {
    let n = t.total as f64;
    let h_c = entropy(&t.row_totals, n);
    let h_k = entropy(&t.col_totals, n);
    // H(C|K): entropy of classes within each cluster.
    let mut h_c_given_k = 0.0;
    let mut h_k_given_c = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let nij = c as f64;
            h_c_given_k -= nij / n * (nij / t.col_totals[j] as f64).ln();
            h_k_given_c -= nij / n * (nij / t.row_totals[i] as f64).ln();
        }
    }
    let h = if h_c == 0.0 { 1.0 } else { 1.0 - h_c_given_k / h_c };
    let c = if h_k == 0.0 { 1.0 } else { 1.0 - h_k_given_c / h_k };
    let v = if h + c == 0.0 { 0.0 } else { 2.0 * h * c / (h + c) };
    (h, c, v)
}

/// Which external validation measure to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvmKind {
    #[serde(rename = "ami")]
    Ami,
    #[serde(rename = "arand")]
    Arand,
    #[serde(rename = "vm")]
    VMeasure,
    #[serde(rename = "homo")]
    Homogeneity,
    #[serde(rename = "comp")]
    Completeness,
}

impl EvmKind {
    pub const ALL: [EvmKind; 5] = [
        EvmKind::Ami,
        EvmKind::Arand,
        EvmKind::VMeasure,
        EvmKind::Homogeneity,
        EvmKind::Completeness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EvmKind::Ami => "ami",
            EvmKind::Arand => "arand",
            EvmKind::VMeasure => "vm",
            EvmKind::Homogeneity => "homo",
            EvmKind::Completeness => "comp",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "ami" => Ok(EvmKind::Ami),
            "arand" => Ok(EvmKind::Arand),
            "vm" => Ok(EvmKind::VMeasure),
            "homo" => Ok(EvmKind::Homogeneity),
            "comp" => Ok(EvmKind::Completeness),
            other => Err(ClamsError::InvalidConfig(format!("unknown EVM `{other}`"))),
        }
    }

    /// Agreement score of two clusterings under this measure.
    pub fn evaluate(self, a: &Clustering, b: &Clustering) -> Result<f64> {
        self.evaluate_with(a, b, NoiseHandling::ExcludePairwise)
    }

    pub fn evaluate_with(self, a: &Clustering, b: &Clustering, noise: NoiseHandling) -> Result<f64> {
        let t = contingency_with(a, b, noise)?;
        Ok(match self {
            EvmKind::Ami => ami_from_table(&t),
            EvmKind::Arand => ari_from_table(&t),
            EvmKind::VMeasure => hcv_from_table(&t).2,
            EvmKind::Homogeneity => hcv_from_table(&t).0,
            EvmKind::Completeness => hcv_from_table(&t).1,
        })
    }
}

/// Disagreement-based ground-truth ambiguity of a set of clusterings:
/// `1 − mean pairwise agreement`, clipped to [0, 1].
///
/// Pairs with no co-assigned points are skipped; it is an error if every
/// pair is skipped.
pub fn ground_truth_ambiguity(clusterings: &[Clustering], evm: EvmKind) -> Result<f64> {
    ground_truth_ambiguity_with(clusterings, evm, NoiseHandling::ExcludePairwise)
}

pub fn ground_truth_ambiguity_with(
    clusterings: &[Clustering],
    evm: EvmKind,
    noise: NoiseHandling,
) -> Result<f64> {
    if clusterings.len() < 2 {
        return Err(ClamsError::TooFewClusterings(clusterings.len()));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..clusterings.len() {
        for j in (i + 1)..clusterings.len() {
            match evm.evaluate_with(&clusterings[i], &clusterings[j], noise) {
                Ok(score) => {
                    sum += score;
                    count += 1;
                }
                Err(ClamsError::EmptyOverlap) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    if count == 0 {
        return Err(ClamsError::EmptyOverlap);
    }
    Ok((1.0 - sum / count as f64).clamp(0.0, 1.0))
}

/// Average ranks with ties broken by averaging (fractional ranks).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j share the mean of their 1-based ranks.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's ρ: Pearson correlation of average-ranked sequences.
pub fn spearman_rho(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 3 {
        return Err(ClamsError::LengthMismatch(a.len(), b.len()));
    }
    if a.iter().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) {
        return Err(ClamsError::NonFinite("rank correlation input".into()));
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for i in 0..a.len() {
        let (xa, xb) = (ra[i] - mean, rb[i] - mean);
        num += xa * xb;
        da += xa * xa;
        db += xb * xb;
    }
    if da == 0.0 || db == 0.0 {
        return Err(ClamsError::ZeroVariance);
    }
    Ok(num / (da * db).sqrt())
}
