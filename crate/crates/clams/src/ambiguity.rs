//! Separability → local ambiguity (binary entropy) and the aggregated
//! per-scatterplot ambiguity score.

use crate::error::{ClamsError, Result};
use crate::features::pair_features;
use crate::gmm::{decompose, GmmFitConfig};
use crate::separability::SeparabilityModel;
use crate::types::{AmbiguityReport, PairAmbiguity, Scatterplot};

/// Base-2 binary entropy of a separability score.
///
/// `A(0) = A(1) = 0` (0·log0 := 0), `A(0.5) = 1`.
pub fn entropy_ambiguity(s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(ClamsError::OutOfRange(s));
    }
    let h = |p: f64| if p == 0.0 { 0.0 } else { -p * p.log2() };
    Ok(h(s) + h(1.0 - s))
}

/// Scores a scatterplot: decompose, predict pairwise separability, convert
/// to entropy, and average.
///
/// Points are canonically sorted first so the score does not depend on input
/// row order. With a single component there are no pairs and the score is 0.
pub fn clams_score(
    plot: &Scatterplot,
    model: &SeparabilityModel,
    gmm_cfg: &GmmFitConfig,
) -> Result<AmbiguityReport> {
    let sorted = plot.canonically_sorted();
    let decomposition = decompose(&sorted, gmm_cfg)?;
    let comps = decomposition.components();
    let mut pairs = Vec::with_capacity(comps.len() * (comps.len().saturating_sub(1)) / 2);
    for i in 0..comps.len() {
        for j in (i + 1)..comps.len() {
            let mut feats = pair_features(&comps[i], &comps[j])?;
            feats.pair = (i, j);
            let s = model.predict(&feats);
            let a = entropy_ambiguity(s)?;
            pairs.push(PairAmbiguity {
                pair: (i, j),
                separability: s,
                ambiguity: a,
            });
        }
    }
    AmbiguityReport::new(pairs, decomposition)
}
