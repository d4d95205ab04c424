//! Pairwise features of two Gaussian components: distance between centers
//! (DC), distance-size ratio (DSR), density difference (DD), size difference
//! (SD), ellipticity difference (ED), and angle between components (AC).

use serde::{Deserialize, Serialize};

use crate::error::{ClamsError, Result};
use crate::types::{GaussianComponent, PairFeatures};

/// Identifies one of the six features, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureId {
    Dc,
    Dsr,
    Dd,
    Sd,
    Ed,
    Ac,
}

impl FeatureId {
    pub const ALL: [FeatureId; 6] = [
        FeatureId::Dc,
        FeatureId::Dsr,
        FeatureId::Dd,
        FeatureId::Sd,
        FeatureId::Ed,
        FeatureId::Ac,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureId::Dc => "dc",
            FeatureId::Dsr => "dsr",
            FeatureId::Dd => "dd",
            FeatureId::Sd => "sd",
            FeatureId::Ed => "ed",
            FeatureId::Ac => "ac",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "dc" => Ok(FeatureId::Dc),
            "dsr" => Ok(FeatureId::Dsr),
            "dd" => Ok(FeatureId::Dd),
            "sd" => Ok(FeatureId::Sd),
            "ed" => Ok(FeatureId::Ed),
            "ac" => Ok(FeatureId::Ac),
            other => Err(ClamsError::InvalidConfig(format!(
                "unknown feature `{other}`"
            ))),
        }
    }
}

/// Selects which features feed the regressor.
///
/// The default enables DC, DSR, SD, ED, AC and disables DD, matching the
/// feature set the regressor performs best with; `all()` enables everything
/// for ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMask {
    pub dc: bool,
    pub dsr: bool,
    pub dd: bool,
    pub sd: bool,
    pub ed: bool,
    pub ac: bool,
}

impl Default for FeatureMask {
    fn default() -> Self {
        Self {
            dc: true,
            dsr: true,
            dd: false,
            sd: true,
            ed: true,
            ac: true,
        }
    }
}

impl FeatureMask {
    pub fn all() -> Self {
        Self {
            dc: true,
            dsr: true,
            dd: true,
            sd: true,
            ed: true,
            ac: true,
        }
    }

    pub fn none() -> Self {
        Self {
            dc: false,
            dsr: false,
            dd: false,
            sd: false,
            ed: false,
            ac: false,
        }
    }

    pub fn get(&self, id: FeatureId) -> bool {
        match id {
            FeatureId::Dc => self.dc,
            FeatureId::Dsr => self.dsr,
            FeatureId::Dd => self.dd,
            FeatureId::Sd => self.sd,
            FeatureId::Ed => self.ed,
            FeatureId::Ac => self.ac,
        }
    }

    pub fn set(&mut self, id: FeatureId, on: bool) {
        match id {
            FeatureId::Dc => self.dc = on,
            FeatureId::Dsr => self.dsr = on,
            FeatureId::Dd => self.dd = on,
            FeatureId::Sd => self.sd = on,
            FeatureId::Ed => self.ed = on,
            FeatureId::Ac => self.ac = on,
        }
    }

    /// Copy with the given features switched off.
    pub fn without(mut self, removed: &[FeatureId]) -> Self {
        for &id in removed {
            self.set(id, false);
        }
        self
    }

    /// Enabled features in canonical order.
    pub fn enabled(&self) -> Vec<FeatureId> {
        FeatureId::ALL.iter().copied().filter(|&id| self.get(id)).collect()
    }

    pub fn count(&self) -> usize {
        FeatureId::ALL.iter().filter(|&&id| self.get(id)).count()
    }

    pub fn validate(&self) -> Result<()> {
        if self.count() == 0 {
            return Err(ClamsError::InvalidConfig(
                "feature mask must enable at least one feature".into(),
            ));
        }
        Ok(())
    }

    /// Parses a comma-separated feature list, e.g. `dc,dsr,sd`.
    pub fn parse(list: &str) -> Result<Self> {
        let mut mask = Self::none();
        for part in list.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            mask.set(FeatureId::parse(part)?, true);
        }
        mask.validate()?;
        Ok(mask)
    }
}

impl std::fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<&str> = self.enabled().iter().map(|id| id.name()).collect();
        write!(f, "{}", names.join(","))
    }
}

/// Size of a component: root sum square of its axis standard deviations.
pub fn size_of(c: &GaussianComponent) -> f64 {
    c.major_sd().hypot(c.minor_sd())
}

/// Computes all six features for a component pair. The `pair` field is set
/// to (0, 1); callers scoring a decomposition attach real indices.
pub fn pair_features(c1: &GaussianComponent, c2: &GaussianComponent) -> Result<PairFeatures> {
    if c1.minor_sd() == 0.0 || c2.minor_sd() == 0.0 {
        return Err(ClamsError::DegenerateComponent);
    }
    let dx = c1.center()[0] - c2.center()[0];
    let dy = c1.center()[1] - c2.center()[1];
    let dc = dx.hypot(dy);
    let (s1, s2) = (size_of(c1), size_of(c2));
    let dsr = dc / (s1 + s2);
    let density = |c: &GaussianComponent| c.soft_count() / (2.0 * c.major_sd() * c.minor_sd());
    let dd = (density(c1) - density(c2)).abs();
    let sd = (s1 - s2).abs();
    let ed = (c1.major_sd() / c1.minor_sd() - c2.major_sd() / c2.minor_sd()).abs();
    let delta = (c1.angle() - c2.angle()).abs();
    let ac = delta.min(2.0 * std::f64::consts::PI - delta);
    Ok(PairFeatures {
        dc,
        dsr,
        dd,
        sd,
        ed,
        ac,
        pair: (0, 1),
    })
}

/// Projects features into a vector of the enabled entries, canonical order
/// DC, DSR, DD, SD, ED, AC.
pub fn feature_vector(f: &PairFeatures, mask: &FeatureMask) -> Vec<f64> {
    let full = [f.dc, f.dsr, f.dd, f.sd, f.ed, f.ac];
    FeatureId::ALL
        .iter()
        .zip(full.iter())
        .filter(|(id, _)| mask.get(**id))
        .map(|(_, v)| *v)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn comp(
        center: [f64; 2],
        major: f64,
        minor: f64,
        angle: f64,
        count: f64,
    ) -> GaussianComponent {
        GaussianComponent::new(center, major, minor, angle, count, 0.5).unwrap()
    }

    #[test]
    fn size_345() {
        let c = comp([0.0, 0.0], 4.0, 3.0, 0.0, 10.0);
        assert_eq!(size_of(&c), 5.0);
    }

    #[test]
    fn size_unit_and_thin_limit() {
        let c = comp([0.0, 0.0], 1.0, 1.0, 0.0, 10.0);
        assert!((size_of(&c) - 2f64.sqrt()).abs() < 1e-15);
        let thin = comp([0.0, 0.0], 1.0, 0.0001, 0.0, 10.0);
        assert!((size_of(&thin) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn identical_components_give_zero_features() {
        let c = comp([1.0, 2.0], 2.0, 1.0, 0.4, 50.0);
        let f = pair_features(&c, &c).unwrap();
        assert_eq!((f.dc, f.dsr, f.dd, f.sd, f.ed, f.ac), (0.0, 0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn unit_pair_at_3_4() {
        let c1 = comp([0.0, 0.0], 1.0, 1.0, 0.0, 100.0);
        let c2 = comp([3.0, 4.0], 1.0, 1.0, 0.0, 100.0);
        let f = pair_features(&c1, &c2).unwrap();
        assert_eq!(f.dc, 5.0);
        assert!((f.dsr - 5.0 / (2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!((f.dsr - 1.7677669529663687).abs() < 1e-12);
        assert_eq!(f.dd, 0.0);
        assert_eq!(f.sd, 0.0);
        assert_eq!(f.ed, 0.0);
        assert_eq!(f.ac, 0.0);
    }

    #[test]
    fn angle_feature_is_literal_min_formula() {
        let c1 = comp([0.0, 0.0], 2.0, 1.0, 0.1, 10.0);
        let c2 = comp([0.0, 0.0], 2.0, 1.0, 3.0, 10.0);
        let f = pair_features(&c1, &c2).unwrap();
        // Δθ = 2.9 < 2π − 2.9, so the min takes the first branch.
        assert!((f.ac - 2.9).abs() < 1e-12);
    }

    #[test]
    fn feature_vector_masks() {
        let f = PairFeatures { dc: 1.0, dsr: 2.0, dd: 3.0, sd: 4.0, ed: 5.0, ac: 6.0, pair: (0, 1) };
        assert_eq!(feature_vector(&f, &FeatureMask::default()), vec![1.0, 2.0, 4.0, 5.0, 6.0]);
        assert_eq!(feature_vector(&f, &FeatureMask::all()), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let only_dsr = FeatureMask::parse("dsr").unwrap();
        assert_eq!(feature_vector(&f, &only_dsr), vec![2.0]);
        let zeros = PairFeatures { dc: 0.0, dsr: 0.0, dd: 0.0, sd: 0.0, ed: 0.0, ac: 0.0, pair: (0, 1) };
        assert_eq!(feature_vector(&zeros, &FeatureMask::default()).len(), 5);
    }

    #[test]
    fn mask_requires_one_feature() {
        assert!(FeatureMask::none().validate().is_err());
        assert!(FeatureMask::parse("").is_err());
        assert!(FeatureMask::parse("dc,bogus").is_err());
    }

    proptest! {
        #[test]
        fn symmetry_exact(
            cx in -5.0..5.0f64, cy in -5.0..5.0f64,
            ma in 0.1..3.0f64, ra in 1.0..4.0f64, ta in 0.0..3.1f64, na in 1.0..500.0f64,
            mb in 0.1..3.0f64, rb in 1.0..4.0f64, tb in 0.0..3.1f64, nb in 1.0..500.0f64,
        ) {
            let c1 = comp([cx, cy], ma * ra, ma, ta, na);
            let c2 = comp([0.0, 0.0], mb * rb, mb, tb, nb);
            let f12 = pair_features(&c1, &c2).unwrap();
            let f21 = pair_features(&c2, &c1).unwrap();
            prop_assert_eq!((f12.dc, f12.dsr, f12.dd, f12.sd, f12.ed, f12.ac),
                            (f21.dc, f21.dsr, f21.dd, f21.sd, f21.ed, f21.ac));
        }

        #[test]
        fn rigid_motion_invariance(
            tx in -10.0..10.0f64, ty in -10.0..10.0f64, rot in 0.0..std::f64::consts::TAU,
            d in 0.0..6.0f64, ma in 0.2..2.0f64, ra in 1.0..3.0f64, ta in 0.0..3.1f64,
        ) {
            let c1 = comp([0.0, 0.0], ma * ra, ma, ta, 100.0);
            let c2 = comp([d, 0.4 * d], 1.0, 0.5, 1.0, 200.0);
            let moved = |c: &GaussianComponent| {
                let (s, co) = rot.sin_cos();
                let p = c.center();
                GaussianComponent::new(
                    [co * p[0] - s * p[1] + tx, s * p[0] + co * p[1] + ty],
                    c.major_sd(), c.minor_sd(), c.angle() + rot, c.soft_count(), c.weight(),
                ).unwrap()
            };
            let f = pair_features(&c1, &c2).unwrap();
            let g = pair_features(&moved(&c1), &moved(&c2)).unwrap();
            prop_assert!((f.dc - g.dc).abs() < 1e-9);
            prop_assert!((f.dsr - g.dsr).abs() < 1e-9);
            prop_assert!((f.dd - g.dd).abs() < 1e-9);
            prop_assert!((f.sd - g.sd).abs() < 1e-9);
            prop_assert!((f.ed - g.ed).abs() < 1e-9);
            // Folding each axis into [0, π) can swap Δθ with π − Δθ; the
            // folded angle difference is the invariant quantity.
            let fold = |ac: f64| ac.min(std::f64::consts::PI - ac);
            prop_assert!((fold(f.ac) - fold(g.ac)).abs() < 1e-9);
        }

        #[test]
        fn uniform_scaling_law(
            s in 0.1..10.0f64,
            d in 0.1..6.0f64, ma in 0.2..2.0f64, ra in 1.0..3.0f64,
            mb in 0.2..2.0f64, rb in 1.0..3.0f64,
        ) {
            let c1 = comp([0.0, 0.0], ma * ra, ma, 0.3, 100.0);
            let c2 = comp([d, d], mb * rb, mb, 1.2, 250.0);
            let scale = |c: &GaussianComponent| GaussianComponent::new(
                [c.center()[0] * s, c.center()[1] * s],
                c.major_sd() * s, c.minor_sd() * s, c.angle(), c.soft_count(), c.weight(),
            ).unwrap();
            let f = pair_features(&c1, &c2).unwrap();
            let g = pair_features(&scale(&c1), &scale(&c2)).unwrap();
            prop_assert!((g.dc - s * f.dc).abs() < 1e-9 * (1.0 + s * f.dc).abs());
            prop_assert!((g.sd - s * f.sd).abs() < 1e-9 * (1.0 + s * f.sd).abs());
            prop_assert!((g.dsr - f.dsr).abs() < 1e-9);
            prop_assert!((g.ed - f.ed).abs() < 1e-9);
            prop_assert!((g.ac - f.ac).abs() < 1e-9);
            prop_assert!((g.dd - f.dd / (s * s)).abs() < 1e-9 * (1.0 + f.dd / (s * s)));
        }

        #[test]
        fn ac_within_canonical_range(ta in 0.0..std::f64::consts::PI, tb in 0.0..std::f64::consts::PI) {
            let c1 = comp([0.0, 0.0], 2.0, 1.0, ta, 10.0);
            let c2 = comp([1.0, 1.0], 2.0, 1.0, tb, 10.0);
            let f = pair_features(&c1, &c2).unwrap();
            prop_assert!(f.ac >= 0.0 && f.ac < std::f64::consts::PI);
        }
    }
}
