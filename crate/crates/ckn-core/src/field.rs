//! Scalar fields on R^n: a value closure, a gradient (analytic or central
//! finite differences), and a support hint that downstream grid builders use
//! to place the truncation radius.

use std::fmt;
use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CknError, Result};
use crate::maps::norm;

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type ProfileFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientKind {
    Analytic,
    FiniteDifference,
}

/// Where the field lives: either compactly supported in an annulus, or
/// decaying fast enough that truncating at the stated radius leaves a tail
/// below the artifact's tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportHint {
    Compact { r_lo: f64, r_hi: f64 },
    Decaying { r_max_sufficient: f64 },
}

#[derive(Clone)]
pub struct ScalarField {
    dimension: usize,
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradientFn>>,
    /// `(profile, profile derivative)` when the field is `f(|x|)`.
    radial_profile: Option<(Arc<ProfileFn>, Arc<ProfileFn>)>,
    pub gradient_kind: GradientKind,
    pub support_hint: SupportHint,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dimension", &self.dimension)
            .field("gradient_kind", &self.gradient_kind)
            .field("support_hint", &self.support_hint)
            .field("radial", &self.is_radial())
            .finish()
    }
}

impl ScalarField {
    pub fn new_analytic(
        dimension: usize,
        value: Arc<ValueFn>,
        gradient: Arc<GradientFn>,
        support_hint: SupportHint,
    ) -> Self {
        ScalarField {
            dimension,
            value,
            gradient: Some(gradient),
            radial_profile: None,
            gradient_kind: GradientKind::Analytic,
            support_hint,
        }
    }

    /// Field with no analytic gradient; `gradient` falls back to central
    /// differences with step `1e-5 max(1, |x|)`.
    pub fn new_finite_difference(
        dimension: usize,
        value: Arc<ValueFn>,
        support_hint: SupportHint,
    ) -> Self {
        ScalarField {
            dimension,
            value,
            gradient: None,
            radial_profile: None,
            gradient_kind: GradientKind::FiniteDifference,
            support_hint,
        }
    }

    /// Radial field `x -> profile(|x|)` with gradient
    /// `profile'(|x|) x/|x|`; keeps the 1-D profile around so weighted norms
    /// can take the radial-only quadrature path.
    pub fn radial(
        dimension: usize,
        profile: Arc<ProfileFn>,
        derivative: Arc<ProfileFn>,
        support_hint: SupportHint,
    ) -> Self {
        let pv = Arc::clone(&profile);
        let dv = Arc::clone(&derivative);
        let value: Arc<ValueFn> = Arc::new(move |x: &[f64]| pv(norm(x)));
        let gradient: Arc<GradientFn> = Arc::new(move |x: &[f64]| {
            let r = norm(x);
            // Smooth radial fields have vanishing gradient at the origin.
            let scale = if r > 0.0 { dv(r) / r } else { 0.0 };
            x.iter().map(|&xi| scale * xi).collect()
        });
        ScalarField {
            dimension,
            value,
            gradient: Some(gradient),
            radial_profile: Some((profile, derivative)),
            gradient_kind: GradientKind::Analytic,
            support_hint,
        }
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    #[inline]
    pub fn is_radial(&self) -> bool {
        self.radial_profile.is_some()
    }

    /// 1-D profile and derivative for radial fields.
    pub fn profile(&self) -> Option<(&ProfileFn, &ProfileFn)> {
        self.radial_profile
            .as_ref()
            .map(|(p, d)| (p.as_ref(), d.as_ref()))
    }

    /// Owned handles to the radial profile closures.
    pub fn profile_arcs(&self) -> Option<(Arc<ProfileFn>, Arc<ProfileFn>)> {
        self.radial_profile
            .as_ref()
            .map(|(p, d)| (Arc::clone(p), Arc::clone(d)))
    }

    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.gradient {
            Some(g) => g(x),
            None => self.fd_gradient(x),
        }
    }

    fn fd_gradient(&self, x: &[f64]) -> Vec<f64> {
        let h = 1e-5 * norm(x).max(1.0);
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        let mut out = vec![0.0; x.len()];
        for i in 0..x.len() {
            plus[i] = x[i] + h;
            minus[i] = x[i] - h;
            out[i] = ((self.value)(&plus) - (self.value)(&minus)) / (2.0 * h);
            plus[i] = x[i];
            minus[i] = x[i];
        }
        out
    }

    /// Checks the analytic gradient against central differences at `samples`
    /// random points drawn inside the support; returns the largest relative
    /// mismatch, or an error when it exceeds `tol`.
    pub fn validate_gradient(&self, samples: usize, tol: f64, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (r_lo, r_hi) = match self.support_hint {
            SupportHint::Compact { r_lo, r_hi } => {
                let pad = 0.02 * (r_hi - r_lo);
                (r_lo + pad, r_hi - pad)
            }
            SupportHint::Decaying { r_max_sufficient } => (0.1, r_max_sufficient.min(8.0)),
        };
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            let r = rng.random_range(r_lo..r_hi);
            let dir = random_direction(self.dimension, &mut rng);
            let x: Vec<f64> = dir.iter().map(|d| d * r).collect();
            let grad = self.gradient(&x);
            let fd = self.fd_gradient(&x);
            let scale = norm(&grad).max(1.0);
            let err = grad
                .iter()
                .zip(&fd)
                .map(|(g, f)| (g - f).abs())
                .fold(0.0_f64, f64::max)
                / scale;
            if err > tol {
                return Err(CknError::GradientMismatch {
                    point: x,
                    max_err: err,
                    tol,
                });
            }
            worst = worst.max(err);
        }
        Ok(worst)
    }
}

fn random_direction(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d = norm(&v);
        if (0.2..=1.0).contains(&d) {
            return v.into_iter().map(|vi| vi / d).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian(n: usize) -> ScalarField {
        ScalarField::radial(
            n,
            Arc::new(|r: f64| (-r * r).exp()),
            Arc::new(|r: f64| -2.0 * r * (-r * r).exp()),
            SupportHint::Decaying {
                r_max_sufficient: 10.0,
            },
        )
    }

    #[test]
    fn radial_field_evaluates_profile() {
        let f = gaussian(3);
        assert!(f.is_radial());
        let x = [1.0, 2.0, -2.0];
        assert_relative_eq!(f.value(&x), (-9.0_f64).exp(), max_relative = 1e-14);
        let g = f.gradient(&x);
        let expect = -2.0 * (-9.0_f64).exp();
        assert_relative_eq!(g[0], expect * 1.0, max_relative = 1e-13);
        assert_relative_eq!(g[1], expect * 2.0, max_relative = 1e-13);
        assert_relative_eq!(g[2], expect * -2.0, max_relative = 1e-13);
    }

    #[test]
    fn finite_difference_matches_analytic() {
        let f = gaussian(3);
        let fd = ScalarField::new_finite_difference(
            3,
            Arc::new(|x: &[f64]| (-(x.iter().map(|v| v * v).sum::<f64>())).exp()),
            SupportHint::Decaying {
                r_max_sufficient: 10.0,
            },
        );
        assert_eq!(fd.gradient_kind, GradientKind::FiniteDifference);
        let x = [0.4, -1.1, 0.3];
        let ga = f.gradient(&x);
        let gf = fd.gradient(&x);
        for (a, b) in ga.iter().zip(&gf) {
            assert_relative_eq!(a, b, max_relative = 1e-8, epsilon = 1e-10);
        }
    }

    #[test]
    fn validate_gradient_accepts_correct_and_flags_wrong() {
        let good = gaussian(3);
        let worst = good.validate_gradient(50, 1e-6, 42).unwrap();
        assert!(worst < 1e-6);

        let bad = ScalarField::new_analytic(
            3,
            Arc::new(|x: &[f64]| (-(x.iter().map(|v| v * v).sum::<f64>())).exp()),
            Arc::new(|x: &[f64]| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                // Wrong sign on one component.
                vec![
                    -2.0 * x[0] * (-r2).exp(),
                    2.0 * x[1] * (-r2).exp(),
                    -2.0 * x[2] * (-r2).exp(),
                ]
            }),
            SupportHint::Decaying {
                r_max_sufficient: 10.0,
            },
        );
        let err = bad.validate_gradient(50, 1e-6, 42).unwrap_err();
        match err {
            CknError::GradientMismatch { max_err, tol, .. } => {
                assert!(max_err > tol);
            }
            other => panic!("expected gradient mismatch, got {other}"),
        }
    }

    #[test]
    fn validation_respects_compact_support_window() {
        let f = ScalarField::radial(
            3,
            Arc::new(|r: f64| {
                if r <= 1.0 || r >= 4.0 {
                    0.0
                } else {
                    (-1.0 / ((r - 1.0) * (4.0 - r))).exp()
                }
            }),
            Arc::new(|r: f64| {
                if r <= 1.0 || r >= 4.0 {
                    0.0
                } else {
                    let g = (r - 1.0) * (4.0 - r);
                    (-1.0 / g).exp() * (5.0 - 2.0 * r) / (g * g)
                }
            }),
            SupportHint::Compact {
                r_lo: 1.0,
                r_hi: 4.0,
            },
        );
        let worst = f.validate_gradient(50, 1e-6, 7).unwrap();
        assert!(worst < 1e-6);
    }
}
