//! Bundled analytic test families: radial power-law and Gaussian profiles,
//! the compactly supported bump h on [1, 4], the symmetry-breaking sequence
//! f_k = h(r) sin(phi) cos(k theta) in n = 3, and composition with the map
//! phi.
//!
//! Spherical conventions throughout: phi is the polar angle from the +z
//! axis in [0, pi], theta the azimuth in [0, 2 pi); the orthonormal frame is
//! u_r = (sin phi cos theta, sin phi sin theta, cos phi),
//! u_phi = (cos phi cos theta, cos phi sin theta, -sin phi),
//! u_theta = (-sin theta, cos theta, 0).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{CknError, Result};
use crate::field::{ScalarField, SupportHint};
use crate::maps::{dphi_apply, norm, Alpha};

/// Radial profile families. `sobolev-extremal` is the power-law shape with
/// the exponent pinned to `(n-p)/p`; `gns-power` leaves the exponent free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialKind {
    SobolevExtremal,
    GnsPower,
    Gaussian,
}

impl fmt::Display for RadialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RadialKind::SobolevExtremal => "sobolev-extremal",
            RadialKind::GnsPower => "gns-power",
            RadialKind::Gaussian => "gaussian",
        })
    }
}

impl FromStr for RadialKind {
    type Err = CknError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sobolev-extremal" => Ok(RadialKind::SobolevExtremal),
            "gns-power" => Ok(RadialKind::GnsPower),
            "gaussian" => Ok(RadialKind::Gaussian),
            other => Err(CknError::InvalidArgument(format!(
                "unknown radial family {other:?}; expected sobolev-extremal, gns-power, or gaussian"
            ))),
        }
    }
}

/// Shape parameters of a radial profile. `gamma` is ignored by the gaussian
/// kind and overridden to `(n-p)/p` by the sobolev-extremal kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialShape {
    pub gamma: f64,
    pub lambda: f64,
}

impl RadialShape {
    pub fn new(gamma: f64, lambda: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() || !(lambda > 0.0) || !lambda.is_finite() {
            return Err(CknError::InvalidArgument(format!(
                "radial shape needs gamma > 0 and lambda > 0, got gamma = {gamma}, lambda = {lambda}"
            )));
        }
        Ok(RadialShape { gamma, lambda })
    }
}

/// Builds a radial field with analytic gradient:
///   gaussian          f(r) = exp(-(r/lambda)^2)
///   gns-power         f(r) = (1 + (r/lambda)^(p/(p-1)))^(-gamma)
///   sobolev-extremal  the gns-power shape with gamma = (n-p)/p
/// The power kinds require p > 1.
pub fn make_radial(kind: RadialKind, shape: RadialShape, n: usize, p: f64) -> Result<ScalarField> {
    let shape = RadialShape::new(shape.gamma, shape.lambda)?;
    if n < 2 || !(p >= 1.0) || p >= n as f64 {
        return Err(CknError::UnsupportedParameters(format!(
            "need n >= 2 and 1 <= p < n, got n = {n}, p = {p}"
        )));
    }
    let lambda = shape.lambda;
    match kind {
        RadialKind::Gaussian => {
            let inv2 = 1.0 / (lambda * lambda);
            Ok(ScalarField::radial(
                n,
                Arc::new(move |r: f64| (-r * r * inv2).exp()),
                Arc::new(move |r: f64| -2.0 * r * inv2 * (-r * r * inv2).exp()),
                SupportHint::Decaying {
                    r_max_sufficient: 12.0 * lambda.max(1.0),
                },
            ))
        }
        RadialKind::GnsPower | RadialKind::SobolevExtremal => {
            if p <= 1.0 {
                return Err(CknError::UnsupportedParameters(format!(
                    "power-law profiles need p > 1, got p = {p}"
                )));
            }
            let gamma = if kind == RadialKind::SobolevExtremal {
                (n as f64 - p) / p
            } else {
                shape.gamma
            };
            let m = p / (p - 1.0);
            let dp = gamma;
            Ok(ScalarField::radial(
                n,
                Arc::new(move |r: f64| (1.0 + (r / lambda).powf(m)).powf(-gamma)),
                Arc::new(move |r: f64| {
                    if r == 0.0 {
                        return 0.0;
                    }
                    let u = (r / lambda).powf(m);
                    -dp * m * (1.0 + u).powf(-dp - 1.0) * u / r
                }),
                SupportHint::Decaying {
                    r_max_sufficient: 40.0 * lambda.max(1.0),
                },
            ))
        }
    }
}

/// Smooth bump supported exactly on [1, 4]:
/// `h(r) = exp(-1 / ((r-1)(4-r)))` inside, 0 outside.
#[derive(Debug, Clone, Copy)]
pub struct BumpH {
    pub r_lo: f64,
    pub r_hi: f64,
}

pub fn make_bump() -> BumpH {
    BumpH {
        r_lo: 1.0,
        r_hi: 4.0,
    }
}

impl BumpH {
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        if r <= self.r_lo || r >= self.r_hi {
            0.0
        } else {
            (-1.0 / ((r - self.r_lo) * (self.r_hi - r))).exp()
        }
    }

    /// Analytic derivative `h(r) (r_lo + r_hi - 2r) / g(r)^2` with
    /// `g(r) = (r - r_lo)(r_hi - r)`.
    #[inline]
    pub fn derivative(&self, r: f64) -> f64 {
        if r <= self.r_lo || r >= self.r_hi {
            0.0
        } else {
            let g = (r - self.r_lo) * (self.r_hi - r);
            self.value(r) * (self.r_lo + self.r_hi - 2.0 * r) / (g * g)
        }
    }
}

/// The n = 3 symmetry-breaking field `f_k = h(r) sin(phi) cos(k theta)`
/// with its spherical-frame gradient
/// `(h' sin(phi) cos(k theta), (h/r) cos(phi) cos(k theta), -(h/r) k sin(k theta))`
/// rotated to Cartesian components.
pub fn make_fk(k: u32) -> Result<ScalarField> {
    if k < 1 {
        return Err(CknError::InvalidArgument(
            "the oscillation index k must be >= 1".into(),
        ));
    }
    let h = make_bump();
    let kf = k as f64;
    let value = Arc::new(move |x: &[f64]| {
        let r = norm(x);
        let hv = h.value(r);
        if hv == 0.0 {
            return 0.0;
        }
        let rho = x[0].hypot(x[1]);
        let theta = x[1].atan2(x[0]);
        hv * (rho / r) * (kf * theta).cos()
    });
    let gradient = Arc::new(move |x: &[f64]| {
        let r = norm(x);
        let hv = h.value(r);
        if hv == 0.0 && h.derivative(r) == 0.0 {
            return vec![0.0; 3];
        }
        let rho = x[0].hypot(x[1]);
        let (sin_phi, cos_phi) = (rho / r, x[2] / r);
        let (sin_theta, cos_theta) = if rho > 0.0 {
            (x[1] / rho, x[0] / rho)
        } else {
            (0.0, 1.0)
        };
        let theta = x[1].atan2(x[0]);
        let (ck, sk) = ((kf * theta).cos(), (kf * theta).sin());
        let a_r = h.derivative(r) * sin_phi * ck;
        let a_phi = hv / r * cos_phi * ck;
        let a_theta = -(hv / r) * kf * sk;
        vec![
            a_r * sin_phi * cos_theta + a_phi * cos_phi * cos_theta - a_theta * sin_theta,
            a_r * sin_phi * sin_theta + a_phi * cos_phi * sin_theta + a_theta * cos_theta,
            a_r * cos_phi - a_phi * sin_phi,
        ]
    });
    Ok(ScalarField::new_analytic(
        3,
        value,
        gradient,
        SupportHint::Compact {
            r_lo: 1.0,
            r_hi: 4.0,
        },
    ))
}

/// `g = f . phi` with the chain-rule gradient
/// `grad g(x) = Dphi(x) (grad f)(phi(x))` (Dphi is symmetric). Evaluation
/// at the origin yields NaN, which quadrature reports as an evaluation
/// error; grid nodes are strictly interior so the pipeline never hits it.
pub fn compose_with_phi(f: &ScalarField, alpha: Alpha) -> ScalarField {
    if alpha.value() == 0.0 {
        return f.clone();
    }
    let a = alpha.value();
    let stretch = 1.0 + a;
    let support_hint = match f.support_hint {
        SupportHint::Compact { r_lo, r_hi } => SupportHint::Compact {
            r_lo: r_lo.powf(1.0 / stretch),
            r_hi: r_hi.powf(1.0 / stretch),
        },
        SupportHint::Decaying { r_max_sufficient } => SupportHint::Decaying {
            r_max_sufficient: r_max_sufficient.powf(1.0 / stretch),
        },
    };

    // Radial inputs compose to radial outputs with a 1-D chain rule; this
    // keeps the radial-only quadrature path available downstream.
    if let Some((profile, derivative)) = f.profile_arcs() {
        let p2 = Arc::clone(&profile);
        return ScalarField::radial(
            f.dimension(),
            Arc::new(move |r: f64| {
                if r == 0.0 && a < 0.0 {
                    return f64::NAN;
                }
                p2(r.powf(stretch))
            }),
            Arc::new(move |r: f64| {
                if r == 0.0 {
                    return if a < 0.0 { f64::NAN } else { 0.0 };
                }
                stretch * r.powf(a) * derivative(r.powf(stretch))
            }),
            support_hint,
        );
    }

    let fv = f.clone();
    let fg = f.clone();
    let value = Arc::new(move |x: &[f64]| {
        let r = norm(x);
        if r == 0.0 {
            return f64::NAN;
        }
        let scale = r.powf(a);
        let y: Vec<f64> = x.iter().map(|&xi| xi * scale).collect();
        fv.value(&y)
    });
    let gradient = Arc::new(move |x: &[f64]| {
        let r = norm(x);
        if r == 0.0 {
            return vec![f64::NAN; x.len()];
        }
        let scale = r.powf(a);
        let y: Vec<f64> = x.iter().map(|&xi| xi * scale).collect();
        let g = fg.gradient(&y);
        dphi_apply(x, alpha, &g).expect("x is nonzero and dimensions agree")
    });
    ScalarField::new_analytic(f.dimension(), value, gradient, support_hint)
}
