//! Weighted norms, the weighted quotient Q_alpha(f), the anisotropy ratio
//! F(f), and the unweighted interpolation check.
//!
//! The quotient under study is
//! `Q(f) = ||f||_{r, an} / (||f||_{s, an}^(1-t) ||grad f||_{p, a(n-p)}^t)`
//! with `1/r = (1-t)/s + t(n-p)/(np)`. All three integrals for a quotient
//! are accumulated in one fused quadrature pass so every norm sees the same
//! field evaluations.

use std::borrow::Cow;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{CknError, Result};
use crate::field::ScalarField;
use crate::maps::{atilde_norm_sq, dot, norm, Alpha};
use crate::quadrature::{integrate_many, ProductGrid};

/// Parameter block of the inequality. `r` is always recomputed from
/// `(n, p, s, t)` at construction; it is never accepted from outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CknParams {
    pub n: usize,
    pub p: f64,
    pub s: f64,
    pub t: f64,
    pub alpha: Alpha,
    r: f64,
}

impl CknParams {
    pub fn new(n: usize, p: f64, s: f64, t: f64, alpha: Alpha) -> Result<Self> {
        let r = derive_r(n, p, s, t)?;
        Ok(CknParams {
            n,
            p,
            s,
            t,
            alpha,
            r,
        })
    }

    /// The derived exponent solving `1/r = (1-t)/s + t(n-p)/(np)`.
    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Weight exponent `alpha n` on the |f| integrals.
    #[inline]
    pub fn norm_weight(&self) -> f64 {
        self.alpha.value() * self.n as f64
    }

    /// Weight exponent `alpha (n-p)` on the gradient integral.
    #[inline]
    pub fn grad_weight(&self) -> f64 {
        self.alpha.value() * (self.n as f64 - self.p)
    }

    /// Critical exponent `np/(n-p)`.
    #[inline]
    pub fn sobolev_exponent(&self) -> f64 {
        let n = self.n as f64;
        n * self.p / (n - self.p)
    }

    /// Same parameters with the weight switched off.
    pub fn unweighted(&self) -> CknParams {
        CknParams {
            alpha: Alpha::new(0.0).expect("zero is a valid exponent"),
            ..*self
        }
    }
}

impl Serialize for CknParams {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("CknParams", 6)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("s", &self.s)?;
        st.serialize_field("t", &self.t)?;
        st.serialize_field("alpha", &self.alpha)?;
        st.serialize_field("r", &self.r)?;
        st.end()
    }
}

/// Solves `1/r = (1-t)/s + t(n-p)/(np)` after validating the parameter box
/// `n >= 2`, `1 <= p < n`, `s >= 1`, `0 <= t <= 1`.
pub fn derive_r(n: usize, p: f64, s: f64, t: f64) -> Result<f64> {
    if n < 2 {
        return Err(CknError::UnsupportedParameters(format!(
            "dimension must be >= 2, got {n}"
        )));
    }
    let nf = n as f64;
    if !(1.0..nf).contains(&p) {
        return Err(CknError::UnsupportedParameters(format!(
            "need 1 <= p < n, got p = {p} with n = {n}"
        )));
    }
    if !(s >= 1.0) || !s.is_finite() {
        return Err(CknError::UnsupportedParameters(format!(
            "need s >= 1, got {s}"
        )));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(CknError::UnsupportedParameters(format!(
            "need 0 <= t <= 1, got {t}"
        )));
    }
    let inv = (1.0 - t) / s + t * (nf - p) / (nf * p);
    let r = 1.0 / inv;
    if !(r >= 1.0) || !r.is_finite() {
        return Err(CknError::UnsupportedParameters(format!(
            "derived exponent r = {r} falls outside [1, inf)"
        )));
    }
    Ok(r)
}

/// Radial integrands carry no angular dependence, so the angular factor of
/// the grid can be replaced by the analytic |S^(n-1)| without changing the
/// value (the two paths agree to 1e-10; see the quadrature invariants).
/// Norm evaluations route radial fields through the reduced grid.
fn effective_grid<'a>(f: &ScalarField, grid: &'a ProductGrid) -> Result<Cow<'a, ProductGrid>> {
    if f.is_radial() && grid.angular.is_some() {
        Ok(Cow::Owned(ProductGrid::radial_only(
            grid.radial.clone(),
            grid.dimension,
        )?))
    } else {
        Ok(Cow::Borrowed(grid))
    }
}

/// `(∫ |f|^q |x|^beta dx)^(1/q)`.
pub fn weighted_norm(f: &ScalarField, q: f64, beta: f64, grid: &ProductGrid) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(CknError::InvalidArgument(format!(
            "norm exponent must be >= 1, got {q}"
        )));
    }
    let grid = effective_grid(f, grid)?;
    let [integral] = integrate_many(|x| [f.value(x).abs().powf(q)], [beta], &grid)?;
    finish_norm(integral, q)
}

/// `(∫ |grad f|^p |x|^beta dx)^(1/p)`.
pub fn weighted_grad_norm(f: &ScalarField, p: f64, beta: f64, grid: &ProductGrid) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(CknError::InvalidArgument(format!(
            "norm exponent must be >= 1, got {p}"
        )));
    }
    let grid = effective_grid(f, grid)?;
    let [integral] = integrate_many(|x| [norm(&f.gradient(x)).powf(p)], [beta], &grid)?;
    finish_norm(integral, p)
}

fn finish_norm(integral: f64, q: f64) -> Result<f64> {
    if integral <= 0.0 {
        return Err(CknError::DegenerateField(
            "field is numerically zero on the grid".into(),
        ));
    }
    Ok(integral.powf(1.0 / q))
}

/// The three norms entering a quotient plus the quotient itself. The
/// reference slot is filled by callers comparing against a known constant.
#[derive(Debug, Clone, Serialize)]
pub struct QuotientReport {
    pub lhs_norm: f64,
    pub s_norm: f64,
    pub grad_norm: f64,
    pub quotient: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
}

impl QuotientReport {
    pub fn with_reference(mut self, constant: f64) -> Self {
        self.reference_constant = Some(constant);
        self.slack = Some(constant - self.quotient);
        self
    }
}

/// Full weighted quotient. The three integrals share one quadrature pass;
/// `t = 0` and `t = 1` degenerate cleanly because `x^0 = 1`.
pub fn ckn_quotient(
    f: &ScalarField,
    params: &CknParams,
    grid: &ProductGrid,
) -> Result<QuotientReport> {
    let grid = effective_grid(f, grid)?;
    let q_lhs = params.r();
    let q_s = params.s;
    let p = params.p;
    let [int_lhs, int_s, int_grad] = integrate_many(
        |x| {
            let v = f.value(x).abs();
            let g = norm(&f.gradient(x));
            [v.powf(q_lhs), v.powf(q_s), g.powf(p)]
        },
        [
            params.norm_weight(),
            params.norm_weight(),
            params.grad_weight(),
        ],
        &grid,
    )?;
    let lhs_norm = finish_norm(int_lhs, q_lhs)?;
    let s_norm = finish_norm(int_s, q_s)?;
    let grad_norm = finish_norm(int_grad, p)?;
    let denominator = s_norm.powf(1.0 - params.t) * grad_norm.powf(params.t);
    if !(denominator > 0.0) {
        return Err(CknError::DegenerateField(
            "quotient denominator vanished".into(),
        ));
    }
    Ok(QuotientReport {
        lhs_norm,
        s_norm,
        grad_norm,
        quotient: lhs_norm / denominator,
        reference_constant: None,
        slack: None,
    })
}

/// Anisotropy ratio
/// `F(f) = ∫ |A~ grad f|^p |x|^(a(n-p)) / ∫ |grad f|^p |x|^(a(n-p))`.
/// Radial fields give exactly `(1+alpha)^(-p)`; the supremum over all
/// fields, raised to `t/p`, is the constant A_alpha. This returns plain F;
/// callers apply the `t/p` power.
pub fn ratio_f(f: &ScalarField, params: &CknParams, grid: &ProductGrid) -> Result<f64> {
    let p = params.p;
    let alpha = params.alpha;
    let beta = params.grad_weight();
    let [num, den] = integrate_many(
        |x| {
            let g = f.gradient(x);
            let norm_sq = dot(&g, &g);
            let radial = dot(&g, x) / norm(x);
            let contracted = atilde_norm_sq(norm_sq, radial, alpha);
            [contracted.powf(0.5 * p), norm_sq.powf(0.5 * p)]
        },
        [beta, beta],
        grid,
    )?;
    if !(den > 0.0) {
        return Err(CknError::DegenerateField(
            "gradient vanishes on the grid".into(),
        ));
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Serialize)]
pub struct InterpolationReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Unweighted interpolation chain
/// `||f||_r <= ||f||_s^(1-t) ||f||_(np/(n-p))^t`, checked with slack
/// `1e-9 rhs`. Only defined on the alpha = 0 path.
pub fn interpolation_check(
    f: &ScalarField,
    params: &CknParams,
    grid: &ProductGrid,
) -> Result<InterpolationReport> {
    if params.alpha.value() != 0.0 {
        return Err(CknError::InvalidArgument(
            "interpolation check runs on the unweighted (alpha = 0) path".into(),
        ));
    }
    let grid = effective_grid(f, grid)?;
    let q_lhs = params.r();
    let q_s = params.s;
    let q_sob = params.sobolev_exponent();
    let [int_lhs, int_s, int_sob] = integrate_many(
        |x| {
            let v = f.value(x).abs();
            [v.powf(q_lhs), v.powf(q_s), v.powf(q_sob)]
        },
        [0.0, 0.0, 0.0],
        &grid,
    )?;
    let lhs = finish_norm(int_lhs, q_lhs)?;
    let rhs =
        finish_norm(int_s, q_s)?.powf(1.0 - params.t) * finish_norm(int_sob, q_sob)?.powf(params.t);
    Ok(InterpolationReport {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-9),
    })
}
