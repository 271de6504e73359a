//! The quasi-conformal map `phi(x) = x |x|^alpha`, its differential, and the
//! closed-form eigenstructure of that differential.
//!
//! The differential is the symmetric rank-one update
//! `Dphi(x) = |x|^a I + a |x|^(a-2) x x^T`, whose spectrum is known in closed
//! form: one radial eigenvalue `(1+a)|x|^a` with eigenvector `x/|x|` and the
//! tangential eigenvalue `|x|^a` with multiplicity `n-1`. Everything in this
//! module is a pure function of its arguments.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{CknError, Result};

/// The map exponent, validated once at construction: `alpha > -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= -1.0 {
            return Err(CknError::InvalidAlpha(value));
        }
        Ok(Alpha(value))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Closed-form spectral data of `Dphi` at a point.
#[derive(Debug, Clone, Serialize)]
pub struct EigenSummary {
    /// `(1+alpha) |x|^alpha`, simple eigenvalue along the radial direction.
    pub lambda_radial: f64,
    /// `|x|^alpha`, eigenvalue of multiplicity `n-1` on the tangent space.
    pub lambda_tangential: f64,
    /// Unit radial eigenvector `x/|x|`.
    pub eigenvector_radial: Vec<f64>,
    /// `(1+alpha) |x|^(alpha n)`.
    pub jacobian_det: f64,
}

#[inline]
pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn nonzero_norm(x: &[f64]) -> Result<f64> {
    let r = norm(x);
    if r == 0.0 || x.is_empty() {
        return Err(CknError::ZeroPoint);
    }
    Ok(r)
}

/// `phi(x) = x |x|^alpha`. The result has norm `|x|^(1+alpha)`.
pub fn phi_map(x: &[f64], alpha: Alpha) -> Result<Vec<f64>> {
    let r = nonzero_norm(x)?;
    let scale = r.powf(alpha.value());
    Ok(x.iter().map(|&xi| xi * scale).collect())
}

/// Inverse of `phi_map`: `y |y|^(-alpha/(1+alpha))`.
pub fn inverse_phi(y: &[f64], alpha: Alpha) -> Result<Vec<f64>> {
    let r = nonzero_norm(y)?;
    let a = alpha.value();
    let scale = r.powf(-a / (1.0 + a));
    Ok(y.iter().map(|&yi| yi * scale).collect())
}

/// The differential `Dphi(x)` with entries
/// `|x|^a delta_ij + a x_i x_j |x|^(a-2)`; symmetric by construction.
pub fn dphi_matrix(x: &[f64], alpha: Alpha) -> Result<DMatrix<f64>> {
    let r = nonzero_norm(x)?;
    let n = x.len();
    let a = alpha.value();
    let ra = r.powf(a);
    let ra2 = a * r.powf(a - 2.0);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = ra2 * x[i] * x[j] + if i == j { ra } else { 0.0 };
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Rank-one form of the matrix-vector product `Dphi(x) v` without building
/// the matrix: `|x|^a v + a |x|^(a-2) <x, v> x`.
pub fn dphi_apply(x: &[f64], alpha: Alpha, v: &[f64]) -> Result<Vec<f64>> {
    let r = nonzero_norm(x)?;
    if v.len() != x.len() {
        return Err(CknError::DimensionMismatch {
            expected: x.len(),
            got: v.len(),
        });
    }
    let a = alpha.value();
    let ra = r.powf(a);
    let coef = a * r.powf(a - 2.0) * dot(x, v);
    Ok(x.iter()
        .zip(v)
        .map(|(&xi, &vi)| ra * vi + coef * xi)
        .collect())
}

/// Closed-form eigenvalues, radial eigenvector, and Jacobian determinant.
pub fn analytic_eigen(x: &[f64], alpha: Alpha) -> Result<EigenSummary> {
    let r = nonzero_norm(x)?;
    let n = x.len() as f64;
    let a = alpha.value();
    let ra = r.powf(a);
    Ok(EigenSummary {
        lambda_radial: (1.0 + a) * ra,
        lambda_tangential: ra,
        eigenvector_radial: x.iter().map(|&xi| xi / r).collect(),
        jacobian_det: (1.0 + a) * r.powf(a * n),
    })
}

/// Difference between the numeric characteristic polynomial
/// `det(Dphi - lambda I)` and its closed-form factorization
/// `|x|^(n(a-2)) (|x|^2 - lambda |x|^(2-a))^(n-1) ((1+a)|x|^2 - lambda |x|^(2-a))`.
///
/// The determinant side is evaluated by LU; callers compare the residual
/// against `1e-9 * max(1, |det side|)`.
pub fn char_poly_residual(x: &[f64], alpha: Alpha, lambda: f64) -> Result<f64> {
    let r = nonzero_norm(x)?;
    let n = x.len();
    let a = alpha.value();

    let mut m = dphi_matrix(x, alpha)?;
    for i in 0..n {
        m[(i, i)] -= lambda;
    }
    let det = m.lu().determinant();

    let r2 = r * r;
    let pow_shift = lambda * r.powf(2.0 - a);
    let factored = r.powf(n as f64 * (a - 2.0))
        * (r2 - pow_shift).powi(n as i32 - 1)
        * ((1.0 + a) * r2 - pow_shift);

    Ok(det - factored)
}

/// Applies `A~ = Q D Q^T` with `D = diag(1/(1+a), 1, ..., 1)`: the radial
/// component of `v` is scaled by `1/(1+a)`, tangential components pass
/// through unchanged.
pub fn atilde_apply(v: &[f64], x: &[f64], alpha: Alpha) -> Result<Vec<f64>> {
    let r = nonzero_norm(x)?;
    if v.len() != x.len() {
        return Err(CknError::DimensionMismatch {
            expected: x.len(),
            got: v.len(),
        });
    }
    let a = alpha.value();
    let radial = dot(x, v) / (r * r);
    let coef = (1.0 / (1.0 + a) - 1.0) * radial;
    Ok(v.iter().zip(x).map(|(&vi, &xi)| vi + coef * xi).collect())
}

/// `|A~ v|^2` from `|v|^2` and the radial component `<v, x/|x|>`; the
/// eigen-decomposition collapses `atilde_apply` followed by a norm to this
/// scalar identity, which quadrature loops use to avoid materializing the
/// contracted vector.
#[inline]
pub fn atilde_norm_sq(norm_sq: f64, radial_component: f64, alpha: Alpha) -> f64 {
    let shrink = 1.0 / (1.0 + alpha.value());
    norm_sq + (shrink * shrink - 1.0) * radial_component * radial_component
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
