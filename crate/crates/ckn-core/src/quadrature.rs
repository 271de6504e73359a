//! Tensor-product quadrature in spherical coordinates for integrals
//! `∫ g(x) |x|^beta dx` over R^n, written as
//! `Σ w_r w_sigma g(r sigma) r^(beta + n - 1)`.
//!
//! Radial rules are composite Gauss-Legendre on `[0, r_max]`, either with
//! equal panels or with power-law graded panel edges (the graded variant
//! keeps accuracy for fractional weight powers near the origin and for
//! slowly decaying tails). Angular rules cover n = 2 (trapezoid in theta)
//! and n = 3 (Gauss-Legendre in cos(phi) times trapezoid in theta, with the
//! sin(phi) surface factor absorbed into the weights). Radial fields on any
//! n >= 2 use a radial-only grid with the |S^(n-1)| factor applied
//! analytically.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{CknError, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence. Nodes ascend and are strictly interior.
pub fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(points >= 1);
    let n = points;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, z);
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` via the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite radial rule on `(0, r_max)`.
#[derive(Debug, Clone)]
pub struct RadialRule {
    /// Strictly increasing radii in `(0, r_max)`.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub r_max: f64,
}

/// Equal-width panels, `points_per_panel` Gauss-Legendre nodes in each.
pub fn make_radial_rule(r_max: f64, panels: usize, points_per_panel: usize) -> Result<RadialRule> {
    make_graded_radial_rule(r_max, panels, points_per_panel, 1.0)
}

/// Panel edges at `r_max (j/panels)^grading`; `grading = 1` recovers equal
/// panels, larger values crowd panels toward the origin while stretching the
/// outer ones, which suits integrands with `r^gamma` behaviour at 0 and fat
/// polynomial tails.
pub fn make_graded_radial_rule(
    r_max: f64,
    panels: usize,
    points_per_panel: usize,
    grading: f64,
) -> Result<RadialRule> {
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(CknError::InvalidArgument(format!(
            "radial rule needs r_max > 0, got {r_max}"
        )));
    }
    if panels < 1 || points_per_panel < 2 {
        return Err(CknError::InvalidArgument(format!(
            "radial rule needs panels >= 1 and points_per_panel >= 2, got {panels} and {points_per_panel}"
        )));
    }
    if !(grading >= 1.0) || !grading.is_finite() {
        return Err(CknError::InvalidArgument(format!(
            "radial grading must be >= 1, got {grading}"
        )));
    }
    let (xi, wi) = gauss_legendre(points_per_panel);
    let mut nodes = Vec::with_capacity(panels * points_per_panel);
    let mut weights = Vec::with_capacity(panels * points_per_panel);
    for j in 0..panels {
        let lo = r_max * (j as f64 / panels as f64).powf(grading);
        let hi = r_max * ((j + 1) as f64 / panels as f64).powf(grading);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        for (x, w) in xi.iter().zip(&wi) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    Ok(RadialRule {
        nodes,
        weights,
        r_max,
    })
}

/// Quadrature on `S^(n-1)`, n in {2, 3}. Weights carry the full surface
/// measure (they sum to 2 pi resp. 4 pi); nodes are stored as angle tuples
/// and as precomputed unit vectors.
#[derive(Debug, Clone)]
pub struct AngularRule {
    pub dimension: usize,
    /// `(theta)` for n = 2, `(phi, theta)` for n = 3.
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    directions: Vec<Vec<f64>>,
    theta_count: usize,
}

impl AngularRule {
    /// Unit vectors matching `nodes` order.
    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    /// Number of equispaced azimuthal angles; the trapezoidal rule is exact
    /// for trig polynomials of azimuthal frequency below this count.
    pub fn theta_count(&self) -> usize {
        self.theta_count
    }
}

/// For n = 2 a trapezoidal rule with `resolution` equispaced angles. For
/// n = 3 a product of `resolution` trapezoidal angles in theta with
/// `resolution / 2` Gauss-Legendre nodes in cos(phi).
pub fn make_angular_rule(dimension: usize, resolution: usize) -> Result<AngularRule> {
    match dimension {
        2 => make_angular_rule_3d_inner(2, resolution, 0),
        3 => make_angular_rule_3d_inner(3, resolution, (resolution / 2).max(4)),
        other => Err(CknError::InvalidArgument(format!(
            "angular rules exist for n = 2 or 3, got {other}"
        ))),
    }
}

/// n = 3 rule with independent theta and phi resolutions, matching the CLI's
/// separate knobs.
pub fn make_angular_rule_3d(theta_resolution: usize, phi_resolution: usize) -> Result<AngularRule> {
    make_angular_rule_3d_inner(3, theta_resolution, phi_resolution)
}

fn make_angular_rule_3d_inner(
    dimension: usize,
    theta_resolution: usize,
    phi_resolution: usize,
) -> Result<AngularRule> {
    if theta_resolution < 4 || (dimension == 3 && phi_resolution < 4) {
        return Err(CknError::InvalidArgument(format!(
            "angular resolution must be >= 4, got theta {theta_resolution} phi {phi_resolution}"
        )));
    }
    let theta_w = 2.0 * PI / theta_resolution as f64;
    let thetas: Vec<f64> = (0..theta_resolution).map(|j| theta_w * j as f64).collect();

    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut directions = Vec::new();
    if dimension == 2 {
        for &theta in &thetas {
            nodes.push(vec![theta]);
            weights.push(theta_w);
            directions.push(vec![theta.cos(), theta.sin()]);
        }
    } else {
        // Gauss nodes in c = cos(phi) make the weights carry sin(phi) dphi
        // exactly; integrands polynomial in cos(phi) are then integrated
        // exactly in the polar direction.
        let (cs, cw) = gauss_legendre(phi_resolution);
        for (&c, &wc) in cs.iter().zip(&cw) {
            let phi = c.acos();
            let sin_phi = (1.0 - c * c).sqrt();
            for &theta in &thetas {
                nodes.push(vec![phi, theta]);
                weights.push(wc * theta_w);
                directions.push(vec![sin_phi * theta.cos(), sin_phi * theta.sin(), c]);
            }
        }
    }
    Ok(AngularRule {
        dimension,
        nodes,
        weights,
        directions,
        theta_count: theta_resolution,
    })
}

/// Surface area of `S^(n-1)`: `2 pi^(n/2) / Gamma(n/2)`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// `Gamma(k/2)` for integer k >= 1.
fn gamma_half(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        (1..k / 2).map(|i| i as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut z = 0.5;
        while z + 0.5 < k as f64 / 2.0 {
            g *= z;
            z += 1.0;
        }
        g
    }
}

/// Radial rule times angular rule; `angular = None` means a radial-only
/// grid (valid for radial integrands on any n >= 2, the sphere factor is
/// applied analytically).
#[derive(Debug, Clone)]
pub struct ProductGrid {
    pub radial: RadialRule,
    pub angular: Option<AngularRule>,
    pub dimension: usize,
}

impl ProductGrid {
    pub fn new(radial: RadialRule, angular: AngularRule) -> Result<Self> {
        let dimension = angular.dimension;
        Ok(ProductGrid {
            radial,
            angular: Some(angular),
            dimension,
        })
    }

    pub fn radial_only(radial: RadialRule, dimension: usize) -> Result<Self> {
        if dimension < 2 {
            return Err(CknError::InvalidArgument(format!(
                "grid dimension must be >= 2, got {dimension}"
            )));
        }
        Ok(ProductGrid {
            radial,
            angular: None,
            dimension,
        })
    }

    pub fn node_count(&self) -> usize {
        let ang = self.angular.as_ref().map_or(1, |a| a.weights.len());
        self.radial.nodes.len() * ang
    }
}

/// Neumaier-compensated accumulator; summation order is fixed by the caller
/// so results are reproducible across runs and thread counts.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn total(self) -> f64 {
        self.sum + self.c
    }
}

/// Fused quadrature pass: one field evaluation per node yields K integrand
/// values, each accumulated against its own weight exponent `betas[k]`.
/// Shells are evaluated in parallel and reduced in radial order, so the
/// result is independent of thread count.
pub fn integrate_many<const K: usize, F>(
    field: F,
    betas: [f64; K],
    grid: &ProductGrid,
) -> Result<[f64; K]>
where
    F: Fn(&[f64]) -> [f64; K] + Sync,
{
    let n = grid.dimension;
    for beta in betas {
        if !(beta > -(n as f64)) {
            return Err(CknError::InvalidArgument(format!(
                "weight exponent beta = {beta} is not integrable at the origin for n = {n}"
            )));
        }
    }

    let mut synth_dir: Vec<Vec<f64>> = Vec::new();
    let mut synth_w: Vec<f64> = Vec::new();
    let (dirs, ang_w): (&[Vec<f64>], &[f64]) = match &grid.angular {
        Some(rule) => (rule.directions(), &rule.weights),
        None => {
            let mut e1 = vec![0.0; n];
            e1[0] = 1.0;
            synth_dir.push(e1);
            synth_w.push(sphere_area(n));
            (&synth_dir, &synth_w)
        }
    };

    let shells: Vec<Result<[f64; K]>> = grid
        .radial
        .nodes
        .par_iter()
        .zip(grid.radial.weights.par_iter())
        .map(|(&r, &wr)| {
            let mut acc = [Compensated::default(); K];
            let mut point = vec![0.0; n];
            for (sigma, &ws) in dirs.iter().zip(ang_w) {
                for (pi, &si) in point.iter_mut().zip(sigma) {
                    *pi = r * si;
                }
                let values = field(&point);
                for (a, v) in acc.iter_mut().zip(values) {
                    if !v.is_finite() {
                        return Err(CknError::Evaluation {
                            point: point.clone(),
                            value: v,
                        });
                    }
                    a.add(ws * v);
                }
            }
            let mut out = [0.0; K];
            for k in 0..K {
                out[k] = wr * r.powf(betas[k] + n as f64 - 1.0) * acc[k].total();
            }
            Ok(out)
        })
        .collect();

    let mut totals = [Compensated::default(); K];
    for shell in shells {
        let shell = shell?;
        for (t, v) in totals.iter_mut().zip(shell) {
            t.add(v);
        }
    }
    let mut out = [0.0; K];
    for k in 0..K {
        out[k] = totals[k].total();
    }
    Ok(out)
}

/// `∫ field(x) |x|^beta dx` over R^n on the given grid.
pub fn integrate<F>(field: F, beta: f64, grid: &ProductGrid) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let [v] = integrate_many(|x| [field(x)], [beta], grid)?;
    Ok(v)
}
