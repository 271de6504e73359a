//! Constant assembly: the unweighted interpolation constant M estimated by
//! profile optimization, the proven factors a_alpha, the sharp and
//! radial-class constants they combine into, the symmetry-breaking scan
//! F(f_k), and theorem-level verification reports.
//!
//! Constant bookkeeping, with A = (1+alpha):
//!   sharp constant          A^(t/n) a_alpha(alpha, t) M
//!   radial-class constant   A^(t/n - t) M
//!   a_alpha                 A^(-t) for alpha <= 0, 1 for alpha > 0
//! so the two coincide for alpha <= 0 and differ by the symmetry-breaking
//! gap A^t for alpha > 0.

use serde::Serialize;

use crate::error::{CknError, Result};
use crate::functionals::{ckn_quotient, ratio_f, CknParams};
use crate::maps::Alpha;
use crate::optim::maximize;
use crate::quadrature::{make_graded_radial_rule, ProductGrid};
use crate::testfns::{compose_with_phi, make_fk, make_radial, RadialKind, RadialShape};

/// Shape of the grid an estimate ran on, for reproducibility records.
#[derive(Debug, Clone, Serialize)]
pub struct GridSettings {
    pub dimension: usize,
    pub r_max: f64,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
}

impl GridSettings {
    pub fn from_grid(grid: &ProductGrid) -> Self {
        GridSettings {
            dimension: grid.dimension,
            r_max: grid.radial.r_max,
            radial_nodes: grid.radial.nodes.len(),
            angular_nodes: grid.angular.as_ref().map_or(0, |a| a.weights.len()),
        }
    }
}

/// Result of maximizing the unweighted quotient over a profile family.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantEstimate {
    pub value: f64,
    pub optimizer_params: RadialShape,
    pub iterations: usize,
    pub converged: bool,
    /// The best candidate's quotient recomputed on an independent graded
    /// reference rule with the same truncation radius. Disagreement with
    /// `value` beyond one part in 10^6 marks the estimate non-converged.
    pub reference_value: f64,
    pub grid_settings: GridSettings,
    /// Best quotient value after each simplex iteration.
    pub trace: Vec<f64>,
}

/// Estimates `M(n, p, s, t)` by maximizing the unweighted quotient Q_0 over
/// the chosen radial family: over (ln gamma, ln lambda) for `gns-power`,
/// over ln lambda alone for the fixed-exponent kinds. The weight in
/// `params` plays no role; the alpha = 0 quotient is used regardless.
///
/// Three guards keep the discrete search honest. Candidates are evaluated
/// at unit scale, which the exact scale invariance of the quotient permits;
/// otherwise a large-scale profile looks flat on the truncated grid, its
/// gradient norm collapses, and the discrete quotient diverges. Power-law
/// exponents below the admissibility floor (continuum norms divergent,
/// invisible to a truncated grid) are fenced off with a sloped penalty; the
/// s-norm condition drops out at t = 1 where that norm carries exponent
/// zero. The mirror-image escape, gamma so large the profile collapses to a
/// spike between radial nodes, inflates the discrete quotient the same way;
/// candidates whose half-radius falls below the first node are rejected,
/// and after the search the winner is recomputed on an independent graded
/// reference rule with the same truncation radius. If the two values drift
/// apart by more than one part in 10^6 the grid cannot certify the
/// estimate and `converged` is false. Start point: gamma = max((n-p)/p,
/// 1/2) lifted to 1.25x the floor when needed, lambda = 1, ln-space step
/// 0.4.
///
/// Radial profiles only need the radial rule, so the angular factor of
/// `grid` is dropped for the inner quotients.
pub fn estimate_m(
    params: &CknParams,
    family: RadialKind,
    grid: &ProductGrid,
) -> Result<ConstantEstimate> {
    estimate_m_with_start(params, family, grid, 1.0)
}

/// As `estimate_m` with an explicit starting scale; the estimate is
/// invariant under this choice because the quotient is scale-invariant.
pub fn estimate_m_with_start(
    params: &CknParams,
    family: RadialKind,
    grid: &ProductGrid,
    lambda0: f64,
) -> Result<ConstantEstimate> {
    if !(params.t > 0.0) {
        return Err(CknError::UnsupportedParameters(
            "estimating M needs t in (0, 1]; at t = 0 the quotient is identically 1".into(),
        ));
    }
    if !(lambda0 > 0.0) {
        return Err(CknError::InvalidArgument(format!(
            "starting scale must be positive, got {lambda0}"
        )));
    }
    let base = params.unweighted();
    let grid1d = ProductGrid::radial_only(grid.radial.clone(), grid.dimension)?;
    let (n, p) = (params.n, params.p);
    let nf = n as f64;

    if family != RadialKind::Gaussian && p <= 1.0 {
        return Err(CknError::UnsupportedParameters(
            "power-law profile families need p > 1; use the gaussian family at p = 1".into(),
        ));
    }
    let gamma_floor = if family == RadialKind::Gaussian {
        0.0
    } else {
        let m_exp = p / (p - 1.0);
        let mut floor = ((nf - p) / (m_exp * p)).max(nf / (m_exp * params.r()));
        if params.t < 1.0 {
            floor = floor.max(nf / (m_exp * params.s));
        }
        floor
    };
    if family == RadialKind::SobolevExtremal && (nf - p) / p <= gamma_floor {
        return Err(CknError::UnsupportedParameters(
            "the sobolev-extremal profile has a divergent norm for these parameters; it is only admissible at t = 1".into(),
        ));
    }

    // Innermost positive node: a profile whose half-radius sits below it is
    // a spike the rule cannot see, only misintegrate.
    let r_first = grid1d.radial.nodes[0].max(f64::MIN_POSITIVE);
    let half_radius = |gamma: f64| -> f64 {
        let m_exp = p / (p - 1.0);
        (2.0_f64.powf(1.0 / gamma) - 1.0).powf(1.0 / m_exp)
    };

    let objective = |ln_shape: &[f64]| -> f64 {
        let gamma = match family {
            RadialKind::GnsPower => ln_shape[0].exp(),
            RadialKind::SobolevExtremal => (nf - p) / p,
            RadialKind::Gaussian => 1.0,
        };
        if gamma <= gamma_floor {
            return -1e3 * (1.0 + (gamma_floor - gamma) / gamma_floor);
        }
        if family == RadialKind::GnsPower {
            let rh = half_radius(gamma);
            if rh < r_first {
                return -1e3 * (1.0 + (r_first - rh) / r_first);
            }
        }
        let shape = RadialShape { gamma, lambda: 1.0 };
        match make_radial(family, shape, n, p).and_then(|f| ckn_quotient(&f, &base, &grid1d)) {
            Ok(report) => report.quotient,
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let gamma0 = ((nf - p) / p).max(0.5).max(1.25 * gamma_floor);
    let start = match family {
        RadialKind::GnsPower => vec![gamma0.ln(), lambda0.ln()],
        _ => vec![lambda0.ln()],
    };
    let run = maximize(objective, &start, 0.4, 300, 1e-9);

    let optimizer_params = match family {
        RadialKind::GnsPower => RadialShape {
            gamma: run.best[0].exp(),
            lambda: 1.0,
        },
        RadialKind::SobolevExtremal => RadialShape {
            gamma: (nf - p) / p,
            lambda: 1.0,
        },
        RadialKind::Gaussian => RadialShape {
            gamma: 1.0,
            lambda: 1.0,
        },
    };

    // Confirmation pass: the same candidate on a reference rule sharing the
    // truncation radius isolates quadrature error from truncation bias.
    let reference_value = {
        let rule = reference_radial_rule(grid.radial.r_max)?;
        let ref_grid = ProductGrid::radial_only(rule, n)?;
        make_radial(family, optimizer_params, n, p)
            .and_then(|f| ckn_quotient(&f, &base, &ref_grid))
            .map_or(f64::NAN, |r| r.quotient)
    };
    let drift = (reference_value - run.value).abs() / run.value.abs().max(f64::MIN_POSITIVE);
    let converged = run.converged && run.value.is_finite() && run.value > 0.0 && drift <= 1e-6;

    Ok(ConstantEstimate {
        value: run.value,
        optimizer_params,
        iterations: run.iterations,
        converged,
        reference_value,
        grid_settings: GridSettings::from_grid(grid),
        trace: run.trace,
    })
}

/// Graded rule used to confirm an estimate: 256 panels, 10-point panels,
/// grading strong enough to place the first panel edge near 0.05 even for
/// far-tail truncation radii.
fn reference_radial_rule(r_max: f64) -> Result<crate::quadrature::RadialRule> {
    let panels = 256;
    let grading = (r_max / 0.05).ln() / (panels as f64).ln();
    make_graded_radial_rule(r_max, panels, 10, grading.clamp(2.0, 20.0))
}

/// The proven supremal factor: `(1+alpha)^(-t)` for `alpha <= 0`, `1` for
/// `alpha > 0`; both branches give 1 at alpha = 0.
pub fn a_alpha(alpha: Alpha, t: f64) -> f64 {
    if alpha.value() <= 0.0 {
        (1.0 + alpha.value()).powf(-t)
    } else {
        1.0
    }
}

/// `(1+alpha)^(t/n) a_alpha(alpha, t) M`: equals `(1+alpha)^(t/n - t) M`
/// for alpha < 0 and `(1+alpha)^(t/n) M` for alpha > 0.
pub fn sharp_constant(params: &CknParams, m: f64) -> Result<f64> {
    check_m(m)?;
    let a = params.alpha;
    Ok((1.0 + a.value()).powf(params.t / params.n as f64) * a_alpha(a, params.t) * m)
}

/// Constant over the radial class: `(1+alpha)^(t/n - t) M` for every
/// alpha > -1.
pub fn radial_sharp_constant(params: &CknParams, m: f64) -> Result<f64> {
    check_m(m)?;
    let a = params.alpha.value();
    Ok((1.0 + a).powf(params.t / params.n as f64 - params.t) * m)
}

fn check_m(m: f64) -> Result<()> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(CknError::InvalidArgument(format!(
            "constant assembly needs M > 0, got {m}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanEntry {
    pub k: u32,
    pub f_value: f64,
}

/// Scan of the anisotropy ratio along the symmetry-breaking sequence.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryScan {
    pub alpha: Alpha,
    pub p: f64,
    pub entries: Vec<ScanEntry>,
    /// Richardson limit from the last two entries, assuming a 1/k^2
    /// correction (an empirically confirmed rate, not a proven one).
    pub extrapolated_limit: f64,
    pub assumed_rate: String,
}

/// Computes `F(f_k)` for each requested k on an n = 3 product grid and
/// extrapolates the k -> infinity limit. The azimuthal resolution must
/// exceed 2 k_max so the trapezoidal rule stays exact on the squared
/// cos(k theta) factors; anything less is rejected before computing.
pub fn symmetry_scan(alpha: Alpha, p: f64, ks: &[u32], grid: &ProductGrid) -> Result<SymmetryScan> {
    let angular = grid.angular.as_ref().ok_or_else(|| {
        CknError::InvalidArgument(
            "the symmetry scan needs an angular rule, not a radial-only grid".into(),
        )
    })?;
    if grid.dimension != 3 || angular.dimension != 3 {
        return Err(CknError::InvalidArgument(format!(
            "the f_k family lives in n = 3, got a grid with n = {}",
            grid.dimension
        )));
    }
    if ks.is_empty() {
        return Err(CknError::InvalidArgument("empty k list".into()));
    }
    if ks[0] < 1 || ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CknError::InvalidArgument(
            "k values must be strictly increasing and >= 1".into(),
        ));
    }
    let k_max = *ks.last().expect("nonempty") as usize;
    if angular.theta_count() <= 2 * k_max {
        return Err(CknError::InvalidArgument(format!(
            "azimuthal resolution {} cannot resolve k = {k_max}; need more than {}",
            angular.theta_count(),
            2 * k_max
        )));
    }

    let params = CknParams::new(3, p, 2.0, 0.5, alpha)?;
    let mut entries = Vec::with_capacity(ks.len());
    for &k in ks {
        let f = make_fk(k)?;
        let value = ratio_f(&f, &params, grid)?;
        entries.push(ScanEntry { k, f_value: value });
    }
    let extrapolated_limit = if entries.len() >= 2 {
        let a = entries[entries.len() - 2];
        let b = entries[entries.len() - 1];
        let (k1, k2) = (a.k as f64, b.k as f64);
        (b.f_value * k2 * k2 - a.f_value * k1 * k1) / (k2 * k2 - k1 * k1)
    } else {
        entries[0].f_value
    };
    Ok(SymmetryScan {
        alpha,
        p,
        entries,
        extrapolated_limit,
        assumed_rate: "1/k^2".into(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremItem {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub params: CknParams,
    pub m_estimate: ConstantEstimate,
    pub sharp_constant: f64,
    pub radial_constant: f64,
    /// True only in the regime where an optimizer is known to exist (alpha <= 0).
    pub attainment_claimed: bool,
    pub function_class_note: String,
    pub items: Vec<TheoremItem>,
    pub all_passed: bool,
}

/// Grid for fields composed with phi: the radius transforms as
/// `r -> r^(1/(1+alpha))`, so truncating the composed field at the
/// transformed radius makes the change-of-variables identities exact on the
/// truncated domains as well. Panels are graded to cover the stretched
/// range.
fn composed_field_grid(grid: &ProductGrid, alpha: Alpha) -> Result<ProductGrid> {
    let stretch = 1.0 / (1.0 + alpha.value());
    let r_max = grid.radial.r_max.powf(stretch);
    let panels = grid.radial.nodes.len().max(512);
    let mut grading = (r_max.ln() / ((panels as f64).ln() - (8.0_f64).ln())).clamp(1.0, 20.0);
    if alpha.value() < 0.0 {
        // Negative weight powers at the origin want a graded first panel.
        grading = grading.max(2.0);
    }
    ProductGrid::radial_only(
        make_graded_radial_rule(r_max, panels, 8, grading)?,
        grid.dimension,
    )
}

/// Tail-integrability guard for the power-law battery entries: each norm's
/// integrand must decay strictly faster than 1/r.
fn power_norms_integrable(gamma: f64, p: f64, params: &CknParams) -> bool {
    let n = params.n as f64;
    let m = p / (p - 1.0);
    let decay = gamma * m;
    let value_ok = |q: f64| decay * q > params.norm_weight() + n;
    let grad_ok = (decay + 1.0) * p > params.grad_weight() + n;
    value_ok(params.s) && value_ok(params.r()) && grad_ok
}

/// Verification report for the three theorem-level claims:
/// (a) the composed optimized radial profile attains the radial-class
///     constant; (b) the sharp and radial constants relate per the sign of
///     alpha, with the f_k scan witnessing the supremum for alpha > 0;
/// (c) no bundled field's quotient exceeds the sharp constant.
pub fn verify_theorems(params: &CknParams, grid: &ProductGrid) -> Result<TheoremReport> {
    let alpha = params.alpha;
    let a = alpha.value();
    if a > 0.0 && (params.n != 3 || grid.angular.is_none()) {
        return Err(CknError::InvalidArgument(
            "symmetry evidence for alpha > 0 needs an n = 3 grid with an angular rule".into(),
        ));
    }

    let m_estimate = estimate_m(params, RadialKind::GnsPower, grid)?;
    if !m_estimate.converged {
        return Err(CknError::NonConvergence(format!(
            "M estimate {:.9} disagrees with its reference recomputation {:.9}; refine the radial rule",
            m_estimate.value, m_estimate.reference_value
        )));
    }
    let m = m_estimate.value;
    let sharp = sharp_constant(params, m)?;
    let radial = radial_sharp_constant(params, m)?;
    let mut items = Vec::new();

    // (a) The optimized profile composed with phi sits at the radial-class
    // constant; for alpha < 0 this is the sharp constant itself.
    {
        let f_star = make_radial(
            RadialKind::GnsPower,
            m_estimate.optimizer_params,
            params.n,
            params.p,
        )?;
        let composed = compose_with_phi(&f_star, alpha);
        let cgrid = composed_field_grid(grid, alpha)?;
        let q = ckn_quotient(&composed, params, &cgrid)?.quotient;
        let tolerance = 1e-4;
        items.push(TheoremItem {
            name: "radial-attainment".into(),
            passed: (q - radial).abs() <= tolerance * radial,
            observed: q,
            expected: radial,
            tolerance,
            note: if a < 0.0 {
                "composed optimizer attains the sharp constant (attained case)".into()
            } else if a == 0.0 {
                "unweighted case: optimizer attains M".into()
            } else {
                "composed optimizer attains the radial-class constant; the sharp constant is strictly larger".into()
            },
        });
    }

    // (b) Relation between the two constants.
    if a > 0.0 {
        let theta = grid.angular.as_ref().expect("checked above").theta_count();
        let ks: Vec<u32> = [4_u32, 8, 16, 32]
            .into_iter()
            .filter(|&k| 2 * (k as usize) < theta)
            .collect();
        if ks.len() < 2 {
            return Err(CknError::InvalidArgument(format!(
                "azimuthal resolution {theta} too low for the symmetry scan; need at least 18"
            )));
        }
        let scan = symmetry_scan(alpha, params.p, &ks, grid)?;
        let evidence = (1.0 + a).powf(params.t / params.n as f64)
            * scan.extrapolated_limit.powf(params.t / params.p)
            * m;
        let tolerance = 1e-2;
        items.push(TheoremItem {
            name: "symmetry-breaking".into(),
            passed: evidence > radial && (evidence - sharp).abs() <= tolerance * sharp,
            observed: evidence,
            expected: sharp,
            tolerance,
            note: format!(
                "f_k witness with k in {:?}: F -> 1 drives the quotient bound toward the sharp constant; \
                 Richardson extrapolation assumes a 1/k^2 correction; attainment is NOT claimed",
                scan.entries.iter().map(|e| e.k).collect::<Vec<_>>()
            ),
        });
    } else {
        items.push(TheoremItem {
            name: "constants-coincide".into(),
            passed: (sharp / radial - 1.0).abs() <= 1e-12,
            observed: sharp / radial,
            expected: 1.0,
            tolerance: 1e-12,
            note: if a == 0.0 {
                "all constants coincide at M".into()
            } else {
                "sharp constant is achieved within the radial class".into()
            },
        });
    }

    // (c) Upper-bound sanity over the bundled battery.
    {
        let mut worst: Option<(String, f64)> = None;
        let mut consider = |label: String, q: f64| {
            if worst.as_ref().is_none_or(|(_, w)| q > *w) {
                worst = Some((label, q));
            }
        };

        let radial_entries = [
            ("gaussian", RadialKind::Gaussian, 1.0, 1.0),
            ("gns-power gamma=3", RadialKind::GnsPower, 3.0, 1.0),
            (
                "gns-power gamma=2.5 lambda=1.5",
                RadialKind::GnsPower,
                2.5,
                1.5,
            ),
        ];
        for (label, kind, gamma, lambda) in radial_entries {
            if kind != RadialKind::Gaussian && !power_norms_integrable(gamma, params.p, params) {
                continue;
            }
            let f = make_radial(kind, RadialShape { gamma, lambda }, params.n, params.p)?;
            let q = ckn_quotient(&f, params, grid)?.quotient;
            consider(label.into(), q);
            if kind == RadialKind::Gaussian || gamma == 3.0 {
                let composed = compose_with_phi(&f, alpha);
                let cgrid = composed_field_grid(grid, alpha)?;
                let qc = ckn_quotient(&composed, params, &cgrid)?.quotient;
                consider(format!("{label} composed"), qc);
            }
        }
        if params.n == 3 && grid.angular.is_some() && grid.radial.r_max >= 4.25 {
            for k in [1_u32, 4] {
                let f = make_fk(k)?;
                let q = ckn_quotient(&f, params, grid)?.quotient;
                consider(format!("f_{k}"), q);
            }
        }

        let (label, observed) = worst.expect("battery is never empty");
        items.push(TheoremItem {
            name: "upper-bound-sanity".into(),
            passed: observed <= sharp + 1e-6,
            observed,
            expected: sharp,
            tolerance: 1e-6,
            note: format!("largest bundled quotient from {label}"),
        });
    }

    let all_passed = items.iter().all(|i| i.passed);
    Ok(TheoremReport {
        params: *params,
        m_estimate,
        sharp_constant: sharp,
        radial_constant: radial,
        attainment_claimed: a <= 0.0,
        function_class_note: "suprema are witnessed over smooth bundled fields with compact support or stated decay; no claim is made beyond this class".into(),
        items,
        all_passed,
    })
}
