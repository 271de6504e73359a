//! Cross-module identities: the change of variables phi(x) = x |x|^alpha
//! must convert weighted norms into unweighted ones with the exact
//! (1+alpha) factors, on truncated domains as well once the truncation
//! radii are matched (r -> r^(1/(1+alpha))).

use ckn_core::{
    atilde_apply, atilde_norm_sq, ckn_quotient, compose_with_phi, inverse_phi,
    make_angular_rule_3d, make_fk, make_graded_radial_rule, make_radial, make_radial_rule, phi_map,
    ratio_f, weighted_grad_norm, weighted_norm, Alpha, CknParams, ProductGrid, RadialKind,
    RadialShape, ScalarField, SupportHint,
};
use proptest::prelude::*;
use std::sync::Arc;

fn alpha(v: f64) -> Alpha {
    Alpha::new(v).unwrap()
}

/// Radial-only grid whose truncation radius matches `base_r_max` through
/// the change of variables, graded to resolve the stretched range.
fn matched_grid(base_r_max: f64, a: Alpha, dimension: usize) -> ProductGrid {
    let r_max = base_r_max.powf(1.0 / (1.0 + a.value()));
    let mut grading = (r_max.ln() / (512.0_f64.ln() - 8.0_f64.ln())).clamp(1.0, 20.0);
    if a.value() < 0.0 {
        grading = grading.max(2.0);
    }
    ProductGrid::radial_only(
        make_graded_radial_rule(r_max, 512, 8, grading).unwrap(),
        dimension,
    )
    .unwrap()
}

#[test]
fn value_norm_change_of_variables() {
    // ∫ |f(phi(x))|^q |x|^(alpha n) dx = (1+alpha)^(-1) ∫ |f|^q dy, so the
    // q-norms differ by (1+alpha)^(-1/q).
    let base = ProductGrid::radial_only(make_radial_rule(40.0, 256, 8).unwrap(), 3).unwrap();
    for a in [-0.5, 0.3, 1.0, 2.0] {
        let a = alpha(a);
        let stretched = matched_grid(40.0, a, 3);
        for (kind, gamma) in [(RadialKind::Gaussian, 1.0), (RadialKind::GnsPower, 3.0)] {
            let f = make_radial(kind, RadialShape { gamma, lambda: 1.0 }, 3, 2.0).unwrap();
            let g = compose_with_phi(&f, a);
            for q in [2.0, 3.0] {
                let plain = weighted_norm(&f, q, 0.0, &base).unwrap();
                let weighted = weighted_norm(&g, q, a.value() * 3.0, &stretched).unwrap();
                let factor = (1.0 + a.value()).powf(-1.0 / q);
                assert!(
                    (weighted / (factor * plain) - 1.0).abs() < 1e-6,
                    "q = {q}, alpha = {}: {weighted} vs {}",
                    a.value(),
                    factor * plain
                );
            }
        }
    }
}

#[test]
fn gradient_norm_change_of_variables_radial() {
    // For radial f the contraction acts by 1/(1+alpha), so
    // ∫ |grad(f(phi))|^p |x|^(alpha(n-p)) dx = (1+alpha)^(p-1) ∫ |grad f|^p dy.
    let base = ProductGrid::radial_only(make_radial_rule(40.0, 256, 8).unwrap(), 3).unwrap();
    for a in [-0.5, 0.3, 1.0, 2.0] {
        let a = alpha(a);
        let stretched = matched_grid(40.0, a, 3);
        for p in [1.5, 2.0] {
            let f = make_radial(
                RadialKind::GnsPower,
                RadialShape {
                    gamma: 3.0,
                    lambda: 1.0,
                },
                3,
                p,
            )
            .unwrap();
            let g = compose_with_phi(&f, a);
            let plain = weighted_grad_norm(&f, p, 0.0, &base).unwrap();
            let weighted = weighted_grad_norm(&g, p, a.value() * (3.0 - p), &stretched).unwrap();
            let factor = (1.0 + a.value()).powf((p - 1.0) / p);
            assert!(
                (weighted / (factor * plain) - 1.0).abs() < 1e-6,
                "p = {p}, alpha = {}: {weighted} vs {}",
                a.value(),
                factor * plain
            );
        }
    }
}

#[test]
fn quotient_identity_for_radial_fields() {
    // Q_alpha(f compose phi) = (1+alpha)^(t/n - t) Q_0(f) for radial f.
    let base = ProductGrid::radial_only(make_radial_rule(40.0, 256, 8).unwrap(), 3).unwrap();
    for a in [-0.5, 0.3, 1.0, 2.0] {
        let a = alpha(a);
        let stretched = matched_grid(40.0, a, 3);
        let params = CknParams::new(3, 2.0, 2.0, 0.5, a).unwrap();
        let f = make_radial(
            RadialKind::GnsPower,
            RadialShape {
                gamma: 3.0,
                lambda: 1.0,
            },
            3,
            2.0,
        )
        .unwrap();
        let g = compose_with_phi(&f, a);
        let q0 = ckn_quotient(&f, &params.unweighted(), &base)
            .unwrap()
            .quotient;
        let qa = ckn_quotient(&g, &params, &stretched).unwrap().quotient;
        let factor = (1.0 + a.value()).powf(params.t / 3.0 - params.t);
        assert!(
            (qa / (factor * q0) - 1.0).abs() < 1e-6,
            "alpha = {}: {qa} vs {}",
            a.value(),
            factor * q0
        );
    }
}

#[test]
fn contracted_gradient_change_of_variables() {
    // The radial contraction undoes the radial stretch of Dphi exactly:
    // A_tilde Dphi = |x|^alpha I. Hence for u = g compose phi,
    // ∫ |A_tilde grad u|^p |x|^(alpha(n-p)) dx = (1+alpha)^(-1) ∫ |grad g|^p dy,
    // and F(u) extracts the contracted share of the weighted energy.
    let base = ProductGrid::new(
        make_radial_rule(5.0, 48, 8).unwrap(),
        make_angular_rule_3d(32, 24).unwrap(),
    )
    .unwrap();
    for a in [-0.4, 0.8, 1.5] {
        let a = alpha(a);
        let r_max = 5.0_f64.powf(1.0 / (1.0 + a.value()));
        let stretched = ProductGrid::new(
            make_radial_rule(r_max, 160, 8).unwrap(),
            make_angular_rule_3d(32, 24).unwrap(),
        )
        .unwrap();
        for k in [1_u32, 3] {
            let g = make_fk(k).unwrap();
            let u = compose_with_phi(&g, a);
            let p = 2.0;
            let params = CknParams::new(3, p, 2.0, 0.5, a).unwrap();

            let plain_energy = weighted_grad_norm(&g, p, 0.0, &base).unwrap().powf(p);
            let weighted_energy = weighted_grad_norm(&u, p, a.value() * (3.0 - p), &stretched)
                .unwrap()
                .powf(p);
            let contracted_energy = ratio_f(&u, &params, &stretched).unwrap() * weighted_energy;
            let expected = plain_energy / (1.0 + a.value());
            assert!(
                (contracted_energy / expected - 1.0).abs() < 1e-5,
                "k = {k}, alpha = {}: {contracted_energy} vs {expected}",
                a.value()
            );
        }
    }
}

#[test]
fn master_quotient_identity() {
    // Q_alpha(g compose phi) = (1+alpha)^(t/n) F(g compose phi)^(t/p) Q_0(g)
    // for arbitrary (not necessarily radial) g; specializing to radial g,
    // where F = (1+alpha)^(-p), recovers the radial-class factor.
    let base = ProductGrid::new(
        make_radial_rule(5.0, 48, 8).unwrap(),
        make_angular_rule_3d(32, 24).unwrap(),
    )
    .unwrap();
    for a in [-0.4, 0.8, 1.5] {
        let a = alpha(a);
        let r_max = 5.0_f64.powf(1.0 / (1.0 + a.value()));
        let stretched = ProductGrid::new(
            make_radial_rule(r_max, 160, 8).unwrap(),
            make_angular_rule_3d(32, 24).unwrap(),
        )
        .unwrap();
        for k in [1_u32, 3] {
            let g = make_fk(k).unwrap();
            let u = compose_with_phi(&g, a);
            let params = CknParams::new(3, 2.0, 2.0, 0.5, a).unwrap();

            let q0 = ckn_quotient(&g, &params.unweighted(), &base)
                .unwrap()
                .quotient;
            let qa = ckn_quotient(&u, &params, &stretched).unwrap().quotient;
            let f_u = ratio_f(&u, &params, &stretched).unwrap();
            let expected =
                (1.0 + a.value()).powf(params.t / 3.0) * f_u.powf(params.t / params.p) * q0;
            assert!(
                (qa / expected - 1.0).abs() < 1e-5,
                "k = {k}, alpha = {}: {qa} vs {expected}",
                a.value()
            );
        }
    }
}

#[test]
fn anisotropy_ratio_sandwich() {
    // 1 and (1+alpha)^(-p) bound F on either side, in the order set by the
    // sign of alpha; radial fields sit exactly at (1+alpha)^(-p).
    let grid = ProductGrid::new(
        make_radial_rule(12.0, 64, 8).unwrap(),
        make_angular_rule_3d(32, 24).unwrap(),
    )
    .unwrap();
    let fields = [
        make_fk(1).unwrap(),
        make_fk(4).unwrap(),
        make_radial(
            RadialKind::Gaussian,
            RadialShape {
                gamma: 1.0,
                lambda: 1.0,
            },
            3,
            2.0,
        )
        .unwrap(),
        make_radial(
            RadialKind::GnsPower,
            RadialShape {
                gamma: 3.0,
                lambda: 1.0,
            },
            3,
            2.0,
        )
        .unwrap(),
    ];
    for a in [-0.6, -0.2, 0.5, 1.0, 2.0] {
        let p = 2.0;
        let params = CknParams::new(3, p, 2.0, 0.5, alpha(a)).unwrap();
        let cap = (1.0 + a).powf(-p);
        let (lo, hi) = if a > 0.0 { (cap, 1.0) } else { (1.0, cap) };
        for f in &fields {
            let value = ratio_f(f, &params, &grid).unwrap();
            assert!(
                value >= lo - 1e-7 && value <= hi + 1e-9,
                "alpha = {a}: F = {value} outside [{lo}, {hi}]"
            );
            if f.is_radial() {
                assert!((value - cap).abs() <= 1e-12 * cap);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn map_roundtrip(
        a in -0.95_f64..4.0,
        x in prop::array::uniform3(-10.0_f64..10.0),
    ) {
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>().sqrt() > 1e-3);
        let alpha = Alpha::new(a).unwrap();
        let y = phi_map(&x, alpha).unwrap();
        let back = inverse_phi(&y, alpha).unwrap();
        for (u, v) in x.iter().zip(&back) {
            prop_assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0));
        }
    }

    #[test]
    fn contraction_shortcut_agrees(
        a in -0.9_f64..3.0,
        x in prop::array::uniform3(-5.0_f64..5.0),
        v in prop::array::uniform3(-5.0_f64..5.0),
    ) {
        let r = x.iter().map(|u| u * u).sum::<f64>().sqrt();
        prop_assume!(r > 1e-3);
        let alpha = Alpha::new(a).unwrap();
        let sigma: Vec<f64> = x.iter().map(|u| u / r).collect();
        let applied = atilde_apply(&v, &sigma, alpha).unwrap();
        let direct: f64 = applied.iter().map(|u| u * u).sum();
        let norm_sq: f64 = v.iter().map(|u| u * u).sum();
        let radial: f64 = v.iter().zip(&sigma).map(|(u, s)| u * s).sum();
        let shortcut = atilde_norm_sq(norm_sq, radial, alpha);
        prop_assert!((direct - shortcut).abs() <= 1e-10 * direct.max(1.0));
    }

    #[test]
    fn derived_exponent_consistency(
        p in 1.0_f64..2.9,
        s in 1.0_f64..8.0,
        t in 0.0_f64..1.0,
        a in -0.9_f64..3.0,
    ) {
        let params = CknParams::new(3, p, s, t, Alpha::new(a).unwrap()).unwrap();
        let r = params.r();
        let lhs = 1.0 / r;
        let rhs = (1.0 - t) / s + t * (3.0 - p) / (3.0 * p);
        prop_assert!((lhs - rhs).abs() <= 1e-12);
        prop_assert!(r >= 1.0 - 1e-12);
    }
}

#[test]
fn quotient_scale_invariance_random_amplitudes() {
    let grid = ProductGrid::radial_only(make_radial_rule(30.0, 96, 6).unwrap(), 3).unwrap();
    let params = CknParams::new(3, 2.0, 2.0, 0.5, alpha(0.9)).unwrap();
    let f = make_radial(
        RadialKind::GnsPower,
        RadialShape {
            gamma: 2.5,
            lambda: 1.0,
        },
        3,
        2.0,
    )
    .unwrap();
    let base = ckn_quotient(&f, &params, &grid).unwrap().quotient;

    let scaled_gns = |c: f64| {
        ScalarField::radial(
            3,
            Arc::new(move |r: f64| c * (1.0 + r * r).powf(-2.5)),
            Arc::new(move |r: f64| c * -5.0 * r * (1.0 + r * r).powf(-3.5)),
            SupportHint::Decaying {
                r_max_sufficient: 40.0,
            },
        )
    };
    proptest!(ProptestConfig::with_cases(32), |(c in prop::num::f64::NORMAL.prop_filter("nonzero scale", |c| c.abs() > 1e-6 && c.abs() < 1e6))| {
        let q = ckn_quotient(&scaled_gns(c), &params, &grid).unwrap().quotient;
        prop_assert!((q / base - 1.0).abs() <= 1e-11);
    });
}
