//! Numerical laboratory for a family of weighted interpolation inequalities
//! on R^n with power weights |x|^(alpha n) and |x|^(alpha (n-p)):
//!
//!   ||f||_{L^r(w)} <= C ||f||_{L^s(w)}^(1-t) ||grad f||_{L^p(w')}^t
//!
//! The change of variables phi(x) = x |x|^alpha turns the weighted problem
//! into an unweighted one up to explicit factors of (1+alpha); this crate
//! carries the map and its Jacobian structure, weighted quadrature, the
//! quotient functionals, bundled test fields, and the assembly of sharp
//! and radial-class constants, including the symmetry-breaking diagnostic
//! F(f_k) for alpha > 0.

// Validation guards are written as `!(x > 0.0)` on purpose: the negated form
// rejects NaN along with the out-of-range values, which `x <= 0.0` would let
// through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod field;
pub mod functionals;
pub mod maps;
pub mod optim;
pub mod quadrature;
pub mod testfns;

pub use constants::{
    a_alpha, estimate_m, estimate_m_with_start, radial_sharp_constant, sharp_constant,
    symmetry_scan, verify_theorems, ConstantEstimate, GridSettings, ScanEntry, SymmetryScan,
    TheoremItem, TheoremReport,
};
pub use error::{CknError, Result};
pub use field::{GradientKind, ScalarField, SupportHint};
pub use functionals::{
    ckn_quotient, interpolation_check, ratio_f, weighted_grad_norm, weighted_norm, CknParams,
    QuotientReport,
};
pub use maps::{
    analytic_eigen, atilde_apply, atilde_norm_sq, char_poly_residual, dphi_apply, dphi_matrix,
    inverse_phi, phi_map, Alpha, EigenSummary,
};
pub use optim::{maximize, OptimResult};
pub use quadrature::{
    integrate, integrate_many, make_angular_rule, make_angular_rule_3d, make_graded_radial_rule,
    make_radial_rule, sphere_area, AngularRule, ProductGrid, RadialRule,
};
pub use testfns::{compose_with_phi, make_bump, make_fk, make_radial, RadialKind, RadialShape};
