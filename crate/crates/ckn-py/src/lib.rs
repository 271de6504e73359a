//! Python bindings: thin wrappers over the core types plus free functions
//! for the map, the contraction, quotients, and constant assembly.

use std::str::FromStr;
use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ckn_core::{
    a_alpha, analytic_eigen, char_poly_residual, ckn_quotient, compose_with_phi, estimate_m,
    interpolation_check, inverse_phi, make_angular_rule, make_angular_rule_3d, make_bump, make_fk,
    make_graded_radial_rule, make_radial, make_radial_rule, phi_map, radial_sharp_constant,
    ratio_f, sharp_constant, symmetry_scan, Alpha, CknError, CknParams, ProductGrid, RadialKind,
    RadialShape, ScalarField, SupportHint,
};

fn err(e: CknError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_alpha(a: f64) -> PyResult<Alpha> {
    Alpha::new(a).map_err(err)
}

/// Inequality parameters (n, p, s, t, alpha) with the derived exponent r.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Params {
    inner: CknParams,
}

#[pymethods]
impl Params {
    #[new]
    fn new(n: usize, p: f64, s: f64, t: f64, alpha: f64) -> PyResult<Self> {
        let inner = CknParams::new(n, p, s, t, parse_alpha(alpha)?).map_err(err)?;
        Ok(Params { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p
    }

    #[getter]
    fn s(&self) -> f64 {
        self.inner.s
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.t
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha.value()
    }

    #[getter]
    fn r(&self) -> f64 {
        self.inner.r()
    }

    #[getter]
    fn sobolev_exponent(&self) -> f64 {
        self.inner.sobolev_exponent()
    }

    fn __repr__(&self) -> String {
        format!(
            "Params(n={}, p={}, s={}, t={}, alpha={}, r={})",
            self.inner.n,
            self.inner.p,
            self.inner.s,
            self.inner.t,
            self.inner.alpha.value(),
            self.inner.r()
        )
    }
}

/// Quadrature grid: a radial rule, optionally crossed with an angular rule.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Grid {
    inner: ProductGrid,
}

#[pymethods]
impl Grid {
    /// Radial-only grid with equal panels; integrands are assumed radial.
    #[staticmethod]
    fn radial(r_max: f64, panels: usize, points: usize, n: usize) -> PyResult<Self> {
        let rule = make_radial_rule(r_max, panels, points).map_err(err)?;
        Ok(Grid {
            inner: ProductGrid::radial_only(rule, n).map_err(err)?,
        })
    }

    /// Radial-only grid with power-law panel grading toward the origin.
    #[staticmethod]
    fn graded(r_max: f64, panels: usize, points: usize, grading: f64, n: usize) -> PyResult<Self> {
        let rule = make_graded_radial_rule(r_max, panels, points, grading).map_err(err)?;
        Ok(Grid {
            inner: ProductGrid::radial_only(rule, n).map_err(err)?,
        })
    }

    /// Full n = 3 product grid: equal radial panels times a sphere rule
    /// with `theta` azimuthal and `phi` polar nodes.
    #[staticmethod]
    fn product(
        r_max: f64,
        panels: usize,
        points: usize,
        theta: usize,
        phi: usize,
    ) -> PyResult<Self> {
        let radial = make_radial_rule(r_max, panels, points).map_err(err)?;
        let angular = make_angular_rule_3d(theta, phi).map_err(err)?;
        Ok(Grid {
            inner: ProductGrid::new(radial, angular).map_err(err)?,
        })
    }

    /// Full n = 2 product grid with a trapezoidal circle rule.
    #[staticmethod]
    fn product_2d(r_max: f64, panels: usize, points: usize, nodes: usize) -> PyResult<Self> {
        let radial = make_radial_rule(r_max, panels, points).map_err(err)?;
        let angular = make_angular_rule(2, nodes).map_err(err)?;
        Ok(Grid {
            inner: ProductGrid::new(radial, angular).map_err(err)?,
        })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension
    }

    #[getter]
    fn r_max(&self) -> f64 {
        self.inner.radial.r_max
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(dimension={}, r_max={}, nodes={})",
            self.inner.dimension,
            self.inner.radial.r_max,
            self.inner.node_count()
        )
    }
}

/// Scalar field with an analytic gradient.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Field {
    inner: ScalarField,
}

#[pymethods]
impl Field {
    /// Radial profile field: kind is "gaussian", "gns-power", or
    /// "sobolev-extremal"; gamma and lam are the shape parameters.
    #[staticmethod]
    #[pyo3(signature = (kind, gamma, lam, n=3, p=2.0))]
    fn radial(kind: &str, gamma: f64, lam: f64, n: usize, p: f64) -> PyResult<Self> {
        let kind = RadialKind::from_str(kind).map_err(err)?;
        let shape = RadialShape::new(gamma, lam).map_err(err)?;
        Ok(Field {
            inner: make_radial(kind, shape, n, p).map_err(err)?,
        })
    }

    /// Symmetry-breaking field f_k = h(r) sin(phi) cos(k theta) in n = 3.
    #[staticmethod]
    fn fk(k: u32) -> PyResult<Self> {
        Ok(Field {
            inner: make_fk(k).map_err(err)?,
        })
    }

    /// The radial bump h supported on [1, 4], lifted to a field on R^n.
    #[staticmethod]
    #[pyo3(signature = (n=3))]
    fn bump(n: usize) -> PyResult<Self> {
        if n < 2 {
            return Err(PyValueError::new_err("need n >= 2"));
        }
        let h = make_bump();
        let hd = h;
        Ok(Field {
            inner: ScalarField::radial(
                n,
                Arc::new(move |r| h.value(r)),
                Arc::new(move |r| hd.derivative(r)),
                SupportHint::Compact {
                    r_lo: 1.0,
                    r_hi: 4.0,
                },
            ),
        })
    }

    /// The pullback f(phi(x)) with phi(x) = x |x|^alpha.
    fn compose(&self, alpha: f64) -> PyResult<Self> {
        Ok(Field {
            inner: compose_with_phi(&self.inner, parse_alpha(alpha)?),
        })
    }

    fn value(&self, x: Vec<f64>) -> f64 {
        self.inner.value(&x)
    }

    fn gradient(&self, x: Vec<f64>) -> Vec<f64> {
        self.inner.gradient(&x)
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn is_radial(&self) -> bool {
        self.inner.is_radial()
    }
}

#[pyfunction]
#[pyo3(name = "phi_map")]
fn py_phi_map(x: Vec<f64>, alpha: f64) -> PyResult<Vec<f64>> {
    phi_map(&x, parse_alpha(alpha)?).map_err(err)
}

#[pyfunction]
#[pyo3(name = "inverse_phi")]
fn py_inverse_phi(y: Vec<f64>, alpha: f64) -> PyResult<Vec<f64>> {
    inverse_phi(&y, parse_alpha(alpha)?).map_err(err)
}

/// (lambda_radial, lambda_tangential, jacobian_det) of Dphi at x.
#[pyfunction]
#[pyo3(name = "eigen")]
fn py_eigen(x: Vec<f64>, alpha: f64) -> PyResult<(f64, f64, f64)> {
    let s = analytic_eigen(&x, parse_alpha(alpha)?).map_err(err)?;
    Ok((s.lambda_radial, s.lambda_tangential, s.jacobian_det))
}

#[pyfunction]
#[pyo3(name = "char_poly_residual")]
fn py_char_poly_residual(x: Vec<f64>, alpha: f64, lam: f64) -> PyResult<f64> {
    char_poly_residual(&x, parse_alpha(alpha)?, lam).map_err(err)
}

/// (||f||_{q,beta}) = (integral |f|^q |x|^beta dx)^(1/q).
#[pyfunction]
#[pyo3(name = "weighted_norm")]
fn py_weighted_norm(field: &Field, q: f64, beta: f64, grid: &Grid) -> PyResult<f64> {
    ckn_core::weighted_norm(&field.inner, q, beta, &grid.inner).map_err(err)
}

#[pyfunction]
#[pyo3(name = "weighted_grad_norm")]
fn py_weighted_grad_norm(field: &Field, p: f64, beta: f64, grid: &Grid) -> PyResult<f64> {
    ckn_core::weighted_grad_norm(&field.inner, p, beta, &grid.inner).map_err(err)
}

/// dict with lhs_norm, s_norm, grad_norm, quotient.
#[pyfunction]
#[pyo3(name = "ckn_quotient")]
fn py_ckn_quotient<'py>(
    py: Python<'py>,
    field: &Field,
    params: &Params,
    grid: &Grid,
) -> PyResult<Bound<'py, PyDict>> {
    let report = ckn_quotient(&field.inner, &params.inner, &grid.inner).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("lhs_norm", report.lhs_norm)?;
    out.set_item("s_norm", report.s_norm)?;
    out.set_item("grad_norm", report.grad_norm)?;
    out.set_item("quotient", report.quotient)?;
    Ok(out)
}

/// The anisotropy ratio F(f) in [min(1, (1+a)^-p), max(1, (1+a)^-p)].
#[pyfunction]
#[pyo3(name = "ratio_f")]
fn py_ratio_f(field: &Field, params: &Params, grid: &Grid) -> PyResult<f64> {
    ratio_f(&field.inner, &params.inner, &grid.inner).map_err(err)
}

/// (lhs, rhs, holds) for ||f||_r <= ||f||_s^(1-t) ||f||_{np/(n-p)}^t.
#[pyfunction]
#[pyo3(name = "interpolation_check")]
fn py_interpolation_check(
    field: &Field,
    params: &Params,
    grid: &Grid,
) -> PyResult<(f64, f64, bool)> {
    let report = interpolation_check(&field.inner, &params.inner, &grid.inner).map_err(err)?;
    Ok((report.lhs, report.rhs, report.holds))
}

/// dict with value, gamma, lam, iterations, converged, reference_value.
#[pyfunction]
#[pyo3(name = "estimate_m", signature = (params, grid, family="gns-power"))]
fn py_estimate_m<'py>(
    py: Python<'py>,
    params: &Params,
    grid: &Grid,
    family: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let family = RadialKind::from_str(family).map_err(err)?;
    let est = estimate_m(&params.inner, family, &grid.inner).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("value", est.value)?;
    out.set_item("gamma", est.optimizer_params.gamma)?;
    out.set_item("lam", est.optimizer_params.lambda)?;
    out.set_item("iterations", est.iterations)?;
    out.set_item("converged", est.converged)?;
    out.set_item("reference_value", est.reference_value)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(name = "a_alpha")]
fn py_a_alpha(alpha: f64, t: f64) -> PyResult<f64> {
    Ok(a_alpha(parse_alpha(alpha)?, t))
}

#[pyfunction]
#[pyo3(name = "sharp_constant")]
fn py_sharp_constant(params: &Params, m: f64) -> PyResult<f64> {
    sharp_constant(&params.inner, m).map_err(err)
}

#[pyfunction]
#[pyo3(name = "radial_sharp_constant")]
fn py_radial_sharp_constant(params: &Params, m: f64) -> PyResult<f64> {
    radial_sharp_constant(&params.inner, m).map_err(err)
}

/// dict with ks, f_values, limit for the F(f_k) scan.
#[pyfunction]
#[pyo3(name = "symmetry_scan")]
fn py_symmetry_scan<'py>(
    py: Python<'py>,
    alpha: f64,
    p: f64,
    ks: Vec<u32>,
    grid: &Grid,
) -> PyResult<Bound<'py, PyDict>> {
    let scan = symmetry_scan(parse_alpha(alpha)?, p, &ks, &grid.inner).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("ks", scan.entries.iter().map(|e| e.k).collect::<Vec<_>>())?;
    out.set_item(
        "f_values",
        scan.entries.iter().map(|e| e.f_value).collect::<Vec<_>>(),
    )?;
    out.set_item("limit", scan.extrapolated_limit)?;
    Ok(out)
}

#[pymodule]
fn cknlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Params>()?;
    m.add_class::<Grid>()?;
    m.add_class::<Field>()?;
    m.add_function(wrap_pyfunction!(py_phi_map, m)?)?;
    m.add_function(wrap_pyfunction!(py_inverse_phi, m)?)?;
    m.add_function(wrap_pyfunction!(py_eigen, m)?)?;
    m.add_function(wrap_pyfunction!(py_char_poly_residual, m)?)?;
    m.add_function(wrap_pyfunction!(py_weighted_norm, m)?)?;
    m.add_function(wrap_pyfunction!(py_weighted_grad_norm, m)?)?;
    m.add_function(wrap_pyfunction!(py_ckn_quotient, m)?)?;
    m.add_function(wrap_pyfunction!(py_ratio_f, m)?)?;
    m.add_function(wrap_pyfunction!(py_interpolation_check, m)?)?;
    m.add_function(wrap_pyfunction!(py_estimate_m, m)?)?;
    m.add_function(wrap_pyfunction!(py_a_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(py_sharp_constant, m)?)?;
    m.add_function(wrap_pyfunction!(py_radial_sharp_constant, m)?)?;
    m.add_function(wrap_pyfunction!(py_symmetry_scan, m)?)?;
    Ok(())
}
