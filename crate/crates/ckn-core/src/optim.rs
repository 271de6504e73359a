//! Derivative-free simplex maximizer (Nelder-Mead) for the constant
//! estimates. The objective is evaluated as-is; non-finite values are
//! treated as negative infinity so the simplex backs away from invalid
//! parameter regions.

/// Outcome of a simplex run. `trace` holds the best value after each
/// iteration; `converged` means the final simplex value spread fell below
/// the relative tolerance.
#[derive(Debug, Clone)]
pub struct OptimResult {
    pub best: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

/// Maximizes `objective` from `start` with an axis-aligned initial simplex
/// of the given `step`. Standard coefficients: reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2.
pub fn maximize<F>(
    objective: F,
    start: &[f64],
    step: f64,
    max_iterations: usize,
    tol: f64,
) -> OptimResult
where
    F: Fn(&[f64]) -> f64,
{
    let dim = start.len();
    assert!(dim >= 1, "optimizer needs at least one parameter");
    let eval = |x: &[f64]| -> f64 {
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..max_iterations {
        iterations += 1;

        // Order best-first.
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let revalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = reordered;
        values = revalues;

        trace.push(values[0]);
        let spread = values[0] - values[dim];
        if spread.is_finite() && spread <= tol * values[0].abs().max(1.0) {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for vertex in simplex.iter().take(dim) {
            for (c, v) in centroid.iter_mut().zip(vertex) {
                *c += v / dim as f64;
            }
        }

        let blend = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = blend(1.0);
        let fr = eval(&reflected);
        if fr > values[0] {
            let expanded = blend(2.0);
            let fe = eval(&expanded);
            if fe > fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
            continue;
        }
        if fr > values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
            continue;
        }
        let contracted = if fr > values[dim] {
            blend(0.5)
        } else {
            blend(-0.5)
        };
        let fc = eval(&contracted);
        if fc > values[dim].max(fr) {
            simplex[dim] = contracted;
            values[dim] = fc;
            continue;
        }
        // Shrink toward the best vertex.
        for i in 1..=dim {
            let shrunk: Vec<f64> = simplex[0]
                .iter()
                .zip(&simplex[i])
                .map(|(b, v)| b + 0.5 * (v - b))
                .collect();
            values[i] = eval(&shrunk);
            simplex[i] = shrunk;
        }
    }

    let mut best_idx = 0;
    for i in 1..=dim {
        if values[i] > values[best_idx] {
            best_idx = i;
        }
    }
    OptimResult {
        best: simplex[best_idx].clone(),
        value: values[best_idx],
        iterations,
        converged,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn finds_quadratic_maximum() {
        let res = maximize(
            |x: &[f64]| -(x[0] - 2.0).powi(2) - (x[1] + 1.0).powi(2) + 5.0,
            &[0.0, 0.0],
            0.5,
            500,
            1e-12,
        );
        assert!(res.converged);
        assert_relative_eq!(res.best[0], 2.0, epsilon = 1e-5);
        assert_relative_eq!(res.best[1], -1.0, epsilon = 1e-5);
        assert_relative_eq!(res.value, 5.0, epsilon = 1e-9);
        // Trace never decreases.
        for w in res.trace.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn one_dimensional_and_flat_objectives() {
        let res = maximize(|x: &[f64]| -(x[0] - 0.3).powi(2), &[5.0], 1.0, 500, 1e-12);
        assert!(res.converged);
        assert_relative_eq!(res.best[0], 0.3, epsilon = 1e-5);

        let flat = maximize(|_: &[f64]| 7.0, &[1.0, 2.0], 0.5, 100, 1e-10);
        assert!(flat.converged);
        assert_eq!(flat.value, 7.0);
        assert_eq!(flat.iterations, 1);
    }

    #[test]
    fn invalid_regions_are_avoided() {
        // Objective defined only for x > 0; NaN elsewhere.
        let res = maximize(
            |x: &[f64]| {
                if x[0] <= 0.0 {
                    f64::NAN
                } else {
                    -(x[0].ln() - 1.0).powi(2)
                }
            },
            &[0.5],
            2.0,
            500,
            1e-12,
        );
        assert!(res.converged);
        assert_relative_eq!(res.best[0], std::f64::consts::E, max_relative = 1e-4);
    }

    #[test]
    fn iteration_cap_flags_non_convergence() {
        let res = maximize(
            |x: &[f64]| -(x[0] - 2.0).powi(2) - (x[1] + 1.0).powi(2),
            &[40.0, 40.0],
            0.1,
            3,
            1e-14,
        );
        assert!(!res.converged);
        assert_eq!(res.iterations, 3);
    }
}
