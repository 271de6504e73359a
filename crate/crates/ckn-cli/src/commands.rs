//! The five subcommands. Output assembly is single-threaded and ordered;
//! reports carry schema_version and the seed so downstream scripts can
//! reproduce a run byte for byte.

use std::fmt::Write as _;

use ckn_core::{
    analytic_eigen, char_poly_residual, dphi_matrix, estimate_m, radial_sharp_constant,
    sharp_constant, symmetry_scan, verify_theorems, Alpha, CknError, CknParams, ConstantEstimate,
    ProductGrid, SymmetryScan, TheoremReport,
};
use nalgebra::SymmetricEigen;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{
    Cli, CliError, Command, OutputFormat, RunConfig, EXIT_CHECK_FAILED, EXIT_OK, EXIT_RUNTIME,
};

pub fn run(cli: Cli) -> Result<u8, CliError> {
    let config = RunConfig::resolve(&cli)?;
    match cli.command {
        Command::EigCheck { inject_fault } => cmd_eig_check(&config, inject_fault),
        Command::SymmetryScan => cmd_symmetry_scan(&config),
        Command::SweepAlpha => cmd_sweep_alpha(&config),
        Command::Verify => cmd_verify(&config),
        Command::EstimateM => cmd_estimate_m(&config),
    }
}

/// Numeric errors during execution; config-shaped ones were caught at parse.
fn runtime(e: CknError) -> CliError {
    CliError::Runtime(e.to_string())
}

fn emit(config: &RunConfig, content: &str) -> Result<(), CliError> {
    match &config.out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

#[derive(Serialize)]
struct EigReport {
    schema_version: u32,
    seed: u64,
    samples: usize,
    dimension: usize,
    /// "sampled" over (-0.95, 3) unless alpha was set explicitly.
    alpha_mode: String,
    max_eigen_residual: f64,
    max_det_residual: f64,
    max_char_poly_residual: f64,
    eigen_tolerance: f64,
    char_poly_tolerance: f64,
    fault_injected: bool,
    passed: bool,
    worst_point: Vec<f64>,
    worst_alpha: f64,
}

fn cmd_eig_check(config: &RunConfig, inject_fault: bool) -> Result<u8, CliError> {
    const SAMPLES: usize = 200;
    const EIGEN_TOL: f64 = 1e-10;
    const CHAR_TOL: f64 = 1e-9;

    let n = config.params.n;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut max_eigen = 0.0_f64;
    let mut max_det = 0.0_f64;
    let mut max_char = 0.0_f64;
    let mut worst_point = vec![0.0; n];
    let mut worst_alpha = 0.0;

    for _ in 0..SAMPLES {
        let x = loop {
            let candidate: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            if candidate.iter().map(|v| v * v).sum::<f64>().sqrt() > 1e-3 {
                break candidate;
            }
        };
        let alpha = if config.alpha_explicit {
            config.params.alpha
        } else {
            Alpha::new(rng.random_range(-0.95..3.0)).expect("range above -1")
        };

        let summary = analytic_eigen(&x, alpha).map_err(runtime)?;
        let mut matrix = dphi_matrix(&x, alpha).map_err(runtime)?;
        if inject_fault {
            matrix[(0, 0)] += 1e-6;
        }

        let mut numeric: Vec<f64> = SymmetricEigen::new(matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        numeric.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        let mut analytic = vec![summary.lambda_tangential; n - 1];
        analytic.push(summary.lambda_radial);
        analytic.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        let eigen_residual = numeric
            .iter()
            .zip(&analytic)
            .map(|(num, ana)| (num - ana).abs() / ana.abs())
            .fold(0.0, f64::max);

        let det = matrix.clone().lu().determinant();
        let det_residual = (det - summary.jacobian_det).abs() / summary.jacobian_det.abs();

        let scale = analytic.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let lambda_probe = rng.random_range(-2.0 * scale..2.0 * scale);
        let mut shifted = matrix;
        for i in 0..n {
            shifted[(i, i)] -= lambda_probe;
        }
        let det_side = shifted.lu().determinant();
        let char_residual = char_poly_residual(&x, alpha, lambda_probe)
            .map_err(runtime)?
            .abs()
            / det_side.abs().max(1.0);

        if eigen_residual > max_eigen {
            max_eigen = eigen_residual;
            worst_point = x.clone();
            worst_alpha = alpha.value();
        }
        max_det = max_det.max(det_residual);
        max_char = max_char.max(char_residual);
    }

    let passed = max_eigen <= EIGEN_TOL && max_det <= EIGEN_TOL && max_char <= CHAR_TOL;
    let report = EigReport {
        schema_version: 1,
        seed: config.seed,
        samples: SAMPLES,
        dimension: n,
        alpha_mode: if config.alpha_explicit {
            format!("fixed at {}", config.params.alpha.value())
        } else {
            "sampled".into()
        },
        max_eigen_residual: max_eigen,
        max_det_residual: max_det,
        max_char_poly_residual: max_char,
        eigen_tolerance: EIGEN_TOL,
        char_poly_tolerance: CHAR_TOL,
        fault_injected: inject_fault,
        passed,
        worst_point,
        worst_alpha,
    };
    emit(config, &to_json(&report)?)?;
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Serialize)]
struct ScanReport<'a> {
    schema_version: u32,
    seed: u64,
    scan: &'a SymmetryScan,
}

fn scan_csv(scan: &SymmetryScan) -> String {
    let mut out = String::from("k,F,one_minus_F,k_sq_one_minus_F\n");
    for entry in &scan.entries {
        let one_minus = 1.0 - entry.f_value;
        let _ = writeln!(
            out,
            "{},{},{},{}",
            entry.k,
            entry.f_value,
            one_minus,
            (entry.k as f64) * (entry.k as f64) * one_minus
        );
    }
    let _ = writeln!(
        out,
        "limit,{},{},",
        scan.extrapolated_limit,
        1.0 - scan.extrapolated_limit
    );
    out
}

fn cmd_symmetry_scan(config: &RunConfig) -> Result<u8, CliError> {
    let angular = config
        .angular_rule
        .clone()
        .expect("n = 3 checked at resolve time");
    let grid = ProductGrid::new(config.radial_rule.clone(), angular).map_err(runtime)?;
    let scan = symmetry_scan(
        config.params.alpha,
        config.params.p,
        &config.scan_ks(),
        &grid,
    )
    .map_err(runtime)?;
    let content = match config.format {
        OutputFormat::Csv => scan_csv(&scan),
        OutputFormat::Json => to_json(&ScanReport {
            schema_version: 1,
            seed: config.seed,
            scan: &scan,
        })?,
    };
    emit(config, &content)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SweepRow {
    alpha: f64,
    radial_constant: f64,
    sharp_constant: f64,
    gap_ratio: f64,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    schema_version: u32,
    seed: u64,
    m_estimate: &'a ConstantEstimate,
    rows: &'a [SweepRow],
}

fn cmd_sweep_alpha(config: &RunConfig) -> Result<u8, CliError> {
    let grid =
        ProductGrid::radial_only(config.radial_rule.clone(), config.params.n).map_err(runtime)?;
    // One shared M per (n, p, s, t); the weight does not enter the estimate.
    let estimate = estimate_m(&config.params, config.family, &grid).map_err(runtime)?;
    if !estimate.converged {
        return Err(CliError::Runtime(format!(
            "profile optimization did not converge after {} iterations",
            estimate.iterations
        )));
    }

    let mut rows = Vec::with_capacity(config.alphas.len());
    for alpha in &config.alphas {
        let params = CknParams::new(
            config.params.n,
            config.params.p,
            config.params.s,
            config.params.t,
            *alpha,
        )
        .map_err(runtime)?;
        let radial = radial_sharp_constant(&params, estimate.value).map_err(runtime)?;
        let sharp = sharp_constant(&params, estimate.value).map_err(runtime)?;
        rows.push(SweepRow {
            alpha: alpha.value(),
            radial_constant: radial,
            sharp_constant: sharp,
            gap_ratio: sharp / radial,
        });
    }

    let content = match config.format {
        OutputFormat::Csv => {
            let mut out = String::from("alpha,radial_constant,sharp_constant,gap_ratio\n");
            for row in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    row.alpha, row.radial_constant, row.sharp_constant, row.gap_ratio
                );
            }
            out
        }
        OutputFormat::Json => to_json(&SweepReport {
            schema_version: 1,
            seed: config.seed,
            m_estimate: &estimate,
            rows: &rows,
        })?,
    };
    emit(config, &content)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    schema_version: u32,
    seed: u64,
    report: &'a TheoremReport,
}

fn cmd_verify(config: &RunConfig) -> Result<u8, CliError> {
    let grid = match &config.angular_rule {
        Some(angular) => {
            ProductGrid::new(config.radial_rule.clone(), angular.clone()).map_err(runtime)?
        }
        None => ProductGrid::radial_only(config.radial_rule.clone(), config.params.n)
            .map_err(runtime)?,
    };
    let report = verify_theorems(&config.params, &grid).map_err(|e| match e {
        CknError::InvalidArgument(_) | CknError::UnsupportedParameters(_) => {
            CliError::Usage(e.to_string())
        }
        other => runtime(other),
    })?;
    emit(
        config,
        &to_json(&VerifyReport {
            schema_version: 1,
            seed: config.seed,
            report: &report,
        })?,
    )?;
    Ok(if report.all_passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

#[derive(Serialize)]
struct EstimateReport<'a> {
    schema_version: u32,
    seed: u64,
    estimate: &'a ConstantEstimate,
}

fn cmd_estimate_m(config: &RunConfig) -> Result<u8, CliError> {
    let grid =
        ProductGrid::radial_only(config.radial_rule.clone(), config.params.n).map_err(runtime)?;
    let estimate = estimate_m(&config.params, config.family, &grid).map_err(|e| match e {
        CknError::UnsupportedParameters(_) => CliError::Usage(e.to_string()),
        other => runtime(other),
    })?;
    emit(
        config,
        &to_json(&EstimateReport {
            schema_version: 1,
            seed: config.seed,
            estimate: &estimate,
        })?,
    )?;
    Ok(if estimate.converged {
        EXIT_OK
    } else {
        EXIT_RUNTIME
    })
}
