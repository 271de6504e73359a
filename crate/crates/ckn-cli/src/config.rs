//! Flag and config-file handling. Precedence: command-line flags override
//! config-file values, which override built-in defaults. Every parameter is
//! re-validated here so mistakes surface as usage errors before any
//! computation starts.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ckn_core::{
    make_angular_rule, make_angular_rule_3d, make_radial_rule, Alpha, AngularRule, CknParams,
    RadialKind, RadialRule,
};
use clap::{Parser, Subcommand};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config file, or invalid parameter combinations.
    Usage(String),
    /// Numerical failure while executing a well-formed request.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("io error: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "ckn",
    version,
    about = "Numerical checks for a weighted interpolation inequality",
    after_help = "Precedence: flags override --config file values, which override defaults.\n\
                  Config file format: one key=value per line, '#' comments; keys match the long flags."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Dimension n >= 2 [default: 3]
    #[arg(long, global = true)]
    pub n: Option<usize>,

    /// Gradient exponent p with 1 <= p < n [default: 2]
    #[arg(long, global = true)]
    pub p: Option<f64>,

    /// Interpolation norm exponent s >= 1 [default: 2]
    #[arg(long, global = true)]
    pub s: Option<f64>,

    /// Interpolation parameter t in [0, 1] [default: 0.5]
    #[arg(long, global = true)]
    pub t: Option<f64>,

    /// Weight power alpha > -1; sweep-alpha accepts a comma-separated list [default: 1]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<String>,

    /// Radial truncation radius [default: 40]
    #[arg(long = "r-max", global = true)]
    pub r_max: Option<f64>,

    /// Number of radial quadrature panels [default: 64]
    #[arg(long = "radial-panels", global = true)]
    pub radial_panels: Option<usize>,

    /// Gauss-Legendre points per radial panel [default: 8]
    #[arg(long = "radial-points", global = true)]
    pub radial_points: Option<usize>,

    /// Azimuthal resolution of the angular rule [default: 128]
    #[arg(long = "ang-theta", global = true)]
    pub ang_theta: Option<usize>,

    /// Polar resolution of the angular rule (n = 3) [default: 64]
    #[arg(long = "ang-phi", global = true)]
    pub ang_phi: Option<usize>,

    /// Largest k in the symmetry scan; k doubles from 1 [default: 32]
    #[arg(long = "k-max", global = true)]
    pub k_max: Option<u32>,

    /// Radial profile family: gns-power | gaussian | sobolev-extremal [default: gns-power]
    #[arg(long, global = true)]
    pub family: Option<String>,

    /// Output file; standard output when omitted
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format: json | csv (csv only for symmetry-scan and sweep-alpha) [default: json]
    #[arg(long, global = true)]
    pub format: Option<String>,

    /// Seed for random test-point sampling [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Config file with key=value lines mirroring the long flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compare the analytic eigenstructure of Dphi with a numeric eigensolver
    EigCheck {
        /// Perturb one matrix entry by 1e-6 to confirm the check trips
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Tabulate the anisotropy ratio F(f_k) for doubling k and extrapolate the limit
    SymmetryScan,
    /// Tabulate radial-class and sharp constants over a list of alpha values
    SweepAlpha,
    /// Run the theorem-level verification and report JSON
    Verify,
    /// Estimate the unweighted interpolation constant M over a profile family
    EstimateM,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Fully resolved and validated settings for one command invocation.
#[derive(Debug)]
pub struct RunConfig {
    pub params: CknParams,
    /// All requested alpha values; more than one only for sweep-alpha.
    pub alphas: Vec<Alpha>,
    /// Whether alpha came from a flag or file rather than the default
    /// (eig-check samples alpha unless it was set explicitly).
    pub alpha_explicit: bool,
    pub radial_rule: RadialRule,
    pub angular_rule: Option<AngularRule>,
    pub k_max: u32,
    pub family: RadialKind,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub seed: u64,
}

const CONFIG_KEYS: &[&str] = &[
    "n",
    "p",
    "s",
    "t",
    "alpha",
    "r-max",
    "radial-panels",
    "radial-points",
    "ang-theta",
    "ang-phi",
    "k-max",
    "family",
    "out",
    "format",
    "seed",
];

fn parse_config_file(path: &PathBuf) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config line {}: expected key=value, got '{raw}'",
                idx + 1
            ))
        })?;
        let key = key.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(CliError::Usage(format!(
                "config line {}: unknown key '{key}'",
                idx + 1
            )));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Flag value, else file value, else default; parse failures name the key.
fn pick<T: FromStr + Clone>(
    flag: &Option<T>,
    file: Option<&String>,
    default: T,
    key: &str,
) -> Result<T, CliError>
where
    <T as FromStr>::Err: fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v.clone());
    }
    match file {
        Some(raw) => raw
            .parse::<T>()
            .map_err(|e| CliError::Usage(format!("config key '{key}': {e} (got '{raw}')"))),
        None => Ok(default),
    }
}

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
        let file = match &cli.config {
            Some(path) => parse_config_file(path)?,
            None => HashMap::new(),
        };
        let get = |key: &str| file.get(key);

        let n = pick(&cli.n, get("n"), 3, "n")?;
        let p = pick(&cli.p, get("p"), 2.0, "p")?;
        let s = pick(&cli.s, get("s"), 2.0, "s")?;
        let t = pick(&cli.t, get("t"), 0.5, "t")?;
        let alpha_raw = pick(&cli.alpha, get("alpha"), "1".to_string(), "alpha")?;
        let alpha_explicit = cli.alpha.is_some() || file.contains_key("alpha");
        let r_max = pick(&cli.r_max, get("r-max"), 40.0, "r-max")?;
        let radial_panels = pick(
            &cli.radial_panels,
            get("radial-panels"),
            64,
            "radial-panels",
        )?;
        let radial_points = pick(&cli.radial_points, get("radial-points"), 8, "radial-points")?;
        let ang_theta = pick(&cli.ang_theta, get("ang-theta"), 128, "ang-theta")?;
        let ang_phi = pick(&cli.ang_phi, get("ang-phi"), 64, "ang-phi")?;
        let k_max = pick(&cli.k_max, get("k-max"), 32, "k-max")?;
        let family_raw = pick(
            &cli.family,
            get("family"),
            "gns-power".to_string(),
            "family",
        )?;
        let out = match (&cli.out, get("out")) {
            (Some(path), _) => Some(path.clone()),
            (None, Some(path)) => Some(PathBuf::from(path)),
            (None, None) => None,
        };
        let format_raw = pick(&cli.format, get("format"), "json".to_string(), "format")?;
        let seed = pick(&cli.seed, get("seed"), 42, "seed")?;

        let mut alphas = Vec::new();
        for piece in alpha_raw.split(',') {
            let piece = piece.trim();
            let value: f64 = piece
                .parse()
                .map_err(|_| CliError::Usage(format!("alpha: '{piece}' is not a number")))?;
            alphas.push(Alpha::new(value).map_err(usage)?);
        }
        if alphas.len() > 1 && !matches!(cli.command, Command::SweepAlpha) {
            return Err(CliError::Usage(
                "an alpha list is only accepted by sweep-alpha".into(),
            ));
        }

        // Re-validate the full parameter set once per requested alpha.
        for a in &alphas {
            CknParams::new(n, p, s, t, *a).map_err(usage)?;
        }
        let params = CknParams::new(n, p, s, t, alphas[0]).map_err(usage)?;

        let family = RadialKind::from_str(&family_raw).map_err(usage)?;
        let format = match format_raw.as_str() {
            "json" => OutputFormat::Json,
            "csv" => OutputFormat::Csv,
            other => {
                return Err(CliError::Usage(format!(
                    "format must be 'json' or 'csv', got '{other}'"
                )))
            }
        };
        if format == OutputFormat::Csv
            && !matches!(cli.command, Command::SymmetryScan | Command::SweepAlpha)
        {
            return Err(CliError::Usage(
                "csv output is only available for symmetry-scan and sweep-alpha; use --format json"
                    .into(),
            ));
        }

        let radial_rule = make_radial_rule(r_max, radial_panels, radial_points).map_err(usage)?;
        let angular_rule = match n {
            2 => Some(make_angular_rule(2, ang_theta).map_err(usage)?),
            3 => Some(make_angular_rule_3d(ang_theta, ang_phi).map_err(usage)?),
            _ => None,
        };

        if matches!(cli.command, Command::SymmetryScan) {
            if k_max < 1 {
                return Err(CliError::Usage("k-max must be at least 1".into()));
            }
            if n != 3 {
                return Err(CliError::Usage(
                    "symmetry-scan uses the n = 3 shell family; pass --n 3".into(),
                ));
            }
            if ang_theta <= 2 * k_max as usize {
                return Err(CliError::Usage(format!(
                    "ang-theta = {ang_theta} cannot resolve k-max = {k_max}; need ang-theta > {}",
                    2 * k_max
                )));
            }
        }

        Ok(RunConfig {
            params,
            alphas,
            alpha_explicit,
            radial_rule,
            angular_rule,
            k_max,
            family,
            out,
            format,
            seed,
        })
    }

    /// k values for the scan: doubling from 1 up to k_max.
    pub fn scan_ks(&self) -> Vec<u32> {
        let mut ks = Vec::new();
        let mut k = 1_u32;
        while k <= self.k_max {
            ks.push(k);
            match k.checked_mul(2) {
                Some(next) => k = next,
                None => break,
            }
        }
        ks
    }
}
