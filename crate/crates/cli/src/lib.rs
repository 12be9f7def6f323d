//! Command-line front end: config handling, orchestration and CSV output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use erkn_wave::analysis::{
    check_filter_bounds, convergence_study, reference_solution_with, ReferencePolicy, StudyReport,
    XiGrid,
};
use erkn_wave::config::{ConfigError, ExperimentConfig};
use erkn_wave::field::PairNorm;
use erkn_wave::integrators::{scheme_by_id, scheme_registry, ErknScheme, Stepper};
use erkn_wave::probes::{run_property_probe, ProbeSetup};
use erkn_wave::problem::{make_initial_state, make_problem, PRNG_NAME};
use sha2::{Digest, Sha256};

/// `β` values used by the `filters` subcommand.
pub const FILTER_BETAS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
/// Largest accepted `|||ref(h) - ref(h/2)|||_0` in `reference-check`.
pub const REFERENCE_TOL: f64 = 1e-9;

pub const CONVERGE_HEADER: &str =
    "scheme,alpha,h,n_steps,err_y,err_ydot,fit_order_y,fit_order_ydot,seed,prng,K,p,s,discretization";
pub const FILTERS_HEADER: &str = "scheme,beta,equation,measured_c,grid_min,grid_max,grid_points";
pub const PROPS_HEADER: &str =
    "scheme,declared_symmetric,measured_symmetric,symmetry_defect,symmetry_order,\
declared_symplectic,measured_symplectic,symplectic_defect,coupled_symplectic_defect,pass";
pub const REFERENCE_HEADER: &str = "h_ref,n_steps,self_consistency,initial_norm,max_norm,pass";

#[derive(Debug, Parser)]
#[command(
    name = "erkn-wave",
    version,
    about = "ERKN integrators for the semilinear wave equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Config file (`key = value` lines); defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted and the config sets none.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Scheme id; repeat to select several. Overrides the config list.
    #[arg(long = "scheme", global = true)]
    pub schemes: Vec<String>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, env = "ERKN_WAVE_THREADS", default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Convergence study: errors and fitted orders per scheme, alpha and h.
    Converge,
    /// Filter-function constants per scheme and beta.
    Filters,
    /// Symmetry and symplecticity probes against the declared flags.
    Props,
    /// Self-consistency and boundedness of the reference trajectory.
    ReferenceCheck,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("{0}")]
    ProbeMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numeric(_) => 2,
            CliError::ProbeMismatch(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn numeric(e: erkn_wave::Error) -> CliError {
    match e {
        erkn_wave::Error::UnknownScheme(_) => CliError::Config(e.to_string()),
        other => CliError::Numeric(other.to_string()),
    }
}

/// Resolved inputs of one invocation.
///
/// `config` holds everything the output depends on, so its hash identifies
/// the output.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: ExperimentConfig,
    pub output: Option<PathBuf>,
}

impl Invocation {
    /// `filters` and `props` default to the whole registry when neither
    /// `--scheme` nor a config file names the schemes.
    pub fn resolve(command: Command, common: &CommonArgs) -> Result<Self, CliError> {
        let (mut config, from_file) = match &common.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                (ExperimentConfig::parse(&text)?, true)
            }
            None => (ExperimentConfig::default(), false),
        };
        if !common.schemes.is_empty() {
            for id in &common.schemes {
                scheme_by_id(id).map_err(|e| CliError::Config(format!("--scheme: {e}")))?;
            }
            config.schemes = common.schemes.clone();
        } else if !from_file && matches!(command, Command::Filters | Command::Props) {
            config.schemes = scheme_registry()
                .iter()
                .map(|s| s.id().to_string())
                .collect();
        }
        let output = common
            .output
            .clone()
            .or_else(|| config.output.as_ref().map(PathBuf::from));
        config.output = None;
        Ok(Self {
            command,
            config,
            output,
        })
    }

    pub fn schemes(&self) -> Vec<ErknScheme> {
        self.config
            .schemes
            .iter()
            .map(|id| scheme_by_id(id).expect("validated"))
            .collect()
    }

    /// Leading comment line identifying the inputs of an output file.
    pub fn provenance(&self) -> String {
        let name = command_name(self.command);
        let mut hasher = Sha256::new();
        hasher.update(name.as_bytes());
        hasher.update(b"\n");
        hasher.update(self.config.to_text().as_bytes());
        let digest: String = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        format!(
            "# command={name} config_sha256={digest} prng={PRNG_NAME} seed={}",
            self.config.seed
        )
    }
}

pub fn command_name(command: Command) -> &'static str {
    match command {
        Command::Converge => "converge",
        Command::Filters => "filters",
        Command::Props => "props",
        Command::ReferenceCheck => "reference-check",
    }
}

/// Round-trip-safe float: 17 significant digits, `inf`/`nan` for non-finite values.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn converge_csv(report: &StudyReport, cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CONVERGE_HEADER}");
    for curve in &report.curves {
        for s in &curve.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                curve.scheme,
                fmt_float(curve.alpha),
                fmt_float(s.h),
                s.n_steps,
                fmt_float(s.err_y),
                fmt_float(s.err_ydot),
                fmt_float(curve.fitted_order_y),
                fmt_float(curve.fitted_order_ydot),
                cfg.seed,
                PRNG_NAME,
                cfg.k,
                cfg.p,
                fmt_float(cfg.s),
                cfg.discretization.as_str(),
            );
        }
    }
    out
}

pub fn filters_csv(schemes: &[ErknScheme], grid: &XiGrid) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{FILTERS_HEADER}");
    for scheme in schemes {
        for r in check_filter_bounds(scheme, &FILTER_BETAS, grid) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.scheme,
                fmt_float(r.beta),
                r.bound.as_str(),
                fmt_float(r.measured_c),
                fmt_float(r.grid.min),
                fmt_float(r.grid.max),
                r.grid.points,
            );
        }
    }
    out
}

/// Output of a subcommand: CSV body and the failed gate, if any.
#[derive(Debug)]
pub struct Outcome {
    pub body: String,
    pub failure: Option<CliError>,
}

fn ok(body: String) -> Outcome {
    Outcome {
        body,
        failure: None,
    }
}

pub fn run_converge(inv: &Invocation) -> Result<Outcome, CliError> {
    let report = convergence_study(&inv.config).map_err(numeric)?;
    Ok(ok(converge_csv(&report, &inv.config)))
}

pub fn run_filters(inv: &Invocation) -> Result<Outcome, CliError> {
    Ok(ok(filters_csv(&inv.schemes(), &XiGrid::default())))
}

pub fn run_props(inv: &Invocation) -> Result<Outcome, CliError> {
    let setup = ProbeSetup::default();
    let mut body = String::new();
    let _ = writeln!(body, "{PROPS_HEADER}");
    let mut mismatched = Vec::new();
    for scheme in inv.schemes() {
        let r = run_property_probe(&scheme, &setup).map_err(numeric)?;
        if !r.passes() {
            mismatched.push(r.scheme.clone());
        }
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{},{},{},{}",
            r.scheme,
            r.declared_symmetric,
            r.measured_symmetric(),
            fmt_float(r.symmetry_defect),
            fmt_float(r.symmetry_order),
            r.declared_symplectic,
            r.measured_symplectic(),
            fmt_float(r.symplectic_defect),
            fmt_float(r.coupled_symplectic_defect),
            r.passes(),
        );
    }
    let failure = (!mismatched.is_empty()).then(|| {
        CliError::ProbeMismatch(format!(
            "probe classification differs from flags: {}",
            mismatched.join(", ")
        ))
    });
    Ok(Outcome { body, failure })
}

pub fn run_reference_check(inv: &Invocation) -> Result<Outcome, CliError> {
    let cfg = &inv.config;
    let prob = make_problem(cfg.discretization, cfg.k, cfg.p).map_err(numeric)?;
    let st0 = make_initial_state(&prob, &cfg.initial_data()).map_err(numeric)?;
    let policy = ReferencePolicy {
        exponent: cfg.h_ref_exponent,
    };
    let n = policy.steps(cfg.t_end);
    let h_ref = cfg.t_end / n as f64;
    let pair = PairNorm::new(prob.frequencies(), 0.0);
    let initial_norm = pair.eval(&st0).map_err(numeric)?;

    let reference = scheme_by_id(erkn_wave::analysis::REFERENCE_SCHEME).map_err(numeric)?;
    let stepper =
        Stepper::new(&reference, prob.frequencies(), h_ref, prob.forcing()).map_err(numeric)?;
    let mut max_norm = initial_norm;
    let coarse = erkn_wave::analysis::integrate_with(&stepper, &prob, &st0, n, |_, v| {
        max_norm = max_norm.max(v)
    })
    .map_err(numeric)?;
    let fine = reference_solution_with(&prob, &st0, cfg.t_end, policy.halved()).map_err(numeric)?;
    let diff = pair
        .eval(&coarse.difference(&fine).map_err(numeric)?)
        .map_err(numeric)?;
    let pass = diff <= REFERENCE_TOL;

    let mut body = String::new();
    let _ = writeln!(body, "{REFERENCE_HEADER}");
    let _ = writeln!(
        body,
        "{},{n},{},{},{},{pass}",
        fmt_float(h_ref),
        fmt_float(diff),
        fmt_float(initial_norm),
        fmt_float(max_norm),
    );
    let failure = (!pass).then(|| {
        CliError::Numeric(format!(
            "reference self-consistency {diff:e} exceeds {REFERENCE_TOL:e}"
        ))
    });
    Ok(Outcome { body, failure })
}

/// Runs the subcommand and writes its output, even when its gate fails.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let inv = Invocation::resolve(cli.command, &cli.common)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.common.threads)
        .build()
        .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    let outcome = pool.install(|| match inv.command {
        Command::Converge => run_converge(&inv),
        Command::Filters => run_filters(&inv),
        Command::Props => run_props(&inv),
        Command::ReferenceCheck => run_reference_check(&inv),
    })?;
    let text = format!("{}\n{}", inv.provenance(), outcome.body);
    write_output(inv.output.as_deref(), &text)?;
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use erkn_wave::analysis::{ErrorCurve, ErrorSample, FitWindow};

    #[test]
    fn float_format_has_17_significant_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!(fmt_float(f64::NAN), "nan");
        for x in [1.0 / 3.0, 2.5e-300, -7.123456789e12] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn blown_up_cells_are_written_as_inf() {
        let window = FitWindow {
            max_err: 1.0,
            min_err: 0.0,
        };
        let report = StudyReport {
            curves: vec![ErrorCurve {
                scheme: "ERKN4".into(),
                alpha: 0.5,
                samples: vec![ErrorSample {
                    h: 1.0,
                    n_steps: 10,
                    err_y: f64::INFINITY,
                    err_ydot: f64::INFINITY,
                }],
                fitted_order_y: f64::NAN,
                fitted_order_ydot: f64::NAN,
                window_y: window,
                window_ydot: window,
            }],
            trajectories: vec![],
            reference_floor: vec![],
        };
        let csv = converge_csv(&report, &ExperimentConfig::default());
        let row = csv.lines().nth(1).unwrap();
        assert_eq!(
            row,
            "ERKN4,5.0000000000000000e-1,1.0000000000000000e0,10,inf,inf,nan,nan,1,chacha20,64,2,0.0000000000000000e0,spectral"
        );
    }

    #[test]
    fn provenance_depends_on_config_only() {
        let common = CommonArgs {
            config: None,
            output: Some("x.csv".into()),
            schemes: vec![],
            threads: 3,
        };
        let a = Invocation::resolve(Command::Filters, &common).unwrap();
        let b = Invocation::resolve(
            Command::Filters,
            &CommonArgs {
                output: None,
                threads: 0,
                ..common
            },
        )
        .unwrap();
        assert_eq!(a.provenance(), b.provenance());
        assert_eq!(a.schemes().len(), 5);
    }
}
