//! Batch front end: parses problem descriptions, runs one experiment and
//! writes its artifact as JSON or CSV.
//!
//! Exit status is 0 on success, 1 on a domain error (resonance, endpoint
//! mismatch, tolerance exceeded) and 2 on malformed input. Errors are
//! reported as one JSON record on the error stream.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

pub mod commands;

/// Default equivariance tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    DiophantineCheck,
    SolveCohomology,
    Excise,
    LinearizeDemo,
    EquivarianceTest,
    LiouvilleSweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::DiophantineCheck => "diophantine-check",
            Command::SolveCohomology => "solve-cohomology",
            Command::Excise => "excise",
            Command::LinearizeDemo => "linearize-demo",
            Command::EquivarianceTest => "equivariance-test",
            Command::LiouvilleSweep => "liouville-sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Command-line surface.
#[derive(Debug, Parser)]
#[command(name = "linflow", version, about = "Experiments with linear flows on tori")]
pub struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    pub command: Command,
    /// Direction vector JSON: {"d": 2, "alpha": ["1", "1.618..."], "tau"?, "radius"?}.
    #[arg(long, value_name = "FILE")]
    pub alpha: Option<PathBuf>,
    /// Trigonometric polynomial JSON: {"d": 2, "modes": [{"n": [1, 0], "re": "0.5", "im": "0"}]}.
    #[arg(long, value_name = "FILE")]
    pub function: Option<PathBuf>,
    /// One-form JSON: a list of d polynomials.
    #[arg(long, value_name = "FILE")]
    pub form: Option<PathBuf>,
    /// Curve or curve family JSON.
    #[arg(long, value_name = "FILE")]
    pub curve: Option<PathBuf>,
    /// Lattice ball radius for the Diophantine sweep.
    #[arg(long, value_name = "N")]
    pub radius: Option<i64>,
    /// Diophantine exponent.
    #[arg(long, value_name = "X")]
    pub tau: Option<f64>,
    /// Test battery cutoff on ‖n‖∞.
    #[arg(long, value_name = "N", default_value_t = linflow::currents::DEFAULT_BATTERY_CUTOFF)]
    pub cutoff: i64,
    /// Number of random samples.
    #[arg(long, value_name = "N", default_value_t = 100)]
    pub samples: usize,
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub seed: u64,
    /// Directory for the artifact; standard output when absent.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Resonance threshold override.
    #[arg(long, value_name = "X")]
    pub eps_res: Option<f64>,
    /// Equivariance tolerance override.
    #[arg(long, value_name = "X", default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Liouville exponents, comma separated.
    #[arg(long, value_name = "S1,S2,...", value_delimiter = ',', default_value = "1,2,6,24")]
    pub schedule: Vec<u32>,
}

/// Everything one run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub alpha: Option<PathBuf>,
    pub function: Option<PathBuf>,
    pub form: Option<PathBuf>,
    pub curve: Option<PathBuf>,
    pub radius: Option<i64>,
    pub tau: Option<f64>,
    pub cutoff: i64,
    pub samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub eps_res: Option<f64>,
    pub tolerance: f64,
    pub schedule: Vec<u32>,
}

impl From<Cli> for ExperimentConfig {
    fn from(c: Cli) -> Self {
        ExperimentConfig {
            command: c.command,
            alpha: c.alpha,
            function: c.function,
            form: c.form,
            curve: c.curve,
            radius: c.radius,
            tau: c.tau,
            cutoff: c.cutoff,
            samples: c.samples,
            seed: c.seed,
            out: c.out,
            format: c.format,
            eps_res: c.eps_res,
            tolerance: c.tolerance,
            schedule: c.schedule,
        }
    }
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            alpha: None,
            function: None,
            form: None,
            curve: None,
            radius: None,
            tau: None,
            cutoff: linflow::currents::DEFAULT_BATTERY_CUTOFF,
            samples: 100,
            seed: 0,
            out: None,
            format: Format::Json,
            eps_res: None,
            tolerance: DEFAULT_TOLERANCE,
            schedule: vec![1, 2, 6, 24],
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (flag, path) in [
            ("--alpha", &self.alpha),
            ("--function", &self.function),
            ("--form", &self.form),
            ("--curve", &self.curve),
        ] {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(CliError::input("MissingFile", format!("{flag}: {} does not exist", p.display())));
                }
            }
        }
        if self.cutoff < 1 {
            return Err(CliError::input("InvalidConfig", format!("--cutoff must be >= 1, got {}", self.cutoff)));
        }
        if self.samples == 0 {
            return Err(CliError::input("InvalidConfig", "--samples must be >= 1".into()));
        }
        if let Some(r) = self.radius {
            if r < 1 {
                return Err(CliError::input("InvalidConfig", format!("--radius must be >= 1, got {r}")));
            }
        }
        if let Some(e) = self.eps_res {
            if !(e > 0.0 && e.is_finite()) {
                return Err(CliError::input("InvalidConfig", format!("--eps-res must be positive, got {e}")));
            }
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(CliError::input("InvalidConfig", "--tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// A failure with its exit status and a machine-readable record.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    pub exit_code: u8,
    pub details: Value,
}

impl CliError {
    pub fn input(kind: &str, message: String) -> Self {
        CliError {
            kind: kind.to_string(),
            message,
            exit_code: 2,
            details: Value::Null,
        }
    }

    pub fn domain(kind: &str, message: String, details: Value) -> Self {
        CliError {
            kind: kind.to_string(),
            message,
            exit_code: 1,
            details,
        }
    }

    pub fn record(&self) -> Value {
        let mut rec = json!({
            "error": self.kind,
            "message": self.message,
            "exit_code": self.exit_code,
        });
        if !self.details.is_null() {
            rec["details"] = self.details.clone();
        }
        rec
    }
}

impl From<linflow::Error> for CliError {
    fn from(e: linflow::Error) -> Self {
        use linflow::Error as E;
        let details = match &e {
            E::ResonanceFound { n } | E::ResonantMode { n } => json!({ "n": n }),
            E::TwistMismatch { boundary, form } => json!({ "boundary": boundary, "form": form }),
            _ => Value::Null,
        };
        CliError {
            kind: e.kind().to_string(),
            message: e.to_string(),
            exit_code: if e.is_domain() { 1 } else { 2 },
            details,
        }
    }
}

/// Output of one experiment: both renderings plus an optional domain
/// failure that still leaves an artifact behind.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub csv: Vec<Vec<String>>,
    pub failure: Option<CliError>,
}

impl Report {
    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json)
                    .map_err(|e| CliError::input("Internal", e.to_string()))?;
                s.push('\n');
                Ok(s.into_bytes())
            }
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
                for row in &self.csv {
                    w.write_record(row).map_err(|e| CliError::input("Internal", e.to_string()))?;
                }
                w.into_inner().map_err(|e| CliError::input("Internal", e.to_string()))
            }
        }
    }
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: u8,
    pub artifact: Option<PathBuf>,
    pub error: Option<CliError>,
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    let io = |e: std::io::Error| CliError::input("Io", format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    let target = dir.join(name);
    tmp.persist(&target).map_err(|e| io(e.error))?;
    Ok(target)
}

/// Runs one experiment, writing the artifact into `--out` or to `stdout`.
pub fn run(config: &ExperimentConfig, stdout: &mut dyn Write) -> RunOutcome {
    let fail = |e: CliError| RunOutcome {
        exit_code: e.exit_code,
        artifact: None,
        error: Some(e),
    };
    if let Err(e) = config.validate() {
        return fail(e);
    }
    let report = match commands::execute(config) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let bytes = match report.render(config.format) {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let artifact = match &config.out {
        Some(dir) => {
            let name = format!("{}.{}", config.command.name(), config.format.extension());
            match write_atomic(dir, &name, &bytes) {
                Ok(p) => Some(p),
                Err(e) => return fail(e),
            }
        }
        None => {
            if let Err(e) = stdout.write_all(&bytes).and_then(|_| stdout.flush()) {
                return fail(CliError::input("Io", e.to_string()));
            }
            None
        }
    };
    RunOutcome {
        exit_code: report.failure.as_ref().map_or(0, |e| e.exit_code),
        artifact,
        error: report.failure,
    }
}

/// Parses `args`, runs, and reports errors on `stderr`. Returns the exit code.
pub fn cli_main<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let err = CliError::input("Usage", e.to_string().trim().to_string());
            let _ = writeln!(stderr, "{}", err.record());
            return err.exit_code;
        }
    };
    let outcome = run(&ExperimentConfig::from(cli), stdout);
    if let Some(e) = &outcome.error {
        let _ = writeln!(stderr, "{}", e.record());
    }
    outcome.exit_code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::new(Command::LinearizeDemo);
        assert!(c.validate().is_ok());
        c.cutoff = 0;
        assert_eq!(c.validate().unwrap_err().exit_code, 2);
        let mut c = ExperimentConfig::new(Command::Excise);
        c.curve = Some(PathBuf::from("/nonexistent/curve.json"));
        assert_eq!(c.validate().unwrap_err().kind, "MissingFile");
    }

    #[test]
    fn library_errors_map_to_exit_codes() {
        let e = CliError::from(linflow::Error::ResonantMode { n: vec![1, -2] });
        assert_eq!(e.exit_code, 1);
        assert_eq!(e.record()["details"]["n"], json!([1, -2]));
        let e = CliError::from(linflow::Error::Parse("x".into()));
        assert_eq!(e.exit_code, 2);
        assert!(e.record().get("details").is_none());
    }

    #[test]
    fn stdout_run_is_deterministic() {
        let mut c = ExperimentConfig::new(Command::EquivarianceTest);
        c.samples = 5;
        c.seed = 42;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        assert_eq!(run(&c, &mut a).exit_code, 0);
        assert_eq!(run(&c, &mut b).exit_code, 0);
        assert_eq!(a, b);
    }
}
