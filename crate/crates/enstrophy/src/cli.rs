//! Command-line driver.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails,
//! 2 for usage and configuration errors, 3 for IO errors.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use enstrophy_core::basis::real_to_complex;
use enstrophy_core::measure::{sample_white_noise_keyed, SeededSampler, NORMAL_METHOD};
use enstrophy_core::nonlinear::HCoefficientTable;
use serde::Serialize;

use crate::config::{parse_mode, ConfigError, RunConfig, MAX_CUTOFF};
use crate::constants::constants_report;
use crate::ensemble::run_ensemble;
use crate::identities::{all_pass, format_table, run_suite};
use crate::io::{observable_label, write_complex_field, write_h_table, write_real_field, write_trajectories, FormatError};
use crate::report::{
    compare_ensembles, compare_tests, curves, ensemble_tests, qv_estimates, Comparison, CompareReport, ConfigEcho,
    EnsembleReport, QvEstimate, MULTIPLICITY_NOTE,
};

/// All checks passed.
pub const EXIT_OK: i32 = 0;
/// A check failed.
pub const EXIT_FAIL: i32 = 1;
/// Bad usage or configuration.
pub const EXIT_USAGE: i32 = 2;
/// File system error.
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "enstrophy", version, about = "Spectral simulator and checks for transport-noise Euler under the enstrophy measure")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Basis {
    Real,
    Complex,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Lattice sum S, the eps_N table and the viscosity thresholds (JSON).
    Constants {
        /// Relative tolerance on S.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Largest cutoff in the eps table.
        #[arg(long, default_value_t = 64)]
        n_max: u32,
        /// Output file (default stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the algebraic identity suite and print a pass/fail table.
    Identities {
        /// Cutoff for the operator rows.
        #[arg(long, default_value_t = 16)]
        n: u32,
        /// Seed for random points and fields.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the rows as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// H-coefficient table of one test mode as CSV.
    Coeffs {
        /// Test mode `j1,j2`.
        #[arg(long, allow_hyphen_values = true)]
        j: String,
        /// Cutoff of the pair modes.
        #[arg(long)]
        n: u32,
        /// Output file (default stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a white-noise field as CSV.
    Sample {
        /// Cutoff.
        #[arg(long)]
        n: u32,
        /// Master seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Stream index.
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Coefficient basis of the output.
        #[arg(long, value_enum, default_value_t = Basis::Real)]
        basis: Basis,
        /// Output file (default stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate an ensemble; writes trajectories.csv, summary.json and config.txt.
    Evolve {
        /// Configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Override `key=value`, applied in order.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Autocorrelation distance of candidate ensembles to a reference (JSON, heuristic).
    Compare {
        /// Candidate configuration; repeat for a sequence.
        #[arg(long, required = true)]
        config: Vec<PathBuf>,
        /// Reference configuration.
        #[arg(long)]
        against: PathBuf,
        /// Override applied to every configuration.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output file (default stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stationarity, QV and increment checks on one ensemble (JSON).
    Report {
        /// Configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Override `key=value`, applied in order.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output file (default stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
}

impl From<enstrophy_core::Error> for Failure {
    fn from(e: enstrophy_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Content(m) => Failure::Usage(m),
            e => Failure::Io(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn load(path: &Path, set: &[String]) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    RunConfig::parse(&text, set).map_err(|e: ConfigError| Failure::Usage(format!("{}: {e}", path.display())))
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_err(p, e))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: Serialize>(value: &T, out: &Option<PathBuf>) -> Result<(), Failure> {
    let mut w = sink(out)?;
    let name = out.as_ref().map_or("stdout".into(), |p| p.display().to_string());
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Io(format!("{name}: {e}")))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Failure::Io(format!("{name}: {e}")))
}

fn status(pass: bool) -> i32 {
    if pass {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

/// Seeds used by an ensemble.
#[derive(Serialize)]
struct Seeds {
    master_seed: u64,
    streams: String,
    normal_method: &'static str,
}

/// `summary.json` of `evolve`.
#[derive(Serialize)]
struct EvolveSummary<'a> {
    config: ConfigEcho<'a>,
    seeds: Seeds,
    paths: usize,
    records: usize,
    observables: Vec<String>,
    qv_estimates: Vec<QvEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_seconds: Option<f64>,
}

fn evolve(config: &Path, set: &[String], out: &Path) -> Result<i32, Failure> {
    let cfg = load(config, set)?;
    let start = Instant::now();
    let records = run_ensemble(&cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let qv = qv_estimates(&cfg, &records)?;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let traj = out.join("trajectories.csv");
    let f = File::create(&traj).map_err(|e| io_err(&traj, e))?;
    write_trajectories(&records, BufWriter::new(f))?;
    let summary = EvolveSummary {
        config: ConfigEcho(&cfg),
        seeds: Seeds {
            master_seed: cfg.seed(),
            streams: format!("0..{}", cfg.paths),
            normal_method: NORMAL_METHOD,
        },
        paths: records.len(),
        records: records.first().map_or(0, |r| r.times.len()),
        observables: cfg.sim.observables.iter().map(|&k| observable_label(k)).collect(),
        qv_estimates: qv,
        runtime_seconds: cfg.record_runtime.then_some(elapsed),
    };
    emit_json(&summary, &Some(out.join("summary.json")))?;
    let echo = out.join("config.txt");
    fs::write(&echo, cfg.echo()).map_err(|e| io_err(&echo, e))?;
    Ok(EXIT_OK)
}

fn compare(configs: &[PathBuf], against: &Path, set: &[String], out: &Option<PathBuf>) -> Result<i32, Failure> {
    let reference = load(against, set)?;
    let cands = configs.iter().map(|p| load(p, set)).collect::<Result<Vec<_>, _>>()?;
    let first = &cands[0];
    for c in &cands {
        if (c.record_dt() - reference.record_dt()).abs() > 1e-12 * reference.record_dt() {
            return Err(Failure::Usage("all ensembles must share dt * record_stride".into()));
        }
        let span = c.sim.t_end.min(reference.sim.t_end);
        if first.max_lag > span {
            return Err(Failure::Usage(format!("max_lag {} exceeds t_end {span}", first.max_lag)));
        }
    }
    let ref_records = run_ensemble(&reference)?;
    let mut results = Vec::new();
    for c in &cands {
        let recs = run_ensemble(c)?;
        results.push(compare_ensembles(first, &recs, &ref_records)?);
    }
    let labels: Vec<String> = cands.iter().map(|c| format!("n={}", c.sim.n)).collect();
    let acs: Vec<_> = results.iter().map(|(c, _)| c.clone()).collect();
    let tests = compare_tests(&labels, &acs);
    let all = tests.iter().all(|t| t.pass);
    let comparisons = cands
        .iter()
        .zip(&results)
        .map(|(cfg, (c, lags))| Comparison {
            config: ConfigEcho(cfg),
            distance: c.distance,
            distance_se: c.distance_se,
            bands_overlap: c.bands_overlap,
            curves: curves(c, lags, first.record_dt()),
        })
        .collect();
    let rep = CompareReport {
        reference: ConfigEcho(&reference),
        observable: observable_label(first.lag_mode),
        heuristic: true,
        comparisons,
        tests,
        all_pass: all,
        note: MULTIPLICITY_NOTE,
    };
    emit_json(&rep, out)?;
    Ok(status(all))
}

fn report(config: &Path, set: &[String], out: &Option<PathBuf>) -> Result<i32, Failure> {
    let cfg = load(config, set)?;
    let records = run_ensemble(&cfg)?;
    let tests = ensemble_tests(&cfg, &records)?;
    let all = tests.iter().all(|t| t.pass);
    let rep = EnsembleReport { config: ConfigEcho(&cfg), paths: records.len(), tests, all_pass: all, note: MULTIPLICITY_NOTE };
    emit_json(&rep, out)?;
    Ok(status(all))
}

fn check_cutoff(n: u32) -> Result<(), Failure> {
    if n == 0 || n > MAX_CUTOFF {
        return Err(Failure::Usage(format!("cutoff must be in 1..={MAX_CUTOFF}, got {n}")));
    }
    Ok(())
}

fn dispatch(cmd: Cmd) -> Result<i32, Failure> {
    match cmd {
        Cmd::Constants { tol, n_max, out } => {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Failure::Usage(format!("--tol must be in (0, 1), got {tol}")));
            }
            check_cutoff(n_max)?;
            let r = constants_report(tol, n_max)?;
            emit_json(&r, &out)?;
            Ok(status(r.all_pass))
        }
        Cmd::Identities { n, seed, json } => {
            check_cutoff(n)?;
            let rows = run_suite(n, seed)?;
            print!("{}", format_table(&rows));
            if json.is_some() {
                emit_json(&rows, &json)?;
            }
            Ok(status(all_pass(&rows)))
        }
        Cmd::Coeffs { j, n, out } => {
            check_cutoff(n)?;
            let j = parse_mode(&j).ok_or_else(|| Failure::Usage(format!("--j: expected a nonzero mode `a,b`, got {j:?}")))?;
            let t = HCoefficientTable::build(j, n)?;
            write_h_table(&t, sink(&out)?)?;
            Ok(EXIT_OK)
        }
        Cmd::Sample { n, seed, stream, basis, out } => {
            check_cutoff(n)?;
            let w = sample_white_noise_keyed(n, &SeededSampler::new(seed, stream))?;
            match basis {
                Basis::Real => write_real_field(&w, sink(&out)?)?,
                Basis::Complex => write_complex_field(&real_to_complex(&w), sink(&out)?)?,
            }
            Ok(EXIT_OK)
        }
        Cmd::Evolve { config, set, out } => evolve(&config, &set, &out),
        Cmd::Compare { config, against, set, out } => compare(&config, &against, &set, &out),
        Cmd::Report { config, set, out } => report(&config, &set, &out),
    }
}

/// Run the CLI on `args` (including the program name) and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Io(m)) => {
            eprintln!("io error: {m}");
            EXIT_IO
        }
    }
}
