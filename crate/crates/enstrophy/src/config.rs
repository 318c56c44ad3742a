//! Plain-text run configuration: `key = value` lines, `#` comments.
//!
//! Every key has a canonical spelling and a default except the required ones.
//! [`RunConfig::echo`] writes the fully resolved configuration back in the
//! same format, so a run can be replayed from its own output.

use std::collections::BTreeMap;
use std::fmt;

use enstrophy_core::dynamics::{default_drift_substeps, NoiseKind, Scheme, SimulationConfig, System};
use enstrophy_core::lattice::ModeIndex;
use enstrophy_core::measure::SeededSampler;

use crate::io::fmt_f64;
use crate::pseudospectral::EngineKind;

/// Configuration errors; all are usage errors.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ConfigError {
    /// Line is not `key = value`.
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax {
        /// 1-based line number.
        line: usize,
        /// Offending text.
        text: String,
    },
    /// Key not recognised.
    #[error("line {line}: unknown key `{key}`")]
    Unknown {
        /// 1-based line number.
        line: usize,
        /// The key.
        key: String,
    },
    /// Key given twice.
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate {
        /// 1-based line number.
        line: usize,
        /// The key.
        key: String,
    },
    /// Required key absent.
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    /// Value out of range or unparsable.
    #[error("invalid value for `{key}`: {msg}")]
    Invalid {
        /// The key.
        key: &'static str,
        /// What is wrong.
        msg: String,
    },
}

/// Recognised keys in echo order, with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("system", "transport | limit"),
    ("scheme", "cayley_split | ito_em (transport only)"),
    ("noise_kind", "third | full"),
    ("nu", "viscosity, required"),
    ("n", "state cutoff N, required"),
    ("dt", "time step, required"),
    ("t_end", "horizon T, required"),
    ("record_stride", "steps between records"),
    ("seed", "master seed"),
    ("observables", "recorded modes, e.g. `1,0 0,1`"),
    ("nonlinear", "true | false"),
    ("drift_substeps", "RK4 substeps per dt, or auto"),
    ("engine", "auto | convolution | pseudospectral"),
    ("grid", "FFT grid size, or auto"),
    ("paths", "ensemble size"),
    ("threads", "worker threads, or auto"),
    ("record_runtime", "add wall-clock times to summaries"),
    ("max_lag", "compare: largest autocorrelation lag"),
    ("lag_mode", "compare: observable whose autocorrelation is compared"),
    ("gaps", "report: increment gaps in records, e.g. `1 2 4`, or none"),
    ("min_slope", "report: lower bound on the increment-moment slope"),
];

const REQUIRED: &[&str] = &["nu", "n", "dt", "t_end"];

/// Largest accepted cutoff.
pub const MAX_CUTOFF: u32 = 512;

/// A validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Per-path simulation settings.
    pub sim: SimulationConfig,
    /// Drift evaluator.
    pub engine: EngineKind,
    /// FFT grid override.
    pub grid: Option<usize>,
    /// Ensemble size.
    pub paths: usize,
    /// Thread cap; `None` uses all cores.
    pub threads: Option<usize>,
    /// Whether summaries carry wall-clock times.
    pub record_runtime: bool,
    /// Largest lag for `compare`.
    pub max_lag: f64,
    /// Observable compared by `compare`.
    pub lag_mode: ModeIndex,
    /// Increment gaps (in records) for `report`.
    pub gaps: Vec<usize>,
    /// Slope threshold for `report`.
    pub min_slope: f64,
    substeps_auto: bool,
}

fn invalid(key: &'static str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, msg: msg.into() }
}

fn canonical(key: &str) -> Option<&'static str> {
    KEYS.iter().map(|(k, _)| *k).find(|k| *k == key)
}

/// Parse `a,b` into a mode.
pub fn parse_mode(s: &str) -> Option<ModeIndex> {
    let (a, b) = s.trim().trim_start_matches('(').trim_end_matches(')').split_once(',')?;
    ModeIndex::new(a.trim().parse().ok()?, b.trim().parse().ok()?).ok()
}

fn fmt_mode(k: ModeIndex) -> String {
    format!("{},{}", k.k1(), k.k2())
}

struct Raw(BTreeMap<&'static str, String>);

impl Raw {
    fn get(&self, key: &'static str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn num<T: std::str::FromStr>(&self, key: &'static str, default: Option<T>) -> Result<T, ConfigError> {
        match self.get(key) {
            Some(v) => v.parse().map_err(|_| invalid(key, format!("cannot parse {v:?}"))),
            None => default.ok_or(ConfigError::Missing(key)),
        }
    }

    fn auto<T: std::str::FromStr>(&self, key: &'static str) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None | Some("auto") => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| invalid(key, format!("cannot parse {v:?}"))),
        }
    }
}

impl RunConfig {
    /// Parse configuration text, then apply `overrides` (`key=value`) in order.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut raw = BTreeMap::new();
        let mut put = |line: usize, l: &str, allow_dup: bool| -> Result<(), ConfigError> {
            let l = l.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                return Ok(());
            }
            let (k, v) = l.split_once('=').ok_or_else(|| ConfigError::Syntax { line, text: l.to_string() })?;
            let (k, v) = (k.trim(), v.trim());
            let key = canonical(k).ok_or_else(|| ConfigError::Unknown { line, key: k.to_string() })?;
            if raw.insert(key, v.to_string()).is_some() && !allow_dup {
                return Err(ConfigError::Duplicate { line, key: k.to_string() });
            }
            Ok(())
        };
        for (i, l) in text.lines().enumerate() {
            put(i + 1, l, false)?;
        }
        for o in overrides {
            put(0, o, true)?;
        }
        Self::from_raw(Raw(raw))
    }

    fn from_raw(raw: Raw) -> Result<Self, ConfigError> {
        for k in REQUIRED {
            if raw.get(k).is_none() {
                return Err(ConfigError::Missing(k));
            }
        }
        let system = match raw.get("system").unwrap_or("transport") {
            "transport" => System::Transport,
            "limit" => System::Limit,
            v => return Err(invalid("system", format!("expected transport or limit, got {v:?}"))),
        };
        let scheme = match raw.get("scheme").unwrap_or("cayley_split") {
            "cayley_split" => Scheme::CayleySplit,
            "ito_em" => Scheme::ItoEm,
            v => return Err(invalid("scheme", format!("expected cayley_split or ito_em, got {v:?}"))),
        };
        let noise_kind = match raw.get("noise_kind").unwrap_or("third") {
            "third" => NoiseKind::Third,
            "full" => NoiseKind::Full,
            v => return Err(invalid("noise_kind", format!("expected third or full, got {v:?}"))),
        };
        let nu: f64 = raw.num("nu", None)?;
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(invalid("nu", "must be finite and nonnegative"));
        }
        let n: u32 = raw.num("n", None)?;
        if n == 0 || n > MAX_CUTOFF {
            return Err(invalid("n", format!("must lie in 1..={MAX_CUTOFF}")));
        }
        let dt: f64 = raw.num("dt", None)?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid("dt", "must be positive"));
        }
        let t_end: f64 = raw.num("t_end", None)?;
        if !(t_end.is_finite() && t_end >= 0.0) {
            return Err(invalid("t_end", "must be nonnegative"));
        }
        let record_stride: usize = raw.num("record_stride", Some(1))?;
        let seed: u64 = raw.num("seed", Some(0))?;
        let observables = match raw.get("observables") {
            None => vec![ModeIndex::new(1, 0).expect("nonzero"), ModeIndex::new(0, 1).expect("nonzero")],
            Some(v) => v
                .split_whitespace()
                .map(|t| parse_mode(t).ok_or_else(|| invalid("observables", format!("bad mode {t:?}"))))
                .collect::<Result<Vec<_>, _>>()?,
        };
        if observables.is_empty() {
            return Err(invalid("observables", "need at least one mode"));
        }
        let mut seen = observables.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != observables.len() {
            return Err(invalid("observables", "repeated mode"));
        }
        let nonlinear: bool = raw.num("nonlinear", Some(true))?;
        let substeps: Option<usize> = raw.auto("drift_substeps")?;
        if substeps == Some(0) {
            return Err(invalid("drift_substeps", "must be positive"));
        }
        let engine = match raw.get("engine") {
            None => EngineKind::Auto,
            Some(v) => EngineKind::parse(v).ok_or_else(|| invalid("engine", format!("unknown engine {v:?}")))?,
        };
        let grid: Option<usize> = raw.auto("grid")?;
        if let Some(g) = grid {
            if g < 3 * n as usize {
                return Err(invalid("grid", format!("must be at least 3N = {}", 3 * n)));
            }
        }
        let paths: usize = raw.num("paths", Some(1))?;
        if paths == 0 {
            return Err(invalid("paths", "must be positive"));
        }
        let threads: Option<usize> = raw.auto("threads")?;
        if threads == Some(0) {
            return Err(invalid("threads", "must be positive"));
        }
        let record_runtime: bool = raw.num("record_runtime", Some(false))?;
        let max_lag: f64 = raw.num("max_lag", Some(0.5))?;
        if !(max_lag.is_finite() && max_lag >= 0.0) {
            return Err(invalid("max_lag", "must be nonnegative"));
        }
        let lag_mode = match raw.get("lag_mode") {
            None => observables[0],
            Some(v) => parse_mode(v).ok_or_else(|| invalid("lag_mode", format!("bad mode {v:?}")))?,
        };
        let gaps = match raw.get("gaps") {
            None | Some("none") => Vec::new(),
            Some(v) => v
                .split_whitespace()
                .map(|t| t.parse::<usize>().ok().filter(|&g| g > 0))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| invalid("gaps", format!("expected positive integers, got {v:?}")))?,
        };
        let min_slope: f64 = raw.num("min_slope", Some(1.8))?;

        let mut sim = SimulationConfig::new(n, nu, dt, t_end);
        sim.system = system;
        sim.scheme = scheme;
        sim.noise_kind = noise_kind;
        sim.record_stride = record_stride;
        sim.seed = SeededSampler::new(seed, 0);
        sim.observables = observables;
        sim.nonlinear = nonlinear;
        sim.drift_substeps = substeps.unwrap_or_else(|| default_drift_substeps(n, dt));
        sim.validate().map_err(|e| invalid("simulation", e.to_string()))?;
        if !sim.observables.contains(&lag_mode) {
            return Err(invalid("lag_mode", "must be one of the observables"));
        }
        let records = if t_end > 0.0 { sim.steps() / record_stride } else { 0 };
        if gaps.iter().any(|&g| g > records) {
            return Err(invalid("gaps", format!("gaps must not exceed the {records} recorded intervals")));
        }
        Ok(RunConfig {
            sim,
            engine,
            grid,
            paths,
            threads,
            record_runtime,
            max_lag,
            lag_mode,
            gaps,
            min_slope,
            substeps_auto: substeps.is_none(),
        })
    }

    /// Resolved `(key, value)` pairs in [`KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let s = &self.sim;
        let auto = |v: Option<usize>| v.map_or("auto".to_string(), |x| x.to_string());
        let list = |v: &[String]| if v.is_empty() { "none".to_string() } else { v.join(" ") };
        vec![
            ("system", if s.system == System::Transport { "transport" } else { "limit" }.into()),
            ("scheme", if s.scheme == Scheme::CayleySplit { "cayley_split" } else { "ito_em" }.into()),
            ("noise_kind", if s.noise_kind == NoiseKind::Third { "third" } else { "full" }.into()),
            ("nu", fmt_f64(s.nu)),
            ("n", s.n.to_string()),
            ("dt", fmt_f64(s.dt)),
            ("t_end", fmt_f64(s.t_end)),
            ("record_stride", s.record_stride.to_string()),
            ("seed", self.seed().to_string()),
            ("observables", list(&s.observables.iter().map(|&k| fmt_mode(k)).collect::<Vec<_>>())),
            ("nonlinear", s.nonlinear.to_string()),
            ("drift_substeps", if self.substeps_auto { "auto".into() } else { s.drift_substeps.to_string() }),
            ("engine", self.engine.name().into()),
            ("grid", auto(self.grid)),
            ("paths", self.paths.to_string()),
            ("threads", auto(self.threads)),
            ("record_runtime", self.record_runtime.to_string()),
            ("max_lag", fmt_f64(self.max_lag)),
            ("lag_mode", fmt_mode(self.lag_mode)),
            ("gaps", list(&self.gaps.iter().map(|g| g.to_string()).collect::<Vec<_>>())),
            ("min_slope", fmt_f64(self.min_slope)),
        ]
    }

    /// Master seed.
    pub fn seed(&self) -> u64 {
        self.sim.seed.master_seed
    }

    /// The resolved configuration as parseable text.
    pub fn echo(&self) -> String {
        self.to_string()
    }

    /// Record spacing in time units.
    pub fn record_dt(&self) -> f64 {
        self.sim.dt * self.sim.record_stride as f64
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
