//! JSON reports of ensemble checks.
//!
//! Every report holds the resolved configuration and a list of tests. A test
//! has a `name`, the `statistic` it measured, the acceptance `band` (either
//! end may be open, written as `null`) and `pass`. Bands are 4 standard
//! errors wide unless stated otherwise.

use std::f64::consts::PI;

use enstrophy_core::dynamics::{System, TrajectoryRecord};
use enstrophy_core::lattice::ModeIndex;
use enstrophy_core::stats::{
    autocorrelation_compare, increment_moment_scan, qv_fit, stationarity_report, AutocorrComparison, SE_BAND,
};
use enstrophy_core::{Error, Result};
use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::config::RunConfig;
use crate::ensemble::{observable_paths, qv_paths, snapshots};
use crate::io::observable_label;

/// KS significance used in stationarity checks.
pub const KS_ALPHA: f64 = 1e-3;

/// Note attached to every report about simultaneous testing.
pub const MULTIPLICITY_NOTE: &str = "each test uses a 4-standard-error band (two-sided false alarm about 6e-5); \
with m tests the chance of any false alarm is at most m times that (Bonferroni)";

/// One check in a report.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct TestResult {
    /// Identifier.
    pub name: String,
    /// Measured value.
    pub statistic: f64,
    /// Acceptance band `[lo, hi]`; `None` is open.
    pub band: [Option<f64>; 2],
    /// Whether the check passed.
    pub pass: bool,
}

impl TestResult {
    /// Test `statistic` against `[lo, hi]`.
    pub fn within(name: impl Into<String>, statistic: f64, lo: Option<f64>, hi: Option<f64>) -> Self {
        let pass = lo.is_none_or(|l| statistic >= l) && hi.is_none_or(|h| statistic <= h) && statistic.is_finite();
        TestResult { name: name.into(), statistic, band: [lo, hi], pass }
    }
}

/// Serialises a [`RunConfig`] as an object in canonical key order.
pub struct ConfigEcho<'a>(pub &'a RunConfig);

impl Serialize for ConfigEcho<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let e = self.0.entries();
        let mut m = s.serialize_map(Some(e.len()))?;
        for (k, v) in &e {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

/// Realized-QV fit of one observable pair.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct QvEstimate {
    /// First observable.
    pub l: String,
    /// Second observable.
    pub m: String,
    /// Slope of the mean QV curve.
    pub rate: f64,
    /// Bootstrap standard error.
    pub se: f64,
    /// `8 nu pi^2 |l|^2` on the diagonal, 0 off it.
    pub target: f64,
}

/// QV rate of the martingale part for `<w, e_l>`, `<w, e_m>`.
pub fn qv_target(nu: f64, l: ModeIndex, m: ModeIndex) -> f64 {
    if l == m {
        8.0 * nu * PI * PI * l.norm_sq() as f64
    } else {
        0.0
    }
}

/// QV fits for every observable pair; empty with fewer than two paths or three records.
pub fn qv_estimates(cfg: &RunConfig, records: &[TrajectoryRecord]) -> Result<Vec<QvEstimate>> {
    let Some(first) = records.first() else { return Ok(Vec::new()) };
    let times = &first.times;
    if records.len() < 2 || times.len() < 3 {
        return Ok(Vec::new());
    }
    let obs = &cfg.sim.observables;
    let mut out = Vec::new();
    for (a, &l) in obs.iter().enumerate() {
        for &m in &obs[a..] {
            let fit = qv_fit(times, &qv_paths(records, l, m)?, cfg.seed())?;
            out.push(QvEstimate {
                l: observable_label(l),
                m: observable_label(m),
                rate: fit.slope,
                se: fit.se,
                target: qv_target(cfg.sim.nu, l, m),
            });
        }
    }
    Ok(out)
}

/// Output of the `report` subcommand.
#[derive(serde::Serialize)]
pub struct EnsembleReport<'a> {
    /// Resolved configuration.
    pub config: ConfigEcho<'a>,
    /// Number of paths.
    pub paths: usize,
    /// Checks.
    pub tests: Vec<TestResult>,
    /// Every test passed.
    pub all_pass: bool,
    /// Multiple-testing note.
    pub note: &'static str,
}

/// Stationarity, QV and increment checks on an ensemble.
///
/// Stationarity: at every record time each observable has mean within 4 SE
/// of 0, variance within 4 SE of 1 and KS p-value at least [`KS_ALPHA`].
/// QV: the 4-SE interval of the fitted rate contains `8 nu pi^2 |l|^2 delta_{lm}`.
/// Increments (if `gaps` is set): the fourth-moment log-log slope of
/// `lag_mode` is at least `min_slope`.
pub fn ensemble_tests(cfg: &RunConfig, records: &[TrajectoryRecord]) -> Result<Vec<TestResult>> {
    let first = records.first().ok_or_else(|| Error::Degenerate("empty ensemble".into()))?;
    let labels: Vec<String> = first.observables.iter().map(|&k| observable_label(k)).collect();
    let mut tests = Vec::new();
    let summary = stationarity_report(&first.times, &labels, &snapshots(records), KS_ALPHA)?;
    for m in &summary.modes {
        let tag = format!("{} t={}", m.label, m.time);
        tests.push(TestResult::within(
            format!("mean {tag}"),
            m.mean,
            Some(-SE_BAND * m.se_mean),
            Some(SE_BAND * m.se_mean),
        ));
        tests.push(TestResult::within(
            format!("variance {tag}"),
            m.variance,
            Some(1.0 - SE_BAND * m.se_variance),
            Some(1.0 + SE_BAND * m.se_variance),
        ));
        tests.push(TestResult::within(format!("ks_pvalue {tag}"), m.ks_pvalue, Some(KS_ALPHA), None));
    }
    for q in qv_estimates(cfg, records)? {
        let name = if q.l == q.m { format!("qv_rate {}", q.l) } else { format!("qv_cross {} {}", q.l, q.m) };
        // The band is the acceptance region for the target, mirrored onto the estimate.
        let t = TestResult::within(name, q.rate, Some(q.target - SE_BAND * q.se), Some(q.target + SE_BAND * q.se));
        tests.push(t);
    }
    if !cfg.gaps.is_empty() {
        let paths = observable_paths(records, cfg.lag_mode)?;
        let scan = increment_moment_scan(&paths, cfg.record_dt(), &cfg.gaps, 4)?;
        tests.push(TestResult::within(
            format!("increment_slope {}", observable_label(cfg.lag_mode)),
            scan.slope,
            Some(cfg.min_slope),
            None,
        ));
    }
    Ok(tests)
}

/// Autocorrelation curves of one comparison, for plotting.
#[derive(serde::Serialize)]
pub struct Curves {
    /// Lags in time units.
    pub lags: Vec<f64>,
    /// Autocorrelation of the candidate ensemble.
    pub acf: Vec<f64>,
    /// Bootstrap SE of `acf`.
    pub se: Vec<f64>,
    /// Autocorrelation of the reference ensemble.
    pub acf_ref: Vec<f64>,
    /// Bootstrap SE of `acf_ref`.
    pub se_ref: Vec<f64>,
}

/// One candidate ensemble against the reference.
#[derive(serde::Serialize)]
pub struct Comparison<'a> {
    /// Candidate configuration.
    pub config: ConfigEcho<'a>,
    /// `sqrt(dlag Sum (acf - acf_ref)^2)`.
    pub distance: f64,
    /// Bootstrap SE of the distance.
    pub distance_se: f64,
    /// Per-lag 4-SE bands intersect at every lag.
    pub bands_overlap: bool,
    /// Curves.
    pub curves: Curves,
}

/// Output of the `compare` subcommand.
#[derive(serde::Serialize)]
pub struct CompareReport<'a> {
    /// Reference configuration.
    pub reference: ConfigEcho<'a>,
    /// Observable compared.
    pub observable: String,
    /// Always true: the autocorrelation distance is a proxy for weak convergence, not a test of it.
    pub heuristic: bool,
    /// Candidates in command-line order.
    pub comparisons: Vec<Comparison<'a>>,
    /// Checks.
    pub tests: Vec<TestResult>,
    /// Every test passed.
    pub all_pass: bool,
    /// Multiple-testing note.
    pub note: &'static str,
}

/// Lag grid `0..=max_lag` in record steps.
pub fn lag_grid(cfg: &RunConfig) -> Vec<usize> {
    let top = (cfg.max_lag / cfg.record_dt() + 1e-9).floor() as usize;
    (0..=top).collect()
}

/// Compare the autocorrelation of `lag_mode` (taken from `cfg`) between a
/// candidate and a reference ensemble.
pub fn compare_ensembles(
    cfg: &RunConfig,
    cand: &[TrajectoryRecord],
    reference: &[TrajectoryRecord],
) -> Result<(AutocorrComparison, Vec<usize>)> {
    let lags = lag_grid(cfg);
    let a = observable_paths(cand, cfg.lag_mode)?;
    let b = observable_paths(reference, cfg.lag_mode)?;
    let c = autocorrelation_compare(&a, &b, &lags, cfg.record_dt(), cfg.seed())?;
    Ok((c, lags))
}

/// Curves of a comparison with lags in time units.
pub fn curves(c: &AutocorrComparison, lags: &[usize], dt_rec: f64) -> Curves {
    Curves {
        lags: lags.iter().map(|&l| l as f64 * dt_rec).collect(),
        acf: c.acf_a.clone(),
        se: c.se_a.clone(),
        acf_ref: c.acf_b.clone(),
        se_ref: c.se_b.clone(),
    }
}

/// Worst `|acf - acf_ref| / (4 (se + se_ref))` over lags; at most 1 when the bands overlap.
pub fn overlap_ratio(c: &AutocorrComparison) -> f64 {
    c.acf_a
        .iter()
        .zip(&c.acf_b)
        .zip(c.se_a.iter().zip(&c.se_b))
        .map(|((x, y), (sx, sy))| (x - y).abs() / (SE_BAND * (sx + sy)).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Tests of a comparison set.
///
/// One candidate: distance within 4 SE of 0 and band overlap at every lag.
/// Several: each distance is reported, consecutive distances must decrease,
/// and the last candidate must overlap the reference at every lag.
pub fn compare_tests(labels: &[String], cs: &[AutocorrComparison]) -> Vec<TestResult> {
    let mut tests = Vec::new();
    if let [c] = cs {
        tests.push(TestResult::within(
            format!("autocorrelation_distance {}", labels[0]),
            c.distance,
            Some(0.0),
            Some(SE_BAND * c.distance_se),
        ));
    } else {
        for (l, c) in labels.iter().zip(cs) {
            tests.push(TestResult::within(format!("autocorrelation_distance {l}"), c.distance, Some(0.0), None));
        }
        for (w, lw) in cs.windows(2).zip(labels.windows(2)) {
            tests.push(TestResult::within(
                format!("distance_drop {} -> {}", lw[0], lw[1]),
                w[0].distance - w[1].distance,
                Some(0.0),
                None,
            ));
        }
    }
    if let (Some(c), Some(l)) = (cs.last(), labels.last()) {
        tests.push(TestResult::within(format!("band_overlap_ratio {l}"), overlap_ratio(c), Some(0.0), Some(1.0)));
    }
    tests
}

/// Label of the system, for messages.
pub fn system_name(s: System) -> &'static str {
    match s {
        System::Transport => "transport",
        System::Limit => "limit",
    }
}
