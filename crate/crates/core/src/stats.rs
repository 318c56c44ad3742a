//! Estimators and checks over path ensembles.
//!
//! Every band is `estimate +- 4 SE`. The bootstrap resamples whole paths and
//! takes an explicit seed.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::measure::{Purpose, SeededSampler};
use crate::{Error, Result};

/// Width of acceptance bands in standard errors.
pub const SE_BAND: f64 = 4.0;

/// Default number of bootstrap resamples.
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Streaming mean, variance and fourth central moment.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    /// Add a sample.
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let t1 = delta * dn * n1;
        self.mean += dn;
        self.m4 += t1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += t1 * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += t1;
    }

    /// Merge another accumulator.
    pub fn merge(&mut self, o: &Moments) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let (na, nb) = (self.n as f64, o.n as f64);
        let n = na + nb;
        let d = o.mean - self.mean;
        let d2 = d * d;
        let m2 = self.m2 + o.m2 + d2 * na * nb / n;
        let m3 = self.m3 + o.m3 + d * d2 * na * nb * (na - nb) / (n * n)
            + 3.0 * d * (na * o.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + o.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * o.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * o.m3 - nb * self.m3) / n;
        self.mean += d * nb / n;
        self.m2 = m2;
        self.m3 = m3;
        self.m4 = m4;
        self.n += o.n;
    }

    /// Sample count.
    pub fn count(&self) -> u64 {
        self.n
    }

    /// Sample mean.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        self.m2 / (self.n as f64 - 1.0)
    }

    /// Standard error of the mean.
    pub fn se_mean(&self) -> f64 {
        libm::sqrt(self.variance() / self.n as f64)
    }

    /// Standard error of the sample variance, `sqrt((m4 - s^4 (n-3)/(n-1)) / n)`.
    pub fn se_variance(&self) -> f64 {
        let n = self.n as f64;
        let m4 = self.m4 / n;
        let s2 = self.variance();
        libm::sqrt(((m4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n).max(0.0))
    }
}

/// Mean and standard error of a slice.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let mut m = Moments::default();
    xs.iter().for_each(|&x| m.push(x));
    (m.mean(), m.se_mean())
}

/// `|estimate - target| <= SE_BAND * se`.
pub fn within_band(estimate: f64, se: f64, target: f64) -> bool {
    libm::fabs(estimate - target) <= SE_BAND * se
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs: Vec<f64> = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f);
    }
    d
}

/// Asymptotic p-value of a KS statistic `d` at sample size `n`, with
/// Stephens' finite-sample correction `(sqrt n + 0.12 + 0.11/sqrt n) d`.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = libm::sqrt(n as f64);
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = libm::exp(-2.0 * kf * kf * lambda * lambda);
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS test of samples against the standard normal: `(statistic, p-value)`.
pub fn ks_normal(samples: &[f64]) -> (f64, f64) {
    let d = ks_statistic(samples, normal_cdf);
    (d, ks_pvalue(d, samples.len()))
}

/// Uniform index in `0..n` without modulo bias.
fn below<R: RngCore>(rng: &mut R, n: usize) -> usize {
    let n = n as u64;
    let zone = u64::MAX - (u64::MAX % n);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return (v % n) as usize;
        }
    }
}

/// Bootstrap standard error of `stat` over resampled row indices.
pub fn bootstrap_se(
    n_rows: usize,
    resamples: usize,
    seed: u64,
    mut stat: impl FnMut(&[usize]) -> f64,
) -> Result<f64> {
    if n_rows < 2 || resamples < 2 {
        return Err(Error::Degenerate("bootstrap needs at least two rows and resamples".into()));
    }
    let mut rng = SeededSampler::new(seed, 0).rng(Purpose::Bootstrap.substream(0));
    let mut idx = vec![0usize; n_rows];
    let mut m = Moments::default();
    for _ in 0..resamples {
        for i in idx.iter_mut() {
            *i = below(&mut rng, n_rows);
        }
        m.push(stat(&idx));
    }
    Ok(libm::sqrt(m.variance()))
}

/// Summary statistics of one observable at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSummary {
    /// Label of the observable.
    pub label: String,
    /// Time of the snapshot.
    pub time: f64,
    /// Sample mean.
    pub mean: f64,
    /// Sample variance.
    pub variance: f64,
    /// Sample fourth central moment.
    pub fourth_moment: f64,
    /// Standard error of the mean.
    pub se_mean: f64,
    /// Standard error of the variance.
    pub se_variance: f64,
    /// KS statistic against `N(0,1)`.
    pub ks_statistic: f64,
    /// KS p-value.
    pub ks_pvalue: f64,
    /// True when mean and variance lie within `SE_BAND` of 0 and 1 and KS passes.
    pub pass: bool,
}

/// Output of [`stationarity_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSummary {
    /// Number of paths.
    pub n_paths: usize,
    /// One entry per (time, observable).
    pub modes: Vec<ModeSummary>,
    /// KS significance used.
    pub ks_alpha: f64,
}

impl EnsembleSummary {
    /// True when no entry was flagged.
    pub fn all_pass(&self) -> bool {
        self.modes.iter().all(|m| m.pass)
    }
}

/// Minimum ensemble size for [`stationarity_report`].
pub const MIN_PATHS: usize = 100;

/// Per-time, per-observable check against the standard normal marginal.
///
/// `samples[t][o]` holds the values of observable `o` at `times[t]` across paths.
pub fn stationarity_report(
    times: &[f64],
    labels: &[String],
    samples: &[Vec<Vec<f64>>],
    ks_alpha: f64,
) -> Result<EnsembleSummary> {
    if samples.len() != times.len() {
        return Err(Error::Mismatch("times and samples differ in length".into()));
    }
    let n_paths = samples.first().and_then(|s| s.first()).map_or(0, |v| v.len());
    if n_paths < MIN_PATHS {
        return Err(Error::Degenerate(alloc::format!("{n_paths} paths, need {MIN_PATHS}")));
    }
    let mut modes = Vec::new();
    for (t, per_obs) in times.iter().zip(samples) {
        if per_obs.len() != labels.len() {
            return Err(Error::Mismatch("labels and observables differ".into()));
        }
        for (label, xs) in labels.iter().zip(per_obs) {
            if xs.len() != n_paths {
                return Err(Error::Mismatch("ragged ensemble".into()));
            }
            let mut m = Moments::default();
            xs.iter().for_each(|&x| m.push(x));
            if !(m.variance() > 0.0) {
                return Err(Error::Degenerate(alloc::format!("zero variance for {label}")));
            }
            let (d, p) = ks_normal(xs);
            let pass = within_band(m.mean(), m.se_mean(), 0.0)
                && within_band(m.variance(), m.se_variance(), 1.0)
                && p >= ks_alpha;
            modes.push(ModeSummary {
                label: label.clone(),
                time: *t,
                mean: m.mean(),
                variance: m.variance(),
                fourth_moment: m.m4 / m.n as f64,
                se_mean: m.se_mean(),
                se_variance: m.se_variance(),
                ks_statistic: d,
                ks_pvalue: p,
                pass,
            });
        }
    }
    Ok(EnsembleSummary { n_paths, modes, ks_alpha })
}

/// A fitted slope with its confidence interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    /// Point estimate.
    pub slope: f64,
    /// Standard error.
    pub se: f64,
    /// Lower end of `slope - 4 SE`.
    pub lo: f64,
    /// Upper end of `slope + 4 SE`.
    pub hi: f64,
}

impl SlopeFit {
    fn new(slope: f64, se: f64) -> Self {
        SlopeFit { slope, se, lo: slope - SE_BAND * se, hi: slope + SE_BAND * se }
    }

    /// True when `v` lies in the interval.
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

fn origin_slope(times: &[f64], ys: impl Fn(usize) -> f64) -> f64 {
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &t) in times.iter().enumerate() {
        sxy += t * ys(i);
        sxx += t * t;
    }
    sxy / sxx
}

/// Least-squares slope through the origin of the mean realized QV curve, with
/// a path-bootstrap standard error.
///
/// `qv[p][t]` is the running QV of path `p` at `times[t]`.
pub fn qv_fit(times: &[f64], qv: &[Vec<f64>], seed: u64) -> Result<SlopeFit> {
    if times.len() < 3 {
        return Err(Error::Degenerate("qv_fit needs at least three time points".into()));
    }
    if qv.iter().any(|p| p.len() != times.len()) {
        return Err(Error::Mismatch("QV rows differ from time grid".into()));
    }
    let np = qv.len();
    let mean_curve = |rows: &mut dyn Iterator<Item = usize>| -> Vec<f64> {
        let mut acc = vec![0.0; times.len()];
        let mut c = 0usize;
        for r in rows {
            for (a, v) in acc.iter_mut().zip(&qv[r]) {
                *a += v;
            }
            c += 1;
        }
        acc.iter_mut().for_each(|a| *a /= c as f64);
        acc
    };
    let full = mean_curve(&mut (0..np));
    let slope = origin_slope(times, |i| full[i]);
    let se = bootstrap_se(np, BOOTSTRAP_RESAMPLES, seed, |idx| {
        let c = mean_curve(&mut idx.iter().copied());
        origin_slope(times, |i| c[i])
    })?;
    Ok(SlopeFit::new(slope, se))
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return Err(Error::Degenerate("slope needs two or more paired points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    if sxx == 0.0 {
        return Err(Error::Degenerate("all x values equal".into()));
    }
    Ok(sxy / sxx)
}

/// One row of an increment-moment scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IncrementMoment {
    /// Gap `t - s`.
    pub gap: f64,
    /// MC estimate of `E[(x_t - x_s)^order]`.
    pub moment: f64,
    /// Standard error across paths.
    pub se: f64,
}

/// Output of [`increment_moment_scan`].
#[derive(Clone, Debug, PartialEq)]
pub struct MomentScan {
    /// One row per gap.
    pub rows: Vec<IncrementMoment>,
    /// Slope of `log moment` against `log gap`.
    pub slope: f64,
}

/// Moments of increments at lags `gaps` (in record steps of length `dt_rec`).
///
/// `paths[p][t]` is an observable sampled every `dt_rec`. Each path averages
/// over all start points, and the path means give the standard error.
pub fn increment_moment_scan(paths: &[Vec<f64>], dt_rec: f64, gaps: &[usize], order: i32) -> Result<MomentScan> {
    if gaps.len() < 2 {
        return Err(Error::Degenerate("slope needs at least two gaps".into()));
    }
    if paths.len() < 2 {
        return Err(Error::Degenerate("need at least two paths".into()));
    }
    let mut rows = Vec::new();
    for &g in gaps {
        let mut m = Moments::default();
        for p in paths {
            if g == 0 || g >= p.len() {
                return Err(Error::Degenerate(alloc::format!("gap {g} outside path length {}", p.len())));
            }
            let cnt = p.len() - g;
            let s: f64 = (0..cnt).map(|i| libm::pow(p[i + g] - p[i], order as f64)).sum();
            m.push(s / cnt as f64);
        }
        rows.push(IncrementMoment { gap: g as f64 * dt_rec, moment: m.mean(), se: m.se_mean() });
    }
    let lx: Vec<f64> = rows.iter().map(|r| libm::log(r.gap)).collect();
    let ly: Vec<f64> = rows.iter().map(|r| libm::log(r.moment)).collect();
    let slope = ols_slope(&lx, &ly)?;
    Ok(MomentScan { rows, slope })
}

/// Empirical autocorrelation `E[x_0 x_lag] / E[x_0^2]` per lag, pooled over
/// paths and start points of a stationary ensemble `paths[p][t]`.
pub fn autocorrelation(paths: &[Vec<f64>], lags: &[usize], rows: Option<&[usize]>) -> Vec<f64> {
    let all: Vec<usize> = (0..paths.len()).collect();
    let rows = rows.unwrap_or(&all);
    let mut var = 0.0;
    let mut cnt = 0usize;
    for &r in rows {
        for &x in &paths[r] {
            var += x * x;
            cnt += 1;
        }
    }
    var /= cnt as f64;
    lags.iter()
        .map(|&lag| {
            let (mut s, mut c) = (0.0, 0usize);
            for &r in rows {
                let p = &paths[r];
                for i in 0..p.len().saturating_sub(lag) {
                    s += p[i] * p[i + lag];
                    c += 1;
                }
            }
            s / c as f64 / var
        })
        .collect()
}

/// Output of [`autocorrelation_compare`].
#[derive(Clone, Debug, PartialEq)]
pub struct AutocorrComparison {
    /// Autocorrelation of ensemble A per lag.
    pub acf_a: Vec<f64>,
    /// Autocorrelation of ensemble B per lag.
    pub acf_b: Vec<f64>,
    /// Bootstrap SE of A per lag.
    pub se_a: Vec<f64>,
    /// Bootstrap SE of B per lag.
    pub se_b: Vec<f64>,
    /// Discrete L2 distance `sqrt(Sum (a-b)^2 dlag)`.
    pub distance: f64,
    /// Bootstrap SE of the distance.
    pub distance_se: f64,
    /// True when every lag's 4-SE bands overlap.
    pub bands_overlap: bool,
}

/// Compare autocorrelation curves of two stationary ensembles on a shared lag grid.
pub fn autocorrelation_compare(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    lags: &[usize],
    dlag: f64,
    seed: u64,
) -> Result<AutocorrComparison> {
    let len = |e: &[Vec<f64>]| e.first().map_or(0, |p| p.len());
    if len(a) != len(b) || a.iter().any(|p| p.len() != len(a)) || b.iter().any(|p| p.len() != len(b)) {
        return Err(Error::Mismatch("ensembles use different time grids".into()));
    }
    if lags.iter().any(|&l| l >= len(a)) {
        return Err(Error::Mismatch("lag beyond path length".into()));
    }
    let acf_a = autocorrelation(a, lags, None);
    let acf_b = autocorrelation(b, lags, None);
    let dist = |x: &[f64], y: &[f64]| libm::sqrt(x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() * dlag);
    let distance = dist(&acf_a, &acf_b);
    let per_lag_se = |e: &[Vec<f64>], s: u64| -> Result<Vec<f64>> {
        let mut boots: Vec<Moments> = vec![Moments::default(); lags.len()];
        let _ = bootstrap_se(e.len(), BOOTSTRAP_RESAMPLES, s, |idx| {
            let c = autocorrelation(e, lags, Some(idx));
            for (m, v) in boots.iter_mut().zip(&c) {
                m.push(*v);
            }
            0.0
        })?;
        Ok(boots.iter().map(|m| libm::sqrt(m.variance())).collect())
    };
    let se_a = per_lag_se(a, seed)?;
    let se_b = per_lag_se(b, seed ^ 0x5555)?;
    // Independent resampling of both ensembles for the distance.
    let mut ra = SeededSampler::new(seed ^ 0xAAAA, 1).rng(Purpose::Bootstrap.substream(0));
    let mut dm = Moments::default();
    let mut ia = vec![0usize; a.len()];
    let mut ib = vec![0usize; b.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        ia.iter_mut().for_each(|i| *i = below(&mut ra, a.len()));
        ib.iter_mut().for_each(|i| *i = below(&mut ra, b.len()));
        let ca = autocorrelation(a, lags, Some(&ia));
        let cb = autocorrelation(b, lags, Some(&ib));
        dm.push(dist(&ca, &cb));
    }
    let bands_overlap = acf_a
        .iter()
        .zip(&acf_b)
        .zip(se_a.iter().zip(&se_b))
        .all(|((x, y), (sx, sy))| libm::fabs(x - y) <= SE_BAND * (sx + sy));
    Ok(AutocorrComparison {
        acf_a,
        acf_b,
        se_a,
        se_b,
        distance,
        distance_se: libm::sqrt(dm.variance()),
        bands_overlap,
    })
}
