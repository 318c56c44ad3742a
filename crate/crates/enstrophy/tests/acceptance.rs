//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Environment:
//! - `ACCEPTANCE_ONLY=1,3,9` runs a subset.
//! - `ACCEPTANCE_SMOKE=1` shrinks every ensemble to exercise the code paths;
//!   its verdicts are not acceptance results.
//! - `ACCEPTANCE_STRICT=1` exits nonzero when any criterion fails. Without it
//!   the exit status is zero and failures are reported only in the output.

use std::io::Write;
use std::time::Instant;

use enstrophy::config::RunConfig;
use enstrophy::constants::constants_report;
use enstrophy::ensemble::{observable_paths, run_ensemble, snapshots};
use enstrophy::identities::run_suite;
use enstrophy::io::observable_label;
use enstrophy::oracles::{h_coeff_oracle, QuadGrid};
use enstrophy::report::{compare_ensembles, qv_estimates, qv_target};
use enstrophy::PseudospectralDrift;
use enstrophy_core::basis::real_to_complex;
use enstrophy_core::lattice::{mode_set, ModeIndex, SetKind};
use enstrophy_core::measure::{sample_white_noise, splitmix64, SeededSampler};
use enstrophy_core::nonlinear::{drift_tail, h_coeff, h_coeff_sq, h_coeff_sq_sum, ConvolutionDrift, Cutoff, DriftEngine, HCoefficientTable};
use enstrophy_core::stats::{increment_moment_scan, stationarity_report, Moments, SE_BAND};
use enstrophy_core::Complex64;

const SEED: u64 = 20240611;

// 1
const C1_BUDGET: f64 = 10.0;
const C1_N: u32 = 16;
// 2
const C2_BUDGET: f64 = 60.0;
const C2_QUAD_TOL: f64 = 1e-8;
const C2_SQ_TOL: f64 = 1e-12;
// 3
const C3_BUDGET: f64 = 30.0;
const C3_FIELDS: u64 = 50;
const C3_N: u32 = 8;
const C3_TOL: f64 = 1e-10;
// 4
const C4_BUDGET: f64 = 300.0;
const C4_N: u32 = 12;
const C4_SAMPLES: u64 = 100_000;
const C4_HAT_N: u32 = 4;
const C4_ARRAYS: u64 = 3;
// 5
const C5_BUDGET: f64 = 1800.0;
const C5_PATHS: usize = 10_000;
// 6
const C6_BUDGET: f64 = 1800.0;
const C6_TRANSPORT_REL: f64 = 0.10;
// 7
const C7_BUDGET: f64 = 900.0;
const C7_MIN_SLOPE: f64 = 1.8;
const C7_PATHS: usize = 1000;
// 8
const C8_BUDGET: f64 = 60.0;
const C8_NS: [u32; 4] = [4, 8, 16, 32];
const C8_DELTA: f64 = 0.5;
const C8_RATIO: f64 = 0.5;
// 9
const C9_BUDGET: f64 = 10.0;
const C9_TOL: f64 = 1e-10;
const C9_S_APPROX: f64 = 6.02681;
// 10
const C10_BUDGET: f64 = 7200.0;
const C10_NS: [u32; 3] = [12, 24, 48];
const C10_LIMIT_N: u32 = 24;
const C10_PATHS: usize = 100;

struct Ctx {
    smoke: bool,
}

impl Ctx {
    fn size<T>(&self, full: T, smoke: T) -> T {
        if self.smoke {
            smoke
        } else {
            full
        }
    }
}

struct Verdict {
    pass: bool,
    summary: String,
}

fn detail(s: impl AsRef<str>) {
    println!("    {}", s.as_ref());
    let _ = std::io::stdout().flush();
}

fn cfg(text: &str) -> RunConfig {
    RunConfig::parse(text, &[]).expect("acceptance config")
}

fn m(a: i32, b: i32) -> ModeIndex {
    ModeIndex::new(a, b).unwrap()
}

fn c1(_: &Ctx) -> Verdict {
    let rows = run_suite(C1_N, SEED).unwrap();
    for r in &rows {
        detail(format!("{:<30} {:>10.3e} <= {:.0e} {}", r.name, r.max_error, r.tolerance, if r.pass { "ok" } else { "FAIL" }));
    }
    let pass = rows.iter().all(|r| r.pass);
    Verdict { pass, summary: format!("{} of {} identity rows within tolerance", rows.iter().filter(|r| r.pass).count(), rows.len()) }
}

fn c2(_: &Ctx) -> Verdict {
    let js = mode_set(2, SetKind::Full).unwrap().members().to_vec();
    let ks = mode_set(3, SetKind::Full).unwrap().members().to_vec();
    let rows = h_coeff_oracle(&QuadGrid::new(256), &js, &ks);
    let quad = rows.iter().map(|r| (r.quadrature - r.closed).norm()).fold(0.0, f64::max);
    let mut sq = 0.0f64;
    for &j in &js {
        for &k in &ks {
            for &l in &ks {
                sq = sq.max((h_coeff(j, k, l).norm_sqr() - h_coeff_sq(j, k, l)).abs());
            }
        }
    }
    detail(format!("{} triples, |j| <= 2, |k|,|l| <= 3, 256^2 quadrature", rows.len()));
    detail(format!("max |quadrature - closed form| = {quad:.3e} (tol {C2_QUAD_TOL:.0e})"));
    detail(format!("max ||h|^2 - squared-magnitude form| = {sq:.3e} (tol {C2_SQ_TOL:.0e}, absolute)"));
    Verdict { pass: quad <= C2_QUAD_TOL && sq <= C2_SQ_TOL, summary: format!("oracle {quad:.2e}, square {sq:.2e}") }
}

fn c3(_: &Ctx) -> Verdict {
    let mut conv = ConvolutionDrift::new(C3_N).unwrap();
    let mut fft = PseudospectralDrift::new(C3_N).unwrap();
    let (mut diff, mut orth) = (0.0f64, 0.0f64);
    for p in 0..C3_FIELDS {
        let w = sample_white_noise(C3_N, &SeededSampler::new(SEED, p)).unwrap();
        let a = conv.drift_real(&w).unwrap();
        let b = fft.drift_real(&w).unwrap();
        diff = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).abs()).fold(diff, f64::max);
        let n2 = w.norm_sq();
        orth = orth.max(a.dot(&w).unwrap().abs() / (n2 * n2)).max(b.dot(&w).unwrap().abs() / (n2 * n2));
    }
    detail(format!("{C3_FIELDS} white-noise fields at N = {C3_N}, FFT grid {}", fft.grid()));
    detail(format!("max |convolution - pseudospectral| = {diff:.3e} (tol {C3_TOL:.0e})"));
    detail(format!("max |<b_N(w), w>| / |w|^4 = {orth:.3e} (tol {C3_TOL:.0e})"));
    Verdict { pass: diff <= C3_TOL && orth <= C3_TOL, summary: format!("drift diff {diff:.2e}, orthogonality {orth:.2e}") }
}

// Symmetric array on the modes with a_{-k,-l} = conj a_{k,l}.
fn admissible_array(modes: &[ModeIndex], seed: u64) -> Vec<Complex64> {
    let d = modes.len();
    let idx = |k: ModeIndex| modes.iter().position(|&x| x == k).unwrap();
    let neg: Vec<usize> = modes.iter().map(|&k| idx(-k)).collect();
    let mut s = seed;
    let mut u = || (splitmix64(&mut s) >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    let b: Vec<Complex64> = (0..d * d).map(|_| Complex64::new(u(), u())).collect();
    let mut a = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            a[i * d + j] = (b[i * d + j] + b[j * d + i] + b[neg[i] * d + neg[j]].conj() + b[neg[j] * d + neg[i]].conj()) * 0.25;
        }
    }
    a
}

fn c4(ctx: &Ctx) -> Verdict {
    let samples = ctx.size(C4_SAMPLES, 2000);
    let js = [m(1, 0), m(1, 1), m(0, 2)];
    let tables: Vec<HCoefficientTable> = js.iter().map(|&j| HCoefficientTable::build(j, C4_N).unwrap()).collect();
    let modes = mode_set(C4_N, SetKind::Full).unwrap();
    let hat = mode_set(C4_HAT_N, SetKind::Full).unwrap();
    let hm = hat.members().to_vec();
    let d = hm.len();
    let arrays: Vec<Vec<Complex64>> = (0..C4_ARRAYS).map(|i| admissible_array(&hm, SEED ^ (i + 1))).collect();
    let neg: Vec<usize> = hm.iter().map(|&k| hat.index_of(-k).unwrap()).collect();
    let traces: Vec<Complex64> = arrays.iter().map(|a| (0..d).map(|i| a[i * d + neg[i]]).sum()).collect();
    let mut pm = vec![Moments::default(); js.len()];
    let mut qm = vec![Moments::default(); arrays.len()];
    let mut imag = 0.0f64;
    for p in 0..samples {
        let s = SeededSampler::new(SEED, p);
        let w = real_to_complex(&sample_white_noise(C4_N, &s).unwrap());
        for (t, acc) in tables.iter().zip(&mut pm) {
            let v = t.pairing(&modes, w.coeffs());
            imag = imag.max(v.im.abs());
            acc.push(v.re * v.re);
        }
        let wh = real_to_complex(&sample_white_noise(C4_HAT_N, &s.with_stream(p + samples)).unwrap());
        let x = wh.coeffs();
        for ((a, tr), acc) in arrays.iter().zip(&traces).zip(&mut qm) {
            let mut q = -*tr;
            for i in 0..d {
                let row = &a[i * d..(i + 1) * d];
                let inner: Complex64 = row.iter().zip(x).map(|(c, y)| c * y).sum();
                q += x[i] * inner;
            }
            imag = imag.max(q.im.abs() / q.norm().max(1.0));
            acc.push(q.norm_sqr());
        }
    }
    let mut pass = true;
    for ((j, t), acc) in js.iter().zip(&tables).zip(&pm) {
        let target = 2.0 * h_coeff_sq_sum(*j, Cutoff::Finite(C4_N)).unwrap();
        let table_target = 2.0 * t.sq_sum();
        let z = (acc.mean() - target) / acc.se_mean();
        let ok = z.abs() <= SE_BAND && (table_target - target).abs() <= 1e-9 * target;
        pass &= ok;
        detail(format!(
            "E<w(x)w, H_e{}>^2 = {:.4} +- {:.4}, 2 Sum|h|^2 = {:.4} (table {:.4}), z = {z:+.2} {}",
            observable_label(*j).trim_start_matches('w'),
            acc.mean(),
            acc.se_mean(),
            target,
            table_target,
            if ok { "ok" } else { "FAIL" }
        ));
    }
    for (i, (a, acc)) in arrays.iter().zip(&qm).enumerate() {
        let target = 2.0 * a.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let z = (acc.mean() - target) / acc.se_mean();
        let ok = z.abs() <= SE_BAND;
        pass &= ok;
        detail(format!("centering array {i} on Lambda_{C4_HAT_N} ({d} modes): E|Q|^2 = {:.3} +- {:.3}, 2 Sum|a|^2 = {target:.3}, z = {z:+.2} {}", acc.mean(), acc.se_mean(), if ok { "ok" } else { "FAIL" }));
    }
    detail(format!("{samples} samples; largest imaginary part {imag:.2e}"));
    pass &= imag <= 1e-9;
    Verdict { pass, summary: format!("{} variance identities and {} centering identities within {SE_BAND} SE", js.len(), arrays.len()) }
}

fn variance_checks(label: &str, c: &RunConfig, times: &[f64]) -> bool {
    let recs = run_ensemble(c).unwrap();
    let first = &recs[0];
    let labels: Vec<String> = first.observables.iter().map(|&k| observable_label(k)).collect();
    let rep = stationarity_report(&first.times, &labels, &snapshots(&recs), 1e-3).unwrap();
    let mut pass = true;
    for &t in times {
        for r in rep.modes.iter().filter(|r| (r.time - t).abs() < 1e-9) {
            let z = (r.variance - 1.0) / r.se_variance;
            let ok = z.abs() <= SE_BAND;
            pass &= ok;
            detail(format!("{label} t={t} {}: var {:.4} +- {:.4}, z = {z:+.2} {}", r.label, r.variance, r.se_variance, if ok { "ok" } else { "FAIL" }));
        }
    }
    pass
}

fn c5(ctx: &Ctx) -> Verdict {
    let paths = ctx.size(C5_PATHS, 100);
    let base = "nu = 1.2\ndt = 1e-3\nt_end = 1\nrecord_stride = 500\nnoise_kind = third\n";
    let t = cfg(&format!(
        "{base}system = transport\nscheme = cayley_split\nn = 9\npaths = {paths}\nseed = {SEED}\nobservables = 1,0 0,-1 1,1 -2,1 2,-2 0,3 -3,0 1,-2\n"
    ));
    let l = cfg(&format!("{base}system = limit\nn = 8\npaths = {paths}\nseed = {SEED}\nobservables = 1,0 0,-1 1,1 -2,1 3,2 0,-5 6,3 -4,-6\n"));
    detail(format!("{paths} paths per system"));
    let a = variance_checks("transport N=9", &t, &[0.5, 1.0]);
    let b = variance_checks("limit N=8", &l, &[0.5, 1.0]);
    Verdict { pass: a && b, summary: format!("variances at t = 0.5, 1: transport {}, limit {}", ok(a), ok(b)) }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn c6(ctx: &Ctx) -> Verdict {
    let target = qv_target(1.2, m(1, 0), m(1, 0));
    let lp = ctx.size(200, 20);
    let limit = cfg(&format!(
        "system = limit\nnu = 1.2\nn = 8\ndt = 5e-5\nt_end = 0.5\nrecord_stride = 1000\npaths = {lp}\nseed = {SEED}\nobservables = 1,0 0,1\n"
    ));
    let qv = qv_estimates(&limit, &run_ensemble(&limit).unwrap()).unwrap();
    let diag = qv.iter().find(|q| q.l == q.m && q.l == "w(1,0)").unwrap();
    let cross = qv.iter().find(|q| q.l != q.m).unwrap();
    let d_ok = (diag.rate - target).abs() <= SE_BAND * diag.se;
    let c_ok = cross.rate.abs() <= SE_BAND * cross.se;
    detail(format!("limit N=8, dt=5e-5, T=0.5, {lp} paths: QV rate {:.3} +- {:.3} vs 8 nu pi^2 = {target:.3} {}", diag.rate, diag.se, ok(d_ok)));
    detail(format!("limit cross QV {}x{}: {:.3} +- {:.3} vs 0 {}", cross.l, cross.m, cross.rate, cross.se, ok(c_ok)));
    let tp = ctx.size(40, 3);
    let tr = cfg(&format!(
        "system = transport\nnu = 1.2\nn = 24\ndt = 5e-4\nt_end = 0.25\nrecord_stride = 50\npaths = {tp}\nseed = {SEED}\nobservables = 1,0 0,1\n"
    ));
    let qt = qv_estimates(&tr, &run_ensemble(&tr).unwrap()).unwrap();
    let td = qt.iter().find(|q| q.l == q.m && q.l == "w(1,0)").unwrap();
    let rel = (td.rate - target).abs() / target;
    let t_ok = rel <= C6_TRANSPORT_REL;
    detail(format!("transport N=24, dt=5e-4, T=0.25, {tp} paths: QV rate {:.3} +- {:.3}, relative error {rel:.3} (tol {C6_TRANSPORT_REL}) {}", td.rate, td.se, ok(t_ok)));
    Verdict { pass: d_ok && c_ok && t_ok, summary: format!("limit diag {}, cross {}, transport {}", ok(d_ok), ok(c_ok), ok(t_ok)) }
}

fn c7(ctx: &Ctx) -> Verdict {
    let paths = ctx.size(C7_PATHS, 20);
    // dt = 2^-10, records every 2^-7
    let c = cfg(&format!(
        "system = transport\nnu = 1.2\nn = 9\ndt = 0.0009765625\nt_end = 1\nrecord_stride = 8\npaths = {paths}\nseed = {SEED}\nobservables = 1,0\n"
    ));
    let recs = run_ensemble(&c).unwrap();
    let p = observable_paths(&recs, m(1, 0)).unwrap();
    let scan = increment_moment_scan(&p, c.record_dt(), &[1, 2, 4, 8, 16], 4).unwrap();
    for r in &scan.rows {
        detail(format!("gap {:.6}: E|dw|^4 = {:.4e} +- {:.2e}", r.gap, r.moment, r.se));
    }
    let first = (scan.rows[1].moment / scan.rows[0].moment).ln() / 2f64.ln();
    detail(format!("transport N=9, nu=1.2, {paths} paths, observable w(1,0); slope of the first gap pair {first:.3}"));
    let pass = scan.slope >= C7_MIN_SLOPE;
    Verdict { pass, summary: format!("log-log slope {:.3} over gaps 2^-7..2^-3 (need >= {C7_MIN_SLOPE})", scan.slope) }
}

fn c8(_: &Ctx) -> Verdict {
    let t = drift_tail(&C8_NS, C8_DELTA, 2 * C8_NS[3]).unwrap();
    for (n, v) in &t.values {
        detail(format!("T({n}) = {v:.6e}"));
    }
    detail(format!("constant part {:.6e}, modelled above |j| = {}: {:.3e}", t.total, t.j_max, t.modelled_part));
    let dec = t.values.windows(2).all(|w| w[1].1 < w[0].1);
    let ratio = t.values[3].1 / t.values[0].1;
    Verdict { pass: dec && ratio < C8_RATIO, summary: format!("strictly decreasing: {dec}, T(32)/T(4) = {ratio:.4} (need < {C8_RATIO})") }
}

fn c9(_: &Ctx) -> Verdict {
    let r = constants_report(C9_TOL, 64).unwrap();
    detail(format!("S = {:.12} +- {:.2e} (radius {}), closed form {:.12}", r.s, r.s_bound, r.s_radius, r.s_closed_form));
    for b in &r.brute_force {
        detail(format!("partial sum R = {}: |S - P(R) - pi/R^2| = {:.3e} <= {:.3e} {}", b.radius, b.deviation, b.bound, ok(b.pass)));
    }
    let th = &r.thresholds;
    detail(format!("threshold (lattice S) = {:.10}", th.lattice_s));
    detail(format!("threshold (S = 4 pi) = {} vs reference {} {}", th.four_pi_printed, th.reference_printed, ok(th.reference_match)));
    let s_ok = r.certified && (r.s - C9_S_APPROX).abs() < 5e-6 && r.closed_form_agrees && r.brute_force.iter().all(|b| b.pass);
    Verdict {
        pass: s_ok && th.reference_match,
        summary: format!("S certified and cross-checked: {}; printed 4 pi threshold matches reference: {}", ok(s_ok), ok(th.reference_match)),
    }
}

fn c10(ctx: &Ctx) -> Verdict {
    let paths = ctx.size(C10_PATHS, 8);
    let base = format!("nu = 1.2\ndt = 2e-3\nt_end = 0.3\nrecord_stride = 5\npaths = {paths}\nseed = {SEED}\nobservables = 1,0\nmax_lag = 0.1\nlag_mode = 1,0\n");
    let limit = cfg(&format!("{base}system = limit\nn = {C10_LIMIT_N}\n"));
    let lr = run_ensemble(&limit).unwrap();
    detail(format!("reference: limit N={C10_LIMIT_N}; {paths} paths, T=0.3, lags 0..0.1 step 0.01 (heuristic)"));
    let mut dists = Vec::new();
    let mut last_overlap = false;
    for n in C10_NS {
        let c = cfg(&format!("{base}system = transport\nn = {n}\n"));
        let (cmp, _) = compare_ensembles(&c, &run_ensemble(&c).unwrap(), &lr).unwrap();
        detail(format!("transport N={n}: distance {:.4e} +- {:.2e}, bands overlap {}", cmp.distance, cmp.distance_se, cmp.bands_overlap));
        dists.push(cmp.distance);
        last_overlap = cmp.bands_overlap;
    }
    let mono = dists.windows(2).all(|w| w[1] < w[0]);
    Verdict { pass: mono && last_overlap, summary: format!("heuristic: distance decreasing {}, overlap at N=48 {}", ok(mono), ok(last_overlap)) }
}

type Criterion = (u32, &'static str, f64, fn(&Ctx) -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "identity suite", C1_BUDGET, c1),
        (2, "H-coefficient oracle", C2_BUDGET, c2),
        (3, "drift oracles", C3_BUDGET, c3),
        (4, "Parseval and centering", C4_BUDGET, c4),
        (8, "b_N Cauchy tail", C8_BUDGET, c8),
        (9, "constants", C9_BUDGET, c9),
        (6, "quadratic variation", C6_BUDGET, c6),
        (7, "increment scaling", C7_BUDGET, c7),
        (5, "stationarity", C5_BUDGET, c5),
        (10, "convergence probe", C10_BUDGET, c10),
    ];
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let ctx = Ctx { smoke: std::env::var("ACCEPTANCE_SMOKE").is_ok_and(|v| v == "1") };
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if ctx.smoke {
        println!("SMOKE RUN: reduced ensembles, verdicts are not acceptance results");
    }
    println!("acceptance: {} worker thread(s)", rayon::current_num_threads());
    let mut results = Vec::new();
    for (id, name, budget, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        println!("criterion {id} [{name}]");
        let start = Instant::now();
        let v = f(&ctx);
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs < budget;
        let pass = v.pass && in_time;
        println!(
            "{} criterion {id:>2} [{name}]: {}; runtime {secs:.1} s (budget {budget:.0} s{})",
            if pass { "PASS" } else { "FAIL" },
            v.summary,
            if in_time { "" } else { ", exceeded" }
        );
        let _ = std::io::stdout().flush();
        results.push((id, pass));
    }
    let passed = results.iter().filter(|r| r.1).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if strict && passed < results.len() {
        std::process::exit(1);
    }
}
