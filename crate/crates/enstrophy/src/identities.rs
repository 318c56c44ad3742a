//! The algebraic identity suite: every exact relation between the lattice
//! sums, noise matrices, H-coefficients and drift evaluators, checked to
//! rounding level.

use std::f64::consts::PI;

use enstrophy_core::basis::{quadratic_form_q, RealSpectralField};
use enstrophy_core::dynamics::{ito_correction, noise_couplings, NoiseKind};
use enstrophy_core::lattice::{
    eps_inv_sq, lattice_sum_s, mode_set, sum_coupling_sq, SetKind, S_CLOSED_FORM,
};
use enstrophy_core::measure::{sample_white_noise, splitmix64, SeededSampler};
use enstrophy_core::nonlinear::{galerkin_drift, h_coeff, h_coeff_sq, ConvolutionDrift, DriftEngine, HCoefficientTable};
use enstrophy_core::Result;
use serde::Serialize;

use crate::pseudospectral::PseudospectralDrift;

/// One checked identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityRow {
    /// Short identifier.
    pub name: &'static str,
    /// What was compared, and over which range.
    pub detail: String,
    /// Largest observed error (relative or absolute, per `detail`).
    pub max_error: f64,
    /// Tolerance.
    pub tolerance: f64,
    /// `max_error <= tolerance`.
    pub pass: bool,
}

fn row(name: &'static str, detail: String, max_error: f64, tolerance: f64) -> IdentityRow {
    IdentityRow { name, detail, max_error, tolerance, pass: max_error <= tolerance }
}

/// Largest `|l|` in the coupling-sum rows.
pub const COUPLING_L_MAX: u32 = 8;
/// Cutoffs `1..=COUPLING_N_MAX` in the coupling-sum rows.
pub const COUPLING_N_MAX: u32 = 64;
/// Cutoffs `1..=Q_N_MAX` in the isotropy row.
pub const Q_N_MAX: u32 = 32;
/// Random points in the isotropy row.
pub const Q_POINTS: usize = 100;
/// Viscosity used in the Ito-correction row.
pub const ITO_NU: f64 = 1.2;

/// Uniform points of the unit square from a seed.
pub fn random_points(seed: u64, count: usize) -> Vec<[f64; 2]> {
    let mut s = seed;
    let mut u = || (splitmix64(&mut s) >> 11) as f64 / (1u64 << 53) as f64;
    (0..count).map(|_| [u(), u()]).collect()
}

/// `max_l max_N |Sum_k C_{k,l}^2 - eps^{-2}|l|^2/2| / target` over `|l| <= 8`, `N <= 64`.
pub fn coupling_sum_error(kind: SetKind) -> Result<f64> {
    let ls = mode_set(COUPLING_L_MAX, SetKind::Full)?;
    let mut worst = 0.0f64;
    for n in 1..=COUPLING_N_MAX {
        if mode_set(n, kind)?.is_empty() {
            continue;
        }
        let e = eps_inv_sq(n, kind)?;
        for &l in ls.members() {
            let target = 0.5 * e * l.norm_sq() as f64;
            let got = sum_coupling_sq(l, n, kind)?;
            worst = worst.max((got - target).abs() / target);
        }
    }
    Ok(worst)
}

/// `max |Q_N(x) - eps_N^{-2} I / 4|` over random points and `N <= 32`.
pub fn q_isotropy_error(seed: u64) -> Result<f64> {
    let pts = random_points(seed, Q_POINTS);
    let mut worst = 0.0f64;
    for n in 1..=Q_N_MAX {
        let d = 0.25 * eps_inv_sq(n, SetKind::Full)?;
        for &x in &pts {
            let q = quadratic_form_q(n, x)?;
            let err = [(q[0][0] - d), q[0][1], q[1][0], (q[1][1] - d)].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

/// `max_j |correction_j + 4 nu pi^2 |j|^2 <w, e_j>|` on `Lambda_{N/3}` for `fields` white-noise samples.
pub fn ito_correction_error(n: u32, nu: f64, seed: u64, fields: u64) -> Result<f64> {
    let safe = mode_set((n / 3).max(1), SetKind::Full)?;
    let mut worst = 0.0f64;
    for p in 0..fields {
        let w = sample_white_noise(n, &SeededSampler::new(seed, p))?;
        let c = ito_correction(&w, nu, NoiseKind::Third)?;
        for &j in safe.members() {
            let want = -4.0 * nu * PI * PI * j.norm_sq() as f64 * w.get(j);
            worst = worst.max((c.get(j) - want).abs());
        }
    }
    Ok(worst)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_diff(a: &RealSpectralField, b: &RealSpectralField) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Run the whole suite; `n` is the cutoff of the operator rows.
pub fn run_suite(n: u32, seed: u64) -> Result<Vec<IdentityRow>> {
    let n = n.max(3);
    let mut rows = Vec::new();
    rows.push(row(
        "coupling_sum_full",
        format!("Sum_k C_kl^2 = eps^-2 |l|^2 / 2, relative, |l| <= {COUPLING_L_MAX}, N <= {COUPLING_N_MAX}, k in Lambda_N"),
        coupling_sum_error(SetKind::Full)?,
        1e-12,
    ));
    rows.push(row(
        "coupling_sum_third",
        format!("same over Gamma_N with eps~_N, N in 3..={COUPLING_N_MAX}"),
        coupling_sum_error(SetKind::Third)?,
        1e-12,
    ));
    rows.push(row(
        "q_isotropy",
        format!("Q_N(x) = eps_N^-2 I / 4, absolute, {Q_POINTS} random points, N <= {Q_N_MAX}"),
        q_isotropy_error(seed)?,
        1e-12,
    ));
    rows.push(row(
        "ito_correction_safe_band",
        format!("4 nu eps~^2 Sum_k A_k A_k w = -4 nu pi^2 |j|^2 w_j on Lambda_{}, N = {n}, nu = {ITO_NU}", n / 3),
        ito_correction_error(n, ITO_NU, seed, 3)?,
        1e-10,
    ));

    let mats = noise_couplings(n, NoiseKind::Third)?;
    let modes = mats[0].modes().clone();
    let mut anti = 0.0f64;
    for a in &mats {
        for &(r, c, v) in a.entries() {
            let (m, l) = (modes.members()[r as usize], modes.members()[c as usize]);
            anti = anti.max((v + a.get(l, m)).abs());
        }
    }
    rows.push(row("noise_antisymmetry", format!("A_k[m,l] = -A_k[l,m], k in Gamma_{n}"), anti, 0.0));

    let len = modes.len();
    let (mut cons, mut nsd) = (0.0f64, f64::NEG_INFINITY);
    let (mut t1, mut t2) = (vec![0.0; len], vec![0.0; len]);
    for p in 0..20 {
        let w = sample_white_noise(n, &SeededSampler::new(seed ^ 0x1d, p))?;
        let x = w.coeffs();
        let norm = dot(x, x);
        let mut quad = 0.0;
        for a in &mats {
            a.apply_into(x, &mut t1);
            cons = cons.max(dot(&t1, x).abs() / norm);
            a.apply_into(&t1, &mut t2);
            quad += dot(&t2, x);
        }
        nsd = nsd.max(quad / norm);
    }
    rows.push(row("noise_energy_conservation", format!("<A_k w, w> / |w|^2, k in Gamma_{n}, 20 fields"), cons, 1e-12));
    rows.push(row("noise_square_nsd", format!("Rayleigh quotient of Sum_k A_k^2 <= 0, 20 fields, N = {n}"), nsd.max(0.0), 1e-12));

    let mut nest = 0.0f64;
    for m in 1..=n {
        if mode_set(m, SetKind::Full)?.members() != mode_set(3 * m, SetKind::Third)?.members() {
            nest += 1.0;
        }
    }
    rows.push(row("third_ball_nesting", format!("Lambda_M = Gamma_3M as ordered sets, M <= {n}; error counts mismatches"), nest, 0.0));

    let (mut sq, mut conj) = (0.0f64, 0.0f64);
    for &j in modes.members() {
        let t = HCoefficientTable::build(j, n)?;
        for &(k, l, h) in t.entries() {
            let s = h_coeff_sq(j, k, l);
            sq = sq.max((h.norm_sqr() - s).abs() / s.max(1.0));
            conj = conj.max((h_coeff(j, -k, -l) - h.conj()).norm()).max((h_coeff(j, l, k) - h).norm());
        }
    }
    rows.push(row("h_squared_magnitude", format!("|h(j,k,l)|^2 against the closed square, relative, j,k,l in Lambda_{n}"), sq, 1e-12));
    rows.push(row("h_symmetry", format!("h(j,l,k) = h(j,k,l) and h(j,-k,-l) = conj h(j,k,l), j,k,l in Lambda_{n}"), conj, 1e-12));

    let mut conv = ConvolutionDrift::new(n)?;
    let mut fft = PseudospectralDrift::new(n)?;
    let ng = n.min(16);
    let (mut e_fft, mut e_tab, mut orth) = (0.0f64, 0.0f64, 0.0f64);
    for p in 0..5 {
        let w = sample_white_noise(n, &SeededSampler::new(seed ^ 0x2e, p))?;
        let a = conv.drift_real(&w)?;
        e_fft = e_fft.max(max_diff(&a, &fft.drift_real(&w)?));
        let nw = w.norm_sq();
        orth = orth.max(dot(a.coeffs(), w.coeffs()).abs() / (nw * nw));
        let wg = sample_white_noise(ng, &SeededSampler::new(seed ^ 0x2e, p))?;
        e_tab = e_tab.max(max_diff(&galerkin_drift(&wg)?, &ConvolutionDrift::new(ng)?.drift_real(&wg)?));
    }
    rows.push(row("drift_fft_vs_convolution", format!("max |b_N| difference, 5 fields, N = {n}"), e_fft, 1e-10));
    rows.push(row("drift_table_vs_convolution", format!("max |b_N| difference, coefficient tables vs triads, N = {ng}"), e_tab, 1e-10));
    rows.push(row("drift_enstrophy_orthogonality", format!("|<b_N(w), w>| / |w|^4, 5 fields, N = {n}"), orth, 1e-10));

    let s = lattice_sum_s(1e-12)?;
    rows.push(row(
        "lattice_sum_closed_form",
        format!("lattice sum S (radius {}) against 2 pi^2 G / 3, relative", s.radius),
        (s.value - S_CLOSED_FORM).abs() / S_CLOSED_FORM,
        1e-10,
    ));
    Ok(rows)
}

/// True when every row passes.
pub fn all_pass(rows: &[IdentityRow]) -> bool {
    rows.iter().all(|r| r.pass)
}

/// Fixed-width text table of the rows.
pub fn format_table(rows: &[IdentityRow]) -> String {
    let w = rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(8);
    let mut s = format!("{:<w$}  {:>10}  {:>9}  result  detail\n", "identity", "max_error", "tolerance");
    for r in rows {
        s.push_str(&format!(
            "{:<w$}  {:>10.3e}  {:>9.1e}  {:<6}  {}\n",
            r.name,
            r.max_error,
            r.tolerance,
            if r.pass { "pass" } else { "FAIL" },
            r.detail
        ));
    }
    s
}

