//! Scaling constants: the lattice sum `S`, the `eps_N` tables and the
//! viscosity thresholds under both conventions for `S`.

use std::f64::consts::PI;

use enstrophy_core::lattice::{
    eps, gauss_circle_count, lattice_sum_s, mode_set, partial_sum_s, tail_remainder_bound, viscosity_threshold,
    SetKind, S_CLOSED_FORM,
};
use enstrophy_core::Result;
use serde::Serialize;

/// Threshold value printed in the reference text for `S = 4 pi`.
pub const REFERENCE_FOUR_PI_THRESHOLD: &str = "1.6062760546";

/// Radii of the brute-force cross-check.
pub const BRUTE_FORCE_RADII: [u64; 3] = [250, 500, 1000];

/// One row of the brute-force cross-check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BruteForceRow {
    /// Partial-sum radius `R`.
    pub radius: u64,
    /// `Sum_{0 < |k| <= R} |k|^{-4}`.
    pub partial_sum: f64,
    /// `|S - partial - pi/R^2|`.
    pub deviation: f64,
    /// `|E(R)|/R^4` plus the Stieltjes remainder and the bound on `S`,
    /// `E(R)` the Gauss circle error.
    pub bound: f64,
    /// `deviation <= bound`.
    pub pass: bool,
}

/// `eps_N` and `eps~_N` at one cutoff.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsRow {
    /// Cutoff.
    pub n: u32,
    /// `|Lambda_N|`.
    pub lambda_size: usize,
    /// `eps_N`.
    pub eps: f64,
    /// `|Gamma_N|`.
    pub gamma_size: usize,
    /// `eps~_N`; absent while `Gamma_N` is empty.
    pub eps_tilde: Option<f64>,
}

/// Viscosity thresholds `2 sqrt(5 S) / pi^2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    /// With the lattice value of `S`.
    pub lattice_s: f64,
    /// With `S = 4 pi`.
    pub four_pi: f64,
    /// `four_pi` to ten decimals.
    pub four_pi_printed: String,
    /// The reference text's value.
    pub reference_printed: &'static str,
    /// Whether the two printed strings agree.
    pub reference_match: bool,
}

/// Output of the `constants` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantsReport {
    /// Requested relative tolerance on `S`.
    pub rel_tol: f64,
    /// Lattice value of `S`.
    pub s: f64,
    /// Certified bound on `|S - s|`.
    pub s_bound: f64,
    /// Radius of the explicit sum.
    pub s_radius: u64,
    /// `s_bound <= rel_tol * s`.
    pub certified: bool,
    /// `(2 pi^2 / 3) G`.
    pub s_closed_form: f64,
    /// `|s - s_closed_form| <= s_bound` (with one ulp of slack).
    pub closed_form_agrees: bool,
    /// Direct partial sums.
    pub brute_force: Vec<BruteForceRow>,
    /// Scaling table.
    pub eps_table: Vec<EpsRow>,
    /// Thresholds.
    pub thresholds: Thresholds,
    /// All checks above pass; the printed-digit comparison is informational.
    pub all_pass: bool,
}

/// Compute the report with `S` to relative tolerance `rel_tol` and `eps` rows for `1..=n_max`.
pub fn constants_report(rel_tol: f64, n_max: u32) -> Result<ConstantsReport> {
    let s = lattice_sum_s(rel_tol)?;
    let brute_force: Vec<BruteForceRow> = BRUTE_FORCE_RADII
        .iter()
        .map(|&r| {
            let rf = r as f64;
            let partial = partial_sum_s(r);
            let e = gauss_circle_count(r) as f64 - PI * rf * rf;
            let deviation = (s.value - partial - PI / (rf * rf)).abs();
            let bound = e.abs() / rf.powi(4) + tail_remainder_bound(rf) + s.tail_bound;
            BruteForceRow { radius: r, partial_sum: partial, deviation, bound, pass: deviation <= bound }
        })
        .collect();
    let mut eps_table = Vec::new();
    for n in 1..=n_max {
        let gamma = mode_set(n, SetKind::Third)?.len();
        eps_table.push(EpsRow {
            n,
            lambda_size: mode_set(n, SetKind::Full)?.len(),
            eps: eps(n, SetKind::Full)?,
            gamma_size: gamma,
            eps_tilde: if gamma > 0 { Some(eps(n, SetKind::Third)?) } else { None },
        });
    }
    let four_pi = viscosity_threshold(4.0 * PI);
    let printed = format!("{four_pi:.10}");
    let certified = s.tail_bound <= rel_tol * s.value;
    let closed_form_agrees = (s.value - S_CLOSED_FORM).abs() <= s.tail_bound + f64::EPSILON * S_CLOSED_FORM;
    let all_pass = certified && closed_form_agrees && brute_force.iter().all(|b| b.pass);
    Ok(ConstantsReport {
        rel_tol,
        s: s.value,
        s_bound: s.tail_bound,
        s_radius: s.radius,
        certified,
        s_closed_form: S_CLOSED_FORM,
        closed_form_agrees,
        brute_force,
        eps_table,
        thresholds: Thresholds {
            lattice_s: viscosity_threshold(s.value),
            four_pi,
            reference_match: printed == REFERENCE_FOUR_PI_THRESHOLD,
            four_pi_printed: printed,
            reference_printed: REFERENCE_FOUR_PI_THRESHOLD,
        },
        all_pass,
    })
}
