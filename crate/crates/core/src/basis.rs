//! Real and complex Fourier bases on the unit torus, the noise fields
//! `sigma_k`, Biot-Savart in Fourier space and the Galerkin matrices of
//! `sigma_k . grad`.
//!
//! Real basis: `e_k = sqrt2 cos(2 pi k.x)` for `k` in `Z^2_+` and
//! `e_k = sqrt2 sin(2 pi k.x)` otherwise. Complex basis: `e~_k = exp(2 pi i k.x)`.
//! For `j` in `Z^2_+` the complex coefficients are
//! `w_j = (a_j + i a_{-j}) / sqrt2` and `w_{-j} = conj(w_j)`.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;

use crate::lattice::{coupling, mode_set, ModeIndex, ModeSet, SetKind};
use crate::{Error, Result};

/// A point of `[0,1)^2`.
pub type Point = [f64; 2];

fn phase(k: ModeIndex, x: Point) -> f64 {
    let t = k.k1() as f64 * x[0] + k.k2() as f64 * x[1];
    2.0 * PI * (t - libm::round(t))
}

/// `e_k(x)`.
pub fn eval_basis(k: ModeIndex, x: Point) -> f64 {
    let p = phase(k, x);
    if k.is_positive() {
        SQRT_2 * libm::cos(p)
    } else {
        SQRT_2 * libm::sin(p)
    }
}

/// `grad e_k(x) = 2 pi k e_{-k}(x)`.
pub fn grad_basis(k: ModeIndex, x: Point) -> [f64; 2] {
    let s = 2.0 * PI * eval_basis(-k, x);
    [s * k.k1() as f64, s * k.k2() as f64]
}

/// `e~_k(x) = exp(2 pi i k.x)`.
pub fn eval_complex_basis(k: ModeIndex, x: Point) -> Complex64 {
    let p = phase(k, x);
    Complex64::new(libm::cos(p), libm::sin(p))
}

/// `sigma_k(x) = (1/sqrt2) (k_perp / |k|^2) e_k(x)`.
pub fn sigma_eval(k: ModeIndex, x: Point) -> [f64; 2] {
    let s = FRAC_1_SQRT_2 * eval_basis(k, x) / k.norm_sq() as f64;
    let p = k.perp();
    [s * p[0] as f64, s * p[1] as f64]
}

/// `Q_N(x) = Sum_{k in Lambda_N} sigma_k(x) (x) sigma_k(x)`.
pub fn quadratic_form_q(n: u32, x: Point) -> Result<[[f64; 2]; 2]> {
    let set = mode_set(n, SetKind::Full)?;
    let mut q = [[0.0; 2]; 2];
    for &k in set.members() {
        let s = sigma_eval(k, x);
        for a in 0..2 {
            for b in 0..2 {
                q[a][b] += s[a] * s[b];
            }
        }
    }
    Ok(q)
}

/// Vorticity on the real basis over `Lambda_N`, stored in mode-set order.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSpectralField {
    modes: Arc<ModeSet>,
    coeffs: Vec<f64>,
}

impl RealSpectralField {
    /// The zero field on `Lambda_N`.
    pub fn zeros(n: u32) -> Result<Self> {
        let modes = Arc::new(mode_set(n, SetKind::Full)?);
        let coeffs = vec![0.0; modes.len()];
        Ok(RealSpectralField { modes, coeffs })
    }

    /// Wrap coefficients given in the order of `modes`, which must be a full set.
    pub fn from_coeffs(modes: Arc<ModeSet>, coeffs: Vec<f64>) -> Result<Self> {
        if modes.kind() != SetKind::Full {
            return Err(Error::InvalidConfig("field needs a full mode set".into()));
        }
        if coeffs.len() != modes.len() {
            return Err(Error::LengthMismatch { expected: modes.len(), got: coeffs.len() });
        }
        Ok(RealSpectralField { modes, coeffs })
    }

    /// A field with a single unit coefficient.
    pub fn single(n: u32, k: ModeIndex) -> Result<Self> {
        let mut f = Self::zeros(n)?;
        f.set(k, 1.0)?;
        Ok(f)
    }

    /// Cutoff `N`.
    pub fn cutoff(&self) -> u32 {
        self.modes.cutoff()
    }

    /// The underlying mode set.
    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    /// Coefficients in mode order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Mutable coefficients in mode order.
    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// `<w, e_k>`, zero outside the support.
    pub fn get(&self, k: ModeIndex) -> f64 {
        self.modes.index_of(k).map_or(0.0, |i| self.coeffs[i])
    }

    /// Set `<w, e_k>`.
    pub fn set(&mut self, k: ModeIndex, v: f64) -> Result<()> {
        let i = self.modes.index_of(k).ok_or(Error::OutsideCutoff {
            k1: k.k1(),
            k2: k.k2(),
            cutoff: self.cutoff(),
        })?;
        self.coeffs[i] = v;
        Ok(())
    }

    /// `(mode, coefficient)` pairs in order.
    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, f64)> + '_ {
        self.modes.members().iter().copied().zip(self.coeffs.iter().copied())
    }

    /// `||w||^2_{L^2} = Sum a_k^2`.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|a| a * a).sum()
    }

    /// `<w, v>_{L^2}`.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        if self.cutoff() != other.cutoff() {
            return Err(Error::CutoffMismatch(self.cutoff(), other.cutoff()));
        }
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum())
    }

    /// Pointwise value `Sum a_k e_k(x)`.
    pub fn eval(&self, x: Point) -> f64 {
        self.iter().map(|(k, a)| a * eval_basis(k, x)).sum()
    }
}

/// Coefficients on the complex basis over `{0} u Lambda_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSpectralField {
    modes: Arc<ModeSet>,
    mean: Complex64,
    coeffs: Vec<Complex64>,
}

impl ComplexSpectralField {
    /// The zero field.
    pub fn zeros(modes: Arc<ModeSet>) -> Self {
        let coeffs = vec![Complex64::new(0.0, 0.0); modes.len()];
        ComplexSpectralField { modes, mean: Complex64::new(0.0, 0.0), coeffs }
    }

    /// Wrap coefficients in mode order plus the `k = 0` coefficient.
    pub fn from_coeffs(modes: Arc<ModeSet>, mean: Complex64, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != modes.len() {
            return Err(Error::LengthMismatch { expected: modes.len(), got: coeffs.len() });
        }
        Ok(ComplexSpectralField { modes, mean, coeffs })
    }

    /// Cutoff `N`.
    pub fn cutoff(&self) -> u32 {
        self.modes.cutoff()
    }

    /// The underlying mode set.
    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    /// Coefficient of `e~_0`.
    pub fn mean(&self) -> Complex64 {
        self.mean
    }

    /// Set the coefficient of `e~_0`.
    pub fn set_mean(&mut self, v: Complex64) {
        self.mean = v;
    }

    /// Coefficients in mode order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Mutable coefficients in mode order.
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of `e~_k`, zero outside the support.
    pub fn get(&self, k: ModeIndex) -> Complex64 {
        self.modes.index_of(k).map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// Set the coefficient of `e~_k`.
    pub fn set(&mut self, k: ModeIndex, v: Complex64) -> Result<()> {
        let i = self.modes.index_of(k).ok_or(Error::OutsideCutoff {
            k1: k.k1(),
            k2: k.k2(),
            cutoff: self.cutoff(),
        })?;
        self.coeffs[i] = v;
        Ok(())
    }

    /// `Sum |c_k|^2` including the mean.
    pub fn norm_sq(&self) -> f64 {
        self.mean.norm_sqr() + self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Pointwise value `Sum c_k e~_k(x)`.
    pub fn eval(&self, x: Point) -> Complex64 {
        let mut v = self.mean;
        for (&k, &c) in self.modes.members().iter().zip(&self.coeffs) {
            v += c * eval_complex_basis(k, x);
        }
        v
    }
}

/// Index of `-k` for every position of a negation-closed set.
pub fn negation_table(modes: &ModeSet) -> Vec<usize> {
    modes
        .members()
        .iter()
        .map(|&k| modes.index_of(-k).expect("mode sets are closed under negation"))
        .collect()
}

/// Real coefficients to complex coefficients, both in mode order.
pub fn real_to_complex_slice(modes: &ModeSet, real: &[f64], out: &mut [Complex64]) {
    for (i, &k) in modes.members().iter().enumerate() {
        if k.is_positive() {
            let j = modes.index_of(-k).expect("negation closed");
            let w = Complex64::new(real[i] * FRAC_1_SQRT_2, real[j] * FRAC_1_SQRT_2);
            out[i] = w;
            out[j] = w.conj();
        }
    }
}

/// Complex coefficients to real ones, averaging the two conjugate copies.
pub fn complex_to_real_slice(modes: &ModeSet, cplx: &[Complex64], out: &mut [f64]) {
    for (i, &k) in modes.members().iter().enumerate() {
        if k.is_positive() {
            let j = modes.index_of(-k).expect("negation closed");
            let w = (cplx[i] + cplx[j].conj()) * 0.5;
            out[i] = SQRT_2 * w.re;
            out[j] = SQRT_2 * w.im;
        }
    }
}

/// Convert a real field to its complex coefficients.
pub fn real_to_complex(f: &RealSpectralField) -> ComplexSpectralField {
    let mut out = ComplexSpectralField::zeros(f.modes.clone());
    real_to_complex_slice(&f.modes, &f.coeffs, &mut out.coeffs);
    out
}

/// Tolerance used by [`complex_to_real`] for conjugate symmetry and the mean.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Convert conjugate-symmetric complex coefficients back to the real basis.
pub fn complex_to_real(f: &ComplexSpectralField) -> Result<RealSpectralField> {
    let scale = f.coeffs.iter().fold(1.0f64, |m, c| m.max(c.norm()));
    if f.mean.norm() > SYMMETRY_TOL * scale {
        return Err(Error::NonzeroMean(f.mean.norm()));
    }
    let mut worst: Option<(ModeIndex, f64)> = None;
    for (i, &k) in f.modes.members().iter().enumerate() {
        if k.is_positive() {
            let j = f.modes.index_of(-k).expect("negation closed");
            let r = (f.coeffs[i] - f.coeffs[j].conj()).norm();
            if worst.map_or(true, |(_, w)| r > w) {
                worst = Some((k, r));
            }
        }
    }
    if let Some((k, r)) = worst {
        if r > SYMMETRY_TOL * scale {
            return Err(Error::ConjugateSymmetry { k1: k.k1(), k2: k.k2(), residual: r });
        }
    }
    let mut coeffs = vec![0.0; f.modes.len()];
    complex_to_real_slice(&f.modes, &f.coeffs, &mut coeffs);
    RealSpectralField::from_coeffs(f.modes.clone(), coeffs)
}

/// Velocity `u^(k) = 2 pi i (k_perp / |k|^2) w^(k)`, one field per component.
pub fn biot_savart(w: &ComplexSpectralField) -> Result<(ComplexSpectralField, ComplexSpectralField)> {
    let scale = w.coeffs.iter().fold(1.0f64, |m, c| m.max(c.norm()));
    if w.mean.norm() > SYMMETRY_TOL * scale {
        return Err(Error::NonzeroMean(w.mean.norm()));
    }
    let mut u1 = ComplexSpectralField::zeros(w.modes.clone());
    let mut u2 = ComplexSpectralField::zeros(w.modes.clone());
    for (i, &k) in w.modes.members().iter().enumerate() {
        let p = k.perp();
        let f = Complex64::new(0.0, 2.0 * PI / k.norm_sq() as f64) * w.coeffs[i];
        u1.coeffs[i] = f * p[0] as f64;
        u2.coeffs[i] = f * p[1] as f64;
    }
    Ok((u1, u2))
}

/// A term of a product expansion: `None` stands for the constant function 1.
pub type ProductTerm = (Option<ModeIndex>, f64);

/// `e_a e_b` expanded exactly on `{1} u {e_m}`; at most two terms.
///
/// Uses the product-to-sum identities, so every coefficient is `+-1/sqrt2`
/// on a mode or `+-1` on the constant.
pub fn product_expansion(a: ModeIndex, b: ModeIndex) -> Vec<ProductTerm> {
    // e_a = sqrt2 trig(2 pi a.x) with trig = cos on Z+ and sin on Z-.
    let (ca, cb) = (a.is_positive(), b.is_positive());
    let sum = (a.k1() + b.k1(), a.k2() + b.k2());
    let diff = (a.k1() - b.k1(), a.k2() - b.k2());
    // 2 trig A trig B = s1 * f1(A+B) + s2 * f2(A-B)
    let (f_sum, s_sum, f_diff, s_diff) = match (ca, cb) {
        (true, true) => (Trig::Cos, 1.0, Trig::Cos, 1.0),
        (false, false) => (Trig::Cos, -1.0, Trig::Cos, 1.0),
        (false, true) => (Trig::Sin, 1.0, Trig::Sin, 1.0),
        (true, false) => (Trig::Sin, 1.0, Trig::Sin, -1.0),
    };
    let mut out = Vec::with_capacity(2);
    for (f, s, v) in [(f_sum, s_sum, sum), (f_diff, s_diff, diff)] {
        if let Some(t) = trig_term(f, v) {
            out.push((t.0, s * t.1));
        }
    }
    out
}

#[derive(Clone, Copy)]
enum Trig {
    Cos,
    Sin,
}

// trig(2 pi v.x) on the real basis.
fn trig_term(f: Trig, v: (i32, i32)) -> Option<ProductTerm> {
    match ModeIndex::nonzero(v.0, v.1) {
        None => match f {
            Trig::Cos => Some((None, 1.0)),
            Trig::Sin => None,
        },
        Some(m) => match f {
            Trig::Cos => Some((Some(m.positive()), FRAC_1_SQRT_2)),
            Trig::Sin if m.is_positive() => Some((Some(-m), -FRAC_1_SQRT_2)),
            Trig::Sin => Some((Some(m), FRAC_1_SQRT_2)),
        },
    }
}

/// `<e_a e_b, e_m>`, exact.
pub fn product_coefficient(a: ModeIndex, b: ModeIndex, m: ModeIndex) -> f64 {
    product_expansion(a, b)
        .into_iter()
        .filter(|t| t.0 == Some(m))
        .map(|t| t.1)
        .sum()
}

/// Galerkin matrix `A_k[m,l] = <Pi_N(sigma_k . grad e_l), e_m>` on `Lambda_N`.
///
/// Stored as coordinate triples `(row m, column l, value)` sorted by row then
/// column, indices into the mode order of `Lambda_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseCoupling {
    k: ModeIndex,
    modes: Arc<ModeSet>,
    entries: Vec<(u32, u32, f64)>,
}

/// Build `A_k` on `Lambda_N` from `sigma_k . grad e_l = sqrt2 pi C_{k,l} e_k e_{-l}`.
pub fn noise_coupling_matrix(k: ModeIndex, n: u32) -> Result<NoiseCoupling> {
    let modes = Arc::new(mode_set(n, SetKind::Full)?);
    Ok(noise_coupling_on(k, modes))
}

/// As [`noise_coupling_matrix`] on an existing full mode set.
pub fn noise_coupling_on(k: ModeIndex, modes: Arc<ModeSet>) -> NoiseCoupling {
    let mut raw: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for (col, &l) in modes.members().iter().enumerate() {
        let c = coupling(k, l);
        if c == 0.0 {
            continue;
        }
        for (m, v) in product_expansion(k, -l) {
            if let Some(row) = m.and_then(|m| modes.index_of(m)) {
                *raw.entry((row as u32, col as u32)).or_insert(0.0) += SQRT_2 * PI * c * v;
            }
        }
    }
    // Keep the upper triangle and mirror it, so antisymmetry is exact.
    let mut entries = Vec::with_capacity(raw.len());
    for (&(r, c), &v) in &raw {
        if r < c && v != 0.0 {
            entries.push((r, c, v));
            entries.push((c, r, -v));
        }
    }
    entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    NoiseCoupling { k, modes, entries }
}

impl NoiseCoupling {
    /// The noise mode `k`.
    pub fn k(&self) -> ModeIndex {
        self.k
    }

    /// Cutoff `N`.
    pub fn cutoff(&self) -> u32 {
        self.modes.cutoff()
    }

    /// Row and column mode set.
    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    /// Sorted `(row, column, value)` triples.
    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    /// `A_k[m,l]`.
    pub fn get(&self, m: ModeIndex, l: ModeIndex) -> f64 {
        match (self.modes.index_of(m), self.modes.index_of(l)) {
            (Some(r), Some(c)) => self
                .entries
                .binary_search_by(|e| (e.0, e.1).cmp(&(r as u32, c as u32)))
                .map_or(0.0, |i| self.entries[i].2),
            _ => 0.0,
        }
    }

    /// `out = A_k x` on mode-ordered real coefficients.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for &(r, c, v) in &self.entries {
            out[r as usize] += v * x[c as usize];
        }
    }

    /// `A_k x` as a field.
    pub fn apply(&self, w: &RealSpectralField) -> Result<RealSpectralField> {
        if w.cutoff() != self.cutoff() {
            return Err(Error::CutoffMismatch(w.cutoff(), self.cutoff()));
        }
        let mut out = vec![0.0; self.modes.len()];
        self.apply_into(w.coeffs(), &mut out);
        RealSpectralField::from_coeffs(self.modes.clone(), out)
    }
}
