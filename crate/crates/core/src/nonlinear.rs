//! The nonlinear term: `H_phi`, its closed-form Fourier coefficients, the
//! Galerkin drift `b_N`, second moments and the generators.
//!
//! Velocity follows `u^(k) = 2 pi i k_perp / |k|^2 w^(k)`. The drift `b_N` is
//! `Pi_N(u . grad w)` with `<b_N, e_j> = -Sum h(j,k,l) w_k w_l`, where `w_k` is
//! the coefficient of `e~_k` and `h(j,k,l) = Int Int H_{e_j}(x,y) e~_k(x) e~_l(y)`.
//! The vorticity tendency is `-b_N`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::basis::{
    complex_to_real_slice, grad_basis, product_expansion, real_to_complex_slice, Point,
    RealSpectralField,
};
use crate::lattice::{
    coupling, eps_inv_sq, mode_set, partial_sum_s, ModeIndex, ModeSet, Neumaier, SetKind,
    S_CLOSED_FORM,
};
use crate::{Error, Result};

const PI2: f64 = PI * PI;
const PI4: f64 = PI2 * PI2;

/// Biot-Savart kernel truncated to `Lambda_M`:
/// `K_M(z) = -2 pi Sum_{k in Lambda_M} k_perp / |k|^2 sin(2 pi k.z)`.
pub fn kernel_truncated(z: Point, m: u32) -> [f64; 2] {
    let r = m as i64;
    let mut acc = [0.0; 2];
    // Pairs {k, -k} contribute equally; sum over Z^2_+ and double.
    for k1 in 0..=r {
        let lo = if k1 == 0 { 1 } else { -r };
        for k2 in lo..=r {
            let n2 = k1 * k1 + k2 * k2;
            if n2 > r * r {
                continue;
            }
            let t = k1 as f64 * z[0] + k2 as f64 * z[1];
            let s = libm::sin(2.0 * PI * (t - libm::round(t))) / n2 as f64;
            acc[0] += s * k2 as f64;
            acc[1] -= s * k1 as f64;
        }
    }
    [-4.0 * PI * acc[0], -4.0 * PI * acc[1]]
}

/// Empirical envelope for `|K_M(z) - K_{2M}(z)|`.
///
/// Disc partial sums of the singular kernel converge like
/// `M^{-1/2} d^{-3/2}`, `d` the torus distance of `z` from the origin. The
/// constant was fitted over `M` in 8..256 on 2000 random points with
/// `d >= 1/M` (largest observed ratio 8.2) and frozen with a safety factor.
/// Closer to the singularity there is no uniform bound and the envelope is
/// infinite.
pub fn kernel_tail_envelope(z: Point, m: u32) -> f64 {
    let w = |t: f64| libm::fabs(t - libm::round(t));
    let d = libm::hypot(w(z[0]), w(z[1]));
    if d * (m as f64) < 1.0 {
        return f64::INFINITY;
    }
    KERNEL_TAIL_CONSTANT / (libm::sqrt(m as f64) * d * libm::sqrt(d))
}

/// Constant of [`kernel_tail_envelope`].
pub const KERNEL_TAIL_CONSTANT: f64 = 20.0;

/// `H_{e_j}(x,y) = 1/2 K_M(x-y) . (grad e_j(x) - grad e_j(y))`, zero on the diagonal.
pub fn h_phi_eval(j: ModeIndex, x: Point, y: Point, m: u32) -> f64 {
    if x == y {
        return 0.0;
    }
    let k = kernel_truncated([x[0] - y[0], x[1] - y[1]], m);
    let (gx, gy) = (grad_basis(j, x), grad_basis(j, y));
    0.5 * (k[0] * (gx[0] - gy[0]) + k[1] * (gx[1] - gy[1]))
}

/// Bound on `|H_M - H_{2M}|` at `(x,y)` implied by [`kernel_tail_envelope`].
pub fn h_phi_tail_bound(j: ModeIndex, x: Point, y: Point, m: u32) -> f64 {
    let (gx, gy) = (grad_basis(j, x), grad_basis(j, y));
    let d = libm::hypot(gx[0] - gy[0], gx[1] - gy[1]);
    0.5 * kernel_tail_envelope([x[0] - y[0], x[1] - y[1]], m) * d
}

/// `<H_{e_j}, e~_k (x) e~_l>` in closed form.
pub fn h_coeff(j: ModeIndex, k: ModeIndex, l: ModeIndex) -> Complex64 {
    let plus = k.k1() + l.k1() == j.k1() && k.k2() + l.k2() == j.k2();
    let minus = k.k1() + l.k1() == -j.k1() && k.k2() + l.k2() == -j.k2();
    if !plus && !minus {
        return Complex64::new(0.0, 0.0);
    }
    // j . l_perp = l_perp . j
    let a = l.perp_dot(j) as f64 / l.norm_sq() as f64 + k.perp_dot(j) as f64 / k.norm_sq() as f64;
    let v = SQRT_2 * PI2 * a;
    let (dp, dm) = (plus as i32 as f64, minus as i32 as f64);
    if j.is_positive() {
        Complex64::new(v * (dp - dm), 0.0)
    } else {
        Complex64::new(0.0, v * (dp + dm))
    }
}

/// `|h(j,k,l)|^2 = 2 pi^4 1_{j = +-(k+l)} (j . k_perp)^2 (1/|l|^2 - 1/|k|^2)^2`.
pub fn h_coeff_sq(j: ModeIndex, k: ModeIndex, l: ModeIndex) -> f64 {
    let hit = (k.k1() + l.k1() == j.k1() && k.k2() + l.k2() == j.k2())
        || (k.k1() + l.k1() == -j.k1() && k.k2() + l.k2() == -j.k2());
    if !hit {
        return 0.0;
    }
    let jk = k.perp_dot(j) as f64;
    let d = 1.0 / l.norm_sq() as f64 - 1.0 / k.norm_sq() as f64;
    2.0 * PI4 * jk * jk * d * d
}

/// Nonzero coefficients `<H_{e_j}, e~_k (x) e~_l>` with `k, l` in `Lambda_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct HCoefficientTable {
    j: ModeIndex,
    cutoff: u32,
    entries: Vec<(ModeIndex, ModeIndex, Complex64)>,
}

impl HCoefficientTable {
    /// Enumerate `k` in `Lambda_N` with `l = +-j - k`; `O(N^2)`.
    pub fn build(j: ModeIndex, n: u32) -> Result<Self> {
        let set = mode_set(n, SetKind::Full)?;
        let mut entries = Vec::new();
        for &k in set.members() {
            for s in [1, -1] {
                let l = match ModeIndex::nonzero(s * j.k1() - k.k1(), s * j.k2() - k.k2()) {
                    Some(l) if set.contains(l) => l,
                    _ => continue,
                };
                if l.norm_sq() == k.norm_sq() {
                    continue;
                }
                let v = h_coeff(j, k, l);
                if v != Complex64::new(0.0, 0.0) {
                    entries.push((k, l, v));
                }
            }
        }
        Ok(HCoefficientTable { j, cutoff: n, entries })
    }

    /// Output mode `j`.
    pub fn j(&self) -> ModeIndex {
        self.j
    }

    /// Cutoff `N`.
    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// `(k, l, value)` triples in `k` order.
    pub fn entries(&self) -> &[(ModeIndex, ModeIndex, Complex64)] {
        &self.entries
    }

    /// `Sum |h|^2` over stored entries.
    pub fn sq_sum(&self) -> f64 {
        let mut acc = Neumaier::default();
        for e in &self.entries {
            acc.add(e.2.norm_sqr());
        }
        acc.value()
    }

    /// `<w (x) w, H_{e_j}> = Sum h w_k w_l` on complex coefficients in `modes` order.
    pub fn pairing(&self, modes: &ModeSet, w: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(k, l, h) in &self.entries {
            if let (Some(a), Some(b)) = (modes.index_of(k), modes.index_of(l)) {
                acc += h * w[a] * w[b];
            }
        }
        acc
    }
}

/// Cutoff for [`h_coeff_sq_sum`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cutoff {
    /// `k, l` in `Lambda_N`.
    Finite(u32),
    /// All of `Z^2_0`, to relative tolerance `tol`.
    Infinite {
        /// Relative size allowed for the modelled tail.
        tol: f64,
    },
}

// Sum over k in the disc of radius r (all l = +-j - k), optionally with |l| <= r too.
fn h_sq_disc(j: ModeIndex, r: i64, both: bool) -> f64 {
    let (j1, j2) = (j.k1() as i64, j.k2() as i64);
    let mut acc = Neumaier::default();
    for k1 in -r..=r {
        let mut row = 0.0;
        for k2 in -r..=r {
            let nk = k1 * k1 + k2 * k2;
            if nk == 0 || nk > r * r {
                continue;
            }
            let jk = (k2 * j1 - k1 * j2) as f64;
            if jk == 0.0 {
                continue;
            }
            for s in [1i64, -1] {
                let (l1, l2) = (s * j1 - k1, s * j2 - k2);
                let nl = l1 * l1 + l2 * l2;
                if nl == 0 || nl == nk || (both && nl > r * r) {
                    continue;
                }
                let d = 1.0 / nl as f64 - 1.0 / nk as f64;
                row += jk * jk * d * d;
            }
        }
        acc.add(row);
    }
    2.0 * PI4 * acc.value()
}

/// Large-`|k|` model of `Sum_{|k| > r} Sum_l |h|^2`:
/// `2 pi^4 |j|^4 Sum_{|k|>r} |k|^{-4}`, using the closed form of `S`.
fn h_sq_tail_model(j: ModeIndex, r: u64) -> f64 {
    let nj2 = j.norm_sq() as f64;
    2.0 * PI4 * nj2 * nj2 * (S_CLOSED_FORM - partial_sum_s(r))
}

/// `Sum_{k,l} |<H_{e_j}, e~_k (x) e~_l>|^2` as a single lattice sum over `k`.
pub fn h_coeff_sq_sum(j: ModeIndex, cutoff: Cutoff) -> Result<f64> {
    match cutoff {
        Cutoff::Finite(n) => {
            if n == 0 {
                return Err(Error::ZeroCutoff);
            }
            Ok(h_sq_disc(j, n as i64, true))
        }
        Cutoff::Infinite { tol } => {
            if !(tol > 0.0) {
                return Err(Error::MissingTolerance);
            }
            Ok(h_sq_total(j, tol))
        }
    }
}

fn h_sq_total(j: ModeIndex, tol: f64) -> f64 {
    let mut r = 8 * libm::ceil(j.norm()) as u64 + 8;
    loop {
        let inner = h_sq_disc(j, r as i64, false);
        let tail = h_sq_tail_model(j, r);
        // The model error is a small fraction of the tail itself.
        if tail <= tol * inner || r > 1 << 14 {
            return inner + tail;
        }
        r *= 2;
    }
}

/// Result of [`drift_tail`].
#[derive(Clone, Debug, PartialEq)]
pub struct DriftTail {
    /// `(N, T(N))` pairs.
    pub values: Vec<(u32, f64)>,
    /// `A = 2 Sum_j |j|^{-4-2 delta} Sum_{k,l} |h|^2`.
    pub total: f64,
    /// Part of `total` from `|j|` above the explicit range (fitted model).
    pub modelled_part: f64,
    /// Largest `|j|` summed explicitly.
    pub j_max: u32,
}

/// `T(N) = 2 Sum_j |j|^{-4-2 delta} Sum_{(k,l) not in Lambda_N^2} |h(j,k,l)|^2`.
///
/// `j` is summed explicitly up to `j_max >= 2 max N` (beyond which no pair of
/// `Lambda_N` contributes). The remainder of the constant part uses the fit
/// `c |j|^2 log|j| + d |j|^2` over `|j|` in `[j_max/3, j_max]`.
pub fn drift_tail(ns: &[u32], delta: f64, j_max: u32) -> Result<DriftTail> {
    let nmax = ns.iter().copied().max().ok_or_else(|| Error::Degenerate("no cutoffs".into()))?;
    if nmax == 0 {
        return Err(Error::ZeroCutoff);
    }
    if j_max < 2 * nmax || !(delta > 0.0) {
        return Err(Error::InvalidConfig("need j_max >= 2 max N and delta > 0".into()));
    }
    let jm = j_max as i64;
    let weight = |j: ModeIndex| libm::pow(j.norm_sq() as f64, -(2.0 + delta));
    let mut total = Neumaier::default();
    let mut fit = FitAcc::default();
    let mut inside = vec![Neumaier::default(); ns.len()];
    // Orbit representatives a >= b >= 0 under the 8 lattice symmetries.
    for a in 1..=jm {
        for b in 0..=a {
            if a * a + b * b > jm * jm {
                break;
            }
            let j = ModeIndex::nonzero(a as i32, b as i32).expect("a >= 1");
            let orbit = if b == 0 || b == a { 4.0 } else { 8.0 };
            let t = h_sq_total(j, 1e-3);
            let w = orbit * weight(j);
            total.add(2.0 * w * t);
            let r = j.norm();
            if 3.0 * r >= j_max as f64 {
                fit.push(r, t);
            }
            for (i, &n) in ns.iter().enumerate() {
                if j.norm_sq() <= 4 * n as i64 * n as i64 {
                    inside[i].add(2.0 * w * h_sq_disc(j, n as i64, true));
                }
            }
        }
    }
    let (c, d) = fit.solve();
    // Int_J^inf 2 pi r r^{-4-2 delta} (c r^2 log r + d r^2) dr
    let jf = j_max as f64;
    let decay = libm::pow(jf, -2.0 * delta);
    let modelled = 2.0
        * 2.0
        * PI
        * decay
        * (c * (libm::log(jf) / (2.0 * delta) + 1.0 / (4.0 * delta * delta)) + d / (2.0 * delta));
    let a_total = total.value() + modelled;
    Ok(DriftTail {
        values: ns.iter().zip(&inside).map(|(&n, b)| (n, a_total - b.value())).collect(),
        total: a_total,
        modelled_part: modelled,
        j_max,
    })
}

// Least squares for t = c r^2 log r + d r^2.
#[derive(Default)]
struct FitAcc {
    sxx: [f64; 3],
    sxy: [f64; 2],
}

impl FitAcc {
    fn push(&mut self, r: f64, t: f64) {
        let (u, v) = (r * r * libm::log(r), r * r);
        // scale rows so large shells do not dominate
        let s = 1.0 / (v * v);
        self.sxx[0] += u * u * s;
        self.sxx[1] += u * v * s;
        self.sxx[2] += v * v * s;
        self.sxy[0] += u * t * s;
        self.sxy[1] += v * t * s;
    }

    fn solve(&self) -> (f64, f64) {
        let det = self.sxx[0] * self.sxx[2] - self.sxx[1] * self.sxx[1];
        let c = (self.sxy[0] * self.sxx[2] - self.sxx[1] * self.sxy[1]) / det;
        let d = (self.sxx[0] * self.sxy[1] - self.sxx[1] * self.sxy[0]) / det;
        (c, d)
    }
}

/// `b_N(w)` through the coefficient tables; `O(N^4)` reference path.
pub fn galerkin_drift(w: &RealSpectralField) -> Result<RealSpectralField> {
    let modes = w.modes().clone();
    let mut wc = vec![Complex64::new(0.0, 0.0); modes.len()];
    real_to_complex_slice(&modes, w.coeffs(), &mut wc);
    let scale: f64 = wc.iter().map(|c| c.norm_sqr()).sum::<f64>().max(1e-300);
    let mut out = vec![0.0; modes.len()];
    for (i, &j) in modes.members().iter().enumerate() {
        let t = HCoefficientTable::build(j, w.cutoff())?;
        let p = t.pairing(&modes, &wc);
        debug_assert!(p.im.abs() <= 1e-12 * scale.max(1.0), "imaginary residue {}", p.im);
        out[i] = -p.re;
    }
    RealSpectralField::from_coeffs(modes, out)
}

/// A fast evaluator of `b_N` on complex coefficients in `Lambda_N` order.
pub trait DriftEngine {
    /// The state mode set `Lambda_N`.
    fn modes(&self) -> &Arc<ModeSet>;

    /// Write `b_N` for the complex state `w` into `out`.
    fn drift(&mut self, w: &[Complex64], out: &mut [Complex64]);

    /// `b_N` on a real field.
    fn drift_real(&mut self, w: &RealSpectralField) -> Result<RealSpectralField> {
        let modes = self.modes().clone();
        if w.cutoff() != modes.cutoff() {
            return Err(Error::CutoffMismatch(w.cutoff(), modes.cutoff()));
        }
        let mut wc = vec![Complex64::new(0.0, 0.0); modes.len()];
        let mut bc = wc.clone();
        real_to_complex_slice(&modes, w.coeffs(), &mut wc);
        self.drift(&wc, &mut bc);
        let mut out = vec![0.0; modes.len()];
        complex_to_real_slice(&modes, &bc, &mut out);
        RealSpectralField::from_coeffs(modes, out)
    }
}

#[derive(Clone, Copy, Debug)]
struct Triad {
    k: u32,
    l: u32,
    w: f64,
}

/// `b_N` by direct convolution over precomputed triads.
///
/// `b^_m = Sum_{k+l=m} -2 pi^2 (k_perp . l)(1/|k|^2 - 1/|l|^2) w_k w_l`, with
/// unordered pairs stored once and only `m` in `Z^2_+` evaluated.
#[derive(Clone, Debug)]
pub struct ConvolutionDrift {
    modes: Arc<ModeSet>,
    // (output index, mirror index, triad range)
    outputs: Arc<Vec<(u32, u32, u32, u32)>>,
    triads: Arc<Vec<Triad>>,
}

impl ConvolutionDrift {
    /// Precompute triads on `Lambda_N`.
    pub fn new(n: u32) -> Result<Self> {
        let modes = Arc::new(mode_set(n, SetKind::Full)?);
        let mut outputs = Vec::new();
        let mut triads = Vec::new();
        for (mi, &m) in modes.members().iter().enumerate() {
            if !m.is_positive() {
                continue;
            }
            let start = triads.len() as u32;
            for (ki, &k) in modes.members().iter().enumerate() {
                let l = match m.checked_sub(k) {
                    Some(l) => l,
                    None => continue,
                };
                let li = match modes.index_of(l) {
                    Some(li) => li,
                    None => continue,
                };
                if li <= ki {
                    continue;
                }
                let c = k.perp_dot(l) as f64;
                let d = 1.0 / k.norm_sq() as f64 - 1.0 / l.norm_sq() as f64;
                if c == 0.0 || d == 0.0 {
                    continue;
                }
                triads.push(Triad { k: ki as u32, l: li as u32, w: -4.0 * PI2 * c * d });
            }
            let mirror = modes.index_of(-m).expect("negation closed");
            outputs.push((mi as u32, mirror as u32, start, triads.len() as u32));
        }
        Ok(ConvolutionDrift { modes, outputs: Arc::new(outputs), triads: Arc::new(triads) })
    }

    /// Number of stored triads.
    pub fn triad_count(&self) -> usize {
        self.triads.len()
    }
}

impl DriftEngine for ConvolutionDrift {
    fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    fn drift(&mut self, w: &[Complex64], out: &mut [Complex64]) {
        for &(mi, mirror, a, b) in self.outputs.iter() {
            let (mut re, mut im) = (0.0, 0.0);
            for t in &self.triads[a as usize..b as usize] {
                let x = w[t.k as usize];
                let y = w[t.l as usize];
                re += t.w * (x.re * y.re - x.im * y.im);
                im += t.w * (x.re * y.im + x.im * y.re);
            }
            out[mi as usize] = Complex64::new(re, im);
            out[mirror as usize] = Complex64::new(re, -im);
        }
    }
}

/// `R_{l,m}(N) = Sum_{k in set} C_{k,l} C_{k,m} (<w, e_k e_{-l}><w, e_k e_{-m}> - delta_{l,m})`.
///
/// No `8 nu pi^2` or `pi^2` prefactor is applied here.
pub fn r_term(w: &RealSpectralField, l: ModeIndex, m: ModeIndex, n: u32, kind: SetKind) -> Result<f64> {
    let set = mode_set(n, kind)?;
    // The products reach |k| + |l|; the field must carry them.
    for &k in set.members() {
        for p in [l, m] {
            for (f, _) in product_expansion(k, -p) {
                if let Some(f) = f {
                    if !w.modes().contains(f) {
                        return Err(Error::OutsideCutoff { k1: f.k1(), k2: f.k2(), cutoff: w.cutoff() });
                    }
                }
            }
        }
    }
    let pair = |k: ModeIndex, p: ModeIndex| -> f64 {
        product_expansion(k, -p)
            .into_iter()
            .map(|(f, c)| f.map_or(0.0, |f| c * w.get(f)))
            .sum()
    };
    let delta = if l == m { 1.0 } else { 0.0 };
    let mut acc = Neumaier::default();
    for &k in set.members() {
        let (cl, cm) = (coupling(k, l), coupling(k, m));
        if cl == 0.0 || cm == 0.0 {
            continue;
        }
        acc.add(cl * cm * (pair(k, l) * pair(k, m) - delta));
    }
    Ok(acc.value())
}

/// A cylinder function `F(w) = f(<w, e_l>; l in modes)` with derivatives.
pub struct CylinderFunction<'a> {
    /// The finite mode set `Lambda`.
    pub modes: Vec<ModeIndex>,
    /// `f`.
    pub f: &'a dyn Fn(&[f64]) -> f64,
    /// `grad f`.
    pub grad: &'a dyn Fn(&[f64]) -> Vec<f64>,
    /// `grad^2 f`, row-major.
    pub hess: &'a dyn Fn(&[f64]) -> Vec<f64>,
}

/// Which generator to apply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Generator {
    /// `L_inf`: exact Laplacian part and the drift over all modes of `w`.
    Limit,
    /// `L_N`: `8 nu eps~_N^2 L^0_N` over `Gamma_N` and the Galerkin drift `b_N`.
    Approx(u32),
}

/// Apply a generator with viscosity `nu` to the cylinder function at `w`.
pub fn generator_apply(func: &CylinderFunction<'_>, w: &RealSpectralField, which: Generator, nu: f64) -> Result<f64> {
    let x: Vec<f64> = func.modes.iter().map(|&l| w.get(l)).collect();
    let g = (func.grad)(&x);
    let h = (func.hess)(&x);
    let d = func.modes.len();
    let diag_part = |i: usize, l: ModeIndex| -> f64 {
        4.0 * nu * PI2 * l.norm_sq() as f64 * (h[i * d + i] - g[i] * x[i])
    };
    match which {
        Generator::Limit => {
            let modes = w.modes().clone();
            let mut wc = vec![Complex64::new(0.0, 0.0); modes.len()];
            real_to_complex_slice(&modes, w.coeffs(), &mut wc);
            let mut v = 0.0;
            for (i, &l) in func.modes.iter().enumerate() {
                v += diag_part(i, l);
                if g[i] != 0.0 {
                    let t = HCoefficientTable::build(l, w.cutoff())?;
                    v += g[i] * t.pairing(&modes, &wc).re;
                }
            }
            Ok(v)
        }
        Generator::Approx(n) => {
            let safe = n / 3;
            for &l in &func.modes {
                if safe == 0 || !SetKind::Full.admits(safe, l.norm_sq()) {
                    return Err(Error::OutsideSafeBand { k1: l.k1(), k2: l.k2(), cutoff: n });
                }
            }
            let e2 = 1.0 / eps_inv_sq(n, SetKind::Third)?;
            let mut v = 0.0;
            for (i, &l) in func.modes.iter().enumerate() {
                v += diag_part(i, l);
                for (jj, &m) in func.modes.iter().enumerate() {
                    let f_lm = h[i * d + jj];
                    if f_lm != 0.0 {
                        v += 8.0 * nu * e2 * PI2 * f_lm * r_term(w, l, m, n, SetKind::Third)?;
                    }
                }
            }
            if g.iter().any(|&gi| gi != 0.0) {
                // -<b_N(Pi_N w), e_l> = <Pi_N w (x) Pi_N w, H_{e_l}>
                let proj = project(w, n)?;
                let modes = proj.modes().clone();
                let mut wc = vec![Complex64::new(0.0, 0.0); modes.len()];
                real_to_complex_slice(&modes, proj.coeffs(), &mut wc);
                for (i, &l) in func.modes.iter().enumerate() {
                    if g[i] != 0.0 {
                        v += g[i] * HCoefficientTable::build(l, n)?.pairing(&modes, &wc).re;
                    }
                }
            }
            Ok(v)
        }
    }
}

/// `Pi_N w`.
pub fn project(w: &RealSpectralField, n: u32) -> Result<RealSpectralField> {
    let mut out = RealSpectralField::zeros(n)?;
    for (k, a) in w.iter() {
        if out.modes().contains(k) {
            out.set(k, a)?;
        }
    }
    Ok(out)
}
