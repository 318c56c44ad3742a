//! Time integration of the transport-noise Euler system and of the limit
//! stochastic Navier-Stokes equation.
//!
//! The state is kept as complex coefficients on `Lambda_N`. Vorticity evolves
//! by `-b_N` plus noise.
//!
//! `cayley_split`: Strang split with RK4 drift half-steps around a noise
//! substep. The noise substep is the ordered product over noise modes `k` of
//! Cayley maps `(I - M_k/2)^{-1}(I + M_k/2)` with `M_k = s dW_k A_k`. On the
//! complex basis `sigma_q . grad` only couples `p` to `p +- q` with the constant
//! coefficient `pi C_{q,p}` along each line `p + nq`, so each map is a set of
//! tridiagonal solves. Adjacent drift half-steps are merged between records.
//!
//! Each drift step of length `h` takes `ceil(drift_substeps h / dt)` RK4
//! substeps. With the kernel `2 pi i k_perp/|k|^2` white-noise states move
//! fast (drift rate near 900 at `N = 9`), and one RK4 step per `dt = 1e-3`
//! would damp the enstrophy by tens of percent per unit time.
//!
//! `limit`: the same split with an exact OU transition per mode.
//!
//! `ito_em`: Euler-Maruyama on the Ito form, using the sparse `A_k` matrices.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::basis::{
    complex_to_real_slice, negation_table, noise_coupling_on, real_to_complex_slice, NoiseCoupling,
    RealSpectralField,
};
use crate::lattice::{coupling, eps_inv_sq, mode_set, ModeIndex, ModeSet, SetKind};
use crate::measure::{normal, sample_white_noise_keyed, Purpose, SeededSampler};
use crate::nonlinear::DriftEngine;
use crate::{Error, Result};

/// Which modes carry noise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseKind {
    /// `Gamma_N` with `eps~_N`; observables must lie in `Lambda_{N/3}`.
    Third,
    /// `Lambda_N` with `eps_N`.
    Full,
}

impl NoiseKind {
    /// Matching mode-set kind.
    pub fn set_kind(self) -> SetKind {
        match self {
            NoiseKind::Third => SetKind::Third,
            NoiseKind::Full => SetKind::Full,
        }
    }
}

/// Integrator for the transport system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Euler-Maruyama on the Ito form.
    ItoEm,
    /// Strang split with a Cayley noise substep.
    CayleySplit,
}

/// Which equation to integrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum System {
    /// Transport-noise Euler.
    Transport,
    /// Limit stochastic Navier-Stokes.
    Limit,
}

/// Configuration of one path (and of an ensemble, via `seed`).
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    /// Viscosity `nu >= 0`.
    pub nu: f64,
    /// State cutoff `N`.
    pub n: u32,
    /// Noise set.
    pub noise_kind: NoiseKind,
    /// Transport integrator.
    pub scheme: Scheme,
    /// Equation.
    pub system: System,
    /// Time step.
    pub dt: f64,
    /// Horizon `T`.
    pub t_end: f64,
    /// Steps between records.
    pub record_stride: usize,
    /// Seed of path 0; path `p` uses `seed.with_stream(p)`.
    pub seed: SeededSampler,
    /// Recorded modes.
    pub observables: Vec<ModeIndex>,
    /// Include `b_N` (false gives the linear dynamics).
    pub nonlinear: bool,
    /// RK4 substeps per drift step of length `dt`.
    pub drift_substeps: usize,
}

impl SimulationConfig {
    /// Defaults for the transport system with Cayley splitting.
    pub fn new(n: u32, nu: f64, dt: f64, t_end: f64) -> Self {
        SimulationConfig {
            nu,
            n,
            noise_kind: NoiseKind::Third,
            scheme: Scheme::CayleySplit,
            system: System::Transport,
            dt,
            t_end,
            record_stride: 1,
            seed: SeededSampler::new(0, 0),
            observables: Vec::new(),
            nonlinear: true,
            drift_substeps: default_drift_substeps(n, dt),
        }
    }

    /// Number of steps `T / dt`.
    pub fn steps(&self) -> usize {
        libm::round(self.t_end / self.dt) as usize
    }

    /// Check every invariant of the configuration.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(String::from(m)));
        if self.n == 0 {
            return Err(Error::ZeroCutoff);
        }
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return bad("nu must be a finite nonnegative number");
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("dt must be positive");
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return bad("T must be nonnegative");
        }
        if self.record_stride == 0 {
            return bad("record_stride must be positive");
        }
        if self.drift_substeps == 0 {
            return bad("drift_substeps must be positive");
        }
        if self.t_end > 0.0 {
            if self.dt > self.t_end {
                return bad("dt exceeds T");
            }
            if self.record_stride as f64 * self.dt > self.t_end * (1.0 + 1e-12) {
                return bad("record_stride * dt exceeds T");
            }
            let steps = self.t_end / self.dt;
            if libm::fabs(steps - libm::round(steps)) > 1e-9 * steps.max(1.0) {
                return bad("T must be a whole number of steps");
            }
        }
        if self.system == System::Transport && self.noise_kind == NoiseKind::Third && self.n < 3 {
            return Err(Error::EmptyModeSet(self.n));
        }
        let band = match (self.system, self.noise_kind) {
            (System::Transport, NoiseKind::Third) => self.n / 3,
            _ => self.n,
        };
        for &l in &self.observables {
            if band == 0 || !SetKind::Full.admits(band, l.norm_sq()) {
                return Err(Error::OutsideSafeBand { k1: l.k1(), k2: l.k2(), cutoff: self.n });
            }
        }
        Ok(())
    }

    /// Noise amplitude `2 sqrt(2 nu) eps`.
    pub fn noise_amplitude(&self) -> Result<f64> {
        let e2 = 1.0 / eps_inv_sq(self.n, self.noise_kind.set_kind())?;
        Ok(2.0 * libm::sqrt(2.0 * self.nu) * libm::sqrt(e2))
    }
}

/// Largest `h N` for an RK4 drift substep under [`default_drift_substeps`].
///
/// RK4 damping of white-noise states per unit time scales like
/// `K (h N)^5` with `K` near `1.5e11` for `N` in 6..9, so this keeps the
/// enstrophy loss near `1e-2` per unit time.
pub const DRIFT_STEP_SCALE: f64 = 2e-3;

/// RK4 substeps per `dt` so that each substep satisfies `h N <= DRIFT_STEP_SCALE`.
pub fn default_drift_substeps(n: u32, dt: f64) -> usize {
    let m = libm::ceil(dt * n as f64 / DRIFT_STEP_SCALE);
    if m.is_finite() && m >= 1.0 {
        m as usize
    } else {
        1
    }
}

/// Stability guidance for `ito_em`: `dt <= 0.1 / (4 nu pi^2 N^2)`.
pub fn ito_em_dt_bound(nu: f64, n: u32) -> f64 {
    0.1 / (4.0 * nu * PI * PI * (n as f64) * (n as f64))
}

#[derive(Clone, Debug)]
struct Chain {
    alpha_unit: f64,
    idx: Vec<u32>,
    mirror: Vec<u32>,
}

#[derive(Clone, Debug)]
struct NoiseOp {
    k: ModeIndex,
    cos_type: bool,
    family: usize,
}

/// Chain-tridiagonal representation of `{A_k}` over the noise set.
#[derive(Clone, Debug)]
pub struct TransportNoise {
    modes: Arc<ModeSet>,
    ops: Vec<NoiseOp>,
    families: Vec<Vec<Chain>>,
    amplitude: f64,
    max_len: usize,
}

impl TransportNoise {
    /// Build the operators for state cutoff `N` and the given noise set.
    pub fn new(modes: Arc<ModeSet>, kind: NoiseKind, nu: f64) -> Result<Self> {
        let n = modes.cutoff();
        let noise = mode_set(n, kind.set_kind())?;
        if noise.is_empty() {
            return Err(Error::EmptyModeSet(n));
        }
        let e2 = 1.0 / eps_inv_sq(n, kind.set_kind())?;
        let amplitude = 2.0 * libm::sqrt(2.0 * nu) * libm::sqrt(e2);
        let mut fam_of: Vec<(ModeIndex, usize)> = Vec::new();
        let mut families = Vec::new();
        let mut max_len = 0;
        for &k in noise.members().iter().filter(|k| k.is_positive()) {
            let mut chains = Vec::new();
            for &p in modes.members() {
                if k.perp_dot(p) <= 0 {
                    continue;
                }
                if p.checked_sub(k).is_some_and(|prev| modes.contains(prev)) {
                    continue;
                }
                let mut idx = Vec::new();
                let mut mirror = Vec::new();
                let mut cur = Some(p);
                while let Some(c) = cur.filter(|c| modes.contains(*c)) {
                    idx.push(modes.index_of(c).expect("member") as u32);
                    mirror.push(modes.index_of(-c).expect("member") as u32);
                    cur = c.checked_add(k);
                }
                max_len = max_len.max(idx.len());
                chains.push(Chain { alpha_unit: PI * coupling(k, p), idx, mirror });
            }
            fam_of.push((k, families.len()));
            families.push(chains);
        }
        let ops = noise
            .members()
            .iter()
            .map(|&k| {
                let q = k.positive();
                let family = fam_of.iter().find(|f| f.0 == q).expect("family").1;
                NoiseOp { k, cos_type: k.is_positive(), family }
            })
            .collect();
        Ok(TransportNoise { modes, ops, families, amplitude, max_len })
    }

    /// Noise modes in application order.
    pub fn noise_modes(&self) -> Vec<ModeIndex> {
        self.ops.iter().map(|o| o.k).collect()
    }

    /// `2 sqrt(2 nu) eps`.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Apply the Cayley map of `theta A_k` for the `op`-th noise mode.
    pub fn cayley(&self, op: usize, theta: f64, w: &mut [Complex64], scratch: &mut CayleyScratch) {
        let o = &self.ops[op];
        scratch.ensure(self.max_len);
        for ch in &self.families[o.family] {
            let alpha = 0.5 * theta * ch.alpha_unit;
            let len = ch.idx.len();
            let x = &mut scratch.x[..len];
            for (xi, &i) in x.iter_mut().zip(&ch.idx) {
                *xi = w[i as usize];
            }
            // (I - B/2) has unit diagonal with sub `a` and super `c`; (I + B/2) has -a, -c.
            let (a, c) = if o.cos_type {
                (Complex64::new(0.0, -alpha), Complex64::new(0.0, -alpha))
            } else {
                (Complex64::new(-alpha, 0.0), Complex64::new(alpha, 0.0))
            };
            let r = &mut scratch.r[..len];
            for n in 0..len {
                let mut v = x[n];
                if n > 0 {
                    v -= a * x[n - 1];
                }
                if n + 1 < len {
                    v -= c * x[n + 1];
                }
                r[n] = v;
            }
            // Thomas elimination; pivots satisfy |m| >= 1.
            let cp = &mut scratch.cp[..len];
            let mut prev_c = Complex64::new(0.0, 0.0);
            let mut prev_d = Complex64::new(0.0, 0.0);
            for n in 0..len {
                let m = Complex64::new(1.0, 0.0) - a * prev_c;
                let inv = m.inv();
                prev_c = c * inv;
                prev_d = (r[n] - a * prev_d) * inv;
                cp[n] = prev_c;
                r[n] = prev_d;
            }
            for n in (0..len.saturating_sub(1)).rev() {
                let next = r[n + 1];
                r[n] -= cp[n] * next;
            }
            for n in 0..len {
                w[ch.idx[n] as usize] = r[n];
                w[ch.mirror[n] as usize] = r[n].conj();
            }
        }
    }

    /// One noise substep of length `dt`, drawing `dW_k` from `rngs`.
    pub fn substep(&self, dt: f64, w: &mut [Complex64], rngs: &mut [ChaCha8Rng], scratch: &mut CayleyScratch) {
        let sd = libm::sqrt(dt);
        for op in 0..self.ops.len() {
            let dw = sd * normal(&mut rngs[op]);
            self.cayley(op, self.amplitude * dw, w, scratch);
        }
    }

    /// Per-noise-mode generators for path `s`.
    pub fn rngs(&self, s: &SeededSampler) -> Vec<ChaCha8Rng> {
        self.ops.iter().map(|o| s.mode_rng(Purpose::TransportNoise, o.k)).collect()
    }

    /// State mode set.
    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }
}

/// Work buffers for [`TransportNoise::cayley`].
#[derive(Clone, Debug, Default)]
pub struct CayleyScratch {
    x: Vec<Complex64>,
    r: Vec<Complex64>,
    cp: Vec<Complex64>,
}

impl CayleyScratch {
    fn ensure(&mut self, n: usize) {
        if self.x.len() < n {
            self.x.resize(n, Complex64::new(0.0, 0.0));
            self.r.resize(n, Complex64::new(0.0, 0.0));
            self.cp.resize(n, Complex64::new(0.0, 0.0));
        }
    }
}

/// The sparse matrices `A_k` for the noise set of a configuration.
pub fn noise_couplings(n: u32, kind: NoiseKind) -> Result<Vec<NoiseCoupling>> {
    let modes = Arc::new(mode_set(n, SetKind::Full)?);
    let noise = mode_set(n, kind.set_kind())?;
    Ok(noise.members().iter().map(|&k| noise_coupling_on(k, modes.clone())).collect())
}

/// `4 nu eps^2 Sum_k A_k (A_k w)`, the Ito correction.
pub fn ito_correction(w: &RealSpectralField, nu: f64, kind: NoiseKind) -> Result<RealSpectralField> {
    let e2 = 1.0 / eps_inv_sq(w.cutoff(), kind.set_kind())?;
    let mats = noise_couplings(w.cutoff(), kind)?;
    let len = w.coeffs().len();
    let (mut t1, mut t2) = (vec![0.0; len], vec![0.0; len]);
    let mut acc = vec![0.0; len];
    for a in &mats {
        a.apply_into(w.coeffs(), &mut t1);
        a.apply_into(&t1, &mut t2);
        for (s, v) in acc.iter_mut().zip(&t2) {
            *s += 4.0 * nu * e2 * v;
        }
    }
    RealSpectralField::from_coeffs(w.modes().clone(), acc)
}

/// Ito drift of the vorticity: `-b_N(w) + 4 nu eps^2 Sum_k A_k(A_k w)`.
pub fn ito_drift<E: DriftEngine>(w: &RealSpectralField, cfg: &SimulationConfig, engine: &mut E) -> Result<RealSpectralField> {
    let mut c = ito_correction(w, cfg.nu, cfg.noise_kind)?;
    if cfg.nonlinear {
        let b = engine.drift_real(w)?;
        for (x, y) in c.coeffs_mut().iter_mut().zip(b.coeffs()) {
            *x -= y;
        }
    }
    Ok(c)
}

/// Recorded output of one path.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    /// Record times.
    pub times: Vec<f64>,
    /// Observables in order of the configuration.
    pub observables: Vec<ModeIndex>,
    /// `mode_values[t][o] = <w_t, e_o>`.
    pub mode_values: Vec<Vec<f64>>,
    /// `||w_t||^2_{L^2}`.
    pub enstrophy: Vec<f64>,
    /// Observable index pairs `(a, b)`, `a <= b`, of the QV accumulators.
    pub qv_pairs: Vec<(usize, usize)>,
    /// `qv[t][p]`: running sum of increment products for pair `p`.
    pub qv: Vec<Vec<f64>>,
}

/// `(t, QV_t)` for observables `l` and `m`.
pub fn realized_qv(rec: &TrajectoryRecord, l: ModeIndex, m: ModeIndex) -> Result<Vec<(f64, f64)>> {
    let find = |x: ModeIndex| {
        rec.observables
            .iter()
            .position(|&o| o == x)
            .ok_or(Error::UnknownObservable { k1: x.k1(), k2: x.k2() })
    };
    let (a, b) = (find(l)?, find(m)?);
    let key = (a.min(b), a.max(b));
    let p = rec.qv_pairs.iter().position(|&q| q == key).expect("all pairs recorded");
    Ok(rec.times.iter().zip(&rec.qv).map(|(&t, q)| (t, q[p])).collect())
}

/// Integrates paths of one configuration.
#[derive(Clone, Debug)]
pub struct Simulator<E: DriftEngine> {
    cfg: SimulationConfig,
    engine: E,
    modes: Arc<ModeSet>,
    noise: Option<TransportNoise>,
    couplings: Vec<NoiseCoupling>,
    obs: Vec<(usize, bool)>,
    // scratch
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
    cayley: CayleyScratch,
}

impl<E: DriftEngine + Clone> Simulator<E> {
    /// Validate `cfg` and precompute operators; `engine` must work on `Lambda_N`.
    pub fn new(cfg: SimulationConfig, engine: E) -> Result<Self> {
        cfg.validate()?;
        let modes = engine.modes().clone();
        if modes.cutoff() != cfg.n {
            return Err(Error::CutoffMismatch(modes.cutoff(), cfg.n));
        }
        let noise = match (cfg.system, cfg.scheme) {
            (System::Transport, Scheme::CayleySplit) => {
                Some(TransportNoise::new(modes.clone(), cfg.noise_kind, cfg.nu)?)
            }
            _ => None,
        };
        let couplings = match (cfg.system, cfg.scheme) {
            (System::Transport, Scheme::ItoEm) => noise_couplings(cfg.n, cfg.noise_kind)?,
            _ => Vec::new(),
        };
        let obs = cfg
            .observables
            .iter()
            .map(|&l| (modes.index_of(l.positive()).expect("validated"), l.is_positive()))
            .collect();
        let z = vec![Complex64::new(0.0, 0.0); modes.len()];
        Ok(Simulator {
            cfg,
            engine,
            modes,
            noise,
            couplings,
            obs,
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z,
            cayley: CayleyScratch::default(),
        })
    }

    /// The configuration.
    pub fn config(&self) -> &SimulationConfig {
        &self.cfg
    }

    /// The drift engine.
    pub fn engine_mut(&mut self) -> &mut E {
        &mut self.engine
    }

    fn observe(&self, w: &[Complex64], out: &mut Vec<f64>) {
        out.clear();
        for &(i, pos) in &self.obs {
            out.push(if pos { SQRT_2 * w[i].re } else { SQRT_2 * w[i].im });
        }
    }

    /// Integrate `dw/dt = -b_N(w)` over `h` with RK4 substeps.
    pub fn drift_step(&mut self, w: &mut [Complex64], h: f64) {
        if !self.cfg.nonlinear || h == 0.0 {
            return;
        }
        let m = libm::ceil(self.cfg.drift_substeps as f64 * h / self.cfg.dt - 1e-9).max(1.0) as usize;
        for _ in 0..m {
            self.rk4(w, h / m as f64);
        }
    }

    fn rk4(&mut self, w: &mut [Complex64], h: f64) {
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        self.engine.drift(w, k1);
        for i in 0..w.len() {
            tmp[i] = w[i] - k1[i] * (0.5 * h);
        }
        self.engine.drift(tmp, k2);
        for i in 0..w.len() {
            tmp[i] = w[i] - k2[i] * (0.5 * h);
        }
        self.engine.drift(tmp, k3);
        for i in 0..w.len() {
            tmp[i] = w[i] - k3[i] * h;
        }
        self.engine.drift(tmp, k4);
        for i in 0..w.len() {
            w[i] -= (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }

    /// Exact OU transition of length `dt` for every mode.
    pub fn ou_substep(&self, w: &mut [Complex64], dt: f64, rngs: &mut [ChaCha8Rng]) {
        let neg = &self.tmp_neg();
        for (i, &l) in self.modes.members().iter().enumerate() {
            if !l.is_positive() {
                continue;
            }
            let lam = 4.0 * self.cfg.nu * PI * PI * l.norm_sq() as f64;
            let decay = libm::exp(-lam * dt);
            let sd = libm::sqrt(-libm::expm1(-2.0 * lam * dt));
            let j = neg[i];
            let (xa, xb) = (normal(&mut rngs[i]), normal(&mut rngs[j]));
            let v = w[i] * decay + Complex64::new(xa, xb) * (sd * core::f64::consts::FRAC_1_SQRT_2);
            w[i] = v;
            w[j] = v.conj();
        }
    }

    fn tmp_neg(&self) -> Vec<usize> {
        negation_table(&self.modes)
    }

    fn ito_em_step(&mut self, w: &mut [Complex64], rngs: &mut [ChaCha8Rng], real: &mut [f64], t1: &mut [f64]) {
        let dt = self.cfg.dt;
        let e2 = 1.0 / eps_inv_sq(self.cfg.n, self.cfg.noise_kind.set_kind()).expect("validated");
        let amp = 2.0 * libm::sqrt(2.0 * self.cfg.nu) * libm::sqrt(e2);
        complex_to_real_slice(&self.modes, w, real);
        let len = real.len();
        let mut incr = vec![0.0; len];
        let mut t2 = vec![0.0; len];
        let sd = libm::sqrt(dt);
        for (a, rng) in self.couplings.iter().zip(rngs.iter_mut()) {
            let dw = sd * normal(rng);
            a.apply_into(real, t1);
            a.apply_into(t1, &mut t2);
            for i in 0..len {
                incr[i] += 4.0 * self.cfg.nu * e2 * t2[i] * dt + amp * t1[i] * dw;
            }
        }
        if self.cfg.nonlinear {
            let k1 = &mut self.k[0];
            self.engine.drift(w, k1);
            let mut b = vec![0.0; len];
            complex_to_real_slice(&self.modes, k1, &mut b);
            for i in 0..len {
                incr[i] -= b[i] * dt;
            }
        }
        for i in 0..len {
            real[i] += incr[i];
        }
        real_to_complex_slice(&self.modes, real, w);
    }

    /// Integrate path `stream_index` of the ensemble.
    pub fn simulate_path(&mut self, stream_index: u64) -> Result<TrajectoryRecord> {
        let s = self.cfg.seed.with_stream(stream_index);
        let init = sample_white_noise_keyed(self.cfg.n, &s)?;
        let mut w = vec![Complex64::new(0.0, 0.0); self.modes.len()];
        real_to_complex_slice(&self.modes, init.coeffs(), &mut w);
        self.simulate_from(&mut w, &s)
    }

    /// Integrate from the complex state `w` (modified in place) with path seed `s`.
    pub fn simulate_from(&mut self, w: &mut [Complex64], s: &SeededSampler) -> Result<TrajectoryRecord> {
        let cfg = self.cfg.clone();
        let no = cfg.observables.len();
        let qv_pairs: Vec<(usize, usize)> = (0..no).flat_map(|a| (a..no).map(move |b| (a, b))).collect();
        let mut rec = TrajectoryRecord {
            times: Vec::new(),
            observables: cfg.observables.clone(),
            mode_values: Vec::new(),
            enstrophy: Vec::new(),
            qv_pairs: qv_pairs.clone(),
            qv: Vec::new(),
        };
        let mut cur = Vec::with_capacity(no);
        let mut prev = Vec::with_capacity(no);
        let mut qv = vec![0.0; qv_pairs.len()];
        let enstrophy = |w: &[Complex64]| w.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let push = |rec: &mut TrajectoryRecord, t: f64, w: &[Complex64], obs: &[f64], qv: &[f64]| {
            rec.times.push(t);
            rec.mode_values.push(obs.to_vec());
            rec.enstrophy.push(enstrophy(w));
            rec.qv.push(qv.to_vec());
        };
        self.observe(w, &mut prev);
        push(&mut rec, 0.0, w, &prev, &qv);
        let steps = if cfg.t_end > 0.0 { cfg.steps() } else { 0 };
        let mut noise_rngs = match cfg.system {
            System::Transport => mode_rngs(&self.modes, cfg.n, cfg.noise_kind, s),
            System::Limit => self
                .modes
                .members()
                .iter()
                .map(|&l| s.mode_rng(Purpose::LimitNoise, l))
                .collect(),
        };
        let mut real = vec![0.0; self.modes.len()];
        let mut t1 = vec![0.0; self.modes.len()];
        let mut open = false;
        for step in 0..steps {
            match (cfg.system, cfg.scheme) {
                (System::Transport, Scheme::ItoEm) => {
                    self.ito_em_step(w, &mut noise_rngs, &mut real, &mut t1);
                }
                _ => {
                    let h = if open { cfg.dt } else { 0.5 * cfg.dt };
                    self.drift_step(w, h);
                    open = true;
                    if cfg.system == System::Transport {
                        let noise = self.noise.as_ref().expect("cayley noise");
                        noise.substep(cfg.dt, w, &mut noise_rngs, &mut self.cayley);
                    } else {
                        self.ou_substep(w, cfg.dt, &mut noise_rngs);
                    }
                }
            }
            self.observe(w, &mut cur);
            for (q, &(a, b)) in qv.iter_mut().zip(&qv_pairs) {
                *q += (cur[a] - prev[a]) * (cur[b] - prev[b]);
            }
            core::mem::swap(&mut cur, &mut prev);
            if (step + 1) % cfg.record_stride == 0 || step + 1 == steps {
                if open {
                    self.drift_step(w, 0.5 * cfg.dt);
                    open = false;
                }
                self.observe(w, &mut cur);
                push(&mut rec, (step + 1) as f64 * cfg.dt, w, &cur, &qv);
            }
        }
        Ok(rec)
    }
}

// Transport noise streams in noise-set order, keyed by the noise mode.
fn mode_rngs(_modes: &ModeSet, n: u32, kind: NoiseKind, s: &SeededSampler) -> Vec<ChaCha8Rng> {
    let noise = mode_set(n, kind.set_kind()).expect("validated");
    noise.members().iter().map(|&k| s.mode_rng(Purpose::TransportNoise, k)).collect()
}
