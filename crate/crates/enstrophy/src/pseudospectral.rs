//! `b_N` by FFT: velocity and gradient on a grid, pointwise product, forward
//! transform and truncation to `Lambda_N`.
//!
//! A grid of size `G >= 3N` keeps the product exact on `Lambda_N`: frequencies
//! of the product reach `2N` per axis, and `p = q -+ G` with `|q| <= N` would
//! need `|p| > 2N`. At exactly `G = 3N` the only aliased pairs are parallel
//! axis modes, whose transport coefficient vanishes.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use enstrophy_core::lattice::{mode_set, ModeSet, SetKind};
use enstrophy_core::nonlinear::{ConvolutionDrift, DriftEngine};
use enstrophy_core::{Complex64, Error, Result};
use rustfft::{Fft, FftPlanner};

/// Pseudospectral evaluator of `b_N`.
#[derive(Clone)]
pub struct PseudospectralDrift {
    modes: Arc<ModeSet>,
    grid: usize,
    inv: Arc<dyn Fft<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    // (grid row, grid column) of every mode
    place: Arc<Vec<(usize, usize)>>,
    // (index, mirror index) of every mode in Z^2_+
    pairs: Arc<Vec<(usize, usize)>>,
    rows: Arc<Vec<usize>>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    t: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl fmt::Debug for PseudospectralDrift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PseudospectralDrift")
            .field("cutoff", &self.modes.cutoff())
            .field("grid", &self.grid)
            .finish()
    }
}

/// Smallest 2-3-5-smooth size at least `3N`.
pub fn default_grid(n: u32) -> usize {
    let mut g = (3 * n as usize).max(1);
    loop {
        let mut r = g;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return g;
        }
        g += 1;
    }
}

impl PseudospectralDrift {
    /// Engine on `Lambda_N` with the default grid.
    pub fn new(n: u32) -> Result<Self> {
        Self::with_grid(n, default_grid(n))
    }

    /// Engine on `Lambda_N` with a `grid x grid` mesh; `grid < 3N` is rejected.
    pub fn with_grid(n: u32, grid: usize) -> Result<Self> {
        let modes = Arc::new(mode_set(n, SetKind::Full)?);
        let needed = 3 * n as usize;
        if grid < needed {
            return Err(Error::GridTooSmall { grid, needed });
        }
        let mut planner = FftPlanner::new();
        let inv = planner.plan_fft_inverse(grid);
        let fwd = planner.plan_fft_forward(grid);
        let wrap = |k: i32| k.rem_euclid(grid as i32) as usize;
        let place: Vec<(usize, usize)> = modes.members().iter().map(|k| (wrap(k.k1()), wrap(k.k2()))).collect();
        let pairs = modes
            .members()
            .iter()
            .enumerate()
            .filter(|(_, k)| k.is_positive())
            .map(|(i, &k)| (i, modes.index_of(-k).expect("negation closed")))
            .collect();
        let r = n as i32;
        let rows = (-r..=r).map(wrap).collect();
        let len = grid * grid;
        let z = Complex64::new(0.0, 0.0);
        let scratch_len = inv.get_inplace_scratch_len().max(fwd.get_inplace_scratch_len());
        Ok(PseudospectralDrift {
            modes,
            grid,
            inv,
            fwd,
            place: Arc::new(place),
            pairs: Arc::new(pairs),
            rows: Arc::new(rows),
            a: vec![z; len],
            b: vec![z; len],
            t: vec![z; len],
            scratch: vec![z; scratch_len],
        })
    }

    /// Grid size per axis.
    pub fn grid(&self) -> usize {
        self.grid
    }

    // Spectrum in `buf` (row = k1) to physical values, transposed (row = x2).
    fn to_physical(&mut self, which: bool) {
        let g = self.grid;
        let buf = if which { &mut self.a } else { &mut self.b };
        for &r in self.rows.iter() {
            self.inv.process_with_scratch(&mut buf[r * g..(r + 1) * g], &mut self.scratch);
        }
        transpose(buf, &mut self.t, g);
        self.inv.process_with_scratch(&mut self.t, &mut self.scratch);
        std::mem::swap(buf, &mut self.t);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], g: usize) {
    const B: usize = 16;
    for r0 in (0..g).step_by(B) {
        for c0 in (0..g).step_by(B) {
            for r in r0..(r0 + B).min(g) {
                for c in c0..(c0 + B).min(g) {
                    dst[c * g + r] = src[r * g + c];
                }
            }
        }
    }
}

impl DriftEngine for PseudospectralDrift {
    fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    fn drift(&mut self, w: &[Complex64], out: &mut [Complex64]) {
        let g = self.grid;
        let z = Complex64::new(0.0, 0.0);
        self.a.fill(z);
        self.b.fill(z);
        // a = u1 + i u2, b = d1 w + i d2 w; both pairs are real fields.
        for (i, (k, &(r, c))) in self.modes.members().iter().zip(self.place.iter()).enumerate() {
            let iw = Complex64::new(0.0, 2.0 * PI) * w[i];
            let (k1, k2) = (k.k1() as f64, k.k2() as f64);
            let u = iw / k.norm_sq() as f64;
            // u^ = 2 pi i (k2, -k1) / |k|^2 w^
            self.a[r * g + c] = u * k2 + Complex64::new(0.0, 1.0) * (u * -k1);
            self.b[r * g + c] = iw * k1 + Complex64::new(0.0, 1.0) * (iw * k2);
        }
        self.to_physical(true);
        self.to_physical(false);
        for (p, q) in self.a.iter_mut().zip(&self.b) {
            *p = Complex64::new(p.re * q.re + p.im * q.im, 0.0);
        }
        // Forward transform along x1 (contiguous after transposition), then x2
        // only on the rows that carry |k1| <= N.
        self.fwd.process_with_scratch(&mut self.a, &mut self.scratch);
        transpose(&self.a, &mut self.t, g);
        for &r in self.rows.iter() {
            self.fwd.process_with_scratch(&mut self.t[r * g..(r + 1) * g], &mut self.scratch);
        }
        let norm = 1.0 / (g * g) as f64;
        for &(i, j) in self.pairs.iter() {
            let (r, c) = self.place[i];
            let v = self.t[r * g + c] * norm;
            out[i] = v;
            out[j] = v.conj();
        }
    }
}

/// Which `b_N` evaluator to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineKind {
    /// Direct convolution for small cutoffs, FFT above [`AUTO_FFT_CUTOFF`].
    Auto,
    /// Precomputed triad convolution.
    Convolution,
    /// FFT on the default grid.
    Pseudospectral,
}

/// Smallest cutoff at which [`EngineKind::Auto`] picks the FFT path.
pub const AUTO_FFT_CUTOFF: u32 = 12;

impl EngineKind {
    /// Config spelling.
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Auto => "auto",
            EngineKind::Convolution => "convolution",
            EngineKind::Pseudospectral => "pseudospectral",
        }
    }

    /// Parse the config spelling.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "auto" => Some(EngineKind::Auto),
            "convolution" => Some(EngineKind::Convolution),
            "pseudospectral" => Some(EngineKind::Pseudospectral),
            _ => None,
        }
    }
}

/// Either evaluator behind one type.
#[derive(Clone, Debug)]
pub enum AnyDrift {
    /// Direct convolution.
    Convolution(ConvolutionDrift),
    /// FFT.
    Pseudospectral(PseudospectralDrift),
}

impl AnyDrift {
    /// Build the evaluator chosen by `kind` on `Lambda_N`; `grid` overrides the FFT grid.
    pub fn new(kind: EngineKind, n: u32, grid: Option<usize>) -> Result<Self> {
        let fft = match kind {
            EngineKind::Auto => n >= AUTO_FFT_CUTOFF,
            EngineKind::Convolution => false,
            EngineKind::Pseudospectral => true,
        };
        if fft {
            let g = grid.unwrap_or_else(|| default_grid(n));
            Ok(AnyDrift::Pseudospectral(PseudospectralDrift::with_grid(n, g)?))
        } else {
            Ok(AnyDrift::Convolution(ConvolutionDrift::new(n)?))
        }
    }
}

impl DriftEngine for AnyDrift {
    fn modes(&self) -> &Arc<ModeSet> {
        match self {
            AnyDrift::Convolution(e) => e.modes(),
            AnyDrift::Pseudospectral(e) => e.modes(),
        }
    }

    fn drift(&mut self, w: &[Complex64], out: &mut [Complex64]) {
        match self {
            AnyDrift::Convolution(e) => e.drift(w, out),
            AnyDrift::Pseudospectral(e) => e.drift(w, out),
        }
    }
}
