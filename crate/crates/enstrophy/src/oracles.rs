//! Midpoint-quadrature oracles on a `G x G` grid.
//!
//! These recompute Fourier-space quantities from their physical-space
//! definitions. The midpoint rule is exact for trigonometric polynomials of
//! degree below `G`, so agreement is limited only by rounding.

use std::f64::consts::PI;

use enstrophy_core::basis::{eval_basis, eval_complex_basis, grad_basis, sigma_eval, Point};
use enstrophy_core::lattice::{mode_set, ModeIndex, SetKind};
use enstrophy_core::nonlinear::h_coeff;
use enstrophy_core::{Complex64, Result};

/// Default quadrature resolution.
pub const QUAD_GRID: usize = 256;

/// Default truncation of the kernel in the Biot-Savart oracle.
pub const KERNEL_TRUNCATION: u32 = 64;

/// Midpoint grid; sample `i1 * G + i2` sits at `((i1 + 1/2)/G, (i2 + 1/2)/G)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadGrid {
    g: usize,
}

impl QuadGrid {
    /// A `g x g` grid.
    pub fn new(g: usize) -> Self {
        assert!(g > 0, "empty grid");
        QuadGrid { g }
    }

    /// Points per axis.
    pub fn size(&self) -> usize {
        self.g
    }

    /// Coordinate of index `i` along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.g as f64
    }

    /// Point of flat index `i`.
    pub fn point(&self, i: usize) -> Point {
        [self.coord(i / self.g), self.coord(i % self.g)]
    }

    /// Values of `f` at every point.
    pub fn sample<T>(&self, f: impl Fn(Point) -> T) -> Vec<T> {
        (0..self.g * self.g).map(|i| f(self.point(i))).collect()
    }

    /// `Int a b dx` for real samples.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (self.g * self.g) as f64
    }

    /// `Int a b dx` for complex samples, no conjugation.
    pub fn inner_c(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<Complex64>() / (self.g * self.g) as f64
    }

    // trig[k][i] = (cos, sin)(2 pi k x_i) for k in -m..=m
    fn trig(&self, m: i32) -> Vec<Vec<(f64, f64)>> {
        (-m..=m)
            .map(|k| {
                (0..self.g)
                    .map(|i| {
                        let p = 2.0 * PI * k as f64 * self.coord(i);
                        (p.cos(), p.sin())
                    })
                    .collect()
            })
            .collect()
    }

    /// `(Int cos(2 pi k.y) f(y) dy, Int sin(2 pi k.y) f(y) dy)` for every `k` in `Lambda_M`,
    /// summed one axis at a time.
    pub fn trig_moments(&self, f: &[Complex64], m: u32) -> Vec<(ModeIndex, Complex64, Complex64)> {
        let g = self.g;
        let mi = m as i32;
        let tr = self.trig(mi);
        // inner sums over y2 for every (k2, y1)
        let z = Complex64::new(0.0, 0.0);
        let mut fc = vec![vec![z; g]; tr.len()];
        let mut fs = vec![vec![z; g]; tr.len()];
        for (k2, t2) in tr.iter().enumerate() {
            for i1 in 0..g {
                let row = &f[i1 * g..(i1 + 1) * g];
                let (mut c, mut s) = (z, z);
                for (v, &(cc, ss)) in row.iter().zip(t2) {
                    c += v * cc;
                    s += v * ss;
                }
                fc[k2][i1] = c;
                fs[k2][i1] = s;
            }
        }
        let norm = 1.0 / (g * g) as f64;
        mode_set(m, SetKind::Full)
            .expect("m >= 1")
            .members()
            .iter()
            .map(|&k| {
                let (a, b) = ((k.k1() + mi) as usize, (k.k2() + mi) as usize);
                let (mut c, mut s) = (z, z);
                for i1 in 0..g {
                    let (c1, s1) = tr[a][i1];
                    // cos(a+b) = c1 c2 - s1 s2, sin(a+b) = s1 c2 + c1 s2
                    c += fc[b][i1] * c1 - fs[b][i1] * s1;
                    s += fc[b][i1] * s1 + fs[b][i1] * c1;
                }
                (k, c * norm, s * norm)
            })
            .collect()
    }

    /// `(K_M * f)(x)` at `points`, with
    /// `K_M(z) = -2 pi Sum_{k in Lambda_M} k_perp/|k|^2 sin(2 pi k.z)` and the
    /// `y` integral done by quadrature.
    pub fn kernel_convolution(&self, f: &[Complex64], m: u32, points: &[Point]) -> Vec<[Complex64; 2]> {
        let mom = self.trig_moments(f, m);
        points
            .iter()
            .map(|x| {
                let mut u = [Complex64::new(0.0, 0.0); 2];
                for &(k, c, s) in &mom {
                    let p = 2.0 * PI * (k.k1() as f64 * x[0] + k.k2() as f64 * x[1]);
                    // sin(k.(x-y)) = sin(k.x) cos(k.y) - cos(k.x) sin(k.y)
                    let v = c * p.sin() - s * p.cos();
                    let w = -2.0 * PI / k.norm_sq() as f64;
                    let kp = k.perp();
                    u[0] += v * (w * kp[0] as f64);
                    u[1] += v * (w * kp[1] as f64);
                }
                u
            })
            .collect()
    }

    /// `(K_M * f)` on every grid point.
    pub fn kernel_convolution_grid(&self, f: &[Complex64], m: u32) -> [Vec<Complex64>; 2] {
        let pts: Vec<Point> = (0..self.g * self.g).map(|i| self.point(i)).collect();
        let u = self.kernel_convolution(f, m, &pts);
        [u.iter().map(|v| v[0]).collect(), u.iter().map(|v| v[1]).collect()]
    }
}

/// One `(j, k, l)` entry of the H-coefficient oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HOracleRow {
    /// Test-function mode.
    pub j: ModeIndex,
    /// First complex mode.
    pub k: ModeIndex,
    /// Second complex mode.
    pub l: ModeIndex,
    /// Quadrature value.
    pub quadrature: Complex64,
    /// Closed form.
    pub closed: Complex64,
}

/// `<H_{e_j}, e~_k (x) e~_l>` by quadrature for all `j` in `js`, `k, l` in `ks`.
///
/// With `u_l = K * e~_l` the double integral separates into
/// `1/2 Int (u_l . grad e_j) e~_k + (u_k . grad e_j) e~_l dx`, since `K` is odd.
/// `u_l` itself comes from [`QuadGrid::kernel_convolution_grid`] with the kernel
/// truncated just above the largest `|k|`.
pub fn h_coeff_oracle(grid: &QuadGrid, js: &[ModeIndex], ks: &[ModeIndex]) -> Vec<HOracleRow> {
    let m = ks.iter().map(|k| k.norm()).fold(1.0, f64::max).ceil() as u32;
    let e: Vec<Vec<Complex64>> = ks.iter().map(|&k| grid.sample(|x| eval_complex_basis(k, x))).collect();
    let u: Vec<[Vec<Complex64>; 2]> = e.iter().map(|f| grid.kernel_convolution_grid(f, m)).collect();
    let mut rows = Vec::with_capacity(js.len() * ks.len() * ks.len());
    for &j in js {
        let gj = grid.sample(|x| grad_basis(j, x));
        let v: Vec<Vec<Complex64>> = u
            .iter()
            .map(|[u1, u2]| gj.iter().zip(u1.iter().zip(u2)).map(|(g, (a, b))| a * g[0] + b * g[1]).collect())
            .collect();
        for (a, &k) in ks.iter().enumerate() {
            for (b, &l) in ks.iter().enumerate() {
                let q = (grid.inner_c(&v[b], &e[a]) + grid.inner_c(&v[a], &e[b])) * 0.5;
                rows.push(HOracleRow { j, k, l, quadrature: q, closed: h_coeff(j, k, l) });
            }
        }
    }
    rows
}

/// `Int (sigma_k . grad e_l) e_m dx` by quadrature for every `m` in `ms`.
pub fn noise_coupling_oracle(grid: &QuadGrid, k: ModeIndex, l: ModeIndex, ms: &[ModeIndex]) -> Vec<f64> {
    let f = grid.sample(|x| {
        let s = sigma_eval(k, x);
        let g = grad_basis(l, x);
        s[0] * g[0] + s[1] * g[1]
    });
    ms.iter().map(|&m| grid.inner(&f, &grid.sample(|x| eval_basis(m, x)))).collect()
}

/// Largest deviation of the quadrature Gram matrix of `{e_k : k in Lambda_M}` from `I`.
pub fn gram_error(grid: &QuadGrid, m: u32) -> Result<f64> {
    let set = mode_set(m, SetKind::Full)?;
    let e: Vec<Vec<f64>> = set.members().iter().map(|&k| grid.sample(|x| eval_basis(k, x))).collect();
    let mut worst = 0.0f64;
    for a in 0..e.len() {
        for b in a..e.len() {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((grid.inner(&e[a], &e[b]) - target).abs());
        }
    }
    Ok(worst)
}
