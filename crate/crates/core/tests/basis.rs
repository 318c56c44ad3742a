use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::sync::Arc;

use enstrophy_core::basis::*;
use enstrophy_core::lattice::*;
use enstrophy_core::measure::{sample_white_noise, SeededSampler};
use enstrophy_core::nonlinear::kernel_truncated;
use enstrophy_core::{Complex64, Error};
use proptest::prelude::*;

fn m(a: i32, b: i32) -> ModeIndex {
    ModeIndex::new(a, b).unwrap()
}

// Midpoint rule on a g x g grid; exact for trigonometric polynomials of degree < g.
fn quad(g: usize, f: impl Fn([f64; 2]) -> f64) -> f64 {
    let h = 1.0 / g as f64;
    let mut s = 0.0;
    for i in 0..g {
        for j in 0..g {
            s += f([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
        }
    }
    s * h * h
}

#[test]
fn eval_examples() {
    assert!((eval_basis(m(1, 0), [0.0, 0.0]) - SQRT_2).abs() < 1e-15);
    assert!(eval_basis(m(0, 1), [0.0, 0.25]).abs() < 1e-15);
    assert!((eval_basis(m(0, -1), [0.0, 0.25]) + SQRT_2).abs() < 1e-15);
}

#[test]
fn gram_matrix_is_identity() {
    let modes = mode_set(3, SetKind::Full).unwrap();
    for &a in modes.members() {
        for &b in modes.members() {
            let g = quad(64, |x| eval_basis(a, x) * eval_basis(b, x));
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((g - want).abs() < 1e-10, "{a} {b} {g}");
        }
    }
}

#[test]
fn sigma_examples() {
    let s = sigma_eval(m(1, 0), [0.0, 0.0]);
    assert!(s[0].abs() < 1e-15 && (s[1] + 1.0).abs() < 1e-15);
    let s = sigma_eval(m(0, 1), [0.0, 0.25]);
    assert!(s[0].abs() < 1e-15 && s[1].abs() < 1e-15);
    let mut mx: f64 = 0.0;
    for i in 0..100 {
        for j in 0..100 {
            let s = sigma_eval(m(1, 1), [i as f64 / 100.0, j as f64 / 100.0]);
            mx = mx.max(s[0].hypot(s[1]));
        }
    }
    assert!((mx - FRAC_1_SQRT_2).abs() < 1e-6);
}

#[test]
fn quadratic_form_examples() {
    let q = quadratic_form_q(1, [0.3, 0.7]).unwrap();
    assert!((q[0][0] - 1.0).abs() < 1e-14 && (q[1][1] - 1.0).abs() < 1e-14 && q[0][1].abs() < 1e-14);
    let q = quadratic_form_q(2, [0.11, 0.52]).unwrap();
    assert!((q[0][0] - 1.75).abs() < 1e-14 && (q[1][1] - 1.75).abs() < 1e-14 && q[1][0].abs() < 1e-14);
    let a = quadratic_form_q(7, [0.123, 0.456]).unwrap();
    let b = quadratic_form_q(7, [0.789, 0.012]).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert!((a[i][j] - b[i][j]).abs() < 1e-13);
        }
    }
}

#[test]
fn quadratic_form_identity() {
    let mut rng = 12345u64;
    let mut next = || {
        rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (rng >> 11) as f64 / (1u64 << 53) as f64
    };
    for n in 1..=32 {
        let e = eps_inv_sq(n, SetKind::Full).unwrap();
        for _ in 0..20 {
            let q = quadratic_form_q(n, [next(), next()]).unwrap();
            let d = 0.25 * e;
            assert!((q[0][0] - d).abs() <= 1e-12 * d.max(1.0));
            assert!((q[1][1] - d).abs() <= 1e-12 * d.max(1.0));
            assert!(q[0][1].abs() <= 1e-12 * d.max(1.0));
        }
    }
}

#[test]
fn conversion_examples() {
    let c = real_to_complex(&RealSpectralField::single(2, m(1, 0)).unwrap());
    assert_eq!(c.get(m(1, 0)), Complex64::new(FRAC_1_SQRT_2, 0.0));
    assert_eq!(c.get(m(-1, 0)), Complex64::new(FRAC_1_SQRT_2, 0.0));
    let c = real_to_complex(&RealSpectralField::single(2, m(0, -1)).unwrap());
    let inv = Complex64::new(0.0, SQRT_2).inv();
    assert!((c.get(m(0, -1)) - inv).norm() < 1e-15);
    assert!((c.get(m(0, 1)) + inv).norm() < 1e-15);
}

#[test]
fn complex_field_evaluates_to_real_field() {
    let w = sample_white_noise(4, &SeededSampler::new(9, 2)).unwrap();
    let c = real_to_complex(&w);
    for x in [[0.1, 0.2], [0.73, 0.41], [0.5, 0.99]] {
        let v = c.eval(x);
        assert!((v.re - w.eval(x)).abs() < 1e-12 && v.im.abs() < 1e-12);
    }
}

#[test]
fn symmetry_violation_names_worst_mode() {
    let w = sample_white_noise(3, &SeededSampler::new(1, 0)).unwrap();
    let mut c = real_to_complex(&w);
    let v = c.get(m(2, 1));
    c.set(m(2, 1), v + Complex64::new(0.0, 0.5)).unwrap();
    let v = c.get(m(1, 0));
    c.set(m(1, 0), v + Complex64::new(1e-3, 0.0)).unwrap();
    match complex_to_real(&c) {
        Err(Error::ConjugateSymmetry { k1, k2, .. }) => assert_eq!((k1, k2).max((-k1, -k2)), (2, 1)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn biot_savart_single_mode() {
    let modes = Arc::new(mode_set(2, SetKind::Full).unwrap());
    let mut w = ComplexSpectralField::zeros(modes);
    w.set(m(1, 0), Complex64::new(1.0, 0.0)).unwrap();
    let (u1, u2) = biot_savart(&w).unwrap();
    assert!(u1.get(m(1, 0)).norm() < 1e-15);
    assert!((u2.get(m(1, 0)) - Complex64::new(0.0, -2.0 * PI)).norm() < 1e-14);
    w.set_mean(Complex64::new(0.1, 0.0));
    assert!(matches!(biot_savart(&w), Err(Error::NonzeroMean(_))));
}

#[test]
fn biot_savart_divergence_free() {
    let w = real_to_complex(&sample_white_noise(6, &SeededSampler::new(4, 0)).unwrap());
    let (u1, u2) = biot_savart(&w).unwrap();
    for &k in w.modes().members() {
        let d = u1.get(k) * k.k1() as f64 + u2.get(k) * k.k2() as f64;
        assert!(d.norm() < 1e-14);
    }
}

#[test]
fn biot_savart_matches_kernel_convolution() {
    // u(x) = Int K_M(x - y) w(y) dy with w = e_(0,1); exact on a grid finer than M.
    let (mk, g) = (16u32, 40usize);
    let w = RealSpectralField::single(2, m(0, 1)).unwrap();
    let (u1, u2) = biot_savart(&real_to_complex(&w)).unwrap();
    for x in [[0.13, 0.71], [0.5, 0.5], [0.91, 0.07], [0.33, 0.28], [0.02, 0.64], [0.77, 0.88], [0.45, 0.19], [0.6, 0.35]] {
        let a = quad(g, |y| kernel_truncated([x[0] - y[0], x[1] - y[1]], mk)[0] * w.eval(y));
        let b = quad(g, |y| kernel_truncated([x[0] - y[0], x[1] - y[1]], mk)[1] * w.eval(y));
        assert!((a - u1.eval(x).re).abs() < 1e-8, "{a} vs {}", u1.eval(x));
        assert!((b - u2.eval(x).re).abs() < 1e-8, "{b} vs {}", u2.eval(x));
    }
}

#[test]
fn noise_coupling_examples() {
    let a = noise_coupling_matrix(m(1, 0), 2).unwrap();
    for &l in a.modes().members() {
        assert_eq!(a.get(l, l), 0.0);
    }
    let k = m(1, 0);
    let l = m(0, 1);
    let entry = |mm: ModeIndex| {
        quad(64, |x| {
            let s = sigma_eval(k, x);
            let g = grad_basis(l, x);
            (s[0] * g[0] + s[1] * g[1]) * eval_basis(mm, x)
        })
    };
    let q = entry(m(1, 1));
    assert!((a.get(m(1, 1), l) - q).abs() < 1e-10, "{} vs {q}", a.get(m(1, 1), l));
    // the product only carries sine modes, so the weight sits on (-1,-1)
    let q = entry(m(-1, -1));
    assert!((a.get(m(-1, -1), l) - q).abs() < 1e-10);
    assert!((q + PI).abs() < 1e-10);
    // k = (1,0), l = (0,2): k +- l have |.|^2 = 5 > 4, so the column vanishes.
    let l = m(0, 2);
    for &r in a.modes().members() {
        assert_eq!(a.get(r, l), 0.0);
    }
}

#[test]
fn noise_coupling_matches_quadrature_all_small() {
    let n = 8;
    let g = 32;
    let small = mode_set(4, SetKind::Full).unwrap();
    let big = mode_set(n, SetKind::Full).unwrap();
    for &k in small.members().iter().step_by(3) {
        let a = noise_coupling_matrix(k, n).unwrap();
        for &l in small.members() {
            // the column of A_k at l, by quadrature on each candidate row
            let f: Vec<f64> = {
                let h = 1.0 / g as f64;
                let mut v = Vec::with_capacity(g * g);
                for i in 0..g {
                    for j in 0..g {
                        let x = [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h];
                        let s = sigma_eval(k, x);
                        let gr = grad_basis(l, x);
                        v.push(s[0] * gr[0] + s[1] * gr[1]);
                    }
                }
                v
            };
            for &r in big.members() {
                let h = 1.0 / g as f64;
                let mut q = 0.0;
                for i in 0..g {
                    for j in 0..g {
                        q += f[i * g + j] * eval_basis(r, [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
                    }
                }
                q *= h * h;
                assert!((a.get(r, l) - q).abs() < 1e-10, "k={k} l={l} m={r}");
            }
        }
    }
}

#[test]
fn noise_coupling_structure() {
    for n in [3u32, 6, 10] {
        let modes = mode_set(n, SetKind::Full).unwrap();
        for &k in modes.members() {
            let a = noise_coupling_matrix(k, n).unwrap();
            for &(r, c, v) in a.entries() {
                let (mr, mc) = (modes.members()[r as usize], modes.members()[c as usize]);
                assert_eq!(a.get(mc, mr), -v);
                let cands = [mc.checked_add(k), mc.checked_sub(k), k.checked_sub(mc)];
                let ok = cands.iter().flatten().any(|&x| x == mr || x == -mr);
                assert!(ok, "k={k} l={mc} m={mr}");
            }
        }
    }
}

#[test]
fn noise_energy_identity_on_safe_band() {
    for n in [9u32, 12, 18] {
        let noise = mode_set(n, SetKind::Third).unwrap();
        let e = eps_inv_sq(n, SetKind::Third).unwrap();
        let mats: Vec<_> = noise.members().iter().map(|&k| noise_coupling_matrix(k, n).unwrap()).collect();
        for &l in mode_set(n / 3, SetKind::Full).unwrap().members() {
            let mut s = 0.0;
            for a in &mats {
                for &(_, c, v) in a.entries() {
                    if a.modes().members()[c as usize] == l {
                        s += v * v;
                    }
                }
            }
            let want = 2.0 * PI * PI * 0.5 * e * l.norm_sq() as f64;
            assert!((s - want).abs() < 1e-10 * want.max(1.0), "N={n} l={l}: {s} vs {want}");
        }
    }
}

#[test]
fn product_expansion_degenerate_cases() {
    // e_k e_{-k} has no mode content beyond the constant and the doubled frequency.
    let k = m(2, 1);
    let terms = product_expansion(k, -k);
    assert!(terms.iter().all(|(mode, _)| mode.is_none_or(|x| x == m(4, 2) || x == m(-4, -2))));
    // ||e_k e_{-l}||^2 = 1 for k != +-l
    let t = product_expansion(m(1, 2), m(-3, 1));
    let s: f64 = t.iter().map(|(_, c)| c * c).sum();
    assert!((s - 1.0).abs() < 1e-14);
}

proptest! {
    #[test]
    fn round_trip_and_parseval(seed in any::<u64>(), n in 1u32..10) {
        let w = sample_white_noise(n, &SeededSampler::new(seed, 0)).unwrap();
        let c = real_to_complex(&w);
        prop_assert!((c.norm_sq() - w.norm_sq()).abs() <= 1e-12 * w.norm_sq());
        let back = complex_to_real(&c).unwrap();
        for (a, b) in back.coeffs().iter().zip(w.coeffs()) {
            prop_assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0));
        }
    }

    #[test]
    fn noise_coupling_skew(seed in any::<u64>(), a in -4i32..5, b in -4i32..5, n in 2u32..9) {
        prop_assume!(a != 0 || b != 0);
        let w = sample_white_noise(n, &SeededSampler::new(seed, 1)).unwrap();
        let op = noise_coupling_matrix(m(a, b), n).unwrap();
        let aw = op.apply(&w).unwrap();
        prop_assert!(aw.dot(&w).unwrap().abs() < 1e-10 * w.norm_sq().max(1.0));
    }
}
