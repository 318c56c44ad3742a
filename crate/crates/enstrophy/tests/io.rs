use std::sync::Arc;

use enstrophy::io::{read_field, write_complex_field, write_h_table, write_real_field, write_trajectories, Field};
use enstrophy_core::basis::{real_to_complex, ComplexSpectralField, RealSpectralField};
use enstrophy_core::lattice::{mode_set, ModeIndex, SetKind};
use enstrophy_core::nonlinear::HCoefficientTable;
use enstrophy_core::Complex64;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::ANY.prop_filter("finite", |x| x.is_finite())
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

#[test]
fn real_field_file_layout() {
    let mut w = RealSpectralField::zeros(1).unwrap();
    w.set(ModeIndex::new(1, 0).unwrap(), 0.5).unwrap();
    w.set(ModeIndex::new(0, -1).unwrap(), -1e-300).unwrap();
    let mut buf = Vec::new();
    write_real_field(&w, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# cutoff=1 basis=real");
    assert_eq!(lines[1], "k1,k2,re,im");
    assert_eq!(lines.len(), 2 + 4);
    assert!(text.contains("1,0,0.5,0.0"));
    assert!(text.contains("0,-1,-1e-300,0.0"));
}

#[test]
fn rejects_malformed_files() {
    let cases = [
        "k1,k2,re,im\n",
        "# cutoff=1 basis=weird\nk1,k2,re,im\n",
        "# cutoff=1 basis=real\nk1,k2,re\n",
        "# cutoff=1 basis=real\nk1,k2,re,im\n1,0,1.0,0.0\n",
        "# cutoff=1 basis=real\nk1,k2,re,im\n1,0,1,0\n1,0,1,0\n0,1,1,0\n-1,0,1,0\n0,-1,1,0\n",
        "# cutoff=1 basis=real\nk1,k2,re,im\n1,0,1,0\n0,1,1,0\n-1,0,1,0\n0,-1,1,0\n2,0,1,0\n",
        "# cutoff=1 basis=real\nk1,k2,re,im\n1,0,1,0.5\n0,1,1,0\n-1,0,1,0\n0,-1,1,0\n",
        "# cutoff=1 basis=real\nk1,k2,re,im\n1,0,x,0\n0,1,1,0\n-1,0,1,0\n0,-1,1,0\n",
    ];
    for c in cases {
        assert!(read_field(c.as_bytes()).is_err(), "accepted {c:?}");
    }
}

#[test]
fn h_table_has_header_and_one_row_per_entry() {
    let t = HCoefficientTable::build(ModeIndex::new(1, 0).unwrap(), 3).unwrap();
    let mut buf = Vec::new();
    write_h_table(&t, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "j1,j2,k1,k2,l1,l2,re,im");
    assert_eq!(text.lines().count(), 1 + t.entries().len());
}

#[test]
fn trajectory_header_quotes_labels() {
    let mut buf = Vec::new();
    write_trajectories(&[], &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().trim_end(), "path,time,enstrophy");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn real_field_round_trip_is_bit_exact(n in 1u32..6, seed in any::<u64>(), pool in prop::collection::vec(finite(), 128)) {
        let modes = Arc::new(mode_set(n, SetKind::Full).unwrap());
        let coeffs: Vec<f64> = (0..modes.len()).map(|i| pool[(i + seed as usize) % pool.len()]).collect();
        let w = RealSpectralField::from_coeffs(modes, coeffs).unwrap();
        let mut buf = Vec::new();
        write_real_field(&w, &mut buf).unwrap();
        match read_field(buf.as_slice()).unwrap() {
            Field::Real(r) => prop_assert_eq!(bits(r.coeffs()), bits(w.coeffs())),
            Field::Complex(_) => prop_assert!(false, "wrong basis"),
        }
    }

    #[test]
    fn complex_field_round_trip_is_bit_exact(n in 1u32..5, re in prop::collection::vec(finite(), 80), im in prop::collection::vec(finite(), 80)) {
        let modes = Arc::new(mode_set(n, SetKind::Full).unwrap());
        let coeffs: Vec<Complex64> = (0..modes.len()).map(|i| Complex64::new(re[i], im[i])).collect();
        let f = ComplexSpectralField::from_coeffs(modes, Complex64::new(re[79], im[79]), coeffs).unwrap();
        let mut buf = Vec::new();
        write_complex_field(&f, &mut buf).unwrap();
        match read_field(buf.as_slice()).unwrap() {
            Field::Complex(g) => {
                let flat = |h: &ComplexSpectralField| {
                    let mut v = vec![h.mean().re, h.mean().im];
                    v.extend(h.coeffs().iter().flat_map(|c| [c.re, c.im]));
                    bits(&v)
                };
                prop_assert_eq!(flat(&g), flat(&f));
            }
            Field::Real(_) => prop_assert!(false, "wrong basis"),
        }
    }

    #[test]
    fn rows_may_come_in_any_order(n in 1u32..4, rot in 0usize..40) {
        let w = enstrophy_core::measure::sample_white_noise(n, &enstrophy_core::measure::SeededSampler::new(rot as u64, 0)).unwrap();
        let mut buf = Vec::new();
        write_complex_field(&real_to_complex(&w), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        let k = rot % (lines.len() - 2);
        lines[2..].rotate_left(k);
        let back = read_field(lines.join("\n").as_bytes()).unwrap();
        prop_assert_eq!(back, Field::Complex(real_to_complex(&w)));
    }
}
