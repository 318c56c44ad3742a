//! File formats: spectral fields, H-coefficient tables and trajectories as CSV.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back gives the same bits.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::sync::Arc;

use enstrophy_core::basis::{ComplexSpectralField, RealSpectralField};
use enstrophy_core::dynamics::TrajectoryRecord;
use enstrophy_core::lattice::{mode_set, ModeIndex, SetKind};
use enstrophy_core::nonlinear::HCoefficientTable;
use enstrophy_core::Complex64;

/// Errors from reading or writing files.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    /// Underlying IO failure.
    #[error("io: {0}")]
    Io(#[from] io::Error),
    /// CSV layer failure.
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    /// Well-formed CSV with bad content.
    #[error("bad file: {0}")]
    Content(String),
}

/// Basis of the coefficients in a field file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    /// Real basis `e_k`; `im` is zero.
    Real,
    /// Complex basis `e~_k`, plus the mean as mode `(0,0)`.
    Complex,
}

impl BasisKind {
    fn name(self) -> &'static str {
        match self {
            BasisKind::Real => "real",
            BasisKind::Complex => "complex",
        }
    }
}

/// A field read from disk.
#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    /// Real-basis coefficients.
    Real(RealSpectralField),
    /// Complex-basis coefficients.
    Complex(ComplexSpectralField),
}

/// Shortest round-trip decimal form of `x`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn parse_f64(s: &str) -> Result<f64, FormatError> {
    s.trim().parse().map_err(|_| FormatError::Content(format!("not a number: {s:?}")))
}

fn parse_i32(s: &str) -> Result<i32, FormatError> {
    s.trim().parse().map_err(|_| FormatError::Content(format!("not an integer: {s:?}")))
}

fn write_header<W: Write>(out: &mut W, cutoff: u32, basis: BasisKind) -> io::Result<()> {
    writeln!(out, "# cutoff={cutoff} basis={}", basis.name())
}

/// Write a real field: header line, then `k1,k2,re,im` rows in mode order.
pub fn write_real_field<W: Write>(w: &RealSpectralField, mut out: W) -> Result<(), FormatError> {
    write_header(&mut out, w.cutoff(), BasisKind::Real)?;
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["k1", "k2", "re", "im"])?;
    for (k, v) in w.iter() {
        csv.write_record([k.k1().to_string(), k.k2().to_string(), fmt_f64(v), fmt_f64(0.0)])?;
    }
    csv.flush()?;
    Ok(())
}

/// Write a complex field; the mean is the `(0,0)` row.
pub fn write_complex_field<W: Write>(f: &ComplexSpectralField, mut out: W) -> Result<(), FormatError> {
    write_header(&mut out, f.cutoff(), BasisKind::Complex)?;
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["k1", "k2", "re", "im"])?;
    let row = |csv: &mut csv::Writer<W>, k1: i32, k2: i32, c: Complex64| {
        csv.write_record([k1.to_string(), k2.to_string(), fmt_f64(c.re), fmt_f64(c.im)])
    };
    row(&mut csv, 0, 0, f.mean())?;
    for (k, &c) in f.modes().members().iter().zip(f.coeffs()) {
        row(&mut csv, k.k1(), k.k2(), c)?;
    }
    csv.flush()?;
    Ok(())
}

fn parse_header(line: &str) -> Result<(u32, BasisKind), FormatError> {
    let bad = || FormatError::Content(format!("bad header line {:?}", line.trim_end()));
    let rest = line.trim().strip_prefix('#').ok_or_else(bad)?;
    let (mut cutoff, mut basis) = (None, None);
    for tok in rest.split_whitespace() {
        match tok.split_once('=') {
            Some(("cutoff", v)) => cutoff = Some(v.parse::<u32>().map_err(|_| bad())?),
            Some(("basis", "real")) => basis = Some(BasisKind::Real),
            Some(("basis", "complex")) => basis = Some(BasisKind::Complex),
            _ => return Err(bad()),
        }
    }
    Ok((cutoff.ok_or_else(bad)?, basis.ok_or_else(bad)?))
}

/// Read a field written by [`write_real_field`] or [`write_complex_field`].
///
/// Every mode of the cutoff must appear exactly once; order is free.
pub fn read_field<R: Read>(input: R) -> Result<Field, FormatError> {
    let mut input = BufReader::new(input);
    let mut first = String::new();
    input.read_line(&mut first)?;
    let (n, basis) = parse_header(&first)?;
    let modes = Arc::new(mode_set(n, SetKind::Full).map_err(|e| FormatError::Content(e.to_string()))?);
    let mut csv = csv::Reader::from_reader(input);
    if csv.headers()?.iter().collect::<Vec<_>>() != ["k1", "k2", "re", "im"] {
        return Err(FormatError::Content("expected columns k1,k2,re,im".into()));
    }
    let mut vals: Vec<Option<Complex64>> = vec![None; modes.len()];
    let mut mean = None;
    for rec in csv.records() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(FormatError::Content(format!("row has {} fields", rec.len())));
        }
        let (k1, k2) = (parse_i32(&rec[0])?, parse_i32(&rec[1])?);
        let c = Complex64::new(parse_f64(&rec[2])?, parse_f64(&rec[3])?);
        let slot = match ModeIndex::nonzero(k1, k2) {
            None if basis == BasisKind::Complex => &mut mean,
            None => return Err(FormatError::Content("(0,0) row in a real field".into())),
            Some(k) => {
                let i = modes
                    .index_of(k)
                    .ok_or_else(|| FormatError::Content(format!("mode ({k1},{k2}) outside cutoff {n}")))?;
                &mut vals[i]
            }
        };
        if slot.replace(c).is_some() {
            return Err(FormatError::Content(format!("duplicate mode ({k1},{k2})")));
        }
    }
    let missing = || FormatError::Content("missing modes".into());
    let coeffs: Vec<Complex64> = vals.into_iter().collect::<Option<_>>().ok_or_else(missing)?;
    let err = |e: enstrophy_core::Error| FormatError::Content(e.to_string());
    match basis {
        BasisKind::Real => {
            if coeffs.iter().any(|c| c.im != 0.0) {
                return Err(FormatError::Content("nonzero imaginary part in a real field".into()));
            }
            let re = coeffs.iter().map(|c| c.re).collect();
            Ok(Field::Real(RealSpectralField::from_coeffs(modes, re).map_err(err)?))
        }
        BasisKind::Complex => {
            let mean = mean.ok_or_else(missing)?;
            Ok(Field::Complex(ComplexSpectralField::from_coeffs(modes, mean, coeffs).map_err(err)?))
        }
    }
}

/// Write an H-coefficient table as `j1,j2,k1,k2,l1,l2,re,im`.
pub fn write_h_table<W: Write>(t: &HCoefficientTable, out: W) -> Result<(), FormatError> {
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["j1", "j2", "k1", "k2", "l1", "l2", "re", "im"])?;
    let j = t.j();
    for &(k, l, h) in t.entries() {
        csv.write_record([
            j.k1().to_string(),
            j.k2().to_string(),
            k.k1().to_string(),
            k.k2().to_string(),
            l.k1().to_string(),
            l.k2().to_string(),
            fmt_f64(h.re),
            fmt_f64(h.im),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

/// Column label of an observable, e.g. `w(1,0)`.
pub fn observable_label(k: ModeIndex) -> String {
    format!("w({},{})", k.k1(), k.k2())
}

/// Write an ensemble as `path,time,<observables>,enstrophy`, one row per record.
pub fn write_trajectories<W: Write>(records: &[TrajectoryRecord], out: W) -> Result<(), FormatError> {
    let mut csv = csv::Writer::from_writer(out);
    let obs = records.first().map(|r| r.observables.clone()).unwrap_or_default();
    let mut header = vec!["path".to_string(), "time".to_string()];
    header.extend(obs.iter().map(|&k| observable_label(k)));
    header.push("enstrophy".into());
    csv.write_record(&header)?;
    for (p, r) in records.iter().enumerate() {
        for (t, (vals, e)) in r.times.iter().zip(r.mode_values.iter().zip(&r.enstrophy)) {
            let mut row = vec![p.to_string(), fmt_f64(*t)];
            row.extend(vals.iter().map(|&v| fmt_f64(v)));
            row.push(fmt_f64(*e));
            csv.write_record(&row)?;
        }
    }
    csv.flush()?;
    Ok(())
}
