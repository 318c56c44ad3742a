//! Integer lattice work: wavevectors, ball cutoffs, the coupling coefficients
//! `C_{k,l}` and the scaling constants `eps_N`, `S`.
//!
//! Mode sets are ordered colexicographically, i.e. by `(k2, k1)`.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use core::fmt;
use core::ops::Neg;

use crate::{Error, Result};

/// A nonzero wavevector `k = (k1, k2)` in `Z^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    k1: i32,
    k2: i32,
}

impl ModeIndex {
    /// Build a mode, rejecting `(0,0)`.
    pub fn new(k1: i32, k2: i32) -> Result<Self> {
        if k1 == 0 && k2 == 0 {
            return Err(Error::ZeroMode);
        }
        Ok(ModeIndex { k1, k2 })
    }

    /// Like [`ModeIndex::new`] but returns `None` for the origin.
    pub fn nonzero(k1: i32, k2: i32) -> Option<Self> {
        ModeIndex::new(k1, k2).ok()
    }

    /// First component.
    pub const fn k1(self) -> i32 {
        self.k1
    }

    /// Second component.
    pub const fn k2(self) -> i32 {
        self.k2
    }

    /// `|k|^2` as an exact integer.
    pub const fn norm_sq(self) -> i64 {
        let (a, b) = (self.k1 as i64, self.k2 as i64);
        a * a + b * b
    }

    /// `|k|`.
    pub fn norm(self) -> f64 {
        libm::sqrt(self.norm_sq() as f64)
    }

    /// `k_perp = (k2, -k1)`.
    pub const fn perp(self) -> [i64; 2] {
        [self.k2 as i64, -(self.k1 as i64)]
    }

    /// `k . l`.
    pub const fn dot(self, l: ModeIndex) -> i64 {
        self.k1 as i64 * l.k1 as i64 + self.k2 as i64 * l.k2 as i64
    }

    /// `k_perp . l = k2 l1 - k1 l2`.
    pub const fn perp_dot(self, l: ModeIndex) -> i64 {
        self.k2 as i64 * l.k1 as i64 - self.k1 as i64 * l.k2 as i64
    }

    /// True for `Z^2_+`: `k1 > 0`, or `k1 = 0` and `k2 > 0`.
    pub const fn is_positive(self) -> bool {
        self.k1 > 0 || (self.k1 == 0 && self.k2 > 0)
    }

    /// Representative of `{k, -k}` lying in `Z^2_+`.
    pub fn positive(self) -> Self {
        if self.is_positive() {
            self
        } else {
            -self
        }
    }

    /// `k + l`, or `None` when it vanishes.
    pub fn checked_add(self, l: ModeIndex) -> Option<Self> {
        ModeIndex::nonzero(self.k1 + l.k1, self.k2 + l.k2)
    }

    /// `k - l`, or `None` when it vanishes.
    pub fn checked_sub(self, l: ModeIndex) -> Option<Self> {
        ModeIndex::nonzero(self.k1 - l.k1, self.k2 - l.k2)
    }
}

impl Neg for ModeIndex {
    type Output = ModeIndex;
    fn neg(self) -> ModeIndex {
        ModeIndex { k1: -self.k1, k2: -self.k2 }
    }
}

impl Ord for ModeIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.k2, self.k1).cmp(&(other.k2, other.k1))
    }
}

impl PartialOrd for ModeIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k1, self.k2)
    }
}

/// Which ball a mode set is cut from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SetKind {
    /// `Lambda_N = {0 < |k| <= N}`.
    Full,
    /// `Gamma_N = {0 < |k| <= N/3}`.
    Third,
}

impl SetKind {
    /// Exact membership test on `|k|^2`.
    pub const fn admits(self, n: u32, norm_sq: i64) -> bool {
        let n2 = n as i64 * n as i64;
        match self {
            SetKind::Full => norm_sq <= n2,
            SetKind::Third => 9 * norm_sq <= n2,
        }
    }

    /// Bound on `|k1|` and `|k2|` over members.
    pub fn radius(self, n: u32) -> i32 {
        match self {
            SetKind::Full => n as i32,
            SetKind::Third => (n / 3) as i32,
        }
    }
}

/// An ordered, negation-closed set of modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeSet {
    cutoff: u32,
    kind: SetKind,
    members: Vec<ModeIndex>,
}

/// Enumerate `Lambda_N` or `Gamma_N`.
pub fn mode_set(n: u32, kind: SetKind) -> Result<ModeSet> {
    if n == 0 {
        return Err(Error::ZeroCutoff);
    }
    let r = kind.radius(n);
    let mut members = Vec::new();
    for k2 in -r..=r {
        for k1 in -r..=r {
            if let Some(k) = ModeIndex::nonzero(k1, k2) {
                if kind.admits(n, k.norm_sq()) {
                    members.push(k);
                }
            }
        }
    }
    Ok(ModeSet { cutoff: n, kind, members })
}

impl ModeSet {
    /// The cutoff `N`.
    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// Full or third ball.
    pub fn kind(&self) -> SetKind {
        self.kind
    }

    /// Members in colexicographic order.
    pub fn members(&self) -> &[ModeIndex] {
        &self.members
    }

    /// Number of members.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// True when the set has no members.
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Membership by exact integer test.
    pub fn contains(&self, k: ModeIndex) -> bool {
        self.kind.admits(self.cutoff, k.norm_sq())
    }

    /// Position of `k` in the member order.
    pub fn index_of(&self, k: ModeIndex) -> Option<usize> {
        if !self.contains(k) {
            return None;
        }
        self.members.binary_search(&k).ok()
    }

    /// Bound on `|k1|` and `|k2|` over members.
    pub fn radius(&self) -> i32 {
        self.kind.radius(self.cutoff)
    }
}

/// Compensated (Neumaier) running sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `Sum_{k in set} 1/|k|^2`, i.e. `eps^{-2}`, without building the set.
pub fn eps_inv_sq(n: u32, kind: SetKind) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroCutoff);
    }
    let r = kind.radius(n) as i64;
    // One quadrant {a >= 1, b >= 0} times 4 covers Z^2 minus the origin.
    let mut acc = Neumaier::default();
    for a in 1..=r {
        let mut row = Neumaier::default();
        for b in 0..=r {
            let s = a * a + b * b;
            if !kind.admits(n, s) {
                break;
            }
            row.add(1.0 / s as f64);
        }
        acc.add(4.0 * row.value());
    }
    let v = acc.value();
    if v == 0.0 {
        return Err(Error::EmptyModeSet(n));
    }
    Ok(v)
}

/// `eps = (Sum_{k in set} 1/|k|^2)^{-1/2}`.
pub fn eps(n: u32, kind: SetKind) -> Result<f64> {
    Ok(1.0 / libm::sqrt(eps_inv_sq(n, kind)?))
}

/// `C_{k,l} = k_perp . l / |k|^2`.
pub fn coupling(k: ModeIndex, l: ModeIndex) -> f64 {
    k.perp_dot(l) as f64 / k.norm_sq() as f64
}

/// `Sum_{k in set} C_{k,l}^2`, which equals `eps^{-2} |l|^2 / 2`.
pub fn sum_coupling_sq(l: ModeIndex, n: u32, kind: SetKind) -> Result<f64> {
    let set = mode_set(n, kind)?;
    if set.is_empty() {
        return Err(Error::EmptyModeSet(n));
    }
    let mut acc = Neumaier::default();
    for &k in set.members() {
        let c = coupling(k, l);
        acc.add(c * c);
    }
    Ok(acc.value())
}

/// Outcome of [`lattice_sum_s`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSum {
    /// Estimate of `S = Sum_{k != 0} |k|^{-4}`.
    pub value: f64,
    /// Certified bound on `|S - value|` from the tail model.
    pub tail_bound: f64,
    /// Radius of the explicit partial sum.
    pub radius: u64,
}

/// Default cap on the partial-sum radius.
pub const MAX_LATTICE_RADIUS: u64 = 100_000;

/// Classical closed form `4 zeta(2) beta(2) = (2 pi^2 / 3) G`.
pub const S_CLOSED_FORM: f64 = 2.0 * PI * PI / 3.0 * CATALAN;

/// Catalan's constant.
pub const CATALAN: f64 = 0.915_965_594_177_219_015_054_603_514_932_384_110_774;

/// Number of lattice points (origin included) in the closed disc of radius `r`.
pub fn gauss_circle_count(r: u64) -> u64 {
    let r2 = r * r;
    let mut count = 1 + 4 * r; // origin and the four half axes
    for a in 1..=r {
        // b ranges over 1..=isqrt(r^2 - a^2) in each quadrant
        count += 4 * isqrt(r2 - a * a);
    }
    count
}

fn isqrt(n: u64) -> u64 {
    let mut x = libm::sqrt(n as f64) as u64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// `Sum_{0 < |k| <= r} |k|^{-4}` by direct summation.
pub fn partial_sum_s(r: u64) -> f64 {
    let r2 = r * r;
    let mut total = Neumaier::default();
    for a in 1..=r {
        let bmax = isqrt(r2 - a * a);
        let mut row = Neumaier::default();
        for b in 0..=bmax {
            let s = (a * a + b * b) as f64;
            row.add(1.0 / (s * s));
        }
        total.add(4.0 * row.value());
    }
    total.value()
}

/// Bound on the Stieltjes remainder for the tail beyond radius `r`.
///
/// With `E(r) = N(r) - pi r^2` and `|E(r)| <= sqrt(2) pi r + pi/2`, the
/// remainder `4 Int_r^inf E(t) t^{-5} dt` is bounded by this value.
pub fn tail_remainder_bound(r: f64) -> f64 {
    4.0 * core::f64::consts::SQRT_2 * PI / (3.0 * r * r * r) + PI / (2.0 * r * r * r * r)
}

/// `S` with tail `pi/R^2 - E(R)/R^4`, choosing `R` from `rel_tol`.
pub fn lattice_sum_s(rel_tol: f64) -> Result<LatticeSum> {
    lattice_sum_s_capped(rel_tol, MAX_LATTICE_RADIUS)
}

/// As [`lattice_sum_s`] with an explicit radius cap.
pub fn lattice_sum_s_capped(rel_tol: f64, max_radius: u64) -> Result<LatticeSum> {
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidConfig(alloc::string::String::from(
            "rel_tol must be positive",
        )));
    }
    // S > 4 (the |k| = 1 shell), so this target certifies the relative bound.
    let target = 4.0 * rel_tol;
    let guess = libm::ceil(libm::cbrt(4.0 * core::f64::consts::SQRT_2 * PI / (3.0 * target)));
    let mut r = if guess.is_finite() && guess >= 1.0 { guess as u64 } else { u64::MAX };
    if r > max_radius {
        return Err(Error::RadiusTooLarge { needed: r, max: max_radius });
    }
    while r > 1 && tail_remainder_bound((r - 1) as f64) <= target {
        r -= 1;
    }
    while tail_remainder_bound(r as f64) > target {
        r += 1;
        if r > max_radius {
            return Err(Error::RadiusTooLarge { needed: r, max: max_radius });
        }
    }
    let rf = r as f64;
    let e = gauss_circle_count(r) as f64 - PI * rf * rf;
    let tail = PI / (rf * rf) - e / (rf * rf * rf * rf);
    Ok(LatticeSum {
        value: partial_sum_s(r) + tail,
        tail_bound: tail_remainder_bound(rf),
        radius: r,
    })
}

/// `2 sqrt(5 S) / pi^2`.
pub fn viscosity_threshold(s: f64) -> f64 {
    2.0 * libm::sqrt(5.0 * s) / (PI * PI)
}
