//! Sampling the white-noise measure and moment statistics of fields.
//!
//! Streams: `master_seed` and `stream_index` are mixed by SplitMix64 into a
//! 256-bit ChaCha8 key; a 64-bit substream selects the ChaCha stream (nonce).
//! Normals use the ziggurat sampler of `rand_distr::StandardNormal`.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::basis::RealSpectralField;
use crate::lattice::ModeIndex;
use crate::Result;

/// Name of the normal generator, recorded in output metadata.
pub const NORMAL_METHOD: &str = "ziggurat (rand_distr StandardNormal) over ChaCha8";

/// SplitMix64 step: returns the next output and advances `state`.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed source for one Monte-Carlo path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeededSampler {
    /// Experiment-wide seed.
    pub master_seed: u64,
    /// Path (or task) index.
    pub stream_index: u64,
}

/// What a substream is used for; the tag occupies the top byte.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    /// Sequential draws with no mode structure.
    Plain,
    /// Initial condition, one stream per mode.
    Initial,
    /// Transport noise increments, one stream per noise mode.
    TransportNoise,
    /// Limit-equation noise, one stream per state mode.
    LimitNoise,
    /// Bootstrap resampling.
    Bootstrap,
}

impl Purpose {
    /// Substream id `i` within this purpose.
    pub const fn substream(self, i: u64) -> u64 {
        self.tag() << 56 | i
    }

    const fn tag(self) -> u64 {
        match self {
            Purpose::Plain => 0,
            Purpose::Initial => 1,
            Purpose::TransportNoise => 2,
            Purpose::LimitNoise => 3,
            Purpose::Bootstrap => 4,
        }
    }
}

/// Substream id keyed by mode coordinates, so draws agree across cutoffs.
pub fn mode_substream(purpose: Purpose, k: ModeIndex) -> u64 {
    let a = (k.k1() as i64 + (1 << 23)) as u64 & 0xFF_FFFF;
    let b = (k.k2() as i64 + (1 << 23)) as u64 & 0xFF_FFFF;
    purpose.tag() << 56 | a << 24 | b
}

impl SeededSampler {
    /// A sampler for path `stream_index` of experiment `master_seed`.
    pub const fn new(master_seed: u64, stream_index: u64) -> Self {
        SeededSampler { master_seed, stream_index }
    }

    /// The same experiment, another path.
    pub const fn with_stream(self, stream_index: u64) -> Self {
        SeededSampler { master_seed: self.master_seed, stream_index }
    }

    fn key(&self) -> [u8; 32] {
        let mut st = self.master_seed;
        let _ = splitmix64(&mut st);
        st ^= self.stream_index.wrapping_mul(0xD605_BBB5_8C8A_BBFD);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut st).to_le_bytes());
        }
        key
    }

    /// Generator for a substream of this path.
    pub fn rng(&self, substream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::from_seed(self.key());
        r.set_stream(substream);
        r
    }

    /// Generator for a purpose-tagged mode substream.
    pub fn mode_rng(&self, purpose: Purpose, k: ModeIndex) -> ChaCha8Rng {
        self.rng(mode_substream(purpose, k))
    }
}

/// One standard normal draw.
pub fn normal<R: rand_core::RngCore>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// iid standard normal coefficients on `Lambda_N`, drawn in mode order from
/// the plain substream.
pub fn sample_white_noise(n: u32, s: &SeededSampler) -> Result<RealSpectralField> {
    let mut f = RealSpectralField::zeros(n)?;
    let mut rng = s.rng(Purpose::Plain.substream(0));
    for c in f.coeffs_mut() {
        *c = normal(&mut rng);
    }
    Ok(f)
}

/// White noise with one stream per mode: the coefficient of `e_k` depends only
/// on `(s, k)`, not on `N`.
pub fn sample_white_noise_keyed(n: u32, s: &SeededSampler) -> Result<RealSpectralField> {
    let mut f = RealSpectralField::zeros(n)?;
    let modes: Vec<ModeIndex> = f.modes().members().to_vec();
    for (c, k) in f.coeffs_mut().iter_mut().zip(modes) {
        *c = normal(&mut s.mode_rng(Purpose::Initial, k));
    }
    Ok(f)
}

/// `(Sum_k (1+|k|^2)^s <w, e_k>^2)^{1/2}`.
pub fn sobolev_norm(w: &RealSpectralField, s: f64) -> f64 {
    libm::sqrt(sobolev_norm_sq(w, s))
}

/// Square of [`sobolev_norm`].
pub fn sobolev_norm_sq(w: &RealSpectralField, s: f64) -> f64 {
    w.iter().map(|(k, a)| libm::pow(1.0 + k.norm_sq() as f64, s) * a * a).sum()
}

/// `E ||w||^2_{H^s}` under the white noise on `Lambda_N`: `Sum (1+|k|^2)^s`.
pub fn expected_sobolev_sq(n: u32, s: f64) -> Result<f64> {
    let set = crate::lattice::mode_set(n, crate::lattice::SetKind::Full)?;
    Ok(set.members().iter().map(|k| libm::pow(1.0 + k.norm_sq() as f64, s)).sum())
}
