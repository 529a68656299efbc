//! QPSK mapping, bitwise XOR, and the random channel/noise model.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{Cplx, Mat2, Vec2};

/// Two bits carried by one QPSK symbol; `re` rides the in-phase dimension,
/// `im` the quadrature. `true` is bit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BitPair {
    pub re: bool,
    pub im: bool,
}

impl BitPair {
    pub const ZERO: BitPair = BitPair {
        re: false,
        im: false,
    };

    pub const ALL: [BitPair; 4] = [
        BitPair::from_index(0),
        BitPair::from_index(1),
        BitPair::from_index(2),
        BitPair::from_index(3),
    ];

    pub const fn new(re: bool, im: bool) -> Self {
        BitPair { re, im }
    }

    /// `index = 2·b_re + b_im`.
    pub const fn from_index(index: u8) -> Self {
        BitPair {
            re: index & 2 != 0,
            im: index & 1 != 0,
        }
    }

    pub const fn index(self) -> u8 {
        ((self.re as u8) << 1) | self.im as u8
    }

    /// Number of set bits (0, 1 or 2); used as an error count against zero.
    pub const fn weight(self) -> u32 {
        self.re as u32 + self.im as u32
    }
}

impl fmt::Display for BitPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.re as u8, self.im as u8)
    }
}

/// A point of the `{±1 ± j}` constellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpskSymbol(Cplx);

impl QpskSymbol {
    pub fn value(self) -> Cplx {
        self.0
    }
}

fn level(bit: bool) -> f64 {
    if bit {
        -1.0
    } else {
        1.0
    }
}

/// Bit 0 maps to level +1 and bit 1 to level -1, per dimension.
pub fn modulate(bits: BitPair) -> QpskSymbol {
    QpskSymbol(Cplx::new(level(bits.re), level(bits.im)))
}

/// Sign decision per dimension; an exact zero decides bit 0.
pub fn demodulate_hard(s: Cplx) -> BitPair {
    BitPair::new(s.re < 0.0, s.im < 0.0)
}

pub fn xor_bits(a: BitPair, b: BitPair) -> BitPair {
    BitPair::new(a.re ^ b.re, a.im ^ b.im)
}

/// Per-dimension noise level. SNR is defined as `1/σ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub sigma: f64,
    pub sigma_sq: f64,
}

impl NoiseParams {
    pub const NOISELESS: NoiseParams = NoiseParams {
        sigma: 0.0,
        sigma_sq: 0.0,
    };

    /// From a per-dimension variance. Panics on a negative or non-finite
    /// variance.
    pub fn from_variance(sigma_sq: f64) -> Self {
        assert!(
            sigma_sq.is_finite() && sigma_sq >= 0.0,
            "noise variance must be finite and nonnegative, got {sigma_sq}"
        );
        NoiseParams {
            sigma: sigma_sq.sqrt(),
            sigma_sq,
        }
    }
}

pub fn snr_to_sigma(snr_db: f64) -> NoiseParams {
    NoiseParams::from_variance(10f64.powf(-snr_db / 10.0))
}

/// A reproducible random substream identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the 64-bit stream id mapped onto the cipher's
/// stream nonce, so distinct ids never overlap and the sequence is the same
/// on every platform.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

/// Bits of a stream id reserved for the trial index.
pub const TRIAL_INDEX_BITS: u32 = 40;

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    /// Substream for one Monte Carlo trial at one SNR grid point.
    ///
    /// Panics if `trial_index` does not fit in [`TRIAL_INDEX_BITS`] bits or
    /// `snr_index` in the remaining 24.
    pub fn for_trial(seed: u64, snr_index: usize, trial_index: u64) -> Self {
        assert!(trial_index < 1 << TRIAL_INDEX_BITS, "trial index overflow");
        assert!(
            (snr_index as u64) < 1 << (64 - TRIAL_INDEX_BITS),
            "snr index overflow"
        );
        RngStream::new(seed, ((snr_index as u64) << TRIAL_INDEX_BITS) | trial_index)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Rewind to the start of the substream.
    pub fn reset(&mut self) {
        *self = RngStream::new(self.seed, self.stream_id);
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn bit_pair(&mut self) -> BitPair {
        BitPair::from_index((self.rng.next_u32() & 3) as u8)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.next_u32() & 1 != 0
    }

    fn complex_gaussian(&mut self, per_dim_sigma: f64) -> Cplx {
        let re = self.gaussian();
        let im = self.gaussian();
        Cplx::new(per_dim_sigma * re, per_dim_sigma * im)
    }
}

/// Rayleigh channel: i.i.d. entries with `E|h_ij|² = 1`.
pub fn draw_channel(rng: &mut RngStream) -> Mat2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h11 = rng.complex_gaussian(s);
    let h12 = rng.complex_gaussian(s);
    let h21 = rng.complex_gaussian(s);
    let h22 = rng.complex_gaussian(s);
    Mat2::new(h11, h12, h21, h22)
}

pub fn draw_noise(rng: &mut RngStream, p: &NoiseParams) -> Vec2 {
    let a = rng.complex_gaussian(p.sigma);
    let b = rng.complex_gaussian(p.sigma);
    Vec2::new(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulation_convention() {
        let m = |re, im| modulate(BitPair::new(re, im)).value();
        assert_eq!(m(false, false), Cplx::new(1.0, 1.0));
        assert_eq!(m(true, false), Cplx::new(-1.0, 1.0));
        assert_eq!(m(true, true), Cplx::new(-1.0, -1.0));
    }

    #[test]
    fn hard_decision_sign_rule() {
        assert_eq!(demodulate_hard(Cplx::new(1.0, 1.0)), BitPair::ZERO);
        assert_eq!(
            demodulate_hard(Cplx::new(-0.3, 2.7)),
            BitPair::new(true, false)
        );
        assert_eq!(demodulate_hard(Cplx::new(0.0, -0.0)), BitPair::ZERO);
        for b in BitPair::ALL {
            assert_eq!(demodulate_hard(modulate(b).value()), b);
        }
    }

    #[test]
    fn xor_truth_table() {
        assert_eq!(
            xor_bits(BitPair::new(false, true), BitPair::new(false, true)),
            BitPair::ZERO
        );
        assert_eq!(
            xor_bits(BitPair::new(true, false), BitPair::ZERO),
            BitPair::new(true, false)
        );
        for a in BitPair::ALL {
            for b in BitPair::ALL {
                let x = xor_bits(a, b);
                assert_eq!(x.re, a.re != b.re);
                assert_eq!(x.im, a.im != b.im);
                assert_eq!(x, xor_bits(b, a));
                assert_eq!(xor_bits(x, b), a);
            }
            assert_eq!(xor_bits(a, a), BitPair::ZERO);
        }
    }

    #[test]
    fn index_round_trip() {
        for i in 0..4 {
            assert_eq!(BitPair::from_index(i).index(), i);
        }
    }

    #[test]
    fn snr_mapping() {
        assert_eq!(snr_to_sigma(0.0).sigma_sq, 1.0);
        assert!((snr_to_sigma(10.0).sigma_sq - 0.1).abs() < 1e-15);
        assert!((snr_to_sigma(20.0).sigma - 0.1).abs() < 1e-15);
    }

    #[test]
    fn zero_sigma_noise_is_exactly_zero() {
        let mut rng = RngStream::new(7, 0);
        for _ in 0..100 {
            assert_eq!(draw_noise(&mut rng, &NoiseParams::NOISELESS), Vec2::ZERO);
        }
    }

    #[test]
    fn streams_reset_and_differ() {
        let mut a = RngStream::new(42, 5);
        let h1 = draw_channel(&mut a);
        a.reset();
        assert_eq!(draw_channel(&mut a), h1);
        let mut b = RngStream::new(42, 6);
        assert_ne!(draw_channel(&mut b), h1);
        let mut c = RngStream::for_trial(42, 0, 5);
        assert_eq!(draw_channel(&mut c), h1);
    }
}
