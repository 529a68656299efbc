//! Relay-side detectors. Each one maps a received vector `y = H·x + n` to a
//! hard decision on `x1 ⊕ x2`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{apply_qh, qr_decompose, swap_columns, Cplx, Mat2, QrFactors, Vec2};
use crate::phy::{demodulate_hard, modulate, xor_bits, BitPair, NoiseParams, QpskSymbol};

/// `H` is treated as singular when `|det H| <= SINGULAR_TOL · ‖H‖_F²`.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DetectorId {
    VblastNc,
    VblastPnc,
    SortedVblastNc,
    SortedVblastPnc,
    LinearZfNc,
    MlOracle,
}

impl DetectorId {
    pub const ALL: [DetectorId; 6] = [
        DetectorId::VblastNc,
        DetectorId::VblastPnc,
        DetectorId::SortedVblastNc,
        DetectorId::SortedVblastPnc,
        DetectorId::LinearZfNc,
        DetectorId::MlOracle,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            DetectorId::VblastNc => "vblast_nc",
            DetectorId::VblastPnc => "vblast_pnc",
            DetectorId::SortedVblastNc => "sorted_vblast_nc",
            DetectorId::SortedVblastPnc => "sorted_vblast_pnc",
            DetectorId::LinearZfNc => "linear_zf_nc",
            DetectorId::MlOracle => "ml_oracle",
        }
    }

    pub const fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for DetectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorId {
    type Err = Error;

    /// Accepts both `vblast_pnc` and `vblast-pnc`.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('-', "_");
        DetectorId::ALL
            .into_iter()
            .find(|d| d.name() == norm)
            .ok_or_else(|| Error::Config(format!("unknown detector `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorInput {
    pub y: Vec2,
    pub h: Mat2,
    /// Only the ML oracle looks at this.
    pub noise: NoiseParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XorEstimate {
    pub bits: BitPair,
}

/// Integer PNC coefficient: the remaining first-layer signal is `x1 + k·x2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PncCoefficient(pub i64);

impl PncCoefficient {
    pub fn get(self) -> i64 {
        self.0
    }
}

/// `k = round(real(r12) / r11)`, ties away from zero.
pub fn compute_k(r11: f64, r12: Cplx) -> Result<PncCoefficient> {
    if r11.is_nan() || r11 <= 0.0 {
        return Err(Error::DegenerateChannel("r11 must be positive"));
    }
    // `as` saturates for out-of-range ratios.
    Ok(PncCoefficient((r12.re / r11).round() as i64))
}

/// Threshold decision from an estimate of `x1 + k·x2` to the XOR bits, with
/// threshold `|k|` in each dimension.
///
/// For `k > 0` equal bits give `|x1 + k·x2| = k + 1` and unequal bits give
/// `k - 1`; for `k < 0` the roles swap (`|k| - 1` for equal bits).
pub fn pnc_map(est: Cplx, k: i64) -> Result<BitPair> {
    if k == 0 {
        return Err(Error::InvalidCoefficient(k));
    }
    let gamma = k.unsigned_abs() as f64;
    let decide = |v: f64| {
        if k > 0 {
            v.abs() - gamma < 0.0
        } else {
            v.abs() - gamma > 0.0
        }
    };
    Ok(BitPair::new(decide(est.re), decide(est.im)))
}

fn check_nonsingular(h: &Mat2) -> Result<()> {
    if !h.is_finite() {
        return Err(Error::DegenerateChannel("non-finite channel entry"));
    }
    if !h.is_nonsingular(SINGULAR_TOL) {
        return Err(Error::DegenerateChannel("channel matrix is singular"));
    }
    Ok(())
}

/// QR of `H`, or of `H` with its columns exchanged when `sorted` is set and
/// the exchange yields a strictly larger `r22`. Returns the factors and
/// whether the columns were swapped.
pub fn ordered_qr(h: &Mat2, sorted: bool) -> Result<(QrFactors, bool)> {
    let plain = qr_decompose(h)?;
    if !sorted {
        return Ok((plain, false));
    }
    let swapped = qr_decompose(&swap_columns(h))?;
    if swapped.r22() > plain.r22() {
        Ok((swapped, true))
    } else {
        Ok((plain, false))
    }
}

fn hard_symbol(s: Cplx) -> QpskSymbol {
    modulate(demodulate_hard(s))
}

/// Second layer: `x̂2 = sign(w2 / r22)`. `r22 > 0` is guaranteed by the
/// singularity check, and dividing by a positive real does not change the
/// sign, so the decision is taken on `w2` directly.
fn second_layer(w: &Vec2) -> QpskSymbol {
    hard_symbol(w.b)
}

/// Full cancellation of the detected second layer, then XOR of both
/// individual decisions.
fn nc_combine(f: &QrFactors, w: &Vec2, x2: QpskSymbol) -> BitPair {
    let x1_soft = (w.a - f.r12() * x2.value()) / f.r11();
    xor_bits(demodulate_hard(x1_soft), demodulate_hard(x2.value()))
}

/// QR-VBLAST network coding: detect both layers by successive
/// interference cancellation and XOR the decisions.
pub fn detect_vblast_nc(input: &DetectorInput, sorted: bool) -> Result<XorEstimate> {
    check_nonsingular(&input.h)?;
    let (f, _) = ordered_qr(&input.h, sorted)?;
    let w = apply_qh(&f, &input.y);
    let x2 = second_layer(&w);
    Ok(XorEstimate {
        bits: nc_combine(&f, &w, x2),
    })
}

/// VBLAST physical-layer network coding.
///
/// After deciding the second layer, only the residual `(r12 - k·r11)·x̂2` is
/// cancelled from `w1`, leaving an estimate of `x1 + k·x2` that is mapped
/// straight to the XOR bits. When `k = 0` the symbol is handled by full
/// cancellation as in [`detect_vblast_nc`].
pub fn detect_vblast_pnc(input: &DetectorInput, sorted: bool) -> Result<XorEstimate> {
    check_nonsingular(&input.h)?;
    let (f, _) = ordered_qr(&input.h, sorted)?;
    let w = apply_qh(&f, &input.y);
    let x2 = second_layer(&w);
    let r11 = f.r11();
    let k = compute_k(r11, f.r12())?.get();
    if k == 0 {
        return Ok(XorEstimate {
            bits: nc_combine(&f, &w, x2),
        });
    }
    let residual = f.r12() - Cplx::new(k as f64 * r11, 0.0);
    let est = (w.a - residual * x2.value()) / r11;
    Ok(XorEstimate {
        bits: pnc_map(est, k)?,
    })
}

/// Zero-forcing baseline: `x̃ = H⁻¹·y`, independent hard decisions, XOR.
pub fn detect_linear_zf_nc(input: &DetectorInput) -> Result<XorEstimate> {
    check_nonsingular(&input.h)?;
    let inv = input
        .h
        .inverse()
        .ok_or(Error::DegenerateChannel("channel matrix is singular"))?;
    let x = inv.mul_vec(&input.y);
    Ok(XorEstimate {
        bits: xor_bits(demodulate_hard(x.a), demodulate_hard(x.b)),
    })
}

/// Maximum-likelihood decision on each XOR bit, marginalizing over all 16
/// transmitted symbol pairs. With `σ = 0` it returns the XOR of the nearest
/// hypothesis (first in enumeration order on ties).
pub fn detect_ml_xor(input: &DetectorInput) -> XorEstimate {
    let h = &input.h;
    let col1 = h.col1();
    let col2 = h.col2();
    let mut dist = [0.0f64; 16];
    for (i, b1) in BitPair::ALL.iter().enumerate() {
        let a = col1.scale(modulate(*b1).value());
        let y1 = input.y - a;
        for (j, b2) in BitPair::ALL.iter().enumerate() {
            let b = col2.scale(modulate(*b2).value());
            dist[4 * i + j] = (y1 - b).norm_sqr();
        }
    }
    let xor_of = |n: usize| {
        xor_bits(
            BitPair::from_index((n / 4) as u8),
            BitPair::from_index((n % 4) as u8),
        )
    };

    let (best, dmin) =
        dist.iter().enumerate().fold(
            (0, f64::INFINITY),
            |acc, (n, &d)| if d < acc.1 { (n, d) } else { acc },
        );

    if input.noise.sigma.is_nan() || input.noise.sigma <= 0.0 {
        return XorEstimate { bits: xor_of(best) };
    }

    let scale = 1.0 / (2.0 * input.noise.sigma_sq);
    let mut re = [0.0f64; 2];
    let mut im = [0.0f64; 2];
    for (n, &d) in dist.iter().enumerate() {
        let w = (-(d - dmin) * scale).exp();
        let x = xor_of(n);
        re[x.re as usize] += w;
        im[x.im as usize] += w;
    }
    XorEstimate {
        bits: BitPair::new(re[1] > re[0], im[1] > im[0]),
    }
}

/// Run detector `id` on `input`. The ML oracle never fails.
pub fn detect(id: DetectorId, input: &DetectorInput) -> Result<XorEstimate> {
    match id {
        DetectorId::VblastNc => detect_vblast_nc(input, false),
        DetectorId::VblastPnc => detect_vblast_pnc(input, false),
        DetectorId::SortedVblastNc => detect_vblast_nc(input, true),
        DetectorId::SortedVblastPnc => detect_vblast_pnc(input, true),
        DetectorId::LinearZfNc => detect_linear_zf_nc(input),
        DetectorId::MlOracle => Ok(detect_ml_xor(input)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ill_conditioned(delta: f64) -> Mat2 {
        Mat2::real(1.0, 1.0 + delta, 0.0, delta)
    }

    fn noiseless(h: Mat2, b1: BitPair, b2: BitPair) -> DetectorInput {
        let x = Vec2::new(modulate(b1).value(), modulate(b2).value());
        DetectorInput {
            y: h.mul_vec(&x),
            h,
            noise: NoiseParams::NOISELESS,
        }
    }

    #[test]
    fn compute_k_examples() {
        assert_eq!(compute_k(1.0, Cplx::new(1.1, 0.4)).unwrap().get(), 1);
        assert_eq!(compute_k(1.0, Cplx::new(0.0, 0.0)).unwrap().get(), 0);
        assert_eq!(compute_k(2.0, Cplx::new(3.0, 5.0)).unwrap().get(), 2);
        assert_eq!(compute_k(2.0, Cplx::new(-3.0, 0.0)).unwrap().get(), -2);
        assert!(matches!(
            compute_k(0.0, Cplx::new(1.0, 0.0)),
            Err(Error::DegenerateChannel(_))
        ));
        assert!(compute_k(f64::NAN, Cplx::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn pnc_map_examples() {
        assert_eq!(
            pnc_map(Cplx::new(2.1, 0.05), 1).unwrap(),
            BitPair::new(false, true)
        );
        assert_eq!(pnc_map(Cplx::new(3.0, 3.0), 2).unwrap(), BitPair::ZERO);
        assert_eq!(
            pnc_map(Cplx::new(0.0, -2.0), -1).unwrap(),
            BitPair::new(false, true)
        );
        assert!(matches!(
            pnc_map(Cplx::new(1.0, 1.0), 0),
            Err(Error::InvalidCoefficient(0))
        ));
    }

    #[test]
    fn pnc_partial_cancellation_on_illustrating_channel() {
        // Delta = 0.1: k = 1 and the partial cancellation removes Delta·x̂2,
        // leaving x1 + x2 exactly.
        let h = ill_conditioned(0.1);
        let f = qr_decompose(&h).unwrap();
        assert_eq!(compute_k(f.r11(), f.r12()).unwrap().get(), 1);
        let residual = f.r12() - Cplx::new(f.r11(), 0.0);
        assert!((residual - Cplx::new(0.1, 0.0)).norm() < 1e-12);
        for b1 in BitPair::ALL {
            for b2 in BitPair::ALL {
                let input = noiseless(h, b1, b2);
                let w = apply_qh(&f, &input.y);
                let x2 = second_layer(&w);
                let est = (w.a - residual * x2.value()) / f.r11();
                let sum = modulate(b1).value() + modulate(b2).value();
                assert!((est - sum).norm() < 1e-12);
                assert_eq!(
                    detect_vblast_pnc(&input, false).unwrap().bits,
                    xor_bits(b1, b2)
                );
            }
        }
    }

    #[test]
    fn identity_channel_falls_back_to_nc() {
        let f = qr_decompose(&Mat2::IDENTITY).unwrap();
        assert_eq!(compute_k(f.r11(), f.r12()).unwrap().get(), 0);
        for b1 in BitPair::ALL {
            for b2 in BitPair::ALL {
                let input = noiseless(Mat2::IDENTITY, b1, b2);
                for id in DetectorId::ALL {
                    assert_eq!(detect(id, &input).unwrap().bits, xor_bits(b1, b2), "{id}");
                }
            }
        }
    }

    #[test]
    fn sorted_swaps_only_for_larger_r22() {
        // Second column much stronger: swapping puts it first and the weak
        // column's orthogonal part becomes r22.
        let h = Mat2::real(0.1, 2.0, 0.0, 0.1);
        let (plain, swapped) = ordered_qr(&h, false).unwrap();
        assert!(!swapped);
        let (sorted, swapped) = ordered_qr(&h, true).unwrap();
        assert!(sorted.r22() >= plain.r22());
        assert_eq!(swapped, sorted.r22() > plain.r22());

        let (_, swapped) = ordered_qr(&Mat2::IDENTITY, true).unwrap();
        assert!(!swapped, "ties keep the original order");
    }

    #[test]
    fn singular_channel_is_rejected() {
        let h = Mat2::real(1.0, 2.0, 2.0, 4.0);
        let input = noiseless(h, BitPair::ZERO, BitPair::ZERO);
        for id in DetectorId::ALL {
            let r = detect(id, &input);
            if id == DetectorId::MlOracle {
                assert!(r.is_ok());
            } else {
                assert!(matches!(r, Err(Error::DegenerateChannel(_))), "{id}");
            }
        }
    }

    #[test]
    fn detector_names_round_trip() {
        for id in DetectorId::ALL {
            assert_eq!(id.name().parse::<DetectorId>().unwrap(), id);
            assert_eq!(
                id.name().replace('_', "-").parse::<DetectorId>().unwrap(),
                id
            );
        }
        assert!("vblast".parse::<DetectorId>().is_err());
    }
}
