#![allow(dead_code)]

use mimopnc::phy::{draw_channel, modulate, BitPair, RngStream};
use mimopnc::{Cplx, Mat2, Vec2};
use statrs::function::erf::erfc;

/// Gaussian tail probability `P(N(0,1) > x)`.
pub fn q_func(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// The ill-conditioned illustrating channel `[[1, 1+Δ], [0, Δ]]`.
pub fn illustrating_channel(delta: f64) -> Mat2 {
    Mat2::real(1.0, 1.0 + delta, 0.0, delta)
}

/// `n` Rayleigh channels from a dedicated stream.
pub fn random_channels(seed: u64, n: usize) -> Vec<Mat2> {
    let mut rng = RngStream::new(seed, 0xC0FFEE);
    (0..n).map(|_| draw_channel(&mut rng)).collect()
}

pub fn symbols(b1: BitPair, b2: BitPair) -> Vec2 {
    Vec2::new(modulate(b1).value(), modulate(b2).value())
}

pub fn all_pairs() -> impl Iterator<Item = (BitPair, BitPair)> {
    BitPair::ALL
        .into_iter()
        .flat_map(|a| BitPair::ALL.into_iter().map(move |b| (a, b)))
}

/// Binomial standard error for `p` estimated from `n` bits.
pub fn std_err(p: f64, n: f64) -> f64 {
    (p * (1.0 - p) / n).sqrt()
}

/// Independent ML reference: plain likelihood sums over an explicit
/// hypothesis list, no log-domain stabilization.
pub fn brute_force_ml(y: &Vec2, h: &Mat2, sigma_sq: f64) -> BitPair {
    let levels = [1.0, -1.0];
    let mut p = [[0.0f64; 2]; 2];
    for &a_re in &levels {
        for &a_im in &levels {
            for &b_re in &levels {
                for &b_im in &levels {
                    let x1 = Cplx::new(a_re, a_im);
                    let x2 = Cplx::new(b_re, b_im);
                    let e1 = y.a - h.h11 * x1 - h.h12 * x2;
                    let e2 = y.b - h.h21 * x1 - h.h22 * x2;
                    let d = e1.norm_sqr() + e2.norm_sqr();
                    let like = (-d / (2.0 * sigma_sq)).exp();
                    p[0][(a_re != b_re) as usize] += like;
                    p[1][(a_im != b_im) as usize] += like;
                }
            }
        }
    }
    BitPair::new(p[0][1] > p[0][0], p[1][1] > p[1][0])
}
