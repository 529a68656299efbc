//! Monte Carlo BER engine.
//!
//! Every trial draws its bits, channel and noise from its own substream
//! `(seed, snr_index, trial_index)`, so a sweep gives identical counts for
//! any number of workers. All requested detectors run on the same
//! realization of each trial.

use rayon::prelude::*;

use crate::detect::{detect, DetectorId, DetectorInput};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};
use crate::phy::{
    draw_channel, draw_noise, modulate, snr_to_sigma, xor_bits, BitPair, NoiseParams, RngStream,
    TRIAL_INDEX_BITS,
};

const N_DETECTORS: usize = DetectorId::ALL.len();

/// Trials handed to a worker at a time.
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelMode {
    /// Fresh i.i.d. Rayleigh channel for every symbol.
    RayleighBlock,
    Fixed(Mat2),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub snr_db_grid: Vec<f64>,
    pub symbols_per_point: u64,
    pub seed: u64,
    pub detectors: Vec<DetectorId>,
    pub channel_mode: ChannelMode,
}

impl SimConfig {
    pub fn new(snr_db_grid: Vec<f64>, symbols_per_point: u64, seed: u64) -> Self {
        SimConfig {
            snr_db_grid,
            symbols_per_point,
            seed,
            detectors: DetectorId::ALL.to_vec(),
            channel_mode: ChannelMode::RayleighBlock,
        }
    }

    pub fn with_detectors(mut self, detectors: &[DetectorId]) -> Self {
        self.detectors = detectors.to_vec();
        self
    }

    pub fn with_channel(mut self, mode: ChannelMode) -> Self {
        self.channel_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db_grid.is_empty() {
            return Err(Error::Config("SNR grid is empty".into()));
        }
        if self.snr_db_grid.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SNR grid has a non-finite value".into()));
        }
        if self.snr_db_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("SNR grid must be strictly increasing".into()));
        }
        if self.snr_db_grid.len() as u64 >= 1 << (64 - TRIAL_INDEX_BITS) {
            return Err(Error::Config("SNR grid is too long".into()));
        }
        if self.symbols_per_point == 0 {
            return Err(Error::Config("symbols per point must be at least 1".into()));
        }
        if self.symbols_per_point > 1 << TRIAL_INDEX_BITS {
            return Err(Error::Config("symbols per point is too large".into()));
        }
        if self.detectors.is_empty() {
            return Err(Error::Config("no detectors selected".into()));
        }
        if let ChannelMode::Fixed(h) = self.channel_mode {
            if !h.is_finite() {
                return Err(Error::Config("fixed channel has a non-finite entry".into()));
            }
        }
        Ok(())
    }

    /// Requested detectors, deduplicated, in canonical order.
    pub fn detector_set(&self) -> Vec<DetectorId> {
        let mut d = self.detectors.clone();
        d.sort();
        d.dedup();
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerRecord {
    pub detector: DetectorId,
    pub snr_db: f64,
    pub bits_total: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub degenerate_count: u64,
}

impl BerRecord {
    pub fn new(
        detector: DetectorId,
        snr_db: f64,
        bits_total: u64,
        bit_errors: u64,
        degenerate_count: u64,
    ) -> Self {
        BerRecord {
            detector,
            snr_db,
            bits_total,
            bit_errors,
            ber: bit_errors as f64 / bits_total as f64,
            degenerate_count,
        }
    }

    /// Binomial standard error of the BER estimate.
    pub fn std_error(&self) -> f64 {
        (self.ber * (1.0 - self.ber) / self.bits_total as f64).sqrt()
    }
}

/// Per-detector outcome of one trial, indexed by [`DetectorId::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    /// Wrong XOR bits, 0 to 2.
    pub errors: [u8; N_DETECTORS],
    /// The detector rejected the channel and the XOR was guessed.
    pub degenerate: [bool; N_DETECTORS],
}

impl TrialOutcome {
    pub fn errors_for(&self, id: DetectorId) -> u8 {
        self.errors[id.index()]
    }
}

/// One symbol interval: draw both end nodes' bits, the channel (per
/// `channel`) and the noise, form `y = H·x + n`, and score every detector in
/// `detectors` on that single realization.
///
/// A detector that reports a degenerate channel is scored against a fair
/// coin drawn from the same stream after the realization.
pub fn run_trial(
    rng: &mut RngStream,
    noise: &NoiseParams,
    detectors: &[DetectorId],
    channel: &ChannelMode,
) -> TrialOutcome {
    let b1 = rng.bit_pair();
    let b2 = rng.bit_pair();
    let h = match channel {
        ChannelMode::RayleighBlock => draw_channel(rng),
        ChannelMode::Fixed(h) => *h,
    };
    let n = draw_noise(rng, noise);
    let x = Vec2::new(modulate(b1).value(), modulate(b2).value());
    let input = DetectorInput {
        y: h.mul_vec(&x) + n,
        h,
        noise: *noise,
    };
    let truth = xor_bits(b1, b2);

    let mut out = TrialOutcome::default();
    for &id in detectors {
        let i = id.index();
        let decided = match detect(id, &input) {
            Ok(est) => est.bits,
            Err(_) => {
                out.degenerate[i] = true;
                let re = rng.coin();
                let im = rng.coin();
                BitPair::new(re, im)
            }
        };
        out.errors[i] = xor_bits(decided, truth).weight() as u8;
    }
    out
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    errors: [u64; N_DETECTORS],
    degenerate: [u64; N_DETECTORS],
}

impl Tally {
    fn add(&mut self, t: &TrialOutcome) {
        for i in 0..N_DETECTORS {
            self.errors[i] += t.errors[i] as u64;
            self.degenerate[i] += t.degenerate[i] as u64;
        }
    }

    fn merge(mut self, o: Tally) -> Tally {
        for i in 0..N_DETECTORS {
            self.errors[i] += o.errors[i];
            self.degenerate[i] += o.degenerate[i];
        }
        self
    }
}

/// Simulate one grid point on the current rayon pool.
pub fn run_point(cfg: &SimConfig, snr_db: f64) -> Result<Vec<BerRecord>> {
    cfg.validate()?;
    let snr_index = cfg
        .snr_db_grid
        .iter()
        .position(|&s| s == snr_db)
        .ok_or_else(|| Error::Config(format!("{snr_db} dB is not on the SNR grid")))?;
    let detectors = cfg.detector_set();
    let noise = snr_to_sigma(snr_db);
    let n = cfg.symbols_per_point;

    let tally = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut t = Tally::default();
            for trial in chunk * CHUNK..((chunk + 1) * CHUNK).min(n) {
                let mut rng = RngStream::for_trial(cfg.seed, snr_index, trial);
                t.add(&run_trial(&mut rng, &noise, &detectors, &cfg.channel_mode));
            }
            t
        })
        .reduce(Tally::default, Tally::merge);

    Ok(detectors
        .iter()
        .map(|&id| {
            BerRecord::new(
                id,
                snr_db,
                2 * n,
                tally.errors[id.index()],
                tally.degenerate[id.index()],
            )
        })
        .collect())
}

/// Simulate the whole grid; records are ordered by (detector, snr_db).
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<BerRecord>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.snr_db_grid.len() * cfg.detector_set().len());
    for &snr in &cfg.snr_db_grid {
        out.extend(run_point(cfg, snr)?);
    }
    sort_records(&mut out);
    Ok(out)
}

/// Run `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn sort_records(records: &mut [BerRecord]) {
    records.sort_by(|a, b| {
        a.detector
            .cmp(&b.detector)
            .then(a.snr_db.total_cmp(&b.snr_db))
    });
}

/// SNR at which `det`'s curve first falls to `target_ber`, interpolating
/// `log10(ber)` linearly in dB between adjacent grid points. Points with zero
/// errors carry no log-domain information and end the search.
pub fn crossing_snr_db(records: &[BerRecord], det: DetectorId, target_ber: f64) -> Result<f64> {
    let mut curve: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.detector == det)
        .map(|r| (r.snr_db, r.ber))
        .collect();
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));

    let target = target_ber.log10();
    for w in curve.windows(2) {
        let ((s0, p0), (s1, p1)) = (w[0], w[1]);
        if p0 == target_ber {
            return Ok(s0);
        }
        if p0 <= 0.0 || p1 <= 0.0 {
            break;
        }
        if p0 > target_ber && p1 <= target_ber {
            let (l0, l1) = (p0.log10(), p1.log10());
            return Ok(s0 + (target - l0) * (s1 - s0) / (l1 - l0));
        }
    }
    match curve.last() {
        Some(&(s, p)) if p == target_ber => Ok(s),
        _ => Err(Error::NoCrossing(det)),
    }
}

/// Horizontal gap `snr(det_b) - snr(det_a)` at `target_ber`; positive when
/// `det_a` needs less SNR.
pub fn estimate_gap_db(
    records: &[BerRecord],
    det_a: DetectorId,
    det_b: DetectorId,
    target_ber: f64,
) -> Result<f64> {
    if !(target_ber > 0.0 && target_ber < 1.0) {
        return Err(Error::Config(format!(
            "target BER {target_ber} is outside (0, 1)"
        )));
    }
    let a = crossing_snr_db(records, det_a, target_ber)?;
    let b = crossing_snr_db(records, det_b, target_ber)?;
    Ok(b - a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(det: DetectorId, points: &[(f64, f64)]) -> Vec<BerRecord> {
        points
            .iter()
            .map(|&(s, p)| BerRecord {
                detector: det,
                snr_db: s,
                bits_total: 2_000_000,
                bit_errors: (p * 2e6).round() as u64,
                ber: p,
                degenerate_count: 0,
            })
            .collect()
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(vec![0.0, 1.0], 10, 1).validate().is_ok());
        assert!(SimConfig::new(vec![], 10, 1).validate().is_err());
        assert!(SimConfig::new(vec![1.0, 1.0], 10, 1).validate().is_err());
        assert!(SimConfig::new(vec![2.0, 1.0], 10, 1).validate().is_err());
        assert!(SimConfig::new(vec![0.0], 0, 1).validate().is_err());
        assert!(SimConfig::new(vec![f64::NAN], 1, 1).validate().is_err());
        assert!(SimConfig::new(vec![0.0], 1, 1)
            .with_detectors(&[])
            .validate()
            .is_err());
    }

    #[test]
    fn point_must_be_on_grid() {
        let cfg = SimConfig::new(vec![0.0, 5.0], 4, 1);
        assert!(matches!(run_point(&cfg, 3.0), Err(Error::Config(_))));
    }

    #[test]
    fn single_symbol_noiseless_point() {
        let cfg = SimConfig::new(vec![400.0], 1, 3);
        let recs = run_point(&cfg, 400.0).unwrap();
        assert_eq!(recs.len(), 6);
        for r in recs {
            assert_eq!(r.bits_total, 2);
            assert_eq!(r.ber, 0.0);
        }
    }

    #[test]
    fn single_point_single_detector_sweep() {
        let cfg = SimConfig::new(vec![0.0], 100, 1).with_detectors(&[DetectorId::VblastPnc]);
        let recs = run_sweep(&cfg).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].bits_total, 200);
        assert!((0.0..=1.0).contains(&recs[0].ber));
    }

    #[test]
    fn gap_of_identical_curves_is_zero() {
        let pts = [(0.0, 1e-1), (5.0, 1e-2), (10.0, 1e-3), (15.0, 1e-4)];
        let mut recs = curve(DetectorId::VblastNc, &pts);
        recs.extend(curve(DetectorId::VblastPnc, &pts));
        let g = estimate_gap_db(&recs, DetectorId::VblastPnc, DetectorId::VblastNc, 3e-3).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn gap_of_shifted_curve() {
        // Waterfall p(s) = 10^(-s/5), sampled on a 1 dB grid; B is A shifted
        // by +1 dB, so B needs 1 dB more.
        let a: Vec<_> = (0..=20)
            .map(|s| (s as f64, 10f64.powf(-(s as f64) / 5.0)))
            .collect();
        let b: Vec<_> = (0..=20)
            .map(|s| (s as f64, 10f64.powf(-(s as f64 - 1.0) / 5.0)))
            .collect();
        let mut recs = curve(DetectorId::VblastPnc, &a);
        recs.extend(curve(DetectorId::VblastNc, &b));
        let g = estimate_gap_db(&recs, DetectorId::VblastPnc, DetectorId::VblastNc, 1e-3).unwrap();
        assert!((g - 1.0).abs() < 0.01, "gap {g}");
    }

    #[test]
    fn no_crossing_is_reported() {
        let recs = curve(DetectorId::VblastNc, &[(0.0, 0.2), (5.0, 0.1)]);
        assert!(matches!(
            crossing_snr_db(&recs, DetectorId::VblastNc, 1e-3),
            Err(Error::NoCrossing(DetectorId::VblastNc))
        ));
        assert!(matches!(
            crossing_snr_db(&recs, DetectorId::MlOracle, 1e-3),
            Err(Error::NoCrossing(_))
        ));
        let zero_tail = curve(DetectorId::VblastNc, &[(0.0, 0.2), (5.0, 0.0)]);
        assert!(crossing_snr_db(&zero_tail, DetectorId::VblastNc, 1e-3).is_err());
    }
}
