//! AWGN/BPSK Monte Carlo evaluation of bit and frame error rates.
//!
//! Every frame draws its data and noise from a ChaCha stream keyed by
//! `(seed, crn_tag, snr)` and indexed by the frame number, so results do not
//! depend on thread count or batch size, and two decoders run with the same
//! seed see identical noise.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};
use statrs::function::erf::erfc;

use crate::code_model::{save_spec, CodeSpec};
use crate::decoders::{Decoder, DecoderKind, OpCounts};
use crate::encoder::encode_qc;
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrConvention {
    /// Energy per information bit; uses the code rate.
    #[default]
    EbN0,
    /// Energy per transmitted symbol.
    EsN0,
}

impl SnrConvention {
    pub fn name(&self) -> &'static str {
        match self {
            SnrConvention::EbN0 => "ebn0",
            SnrConvention::EsN0 => "esn0",
        }
    }
}

/// Noise standard deviation for unit-energy BPSK.
pub fn noise_sigma(snr_db: f64, rate: f64, convention: SnrConvention) -> f64 {
    let lin = 10f64.powf(snr_db / 10.0);
    let var = match convention {
        SnrConvention::EbN0 => 1.0 / (2.0 * rate * lin),
        SnrConvention::EsN0 => 1.0 / (2.0 * lin),
    };
    var.sqrt()
}

/// BPSK (`0 → +1`, `1 → -1`) over AWGN, returning channel LLRs `2y/σ²`.
pub fn awgn_llrs<R: Rng + ?Sized>(
    bits: &[u8],
    snr_db: f64,
    rate: f64,
    convention: SnrConvention,
    rng: &mut R,
) -> Vec<f64> {
    let sigma = noise_sigma(snr_db, rate, convention);
    awgn_llrs_sigma(bits, sigma, rng)
}

pub fn awgn_llrs_sigma<R: Rng + ?Sized>(bits: &[u8], sigma: f64, rng: &mut R) -> Vec<f64> {
    let scale = 2.0 / (sigma * sigma);
    bits.iter()
        .map(|&b| {
            let x = if b == 0 { 1.0 } else { -1.0 };
            let noise: f64 = rng.sample(StandardNormal);
            scale * (x + sigma * noise)
        })
        .collect()
}

/// Uncoded BPSK bit error probability `Q(√(2·Es/N0))`.
pub fn bpsk_ber(esn0_db: f64) -> f64 {
    let lin = 10f64.powf(esn0_db / 10.0);
    0.5 * erfc(lin.sqrt())
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub spec: CodeSpec,
    pub decoder: DecoderKind,
    /// SNR grid in dB, sorted ascending.
    pub snr_db: Vec<f64>,
    pub convention: SnrConvention,
    pub max_frames: u64,
    pub max_frame_errors: u64,
    pub seed: u64,
    /// Transmit the all-zero codeword instead of random data.
    pub all_zero: bool,
    /// Extra key for the noise streams; equal tags give common random numbers.
    pub crn_tag: String,
    /// Frames handed to one worker at a time.
    pub chunk: usize,
}

impl SimConfig {
    pub fn new(spec: CodeSpec, decoder: DecoderKind) -> Self {
        Self {
            spec,
            decoder,
            snr_db: vec![0.0],
            convention: SnrConvention::EbN0,
            max_frames: 10_000,
            max_frame_errors: 100,
            seed: 1,
            all_zero: false,
            crn_tag: String::new(),
            chunk: 32,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.check()?;
        if self.snr_db.is_empty() {
            return Err(Error::Range("SNR grid is empty".into()));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) || self.snr_db.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Range("SNR grid must be finite and sorted".into()));
        }
        if self.max_frames == 0 || self.max_frame_errors == 0 || self.chunk == 0 {
            return Err(Error::Range("stopping rules and chunk size must be positive".into()));
        }
        Ok(())
    }

    /// Short hash of everything that determines the simulated counts.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(save_spec(&self.spec));
        h.update(format!("{:?}", self.decoder));
        h.update(format!(
            "{:?}|{}|{}|{}|{}|{}|{}",
            self.snr_db,
            self.convention.name(),
            self.max_frames,
            self.max_frame_errors,
            self.seed,
            self.all_zero,
            self.crn_tag
        ));
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Statistics for one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct SimPoint {
    pub snr_db: f64,
    pub frames: u64,
    pub bit_errs: u64,
    pub frame_errs: u64,
    pub ber: f64,
    pub fer: f64,
    /// Normal-approximation 95% half-width of the BER estimate.
    pub ci95: f64,
    /// Mean arithmetic operations (boxplus + additions) per frame.
    pub ops_mean: f64,
    pub seconds: f64,
    /// Fewer than 10 bit errors observed.
    pub unreliable: bool,
}

impl SimPoint {
    pub fn ber_upper(&self) -> f64 {
        self.ber + self.ci95
    }

    pub fn ber_lower(&self) -> f64 {
        (self.ber - self.ci95).max(0.0)
    }
}

/// Outcome of a single simulated frame.
#[derive(Debug, Clone, Copy)]
pub struct FrameOutcome {
    pub bit_errs: u64,
    pub ops: OpCounts,
}

fn stream_key(seed: u64, tag: &str, snr_db: f64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(tag.as_bytes());
    h.update(snr_db.to_bits().to_le_bytes());
    h.finalize().into()
}

/// Data and noise generators of one frame.
pub fn frame_rngs(seed: u64, tag: &str, snr_db: f64, frame: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let key = stream_key(seed, tag, snr_db);
    let mut data = ChaCha8Rng::from_seed(key);
    data.set_stream(2 * frame);
    let mut noise = ChaCha8Rng::from_seed(key);
    noise.set_stream(2 * frame + 1);
    (data, noise)
}

/// Random data for one frame, CRC-terminated when the spec carries a CRC.
fn frame_data(spec: &CodeSpec, rng: &mut ChaCha8Rng) -> Vec<u8> {
    match (&spec.crc, spec.lift_q) {
        (Some(crc), 1) => {
            let msg: Vec<u8> = (0..spec.k() - crc.width()).map(|_| rng.gen_range(0..2)).collect();
            crc.attach(&msg)
        }
        _ => (0..spec.k()).map(|_| rng.gen_range(0..2)).collect(),
    }
}

/// Simulates frame `index` at `snr_db`.
pub fn simulate_frame(cfg: &SimConfig, decoder: &mut dyn Decoder, snr_db: f64, index: u64) -> Result<FrameOutcome> {
    let spec = &cfg.spec;
    let (mut data_rng, mut noise_rng) = frame_rngs(cfg.seed, &cfg.crn_tag, snr_db, index);
    let (data, codeword) = if cfg.all_zero {
        (vec![0u8; spec.k()], vec![0u8; spec.block_len()])
    } else {
        let data = frame_data(spec, &mut data_rng);
        let cw = encode_qc(spec, &data)?;
        (data, cw)
    };
    let llrs = awgn_llrs(&codeword, snr_db, spec.rate(), cfg.convention, &mut noise_rng);
    let res = decoder.decode(&llrs)?;
    let bit_errs = res.data.iter().zip(&data).filter(|(a, b)| a != b).count() as u64;
    Ok(FrameOutcome { bit_errs, ops: res.ops })
}

/// Runs one SNR point until `max_frames` or `max_frame_errors` is reached.
pub fn run_point(cfg: &SimConfig, snr_db: f64) -> Result<SimPoint> {
    cfg.validate()?;
    let start = Instant::now();
    let k = cfg.spec.k() as u64;
    let chunk = cfg.chunk as u64;
    let workers = if par::is_parallel() { rayon_threads() } else { 1 };

    let mut frames = 0u64;
    let mut bit_errs = 0u64;
    let mut frame_errs = 0u64;
    let mut ops_sum = 0u128;
    let mut next = 0u64;
    'run: while frames < cfg.max_frames && frame_errs < cfg.max_frame_errors {
        let starts: Vec<u64> = (0..workers as u64)
            .map(|w| next + w * chunk)
            .filter(|&s| s < cfg.max_frames)
            .collect();
        next += workers as u64 * chunk;
        let batches = par::map(starts, |s| -> Result<Vec<FrameOutcome>> {
            let mut dec = cfg.decoder.build(&cfg.spec)?;
            let end = (s + chunk).min(cfg.max_frames);
            (s..end).map(|i| simulate_frame(cfg, dec.as_mut(), snr_db, i)).collect()
        });
        for batch in batches {
            for out in batch? {
                frames += 1;
                bit_errs += out.bit_errs;
                frame_errs += u64::from(out.bit_errs > 0);
                ops_sum += u128::from(out.ops.total());
                if frames >= cfg.max_frames || frame_errs >= cfg.max_frame_errors {
                    break 'run;
                }
            }
        }
    }

    let bits = (k * frames) as f64;
    let ber = bit_errs as f64 / bits;
    Ok(SimPoint {
        snr_db,
        frames,
        bit_errs,
        frame_errs,
        ber,
        fer: frame_errs as f64 / frames as f64,
        ci95: 1.96 * (ber * (1.0 - ber) / bits).sqrt(),
        ops_mean: ops_sum as f64 / frames as f64,
        seconds: start.elapsed().as_secs_f64(),
        unreliable: bit_errs < 10,
    })
}

#[cfg(feature = "parallel")]
fn rayon_threads() -> usize {
    rayon::current_num_threads()
}

#[cfg(not(feature = "parallel"))]
fn rayon_threads() -> usize {
    1
}

#[derive(Debug, Clone)]
pub struct SimTable {
    pub config_hash: String,
    pub decoder: String,
    pub convention: SnrConvention,
    pub points: Vec<SimPoint>,
}

pub const CSV_HEADER: &str = "snr_db,frames,bit_errs,frame_errs,ber,fer,ci95,ops_mean,seconds";

impl SimTable {
    /// CSV text: a `#` comment line with the config hash, then the table.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# config_hash={} decoder={} snr={}",
            self.config_hash,
            self.decoder,
            self.convention.name()
        );
        out.push_str(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6e},{:.6e},{:.3e},{:.1},{:.3}",
                p.snr_db, p.frames, p.bit_errs, p.frame_errs, p.ber, p.fer, p.ci95, p.ops_mean, p.seconds
            );
        }
        out
    }
}

/// Runs every SNR point of `cfg`.
pub fn sweep(cfg: &SimConfig) -> Result<SimTable> {
    cfg.validate()?;
    let points = cfg
        .snr_db
        .iter()
        .map(|&snr| run_point(cfg, snr))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimTable {
        config_hash: cfg.hash(),
        decoder: cfg.decoder.name().to_string(),
        convention: cfg.convention,
        points,
    })
}

/// `start, start + step, …` up to `stop` inclusive (with a small tolerance).
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || stop < start {
        return Err(Error::Range("SNR grid needs step > 0 and stop >= start".into()));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}
