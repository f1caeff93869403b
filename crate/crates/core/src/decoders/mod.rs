//! Successive-cancellation, list and belief-propagation decoders.
//!
//! LLRs are natural-log ratios `ln P(0)/P(1)`: positive favours bit 0. All
//! decoders break exact ties towards bit 0.

mod bp;
mod sc;
mod scl;

pub use bp::BpDecoder;
pub use sc::{decode_sc, ScDecoder};
pub use scl::{decode_scl, SclDecoder};

use crate::code_model::CodeSpec;
use crate::error::{Error, Result};

/// LLR saturation magnitude.
pub const SAT: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BoxplusMode {
    #[default]
    Exact,
    MinSum,
}

#[inline]
pub fn saturate(x: f64) -> f64 {
    x.clamp(-SAT, SAT)
}

/// `ln(1 + e^{-x})` for `x >= 0`.
#[inline]
fn softplus_neg(x: f64) -> f64 {
    (-x).exp().ln_1p()
}

/// Check-node combination of two LLRs, saturated to `±SAT`.
///
/// Exact mode uses `sign·min(|a|,|b|) + ln(1+e^{-|a+b|}) - ln(1+e^{-|a-b|})`,
/// which equals `2·atanh(tanh(a/2)·tanh(b/2))` without the cancellation near
/// `±1`.
#[inline]
pub fn boxplus(a: f64, b: f64, mode: BoxplusMode) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let m = a.abs().min(b.abs());
    let v = match mode {
        BoxplusMode::MinSum => sign * m,
        BoxplusMode::Exact => sign * m + softplus_neg((a + b).abs()) - softplus_neg((a - b).abs()),
    };
    saturate(v)
}

/// Hard decision with the zero-tie rule.
#[inline]
pub fn hard(llr: f64) -> u8 {
    u8::from(llr < 0.0)
}

/// Operation counters accumulated by a decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCounts {
    pub boxplus: u64,
    pub additions: u64,
    /// BP: one per active unit, lane and half-sweep.
    pub unit_updates: u64,
    /// SC/SCL: `f` (check) node evaluations summed over paths.
    pub f_ops: u64,
    /// SC/SCL: `g` (variable) node evaluations summed over paths.
    pub g_ops: u64,
}

impl OpCounts {
    /// Arithmetic operations: boxplus plus additions.
    pub fn total(&self) -> u64 {
        self.boxplus + self.additions
    }

    pub fn add(&mut self, other: &OpCounts) {
        self.boxplus += other.boxplus;
        self.additions += other.additions;
        self.unit_updates += other.unit_updates;
        self.f_ops += other.f_ops;
        self.g_ops += other.g_ops;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListInfo {
    /// Metric rank of the returned path (0 = best metric).
    pub chosen_rank: usize,
    /// `Some(pass)` when a CRC was used.
    pub crc_pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Data-bit decisions in [`crate::encoder::scatter`] order.
    pub data: Vec<u8>,
    pub ops: OpCounts,
    /// BP iterations run.
    pub iterations: usize,
    /// BP: early-stop syndrome satisfied.
    pub converged: bool,
    pub list: Option<ListInfo>,
}

/// Decoder configuration, buildable for a given spec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecoderKind {
    Sc { mode: BoxplusMode },
    Scl { list: usize, mode: BoxplusMode },
    Bp { iterations: usize, mode: BoxplusMode, early_stop: bool },
}

impl DecoderKind {
    pub fn bp(iterations: usize) -> Self {
        DecoderKind::Bp {
            iterations,
            mode: BoxplusMode::Exact,
            early_stop: false,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DecoderKind::Sc { .. } => "sc",
            DecoderKind::Scl { .. } => "scl",
            DecoderKind::Bp { .. } => "bp",
        }
    }

    pub fn build(&self, spec: &CodeSpec) -> Result<Box<dyn Decoder>> {
        Ok(match *self {
            DecoderKind::Sc { mode } => Box::new(ScDecoder::new(spec, mode)?),
            DecoderKind::Scl { list, mode } => Box::new(SclDecoder::new(spec, list, mode)?),
            DecoderKind::Bp {
                iterations,
                mode,
                early_stop,
            } => Box::new(BpDecoder::new(spec, iterations, mode, early_stop)?),
        })
    }
}

/// A decoder instance owns its scratch memory; use one per worker.
pub trait Decoder: Send {
    fn decode(&mut self, llrs: &[f64]) -> Result<DecodeResult>;
}

pub(crate) fn check_llrs(llrs: &[f64], expected: usize) -> Result<()> {
    if llrs.len() != expected {
        return Err(Error::Length {
            what: "channel LLRs",
            expected,
            got: llrs.len(),
        });
    }
    if let Some(i) = llrs.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

pub(crate) fn require_standard(spec: &CodeSpec, what: &str) -> Result<()> {
    spec.check()?;
    if spec.lift_q != 1 {
        return Err(Error::Unsupported(format!(
            "{what} decoding needs Q = 1, got Q = {}",
            spec.lift_q
        )));
    }
    if spec.shifts.pruned_units() != 0 {
        return Err(Error::Unsupported(format!("{what} decoding needs an unpruned code")));
    }
    Ok(())
}

/// Closed-form operation count for a decoder on `spec`.
///
/// * SC/SCL: `L · N · log2(N / Q) / 2` node updates (`L = 1` for SC).
/// * BP: `2 · I · active_units · Q` unit updates; each update costs two
///   boxplus and two additions.
pub fn op_count_model(spec: &CodeSpec, kind: &DecoderKind) -> f64 {
    let n_total = spec.block_len() as f64;
    let depth = (spec.block_len() / spec.lift_q).trailing_zeros() as f64;
    match *kind {
        DecoderKind::Sc { .. } => n_total * depth / 2.0,
        DecoderKind::Scl { list, .. } => list as f64 * n_total * depth / 2.0,
        DecoderKind::Bp { iterations, .. } => {
            2.0 * iterations as f64 * spec.shifts.active_units() as f64 * spec.lift_q as f64
        }
    }
}
