use crate::code_model::CodeSpec;
use crate::encoder::bit_reverse_permute;
use crate::error::Result;

use super::{boxplus, check_llrs, hard, require_standard, BoxplusMode, DecodeResult, Decoder, OpCounts};

/// Recursive successive-cancellation decoder for `Q = 1` codes.
///
/// The channel LLRs are bit-reversed once so that the decoding tree visits the
/// data indices in natural order.
#[derive(Debug, Clone)]
pub struct ScDecoder {
    spec: CodeSpec,
    mode: BoxplusMode,
    u: Vec<u8>,
    ops: OpCounts,
}

impl ScDecoder {
    pub fn new(spec: &CodeSpec, mode: BoxplusMode) -> Result<Self> {
        require_standard(spec, "SC")?;
        Ok(Self {
            spec: spec.clone(),
            mode,
            u: Vec::with_capacity(spec.proto_len()),
            ops: OpCounts::default(),
        })
    }

    /// Decodes the subtree whose leaves start at `first`; returns its partial sums.
    fn node(&mut self, alpha: &[f64], first: usize) -> Vec<u8> {
        if alpha.len() == 1 {
            let bit = if self.spec.frozen_mask[first] { 0 } else { hard(alpha[0]) };
            self.u.push(bit);
            return vec![bit];
        }
        let h = alpha.len() / 2;
        let (x, y) = alpha.split_at(h);
        let left_alpha: Vec<f64> = x.iter().zip(y).map(|(&a, &b)| boxplus(a, b, self.mode)).collect();
        self.ops.f_ops += h as u64;
        self.ops.boxplus += h as u64;
        let beta_l = self.node(&left_alpha, first);
        let right_alpha: Vec<f64> = x
            .iter()
            .zip(y)
            .zip(&beta_l)
            .map(|((&a, &b), &bit)| if bit == 0 { b + a } else { b - a })
            .collect();
        self.ops.g_ops += h as u64;
        self.ops.additions += h as u64;
        let beta_r = self.node(&right_alpha, first + h);
        let mut beta: Vec<u8> = beta_l.iter().zip(&beta_r).map(|(l, r)| l ^ r).collect();
        beta.extend_from_slice(&beta_r);
        beta
    }
}

impl Decoder for ScDecoder {
    fn decode(&mut self, llrs: &[f64]) -> Result<DecodeResult> {
        check_llrs(llrs, self.spec.proto_len())?;
        self.u.clear();
        self.ops = OpCounts::default();
        let alpha = bit_reverse_permute(llrs)?;
        self.node(&alpha, 0);
        let data = self.spec.info_positions().iter().map(|&p| self.u[p]).collect();
        Ok(DecodeResult {
            data,
            ops: self.ops,
            iterations: 1,
            converged: true,
            list: None,
        })
    }
}

/// One-shot SC decode.
pub fn decode_sc(spec: &CodeSpec, llrs: &[f64], mode: BoxplusMode) -> Result<DecodeResult> {
    ScDecoder::new(spec, mode)?.decode(llrs)
}
