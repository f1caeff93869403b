use crate::code_model::{wires, CodeSpec};
use crate::encoder::{butterfly_in_place, reverse_index};
use crate::error::Result;

use super::{boxplus, check_llrs, hard, saturate, BoxplusMode, DecodeResult, Decoder, OpCounts, SAT};

#[derive(Debug, Clone, Copy)]
struct Unit {
    a: usize,
    b: usize,
    /// `None` for a pruned unit.
    shift: Option<usize>,
}

/// Per-wire message storage: for each boundary `t ∈ 0..=n`, a left-going and
/// a right-going LLR per `(position, lane)`.
#[derive(Debug, Clone)]
pub struct LlrFrame {
    pub n: usize,
    pub width: usize,
    /// Left-going messages, boundary-major.
    pub left: Vec<f64>,
    /// Right-going messages, boundary-major.
    pub right: Vec<f64>,
}

impl LlrFrame {
    fn new(n: usize, width: usize) -> Self {
        Self {
            n,
            width,
            left: vec![0.0; (n + 1) * width],
            right: vec![0.0; (n + 1) * width],
        }
    }

    pub fn boundary_left(&self, t: usize) -> &[f64] {
        &self.left[t * self.width..(t + 1) * self.width]
    }

    pub fn boundary_right(&self, t: usize) -> &[f64] {
        &self.right[t * self.width..(t + 1) * self.width]
    }
}

/// Flooding BP over the lifted factor graph with two-way round-robin
/// scheduling: each iteration sweeps right-going messages from stage 1 to `n`,
/// then left-going messages from stage `n` back to 1. All units and lanes of
/// a stage update together.
#[derive(Debug, Clone)]
pub struct BpDecoder {
    spec: CodeSpec,
    iterations: usize,
    mode: BoxplusMode,
    early_stop: bool,
    stages: Vec<Vec<Unit>>,
    prior: Vec<f64>,
    frame: LlrFrame,
}

impl BpDecoder {
    pub fn new(spec: &CodeSpec, iterations: usize, mode: BoxplusMode, early_stop: bool) -> Result<Self> {
        spec.check()?;
        let q = spec.lift_q;
        let stages = (0..spec.n)
            .map(|st| {
                spec.shifts.rows()[st]
                    .iter()
                    .enumerate()
                    .map(|(u, &s)| {
                        let (a, b) = wires(st, u);
                        Unit {
                            a,
                            b,
                            shift: (s >= 0).then_some(s as usize),
                        }
                    })
                    .collect()
            })
            .collect();
        let mut prior = vec![0.0; spec.block_len()];
        for p in 0..spec.proto_len() {
            if spec.frozen_mask[p] {
                let w = reverse_index(p, spec.n);
                prior[w * q..(w + 1) * q].fill(SAT);
            }
        }
        Ok(Self {
            spec: spec.clone(),
            iterations,
            mode,
            early_stop,
            stages,
            prior,
            frame: LlrFrame::new(spec.n, spec.block_len()),
        })
    }

    /// Message state after the last decode.
    pub fn frame(&self) -> &LlrFrame {
        &self.frame
    }

    /// Posterior LLRs `L + R` at the encoder input, in data-index frame order.
    pub fn input_posteriors(&self) -> Vec<f64> {
        let q = self.spec.lift_q;
        let l0 = self.frame.boundary_left(0);
        let r0 = self.frame.boundary_right(0);
        let mut out = vec![0.0; self.spec.block_len()];
        for p in 0..self.spec.proto_len() {
            let w = reverse_index(p, self.spec.n);
            for l in 0..q {
                out[p * q + l] = l0[w * q + l] + r0[w * q + l];
            }
        }
        out
    }

    fn right_sweep(&mut self, ops: &mut OpCounts) {
        let q = self.spec.lift_q;
        let width = self.frame.width;
        let mode = self.mode;
        for (st, units) in self.stages.iter().enumerate() {
            let (r_lo, r_hi) = self.frame.right.split_at_mut((st + 1) * width);
            let r_in = &r_lo[st * width..];
            let r_out = &mut r_hi[..width];
            let l_out = &self.frame.left[(st + 1) * width..(st + 2) * width];
            for u in units {
                let (a, b) = (u.a * q, u.b * q);
                let Some(s) = u.shift else {
                    r_out[a..a + q].copy_from_slice(&r_in[a..a + q]);
                    r_out[b..b + q].copy_from_slice(&r_in[b..b + q]);
                    continue;
                };
                for l in 0..q {
                    let m = if l + s < q { l + s } else { l + s - q };
                    let ra = r_in[a + l];
                    let rb = r_in[b + m];
                    let lc = l_out[a + l];
                    let ld = l_out[b + m];
                    r_out[a + l] = boxplus(ra, rb + ld, mode);
                    r_out[b + m] = saturate(boxplus(ra, lc, mode) + rb);
                }
                ops.unit_updates += q as u64;
                ops.boxplus += 2 * q as u64;
                ops.additions += 2 * q as u64;
            }
        }
    }

    fn left_sweep(&mut self, ops: &mut OpCounts) {
        let q = self.spec.lift_q;
        let width = self.frame.width;
        let mode = self.mode;
        for (st, units) in self.stages.iter().enumerate().rev() {
            let (l_lo, l_hi) = self.frame.left.split_at_mut((st + 1) * width);
            let l_in = &mut l_lo[st * width..];
            let l_out = &l_hi[..width];
            let r_in = &self.frame.right[st * width..(st + 1) * width];
            for u in units {
                let (a, b) = (u.a * q, u.b * q);
                let Some(s) = u.shift else {
                    l_in[a..a + q].copy_from_slice(&l_out[a..a + q]);
                    l_in[b..b + q].copy_from_slice(&l_out[b..b + q]);
                    continue;
                };
                for l in 0..q {
                    let m = if l + s < q { l + s } else { l + s - q };
                    let lc = l_out[a + l];
                    let ld = l_out[b + m];
                    let ra = r_in[a + l];
                    let rb = r_in[b + m];
                    l_in[a + l] = boxplus(lc, ld + rb, mode);
                    l_in[b + m] = saturate(boxplus(lc, ra, mode) + ld);
                }
                ops.unit_updates += q as u64;
                ops.boxplus += 2 * q as u64;
                ops.additions += 2 * q as u64;
            }
        }
    }

    /// Hard re-encoding of the input decisions matches the output decisions.
    fn consistent(&self) -> bool {
        let width = self.frame.width;
        let n = self.spec.n;
        let mut u: Vec<u8> = self
            .frame
            .boundary_left(0)
            .iter()
            .zip(self.frame.boundary_right(0))
            .map(|(l, r)| hard(l + r))
            .collect();
        butterfly_in_place(&self.spec, &mut u);
        let ln = &self.frame.left[n * width..];
        let rn = &self.frame.right[n * width..];
        u.iter()
            .zip(ln.iter().zip(rn))
            .all(|(&bit, (l, r))| bit == hard(l + r))
    }
}

impl Decoder for BpDecoder {
    fn decode(&mut self, llrs: &[f64]) -> Result<DecodeResult> {
        let width = self.frame.width;
        let n = self.spec.n;
        check_llrs(llrs, width)?;
        self.frame.left.fill(0.0);
        self.frame.right.fill(0.0);
        self.frame.right[..width].copy_from_slice(&self.prior);
        for (dst, &x) in self.frame.left[n * width..].iter_mut().zip(llrs) {
            *dst = saturate(x);
        }

        let mut ops = OpCounts::default();
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.iterations {
            self.right_sweep(&mut ops);
            self.left_sweep(&mut ops);
            iterations += 1;
            if self.early_stop && self.consistent() {
                converged = true;
                break;
            }
        }

        let q = self.spec.lift_q;
        let l0 = self.frame.boundary_left(0);
        let r0 = self.frame.boundary_right(0);
        let mut data = Vec::with_capacity(self.spec.k());
        for p in self.spec.info_positions() {
            let w = reverse_index(p, n);
            for l in 0..q {
                data.push(hard(l0[w * q + l] + r0[w * q + l]));
            }
        }
        Ok(DecodeResult {
            data,
            ops,
            iterations,
            converged,
            list: None,
        })
    }
}
