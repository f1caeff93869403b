use crate::code_model::CodeSpec;
use crate::encoder::bit_reverse_permute;
use crate::error::{Error, Result};

use super::{boxplus, check_llrs, require_standard, BoxplusMode, DecodeResult, Decoder, ListInfo, OpCounts};

/// Path-metric increment `ln(1 + e^{-(1-2b)·λ})`.
#[inline]
fn metric_increment(llr: f64, bit: u8) -> f64 {
    let x = if bit == 0 { llr } else { -llr };
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

#[derive(Debug, Clone)]
struct Path {
    /// `alpha[k]` holds the LLRs of the current level-`k` node (`2^k` entries).
    alpha: Vec<Vec<f64>>,
    /// Partial sums of the finished left child at each level.
    beta_left: Vec<Vec<u8>>,
    u: Vec<u8>,
    metric: f64,
}

impl Path {
    fn new(n: usize) -> Self {
        Self {
            alpha: (0..=n).map(|k| vec![0.0; 1 << k]).collect(),
            beta_left: (0..n).map(|k| vec![0; 1 << k]).collect(),
            u: Vec::with_capacity(1 << n),
            metric: 0.0,
        }
    }

    /// Brings `alpha[0]` up to date for leaf `i`.
    fn update_alpha(&mut self, i: usize, n: usize, mode: BoxplusMode, ops: &mut OpCounts) {
        let mut level = if i == 0 {
            n
        } else {
            let t = i.trailing_zeros() as usize;
            // right child at level t: g from the parent at t + 1
            let h = 1 << t;
            let (lo, hi) = self.alpha.split_at_mut(t + 1);
            let parent = &hi[0];
            let beta = &self.beta_left[t];
            for j in 0..h {
                let a = parent[j];
                let b = parent[j + h];
                lo[t][j] = if beta[j] == 0 { b + a } else { b - a };
            }
            ops.g_ops += h as u64;
            ops.additions += h as u64;
            t
        };
        while level > 0 {
            let h = 1 << (level - 1);
            let (lo, hi) = self.alpha.split_at_mut(level);
            let parent = &hi[0];
            for j in 0..h {
                lo[level - 1][j] = boxplus(parent[j], parent[j + h], mode);
            }
            ops.f_ops += h as u64;
            ops.boxplus += h as u64;
            level -= 1;
        }
    }

    /// Records the decision for leaf `i` and folds partial sums upwards.
    fn push_bit(&mut self, i: usize, bit: u8, n: usize) {
        self.u.push(bit);
        let mut cur = vec![bit];
        let mut k = 0;
        let mut idx = i;
        while k < n && idx & 1 == 1 {
            let left = &self.beta_left[k];
            let mut combined: Vec<u8> = left.iter().zip(&cur).map(|(l, r)| l ^ r).collect();
            combined.extend_from_slice(&cur);
            cur = combined;
            k += 1;
            idx >>= 1;
        }
        if k < n {
            self.beta_left[k].copy_from_slice(&cur);
        }
    }
}

/// Successive-cancellation list decoder with optional CRC selection.
#[derive(Debug, Clone)]
pub struct SclDecoder {
    spec: CodeSpec,
    list: usize,
    mode: BoxplusMode,
}

impl SclDecoder {
    pub fn new(spec: &CodeSpec, list: usize, mode: BoxplusMode) -> Result<Self> {
        require_standard(spec, "SCL")?;
        if list == 0 {
            return Err(Error::Range("list size must be >= 1".into()));
        }
        Ok(Self {
            spec: spec.clone(),
            list,
            mode,
        })
    }
}

impl Decoder for SclDecoder {
    fn decode(&mut self, llrs: &[f64]) -> Result<DecodeResult> {
        let n = self.spec.n;
        let len = self.spec.proto_len();
        check_llrs(llrs, len)?;
        let mut ops = OpCounts::default();
        let mut root = Path::new(n);
        root.alpha[n] = bit_reverse_permute(llrs)?;
        let mut paths = vec![root];

        for i in 0..len {
            for p in paths.iter_mut() {
                p.update_alpha(i, n, self.mode, &mut ops);
            }
            if self.spec.frozen_mask[i] {
                for p in paths.iter_mut() {
                    p.metric += metric_increment(p.alpha[0][0], 0);
                    p.push_bit(i, 0, n);
                }
                continue;
            }
            // candidates in (path, bit) order; the stable sort keeps that order on ties
            let mut cands: Vec<(f64, usize, u8)> = paths
                .iter()
                .enumerate()
                .flat_map(|(idx, p)| {
                    let llr = p.alpha[0][0];
                    [0u8, 1].map(|b| (p.metric + metric_increment(llr, b), idx, b))
                })
                .collect();
            cands.sort_by(|a, b| a.0.total_cmp(&b.0));
            cands.truncate(self.list);
            let mut next = Vec::with_capacity(cands.len());
            // move a path out on its last use, clone otherwise
            let mut remaining = vec![0usize; paths.len()];
            for c in &cands {
                remaining[c.1] += 1;
            }
            let mut slots: Vec<Option<Path>> = paths.into_iter().map(Some).collect();
            for (metric, idx, bit) in cands {
                remaining[idx] -= 1;
                let mut p = if remaining[idx] == 0 {
                    slots[idx].take().expect("path consumed once")
                } else {
                    slots[idx].as_ref().expect("path present").clone()
                };
                p.metric = metric;
                p.push_bit(i, bit, n);
                next.push(p);
            }
            paths = next;
        }

        // trailing frozen bits change metrics without reordering
        paths.sort_by(|a, b| a.metric.total_cmp(&b.metric));
        let info = self.spec.info_positions();
        let extract = |p: &Path| -> Vec<u8> { info.iter().map(|&q| p.u[q]).collect() };
        let (rank, crc_pass) = match &self.spec.crc {
            Some(crc) => match paths.iter().position(|p| crc.check(&extract(p))) {
                Some(r) => (r, Some(true)),
                None => (0, Some(false)),
            },
            None => (0, None),
        };
        Ok(DecodeResult {
            data: extract(&paths[rank]),
            ops,
            iterations: 1,
            converged: true,
            list: Some(ListInfo {
                chosen_rank: rank,
                crc_pass,
            }),
        })
    }
}

/// One-shot SCL decode.
pub fn decode_scl(spec: &CodeSpec, llrs: &[f64], list: usize, mode: BoxplusMode) -> Result<DecodeResult> {
    SclDecoder::new(spec, list, mode)?.decode(llrs)
}
