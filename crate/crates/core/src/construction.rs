//! Frozen-bit construction and greedy pruning of proto-polarization units.
//!
//! Reliability profiles are indexed by data index (before bit reversal), the
//! same index space as [`CodeSpec::frozen_mask`]. At each polarization level a
//! synthetic channel with parameter `z` splits into a worse child (even index)
//! and a better child (odd index).

use std::fmt;

use crate::code_model::{CodeSpec, UnitAddress};
use crate::decoders::DecoderKind;
use crate::error::{Error, Result};
use crate::par;
use crate::protograph;
use crate::simulator::{self, SimConfig, SnrConvention};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Bhattacharyya parameters from a design erasure probability.
    Bhattacharyya { erasure: f64 },
    /// Gaussian approximation from a design SNR (Es/N0, dB).
    GaussianApprox { snr_db: f64 },
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Bhattacharyya { erasure } => write!(f, "bhatta(eps={erasure})"),
            Method::GaussianApprox { snr_db } => write!(f, "ga(snr={snr_db}dB)"),
        }
    }
}

/// Per-position unreliability; larger is worse.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityProfile {
    pub scores: Vec<f64>,
    pub method: Method,
}

pub fn bhattacharyya_profile(n: usize, erasure: f64) -> Result<ReliabilityProfile> {
    if !(erasure > 0.0 && erasure < 1.0) {
        return Err(Error::Range(format!("design erasure {erasure} not in (0, 1)")));
    }
    let mut z = vec![erasure];
    for _ in 0..n {
        z = z.iter().flat_map(|&z| [2.0 * z - z * z, z * z]).collect();
    }
    Ok(ReliabilityProfile {
        scores: z,
        method: Method::Bhattacharyya { erasure },
    })
}

/// `ln φ(x)` for the two-piece approximation of
/// `φ(x) = 1 - E[tanh(L/2)]`, `L ~ N(x, 2x)`.
fn ln_phi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < 10.0 {
        // the fit slightly exceeds 1 below x ≈ 0.03
        (-0.4527 * x.powf(0.86) + 0.0218).min(0.0)
    } else {
        0.5 * (std::f64::consts::PI / x).ln() - x / 4.0 + (1.0 - 10.0 / (7.0 * x)).ln()
    }
}

/// Solves `ln φ(x) = target` by bisection.
fn phi_inv_ln(target: f64) -> f64 {
    if target >= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while ln_phi(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Mean of the check-node output: `φ⁻¹(1 − (1 − φ(m))²)`, in the log domain.
fn check_mean(m: f64) -> f64 {
    let lp = ln_phi(m);
    let p = lp.exp();
    // 1 - (1 - p)^2 = p (2 - p)
    phi_inv_ln(lp + (2.0 - p).ln())
}

/// Gaussian-approximation profile; scores are bit error probabilities
/// `Q(√(m/2))` of the synthetic channels.
pub fn ga_profile(n: usize, snr_db: f64) -> Result<ReliabilityProfile> {
    if !snr_db.is_finite() {
        return Err(Error::Range("design SNR must be finite".into()));
    }
    let es = 10f64.powf(snr_db / 10.0);
    let mut m = vec![4.0 * es];
    for _ in 0..n {
        m = m.iter().flat_map(|&m| [check_mean(m), 2.0 * m]).collect();
    }
    let scores = m
        .iter()
        .map(|&m| 0.5 * statrs::function::erf::erfc(m.sqrt() / 2.0))
        .collect();
    Ok(ReliabilityProfile {
        scores,
        method: Method::GaussianApprox { snr_db },
    })
}

pub fn profile(n: usize, method: Method) -> Result<ReliabilityProfile> {
    match method {
        Method::Bhattacharyya { erasure } => bhattacharyya_profile(n, erasure),
        Method::GaussianApprox { snr_db } => ga_profile(n, snr_db),
    }
}

/// Freezes the `len - k_proto` worst positions; equal scores freeze the lower
/// index first.
pub fn select_frozen(profile: &ReliabilityProfile, k_proto: usize) -> Result<Vec<bool>> {
    let len = profile.scores.len();
    if k_proto == 0 || k_proto > len {
        return Err(Error::Range(format!("K_proto = {k_proto} not in 1..={len}")));
    }
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| profile.scores[b].total_cmp(&profile.scores[a]).then(a.cmp(&b)));
    let mut mask = vec![false; len];
    for &p in &order[..len - k_proto] {
        mask[p] = true;
    }
    Ok(mask)
}

/// Scores a candidate spec during pruning; lower is better, compared
/// lexicographically.
pub trait PruneEvaluator: Sync {
    fn score(&self, spec: &CodeSpec) -> Result<Vec<f64>>;
}

/// Cycle-spectrum proxy: the lexicographic cycle-count vector.
#[derive(Debug, Clone)]
pub struct CycleProxy {
    pub c_max: usize,
}

impl PruneEvaluator for CycleProxy {
    fn score(&self, spec: &CodeSpec) -> Result<Vec<f64>> {
        let r = protograph::analyze(spec, self.c_max)?;
        Ok(r.vector().into_iter().map(|c| c as f64).collect())
    }
}

/// Monte Carlo BER at a pilot SNR with a fixed frame budget and seed.
#[derive(Debug, Clone)]
pub struct BerEvaluator {
    pub decoder: DecoderKind,
    pub snr_db: f64,
    pub convention: SnrConvention,
    pub frames: u64,
    pub seed: u64,
}

impl BerEvaluator {
    /// 10^4 frames, 32-iteration exact BP.
    pub fn new(snr_db: f64, seed: u64) -> Self {
        Self {
            decoder: DecoderKind::bp(32),
            snr_db,
            convention: SnrConvention::EbN0,
            frames: 10_000,
            seed,
        }
    }
}

impl PruneEvaluator for BerEvaluator {
    fn score(&self, spec: &CodeSpec) -> Result<Vec<f64>> {
        let mut cfg = SimConfig::new(spec.clone(), self.decoder);
        cfg.convention = self.convention;
        cfg.max_frames = self.frames;
        cfg.max_frame_errors = u64::MAX;
        cfg.seed = self.seed;
        cfg.snr_db = vec![self.snr_db];
        // Candidates run concurrently already; keep each point sequential.
        cfg.chunk = self.frames as usize;
        Ok(vec![simulator::run_point(&cfg, self.snr_db)?.ber])
    }
}

#[derive(Debug, Clone)]
pub struct PruneStep {
    pub step: usize,
    pub unit: UnitAddress,
    pub metric: Vec<f64>,
    pub spec: CodeSpec,
}

#[derive(Debug, Clone)]
pub struct PruneTrace {
    /// Score of the input spec.
    pub initial: Vec<f64>,
    pub steps: Vec<PruneStep>,
}

impl PruneTrace {
    pub fn final_spec(&self) -> Option<&CodeSpec> {
        self.steps.last().map(|s| &s.spec)
    }

    /// CSV `step,pruned_unit,metric`; the unit is written as a quoted
    /// `"(stage,unit)"` and multi-valued metrics are joined with `;`.
    pub fn to_csv(&self) -> String {
        let join = |m: &[f64]| m.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        let mut out = String::from("step,pruned_unit,metric\n");
        out.push_str(&format!("0,,{}\n", join(&self.initial)));
        for s in &self.steps {
            out.push_str(&format!("{},\"{}\",{}\n", s.step, s.unit, join(&s.metric)));
        }
        out
    }
}

/// Greedily prunes active units, one per step, always removing the unit whose
/// removal scores best (ties: lowest stage, then unit), until the pruned
/// fraction of all `n·2^(n-1)` units reaches `target_fraction`.
pub fn greedy_prune(spec: &CodeSpec, target_fraction: f64, evaluator: &dyn PruneEvaluator) -> Result<PruneTrace> {
    spec.check()?;
    if !(0.0..=1.0).contains(&target_fraction) {
        return Err(Error::Range(format!("prune fraction {target_fraction} not in [0, 1]")));
    }
    let total = spec.shifts.total_units();
    let target = (target_fraction * total as f64).round() as usize;
    if target >= total {
        return Err(Error::Range(format!(
            "pruning {target} of {total} units leaves no active unit"
        )));
    }
    let initial = evaluator.score(spec)?;
    let mut current = spec.clone();
    let mut steps = Vec::new();
    while current.shifts.pruned_units() < target {
        let mut cands = Vec::new();
        for st in 0..current.n {
            for u in 0..current.shifts.rows()[st].len() {
                if !current.shifts.is_pruned(st, u) {
                    cands.push((st, u));
                }
            }
        }
        let scored = par::map(cands, |(st, u)| -> Result<(Vec<f64>, usize, usize)> {
            let mut shifts = current.shifts.clone();
            shifts.set(st, u, -1);
            Ok((evaluator.score(&current.with_shifts(shifts))?, st, u))
        });
        let mut best: Option<(Vec<f64>, usize, usize)> = None;
        for s in scored {
            let s = s?;
            let better = match &best {
                None => true,
                Some(b) => s.0.partial_cmp(&b.0) == Some(std::cmp::Ordering::Less),
            };
            if better {
                best = Some(s);
            }
        }
        let (metric, st, u) = best.ok_or_else(|| Error::Range("no active unit left to prune".into()))?;
        let mut shifts = current.shifts.clone();
        shifts.set(st, u, -1);
        current = current.with_shifts(shifts);
        steps.push(PruneStep {
            step: steps.len() + 1,
            unit: UnitAddress::new(st + 1, u + 1),
            metric,
            spec: current.clone(),
        });
    }
    Ok(PruneTrace { initial, steps })
}
