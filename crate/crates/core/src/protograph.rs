//! Proto factor graph, lifted-cycle enumeration, girth and shift optimization.
//!
//! Each active unit is a degree-3 XOR check. At stage `i` with wires `(a, b)`
//! and shift `s`, check lane `l` ties together
//!
//! * the upper input `(i-1, a)` at lane `l` (label 0),
//! * the upper output `(i, a)` at lane `l` (label 0),
//! * the lower wire `(i-1, b) = (i, b)` at lane `(l + s) mod Q` (label `s`).
//!
//! A closed, non-backtracking walk in the proto graph lifts to a closed walk
//! when the signed label sum vanishes mod `Q`: a traversal that leaves a check
//! on its lower socket adds `s`, one that enters on it subtracts `s`. Cycle
//! lengths count check traversals, so the shortest polar loop has length 4.
//! Counts are per proto walk class (rotation and reversal identified); each
//! class stands for `Q` lifted cycles.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::code_model::{proto_len, units_per_stage, wires, CodeSpec, ShiftBaseMatrix, UnitAddress};
use crate::error::{Error, Result};
use crate::par;

/// Default maximum cycle length searched.
pub const DEFAULT_C_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    StraightUpper,
    Cross,
    StraightLower,
}

/// Vertex `(boundary, position)`, both 0-based.
pub type Vertex = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtoEdge {
    pub from: Vertex,
    pub to: Vertex,
    pub label: i64,
    pub kind: EdgeKind,
    pub unit: UnitAddress,
}

/// Multistage proto graph: vertices `(t, p)` for `t ∈ 0..=n`, three edges per
/// active unit and two straight label-0 edges per pruned unit.
#[derive(Debug, Clone)]
pub struct ProtoGraph {
    pub n: usize,
    pub edges: Vec<ProtoEdge>,
    tanner: Tanner,
}

/// Socket of a check: which of the unit's three wires a Tanner edge uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Socket {
    UpperIn,
    UpperOut,
    Lower,
}

impl fmt::Display for Socket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Socket::UpperIn => "in",
            Socket::UpperOut => "out",
            Socket::Lower => "low",
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct TEdge {
    check: usize,
    var: usize,
    socket: Socket,
}

/// Proto Tanner graph: checks are active units, variables are wire segments.
#[derive(Debug, Clone)]
struct Tanner {
    /// stage, unit (0-based) of each check.
    checks: Vec<(usize, usize)>,
    num_vars: usize,
    edges: Vec<TEdge>,
    check_edges: Vec<[usize; 3]>,
    var_edges: Vec<Vec<usize>>,
}

impl Tanner {
    fn from_shifts(n: usize, shifts: &ShiftBaseMatrix) -> Self {
        // current variable id on each wire position
        let mut cur: Vec<usize> = (0..proto_len(n)).collect();
        let mut num_vars = proto_len(n);
        let mut checks = Vec::new();
        let mut edges = Vec::new();
        let mut check_edges = Vec::new();
        for stage in 0..n {
            for unit in 0..units_per_stage(n) {
                if shifts.is_pruned(stage, unit) {
                    continue;
                }
                let (a, b) = wires(stage, unit);
                let out = num_vars;
                num_vars += 1;
                let c = checks.len();
                checks.push((stage, unit));
                let base = edges.len();
                edges.push(TEdge { check: c, var: cur[a], socket: Socket::UpperIn });
                edges.push(TEdge { check: c, var: out, socket: Socket::UpperOut });
                edges.push(TEdge { check: c, var: cur[b], socket: Socket::Lower });
                check_edges.push([base, base + 1, base + 2]);
                cur[a] = out;
            }
        }
        let mut var_edges = vec![Vec::new(); num_vars];
        for (i, e) in edges.iter().enumerate() {
            var_edges[e.var].push(i);
        }
        Self {
            checks,
            num_vars,
            edges,
            check_edges,
            var_edges,
        }
    }

    fn label(&self, edge: usize, shifts: &ShiftBaseMatrix) -> i64 {
        let e = self.edges[edge];
        match e.socket {
            Socket::Lower => {
                let (st, u) = self.checks[e.check];
                shifts.get(st, u)
            }
            _ => 0,
        }
    }
}

/// Builds the proto graph of `spec`.
pub fn build_protograph(spec: &CodeSpec) -> Result<ProtoGraph> {
    spec.check()?;
    Ok(graph_from_shifts(spec.n, &spec.shifts))
}

fn graph_from_shifts(n: usize, shifts: &ShiftBaseMatrix) -> ProtoGraph {
    let mut edges = Vec::new();
    for stage in 0..n {
        for unit in 0..units_per_stage(n) {
            let (a, b) = wires(stage, unit);
            let addr = UnitAddress::new(stage + 1, unit + 1);
            let s = shifts.get(stage, unit);
            edges.push(ProtoEdge {
                from: (stage, a),
                to: (stage + 1, a),
                label: 0,
                kind: EdgeKind::StraightUpper,
                unit: addr,
            });
            if s >= 0 {
                edges.push(ProtoEdge {
                    from: (stage, b),
                    to: (stage + 1, a),
                    label: s,
                    kind: EdgeKind::Cross,
                    unit: addr,
                });
            }
            edges.push(ProtoEdge {
                from: (stage, b),
                to: (stage + 1, b),
                label: 0,
                kind: EdgeKind::StraightLower,
                unit: addr,
            });
        }
    }
    ProtoGraph {
        n,
        edges,
        tanner: Tanner::from_shifts(n, shifts),
    }
}

impl ProtoGraph {
    pub fn num_vertices(&self) -> usize {
        (self.n + 1) * proto_len(self.n)
    }

    pub fn cross_edges(&self) -> impl Iterator<Item = &ProtoEdge> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Cross)
    }

    /// Number of degree-3 checks (active units).
    pub fn num_checks(&self) -> usize {
        self.tanner.checks.len()
    }

    /// Number of wire-segment variables.
    pub fn num_vars(&self) -> usize {
        self.tanner.num_vars
    }
}

/// One check traversal of a cycle witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Traversal {
    pub unit: UnitAddress,
    pub enter: Socket,
    pub exit: Socket,
}

impl Traversal {
    /// Coefficient of this unit's shift in the accumulated sum.
    pub fn sign(&self) -> i64 {
        match (self.enter, self.exit) {
            (_, Socket::Lower) => 1,
            (Socket::Lower, _) => -1,
            _ => 0,
        }
    }
}

impl fmt::Display for Traversal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}->{}]", self.unit, self.enter, self.exit)
    }
}

/// Result of a bounded cycle search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleReport {
    /// Lifted cycle class counts by length (in check traversals), `2..=c_max`.
    pub counts: BTreeMap<usize, usize>,
    /// Shortest cycle length found, `None` if none up to `c_max`.
    pub girth: Option<usize>,
    pub witness: Option<Vec<Traversal>>,
    /// Search depth; longer cycles are not reported.
    pub c_max: usize,
}

impl CycleReport {
    /// Counts ordered by length; compared lexicographically by the optimizer.
    pub fn vector(&self) -> Vec<usize> {
        self.counts.values().copied().collect()
    }

    pub fn count(&self, len: usize) -> usize {
        self.counts.get(&len).copied().unwrap_or(0)
    }

    /// Witness rendered on one line.
    pub fn witness_line(&self) -> String {
        match &self.witness {
            None => "none".to_string(),
            Some(w) => w.iter().map(Traversal::to_string).collect::<Vec<_>>().join(" "),
        }
    }
}

/// A closed non-backtracking proto walk, stored as the sequence of Tanner
/// edges in traversal order: `v0 -e0-> c0 -e1-> v1 -e2-> c1 ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Walk {
    edges: Vec<usize>,
}

impl Walk {
    fn checks(&self) -> usize {
        self.edges.len() / 2
    }

    fn canonical(edges: &[usize]) -> Vec<usize> {
        let len = edges.len();
        let rev: Vec<usize> = edges.iter().rev().copied().collect();
        let mut best: Option<Vec<usize>> = None;
        for seq in [edges, rev.as_slice()] {
            for r in (0..len).step_by(2) {
                let cand: Vec<usize> = seq[r..].iter().chain(&seq[..r]).copied().collect();
                if best.as_ref().is_none_or(|b| cand < *b) {
                    best = Some(cand);
                }
            }
        }
        best.unwrap_or_default()
    }
}

/// Precomputed set of closed non-backtracking proto walks; depends only on the
/// prune pattern, not on shift values.
#[derive(Debug, Clone)]
pub struct WalkIndex {
    c_max: usize,
    tanner: Tanner,
    walks: Vec<Walk>,
    /// walk ids touching each check
    by_check: Vec<Vec<usize>>,
    /// check id by (stage, unit), `None` if pruned
    check_of: Vec<Vec<Option<usize>>>,
}

impl WalkIndex {
    pub fn new(n: usize, shifts: &ShiftBaseMatrix, c_max: usize) -> Self {
        let tanner = Tanner::from_shifts(n, shifts);
        let walks = enumerate_walks(&tanner, c_max);
        let mut by_check = vec![Vec::new(); tanner.checks.len()];
        for (w_id, w) in walks.iter().enumerate() {
            let mut seen = HashSet::new();
            for pair in w.edges.chunks(2) {
                let c = tanner.edges[pair[0]].check;
                if seen.insert(c) {
                    by_check[c].push(w_id);
                }
            }
        }
        let mut check_of = vec![vec![None; units_per_stage(n)]; n];
        for (c, &(st, u)) in tanner.checks.iter().enumerate() {
            check_of[st][u] = Some(c);
        }
        Self {
            c_max,
            tanner,
            walks,
            by_check,
            check_of,
        }
    }

    pub fn num_walks(&self) -> usize {
        self.walks.len()
    }

    /// Whether walk `w` lifts to a simple cycle under `shifts` and lift `q`.
    fn is_cycle(&self, w: usize, shifts: &ShiftBaseMatrix, q: usize) -> bool {
        let walk = &self.walks[w];
        let qi = q as i64;
        let mut lane: i64 = 0;
        let mut total: i64 = 0;
        for pair in walk.edges.chunks(2) {
            total += self.tanner.label(pair[1], shifts) - self.tanner.label(pair[0], shifts);
        }
        if total.rem_euclid(qi) != 0 {
            return false;
        }
        // Trace the lifted walk from lane 0 and reject repeated vertices.
        let v0 = self.tanner.edges[walk.edges[0]].var;
        let mut seen_checks: HashSet<(usize, i64)> = HashSet::new();
        let mut seen_vars: HashSet<(usize, i64)> = HashSet::new();
        seen_vars.insert((v0, 0));
        let steps = walk.edges.len() / 2;
        for (k, pair) in walk.edges.chunks(2).enumerate() {
            let ein = pair[0];
            let eout = pair[1];
            let check = self.tanner.edges[ein].check;
            let cl = (lane - self.tanner.label(ein, shifts)).rem_euclid(qi);
            if !seen_checks.insert((check, cl)) {
                return false;
            }
            lane = (cl + self.tanner.label(eout, shifts)).rem_euclid(qi);
            let v = self.tanner.edges[eout].var;
            if k + 1 < steps && !seen_vars.insert((v, lane)) {
                return false;
            }
        }
        true
    }

    fn witness(&self, w: usize) -> Vec<Traversal> {
        self.walks[w]
            .edges
            .chunks(2)
            .map(|pair| {
                let ein = self.tanner.edges[pair[0]];
                let eout = self.tanner.edges[pair[1]];
                let (st, u) = self.tanner.checks[ein.check];
                Traversal {
                    unit: UnitAddress::new(st + 1, u + 1),
                    enter: ein.socket,
                    exit: eout.socket,
                }
            })
            .collect()
    }

    /// Cycle spectrum for `shifts` (which must share this index's prune pattern).
    pub fn report(&self, shifts: &ShiftBaseMatrix, q: usize) -> CycleReport {
        let flags = par::map_range(self.walks.len(), |w| self.is_cycle(w, shifts, q));
        let mut counts: BTreeMap<usize, usize> = (2..=self.c_max).map(|c| (c, 0)).collect();
        let mut witness: Option<usize> = None;
        for (w, &hit) in flags.iter().enumerate() {
            if !hit {
                continue;
            }
            let len = self.walks[w].checks();
            *counts.entry(len).or_insert(0) += 1;
            let better = match witness {
                None => true,
                Some(prev) => len < self.walks[prev].checks(),
            };
            if better {
                witness = Some(w);
            }
        }
        let girth = counts.iter().find(|(_, &c)| c > 0).map(|(&l, _)| l);
        CycleReport {
            counts,
            girth,
            witness: witness.map(|w| self.witness(w)),
            c_max: self.c_max,
        }
    }

    fn counts_vec(&self, shifts: &ShiftBaseMatrix, q: usize) -> Vec<usize> {
        let mut v = vec![0usize; self.c_max + 1];
        for w in 0..self.walks.len() {
            if self.is_cycle(w, shifts, q) {
                v[self.walks[w].checks()] += 1;
            }
        }
        v.split_off(2)
    }

    /// Cycle vector after replacing the shift of one unit, updating only the
    /// walks through that unit.
    fn counts_after(
        &self,
        base: &[usize],
        shifts: &ShiftBaseMatrix,
        q: usize,
        stage: usize,
        unit: usize,
        value: i64,
    ) -> Vec<usize> {
        let Some(check) = self.check_of[stage][unit] else {
            return base.to_vec();
        };
        let mut out = base.to_vec();
        let mut modified = shifts.clone();
        modified.set(stage, unit, value);
        for &w in &self.by_check[check] {
            let len = self.walks[w].checks() - 2;
            if self.is_cycle(w, shifts, q) {
                out[len] -= 1;
            }
            if self.is_cycle(w, &modified, q) {
                out[len] += 1;
            }
        }
        out
    }

    fn units_in_cycles_of_len(&self, shifts: &ShiftBaseMatrix, q: usize, len: usize) -> Vec<(usize, usize)> {
        let mut units = std::collections::BTreeSet::new();
        for (w_id, w) in self.walks.iter().enumerate() {
            if w.checks() == len && self.is_cycle(w_id, shifts, q) {
                for pair in w.edges.chunks(2) {
                    units.insert(self.tanner.checks[self.tanner.edges[pair[0]].check]);
                }
            }
        }
        units.into_iter().collect()
    }
}

/// Enumerates closed non-backtracking walks of up to `c_max` checks, one per
/// rotation/reversal class, in canonical order.
fn enumerate_walks(t: &Tanner, c_max: usize) -> Vec<Walk> {
    let starts: Vec<usize> = (0..t.edges.len()).collect();
    let per_start = par::map(starts, |e0| {
        let mut found = Vec::new();
        let mut path = vec![e0];
        walk_dfs(t, e0, c_max, &mut path, &mut found);
        found
    });
    let mut set: HashSet<Vec<usize>> = HashSet::new();
    for found in per_start {
        for w in found {
            set.insert(Walk::canonical(&w));
        }
    }
    let mut walks: Vec<Walk> = set.into_iter().map(|edges| Walk { edges }).collect();
    walks.sort_by(|a, b| a.edges.len().cmp(&b.edges.len()).then_with(|| a.cmp(b)));
    walks
}

/// `path` ends with an edge entering a check. Only edges with id >= `e0` are
/// used, so each class is discovered from its smallest edge.
fn walk_dfs(t: &Tanner, e0: usize, c_max: usize, path: &mut Vec<usize>, found: &mut Vec<Vec<usize>>) {
    let ein = *path.last().unwrap_or(&e0);
    let check = t.edges[ein].check;
    let depth = path.len().div_ceil(2);
    let v0 = t.edges[e0].var;
    for &eout in &t.check_edges[check] {
        if eout == ein || eout < e0 {
            continue;
        }
        let v = t.edges[eout].var;
        path.push(eout);
        if v == v0 && eout != e0 && depth >= 2 {
            found.push(path.clone());
        }
        if depth < c_max {
            for &enext in &t.var_edges[v] {
                if enext == eout || enext < e0 {
                    continue;
                }
                path.push(enext);
                walk_dfs(t, e0, c_max, path, found);
                path.pop();
            }
        }
        path.pop();
    }
}

/// Bounded search for lifted cycles of `g` under lift `q`.
pub fn enumerate_cycles(g: &ProtoGraph, lift_q: usize, c_max: usize) -> CycleReport {
    let shifts = shifts_from_graph(g);
    WalkIndex::new(g.n, &shifts, c_max).report(&shifts, lift_q)
}

fn shifts_from_graph(g: &ProtoGraph) -> ShiftBaseMatrix {
    let mut shifts = ShiftBaseMatrix::filled(g.n, -1);
    for e in g.cross_edges() {
        shifts.set(e.unit.stage - 1, e.unit.unit - 1, e.label);
    }
    shifts
}

/// Convenience: cycle report straight from a spec.
pub fn analyze(spec: &CodeSpec, c_max: usize) -> Result<CycleReport> {
    let g = build_protograph(spec)?;
    Ok(enumerate_cycles(&g, spec.lift_q, c_max))
}

/// Largest lifted size accepted by [`lifted_girth_oracle`].
pub const ORACLE_GUARD: usize = 1 << 12;

/// Girth (in check traversals) of the explicitly lifted Tanner graph, found by
/// breadth-first search from every vertex. Returns `None` when the graph is
/// acyclic or the girth exceeds `c_max`.
pub fn lifted_girth_oracle(spec: &CodeSpec, c_max: usize) -> Result<Option<usize>> {
    spec.check()?;
    if spec.block_len() > ORACLE_GUARD {
        return Err(Error::TooLarge(spec.block_len(), ORACLE_GUARD));
    }
    let q = spec.lift_q;
    let n = spec.n;
    // Explicit lifted graph, built straight from the wiring rule.
    let mut var_cur: Vec<usize> = (0..proto_len(n)).collect();
    let mut num_vars = proto_len(n);
    let mut check_nbrs: Vec<[(usize, usize); 3]> = Vec::new();
    for stage in 0..n {
        for unit in 0..units_per_stage(n) {
            let s = spec.shifts.get(stage, unit);
            if s < 0 {
                continue;
            }
            let (a, b) = wires(stage, unit);
            let out = num_vars;
            num_vars += 1;
            check_nbrs.push([(var_cur[a], 0), (out, 0), (var_cur[b], s as usize)]);
            var_cur[a] = out;
        }
    }
    let num_checks = check_nbrs.len();
    // vertex ids: vars [0, num_vars*q), checks after.
    let total = (num_vars + num_checks) * q;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for (c, nbrs) in check_nbrs.iter().enumerate() {
        for l in 0..q {
            let cv = num_vars * q + c * q + l;
            for &(v, s) in nbrs {
                let vv = v * q + (l + s) % q;
                adj[cv].push(vv);
                adj[vv].push(cv);
            }
        }
    }
    let limit = 2 * c_max;
    let best = par::map_range(total, |root| {
        let mut dist = vec![usize::MAX; total];
        let mut parent = vec![usize::MAX; total];
        let mut queue = VecDeque::new();
        dist[root] = 0;
        queue.push_back(root);
        let mut best = usize::MAX;
        while let Some(x) = queue.pop_front() {
            if 2 * dist[x] + 1 >= best.min(limit + 1) {
                break;
            }
            for &y in &adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    parent[y] = x;
                    queue.push_back(y);
                } else if parent[x] != y {
                    best = best.min(dist[x] + dist[y] + 1);
                }
            }
        }
        best
    })
    .into_iter()
    .min()
    .unwrap_or(usize::MAX);
    if best <= limit {
        Ok(Some(best / 2))
    } else {
        Ok(None)
    }
}

#[derive(Debug, Clone)]
pub struct HillClimbConfig {
    /// Maximum number of candidate evaluations.
    pub budget: usize,
    pub c_max: usize,
    /// If set, only this many randomly drawn shift values are tried per unit
    /// and iteration; otherwise every value in `0..Q` is tried.
    pub shift_samples: Option<usize>,
    pub seed: u64,
}

impl Default for HillClimbConfig {
    fn default() -> Self {
        Self {
            budget: 10_000,
            c_max: DEFAULT_C_MAX,
            shift_samples: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HillClimbResult {
    pub shifts: ShiftBaseMatrix,
    pub report: CycleReport,
    pub initial: CycleReport,
    pub evaluations: usize,
    pub accepted: usize,
}

/// Hill climbing on the lexicographic cycle vector.
///
/// Each iteration evaluates single-entry replacements, first for units lying on
/// the shortest remaining cycles and, if none of those improves, for every
/// active unit. The best candidate (ties: lowest stage, unit, shift) is taken
/// if it strictly improves the vector. Stops at a local optimum, when no short
/// cycles remain, or when the evaluation budget runs out.
pub fn hill_climb_shifts(spec: &CodeSpec, cfg: &HillClimbConfig) -> Result<HillClimbResult> {
    spec.check()?;
    let q = spec.lift_q;
    let index = WalkIndex::new(spec.n, &spec.shifts, cfg.c_max);
    let initial = index.report(&spec.shifts, q);
    let mut shifts = spec.shifts.clone();
    let mut current = index.counts_vec(&shifts, q);
    let mut evaluations = 0usize;
    let mut accepted = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    if q >= 2 {
        'outer: while evaluations < cfg.budget && current.iter().any(|&c| c > 0) {
            let lead = current.iter().position(|&c| c > 0).map_or(0, |i| i + 2);
            let focused = index.units_in_cycles_of_len(&shifts, q, lead);
            let all: Vec<(usize, usize)> = index.tanner.checks.clone();
            for units in [focused, all] {
                let mut cands: Vec<(usize, usize, i64)> = Vec::new();
                for &(st, u) in &units {
                    let cur = shifts.get(st, u);
                    let mut values: Vec<i64> = (0..q as i64).filter(|&v| v != cur).collect();
                    if let Some(k) = cfg.shift_samples {
                        values.shuffle(&mut rng);
                        values.truncate(k);
                        values.sort_unstable();
                    }
                    cands.extend(values.into_iter().map(|v| (st, u, v)));
                }
                let room = cfg.budget - evaluations;
                cands.truncate(room);
                if cands.is_empty() {
                    break 'outer;
                }
                evaluations += cands.len();
                let scored = par::map(cands, |(st, u, v)| {
                    (index.counts_after(&current, &shifts, q, st, u, v), (st, u, v))
                });
                // min_by keeps the first of equal elements, i.e. the tie order.
                let best = scored.into_iter().min_by(|a, b| a.0.cmp(&b.0));
                if let Some((vec, (st, u, v))) = best {
                    if vec < current {
                        shifts.set(st, u, v);
                        current = vec;
                        accepted += 1;
                        continue 'outer;
                    }
                }
                if evaluations >= cfg.budget {
                    break 'outer;
                }
            }
            break;
        }
    }
    let report = index.report(&shifts, q);
    Ok(HillClimbResult {
        shifts,
        report,
        initial,
        evaluations,
        accepted,
    })
}

/// Uniformly random shift matrix with entries in `0..q`.
pub fn random_shifts(n: usize, q: usize, seed: u64) -> ShiftBaseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| (0..units_per_stage(n)).map(|_| rng.gen_range(0..q as i64)).collect())
        .collect();
    ShiftBaseMatrix::from_rows(rows)
}
