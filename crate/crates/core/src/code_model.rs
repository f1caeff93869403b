//! Canonical representation of a QC polar code and its text format.
//!
//! A code is described by the number of polarization stages `n`, the lifting
//! factor `Q`, a proto-level frozen mask of length `2^n` (shared by all `Q`
//! lanes) and an `n × 2^(n-1)` base matrix of circulant shifts, one per
//! proto-polarization unit. A shift of `-1` marks a pruned unit that passes
//! both wires through unchanged.
//!
//! Wiring: the unit `j` of stage `i` pairs proto-positions at distance
//! `2^(i-1)`. Positions are split into blocks of `2^i`; inside a block the
//! `k`-th unit pairs `(offset + k, offset + k + 2^(i-1))`. Units are numbered
//! by increasing upper position.

use std::fmt;

use crate::crc::Crc;
use crate::error::{Error, Result};

/// Shift value marking a pruned (inactive) unit.
pub const PRUNED: i64 = -1;

/// `n × 2^(n-1)` table of circulant shifts; row `i` is stage `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShiftBaseMatrix {
    rows: Vec<Vec<i64>>,
}

impl ShiftBaseMatrix {
    /// Wraps rows as given. Shape is not checked here; see [`validate`].
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        Self { rows }
    }

    /// All-zero matrix for an `n`-stage code.
    pub fn zeros(n: usize) -> Self {
        Self::filled(n, 0)
    }

    pub fn filled(n: usize, value: i64) -> Self {
        Self {
            rows: vec![vec![value; units_per_stage(n)]; n],
        }
    }

    pub fn stages(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    /// Shift of unit `unit` (0-based) at stage `stage` (0-based).
    #[inline]
    pub fn get(&self, stage: usize, unit: usize) -> i64 {
        self.rows[stage][unit]
    }

    pub fn set(&mut self, stage: usize, unit: usize, value: i64) {
        self.rows[stage][unit] = value;
    }

    pub fn is_pruned(&self, stage: usize, unit: usize) -> bool {
        self.rows[stage][unit] < 0
    }

    pub fn total_units(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn active_units(&self) -> usize {
        self.rows.iter().flatten().filter(|&&s| s >= 0).count()
    }

    pub fn pruned_units(&self) -> usize {
        self.total_units() - self.active_units()
    }
}

/// Address of a proto-polarization unit, both indices 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitAddress {
    pub stage: usize,
    pub unit: usize,
}

impl UnitAddress {
    pub fn new(stage: usize, unit: usize) -> Self {
        Self { stage, unit }
    }
}

impl fmt::Display for UnitAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.stage, self.unit)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSpec {
    /// Number of polarization stages; proto length is `2^n`.
    pub n: usize,
    /// Lifting factor `Q`.
    pub lift_q: usize,
    /// `true` = frozen proto-position, indexed by data (pre bit-reversal) index.
    pub frozen_mask: Vec<bool>,
    pub shifts: ShiftBaseMatrix,
    pub crc: Option<Crc>,
}

/// One failed invariant of a [`CodeSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub constraint: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.constraint)
    }
}

fn violation(field: impl Into<String>, constraint: impl Into<String>) -> Violation {
    Violation {
        field: field.into(),
        constraint: constraint.into(),
    }
}

#[inline]
pub fn proto_len(n: usize) -> usize {
    1 << n
}

#[inline]
pub fn units_per_stage(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        1 << (n - 1)
    }
}

/// 0-based wire pair `(upper, lower)` of unit `unit` at stage `stage`, both 0-based.
#[inline]
pub fn wires(stage: usize, unit: usize) -> (usize, usize) {
    let d = 1usize << stage;
    let a = (unit / d) * 2 * d + unit % d;
    (a, a + d)
}

/// 1-based wire pair of a 1-based unit address.
pub fn unit_wires(n: usize, addr: UnitAddress) -> Result<(usize, usize)> {
    if addr.stage == 0 || addr.stage > n || addr.unit == 0 || addr.unit > units_per_stage(n) {
        return Err(Error::Address {
            n,
            stage: addr.stage,
            unit: addr.unit,
        });
    }
    let (a, b) = wires(addr.stage - 1, addr.unit - 1);
    Ok((a + 1, b + 1))
}

impl CodeSpec {
    pub fn new(n: usize, lift_q: usize, frozen_mask: Vec<bool>, shifts: ShiftBaseMatrix) -> Result<Self> {
        let spec = Self {
            n,
            lift_q,
            frozen_mask,
            shifts,
            crc: None,
        };
        spec.check()?;
        Ok(spec)
    }

    /// Standard (unlifted) polar code with all shifts zero.
    pub fn standard(n: usize, frozen_mask: Vec<bool>) -> Result<Self> {
        Self::new(n, 1, frozen_mask, ShiftBaseMatrix::zeros(n))
    }

    pub fn with_crc(mut self, crc: Option<Crc>) -> Self {
        self.crc = crc;
        self
    }

    pub fn with_shifts(&self, shifts: ShiftBaseMatrix) -> Self {
        Self {
            shifts,
            ..self.clone()
        }
    }

    pub fn with_lift(&self, lift_q: usize) -> Self {
        Self {
            lift_q,
            ..self.clone()
        }
    }

    /// Fails with all violations if any invariant is broken.
    pub fn check(&self) -> Result<()> {
        let v = validate(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v))
        }
    }

    pub fn proto_len(&self) -> usize {
        proto_len(self.n)
    }

    pub fn block_len(&self) -> usize {
        self.proto_len() * self.lift_q
    }

    /// Information proto-positions.
    pub fn k_proto(&self) -> usize {
        self.frozen_mask.iter().filter(|&&f| !f).count()
    }

    /// Total information bits `K_proto · Q`.
    pub fn k(&self) -> usize {
        self.k_proto() * self.lift_q
    }

    pub fn rate(&self) -> f64 {
        self.k_proto() as f64 / self.proto_len() as f64
    }

    /// Data-index positions that carry information, in increasing order.
    pub fn info_positions(&self) -> Vec<usize> {
        (0..self.proto_len()).filter(|&p| !self.frozen_mask[p]).collect()
    }

    /// XOR count of one lifted encoding.
    pub fn xor_count(&self) -> usize {
        self.shifts.active_units() * self.lift_q
    }
}

/// Checks every [`CodeSpec`] invariant, returning one entry per failure.
pub fn validate(spec: &CodeSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    if spec.n == 0 {
        out.push(violation("n", "must be >= 1"));
    }
    if spec.n > 24 {
        out.push(violation("n", "must be <= 24"));
    }
    if spec.lift_q == 0 {
        out.push(violation("Q", "must be >= 1"));
    }
    if spec.n == 0 || spec.n > 24 {
        return out;
    }
    let len = proto_len(spec.n);
    if spec.frozen_mask.len() != len {
        out.push(violation(
            "frozen",
            format!("length must be 2^n = {len}, got {}", spec.frozen_mask.len()),
        ));
    } else if spec.frozen_mask.iter().all(|&f| f) {
        out.push(violation("frozen", "at least one information position required"));
    }
    let cols = units_per_stage(spec.n);
    let rows = spec.shifts.rows();
    if rows.len() != spec.n || rows.iter().any(|r| r.len() != cols) {
        let got_cols = rows.first().map_or(0, Vec::len);
        out.push(violation(
            "shifts",
            format!("dimensions must be {} x {cols}, got {} x {got_cols}", spec.n, rows.len()),
        ));
    }
    let q = spec.lift_q as i64;
    for (i, row) in rows.iter().enumerate() {
        for (j, &s) in row.iter().enumerate() {
            if s < PRUNED || (spec.lift_q > 0 && s >= q) {
                out.push(violation(
                    format!("shifts({},{})", i + 1, j + 1),
                    format!("value {s} outside [-1, {}]", q - 1),
                ));
            }
        }
    }
    if let Some(crc) = &spec.crc {
        if crc.width() == 0 || crc.width() > 32 {
            out.push(violation("crc_poly", "width must be in 1..=32"));
        } else if spec.frozen_mask.len() == len && crc.width() >= spec.k_proto() {
            out.push(violation("crc_poly", "CRC width must be smaller than K_proto"));
        }
    }
    out
}

/// Parses the key-value spec format.
///
/// ```text
/// n = 2
/// Q = 8            # or: q_log2 = 3
/// frozen = 1100
/// shifts =
///     0 0
///     -1 1
/// crc_poly = 0x107 # optional
/// ```
pub fn load_spec(text: &str) -> Result<CodeSpec> {
    let mut n: Option<usize> = None;
    let mut q: Option<usize> = None;
    let mut frozen: Option<Vec<bool>> = None;
    let mut shift_rows: Option<Vec<Vec<i64>>> = None;
    let mut crc: Option<Crc> = None;
    let mut in_shifts = false;

    let perr = |line: usize, msg: String| Error::Parse { line, msg };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let continuation = line.starts_with(' ') || line.starts_with('\t');
        if continuation {
            if !in_shifts {
                return Err(perr(lineno, "unexpected indented line".into()));
            }
            let row = parse_row(line).map_err(|m| perr(lineno, m))?;
            shift_rows.get_or_insert_with(Vec::new).push(row);
            continue;
        }
        in_shifts = false;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| perr(lineno, format!("expected `key = value`, got `{}`", line.trim())))?;
        let key = key.trim();
        let value = value.trim();
        let dup = || perr(lineno, format!("duplicate key `{key}`"));
        match key {
            "n" => {
                if n.is_some() {
                    return Err(dup());
                }
                n = Some(value.parse().map_err(|_| perr(lineno, format!("n: bad integer `{value}`")))?);
            }
            "Q" | "q_log2" => {
                if q.is_some() {
                    return Err(perr(lineno, "Q given more than once".into()));
                }
                let v: usize = value
                    .parse()
                    .map_err(|_| perr(lineno, format!("{key}: bad integer `{value}`")))?;
                q = Some(if key == "Q" {
                    v
                } else {
                    if v > 30 {
                        return Err(perr(lineno, "q_log2 must be <= 30".into()));
                    }
                    1 << v
                });
            }
            "frozen" => {
                if frozen.is_some() {
                    return Err(dup());
                }
                let bits = value
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        _ => Err(perr(lineno, format!("frozen: invalid character `{c}`"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                frozen = Some(bits);
            }
            "shifts" => {
                if shift_rows.is_some() {
                    return Err(dup());
                }
                let mut rows = Vec::new();
                if !value.is_empty() {
                    // single-line form: rows separated by ';'
                    for part in value.split(';') {
                        rows.push(parse_row(part).map_err(|m| perr(lineno, m))?);
                    }
                }
                shift_rows = Some(rows);
                in_shifts = true;
            }
            "crc_poly" => {
                if crc.is_some() {
                    return Err(dup());
                }
                let hex = value.trim_start_matches("0x").trim_start_matches("0X");
                let poly = u64::from_str_radix(hex, 16)
                    .map_err(|_| perr(lineno, format!("crc_poly: bad hex `{value}`")))?;
                crc = Some(Crc::new(poly).map_err(|e| perr(lineno, e.to_string()))?);
            }
            other => return Err(perr(lineno, format!("unknown key `{other}`"))),
        }
    }

    let n = n.ok_or_else(|| perr(0, "missing key `n`".into()))?;
    let lift_q = q.ok_or_else(|| perr(0, "missing key `Q` (or `q_log2`)".into()))?;
    let frozen_mask = frozen.ok_or_else(|| perr(0, "missing key `frozen`".into()))?;
    let rows = shift_rows.ok_or_else(|| perr(0, "missing key `shifts`".into()))?;
    let spec = CodeSpec {
        n,
        lift_q,
        frozen_mask,
        shifts: ShiftBaseMatrix::from_rows(rows),
        crc,
    };
    spec.check()?;
    Ok(spec)
}

fn parse_row(s: &str) -> std::result::Result<Vec<i64>, String> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().map_err(|_| format!("shifts: bad integer `{t}`")))
        .collect()
}

/// Canonical text form; `load_spec(&save_spec(s)) == s`.
pub fn save_spec(spec: &CodeSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("n = {}\n", spec.n));
    out.push_str(&format!("Q = {}\n", spec.lift_q));
    let frozen: String = spec.frozen_mask.iter().map(|&f| if f { '1' } else { '0' }).collect();
    out.push_str(&format!("frozen = {frozen}\n"));
    out.push_str("shifts =\n");
    for row in spec.shifts.rows() {
        let cells: Vec<String> = row.iter().map(i64::to_string).collect();
        out.push_str("    ");
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    if let Some(crc) = &spec.crc {
        out.push_str(&format!("crc_poly = {:#x}\n", crc.poly()));
    }
    out
}

/// Frozen mask from a `0`/`1` string, `1` = frozen.
pub fn mask_from_str(s: &str) -> Vec<bool> {
    s.chars().filter(|c| !c.is_whitespace()).map(|c| c == '1').collect()
}
