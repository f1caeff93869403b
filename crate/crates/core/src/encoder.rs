//! GF(2) encoding of standard and lifted (QC) polar codes.
//!
//! Frames are flat `u8` vectors of `0`/`1` with index `p * Q + lane`, where
//! `p` is the 0-based proto-position. Encoding of a QC code places data per
//! lane at the non-frozen data indices, bit-reverses every lane, then runs the
//! `n` butterfly stages. At a unit with wires `(a, b)` and shift `s` the upper
//! wire of lane `l` absorbs the lower wire of lane `(l + s) mod Q`.

use crate::code_model::{wires, CodeSpec};
use crate::error::{Error, Result};

fn log2_exact(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Reverses the low `bits` bits of `idx`.
#[inline]
pub fn reverse_index(idx: usize, bits: usize) -> usize {
    if bits == 0 {
        0
    } else {
        idx.reverse_bits() >> (usize::BITS as usize - bits)
    }
}

/// Applies the bit-reversal permutation to any slice of power-of-two length.
pub fn bit_reverse_permute<T: Copy>(v: &[T]) -> Result<Vec<T>> {
    let n = log2_exact(v.len())?;
    Ok((0..v.len()).map(|i| v[reverse_index(i, n)]).collect())
}

pub fn bit_reversal(u: &[u8]) -> Result<Vec<u8>> {
    bit_reverse_permute(u)
}

/// `G^{⊗n} u` over GF(2) with `G = [[1,1],[0,1]]`, no bit reversal.
pub fn kernel_transform(u: &[u8]) -> Result<Vec<u8>> {
    log2_exact(u.len())?;
    let mut x = u.to_vec();
    let mut d = 1;
    while d < x.len() {
        for block in (0..x.len()).step_by(2 * d) {
            for a in block..block + d {
                x[a] ^= x[a + d];
            }
        }
        d *= 2;
    }
    Ok(x)
}

/// Places data bits into a data-index frame (frozen positions zero).
pub fn scatter(spec: &CodeSpec, data: &[u8]) -> Result<Vec<u8>> {
    let q = spec.lift_q;
    if data.len() != spec.k() {
        return Err(Error::Length {
            what: "data bits",
            expected: spec.k(),
            got: data.len(),
        });
    }
    let mut frame = vec![0u8; spec.block_len()];
    for (slot, p) in spec.info_positions().into_iter().enumerate() {
        frame[p * q..(p + 1) * q].copy_from_slice(&data[slot * q..(slot + 1) * q]);
    }
    Ok(frame)
}

/// Inverse of [`scatter`]: reads the information positions of a data-index frame.
pub fn gather(spec: &CodeSpec, frame: &[u8]) -> Vec<u8> {
    let q = spec.lift_q;
    let mut out = Vec::with_capacity(spec.k());
    for p in spec.info_positions() {
        out.extend_from_slice(&frame[p * q..(p + 1) * q]);
    }
    out
}

/// Permutes a data-index frame into stage-0 wire order (per-lane bit reversal).
pub fn to_wire_order<T: Copy>(spec: &CodeSpec, frame: &[T]) -> Vec<T> {
    let q = spec.lift_q;
    let mut out = frame.to_vec();
    for p in 0..spec.proto_len() {
        let r = reverse_index(p, spec.n);
        out[r * q..(r + 1) * q].copy_from_slice(&frame[p * q..(p + 1) * q]);
    }
    out
}

/// Runs the lifted butterfly stages in place on a wire-order frame and returns
/// the number of XORs performed.
pub fn butterfly_in_place(spec: &CodeSpec, frame: &mut [u8]) -> usize {
    let q = spec.lift_q;
    let mut xors = 0;
    for stage in 0..spec.n {
        for (unit, &s) in spec.shifts.rows()[stage].iter().enumerate() {
            if s < 0 {
                continue;
            }
            let s = s as usize;
            let (a, b) = wires(stage, unit);
            let (head, tail) = frame.split_at_mut(b * q);
            let upper = &mut head[a * q..(a + 1) * q];
            let lower = &tail[..q];
            for l in 0..q - s {
                upper[l] ^= lower[l + s];
            }
            for l in q - s..q {
                upper[l] ^= lower[l + s - q];
            }
            xors += q;
        }
    }
    xors
}

/// Encodes `K_proto · Q` data bits into an `N = 2^n · Q` codeword frame.
pub fn encode_qc(spec: &CodeSpec, data: &[u8]) -> Result<Vec<u8>> {
    spec.check()?;
    let frame = scatter(spec, data)?;
    let mut wire = to_wire_order(spec, &frame);
    butterfly_in_place(spec, &mut wire);
    Ok(wire)
}

/// `x = G^{⊗n} B u` for a `Q = 1` code.
pub fn encode_standard(spec: &CodeSpec, data: &[u8]) -> Result<Vec<u8>> {
    if spec.lift_q != 1 {
        return Err(Error::Unsupported(format!(
            "standard encoding needs Q = 1, got Q = {}",
            spec.lift_q
        )));
    }
    spec.check()?;
    let u = scatter(spec, data)?;
    kernel_transform(&bit_reversal(&u)?)
}

/// Dense GF(2) matrix with rows packed into `u64` words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        Self {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, rhs: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = BitMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    let src = rhs.row(k).to_vec();
                    let dst = &mut out.data[r * out.words..(r + 1) * out.words];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d ^= s;
                    }
                }
            }
        }
        out
    }

    /// Matrix-vector product over GF(2).
    pub fn mul_vec(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .filter(|&c| self.get(r, c) && v[c] & 1 == 1)
                    .count() as u8
                    & 1
            })
            .collect()
    }
}

/// Largest block length accepted by [`lifted_generator`].
pub const DENSE_GUARD: usize = 1 << 14;

/// Explicit lifted generator `M` with `encode_qc(u) == M · scatter(u)`.
///
/// Built as a product of dense factors: one per-lane bit-reversal permutation,
/// then one block factor per stage holding `I(0)` on the diagonal and the
/// circulant `I(s)` at block `(a, b)` of every active unit.
pub fn lifted_generator(spec: &CodeSpec) -> Result<BitMatrix> {
    spec.check()?;
    let n_total = spec.block_len();
    if n_total > DENSE_GUARD {
        return Err(Error::TooLarge(n_total, DENSE_GUARD));
    }
    let q = spec.lift_q;

    let mut perm = BitMatrix::zeros(n_total, n_total);
    for p in 0..spec.proto_len() {
        let r = reverse_index(p, spec.n);
        for l in 0..q {
            perm.set(r * q + l, p * q + l, true);
        }
    }

    let mut acc = perm;
    for stage in 0..spec.n {
        let mut factor = BitMatrix::identity(n_total);
        for (unit, &s) in spec.shifts.rows()[stage].iter().enumerate() {
            if s < 0 {
                continue;
            }
            let (a, b) = wires(stage, unit);
            for l in 0..q {
                let col = (l + s as usize) % q;
                factor.set(a * q + l, b * q + col, true);
            }
        }
        acc = factor.mul(&acc);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_model::{mask_from_str, ShiftBaseMatrix};
    use proptest::prelude::*;

    /// Dense `G^{⊗n}` by repeated Kronecker products.
    fn kron_power(n: usize) -> Vec<Vec<u8>> {
        let g = [[1u8, 1], [0, 1]];
        let mut m = vec![vec![1u8]];
        for _ in 0..n {
            let sz = m.len();
            let mut next = vec![vec![0u8; 2 * sz]; 2 * sz];
            for (i, gi) in g.iter().enumerate() {
                for (j, &gij) in gi.iter().enumerate() {
                    for r in 0..sz {
                        for c in 0..sz {
                            next[i * sz + r][j * sz + c] = gij & m[r][c];
                        }
                    }
                }
            }
            m = next;
        }
        m
    }

    fn dense_mul(m: &[Vec<u8>], v: &[u8]) -> Vec<u8> {
        m.iter()
            .map(|row| row.iter().zip(v).fold(0, |acc, (a, b)| acc ^ (a & b)))
            .collect()
    }

    #[test]
    fn kernel_n1() {
        assert_eq!(kernel_transform(&[1, 0]).unwrap(), vec![1, 0]);
        assert_eq!(kernel_transform(&[0, 1]).unwrap(), vec![1, 1]);
    }

    #[test]
    fn kernel_zero_and_last_unit_vector() {
        for n in 0..6 {
            assert!(kernel_transform(&vec![0; 1 << n]).unwrap().iter().all(|&b| b == 0));
        }
        let mut e8 = vec![0u8; 8];
        e8[7] = 1;
        assert_eq!(kernel_transform(&e8).unwrap(), vec![1; 8]);
        let m = kron_power(3);
        assert_eq!(dense_mul(&m, &e8), vec![1; 8]);
    }

    #[test]
    fn kernel_rejects_non_power_of_two() {
        assert!(matches!(kernel_transform(&[0, 1, 0]), Err(Error::NotPowerOfTwo(3))));
        assert!(bit_reversal(&[]).is_err());
    }

    #[test]
    fn bit_reversal_examples() {
        assert_eq!(bit_reversal(&[1, 2, 3, 4]).unwrap(), vec![1, 3, 2, 4]);
        assert_eq!(reverse_index(1, 3), 4);
        let v: Vec<u8> = (0..8).collect();
        let r = bit_reversal(&v).unwrap();
        assert_eq!(r[4], 1);
        assert_eq!(bit_reversal(&r).unwrap(), v);
    }

    #[test]
    fn standard_encoding_against_dense_oracle() {
        let spec = CodeSpec::standard(2, mask_from_str("1100")).unwrap();
        assert_eq!(encode_standard(&spec, &[0, 0]).unwrap(), vec![0, 0, 0, 0]);
        // G^{⊗2} B applied to u = (0, 0, 1, 1)
        let g = kron_power(2);
        let bu = bit_reversal(&[0, 0, 1, 1]).unwrap();
        let expect = dense_mul(&g, &bu);
        assert_eq!(expect, vec![0, 0, 1, 1]);
        assert_eq!(encode_standard(&spec, &[1, 1]).unwrap(), expect);
        assert!(matches!(
            encode_standard(&spec, &[1, 1, 0]),
            Err(Error::Length { expected: 2, got: 3, .. })
        ));
    }

    #[test]
    fn lifted_generator_q1_is_kron_times_bitrev() {
        let spec = CodeSpec::standard(2, mask_from_str("1000")).unwrap();
        let m = lifted_generator(&spec).unwrap();
        let g = kron_power(2);
        // column c of G·B is column bitrev(c) of G
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(m.get(r, c), g[r][reverse_index(c, 2)] == 1);
            }
        }
    }

    #[test]
    fn lifted_generator_zero_shift_block_structure() {
        let spec = CodeSpec::new(1, 2, mask_from_str("00"), ShiftBaseMatrix::zeros(1)).unwrap();
        let m = lifted_generator(&spec).unwrap();
        // G ⊗ I(0)
        let expect = [[1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0], [0, 0, 0, 1]];
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(m.get(r, c), expect[r][c] == 1, "({r},{c})");
            }
        }
    }

    #[test]
    fn single_probe_n2_q2() {
        let spec = CodeSpec::new(
            2,
            2,
            mask_from_str("0000"),
            ShiftBaseMatrix::from_rows(vec![vec![0, 0], vec![0, 1]]),
        )
        .unwrap();
        // single one at data position p = 4 (index 3), lane 0
        let mut data = vec![0u8; 8];
        data[3 * 2] = 1;
        let x = encode_qc(&spec, &data).unwrap();
        let m = lifted_generator(&spec).unwrap();
        assert_eq!(x, m.mul_vec(&scatter(&spec, &data).unwrap()));
        // u4 sits on wire 4 and feeds wire 3 (stage 1) then wire 1 lane 0 and wire 2 lane 1 (stage 2)
        assert_eq!(x, vec![1, 0, 0, 1, 1, 0, 1, 0]);
    }

    #[test]
    fn generator_too_large() {
        let spec = CodeSpec::new(2, 1 << 13, mask_from_str("1100"), ShiftBaseMatrix::zeros(2)).unwrap();
        assert!(matches!(lifted_generator(&spec), Err(Error::TooLarge(..))));
    }

    #[test]
    fn xor_count_matches_active_units() {
        let spec = CodeSpec::new(
            3,
            4,
            mask_from_str("11100000"),
            ShiftBaseMatrix::from_rows(vec![vec![0, 1, -1, 3], vec![2, -1, -1, 0], vec![1, 1, 1, 1]]),
        )
        .unwrap();
        let mut frame = vec![1u8; spec.block_len()];
        let xors = butterfly_in_place(&spec, &mut frame);
        assert_eq!(xors, 9 * 4);
        assert_eq!(xors, spec.xor_count());
    }

    proptest! {
        #[test]
        fn kernel_is_involution(n in 0usize..=10, seed in any::<u64>()) {
            let mut s = seed;
            let u: Vec<u8> = (0..1usize << n).map(|_| {
                s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                (s & 1) as u8
            }).collect();
            let x = kernel_transform(&u).unwrap();
            prop_assert_eq!(kernel_transform(&x).unwrap(), u);
        }

        #[test]
        fn kernel_matches_dense(n in 0usize..=5, bits in proptest::collection::vec(0u8..2, 32)) {
            let u = &bits[..1 << n];
            prop_assert_eq!(kernel_transform(u).unwrap(), dense_mul(&kron_power(n), u));
        }

        #[test]
        fn qc_encoding_is_linear(
            shifts in proptest::collection::vec(-1i64..8, 12),
            a in proptest::collection::vec(0u8..2, 32),
            b in proptest::collection::vec(0u8..2, 32),
        ) {
            let rows = shifts.chunks(4).map(<[i64]>::to_vec).collect();
            let spec = CodeSpec::new(3, 8, mask_from_str("11110000"), ShiftBaseMatrix::from_rows(rows)).unwrap();
            let xa = encode_qc(&spec, &a).unwrap();
            let xb = encode_qc(&spec, &b).unwrap();
            let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let xab = encode_qc(&spec, &ab).unwrap();
            let sum: Vec<u8> = xa.iter().zip(&xb).map(|(x, y)| x ^ y).collect();
            prop_assert_eq!(xab, sum);
        }
    }
}
