use proptest::prelude::*;
use qc_polar::code_model::{mask_from_str, unit_wires, CodeSpec, ShiftBaseMatrix, UnitAddress};
use qc_polar::encoder::{
    bit_reversal, encode_qc, encode_standard, gather, kernel_transform, lifted_generator, scatter,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Dense = Vec<Vec<u8>>;

/// Right-cyclic shift of the `q × q` identity by `s`.
fn circulant(q: usize, s: usize) -> Dense {
    let mut m = vec![vec![0u8; q]; q];
    for (r, row) in m.iter_mut().enumerate() {
        row[(r + s) % q] = 1;
    }
    m
}

fn identity(n: usize) -> Dense {
    circulant(n, 0)
}

fn mul(a: &Dense, b: &Dense) -> Dense {
    let n = b[0].len();
    a.iter()
        .map(|row| {
            let mut out = vec![0u8; n];
            for (k, &x) in row.iter().enumerate() {
                if x == 1 {
                    for (o, &y) in out.iter_mut().zip(&b[k]) {
                        *o ^= y;
                    }
                }
            }
            out
        })
        .collect()
}

fn apply(m: &Dense, v: &[u8]) -> Vec<u8> {
    m.iter().map(|row| row.iter().zip(v).fold(0, |acc, (a, b)| acc ^ (a & b))).collect()
}

fn rev_bits(i: usize, n: usize) -> usize {
    let s = format!("{i:0width$b}", width = n);
    usize::from_str_radix(&s.chars().rev().collect::<String>(), 2).unwrap_or(0)
}

/// Lifted generator assembled block by block from circulants: per-lane
/// bit reversal, then one factor per stage with `I(s)` placed at block
/// `(upper, lower)` of each active unit.
fn oracle_generator(spec: &CodeSpec) -> Dense {
    let (n, q) = (spec.n, spec.lift_q);
    let size = (1 << n) * q;
    let mut g = vec![vec![0u8; size]; size];
    for p in 0..1usize << n {
        for l in 0..q {
            g[rev_bits(p, n) * q + l][p * q + l] = 1;
        }
    }
    for stage in 1..=n {
        let mut f = identity(size);
        for unit in 1..=1usize << (n - 1) {
            let s = spec.shifts.get(stage - 1, unit - 1);
            if s < 0 {
                continue;
            }
            let (a, b) = unit_wires(n, UnitAddress::new(stage, unit)).unwrap();
            let block = circulant(q, s as usize);
            for r in 0..q {
                for c in 0..q {
                    f[(a - 1) * q + r][(b - 1) * q + c] ^= block[r][c];
                }
            }
        }
        g = mul(&f, &g);
    }
    g
}

fn bits(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.gen_range(0..2)).collect()
}

#[test]
fn kernel_examples() {
    assert_eq!(kernel_transform(&[1, 0]).unwrap(), vec![1, 0]);
    assert_eq!(kernel_transform(&[0, 1]).unwrap(), vec![1, 1]);
    let mut e8 = vec![0u8; 8];
    e8[7] = 1;
    assert_eq!(kernel_transform(&e8).unwrap(), vec![1; 8]);
    assert_eq!(kernel_transform(&[0u8; 64]).unwrap(), vec![0u8; 64]);
    assert!(kernel_transform(&[0u8; 6]).is_err());
    assert_eq!(bit_reversal(&[10, 11, 12, 13]).unwrap(), vec![10, 12, 11, 13]);
    assert!(bit_reversal(&[0u8; 3]).is_err());
}

#[test]
fn standard_examples() {
    let spec = CodeSpec::standard(2, mask_from_str("1100")).unwrap();
    assert_eq!(encode_standard(&spec, &[0, 0]).unwrap(), vec![0, 0, 0, 0]);
    let g = oracle_generator(&spec);
    let u = scatter(&spec, &[1, 1]).unwrap();
    assert_eq!(encode_standard(&spec, &[1, 1]).unwrap(), apply(&g, &u));
    assert!(encode_standard(&spec, &[1, 1, 0]).is_err());
}

#[test]
fn exhaustive_two_stage_lifts() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for q in 1..=4usize {
        for trial in 0..12 {
            let rows: Vec<Vec<i64>> = (0..2)
                .map(|_| (0..2).map(|_| rng.gen_range(-1..q as i64)).collect())
                .collect();
            let mask = if trial % 2 == 0 { "1100" } else { "0000" };
            let spec = CodeSpec::new(2, q, mask_from_str(mask), ShiftBaseMatrix::from_rows(rows)).unwrap();
            let g = oracle_generator(&spec);
            let lib = lifted_generator(&spec).unwrap();
            for r in 0..spec.block_len() {
                for c in 0..spec.block_len() {
                    assert_eq!(lib.get(r, c), g[r][c] == 1);
                }
            }
            for word in 0..1u64 << spec.k() {
                let data: Vec<u8> = (0..spec.k()).map(|i| ((word >> i) & 1) as u8).collect();
                let u = scatter(&spec, &data).unwrap();
                assert_eq!(encode_qc(&spec, &data).unwrap(), apply(&g, &u));
                assert_eq!(gather(&spec, &u), data);
            }
        }
    }
}

#[test]
fn random_three_stage_lift() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rows: Vec<Vec<i64>> = (0..3).map(|_| (0..4).map(|_| rng.gen_range(-1..8)).collect()).collect();
    let spec = CodeSpec::new(3, 8, mask_from_str("11101000"), ShiftBaseMatrix::from_rows(rows)).unwrap();
    let g = oracle_generator(&spec);
    for _ in 0..1000 {
        let data = bits(&mut rng, spec.k());
        assert_eq!(encode_qc(&spec, &data).unwrap(), apply(&g, &scatter(&spec, &data).unwrap()));
    }
}

#[test]
fn single_probe() {
    let spec = CodeSpec::new(
        2,
        2,
        mask_from_str("0000"),
        ShiftBaseMatrix::from_rows(vec![vec![0, 0], vec![0, 1]]),
    )
    .unwrap();
    let mut data = vec![0u8; 8];
    data[3 * 2] = 1; // p = 4, lane 0
    let expect = apply(&oracle_generator(&spec), &data);
    assert_eq!(encode_qc(&spec, &data).unwrap(), expect);
}

#[test]
fn zero_shifts_are_independent_lanes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mask = mask_from_str("1111111010000000");
    let single = CodeSpec::standard(4, mask.clone()).unwrap();
    for q in [1usize, 2, 5, 16] {
        let spec = CodeSpec::new(4, q, mask.clone(), ShiftBaseMatrix::zeros(4)).unwrap();
        for _ in 0..50 {
            let data = bits(&mut rng, spec.k());
            let x = encode_qc(&spec, &data).unwrap();
            for l in 0..q {
                let lane_data: Vec<u8> = data.iter().skip(l).step_by(q).copied().collect();
                let lane_x: Vec<u8> = x.iter().skip(l).step_by(q).copied().collect();
                assert_eq!(lane_x, encode_standard(&single, &lane_data).unwrap());
            }
        }
        // single-bit probes stay in their lane
        for i in 0..spec.k() {
            let mut data = vec![0u8; spec.k()];
            data[i] = 1;
            let x = encode_qc(&spec, &data).unwrap();
            assert!(x.iter().enumerate().all(|(j, &b)| b == 0 || j % q == i % q));
        }
    }
}

#[test]
fn fully_pruned_code_is_uncoded() {
    let spec = CodeSpec::new(3, 4, vec![false; 8], ShiftBaseMatrix::filled(3, -1)).unwrap();
    assert_eq!(spec.xor_count(), 0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let data = bits(&mut rng, 32);
    let x = encode_qc(&spec, &data).unwrap();
    // only the per-lane bit reversal remains
    for p in 0..8 {
        for l in 0..4 {
            assert_eq!(x[rev_bits(p, 3) * 4 + l], data[p * 4 + l]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn xor_count_drops_by_q_per_pruned_unit(n in 1usize..=5, q in 1usize..=8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<i64>> = (0..n).map(|_| (0..1usize << (n - 1)).map(|_| rng.gen_range(-1..q as i64)).collect()).collect();
        let spec = CodeSpec::new(n, q, vec![false; 1 << n], ShiftBaseMatrix::from_rows(rows)).unwrap();
        prop_assert_eq!(spec.xor_count(), spec.shifts.active_units() * q);
        prop_assert!(spec.xor_count() <= n * (1 << (n - 1)) * q);
    }
}
