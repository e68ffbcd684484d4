//! Systematic MDS erasure codec over GF(256).
//!
//! A generation of `k` equal-length source packets is encoded into a code
//! word of `N = k + r` packets. The first `k` coded packets are the source
//! packets themselves; the remaining `r` are parity packets built from a
//! Cauchy matrix. Because every square submatrix of a Cauchy matrix is
//! nonsingular, any `k` rows of the stacked generator `[I; C]` form an
//! invertible matrix, so any `k` received packets recover the generation.
//!
//! Cauchy entries are `1 / (x_i + y_j)` with `y_j = j` for source columns
//! `0..k` and `x_i = k + i` for parity rows `0..r`. All points are distinct
//! as long as `N <= 256`.

use std::collections::HashSet;

use thiserror::Error;

use crate::gf256::{mul_add_slice, Gf256};

/// Largest code word supported by the Cauchy construction over GF(256).
pub const MAX_CODE_LEN: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("code word length {n} exceeds the GF(256) limit of {MAX_CODE_LEN}")]
    Unsupported { n: usize },
    #[error("k must be at least 1")]
    ZeroSourcePackets,
    #[error("expected {expected} packets, got {got}")]
    WrongPacketCount { expected: usize, got: usize },
    #[error("packet payload lengths differ ({first} vs {other})")]
    LengthMismatch { first: usize, other: usize },
    #[error("packet index {index} out of range for N = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("packet index {0} received twice")]
    DuplicateIndex(usize),
    #[error("insufficient packets to decode: have {have}, need {need}")]
    InsufficientPackets { have: usize, need: usize },
    #[error("decoding matrix is singular")]
    Singular,
}

/// Shape of an (N, k) code: `k` source packets plus `r` redundant ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodeParams {
    k: usize,
    r: usize,
}

impl CodeParams {
    pub fn new(k: usize, r: usize) -> Result<Self, CodecError> {
        if k == 0 {
            return Err(CodecError::ZeroSourcePackets);
        }
        if k + r > MAX_CODE_LEN {
            return Err(CodecError::Unsupported { n: k + r });
        }
        Ok(Self { k, r })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Code word length `N = k + r`.
    pub fn n(&self) -> usize {
        self.k + self.r
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n() as f64
    }

    /// Minimum distance `N - k + 1`.
    pub fn d_min(&self) -> usize {
        self.n() - self.k + 1
    }

    /// Number of erasures the code always tolerates, `d_min - 1`.
    pub fn e_max(&self) -> usize {
        self.d_min() - 1
    }
}

/// One packet of a code word, tagged with its position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packet {
    pub index: usize,
    pub payload: Vec<u8>,
}

/// The `k` source packets encoded together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generation {
    pub source: Vec<Vec<u8>>,
}

impl Generation {
    pub fn new(source: Vec<Vec<u8>>) -> Self {
        Self { source }
    }

    pub fn packet_len(&self) -> usize {
        self.source.first().map_or(0, Vec::len)
    }
}

/// The `N` coded packets of one generation; indices `0..k` are systematic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeWord {
    pub coded: Vec<Packet>,
}

/// Dense row-major matrix over GF(256).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Gf256>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Gf256::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Gf256::ONE);
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
    pub fn get(&self, r: usize, c: usize) -> Gf256 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Gf256) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Gf256] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Matrix built from the listed rows of `self`.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut m = Self::zeros(rows.len(), self.cols);
        for (dst, &src) in rows.iter().enumerate() {
            m.data[dst * self.cols..(dst + 1) * self.cols].copy_from_slice(self.row(src));
        }
        m
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Gauss-Jordan inverse of a square matrix.
    pub fn invert(&self) -> Result<Self, CodecError> {
        assert_eq!(self.rows, self.cols, "only square matrices can be inverted");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.get(r, col).is_zero()).ok_or(CodecError::Singular)?;
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let scale = a.get(col, col).inv().map_err(|_| CodecError::Singular)?;
            for c in 0..n {
                a.set(col, c, a.get(col, c) * scale);
                inv.set(col, c, inv.get(col, c) * scale);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                if f.is_zero() {
                    continue;
                }
                for c in 0..n {
                    a.set(r, c, a.get(r, c) + f * a.get(col, c));
                    inv.set(r, c, inv.get(r, c) + f * inv.get(col, c));
                }
            }
        }
        Ok(inv)
    }

    /// Whether a square matrix is nonsingular.
    pub fn is_invertible(&self) -> bool {
        self.invert().is_ok()
    }
}

/// Systematic N x k generator: identity on top, Cauchy block below.
pub fn build_generator(params: CodeParams) -> Matrix {
    let k = params.k();
    let mut g = Matrix::zeros(params.n(), k);
    for i in 0..k {
        g.set(i, i, Gf256::ONE);
    }
    for i in 0..params.r() {
        let x = Gf256((k + i) as u8);
        for j in 0..k {
            let y = Gf256(j as u8);
            // x != y because parity points start at k, so the sum is nonzero.
            g.set(k + i, j, (x + y).inv().expect("distinct Cauchy points"));
        }
    }
    g
}

/// Encoder/decoder for one code shape, holding its generator matrix.
#[derive(Debug, Clone)]
pub struct Codec {
    params: CodeParams,
    generator: Matrix,
}

impl Codec {
    pub fn new(params: CodeParams) -> Self {
        Self { params, generator: build_generator(params) }
    }

    pub fn params(&self) -> CodeParams {
        self.params
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn encode(&self, gen: &Generation) -> Result<CodeWord, CodecError> {
        let k = self.params.k();
        if gen.source.len() != k {
            return Err(CodecError::WrongPacketCount { expected: k, got: gen.source.len() });
        }
        let len = gen.packet_len();
        if let Some(p) = gen.source.iter().find(|p| p.len() != len) {
            return Err(CodecError::LengthMismatch { first: len, other: p.len() });
        }
        let mut coded: Vec<Packet> = gen
            .source
            .iter()
            .enumerate()
            .map(|(index, p)| Packet { index, payload: p.clone() })
            .collect();
        for row in k..self.params.n() {
            let mut payload = vec![0u8; len];
            for (j, src) in gen.source.iter().enumerate() {
                mul_add_slice(&mut payload, src, self.generator.get(row, j));
            }
            coded.push(Packet { index: row, payload });
        }
        Ok(CodeWord { coded })
    }

    /// Recover the generation from any `k` or more distinct coded packets.
    pub fn decode(&self, received: &[Packet]) -> Result<Generation, CodecError> {
        let k = self.params.k();
        let n = self.params.n();
        let mut seen = HashSet::with_capacity(received.len());
        for p in received {
            if p.index >= n {
                return Err(CodecError::IndexOutOfRange { index: p.index, n });
            }
            if !seen.insert(p.index) {
                return Err(CodecError::DuplicateIndex(p.index));
            }
        }
        if received.len() < k {
            return Err(CodecError::InsufficientPackets { have: received.len(), need: k });
        }
        let len = received[0].payload.len();
        if let Some(p) = received.iter().find(|p| p.payload.len() != len) {
            return Err(CodecError::LengthMismatch { first: len, other: p.payload.len() });
        }

        let mut chosen: Vec<&Packet> = received.iter().collect();
        chosen.sort_by_key(|p| p.index);
        chosen.truncate(k);

        // Systematic shortcut: the k lowest indices are exactly 0..k.
        if chosen.last().map(|p| p.index) == Some(k - 1) {
            return Ok(Generation::new(chosen.iter().map(|p| p.payload.clone()).collect()));
        }

        let rows: Vec<usize> = chosen.iter().map(|p| p.index).collect();
        let inv = self.generator.select_rows(&rows).invert()?;
        let mut source = vec![vec![0u8; len]; k];
        for (i, out) in source.iter_mut().enumerate() {
            for (j, p) in chosen.iter().enumerate() {
                mul_add_slice(out, &p.payload, inv.get(i, j));
            }
        }
        Ok(Generation::new(source))
    }
}

/// Encode with a freshly built generator.
pub fn encode(gen: &Generation, params: CodeParams) -> Result<CodeWord, CodecError> {
    Codec::new(params).encode(gen)
}

/// Decode with a freshly built generator.
pub fn decode(received: &[Packet], params: CodeParams) -> Result<Generation, CodecError> {
    Codec::new(params).decode(received)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_generation(k: usize, len: usize, seed: u64) -> Generation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Generation::new((0..k).map(|_| (0..len).map(|_| rng.random()).collect()).collect())
    }

    /// All `size`-subsets of `0..n`, in lexicographic order.
    fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
        fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == size {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, size, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, n, size, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn params_derived_quantities() {
        let p = CodeParams::new(4, 2).unwrap();
        assert_eq!(p.n(), 6);
        assert_eq!(p.d_min(), 3);
        assert_eq!(p.e_max(), 2);
        assert!((p.rate() - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(CodeParams::new(0, 2), Err(CodecError::ZeroSourcePackets));
        assert_eq!(CodeParams::new(200, 57), Err(CodecError::Unsupported { n: 257 }));
        assert!(CodeParams::new(200, 56).is_ok());
    }

    #[test]
    fn zero_redundancy_generator_is_identity() {
        let g = build_generator(CodeParams::new(3, 0).unwrap());
        assert_eq!(g, Matrix::identity(3));
    }

    #[test]
    fn repetition_code_rows_nonzero() {
        let g = build_generator(CodeParams::new(1, 1).unwrap());
        assert_eq!(g.get(0, 0), Gf256::ONE);
        assert!(!g.get(1, 0).is_zero());
    }

    #[test]
    fn every_square_submatrix_invertible_k4_r2() {
        let g = build_generator(CodeParams::new(4, 2).unwrap());
        let subs = subsets(6, 4);
        assert_eq!(subs.len(), 15);
        for rows in subs {
            assert!(g.select_rows(&rows).is_invertible(), "rows {rows:?}");
        }
    }

    #[test]
    fn generator_is_mds_at_field_limit() {
        // k = 2 at N = 256: spot-check every pair involving the extremes.
        let g = build_generator(CodeParams::new(2, 254).unwrap());
        for a in [0usize, 1, 2, 128, 255] {
            for b in 0..256 {
                if a != b {
                    assert!(g.select_rows(&[a, b]).is_invertible(), "rows {a},{b}");
                }
            }
        }
    }

    #[test]
    fn zero_redundancy_encode_is_identity() {
        let gen = random_generation(5, 16, 1);
        let cw = encode(&gen, CodeParams::new(5, 0).unwrap()).unwrap();
        let payloads: Vec<_> = cw.coded.iter().map(|p| p.payload.clone()).collect();
        assert_eq!(payloads, gen.source);
    }

    #[test]
    fn repetition_code_each_packet_decodes() {
        let params = CodeParams::new(1, 2).unwrap();
        let gen = random_generation(1, 32, 2);
        let cw = encode(&gen, params).unwrap();
        assert_eq!(cw.coded.len(), 3);
        for p in &cw.coded {
            assert_eq!(decode(std::slice::from_ref(p), params).unwrap(), gen);
        }
    }

    #[test]
    fn k4_r2_every_subset_decodes() {
        let params = CodeParams::new(4, 2).unwrap();
        let codec = Codec::new(params);
        let gen = random_generation(4, 64, 3);
        let cw = codec.encode(&gen).unwrap();
        for rows in subsets(6, 4) {
            let rx: Vec<Packet> = rows.iter().map(|&i| cw.coded[i].clone()).collect();
            assert_eq!(codec.decode(&rx).unwrap(), gen, "subset {rows:?}");
        }
    }

    #[test]
    fn systematic_prefix_decodes_by_copy() {
        let params = CodeParams::new(3, 3).unwrap();
        let gen = random_generation(3, 8, 4);
        let cw = encode(&gen, params).unwrap();
        for i in 0..3 {
            assert_eq!(cw.coded[i].payload, gen.source[i]);
        }
        // Extra parity beyond the prefix is ignored.
        let mut rx = cw.coded.clone();
        rx.reverse();
        assert_eq!(decode(&rx, params).unwrap(), gen);
    }

    #[test]
    fn too_few_packets_is_an_error() {
        let params = CodeParams::new(4, 2).unwrap();
        let gen = random_generation(4, 8, 5);
        let cw = encode(&gen, params).unwrap();
        let rx: Vec<Packet> = cw.coded[2..5].to_vec();
        assert_eq!(decode(&rx, params), Err(CodecError::InsufficientPackets { have: 3, need: 4 }));
    }

    #[test]
    fn input_validation() {
        let params = CodeParams::new(2, 1).unwrap();
        let bad = Generation::new(vec![vec![1, 2, 3], vec![4, 5]]);
        assert!(matches!(encode(&bad, params), Err(CodecError::LengthMismatch { .. })));
        let short = Generation::new(vec![vec![1]]);
        assert!(matches!(encode(&short, params), Err(CodecError::WrongPacketCount { .. })));

        let p = |index: usize| Packet { index, payload: vec![0; 4] };
        assert_eq!(decode(&[p(0), p(0)], params), Err(CodecError::DuplicateIndex(0)));
        assert_eq!(decode(&[p(0), p(3)], params), Err(CodecError::IndexOutOfRange { index: 3, n: 3 }));
        let uneven = [p(0), Packet { index: 2, payload: vec![0; 3] }];
        assert!(matches!(decode(&uneven, params), Err(CodecError::LengthMismatch { .. })));
    }

    #[test]
    fn empty_payloads_round_trip() {
        let params = CodeParams::new(3, 2).unwrap();
        let gen = Generation::new(vec![Vec::new(); 3]);
        let cw = encode(&gen, params).unwrap();
        assert_eq!(decode(&cw.coded[2..], params).unwrap(), gen);
    }

    #[test]
    fn singular_matrix_detected() {
        let mut m = Matrix::identity(3);
        m.set(2, 2, Gf256::ZERO);
        assert_eq!(m.invert(), Err(CodecError::Singular));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn any_k_subset_round_trips(
                k in 1usize..=8,
                r in 0usize..=4,
                len in 0usize..24,
                seed: u64,
                pick_seed: u64,
            ) {
                let params = CodeParams::new(k, r).unwrap();
                let codec = Codec::new(params);
                let gen = random_generation(k, len, seed);
                let cw = codec.encode(&gen).unwrap();
                for i in 0..k {
                    prop_assert_eq!(&cw.coded[i].payload, &gen.source[i]);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(pick_seed);
                let mut idx: Vec<usize> = (0..params.n()).collect();
                for i in (1..idx.len()).rev() {
                    idx.swap(i, rng.random_range(0..=i));
                }
                let rx: Vec<Packet> = idx[..k].iter().map(|&i| cw.coded[i].clone()).collect();
                prop_assert_eq!(codec.decode(&rx).unwrap(), gen);
                let short: Vec<Packet> = rx[..k - 1].to_vec();
                let is_insufficient = matches!(codec.decode(&short), Err(CodecError::InsufficientPackets { .. }));
                prop_assert!(is_insufficient);
            }
        }
    }
}
