//! Pairwise-independent hashing.
//!
//! Vertex keys are split into 32-bit limbs and hashed with the vector
//! family `h(x) = (b + sum a_i * x_i) mod p` over the Mersenne prime
//! `p = 2^61 - 1`, which is pairwise independent over the full `u64` key
//! space because every limb is smaller than `p`. Edge keys, which only need
//! a few dozen outputs, use the cheaper vector multiply-shift family.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::VertexId;

pub const MERSENNE_61: u64 = (1 << 61) - 1;

#[inline]
fn reduce(x: u128) -> u64 {
    let p = MERSENNE_61 as u128;
    let folded = (x & p) + (x >> 61);
    let folded = (folded & p) + (folded >> 61);
    let r = folded as u64;
    if r >= MERSENNE_61 {
        r - MERSENNE_61
    } else {
        r
    }
}

/// Maps a hash value in `[0, 2^61)` onto `[0, n)` by multiply-shift, which
/// is as even as `% n` and avoids a division.
#[inline]
fn to_range(h: u64, n: u64) -> usize {
    ((h as u128 * n as u128) >> 61) as usize
}

#[inline]
fn limbs(x: u64) -> [u64; 2] {
    [x & 0xffff_ffff, x >> 32]
}

/// A member of the vector family with `N` limbs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LimbHash<const N: usize> {
    coeffs: [u64; N],
    offset: u64,
}

impl<const N: usize> LimbHash<N> {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut coeffs = [0u64; N];
        for c in coeffs.iter_mut() {
            *c = rng.random_range(1..MERSENNE_61);
        }
        let offset = rng.random_range(0..MERSENNE_61);
        Self { coeffs, offset }
    }

    /// Hash value in `[0, 2^61 - 1)`.
    #[inline]
    pub fn apply(&self, limbs: &[u64; N]) -> u64 {
        let mut acc = self.offset as u128;
        for (a, x) in self.coeffs.iter().zip(limbs) {
            acc += *a as u128 * *x as u128;
        }
        reduce(acc)
    }
}

/// `H_v`: maps vertex identifiers to a row/column index in `[0, d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexHash {
    inner: LimbHash<2>,
    buckets: u64,
}

impl VertexHash {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, buckets: usize) -> Self {
        assert!(buckets > 0, "vertex hash needs at least one bucket");
        Self {
            inner: LimbHash::random(rng),
            buckets: buckets as u64,
        }
    }

    #[inline]
    pub fn bucket(&self, v: VertexId) -> usize {
        to_range(self.inner.apply(&limbs(v)), self.buckets)
    }

    pub fn buckets(&self) -> usize {
        self.buckets as usize
    }
}

/// `H_R`: maps a labeled edge to one of `range` stored rank vectors.
///
/// Uses vector multiply-shift over the five 32-bit limbs of
/// `(src, dst, label)`: `((b + sum a_i * x_i) mod 2^64) >> 32` with random
/// 64-bit `a_i, b` is strongly universal onto 32 bits, and only needs
/// wrapping 64-bit arithmetic. The 32-bit value is then scaled onto
/// `[0, range)`, which is off from uniform by at most `range / 2^32`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeHash {
    coeffs: [u64; 5],
    offset: u64,
    range: u64,
}

impl EdgeHash {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, range: usize) -> Self {
        assert!(range > 0 && range as u64 <= u32::MAX as u64, "edge hash range out of bounds");
        Self {
            coeffs: std::array::from_fn(|_| rng.random()),
            offset: rng.random(),
            range: range as u64,
        }
    }

    #[inline]
    pub fn index(&self, src: VertexId, dst: VertexId, label: usize) -> usize {
        let [s0, s1] = limbs(src);
        let [d0, d1] = limbs(dst);
        let key = [s0, s1, d0, d1, label as u64 & 0xffff_ffff];
        let mut acc = self.offset;
        for (a, x) in self.coeffs.iter().zip(key) {
            acc = acc.wrapping_add(a.wrapping_mul(x));
        }
        (((acc >> 32) * self.range) >> 32) as usize
    }
}

/// Independent random streams derived from one user seed.
///
/// Each purpose (layer hash, rank table, ...) gets its own ChaCha stream so
/// that, for example, adding a layer never perturbs the existing ones.
pub(crate) fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) const STREAM_RANKS: u64 = 0;
pub(crate) const STREAM_EDGE_HASH: u64 = 1;
const STREAM_LAYER_BASE: u64 = 1 << 32;

/// The vertex hash of layer `layer`, shared by the ranked sketch and the
/// baseline so equal seeds give equal collision patterns.
pub fn layer_vertex_hash(seed: u64, layer: usize, buckets: usize) -> VertexHash {
    let mut rng = seeded_stream(seed, STREAM_LAYER_BASE + layer as u64);
    VertexHash::random(&mut rng, buckets)
}
