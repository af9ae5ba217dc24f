//! Counter-based hashing used for every lazily generated coordinate and for
//! seed derivation.
//!
//! All constants are fixed so that results are identical across platforms and
//! thread counts:
//!
//! * `mix64` is the SplitMix64 finalizer (multipliers `0xBF58476D1CE4E5B9`,
//!   `0x94D049BB133111EB`, shifts 30/27/31).
//! * `hash2(a, b)` nests the finalizer: `mix64(mix64(a ^ G) ^ (b * G))` with
//!   `G = 0x9E3779B97F4A7C15` (the 64-bit golden-ratio increment).
//! * Operation paths are folded in with 64-bit FNV-1a (offset
//!   `0xCBF29CE484222325`, prime `0x100000001B3`).

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const FNV_OFFSET: u64 = 0xCBF2_9CE4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01B3;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn hash2(a: u64, b: u64) -> u64 {
    mix64(mix64(a ^ GOLDEN_GAMMA) ^ b.wrapping_mul(GOLDEN_GAMMA))
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// Seed for a named sub-operation, e.g. `derive_seed(master, "scan/cell")`.
pub fn derive_seed(seed: u64, path: &str) -> u64 {
    hash2(seed, fnv1a(path.as_bytes()))
}

/// Seed for the `index`-th sample point of an operation.
#[inline]
pub fn sample_seed(seed: u64, index: u64) -> u64 {
    hash2(seed, index)
}

/// Uniform in the open interval (0, 1): 52 high bits, centered in their cell.
#[inline]
pub fn unit_open(h: u64) -> f64 {
    ((h >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Uniform integer in `0..n` by multiply-high.
#[inline]
pub fn below(h: u64, n: u64) -> u64 {
    ((u128::from(h) * u128::from(n)) >> 64) as u64
}
