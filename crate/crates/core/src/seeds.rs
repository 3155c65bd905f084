//! Deterministic seed derivation, so parallel runs do not depend on scheduling.

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a sequence of integers into one seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5EED_0F_5CA7u64, |h, &p| splitmix(h ^ splitmix(p)))
}
