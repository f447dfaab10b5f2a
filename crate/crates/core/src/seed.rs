//! Deterministic seed derivation.
//!
//! Every independent job (sweep cell, model training, dataset split) owns an
//! RNG stream seeded by mixing the run seed with the job coordinates, so
//! results do not depend on execution order or thread count.

/// SplitMix64 finalizer; full-period bijection on u64.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and one salt word.
pub fn mix(seed: u64, salt: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Derive a child seed from a parent seed and two salt words.
pub fn mix2(seed: u64, a: u64, b: u64) -> u64 {
    mix(mix(seed, a), b)
}

/// Derive a child seed from a parent seed and three salt words.
pub fn mix3(seed: u64, a: u64, b: u64, c: u64) -> u64 {
    mix(mix2(seed, a, b), c)
}

/// Stable salt for a named stream ("bank", "init", "shuffle", ...).
pub fn salt(name: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for byte in name.as_bytes() {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixing_is_deterministic_and_spread() {
        assert_eq!(mix(42, 1), mix(42, 1));
        assert_ne!(mix(42, 1), mix(42, 2));
        assert_ne!(mix(42, 1), mix(43, 1));
        assert_ne!(mix2(7, 1, 2), mix2(7, 2, 1));
    }

    #[test]
    fn named_salts_differ() {
        assert_ne!(salt("bank"), salt("init"));
        assert_eq!(salt("shuffle"), salt("shuffle"));
    }
}
