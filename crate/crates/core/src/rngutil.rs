//! Seeded randomness and prime sampling.
//!
//! Every probabilistic stage pulls from a ChaCha20 stream derived from the
//! run seed plus a label, so results are reproducible per seed while stages
//! stay independent of each other's draw counts.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Derive a deterministic child RNG from a seed and a stage label.
pub fn stream(seed: u64, label: &str) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let bytes = label.as_bytes();
    // Fold the label into the rest of the key; labels are short and
    // human-chosen, a plain xor fold keeps distinct labels distinct.
    for (i, b) in bytes.iter().enumerate() {
        key[8 + (i % 24)] ^= b.rotate_left((i / 24) as u32);
    }
    ChaCha20Rng::from_seed(key)
}

/// Deterministic Miller-Rabin for u64 (the base set covers all of u64).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Sample a random prime in roughly the 59..62 bit range. Primes this size
/// keep single-word modular arithmetic while making accidental vanishing of
/// a fixed nonzero rational astronomically unlikely.
pub fn random_prime(rng: &mut ChaCha20Rng) -> u64 {
    loop {
        let candidate: u64 = rng.gen_range((1u64 << 59)..(1u64 << 61)) | 1;
        if is_prime_u64(candidate) {
            return candidate;
        }
    }
}

/// Sample a uniform big integer in `[0, bound]`.
pub fn random_biguint_inclusive(rng: &mut ChaCha20Rng, bound: &BigUint) -> BigUint {
    if bound.is_zero() {
        return BigUint::zero();
    }
    let bits = bound.bits();
    let bytes = bits.div_ceil(8) as usize;
    loop {
        let mut buf = vec![0u8; bytes];
        rng.fill(buf.as_mut_slice());
        let mut v = BigUint::from_bytes_le(&buf);
        // Mask the excess high bits so the rejection rate stays below 1/2.
        if (bytes as u64) * 8 > bits {
            let mask = (BigUint::one() << bits) - BigUint::one();
            v &= mask;
        }
        if &v <= bound {
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    #[test]
    fn streams_are_deterministic_and_labelled() {
        let mut a = stream(42, "oracle");
        let mut b = stream(42, "oracle");
        let mut c = stream(42, "sampler");
        let xs: Vec<u64> = (0..4).map(|_| a.gen()).collect();
        let ys: Vec<u64> = (0..4).map(|_| b.gen()).collect();
        let zs: Vec<u64> = (0..4).map(|_| c.gen()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }

    #[test]
    fn miller_rabin_agrees_with_trial_division() {
        let small: Vec<u64> = (2..500).filter(|&n| (2..n).all(|d| n % d != 0)).collect();
        for n in 2..500u64 {
            assert_eq!(is_prime_u64(n), small.contains(&n), "n = {n}");
        }
        assert!(is_prime_u64((1 << 61) - 1)); // Mersenne prime
        assert!(!is_prime_u64((1 << 60) - 1));
    }

    #[test]
    fn random_primes_have_expected_size() {
        let mut rng = stream(7, "prime");
        for _ in 0..5 {
            let p = random_prime(&mut rng);
            assert!((1 << 59..1 << 61).contains(&p));
            assert!(is_prime_u64(p));
        }
    }

    #[test]
    fn biguint_sampling_respects_bound() {
        let mut rng = stream(3, "big");
        let bound = BigUint::from(1000u32);
        for _ in 0..200 {
            let v = random_biguint_inclusive(&mut rng, &bound);
            assert!(v <= bound);
        }
    }
}
