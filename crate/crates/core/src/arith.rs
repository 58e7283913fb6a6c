//! Exact integer kernel: fourth-power-free splitting of norms and
//! sum-of-two-squares decompositions.

use crate::error::{Error, Result};
use crate::lattice::WaveVector;

/// `s = gamma⁴ · q` with `q` fourth-power free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormSplit {
    pub gamma: u64,
    pub q: u64,
}

/// `a² + b²` with `0 ≤ a ≤ b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnsignedDecomposition {
    pub a: u64,
    pub b: u64,
}

/// Splits `s` into its weight and class index.
///
/// Removes every fourth power by trial division. Dividing by composite
/// candidates is harmless: once their prime factors are exhausted they no
/// longer divide.
pub fn split_fourth_power(s: u64) -> Result<NormSplit> {
    if s == 0 {
        return Err(Error::ZeroNorm);
    }
    let mut q = s;
    let mut gamma = 1u64;
    let mut p = 2u64;
    while let Some(p4) = p.checked_pow(4) {
        if p4 > q {
            break;
        }
        while q.is_multiple_of(p4) {
            q /= p4;
            gamma *= p;
        }
        p += 1;
    }
    Ok(NormSplit { gamma, q })
}

/// True iff every prime `≡ 3 (mod 4)` divides `n` to an even power.
pub fn is_two_square_representable(n: u64) -> bool {
    if n == 0 {
        return true;
    }
    let mut rest = n;
    while rest.is_multiple_of(2) {
        rest /= 2;
    }
    let mut p = 3u64;
    while p * p <= rest {
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            if p % 4 == 3 && e % 2 == 1 {
                return false;
            }
        }
        p += 2;
    }
    // whatever is left is 1 or a prime to the first power
    rest % 4 != 3
}

/// All `(a, b)` with `0 ≤ a ≤ b` and `a² + b² = n`, ascending in `a`.
pub fn unsigned_decompositions(n: u64) -> Vec<UnsignedDecomposition> {
    let mut out = Vec::new();
    let mut a = 0u64;
    while 2 * a * a <= n {
        let rest = n - a * a;
        let b = rest.isqrt();
        if b * b == rest {
            out.push(UnsignedDecomposition { a, b });
        }
        a += 1;
    }
    out
}

/// Every signed `(m, n)` with `m² + n² = n`, each exactly once.
pub fn signed_representations(n: u64) -> Vec<WaveVector> {
    let mut out = Vec::new();
    for UnsignedDecomposition { a, b } in unsigned_decompositions(n) {
        let (a, b) = (a as i32, b as i32);
        out.extend(sign_variants(WaveVector::new(a, b)));
        if a != b {
            out.extend(sign_variants(WaveVector::new(b, a)));
        }
    }
    out
}

/// Distinct sign variants `(±m, ±n)` of a vector.
pub fn sign_variants(k: WaveVector) -> impl Iterator<Item = WaveVector> {
    let ms: &[i32] = if k.m == 0 { &[1] } else { &[1, -1] };
    let ns: &[i32] = if k.n == 0 { &[1] } else { &[1, -1] };
    ms.iter().flat_map(move |&sm| {
        ns.iter()
            .map(move |&sn| WaveVector::new(sm * k.m, sn * k.n))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn brute_signed(n: u64) -> BTreeSet<WaveVector> {
        let r = (n as f64).sqrt() as i32 + 1;
        let mut out = BTreeSet::new();
        for m in -r..=r {
            for k in -r..=r {
                if (m as i64 * m as i64 + k as i64 * k as i64) as u64 == n {
                    out.insert(WaveVector::new(m, k));
                }
            }
        }
        out
    }

    #[test]
    fn split_examples() {
        let split = |s| split_fourth_power(s).unwrap();
        assert_eq!(split(1), NormSplit { gamma: 1, q: 1 });
        assert_eq!(split(16), NormSplit { gamma: 2, q: 1 });
        assert_eq!(split(50), NormSplit { gamma: 1, q: 50 });
        assert_eq!(split(28561), NormSplit { gamma: 13, q: 1 });
        assert_eq!(split(119 * 119 + 120 * 120), NormSplit { gamma: 13, q: 1 });
        assert_eq!(split(16 * 81 * 7), NormSplit { gamma: 6, q: 7 });
        assert_eq!(split(2u64.pow(9)), NormSplit { gamma: 4, q: 2 });
        assert!(matches!(split_fourth_power(0), Err(Error::ZeroNorm)));
    }

    #[test]
    fn split_is_exact_and_fourth_power_free_up_to_a_million() {
        let primes: Vec<u64> = (2..=32u64)
            .filter(|p| (2..*p).all(|d| p % d != 0))
            .collect();
        for s in 1..=1_000_000u64 {
            let NormSplit { gamma, q } = split_fourth_power(s).unwrap();
            assert_eq!(gamma.pow(4) * q, s);
            for &p in primes.iter().take_while(|&&p| p.pow(4) <= s) {
                assert_ne!(q % p.pow(4), 0, "s={s}");
            }
        }
    }

    #[test]
    fn representability_examples() {
        assert!(is_two_square_representable(50));
        assert!(!is_two_square_representable(3));
        assert!(!is_two_square_representable(12));
        assert!(is_two_square_representable(0));
        assert!(is_two_square_representable(1));
        assert!(is_two_square_representable(2));
        assert!(is_two_square_representable(9));
        assert!(!is_two_square_representable(21));
        assert!(is_two_square_representable(45));
    }

    #[test]
    fn decomposition_examples() {
        let d = |a, b| UnsignedDecomposition { a, b };
        assert_eq!(unsigned_decompositions(50), vec![d(1, 7), d(5, 5)]);
        assert_eq!(unsigned_decompositions(1), vec![d(0, 1)]);
        assert_eq!(unsigned_decompositions(25), vec![d(0, 5), d(3, 4)]);
        assert!(unsigned_decompositions(12).is_empty());
    }

    #[test]
    fn signed_examples() {
        let set = |n| {
            signed_representations(n)
                .into_iter()
                .collect::<BTreeSet<_>>()
        };
        let unit: BTreeSet<_> = [(1, 0), (-1, 0), (0, 1), (0, -1)]
            .into_iter()
            .map(WaveVector::from)
            .collect();
        assert_eq!(set(1), unit);
        assert_eq!(signed_representations(50).len(), 12);
        assert_eq!(set(50), brute_signed(50));
        assert!(signed_representations(3).is_empty());
    }

    #[test]
    fn representability_matches_decompositions() {
        for n in 1..5000u64 {
            assert_eq!(
                is_two_square_representable(n),
                !unsigned_decompositions(n).is_empty(),
                "n={n}"
            );
        }
    }

    proptest! {
        #[test]
        fn signed_matches_full_scan(n in 1u64..20_000) {
            let reps = signed_representations(n);
            let set: BTreeSet<_> = reps.iter().copied().collect();
            prop_assert_eq!(set.len(), reps.len());
            prop_assert_eq!(set, brute_signed(n));
        }

        #[test]
        fn signed_count_from_decompositions(n in 1u64..200_000) {
            // each unsigned (a, b) contributes 4 per distinct ordering, fewer
            // when a coordinate is zero or a == b
            let expected: usize = unsigned_decompositions(n)
                .iter()
                .map(|d| match (d.a == 0, d.a == d.b) {
                    (true, _) => 4,
                    (false, true) => 4,
                    (false, false) => 8,
                })
                .sum();
            prop_assert_eq!(signed_representations(n).len(), expected);
        }
    }
}
