//! State-space enumeration: full profiles, load vectors, and size caps.

use crate::error::{Error, Result};
use crate::game::{LoadVector, QualityVector};

pub const DEFAULT_MAX_PROFILES: u64 = 1_000_000;
pub const DEFAULT_MAX_NODES: u64 = 100_000;

/// Caps on exhaustive work. Operations refuse rather than run past them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of full profiles (`Q^n`) an exhaustive scan may visit.
    pub max_profiles: u64,
    /// Maximum number of nodes an improvement graph may hold.
    pub max_nodes: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_profiles: DEFAULT_MAX_PROFILES,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

impl Limits {
    /// Both caps set to `cap`.
    pub fn uniform(cap: u64) -> Self {
        Limits {
            max_profiles: cap,
            max_nodes: cap,
        }
    }

    pub(crate) fn check_profiles(&self, n: usize, q: usize) -> Result<u64> {
        let size = profile_count(n, q);
        if size > u128::from(self.max_profiles) {
            return Err(Error::CapExceeded {
                what: "profile space",
                size: size.to_string(),
                cap: self.max_profiles,
            });
        }
        Ok(size as u64)
    }

    pub(crate) fn check_nodes(&self, what: &'static str, size: u128) -> Result<()> {
        if size > u128::from(self.max_nodes) {
            return Err(Error::CapExceeded {
                what,
                size: size.to_string(),
                cap: self.max_nodes,
            });
        }
        Ok(())
    }
}

/// `Q^n`, saturating at `u128::MAX`.
pub fn profile_count(n: usize, q: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..n {
        acc = acc.saturating_mul(q as u128);
    }
    acc
}

/// Binomial coefficient, saturating.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication.
        acc = match acc.checked_mul(u128::from(n - i)) {
            Some(v) => v / u128::from(i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of load vectors of `n` players over `q` qualities: `C(n+q-1, q-1)`.
pub fn load_vector_count(n: usize, q: usize) -> u128 {
    binomial((n + q - 1) as u64, (q - 1) as u64)
}

/// Decodes a profile index in `0..Q^n`. Player 0 is the most significant
/// digit, so indices follow lexicographic order of profiles.
pub fn profile_at(index: u64, n: usize, q: usize) -> QualityVector {
    let mut choices = vec![0usize; n];
    let mut rest = index;
    for slot in choices.iter_mut().rev() {
        *slot = (rest % q as u64) as usize;
        rest /= q as u64;
    }
    QualityVector::from_zero_based_unchecked(choices)
}

/// Inverse of [`profile_at`].
pub fn profile_index(profile: &QualityVector, q: usize) -> u64 {
    profile
        .as_slice()
        .iter()
        .fold(0u64, |acc, &c| acc * q as u64 + c as u64)
}

/// All profiles in lexicographic order.
pub fn profiles(n: usize, q: usize) -> impl Iterator<Item = QualityVector> {
    let total = profile_count(n, q) as u64;
    (0..total).map(move |idx| profile_at(idx, n, q))
}

/// All load vectors of `n` players over `q` qualities in colexicographic
/// order: compared on the last entry first. The first vector puts everyone
/// on quality 0.
pub fn load_vectors(n: usize, q: usize) -> Vec<LoadVector> {
    let mut out = Vec::new();
    let mut current = vec![0usize; q];
    fill_colex(n, q, &mut current, &mut out);
    out.into_iter()
        .map(LoadVector::from_counts_unchecked)
        .collect()
}

fn fill_colex(remaining: usize, len: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if len == 1 {
        current[0] = remaining;
        out.push(current.clone());
        return;
    }
    for last in 0..=remaining {
        current[len - 1] = last;
        fill_colex(remaining - last, len - 1, current, out);
    }
    current[len - 1] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(6, 1), 6);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(load_vector_count(4, 3), 15);
    }

    #[test]
    fn profile_roundtrip() {
        for idx in 0..27 {
            let p = profile_at(idx, 3, 3);
            assert_eq!(profile_index(&p, 3), idx);
        }
        assert_eq!(profile_at(5, 2, 3).as_slice(), &[1, 2]);
    }

    #[test]
    fn colex_order_small() {
        let got: Vec<Vec<usize>> = load_vectors(2, 3)
            .into_iter()
            .map(|l| l.as_slice().to_vec())
            .collect();
        assert_eq!(
            got,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![0, 2, 0],
                vec![1, 0, 1],
                vec![0, 1, 1],
                vec![0, 0, 2],
            ]
        );
    }

    #[test]
    fn colex_is_sorted_and_complete() {
        for n in 1..=6 {
            for q in 1..=4 {
                let all = load_vectors(n, q);
                assert_eq!(all.len() as u128, load_vector_count(n, q));
                for pair in all.windows(2) {
                    let a: Vec<_> = pair[0].as_slice().iter().rev().collect();
                    let b: Vec<_> = pair[1].as_slice().iter().rev().collect();
                    assert!(a < b);
                }
                assert!(all.iter().all(|l| l.as_slice().iter().sum::<usize>() == n));
            }
        }
    }

    #[test]
    fn caps_refuse() {
        let limits = Limits::uniform(8);
        assert!(limits.check_profiles(3, 2).is_ok());
        assert!(matches!(
            limits.check_profiles(2, 3),
            Err(Error::CapExceeded { .. })
        ));
    }
}
