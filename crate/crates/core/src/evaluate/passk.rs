#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum PassAtKError {
    #[error("k = {k} must satisfy 1 <= k <= n = {n}")]
    K { n: u64, k: u64 },
    #[error("c = {c} exceeds n = {n}")]
    C { n: u64, c: u64 },
}

/// Unbiased pass@k: `1 - C(n-c, k) / C(n, k)`, the probability that a random
/// k-subset of n samples with c correct holds at least one correct sample.
///
/// Evaluated as `1 - prod_{i=n-c+1}^{n} (1 - k/i)`, which never forms a
/// binomial coefficient.
pub fn pass_at_k(n: u64, c: u64, k: u64) -> Result<f64, PassAtKError> {
    if k == 0 || k > n {
        return Err(PassAtKError::K { n, k });
    }
    if c > n {
        return Err(PassAtKError::C { n, c });
    }
    if n - c < k {
        return Ok(1.0);
    }
    let miss: f64 = (n - c + 1..=n).map(|i| 1.0 - k as f64 / i as f64).product();
    Ok(1.0 - miss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Fraction of k-subsets of {0..n} containing one of the first c items.
    fn enumerate(n: u32, c: u32, k: u32) -> f64 {
        let (mut hit, mut total) = (0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() != k {
                continue;
            }
            total += 1;
            if mask & ((1 << c) - 1) != 0 {
                hit += 1;
            }
        }
        hit as f64 / total as f64
    }

    #[test]
    fn known_points() {
        assert_eq!(pass_at_k(1, 1, 1).unwrap(), 1.0);
        assert_eq!(pass_at_k(5, 0, 3).unwrap(), 0.0);
        assert!((pass_at_k(5, 2, 3).unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn matches_enumeration() {
        for n in 1..=8u32 {
            for c in 0..=n {
                for k in 1..=n {
                    let got = pass_at_k(n as u64, c as u64, k as u64).unwrap();
                    assert!(
                        (got - enumerate(n, c, k)).abs() <= 1e-12,
                        "n={n} c={c} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(pass_at_k(3, 1, 4).is_err());
        assert!(pass_at_k(3, 1, 0).is_err());
        assert!(pass_at_k(3, 4, 1).is_err());
    }

    #[test]
    fn large_n_is_finite() {
        let v = pass_at_k(10_000, 3, 100).unwrap();
        assert!(v > 0.0 && v < 1.0);
    }

    proptest! {
        #[test]
        fn monotone_in_k_and_c(n in 1u64..200, c in 0u64..200, k in 1u64..200) {
            let c = c.min(n);
            let k = k.min(n);
            let v = pass_at_k(n, c, k).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            if k < n {
                prop_assert!(pass_at_k(n, c, k + 1).unwrap() >= v - 1e-12);
            }
            if c < n {
                prop_assert!(pass_at_k(n, c + 1, k).unwrap() >= v - 1e-12);
            }
            prop_assert_eq!(pass_at_k(n, c, n).unwrap(), if c >= 1 { 1.0 } else { 0.0 });
        }
    }
}
