use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal, StudentsT};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTest {
    pub wins: u64,
    pub trials: u64,
    /// `P(X ≥ wins)` for `X ~ Bin(trials, 1/2)`.
    pub exact: f64,
    /// Normal approximation with continuity correction.
    pub normal: f64,
}

fn binomial_coefficients(n: u64) -> Vec<u128> {
    let mut c = vec![1u128; n as usize + 1];
    for k in 1..=n as usize {
        c[k] = c[k - 1] * (n as u128 + 1 - k as u128) / k as u128;
    }
    c
}

/// One-sided sign test of `wins` successes in `trials` against p = 1/2.
pub fn sign_test(wins: u64, trials: u64) -> Result<SignTest> {
    if trials == 0 {
        return invalid("sign test needs at least one trial");
    }
    if wins > trials {
        return invalid(format!("{wins} wins exceed {trials} trials"));
    }
    let exact = if wins == 0 {
        1.0
    } else if trials <= 120 {
        let c = binomial_coefficients(trials);
        let tail: u128 = c[wins as usize..].iter().sum();
        tail as f64 / 2f64.powi(trials as i32)
    } else {
        Binomial::new(0.5, trials)
            .map_err(|e| crate::Error::InvalidArgument(e.to_string()))?
            .sf(wins - 1)
    };
    let n = trials as f64;
    let z = (wins as f64 - 0.5 - n / 2.0) / (n / 4.0).sqrt();
    let normal = Normal::standard().sf(z);
    Ok(SignTest {
        wins,
        trials,
        exact,
        normal,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTest {
    pub n: usize,
    pub mean_diff: f64,
    pub t: f64,
    /// One-sided p-value for the alternative that `a` has the smaller mean.
    pub p: f64,
}

/// Paired t-test on per-example losses `a` and `b`.
pub fn paired_holdout_test(a: &[f64], b: &[f64]) -> Result<PairedTest> {
    if a.len() != b.len() {
        return invalid(format!("paired samples differ in length: {} vs {}", a.len(), b.len()));
    }
    if a.len() < 2 {
        return invalid("paired test needs at least two pairs");
    }
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let (t, p) = if var <= 0.0 {
        match mean.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Less) => (f64::NEG_INFINITY, 0.0),
            Some(std::cmp::Ordering::Greater) => (f64::INFINITY, 1.0),
            _ => (0.0, 0.5),
        }
    } else {
        let t = mean / (var / n).sqrt();
        let dist = StudentsT::new(0.0, 1.0, n - 1.0).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
        (t, dist.cdf(t))
    };
    Ok(PairedTest {
        n: a.len(),
        mean_diff: mean,
        t,
        p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sign_test_examples() {
        let s = sign_test(10, 10).unwrap();
        assert_eq!(s.exact, 1.0 / 1024.0);
        // 56/1024
        assert_eq!(sign_test(8, 10).unwrap().exact, 56.0 / 1024.0);
        assert_eq!(sign_test(0, 5).unwrap().exact, 1.0);
        assert!(sign_test(3, 2).is_err());
        let z = (8.0 - 0.5 - 5.0) / 2.5f64.sqrt();
        assert!((sign_test(8, 10).unwrap().normal - Normal::standard().sf(z)).abs() < 1e-15);
    }

    #[test]
    fn large_trials_use_distribution() {
        let s = sign_test(130, 200).unwrap();
        assert!(s.exact > 0.0 && s.exact < 1e-4);
        assert!((s.exact - s.normal).abs() < 1e-4);
    }

    #[test]
    fn paired_examples() {
        let a = [0.1, 0.4, 0.2];
        assert_eq!(paired_holdout_test(&a, &a).unwrap().p, 0.5);
        let b = [1.1, 1.4, 1.2];
        assert!(paired_holdout_test(&a, &b).unwrap().p < 1e-12);
        assert!(paired_holdout_test(&b, &a).unwrap().p > 0.999);
        assert!(paired_holdout_test(&a, &b[..2]).is_err());
    }

    proptest! {
        #[test]
        fn exact_tail_monotone(n in 1u64..60, w in 0u64..60) {
            let w = w.min(n);
            let p = sign_test(w, n).unwrap().exact;
            prop_assert!(p > 0.0 && p <= 1.0);
            if w < n {
                prop_assert!(sign_test(w + 1, n).unwrap().exact <= p);
            }
        }

        #[test]
        fn paired_is_antisymmetric(v in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..30)) {
            let a: Vec<f64> = v.iter().map(|p| p.0).collect();
            let b: Vec<f64> = v.iter().map(|p| p.1).collect();
            let x = paired_holdout_test(&a, &b).unwrap();
            let y = paired_holdout_test(&b, &a).unwrap();
            prop_assert!((x.p + y.p - 1.0).abs() < 1e-9);
        }
    }
}
