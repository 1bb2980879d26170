//! Probability generating functions for the supported frog-count
//! distributions.
//!
//! Every distribution is declared structurally — there are no opaque
//! user-supplied PGFs — so normalization, finite mean, and the minimal
//! support point stay checkable. The transience series need `log f(1 - ε)`
//! for `ε` as small as the hitting probabilities get, which underflows to
//! zero long before `f(1 - ε)` itself stops rounding to `1`. Each kind
//! therefore gets a dedicated log-space evaluation built on `log1p`/`expm1`
//! that keeps relative error near machine precision for every `ε ∈ [0, 1]`.

use rand::Rng;
use rand_distr::Distribution as _;

use crate::{Error, Result};

/// Finite-table probabilities must sum to one within this tolerance.
pub const TABLE_SUM_TOL: f64 = 1e-12;

/// A nonnegative-integer count distribution with exact PGF access.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    /// Point mass at `k ≥ 1`.
    Deterministic { k: u64 },
    /// Poisson with mean `lambda > 0`; `f(s) = exp(λ(s - 1))`.
    Poisson { lambda: f64 },
    /// Geometric on `{0, 1, 2, …}` with `P(X = k) = q (1 - q)^k`.
    Geometric { q: f64 },
    /// Finite table of `(value, probability)` pairs; values strictly
    /// increasing, probabilities summing to one.
    Table { values: Vec<u64>, probs: Vec<f64> },
}

/// Outcome of a `E[log⁺ X]` evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum LogPlusMoment {
    /// The moment is finite and equals `value`.
    Finite(f64),
    /// The moment is infinite.
    Diverges,
    /// The series did not settle within `cutoff` terms; `value` is the
    /// partial sum.
    Truncated { value: f64, cutoff: u64 },
}

impl DistributionSpec {
    pub fn deterministic(k: u64) -> Result<Self> {
        let d = DistributionSpec::Deterministic { k };
        d.validate()?;
        Ok(d)
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        let d = DistributionSpec::Poisson { lambda };
        d.validate()?;
        Ok(d)
    }

    pub fn geometric(q: f64) -> Result<Self> {
        let d = DistributionSpec::Geometric { q };
        d.validate()?;
        Ok(d)
    }

    pub fn table(values: Vec<u64>, probs: Vec<f64>) -> Result<Self> {
        let d = DistributionSpec::Table { values, probs };
        d.validate()?;
        Ok(d)
    }

    /// Checks the structural invariants of the declaration.
    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::Deterministic { k } => {
                if *k < 1 {
                    return Err(Error::InvalidDistribution(
                        "deterministic count must be at least 1".into(),
                    ));
                }
            }
            DistributionSpec::Poisson { lambda } => {
                if !(lambda.is_finite() && *lambda > 0.0) {
                    return Err(Error::InvalidDistribution(format!(
                        "poisson mean must be positive and finite, got {lambda}"
                    )));
                }
            }
            DistributionSpec::Geometric { q } => {
                if !(q.is_finite() && *q > 0.0 && *q < 1.0) {
                    return Err(Error::InvalidDistribution(format!(
                        "geometric success probability must lie in (0, 1), got {q}"
                    )));
                }
            }
            DistributionSpec::Table { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(Error::InvalidDistribution(
                        "table needs matching, nonempty values and probs".into(),
                    ));
                }
                if !values.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::InvalidDistribution(
                        "table values must be strictly increasing".into(),
                    ));
                }
                if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
                    return Err(Error::InvalidDistribution(
                        "table probabilities must be nonnegative".into(),
                    ));
                }
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > TABLE_SUM_TOL {
                    return Err(Error::InvalidDistribution(format!(
                        "table probabilities sum to {sum}, not 1"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Evaluates `f(s) = E[s^X]` for `s ∈ [0, 1]`. `f(1)` is exactly `1`.
    pub fn pgf_eval(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::PgfDomain { arg: s });
        }
        if s == 1.0 {
            return Ok(1.0);
        }
        Ok(match self {
            DistributionSpec::Deterministic { k } => pow_u64(s, *k),
            DistributionSpec::Poisson { lambda } => (lambda * (s - 1.0)).exp(),
            // Denominator written as q + (1-q)(1-s): no cancellation near s = 1.
            DistributionSpec::Geometric { q } => q / (q + (1.0 - q) * (1.0 - s)),
            DistributionSpec::Table { values, probs } => values
                .iter()
                .zip(probs)
                .map(|(&v, &p)| p * pow_u64(s, v))
                .sum(),
        })
    }

    /// Evaluates `log f(1 - eps)` for `eps ∈ [0, 1]`.
    ///
    /// The result is nonpositive, is `0` exactly when `eps = 0`, and keeps
    /// relative accuracy near machine precision even when `eps` underflows
    /// the ordinary `f(1 - eps)` path (e.g. `eps < 1e-14`).
    pub fn log_pgf_one_minus(&self, eps: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::PgfDomain { arg: 1.0 - eps });
        }
        Ok(self.log_pgf_one_minus_raw(eps))
    }

    /// Domain-unchecked form of [`Self::log_pgf_one_minus`] for hot loops
    /// whose arguments are powers of a ratio in `(0, 1)`.
    pub(crate) fn log_pgf_one_minus_raw(&self, eps: f64) -> f64 {
        match self {
            DistributionSpec::Deterministic { k } => *k as f64 * (-eps).ln_1p(),
            DistributionSpec::Poisson { lambda } => -lambda * eps,
            DistributionSpec::Geometric { q } => -((1.0 - q) / q * eps).ln_1p(),
            DistributionSpec::Table { values, probs } => {
                // f(1-eps) - 1 as a sum of same-sign expm1 terms, then log1p:
                // accurate for the whole eps range, including eps = 1 where
                // the result is log P(X = 0) (possibly -inf).
                let ls = (-eps).ln_1p();
                let y: f64 = values
                    .iter()
                    .zip(probs)
                    .map(|(&v, &p)| if v == 0 { 0.0 } else { p * (v as f64 * ls).exp_m1() })
                    .sum();
                y.ln_1p()
            }
        }
    }

    /// Mean `q = f'(1)`; finite for every supported kind.
    pub fn mean(&self) -> f64 {
        match self {
            DistributionSpec::Deterministic { k } => *k as f64,
            DistributionSpec::Poisson { lambda } => *lambda,
            DistributionSpec::Geometric { q } => (1.0 - q) / q,
            DistributionSpec::Table { values, probs } => values
                .iter()
                .zip(probs)
                .map(|(&v, &p)| p * v as f64)
                .sum(),
        }
    }

    /// Smallest support point `d = min{j : P(X = j) > 0}`.
    pub fn min_support(&self) -> u64 {
        match self {
            DistributionSpec::Deterministic { k } => *k,
            DistributionSpec::Poisson { .. } | DistributionSpec::Geometric { .. } => 0,
            DistributionSpec::Table { values, probs } => values
                .iter()
                .zip(probs)
                .find(|(_, &p)| p > 0.0)
                .map(|(&v, _)| v)
                .unwrap_or(0),
        }
    }

    /// Second factorial moment `f''(1) = E[X(X-1)]`, used for tail bounds.
    pub(crate) fn second_factorial_moment(&self) -> f64 {
        match self {
            DistributionSpec::Deterministic { k } => (*k as f64) * (*k as f64 - 1.0),
            DistributionSpec::Poisson { lambda } => lambda * lambda,
            DistributionSpec::Geometric { q } => {
                let r = 1.0 - q;
                2.0 * r * r / (q * q)
            }
            DistributionSpec::Table { values, probs } => values
                .iter()
                .zip(probs)
                .map(|(&v, &p)| p * v as f64 * (v as f64 - 1.0))
                .sum(),
        }
    }

    /// `P(X ≥ 1) > 0`, i.e. the distribution is not the point mass at zero.
    pub fn can_be_positive(&self) -> bool {
        match self {
            DistributionSpec::Deterministic { k } => *k >= 1,
            DistributionSpec::Poisson { .. } | DistributionSpec::Geometric { .. } => true,
            DistributionSpec::Table { values, probs } => values
                .iter()
                .zip(probs)
                .any(|(&v, &p)| v >= 1 && p > 0.0),
        }
    }

    /// `E[log⁺ X]`, the quantity behind the i.i.d. log-moment dichotomy.
    ///
    /// Deterministic and table kinds are closed-form; Poisson and geometric
    /// are summed to convergence. `tail_cutoff` (clamped to at least 10)
    /// bounds the number of series terms; a series that has not settled by
    /// then comes back as [`LogPlusMoment::Truncated`].
    pub fn log_plus_moment(&self, tail_cutoff: u64) -> LogPlusMoment {
        let cutoff = tail_cutoff.max(10);
        match self {
            DistributionSpec::Deterministic { k } => LogPlusMoment::Finite((*k as f64).ln()),
            DistributionSpec::Table { values, probs } => LogPlusMoment::Finite(
                values
                    .iter()
                    .zip(probs)
                    .filter(|(&v, _)| v >= 1)
                    .map(|(&v, &p)| p * (v as f64).ln())
                    .sum(),
            ),
            DistributionSpec::Geometric { q } => {
                // sum log(k) q(1-q)^k; the weight recurrence keeps it exact.
                let mut weight = *q;
                let mut acc = 0.0;
                for k in 1..=cutoff {
                    weight *= 1.0 - q;
                    let term = weight * (k as f64).ln();
                    acc += term;
                    // log k ≤ k bounds the remaining mass-weighted tail.
                    let tail_bound = weight * (1.0 - q) / q * (k as f64 + 2.0);
                    if tail_bound < 1e-16 * acc.max(1e-300) {
                        return LogPlusMoment::Finite(acc);
                    }
                }
                LogPlusMoment::Truncated { value: acc, cutoff }
            }
            DistributionSpec::Poisson { lambda } => {
                // Unnormalized pmf ratios around the mode avoid underflow at
                // large lambda; the window holds all but ~1e-30 of the mass.
                let sigma = lambda.sqrt();
                let lo = (lambda - 14.0 * sigma - 20.0).floor().max(0.0) as u64;
                let hi = (lambda + 14.0 * sigma + 20.0).ceil() as u64;
                if hi - lo > cutoff {
                    return LogPlusMoment::Truncated {
                        value: self.poisson_log_plus_window(lo, lo + cutoff),
                        cutoff,
                    };
                }
                LogPlusMoment::Finite(self.poisson_log_plus_window(lo, hi))
            }
        }
    }

    fn poisson_log_plus_window(&self, lo: u64, hi: u64) -> f64 {
        let DistributionSpec::Poisson { lambda } = self else {
            unreachable!()
        };
        let mut mass = 0.0;
        let mut acc = 0.0;
        let mut w = 1.0f64;
        for k in lo..=hi {
            if k > lo {
                w *= lambda / k as f64;
                // renormalize occasionally so w stays representable
                if w > 1e250 {
                    mass /= w;
                    acc /= w;
                    w = 1.0;
                }
            }
            mass += w;
            if k >= 1 {
                acc += w * (k as f64).ln();
            }
        }
        // The window spans 14 standard deviations; the missing mass is below
        // 1e-30, so conditioning on the window is exact at f64 scale.
        acc / mass
    }

    /// Draws one count. Deterministic kinds consume no randomness; the other
    /// kinds consume the caller's stream only.
    pub fn sample_count<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            DistributionSpec::Deterministic { k } => *k,
            DistributionSpec::Poisson { lambda } => {
                let d = rand_distr::Poisson::new(*lambda).expect("validated lambda");
                let x: f64 = d.sample(rng);
                x as u64
            }
            DistributionSpec::Geometric { q } => {
                let u: f64 = rng.random();
                let x = (-u).ln_1p() / (-q).ln_1p();
                x as u64
            }
            DistributionSpec::Table { values, probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (&v, &p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return v;
                    }
                }
                *values.last().expect("validated nonempty table")
            }
        }
    }
}

/// `s^k` for `u64` exponents; `powi` saturates at `i32`, so split.
fn pow_u64(s: f64, k: u64) -> f64 {
    if k <= i32::MAX as u64 {
        s.powi(k as i32)
    } else {
        s.powf(k as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dists() -> Vec<DistributionSpec> {
        vec![
            DistributionSpec::deterministic(1).unwrap(),
            DistributionSpec::deterministic(2).unwrap(),
            DistributionSpec::deterministic(5).unwrap(),
            DistributionSpec::poisson(0.5).unwrap(),
            DistributionSpec::poisson(2.0).unwrap(),
            DistributionSpec::geometric(0.3).unwrap(),
            DistributionSpec::geometric(0.9).unwrap(),
            DistributionSpec::table(vec![1, 3], vec![0.5, 0.5]).unwrap(),
            DistributionSpec::table(vec![0, 2], vec![0.25, 0.75]).unwrap(),
        ]
    }

    #[test]
    fn pgf_point_values() {
        let det1 = DistributionSpec::deterministic(1).unwrap();
        assert_eq!(det1.pgf_eval(0.6).unwrap(), 0.6);

        let pois2 = DistributionSpec::poisson(2.0).unwrap();
        assert!((pois2.pgf_eval(0.0).unwrap() - (-2.0f64).exp()).abs() < 1e-16);
        assert!((pois2.pgf_eval(0.0).unwrap() - 0.1353352832366127).abs() < 1e-15);

        let pois1 = DistributionSpec::poisson(1.0).unwrap();
        assert_eq!(pois1.pgf_eval(1.0).unwrap(), 1.0);
    }

    #[test]
    fn pgf_at_one_is_exactly_one() {
        for d in dists() {
            assert_eq!(d.pgf_eval(1.0).unwrap(), 1.0, "{d:?}");
        }
    }

    #[test]
    fn pgf_domain_errors() {
        let d = DistributionSpec::deterministic(1).unwrap();
        assert!(d.pgf_eval(-0.1).is_err());
        assert!(d.pgf_eval(1.1).is_err());
        assert!(d.log_pgf_one_minus(-1e-3).is_err());
        assert!(d.log_pgf_one_minus(1.5).is_err());
    }

    #[test]
    fn log_pgf_point_values() {
        let det1 = DistributionSpec::deterministic(1).unwrap();
        let got = det1.log_pgf_one_minus(1e-12).unwrap();
        assert!(
            (got - (-1.0000000000005e-12)).abs() < 1e-24,
            "log(1-1e-12) = {got:e}"
        );

        let pois3 = DistributionSpec::poisson(3.0).unwrap();
        assert_eq!(pois3.log_pgf_one_minus(0.25).unwrap(), -0.75);

        let det2 = DistributionSpec::deterministic(2).unwrap();
        let got = det2.log_pgf_one_minus(0.5).unwrap();
        assert!((got - (-1.3862943611198906)).abs() < 1e-15);
    }

    #[test]
    fn log_pgf_table_matches_exact_form_at_tiny_eps() {
        // For a table, log f(1-eps) can be computed independently through
        // per-atom powers at moderate eps and through the first-order slope
        // at tiny eps: log f(1-eps) = -mean*eps + O(eps^2).
        let d = DistributionSpec::table(vec![1, 3], vec![0.5, 0.5]).unwrap();
        for &eps in &[1e-14, 1e-10, 1e-8] {
            let got = d.log_pgf_one_minus(eps).unwrap();
            let first_order = -d.mean() * eps;
            assert!(
                (got - first_order).abs() <= 4.0 * eps * eps + 1e-30,
                "eps={eps:e} got={got:e} first={first_order:e}"
            );
        }
        // Second-order term has the sign of f''(1) - q^2: for this table
        // f''(1) = 3, q = 2, so log f(1-eps) = -2eps - eps^2/2 + O(eps^3).
        let eps = 1e-5;
        let got = d.log_pgf_one_minus(eps).unwrap();
        let second = -d.mean() * eps + (3.0 - 4.0) * eps * eps / 2.0;
        assert!((got - second).abs() < 1e-14, "got={got:e} second={second:e}");
    }

    #[test]
    fn mean_and_min_support() {
        let det1 = DistributionSpec::deterministic(1).unwrap();
        assert_eq!(det1.mean(), 1.0);
        assert_eq!(det1.min_support(), 1);

        let pois = DistributionSpec::poisson(3.5).unwrap();
        assert_eq!(pois.mean(), 3.5);
        assert_eq!(pois.min_support(), 0);

        let table = DistributionSpec::table(vec![1, 3], vec![0.5, 0.5]).unwrap();
        assert_eq!(table.mean(), 2.0);
        assert_eq!(table.min_support(), 1);
    }

    #[test]
    fn log_plus_moment_values() {
        let det5 = DistributionSpec::deterministic(5).unwrap();
        match det5.log_plus_moment(100) {
            LogPlusMoment::Finite(v) => assert!((v - 5f64.ln()).abs() < 1e-15),
            other => panic!("{other:?}"),
        }

        // Independent oracle: sum log(k) e^{-1} / k! with explicit factorials.
        let mut expect = 0.0;
        let mut fact = 1.0f64;
        for k in 1..=25u32 {
            fact *= f64::from(k);
            expect += (f64::from(k)).ln() * (-1.0f64).exp() / fact;
        }
        let pois1 = DistributionSpec::poisson(1.0).unwrap();
        match pois1.log_plus_moment(1000) {
            LogPlusMoment::Finite(v) => {
                assert!((v - expect).abs() < 1e-12, "got {v}, oracle {expect}");
                assert!(v <= pois1.mean());
            }
            other => panic!("{other:?}"),
        }

        let zero = DistributionSpec::table(vec![0], vec![1.0]).unwrap();
        assert_eq!(zero.log_plus_moment(100), LogPlusMoment::Finite(0.0));
    }

    #[test]
    fn log_plus_moment_truncates_when_cutoff_too_small() {
        let slow = DistributionSpec::geometric(1e-7).unwrap();
        match slow.log_plus_moment(100) {
            LogPlusMoment::Truncated { cutoff, .. } => assert_eq!(cutoff, 100),
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn deterministic_kinds_sample_without_randomness() {
        use crate::rng::SplitMix64;
        let mut rng = SplitMix64::new(1);
        let det3 = DistributionSpec::deterministic(3).unwrap();
        let point2 = DistributionSpec::table(vec![2], vec![1.0]).unwrap();
        for _ in 0..50 {
            assert_eq!(det3.sample_count(&mut rng), 3);
            assert_eq!(point2.sample_count(&mut rng), 2);
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(DistributionSpec::deterministic(0).is_err());
        assert!(DistributionSpec::poisson(0.0).is_err());
        assert!(DistributionSpec::poisson(f64::NAN).is_err());
        assert!(DistributionSpec::geometric(1.0).is_err());
        assert!(DistributionSpec::table(vec![1, 1], vec![0.5, 0.5]).is_err());
        assert!(DistributionSpec::table(vec![0, 1], vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn convexity_on_grid() {
        for d in dists() {
            let grid: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
            for w in grid.windows(3) {
                let (s1, s2, s3) = (w[0], w[1], w[2]);
                let f1 = d.pgf_eval(s1).unwrap();
                let f2 = d.pgf_eval(s2).unwrap();
                let f3 = d.pgf_eval(s3).unwrap();
                let lin = f1 + (f3 - f1) * (s2 - s1) / (s3 - s1);
                assert!(f2 <= lin + 1e-12, "{d:?} at {s2}");
            }
        }
    }

    #[test]
    fn derivative_at_one_matches_mean_for_bounded_support() {
        let bounded = [
            DistributionSpec::deterministic(1).unwrap(),
            DistributionSpec::deterministic(4).unwrap(),
            DistributionSpec::table(vec![1, 3], vec![0.5, 0.5]).unwrap(),
            DistributionSpec::table(vec![0, 2, 7], vec![0.2, 0.5, 0.3]).unwrap(),
        ];
        let h = 1e-7;
        for d in bounded {
            let fd = (1.0 - d.pgf_eval(1.0 - h).unwrap()) / h;
            assert!((fd - d.mean()).abs() < 1e-5, "{d:?}: {fd} vs {}", d.mean());
        }
    }

    proptest! {
        #[test]
        fn log_path_consistent_with_direct_eval(idx in 0usize..9, eps in 1e-6f64..1.0) {
            let d = &dists()[idx];
            let direct = d.pgf_eval(1.0 - eps).unwrap();
            let logged = d.log_pgf_one_minus(eps).unwrap().exp();
            if direct > 0.0 {
                let rel = ((logged - direct) / direct).abs();
                prop_assert!(rel < 1e-10, "{d:?} eps={eps} rel={rel:e}");
            }
        }

        #[test]
        fn log_pgf_is_nonpositive(idx in 0usize..9, eps in 0.0f64..=1.0) {
            let d = &dists()[idx];
            let v = d.log_pgf_one_minus(eps).unwrap();
            prop_assert!(v <= 0.0);
            if eps == 0.0 {
                prop_assert_eq!(v, 0.0);
            }
        }

        #[test]
        fn pgf_monotone_in_s(idx in 0usize..9, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let d = &dists()[idx];
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(d.pgf_eval(lo).unwrap() <= d.pgf_eval(hi).unwrap() + 1e-15);
        }
    }
}
