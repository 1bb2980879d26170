//! Numerical evaluation of the transience / non-transience conditions.
//!
//! The central object is the product series
//!
//! ```text
//!   Σ_{n≥2}  Π_{j=1}^{n-1}  f_j( 1 - r_j^{n-j} ),      r_j = (1-p_j)/p_j,
//! ```
//!
//! whose divergence is equivalent to transience: each term is the
//! probability, in the all-awake variant of the model, that no frog from
//! sites `1..n-1` ever reaches site `n`. Specialized series with the same
//! polarity exist for i.i.d. counts (driven by the constant
//! `K = -∫₀^∞ log f(1-e^{-x}) dx`) and for Poisson counts, plus the
//! i.i.d.-count log-moment dichotomy and a subsequence-product condition
//! that is sufficient for non-transience only.
//!
//! Divergence of an infinite series is not decidable from finitely many
//! terms, so every report carries a clearly-labelled heuristic verdict;
//! closed-form verdicts override the heuristic where their hypotheses hold.

use std::fmt;

use rayon::prelude::*;

use crate::model::{DriftSpec, FrogCountSpec, LambdaSpec, ModelConfig};
use crate::pgf::{DistributionSpec, LogPlusMoment};
use crate::quad::{adaptive_gk15, QuadFailure};
use crate::{Error, Result};

/// Heuristic (or closed-form) judgment about a series' partial sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Diverges,
    Converges,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Diverges => write!(f, "diverges"),
            Verdict::Converges => write!(f, "converges"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Output of [`classify_divergence`].
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub note: String,
}

/// Terms and partial sums of a transience series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesReport {
    /// Index of the first term (`n` of `terms[0]`).
    pub first_n: usize,
    pub terms: Vec<f64>,
    /// The log-space values actually accumulated (`ln terms[i]`).
    pub log_terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub verdict: Verdict,
    /// Interpretation and confidence note; always flags heuristics as such.
    pub note: String,
}

impl SeriesReport {
    /// Largest `n` evaluated.
    pub fn n_max(&self) -> usize {
        self.first_n + self.terms.len() - 1
    }

    /// `(n, term, partial_sum, log_term)` rows in index order.
    pub fn rows(&self) -> impl Iterator<Item = (usize, f64, f64, f64)> + '_ {
        (0..self.terms.len())
            .map(move |i| (self.first_n + i, self.terms[i], self.partial_sums[i], self.log_terms[i]))
    }

    fn from_log_terms(first_n: usize, log_terms: Vec<f64>, verdict: Verdict, note: String) -> Self {
        let terms: Vec<f64> = log_terms.iter().map(|lt| lt.exp()).collect();
        let mut acc = 0.0;
        let partial_sums = terms
            .iter()
            .map(|t| {
                acc += t;
                acc
            })
            .collect();
        SeriesReport {
            first_n,
            terms,
            log_terms,
            partial_sums,
            verdict,
            note,
        }
    }
}

/// The drift-integral constant `K = -∫₀^∞ log f(1 - e^{-x}) dx` together
/// with a bound on the absolute error of its computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KConstant {
    pub value: f64,
    pub abs_error_bound: f64,
}

/// Verdict of the i.i.d.-count log-moment dichotomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsVerdict {
    Transient,
    NonTransient,
    Inconclusive,
}

impl fmt::Display for GsVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GsVerdict::Transient => write!(f, "transient"),
            GsVerdict::NonTransient => write!(f, "non-transient"),
            GsVerdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Probability that a walk with leftward drift `p ∈ (1/2, 1)` ever advances
/// `k` sites to the right of its start: `((1-p)/p)^k`.
pub fn hitting_probability(p: f64, k: u64) -> f64 {
    debug_assert!(p > 0.5 && p < 1.0);
    let r = (1.0 - p) / p;
    if k <= i32::MAX as u64 {
        r.powi(k as i32)
    } else {
        r.powf(k as f64)
    }
}

/// Evaluates the general product series for `n = 2..=n_max`.
///
/// Each term is assembled in log space from exactly `n - 1` factors
/// `log f_j(1 - r_j^{n-j})`; terms are independent, so evaluation is
/// parallel with bit-identical results regardless of worker count.
///
/// Cost is `O(n_max²)` factor evaluations in general. With i.i.d. counts and
/// constant drift the factor depends on `n - j` alone and is precomputed
/// once per distinct exponent.
pub fn general_series(cfg: &ModelConfig, n_max: usize) -> Result<SeriesReport> {
    assert!(n_max >= 2, "general_series needs n_max >= 2");

    let ratios: Vec<f64> = (0..n_max).map(|j| if j == 0 { 0.0 } else { cfg.ratio_at(j) }).collect();

    // Factor cache for the one shape where exponents repeat.
    let factor_memo: Option<Vec<f64>> = match (&cfg.drift, &cfg.counts) {
        (DriftSpec::Constant { .. }, FrogCountSpec::Iid(dist)) => {
            let r = ratios[1];
            Some(
                (0..n_max)
                    .map(|k| {
                        if k == 0 {
                            0.0
                        } else {
                            dist.log_pgf_one_minus_raw(r.powi(k as i32))
                        }
                    })
                    .collect(),
            )
        }
        _ => None,
    };

    let log_terms: Vec<f64> = (2..=n_max)
        .into_par_iter()
        .map(|n| {
            let mut acc = 0.0;
            match &factor_memo {
                Some(memo) => {
                    for j in 1..n {
                        acc += memo[n - j];
                    }
                }
                None => {
                    for (j, r) in ratios.iter().enumerate().take(n).skip(1) {
                        let eps = r.powi((n - j) as i32);
                        acc += cfg.counts.log_pgf_one_minus_at(j, eps);
                    }
                }
            }
            debug_assert!(acc.is_nan() || acc <= 1e-15, "positive log term at n = {n}");
            acc
        })
        .collect();

    if let Some(i) = log_terms.iter().position(|lt| !lt.is_finite()) {
        return Err(Error::NonFiniteTerm { n: i + 2 });
    }

    let cls = classify_divergence(&exp_all(&log_terms), 2);
    let note = format!("divergence ⇔ transience; {}", cls.note);
    Ok(SeriesReport::from_log_terms(2, log_terms, cls.verdict, note))
}

fn exp_all(log_terms: &[f64]) -> Vec<f64> {
    log_terms.iter().map(|lt| lt.exp()).collect()
}

/// Tolerance bounds accepted by [`k_constant`].
pub const K_TOL_MIN: f64 = 1e-14;
pub const K_TOL_MAX: f64 = 1e-2;

/// Computes `K = -∫₀^∞ log f(1 - e^{-x}) dx` by adaptive quadrature on
/// `[0, X]` plus the analytic tail `q·e^{-X}` (exact to second order in
/// `e^{-X}`), with `abs_error_bound ≤ tol`.
pub fn k_constant(dist: &DistributionSpec, tol: f64) -> Result<KConstant> {
    if !(tol > K_TOL_MIN && tol < K_TOL_MAX) {
        return Err(Error::ToleranceRange {
            tol,
            lo: K_TOL_MIN,
            hi: K_TOL_MAX,
        });
    }
    let q = dist.mean();
    let m2 = dist.second_factorial_moment();

    // Past x_cut, |−log f(1−e^{−x}) − q e^{−x}| ≤ (q² + m2) e^{−2x}; choose
    // the cut so that remainder is quadratically below tol.
    let x_cut = (4.0 * (1.0 + q + q * q + m2) / tol).ln().max(30.0);
    let tail_value = q * (-x_cut).exp();
    let tail_err = (q * q + m2) * (-2.0 * x_cut).exp();

    let budget = (tol - tail_err).max(0.5 * tol);
    let integrand = |x: f64| -dist.log_pgf_one_minus_raw((-x).exp());
    match adaptive_gk15(integrand, 0.0, x_cut, budget, 20_000) {
        Ok(out) => Ok(KConstant {
            value: out.value + tail_value,
            abs_error_bound: out.abs_error + tail_err,
        }),
        Err(QuadFailure::Stalled { abs_error, .. }) => Err(Error::QuadratureStalled(format!(
            "error estimate stuck at {abs_error:e} with target {budget:e}"
        ))),
    }
}

/// Series for i.i.d. counts with drift `p_n = 1/2 + a_n`:
/// `term_n = exp(-K/(4 a_n)) / a_n^{d/2}` where `d` is the minimal support
/// point of the count distribution.
///
/// Hypotheses (i.i.d. counts with finite mean, `1/a_n` concave) are the
/// caller's to validate. When the drift has the `c / log n` shape the sharp
/// closed form applies — transient exactly when `c ≥ K/4` — and overrides
/// the heuristic verdict.
pub fn iid_drift_terms(
    drift: &DriftSpec,
    dist: &DistributionSpec,
    n_max: usize,
    k_tol: f64,
) -> Result<SeriesReport> {
    assert!(n_max >= 1, "iid_drift_terms needs n_max >= 1");
    let kc = k_constant(dist, k_tol)?;
    let d = dist.min_support() as f64;

    let log_terms: Vec<f64> = (1..=n_max)
        .map(|n| {
            let a = drift.a_at(n);
            -kc.value / (4.0 * a) - 0.5 * d * a.ln()
        })
        .collect();

    let cls = classify_divergence(&exp_all(&log_terms), 1);
    let (verdict, note) = match drift {
        DriftSpec::COverLog { c, .. } => {
            let threshold = kc.value / 4.0;
            let margin = kc.abs_error_bound / 4.0 + 1e-12;
            // The sharp dichotomy includes equality on the transient side.
            if *c >= threshold - margin {
                (
                    Verdict::Diverges,
                    format!(
                        "closed form for a_n = c/log n: transient (c = {c} ≥ K/4 = {threshold}); \
                         heuristic said {}; {}",
                        cls.verdict, cls.note
                    ),
                )
            } else {
                (
                    Verdict::Converges,
                    format!(
                        "closed form for a_n = c/log n: non-transient (c = {c} < K/4 = {threshold}); \
                         heuristic said {}; {}",
                        cls.verdict, cls.note
                    ),
                )
            }
        }
        _ => (
            cls.verdict,
            format!("divergence ⇔ transience; {}", cls.note),
        ),
    };

    Ok(SeriesReport::from_log_terms(1, log_terms, verdict, note))
}

/// Series for Poisson counts `X_n ~ Poisson(λ_n)` with drift `1/2 + a_n`:
/// `term_n = exp(-λ_n (1/(4 a_n) - 1/2))`.
///
/// For constant drift the exponent equals `λ_n (1-p)/(2p-1)`, which is the
/// sharp constant-drift condition verbatim.
pub fn poisson_terms(lambda: &LambdaSpec, drift: &DriftSpec, n_max: usize) -> SeriesReport {
    assert!(n_max >= 1, "poisson_terms needs n_max >= 1");
    let log_terms: Vec<f64> = (1..=n_max)
        .map(|n| {
            let a = drift.a_at(n);
            -lambda.lambda_at(n) * (1.0 / (4.0 * a) - 0.5)
        })
        .collect();
    let cls = classify_divergence(&exp_all(&log_terms), 1);
    let note = format!("divergence ⇔ transience; {}", cls.note);
    SeriesReport::from_log_terms(1, log_terms, cls.verdict, note)
}

const GS_SERIES_CUTOFF: u64 = 10_000_000;

/// The i.i.d.-count dichotomy: transient exactly when `E[log⁺ X] < ∞`
/// (independently of the drift value).
pub fn gantert_schmidt_verdict(dist: &DistributionSpec) -> GsVerdict {
    match dist.log_plus_moment(GS_SERIES_CUTOFF) {
        LogPlusMoment::Finite(_) => GsVerdict::Transient,
        LogPlusMoment::Diverges => GsVerdict::NonTransient,
        LogPlusMoment::Truncated { .. } => GsVerdict::Inconclusive,
    }
}

/// Partial sums of the subsequence product condition: for a strictly
/// increasing `n_0 < n_1 < …`,
/// `term_k = Π_{i=0}^{n_k} (1 - r_i^{n_{k+1} - i})`.
///
/// Finiteness of the full sum is *sufficient for non-transience only*; the
/// report's note repeats that, and its verdict stays heuristic.
pub fn bmz_sum(cfg: &ModelConfig, subsequence: &[usize], k_max: usize) -> Result<SeriesReport> {
    if k_max < 1 {
        return Err(Error::InvalidSubsequence("k_max must be at least 1".into()));
    }
    if subsequence.len() < k_max + 1 {
        return Err(Error::InvalidSubsequence(format!(
            "need {} subsequence entries for k_max = {k_max}, got {}",
            k_max + 1,
            subsequence.len()
        )));
    }
    if subsequence[0] < 1 {
        return Err(Error::InvalidSubsequence(
            "subsequence entries must be positive".into(),
        ));
    }
    if !subsequence.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidSubsequence(
            "subsequence must be strictly increasing".into(),
        ));
    }

    let log_terms: Vec<f64> = (0..k_max)
        .map(|k| {
            let n_k = subsequence[k];
            let n_k1 = subsequence[k + 1];
            (0..=n_k)
                .map(|i| {
                    let eps = cfg.ratio_at(i).powi((n_k1 - i) as i32);
                    (-eps).ln_1p()
                })
                .sum()
        })
        .collect();

    let cls = classify_divergence(&exp_all(&log_terms), 0);
    let note = format!(
        "a finite sum is sufficient for non-transience only (soft condition); {}",
        cls.note
    );
    Ok(SeriesReport::from_log_terms(0, log_terms, cls.verdict, note))
}

/// Fewest terms the classifier will look at.
pub const CLASSIFY_MIN_TERMS: usize = 64;
/// Fitted power-law exponents at most this far below 1 read as divergent.
const ALPHA_DIVERGES: f64 = 0.85;
/// Fitted power-law exponents at least this far above 1 read as convergent.
const ALPHA_CONVERGES: f64 = 1.15;
/// Total decay (in nats) across the window that counts as exponential-type.
const DECAY_NATS: f64 = 4.0;

/// Heuristic growth/decay classification of a term sequence.
///
/// Over the last half of the data, `log term_n` is least-squares-fitted
/// against each of `log n`, `√n`, and `n`. A strongly decaying `n`- or
/// `√n`-fit reads as convergent; otherwise the power-law exponent decides,
/// with an inconclusive band around the harmonic boundary. Zeroed-out
/// (underflowed) tails read as convergent. The verdict is a trend statement,
/// never a proof, and the note says so.
pub fn classify_divergence(terms: &[f64], first_n: usize) -> Classification {
    if terms.len() < CLASSIFY_MIN_TERMS {
        return Classification {
            verdict: Verdict::Inconclusive,
            note: format!(
                "heuristic needs at least {CLASSIFY_MIN_TERMS} terms, got {} (not a proof)",
                terms.len()
            ),
        };
    }
    if terms.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Classification {
            verdict: Verdict::Inconclusive,
            note: "terms contain non-finite or negative values (not a proof)".into(),
        };
    }

    let start = terms.len() / 2;
    let window = &terms[start..];
    let zeros = window.iter().filter(|t| **t <= f64::MIN_POSITIVE).count();
    if zeros * 4 > window.len() {
        return Classification {
            verdict: Verdict::Converges,
            note: "terms underflow to zero over the tail window (heuristic, not a proof)".into(),
        };
    }

    let pts: Vec<(f64, f64)> = window
        .iter()
        .enumerate()
        .filter(|(_, t)| **t > f64::MIN_POSITIVE)
        .map(|(i, t)| ((first_n + start + i).max(1) as f64, t.ln()))
        .collect();
    if pts.len() < 8 {
        return Classification {
            verdict: Verdict::Inconclusive,
            note: "too few usable (positive) terms in the tail window (not a proof)".into(),
        };
    }

    let fit_log = ols(&pts, |n| n.ln());
    let fit_sqrt = ols(&pts, |n| n.sqrt());
    let fit_lin = ols(&pts, |n| n);
    let alpha = -fit_log.slope;

    // Prefer the basis that explains the tail best; a clearly-decaying
    // exponential basis wins outright.
    let best = [(&fit_lin, "n"), (&fit_sqrt, "sqrt(n)"), (&fit_log, "log(n)")]
        .into_iter()
        .min_by(|a, b| a.0.rss.total_cmp(&b.0.rss))
        .expect("three fits");
    if best.1 != "log(n)" {
        let span_decay = best.0.slope * best.0.span;
        if span_decay <= -DECAY_NATS {
            return Classification {
                verdict: Verdict::Converges,
                note: format!(
                    "terms decay like exp({:+.3e}·{}) over the tail window (heuristic, not a proof)",
                    best.0.slope, best.1
                ),
            };
        }
        if span_decay >= DECAY_NATS {
            return Classification {
                verdict: Verdict::Diverges,
                note: format!(
                    "terms grow like exp({:+.3e}·{}) over the tail window (heuristic, not a proof)",
                    best.0.slope, best.1
                ),
            };
        }
    }

    let (verdict, gloss) = if alpha <= ALPHA_DIVERGES {
        (
            Verdict::Diverges,
            "n·term_n is bounded below by a positive trend",
        )
    } else if alpha >= ALPHA_CONVERGES {
        (Verdict::Converges, "terms decay super-harmonically")
    } else {
        (
            Verdict::Inconclusive,
            "fitted exponent sits in the harmonic boundary band",
        )
    };
    Classification {
        verdict,
        note: format!(
            "fitted term_n ~ n^(-{alpha:.3}) on the tail window; {gloss} (heuristic, not a proof)"
        ),
    }
}

struct Fit {
    slope: f64,
    rss: f64,
    span: f64,
}

fn ols(pts: &[(f64, f64)], basis: impl Fn(f64) -> f64) -> Fit {
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|(p, _)| basis(*p)).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = pts.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((_, y), x) in pts.iter().zip(&xs) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = mean_y - slope * mean_x;
    let rss = pts
        .iter()
        .zip(&xs)
        .map(|((_, y), x)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let span = xs.iter().cloned().fold(f64::MIN, f64::max)
        - xs.iter().cloned().fold(f64::MAX, f64::min);
    Fit { slope, rss, span }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ExtendRule;

    const PI2_6: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

    fn det1_cfg(p: f64) -> ModelConfig {
        ModelConfig {
            drift: DriftSpec::Constant { p },
            counts: FrogCountSpec::Iid(DistributionSpec::Deterministic { k: 1 }),
            p0: p,
        }
    }

    #[test]
    fn hitting_probability_values() {
        assert!((hitting_probability(0.75, 3) - 1.0 / 27.0).abs() < 1e-16);
        assert_eq!(hitting_probability(0.7, 0), 1.0);
        // (1 - 0.7)/0.7 rounds two ulps away from 3.0/7.0.
        assert!((hitting_probability(0.7, 1) - 3.0 / 7.0).abs() < 3e-16);
    }

    #[test]
    fn general_series_single_term() {
        let report = general_series(&det1_cfg(0.7), 2).unwrap();
        assert_eq!(report.first_n, 2);
        assert_eq!(report.terms.len(), 1);
        assert!((report.terms[0] - 4.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn general_series_matches_direct_product_oracle() {
        // Constant drift, single frog per site: term_n = prod_{k<n} (1 - r^k),
        // evaluated here directly in linear space as the oracle.
        let cfg = det1_cfg(0.7);
        let n_max = 1000;
        let report = general_series(&cfg, n_max).unwrap();
        let r: f64 = 3.0 / 7.0;
        let mut oracle = 1.0;
        for (idx, n) in (2..=n_max).enumerate() {
            oracle *= 1.0 - r.powi(n as i32 - 1);
            let rel = ((report.terms[idx] - oracle) / oracle).abs();
            assert!(rel < 1e-12, "n = {n}: rel = {rel:e}");
        }
        // Frozen from the high-precision oracle: Π_{k=1}^{999} (1 - (3/7)^k).
        assert!((report.terms[n_max - 2] - 0.4048275530968084).abs() < 1e-9);
        assert!((report.terms[n_max - 2] - 0.4049).abs() < 2e-4);
        assert_eq!(report.verdict, Verdict::Diverges, "{}", report.note);
    }

    #[test]
    fn general_series_log_terms_nonpositive() {
        let cfg = ModelConfig {
            drift: DriftSpec::COverLog { c: 0.3, n0: 2 },
            counts: FrogCountSpec::Iid(DistributionSpec::Table {
                values: vec![1, 4],
                probs: vec![0.75, 0.25],
            }),
            p0: 0.8,
        };
        let report = general_series(&cfg, 300).unwrap();
        for (i, lt) in report.log_terms.iter().enumerate() {
            assert!(*lt <= 1e-15, "positive log term at index {i}");
            assert!(report.terms[i] <= 1.0 && report.terms[i] >= 0.0);
        }
        for w in report.partial_sums.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn general_series_poisson_sequence_collapses_to_weighted_ratio_sum() {
        // Poisson(λ_j = j), constant p: log term_n = -Σ_k λ_{n-k} r^k.
        let cfg = ModelConfig {
            drift: DriftSpec::Constant { p: 0.6 },
            counts: FrogCountSpec::PoissonSeq {
                lambda: LambdaSpec::Linear {
                    alpha: 1.0,
                    beta: 0.0,
                },
            },
            p0: 0.6,
        };
        let n_max = 400;
        let report = general_series(&cfg, n_max).unwrap();
        let r: f64 = 2.0 / 3.0;
        for (idx, n) in (2..=n_max).enumerate() {
            let expect: f64 = (1..n).map(|k| -((n - k) as f64) * r.powi(k as i32)).sum();
            assert!(
                (report.log_terms[idx] - expect).abs() < 1e-9 * expect.abs().max(1.0),
                "n = {n}"
            );
        }
        // Terms decay geometrically (≈ e^{-2n}); the series converges.
        assert_eq!(report.verdict, Verdict::Converges, "{}", report.note);
    }

    #[test]
    fn drift_monotonicity_raises_terms() {
        // Raising every drift shrinks every hitting ratio, which can only
        // raise the no-hit probability that each term multiplies out.
        let lo = general_series(&det1_cfg(0.66), 200).unwrap();
        let hi = general_series(&det1_cfg(0.74), 200).unwrap();
        for (t_lo, t_hi) in lo.terms.iter().zip(&hi.terms) {
            assert!(t_hi >= &(t_lo - 1e-12));
        }
    }

    #[test]
    fn k_constant_deterministic_and_poisson() {
        let det1 = DistributionSpec::Deterministic { k: 1 };
        let k = k_constant(&det1, 1e-10).unwrap();
        assert!((k.value - PI2_6).abs() < 1e-8, "K = {} ± {}", k.value, k.abs_error_bound);
        assert!(k.abs_error_bound <= 1e-10);

        let det2 = DistributionSpec::Deterministic { k: 2 };
        let k2 = k_constant(&det2, 1e-10).unwrap();
        assert!((k2.value - 2.0 * PI2_6).abs() < 2e-8);

        for lambda in [0.5, 1.0, 2.0, 7.0] {
            let kp = k_constant(&DistributionSpec::Poisson { lambda }, 1e-11).unwrap();
            assert!(
                (kp.value - lambda).abs() < 1e-10,
                "lambda = {lambda}: K = {}",
                kp.value
            );
        }
    }

    #[test]
    fn k_constant_geometric_matches_dilogarithm() {
        // For the geometric kind, K = -Li₂(-(1-q)/q); oracle by series.
        let q = 0.6f64;
        let c = (1.0 - q) / q;
        let mut oracle = 0.0;
        for m in 1..200 {
            let m = m as f64;
            oracle += -(-c).powf(m) / (m * m);
        }
        let k = k_constant(&DistributionSpec::Geometric { q }, 1e-11).unwrap();
        assert!((k.value - oracle).abs() < 1e-9, "{} vs {oracle}", k.value);
    }

    #[test]
    fn k_constant_rejects_bad_tolerance() {
        let d = DistributionSpec::Deterministic { k: 1 };
        assert!(matches!(
            k_constant(&d, 1e-15),
            Err(Error::ToleranceRange { .. })
        ));
        assert!(matches!(
            k_constant(&d, 0.5),
            Err(Error::ToleranceRange { .. })
        ));
    }

    #[test]
    fn iid_drift_closed_form_threshold() {
        let det1 = DistributionSpec::Deterministic { k: 1 };
        let critical = PI2_6 / 4.0;

        // Exactly critical: transient (the dichotomy includes equality).
        let at = iid_drift_terms(
            &DriftSpec::COverLog { c: critical, n0: 2 },
            &det1,
            256,
            1e-10,
        )
        .unwrap();
        assert_eq!(at.verdict, Verdict::Diverges, "{}", at.note);

        let below = iid_drift_terms(&DriftSpec::COverLog { c: 0.2, n0: 2 }, &det1, 256, 1e-10)
            .unwrap();
        assert_eq!(below.verdict, Verdict::Converges, "{}", below.note);

        let above = iid_drift_terms(&DriftSpec::COverLog { c: 0.6, n0: 2 }, &det1, 256, 1e-10)
            .unwrap();
        assert_eq!(above.verdict, Verdict::Diverges, "{}", above.note);
    }

    #[test]
    fn constant_drift_poisson_terms_are_constant_and_diverge() {
        let lambda = 2.5;
        let a = 0.15;
        let drift = DriftSpec::Constant { p: 0.5 + a };
        let series = iid_drift_terms(
            &drift,
            &DistributionSpec::Poisson { lambda },
            128,
            1e-10,
        )
        .unwrap();
        // d = 0 and K = λ: constant positive terms.
        let expect = (-lambda / (4.0 * a)).exp();
        for t in &series.terms {
            assert!((t - expect).abs() < 1e-10 * expect);
        }
        assert_eq!(series.verdict, Verdict::Diverges, "{}", series.note);
    }

    #[test]
    fn poisson_terms_cross_check_with_iid_route() {
        // Constant λ, constant a, d = 0, K = λ: the poisson series term must
        // equal e^{λ/2} times the iid series term, exactly in log space.
        let lambda = 2.5;
        let a = 0.15;
        let drift = DriftSpec::Constant { p: 0.5 + a };
        let pois = poisson_terms(&LambdaSpec::Constant { value: lambda }, &drift, 128);
        let iid = iid_drift_terms(&drift, &DistributionSpec::Poisson { lambda }, 128, 1e-12)
            .unwrap();
        let boost = (lambda / 2.0).exp();
        for (tp, ti) in pois.terms.iter().zip(&iid.terms) {
            let rel = ((tp - boost * ti) / tp).abs();
            assert!(rel < 1e-10, "rel = {rel:e}");
        }
        assert_eq!(pois.verdict, iid.verdict);
    }

    #[test]
    fn poisson_terms_linear_lambda() {
        // λ_n = n, a = 0.1: exponent -2n, convergent.
        let series = poisson_terms(
            &LambdaSpec::Linear {
                alpha: 1.0,
                beta: 0.0,
            },
            &DriftSpec::Constant { p: 0.6 },
            300,
        );
        for (i, lt) in series.log_terms.iter().enumerate() {
            let n = (i + 1) as f64;
            assert!((lt - (-2.0 * n)).abs() < 1e-12 * n.max(1.0));
        }
        assert_eq!(series.verdict, Verdict::Converges, "{}", series.note);
    }

    #[test]
    fn exponent_identity_over_grid() {
        for i in 1..=49 {
            let a = i as f64 * 0.01;
            let p = 0.5 + a;
            let lhs = (1.0 - p) / (2.0 * p - 1.0);
            let rhs = 1.0 / (4.0 * a) - 0.5;
            assert!((lhs - rhs).abs() <= 1e-13, "a = {a}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn gantert_schmidt_examples() {
        assert_eq!(
            gantert_schmidt_verdict(&DistributionSpec::Poisson { lambda: 5.0 }),
            GsVerdict::Transient
        );
        for k in [1u64, 2, 10, 1000] {
            assert_eq!(
                gantert_schmidt_verdict(&DistributionSpec::Deterministic { k }),
                GsVerdict::Transient
            );
        }
        assert_eq!(
            gantert_schmidt_verdict(&DistributionSpec::Geometric { q: 0.1 }),
            GsVerdict::Transient
        );
    }

    #[test]
    fn bmz_product_value() {
        // n_k = 2^k, p_i = 0.9: first product is (1 - (1/9)^2)(1 - 1/9).
        let cfg = det1_cfg(0.9);
        let subseq: Vec<usize> = (0..8).map(|k| 1usize << k).collect();
        let report = bmz_sum(&cfg, &subseq, 4).unwrap();
        assert_eq!(report.first_n, 0);
        assert!((report.terms[0] - 640.0 / 729.0).abs() < 1e-12);
        for t in &report.terms {
            assert!(*t > 0.0 && *t < 1.0);
        }
        assert!(report.note.contains("sufficient for non-transience"));
    }

    #[test]
    fn bmz_rejects_bad_subsequences() {
        let cfg = det1_cfg(0.9);
        assert!(bmz_sum(&cfg, &[1, 2, 2], 2).is_err());
        assert!(bmz_sum(&cfg, &[0, 1, 2], 2).is_err());
        assert!(bmz_sum(&cfg, &[1, 2], 5).is_err());
    }

    #[test]
    fn bmz_soft_condition_consistency() {
        // A drift that collapses toward 1/2 so fast that the subsequence
        // products are near zero: the sum looks finite at desk scale, and the
        // general series must not be classified as divergent.
        let m = 600usize;
        let a: Vec<f64> = (1..=m).map(|j| 0.4 / (j as f64).powf(1.5)).collect();
        let cfg = ModelConfig {
            drift: DriftSpec::HalfPlusA {
                a,
                extend: ExtendRule::HoldLast,
            },
            counts: FrogCountSpec::Iid(DistributionSpec::Deterministic { k: 1 }),
            p0: 0.9,
        };
        let subseq: Vec<usize> = (0..9).map(|k| 1usize << k).collect();
        let bmz = bmz_sum(&cfg, &subseq, 8).unwrap();
        // Finite at desk scale: the tail terms vanish and the sum plateaus.
        assert!(bmz.terms.last().unwrap() < &1e-9, "{:?}", bmz.terms);
        let m = bmz.partial_sums.len();
        assert!(
            (bmz.partial_sums[m - 1] - bmz.partial_sums[m - 3]).abs() < 1e-9,
            "sum should plateau, got {:?}",
            bmz.partial_sums
        );
        let series = general_series(&cfg, 512).unwrap();
        assert_ne!(series.verdict, Verdict::Diverges, "{}", series.note);
    }

    #[test]
    fn classifier_trivial_shapes() {
        let constant = vec![0.4; 200];
        assert_eq!(
            classify_divergence(&constant, 1).verdict,
            Verdict::Diverges
        );

        let exp_decay: Vec<f64> = (1..=200).map(|n| (-2.0 * n as f64).exp()).collect();
        assert_eq!(
            classify_divergence(&exp_decay, 1).verdict,
            Verdict::Converges
        );

        let slow: Vec<f64> = (1..=2000)
            .map(|n| {
                let n = n as f64 + 1.0;
                1.0 / (n * n.ln() * n.ln())
            })
            .collect();
        assert_ne!(classify_divergence(&slow, 2).verdict, Verdict::Diverges);
    }

    #[test]
    fn classifier_needs_enough_terms() {
        let short = vec![0.5; 10];
        assert_eq!(
            classify_divergence(&short, 1).verdict,
            Verdict::Inconclusive
        );
    }

    #[test]
    fn classifier_never_claims_proof() {
        let shapes: Vec<Vec<f64>> = vec![
            vec![0.4; 100],
            (1..=100).map(|n| (-(n as f64)).exp()).collect(),
            (1..=100).map(|n| 1.0 / n as f64).collect(),
        ];
        for terms in shapes {
            let cls = classify_divergence(&terms, 1);
            assert!(cls.note.contains("not a proof"), "{}", cls.note);
        }
    }

    #[test]
    fn section_23_form_matches_general_series() {
        // With i.i.d. counts and constant drift the general term equals
        // Π_{j=1}^{n-1} f(1 - r^j); direct substitution as the second route.
        let dist = DistributionSpec::Table {
            values: vec![1, 2],
            probs: vec![0.5, 0.5],
        };
        let cfg = ModelConfig {
            drift: DriftSpec::Constant { p: 0.72 },
            counts: FrogCountSpec::Iid(dist.clone()),
            p0: 0.72,
        };
        let n_max = 1000;
        let report = general_series(&cfg, n_max).unwrap();
        let r = cfg.ratio_at(1);
        let mut product = 1.0;
        for (idx, n) in (2..=n_max).enumerate() {
            product *= dist.pgf_eval(1.0 - r.powi(n as i32 - 1)).unwrap();
            let rel = ((report.terms[idx] - product) / product).abs();
            assert!(rel < 1e-12, "n = {n}: rel = {rel:e}");
        }
    }
}
