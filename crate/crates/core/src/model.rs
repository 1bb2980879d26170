//! Model instances: drift sequences, count-distribution sequences, and the
//! structural constraints the transience criteria assume.
//!
//! A model is a drift sequence `p_j ∈ (1/2, 1)` (decreasing for `j ≥ 1`), a
//! count sequence `X_j` that is stochastically nondecreasing with
//! `P(X_j ≥ 1) > 0`, and the origin frog's own drift `p₀`. Validation never
//! fails with an error: it reports every violated constraint over a finite
//! horizon, tagged with the hypothesis family it belongs to, and an empty
//! report means the instance is usable.

use std::borrow::Cow;
use std::fmt;

use crate::pgf::DistributionSpec;

/// Drifts must stay strictly inside (1/2, 1); these margins keep the hitting
/// ratio `(1-p)/p` away from the degenerate endpoints.
pub const DRIFT_MIN: f64 = 0.5 + 1e-12;
pub const DRIFT_MAX: f64 = 1.0 - 1e-9;

/// Relative slack for the discrete concavity checks.
const CONCAVITY_SLACK: f64 = 1e-9;

/// How a finite table extends past its last entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtendRule {
    /// Repeat the final value.
    HoldLast,
    /// Continue `g(j) = 1/a_j` linearly with its final slope (keeps `g`
    /// concave and `a_j` decreasing when the table itself is).
    LinearInverse,
}

/// The leftward drift sequence `p_j` for sites `j ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum DriftSpec {
    /// `p_j = p` for every site.
    Constant { p: f64 },
    /// `p_j = 1/2 + c / log j` for `j ≥ n0`, pinned to `p_{n0}` below `n0`.
    COverLog { c: f64, n0: usize },
    /// `p_j = 1/2 + a_j` from a table (`a[0]` is `a_1`), extended by `extend`.
    HalfPlusA { a: Vec<f64>, extend: ExtendRule },
    /// Explicit drift table (`p[0]` is `p_1`), held at the last entry beyond.
    Table { p: Vec<f64> },
}

impl DriftSpec {
    /// Drift at site `j ≥ 1`. Total on purpose: out-of-range results are the
    /// validator's to flag, not this accessor's.
    pub fn p_at(&self, j: usize) -> f64 {
        debug_assert!(j >= 1);
        match self {
            DriftSpec::Constant { p } => *p,
            DriftSpec::COverLog { c, n0 } => {
                let jj = j.max(*n0).max(2);
                0.5 + c / (jj as f64).ln()
            }
            DriftSpec::HalfPlusA { a, extend } => 0.5 + half_plus_a_at(a, *extend, j),
            DriftSpec::Table { p } => p[j.min(p.len()) - 1],
        }
    }

    /// `a_j = p_j - 1/2`, exact for the kinds that carry `a_j` directly.
    pub fn a_at(&self, j: usize) -> f64 {
        match self {
            DriftSpec::HalfPlusA { a, extend } => half_plus_a_at(a, *extend, j),
            DriftSpec::COverLog { c, n0 } => {
                let jj = j.max(*n0).max(2);
                c / (jj as f64).ln()
            }
            _ => self.p_at(j) - 0.5,
        }
    }

    /// First index at which the defining formula (rather than a pinned
    /// prefix) is in force; concavity of `1/a_j` is a hypothesis about the
    /// sequence from here on.
    fn formula_start(&self) -> usize {
        match self {
            DriftSpec::COverLog { n0, .. } => (*n0).max(2),
            _ => 1,
        }
    }
}

fn half_plus_a_at(a: &[f64], extend: ExtendRule, j: usize) -> f64 {
    let m = a.len();
    if j <= m {
        return a[j - 1];
    }
    match extend {
        ExtendRule::HoldLast => a[m - 1],
        ExtendRule::LinearInverse => {
            if m < 2 {
                return a[m - 1];
            }
            let g_last = 1.0 / a[m - 1];
            let slope = g_last - 1.0 / a[m - 2];
            let g = g_last + slope * (j - m) as f64;
            1.0 / g
        }
    }
}

/// The Poisson-mean sequence `λ_j` for `poisson-sequence` counts.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaSpec {
    Constant { value: f64 },
    /// `λ_j = alpha · j + beta`.
    Linear { alpha: f64, beta: f64 },
    /// Table (`values[0]` is `λ_1`), held at the last entry beyond.
    Table { values: Vec<f64> },
}

impl LambdaSpec {
    pub fn lambda_at(&self, j: usize) -> f64 {
        debug_assert!(j >= 1);
        match self {
            LambdaSpec::Constant { value } => *value,
            LambdaSpec::Linear { alpha, beta } => alpha * j as f64 + beta,
            LambdaSpec::Table { values } => values[j.min(values.len()) - 1],
        }
    }
}

/// The sleeping-count sequence `X_j` for sites `j ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum FrogCountSpec {
    /// Independent copies of one distribution.
    Iid(DistributionSpec),
    /// `X_j = k_j` deterministically (`counts[0]` is `k_1`, held beyond).
    DeterministicSeq { counts: Vec<u64> },
    /// `X_j ~ Poisson(λ_j)`.
    PoissonSeq { lambda: LambdaSpec },
}

impl FrogCountSpec {
    /// Distribution of `X_j`; borrows for i.i.d. counts, builds the
    /// site-local parameterization otherwise.
    pub fn dist_at(&self, j: usize) -> Cow<'_, DistributionSpec> {
        match self {
            FrogCountSpec::Iid(d) => Cow::Borrowed(d),
            FrogCountSpec::DeterministicSeq { counts } => {
                Cow::Owned(DistributionSpec::Deterministic {
                    k: counts[j.min(counts.len()) - 1],
                })
            }
            FrogCountSpec::PoissonSeq { lambda } => Cow::Owned(DistributionSpec::Poisson {
                lambda: lambda.lambda_at(j),
            }),
        }
    }

    /// `log f_j(1 - eps)` without the allocation or domain check of the
    /// general path; `eps` must already lie in `[0, 1]`.
    pub(crate) fn log_pgf_one_minus_at(&self, j: usize, eps: f64) -> f64 {
        match self {
            FrogCountSpec::Iid(d) => d.log_pgf_one_minus_raw(eps),
            FrogCountSpec::DeterministicSeq { counts } => {
                counts[j.min(counts.len()) - 1] as f64 * (-eps).ln_1p()
            }
            FrogCountSpec::PoissonSeq { lambda } => -lambda.lambda_at(j) * eps,
        }
    }
}

/// A full model instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub drift: DriftSpec,
    pub counts: FrogCountSpec,
    /// Leftward drift of the frog that starts at the origin.
    pub p0: f64,
}

impl ModelConfig {
    /// Drift at site `j`: `p0` at the origin, the drift sequence elsewhere.
    pub fn drift_at(&self, j: usize) -> f64 {
        if j == 0 {
            self.p0
        } else {
            self.drift.p_at(j)
        }
    }

    /// Hitting ratio `r_j = (1 - p_j) / p_j ∈ (0, 1)`.
    pub fn ratio_at(&self, j: usize) -> f64 {
        let p = self.drift_at(j);
        (1.0 - p) / p
    }
}

/// Which hypothesis family a violation falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Base model assumptions: drift range/monotonicity, count dominance,
    /// `P(X_j ≥ 1) > 0`.
    Model,
    /// Extra hypotheses of the i.i.d. drift series criterion: i.i.d. counts
    /// with finite mean and concave `1/a_j`.
    IidSeries,
    /// Extra hypotheses of the Poisson-count series criterion: Poisson
    /// counts with concave `λ_j` and concave `1/a_j`.
    PoissonSeries,
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Model => write!(f, "model"),
            Scope::IidSeries => write!(f, "iid-series"),
            Scope::PoissonSeries => write!(f, "poisson-series"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub scope: Scope,
    /// Site index the violation was observed at, when site-local.
    pub site: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.site {
            Some(j) => write!(f, "[{}] site {}: {}", self.scope, j, self.message),
            None => write!(f, "[{}] {}", self.scope, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub horizon: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// No violations of any scope.
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// The base model assumptions hold (series-criterion hypotheses may
    /// still fail without making the instance unusable).
    pub fn is_valid_model(&self) -> bool {
        !self
            .violations
            .iter()
            .any(|v| v.scope == Scope::Model)
    }

    pub fn satisfies(&self, scope: Scope) -> bool {
        !self.violations.iter().any(|v| v.scope == scope)
    }
}

/// Checks every invariant of `cfg` over sites `j ≤ horizon` and reports the
/// violations; an empty report means valid. Never fails.
pub fn validate_config(cfg: &ModelConfig, horizon: usize) -> ValidationReport {
    let horizon = horizon.max(2);
    let mut v = Vec::new();

    check_drift_range(cfg, horizon, &mut v);
    check_counts(cfg, horizon, &mut v);
    check_iid_series(cfg, horizon, &mut v);
    check_poisson_series(cfg, horizon, &mut v);

    ValidationReport {
        horizon,
        violations: v,
    }
}

fn in_drift_range(p: f64) -> bool {
    p.is_finite() && p > DRIFT_MIN && p < DRIFT_MAX
}

fn check_drift_range(cfg: &ModelConfig, horizon: usize, out: &mut Vec<Violation>) {
    if !in_drift_range(cfg.p0) {
        out.push(Violation {
            scope: Scope::Model,
            site: Some(0),
            message: format!("origin drift p0 = {} outside ({DRIFT_MIN}, {DRIFT_MAX})", cfg.p0),
        });
    }
    for j in 1..=horizon {
        let p = cfg.drift.p_at(j);
        if !in_drift_range(p) {
            out.push(Violation {
                scope: Scope::Model,
                site: Some(j),
                message: format!("drift p_{j} = {p} outside ({DRIFT_MIN}, {DRIFT_MAX})"),
            });
        }
    }
    for j in 1..horizon {
        let (a, b) = (cfg.drift.p_at(j), cfg.drift.p_at(j + 1));
        if b > a {
            out.push(Violation {
                scope: Scope::Model,
                site: Some(j + 1),
                message: format!("drifts not decreasing: p_{} = {b} > p_{j} = {a}", j + 1),
            });
        }
    }
}

fn check_counts(cfg: &ModelConfig, horizon: usize, out: &mut Vec<Violation>) {
    match &cfg.counts {
        FrogCountSpec::Iid(d) => {
            if let Err(e) = d.validate() {
                out.push(Violation {
                    scope: Scope::Model,
                    site: None,
                    message: e.to_string(),
                });
            } else if !d.can_be_positive() {
                out.push(Violation {
                    scope: Scope::Model,
                    site: None,
                    message: "P(X >= 1) = 0: counts are the point mass at zero".into(),
                });
            }
        }
        FrogCountSpec::DeterministicSeq { counts } => {
            if counts.is_empty() {
                out.push(Violation {
                    scope: Scope::Model,
                    site: None,
                    message: "deterministic count sequence is empty".into(),
                });
                return;
            }
            for j in 1..=horizon {
                let k = counts[j.min(counts.len()) - 1];
                if k < 1 {
                    out.push(Violation {
                        scope: Scope::Model,
                        site: Some(j),
                        message: format!("k_{j} = 0 makes P(X_{j} >= 1) = 0"),
                    });
                }
            }
            for j in 1..horizon {
                let (a, b) = (
                    counts[j.min(counts.len()) - 1],
                    counts[(j + 1).min(counts.len()) - 1],
                );
                if b < a {
                    out.push(Violation {
                        scope: Scope::Model,
                        site: Some(j + 1),
                        message: format!(
                            "counts not stochastically nondecreasing: k_{} = {b} < k_{j} = {a}",
                            j + 1
                        ),
                    });
                }
            }
        }
        FrogCountSpec::PoissonSeq { lambda } => {
            if let LambdaSpec::Table { values } = lambda {
                if values.is_empty() {
                    out.push(Violation {
                        scope: Scope::Model,
                        site: None,
                        message: "poisson mean table is empty".into(),
                    });
                    return;
                }
            }
            for j in 1..=horizon {
                let l = lambda.lambda_at(j);
                if !(l.is_finite() && l > 0.0) {
                    out.push(Violation {
                        scope: Scope::Model,
                        site: Some(j),
                        message: format!("poisson mean lambda_{j} = {l} must be positive"),
                    });
                }
            }
            for j in 1..horizon {
                let (a, b) = (lambda.lambda_at(j), lambda.lambda_at(j + 1));
                if b < a {
                    out.push(Violation {
                        scope: Scope::Model,
                        site: Some(j + 1),
                        message: format!(
                            "poisson means not nondecreasing: lambda_{} = {b} < lambda_{j} = {a}",
                            j + 1
                        ),
                    });
                }
            }
        }
    }
}

/// Discrete concavity of `g` on interior points of `[start, horizon]`:
/// `g(j+1) + g(j-1) ≤ 2 g(j)` up to relative slack.
fn check_concavity(
    g: impl Fn(usize) -> f64,
    start: usize,
    horizon: usize,
    scope: Scope,
    what: &str,
    out: &mut Vec<Violation>,
) {
    for j in (start + 1)..horizon {
        let (gm, gz, gp) = (g(j - 1), g(j), g(j + 1));
        let slack = CONCAVITY_SLACK * gz.abs().max(1.0);
        if gp + gm > 2.0 * gz + slack {
            out.push(Violation {
                scope,
                site: Some(j),
                message: format!(
                    "{what} not concave at j = {j}: g(j-1) + g(j+1) = {} > 2 g(j) = {}",
                    gm + gp,
                    2.0 * gz
                ),
            });
        }
    }
}

fn check_iid_series(cfg: &ModelConfig, horizon: usize, out: &mut Vec<Violation>) {
    if !matches!(cfg.counts, FrogCountSpec::Iid(_)) {
        out.push(Violation {
            scope: Scope::IidSeries,
            site: None,
            message: "counts are not i.i.d.".into(),
        });
        return;
    }
    // Finite mean holds structurally for every supported distribution.
    check_concavity(
        |j| 1.0 / cfg.drift.a_at(j),
        cfg.drift.formula_start(),
        horizon,
        Scope::IidSeries,
        "1/a_j",
        out,
    );
}

fn check_poisson_series(cfg: &ModelConfig, horizon: usize, out: &mut Vec<Violation>) {
    let FrogCountSpec::PoissonSeq { lambda } = &cfg.counts else {
        out.push(Violation {
            scope: Scope::PoissonSeries,
            site: None,
            message: "counts are not a poisson sequence".into(),
        });
        return;
    };
    check_concavity(
        |j| lambda.lambda_at(j),
        1,
        horizon,
        Scope::PoissonSeries,
        "lambda_j",
        out,
    );
    check_concavity(
        |j| 1.0 / cfg.drift.a_at(j),
        cfg.drift.formula_start(),
        horizon,
        Scope::PoissonSeries,
        "1/a_j",
        out,
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn det1() -> FrogCountSpec {
        FrogCountSpec::Iid(DistributionSpec::Deterministic { k: 1 })
    }

    #[test]
    fn constant_config_is_valid() {
        let cfg = ModelConfig {
            drift: DriftSpec::Constant { p: 0.7 },
            counts: det1(),
            p0: 0.7,
        };
        let report = validate_config(&cfg, 100);
        assert!(report.is_valid_model());
        assert!(report.satisfies(Scope::IidSeries));
        assert!(!report.satisfies(Scope::PoissonSeries));
    }

    #[test]
    fn c_over_log_is_valid_and_concave() {
        let cfg = ModelConfig {
            drift: DriftSpec::COverLog { c: 0.2, n0: 2 },
            counts: det1(),
            p0: 0.7,
        };
        let report = validate_config(&cfg, 1000);
        assert!(report.is_valid_model(), "{:?}", report.violations);
        assert!(report.satisfies(Scope::IidSeries), "{:?}", report.violations);
        // Spot-check the formula: p_j = 1/2 + 0.2 / log j.
        let j = 9; // log 9 > 2
        assert!((cfg.drift.p_at(j) - (0.5 + 0.2 / (j as f64).ln())).abs() < 1e-15);
        // Pinned prefix below n0.
        assert_eq!(cfg.drift.p_at(1), cfg.drift.p_at(2));
    }

    #[test]
    fn increasing_drift_table_is_flagged() {
        let cfg = ModelConfig {
            drift: DriftSpec::Table { p: vec![0.6, 0.7] },
            counts: det1(),
            p0: 0.7,
        };
        let report = validate_config(&cfg, 10);
        assert!(!report.is_valid_model());
        assert!(report
            .violations
            .iter()
            .any(|v| v.message.contains("not decreasing")));
    }

    #[test]
    fn drift_accessors() {
        let cfg = ModelConfig {
            drift: DriftSpec::Constant { p: 0.7 },
            counts: det1(),
            p0: 0.8,
        };
        assert_eq!(cfg.drift_at(0), 0.8);
        assert_eq!(cfg.drift_at(5), 0.7);
        let table = ModelConfig {
            drift: DriftSpec::Table { p: vec![0.8] },
            counts: det1(),
            p0: 0.8,
        };
        assert_eq!(table.drift_at(1), 0.8);
        assert_eq!(table.drift_at(9), 0.8); // held past the end
    }

    #[test]
    fn ratio_values() {
        let cfg = ModelConfig {
            drift: DriftSpec::Constant { p: 0.7 },
            counts: det1(),
            p0: 0.75,
        };
        assert!((cfg.ratio_at(3) - 3.0 / 7.0).abs() < 3e-16);
        assert!((cfg.ratio_at(0) - 1.0 / 3.0).abs() < 3e-16);
    }

    #[test]
    fn ratio_matches_w_substitution() {
        // (1-p)/p with p = 1/2 + a equals 1 - 4a/(1+2a).
        let mut a = 0.01;
        while a <= 0.49 + 1e-12 {
            let p = 0.5 + a;
            let cfg = ModelConfig {
                drift: DriftSpec::Constant { p },
                counts: det1(),
                p0: p,
            };
            let direct = cfg.ratio_at(1);
            let w_form = 1.0 - 4.0 * a / (1.0 + 2.0 * a);
            assert!((direct - w_form).abs() < 1e-15, "a = {a}");
            a += 0.04;
        }
    }

    #[test]
    fn poisson_sequence_hypotheses() {
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
        let report = validate_config(&cfg, 200);
        assert!(report.is_valid_model(), "{:?}", report.violations);
        assert!(report.satisfies(Scope::PoissonSeries));

        let decreasing = ModelConfig {
            counts: FrogCountSpec::PoissonSeq {
                lambda: LambdaSpec::Table {
                    values: vec![2.0, 1.0],
                },
            },
            ..cfg
        };
        assert!(!validate_config(&decreasing, 10).is_valid_model());
    }

    #[test]
    fn half_plus_a_extension_rules() {
        let hold = DriftSpec::HalfPlusA {
            a: vec![0.2, 0.1],
            extend: ExtendRule::HoldLast,
        };
        assert_eq!(hold.a_at(5), 0.1);

        let linear = DriftSpec::HalfPlusA {
            a: vec![0.2, 0.1],
            extend: ExtendRule::LinearInverse,
        };
        // g goes 5, 10, 15, 20, ... so a_3 = 1/15, a_4 = 1/20.
        assert!((linear.a_at(3) - 1.0 / 15.0).abs() < 1e-12);
        assert!((linear.a_at(4) - 1.0 / 20.0).abs() < 1e-12);
        let cfg = ModelConfig {
            drift: linear,
            counts: det1(),
            p0: 0.7,
        };
        let report = validate_config(&cfg, 50);
        assert!(report.is_valid_model(), "{:?}", report.violations);
        assert!(report.satisfies(Scope::IidSeries), "{:?}", report.violations);
    }

    #[test]
    fn validation_is_monotone_in_horizon() {
        // Any violation reported at horizon h persists at h' >= h.
        let cfg = ModelConfig {
            drift: DriftSpec::Table {
                p: vec![0.8, 0.85, 0.7, 0.9],
            },
            counts: FrogCountSpec::DeterministicSeq {
                counts: vec![2, 1, 3],
            },
            p0: 0.3,
        };
        let small = validate_config(&cfg, 3);
        let large = validate_config(&cfg, 12);
        for v in &small.violations {
            assert!(large.violations.contains(v), "lost violation {v}");
        }
        assert!(large.violations.len() >= small.violations.len());
    }

    proptest! {
        #[test]
        fn drift_monotone_ratio_antitone(p in 0.51f64..0.99, j in 1usize..500) {
            let cfg = ModelConfig {
                drift: DriftSpec::COverLog { c: p - 0.5, n0: 2 },
                counts: FrogCountSpec::Iid(DistributionSpec::Deterministic { k: 1 }),
                p0: p,
            };
            prop_assert!(cfg.drift_at(j + 1) <= cfg.drift_at(j));
            prop_assert!(cfg.ratio_at(j + 1) >= cfg.ratio_at(j));
        }

        #[test]
        fn ratio_is_exact(p in 0.51f64..0.99) {
            let cfg = ModelConfig {
                drift: DriftSpec::Constant { p },
                counts: FrogCountSpec::Iid(DistributionSpec::Deterministic { k: 1 }),
                p0: p,
            };
            let r = cfg.ratio_at(1);
            // Exact arithmetic on the definition: at most 2 ulp apart.
            let direct = (1.0 - p) / p;
            prop_assert!((r - direct).abs() <= 2.0 * f64::EPSILON * direct);
            prop_assert!(r > 0.0 && r < 1.0);
        }
    }
}
