//! JSON schema for model configurations.
//!
//! One document describes exactly one model. Unknown keys are rejected
//! everywhere, so typos fail loudly instead of silently defaulting.
//!
//! ```json
//! {
//!   "drift":  { "kind": "constant", "p": 0.7 },
//!   "counts": { "kind": "iid", "dist": { "kind": "deterministic", "k": 1 } },
//!   "p0": 0.7
//! }
//! ```

use serde::{Deserialize, Serialize};

use frog_core::model::{
    validate_config, DriftSpec, ExtendRule, FrogCountSpec, LambdaSpec, ModelConfig,
};
use frog_core::pgf::DistributionSpec;

use crate::CliError;

/// Horizon used for validation at parse time when the caller has no better
/// one (commands re-validate at their own working range).
pub const PARSE_HORIZON: usize = 1000;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigJson {
    pub drift: DriftJson,
    pub counts: CountsJson,
    pub p0: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftJson {
    Constant {
        p: f64,
    },
    COverLog {
        #[serde(rename = "C")]
        c: f64,
        n0: usize,
    },
    HalfPlusA {
        a: Vec<f64>,
        #[serde(default)]
        extend: ExtendJson,
    },
    Table {
        p: Vec<f64>,
    },
}

#[derive(Debug, Default, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendJson {
    #[default]
    HoldLast,
    LinearInverse,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CountsJson {
    Iid { dist: DistJson },
    DeterministicSequence { k: Vec<u64> },
    PoissonSequence { lambda: LambdaJson },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistJson {
    Deterministic { k: u64 },
    Poisson { lambda: f64 },
    Geometric { q: f64 },
    Table { values: Vec<u64>, probs: Vec<f64> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaJson {
    Constant { value: f64 },
    Linear { alpha: f64, beta: f64 },
    Table { values: Vec<f64> },
}

impl From<ExtendJson> for ExtendRule {
    fn from(e: ExtendJson) -> Self {
        match e {
            ExtendJson::HoldLast => ExtendRule::HoldLast,
            ExtendJson::LinearInverse => ExtendRule::LinearInverse,
        }
    }
}

impl From<ExtendRule> for ExtendJson {
    fn from(e: ExtendRule) -> Self {
        match e {
            ExtendRule::HoldLast => ExtendJson::HoldLast,
            ExtendRule::LinearInverse => ExtendJson::LinearInverse,
        }
    }
}

impl From<ConfigJson> for ModelConfig {
    fn from(doc: ConfigJson) -> Self {
        let drift = match doc.drift {
            DriftJson::Constant { p } => DriftSpec::Constant { p },
            DriftJson::COverLog { c, n0 } => DriftSpec::COverLog { c, n0 },
            DriftJson::HalfPlusA { a, extend } => DriftSpec::HalfPlusA {
                a,
                extend: extend.into(),
            },
            DriftJson::Table { p } => DriftSpec::Table { p },
        };
        let counts = match doc.counts {
            CountsJson::Iid { dist } => FrogCountSpec::Iid(match dist {
                DistJson::Deterministic { k } => DistributionSpec::Deterministic { k },
                DistJson::Poisson { lambda } => DistributionSpec::Poisson { lambda },
                DistJson::Geometric { q } => DistributionSpec::Geometric { q },
                DistJson::Table { values, probs } => DistributionSpec::Table { values, probs },
            }),
            CountsJson::DeterministicSequence { k } => FrogCountSpec::DeterministicSeq {
                counts: k,
            },
            CountsJson::PoissonSequence { lambda } => FrogCountSpec::PoissonSeq {
                lambda: match lambda {
                    LambdaJson::Constant { value } => LambdaSpec::Constant { value },
                    LambdaJson::Linear { alpha, beta } => LambdaSpec::Linear { alpha, beta },
                    LambdaJson::Table { values } => LambdaSpec::Table { values },
                },
            },
        };
        ModelConfig {
            drift,
            counts,
            p0: doc.p0,
        }
    }
}

impl From<&ModelConfig> for ConfigJson {
    fn from(cfg: &ModelConfig) -> Self {
        let drift = match &cfg.drift {
            DriftSpec::Constant { p } => DriftJson::Constant { p: *p },
            DriftSpec::COverLog { c, n0 } => DriftJson::COverLog { c: *c, n0: *n0 },
            DriftSpec::HalfPlusA { a, extend } => DriftJson::HalfPlusA {
                a: a.clone(),
                extend: (*extend).into(),
            },
            DriftSpec::Table { p } => DriftJson::Table { p: p.clone() },
        };
        let counts = match &cfg.counts {
            FrogCountSpec::Iid(d) => CountsJson::Iid {
                dist: match d {
                    DistributionSpec::Deterministic { k } => DistJson::Deterministic { k: *k },
                    DistributionSpec::Poisson { lambda } => DistJson::Poisson { lambda: *lambda },
                    DistributionSpec::Geometric { q } => DistJson::Geometric { q: *q },
                    DistributionSpec::Table { values, probs } => DistJson::Table {
                        values: values.clone(),
                        probs: probs.clone(),
                    },
                },
            },
            FrogCountSpec::DeterministicSeq { counts } => CountsJson::DeterministicSequence {
                k: counts.clone(),
            },
            FrogCountSpec::PoissonSeq { lambda } => CountsJson::PoissonSequence {
                lambda: match lambda {
                    LambdaSpec::Constant { value } => LambdaJson::Constant { value: *value },
                    LambdaSpec::Linear { alpha, beta } => LambdaJson::Linear {
                        alpha: *alpha,
                        beta: *beta,
                    },
                    LambdaSpec::Table { values } => LambdaJson::Table {
                        values: values.clone(),
                    },
                },
            },
        };
        ConfigJson {
            drift,
            counts,
            p0: cfg.p0,
        }
    }
}

/// Parses a document without enforcing model invariants (the `validate`
/// subcommand wants to report on broken configs, not refuse to read them).
pub fn parse_config_lenient(text: &str) -> Result<ModelConfig, CliError> {
    let doc: ConfigJson =
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(doc.into())
}

/// Parses and validates a document; configs that break the base model
/// assumptions are rejected.
pub fn parse_config(text: &str) -> Result<ModelConfig, CliError> {
    let cfg = parse_config_lenient(text)?;
    let report = validate_config(&cfg, PARSE_HORIZON);
    if !report.is_valid_model() {
        return Err(CliError::InvalidConfig(
            report
                .violations
                .iter()
                .filter(|v| v.scope == frog_core::model::Scope::Model)
                .map(|v| v.to_string())
                .collect(),
        ));
    }
    Ok(cfg)
}

/// Serializes a config back to its JSON document form.
pub fn serialize_config(cfg: &ModelConfig) -> String {
    serde_json::to_string_pretty(&ConfigJson::from(cfg)).expect("config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_reference_documents() {
        let cfg = parse_config(
            r#"{"drift":{"kind":"constant","p":0.7},
                "counts":{"kind":"iid","dist":{"kind":"deterministic","k":1}},
                "p0":0.7}"#,
        )
        .unwrap();
        assert_eq!(cfg.drift, DriftSpec::Constant { p: 0.7 });
        assert_eq!(cfg.p0, 0.7);

        let cfg = parse_config(
            r#"{"drift":{"kind":"c_over_log","C":0.2,"n0":2},
                "counts":{"kind":"iid","dist":{"kind":"deterministic","k":1}},
                "p0":0.7}"#,
        )
        .unwrap();
        assert_eq!(cfg.drift, DriftSpec::COverLog { c: 0.2, n0: 2 });
        assert!((cfg.drift.p_at(9) - (0.5 + 0.2 / 9f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn rejects_subcritical_drift() {
        let err = parse_config(
            r#"{"drift":{"kind":"constant","p":0.4},
                "counts":{"kind":"iid","dist":{"kind":"deterministic","k":1}},
                "p0":0.7}"#,
        )
        .unwrap_err();
        assert!(matches!(err, CliError::InvalidConfig(_)));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = parse_config(
            r#"{"drift":{"kind":"constant","p":0.7,"typo":1},
                "counts":{"kind":"iid","dist":{"kind":"deterministic","k":1}},
                "p0":0.7}"#,
        )
        .unwrap_err();
        assert!(matches!(err, CliError::Parse(_)));
    }

    #[test]
    fn round_trips_every_kind() {
        let configs = [
            r#"{"drift":{"kind":"constant","p":0.7},"counts":{"kind":"iid","dist":{"kind":"poisson","lambda":2.0}},"p0":0.7}"#,
            r#"{"drift":{"kind":"c_over_log","C":0.45,"n0":3},"counts":{"kind":"iid","dist":{"kind":"geometric","q":0.25}},"p0":0.9}"#,
            r#"{"drift":{"kind":"half_plus_a","a":[0.3,0.2,0.1],"extend":"linear_inverse"},"counts":{"kind":"deterministic_sequence","k":[1,2,3]},"p0":0.8}"#,
            r#"{"drift":{"kind":"table","p":[0.9,0.8,0.7]},"counts":{"kind":"iid","dist":{"kind":"table","values":[1,4],"probs":[0.5,0.5]}},"p0":0.8}"#,
            r#"{"drift":{"kind":"constant","p":0.6},"counts":{"kind":"poisson_sequence","lambda":{"kind":"linear","alpha":1.0,"beta":0.0}},"p0":0.6}"#,
            r#"{"drift":{"kind":"constant","p":0.6},"counts":{"kind":"poisson_sequence","lambda":{"kind":"table","values":[1.0,2.0,2.5]}},"p0":0.6}"#,
        ];
        for text in configs {
            let cfg = parse_config(text).unwrap();
            let round = parse_config(&serialize_config(&cfg)).unwrap();
            assert_eq!(cfg, round, "{text}");
        }
    }
}
