use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{DistributionSpec, ExpansionFamily, GoodSequence, Model};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistributionConfig {
    Identity,
    Quadratic,
    Polynomial { coeffs: Vec<f64> },
}

impl DistributionConfig {
    pub fn build(&self) -> Result<DistributionSpec> {
        match self {
            DistributionConfig::Identity => Ok(DistributionSpec::identity()),
            DistributionConfig::Quadratic => Ok(DistributionSpec::quadratic()),
            DistributionConfig::Polynomial { coeffs } => DistributionSpec::polynomial(coeffs),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceConfig {
    Integers,
    Scaled { step: u64 },
}

impl SequenceConfig {
    pub fn build(&self) -> Result<GoodSequence> {
        match self {
            SequenceConfig::Integers => Ok(GoodSequence::integers()),
            SequenceConfig::Scaled { step } => GoodSequence::scaled(*step),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyConfig {
    Engel,
    LurothType,
}

impl FamilyConfig {
    pub fn build(&self) -> ExpansionFamily {
        match self {
            FamilyConfig::Engel => ExpansionFamily::engel(),
            FamilyConfig::LurothType => ExpansionFamily::luroth_type(),
        }
    }
}

/// `beta` is either a number or the string `"auto"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BetaChoice {
    Auto,
    Value(f64),
}

impl Serialize for BetaChoice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BetaChoice::Auto => s.serialize_str("auto"),
            BetaChoice::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for BetaChoice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct BetaVisitor;

        impl Visitor<'_> for BetaVisitor {
            type Value = BetaChoice;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive number or \"auto\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<BetaChoice, E> {
                if v == "auto" {
                    Ok(BetaChoice::Auto)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<BetaChoice, E> {
                Ok(BetaChoice::Value(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<BetaChoice, E> {
                Ok(BetaChoice::Value(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<BetaChoice, E> {
                Ok(BetaChoice::Value(v as f64))
            }
        }

        d.deserialize_any(BetaVisitor)
    }
}

fn default_eps0() -> f64 {
    0.1
}

fn default_margin() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub gamma: f64,
    pub beta: BetaChoice,
    /// `ε₀` in `r_n ≥ ⌈(1 + ε₀)A_n⌉`, used when `beta` is `"auto"`.
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    /// Extra multiplicative safety factor for `"auto"`.
    #[serde(default = "default_margin")]
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub distribution: DistributionConfig,
    pub sequence: SequenceConfig,
    pub family: FamilyConfig,
    pub plan: PlanConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            distribution: DistributionConfig::Identity,
            sequence: SequenceConfig::Integers,
            family: FamilyConfig::Engel,
            plan: PlanConfig {
                gamma: 0.4,
                beta: BetaChoice::Auto,
                eps0: default_eps0(),
                margin: default_margin(),
            },
        }
    }
}

impl ModelConfig {
    pub fn build(&self) -> Result<Model> {
        Ok(Model {
            dist: self.distribution.build()?,
            seq: self.sequence.build()?,
            family: self.family.build(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_shape() {
        let json = r#"{
            "distribution": {"kind": "polynomial", "params": {"coeffs": [0.5, 0.5]}},
            "sequence": {"kind": "scaled", "params": {"step": 2}},
            "family": {"kind": "luroth-type"},
            "plan": {"gamma": 0.3, "beta": 2.5}
        }"#;
        let cfg: ModelConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.plan.beta, BetaChoice::Value(2.5));
        assert_eq!(cfg.sequence, SequenceConfig::Scaled { step: 2 });
        cfg.build().unwrap();
        let back: ModelConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn auto_beta_round_trips() {
        let cfg = ModelConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"beta\":\"auto\""));
        let back: ModelConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_unknown_keys() {
        let json = r#"{
            "distribution": {"kind": "identity"},
            "sequence": {"kind": "integers"},
            "family": {"kind": "engel"},
            "plan": {"gamma": 0.3, "beta": "auto", "typo": 1}
        }"#;
        assert!(serde_json::from_str::<ModelConfig>(json).is_err());
        let json = json.replace(", \"typo\": 1", "").replace("engel", "sylvester");
        assert!(serde_json::from_str::<ModelConfig>(&json).is_err());
        let bad_beta = r#"{"gamma": 0.3, "beta": "often"}"#;
        assert!(serde_json::from_str::<PlanConfig>(bad_beta).is_err());
    }
}
