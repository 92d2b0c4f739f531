use std::collections::BTreeMap;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

/// Tolerance sets selectable on the command line.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    #[default]
    Default,
    Strict,
}

/// Declared thresholds, one per kind of check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub clifford: f64,
    pub hermiticity: f64,
    pub beta: f64,
    pub pullback: f64,
    pub el_gap: f64,
    pub dirac_symbol: f64,
    pub pullback_symbol: f64,
    pub charge_drift: f64,
}

impl Tolerances {
    pub fn for_profile(profile: Profile) -> Self {
        let base = Self {
            clifford: 1e-12,
            hermiticity: 1e-10,
            beta: 1e-9,
            pullback: 1e-3,
            el_gap: 1e-3,
            dirac_symbol: 1e-8,
            pullback_symbol: 1e-6,
            charge_drift: 1e-6,
        };
        match profile {
            Profile::Default => base,
            Profile::Strict => Self {
                clifford: base.clifford / 10.0,
                hermiticity: base.hermiticity / 10.0,
                beta: base.beta / 10.0,
                pullback: base.pullback / 10.0,
                el_gap: base.el_gap / 10.0,
                dirac_symbol: base.dirac_symbol / 10.0,
                pullback_symbol: base.pullback_symbol / 10.0,
                charge_drift: base.charge_drift / 10.0,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// The JSON document printed by every command.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub config_hash: Option<String>,
    pub tolerance_profile: Profile,
    pub values: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub outputs: Vec<String>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, config_hash: Option<String>, profile: Profile) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash,
            tolerance_profile: profile,
            values: BTreeMap::new(),
            checks: Vec::new(),
            outputs: Vec::new(),
            passed: true,
        }
    }

    pub fn value(&mut self, key: &str, v: impl Into<Value>) {
        self.values.insert(key.into(), v.into());
    }

    /// Records `value ≤ tolerance`; NaN never passes.
    pub fn check(&mut self, name: &str, value: f64, tolerance: f64) {
        let passed = value <= tolerance;
        self.passed &= passed;
        self.checks.push(Check {
            name: name.into(),
            value,
            tolerance,
            passed,
        });
    }

    /// Whether any reported number is non-finite.
    pub fn has_non_finite(&self) -> bool {
        fn walk(v: &Value) -> bool {
            match v {
                Value::Null => true,
                Value::Array(a) => a.iter().any(walk),
                Value::Object(o) => o.values().any(walk),
                _ => false,
            }
        }
        self.values.values().any(walk) || self.checks.iter().any(|c| !c.value.is_finite())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
