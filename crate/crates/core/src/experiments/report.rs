use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Outcome of one verification check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub inputs: Value,
    /// SHA-256 of the compact JSON encoding of `inputs`.
    pub inputs_digest: String,
    pub measured: Value,
    pub predicted: Value,
    pub tolerance: Value,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>, inputs: Value) -> Self {
        let inputs_digest = digest(&inputs);
        Self {
            name: name.into(),
            inputs,
            inputs_digest,
            measured: Value::Object(Map::new()),
            predicted: Value::Object(Map::new()),
            tolerance: Value::Object(Map::new()),
            pass: true,
            notes: Vec::new(),
        }
    }

    pub fn measured(mut self, key: &str, v: impl Serialize) -> Self {
        insert(&mut self.measured, key, v);
        self
    }

    pub fn predicted(mut self, key: &str, v: impl Serialize) -> Self {
        insert(&mut self.predicted, key, v);
        self
    }

    pub fn tolerance(mut self, key: &str, v: impl Serialize) -> Self {
        insert(&mut self.tolerance, key, v);
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    /// Combine a condition into the pass flag.
    pub fn require(mut self, ok: bool) -> Self {
        self.pass &= ok;
        self
    }

    /// One-line summary.
    pub fn line(&self) -> String {
        format!("[{}] {}", if self.pass { "PASS" } else { "FAIL" }, self.name)
    }
}

fn insert(target: &mut Value, key: &str, v: impl Serialize) {
    let v = serde_json::to_value(v).unwrap_or(Value::Null);
    if let Value::Object(m) = target {
        m.insert(key.to_string(), v);
    }
}

pub fn digest(v: &Value) -> String {
    let text = serde_json::to_string(v).unwrap_or_default();
    hex::encode(Sha256::digest(text.as_bytes()))
}
