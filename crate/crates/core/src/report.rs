//! JSON report assembly. Every float is written as its shortest round-trip
//! decimal string; non-finite values become `null`.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct RunMeta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub instance: Option<String>,
    pub p: Option<u32>,
    pub e: Option<u32>,
    pub q: Option<u32>,
    pub rho: Option<String>,
    pub seed: u64,
    pub dft: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Verdict { name: name.into(), passed, detail: detail.into() }
    }
}

/// A report section: a name and any serializable payload.
pub struct Section {
    pub name: String,
    pub value: Value,
}

pub struct VerificationReport {
    pub meta: RunMeta,
    pub sections: Vec<Section>,
    pub verdicts: Vec<Verdict>,
}

impl VerificationReport {
    pub fn new(meta: RunMeta) -> Self {
        VerificationReport { meta, sections: Vec::new(), verdicts: Vec::new() }
    }

    pub fn add<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.sections.push(Section { name: name.into(), value: serde_json::to_value(value)? });
        Ok(())
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict::new(name, passed, detail));
    }

    /// Pass only if at least one check ran and all passed.
    pub fn passed(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.passed)
    }

    pub fn to_value(&self) -> Result<Value> {
        let mut root = Map::new();
        root.insert("schema".into(), Value::from(SCHEMA_VERSION));
        root.insert("meta".into(), serde_json::to_value(&self.meta)?);
        for s in &self.sections {
            root.insert(s.name.clone(), s.value.clone());
        }
        root.insert("verdicts".into(), serde_json::to_value(&self.verdicts)?);
        root.insert("pass".into(), Value::Bool(self.passed()));
        Ok(stringify_floats(Value::Object(root)))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_value()?)? + "\n")
    }

    /// One line per verdict.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for v in &self.verdicts {
            out.push_str(&format!("{} {}: {}\n", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail));
        }
        out.push_str(if self.passed() { "verdict: pass\n" } else { "verdict: fail\n" });
        out
    }
}

/// Replaces every non-integer JSON number by its shortest round-trip string.
pub fn stringify_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(format!("{}", n.as_f64().unwrap())),
        Value::Array(a) => Value::Array(a.into_iter().map(stringify_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, stringify_floats(v))).collect()),
        other => other,
    }
}
