//! Report assembly: stable JSON schema, human-readable rendering, and exit
//! codes.

use std::collections::BTreeMap;

use serde::Serialize;

/// How a verdict counts toward the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Positive,
    Negative,
    Undecided,
}

#[derive(Debug, Serialize)]
pub struct VerdictEntry {
    pub name: String,
    pub verdict: String,
    #[serde(skip)]
    pub outcome: Outcome,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub verdicts: Vec<VerdictEntry>,
    pub residuals: Vec<String>,
    #[serde(flatten)]
    pub data: BTreeMap<String, serde_json::Value>,
    pub timing_ms: u128,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            command: command.into(),
            inputs: BTreeMap::new(),
            verdicts: Vec::new(),
            residuals: Vec::new(),
            data: BTreeMap::new(),
            timing_ms: 0,
        }
    }

    pub fn input(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.inputs.insert(key.into(), value.into());
    }

    pub fn verdict(&mut self, name: &str, verdict: impl ToString, outcome: Outcome) {
        self.verdicts.push(VerdictEntry {
            name: name.into(),
            verdict: verdict.to_string(),
            outcome,
        });
    }

    pub fn residual(&mut self, residual: impl ToString) {
        self.residuals.push(residual.to_string());
    }

    pub fn data(&mut self, key: &str, value: serde_json::Value) {
        self.data.insert(key.into(), value);
    }

    /// Exit code: 0 all positive, 1 some negative, 2 undecided present.
    pub fn exit_code(&self) -> i32 {
        if self
            .verdicts
            .iter()
            .any(|v| v.outcome == Outcome::Negative)
        {
            return 1;
        }
        if self
            .verdicts
            .iter()
            .any(|v| v.outcome == Outcome::Undecided)
        {
            return 2;
        }
        0
    }

    pub fn render_human(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", self.command));
        for (k, v) in &self.inputs {
            match v {
                serde_json::Value::String(s) => out.push_str(&format!("  {k}: {s}\n")),
                other => out.push_str(&format!("  {k}: {other}\n")),
            }
        }
        for (k, v) in &self.data {
            out.push_str(&format!("{k}:\n"));
            match v {
                serde_json::Value::Object(map) => {
                    for (kk, vv) in map {
                        match vv {
                            serde_json::Value::String(s) => {
                                out.push_str(&format!("  {kk} = {s}\n"))
                            }
                            other => out.push_str(&format!("  {kk} = {other}\n")),
                        }
                    }
                }
                other => out.push_str(&format!("  {other}\n")),
            }
        }
        if !self.residuals.is_empty() {
            out.push_str(&format!("residuals: [{}]\n", self.residuals.join(", ")));
        }
        for v in &self.verdicts {
            out.push_str(&format!("verdict [{}]: {}\n", v.name, v.verdict));
        }
        out
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

impl From<twistsym_core::expr::Trivalent> for Outcome {
    fn from(t: twistsym_core::expr::Trivalent) -> Outcome {
        match t {
            twistsym_core::expr::Trivalent::Yes => Outcome::Positive,
            twistsym_core::expr::Trivalent::No => Outcome::Negative,
            twistsym_core::expr::Trivalent::Unknown => Outcome::Undecided,
        }
    }
}

impl From<twistsym_core::symmetry::Verdict> for Outcome {
    fn from(v: twistsym_core::symmetry::Verdict) -> Outcome {
        match v {
            twistsym_core::symmetry::Verdict::Symmetry => Outcome::Positive,
            twistsym_core::symmetry::Verdict::NotSymmetry => Outcome::Negative,
            twistsym_core::symmetry::Verdict::Undecided => Outcome::Undecided,
        }
    }
}
