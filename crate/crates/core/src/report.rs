//! Machine-readable verification reports.

use serde::{Deserialize, Serialize};

/// One checked property.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    /// The inequality or identity that was checked.
    pub anchor: String,
    pub pass: bool,
    /// Worst violation margin seen; `≤ 0` means the check held everywhere.
    pub max_deviation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl CheckEntry {
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, pass: bool, max_deviation: f64) -> Self {
        CheckEntry { name: name.into(), anchor: anchor.into(), pass, max_deviation, witness: None }
    }

    pub fn with_witness(mut self, w: impl Into<String>) -> Self {
        self.witness = Some(w.into());
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub command: String,
    pub parameters: serde_json::Map<String, serde_json::Value>,
    pub checks: Vec<CheckEntry>,
}

impl EstimateReport {
    pub fn new(command: impl Into<String>) -> Self {
        EstimateReport { command: command.into(), ..Default::default() }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.parameters.insert(key.to_string(), v);
        self
    }

    pub fn push(&mut self, entry: CheckEntry) {
        self.checks.push(entry);
    }

    pub fn extend(&mut self, other: EstimateReport) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Sorts checks by name so that output is stable.
    pub fn sort(&mut self) {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Folds a sequence of margins `lhs − rhs` into a check; passes when every
/// margin is at most `slack`.
pub fn margin_check(
    name: &str,
    anchor: &str,
    margins: impl IntoIterator<Item = (f64, String)>,
    slack: f64,
) -> CheckEntry {
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    let mut n = 0usize;
    for (m, w) in margins {
        n += 1;
        if m > worst || m.is_nan() {
            worst = if m.is_nan() { f64::INFINITY } else { m };
            witness = Some(w);
        }
    }
    if n == 0 {
        worst = 0.0;
    }
    let pass = worst <= slack;
    let e = CheckEntry::new(name, anchor, pass, worst);
    match (pass, witness) {
        (false, Some(w)) => e.with_witness(w),
        _ => e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_fold() {
        let c = margin_check("x", "a ≤ b", vec![(-1.0, "p".into()), (0.5, "q".into())], 0.0);
        assert!(!c.pass);
        assert_eq!(c.witness.as_deref(), Some("q"));
        assert!(margin_check("x", "", Vec::new(), 0.0).pass);
        let mut r = EstimateReport::new("t");
        r.param("delta", 0.1).push(c);
        assert!(!r.passed());
        let back: EstimateReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
