//! Machine-readable report emitted by `--json`.

use lcalg::Report;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonReport {
    pub command: String,
    pub inputs: Vec<String>,
    pub items: Vec<JsonItem>,
    pub verdict: Verdict,
    /// Dimension of a solution space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    /// Solution basis members in canonical form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
    /// Manifest produced by `build`, `split` and `transport`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonItem {
    pub condition: String,
    pub args: Vec<String>,
    pub residual: String,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn of(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl JsonReport {
    pub fn new(command: &str, inputs: &[String]) -> Self {
        JsonReport {
            command: command.to_string(),
            inputs: inputs.to_vec(),
            items: Vec::new(),
            verdict: Verdict::Pass,
            dimension: None,
            basis: None,
            manifest: None,
        }
    }

    pub fn from_report(command: &str, inputs: &[String], rep: &Report) -> Self {
        let mut out = JsonReport::new(command, inputs);
        out.items = rep
            .items
            .iter()
            .map(|i| JsonItem {
                condition: i.condition.clone(),
                args: i.args.clone(),
                residual: i.residual.to_string(),
                pass: i.passed(),
            })
            .collect();
        out.verdict = Verdict::of(rep.passed());
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Parse and check a report: unknown fields are rejected and the verdict
/// must agree with the items.
pub fn validate(text: &str) -> Result<JsonReport, String> {
    let rep: JsonReport = serde_json::from_str(text).map_err(|e| e.to_string())?;
    for item in &rep.items {
        if item.pass != (item.residual == "0") {
            return Err(format!(
                "item {} has pass = {} but residual {}",
                item.condition, item.pass, item.residual
            ));
        }
    }
    let all = rep.items.iter().all(|i| i.pass);
    if rep.verdict != Verdict::of(all) {
        return Err("verdict does not match the items".into());
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut rep = lcalg::Report::new("t");
        rep.push_scalar("c1", &["a"], lcalg::Poly::zero());
        rep.push_scalar("c2", &["a", "b"], lcalg::Poly::l());
        let j = JsonReport::from_report("check algebra", &["x".into()], &rep);
        let text = j.to_json();
        assert_eq!(validate(&text).unwrap(), j);
        assert_eq!(j.verdict, Verdict::Fail);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_verdicts() {
        let ok = r#"{"command":"c","inputs":[],"items":[],"verdict":"pass"}"#;
        assert!(validate(ok).is_ok());
        let extra = r#"{"command":"c","inputs":[],"items":[],"verdict":"pass","x":1}"#;
        assert!(validate(extra).is_err());
        let wrong = r#"{"command":"c","inputs":[],"items":[{"condition":"a","args":[],"residual":"l","pass":false}],"verdict":"pass"}"#;
        assert!(validate(wrong).is_err());
    }
}
