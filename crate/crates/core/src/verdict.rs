//! Three-valued outcome of every analytic check.

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

/// Points (and the values of the violated quantity there) demonstrating a
/// failure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub label: String,
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub detail: Map<String, Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status")]
pub enum Verdict {
    Holds { certificate: Map<String, Value> },
    Fails { witness: Witness },
    Inconclusive { reason: String },
}

impl Verdict {
    /// `certificate` must be a JSON object.
    pub fn holds(certificate: Value) -> Verdict {
        match certificate {
            Value::Object(m) => Verdict::Holds { certificate: m },
            other => {
                let mut m = Map::new();
                m.insert("value".into(), other);
                Verdict::Holds { certificate: m }
            }
        }
    }

    pub fn fails(label: impl Into<String>, points: Vec<f64>, values: Vec<f64>) -> Verdict {
        Verdict::fails_with(label, points, values, Value::Null)
    }

    pub fn fails_with(
        label: impl Into<String>,
        points: Vec<f64>,
        values: Vec<f64>,
        detail: Value,
    ) -> Verdict {
        assert!(!points.is_empty(), "a failing verdict needs a witness point");
        let detail = match detail {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        Verdict::Fails {
            witness: Witness { label: label.into(), points, values, detail },
        }
    }

    pub fn inconclusive(reason: impl Into<String>) -> Verdict {
        Verdict::Inconclusive { reason: reason.into() }
    }

    pub fn status(&self) -> Status {
        match self {
            Verdict::Holds { .. } => Status::Holds,
            Verdict::Fails { .. } => Status::Fails,
            Verdict::Inconclusive { .. } => Status::Inconclusive,
        }
    }

    pub fn is_holds(&self) -> bool {
        self.status() == Status::Holds
    }

    pub fn is_fails(&self) -> bool {
        self.status() == Status::Fails
    }

    pub fn is_inconclusive(&self) -> bool {
        self.status() == Status::Inconclusive
    }

    pub fn certificate(&self) -> Option<&Map<String, Value>> {
        match self {
            Verdict::Holds { certificate } => Some(certificate),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Fails { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Verdict::Inconclusive { reason } => Some(reason),
            _ => None,
        }
    }

    /// One-line summary for text output.
    pub fn summary(&self) -> String {
        match self {
            Verdict::Holds { certificate } => {
                format!("Holds {}", Value::Object(certificate.clone()))
            }
            Verdict::Fails { witness } => format!(
                "Fails [{}] at x = {:?}",
                witness.label,
                &witness.points[..witness.points.len().min(4)]
            ),
            Verdict::Inconclusive { reason } => format!("Inconclusive ({reason})"),
        }
    }
}

/// Conjunction: the first failure wins, then any inconclusive, else holds
/// with the merged certificates keyed by name.
pub fn conjunction(parts: &[(&str, &Verdict)]) -> Verdict {
    if let Some((name, v)) = parts.iter().find(|(_, v)| v.is_fails()) {
        let w = v.witness().unwrap();
        let mut w = w.clone();
        w.label = format!("{name}: {}", w.label);
        return Verdict::Fails { witness: w };
    }
    if let Some((name, v)) = parts.iter().find(|(_, v)| v.is_inconclusive()) {
        return Verdict::inconclusive(format!("{name}: {}", v.reason().unwrap_or("")));
    }
    let mut m = Map::new();
    for (name, v) in parts {
        m.insert((*name).to_string(), Value::Object(v.certificate().cloned().unwrap_or_default()));
    }
    Verdict::Holds { certificate: m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    #[should_panic]
    fn failure_without_points_is_rejected() {
        Verdict::fails("nothing", vec![], vec![]);
    }

    #[test]
    fn conjunction_prefers_failure() {
        let h = Verdict::holds(json!({"C": 1}));
        let i = Verdict::inconclusive("tail");
        let f = Verdict::fails("ratio", vec![1.0], vec![2.0]);
        assert!(conjunction(&[("a", &h), ("b", &i), ("c", &f)]).is_fails());
        assert!(conjunction(&[("a", &h), ("b", &i)]).is_inconclusive());
        let all = conjunction(&[("a", &h), ("b", &h)]);
        assert_eq!(all.certificate().unwrap()["a"]["C"], json!(1));
    }

    #[test]
    fn serializes_with_status_tag() {
        let v = Verdict::fails("jump", vec![0.0], vec![2.0]);
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.starts_with(r#"{"status":"Fails""#));
    }
}
