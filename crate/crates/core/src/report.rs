//! Verdict provenance shared by every report.

use std::collections::BTreeMap;

use serde::Serialize;

pub const SCHEMA_VERSION: &str = "1.0.0";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    VerifiedExact,
    VerifiedToBound { bound: BTreeMap<String, i64> },
    Assumed { hypothesis: String },
}

impl Provenance {
    pub fn bounded<I: IntoIterator<Item = (&'static str, i64)>>(items: I) -> Self {
        Provenance::VerifiedToBound { bound: items.into_iter().map(|(k, v)| (k.to_string(), v)).collect() }
    }

    pub fn assumed(h: impl Into<String>) -> Self {
        Provenance::Assumed { hypothesis: h.into() }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Provenance::VerifiedExact)
    }

    /// The weaker of two provenances.
    pub fn and(self, other: Provenance) -> Provenance {
        match (self, other) {
            (Provenance::Assumed { hypothesis }, _) | (_, Provenance::Assumed { hypothesis }) => {
                Provenance::Assumed { hypothesis }
            }
            (Provenance::VerifiedToBound { mut bound }, Provenance::VerifiedToBound { bound: b2 }) => {
                for (k, v) in b2 {
                    let e = bound.entry(k).or_insert(v);
                    *e = (*e).min(v);
                }
                Provenance::VerifiedToBound { bound }
            }
            (p @ Provenance::VerifiedToBound { .. }, _) | (_, p @ Provenance::VerifiedToBound { .. }) => p,
            _ => Provenance::VerifiedExact,
        }
    }
}

/// A named check result as it appears in reports.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: String,
    pub passed: bool,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, provenance: Provenance) -> Self {
        Check {
            name: name.into(),
            verdict: if passed { "holds".into() } else { "fails".into() },
            passed,
            provenance,
            detail: None,
        }
    }

    pub fn with_verdict(mut self, verdict: impl Into<String>) -> Self {
        self.verdict = verdict.into();
        self
    }

    pub fn with_detail(mut self, detail: serde_json::Value) -> Self {
        self.detail = Some(detail);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn and_takes_weaker_bound() {
        let a = Provenance::bounded([("radius", 6)]);
        let b = Provenance::bounded([("radius", 4), ("depth", 3)]);
        assert_eq!(a.and(b), Provenance::bounded([("radius", 4), ("depth", 3)]));
        assert!(Provenance::VerifiedExact.and(Provenance::VerifiedExact).is_exact());
        assert!(matches!(Provenance::VerifiedExact.and(Provenance::assumed("x")), Provenance::Assumed { .. }));
    }
}
