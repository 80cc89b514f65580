//! Comparison checks and their evaluation with multiplicative slack.

use serde::{Deserialize, Serialize};

use super::gallery::Flags;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// Beyond the slack but within twice it: attributed to numerics.
    Marginal,
    Fail,
    /// An input could not be computed.
    Uncomputable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs ≤ rhs`.
    AtMost,
    /// `lhs = rhs`.
    Equal,
}

/// A comparison, its statement and the entries it applies to.
#[derive(Debug, Clone, Copy)]
pub struct CheckDef {
    pub id: &'static str,
    pub statement: &'static str,
    pub applies: fn(&Flags) -> bool,
}

fn always(_: &Flags) -> bool {
    true
}

pub const CHECKS: [CheckDef; 11] = [
    CheckDef {
        id: "C1",
        statement: "η̄ ≤ η",
        applies: always,
    },
    CheckDef {
        id: "C2",
        statement: "1/(8δ) ≤ η̄ ≤ 2/δ",
        applies: always,
    },
    CheckDef {
        id: "C3",
        statement: "η/16 ≤ η̄",
        applies: always,
    },
    CheckDef {
        id: "C4",
        statement: "η̄ = η on twice punctured planes",
        applies: |f| f.twice_punctured,
    },
    CheckDef {
        id: "C5",
        statement: "η ≤ (K/4) η̄ when the boundary is connected",
        applies: |f| f.connected_boundary,
    },
    CheckDef {
        id: "C6",
        statement: "λ ≤ η",
        applies: always,
    },
    CheckDef {
        id: "C7",
        statement: "b/δ ≤ λ ≤ 2/δ on uniformly perfect domains",
        applies: |f| f.uniformly_perfect,
    },
    CheckDef {
        id: "C8",
        statement: "(b/2) η̄ ≤ λ ≤ 16 η̄ on uniformly perfect domains",
        applies: |f| f.uniformly_perfect,
    },
    CheckDef {
        id: "C9",
        statement: "λ_{ℂ∖{a,b}}(w) ≥ 1/(2|v|(|log|v|| + K)) / |b − a| with v = (w − a)/(b − a)",
        applies: |f| f.twice_punctured,
    },
    CheckDef {
        id: "C10",
        statement: "δ̄ = 1/δ",
        applies: always,
    },
    CheckDef {
        id: "C11",
        statement: "η and η̄ decrease as the domain grows",
        applies: always,
    },
];

pub fn definition(id: &str) -> Option<&'static CheckDef> {
    let family = id.split('-').next()?;
    CHECKS.iter().find(|c| c.id == family)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub relation: Relation,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    /// Multiplicative slack for `AtMost`, `1 + relative tolerance` for `Equal`.
    pub slack: f64,
    /// `lhs/rhs` for `AtMost`; the larger of `lhs/rhs` and `rhs/lhs` for `Equal`.
    pub ratio: Option<f64>,
    /// Combined relative error bars of the two sides.
    pub propagated_error: f64,
    pub status: Status,
}

/// Classifies `excess = ratio − 1` against the allowance `slack − 1`.
fn classify(excess: f64, slack: f64) -> Status {
    let allowance = slack - 1.0;
    if excess <= allowance {
        Status::Pass
    } else if excess <= 2.0 * allowance {
        Status::Marginal
    } else {
        Status::Fail
    }
}

fn usable(v: Option<f64>) -> Option<f64> {
    v.filter(|x| x.is_finite() && *x > 0.0)
}

/// `lhs ≤ slack · rhs`.
pub fn at_most(id: &str, lhs: Option<f64>, rhs: Option<f64>, slack: f64, error: f64) -> CheckResult {
    let ratio = usable(lhs).zip(usable(rhs)).map(|(l, r)| l / r);
    CheckResult {
        id: id.to_string(),
        relation: Relation::AtMost,
        lhs,
        rhs,
        slack,
        ratio,
        propagated_error: error,
        status: ratio.map_or(Status::Uncomputable, |q| classify(q - 1.0, slack)),
    }
}

/// `|lhs/rhs − 1| ≤ tolerance`, symmetrically.
pub fn equal(id: &str, lhs: Option<f64>, rhs: Option<f64>, tolerance: f64, error: f64) -> CheckResult {
    let ratio = usable(lhs)
        .zip(usable(rhs))
        .map(|(l, r)| (l / r).max(r / l));
    CheckResult {
        id: id.to_string(),
        relation: Relation::Equal,
        lhs,
        rhs,
        slack: 1.0 + tolerance,
        ratio,
        propagated_error: error,
        status: ratio.map_or(Status::Uncomputable, |q| classify(q - 1.0, 1.0 + tolerance)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses_follow_the_slack() {
        assert_eq!(at_most("C1", Some(1.0), Some(1.0), 1.05, 0.0).status, Status::Pass);
        assert_eq!(at_most("C1", Some(1.04), Some(1.0), 1.05, 0.0).status, Status::Pass);
        assert_eq!(at_most("C1", Some(1.08), Some(1.0), 1.05, 0.0).status, Status::Marginal);
        assert_eq!(at_most("C1", Some(1.2), Some(1.0), 1.05, 0.0).status, Status::Fail);
        assert_eq!(at_most("C1", None, Some(1.0), 1.05, 0.0).status, Status::Uncomputable);
        assert_eq!(at_most("C1", Some(f64::NAN), Some(1.0), 1.05, 0.0).status, Status::Uncomputable);
        assert_eq!(equal("C4", Some(1.0), Some(1.03), 0.04, 0.0).status, Status::Pass);
        assert_eq!(equal("C4", Some(1.07), Some(1.0), 0.04, 0.0).status, Status::Marginal);
        assert_eq!(equal("C4", Some(1.0), Some(1.1), 0.04, 0.0).status, Status::Fail);
        // slack 1 demands the inequality itself
        assert_eq!(at_most("C1", Some(1.0 + 1e-12), Some(1.0), 1.0, 0.0).status, Status::Fail);
    }

    #[test]
    fn every_check_is_defined_once() {
        for (i, c) in CHECKS.iter().enumerate() {
            assert_eq!(c.id, format!("C{}", i + 1));
        }
        assert_eq!(definition("C2-upper").unwrap().id, "C2");
        assert!(definition("C12").is_none());
    }
}
