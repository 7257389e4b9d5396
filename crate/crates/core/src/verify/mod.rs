//! Bounded, certificate-carrying checks and their replay.

mod checks;
mod replay;
pub mod suite;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use crate::copies::Status;
use crate::copies::SetDescriptor;
use crate::rational::{quad_serde, rational_serde, rational_vec_serde, Quad, Rational};
use crate::types_orbits::{Condition, QfType};

pub use checks::{
    check_ad, check_antichain, check_genericity, check_large, check_maximality_evidence, check_partition,
    check_poset, check_windows, Family,
};
pub use replay::{replay, replay_witness};

/// A single verified claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub status: Status,
    pub witnesses: Vec<Witness>,
    pub bounds: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed: Option<f64>,
}

impl Check {
    pub fn new(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            params: BTreeMap::new(),
            status: Status::Pass,
            witnesses: Vec::new(),
            bounds: BTreeMap::new(),
            elapsed: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(key.to_string(), serde_json::to_value(value).expect("plain data"));
        self
    }

    pub fn bound(mut self, key: &str, value: usize) -> Self {
        self.bounds.insert(key.to_string(), value as u64);
        self
    }

    pub fn pass(&mut self) {
        self.status = Status::Pass;
    }

    /// Records a certificate without changing the status.
    pub fn certify(&mut self, w: Witness) {
        self.witnesses.push(w);
    }

    pub fn fail(&mut self, w: Witness) {
        self.status = Status::Fail;
        self.witnesses.push(w);
    }

    pub fn fail_many(&mut self, ws: Vec<Witness>) {
        self.status = Status::Fail;
        self.witnesses.extend(ws);
    }

    /// Marks the check unknown unless it already failed.
    pub fn unknown(&mut self, ws: Vec<Witness>) {
        if self.status != Status::Fail {
            self.status = Status::UnknownAtBound;
        }
        self.witnesses.extend(ws);
    }

    pub fn timed(mut self, start: Option<Instant>) -> Self {
        self.elapsed = start.map(|t| t.elapsed().as_secs_f64());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: u32,
    pub checks: Vec<Check>,
}

impl Default for Report {
    fn default() -> Self {
        Report { tool: "uhs-lab".into(), version: 1, checks: Vec::new() }
    }
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn status(&self) -> Status {
        if self.checks.iter().any(|c| c.status == Status::Fail) {
            Status::Fail
        } else if self.checks.iter().any(|c| c.status == Status::UnknownAtBound) {
            Status::UnknownAtBound
        } else {
            Status::Pass
        }
    }

    /// 0 all pass, 1 any fail, 2 unknown without fail.
    pub fn exit_code(&self) -> i32 {
        match self.status() {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::UnknownAtBound => 2,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::UnknownAtBound => "unknown",
            };
            let params: Vec<String> = c.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            out.push_str(&format!("{status:7} {} {}", c.name, params.join(" ")));
            if let Some(t) = c.elapsed {
                out.push_str(&format!(" ({t:.3}s)"));
            }
            out.push('\n');
            if c.status != Status::Pass {
                for w in c.witnesses.iter().take(3) {
                    out.push_str(&format!("        {}\n", serde_json::to_string(w).expect("plain data")));
                }
            }
        }
        out
    }
}

/// Evidence attached to a check: certificates for passes, counterexamples
/// for failures. Each variant can be revalidated from its own fields plus
/// relation queries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    CopyFailure {
        base: Vec<usize>,
        x: usize,
        reason: String,
    },
    OrbitShortfall {
        orbit: usize,
        ty: QfType,
        found: usize,
        needed: usize,
    },
    PosetViolation {
        message: String,
    },
    Realized {
        condition: Condition,
        realizer: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<SetDescriptor>,
    },
    Unrealized {
        condition: Condition,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<SetDescriptor>,
    },
    SharedCode {
        code: usize,
        first: usize,
        second: usize,
    },
    Uncovered {
        code: usize,
    },
    Cover {
        pieces: Vec<SetDescriptor>,
        cover: usize,
    },
    OrbitHits {
        piece: SetDescriptor,
        ty: QfType,
        hits: Vec<usize>,
        needed: usize,
    },
    Disjoint {
        first: usize,
        second: usize,
        a: SetDescriptor,
        b: SetDescriptor,
        reason: String,
    },
    FiniteIntersection {
        first: usize,
        second: usize,
        a: SetDescriptor,
        b: SetDescriptor,
        codes: Vec<usize>,
    },
    IntersectionNotCopy {
        first: usize,
        second: usize,
        a: SetDescriptor,
        b: SetDescriptor,
        base: Vec<usize>,
        x: usize,
    },
    AdTerms {
        member: usize,
        #[serde(with = "quad_serde")]
        target: Quad,
        #[serde(with = "rational_vec_serde")]
        values: Vec<Rational>,
        codes: Vec<String>,
        from: usize,
        #[serde(with = "rational_serde")]
        tolerance: Rational,
    },
    AdSeparated {
        lower: usize,
        upper: usize,
        #[serde(with = "quad_serde")]
        lower_target: Quad,
        #[serde(with = "quad_serde")]
        upper_target: Quad,
        #[serde(with = "rational_serde")]
        rational: Rational,
        after: usize,
        #[serde(with = "rational_vec_serde")]
        lower_values: Vec<Rational>,
        #[serde(with = "rational_vec_serde")]
        upper_values: Vec<Rational>,
    },
    IdenticalMembers {
        first: usize,
        second: usize,
    },
    FiberHits {
        member: usize,
        fiber: usize,
        #[serde(with = "rational_vec_serde")]
        values: Vec<Rational>,
        needed: usize,
    },
    Refinement {
        seed: u64,
        member: usize,
        member_set: SetDescriptor,
        copy: SetDescriptor,
        x: usize,
        y: usize,
        between: Option<usize>,
    },
    AvoidsColumn {
        seed: u64,
        copy: SetDescriptor,
        column: u64,
    },
    LiftRefinement {
        seed: u64,
        member: usize,
        member_set: SetDescriptor,
        copy: SetDescriptor,
        points: Vec<usize>,
    },
    DiagonalIndex {
        family: String,
        m: usize,
        n: usize,
        index: u64,
        a_m: u8,
        a_n: u8,
    },
    NoEvidence {
        seed: u64,
        reason: String,
    },
}
