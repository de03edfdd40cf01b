//! JSON Lines reports: a header, one record per check, a summary.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn of(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub record: &'static str,
    pub check: String,
    pub anchor: &'static str,
    pub status: Status,
    pub witness: Value,
    pub budget: u64,
    pub elapsed_ms: u64,
}

#[derive(Debug)]
pub struct Report {
    header: Value,
    checks: Vec<CheckRecord>,
    started: Instant,
}

impl Report {
    pub fn new(command: &str, args: Value, digest: &str, kind: &str) -> Self {
        Report {
            header: json!({"record": "header", "command": command, "args": args, "digest": digest, "kind": kind}),
            checks: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Records a check; `elapsed_ms` counts from the previous record.
    pub fn push(&mut self, check: impl Into<String>, anchor: &'static str, ok: bool, witness: Value, budget: u64) {
        let elapsed_ms = self.started.elapsed().as_millis() as u64;
        self.started = Instant::now();
        self.checks.push(CheckRecord {
            record: "check",
            check: check.into(),
            anchor,
            status: Status::of(ok),
            witness,
            budget,
            elapsed_ms,
        });
    }

    pub fn checks(&self) -> &[CheckRecord] {
        &self.checks
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn write_to(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "{}", self.header)?;
        for c in &self.checks {
            writeln!(out, "{}", serde_json::to_string(c).expect("records serialize"))?;
        }
        let failed = self.checks.iter().filter(|c| c.status == Status::Fail).count();
        writeln!(
            out,
            "{}",
            json!({"record": "summary", "checks": self.checks.len(), "failed": failed, "status": Status::of(failed == 0)})
        )
    }
}

/// Anchor strings: the statement each check verifies.
pub mod anchors {
    pub const V_SYMMETRIC: &str = "V_n = V_n^{-1}";
    pub const V_CUBE: &str = "V_{n+1}^3 ⊆ V_n";
    pub const V_IN_U: &str = "V_n ⊆ U_n";
    pub const V_IDENTITY: &str = "e ∈ V_n";
    pub const CHAIN: &str = "Σ rho(g_i, g_{i+1}) >= rho(g_0, g_{l+1}) / 2";
    pub const D_BOUND: &str = "d(x, y) = inf over chains of Σ rho, approximated from above";
    pub const METRIC_AXIOMS: &str = "d is a left-invariant metric: d(gx, gy) = d(x, y)";
    pub const SANDWICH: &str = "{y : d(x,y) < 2^{-n-1}} ⊆ x V_n ⊆ {y : d(x,y) <= 2^{-n}}";
    pub const DENSE: &str = "the limits of the shrinking sequences are dense";
    pub const SHRINK: &str = "B_{i_{s+1}} ⊆ B_{i_s} and diam B_{i_s} <= 2^{-s}";
    pub const DENSE_MATRIX: &str = "d(α_i, α_j) is right-c.e. uniformly in i, j";
    pub const SCALING: &str = "B_δ(e, 2) ⊆ K after scaling δ by 2/r";
    pub const U_SYMMETRIC: &str = "U_r = U_r^{-1}";
    pub const U_PRODUCT: &str = "U_r U_s ⊆ U_{r+s}";
    pub const U_BALL: &str = "U_r = B_δ(e, r) for r < 2";
    pub const U_IDENTITY: &str = "e ∈ U_r";
    pub const U_UNION: &str = "⋃_r U_r = G";
    pub const U_COMPACT: &str = "U_r lies in a compact set";
    pub const U_MONOTONE: &str = "r <= s implies U_r ⊆ U_s";
    pub const PROPER_D: &str = "d(x, y) = inf{r : x^{-1} y ∈ U_r}";
    pub const SUB2: &str = "d(x, y) < 2 implies d(x, y) = δ(x, y)";
    pub const PROPER: &str = "closed bounded sets have uniformly listable compact names";
    pub const TABLE_AXIOMS: &str = "the multiplication table is associative with identity and inverses";
    pub const RECOVERY: &str = "a computable discrete group is recovered from its metric presentation";
    pub const CONGRUENCE: &str = "stage equality is a congruence that only merges classes";
    pub const COLLAPSE: &str = "after a collapse event merged cosets have distance below 2^{-10}";
    pub const CONSISTENT: &str = "operations agree modulo merged classes";
    pub const COVER: &str = "finitely many unit balls cover the space at every stage";
    pub const MONOTONE: &str = "c.e. sets only grow with the budget";
}
