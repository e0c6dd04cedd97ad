//! Machine-readable pass/fail reports.
//!
//! Verification suites produce a [`SuiteReport`]: a versioned, deterministic
//! JSON document with one entry per checked identity.  Failing entries carry
//! a witness string (a term or a short description) sufficient to reproduce
//! the failure.  The module also renders normal forms ([`combo_json`]) and
//! basis diagrams ([`diagram_json`]) as JSON for the command-line front end.

use serde::Serialize;
use serde_json::{json, Value};

use crate::diagrams::{BasisDiagram, End};
use crate::rewrite::LinearCombo;

/// JSON schema version stamped on every report.
pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of one checked identity.
#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    /// Stable identifier of the identity, unique within its suite.
    pub id: String,
    /// `"pass"` or `"fail"`.
    pub status: String,
    /// Reproduction data for failures; omitted when passing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    /// Wall-clock time spent on the check, in milliseconds.
    pub millis: u128,
}

/// A complete suite run: schema version, suite name, and ordered entries.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    /// Schema version of this document.
    pub schema: u32,
    /// Name of the suite that ran.
    pub suite: String,
    /// Whether every entry passed.
    pub passed: bool,
    /// Per-check entries, ordered by check id.
    pub checks: Vec<CheckEntry>,
}

impl SuiteReport {
    /// Start an empty (passing) report for the named suite.
    pub fn new(suite: impl Into<String>) -> Self {
        SuiteReport {
            schema: SCHEMA_VERSION,
            suite: suite.into(),
            passed: true,
            checks: Vec::new(),
        }
    }

    /// Record one check outcome.
    pub fn push(
        &mut self,
        id: impl Into<String>,
        passed: bool,
        witness: Option<String>,
        millis: u128,
    ) {
        if !passed {
            self.passed = false;
        }
        self.checks.push(CheckEntry {
            id: id.into(),
            status: if passed { "pass" } else { "fail" }.into(),
            witness: if passed { None } else { witness },
            millis,
        });
    }

    /// Run `f`, timing it and recording the outcome under `id`.  An `Err`
    /// from `f` is recorded as a failure with the error text as witness.
    pub fn check<E: std::fmt::Display>(
        &mut self,
        id: impl Into<String>,
        witness: impl Into<String>,
        f: impl FnOnce() -> Result<bool, E>,
    ) {
        let start = std::time::Instant::now();
        let (passed, w) = match f() {
            Ok(true) => (true, None),
            Ok(false) => (false, Some(witness.into())),
            Err(e) => (false, Some(format!("{}: {e}", witness.into()))),
        };
        self.push(id, passed, w, start.elapsed().as_millis());
    }

    /// Sort entries by id so reports are deterministic regardless of the
    /// order checks were scheduled in.
    pub fn sort(&mut self) {
        self.checks.sort_by(|a, b| a.id.cmp(&b.id));
    }

    /// Pretty-printed JSON rendering.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Run a named verification suite with the given size parameters and
/// collect the results: `n` bounds the matrix-realization size, `s` the
/// module tensor power, `m` the loop degree, and `r` the strand count for
/// presented algebras and tensor powers.  Valid names are `core`, `derived`,
/// `affine`, `algebras`, `chiral`, and `central`.
pub fn run_suite(
    suite: &str,
    n: i64,
    s: usize,
    m: u32,
    r: usize,
) -> Result<SuiteReport, String> {
    use crate::algebras::{
        milk_and_symmetry_checks, verify_derived, verify_presentation, AlgebraId, Backend,
        PresentedAlgebra,
    };
    use crate::functor::{affine_suite, central_suite, chiral_suite, core_suite, derived_suite};

    fn from_checks(suite: &str, checks: Vec<crate::functor::SuiteCheck>) -> SuiteReport {
        let mut rep = SuiteReport::new(suite);
        for c in checks {
            rep.push(c.id.clone(), c.passed, Some(c.id), 0);
        }
        rep.sort();
        rep
    }

    match suite {
        "core" => core_suite(n)
            .map(|c| from_checks("core", c))
            .map_err(|e| e.to_string()),
        "derived" => derived_suite(n)
            .map(|c| from_checks("derived", c))
            .map_err(|e| e.to_string()),
        "affine" => affine_suite(n, s, 3)
            .map(|c| from_checks("affine", c))
            .map_err(|e| e.to_string()),
        "chiral" => chiral_suite(n, s)
            .map(|c| from_checks("chiral", c))
            .map_err(|e| e.to_string()),
        "central" => central_suite(n, m, r)
            .map(|c| from_checks("central", c))
            .map_err(|e| e.to_string()),
        "algebras" => {
            let mut rep = SuiteReport::new("algebras");
            let backend = Backend::Incarnate(n);
            for id in [
                AlgebraId::HC(r),
                AlgebraId::BC(r, r.min(2)),
                AlgebraId::AHC(r),
            ] {
                let alg = PresentedAlgebra::new(id);
                for part in [
                    verify_presentation(&alg, backend).map_err(|e| e.to_string())?,
                    verify_derived(&alg, backend).map_err(|e| e.to_string())?,
                ] {
                    for e in part.entries {
                        rep.push(e.name.clone(), e.passed, Some(e.name), 0);
                    }
                }
            }
            if r >= 2 {
                let part =
                    milk_and_symmetry_checks(r, Backend::Normalize).map_err(|e| e.to_string())?;
                for e in part.entries {
                    rep.push(e.name.clone(), e.passed, Some(e.name), 0);
                }
            }
            rep.sort();
            Ok(rep)
        }
        other => Err(format!(
            "unknown suite {other:?}; expected core, derived, affine, algebras, chiral, or central"
        )),
    }
}

fn end_json(e: End) -> Value {
    match e {
        End::Bot(i) => json!({ "edge": "bottom", "index": i }),
        End::Top(j) => json!({ "edge": "top", "index": j }),
    }
}

/// JSON rendering of a basis diagram: boundary words, matching, and
/// per-string decoration labels.
pub fn diagram_json(d: &BasisDiagram) -> Value {
    let matching: Vec<Value> = d
        .strings
        .iter()
        .map(|s| {
            json!({
                "source": end_json(s.source),
                "target": end_json(s.target),
                "label": s.label,
            })
        })
        .collect();
    json!({
        "domain": d.domain.to_string(),
        "codomain": d.codomain.to_string(),
        "matching": matching,
    })
}

/// JSON rendering of a normal form: one entry per basis diagram with its
/// coefficient printed exactly.
pub fn combo_json(combo: &LinearCombo) -> Value {
    let terms: Vec<Value> = combo
        .terms
        .iter()
        .map(|(d, c)| {
            let mut v = diagram_json(d);
            v["coefficient"] = Value::String(c.to_string());
            v
        })
        .collect();
    json!({
        "schema": SCHEMA_VERSION,
        "domain": combo.domain.to_string(),
        "codomain": combo.codomain.to_string(),
        "affine": combo.affine,
        "terms": terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagrams::parse_term;
    use crate::rewrite::normalize;
    use crate::scalars::ScalarMode;

    #[test]
    fn report_passes_iff_all_entries_pass() {
        let mut r = SuiteReport::new("demo");
        r.push("a", true, None, 0);
        assert!(r.passed);
        r.push("b", false, Some("w".into()), 1);
        assert!(!r.passed);
        let text = r.to_json();
        assert!(text.contains("\"schema\": 1"));
        assert!(text.contains("\"witness\": \"w\""));
    }

    #[test]
    fn witness_dropped_on_pass() {
        let mut r = SuiteReport::new("demo");
        r.check("ok", "unused", || Ok::<bool, std::fmt::Error>(true));
        assert!(r.checks[0].witness.is_none());
        assert_eq!(r.checks[0].status, "pass");
    }

    #[test]
    fn combo_rendering_includes_matching_and_coefficient() {
        let term = parse_term("x+ ; x-", ScalarMode::AbstractZ).unwrap();
        let combo = normalize(&term).unwrap();
        let v = combo_json(&combo);
        assert_eq!(v["domain"], "^^");
        assert_eq!(v["terms"].as_array().unwrap().len(), 1);
        assert_eq!(v["terms"][0]["coefficient"], "(1)");
    }
}
