//! Command-line front end for the engine: normalize diagram terms, run
//! verification suites, compute morphism-space dimensions, central-element
//! matrices, and Jucys-Murphy elements.
//!
//! Exit codes: 0 on success, 1 when a verification check fails, 2 on
//! usage/parse errors, 3 when a resource bound is exceeded.  The environment
//! variable `ISOQ_MAX_DIM` caps the dimension of any evaluated matrix space
//! (default 131072).

use clap::{Parser, Subcommand};
use serde_json::json;

use isoq::algebras::{
    element_diagram, jucys_murphy, term_vanishes, AlgebraElement, AlgebraId, Backend, JmKind,
    PresentedAlgebra,
};
use isoq::diagrams::{parse_term, ObjectWord};
use isoq::functor::dimension_check;
use isoq::qrep::central_element;
use isoq::report::{combo_json, SuiteReport};
use isoq::rewrite::{normalize, normalize_affine};
use isoq::scalars::ScalarMode;

#[derive(Parser)]
#[command(
    name = "isoq",
    version,
    about = "Exact engine for isomeric diagram categories: normalization, verification suites, dimensions, central elements"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Normalize a diagram term and print its normal form.
    Normalize {
        /// Term text, e.g. "x+ ; x-" (bottom-to-top composition).
        term: String,
        /// Allow open tokens and strand decorations.
        #[arg(long)]
        affine: bool,
        /// Largest decoration label allowed in intermediate diagrams.
        #[arg(long, default_value_t = 16)]
        zebra_bound: i64,
        /// Emit JSON instead of plain text.
        #[arg(long)]
        json: bool,
    },
    /// Run a verification suite and report per-check results.
    Verify {
        /// Suite name: core, derived, affine, algebras, chiral, or central.
        suite: String,
        /// Largest matrix-realization size to test.
        #[arg(long, default_value_t = 2)]
        n: i64,
        /// Largest module tensor power for affine and chiral checks.
        #[arg(long, default_value_t = 1)]
        s: usize,
        /// Largest loop degree for central-element checks.
        #[arg(long, default_value_t = 2)]
        m: u32,
        /// Number of strands for algebra presentations and tensor powers.
        #[arg(long, default_value_t = 2)]
        r: usize,
        /// Seed recorded for reproducibility (all current checks are
        /// deterministic).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit the full JSON report instead of one line per check.
        #[arg(long)]
        json: bool,
    },
    /// Compare the expected and computed dimension of a morphism space.
    Dim {
        /// Source object word, e.g. "^^" or "^v".
        x: String,
        /// Target object word.
        y: String,
        /// Matrix-realization size (certified when strands fit in n).
        #[arg(long, default_value_t = 2)]
        n: i64,
        /// Emit JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print the matrix of a central element acting on a tensor power.
    Central {
        /// Matrix-realization size.
        #[arg(long, default_value_t = 1)]
        n: i64,
        /// Central-element degree parameter.
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Tensor power acted on.
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// Emit JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print the Jucys-Murphy elements and verify the even-odd identity.
    Jm {
        /// Number of strands.
        #[arg(long, default_value_t = 3)]
        r: usize,
        /// Also check the identity under the matrix realization at this size.
        #[arg(long)]
        n: Option<i64>,
        /// Emit JSON.
        #[arg(long)]
        json: bool,
    },
}

/// Cap on the dimension of any evaluated matrix space.
fn max_dim() -> usize {
    std::env::var("ISOQ_MAX_DIM")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1 << 17)
}

/// Checked power (2n)^k against the configured dimension cap.
fn guard_dim(n: i64, strands: usize) -> Result<(), String> {
    let base = (2 * n.max(1)) as u128;
    let mut d: u128 = 1;
    for _ in 0..strands {
        d = d.saturating_mul(base);
        if d > max_dim() as u128 {
            return Err(format!(
                "space of {strands} strands at size {n} exceeds ISOQ_MAX_DIM={}",
                max_dim()
            ));
        }
    }
    Ok(())
}

fn fail(code: i32, msg: &str) -> ! {
    eprintln!("error: {msg}");
    std::process::exit(code);
}

fn emit_report(rep: &SuiteReport, as_json: bool) -> ! {
    if as_json {
        println!("{}", rep.to_json());
    } else {
        for c in &rep.checks {
            println!("{}: {}", c.status, c.id);
        }
        println!(
            "suite {}: {} ({} checks)",
            rep.suite,
            if rep.passed { "pass" } else { "FAIL" },
            rep.checks.len()
        );
    }
    std::process::exit(if rep.passed { 0 } else { 1 });
}

fn cmd_normalize(term: String, affine: bool, zebra_bound: i64, as_json: bool) -> ! {
    let parsed = match parse_term(&term, ScalarMode::AbstractZ) {
        Ok(t) => t,
        Err(e) => fail(2, &format!("cannot parse term: {e}")),
    };
    let combo = if affine {
        normalize_affine(&parsed, zebra_bound)
    } else {
        normalize(&parsed)
    };
    let combo = match combo {
        Ok(c) => c,
        Err(e) => {
            let msg = format!("{e}");
            let code = if msg.contains("resource") || msg.contains("bound") {
                3
            } else {
                2
            };
            fail(code, &msg);
        }
    };
    if as_json {
        println!(
            "{}",
            serde_json::to_string_pretty(&combo_json(&combo)).expect("serializable")
        );
    } else if combo.is_zero() {
        println!("0");
    } else {
        for (d, c) in combo.terms.iter() {
            let term = isoq::rewrite::diagram_term(d).expect("renderable diagram");
            println!("{c} * {term}");
        }
    }
    std::process::exit(0);
}

fn run_verify(suite: &str, n: i64, s: usize, m: u32, r: usize) -> Result<SuiteReport, String> {
    guard_dim(n, 3 + s)?;
    isoq::report::run_suite(suite, n, s, m, r)
}

fn cmd_dim(x: String, y: String, n: i64, as_json: bool) -> ! {
    let xw = match ObjectWord::parse(&x) {
        Ok(w) => w,
        Err(e) => fail(2, &format!("bad source word: {e}")),
    };
    let yw = match ObjectWord::parse(&y) {
        Ok(w) => w,
        Err(e) => fail(2, &format!("bad target word: {e}")),
    };
    if let Err(e) = guard_dim(n, xw.len() + yw.len()) {
        fail(3, &e);
    }
    let rep = match dimension_check(&xw, &yw, n) {
        Ok(r) => r,
        Err(e) => fail(2, &format!("{e}")),
    };
    if as_json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "schema": isoq::report::SCHEMA_VERSION,
                "source": x,
                "target": y,
                "n": n,
                "expected": rep.expected,
                "rank": rep.rank,
                "certified": rep.certified,
                "matches": rep.matches(),
            }))
            .expect("serializable")
        );
    } else {
        println!(
            "expected {} rank {} certified {} matches {}",
            rep.expected,
            rep.rank,
            rep.certified,
            rep.matches()
        );
    }
    std::process::exit(if rep.matches() { 0 } else { 1 });
}

fn cmd_central(n: i64, m: u32, r: usize, as_json: bool) -> ! {
    if let Err(e) = guard_dim(n, r) {
        fail(3, &e);
    }
    let c = central_element(n, m, r);
    let dim = c.domain.dim();
    let mut entries = Vec::new();
    for row in 0..dim {
        for col in 0..dim {
            let v = c.get(row, col);
            if !v.is_zero() {
                entries.push((row, col, v.to_string()));
            }
        }
    }
    if as_json {
        let cells: Vec<_> = entries
            .iter()
            .map(|(r0, c0, v)| json!({ "row": r0, "col": c0, "value": v }))
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "schema": isoq::report::SCHEMA_VERSION,
                "n": n,
                "m": m,
                "r": r,
                "dim": dim,
                "entries": cells,
            }))
            .expect("serializable")
        );
    } else {
        println!("central element (n={n}, m={m}) on tensor power {r}: dim {dim}");
        for (r0, c0, v) in entries {
            println!("[{r0},{c0}] = {v}");
        }
    }
    std::process::exit(0);
}

fn cmd_jm(r: usize, n: Option<i64>, as_json: bool) -> ! {
    if r < 1 {
        fail(2, "need r >= 1");
    }
    let hc = PresentedAlgebra::new(AlgebraId::HC(r));
    let mut rep = SuiteReport::new("jm");
    let mut elements = Vec::new();
    for i in 1..=r {
        let even = match jucys_murphy(r, i, JmKind::Even) {
            Ok(e) => e,
            Err(e) => fail(2, &format!("{e}")),
        };
        let odd = jucys_murphy(r, i, JmKind::Odd).expect("index in range");
        elements.push((i, even.clone(), odd.clone()));
        // J_i + c_i J_i^odd should vanish.
        let c_i = AlgebraElement::gen(&format!("c{i}"));
        let diff = even.add(&c_i.mul(&odd));
        let term = match element_diagram(&hc, &diff) {
            Ok(t) => t,
            Err(e) => fail(2, &format!("{e}")),
        };
        let by_normalize = term_vanishes(&term, Backend::Normalize)
            .unwrap_or_else(|e| fail(2, &format!("{e}")));
        rep.push(
            format!("even element {i} equals minus token times odd element (normal form)"),
            by_normalize,
            Some(format!("J_{i} + c_{i} J_{i}^odd")),
            0,
        );
        if let Some(n) = n {
            if let Err(e) = guard_dim(n, r) {
                fail(3, &e);
            }
            let by_matrix = term_vanishes(&term, Backend::Incarnate(n))
                .unwrap_or_else(|e| fail(2, &format!("{e}")));
            rep.push(
                format!("even element {i} equals minus token times odd element (matrices, n={n})"),
                by_matrix,
                Some(format!("J_{i} + c_{i} J_{i}^odd")),
                0,
            );
        }
    }
    if as_json {
        let elts: Vec<_> = elements
            .iter()
            .map(|(i, even, odd)| {
                json!({ "i": i, "even": format!("{even}"), "odd": format!("{odd}") })
            })
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "schema": isoq::report::SCHEMA_VERSION,
                "r": r,
                "elements": elts,
                "checks": serde_json::to_value(&rep.checks).expect("serializable"),
                "passed": rep.passed,
            }))
            .expect("serializable")
        );
        std::process::exit(if rep.passed { 0 } else { 1 });
    } else {
        for (i, even, odd) in &elements {
            println!("J_{i} = {even}");
            println!("J_{i}^odd = {odd}");
        }
        emit_report(&rep, false);
    }
}

fn main() {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Normalize {
            term,
            affine,
            zebra_bound,
            json,
        } => cmd_normalize(term, affine, zebra_bound, json),
        Cmd::Verify {
            suite,
            n,
            s,
            m,
            r,
            seed: _seed,
            json,
        } => match run_verify(&suite, n, s, m, r) {
            Ok(rep) => emit_report(&rep, json),
            Err(msg) => {
                let code = if msg.contains("ISOQ_MAX_DIM") { 3 } else { 2 };
                fail(code, &msg);
            }
        },
        Cmd::Dim { x, y, n, json } => cmd_dim(x, y, n, json),
        Cmd::Central { n, m, r, json } => cmd_central(n, m, r, json),
        Cmd::Jm { r, n, json } => cmd_jm(r, n, json),
    }
}
