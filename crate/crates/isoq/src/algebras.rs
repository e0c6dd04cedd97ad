//! Presented superalgebras, their diagram images, and Jucys–Murphy elements.
//!
//! Three families are provided: the walled Brauer–Clifford superalgebra
//! `BC(r, s)`, its one-sided special case `HC(r)` (Hecke–Clifford), and the
//! affine Hecke–Clifford superalgebra `AHC(r)`.  Each is described by a
//! finite relation table over formal words in named generators with
//! coefficients in ℤ[z].  Generators have diagram images — crossings,
//! tokens, dots, and a cap-over-cup turnback — and every relation can be
//! checked by mapping its two sides into the diagram category and comparing
//! either normal forms or evaluation matrices.
//!
//! The module also builds the even and odd Jucys–Murphy elements, the
//! token-dot change of generators for `AHC(r)` together with its relation
//! table, the swap automorphism exchanging tokens and dots, and the closure
//! identities expressing the under-passing decorated strands in terms of
//! Jucys–Murphy elements.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::diagrams::{boundary, Arrow, Atom, DiagError, DiagramTerm, ObjectWord};
use crate::functor::{incarnate, incarnate_affine, FunctorError};
use crate::rewrite::{normalize, normalize_affine, RewriteError};
use crate::scalars::{LaurentScalar, ScalarError, ScalarMode};

/// Errors from the presented-algebra layer.
#[derive(Debug, Error)]
pub enum AlgebraError {
    /// A generator name that does not belong to the algebra.
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    /// An index outside the allowed range.
    #[error("index out of range: {0}")]
    Index(String),
    /// A malformed element expression.
    #[error("parse error: {0}")]
    Parse(String),
    /// Underlying scalar arithmetic error.
    #[error("scalar error: {0}")]
    Scalar(#[from] ScalarError),
    /// Underlying diagram error.
    #[error("diagram error: {0}")]
    Diagram(#[from] DiagError),
    /// Underlying normalization error.
    #[error("rewrite error: {0}")]
    Rewrite(#[from] RewriteError),
    /// Underlying matrix evaluation error.
    #[error("evaluation error: {0}")]
    Functor(#[from] FunctorError),
}

/// Identifier of a presented superalgebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraId {
    /// The walled Brauer–Clifford superalgebra on `r` up and `s` down
    /// strands.
    BC(usize, usize),
    /// The Hecke–Clifford superalgebra on `r` strands (`BC(r, 0)`).
    HC(usize),
    /// The affine Hecke–Clifford superalgebra on `r` strands.
    AHC(usize),
}

impl fmt::Display for AlgebraId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraId::BC(r, s) => write!(f, "BC({r},{s})"),
            AlgebraId::HC(r) => write!(f, "HC({r})"),
            AlgebraId::AHC(r) => write!(f, "AHC({r})"),
        }
    }
}

/// A named generator with its parity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorInfo {
    /// Text name, e.g. `t1`, `t2*`, `c3`, `c1*`, `w2`, `e`.
    pub name: String,
    /// Whether the generator is odd.
    pub odd: bool,
}

/// A formal ℤ[z]-linear combination of words in generator names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraElement {
    terms: BTreeMap<Vec<String>, LaurentScalar>,
}

impl AlgebraElement {
    /// The zero element.
    pub fn zero() -> Self {
        AlgebraElement { terms: BTreeMap::new() }
    }

    /// The multiplicative unit (the empty word).
    pub fn one() -> Self {
        AlgebraElement::scalar(LaurentScalar::one(ScalarMode::AbstractZ))
    }

    /// A scalar multiple of the empty word.
    pub fn scalar(s: LaurentScalar) -> Self {
        let mut terms = BTreeMap::new();
        if !s.is_zero() {
            terms.insert(Vec::new(), s);
        }
        AlgebraElement { terms }
    }

    /// A single generator.
    pub fn gen(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(
            vec![name.to_string()],
            LaurentScalar::one(ScalarMode::AbstractZ),
        );
        AlgebraElement { terms }
    }

    /// Whether the element is the zero combination.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterate over `(word, coefficient)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (&Vec<String>, &LaurentScalar)> {
        self.terms.iter()
    }

    /// Sum of two elements.
    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (word, coeff) in &other.terms {
            let entry = terms
                .entry(word.clone())
                .or_insert_with(|| LaurentScalar::zero(ScalarMode::AbstractZ));
            *entry = entry.clone() + coeff.clone();
            if entry.is_zero() {
                terms.remove(word);
            }
        }
        AlgebraElement { terms }
    }

    /// Difference of two elements.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale_int(-1))
    }

    /// Product of two elements (word concatenation).
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = AlgebraElement::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let mut word = w1.clone();
                word.extend(w2.iter().cloned());
                let mut single = BTreeMap::new();
                single.insert(word, c1.clone() * c2.clone());
                out = out.add(&AlgebraElement { terms: single });
            }
        }
        out
    }

    /// Scale by a coefficient.
    pub fn scale(&self, s: &LaurentScalar) -> Self {
        let mut terms = BTreeMap::new();
        for (word, coeff) in &self.terms {
            let c = coeff.clone() * s.clone();
            if !c.is_zero() {
                terms.insert(word.clone(), c);
            }
        }
        AlgebraElement { terms }
    }

    /// Scale by an integer.
    pub fn scale_int(&self, k: i64) -> Self {
        self.scale(&LaurentScalar::from_int(ScalarMode::AbstractZ, k))
    }

    /// Parse an element expression: terms separated by `+`/`-`, each term a
    /// whitespace-separated product of generator names (`t1`, `t1*`, `e`,
    /// `c1`, `c1*`, `w1`) and coefficient literals (`1`, `2`, `z`, `z^2`).
    pub fn parse(text: &str) -> Result<Self, AlgebraError> {
        let mut out = AlgebraElement::zero();
        let mut sign = 1i64;
        let mut chunk = String::new();
        let mut chunks: Vec<(i64, String)> = Vec::new();
        for ch in text.chars() {
            match ch {
                '+' | '-' => {
                    if !chunk.trim().is_empty() {
                        chunks.push((sign, chunk.trim().to_string()));
                    } else if !chunks.is_empty() {
                        return Err(AlgebraError::Parse("empty term".into()));
                    }
                    chunk.clear();
                    sign = if ch == '-' { -sign } else { sign };
                    if ch == '-' && !chunks.is_empty() {
                        sign = -1;
                    } else if ch == '+' {
                        sign = 1;
                    }
                }
                _ => chunk.push(ch),
            }
        }
        if chunk.trim().is_empty() {
            if chunks.is_empty() {
                return Err(AlgebraError::Parse("empty expression".into()));
            }
        } else {
            chunks.push((sign, chunk.trim().to_string()));
        }
        for (sgn, term_text) in chunks {
            let mut term = AlgebraElement::one().scale_int(sgn);
            for factor in term_text.split_whitespace() {
                if parse_generator(factor).is_some() {
                    term = term.mul(&AlgebraElement::gen(factor));
                } else {
                    let s = LaurentScalar::parse(factor, ScalarMode::AbstractZ)
                        .map_err(|e| AlgebraError::Parse(format!("`{factor}`: {e}")))?;
                    term = term.scale(&s);
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (word, coeff)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            let cs = coeff.to_string();
            if word.is_empty() {
                write!(f, "{cs}")?;
            } else {
                if !coeff.is_one() {
                    if cs.contains(' ') {
                        write!(f, "({cs}) ")?;
                    } else {
                        write!(f, "{cs} ")?;
                    }
                }
                write!(f, "{}", word.join(" "))?;
            }
        }
        Ok(())
    }
}

/// A defining relation, stored as its two sides plus a display label.
#[derive(Clone, Debug)]
pub struct Relation {
    /// Human-readable label, e.g. `t1 t1 = z t1 + 1`.
    pub label: String,
    /// Left side.
    pub lhs: AlgebraElement,
    /// Right side.
    pub rhs: AlgebraElement,
}

/// A presented superalgebra: named parity-tagged generators and a relation
/// table.
#[derive(Clone, Debug)]
pub struct PresentedAlgebra {
    /// Which algebra this is.
    pub id: AlgebraId,
    /// Generator list.
    pub generators: Vec<GeneratorInfo>,
    /// Defining relations.
    pub relations: Vec<Relation>,
}

/// Parsed generator kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GenKind {
    T(usize),
    Ts(usize),
    C(usize),
    Cs(usize),
    W(usize),
    E,
}

fn parse_generator(name: &str) -> Option<GenKind> {
    if name == "e" {
        return Some(GenKind::E);
    }
    let (head, starred) = match name.strip_suffix('*') {
        Some(h) => (h, true),
        None => (name, false),
    };
    let mut chars = head.chars();
    let kind = chars.next()?;
    let idx: usize = chars.as_str().parse().ok()?;
    if idx == 0 {
        return None;
    }
    match (kind, starred) {
        ('t', false) => Some(GenKind::T(idx)),
        ('t', true) => Some(GenKind::Ts(idx)),
        ('c', false) => Some(GenKind::C(idx)),
        ('c', true) => Some(GenKind::Cs(idx)),
        ('w', false) => Some(GenKind::W(idx)),
        _ => None,
    }
}

fn t(i: usize) -> AlgebraElement {
    AlgebraElement::gen(&format!("t{i}"))
}

fn ts(i: usize) -> AlgebraElement {
    AlgebraElement::gen(&format!("t{i}*"))
}

fn c(i: usize) -> AlgebraElement {
    AlgebraElement::gen(&format!("c{i}"))
}

fn cs(i: usize) -> AlgebraElement {
    AlgebraElement::gen(&format!("c{i}*"))
}

fn w(i: usize) -> AlgebraElement {
    AlgebraElement::gen(&format!("w{i}"))
}

fn e_gen() -> AlgebraElement {
    AlgebraElement::gen("e")
}

fn z_elt() -> AlgebraElement {
    AlgebraElement::scalar(LaurentScalar::z_var())
}

/// Parity of an element: `Some(p)` when every word has parity `p`, `None`
/// for zero or mixed parity.
fn element_parity(alg: &PresentedAlgebra, elt: &AlgebraElement) -> Option<u8> {
    let mut parity = None;
    for (word, _) in elt.iter() {
        let mut p = 0u8;
        for name in word {
            if alg
                .generators
                .iter()
                .any(|g| &g.name == name && g.odd)
            {
                p ^= 1;
            }
        }
        match parity {
            None => parity = Some(p),
            Some(q) if q != p => return None,
            _ => {}
        }
    }
    parity
}

fn relation(label: impl Into<String>, lhs: AlgebraElement, rhs: AlgebraElement) -> Relation {
    Relation { label: label.into(), lhs, rhs }
}

/// Hecke-type relations for a chain `g_1, …, g_{count}` of crossing
/// generators and a matching token family `tok_1, …, tok_{count+1}`.
fn hecke_clifford_relations(
    rels: &mut Vec<Relation>,
    count: usize,
    g: &dyn Fn(usize) -> AlgebraElement,
    g_name: &dyn Fn(usize) -> String,
    tok: &dyn Fn(usize) -> AlgebraElement,
    tok_name: &dyn Fn(usize) -> String,
    tok_square: i64,
) {
    let strands = count + 1;
    for i in 1..=count {
        rels.push(relation(
            format!("{0} {0} = z {0} + 1", g_name(i)),
            g(i).mul(&g(i)),
            z_elt().mul(&g(i)).add(&AlgebraElement::one()),
        ));
    }
    for i in 1..count {
        rels.push(relation(
            format!("{0} {1} {0} = {1} {0} {1}", g_name(i), g_name(i + 1)),
            g(i).mul(&g(i + 1)).mul(&g(i)),
            g(i + 1).mul(&g(i)).mul(&g(i + 1)),
        ));
    }
    for i in 1..=count {
        for j in (i + 2)..=count {
            rels.push(relation(
                format!("{0} {1} = {1} {0}", g_name(i), g_name(j)),
                g(i).mul(&g(j)),
                g(j).mul(&g(i)),
            ));
        }
    }
    for i in 1..=strands {
        rels.push(relation(
            format!("{0} {0} = {1}", tok_name(i), tok_square),
            tok(i).mul(&tok(i)),
            AlgebraElement::one().scale_int(tok_square),
        ));
    }
    for i in 1..=strands {
        for j in (i + 1)..=strands {
            rels.push(relation(
                format!("{0} {1} = -{1} {0}", tok_name(i), tok_name(j)),
                tok(i).mul(&tok(j)),
                tok(j).mul(&tok(i)).scale_int(-1),
            ));
        }
    }
    for i in 1..=count {
        rels.push(relation(
            format!("{0} {1} = {2} {0}", g_name(i), tok_name(i), tok_name(i + 1)),
            g(i).mul(&tok(i)),
            tok(i + 1).mul(&g(i)),
        ));
        for j in 1..=strands {
            if j != i && j != i + 1 {
                rels.push(relation(
                    format!("{0} {1} = {1} {0}", g_name(i), tok_name(j)),
                    g(i).mul(&tok(j)),
                    tok(j).mul(&g(i)),
                ));
            }
        }
    }
}

fn bc_generators(r: usize, s: usize) -> Vec<GeneratorInfo> {
    let mut gens = Vec::new();
    for i in 1..r {
        gens.push(GeneratorInfo { name: format!("t{i}"), odd: false });
    }
    for i in 1..s {
        gens.push(GeneratorInfo { name: format!("t{i}*"), odd: false });
    }
    if r > 0 && s > 0 {
        gens.push(GeneratorInfo { name: "e".into(), odd: false });
    }
    for i in 1..=r {
        gens.push(GeneratorInfo { name: format!("c{i}"), odd: true });
    }
    for i in 1..=s {
        gens.push(GeneratorInfo { name: format!("c{i}*"), odd: true });
    }
    gens
}

fn bc_relations(r: usize, s: usize) -> Vec<Relation> {
    let mut rels = Vec::new();
    let z = z_elt();
    if r > 0 {
        hecke_clifford_relations(
            &mut rels,
            r - 1,
            &t,
            &|i| format!("t{i}"),
            &c,
            &|i| format!("c{i}"),
            -1,
        );
    }
    if s > 0 {
        hecke_clifford_relations(
            &mut rels,
            s - 1,
            &ts,
            &|i| format!("t{i}*"),
            &cs,
            &|i| format!("c{i}*"),
            1,
        );
    }
    for i in 1..r {
        for j in 1..=s {
            rels.push(relation(
                format!("t{i} c{j}* = c{j}* t{i}"),
                t(i).mul(&cs(j)),
                cs(j).mul(&t(i)),
            ));
        }
    }
    for i in 1..s {
        for j in 1..=r {
            rels.push(relation(
                format!("t{i}* c{j} = c{j} t{i}*"),
                ts(i).mul(&c(j)),
                c(j).mul(&ts(i)),
            ));
        }
    }
    if r > 0 && s > 0 {
        let e = e_gen();
        rels.push(relation("e e = 0", e.mul(&e), AlgebraElement::zero()));
        if r >= 2 {
            rels.push(relation(
                format!("e t{0} e = e", r - 1),
                e.mul(&t(r - 1)).mul(&e),
                e.clone(),
            ));
            for j in 1..r - 1 {
                rels.push(relation(
                    format!("e t{j} = t{j} e"),
                    e.mul(&t(j)),
                    t(j).mul(&e),
                ));
            }
        }
        if s >= 2 {
            rels.push(relation(
                "e t1* e = e",
                e.mul(&ts(1)).mul(&e),
                e.clone(),
            ));
            for j in 2..s {
                rels.push(relation(
                    format!("e t{j}* = t{j}* e"),
                    e.mul(&ts(j)),
                    ts(j).mul(&e),
                ));
            }
        }
        rels.push(relation(
            format!("c{r} e = c1* e"),
            c(r).mul(&e),
            cs(1).mul(&e),
        ));
        rels.push(relation(
            format!("e c{r} = e c1*"),
            e.mul(&c(r)),
            e.mul(&cs(1)),
        ));
        for j in 1..r {
            rels.push(relation(
                format!("c{j} e = e c{j}"),
                c(j).mul(&e),
                e.mul(&c(j)),
            ));
        }
        for j in 2..=s {
            rels.push(relation(
                format!("c{j}* e = e c{j}*"),
                cs(j).mul(&e),
                e.mul(&cs(j)),
            ));
        }
        if r >= 2 && s >= 2 {
            let tinv = t(r - 1).sub(&z);
            let half = tinv.mul(&ts(1)).mul(&e).mul(&ts(1)).mul(&tinv);
            rels.push(relation(
                format!(
                    "e (t{0} - z) t1* e t1* (t{0} - z) = (t{0} - z) t1* e t1* (t{0} - z) e",
                    r - 1
                ),
                e.mul(&half),
                half.mul(&e),
            ));
        }
        rels.push(relation(
            format!("e c{r} e = 0"),
            e.mul(&c(r)).mul(&e),
            AlgebraElement::zero(),
        ));
    }
    rels
}

fn ahc_generators(r: usize) -> Vec<GeneratorInfo> {
    let mut gens = Vec::new();
    for i in 1..r {
        gens.push(GeneratorInfo { name: format!("t{i}"), odd: false });
    }
    for i in 1..=r {
        gens.push(GeneratorInfo { name: format!("c{i}"), odd: true });
    }
    for i in 1..=r {
        gens.push(GeneratorInfo { name: format!("w{i}"), odd: true });
    }
    gens
}

fn ahc_relations(r: usize) -> Vec<Relation> {
    let mut rels = Vec::new();
    if r == 0 {
        return rels;
    }
    hecke_clifford_relations(
        &mut rels,
        r - 1,
        &t,
        &|i| format!("t{i}"),
        &c,
        &|i| format!("c{i}"),
        -1,
    );
    for i in 1..=r {
        rels.push(relation(
            format!("w{i} w{i} = -1"),
            w(i).mul(&w(i)),
            AlgebraElement::one().scale_int(-1),
        ));
    }
    for i in 1..=r {
        for j in (i + 1)..=r {
            rels.push(relation(
                format!("w{i} w{j} = -w{j} w{i}"),
                w(i).mul(&w(j)),
                w(j).mul(&w(i)).scale_int(-1),
            ));
        }
    }
    for i in 1..r {
        rels.push(relation(
            format!("t{i} w{0} = w{i} t{i}", i + 1),
            t(i).mul(&w(i + 1)),
            w(i).mul(&t(i)),
        ));
        for j in 1..=r {
            if j != i && j != i + 1 {
                rels.push(relation(
                    format!("t{i} w{j} = w{j} t{i}"),
                    t(i).mul(&w(j)),
                    w(j).mul(&t(i)),
                ));
            }
        }
    }
    rels
}

impl PresentedAlgebra {
    /// Build the named algebra with its full relation table.
    pub fn new(id: AlgebraId) -> Self {
        let (generators, relations) = match id {
            AlgebraId::BC(r, s) => (bc_generators(r, s), bc_relations(r, s)),
            AlgebraId::HC(r) => (bc_generators(r, 0), bc_relations(r, 0)),
            AlgebraId::AHC(r) => (ahc_generators(r), ahc_relations(r)),
        };
        let alg = PresentedAlgebra { id, generators, relations };
        for rel in &alg.relations {
            let lp = element_parity(&alg, &rel.lhs);
            let rp = element_parity(&alg, &rel.rhs);
            debug_assert!(
                lp.is_none() || rp.is_none() || lp == rp,
                "relation sides have unequal parity: {}",
                rel.label
            );
        }
        alg
    }

    /// Whether `name` is a generator of this algebra.
    pub fn has_generator(&self, name: &str) -> bool {
        self.generators.iter().any(|g| g.name == name)
    }

    /// The object word the algebra acts on.
    pub fn object(&self) -> ObjectWord {
        match self.id {
            AlgebraId::BC(r, s) => {
                let mut word = vec![Arrow::Up; r];
                word.extend(vec![Arrow::Down; s]);
                ObjectWord(word)
            }
            AlgebraId::HC(r) | AlgebraId::AHC(r) => ObjectWord::up_pow(r),
        }
    }
}

fn up_id(k: usize) -> Option<DiagramTerm> {
    if k == 0 {
        None
    } else {
        Some(DiagramTerm::atom(Atom::Id(ObjectWord::up_pow(k))))
    }
}

fn down_id(k: usize) -> Option<DiagramTerm> {
    if k == 0 {
        None
    } else {
        Some(DiagramTerm::atom(Atom::Id(ObjectWord(vec![Arrow::Down; k]))))
    }
}

fn tensor_row(parts: Vec<Option<DiagramTerm>>) -> DiagramTerm {
    let mut out: Option<DiagramTerm> = None;
    for part in parts.into_iter().flatten() {
        out = Some(match out {
            None => part,
            Some(acc) => acc.beside(part),
        });
    }
    out.unwrap_or_else(|| DiagramTerm::atom(Atom::Id(ObjectWord::unit())))
}

/// The diagram image of a single generator.
///
/// For `BC(r, s)` and `HC(r)` the strands are numbered left to right:
/// `t_i` is a positive crossing of up strands `i, i+1`, `t*_i` a positive
/// crossing of down strands, `e` the cap-over-cup turnback at the wall,
/// `c_i`/`c*_i` closed tokens.  For `AHC(r)` the strands are numbered right
/// to left and the crossing image is the negated negative crossing, with
/// `c_i` a closed token and `w_i` an open token on the `i`-th strand from
/// the right.
pub fn generator_diagram(
    alg: &PresentedAlgebra,
    gen: &str,
) -> Result<DiagramTerm, AlgebraError> {
    if !alg.has_generator(gen) {
        return Err(AlgebraError::UnknownGenerator(gen.to_string()));
    }
    let kind = parse_generator(gen)
        .ok_or_else(|| AlgebraError::UnknownGenerator(gen.to_string()))?;
    match alg.id {
        AlgebraId::BC(r, _) | AlgebraId::HC(r) => {
            let s = if let AlgebraId::BC(_, s) = alg.id { s } else { 0 };
            let term = match kind {
                GenKind::T(i) => tensor_row(vec![
                    up_id(i - 1),
                    Some(DiagramTerm::atom(Atom::UpCrossPos)),
                    up_id(r - i - 1),
                    down_id(s),
                ]),
                GenKind::Ts(i) => tensor_row(vec![
                    up_id(r),
                    down_id(i - 1),
                    Some(DiagramTerm::atom(Atom::DownCrossPos)),
                    down_id(s - i - 1),
                ]),
                GenKind::E => tensor_row(vec![
                    up_id(r - 1),
                    Some(
                        DiagramTerm::atom(Atom::CapR).then(DiagramTerm::atom(Atom::CupL)),
                    ),
                    down_id(s - 1),
                ]),
                GenKind::C(i) => tensor_row(vec![
                    up_id(i - 1),
                    Some(DiagramTerm::atom(Atom::Tok)),
                    up_id(r - i),
                    down_id(s),
                ]),
                GenKind::Cs(i) => tensor_row(vec![
                    up_id(r),
                    down_id(i - 1),
                    Some(DiagramTerm::atom(Atom::TokV)),
                    down_id(s - i),
                ]),
                GenKind::W(_) => {
                    return Err(AlgebraError::UnknownGenerator(gen.to_string()))
                }
            };
            Ok(term)
        }
        AlgebraId::AHC(r) => {
            let term = match kind {
                GenKind::T(i) => tensor_row(vec![
                    up_id(r - i - 1),
                    Some(DiagramTerm::atom(Atom::UpCrossNeg)),
                    up_id(i - 1),
                ])
                .scaled(LaurentScalar::from_int(ScalarMode::AbstractZ, -1)),
                GenKind::C(i) => tensor_row(vec![
                    up_id(r - i),
                    Some(DiagramTerm::atom(Atom::Tok)),
                    up_id(i - 1),
                ]),
                GenKind::W(i) => tensor_row(vec![
                    up_id(r - i),
                    Some(DiagramTerm::atom(Atom::Dot)),
                    up_id(i - 1),
                ]),
                _ => return Err(AlgebraError::UnknownGenerator(gen.to_string())),
            };
            Ok(term)
        }
    }
}

/// The diagram term of a whole element: each word becomes a vertical
/// composite of generator images (rightmost factor at the bottom) and the
/// words are summed with their coefficients.
pub fn element_diagram(
    alg: &PresentedAlgebra,
    elt: &AlgebraElement,
) -> Result<DiagramTerm, AlgebraError> {
    let object = alg.object();
    let identity = DiagramTerm::atom(Atom::Id(object));
    let mut out: Option<DiagramTerm> = None;
    for (word, coeff) in elt.iter() {
        let mut prod: Option<DiagramTerm> = None;
        for name in word.iter().rev() {
            let g = generator_diagram(alg, name)?;
            prod = Some(match prod {
                None => g,
                Some(acc) => acc.then(g),
            });
        }
        let term = prod.unwrap_or_else(|| identity.clone()).scaled(coeff.clone());
        out = Some(match out {
            None => term,
            Some(acc) => DiagramTerm::Sum(Box::new(acc), Box::new(term)),
        });
    }
    Ok(out.unwrap_or_else(|| {
        identity.scaled(LaurentScalar::zero(ScalarMode::AbstractZ))
    }))
}

/// Evaluation backend for relation checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Compare normal forms of diagram terms.
    Normalize,
    /// Compare evaluation matrices at size `n`; terms with open decorations
    /// are evaluated with one module strand.
    Incarnate(i64),
    /// Compare evaluation matrices at size `n` with `s` module strands.
    IncarnateAffine(i64, usize),
}

fn term_has_open_decorations(term: &DiagramTerm) -> bool {
    match term {
        DiagramTerm::Atom(a) => matches!(
            a,
            Atom::Dot | Atom::DotV | Atom::Zebra(_) | Atom::ZebraV(_)
        ),
        DiagramTerm::VComp { bottom, top } => {
            term_has_open_decorations(bottom) || term_has_open_decorations(top)
        }
        DiagramTerm::HTensor { left, right } => {
            term_has_open_decorations(left) || term_has_open_decorations(right)
        }
        DiagramTerm::ScalarMul(_, inner) => term_has_open_decorations(inner),
        DiagramTerm::Sum(a, b) => {
            term_has_open_decorations(a) || term_has_open_decorations(b)
        }
    }
}

fn term_decoration_weight(term: &DiagramTerm) -> i64 {
    match term {
        DiagramTerm::Atom(a) => match a {
            Atom::Tok | Atom::TokV | Atom::Dot | Atom::DotV => 1,
            Atom::Zebra(k) | Atom::ZebraV(k) => k.abs(),
            _ => 0,
        },
        DiagramTerm::VComp { bottom, top } => {
            term_decoration_weight(bottom) + term_decoration_weight(top)
        }
        DiagramTerm::HTensor { left, right } => {
            term_decoration_weight(left) + term_decoration_weight(right)
        }
        DiagramTerm::ScalarMul(_, inner) => term_decoration_weight(inner),
        DiagramTerm::Sum(a, b) => {
            term_decoration_weight(a).max(term_decoration_weight(b))
        }
    }
}

/// Whether `term` maps to zero under the chosen backend.
pub fn term_vanishes(term: &DiagramTerm, backend: Backend) -> Result<bool, AlgebraError> {
    boundary(term)?;
    match backend {
        Backend::Normalize => {
            if term_has_open_decorations(term) {
                let bound = term_decoration_weight(term) + 2;
                Ok(normalize_affine(term, bound)?.is_zero())
            } else {
                Ok(normalize(term)?.is_zero())
            }
        }
        Backend::Incarnate(n) => {
            if term_has_open_decorations(term) {
                Ok(incarnate_affine(term, n, 1)?.is_zero())
            } else {
                Ok(incarnate(term, n)?.is_zero())
            }
        }
        Backend::IncarnateAffine(n, s) => Ok(incarnate_affine(term, n, s)?.is_zero()),
    }
}

fn element_vanishes(
    alg: &PresentedAlgebra,
    elt: &AlgebraElement,
    backend: Backend,
) -> Result<bool, AlgebraError> {
    let term = element_diagram(alg, elt)?;
    term_vanishes(&term, backend)
}

/// One pass/fail entry of a check report.
#[derive(Clone, Debug)]
pub struct CheckEntry {
    /// What was checked.
    pub name: String,
    /// Whether it held.
    pub passed: bool,
}

/// A list of named pass/fail results.
#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    /// Individual results.
    pub entries: Vec<CheckEntry>,
}

impl CheckReport {
    /// Append one entry.
    pub fn push(&mut self, name: impl Into<String>, passed: bool) {
        self.entries.push(CheckEntry { name: name.into(), passed });
    }

    /// Whether every entry passed.
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    /// Names of failing entries.
    pub fn failures(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| !e.passed)
            .map(|e| e.name.as_str())
            .collect()
    }
}

/// Check every defining relation of `alg` under the chosen backend.
pub fn verify_presentation(
    alg: &PresentedAlgebra,
    backend: Backend,
) -> Result<CheckReport, AlgebraError> {
    let mut report = CheckReport::default();
    for rel in &alg.relations {
        let diff = rel.lhs.sub(&rel.rhs);
        let passed = element_vanishes(alg, &diff, backend)?;
        report.push(format!("{}: {}", alg.id, rel.label), passed);
    }
    Ok(report)
}

/// Check consequences of the relations that are used elsewhere: the
/// token–crossing exchange rewritten to the other side, its open-token
/// analogue, and commutation of the two crossing families across the wall.
pub fn verify_derived(
    alg: &PresentedAlgebra,
    backend: Backend,
) -> Result<CheckReport, AlgebraError> {
    let mut report = CheckReport::default();
    let z = z_elt();
    match alg.id {
        AlgebraId::BC(r, s) => {
            for i in 1..r {
                let lhs = c(i).mul(&t(i));
                let rhs = t(i)
                    .mul(&c(i + 1))
                    .add(&z.mul(&c(i).sub(&c(i + 1))));
                report.push(
                    format!("{}: c{i} t{i} = t{i} c{} + z(c{i} - c{})", alg.id, i + 1, i + 1),
                    element_vanishes(alg, &lhs.sub(&rhs), backend)?,
                );
            }
            for i in 1..r {
                for j in 1..s {
                    let diff = t(i).mul(&ts(j)).sub(&ts(j).mul(&t(i)));
                    report.push(
                        format!("{}: t{i} t{j}* = t{j}* t{i}", alg.id),
                        element_vanishes(alg, &diff, backend)?,
                    );
                }
            }
        }
        AlgebraId::HC(r) => {
            for i in 1..r {
                let lhs = c(i).mul(&t(i));
                let rhs = t(i)
                    .mul(&c(i + 1))
                    .add(&z.mul(&c(i).sub(&c(i + 1))));
                report.push(
                    format!("{}: c{i} t{i} = t{i} c{} + z(c{i} - c{})", alg.id, i + 1, i + 1),
                    element_vanishes(alg, &lhs.sub(&rhs), backend)?,
                );
            }
        }
        AlgebraId::AHC(r) => {
            for i in 1..r {
                let lhs = c(i).mul(&t(i));
                let rhs = t(i)
                    .mul(&c(i + 1))
                    .add(&z.mul(&c(i).sub(&c(i + 1))));
                report.push(
                    format!("{}: c{i} t{i} = t{i} c{} + z(c{i} - c{})", alg.id, i + 1, i + 1),
                    element_vanishes(alg, &lhs.sub(&rhs), backend)?,
                );
                let lhs = t(i).mul(&w(i));
                let rhs = w(i + 1)
                    .mul(&t(i))
                    .add(&z.mul(&w(i).sub(&w(i + 1))));
                report.push(
                    format!("{}: t{i} w{i} = w{} t{i} + z(w{i} - w{})", alg.id, i + 1, i + 1),
                    element_vanishes(alg, &lhs.sub(&rhs), backend)?,
                );
            }
        }
    }
    Ok(report)
}

/// Kind of Jucys–Murphy element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JmKind {
    /// The even recursion `J_1 = 1`, `J_i = (t_{i-1} - z c_{i-1} c_i) J_{i-1} t_{i-1}`.
    Even,
    /// The odd word `J_i = t_{i-1}⁻¹ ⋯ t_1⁻¹ c_1 t_1 ⋯ t_{i-1}` with
    /// `t_j⁻¹ = t_j - z`, and `J_1 = c_1`.
    Odd,
}

/// The `i`-th Jucys–Murphy element of `HC(r)`.
pub fn jucys_murphy(r: usize, i: usize, kind: JmKind) -> Result<AlgebraElement, AlgebraError> {
    if i < 1 || i > r {
        return Err(AlgebraError::Index(format!("J_{i} in HC({r})")));
    }
    let z = z_elt();
    match kind {
        JmKind::Even => {
            let mut jm = AlgebraElement::one();
            for k in 2..=i {
                let head = t(k - 1).sub(&z.mul(&c(k - 1)).mul(&c(k)));
                jm = head.mul(&jm).mul(&t(k - 1));
            }
            Ok(jm)
        }
        JmKind::Odd => {
            let mut jm = c(1);
            for k in 2..=i {
                let tinv = t(k - 1).sub(&z);
                jm = tinv.mul(&jm).mul(&t(k - 1));
            }
            Ok(jm)
        }
    }
}

/// Apply the swap automorphism of `AHC(r)`: closed and open tokens are
/// exchanged and each crossing generator maps to the negated inverse
/// crossing, `t_j ↦ z - t_j`.
pub fn swap_automorphism(elt: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
    let z = z_elt();
    let mut out = AlgebraElement::zero();
    for (word, coeff) in elt.iter() {
        let mut prod = AlgebraElement::scalar(coeff.clone());
        for name in word {
            let image = match parse_generator(name.as_str()) {
                Some(GenKind::T(j)) => z.sub(&t(j)),
                Some(GenKind::C(j)) => w(j),
                Some(GenKind::W(j)) => c(j),
                _ => return Err(AlgebraError::UnknownGenerator(name.clone())),
            };
            prod = prod.mul(&image);
        }
        out = out.add(&prod);
    }
    Ok(out)
}

/// The under-passing decorated strand on `r` up strands: the `i`-th strand
/// from the right swings out to the far right underneath the strands to its
/// right, carries a closed token at the turning point, and comes back
/// underneath them.  With `zebra = true`, a second closed token is added at
/// the top of the strand.
pub fn under_pass_diagram(r: usize, i: usize, zebra: bool) -> Result<DiagramTerm, AlgebraError> {
    if i < 1 || i > r {
        return Err(AlgebraError::Index(format!("strand {i} of {r}")));
    }
    let slot = |j: usize, a: Atom| {
        tensor_row(vec![up_id(j), Some(DiagramTerm::atom(a)), up_id(r - j - 2)])
    };
    let tok_at = |p: usize| {
        tensor_row(vec![up_id(p), Some(DiagramTerm::atom(Atom::Tok)), up_id(r - p - 1)])
    };
    let p0 = r - i;
    let mut term = if p0 == r - 1 {
        tok_at(r - 1)
    } else {
        let mut acc = slot(p0, Atom::UpCrossNeg);
        for j in p0 + 1..r - 1 {
            acc = acc.then(slot(j, Atom::UpCrossNeg));
        }
        acc = acc.then(tok_at(r - 1));
        for j in (p0..r - 1).rev() {
            acc = acc.then(slot(j, Atom::UpCrossPos));
        }
        acc
    };
    if zebra {
        term = term.then(tok_at(p0));
    }
    Ok(term)
}

/// Checks around the token-dot change of generators of `AHC(r)` and its
/// symmetries:
///
/// - with `x_i := c_i w_i` (and `x_i⁻¹ = w_i c_i`), the five exchange
///   relation families of the polynomial presentation;
/// - images of every defining relation under the swap automorphism;
/// - the even Jucys–Murphy elements as token times odd ones, `J_i = -c_i J_i^odd`;
/// - the closure identities: the under-passing dotted strand equals the
///   image of `J_i^odd`, and its token-topped variant equals `-J_i`;
/// - (informational) pairwise commutation of the even Jucys–Murphy elements.
pub fn milk_and_symmetry_checks(
    r: usize,
    backend: Backend,
) -> Result<CheckReport, AlgebraError> {
    if r < 2 {
        return Err(AlgebraError::Index(format!("need r >= 2, got {r}")));
    }
    let ahc = PresentedAlgebra::new(AlgebraId::AHC(r));
    let mut report = CheckReport::default();
    let z = z_elt();
    let x = |i: usize| c(i).mul(&w(i));
    let xinv = |i: usize| w(i).mul(&c(i));
    for i in 1..=r {
        report.push(
            format!("x{i} x{i}^-1 = 1"),
            element_vanishes(
                &ahc,
                &x(i).mul(&xinv(i)).sub(&AlgebraElement::one()),
                backend,
            )?,
        );
    }
    for i in 1..r {
        let lhs = t(i).mul(&x(i));
        let rhs = x(i + 1)
            .mul(&t(i))
            .sub(&z.mul(&x(i + 1).sub(&c(i).mul(&c(i + 1)).mul(&x(i)))));
        report.push(
            format!("t{i} x{i} = x{0} t{i} - z(x{0} - c{i} c{0} x{i})", i + 1),
            element_vanishes(&ahc, &lhs.sub(&rhs), backend)?,
        );
        let lhs = t(i).mul(&x(i + 1));
        let rhs = x(i).mul(&t(i)).add(
            &z.mul(&AlgebraElement::one().add(&c(i).mul(&c(i + 1))))
                .mul(&x(i + 1)),
        );
        report.push(
            format!("t{i} x{0} = x{i} t{i} + z(1 + c{i} c{0}) x{0}", i + 1),
            element_vanishes(&ahc, &lhs.sub(&rhs), backend)?,
        );
        for j in 1..=r {
            if j != i && j != i + 1 {
                report.push(
                    format!("t{i} x{j} = x{j} t{i}"),
                    element_vanishes(
                        &ahc,
                        &t(i).mul(&x(j)).sub(&x(j).mul(&t(i))),
                        backend,
                    )?,
                );
            }
        }
    }
    for i in 1..=r {
        report.push(
            format!("c{i} x{i} = x{i}^-1 c{i}"),
            element_vanishes(
                &ahc,
                &c(i).mul(&x(i)).sub(&xinv(i).mul(&c(i))),
                backend,
            )?,
        );
    }
    for i in 1..=r {
        for j in (i + 1)..=r {
            report.push(
                format!("x{i} x{j} = x{j} x{i}"),
                element_vanishes(&ahc, &x(i).mul(&x(j)).sub(&x(j).mul(&x(i))), backend)?,
            );
        }
    }
    for rel in &ahc.relations {
        let image = swap_automorphism(&rel.lhs.sub(&rel.rhs))?;
        report.push(
            format!("swap image of: {}", rel.label),
            element_vanishes(&ahc, &image, backend)?,
        );
    }
    for i in 1..=r {
        let jm = jucys_murphy(r, i, JmKind::Even)?;
        let jm_odd = jucys_murphy(r, i, JmKind::Odd)?;
        report.push(
            format!("J{i} = -c{i} J{i}^odd"),
            element_vanishes(&ahc, &jm.add(&c(i).mul(&jm_odd)), backend)?,
        );
    }
    for i in 1..=r {
        let jm_odd = element_diagram(&ahc, &jucys_murphy(r, i, JmKind::Odd)?)?;
        let lhs = under_pass_diagram(r, i, false)?;
        let diff = DiagramTerm::Sum(
            Box::new(lhs),
            Box::new(jm_odd.scaled(LaurentScalar::from_int(ScalarMode::AbstractZ, -1))),
        );
        report.push(
            format!("under-passing dotted strand {i} closes to J{i}^odd"),
            term_vanishes(&diff, backend)?,
        );
        let jm = element_diagram(&ahc, &jucys_murphy(r, i, JmKind::Even)?)?;
        let lhs = under_pass_diagram(r, i, true)?;
        let diff = DiagramTerm::Sum(Box::new(lhs), Box::new(jm));
        report.push(
            format!("token-topped under-passing strand {i} closes to -J{i}"),
            term_vanishes(&diff, backend)?,
        );
    }
    for i in 1..=r {
        for j in (i + 1)..=r {
            let ji = jucys_murphy(r, i, JmKind::Even)?;
            let jj = jucys_murphy(r, j, JmKind::Even)?;
            report.push(
                format!("extra: J{i} J{j} = J{j} J{i}"),
                element_vanishes(&ahc, &ji.mul(&jj).sub(&jj.mul(&ji)), backend)?,
            );
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagrams::parse_term;
    use crate::rewrite::LinearCombo;

    fn combo(term: &DiagramTerm) -> LinearCombo {
        if term_has_open_decorations(term) {
            normalize_affine(term, term_decoration_weight(term) + 2).unwrap()
        } else {
            normalize(term).unwrap()
        }
    }

    #[test]
    fn crossing_image_is_padded_positive_crossing() {
        let alg = PresentedAlgebra::new(AlgebraId::BC(2, 1));
        let got = generator_diagram(&alg, "t1").unwrap();
        let want = parse_term("x+ | id(v)", ScalarMode::AbstractZ).unwrap();
        assert_eq!(combo(&got), combo(&want));
    }

    #[test]
    fn turnback_image_matches_cap_over_cup() {
        let alg = PresentedAlgebra::new(AlgebraId::BC(1, 1));
        let got = generator_diagram(&alg, "e").unwrap();
        let want = parse_term("capR ; cupL", ScalarMode::AbstractZ).unwrap();
        assert_eq!(combo(&got), combo(&want));
    }

    #[test]
    fn reversed_numbering_puts_low_indices_on_the_right() {
        let alg = PresentedAlgebra::new(AlgebraId::AHC(2));
        let got = generator_diagram(&alg, "w2").unwrap();
        let want = parse_term("dot | id(^)", ScalarMode::AbstractZ).unwrap();
        assert_eq!(combo(&got), combo(&want));
    }

    #[test]
    fn unknown_generators_are_rejected() {
        let alg = PresentedAlgebra::new(AlgebraId::HC(2));
        assert!(matches!(
            generator_diagram(&alg, "t5"),
            Err(AlgebraError::UnknownGenerator(_))
        ));
        assert!(matches!(
            generator_diagram(&alg, "w1"),
            Err(AlgebraError::UnknownGenerator(_))
        ));
    }

    #[test]
    fn walled_presentations_pass_under_normal_forms() {
        for (r, s) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            let alg = PresentedAlgebra::new(AlgebraId::BC(r, s));
            let report = verify_presentation(&alg, Backend::Normalize).unwrap();
            assert!(report.all_passed(), "failures: {:?}", report.failures());
            let derived = verify_derived(&alg, Backend::Normalize).unwrap();
            assert!(derived.all_passed(), "failures: {:?}", derived.failures());
        }
    }

    #[test]
    fn walled_presentation_passes_under_matrices() {
        let alg = PresentedAlgebra::new(AlgebraId::BC(2, 1));
        let report = verify_presentation(&alg, Backend::Incarnate(2)).unwrap();
        assert!(report.all_passed(), "failures: {:?}", report.failures());
    }

    #[test]
    fn one_sided_presentation_passes_under_both_backends() {
        let alg = PresentedAlgebra::new(AlgebraId::HC(3));
        let report = verify_presentation(&alg, Backend::Normalize).unwrap();
        assert!(report.all_passed(), "failures: {:?}", report.failures());
        let derived = verify_derived(&alg, Backend::Normalize).unwrap();
        assert!(derived.all_passed(), "failures: {:?}", derived.failures());
        let alg2 = PresentedAlgebra::new(AlgebraId::HC(2));
        let report2 = verify_presentation(&alg2, Backend::Incarnate(2)).unwrap();
        assert!(report2.all_passed(), "failures: {:?}", report2.failures());
    }

    #[test]
    fn affine_presentation_passes_under_normal_forms() {
        let alg = PresentedAlgebra::new(AlgebraId::AHC(3));
        let report = verify_presentation(&alg, Backend::Normalize).unwrap();
        assert!(report.all_passed(), "failures: {:?}", report.failures());
        let derived = verify_derived(&alg, Backend::Normalize).unwrap();
        assert!(derived.all_passed(), "failures: {:?}", derived.failures());
    }

    #[test]
    fn affine_presentation_passes_under_matrices() {
        let alg = PresentedAlgebra::new(AlgebraId::AHC(2));
        let report = verify_presentation(&alg, Backend::Incarnate(1)).unwrap();
        assert!(report.all_passed(), "failures: {:?}", report.failures());
    }

    #[test]
    fn jucys_murphy_small_forms() {
        assert_eq!(
            jucys_murphy(3, 1, JmKind::Even).unwrap(),
            AlgebraElement::one()
        );
        assert_eq!(jucys_murphy(3, 1, JmKind::Odd).unwrap(), c(1));
        let j2 = jucys_murphy(3, 2, JmKind::Even).unwrap();
        let want = t(1).sub(&z_elt().mul(&c(1)).mul(&c(2))).mul(&t(1));
        assert_eq!(j2, want);
        assert!(jucys_murphy(2, 3, JmKind::Even).is_err());
    }

    #[test]
    fn parse_and_display_round_trip() {
        let elt = AlgebraElement::parse("t1 c2* e + z w1 - 2").unwrap();
        let want = t(1)
            .mul(&cs(2))
            .mul(&e_gen())
            .add(&z_elt().mul(&w(1)))
            .sub(&AlgebraElement::one().scale_int(2));
        assert_eq!(elt, want);
        let reparsed = AlgebraElement::parse(&elt.to_string()).unwrap();
        assert_eq!(reparsed, elt);
    }

    #[test]
    fn exchange_and_closure_checks_pass_for_two_strands() {
        let report = milk_and_symmetry_checks(2, Backend::Normalize).unwrap();
        assert!(report.all_passed(), "failures: {:?}", report.failures());
    }
}
