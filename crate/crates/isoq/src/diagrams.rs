//! String-diagram term language, basis diagrams, canonical lifts, and
//! diagrammatic symmetries.
//!
//! A *term* is a syntax tree built from generator atoms by vertical
//! composition (`;`, read bottom-then-top), horizontal juxtaposition (`|`),
//! scalar multiples, and formal sums.  Objects are words in the letters `^`
//! (up) and `v` (down), with `1` denoting the empty word.
//!
//! A *basis diagram* pairs a perfect matching between boundary points with an
//! integer decoration per string, recorded at the string's terminus.  In the
//! non-affine setting the decoration is `0` (plain) or `-1` (one closed
//! token); in the affine setting it is an arbitrary alternating-word label.
//! [`canonical_positive_lift`] realizes a basis diagram as an explicit slice
//! sequence in which every crossing is positive, no string crosses itself,
//! and no pair of strings crosses more than once.

use crate::scalars::{LaurentScalar, ScalarMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Errors produced by the diagram layer.
#[derive(Debug, Error)]
pub enum DiagError {
    /// Text could not be parsed as a term or object word.
    #[error("parse error at byte {position}: {message}")]
    Parse {
        /// Byte offset in the input where the error was detected.
        position: usize,
        /// Description of what went wrong.
        message: String,
    },
    /// A composite term fails to type-check, or summands have mismatched
    /// boundaries.
    #[error("boundary error: {0}")]
    Boundary(String),
    /// A basis diagram is structurally invalid (bad matching or labels).
    #[error("invalid basis diagram: {0}")]
    Matching(String),
    /// An operation was applied outside its supported domain.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Orientation of a single object letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arrow {
    /// The letter `^`.
    Up,
    /// The letter `v`.
    Down,
}

impl Arrow {
    /// The opposite orientation.
    pub fn flip(self) -> Arrow {
        match self {
            Arrow::Up => Arrow::Down,
            Arrow::Down => Arrow::Up,
        }
    }
}

/// An object: a finite word in the letters `^` and `v`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ObjectWord(pub Vec<Arrow>);

impl ObjectWord {
    /// The empty word (monoidal unit), printed `1`.
    pub fn unit() -> Self {
        ObjectWord(Vec::new())
    }

    /// The single letter `^`.
    pub fn up() -> Self {
        ObjectWord(vec![Arrow::Up])
    }

    /// The single letter `v`.
    pub fn down() -> Self {
        ObjectWord(vec![Arrow::Down])
    }

    /// The word `^^…^` with `k` letters.
    pub fn up_pow(k: usize) -> Self {
        ObjectWord(vec![Arrow::Up; k])
    }

    /// Number of letters.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Whether this is the empty word.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Concatenation `self ⊗ other`.
    pub fn concat(&self, other: &ObjectWord) -> ObjectWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        ObjectWord(v)
    }

    /// The word with every letter flipped (`^` ↔ `v`), order preserved.
    pub fn flip_letters(&self) -> ObjectWord {
        ObjectWord(self.0.iter().map(|a| a.flip()).collect())
    }

    /// The word read right-to-left, letters unchanged.
    pub fn reversed(&self) -> ObjectWord {
        let mut v = self.0.clone();
        v.reverse();
        ObjectWord(v)
    }

    /// Parse an object word: `1` for the empty word, otherwise a string of
    /// `^` and `v` letters.
    pub fn parse(text: &str) -> Result<Self, DiagError> {
        let t = text.trim();
        if t == "1" {
            return Ok(ObjectWord::unit());
        }
        let mut letters = Vec::new();
        for (i, c) in t.char_indices() {
            match c {
                '^' => letters.push(Arrow::Up),
                'v' => letters.push(Arrow::Down),
                _ => {
                    return Err(DiagError::Parse {
                        position: i,
                        message: format!("unexpected character {c:?} in object word"),
                    })
                }
            }
        }
        if letters.is_empty() {
            return Err(DiagError::Parse {
                position: 0,
                message: "empty object word (write `1` for the unit)".into(),
            });
        }
        Ok(ObjectWord(letters))
    }
}

impl fmt::Display for ObjectWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for a in &self.0 {
            match a {
                Arrow::Up => write!(f, "^")?,
                Arrow::Down => write!(f, "v")?,
            }
        }
        Ok(())
    }
}

/// Generator atoms of the term language.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// Positive crossing of two up strands, `x+ : ^^ → ^^`.
    UpCrossPos,
    /// Negative crossing of two up strands, `x- : ^^ → ^^`.
    UpCrossNeg,
    /// Positive rightward crossing, `xr+ : ^v → v^`.
    RightCrossPos,
    /// Negative rightward crossing, `xr- : ^v → v^`.
    RightCrossNeg,
    /// Positive leftward crossing, `xl+ : v^ → ^v`.
    LeftCrossPos,
    /// Negative leftward crossing, `xl- : v^ → ^v`.
    LeftCrossNeg,
    /// Positive crossing of two down strands, `xd+ : vv → vv`.
    DownCrossPos,
    /// Negative crossing of two down strands, `xd- : vv → vv`.
    DownCrossNeg,
    /// Leftward cap, `capL : v^ → 1`.
    CapL,
    /// Leftward cup, `cupL : 1 → ^v`.
    CupL,
    /// Rightward cap, `capR : ^v → 1`.
    CapR,
    /// Rightward cup, `cupR : 1 → v^`.
    CupR,
    /// Closed token on an up strand, `tok : ^ → ^` (odd).
    Tok,
    /// Closed token on a down strand, `tokv : v → v` (odd).
    TokV,
    /// Open token on an up strand, `dot : ^ → ^` (odd, affine).
    Dot,
    /// Open token on a down strand, `dotv : v → v` (odd, affine).
    DotV,
    /// Alternating token word on an up strand, `zebra(k) : ^ → ^`.
    Zebra(i64),
    /// Alternating token word on a down strand, `zebrav(k) : v → v`.
    ZebraV(i64),
    /// Identity of an object word, `id(w) : w → w`.
    Id(ObjectWord),
}

impl Atom {
    /// Domain object of the atom.
    pub fn domain(&self) -> ObjectWord {
        use Arrow::*;
        match self {
            Atom::UpCrossPos | Atom::UpCrossNeg => ObjectWord(vec![Up, Up]),
            Atom::RightCrossPos | Atom::RightCrossNeg => ObjectWord(vec![Up, Down]),
            Atom::LeftCrossPos | Atom::LeftCrossNeg => ObjectWord(vec![Down, Up]),
            Atom::DownCrossPos | Atom::DownCrossNeg => ObjectWord(vec![Down, Down]),
            Atom::CapL => ObjectWord(vec![Down, Up]),
            Atom::CapR => ObjectWord(vec![Up, Down]),
            Atom::CupL | Atom::CupR => ObjectWord::unit(),
            Atom::Tok | Atom::Dot | Atom::Zebra(_) => ObjectWord::up(),
            Atom::TokV | Atom::DotV | Atom::ZebraV(_) => ObjectWord::down(),
            Atom::Id(w) => w.clone(),
        }
    }

    /// Codomain object of the atom.
    pub fn codomain(&self) -> ObjectWord {
        use Arrow::*;
        match self {
            Atom::UpCrossPos | Atom::UpCrossNeg => ObjectWord(vec![Up, Up]),
            Atom::RightCrossPos | Atom::RightCrossNeg => ObjectWord(vec![Down, Up]),
            Atom::LeftCrossPos | Atom::LeftCrossNeg => ObjectWord(vec![Up, Down]),
            Atom::DownCrossPos | Atom::DownCrossNeg => ObjectWord(vec![Down, Down]),
            Atom::CapL | Atom::CapR => ObjectWord::unit(),
            Atom::CupL => ObjectWord(vec![Up, Down]),
            Atom::CupR => ObjectWord(vec![Down, Up]),
            Atom::Tok | Atom::Dot | Atom::Zebra(_) => ObjectWord::up(),
            Atom::TokV | Atom::DotV | Atom::ZebraV(_) => ObjectWord::down(),
            Atom::Id(w) => w.clone(),
        }
    }

    /// Parity bit of the atom (1 for odd morphisms).
    pub fn parity(&self) -> u8 {
        match self {
            Atom::Tok | Atom::TokV | Atom::Dot | Atom::DotV => 1,
            Atom::Zebra(k) | Atom::ZebraV(k) => (k.unsigned_abs() % 2) as u8,
            _ => 0,
        }
    }

    /// Whether this atom is one of the eight crossings.
    pub fn is_crossing(&self) -> bool {
        matches!(
            self,
            Atom::UpCrossPos
                | Atom::UpCrossNeg
                | Atom::RightCrossPos
                | Atom::RightCrossNeg
                | Atom::LeftCrossPos
                | Atom::LeftCrossNeg
                | Atom::DownCrossPos
                | Atom::DownCrossNeg
        )
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::UpCrossPos => write!(f, "x+"),
            Atom::UpCrossNeg => write!(f, "x-"),
            Atom::RightCrossPos => write!(f, "xr+"),
            Atom::RightCrossNeg => write!(f, "xr-"),
            Atom::LeftCrossPos => write!(f, "xl+"),
            Atom::LeftCrossNeg => write!(f, "xl-"),
            Atom::DownCrossPos => write!(f, "xd+"),
            Atom::DownCrossNeg => write!(f, "xd-"),
            Atom::CapL => write!(f, "capL"),
            Atom::CupL => write!(f, "cupL"),
            Atom::CapR => write!(f, "capR"),
            Atom::CupR => write!(f, "cupR"),
            Atom::Tok => write!(f, "tok"),
            Atom::TokV => write!(f, "tokv"),
            Atom::Dot => write!(f, "dot"),
            Atom::DotV => write!(f, "dotv"),
            Atom::Zebra(k) => write!(f, "zebra({k})"),
            Atom::ZebraV(k) => write!(f, "zebrav({k})"),
            Atom::Id(w) => write!(f, "id({w})"),
        }
    }
}

/// A diagram term: syntax tree over the atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DiagramTerm {
    /// A single generator.
    Atom(Atom),
    /// Vertical composite: `bottom` applied first, then `top`.
    VComp {
        /// The earlier (lower) factor.
        bottom: Box<DiagramTerm>,
        /// The later (upper) factor.
        top: Box<DiagramTerm>,
    },
    /// Horizontal juxtaposition, `left | right`.
    HTensor {
        /// The left factor.
        left: Box<DiagramTerm>,
        /// The right factor.
        right: Box<DiagramTerm>,
    },
    /// Scalar multiple.
    ScalarMul(LaurentScalar, Box<DiagramTerm>),
    /// Formal sum of two terms with equal boundaries.
    Sum(Box<DiagramTerm>, Box<DiagramTerm>),
}

impl DiagramTerm {
    /// Shorthand for an atom term.
    pub fn atom(a: Atom) -> DiagramTerm {
        DiagramTerm::Atom(a)
    }

    /// Shorthand for `self ; top`.
    pub fn then(self, top: DiagramTerm) -> DiagramTerm {
        DiagramTerm::VComp {
            bottom: Box::new(self),
            top: Box::new(top),
        }
    }

    /// Shorthand for `self | right`.
    pub fn beside(self, right: DiagramTerm) -> DiagramTerm {
        DiagramTerm::HTensor {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    /// Shorthand for a scalar multiple.
    pub fn scaled(self, s: LaurentScalar) -> DiagramTerm {
        DiagramTerm::ScalarMul(s, Box::new(self))
    }
}

/// Compute the (domain, codomain) boundary of a term, checking that all
/// vertical composites match and all summands agree.
pub fn boundary(term: &DiagramTerm) -> Result<(ObjectWord, ObjectWord), DiagError> {
    match term {
        DiagramTerm::Atom(a) => Ok((a.domain(), a.codomain())),
        DiagramTerm::VComp { bottom, top } => {
            let (bd, bc) = boundary(bottom)?;
            let (td, tc) = boundary(top)?;
            if bc != td {
                return Err(DiagError::Boundary(format!(
                    "vertical composite mismatch: lower codomain {bc} vs upper domain {td}"
                )));
            }
            Ok((bd, tc))
        }
        DiagramTerm::HTensor { left, right } => {
            let (ld, lc) = boundary(left)?;
            let (rd, rc) = boundary(right)?;
            Ok((ld.concat(&rd), lc.concat(&rc)))
        }
        DiagramTerm::ScalarMul(_, t) => boundary(t),
        DiagramTerm::Sum(a, b) => {
            let ba = boundary(a)?;
            let bb = boundary(b)?;
            if ba != bb {
                return Err(DiagError::Boundary(format!(
                    "summands have different boundaries: {}→{} vs {}→{}",
                    ba.0, ba.1, bb.0, bb.1
                )));
            }
            Ok(ba)
        }
    }
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

// Precedence levels: Sum = 0, VComp = 1, HTensor = 2, ScalarMul = 3, Atom = 4.
fn level(term: &DiagramTerm) -> u8 {
    match term {
        DiagramTerm::Sum(..) => 0,
        DiagramTerm::VComp { .. } => 1,
        DiagramTerm::HTensor { .. } => 2,
        DiagramTerm::ScalarMul(..) => 3,
        DiagramTerm::Atom(_) => 4,
    }
}

fn fmt_at(term: &DiagramTerm, min_level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let l = level(term);
    if l < min_level {
        write!(f, "(")?;
        fmt_at(term, 0, f)?;
        return write!(f, ")");
    }
    match term {
        DiagramTerm::Atom(a) => write!(f, "{a}"),
        DiagramTerm::Sum(a, b) => {
            fmt_at(a, 0, f)?;
            write!(f, " + ")?;
            fmt_at(b, 1, f)
        }
        DiagramTerm::VComp { bottom, top } => {
            fmt_at(bottom, 1, f)?;
            write!(f, " ; ")?;
            fmt_at(top, 2, f)
        }
        DiagramTerm::HTensor { left, right } => {
            fmt_at(left, 2, f)?;
            write!(f, " | ")?;
            fmt_at(right, 3, f)
        }
        DiagramTerm::ScalarMul(s, t) => {
            write!(f, "({s})*")?;
            fmt_at(t, 3, f)
        }
    }
}

impl fmt::Display for DiagramTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_at(self, 0, f)
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    mode: ScalarMode,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, mode: ScalarMode) -> Self {
        Parser {
            text,
            bytes: text.as_bytes(),
            pos: 0,
            mode,
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, DiagError> {
        Err(DiagError::Parse {
            position: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), DiagError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected {:?}", c as char))
        }
    }

    fn starts_with(&self, s: &str) -> bool {
        self.text[self.pos..].starts_with(s)
    }

    fn parse_sum(&mut self) -> Result<DiagramTerm, DiagError> {
        let mut acc = self.parse_vcomp()?;
        loop {
            self.skip_ws();
            if self.eat(b'+') {
                let rhs = self.parse_vcomp()?;
                acc = DiagramTerm::Sum(Box::new(acc), Box::new(rhs));
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_vcomp(&mut self) -> Result<DiagramTerm, DiagError> {
        let mut acc = self.parse_tensor()?;
        loop {
            self.skip_ws();
            if self.eat(b';') {
                let rhs = self.parse_tensor()?;
                acc = acc.then(rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_tensor(&mut self) -> Result<DiagramTerm, DiagError> {
        let mut acc = self.parse_primary()?;
        loop {
            self.skip_ws();
            if self.eat(b'|') {
                let rhs = self.parse_primary()?;
                acc = acc.beside(rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    /// Scan forward from the current position for a `*` at parenthesis depth
    /// zero, stopping at `;`, `|`, or an unmatched `)`.  Returns its byte
    /// offset if found.
    fn find_scalar_star(&self) -> Option<usize> {
        let mut depth: i32 = 0;
        let mut i = self.pos;
        while i < self.bytes.len() {
            match self.bytes[i] {
                b'(' => depth += 1,
                b')' => {
                    if depth == 0 {
                        return None;
                    }
                    depth -= 1;
                }
                b';' | b'|' if depth == 0 => return None,
                b'*' if depth == 0 => return Some(i),
                _ => {}
            }
            i += 1;
        }
        None
    }

    fn try_scalar(&self, text: &str) -> Option<LaurentScalar> {
        let t = text.trim();
        if let Some(inner) = t
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
        {
            if let Ok(s) = LaurentScalar::parse(inner, self.mode) {
                return Some(s);
            }
        }
        LaurentScalar::parse(t, self.mode).ok()
    }

    fn parse_primary(&mut self) -> Result<DiagramTerm, DiagError> {
        self.skip_ws();
        if let Some(star) = self.find_scalar_star() {
            if let Some(s) = self.try_scalar(&self.text[self.pos..star]) {
                self.pos = star + 1;
                let t = self.parse_primary()?;
                return Ok(t.scaled(s));
            }
        }
        if self.eat(b'(') {
            let t = self.parse_sum()?;
            self.skip_ws();
            self.expect(b')')?;
            return Ok(t);
        }
        self.parse_atom().map(DiagramTerm::Atom)
    }

    fn parse_int(&mut self) -> Result<i64, DiagError> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        while self.peek().map_or(false, |c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.text[start..self.pos]
            .parse::<i64>()
            .map_err(|_| DiagError::Parse {
                position: start,
                message: "expected an integer".into(),
            })
    }

    fn parse_atom(&mut self) -> Result<Atom, DiagError> {
        self.skip_ws();
        // Longer names first so that e.g. `tokv` is not read as `tok`.
        const SIMPLE: &[(&str, Atom)] = &[
            ("capL", Atom::CapL),
            ("capR", Atom::CapR),
            ("cupL", Atom::CupL),
            ("cupR", Atom::CupR),
            ("tokv", Atom::TokV),
            ("tok", Atom::Tok),
            ("dotv", Atom::DotV),
            ("dot", Atom::Dot),
            ("xr+", Atom::RightCrossPos),
            ("xr-", Atom::RightCrossNeg),
            ("xl+", Atom::LeftCrossPos),
            ("xl-", Atom::LeftCrossNeg),
            ("xd+", Atom::DownCrossPos),
            ("xd-", Atom::DownCrossNeg),
            ("x+", Atom::UpCrossPos),
            ("x-", Atom::UpCrossNeg),
        ];
        for (name, atom) in SIMPLE {
            if self.starts_with(name) {
                self.pos += name.len();
                return Ok(atom.clone());
            }
        }
        if self.starts_with("zebrav") {
            self.pos += 6;
            self.skip_ws();
            self.expect(b'(')?;
            let k = self.parse_int()?;
            self.skip_ws();
            self.expect(b')')?;
            return Ok(Atom::ZebraV(k));
        }
        if self.starts_with("zebra") {
            self.pos += 5;
            self.skip_ws();
            self.expect(b'(')?;
            let k = self.parse_int()?;
            self.skip_ws();
            self.expect(b')')?;
            return Ok(Atom::Zebra(k));
        }
        if self.starts_with("id") {
            self.pos += 2;
            self.skip_ws();
            self.expect(b'(')?;
            self.skip_ws();
            let start = self.pos;
            while self.peek().map_or(false, |c| c == b'^' || c == b'v' || c == b'1') {
                self.pos += 1;
            }
            let w = ObjectWord::parse(&self.text[start..self.pos]).map_err(|e| match e {
                DiagError::Parse { position, message } => DiagError::Parse {
                    position: start + position,
                    message,
                },
                other => other,
            })?;
            self.skip_ws();
            self.expect(b')')?;
            return Ok(Atom::Id(w));
        }
        self.err("expected a generator name")
    }
}

/// Parse the textual term grammar.
///
/// Grammar (loosest to tightest): `+` (sum), `;` (vertical composite, read
/// bottom-then-top), `|` (horizontal juxtaposition), `scalar * term`.
/// Parentheses group.  Scalars follow the coefficient syntax of the given
/// mode, optionally parenthesized.
pub fn parse_term(text: &str, mode: ScalarMode) -> Result<DiagramTerm, DiagError> {
    let mut p = Parser::new(text, mode);
    let t = p.parse_sum()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return p.err("trailing input after term");
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Basis diagrams
// ---------------------------------------------------------------------------

/// A boundary point of a diagram: position on the bottom or top edge,
/// indexed left to right from zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum End {
    /// The `i`-th bottom boundary point.
    Bot(usize),
    /// The `j`-th top boundary point.
    Top(usize),
}

/// One string of a basis diagram: a source/target pair of boundary points
/// plus the integer decoration at its terminus (the target end).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StringData {
    /// The end where the string starts (an up letter on the bottom or a
    /// down letter on the top).
    pub source: End,
    /// The end where the string terminates.
    pub target: End,
    /// Terminus decoration: `0` plain; `-1` one closed token (non-affine);
    /// any integer alternating-word label in the affine setting.
    pub label: i64,
}

/// A decorated matching between the boundary points of `domain` and
/// `codomain`: the underlying data of a basis morphism.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisDiagram {
    /// Bottom boundary word.
    pub domain: ObjectWord,
    /// Top boundary word.
    pub codomain: ObjectWord,
    /// Strings, sorted by source end.
    pub strings: Vec<StringData>,
    /// Whether affine (open-token) decorations are allowed.
    pub affine: bool,
}

impl BasisDiagram {
    /// Build and validate a basis diagram.  Sources must be exactly the up
    /// letters of the domain and down letters of the codomain; targets the
    /// rest; every end used exactly once; non-affine labels in `{0, -1}`.
    pub fn new(
        domain: ObjectWord,
        codomain: ObjectWord,
        strings: Vec<StringData>,
        affine: bool,
    ) -> Result<Self, DiagError> {
        let mut sources = BTreeSet::new();
        let mut targets = BTreeSet::new();
        for (i, a) in domain.0.iter().enumerate() {
            match a {
                Arrow::Up => sources.insert(End::Bot(i)),
                Arrow::Down => targets.insert(End::Bot(i)),
            };
        }
        for (j, a) in codomain.0.iter().enumerate() {
            match a {
                Arrow::Down => sources.insert(End::Top(j)),
                Arrow::Up => targets.insert(End::Top(j)),
            };
        }
        if strings.len() != sources.len() || sources.len() != targets.len() {
            return Err(DiagError::Matching(format!(
                "expected {} strings matching {} sources to {} targets, got {}",
                sources.len(),
                sources.len(),
                targets.len(),
                strings.len()
            )));
        }
        let mut seen_src = BTreeSet::new();
        let mut seen_tgt = BTreeSet::new();
        for s in &strings {
            if !sources.contains(&s.source) || !seen_src.insert(s.source) {
                return Err(DiagError::Matching(format!(
                    "bad or repeated source {:?}",
                    s.source
                )));
            }
            if !targets.contains(&s.target) || !seen_tgt.insert(s.target) {
                return Err(DiagError::Matching(format!(
                    "bad or repeated target {:?}",
                    s.target
                )));
            }
            if !affine && !(s.label == 0 || s.label == -1) {
                return Err(DiagError::Matching(format!(
                    "non-affine label {} out of range",
                    s.label
                )));
            }
        }
        let mut strings = strings;
        strings.sort();
        Ok(BasisDiagram {
            domain,
            codomain,
            strings,
            affine,
        })
    }

    /// The identity basis diagram on `word`.
    pub fn identity(word: &ObjectWord, affine: bool) -> Self {
        let mut strings = Vec::new();
        for (i, a) in word.0.iter().enumerate() {
            let (source, target) = match a {
                Arrow::Up => (End::Bot(i), End::Top(i)),
                Arrow::Down => (End::Top(i), End::Bot(i)),
            };
            strings.push(StringData {
                source,
                target,
                label: 0,
            });
        }
        strings.sort();
        BasisDiagram {
            domain: word.clone(),
            codomain: word.clone(),
            strings,
            affine,
        }
    }

    /// Parity bit: the sum of the label lengths mod 2.
    pub fn parity(&self) -> u8 {
        (self
            .strings
            .iter()
            .map(|s| s.label.unsigned_abs())
            .sum::<u64>()
            % 2) as u8
    }

    /// The index of the string with the given end (source or target).
    pub fn string_with_end(&self, e: End) -> Option<usize> {
        self.strings
            .iter()
            .position(|s| s.source == e || s.target == e)
    }

    /// Number of interleaving string pairs in the chord model; this is the
    /// number of crossings in any positive reduced lift.
    pub fn crossing_count(&self) -> usize {
        let m = self.domain.len();
        let p = self.codomain.len();
        let coord = |e: End| -> usize {
            match e {
                End::Bot(i) => i,
                End::Top(j) => m + (p - 1 - j),
            }
        };
        let chords: Vec<(usize, usize)> = self
            .strings
            .iter()
            .map(|s| {
                let a = coord(s.source);
                let b = coord(s.target);
                (a.min(b), a.max(b))
            })
            .collect();
        let mut count = 0;
        for i in 0..chords.len() {
            for j in (i + 1)..chords.len() {
                let (a1, a2) = chords[i];
                let (b1, b2) = chords[j];
                let inside1 = a1 < b1 && b1 < a2;
                let inside2 = a1 < b2 && b2 < a2;
                if inside1 != inside2 {
                    count += 1;
                }
            }
        }
        count
    }
}

/// Enumerate all basis diagrams between two object words.  Non-affine
/// decorations range over `{0, -1}` per string; affine decorations over
/// `-zebra_bound ..= zebra_bound`.  Returns the empty list when the source
/// and target counts differ.
pub fn enumerate_basis(
    domain: &ObjectWord,
    codomain: &ObjectWord,
    affine: bool,
    zebra_bound: i64,
) -> Vec<BasisDiagram> {
    let mut sources = Vec::new();
    let mut targets = Vec::new();
    for (i, a) in domain.0.iter().enumerate() {
        match a {
            Arrow::Up => sources.push(End::Bot(i)),
            Arrow::Down => targets.push(End::Bot(i)),
        }
    }
    for (j, a) in codomain.0.iter().enumerate() {
        match a {
            Arrow::Down => sources.push(End::Top(j)),
            Arrow::Up => targets.push(End::Top(j)),
        }
    }
    if sources.len() != targets.len() {
        return Vec::new();
    }
    let k = sources.len();
    let labels: Vec<i64> = if affine {
        (-zebra_bound..=zebra_bound).collect()
    } else {
        vec![0, -1]
    };
    let mut out = Vec::new();
    for perm in permutations(targets.len()) {
        let mut label_idx = vec![0usize; k];
        loop {
            let strings: Vec<StringData> = (0..k)
                .map(|s| StringData {
                    source: sources[s],
                    target: targets[perm[s]],
                    label: labels[label_idx[s]],
                })
                .collect();
            out.push(
                BasisDiagram::new(domain.clone(), codomain.clone(), strings, affine)
                    .expect("enumerated diagram must be valid"),
            );
            // Advance the mixed-radix label counter.
            let mut carry = true;
            for d in label_idx.iter_mut() {
                if carry {
                    *d += 1;
                    if *d == labels.len() {
                        *d = 0;
                    } else {
                        carry = false;
                    }
                }
            }
            if carry {
                break;
            }
        }
        if k == 0 {
            break;
        }
    }
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(k - 1) {
        for slot in 0..k {
            let mut p = rest.clone();
            p.insert(slot, k - 1);
            out.push(p);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Canonical positive lift
// ---------------------------------------------------------------------------

/// One horizontal slice of a realized diagram: an atom applied at a given
/// position of the current word, all other strands passing straight through.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slice {
    /// Leftmost word position the atom acts on (also the insertion position
    /// for cups).
    pub pos: usize,
    /// The atom; always a positive crossing, a cap, or a cup.
    pub atom: Atom,
    /// Indices (into [`BasisDiagram::strings`]) of the strings involved.
    pub strings: Vec<usize>,
}

/// A realized basis diagram: the interior slice sequence together with the
/// word state before each slice.  Decorations are *not* included; see
/// [`Realization::to_term`].
#[derive(Clone, Debug)]
pub struct Realization {
    /// Interior slices, bottom to top.
    pub slices: Vec<Slice>,
    /// `states[i]` is the word before `slices[i]`; entries are
    /// (string index, strand orientation at that height).
    pub states: Vec<Vec<(usize, Arrow)>>,
    /// The word after the last slice (matches the codomain).
    pub final_state: Vec<(usize, Arrow)>,
}

/// Positive crossing atom determined by the lower letters.
fn positive_crossing(a: Arrow, b: Arrow) -> Atom {
    match (a, b) {
        (Arrow::Up, Arrow::Up) => Atom::UpCrossPos,
        (Arrow::Up, Arrow::Down) => Atom::RightCrossPos,
        (Arrow::Down, Arrow::Up) => Atom::LeftCrossPos,
        (Arrow::Down, Arrow::Down) => Atom::DownCrossPos,
    }
}

/// Compute the canonical positive reduced lift of a basis diagram: caps are
/// closed first (ordered by right foot), through strings are then sorted to
/// their top order, and cups are opened last.  Every crossing is positive,
/// no string crosses itself, and each pair of strings crosses at most once.
pub fn canonical_positive_lift(d: &BasisDiagram) -> Result<Realization, DiagError> {
    let m = d.domain.len();
    let p = d.codomain.len();
    // End -> string index lookup.
    let mut bot_string = vec![usize::MAX; m];
    let mut top_string = vec![usize::MAX; p];
    for (si, s) in d.strings.iter().enumerate() {
        for e in [s.source, s.target] {
            match e {
                End::Bot(i) => bot_string[i] = si,
                End::Top(j) => top_string[j] = si,
            }
        }
    }
    if bot_string.iter().chain(top_string.iter()).any(|&x| x == usize::MAX) {
        return Err(DiagError::Matching(
            "diagram does not cover every boundary point".into(),
        ));
    }

    let mut slices = Vec::new();
    let mut states = Vec::new();
    let mut word: Vec<(usize, Arrow)> = (0..m).map(|i| (bot_string[i], d.domain.0[i])).collect();

    let emit = |word: &mut Vec<(usize, Arrow)>, pos: usize, atom: Atom, strs: Vec<usize>,
                    slices: &mut Vec<Slice>, states: &mut Vec<Vec<(usize, Arrow)>>| {
        states.push(word.clone());
        slices.push(Slice {
            pos,
            atom,
            strings: strs,
        });
    };

    // Stage 1: caps, by right foot ascending.
    let mut caps: Vec<(usize, usize, usize)> = Vec::new(); // (left foot, right foot, string)
    for (si, s) in d.strings.iter().enumerate() {
        if let (End::Bot(a), End::Bot(b)) = (s.source, s.target) {
            caps.push((a.min(b), a.max(b), si));
        }
    }
    caps.sort_by_key(|&(_, r, _)| r);
    for &(lfoot, _, si) in &caps {
        // Current index of the left leg: the first occurrence of string si.
        let mut il = word
            .iter()
            .position(|&(id, _)| id == si)
            .expect("cap leg present");
        // Sanity: the left leg still carries the left foot's letter.
        debug_assert_eq!(word[il].1, d.domain.0[lfoot]);
        let ir = il
            + 1
            + word[il + 1..]
                .iter()
                .position(|&(id, _)| id == si)
                .expect("cap has two legs");
        let mut ir = ir;
        while il + 1 < ir {
            let (a, b) = (word[il].1, word[il + 1].1);
            let strs = vec![word[il].0, word[il + 1].0];
            emit(&mut word, il, positive_crossing(a, b), strs, &mut slices, &mut states);
            word.swap(il, il + 1);
            il += 1;
        }
        let cap_atom = match (word[il].1, word[ir].1) {
            (Arrow::Down, Arrow::Up) => Atom::CapL,
            (Arrow::Up, Arrow::Down) => Atom::CapR,
            _ => unreachable!("cap legs must have opposite orientations"),
        };
        emit(&mut word, il, cap_atom, vec![si, si], &mut slices, &mut states);
        word.drain(il..=ir);
        let _ = ir;
        ir = 0;
        let _ = ir;
    }

    // Stage 2: sort through strings into top order by adjacent swaps.
    let top_pos = |si: usize| -> usize {
        match (d.strings[si].source, d.strings[si].target) {
            (End::Top(j), _) | (_, End::Top(j)) => j,
            _ => unreachable!("through string has a top end"),
        }
    };
    let is_through = |si: usize| {
        matches!(
            (d.strings[si].source, d.strings[si].target),
            (End::Bot(_), End::Top(_)) | (End::Top(_), End::Bot(_))
        )
    };
    debug_assert!(word.iter().all(|&(id, _)| is_through(id)));
    loop {
        let mut swapped = false;
        for i in 0..word.len().saturating_sub(1) {
            if top_pos(word[i].0) > top_pos(word[i + 1].0) {
                let (a, b) = (word[i].1, word[i + 1].1);
                let strs = vec![word[i].0, word[i + 1].0];
                emit(&mut word, i, positive_crossing(a, b), strs, &mut slices, &mut states);
                word.swap(i, i + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }

    // Stage 3: cups.  Simulate the cap algorithm on the vertically flipped
    // upper part, then replay the event list in reverse, with joins becoming
    // insertions.
    #[derive(Clone, Copy)]
    enum Event {
        Swap(usize),
        Join(usize, usize), // (position, string index of the cup)
    }
    let mut sim: Vec<usize> = (0..p).map(|j| top_string[j]).collect();
    let mut cups: Vec<(usize, usize, usize)> = Vec::new(); // (left top foot, right top foot, string)
    for (si, s) in d.strings.iter().enumerate() {
        if let (End::Top(a), End::Top(b)) = (s.source, s.target) {
            cups.push((a.min(b), a.max(b), si));
        }
    }
    cups.sort_by_key(|&(_, r, _)| r);
    let mut events = Vec::new();
    for &(_, _, si) in &cups {
        let mut il = sim.iter().position(|&id| id == si).expect("cup leg");
        let ir = il
            + 1
            + sim[il + 1..]
                .iter()
                .position(|&id| id == si)
                .expect("cup has two legs");
        while il + 1 < ir {
            events.push(Event::Swap(il));
            sim.swap(il, il + 1);
            il += 1;
        }
        events.push(Event::Join(il, si));
        sim.drain(il..=il + 1);
    }
    // The simulation must now agree with the real word.
    debug_assert_eq!(
        sim,
        word.iter().map(|&(id, _)| id).collect::<Vec<_>>()
    );
    for ev in events.into_iter().rev() {
        match ev {
            Event::Join(pos, si) => {
                let (a, b) = (d.strings[si].source, d.strings[si].target);
                let (ja, jb) = match (a, b) {
                    (End::Top(x), End::Top(y)) => (x.min(y), x.max(y)),
                    _ => unreachable!(),
                };
                // Letters the cup's legs carry: the codomain letters at the
                // cup's own top feet.
                let la = d.codomain.0[ja];
                let lb = d.codomain.0[jb];
                let cup_atom = match (la, lb) {
                    (Arrow::Up, Arrow::Down) => Atom::CupL,
                    (Arrow::Down, Arrow::Up) => Atom::CupR,
                    _ => unreachable!("cup legs must have opposite orientations"),
                };
                emit(&mut word, pos, cup_atom, vec![si, si], &mut slices, &mut states);
                word.insert(pos, (si, la));
                word.insert(pos + 1, (si, lb));
            }
            Event::Swap(pos) => {
                let (a, b) = (word[pos].1, word[pos + 1].1);
                let strs = vec![word[pos].0, word[pos + 1].0];
                emit(&mut word, pos, positive_crossing(a, b), strs, &mut slices, &mut states);
                word.swap(pos, pos + 1);
            }
        }
    }
    debug_assert_eq!(
        word.iter().map(|&(id, _)| id).collect::<Vec<_>>(),
        (0..p).map(|j| top_string[j]).collect::<Vec<_>>()
    );
    debug_assert_eq!(
        word.iter().map(|&(_, a)| a).collect::<Vec<_>>(),
        d.codomain.0
    );
    Ok(Realization {
        slices,
        states,
        final_state: word,
    })
}

impl Realization {
    /// Render the realization of `d` as an explicit term: a bottom
    /// decoration slice, the interior slices, and a top decoration slice.
    pub fn to_term(&self, d: &BasisDiagram) -> DiagramTerm {
        let mut layers: Vec<DiagramTerm> = Vec::new();

        // Bottom decoration slice: labels at down-letter termini.
        let mut bottom_atoms: Vec<Atom> = Vec::new();
        let mut any_bottom = false;
        for (i, a) in d.domain.0.iter().enumerate() {
            if *a == Arrow::Down {
                let si = d
                    .strings
                    .iter()
                    .position(|s| s.target == End::Bot(i))
                    .filter(|&si| d.strings[si].label != 0);
                if let Some(si) = si {
                    let k = d.strings[si].label;
                    bottom_atoms.push(if d.affine {
                        Atom::ZebraV(k)
                    } else {
                        Atom::TokV
                    });
                    any_bottom = true;
                    continue;
                }
            }
            bottom_atoms.push(Atom::Id(ObjectWord(vec![*a])));
        }
        if any_bottom {
            layers.push(tensor_atoms(bottom_atoms));
        }

        for (slice, state) in self.slices.iter().zip(self.states.iter()) {
            let arity = match slice.atom {
                Atom::CupL | Atom::CupR => 0,
                _ => 2,
            };
            let prefix = ObjectWord(state[..slice.pos].iter().map(|&(_, a)| a).collect());
            let suffix =
                ObjectWord(state[slice.pos + arity..].iter().map(|&(_, a)| a).collect());
            let mut t = DiagramTerm::Atom(slice.atom.clone());
            if !prefix.is_empty() {
                t = DiagramTerm::Atom(Atom::Id(prefix)).beside(t);
            }
            if !suffix.is_empty() {
                t = t.beside(DiagramTerm::Atom(Atom::Id(suffix)));
            }
            layers.push(t);
        }

        // Top decoration slice: labels at up-letter termini.
        let mut top_atoms: Vec<Atom> = Vec::new();
        let mut any_top = false;
        for (j, a) in d.codomain.0.iter().enumerate() {
            if *a == Arrow::Up {
                let si = d
                    .strings
                    .iter()
                    .position(|s| s.target == End::Top(j))
                    .filter(|&si| d.strings[si].label != 0);
                if let Some(si) = si {
                    let k = d.strings[si].label;
                    top_atoms.push(if d.affine { Atom::Zebra(k) } else { Atom::Tok });
                    any_top = true;
                    continue;
                }
            }
            top_atoms.push(Atom::Id(ObjectWord(vec![*a])));
        }
        if any_top {
            layers.push(tensor_atoms(top_atoms));
        }

        let mut it = layers.into_iter();
        match it.next() {
            None => DiagramTerm::Atom(Atom::Id(d.domain.clone())),
            Some(first) => it.fold(first, |acc, t| acc.then(t)),
        }
    }
}

/// Tensor a row of atoms, merging adjacent identities into identity words.
fn tensor_atoms(atoms: Vec<Atom>) -> DiagramTerm {
    let mut factors: Vec<DiagramTerm> = Vec::new();
    let mut pending_id = ObjectWord::unit();
    for a in atoms {
        if let Atom::Id(w) = &a {
            pending_id = pending_id.concat(w);
        } else {
            if !pending_id.is_empty() {
                factors.push(DiagramTerm::Atom(Atom::Id(std::mem::take(&mut pending_id))));
            }
            factors.push(DiagramTerm::Atom(a));
        }
    }
    if !pending_id.is_empty() {
        factors.push(DiagramTerm::Atom(Atom::Id(pending_id)));
    }
    let mut it = factors.into_iter();
    match it.next() {
        None => DiagramTerm::Atom(Atom::Id(ObjectWord::unit())),
        Some(first) => it.fold(first, |acc, t| acc.beside(t)),
    }
}

// ---------------------------------------------------------------------------
// Zebra expansion
// ---------------------------------------------------------------------------

/// One letter of an alternating token word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZebraLetter {
    /// An open token.
    Open,
    /// A closed token.
    Closed,
}

/// The letters of the alternating word with label `k`, listed bottom to top:
/// open-first for `k > 0`, closed-first for `k < 0`, empty for `k = 0`.
pub fn zebra_letters(k: i64) -> Vec<ZebraLetter> {
    let n = k.unsigned_abs() as usize;
    let first = if k > 0 {
        ZebraLetter::Open
    } else {
        ZebraLetter::Closed
    };
    (0..n)
        .map(|i| {
            if i % 2 == 0 {
                first
            } else {
                match first {
                    ZebraLetter::Open => ZebraLetter::Closed,
                    ZebraLetter::Closed => ZebraLetter::Open,
                }
            }
        })
        .collect()
}

/// Expand `zebra(k)` into its letter-by-letter composite on an up strand.
pub fn zebra_expansion(k: i64) -> DiagramTerm {
    let letters = zebra_letters(k);
    if letters.is_empty() {
        return DiagramTerm::Atom(Atom::Id(ObjectWord::up()));
    }
    let mut it = letters.into_iter().map(|l| {
        DiagramTerm::Atom(match l {
            ZebraLetter::Open => Atom::Dot,
            ZebraLetter::Closed => Atom::Tok,
        })
    });
    let first = it.next().unwrap();
    it.fold(first, |acc, t| acc.then(t))
}

/// Expand `zebrav(k)` on a down strand: the conjugate of `zebra(k)`, which
/// equals `(-1)^(C(|k|,2))` times the reversed word in the down-strand
/// letters, where `C(n,2) = n(n-1)/2`.
pub fn zebrav_expansion(k: i64, mode: ScalarMode) -> DiagramTerm {
    let mut letters = zebra_letters(k);
    letters.reverse();
    let body = if letters.is_empty() {
        DiagramTerm::Atom(Atom::Id(ObjectWord::down()))
    } else {
        let mut it = letters.into_iter().map(|l| {
            DiagramTerm::Atom(match l {
                ZebraLetter::Open => Atom::DotV,
                ZebraLetter::Closed => Atom::TokV,
            })
        });
        let first = it.next().unwrap();
        it.fold(first, |acc, t| acc.then(t))
    };
    let n = k.unsigned_abs();
    if (n * n.wrapping_sub(1) / 2) % 2 == 1 {
        body.scaled(-LaurentScalar::one(mode))
    } else {
        body
    }
}

/// The counterclockwise closed loop (left strand oriented down) carrying a
/// degree-`k` strand decoration: an endomorphism of the unit object.
pub fn left_bubble(k: i64) -> DiagramTerm {
    parse_term(
        &format!("cupR ; (id(v) | zebra({k})) ; capL"),
        ScalarMode::QLaurent,
    )
    .expect("fixed composite parses")
}

/// The clockwise closed loop (left strand oriented up) carrying a degree-`k`
/// strand decoration: an endomorphism of the unit object.
pub fn right_bubble(k: i64) -> DiagramTerm {
    parse_term(
        &format!("cupL ; (zebra({k}) | id(v)) ; capR"),
        ScalarMode::QLaurent,
    )
    .expect("fixed composite parses")
}

// ---------------------------------------------------------------------------
// Symmetries
// ---------------------------------------------------------------------------

/// The five diagrammatic symmetries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OmegaOp {
    /// Negate every crossing and send `z` to `-z` in coefficients.
    Minus,
    /// Top-bottom flip: contravariant, reverses vertical composites and
    /// flips every object letter.
    UpDown,
    /// Left-right flip: covariant but reverses horizontal order.
    LeftRight,
    /// 180-degree rotation: [`OmegaOp::LeftRight`] after [`OmegaOp::UpDown`].
    Pivot,
    /// Swap open and closed tokens, exchange positive and negative
    /// crossings, and send `z` to `-z`.
    Bounce,
}

/// Substitute `z ↦ -z` in a coefficient.  In `q`-mode this is realized by
/// inverting `q`, which negates `q - q⁻¹`.
fn negate_parameter(s: &LaurentScalar) -> LaurentScalar {
    let mode = s.mode();
    let mut out = LaurentScalar::zero(mode);
    for (&k, c) in s.iter_terms() {
        let c = match mode {
            ScalarMode::AbstractZ if k.rem_euclid(2) == 1 => -c.clone(),
            _ => c.clone(),
        };
        let k = match mode {
            ScalarMode::AbstractZ => k,
            ScalarMode::QLaurent => -k,
        };
        let m = LaurentScalar::monomial(mode, k, c)
            .expect("sign substitution keeps exponents valid");
        out = out + m;
    }
    out
}

fn omega_atom(op: OmegaOp, a: &Atom, mode: ScalarMode) -> Result<DiagramTerm, DiagError> {
    use Atom::*;
    let plain = |a: Atom| Ok(DiagramTerm::Atom(a));
    let minus_one = -LaurentScalar::one(mode);
    let neg = |a: Atom| Ok(DiagramTerm::Atom(a).scaled(minus_one.clone()));
    match op {
        OmegaOp::Minus => match a {
            UpCrossPos | UpCrossNeg | RightCrossPos | RightCrossNeg | LeftCrossPos
            | LeftCrossNeg | DownCrossPos | DownCrossNeg => neg(a.clone()),
            _ => plain(a.clone()),
        },
        OmegaOp::UpDown => match a {
            Tok => plain(TokV),
            TokV => plain(Tok),
            Dot => plain(DotV),
            DotV => plain(Dot),
            UpCrossPos => neg(DownCrossNeg),
            UpCrossNeg => neg(DownCrossPos),
            DownCrossPos => neg(UpCrossNeg),
            DownCrossNeg => neg(UpCrossPos),
            RightCrossPos => neg(RightCrossNeg),
            RightCrossNeg => neg(RightCrossPos),
            LeftCrossPos => neg(LeftCrossNeg),
            LeftCrossNeg => neg(LeftCrossPos),
            CapL => plain(CupL),
            CupL => plain(CapL),
            CapR => neg(CupR),
            CupR => neg(CapR),
            Id(w) => plain(Id(w.flip_letters())),
            Zebra(k) => omega_term(op, &zebra_expansion(*k), mode),
            ZebraV(k) => omega_term(op, &zebrav_expansion(*k, mode), mode),
        },
        OmegaOp::LeftRight => match a {
            Tok | TokV | Dot | DotV | Zebra(_) | ZebraV(_) => plain(a.clone()),
            UpCrossPos => neg(UpCrossNeg),
            UpCrossNeg => neg(UpCrossPos),
            DownCrossPos => neg(DownCrossNeg),
            DownCrossNeg => neg(DownCrossPos),
            RightCrossPos => neg(LeftCrossNeg),
            RightCrossNeg => neg(LeftCrossPos),
            LeftCrossNeg => neg(RightCrossPos),
            LeftCrossPos => neg(RightCrossNeg),
            CupL => plain(CupR),
            CapL => plain(CapR),
            CupR => neg(CupL),
            CapR => neg(CapL),
            Id(w) => plain(Id(w.reversed())),
        },
        OmegaOp::Pivot => {
            let first = omega_atom(OmegaOp::UpDown, a, mode)?;
            omega_term(OmegaOp::LeftRight, &first, mode)
        }
        OmegaOp::Bounce => match a {
            Tok => plain(Dot),
            Dot => plain(Tok),
            TokV => plain(DotV),
            DotV => plain(TokV),
            Zebra(k) => plain(Zebra(-k)),
            ZebraV(k) => plain(ZebraV(-k)),
            UpCrossPos => plain(UpCrossNeg),
            UpCrossNeg => plain(UpCrossPos),
            RightCrossPos => plain(RightCrossNeg),
            RightCrossNeg => plain(RightCrossPos),
            LeftCrossPos => plain(LeftCrossNeg),
            LeftCrossNeg => plain(LeftCrossPos),
            DownCrossPos => plain(DownCrossNeg),
            DownCrossNeg => plain(DownCrossPos),
            _ => plain(a.clone()),
        },
    }
}

fn omega_term(op: OmegaOp, term: &DiagramTerm, mode: ScalarMode) -> Result<DiagramTerm, DiagError> {
    match term {
        DiagramTerm::Atom(a) => omega_atom(op, a, mode),
        DiagramTerm::Sum(a, b) => Ok(DiagramTerm::Sum(
            Box::new(omega_term(op, a, mode)?),
            Box::new(omega_term(op, b, mode)?),
        )),
        DiagramTerm::ScalarMul(s, t) => {
            let s = match op {
                OmegaOp::Minus | OmegaOp::Bounce => negate_parameter(s),
                _ => s.clone(),
            };
            Ok(omega_term(op, t, mode)?.scaled(s))
        }
        DiagramTerm::VComp { bottom, top } => {
            let b = omega_term(op, bottom, mode)?;
            let t = omega_term(op, top, mode)?;
            Ok(match op {
                OmegaOp::UpDown | OmegaOp::Pivot => t.then(b),
                _ => b.then(t),
            })
        }
        DiagramTerm::HTensor { left, right } => {
            let l = omega_term(op, left, mode)?;
            let r = omega_term(op, right, mode)?;
            Ok(match op {
                OmegaOp::LeftRight | OmegaOp::Pivot => r.beside(l),
                _ => l.beside(r),
            })
        }
    }
}

/// Apply a diagrammatic symmetry to a term.  The scalar mode is used for
/// the signs introduced by the generator tables.
pub fn omega_apply(
    op: OmegaOp,
    term: &DiagramTerm,
    mode: ScalarMode,
) -> Result<DiagramTerm, DiagError> {
    omega_term(op, term, mode)
}

/// Convenience: the integer `n` as a rational.
pub fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Group basis diagrams by parity; returns (even count, odd count).
pub fn parity_split(diagrams: &[BasisDiagram]) -> (usize, usize) {
    let mut even = 0;
    let mut odd = 0;
    for d in diagrams {
        if d.parity() == 0 {
            even += 1;
        } else {
            odd += 1;
        }
    }
    (even, odd)
}

/// Count basis diagrams grouped by underlying matching, for reporting.
pub fn matching_census(diagrams: &[BasisDiagram]) -> BTreeMap<Vec<(End, End)>, usize> {
    let mut map: BTreeMap<Vec<(End, End)>, usize> = BTreeMap::new();
    for d in diagrams {
        let key: Vec<(End, End)> = d.strings.iter().map(|s| (s.source, s.target)).collect();
        *map.entry(key).or_insert(0) += 1;
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const Z: ScalarMode = ScalarMode::AbstractZ;

    fn pt(s: &str) -> DiagramTerm {
        parse_term(s, Z).unwrap_or_else(|e| panic!("parse {s:?}: {e}"))
    }

    #[test]
    fn parse_and_print_round_trip_handwritten() {
        let samples = [
            "x+",
            "x+ ; x-",
            "tok | tokv",
            "capL ; cupL",
            "(x+ ; x-) + id(^^)",
            "(2z^2 - 1)*x+ + (-1)*(x- ; x+)",
            "id(1)",
            "id(^v^)",
            "zebra(-3) | zebrav(2)",
            "cupL ; (capR | id(1)) ; cupR",
            "dot ; tok ; dot",
            "(z)*(tok | id(v)) ; (id(^) | tokv)",
        ];
        for s in samples {
            let t = pt(s);
            let printed = t.to_string();
            let t2 = pt(&printed);
            assert_eq!(t, t2, "round trip failed for {s:?} printed as {printed:?}");
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_term("x+ ;", Z).is_err());
        assert!(parse_term("frob", Z).is_err());
        assert!(parse_term("x+ x-", Z).is_err());
        assert!(parse_term("zebra(1", Z).is_err());
        assert!(parse_term("id()", Z).is_err());
    }

    #[test]
    fn boundaries_of_atoms_and_composites() {
        let (d, c) = boundary(&pt("x+")).unwrap();
        assert_eq!(d.to_string(), "^^");
        assert_eq!(c.to_string(), "^^");
        let (d, c) = boundary(&pt("cupL ; (id(^) | tokv)")).unwrap();
        assert_eq!(d.to_string(), "1");
        assert_eq!(c.to_string(), "^v");
        let (d, c) = boundary(&pt("capR | cupR")).unwrap();
        assert_eq!(d.to_string(), "^v");
        assert_eq!(c.to_string(), "v^");
        assert!(boundary(&pt("x+ ; capL")).is_err());
        assert!(boundary(&pt("x+ + capR")).is_err());
        let (d, c) = boundary(&pt("xr+ ; xl+")).unwrap();
        assert_eq!(d.to_string(), "^v");
        assert_eq!(c.to_string(), "^v");
    }

    #[test]
    fn scalar_multiplication_parsing() {
        let t = pt("(3z^2 - 1)*x+");
        match &t {
            DiagramTerm::ScalarMul(s, inner) => {
                assert_eq!(s.to_string(), "3z^2 - 1");
                assert_eq!(**inner, DiagramTerm::Atom(Atom::UpCrossPos));
            }
            other => panic!("expected scalar multiple, got {other:?}"),
        }
        // Unparenthesized monomial scalars also work.
        let t = pt("2*tok + z*tokv ; tokv");
        assert!(matches!(t, DiagramTerm::Sum(..)));
    }

    #[test]
    fn basis_enumeration_counts() {
        for k in 1..=3usize {
            let w = ObjectWord::up_pow(k);
            let all = enumerate_basis(&w, &w, false, 0);
            let expected = (1..=k).product::<usize>() * (1usize << k);
            assert_eq!(all.len(), expected, "k = {k}");
            let (even, odd) = parity_split(&all);
            assert_eq!(even, expected / 2);
            assert_eq!(odd, expected / 2);
        }
        // Mixed word with two matchings.
        let w = ObjectWord::parse("^v").unwrap();
        let all = enumerate_basis(&w, &w, false, 0);
        assert_eq!(all.len(), 8);
        assert_eq!(matching_census(&all).len(), 2);
        // Mismatched source/target counts give an empty hom set.
        let a = ObjectWord::parse("^").unwrap();
        let b = ObjectWord::parse("^^").unwrap();
        assert!(enumerate_basis(&a, &b, false, 0).is_empty());
        // Affine label range.
        let up = ObjectWord::up();
        let all = enumerate_basis(&up, &up, true, 2);
        assert_eq!(all.len(), 5);
    }

    #[test]
    fn canonical_lift_simple_cases() {
        // Identity matching on ^^ lifts to the identity.
        let w = ObjectWord::up_pow(2);
        let d = BasisDiagram::identity(&w, false);
        let r = canonical_positive_lift(&d).unwrap();
        assert!(r.slices.is_empty());
        assert_eq!(r.to_term(&d), DiagramTerm::Atom(Atom::Id(w.clone())));

        // The transposition matching lifts to a single positive crossing.
        let d = BasisDiagram::new(
            w.clone(),
            w.clone(),
            vec![
                StringData {
                    source: End::Bot(0),
                    target: End::Top(1),
                    label: 0,
                },
                StringData {
                    source: End::Bot(1),
                    target: End::Top(0),
                    label: 0,
                },
            ],
            false,
        )
        .unwrap();
        let r = canonical_positive_lift(&d).unwrap();
        assert_eq!(r.slices.len(), 1);
        assert_eq!(r.slices[0].atom, Atom::UpCrossPos);
        assert_eq!(r.to_term(&d), DiagramTerm::Atom(Atom::UpCrossPos));

        // The cap-cup matching on (^v, ^v) lifts to cupL over capR.
        let w = ObjectWord::parse("^v").unwrap();
        let d = BasisDiagram::new(
            w.clone(),
            w.clone(),
            vec![
                StringData {
                    source: End::Bot(0),
                    target: End::Bot(1),
                    label: 0,
                },
                StringData {
                    source: End::Top(1),
                    target: End::Top(0),
                    label: 0,
                },
            ],
            false,
        )
        .unwrap();
        let r = canonical_positive_lift(&d).unwrap();
        assert_eq!(r.slices.len(), 2);
        assert_eq!(r.slices[0].atom, Atom::CapR);
        assert_eq!(r.slices[1].atom, Atom::CupL);
        let t = r.to_term(&d);
        assert_eq!(t, pt("capR ; cupL"));
        let (dd, cc) = boundary(&t).unwrap();
        assert_eq!(dd, w);
        assert_eq!(cc, w);
    }

    #[test]
    fn canonical_lift_decorations() {
        // A token at a top terminus and one at a bottom terminus.
        let w = ObjectWord::parse("v^").unwrap();
        let d = BasisDiagram::new(
            w.clone(),
            w.clone(),
            vec![
                StringData {
                    source: End::Bot(1),
                    target: End::Top(1),
                    label: -1,
                },
                StringData {
                    source: End::Top(0),
                    target: End::Bot(0),
                    label: -1,
                },
            ],
            false,
        )
        .unwrap();
        let r = canonical_positive_lift(&d).unwrap();
        let t = r.to_term(&d);
        assert_eq!(t, pt("(tokv | id(^)) ; (id(v) | tok)"));
        // Same diagram, affine labels.
        let d = BasisDiagram::new(
            w.clone(),
            w.clone(),
            vec![
                StringData {
                    source: End::Bot(1),
                    target: End::Top(1),
                    label: 3,
                },
                StringData {
                    source: End::Top(0),
                    target: End::Bot(0),
                    label: -2,
                },
            ],
            true,
        )
        .unwrap();
        let t = canonical_positive_lift(&d).unwrap().to_term(&d);
        assert_eq!(t, pt("(zebrav(-2) | id(^)) ; (id(v) | zebra(3))"));
    }

    fn random_diagram(rng: &mut ChaCha8Rng, affine: bool) -> BasisDiagram {
        loop {
            let dl = rng.gen_range(0..=4);
            let cl = rng.gen_range(0..=4);
            let dom = ObjectWord(
                (0..dl)
                    .map(|_| if rng.gen() { Arrow::Up } else { Arrow::Down })
                    .collect(),
            );
            let cod = ObjectWord(
                (0..cl)
                    .map(|_| if rng.gen() { Arrow::Up } else { Arrow::Down })
                    .collect(),
            );
            let all = enumerate_basis(&dom, &cod, false, 0);
            if all.is_empty() {
                continue;
            }
            let mut d = all[rng.gen_range(0..all.len())].clone();
            if affine {
                d.affine = true;
                for s in d.strings.iter_mut() {
                    s.label = rng.gen_range(-3..=3);
                }
            }
            return d;
        }
    }

    #[test]
    fn canonical_lift_type_checks_and_counts_crossings() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..300 {
            let affine = trial % 3 == 0;
            let d = random_diagram(&mut rng, affine);
            let r = canonical_positive_lift(&d)
                .unwrap_or_else(|e| panic!("lift failed for {d:?}: {e}"));
            let crossings = r.slices.iter().filter(|s| s.atom.is_crossing()).count();
            assert_eq!(
                crossings,
                d.crossing_count(),
                "crossing count mismatch for {d:?}"
            );
            // Every crossing must be positive, and each string pair crosses
            // at most once.
            let mut pairs = BTreeSet::new();
            for s in r.slices.iter().filter(|s| s.atom.is_crossing()) {
                assert!(matches!(
                    s.atom,
                    Atom::UpCrossPos | Atom::RightCrossPos | Atom::LeftCrossPos | Atom::DownCrossPos
                ));
                let mut key = s.strings.clone();
                key.sort();
                assert_ne!(key[0], key[1], "self-crossing in lift of {d:?}");
                assert!(pairs.insert(key), "repeated crossing in lift of {d:?}");
            }
            // The rendered term type-checks with the right boundary.
            let t = r.to_term(&d);
            let (dd, cc) = boundary(&t).unwrap_or_else(|e| {
                panic!("lift of {d:?} does not type-check: {e}\nterm: {t}")
            });
            assert_eq!(dd, d.domain);
            assert_eq!(cc, d.codomain);
            // Printing round-trips.
            let printed = t.to_string();
            assert_eq!(parse_term(&printed, Z).unwrap(), t);
        }
    }

    #[test]
    fn zebra_expansion_shapes() {
        assert_eq!(zebra_letters(0).len(), 0);
        assert_eq!(zebra_letters(3), vec![
            ZebraLetter::Open,
            ZebraLetter::Closed,
            ZebraLetter::Open
        ]);
        assert_eq!(zebra_letters(-2), vec![ZebraLetter::Closed, ZebraLetter::Open]);
        assert_eq!(zebra_expansion(1), DiagramTerm::Atom(Atom::Dot));
        assert_eq!(zebra_expansion(-1), DiagramTerm::Atom(Atom::Tok));
        assert_eq!(zebrav_expansion(1, Z), DiagramTerm::Atom(Atom::DotV));
        assert_eq!(zebrav_expansion(-1, Z), DiagramTerm::Atom(Atom::TokV));
        // |k| = 2 picks up the conjugation sign.
        assert_eq!(
            zebrav_expansion(2, Z),
            pt("(-1)*(tokv ; dotv)")
        );
    }

    #[test]
    fn omega_involutions() {
        use Atom::*;
        let all_atoms = [
            UpCrossPos, UpCrossNeg, RightCrossPos, RightCrossNeg, LeftCrossPos, LeftCrossNeg,
            DownCrossPos, DownCrossNeg, CapL, CupL, CapR, CupR, Tok, TokV, Dot, DotV,
        ];
        let strip = |t: &DiagramTerm| -> (DiagramTerm, bool) {
            match t {
                DiagramTerm::ScalarMul(s, inner) => {
                    assert!((s.clone() + LaurentScalar::one(Z)).is_zero());
                    ((**inner).clone(), true)
                }
                other => (other.clone(), false),
            }
        };
        for a in &all_atoms {
            // Minus, UpDown, and Bounce square to the identity on every
            // generator.
            for op in [OmegaOp::Minus, OmegaOp::UpDown, OmegaOp::Bounce] {
                let once = omega_apply(op, &DiagramTerm::Atom(a.clone()), Z).unwrap();
                let (mid, s1) = strip(&once);
                let twice = omega_apply(op, &mid, Z).unwrap();
                let (fin, s2) = strip(&twice);
                assert_eq!(fin, DiagramTerm::Atom(a.clone()), "{op:?} on {a}");
                assert!(!(s1 ^ s2), "{op:?} squared picks up a sign on {a}");
            }
        }
        // LeftRight squares to the identity on tokens and crossings, and to
        // minus the identity on caps and cups.
        for a in &all_atoms {
            let once = omega_apply(OmegaOp::LeftRight, &DiagramTerm::Atom(a.clone()), Z).unwrap();
            let (mid, s1) = strip(&once);
            let twice = omega_apply(OmegaOp::LeftRight, &mid, Z).unwrap();
            let (fin, s2) = strip(&twice);
            assert_eq!(fin, DiagramTerm::Atom(a.clone()));
            let net_sign = s1 ^ s2;
            let is_cupcap = matches!(a, CapL | CapR | CupL | CupR);
            assert_eq!(net_sign, is_cupcap, "leftright squared on {a}");
        }
    }

    #[test]
    fn omega_structural_behavior() {
        // UpDown reverses vertical composites.
        let t = pt("capL ; cupL");
        let im = omega_apply(OmegaOp::UpDown, &t, Z).unwrap();
        assert_eq!(im, pt("capL ; cupL"));
        // LeftRight reverses horizontal order.
        let t = pt("tok | tokv");
        let im = omega_apply(OmegaOp::LeftRight, &t, Z).unwrap();
        assert_eq!(im, pt("tokv | tok"));
        // Minus flips the sign of z in scalars.
        let t = pt("(z)*x+");
        let im = omega_apply(OmegaOp::Minus, &t, Z).unwrap();
        let (d, c) = boundary(&im).unwrap();
        assert_eq!((d.to_string(), c.to_string()), ("^^".into(), "^^".into()));
        let expected = pt("(-z)*((-1)*x+)");
        assert_eq!(im, expected);
        // Bounce swaps token flavors and crossing signs.
        let t = pt("dot ; tok");
        let im = omega_apply(OmegaOp::Bounce, &t, Z).unwrap();
        assert_eq!(im, pt("tok ; dot"));
        // Boundary is preserved (with flipped letters) by UpDown.
        let t = pt("xr+ ; (id(v) | tok)");
        let im = omega_apply(OmegaOp::UpDown, &t, Z).unwrap();
        let (d0, c0) = boundary(&t).unwrap();
        let (d1, c1) = boundary(&im).unwrap();
        assert_eq!(d1, c0.flip_letters());
        assert_eq!(c1, d0.flip_letters());
    }

    #[test]
    fn omega_boundary_preservation_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let d = random_diagram(&mut rng, true);
            let t = canonical_positive_lift(&d).unwrap().to_term(&d);
            for op in [
                OmegaOp::Minus,
                OmegaOp::UpDown,
                OmegaOp::LeftRight,
                OmegaOp::Pivot,
                OmegaOp::Bounce,
            ] {
                let im = omega_apply(op, &t, Z).unwrap();
                let (d1, c1) = boundary(&im)
                    .unwrap_or_else(|e| panic!("{op:?} image fails to type-check: {e}"));
                let (d0, c0) = boundary(&t).unwrap();
                match op {
                    OmegaOp::Minus | OmegaOp::Bounce => {
                        assert_eq!((d1, c1), (d0, c0));
                    }
                    OmegaOp::UpDown => {
                        assert_eq!(d1, c0.flip_letters());
                        assert_eq!(c1, d0.flip_letters());
                    }
                    OmegaOp::LeftRight => {
                        assert_eq!(d1, d0.reversed());
                        assert_eq!(c1, c0.reversed());
                    }
                    OmegaOp::Pivot => {
                        assert_eq!(d1, c0.flip_letters().reversed());
                        assert_eq!(c1, d0.flip_letters().reversed());
                    }
                }
            }
        }
    }
}
