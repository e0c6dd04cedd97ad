//! Exact coefficient arithmetic.
//!
//! Scalars live in one of two rings, tracked by [`ScalarMode`]:
//!
//! - `AbstractZ`: the polynomial ring ℤ[z] (well, ℚ[z]; coefficients are
//!   arbitrary-precision rationals).  The variable `z` is *not* invertible,
//!   so only nonnegative exponents are admitted.
//! - `QLaurent`: the Laurent polynomial ring ℤ[q,q⁻¹] (again with rational
//!   coefficients), in which `z` becomes the element q − q⁻¹.
//!
//! Modes never coerce silently: mixing them in an arithmetic operation is an
//! error, and the only bridge is the explicit [`LaurentScalar::to_q`]
//! substitution z ↦ q − q⁻¹.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

/// Which ring a [`LaurentScalar`] lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ScalarMode {
    /// Polynomials in `z` (nonnegative exponents only).
    AbstractZ,
    /// Laurent polynomials in `q`.
    QLaurent,
}

impl ScalarMode {
    /// The display name of the variable for this mode.
    pub fn variable(self) -> char {
        match self {
            ScalarMode::AbstractZ => 'z',
            ScalarMode::QLaurent => 'q',
        }
    }
}

/// Errors produced by scalar construction and arithmetic.
#[derive(Debug, Error)]
pub enum ScalarError {
    /// Two scalars from different rings were combined.
    #[error("scalar mode mismatch: {0:?} vs {1:?}")]
    ModeMismatch(ScalarMode, ScalarMode),
    /// A negative exponent was requested in ℤ[z].
    #[error("negative exponent {0} is not allowed in the polynomial ring Z[z]")]
    NegativeExponent(i64),
    /// Evaluation at q = 0, where q⁻¹ is undefined.
    #[error("cannot evaluate a Laurent polynomial at 0")]
    ZeroEvaluationPoint,
    /// The text did not parse as a scalar.
    #[error("parse error at byte {position}: {message}")]
    Parse {
        /// Byte offset of the offending input.
        position: usize,
        /// Human-readable description.
        message: String,
    },
    /// `ladder_sum` was called with indices out of order.
    #[error("ladder sum requires i < j in the order -n < ... < -1 < 1 < ... < n (got i={0}, j={1})")]
    LadderOrder(i64, i64),
    /// An index outside {±1, …, ±n} was supplied.
    #[error("index {0} is outside the index set for n={1}")]
    IndexRange(i64, i64),
}

/// An exact scalar: a finite map exponent ↦ rational coefficient, in the ring
/// selected by `mode`.  Stored coefficients are never zero, so equality is
/// structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LaurentScalar {
    mode: ScalarMode,
    terms: BTreeMap<i64, BigRational>,
}

impl LaurentScalar {
    /// The zero scalar.
    pub fn zero(mode: ScalarMode) -> Self {
        LaurentScalar { mode, terms: BTreeMap::new() }
    }

    /// The unit scalar.
    pub fn one(mode: ScalarMode) -> Self {
        Self::from_int(mode, 1)
    }

    /// A constant integer scalar.
    pub fn from_int(mode: ScalarMode, value: i64) -> Self {
        let mut terms = BTreeMap::new();
        if value != 0 {
            terms.insert(0, BigRational::from_integer(BigInt::from(value)));
        }
        LaurentScalar { mode, terms }
    }

    /// A constant rational scalar.
    pub fn from_rational(mode: ScalarMode, value: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !value.is_zero() {
            terms.insert(0, value);
        }
        LaurentScalar { mode, terms }
    }

    /// The monomial `coeff · var^exp`.
    pub fn monomial(mode: ScalarMode, exp: i64, coeff: BigRational) -> Result<Self, ScalarError> {
        if mode == ScalarMode::AbstractZ && exp < 0 {
            return Err(ScalarError::NegativeExponent(exp));
        }
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        Ok(LaurentScalar { mode, terms })
    }

    /// The monomial `q^exp` (QLaurent mode).
    pub fn q_pow(exp: i64) -> Self {
        Self::monomial(ScalarMode::QLaurent, exp, BigRational::one()).expect("q^k always valid")
    }

    /// The element z = q − q⁻¹ of the Laurent ring.
    pub fn z_in_q() -> Self {
        Self::q_pow(1) - Self::q_pow(-1)
    }

    /// The variable z of the polynomial ring ℤ[z].
    pub fn z_var() -> Self {
        Self::monomial(ScalarMode::AbstractZ, 1, BigRational::one()).expect("z valid")
    }

    /// The ring this scalar lives in.
    pub fn mode(&self) -> ScalarMode {
        self.mode
    }

    /// Whether this is the zero scalar.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Whether this is the unit scalar.
    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.get(&0).map(|c| c.is_one()).unwrap_or(false)
    }

    /// Iterate over (exponent, coefficient) pairs in ascending exponent order.
    pub fn iter_terms(&self) -> impl Iterator<Item = (&i64, &BigRational)> {
        self.terms.iter()
    }

    fn check_mode(&self, other: &Self) -> Result<(), ScalarError> {
        if self.mode != other.mode {
            Err(ScalarError::ModeMismatch(self.mode, other.mode))
        } else {
            Ok(())
        }
    }

    /// Checked addition.
    pub fn try_add(&self, other: &Self) -> Result<Self, ScalarError> {
        self.check_mode(other)?;
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(*e).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(e);
            }
        }
        Ok(LaurentScalar { mode: self.mode, terms })
    }

    /// Checked subtraction.
    pub fn try_sub(&self, other: &Self) -> Result<Self, ScalarError> {
        self.try_add(&other.clone().neg())
    }

    /// Checked multiplication.
    pub fn try_mul(&self, other: &Self) -> Result<Self, ScalarError> {
        self.check_mode(other)?;
        let mut terms: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1 + e2;
                let entry = terms.entry(e).or_insert_with(BigRational::zero);
                *entry += c1 * c2;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(LaurentScalar { mode: self.mode, terms })
    }

    /// Multiply by an integer.
    pub fn scale_int(&self, k: i64) -> Self {
        self.try_mul(&Self::from_int(self.mode, k)).expect("same mode")
    }

    /// Exact evaluation at the point `x0`.  In `QLaurent` mode `x0` must be
    /// nonzero (q⁻¹ appears); in `AbstractZ` mode any point is fine.
    pub fn specialize(&self, x0: &BigRational) -> Result<BigRational, ScalarError> {
        if self.mode == ScalarMode::QLaurent && x0.is_zero() {
            return Err(ScalarError::ZeroEvaluationPoint);
        }
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            acc += c * rational_pow(x0, *e);
        }
        Ok(acc)
    }

    /// The image of this scalar under the explicit substitution z ↦ q − q⁻¹.
    /// Identity on scalars already in `QLaurent` mode.
    pub fn to_q(&self) -> Self {
        match self.mode {
            ScalarMode::QLaurent => self.clone(),
            ScalarMode::AbstractZ => {
                let z = Self::z_in_q();
                let mut acc = Self::zero(ScalarMode::QLaurent);
                for (e, c) in &self.terms {
                    debug_assert!(*e >= 0);
                    let mut term = Self::from_rational(ScalarMode::QLaurent, c.clone());
                    for _ in 0..*e {
                        term = term * z.clone();
                    }
                    acc = acc + term;
                }
                acc
            }
        }
    }

    /// Parse the textual format produced by `Display`, e.g. `3q^2 - q^-1` or
    /// `z^2 + 1`.  The variable present in the text determines the mode;
    /// constants parse in the requested `mode`.
    pub fn parse(text: &str, mode: ScalarMode) -> Result<Self, ScalarError> {
        Parser { input: text.as_bytes(), pos: 0, mode }.parse()
    }
}

/// `x0^e` for possibly negative `e` (caller guarantees `x0 ≠ 0` when `e < 0`).
fn rational_pow(x0: &BigRational, e: i64) -> BigRational {
    let ue = e.unsigned_abs() as u32;
    let p = num_traits::pow::pow(x0.clone(), ue as usize);
    if e >= 0 {
        p
    } else {
        p.recip()
    }
}

impl Add for LaurentScalar {
    type Output = LaurentScalar;
    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("scalar mode mismatch in +")
    }
}

impl Sub for LaurentScalar {
    type Output = LaurentScalar;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(&rhs).expect("scalar mode mismatch in -")
    }
}

impl Mul for LaurentScalar {
    type Output = LaurentScalar;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(&rhs).expect("scalar mode mismatch in *")
    }
}

impl Neg for LaurentScalar {
    type Output = LaurentScalar;
    fn neg(self) -> Self {
        let terms = self.terms.into_iter().map(|(e, c)| (e, -c)).collect();
        LaurentScalar { mode: self.mode, terms }
    }
}

impl fmt::Display for LaurentScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let var = self.mode.variable();
        // Descending exponent order.
        for (idx, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if *e == 0 {
                write!(f, "{abs}")?;
            } else {
                if !abs.is_one() {
                    write!(f, "{abs}")?;
                }
                write!(f, "{var}")?;
                if *e != 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
    mode: ScalarMode,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> ScalarError {
        ScalarError::Parse { position: self.pos, message: message.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.pos += 1;
        }
    }

    fn parse(mut self) -> Result<LaurentScalar, ScalarError> {
        let mut acc = LaurentScalar::zero(self.mode);
        self.skip_ws();
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(b'+') if !first => {
                    self.pos += 1;
                    1
                }
                Some(b'-') => {
                    self.pos += 1;
                    -1
                }
                Some(_) if first => 1,
                None if first => return Err(self.error("empty scalar")),
                None => break,
                Some(other) => {
                    return Err(self.error(format!("expected '+' or '-', found '{}'", other as char)))
                }
            };
            self.skip_ws();
            let term = self.parse_term()?;
            let signed = if sign < 0 { -term } else { term };
            acc = acc.try_add(&signed)?;
            self.skip_ws();
            first = false;
            if self.peek().is_none() {
                break;
            }
        }
        Ok(acc)
    }

    fn parse_term(&mut self) -> Result<LaurentScalar, ScalarError> {
        // [rational] [var [^ int]]
        let coeff = if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.parse_rational()?
        } else {
            BigRational::one()
        };
        let var = self.mode.variable() as u8;
        if self.peek() == Some(var) {
            self.pos += 1;
            let exp = if self.peek() == Some(b'^') {
                self.pos += 1;
                self.parse_int()?
            } else {
                1
            };
            if self.mode == ScalarMode::AbstractZ && exp < 0 {
                return Err(ScalarError::NegativeExponent(exp));
            }
            LaurentScalar::monomial(self.mode, exp, coeff)
        } else {
            Ok(LaurentScalar::from_rational(self.mode, coeff))
        }
    }

    fn parse_rational(&mut self) -> Result<BigRational, ScalarError> {
        let num = self.parse_uint()?;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let den = self.parse_uint()?;
            if den.is_zero() {
                return Err(self.error("zero denominator"));
            }
            Ok(BigRational::new(num, den))
        } else {
            Ok(BigRational::from_integer(num))
        }
    }

    fn parse_uint(&mut self) -> Result<BigInt, ScalarError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a number"));
        }
        let text = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
        text.parse::<BigInt>().map_err(|e| self.error(e.to_string()))
    }

    fn parse_int(&mut self) -> Result<i64, ScalarError> {
        let neg = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an exponent"));
        }
        let text = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
        let v: i64 = text.parse().map_err(|e: std::num::ParseIntError| self.error(e.to_string()))?;
        Ok(if neg { -v } else { v })
    }
}

// ---------------------------------------------------------------------------
// Index combinatorics shared with the ladder sums.
// ---------------------------------------------------------------------------

/// The parity p(i): 0 for positive indices, 1 for negative.
pub fn parity(i: i64) -> u8 {
    if i > 0 {
        0
    } else {
        1
    }
}

/// sgn(i) = (−1)^{p(i)}.
pub fn sign_of(i: i64) -> i64 {
    if i > 0 {
        1
    } else {
        -1
    }
}

/// Position of `i` in the total order −n < … < −1 < 1 < … < n (0-based).
pub fn order_position(i: i64, n: i64) -> i64 {
    if i < 0 {
        n + i
    } else {
        n + i - 1
    }
}

/// Whether `i < j` in the total order −n < … < −1 < 1 < … < n.
pub fn index_lt(i: i64, j: i64, n: i64) -> bool {
    order_position(i, n) < order_position(j, n)
}

fn check_index(i: i64, n: i64) -> Result<(), ScalarError> {
    if i == 0 || i.abs() > n {
        Err(ScalarError::IndexRange(i, n))
    } else {
        Ok(())
    }
}

/// The telescoping sums z·Σ_{i<k<j} (−1)^{p(k)} q^{±2|k|}, computed by their
/// closed forms:
///
/// - `sign_exp = +2`: q^{2|j|−sgn(j)} − q^{2|i|+sgn(i)},
/// - `sign_exp = −2`: q^{−2|i|−sgn(i)} − q^{−2|j|+sgn(j)}.
///
/// Requires i < j in the order −n < … < −1 < 1 < … < n.
pub fn ladder_sum(i: i64, j: i64, sign_exp: i32, n: i64) -> Result<LaurentScalar, ScalarError> {
    check_index(i, n)?;
    check_index(j, n)?;
    if !index_lt(i, j, n) {
        return Err(ScalarError::LadderOrder(i, j));
    }
    let val = match sign_exp {
        2 => LaurentScalar::q_pow(2 * j.abs() - sign_of(j)) - LaurentScalar::q_pow(2 * i.abs() + sign_of(i)),
        -2 => LaurentScalar::q_pow(-2 * i.abs() - sign_of(i)) - LaurentScalar::q_pow(-2 * j.abs() + sign_of(j)),
        other => {
            return Err(ScalarError::Parse {
                position: 0,
                message: format!("sign_exp must be +2 or -2, got {other}"),
            })
        }
    };
    Ok(val)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn q(k: i64) -> LaurentScalar {
        LaurentScalar::q_pow(k)
    }

    #[test]
    fn basic_identities() {
        // (q − q⁻¹)·q = q² − 1
        let z = LaurentScalar::z_in_q();
        assert_eq!(z.clone() * q(1), q(2) - LaurentScalar::one(ScalarMode::QLaurent));
        // z·0 = 0 with an empty term map
        let zero = LaurentScalar::zero(ScalarMode::AbstractZ);
        assert!((LaurentScalar::z_var() * zero).is_zero());
        // (q + q⁻¹)(q − q⁻¹) = q² − q⁻²
        assert_eq!((q(1) + q(-1)) * (q(1) - q(-1)), q(2) - q(-2));
    }

    #[test]
    fn mode_mismatch_is_an_error() {
        let a = LaurentScalar::z_var();
        let b = LaurentScalar::q_pow(1);
        assert!(matches!(a.try_add(&b), Err(ScalarError::ModeMismatch(_, _))));
        assert!(matches!(a.try_mul(&b), Err(ScalarError::ModeMismatch(_, _))));
    }

    fn random_scalar(rng: &mut impl Rng, mode: ScalarMode) -> LaurentScalar {
        let mut acc = LaurentScalar::zero(mode);
        for _ in 0..rng.gen_range(0..5) {
            let e = match mode {
                ScalarMode::AbstractZ => rng.gen_range(0..6),
                ScalarMode::QLaurent => rng.gen_range(-5..6),
            };
            let c = BigRational::from_integer(BigInt::from(rng.gen_range(-9i64..10)));
            acc = acc + LaurentScalar::monomial(mode, e, c).unwrap();
        }
        acc
    }

    #[test]
    fn ring_axioms_randomized() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for mode in [ScalarMode::AbstractZ, ScalarMode::QLaurent] {
            for _ in 0..50 {
                let a = random_scalar(&mut rng, mode);
                let b = random_scalar(&mut rng, mode);
                let c = random_scalar(&mut rng, mode);
                assert_eq!(
                    (a.clone() * b.clone()) * c.clone(),
                    a.clone() * (b.clone() * c.clone())
                );
                assert_eq!(
                    a.clone() * (b.clone() + c.clone()),
                    a.clone() * b.clone() + a.clone() * c.clone()
                );
                assert_eq!(a.clone() + b.clone(), b.clone() + a.clone());
                assert_eq!(a.clone() * b.clone(), b.clone() * a.clone());
            }
        }
    }

    #[test]
    fn specialize_is_a_homomorphism() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let q0 = BigRational::new(BigInt::from(3), BigInt::from(2));
        for _ in 0..30 {
            let a = random_scalar(&mut rng, ScalarMode::QLaurent);
            let b = random_scalar(&mut rng, ScalarMode::QLaurent);
            let ab = a.try_mul(&b).unwrap();
            assert_eq!(
                ab.specialize(&q0).unwrap(),
                a.specialize(&q0).unwrap() * b.specialize(&q0).unwrap()
            );
        }
        // q² − 1 at q0 = 2 → 3
        let p = q(2) - LaurentScalar::one(ScalarMode::QLaurent);
        assert_eq!(p.specialize(&BigRational::from_integer(BigInt::from(2))).unwrap(),
                   BigRational::from_integer(BigInt::from(3)));
        // q − q⁻¹ vanishes at q0 = 1
        assert!(LaurentScalar::z_in_q()
            .specialize(&BigRational::one())
            .unwrap()
            .is_zero());
        // Evaluation at 0 is rejected in Laurent mode.
        assert!(matches!(
            q(1).specialize(&BigRational::zero()),
            Err(ScalarError::ZeroEvaluationPoint)
        ));
    }

    #[test]
    fn to_q_substitutes_z() {
        let z2 = LaurentScalar::z_var() * LaurentScalar::z_var();
        let expected = LaurentScalar::z_in_q() * LaurentScalar::z_in_q();
        assert_eq!(z2.to_q(), expected);
    }

    #[test]
    fn display_parse_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for mode in [ScalarMode::AbstractZ, ScalarMode::QLaurent] {
            for _ in 0..200 {
                let a = random_scalar(&mut rng, mode);
                let text = a.to_string();
                let back = LaurentScalar::parse(&text, mode).unwrap();
                assert_eq!(a, back, "round trip failed for {text}");
            }
        }
        assert_eq!(
            LaurentScalar::parse("3q^2 - q^-1", ScalarMode::QLaurent).unwrap(),
            q(2).scale_int(3) - q(-1)
        );
        assert_eq!(
            LaurentScalar::parse("z^2 + 1", ScalarMode::AbstractZ).unwrap(),
            LaurentScalar::z_var() * LaurentScalar::z_var() + LaurentScalar::one(ScalarMode::AbstractZ)
        );
        assert_eq!(LaurentScalar::parse("0", ScalarMode::QLaurent).unwrap(),
                   LaurentScalar::zero(ScalarMode::QLaurent));
    }

    /// Brute-force z·Σ_{i<k<j} (−1)^{p(k)} q^{s·|k|}.
    fn ladder_brute(i: i64, j: i64, s: i64, n: i64) -> LaurentScalar {
        let mut acc = LaurentScalar::zero(ScalarMode::QLaurent);
        for k in (-n..=n).filter(|k| *k != 0) {
            if index_lt(i, k, n) && index_lt(k, j, n) {
                let term = LaurentScalar::q_pow(s * k.abs()).scale_int(sign_of(k));
                acc = acc + term;
            }
        }
        LaurentScalar::z_in_q() * acc
    }

    #[test]
    fn ladder_closed_forms() {
        for n in 1..=4i64 {
            let indices: Vec<i64> = (-n..=n).filter(|k| *k != 0).collect();
            for &i in &indices {
                for &j in &indices {
                    if !index_lt(i, j, n) {
                        assert!(ladder_sum(i, j, 2, n).is_err());
                        continue;
                    }
                    assert_eq!(ladder_sum(i, j, 2, n).unwrap(), ladder_brute(i, j, 2, n),
                               "ladder+ n={n} i={i} j={j}");
                    assert_eq!(ladder_sum(i, j, -2, n).unwrap(), ladder_brute(i, j, -2, n),
                               "ladder- n={n} i={i} j={j}");
                }
            }
        }
        // n=1, i=−1, j=1: the closed form telescopes to zero.
        assert!(ladder_sum(-1, 1, 2, 1).unwrap().is_zero());
        // n=2, i=1, j=2: empty summation range.
        assert!(ladder_sum(1, 2, 2, 2).unwrap().is_zero());
        // n=2, i=−2, j=2 with exponent −2: also telescopes to zero.
        assert!(ladder_sum(-2, 2, -2, 2).unwrap().is_zero());
        // n=2, i=−2, j=1, exponent −2: one summand, z·(−q⁻²) = q⁻³ − q⁻¹.
        assert_eq!(ladder_sum(-2, 1, -2, 2).unwrap(),
                   LaurentScalar::q_pow(-3) - LaurentScalar::q_pow(-1));
    }
}
