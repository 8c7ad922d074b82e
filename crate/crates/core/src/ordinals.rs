//! Ordinal notations below epsilon_0 in Cantor normal form.
//!
//! A notation is a sum `w^e1*c1 + ... + w^ek*ck` with strictly decreasing
//! exponents (themselves notations) and positive coefficients; the empty sum
//! is 0. Equal ordinals have identical term lists, so structural equality is
//! ordinal equality.

use std::cmp::Ordering;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Parity of the finite part of a notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

/// Cantor-normal-form ordinal notation.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct OrdinalNotation {
    /// (exponent, coefficient) pairs, exponents strictly decreasing, coefficients >= 1.
    terms: Vec<(OrdinalNotation, u64)>,
}

impl OrdinalNotation {
    pub fn zero() -> Self {
        OrdinalNotation { terms: Vec::new() }
    }

    pub fn one() -> Self {
        OrdinalNotation::from_nat(1)
    }

    pub fn omega() -> Self {
        OrdinalNotation {
            terms: vec![(OrdinalNotation::one(), 1)],
        }
    }

    pub fn from_nat(n: u64) -> Self {
        if n == 0 {
            OrdinalNotation::zero()
        } else {
            OrdinalNotation {
                terms: vec![(OrdinalNotation::zero(), n)],
            }
        }
    }

    /// `w * n`, the n-th multiple of omega.
    pub fn omega_times(n: u64) -> Self {
        if n == 0 {
            OrdinalNotation::zero()
        } else {
            OrdinalNotation {
                terms: vec![(OrdinalNotation::one(), n)],
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Some(n) when the notation denotes the natural number n.
    pub fn as_nat(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(e, c)] if e.is_zero() => Some(*c),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_nat().is_some()
    }

    /// Splits `self` as (limit part, finite part): `a = lambda + n`.
    pub fn split_finite(&self) -> (OrdinalNotation, u64) {
        match self.terms.last() {
            Some((e, c)) if e.is_zero() => {
                let limit = OrdinalNotation {
                    terms: self.terms[..self.terms.len() - 1].to_vec(),
                };
                (limit, *c)
            }
            _ => (self.clone(), 0),
        }
    }

    /// Immediate predecessor, when `self` is a successor ordinal.
    pub fn pred(&self) -> Option<OrdinalNotation> {
        let (limit, n) = self.split_finite();
        if n == 0 {
            None
        } else {
            Some(limit.add_nat(n - 1))
        }
    }

    pub fn is_limit(&self) -> bool {
        !self.is_zero() && self.pred().is_none()
    }

    pub fn is_successor(&self) -> bool {
        self.pred().is_some()
    }

    /// Parity of the finite part (limit ordinals are even).
    pub fn parity(&self) -> Parity {
        if self.split_finite().1 % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn succ(&self) -> OrdinalNotation {
        self.add_nat(1)
    }

    pub fn add_nat(&self, n: u64) -> OrdinalNotation {
        self.add(&OrdinalNotation::from_nat(n))
    }

    /// Ordinal sum `self + b` (the tail of the left addend may be absorbed).
    pub fn add(&self, b: &OrdinalNotation) -> OrdinalNotation {
        let Some((eb, cb)) = b.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<(OrdinalNotation, u64)> = self
            .terms
            .iter()
            .take_while(|(e, _)| e > eb)
            .cloned()
            .collect();
        let mut rest = b.terms.clone();
        if let Some((e, c)) = self.terms.get(terms.len()) {
            if e == eb {
                terms.push((e.clone(), c.saturating_add(*cb)));
                rest.remove(0);
            }
        }
        terms.extend(rest);
        OrdinalNotation { terms }
    }

    /// Left multiplication by omega: `w * self`.
    pub fn mul_left_omega(&self) -> OrdinalNotation {
        let one = OrdinalNotation::one();
        OrdinalNotation {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (one.add(e), *c))
                .collect(),
        }
    }

    /// `w ^ self` as a single CNF term.
    pub fn omega_pow(&self) -> OrdinalNotation {
        OrdinalNotation {
            terms: vec![(self.clone(), 1)],
        }
    }

    /// Doubling with the limit part preserved: `lambda + n |-> lambda + 2n`.
    pub fn double(&self) -> OrdinalNotation {
        let (limit, n) = self.split_finite();
        limit.add_nat(n * 2)
    }

    /// Halving with the limit part preserved: `lambda + n |-> (lambda + n/2, n mod 2)`.
    pub fn half_floor(&self) -> (OrdinalNotation, Parity) {
        let (limit, n) = self.split_finite();
        let parity = if n % 2 == 0 { Parity::Even } else { Parity::Odd };
        (limit.add_nat(n / 2), parity)
    }

    /// Stage-`s` member of a fundamental sequence for `self`.
    ///
    /// Successors return their predecessor at every stage. For limits the
    /// sequence is strictly increasing, cofinal, and every member is odd.
    pub fn fund_seq(&self, s: u64) -> Result<OrdinalNotation> {
        if self.is_zero() {
            return Err(Error::OrdinalRange("fundamental sequence of 0".into()));
        }
        if let Some(p) = self.pred() {
            return Ok(p);
        }
        // Limit: rewrite the last term.
        let mut head = self.terms.clone();
        let (e, c) = head.pop().expect("limit notation has terms");
        debug_assert!(!e.is_zero());
        let prefix = OrdinalNotation { terms: head };
        let prefix = if c > 1 {
            prefix.add(&OrdinalNotation {
                terms: vec![(e.clone(), c - 1)],
            })
        } else {
            prefix
        };
        let step = match e.pred() {
            // w^(e'+1): approximate with w^e' * s, adjusted to be odd.
            Some(ep) if ep.is_zero() => OrdinalNotation::from_nat(2 * s + 1),
            Some(ep) => OrdinalNotation {
                terms: if s == 0 {
                    vec![]
                } else {
                    vec![(ep, s)]
                },
            }
            .add_nat(1),
            // w^e with e a limit: climb e's own fundamental sequence.
            None => e.fund_seq(s)?.omega_pow().add_nat(1),
        };
        Ok(prefix.add(&step))
    }

    /// Number of CNF terms (used by size heuristics in tests).
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn parse(text: &str) -> Result<OrdinalNotation> {
        parse::notation(text)
    }
}

impl PartialOrd for OrdinalNotation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdinalNotation {
    fn cmp(&self, other: &Self) -> Ordering {
        let mut a = self.terms.iter();
        let mut b = other.terms.iter();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some((ea, ca)), Some((eb, cb))) => {
                    match ea.cmp(eb).then(ca.cmp(cb)) {
                        Ordering::Equal => continue,
                        ord => {
                            // The leading term dominates only while exponents
                            // or coefficients differ; the first difference wins.
                            return ord;
                        }
                    }
                }
            }
        }
    }
}

impl fmt::Display for OrdinalNotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if e.is_zero() {
                write!(f, "{c}")?;
            } else {
                if e.as_nat() == Some(1) {
                    write!(f, "w")?;
                } else if let Some(n) = e.as_nat() {
                    write!(f, "w^{n}")?;
                } else {
                    write!(f, "w^({e})")?;
                }
                if *c != 1 {
                    write!(f, "*{c}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for OrdinalNotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for OrdinalNotation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for OrdinalNotation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        OrdinalNotation::parse(&text).map_err(D::Error::custom)
    }
}

mod parse {
    use super::OrdinalNotation;
    use crate::error::{Error, Result};

    struct Cursor<'a> {
        text: &'a [u8],
        pos: usize,
    }

    impl<'a> Cursor<'a> {
        fn skip_ws(&mut self) {
            while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
        }

        fn peek(&mut self) -> Option<u8> {
            self.skip_ws();
            self.text.get(self.pos).copied()
        }

        fn bump(&mut self) -> Option<u8> {
            let c = self.peek()?;
            self.pos += 1;
            Some(c)
        }

        fn nat(&mut self) -> Result<u64> {
            self.skip_ws();
            let start = self.pos;
            while self
                .text
                .get(self.pos)
                .is_some_and(|c| c.is_ascii_digit())
            {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(Error::Parse(format!(
                    "expected a number at offset {start}"
                )));
            }
            std::str::from_utf8(&self.text[start..self.pos])
                .expect("digits are utf8")
                .parse()
                .map_err(|e| Error::Parse(format!("{e}")))
        }

        fn term(&mut self) -> Result<OrdinalNotation> {
            match self.peek() {
                Some(b'w') => {
                    self.bump();
                    let exponent = if self.peek() == Some(b'^') {
                        self.bump();
                        if self.peek() == Some(b'(') {
                            self.bump();
                            let inner = self.sum()?;
                            if self.bump() != Some(b')') {
                                return Err(Error::Parse("expected ')'".into()));
                            }
                            inner
                        } else if self.peek() == Some(b'w') {
                            self.term()?
                        } else {
                            OrdinalNotation::from_nat(self.nat()?)
                        }
                    } else {
                        OrdinalNotation::one()
                    };
                    let coeff = if self.peek() == Some(b'*') {
                        self.bump();
                        self.nat()?
                    } else {
                        1
                    };
                    if coeff == 0 {
                        return Err(Error::Parse("coefficient 0 is not canonical".into()));
                    }
                    Ok(OrdinalNotation {
                        terms: vec![(exponent, coeff)],
                    })
                }
                Some(c) if c.is_ascii_digit() => Ok(OrdinalNotation::from_nat(self.nat()?)),
                other => Err(Error::Parse(format!("unexpected input {other:?}"))),
            }
        }

        fn sum(&mut self) -> Result<OrdinalNotation> {
            // Summation via `add` canonicalizes any term order the user wrote.
            let mut acc = self.term()?;
            while self.peek() == Some(b'+') {
                self.bump();
                let t = self.term()?;
                acc = acc.add(&t);
            }
            Ok(acc)
        }
    }

    pub fn notation(text: &str) -> Result<OrdinalNotation> {
        let mut cur = Cursor {
            text: text.as_bytes(),
            pos: 0,
        };
        let n = cur.sum()?;
        cur.skip_ws();
        if cur.pos != cur.text.len() {
            return Err(Error::Parse(format!(
                "trailing input at offset {}",
                cur.pos
            )));
        }
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ord(text: &str) -> OrdinalNotation {
        OrdinalNotation::parse(text).unwrap()
    }

    #[test]
    fn cmp_examples() {
        assert!(ord("w^2") > ord("w*3"));
        assert_eq!(ord("0"), ord("0"));
        assert!(ord("w + 1") < ord("w*2"));
    }

    #[test]
    fn add_examples() {
        assert_eq!(OrdinalNotation::one().add(&ord("w")), ord("w"));
        assert_eq!(ord("w*2").add(&ord("w*3")), ord("w*5"));
        assert_eq!(ord("w^2 + w").add(&ord("w^2")), ord("w^2*2"));
    }

    #[test]
    fn omega_ops_examples() {
        assert_eq!(OrdinalNotation::from_nat(3).mul_left_omega(), ord("w*3"));
        assert_eq!(OrdinalNotation::from_nat(2).omega_pow(), ord("w^2"));
        assert_eq!(ord("w + 3").mul_left_omega(), ord("w^2 + w*3"));
        assert_eq!(ord("w").mul_left_omega(), ord("w^2"));
        // w * w^w = w^(1+w) = w^w
        assert_eq!(ord("w^(w)").mul_left_omega(), ord("w^(w)"));
    }

    #[test]
    fn double_and_half() {
        assert_eq!(ord("w + 3").double(), ord("w + 6"));
        assert_eq!(
            ord("w + 5").half_floor(),
            (ord("w + 2"), Parity::Odd)
        );
        assert_eq!(OrdinalNotation::zero().double(), OrdinalNotation::zero());
        assert_eq!(ord("w^2 + 4").half_floor(), (ord("w^2 + 2"), Parity::Even));
    }

    #[test]
    fn fund_seq_examples() {
        assert_eq!(ord("w").fund_seq(3).unwrap(), ord("7"));
        for s in [0, 3, 17] {
            assert_eq!(
                OrdinalNotation::from_nat(5).fund_seq(s).unwrap(),
                OrdinalNotation::from_nat(4)
            );
        }
        assert_eq!(ord("w^2").fund_seq(2).unwrap(), ord("w*2 + 1"));
        assert!(ord("0").fund_seq(0).is_err());
    }

    #[test]
    fn fund_seq_is_increasing_cofinal_odd() {
        for limit in ["w", "w*2", "w^2", "w^2*3 + w", "w^(w)", "w^(w + 1) + w^3"] {
            let a = ord(limit);
            let mut prev = OrdinalNotation::zero();
            for s in 0..=100 {
                let v = a.fund_seq(s).unwrap();
                assert!(v < a, "{v} < {a} fails at s={s}");
                assert!(v > prev || s == 0, "not increasing at s={s} for {limit}");
                assert_eq!(v.parity(), Parity::Odd, "{v} not odd for {limit}");
                prev = v;
            }
        }
    }

    fn arb_ordinal(depth: u32) -> BoxedStrategy<OrdinalNotation> {
        if depth == 0 {
            (0u64..6).prop_map(OrdinalNotation::from_nat).boxed()
        } else {
            prop::collection::vec((arb_ordinal(depth - 1), 1u64..4), 0..3)
                .prop_map(|parts| {
                    let mut acc = OrdinalNotation::zero();
                    for (e, c) in parts {
                        let t = OrdinalNotation {
                            terms: vec![(e, c)],
                        };
                        acc = acc.add(&t);
                    }
                    acc
                })
                .boxed()
        }
    }

    proptest! {
        #[test]
        fn add_associative_with_zero_identity(
            a in arb_ordinal(2), b in arb_ordinal(2), c in arb_ordinal(2)
        ) {
            let zero = OrdinalNotation::zero();
            prop_assert_eq!(a.add(&zero), a.clone());
            prop_assert_eq!(zero.add(&a), a.clone());
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        }

        #[test]
        fn cmp_is_total_and_consistent(a in arb_ordinal(2), b in arb_ordinal(2)) {
            match a.cmp(&b) {
                Ordering::Equal => prop_assert_eq!(&a, &b),
                Ordering::Less => prop_assert_eq!(b.cmp(&a), Ordering::Greater),
                Ordering::Greater => prop_assert_eq!(b.cmp(&a), Ordering::Less),
            }
            // a <= a + b and b <= a + b
            let s = a.add(&b);
            prop_assert!(a <= s);
            prop_assert!(b <= s);
        }

        #[test]
        fn printer_parser_round_trip(a in arb_ordinal(3)) {
            let text = a.to_string();
            let back = OrdinalNotation::parse(&text).unwrap();
            prop_assert_eq!(back, a);
        }

        #[test]
        fn half_of_double_is_identity(a in arb_ordinal(2)) {
            let (half, parity) = a.double().half_floor();
            prop_assert_eq!(half, a);
            prop_assert_eq!(parity, Parity::Even);
        }
    }
}
