//! Exact measure on Cantor space: dyadic rationals and clopen sets.
//!
//! A clopen set is a finite antichain of binary strings (basic cylinders);
//! its measure is the exact dyadic sum of 2^-|s| over the antichain. All
//! arithmetic is integer-exact; nothing here ever rounds.

use std::cmp::Ordering;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact dyadic rational `num / 2^exp`, canonical (odd numerator or zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: i64,
    exp: u32,
}

impl Dyadic {
    pub fn new(num: i64, exp: u32) -> Dyadic {
        Dyadic { num, exp }.normalized()
    }

    pub fn zero() -> Dyadic {
        Dyadic { num: 0, exp: 0 }
    }

    pub fn one() -> Dyadic {
        Dyadic { num: 1, exp: 0 }
    }

    /// `2^-exp`.
    pub fn pow2_neg(exp: u32) -> Dyadic {
        Dyadic { num: 1, exp }
    }

    fn normalized(mut self) -> Dyadic {
        if self.num == 0 {
            return Dyadic { num: 0, exp: 0 };
        }
        while self.num % 2 == 0 && self.exp > 0 {
            self.num /= 2;
            self.exp -= 1;
        }
        self
    }

    pub fn numerator(&self) -> i64 {
        self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let exp = self.exp.max(other.exp);
        let a = self.num << (exp - self.exp);
        let b = other.num << (exp - other.exp);
        Dyadic {
            num: a.checked_add(b).expect("dyadic overflow"),
            exp,
        }
        .normalized()
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&Dyadic {
            num: -other.num,
            exp: other.exp,
        })
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sub(other).num.cmp(&0)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        let (num, exp) = text
            .split_once("/2^")
            .ok_or_else(|| D::Error::custom("expected num/2^exp"))?;
        Ok(Dyadic::new(
            num.parse().map_err(D::Error::custom)?,
            exp.parse().map_err(D::Error::custom)?,
        ))
    }
}

/// A binary string of length at most 64, bit 0 first.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitStr {
    len: u8,
    bits: u64,
}

impl BitStr {
    pub fn empty() -> BitStr {
        BitStr { len: 0, bits: 0 }
    }

    pub fn from_bits(bits: &[bool]) -> BitStr {
        assert!(bits.len() <= 64);
        let mut word = 0u64;
        for (i, b) in bits.iter().enumerate() {
            if *b {
                word |= 1 << i;
            }
        }
        BitStr {
            len: bits.len() as u8,
            bits: word,
        }
    }

    pub fn parse(text: &str) -> Result<BitStr> {
        if text.len() > 64 || text.bytes().any(|c| c != b'0' && c != b'1') {
            return Err(Error::Parse(format!("bad bit string {text:?}")));
        }
        let bits: Vec<bool> = text.bytes().map(|c| c == b'1').collect();
        Ok(BitStr::from_bits(&bits))
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        (self.bits >> i) & 1 == 1
    }

    pub fn push(&self, bit: bool) -> BitStr {
        assert!(self.len < 64);
        let mut next = *self;
        if bit {
            next.bits |= 1 << next.len;
        }
        next.len += 1;
        next
    }

    pub fn is_prefix_of(&self, other: &BitStr) -> bool {
        if self.len > other.len {
            return false;
        }
        let mask = if self.len == 64 {
            u64::MAX
        } else {
            (1u64 << self.len) - 1
        };
        (self.bits & mask) == (other.bits & mask)
    }

    pub fn compatible(&self, other: &BitStr) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// Sibling with the last bit flipped.
    fn sibling(&self) -> Option<BitStr> {
        if self.len == 0 {
            return None;
        }
        let mut s = *self;
        s.bits ^= 1 << (self.len - 1);
        Some(s)
    }

    fn parent(&self) -> Option<BitStr> {
        if self.len == 0 {
            return None;
        }
        let mut s = *self;
        s.len -= 1;
        s.bits &= (1u64 << s.len) - 1;
        Some(s)
    }
}

impl fmt::Display for BitStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            write!(f, "{}", if self.bit(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl Serialize for BitStr {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitStr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        BitStr::parse(&text).map_err(D::Error::custom)
    }
}

/// Finite union of basic cylinders, kept as a canonical antichain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClopenSet {
    strings: Vec<BitStr>,
}

impl ClopenSet {
    pub fn empty() -> ClopenSet {
        ClopenSet { strings: vec![] }
    }

    pub fn full() -> ClopenSet {
        ClopenSet {
            strings: vec![BitStr::empty()],
        }
    }

    pub fn cylinder(prefix: BitStr) -> ClopenSet {
        ClopenSet {
            strings: vec![prefix],
        }
    }

    pub fn from_strings(strings: impl IntoIterator<Item = BitStr>) -> ClopenSet {
        let mut set = ClopenSet {
            strings: strings.into_iter().collect(),
        };
        set.canonicalize();
        set
    }

    pub fn strings(&self) -> &[BitStr] {
        &self.strings
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.strings.as_slice() == [BitStr::empty()]
    }

    fn canonicalize(&mut self) {
        // Drop covered strings, then merge sibling pairs to fixpoint.
        self.strings.sort();
        self.strings.dedup();
        let mut kept: Vec<BitStr> = Vec::with_capacity(self.strings.len());
        for s in &self.strings {
            if !kept.iter().any(|p| p.is_prefix_of(s)) {
                kept.push(*s);
            }
        }
        let mut set: std::collections::BTreeSet<BitStr> = kept.into_iter().collect();
        loop {
            let mut merged = false;
            let snapshot: Vec<BitStr> = set.iter().copied().collect();
            for s in snapshot {
                if !set.contains(&s) {
                    continue;
                }
                if let Some(sib) = s.sibling() {
                    if set.contains(&sib) {
                        set.remove(&s);
                        set.remove(&sib);
                        set.insert(s.parent().expect("non-root has parent"));
                        merged = true;
                    }
                }
            }
            if !merged {
                break;
            }
        }
        self.strings = set.into_iter().collect();
    }

    pub fn union(&self, other: &ClopenSet) -> ClopenSet {
        ClopenSet::from_strings(self.strings.iter().chain(other.strings.iter()).copied())
    }

    pub fn intersect(&self, other: &ClopenSet) -> ClopenSet {
        let mut out = Vec::new();
        for a in &self.strings {
            for b in &other.strings {
                if a.is_prefix_of(b) {
                    out.push(*b);
                } else if b.is_prefix_of(a) {
                    out.push(*a);
                }
            }
        }
        ClopenSet::from_strings(out)
    }

    pub fn complement(&self) -> ClopenSet {
        let mut out = Vec::new();
        self.complement_below(BitStr::empty(), &mut out);
        ClopenSet::from_strings(out)
    }

    fn complement_below(&self, node: BitStr, out: &mut Vec<BitStr>) {
        if self.strings.iter().any(|s| s.is_prefix_of(&node)) {
            return;
        }
        if !self.strings.iter().any(|s| node.is_prefix_of(s)) {
            out.push(node);
            return;
        }
        self.complement_below(node.push(false), out);
        self.complement_below(node.push(true), out);
    }

    pub fn measure(&self) -> Dyadic {
        let mut total = Dyadic::zero();
        for s in &self.strings {
            total = total.add(&Dyadic::pow2_neg(s.len() as u32));
        }
        total
    }

    /// Point membership from a finite prefix of the point.
    ///
    /// Errors with `PrefixTooShort` when the prefix does not yet decide
    /// membership.
    pub fn contains_prefix(&self, prefix: &BitStr) -> Result<bool> {
        if self.strings.iter().any(|s| s.is_prefix_of(prefix)) {
            return Ok(true);
        }
        let need = self
            .strings
            .iter()
            .filter(|s| prefix.is_prefix_of(s))
            .map(|s| s.len())
            .max();
        match need {
            None => Ok(false),
            Some(need) => Err(Error::PrefixTooShort {
                have: prefix.len(),
                need,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dyadic_basic() {
        let half = Dyadic::pow2_neg(1);
        let quarter = Dyadic::pow2_neg(2);
        assert_eq!(half.add(&quarter), Dyadic::new(3, 2));
        assert_eq!(half.sub(&half), Dyadic::zero());
        assert!(quarter < half);
        assert_eq!(Dyadic::new(4, 3), half);
        assert_eq!(Dyadic::new(3, 2).to_string(), "3/2^2");
    }

    #[test]
    fn clopen_basics() {
        let zero = ClopenSet::cylinder(BitStr::parse("0").unwrap());
        let one = ClopenSet::cylinder(BitStr::parse("1").unwrap());
        assert!(zero.union(&one).is_full());
        assert!(zero.intersect(&one).is_empty());
        assert_eq!(zero.complement(), one);
        assert_eq!(zero.measure(), Dyadic::pow2_neg(1));
    }

    #[test]
    fn sibling_merge_canonicalizes() {
        let set = ClopenSet::from_strings([
            BitStr::parse("00").unwrap(),
            BitStr::parse("01").unwrap(),
            BitStr::parse("1").unwrap(),
        ]);
        assert!(set.is_full());
    }

    #[test]
    fn prefix_membership() {
        let set = ClopenSet::cylinder(BitStr::parse("01").unwrap());
        assert!(!set.contains_prefix(&BitStr::parse("1").unwrap()).unwrap());
        assert!(set.contains_prefix(&BitStr::parse("011").unwrap()).unwrap());
        assert!(matches!(
            set.contains_prefix(&BitStr::parse("0").unwrap()),
            Err(crate::Error::PrefixTooShort { .. })
        ));
    }

    fn arb_clopen() -> impl Strategy<Value = ClopenSet> {
        prop::collection::vec((0u64..64, 1u8..7), 0..6).prop_map(|items| {
            ClopenSet::from_strings(items.into_iter().map(|(bits, len)| BitStr {
                len,
                bits: bits & ((1 << len) - 1),
            }))
        })
    }

    proptest! {
        #[test]
        fn complement_partitions_measure(set in arb_clopen()) {
            let co = set.complement();
            prop_assert_eq!(set.measure().add(&co.measure()), Dyadic::one());
            prop_assert!(set.intersect(&co).is_empty());
            prop_assert!(set.union(&co).is_full());
        }

        #[test]
        fn de_morgan(a in arb_clopen(), b in arb_clopen()) {
            let lhs = a.union(&b).complement();
            let rhs = a.complement().intersect(&b.complement());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn intersection_bounded_by_parts(a in arb_clopen(), b in arb_clopen()) {
            let m = a.intersect(&b).measure();
            prop_assert!(m <= a.measure());
            prop_assert!(m <= b.measure());
        }
    }
}
