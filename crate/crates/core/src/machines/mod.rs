//! Toy oracle-machine substrate.
//!
//! Programs are tiny register machines with a single oracle-query
//! instruction, Godel-numbered so that every natural number decodes to some
//! program and every program has infinitely many indices. Staged runs give
//! the c.e. sets `W_e^X[s]`; iterated halting with bounded cycle detection
//! gives certified jump snapshots at small levels. Every question a true
//! jump oracle would answer is three-valued here: `In` and `Out` only come
//! with a certificate, `Unknown` signals budget exhaustion.

mod exec;
mod jump;
mod oracle;
mod program;
mod suite;

pub use exec::{run_program, run_staged, RunOutcome, RunStatus};
pub use jump::{sigma_eval, JumpLab, JumpSnapshot, SigmaIndexedSet, SnapshotCert};
pub use oracle::{Answer, OracleHandle};
pub use program::{looper_index, pad_index_above, Instr, Program, REGISTER_COUNT};
pub use suite::{Suite, SuiteManifest, SuiteProgram};

use serde::{Deserialize, Serialize};

/// Three-valued answer to a bounded membership question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    In,
    Out,
    Unknown,
}

impl Verdict {
    pub fn is_decided(&self) -> bool {
        !matches!(self, Verdict::Unknown)
    }
}

/// The u-th canonical finite set, by binary expansion of `u`.
pub fn canonical_finite_set(u: u64) -> std::collections::BTreeSet<u64> {
    (0..64).filter(|i| (u >> i) & 1 == 1).collect()
}

/// Cantor pairing, a bijection between pairs and naturals.
pub fn pair(a: u64, b: u64) -> u64 {
    let s = a.checked_add(b).expect("pair overflow");
    let tri = s
        .checked_mul(s + 1)
        .map(|t| t / 2)
        .expect("pair overflow");
    tri.checked_add(b).expect("pair overflow")
}

pub fn unpair(n: u64) -> (u64, u64) {
    // Largest s with s(s+1)/2 <= n.
    let mut s = ((((8 * n + 1) as f64).sqrt() as u64).saturating_sub(1)) / 2;
    while (s + 1) * (s + 2) / 2 <= n {
        s += 1;
    }
    while s * (s + 1) / 2 > n {
        s -= 1;
    }
    let b = n - s * (s + 1) / 2;
    (s - b, b)
}

pub fn triple(a: u64, b: u64, c: u64) -> u64 {
    pair(a, pair(b, c))
}

pub fn untriple(n: u64) -> (u64, u64, u64) {
    let (a, rest) = unpair(n);
    let (b, c) = unpair(rest);
    (a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_set_examples() {
        assert!(canonical_finite_set(0).is_empty());
        assert_eq!(
            canonical_finite_set(5),
            [0u64, 2].into_iter().collect()
        );
        assert_eq!(
            canonical_finite_set(6),
            [1u64, 2].into_iter().collect()
        );
    }

    #[test]
    fn pairing_round_trip_examples() {
        assert_eq!(unpair(pair(7, 9)), (7, 9));
        assert_eq!(pair(0, 0), 0);
        assert_eq!(untriple(triple(3, 1, 4)), (3, 1, 4));
    }

    proptest! {
        #[test]
        fn pairing_bijective(n in 0u64..1_000_000) {
            let (a, b) = unpair(n);
            prop_assert_eq!(pair(a, b), n);
        }

        #[test]
        fn pairing_injective(a in 0u64..50_000, b in 0u64..50_000) {
            prop_assert_eq!(unpair(pair(a, b)), (a, b));
        }
    }
}
