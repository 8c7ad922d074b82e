//! Oracle sources: finite sets with defaults, lazy predicates, and
//! jump-snapshot-backed membership.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::jump::JumpLab;

/// Answer to a single oracle query at a fixed stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
    /// The source genuinely has no value here (lazy source exhausted).
    Undefined,
    /// A jump-backed source could not certify the answer within the stage.
    Unknown,
}

impl Answer {
    pub fn from_bool(b: bool) -> Answer {
        if b {
            Answer::Yes
        } else {
            Answer::No
        }
    }
}

#[derive(Clone)]
pub enum OracleHandle {
    /// Explicit finite support plus a default answer outside it.
    Finite {
        members: BTreeSet<u64>,
        support: Option<u64>,
        default: bool,
    },
    /// Lazily evaluated set; `None` means the source is undefined there.
    Lazy {
        name: String,
        f: Arc<dyn Fn(u64) -> Option<bool> + Send + Sync>,
    },
    /// Membership in the `level`-th jump of a base oracle, answered by
    /// bounded certified decision with the stage as budget.
    JumpLevel { base: Arc<OracleHandle>, level: u32 },
}

impl OracleHandle {
    pub fn empty() -> OracleHandle {
        OracleHandle::Finite {
            members: BTreeSet::new(),
            support: None,
            default: false,
        }
    }

    pub fn finite(members: impl IntoIterator<Item = u64>, default: bool) -> OracleHandle {
        OracleHandle::Finite {
            members: members.into_iter().collect(),
            support: None,
            default,
        }
    }

    /// Finite characteristic function on `0..support`, undefined beyond.
    pub fn finite_prefix(members: impl IntoIterator<Item = u64>, support: u64) -> OracleHandle {
        OracleHandle::Finite {
            members: members.into_iter().filter(|m| *m < support).collect(),
            support: Some(support),
            default: false,
        }
    }

    pub fn lazy(
        name: impl Into<String>,
        f: impl Fn(u64) -> Option<bool> + Send + Sync + 'static,
    ) -> OracleHandle {
        OracleHandle::Lazy {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn jump(base: OracleHandle, level: u32) -> OracleHandle {
        OracleHandle::JumpLevel {
            base: Arc::new(base),
            level,
        }
    }

    /// Stage-stamped membership answer; deterministic per (query, stage).
    pub fn member(&self, n: u64, stage: u64) -> Answer {
        match self {
            OracleHandle::Finite {
                members,
                support,
                default,
            } => {
                if let Some(bound) = support {
                    if n >= *bound {
                        return Answer::Undefined;
                    }
                }
                // `members` lists the exceptions to the default answer.
                let listed = members.contains(&n);
                Answer::from_bool(if *default { !listed } else { listed })
            }
            OracleHandle::Lazy { f, .. } => match f(n) {
                Some(b) => Answer::from_bool(b),
                None => Answer::Undefined,
            },
            OracleHandle::JumpLevel { base, level } => {
                let lab = JumpLab::new((**base).clone(), *level);
                match lab.decide(*level, n, stage) {
                    (super::Verdict::In, _) => Answer::Yes,
                    (super::Verdict::Out, _) => Answer::No,
                    (super::Verdict::Unknown, _) => Answer::Unknown,
                }
            }
        }
    }
}

impl fmt::Debug for OracleHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleHandle::Finite {
                members,
                support,
                default,
            } => f
                .debug_struct("Finite")
                .field("members", members)
                .field("support", support)
                .field("default", default)
                .finish(),
            OracleHandle::Lazy { name, .. } => write!(f, "Lazy({name})"),
            OracleHandle::JumpLevel { base, level } => {
                write!(f, "JumpLevel(level={level}, base={base:?})")
            }
        }
    }
}
