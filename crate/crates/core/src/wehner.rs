//! The relativised diagonal family and its staged enumeration operator.
//!
//! The family collects codes `{e} (+) F = {2e} u {2x+1 : x in F}` for
//! finite `F` different from the e-th X-c.e. set. The operator maintains
//! one column per triple `(e, u, s0)`: born at stage `s0` with the code of
//! the u-th finite set, and growing by one odd code whenever the column
//! catches up with the stage-s approximation of `{e} (+) W_e^X`, the new
//! element drawn least-first from the join of Y with its complement.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machines::{canonical_finite_set, run_staged, triple, Answer, OracleHandle, Program};

/// Join code of a set element: `{e} (+) F` is `{2e} u {2x+1 : x in F}`.
pub fn member_code(e: u64, set: &BTreeSet<u64>) -> BTreeSet<u64> {
    let mut code: BTreeSet<u64> = set.iter().map(|x| 2 * x + 1).collect();
    code.insert(2 * e);
    code
}

/// Inverse of `member_code`, when the shape fits.
pub fn decode_member(code: &BTreeSet<u64>) -> Result<(u64, BTreeSet<u64>)> {
    let evens: Vec<u64> = code.iter().filter(|x| *x % 2 == 0).copied().collect();
    let [e2] = evens.as_slice() else {
        return Err(Error::Malformed(format!(
            "member code needs exactly one even element, got {evens:?}"
        )));
    };
    Ok((
        e2 / 2,
        code.iter().filter(|x| *x % 2 == 1).map(|x| (x - 1) / 2).collect(),
    ))
}

/// Search bounds for the family and the operator's column universe.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Bounds {
    pub max_e: u64,
    pub max_u: u64,
    pub max_s0: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_e: 6,
            max_u: 8,
            max_s0: 8,
        }
    }
}

/// Why `F != W_e^X` holds for good.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum InequalityCert {
    /// An element of `W_e^X` outside `F`; enumeration only grows.
    Witness { element: u64 },
    /// The run of `e` is complete, its output set differs from `F`.
    CompleteRun { outputs: BTreeSet<u64> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertOutcome {
    ConfirmedNe(InequalityCert),
    /// The run is complete and equals `F`: the pair is not a member.
    ExcludedEq,
    Undecided,
}

/// Certifies `F != W_e^X` or its failure within a stage budget.
pub fn inequality_certificate(
    e: u64,
    set: &BTreeSet<u64>,
    x: &OracleHandle,
    stage: u64,
) -> Result<CertOutcome> {
    let program = Program::decode(e);
    let outcome = crate::machines::run_program(&program, |q| x.member(q, stage), stage);
    match outcome.status {
        crate::machines::RunStatus::OracleUndefined { query } => {
            return Err(Error::OracleUndefined(query))
        }
        crate::machines::RunStatus::OracleUnknown { query } => {
            return Err(Error::Uncertified(format!(
                "oracle answer for {query} uncertified at stage {stage}"
            )))
        }
        _ => {}
    }
    if let Some(witness) = outcome.outputs.difference(set).next() {
        return Ok(CertOutcome::ConfirmedNe(InequalityCert::Witness {
            element: *witness,
        }));
    }
    if outcome.complete() {
        if &outcome.outputs == set {
            Ok(CertOutcome::ExcludedEq)
        } else {
            Ok(CertOutcome::ConfirmedNe(InequalityCert::CompleteRun {
                outputs: outcome.outputs,
            }))
        }
    } else {
        Ok(CertOutcome::Undecided)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MemberVerdict {
    Confirmed(InequalityCert),
    Provisional,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyMember {
    pub e: u64,
    pub set: BTreeSet<u64>,
    pub verdict: MemberVerdict,
}

/// Stage-s approximation of the diagonal family under the bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WehnerFamilyApprox {
    pub stage: u64,
    pub oracle_tag: String,
    pub members: Vec<FamilyMember>,
    /// Pairs excluded with a completed-run equality certificate.
    pub excluded: Vec<(u64, BTreeSet<u64>)>,
}

pub fn wehner_family(
    x: &OracleHandle,
    oracle_tag: &str,
    stage: u64,
    bounds: &Bounds,
) -> Result<WehnerFamilyApprox> {
    let mut members = Vec::new();
    let mut excluded = Vec::new();
    for e in 0..=bounds.max_e {
        for u in 0..=bounds.max_u {
            let set = canonical_finite_set(u);
            match inequality_certificate(e, &set, x, stage)? {
                CertOutcome::ConfirmedNe(cert) => members.push(FamilyMember {
                    e,
                    set,
                    verdict: MemberVerdict::Confirmed(cert),
                }),
                CertOutcome::ExcludedEq => excluded.push((e, set)),
                CertOutcome::Undecided => members.push(FamilyMember {
                    e,
                    set,
                    verdict: MemberVerdict::Provisional,
                }),
            }
        }
    }
    Ok(WehnerFamilyApprox {
        stage,
        oracle_tag: oracle_tag.to_string(),
        members,
        excluded,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnState {
    pub content: BTreeSet<u64>,
    /// (stage, added element) growth log.
    pub log: Vec<(u64, u64)>,
}

/// Column states of the staged operator, keyed by `(e, u, s0)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VColumns {
    /// Program indices whose columns the operator maintains.
    pub es: Vec<u64>,
    pub max_u: u64,
    pub max_s0: u64,
    pub stage: u64,
    pub oracle_tag: String,
    pub columns: BTreeMap<(u64, u64, u64), ColumnState>,
}

impl VColumns {
    pub fn new(bounds: Bounds, oracle_tag: &str) -> VColumns {
        VColumns::for_programs(
            (0..=bounds.max_e).collect(),
            bounds.max_u,
            bounds.max_s0,
            oracle_tag,
        )
    }

    /// Columns over an explicit program list (curated suites carry large
    /// indices outside any dense range).
    pub fn for_programs(es: Vec<u64>, max_u: u64, max_s0: u64, oracle_tag: &str) -> VColumns {
        let mut cols = VColumns {
            es,
            max_u,
            max_s0,
            stage: 0,
            oracle_tag: oracle_tag.to_string(),
            columns: BTreeMap::new(),
        };
        cols.bear(0);
        cols
    }

    /// The operator's column index for a triple.
    pub fn column_index(e: u64, u: u64, s0: u64) -> u64 {
        triple(e, u, s0)
    }

    fn bear(&mut self, stage: u64) {
        if stage > self.max_s0 {
            return;
        }
        for e in self.es.clone() {
            for u in 0..=self.max_u {
                let set = canonical_finite_set(u);
                self.columns.insert(
                    (e, u, stage),
                    ColumnState {
                        content: member_code(e, &set),
                        log: Vec::new(),
                    },
                );
            }
        }
    }
}

/// Least element of the join of Y with its complement that is not yet
/// among the column's decoded odd part.
fn least_fresh_join_element(
    y: &OracleHandle,
    column: &BTreeSet<u64>,
    stage: u64,
) -> Result<u64> {
    let decoded: BTreeSet<u64> = column
        .iter()
        .filter(|c| *c % 2 == 1)
        .map(|c| (c - 1) / 2)
        .collect();
    for j in 0.. {
        let half = j / 2;
        let in_y = match y.member(half, stage) {
            Answer::Yes => true,
            Answer::No => false,
            Answer::Undefined => return Err(Error::OracleUndefined(half)),
            Answer::Unknown => {
                return Err(Error::Uncertified(format!(
                    "join oracle uncertified at {half}"
                )))
            }
        };
        let in_join = if j % 2 == 0 { in_y } else { !in_y };
        if in_join && !decoded.contains(&j) {
            return Ok(j);
        }
    }
    unreachable!("the join is infinite")
}

/// Advances the operator by one stage, applying the catch-up trigger to
/// every live column and bearing the next batch of columns.
pub fn v_operator_step(
    cols: &mut VColumns,
    y: &OracleHandle,
    x: &OracleHandle,
) -> Result<()> {
    let s = cols.stage + 1;
    let es: BTreeSet<u64> = cols.columns.keys().map(|k| k.0).collect();
    let mut staged_w: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    for e in es {
        staged_w.insert(e, run_staged(e, x, s)?);
    }
    let keys: Vec<(u64, u64, u64)> = cols.columns.keys().copied().collect();
    for key in keys {
        let (e, _, s0) = key;
        if s <= s0 {
            continue;
        }
        let target = member_code(e, &staged_w[&e]);
        let state = cols.columns.get_mut(&key).expect("column exists");
        if state.content == target {
            let fresh = least_fresh_join_element(y, &state.content, s)?;
            let code = 2 * fresh + 1;
            state.content.insert(code);
            state.log.push((s, code));
        }
    }
    cols.stage = s;
    cols.bear(s);
    Ok(())
}

/// Runs the operator for the given number of stages.
pub fn v_operator_run(
    bounds: Bounds,
    y: &OracleHandle,
    x: &OracleHandle,
    oracle_tag: &str,
    stages: u64,
) -> Result<VColumns> {
    let mut cols = VColumns::new(bounds, oracle_tag);
    for _ in 0..stages {
        v_operator_step(&mut cols, y, x)?;
    }
    Ok(cols)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub stage: u64,
    /// Confirmed members with no stabilized column carrying their code.
    pub members_without_column: Vec<(u64, BTreeSet<u64>)>,
    /// Stabilized columns whose decoded pair is excluded from the family.
    pub stabilized_non_members: Vec<(u64, u64, u64)>,
    pub stabilized_columns: usize,
    pub unstable_columns: usize,
    /// Columns still growing, with their growth-log lengths.
    pub growth: Vec<((u64, u64, u64), usize)>,
}

impl AuditReport {
    pub fn discrepancies(&self) -> usize {
        self.members_without_column.len() + self.stabilized_non_members.len()
    }
}

/// Checks both audit directions: every confirmed member appears as a
/// stabilized column, and every stabilized column decodes to a family
/// member (confirmed or provisional, never excluded).
pub fn v_column_audit(
    cols: &VColumns,
    family: &WehnerFamilyApprox,
    x: &OracleHandle,
) -> Result<AuditReport> {
    if cols.oracle_tag != family.oracle_tag {
        return Err(Error::Inconsistent(format!(
            "operator ran against {:?} but the family against {:?}",
            cols.oracle_tag, family.oracle_tag
        )));
    }
    let mut stabilized: Vec<(&(u64, u64, u64), BTreeSet<u64>)> = Vec::new();
    let mut unstable = 0usize;
    let mut growth = Vec::new();
    for (key, state) in &cols.columns {
        let (e, decoded) = decode_member(&state.content)?;
        debug_assert_eq!(e, key.0);
        match inequality_certificate(e, &decoded, x, cols.stage)? {
            CertOutcome::ConfirmedNe(_) => stabilized.push((key, decoded)),
            _ => {
                unstable += 1;
                if !state.log.is_empty() {
                    growth.push((*key, state.log.len()));
                }
            }
        }
    }

    let mut members_without_column = Vec::new();
    for member in &family.members {
        if !matches!(member.verdict, MemberVerdict::Confirmed(_)) {
            continue;
        }
        let found = stabilized
            .iter()
            .any(|(key, decoded)| key.0 == member.e && *decoded == member.set);
        if !found {
            members_without_column.push((member.e, member.set.clone()));
        }
    }

    let mut stabilized_non_members = Vec::new();
    for (key, decoded) in &stabilized {
        if family
            .excluded
            .iter()
            .any(|(e, set)| *e == key.0 && set == decoded)
        {
            stabilized_non_members.push(**key);
        }
    }

    Ok(AuditReport {
        stage: cols.stage,
        members_without_column,
        stabilized_non_members,
        stabilized_columns: stabilized.len(),
        unstable_columns: unstable,
        growth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machines::Suite;

    fn set(xs: &[u64]) -> BTreeSet<u64> {
        xs.iter().copied().collect()
    }

    #[test]
    fn member_codes() {
        assert_eq!(member_code(3, &set(&[0, 2])), set(&[6, 1, 5]));
        let (e, f) = decode_member(&set(&[6, 1, 5])).unwrap();
        assert_eq!((e, f), (3, set(&[0, 2])));
        assert!(decode_member(&set(&[2, 4])).is_err());
    }

    #[test]
    fn family_verdicts_over_empty_oracle() {
        let x = OracleHandle::empty();
        let fam = wehner_family(&x, "empty", 200, &Bounds::default()).unwrap();
        // e = 0 is the enumerate-nothing program: {0} is confirmed, {} excluded.
        let zero_with_zero = fam
            .members
            .iter()
            .find(|m| m.e == 0 && m.set == set(&[0]))
            .unwrap();
        assert!(matches!(zero_with_zero.verdict, MemberVerdict::Confirmed(_)));
        assert!(fam.excluded.contains(&(0, set(&[]))));
    }

    #[test]
    fn family_excludes_singleton_of_out_one() {
        let suite = Suite::builtin();
        let e = suite.index_of("out-one").unwrap();
        let x = OracleHandle::empty();
        let bounds = Bounds {
            max_e: e,
            max_u: 4,
            max_s0 : 2,
        };
        let fam = wehner_family(&x, "empty", 200, &bounds).unwrap();
        // canonical_finite_set(2) = {1}
        assert!(fam.excluded.contains(&(e, set(&[1]))));
        let with_zero = fam.members.iter().find(|m| m.e == e && m.set == set(&[0]));
        assert!(matches!(
            with_zero.unwrap().verdict,
            MemberVerdict::Confirmed(_)
        ));
    }

    #[test]
    fn untriggered_column_stays_at_birth_code() {
        // Column (e, u, s0) with D_u never matching W_e stays put.
        let x = OracleHandle::empty();
        let y = OracleHandle::finite([0], false);
        let bounds = Bounds {
            max_e: 0,
            max_u: 2,
            max_s0: 2,
        };
        let cols = v_operator_run(bounds, &y, &x, "empty", 60).unwrap();
        // e=0 has W = {}; the u=1 column codes D_1 = {0} != {} and never fires.
        let state = &cols.columns[&(0, 1, 0)];
        assert_eq!(state.content, member_code(0, &set(&[0])));
        assert!(state.log.is_empty());
    }

    #[test]
    fn matched_column_grows_once_then_stops() {
        // e=0: W = {}; the u=0 column starts equal to {e} (+) {} and fires,
        // after which it can never match again.
        let x = OracleHandle::empty();
        let y = OracleHandle::finite([0], false);
        let bounds = Bounds {
            max_e: 0,
            max_u: 0,
            max_s0: 0,
        };
        let cols = v_operator_run(bounds, &y, &x, "empty", 60).unwrap();
        let state = &cols.columns[&(0, 0, 0)];
        assert_eq!(state.log.len(), 1);
        // Least join element of Y = {0}: 0 itself; code 1 enters.
        assert_eq!(state.log[0].1, 1);
    }

    #[test]
    fn join_tracking_column_grows_forever_when_y_equals_x() {
        let suite = Suite::builtin();
        let e = suite.index_of("join-oracle").unwrap();
        let x = OracleHandle::finite([2, 5], false);
        let y = x.clone();
        // Columns for the join enumerator: the one whose birth code matches
        // a staged prefix of the join keeps catching up forever.
        let mut cols = VColumns::for_programs(vec![e], 8, 2, "x25");
        for _ in 0..400 {
            v_operator_step(&mut cols, &y, &x).unwrap();
        }
        let best = cols
            .columns
            .values()
            .map(|c| c.log.len())
            .max()
            .unwrap_or(0);
        assert!(best > 20, "expected unbounded growth, best log {best}");
    }

    #[test]
    fn audit_is_clean_when_y_differs_from_x() {
        let x = OracleHandle::finite([2, 5], false);
        let y = OracleHandle::finite([0, 2, 5], false);
        let bounds = Bounds {
            max_e: 4,
            max_u: 4,
            max_s0: 3,
        };
        let cols = v_operator_run(bounds, &y, &x, "x25", 300).unwrap();
        let fam = wehner_family(&x, "x25", 300, &bounds).unwrap();
        let report = v_column_audit(&cols, &fam, &x).unwrap();
        assert_eq!(report.discrepancies(), 0, "report: {report:?}");
        assert!(report.stabilized_columns > 0);
    }

    #[test]
    fn audit_rejects_mismatched_oracles() {
        let x = OracleHandle::empty();
        let bounds = Bounds::default();
        let cols = VColumns::new(bounds, "a");
        let fam = wehner_family(&x, "b", 10, &bounds).unwrap();
        assert!(v_column_audit(&cols, &fam, &x).is_err());
    }
}
