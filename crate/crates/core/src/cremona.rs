//! Quadratic (Cremona) transformations on classes.
//!
//! The elementary transformation based at three points `i, j, k` acts on
//! `(d; m)` as `d' = 2d - mi - mj - mk`, `mi' = d - mj - mk` (and
//! cyclically), fixing every other multiplicity. It preserves `L^2` and
//! `K.L`.
//!
//! The four composite rules act on ruled-surface classes and come from
//! taking proper transforms of `2s` (rules 1, 2) or `2s + 1` (rules 3, 4)
//! fibres through blown-up points:
//!
//! ```text
//! rule1  (a x b: m1..m2s)_0    -> ((a+sb-S) x b: b-m1..b-m2s)_0
//! rule2  (d:e, m1..m2s)_1      -> ((s+1)d-se-S : sd-(s-1)e-S, d-e-m1..d-e-m2s)_1
//! rule3  (a x b: m1..m2s+1)_0  -> (a+(s+1)b-S : a+sb-S, b-m1..b-m2s+1)_1
//! rule4  (d:e, m1..m2s+1)_1    -> (((s+1)d-se-S) x (d-e): d-e-m1..d-e-m2s+1)_0
//! ```
//!
//! with `S` the sum of the acted-on multiplicities. Rules act on a chosen
//! ("designated") subset of the multiplicities; the others pass through in
//! place. Rule 4 takes `2s + 1` entries, which is the only arity for which
//! the intersection form is conserved.

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::notation::AnyClass;
use crate::picard::{PicardClass, RuledClass};

/// The elementary quadratic transformation based at points `i, j, k`.
pub fn elementary_quadratic(l: &PicardClass, i: usize, j: usize, k: usize) -> Result<PicardClass> {
    if i == j || j == k || i == k {
        return Err(Error::InvalidArgument(format!(
            "elementary transformation needs three distinct points, got ({i}, {j}, {k})"
        )));
    }
    if let Some(bad) = [i, j, k].into_iter().find(|&x| x >= l.r()) {
        return Err(Error::OutOfRange(format!(
            "point index {bad} on a class with {} points",
            l.r()
        )));
    }
    let d = l.degree();
    let m = l.mults();
    let (mi, mj, mk) = (&m[i], &m[j], &m[k]);
    let mut out = m.to_vec();
    out[i] = d - mj - mk;
    out[j] = d - mi - mk;
    out[k] = d - mi - mj;
    Ok(PicardClass::new(BigInt::from(2) * d - mi - mj - mk, out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Rule1,
    Rule2,
    Rule3,
    Rule4,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Rule1 => "rule1",
            Rule::Rule2 => "rule2",
            Rule::Rule3 => "rule3",
            Rule::Rule4 => "rule4",
        }
    }

    /// Number of multiplicities the rule acts on.
    pub fn arity(self, s: u32) -> usize {
        match self {
            Rule::Rule1 | Rule::Rule2 => 2 * s as usize,
            Rule::Rule3 | Rule::Rule4 => 2 * s as usize + 1,
        }
    }

    fn min_s(self) -> u32 {
        match self {
            Rule::Rule1 | Rule::Rule2 => 1,
            Rule::Rule3 | Rule::Rule4 => 0,
        }
    }

    pub fn from_number(n: u8) -> Option<Rule> {
        match n {
            1 => Some(Rule::Rule1),
            2 => Some(Rule::Rule2),
            3 => Some(Rule::Rule3),
            4 => Some(Rule::Rule4),
            _ => None,
        }
    }
}

fn designation(
    rule: Rule,
    s: u32,
    n: usize,
    designated: Option<&[usize]>,
) -> Result<Vec<usize>> {
    let need = rule.arity(s);
    let idx: Vec<usize> = match designated {
        None => {
            if n < need {
                return Err(Error::Arity {
                    rule: rule.name(),
                    s,
                    expected: need,
                    got: n,
                });
            }
            (0..need).collect()
        }
        Some(d) => {
            if d.len() != need {
                return Err(Error::Arity {
                    rule: rule.name(),
                    s,
                    expected: need,
                    got: d.len(),
                });
            }
            d.to_vec()
        }
    };
    let mut seen = vec![false; n];
    for &i in &idx {
        if i >= n {
            return Err(Error::OutOfRange(format!(
                "designated index {i} on a class with {n} multiplicities"
            )));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidArgument(format!(
                "designated index {i} repeated"
            )));
        }
    }
    Ok(idx)
}

/// Applies one of the four composite rules. `designated` selects the
/// multiplicities acted on (by index into the class's list); `None` means
/// the leading entries.
pub fn apply_rule(
    rule: Rule,
    c: &RuledClass,
    s: u32,
    designated: Option<&[usize]>,
) -> Result<RuledClass> {
    if s < rule.min_s() {
        return Err(Error::InvalidArgument(format!(
            "{} needs s >= {}",
            rule.name(),
            rule.min_s()
        )));
    }
    let idx = designation(rule, s, c.n_points(), designated)?;
    let s_big = BigInt::from(s);
    let sum: BigInt = idx.iter().map(|&i| &c.mults()[i]).sum();
    let mut mults = c.mults().to_vec();
    match (rule, c) {
        (Rule::Rule1, RuledClass::F0 { a, b, .. }) => {
            for &i in &idx {
                mults[i] = b - &mults[i];
            }
            Ok(RuledClass::f0(a + &s_big * b - &sum, b.clone(), mults))
        }
        (Rule::Rule2, RuledClass::F1 { d, e, .. }) => {
            let de = d - e;
            for &i in &idx {
                mults[i] = &de - &mults[i];
            }
            let new_d = (&s_big + 1) * d - &s_big * e - &sum;
            let new_e = &s_big * d - (&s_big - 1) * e - &sum;
            Ok(RuledClass::f1(new_d, new_e, mults))
        }
        (Rule::Rule3, RuledClass::F0 { a, b, .. }) => {
            for &i in &idx {
                mults[i] = b - &mults[i];
            }
            let new_d = a + (&s_big + 1) * b - &sum;
            let new_e = a + &s_big * b - &sum;
            Ok(RuledClass::f1(new_d, new_e, mults))
        }
        (Rule::Rule4, RuledClass::F1 { d, e, .. }) => {
            let de = d - e;
            for &i in &idx {
                mults[i] = &de - &mults[i];
            }
            let new_a = (&s_big + 1) * d - &s_big * e - &sum;
            Ok(RuledClass::f0(new_a, de, mults))
        }
        _ => Err(Error::InvalidArgument(format!(
            "{} does not act on classes on {:?}",
            rule.name(),
            c.surface()
        ))),
    }
}

/// Rule 1: `F0` blown up at `2s` points, back to `F0`.
pub fn rule1(c: &RuledClass, s: u32, designated: Option<&[usize]>) -> Result<RuledClass> {
    apply_rule(Rule::Rule1, c, s, designated)
}

/// Rule 2: `F1` blown up at `2s` points, back to `F1`.
pub fn rule2(c: &RuledClass, s: u32, designated: Option<&[usize]>) -> Result<RuledClass> {
    apply_rule(Rule::Rule2, c, s, designated)
}

/// Rule 3: `F0` blown up at `2s + 1` points, to `F1`.
pub fn rule3(c: &RuledClass, s: u32, designated: Option<&[usize]>) -> Result<RuledClass> {
    apply_rule(Rule::Rule3, c, s, designated)
}

/// Rule 4: `F1` blown up at `2s + 1` points, to `F0`.
pub fn rule4(c: &RuledClass, s: u32, designated: Option<&[usize]>) -> Result<RuledClass> {
    apply_rule(Rule::Rule4, c, s, designated)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Rule1,
    Rule2,
    Rule3,
    Rule4,
    Elementary,
}

impl From<Rule> for TransformKind {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Rule1 => TransformKind::Rule1,
            Rule::Rule2 => TransformKind::Rule2,
            Rule::Rule3 => TransformKind::Rule3,
            Rule::Rule4 => TransformKind::Rule4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TransformParams {
    Rule { s: u32, designated: Vec<usize> },
    Indices { indices: [usize; 3] },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformStep {
    pub kind: TransformKind,
    pub params: TransformParams,
    pub before: AnyClass,
    pub after: AnyClass,
}

/// Ordered record of applied transformations. Serializes as a JSON array
/// of `{kind, params, before, after}` with classes in canonical text form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransformLog {
    steps: Vec<TransformStep>,
}

fn apply_step(kind: TransformKind, params: &TransformParams, c: &AnyClass) -> Result<AnyClass> {
    match (kind, params, c) {
        (TransformKind::Elementary, TransformParams::Indices { indices: [i, j, k] }, AnyClass::Picard(p)) => {
            elementary_quadratic(p, *i, *j, *k).map(AnyClass::Picard)
        }
        (kind, TransformParams::Rule { s, designated }, AnyClass::Ruled(r)) => {
            let rule = match kind {
                TransformKind::Rule1 => Rule::Rule1,
                TransformKind::Rule2 => Rule::Rule2,
                TransformKind::Rule3 => Rule::Rule3,
                TransformKind::Rule4 => Rule::Rule4,
                TransformKind::Elementary => {
                    return Err(Error::InvalidArgument(
                        "elementary step recorded with rule parameters".into(),
                    ))
                }
            };
            apply_rule(rule, r, *s, Some(designated)).map(AnyClass::Ruled)
        }
        _ => Err(Error::InvalidArgument(
            "step parameters do not match the class kind".into(),
        )),
    }
}

impl TransformLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn steps(&self) -> &[TransformStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, step: TransformStep) {
        self.steps.push(step);
    }

    /// Applies an elementary transformation and records it.
    pub fn elementary(&mut self, l: &PicardClass, i: usize, j: usize, k: usize) -> Result<PicardClass> {
        let after = elementary_quadratic(l, i, j, k)?;
        self.push(TransformStep {
            kind: TransformKind::Elementary,
            params: TransformParams::Indices { indices: [i, j, k] },
            before: l.clone().into(),
            after: after.clone().into(),
        });
        Ok(after)
    }

    /// Applies a composite rule and records it with its resolved designation.
    pub fn rule(
        &mut self,
        rule: Rule,
        c: &RuledClass,
        s: u32,
        designated: Option<&[usize]>,
    ) -> Result<RuledClass> {
        let after = apply_rule(rule, c, s, designated)?;
        let designated = designation(rule, s, c.n_points(), designated)?;
        self.push(TransformStep {
            kind: rule.into(),
            params: TransformParams::Rule { s, designated },
            before: c.clone().into(),
            after: after.clone().into(),
        });
        Ok(after)
    }

    /// Recomputes every step from the first `before`. Returns the final
    /// class, or an error naming the first step that does not reproduce.
    pub fn replay(&self) -> Result<Option<AnyClass>> {
        let Some(first) = self.steps.first() else {
            return Ok(None);
        };
        let mut current = first.before.clone();
        for (n, step) in self.steps.iter().enumerate() {
            if step.before != current {
                return Err(Error::InvalidArgument(format!(
                    "step {n} starts from {} but the previous step produced {current}",
                    step.before
                )));
            }
            let next = apply_step(step.kind, &step.params, &current)?;
            if next != step.after {
                return Err(Error::InvalidArgument(format!(
                    "step {n} recorded {} but replays to {next}",
                    step.after
                )));
            }
            current = next;
        }
        Ok(Some(current))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReduceStatus {
    /// Degree is at least the sum of the three largest multiplicities.
    Standard,
    /// Some step produced a negative degree; the class is not effective.
    DegreeNegative,
    /// Fewer than three points and not standard: no quadratic
    /// transformation applies.
    TooFewPoints,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    /// Final class with multiplicities sorted in non-increasing order.
    pub result: PicardClass,
    /// Steps in the original point labelling; the last `after` is `result`
    /// before sorting.
    pub log: TransformLog,
    pub status: ReduceStatus,
}

/// Indices of the (up to) three largest multiplicities, ties broken by
/// index.
fn top_three(l: &PicardClass) -> Vec<usize> {
    let mut order: Vec<usize> = (0..l.r()).collect();
    order.sort_by(|&a, &b| l.mult(b).cmp(l.mult(a)));
    order.truncate(3);
    order
}

/// Cremona reduction: while `0 <= d < m1 + m2 + m3` (three largest), apply
/// the elementary transformation at those three points. Each step strictly
/// lowers the degree, so at most `d + 1` steps run.
pub fn reduce(l: &PicardClass) -> Reduction {
    let mut log = TransformLog::new();
    let mut current = l.clone();
    let status = loop {
        if current.degree().is_negative() {
            break ReduceStatus::DegreeNegative;
        }
        let top = top_three(&current);
        let top_sum: BigInt = top.iter().map(|&i| current.mult(i)).sum();
        if current.degree() >= &top_sum {
            break ReduceStatus::Standard;
        }
        if top.len() < 3 {
            break ReduceStatus::TooFewPoints;
        }
        current = log
            .elementary(&current, top[0], top[1], top[2])
            .expect("distinct in-range indices");
    };
    Reduction {
        result: current.sorted_desc(),
        log,
        status,
    }
}

/// True when `l` is in standard form (degree at least the sum of its three
/// largest multiplicities, missing entries counting as zero).
pub fn is_standard(l: &PicardClass) -> bool {
    let top: BigInt = top_three(l).iter().map(|&i| l.mult(i)).sum();
    l.degree() >= &top
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(d: i64, m: &[i64]) -> PicardClass {
        PicardClass::from_ints(d, m)
    }

    #[test]
    fn elementary_examples() {
        assert_eq!(elementary_quadratic(&p(3, &[1, 1, 1]), 0, 1, 2).unwrap(), p(3, &[1, 1, 1]));
        assert_eq!(
            elementary_quadratic(&p(5, &[3, 3, 3]), 0, 1, 2).unwrap(),
            p(1, &[-1, -1, -1])
        );
        assert_eq!(elementary_quadratic(&p(2, &[1, 1, 0]), 0, 1, 2).unwrap(), p(2, &[1, 1, 0]));
        assert!(elementary_quadratic(&p(2, &[1, 1, 0]), 0, 0, 2).is_err());
        assert!(elementary_quadratic(&p(2, &[1, 1, 0]), 0, 1, 3).is_err());
    }

    #[test]
    fn rule1_examples() {
        let c = RuledClass::f0_ints(2, 2, &[1, 1]);
        assert_eq!(rule1(&c, 1, None).unwrap(), c);
        let c = RuledClass::f0_ints(7, 3, &[3, 3]);
        assert_eq!(rule1(&c, 1, None).unwrap(), RuledClass::f0_ints(4, 3, &[0, 0]));
        let c = RuledClass::f0_ints(3, 2, &[1, 2, 0, 1]);
        let out = rule1(&c, 2, None).unwrap();
        assert_eq!(out, RuledClass::f0_ints(3, 2, &[1, 0, 2, 1]));
        assert_eq!(out.self_intersection(), 6.into());
        assert!(matches!(rule1(&c, 3, None), Err(Error::Arity { expected: 6, got: 4, .. })));
    }

    #[test]
    fn rule2_examples() {
        let c = RuledClass::f1(15, 8, vec![4.into(); 10]);
        let out = rule2(&c, 2, None).unwrap();
        assert_eq!(
            out,
            RuledClass::f1_ints(13, 6, &[3, 3, 3, 3, 4, 4, 4, 4, 4, 4])
        );
        let c = RuledClass::f1_ints(4, 2, &[1, 1]);
        assert_eq!(rule2(&c, 1, None).unwrap(), c);
        assert_eq!(c.self_intersection(), 10.into());
        assert!(rule2(&RuledClass::f0_ints(1, 1, &[0, 0]), 1, None).is_err());
        assert!(rule2(&c, 0, None).is_err());
    }

    #[test]
    fn rule3_and_rule4_examples() {
        let c = RuledClass::f0_ints(1, 1, &[1]);
        assert_eq!(rule3(&c, 0, None).unwrap(), RuledClass::f1_ints(1, 0, &[0]));
        let c = RuledClass::f0_ints(2, 3, &[1, 1, 1]);
        let out = rule3(&c, 1, None).unwrap();
        assert_eq!(out, RuledClass::f1_ints(5, 2, &[2, 2, 2]));
        assert_eq!(out.self_intersection(), 9.into());
        assert_eq!(c.self_intersection(), 9.into());
        let c = RuledClass::f0_ints(4, 6, &[0]);
        assert_eq!(rule3(&c, 0, None).unwrap(), RuledClass::f1_ints(10, 4, &[6]));

        assert_eq!(
            rule4(&RuledClass::f1_ints(1, 0, &[0]), 0, None).unwrap(),
            RuledClass::f0_ints(1, 1, &[1])
        );
        assert_eq!(
            rule4(&RuledClass::f1_ints(5, 2, &[2, 2, 2]), 1, None).unwrap(),
            RuledClass::f0_ints(2, 3, &[1, 1, 1])
        );
        let out = rule4(&RuledClass::f1_ints(3, 1, &[1]), 0, None).unwrap();
        assert_eq!(out, RuledClass::f0_ints(2, 2, &[1]));
        assert_eq!(out.self_intersection(), 7.into());
        assert!(matches!(
            rule4(&RuledClass::f1_ints(3, 1, &[1, 1]), 1, None),
            Err(Error::Arity { expected: 3, got: 2, .. })
        ));
    }

    #[test]
    fn designation_picks_entries_in_place() {
        let c = RuledClass::f1_ints(15, 8, &[5, 4, 4, 5, 4, 4]);
        let out = rule2(&c, 2, Some(&[1, 2, 4, 5])).unwrap();
        assert_eq!(out, RuledClass::f1_ints(13, 6, &[5, 3, 3, 5, 3, 3]));
        assert!(rule2(&c, 2, Some(&[1, 2, 4, 4])).is_err());
        assert!(rule2(&c, 2, Some(&[1, 2, 4, 9])).is_err());
        assert!(matches!(
            rule2(&c, 2, Some(&[1, 2, 4])),
            Err(Error::Arity { got: 3, .. })
        ));
    }

    #[test]
    fn reduce_examples() {
        let red = reduce(&p(2, &[1; 5]));
        assert_eq!(red.result, p(0, &[0, 0, 0, 0, -1]));
        assert_eq!(red.status, ReduceStatus::Standard);
        assert_eq!(red.log.len(), 2);

        let red = reduce(&p(4, &[2; 5]));
        assert_eq!(red.result, p(0, &[0, 0, 0, 0, -2]));
        assert_eq!(red.status, ReduceStatus::Standard);

        let red = reduce(&p(1, &[0, 0]));
        assert_eq!(red.result, p(1, &[0, 0]));
        assert_eq!(red.status, ReduceStatus::Standard);
        assert!(red.log.is_empty());

        assert_eq!(reduce(&p(1, &[1, 1])).status, ReduceStatus::TooFewPoints);
        assert_eq!(reduce(&p(-1, &[0, 0, 0])).status, ReduceStatus::DegreeNegative);
        // (1; 1,1,1): d' = 2 - 3 = -1
        assert_eq!(reduce(&p(1, &[1, 1, 1])).status, ReduceStatus::DegreeNegative);
    }

    #[test]
    fn reduce_log_replays() {
        let red = reduce(&p(13, &[6, 5, 5, 4, 4, 3, 1, 1]));
        let last = red.log.replay().unwrap().unwrap();
        assert_eq!(last.as_picard().unwrap().sorted_desc(), red.result);
        let degrees: Vec<_> = red
            .log
            .steps()
            .iter()
            .map(|s| s.after.as_picard().unwrap().degree().clone())
            .collect();
        assert!(degrees.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn log_serializes_as_array_of_records() {
        let mut log = TransformLog::new();
        log.elementary(&p(3, &[1, 1, 1]), 0, 1, 2).unwrap();
        log.rule(Rule::Rule2, &RuledClass::f1_ints(4, 2, &[1, 1]), 1, None)
            .unwrap();
        let json = serde_json::to_value(&log).unwrap();
        assert_eq!(
            json,
            serde_json::json!([
                {"kind": "elementary", "params": {"indices": [0, 1, 2]},
                 "before": "(3; 1,1,1)", "after": "(3; 1,1,1)"},
                {"kind": "rule2", "params": {"s": 1, "designated": [0, 1]},
                 "before": "(4:2; 1,1)@F1", "after": "(4:2; 1,1)@F1"}
            ])
        );
        let back: TransformLog = serde_json::from_value(json).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn replay_detects_tampering() {
        let mut log = TransformLog::new();
        log.elementary(&p(5, &[3, 3, 3]), 0, 1, 2).unwrap();
        let mut bad = log.clone();
        bad.steps[0].after = p(1, &[-1, -1, 0]).into();
        assert!(log.replay().is_ok());
        assert!(bad.replay().is_err());
    }

    #[test]
    fn standard_form_predicate() {
        assert!(is_standard(&p(3, &[1, 1, 1])));
        assert!(!is_standard(&p(2, &[1, 1, 1])));
        assert!(is_standard(&p(0, &[0, 0, -1])));
        assert!(!is_standard(&p(1, &[1, 1])));
    }
}
