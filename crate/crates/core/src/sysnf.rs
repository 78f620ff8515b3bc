//! Rewriting whole systems into atomic inequalities
//! `⋀X ∧ c_a ≤ ⋁Y ∨ c_b` with disjoint variable sides and at most one
//! constant.
//!
//! Left-side differences are merged and moved right
//! (`(a1∖b1) ∧ … ∧ (ak∖bk) ≤ s  ⇔  a1 ∧ … ∧ ak ≤ s ∨ b1 ∨ … ∨ bk`). Right-side
//! differences are removed one atom at a time with
//! `t ≤ s ∨ (a∖b)  ⇔  { t ≤ s ∨ a,  t ∧ b ≤ s }`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{Elem, Embedding, PowersetModel};
use crate::render::{render_equation, render_operand};
use crate::rewrite::{normalize_term_cnf, normalize_term_dnf};
use crate::semantics::{Assignment, Constraint, EvalError};
use crate::terms::{eq_as_pair_of_inequalities, Clause, DifferenceAtom, EqSystem, Equation, Operand, Term};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SysError {
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("expected a difference-free inequality")]
    HasDifference,
    #[error("malformed normal inequality: {0}")]
    Shape(&'static str),
}

/// The rendered shape of a [`NormalInequality`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    /// `⋀X ∧ c ≤ ⋁Y`
    MeetConstLeJoin,
    /// `⋀X ∧ c = 0`
    MeetConstZero,
    /// `⋀X ≤ ⋁Y ∨ c`
    MeetLeJoinConst,
    /// `⋀X ≤ ⋁Y`
    MeetLeJoin,
    /// `c ≤ ⋁Y`: shape 1 with no left variables.
    ConstLeJoin,
    /// `c = 0` with `c > 0`: a false ground inequality.
    Contradiction,
}

impl Shape {
    pub fn label(self) -> &'static str {
        match self {
            Shape::MeetConstLeJoin => "1",
            Shape::MeetConstZero => "2",
            Shape::MeetLeJoinConst => "3",
            Shape::MeetLeJoin => "4",
            Shape::ConstLeJoin => "5-ext",
            Shape::Contradiction => "false",
        }
    }
}

/// `⋀left_vars ∧ left_const ≤ ⋁right_vars ∨ right_const`, constants being
/// elements of the interpreting model. An empty right side denotes `0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalInequality {
    left_vars: BTreeSet<u32>,
    left_const: Option<Elem>,
    right_vars: BTreeSet<u32>,
    right_const: Option<Elem>,
}

impl NormalInequality {
    pub fn new(
        left_vars: BTreeSet<u32>,
        left_const: Option<Elem>,
        right_vars: BTreeSet<u32>,
        right_const: Option<Elem>,
    ) -> Result<NormalInequality, SysError> {
        let ni = NormalInequality { left_vars, left_const, right_vars, right_const };
        ni.validate()?;
        Ok(ni)
    }

    pub fn contradiction(c: Elem) -> NormalInequality {
        NormalInequality::new(BTreeSet::new(), Some(c), BTreeSet::new(), None).expect("nonzero constant")
    }

    pub fn validate(&self) -> Result<(), SysError> {
        if !self.left_vars.is_disjoint(&self.right_vars) {
            return Err(SysError::Shape("a variable occurs on both sides"));
        }
        if self.left_const.is_some() && self.right_const.is_some() {
            return Err(SysError::Shape("constants on both sides"));
        }
        if self.left_const.is_some_and(Elem::is_zero) || self.right_const.is_some_and(Elem::is_zero) {
            return Err(SysError::Shape("zero constant"));
        }
        if self.left_vars.is_empty() && self.left_const.is_none() {
            return Err(SysError::Shape("empty left side"));
        }
        if self.left_vars.contains(&0) || self.right_vars.contains(&0) {
            return Err(SysError::Shape("variable index 0"));
        }
        Ok(())
    }

    pub fn left_vars(&self) -> &BTreeSet<u32> {
        &self.left_vars
    }

    pub fn left_const(&self) -> Option<Elem> {
        self.left_const
    }

    pub fn right_vars(&self) -> &BTreeSet<u32> {
        &self.right_vars
    }

    pub fn right_const(&self) -> Option<Elem> {
        self.right_const
    }

    pub fn shape(&self) -> Shape {
        match (self.left_const, self.right_const) {
            (Some(_), _) if self.left_vars.is_empty() && self.right_vars.is_empty() => Shape::Contradiction,
            (Some(_), _) if self.left_vars.is_empty() => Shape::ConstLeJoin,
            (Some(_), _) if self.right_vars.is_empty() => Shape::MeetConstZero,
            (Some(_), _) => Shape::MeetConstLeJoin,
            (None, Some(_)) => Shape::MeetLeJoinConst,
            (None, None) => Shape::MeetLeJoin,
        }
    }

    pub fn is_contradiction(&self) -> bool {
        self.shape() == Shape::Contradiction
    }

    pub fn vars(&self) -> BTreeSet<u32> {
        self.left_vars.union(&self.right_vars).copied().collect()
    }

    /// Sides as elements of a model, with literals carried through `emb`.
    pub fn sides(&self, emb: &Embedding, a: &Assignment) -> Result<(Elem, Elem), EvalError> {
        let lookup = |v: u32| a.get(v).ok_or(EvalError::UnboundVariable(v));
        let mut left: Option<Elem> = self.left_const.map(|c| emb.map(c));
        for &v in &self.left_vars {
            let x = lookup(v)?;
            left = Some(left.map_or(x, |l| l.meet(x)));
        }
        let mut right = self.right_const.map_or(Elem::ZERO, |c| emb.map(c));
        for &v in &self.right_vars {
            right = right.join(lookup(v)?);
        }
        Ok((left.expect("validated left side is nonempty"), right))
    }
}

impl Constraint for NormalInequality {
    fn collect_vars(&self, out: &mut BTreeSet<u32>) {
        out.extend(self.left_vars.iter().chain(&self.right_vars));
    }

    fn literal_support(&self) -> Elem {
        self.left_const.unwrap_or_default().join(self.right_const.unwrap_or_default())
    }

    fn holds(&self, _m: &PowersetModel, emb: &Embedding, a: &Assignment) -> Result<bool, EvalError> {
        let (l, r) = self.sides(emb, a)?;
        Ok(l.le(r))
    }
}

/// `⋀left ≤ ⋁right` with `left` a set of bare operands and `right` a set of
/// difference atoms; an empty `right` denotes `0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PendingInequality {
    pub left: BTreeSet<Operand>,
    pub right: BTreeSet<DifferenceAtom>,
}

impl PendingInequality {
    pub fn new<L, R>(left: L, right: R) -> PendingInequality
    where
        L: IntoIterator<Item = Operand>,
        R: IntoIterator<Item = DifferenceAtom>,
    {
        PendingInequality {
            left: left.into_iter().collect(),
            right: right.into_iter().filter(|a| !a.is_zero()).collect(),
        }
    }

    pub fn to_equation(&self) -> Equation {
        let lhs = Term::meet_all(self.left.iter().map(Operand::to_term)).expect("nonempty left side");
        let rhs = Term::join_all(self.right.iter().map(|a| {
            if a.is_bare() {
                a.base().to_term()
            } else {
                a.to_term()
            }
        }))
        .unwrap_or(Term::Zero);
        Equation::less_eq(lhs, rhs)
    }

    /// Splits into variables and constant names on each side; `None` when a
    /// symbol occurs on both sides, which makes the inequality trivially true.
    fn to_raw(&self) -> Option<RawInequality> {
        debug_assert!(self.right.iter().all(DifferenceAtom::is_bare));
        let mut raw = RawInequality::default();
        for o in &self.left {
            raw.push_left(o);
        }
        for a in &self.right {
            raw.push_right(a.base());
        }
        (raw.left_vars.is_disjoint(&raw.right_vars) && raw.left_consts.is_disjoint(&raw.right_consts)).then_some(raw)
    }
}

impl fmt::Display for PendingInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_equation(&self.to_equation()))
    }
}

/// Atomic inequality with constants still symbolic.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RawInequality {
    pub left_vars: BTreeSet<u32>,
    pub left_consts: BTreeSet<Arc<str>>,
    pub right_vars: BTreeSet<u32>,
    pub right_consts: BTreeSet<Arc<str>>,
}

impl RawInequality {
    fn push_left(&mut self, o: &Operand) {
        match o {
            Operand::Var(i) => {
                self.left_vars.insert(*i);
            }
            Operand::Const(c) => {
                self.left_consts.insert(c.clone());
            }
            Operand::Zero => unreachable!("zero operands are removed before splitting"),
        }
    }

    fn push_right(&mut self, o: &Operand) {
        match o {
            Operand::Var(i) => {
                self.right_vars.insert(*i);
            }
            Operand::Const(c) => {
                self.right_consts.insert(c.clone());
            }
            Operand::Zero => {}
        }
    }

    pub fn constants(&self) -> impl Iterator<Item = &Arc<str>> {
        self.left_consts.iter().chain(&self.right_consts)
    }
}

/// Atomic inequality with both constants folded but not yet merged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomicInequality {
    pub left_vars: BTreeSet<u32>,
    pub left_const: Option<Elem>,
    pub right_vars: BTreeSet<u32>,
    pub right_const: Option<Elem>,
}

/// `(⋀ bases) ≤ rhs ∨ (⋁ minuses)` for a meet-clause of difference atoms;
/// `None` when the clause is `0` (the inequality is then trivially true).
pub fn eliminate_left_diffs(clause: &Clause, rhs: &Term) -> Option<Equation> {
    if clause.is_empty() || clause.contains_zero() {
        return None;
    }
    let lhs = Term::meet_all(clause.atoms().map(|a| a.base().to_term())).unwrap();
    let minuses = clause.atoms().map(DifferenceAtom::minus).filter(|m| !m.is_zero()).map(Operand::to_term);
    let rhs = match rhs {
        Term::Zero => Term::join_all(minuses).unwrap_or(Term::Zero),
        other => Term::join_all(std::iter::once(other.clone()).chain(minuses)).unwrap(),
    };
    Some(Equation::less_eq(lhs, rhs))
}

/// Removes `atom = a ∖ b` from the right side of `p`:
/// `{ t ≤ s ∨ a,  t ∧ b ≤ s }`; the second part is omitted when `b = 0`.
pub fn eliminate_right_diff(p: &PendingInequality, atom: &DifferenceAtom) -> Vec<PendingInequality> {
    assert!(p.right.contains(atom), "atom must occur on the right side");
    let mut rest = p.right.clone();
    rest.remove(atom);
    let mut with_base = rest.clone();
    with_base.insert(DifferenceAtom::bare(atom.base().clone()));
    let mut out = vec![PendingInequality { left: p.left.clone(), right: with_base }];
    if !atom.minus().is_zero() {
        let mut left = p.left.clone();
        left.insert(atom.minus().clone());
        out.push(PendingInequality { left, right: rest });
    }
    out
}

/// Symbolic atomic inequalities for `t ≤ s`.
fn raw_of_inequality(t: &Term, s: &Term, trace: &mut Option<&mut Vec<String>>) -> Vec<RawInequality> {
    let mut out = Vec::new();
    let dnf = normalize_term_dnf(t);
    for clause in dnf.clauses() {
        let Some(moved) = eliminate_left_diffs(clause, s) else {
            continue;
        };
        let left: BTreeSet<Operand> = clause.atoms().map(|a| a.base().clone()).collect();
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(format!("[P3.1+P4.1] {}", render_equation(&moved)));
        }
        let cnf = normalize_term_cnf(&moved.rhs);
        for join_clause in cnf.clauses() {
            let mut work = vec![PendingInequality::new(left.iter().cloned(), join_clause.atoms().cloned())];
            while let Some(p) = work.pop() {
                match p.right.iter().find(|a| !a.is_bare()).cloned() {
                    Some(atom) => {
                        let parts = eliminate_right_diff(&p, &atom);
                        if let Some(tr) = trace.as_deref_mut() {
                            let rendered: Vec<String> = parts.iter().map(ToString::to_string).collect();
                            tr.push(format!("[P4.2] {p}  =>  {}", rendered.join(" ; ")));
                        }
                        work.extend(parts);
                    }
                    None => out.extend(p.to_raw()),
                }
            }
        }
    }
    out
}

/// Symbolic atomic inequalities of a whole system, before constant folding.
pub fn raw_system(s: &EqSystem) -> Vec<RawInequality> {
    raw_system_traced(s, &mut None)
}

fn raw_system_traced(s: &EqSystem, trace: &mut Option<&mut Vec<String>>) -> Vec<RawInequality> {
    let mut out = Vec::new();
    for e in &s.equations {
        for ineq in eq_as_pair_of_inequalities(e) {
            out.extend(raw_of_inequality(&ineq.lhs, &ineq.rhs, trace));
        }
    }
    out
}

fn value(m: &PowersetModel, name: &str) -> Result<Elem, SysError> {
    m.constant(name).ok_or_else(|| SysError::UnknownConstant(name.to_string()))
}

/// Folds constants: meet on the left, join on the right.
pub fn fold_constants(raw: &RawInequality, m: &PowersetModel) -> Result<AtomicInequality, SysError> {
    let mut left_const = None;
    for c in &raw.left_consts {
        let v = value(m, c)?;
        left_const = Some(left_const.map_or(v, |l: Elem| l.meet(v)));
    }
    let mut right_const = None;
    for c in &raw.right_consts {
        let v = value(m, c)?;
        right_const = Some(right_const.map_or(v, |r: Elem| r.join(v)));
    }
    Ok(AtomicInequality {
        left_vars: raw.left_vars.clone(),
        left_const,
        right_vars: raw.right_vars.clone(),
        right_const,
    })
}

/// `⋀X ∧ c_a ≤ ⋁Y ∨ c_b  ⇔  ⋀X ∧ (c_a ∖ c_b) ≤ ⋁Y`.
pub fn merge_two_constants(ai: &AtomicInequality) -> NormalInequality {
    let (Some(ca), Some(cb)) = (ai.left_const, ai.right_const) else {
        panic!("merge_two_constants needs constants on both sides");
    };
    assert!(!ca.le(cb), "c_a ≤ c_b makes the inequality trivially true");
    NormalInequality::new(ai.left_vars.clone(), Some(ca.diff(cb)), ai.right_vars.clone(), None)
        .expect("merged inequality is well formed")
}

/// Drops trivially true inequalities and merges the two constants.
pub fn finish(ai: &AtomicInequality) -> Option<NormalInequality> {
    if !ai.left_vars.is_disjoint(&ai.right_vars) {
        return None;
    }
    if ai.left_const.is_some_and(Elem::is_zero) {
        return None;
    }
    let right_const = ai.right_const.filter(|c| !c.is_zero());
    match (ai.left_const, right_const) {
        (Some(ca), Some(cb)) if ca.le(cb) => None,
        (Some(_), Some(_)) => Some(merge_two_constants(ai)),
        (left_const, right_const) => Some(
            NormalInequality::new(ai.left_vars.clone(), left_const, ai.right_vars.clone(), right_const)
                .expect("atomic inequality is well formed"),
        ),
    }
}

/// Splits a difference-free inequality `lhs ≤ rhs` (DNF on the left, CNF on
/// the right) into normal inequalities, folding constants in `m`.
pub fn dist_normalize(lhs: &Term, rhs: &Term, m: &PowersetModel) -> Result<Vec<NormalInequality>, SysError> {
    if lhs.diff_count() + rhs.diff_count() > 0 {
        return Err(SysError::HasDifference);
    }
    let mut out = BTreeSet::new();
    let cnf = normalize_term_cnf(rhs);
    for clause in normalize_term_dnf(lhs).clauses().filter(|c| !c.contains_zero()) {
        for join_clause in cnf.clauses() {
            let p = PendingInequality::new(clause.atoms().map(|a| a.base().clone()), join_clause.atoms().cloned());
            if let Some(raw) = p.to_raw() {
                out.extend(finish(&fold_constants(&raw, m)?));
            }
        }
    }
    Ok(out.into_iter().collect())
}

fn check_constants(s: &EqSystem, m: &PowersetModel) -> Result<(), SysError> {
    match s.constants().into_iter().find(|c| m.constant(c).is_none()) {
        Some(c) => Err(SysError::UnknownConstant(c.to_string())),
        None => Ok(()),
    }
}

/// Rewrites `s` into an equivalent list of normal inequalities over `m`'s
/// constants, sorted and without duplicates. A false ground inequality
/// collapses the result to a single [`Shape::Contradiction`].
pub fn normalize_system(s: &EqSystem, m: &PowersetModel) -> Result<Vec<NormalInequality>, SysError> {
    normalize_system_impl(s, m, &mut None)
}

/// As [`normalize_system`], also returning one line per rewrite stage.
pub fn normalize_system_traced(s: &EqSystem, m: &PowersetModel) -> Result<(Vec<NormalInequality>, Vec<String>), SysError> {
    let mut lines = Vec::new();
    let out = normalize_system_impl(s, m, &mut Some(&mut lines))?;
    Ok((out, lines))
}

fn normalize_system_impl(
    s: &EqSystem,
    m: &PowersetModel,
    trace: &mut Option<&mut Vec<String>>,
) -> Result<Vec<NormalInequality>, SysError> {
    check_constants(s, m)?;
    let mut out = BTreeSet::new();
    for raw in raw_system_traced(s, trace) {
        let atomic = fold_constants(&raw, m)?;
        if let (Some(tr), Some(ca), Some(cb)) = (trace.as_deref_mut(), atomic.left_const, atomic.right_const) {
            if !ca.le(cb) {
                tr.push(format!(
                    "[merge-constants] {} \\ {} = {}",
                    m.format_elem(ca),
                    m.format_elem(cb),
                    m.format_elem(ca.diff(cb))
                ));
            }
        }
        out.extend(finish(&atomic));
    }
    if let Some(c) = out.iter().find(|ni| ni.is_contradiction()) {
        return Ok(vec![c.clone()]);
    }
    Ok(out.into_iter().collect())
}

/// Renders the operands of a raw inequality, for diagnostics.
pub fn render_raw(raw: &RawInequality) -> String {
    let side = |vars: &BTreeSet<u32>, consts: &BTreeSet<Arc<str>>| {
        let parts: Vec<String> = vars
            .iter()
            .map(|&v| render_operand(&Operand::Var(v)))
            .chain(consts.iter().map(|c| c.to_string()))
            .collect();
        parts
    };
    let l = side(&raw.left_vars, &raw.left_consts);
    let r = side(&raw.right_vars, &raw.right_consts);
    if r.is_empty() {
        format!("{} = 0", l.join("*"))
    } else {
        format!("{} <= {}", l.join("*"), r.join("+"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_equation, parse_system, parse_term};
    use crate::render::render_normal;
    use crate::semantics::{equivalent, ModelProbe};

    fn model(atoms: &[&str], consts: &[(&str, &[&str])]) -> PowersetModel {
        let mut m = PowersetModel::new(atoms.iter().map(|s| s.to_string()).collect()).unwrap();
        for (name, labels) in consts {
            m.add_constant_labels(name, labels).unwrap();
        }
        m
    }

    fn var(i: u32) -> Operand {
        Operand::Var(i)
    }

    fn cst(s: &str) -> Operand {
        Operand::Const(Arc::from(s))
    }

    fn rendered(list: &[NormalInequality], m: &PowersetModel) -> Vec<String> {
        list.iter().map(|n| render_normal(n, m)).collect()
    }

    #[test]
    fn left_elimination_examples() {
        let clause = Clause::new([
            DifferenceAtom::new(var(1), cst("c1")),
            DifferenceAtom::new(var(2), cst("c2")),
        ]);
        let e = eliminate_left_diffs(&clause, &Term::var(3)).unwrap();
        assert_eq!(e, parse_equation("x1 * x2 <= x3 + c1 + c2").unwrap());

        let bare = Clause::new([DifferenceAtom::bare(var(1))]);
        assert_eq!(eliminate_left_diffs(&bare, &Term::var(2)).unwrap(), parse_equation("x1 <= x2").unwrap());

        let d = Clause::new([DifferenceAtom::new(var(1), var(2))]);
        assert_eq!(eliminate_left_diffs(&d, &Term::Zero).unwrap(), parse_equation("x1 <= x2").unwrap());
        let m = PowersetModel::numbered(0);
        let before = vec![parse_equation("x1 \\ x2 <= 0").unwrap()];
        let after = vec![parse_equation("x1 <= x2").unwrap()];
        assert!(equivalent(&before, &after, &m, &ModelProbe::up_to(3)).unwrap().is_equivalent());
    }

    #[test]
    fn right_elimination_examples() {
        let c1c2 = DifferenceAtom::new(cst("c1"), cst("c2"));
        let p = PendingInequality::new([var(1)], [c1c2.clone()]);
        let parts: Vec<String> = eliminate_right_diff(&p, &c1c2).iter().map(ToString::to_string).collect();
        assert_eq!(parts, vec!["x1 <= c1", "x1 * c2 <= 0"]);

        let p = PendingInequality::new([var(1)], [DifferenceAtom::bare(var(2)), c1c2.clone()]);
        let parts = eliminate_right_diff(&p, &c1c2);
        let texts: Vec<String> = parts.iter().map(ToString::to_string).collect();
        assert_eq!(texts, vec!["x1 <= x2 + c1", "x1 * c2 <= x2"]);
        let m = model(&["1", "2"], &[("c1", &["1"]), ("c2", &["1", "2"])]);
        let before = vec![p.to_equation()];
        let after: Vec<Equation> = parts.iter().map(PendingInequality::to_equation).collect();
        assert!(equivalent(&before, &after, &m, &ModelProbe::default()).unwrap().is_equivalent());

        let c1 = DifferenceAtom::bare(cst("c1"));
        let p = PendingInequality::new([var(1)], [DifferenceAtom::bare(var(2)), c1.clone()]);
        let parts = eliminate_right_diff(&p, &c1);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].to_string(), "x1 <= x2 + c1");
    }

    #[test]
    fn dist_normalize_examples() {
        let m = model(&["1", "2"], &[("c1", &["1"]), ("c2", &["1", "2"])]);
        let out = dist_normalize(&parse_term("x1*x2*x1").unwrap(), &Term::var(3), &m).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].left_vars(), &[1, 2].into());
        assert_eq!(out[0].right_vars(), &[3].into());
        assert!(dist_normalize(&Term::var(1), &parse_term("x1 + x2").unwrap(), &m).unwrap().is_empty());
        assert!(dist_normalize(&parse_term("x1 * c1").unwrap(), &parse_term("c2").unwrap(), &m)
            .unwrap()
            .is_empty());
        assert_eq!(
            dist_normalize(&parse_term("x1 \\ c1").unwrap(), &Term::Zero, &m),
            Err(SysError::HasDifference)
        );
        assert_eq!(
            dist_normalize(&parse_term("x1 * k").unwrap(), &Term::Zero, &m),
            Err(SysError::UnknownConstant("k".into()))
        );
    }

    #[test]
    fn merge_examples() {
        let m = model(&["1", "2", "3"], &[]);
        let x: BTreeSet<u32> = [1].into();
        let y: BTreeSet<u32> = [2].into();
        let ai = AtomicInequality {
            left_vars: x.clone(),
            left_const: Some(Elem(0b011)),
            right_vars: y.clone(),
            right_const: Some(Elem(0b010)),
        };
        assert_eq!(render_normal(&merge_two_constants(&ai), &m), "x1*{1} <= x2");
        let ai = AtomicInequality { left_const: Some(Elem(0b001)), ..ai };
        assert_eq!(render_normal(&merge_two_constants(&ai), &m), "x1*{1} <= x2");
        let ai = AtomicInequality {
            left_vars: x,
            left_const: Some(Elem(0b111)),
            right_vars: BTreeSet::new(),
            right_const: Some(Elem(0b010)),
        };
        assert_eq!(render_normal(&merge_two_constants(&ai), &m), "x1*{1,3} = 0");
    }

    #[test]
    fn system_examples() {
        let m = model(&["1"], &[("c", &["1"])]);
        let s = parse_system("(x1 + x2) \\ c = 0").unwrap();
        let out = normalize_system(&s, &m).unwrap();
        assert_eq!(rendered(&out, &m), vec!["x1 <= {1}", "x2 <= {1}"]);
        assert!(out.iter().all(|n| n.shape() == Shape::MeetLeJoinConst));

        let s = parse_system("x1 = x2").unwrap();
        let out = normalize_system(&s, &m).unwrap();
        assert_eq!(rendered(&out, &m), vec!["x1 <= x2", "x2 <= x1"]);
        assert!(out.iter().all(|n| n.shape() == Shape::MeetLeJoin));

        let s = parse_system("x1 * c = 0").unwrap();
        let out = normalize_system(&s, &m).unwrap();
        assert_eq!(rendered(&out, &m), vec!["x1*{1} = 0"]);
        assert_eq!(out[0].shape(), Shape::MeetConstZero);
    }

    #[test]
    fn ground_inequalities() {
        let m = model(&["1", "2"], &[("c1", &["1"]), ("c2", &["1", "2"])]);
        let out = normalize_system(&parse_system("c2 <= c1").unwrap(), &m).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].is_contradiction());
        assert_eq!(rendered(&out, &m), vec!["{2} = 0"]);
        let out = normalize_system(&parse_system("c1 <= c2\nx1 <= x1").unwrap(), &m).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn constant_left_side_is_flagged() {
        let m = model(&["1"], &[("c", &["1"])]);
        let out = normalize_system(&parse_system("c <= x1").unwrap(), &m).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].shape(), Shape::ConstLeJoin);
        assert_eq!(out[0].shape().label(), "5-ext");
    }

    #[test]
    fn unknown_constants_are_reported() {
        let m = model(&["1"], &[]);
        assert_eq!(
            normalize_system(&parse_system("x1 <= k").unwrap(), &m),
            Err(SysError::UnknownConstant("k".into()))
        );
    }

    #[test]
    fn validator_rejects_malformed_inequalities() {
        let one: BTreeSet<u32> = [1].into();
        assert!(NormalInequality::new(one.clone(), None, one.clone(), None).is_err());
        assert!(NormalInequality::new(one.clone(), Some(Elem(1)), BTreeSet::new(), Some(Elem(2))).is_err());
        assert!(NormalInequality::new(one.clone(), Some(Elem(0)), BTreeSet::new(), None).is_err());
        assert!(NormalInequality::new(BTreeSet::new(), None, one, None).is_err());
    }

    #[test]
    fn pipeline_preserves_solutions() {
        let m = model(&["1", "2"], &[("c1", &["1"]), ("c2", &["2"]), ("c3", &["1", "2"])]);
        for text in [
            "x1 \\ (x2 \\ c1) = x3 * c2",
            "(x1 \\ c3) + x2 <= c1 \\ x2",
            "x1 + c2 = x2 \\ (c1 + x1)",
            "(x1 \\ x2) \\ (x3 * c3) <= x2 + c1 \\ c2",
        ] {
            let s = parse_system(text).unwrap();
            let out = normalize_system(&s, &m).unwrap();
            let verdict = equivalent(&s.equations, &out, &m, &ModelProbe::default()).unwrap();
            assert!(verdict.is_equivalent(), "{text}: {verdict:?}");
        }
    }

    #[test]
    fn trace_lists_pipeline_stages() {
        let m = model(&["1", "2"], &[("c1", &["1", "2"]), ("c2", &["2"])]);
        let (_, lines) = normalize_system_traced(&parse_system("x1 \\ c2 <= c1 \\ x2").unwrap(), &m).unwrap();
        assert!(lines.iter().any(|l| l.starts_with("[P3.1+P4.1]")));
        assert!(lines.iter().any(|l| l.starts_with("[P4.2]")));
    }
}
