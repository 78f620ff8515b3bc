//! The rule catalogue and the term/equation normalizers.
//!
//! Normalization pushes every `∖` down to atomic operands (innermost first,
//! left-operand rules before right-operand rules), then expands with
//! distributivity into a DNF or CNF of [`DifferenceAtom`]s.

use std::collections::BTreeSet;

use crate::model::PowersetModel;
use crate::parser::parse_system;
use crate::semantics::{equivalent, Assignment, ModelProbe, Verdict};
use crate::terms::{
    insert_minimal, Clause, CnfTerm, DifferenceAtom, DnfTerm, EqSystem, Equation, Relation, Term,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Soundness {
    Verified,
    /// Sound only after correcting the original statement; see [`RuleEntry::uncorrected`].
    Corrected,
    /// Fails in some model; kept as documentation, never applied.
    Refuted,
}

impl Soundness {
    pub fn as_str(self) -> &'static str {
        match self {
            Soundness::Verified => "verified",
            Soundness::Corrected => "corrected",
            Soundness::Refuted => "refuted",
        }
    }
}

/// One catalogue law. `lhs` and `rhs` are systems in the input grammar
/// (statements separated by `;`); the law states that, under every
/// assignment, `lhs` holds iff `rhs` holds. An identity has an empty `rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub lhs: &'static str,
    pub rhs: &'static str,
    pub status: Soundness,
    pub uncorrected: Option<&'static str>,
}

impl RuleEntry {
    pub fn lhs_system(&self) -> EqSystem {
        parse_law(self.lhs)
    }

    pub fn rhs_system(&self) -> EqSystem {
        parse_law(self.rhs)
    }

    /// The law as originally stated, for corrected entries.
    pub fn uncorrected_system(&self) -> Option<EqSystem> {
        self.uncorrected.map(parse_law)
    }
}

fn parse_law(text: &str) -> EqSystem {
    parse_system(&text.replace(';', "\n")).expect("catalogue laws parse")
}

const fn law(
    name: &'static str,
    description: &'static str,
    lhs: &'static str,
    rhs: &'static str,
    status: Soundness,
) -> RuleEntry {
    RuleEntry { name, description, lhs, rhs, status, uncorrected: None }
}

/// Variables: x = x1, y = x2, a = x3, b = x4 (and a1 b1 a2 b2 as x1..x4 for
/// the merge laws).
pub fn rule_catalogue() -> Vec<RuleEntry> {
    use Soundness::*;
    vec![
        law("P1.1", "difference is below its base", "x1 \\ x2 <= x1", "", Verified),
        law("P1.2", "base absorbs the difference", "(x1 \\ x2) + x1 = x1", "", Verified),
        law("P1.3", "difference and meet recompose the base", "(x1 \\ x2) + x1 * x2 = x1", "", Verified),
        law("P1.4", "difference joined with the subtrahend", "(x1 \\ x2) + x2 = x1 + x2", "", Verified),
        law("P1.5", "difference meets its base", "(x1 \\ x2) * x1 = x1 \\ x2", "", Verified),
        law("P1.6", "difference is disjoint from the subtrahend", "(x1 \\ x2) * x2 = 0", "", Verified),
        law("P2.L1", "join in the left operand", "(x1 + x2) \\ x3 = x1 \\ x3 + x2 \\ x3", "", Verified),
        law("P2.L2", "meet in the left operand", "(x1 * x2) \\ x3 = x1 \\ x3 * x2 \\ x3", "", Verified),
        RuleEntry {
            uncorrected: Some("(x1 \\ x2) \\ x3 = x1 \\ x2 + x1 \\ x3"),
            ..law("P2.L3", "difference in the left operand", "(x1 \\ x2) \\ x3 = x1 \\ x2 * x1 \\ x3", "", Corrected)
        },
        law("P2.R1", "join in the right operand", "x1 \\ (x3 + x4) = x1 \\ x3 * x1 \\ x4", "", Verified),
        law("P2.R2", "meet in the right operand", "x1 \\ (x3 * x4) = x1 \\ x3 + x1 \\ x4", "", Verified),
        law("P2.R3", "difference in the right operand", "x1 \\ (x3 \\ x4) = x1 \\ x3 + x1 * x3 * x4", "", Verified),
        law("P3.1", "meet of differences merges", "x1 \\ x2 * x3 \\ x4 = (x1 * x3) \\ (x2 + x4)", "", Verified),
        law("P3.2", "join of differences merges", "x1 \\ x2 + x3 \\ x4 = (x1 + x3) \\ (x2 * x4)", "", Refuted),
        law("P4.1", "difference on the left of an inequality", "x1 \\ x2 <= x3", "x1 <= x2 + x3", Verified),
        law("P4.2", "difference on the right of an inequality", "x1 <= x2 \\ x3", "x1 <= x2; x1 * x3 <= 0", Verified),
        law("Z.1", "zero minus anything", "0 \\ x1 = 0", "", Verified),
        law("Z.2", "self difference", "x1 \\ x1 = 0", "", Verified),
    ]
}

pub fn rule(name: &str) -> Option<RuleEntry> {
    rule_catalogue().into_iter().find(|r| r.name == name)
}

/// The `n`-ary meet-merge identity
/// `(a1∖b1) ∧ … ∧ (an∖bn) = (a1 ∧ … ∧ an) ∖ (b1 ∨ … ∨ bn)` with `ai = x(2i-1)`,
/// `bi = x(2i)`.
pub fn meet_merge_law(n: u32) -> Equation {
    assert!(n >= 1);
    let a = |i: u32| Term::var(2 * i - 1);
    let b = |i: u32| Term::var(2 * i);
    let lhs = Term::meet_all((1..=n).map(|i| Term::diff(a(i), b(i)))).unwrap();
    let rhs = Term::diff(
        Term::meet_all((1..=n).map(a)).unwrap(),
        Term::join_all((1..=n).map(b)).unwrap(),
    );
    Equation::equal(lhs, rhs)
}

/// Exhaustively checks that `lhs` and `rhs` hold at exactly the same
/// assignments over the powerset of `atoms` atoms; returns a witness if not.
pub fn check_law(lhs: &EqSystem, rhs: &EqSystem, atoms: usize) -> Option<Assignment> {
    let base = PowersetModel::numbered(0);
    let probe = ModelProbe { fresh: vec![atoms], ..ModelProbe::default() };
    match equivalent(&lhs.equations, &rhs.equations, &base, &probe).expect("law variables fit the budget") {
        Verdict::Equivalent => None,
        Verdict::Counterexample { assignment, .. } => Some(assignment),
    }
}

/// Soundness of an entry decided by exhaustive search over `powerset(atoms)`.
pub fn classify(entry: &RuleEntry, atoms: usize) -> Soundness {
    let holds = check_law(&entry.lhs_system(), &entry.rhs_system(), atoms).is_none();
    match (holds, entry.uncorrected_system()) {
        (false, _) => Soundness::Refuted,
        (true, Some(original)) if check_law(&original, &entry.rhs_system(), atoms).is_some() => Soundness::Corrected,
        (true, _) => Soundness::Verified,
    }
}

/// One rule application: `before` rewrites to `after` in a single step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: &'static str,
    pub before: Term,
    pub after: Term,
}

struct Eliminator<'a> {
    trace: Option<&'a mut Vec<RewriteStep>>,
}

impl Eliminator<'_> {
    fn note(&mut self, rule: &'static str, before: impl FnOnce() -> Term, after: impl FnOnce() -> Term) {
        if let Some(steps) = self.trace.as_deref_mut() {
            steps.push(RewriteStep { rule, before: before(), after: after() });
        }
    }

    fn eliminate(&mut self, t: &Term) -> Term {
        match t {
            Term::Join(l, r) => Term::join(self.eliminate(l), self.eliminate(r)),
            Term::Meet(l, r) => Term::meet(self.eliminate(l), self.eliminate(r)),
            Term::Diff(l, r) => {
                let l = self.eliminate(l);
                let r = self.eliminate(r);
                self.diff_of(l, r)
            }
            _ => t.clone(),
        }
    }

    /// `l ∖ r` for operands whose differences are already atomic.
    fn diff_of(&mut self, l: Term, r: Term) -> Term {
        match l {
            Term::Zero => {
                self.note("Z.1", || Term::diff(Term::Zero, r.clone()), || Term::Zero);
                Term::Zero
            }
            Term::Join(x, y) => {
                self.note(
                    "P2.L1",
                    || Term::diff(Term::Join(x.clone(), y.clone()), r.clone()),
                    || Term::join(Term::diff((*x).clone(), r.clone()), Term::diff((*y).clone(), r.clone())),
                );
                let left = self.diff_of(*x, r.clone());
                Term::join(left, self.diff_of(*y, r))
            }
            Term::Meet(x, y) => {
                self.note(
                    "P2.L2",
                    || Term::diff(Term::Meet(x.clone(), y.clone()), r.clone()),
                    || Term::meet(Term::diff((*x).clone(), r.clone()), Term::diff((*y).clone(), r.clone())),
                );
                let left = self.diff_of(*x, r.clone());
                Term::meet(left, self.diff_of(*y, r))
            }
            Term::Diff(x, y) => {
                let inner = Term::Diff(x.clone(), y);
                self.note(
                    "P2.L3",
                    || Term::diff(inner.clone(), r.clone()),
                    || Term::meet(inner.clone(), Term::diff((*x).clone(), r.clone())),
                );
                let right = self.diff_of(*x, r);
                Term::meet(inner, right)
            }
            atomic => self.atomic_diff(atomic, r),
        }
    }

    fn atomic_diff(&mut self, l: Term, r: Term) -> Term {
        match r {
            Term::Join(a, b) => {
                self.note(
                    "P2.R1",
                    || Term::diff(l.clone(), Term::Join(a.clone(), b.clone())),
                    || Term::meet(Term::diff(l.clone(), (*a).clone()), Term::diff(l.clone(), (*b).clone())),
                );
                let left = self.atomic_diff(l.clone(), *a);
                Term::meet(left, self.atomic_diff(l, *b))
            }
            Term::Meet(a, b) => {
                self.note(
                    "P2.R2",
                    || Term::diff(l.clone(), Term::Meet(a.clone(), b.clone())),
                    || Term::join(Term::diff(l.clone(), (*a).clone()), Term::diff(l.clone(), (*b).clone())),
                );
                let left = self.atomic_diff(l.clone(), *a);
                Term::join(left, self.atomic_diff(l, *b))
            }
            Term::Diff(a, b) => {
                let keep = Term::meet(l.clone(), Term::meet((*a).clone(), (*b).clone()));
                self.note(
                    "P2.R3",
                    || Term::diff(l.clone(), Term::Diff(a.clone(), b.clone())),
                    || Term::join(Term::diff(l.clone(), (*a).clone()), keep.clone()),
                );
                Term::join(self.atomic_diff(l, *a), keep)
            }
            r if r == l => {
                self.note("Z.2", || Term::diff(l.clone(), r.clone()), || Term::Zero);
                Term::Zero
            }
            r => Term::diff(l, r),
        }
    }
}

/// Rewrites `t` so that every `∖` has atomic operands.
pub fn eliminate_differences(t: &Term) -> Term {
    Eliminator { trace: None }.eliminate(t)
}

pub fn eliminate_differences_traced(t: &Term) -> (Term, Vec<RewriteStep>) {
    let mut steps = Vec::new();
    let out = Eliminator { trace: Some(&mut steps) }.eliminate(t);
    (out, steps)
}

fn atom_of(t: &Term) -> Option<DifferenceAtom> {
    match t {
        Term::Var(_) | Term::Const(_) => Some(DifferenceAtom::bare(t.as_operand().unwrap())),
        Term::Diff(a, b) => {
            let base = a.as_operand().expect("difference-free left operand");
            let minus = b.as_operand().expect("difference-free right operand");
            Some(DifferenceAtom::new(base, minus))
        }
        _ => None,
    }
}

type ClauseSet = Vec<BTreeSet<DifferenceAtom>>;

fn product(left: &ClauseSet, right: &ClauseSet) -> ClauseSet {
    let mut out = Vec::new();
    for a in left {
        for b in right {
            insert_minimal(&mut out, a.union(b).cloned().collect());
        }
    }
    out
}

fn union(mut left: ClauseSet, right: ClauseSet) -> ClauseSet {
    for c in right {
        insert_minimal(&mut left, c);
    }
    left
}

/// Meet-clauses of a difference-eliminated term.
fn dnf_sets(t: &Term) -> ClauseSet {
    match t {
        Term::Zero => Vec::new(),
        Term::Join(l, r) => union(dnf_sets(l), dnf_sets(r)),
        Term::Meet(l, r) => product(&dnf_sets(l), &dnf_sets(r)),
        _ => match atom_of(t) {
            Some(a) if !a.is_zero() => vec![[a].into()],
            _ => Vec::new(),
        },
    }
}

/// Join-clauses of a difference-eliminated term; an empty clause is `0`.
fn cnf_sets(t: &Term) -> ClauseSet {
    match t {
        Term::Zero => vec![BTreeSet::new()],
        Term::Meet(l, r) => union(cnf_sets(l), cnf_sets(r)),
        Term::Join(l, r) => product(&cnf_sets(l), &cnf_sets(r)),
        _ => match atom_of(t) {
            Some(a) if !a.is_zero() => vec![[a].into()],
            _ => vec![BTreeSet::new()],
        },
    }
}

fn to_dnf(eliminated: &Term) -> DnfTerm {
    DnfTerm::from_clauses(dnf_sets(eliminated).into_iter().map(Clause::new))
}

fn to_cnf(eliminated: &Term) -> CnfTerm {
    CnfTerm::from_clauses(cnf_sets(eliminated).into_iter().map(Clause::new))
}

/// Join of meets of difference atoms, value-equal to `t` in every model.
pub fn normalize_term_dnf(t: &Term) -> DnfTerm {
    to_dnf(&eliminate_differences(t))
}

pub fn normalize_term_dnf_traced(t: &Term) -> (DnfTerm, Vec<RewriteStep>) {
    let (e, steps) = eliminate_differences_traced(t);
    (to_dnf(&e), steps)
}

/// Meet of joins of difference atoms, value-equal to `t` in every model.
pub fn normalize_term_cnf(t: &Term) -> CnfTerm {
    to_cnf(&eliminate_differences(t))
}

pub fn normalize_term_cnf_traced(t: &Term) -> (CnfTerm, Vec<RewriteStep>) {
    let (e, steps) = eliminate_differences_traced(t);
    (to_cnf(&e), steps)
}

/// An equation with both sides in DNF.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedEquation {
    pub lhs: DnfTerm,
    pub rhs: DnfTerm,
    pub relation: Relation,
}

impl NormalizedEquation {
    pub fn to_equation(&self) -> Equation {
        Equation { lhs: self.lhs.to_term(), rhs: self.rhs.to_term(), relation: self.relation }
    }
}

pub fn normalize_equation(e: &Equation) -> NormalizedEquation {
    NormalizedEquation {
        lhs: normalize_term_dnf(&e.lhs),
        rhs: normalize_term_dnf(&e.rhs),
        relation: e.relation,
    }
}

/// Structural check of a DNF: canonical zero form, or nonzero atoms in
/// subsumption-free clauses.
pub fn check_dnf_shape(d: &DnfTerm) -> Result<(), String> {
    check_clauses(d.clauses().collect(), d.is_zero())
}

pub fn check_cnf_shape(c: &CnfTerm) -> Result<(), String> {
    check_clauses(c.clauses().collect(), c.is_zero())
}

fn check_clauses(clauses: Vec<&Clause>, is_zero: bool) -> Result<(), String> {
    if clauses.is_empty() {
        return Err("no clauses".into());
    }
    if is_zero {
        return Ok(());
    }
    for (i, c) in clauses.iter().enumerate() {
        if c.is_empty() {
            return Err(format!("clause {i} is empty"));
        }
        if c.contains_zero() {
            return Err(format!("clause {i} contains a zero atom"));
        }
        for (j, d) in clauses.iter().enumerate() {
            if i != j && c.is_subset(d) {
                return Err(format!("clause {j} is subsumed by clause {i}"));
            }
        }
    }
    let sorted = clauses.windows(2).all(|w| w[0] < w[1]);
    if !sorted {
        return Err("clauses out of canonical order".into());
    }
    Ok(())
}
