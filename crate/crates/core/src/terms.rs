//! The term language over `{∨, ∧, ∖, 0}` with variables and named constants,
//! plus the canonical difference-atom shapes used by the normalizers.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// A term of the Ershov signature.
///
/// `Diff(l, r)` is the relative complement `l ∖ r`: the complement of `r`
/// in the interval `[0, l ∨ r]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Zero,
    /// Variable `x_i`, `i >= 1`.
    Var(u32),
    Const(Arc<str>),
    Join(Box<Term>, Box<Term>),
    Meet(Box<Term>, Box<Term>),
    Diff(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(index: u32) -> Term {
        assert!(index >= 1, "variable indices start at 1");
        Term::Var(index)
    }

    pub fn constant(name: &str) -> Term {
        assert!(!name.is_empty(), "constant names are nonempty");
        Term::Const(Arc::from(name))
    }

    pub fn join(l: Term, r: Term) -> Term {
        Term::Join(Box::new(l), Box::new(r))
    }

    pub fn meet(l: Term, r: Term) -> Term {
        Term::Meet(Box::new(l), Box::new(r))
    }

    pub fn diff(l: Term, r: Term) -> Term {
        Term::Diff(Box::new(l), Box::new(r))
    }

    /// Left-folded join; `None` for an empty iterator.
    pub fn join_all<I: IntoIterator<Item = Term>>(terms: I) -> Option<Term> {
        terms.into_iter().reduce(Term::join)
    }

    pub fn meet_all<I: IntoIterator<Item = Term>>(terms: I) -> Option<Term> {
        terms.into_iter().reduce(Term::meet)
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Term::Zero | Term::Var(_) | Term::Const(_))
    }

    pub fn as_operand(&self) -> Option<Operand> {
        match self {
            Term::Zero => Some(Operand::Zero),
            Term::Var(i) => Some(Operand::Var(*i)),
            Term::Const(c) => Some(Operand::Const(c.clone())),
            _ => None,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Term::Zero | Term::Var(_) | Term::Const(_) => 1,
            Term::Join(l, r) | Term::Meet(l, r) | Term::Diff(l, r) => 1 + l.size() + r.size(),
        }
    }

    pub fn diff_count(&self) -> usize {
        match self {
            Term::Zero | Term::Var(_) | Term::Const(_) => 0,
            Term::Join(l, r) | Term::Meet(l, r) => l.diff_count() + r.diff_count(),
            Term::Diff(l, r) => 1 + l.diff_count() + r.diff_count(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<u32>) {
        match self {
            Term::Var(i) => {
                out.insert(*i);
            }
            Term::Zero | Term::Const(_) => {}
            Term::Join(l, r) | Term::Meet(l, r) | Term::Diff(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub fn constants(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_constants(&mut out);
        out
    }

    pub(crate) fn collect_constants(&self, out: &mut BTreeSet<Arc<str>>) {
        match self {
            Term::Const(c) => {
                out.insert(c.clone());
            }
            Term::Zero | Term::Var(_) => {}
            Term::Join(l, r) | Term::Meet(l, r) | Term::Diff(l, r) => {
                l.collect_constants(out);
                r.collect_constants(out);
            }
        }
    }

    /// Replaces every occurrence of constant `name` with `by`.
    pub fn substitute_constant(&self, name: &str, by: &Term) -> Term {
        match self {
            Term::Const(c) if &**c == name => by.clone(),
            Term::Zero | Term::Var(_) | Term::Const(_) => self.clone(),
            Term::Join(l, r) => Term::join(l.substitute_constant(name, by), r.substitute_constant(name, by)),
            Term::Meet(l, r) => Term::meet(l.substitute_constant(name, by), r.substitute_constant(name, by)),
            Term::Diff(l, r) => Term::diff(l.substitute_constant(name, by), r.substitute_constant(name, by)),
        }
    }
}

/// Free variables of a term.
pub fn free_vars(t: &Term) -> BTreeSet<u32> {
    t.free_vars()
}

/// Operand of a difference atom. The derived order puts variables first, then
/// constants by name, then `0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operand {
    Var(u32),
    Const(Arc<str>),
    Zero,
}

impl Operand {
    pub fn to_term(&self) -> Term {
        match self {
            Operand::Var(i) => Term::Var(*i),
            Operand::Const(c) => Term::Const(c.clone()),
            Operand::Zero => Term::Zero,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Operand::Zero)
    }
}

/// `base ∖ minus` with atomic operands. A bare operand `v` is stored as `v ∖ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DifferenceAtom {
    base: Operand,
    minus: Operand,
}

impl DifferenceAtom {
    /// Builds the canonical atom; `0 ∖ x` and `x ∖ x` collapse to `0 ∖ 0`.
    pub fn new(base: Operand, minus: Operand) -> DifferenceAtom {
        if base.is_zero() || base == minus {
            DifferenceAtom::zero()
        } else {
            DifferenceAtom { base, minus }
        }
    }

    pub fn bare(base: Operand) -> DifferenceAtom {
        DifferenceAtom::new(base, Operand::Zero)
    }

    pub fn zero() -> DifferenceAtom {
        DifferenceAtom { base: Operand::Zero, minus: Operand::Zero }
    }

    pub fn base(&self) -> &Operand {
        &self.base
    }

    pub fn minus(&self) -> &Operand {
        &self.minus
    }

    pub fn is_zero(&self) -> bool {
        self.base.is_zero()
    }

    pub fn is_bare(&self) -> bool {
        self.minus.is_zero()
    }

    pub fn to_term(&self) -> Term {
        Term::diff(self.base.to_term(), self.minus.to_term())
    }
}

/// A duplicate-free, ordered set of atoms. In a DNF it denotes their meet, in
/// a CNF their join.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    atoms: BTreeSet<DifferenceAtom>,
}

impl Clause {
    pub fn new<I: IntoIterator<Item = DifferenceAtom>>(atoms: I) -> Clause {
        Clause { atoms: atoms.into_iter().collect() }
    }

    pub fn atoms(&self) -> impl Iterator<Item = &DifferenceAtom> {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn contains_zero(&self) -> bool {
        self.atoms.iter().any(DifferenceAtom::is_zero)
    }

    pub fn is_subset(&self, other: &Clause) -> bool {
        self.atoms.is_subset(&other.atoms)
    }

    fn zero_clause() -> Clause {
        Clause::new([DifferenceAtom::zero()])
    }
}

/// Inserts `clause` into an antichain under `⊆`, dropping it when an existing
/// clause is a subset and evicting existing supersets.
pub(crate) fn insert_minimal(set: &mut Vec<BTreeSet<DifferenceAtom>>, clause: BTreeSet<DifferenceAtom>) {
    if set.iter().any(|c| c.is_subset(&clause)) {
        return;
    }
    set.retain(|c| !clause.is_subset(c));
    set.push(clause);
}

/// Join of meet-clauses.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DnfTerm {
    clauses: BTreeSet<Clause>,
}

impl DnfTerm {
    /// Canonicalizes: clauses containing the zero atom vanish, subsumed
    /// (superset) clauses are removed, and the empty join becomes `{0 ∖ 0}`.
    pub fn from_clauses<I: IntoIterator<Item = Clause>>(clauses: I) -> DnfTerm {
        let mut kept = Vec::new();
        for clause in clauses {
            if clause.is_empty() || clause.contains_zero() {
                continue;
            }
            insert_minimal(&mut kept, clause.atoms);
        }
        if kept.is_empty() {
            return DnfTerm::zero();
        }
        DnfTerm { clauses: kept.into_iter().map(|atoms| Clause { atoms }).collect() }
    }

    pub fn zero() -> DnfTerm {
        DnfTerm { clauses: [Clause::zero_clause()].into_iter().collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.clauses.len() == 1 && self.clauses.iter().next().unwrap().contains_zero()
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Rebuilds a plain term: join of meets of `base ∖ minus` nodes.
    pub fn to_term(&self) -> Term {
        if self.is_zero() {
            return Term::Zero;
        }
        Term::join_all(
            self.clauses
                .iter()
                .map(|c| Term::meet_all(c.atoms().map(DifferenceAtom::to_term)).unwrap()),
        )
        .unwrap()
    }
}

/// Meet of join-clauses.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CnfTerm {
    clauses: BTreeSet<Clause>,
}

impl CnfTerm {
    /// Canonicalizes: zero atoms are dropped from each join, an empty join
    /// makes the whole meet `0`, and superset clauses are removed.
    pub fn from_clauses<I: IntoIterator<Item = Clause>>(clauses: I) -> CnfTerm {
        let mut kept = Vec::new();
        for clause in clauses {
            let atoms: BTreeSet<_> = clause.atoms.into_iter().filter(|a| !a.is_zero()).collect();
            if atoms.is_empty() {
                return CnfTerm::zero();
            }
            insert_minimal(&mut kept, atoms);
        }
        assert!(!kept.is_empty(), "a CNF needs at least one clause");
        CnfTerm { clauses: kept.into_iter().map(|atoms| Clause { atoms }).collect() }
    }

    pub fn zero() -> CnfTerm {
        CnfTerm { clauses: [Clause::zero_clause()].into_iter().collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.clauses.len() == 1 && self.clauses.iter().next().unwrap().contains_zero()
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn to_term(&self) -> Term {
        if self.is_zero() {
            return Term::Zero;
        }
        Term::meet_all(
            self.clauses
                .iter()
                .map(|c| Term::join_all(c.atoms().map(DifferenceAtom::to_term)).unwrap()),
        )
        .unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Equal,
    LessOrEqual,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Equal => f.write_str("="),
            Relation::LessOrEqual => f.write_str("<="),
        }
    }
}

/// `lhs = rhs` or `lhs ≤ rhs`; the latter means `lhs ∨ rhs = rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
    pub relation: Relation,
}

impl Equation {
    pub fn equal(lhs: Term, rhs: Term) -> Equation {
        Equation { lhs, rhs, relation: Relation::Equal }
    }

    pub fn less_eq(lhs: Term, rhs: Term) -> Equation {
        Equation { lhs, rhs, relation: Relation::LessOrEqual }
    }

    /// The equation form `lhs ∨ rhs = rhs` of an inequality.
    pub fn as_join_equation(&self) -> Equation {
        match self.relation {
            Relation::Equal => self.clone(),
            Relation::LessOrEqual => {
                Equation::equal(Term::join(self.lhs.clone(), self.rhs.clone()), self.rhs.clone())
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<u32> {
        let mut out = self.lhs.free_vars();
        self.rhs.collect_vars(&mut out);
        out
    }

    pub fn constants(&self) -> BTreeSet<Arc<str>> {
        let mut out = self.lhs.constants();
        self.rhs.collect_constants(&mut out);
        out
    }
}

/// Splits `t = s` into `[t ≤ s, s ≤ t]`; inequalities pass through.
pub fn eq_as_pair_of_inequalities(e: &Equation) -> Vec<Equation> {
    match e.relation {
        Relation::Equal => vec![
            Equation::less_eq(e.lhs.clone(), e.rhs.clone()),
            Equation::less_eq(e.rhs.clone(), e.lhs.clone()),
        ],
        Relation::LessOrEqual => vec![e.clone()],
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EqSystem {
    pub equations: Vec<Equation>,
}

impl EqSystem {
    pub fn new(equations: Vec<Equation>) -> EqSystem {
        EqSystem { equations }
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn free_vars(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        for e in &self.equations {
            e.lhs.collect_vars(&mut out);
            e.rhs.collect_vars(&mut out);
        }
        out
    }

    pub fn constants(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        for e in &self.equations {
            e.lhs.collect_constants(&mut out);
            e.rhs.collect_constants(&mut out);
        }
        out
    }
}
