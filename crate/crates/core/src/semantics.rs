//! Evaluation in powerset models, solving by enumeration, and the
//! brute-force equivalence oracle over probe models.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{Elem, Embedding, ModelError, PowersetModel};
use crate::terms::{EqSystem, Equation, Relation, Term};

/// Default cap on the number of assignments one enumeration may visit.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable x{0}")]
    UnboundVariable(u32),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("enumeration needs 2^{required_log2} assignments, budget is {budget}")]
    BudgetExceeded { required_log2: u32, budget: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A map from variable index to element, kept sorted by index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Assignment {
    entries: Vec<(u32, Elem)>,
}

impl Assignment {
    pub fn new<I: IntoIterator<Item = (u32, Elem)>>(entries: I) -> Assignment {
        let mut entries: Vec<_> = entries.into_iter().collect();
        entries.sort_by_key(|e| e.0);
        entries.dedup_by_key(|e| e.0);
        Assignment { entries }
    }

    pub fn get(&self, var: u32) -> Option<Elem> {
        self.entries.binary_search_by_key(&var, |e| e.0).ok().map(|i| self.entries[i].1)
    }

    pub fn entries(&self) -> &[(u32, Elem)] {
        &self.entries
    }

    fn zeros(vars: &BTreeSet<u32>) -> Assignment {
        Assignment { entries: vars.iter().map(|&v| (v, Elem::ZERO)).collect() }
    }

    /// Odometer step with the last variable fastest; `false` after wrapping.
    fn advance(&mut self, limit: u64) -> bool {
        for entry in self.entries.iter_mut().rev() {
            if entry.1 .0 + 1 < limit {
                entry.1 .0 += 1;
                return true;
            }
            entry.1 = Elem::ZERO;
        }
        false
    }

    pub fn display<'a>(&'a self, m: &'a PowersetModel) -> impl fmt::Display + 'a {
        DisplayAssignment { a: self, m }
    }
}

struct DisplayAssignment<'a> {
    a: &'a Assignment,
    m: &'a PowersetModel,
}

impl fmt::Display for DisplayAssignment<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, e)) in self.a.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "x{v} = {}", self.m.format_elem(*e))?;
        }
        Ok(())
    }
}

pub fn eval(t: &Term, m: &PowersetModel, a: &Assignment) -> Result<Elem, EvalError> {
    Ok(match t {
        Term::Zero => Elem::ZERO,
        Term::Var(i) => a.get(*i).ok_or(EvalError::UnboundVariable(*i))?,
        Term::Const(c) => m.constant(c).ok_or_else(|| EvalError::UnknownConstant(c.to_string()))?,
        Term::Join(l, r) => eval(l, m, a)?.join(eval(r, m, a)?),
        Term::Meet(l, r) => eval(l, m, a)?.meet(eval(r, m, a)?),
        Term::Diff(l, r) => eval(l, m, a)?.diff(eval(r, m, a)?),
    })
}

pub fn satisfies(e: &Equation, m: &PowersetModel, a: &Assignment) -> Result<bool, EvalError> {
    let l = eval(&e.lhs, m, a)?;
    let r = eval(&e.rhs, m, a)?;
    Ok(match e.relation {
        Relation::Equal => l == r,
        Relation::LessOrEqual => l.le(r),
    })
}

/// Anything that can be tested under an assignment in a model.
///
/// Element literals held by the constraint live in some parent model and are
/// carried into the evaluation model through `emb`.
pub trait Constraint {
    fn collect_vars(&self, out: &mut BTreeSet<u32>);
    /// Union of the element literals the constraint mentions.
    fn literal_support(&self) -> Elem;
    fn holds(&self, m: &PowersetModel, emb: &Embedding, a: &Assignment) -> Result<bool, EvalError>;
}

impl Constraint for Equation {
    fn collect_vars(&self, out: &mut BTreeSet<u32>) {
        self.lhs.collect_vars(out);
        self.rhs.collect_vars(out);
    }

    fn literal_support(&self) -> Elem {
        Elem::ZERO
    }

    fn holds(&self, m: &PowersetModel, _emb: &Embedding, a: &Assignment) -> Result<bool, EvalError> {
        satisfies(self, m, a)
    }
}

fn vars_of<C: Constraint>(cs: &[C]) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    for c in cs {
        c.collect_vars(&mut out);
    }
    out
}

fn all_hold<C: Constraint>(cs: &[C], m: &PowersetModel, emb: &Embedding, a: &Assignment) -> Result<bool, EvalError> {
    for c in cs {
        if !c.holds(m, emb, a)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_budget(atoms: usize, vars: usize, budget: u64) -> Result<(), EvalError> {
    let bits = (atoms * vars) as u32;
    if bits >= 64 || (1u64 << bits) > budget {
        return Err(EvalError::BudgetExceeded { required_log2: bits, budget });
    }
    Ok(())
}

/// Calls `f` on every assignment of `vars` over `m`, in lexicographic order
/// of the bitmask tuple. Stops early when `f` returns `Ok(false)`.
pub fn for_each_assignment<F>(m: &PowersetModel, vars: &BTreeSet<u32>, budget: u64, mut f: F) -> Result<(), EvalError>
where
    F: FnMut(&Assignment) -> Result<bool, EvalError>,
{
    check_budget(m.atom_count(), vars.len(), budget)?;
    let limit = 1u64 << m.atom_count();
    let mut a = Assignment::zeros(vars);
    loop {
        if !f(&a)? {
            return Ok(());
        }
        if !a.advance(limit) {
            return Ok(());
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionSet {
    pub vars: BTreeSet<u32>,
    pub solutions: Vec<Assignment>,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }
}

/// Every assignment of the system's variables over `m` that satisfies it.
pub fn solve(s: &EqSystem, m: &PowersetModel, budget: u64) -> Result<SolutionSet, EvalError> {
    solve_constraints(&s.equations, m, budget)
}

pub fn solve_constraints<C: Constraint>(cs: &[C], m: &PowersetModel, budget: u64) -> Result<SolutionSet, EvalError> {
    solve_over(cs, &BTreeSet::new(), m, budget)
}

/// As [`solve_constraints`], with `extra_vars` added to the unknowns.
pub fn solve_over<C: Constraint>(
    cs: &[C],
    extra_vars: &BTreeSet<u32>,
    m: &PowersetModel,
    budget: u64,
) -> Result<SolutionSet, EvalError> {
    let mut vars = vars_of(cs);
    vars.extend(extra_vars);
    let emb = Embedding::identity(m.atom_count());
    let mut solutions = Vec::new();
    for_each_assignment(m, &vars, budget, |a| {
        if all_hold(cs, m, &emb, a)? {
            solutions.push(a.clone());
        }
        Ok(true)
    })?;
    Ok(SolutionSet { vars, solutions })
}

/// Probe models: the constants' support plus each listed number of fresh atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelProbe {
    pub fresh: Vec<usize>,
    pub budget: u64,
}

impl Default for ModelProbe {
    fn default() -> Self {
        ModelProbe { fresh: vec![0, 1, 2], budget: DEFAULT_BUDGET }
    }
}

impl ModelProbe {
    pub fn up_to(max_fresh: usize) -> ModelProbe {
        ModelProbe { fresh: (0..=max_fresh).collect(), ..ModelProbe::default() }
    }

    pub fn with_budget(mut self, budget: u64) -> ModelProbe {
        self.budget = budget;
        self
    }

    /// Builds the probe models for constraints whose literals cover `literals`.
    pub fn models(&self, base: &PowersetModel, literals: Elem) -> Result<Vec<(PowersetModel, Embedding)>, EvalError> {
        let support = base.constant_support().join(literals);
        self.fresh.iter().map(|&f| Ok(base.probe(support, f)?)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    Counterexample {
        model: PowersetModel,
        assignment: Assignment,
        /// Whether the first system holds at the witness (the second then does not).
        first_holds: bool,
    },
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent)
    }
}

fn literal_support<C: Constraint>(cs: &[C]) -> Elem {
    cs.iter().fold(Elem::ZERO, |acc, c| acc.join(c.literal_support()))
}

/// Compares solution sets over every probe model; returns the first
/// disagreeing model and assignment.
pub fn equivalent<A: Constraint, B: Constraint>(
    s1: &[A],
    s2: &[B],
    base: &PowersetModel,
    probe: &ModelProbe,
) -> Result<Verdict, EvalError> {
    let mut vars = vars_of(s1);
    vars.extend(vars_of(s2));
    let literals = literal_support(s1).join(literal_support(s2));
    for (m, emb) in probe.models(base, literals)? {
        let mut witness = None;
        for_each_assignment(&m, &vars, probe.budget, |a| {
            let h1 = all_hold(s1, &m, &emb, a)?;
            let h2 = all_hold(s2, &m, &emb, a)?;
            if h1 != h2 {
                witness = Some((a.clone(), h1));
                return Ok(false);
            }
            Ok(true)
        })?;
        if let Some((assignment, first_holds)) = witness {
            return Ok(Verdict::Counterexample { model: m, assignment, first_holds });
        }
    }
    Ok(Verdict::Equivalent)
}

/// Whether every probe solution of `premises` satisfies `conclusion`.
/// `extra_vars` widens the variable universe.
pub fn implies<C: Constraint>(
    premises: &[&C],
    conclusion: &C,
    extra_vars: &BTreeSet<u32>,
    base: &PowersetModel,
    probe: &ModelProbe,
) -> Result<bool, EvalError> {
    let mut vars = extra_vars.clone();
    conclusion.collect_vars(&mut vars);
    let mut literals = conclusion.literal_support();
    for p in premises {
        p.collect_vars(&mut vars);
        literals = literals.join(p.literal_support());
    }
    for (m, emb) in probe.models(base, literals)? {
        let mut ok = true;
        for_each_assignment(&m, &vars, probe.budget, |a| {
            for p in premises {
                if !p.holds(&m, &emb, a)? {
                    return Ok(true);
                }
            }
            if !conclusion.holds(&m, &emb, a)? {
                ok = false;
                return Ok(false);
            }
            Ok(true)
        })?;
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}
