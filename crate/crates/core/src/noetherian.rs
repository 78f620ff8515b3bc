//! Constant subalgebras, the equational Noetherian criterion, semantic
//! dedupe, and compaction of inequality groups through suprema and infima of
//! their constants.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::{ConstantFamily, Elem, FamilyMembers, FinSetElement, ModelError, PowersetModel};
use crate::semantics::{implies, EvalError, ModelProbe};
use crate::sysnf::{finish, fold_constants, raw_system, NormalInequality, RawInequality, Shape, SysError};
use crate::terms::EqSystem;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NoetherError {
    #[error("family `{0}` is not bounded above")]
    Unbounded(String),
    #[error("family `{0}` is empty")]
    EmptyFamily(String),
    #[error("family `{0}` has unknown members")]
    Opaque(String),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("group {group}: family `{family}` is unbounded and no witness was supplied")]
    MissingWitness { group: String, family: String },
    #[error("group {group}: {reason}")]
    Uncompactable { group: String, reason: String },
    #[error("witness {witness} for family `{family}` fails on the first {members} members")]
    WitnessMismatch { family: String, witness: String, members: usize },
    #[error("subalgebra closure exceeds {0} elements")]
    ClosureTooLarge(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    System(#[from] SysError),
}

/// Default cap on the number of elements a closure may reach.
pub const CLOSURE_LIMIT: usize = 1 << 16;

/// The least set containing `gens` and `0` closed under `∨ ∧ ∖`.
pub fn generated_subalgebra(gens: &[FinSetElement]) -> BTreeSet<FinSetElement> {
    generated_subalgebra_bounded(gens, usize::MAX).expect("unbounded closure never fails")
}

pub fn generated_subalgebra_bounded(gens: &[FinSetElement], limit: usize) -> Result<BTreeSet<FinSetElement>, NoetherError> {
    let mut closed: BTreeSet<FinSetElement> = BTreeSet::new();
    closed.insert(FinSetElement::empty());
    let mut frontier: Vec<FinSetElement> = gens.iter().filter(|g| !closed.contains(*g)).cloned().collect();
    frontier.sort();
    frontier.dedup();
    while let Some(x) = frontier.pop() {
        if closed.contains(&x) {
            continue;
        }
        let existing: Vec<FinSetElement> = closed.iter().cloned().collect();
        closed.insert(x.clone());
        if closed.len() > limit {
            return Err(NoetherError::ClosureTooLarge(limit));
        }
        for y in existing.iter().chain(std::iter::once(&x)) {
            for z in [x.join(y), x.meet(y), x.diff(y), y.diff(&x)] {
                if !closed.contains(&z) {
                    frontier.push(z);
                }
            }
        }
    }
    Ok(closed)
}

/// What generates a constant subalgebra.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubalgebraDescriptor {
    pub generators: Vec<FinSetElement>,
    pub families: Vec<ConstantFamily>,
    /// Overrides unknown family finiteness when set.
    pub declared_finite: Option<bool>,
}

impl SubalgebraDescriptor {
    pub fn explicit(generators: Vec<FinSetElement>) -> SubalgebraDescriptor {
        SubalgebraDescriptor { generators, ..Default::default() }
    }

    pub fn family(f: ConstantFamily) -> SubalgebraDescriptor {
        SubalgebraDescriptor { families: vec![f], ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NoetherianVerdict {
    /// The subalgebra is finite, with this many elements (when computed).
    Yes { size: Option<usize> },
    No { reason: String },
    Indeterminate { reason: String },
}

impl fmt::Display for NoetherianVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoetherianVerdict::Yes { size: Some(n) } => write!(f, "yes (|C| = {n})"),
            NoetherianVerdict::Yes { size: None } => write!(f, "yes (declared finite)"),
            NoetherianVerdict::No { reason } => write!(f, "no ({reason})"),
            NoetherianVerdict::Indeterminate { reason } => write!(f, "indeterminate ({reason})"),
        }
    }
}

/// Equationally Noetherian iff the constant subalgebra is finite.
pub fn is_equationally_noetherian(d: &SubalgebraDescriptor) -> Result<NoetherianVerdict, NoetherError> {
    let mut gens = d.generators.clone();
    let mut unknown = None;
    for f in &d.families {
        match f.is_finite() {
            Some(false) => {
                return Ok(NoetherianVerdict::No { reason: format!("family `{}` is infinite", f.label) });
            }
            Some(true) => gens.extend(f.materialize().expect("finite families materialize")),
            None => unknown = Some(f.label.clone()),
        }
    }
    if let Some(label) = unknown {
        return Ok(match d.declared_finite {
            Some(true) => NoetherianVerdict::Yes { size: None },
            Some(false) => NoetherianVerdict::No { reason: "declared infinite".into() },
            None => NoetherianVerdict::Indeterminate { reason: format!("finiteness of family `{label}` is unknown") },
        });
    }
    let closure = generated_subalgebra_bounded(&gens, CLOSURE_LIMIT)?;
    Ok(NoetherianVerdict::Yes { size: Some(closure.len()) })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Supremum {
    Bounded(FinSetElement),
    Unbounded,
    Unknown,
}

pub fn sup_of_family(f: &ConstantFamily) -> Supremum {
    match &f.members {
        FamilyMembers::Opaque { .. } => Supremum::Unknown,
        _ if !f.bounded_above => Supremum::Unbounded,
        _ => match f.materialize() {
            Some(members) => Supremum::Bounded(members.iter().fold(FinSetElement::empty(), |acc, m| acc.join(m))),
            None => Supremum::Unknown,
        },
    }
}

fn sup_of(members: &[FinSetElement]) -> FinSetElement {
    members.iter().fold(FinSetElement::empty(), |acc, m| acc.join(m))
}

/// Infimum computed from suprema: with `d = sup c_j` and `d′ = sup (d ∖ c_j)`,
/// the infimum is `d ∖ d′`.
pub fn inf_via_sup(f: &ConstantFamily) -> Result<FinSetElement, NoetherError> {
    let members = match sup_of_family(f) {
        Supremum::Bounded(_) => f.materialize().expect("bounded families materialize"),
        Supremum::Unbounded => return Err(NoetherError::Unbounded(f.label.clone())),
        Supremum::Unknown => return Err(NoetherError::Opaque(f.label.clone())),
    };
    if members.is_empty() {
        return Err(NoetherError::EmptyFamily(f.label.clone()));
    }
    let d = sup_of(&members);
    let complements: Vec<FinSetElement> = members.iter().map(|c| d.diff(c)).collect();
    let d_prime = sup_of(&complements);
    Ok(d.diff(&d_prime))
}

/// Removes, in order, every inequality implied by the others that remain.
/// The result is equivalent to the input on the probe models and no single
/// inequality of it can be dropped.
pub fn dedupe_system(
    s: &[NormalInequality],
    m: &PowersetModel,
    probe: &ModelProbe,
) -> Result<Vec<NormalInequality>, NoetherError> {
    let mut universe = BTreeSet::new();
    for ni in s {
        universe.extend(ni.vars());
    }
    let mut keep = vec![true; s.len()];
    for i in 0..s.len() {
        let premises: Vec<&NormalInequality> =
            s.iter().enumerate().filter(|&(j, _)| j != i && keep[j]).map(|(_, n)| n).collect();
        if implies(&premises, &s[i], &universe, m, probe)? {
            keep[i] = false;
        }
    }
    Ok(s.iter().zip(keep).filter(|(_, k)| *k).map(|(n, _)| n.clone()).collect())
}

/// Which side of the inequality the family constant sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilySide {
    /// `⋀X ∧ c_j ≤ ⋁Y` for every member.
    Left,
    /// `⋀X ≤ ⋁Y ∨ c_j` for every member.
    Right,
}

/// The (possibly infinite) system `{⋀X ∧ c_j ≤ ⋁Y | j ∈ J}` or
/// `{⋀X ≤ ⋁Y ∨ c_j | j ∈ J}` for a named family.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FamilyGroup {
    pub left_vars: BTreeSet<u32>,
    pub right_vars: BTreeSet<u32>,
    pub side: FamilySide,
    pub family: String,
}

impl FamilyGroup {
    fn describe(&self) -> String {
        let vars = |s: &BTreeSet<u32>| s.iter().map(|v| format!("x{v}")).collect::<Vec<_>>();
        let mut left = vars(&self.left_vars);
        let mut right = vars(&self.right_vars);
        match self.side {
            FamilySide::Left => left.push(format!("{}_j", self.family)),
            FamilySide::Right => right.push(format!("{}_j", self.family)),
        }
        if right.is_empty() {
            format!("{} = 0", left.join("*"))
        } else {
            format!("{} <= {}", left.join("*"), right.join("+"))
        }
    }
}

/// Inequalities sharing `(X, Y, shape)`, with their constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationGroup {
    pub left_vars: BTreeSet<u32>,
    pub right_vars: BTreeSet<u32>,
    pub shape: Shape,
    pub constants: Vec<Elem>,
}

/// Groups inequalities by `(X, Y, shape)` in canonical order.
pub fn group_inequalities(s: &[NormalInequality]) -> Vec<EquationGroup> {
    let mut groups: BTreeMap<(BTreeSet<u32>, BTreeSet<u32>, Shape), Vec<Elem>> = BTreeMap::new();
    for ni in s {
        let key = (ni.left_vars().clone(), ni.right_vars().clone(), ni.shape());
        let consts = groups.entry(key).or_default();
        if let Some(c) = ni.left_const().or(ni.right_const()) {
            if !consts.contains(&c) {
                consts.push(c);
            }
        }
    }
    groups
        .into_iter()
        .map(|((left_vars, right_vars, shape), constants)| EquationGroup { left_vars, right_vars, shape, constants })
        .collect()
}

fn group_name(left: &BTreeSet<u32>, right: &BTreeSet<u32>, shape: Shape) -> String {
    let v = |s: &BTreeSet<u32>| s.iter().map(|i| format!("x{i}")).collect::<Vec<_>>().join(",");
    format!("(X={{{}}}, Y={{{}}}, shape {})", v(left), v(right), shape.label())
}

fn normal(left: &BTreeSet<u32>, lc: Option<Elem>, right: &BTreeSet<u32>, rc: Option<Elem>) -> NormalInequality {
    NormalInequality::new(left.clone(), lc.filter(|c| !c.is_zero()), right.clone(), rc.filter(|c| !c.is_zero()))
        .expect("compacted inequality is well formed")
}

/// Collapses one group to at most one inequality; `None` when it is trivially true.
fn compact_group(g: &EquationGroup) -> Result<Option<NormalInequality>, NoetherError> {
    let (x, y) = (&g.left_vars, &g.right_vars);
    Ok(match g.shape {
        Shape::MeetConstLeJoin | Shape::MeetConstZero | Shape::ConstLeJoin | Shape::Contradiction => {
            let sup = g.constants.iter().fold(Elem::ZERO, |acc, &c| acc.join(c));
            Some(normal(x, Some(sup), y, None))
        }
        Shape::MeetLeJoinConst => {
            let members = g.constants.iter().map(|&c| FinSetElement::from_elem(c)).collect();
            let family = ConstantFamily::explicit(&group_name(x, y, g.shape), members);
            let inf = inf_via_sup(&family)?.to_elem(64).expect("infimum stays inside the members");
            Some(normal(x, None, y, Some(inf)))
        }
        Shape::MeetLeJoin => Some(normal(x, None, y, None)),
    })
}

/// Checks the witness equivalence `{x ∧ c_j = 0 | j} ∼ x ≤ c` on the
/// truncations of the family to its first `1..=max_members` members, each over
/// the powerset of the atoms those members and `c` mention.
pub fn verify_witness(f: &ConstantFamily, c: &FinSetElement, max_members: usize) -> Result<(), NoetherError> {
    for n in 1..=max_members {
        let members = f.prefix(n).ok_or_else(|| NoetherError::Opaque(f.label.clone()))?;
        let support = members.iter().fold(c.clone(), |acc, m| acc.join(m));
        let atoms: Vec<u64> = support.members().collect();
        if atoms.len() > 20 {
            break;
        }
        let local = |s: &FinSetElement| -> u64 {
            s.members().fold(0, |acc, j| acc | 1 << atoms.iter().position(|&a| a == j).unwrap())
        };
        let member_masks: Vec<u64> = members.iter().map(local).collect();
        let cm = local(c);
        for x in 0..1u64 << atoms.len() {
            let disjoint_from_all = member_masks.iter().all(|&m| x & m == 0);
            let below_c = x & !cm == 0;
            if disjoint_from_all != below_c {
                return Err(NoetherError::WitnessMismatch {
                    family: f.label.clone(),
                    witness: c.to_string(),
                    members: n,
                });
            }
        }
        if members.len() < n {
            break;
        }
    }
    Ok(())
}

/// Number of leading members [`compact_system`] checks a witness against.
pub const WITNESS_CHECK_MEMBERS: usize = 12;

/// Replaces each group of inequalities sharing `(X, Y, shape)` by a single
/// inequality: a supremum merge for constants on the left, an infimum merge
/// for constants on the right. Family groups whose family is unbounded use
/// the supplied witness `c`: `{(⋀X ∖ ⋁Y) ∧ c_j = 0}` becomes
/// `⋀X ∖ ⋁Y ≤ c`, i.e. `⋀X ≤ ⋁Y ∨ c`.
pub fn compact_system(
    s: &[NormalInequality],
    family_groups: &[FamilyGroup],
    families: &BTreeMap<String, ConstantFamily>,
    witnesses: &BTreeMap<String, Elem>,
    m: &PowersetModel,
) -> Result<Vec<NormalInequality>, NoetherError> {
    let mut items: Vec<NormalInequality> = s.to_vec();
    let mut out = BTreeSet::new();
    for fg in family_groups {
        let f = families.get(&fg.family).ok_or_else(|| NoetherError::UnknownFamily(fg.family.clone()))?;
        if let Some(elems) = f.to_elems(m) {
            // finite: expand and merge with the explicit inequalities
            for c in elems? {
                let ni = match fg.side {
                    FamilySide::Left => normal(&fg.left_vars, Some(c), &fg.right_vars, None),
                    FamilySide::Right if c.is_zero() => normal(&fg.left_vars, None, &fg.right_vars, None),
                    FamilySide::Right => normal(&fg.left_vars, None, &fg.right_vars, Some(c)),
                };
                if !(fg.side == FamilySide::Left && c.is_zero()) {
                    items.push(ni);
                }
            }
            continue;
        }
        if let FamilyMembers::Opaque { .. } = f.members {
            return Err(NoetherError::Opaque(f.label.clone()));
        }
        let group = fg.describe();
        if fg.side == FamilySide::Right {
            return Err(NoetherError::Uncompactable {
                group,
                reason: format!("the infimum of unbounded family `{}` is not computable from suprema", f.label),
            });
        }
        if fg.left_vars.is_empty() {
            return Err(NoetherError::Uncompactable {
                group,
                reason: format!("no element lies above every member of unbounded family `{}`", f.label),
            });
        }
        let c = witnesses
            .get(&f.label)
            .copied()
            .or_else(|| f.witness_c.as_ref().and_then(|w| w.to_elem(m.atom_count())))
            .ok_or_else(|| NoetherError::MissingWitness { group: group.clone(), family: f.label.clone() })?;
        verify_witness(f, &FinSetElement::from_elem(c), WITNESS_CHECK_MEMBERS)?;
        out.insert(normal(&fg.left_vars, None, &fg.right_vars, Some(c)));
    }
    for g in group_inequalities(&items) {
        out.extend(compact_group(&g)?);
    }
    if let Some(c) = out.iter().find(|ni| ni.is_contradiction()) {
        return Ok(vec![c.clone()]);
    }
    Ok(out.into_iter().collect())
}

/// Separates inequalities mentioning a family constant into [`FamilyGroup`]s.
/// A family constant must be the only constant of its inequality.
pub fn split_family_groups(
    raw: Vec<RawInequality>,
    families: &BTreeMap<String, ConstantFamily>,
) -> Result<(Vec<RawInequality>, Vec<FamilyGroup>), NoetherError> {
    let mut plain = Vec::new();
    let mut groups = BTreeSet::new();
    for r in raw {
        let named = r.constants().find(|c| families.contains_key(&***c)).map(|c| c.to_string());
        let Some(family) = named else {
            plain.push(r);
            continue;
        };
        let total = r.left_consts.len() + r.right_consts.len();
        if total != 1 {
            return Err(NoetherError::Uncompactable {
                group: crate::sysnf::render_raw(&r),
                reason: format!("family `{family}` must be the only constant of the inequality"),
            });
        }
        let side = if r.left_consts.is_empty() { FamilySide::Right } else { FamilySide::Left };
        groups.insert(FamilyGroup {
            left_vars: r.left_vars,
            right_vars: r.right_vars,
            side,
            family,
        });
    }
    Ok((plain, groups.into_iter().collect()))
}

/// Normalizes `s` and compacts the result. Constants of `s` may name
/// families, standing for one equation per member.
pub fn compact_equations(
    s: &EqSystem,
    m: &PowersetModel,
    families: &BTreeMap<String, ConstantFamily>,
    witnesses: &BTreeMap<String, Elem>,
) -> Result<Vec<NormalInequality>, NoetherError> {
    if let Some(c) = s.constants().into_iter().find(|c| m.constant(c).is_none() && !families.contains_key(&**c)) {
        return Err(SysError::UnknownConstant(c.to_string()).into());
    }
    let (plain, groups) = split_family_groups(raw_system(s), families)?;
    let mut normal = Vec::new();
    for r in &plain {
        normal.extend(finish(&fold_constants(r, m)?));
    }
    compact_system(&normal, &groups, families, witnesses, m)
}
