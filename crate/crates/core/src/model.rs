//! Finite Ershov algebras: powerset models over a labelled atom list, the
//! algebra of finite subsets of ℕ, and families of constants.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Hard cap on atoms per model; elements are `u64` bitmasks.
pub const MAX_ATOMS: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("model has {0} atoms; at most {MAX_ATOMS} are supported")]
    TooManyAtoms(usize),
    #[error("duplicate atom label `{0}`")]
    DuplicateAtom(String),
    #[error("element {0:#x} is not a subset of the model's atoms")]
    NotAnElement(u64),
    #[error("constant `{constant}` refers to unknown atom `{atom}`")]
    UnknownAtom { constant: String, atom: String },
    #[error("duplicate constant `{0}`")]
    DuplicateConstant(String),
    #[error("member {member} of family `{family}` has no atom at index {member} in the model")]
    FamilyOutOfRange { family: String, member: u64 },
}

/// An element of a powerset model: a bitmask over the model's atom list.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem(pub u64);

impl Elem {
    pub const ZERO: Elem = Elem(0);

    pub fn join(self, other: Elem) -> Elem {
        Elem(self.0 | other.0)
    }

    pub fn meet(self, other: Elem) -> Elem {
        Elem(self.0 & other.0)
    }

    pub fn diff(self, other: Elem) -> Elem {
        Elem(self.0 & !other.0)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn le(self, other: Elem) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn bits(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |i| self.0 >> i & 1 == 1)
    }
}

/// Operations of a finite Ershov algebra with an explicit element list.
pub trait FiniteErshovAlgebra {
    type Element: Copy + Eq + fmt::Debug;

    fn elements(&self) -> Vec<Self::Element>;
    fn zero(&self) -> Self::Element;
    fn join(&self, a: Self::Element, b: Self::Element) -> Self::Element;
    fn meet(&self, a: Self::Element, b: Self::Element) -> Self::Element;
    fn diff(&self, a: Self::Element, b: Self::Element) -> Self::Element;
}

/// The powerset algebra of a finite atom list, with a table of named constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowersetModel {
    atoms: Vec<String>,
    constants: BTreeMap<Arc<str>, Elem>,
}

impl PowersetModel {
    pub fn new(atoms: Vec<String>) -> Result<PowersetModel, ModelError> {
        if atoms.len() > MAX_ATOMS {
            return Err(ModelError::TooManyAtoms(atoms.len()));
        }
        let mut seen = BTreeSet::new();
        for a in &atoms {
            if !seen.insert(a.as_str()) {
                return Err(ModelError::DuplicateAtom(a.clone()));
            }
        }
        Ok(PowersetModel { atoms, constants: BTreeMap::new() })
    }

    /// Atoms labelled `0..n`.
    pub fn numbered(n: usize) -> PowersetModel {
        PowersetModel::new((0..n).map(|i| i.to_string()).collect()).expect("numbered atoms are distinct")
    }

    pub fn with_constant(mut self, name: &str, value: Elem) -> Result<PowersetModel, ModelError> {
        self.add_constant(name, value)?;
        Ok(self)
    }

    pub fn add_constant(&mut self, name: &str, value: Elem) -> Result<(), ModelError> {
        self.check(value)?;
        if self.constants.contains_key(name) {
            return Err(ModelError::DuplicateConstant(name.to_string()));
        }
        self.constants.insert(Arc::from(name), value);
        Ok(())
    }

    /// Adds a constant given by atom labels.
    pub fn add_constant_labels(&mut self, name: &str, labels: &[&str]) -> Result<(), ModelError> {
        let value = self.element_from_labels(name, labels.iter().copied())?;
        self.add_constant(name, value)
    }

    pub fn element_from_labels<'a, I>(&self, context: &str, labels: I) -> Result<Elem, ModelError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut mask = 0u64;
        for label in labels {
            let idx = self.atom_index(label).ok_or_else(|| ModelError::UnknownAtom {
                constant: context.to_string(),
                atom: label.to_string(),
            })?;
            mask |= 1 << idx;
        }
        Ok(Elem(mask))
    }

    pub fn atom_index(&self, label: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == label)
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn constants(&self) -> &BTreeMap<Arc<str>, Elem> {
        &self.constants
    }

    pub fn constant(&self, name: &str) -> Option<Elem> {
        self.constants.get(name).copied()
    }

    pub fn full(&self) -> Elem {
        if self.atoms.len() == 64 {
            Elem(u64::MAX)
        } else {
            Elem((1u64 << self.atoms.len()) - 1)
        }
    }

    pub fn check(&self, e: Elem) -> Result<Elem, ModelError> {
        if e.le(self.full()) {
            Ok(e)
        } else {
            Err(ModelError::NotAnElement(e.0))
        }
    }

    pub fn join(&self, a: Elem, b: Elem) -> Result<Elem, ModelError> {
        Ok(self.check(a)?.join(self.check(b)?))
    }

    pub fn meet(&self, a: Elem, b: Elem) -> Result<Elem, ModelError> {
        Ok(self.check(a)?.meet(self.check(b)?))
    }

    pub fn diff(&self, a: Elem, b: Elem) -> Result<Elem, ModelError> {
        Ok(self.check(a)?.diff(self.check(b)?))
    }

    /// Union of the supports of every constant.
    pub fn constant_support(&self) -> Elem {
        self.constants.values().fold(Elem::ZERO, |acc, &c| acc.join(c))
    }

    /// The model restricted to the atoms of `support` plus `fresh` new atoms,
    /// with every constant carried over. Constants must lie inside `support`.
    pub fn probe(&self, support: Elem, fresh: usize) -> Result<(PowersetModel, Embedding), ModelError> {
        self.check(support)?;
        let positions: Vec<usize> = support.bits().collect();
        let mut atoms: Vec<String> = positions.iter().map(|&i| self.atoms[i].clone()).collect();
        for k in 1..=fresh {
            let mut label = format!("~{k}");
            while atoms.contains(&label) {
                label.insert(0, '~');
            }
            atoms.push(label);
        }
        let embedding = Embedding { positions };
        let mut probe = PowersetModel::new(atoms)?;
        for (name, &value) in &self.constants {
            if !value.le(support) {
                return Err(ModelError::NotAnElement(value.0));
            }
            probe.constants.insert(name.clone(), embedding.map(value));
        }
        Ok((probe, embedding))
    }

    pub fn format_elem(&self, e: Elem) -> String {
        let labels: Vec<&str> = e.bits().map(|i| self.atoms.get(i).map_or("?", String::as_str)).collect();
        format!("{{{}}}", labels.join(","))
    }
}

impl FiniteErshovAlgebra for PowersetModel {
    type Element = Elem;

    fn elements(&self) -> Vec<Elem> {
        enumerate_elements(self)
    }

    fn zero(&self) -> Elem {
        Elem::ZERO
    }

    fn join(&self, a: Elem, b: Elem) -> Elem {
        a.join(b)
    }

    fn meet(&self, a: Elem, b: Elem) -> Elem {
        a.meet(b)
    }

    fn diff(&self, a: Elem, b: Elem) -> Elem {
        a.diff(b)
    }
}

/// All `2^n` elements in increasing bitmask order.
pub fn enumerate_elements(m: &PowersetModel) -> Vec<Elem> {
    assert!(m.atom_count() < 32, "refusing to enumerate 2^{} elements", m.atom_count());
    (0..1u64 << m.atom_count()).map(Elem).collect()
}

/// Maps elements of a parent model into a probe model built by
/// [`PowersetModel::probe`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    positions: Vec<usize>,
}

impl Embedding {
    pub fn identity(atoms: usize) -> Embedding {
        Embedding { positions: (0..atoms).collect() }
    }

    pub fn map(&self, e: Elem) -> Elem {
        let mut out = 0u64;
        for (i, &p) in self.positions.iter().enumerate() {
            out |= (e.0 >> p & 1) << i;
        }
        Elem(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomViolation<E> {
    pub law: &'static str,
    pub tuple: Vec<E>,
}

/// Exhaustively checks the lattice, distributivity and interval-complement
/// laws; returns the first failing law and tuple.
pub fn verify_ershov_axioms<A: FiniteErshovAlgebra>(m: &A) -> Result<(), AxiomViolation<A::Element>> {
    let els = m.elements();
    let z = m.zero();
    let fail = |law, tuple: &[A::Element]| Err(AxiomViolation { law, tuple: tuple.to_vec() });
    for &a in &els {
        if m.meet(a, a) != a || m.join(a, a) != a {
            return fail("idempotence", &[a]);
        }
        if m.join(a, z) != a || m.meet(a, z) != z {
            return fail("least element", &[a]);
        }
        for &b in &els {
            if m.meet(a, b) != m.meet(b, a) || m.join(a, b) != m.join(b, a) {
                return fail("commutativity", &[a, b]);
            }
            if m.meet(a, m.join(a, b)) != a || m.join(a, m.meet(a, b)) != a {
                return fail("absorption", &[a, b]);
            }
            let d = m.diff(b, a);
            if m.meet(d, a) != z || m.join(d, a) != m.join(a, b) {
                return fail("interval complement", &[b, a]);
            }
            for &c in &els {
                if m.meet(m.meet(a, b), c) != m.meet(a, m.meet(b, c))
                    || m.join(m.join(a, b), c) != m.join(a, m.join(b, c))
                {
                    return fail("associativity", &[a, b, c]);
                }
                if m.meet(a, m.join(b, c)) != m.join(m.meet(a, b), m.meet(a, c)) {
                    return fail("meet distributivity", &[a, b, c]);
                }
                if m.join(a, m.meet(b, c)) != m.meet(m.join(a, b), m.join(a, c)) {
                    return fail("join distributivity", &[a, b, c]);
                }
            }
        }
    }
    Ok(())
}

/// A finite subset of ℕ, the canonical carrier for constants: the finite
/// subsets of ℕ form an Ershov algebra with no greatest element.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinSetElement(BTreeSet<u64>);

impl FinSetElement {
    pub fn empty() -> FinSetElement {
        FinSetElement::default()
    }

    pub fn singleton(j: u64) -> FinSetElement {
        FinSetElement([j].into())
    }

    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn join(&self, other: &FinSetElement) -> FinSetElement {
        FinSetElement(self.0.union(&other.0).copied().collect())
    }

    pub fn meet(&self, other: &FinSetElement) -> FinSetElement {
        FinSetElement(self.0.intersection(&other.0).copied().collect())
    }

    pub fn diff(&self, other: &FinSetElement) -> FinSetElement {
        FinSetElement(self.0.difference(&other.0).copied().collect())
    }

    pub fn le(&self, other: &FinSetElement) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Bit `j` of the mask becomes member `j`.
    pub fn from_elem(e: Elem) -> FinSetElement {
        FinSetElement(e.bits().map(|i| i as u64).collect())
    }

    /// Inverse of [`FinSetElement::from_elem`]; `None` if a member is ≥ `atoms`.
    pub fn to_elem(&self, atoms: usize) -> Option<Elem> {
        let mut mask = 0u64;
        for &j in &self.0 {
            if j >= atoms as u64 {
                return None;
            }
            mask |= 1 << j;
        }
        Some(Elem(mask))
    }
}

impl<I: IntoIterator<Item = u64>> From<I> for FinSetElement {
    fn from(it: I) -> Self {
        FinSetElement(it.into_iter().collect())
    }
}

impl fmt::Display for FinSetElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// How the members of a [`ConstantFamily`] are given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyMembers {
    Explicit(Vec<FinSetElement>),
    /// `{j}` for `j < limit`, or for every `j ∈ ℕ` when `limit` is `None`.
    Singletons { limit: Option<u64> },
    /// A family known only by description.
    Opaque { description: String, finite: Option<bool> },
}

/// An indexed set `{c_j | j ∈ J}` of constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantFamily {
    pub label: String,
    pub members: FamilyMembers,
    pub bounded_above: bool,
    pub witness_c: Option<FinSetElement>,
}

impl ConstantFamily {
    /// Builds a family with `bounded_above` derived from its members. In the
    /// algebra of finite subsets of ℕ a family is bounded iff it has finitely
    /// many distinct members.
    pub fn new(label: &str, members: FamilyMembers) -> ConstantFamily {
        let bounded_above = match &members {
            FamilyMembers::Explicit(_) => true,
            FamilyMembers::Singletons { limit } => limit.is_some(),
            FamilyMembers::Opaque { .. } => false,
        };
        ConstantFamily { label: label.to_string(), members, bounded_above, witness_c: None }
    }

    pub fn explicit(label: &str, members: Vec<FinSetElement>) -> ConstantFamily {
        ConstantFamily::new(label, FamilyMembers::Explicit(members))
    }

    pub fn singletons(label: &str, limit: Option<u64>) -> ConstantFamily {
        ConstantFamily::new(label, FamilyMembers::Singletons { limit })
    }

    pub fn with_witness(mut self, c: FinSetElement) -> ConstantFamily {
        self.witness_c = Some(c);
        self
    }

    /// `Some(true)` if finitely many members, `None` if unknown.
    pub fn is_finite(&self) -> Option<bool> {
        match &self.members {
            FamilyMembers::Explicit(_) => Some(true),
            FamilyMembers::Singletons { limit } => Some(limit.is_some()),
            FamilyMembers::Opaque { finite, .. } => *finite,
        }
    }

    /// Every member, if the family is finite and enumerable.
    pub fn materialize(&self) -> Option<Vec<FinSetElement>> {
        match &self.members {
            FamilyMembers::Explicit(m) => Some(m.clone()),
            FamilyMembers::Singletons { limit: Some(n) } => Some((0..*n).map(FinSetElement::singleton).collect()),
            _ => None,
        }
    }

    /// The first `n` members (fewer if the family is smaller); `None` for
    /// opaque families.
    pub fn prefix(&self, n: usize) -> Option<Vec<FinSetElement>> {
        match &self.members {
            FamilyMembers::Explicit(m) => Some(m.iter().take(n).cloned().collect()),
            FamilyMembers::Singletons { limit } => {
                let end = limit.map_or(n as u64, |l| l.min(n as u64));
                Some((0..end).map(FinSetElement::singleton).collect())
            }
            FamilyMembers::Opaque { .. } => None,
        }
    }

    /// Members mapped into `m` by atom index.
    pub fn to_elems(&self, m: &PowersetModel) -> Option<Result<Vec<Elem>, ModelError>> {
        let members = self.materialize()?;
        Some(
            members
                .iter()
                .map(|f| {
                    f.to_elem(m.atom_count()).ok_or_else(|| ModelError::FamilyOutOfRange {
                        family: self.label.clone(),
                        member: f.members().max().unwrap_or(0),
                    })
                })
                .collect(),
        )
    }
}
