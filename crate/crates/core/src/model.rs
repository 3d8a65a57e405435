//! STRIPS domain and problem representation.
//!
//! Lifted atoms inside schemas refer to parameters by position ([`Term::Var`]),
//! so a schema can be grounded by indexing into an argument slice without any
//! name lookup.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::symbol::Symbol;

/// Root of every type hierarchy.
pub const OBJECT_TYPE: &str = "object";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown action schema `{0}`")]
    UnknownSchema(Symbol),
    #[error("duplicate action schema `{0}`")]
    DuplicateSchema(Symbol),
    #[error("`{name}` expects {expected} argument(s), got {found}")]
    ArityMismatch {
        name: Symbol,
        expected: usize,
        found: usize,
    },
    #[error("undeclared predicate `{0}`")]
    UndeclaredPredicate(Symbol),
    #[error("undeclared object `{0}`")]
    UndeclaredObject(Symbol),
    #[error("unknown type `{0}`")]
    UnknownType(Symbol),
    #[error("object `{object}` of type `{found}` cannot fill a `{expected}` slot")]
    TypeMismatch {
        object: Symbol,
        expected: Symbol,
        found: Symbol,
    },
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(Symbol),
    #[error("schema `{schema}` adds and deletes {atom}")]
    AddDeleteOverlap { schema: Symbol, atom: String },
    #[error("schema `{schema}` refers to parameter #{index} but has only {count}")]
    BadVariable { schema: Symbol, index: usize, count: usize },
    #[error("duplicate parameter `{0}`")]
    DuplicateParameter(Symbol),
    #[error("type `{0}` has a cyclic parent chain")]
    CyclicType(Symbol),
}

/// A proposition over objects, e.g. `(on b a)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub predicate: Symbol,
    pub args: Vec<Symbol>,
}

impl GroundAtom {
    pub fn new<P, I, A>(predicate: P, args: I) -> Self
    where
        P: Into<Symbol>,
        I: IntoIterator<Item = A>,
        A: Into<Symbol>,
    {
        GroundAtom {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    /// Renames every argument through `f`; `None` from `f` aborts the rename.
    pub fn try_rename(&self, mut f: impl FnMut(&Symbol) -> Option<Symbol>) -> Option<GroundAtom> {
        let args = self.args.iter().map(&mut f).collect::<Option<Vec<_>>>()?;
        Some(GroundAtom {
            predicate: self.predicate.clone(),
            args,
        })
    }
}

fn write_sexp(f: &mut fmt::Formatter<'_>, head: &Symbol, args: &[Symbol]) -> fmt::Result {
    write!(f, "({head}")?;
    for a in args {
        write!(f, " {a}")?;
    }
    f.write_str(")")
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sexp(f, &self.predicate, &self.args)
    }
}

impl fmt::Debug for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A closed-world state: a set of ground atoms, absent atoms are false.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    atoms: BTreeSet<GroundAtom>,
}

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn insert(&mut self, atom: GroundAtom) -> bool {
        self.atoms.insert(atom)
    }

    pub fn remove(&mut self, atom: &GroundAtom) -> bool {
        self.atoms.remove(atom)
    }

    /// True iff every atom of `other` holds here.
    pub fn satisfies(&self, other: &State) -> bool {
        other.atoms.is_subset(&self.atoms)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroundAtom> + '_ {
        self.atoms.iter()
    }

    pub fn atoms(&self) -> &BTreeSet<GroundAtom> {
        &self.atoms
    }

    pub fn intersection_count(&self, other: &State) -> usize {
        self.atoms.intersection(&other.atoms).count()
    }

    /// Every object symbol mentioned by some atom.
    pub fn objects(&self) -> BTreeSet<Symbol> {
        self.atoms.iter().flat_map(|a| a.args.iter().cloned()).collect()
    }
}

impl FromIterator<GroundAtom> for State {
    fn from_iter<T: IntoIterator<Item = GroundAtom>>(iter: T) -> Self {
        State {
            atoms: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a State {
    type Item = &'a GroundAtom;
    type IntoIter = std::collections::btree_set::Iter<'a, GroundAtom>;

    fn into_iter(self) -> Self::IntoIter {
        self.atoms.iter()
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.atoms.iter()).finish()
    }
}

/// Argument of a lifted atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// Index into the owning schema's parameter list.
    Var(usize),
    Const(Symbol),
}

/// A lifted atom inside an action schema.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<Symbol>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    /// Grounds the atom with positional arguments. Caller guarantees every
    /// variable index is in range.
    pub fn ground(&self, args: &[Symbol]) -> GroundAtom {
        GroundAtom {
            predicate: self.predicate.clone(),
            args: self
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(i) => args[*i].clone(),
                    Term::Const(c) => c.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameter {
    /// Name without the leading `?`.
    pub name: Symbol,
    pub ty: Symbol,
}

impl Parameter {
    pub fn new(name: impl Into<Symbol>, ty: impl Into<Symbol>) -> Self {
        Parameter {
            name: name.into(),
            ty: ty.into(),
        }
    }
}

/// Which of the three atom lists of a schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ListKind {
    Pre,
    Add,
    Del,
}

/// A lifted STRIPS operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: Symbol,
    pub params: Vec<Parameter>,
    pub pre: Vec<Atom>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
}

impl ActionSchema {
    /// Builds a schema, dropping duplicate atoms within each list and
    /// rejecting out-of-range variables and add/delete overlaps.
    pub fn new(
        name: impl Into<Symbol>,
        params: Vec<Parameter>,
        pre: Vec<Atom>,
        add: Vec<Atom>,
        del: Vec<Atom>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        let mut seen = BTreeSet::new();
        for p in &params {
            if !seen.insert(&p.name) {
                return Err(ModelError::DuplicateParameter(p.name.clone()));
            }
        }
        let schema = ActionSchema {
            name,
            pre: dedup(pre),
            add: dedup(add),
            del: dedup(del),
            params,
        };
        for atom in schema.pre.iter().chain(&schema.add).chain(&schema.del) {
            for t in &atom.args {
                if let Term::Var(i) = t {
                    if *i >= schema.params.len() {
                        return Err(ModelError::BadVariable {
                            schema: schema.name.clone(),
                            index: *i,
                            count: schema.params.len(),
                        });
                    }
                }
            }
        }
        if let Some(atom) = schema.add.iter().find(|a| schema.del.contains(a)) {
            return Err(ModelError::AddDeleteOverlap {
                schema: schema.name.clone(),
                atom: schema.display_atom(atom),
            });
        }
        Ok(schema)
    }

    pub fn list(&self, kind: ListKind) -> &[Atom] {
        match kind {
            ListKind::Pre => &self.pre,
            ListKind::Add => &self.add,
            ListKind::Del => &self.del,
        }
    }

    pub fn list_mut(&mut self, kind: ListKind) -> &mut Vec<Atom> {
        match kind {
            ListKind::Pre => &mut self.pre,
            ListKind::Add => &mut self.add,
            ListKind::Del => &mut self.del,
        }
    }

    pub fn atom_count(&self) -> usize {
        self.pre.len() + self.add.len() + self.del.len()
    }

    /// Renders a lifted atom with `?name` variables.
    pub fn display_atom(&self, atom: &Atom) -> String {
        let mut out = format!("({}", atom.predicate);
        for t in &atom.args {
            match t {
                Term::Var(i) => {
                    out.push_str(" ?");
                    out.push_str(self.params[*i].name.as_str());
                }
                Term::Const(c) => {
                    out.push(' ');
                    out.push_str(c.as_str());
                }
            }
        }
        out.push(')');
        out
    }
}

fn dedup(atoms: Vec<Atom>) -> Vec<Atom> {
    let mut seen = BTreeSet::new();
    atoms.into_iter().filter(|a| seen.insert(a.clone())).collect()
}

/// Single-inheritance type tree rooted at `object`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeHierarchy {
    parent: BTreeMap<Symbol, Symbol>,
}

impl TypeHierarchy {
    /// `decls` maps each declared type to its parent.
    pub fn new(decls: impl IntoIterator<Item = (Symbol, Symbol)>) -> Result<Self, ModelError> {
        let mut parent = BTreeMap::new();
        for (ty, sup) in decls {
            if ty != OBJECT_TYPE {
                parent.insert(ty, sup);
            }
        }
        let h = TypeHierarchy { parent };
        for (ty, sup) in &h.parent {
            if !h.contains(sup) {
                return Err(ModelError::UnknownType(sup.clone()));
            }
            let mut cur = sup;
            let mut steps = 0;
            while let Some(next) = h.parent.get(cur) {
                steps += 1;
                if next == ty || steps > h.parent.len() {
                    return Err(ModelError::CyclicType(ty.clone()));
                }
                cur = next;
            }
        }
        Ok(h)
    }

    pub fn contains(&self, ty: &Symbol) -> bool {
        ty == OBJECT_TYPE || self.parent.contains_key(ty)
    }

    /// Reflexive-transitive subtype test.
    pub fn is_subtype(&self, ty: &Symbol, of: &Symbol) -> bool {
        if of == OBJECT_TYPE || ty == of {
            return true;
        }
        let mut cur = ty;
        while let Some(p) = self.parent.get(cur) {
            if p == of {
                return true;
            }
            cur = p;
        }
        false
    }

    /// Declared types other than `object`, with their parents.
    pub fn declared(&self) -> impl Iterator<Item = (&Symbol, &Symbol)> + '_ {
        self.parent.iter()
    }

    pub fn is_flat(&self) -> bool {
        self.parent.is_empty()
    }
}

/// A (possibly incomplete) STRIPS domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainModel {
    pub name: Symbol,
    pub requirements: Vec<Symbol>,
    pub types: TypeHierarchy,
    pub constants: BTreeMap<Symbol, Symbol>,
    /// Predicate name to parameter types.
    pub predicates: BTreeMap<Symbol, Vec<Symbol>>,
    schemas: Vec<ActionSchema>,
    index: BTreeMap<Symbol, usize>,
    /// Fraction of the original atoms retained; 1.0 for hand-written models.
    pub completeness: f64,
}

impl DomainModel {
    pub fn new(
        name: impl Into<Symbol>,
        requirements: Vec<Symbol>,
        types: TypeHierarchy,
        constants: BTreeMap<Symbol, Symbol>,
        predicates: BTreeMap<Symbol, Vec<Symbol>>,
        schemas: Vec<ActionSchema>,
    ) -> Result<Self, ModelError> {
        for ty in constants.values().chain(predicates.values().flatten()) {
            if !types.contains(ty) {
                return Err(ModelError::UnknownType(ty.clone()));
            }
        }
        let mut index = BTreeMap::new();
        for (i, s) in schemas.iter().enumerate() {
            if index.insert(s.name.clone(), i).is_some() {
                return Err(ModelError::DuplicateSchema(s.name.clone()));
            }
            for p in &s.params {
                if !types.contains(&p.ty) {
                    return Err(ModelError::UnknownType(p.ty.clone()));
                }
            }
            for atom in s.pre.iter().chain(&s.add).chain(&s.del) {
                let decl = predicates
                    .get(&atom.predicate)
                    .ok_or_else(|| ModelError::UndeclaredPredicate(atom.predicate.clone()))?;
                if decl.len() != atom.args.len() {
                    return Err(ModelError::ArityMismatch {
                        name: atom.predicate.clone(),
                        expected: decl.len(),
                        found: atom.args.len(),
                    });
                }
                for t in &atom.args {
                    if let Term::Const(c) = t {
                        if !constants.contains_key(c) {
                            return Err(ModelError::UndeclaredObject(c.clone()));
                        }
                    }
                }
            }
        }
        Ok(DomainModel {
            name: name.into(),
            requirements,
            types,
            constants,
            predicates,
            schemas,
            index,
            completeness: 1.0,
        })
    }

    pub fn schemas(&self) -> &[ActionSchema] {
        &self.schemas
    }

    pub fn schema(&self, name: &Symbol) -> Result<&ActionSchema, ModelError> {
        self.index
            .get(name)
            .map(|&i| &self.schemas[i])
            .ok_or_else(|| ModelError::UnknownSchema(name.clone()))
    }

    /// Replaces schema atom lists; names, parameters and order must match.
    pub(crate) fn schemas_mut(&mut self) -> &mut [ActionSchema] {
        &mut self.schemas
    }

    /// Total number of lifted atom occurrences over all schemas and lists.
    pub fn atom_count(&self) -> usize {
        self.schemas.iter().map(ActionSchema::atom_count).sum()
    }

    /// Predicates never added or deleted by any schema.
    pub fn static_predicates(&self) -> BTreeSet<Symbol> {
        let fluent: BTreeSet<&Symbol> = self
            .schemas
            .iter()
            .flat_map(|s| s.add.iter().chain(&s.del))
            .map(|a| &a.predicate)
            .collect();
        self.predicates
            .keys()
            .filter(|p| !fluent.contains(p))
            .cloned()
            .collect()
    }
}

/// An action instance: schema name plus positional objects.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAction {
    pub name: Symbol,
    pub args: Vec<Symbol>,
}

impl GroundAction {
    pub fn new<P, I, A>(name: P, args: I) -> Self
    where
        P: Into<Symbol>,
        I: IntoIterator<Item = A>,
        A: Into<Symbol>,
    {
        GroundAction {
            name: name.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    pub fn try_rename(&self, mut f: impl FnMut(&Symbol) -> Option<Symbol>) -> Option<GroundAction> {
        let args = self.args.iter().map(&mut f).collect::<Option<Vec<_>>>()?;
        Some(GroundAction {
            name: self.name.clone(),
            args,
        })
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sexp(f, &self.name, &self.args)
    }
}

impl fmt::Debug for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A totally ordered action sequence.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plan {
    pub actions: Vec<GroundAction>,
}

impl Plan {
    pub fn new(actions: Vec<GroundAction>) -> Self {
        Plan { actions }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GroundAction> {
        self.actions.iter()
    }
}

impl From<Vec<GroundAction>> for Plan {
    fn from(actions: Vec<GroundAction>) -> Self {
        Plan { actions }
    }
}

impl fmt::Display for Plan {
    /// Space-separated actions on one line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.actions.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Plan[{self}]")
    }
}

/// Initial state and conjunctive goal over typed objects.
#[derive(Debug, Clone)]
pub struct PlanningProblem {
    pub name: Symbol,
    pub domain: Arc<DomainModel>,
    /// Object name to declared type (excluding domain constants).
    pub objects: BTreeMap<Symbol, Symbol>,
    pub init: State,
    pub goal: State,
}

impl PlanningProblem {
    pub fn new(
        name: impl Into<Symbol>,
        domain: Arc<DomainModel>,
        objects: BTreeMap<Symbol, Symbol>,
        init: State,
        goal: State,
    ) -> Result<Self, ModelError> {
        let p = PlanningProblem {
            name: name.into(),
            domain,
            objects,
            init,
            goal,
        };
        for ty in p.objects.values() {
            if !p.domain.types.contains(ty) {
                return Err(ModelError::UnknownType(ty.clone()));
            }
        }
        for atom in p.init.iter().chain(p.goal.iter()) {
            p.check_atom(atom)?;
        }
        Ok(p)
    }

    /// Same objects, init and goal under a different model.
    pub fn with_domain(&self, domain: Arc<DomainModel>) -> Self {
        PlanningProblem { domain, ..self.clone() }
    }

    /// Same objects and init with a replaced goal.
    pub fn with_goal(&self, goal: State) -> Self {
        PlanningProblem { goal, ..self.clone() }
    }

    pub fn object_type(&self, object: &Symbol) -> Option<&Symbol> {
        self.objects.get(object).or_else(|| self.domain.constants.get(object))
    }

    pub fn has_object(&self, object: &Symbol) -> bool {
        self.object_type(object).is_some()
    }

    /// Objects and domain constants, sorted, with their types.
    pub fn all_objects(&self) -> BTreeMap<Symbol, Symbol> {
        let mut all = self.domain.constants.clone();
        all.extend(self.objects.iter().map(|(o, t)| (o.clone(), t.clone())));
        all
    }

    pub fn check_atom(&self, atom: &GroundAtom) -> Result<(), ModelError> {
        let decl = self
            .domain
            .predicates
            .get(&atom.predicate)
            .ok_or_else(|| ModelError::UndeclaredPredicate(atom.predicate.clone()))?;
        if decl.len() != atom.args.len() {
            return Err(ModelError::ArityMismatch {
                name: atom.predicate.clone(),
                expected: decl.len(),
                found: atom.args.len(),
            });
        }
        for (arg, ty) in atom.args.iter().zip(decl) {
            let found = self
                .object_type(arg)
                .ok_or_else(|| ModelError::UndeclaredObject(arg.clone()))?;
            if !self.domain.types.is_subtype(found, ty) {
                return Err(ModelError::TypeMismatch {
                    object: arg.clone(),
                    expected: ty.clone(),
                    found: found.clone(),
                });
            }
        }
        Ok(())
    }
}
