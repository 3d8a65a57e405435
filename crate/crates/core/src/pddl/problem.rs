use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use super::domain::{check_requirements, define_block, typed_list};
use super::sexpr::{parse_all, syntax, Sexp};
use super::{is_unsupported_head, unsupported, PddlError};
use crate::model::{DomainModel, GroundAtom, PlanningProblem, State};
use crate::symbol::Symbol;

/// A ground atom `(pred obj...)`; variables and nested lists are rejected.
pub(crate) fn ground_atom(e: &Sexp) -> Result<GroundAtom, PddlError> {
    let items = e.as_list().ok_or_else(|| syntax(e.pos(), "expected an atom"))?;
    let (head, args) = items.split_first().ok_or_else(|| syntax(e.pos(), "empty atom"))?;
    let pred = head
        .as_symbol()
        .ok_or_else(|| syntax(head.pos(), "expected a predicate name"))?
        .to_ascii_lowercase();
    if is_unsupported_head(&pred) {
        return Err(unsupported(pred));
    }
    let mut out = Vec::with_capacity(args.len());
    for a in args {
        match a.as_symbol() {
            Some(s) if !s.starts_with('?') => out.push(Symbol::new(s)),
            _ => return Err(syntax(a.pos(), "expected an object name")),
        }
    }
    Ok(GroundAtom::new(pred.as_str(), out))
}

fn ground_conjunction(e: &Sexp) -> Result<Vec<GroundAtom>, PddlError> {
    match e.head().as_deref() {
        None if e.as_list().is_some_and(|l| l.is_empty()) => Ok(Vec::new()),
        Some("and") => e.as_list().unwrap()[1..].iter().map(ground_atom).collect(),
        _ => Ok(vec![ground_atom(e)?]),
    }
}

/// Parses a problem against an already-parsed domain.
pub fn parse_problem(text: &str, domain: Arc<DomainModel>) -> Result<PlanningProblem, PddlError> {
    let top = parse_all(text)?;
    let (name, sections) = define_block(&top, "problem")?;
    let mut objects = BTreeMap::new();
    let mut init = State::new();
    let mut goal = State::new();
    let mut saw_goal = false;
    for section in sections {
        let items = section
            .as_list()
            .ok_or_else(|| syntax(section.pos(), "expected a problem section"))?;
        let head = section
            .head()
            .ok_or_else(|| syntax(section.pos(), "expected a section keyword"))?;
        match head.as_str() {
            ":domain" => {}
            ":requirements" => {
                check_requirements(&items[1..])?;
            }
            ":objects" => {
                for (n, ty, _) in typed_list(&items[1..])? {
                    objects.insert(Symbol::new(&n), ty);
                }
            }
            ":init" => {
                for a in &items[1..] {
                    init.insert(ground_atom(a)?);
                }
            }
            ":goal" => {
                let body = match &items[1..] {
                    [g] => g,
                    _ => return Err(syntax(section.pos(), "`:goal` takes one formula")),
                };
                goal = ground_conjunction(body)?.into_iter().collect();
                saw_goal = true;
            }
            other => return Err(unsupported(other)),
        }
    }
    if !saw_goal {
        return Err(syntax(top[0].pos(), "missing `:goal`"));
    }
    Ok(PlanningProblem::new(name, domain, objects, init, goal)?)
}

fn atoms_block(out: &mut String, keyword: &str, atoms: &State, wrap_and: bool) {
    let _ = write!(out, "  ({keyword}");
    if wrap_and {
        out.push_str(" (and");
    }
    for a in atoms {
        let _ = write!(out, "\n    {a}");
    }
    if wrap_and {
        out.push(')');
    }
    out.push_str(")\n");
}

/// Canonical PDDL text for a problem. Round-trips through [`parse_problem`].
pub fn write_problem(problem: &PlanningProblem) -> String {
    let flat = problem.domain.types.is_flat();
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", problem.name);
    let _ = writeln!(out, "  (:domain {})", problem.domain.name);
    out.push_str("  (:objects");
    for (o, t) in &problem.objects {
        if flat {
            let _ = write!(out, " {o}");
        } else {
            let _ = write!(out, " {o} - {t}");
        }
    }
    out.push_str(")\n");
    atoms_block(&mut out, ":init", &problem.init, false);
    atoms_block(&mut out, ":goal", &problem.goal, true);
    out.push_str(")\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelError;
    use crate::pddl::parse_domain;

    fn domain() -> Arc<DomainModel> {
        Arc::new(
            parse_domain(
                "(define (domain d) (:requirements :strips)
                 (:predicates (on ?x ?y) (clear ?x)))",
            )
            .unwrap(),
        )
    }

    #[test]
    fn empty_goal_is_valid() {
        let p = parse_problem(
            "(define (problem p) (:domain d) (:objects a b) (:init (clear a)) (:goal (and)))",
            domain(),
        )
        .unwrap();
        assert!(p.goal.is_empty());
        assert_eq!(p.init.len(), 1);
    }

    #[test]
    fn single_atom_goal() {
        let p = parse_problem(
            "(define (problem p) (:domain d) (:objects a b) (:init) (:goal (on a b)))",
            domain(),
        )
        .unwrap();
        assert_eq!(p.goal.len(), 1);
    }

    #[test]
    fn wrong_arity_rejected() {
        let err = parse_problem(
            "(define (problem p) (:domain d) (:objects a b) (:init (on a)) (:goal (and)))",
            domain(),
        )
        .unwrap_err();
        assert!(matches!(err, PddlError::Model(ModelError::ArityMismatch { .. })));
    }

    #[test]
    fn undeclared_object_rejected() {
        let err = parse_problem(
            "(define (problem p) (:domain d) (:objects a) (:init (clear z)) (:goal (and)))",
            domain(),
        )
        .unwrap_err();
        assert!(matches!(err, PddlError::Model(ModelError::UndeclaredObject(_))));
    }

    #[test]
    fn undeclared_predicate_rejected() {
        let err = parse_problem(
            "(define (problem p) (:domain d) (:objects a) (:init (heavy a)) (:goal (and)))",
            domain(),
        )
        .unwrap_err();
        assert!(matches!(err, PddlError::Model(ModelError::UndeclaredPredicate(_))));
    }

    #[test]
    fn negated_goal_rejected() {
        let err = parse_problem(
            "(define (problem p) (:domain d) (:objects a) (:init) (:goal (not (clear a))))",
            domain(),
        )
        .unwrap_err();
        assert!(matches!(err, PddlError::Unsupported { .. }));
    }
}
