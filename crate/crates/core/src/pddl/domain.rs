use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::sexpr::{parse_all, syntax, Sexp};
use super::{is_unsupported_head, unsupported, PddlError};
use crate::model::{ActionSchema, Atom, DomainModel, Parameter, Term, TypeHierarchy, OBJECT_TYPE};
use crate::symbol::Symbol;

const SUPPORTED_REQUIREMENTS: &[&str] = &[":strips", ":typing"];

/// Parses `name1 name2 - type name3 - type2 name4` into `(name, type)` pairs.
/// Names after the last `-` group default to `object`.
pub(crate) fn typed_list(items: &[Sexp]) -> Result<Vec<(String, Symbol, Sexp)>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Sexp)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        match item {
            Sexp::Symbol(s, pos) if s == "-" => {
                let ty = items.get(i + 1).ok_or_else(|| syntax(*pos, "missing type after `-`"))?;
                let ty = match ty {
                    Sexp::Symbol(t, _) => Symbol::new(t),
                    Sexp::List(..) => {
                        if ty.head().as_deref() == Some("either") {
                            return Err(unsupported("either"));
                        }
                        return Err(syntax(ty.pos(), "expected a type name"));
                    }
                };
                if pending.is_empty() {
                    return Err(syntax(*pos, "`-` without preceding names"));
                }
                out.extend(pending.drain(..).map(|(n, s)| (n, ty.clone(), s)));
                i += 2;
            }
            Sexp::Symbol(s, _) => {
                pending.push((s.clone(), item.clone()));
                i += 1;
            }
            Sexp::List(_, pos) => return Err(syntax(*pos, "expected a name")),
        }
    }
    out.extend(pending.into_iter().map(|(n, s)| (n, Symbol::new(OBJECT_TYPE), s)));
    Ok(out)
}

fn expect_list<'a>(e: &'a Sexp, what: &str) -> Result<&'a [Sexp], PddlError> {
    e.as_list().ok_or_else(|| syntax(e.pos(), format!("expected {what}")))
}

fn expect_symbol<'a>(e: &'a Sexp, what: &str) -> Result<&'a str, PddlError> {
    e.as_symbol().ok_or_else(|| syntax(e.pos(), format!("expected {what}")))
}

/// Splits `(define (KIND name) sections...)` and returns `(name, sections)`.
pub(crate) fn define_block<'a>(text_top: &'a [Sexp], kind: &str) -> Result<(Symbol, &'a [Sexp]), PddlError> {
    let root = match text_top {
        [root] => root,
        [] => return Err(syntax(super::sexpr::Pos { line: 1, col: 1 }, "empty input")),
        [_, extra, ..] => return Err(syntax(extra.pos(), "trailing input after `define`")),
    };
    let items = expect_list(root, "`(define ...)`")?;
    if root.head().as_deref() != Some("define") {
        return Err(syntax(root.pos(), "expected `define`"));
    }
    let header = items
        .get(1)
        .ok_or_else(|| syntax(root.pos(), format!("missing `({kind} name)`")))?;
    let h = expect_list(header, "a header list")?;
    match h {
        [k, n] if k.as_symbol().map(str::to_ascii_lowercase).as_deref() == Some(kind) => {
            Ok((Symbol::new(expect_symbol(n, "a name")?), &items[2..]))
        }
        _ => Err(syntax(header.pos(), format!("expected `({kind} name)`"))),
    }
}

pub(crate) fn check_requirements(items: &[Sexp]) -> Result<Vec<Symbol>, PddlError> {
    let mut reqs = Vec::new();
    for r in items {
        let name = expect_symbol(r, "a requirement")?.to_ascii_lowercase();
        if !SUPPORTED_REQUIREMENTS.contains(&name.as_str()) {
            return Err(unsupported(name));
        }
        reqs.push(Symbol::new(&name));
    }
    Ok(reqs)
}

struct Scope<'a> {
    params: &'a [Parameter],
    constants: &'a BTreeMap<Symbol, Symbol>,
}

impl Scope<'_> {
    fn term(&self, e: &Sexp) -> Result<Term, PddlError> {
        let s = expect_symbol(e, "a term")?;
        if let Some(var) = s.strip_prefix('?') {
            let var = Symbol::new(var);
            self.params
                .iter()
                .position(|p| p.name == var)
                .map(Term::Var)
                .ok_or_else(|| syntax(e.pos(), format!("undeclared variable `?{var}`")))
        } else {
            let c = Symbol::new(s);
            if self.constants.contains_key(&c) {
                Ok(Term::Const(c))
            } else {
                Err(syntax(e.pos(), format!("undeclared constant `{c}`")))
            }
        }
    }

    fn atom(&self, e: &Sexp) -> Result<Atom, PddlError> {
        let items = expect_list(e, "an atom")?;
        let (head, args) = items.split_first().ok_or_else(|| syntax(e.pos(), "empty atom"))?;
        let pred = expect_symbol(head, "a predicate name")?.to_ascii_lowercase();
        if is_unsupported_head(&pred) {
            return Err(unsupported(pred));
        }
        let args = args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
        Ok(Atom::new(pred.as_str(), args))
    }

    /// `(and a1 a2 ...)`, a single atom, or `()`.
    fn conjunction(&self, e: &Sexp) -> Result<Vec<Atom>, PddlError> {
        match e.head().as_deref() {
            None if e.as_list().is_some_and(|l| l.is_empty()) => Ok(Vec::new()),
            Some("and") => e.as_list().unwrap()[1..].iter().map(|a| self.atom(a)).collect(),
            _ => Ok(vec![self.atom(e)?]),
        }
    }

    fn effect_literal(&self, e: &Sexp, add: &mut Vec<Atom>, del: &mut Vec<Atom>) -> Result<(), PddlError> {
        if e.head().as_deref() == Some("not") {
            match e.as_list().unwrap() {
                [_, inner] => del.push(self.atom(inner)?),
                _ => return Err(syntax(e.pos(), "`not` takes one atom")),
            }
        } else {
            add.push(self.atom(e)?);
        }
        Ok(())
    }

    fn effect(&self, e: &Sexp) -> Result<(Vec<Atom>, Vec<Atom>), PddlError> {
        let mut add = Vec::new();
        let mut del = Vec::new();
        match e.head().as_deref() {
            None if e.as_list().is_some_and(|l| l.is_empty()) => {}
            Some("and") => {
                for lit in &e.as_list().unwrap()[1..] {
                    self.effect_literal(lit, &mut add, &mut del)?;
                }
            }
            _ => self.effect_literal(e, &mut add, &mut del)?,
        }
        Ok((add, del))
    }
}

fn parse_action(items: &[Sexp], whole: &Sexp, constants: &BTreeMap<Symbol, Symbol>) -> Result<ActionSchema, PddlError> {
    let name = items.get(1).ok_or_else(|| syntax(whole.pos(), "missing action name"))?;
    let name = Symbol::new(expect_symbol(name, "an action name")?);
    let mut params = Vec::new();
    let mut pre = None;
    let mut effect = None;
    let mut rest = items[2..].iter();
    while let Some(key) = rest.next() {
        let k = expect_symbol(key, "an action keyword")?.to_ascii_lowercase();
        let value = rest
            .next()
            .ok_or_else(|| syntax(key.pos(), format!("missing value for `{k}`")))?;
        match k.as_str() {
            ":parameters" => {
                for (n, ty, s) in typed_list(expect_list(value, "a parameter list")?)? {
                    let var = n
                        .strip_prefix('?')
                        .ok_or_else(|| syntax(s.pos(), "parameters must start with `?`"))?;
                    params.push(Parameter::new(var, ty));
                }
            }
            ":precondition" => pre = Some(value),
            ":effect" => effect = Some(value),
            other => return Err(unsupported(other)),
        }
    }
    let scope = Scope {
        params: &params,
        constants,
    };
    let pre = match pre {
        Some(p) => scope.conjunction(p)?,
        None => Vec::new(),
    };
    let (add, del) = match effect {
        Some(e) => scope.effect(e)?,
        None => (Vec::new(), Vec::new()),
    };
    Ok(ActionSchema::new(name, params, pre, add, del)?)
}

/// Parses a STRIPS (optionally typed) PDDL domain.
pub fn parse_domain(text: &str) -> Result<DomainModel, PddlError> {
    let top = parse_all(text)?;
    let (name, sections) = define_block(&top, "domain")?;
    let mut requirements = Vec::new();
    let mut type_decls = Vec::new();
    let mut constants = BTreeMap::new();
    let mut predicates = BTreeMap::new();
    let mut actions = Vec::new();
    for section in sections {
        let items = expect_list(section, "a domain section")?;
        let head = section
            .head()
            .ok_or_else(|| syntax(section.pos(), "expected a section keyword"))?;
        match head.as_str() {
            ":requirements" => requirements = check_requirements(&items[1..])?,
            ":types" => {
                for (n, parent, _) in typed_list(&items[1..])? {
                    type_decls.push((Symbol::new(&n), parent));
                }
            }
            ":constants" => {
                for (n, ty, _) in typed_list(&items[1..])? {
                    constants.insert(Symbol::new(&n), ty);
                }
            }
            ":predicates" => {
                for p in &items[1..] {
                    let pitems = expect_list(p, "a predicate declaration")?;
                    let (head, args) = pitems
                        .split_first()
                        .ok_or_else(|| syntax(p.pos(), "empty predicate declaration"))?;
                    let pname = Symbol::new(expect_symbol(head, "a predicate name")?);
                    let types = typed_list(args)?.into_iter().map(|(_, t, _)| t).collect();
                    predicates.insert(pname, types);
                }
            }
            ":action" => actions.push(section),
            other => return Err(unsupported(other)),
        }
    }
    // Types used before declaration are treated as direct subtypes of object.
    let mut declared: std::collections::BTreeSet<Symbol> = type_decls.iter().map(|(t, _)| t.clone()).collect();
    for (_, parent) in type_decls.clone() {
        if parent != OBJECT_TYPE && declared.insert(parent.clone()) {
            type_decls.push((parent, Symbol::new(OBJECT_TYPE)));
        }
    }
    let types = TypeHierarchy::new(type_decls)?;
    let schemas = actions
        .into_iter()
        .map(|a| parse_action(a.as_list().unwrap(), a, &constants))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DomainModel::new(
        name,
        requirements,
        types,
        constants,
        predicates,
        schemas,
    )?)
}

fn typed_names<'a>(out: &mut String, items: impl Iterator<Item = (String, &'a Symbol)>, flat: bool) {
    let mut first = true;
    for (n, t) in items {
        if !first {
            out.push(' ');
        }
        first = false;
        out.push_str(&n);
        if !flat {
            let _ = write!(out, " - {t}");
        }
    }
}

fn lifted(schema: &ActionSchema, atoms: &[crate::model::Atom], negate: bool, out: &mut Vec<String>) {
    for a in atoms {
        let s = schema.display_atom(a);
        out.push(if negate { format!("(not {s})") } else { s });
    }
}

fn conj(parts: &[String]) -> String {
    match parts {
        [] => "(and)".to_string(),
        _ => format!("(and {})", parts.join(" ")),
    }
}

/// Canonical PDDL text for a domain. Round-trips through [`parse_domain`].
pub fn write_domain(model: &DomainModel) -> String {
    let flat = model.types.is_flat();
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", model.name);
    if !model.requirements.is_empty() {
        let reqs: Vec<&str> = model.requirements.iter().map(Symbol::as_str).collect();
        let _ = writeln!(out, "  (:requirements {})", reqs.join(" "));
    }
    if !flat {
        out.push_str("  (:types ");
        typed_names(&mut out, model.types.declared().map(|(t, p)| (t.to_string(), p)), false);
        out.push_str(")\n");
    }
    if !model.constants.is_empty() {
        out.push_str("  (:constants ");
        typed_names(&mut out, model.constants.iter().map(|(c, t)| (c.to_string(), t)), flat);
        out.push_str(")\n");
    }
    out.push_str("  (:predicates");
    for (p, types) in &model.predicates {
        let _ = write!(out, "\n    ({p}");
        if !types.is_empty() {
            out.push(' ');
            typed_names(
                &mut out,
                types.iter().enumerate().map(|(i, t)| (format!("?a{}", i + 1), t)),
                flat,
            );
        }
        out.push(')');
    }
    out.push_str(")\n");
    for s in model.schemas() {
        let _ = writeln!(out, "  (:action {}", s.name);
        out.push_str("    :parameters (");
        typed_names(&mut out, s.params.iter().map(|p| (format!("?{}", p.name), &p.ty)), flat);
        out.push_str(")\n");
        let mut pre = Vec::new();
        lifted(s, &s.pre, false, &mut pre);
        let _ = writeln!(out, "    :precondition {}", conj(&pre));
        let mut eff = Vec::new();
        lifted(s, &s.add, false, &mut eff);
        lifted(s, &s.del, true, &mut eff);
        let _ = writeln!(out, "    :effect {})", conj(&eff));
    }
    out.push_str(")\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "(define (domain tiny)
      (:requirements :strips :typing)
      (:types truck - vehicle vehicle place)
      (:predicates (at ?v - vehicle ?p - place) (road ?a ?b - place))
      (:action drive
        :parameters (?v - truck ?from ?to - place)
        :precondition (and (at ?v ?from) (road ?from ?to))
        :effect (and (at ?v ?to) (not (at ?v ?from)))))";

    #[test]
    fn typed_domain() {
        let d = parse_domain(TINY).unwrap();
        assert_eq!(d.name, "tiny");
        assert!(d.types.is_subtype(&"truck".into(), &"vehicle".into()));
        let drive = d.schema(&"drive".into()).unwrap();
        assert_eq!(drive.params.len(), 3);
        assert_eq!(drive.params[1].ty, "place");
        assert_eq!(drive.pre.len(), 2);
        assert_eq!(drive.add.len(), 1);
        assert_eq!(drive.del.len(), 1);
        assert_eq!(d.predicates[&Symbol::new("road")].len(), 2);
    }

    #[test]
    fn write_then_parse_is_identity() {
        let d = parse_domain(TINY).unwrap();
        let again = parse_domain(&write_domain(&d)).unwrap();
        assert_eq!(d, again);
        assert_eq!(write_domain(&d), write_domain(&again));
    }

    #[test]
    fn empty_action_list() {
        let d = parse_domain("(define (domain nothing) (:requirements :strips) (:predicates (p)))").unwrap();
        assert!(d.schemas().is_empty());
    }

    #[test]
    fn adl_requirement_rejected() {
        let err = parse_domain("(define (domain d) (:requirements :strips :adl))").unwrap_err();
        assert!(
            matches!(err, PddlError::Unsupported { ref construct } if construct == ":adl"),
            "{err}"
        );
    }

    #[test]
    fn negative_precondition_rejected() {
        let text = "(define (domain d) (:predicates (p ?x))
          (:action a :parameters (?x) :precondition (not (p ?x)) :effect (p ?x)))";
        let err = parse_domain(text).unwrap_err();
        assert!(matches!(err, PddlError::Unsupported { ref construct } if construct == "not"));
    }

    #[test]
    fn conditional_effect_rejected() {
        let text = "(define (domain d) (:predicates (p ?x))
          (:action a :parameters (?x) :precondition (and) :effect (when (p ?x) (p ?x))))";
        let err = parse_domain(text).unwrap_err();
        assert!(matches!(err, PddlError::Unsupported { ref construct } if construct == "when"));
    }

    #[test]
    fn undeclared_variable_has_position() {
        let text =
            "(define (domain d) (:predicates (p ?x))\n(:action a :parameters (?x) :precondition (p ?y) :effect (and)))";
        match parse_domain(text).unwrap_err() {
            PddlError::Syntax { line, col, .. } => assert_eq!((line, col), (2, 46)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn undeclared_predicate_rejected() {
        let text = "(define (domain d) (:predicates (p ?x))
          (:action a :parameters (?x) :precondition (q ?x) :effect (and)))";
        assert!(matches!(parse_domain(text), Err(PddlError::Model(_))));
    }
}
