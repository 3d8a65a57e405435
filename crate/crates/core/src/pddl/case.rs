//! Case files: one plan example per file, three s-expression sections.
//!
//! ```text
//! (:init
//!   (clear b1)
//!   (handempty))
//! (:goal
//!   (on b1 b2))
//! (:plan
//!   (pickup b1)
//!   (stack b1 b2))
//! ```
//!
//! A library is a directory of `*.case` files; the file stem is the case id.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::problem::ground_atom;
use super::sexpr::{parse_all, Sexp};
use super::PddlError;
use crate::model::{GroundAction, Plan, State};
use crate::symbol::Symbol;

pub const CASE_EXTENSION: &str = "case";

/// A plan example known to reach `goal` from `init` under the complete model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseFile {
    pub id: String,
    pub init: State,
    pub goal: State,
    pub plan: Plan,
}

fn malformed(msg: impl Into<String>) -> PddlError {
    PddlError::MalformedCase(msg.into())
}

pub(crate) fn action(e: &Sexp) -> Result<GroundAction, PddlError> {
    let atom = ground_atom(e)?;
    Ok(GroundAction {
        name: atom.predicate,
        args: atom.args,
    })
}

/// Parses case text. Action names are not checked against any domain here.
pub fn read_case(id: &str, text: &str) -> Result<CaseFile, PddlError> {
    let mut init = None;
    let mut goal = None;
    let mut plan = None;
    for section in parse_all(text)? {
        let head = section
            .head()
            .ok_or_else(|| malformed(format!("{}: expected a section", section.pos())))?;
        let body = &section.as_list().unwrap()[1..];
        let slot_taken = match head.as_str() {
            ":init" => init
                .replace(body.iter().map(ground_atom).collect::<Result<State, _>>()?)
                .is_some(),
            ":goal" => goal
                .replace(body.iter().map(ground_atom).collect::<Result<State, _>>()?)
                .is_some(),
            ":plan" => plan
                .replace(Plan::new(body.iter().map(action).collect::<Result<_, _>>()?))
                .is_some(),
            other => return Err(malformed(format!("unknown section `{other}`"))),
        };
        if slot_taken {
            return Err(malformed(format!("duplicate section `{head}`")));
        }
    }
    let plan = plan.ok_or_else(|| malformed("missing `:plan`"))?;
    if plan.is_empty() {
        return Err(malformed("empty plan"));
    }
    Ok(CaseFile {
        id: id.to_string(),
        init: init.ok_or_else(|| malformed("missing `:init`"))?,
        goal: goal.ok_or_else(|| malformed("missing `:goal`"))?,
        plan,
    })
}

/// Normalized text: lower-case symbols, atoms sorted, one item per line.
pub fn write_case(case: &CaseFile) -> String {
    let mut out = String::new();
    for (key, items) in [
        (":init", case.init.iter().map(|a| a.to_string()).collect::<Vec<_>>()),
        (":goal", case.goal.iter().map(|a| a.to_string()).collect()),
        (":plan", case.plan.iter().map(|a| a.to_string()).collect()),
    ] {
        let _ = write!(out, "({key}");
        for i in items {
            let _ = write!(out, "\n  {i}");
        }
        out.push_str(")\n");
    }
    out
}

/// Reads every `*.case` file in `dir`, sorted by file name.
pub fn read_library(dir: &Path) -> Result<Vec<CaseFile>, PddlError> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| PddlError::io(dir, e))? {
        let path = entry.map_err(|e| PddlError::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some(CASE_EXTENSION) {
            paths.push(path);
        }
    }
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| PddlError::io(p, e))?;
            let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            read_case(id, &text).map_err(|e| match e {
                PddlError::MalformedCase(m) => malformed(format!("{}: {m}", p.display())),
                other => other,
            })
        })
        .collect()
}

/// Writes each case to `dir/<id>.case`, creating `dir` if needed.
pub fn write_library(dir: &Path, cases: &[CaseFile]) -> Result<(), PddlError> {
    fs::create_dir_all(dir).map_err(|e| PddlError::io(dir, e))?;
    for c in cases {
        let path = dir.join(format!("{}.{CASE_EXTENSION}", c.id));
        fs::write(&path, write_case(c)).map_err(|e| PddlError::io(&path, e))?;
    }
    Ok(())
}

impl CaseFile {
    /// Objects mentioned anywhere in the case, sorted.
    pub fn objects(&self) -> std::collections::BTreeSet<Symbol> {
        let mut objs = self.init.objects();
        objs.extend(self.goal.objects());
        objs.extend(self.plan.iter().flat_map(|a| a.args.iter().cloned()));
        objs
    }
}
