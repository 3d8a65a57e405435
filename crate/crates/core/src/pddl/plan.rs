use super::case::action;
use super::sexpr::{parse_all, syntax};
use super::PddlError;
use crate::model::Plan;

/// IPC-style plan text: one `(name arg...)` per line, `;` comments allowed.
pub fn read_plan(text: &str) -> Result<Plan, PddlError> {
    let items = parse_all(text)?;
    let mut actions = Vec::with_capacity(items.len());
    let mut last_line = 0;
    for item in &items {
        let pos = item.pos();
        if pos.line == last_line {
            return Err(syntax(pos, "more than one action on a line"));
        }
        last_line = pos.line;
        actions.push(action(item)?);
    }
    Ok(Plan::new(actions))
}

/// One action per line; the empty plan is the empty string.
pub fn write_plan(plan: &Plan) -> String {
    let mut out = String::new();
    for a in plan.iter() {
        out.push_str(&a.to_string());
        out.push('\n');
    }
    out
}
