use super::literal::{parse_assignment, Assignment, Node, NodeKind, Pos};
use super::{
    Action, ActionArgs, ActionName, CheckCall, CheckName, EvalEntry, EvaluationPlan, Grasp, GraspArgs, Num, PlanError,
    RetunePatch, TaskPlan,
};

fn format_err(pos: Pos, message: impl Into<String>) -> PlanError {
    PlanError::Format { line: pos.line, column: pos.column, message: message.into() }
}

fn expect_list(text: &str, want: &str) -> Result<Vec<Node>, PlanError> {
    match parse_assignment(text)? {
        Assignment::List { target, target_pos, items } => {
            if target != want {
                return Err(format_err(target_pos, format!("expected an assignment to `{want}`, found `{target}`")));
            }
            Ok(items)
        }
        Assignment::Indexed { target_pos, .. } => Err(format_err(
            target_pos,
            format!("expected a full `{want} = [...]` assignment, found an indexed assignment"),
        )),
    }
}

fn as_tuple<'a>(node: &'a Node, what: &str) -> Result<&'a [Node], PlanError> {
    match &node.kind {
        NodeKind::Tuple(items) => Ok(items),
        _ => Err(format_err(node.pos, format!("{what} must be a tuple, found {}", node.type_name()))),
    }
}

fn as_str<'a>(node: &'a Node, what: &str) -> Result<&'a str, PlanError> {
    match &node.kind {
        NodeKind::Str(s) => Ok(s),
        _ => Err(format_err(node.pos, format!("{what} must be a string, found {}", node.type_name()))),
    }
}

fn as_num(node: &Node, what: &str) -> Result<Num, PlanError> {
    match node.kind {
        NodeKind::Int(v) => Ok(Num::Int(v)),
        NodeKind::Float(v) => Ok(Num::Float(v)),
        _ => Err(format_err(node.pos, format!("{what} must be a number, found {}", node.type_name()))),
    }
}

fn as_index(node: &Node, what: &str) -> Result<i64, PlanError> {
    match node.kind {
        NodeKind::Int(v) => Ok(v),
        _ => Err(format_err(node.pos, format!("{what} must be an integer, found {}", node.type_name()))),
    }
}

fn action_from_node(node: &Node) -> Result<Action, PlanError> {
    let parts = as_tuple(node, "a task_plan item")?;
    let [idx, name, args] = parts else {
        return Err(format_err(
            node.pos,
            format!("a task_plan item must be (index, 'action', (args)), found a {}-tuple", parts.len()),
        ));
    };
    let index = as_index(idx, "the action index")?;
    if index < 0 {
        return Err(format_err(idx.pos, format!("action index {index} is negative")));
    }
    let name_str = as_str(name, "the action name")?;
    let action = ActionName::from_name(name_str).ok_or_else(|| {
        format_err(name.pos, format!("unknown action `{name_str}` (expected drop, place, pick or approach)"))
    })?;
    let args_nodes = as_tuple(args, "the argument list")?;
    let names = action.arg_names();
    if args_nodes.len() != names.len() {
        return Err(format_err(
            args.pos,
            format!(
                "{action} takes {} arguments ({}), found {}",
                names.len(),
                names.join(", "),
                args_nodes.len()
            ),
        ));
    }
    let grasp_args = |a: &[Node]| -> Result<GraspArgs, PlanError> {
        let g = as_str(&a[3], "grasp")?;
        let grasp = Grasp::from_name(g)
            .ok_or_else(|| format_err(a[3].pos, format!("grasp must be 'top' or 'side', found '{g}'")))?;
        Ok(GraspArgs {
            target: as_str(&a[0], "target")?.to_string(),
            speed: as_num(&a[1], "speed")?,
            obstacle_clearance: as_num(&a[2], "obstacle_clearance")?,
            grasp,
        })
    };
    let a = args_nodes;
    let args = match action {
        ActionName::Drop => ActionArgs::Drop {
            location: as_str(&a[0], "location")?.to_string(),
            speed: as_num(&a[1], "speed")?,
            obstacle_clearance: as_num(&a[2], "obstacle_clearance")?,
        },
        ActionName::Place => ActionArgs::Place {
            location: as_str(&a[0], "location")?.to_string(),
            orientation: as_num(&a[1], "orientation")?,
            speed: as_num(&a[2], "speed")?,
            obstacle_clearance: as_num(&a[3], "obstacle_clearance")?,
        },
        ActionName::Pick => ActionArgs::Pick(grasp_args(a)?),
        ActionName::Approach => ActionArgs::Approach(grasp_args(a)?),
    };
    Ok(Action { index: index as usize, args })
}

/// Parses `task_plan = [ (index, 'name', (args)), ... ]`.
pub fn parse_task_plan(text: &str) -> Result<TaskPlan, PlanError> {
    let items = expect_list(text, "task_plan")?;
    let actions = items.iter().map(action_from_node).collect::<Result<Vec<_>, _>>()?;
    Ok(TaskPlan { actions })
}

fn entry_from_node(node: &Node) -> Result<EvalEntry, PlanError> {
    let parts = as_tuple(node, "an evaluation_plan item")?;
    let [idx, checks, expected] = parts else {
        return Err(format_err(
            node.pos,
            format!("an evaluation_plan item must be (index, {{checks}}, (expected)), found a {}-tuple", parts.len()),
        ));
    };
    let action_index = as_index(idx, "the action index")?;
    let NodeKind::Dict(map) = &checks.kind else {
        return Err(format_err(checks.pos, format!("the checks must be a dict, found {}", checks.type_name())));
    };
    let mut calls: Vec<CheckCall> = Vec::with_capacity(map.len());
    for (key, kpos, args) in map {
        let name = CheckName::from_name(key).ok_or_else(|| format_err(*kpos, format!("unknown check `{key}`")))?;
        if calls.iter().any(|c| c.name == name) {
            return Err(format_err(*kpos, format!("check `{key}` appears twice in one entry")));
        }
        let args = as_tuple(args, "check arguments")?.iter().map(Node::to_literal).collect();
        calls.push(CheckCall { name, args });
    }
    let expected = as_tuple(expected, "the expected outputs")?.iter().map(Node::to_literal).collect();
    Ok(EvalEntry { action_index, checks: calls, expected })
}

/// Parses `evaluation_plan = [ (index, {'check': (args), ...}, (expected)), ... ]`.
pub fn parse_evaluation_plan(text: &str) -> Result<EvaluationPlan, PlanError> {
    let items = expect_list(text, "evaluation_plan")?;
    let entries = items.iter().map(entry_from_node).collect::<Result<Vec<_>, _>>()?;
    Ok(EvaluationPlan { entries })
}

/// Parses `task_plan[k] = (k, 'name', (args))`.
pub fn parse_retune_patch(text: &str) -> Result<RetunePatch, PlanError> {
    match parse_assignment(text)? {
        Assignment::Indexed { index, index_pos, value, .. } => {
            if index < 0 {
                return Err(format_err(index_pos, format!("patch index {index} is negative")));
            }
            let action = action_from_node(&value)?;
            if action.index as i64 != index {
                return Err(PlanError::IndexMismatch { bracket: index, tuple: action.index as i64 });
            }
            Ok(RetunePatch { action_index: index as usize, replacement: action })
        }
        Assignment::List { target_pos, target, .. } => Err(format_err(
            target_pos,
            format!("expected an indexed assignment `task_plan[<k>] = (...)`, found `{target} = [...]`"),
        )),
    }
}
