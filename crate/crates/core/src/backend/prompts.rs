//! Prompt templates for each request kind.

use super::{PromptContext, RequestKind};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("prompt is missing {0}")]
    MissingField(&'static str),
}

pub const ACTION_DOCS: &str = "\
drop(location: str, speed: float, obstacle_clearance: float) -> None: # Goes to 'location' and drops the grasped object over it. It is not advised to use the approach function directly before this one.

approach(object_to_grasp: str, speed: float, obstacle_clearance: float, grasp: str) -> None:  # Moves the robot close to 'object_to_grasp' so that the object is in robot's reach

place(location: str, orientation: float, speed: float, obstacle_clearance: float) -> None: # Positions the 'grasped_object' on/at/in the 'location' and release the grasp. It is not advised to use the approach function directly before this one.

pick(object_to_grasp: str, speed: float, obstacle_clearance: float, grasp: str) -> None: # Instructs the robot to pick up the 'object_to_grasp', if it is close enough

The 'speed' argument for 'approach', 'pick', 'drop', and 'place' functions, assumes a value in [0,1] and regulates how fast the robot moves. The closer the the value is to 1 the faster the robot moves. moving at a higher speed is faster but might result in a jerky and less precise motion.

The 'orientation' argument for the 'place' and 'drop' functions, regulates how crucial it is for the robot to maintain the original orientation of the object that the robot is holding. A value closer to 1, instructs the robot to strictly maintain the orientation, but may result in difficulty to avoid external perturbations or obstacles.

The 'grasp' argument for 'approach' and 'pick' assumes one of the two values ('top', 'side'), where 'top' instructs the robot to approach or pick the object from the top and select 'side' instructs the robot to approach or pick the object from the side.

The 'obstacle_clearance' for 'drop', 'approach', 'place', and 'pick' functions define how close the robot can get from an object (including the one it is trying to grasp in the pick action) before starting to avoid it. The distance is in meters. Small values allow the robot to get closer to obstacles and usually give a better chance of reaching the object, picking it up, and holding it. Typically values are between 0.005 and 0.05 although values out of this range are possible.";

pub const CHECK_DOCS: &str = "\
can_grasp(object_to_grasp: str, grasp: str) -> bool: # Returns True if the robot is close enough to the 'object_to_grasp' to securely grasp it with the determined grasp 'side' or 'top'

holding() -> bool # Returns True if the robot is holding an object

at_location(object: str, location: str) -> bool: # Returns True if the 'object' is at the 'location'

collision_free() -> str: # If the robot encounters a collision while executing the preceding action, returns the object label string. Otherwise, ''.

timeout() -> Bool: # Returns True if the preceding action was executed in a timely fashion

check_motion_health() -> bool: # Returns True if the robot's motion during the preceding action was safe for its hardware

can_reach(goal: str, grasp: str) -> bool: # Returns True if it is feasible for the robot to reach the 'goal' object or location from the current state from the side determined by the grasp argument 'side' or 'top'. Objects that are out of the workspace will always return false.

The grasp argument is the same as the one in the 'approach' and 'pick' functions. It assumes one of the two values {'top', 'side'}";

fn py_list(items: &[String]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| crate::plan::py_str_repr(s)).collect();
    format!("[{}]", quoted.join(", "))
}

fn task_plan_prompt(ctx: &PromptContext) -> String {
    format!(
        "{description}

The list of recognized objects is:

objects = {objects}

The list of recognized locations is:

locations = {locations}

There is a robot, labeled 'robot', that can only manipulate ONE object at a time. The robot accepts commands in the form of 'action functions' written in Python. These action functions, which can be imported from the 'action_functions' library are:

{ACTION_DOCS}

The actions described in these functions are the only motions known to the robot. The task for the robot is: \"{task}\". First, explain how you are going to solve the task, why each step is executed, and how it makes sense to a human that you do it this way. Then, using the actions functions, 'objects' and 'locations', define a task plan as a Python list of tuples (named 'task_plan'), for the robot to follow. The action_functions from the 'task_plan' will be directly run on the robot. Each element of the list is a tuple of the form (action number, action function name string, (arguments)). For each action, use object and task-specific arguments.

The first index of the plan should be 0. Take into account that some locations might be outside of the robot's reach and you might only be able to use 'drop' to put an object there. Do not make any assumptions. For the task plan, output a single code block. With each action include as the comment the reasoning behind the action and its parameters. Assume the necessary modules containing action functions have already been loaded. Write only a single assignment statement creating the full 'task_plan'. Do not abbreviate anything in the code you are writing. No matter how long it is, write it in full.",
        description = ctx.description.trim(),
        objects = py_list(&ctx.objects),
        locations = py_list(&ctx.locations),
        task = ctx.task,
    )
}

fn evaluation_plan_prompt() -> String {
    format!(
        "The robot may not be able to execute an action function or encounter object collision during execution. Thus, it is required to check for completion of each action function after they have been performed.

For this, we define some 'checking functions' written in Python. These checking functions, which can be imported from the 'checking_functions' library are:

{CHECK_DOCS}

Using the 'checking_functions', 'locations', and 'objects', define an evaluation plan (named 'evaluation_plan') to verify the successful execution of each action. Additionally, for each action verify without fail:
- collision-free
- timely motion
- motion health

Output this plan as a Python list of tuples, where each tuple is of the form (action number int, dictionary with 'check_function' names as keys and a tuple of arguments as value, tuple of expected outputs). Do not assume any other object or location, beyond those in 'object_labels'. Each tuple is meant to be checked after the action with the corresponding number. Generate the entire plan. No reasoning, direct output."
    )
}

fn retune_prompt(block: &str, index: usize) -> String {
    format!(
        "The robot failed during the task_plan's execution. The details are:

{block}

The score indicates the suitability of a combination. A higher score is better. First, explain how the changes you are making will improve the chances of success of the task.

Then alter the arguments of the failed action at index {index} in 'task_plan', to overcome the failure.

Do not use other actions. Make in-place change in 'task_plan'."
    )
}

fn replan_prompt(block: &str, prefix: Option<&str>) -> String {
    let keep = match prefix {
        Some(p) => format!(
            "\nThe following actions were already executed and must open the new plan unchanged:\n{p}\n"
        ),
        None => String::new(),
    };
    format!(
        "The robot failed during the task_plan's execution. The details are:
{block}
{keep}
Perform replanning by either using alternative action functions or altering the object interaction sequence.
Output the code as you did at first by assigning the full task plan to the variable 'task_plan' in a single statement.
Take into account the parameters I have asked you to change during our conversation if any.
In the new plan, make sure it is within plus or minus 5 actions of the original task plan."
    )
}

fn fix_syntax_prompt(diagnostics: &str, prior: &str) -> String {
    format!(
        "The code you wrote could not be used. The problems found are:

{diagnostics}

The code was:

```python
{prior}
```

Correct these problems and output the code again as a single code block containing a single assignment statement. Follow the previously specified planning instructions."
    )
}

/// Extra inputs a prompt kind may need beyond the scene context.
#[derive(Debug, Clone, Default)]
pub struct PromptInputs<'a> {
    /// Rendered feedback block (retune, replan).
    pub feedback: Option<&'a str>,
    /// Failed action index (retune).
    pub failure_index: Option<usize>,
    /// Executed prefix that a resumed replan must keep (replan).
    pub prefix: Option<&'a str>,
    /// Validator or parser findings (fix_syntax).
    pub diagnostics: Option<&'a str>,
    /// The code that produced them (fix_syntax).
    pub prior: Option<&'a str>,
}

/// Instantiates the template for `kind`.
pub fn render_prompt(kind: RequestKind, ctx: &PromptContext, inputs: &PromptInputs) -> Result<String, PromptError> {
    match kind {
        RequestKind::TaskPlan => {
            if ctx.objects.is_empty() {
                return Err(PromptError::MissingField("objects"));
            }
            if ctx.locations.is_empty() {
                return Err(PromptError::MissingField("locations"));
            }
            if ctx.task.trim().is_empty() {
                return Err(PromptError::MissingField("task"));
            }
            Ok(task_plan_prompt(ctx))
        }
        RequestKind::EvaluationPlan => Ok(evaluation_plan_prompt()),
        RequestKind::Retune => {
            let block = inputs.feedback.ok_or(PromptError::MissingField("feedback"))?;
            let index = inputs.failure_index.ok_or(PromptError::MissingField("failure index"))?;
            Ok(retune_prompt(block, index))
        }
        RequestKind::Replan => {
            let block = inputs.feedback.ok_or(PromptError::MissingField("feedback"))?;
            Ok(replan_prompt(block, inputs.prefix))
        }
        RequestKind::FixSyntax => {
            let d = inputs.diagnostics.ok_or(PromptError::MissingField("diagnostics"))?;
            let p = inputs.prior.ok_or(PromptError::MissingField("prior code"))?;
            Ok(fix_syntax_prompt(d, p))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PromptContext {
        PromptContext {
            description: "A table.".into(),
            objects: vec!["white table".into(), "half-eaten apple".into()],
            locations: vec!["storage shelf".into()],
            task: "put away the 'half-eaten apple'".into(),
        }
    }

    #[test]
    fn task_prompt_lists_labels_and_docs() {
        let p = render_prompt(RequestKind::TaskPlan, &ctx(), &PromptInputs::default()).unwrap();
        assert!(p.contains("objects = ['white table', 'half-eaten apple']"));
        assert!(p.contains("locations = ['storage shelf']"));
        assert!(p.contains(ACTION_DOCS));
        assert!(p.contains("The first index of the plan should be 0."));
        assert!(p.ends_with("No matter how long it is, write it in full."));
    }

    #[test]
    fn evaluation_prompt_has_mandatory_bullets() {
        let p = render_prompt(RequestKind::EvaluationPlan, &ctx(), &PromptInputs::default()).unwrap();
        assert!(p.contains("- collision-free\n- timely motion\n- motion health\n"));
        assert!(p.contains(CHECK_DOCS));
    }

    #[test]
    fn missing_inputs() {
        let mut c = ctx();
        c.objects.clear();
        assert_eq!(
            render_prompt(RequestKind::TaskPlan, &c, &PromptInputs::default()),
            Err(PromptError::MissingField("objects"))
        );
        assert_eq!(
            render_prompt(RequestKind::Retune, &ctx(), &PromptInputs::default()),
            Err(PromptError::MissingField("feedback"))
        );
    }

    #[test]
    fn retune_wraps_block() {
        let inputs = PromptInputs { feedback: Some("failure index: 2"), failure_index: Some(2), ..Default::default() };
        let p = render_prompt(RequestKind::Retune, &ctx(), &inputs).unwrap();
        assert!(p.starts_with("The robot failed during the task_plan's execution. The details are:\n\nfailure index: 2\n\n"));
        assert!(p.contains("failed action at index 2 in 'task_plan'"));
    }
}
