use std::fmt::Write;

use crate::template::{ActionKind, MdpTemplate, Origin};

/// Bumped whenever the prompt wording changes, so generated samples can be
/// traced to the exact instructions that produced them.
pub const PROMPT_VERSION: &str = "procforge-transition-prompt/1";

/// Render the generation prompt for one template.
pub fn build_prompt(tpl: &MdpTemplate, n: usize) -> String {
    let mut p = String::new();
    let _ = writeln!(p, "[prompt-version: {PROMPT_VERSION}]");
    let _ = writeln!(
        p,
        "You are describing how objects behave in a virtual chemistry laboratory. \
         Generate {n} state transitions for the object `{}`.",
        tpl.focal_object
    );
    p.push_str("\nState variables (use exactly these identifiers and values):\n");
    for v in &tpl.variables {
        let origin = match v.origin {
            Origin::Own => "own",
            Origin::Contextual => "context",
        };
        let _ = writeln!(p, "- {} ({origin}): {}", v.id, v.domain.join(" | "));
    }
    p.push_str("\nActions:\n");
    for a in &tpl.actions {
        let kind = match a.kind {
            ActionKind::Control => "control",
            ActionKind::Interaction => "interaction",
        };
        if a.params.is_empty() {
            let _ = writeln!(p, "- {} ({kind})", a.id);
        } else {
            let params: Vec<String> = a
                .params
                .iter()
                .map(|pd| format!("{}: {}", pd.name, pd.domain.join(" | ")))
                .collect();
            let _ = writeln!(p, "- {} ({kind}) with parameters {}", a.id, params.join(", "));
        }
    }
    p.push_str(
        "\nOutput format: one JSON object per line, no other text. Keys:\n\
         - \"state\": object assigning every state variable above\n\
         - \"action\": one action identifier from the list\n\
         - \"params\": object binding every parameter of that action ({} if none)\n\
         - \"next_state\": object assigning every state variable after the action\n\
         - \"reward\": 1 or 0\n",
    );
    p.push_str(
        "\nReward rubric: 1 means the transition is plausible, i.e. the action can be \
         performed in the state and leads to next_state. 0 means the action cannot \
         succeed in that state; in that case next_state should equal state.\n",
    );
    p.push_str(
        "\nInclude both plausible and implausible transitions, covering varied \
         states, so that failing cases are well represented.\n",
    );
    let sample_state: Vec<String> = tpl
        .variables
        .iter()
        .map(|v| format!("\"{}\":\"{}\"", v.id, v.domain[0]))
        .collect();
    if let Some(action) = tpl.concrete_actions().first() {
        let params: Vec<String> = action
            .params
            .iter()
            .map(|(k, v)| format!("\"{k}\":\"{v}\""))
            .collect();
        let state = format!("{{{}}}", sample_state.join(","));
        let _ = writeln!(
            p,
            "\nExample line (format only):\n{{\"state\":{state},\"action\":\"{}\",\"params\":{{{}}},\"next_state\":{state},\"reward\":0}}",
            action.id,
            params.join(",")
        );
    }
    p
}
