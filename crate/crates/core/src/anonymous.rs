//! Anonymous algorithm for the adversarial daemon.
//!
//! * **Candidacy**: `s_u = ⊥` and every neighbour `⊥` → `s_u := ⊤`
//! * **Withdrawal?**: `s_u = ⊤` and some neighbour `⊤` → with probability
//!   1/2, `s_u := ⊥`

use crate::graph::{Graph, NodeId};
use crate::state::{Configuration, Rule};

pub const WITHDRAWAL_PROBABILITY: f64 = 0.5;

pub fn candidacy_guard(g: &Graph, cfg: &Configuration, u: NodeId) -> bool {
    !cfg.top(u) && g.neighbors(u).iter().all(|&v| !cfg.top(v))
}

pub fn withdrawalq_guard(g: &Graph, cfg: &Configuration, u: NodeId) -> bool {
    cfg.top(u) && g.neighbors(u).iter().any(|&v| cfg.top(v))
}

pub fn enabled_rule(g: &Graph, cfg: &Configuration, u: NodeId) -> Option<Rule> {
    if candidacy_guard(g, cfg, u) {
        Some(Rule::Candidacy)
    } else if withdrawalq_guard(g, cfg, u) {
        Some(Rule::WithdrawalQ)
    } else {
        None
    }
}

/// `draw` is the coin of Withdrawal?; Candidacy ignores it.
pub fn execute(rule: Rule, after: &mut Configuration, u: NodeId, draw: bool) {
    match rule {
        Rule::Candidacy => after.s[u] = true,
        Rule::WithdrawalQ => {
            if draw {
                after.s[u] = false;
            }
        }
        other => unreachable!("rule {other} does not belong to the anonymous algorithm"),
    }
}
