//! Byzantine-tolerant algorithm.
//!
//! Each node holds `s ∈ {⊥, ⊤}` and a degree estimate `x`:
//!
//! * **Refresh**: `x_u ≠ deg(u)` → `x_u := deg(u)`
//! * **Candidacy?**: `x_u = deg(u)`, `s_u = ⊥` and every neighbour `⊥` →
//!   with probability `1 / (1 + max{x_v : v ∈ N[u]})`, `s_u := ⊤`
//! * **Withdrawal**: `x_u = deg(u)`, `s_u = ⊤` and some neighbour `⊤` →
//!   `s_u := ⊥`

use crate::graph::{Graph, NodeId};
use crate::state::{Configuration, Rule};

pub fn refresh_guard(g: &Graph, cfg: &Configuration, u: NodeId) -> bool {
    cfg.x(u) != g.degree(u) as u64
}

pub fn candidacyq_guard(g: &Graph, cfg: &Configuration, u: NodeId) -> bool {
    !refresh_guard(g, cfg, u) && !cfg.top(u) && g.neighbors(u).iter().all(|&v| !cfg.top(v))
}

pub fn withdrawal_guard(g: &Graph, cfg: &Configuration, u: NodeId) -> bool {
    !refresh_guard(g, cfg, u) && cfg.top(u) && g.neighbors(u).iter().any(|&v| cfg.top(v))
}

pub fn enabled_rule(g: &Graph, cfg: &Configuration, u: NodeId) -> Option<Rule> {
    if refresh_guard(g, cfg, u) {
        Some(Rule::Refresh)
    } else if candidacyq_guard(g, cfg, u) {
        Some(Rule::CandidacyQ)
    } else if withdrawal_guard(g, cfg, u) {
        Some(Rule::Withdrawal)
    } else {
        None
    }
}

/// `1 / (1 + max{x_v : v ∈ N[u]})`, read from the current x-values including
/// `u`'s own and those of any Byzantine neighbour.
pub fn candidacy_probability(g: &Graph, cfg: &Configuration, u: NodeId) -> f64 {
    let max = g
        .neighbors(u)
        .iter()
        .map(|&v| cfg.x(v))
        .fold(cfg.x(u), u64::max);
    1.0 / (1.0 + max as f64)
}

/// Writes the effect of `rule` on `u` into `after`. `draw` is the coin for
/// Candidacy?; it is ignored by the deterministic rules.
pub fn execute(rule: Rule, g: &Graph, after: &mut Configuration, u: NodeId, draw: bool) {
    match rule {
        Rule::Refresh => {
            if let Some(x) = after.x.as_mut() {
                x[u] = g.degree(u) as u64;
            }
        }
        Rule::CandidacyQ => {
            if draw {
                after.s[u] = true;
            }
        }
        Rule::Withdrawal => after.s[u] = false,
        other => unreachable!("rule {other} does not belong to the byzantine algorithm"),
    }
}

/// `(1 - 1/(k+1))^k`, the chance that none of `k` neighbours wins a
/// `1/(k+1)` coin. Stays above `1/e` for every `k`.
pub fn no_competitor_probability(k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let k = k as f64;
    (k * (-1.0 / (k + 1.0)).ln_1p()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphKind};
    use proptest::prelude::*;

    fn star3() -> Graph {
        generate_graph(GraphKind::Star { leaves: 3 }, 0).unwrap()
    }

    #[test]
    fn refresh_on_wrong_degree() {
        let g = star3();
        let mut cfg = Configuration::byzantine(vec![false; 4], vec![0, 1, 1, 1]);
        assert!(refresh_guard(&g, &cfg, 0));
        assert_eq!(enabled_rule(&g, &cfg, 0), Some(Rule::Refresh));
        execute(Rule::Refresh, &g, &mut cfg, 0, false);
        assert_eq!(cfg.x(0), 3);
        assert!(!refresh_guard(&g, &cfg, 0));
    }

    #[test]
    fn isolated_node() {
        let g = Graph::from_edges(1, []).unwrap();
        let cfg = Configuration::byzantine(vec![false], vec![0]);
        assert!(!refresh_guard(&g, &cfg, 0));
        assert_eq!(candidacy_probability(&g, &cfg, 0), 1.0);
        assert_eq!(enabled_rule(&g, &cfg, 0), Some(Rule::CandidacyQ));
    }

    #[test]
    fn probability_uses_max_over_closed_neighbourhood() {
        // path 0-1-2 with x = {3,2,3} over N[1]
        let g = generate_graph(GraphKind::Path { n: 3 }, 0).unwrap();
        let cfg = Configuration::byzantine(vec![false; 3], vec![3, 2, 3]);
        assert_eq!(candidacy_probability(&g, &cfg, 1), 0.25);
        let liar = Configuration::byzantine(vec![false; 3], vec![1_000_000, 2, 1]);
        assert_eq!(candidacy_probability(&g, &liar, 1), 1.0 / (1.0 + 1e6));
    }

    #[test]
    fn candidacy_guard_cases() {
        let g = star3();
        let ok = Configuration::byzantine(vec![false; 4], vec![3, 1, 1, 1]);
        assert!(candidacyq_guard(&g, &ok, 0));
        let mut one_top = ok.clone();
        one_top.s[2] = true;
        assert!(!candidacyq_guard(&g, &one_top, 0));
        let wrong_x = Configuration::byzantine(vec![false; 4], vec![2, 1, 1, 1]);
        assert!(!candidacyq_guard(&g, &wrong_x, 0));
    }

    #[test]
    fn withdrawal_guard_cases() {
        let g = generate_graph(GraphKind::Path { n: 2 }, 0).unwrap();
        let both = Configuration::byzantine(vec![true, true], vec![1, 1]);
        assert!(withdrawal_guard(&g, &both, 0) && withdrawal_guard(&g, &both, 1));
        let alone = Configuration::byzantine(vec![true, false], vec![1, 1]);
        assert!(!withdrawal_guard(&g, &alone, 0));
        let wrong_x = Configuration::byzantine(vec![true, true], vec![5, 1]);
        assert!(!withdrawal_guard(&g, &wrong_x, 0));
        assert_eq!(enabled_rule(&g, &wrong_x, 0), Some(Rule::Refresh));
    }

    #[test]
    fn exponential_bound_small_values() {
        assert_eq!(no_competitor_probability(0), 1.0);
        assert!((no_competitor_probability(1) - 0.5).abs() < 1e-15);
        assert!((no_competitor_probability(2) - 4.0 / 9.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn guards_are_exclusive(
            s in proptest::collection::vec(any::<bool>(), 5),
            x in proptest::collection::vec(0u64..4, 5),
        ) {
            let g = generate_graph(GraphKind::Ring { n: 5 }, 0).unwrap();
            let cfg = Configuration::byzantine(s, x);
            for u in g.nodes() {
                let held = [
                    refresh_guard(&g, &cfg, u),
                    candidacyq_guard(&g, &cfg, u),
                    withdrawal_guard(&g, &cfg, u),
                ];
                prop_assert!(held.iter().filter(|&&b| b).count() <= 1);
            }
        }

        #[test]
        fn probability_in_unit_interval(x in proptest::collection::vec(0u64..=u32::MAX as u64, 4)) {
            let g = star3();
            let cfg = Configuration::byzantine(vec![false; 4], x);
            for u in g.nodes() {
                let p = candidacy_probability(&g, &cfg, u);
                prop_assert!(p > 0.0 && p <= 1.0);
            }
        }
    }
}
