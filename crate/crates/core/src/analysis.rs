//! Set predicates over configurations: the locally-alone set `I`, the built
//! set `β`, legitimacy, candidate sets and a brute-force MIS oracle.

use crate::error::{Error, Result};
use crate::graph::{v_level_mask, ByzantineSet, Graph, NodeId};
use crate::state::Configuration;

/// Largest graph the exhaustive MIS enumeration accepts.
pub const BRUTE_FORCE_LIMIT: usize = 16;

fn locally_alone(g: &Graph, cfg: &Configuration, u: NodeId) -> bool {
    cfg.top(u) && g.neighbors(u).iter().all(|&v| !cfg.top(v))
}

/// `β(γ)`: every ⊤ node whose neighbours are all ⊥.
pub fn beta_set(g: &Graph, cfg: &Configuration) -> Vec<NodeId> {
    g.nodes().filter(|&u| locally_alone(g, cfg, u)).collect()
}

/// `I_γ`: the locally alone nodes of `V_1`.
pub fn locally_alone_set(g: &Graph, b: &ByzantineSet, cfg: &Configuration) -> Vec<NodeId> {
    let v1 = v_level_mask(g, b, 1);
    locally_alone_in(g, &v1, cfg)
}

/// [`locally_alone_set`] with a precomputed `V_1` mask.
pub fn locally_alone_in(g: &Graph, v1: &[bool], cfg: &Configuration) -> Vec<NodeId> {
    g.nodes().filter(|&u| v1[u] && locally_alone(g, cfg, u)).collect()
}

pub fn is_independent(g: &Graph, set: &[NodeId]) -> bool {
    let mut mark = vec![false; g.n()];
    for &u in set {
        mark[u] = true;
    }
    set.iter().all(|&u| g.neighbors(u).iter().all(|&v| !mark[v]))
}

/// Independent in `G` and dominating every node of `ground` outside it.
/// Nodes of `set` need not belong to `ground`.
pub fn is_maximal_independent_within(g: &Graph, set: &[NodeId], ground: &[bool]) -> bool {
    if !is_independent(g, set) {
        return false;
    }
    let mut mark = vec![false; g.n()];
    for &u in set {
        mark[u] = true;
    }
    g.nodes()
        .filter(|&u| ground[u] && !mark[u])
        .all(|u| g.neighbors(u).iter().any(|&v| mark[v]))
}

pub fn is_maximal_independent(g: &Graph, set: &[NodeId]) -> bool {
    is_maximal_independent_within(g, set, &vec![true; g.n()])
}

/// Legitimacy with Byzantine nodes: `I_γ` is a maximal independent set of
/// `V_2 ∪ I_γ`. Maximality is only demanded against nodes of that ground set.
pub fn is_legitimate_byz(g: &Graph, b: &ByzantineSet, cfg: &Configuration) -> bool {
    let v1 = v_level_mask(g, b, 1);
    let v2 = v_level_mask(g, b, 2);
    is_legitimate_with(g, &v1, &v2, cfg)
}

/// [`is_legitimate_byz`] with precomputed `V_1` and `V_2` masks.
pub fn is_legitimate_with(g: &Graph, v1: &[bool], v2: &[bool], cfg: &Configuration) -> bool {
    let alone = locally_alone_in(g, v1, cfg);
    let mut ground = v2.to_vec();
    for &u in &alone {
        ground[u] = true;
    }
    is_maximal_independent_within(g, &alone, &ground)
}

/// Every member is ⊤ and every ⊤ neighbour of a member is a member.
pub fn is_candidate_set(g: &Graph, cfg: &Configuration, set: &[NodeId]) -> bool {
    let mut mark = vec![false; g.n()];
    for &u in set {
        mark[u] = true;
    }
    set.iter()
        .all(|&u| cfg.top(u) && g.neighbors(u).iter().all(|&v| !cfg.top(v) || mark[v]))
}

/// Every maximal independent set of `g` by scanning all `2^n` subsets.
/// Sets are sorted, and listed in increasing bitmask order.
pub fn brute_force_maximal_independent_sets(g: &Graph) -> Result<Vec<Vec<NodeId>>> {
    let n = g.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::Config(format!(
            "brute-force enumeration refused for n={n} (limit {BRUTE_FORCE_LIMIT})"
        )));
    }
    let nbr: Vec<u32> = g
        .nodes()
        .map(|u| g.neighbors(u).iter().fold(0u32, |m, &v| m | (1 << v)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let independent = (0..n).all(|u| mask & (1 << u) == 0 || mask & nbr[u] == 0);
        if !independent {
            continue;
        }
        let maximal = (0..n).all(|u| mask & (1 << u) != 0 || mask & nbr[u] != 0);
        if maximal {
            out.push((0..n).filter(|&u| mask & (1 << u) != 0).collect());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphKind};
    use proptest::prelude::*;

    fn example() -> Graph {
        Graph::from_edges(4, [(0, 1), (0, 2), (1, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn alone_set_on_example() {
        let g = example();
        let cfg = Configuration::anonymous(vec![false, true, false, true]);
        assert_eq!(locally_alone_set(&g, &ByzantineSet::empty(), &cfg), vec![1, 3]);
        let none = Configuration::anonymous(vec![false; 4]);
        assert!(locally_alone_set(&g, &ByzantineSet::empty(), &none).is_empty());
    }

    #[test]
    fn alone_set_empty_when_v1_empty() {
        let star = generate_graph(GraphKind::Star { leaves: 3 }, 0).unwrap();
        let b = ByzantineSet::new(&star, [0]).unwrap();
        let cfg = Configuration::anonymous(vec![false, true, true, true]);
        assert!(locally_alone_set(&star, &b, &cfg).is_empty());
    }

    #[test]
    fn beta_examples() {
        let g = example();
        let g3 = Configuration::anonymous(vec![true, true, false, true]);
        assert_eq!(beta_set(&g, &g3), vec![3]);
        let edge = generate_graph(GraphKind::Path { n: 2 }, 0).unwrap();
        assert!(beta_set(&edge, &Configuration::anonymous(vec![true, true])).is_empty());
        let single = Graph::from_edges(1, []).unwrap();
        assert_eq!(beta_set(&single, &Configuration::anonymous(vec![true])), vec![0]);
    }

    #[test]
    fn legitimacy_edge_cases() {
        // V_2 empty, I empty: vacuously legitimate.
        let star = generate_graph(GraphKind::Star { leaves: 3 }, 0).unwrap();
        let b = ByzantineSet::new(&star, [0]).unwrap();
        assert!(is_legitimate_byz(&star, &b, &Configuration::anonymous(vec![true; 4])));

        // Ring of 6 with v0 Byzantine: V_2 = {v3}.
        let ring = generate_graph(GraphKind::Ring { n: 6 }, 0).unwrap();
        let b = ByzantineSet::new(&ring, [0]).unwrap();
        let mut s = vec![false; 6];
        s[3] = true;
        assert!(is_legitimate_byz(&ring, &b, &Configuration::anonymous(s.clone())));
        // v2 alone dominates v3.
        s[3] = false;
        s[2] = true;
        assert!(is_legitimate_byz(&ring, &b, &Configuration::anonymous(s.clone())));
        // nothing dominates v3.
        s[2] = false;
        assert!(!is_legitimate_byz(&ring, &b, &Configuration::anonymous(s)));
        // v1 is not in V_1, so its being alone does not help.
        let mut s = vec![false; 6];
        s[1] = true;
        assert!(!is_legitimate_byz(&ring, &b, &Configuration::anonymous(s)));
    }

    #[test]
    fn brute_force_small_cases() {
        let tri = generate_graph(GraphKind::Complete { n: 3 }, 0).unwrap();
        assert_eq!(brute_force_maximal_independent_sets(&tri).unwrap(), vec![vec![0], vec![1], vec![2]]);
        let p3 = generate_graph(GraphKind::Path { n: 3 }, 0).unwrap();
        let mut sets = brute_force_maximal_independent_sets(&p3).unwrap();
        sets.sort();
        assert_eq!(sets, vec![vec![0, 2], vec![1]]);
        let mut sets = brute_force_maximal_independent_sets(&example()).unwrap();
        sets.sort();
        assert_eq!(sets, vec![vec![0, 3], vec![1, 3], vec![2]]);
        let big = generate_graph(GraphKind::Path { n: 17 }, 0).unwrap();
        assert!(brute_force_maximal_independent_sets(&big).is_err());
    }

    #[test]
    fn candidate_sets_of_figure_configuration() {
        let g = example();
        let cfg = Configuration::anonymous(vec![true, true, false, true]);
        for ok in [vec![0, 1, 3], vec![0, 1], vec![3], vec![]] {
            assert!(is_candidate_set(&g, &cfg, &ok), "{ok:?}");
        }
        for bad in [vec![0], vec![1], vec![0, 3], vec![1, 3], vec![2]] {
            assert!(!is_candidate_set(&g, &cfg, &bad), "{bad:?}");
        }
    }

    proptest! {
        #[test]
        fn beta_and_alone_sets_are_independent(
            s in proptest::collection::vec(any::<bool>(), 9),
            byz in proptest::option::of(0usize..9),
        ) {
            let g = generate_graph(GraphKind::Grid { rows: 3, cols: 3 }, 0).unwrap();
            let cfg = Configuration::anonymous(s);
            prop_assert!(is_independent(&g, &beta_set(&g, &cfg)));
            let b = ByzantineSet::new(&g, byz).unwrap();
            prop_assert!(is_independent(&g, &locally_alone_set(&g, &b, &cfg)));
        }

        #[test]
        fn without_byzantines_legitimacy_is_mis(s in proptest::collection::vec(any::<bool>(), 7)) {
            let g = generate_graph(GraphKind::ErdosRenyi { n: 7, p: 0.4 }, 3).unwrap();
            let cfg = Configuration::anonymous(s);
            let alone = locally_alone_set(&g, &ByzantineSet::empty(), &cfg);
            let oracle = brute_force_maximal_independent_sets(&g).unwrap();
            prop_assert_eq!(is_legitimate_byz(&g, &ByzantineSet::empty(), &cfg), oracle.contains(&alone));
        }
    }
}
