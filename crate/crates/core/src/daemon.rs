//! Schedulers choosing which activable nodes fire in each transition.
//!
//! `Synchronous` and `AgedFair` are fair distributed daemons. The others
//! model the adversarial distributed daemon; none of them is the worst case,
//! they are heuristics that try to provoke conflicts or starve nodes.

use std::fmt;
use std::str::FromStr;

use crate::adversary::split_call;
use crate::engine::{Move, MoveSet};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::rng::RngStream;
use crate::state::{Configuration, Rule};

pub const DEFAULT_DENSITY: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub enum DaemonKind {
    /// Every activable node fires.
    Synchronous,
    /// Random subset with density `density`, but a node that has been
    /// activable and skipped for `bound - 1` consecutive transitions is forced
    /// in. `bound = None` resolves to `n`.
    AgedFair { bound: Option<usize>, density: f64 },
    /// Each activable node independently with probability `density`,
    /// redrawn while empty.
    RandomSubset { density: f64 },
    /// One node per transition, cycling through node indices.
    Singleton,
    /// Every activable node with an activable neighbour holding the same
    /// `s`, padded with a random subset of the rest.
    ConflictGreedy { density: f64 },
    /// Replays explicit move sets.
    Scripted(Vec<MoveSet>),
}

impl DaemonKind {
    pub fn name(&self) -> &'static str {
        match self {
            DaemonKind::Synchronous => "synchronous",
            DaemonKind::AgedFair { .. } => "aged_fair",
            DaemonKind::RandomSubset { .. } => "random_subset",
            DaemonKind::Singleton => "singleton",
            DaemonKind::ConflictGreedy { .. } => "conflict_greedy",
            DaemonKind::Scripted(_) => "scripted",
        }
    }

    pub fn is_fair(&self) -> bool {
        matches!(self, DaemonKind::Synchronous | DaemonKind::AgedFair { .. })
    }
}

impl fmt::Display for DaemonKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DaemonKind::AgedFair { bound: Some(b), density } => write!(f, "aged_fair({b},{density})"),
            DaemonKind::AgedFair { bound: None, density } => write!(f, "aged_fair(n,{density})"),
            DaemonKind::RandomSubset { density } => write!(f, "random_subset({density})"),
            DaemonKind::ConflictGreedy { density } => write!(f, "conflict_greedy({density})"),
            DaemonKind::Scripted(script) => write!(f, "scripted[{}]", script.len()),
            other => f.write_str(other.name()),
        }
    }
}

fn parse_density(s: &str) -> Result<f64> {
    let d: f64 = s
        .trim()
        .parse()
        .map_err(|e| Error::Config(format!("bad density `{s}`: {e}")))?;
    if d > 0.0 && d <= 1.0 {
        Ok(d)
    } else {
        Err(Error::Config(format!("density {d} not in (0,1]")))
    }
}

impl FromStr for DaemonKind {
    type Err = Error;

    /// `synchronous`, `singleton`, `random_subset[(d)]`,
    /// `conflict_greedy[(d)]`, `aged_fair[(F|n[,d])]`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = split_call(s)?;
        let args: Vec<&str> = arg.map(|a| a.split(',').map(str::trim).collect()).unwrap_or_default();
        let density_arg = |args: &[&str]| -> Result<f64> {
            match args {
                [] => Ok(DEFAULT_DENSITY),
                [d] => parse_density(d),
                _ => Err(Error::Config(format!("`{name}` takes at most one parameter"))),
            }
        };
        match name {
            "synchronous" | "singleton" if !args.is_empty() => {
                Err(Error::Config(format!("`{name}` takes no parameter")))
            }
            "synchronous" => Ok(DaemonKind::Synchronous),
            "singleton" => Ok(DaemonKind::Singleton),
            "random_subset" => Ok(DaemonKind::RandomSubset {
                density: density_arg(&args)?,
            }),
            "conflict_greedy" => Ok(DaemonKind::ConflictGreedy {
                density: density_arg(&args)?,
            }),
            "aged_fair" => {
                let (bound, rest) = match args.split_first() {
                    None => (None, &[][..]),
                    Some((&"n", rest)) => (None, rest),
                    Some((b, rest)) => {
                        let b: usize = b
                            .parse()
                            .map_err(|e| Error::Config(format!("bad fairness bound `{b}`: {e}")))?;
                        if b == 0 {
                            return Err(Error::Config("fairness bound must be at least 1".into()));
                        }
                        (Some(b), rest)
                    }
                };
                Ok(DaemonKind::AgedFair {
                    bound,
                    density: density_arg(rest)?,
                })
            }
            other => Err(Error::Config(format!("unknown daemon `{other}`"))),
        }
    }
}

/// Per-trial daemon state.
#[derive(Debug, Clone)]
pub struct Daemon {
    kind: DaemonKind,
    /// Resolved fairness bound for `AgedFair`.
    bound: usize,
    /// Always include every Byzantine node (they are always activable).
    byzantine_eager: bool,
    cursor: usize,
}

impl Daemon {
    pub fn new(kind: DaemonKind, n: usize) -> Self {
        let bound = match kind {
            DaemonKind::AgedFair { bound, .. } => bound.unwrap_or(n).max(1),
            _ => 1,
        };
        Daemon {
            kind,
            bound,
            byzantine_eager: false,
            cursor: 0,
        }
    }

    pub fn with_byzantine_eager(mut self, eager: bool) -> Self {
        self.byzantine_eager = eager;
        self
    }

    pub fn kind(&self) -> &DaemonKind {
        &self.kind
    }

    /// `F` for fair kinds: no node stays activable for `F` consecutive
    /// transitions without being activated.
    pub fn fairness_bound(&self) -> Option<usize> {
        match self.kind {
            DaemonKind::Synchronous => Some(1),
            DaemonKind::AgedFair { .. } => Some(self.bound),
            _ => None,
        }
    }

    /// Chooses the next move set.
    ///
    /// `activable[u]` is the rule `u` would execute (`ByzAct` for Byzantine
    /// nodes); `age[u]` counts consecutive transitions in which `u` was
    /// activable and not chosen.
    pub fn select(
        &mut self,
        g: &Graph,
        cfg: &Configuration,
        activable: &[Option<Rule>],
        age: &[u64],
        rng: &mut RngStream,
    ) -> Result<MoveSet> {
        let candidates: Vec<NodeId> = (0..activable.len()).filter(|&u| activable[u].is_some()).collect();
        if candidates.is_empty() {
            return Err(Error::Engine("daemon asked to select with no activable node".into()));
        }
        let mut chosen = vec![false; activable.len()];
        match &self.kind {
            DaemonKind::Scripted(script) => {
                let set = script
                    .get(self.cursor)
                    .ok_or_else(|| Error::Script(format!("script exhausted after {} steps", self.cursor)))?
                    .clone();
                for m in set.moves() {
                    if activable.get(m.node).copied().flatten() != Some(m.rule) {
                        return Err(Error::Script(format!(
                            "step {}: move {}:{} is not enabled",
                            self.cursor + 1,
                            m.node,
                            m.rule
                        )));
                    }
                }
                self.cursor += 1;
                return Ok(set);
            }
            DaemonKind::Synchronous => candidates.iter().for_each(|&u| chosen[u] = true),
            DaemonKind::AgedFair { density, .. } => {
                let forced = |u: NodeId| age[u] + 1 >= self.bound as u64;
                for &u in &candidates {
                    chosen[u] = forced(u) || rng.bool(*density);
                }
                if !chosen.iter().any(|&c| c) {
                    chosen[candidates[rng.index(candidates.len())]] = true;
                }
            }
            DaemonKind::RandomSubset { density } => loop {
                for &u in &candidates {
                    chosen[u] = rng.bool(*density);
                }
                if chosen.iter().any(|&c| c) {
                    break;
                }
            },
            DaemonKind::Singleton => {
                let n = activable.len();
                let u = (0..n)
                    .map(|k| (self.cursor + k) % n)
                    .find(|&u| activable[u].is_some())
                    .expect("candidates is non-empty");
                self.cursor = (u + 1) % n;
                chosen[u] = true;
            }
            DaemonKind::ConflictGreedy { density } => {
                for &u in &candidates {
                    chosen[u] = g
                        .neighbors(u)
                        .iter()
                        .any(|&v| activable[v].is_some() && cfg.top(v) == cfg.top(u));
                }
                for &u in &candidates {
                    if !chosen[u] {
                        chosen[u] = rng.bool(*density);
                    }
                }
                if !chosen.iter().any(|&c| c) {
                    chosen[candidates[rng.index(candidates.len())]] = true;
                }
            }
        }
        if self.byzantine_eager {
            for &u in &candidates {
                if activable[u] == Some(Rule::ByzAct) {
                    chosen[u] = true;
                }
            }
        }
        Ok(MoveSet::from_moves(
            candidates
                .into_iter()
                .filter(|&u| chosen[u])
                .map(|u| Move::new(u, activable[u].expect("candidate"))),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphKind};
    use crate::state::Algorithm;

    fn activable(g: &Graph, cfg: &Configuration) -> Vec<Option<Rule>> {
        g.nodes().map(|u| Algorithm::Anonymous.enabled_rule(g, cfg, u)).collect()
    }

    #[test]
    fn synchronous_selects_everything() {
        let g = generate_graph(GraphKind::Ring { n: 5 }, 0).unwrap();
        let cfg = Configuration::anonymous(vec![false; 5]);
        let act = activable(&g, &cfg);
        let mut d = Daemon::new(DaemonKind::Synchronous, 5);
        let set = d.select(&g, &cfg, &act, &[0; 5], &mut RngStream::new(0)).unwrap();
        assert_eq!(set.len(), 5);
        assert!(set.moves().iter().all(|m| m.rule == Rule::Candidacy));
    }

    #[test]
    fn aged_fair_with_bound_one_is_synchronous() {
        let g = generate_graph(GraphKind::ErdosRenyi { n: 10, p: 0.3 }, 4).unwrap();
        let mut rng = RngStream::new(5);
        let mut d = Daemon::new(DaemonKind::AgedFair { bound: Some(1), density: 0.1 }, 10);
        for trial in 0..20u64 {
            let s = (0..10).map(|u| (trial >> (u % 6)) & 1 == 1).collect();
            let cfg = Configuration::anonymous(s);
            let act = activable(&g, &cfg);
            if act.iter().all(Option::is_none) {
                continue;
            }
            let set = d.select(&g, &cfg, &act, &[0; 10], &mut rng).unwrap();
            assert_eq!(set.len(), act.iter().filter(|a| a.is_some()).count());
        }
    }

    #[test]
    fn aged_fair_forces_old_nodes() {
        let g = Graph::from_edges(3, []).unwrap();
        let cfg = Configuration::anonymous(vec![false; 3]);
        let act = activable(&g, &cfg);
        let mut d = Daemon::new(DaemonKind::AgedFair { bound: Some(4), density: 1e-9 }, 3);
        let set = d.select(&g, &cfg, &act, &[3, 0, 0], &mut RngStream::new(1)).unwrap();
        assert!(set.contains_node(0));
    }

    #[test]
    fn singleton_cycles() {
        let g = Graph::from_edges(3, []).unwrap();
        let cfg = Configuration::anonymous(vec![false; 3]);
        let act = activable(&g, &cfg);
        let mut d = Daemon::new(DaemonKind::Singleton, 3);
        let mut rng = RngStream::new(0);
        let picks: Vec<_> = (0..4)
            .map(|_| d.select(&g, &cfg, &act, &[0; 3], &mut rng).unwrap().moves()[0].node)
            .collect();
        assert_eq!(picks, vec![0, 1, 2, 0]);
    }

    #[test]
    fn conflict_greedy_takes_equal_neighbours() {
        let g = generate_graph(GraphKind::Path { n: 3 }, 0).unwrap();
        let cfg = Configuration::anonymous(vec![true, true, false]);
        let act = activable(&g, &cfg);
        let mut d = Daemon::new(DaemonKind::ConflictGreedy { density: 1e-9 }, 3);
        let set = d.select(&g, &cfg, &act, &[0; 3], &mut RngStream::new(0)).unwrap();
        assert!(set.contains_node(0) && set.contains_node(1));
    }

    #[test]
    fn scripted_rejects_disabled_moves() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let cfg = Configuration::anonymous(vec![false, false]);
        let act = activable(&g, &cfg);
        let bad = MoveSet::from_moves([Move::new(0, Rule::WithdrawalQ)]);
        let mut d = Daemon::new(DaemonKind::Scripted(vec![bad]), 2);
        assert!(matches!(d.select(&g, &cfg, &act, &[0; 2], &mut RngStream::new(0)), Err(Error::Script(_))));
        let mut empty = Daemon::new(DaemonKind::Scripted(vec![]), 2);
        assert!(matches!(empty.select(&g, &cfg, &act, &[0; 2], &mut RngStream::new(0)), Err(Error::Script(_))));
    }

    #[test]
    fn empty_activable_is_caller_bug() {
        let g = Graph::from_edges(1, []).unwrap();
        let cfg = Configuration::anonymous(vec![true]);
        let mut d = Daemon::new(DaemonKind::Synchronous, 1);
        assert!(matches!(d.select(&g, &cfg, &[None], &[0], &mut RngStream::new(0)), Err(Error::Engine(_))));
    }

    #[test]
    fn byzantine_eager_includes_byzantines() {
        let g = Graph::from_edges(3, []).unwrap();
        let cfg = Configuration::anonymous(vec![false; 3]);
        let act = vec![Some(Rule::ByzAct), None, Some(Rule::Candidacy)];
        let mut d = Daemon::new(DaemonKind::Singleton, 3).with_byzantine_eager(true);
        d.cursor = 2;
        let set = d.select(&g, &cfg, &act, &[0; 3], &mut RngStream::new(0)).unwrap();
        assert!(set.contains_node(0) && set.contains_node(2));
    }

    #[test]
    fn parsing() {
        assert_eq!("synchronous".parse::<DaemonKind>().unwrap(), DaemonKind::Synchronous);
        assert_eq!(
            "aged_fair".parse::<DaemonKind>().unwrap(),
            DaemonKind::AgedFair { bound: None, density: 0.5 }
        );
        assert_eq!(
            "aged_fair(7, 0.25)".parse::<DaemonKind>().unwrap(),
            DaemonKind::AgedFair { bound: Some(7), density: 0.25 }
        );
        assert_eq!(
            "random_subset(0.3)".parse::<DaemonKind>().unwrap(),
            DaemonKind::RandomSubset { density: 0.3 }
        );
        for bad in ["aged_fair(0)", "random_subset(0)", "random_subset(1.5)", "singleton(2)", "greedy", "aged_fair(3,0.5,1)"] {
            assert!(bad.parse::<DaemonKind>().is_err(), "{bad}");
        }
        for k in [
            DaemonKind::Synchronous,
            DaemonKind::Singleton,
            DaemonKind::AgedFair { bound: Some(3), density: 0.5 },
            DaemonKind::AgedFair { bound: None, density: 0.75 },
            DaemonKind::ConflictGreedy { density: 0.5 },
        ] {
            assert_eq!(k.to_string().parse::<DaemonKind>().unwrap(), k);
        }
    }
}
