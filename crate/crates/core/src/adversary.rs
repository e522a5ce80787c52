//! Byzantine behaviours. A Byzantine node is always activable; when the
//! daemon activates it, its strategy rewrites its own `s` and `x` freely.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{ByzantineSet, Graph, NodeId};
use crate::rng::RngStream;

pub const DEFAULT_X_CAP: u64 = u32::MAX as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ByzantineStrategy {
    /// Never changes anything.
    Silent,
    /// Holds `s = ⊤`, blocking every neighbour's candidacy.
    AlwaysTop,
    /// Toggles `s` on every activation.
    Oscillate,
    /// Advertises `x = x_cap` with `s = ⊥`, depressing the candidacy
    /// probability of its neighbours.
    DegreeLiar { x_cap: u64 },
    /// Uniform `s` and `x ∈ [0, x_cap]`.
    UniformRandom { x_cap: u64 },
}

impl ByzantineStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            ByzantineStrategy::Silent => "silent",
            ByzantineStrategy::AlwaysTop => "always_top",
            ByzantineStrategy::Oscillate => "oscillate",
            ByzantineStrategy::DegreeLiar { .. } => "degree_liar",
            ByzantineStrategy::UniformRandom { .. } => "uniform_random",
        }
    }
}

impl fmt::Display for ByzantineStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ByzantineStrategy::DegreeLiar { x_cap } | ByzantineStrategy::UniformRandom { x_cap } => {
                write!(f, "{}({x_cap})", self.name())
            }
            _ => f.write_str(self.name()),
        }
    }
}

impl FromStr for ByzantineStrategy {
    type Err = Error;

    /// `name` or `name(x_cap)` for the two strategies that take a cap.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = split_call(s)?;
        let cap = |arg: Option<&str>| -> Result<u64> {
            arg.map_or(Ok(DEFAULT_X_CAP), |a| {
                a.trim()
                    .parse()
                    .map_err(|e| Error::Config(format!("bad x_cap `{a}`: {e}")))
            })
        };
        let no_arg = |st: ByzantineStrategy| {
            if arg.is_some() {
                Err(Error::Config(format!("strategy `{name}` takes no parameter")))
            } else {
                Ok(st)
            }
        };
        match name {
            "silent" => no_arg(ByzantineStrategy::Silent),
            "always_top" => no_arg(ByzantineStrategy::AlwaysTop),
            "oscillate" => no_arg(ByzantineStrategy::Oscillate),
            "degree_liar" => Ok(ByzantineStrategy::DegreeLiar { x_cap: cap(arg)? }),
            "uniform_random" => Ok(ByzantineStrategy::UniformRandom { x_cap: cap(arg)? }),
            other => Err(Error::Config(format!("unknown byzantine strategy `{other}`"))),
        }
    }
}

/// Splits `name(args)` into its parts; a bare `name` has no args.
pub(crate) fn split_call(s: &str) -> Result<(&str, Option<&str>)> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s, None)),
        Some(open) => {
            let inner = s[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| Error::Config(format!("unbalanced parentheses in `{s}`")))?;
            if inner.contains('(') || inner.contains(')') {
                return Err(Error::Config(format!("nested parentheses in `{s}`")));
            }
            Ok((s[..open].trim(), Some(inner)))
        }
    }
}

/// One Byzantine node with its strategy and activation count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByzantineAgent {
    pub node: NodeId,
    pub strategy: ByzantineStrategy,
    pub activations: u64,
}

impl ByzantineAgent {
    pub fn new(node: NodeId, strategy: ByzantineStrategy) -> Self {
        ByzantineAgent {
            node,
            strategy,
            activations: 0,
        }
    }

    /// New `(s, x)` for the activated node. `x` is ignored by callers running
    /// the anonymous algorithm.
    pub fn act(&mut self, s: bool, x: u64, rng: &mut RngStream) -> (bool, u64) {
        self.activations += 1;
        byz_act(self.strategy, s, x, rng)
    }
}

pub fn byz_act(strategy: ByzantineStrategy, s: bool, x: u64, rng: &mut RngStream) -> (bool, u64) {
    match strategy {
        ByzantineStrategy::Silent => (s, x),
        ByzantineStrategy::AlwaysTop => (true, x),
        ByzantineStrategy::Oscillate => (!s, x),
        ByzantineStrategy::DegreeLiar { x_cap } => (false, x_cap),
        ByzantineStrategy::UniformRandom { x_cap } => {
            let s = rng.bool(0.5);
            (s, rng.below_inclusive(x_cap))
        }
    }
}

/// The Byzantine nodes of a run and their strategies. Strategies may differ
/// per node.
#[derive(Debug, Clone, Default)]
pub struct Adversary {
    set: ByzantineSet,
    agents: Vec<ByzantineAgent>,
}

impl Adversary {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(g: &Graph, assignments: impl IntoIterator<Item = (NodeId, ByzantineStrategy)>) -> Result<Self> {
        let mut agents: Vec<ByzantineAgent> = assignments
            .into_iter()
            .map(|(u, st)| ByzantineAgent::new(u, st))
            .collect();
        agents.sort_by_key(|a| a.node);
        if let Some(w) = agents.windows(2).find(|w| w[0].node == w[1].node) {
            return Err(Error::Config(format!("node {} assigned two byzantine strategies", w[0].node)));
        }
        let set = ByzantineSet::new(g, agents.iter().map(|a| a.node))?;
        Ok(Adversary { set, agents })
    }

    pub fn set(&self) -> &ByzantineSet {
        &self.set
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn agents(&self) -> &[ByzantineAgent] {
        &self.agents
    }

    pub fn agent_mut(&mut self, u: NodeId) -> Option<&mut ByzantineAgent> {
        self.agents
            .binary_search_by_key(&u, |a| a.node)
            .ok()
            .map(move |i| &mut self.agents[i])
    }
}
