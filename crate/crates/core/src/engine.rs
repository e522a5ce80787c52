//! Execution core of the state model.
//!
//! A transition applies a valid move set: non-empty, at most one move per
//! node, every move enabled in the source configuration. All guards read the
//! source configuration and all commands write a fresh copy, so moves in one
//! transition are simultaneous. Rule coins are drawn in ascending node order.

use std::collections::BTreeMap;

use crate::adversary::Adversary;
use crate::daemon::Daemon;
use crate::error::{Error, Result};
use crate::graph::{ByzantineSet, Graph, NodeId};
use crate::rng::RngStream;
use crate::state::{Algorithm, Configuration, Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub node: NodeId,
    pub rule: Rule,
}

impl Move {
    pub fn new(node: NodeId, rule: Rule) -> Self {
        Move { node, rule }
    }
}

/// Moves of one transition, kept sorted by node. Validity is checked by the
/// engine, not on construction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct MoveSet {
    moves: Vec<Move>,
}

impl MoveSet {
    pub fn from_moves(moves: impl IntoIterator<Item = Move>) -> Self {
        let mut moves: Vec<Move> = moves.into_iter().collect();
        moves.sort();
        MoveSet { moves }
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn contains_node(&self, u: NodeId) -> bool {
        self.moves.binary_search_by_key(&u, |m| m.node).is_ok()
    }

    /// `V(t)`.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.moves.iter().map(|m| m.node)
    }

    /// Checks validity against the activable map of the source configuration.
    pub fn validate(&self, activable: &[Option<Rule>]) -> Result<()> {
        if self.moves.is_empty() {
            return Err(Error::Engine("empty move set".into()));
        }
        for w in self.moves.windows(2) {
            if w[0].node == w[1].node {
                return Err(Error::Engine(format!("two moves on node {}", w[0].node)));
            }
        }
        for m in &self.moves {
            match activable.get(m.node) {
                Some(Some(r)) if *r == m.rule => {}
                _ => {
                    return Err(Error::Engine(format!(
                        "move {}:{} is not possible in the source configuration",
                        m.node, m.rule
                    )))
                }
            }
        }
        Ok(())
    }
}

/// The enabled rule on `u`. Byzantine nodes are always activable and report
/// the `ByzAct` marker.
pub fn enabled_rules(algo: Algorithm, g: &Graph, cfg: &Configuration, b: &ByzantineSet, u: NodeId) -> Option<Rule> {
    if b.contains(u) {
        Some(Rule::ByzAct)
    } else {
        algo.enabled_rule(g, cfg, u)
    }
}

pub fn activable_map(algo: Algorithm, g: &Graph, cfg: &Configuration, b: &ByzantineSet) -> Vec<Option<Rule>> {
    g.nodes().map(|u| enabled_rules(algo, g, cfg, b, u)).collect()
}

/// No node activable. Meaningless with Byzantine nodes, which are always
/// activable, so a non-empty `b` is a usage error.
pub fn is_stable(algo: Algorithm, g: &Graph, cfg: &Configuration, b: &ByzantineSet) -> Result<bool> {
    if !b.is_empty() {
        return Err(Error::Usage("stability is undefined with byzantine nodes".into()));
    }
    Ok(g.nodes().all(|u| algo.enabled_rule(g, cfg, u).is_none()))
}

/// Applies a move set. Returns the new configuration and, per move, the coin
/// drawn (`None` for deterministic rules and Byzantine moves).
pub fn apply_transition(
    algo: Algorithm,
    g: &Graph,
    cfg: &Configuration,
    t: &MoveSet,
    rng: &mut RngStream,
    adversary: &mut Adversary,
) -> Result<(Configuration, Vec<Option<bool>>)> {
    let activable = activable_map(algo, g, cfg, adversary.set());
    t.validate(&activable)?;
    let mut after = cfg.clone();
    let mut draws = Vec::with_capacity(t.len());
    for m in t.moves() {
        let u = m.node;
        let draw = match m.rule {
            Rule::ByzAct => {
                let agent = adversary
                    .agent_mut(u)
                    .ok_or_else(|| Error::Engine(format!("node {u} is not byzantine")))?;
                let (s, x) = agent.act(cfg.s[u], cfg.x(u), rng);
                after.s[u] = s;
                if let Some(xs) = after.x.as_mut() {
                    xs[u] = x;
                }
                None
            }
            Rule::CandidacyQ => {
                let p = crate::byzantine::candidacy_probability(g, cfg, u);
                let coin = rng.coin(p)?;
                crate::byzantine::execute(m.rule, g, &mut after, u, coin);
                Some(coin)
            }
            Rule::WithdrawalQ => {
                let coin = rng.coin(crate::anonymous::WITHDRAWAL_PROBABILITY)?;
                crate::anonymous::execute(m.rule, &mut after, u, coin);
                Some(coin)
            }
            Rule::Refresh | Rule::Withdrawal => {
                crate::byzantine::execute(m.rule, g, &mut after, u, false);
                None
            }
            Rule::Candidacy => {
                crate::anonymous::execute(m.rule, &mut after, u, false);
                None
            }
        };
        draws.push(draw);
    }
    Ok((after, draws))
}

/// Round accounting: a round ends at the first transition after which every
/// node has been activated during the round or has been non-activable in
/// some configuration of the round. Byzantine nodes are never non-activable.
#[derive(Debug, Clone)]
pub struct RoundTracker {
    satisfied: Vec<bool>,
    completed: u64,
    in_round: u64,
}

impl RoundTracker {
    /// Starts the first round at a configuration with the given activable map.
    pub fn new(activable: &[Option<Rule>]) -> Self {
        RoundTracker {
            satisfied: activable.iter().map(Option::is_none).collect(),
            completed: 0,
            in_round: 0,
        }
    }

    /// Records one transition; returns true when it closes the round.
    pub fn advance(&mut self, t: &MoveSet, activable_after: &[Option<Rule>]) -> bool {
        self.in_round += 1;
        for u in t.nodes() {
            self.satisfied[u] = true;
        }
        for (flag, a) in self.satisfied.iter_mut().zip(activable_after) {
            *flag |= a.is_none();
        }
        if self.satisfied.iter().all(|&f| f) {
            self.completed += 1;
            self.in_round = 0;
            for (flag, a) in self.satisfied.iter_mut().zip(activable_after) {
                *flag = a.is_none();
            }
            true
        } else {
            false
        }
    }

    pub fn completed(&self) -> u64 {
        self.completed
    }

    /// Completed rounds plus the current one if it has started.
    pub fn elapsed(&self) -> u64 {
        self.completed + u64::from(self.in_round > 0)
    }

    pub fn transitions_in_current_round(&self) -> u64 {
        self.in_round
    }
}

/// One executed transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub moves: MoveSet,
    pub draws: Vec<Option<bool>>,
    pub after: Configuration,
}

/// Recorded execution `γ_0, t_1, γ_1, …` with round boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub seed: u64,
    pub initial: Configuration,
    pub steps: Vec<Step>,
    /// Transition indices (1-based) that closed a round, strictly increasing.
    pub round_ends: Vec<usize>,
}

impl Trace {
    pub fn configurations(&self) -> impl Iterator<Item = &Configuration> {
        std::iter::once(&self.initial).chain(self.steps.iter().map(|s| &s.after))
    }

    pub fn move_count(&self) -> usize {
        self.steps.iter().map(|s| s.moves.len()).sum()
    }

    /// Splits the transitions into rounds; a trailing unfinished round is
    /// returned last.
    pub fn rounds(&self) -> Vec<&[Step]> {
        let mut out = Vec::new();
        let mut start = 0;
        for &end in &self.round_ends {
            out.push(&self.steps[start..end]);
            start = end;
        }
        if start < self.steps.len() {
            out.push(&self.steps[start..]);
        }
        out
    }
}

/// What a call to [`Simulation::step`] did.
#[derive(Debug, Clone)]
pub struct StepInfo {
    /// 1-based transition index `i` of `γ_{i-1} → γ_i`.
    pub index: u64,
    pub before: Configuration,
    pub moves: MoveSet,
    pub draws: Vec<Option<bool>>,
    pub round_ended: bool,
}

/// A running execution: graph, algorithm, daemon, adversary and one seeded
/// random stream.
#[derive(Debug)]
pub struct Simulation<'g> {
    g: &'g Graph,
    algo: Algorithm,
    adversary: Adversary,
    daemon: Daemon,
    rng: RngStream,
    cfg: Configuration,
    activable: Vec<Option<Rule>>,
    ages: Vec<u64>,
    rounds: RoundTracker,
    transitions: u64,
    moves: u64,
    moves_by_rule: BTreeMap<Rule, u64>,
    fairness_violations: u64,
    trace: Option<Trace>,
}

impl<'g> Simulation<'g> {
    pub fn new(
        g: &'g Graph,
        algo: Algorithm,
        initial: Configuration,
        daemon: Daemon,
        adversary: Adversary,
        rng: RngStream,
    ) -> Result<Self> {
        initial.check_shape(g, algo)?;
        if algo == Algorithm::Anonymous && !adversary.is_empty() {
            return Err(Error::Config("the anonymous algorithm runs without byzantine nodes".into()));
        }
        let activable = activable_map(algo, g, &initial, adversary.set());
        Ok(Simulation {
            g,
            algo,
            rounds: RoundTracker::new(&activable),
            ages: vec![0; g.n()],
            activable,
            adversary,
            daemon,
            rng,
            cfg: initial,
            transitions: 0,
            moves: 0,
            moves_by_rule: BTreeMap::new(),
            fairness_violations: 0,
            trace: None,
        })
    }

    /// Keep a full [`Trace`] from now on.
    pub fn record_trace(&mut self) {
        self.trace = Some(Trace {
            seed: self.rng.seed(),
            initial: self.cfg.clone(),
            steps: Vec::new(),
            round_ends: Vec::new(),
        });
    }

    pub fn graph(&self) -> &'g Graph {
        self.g
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algo
    }

    pub fn config(&self) -> &Configuration {
        &self.cfg
    }

    pub fn activable(&self) -> &[Option<Rule>] {
        &self.activable
    }

    pub fn adversary(&self) -> &Adversary {
        &self.adversary
    }

    pub fn byzantine(&self) -> &ByzantineSet {
        self.adversary.set()
    }

    /// No node activable: the execution is maximal and finite.
    pub fn is_terminal(&self) -> bool {
        self.activable.iter().all(Option::is_none)
    }

    pub fn transitions(&self) -> u64 {
        self.transitions
    }

    pub fn moves(&self) -> u64 {
        self.moves
    }

    pub fn moves_by_rule(&self) -> &BTreeMap<Rule, u64> {
        &self.moves_by_rule
    }

    pub fn rounds(&self) -> &RoundTracker {
        &self.rounds
    }

    /// Times a node stayed activable for the fairness bound without being
    /// activated. Always 0 for non-fair daemons.
    pub fn fairness_violations(&self) -> u64 {
        self.fairness_violations
    }

    pub fn ages(&self) -> &[u64] {
        &self.ages
    }

    pub fn trace(&self) -> Option<&Trace> {
        self.trace.as_ref()
    }

    pub fn into_trace(self) -> Option<Trace> {
        self.trace
    }

    /// Executes one transition chosen by the daemon.
    pub fn step(&mut self) -> Result<StepInfo> {
        let t = self
            .daemon
            .select(self.g, &self.cfg, &self.activable, &self.ages, &mut self.rng)?;
        self.apply(t)
    }

    /// Executes a given move set, bypassing the daemon.
    pub fn apply(&mut self, t: MoveSet) -> Result<StepInfo> {
        let (after, draws) = apply_transition(self.algo, self.g, &self.cfg, &t, &mut self.rng, &mut self.adversary)?;
        for u in self.g.nodes() {
            let changed = after.s[u] != self.cfg.s[u] || after.x(u) != self.cfg.x(u);
            if changed && !t.contains_node(u) {
                return Err(Error::Engine(format!("node {u} changed without moving")));
            }
        }

        let bound = self.daemon.fairness_bound();
        for u in self.g.nodes() {
            if self.activable[u].is_some() && !t.contains_node(u) {
                self.ages[u] += 1;
                if bound.is_some_and(|f| self.ages[u] >= f as u64) {
                    self.fairness_violations += 1;
                }
            } else {
                self.ages[u] = 0;
            }
        }

        let before = std::mem::replace(&mut self.cfg, after);
        self.activable = activable_map(self.algo, self.g, &self.cfg, self.adversary.set());
        let round_ended = self.rounds.advance(&t, &self.activable);
        self.transitions += 1;
        self.moves += t.len() as u64;
        for m in t.moves() {
            *self.moves_by_rule.entry(m.rule).or_default() += 1;
        }
        if let Some(trace) = self.trace.as_mut() {
            trace.steps.push(Step {
                moves: t.clone(),
                draws: draws.clone(),
                after: self.cfg.clone(),
            });
            if round_ended {
                trace.round_ends.push(trace.steps.len());
            }
        }
        Ok(StepInfo {
            index: self.transitions,
            before,
            moves: t,
            draws,
            round_ended,
        })
    }
}
