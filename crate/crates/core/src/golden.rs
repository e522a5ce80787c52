//! The four-node worked example for the anonymous algorithm, scripted move by
//! move, and a checker for it.
//!
//! Nodes `a, b, c, d` are `0..4` with edges a-b, a-c, b-c, c-d. A coin of
//! `true` on Withdrawal? means the node switches to ⊥.

use crate::adversary::Adversary;
use crate::analysis::beta_set;
use crate::colors::{ColorLedger, ColorRecord};
use crate::daemon::{Daemon, DaemonKind};
use crate::engine::{is_stable, Move, MoveSet, Simulation, Trace};
use crate::error::{Error, Result};
use crate::graph::{ByzantineSet, Graph, NodeId};
use crate::rng::RngStream;
use crate::state::{Algorithm, Configuration, Rule};

pub const A: NodeId = 0;
pub const B: NodeId = 1;
pub const C: NodeId = 2;
pub const D: NodeId = 3;

pub fn graph() -> Graph {
    Graph::from_edges(4, [(A, B), (A, C), (B, C), (C, D)]).expect("example graph is simple")
}

pub fn initial() -> Configuration {
    Configuration::anonymous(vec![false; 4])
}

fn set(rule: Rule, nodes: &[NodeId]) -> MoveSet {
    MoveSet::from_moves(nodes.iter().map(|&u| Move::new(u, rule)))
}

/// `t_1 … t_8`.
pub fn script() -> Vec<MoveSet> {
    use Rule::{Candidacy, WithdrawalQ};
    vec![
        set(Candidacy, &[A, B, C, D]),
        set(WithdrawalQ, &[A, B]),
        set(WithdrawalQ, &[A, B, C]),
        set(WithdrawalQ, &[A, B]),
        set(Candidacy, &[A, B]),
        set(WithdrawalQ, &[A, B]),
        set(WithdrawalQ, &[A, B]),
        set(WithdrawalQ, &[A]),
    ]
}

/// Withdrawal? coins in execution order.
pub fn coins() -> Vec<bool> {
    vec![
        false, false, // t2
        false, false, true, // t3: only c leaves
        true, true, // t4
        false, false, // t6
        false, false, // t7
        true, // t8
    ]
}

/// `s`-vectors of `γ_0 … γ_8` as 0/1 strings over `a b c d`.
pub const EXPECTED: [&str; 9] = [
    "0000", "1111", "1111", "1101", "0001", "1101", "1101", "1101", "0101",
];

pub const EXPECTED_BETA: [NodeId; 2] = [B, D];

#[derive(Debug, Clone)]
pub struct GoldenRun {
    pub trace: Trace,
    /// Per transition, the color of each move in node order.
    pub colors: Vec<Vec<usize>>,
    pub records: Vec<ColorRecord>,
    pub a_sets: Vec<Vec<NodeId>>,
    pub beta: Vec<NodeId>,
    pub stable: bool,
}

/// Executes the script through the engine with the color ledger attached.
pub fn run() -> Result<GoldenRun> {
    let g = graph();
    let mut sim = Simulation::new(
        &g,
        Algorithm::Anonymous,
        initial(),
        Daemon::new(DaemonKind::Scripted(script()), 4),
        Adversary::none(),
        RngStream::scripted(coins()),
    )?;
    sim.record_trace();
    let mut ledger = ColorLedger::new(&g, sim.config());
    let mut colors = Vec::new();
    for _ in 0..script().len() {
        let info = sim.step()?;
        colors.push(ledger.update(&g, info.index as usize, &info.before, &info.moves, sim.config())?);
    }
    let beta = beta_set(&g, sim.config());
    let stable = is_stable(Algorithm::Anonymous, &g, sim.config(), &ByzantineSet::empty())?;
    let a_sets = (0..=ledger.index())
        .map(|i| ledger.a_set(i).unwrap_or_default().to_vec())
        .collect();
    Ok(GoldenRun {
        trace: sim.into_trace().expect("trace was recorded"),
        colors,
        records: ledger.records().cloned().collect(),
        a_sets,
        beta,
        stable,
    })
}

/// Checks a run against the expected configurations, final set and
/// A-sets. Returns a description of the first mismatch.
pub fn check(run: &GoldenRun) -> Result<()> {
    let got: Vec<String> = run.trace.configurations().map(Configuration::s_string).collect();
    if got != EXPECTED {
        return Err(Error::Script(format!("configurations {got:?}, expected {EXPECTED:?}")));
    }
    if !run.stable || run.beta != EXPECTED_BETA {
        return Err(Error::Script(format!("final set {:?}, stable={}", run.beta, run.stable)));
    }
    let expected_a: [&[NodeId]; 9] = [&[], &[A, B, C, D], &[], &[], &[], &[A, B], &[], &[], &[]];
    for (i, (got, want)) in run.a_sets.iter().zip(expected_a).enumerate() {
        if got != want {
            return Err(Error::Script(format!("A_{i} = {got:?}, expected {want:?}")));
        }
    }
    Ok(())
}
