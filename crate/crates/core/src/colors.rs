//! Color bookkeeping for executions of the anonymous algorithm.
//!
//! `A_0` is the set of ⊤ nodes of `γ_0` and `A_i` (i > 0) the nodes that
//! switched from ⊥ to ⊤ in transition `i`, i.e. exactly the Candidacy movers
//! of `t_i`. A Candidacy move in `t_i` has color `i`. A Withdrawal? move on
//! `u` in `t_j` has color `ℓ`, the smallest index such that `u` was ⊤ in every
//! configuration `γ_ℓ … γ_{j-1}`. `C_i` is the set of colors of the possible
//! Withdrawal? moves of `γ_i` and `Q_j^i` the nodes carrying them. A color
//! dies at the first index where it is no longer in `C_i`; it succeeds when
//! some node of its `A` set, ⊤ without interruption since the color's birth,
//! belongs to `β` at that index.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use crate::analysis::{beta_set, is_candidate_set};
use crate::anonymous::withdrawalq_guard;
use crate::engine::MoveSet;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::state::{Configuration, Rule};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColorRecord {
    pub color: usize,
    pub birth: usize,
    pub death: Option<usize>,
    /// `|A_color|`.
    pub size: usize,
    /// Withdrawal? moves of this color, all executed after its birth.
    pub withdrawal_moves: u64,
    /// Candidacy moves of this color (they created it).
    pub candidacy_moves: u64,
    pub success: bool,
}

#[derive(Debug, Clone)]
pub struct ColorLedger {
    index: usize,
    /// Start of the current uninterrupted ⊤ stretch of each node.
    since: Vec<Option<usize>>,
    /// `s`-vectors of `γ_0 … γ_index`.
    history: Vec<Vec<bool>>,
    a_sets: Vec<Vec<NodeId>>,
    records: BTreeMap<usize, ColorRecord>,
    live: BTreeSet<usize>,
    q: BTreeMap<usize, Vec<NodeId>>,
    dead: BTreeSet<usize>,
}

impl ColorLedger {
    pub fn new(g: &Graph, initial: &Configuration) -> Self {
        let a0: Vec<NodeId> = g.nodes().filter(|&u| initial.top(u)).collect();
        let since = g.nodes().map(|u| initial.top(u).then_some(0)).collect();
        let mut ledger = ColorLedger {
            index: 0,
            since,
            history: vec![initial.s.clone()],
            a_sets: vec![a0.clone()],
            records: BTreeMap::new(),
            live: BTreeSet::new(),
            q: BTreeMap::new(),
            dead: BTreeSet::new(),
        };
        if !a0.is_empty() {
            ledger.records.insert(0, ColorRecord::born(0, a0.len()));
        }
        ledger
            .refresh(g, initial)
            .expect("no color is dead before the first refresh");
        ledger
    }

    /// Index of the last configuration seen.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn a_set(&self, i: usize) -> Option<&[NodeId]> {
        self.a_sets.get(i).map(Vec::as_slice)
    }

    /// `C_i` for the current index.
    pub fn live_colors(&self) -> &BTreeSet<usize> {
        &self.live
    }

    /// `Q_j^i` for the current index, keyed by color `j`.
    pub fn q_sets(&self) -> &BTreeMap<usize, Vec<NodeId>> {
        &self.q
    }

    pub fn records(&self) -> impl Iterator<Item = &ColorRecord> {
        self.records.values()
    }

    pub fn all_dead(&self) -> bool {
        self.records.values().all(|r| r.death.is_some())
    }

    /// Color a Withdrawal? move on `u` would get in the next transition.
    pub fn withdrawal_color(&self, u: NodeId) -> Option<usize> {
        self.since[u]
    }

    /// Records transition `i`: `γ_{i-1} -t-> γ_i`. Returns the color of each
    /// move of `t` in node order.
    pub fn update(
        &mut self,
        g: &Graph,
        i: usize,
        before: &Configuration,
        t: &MoveSet,
        after: &Configuration,
    ) -> Result<Vec<usize>> {
        if i != self.index + 1 {
            return Err(Error::Instrumentation(format!("expected transition {}, got {i}", self.index + 1)));
        }
        if self.history.last() != Some(&before.s) {
            return Err(Error::Instrumentation(format!("transition {i} does not start at the recorded configuration")));
        }
        let a_i: Vec<NodeId> = g.nodes().filter(|&u| !before.top(u) && after.top(u)).collect();

        let mut colors = Vec::with_capacity(t.len());
        for m in t.moves() {
            let u = m.node;
            let color = match m.rule {
                Rule::Candidacy => {
                    if a_i.binary_search(&u).is_err() {
                        return Err(Error::Instrumentation(format!("candidacy of {u} at {i} has no color")));
                    }
                    i
                }
                Rule::WithdrawalQ => {
                    let color = self.since[u].ok_or_else(|| {
                        Error::Instrumentation(format!("withdrawal of ⊥ node {u} at {i}"))
                    })?;
                    let labels = self.withdrawal_labels(u);
                    if labels != [color] {
                        return Err(Error::Instrumentation(format!(
                            "withdrawal of {u} at {i} carries colors {labels:?}, expected [{color}]"
                        )));
                    }
                    color
                }
                other => {
                    return Err(Error::Instrumentation(format!("rule {other} is not colored")));
                }
            };
            colors.push(color);
        }

        let candidacy_movers: Vec<NodeId> = t
            .moves()
            .iter()
            .filter(|m| m.rule == Rule::Candidacy)
            .map(|m| m.node)
            .collect();
        if candidacy_movers != a_i {
            return Err(Error::Instrumentation(format!("A_{i} differs from the candidacy movers")));
        }
        if !is_candidate_set(g, after, &a_i) {
            return Err(Error::Instrumentation(format!("A_{i} is not a candidate set")));
        }

        for (m, &c) in t.moves().iter().zip(&colors) {
            if m.rule == Rule::WithdrawalQ {
                self.records
                    .get_mut(&c)
                    .ok_or_else(|| Error::Instrumentation(format!("withdrawal colored by unknown color {c}")))?
                    .withdrawal_moves += 1;
            }
        }
        if !a_i.is_empty() {
            let mut rec = ColorRecord::born(i, a_i.len());
            rec.candidacy_moves = a_i.len() as u64;
            self.records.insert(i, rec);
        }

        for u in g.nodes() {
            self.since[u] = match (before.top(u), after.top(u)) {
                (false, true) => Some(i),
                (_, false) => None,
                (true, true) => self.since[u],
            };
        }
        self.index = i;
        self.history.push(after.s.clone());
        self.a_sets.push(a_i);
        self.refresh(g, after)?;
        Ok(colors)
    }

    /// Labels `(ℓ, A_ℓ)` a Withdrawal? on `u` at the next transition would
    /// carry, counted straight from the configuration history.
    fn withdrawal_labels(&self, u: NodeId) -> Vec<usize> {
        let mut labels = Vec::new();
        for k in (0..self.history.len()).rev() {
            if !self.history[k][u] {
                break;
            }
            let in_a = k == 0 || !self.history[k - 1][u];
            if in_a {
                labels.push(k);
            }
        }
        labels
    }

    fn refresh(&mut self, g: &Graph, cfg: &Configuration) -> Result<()> {
        self.live.clear();
        self.q.clear();
        for u in g.nodes() {
            if withdrawalq_guard(g, cfg, u) {
                let c = self.since[u].expect("⊤ node has a stretch start");
                self.live.insert(c);
                self.q.entry(c).or_default().push(u);
            }
        }
        if let Some(&c) = self.live.intersection(&self.dead).next() {
            return Err(Error::Instrumentation(format!("dead color {c} has possible moves again")));
        }
        let beta = beta_set(g, cfg);
        let newly_dead: Vec<usize> = self
            .records
            .values()
            .filter(|r| r.death.is_none() && !self.live.contains(&r.color))
            .map(|r| r.color)
            .collect();
        for c in newly_dead {
            let success = beta.iter().any(|&u| self.since[u] == Some(c));
            let rec = self.records.get_mut(&c).expect("record exists");
            rec.death = Some(self.index);
            rec.success = success;
            self.dead.insert(c);
        }
        Ok(())
    }

    /// One CSV row per color.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in self.records.values() {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl ColorRecord {
    fn born(color: usize, size: usize) -> Self {
        ColorRecord {
            color,
            birth: color,
            death: None,
            size,
            withdrawal_moves: 0,
            candidacy_moves: 0,
            success: false,
        }
    }
}
