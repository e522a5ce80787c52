//! Seeded trials, sweeps over graph sizes and CSV output.
//!
//! Anonymous runs stop at the first stable configuration. Byzantine runs
//! stop at the first legitimate configuration (optionally held for
//! `hold_rounds` more complete rounds). Either may stop early at a move or
//! round ceiling, which is recorded, never hidden.

use std::collections::BTreeMap;
use std::f64::consts::{E, SQRT_2};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{beta_set, is_independent, is_legitimate_with, locally_alone_in};
use crate::colors::ColorLedger;
use crate::daemon::Daemon;
use crate::engine::{Simulation, Trace};
use crate::error::{Error, Result};
use crate::graph::{v_level_mask, ByzantineSet, Graph, NodeId};
use crate::rng::{trial_seed, RngStream};
use crate::runspec::{InitPreset, RunSpec};
use crate::state::{Algorithm, Configuration, Rule};
use crate::stats::Summary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Stable,
    Legitimate,
}

/// One CSV row per trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub spec_hash: String,
    pub trial: u64,
    pub seed: u64,
    pub moves: u64,
    pub rounds: u64,
    pub converged: bool,
    pub criterion: Criterion,
    /// `|β|` for anonymous runs, `|I|` for Byzantine runs.
    pub set_size: usize,
    pub ceiling_hit: bool,
    #[serde(skip)]
    pub moves_by_rule: BTreeMap<Rule, u64>,
    #[serde(skip)]
    pub transitions: u64,
}

/// Invariant checks accumulated over one trial. Counts are violations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InvariantReport {
    pub transitions_checked: u64,
    /// `β(γ) ⊄ β(γ')` on some transition (anonymous algorithm).
    pub beta_monotonicity: u64,
    /// `I_γ ⊄ I_γ'` on some transition.
    pub i_monotonicity: u64,
    /// `β` or `I` not independent.
    pub independence: u64,
    /// Configurations from the first round boundary on in which a correct
    /// node has `x ≠ deg` (Byzantine algorithm under a fair daemon).
    pub degree: u64,
    /// Whether the first round boundary was reached, so the degree check ran.
    pub degree_checked: bool,
    pub fairness: u64,
}

impl InvariantReport {
    pub fn violations(&self) -> u64 {
        self.beta_monotonicity + self.i_monotonicity + self.independence + self.degree + self.fairness
    }

    pub fn merge(&mut self, other: &InvariantReport) {
        self.transitions_checked += other.transitions_checked;
        self.beta_monotonicity += other.beta_monotonicity;
        self.i_monotonicity += other.i_monotonicity;
        self.independence += other.independence;
        self.degree += other.degree;
        self.degree_checked |= other.degree_checked;
        self.fairness += other.fairness;
    }
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    pub graph: Graph,
    pub initial: Configuration,
    pub final_config: Configuration,
    pub invariants: Option<InvariantReport>,
    pub colors: Option<ColorLedger>,
    pub trace: Option<Trace>,
}

/// Default move ceiling `100·3n²`.
pub fn default_move_ceiling(n: usize) -> u64 {
    300 * (n as u64).pow(2)
}

/// Default round ceiling `100·Δ·n·⌈e(Δ+1)⌉`, with `Δ` taken as at least 1.
pub fn default_round_ceiling(n: usize, max_degree: usize) -> u64 {
    let d = max_degree.max(1) as u64;
    100 * d * n as u64 * (E * (max_degree as f64 + 1.0)).ceil() as u64
}

/// `⌈√2/(√2−1)·e·(Δ+1)·n⌉`, the dominant term of the round bound.
pub fn round_bound(n: usize, max_degree: usize) -> u64 {
    (SQRT_2 / (SQRT_2 - 1.0) * E * (max_degree as f64 + 1.0) * n as f64).ceil() as u64
}

/// Samples an initial configuration. Byzantine nodes get arbitrary values
/// like everyone else.
pub fn sample_initial(algo: Algorithm, g: &Graph, preset: InitPreset, rng: &mut RngStream) -> Configuration {
    let n = g.n();
    let s: Vec<bool> = match preset {
        InitPreset::AllBot => vec![false; n],
        InitPreset::AllTop => vec![true; n],
        InitPreset::Random | InitPreset::AdversarialX => (0..n).map(|_| rng.bool(0.5)).collect(),
    };
    if !algo.uses_x() {
        return Configuration::anonymous(s);
    }
    let x = match preset {
        InitPreset::Random => (0..n).map(|_| rng.below_inclusive(n as u64)).collect(),
        InitPreset::AdversarialX => vec![n as u64; n],
        InitPreset::AllBot | InitPreset::AllTop => g.nodes().map(|u| g.degree(u) as u64).collect(),
    };
    Configuration::byzantine(s, x)
}

struct Checker {
    algo: Algorithm,
    fair: bool,
    byzantine: ByzantineSet,
    v1: Vec<bool>,
    v2: Vec<bool>,
    beta: Vec<NodeId>,
    alone: Vec<NodeId>,
    report: InvariantReport,
}

fn subset(a: &[NodeId], b: &[NodeId]) -> bool {
    a.iter().all(|u| b.binary_search(u).is_ok())
}

impl Checker {
    fn new(algo: Algorithm, fair: bool, g: &Graph, b: &ByzantineSet, cfg: &Configuration) -> Self {
        let v1 = v_level_mask(g, b, 1);
        let mut c = Checker {
            algo,
            fair,
            byzantine: b.clone(),
            v2: v_level_mask(g, b, 2),
            beta: beta_set(g, cfg),
            alone: locally_alone_in(g, &v1, cfg),
            v1,
            report: InvariantReport::default(),
        };
        c.check_independence(g);
        c
    }

    fn check_independence(&mut self, g: &Graph) {
        if !is_independent(g, &self.beta) || !is_independent(g, &self.alone) {
            self.report.independence += 1;
        }
    }

    fn legitimate(&self, g: &Graph, cfg: &Configuration) -> bool {
        is_legitimate_with(g, &self.v1, &self.v2, cfg)
    }

    fn after_transition(&mut self, g: &Graph, cfg: &Configuration, rounds_completed: u64) {
        self.report.transitions_checked += 1;
        let beta = beta_set(g, cfg);
        let alone = locally_alone_in(g, &self.v1, cfg);
        if self.algo == Algorithm::Anonymous && !subset(&self.beta, &beta) {
            self.report.beta_monotonicity += 1;
        }
        if !subset(&self.alone, &alone) {
            self.report.i_monotonicity += 1;
        }
        self.beta = beta;
        self.alone = alone;
        self.check_independence(g);
        if self.algo == Algorithm::Byzantine && self.fair && rounds_completed >= 1 {
            self.report.degree_checked = true;
            let bad = g
                .nodes()
                .any(|u| !self.byzantine.contains(u) && cfg.x(u) != g.degree(u) as u64);
            if bad {
                self.report.degree += 1;
            }
        }
    }
}

/// Runs trial `index` of `spec`. The trial seed is
/// `trial_seed(spec.master_seed, index)` and fixes the graph (for random
/// families without `graph_seed`), the initial configuration and the whole
/// execution.
pub fn run_trial(spec: &RunSpec, index: u64) -> Result<TrialOutcome> {
    spec.validate()?;
    let seed = trial_seed(spec.master_seed, index);
    // separate stream for the graph so it does not share draws with the run
    let g = spec.build_graph(trial_seed(seed, u64::MAX))?;
    let adversary = spec.build_adversary(&g)?;
    let mut rng = RngStream::new(seed);
    let initial = sample_initial(spec.algorithm, &g, spec.init, &mut rng);
    let daemon = Daemon::new(spec.daemon.clone(), g.n()).with_byzantine_eager(spec.byzantine_eager);
    let fair = spec.daemon.is_fair();
    let b = adversary.set().clone();

    let move_ceiling = spec.move_ceiling.unwrap_or_else(|| default_move_ceiling(g.n()));
    let round_ceiling = spec
        .round_ceiling
        .unwrap_or_else(|| default_round_ceiling(g.n(), g.max_degree()));

    let mut sim = Simulation::new(&g, spec.algorithm, initial.clone(), daemon, adversary, rng)?;
    if spec.trace {
        sim.record_trace();
    }
    let mut ledger = spec.colors.then(|| ColorLedger::new(&g, &initial));
    let mut checker = Checker::new(spec.algorithm, fair, &g, &b, &initial);

    let criterion = match spec.algorithm {
        Algorithm::Anonymous => Criterion::Stable,
        Algorithm::Byzantine => Criterion::Legitimate,
    };
    let reached = |sim: &Simulation, checker: &Checker| match criterion {
        Criterion::Stable => sim.is_terminal(),
        Criterion::Legitimate => checker.legitimate(&g, sim.config()),
    };

    // (moves, rounds, completed rounds) at the first hit of the criterion
    let mut first_hit = reached(&sim, &checker).then_some((0u64, 0u64, 0u64));
    let mut converged = false;
    let mut ceiling_hit = false;
    loop {
        if let Some((_, _, at)) = first_hit {
            let held = criterion == Criterion::Stable || sim.rounds().completed() >= at + spec.hold_rounds;
            if held || sim.is_terminal() {
                converged = true;
                break;
            }
        }
        if sim.is_terminal() {
            break;
        }
        if sim.moves() >= move_ceiling || sim.rounds().elapsed() >= round_ceiling {
            ceiling_hit = true;
            break;
        }
        let info = sim.step()?;
        if spec.invariants {
            checker.after_transition(&g, sim.config(), sim.rounds().completed());
        }
        if let Some(ledger) = ledger.as_mut() {
            ledger.update(&g, info.index as usize, &info.before, &info.moves, sim.config())?;
        }
        if reached(&sim, &checker) {
            first_hit.get_or_insert((sim.moves(), sim.rounds().elapsed(), sim.rounds().completed()));
        } else {
            first_hit = None;
        }
    }

    let (moves, rounds) = match first_hit.filter(|_| converged) {
        Some((m, r, _)) => (m, r),
        None => (sim.moves(), sim.rounds().elapsed()),
    };
    let set_size = match criterion {
        Criterion::Stable => beta_set(&g, sim.config()).len(),
        Criterion::Legitimate => locally_alone_in(&g, &checker.v1, sim.config()).len(),
    };
    checker.report.fairness = sim.fairness_violations();
    let record = TrialRecord {
        spec_hash: spec.hash(),
        trial: index,
        seed,
        moves,
        rounds,
        converged,
        criterion,
        set_size,
        ceiling_hit,
        moves_by_rule: sim.moves_by_rule().clone(),
        transitions: sim.transitions(),
    };
    let final_config = sim.config().clone();
    let trace = sim.into_trace();
    Ok(TrialOutcome {
        record,
        graph: g,
        initial,
        final_config,
        invariants: spec.invariants.then_some(checker.report),
        colors: ledger,
        trace,
    })
}

/// All trials of `spec` in parallel, ordered by trial index.
pub fn run_trials(spec: &RunSpec) -> Result<Vec<TrialOutcome>> {
    (0..spec.trials).into_par_iter().map(|i| run_trial(spec, i)).collect()
}

pub fn write_trials_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Aggregate statistics for one graph size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub spec_hash: String,
    pub graph: String,
    pub n: usize,
    /// Largest maximum degree over the trial graphs.
    pub max_degree: usize,
    pub trials: u64,
    pub converged: u64,
    pub moves_mean: f64,
    pub moves_sd: f64,
    pub moves_sem: f64,
    pub moves_min: f64,
    pub moves_max: f64,
    pub moves_p50: f64,
    pub moves_p95: f64,
    pub rounds_mean: f64,
    pub rounds_sd: f64,
    pub rounds_sem: f64,
    pub rounds_min: f64,
    pub rounds_max: f64,
    pub rounds_p50: f64,
    pub rounds_p95: f64,
    /// `3n²`.
    pub moves_bound: u64,
    /// `e(Δ+1)n`.
    pub e_delta_n: f64,
    /// `⌈√2/(√2−1)·e(Δ+1)n⌉`.
    pub rounds_bound: u64,
}

/// Runs `spec` once per entry of `sizes` (or once if `sizes` is empty).
pub fn run_sweep(spec: &RunSpec) -> Result<Vec<(SweepRow, Vec<TrialOutcome>)>> {
    spec.validate()?;
    let specs = if spec.sizes.is_empty() {
        vec![spec.clone()]
    } else {
        spec.sizes.iter().map(|&n| spec.with_size(n)).collect::<Result<Vec<_>>>()?
    };
    specs
        .iter()
        .map(|s| {
            let outcomes = run_trials(s)?;
            Ok((summarize(s, &outcomes)?, outcomes))
        })
        .collect()
}

pub fn summarize(spec: &RunSpec, outcomes: &[TrialOutcome]) -> Result<SweepRow> {
    let first = outcomes
        .first()
        .ok_or_else(|| Error::Usage("no trials to summarize".into()))?;
    let n = first.graph.n();
    let max_degree = outcomes.iter().map(|o| o.graph.max_degree()).max().unwrap_or(0);
    let moves = Summary::of_counts(outcomes.iter().map(|o| o.record.moves)).expect("non-empty");
    let rounds = Summary::of_counts(outcomes.iter().map(|o| o.record.rounds)).expect("non-empty");
    Ok(SweepRow {
        spec_hash: spec.hash(),
        graph: spec.graph.to_string(),
        n,
        max_degree,
        trials: outcomes.len() as u64,
        converged: outcomes.iter().filter(|o| o.record.converged).count() as u64,
        moves_mean: moves.mean,
        moves_sd: moves.sd,
        moves_sem: moves.sem,
        moves_min: moves.min,
        moves_max: moves.max,
        moves_p50: moves.p50,
        moves_p95: moves.p95,
        rounds_mean: rounds.mean,
        rounds_sd: rounds.sd,
        rounds_sem: rounds.sem,
        rounds_min: rounds.min,
        rounds_max: rounds.max,
        rounds_p50: rounds.p50,
        rounds_p95: rounds.p95,
        moves_bound: 3 * (n as u64).pow(2),
        e_delta_n: E * (max_degree as f64 + 1.0) * n as f64,
        rounds_bound: round_bound(n, max_degree),
    })
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{brute_force_maximal_independent_sets, is_legitimate_byz};
    use crate::daemon::DaemonKind;
    use crate::engine::is_stable;
    use crate::graph::GraphKind;

    fn spec(algo: Algorithm, kind: GraphKind, daemon: DaemonKind) -> RunSpec {
        let mut s = RunSpec::new(algo, kind);
        s.daemon = daemon;
        s
    }

    #[test]
    fn single_node_anonymous_converges_in_one_move() {
        let mut s = spec(Algorithm::Anonymous, GraphKind::Ring { n: 1 }, DaemonKind::Singleton);
        s.init = InitPreset::AllBot;
        let out = run_trial(&s, 0).unwrap();
        assert_eq!((out.record.moves, out.record.converged, out.record.set_size), (1, true, 1));
        assert_eq!(out.record.criterion, Criterion::Stable);
    }

    #[test]
    fn byzantine_without_faults_builds_a_maximal_independent_set() {
        for n in 1..=8 {
            let s = spec(
                Algorithm::Byzantine,
                GraphKind::ErdosRenyi { n, p: 0.4 },
                DaemonKind::Synchronous,
            );
            for t in 0..5 {
                let out = run_trial(&s, t).unwrap();
                assert!(out.record.converged);
                let g = &out.graph;
                let alone: Vec<NodeId> = locally_alone_in(g, &vec![true; n], &out.final_config);
                assert!(brute_force_maximal_independent_sets(g).unwrap().contains(&alone));
                assert!(is_legitimate_byz(g, &ByzantineSet::empty(), &out.final_config));
                assert_eq!(out.invariants.unwrap().violations(), 0);
            }
        }
    }

    #[test]
    fn converged_records_pass_their_predicate() {
        let mut s = spec(Algorithm::Anonymous, GraphKind::Grid { rows: 3, cols: 4 }, DaemonKind::RandomSubset {
            density: 0.5,
        });
        s.trials = 20;
        for out in run_trials(&s).unwrap() {
            assert!(out.record.converged);
            assert!(is_stable(Algorithm::Anonymous, &out.graph, &out.final_config, &ByzantineSet::empty()).unwrap());
            assert_eq!(out.record.set_size, beta_set(&out.graph, &out.final_config).len());
        }
    }

    #[test]
    fn ceiling_is_reported() {
        let mut s = spec(Algorithm::Anonymous, GraphKind::Complete { n: 10 }, DaemonKind::Synchronous);
        s.init = InitPreset::AllBot;
        s.move_ceiling = Some(5);
        let out = run_trial(&s, 0).unwrap();
        assert!(out.record.ceiling_hit && !out.record.converged);
        assert_eq!(out.record.moves, 10);
    }

    #[test]
    fn byzantine_trial_with_hold() {
        let mut s = spec(
            Algorithm::Byzantine,
            GraphKind::Ring { n: 12 },
            DaemonKind::AgedFair {
                bound: None,
                density: 0.5,
            },
        );
        s.byzantine = vec![(0, crate::adversary::ByzantineStrategy::Oscillate)];
        s.hold_rounds = 3;
        let out = run_trial(&s, 4).unwrap();
        assert!(out.record.converged);
        assert!(is_legitimate_byz(&out.graph, &ByzantineSet::new(&out.graph, [0]).unwrap(), &out.final_config));
        let inv = out.invariants.unwrap();
        assert_eq!(inv.violations(), 0);
        assert!(inv.degree_checked);
    }

    #[test]
    fn trials_are_reproducible_and_ordered() {
        let mut s = spec(Algorithm::Anonymous, GraphKind::ErdosRenyi { n: 10, p: 0.3 }, DaemonKind::ConflictGreedy {
            density: 0.5,
        });
        s.trials = 8;
        let a: Vec<TrialRecord> = run_trials(&s).unwrap().into_iter().map(|o| o.record).collect();
        let b: Vec<TrialRecord> = run_trials(&s).unwrap().into_iter().map(|o| o.record).collect();
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(i, r)| r.trial == i as u64));
        let mut csv_a = Vec::new();
        write_trials_csv(&a, &mut csv_a).unwrap();
        let text = String::from_utf8(csv_a).unwrap();
        assert!(text.starts_with("spec_hash,trial,seed,moves,rounds,converged,criterion,set_size,ceiling_hit\n"));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn initial_presets() {
        let g = crate::graph::generate_graph(GraphKind::Star { leaves: 4 }, 0).unwrap();
        let mut rng = RngStream::new(1);
        let adv = sample_initial(Algorithm::Byzantine, &g, InitPreset::AdversarialX, &mut rng);
        assert_eq!(adv.x, Some(vec![5; 5]));
        let top = sample_initial(Algorithm::Anonymous, &g, InitPreset::AllTop, &mut rng);
        assert_eq!((top.s, top.x), (vec![true; 5], None));
        for _ in 0..50 {
            let r = sample_initial(Algorithm::Byzantine, &g, InitPreset::Random, &mut rng);
            assert!(r.x.unwrap().iter().all(|&x| x <= 5));
        }
    }

    #[test]
    fn bounds() {
        assert_eq!(default_move_ceiling(4), 4800);
        // Δ = 2, n = 16: 100·2·16·⌈3e⌉ = 3200·9
        assert_eq!(default_round_ceiling(16, 2), 28_800);
        // 3.41421356·e·3·16 = 445.47…
        assert_eq!(round_bound(16, 2), 446);
    }

    #[test]
    fn sweep_rows() {
        let mut s = spec(Algorithm::Anonymous, GraphKind::Ring { n: 4 }, DaemonKind::Synchronous);
        s.sizes = vec![1, 4, 8];
        s.trials = 10;
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.iter().map(|(r, _)| r.n).collect::<Vec<_>>(), vec![1, 4, 8]);
        let (one, _) = &rows[0];
        assert_eq!((one.moves_mean, one.moves_bound), (rows[0].1.iter().map(|o| o.record.moves as f64).sum::<f64>() / 10.0, 3));
        assert!(one.moves_max <= 1.0);
    }
}
