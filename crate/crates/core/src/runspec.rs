//! Run specifications: a flat `key = value` text format.
//!
//! ```text
//! # comments and blank lines are ignored
//! algorithm   = byzantine
//! graph       = grid(4,8)
//! byzantine   = 0:oscillate, 17:degree_liar(1000000)
//! daemon      = aged_fair(n,0.5)
//! trials      = 100
//! master_seed = 42
//! ```
//!
//! Every key may appear at most once. See [`RunSpec::set`] for the keys and
//! their defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::adversary::{split_call, Adversary, ByzantineStrategy};
use crate::daemon::{DaemonKind, DEFAULT_DENSITY};
use crate::error::{Error, Result};
use crate::graph::{generate_graph, Graph, GraphKind, NodeId};
use crate::state::Algorithm;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    Generated(GraphKind),
    /// Edge-list file, see [`Graph::parse`].
    File(PathBuf),
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Generated(k) => write!(f, "{k}"),
            GraphSpec::File(p) => write!(f, "file({})", p.display()),
        }
    }
}

impl std::str::FromStr for GraphSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match split_call(s)? {
            ("file", Some(path)) if !path.trim().is_empty() => Ok(GraphSpec::File(PathBuf::from(path.trim()))),
            _ => Ok(GraphSpec::Generated(s.parse()?)),
        }
    }
}

/// Initial configuration: sampled or a named preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitPreset {
    /// `s` uniform, `x` uniform in `[0, n]`.
    Random,
    AllBot,
    AllTop,
    /// `s` uniform, `x_u = n` everywhere.
    AdversarialX,
}

impl InitPreset {
    pub fn name(self) -> &'static str {
        match self {
            InitPreset::Random => "random",
            InitPreset::AllBot => "all_bot",
            InitPreset::AllTop => "all_top",
            InitPreset::AdversarialX => "adversarial_x",
        }
    }
}

impl std::str::FromStr for InitPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [InitPreset::Random, InitPreset::AllBot, InitPreset::AllTop, InitPreset::AdversarialX]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown init preset `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub algorithm: Algorithm,
    pub graph: GraphSpec,
    /// Fixed seed for random graph families. `None` draws a fresh graph per
    /// trial from the trial seed.
    pub graph_seed: Option<u64>,
    pub byzantine: Vec<(NodeId, ByzantineStrategy)>,
    pub daemon: DaemonKind,
    pub byzantine_eager: bool,
    pub init: InitPreset,
    pub trials: u64,
    pub master_seed: u64,
    pub move_ceiling: Option<u64>,
    pub round_ceiling: Option<u64>,
    /// Extra complete rounds a legitimate configuration must survive.
    pub hold_rounds: u64,
    /// Graph sizes for sweeps; the graph family is resized to each.
    pub sizes: Vec<usize>,
    /// Attach the color ledger (anonymous algorithm only).
    pub colors: bool,
    /// Check the monotonicity, independence and degree invariants on every
    /// transition.
    pub invariants: bool,
    /// Record a full trace of each trial.
    pub trace: bool,
    pub output: Option<PathBuf>,
}

impl RunSpec {
    pub fn new(algorithm: Algorithm, graph: GraphKind) -> Self {
        RunSpec {
            algorithm,
            graph: GraphSpec::Generated(graph),
            graph_seed: None,
            byzantine: Vec::new(),
            daemon: DaemonKind::AgedFair {
                bound: None,
                density: DEFAULT_DENSITY,
            },
            byzantine_eager: false,
            init: InitPreset::Random,
            trials: 1,
            master_seed: 0,
            move_ceiling: None,
            round_ceiling: None,
            hold_rounds: 0,
            sizes: Vec::new(),
            colors: false,
            invariants: true,
            trace: false,
            output: None,
        }
    }

    /// Parses a spec. `algorithm` and `graph` are required.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, "expected `key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            if pairs.iter().any(|(_, key, _): &(usize, &str, &str)| *key == k) {
                return Err(Error::parse(i + 1, format!("duplicate key `{k}`")));
            }
            pairs.push((i + 1, k, v));
        }
        let get = |key: &str| pairs.iter().find(|(_, k, _)| *k == key);
        let (line, _, algo) = get("algorithm").ok_or_else(|| Error::parse(1, "missing key `algorithm`"))?;
        let algorithm = algo.parse().map_err(|e: Error| Error::parse(*line, e.to_string()))?;
        let (line, _, graph) = get("graph").ok_or_else(|| Error::parse(1, "missing key `graph`"))?;
        let graph: GraphSpec = graph.parse().map_err(|e: Error| Error::parse(*line, e.to_string()))?;
        let mut spec = RunSpec::new(algorithm, GraphKind::Ring { n: 1 });
        spec.graph = graph;
        for &(line, k, v) in &pairs {
            if k != "algorithm" && k != "graph" {
                spec.set(k, v).map_err(|e| Error::parse(line, e.to_string()))?;
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one key. Used by the parser and for command-line overrides.
    ///
    /// | key | value | default |
    /// |---|---|---|
    /// | `algorithm` | `byzantine` or `anonymous` | required |
    /// | `graph` | `ring(n)`, `path(n)`, `star(leaves)`, `complete(n)`, `grid(r,c)`, `erdos_renyi(n,p)`, `random_tree(n)`, `file(path)` | required |
    /// | `graph_seed` | u64 or `none` | none |
    /// | `byzantine` | `node:strategy` list | empty |
    /// | `daemon` | see [`DaemonKind`] | `aged_fair(n,0.5)` |
    /// | `init` | `random`, `all_bot`, `all_top`, `adversarial_x` | `random` |
    /// | `trials`, `master_seed` (alias `seed`), `hold_rounds` | u64 | 1, 0, 0 |
    /// | `move_ceiling`, `round_ceiling` | u64 or `auto` | auto |
    /// | `sizes` | comma list | empty |
    /// | `byzantine_eager`, `colors`, `invariants`, `trace` | bool | false, false, true, false |
    /// | `output` | path or `none` | none |
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "algorithm" => self.algorithm = v.parse()?,
            "graph" => self.graph = v.parse()?,
            "graph_seed" => self.graph_seed = optional(v, "none", parse_u64)?,
            "byzantine" => self.byzantine = parse_byzantine(v)?,
            "daemon" => self.daemon = v.parse()?,
            "byzantine_eager" => self.byzantine_eager = parse_bool(v)?,
            "init" => self.init = v.parse()?,
            "trials" => self.trials = parse_u64(v)?,
            "master_seed" | "seed" => self.master_seed = parse_u64(v)?,
            "move_ceiling" => self.move_ceiling = optional(v, "auto", parse_u64)?,
            "round_ceiling" => self.round_ceiling = optional(v, "auto", parse_u64)?,
            "hold_rounds" => self.hold_rounds = parse_u64(v)?,
            "sizes" => {
                self.sizes = if v.is_empty() {
                    Vec::new()
                } else {
                    v.split(',')
                        .map(|s| {
                            s.trim()
                                .parse::<usize>()
                                .map_err(|e| Error::Config(format!("bad size `{s}`: {e}")))
                        })
                        .collect::<Result<_>>()?
                }
            }
            "colors" => self.colors = parse_bool(v)?,
            "invariants" => self.invariants = parse_bool(v)?,
            "trace" => self.trace = parse_bool(v)?,
            "output" => self.output = optional(v, "none", |s| Ok(PathBuf::from(s)))?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Checks the constraints between keys that do not need the graph.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.algorithm == Algorithm::Anonymous && !self.byzantine.is_empty() {
            return Err(Error::Config(
                "the anonymous algorithm converges to a stable configuration only without byzantine nodes".into(),
            ));
        }
        if self.colors && self.algorithm != Algorithm::Anonymous {
            return Err(Error::Config("color instrumentation applies to the anonymous algorithm".into()));
        }
        if matches!(self.daemon, DaemonKind::Scripted(_)) {
            return Err(Error::Config("scripted daemons cannot be given in a run spec".into()));
        }
        if !self.sizes.is_empty() {
            if matches!(self.graph, GraphSpec::File(_)) {
                return Err(Error::Config("sizes cannot resize a graph file".into()));
            }
            if self.sizes.contains(&0) {
                return Err(Error::Config("sizes must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// Copy of the spec with the graph family resized to `n` nodes.
    pub fn with_size(&self, n: usize) -> Result<RunSpec> {
        match &self.graph {
            GraphSpec::Generated(kind) => {
                let mut spec = self.clone();
                spec.graph = GraphSpec::Generated(kind.with_size(n));
                spec.sizes.clear();
                Ok(spec)
            }
            GraphSpec::File(_) => Err(Error::Config("sizes cannot resize a graph file".into())),
        }
    }

    /// The graph of a trial. Random families use `graph_seed` when set and
    /// `trial_seed` otherwise.
    pub fn build_graph(&self, trial_seed: u64) -> Result<Graph> {
        match &self.graph {
            GraphSpec::Generated(kind) => generate_graph(*kind, self.graph_seed.unwrap_or(trial_seed)),
            GraphSpec::File(path) => Graph::parse(&std::fs::read_to_string(path)?),
        }
    }

    pub fn build_adversary(&self, g: &Graph) -> Result<Adversary> {
        Adversary::new(g, self.byzantine.iter().copied())
    }

    /// Canonical text: every key in a fixed order with explicit values.
    /// [`RunSpec::parse`] of this text yields an equal spec.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<u64>, none: &str| v.map_or(none.to_string(), |v| v.to_string());
        let byz = self
            .byzantine
            .iter()
            .map(|(u, st)| format!("{u}:{st}"))
            .collect::<Vec<_>>()
            .join(", ");
        let sizes = self.sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let output = self
            .output
            .as_ref()
            .map_or("none".to_string(), |p| p.display().to_string());
        format!(
            "algorithm = {}\ngraph = {}\ngraph_seed = {}\nbyzantine = {byz}\ndaemon = {}\nbyzantine_eager = {}\n\
             init = {}\ntrials = {}\nmaster_seed = {}\nmove_ceiling = {}\nround_ceiling = {}\nhold_rounds = {}\n\
             sizes = {sizes}\ncolors = {}\ninvariants = {}\ntrace = {}\noutput = {output}\n",
            self.algorithm.name(),
            self.graph,
            opt(self.graph_seed, "none"),
            self.daemon,
            self.byzantine_eager,
            self.init.name(),
            self.trials,
            self.master_seed,
            opt(self.move_ceiling, "auto"),
            opt(self.round_ceiling, "auto"),
            self.hold_rounds,
            self.colors,
            self.invariants,
            self.trace,
        )
    }

    /// First 16 hex digits of the SHA-256 of the canonical text, with the
    /// output path left out so it only identifies the experiment.
    pub fn hash(&self) -> String {
        let mut spec = self.clone();
        spec.output = None;
        let digest = Sha256::digest(spec.to_text().as_bytes());
        hex::encode(&digest[..8])
    }
}

fn optional<T>(v: &str, none: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Option<T>> {
    if v == none {
        Ok(None)
    } else {
        parse(v).map(Some)
    }
}

fn parse_u64(v: &str) -> Result<u64> {
    v.parse().map_err(|e| Error::Config(format!("bad integer `{v}`: {e}")))
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!("bad boolean `{other}`"))),
    }
}

/// `node:strategy` entries separated by commas outside parentheses.
fn parse_byzantine(v: &str) -> Result<Vec<(NodeId, ByzantineStrategy)>> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    let mut pieces = Vec::new();
    for (i, c) in v.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                pieces.push(&v[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    pieces.push(&v[start..]);
    for piece in pieces.into_iter().map(str::trim) {
        if piece.is_empty() {
            if v.trim().is_empty() {
                continue;
            }
            return Err(Error::Config("empty byzantine entry".into()));
        }
        let (node, strategy) = piece
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("byzantine entry `{piece}` is not node:strategy")))?;
        let node = node
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("bad byzantine node `{node}`: {e}")))?;
        out.push((node, strategy.parse()?));
    }
    Ok(out)
}
