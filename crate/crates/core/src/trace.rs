//! Text dump of a [`Trace`] and an independent re-checker.
//!
//! ```text
//! # trace seed=7
//! 0 - 0000
//! 1 0:candidacy:-,1:candidacy:-,2:candidacy:-,3:candidacy:- 1111
//! 2 0:withdrawal?:0,1:withdrawal?:0 1111
//! # round_ends=1,2
//! ```
//!
//! Each line holds the transition index, the moves as `node:rule:draw`
//! (`-` for deterministic rules), the `s`-vector as 0/1 and, for the
//! Byzantine-tolerant algorithm, the comma-separated `x`-vector. Line `0` is
//! the initial configuration.

use std::fmt::Write as _;

use crate::engine::{activable_map, Move, MoveSet, Step, Trace};
use crate::error::{Error, Result};
use crate::graph::{ByzantineSet, Graph};
use crate::state::{Algorithm, Configuration, Rule};

fn config_fields(cfg: &Configuration) -> String {
    match cfg.x_string() {
        Some(x) => format!("{} {x}", cfg.s_string()),
        None => cfg.s_string(),
    }
}

pub fn write_trace(trace: &Trace) -> String {
    let mut out = format!("# trace seed={}\n0 - {}\n", trace.seed, config_fields(&trace.initial));
    for (i, step) in trace.steps.iter().enumerate() {
        let moves = step
            .moves
            .moves()
            .iter()
            .zip(&step.draws)
            .map(|(m, d)| {
                let d = match d {
                    Some(true) => "1",
                    Some(false) => "0",
                    None => "-",
                };
                format!("{}:{}:{d}", m.node, m.rule)
            })
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(out, "{} {moves} {}", i + 1, config_fields(&step.after));
    }
    let ends = trace.round_ends.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    let _ = writeln!(out, "# round_ends={ends}");
    out
}

fn parse_config(line: usize, s: &str, x: Option<&str>) -> Result<Configuration> {
    let s = s
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::parse(line, format!("bad s-value `{other}`"))),
        })
        .collect::<Result<Vec<_>>>()?;
    match x {
        None => Ok(Configuration::anonymous(s)),
        Some(x) => {
            let x = x
                .split(',')
                .map(|v| v.parse::<u64>().map_err(|e| Error::parse(line, format!("bad x-value `{v}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if x.len() != s.len() {
                return Err(Error::parse(line, "s- and x-vectors differ in length"));
            }
            Ok(Configuration::byzantine(s, x))
        }
    }
}

fn parse_move(line: usize, entry: &str) -> Result<(Move, Option<bool>)> {
    let mut parts = entry.split(':');
    let (Some(node), Some(rule), Some(draw), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
        return Err(Error::parse(line, format!("move `{entry}` is not node:rule:draw")));
    };
    let node = node
        .parse()
        .map_err(|e| Error::parse(line, format!("bad node `{node}`: {e}")))?;
    let rule: Rule = rule.parse().map_err(|e: Error| Error::parse(line, e.to_string()))?;
    let draw = match draw {
        "0" => Some(false),
        "1" => Some(true),
        "-" => None,
        other => return Err(Error::parse(line, format!("bad draw `{other}`"))),
    };
    if draw.is_some() != rule.is_probabilistic() {
        return Err(Error::parse(line, format!("draw `{}` does not fit rule {rule}", draw.map_or("-", |_| "0/1"))));
    }
    Ok((Move::new(node, rule), draw))
}

fn parse_indices(line: usize, s: &str) -> Result<Vec<usize>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|v| v.parse().map_err(|e| Error::parse(line, format!("bad index `{v}`: {e}"))))
        .collect()
}

/// Parses the dump written by [`write_trace`]. Only the shape is checked;
/// use [`verify_trace`] to check the transitions against a graph.
pub fn parse_trace(text: &str) -> Result<Trace> {
    let mut seed = 0;
    let mut round_ends = Vec::new();
    let mut initial: Option<Configuration> = None;
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(comment) = l.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("trace seed=") {
                seed = v.parse().map_err(|e| Error::parse(line, format!("bad seed: {e}")))?;
            } else if let Some(v) = comment.strip_prefix("round_ends=") {
                round_ends = parse_indices(line, v)?;
            }
            continue;
        }
        let fields: Vec<&str> = l.split_whitespace().collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(Error::parse(line, "expected `index moves s [x]`"));
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|e| Error::parse(line, format!("bad index: {e}")))?;
        let cfg = parse_config(line, fields[2], fields.get(3).copied())?;
        match &initial {
            None => {
                if index != 0 || fields[1] != "-" {
                    return Err(Error::parse(line, "first line must be `0 - <configuration>`"));
                }
                initial = Some(cfg);
            }
            Some(init) => {
                if index != steps.len() + 1 {
                    return Err(Error::parse(line, format!("expected transition {}", steps.len() + 1)));
                }
                if cfg.len() != init.len() || cfg.x.is_some() != init.x.is_some() {
                    return Err(Error::parse(line, "configuration shape changed"));
                }
                let mut moves = Vec::new();
                let mut draws = Vec::new();
                for entry in fields[1].split(',') {
                    let (m, d) = parse_move(line, entry)?;
                    moves.push(m);
                    draws.push(d);
                }
                let set = MoveSet::from_moves(moves.iter().copied());
                if set.moves() != moves.as_slice() {
                    return Err(Error::parse(line, "moves must be listed in node order"));
                }
                steps.push(Step {
                    moves: set,
                    draws,
                    after: cfg,
                });
            }
        }
    }
    let initial = initial.ok_or_else(|| Error::parse(1, "empty trace"))?;
    if round_ends.windows(2).any(|w| w[0] >= w[1]) || round_ends.last().is_some_and(|&e| e > steps.len() || e == 0) {
        return Err(Error::parse(1, "round boundaries must be increasing transition indices"));
    }
    Ok(Trace {
        seed,
        initial,
        steps,
        round_ends,
    })
}

/// Re-executes every transition of `trace` with its logged coins and checks
/// the logged configurations. Byzantine nodes in `b` may move with `byz`;
/// their new state is taken from the log.
pub fn verify_trace(g: &Graph, algo: Algorithm, b: &ByzantineSet, trace: &Trace) -> Result<()> {
    trace.initial.check_shape(g, algo)?;
    let mut cfg = trace.initial.clone();
    for (i, step) in trace.steps.iter().enumerate() {
        let index = i + 1;
        let activable = activable_map(algo, g, &cfg, b);
        step.moves
            .validate(&activable)
            .map_err(|e| Error::Script(format!("transition {index}: {e}")))?;
        step.after.check_shape(g, algo)?;
        let mut next = cfg.clone();
        for (m, draw) in step.moves.moves().iter().zip(&step.draws) {
            let coin = draw.unwrap_or(false);
            match m.rule {
                Rule::ByzAct => {
                    next.s[m.node] = step.after.s[m.node];
                    if let (Some(x), Some(logged)) = (next.x.as_mut(), step.after.x.as_ref()) {
                        x[m.node] = logged[m.node];
                    }
                }
                Rule::Candidacy | Rule::WithdrawalQ => crate::anonymous::execute(m.rule, &mut next, m.node, coin),
                _ => crate::byzantine::execute(m.rule, g, &mut next, m.node, coin),
            }
        }
        if next != step.after {
            return Err(Error::Script(format!(
                "transition {index}: expected {}, trace has {}",
                config_fields(&next),
                config_fields(&step.after)
            )));
        }
        cfg = next;
    }
    Ok(())
}
