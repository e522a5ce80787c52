use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stabmis::analysis::brute_force_maximal_independent_sets;
use stabmis::harness::{run_sweep, run_trial, run_trials, write_sweep_csv, write_trials_csv, TrialRecord};
use stabmis::runspec::RunSpec;
use stabmis::trace::{parse_trace, verify_trace, write_trace};
use stabmis::{golden, Algorithm, ByzantineSet, Error, Graph, Result};

/// Directory for outputs when neither `--out` nor the spec names a file.
const OUT_DIR_VAR: &str = "STABMIS_OUT_DIR";

#[derive(Parser)]
#[command(name = "stabmis", version, about = "Self-stabilizing MIS simulation laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the trials of a spec and write one CSV row per trial.
    Trial {
        #[command(flatten)]
        spec: SpecArgs,
        /// Run only this trial index.
        #[arg(long)]
        index: Option<u64>,
        /// Write the trace dump of the trial (needs --index).
        #[arg(long, requires = "index")]
        trace: Option<PathBuf>,
        /// Write the per-color CSV of the trial (needs --index).
        #[arg(long, requires = "index")]
        colors: Option<PathBuf>,
    },
    /// Run the spec once per size in `sizes` and write aggregate statistics.
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        /// Also write every trial row here.
        #[arg(long)]
        trials_out: Option<PathBuf>,
    },
    /// Check the built-in worked example, or a trace dump against a graph.
    Replay {
        #[arg(long, requires_all = ["graph", "algorithm"])]
        trace: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        algorithm: Option<Algorithm>,
        /// Byzantine nodes of the traced run, comma separated.
        #[arg(long, value_delimiter = ',')]
        byzantine: Vec<usize>,
    },
    /// List every maximal independent set of a graph file (n ≤ 16).
    Oracle {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Args)]
struct SpecArgs {
    /// Run spec file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Override or supply a key, e.g. `--set trials=50`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output CSV path; `-` for stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SpecArgs {
    fn load(&self) -> Result<RunSpec> {
        let mut pairs = Vec::new();
        for s in &self.sets {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got `{s}`")))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut spec = match &self.spec {
            Some(path) => RunSpec::from_file(path)?,
            None => {
                // algorithm and graph must then come from --set
                let text: String = pairs
                    .iter()
                    .filter(|(k, _)| k == "algorithm" || k == "graph")
                    .map(|(k, v)| format!("{k} = {v}\n"))
                    .collect();
                RunSpec::parse(&text)?
            }
        };
        for (k, v) in &pairs {
            spec.set(k, v)?;
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn output(explicit: Option<&Path>, spec: &RunSpec, suffix: &str) -> Result<Box<dyn Write>> {
    let path = match explicit.or(spec.output.as_deref()) {
        Some(p) if p == Path::new("-") => None,
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(OUT_DIR_VAR).map(|dir| PathBuf::from(dir).join(format!("{}-{suffix}.csv", spec.hash()))),
    };
    Ok(match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            Box::new(File::create(p)?)
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn trial(spec: RunSpec, out: Option<&Path>, index: Option<u64>, trace: Option<&Path>, colors: Option<&Path>) -> Result<()> {
    let records: Vec<TrialRecord> = match index {
        Some(i) => {
            let mut spec = spec.clone();
            spec.trace |= trace.is_some();
            if colors.is_some() {
                spec.colors = true;
                spec.validate()?;
            }
            let outcome = run_trial(&spec, i)?;
            if let (Some(path), Some(t)) = (trace, &outcome.trace) {
                std::fs::write(path, write_trace(t))?;
            }
            if let (Some(path), Some(ledger)) = (colors, &outcome.colors) {
                ledger.write_csv(File::create(path)?)?;
            }
            vec![outcome.record]
        }
        None => run_trials(&spec)?.into_iter().map(|o| o.record).collect(),
    };
    write_trials_csv(&records, output(out, &spec, "trials")?)
}

fn sweep(spec: RunSpec, out: Option<&Path>, trials_out: Option<&Path>) -> Result<()> {
    let results = run_sweep(&spec)?;
    let rows: Vec<_> = results.iter().map(|(row, _)| row.clone()).collect();
    write_sweep_csv(&rows, output(out, &spec, "sweep")?)?;
    if let Some(path) = trials_out {
        let records: Vec<TrialRecord> = results
            .into_iter()
            .flat_map(|(_, outcomes)| outcomes.into_iter().map(|o| o.record))
            .collect();
        write_trials_csv(&records, File::create(path)?)?;
    }
    Ok(())
}

fn replay(trace: Option<&Path>, graph: Option<&Path>, algorithm: Option<Algorithm>, byzantine: &[usize]) -> Result<()> {
    match (trace, graph, algorithm) {
        (Some(trace), Some(graph), Some(algo)) => {
            let g = Graph::parse(&std::fs::read_to_string(graph)?)?;
            let b = ByzantineSet::new(&g, byzantine.iter().copied())?;
            let t = parse_trace(&std::fs::read_to_string(trace)?)?;
            verify_trace(&g, algo, &b, &t)?;
            println!("trace ok: {} transitions, {} moves", t.steps.len(), t.move_count());
        }
        _ => {
            let run = golden::run()?;
            golden::check(&run)?;
            print!("{}", write_trace(&run.trace));
            println!("golden example ok: {} moves, final set {:?}", run.trace.move_count(), run.beta);
        }
    }
    Ok(())
}

fn oracle(graph: &Path) -> Result<()> {
    let g = Graph::parse(&std::fs::read_to_string(graph)?)?;
    let mut out = io::stdout().lock();
    for set in brute_force_maximal_independent_sets(&g)? {
        let line: Vec<String> = set.iter().map(usize::to_string).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Trial {
            spec,
            index,
            trace,
            colors,
        } => spec
            .load()
            .and_then(|s| trial(s, spec.out.as_deref(), *index, trace.as_deref(), colors.as_deref())),
        Command::Sweep { spec, trials_out } => spec
            .load()
            .and_then(|s| sweep(s, spec.out.as_deref(), trials_out.as_deref())),
        Command::Replay {
            trace,
            graph,
            algorithm,
            byzantine,
        } => replay(trace.as_deref(), graph.as_deref(), *algorithm, byzantine),
        Command::Oracle { graph } => oracle(graph),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stabmis: {e}");
            match e {
                Error::Config(_) | Error::Parse { .. } | Error::Usage(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
