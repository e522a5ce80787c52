//! The checked-in fuzz seeds stay valid inputs, so the fuzzers start from
//! inputs that reach deep into each parser.

use std::path::PathBuf;

use stabmis::adversary::ByzantineStrategy;
use stabmis::daemon::DaemonKind;
use stabmis::runspec::RunSpec;
use stabmis::trace::{parse_trace, write_trace};
use stabmis::{Graph, GraphKind};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (path.display().to_string(), std::fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn graph_seeds_parse() {
    for (name, text) in seeds("parse_graph") {
        let g = Graph::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(Graph::parse(&g.to_text()).unwrap(), g);
    }
}

#[test]
fn runspec_seeds_parse() {
    for (name, text) in seeds("parse_runspec") {
        let spec = RunSpec::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(RunSpec::parse(&spec.to_text()).unwrap(), spec);
    }
}

#[test]
fn trace_seeds_parse() {
    for (name, text) in seeds("parse_trace") {
        let t = parse_trace(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_trace(&write_trace(&t)).unwrap(), t);
    }
}

#[test]
fn name_seeds_parse() {
    for (name, text) in seeds("parse_names") {
        let text = text.trim();
        let ok = text.parse::<GraphKind>().is_ok()
            || text.parse::<DaemonKind>().is_ok()
            || text.parse::<ByzantineStrategy>().is_ok();
        assert!(ok, "{name}: `{text}` parses as nothing");
    }
}
