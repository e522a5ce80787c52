use std::path::Path;
use std::process::{Command, Output};

fn stabmis(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabmis"))
        .args(args)
        .current_dir(dir)
        .env_remove("STABMIS_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SPEC: &str = "algorithm = anonymous\ngraph = erdos_renyi(10,0.3)\ndaemon = random_subset(0.5)\ntrials = 6\nmaster_seed = 3\n";

#[test]
fn replay_golden_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = stabmis(&["replay"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("golden example ok: 18 moves, final set [1, 3]"));
    assert!(text.starts_with("# trace seed=0\n0 - 0000\n"));
}

#[test]
fn trial_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.spec"), SPEC).unwrap();
    let a = stabmis(&["trial", "--spec", "run.spec"], dir.path());
    let b = stabmis(&["trial", "--spec", "run.spec", "--out", "b.csv"], dir.path());
    assert!(a.status.success() && b.status.success());
    let b_text = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(stdout(&a), b_text);
    let lines: Vec<&str> = b_text.lines().collect();
    assert_eq!(lines[0], "spec_hash,trial,seed,moves,rounds,converged,criterion,set_size,ceiling_hit");
    assert_eq!(lines.len(), 7);
    assert!(lines[1..].iter().all(|l| l.contains(",true,stable,")));
}

#[test]
fn set_overrides_and_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.spec"), SPEC).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_stabmis"))
        .args(["sweep", "--spec", "run.spec", "--set", "sizes=4,8", "--set", "trials=5"])
        .current_dir(dir.path())
        .env("STABMIS_OUT_DIR", dir.path().join("results"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let files: Vec<_> = std::fs::read_dir(dir.path().join("results")).unwrap().collect();
    assert_eq!(files.len(), 1);
    let path = files[0].as_ref().unwrap().path();
    assert!(path.to_string_lossy().ends_with("-sweep.csv"));
    let text = std::fs::read_to_string(path).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("spec_hash,graph,n,max_degree,trials,converged,moves_mean"));
    assert!(rows[1].contains(",4,") && rows[2].contains(",8,"));
}

#[test]
fn spec_from_set_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = stabmis(
        &["trial", "--set", "algorithm=byzantine", "--set", "graph=ring(8)", "--set", "byzantine=0:oscillate", "--set", "daemon=synchronous"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains(",legitimate,"));
}

#[test]
fn configuration_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["trial", "--set", "algorithm=anonymous"],
        vec!["trial", "--set", "algorithm=anonymous", "--set", "graph=ring(4)", "--set", "trials=0"],
        vec!["trial", "--set", "algorithm=anonymous", "--set", "graph=ring(4)", "--set", "byzantine=0:silent"],
        vec!["trial", "--spec", "missing.spec"],
        vec!["oracle", "--graph", "missing.txt"],
    ] {
        let out = stabmis(&args, dir.path());
        assert!(!out.status.success(), "{args:?}");
    }
}

#[test]
fn trace_written_then_replayed() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.spec"), SPEC).unwrap();
    let out = stabmis(
        &["trial", "--spec", "run.spec", "--index", "2", "--trace", "t.txt", "--colors", "c.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(dir.path().join("c.csv")).unwrap().starts_with("color,birth,death,size"));

    // the trial's graph is needed to check the trace; regenerate it the same way
    let spec = stabmis::runspec::RunSpec::parse(SPEC).unwrap();
    let seed = stabmis::rng::trial_seed(spec.master_seed, 2);
    let g = spec.build_graph(stabmis::rng::trial_seed(seed, u64::MAX)).unwrap();
    std::fs::write(dir.path().join("g.txt"), g.to_text()).unwrap();
    let ok = stabmis(&["replay", "--trace", "t.txt", "--graph", "g.txt", "--algorithm", "anonymous"], dir.path());
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));

    // flip one logged configuration bit
    let text = std::fs::read_to_string(dir.path().join("t.txt")).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let last = lines.iter().rposition(|l| !l.starts_with('#')).unwrap();
    let mut fields: Vec<String> = lines[last].split(' ').map(String::from).collect();
    let s = fields[2].clone();
    let flipped: String = s
        .chars()
        .enumerate()
        .map(|(i, c)| if i == 0 { if c == '0' { '1' } else { '0' } } else { c })
        .collect();
    fields[2] = flipped;
    lines[last] = fields.join(" ");
    std::fs::write(dir.path().join("bad.txt"), lines.join("\n")).unwrap();
    let bad = stabmis(&["replay", "--trace", "bad.txt", "--graph", "g.txt", "--algorithm", "anonymous"], dir.path());
    assert!(!bad.status.success());
}

#[test]
fn oracle_lists_maximal_independent_sets() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.txt"), "4 4\n0 1\n0 2\n1 2\n2 3\n").unwrap();
    let out = stabmis(&["oracle", "--graph", "g.txt"], dir.path());
    assert!(out.status.success());
    let mut sets: Vec<String> = stdout(&out).lines().map(String::from).collect();
    sets.sort();
    assert_eq!(sets, vec!["0 3", "1 3", "2"]);
}
