use std::path::Path;
use std::process::{Command, Output};

fn t2qc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_t2qc")).args(args).output().expect("binary runs")
}

fn t2qc_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_t2qc")).args(args).env("T2QC_THREADS", threads).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

#[test]
fn verify_passes_for_shipped_circuits() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v1.csv");
    let o = t2qc(&["verify", "--dim", "1", "--temps", "0.5,2,10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 24);
    assert!(rows.iter().all(|r| &r[7] == "true"));

    let o = t2qc(&["verify", "--dim", "2", "--temps", "2.269"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("temperature,input_bits,delta_e,expected_prob,observed_prob,abs_error,neighbors_preserved,pass"));
    assert_eq!(text.lines().count(), 33);
}

#[test]
fn verify_catches_a_dropped_gate() {
    let o = t2qc(&["verify", "--dim", "2", "--temps", "2", "--drop-gate", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("failed"));
    let o = t2qc(&["verify", "--dim", "2", "--drop-gate", "999"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--drop-gate"));
}

#[test]
fn truthtable_rows() {
    let o = t2qc(&["truthtable", "--dim", "1", "--temp", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = |prefix: &str| text.lines().find(|l| l.starts_with(prefix)).unwrap().to_string();
    let easy = row("↓ ↓ ↑");
    assert!(easy.contains("→ |↑⟩") && easy.contains(" 1 "), "{easy}");
    let aligned = row("↑ ↑ ↑");
    assert!(aligned.contains("√P|↓⟩") && aligned.contains("0.1353"), "{aligned}");

    let o = t2qc(&["truthtable", "--dim", "2", "--temp", "2"]);
    assert_eq!(stdout(&o).lines().filter(|l| l.contains('→')).count(), 32);
    assert_eq!(t2qc(&["truthtable", "--dim", "3", "--temp", "2"]).status.code(), Some(2));
    let o = t2qc(&["truthtable", "--dim", "1", "--temp", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--temp"));
}

#[test]
fn accuracy_table() {
    let o = t2qc(&["accuracy", "--delta-t", "0.1", "--t-range", "0.5:4:0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("T,delta_p_1d,delta_p_2d"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 36);
    let at2 = rows.iter().find(|r| r[0] == 2.0).unwrap();
    assert!((at2[2] - 0.018394).abs() < 1e-6);

    let o = t2qc(&["accuracy", "--t-range", "0:4:0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--t-range"));
    assert_eq!(t2qc(&["accuracy", "--delta-t", "0"]).status.code(), Some(2));
}

#[test]
fn sweep_validation_names_the_flag() {
    for (args, flag) in [
        (vec!["--t-step", "0"], "--t-step"),
        (vec!["--size", "3x4"], "--size"),
        (vec!["--min-iters", "50", "--max-iters", "10"], "--min-iters"),
        (vec!["--gate-error", "0.1"], "--gate-error"),
        (vec!["--dim", "3"], "--dim"),
        (vec!["--threshold", "0"], "--threshold"),
    ] {
        let mut full = vec!["sweep", "--mode", "classical"];
        full.extend(args);
        let o = t2qc(&full);
        assert_eq!(o.status.code(), Some(2), "{full:?}");
        assert!(stderr(&o).contains(flag), "{full:?}: {}", stderr(&o));
    }
    assert_eq!(t2qc(&["sweep", "--mode", "quantum"]).status.code(), Some(2));
    let o = t2qc_env(&["sweep", "--mode", "classical", "--temps", "1"], "many");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("T2QC_THREADS"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let o = t2qc(&["sweep", "--mode", "classical", "--temps", "1", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn ensemble_sweep_reports_critical_temperature() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.csv");
    let o = t2qc(&[
        "sweep", "--mode", "ensemble", "--dim", "2", "--size", "2x2", "--t-start", "0.5", "--t-end", "4", "--t-step", "0.01",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let line = stdout(&o).lines().find(|l| l.starts_with("T_c estimate")).unwrap().to_string();
    let tc: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((2.09..=2.13).contains(&tc), "{line}");
    assert_eq!(csv_rows(&out).len(), 351);
}

#[test]
fn classical_sweep_is_ordered_at_low_temperature() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = t2qc(&[
        "sweep", "--mode", "classical", "--dim", "2", "--size", "64x64", "--temps", "1.5", "--max-iters", "200",
        "--samples", "50", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&out);
    assert_eq!(&rows[0][1], "classical");
    assert_eq!(&rows[0][3], "64x64");
    assert!(rows[0][5].parse::<f64>().unwrap() > 0.95);
}

#[test]
fn same_flags_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = t2qc_env(
            &[
                "sweep", "--mode", "oneshot", "--size", "16x16", "--t-start", "2", "--t-end", "2.4", "--t-step", "0.2",
                "--max-iters", "30", "--samples", "10", "--init", "random", "--seed", "5", "--out",
                out.to_str().unwrap(),
            ],
            threads,
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv", "1");
    assert_eq!(a, run("b.csv", "1"));
    assert_eq!(a, run("c.csv", "3"));
}

#[test]
fn snapshots() {
    let o = t2qc(&["snapshot", "--mode", "classical", "--size", "8x6", "--temps", "3", "--max-iters", "30"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 8);
    assert!(lines.iter().all(|l| l.len() == 6 && l.chars().all(|c| c == '+' || c == '-')));

    let o = t2qc(&["snapshot", "--mode", "ensemble", "--size", "2x2", "--temps", "1.5"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.split(' ').all(|v| v.starts_with('+') && v.len() == 9)), "{text}");
}
