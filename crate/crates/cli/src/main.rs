use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use t2qc::accuracy::{accuracy_table, AccuracyRow};
use t2qc::circuits::{build_circuit, verify_circuit, Dim, IsingParams, VerificationReport};
use t2qc::engine::{
    critical_temperature_estimate, write_records_csv, ConfigError, InitialState, Mode, NodeKernel, Simulator,
    SweepConfig, SweepRecord, DEFAULT_TC_THRESHOLD,
};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{failed} of {total} truth-table rows failed")]
    Verification { failed: usize, total: usize },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification { .. } => 1,
            CliError::Validation(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn invalid(flag: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("--{flag}: {message}"))
}

#[derive(Parser)]
#[command(name = "t2qc", version, about = "Type-II quantum computer simulator for the Ising model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a temperature sweep and write one CSV row per temperature.
    Sweep(SweepArgs),
    /// Check the node circuit against the Metropolis rule for every classical input.
    Verify(VerifyArgs),
    /// Print the node truth table at one temperature.
    Truthtable(TruthtableArgs),
    /// Write the rotation accuracy needed for a temperature resolution.
    Accuracy(AccuracyArgs),
    /// Run a sweep and write the final lattice as text.
    Snapshot(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Oneshot,
    Ensemble,
    Classical,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Oneshot => Mode::OneShot,
            ModeArg::Ensemble => Mode::Ensemble,
            ModeArg::Classical => Mode::Classical,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Ground,
    Random,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long, default_value_t = 2)]
    dim: u8,
    /// NxM for 2D, N (or 1xN) for 1D. Defaults to 64x64, or 2x2 in ensemble mode.
    #[arg(long)]
    size: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    t_start: f64,
    #[arg(long, default_value_t = 4.0)]
    t_end: f64,
    #[arg(long, default_value_t = 0.01)]
    t_step: f64,
    /// Comma-separated temperatures; replaces the start/end/step grid.
    #[arg(long, value_delimiter = ',')]
    temps: Option<Vec<f64>>,
    #[arg(long)]
    min_iters: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Equilibration tolerance: running-mean drift of |M| for discrete modes,
    /// largest per-site change for ensemble mode.
    #[arg(long)]
    equil_tol: Option<f64>,
    /// Sweeps averaged per temperature after equilibration.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = InitArg::Ground)]
    init: InitArg,
    /// Visit temperatures from hot to cold.
    #[arg(long)]
    cool: bool,
    /// Amplitude error bound for the probability-qubit rotations (oneshot only).
    #[arg(long)]
    gate_error: Option<f64>,
    /// Restart every temperature from the initial state.
    #[arg(long)]
    independent: bool,
    /// |M| threshold for the critical-temperature estimate.
    #[arg(long, default_value_t = DEFAULT_TC_THRESHOLD)]
    threshold: f64,
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    dim: u8,
    #[arg(long, value_delimiter = ',', default_value = "0.5,2,10")]
    temps: Vec<f64>,
    /// Report CSV; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Remove gate N from the circuit before verifying.
    #[arg(long, hide = true)]
    drop_gate: Option<usize>,
}

#[derive(Args)]
struct TruthtableArgs {
    #[arg(long)]
    dim: u8,
    #[arg(long)]
    temp: f64,
}

#[derive(Args)]
struct AccuracyArgs {
    #[arg(long, default_value_t = 0.1)]
    delta_t: f64,
    /// start:end:step
    #[arg(long, default_value = "0.5:4:0.1")]
    t_range: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_dim(d: u8) -> Result<Dim, CliError> {
    Dim::from_number(d).ok_or_else(|| invalid("dim", format!("expected 1 or 2, got {d}")))
}

fn parse_size(size: &str, dim: Dim) -> Result<(usize, usize), CliError> {
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| invalid("size", format!("cannot parse '{size}'")));
    match (size.split_once(['x', 'X']), dim) {
        (None, Dim::One) => Ok((1, num(size)?)),
        (Some((r, c)), Dim::One) if num(r)? == 1 => Ok((1, num(c)?)),
        (Some((r, c)), Dim::Two) => Ok((num(r)?, num(c)?)),
        _ => Err(invalid("size", format!("'{size}' does not fit a {dim}D lattice"))),
    }
}

fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var("T2QC_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("T2QC_THREADS: expected a non-negative integer, got '{v}'"))),
        Err(_) => Ok(0),
    }
}

fn sweep_config(a: &SweepArgs) -> Result<SweepConfig, CliError> {
    let dim = parse_dim(a.dim)?;
    let mode = Mode::from(a.mode);
    let mut c = SweepConfig::new(mode, dim).with_range(a.t_start, a.t_end, a.t_step).with_seed(a.seed);
    if let Some(size) = &a.size {
        let (rows, cols) = parse_size(size, dim)?;
        c = c.with_shape(rows, cols);
    }
    if let Some(ts) = &a.temps {
        c = c.with_temperatures(ts.clone());
    }
    c.min_iters = a.min_iters.unwrap_or(c.min_iters);
    c.max_iters = a.max_iters.unwrap_or(c.max_iters);
    c.equil_tol = a.equil_tol.unwrap_or(c.equil_tol);
    c.sample_sweeps = a.samples.unwrap_or(c.sample_sweeps);
    c.initial_state = match a.init {
        InitArg::Ground => InitialState::Ground,
        InitArg::Random => InitialState::Random,
    };
    c.cooling = a.cool;
    c.independent = a.independent;
    c.gate_error = a.gate_error;
    c.threads = threads_from_env()?;
    if !(a.threshold > 0.0 && a.threshold <= 1.0) {
        return Err(invalid("threshold", "must lie in (0, 1]"));
    }
    c.validate()?;
    Ok(c)
}

fn io_err(path: &Option<PathBuf>) -> impl Fn(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.as_deref().map_or("<stdout>".into(), |p| p.display().to_string()), source }
}

fn csv_err(path: &Option<PathBuf>) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| io_err(path)(io::Error::other(e))
}

/// Create the output stream before any computation so a bad path fails fast.
fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => Ok(Box::new(BufWriter::new(File::create(p).map_err(io_err(path))?))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

/// Summary lines go to stdout when data goes to a file, otherwise to stderr.
fn summary(out: &Option<PathBuf>, line: &str) {
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn tc_line(records: &[SweepRecord], threshold: f64) -> String {
    let mut sorted = records.to_vec();
    sorted.sort_by(|a, b| a.temperature.total_cmp(&b.temperature));
    match critical_temperature_estimate(&sorted, threshold) {
        Ok(tc) => format!("T_c estimate (|M| < {threshold}): {tc:.4}"),
        Err(e) => format!("T_c estimate (|M| < {threshold}): none, {e}"),
    }
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), CliError> {
    let config = sweep_config(a)?;
    let mut out = open_output(&a.out)?;
    let records = Simulator::new(config.clone())
        .and_then(|s| s.run())
        .map_err(|e| CliError::Validation(e.to_string()))?
        .records;
    write_records_csv(&records, &mut out).map_err(csv_err(&a.out))?;
    out.flush().map_err(io_err(&a.out))?;
    summary(
        &a.out,
        &format!("{} {}D {}: {} temperature points", config.mode, config.dim, config.size_label(), records.len()),
    );
    summary(&a.out, &tc_line(&records, a.threshold));
    Ok(())
}

fn cmd_snapshot(a: &SweepArgs) -> Result<(), CliError> {
    let config = sweep_config(a)?;
    let mut out = open_output(&a.out)?;
    let outcome = Simulator::new(config).and_then(|s| s.run()).map_err(|e| CliError::Validation(e.to_string()))?;
    out.write_all(outcome.final_lattice.snapshot().as_bytes()).map_err(io_err(&a.out))?;
    out.flush().map_err(io_err(&a.out))?;
    if let Some(last) = outcome.records.last() {
        summary(&a.out, &format!("T = {}: |M| = {:.6}", last.temperature, last.mean_abs_magnetization));
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let dim = parse_dim(a.dim)?;
    if a.temps.is_empty() || a.temps.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(invalid("temps", "temperatures must be positive"));
    }
    let (mut circuit, layout) = build_circuit(dim);
    if let Some(i) = a.drop_gate {
        if i >= circuit.len() {
            return Err(invalid("drop-gate", format!("circuit has {} gates", circuit.len())));
        }
        circuit = circuit.without_op(i);
    }
    let kernel = NodeKernel::from_parts(circuit, layout).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut out = open_output(&a.out)?;

    let mut report: Option<VerificationReport> = None;
    for &t in &a.temps {
        let params = IsingParams::new(t).map_err(|e| invalid("temps", e))?;
        let r = verify_circuit(kernel.circuit(), kernel.layout(), &params).map_err(|e| CliError::Validation(e.to_string()))?;
        match report.as_mut() {
            Some(all) => all.extend(r),
            None => report = Some(r),
        }
    }
    let report = report.expect("at least one temperature");
    report.write_csv(&mut out).map_err(csv_err(&a.out))?;
    out.flush().map_err(io_err(&a.out))?;

    let failed = report.failures().count();
    summary(
        &a.out,
        &format!(
            "{}D circuit, {} gates ({} multi-qubit), inputs {}: {} rows, {} failed, max error {:.2e}",
            dim,
            report.gate_count,
            report.multi_qubit_gates,
            report.spin_labels,
            report.rows.len(),
            failed,
            report.max_abs_error()
        ),
    );
    if failed > 0 {
        return Err(CliError::Verification { failed, total: report.rows.len() });
    }
    Ok(())
}

fn arrow(up: bool) -> char {
    if up {
        '↑'
    } else {
        '↓'
    }
}

fn cmd_truthtable(a: &TruthtableArgs) -> Result<(), CliError> {
    let dim = parse_dim(a.dim)?;
    let params = IsingParams::new(a.temp).map_err(|e| invalid("temp", e))?;
    let (circuit, layout) = build_circuit(dim);
    let report = verify_circuit(&circuit, &layout, &params).map_err(|e| CliError::Validation(e.to_string()))?;
    let labels: Vec<char> = report.spin_labels.chars().collect();
    let s_pos = labels.iter().position(|&c| c == 'S').expect("layout has a spin qubit");
    let level = |de: i32| match (dim, de) {
        (Dim::Two, 8) => "P2",
        (Dim::Two, _) => "P1",
        (Dim::One, _) => "P",
    };

    let mut stdout = io::stdout().lock();
    let mut w = |line: String| writeln!(stdout, "{line}").map_err(io_err(&None));
    match dim {
        Dim::One => w(format!("1D node at T = {} (P = e^(-4/T) = {:.6})", a.temp, params.p1()))?,
        Dim::Two => w(format!(
            "2D node at T = {} (P1 = e^(-4/T) = {:.6}, P2 = e^(-8/T) = {:.6})",
            a.temp,
            params.p1(),
            params.p2()
        ))?,
    }
    let head: String = labels.iter().map(|c| format!("{c} ")).collect();
    w(format!("{head}  {:<26}{:<7}{:<10}{}", "output state", "S'_cl", "p_cl", "p(S'=↑)"))?;
    for row in &report.rows {
        let bits: Vec<bool> = row.input_bits.bytes().map(|b| b == b'1').collect();
        let s = bits[s_pos];
        let (flipped, kept) = (arrow(!s), arrow(s));
        let state = if row.delta_e <= 0 {
            format!("|{flipped}⟩")
        } else {
            let p = level(row.delta_e);
            format!("√(1-{p})|{kept}⟩ + √{p}|{flipped}⟩")
        };
        let p_cl = if row.delta_e <= 0 {
            "1".to_string()
        } else {
            format!("{}={:.4}", level(row.delta_e), params.acceptance(row.delta_e))
        };
        let spins: String = bits.iter().map(|&b| format!("{} ", arrow(b))).collect();
        w(format!("{spins}→ {state:<26}{flipped:<7}{p_cl:<10}{:.6}", row.observed_prob))?;
    }
    Ok(())
}

fn parse_range(spec: &str) -> Result<(f64, f64, f64), CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [s, e, st] = parts[..] else {
        return Err(invalid("t-range", format!("expected start:end:step, got '{spec}'")));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| invalid("t-range", format!("cannot parse '{x}'")));
    let (start, end, step) = (num(s)?, num(e)?, num(st)?);
    if !(start > 0.0 && start.is_finite()) {
        return Err(invalid("t-range", "temperatures must be positive"));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid("t-range", "step must be positive"));
    }
    if !(end >= start && end.is_finite()) {
        return Err(invalid("t-range", "end must not be below start"));
    }
    Ok((start, end, step))
}

fn cmd_accuracy(a: &AccuracyArgs) -> Result<(), CliError> {
    if !(a.delta_t > 0.0 && a.delta_t.is_finite()) {
        return Err(invalid("delta-t", "must be positive"));
    }
    let (start, end, step) = parse_range(&a.t_range)?;
    // reuse the sweep grid so both commands round temperatures the same way
    let grid = SweepConfig::new(Mode::Classical, Dim::Two).with_range(start, end, step).temperature_points();
    let rows: Vec<AccuracyRow> = accuracy_table(a.delta_t, &grid).map_err(|e| invalid("t-range", e))?;
    let mut out = open_output(&a.out)?;
    let mut w = csv::Writer::from_writer(&mut out);
    for r in &rows {
        w.serialize(r).map_err(csv_err(&a.out))?;
    }
    w.flush().map_err(io_err(&a.out))?;
    drop(w);
    out.flush().map_err(io_err(&a.out))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Snapshot(a) => cmd_snapshot(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Truthtable(a) => cmd_truthtable(a),
        Command::Accuracy(a) => cmd_accuracy(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io { source, .. }) if source.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("t2qc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(parse_size("64x32", Dim::Two).unwrap(), (64, 32));
        assert_eq!(parse_size("16", Dim::One).unwrap(), (1, 16));
        assert_eq!(parse_size("1x16", Dim::One).unwrap(), (1, 16));
        assert!(parse_size("4x4", Dim::One).is_err());
        assert!(parse_size("16", Dim::Two).is_err());
        assert!(parse_size("ax4", Dim::Two).is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.5:4:0.1").unwrap(), (0.5, 4.0, 0.1));
        for bad in ["0:4:0.1", "1:4", "1:0.5:0.1", "1:4:0", "a:b:c"] {
            let e = parse_range(bad).unwrap_err().to_string();
            assert!(e.starts_with("--t-range"), "{bad}: {e}");
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(invalid("x", "y").exit_code(), 2);
        assert_eq!(CliError::Verification { failed: 1, total: 8 }.exit_code(), 1);
        let io = CliError::Io { path: "p".into(), source: io::Error::other("x") };
        assert_eq!(io.exit_code(), 3);
    }
}
