//! Temperature sweeps in one-shot, ensemble and classical modes.
//!
//! Every sweep is a black checkerboard pass followed by a white one. Within a
//! pass all new values are computed from the frozen lattice and then written,
//! which is exact because same-colour sites are never neighbours. Random numbers
//! come from [`CounterRng`] keyed by (seed, temperature index, sweep, site), so a
//! run is bit-reproducible for any thread count or site order.
//!
//! Stopping rules per temperature point:
//! - discrete modes: with window W = `min_iters`, stop once the running mean of
//!   |M| over the last W sweeps moved by less than `equil_tol` on the latest
//!   sweep (and at least `min_iters` sweeps ran), or at `max_iters`; then average
//!   `sample_sweeps` further sweeps.
//! - ensemble mode: stop when the largest per-site change of a sweep is below
//!   `equil_tol` (or at `max_iters`) and record the resulting state.

mod config;
mod update;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use config::{
    ConfigError, InitialState, Mode, SweepConfig, TemperatureSchedule, DEFAULT_DISCRETE_TOL, DEFAULT_ENSEMBLE_TOL,
    DEFAULT_MAX_ITERS, DEFAULT_MIN_ITERS, DEFAULT_SAMPLES, DEFAULT_T_STEP,
};
pub use update::{classical_update, ensemble_update, oneshot_update, NodeKernel};

use crate::accuracy::inject_rotation_error;
use crate::circuits::{CircuitError, IsingParams};
use crate::lattice::{Color, LatticeError, SpinLattice, SpinMode};
use crate::qstate::{QStateError, QuantumRegister};
use crate::rng::{CounterRng, Purpose};
use update::{classical_spin, AcceptanceTable};

/// Default |M| threshold for [`critical_temperature_estimate`].
pub const DEFAULT_TC_THRESHOLD: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    QState(#[from] QStateError),
    #[error("update needs a {expected} lattice, got {found}")]
    ModeMismatch { expected: SpinMode, found: SpinMode },
    #[error("magnetization never drops below {threshold} after starting above it")]
    NoCrossing { threshold: f64 },
    #[error("records must be sorted by ascending temperature")]
    Unsorted,
}

/// Observables at one temperature point. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub temperature: f64,
    pub mode: &'static str,
    pub dim: u8,
    pub size: String,
    /// Sweeps spent reaching equilibrium (or the fixed point) at this temperature.
    pub iterations_used: usize,
    pub mean_abs_magnetization: f64,
    /// Standard deviation of |M| over the sample sweeps.
    pub std_magnetization: f64,
    /// Σ_i E_i / N with each bond counted from both ends.
    pub mean_energy_per_site: f64,
    pub seed: u64,
}

pub const CSV_HEADER: &str =
    "temperature,mode,dim,size,iterations_used,mean_abs_magnetization,std_magnetization,mean_energy_per_site,seed";

pub fn write_records_csv<W: std::io::Write>(records: &[SweepRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Records plus the lattice as it stood after the last temperature point.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub final_lattice: SpinLattice,
}

/// Per-worker buffers.
#[derive(Debug, Default)]
pub struct Workspace {
    uniforms: Vec<f64>,
    gate_draws: Vec<f64>,
    updates: Vec<f64>,
}

/// Probabilities and acceptance levels fixed for one temperature.
#[derive(Debug, Clone)]
pub struct PointParams {
    pub params: IsingParams,
    pub t_index: usize,
    table: AcceptanceTable,
    probs: Vec<f64>,
}

impl PointParams {
    pub fn new(params: IsingParams, t_index: usize, dim: crate::circuits::Dim) -> Self {
        PointParams { table: AcceptanceTable::new(&params), probs: params.prob_levels(dim), params, t_index }
    }
}

pub struct Simulator {
    config: SweepConfig,
    kernel: NodeKernel,
    rng: CounterRng,
    pool: Option<rayon::ThreadPool>,
}

/// Below this many sites a pass runs inline.
const PARALLEL_MIN_SITES: usize = 256;

impl Simulator {
    pub fn new(config: SweepConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let kernel = NodeKernel::new(config.dim);
        Self::with_kernel(config, kernel)
    }

    /// Use a custom node circuit (for mutation experiments).
    pub fn with_kernel(config: SweepConfig, kernel: NodeKernel) -> Result<Self, EngineError> {
        config.validate()?;
        let pool = match config.threads {
            1 => None,
            n => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| ConfigError::new("threads", e.to_string()))?,
            ),
        };
        let rng = CounterRng::new(config.seed);
        Ok(Simulator { config, kernel, rng, pool })
    }

    pub fn config(&self) -> &SweepConfig {
        &self.config
    }

    pub fn kernel(&self) -> &NodeKernel {
        &self.kernel
    }

    fn threads(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    pub fn params(&self, temperature: f64, t_index: usize) -> Result<PointParams, EngineError> {
        let params = IsingParams::with_coupling(self.config.coupling, temperature)?;
        Ok(PointParams::new(params, t_index, self.config.dim))
    }

    pub fn initial_lattice(&self, t_index: usize) -> Result<SpinLattice, EngineError> {
        let c = &self.config;
        let mode = c.mode.spin_mode();
        let mut lat = SpinLattice::uniform(c.dim, c.rows, c.cols, mode, 1.0)?;
        if c.initial_state == InitialState::Random {
            match mode {
                SpinMode::Ensemble => {
                    for site in 0..lat.num_sites() {
                        lat.set_unchecked(site, 0.0);
                    }
                }
                SpinMode::Discrete => {
                    let mut coins = vec![0.0; lat.num_sites()];
                    self.rng.fill(Purpose::Init, t_index, 0, &mut coins);
                    for (site, u) in coins.into_iter().enumerate() {
                        lat.set_unchecked(site, if u < 0.5 { 1.0 } else { -1.0 });
                    }
                }
            }
        }
        Ok(lat)
    }

    fn new_spin(
        &self,
        reg: &mut QuantumRegister,
        lattice: &SpinLattice,
        site: usize,
        point: &PointParams,
        ws_uniforms: &[f64],
        ws_gate: &[f64],
    ) -> Result<f64, EngineError> {
        let inputs = lattice.stream_unchecked(site, lattice.values()[site]);
        match self.config.mode {
            Mode::Classical => Ok(classical_spin(&inputs, &point.table, ws_uniforms[site])),
            Mode::Ensemble => self.kernel.ensemble_spin(reg, &inputs, &point.probs),
            Mode::OneShot => match self.config.gate_error {
                Some(dp) => {
                    let k = point.probs.len();
                    let mut probs = [0.0; 2];
                    for (i, p) in probs[..k].iter_mut().enumerate() {
                        *p = inject_rotation_error(point.probs[i], dp, ws_gate[site * k + i]);
                    }
                    self.kernel.measure(reg, &inputs, &probs[..k], ws_uniforms[site])
                }
                None => self.kernel.measure(reg, &inputs, &point.probs, ws_uniforms[site]),
            },
        }
    }

    /// Update `sites` (one colour) in the given order. Returns the largest change.
    pub fn color_pass(
        &self,
        ws: &mut Workspace,
        lattice: &mut SpinLattice,
        sites: &[usize],
        point: &PointParams,
    ) -> Result<f64, EngineError> {
        let (uniforms, gate) = (&ws.uniforms, &ws.gate_draws);
        let frozen: &SpinLattice = lattice;
        ws.updates.clear();
        let parallel = self.threads() > 1 && sites.len() >= PARALLEL_MIN_SITES;
        if parallel {
            let pool = self.pool.as_ref().unwrap();
            let computed: Result<Vec<f64>, EngineError> = pool.install(|| {
                sites
                    .par_iter()
                    .map_init(
                        || self.kernel.scratch(),
                        |reg, &site| self.new_spin(reg, frozen, site, point, uniforms, gate),
                    )
                    .collect()
            });
            ws.updates = computed?;
        } else {
            let mut reg = self.kernel.scratch();
            for &site in sites {
                let v = self.new_spin(&mut reg, frozen, site, point, uniforms, gate)?;
                ws.updates.push(v);
            }
        }
        let mut max_change: f64 = 0.0;
        for (&site, &v) in sites.iter().zip(&ws.updates) {
            max_change = max_change.max((v - lattice.values()[site]).abs());
            lattice.set_unchecked(site, v);
        }
        Ok(max_change)
    }

    fn draw(&self, ws: &mut Workspace, n: usize, point: &PointParams, sweep: usize) {
        if self.config.mode == Mode::Ensemble {
            return;
        }
        ws.uniforms.resize(n, 0.0);
        self.rng.fill(Purpose::Update, point.t_index, sweep, &mut ws.uniforms);
        if self.config.gate_error.is_some() {
            ws.gate_draws.resize(n * point.probs.len(), 0.0);
            self.rng.fill(Purpose::GateError, point.t_index, sweep, &mut ws.gate_draws);
        }
    }

    /// One black pass then one white pass. Returns the largest per-site change.
    pub fn full_sweep(
        &self,
        ws: &mut Workspace,
        lattice: &mut SpinLattice,
        point: &PointParams,
        sweep: usize,
    ) -> Result<f64, EngineError> {
        self.full_sweep_with(ws, lattice, point, sweep, |_, sites| sites)
    }

    /// [`Self::full_sweep`] with a hook that may reorder each colour's site list.
    pub fn full_sweep_with(
        &self,
        ws: &mut Workspace,
        lattice: &mut SpinLattice,
        point: &PointParams,
        sweep: usize,
        mut order: impl FnMut(Color, Vec<usize>) -> Vec<usize>,
    ) -> Result<f64, EngineError> {
        self.draw(ws, lattice.num_sites(), point, sweep);
        let mut change: f64 = 0.0;
        for color in Color::BOTH {
            let sites = order(color, lattice.checkerboard_sites(color));
            change = change.max(self.color_pass(ws, lattice, &sites, point)?);
        }
        Ok(change)
    }

    fn energy_per_site(&self, lattice: &SpinLattice, params: &IsingParams) -> f64 {
        lattice.expected_energy(params) / lattice.num_sites() as f64
    }

    /// Equilibrate and measure at one temperature, continuing from `lattice`.
    pub fn run_point(&self, lattice: &mut SpinLattice, temperature: f64, t_index: usize) -> Result<SweepRecord, EngineError> {
        let c = &self.config;
        let point = self.params(temperature, t_index)?;
        let mut ws = Workspace::default();
        let mut sweep = 0usize;

        let (iterations_used, mean_abs, std, energy) = if c.mode == Mode::Ensemble {
            loop {
                let change = self.full_sweep(&mut ws, lattice, &point, sweep)?;
                sweep += 1;
                if sweep >= c.max_iters || (sweep >= c.min_iters && change < c.equil_tol) {
                    break;
                }
            }
            let energy = self.energy_per_site(lattice, &point.params);
            (sweep, lattice.magnetization().abs(), 0.0, energy)
        } else {
            let window = c.min_iters.max(1);
            let mut history = Vec::new();
            loop {
                self.full_sweep(&mut ws, lattice, &point, sweep)?;
                sweep += 1;
                history.push(lattice.magnetization().abs());
                if sweep >= c.max_iters {
                    break;
                }
                if sweep >= c.min_iters && sweep > window {
                    let drift = (history[sweep - 1] - history[sweep - 1 - window]).abs() / window as f64;
                    if drift < c.equil_tol {
                        break;
                    }
                }
            }
            let iterations = sweep;

            let mut mags = Vec::with_capacity(c.sample_sweeps.max(1));
            let mut energy = 0.0;
            for _ in 0..c.sample_sweeps {
                self.full_sweep(&mut ws, lattice, &point, sweep)?;
                sweep += 1;
                mags.push(lattice.magnetization().abs());
                energy += self.energy_per_site(lattice, &point.params);
            }
            if mags.is_empty() {
                mags.push(lattice.magnetization().abs());
                energy = self.energy_per_site(lattice, &point.params);
            }
            let n = mags.len() as f64;
            let mean = mags.iter().sum::<f64>() / n;
            let var = if mags.len() > 1 { mags.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            (iterations, mean, var.sqrt(), energy / n)
        };

        Ok(SweepRecord {
            temperature,
            mode: c.mode.name(),
            dim: c.dim.number(),
            size: c.size_label(),
            iterations_used,
            mean_abs_magnetization: mean_abs.clamp(0.0, 1.0),
            std_magnetization: std,
            mean_energy_per_site: energy,
            seed: c.seed,
        })
    }

    /// Visit every temperature point. Annealed runs carry the lattice from one
    /// point to the next; independent runs restart each point from the initial
    /// state and may run in parallel.
    pub fn run(&self) -> Result<SweepOutcome, EngineError> {
        let temps = self.config.temperature_points();
        if self.config.independent {
            let run_one = |(t_index, &t): (usize, &f64)| -> Result<(SweepRecord, SpinLattice), EngineError> {
                let mut lat = self.initial_lattice(t_index)?;
                let rec = self.run_point(&mut lat, t, t_index)?;
                Ok((rec, lat))
            };
            let results: Result<Vec<_>, EngineError> = match &self.pool {
                Some(pool) if pool.current_num_threads() > 1 => {
                    pool.install(|| temps.par_iter().enumerate().map(run_one).collect())
                }
                _ => temps.iter().enumerate().map(run_one).collect(),
            };
            let mut results = results?;
            let final_lattice = results.last().map(|(_, l)| l.clone()).unwrap_or(self.initial_lattice(0)?);
            let records = results.drain(..).map(|(r, _)| r).collect();
            return Ok(SweepOutcome { records, final_lattice });
        }

        let mut lattice = self.initial_lattice(0)?;
        let mut records = Vec::with_capacity(temps.len());
        for (t_index, &t) in temps.iter().enumerate() {
            records.push(self.run_point(&mut lattice, t, t_index)?);
        }
        Ok(SweepOutcome { records, final_lattice: lattice })
    }
}

pub fn run_temperature_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>, EngineError> {
    Ok(Simulator::new(config.clone())?.run()?.records)
}

/// First temperature where mean |M| falls below `threshold`, linearly
/// interpolated between the bracketing records.
pub fn critical_temperature_estimate(records: &[SweepRecord], threshold: f64) -> Result<f64, EngineError> {
    if records.windows(2).any(|w| w[1].temperature < w[0].temperature) {
        return Err(EngineError::Unsorted);
    }
    let k = records
        .iter()
        .position(|r| r.mean_abs_magnetization < threshold)
        .ok_or(EngineError::NoCrossing { threshold })?;
    if k == 0 {
        return Err(EngineError::NoCrossing { threshold });
    }
    let (lo, hi) = (&records[k - 1], &records[k]);
    let (m0, m1) = (lo.mean_abs_magnetization, hi.mean_abs_magnetization);
    Ok(lo.temperature + (hi.temperature - lo.temperature) * (m0 - threshold) / (m0 - m1))
}
