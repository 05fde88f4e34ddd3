use std::fmt;

use thiserror::Error;

use crate::circuits::Dim;
use crate::lattice::SpinMode;

/// A configuration problem, tagged with the name of the offending setting as it
/// appears on the command line.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("--{field}: {message}")]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &'static str, message: impl Into<String>) -> Self {
        ConfigError { field, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Measure S' once per update; classical bits stream between nodes.
    OneShot,
    /// Stream the S' expectation value instead of a measured bit.
    Ensemble,
    /// Plain Metropolis with the same schedule and random numbers.
    Classical,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::OneShot => "oneshot",
            Mode::Ensemble => "ensemble",
            Mode::Classical => "classical",
        }
    }

    pub fn spin_mode(self) -> SpinMode {
        match self {
            Mode::Ensemble => SpinMode::Ensemble,
            Mode::OneShot | Mode::Classical => SpinMode::Discrete,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oneshot" => Ok(Mode::OneShot),
            "ensemble" => Ok(Mode::Ensemble),
            "classical" => Ok(Mode::Classical),
            other => Err(ConfigError::new("mode", format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialState {
    /// Every spin up.
    Ground,
    /// Independent fair coin per site for discrete modes; the maximally mixed
    /// state (every spin expectation 0) in ensemble mode.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TemperatureSchedule {
    /// start, start+step, ... up to and including end.
    Range { start: f64, end: f64, step: f64 },
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub mode: Mode,
    pub dim: Dim,
    /// Ignored (forced to 1) for 1D.
    pub rows: usize,
    pub cols: usize,
    pub coupling: f64,
    pub temperatures: TemperatureSchedule,
    /// Walk the grid from hot to cold.
    pub cooling: bool,
    pub min_iters: usize,
    pub max_iters: usize,
    pub equil_tol: f64,
    /// Sweeps averaged per temperature after equilibration (discrete modes).
    pub sample_sweeps: usize,
    pub seed: u64,
    pub initial_state: InitialState,
    /// Start every temperature from the initial state instead of annealing.
    pub independent: bool,
    /// Amplitude error bound for the P-qubit rotations (one-shot only).
    pub gate_error: Option<f64>,
    /// Worker threads, 0 = rayon default.
    pub threads: usize,
}

/// Default classical-run grid step and iteration bounds.
pub const DEFAULT_T_STEP: f64 = 0.01;
pub const DEFAULT_MIN_ITERS: usize = 20;
pub const DEFAULT_MAX_ITERS: usize = 10_000;
/// Running-mean tolerance on |M| for the discrete modes.
pub const DEFAULT_DISCRETE_TOL: f64 = 1e-4;
/// Max per-site change for the ensemble fixed point.
pub const DEFAULT_ENSEMBLE_TOL: f64 = 1e-3;
pub const DEFAULT_SAMPLES: usize = 100;

impl SweepConfig {
    /// Defaults for `mode`: 64×64 (discrete) or 2×2 (ensemble), heating 0.5 → 4.0.
    pub fn new(mode: Mode, dim: Dim) -> Self {
        let (side, min_iters, equil_tol, sample_sweeps) = match mode {
            Mode::Ensemble => (2, 1, DEFAULT_ENSEMBLE_TOL, 0),
            _ => (64, DEFAULT_MIN_ITERS, DEFAULT_DISCRETE_TOL, DEFAULT_SAMPLES),
        };
        SweepConfig {
            mode,
            dim,
            rows: if dim == Dim::One { 1 } else { side },
            cols: side,
            coupling: 1.0,
            temperatures: TemperatureSchedule::Range { start: 0.5, end: 4.0, step: DEFAULT_T_STEP },
            cooling: false,
            min_iters,
            max_iters: DEFAULT_MAX_ITERS,
            equil_tol,
            sample_sweeps,
            seed: 1,
            initial_state: InitialState::Ground,
            independent: false,
            gate_error: None,
            threads: 0,
        }
    }

    pub fn with_shape(mut self, rows: usize, cols: usize) -> Self {
        self.rows = rows;
        self.cols = cols;
        self
    }

    pub fn with_range(mut self, start: f64, end: f64, step: f64) -> Self {
        self.temperatures = TemperatureSchedule::Range { start, end, step };
        self
    }

    pub fn with_temperatures(mut self, temps: Vec<f64>) -> Self {
        self.temperatures = TemperatureSchedule::List(temps);
        self
    }

    pub fn with_iters(mut self, min_iters: usize, max_iters: usize) -> Self {
        self.min_iters = min_iters;
        self.max_iters = max_iters;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.coupling > 0.0 && self.coupling.is_finite()) {
            return Err(ConfigError::new("coupling", "only ferromagnetic coupling J > 0 is supported"));
        }
        let even = |n: usize| n > 0 && n.is_multiple_of(2);
        if !even(self.cols) || (self.dim == Dim::Two && !even(self.rows)) {
            return Err(ConfigError::new("size", "lattice sides must be even and non-zero"));
        }
        match &self.temperatures {
            TemperatureSchedule::Range { start, end, step } => {
                if !(*start > 0.0 && start.is_finite()) {
                    return Err(ConfigError::new("t-start", "temperature must be positive"));
                }
                if !(*end > 0.0 && end.is_finite()) {
                    return Err(ConfigError::new("t-end", "temperature must be positive"));
                }
                if !(*step > 0.0 && step.is_finite()) {
                    return Err(ConfigError::new("t-step", "step must be positive"));
                }
                if end < start {
                    return Err(ConfigError::new("t-end", "must not be below --t-start"));
                }
                if (end - start) / step > 1e7 {
                    return Err(ConfigError::new("t-step", "grid has too many points"));
                }
            }
            TemperatureSchedule::List(ts) => {
                if ts.is_empty() {
                    return Err(ConfigError::new("temps", "temperature list is empty"));
                }
                if ts.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                    return Err(ConfigError::new("temps", "temperatures must be positive"));
                }
            }
        }
        if self.max_iters == 0 {
            return Err(ConfigError::new("max-iters", "must be at least 1"));
        }
        if self.min_iters > self.max_iters {
            return Err(ConfigError::new("min-iters", "must not exceed --max-iters"));
        }
        if !(self.equil_tol > 0.0 && self.equil_tol.is_finite()) {
            return Err(ConfigError::new("equil-tol", "must be positive"));
        }
        if let Some(dp) = self.gate_error {
            if self.mode != Mode::OneShot {
                return Err(ConfigError::new("gate-error", "only applies to --mode oneshot"));
            }
            if !(0.0..=1.0).contains(&dp) {
                return Err(ConfigError::new("gate-error", "must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Temperatures in the order they are visited.
    pub fn temperature_points(&self) -> Vec<f64> {
        let mut ts = match &self.temperatures {
            TemperatureSchedule::Range { start, end, step } => {
                let n = ((end - start) / step + 1e-9).floor() as usize;
                // round away accumulated representation error so CSV values stay tidy
                (0..=n).map(|k| ((start + k as f64 * step) * 1e9).round() / 1e9).collect()
            }
            TemperatureSchedule::List(ts) => ts.clone(),
        };
        if self.cooling {
            ts.sort_by(|a, b| b.partial_cmp(a).unwrap());
        } else if matches!(self.temperatures, TemperatureSchedule::List(_)) {
            ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
        ts
    }

    /// Size label used in records.
    pub fn size_label(&self) -> String {
        match self.dim {
            Dim::One => format!("{}", self.cols),
            Dim::Two => format!("{}x{}", self.rows, self.cols),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_inclusive_and_ordered() {
        let c = SweepConfig::new(Mode::Classical, Dim::Two).with_range(0.5, 4.0, 0.1);
        let ts = c.temperature_points();
        assert_eq!(ts.len(), 36);
        assert_eq!(ts[0], 0.5);
        assert_eq!(*ts.last().unwrap(), 4.0);
        assert_eq!(ts[3], 0.8);

        let mut cool = c.clone();
        cool.cooling = true;
        let ts = cool.temperature_points();
        assert_eq!(ts[0], 4.0);
        assert_eq!(*ts.last().unwrap(), 0.5);
    }

    #[test]
    fn validation_names_fields() {
        let base = SweepConfig::new(Mode::Classical, Dim::Two);
        assert!(base.validate().is_ok());
        let field = |c: SweepConfig| c.validate().unwrap_err().field;
        assert_eq!(field(base.clone().with_range(0.5, 4.0, 0.0)), "t-step");
        assert_eq!(field(base.clone().with_range(0.0, 4.0, 0.1)), "t-start");
        assert_eq!(field(base.clone().with_range(1.0, 0.5, 0.1)), "t-end");
        assert_eq!(field(base.clone().with_shape(3, 4)), "size");
        assert_eq!(field(base.clone().with_iters(30, 20)), "min-iters");
        assert_eq!(field(base.clone().with_temperatures(vec![])), "temps");
        let mut c = base.clone();
        c.coupling = -1.0;
        assert_eq!(field(c), "coupling");
        let mut c = base.clone();
        c.gate_error = Some(0.05);
        assert_eq!(field(c), "gate-error");
        let mut c = SweepConfig::new(Mode::OneShot, Dim::Two);
        c.gate_error = Some(0.05);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn mode_round_trip() {
        for m in [Mode::OneShot, Mode::Ensemble, Mode::Classical] {
            assert_eq!(m.name().parse::<Mode>().unwrap(), m);
        }
        assert_eq!("quantum".parse::<Mode>().unwrap_err().field, "mode");
    }
}
