//! Periodic Ising lattice, streaming of node inputs and the checkerboard schedule.
//!
//! Sites are indexed row-major: in 2D site `(i, j)` with `i < rows`, `j < cols` is
//! `i * cols + j`. A 1D chain of length N is stored as one row.
//!
//! Only one copy of the lattice is kept. On hardware each black node would also
//! carry its white partner (the circuit leaves neighbour qubits untouched, so a
//! neighbour copy can seed the next update), which halves the node count; here
//! the node registers are built transiently per update so that pairing is
//! implicit.

use std::fmt::Write as _;

use thiserror::Error;

use crate::circuits::{Dim, IsingParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("lattice dimensions must be even and non-zero for the checkerboard, got {0}")]
    OddDimension(String),
    #[error("site {site} out of bounds for {sites} sites")]
    SiteOutOfBounds { site: usize, sites: usize },
    #[error("spin value {value} not allowed in {mode} mode")]
    SpinRange { value: f64, mode: SpinMode },
    #[error("operation needs a discrete lattice")]
    NotDiscrete,
}

/// Storage regime for spin values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinMode {
    /// s ∈ {−1, +1}.
    Discrete,
    /// s ∈ [−1, +1], the expectation of the spin.
    Ensemble,
}

impl std::fmt::Display for SpinMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpinMode::Discrete => "discrete",
            SpinMode::Ensemble => "ensemble",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub const BOTH: [Color; 2] = [Color::Black, Color::White];

    fn parity(self) -> usize {
        match self {
            Color::Black => 0,
            Color::White => 1,
        }
    }
}

/// Centre spin plus copies of its neighbours in A, B, C, D order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeInputs {
    pub center: f64,
    neighbors: [f64; 4],
    count: usize,
}

impl NodeInputs {
    pub fn new(center: f64, neighbors: &[f64]) -> Self {
        let mut buf = [0.0; 4];
        buf[..neighbors.len()].copy_from_slice(neighbors);
        NodeInputs { center, neighbors: buf, count: neighbors.len() }
    }

    pub fn neighbors(&self) -> &[f64] {
        &self.neighbors[..self.count]
    }

    /// Global spin flip of all inputs.
    pub fn mirrored(&self) -> Self {
        let mut out = *self;
        out.center = -out.center;
        for n in &mut out.neighbors[..out.count] {
            *n = -*n;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinLattice {
    dim: Dim,
    rows: usize,
    cols: usize,
    mode: SpinMode,
    values: Vec<f64>,
}

impl SpinLattice {
    /// Uniform lattice. `rows` must be 1 for a 1D chain of `cols` spins.
    pub fn uniform(dim: Dim, rows: usize, cols: usize, mode: SpinMode, value: f64) -> Result<Self, LatticeError> {
        let (rows, cols) = match dim {
            Dim::One => (1, cols),
            Dim::Two => (rows, cols),
        };
        let even = |n: usize| n > 0 && n.is_multiple_of(2);
        let ok = match dim {
            Dim::One => even(cols),
            Dim::Two => even(rows) && even(cols),
        };
        if !ok {
            let shape = match dim {
                Dim::One => format!("{cols}"),
                Dim::Two => format!("{rows}x{cols}"),
            };
            return Err(LatticeError::OddDimension(shape));
        }
        check_value(mode, value)?;
        Ok(SpinLattice { dim, rows, cols, mode, values: vec![value; rows * cols] })
    }

    pub fn chain(len: usize, mode: SpinMode, value: f64) -> Result<Self, LatticeError> {
        Self::uniform(Dim::One, 1, len, mode, value)
    }

    pub fn square(rows: usize, cols: usize, mode: SpinMode, value: f64) -> Result<Self, LatticeError> {
        Self::uniform(Dim::Two, rows, cols, mode, value)
    }

    /// Build from explicit values (row-major).
    pub fn from_values(
        dim: Dim,
        rows: usize,
        cols: usize,
        mode: SpinMode,
        values: Vec<f64>,
    ) -> Result<Self, LatticeError> {
        let mut lat = Self::uniform(dim, rows, cols, mode, 1.0)?;
        if values.len() != lat.values.len() {
            return Err(LatticeError::SiteOutOfBounds { site: values.len(), sites: lat.values.len() });
        }
        for &v in &values {
            check_value(mode, v)?;
        }
        lat.values = values;
        Ok(lat)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mode(&self) -> SpinMode {
        self.mode
    }

    pub fn num_sites(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, site: usize) -> Result<f64, LatticeError> {
        self.values
            .get(site)
            .copied()
            .ok_or(LatticeError::SiteOutOfBounds { site, sites: self.values.len() })
    }

    /// "NxM" for 2D, "N" for 1D.
    pub fn shape_label(&self) -> String {
        match self.dim {
            Dim::One => format!("{}", self.cols),
            Dim::Two => format!("{}x{}", self.rows, self.cols),
        }
    }

    /// Neighbour sites in A, B, C, D order with periodic wrap.
    ///
    /// 1D: A = i−1, B = i+1. 2D: A = (i, j+1), B = (i−1, j), C = (i, j−1), D = (i+1, j).
    pub fn neighbor_sites(&self, site: usize) -> ([usize; 4], usize) {
        let (r, c) = (site / self.cols, site % self.cols);
        let left = r * self.cols + (c + self.cols - 1) % self.cols;
        let right = r * self.cols + (c + 1) % self.cols;
        match self.dim {
            Dim::One => ([left, right, 0, 0], 2),
            Dim::Two => {
                let up = ((r + self.rows - 1) % self.rows) * self.cols + c;
                let down = ((r + 1) % self.rows) * self.cols + c;
                ([right, up, left, down], 4)
            }
        }
    }

    /// Copy the centre spin and its neighbours into a node input record.
    pub fn stream(&self, site: usize) -> Result<NodeInputs, LatticeError> {
        let center = self.get(site)?;
        Ok(self.stream_unchecked(site, center))
    }

    pub(crate) fn stream_unchecked(&self, site: usize, center: f64) -> NodeInputs {
        let (nb, count) = self.neighbor_sites(site);
        let mut neighbors = [0.0; 4];
        for k in 0..count {
            neighbors[k] = self.values[nb[k]];
        }
        NodeInputs { center, neighbors, count }
    }

    /// Sites of one checkerboard colour in row-major order.
    pub fn checkerboard_sites(&self, color: Color) -> Vec<usize> {
        (0..self.num_sites())
            .filter(|&s| ((s / self.cols) + (s % self.cols)) % 2 == color.parity())
            .collect()
    }

    pub fn write_back(&mut self, site: usize, value: f64) -> Result<(), LatticeError> {
        check_value(self.mode, value)?;
        let sites = self.values.len();
        let slot = self.values.get_mut(site).ok_or(LatticeError::SiteOutOfBounds { site, sites })?;
        *slot = value;
        Ok(())
    }

    pub(crate) fn set_unchecked(&mut self, site: usize, value: f64) {
        self.values[site] = value;
    }

    pub fn magnetization(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Σ_i E_i with E_i = −J Σ_j s_i s_j over the site's neighbours. Each bond is
    /// counted from both ends.
    pub fn total_energy(&self, params: &IsingParams) -> Result<f64, LatticeError> {
        if self.mode != SpinMode::Discrete {
            return Err(LatticeError::NotDiscrete);
        }
        Ok(self.pair_energy(params))
    }

    /// Same sum evaluated on spin expectations; for an independent product state
    /// this is the expectation of the energy.
    pub fn expected_energy(&self, params: &IsingParams) -> f64 {
        self.pair_energy(params)
    }

    fn pair_energy(&self, params: &IsingParams) -> f64 {
        let mut sum = 0.0;
        for site in 0..self.num_sites() {
            let (nb, count) = self.neighbor_sites(site);
            let s = self.values[site];
            sum += nb[..count].iter().map(|&n| s * self.values[n]).sum::<f64>();
        }
        -params.coupling() * sum
    }

    /// Plain-text snapshot: one line per row, '+'/'-' for discrete spins and
    /// fixed-point decimals for ensemble values.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            let row = &self.values[r * self.cols..(r + 1) * self.cols];
            match self.mode {
                SpinMode::Discrete => {
                    out.extend(row.iter().map(|&v| if v > 0.0 { '+' } else { '-' }));
                }
                SpinMode::Ensemble => {
                    for (k, v) in row.iter().enumerate() {
                        if k > 0 {
                            out.push(' ');
                        }
                        let _ = write!(out, "{v:+.6}");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

fn check_value(mode: SpinMode, value: f64) -> Result<(), LatticeError> {
    let ok = match mode {
        SpinMode::Discrete => value == 1.0 || value == -1.0,
        SpinMode::Ensemble => (-1.0..=1.0).contains(&value),
    };
    if ok {
        Ok(())
    } else {
        Err(LatticeError::SpinRange { value, mode })
    }
}
