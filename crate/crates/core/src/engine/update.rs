//! Single-site update rules for the three modes.

use crate::circuits::{build_circuit, CircuitError, Dim, IsingParams, NodeLayout};
use crate::lattice::{NodeInputs, SpinLattice, SpinMode};
use crate::qstate::{Circuit, QuantumRegister};

use super::EngineError;

/// A node circuit together with the roles of its qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeKernel {
    circuit: Circuit,
    layout: NodeLayout,
}

impl NodeKernel {
    pub fn new(dim: Dim) -> Self {
        let (circuit, layout) = build_circuit(dim);
        NodeKernel { circuit, layout }
    }

    pub fn from_parts(circuit: Circuit, layout: NodeLayout) -> Result<Self, EngineError> {
        if circuit.num_qubits() != layout.num_qubits() {
            return Err(CircuitError::Layout(format!(
                "circuit has {} qubits, layout {}",
                circuit.num_qubits(),
                layout.num_qubits()
            ))
            .into());
        }
        Ok(NodeKernel { circuit, layout })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn layout(&self) -> &NodeLayout {
        &self.layout
    }

    /// A register sized for this kernel, reusable across updates.
    pub fn scratch(&self) -> QuantumRegister {
        QuantumRegister::new(self.layout.num_qubits()).expect("layout sizes are within the register cap")
    }

    /// Run the circuit on classical inputs and measure S' with `u`. Returns ±1.
    pub fn measure(
        &self,
        reg: &mut QuantumRegister,
        inputs: &NodeInputs,
        probs: &[f64],
        u: f64,
    ) -> Result<f64, EngineError> {
        let mut bits = [false; 4];
        let n = inputs.neighbors().len();
        for (b, &s) in bits.iter_mut().zip(inputs.neighbors()) {
            *b = s > 0.0;
        }
        self.layout.load_classical(reg, inputs.center > 0.0, &bits[..n], probs)?;
        reg.apply_circuit(&self.circuit)?;
        let up = reg.measure_qubit(self.layout.spin(), u)?;
        Ok(if up { 1.0 } else { -1.0 })
    }

    /// q' = prob_one(S') with every spin qubit loaded independently from its
    /// expectation value.
    pub fn expectation(&self, reg: &mut QuantumRegister, inputs: &NodeInputs, probs: &[f64]) -> Result<f64, EngineError> {
        let to_q = |s: f64| ((s + 1.0) * 0.5).clamp(0.0, 1.0);
        let mut qs = [0.0; 4];
        let n = inputs.neighbors().len();
        for (q, &s) in qs.iter_mut().zip(inputs.neighbors()) {
            *q = to_q(s);
        }
        self.layout.load_product(reg, to_q(inputs.center), &qs[..n], probs)?;
        reg.apply_circuit(&self.circuit)?;
        Ok(reg.prob_one(self.layout.spin())?)
    }

    /// New spin expectation for ensemble streaming.
    ///
    /// The Metropolis rule commutes with a global spin flip, so the circuit is
    /// evaluated on the inputs and on their mirror image and the antisymmetric
    /// part is kept. In exact arithmetic both halves agree; in floating point this
    /// keeps the all-zero state an exact fixed point instead of drifting off it
    /// through rounding.
    pub fn ensemble_spin(&self, reg: &mut QuantumRegister, inputs: &NodeInputs, probs: &[f64]) -> Result<f64, EngineError> {
        let direct = 2.0 * self.expectation(reg, inputs, probs)? - 1.0;
        let mirror = 2.0 * self.expectation(reg, &inputs.mirrored(), probs)? - 1.0;
        Ok((0.5 * (direct - mirror)).clamp(-1.0, 1.0))
    }
}

/// Flip probabilities indexed by ΔE/4 + 2 (ΔE ∈ {−8, −4, 0, 4, 8}).
#[derive(Debug, Clone, Copy)]
pub(crate) struct AcceptanceTable([f64; 5]);

impl AcceptanceTable {
    pub(crate) fn new(params: &IsingParams) -> Self {
        AcceptanceTable([-8, -4, 0, 4, 8].map(|de| params.acceptance(de)))
    }

    #[inline]
    pub(crate) fn get(&self, delta_e: i32) -> f64 {
        self.0[(delta_e / 4 + 2) as usize]
    }
}

#[inline]
pub(crate) fn classical_spin(inputs: &NodeInputs, table: &AcceptanceTable, u: f64) -> f64 {
    let s = inputs.center;
    let sum: f64 = inputs.neighbors().iter().sum();
    let delta_e = (2.0 * s * sum) as i32;
    if u < table.get(delta_e) {
        -s
    } else {
        s
    }
}

fn require(lattice: &SpinLattice, mode: SpinMode) -> Result<(), EngineError> {
    if lattice.mode() != mode {
        return Err(EngineError::ModeMismatch { expected: mode, found: lattice.mode() });
    }
    Ok(())
}

fn check_kernel(lattice: &SpinLattice, kernel: &NodeKernel) -> Result<(), EngineError> {
    if lattice.dim() != kernel.layout().dim() {
        return Err(CircuitError::Layout(format!(
            "{}D kernel on a {}D lattice",
            kernel.layout().dim(),
            lattice.dim()
        ))
        .into());
    }
    Ok(())
}

/// Stream, run the node circuit, measure S' with the uniform `u` and write the
/// measured spin back.
pub fn oneshot_update(
    lattice: &mut SpinLattice,
    site: usize,
    kernel: &NodeKernel,
    params: &IsingParams,
    u: f64,
) -> Result<(), EngineError> {
    require(lattice, SpinMode::Discrete)?;
    check_kernel(lattice, kernel)?;
    let inputs = lattice.stream(site)?;
    let mut reg = kernel.scratch();
    let spin = kernel.measure(&mut reg, &inputs, &params.prob_levels(lattice.dim()), u)?;
    lattice.write_back(site, spin)?;
    Ok(())
}

/// Replace the site with the S' expectation computed from its neighbours'
/// expectations. No collapse.
pub fn ensemble_update(
    lattice: &mut SpinLattice,
    site: usize,
    kernel: &NodeKernel,
    params: &IsingParams,
) -> Result<(), EngineError> {
    require(lattice, SpinMode::Ensemble)?;
    check_kernel(lattice, kernel)?;
    let inputs = lattice.stream(site)?;
    let mut reg = kernel.scratch();
    let spin = kernel.ensemble_spin(&mut reg, &inputs, &params.prob_levels(lattice.dim()))?;
    lattice.write_back(site, spin)?;
    Ok(())
}

/// Metropolis: flip iff `u < min{1, e^{−ΔE/T}}`.
pub fn classical_update(lattice: &mut SpinLattice, site: usize, params: &IsingParams, u: f64) -> Result<(), EngineError> {
    require(lattice, SpinMode::Discrete)?;
    let inputs = lattice.stream(site)?;
    let spin = classical_spin(&inputs, &AcceptanceTable::new(params), u);
    lattice.write_back(site, spin)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const UP: f64 = 1.0;
    const DN: f64 = -1.0;

    fn p(t: f64) -> IsingParams {
        IsingParams::new(t).unwrap()
    }

    fn chain(values: &[f64]) -> SpinLattice {
        SpinLattice::from_values(Dim::One, 1, values.len(), SpinMode::Discrete, values.to_vec()).unwrap()
    }

    #[test]
    fn oneshot_deterministic_rows() {
        let k = NodeKernel::new(Dim::One);
        // site 1 sees ↓↑↓
        for u in [0.0, 0.5, 0.999] {
            let mut lat = chain(&[DN, UP, DN, DN]);
            oneshot_update(&mut lat, 1, &k, &p(2.0), u).unwrap();
            assert_eq!(lat.get(1).unwrap(), DN);
        }
        // ↑↑↑ at T = 2: S' reads 1 with prob 1 − P ≈ 0.8647, outcome 1 iff u < 0.8647
        for (u, want) in [(0.5, UP), (0.86, UP), (0.87, DN), (0.99, DN)] {
            let mut lat = SpinLattice::chain(4, SpinMode::Discrete, UP).unwrap();
            oneshot_update(&mut lat, 1, &k, &p(2.0), u).unwrap();
            assert_eq!(lat.get(1).unwrap(), want, "u = {u}");
        }

        let k2 = NodeKernel::new(Dim::Two);
        for u in [0.0, 0.5, 0.999] {
            let mut lat = SpinLattice::square(4, 4, SpinMode::Discrete, UP).unwrap();
            lat.write_back(5, DN).unwrap();
            oneshot_update(&mut lat, 5, &k2, &p(1.0), u).unwrap();
            assert_eq!(lat.get(5).unwrap(), UP);
        }
    }

    #[test]
    fn classical_thresholds() {
        // ΔE = −4: site 1 is ↓ between two ↑
        for u in [0.0, 0.999] {
            let mut lat = chain(&[UP, DN, UP, UP]);
            classical_update(&mut lat, 1, &p(2.0), u).unwrap();
            assert_eq!(lat.get(1).unwrap(), UP);
        }
        let mut lat = SpinLattice::chain(4, SpinMode::Discrete, UP).unwrap();
        classical_update(&mut lat, 1, &p(2.0), 0.10).unwrap();
        assert_eq!(lat.get(1).unwrap(), DN);
        let mut lat = SpinLattice::chain(4, SpinMode::Discrete, UP).unwrap();
        classical_update(&mut lat, 1, &p(2.0), 0.20).unwrap();
        assert_eq!(lat.get(1).unwrap(), UP);
    }

    #[test]
    fn ensemble_fixed_points() {
        let k = NodeKernel::new(Dim::Two);
        let mut lat = SpinLattice::square(2, 2, SpinMode::Ensemble, 0.0).unwrap();
        ensemble_update(&mut lat, 0, &k, &p(1.3)).unwrap();
        assert_eq!(lat.get(0).unwrap(), 0.0);

        // all up at low T: q' = 1 − P2 ≈ 1
        let t = 0.2;
        let mut lat = SpinLattice::square(2, 2, SpinMode::Ensemble, 1.0).unwrap();
        ensemble_update(&mut lat, 0, &k, &p(t)).unwrap();
        let q = (lat.get(0).unwrap() + 1.0) / 2.0;
        assert!((q - (1.0 - (-8.0f64 / t).exp())).abs() < 1e-12);
    }

    #[test]
    fn mode_guards() {
        let k = NodeKernel::new(Dim::One);
        let mut ens = SpinLattice::chain(4, SpinMode::Ensemble, 0.0).unwrap();
        assert!(matches!(oneshot_update(&mut ens, 0, &k, &p(1.0), 0.5), Err(EngineError::ModeMismatch { .. })));
        assert!(classical_update(&mut ens, 0, &p(1.0), 0.5).is_err());
        let mut disc = SpinLattice::chain(4, SpinMode::Discrete, 1.0).unwrap();
        assert!(ensemble_update(&mut disc, 0, &k, &p(1.0)).is_err());
        let k2 = NodeKernel::new(Dim::Two);
        assert!(oneshot_update(&mut disc, 0, &k2, &p(1.0), 0.5).is_err());
    }

    #[test]
    fn acceptance_table_levels() {
        let params = p(2.0);
        let t = AcceptanceTable::new(&params);
        for de in [-8, -4, 0, 4, 8] {
            assert_eq!(t.get(de), params.acceptance(de));
        }
    }
}
