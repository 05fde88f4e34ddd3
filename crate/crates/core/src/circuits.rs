//! Node circuits for the 1D and 2D Metropolis rule, and their truth-table check.
//!
//! Spin encoding: qubit value 1 is spin up (+1), 0 is spin down (−1).
//!
//! 1D register (5 qubits), gate list:
//!
//! ```text
//!   qubits: A=0 S=1 B=2 P=3 An=4
//!   0: CNOT -> An [●A ●S ●B]     An = all aligned up
//!   1: CNOT -> An [○A ○S ○B]     An ^= all aligned down
//!   2: NOT S                     propose the flip
//!   3: CNOT -> S  [●An ○P]       undo it when aligned and the coin says stay
//! ```
//!
//! 2D register (10 qubits): the on-site spin is CNOTed into each neighbour so the
//! neighbour qubits hold "disagrees with S"; a ripple counter (c2 c1 c0) adds up
//! the disagreements; the neighbours are restored; then S is flipped unless the
//! count is 0 (ΔE = +8J, keep with prob 1−P2) or 1 (ΔE = +4J, keep with prob 1−P1).
//!
//! ```text
//!   qubits: A=0 B=1 C=2 D=3 S=4 P1=5 P2=6 c0=7 c1=8 c2=9
//!    0-3:  CNOT S->A, S->B, S->C, S->D
//!    4:    CNOT A->c0
//!    5-6:  CNOT -> c1 [●B ●c0], CNOT B->c0
//!    7-8:  CNOT -> c1 [●C ●c0], CNOT C->c0
//!    9-11: CNOT -> c2 [●D ●c0 ●c1], CNOT -> c1 [●D ●c0], CNOT D->c0
//!   12-15: CNOT S->A, S->B, S->C, S->D
//!   16:    NOT S
//!   17:    CNOT -> S [○c0 ○c1 ○c2 ○P2]
//!   18:    CNOT -> S [●c0 ○c1 ○P1]
//! ```
//!
//! The count never exceeds 3 before D is added, so C needs no carry into c2.

use std::fmt;

use thiserror::Error;

use crate::qstate::{Circuit, Control, GateOp, QStateError, QuantumRegister};

/// Tolerance on |observed − expected| per truth-table row.
pub const VERIFY_TOL: f64 = 1e-10;
/// Tolerance for "unchanged with probability 1" checks on preserved qubits.
pub const PRESERVE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("spin value {0} is not ±1")]
    InvalidSpin(i32),
    #[error("expected 2 or 4 neighbours, got {0}")]
    NeighborCount(usize),
    #[error("temperature must be positive and finite, got {0}")]
    Temperature(f64),
    #[error("coupling must be positive (ferromagnetic), got {0}")]
    Coupling(f64),
    #[error("layout does not match circuit: {0}")]
    Layout(String),
    #[error(transparent)]
    QState(#[from] QStateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn from_number(d: u8) -> Option<Dim> {
        match d {
            1 => Some(Dim::One),
            2 => Some(Dim::Two),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }

    pub fn neighbor_count(self) -> usize {
        match self {
            Dim::One => 2,
            Dim::Two => 4,
        }
    }

    /// Number of classical inputs (centre plus neighbours) the node rule sees.
    pub fn input_count(self) -> usize {
        self.neighbor_count() + 1
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Coupling and temperature, with k fixed to 1 so T is in units of J.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingParams {
    coupling: f64,
    temperature: f64,
}

impl IsingParams {
    pub fn new(temperature: f64) -> Result<Self, CircuitError> {
        Self::with_coupling(1.0, temperature)
    }

    pub fn with_coupling(coupling: f64, temperature: f64) -> Result<Self, CircuitError> {
        if !(coupling > 0.0 && coupling.is_finite()) {
            return Err(CircuitError::Coupling(coupling));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(CircuitError::Temperature(temperature));
        }
        Ok(IsingParams { coupling, temperature })
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// min{1, e^{−ΔE/T}} for ΔE given in units of J.
    pub fn acceptance(&self, delta_e: i32) -> f64 {
        if delta_e <= 0 {
            1.0
        } else {
            (-(delta_e as f64) * self.coupling / self.temperature).exp()
        }
    }

    /// P1 = e^{−4J/T}.
    pub fn p1(&self) -> f64 {
        self.acceptance(4)
    }

    /// P2 = e^{−8J/T}.
    pub fn p2(&self) -> f64 {
        self.acceptance(8)
    }

    /// Probabilities loaded into the P qubits, in layout order.
    pub fn prob_levels(&self, dim: Dim) -> Vec<f64> {
        match dim {
            Dim::One => vec![self.p1()],
            Dim::Two => vec![self.p1(), self.p2()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptanceSpec {
    pub delta_e: i32,
    pub flip_prob: f64,
}

fn check_spin(s: i32) -> Result<(), CircuitError> {
    if s == 1 || s == -1 {
        Ok(())
    } else {
        Err(CircuitError::InvalidSpin(s))
    }
}

/// Total-energy change (units of J) from flipping `s`: 2·s·Σ neighbours.
pub fn flip_delta_e(s: i32, neighbors: &[i32]) -> Result<i32, CircuitError> {
    if neighbors.len() != 2 && neighbors.len() != 4 {
        return Err(CircuitError::NeighborCount(neighbors.len()));
    }
    check_spin(s)?;
    let mut sum = 0;
    for &n in neighbors {
        check_spin(n)?;
        sum += n;
    }
    Ok(2 * s * sum)
}

pub fn metropolis_flip_prob(
    s: i32,
    neighbors: &[i32],
    params: &IsingParams,
) -> Result<AcceptanceSpec, CircuitError> {
    let delta_e = flip_delta_e(s, neighbors)?;
    Ok(AcceptanceSpec { delta_e, flip_prob: params.acceptance(delta_e) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Spin,
    /// Neighbour by position: 0=A, 1=B, 2=C, 3=D.
    Neighbor(usize),
    /// Probability qubit, 0 for P (1D) / P1 (2D), 1 for P2.
    Probability(usize),
    Ancilla(usize),
}

/// Assignment of node-register qubits to their roles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeLayout {
    dim: Dim,
    num_qubits: usize,
    spin: usize,
    neighbors: Vec<usize>,
    probs: Vec<usize>,
    ancillas: Vec<usize>,
}

impl NodeLayout {
    pub fn new(
        dim: Dim,
        spin: usize,
        neighbors: Vec<usize>,
        probs: Vec<usize>,
        ancillas: Vec<usize>,
    ) -> Result<Self, CircuitError> {
        let num_qubits = 1 + neighbors.len() + probs.len() + ancillas.len();
        let layout = NodeLayout { dim, num_qubits, spin, neighbors, probs, ancillas };
        layout.validate()?;
        Ok(layout)
    }

    fn validate(&self) -> Result<(), CircuitError> {
        if self.neighbors.len() != self.dim.neighbor_count() {
            return Err(CircuitError::Layout(format!(
                "{} neighbour qubits for a {}D node",
                self.neighbors.len(),
                self.dim
            )));
        }
        if self.probs.len() != self.dim.number() as usize {
            return Err(CircuitError::Layout(format!("{} probability qubits", self.probs.len())));
        }
        let mut seen = vec![false; self.num_qubits];
        for (_, q) in self.roles() {
            if q >= self.num_qubits || seen[q] {
                return Err(CircuitError::Layout(format!("qubit {q} assigned twice or out of range")));
            }
            seen[q] = true;
        }
        Ok(())
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn spin(&self) -> usize {
        self.spin
    }

    pub fn neighbors(&self) -> &[usize] {
        &self.neighbors
    }

    pub fn probs(&self) -> &[usize] {
        &self.probs
    }

    pub fn ancillas(&self) -> &[usize] {
        &self.ancillas
    }

    pub fn roles(&self) -> Vec<(Role, usize)> {
        let mut out = vec![(Role::Spin, self.spin)];
        out.extend(self.neighbors.iter().enumerate().map(|(i, &q)| (Role::Neighbor(i), q)));
        out.extend(self.probs.iter().enumerate().map(|(i, &q)| (Role::Probability(i), q)));
        out.extend(self.ancillas.iter().enumerate().map(|(i, &q)| (Role::Ancilla(i), q)));
        out
    }

    pub fn role_label(&self, role: Role) -> String {
        match role {
            Role::Spin => "S".into(),
            Role::Neighbor(i) => ["A", "B", "C", "D"][i].into(),
            Role::Probability(i) => match self.dim {
                Dim::One => "P".into(),
                Dim::Two => format!("P{}", i + 1),
            },
            Role::Ancilla(i) => match self.dim {
                Dim::One => "An".into(),
                Dim::Two => format!("c{i}"),
            },
        }
    }

    /// Spin-carrying qubits (centre and neighbours) in ascending qubit order.
    pub fn spin_qubits(&self) -> Vec<usize> {
        let mut qs: Vec<usize> = std::iter::once(self.spin).chain(self.neighbors.iter().copied()).collect();
        qs.sort_unstable();
        qs
    }

    /// Labels of [`Self::spin_qubits`], e.g. "ASB" or "ABCDS".
    pub fn spin_labels(&self) -> String {
        self.spin_qubits()
            .into_iter()
            .map(|q| {
                let role = self.roles().into_iter().find(|(_, qq)| *qq == q).unwrap().0;
                self.role_label(role)
            })
            .collect()
    }

    /// Register basis index for classical centre and neighbour bits, with every
    /// other qubit at 0.
    pub fn basis_index(&self, center: bool, neighbors: &[bool]) -> usize {
        let mut idx = usize::from(center) << self.spin;
        for (&q, &b) in self.neighbors.iter().zip(neighbors) {
            idx |= usize::from(b) << q;
        }
        idx
    }

    /// Load a register for a classical update: spins as basis states, P qubits
    /// prepared from `probs`, ancillas at |0⟩.
    pub fn load_classical(
        &self,
        reg: &mut QuantumRegister,
        center: bool,
        neighbors: &[bool],
        probs: &[f64],
    ) -> Result<(), QStateError> {
        reg.reset_to_basis(self.basis_index(center, neighbors));
        for (&q, &p) in self.probs.iter().zip(probs) {
            reg.prepare_superposition(q, p)?;
        }
        Ok(())
    }

    /// Load a register with every spin qubit independently prepared with its
    /// up-probability (ensemble streaming).
    pub fn load_product(
        &self,
        reg: &mut QuantumRegister,
        center_q: f64,
        neighbor_qs: &[f64],
        probs: &[f64],
    ) -> Result<(), QStateError> {
        reg.reset_to_basis(0);
        reg.prepare_superposition(self.spin, center_q)?;
        for (&q, &p) in self.neighbors.iter().zip(neighbor_qs) {
            reg.prepare_superposition(q, p)?;
        }
        for (&q, &p) in self.probs.iter().zip(probs) {
            reg.prepare_superposition(q, p)?;
        }
        Ok(())
    }
}

pub fn build_1d_circuit() -> (Circuit, NodeLayout) {
    let (a, s, b, p, an) = (0, 1, 2, 3, 4);
    let layout = NodeLayout::new(Dim::One, s, vec![a, b], vec![p], vec![an]).expect("static layout");
    let ops = vec![
        GateOp::controlled_not(an, vec![Control::closed(a), Control::closed(s), Control::closed(b)]),
        GateOp::controlled_not(an, vec![Control::open(a), Control::open(s), Control::open(b)]),
        GateOp::not(s),
        GateOp::controlled_not(s, vec![Control::closed(an), Control::open(p)]),
    ];
    (Circuit::from_ops(5, ops).expect("static circuit"), layout)
}

pub fn build_2d_circuit() -> (Circuit, NodeLayout) {
    let nb = [0usize, 1, 2, 3];
    let (s, p1, p2, c0, c1, c2) = (4, 5, 6, 7, 8, 9);
    let layout =
        NodeLayout::new(Dim::Two, s, nb.to_vec(), vec![p1, p2], vec![c0, c1, c2]).expect("static layout");

    let mut ops = Vec::new();
    ops.extend(nb.iter().map(|&x| GateOp::cnot(s, x)));
    let [a, b, c, d] = nb;
    ops.push(GateOp::cnot(a, c0));
    ops.push(GateOp::toffoli(b, c0, c1));
    ops.push(GateOp::cnot(b, c0));
    ops.push(GateOp::toffoli(c, c0, c1));
    ops.push(GateOp::cnot(c, c0));
    ops.push(GateOp::controlled_not(c2, vec![Control::closed(d), Control::closed(c0), Control::closed(c1)]));
    ops.push(GateOp::toffoli(d, c0, c1));
    ops.push(GateOp::cnot(d, c0));
    ops.extend(nb.iter().map(|&x| GateOp::cnot(s, x)));
    ops.push(GateOp::not(s));
    ops.push(GateOp::controlled_not(
        s,
        vec![Control::open(c0), Control::open(c1), Control::open(c2), Control::open(p2)],
    ));
    ops.push(GateOp::controlled_not(s, vec![Control::closed(c0), Control::open(c1), Control::open(p1)]));
    (Circuit::from_ops(10, ops).expect("static circuit"), layout)
}

pub fn build_circuit(dim: Dim) -> (Circuit, NodeLayout) {
    match dim {
        Dim::One => build_1d_circuit(),
        Dim::Two => build_2d_circuit(),
    }
}

fn spin_of(bit: bool) -> i32 {
    if bit {
        1
    } else {
        -1
    }
}

/// One classical input of the node rule and what the circuit did with it.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct VerificationRow {
    pub temperature: f64,
    /// Spin-qubit bits in ascending qubit order (see [`NodeLayout::spin_labels`]).
    pub input_bits: String,
    pub delta_e: i32,
    /// Probability that S' measures 1 according to the classical rule.
    pub expected_prob: f64,
    /// prob_one(S') read off the simulated register.
    pub observed_prob: f64,
    pub abs_error: f64,
    /// Neighbour qubits unchanged and P-qubit marginals intact.
    pub neighbors_preserved: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub dim: Dim,
    pub spin_labels: String,
    pub gate_count: usize,
    pub multi_qubit_gates: usize,
    pub rows: Vec<VerificationRow>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerificationRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn max_abs_error(&self) -> f64 {
        self.rows.iter().map(|r| r.abs_error).fold(0.0, f64::max)
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.rows.extend(other.rows);
    }

    /// CSV with header
    /// `temperature,input_bits,delta_e,expected_prob,observed_prob,abs_error,neighbors_preserved,pass`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Enumerate every classical spin assignment, run the circuit on it and compare
/// the S' marginal against the Metropolis rule.
pub fn verify_circuit(
    circuit: &Circuit,
    layout: &NodeLayout,
    params: &IsingParams,
) -> Result<VerificationReport, CircuitError> {
    if circuit.num_qubits() != layout.num_qubits() {
        return Err(CircuitError::Layout(format!(
            "circuit has {} qubits, layout {}",
            circuit.num_qubits(),
            layout.num_qubits()
        )));
    }
    let dim = layout.dim();
    let probs = params.prob_levels(dim);
    let spin_qubits = layout.spin_qubits();
    let mut reg = QuantumRegister::new(layout.num_qubits())?;
    let mut rows = Vec::with_capacity(1 << dim.input_count());

    // enumerate in the order of the spin qubits so rows read like a binary count
    for code in 0..(1usize << spin_qubits.len()) {
        let bit_of = |q: usize| {
            let pos = spin_qubits.iter().position(|&x| x == q).unwrap();
            (code >> (spin_qubits.len() - 1 - pos)) & 1 == 1
        };
        let center = bit_of(layout.spin());
        let neighbors: Vec<bool> = layout.neighbors().iter().map(|&q| bit_of(q)).collect();
        let input_bits: String =
            spin_qubits.iter().map(|&q| if bit_of(q) { '1' } else { '0' }).collect();

        let nspins: Vec<i32> = neighbors.iter().map(|&b| spin_of(b)).collect();
        let spec = metropolis_flip_prob(spin_of(center), &nspins, params)?;
        let expected_prob = if center { 1.0 - spec.flip_prob } else { spec.flip_prob };

        layout.load_classical(&mut reg, center, &neighbors, &probs)?;
        reg.apply_circuit(circuit)?;
        let observed_prob = reg.prob_one(layout.spin())?;

        let mut preserved = true;
        for (&q, &b) in layout.neighbors().iter().zip(&neighbors) {
            let p = reg.prob_one(q)?;
            preserved &= (p - if b { 1.0 } else { 0.0 }).abs() <= PRESERVE_TOL;
        }
        for (&q, &p) in layout.probs().iter().zip(&probs) {
            preserved &= (reg.prob_one(q)? - p).abs() <= PRESERVE_TOL;
        }

        let abs_error = (observed_prob - expected_prob).abs();
        rows.push(VerificationRow {
            temperature: params.temperature(),
            input_bits,
            delta_e: spec.delta_e,
            expected_prob,
            observed_prob,
            abs_error,
            neighbors_preserved: preserved,
            pass: abs_error <= VERIFY_TOL && preserved,
        });
    }

    Ok(VerificationReport {
        dim,
        spin_labels: layout.spin_labels(),
        gate_count: circuit.len(),
        multi_qubit_gates: circuit.multi_qubit_gate_count(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: f64) -> IsingParams {
        IsingParams::new(t).unwrap()
    }

    #[test]
    fn delta_e_levels() {
        assert_eq!(flip_delta_e(1, &[1, 1]), Ok(4));
        assert_eq!(flip_delta_e(1, &[1, -1]), Ok(0));
        assert_eq!(flip_delta_e(-1, &[1, 1, 1, 1]), Ok(-8));
        assert_eq!(flip_delta_e(0, &[1, 1]), Err(CircuitError::InvalidSpin(0)));
        assert_eq!(flip_delta_e(1, &[1, 2]), Err(CircuitError::InvalidSpin(2)));
        assert_eq!(flip_delta_e(1, &[1, 1, 1]), Err(CircuitError::NeighborCount(3)));
    }

    #[test]
    fn flip_probabilities() {
        let a = metropolis_flip_prob(-1, &[-1, -1], &params(2.0)).unwrap();
        assert_eq!(a.delta_e, 4);
        assert!((a.flip_prob - 0.135335).abs() < 1e-6);
        for t in [0.1, 1.0, 50.0] {
            assert_eq!(metropolis_flip_prob(1, &[1, -1], &params(t)).unwrap().flip_prob, 1.0);
        }
        let a = metropolis_flip_prob(1, &[1, 1, 1, 1], &params(2.269)).unwrap();
        assert!((a.flip_prob - 0.0295).abs() < 1e-4);
    }

    #[test]
    fn params_validation() {
        assert!(IsingParams::new(0.0).is_err());
        assert!(IsingParams::new(-1.0).is_err());
        assert!(IsingParams::new(f64::INFINITY).is_err());
        assert_eq!(IsingParams::with_coupling(-1.0, 2.0), Err(CircuitError::Coupling(-1.0)));
    }

    #[test]
    fn qubit_budgets() {
        let (c1, l1) = build_1d_circuit();
        assert_eq!(c1.num_qubits(), 5);
        assert_eq!(l1.num_qubits(), 5);
        assert_eq!(l1.spin_labels(), "ASB");
        let (c2, l2) = build_2d_circuit();
        assert!(c2.num_qubits() <= 12);
        assert_eq!(l2.spin_labels(), "ABCDS");
        for l in [&l1, &l2] {
            let mut qs: Vec<usize> = l.roles().into_iter().map(|(_, q)| q).collect();
            qs.sort_unstable();
            assert_eq!(qs, (0..l.num_qubits()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn layout_rejects_bad_assignments() {
        assert!(NodeLayout::new(Dim::One, 0, vec![0, 1], vec![2], vec![]).is_err());
        assert!(NodeLayout::new(Dim::Two, 0, vec![1, 2], vec![3, 4], vec![]).is_err());
    }

    /// Prob S'=1 for one classical input, read from the simulated register.
    fn run_1d(center: bool, a: bool, b: bool, t: f64) -> f64 {
        let (c, l) = build_1d_circuit();
        let mut reg = QuantumRegister::new(5).unwrap();
        l.load_classical(&mut reg, center, &[a, b], &params(t).prob_levels(Dim::One)).unwrap();
        reg.apply_circuit(&c).unwrap();
        reg.prob_one(l.spin()).unwrap()
    }

    #[test]
    fn one_d_truth_table_rows() {
        let t = 2.0;
        let p = (-4.0f64 / t).exp();
        // ↓↓↑ → ↑
        assert!((run_1d(false, false, true, t) - 1.0).abs() < 1e-12);
        // ↓↑↓ → ↓
        assert!(run_1d(true, false, false, t).abs() < 1e-12);
        // ↑↑↑ → ↓ with probability P
        assert!((1.0 - run_1d(true, true, true, t) - p).abs() < 1e-12);
        // ↓↓↓ → ↑ with probability P
        assert!((run_1d(false, false, false, t) - p).abs() < 1e-12);
    }

    fn run_2d(center: bool, nb: [bool; 4], t: f64) -> f64 {
        let (c, l) = build_2d_circuit();
        let mut reg = QuantumRegister::new(l.num_qubits()).unwrap();
        l.load_classical(&mut reg, center, &nb, &params(t).prob_levels(Dim::Two)).unwrap();
        reg.apply_circuit(&c).unwrap();
        reg.prob_one(l.spin()).unwrap()
    }

    #[test]
    fn two_d_rows() {
        let t = 2.269;
        let p1 = (-4.0f64 / t).exp();
        // S=↑, neighbours ↑↑↑↓: flip with P1
        assert!((1.0 - run_2d(true, [true, true, true, false], t) - p1).abs() < 1e-12);
        // S=↑, ↑↑↓↓: ΔE = 0, always flips
        assert!(run_2d(true, [true, true, false, false], t).abs() < 1e-12);
        // S=↓, ↑↑↑↑: ΔE = −8, always flips
        assert!((run_2d(false, [true; 4], t) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn verify_reference_circuits() {
        let (c, l) = build_1d_circuit();
        let r = verify_circuit(&c, &l, &params(2.0)).unwrap();
        assert_eq!(r.rows.len(), 8);
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.gate_count, 4);

        let (c, l) = build_2d_circuit();
        let r = verify_circuit(&c, &l, &params(2.269)).unwrap();
        assert_eq!(r.rows.len(), 32);
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn every_gate_is_load_bearing() {
        for dim in [Dim::One, Dim::Two] {
            let (c, l) = build_circuit(dim);
            for i in 0..c.len() {
                let broken = c.without_op(i);
                let r = verify_circuit(&broken, &l, &params(2.269)).unwrap();
                assert!(!r.passed(), "{dim}D circuit still passes without gate {i}: {}", c.ops()[i]);
            }
        }
    }

    #[test]
    fn report_csv_header() {
        let (c, l) = build_1d_circuit();
        let r = verify_circuit(&c, &l, &params(2.0)).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "temperature,input_bits,delta_e,expected_prob,observed_prob,abs_error,neighbors_preserved,pass"
        );
        assert_eq!(lines.count(), 8);
    }

    #[test]
    fn layout_mismatch_is_an_error() {
        let (c, _) = build_1d_circuit();
        let (_, l) = build_2d_circuit();
        assert!(matches!(verify_circuit(&c, &l, &params(1.0)), Err(CircuitError::Layout(_))));
    }
}
