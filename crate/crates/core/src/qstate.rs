//! Exact dense statevector for a single node register.
//!
//! Qubit `q` corresponds to bit `q` of the basis index, so the ket `|q0 q1 ...⟩`
//! written left to right has qubit 0 first. Every gate in the supported set is a
//! (polarity-)controlled basis permutation, so amplitudes are only ever moved,
//! never mixed. The only operation that creates superposition is
//! [`QuantumRegister::prepare_superposition`].

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Largest register the simulator will allocate (2^16 amplitudes).
pub const MAX_QUBITS: usize = 16;

/// Tolerance used when checking that a qubit is in a definite basis state.
const ZERO_TOL: f64 = 1e-24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QStateError {
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("qubit {0} is used more than once by a single gate")]
    IndexCollision(usize),
    #[error("a NOT gate cannot carry controls; use a controlled NOT")]
    ControlledPlainNot,
    #[error("qubit {0} is in superposition, expected a basis state")]
    NotBasisState(usize),
    #[error("qubit {0} is not in |0⟩")]
    NotZero(usize),
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("uniform draw {0} outside [0, 1)")]
    UniformDraw(f64),
    #[error("circuit is defined on {circuit} qubits but the register has {register}")]
    DimensionMismatch { circuit: usize, register: usize },
}

/// Which control value enables a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    /// Filled circle: fires when the control is 1.
    Closed,
    /// Open circle: fires when the control is 0.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn closed(qubit: usize) -> Self {
        Control { qubit, polarity: Polarity::Closed }
    }

    pub fn open(qubit: usize) -> Self {
        Control { qubit, polarity: Polarity::Open }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Not { target: usize },
    Swap { a: usize, b: usize },
    ControlledNot { target: usize },
}

/// One reversible gate: a NOT, SWAP or NOT guarded by polarity-annotated controls.
///
/// A controlled NOT with no controls acts as NOT; with two closed controls it is
/// the Toffoli gate. Controls on a SWAP give a controlled swap.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GateOp {
    pub kind: GateKind,
    pub controls: Vec<Control>,
}

impl GateOp {
    pub fn not(target: usize) -> Self {
        GateOp { kind: GateKind::Not { target }, controls: Vec::new() }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        GateOp { kind: GateKind::Swap { a, b }, controls: Vec::new() }
    }

    pub fn controlled_not(target: usize, controls: Vec<Control>) -> Self {
        GateOp { kind: GateKind::ControlledNot { target }, controls }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::controlled_not(target, vec![Control::closed(control)])
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Self {
        Self::controlled_not(target, vec![Control::closed(c1), Control::closed(c2)])
    }

    pub fn with_controls(mut self, controls: Vec<Control>) -> Self {
        self.controls = controls;
        self
    }

    /// All qubit indices the gate touches, targets first.
    pub fn qubits(&self) -> Vec<usize> {
        let mut out = match self.kind {
            GateKind::Not { target } | GateKind::ControlledNot { target } => vec![target],
            GateKind::Swap { a, b } => vec![a, b],
        };
        out.extend(self.controls.iter().map(|c| c.qubit));
        out
    }

    /// Number of qubits the gate acts on jointly.
    pub fn arity(&self) -> usize {
        self.qubits().len()
    }

    pub fn validate(&self, num_qubits: usize) -> Result<(), QStateError> {
        if matches!(self.kind, GateKind::Not { .. }) && !self.controls.is_empty() {
            return Err(QStateError::ControlledPlainNot);
        }
        let mut seen = 0u64;
        for q in self.qubits() {
            if q >= num_qubits {
                return Err(QStateError::QubitOutOfRange { index: q, num_qubits });
            }
            if seen & (1 << q) != 0 {
                return Err(QStateError::IndexCollision(q));
            }
            seen |= 1 << q;
        }
        Ok(())
    }

    fn control_masks(&self) -> (usize, usize) {
        let mut closed = 0;
        let mut open = 0;
        for c in &self.controls {
            match c.polarity {
                Polarity::Closed => closed |= 1 << c.qubit,
                Polarity::Open => open |= 1 << c.qubit,
            }
        }
        (closed, open)
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GateKind::Not { target } => write!(f, "NOT q{target}")?,
            GateKind::Swap { a, b } => write!(f, "SWAP q{a} q{b}")?,
            GateKind::ControlledNot { target } => write!(f, "CNOT -> q{target}")?,
        }
        if !self.controls.is_empty() {
            write!(f, " [")?;
            for (i, c) in self.controls.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                let mark = match c.polarity {
                    Polarity::Closed => '●',
                    Polarity::Open => '○',
                };
                write!(f, "{mark}q{}", c.qubit)?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

/// An ordered gate program over a fixed number of qubits.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Circuit {
    num_qubits: usize,
    ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit { num_qubits, ops: Vec::new() }
    }

    pub fn from_ops(num_qubits: usize, ops: Vec<GateOp>) -> Result<Self, QStateError> {
        let mut c = Circuit::new(num_qubits);
        for op in ops {
            c.push(op)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, op: GateOp) -> Result<(), QStateError> {
        op.validate(self.num_qubits)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Gates acting on two or more qubits.
    pub fn multi_qubit_gate_count(&self) -> usize {
        self.ops.iter().filter(|op| op.arity() > 1).count()
    }

    /// The inverse program. Every gate in the set is self-inverse, so this is the
    /// same ops in reverse order.
    pub fn inverse(&self) -> Circuit {
        Circuit { num_qubits: self.num_qubits, ops: self.ops.iter().rev().cloned().collect() }
    }

    /// Copy of the circuit with op `index` deleted.
    pub fn without_op(&self, index: usize) -> Circuit {
        let mut ops = self.ops.clone();
        if index < ops.len() {
            ops.remove(index);
        }
        Circuit { num_qubits: self.num_qubits, ops }
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, op) in self.ops.iter().enumerate() {
            writeln!(f, "{i:>3}: {op}")?;
        }
        Ok(())
    }
}

/// Statevector of one node register.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRegister {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumRegister {
    /// A register in `|0...0⟩`.
    pub fn new(num_qubits: usize) -> Result<Self, QStateError> {
        Self::basis(num_qubits, 0)
    }

    /// A register in the computational basis state with the given index.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, QStateError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(QStateError::QubitCount(num_qubits));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index & ((1 << num_qubits) - 1)] = Complex64::new(1.0, 0.0);
        Ok(QuantumRegister { num_qubits, amplitudes })
    }

    /// Reset in place to a basis state without reallocating.
    pub fn reset_to_basis(&mut self, index: usize) {
        self.amplitudes.fill(Complex64::new(0.0, 0.0));
        let mask = self.amplitudes.len() - 1;
        self.amplitudes[index & mask] = Complex64::new(1.0, 0.0);
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest |Im| over all amplitudes. Stays 0 for every circuit here.
    pub fn max_imag(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.im.abs()).fold(0.0, f64::max)
    }

    fn check_qubit(&self, qubit: usize) -> Result<usize, QStateError> {
        if qubit >= self.num_qubits {
            return Err(QStateError::QubitOutOfRange { index: qubit, num_qubits: self.num_qubits });
        }
        Ok(1 << qubit)
    }

    /// Split the squared norm by the value of one qubit: (weight on 0, weight on 1).
    fn weights(&self, bit: usize) -> (f64, f64) {
        let mut w0 = 0.0;
        let mut w1 = 0.0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if i & bit == 0 {
                w0 += a.norm_sqr();
            } else {
                w1 += a.norm_sqr();
            }
        }
        (w0, w1)
    }

    /// Force a qubit that is currently in a definite basis state to `value`.
    pub fn set_basis(&mut self, qubit: usize, value: bool) -> Result<(), QStateError> {
        let bit = self.check_qubit(qubit)?;
        let (w0, w1) = self.weights(bit);
        let current = match (w0 > ZERO_TOL, w1 > ZERO_TOL) {
            (true, false) => false,
            (false, true) => true,
            _ => return Err(QStateError::NotBasisState(qubit)),
        };
        if current != value {
            self.flip(bit, 0, 0);
        }
        Ok(())
    }

    /// Rotate a qubit from `|0⟩` to `√(1−P)|0⟩ + √P|1⟩` with real non-negative amplitudes.
    pub fn prepare_superposition(&mut self, qubit: usize, prob_one: f64) -> Result<(), QStateError> {
        if !(0.0..=1.0).contains(&prob_one) {
            return Err(QStateError::Probability(prob_one));
        }
        let bit = self.check_qubit(qubit)?;
        let (_, w1) = self.weights(bit);
        if w1 > ZERO_TOL {
            return Err(QStateError::NotZero(qubit));
        }
        let amp_one = prob_one.sqrt();
        let amp_zero = (1.0 - prob_one).sqrt();
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let a = self.amplitudes[i];
                self.amplitudes[i] = a * amp_zero;
                self.amplitudes[i | bit] = a * amp_one;
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, op: &GateOp) -> Result<(), QStateError> {
        op.validate(self.num_qubits)?;
        self.apply_unchecked(op);
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<(), QStateError> {
        if circuit.num_qubits() != self.num_qubits {
            return Err(QStateError::DimensionMismatch {
                circuit: circuit.num_qubits(),
                register: self.num_qubits,
            });
        }
        // ops were validated when pushed onto the circuit
        for op in circuit.ops() {
            self.apply_unchecked(op);
        }
        Ok(())
    }

    fn apply_unchecked(&mut self, op: &GateOp) {
        let (closed, open) = op.control_masks();
        match op.kind {
            GateKind::Not { target } | GateKind::ControlledNot { target } => {
                self.flip(1 << target, closed, open)
            }
            GateKind::Swap { a, b } => self.swap(1 << a, 1 << b, closed, open),
        }
    }

    /// Exchange amplitude pairs differing in `target`, restricted to indices whose
    /// closed controls are 1 and open controls are 0. Only matching indices are
    /// visited.
    fn flip(&mut self, target: usize, closed: usize, open: usize) {
        let dim = self.amplitudes.len();
        let free = (dim - 1) & !(target | closed | open);
        for_each_subset(free, |s| {
            let i = s | closed;
            self.amplitudes.swap(i, i | target);
        });
    }

    fn swap(&mut self, a: usize, b: usize, closed: usize, open: usize) {
        let dim = self.amplitudes.len();
        let free = (dim - 1) & !(a | b | closed | open);
        for_each_subset(free, |s| {
            let i = s | closed;
            self.amplitudes.swap(i | a, i | b);
        });
    }

    /// Probability that measuring `qubit` gives 1. Does not disturb the state.
    pub fn prob_one(&self, qubit: usize) -> Result<f64, QStateError> {
        let bit = self.check_qubit(qubit)?;
        Ok(self.weights(bit).1)
    }

    /// Destructive projective measurement driven by an external uniform draw.
    ///
    /// Returns 1 iff `u` is below the probability of outcome 1; the register then
    /// collapses onto the observed branch and is renormalized.
    pub fn measure_qubit(&mut self, qubit: usize, u: f64) -> Result<bool, QStateError> {
        if !(0.0..1.0).contains(&u) {
            return Err(QStateError::UniformDraw(u));
        }
        let bit = self.check_qubit(qubit)?;
        let (w0, w1) = self.weights(bit);
        let total = w0 + w1;
        let outcome = u < w1 / total;
        let kept = if outcome { w1 } else { w0 };
        let scale = 1.0 / kept.sqrt();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        Ok(outcome)
    }
}

/// Visit every subset of the bit mask `mask`, including 0 and `mask` itself.
fn for_each_subset(mask: usize, mut f: impl FnMut(usize)) {
    let mut s = 0usize;
    loop {
        f(s);
        s = s.wrapping_sub(mask) & mask;
        if s == 0 {
            break;
        }
    }
}
