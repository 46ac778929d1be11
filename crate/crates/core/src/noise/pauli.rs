//! Pauli-frame propagation through small Clifford circuits.
//!
//! Each noisy element is modelled as a perfect operation followed by a Pauli
//! error. Two-qubit elements (local CNOTs and Bell-pair preparation) draw one
//! of the 15 non-identity two-qubit Paulis with probability `eps / 15`; a
//! noisy measurement flips its outcome with probability `eps_m`. Every single
//! error insertion is pushed through the rest of the circuit and the bit-flip
//! component landing on the tracked qubit is summed to first order.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ErrorSymbol, LinearForm};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("element {index} ({name}) is not a Clifford operation")]
    NonClifford { index: usize, name: &'static str },
    #[error("element {index} refers to qubit {qubit}, but the circuit has {num_qubits} qubits")]
    QubitOutOfRange {
        index: usize,
        qubit: usize,
        num_qubits: usize,
    },
    #[error("element {index} uses qubit {qubit} twice")]
    RepeatedQubit { index: usize, qubit: usize },
    #[error("element {index} consumes Bell pair ({a}, {b}) that was never prepared")]
    MissingBellPair { index: usize, a: usize, b: usize },
    #[error("tracked qubit {0} is out of range")]
    TrackedOutOfRange(usize),
}

/// Single-qubit Pauli operator, phases ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn has_x(self) -> bool {
        self.bits().0
    }

    pub fn has_z(self) -> bool {
        self.bits().1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Z,
    X,
}

/// Circuit element. Qubits are plain indices into the circuit's register.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Element {
    /// Local CNOT; when `noisy`, followed by two-qubit depolarizing noise `eps_cx`.
    Cnot {
        control: usize,
        target: usize,
        #[serde(default = "yes")]
        noisy: bool,
    },
    /// Fresh Bell pair on `(a, b)` followed by two-qubit depolarizing noise `eps_b`.
    BellPair { a: usize, b: usize },
    /// CNOT between modules, consuming the Bell pair `(a, b)` where `a` sits
    /// with the control and `b` with the target. Expands to
    /// `CNOT(control, a)`, `M_Z(a)` steering `X` onto `b`, `CNOT(b, target)`
    /// and `M_X(b)` steering `Z` onto the control.
    TeleportedCnot {
        control: usize,
        target: usize,
        a: usize,
        b: usize,
    },
    Hadamard { qubit: usize },
    Phase { qubit: usize },
    T { qubit: usize },
    /// Measurement whose (possibly flipped) outcome triggers the listed
    /// Pauli corrections.
    Measure {
        qubit: usize,
        basis: Basis,
        #[serde(default = "yes")]
        noisy: bool,
        #[serde(default)]
        feed_forward: Vec<(usize, Pauli)>,
    },
}

fn yes() -> bool {
    true
}

impl Element {
    fn name(&self) -> &'static str {
        match self {
            Element::Cnot { .. } => "cnot",
            Element::BellPair { .. } => "bell_pair",
            Element::TeleportedCnot { .. } => "teleported_cnot",
            Element::Hadamard { .. } => "hadamard",
            Element::Phase { .. } => "phase",
            Element::T { .. } => "t",
            Element::Measure { .. } => "measure",
        }
    }

    fn qubits(&self) -> Vec<usize> {
        match self {
            Element::Cnot { control, target, .. } => vec![*control, *target],
            Element::BellPair { a, b } => vec![*a, *b],
            Element::TeleportedCnot { control, target, a, b } => vec![*control, *target, *a, *b],
            Element::Hadamard { qubit } | Element::Phase { qubit } | Element::T { qubit } => {
                vec![*qubit]
            }
            Element::Measure { qubit, feed_forward, .. } => {
                let mut q = vec![*qubit];
                q.extend(feed_forward.iter().map(|(k, _)| *k));
                q
            }
        }
    }
}

/// A circuit plus the qubit whose bit-flip probability is wanted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliCircuit {
    pub num_qubits: usize,
    pub tracked: usize,
    pub elements: Vec<Element>,
}

/// Primitive operation after teleported gates have been expanded.
#[derive(Debug, Clone)]
enum Op {
    Cnot(usize, usize),
    Prepare(usize, usize),
    H(usize),
    S(usize),
    Measure {
        qubit: usize,
        basis: Basis,
        feed_forward: Vec<(usize, Pauli)>,
    },
}

#[derive(Debug, Clone)]
enum Insertion {
    /// 15-way two-qubit error after the op at this position.
    TwoQubit { a: usize, b: usize, symbol: ErrorSymbol },
    /// Outcome flip of the measurement at this position.
    Flip { qubit: usize, basis: Basis },
}

#[derive(Debug, Clone)]
struct Expanded {
    ops: Vec<Op>,
    /// `(position, insertion)`; two-qubit errors act after `ops[position]`,
    /// flips act just before `ops[position]`.
    insertions: Vec<(usize, Insertion)>,
}

impl PauliCircuit {
    pub fn new(num_qubits: usize, tracked: usize, elements: Vec<Element>) -> Self {
        Self {
            num_qubits,
            tracked,
            elements,
        }
    }

    fn validate(&self) -> Result<(), CircuitError> {
        if self.tracked >= self.num_qubits {
            return Err(CircuitError::TrackedOutOfRange(self.tracked));
        }
        let mut prepared: Vec<(usize, usize)> = Vec::new();
        for (index, element) in self.elements.iter().enumerate() {
            if let Element::T { .. } = element {
                return Err(CircuitError::NonClifford {
                    index,
                    name: element.name(),
                });
            }
            let qubits = element.qubits();
            for (i, &qubit) in qubits.iter().enumerate() {
                if qubit >= self.num_qubits {
                    return Err(CircuitError::QubitOutOfRange {
                        index,
                        qubit,
                        num_qubits: self.num_qubits,
                    });
                }
                // Feed-forward targets may coincide with each other, but the
                // gate operands must be distinct.
                let operands = match element {
                    Element::Measure { .. } => 1,
                    _ => qubits.len(),
                };
                if i < operands && qubits[..i].contains(&qubit) {
                    return Err(CircuitError::RepeatedQubit { index, qubit });
                }
            }
            match element {
                Element::BellPair { a, b } => prepared.push((*a, *b)),
                Element::TeleportedCnot { a, b, .. } => {
                    let pos = prepared
                        .iter()
                        .position(|&p| p == (*a, *b))
                        .ok_or(CircuitError::MissingBellPair { index, a: *a, b: *b })?;
                    prepared.swap_remove(pos);
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn expand(&self) -> Expanded {
        let mut ops = Vec::new();
        let mut insertions = Vec::new();
        let push_measure = |ops: &mut Vec<Op>,
                                insertions: &mut Vec<(usize, Insertion)>,
                                qubit,
                                basis,
                                noisy,
                                feed_forward| {
            if noisy {
                insertions.push((ops.len(), Insertion::Flip { qubit, basis }));
            }
            ops.push(Op::Measure {
                qubit,
                basis,
                feed_forward,
            });
        };
        for element in &self.elements {
            match element {
                Element::Cnot { control, target, noisy } => {
                    ops.push(Op::Cnot(*control, *target));
                    if *noisy {
                        insertions.push((
                            ops.len() - 1,
                            Insertion::TwoQubit {
                                a: *control,
                                b: *target,
                                symbol: ErrorSymbol::Cx,
                            },
                        ));
                    }
                }
                Element::BellPair { a, b } => {
                    ops.push(Op::Prepare(*a, *b));
                    insertions.push((
                        ops.len() - 1,
                        Insertion::TwoQubit {
                            a: *a,
                            b: *b,
                            symbol: ErrorSymbol::Bell,
                        },
                    ));
                }
                Element::TeleportedCnot { control, target, a, b } => {
                    ops.push(Op::Cnot(*control, *a));
                    insertions.push((
                        ops.len() - 1,
                        Insertion::TwoQubit {
                            a: *control,
                            b: *a,
                            symbol: ErrorSymbol::Cx,
                        },
                    ));
                    push_measure(&mut ops, &mut insertions, *a, Basis::Z, true, vec![(*b, Pauli::X)]);
                    ops.push(Op::Cnot(*b, *target));
                    insertions.push((
                        ops.len() - 1,
                        Insertion::TwoQubit {
                            a: *b,
                            b: *target,
                            symbol: ErrorSymbol::Cx,
                        },
                    ));
                    push_measure(
                        &mut ops,
                        &mut insertions,
                        *b,
                        Basis::X,
                        true,
                        vec![(*control, Pauli::Z)],
                    );
                }
                Element::Hadamard { qubit } => ops.push(Op::H(*qubit)),
                Element::Phase { qubit } => ops.push(Op::S(*qubit)),
                Element::T { .. } => unreachable!("rejected by validate"),
                Element::Measure {
                    qubit,
                    basis,
                    noisy,
                    feed_forward,
                } => push_measure(&mut ops, &mut insertions, *qubit, *basis, *noisy, feed_forward.clone()),
            }
        }
        Expanded { ops, insertions }
    }
}

/// Pauli frame over a register, one `(x, z)` pair per qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Frame {
    x: Vec<bool>,
    z: Vec<bool>,
}

impl Frame {
    fn new(n: usize) -> Self {
        Self {
            x: vec![false; n],
            z: vec![false; n],
        }
    }

    fn apply(&mut self, qubit: usize, pauli: Pauli) {
        let (x, z) = pauli.bits();
        self.x[qubit] ^= x;
        self.z[qubit] ^= z;
    }

    fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x[qubit], self.z[qubit])
    }

    fn propagate(&mut self, op: &Op) {
        match op {
            Op::Cnot(c, t) => {
                self.x[*t] ^= self.x[*c];
                self.z[*c] ^= self.z[*t];
            }
            Op::Prepare(a, b) => {
                for q in [*a, *b] {
                    self.x[q] = false;
                    self.z[q] = false;
                }
            }
            Op::H(q) => std::mem::swap(&mut self.x[*q], &mut self.z[*q]),
            Op::S(q) => self.z[*q] ^= self.x[*q],
            Op::Measure {
                qubit,
                basis,
                feed_forward,
            } => {
                let flipped = match basis {
                    Basis::Z => self.x[*qubit],
                    Basis::X => self.z[*qubit],
                };
                if flipped {
                    for (q, p) in feed_forward {
                        self.apply(*q, *p);
                    }
                }
            }
        }
    }
}

fn all_two_qubit_paulis() -> impl Iterator<Item = (Pauli, Pauli)> {
    [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z]
        .into_iter()
        .flat_map(|a| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z].map(move |b| (a, b)))
        .filter(|&(a, b)| (a, b) != (Pauli::I, Pauli::I))
}

/// First-order bit- and phase-flip coefficients on the tracked qubit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Marginals {
    pub bit_flip: LinearForm,
    pub phase_flip: LinearForm,
}

/// Propagates every single error insertion through `circuit` and returns the
/// summed probability (as a linear form in the error symbols) that the
/// tracked qubit ends up with an `X` and with a `Z` component.
pub fn derive_marginals(circuit: &PauliCircuit) -> Result<Marginals, CircuitError> {
    circuit.validate()?;
    let expanded = circuit.expand();
    let mut bit_flip = LinearForm::zero();
    let mut phase_flip = LinearForm::zero();
    let fifteenth = Ratio::new(1, 15);

    let mut run = |start: usize, init: &[(usize, Pauli)], symbol: ErrorSymbol, weight: Ratio<i64>| {
        let mut frame = Frame::new(circuit.num_qubits);
        for &(q, p) in init {
            frame.apply(q, p);
        }
        for op in &expanded.ops[start..] {
            frame.propagate(op);
        }
        let hit = frame.get(circuit.tracked);
        if hit.has_x() {
            bit_flip.add(symbol, weight);
        }
        if hit.has_z() {
            phase_flip.add(symbol, weight);
        }
    };

    for (position, insertion) in &expanded.insertions {
        match insertion {
            Insertion::TwoQubit { a, b, symbol } => {
                for (pa, pb) in all_two_qubit_paulis() {
                    run(position + 1, &[(*a, pa), (*b, pb)], *symbol, fifteenth);
                }
            }
            Insertion::Flip { qubit, basis } => {
                let pauli = match basis {
                    Basis::Z => Pauli::X,
                    Basis::X => Pauli::Z,
                };
                run(*position, &[(*qubit, pauli)], ErrorSymbol::Meas, Ratio::from_integer(1));
            }
        }
    }
    Ok(Marginals {
        bit_flip,
        phase_flip,
    })
}

/// Bit-flip coefficients on the tracked qubit.
pub fn derive_flip_rates(circuit: &PauliCircuit) -> Result<LinearForm, CircuitError> {
    derive_marginals(circuit).map(|m| m.bit_flip)
}

/// Which Bell-pair qubit carries an injected error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellQubit {
    /// The half held in the control's module.
    First,
    /// The half held in the target's module.
    Second,
}

/// Pushes a single Pauli on one Bell-pair qubit through a noiseless
/// teleported CNOT and returns the resulting `(control, target)` Paulis.
pub fn teleported_gate_propagation(error: Pauli, on: BellQubit) -> (Pauli, Pauli) {
    let (control, target, a, b) = (0, 1, 2, 3);
    let ops = [
        Op::Cnot(control, a),
        Op::Measure {
            qubit: a,
            basis: Basis::Z,
            feed_forward: vec![(b, Pauli::X)],
        },
        Op::Cnot(b, target),
        Op::Measure {
            qubit: b,
            basis: Basis::X,
            feed_forward: vec![(control, Pauli::Z)],
        },
    ];
    let mut frame = Frame::new(4);
    frame.apply(if on == BellQubit::First { a } else { b }, error);
    for op in &ops {
        frame.propagate(op);
    }
    (frame.get(control), frame.get(target))
}

/// Marginal probability (in units of the element's error rate) that the
/// 15-way Bell-pair error acts as an `X` on one half once the pair's `XX`
/// and `ZZ` stabilizers are factored out.
pub fn bell_pair_x_marginal() -> Ratio<i64> {
    let count = all_two_qubit_paulis()
        .filter(|(a, b)| a.has_x() != b.has_x())
        .count();
    Ratio::new(count as i64, 15)
}

/// Standard per-cycle circuits for each noise region.
pub mod circuits {
    use super::{Basis, Element, PauliCircuit};

    fn cnot(control: usize, target: usize) -> Element {
        Element::Cnot {
            control,
            target,
            noisy: true,
        }
    }

    fn readout(qubit: usize) -> Element {
        Element::Measure {
            qubit,
            basis: Basis::Z,
            noisy: true,
            feed_forward: Vec::new(),
        }
    }

    /// Appends a Bell pair and a teleported CNOT using fresh qubits.
    fn teleported(elements: &mut Vec<Element>, next: &mut usize, control: usize, target: usize) {
        let (a, b) = (*next, *next + 1);
        *next += 2;
        elements.push(Element::BellPair { a, b });
        elements.push(Element::TeleportedCnot { control, target, a, b });
    }

    /// Data qubit 0: target of two X-check CNOTs, control of two Z-check CNOTs.
    pub fn bulk_data() -> PauliCircuit {
        PauliCircuit::new(5, 0, vec![cnot(1, 0), cnot(0, 2), cnot(3, 0), cnot(0, 4)])
    }

    /// Z-check syndrome qubit 0: target of four data CNOTs, then read out.
    pub fn bulk_syndrome() -> PauliCircuit {
        PauliCircuit::new(5, 0, vec![cnot(1, 0), cnot(2, 0), cnot(3, 0), cnot(4, 0), readout(0)])
    }

    /// Seam data qubit 0: three local CNOTs, then the target of a teleported
    /// CNOT controlled from the other module.
    pub fn seam_data() -> PauliCircuit {
        let mut elements = vec![cnot(1, 0), cnot(0, 2), cnot(3, 0)];
        let mut next = 5;
        teleported(&mut elements, &mut next, 4, 0);
        PauliCircuit::new(next, 0, elements)
    }

    /// Seam syndrome qubit 0: target of three local CNOTs and one teleported
    /// CNOT, then read out.
    pub fn seam_syndrome() -> PauliCircuit {
        let mut elements = vec![cnot(1, 0), cnot(2, 0), cnot(3, 0)];
        let mut next = 5;
        teleported(&mut elements, &mut next, 4, 0);
        elements.push(readout(0));
        PauliCircuit::new(next, 0, elements)
    }

    /// Every two-qubit gate is teleported: data qubit 0 is the target of two
    /// and the control of two teleported CNOTs.
    pub fn small_modules_data() -> PauliCircuit {
        let mut elements = Vec::new();
        let mut next = 5;
        teleported(&mut elements, &mut next, 1, 0);
        teleported(&mut elements, &mut next, 0, 2);
        teleported(&mut elements, &mut next, 3, 0);
        teleported(&mut elements, &mut next, 0, 4);
        PauliCircuit::new(next, 0, elements)
    }

    /// Syndrome qubit 0 is the target of four teleported CNOTs, then read out.
    pub fn small_modules_syndrome() -> PauliCircuit {
        let mut elements = Vec::new();
        let mut next = 5;
        for data in 1..=4 {
            teleported(&mut elements, &mut next, data, 0);
        }
        elements.push(readout(0));
        PauliCircuit::new(next, 0, elements)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Ratio<i64> {
        Ratio::new(n, d)
    }

    #[test]
    fn bell_errors_split_between_control_and_target() {
        use BellQubit::*;
        for on in [First, Second] {
            assert_eq!(teleported_gate_propagation(Pauli::I, on), (Pauli::I, Pauli::I));
            assert_eq!(teleported_gate_propagation(Pauli::X, on), (Pauli::I, Pauli::X));
            assert_eq!(teleported_gate_propagation(Pauli::Z, on), (Pauli::Z, Pauli::I));
            assert_eq!(teleported_gate_propagation(Pauli::Y, on), (Pauli::Z, Pauli::X));
        }
    }

    #[test]
    fn bell_marginal_is_eight_fifteenths() {
        assert_eq!(bell_pair_x_marginal(), r(8, 15));
    }

    #[test]
    fn ideal_cnot_has_no_coefficients() {
        let circuit = PauliCircuit::new(
            2,
            1,
            vec![Element::Cnot {
                control: 0,
                target: 1,
                noisy: false,
            }],
        );
        assert_eq!(derive_flip_rates(&circuit).unwrap(), LinearForm::zero());
    }

    #[test]
    fn single_noisy_cnot_marginals() {
        for tracked in 0..2 {
            let circuit = PauliCircuit::new(
                2,
                tracked,
                vec![Element::Cnot {
                    control: 0,
                    target: 1,
                    noisy: true,
                }],
            );
            let m = derive_marginals(&circuit).unwrap();
            assert_eq!(m.bit_flip, LinearForm::new(r(0, 1), r(8, 15), r(0, 1)));
            assert_eq!(m.phase_flip, LinearForm::new(r(0, 1), r(8, 15), r(0, 1)));
        }
    }

    #[test]
    fn bulk_syndrome_counting() {
        let q = derive_flip_rates(&circuits::bulk_syndrome()).unwrap();
        assert_eq!(q, LinearForm::new(r(0, 1), r(32, 15), r(1, 1)));
    }

    #[test]
    fn seam_syndrome_counting() {
        let q = derive_flip_rates(&circuits::seam_syndrome()).unwrap();
        assert_eq!(q, LinearForm::new(r(8, 15), r(40, 15), r(2, 1)));
    }

    #[test]
    fn teleported_cnot_marginals_on_each_side() {
        // Control in one module, target in the other, nothing else.
        let elements = vec![
            Element::BellPair { a: 2, b: 3 },
            Element::TeleportedCnot {
                control: 0,
                target: 1,
                a: 2,
                b: 3,
            },
        ];
        let on_target = derive_marginals(&PauliCircuit::new(4, 1, elements.clone())).unwrap();
        assert_eq!(on_target.bit_flip, LinearForm::new(r(8, 15), r(16, 15), r(1, 1)));
        assert_eq!(on_target.phase_flip, LinearForm::new(r(0, 1), r(8, 15), r(0, 1)));
        let on_control = derive_marginals(&PauliCircuit::new(4, 0, elements)).unwrap();
        assert_eq!(on_control.bit_flip, LinearForm::new(r(0, 1), r(8, 15), r(0, 1)));
        assert_eq!(on_control.phase_flip, LinearForm::new(r(8, 15), r(16, 15), r(1, 1)));
    }

    #[test]
    fn rejects_non_clifford_and_bad_wiring() {
        let t = PauliCircuit::new(1, 0, vec![Element::T { qubit: 0 }]);
        assert!(matches!(derive_flip_rates(&t), Err(CircuitError::NonClifford { .. })));
        let out = PauliCircuit::new(
            2,
            0,
            vec![Element::Cnot {
                control: 0,
                target: 5,
                noisy: true,
            }],
        );
        assert!(matches!(derive_flip_rates(&out), Err(CircuitError::QubitOutOfRange { .. })));
        let same = PauliCircuit::new(
            2,
            0,
            vec![Element::Cnot {
                control: 1,
                target: 1,
                noisy: true,
            }],
        );
        assert!(matches!(derive_flip_rates(&same), Err(CircuitError::RepeatedQubit { .. })));
        let missing = PauliCircuit::new(
            4,
            0,
            vec![Element::TeleportedCnot {
                control: 0,
                target: 1,
                a: 2,
                b: 3,
            }],
        );
        assert!(matches!(derive_flip_rates(&missing), Err(CircuitError::MissingBellPair { .. })));
        assert!(matches!(
            derive_flip_rates(&PauliCircuit::new(1, 3, vec![])),
            Err(CircuitError::TrackedOutOfRange(3))
        ));
    }

    #[test]
    fn clifford_single_qubit_gates_conjugate() {
        let circuit = PauliCircuit::new(
            2,
            0,
            vec![
                Element::Cnot {
                    control: 1,
                    target: 0,
                    noisy: true,
                },
                Element::Hadamard { qubit: 0 },
                Element::Phase { qubit: 0 },
            ],
        );
        let m = derive_marginals(&circuit).unwrap();
        // After H the old Z component becomes X; S then adds Z wherever X is,
        // so the final Z is present for X or Z (not Y) on the tracked qubit.
        assert_eq!(m.bit_flip, LinearForm::new(r(0, 1), r(8, 15), r(0, 1)));
        assert_eq!(m.phase_flip.cx, r(8, 15));
    }

    #[test]
    fn circuits_round_trip_through_json() {
        let circuit = circuits::seam_syndrome();
        let text = serde_json::to_string(&circuit).unwrap();
        let back: PauliCircuit = serde_json::from_str(&text).unwrap();
        assert_eq!(back, circuit);
    }
}
