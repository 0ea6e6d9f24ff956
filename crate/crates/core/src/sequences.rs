//! The named procedures: pseudopure-state preparations and the six
//! one-to-one reversible single-qutrit operations with their pulse schemes.
//!
//! The six operations exhaust S₃ as permutations of the basis states. U2 and
//! U3 take one selective π pulse, U5 and U6 a series of two, and U4 — the
//! |0⟩↔|2⟩ swap, not directly drivable — is run as a non-selective π (two
//! equivalent three-pulse selective decompositions are provided for
//! comparison).

use crate::lang::{Instruction, PulseProgram};
use crate::pulse::{Angle, PulseSpec};
use crate::readout::DetectMode;

/// Length of every transition-selective pulse, in ms, when run shaped.
pub const SELECTIVE_PULSE_MS: f64 = 6.0;

/// A permutation of the three levels; `map[j]` is where level `j` goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: [usize; 3],
}

impl Permutation {
    pub fn identity() -> Self {
        Self { map: [0, 1, 2] }
    }

    pub fn transposition(a: usize, b: usize) -> Self {
        let mut map = [0, 1, 2];
        map.swap(a, b);
        Self { map }
    }

    pub fn from_map(map: [usize; 3]) -> Self {
        debug_assert!({
            let mut seen = [false; 3];
            map.iter().for_each(|&v| seen[v] = true);
            seen == [true; 3]
        });
        Self { map }
    }

    /// Where level `j` is sent.
    pub fn image_of(&self, j: usize) -> usize {
        self.map[j]
    }

    /// Population transport: the population of level j lands on level
    /// `image_of(j)`.
    pub fn permute_populations(&self, p: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for j in 0..3 {
            out[self.map[j]] = p[j];
        }
        out
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose_after(&self, first: &Permutation) -> Permutation {
        let mut map = [0; 3];
        for (j, slot) in map.iter_mut().enumerate() {
            *slot = self.map[first.map[j]];
        }
        Permutation { map }
    }

    /// The 0/1 permutation matrix with entry (image_of(j), j) set.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for j in 0..3 {
            m[self.map[j]][j] = 1.0;
        }
        m
    }
}

/// The six single-qutrit operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpName {
    U1,
    U2,
    U3,
    U4,
    U5,
    U6,
}

impl OpName {
    pub const ALL: [OpName; 6] = [
        OpName::U1,
        OpName::U2,
        OpName::U3,
        OpName::U4,
        OpName::U5,
        OpName::U6,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            OpName::U1 => "U1",
            OpName::U2 => "U2",
            OpName::U3 => "U3",
            OpName::U4 => "U4",
            OpName::U5 => "U5",
            OpName::U6 => "U6",
        }
    }
}

impl std::fmt::Display for OpName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OpName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "U1" => Ok(OpName::U1),
            "U2" => Ok(OpName::U2),
            "U3" => Ok(OpName::U3),
            "U4" => Ok(OpName::U4),
            "U5" => Ok(OpName::U5),
            "U6" => Ok(OpName::U6),
            other => Err(format!("unknown operation `{other}` (expected U1..U6)")),
        }
    }
}

/// The permutation each operation induces on the basis states.
pub fn permutation_of(name: OpName) -> Permutation {
    match name {
        OpName::U1 => Permutation::identity(),
        OpName::U2 => Permutation::transposition(1, 2),
        OpName::U3 => Permutation::transposition(0, 1),
        OpName::U4 => Permutation::transposition(0, 2),
        // |0⟩→|1⟩→|2⟩→|0⟩
        OpName::U5 => Permutation::from_map([1, 2, 0]),
        // |0⟩→|2⟩→|1⟩→|0⟩
        OpName::U6 => Permutation::from_map([2, 0, 1]),
    }
}

fn sel_pi(lo: usize) -> PulseSpec {
    PulseSpec::selective(lo, lo + 1, Angle::Pi).with_duration_ms(SELECTIVE_PULSE_MS)
}

fn sel_half_pi(lo: usize) -> PulseSpec {
    PulseSpec::selective(lo, lo + 1, Angle::HalfPi).with_duration_ms(SELECTIVE_PULSE_MS)
}

/// The pulse scheme for one operation, applied left to right.
pub fn operation_sequence(name: OpName) -> Vec<PulseSpec> {
    match name {
        OpName::U1 => vec![],
        OpName::U2 => vec![sel_pi(1)],
        OpName::U3 => vec![sel_pi(0)],
        OpName::U4 => vec![PulseSpec::hard(Angle::Pi)],
        OpName::U5 => vec![sel_pi(1), sel_pi(0)],
        OpName::U6 => vec![sel_pi(0), sel_pi(1)],
    }
}

/// The two three-pulse selective decompositions of the |0⟩↔|2⟩ swap.
pub fn alternative_u4_sequences() -> [Vec<PulseSpec>; 2] {
    [
        vec![sel_pi(1), sel_pi(0), sel_pi(1)],
        vec![sel_pi(0), sel_pi(1), sel_pi(0)],
    ]
}

/// An operation together with its pulses, permutation and operator matrix.
#[derive(Debug, Clone)]
pub struct NamedOperation {
    pub name: OpName,
    pub pulses: Vec<PulseSpec>,
    pub permutation: Permutation,
}

impl NamedOperation {
    pub fn get(name: OpName) -> Self {
        Self {
            name,
            pulses: operation_sequence(name),
            permutation: permutation_of(name),
        }
    }

    /// 0/1 permutation matrix of the operation.
    pub fn operator(&self) -> [[f64; 3]; 3] {
        self.permutation.matrix()
    }

    /// Expected readout (i12, i01) from equilibrium in ideal mode.
    pub fn expected_readout(&self) -> (f64, f64) {
        let p = self.permutation.permute_populations([1.0, 0.0, -1.0]);
        (p[1] - p[2], p[0] - p[1])
    }
}

/// The three pseudopure preparations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PpsLabel {
    /// |0⟩ pseudopure.
    Pps0,
    /// |1⟩ pseudopure.
    Pps1,
    /// −|2⟩ pseudopure: the distinguished population is negative.
    Pps2m,
}

impl PpsLabel {
    pub const ALL: [PpsLabel; 3] = [PpsLabel::Pps0, PpsLabel::Pps1, PpsLabel::Pps2m];

    pub fn as_str(&self) -> &'static str {
        match self {
            PpsLabel::Pps0 => "pps0",
            PpsLabel::Pps1 => "pps1",
            PpsLabel::Pps2m => "pps2m",
        }
    }
}

impl std::fmt::Display for PpsLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PpsLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pps0" => Ok(PpsLabel::Pps0),
            "pps1" => Ok(PpsLabel::Pps1),
            "pps2m" => Ok(PpsLabel::Pps2m),
            other => Err(format!(
                "unknown preparation `{other}` (expected pps0|pps1|pps2m)"
            )),
        }
    }
}

/// A pseudopure target: its label and the deviation populations it leaves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpsTarget {
    pub label: PpsLabel,
    pub expected_populations: [f64; 3],
}

impl PpsTarget {
    pub fn get(label: PpsLabel) -> Self {
        let expected_populations = match label {
            PpsLabel::Pps0 => [1.0, -0.5, -0.5],
            PpsLabel::Pps1 => [-0.5, 1.0, -0.5],
            PpsLabel::Pps2m => [0.5, 0.5, -1.0],
        };
        Self {
            label,
            expected_populations,
        }
    }

    /// Expected readout (i12, i01) of the prepared state.
    pub fn expected_readout(&self) -> (f64, f64) {
        let p = self.expected_populations;
        (p[1] - p[2], p[0] - p[1])
    }
}

/// Instruction list preparing the target from equilibrium: selective pulses
/// with a crusher after each, the last crusher also cleaning up pulse
/// imperfections.
pub fn pps_sequence(target: &PpsTarget) -> Vec<Instruction> {
    match target.label {
        PpsLabel::Pps0 => vec![Instruction::Pulse(sel_half_pi(1)), Instruction::Crusher],
        PpsLabel::Pps1 => vec![
            Instruction::Pulse(sel_half_pi(1)),
            Instruction::Crusher,
            Instruction::Pulse(sel_pi(0)),
            Instruction::Crusher,
        ],
        PpsLabel::Pps2m => vec![Instruction::Pulse(sel_half_pi(0)), Instruction::Crusher],
    }
}

fn acquire_default() -> Instruction {
    Instruction::Acquire {
        tip_deg: 5.0,
        mode: DetectMode::Linear,
    }
}

/// Pulse program preparing a pseudopure state and acquiring.
pub fn program_for_pps(label: PpsLabel) -> PulseProgram {
    let target = PpsTarget::get(label);
    let mut instructions = pps_sequence(&target);
    instructions.push(acquire_default());
    PulseProgram::from_instructions(label.as_str(), instructions)
}

/// Pulse program running one operation from equilibrium and acquiring.
///
/// `with_crushers` inserts a crusher after every pulse (the population-level
/// experiment); disabling them leaves coherences from pulse imperfections in
/// place for study.
pub fn program_for_operation(name: OpName, with_crushers: bool) -> PulseProgram {
    let mut instructions = Vec::new();
    for pulse in operation_sequence(name) {
        instructions.push(Instruction::Pulse(pulse));
        if with_crushers {
            instructions.push(Instruction::Crusher);
        }
    }
    instructions.push(acquire_default());
    PulseProgram::from_instructions(name.as_str(), instructions)
}

/// The bare equilibrium readout program.
pub fn program_for_equilibrium() -> PulseProgram {
    PulseProgram::from_instructions("equilibrium", vec![acquire_default()])
}

/// Identity of one verification target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetId {
    Equilibrium,
    Pps(PpsLabel),
    Op(OpName),
}

/// One row of the verification table: a named experiment and the doublet
/// intensities it must produce from equilibrium.
#[derive(Debug, Clone)]
pub struct Target {
    pub id: TargetId,
    pub expected: (f64, f64),
}

impl Target {
    pub fn name(&self) -> String {
        match self.id {
            TargetId::Equilibrium => "equilibrium".to_string(),
            TargetId::Pps(l) => l.to_string(),
            TargetId::Op(o) => o.to_string(),
        }
    }

    pub fn program(&self) -> PulseProgram {
        match self.id {
            TargetId::Equilibrium => program_for_equilibrium(),
            TargetId::Pps(l) => program_for_pps(l),
            TargetId::Op(o) => program_for_operation(o, true),
        }
    }
}

/// All ten verification targets: equilibrium, the three preparations, the
/// six operations.
pub fn verification_targets() -> Vec<Target> {
    let mut targets = vec![Target {
        id: TargetId::Equilibrium,
        expected: (1.0, 1.0),
    }];
    for label in PpsLabel::ALL {
        targets.push(Target {
            id: TargetId::Pps(label),
            expected: PpsTarget::get(label).expected_readout(),
        });
    }
    for name in OpName::ALL {
        targets.push(Target {
            id: TargetId::Op(name),
            expected: NamedOperation::get(name).expected_readout(),
        });
    }
    targets
}
