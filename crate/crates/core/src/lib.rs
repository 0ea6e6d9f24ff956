//! Density-matrix simulator for a single spin-1 ("qutrit") nucleus oriented
//! in a liquid-crystal matrix.
//!
//! The first-order quadrupolar coupling lifts the degeneracy of the two
//! single-quantum transitions, so the three Zeeman levels |0⟩, |1⟩, |2⟩ form
//! an addressable three-level system. This crate models, in the rotating
//! frame:
//!
//! - the spin-1 operator algebra and quadrupolar Hamiltonian ([`spin`]),
//! - transition-selective and hard RF pulses, ideal or shaped, plus the
//!   gradient crusher ([`pulse`]),
//! - the named pseudopure-state preparations and the six basis-permutation
//!   unitaries with their pulse decompositions ([`sequences`]),
//! - small-tip-angle doublet readout and spectrum synthesis ([`readout`]),
//! - a line-oriented pulse-program language with parser, printer, compiler
//!   and executor ([`lang`]).
//!
//! Only the traceless deviation part of the density matrix is represented;
//! the identity part neither evolves nor contributes signal.
//!
//! # Example
//!
//! Run the cyclic permutation U5 from thermal equilibrium and read the
//! doublet:
//!
//! ```
//! use qutrit_core::{
//!     program_for_operation, run_program, DeviationState, ExecOptions, OpName, SpinSystem,
//! };
//!
//! let sys = SpinSystem::default(); // 240 Hz doublet
//! let program = program_for_operation(OpName::U5, true);
//! let outcome = run_program(
//!     &program,
//!     &sys,
//!     &ExecOptions::default(),
//!     &DeviationState::equilibrium(),
//! )
//! .unwrap();
//! let r = outcome.readout.unwrap();
//! assert!((r.i12 - 1.0).abs() < 1e-12 && (r.i01 + 2.0).abs() < 1e-12);
//! ```

pub mod error;
pub mod lang;
pub mod linalg;
pub mod pulse;
pub mod readout;
pub mod sequences;
pub mod spin;

pub use error::SimError;
pub use lang::{
    compile, execute, parse, parse_named, run_program, CompiledProgram, CompiledStep, Diagnostic,
    ExecOptions, Instruction, PulseProgram, RunOutcome, Span, Spanned,
};
pub use linalg::{Mat3, C64};
pub use pulse::{
    compile_pulse, crusher, free_evolution, hard_pulse, ideal_selective, shaped_selective, Angle,
    Mode, Propagator, PulseKind, PulseShape, PulseSpec,
};
pub use readout::{
    detect, linear_intensities, synth_spectrum, DetectMode, DoubletReadout, SpectrumTrace,
};
pub use sequences::{
    alternative_u4_sequences, operation_sequence, permutation_of, pps_sequence,
    program_for_equilibrium, program_for_operation, program_for_pps, verification_targets,
    NamedOperation, OpName, Permutation, PpsLabel, PpsTarget, Target, TargetId,
};
pub use spin::{DeviationState, SpinOperators, SpinSystem};
