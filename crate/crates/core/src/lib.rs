//! Numerical toolkit for spin-cat qubits encoded in a spin-F atomic ground
//! state: angular-momentum algebra, lightshift engineering, Lindblad
//! dynamics, analytic gate conditions and detuning scans, spherical-tensor
//! rank analysis, randomized benchmarking, optical pumping, and error
//! budgets.

pub mod atom;
pub mod benchmark;
pub mod budget;
pub mod constants_file;
pub mod dynamics;
pub mod fitting;
pub mod gatedesign;
pub mod halfint;
pub mod linalg;
pub mod pulse;
pub mod pumping;
pub mod rng;
pub mod tensorrank;
pub mod wigner;

pub use halfint::{half, HalfInt};
