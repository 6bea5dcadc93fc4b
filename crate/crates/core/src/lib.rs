//! Numerical toolkit for quantum supermaps: linear, completely positive transformations
//! that take quantum operations to quantum operations.
//!
//! Operations are stored as Choi operators on `H_out ⊗ H_in`; supermaps act on those
//! Choi operators in Kraus form. The [`realization`] module factors every deterministic
//! supermap into a pair of isometries with ancillas, and probabilistic supermaps into the
//! same circuit followed by a projective measurement of one ancilla.

pub mod applications;
pub mod error;
pub mod linalg;
pub mod operation;
pub mod realization;
pub mod supermap;
pub mod tester;
pub mod tol;

pub use applications::{ProgrammableDevice, TomographySetup};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, TensorShape};
pub use num_complex::Complex64;
pub use operation::{KrausSet, QuantumOperation};
pub use realization::CircuitRealization;
pub use supermap::{EffectMap, Supermap, SupermapDims};
pub use tester::{OutcomeDistribution, Tester};
