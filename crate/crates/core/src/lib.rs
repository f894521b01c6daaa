//! Randomized Hamiltonian simulation with fluctuation-guided term sampling.
//!
//! Terms are drawn with probability proportional to their standard deviation
//! in the current state and evolved for `τ_j = t / (N p_j)`. The fixed
//! qDRIFT and equal-weight samplers are provided for comparison, along with
//! a classical-shadow estimator for the term moments and a harness for
//! Monte-Carlo fidelity studies.

pub mod compiler;
pub mod error;
pub mod harness;
pub mod hilbert;
pub mod models;
pub mod pauli;
pub mod shadows;

pub use compiler::{ProbabilityVector, SamplingStrategy, TrajectoryResult, TrajectoryRunner};
pub use error::{Error, Result};
pub use hilbert::{HermitianOperator, HilbertSpace, StateVector};
pub use models::{HamiltonianTermSet, Model, ModelSpec};
pub use pauli::{Pauli, PauliString};
pub use shadows::{EstimatorConfig, ShadowSet};
