//! Computation engine for layered coding schemes on acyclic discrete
//! memoryless networks: validate coding parameter sets, generate the induced
//! packing/covering inequality systems, evaluate the required entropies and
//! conditional mutual informations, and project onto external rates by exact
//! Fourier-Motzkin elimination. Companion modules cover compress-and-forward
//! rates on relay networks, vector-Gaussian instantiations with log-det
//! bounds, and packing/covering duality.

pub mod catalog;
pub mod coding;
pub mod dist;
pub mod duality;
pub mod error;
pub mod expr;
pub mod gaussian;
pub mod gdcaf;
pub mod network;
pub mod region;

pub use coding::{Codebook, CodingParams, MapTable, NodeCoding};
pub use dist::{Alphabet, CondTable, EntropyEvaluator, Factor, FactorKind, FactoredJoint};
pub use error::{Error, Result};
pub use expr::{AffineRateExpr, Rational};
pub use network::{Admn, AdmnNode, Dmn, DmnNode, Role};
pub use region::{
    fourier_motzkin, generate_system, prune_numeric, BoundKind, InequalitySystem, LinearInequality,
    Mode, RateRegion, Sense,
};
