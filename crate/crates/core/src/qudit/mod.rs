//! Dense pure-state simulation of registers whose subsystems may all have
//! different dimensions.
//!
//! Composite indices put subsystem 0 in the least significant position:
//! `I = Σ_s i_s · Π_{t<s} dims[t]`. The same convention is used inside a
//! single qudit when it is viewed as a virtual pair, `j = j1 + j2·d1`.

mod index;
mod measure;
mod ops;
mod register;
mod schmidt;

pub use index::{merge_index, split_index, Dims};
pub use measure::{
    branches, measure, measure_forced, outcome_probability, FamilyDefects, MeasurementOutcome, ProjectorFamily,
};
pub use ops::{
    apply_local, factored_unitary, fourier_matrix, identity, max_abs_diff, pad_identity, pauli_x, pauli_z,
    permutation_unitary, unitarity_defect, LocalUnitary,
};
pub use register::{fidelity, random_state, tensor, QuditRegister};
pub use schmidt::{bipartite_matrix, factor_out, is_product, ProductCheck};

pub use num_complex::Complex64 as C64;

/// Dense complex matrix used for every local operator.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Norm and probability bookkeeping tolerance.
pub const NORM_TOL: f64 = 1e-10;
/// Operator algebra tolerance; multiplied by the matrix dimension.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// A bipartite state is a product iff exactly one Schmidt value exceeds this.
pub const PRODUCT_TOL: f64 = 1e-8;
/// Branches below this probability are never sampled.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
