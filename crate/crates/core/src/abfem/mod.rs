//! Finite element discretisation of the Laplacian and of the Aharonov-Bohm operator with
//! half-integer circulation, in the real sign-flip representation.
//!
//! Across the cut the two copies of each node are identified with a factor `-1`, so the
//! discrete quadratic form is `∫ |∇f|²` for the real double-covering representative `f`
//! and the pencil stays real and symmetric.

mod assembly;
mod eigen;
mod local;
mod manufactured;
mod space;
pub mod sparse;
mod weight;

pub use assembly::{element_matrices, Pencil};
pub use eigen::{assemble, solve_eigs, solve_eigs_with, EigenOptions, EigenProblem, EigenResult};
pub use local::{form_value, solve_local_dirichlet, LocalForm, LocalSolution};
pub use manufactured::{manufactured_ab_solution, ManufacturedAb};
pub use space::{bary_gradients, basis, FeSpace, FemFunction, Order, Slot};
pub use weight::{Weight, WeightFn};
