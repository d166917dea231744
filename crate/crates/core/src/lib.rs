//! Projective norms `||f||_{p_1,...,p_m}` of nonnegative tensors and their
//! maximal singular vectors.
//!
//! The main entry point is [`solve_hgpm`], a power iteration on one reduced
//! mode that returns certified lower and upper bounds at every step.
//! [`solve_pm`] is the plain power method for equal exponents, [`oracle`]
//! holds brute-force reference solvers for small problems, and [`symmetry`]
//! maps eigenproblems of partially symmetric tensors onto singular problems.
//!
//! ```
//! use tensornorm::{solve_hgpm, PVector, SolverConfig, SparseTensor};
//!
//! let f = SparseTensor::filled(vec![2, 2, 2], 1.0).unwrap();
//! let p = PVector::uniform(3, 3.0).unwrap();
//! let r = solve_hgpm(&f, &p, &SolverConfig::default()).unwrap();
//! assert!((r.lambda - 4.0).abs() < 1e-10);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod hgpm;
pub mod io;
pub mod oracle;
pub mod par;
pub mod pm;
pub mod spectral;
pub mod structure;
pub mod symmetry;
pub mod tensor;

pub use error::{Error, Result};
pub use hgpm::{
    cw_bounds, cw_bounds_batch, estimate_rate, g_step, hilbert_metric, solve_hgpm, uniform_start,
    Bracket, IterationRecord, Method, SolveResult, SolveStatus, SolverConfig, Start,
};
pub use oracle::{oracle_matrix_2norm, oracle_norm};
pub use par::Execution;
pub use pm::{solve_pm, PmConfig};
pub use spectral::{
    dual_residual, lift_phi, p_norm, psi, quotient_q, quotient_qi, residual_check, s_map, s_maps,
    sigma, spectrum_upper_bound, PVector, ReducedSingularPair, SingularPair,
};
pub use structure::{
    admissible_indices, choose_index, is_irreducible, is_weakly_irreducible, StructureReport,
};
pub use symmetry::{
    check_partial_symmetry, lift_xi, project_zeta, solve_eigenproblem, SymmetryStructure,
};
pub use tensor::{ReducedTupleVector, SparseTensor, TupleVector};
