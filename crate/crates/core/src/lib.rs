//! Separability tests for bipartite density matrices.
//!
//! The central test is the generalized reduction criterion: for complex
//! parameters `(a, b)` and any set `Y` of row/column transpositions on the two
//! subsystems, a separable state satisfies
//! `||T_Y(ab I - a I (x) rho_B - b rho_A (x) I + rho)||_1 <= h_a h_b`.
//! Special cases recover the reduction criterion `(a, b) = (0, 1), (1, 0)`
//! and the generalized partial transposition criterion `(a, b) = (0, 0)`,
//! which in turn contains PPT (`Y = {rA, cA}`) and realignment
//! (`Y = {cA, rB}`).
//!
//! Modules:
//! - [`matlin`]: dense complex matrices, SVD, trace norm, partial trace
//! - [`gptops`]: index-regrouping transpositions, realignment, Kronecker decomposition
//! - [`criteria`]: the criteria and their verdict records
//! - [`states`]: Werner, Horodecki and random state generators, state files
//! - [`sweep`]: parameter grids, threshold search, CSV/JSON output

pub mod criteria;
pub mod error;
pub mod gptops;
pub mod matlin;
pub mod states;
pub mod sweep;

pub use criteria::{
    evaluate, evaluate_all_y, ppt_check, realignment_check, reduction_check, CriterionKind, CriterionVerdict,
    ReductionParams, TOL_VERDICT,
};
pub use error::{Error, Result};
pub use gptops::{gpt_transform, realign, GptFlag, GptOpSet};
pub use matlin::{CMatrix, DensityState, Subsystem, SubsystemDims};
pub use num_complex::Complex64;
