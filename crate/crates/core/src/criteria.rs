//! Separability criteria and their verdict records.
//!
//! The generalized reduction criterion maps `rho` to
//! `rho~ = ab I - a I_m (x) rho_B - b rho_A (x) I_n + rho` and compares
//! `||T_Y(rho~)||_1` against `h_a * h_b`. Every separable state satisfies the
//! inequality for all 16 sets `Y`; a violation certifies entanglement.
//!
//! PPT, reduction and realignment checks are provided as separate oracles.
//! The first two work with eigenvalues, so they do not share a code path
//! with the trace-norm criterion.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Result;
use crate::gptops::{gpt_transform, partial_transpose, realign, GptFlag, GptOpSet};
use crate::matlin::{hermitian_eigenvalues, kron, trace_norm, CMatrix, DensityState, Subsystem};

/// Threshold on violation (norm-type) or eigenvalue sign (eigenvalue-type).
pub const TOL_VERDICT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionParams {
    pub a: Complex64,
    pub b: Complex64,
}

impl ReductionParams {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        Self { a, b }
    }

    pub fn real(a: f64, b: f64) -> Self {
        Self::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    pub h_a: f64,
    pub h_b: f64,
}

impl BoundPair {
    pub fn product(&self) -> f64 {
        self.h_a * self.h_b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionKind {
    GeneralizedReduction,
    Ppt,
    Reduction,
    Realignment,
}

impl CriterionKind {
    pub fn name(self) -> &'static str {
        match self {
            CriterionKind::GeneralizedReduction => "grc",
            CriterionKind::Ppt => "ppt",
            CriterionKind::Reduction => "reduction",
            CriterionKind::Realignment => "realignment",
        }
    }

    /// Norm-type criteria flag `statistic > bound`; eigenvalue-type ones flag
    /// a negative statistic.
    pub fn is_norm_type(self) -> bool {
        matches!(self, CriterionKind::GeneralizedReduction | CriterionKind::Realignment)
    }
}

/// Result of one criterion evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub criterion: CriterionKind,
    pub params: Option<ReductionParams>,
    #[serde(with = "yset_serde")]
    pub yset: Option<GptOpSet>,
    /// Trace norm (norm-type) or smallest eigenvalue (eigenvalue-type).
    pub statistic: f64,
    pub bound: f64,
    /// `max(statistic - bound, 0)` for norm-type criteria, `max(-statistic, 0)`
    /// for eigenvalue-type ones.
    pub violation: f64,
    pub entangled: bool,
}

impl CriterionVerdict {
    fn norm_type(
        criterion: CriterionKind,
        params: ReductionParams,
        yset: GptOpSet,
        statistic: f64,
        bound: f64,
    ) -> Self {
        let violation = (statistic - bound).max(0.0);
        Self {
            criterion,
            params: Some(params),
            yset: Some(yset),
            statistic,
            bound,
            violation,
            entangled: violation > TOL_VERDICT,
        }
    }

    fn eigen_type(criterion: CriterionKind, yset: Option<GptOpSet>, min_eig: f64) -> Self {
        Self {
            criterion,
            params: None,
            yset,
            statistic: min_eig,
            bound: 0.0,
            violation: (-min_eig).max(0.0),
            entangled: min_eig < -TOL_VERDICT,
        }
    }

    /// Re-derives the `entangled` flag with a different threshold.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.entangled = if self.criterion.is_norm_type() {
            self.violation > tol
        } else {
            self.statistic < -tol
        };
        self
    }
}

mod yset_serde {
    use super::*;

    pub fn serialize<S: Serializer>(y: &Option<GptOpSet>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match y {
            Some(y) => s.serialize_some(&y.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<GptOpSet>, D::Error> {
        let code: Option<String> = Option::deserialize(d)?;
        code.map(|c| c.parse().map_err(serde::de::Error::custom)).transpose()
    }
}

/// `rho~ = ab I_mn - a I_m (x) rho_B - b rho_A (x) I_n + rho`.
pub fn generalized_reduction_map(rho: &DensityState, p: ReductionParams) -> CMatrix {
    let dims = rho.dims();
    let (m, n) = (dims.m(), dims.n());
    let mut out = rho.matrix().clone();
    if p.a != Complex64::new(0.0, 0.0) {
        let term = kron(&CMatrix::identity(m), &rho.reduced_b()).scale(p.a);
        out = &out - &term;
    }
    if p.b != Complex64::new(0.0, 0.0) {
        let term = kron(&rho.reduced_a(), &CMatrix::identity(n)).scale(p.b);
        out = &out - &term;
    }
    let ab = p.a * p.b;
    if ab != Complex64::new(0.0, 0.0) {
        for k in 0..m * n {
            out[(k, k)] += ab;
        }
    }
    out
}

/// `|x - 1| + (dim - 1)|x|` when both or neither flag is present,
/// `(|x - 1|^2 + (dim - 1)|x|^2)^(1/2)` when exactly one is.
pub fn h_factor(x: Complex64, dim: usize, row_in: bool, col_in: bool) -> f64 {
    let shifted = (x - 1.0).norm();
    let rest = (dim - 1) as f64;
    if row_in == col_in {
        shifted + rest * x.norm()
    } else {
        (shifted * shifted + rest * x.norm_sqr()).sqrt()
    }
}

pub fn bound_pair(p: ReductionParams, m: usize, n: usize, y: GptOpSet) -> BoundPair {
    BoundPair {
        h_a: h_factor(p.a, m, y.contains(GptFlag::RowA), y.contains(GptFlag::ColA)),
        h_b: h_factor(p.b, n, y.contains(GptFlag::RowB), y.contains(GptFlag::ColB)),
    }
}

/// Generalized reduction criterion for one `(a, b, Y)`.
pub fn evaluate(rho: &DensityState, p: ReductionParams, y: GptOpSet) -> Result<CriterionVerdict> {
    let dims = rho.dims();
    let tilde = generalized_reduction_map(rho, p);
    let statistic = trace_norm(&gpt_transform(&tilde, dims, y)?);
    let bound = bound_pair(p, dims.m(), dims.n(), y).product();
    Ok(CriterionVerdict::norm_type(
        CriterionKind::GeneralizedReduction,
        p,
        y,
        statistic,
        bound,
    ))
}

/// [`evaluate`] for all 16 sets in canonical order.
pub fn evaluate_all_y(rho: &DensityState, p: ReductionParams) -> Result<Vec<CriterionVerdict>> {
    let dims = rho.dims();
    let tilde = generalized_reduction_map(rho, p);
    GptOpSet::all()
        .map(|y| {
            let statistic = trace_norm(&gpt_transform(&tilde, dims, y)?);
            let bound = bound_pair(p, dims.m(), dims.n(), y).product();
            Ok(CriterionVerdict::norm_type(
                CriterionKind::GeneralizedReduction,
                p,
                y,
                statistic,
                bound,
            ))
        })
        .collect()
}

pub fn any_entangled(verdicts: &[CriterionVerdict]) -> bool {
    verdicts.iter().any(|v| v.entangled)
}

/// Smallest eigenvalue of the partial transpose on `which`.
pub fn ppt_min_eigenvalue(rho: &DensityState, which: Subsystem) -> Result<f64> {
    let pt = partial_transpose(rho.matrix(), rho.dims(), which)?;
    Ok(hermitian_eigenvalues(&pt)?[0])
}

/// PPT test on subsystem A.
pub fn ppt_check(rho: &DensityState) -> Result<CriterionVerdict> {
    let min_eig = ppt_min_eigenvalue(rho, Subsystem::A)?;
    Ok(CriterionVerdict::eigen_type(
        CriterionKind::Ppt,
        Some(GptOpSet::PT_A),
        min_eig,
    ))
}

/// Smallest eigenvalues of the two reduction operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionSpectra {
    /// `min eig(rho_A (x) I_n - rho)`.
    pub a_side: f64,
    /// `min eig(I_m (x) rho_B - rho)`.
    pub b_side: f64,
}

pub fn reduction_min_eigenvalues(rho: &DensityState) -> Result<ReductionSpectra> {
    let dims = rho.dims();
    let a_op = &kron(&rho.reduced_a(), &CMatrix::identity(dims.n())) - rho.matrix();
    let b_op = &kron(&CMatrix::identity(dims.m()), &rho.reduced_b()) - rho.matrix();
    Ok(ReductionSpectra {
        a_side: hermitian_eigenvalues(&a_op)?[0],
        b_side: hermitian_eigenvalues(&b_op)?[0],
    })
}

pub fn reduction_check(rho: &DensityState) -> Result<CriterionVerdict> {
    let s = reduction_min_eigenvalues(rho)?;
    Ok(CriterionVerdict::eigen_type(
        CriterionKind::Reduction,
        None,
        s.a_side.min(s.b_side),
    ))
}

/// Realignment (computable cross norm) test: `||R(rho)||_1 <= 1`.
pub fn realignment_check(rho: &DensityState) -> Result<CriterionVerdict> {
    let statistic = trace_norm(&realign(rho.matrix(), rho.dims())?);
    Ok(CriterionVerdict::norm_type(
        CriterionKind::Realignment,
        ReductionParams::real(0.0, 0.0),
        GptOpSet::REALIGN,
        statistic,
        1.0,
    ))
}
