//! State generators and the JSON state-file format.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matlin::{kron, CMatrix, DensityState, SubsystemDims};

/// Deviation of `U^dagger U` from the identity accepted as unitary.
pub const TOL_UNITARY: f64 = 1e-8;

/// Seed for the deterministic generators. Each call builds its own
/// ChaCha8 stream from the seed, so equal seeds give identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// A density state with a family name and the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledState {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub state: DensityState,
}

impl LabeledState {
    pub fn new(name: impl Into<String>, params: &[(&str, f64)], state: DensityState) -> Self {
        Self {
            name: name.into(),
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            state,
        }
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Swap operator `V = sum_ij |ij><ji|` on `C^d (x) C^d`.
pub fn swap_operator(d: usize) -> CMatrix {
    assert!(d >= 1, "swap operator needs d >= 1");
    CMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, j) = (r / d, r % d);
        if c == j * d + i {
            real(1.0)
        } else {
            real(0.0)
        }
    })
}

/// Werner state `((d - f) I + (d f - 1) V) / (d^3 - d)`, entangled iff `f < 0`.
pub fn werner(d: usize, f: f64) -> Result<LabeledState> {
    if d < 2 {
        return Err(Error::ParamOutOfRange(format!(
            "werner dimension must be >= 2, got {d}"
        )));
    }
    if !(-1.0..=1.0).contains(&f) {
        return Err(Error::ParamOutOfRange(format!("werner f must lie in [-1, 1], got {f}")));
    }
    let df = d as f64;
    let norm = df * df * df - df;
    let id_coef = (df - f) / norm;
    let swap_coef = (df * f - 1.0) / norm;
    let v = swap_operator(d);
    let mat = CMatrix::from_fn(d * d, d * d, |r, c| {
        let id = if r == c { id_coef } else { 0.0 };
        real(id + swap_coef * v[(r, c)].re)
    });
    let dims = SubsystemDims::new(d, d)?;
    Ok(LabeledState::new(
        "werner",
        &[("d", df), ("f", f)],
        DensityState::new(dims, mat)?,
    ))
}

/// Horodecki's 3x3 bound entangled state, `0 < c < 1`.
pub fn horodecki_3x3(c: f64) -> Result<LabeledState> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::ParamOutOfRange(format!(
            "horodecki c must lie in (0, 1), got {c}"
        )));
    }
    let p = (1.0 + c) / 2.0;
    let q = (1.0 - c * c).sqrt() / 2.0;
    #[rustfmt::skip]
    let entries = [
        c,   0.0, 0.0, 0.0, c,   0.0, 0.0, 0.0, c,
        0.0, c,   0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, c,   0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, c,   0.0, 0.0, 0.0, 0.0, 0.0,
        c,   0.0, 0.0, 0.0, c,   0.0, 0.0, 0.0, c,
        0.0, 0.0, 0.0, 0.0, 0.0, c,   0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, p,   0.0, q,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, c,   0.0,
        c,   0.0, 0.0, 0.0, c,   0.0, q,   0.0, p,
    ];
    let scale = 1.0 / (8.0 * c + 1.0);
    let scaled: Vec<f64> = entries.iter().map(|x| x * scale).collect();
    let mat = CMatrix::from_real(9, 9, &scaled)?;
    Ok(LabeledState::new(
        "horodecki",
        &[("c", c)],
        DensityState::new(SubsystemDims::new(3, 3)?, mat)?,
    ))
}

fn gaussian_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-uniform unit vector.
fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 1e-300 {
            return v.into_iter().map(|z| z / nrm).collect();
        }
    }
}

fn projector(v: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
}

/// `sum_i p_i |psi_i><psi_i| (x) |phi_i><phi_i|` with Haar local vectors and
/// flat-simplex weights.
pub fn random_separable(dims: SubsystemDims, k: usize, seed: RngSeed) -> Result<LabeledState> {
    if k == 0 {
        return Err(Error::ParamOutOfRange("separable ensemble needs k >= 1".into()));
    }
    let mut rng = seed.rng();
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1) + f64::MIN_POSITIVE).collect();
    let total: f64 = raw.iter().sum();
    let size = dims.total();
    let mut mat = CMatrix::zeros(size, size);
    for w in raw {
        let psi = random_unit_vector(&mut rng, dims.m());
        let phi = random_unit_vector(&mut rng, dims.n());
        let term = kron(&projector(&psi), &projector(&phi)).scale(real(w / total));
        mat = &mat + &term;
    }
    let state = DensityState::new(dims, mat.hermitian_part())?;
    Ok(LabeledState::new(
        "separable",
        &[
            ("m", dims.m() as f64),
            ("n", dims.n() as f64),
            ("k", k as f64),
            ("seed", seed.0 as f64),
        ],
        state,
    ))
}

/// `G G^dagger / Tr(G G^dagger)` for a seeded complex Gaussian `G`.
pub fn random_density(dims: SubsystemDims, seed: RngSeed) -> Result<DensityState> {
    let dim = dims.total();
    if dim < 2 {
        return Err(Error::ParamOutOfRange(
            "random density needs total dimension >= 2".into(),
        ));
    }
    let mut rng = seed.rng();
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian_complex(&mut rng));
    let gram = &g * &g.adjoint();
    let tr = gram.trace().re;
    DensityState::new(dims, gram.scale(real(1.0 / tr)).hermitian_part())
}

/// Haar-random unitary from the QR factorization of a complex Gaussian matrix.
///
/// Gram-Schmidt leaves a positive real diagonal in `R`, which is the phase
/// convention that makes `Q` Haar distributed.
pub fn random_unitary(dim: usize, seed: RngSeed) -> CMatrix {
    assert!(dim >= 1, "unitary dimension must be positive");
    let mut rng = seed.rng();
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while q.len() < dim {
        let mut v: Vec<Complex64> = (0..dim).map(|_| gaussian_complex(&mut rng)).collect();
        for _ in 0..2 {
            for b in &q {
                let proj: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= proj * bi;
                }
            }
        }
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // a (measure-zero) dependent draw is simply redrawn
        if nrm > 1e-8 {
            q.push(v.into_iter().map(|z| z / nrm).collect());
        }
    }
    CMatrix::from_fn(dim, dim, |i, j| q[j][i])
}

fn unitarity_deviation(u: &CMatrix) -> f64 {
    (&u.adjoint() * u).max_abs_diff(&CMatrix::identity(u.cols()))
}

/// `(W_A (x) W_B) rho (W_A (x) W_B)^dagger`.
pub fn local_unitary_conjugate(rho: &DensityState, wa: &CMatrix, wb: &CMatrix) -> Result<DensityState> {
    let dims = rho.dims();
    if wa.shape() != (dims.m(), dims.m()) || wb.shape() != (dims.n(), dims.n()) {
        return Err(Error::DimensionMismatch(format!(
            "local unitaries of shape {:?} and {:?} do not fit a {dims} system",
            wa.shape(),
            wb.shape()
        )));
    }
    for w in [wa, wb] {
        let deviation = unitarity_deviation(w);
        if deviation > TOL_UNITARY {
            return Err(Error::NotUnitary { deviation });
        }
    }
    let w = kron(wa, wb);
    let out = &(&w * rho.matrix()) * &w.adjoint();
    DensityState::new(dims, out.hermitian_part())
}

/// On-disk representation of a state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub m: usize,
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

impl StateFile {
    pub fn from_state(s: &LabeledState) -> Self {
        let mat = s.state.matrix();
        let size = mat.rows();
        let row = |i: usize, part: fn(&Complex64) -> f64| (0..size).map(|j| part(&mat[(i, j)])).collect();
        Self {
            m: s.state.dims().m(),
            n: s.state.dims().n(),
            re: (0..size).map(|i| row(i, |z| z.re)).collect(),
            im: (0..size).map(|i| row(i, |z| z.im)).collect(),
            name: Some(s.name.clone()),
            params: s.params.clone(),
        }
    }

    fn to_matrix(&self) -> Result<(SubsystemDims, CMatrix)> {
        let parse_err = |location: String, message: String| Error::Parse { location, message };
        if self.m == 0 || self.n == 0 {
            return Err(parse_err("field `m`/`n`".into(), "dimensions must be positive".into()));
        }
        let size = self.m * self.n;
        for (field, rows) in [("re", &self.re), ("im", &self.im)] {
            if rows.len() != size {
                return Err(parse_err(
                    format!("field `{field}`"),
                    format!("{} rows but m*n = {}*{} = {size}", rows.len(), self.m, self.n),
                ));
            }
            if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != size) {
                return Err(parse_err(
                    format!("field `{field}`, row {k}"),
                    format!("{} entries, expected {size}", r.len()),
                ));
            }
        }
        let data = self
            .re
            .iter()
            .flatten()
            .zip(self.im.iter().flatten())
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        let dims = SubsystemDims::new(self.m, self.n)?;
        Ok((dims, CMatrix::new(size, size, data)?))
    }
}

fn parse_state(text: &str, checked: bool) -> Result<LabeledState> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let (dims, mat) = file.to_matrix()?;
    let state = if checked {
        DensityState::new(dims, mat)?
    } else {
        DensityState::new_unchecked(dims, mat)?
    };
    Ok(LabeledState {
        name: file.name.unwrap_or_else(|| "file".into()),
        params: file.params,
        state,
    })
}

pub fn state_to_json(s: &LabeledState) -> String {
    serde_json::to_string_pretty(&StateFile::from_state(s)).expect("state file serialization cannot fail")
}

/// Parses a state file and checks the density-matrix invariants.
pub fn state_from_json(text: &str) -> Result<LabeledState> {
    parse_state(text, true)
}

/// Parses a state file, checking only the shape.
pub fn state_from_json_unchecked(text: &str) -> Result<LabeledState> {
    parse_state(text, false)
}

pub fn save_state(s: &LabeledState, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, state_to_json(s) + "\n")?;
    Ok(())
}

pub fn load_state(path: impl AsRef<Path>) -> Result<LabeledState> {
    state_from_json(&fs::read_to_string(path)?)
}

pub fn load_state_unchecked(path: impl AsRef<Path>) -> Result<LabeledState> {
    state_from_json_unchecked(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlin::{hermitian_eigenvalues, partial_trace, vec, Subsystem, TOL_HERM};
    use approx::assert_abs_diff_eq;

    #[test]
    fn swap_operator_small_cases() {
        assert_eq!(swap_operator(1), CMatrix::identity(1));
        #[rustfmt::skip]
        let v2 = CMatrix::from_real(4, 4, &[
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        ]).unwrap();
        assert_eq!(swap_operator(2), v2);
        for d in 1..5 {
            let v = swap_operator(d);
            assert_eq!(&v * &v, CMatrix::identity(d * d));
            assert_eq!(v.trace(), real(d as f64));
            assert_eq!(v.transpose(), v);
        }
    }

    #[test]
    fn swap_exchanges_factors() {
        let d = 3;
        let alpha = CMatrix::column(&random_unit_vector(&mut RngSeed(1).rng(), d));
        let beta = CMatrix::column(&random_unit_vector(&mut RngSeed(2).rng(), d));
        let v = swap_operator(d);
        let lhs = &v * &kron(&alpha, &beta);
        assert!(lhs.max_abs_diff(&kron(&beta, &alpha)) < 1e-15);
    }

    #[test]
    fn werner_examples() {
        let w = werner(3, -1.0).unwrap().state;
        let expected = (&CMatrix::identity(9) - &swap_operator(3)).scale(real(1.0 / 6.0));
        assert!(w.matrix().max_abs_diff(&expected) < 1e-15);

        let w = werner(2, 1.0).unwrap().state;
        let expected = (&CMatrix::identity(4) + &swap_operator(2)).scale(real(1.0 / 6.0));
        assert!(w.matrix().max_abs_diff(&expected) < 1e-15);

        let w = werner(3, 0.0).unwrap().state;
        let third = CMatrix::identity(3).scale(real(1.0 / 3.0));
        assert!(partial_trace(&w, Subsystem::A).max_abs_diff(&third) < 1e-15);
        assert!(partial_trace(&w, Subsystem::B).max_abs_diff(&third) < 1e-15);

        assert!(matches!(werner(3, 1.5), Err(Error::ParamOutOfRange(_))));
        assert!(matches!(werner(1, 0.0), Err(Error::ParamOutOfRange(_))));
    }

    #[test]
    fn horodecki_entries() {
        let s = horodecki_3x3(0.5).unwrap().state;
        let m = s.matrix();
        assert_abs_diff_eq!(m[(6, 8)].re, (3.0_f64.sqrt() / 4.0) / 5.0, epsilon = 1e-16);
        assert_abs_diff_eq!(m.trace().re, 1.0, epsilon = 1e-15);
        assert!(m.is_hermitian(0.0));
        assert!(matches!(horodecki_3x3(1.0), Err(Error::ParamOutOfRange(_))));
        assert!(matches!(horodecki_3x3(0.0), Err(Error::ParamOutOfRange(_))));
        let pt = crate::gptops::partial_transpose(m, s.dims(), Subsystem::A).unwrap();
        assert!(hermitian_eigenvalues(&pt).unwrap()[0] >= -1e-10);
    }

    #[test]
    fn separable_generator_contract() {
        let dims = SubsystemDims::new(2, 3).unwrap();
        let one = random_separable(dims, 1, RngSeed(5)).unwrap().state;
        let eig = hermitian_eigenvalues(one.matrix()).unwrap();
        assert_abs_diff_eq!(eig[5], 1.0, epsilon = 1e-12);
        assert!(eig[..5].iter().all(|x| x.abs() < 1e-12));

        let a = random_separable(dims, 7, RngSeed(9)).unwrap();
        let b = random_separable(dims, 7, RngSeed(9)).unwrap();
        assert_eq!(a, b);
        let c = random_separable(dims, 7, RngSeed(10)).unwrap();
        assert_ne!(a.state, c.state);
        assert!(random_separable(dims, 0, RngSeed(1)).is_err());
    }

    #[test]
    fn full_rank_separable() {
        let dims = SubsystemDims::new(2, 2).unwrap();
        let s = random_separable(dims, 16, RngSeed(77)).unwrap().state;
        let eig = hermitian_eigenvalues(s.matrix()).unwrap();
        assert!(eig[0] > 1e-6);
    }

    #[test]
    fn random_density_contract() {
        let dims = SubsystemDims::new(2, 2).unwrap();
        let r = random_density(dims, RngSeed(42)).unwrap();
        assert_abs_diff_eq!(r.matrix().trace().re, 1.0, epsilon = 1e-12);
        assert!(hermitian_eigenvalues(r.matrix()).unwrap()[0] >= -1e-12);
        assert_eq!(r, random_density(dims, RngSeed(42)).unwrap());
        assert!(random_density(SubsystemDims::new(1, 1).unwrap(), RngSeed(1)).is_err());
    }

    #[test]
    fn random_unitary_contract() {
        let u1 = random_unitary(1, RngSeed(3));
        assert_abs_diff_eq!(u1[(0, 0)].norm(), 1.0, epsilon = 1e-15);
        for dim in [2, 3, 9] {
            let u = random_unitary(dim, RngSeed(dim as u64));
            assert!(unitarity_deviation(&u) < 1e-10);
            assert!((&u * &u.adjoint()).max_abs_diff(&CMatrix::identity(dim)) < 1e-10);
        }
    }

    #[test]
    fn local_conjugation_preserves_spectrum() {
        let dims = SubsystemDims::new(2, 3).unwrap();
        let rho = random_density(dims, RngSeed(8)).unwrap();
        let same = local_unitary_conjugate(&rho, &CMatrix::identity(2), &CMatrix::identity(3)).unwrap();
        assert!(same.matrix().max_abs_diff(rho.matrix()) < 1e-15);

        let wa = random_unitary(2, RngSeed(1));
        let wb = random_unitary(3, RngSeed(2));
        let out = local_unitary_conjugate(&rho, &wa, &wb).unwrap();
        let e1 = hermitian_eigenvalues(rho.matrix()).unwrap();
        let e2 = hermitian_eigenvalues(out.matrix()).unwrap();
        for (x, y) in e1.iter().zip(&e2) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        assert!(out.matrix().is_hermitian(TOL_HERM));
    }

    #[test]
    fn local_conjugation_errors() {
        let dims = SubsystemDims::new(2, 2).unwrap();
        let rho = random_density(dims, RngSeed(8)).unwrap();
        let not_unitary = CMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            local_unitary_conjugate(&rho, &not_unitary, &CMatrix::identity(2)),
            Err(Error::NotUnitary { .. })
        ));
        assert!(matches!(
            local_unitary_conjugate(&rho, &CMatrix::identity(3), &CMatrix::identity(2)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn state_file_round_trip() {
        let w = werner(3, -0.5).unwrap();
        let back = state_from_json(&state_to_json(&w)).unwrap();
        assert_eq!(back.state.dims(), w.state.dims());
        assert_eq!(back.state.matrix(), w.state.matrix());
        assert_eq!(back.name, "werner");
        assert_eq!(back.params, w.params);

        // complex entries survive too
        let dims = SubsystemDims::new(2, 2).unwrap();
        let r = LabeledState::new("random", &[], random_density(dims, RngSeed(4)).unwrap());
        let back = state_from_json(&state_to_json(&r)).unwrap();
        assert!(back.state.matrix().max_abs_diff(r.state.matrix()) <= 1e-15);
        assert_eq!(vec(back.state.matrix()), vec(r.state.matrix()));
    }

    #[test]
    fn state_file_errors() {
        let w = werner(2, 0.5).unwrap();
        let mut file = StateFile::from_state(&w);
        for row in file.re.iter_mut() {
            for x in row.iter_mut() {
                *x *= 0.9;
            }
        }
        let text = serde_json::to_string(&file).unwrap();
        assert!(matches!(state_from_json(&text), Err(Error::InvariantViolation(_))));
        let loose = state_from_json_unchecked(&text).unwrap();
        assert_abs_diff_eq!(loose.state.matrix().trace().re, 0.9, epsilon = 1e-12);

        let mut wrong_dims = StateFile::from_state(&w);
        wrong_dims.n = 3;
        let text = serde_json::to_string(&wrong_dims).unwrap();
        assert!(matches!(state_from_json(&text), Err(Error::Parse { .. })));

        let mut ragged = StateFile::from_state(&w);
        ragged.im[2].pop();
        let err = state_from_json(&serde_json::to_string(&ragged).unwrap()).unwrap_err();
        assert!(err.to_string().contains("`im`, row 2"), "{err}");

        let err = state_from_json("{\n  \"m\": 2,\n  \"n\": oops }").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
