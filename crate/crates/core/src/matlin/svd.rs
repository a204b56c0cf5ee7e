//! One-sided (Hestenes) Jacobi SVD for complex matrices.
//!
//! Column pairs are rotated until every pair is orthogonal to working
//! precision. The singular values come out with high relative accuracy,
//! which matters here because trace norms are compared against bounds at
//! the 1e-8 level.

use num_complex::Complex64;

use super::{CMatrix, ONE, ZERO};

/// Relative orthogonality threshold for a column pair.
const PAIR_EPS: f64 = 4.0 * f64::EPSILON;
const MAX_SWEEPS: usize = 80;

/// Thin SVD `M = U * diag(sigma) * V^dagger`.
///
/// With `k = min(rows, cols)`: `u` is `rows x k`, `v` is `cols x k`, both
/// with orthonormal columns, and `sigma` is non-negative and descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    /// `U * diag(sigma) * V^dagger`.
    pub fn reconstruct(&self) -> CMatrix {
        let us = CMatrix::from_fn(self.u.rows(), self.sigma.len(), |i, j| self.u[(i, j)] * self.sigma[j]);
        &us * &self.v.adjoint()
    }
}

pub fn svd(m: &CMatrix) -> Svd {
    if m.rows() < m.cols() {
        let t = jacobi_tall(&m.adjoint());
        Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        }
    } else {
        jacobi_tall(m)
    }
}

/// Singular values, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    svd(m).sigma
}

/// Sum of the singular values (Ky Fan / nuclear norm).
pub fn trace_norm(m: &CMatrix) -> f64 {
    singular_values(m).iter().sum()
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// Applies the plane rotation `(x, y) <- (c x - s e y, s x + c e y)`.
fn rotate(x: &mut [Complex64], y: &mut [Complex64], c: f64, s: f64, e: Complex64) {
    for (xp, yq) in x.iter_mut().zip(y.iter_mut()) {
        let a = *xp;
        let b = *yq * e;
        *xp = a * c - b * s;
        *yq = a * s + b * c;
    }
}

// rows >= cols
fn jacobi_tall(m: &CMatrix) -> Svd {
    let rows = m.rows();
    let k = m.cols();
    let mut cols: Vec<Vec<Complex64>> = (0..k).map(|j| (0..rows).map(|i| m[(i, j)]).collect()).collect();
    let mut vcols: Vec<Vec<Complex64>> = (0..k)
        .map(|j| (0..k).map(|i| if i == j { ONE } else { ZERO }).collect())
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha = norm_sqr(&cols[p]);
                let beta = norm_sqr(&cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= PAIR_EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + 1.0_f64.hypot(zeta));
                let c = 1.0 / 1.0_f64.hypot(t);
                let s = c * t;
                // phase that makes the pair's inner product real and positive
                let e = (gamma / g).conj();
                let (head, tail) = cols.split_at_mut(q);
                rotate(&mut head[p], &mut tail[0], c, s, e);
                let (head, tail) = vcols.split_at_mut(q);
                rotate(&mut head[p], &mut tail[0], c, s, e);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = cols.iter().map(|col| norm_sqr(col).sqrt()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let sigma_max = norms.iter().copied().fold(0.0, f64::max);
    let negligible = sigma_max * (rows as f64) * f64::EPSILON;

    let mut ucols: Vec<Option<Vec<Complex64>>> = Vec::with_capacity(k);
    for &j in &order {
        let nrm = norms[j];
        if nrm > negligible && nrm > 0.0 {
            ucols.push(Some(cols[j].iter().map(|z| z / nrm).collect()));
        } else {
            ucols.push(None);
        }
    }
    let ucols = complete_orthonormal(ucols, rows);

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let u = CMatrix::from_fn(rows, k, |i, j| ucols[j][i]);
    let v = CMatrix::from_fn(k, k, |i, j| vcols[order[j]][i]);
    Svd { u, sigma, v }
}

/// Fills the `None` slots with unit vectors orthogonal to every other column.
fn complete_orthonormal(cols: Vec<Option<Vec<Complex64>>>, dim: usize) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = cols.iter().flatten().cloned().collect();
    let mut out = Vec::with_capacity(cols.len());
    for col in cols {
        match col {
            Some(c) => out.push(c),
            None => {
                // the unit vector with the largest residual keeps at least
                // sqrt((dim - basis.len()) / dim) of its norm
                let w = (0..dim)
                    .map(|candidate| {
                        let mut w: Vec<Complex64> = (0..dim).map(|i| if i == candidate { ONE } else { ZERO }).collect();
                        for _ in 0..2 {
                            for b in &basis {
                                let proj = dot(b, &w);
                                for (wi, bi) in w.iter_mut().zip(b) {
                                    *wi -= proj * bi;
                                }
                            }
                        }
                        w
                    })
                    .max_by(|x, y| norm_sqr(x).total_cmp(&norm_sqr(y)))
                    .expect("completion needs a non-empty space");
                let nrm = norm_sqr(&w).sqrt();
                let w: Vec<Complex64> = w.iter().map(|z| z / nrm).collect();
                basis.push(w.clone());
                out.push(w);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn orthonormality_error(q: &CMatrix) -> f64 {
        let g = &q.adjoint() * q;
        g.max_abs_diff(&CMatrix::identity(q.cols()))
    }

    #[test]
    fn completion_with_uniform_null_vector() {
        // I - J/9 annihilates the all-ones vector, which no unit vector is close to
        let m = CMatrix::from_fn(9, 9, |i, j| {
            Complex64::new(if i == j { 1.0 } else { 0.0 } - 1.0 / 9.0, 0.0)
        });
        let s = svd(&m);
        assert!(s.sigma[8] < 1e-14);
        assert!(orthonormality_error(&s.u) < 1e-12);
        assert!(s.reconstruct().max_abs_diff(&m) < 1e-13);
    }

    #[test]
    fn diagonal_and_zero() {
        let d = CMatrix::from_real(2, 2, &[3.0, 0.0, 0.0, 4.0]).unwrap();
        let s = svd(&d);
        assert_abs_diff_eq!(s.sigma[0], 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.sigma[1], 3.0, epsilon = 1e-14);

        let z = CMatrix::zeros(3, 2);
        let s = svd(&z);
        assert!(s.sigma.iter().all(|&x| x == 0.0));
        assert!(orthonormality_error(&s.u) < 1e-14);
        assert!(orthonormality_error(&s.v) < 1e-14);
    }

    #[test]
    fn trace_norm_simple() {
        assert_abs_diff_eq!(trace_norm(&CMatrix::identity(5)), 5.0, epsilon = 1e-14);
        let d = CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -2.0]).unwrap();
        assert_abs_diff_eq!(trace_norm(&d), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn random_5x3_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_matrix(&mut rng, 5, 3);
        let s = svd(&m);
        assert!((&s.reconstruct() - &m).frobenius_norm() <= 1e-10);
        assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rank_deficient_and_wide() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(&mut rng, 6, 2);
        let b = random_matrix(&mut rng, 2, 7);
        let m = &a * &b; // rank 2, 6x7
        let s = svd(&m);
        assert_eq!(s.u.shape(), (6, 6));
        assert_eq!(s.v.shape(), (7, 6));
        assert!(s.sigma[2..].iter().all(|&x| x < 1e-12));
        assert!((&s.reconstruct() - &m).frobenius_norm() <= 1e-10);
        assert!(orthonormality_error(&s.u) <= 1e-10);
        assert!(orthonormality_error(&s.v) <= 1e-10);
    }

    #[test]
    fn agrees_with_nalgebra_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for &(r, c) in &[(4, 4), (9, 9), (3, 27), (16, 4)] {
            let m = random_matrix(&mut rng, r, c);
            let ours = singular_values(&m);
            let mut theirs: Vec<f64> = m.to_nalgebra().singular_values().iter().copied().collect();
            theirs.sort_by(|a, b| b.total_cmp(a));
            for (x, y) in ours.iter().zip(&theirs) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-12);
            }
        }
    }
}
