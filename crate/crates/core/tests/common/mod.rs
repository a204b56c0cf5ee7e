#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sepscope::matlin::{hermitian_eigenvalues, CMatrix};
use sepscope::{Complex64, SubsystemDims};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn dims(m: usize, n: usize) -> SubsystemDims {
    SubsystemDims::new(m, n).unwrap()
}

pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Regroups `rho[(i,mu),(j,nu)]` by moving the flagged indices between rows
/// and columns, then ordering each side by `order` (most significant first).
/// Slots: 0 = i, 1 = j, 2 = mu, 3 = nu.
pub fn regroup(rho: &CMatrix, m: usize, n: usize, bits: u8, order: [usize; 4]) -> CMatrix {
    let size = [m, m, n, n];
    // a slot sits on the row side unless it was moved off it
    let on_row = [bits & 1 == 0, bits & 2 != 0, bits & 4 == 0, bits & 8 != 0];
    let row_slots: Vec<usize> = order.iter().copied().filter(|&s| on_row[s]).collect();
    let col_slots: Vec<usize> = order.iter().copied().filter(|&s| !on_row[s]).collect();
    let extent = |slots: &[usize]| slots.iter().map(|&s| size[s]).product::<usize>();
    let mut out = CMatrix::zeros(extent(&row_slots), extent(&col_slots));
    let flat = |slots: &[usize], idx: &[usize; 4]| slots.iter().fold(0, |acc, &s| acc * size[s] + idx[s]);
    for i in 0..m {
        for j in 0..m {
            for mu in 0..n {
                for nu in 0..n {
                    let idx = [i, j, mu, nu];
                    out[(flat(&row_slots, &idx), flat(&col_slots, &idx))] = rho[(i * n + mu, j * n + nu)];
                }
            }
        }
    }
    out
}

/// Trace norm of a Hermitian matrix through its spectrum.
pub fn hermitian_trace_norm(h: &CMatrix) -> f64 {
    hermitian_eigenvalues(h).unwrap().iter().map(|l| l.abs()).sum()
}
