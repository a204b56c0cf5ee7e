//! Generalized partial transpositions of bipartite matrices.
//!
//! A bipartite matrix entry is addressed as `rho[(i, mu), (j, nu)]` with
//! composite row `i * n + mu` and column `j * n + nu`. Each of the four flags
//! `rA, cA, rB, cB` moves one index slot across the row/column divide:
//!
//! | flag | slot moved | direction        |
//! |------|------------|------------------|
//! | `rA` | `i`        | rows -> columns  |
//! | `cA` | `j`        | columns -> rows  |
//! | `rB` | `mu`       | rows -> columns  |
//! | `cB` | `nu`       | columns -> rows  |
//!
//! Within the output row (or column) multi-index, A-derived digits are more
//! significant than B-derived ones, and within one subsystem the
//! column-origin digit (`j`, `nu`) is more significant than the row-origin
//! digit (`i`, `mu`). This reproduces the realigned matrix for `{cA, rB}`
//! and the usual partial transpose for `{rA, cA}`. Trace norms do not depend
//! on the ordering.

use std::fmt;
use std::ops::BitOr;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matlin::{kron, svd, unvec, CMatrix, Subsystem, SubsystemDims};

/// Singular values at or below this count as zero when forming Kronecker terms.
pub const RANK_CUTOFF: f64 = 1e-12;

/// One of the four transposition flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GptFlag {
    RowA,
    ColA,
    RowB,
    ColB,
}

impl GptFlag {
    pub const ALL: [GptFlag; 4] = [GptFlag::RowA, GptFlag::ColA, GptFlag::RowB, GptFlag::ColB];

    fn bit(self) -> u8 {
        match self {
            GptFlag::RowA => 1,
            GptFlag::ColA => 2,
            GptFlag::RowB => 4,
            GptFlag::ColB => 8,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            GptFlag::RowA => "rA",
            GptFlag::ColA => "cA",
            GptFlag::RowB => "rB",
            GptFlag::ColB => "cB",
        }
    }
}

/// A subset `Y` of `{rA, cA, rB, cB}`.
///
/// The bit layout is `rA = 1, cA = 2, rB = 4, cB = 8`, so [`GptOpSet::all`]
/// enumerates the 16 subsets as a 4-bit counter with `rA` as the low bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct GptOpSet(u8);

impl GptOpSet {
    pub const EMPTY: GptOpSet = GptOpSet(0);
    pub const RA: GptOpSet = GptOpSet(1);
    pub const CA: GptOpSet = GptOpSet(2);
    pub const RB: GptOpSet = GptOpSet(4);
    pub const CB: GptOpSet = GptOpSet(8);
    /// `{rA, cA}`: partial transpose on A.
    pub const PT_A: GptOpSet = GptOpSet(3);
    /// `{rB, cB}`: partial transpose on B.
    pub const PT_B: GptOpSet = GptOpSet(12);
    /// `{cA, rB}`: realignment.
    pub const REALIGN: GptOpSet = GptOpSet(6);
    pub const FULL: GptOpSet = GptOpSet(15);

    pub fn from_bits(bits: u8) -> Option<Self> {
        (bits < 16).then_some(Self(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    /// Position in the canonical enumeration.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_flags(flags: impl IntoIterator<Item = GptFlag>) -> Self {
        Self(flags.into_iter().fold(0, |acc, f| acc | f.bit()))
    }

    pub fn contains(self, flag: GptFlag) -> bool {
        self.0 & flag.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn flags(self) -> impl Iterator<Item = GptFlag> {
        GptFlag::ALL.into_iter().filter(move |&f| self.contains(f))
    }

    /// All 16 subsets in canonical order.
    pub fn all() -> impl Iterator<Item = GptOpSet> {
        (0..16u8).map(GptOpSet)
    }

    /// Transposition flags acting on one subsystem.
    pub fn local(self, which: Subsystem) -> LocalTransposition {
        match which {
            Subsystem::A => LocalTransposition {
                row: self.contains(GptFlag::RowA),
                col: self.contains(GptFlag::ColA),
            },
            Subsystem::B => LocalTransposition {
                row: self.contains(GptFlag::RowB),
                col: self.contains(GptFlag::ColB),
            },
        }
    }

    /// Parses a selection: `all` expands to the 16 subsets, anything else is a
    /// single set as accepted by [`FromStr`].
    pub fn parse_selection(s: &str) -> Result<Vec<GptOpSet>> {
        if s.trim().eq_ignore_ascii_case("all") {
            Ok(Self::all().collect())
        } else {
            Ok(vec![s.parse()?])
        }
    }
}

impl BitOr for GptOpSet {
    type Output = GptOpSet;

    fn bitor(self, rhs: GptOpSet) -> GptOpSet {
        GptOpSet(self.0 | rhs.0)
    }
}

impl From<GptFlag> for GptOpSet {
    fn from(f: GptFlag) -> Self {
        GptOpSet(f.bit())
    }
}

impl fmt::Display for GptOpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("none");
        }
        let codes: Vec<&str> = self.flags().map(GptFlag::code).collect();
        f.write_str(&codes.join(","))
    }
}

impl FromStr for GptOpSet {
    type Err = Error;

    /// Comma-separated codes from `{rA, cA, rB, cB}`; `none` or an empty
    /// string is the empty set.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case("none") {
            return Ok(GptOpSet::EMPTY);
        }
        let mut set = GptOpSet::EMPTY;
        for code in s.split(',').map(str::trim) {
            let flag = GptFlag::ALL
                .into_iter()
                .find(|f| f.code() == code)
                .ok_or_else(|| Error::Parse {
                    location: format!("yset `{s}`"),
                    message: format!("unknown transposition code `{code}` (expected rA, cA, rB or cB)"),
                })?;
            set = set | flag.into();
        }
        Ok(set)
    }
}

/// Row/column transposition flags on a single (unpartitioned) matrix.
///
/// Composition acts on index origins: after `ROW` the former row index lives
/// among the columns, and a subsequent `COL` moves the former column index
/// to the rows. Hence `ROW.then(COL)` is the plain transpose even though
/// `col_transposition(&row_transposition(a))` as matrices is just `vec(a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LocalTransposition {
    pub row: bool,
    pub col: bool,
}

impl LocalTransposition {
    pub const NONE: Self = Self { row: false, col: false };
    pub const ROW: Self = Self { row: true, col: false };
    pub const COL: Self = Self { row: false, col: true };

    pub fn then(self, other: Self) -> Self {
        Self {
            row: self.row || other.row,
            col: self.col || other.col,
        }
    }

    pub fn apply(self, a: &CMatrix) -> CMatrix {
        let (r, c) = a.shape();
        let out_rows = if self.col { c } else { 1 } * if self.row { 1 } else { r };
        let out_cols = if self.col { 1 } else { c } * if self.row { r } else { 1 };
        let mut out = CMatrix::zeros(out_rows, out_cols);
        for i in 0..r {
            for j in 0..c {
                let mut row = 0;
                let mut col = 0;
                if self.col {
                    row = row * c + j;
                } else {
                    col = col * c + j;
                }
                if self.row {
                    col = col * r + i;
                } else {
                    row = row * r + i;
                }
                out[(row, col)] = a[(i, j)];
            }
        }
        out
    }
}

/// `T_r(A) = vec(A)^t`, a `1 x (rows * cols)` row.
pub fn row_transposition(a: &CMatrix) -> CMatrix {
    LocalTransposition::ROW.apply(a)
}

/// `T_c(A) = vec(A)`, a `(rows * cols) x 1` column.
pub fn col_transposition(a: &CMatrix) -> CMatrix {
    LocalTransposition::COL.apply(a)
}

/// Applies `T_Y` to an `(m n) x (m n)` matrix by one-shot index regrouping.
pub fn gpt_transform(rho: &CMatrix, dims: SubsystemDims, y: GptOpSet) -> Result<CMatrix> {
    dims.check_square(rho)?;
    let (m, n) = (dims.m(), dims.n());

    // significance order j, i, nu, mu; true = digit ends up in the output row
    let in_row = [
        y.contains(GptFlag::ColA),
        !y.contains(GptFlag::RowA),
        y.contains(GptFlag::ColB),
        !y.contains(GptFlag::RowB),
    ];
    let ranges = [m, m, n, n];
    let extent = |want_row: bool| -> usize { (0..4).filter(|&k| in_row[k] == want_row).map(|k| ranges[k]).product() };
    let (out_rows, out_cols) = (extent(true), extent(false));

    let mut out = CMatrix::zeros(out_rows, out_cols);
    for i in 0..m {
        for mu in 0..n {
            for j in 0..m {
                for nu in 0..n {
                    let digits = [j, i, nu, mu];
                    let (mut row, mut col) = (0, 0);
                    for k in 0..4 {
                        if in_row[k] {
                            row = row * ranges[k] + digits[k];
                        } else {
                            col = col * ranges[k] + digits[k];
                        }
                    }
                    out[(row, col)] = rho[(i * n + mu, j * n + nu)];
                }
            }
        }
    }
    Ok(out)
}

/// Realigned matrix `Z_hat` of size `m^2 x n^2`: row `j * m + i` is
/// `vec(Z_ij)^t` for the `n x n` block `Z_ij`.
pub fn realign(rho: &CMatrix, dims: SubsystemDims) -> Result<CMatrix> {
    dims.check_square(rho)?;
    let (m, n) = (dims.m(), dims.n());
    let mut out = CMatrix::zeros(m * m, n * n);
    for bi in 0..m {
        for bj in 0..m {
            // vec of block (bi, bj): entry (mu, nu) at nu * n + mu
            for nu in 0..n {
                for mu in 0..n {
                    out[(bj * m + bi, nu * n + mu)] = rho[(bi * n + mu, bj * n + nu)];
                }
            }
        }
    }
    Ok(out)
}

/// Standard partial transpose on one subsystem.
pub fn partial_transpose(rho: &CMatrix, dims: SubsystemDims, which: Subsystem) -> Result<CMatrix> {
    dims.check_square(rho)?;
    let (m, n) = (dims.m(), dims.n());
    Ok(CMatrix::from_fn(m * n, m * n, |r, c| {
        let (i, mu) = (r / n, r % n);
        let (j, nu) = (c / n, c % n);
        match which {
            Subsystem::A => rho[(j * n + mu, i * n + nu)],
            Subsystem::B => rho[(i * n + nu, j * n + mu)],
        }
    }))
}

/// `(X (x) Y)^{T_Y}` computed factor-wise as `T_{Y_A}(X) (x) T_{Y_B}(Y)`.
pub fn gpt_transform_product(x: &CMatrix, y: &CMatrix, yset: GptOpSet) -> CMatrix {
    kron(&yset.local(Subsystem::A).apply(x), &yset.local(Subsystem::B).apply(y))
}

#[derive(Debug, Clone)]
pub struct KronTerm {
    /// `m x m` factor on A.
    pub x: CMatrix,
    /// `n x n` factor on B.
    pub y: CMatrix,
}

/// `Z = sum_i X_i (x) Y_i` obtained from the SVD of the realigned matrix.
#[derive(Debug, Clone)]
pub struct KronTermList {
    pub dims: SubsystemDims,
    pub terms: Vec<KronTerm>,
    /// Singular values of the realigned matrix that produced each term.
    pub sigma: Vec<f64>,
}

impl KronTermList {
    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    /// `sum_i X_i (x) Y_i`.
    pub fn reconstruct(&self) -> CMatrix {
        let size = self.dims.total();
        self.terms
            .iter()
            .fold(CMatrix::zeros(size, size), |acc, t| &acc + &kron(&t.x, &t.y))
    }

    /// `sum_i T_{Y_A}(X_i) (x) T_{Y_B}(Y_i)`, i.e. `T_Y` applied term by term.
    pub fn transformed(&self, yset: GptOpSet) -> Option<CMatrix> {
        let mut iter = self.terms.iter().map(|t| gpt_transform_product(&t.x, &t.y, yset));
        let first = iter.next()?;
        Some(iter.fold(first, |acc, term| &acc + &term))
    }
}

/// Decomposes `Z` into a sum of Kronecker products, one per nonzero singular
/// value of its realignment: `vec(X_i) = sqrt(s_i) u_i`, `vec(Y_i) = sqrt(s_i) conj(v_i)`.
pub fn kron_decompose(z: &CMatrix, dims: SubsystemDims) -> Result<KronTermList> {
    let zhat = realign(z, dims)?;
    let dec = svd(&zhat);
    let (m, n) = (dims.m(), dims.n());
    let mut terms = Vec::new();
    let mut sigma = Vec::new();
    for (k, &s) in dec.sigma.iter().enumerate() {
        if s <= RANK_CUTOFF {
            continue;
        }
        let root = s.sqrt();
        let u: Vec<_> = (0..m * m).map(|r| dec.u[(r, k)] * root).collect();
        let v: Vec<_> = (0..n * n).map(|r| dec.v[(r, k)].conj() * root).collect();
        terms.push(KronTerm {
            x: unvec(&u, m, m)?,
            y: unvec(&v, n, n)?,
        });
        sigma.push(s);
    }
    Ok(KronTermList { dims, terms, sigma })
}
