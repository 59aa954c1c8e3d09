//! Pfaffians of antisymmetric matrices and quaternion determinants of self-dual block matrices.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Asymmetry accepted (relative to the largest entry) before a matrix is rejected.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;
/// Relative pivot size below which elimination reports a structural zero.
pub const PIVOT_TOL: f64 = 1e-13;
/// Largest dimension accepted by [`pfaffian_laplace`].
pub const LAPLACE_MAX_DIM: usize = 12;

/// Even-dimensional antisymmetric matrix stored densely in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "Vec<Vec<T>>",
    into = "Vec<Vec<T>>",
    bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct AntisymmetricMatrix<T: Scalar> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> AntisymmetricMatrix<T> {
    /// Validates and symmetrizes `rows` using the default tolerance.
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::with_tolerance(rows, ANTISYMMETRY_TOL)
    }

    /// Like [`new`](Self::new) with a caller-chosen relative asymmetry tolerance.
    pub fn with_tolerance(rows: Vec<Vec<T>>, tol: f64) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidDimension { dim, reason: "matrix is not square" });
        }
        let data: Vec<T> = rows.into_iter().flatten().collect();
        Self::from_dense(dim, data, tol)
    }

    /// Builds a matrix from the strict upper triangle `f(i, j)`, `i < j`; exact by construction.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        check_dim(dim)?;
        let mut data = vec![T::zero(); dim * dim];
        for i in 0..dim {
            for j in i + 1..dim {
                let v = f(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = -v;
            }
        }
        Ok(Self { dim, data })
    }

    /// Validates a dense row-major buffer.
    pub fn from_dense(dim: usize, mut data: Vec<T>, tol: f64) -> Result<Self> {
        check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(Error::InvalidDimension { dim, reason: "buffer length is not dim*dim" });
        }
        let scale = data.iter().map(|v| v.modulus()).fold(0.0, f64::max);
        let limit = tol * scale.max(f64::MIN_POSITIVE);
        for i in 0..dim {
            for j in i..dim {
                let dev = (data[i * dim + j] + data[j * dim + i]).modulus();
                if !(dev <= limit) {
                    return Err(Error::NotAntisymmetric { i, j, deviation: dev });
                }
                let v = (data[i * dim + j] - data[j * dim + i]) * 0.5;
                data[i * dim + j] = v;
                data[j * dim + i] = -v;
            }
            data[i * dim + i] = T::zero();
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    /// Returns `P A P^T` where row `i` of the result is row `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dim;
        if perm.len() != n {
            return Err(Error::InvalidArgument(format!("permutation length {} != {}", perm.len(), n)));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
            seen[p] = true;
        }
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        Ok(Self { dim: n, data })
    }

    pub fn to_json(&self) -> String
    where
        T: Serialize,
    {
        serde_json::to_string(self).expect("matrix serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

impl<T: Scalar> TryFrom<Vec<Vec<T>>> for AntisymmetricMatrix<T> {
    type Error = Error;
    fn try_from(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl<T: Scalar> From<AntisymmetricMatrix<T>> for Vec<Vec<T>> {
    fn from(m: AntisymmetricMatrix<T>) -> Self {
        m.rows()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidDimension { dim, reason: "dimension must be positive" });
    }
    if dim % 2 != 0 {
        return Err(Error::InvalidDimension { dim, reason: "dimension must be even" });
    }
    Ok(())
}

/// `Z_{2n}`: block diagonal with `[[0,-1],[1,0]]` blocks.
pub fn z_matrix(n_blocks: usize) -> Result<AntisymmetricMatrix<f64>> {
    if n_blocks == 0 {
        return Err(Error::InvalidDimension { dim: 0, reason: "at least one block required" });
    }
    AntisymmetricMatrix::from_upper(2 * n_blocks, |i, j| if i % 2 == 0 && j == i + 1 { -1.0 } else { 0.0 })
}

/// Pfaffian by recursive expansion along the first row; cost grows like `(dim-1)!!`.
pub fn pfaffian_laplace<T: Scalar>(a: &AntisymmetricMatrix<T>) -> Result<T> {
    if a.dim > LAPLACE_MAX_DIM {
        return Err(Error::DimensionTooLarge { dim: a.dim, max: LAPLACE_MAX_DIM });
    }
    let idx: Vec<usize> = (0..a.dim).collect();
    Ok(laplace_rec(a, &idx))
}

fn laplace_rec<T: Scalar>(a: &AntisymmetricMatrix<T>, idx: &[usize]) -> T {
    match idx.len() {
        0 => T::one(),
        2 => a.get(idx[0], idx[1]),
        _ => {
            let mut total = T::zero();
            let mut rest = Vec::with_capacity(idx.len() - 2);
            for j in 1..idx.len() {
                let entry = a.get(idx[0], idx[j]);
                if entry.modulus() == 0.0 {
                    continue;
                }
                rest.clear();
                rest.extend(idx[1..].iter().enumerate().filter(|&(k, _)| k + 1 != j).map(|(_, &v)| v));
                let term = entry * laplace_rec(a, &rest);
                if j % 2 == 1 {
                    total += term;
                } else {
                    total -= term;
                }
            }
            total
        }
    }
}

/// Pfaffian by skew-symmetric Parlett-Reid elimination with partial pivoting.
///
/// A pivot smaller than `PIVOT_TOL` times the largest entry is treated as a structural zero.
pub fn pfaffian<T: Scalar>(a: &AntisymmetricMatrix<T>) -> T {
    let n = a.dim;
    let scale = a.max_abs();
    if scale == 0.0 {
        return T::zero();
    }
    let threshold = PIVOT_TOL * scale;
    let mut m = a.data.clone();
    let mut pf = T::one();
    let at = |i: usize, j: usize| i * n + j;
    for k in (0..n - 1).step_by(2) {
        let mut kp = k + 1;
        let mut best = m[at(k + 1, k)].modulus();
        for i in k + 2..n {
            let v = m[at(i, k)].modulus();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if best < threshold {
            return T::zero();
        }
        if kp != k + 1 {
            for c in 0..n {
                m.swap(at(k + 1, c), at(kp, c));
            }
            for r in 0..n {
                m.swap(at(r, k + 1), at(r, kp));
            }
            pf = -pf;
        }
        let piv = m[at(k, k + 1)];
        pf *= piv;
        if k + 2 < n {
            let tau: Vec<T> = (k + 2..n).map(|c| m[at(k, c)] / piv).collect();
            let col: Vec<T> = (k + 2..n).map(|r| m[at(r, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    let upd = tau[ii] * col[jj] - col[ii] * tau[jj];
                    m[at(i, j)] += upd;
                }
            }
        }
    }
    pf
}

/// Pfaffian after an exact power-of-two congruence `D A D` that brings every row to unit
/// scale, using `Pf(D A D) = det(D) Pf(A)`.
///
/// Rows whose magnitudes differ by many orders (a point far in a Gaussian tail) would otherwise
/// trip the structural-zero threshold of [`pfaffian`].
pub fn pfaffian_balanced<T: Scalar>(a: &AntisymmetricMatrix<T>) -> T {
    let n = a.dim;
    let mut m = a.data.clone();
    let mut exponent: i32 = 0;
    for _ in 0..2 {
        for i in 0..n {
            let row = (0..n).map(|j| m[i * n + j].modulus()).fold(0.0, f64::max);
            if row == 0.0 || !row.is_finite() {
                continue;
            }
            let e = -(row.log2() / 2.0).round() as i32;
            if e == 0 {
                continue;
            }
            let s = 2f64.powi(e);
            for j in 0..n {
                m[i * n + j] = m[i * n + j] * s;
                m[j * n + i] = m[j * n + i] * s;
            }
            exponent -= e;
        }
    }
    let pf = pfaffian(&AntisymmetricMatrix { dim: n, data: m });
    let half = exponent / 2;
    pf * 2f64.powi(half) * 2f64.powi(exponent - half)
}

/// `n x n` array of 2x2 blocks satisfying self-duality.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionBlockMatrix<T: Scalar> {
    n_blocks: usize,
    blocks: Vec<[[T; 2]; 2]>,
}

/// Quaternion dual: swap the diagonal, negate the off-diagonal.
pub fn dual<T: Scalar>(b: &[[T; 2]; 2]) -> [[T; 2]; 2] {
    [[b[1][1], -b[0][1]], [-b[1][0], b[0][0]]]
}

impl<T: Scalar> QuaternionBlockMatrix<T> {
    /// `blocks[i][j]` is the block in block-row `i`, block-column `j`.
    pub fn new(blocks: Vec<Vec<[[T; 2]; 2]>>) -> Result<Self> {
        let n = blocks.len();
        if n == 0 || blocks.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidDimension { dim: n, reason: "block array must be square and nonempty" });
        }
        let flat: Vec<[[T; 2]; 2]> = blocks.into_iter().flatten().collect();
        let scale = flat
            .iter()
            .flat_map(|b| b.iter().flatten())
            .map(|v| v.modulus())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in i..n {
                let d = dual(&flat[i * n + j]);
                let other = &flat[j * n + i];
                let mut dev: f64 = 0.0;
                for r in 0..2 {
                    for c in 0..2 {
                        dev = dev.max((d[r][c] - other[r][c]).modulus());
                    }
                }
                if !(dev <= ANTISYMMETRY_TOL * scale) {
                    return Err(Error::NotSelfDual { i, j, deviation: dev });
                }
            }
        }
        Ok(Self { n_blocks: n, blocks: flat })
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn block(&self, i: usize, j: usize) -> [[T; 2]; 2] {
        self.blocks[i * self.n_blocks + j]
    }

    /// The `2n x 2n` scalar matrix, row-major.
    pub fn flatten(&self) -> Vec<Vec<T>> {
        let n2 = 2 * self.n_blocks;
        let mut out = vec![vec![T::zero(); n2]; n2];
        for i in 0..self.n_blocks {
            for j in 0..self.n_blocks {
                let b = self.block(i, j);
                for r in 0..2 {
                    for c in 0..2 {
                        out[2 * i + r][2 * j + c] = b[r][c];
                    }
                }
            }
        }
        out
    }

    /// `M Z^{-1}`; antisymmetric for self-dual `M`.
    pub fn times_z_inverse(&self) -> Result<AntisymmetricMatrix<T>> {
        let n2 = 2 * self.n_blocks;
        let mut data = vec![T::zero(); n2 * n2];
        for i in 0..self.n_blocks {
            for j in 0..self.n_blocks {
                let [[a, b], [c, d]] = self.block(i, j);
                let out = [[-b, a], [-d, c]];
                for r in 0..2 {
                    for s in 0..2 {
                        data[(2 * i + r) * n2 + 2 * j + s] = out[r][s];
                    }
                }
            }
        }
        AntisymmetricMatrix::from_dense(n2, data, ANTISYMMETRY_TOL)
    }
}

/// Quaternion determinant `QDet[M] = Pf[M Z^{-1}]`.
pub fn qdet<T: Scalar>(m: &QuaternionBlockMatrix<T>) -> Result<T> {
    Ok(pfaffian(&m.times_z_inverse()?))
}
