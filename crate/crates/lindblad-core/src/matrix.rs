//! Dense complex matrix primitives and the vectorization convention used by
//! every other module.
//!
//! Matrices are `ndarray::Array2<Complex64>` throughout. Vectorization is
//! column-stacking, `vec(x)[j*d + i] = x[i, j]`, so that
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)` and the superoperator of `ρ ↦ h ρ h†`
//! is `conj(h) ⊗ h`.

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eig, Eigh, Inverse, SVD, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{LindbladError, Result};

pub type CMatrix = Array2<C64>;
pub type CVector = Array1<C64>;

/// Relative kernel tolerance: singular values below `tol * sigma_max` count
/// as zero. Superoperators here are at most 256x256 with O(1) entries, so
/// 1e-10 cleanly separates true kernels from perturbation-split eigenvalues.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-10;

pub fn identity(dim: usize) -> CMatrix {
    Array2::eye(dim).mapv(|x: f64| C64::new(x, 0.0))
}

/// Conjugate transpose.
pub fn dagger(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diag().sum()
}

/// Frobenius (Hilbert-Schmidt) norm.
pub fn fro_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    let (_, s, _) = m.svd(false, false)?;
    Ok(s.iter().cloned().fold(0.0, f64::max))
}

/// Hilbert-Schmidt inner product `Tr(a† b)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Outer product `|u><v|`.
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    Array2::from_shape_fn((u.len(), v.len()), |(i, j)| u[i] * v[j].conj())
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    fro_norm(&(m - &dagger(m))) <= tol
}

/// Hermitian, positive semidefinite within `-tol`, and trace within `tol`
/// of one.
pub fn is_density(m: &CMatrix, tol: f64) -> bool {
    if !is_hermitian(m, tol) {
        return false;
    }
    if (trace(m) - C64::new(1.0, 0.0)).norm() > tol {
        return false;
    }
    match eigh(m) {
        Ok((vals, _)) => vals.iter().all(|&v| v >= -tol),
        Err(_) => false,
    }
}

/// Kronecker product; entry `((i1,i2),(j1,j2)) = a[i1,j1] * b[i2,j2]` with
/// the first factor major.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i1 in 0..ra {
        for j1 in 0..ca {
            let aij = a[[i1, j1]];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for i2 in 0..rb {
                for j2 in 0..cb {
                    out[[i1 * rb + i2, j1 * cb + j2]] = aij * b[[i2, j2]];
                }
            }
        }
    }
    out
}

/// Column-stacking vectorization: `v[j*d + i] = x[i, j]`.
pub fn vectorize(x: &CMatrix) -> CVector {
    let d = x.nrows();
    Array1::from_shape_fn(d * d, |k| x[[k % d, k / d]])
}

/// Inverse of [`vectorize`]; fails unless `v.len() == dim * dim`.
pub fn devectorize(v: &CVector, dim: usize) -> Result<CMatrix> {
    if v.len() != dim * dim {
        return Err(LindbladError::DimensionMismatch {
            expected: dim * dim,
            actual: v.len(),
        });
    }
    Ok(Array2::from_shape_fn((dim, dim), |(i, j)| v[j * dim + i]))
}

/// Bipartite factorization d = d1 * d2 with the first factor major:
/// composite index `(a, b) -> a * d2 + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BipartiteDims {
    pub d1: usize,
    pub d2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    One,
    Two,
}

impl BipartiteDims {
    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(LindbladError::Validation(
                "bipartite factors must be positive".into(),
            ));
        }
        Ok(Self { d1, d2 })
    }

    pub fn total(&self) -> usize {
        self.d1 * self.d2
    }

    fn check(&self, dim: usize) -> Result<()> {
        if self.total() != dim {
            return Err(LindbladError::DimensionMismatch {
                expected: self.total(),
                actual: dim,
            });
        }
        Ok(())
    }
}

/// Transpose the indices of one tensor factor.
pub fn partial_transpose(x: &CMatrix, dims: BipartiteDims, party: Party) -> Result<CMatrix> {
    dims.check(x.nrows())?;
    let (d1, d2) = (dims.d1, dims.d2);
    let mut out = Array2::zeros(x.raw_dim());
    for a in 0..d1 {
        for b in 0..d2 {
            for c in 0..d1 {
                for d in 0..d2 {
                    let (r, s) = match party {
                        // |a b><c d|  ->  |c b><a d|
                        Party::One => (c * d2 + b, a * d2 + d),
                        // |a b><c d|  ->  |a d><c b|
                        Party::Two => (a * d2 + d, c * d2 + b),
                    };
                    out[[r, s]] = x[[a * d2 + b, c * d2 + d]];
                }
            }
        }
    }
    Ok(out)
}

/// Trace out one tensor factor.
pub fn partial_trace(x: &CMatrix, dims: BipartiteDims, party: Party) -> Result<CMatrix> {
    dims.check(x.nrows())?;
    let (d1, d2) = (dims.d1, dims.d2);
    match party {
        Party::Two => {
            let mut out = Array2::zeros((d1, d1));
            for a in 0..d1 {
                for c in 0..d1 {
                    for b in 0..d2 {
                        out[[a, c]] += x[[a * d2 + b, c * d2 + b]];
                    }
                }
            }
            Ok(out)
        }
        Party::One => {
            let mut out = Array2::zeros((d2, d2));
            for b in 0..d2 {
                for d in 0..d2 {
                    for a in 0..d1 {
                        out[[b, d]] += x[[a * d2 + b, a * d2 + d]];
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Orthonormal basis of the right null space: right singular vectors whose
/// singular values are at most `tol * sigma_max`. Empty result allowed.
pub fn null_space(m: &CMatrix, tol: f64) -> Result<Vec<CVector>> {
    let n = m.ncols();
    let (_, s, vt) = m.svd(false, true)?;
    let vt = vt.expect("requested V^H");
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let threshold = tol * smax;
    let mut basis = Vec::new();
    for k in 0..n {
        let sv = if k < s.len() { s[k] } else { 0.0 };
        if sv <= threshold {
            // row k of V^H, conjugated, is the k-th right singular vector
            basis.push(vt.row(k).mapv(|z| z.conj()));
        }
    }
    Ok(basis)
}

/// Right null space of the adjoint, i.e. the left null space of `m`.
pub fn left_null_space(m: &CMatrix, tol: f64) -> Result<Vec<CVector>> {
    null_space(&dagger(m), tol)
}

/// Eigendecomposition of a Hermitian matrix (ascending real eigenvalues,
/// eigenvectors in columns).
///
/// The backend hands the row-major buffer to LAPACK column-major, so it
/// diagonalizes the transpose; for Hermitian input that conjugates the
/// eigenvectors, which is undone here.
pub fn eigh(m: &CMatrix) -> Result<(Array1<f64>, CMatrix)> {
    let (vals, vecs) = m.eigh(UPLO::Lower)?;
    Ok((vals, vecs.mapv(|z| z.conj())))
}

/// Full eigendecomposition of a general complex matrix.
pub fn eig(m: &CMatrix) -> Result<(CVector, CMatrix)> {
    let (vals, vecs) = m.eig()?;
    Ok((vals, vecs))
}

/// Split a Hermitian matrix into positive and negative parts,
/// `m = pos - neg` with `pos, neg >= 0` and `pos * neg = 0`.
pub fn split_positive_negative(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let d = m.nrows();
    let (vals, vecs) = eigh(m)?;
    let clip = 1e-12 * vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut pos = Array2::zeros((d, d));
    let mut neg = Array2::zeros((d, d));
    for (k, &lam) in vals.iter().enumerate() {
        if lam.abs() <= clip {
            continue;
        }
        let v = vecs.column(k);
        let proj = Array2::from_shape_fn((d, d), |(i, j)| v[i] * v[j].conj());
        if lam > 0.0 {
            pos = pos + proj.mapv(|z| z * lam);
        } else {
            neg = neg + proj.mapv(|z| z * (-lam));
        }
    }
    Ok((pos, neg))
}

/// Projector onto the support (range) of a positive semidefinite matrix,
/// keeping eigenvalues above `rel_tol * lambda_max`.
pub fn support_projector(m: &CMatrix, rel_tol: f64) -> Result<CMatrix> {
    let d = m.nrows();
    let (vals, vecs) = eigh(m)?;
    let lmax = vals.iter().cloned().fold(0.0, f64::max);
    let mut proj = Array2::zeros((d, d));
    for (k, &lam) in vals.iter().enumerate() {
        if lam > rel_tol * lmax && lam > 0.0 {
            let v = vecs.column(k);
            for i in 0..d {
                for j in 0..d {
                    proj[[i, j]] += v[i] * v[j].conj();
                }
            }
        }
    }
    Ok(proj)
}

// Pade coefficients and 1-norm thresholds from the scaling-and-squaring
// method (Higham 2005).
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn opnorm_one(m: &CMatrix) -> f64 {
    let mut best = 0.0;
    for j in 0..m.ncols() {
        let col: f64 = m.index_axis(Axis(1), j).iter().map(|z| z.norm()).sum();
        if col > best {
            best = col;
        }
    }
    best
}

fn pade_uv(a: &CMatrix, b: &[f64]) -> (CMatrix, CMatrix) {
    // b has odd length 2m+2 for the order-(2m+1) approximant
    let d = a.nrows();
    let a2 = a.dot(a);
    let mut even = identity(d).mapv(|z| z * b[0]);
    let mut odd = identity(d).mapv(|z| z * b[1]);
    let mut pow = identity(d);
    let mut k = 2;
    while k < b.len() {
        pow = pow.dot(&a2);
        even = even + pow.mapv(|z| z * b[k]);
        if k + 1 < b.len() {
            odd = odd + pow.mapv(|z| z * b[k + 1]);
        }
        k += 2;
    }
    (a.dot(&odd), even)
}

/// Matrix exponential by scaling and squaring with a Pade core.
pub fn expm(m: &CMatrix) -> Result<CMatrix> {
    let norm = opnorm_one(m);
    let (u, v, squarings) = if norm < 1.495_585_217_958_292e-2 {
        let (u, v) = pade_uv(m, &PADE3);
        (u, v, 0u32)
    } else if norm < 2.539_398_330_063_23e-1 {
        let (u, v) = pade_uv(m, &PADE5);
        (u, v, 0)
    } else if norm < 9.504_178_996_162_932e-1 {
        let (u, v) = pade_uv(m, &PADE7);
        (u, v, 0)
    } else if norm < 2.097_847_961_257_068 {
        let (u, v) = pade_uv(m, &PADE9);
        (u, v, 0)
    } else {
        const MAX_NORM: f64 = 5.371_920_351_148_152;
        let squarings = ((norm / MAX_NORM).log2().ceil() as i32).max(0) as u32;
        let scaled = m.mapv(|z| z * 2f64.powi(-(squarings as i32)));
        let (u, v) = pade_uv(&scaled, &PADE13);
        (u, v, squarings)
    };
    // Pade approximant is (V + U) / (V - U)
    let denom = (&v - &u).inv()?;
    let mut result = denom.dot(&(&v + &u));
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    Ok(result)
}
