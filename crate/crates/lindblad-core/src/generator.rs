//! Lindblad generators: `L[ρ] = -i[H, ρ] + Σ_α (h_α ρ h_α† - ½{h_α† h_α, ρ})`
//! represented as explicit d²×d² superoperator matrices acting on vectorized
//! states, together with the dual (Heisenberg) generator and time evolution.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{LindbladError, Result};
use crate::matrix::{
    dagger, devectorize, expm, fro_norm, identity, kron, vectorize, CMatrix,
};

/// Hamiltonians must be Hermitian within this tolerance; silent
/// symmetrization would mask user input mistakes.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// A generator in Lindblad form: a Hamiltonian plus a list of jump
/// operators. Jump operators are arbitrary complex matrices; no
/// normalization is imposed.
#[derive(Debug, Clone)]
pub struct LindbladSpec {
    pub dim: usize,
    pub hamiltonian: CMatrix,
    pub jumps: Vec<CMatrix>,
    pub label: String,
}

impl LindbladSpec {
    pub fn new(hamiltonian: CMatrix, jumps: Vec<CMatrix>, label: impl Into<String>) -> Result<Self> {
        let dim = hamiltonian.nrows();
        if dim == 0 || hamiltonian.ncols() != dim {
            return Err(LindbladError::Validation(
                "Hamiltonian must be square and non-empty".into(),
            ));
        }
        let deviation = fro_norm(&(&hamiltonian - &dagger(&hamiltonian)));
        if deviation > HERMITICITY_TOL {
            return Err(LindbladError::NotHermitian {
                deviation,
                tol: HERMITICITY_TOL,
            });
        }
        for j in &jumps {
            if j.nrows() != dim || j.ncols() != dim {
                return Err(LindbladError::DimensionMismatch {
                    expected: dim,
                    actual: j.nrows(),
                });
            }
        }
        Ok(Self {
            dim,
            hamiltonian,
            jumps,
            label: label.into(),
        })
    }

    /// Generator with `H = 0` and no jumps.
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            hamiltonian: Array2::zeros((dim, dim)),
            jumps: Vec::new(),
            label: "zero".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuperopKind {
    Generator,
    Projector,
    Inverse,
    Propagator,
}

/// A linear map on d×d matrices stored as its d²×d² matrix in the
/// column-stacking convention. Application is
/// `devectorize(matrix · vectorize(x))`.
#[derive(Debug, Clone)]
pub struct Superop {
    pub dim: usize,
    pub matrix: CMatrix,
    pub kind: SuperopKind,
}

impl Superop {
    pub fn new(dim: usize, matrix: CMatrix, kind: SuperopKind) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(LindbladError::DimensionMismatch {
                expected: dim * dim,
                actual: matrix.nrows(),
            });
        }
        Ok(Self { dim, matrix, kind })
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        devectorize(&self.matrix.dot(&vectorize(x)), self.dim)
            .expect("superoperator shape is validated on construction")
    }

    pub fn zero(dim: usize, kind: SuperopKind) -> Self {
        Self {
            dim,
            matrix: Array2::zeros((dim * dim, dim * dim)),
            kind,
        }
    }

    pub fn identity(dim: usize, kind: SuperopKind) -> Self {
        Self {
            dim,
            matrix: identity(dim * dim),
            kind,
        }
    }
}

/// Superoperator matrix of `x ↦ a x b`, i.e. `bᵀ ⊗ a`.
fn sandwich(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let bt = b.t().to_owned();
    kron(&bt, a)
}

/// Build the Schroedinger-picture generator
/// `L[ρ] = -i[H, ρ] + Σ_α (h_α ρ h_α† - ½{h_α† h_α, ρ})`.
pub fn build_generator(spec: &LindbladSpec) -> Superop {
    let d = spec.dim;
    let id = identity(d);
    let i = C64::new(0.0, 1.0);

    // -i (H ρ - ρ H)
    let mut m = (sandwich(&spec.hamiltonian, &id) - sandwich(&id, &spec.hamiltonian)).mapv(|z| z * (-i));
    for h in &spec.jumps {
        let hd = dagger(h);
        let hdh = hd.dot(h);
        // h ρ h†
        m = m + sandwich(h, &hd);
        // -½ (h†h ρ + ρ h†h)
        m = m - (sandwich(&hdh, &id) + sandwich(&id, &hdh)).mapv(|z| z * 0.5);
    }
    Superop {
        dim: d,
        matrix: m,
        kind: SuperopKind::Generator,
    }
}

/// Build the dual (Heisenberg-picture) generator
/// `L^T[X] = +i[H, X] + Σ_α (h_α† X h_α - ½{h_α† h_α, X})`,
/// defined by `Tr(L^T[X] ρ) = Tr(X L[ρ])`.
pub fn build_dual(spec: &LindbladSpec) -> Superop {
    let d = spec.dim;
    let id = identity(d);
    let i = C64::new(0.0, 1.0);

    let mut m = (sandwich(&spec.hamiltonian, &id) - sandwich(&id, &spec.hamiltonian)).mapv(|z| z * i);
    for h in &spec.jumps {
        let hd = dagger(h);
        let hdh = hd.dot(h);
        // h† X h
        m = m + sandwich(&hd, h);
        m = m - (sandwich(&hdh, &id) + sandwich(&id, &hdh)).mapv(|z| z * 0.5);
    }
    Superop {
        dim: d,
        matrix: m,
        kind: SuperopKind::Generator,
    }
}

/// `L_ε = L₀ + ε L₁`.
pub fn combine(l0: &Superop, l1: &Superop, epsilon: f64) -> Result<Superop> {
    if l0.dim != l1.dim {
        return Err(LindbladError::DimensionMismatch {
            expected: l0.dim,
            actual: l1.dim,
        });
    }
    Ok(Superop {
        dim: l0.dim,
        matrix: &l0.matrix + &l1.matrix.mapv(|z| z * epsilon),
        kind: SuperopKind::Generator,
    })
}

/// Evolve a state: `ρ_t = exp(t L)[ρ]`.
pub fn evolve(l: &Superop, rho: &CMatrix, t: f64) -> Result<CMatrix> {
    if rho.nrows() != l.dim || rho.ncols() != l.dim {
        return Err(LindbladError::DimensionMismatch {
            expected: l.dim,
            actual: rho.nrows(),
        });
    }
    if t < 0.0 {
        return Err(LindbladError::Validation("evolution time must be >= 0".into()));
    }
    let prop = expm(&l.matrix.mapv(|z| z * t))?;
    devectorize(&prop.dot(&vectorize(rho)), l.dim)
}

/// The bilinear-trace dual of a superoperator matrix: if `M` represents a
/// map w.r.t. column-stacking, `S Mᵀ S` (with `S` the transpose swap)
/// represents the map `X ↦ M^T[X]` with `Tr(M^T[X] ρ) = Tr(X M[ρ])`.
pub fn bilinear_dual_matrix(m: &CMatrix, dim: usize) -> CMatrix {
    let n = dim * dim;
    let mut out = Array2::zeros((n, n));
    // S has entries S[(i + j d), (j + i d)] = 1; conjugating by S permutes
    // row/column indices (i, j) -> (j, i).
    for r in 0..n {
        let (ri, rj) = (r % dim, r / dim);
        let rs = rj + ri * dim;
        for c in 0..n {
            let (ci, cj) = (c % dim, c / dim);
            let cs = cj + ci * dim;
            out[[r, c]] = m[[cs, rs]];
        }
    }
    out
}
