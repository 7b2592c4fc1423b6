//! Order-by-order expansion of the stationary state of `L₀ + ε L₁`.
//!
//! Two engines share the recursion `L₀[ρ_n] = -L₁[ρ_{n-1}]`:
//!
//! * the unique branch, valid when `ker L₀` is one-dimensional, where the
//!   obstruction `G₀ L₁[ρ_{n-1}]` vanishes by the trace argument and
//!   `ρ_n = (-1)ⁿ (L₀⁻¹ L₁)ⁿ [ρ₀]`;
//! * the degenerate branch, where each raw term is repaired by a kernel
//!   correction `σ_n = -L̂₁⁻¹[G₀ L₁[ρ_n]]` solved on the traceless subspace
//!   of `ker L₀`, with `L̂₁ = G₀ L₁ G₀` the reduced generator.
//!
//! All corrected coefficients are traceless beyond order zero, so the
//! assembled state keeps trace one without renormalization.

use ndarray::{Array1, Array2};
use ndarray_linalg::{LeastSquaresSvd, SVD};
use num_complex::Complex64 as C64;

use crate::asymptotics::{constrained_inverse, AveragingData};
use crate::error::{LindbladError, Result};
use crate::generator::{Superop, SuperopKind};
use crate::matrix::{
    dagger, eigh, expm, fro_norm, hs_inner, null_space, trace, vec_norm, CMatrix, CVector,
};

/// Obstruction norms below this (relative to the term size) are treated as
/// zero and need no kernel correction.
pub const OBSTRUCTION_TOL: f64 = 1e-10;
/// Residual threshold for the σ-solve and the per-order recursion check.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Pre-symmetrization Hermiticity drift allowed per order.
const HERMITICITY_DRIFT_TOL: f64 = 1e-10;

/// The perturbation compressed onto the unperturbed kernel:
/// `L̂₁ = G₀ ∘ L₁ ∘ G₀`, together with its matrix in the kernel-basis
/// coordinates and its kernel state (when one exists).
#[derive(Debug, Clone)]
pub struct ReducedGenerator {
    pub lhat: Superop,
    /// `L̂₁` restricted to `ker L₀`, in the coordinates of
    /// `avg.kernel_basis` (Hilbert-Schmidt orthonormal).
    pub restricted_matrix: CMatrix,
    /// Stationary density matrices of `L̂₁` inside `ker L₀`.
    pub kernel_states: Vec<CMatrix>,
    /// Whether the restricted map is invertible on the traceless subspace
    /// of `ker L₀`.
    pub invertible_on_traceless: bool,
    traceless_basis: CMatrix,
}

/// Build the reduced generator for a kernel described by `l0avg`.
pub fn reduced_generator(l0avg: &AveragingData, l1: &Superop) -> Result<ReducedGenerator> {
    let d = l1.dim;
    let g = &l0avg.g.matrix;
    let lhat_mat = g.dot(&l1.matrix).dot(g);
    let lhat = Superop::new(d, lhat_mat, SuperopKind::Generator)?;

    let basis = &l0avg.kernel_basis;
    let k = basis.len();
    let mut restricted: CMatrix = Array2::zeros((k, k));
    for (b, kb) in basis.iter().enumerate() {
        let image = lhat.apply(kb);
        for (a, ka) in basis.iter().enumerate() {
            restricted[[a, b]] = hs_inner(ka, &image);
        }
    }

    // coordinates of the trace functional: Tr(Σ c_a K_a) = t·c
    let traces: CVector = Array1::from_shape_fn(k, |a| trace(&basis[a]));
    let traceless_basis = orthocomplement_basis(&traces);

    let kernel_states = reduced_kernel_states(&restricted, basis)?;

    let invertible_on_traceless = if traceless_basis.ncols() == 0 {
        false
    } else {
        let rn = restricted.dot(&traceless_basis);
        let (_, sv, _) = rn.svd(false, false)?;
        let smax_full = {
            let (_, s_full, _) = restricted.svd(false, false)?;
            s_full.iter().cloned().fold(0.0, f64::max)
        };
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        smin > 1e-10 * smax_full.max(1e-300)
    };

    Ok(ReducedGenerator {
        lhat,
        restricted_matrix: restricted,
        kernel_states,
        invertible_on_traceless,
        traceless_basis,
    })
}

/// Orthonormal basis (as columns) of the orthogonal complement of a single
/// vector; empty matrix when the vector vanishes and the complement is the
/// whole space minus nothing meaningful.
fn orthocomplement_basis(t: &CVector) -> CMatrix {
    let k = t.len();
    let tnorm = vec_norm(t);
    if tnorm < 1e-14 {
        // trace functional vanishes on the kernel span: everything is
        // traceless
        return crate::matrix::identity(k);
    }
    // Solve {c : t·c = 0} -> null space of the 1×k row conj(t)ᵀ... the
    // condition Tr(Σ c_a K_a) = Σ c_a t_a = 0 is a single linear form.
    let row = Array2::from_shape_fn((1, k), |(_, j)| t[j]);
    let basis = null_space(&row, 1e-12).expect("1 x k SVD cannot fail");
    let mut out = Array2::zeros((k, basis.len()));
    for (j, v) in basis.iter().enumerate() {
        for i in 0..k {
            out[[i, j]] = v[i];
        }
    }
    out
}

/// Stationary states of the restricted map: Hermitian, positive,
/// unit-trace elements of its kernel. Only the one-dimensional kernel case
/// yields a certified unique state.
fn reduced_kernel_states(restricted: &CMatrix, basis: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let kernel = null_space(restricted, 1e-9)?;
    if kernel.len() != 1 {
        return Ok(Vec::new());
    }
    let c0 = &kernel[0];
    let d = basis[0].nrows();
    let mut x: CMatrix = Array2::zeros((d, d));
    for (a, ka) in basis.iter().enumerate() {
        x = x + ka.mapv(|z| z * c0[a]);
    }
    // the kernel is dagger-closed, so a one-dimensional kernel element is
    // Hermitian up to a global phase; pick the Hermitian representative
    let xd = dagger(&x);
    let herm = (&x + &xd).mapv(|z| z * 0.5);
    let anti = (&x - &xd).mapv(|z| z * C64::new(0.0, -0.5));
    let x = if fro_norm(&herm) >= fro_norm(&anti) {
        herm
    } else {
        anti
    };
    let t = trace(&x).re;
    if t.abs() < 1e-10 {
        return Ok(Vec::new());
    }
    let candidate = x.mapv(|z| z / t);
    let (vals, _) = eigh(&candidate)?;
    if vals.iter().any(|&v| v < -1e-8) {
        return Ok(Vec::new());
    }
    Ok(vec![candidate])
}

/// Per-order record: recursion residual, obstruction norm before the
/// σ-correction, and the size of the corrected term.
#[derive(Debug, Clone)]
pub struct OrderDiagnostics {
    pub order: usize,
    pub residual: f64,
    pub obstruction_before: f64,
    pub term_norm: f64,
}

#[derive(Debug, Clone)]
pub struct PerturbationResult {
    pub order: usize,
    /// Corrected coefficients `ρ̃₀ ... ρ̃_N`.
    pub coefficients: Vec<CMatrix>,
    /// Kernel corrections applied per order (zero matrices where skipped).
    pub sigmas: Vec<CMatrix>,
    pub epsilon: f64,
    /// `Σ εⁿ ρ̃_n`.
    pub assembled: CMatrix,
    pub diagnostics: Vec<OrderDiagnostics>,
    pub divergence: bool,
}

/// Expansion around the unique stationary state of `L₀`; every obstruction
/// must vanish (checked, not assumed).
pub fn expand_unique(
    l0: &Superop,
    l0avg: &AveragingData,
    l1: &Superop,
    order: usize,
    epsilon: f64,
) -> Result<PerturbationResult> {
    if l0avg.stationary_states.len() != 1 {
        return Err(LindbladError::Validation(format!(
            "unique branch needs exactly one stationary state, found {}",
            l0avg.stationary_states.len()
        )));
    }
    let seed = l0avg.stationary_states[0].clone();
    expand_inner(l0, l0avg, l1, None, seed, order, epsilon)
}

/// Expansion with a degenerate unperturbed kernel; the seed is the unique
/// kernel state of the reduced generator `L̂₁`.
pub fn expand_degenerate(
    l0: &Superop,
    l0avg: &AveragingData,
    l1: &Superop,
    order: usize,
    epsilon: f64,
) -> Result<PerturbationResult> {
    let rg = reduced_generator(l0avg, l1)?;
    if rg.kernel_states.len() != 1 {
        return Err(LindbladError::Unsupported(format!(
            "degenerate branch needs a unique reduced kernel state, found {}",
            rg.kernel_states.len()
        )));
    }
    let seed = rg.kernel_states[0].clone();
    expand_inner(l0, l0avg, l1, Some(&rg), seed, order, epsilon)
}

/// Degenerate-branch engine with a caller-supplied zeroth order, for
/// kernels where the reduced generator annihilates everything and the seed
/// is a free choice.
pub fn expand_with_seed(
    l0: &Superop,
    l0avg: &AveragingData,
    l1: &Superop,
    rg: &ReducedGenerator,
    seed: CMatrix,
    order: usize,
    epsilon: f64,
) -> Result<PerturbationResult> {
    expand_inner(l0, l0avg, l1, Some(rg), seed, order, epsilon)
}

fn expand_inner(
    l0: &Superop,
    l0avg: &AveragingData,
    l1: &Superop,
    rg: Option<&ReducedGenerator>,
    seed: CMatrix,
    order: usize,
    epsilon: f64,
) -> Result<PerturbationResult> {
    let d = l0.dim;
    let seed_trace = trace(&seed);
    if (seed_trace - C64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(LindbladError::Validation(
            "zeroth-order seed must have unit trace".into(),
        ));
    }

    let mut coefficients = vec![seed];
    let mut sigmas = vec![Array2::zeros((d, d))];
    let mut diagnostics = vec![OrderDiagnostics {
        order: 0,
        residual: fro_norm(&l0.apply(&coefficients[0])),
        obstruction_before: 0.0,
        term_norm: fro_norm(&coefficients[0]),
    }];

    for n in 1..=order {
        let prev = &coefficients[n - 1];
        let y = l1.apply(prev);
        let ynorm = fro_norm(&y);

        // solvability: the right-hand side must be clear of ker L₀
        let blocking = fro_norm(&l0avg.g.apply(&y));
        if blocking > OBSTRUCTION_TOL * ynorm.max(1.0) * 10.0 {
            return Err(LindbladError::HigherOrderDegeneracy {
                order: n,
                obstruction: blocking,
                residual: f64::NAN,
            });
        }

        let raw = constrained_inverse(l0, l0avg, &y)?.mapv(|z| -z);

        // obstruction for the *next* order, removed by a kernel correction
        let next_rhs = l1.apply(&raw);
        let obstruction = l0avg.g.apply(&next_rhs);
        let obstruction_norm = fro_norm(&obstruction);
        let needs_sigma = obstruction_norm > OBSTRUCTION_TOL * fro_norm(&next_rhs).max(1.0);

        let sigma = if !needs_sigma {
            Array2::zeros((d, d))
        } else {
            match rg {
                None => {
                    // unique branch: the trace argument makes obstructions
                    // vanish identically; a large one means the kernel
                    // drifted numerically
                    return Err(LindbladError::DegenerateKernel(format!(
                        "obstruction {obstruction_norm:e} at order {n} in the unique branch"
                    )));
                }
                Some(rg) => solve_sigma(rg, l0avg, &obstruction, n)?,
            }
        };

        let mut term = raw + sigma.clone();

        // symmetrize; the drift must stay at roundoff level
        let drift = fro_norm(&(&term - &dagger(&term)));
        let scale = fro_norm(&term).max(1.0);
        if drift > HERMITICITY_DRIFT_TOL * scale * 10.0 {
            return Err(LindbladError::DegenerateKernel(format!(
                "series term {n} lost Hermiticity by {drift:e}"
            )));
        }
        term = (&term + &dagger(&term)).mapv(|z| z * 0.5);

        let residual = fro_norm(&(&l0.apply(&term) + &y));
        if residual > RESIDUAL_TOL * ynorm.max(1.0) {
            return Err(LindbladError::DegenerateKernel(format!(
                "recursion residual {residual:e} at order {n}"
            )));
        }

        diagnostics.push(OrderDiagnostics {
            order: n,
            residual,
            obstruction_before: obstruction_norm,
            term_norm: fro_norm(&term),
        });
        sigmas.push(sigma);
        coefficients.push(term);
    }

    let mut assembled: CMatrix = Array2::zeros((d, d));
    let mut eps_pow = 1.0;
    for coeff in &coefficients {
        assembled = assembled + coeff.mapv(|z| z * eps_pow);
        eps_pow *= epsilon;
    }

    let divergence = divergence_flag(&diagnostics, epsilon);

    Ok(PerturbationResult {
        order,
        coefficients,
        sigmas,
        epsilon,
        assembled,
        diagnostics,
        divergence,
    })
}

/// Solve `L̂₁[σ] = -obstruction` on the traceless subspace of `ker L₀`.
fn solve_sigma(
    rg: &ReducedGenerator,
    l0avg: &AveragingData,
    obstruction: &CMatrix,
    order: usize,
) -> Result<CMatrix> {
    let basis = &l0avg.kernel_basis;
    let k = basis.len();
    let obstruction_norm = fro_norm(obstruction);

    // coordinates of the obstruction in the kernel basis
    let rhs: CVector = Array1::from_shape_fn(k, |a| -hs_inner(&basis[a], obstruction));

    let rn = rg.restricted_matrix.dot(&rg.traceless_basis);
    if rn.ncols() == 0 {
        return Err(LindbladError::HigherOrderDegeneracy {
            order,
            obstruction: obstruction_norm,
            residual: vec_norm(&rhs),
        });
    }
    let sol = rn.least_squares(&rhs)?;
    let residual = vec_norm(&(&rn.dot(&sol.solution) - &rhs));
    if residual > RESIDUAL_TOL * obstruction_norm.max(1.0) {
        return Err(LindbladError::HigherOrderDegeneracy {
            order,
            obstruction: obstruction_norm,
            residual,
        });
    }
    let coords = rg.traceless_basis.dot(&sol.solution);
    let d = basis[0].nrows();
    let mut sigma: CMatrix = Array2::zeros((d, d));
    for (a, ka) in basis.iter().enumerate() {
        sigma = sigma + ka.mapv(|z| z * coords[a]);
    }
    Ok(sigma)
}

/// Three consecutive growth ratios above one flag a divergent evaluation.
fn divergence_flag(diagnostics: &[OrderDiagnostics], epsilon: f64) -> bool {
    let weighted: Vec<f64> = diagnostics
        .iter()
        .map(|rec| rec.term_norm * epsilon.powi(rec.order as i32))
        .collect();
    let mut consecutive = 0;
    for w in weighted.windows(2) {
        if w[0] > 1e-300 && w[1] / w[0] > 1.0 {
            consecutive += 1;
            if consecutive >= 3 {
                return true;
            }
        } else {
            consecutive = 0;
        }
    }
    false
}

/// Weighted term norms `||ρ_n|| εⁿ`, their ratios, and the divergence flag.
#[derive(Debug, Clone)]
pub struct SeriesReport {
    pub weighted_norms: Vec<f64>,
    pub ratios: Vec<f64>,
    pub divergence: bool,
}

pub fn series_diagnostics(result: &PerturbationResult) -> SeriesReport {
    let weighted_norms: Vec<f64> = result
        .diagnostics
        .iter()
        .map(|rec| rec.term_norm * result.epsilon.powi(rec.order as i32))
        .collect();
    let ratios = weighted_norms
        .windows(2)
        .map(|w| if w[0] > 1e-300 { w[1] / w[0] } else { 0.0 })
        .collect();
    SeriesReport {
        weighted_norms,
        ratios,
        divergence: result.divergence,
    }
}

/// Compare the assembled state against the directly computed kernel of
/// `L_ε`; the direct kernel must be one-dimensional. Returns the Frobenius
/// distance after trace normalization (which also fixes the phase).
pub fn validate_against_direct(result: &PerturbationResult, l_eps: &Superop) -> Result<f64> {
    let d = l_eps.dim;
    let kernel = null_space(&l_eps.matrix, crate::matrix::DEFAULT_KERNEL_TOL)?;
    if kernel.len() != 1 {
        return Err(LindbladError::Validation(format!(
            "direct validation needs a one-dimensional perturbed kernel, found {}",
            kernel.len()
        )));
    }
    let x = crate::matrix::devectorize(&kernel[0], d)?;
    let t = trace(&x);
    if t.norm() < 1e-10 {
        return Err(LindbladError::DegenerateKernel(
            "direct kernel vector is traceless; cannot normalize to a state".into(),
        ));
    }
    let direct = x.mapv(|z| z / t);
    let direct = (&direct + &dagger(&direct)).mapv(|z| z * 0.5);
    Ok(fro_norm(&(&result.assembled - &direct)))
}

/// Positivity report for the reduced dissipator flow on the diagonal
/// (kernel) coordinates of an Example-1-form `L₀`.
#[derive(Debug, Clone)]
pub struct DhatPositivityReport {
    /// Worst (most negative) population entry over the time grid.
    pub min_entry: f64,
    /// Largest trace drift over the grid.
    pub max_trace_drift: f64,
    /// Worst violation of `dp_j/dt >= -h p_j` (positive = violation).
    pub worst_rate_violation: f64,
    /// The decay-rate bound used.
    pub rate_bound: f64,
    pub passed: bool,
}

/// Check that `exp(t L̂₁)` preserves positivity and trace on diagonal
/// densities, and that populations obey the exponential lower bound
/// `dp_j/dt >= -h p_j`.
///
/// Valid when `ker L₀` is spanned by the eigenprojectors of a
/// non-degenerate Hamiltonian, so kernel coordinates are populations.
pub fn dhat_positivity_check(
    rg: &ReducedGenerator,
    l0avg: &AveragingData,
    l1spec: &crate::generator::LindbladSpec,
    t_grid: &[f64],
) -> Result<DhatPositivityReport> {
    let basis = &l0avg.kernel_basis;
    let d = l1spec.dim;
    if basis.len() != d {
        return Err(LindbladError::Unsupported(
            "population flow check needs a kernel spanned by d diagonal projectors".into(),
        ));
    }
    // verify the kernel basis is diagonal and recover the population map
    for kb in basis {
        for i in 0..d {
            for j in 0..d {
                if i != j && kb[[i, j]].norm() > 1e-10 {
                    return Err(LindbladError::Unsupported(
                        "kernel basis is not diagonal; the restricted flow is not a \
                         population dynamics"
                            .into(),
                    ));
                }
            }
        }
    }

    // restricted matrix in population coordinates, M[j][i] = <j|L̂₁[|i><i|]|j>,
    // obtained from the kernel-coordinate form by the basis change
    let k = basis.len();
    let mut m: CMatrix = Array2::zeros((d, d));
    for i in 0..d {
        let mut unit: CMatrix = Array2::zeros((d, d));
        unit[[i, i]] = C64::new(1.0, 0.0);
        let ci: CVector = Array1::from_shape_fn(k, |a| hs_inner(&basis[a], &unit));
        let rc = rg.restricted_matrix.dot(&ci);
        for j in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..k {
                acc += rc[a] * basis[a][[j, j]];
            }
            m[[j, i]] = acc;
        }
    }

    // decay-rate bound from ||Σ h†h||
    let mut total: CMatrix = Array2::zeros((d, d));
    for h in &l1spec.jumps {
        total = total + dagger(h).dot(h);
    }
    let s = crate::matrix::spectral_norm(&total)?;
    let rate_bound = s.max(s * s);

    let mut min_entry = f64::INFINITY;
    let mut max_trace_drift: f64 = 0.0;
    let mut worst_rate_violation = f64::NEG_INFINITY;

    // a deterministic battery of initial populations
    let mut initials: Vec<Array1<f64>> = Vec::new();
    initials.push(Array1::from_elem(d, 1.0 / d as f64));
    for j in 0..d {
        let mut p = Array1::zeros(d);
        p[j] = 1.0;
        initials.push(p);
    }

    for p0 in &initials {
        let p0c: CVector = p0.mapv(|x| C64::new(x, 0.0));
        for &t in t_grid {
            if t < 0.0 {
                return Err(LindbladError::Validation("time grid must be >= 0".into()));
            }
            let flow = expm(&m.mapv(|z| z * t))?;
            let pt = flow.dot(&p0c);
            let tr: f64 = pt.iter().map(|z| z.re).sum();
            max_trace_drift = max_trace_drift.max((tr - 1.0).abs());
            for j in 0..d {
                min_entry = min_entry.min(pt[j].re);
            }
            // differential bound at this point of the flow
            let dpt = m.dot(&pt);
            for j in 0..d {
                worst_rate_violation =
                    worst_rate_violation.max(-dpt[j].re - rate_bound * pt[j].re);
            }
        }
    }

    let passed = min_entry >= -1e-10 && max_trace_drift <= 1e-10 && worst_rate_violation <= 1e-10;
    Ok(DhatPositivityReport {
        min_entry,
        max_trace_drift,
        worst_rate_violation,
        rate_bound,
        passed,
    })
}
