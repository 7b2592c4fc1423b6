//! The time-average projector `G` onto the kernel of a generator along its
//! range, the complement `F = id - G`, the constrained inverse `L⁻¹` on the
//! range of `F`, and extraction of maximal families of mutually orthogonal
//! stationary states.
//!
//! `G` is computed spectrally as the oblique projector built from right and
//! left kernel bases, `G = K (K_L† K)⁻¹ K_L†`; the Cesàro time integral is
//! kept only as a numerical cross-check.

use ndarray::{concatenate, Array1, Array2, Axis};
use ndarray_linalg::{Inverse, LeastSquaresSvd, SVD};
use num_complex::Complex64 as C64;

use crate::error::{LindbladError, Result};
use crate::generator::{bilinear_dual_matrix, combine, Superop, SuperopKind};
use crate::matrix::{
    dagger, devectorize, eig, eigh, expm, fro_norm, hs_inner, identity, kron, left_null_space,
    null_space, split_positive_negative, support_projector, trace, vectorize, CMatrix, CVector,
};

/// Stationarity threshold for extracted states: `||L[σ]|| <=` this.
pub const STATIONARITY_TOL: f64 = 1e-8;
/// Mutual orthogonality threshold `Tr(σ_j σ_k)` for extracted states.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;
/// A stationary barycenter with minimum eigenvalue above this counts as
/// faithful (full rank).
pub const FAITHFULNESS_TOL: f64 = 1e-8;

/// Spectral data of the eigenvalue 0 of a generator: the projector pair
/// `(G, F)`, an orthonormal kernel basis, a maximal orthogonal family of
/// stationary states, and the faithfulness flag.
#[derive(Debug, Clone)]
pub struct AveragingData {
    pub g: Superop,
    pub f: Superop,
    pub kernel_basis: Vec<CMatrix>,
    pub stationary_states: Vec<CMatrix>,
    pub faithful: bool,
}

/// Build the spectral projector onto `ker L` along `ran L` from right/left
/// null-space bases. Fails when `K_L† K` is ill-conditioned, which signals
/// a defective zero eigenvalue (impossible for true Lindblad generators,
/// so it is reported rather than repaired).
pub fn time_average_projector(l: &Superop, tol: f64) -> Result<AveragingData> {
    let d = l.dim;
    let right = null_space(&l.matrix, tol)?;
    let left = left_null_space(&l.matrix, tol)?;
    if right.is_empty() {
        return Err(LindbladError::DegenerateKernel(
            "no kernel vectors found; a Lindblad generator always has a stationary state \
             (is the tolerance too tight?)"
                .into(),
        ));
    }
    if right.len() != left.len() {
        return Err(LindbladError::DegenerateKernel(format!(
            "right kernel dimension {} differs from left kernel dimension {}",
            right.len(),
            left.len()
        )));
    }
    let k = columns_to_matrix(&right, d * d);
    let kl = columns_to_matrix(&left, d * d);

    let m = dagger(&kl).dot(&k);
    // conditioning of K_L†K decides whether ker ⊕ ran really splits
    let (_, sv, _) = m.svd(false, false)?;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin < 1e-10 * smax.max(1.0) {
        return Err(LindbladError::DegenerateKernel(format!(
            "K_L†K is singular (smin = {smin:e}); eigenvalue 0 appears defective"
        )));
    }
    let m_inv = m.inv()?;
    let g_mat = k.dot(&m_inv).dot(&dagger(&kl));
    let f_mat = identity(d * d) - &g_mat;

    let g = Superop::new(d, g_mat, SuperopKind::Projector)?;
    let f = Superop::new(d, f_mat, SuperopKind::Projector)?;

    let kernel_basis: Vec<CMatrix> = right
        .iter()
        .map(|v| devectorize(v, d).expect("kernel vector length"))
        .collect();

    let stationary_states = extract_orthogonal_family(l, &k)?;
    let faithful = is_faithful(&stationary_states)?;

    Ok(AveragingData {
        g,
        f,
        kernel_basis,
        stationary_states,
        faithful,
    })
}

fn columns_to_matrix(cols: &[CVector], rows: usize) -> CMatrix {
    let mut m = Array2::zeros((rows, cols.len()));
    for (j, v) in cols.iter().enumerate() {
        for i in 0..rows {
            m[[i, j]] = v[i];
        }
    }
    m
}

fn is_faithful(states: &[CMatrix]) -> Result<bool> {
    if states.is_empty() {
        return Ok(false);
    }
    let d = states[0].nrows();
    let mut bary: CMatrix = Array2::zeros((d, d));
    for s in states {
        bary = bary + s;
    }
    bary.mapv_inplace(|z| z / states.len() as f64);
    let (vals, _) = eigh(&bary)?;
    Ok(vals.iter().cloned().fold(f64::INFINITY, f64::min) > FAITHFULNESS_TOL)
}

/// Cross-check `G` against the Cesàro mean `(1/T) ∫₀ᵀ exp(tL) dt` evaluated
/// with the trapezoid rule on `samples` intervals; returns the maximum
/// deviation from `G` over the matrix-unit basis.
///
/// When the generator is diagonalizable the trapezoid sum is carried out
/// exactly per eigenvalue (a geometric sum); otherwise the propagator is
/// stepped explicitly.
pub fn numerical_time_average_check(
    l: &Superop,
    avg: &AveragingData,
    t_final: f64,
    samples: usize,
) -> Result<f64> {
    if t_final <= 0.0 || samples == 0 {
        return Err(LindbladError::Validation(
            "need T > 0 and at least one trapezoid interval".into(),
        ));
    }
    let n = samples;
    let h = t_final / n as f64;

    let avg_mat = match spectral_trapezoid(&l.matrix, t_final, n) {
        Some(m) => m,
        None => {
            // ill-conditioned eigenbasis: step the propagator instead
            let step = expm(&l.matrix.mapv(|z| z * h))?;
            let dim2 = l.matrix.nrows();
            let mut acc = identity(dim2).mapv(|z| z * 0.5);
            let mut pow = identity(dim2);
            for k in 1..=n {
                pow = step.dot(&pow);
                let w = if k == n { 0.5 } else { 1.0 };
                acc = acc + pow.mapv(|z| z * w);
            }
            acc.mapv(|z| z * (h / t_final))
        }
    };

    let diff = &avg_mat - &avg.g.matrix;
    let mut worst: f64 = 0.0;
    for j in 0..diff.ncols() {
        let col = diff.index_axis(Axis(1), j);
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(norm);
    }
    Ok(worst)
}

fn spectral_trapezoid(m: &CMatrix, t_final: f64, n: usize) -> Option<CMatrix> {
    let (vals, vecs) = eig(m).ok()?;
    let (_, sv, _) = vecs.svd(false, false).ok()?;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin <= 1e-10 * smax {
        return None;
    }
    let vinv = vecs.inv().ok()?;
    let h = t_final / n as f64;
    let coeffs: CVector = vals.mapv(|lam| trapezoid_average(lam, h, n, t_final));
    let scaled = &vecs * &coeffs.broadcast((vecs.nrows(), vecs.ncols())).unwrap();
    Some(scaled.dot(&vinv))
}

/// Trapezoid average of `e^{λ t}` over `[0, T]` with `n` intervals:
/// `(h/T) (Σ_{k=0}^{n} e^{λ h k} - ½ (1 + e^{λ T}))`.
fn trapezoid_average(lam: C64, h: f64, n: usize, t_final: f64) -> C64 {
    let q = (lam * h).exp();
    let one = C64::new(1.0, 0.0);
    let sum = if (q - one).norm() < 1e-8 {
        // geometric sum near q = 1, second-order expansion
        let nn = n as f64;
        C64::new(nn + 1.0, 0.0) + (q - one) * (nn * (nn + 1.0) / 2.0)
    } else {
        ((lam * (t_final + h)).exp() - one) / (q - one)
    };
    (sum - (one + (lam * t_final).exp()) * 0.5) * (h / t_final)
}

/// Range-membership threshold for the constrained inverse (relative).
const RANGE_TOL: f64 = 1e-8;
/// Residual threshold for the augmented least-squares solve.
const INVERSE_RESIDUAL_TOL: f64 = 1e-9;

/// The unique `x` with `L[x] = y` and `G[x] = 0`, defined for `y` in the
/// range of `F`. Solved as the augmented least-squares system
/// `[L; G] x = [vec y; 0]`.
pub fn constrained_inverse(l: &Superop, avg: &AveragingData, y: &CMatrix) -> Result<CMatrix> {
    let d = l.dim;
    let ynorm = fro_norm(y);
    let gnorm = fro_norm(&avg.g.apply(y));
    let range_tol = RANGE_TOL * ynorm.max(1.0);
    if gnorm > range_tol {
        return Err(LindbladError::NotInRangeOfF {
            gnorm,
            tol: range_tol,
        });
    }
    let stacked = concatenate(Axis(0), &[l.matrix.view(), avg.g.matrix.view()])
        .expect("matching column counts");
    let mut rhs: CVector = Array1::zeros(2 * d * d);
    let yv = vectorize(y);
    for i in 0..d * d {
        rhs[i] = yv[i];
    }
    let sol = stacked.least_squares(&rhs)?;
    let x = devectorize(&sol.solution, d)?;
    let residual = fro_norm(&(&l.apply(&x) - y));
    if residual > INVERSE_RESIDUAL_TOL * ynorm.max(1.0) {
        return Err(LindbladError::DegenerateKernel(format!(
            "constrained inverse residual {residual:e} exceeds threshold"
        )));
    }
    Ok(x)
}

/// A maximal greedy family of mutually orthogonal stationary density
/// matrices: split Hermitian kernel elements into positive/negative parts
/// (each stationary for a Lindblad kernel), refine supports until minimal,
/// and repeat on the orthogonal complement of the accumulated supports.
pub fn stationary_family(l: &Superop, avg: &AveragingData) -> Result<Vec<CMatrix>> {
    let cols: Vec<CVector> = avg.kernel_basis.iter().map(|m| vectorize(m)).collect();
    let k = columns_to_matrix(&cols, l.dim * l.dim);
    extract_orthogonal_family(l, &k)
}

/// Coefficient-space tolerance when compressing the kernel onto a support
/// subspace.
const COMPRESSION_TOL: f64 = 1e-7;
/// Eigenvalues of a unit-trace state above this count toward its support.
const SUPPORT_TOL: f64 = 1e-9;

fn extract_orthogonal_family(l: &Superop, kernel_cols: &CMatrix) -> Result<Vec<CMatrix>> {
    let d = l.dim;
    let mut free = identity(d);
    let mut states: Vec<CMatrix> = Vec::new();

    for _round in 0..d {
        if projector_rank(&free) == 0 {
            break;
        }
        let herm = hermitian_kernel_basis_in(kernel_cols, &free, d)?;
        if herm.is_empty() {
            break;
        }
        let mut sigma = initial_state_candidate(&herm)?;

        // shrink the support while the compressed kernel stays multi-dimensional
        for _refine in 0..d {
            let supp = support_projector(&sigma, SUPPORT_TOL)?;
            if projector_rank(&supp) <= 1 {
                break;
            }
            let inner = hermitian_kernel_basis_in(kernel_cols, &supp, d)?;
            if inner.len() <= 1 {
                break;
            }
            let next = match traceless_combination(&inner) {
                Some(w) => {
                    let (pos, neg) = split_positive_negative(&w)?;
                    smaller_support_part(&pos, &neg)?
                }
                None => None,
            };
            match next {
                Some(part) => sigma = part,
                None => break,
            }
        }

        let resid = fro_norm(&l.apply(&sigma));
        if resid > STATIONARITY_TOL {
            return Err(LindbladError::DegenerateKernel(format!(
                "split kernel part fails stationarity: ||L[σ]|| = {resid:e}"
            )));
        }
        let supp = support_projector(&sigma, SUPPORT_TOL)?;
        states.push(sigma);
        free = shrink_projector(&free, &supp)?;
    }

    // orthogonality is enforced by support disjointness; verify
    for i in 0..states.len() {
        for j in 0..i {
            let overlap = trace(&states[i].dot(&states[j])).norm();
            if overlap > ORTHOGONALITY_TOL {
                return Err(LindbladError::DegenerateKernel(format!(
                    "stationary family members {j} and {i} overlap: Tr(σ_j σ_k) = {overlap:e}"
                )));
            }
        }
    }
    Ok(states)
}

fn projector_rank(p: &CMatrix) -> usize {
    trace(p).re.round().max(0.0) as usize
}

/// Orthonormal Hermitian basis of `{X in span(kernel_cols) : X = P X P}`.
fn hermitian_kernel_basis_in(
    kernel_cols: &CMatrix,
    p: &CMatrix,
    dim: usize,
) -> Result<Vec<CMatrix>> {
    let n = dim * dim;
    let pt = p.t().to_owned();
    let compress = kron(&pt, p);
    let constraint = identity(n) - &compress;
    let a = constraint.dot(kernel_cols);
    let coef_basis = null_space(&a, COMPRESSION_TOL)?;
    if coef_basis.is_empty() {
        return Ok(Vec::new());
    }
    let target = coef_basis.len();

    let mut herm: Vec<CMatrix> = Vec::new();
    'outer: for c in &coef_basis {
        let x = devectorize(&kernel_cols.dot(c), dim)?;
        let xd = dagger(&x);
        let re_part = (&x + &xd).mapv(|z| z * 0.5);
        let im_part = (&x - &xd).mapv(|z| z * C64::new(0.0, -0.5));
        for cand in [re_part, im_part] {
            // clean roundoff by re-compressing onto the support
            let mut v = p.dot(&cand).dot(p);
            // Gram-Schmidt over real coefficients (the HS inner product is
            // real on Hermitian pairs)
            for _ in 0..2 {
                for e in &herm {
                    let coef = hs_inner(e, &v).re;
                    v = v - e.mapv(|z| z * coef);
                }
            }
            let nrm = fro_norm(&v);
            if nrm > 1e-6 {
                herm.push(v.mapv(|z| z / nrm));
                if herm.len() == target {
                    break 'outer;
                }
            }
        }
    }
    Ok(herm)
}

fn initial_state_candidate(herm: &[CMatrix]) -> Result<CMatrix> {
    let w = match traceless_combination(herm) {
        Some(w) if herm.len() > 1 => w,
        _ => herm[0].clone(),
    };
    let (pos, neg) = split_positive_negative(&w)?;
    let (tp, tn) = (trace(&pos).re, trace(&neg).re);
    let part = if tp >= tn { pos } else { neg };
    let t = trace(&part).re;
    if t < 1e-10 {
        return Err(LindbladError::DegenerateKernel(
            "kernel element has no usable positive part".into(),
        ));
    }
    Ok(part.mapv(|z| z / t))
}

/// A traceless nonzero Hermitian element in the real span, if one exists.
fn traceless_combination(herm: &[CMatrix]) -> Option<CMatrix> {
    let traces: Vec<f64> = herm.iter().map(|m| trace(m).re).collect();
    // any basis element that is already traceless
    if let Some(idx) = traces.iter().position(|t| t.abs() < 1e-10) {
        return Some(herm[idx].clone());
    }
    if herm.len() < 2 {
        return None;
    }
    let w = herm[0].mapv(|z| z * traces[1]) - herm[1].mapv(|z| z * traces[0]);
    let nrm = fro_norm(&w);
    if nrm < 1e-10 {
        return None;
    }
    Some(w.mapv(|z| z / nrm))
}

/// Whichever of the two parts is nonzero with the smaller support rank,
/// normalized to unit trace.
fn smaller_support_part(pos: &CMatrix, neg: &CMatrix) -> Result<Option<CMatrix>> {
    let mut best: Option<(usize, CMatrix)> = None;
    for part in [pos, neg] {
        let t = trace(part).re;
        if t < 1e-10 {
            continue;
        }
        let normalized = part.mapv(|z| z / t);
        let rank = projector_rank(&support_projector(&normalized, SUPPORT_TOL)?);
        if rank == 0 {
            continue;
        }
        match &best {
            Some((r, _)) if *r <= rank => {}
            _ => best = Some((rank, normalized)),
        }
    }
    Ok(best.map(|(_, m)| m))
}

fn shrink_projector(free: &CMatrix, used: &CMatrix) -> Result<CMatrix> {
    let b = free - used;
    let d = b.nrows();
    let (vals, vecs) = eigh(&b)?;
    let mut out = Array2::zeros((d, d));
    for (k, &lam) in vals.iter().enumerate() {
        if lam > 0.5 {
            let v = vecs.column(k);
            for i in 0..d {
                for j in 0..d {
                    out[[i, j]] += v[i] * v[j].conj();
                }
            }
        }
    }
    Ok(out)
}

/// One row of the kernel-count monotonicity table.
#[derive(Debug, Clone)]
pub struct CountRecord {
    pub epsilon: f64,
    pub count: usize,
    pub monotone: bool,
}

/// `n(ε) <= n(0)` check over a grid; violations are recorded, not thrown.
#[derive(Debug, Clone)]
pub struct CountTable {
    pub baseline: usize,
    pub records: Vec<CountRecord>,
    pub all_monotone: bool,
}

/// Count orthogonal stationary states of `L₀ + ε L₁` on a grid of ε and
/// compare each count against the unperturbed one.
pub fn count_monotonicity_check(
    l0: &Superop,
    l1: &Superop,
    eps_grid: &[f64],
    tol: f64,
) -> Result<CountTable> {
    let avg0 = time_average_projector(l0, tol)?;
    let baseline = avg0.stationary_states.len();
    let mut records = Vec::with_capacity(eps_grid.len());
    let mut all_monotone = true;
    for &eps in eps_grid {
        let l_eps = combine(l0, l1, eps)?;
        let avg = time_average_projector(&l_eps, tol)?;
        let count = avg.stationary_states.len();
        let monotone = count <= baseline;
        all_monotone &= monotone;
        records.push(CountRecord {
            epsilon: eps,
            count,
            monotone,
        });
    }
    Ok(CountTable {
        baseline,
        records,
        all_monotone,
    })
}

/// When a faithful stationary state exists, the dual time-average is a
/// conditional expectation onto the fixed-point algebra:
/// `G^T[Y₁ X Y₂] = Y₁ G^T[X] Y₂` for `Y₁, Y₂` in the dual kernel.
/// Returns the maximum violation over dual-kernel basis pairs and a few
/// deterministic test matrices.
pub fn conditional_expectation_check(l: &Superop, avg: &AveragingData) -> Result<f64> {
    if !avg.faithful {
        return Err(LindbladError::Validation(
            "conditional expectation check requires a faithful stationary state".into(),
        ));
    }
    let d = l.dim;
    let dual_mat = bilinear_dual_matrix(&l.matrix, d);
    let gt_mat = bilinear_dual_matrix(&avg.g.matrix, d);
    let dual_kernel = null_space(&dual_mat, crate::matrix::DEFAULT_KERNEL_TOL)?;

    let mut ys: Vec<CMatrix> = vec![identity(d)];
    for v in &dual_kernel {
        ys.push(devectorize(v, d)?);
    }

    let gt = Superop::new(d, gt_mat, SuperopKind::Projector)?;
    let mut worst: f64 = 0.0;
    for xseed in [3usize, 11, 19] {
        let x = CMatrix::from_shape_fn((d, d), |(i, j)| {
            let t = (i * d + j + xseed) as f64;
            C64::new((1.3 * t).sin(), (0.7 * t).cos())
        });
        for y1 in &ys {
            for y2 in &ys {
                let lhs = gt.apply(&y1.dot(&x).dot(y2));
                let rhs = y1.dot(&gt.apply(&x)).dot(y2);
                worst = worst.max(fro_norm(&(&lhs - &rhs)));
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{build_generator, LindbladSpec};
    use crate::matrix::DEFAULT_KERNEL_TOL;
    use crate::scenarios;
    use crate::testutil::{assert_close, c, rand_density, randc_matrix};

    fn matrix_unit(dim: usize, j: usize, k: usize) -> CMatrix {
        let mut m = Array2::zeros((dim, dim));
        m[[j, k]] = c(1.0, 0.0);
        m
    }

    #[test]
    fn projector_matches_diagonal_pinning_for_hamiltonian() {
        // G[X] = Σ_j <j|X|j> |j><j| for non-degenerate H
        let sc = scenarios::example_hamiltonian(&[0.0, 1.0, 2.5, 4.5]).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        let x = randc_matrix(4, 3);
        let mut expected: CMatrix = Array2::zeros((4, 4));
        for j in 0..4 {
            expected[[j, j]] = x[[j, j]];
        }
        assert_close(&avg.g.apply(&x), &expected, 1e-11);
    }

    #[test]
    fn projector_matches_reset_rank_one() {
        // G[X] = Tr(X) |ψ><ψ|
        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        let sc = scenarios::example_reset(&psi).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        let x = randc_matrix(2, 9);
        let psi_proj = Array2::from_shape_fn((2, 2), |(i, j)| psi[i] * psi[j].conj());
        assert_close(&avg.g.apply(&x), &psi_proj.mapv(|z| z * trace(&x)), 1e-11);
    }

    #[test]
    fn projector_matches_single_jump_closed_form() {
        // G[X] = Σ_{a,b>=2} (X_ab + X_11 ψ_a ψ_b* / μ) |a><b|
        let psi = [c(0.6, 0.0), c(0.288, 0.384), c(0.512, 0.384)];
        let sc = scenarios::example_single_jump(&psi).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        let mu = 1.0 - psi[0].norm_sqr();
        let x = randc_matrix(3, 21);
        let mut expected: CMatrix = Array2::zeros((3, 3));
        for a in 1..3 {
            for b in 1..3 {
                expected[[a, b]] = x[[a, b]] + x[[0, 0]] * psi[a] * psi[b].conj() / mu;
            }
        }
        assert_close(&avg.g.apply(&x), &expected, 1e-10);
    }

    #[test]
    fn projector_identities() {
        for sc in [
            scenarios::example_hamiltonian(&[0.0, 1.0, 2.5, 4.5]).unwrap(),
            scenarios::example_single_jump(&[c(0.6, 0.0), c(0.288, 0.384), c(0.512, 0.384)]).unwrap(),
        ] {
            let l = build_generator(&sc.l0);
            let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
            let g = &avg.g.matrix;
            let f = &avg.f.matrix;
            assert!(fro_norm(&(&g.dot(g) - g)) < 1e-10);
            assert!(fro_norm(&(&f.dot(f) - f)) < 1e-10);
            assert!(fro_norm(&g.dot(f)) < 1e-10);
            assert!(fro_norm(&l.matrix.dot(g)) < 1e-9);
            assert!(fro_norm(&g.dot(&l.matrix)) < 1e-9);
            // trace preservation on a basis
            for j in 0..l.dim {
                for k in 0..l.dim {
                    let unit = matrix_unit(l.dim, j, k);
                    let diff = trace(&avg.g.apply(&unit)) - trace(&unit);
                    assert!(diff.norm() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn cesaro_average_reset_vs_analytic() {
        // the decaying sector has Cesàro weight (1 - e^{-T})/T exactly
        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        let sc = scenarios::example_reset(&psi).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        let t_final = 50.0;
        let got = numerical_time_average_check(&l, &avg, t_final, 20_000).unwrap();

        let coef = (1.0 - (-t_final).exp()) / t_final;
        let diff = avg.f.matrix.mapv(|z| z * coef);
        let mut expected: f64 = 0.0;
        for j in 0..diff.ncols() {
            let col = diff.index_axis(Axis(1), j);
            expected = expected.max(col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
        }
        assert!(
            (got - expected).abs() < 1e-6,
            "trapezoid {got:e} vs analytic {expected:e}"
        );
    }

    #[test]
    fn cesaro_average_zero_generator_is_identity() {
        let l = build_generator(&LindbladSpec::zero(2));
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        let dev = numerical_time_average_check(&l, &avg, 10.0, 100).unwrap();
        assert!(dev < 1e-12);
    }

    #[test]
    fn cesaro_average_oscillatory_decay() {
        // pairwise gaps >= 1 give O(1/T) Cesàro decay of the coherences
        let sc = scenarios::example_hamiltonian(&[0.0, 1.0, 2.2, 3.4]).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        let dev = numerical_time_average_check(&l, &avg, 1e4, 400_000).unwrap();
        assert!(dev < 1e-3, "deviation {dev:e}");
    }

    #[test]
    fn constrained_inverse_hamiltonian_closed_form() {
        // L⁻¹[|j><k|] = i / (E_j - E_k) |j><k| for j != k
        let energies = [0.0, 1.0, 2.5, 4.5];
        let sc = scenarios::example_hamiltonian(&energies).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                if j == k {
                    continue;
                }
                let unit = matrix_unit(4, j, k);
                let got = constrained_inverse(&l, &avg, &unit).unwrap();
                let expected = unit.mapv(|z| z * c(0.0, 1.0 / (energies[j] - energies[k])));
                assert_close(&got, &expected, 1e-10);
            }
        }
    }

    #[test]
    fn constrained_inverse_reset_is_negation() {
        // on traceless matrices, L⁻¹[X] = -X
        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        let sc = scenarios::example_reset(&psi).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        let mut x = randc_matrix(2, 33);
        let t = trace(&x) / 2.0;
        for i in 0..2 {
            x[[i, i]] -= t;
        }
        let got = constrained_inverse(&l, &avg, &x).unwrap();
        assert_close(&got, &x.mapv(|z| -z), 1e-10);
    }

    #[test]
    fn constrained_inverse_single_jump_closed_form() {
        // derived closed form on an admissible X, d = 3
        let psi = [c(0.6, 0.0), c(0.288, 0.384), c(0.512, 0.384)];
        let sc = scenarios::example_single_jump(&psi).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        let mu = 1.0 - psi[0].norm_sqr();

        // admissible X: free entries X11, X_{1a}, X_{a1}; the block on the
        // complement of |1> is pinned to -X11/μ ψ_a ψ_b*
        let x11 = c(0.3, -0.2);
        let x1 = [c(0.1, 0.4), c(-0.5, 0.2)];
        let xa = [c(0.2, 0.1), c(0.0, -0.3)];
        let mut x: CMatrix = Array2::zeros((3, 3));
        x[[0, 0]] = x11;
        for a in 1..3 {
            x[[0, a]] = x1[a - 1];
            x[[a, 0]] = xa[a - 1];
            for b in 1..3 {
                x[[a, b]] = -x11 / mu * psi[a] * psi[b].conj();
            }
        }
        let got = constrained_inverse(&l, &avg, &x).unwrap();

        let mut expected: CMatrix = Array2::zeros((3, 3));
        expected[[0, 0]] = -x11 / mu;
        for a in 1..3 {
            expected[[0, a]] = (x[[0, a]] + x11 / mu * psi[0] * psi[a].conj()) * (-2.0);
            expected[[a, 0]] = (x[[a, 0]] + x11 / mu * psi[a] * psi[0].conj()) * (-2.0);
            for b in 1..3 {
                expected[[a, b]] = x11 / (mu * mu) * psi[a] * psi[b].conj();
            }
        }
        assert_close(&got, &expected, 1e-10);

        // round trip and tracelessness
        assert_close(&l.apply(&got), &x, 1e-9);
        assert!(trace(&got).norm() < 1e-10);
    }

    #[test]
    fn constrained_inverse_rejects_kernel_component() {
        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        let sc = scenarios::example_reset(&psi).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        let rho = rand_density(2, 50); // trace 1: G[ρ] != 0
        assert!(matches!(
            constrained_inverse(&l, &avg, &rho),
            Err(LindbladError::NotInRangeOfF { .. })
        ));
    }

    #[test]
    fn inverse_round_trips_on_range_of_f() {
        let psi = [c(0.6, 0.0), c(0.288, 0.384), c(0.512, 0.384)];
        let sc = scenarios::example_single_jump(&psi).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        for seed in 0..5 {
            let x = randc_matrix(3, 400 + seed);
            let fx = avg.f.apply(&x);
            // L then L⁻¹ reproduces F[x]
            let back = constrained_inverse(&l, &avg, &l.apply(&fx)).unwrap();
            assert_close(&back, &fx, 1e-8);
            // L⁻¹ then L reproduces the input
            let y = l.apply(&fx);
            let inv = constrained_inverse(&l, &avg, &y).unwrap();
            assert_close(&l.apply(&inv), &y, 1e-9);
            assert!(trace(&inv).norm() < 1e-10);
        }
    }

    #[test]
    fn family_hamiltonian_gives_eigenprojectors() {
        let sc = scenarios::example_hamiltonian(&[0.0, 1.0, 2.5, 4.5]).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        assert_eq!(avg.stationary_states.len(), 4);
        for s in &avg.stationary_states {
            // each member is a one-dimensional diagonal projector
            assert!(fro_norm(&(&s.dot(s) - s)) < 1e-8);
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        assert!(s[[i, j]].norm() < 1e-8);
                    }
                }
            }
        }
        assert!(avg.faithful);
    }

    #[test]
    fn family_reset_gives_single_target_state() {
        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        let sc = scenarios::example_reset(&psi).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        assert_eq!(avg.stationary_states.len(), 1);
        let psi_proj = Array2::from_shape_fn((2, 2), |(i, j)| psi[i] * psi[j].conj());
        assert_close(&avg.stationary_states[0], &psi_proj, 1e-9);
        assert!(!avg.faithful);
    }

    #[test]
    fn family_single_jump_lives_in_q_subspace() {
        let psi = [c(0.6, 0.0), c(0.288, 0.384), c(0.512, 0.384)];
        let sc = scenarios::example_single_jump(&psi).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        assert_eq!(avg.stationary_states.len(), 2); // d - 1 for generic ψ
        for s in &avg.stationary_states {
            for i in 0..3 {
                assert!(s[[0, i]].norm() < 1e-8);
                assert!(s[[i, 0]].norm() < 1e-8);
            }
        }
        assert!(!avg.faithful);
    }

    #[test]
    fn family_zero_generator_gives_orthogonal_pure_states() {
        let l = build_generator(&LindbladSpec::zero(3));
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        assert_eq!(avg.stationary_states.len(), 3);
        for (i, a) in avg.stationary_states.iter().enumerate() {
            assert!(
                fro_norm(&(&a.dot(a) - a)) < 1e-8,
                "member {i} is not a projector"
            );
        }
    }

    #[test]
    fn g_of_density_is_stationary() {
        let psi = [c(0.6, 0.0), c(0.288, 0.384), c(0.512, 0.384)];
        let sc = scenarios::example_single_jump(&psi).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        for seed in 0..5 {
            let rho = rand_density(3, 70 + seed);
            let grho = avg.g.apply(&rho);
            assert!(fro_norm(&l.apply(&grho)) < 1e-9);
        }
    }

    #[test]
    fn monotonicity_hamiltonian_plus_reset() {
        // kernel collapses from d to 1 when the reset dissipator turns on
        let sc = scenarios::example_perturbed_hamiltonian(
            &[0.0, 1.0, 2.2, 3.4],
            &[c(0.5, 0.0), c(0.5, 0.1), c(-0.3, 0.4), c(0.2, -0.45)],
        )
        .unwrap();
        let l0 = build_generator(&sc.l0);
        let l1 = build_generator(&sc.l1);

        assert_eq!(null_space(&l0.matrix, DEFAULT_KERNEL_TOL).unwrap().len(), 4);
        let l_eps = combine(&l0, &l1, 1e-3).unwrap();
        assert_eq!(
            null_space(&l_eps.matrix, DEFAULT_KERNEL_TOL).unwrap().len(),
            1
        );

        let table = count_monotonicity_check(&l0, &l1, &[1e-3, 1e-2], DEFAULT_KERNEL_TOL).unwrap();
        assert_eq!(table.baseline, 4);
        assert!(table.all_monotone);
        for r in &table.records {
            assert_eq!(r.count, 1);
        }
    }

    #[test]
    fn monotonicity_zero_perturbation_keeps_count() {
        let sc = scenarios::example_hamiltonian(&[0.0, 1.0, 2.5, 4.5]).unwrap();
        let l0 = build_generator(&sc.l0);
        let l1 = Superop::zero(4, SuperopKind::Generator);
        let table = count_monotonicity_check(&l0, &l1, &[0.5, 1.0], DEFAULT_KERNEL_TOL).unwrap();
        assert!(table.all_monotone);
        for r in &table.records {
            assert_eq!(r.count, table.baseline);
        }
    }

    #[test]
    fn monotonicity_unique_state_stays_unique() {
        // a perturbation preserving the unique target state keeps n(ε) = 1
        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        let sc = scenarios::example_reset(&psi).unwrap();
        let l0 = build_generator(&sc.l0);
        let table = count_monotonicity_check(&l0, &l0, &[1e-2, 1e-1], DEFAULT_KERNEL_TOL).unwrap();
        assert_eq!(table.baseline, 1);
        for r in &table.records {
            assert_eq!(r.count, 1);
        }
    }

    #[test]
    fn conditional_expectation_on_diagonal_algebra() {
        let sc = scenarios::example_hamiltonian(&[0.0, 1.0, 2.5, 4.5]).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        assert!(avg.faithful);
        let violation = conditional_expectation_check(&l, &avg).unwrap();
        assert!(violation < 1e-10, "violation {violation:e}");
    }

    #[test]
    fn conditional_expectation_requires_faithful() {
        let psi = [c(0.6, 0.0), c(0.288, 0.384), c(0.512, 0.384)];
        let sc = scenarios::example_single_jump(&psi).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        assert!(!avg.faithful);
        assert!(matches!(
            conditional_expectation_check(&l, &avg),
            Err(LindbladError::Validation(_))
        ));
    }

    #[test]
    fn identity_observable_is_fixed_exactly() {
        // G^T[I] = I (unitality of the dual average)
        let sc = scenarios::example_hamiltonian(&[0.0, 1.0, 2.5, 4.5]).unwrap();
        let l = build_generator(&sc.l0);
        let avg = time_average_projector(&l, DEFAULT_KERNEL_TOL).unwrap();
        let gt_mat = bilinear_dual_matrix(&avg.g.matrix, 4);
        let gt = Superop::new(4, gt_mat, SuperopKind::Projector).unwrap();
        assert_close(&gt.apply(&identity(4)), &identity(4), 1e-10);
    }

    #[test]
    fn defective_matrix_is_reported() {
        // a Jordan block at 0 is not a Lindblad generator; the projector
        // build must refuse it instead of fabricating a projector
        let mut m: CMatrix = Array2::zeros((4, 4));
        m[[0, 1]] = c(1.0, 0.0);
        let s = Superop::new(2, m, SuperopKind::Generator).unwrap();
        assert!(matches!(
            time_average_projector(&s, DEFAULT_KERNEL_TOL),
            Err(LindbladError::DegenerateKernel(_))
        ));
    }
}
