//! Ready-made generator pairs with closed-form oracles, plus a seeded
//! random-instance generator for property tests.
//!
//! Each constructor validates its parameters and attaches an [`Oracle`]
//! carrying the analytic expressions (projector action, constrained
//! inverse, flows, series terms) that the regression suite replays against
//! the numerical machinery.

use ndarray::{arr1, Array2};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{LindbladError, Result};
use crate::generator::LindbladSpec;
use crate::matrix::{outer, vec_norm, BipartiteDims, CMatrix, CVector};

/// A named pair of generators with optional bipartite structure and
/// closed-form reference data.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub l0: LindbladSpec,
    pub l1: LindbladSpec,
    pub dims: Option<BipartiteDims>,
    pub oracle: Option<Oracle>,
}

/// Closed-form reference data, tagged by scenario family.
#[derive(Debug, Clone)]
pub enum Oracle {
    /// `L[ρ] = -i[H, ρ]` with non-degenerate diagonal `H`.
    Hamiltonian { energies: Vec<f64> },
    /// `H = 0`, jumps `|ψ><α|` over a full orthonormal basis:
    /// `L[ρ] = Tr(ρ)|ψ><ψ| - ρ`.
    Reset { psi: CVector },
    /// `H = 0`, single jump `|ψ><1|` with `0 < |ψ_1| < 1`.
    SingleJump { psi: CVector },
    /// `L₀ = -i[H₀, ·]`, `L₁ = -i[H₁, ·]`; the reduced perturbation
    /// vanishes identically.
    HamiltonianPair {
        energies: Vec<f64>,
        h1: CMatrix,
        populations: Vec<f64>,
    },
    /// `L₀` Hamiltonian, `L₁` the reset dissipator: the workhorse for the
    /// degenerate expansion.
    PerturbedHamiltonian { energies: Vec<f64>, psi: CVector },
    /// Perturbed non-entangling bipartite Hamiltonian `H₁⊗1 + 1⊗H₂` with a
    /// reset dissipator whose target has two vanishing components.
    Bipartite {
        e1: Vec<f64>,
        e2: Vec<f64>,
        psi: CVector,
        zeros: [(usize, usize); 2],
    },
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn diag_hamiltonian(energies: &[f64]) -> CMatrix {
    Array2::from_diag(&arr1(
        &energies.iter().map(|&e| c(e, 0.0)).collect::<Vec<_>>(),
    ))
}

fn check_nondegenerate(energies: &[f64]) -> Result<()> {
    for i in 0..energies.len() {
        for j in 0..i {
            if (energies[i] - energies[j]).abs() < 1e-9 {
                return Err(LindbladError::Validation(format!(
                    "energies {j} and {i} coincide; a non-degenerate spectrum is required"
                )));
            }
        }
    }
    Ok(())
}

fn normalized_state(psi: &[C64]) -> Result<CVector> {
    let v = arr1(psi);
    let n = vec_norm(&v);
    if n < 1e-12 {
        return Err(LindbladError::Validation("state vector is zero".into()));
    }
    Ok(v.mapv(|z| z / n))
}

/// Jumps `|ψ><α|` over the full standard basis; together they implement
/// `ρ ↦ Tr(ρ)|ψ><ψ| - ρ`.
pub fn reset_jumps(psi: &CVector) -> Vec<CMatrix> {
    let d = psi.len();
    (0..d)
        .map(|alpha| {
            Array2::from_shape_fn((d, d), |(i, j)| if j == alpha { psi[i] } else { c(0.0, 0.0) })
        })
        .collect()
}

/// Non-degenerate Hamiltonian evolution only (reversible, no dissipation).
pub fn example_hamiltonian(energies: &[f64]) -> Result<Scenario> {
    check_nondegenerate(energies)?;
    let d = energies.len();
    let l0 = LindbladSpec::new(diag_hamiltonian(energies), vec![], "hamiltonian")?;
    Ok(Scenario {
        name: "hamiltonian".into(),
        l0,
        l1: LindbladSpec::zero(d),
        dims: None,
        oracle: Some(Oracle::Hamiltonian {
            energies: energies.to_vec(),
        }),
    })
}

/// Reset channel onto a pure target state.
pub fn example_reset(psi: &[C64]) -> Result<Scenario> {
    let psi = normalized_state(psi)?;
    let d = psi.len();
    let l0 = LindbladSpec::new(Array2::zeros((d, d)), reset_jumps(&psi), "reset")?;
    Ok(Scenario {
        name: "reset".into(),
        l0,
        l1: LindbladSpec::zero(d),
        dims: None,
        oracle: Some(Oracle::Reset { psi }),
    })
}

/// Single jump `|ψ><1|`; requires `0 < |ψ_1| < 1`.
pub fn example_single_jump(psi: &[C64]) -> Result<Scenario> {
    let psi = normalized_state(psi)?;
    let p1 = psi[0].norm();
    if p1 < 1e-9 || (1.0 - p1).abs() < 1e-9 {
        return Err(LindbladError::Validation(format!(
            "single-jump scenario needs 0 < |ψ_1| < 1, got |ψ_1| = {p1}"
        )));
    }
    let d = psi.len();
    let jump = Array2::from_shape_fn((d, d), |(i, j)| if j == 0 { psi[i] } else { c(0.0, 0.0) });
    let l0 = LindbladSpec::new(Array2::zeros((d, d)), vec![jump], "single-jump")?;
    Ok(Scenario {
        name: "single-jump".into(),
        l0,
        l1: LindbladSpec::zero(d),
        dims: None,
        oracle: Some(Oracle::SingleJump { psi }),
    })
}

/// Two commutator generators: `L₀` from a non-degenerate diagonal `H₀`,
/// `L₁` from an arbitrary Hermitian `H₁`.
pub fn example_hamiltonian_pair(
    energies: &[f64],
    h1: &CMatrix,
    populations: &[f64],
) -> Result<Scenario> {
    check_nondegenerate(energies)?;
    let d = energies.len();
    if populations.len() != d {
        return Err(LindbladError::DimensionMismatch {
            expected: d,
            actual: populations.len(),
        });
    }
    let psum: f64 = populations.iter().sum();
    if populations.iter().any(|&p| p < 0.0) || (psum - 1.0).abs() > 1e-12 {
        return Err(LindbladError::Validation(
            "populations must be a probability vector".into(),
        ));
    }
    let l0 = LindbladSpec::new(diag_hamiltonian(energies), vec![], "hamiltonian-pair-h0")?;
    let l1 = LindbladSpec::new(h1.clone(), vec![], "hamiltonian-pair-h1")?;
    Ok(Scenario {
        name: "hamiltonian-pair".into(),
        l0,
        l1,
        dims: None,
        oracle: Some(Oracle::HamiltonianPair {
            energies: energies.to_vec(),
            h1: h1.clone(),
            populations: populations.to_vec(),
        }),
    })
}

/// Non-degenerate Hamiltonian `L₀` perturbed by the reset dissipator.
pub fn example_perturbed_hamiltonian(energies: &[f64], psi: &[C64]) -> Result<Scenario> {
    check_nondegenerate(energies)?;
    let psi = normalized_state(psi)?;
    let d = energies.len();
    if psi.len() != d {
        return Err(LindbladError::DimensionMismatch {
            expected: d,
            actual: psi.len(),
        });
    }
    let l0 = LindbladSpec::new(diag_hamiltonian(energies), vec![], "perturbed-hamiltonian-h0")?;
    let l1 = LindbladSpec::new(Array2::zeros((d, d)), reset_jumps(&psi), "reset-perturbation")?;
    Ok(Scenario {
        name: "perturbed-hamiltonian".into(),
        l0,
        l1,
        dims: None,
        oracle: Some(Oracle::PerturbedHamiltonian {
            energies: energies.to_vec(),
            psi,
        }),
    })
}

/// Bipartite `H = H₁⊗1 + 1⊗H₂` (all level sums distinct) perturbed by a
/// reset dissipator whose target `ψ` vanishes at the two composite indices
/// in `zeros` (with distinct rows and columns).
pub fn example_bipartite(
    e1: &[f64],
    e2: &[f64],
    psi: &[C64],
    zeros: [(usize, usize); 2],
) -> Result<Scenario> {
    let (a, b) = (e1.len(), e2.len());
    let d = a * b;
    let mut totals = Vec::with_capacity(d);
    for &x in e1 {
        for &y in e2 {
            totals.push(x + y);
        }
    }
    check_nondegenerate(&totals)?;
    let psi = normalized_state(psi)?;
    if psi.len() != d {
        return Err(LindbladError::DimensionMismatch {
            expected: d,
            actual: psi.len(),
        });
    }
    let [(a1, b1), (a2, b2)] = zeros;
    if a1 == a2 || b1 == b2 || a1 >= a || a2 >= a || b1 >= b || b2 >= b {
        return Err(LindbladError::Validation(
            "the two zero positions must have distinct rows and distinct columns".into(),
        ));
    }
    for (alpha, beta) in zeros {
        if psi[alpha * b + beta].norm() > 1e-12 {
            return Err(LindbladError::Validation(format!(
                "ψ must vanish at composite index ({alpha},{beta})"
            )));
        }
    }
    let l0 = LindbladSpec::new(diag_hamiltonian(&totals), vec![], "bipartite-h0")?;
    let l1 = LindbladSpec::new(Array2::zeros((d, d)), reset_jumps(&psi), "reset-perturbation")?;
    Ok(Scenario {
        name: "bipartite-dissipative".into(),
        l0,
        l1,
        dims: Some(BipartiteDims::new(a, b)?),
        oracle: Some(Oracle::Bipartite {
            e1: e1.to_vec(),
            e2: e2.to_vec(),
            psi,
            zeros,
        }),
    })
}

/// Default bipartite configuration: two qubits, `E₁ = (0,1)`, `E₂ = (0,2)`,
/// `ψ = (0, i, 1, 0)/√2`.
pub fn example_bipartite_default() -> Scenario {
    let s = 1.0 / 2f64.sqrt();
    example_bipartite(
        &[0.0, 1.0],
        &[0.0, 2.0],
        &[c(0.0, 0.0), c(0.0, s), c(s, 0.0), c(0.0, 0.0)],
        [(0, 0), (1, 1)],
    )
    .expect("default parameters are valid")
}

/// Off-diagonal first-order series term shared by the perturbed-Hamiltonian
/// and bipartite scenarios: `-i Σ_{j≠k} ψ_j ψ_k* / (E_j - E_k) |j><k|`.
pub fn coherence_first_order(psi: &CVector, energies: &[f64]) -> CMatrix {
    let d = psi.len();
    Array2::from_shape_fn((d, d), |(j, k)| {
        if j == k {
            c(0.0, 0.0)
        } else {
            c(0.0, -1.0) * psi[j] * psi[k].conj() / (energies[j] - energies[k])
        }
    })
}

/// Diagonal zeroth-order seed `Σ |ψ_j|² |j><j|`.
pub fn diagonal_seed(psi: &CVector) -> CMatrix {
    let d = psi.len();
    Array2::from_shape_fn((d, d), |(i, j)| {
        if i == j {
            c(psi[i].norm_sqr(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

impl Oracle {
    /// Action of the kernel projector `G` in closed form.
    pub fn g_apply(&self, x: &CMatrix) -> Option<CMatrix> {
        match self {
            Oracle::Hamiltonian { energies } => {
                let d = energies.len();
                let mut out = Array2::zeros((d, d));
                for j in 0..d {
                    out[[j, j]] = x[[j, j]];
                }
                Some(out)
            }
            Oracle::Reset { psi } => {
                let t = crate::matrix::trace(x);
                Some(outer(psi, psi).mapv(|z| z * t))
            }
            Oracle::SingleJump { psi } => {
                let d = psi.len();
                let mu = 1.0 - psi[0].norm_sqr();
                let mut out = Array2::zeros((d, d));
                for a in 1..d {
                    for bq in 1..d {
                        out[[a, bq]] = x[[a, bq]] + x[[0, 0]] * psi[a] * psi[bq].conj() / mu;
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Action of the constrained inverse `L⁻¹` on admissible inputs.
    pub fn inverse_apply(&self, x: &CMatrix) -> Option<CMatrix> {
        match self {
            Oracle::Hamiltonian { energies } => {
                let d = energies.len();
                let mut out = Array2::zeros((d, d));
                for j in 0..d {
                    for k in 0..d {
                        if j != k {
                            out[[j, k]] = x[[j, k]] * c(0.0, 1.0 / (energies[j] - energies[k]));
                        }
                    }
                }
                Some(out)
            }
            Oracle::Reset { .. } => Some(x.mapv(|z| -z)),
            Oracle::SingleJump { psi } => {
                let d = psi.len();
                let mu = 1.0 - psi[0].norm_sqr();
                let x11 = x[[0, 0]];
                let mut out = Array2::zeros((d, d));
                out[[0, 0]] = -x11 / mu;
                for a in 1..d {
                    out[[0, a]] = (x[[0, a]] + x11 / mu * psi[0] * psi[a].conj()) * (-2.0);
                    out[[a, 0]] = (x[[a, 0]] + x11 / mu * psi[a] * psi[0].conj()) * (-2.0);
                    for bq in 1..d {
                        out[[a, bq]] = x11 / (mu * mu) * psi[a] * psi[bq].conj();
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Time-evolved state in closed form.
    pub fn flow(&self, rho: &CMatrix, t: f64) -> Option<CMatrix> {
        match self {
            Oracle::Hamiltonian { energies } => {
                let d = energies.len();
                Some(Array2::from_shape_fn((d, d), |(j, k)| {
                    rho[[j, k]] * (c(0.0, -(energies[j] - energies[k])) * t).exp()
                }))
            }
            Oracle::Reset { psi } => {
                let decay = (-t).exp();
                Some(rho.mapv(|z| z * decay) + outer(psi, psi).mapv(|z| z * (1.0 - decay)))
            }
            Oracle::SingleJump { psi } => {
                let d = psi.len();
                let mu = 1.0 - psi[0].norm_sqr();
                let em = (-mu * t).exp();
                let eh = (-t / 2.0).exp();
                let mut out: CMatrix = Array2::zeros((d, d));
                out[[0, 0]] = rho[[0, 0]] * em;
                for a in 1..d {
                    // displayed coherence solution; requires μ != 1/2
                    out[[0, a]] = rho[[0, a]] * eh
                        + psi[0] * psi[a].conj() * rho[[0, 0]] * ((eh - em) / (mu - 0.5));
                    out[[a, 0]] = rho[[a, 0]] * eh
                        + psi[a] * psi[0].conj() * rho[[0, 0]] * ((eh - em) / (mu - 0.5));
                    for bq in 1..d {
                        out[[a, bq]] = rho[[a, bq]]
                            + rho[[0, 0]] * psi[a] * psi[bq].conj() * ((1.0 - em) / mu);
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Number of states in a maximal orthogonal stationary family.
    pub fn stationary_count(&self) -> Option<usize> {
        match self {
            Oracle::Hamiltonian { energies } => Some(energies.len()),
            Oracle::Reset { .. } => Some(1),
            Oracle::SingleJump { psi } => Some(psi.len() - 1),
            _ => None,
        }
    }

    /// Level energies, flattened over the composite index for bipartite
    /// scenarios.
    pub fn energies_flat(&self) -> Option<Vec<f64>> {
        match self {
            Oracle::Hamiltonian { energies }
            | Oracle::PerturbedHamiltonian { energies, .. }
            | Oracle::HamiltonianPair { energies, .. } => Some(energies.clone()),
            Oracle::Bipartite { e1, e2, .. } => {
                let mut totals = Vec::with_capacity(e1.len() * e2.len());
                for &x in e1 {
                    for &y in e2 {
                        totals.push(x + y);
                    }
                }
                Some(totals)
            }
            _ => None,
        }
    }

    /// First-order series coefficient in the traceless gauge.
    pub fn first_order_term(&self) -> Option<CMatrix> {
        match self {
            Oracle::PerturbedHamiltonian { energies, psi } => {
                Some(coherence_first_order(psi, energies))
            }
            Oracle::Bipartite { psi, .. } => {
                Some(coherence_first_order(psi, &self.energies_flat()?))
            }
            Oracle::HamiltonianPair {
                energies,
                h1,
                populations,
            } => {
                let d = energies.len();
                Some(Array2::from_shape_fn((d, d), |(j, k)| {
                    if j == k {
                        c(0.0, 0.0)
                    } else {
                        h1[[j, k]]
                            * c(
                                -(populations[k] - populations[j]) / (energies[j] - energies[k]),
                                0.0,
                            )
                    }
                }))
            }
            _ => None,
        }
    }

    /// Zeroth-order seed of the degenerate expansion.
    pub fn zeroth_order(&self) -> Option<CMatrix> {
        match self {
            Oracle::PerturbedHamiltonian { psi, .. } | Oracle::Bipartite { psi, .. } => {
                Some(diagonal_seed(psi))
            }
            Oracle::HamiltonianPair {
                populations,
                energies,
                ..
            } => {
                let d = energies.len();
                Some(Array2::from_shape_fn((d, d), |(i, j)| {
                    if i == j {
                        c(populations[i], 0.0)
                    } else {
                        c(0.0, 0.0)
                    }
                }))
            }
            _ => None,
        }
    }

    /// Exact diagonal flow of the reduced dissipator:
    /// `p_j(t) = |ψ_j|² (1 - e^{-t}) + p_j e^{-t}`.
    pub fn reduced_diagonal_flow(&self, p: &[f64], t: f64) -> Option<Vec<f64>> {
        match self {
            Oracle::PerturbedHamiltonian { psi, .. } | Oracle::Bipartite { psi, .. } => Some(
                p.iter()
                    .enumerate()
                    .map(|(j, &pj)| psi[j].norm_sqr() * (1.0 - (-t).exp()) + pj * (-t).exp())
                    .collect(),
            ),
            _ => None,
        }
    }
}

/// Instance flavor for the random generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// Both generators carry a Hamiltonian and jumps.
    Generic,
    /// `L₀` is reversible (diagonal non-degenerate Hamiltonian only),
    /// `L₁` purely dissipative.
    HamiltonianPlusDissipator,
}

/// Seeded random scenario: diagonal `H₀` with sorted eigenvalues, minimum
/// gap 0.1, distinct level differences, and Gaussian-entry jump operators
/// scaled to keep `||L₁||` of order one.
pub fn random_instance(dim: usize, n_jumps: usize, seed: u64, flavor: Flavor) -> Result<Scenario> {
    if dim > 16 || dim == 0 {
        return Err(LindbladError::Validation(
            "random instances support 1 <= dim <= 16".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let energies = loop {
        let e = random_levels(dim, &mut rng);
        if distinct_differences(&e, 0.02) {
            break e;
        }
    };

    let scale = 0.5 / (dim as f64).sqrt();
    let gaussian_jump = |rng: &mut ChaCha8Rng| -> CMatrix {
        Array2::from_shape_fn((dim, dim), |_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c(re * scale, im * scale)
        })
    };

    let (l0, l1) = match flavor {
        Flavor::HamiltonianPlusDissipator => {
            let l0 = LindbladSpec::new(diag_hamiltonian(&energies), vec![], "random-h0")?;
            let jumps = (0..n_jumps.max(1))
                .map(|_| gaussian_jump(&mut rng))
                .collect();
            let l1 = LindbladSpec::new(Array2::zeros((dim, dim)), jumps, "random-dissipator")?;
            (l0, l1)
        }
        Flavor::Generic => {
            let jumps0: Vec<CMatrix> = (0..n_jumps.max(1))
                .map(|_| gaussian_jump(&mut rng))
                .collect();
            let l0 = LindbladSpec::new(diag_hamiltonian(&energies), jumps0, "random-l0")?;
            let g = gaussian_jump(&mut rng);
            let h1 = (&g + &crate::matrix::dagger(&g)).mapv(|z| z * 0.5);
            let jumps1 = (0..n_jumps.max(1))
                .map(|_| gaussian_jump(&mut rng))
                .collect();
            let l1 = LindbladSpec::new(h1, jumps1, "random-l1")?;
            (l0, l1)
        }
    };

    Ok(Scenario {
        name: format!("random-{seed}"),
        l0,
        l1,
        dims: None,
        oracle: None,
    })
}

fn random_levels(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut e = Vec::with_capacity(dim);
    let mut acc = 0.0;
    for k in 0..dim {
        if k > 0 {
            let g: f64 = StandardNormal.sample(rng);
            acc += 0.1 + 0.4 * g.abs();
        }
        e.push(acc);
    }
    e
}

/// All pairwise level differences separated by at least `min_sep`
/// (so first-order eigenvalue tracking stays unambiguous).
fn distinct_differences(energies: &[f64], min_sep: f64) -> bool {
    let d = energies.len();
    let mut diffs = Vec::new();
    for j in 0..d {
        for k in 0..d {
            if j != k {
                diffs.push(energies[j] - energies[k]);
            }
        }
    }
    for i in 0..diffs.len() {
        for j in 0..i {
            if (diffs[i] - diffs[j]).abs() < min_sep {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{build_generator, evolve};
    use crate::matrix::{fro_norm, trace};
    use crate::testutil::{assert_close, rand_density};

    #[test]
    fn reset_oracle_evolution_at_ln2() {
        // at t = ln 2 the flow is the midpoint ρ/2 + |ψ><ψ|/2
        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        let sc = example_reset(&psi).unwrap();
        let l = build_generator(&sc.l0);
        let rho = rand_density(2, 7);
        let t = 2f64.ln();
        let got = evolve(&l, &rho, t).unwrap();
        let psi_v = arr1(&psi);
        let expected = rho.mapv(|z| z * 0.5) + outer(&psi_v, &psi_v).mapv(|z| z * 0.5);
        assert_close(&got, &expected, 1e-11);
        let oracle = sc.oracle.unwrap();
        assert_close(&oracle.flow(&rho, t).unwrap(), &expected, 1e-13);
    }

    #[test]
    fn single_jump_rejects_unit_overlap() {
        // |ψ_1| = 1 makes the decay rate μ vanish
        assert!(example_single_jump(&[c(1.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(example_single_jump(&[c(0.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn bipartite_rejects_nonvanishing_zero_slots() {
        let s = 1.0 / 2f64.sqrt();
        let bad = example_bipartite(
            &[0.0, 1.0],
            &[0.0, 2.0],
            &[c(s, 0.0), c(0.0, s), c(0.0, 0.0), c(0.0, 0.0)],
            [(0, 0), (1, 1)],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn random_instances_are_reproducible() {
        for flavor in [Flavor::Generic, Flavor::HamiltonianPlusDissipator] {
            let a = random_instance(4, 2, 11, flavor).unwrap();
            let b = random_instance(4, 2, 11, flavor).unwrap();
            assert_close(&a.l0.hamiltonian, &b.l0.hamiltonian, 0.0);
            assert_eq!(a.l0.jumps.len(), b.l0.jumps.len());
            for (x, y) in a.l1.jumps.iter().zip(b.l1.jumps.iter()) {
                assert_close(x, y, 0.0);
            }
        }
    }

    #[test]
    fn random_hamiltonian_has_min_gap() {
        for seed in 0..10 {
            let sc = random_instance(5, 1, seed, Flavor::HamiltonianPlusDissipator).unwrap();
            let e: Vec<f64> = (0..5).map(|i| sc.l0.hamiltonian[[i, i]].re).collect();
            for i in 1..5 {
                assert!(e[i] - e[i - 1] >= 0.1 - 1e-12);
            }
        }
    }

    #[test]
    fn random_generators_pass_basis_identities() {
        let sc = random_instance(3, 2, 5, Flavor::Generic).unwrap();
        for spec in [&sc.l0, &sc.l1] {
            let l = build_generator(spec);
            for j in 0..3 {
                for k in 0..3 {
                    let mut unit: CMatrix = Array2::zeros((3, 3));
                    unit[[j, k]] = c(1.0, 0.0);
                    let out = l.apply(&unit);
                    assert!(trace(&out).norm() < 1e-12);
                    let herm = l.apply(&crate::matrix::dagger(&unit));
                    assert!(fro_norm(&(&herm - &crate::matrix::dagger(&out))) < 1e-12);
                }
            }
        }
    }
}
