//! First-order spectral analysis of `L₀ + ε L₁` around a reversible `L₀`:
//! eigenvalue shifts of the coherence sector, the projection-obstruction
//! scan that decides whether purely imaginary eigenvalues can survive, and
//! the exact spectrum of the combined generator.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{LindbladError, Result};
use crate::generator::{build_generator, LindbladSpec, Superop};
use crate::matrix::{eig, spectral_norm, CMatrix, CVector};

/// First-order shifts `η_jk` of the coherence eigenvalues
/// `-i(E_j - E_k)`, with the accompanying negativity certificates.
#[derive(Debug, Clone)]
pub struct FirstOrderShifts {
    pub energies: Vec<f64>,
    /// `η_jk` for `j != k`; diagonal entries are zero and carry no meaning.
    pub eta: CMatrix,
    /// Certified upper bound on `Re η_jk`:
    /// `-½ Σ_α |<j|h_α|j> - <k|h_α|k>|²`.
    pub real_part_bound: Array2<f64>,
    /// Largest `Re η_jk` over the off-diagonal pairs.
    pub worst_real_part: f64,
}

fn require_diagonal_nondegenerate(spec: &LindbladSpec) -> Result<Vec<f64>> {
    let d = spec.dim;
    let h = &spec.hamiltonian;
    for i in 0..d {
        for j in 0..d {
            if i != j && h[[i, j]].norm() > 1e-12 {
                return Err(LindbladError::Unsupported(
                    "the reversible part must be supplied in its eigenbasis (diagonal H)".into(),
                ));
            }
        }
    }
    let energies: Vec<f64> = (0..d).map(|i| h[[i, i]].re).collect();
    for i in 0..d {
        for j in 0..i {
            if (energies[i] - energies[j]).abs() < 1e-10 {
                return Err(LindbladError::Unsupported(format!(
                    "degenerate level pair ({j}, {i}); first-order shift formulas do not apply"
                )));
            }
        }
    }
    Ok(energies)
}

/// First-order eigenvalue shifts `η_jk = <j| L₁[|j><k|] |k>` for a
/// non-degenerate diagonal `H₀`, together with the analytic bound
/// `Re η_jk <= -½ Σ_α |<j|h_α|j> - <k|h_α|k>|²`.
pub fn first_order_shifts(spec0: &LindbladSpec, l1spec: &LindbladSpec) -> Result<FirstOrderShifts> {
    let energies = require_diagonal_nondegenerate(spec0)?;
    let d = spec0.dim;
    if l1spec.dim != d {
        return Err(LindbladError::DimensionMismatch {
            expected: d,
            actual: l1spec.dim,
        });
    }
    let l1 = build_generator(l1spec);

    let mut eta: CMatrix = Array2::zeros((d, d));
    let mut bound = Array2::zeros((d, d));
    let mut worst = f64::NEG_INFINITY;
    for j in 0..d {
        for k in 0..d {
            if j == k {
                continue;
            }
            let mut unit: CMatrix = Array2::zeros((d, d));
            unit[[j, k]] = C64::new(1.0, 0.0);
            let shifted = l1.apply(&unit);
            eta[[j, k]] = shifted[[j, k]];
            worst = worst.max(eta[[j, k]].re);

            let mut b = 0.0;
            for h in &l1spec.jumps {
                b -= 0.5 * (h[[j, j]] - h[[k, k]]).norm_sqr();
            }
            bound[[j, k]] = b;
        }
    }
    Ok(FirstOrderShifts {
        energies,
        eta,
        real_part_bound: bound,
        worst_real_part: worst,
    })
}

/// Exhaustively scan the `2^d - 2` nonempty proper diagonal projections
/// `P = Σ_{j∈S} |j><j|` (the only projections commuting with a
/// non-degenerate diagonal `H`) and return the subsets on which every jump
/// operator commutes with `P` and restricts to a scalar,
/// `P h_α P = c_α P`. An empty result certifies that all nonzero
/// eigenvalues of the perturbed generator move strictly left.
pub fn obstruction_scan(spec: &LindbladSpec) -> Result<Vec<Vec<usize>>> {
    require_diagonal_nondegenerate(spec)?;
    let d = spec.dim;
    if d > 16 {
        return Err(LindbladError::Unsupported(
            "subset scan supports d <= 16".into(),
        ));
    }
    let tol = 1e-10;
    let mut hits = Vec::new();
    for mask in 1..((1u32 << d) - 1) {
        let subset: Vec<usize> = (0..d).filter(|&j| mask & (1 << j) != 0).collect();
        if qualifies(&subset, spec, tol) {
            hits.push(subset);
        }
    }
    Ok(hits)
}

fn qualifies(subset: &[usize], spec: &LindbladSpec, tol: f64) -> bool {
    let d = spec.dim;
    let inside = |j: usize| subset.contains(&j);
    for h in &spec.jumps {
        // [P, h] = 0: no matrix elements across the cut
        for i in 0..d {
            for j in 0..d {
                if inside(i) != inside(j) && h[[i, j]].norm() > tol {
                    return false;
                }
            }
        }
        // P h P = c P on the subset block
        let c = subset.iter().map(|&j| h[[j, j]]).sum::<C64>() / subset.len() as f64;
        for &i in subset {
            for &j in subset {
                let want = if i == j { c } else { C64::new(0.0, 0.0) };
                if (h[[i, j]] - want).norm() > tol {
                    return false;
                }
            }
        }
    }
    true
}

/// Full spectrum of a combined generator with the kernel multiplicity and
/// the spectral gap.
#[derive(Debug, Clone)]
pub struct SpectrumData {
    pub eigenvalues: CVector,
    /// Count of eigenvalues with `|λ| <= tol`.
    pub zero_multiplicity: usize,
    /// `-max{Re λ : |λ| > tol}`; positive when every nonzero eigenvalue
    /// lies strictly left of the imaginary axis.
    pub gap: f64,
}

/// Dense eigensolve of the superoperator matrix. Fails when some
/// eigenvalue sits visibly right of the imaginary axis, which contradicts
/// the contraction-semigroup property.
pub fn exact_spectrum(l_eps: &Superop, tol: f64) -> Result<SpectrumData> {
    let (eigenvalues, _) = eig(&l_eps.matrix)?;
    let scale = spectral_norm(&l_eps.matrix)?.max(1.0);
    let mut zero_multiplicity = 0;
    let mut max_re_nonzero = f64::NEG_INFINITY;
    let mut max_re_all = f64::NEG_INFINITY;
    for lam in eigenvalues.iter() {
        max_re_all = max_re_all.max(lam.re);
        if lam.norm() <= tol {
            zero_multiplicity += 1;
        } else {
            max_re_nonzero = max_re_nonzero.max(lam.re);
        }
    }
    if max_re_all > 100.0 * tol * scale {
        return Err(LindbladError::DegenerateKernel(format!(
            "eigenvalue with positive real part {max_re_all:e}; not a contraction semigroup"
        )));
    }
    let gap = if max_re_nonzero == f64::NEG_INFINITY {
        0.0
    } else {
        -max_re_nonzero
    };
    Ok(SpectrumData {
        eigenvalues,
        zero_multiplicity,
        gap,
    })
}

/// Bundle of the three analyses for a generator pair at one ε.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub shifts: FirstOrderShifts,
    pub obstruction_projections: Vec<Vec<usize>>,
    pub spectrum: SpectrumData,
    pub epsilon: f64,
}

/// Run the first-order shifts, the projection scan, and the exact spectrum
/// of `L₀ + ε L₁` in one pass.
pub fn stability_report(
    spec0: &LindbladSpec,
    l1spec: &LindbladSpec,
    epsilon: f64,
    tol: f64,
) -> Result<StabilityReport> {
    let shifts = first_order_shifts(spec0, l1spec)?;
    // the scan concerns the combined structure: H₀ with the perturbing jumps
    let merged = LindbladSpec::new(
        spec0.hamiltonian.clone(),
        l1spec.jumps.clone(),
        "scan-input",
    )?;
    let obstruction_projections = obstruction_scan(&merged)?;
    let l0 = build_generator(spec0);
    let l1 = build_generator(l1spec);
    let l_eps = crate::generator::combine(&l0, &l1, epsilon)?;
    let spectrum = exact_spectrum(&l_eps, tol)?;
    Ok(StabilityReport {
        shifts,
        obstruction_projections,
        spectrum,
        epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::combine;
    use crate::scenarios::{self, Flavor};
    use crate::testutil::c;
    use ndarray::arr1;

    #[test]
    fn reset_jumps_give_unit_decay_rate() {
        // h_α = |ψ><α| on d = 2: η_12 = -1
        let sc = scenarios::example_perturbed_hamiltonian(&[0.0, 1.0], &[c(0.6, 0.0), c(0.0, 0.8)])
            .unwrap();
        let shifts = first_order_shifts(&sc.l0, &sc.l1).unwrap();
        assert!((shifts.eta[[0, 1]] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((shifts.eta[[1, 0]] - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn equal_real_diagonals_sit_on_the_bound() {
        // jumps diagonal with equal real diagonal entries: Re η_jk = 0 and
        // the bound is 0 (equality case)
        let h0 = Array2::from_diag(&arr1(&[c(0.0, 0.0), c(1.0, 0.0)]));
        let spec0 = LindbladSpec::new(h0, vec![], "h0").unwrap();
        let jump = Array2::from_diag(&arr1(&[c(0.7, 0.0), c(0.7, 0.0)]));
        let l1spec =
            LindbladSpec::new(Array2::zeros((2, 2)), vec![jump], "diagonal-jumps").unwrap();
        let shifts = first_order_shifts(&spec0, &l1spec).unwrap();
        assert!(shifts.eta[[0, 1]].re.abs() < 1e-13);
        assert!(shifts.real_part_bound[[0, 1]].abs() < 1e-13);
    }

    #[test]
    fn shift_bound_holds_on_random_dissipators() {
        for seed in 0..10 {
            let sc = scenarios::random_instance(4, 2, 100 + seed, Flavor::HamiltonianPlusDissipator)
                .unwrap();
            let shifts = first_order_shifts(&sc.l0, &sc.l1).unwrap();
            for j in 0..4 {
                for k in 0..4 {
                    if j != k {
                        assert!(
                            shifts.eta[[j, k]].re <= shifts.real_part_bound[[j, k]] + 1e-12,
                            "seed {seed} pair ({j},{k}): {} > {}",
                            shifts.eta[[j, k]].re,
                            shifts.real_part_bound[[j, k]]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn shifts_match_exact_eigenvalues_to_first_order() {
        // |λ_jk(ε) - (-i(E_j - E_k) + ε η_jk)| <= 10 ε² at ε = 1e-4
        let sc = scenarios::random_instance(4, 2, 17, Flavor::HamiltonianPlusDissipator).unwrap();
        let shifts = first_order_shifts(&sc.l0, &sc.l1).unwrap();
        let eps = 1e-4;
        let l0 = build_generator(&sc.l0);
        let l1 = build_generator(&sc.l1);
        let l_eps = combine(&l0, &l1, eps).unwrap();
        let spectrum = exact_spectrum(&l_eps, 1e-8).unwrap();
        let energies = &shifts.energies;
        for j in 0..4 {
            for k in 0..4 {
                if j == k {
                    continue;
                }
                let predicted =
                    C64::new(0.0, -(energies[j] - energies[k])) + shifts.eta[[j, k]] * eps;
                let best = spectrum
                    .eigenvalues
                    .iter()
                    .map(|lam| (lam - predicted).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(best <= 10.0 * eps * eps, "pair ({j},{k}) error {best:e}");
            }
        }
    }

    #[test]
    fn scan_is_empty_for_reset_jumps() {
        // h_α = |ψ><α|: only P = 1 commutes with every jump
        let sc = scenarios::example_perturbed_hamiltonian(
            &[0.0, 1.0, 2.2, 3.4],
            &[c(0.5, 0.0), c(0.5, 0.1), c(-0.3, 0.4), c(0.2, -0.45)],
        )
        .unwrap();
        let hits = obstruction_scan(&scenarios_l1_with_h0(&sc)).unwrap();
        assert!(hits.is_empty(), "unexpected projections {hits:?}");
    }

    #[test]
    fn scalar_jumps_qualify_every_subset() {
        let h0 = Array2::from_diag(&arr1(&[c(0.0, 0.0), c(1.0, 0.0), c(2.5, 0.0)]));
        let jump = crate::matrix::identity(3).mapv(|z| z * c(0.8, 0.3));
        let spec = LindbladSpec::new(h0, vec![jump], "scalar").unwrap();
        let hits = obstruction_scan(&spec).unwrap();
        assert_eq!(hits.len(), (1 << 3) - 2);
    }

    #[test]
    fn block_scalar_jump_is_detected() {
        // h = c·I on the first block ⊕ generic on the second: the block-1
        // projection qualifies
        let h0 = Array2::from_diag(&arr1(&[
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(2.2, 0.0),
            c(3.4, 0.0),
        ]));
        let mut h: CMatrix = Array2::zeros((4, 4));
        h[[0, 0]] = c(0.4, 0.1);
        h[[1, 1]] = c(0.4, 0.1);
        h[[2, 2]] = c(0.9, 0.0);
        h[[2, 3]] = c(0.2, 0.5);
        h[[3, 2]] = c(-0.1, 0.3);
        h[[3, 3]] = c(-0.2, 0.2);
        let spec = LindbladSpec::new(h0, vec![h], "block").unwrap();
        let hits = obstruction_scan(&spec).unwrap();
        assert!(hits.contains(&vec![0, 1]), "hits: {hits:?}");
        assert!(!hits.contains(&vec![2, 3]));
        assert!(!hits.contains(&vec![0, 2]));
    }

    #[test]
    fn degenerate_hamiltonian_is_refused() {
        let h0 = Array2::from_diag(&arr1(&[c(1.0, 0.0), c(1.0, 0.0)]));
        let spec = LindbladSpec::new(h0, vec![], "degenerate").unwrap();
        assert!(matches!(
            obstruction_scan(&spec),
            Err(LindbladError::Unsupported(_))
        ));
    }

    #[test]
    fn reset_spectrum_is_zero_and_minus_one() {
        let sc = scenarios::example_reset(&[c(0.6, 0.0), c(0.0, 0.48), c(0.64, 0.0)]).unwrap();
        let l = build_generator(&sc.l0);
        let spectrum = exact_spectrum(&l, 1e-8).unwrap();
        assert_eq!(spectrum.zero_multiplicity, 1);
        assert!((spectrum.gap - 1.0).abs() < 1e-10);
        for lam in spectrum.eigenvalues.iter() {
            let near_zero = lam.norm() <= 1e-8;
            let near_minus_one = (lam + C64::new(1.0, 0.0)).norm() <= 1e-8;
            assert!(near_zero || near_minus_one, "unexpected eigenvalue {lam}");
        }
    }

    #[test]
    fn hamiltonian_spectrum_is_imaginary_with_zero_gap() {
        let sc = scenarios::example_hamiltonian(&[0.0, 1.0, 2.5, 4.5]).unwrap();
        let l = build_generator(&sc.l0);
        let spectrum = exact_spectrum(&l, 1e-8).unwrap();
        assert_eq!(spectrum.zero_multiplicity, 4);
        assert!(spectrum.gap.abs() < 1e-10);
        for lam in spectrum.eigenvalues.iter() {
            assert!(lam.re.abs() < 1e-10);
        }
    }

    #[test]
    fn bipartite_perturbed_spectrum_has_unique_kernel_and_gap() {
        let sc = scenarios::example_bipartite_default();
        let l0 = build_generator(&sc.l0);
        let l1 = build_generator(&sc.l1);
        let l_eps = combine(&l0, &l1, 1e-2).unwrap();
        let spectrum = exact_spectrum(&l_eps, 1e-8).unwrap();
        assert_eq!(spectrum.zero_multiplicity, 1);
        assert!(spectrum.gap > 0.0);
    }

    #[test]
    fn spectrum_closed_under_conjugation() {
        let sc = scenarios::random_instance(3, 2, 23, Flavor::Generic).unwrap();
        let l0 = build_generator(&sc.l0);
        let l1 = build_generator(&sc.l1);
        let l_eps = combine(&l0, &l1, 0.3).unwrap();
        let spectrum = exact_spectrum(&l_eps, 1e-8).unwrap();
        for lam in spectrum.eigenvalues.iter() {
            let conj_present = spectrum
                .eigenvalues
                .iter()
                .any(|mu| (mu - lam.conj()).norm() < 1e-8);
            assert!(conj_present, "conjugate of {lam} missing");
        }
    }

    #[test]
    fn empty_scan_implies_unique_kernel_with_gap() {
        // a-posteriori check of the spectral conclusion at ε = 1e-2
        for seed in [31u64, 32, 33] {
            let sc =
                scenarios::random_instance(3, 2, seed, Flavor::HamiltonianPlusDissipator).unwrap();
            let hits = obstruction_scan(&scenarios_l1_with_h0(&sc)).unwrap();
            if !hits.is_empty() {
                continue;
            }
            let l0 = build_generator(&sc.l0);
            let l1 = build_generator(&sc.l1);
            let l_eps = combine(&l0, &l1, 1e-2).unwrap();
            let spectrum = exact_spectrum(&l_eps, 1e-8).unwrap();
            assert_eq!(spectrum.zero_multiplicity, 1, "seed {seed}");
            assert!(spectrum.gap > 0.0, "seed {seed}");
        }
    }

    // the scan needs the jumps together with the diagonal H₀ they perturb
    fn scenarios_l1_with_h0(sc: &scenarios::Scenario) -> LindbladSpec {
        LindbladSpec::new(
            sc.l0.hamiltonian.clone(),
            sc.l1.jumps.clone(),
            "combined-for-scan",
        )
        .unwrap()
    }
}
