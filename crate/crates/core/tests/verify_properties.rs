use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::SeedableRng;

use tenfold_core::linalg::{hermitian_eig, CMatrix, Tolerances};
use tenfold_core::models::PiecewiseDiracProfile;
use tenfold_core::sampling;
use tenfold_core::symmetry::CartanClass;
use tenfold_core::verify::{count_near_zero_localized, discretize_dirac_junction, DiscretizationSpec, OracleReport};

fn negative_count(w: &CMatrix) -> usize {
    let (vals, _) = hermitian_eig(w, &Tolerances::default()).unwrap();
    vals.iter().filter(|&&l| l < 0.0).count()
}

fn oracle(profile: &PiecewiseDiracProfile, spec: &DiscretizationSpec) -> OracleReport {
    count_near_zero_localized(&discretize_dirac_junction(profile, spec).unwrap(), spec).unwrap()
}

/// Chiral junctions at default resolution: the number of localized near-zero
/// modes is the jump in the number of negative eigenvalues of `W`.
#[test]
fn chiral_suite_matches_index_jump() {
    let mut rng = StdRng::seed_from_u64(0xA111);
    let spec = DiscretizationSpec::default();
    let mut mismatches = Vec::new();
    for case in 0..50 {
        let n = 1 + case % 4;
        let wl = sampling::dirac_potential(CartanClass::AIII, n, 0.55, 2.0, None, &mut rng).unwrap();
        let wr = sampling::dirac_potential(CartanClass::AIII, n, 0.55, 2.0, None, &mut rng).unwrap();
        let expected = negative_count(&wr).abs_diff(negative_count(&wl));
        let rep = oracle(&PiecewiseDiracProfile::hard_wall(wl, wr).unwrap(), &spec);
        if rep.localized_count != expected {
            mismatches.push((case, n, expected, rep.localized_count));
        }
        // Anything counted lives in the centre; the outer walls carry the rest.
        assert!(rep.localized_count <= rep.eigenvalues_in_window.len());
    }
    assert!(mismatches.is_empty(), "(case, N, expected, observed): {mismatches:?}");
}

/// A single mass wall on a hard-walled box: each outer wall hosts a near-zero
/// end mode, and only the interface mode is counted.
#[test]
fn outer_wall_modes_are_not_counted() {
    let one = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    let spec = DiscretizationSpec::default();
    let rep = oracle(&PiecewiseDiracProfile::hard_wall(one.clone(), -one.clone()).unwrap(), &spec);
    assert_eq!(rep.localized_count, 1);
    let rows = rep.spectrum_rows();
    let central = rows.iter().filter(|r| r.2 >= 0.9).count();
    let outer = rows.iter().filter(|r| r.2 < 0.1).count();
    assert_eq!(central, 1, "{rows:?}");
    assert!(outer >= 1, "{rows:?}");
    // Uniform mass: the end modes are all there is.
    let rep = oracle(&PiecewiseDiracProfile::constant(-one).unwrap(), &spec);
    assert_eq!(rep.localized_count, 0);
}

/// Bound state of a phase jump in a complex mass sits away from zero; its
/// energy must settle as the grid is refined.
#[test]
fn refinement_converges() {
    let theta = std::f64::consts::PI - 0.4;
    let wl = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    let wr = CMatrix::from_element(1, 1, Complex64::from_polar(1.0, theta));
    let profile = PiecewiseDiracProfile::hard_wall(wl, wr).unwrap();
    let energies: Vec<Vec<f64>> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&h| {
            let spec = DiscretizationSpec { half_length: 12.0, h, energy_window: Some(0.5), ..Default::default() };
            let mut e = oracle(&profile, &spec).localized_energies;
            e.sort_by(f64::total_cmp);
            e
        })
        .collect();
    assert!(!energies[0].is_empty());
    assert!(energies.iter().all(|e| e.len() == energies[0].len()), "{energies:?}");
    for k in 0..energies[0].len() {
        let d1 = (energies[1][k] - energies[0][k]).abs();
        let d2 = (energies[2][k] - energies[1][k]).abs();
        assert!(d2 < 4.0 * d1 || d2 < 1e-10, "mode {k}: changes {d1:.3e} then {d2:.3e}");
    }
}
