use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use tenfold_core::linalg::{max_abs, orthonormalize, projector_distance, subspace_intersection_dim, CMatrix, Tolerances};
use tenfold_core::sampling;
use tenfold_core::symplectic::{
    canonical_split, crossing_dim, is_lagrangian, plane_to_unitary, unitary_to_plane, CanonicalSplit, LagrangianPlane,
    LerayUnitary, SymplecticForm,
};

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Either the standard form or `i V diag(±s) V*` with `N` positive entries.
fn random_form(n: usize, rng: &mut StdRng) -> SymplecticForm {
    if rng.random::<bool>() {
        return SymplecticForm::standard(n);
    }
    let v = sampling::random_unitary(2 * n, rng);
    let d = DVector::from_iterator(
        2 * n,
        (0..2 * n).map(|k| {
            let s = rng.random_range(0.5..2.0);
            Complex64::new(0.0, if k < n { s } else { -s })
        }),
    );
    SymplecticForm::new(&v * CMatrix::from_diagonal(&d) * v.adjoint(), &tol()).unwrap()
}

fn leray(split: &Arc<CanonicalSplit>, u: CMatrix) -> LerayUnitary {
    LerayUnitary::new(split.clone(), u, &tol()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitary_round_trip(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = StdRng::seed_from_u64(seed);
        let split = canonical_split(&random_form(n, &mut rng), &tol()).unwrap();
        let u = leray(&split, sampling::random_unitary(n, &mut rng));
        let plane = unitary_to_plane(&u, &tol()).unwrap();
        prop_assert!(plane.isotropy_defect() < 1e-10);
        let back = plane_to_unitary(&plane, &split, &tol()).unwrap();
        prop_assert!(max_abs(&(back.matrix() - u.matrix())) < 1e-10);
    }

    /// Planes built directly from an eigendecomposition of `−iJ`, independent
    /// of the canonical split.
    #[test]
    fn plane_round_trip(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = StdRng::seed_from_u64(seed);
        let form = random_form(n, &mut rng);
        let split = canonical_split(&form, &tol()).unwrap();
        let (vals, vecs) = tenfold_core::linalg::hermitian_eig(&(form.matrix() * Complex64::new(0.0, -1.0)), &tol()).unwrap();
        prop_assert!(vals[..n].iter().all(|&v| v < 0.0) && vals[n..].iter().all(|&v| v > 0.0));
        let v = vecs.columns();
        let neg = v.columns(0, n).into_owned();
        let pos = v.columns(n, n).into_owned();
        let a_neg = DVector::from_iterator(n, vals[..n].iter().map(|&x| Complex64::new((-x).sqrt(), 0.0)));
        let a_pos = DVector::from_iterator(n, vals[n..].iter().map(|&x| Complex64::new(x.sqrt(), 0.0)));
        // x ∈ K₊ with ⟨x, −iJ x⟩ = |a|², matched by y ∈ K₋ of equal weight.
        let w = sampling::random_unitary(n, &mut rng);
        let x = &pos * CMatrix::from_diagonal(&a_pos.map(|z| z.inv()));
        let y = &neg * CMatrix::from_diagonal(&a_neg.map(|z| z.inv())) * w;
        let plane = LagrangianPlane::from_span(&(x + y), &form, &tol()).unwrap();
        let u = plane_to_unitary(&plane, &split, &tol()).unwrap();
        let again = unitary_to_plane(&u, &tol()).unwrap();
        prop_assert!(projector_distance(plane.frame(), again.frame()).unwrap() < 1e-9);
    }

    #[test]
    fn crossing_matches_intersection(seed in any::<u64>(), n in 1usize..7, k in 0usize..7) {
        let mut rng = StdRng::seed_from_u64(seed);
        let k = k.min(n);
        let split = canonical_split(&random_form(n, &mut rng), &tol()).unwrap();
        let ua = sampling::random_unitary(n, &mut rng);
        let v = sampling::random_unitary(n, &mut rng);
        let phases = DVector::from_iterator(
            n,
            (0..n).map(|j| if j < k { Complex64::new(1.0, 0.0) } else { Complex64::from_polar(1.0, rng.random_range(0.3..6.0)) }),
        );
        let x = &v * CMatrix::from_diagonal(&phases) * v.adjoint();
        let (a, b) = (leray(&split, ua.clone()), leray(&split, x.adjoint() * ua));
        let ab = crossing_dim(&a, &b, &tol()).unwrap();
        prop_assert_eq!(ab, k);
        prop_assert_eq!(crossing_dim(&b, &a, &tol()).unwrap(), ab);
        let pa = unitary_to_plane(&a, &tol()).unwrap();
        let pb = unitary_to_plane(&b, &tol()).unwrap();
        prop_assert_eq!(subspace_intersection_dim(pa.frame(), pb.frame(), &tol()).unwrap(), ab);
    }

    #[test]
    fn random_spans_are_not_lagrangian(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = StdRng::seed_from_u64(seed);
        let form = random_form(n, &mut rng);
        let f = orthonormalize(&sampling::random_complex(2 * n, n, &mut rng), &tol()).unwrap();
        prop_assert!(!is_lagrangian(&f, &form, &tol()).unwrap().lagrangian);
    }
}

#[test]
fn split_blocks_are_consistent() {
    let mut rng = StdRng::seed_from_u64(17);
    for n in 1..6 {
        let split = canonical_split(&random_form(n, &mut rng), &tol()).unwrap();
        assert_eq!((split.n_plus(), split.n_minus()), (n, n));
        assert!(split.block_residual() < 1e-10);
    }
}
