use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use symcap::linalg::{block_diag, exp_sj, gaussian_matrix, random_orthogonal, rotation2};
use symcap::symplectic::{random_symplectic, symplectic_violation, t_psi_a_det};
use symcap::{Matrix, SymplecticMap};

fn invertible(n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let a = Matrix::identity(n, n) + gaussian_matrix(n, n, &mut rng) * 0.7;
        if a.clone().singular_values().min() > 0.2 {
            return a;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn determinant_route_agrees(seed in any::<u64>(), n in 1usize..4) {
        let a = invertible(n, seed);
        let t = SymplecticMap::from_a(&a).unwrap().t_psi().unwrap().value;
        let d = t_psi_a_det(&a).unwrap().value;
        prop_assert!((t - d).abs() < 1e-8, "{t} vs {d}");
    }

    #[test]
    fn rotation_angle_is_t(theta in 0.05..PI) {
        let t = SymplecticMap::from_a(&rotation2(theta)).unwrap().t_psi().unwrap().value;
        prop_assert!((t - theta).abs() < 1e-8);
    }

    #[test]
    fn smallest_angle_of_block_rotation(a in 0.1..PI, b in 0.1..PI) {
        let m = block_diag(&[rotation2(a), rotation2(b)]);
        let t = SymplecticMap::from_a(&m).unwrap().t_psi().unwrap().value;
        prop_assert!((t - a.min(b)).abs() < 1e-8);
    }

    #[test]
    fn t_is_unitary_conjugation_invariant(seed in any::<u64>(), s in 0.0..TAU) {
        // unitary maps commute with J, so det(Psi - e^{sJ}) is unchanged
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = SymplecticMap::new(random_symplectic(2, &mut rng)).unwrap();
        let q = SymplecticMap::from_a(&random_orthogonal(2, &mut rng)).unwrap();
        let phi = q.matrix() * exp_sj(2, s);
        let t = psi.t_psi().unwrap().value;
        let tc = psi.conjugate(&phi).unwrap().t_psi().unwrap().value;
        prop_assert!((t - tc).abs() < 1e-6, "{t} vs {tc}");
    }

    #[test]
    fn twisted_lift_is_symplectic(seed in any::<u64>(), n in 1usize..4) {
        let psi = SymplecticMap::from_a(&invertible(n, seed)).unwrap();
        prop_assert!(symplectic_violation(psi.matrix()) < 1e-9);
    }
}

#[test]
fn identity_and_antipodal() {
    for n in 1..=3 {
        assert!((SymplecticMap::identity(n).t_psi().unwrap().value - 2.0 * PI).abs() < 1e-8);
        let minus = SymplecticMap::from_a(&(-Matrix::identity(n, n))).unwrap();
        assert!((minus.t_psi().unwrap().value - PI).abs() < 1e-8);
    }
}

#[test]
fn non_symplectic_matrix_is_rejected() {
    let m = Matrix::from_diagonal_element(2, 2, 2.0);
    assert!(SymplecticMap::new(m).is_err());
}
