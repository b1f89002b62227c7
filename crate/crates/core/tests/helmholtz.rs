use std::f64::consts::PI;

use llg_bdf3::grid::{Grid, ScalarField, VectorField};
use llg_bdf3::helmholtz::{laplacian4_eigenvalue, solve_reference, SpectralPlan};
use llg_bdf3::lemmas::random_field;
use llg_bdf3::ops::{inner_l2, l2_norm, mean};
use llg_bdf3::{Error, Vec3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_diff(a: &VectorField, b: &VectorField) -> f64 {
    let d = VectorField::linear_combination(&[(1.0, a), (-1.0, b)]).unwrap();
    l2_norm(&d) / l2_norm(b)
}

#[test]
fn spectral_matches_dense_for_small_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    for draw in 0..50 {
        for dim in [1, 3] {
            let n = 5 + draw % 4;
            let g = Grid::new(dim, n).unwrap();
            let a = rng.gen_range(0.5..20.0);
            let alpha = rng.gen_range(1.0..20.0);
            let rhs = random_field(g, &mut rng);
            let plan = SpectralPlan::new(g, a, alpha).unwrap();
            let u = plan.solve(&rhs).unwrap();
            let dense = solve_reference(g, a, alpha, &rhs).unwrap();
            worst = worst.max(rel_diff(&u, &dense));
        }
    }
    assert!(worst <= 1e-11, "worst relative difference {worst:e}");
}

#[test]
fn eigen_validation_passes_at_required_sizes() {
    for n in [5, 8, 16, 32] {
        for dim in [1, 3] {
            SpectralPlan::new(Grid::new(dim, n).unwrap(), 1.0, 1.0).unwrap();
        }
    }
}

#[test]
fn eigenvalue_closed_form() {
    for n in [5, 8, 16] {
        let h = 1.0 / n as f64;
        assert_eq!(laplacian4_eigenvalue(n, 0), 0.0);
        let lam: Vec<f64> = (0..n).map(|q| laplacian4_eigenvalue(n, q)).collect();
        assert!(lam.windows(2).all(|w| w[1] < w[0]));
        assert!(lam.iter().all(|&l| l >= -16.0 / (3.0 * h * h)));
    }
    let h = 0.5;
    assert!((laplacian4_eigenvalue(2, 1) + 7.0 / (3.0 * h * h)).abs() < 1e-12);
}

#[test]
fn constant_is_an_eigenvector() {
    let g = Grid::new(3, 6).unwrap();
    let c = Vec3::new(0.3, -1.0, 2.0);
    let a = 4.0;
    let plan = SpectralPlan::new(g, a, 3.0).unwrap();
    let u = plan.solve(&VectorField::constant(g, c * a)).unwrap();
    assert!((u.get([2, 3, 4]) - c).max_abs() < 1e-13);
    let r = solve_reference(g, a, 3.0, &VectorField::constant(g, c)).unwrap();
    assert!((r.get([0, 0, 0]) - c * (1.0 / a)).max_abs() < 1e-13);
}

#[test]
fn roundtrip_and_residual() {
    for n in [12, 40, 64] {
        let g = Grid::new(1, n).unwrap();
        let known = VectorField::from_fn(g, |x| Vec3::new((PI * x[0]).cos(), x[0] * x[0], (2.0 * x[0]).sin())).with_ghosts();
        let plan = SpectralPlan::new(g, 2.5, 10.0).unwrap();
        let mut rhs = plan.apply(&known).unwrap();
        rhs.fill_ghosts();
        let u = plan.solve(&rhs).unwrap();
        assert!(rel_diff(&u, &known) < 1e-12, "n={n}");
        assert!(plan.relative_residual(&u, &rhs).unwrap() < 1e-12);
        assert!(u.ghosts_filled());
    }
}

#[test]
fn centered_impulse_gives_symmetric_solution() {
    let g = Grid::new(1, 5).unwrap();
    let mut vals = vec![0.0; 5];
    vals[2] = 1.0;
    let rhs = ScalarField::from_interior(g, &vals).unwrap().with_ghosts();
    let u = solve_reference(g, 1.0, 1.0, &rhs).unwrap();
    for i in 0..5 {
        assert!((u.get([i, 0, 0]) - u.get([4 - i, 0, 0])).abs() < 1e-14);
    }
}

#[test]
fn dense_size_cap() {
    let g = Grid::new(3, 17).unwrap();
    assert!(matches!(solve_reference(g, 1.0, 1.0, &ScalarField::zeros(g)), Err(Error::TooLargeForDense { .. })));
}

#[test]
fn solve_is_self_adjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for dim in [1, 3] {
        let g = Grid::new(dim, 10).unwrap();
        let plan = SpectralPlan::new(g, 3.0, 7.0).unwrap();
        for _ in 0..10 {
            let f = random_field(g, &mut rng);
            let q = random_field(g, &mut rng);
            let lhs = inner_l2(&plan.solve(&f).unwrap(), &q).unwrap();
            let rhs = inner_l2(&f, &plan.solve(&q).unwrap()).unwrap();
            assert!((lhs - rhs).abs() <= 1e-11 * lhs.abs().max(1e-300), "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn solve_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = Grid::new(3, 8).unwrap();
    let plan = SpectralPlan::new(g, 11.0 / 6.0 * 100.0, 10.0).unwrap();
    let f = random_field(g, &mut rng);
    let q = random_field(g, &mut rng);
    let sum = VectorField::linear_combination(&[(1.0, &f), (1.0, &q)]).unwrap();
    let lhs = plan.solve(&sum).unwrap();
    let rhs = VectorField::linear_combination(&[(1.0, &plan.solve(&f).unwrap()), (1.0, &plan.solve(&q).unwrap())]).unwrap();
    assert!(rel_diff(&lhs, &rhs) < 1e-12);
}

#[test]
fn inverse_laplacian() {
    let n = 16;
    let g = Grid::new(1, n).unwrap();
    let plan = SpectralPlan::new(g, 1.0, 1.0).unwrap();

    let zero = ScalarField::zeros(g);
    assert_eq!(plan.inv_neg_laplacian(&zero).unwrap().max_abs(), 0.0);
    assert_eq!(plan.hminus1_norm(&zero).unwrap(), 0.0);

    let q = 3;
    let f = ScalarField::from_fn(g, |x| (PI * q as f64 * x[0]).cos()).with_ghosts();
    let psi = plan.inv_neg_laplacian(&f).unwrap();
    let lam = laplacian4_eigenvalue(n, q);
    for (c, _) in g.interior() {
        assert!((psi.get(c) - f.get(c) / -lam).abs() < 1e-14);
    }
    assert!(mean(&psi).abs() < 1e-15);

    let shifted = f.map(|v| v + 0.1);
    assert!(matches!(plan.inv_neg_laplacian(&shifted), Err(Error::NonzeroMean { .. })));
}

#[test]
fn hminus1_is_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for dim in [1, 3] {
        let g = Grid::new(dim, 8).unwrap();
        let plan = SpectralPlan::new(g, 1.0, 1.0).unwrap();
        for _ in 0..100 {
            let f = random_field(g, &mut rng);
            let m = mean(&f);
            let f0 = f.map(|v| v - m);
            let psi = plan.inv_neg_laplacian(&f0).unwrap();
            assert!(inner_l2(&psi, &f0).unwrap() >= 0.0);
        }
    }
}

#[test]
fn solve_cost_grows_with_size() {
    use std::time::Instant;
    let mut times = Vec::new();
    for n in [8, 32] {
        let g = Grid::new(3, n).unwrap();
        let plan = SpectralPlan::new(g, 10.0, 1.0).unwrap();
        let rhs = random_field(g, &mut ChaCha8Rng::seed_from_u64(n as u64));
        let t = Instant::now();
        for _ in 0..3 {
            plan.solve(&rhs).unwrap();
        }
        times.push(t.elapsed());
    }
    assert!(times[1] > times[0]);
}

#[test]
fn concurrent_solves_share_a_plan() {
    use rayon::prelude::*;
    let g = Grid::new(3, 8).unwrap();
    let plan = SpectralPlan::new(g, 5.0, 2.0).unwrap();
    let rhs: Vec<VectorField> = (0..4).map(|s| random_field(g, &mut ChaCha8Rng::seed_from_u64(s))).collect();
    let serial: Vec<VectorField> = rhs.iter().map(|r| plan.solve(r).unwrap()).collect();
    let parallel: Vec<VectorField> = rhs.par_iter().map(|r| plan.solve(r).unwrap()).collect();
    assert_eq!(serial, parallel);
}

#[test]
fn rejects_bad_parameters() {
    let g = Grid::new(1, 8).unwrap();
    assert!(SpectralPlan::new(g, 0.0, 1.0).is_err());
    assert!(SpectralPlan::new(g, 1.0, -1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_shifts_roundtrip(a in 0.5f64..50.0, alpha in 0.1f64..20.0, seed in 0u64..1000) {
        let g = Grid::new(1, 33).unwrap();
        let known = random_field(g, &mut ChaCha8Rng::seed_from_u64(seed));
        let plan = SpectralPlan::new(g, a, alpha).unwrap();
        let mut rhs = plan.apply(&known).unwrap();
        rhs.fill_ghosts();
        let u = plan.solve(&rhs).unwrap();
        prop_assert!(plan.backward_error(&u, &rhs).unwrap() < 1e-14);
    }
}
