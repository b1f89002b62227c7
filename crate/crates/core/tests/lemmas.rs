use llg_bdf3::lemmas::{
    check_all, check_boundary_extrapolation, check_operator_lemmas, check_projection_stability, check_telescope,
    check_telescope_sum, lhs_scalar, mirror_error, TelescopeCoefficients,
};
use proptest::prelude::*;

#[test]
fn pinned_coefficients_match_derivation() {
    let pinned = TelescopeCoefficients::pinned().unwrap();
    let derived = TelescopeCoefficients::derive().unwrap();
    assert!(pinned.residual() <= 1e-10);
    for (a, b) in pinned.alpha.iter().zip(&derived.alpha) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn telescope_at_zero_and_under_scaling() {
    let c = TelescopeCoefficients::pinned().unwrap();
    assert_eq!(c.rhs_scalar([0.0; 4]), 0.0);
    assert_eq!(lhs_scalar([0.0; 4]), 0.0);
    let e = [0.3, -1.1, 0.7, 2.0];
    let big = e.map(|v| v * 1e6);
    assert!((c.rhs_scalar(big) - 1e12 * c.rhs_scalar(e)).abs() <= 1e-12 * c.rhs_scalar(big).abs());
    assert!((c.rhs_scalar(big) - lhs_scalar(big)).abs() <= 1e-10 * 1e12);
}

#[test]
fn constant_sequence_satisfies_telescope() {
    // BDF3 weights sum to zero, so the left side vanishes on constants
    let c = TelescopeCoefficients::pinned().unwrap();
    assert!(lhs_scalar([1.0; 4]).abs() < 1e-15);
    assert!(c.rhs_scalar([1.0; 4]).abs() < 1e-12);
}

#[test]
fn telescope_on_fields() {
    let c = TelescopeCoefficients::pinned().unwrap();
    let reports = check_telescope(&c, 100, 5).unwrap();
    assert_eq!(reports.len(), 2);
    for r in &reports {
        assert!(r.pass, "{r:?}");
        assert_eq!(r.trials, 100);
    }
    assert!(check_telescope_sum(&c, 40, 5).unwrap().pass);
    assert!(check_telescope_sum(&c, 3, 5).is_err());
}

#[test]
fn operator_lemmas_hold() {
    for r in check_operator_lemmas(100, 11).unwrap() {
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn projection_stability_holds() {
    let r = check_projection_stability(200, 1).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.max_violation, 0.0);
}

#[test]
fn boundary_orders() {
    let reports = check_boundary_extrapolation().unwrap();
    assert!(reports.iter().all(|r| r.pass), "{reports:?}");
    // the constant probe is reproduced exactly
    assert_eq!(mirror_error(|_| 2.5, 16).unwrap(), 0.0);
}

#[test]
fn check_all_is_deterministic() {
    let a = check_all(30, 7).unwrap();
    let b = check_all(30, 7).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|r| r.pass));
    let ids: Vec<&str> = a.iter().map(|r| r.id.as_str()).collect();
    for want in ["telescope/1d", "telescope/3d"] {
        assert!(ids.contains(&want), "{ids:?}");
    }
}

proptest! {
    #[test]
    fn scalar_telescope_identity(e in proptest::array::uniform4(-10.0f64..10.0)) {
        let c = TelescopeCoefficients::pinned().unwrap();
        let scale: f64 = e.iter().map(|v| v * v).sum::<f64>().max(1.0);
        prop_assert!((lhs_scalar(e) - c.rhs_scalar(e)).abs() <= 1e-12 * scale);
    }
}
