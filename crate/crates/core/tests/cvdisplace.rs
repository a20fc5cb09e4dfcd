use covml::cvdisplace::{density_normalization, displacement, fitted_width, run_scenario, CvKind, CvScenario, FockSpace};
use covml::linalg::c;
use covml::Error;

#[test]
fn cutoff_below_minimum_is_rejected() {
    assert!(FockSpace::new(7).is_err());
    assert!(FockSpace::new(8).is_ok());
}

#[test]
fn displacement_outside_validity_region() {
    let space = FockSpace::new(16).unwrap();
    assert!(displacement(c(2.0, 0.0), &space).is_ok());
    assert!(matches!(displacement(c(2.0, 0.1), &space), Err(Error::Range(..))));
}

#[test]
fn squeezing_parameter_range() {
    assert!(CvScenario::new(CvKind::Squeezed { x: 1.0 }, 40).is_err());
    assert!(CvScenario::new(CvKind::Squeezed { x: -0.1 }, 40).is_err());
}

#[test]
fn grid_outside_region_is_rejected() {
    let grid = vec![c(0.0, 0.0), c(1.5, 0.0)];
    assert!(CvScenario::with_grid(CvKind::Identical, 8, c(0.5, 0.0), grid).is_err());
}

#[test]
fn small_cutoff_flags_truncation() {
    let r = run_scenario(&CvScenario::new(CvKind::Identical, 20).unwrap()).unwrap();
    assert!(!r.flagged_points.is_empty());
    let r = run_scenario(&CvScenario::new(CvKind::Identical, 30).unwrap()).unwrap();
    assert!(r.flagged_points.is_empty());
}

fn likelihood(kind: CvKind, cutoff: usize) -> f64 {
    run_scenario(&CvScenario::new(kind, cutoff).unwrap()).unwrap().likelihood
}

#[test]
fn values_are_stable_between_cutoffs() {
    for kind in [CvKind::Identical, CvKind::Conjugated, CvKind::Squeezed { x: 0.5 }] {
        let (a, b) = (
            run_scenario(&CvScenario::new(kind, 30).unwrap()).unwrap(),
            run_scenario(&CvScenario::new(kind, 40).unwrap()).unwrap(),
        );
        assert!((a.likelihood - b.likelihood).abs() < 1e-3, "{kind:?}");
        for (p, q) in a.grid.iter().zip(&b.grid) {
            assert!((p.density - q.density).abs() < 1e-3, "{kind:?} at {:?}", p.alpha_hat);
        }
    }
}

#[test]
fn conjugated_beats_identical() {
    for cutoff in [16, 30, 40] {
        assert!(likelihood(CvKind::Conjugated, cutoff) > likelihood(CvKind::Identical, cutoff));
    }
}

#[test]
fn densities_integrate_to_one() {
    for kind in [CvKind::Identical, CvKind::Conjugated] {
        let total = density_normalization(kind, 30, 3.0, 24, 32).unwrap();
        assert!((total - 1.0).abs() < 2e-2, "{kind:?}: {total}");
    }
}

#[test]
fn conjugated_variance_is_half() {
    let w_id = fitted_width(&run_scenario(&CvScenario::new(CvKind::Identical, 40).unwrap()).unwrap());
    let w_conj = fitted_width(&run_scenario(&CvScenario::new(CvKind::Conjugated, 40).unwrap()).unwrap());
    assert!((w_conj / w_id - 0.5).abs() < 0.01, "{w_conj} / {w_id}");
}

#[test]
fn squeezing_increases_likelihood() {
    let values: Vec<f64> = (0..=6).map(|k| likelihood(CvKind::Squeezed { x: k as f64 / 10.0 }, 40)).collect();
    assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
}
