use num_complex::Complex64 as C64;
use std::f64::consts::{LN_2, PI};
use tamelab::dynamical::{uni_distance, uni_distance_exact, IntervalSystem, Mobius};
use tamelab::error::Error;
use tamelab::source::SourceModel;
use tamelab::transfer::{
    dominant_eigenvalue, lambda_dominant, lambda_via_operator, operator_entropy, resolvent_norm_probe,
};

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[test]
fn good_class_reports() {
    let shift = IntervalSystem::binary_shift().check_good_class(32).unwrap();
    assert_eq!(shift.rho_hat, 0.5);
    assert_eq!(shift.a_hat, 0.0);
    assert!(shift.g1 && shift.g2 && shift.g3);
    let gauss = IntervalSystem::gauss().check_good_class(64).unwrap();
    assert!(gauss.g1 && gauss.rho_hat < 1.0);
    // Farey branches x/(x+1) and 1/(2-x) have slope 1 at the endpoints
    let farey =
        IntervalSystem::moebius(vec![Mobius::new(1.0, 0.0, 1.0, 1.0), Mobius::new(0.0, 1.0, -1.0, 2.0)]).unwrap();
    assert!(!farey.check_good_class(16).unwrap().g1);
}

#[test]
fn uni_quantities() {
    let shift = IntervalSystem::binary_shift();
    assert_eq!(uni_distance_exact(&shift.branch_map(0), &shift.branch_map(1)), 0.0);
    let g = IntervalSystem::gauss();
    let (h1, h2) = (g.branch(1), g.branch(2));
    assert!((uni_distance_exact(&h1.map, &h2.map) - 1.0 / 3.0).abs() < 1e-15);
    let grid = uni_distance(&h1, &h2, 10_000).unwrap();
    assert!(grid.lower_bound > 0.0 && grid.lower_bound <= 1.0 / 3.0 + 1e-12);
    assert_eq!(uni_distance_exact(&h1.map, &h1.map), 0.0);

    assert_eq!(shift.uni_probability_estimate(3, 0.5, 0).unwrap().probability, 1.0);
    let p = g.uni_probability_estimate(2, 0.5, 0).unwrap().probability;
    assert!(p > 0.0 && p < 1.0);
    let loose = g.uni_probability_estimate(2, 0.1, 0).unwrap().probability;
    assert!(loose >= p);
}

#[test]
fn diop_fixed_points() {
    let g = IntervalSystem::gauss();
    let d = g.diop_quantities(&[g.branch(1), g.branch(2)]).unwrap();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((d.fixed_points[0] - (phi - 1.0)).abs() < 1e-14);
    assert!((d.fixed_points[1] - (2f64.sqrt() - 1.0)).abs() < 1e-14);
    assert!((d.c[0] + 2.0 * phi.ln()).abs() < 1e-12);
    assert!((d.c[1] - 2.0 * (2f64.sqrt() - 1.0).ln()).abs() < 1e-12);
    let same = g.diop_quantities(&[g.branch(1), g.branch(1)]).unwrap();
    assert_eq!(same.ratio, 1.0);
}

#[test]
fn spectra() {
    let shift = IntervalSystem::binary_shift();
    let sp = dominant_eigenvalue(&shift, re(2.0), 8).unwrap();
    assert!((sp.lambda.re - 0.5).abs() < 1e-12);
    let g = IntervalSystem::gauss();
    assert!((dominant_eigenvalue(&g, re(1.0), 16).unwrap().lambda.re - 1.0).abs() < 1e-9);
    let a = lambda_dominant(&g, re(1.5), 16).unwrap();
    let b = lambda_dominant(&g, re(1.5), 24).unwrap();
    assert!((a - b).norm() < 1e-8);
    let h = operator_entropy(&g, 24).unwrap();
    assert!((h - PI * PI / (6.0 * LN_2)).abs() < 1e-3);
    for r in [2usize, 3, 5] {
        let sys = IntervalSystem::rary(r).unwrap();
        for s in [1.1, 2.0, 3.0] {
            let l = lambda_dominant(&sys, re(s), 12).unwrap();
            assert!((l.re - (r as f64).powf(1.0 - s)).abs() < 1e-10);
        }
    }
}

#[test]
fn quasi_inverse() {
    let shift = IntervalSystem::binary_shift();
    assert!((lambda_via_operator(&shift, re(2.0), 12).unwrap().value.re - 2.0).abs() < 1e-10);
    let g = IntervalSystem::gauss();
    let op = lambda_via_operator(&g, re(2.0), 24).unwrap().value;
    let series = SourceModel::Dynamical(g.clone())
        .lambda_series(re(2.0), 1e-8)
        .unwrap()
        .value;
    assert!((op - series).norm() < 1e-6);
    let pole = C64::new(1.0, 2.0 * PI / LN_2);
    assert!(matches!(
        lambda_via_operator(&shift, pole, 12),
        Err(Error::QuasiInversePole(_))
    ));
}

#[test]
fn probes() {
    let g = IntervalSystem::gauss();
    let a = resolvent_norm_probe(&g, 4.0, 12).unwrap().norm;
    let b = resolvent_norm_probe(&g, -4.0, 12).unwrap().norm;
    assert!(a.is_finite() && (a - b).abs() < 1e-8 * a);
    let shift = IntervalSystem::binary_shift();
    let t0 = 2.0 * PI / LN_2;
    let near = resolvent_norm_probe(&shift, t0 * (1.0 + 1e-9), 12).map_or(f64::INFINITY, |p| p.norm);
    assert!(near > 1e6);
}
