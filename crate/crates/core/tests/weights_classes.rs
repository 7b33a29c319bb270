use embedded_eigen::grid::{GridField, GridSpec};
use embedded_eigen::weights::*;
use proptest::prelude::*;

#[test]
fn thm1_weight_values() {
    let w = WeightSpec::thm1(3);
    assert_eq!(w.rho(&[0.0, 0.0, 0.0]), 1.0);
    assert!((w.rho(&[1.0, 0.0, 2.0]) - 6f64.sqrt()).abs() < 1e-15);
    assert_eq!(w.gamma, vec![0.5, 0.5, 1.0]);
}

#[test]
fn thm2_weight_values() {
    let w = WeightSpec::thm2(4, 1, 6.0).unwrap();
    assert!((w.rho(&[1.0, 1.0, 0.0, 1.0]) - 2.0).abs() < 1e-15);
    let g = &w.gamma;
    assert!((g[0] - 0.5).abs() < 1e-15 && (g[1] - 1.0 / 3.0).abs() < 1e-15 && g[3] == 1.0);
    assert!(WeightSpec::thm2(3, 2, 6.0).is_err());
}

#[test]
fn zero_scale_rejected() {
    assert!(ScaleParam::new(0).is_err());
    assert_eq!(ScaleParam::new(4).unwrap().h, 0.25);
}

#[test]
fn scale_point_example() {
    let y = scale_point(0.25, &[0.5, 1.0], &[1.0, 2.0]);
    assert_eq!(y, vec![0.5, 0.5]);
}

#[test]
fn envelope_constant_of_weight_power() {
    let spec = GridSpec::cube(2, 8.0, 64).unwrap();
    let w = WeightSpec::thm1(2);
    let f = GridField::sample_real(&spec, "f", |x| w.rho(x).powi(-4)).unwrap();
    let c = envelope_check(&f, &w, -4.0, 1).unwrap();
    assert_eq!(c[0].0, vec![0, 0]);
    assert!((c[0].1 - 1.0).abs() < 1e-14);
    assert!(c.iter().all(|(_, v)| v.is_finite()));
}

fn thm1_sum(x: &[f64]) -> f64 {
    let d = x.len();
    let p2: f64 = x[..d - 1].iter().map(|v| v * v).sum();
    p2 * p2 + x[d - 1] * x[d - 1]
}

proptest! {
    #[test]
    fn thm1_scaling_identity(h in 0.01f64..1.0, x in prop::collection::vec(-20.0f64..20.0, 3)) {
        let w = WeightSpec::thm1(3);
        let lhs = w.rho_sq(&scale_point(h, &w.gamma, &x));
        let rhs = 1.0 + h * h * thm1_sum(&x);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn thm2_scaling_identity(h in 0.01f64..1.0, x in prop::collection::vec(-20.0f64..20.0, 4)) {
        let w = WeightSpec::thm2(4, 1, 6.0).unwrap();
        let lhs = w.rho_sq(&scale_point(h, &w.gamma, &x));
        let pp = (x[1] * x[1] + x[2] * x[2]).powi(3);
        let rhs = 1.0 + h * h * (x[0].powi(4) + pp + x[3] * x[3]);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn weights_are_temperate(
        x in prop::collection::vec(-50.0f64..50.0, 3),
        y in prop::collection::vec(-50.0f64..50.0, 3),
    ) {
        for w in [WeightSpec::thm1(3), WeightSpec::thm2(3, 1, 6.0).unwrap(), WeightSpec::radial(3)] {
            prop_assert!(w.temperate_ratio(&x, &y) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn envelope_weight_dominates_n(n in 1.0f64..64.0, x in prop::collection::vec(-30.0f64..30.0, 3)) {
        let w = WeightSpec::thm1(3);
        prop_assert!(w.envelope_weight(n, &x) >= n);
        let p: f64 = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let expect = n + p * p + x[2].abs();
        prop_assert!((w.envelope_weight(n, &x) - expect).abs() <= 1e-9 * expect);
    }
}
