use std::f64::consts::PI;

use embedded_eigen::special::*;
use proptest::prelude::*;

/// `J_n(x) = (1/π) ∫_0^π cos(nt − x sin t) dt`, trapezoid rule (spectrally accurate here).
fn bessel_integral(n: u32, x: f64) -> f64 {
    let m = 4096 + 4 * x as usize;
    let h = PI / m as f64;
    let mut s = 0.0;
    for k in 0..=m {
        let t = k as f64 * h;
        let w = if k == 0 || k == m { 0.5 } else { 1.0 };
        s += w * (n as f64 * t - x * t.sin()).cos();
    }
    s * h / PI
}

#[test]
fn sphere_transform_closed_form_d3() {
    for s in [0.1, 1.0, 10.0] {
        let exact = 4.0 * PI * f64::sin(s) / s;
        assert!((surface_measure_ft(3, 1.0, s) - exact).abs() < 1e-10);
    }
    assert!((surface_measure_ft(3, 1.0, 0.0) - 4.0 * PI).abs() < 1e-14);
    assert!((surface_measure_ft(2, 1.0, 0.0) - 2.0 * PI).abs() < 1e-14);
    assert!((surface_measure_ft(4, 1.0, 0.0) - sphere_area(4)).abs() < 1e-13);
    // radius scaling: σ_r has mass r^{d-1}|S^{d-1}|
    assert!((surface_measure_ft(3, 2.0, 0.0) - 16.0 * PI).abs() < 1e-12);
    assert!((surface_measure_ft(3, 2.0, 1.5) - 4.0 * 4.0 * PI * f64::sin(3.0) / 3.0).abs() < 1e-10);
}

#[test]
fn d2_transform_has_half_power_decay() {
    let mut peak: f64 = 0.0;
    for k in 0..2000 {
        let s = 20.0 + k as f64 * 5.0;
        let v = surface_measure_ft(2, 1.0, s) * s.sqrt();
        peak = peak.max(v.abs());
        // cosine asymptotic 2√(2π)cos(s − π/4)
        let asym = 2.0 * (2.0 * PI).sqrt() * (s - PI / 4.0).cos();
        assert!((v - asym).abs() < 0.1);
    }
    assert!(peak <= 2.0 * (2.0 * PI).sqrt() * 1.01);
}

#[test]
fn integer_orders_match_integral_representation() {
    for n in 0..4u32 {
        for &x in &[0.5, 3.0, 7.9, 8.1, 12.0, 25.0, 29.0, 31.0, 45.0, 100.0, 500.0] {
            let a = bessel_j(n as f64, x);
            let b = bessel_integral(n, x);
            assert!((a - b).abs() < 1e-10, "n={n} x={x}: {a} vs {b}");
        }
    }
}

#[test]
fn half_integer_orders_match_closed_forms() {
    for &x in &[0.01, 0.7, 5.0, 9.0, 20.0, 40.0, 1000.0, 9999.0] {
        let j12 = (2.0 / (PI * x)).sqrt() * x.sin();
        let j32 = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
        assert!((bessel_j(0.5, x) - j12).abs() < 1e-10, "x={x}");
        assert!((bessel_j(1.5, x) - j32).abs() < 1e-10, "x={x}");
    }
}

#[test]
fn large_argument_accuracy() {
    for &x in &[1234.5, 5000.0, 10000.0] {
        assert!((bessel_j(0.0, x) - bessel_integral(0, x)).abs() < 1e-10);
    }
}

proptest! {
    #[test]
    fn three_term_recurrence(x in 0.5f64..200.0, n in 1u32..4) {
        let nf = n as f64;
        let lhs = bessel_j(nf - 1.0, x) + bessel_j(nf + 1.0, x);
        let rhs = 2.0 * nf / x * bessel_j(nf, x);
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn scaled_form_is_continuous(t in 7.0f64..9.0) {
        let a = bessel_j_scaled(0.5, t);
        let b = bessel_j(0.5, t) / t.sqrt();
        prop_assert!((a - b).abs() < 1e-12);
    }
}
