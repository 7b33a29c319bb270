use embedded_eigen::grid::*;
use embedded_eigen::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn max_diff(a: &GridField, b: &GridField) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn gaussian_laplacian_identity() {
    let spec = GridSpec::cube(2, 12.0, 128).unwrap();
    let g = GridField::sample_real(&spec, "g", |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp()).unwrap();
    let lap = apply_multiplier(&g, |xi| c(xi.iter().map(|v| v * v).sum())).unwrap();
    let exact = GridField::sample_real(&spec, "e", |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        (2.0 - r2) * (-r2 / 2.0).exp()
    })
    .unwrap();
    assert!(max_diff(&lap, &exact) <= 1e-9);
}

#[test]
fn round_trip_identity() {
    let spec = GridSpec::new(vec![5.0, 7.0, 3.0], vec![32, 64, 16], vec![0.5, 0.0, 0.25]).unwrap();
    let f = GridField::sample(&spec, "f", |x| Complex64::new((x[0] * x[1]).sin(), (-x[2] * x[2]).exp())).unwrap();
    let g = apply_multiplier(&f, |_| c(1.0)).unwrap();
    assert!(max_diff(&f, &g) <= 1e-13);
}

#[test]
fn plane_wave_is_resonant_eigenfunction() {
    let spec = GridSpec::cube(2, 4.0 * std::f64::consts::PI, 64).unwrap();
    let f = GridField::sample(&spec, "e", |x| Complex64::from_polar(1.0, x[1])).unwrap();
    let r = apply_multiplier(&f, |xi| c(xi[0] * xi[0] + xi[1] * xi[1] - 1.0)).unwrap();
    assert!(r.max_abs() <= 1e-12);
}

#[test]
fn offset_sampling_avoids_sine_zeros() {
    let spec = GridSpec::new(vec![4.0 * std::f64::consts::PI], vec![128], vec![0.5]).unwrap();
    let f = GridField::sample_real(&spec, "s", |x| x[0].sin()).unwrap();
    let min = f.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    assert!(min > 0.05);
}

#[test]
fn lq_norms_of_simple_fields() {
    let spec = GridSpec::cube(2, 1.0, 16).unwrap();
    let one = GridField::sample_real(&spec, "1", |_| 1.0).unwrap();
    assert!((lq_norm(&one, 2.0) - 2.0).abs() < 1e-13);
    // ∫ (1+x²)^{-2} dx = π/2
    let spec = GridSpec::new(vec![200.0], vec![1 << 16], vec![0.0]).unwrap();
    let f = GridField::sample_real(&spec, "p", |x| 1.0 / (1.0 + x[0] * x[0])).unwrap();
    assert!((lq_norm(&f, 2.0) - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-3);
    let spec = GridSpec::cube(2, 3.0, 32).unwrap();
    let psi = GridField::sample_real(&spec, "psi", |x| (1.0 + x[0].powi(4) + x[1] * x[1]).powf(-0.5)).unwrap();
    assert_eq!(lq_norm(&psi, f64::INFINITY), 1.0);
}

#[test]
fn envelope_constant_cases() {
    let spec = GridSpec::cube(2, 5.0, 32).unwrap();
    let w = |x: &[f64]| 1.0 + x[0] * x[0] + x[1].abs();
    let f = GridField::sample_real(&spec, "f", |x| 1.0 / w(x)).unwrap();
    let e = envelope_constant(&f, w);
    assert!((e.c - 1.0).abs() < 1e-14);
    let z = GridField::zeros(&spec, 1, "z");
    assert_eq!(envelope_constant(&z, w).c, 0.0);
}

#[test]
fn ratio_guards() {
    let spec = GridSpec::cube(2, 6.0, 32).unwrap();
    let psi = GridField::sample_real(&spec, "psi", |x| (1.0 + x[0].powi(4) + x[1] * x[1]).powf(-1.0)).unwrap();
    let r = pointwise_ratio(&psi, &psi, 0.0).unwrap();
    assert!(r.mask.iter().all(|m| !m));
    assert!(r.ratio.values.iter().all(|v| (v - c(1.0)).norm() < 1e-15));
    let spec = GridSpec::new(vec![4.0 * std::f64::consts::PI, 6.0], vec![128, 32], vec![0.5, 0.0]).unwrap();
    let den = GridField::sample_real(&spec, "s", |x| x[0].sin() * (1.0 + x[1] * x[1]).powf(-1.0)).unwrap();
    let r = pointwise_ratio(&den, &den, 1e-3).unwrap();
    assert!(r.masked_fraction < 0.05);
    let tiny = GridField::sample_real(&spec, "t", |x| if x[1] > -4.0 { 0.0 } else { 1.0 }).unwrap();
    assert!(matches!(pointwise_ratio(&den, &tiny, 1e-6), Err(Error::AllMasked(_))));
}

#[test]
fn time_reversal_keeps_real_output() {
    let spec = GridSpec::cube(3, 4.0 * std::f64::consts::PI, 32).unwrap();
    let f = GridField::sample_real(&spec, "f", |x| x[0].sin() * (1.0 + x[0] * x[0] + x[1].powi(4) + x[2].powi(4)).powf(-2.0))
        .unwrap();
    let t = apply_multiplier(&f, |xi| c(xi.iter().map(|v| v * v).sum::<f64>().powi(2) - 1.0)).unwrap();
    let im = t.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    assert!(im <= 1e-10);
}

#[test]
fn plane_wave_conjugation() {
    let l = 4.0 * std::f64::consts::PI;
    let spec = GridSpec::cube(2, l, 64).unwrap();
    let psi = |x: &[f64]| (-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp();
    let u = GridField::sample(&spec, "u", |x| Complex64::from_polar(psi(x), x[1])).unwrap();
    let t = |xi: &[f64]| c(xi[0].powi(4) + xi[1] * xi[1] + 3.0 * xi[1]);
    let lhs = apply_multiplier(&u, t).unwrap();
    let p = GridField::sample_real(&spec, "p", psi).unwrap();
    let rhs = apply_multiplier(&p, |xi| t(&[xi[0], xi[1] + 1.0])).unwrap();
    let spec_pts = spec.clone();
    let mut x = vec![0.0; 2];
    let mut err: f64 = 0.0;
    for k in 0..spec_pts.len() {
        spec_pts.point(k, &mut x);
        err = err.max((lhs.values[k] - Complex64::from_polar(1.0, x[1]) * rhs.values[k]).norm());
    }
    assert!(err <= 1e-10);
}

#[test]
fn refined_grid_contains_coarse_points() {
    let spec = GridSpec::new(vec![3.0, 2.0], vec![16, 32], vec![0.5, 0.25]).unwrap();
    let (fine, map) = spec.refined().unwrap();
    let (mut x, mut y) = (vec![0.0; 2], vec![0.0; 2]);
    for (p, &q) in map.iter().enumerate() {
        spec.point(p, &mut x);
        fine.point(q, &mut y);
        assert!((x[0] - y[0]).abs() < 1e-14 && (x[1] - y[1]).abs() < 1e-14);
    }
}

#[test]
fn gf_round_trip_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GridSpec::new(vec![2.0, 3.0], vec![16, 32], vec![0.5, 0.0]).unwrap();
    let f = GridField::sample(&spec, "lab", |x| Complex64::new(x[0], -x[1])).unwrap();
    let p = dir.path().join("f.gf");
    f.write_gf(&p).unwrap();
    let g = GridField::read_gf(&p).unwrap();
    assert_eq!(g.spec, f.spec);
    assert_eq!(g.label, "lab");
    assert_eq!(g.values, f.values);
    let csv = dir.path().join("f.csv");
    f.write_csv(&csv).unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 16 * 32);
}

#[test]
fn trig_interpolation_of_band_limited_data() {
    let spec = GridSpec::new(vec![std::f64::consts::PI, std::f64::consts::PI], vec![16, 16], vec![0.5, 0.0]).unwrap();
    let f = GridField::sample_real(&spec, "f", |x| (2.0 * x[0]).cos() + (3.0 * x[1]).sin() * x[0].sin()).unwrap();
    let s = spectrum(&f);
    let v = trig_interpolate(&spec, &s, &[0.3, -1.1]);
    let exact = (0.6f64).cos() + (-3.3f64).sin() * (0.3f64).sin();
    assert!((v.re - exact).abs() < 1e-13 && v.im.abs() < 1e-13);
}

#[test]
fn matrix_multiplier_acts_per_frequency() {
    let spec = GridSpec::cube(1, std::f64::consts::PI, 32).unwrap();
    let f = GridField::sample_channels(&spec, 2, "s", |x, out| {
        out[0] = c(x[0].cos());
        out[1] = c(x[0].sin());
    })
    .unwrap();
    // [[0, D],[D, 0]] with D = -i d/dx: swaps and differentiates
    let g = apply_matrix_multiplier(&f, |xi, m| {
        m[0] = c(0.0);
        m[1] = c(xi[0]);
        m[2] = c(xi[0]);
        m[3] = c(0.0);
    })
    .unwrap();
    let mut x = vec![0.0];
    for p in 0..spec.len() {
        spec.point(p, &mut x);
        let a = Complex64::new(0.0, -1.0) * x[0].cos();
        let b = Complex64::new(0.0, 1.0) * x[0].sin();
        assert!((g.values[2 * p] - a).norm() < 1e-13);
        assert!((g.values[2 * p + 1] - b).norm() < 1e-13);
    }
}

fn small_field(seed: &[f64]) -> GridField {
    let spec = GridSpec::new(vec![3.0, 2.0], vec![16, 16], vec![0.0, 0.5]).unwrap();
    GridField::sample(&spec, "r", |x| {
        let mut v = Complex64::new(0.0, 0.0);
        for (k, s) in seed.iter().enumerate() {
            let kf = k as f64 + 1.0;
            v += Complex64::new(s * (-(x[0] - s).powi(2) / kf).exp(), s * (x[1] * kf / 3.0).sin());
        }
        v
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn multiplier_is_linear(a in prop::collection::vec(-2.0f64..2.0, 3), b in prop::collection::vec(-2.0f64..2.0, 3),
                            al in -3.0f64..3.0, be in -3.0f64..3.0) {
        let f = small_field(&a);
        let g = small_field(&b);
        let sym = |xi: &[f64]| Complex64::new(xi[0] * xi[0] + xi[1].powi(4), xi[1]);
        let comb = f.zip_with(&g, |x, y| x * al + y * be, "c").unwrap();
        let lhs = apply_multiplier(&comb, sym).unwrap();
        let fa = apply_multiplier(&f, sym).unwrap();
        let ga = apply_multiplier(&g, sym).unwrap();
        let rhs = fa.zip_with(&ga, |x, y| x * al + y * be, "r").unwrap();
        let scale = lhs.max_abs().max(1.0);
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12 * scale);
    }

    #[test]
    fn multipliers_compose(a in prop::collection::vec(-2.0f64..2.0, 3), s in 0.1f64..2.0) {
        let f = small_field(&a);
        let p = |xi: &[f64]| Complex64::new(xi[0] * xi[0] + s, xi[1]);
        let q = |xi: &[f64]| Complex64::new(1.0 / (1.0 + xi[1] * xi[1]), -s * xi[0]);
        let two = apply_multiplier(&apply_multiplier(&f, q).unwrap(), p).unwrap();
        let one = apply_multiplier(&f, |xi| p(xi) * q(xi)).unwrap();
        let scale = one.max_abs().max(1.0);
        prop_assert!(max_diff(&one, &two) <= 1e-12 * scale);
    }
}

#[test]
fn composition_property_at_acceptance_size() {
    let spec = GridSpec::cube(2, 12.0, 128).unwrap();
    let g = GridField::sample_real(&spec, "g", |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp()).unwrap();
    let p = |xi: &[f64]| c(xi[0] * xi[0] + xi[1] * xi[1]);
    let q = |xi: &[f64]| c((-(xi[0] * xi[0])).exp() + xi[1]);
    let two = apply_multiplier(&apply_multiplier(&g, q).unwrap(), p).unwrap();
    let one = apply_multiplier(&g, |xi| p(xi) * q(xi)).unwrap();
    assert!(max_diff(&one, &two) <= 1e-12);
}

#[test]
fn singular_symbol_is_reported() {
    let spec = GridSpec::cube(1, 1.0, 16).unwrap();
    let f = GridField::sample_real(&spec, "f", |x| x[0]).unwrap();
    assert!(matches!(apply_multiplier(&f, |xi| c(1.0 / xi[0])), Err(Error::SymbolSingular(_))));
}
