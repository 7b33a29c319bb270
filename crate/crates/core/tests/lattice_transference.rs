use embedded_eigen::lattice::*;
use embedded_eigen::symbols::SymbolSpec;
use embedded_eigen::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn max_diff(a: &LatticeField, b: &LatticeField) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn gauss(x: &[f64]) -> Complex64 {
    Complex64::new((-x.iter().map(|v| v * v).sum::<f64>() / 8.0).exp(), 0.0)
}

/// Random values on `|n|_∞ ≤ M − 2`, zero on the outer shell.
fn compact_field(d: usize, m: usize, seeds: &[f64]) -> LatticeField {
    let mut k = 0;
    LatticeField::from_fn(d, m, |n| {
        if n.iter().any(|v| v.unsigned_abs() as usize > m - 2) {
            return Complex64::new(0.0, 0.0);
        }
        k += 1;
        let s = seeds[k % seeds.len()];
        Complex64::new(s, (s * 7.0 + k as f64).sin())
    })
    .unwrap()
}

#[test]
fn cosine_symbol_matches_stencil_exhaustively() {
    for d in 1..=3 {
        let f = compact_field(d, 8, &[0.3, -1.2, 0.7, 2.5, -0.4]);
        let sym = SymbolSpec::DiscreteCosine { d };
        let a = discrete_multiplier(|xi| sym.evaluate(xi), &f, None).unwrap();
        let b = cosine_stencil(&f);
        assert!(max_diff(&a, &b) <= 1e-12, "d={d}");
    }
}

#[test]
fn unit_symbol_is_identity() {
    let f = compact_field(2, 16, &[1.0, 0.5, -0.25]);
    let g = discrete_multiplier(|_| Complex64::new(1.0, 0.0), &f, None).unwrap();
    assert!(max_diff(&f, &g) <= 1e-13);
}

#[test]
fn constant_symbol_scales() {
    let f = compact_field(2, 8, &[1.0, -2.0]);
    let g = discrete_multiplier(|_| Complex64::new(3.0, -1.0), &f, None).unwrap();
    let expect = LatticeField::new(2, 8, f.values.iter().map(|v| v * Complex64::new(3.0, -1.0)).collect()).unwrap();
    assert!(max_diff(&g, &expect) <= 1e-13);
}

#[test]
fn exponential_symbol_shifts() {
    let f = compact_field(2, 8, &[0.9, 0.1, -0.6]);
    let g = discrete_multiplier(|xi| Complex64::from_polar(1.0, xi[0]), &f, None).unwrap();
    let mut n = vec![0i64; 2];
    for q in 0..f.len() {
        f.site(q, &mut n);
        let mut m = n.clone();
        m[0] += 1;
        assert!((g.values[q] - f.get(&m)).norm() <= 1e-13);
    }
}

#[test]
fn small_boxes_rejected() {
    assert!(matches!(LatticeField::new(2, 4, vec![Complex64::new(0.0, 0.0); 81]), Err(Error::ConfigInvalid(_))));
}

#[test]
fn fat_tails_rejected() {
    let f = LatticeField::from_fn(1, 8, |_| Complex64::new(1.0, 0.0)).unwrap();
    assert!(matches!(discrete_multiplier(|_| Complex64::new(1.0, 0.0), &f, Some(TAIL_GUARD)), Err(Error::TailTooFat(_))));
}

#[test]
fn poisson_gaussian_deviation() {
    let sym = SymbolSpec::DiscreteCosine { d: 2 };
    let devs: Vec<f64> =
        [8, 16, 32].iter().map(|&m| poisson_check(gauss, |xi: &[f64]| sym.evaluate(xi), 2, m, None).unwrap()).collect();
    assert!(devs[1] <= 1e-8, "{devs:?}");
    assert!(devs[0] > devs[1] && devs[1] > devs[2], "{devs:?}");
}

#[test]
fn continuum_grid_hits_integers() {
    for m in [8, 16, 32] {
        let g = continuum_grid(2, m).unwrap();
        assert_eq!(1.0 / g.spacing(0), 4.0);
    }
    assert!(matches!(continuum_grid(2, 12), Err(Error::ConfigInvalid(_))));
}

#[test]
fn lambda_outside_band_rejected() {
    for lambda in [0.0, 6.0, -1.0] {
        assert!(matches!(build_discrete_example(&DiscreteConfig::new(3, lambda)), Err(Error::ConfigInvalid(_))));
    }
}

#[test]
fn discrete_example_is_eigenfunction() {
    let ex = build_discrete_example(&DiscreteConfig::new(3, 3.0)).unwrap();
    assert!(ex.residual <= 1e-6, "{:e}", ex.residual);
    assert_eq!(ex.k_nonvanishing, 0);
    let half = std::f64::consts::FRAC_PI_2;
    assert!(ex.eta.iter().all(|e| (e - half).abs() < 1e-10), "{:?}", ex.eta);
    assert!(ex.v.values.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn stencil_agrees_on_random_fields(seeds in prop::collection::vec(-3.0f64..3.0, 5..40), d in 1usize..=2) {
        let f = compact_field(d, 8, &seeds);
        let sym = SymbolSpec::DiscreteCosine { d };
        let a = discrete_multiplier(|xi| sym.evaluate(xi), &f, None).unwrap();
        prop_assert!(max_diff(&a, &cosine_stencil(&f)) <= 1e-12);
    }

    #[test]
    fn multiplier_is_linear(seeds in prop::collection::vec(-3.0f64..3.0, 5..20), a in -2.0f64..2.0) {
        let f = compact_field(2, 8, &seeds);
        let g = compact_field(2, 8, &[1.0, 0.25]);
        let sum = LatticeField::new(2, 8, f.values.iter().zip(&g.values).map(|(x, y)| x * a + y).collect()).unwrap();
        let t = |xi: &[f64]| Complex64::new(2.0 - xi[0].cos() - xi[1].cos(), xi[1].sin());
        let lhs = discrete_multiplier(t, &sum, None).unwrap();
        let tf = discrete_multiplier(t, &f, None).unwrap();
        let tg = discrete_multiplier(t, &g, None).unwrap();
        let rhs = LatticeField::new(2, 8, tf.values.iter().zip(&tg.values).map(|(x, y)| x * a + y).collect()).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12);
    }
}
