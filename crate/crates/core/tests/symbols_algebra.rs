use embedded_eigen::newton::newton_vertices;
use embedded_eigen::poly::{MultiIndex, Poly};
use embedded_eigen::symbols::*;
use embedded_eigen::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn dcos(d: usize) -> SymbolSpec {
    SymbolSpec::DiscreteCosine { d }
}

#[test]
fn evaluation_examples() {
    let t = SymbolSpec::laplacian(3);
    assert_eq!(t.evaluate(&[0.0, 0.0, 1.0]).re, 1.0);
    assert_eq!(t.gradient(&[0.0, 0.0, 1.0]), vec![0.0, 0.0, 2.0]);
    let ch = SymbolSpec::Chandrasekhar { d: 3, mass: 1.0 };
    assert!((ch.evaluate(&[0.0, 0.0, 1.0]).re - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    let pi = std::f64::consts::PI;
    assert_eq!(dcos(3).evaluate(&[pi, pi, pi]).re, 6.0);
}

#[test]
fn sphere_fermi_point() {
    for d in 2..=4 {
        let mut hint = vec![0.0; d];
        hint[d - 1] = 1.0;
        let fp = find_fermi_point(&SymbolSpec::laplacian(d), 1.0, &hint).unwrap();
        assert!((fp.eta[d - 1] - 1.0).abs() < 1e-12);
        assert_eq!(fp.k_nonvanishing, d - 1);
        for c in &fp.curvatures {
            assert!((c - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn critical_value_rejected() {
    let r = find_fermi_point(&SymbolSpec::laplacian(3), 0.0, &[0.0, 0.0, 1.0]);
    assert!(matches!(r, Err(Error::CriticalPoint(_))));
    let r = find_fermi_point(&dcos(3), 0.0, &[1.0, 1.0, 1.0]);
    assert!(matches!(r, Err(Error::CriticalPoint(_))));
}

#[test]
fn band_center_fermi_point_is_flat() {
    let fp = find_fermi_point(&dcos(3), 3.0, &[1.0, 1.0, 1.0]).unwrap();
    // oracle: 3 - 3 cos(t/√3) = 3 at t = π√3/2
    let t_exact = std::f64::consts::PI * 3f64.sqrt() / 2.0;
    let t: f64 = fp.eta.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((t - t_exact).abs() < 1e-10);
    assert!((dcos(3).evaluate(&fp.eta).re - 3.0).abs() <= tol_fermi(3.0));
    assert_eq!(fp.k_nonvanishing, 0);
}

#[test]
fn off_center_cosine_point_is_curved() {
    let fp = find_fermi_point(&dcos(3), 2.0, &[1.0, 1.0, 1.0]).unwrap();
    // along the diagonal the Hessian is cos(t/√3) I, a multiple of the identity
    let c = fp.eta[0].cos();
    let g = 3f64.sqrt() * fp.eta[0].sin();
    for k in &fp.curvatures {
        assert!((k - c / g).abs() < 1e-10);
    }
    assert_eq!(fp.k_nonvanishing, 2);
}

#[test]
fn cylinder_has_one_curvature() {
    let t = SymbolSpec::partial_laplacian(3, 2);
    let fp = find_fermi_point(&t, 1.0, &[0.0, 1.0, 0.0]).unwrap();
    assert_eq!(fp.k_nonvanishing, 1);
    assert!((fp.curvatures[0] - 1.0).abs() < 1e-12);
    // frame: curved tangent, flat tangent, normal
    let q = &fp.frame;
    assert!((q[0].abs() - 1.0).abs() < 1e-12);
    assert!((q[5].abs() - 1.0).abs() < 1e-12);
    assert!((q[7] - 1.0).abs() < 1e-12);
}

#[test]
fn rotation_is_orthogonal_and_aligns_gradient() {
    let fp = find_fermi_point(&dcos(3), 2.5, &[0.3, 1.0, 0.7]).unwrap();
    let d = 3;
    let r = &fp.rotation;
    for i in 0..d {
        for j in 0..d {
            let s: f64 = (0..d).map(|k| r[i * d + k] * r[j * d + k]).sum();
            assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }
    let rg: Vec<f64> = (0..d).map(|i| (0..d).map(|k| r[i * d + k] * fp.gradient[k]).sum()).collect();
    assert!(rg[0].abs() < 1e-12 && rg[1].abs() < 1e-12);
    assert!((rg[2] - fp.grad_norm()).abs() < 1e-12);
}

#[test]
fn no_root_reported() {
    let r = find_fermi_point(&dcos(2), 7.0, &[1.0, 0.0]);
    assert!(matches!(r, Err(Error::NoRoot(_))));
}

#[test]
fn shifted_sphere_support() {
    let ts = taylor_support(&SymbolSpec::laplacian(3), &[0.0, 0.0, 1.0], 1.0, 8, 1e-14).unwrap();
    let sup = ts.support();
    assert_eq!(sup, vec![vec![0, 0, 1], vec![0, 0, 2], vec![0, 2, 0], vec![2, 0, 0]]);
    assert_eq!(ts.coeff(&[0, 0, 1]).re, 2.0);
    assert_eq!(ts.coeff(&[2, 0, 0]).re, 1.0);
    assert_eq!(ts.newton_vertices, vec![vec![0, 0, 1], vec![0, 2, 0], vec![2, 0, 0]]);
}

#[test]
fn radial_top_degree_structure() {
    // |ξ + e_1|^{2K} contains ξ_1^{2K} and 2K ξ_1^{2K-1}
    for k in 1..=3usize {
        let mut radial = vec![0.0; k + 1];
        radial[k] = 1.0;
        let t = SymbolSpec::RadialPolynomial { d: 3, radial };
        let ts = taylor_support(&t, &[1.0, 0.0, 0.0], 0.0, 20, 1e-12).unwrap();
        assert_eq!(ts.coeff(&[2 * k as u32, 0, 0]).re, 1.0);
        assert!((ts.coeff(&[2 * k as u32 - 1, 0, 0]).re - 2.0 * k as f64).abs() < 1e-12);
    }
}

#[test]
fn zero_symbol_has_empty_support() {
    let t = SymbolSpec::Polynomial { d: 2, coeffs: vec![Coeff { alpha: vec![0, 0], c: 1.0, ci: 0.0 }] };
    let ts = taylor_support(&t, &[0.3, 0.1], 1.0, 4, 1e-14).unwrap();
    assert!(ts.entries.is_empty() && ts.newton_vertices.is_empty());
    assert!(matches!(check_gamma_condition(&ts, &[0.5, 1.0]), Err(Error::EmptySupport)));
    let ch = SymbolSpec::Chandrasekhar { d: 2, mass: 1.0 };
    assert!(matches!(taylor_support(&ch, &[0.0, 1.0], 0.0, 4, 1e-14), Err(Error::UnsupportedKind(_))));
}

#[test]
fn gamma_condition_cases() {
    let ts = taylor_support(&SymbolSpec::laplacian(3), &[0.0, 0.0, 1.0], 1.0, 8, 1e-14).unwrap();
    let g = check_gamma_condition(&ts, &[0.5, 0.5, 1.0]).unwrap();
    assert!(g.holds);
    assert_eq!(g.margin_exact, "0/1");
    assert_eq!(g.attained_by.len(), 3);
    let one = embedded_eigen::symbols::TaylorSupport::from_poly(
        &Poly::monomial(vec![1, 0], Complex64::new(1.0, 0.0)),
        &[0.0, 0.0],
        4,
        0.0,
        false,
    );
    let g = check_gamma_condition(&one, &[0.5, 1.0]).unwrap();
    assert!(!g.holds);
    assert_eq!(g.margin_exact, "-1/2");
}

#[test]
fn cylinder_and_flat_point_gamma_condition() {
    let t = SymbolSpec::partial_laplacian(3, 2);
    let fp = find_fermi_point(&t, 1.0, &[0.0, 1.0, 0.0]).unwrap();
    let a = taylor_series(&t, &fp.eta, 1.0, 6).compose_linear(&transpose(&fp.frame, 3));
    let ts = TaylorSupport::from_poly(&a, &fp.eta_frame(), 6, 1e-12, false);
    assert!(check_gamma_condition(&ts, &[0.5, 1.0 / 3.0, 1.0]).unwrap().holds);

    let fp = find_fermi_point(&dcos(3), 3.0, &[1.0, 1.0, 1.0]).unwrap();
    let a = taylor_series(&dcos(3), &fp.eta, 3.0, 5).compose_linear(&transpose(&fp.frame, 3));
    let ts = TaylorSupport::from_poly(&a, &fp.eta_frame(), 5, 1e-12, true);
    let g = check_gamma_condition(&ts, &[1.0 / 3.0, 1.0 / 3.0, 1.0]).unwrap();
    assert!(g.holds && g.margin == 0.0);
    assert!(!check_gamma_condition(&ts, &[0.25, 0.25, 1.0]).unwrap().holds);
    // the sphere point needs 1/2 on the tangent axes
    let fp = find_fermi_point(&dcos(3), 2.0, &[1.0, 1.0, 1.0]).unwrap();
    let a = taylor_series(&dcos(3), &fp.eta, 2.0, 5).compose_linear(&transpose(&fp.frame, 3));
    let ts = TaylorSupport::from_poly(&a, &fp.eta_frame(), 5, 1e-12, true);
    assert!(!check_gamma_condition(&ts, &[1.0 / 3.0, 1.0 / 3.0, 1.0]).unwrap().holds);
    assert!(check_gamma_condition(&ts, &[0.5, 0.5, 1.0]).unwrap().holds);
}

fn transpose(q: &[f64], d: usize) -> Vec<f64> {
    (0..d * d).map(|k| q[(k % d) * d + k / d]).collect()
}

#[test]
fn real_potential_condition() {
    let t = SymbolSpec::laplacian(3);
    assert!(check_real_potential_condition(&t, &[1.0, 0.0, 0.0], 1).unwrap());
    assert!(check_real_potential_condition(&t, &[0.0, 0.6, 0.8], 1).unwrap());
    for k in 2..=3usize {
        let mut radial = vec![0.0; k + 1];
        radial[k] = 1.0;
        radial[1] = 0.5;
        let t = SymbolSpec::RadialPolynomial { d: 3, radial };
        assert!(check_real_potential_condition(&t, &[0.0, 1.3, 0.0], 2 * k as u32 - 1).unwrap());
    }
    let odd = SymbolSpec::Polynomial {
        d: 2,
        coeffs: vec![
            Coeff { alpha: vec![2, 0], c: 1.0, ci: 0.0 },
            Coeff { alpha: vec![1, 0], c: 1.0, ci: 0.0 },
        ],
    };
    assert!(matches!(check_real_potential_condition(&odd, &[1.0, 0.0], 1), Err(Error::NotEven(_))));
    // ξ_1² + ξ_1²ξ_2²: odd terms with α_1 = 1 at e_1 are only e_1
    let mixed = SymbolSpec::Polynomial {
        d: 2,
        coeffs: vec![
            Coeff { alpha: vec![2, 0], c: 1.0, ci: 0.0 },
            Coeff { alpha: vec![2, 2], c: 1.0, ci: 0.0 },
        ],
    };
    assert!(!check_real_potential_condition(&mixed, &[1.0, 0.0], 1).unwrap());
}

#[test]
fn chandrasekhar_series_matches_values() {
    let t = SymbolSpec::Chandrasekhar { d: 2, mass: 1.0 };
    let eta = [0.0, 1.0];
    let p = taylor_series(&t, &eta, 0.0, 12);
    for xi in [[0.01, -0.02], [0.05, 0.03], [-0.04, 0.0]] {
        let exact = t.evaluate(&[eta[0] + xi[0], eta[1] + xi[1]]).re;
        assert!((p.eval(&xi).re - exact).abs() < 1e-14);
    }
}

/// Independent vertex oracle: unique minimizers of random positive linear functionals.
fn random_weight_vertices(pts: &[MultiIndex], seeds: &[Vec<f64>]) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for w in seeds {
        let val = |a: &MultiIndex| a.iter().zip(w).map(|(&x, y)| x as f64 * y).sum::<f64>();
        let best = pts.iter().map(&val).fold(f64::INFINITY, f64::min);
        let arg: Vec<&MultiIndex> = pts.iter().filter(|a| (val(a) - best).abs() < 1e-12).collect();
        if arg.len() == 1 {
            out.push(arg[0].clone());
        }
    }
    out.sort();
    out.dedup();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_finite_differences(x in prop::collection::vec(-2.0f64..2.0, 3), kind in 0usize..4) {
        let t = match kind {
            0 => SymbolSpec::laplacian(3),
            1 => SymbolSpec::RadialPolynomial { d: 3, radial: vec![0.3, -1.0, 0.5] },
            2 => SymbolSpec::Chandrasekhar { d: 3, mass: 1.0 },
            _ => dcos(3),
        };
        let g = t.gradient(&x);
        let h = 1e-5;
        for j in 0..3 {
            let mut a = x.clone();
            let mut b = x.clone();
            a[j] += h;
            b[j] -= h;
            let fd = (t.evaluate(&a).re - t.evaluate(&b).re) / (2.0 * h);
            prop_assert!((fd - g[j]).abs() <= 1e-6 * g[j].abs().max(1.0));
        }
    }

    #[test]
    fn even_polynomials_are_symmetric(x in prop::collection::vec(-2.0f64..2.0, 3)) {
        let t = SymbolSpec::RadialPolynomial { d: 3, radial: vec![0.3, -1.0, 0.5] };
        let m: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert_eq!(t.evaluate(&x), t.evaluate(&m));
    }

    #[test]
    fn taylor_support_reconstructs(eta in prop::collection::vec(-1.5f64..1.5, 2), xi in prop::collection::vec(-1.0f64..1.0, 2)) {
        let t = SymbolSpec::Polynomial { d: 2, coeffs: vec![
            Coeff { alpha: vec![4, 0], c: 1.0, ci: 0.0 },
            Coeff { alpha: vec![1, 2], c: -2.0, ci: 0.5 },
            Coeff { alpha: vec![0, 1], c: 3.0, ci: 0.0 },
        ]};
        let ts = taylor_support(&t, &eta, 0.7, 10, 0.0).unwrap();
        let shifted = t.evaluate(&[eta[0] + xi[0], eta[1] + xi[1]]) - 0.7;
        prop_assert!((ts.to_poly().eval(&xi) - shifted).norm() <= 1e-11);
        let sup = ts.support();
        for v in &ts.newton_vertices {
            prop_assert!(sup.contains(v));
        }
    }

    #[test]
    fn newton_vertices_match_weight_oracle(pts in prop::collection::vec(prop::collection::vec(0u32..6, 3), 1..9),
                                           seeds in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 3), 400)) {
        let v = newton_vertices(&pts);
        let w = random_weight_vertices(&pts, &seeds);
        // every sampled unique minimizer is a vertex
        for a in &w {
            prop_assert!(v.contains(a));
        }
        // every vertex is extreme: no other point is componentwise below it
        for a in &v {
            prop_assert!(!pts.iter().any(|b| b != a && b.iter().zip(a).all(|(x, y)| x <= y)));
        }
    }

    #[test]
    fn fermi_point_satisfies_invariants(lam in 0.2f64..5.5, h in prop::collection::vec(0.1f64..1.0, 3)) {
        let fp = find_fermi_point(&dcos(3), lam, &h).unwrap();
        prop_assert!((dcos(3).evaluate(&fp.eta).re - lam).abs() <= tol_fermi(lam));
        prop_assert!(fp.grad_norm() > TOL_REGULAR);
    }
}

#[test]
fn newton_vertices_known_sets() {
    let pts = vec![vec![2, 0], vec![0, 2], vec![1, 1], vec![3, 3], vec![0, 3]];
    assert_eq!(newton_vertices(&pts), vec![vec![0, 2], vec![2, 0]]);
    let pts = vec![vec![4, 0], vec![0, 4], vec![1, 1]];
    assert_eq!(newton_vertices(&pts), vec![vec![0, 4], vec![1, 1], vec![4, 0]]);
    assert!(newton_vertices(&[]).is_empty());
}
