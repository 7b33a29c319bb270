use std::f64::consts::PI;

use embedded_eigen::constructions::anisotropic::{self, AnisoConfig};
use embedded_eigen::constructions::chandrasekhar::{self, ChandrasekharConfig};
use embedded_eigen::constructions::dirac::{self, antihermitian_defect, DiracConfig, DiracData};
use embedded_eigen::constructions::knapp::{build_knapp, cutoff, KnappConfig};
use embedded_eigen::constructions::radial::{self, profile_zeros, RadialConfig};
use embedded_eigen::constructions::real::{self, RealConfig};
use embedded_eigen::constructions::{Builder, Construction};
use embedded_eigen::symbols::SymbolSpec;
use embedded_eigen::verify::{realness, residual_same_grid};
use embedded_eigen::Error;
use num_complex::Complex64;

/// `Δψ/ψ + 2i∂_dψ/ψ` for `ψ = (1 + h²|x'|⁴ + h²x_d²)^{−N/2}`, by hand.
fn thm1_oracle(x: &[f64], h: f64, big_n: f64) -> Complex64 {
    let d = x.len();
    let p2: f64 = x[..d - 1].iter().map(|v| v * v).sum();
    let t = x[d - 1];
    let h2 = h * h;
    let s = 1.0 + h2 * (p2 * p2 + t * t);
    let grad2 = 16.0 * h2 * h2 * p2 * p2 * p2 + 4.0 * h2 * h2 * t * t;
    let lap_s = h2 * (4.0 * (d as f64 + 1.0) * p2 + 2.0);
    let a = big_n / 2.0;
    let re = -a * lap_s / s + a * (a + 1.0) * grad2 / (s * s);
    let im = -2.0 * a * 2.0 * h2 * t / s;
    Complex64::new(re, im)
}

/// Sup-norm deviation on unmasked points, relative to `max |V|` there.
fn oracle_deviation(c: &Construction, big_n: f64) -> f64 {
    let spec = &c.v.spec;
    let h = 1.0 / c.scale.n as f64;
    let mut x = vec![0.0; spec.dim()];
    let (mut worst, mut vmax) = (0.0f64, 0.0f64);
    for p in 0..spec.len() {
        if !c.mask[p] {
            spec.point(p, &mut x);
            worst = worst.max((c.v.values[p] - thm1_oracle(&x, h, big_n)).norm());
            vmax = vmax.max(c.v.values[p].norm());
        }
    }
    worst / vmax
}

#[test]
fn thm1_potential_matches_derivative_oracle() {
    for n in [1, 2] {
        let cfg = AnisoConfig::thm1(SymbolSpec::laplacian(2), 1.0, vec![0.0, 1.0]).with_n(n);
        let c = anisotropic::build(&cfg).unwrap();
        assert_eq!(c.builder, Builder::Thm1);
        let core = c.diagnostics["region_fraction"];
        assert!((c.masked_fraction() - (1.0 - core)).abs() < 1e-12);
        let dev = oracle_deviation(&c, cfg.n_decay);
        assert!(dev <= 1e-8, "n={n}: {dev:e}");
        assert!(residual_same_grid(&c).unwrap() <= 1e-12);
    }
}

#[test]
fn thm1_plane_wave_frequency() {
    let c = anisotropic::build(&AnisoConfig::thm1(SymbolSpec::laplacian(2), 1.0, vec![0.0, 1.0])).unwrap();
    assert!((c.eta[0]).abs() < 1e-12 && (c.eta[1] - 1.0).abs() < 1e-12);
    assert_eq!(c.weight, embedded_eigen::weights::WeightSpec::thm1(2));
}

#[test]
fn thm1_potential_is_complex() {
    let c = anisotropic::build(&AnisoConfig::thm1(SymbolSpec::laplacian(2), 1.0, vec![0.0, 1.0])).unwrap();
    assert!(realness(&c) > 1e-3);
}

#[test]
fn decay_below_threshold_rejected() {
    let mut cfg = AnisoConfig::thm1(SymbolSpec::laplacian(2), 1.0, vec![0.0, 1.0]);
    cfg.n_decay = 0.75;
    match anisotropic::build(&cfg) {
        Err(Error::ConfigInvalid(m)) => assert!(m.contains("0.75"), "{m}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn thm2_needs_flat_directions() {
    let cfg = AnisoConfig::thm2(SymbolSpec::laplacian(3), 1.0, vec![0.0, 0.0, 1.0], Some(1), 6.0);
    assert!(matches!(anisotropic::build(&cfg), Err(Error::CurvatureMismatch { requested: 1, found: 2 })));
}

#[test]
fn thm2_weight_follows_curvature_split() {
    let cfg = AnisoConfig::thm2(SymbolSpec::partial_laplacian(3, 2), 1.0, vec![1.0, 0.0, 0.0], None, 6.0);
    let w = anisotropic::weight_of(&cfg).unwrap();
    let g: f64 = w.gamma.iter().sum();
    assert!((g - (0.5 + 1.0 / 3.0 + 1.0)).abs() < 1e-12);
}

#[test]
fn real_potential_golden() {
    let cfg = RealConfig::new(SymbolSpec::laplacian(3), 1.0, vec![1.0, 0.0, 0.0]);
    let c = real::build(&cfg).unwrap();
    assert!(realness(&c) <= 1e-8);
    assert_eq!(c.diagnostics["kappa"], -0.5);
    assert_eq!(c.diagnostics["m"], 1.0);
    assert!(c.diagnostics["lower_bound_witness"] > 0.5);
    let e = embedded_eigen::verify::envelope(&c);
    assert!((e.c - 524.1138291193387).abs() <= 1e-8 * 524.11, "{}", e.c);
}

#[test]
fn real_potential_rejects_wide_cutoff() {
    let mut cfg = RealConfig::new(SymbolSpec::laplacian(3), 1.0, vec![1.0, 0.0, 0.0]);
    cfg.c = 1.0;
    assert!(real::build(&cfg).is_err());
}

#[test]
fn spherical_profile_zeros_are_multiples_of_pi() {
    let z = profile_zeros(3, 0.5, 20.0);
    assert_eq!(z.len(), 6);
    for (k, r) in z.iter().enumerate() {
        assert!((r - (k + 1) as f64 * PI).abs() <= 1e-10, "{r}");
    }
}

#[test]
fn radial_build_is_radial_and_consistent() {
    let cfg = RadialConfig::new(SymbolSpec::RadialPolynomial { d: 3, radial: vec![0.0, 1.0] }, 1.0);
    let c = radial::build(&cfg).unwrap();
    assert!(residual_same_grid(&c).unwrap() <= 1e-12);
    let r = embedded_eigen::verify::radiality(&c).unwrap();
    assert!(r.core <= 1e-6, "{}", r.core);
    assert_eq!(c.diagnostics["kappa"], -0.5);
    let data = c.radial.as_ref().unwrap();
    for (k, z) in data.zeros.iter().enumerate() {
        assert!((z - (k + 1) as f64 * PI).abs() <= 1e-10);
    }
}

#[test]
fn radial_rejects_non_radial_symbol() {
    let cfg = RadialConfig::new(SymbolSpec::laplacian(3), 1.0);
    assert!(matches!(radial::build(&cfg), Err(Error::UnsupportedKind(_))));
}

#[test]
fn chandrasekhar_first_term_closed_form() {
    let cfg = ChandrasekharConfig::new(2, 4);
    let spec = cfg.grid().unwrap();
    let fft = chandrasekhar::first_term_fft(&cfg, &spec).unwrap();
    let inner = spec.inner_region(0.8);
    let mut x = vec![0.0; 2];
    let mut worst = 0.0f64;
    for p in 0..spec.len() {
        if inner[p] {
            spec.point(p, &mut x);
            worst = worst.max((fft.values[p].re - chandrasekhar::first_term(&cfg, &x)).abs());
        }
    }
    assert!(worst <= 1e-8, "{worst:e}");
}

#[test]
fn chandrasekhar_offset_grid_avoids_zeros_of_sine() {
    let spec = ChandrasekharConfig::new(2, 1).grid().unwrap();
    let min = spec.axis_coords(1).iter().map(|t| t.sin().abs()).fold(f64::INFINITY, f64::min);
    assert!(min > 1e-3);
}

#[test]
fn chandrasekhar_rescaling_at_default_energy() {
    let (k, mu, l) = ChandrasekharConfig::new(3, 1).rescaling().unwrap();
    assert!((k - 1.0).abs() < 1e-15 && (mu - 1.0).abs() < 1e-15);
    assert!((l - (2f64.sqrt() - 1.0)).abs() < 1e-15);
}

#[test]
fn chandrasekhar_lower_bound_positive() {
    let c = chandrasekhar::build(&ChandrasekharConfig::new(2, 4)).unwrap();
    assert!(c.diagnostics["lower_bound_min"] > 0.0);
    assert!(c.diagnostics["lower_bound_witness"] > 0.0);
    assert!(residual_same_grid(&c).unwrap() <= 1e-6);
}

#[test]
fn dirac_matrices_and_eigenvector() {
    for d in 1..=3 {
        let m = DiracData::new(d, 2f64.sqrt()).unwrap();
        assert!(m.clifford_defect() <= 1e-14);
        assert!(m.eigen_defect() <= 1e-14);
        assert_eq!(m.k, dirac::spinor_dim(d));
    }
    assert!(DiracData::new(3, 0.5).is_err());
    assert!(DiracData::new(4, 2.0).is_err());
}

#[test]
fn dirac_potential_is_antihermitian() {
    let c = dirac::build(&DiracConfig::new(2, 1)).unwrap();
    assert_eq!(antihermitian_defect(&c.v), 0.0);
    assert!(residual_same_grid(&c).unwrap() <= 1e-8);
}

#[test]
fn knapp_partition_and_comparability() {
    let mut cfg = KnappConfig::new(2);
    cfg.points = 256;
    let k = build_knapp(&cfg).unwrap();
    assert!(k.partition_defect <= 1e-10);
    assert!(k.c_lower > 0.0 && k.c_upper.is_finite() && k.c_upper >= k.c_lower);
}

#[test]
fn knapp_cutoff_shape() {
    assert_eq!(cutoff(0.0), 1.0);
    assert_eq!(cutoff(1.0), 1.0);
    assert_eq!(cutoff(1.9), 0.0);
    assert_eq!(cutoff(5.0), 0.0);
    assert!(cutoff(1.45) > 0.0 && cutoff(1.45) < 1.0);
}
