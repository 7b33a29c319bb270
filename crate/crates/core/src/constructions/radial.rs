//! Radial potentials for rotation-invariant symbols with a compact Fermi sphere.
//!
//! After rescaling the Fermi sphere to radius one, `ũ = φψ_n` with `φ` the Fourier
//! transform of the sphere's surface measure away from the origin and
//! `ψ_n = (1 + |x|²/n²)^{−N/2}`. At every zero `r_k` of `φ` the correction
//! `w = Σ_k (|x| − r_k)^{2m} χ(|x| − r_k) f(r_k)`, `f = (T(D) − λ)ũ`, is subtracted
//! with weight `κ` so that `(T(D) − λ)u` vanishes where `u` does.
//!
//! In three dimensions `T(D)F(|x|) = [T(|D|)(rF)](r)/r` on the odd extension,
//! which gives an exact one-dimensional engine used both for `f(r_k)` and for
//! reference profiles.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{core_region, tail_check, Builder, ChiProfile, Construction, Operator, Recipe, RegularizationParams, OSC_GUARD};
use crate::error::{Error, Result};
use crate::grid::{apply_multiplier, pointwise_ratio_within, GridField, GridSpec};
use crate::special::surface_measure_ft;
use crate::symbols::{find_fermi_point, SymbolSpec};
use crate::weights::{ScaleParam, WeightSpec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaRule {
    /// `κ = (−1)^m / (c_m (2m)!)`, the value that cancels `f(r_k)`.
    #[default]
    Cancellation,
    /// `κ = 1 / (c_m (2d)^m)`.
    Formula,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialConfig {
    pub symbol: SymbolSpec,
    pub lambda: f64,
    pub n_decay: f64,
    pub r0: f64,
    pub c: f64,
    pub chi: ChiProfile,
    pub kappa_rule: KappaRule,
    pub n: u32,
    pub half_width: f64,
    pub points: usize,
}

impl RadialConfig {
    pub fn new(symbol: SymbolSpec, lambda: f64) -> Self {
        RadialConfig {
            symbol,
            lambda,
            n_decay: 6.0,
            r0: 2.5,
            c: 0.75,
            chi: ChiProfile::Gaussian,
            kappa_rule: KappaRule::Cancellation,
            n: 1,
            half_width: 11.0,
            points: 256,
        }
    }

    pub fn with_n(mut self, n: u32) -> Self {
        self.n = n;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialData {
    pub r0: f64,
    pub zeros: Vec<f64>,
    pub delta: f64,
    /// `(r, σ̌(r))` samples of the unit-sphere transform
    pub profile: Vec<(f64, f64)>,
    pub f_at_zeros: Vec<f64>,
    pub fermi_radius: f64,
    pub kappa: f64,
    pub kappa_formula: f64,
}

/// Profiles on `r > 0` from the one-dimensional engine.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub psi: Vec<f64>,
    /// true = excluded
    pub mask: Vec<bool>,
    pub zeros: Vec<f64>,
    pub f_at_zeros: Vec<f64>,
    pub spacing: f64,
}

struct Prepared {
    d: usize,
    scaled: Vec<f64>,
    fermi_radius: f64,
    reg: RegularizationParams,
    kappa_formula: f64,
    blend: bool,
}

/// Zeros of `r ↦ σ̌(r)` for the unit sphere on `(r_lo, r_hi)`, refined by bisection.
pub fn profile_zeros(d: usize, r_lo: f64, r_hi: f64) -> Vec<f64> {
    let g = |r: f64| surface_measure_ft(d, 1.0, r);
    let step = 0.01;
    let mut out = Vec::new();
    let mut a = r_lo;
    let mut fa = g(a);
    while a < r_hi {
        let b = a + step;
        let fb = g(b);
        if fa == 0.0 {
            out.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            let (mut lo, mut hi, flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = g(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    out
}

fn prepare(c: &RadialConfig) -> Result<Prepared> {
    let (d, radial) = match &c.symbol {
        SymbolSpec::RadialPolynomial { d, radial } => (*d, radial.clone()),
        other => return Err(Error::UnsupportedKind(other.kind_name().into())),
    };
    if d < 2 {
        return Err(Error::ConfigInvalid("radial constructions need d >= 2".into()));
    }
    if !(c.n_decay > d as f64 / 2.0) {
        return Err(Error::ConfigInvalid(format!("N must exceed d/2 = {}", d as f64 / 2.0)));
    }
    ScaleParam::new(c.n)?;
    let m = radial.iter().rposition(|v| *v != 0.0).ok_or(Error::EmptySupport)?;
    if m == 0 {
        return Err(Error::ConfigInvalid("the symbol is constant".into()));
    }
    let mut e1 = vec![0.0; d];
    e1[0] = 1.0;
    let fermi = find_fermi_point(&c.symbol, c.lambda, &e1)?;
    let rf = fermi.eta[0].abs();
    let t0 = |r: f64| radial.iter().rev().fold(0.0, |acc, cj| acc * r * r + cj) - c.lambda;
    if radial[m] < 0.0 {
        return Err(Error::NonCompact);
    }
    let mut r = rf * (1.0 + 1e-6) + 1e-9;
    let s0 = t0(r).signum();
    while r < 1e3 * rf.max(1.0) {
        if t0(r).signum() != s0 {
            return Err(Error::NonCompact);
        }
        r *= 1.01;
    }
    let scaled: Vec<f64> = radial.iter().enumerate().map(|(j, v)| v * rf.powi(2 * j as i32)).collect();
    let cm = scaled[m];
    let fact: f64 = (1..=2 * m).map(|k| k as f64).product();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let cancel = sign / (cm * fact);
    let formula = 1.0 / (cm * (2.0 * d as f64).powi(m as i32));
    let kappa = match c.kappa_rule {
        KappaRule::Cancellation => cancel,
        KappaRule::Formula => formula,
    };
    let sig = |r: f64| surface_measure_ft(d, 1.0, r);
    let blend = (0..=1000).any(|i| sig(c.r0 * i as f64 / 1000.0) <= 0.0);
    if blend && (0..=100).any(|i| sig(c.r0 - 1.0 + i as f64 / 100.0) <= 0.0) {
        return Err(Error::ConfigInvalid("the sphere transform must be positive on [r0-1, r0]".into()));
    }
    let zeros = profile_zeros(d, c.r0, c.r0 + 40.0);
    let gap = zeros.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if 4.0 * c.c >= gap {
        return Err(Error::ZeroGapTooSmall { gap, four_c: 4.0 * c.c });
    }
    if blend && zeros.first().is_some_and(|z| z - c.r0 < c.c) {
        return Err(Error::ConfigInvalid("r0 must stay a cutoff width away from the first zero".into()));
    }
    Ok(Prepared {
        d,
        scaled,
        fermi_radius: rf,
        reg: RegularizationParams { n_decay: c.n_decay, m: m as u32, c: c.c, kappa, chi: c.chi },
        kappa_formula: formula,
        blend,
    })
}

/// `C^∞` step, 0 for `t ≤ 0` and 1 for `t ≥ 1`.
fn smooth_step(t: f64) -> f64 {
    let e = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    e(t) / (e(t) + e(1.0 - t))
}

fn phi(p: &Prepared, r0: f64, r: f64) -> f64 {
    let s = surface_measure_ft(p.d, 1.0, r);
    if !p.blend {
        return s;
    }
    let floor = surface_measure_ft(p.d, 1.0, r0);
    let b = smooth_step(r - (r0 - 1.0));
    (1.0 - b) * floor + b * s
}

fn psi_n(c: &RadialConfig, r: f64) -> f64 {
    let n = c.n as f64;
    (1.0 + r * r / (n * n)).powf(-c.n_decay / 2.0)
}

fn radial_symbol(scaled: &[f64], k: f64) -> f64 {
    scaled.iter().rev().fold(0.0, |acc, cj| acc * k * k + cj)
}

fn w_at(p: &Prepared, zeros: &[f64], fz: &[f64], r: f64) -> f64 {
    let reach = 12.0 * p.reg.c;
    let start = zeros.partition_point(|z| *z < r - reach);
    let mut w = 0.0;
    for k in start..zeros.len() {
        let t = r - zeros[k];
        if t < -reach {
            break;
        }
        w += t.powi(2 * p.reg.m as i32) * p.reg.chi.eval(p.reg.c, t) * fz[k];
    }
    w
}

struct Engine {
    spec: GridSpec,
    r: Vec<f64>,
    g: Vec<f64>,
}

/// `(T(|D|) − λ)(r ũ)` on the odd extension `r ∈ [−R, R)`, `r = −R + (j + ½)Δ`.
fn engine(c: &RadialConfig, p: &Prepared, r_max: f64, points: usize) -> Result<Engine> {
    let spec = GridSpec::new(vec![r_max], vec![points], vec![0.5])?;
    let r = spec.axis_coords(0);
    let seed = GridField::from_values(
        spec.clone(),
        1,
        r.iter().map(|&x| Complex64::new(x * phi(p, c.r0, x.abs()) * psi_n(c, x.abs()), 0.0)).collect(),
        "r u",
    )?;
    let scaled = p.scaled.clone();
    let lambda = c.lambda;
    let g = apply_multiplier(&seed, |k| Complex64::new(radial_symbol(&scaled, k[0]) - lambda, 0.0))?;
    Ok(Engine { spec: spec.clone(), r, g: g.values.iter().map(|v| v.re).collect() })
}

/// Default extent of the one-dimensional engine at scale `n`.
pub fn engine_extent(n: u32) -> (f64, usize) {
    let r_max = (200.0 * n as f64).max(1500.0);
    let points = ((2.0 * r_max / 0.05).ceil() as usize).next_power_of_two();
    (r_max, points)
}

fn f_at_zeros_1d(e: &Engine, zeros: &[f64]) -> Vec<f64> {
    let h = e.spec.spacing(0);
    let r0 = e.r[0];
    zeros
        .iter()
        .map(|&z| {
            // 12-point Lagrange on the equispaced samples
            let s = (z - r0) / h;
            let j0 = (s.floor() as i64 - 5).clamp(0, e.g.len() as i64 - 12) as usize;
            let mut acc = 0.0;
            for a in j0..j0 + 12 {
                let mut l = 1.0;
                for b in j0..j0 + 12 {
                    if a != b {
                        l *= (s - b as f64) / (a as f64 - b as f64);
                    }
                }
                acc += l * e.g[a];
            }
            acc / z
        })
        .collect()
}

fn check_three(p: &Prepared) -> Result<()> {
    if p.d != 3 {
        return Err(Error::UnsupportedKind("the one-dimensional radial engine needs d = 3".into()));
    }
    Ok(())
}

/// Radial profiles of `u` and `V` for `d = 3` on `r ∈ (0, r_max)`.
pub fn profile(c: &RadialConfig, r_max: f64, points: usize) -> Result<RadialProfile> {
    let p = prepare(c)?;
    check_three(&p)?;
    let e = engine(c, &p, r_max, points)?;
    let zeros = profile_zeros(3, c.r0, r_max);
    let fz = f_at_zeros_1d(&e, &zeros);
    let kappa = p.reg.kappa;
    let ru: Vec<Complex64> = e
        .r
        .iter()
        .map(|&x| {
            let a = x.abs();
            let u = phi(&p, c.r0, a) * psi_n(c, a) - kappa * w_at(&p, &zeros, &fz, a);
            Complex64::new(x * u, 0.0)
        })
        .collect();
    let ru = GridField::from_values(e.spec.clone(), 1, ru, "r u")?;
    let scaled = p.scaled.clone();
    let lambda = c.lambda;
    let tu = apply_multiplier(&ru, |k| Complex64::new(radial_symbol(&scaled, k[0]) - lambda, 0.0))?;
    let env: Vec<f64> = e.r.iter().map(|x| x.abs() / (1.0 + x.abs()) * psi_n(c, x.abs())).collect();
    let region = core_region(&env);
    let ratio = pointwise_ratio_within(&tu, &ru, OSC_GUARD, Some(&region), Some(&env))?;
    let half = points / 2;
    Ok(RadialProfile {
        r: e.r[half..].to_vec(),
        u: ru.values[half..].iter().zip(&e.r[half..]).map(|(v, x)| v.re / x).collect(),
        v: ratio.ratio.values[half..].iter().map(|v| -v.re).collect(),
        psi: e.r[half..].iter().map(|x| psi_n(c, *x)).collect(),
        mask: ratio.mask[half..].to_vec(),
        zeros,
        f_at_zeros: fz,
        spacing: e.spec.spacing(0),
    })
}

/// Four-point Lagrange interpolation of a profile sampled at `r_j = (j + ½)Δ`.
pub fn interpolate_profile(prof: &RadialProfile, values: &[f64], r: f64) -> f64 {
    let h = prof.spacing;
    let s = r / h - 0.5;
    let j = (s.floor() as i64).clamp(1, values.len() as i64 - 3) as usize;
    let t = s - j as f64;
    let (a, b, cc, dd) = (values[j - 1], values[j], values[j + 1], values[j + 2]);
    // nodes at −1, 0, 1, 2
    -t * (t - 1.0) * (t - 2.0) / 6.0 * a + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * b
        - (t + 1.0) * t * (t - 2.0) / 2.0 * cc
        + (t + 1.0) * t * (t - 1.0) / 6.0 * dd
}

/// `f(r_k)` from shell averages `||x| − r_k| ≤ 2Δ` and a quadratic least-squares fit in `r`.
fn f_at_zeros_shell(f: &GridField, zeros: &[f64]) -> Vec<f64> {
    let spec = &f.spec;
    let d = spec.dim();
    let dx = (0..d).map(|j| spec.spacing(j)).fold(0.0, f64::max);
    let mut x = vec![0.0; d];
    let mut samples: Vec<Vec<(f64, f64)>> = vec![Vec::new(); zeros.len()];
    for p in 0..spec.len() {
        spec.point(p, &mut x);
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let k = zeros.partition_point(|z| *z < r - 2.0 * dx);
        if k < zeros.len() && (r - zeros[k]).abs() <= 2.0 * dx {
            samples[k].push((r - zeros[k], f.values[p].re));
        }
    }
    samples
        .iter()
        .map(|s| {
            if s.len() < 3 {
                return 0.0;
            }
            let mut m = nalgebra::Matrix3::<f64>::zeros();
            let mut b = nalgebra::Vector3::<f64>::zeros();
            for &(t, v) in s {
                let row = nalgebra::Vector3::new(1.0, t, t * t);
                m += row * row.transpose();
                b += row * v;
            }
            m.lu().solve(&b).map_or(0.0, |c| c[0])
        })
        .collect()
}

fn zeros_for_box(d: usize, r0: f64, spec: &GridSpec, c: f64) -> Vec<f64> {
    let rmax = spec.half_width.iter().map(|l| l * l).sum::<f64>().sqrt() + 12.0 * c;
    profile_zeros(d, r0, rmax)
}

/// `(u, envelope, zeros, f(r_k))` on a `d`-dimensional grid; the envelope carries the decay of `σ̌`.
fn assemble(c: &RadialConfig, p: &Prepared, spec: &GridSpec) -> Result<(GridField, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let zeros = zeros_for_box(p.d, c.r0, spec, c.c);
    let radius = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let fz = if p.d == 3 {
        let (rm, pts) = engine_extent(c.n);
        let e = engine(c, p, rm, pts)?;
        f_at_zeros_1d(&e, &zeros)
    } else {
        let ut = GridField::sample_real(spec, "u tilde", |x| {
            let r = radius(x);
            phi(p, c.r0, r) * psi_n(c, r)
        })?;
        let scaled = p.scaled.clone();
        let lambda = c.lambda;
        let f = apply_multiplier(&ut, |k| {
            let kk = k.iter().map(|v| v * v).sum::<f64>().sqrt();
            Complex64::new(radial_symbol(&scaled, kk) - lambda, 0.0)
        })?;
        f_at_zeros_shell(&f, &zeros)
    };
    let kappa = p.reg.kappa;
    let mut psis = Vec::with_capacity(spec.len());
    let u = GridField::sample(spec, "u", |x| {
        let r = radius(x);
        Complex64::new(phi(p, c.r0, r) * psi_n(c, r) - kappa * w_at(p, &zeros, &fz, r), 0.0)
    })?;
    let mut x = vec![0.0; spec.dim()];
    for q in 0..spec.len() {
        spec.point(q, &mut x);
        let r = radius(&x);
        psis.push(psi_n(c, r) * (1.0 + r).powf(-(p.d as f64 - 1.0) / 2.0));
    }
    Ok((u, psis, zeros, fz))
}

fn operator(p: &Prepared) -> Operator {
    Operator::Scalar { symbol: SymbolSpec::RadialPolynomial { d: p.d, radial: p.scaled.clone() }, map: None }
}

pub fn build(c: &RadialConfig) -> Result<Construction> {
    let p = prepare(c)?;
    let d = p.d;
    let spec = GridSpec::cube(d, c.half_width, c.points)?;
    let tails = tail_check(|x| psi_n(c, x.iter().map(|v| v * v).sum::<f64>().sqrt()), &spec, 1e-6)?;
    let (u, env, zeros, fz) = assemble(c, &p, &spec)?;
    let op = operator(&p);
    let tu = op.apply_shifted(&u, c.lambda)?;
    let region = core_region(&env);
    let ratio = pointwise_ratio_within(&tu, &u, OSC_GUARD, Some(&region), Some(&env))?;
    let v = ratio.ratio.map(|z| -z, "V");
    let gap = zeros.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let rmax = zeros.last().copied().unwrap_or(c.r0);
    let profile: Vec<(f64, f64)> =
        (0..256).map(|i| rmax * i as f64 / 255.0).map(|r| (r, surface_measure_ft(d, 1.0, r))).collect();
    let data = RadialData {
        r0: c.r0,
        zeros,
        delta: gap,
        profile,
        f_at_zeros: fz,
        fermi_radius: p.fermi_radius,
        kappa: p.reg.kappa,
        kappa_formula: p.kappa_formula,
    };
    let mut diag = BTreeMap::new();
    diag.insert("tail_ratio".into(), tails[0]);
    diag.insert("fermi_radius".into(), p.fermi_radius);
    diag.insert("kappa".into(), p.reg.kappa);
    diag.insert("kappa_formula".into(), p.kappa_formula);
    diag.insert("guard_masked_fraction".into(), ratio.masked_fraction);
    diag.insert("blend".into(), if p.blend { 1.0 } else { 0.0 });
    Ok(Construction {
        builder: Builder::Radial,
        u,
        v,
        lambda: c.lambda,
        scale: ScaleParam::new(c.n)?,
        symbol: c.symbol.clone(),
        operator: op,
        weight: WeightSpec::radial(d),
        reg: Some(p.reg.clone()),
        mask: ratio.mask,
        recipe: Recipe::Radial(c.clone()),
        eta: vec![0.0; d],
        diagnostics: diag,
        radial: Some(data),
        dirac: None,
    })
}

pub fn sample_u(c: &RadialConfig, spec: &GridSpec) -> Result<GridField> {
    let p = prepare(c)?;
    Ok(assemble(c, &p, spec)?.0)
}

/// Both candidate values of `κ` for a radial symbol: `(cancellation, formula)`.
pub fn kappa_values(c: &RadialConfig) -> Result<(f64, f64)> {
    let mut a = c.clone();
    a.kappa_rule = KappaRule::Cancellation;
    let p = prepare(&a)?;
    Ok((p.reg.kappa, p.kappa_formula))
}
