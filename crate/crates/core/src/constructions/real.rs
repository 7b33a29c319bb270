//! Real-valued potentials from `u = sin(x_1)(ψ − κw)`.
//!
//! Coordinates are mapped so the Fermi point becomes `e_1`. The correction `w`
//! needs `f = (T(D) − λ)(sin(x_1)ψ)` on the planes `x_1 = kπ`, while `u` and `V`
//! live off those planes, so two grids are used: an aligned one (offset 0 on
//! axis 0, planes on grid lines) for `f`, and a half-cell shifted one for `u`, `V`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{core_region, tail_check, Builder, ChiProfile, Construction, Operator, Recipe, RegularizationParams, OSC_GUARD};
use crate::error::{Error, Result};
use crate::grid::{pointwise_ratio_within, GridField, GridSpec};
use crate::symbols::{check_real_potential_condition, find_fermi_point, map_to_e1, mapped_poly, SymbolSpec};
use crate::weights::{ScaleParam, WeightSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealConfig {
    pub symbol: SymbolSpec,
    pub lambda: f64,
    pub hint: Vec<f64>,
    /// Correction order; the lowest odd order with a nonzero `ζ_1^m` coefficient when absent.
    pub m: Option<u32>,
    pub n_decay: f64,
    pub c: f64,
    pub chi: ChiProfile,
    /// `x_1 ∈ [−Mπ, Mπ)`
    pub periods: usize,
    pub points_1: usize,
    pub perp_half: f64,
    pub points_perp: usize,
    pub tail_limit: f64,
}

impl RealConfig {
    pub fn new(symbol: SymbolSpec, lambda: f64, hint: Vec<f64>) -> Self {
        RealConfig {
            symbol,
            lambda,
            hint,
            m: None,
            n_decay: 10.0,
            c: 0.2,
            chi: ChiProfile::Gaussian,
            periods: 2,
            points_1: 256,
            perp_half: 2.5,
            points_perp: 64,
            tail_limit: 1e-6,
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let d = self.symbol.dim();
        let mut half = vec![self.perp_half; d];
        half[0] = self.periods as f64 * PI;
        let mut pts = vec![self.points_perp; d];
        pts[0] = self.points_1;
        let mut off = vec![0.0; d];
        off[0] = 0.5;
        GridSpec::new(half, pts, off)
    }
}

pub(crate) struct Prepared {
    pub map: Vec<f64>,
    pub reg: RegularizationParams,
    pub eta: Vec<f64>,
}

pub(crate) fn prepare(c: &RealConfig) -> Result<Prepared> {
    let d = c.symbol.dim();
    c.symbol.check_even()?;
    if !c.symbol.is_real() {
        return Err(Error::ConfigInvalid("the symbol must be real".into()));
    }
    if c.c >= PI / 4.0 {
        return Err(Error::CutoffOverlap(c.c));
    }
    if !(c.c > 0.0 && c.c < PI / 10.0) {
        return Err(Error::ConfigInvalid("c must lie in (0, π/10)".into()));
    }
    if !(c.n_decay > d as f64 / 2.0) {
        return Err(Error::ConfigInvalid(format!("N must exceed d/2 = {}", d as f64 / 2.0)));
    }
    if c.periods == 0 || c.points_1 % (2 * c.periods) != 0 {
        return Err(Error::ConfigInvalid("points along x1 must be a multiple of 2M".into()));
    }
    let fermi = find_fermi_point(&c.symbol, c.lambda, &c.hint)?;
    let map = map_to_e1(&fermi.eta);
    let mapped = mapped_poly(&c.symbol, &fermi.eta)?;
    let mut e1 = vec![0.0; d];
    e1[0] = 1.0;
    let local = mapped.shift(&e1);
    let tol = 1e-12 * local.max_coeff().max(1.0);
    let coeff_m = |m: u32| {
        let mut a = vec![0u32; d];
        a[0] = m;
        local.coeff(&a).re
    };
    let m = match c.m {
        Some(m) => m,
        None => (1..=local.degree()).step_by(2).find(|&m| coeff_m(m).abs() > tol).ok_or(Error::ConditionFailed(1))?,
    };
    if m % 2 == 0 {
        return Err(Error::ConfigInvalid("m must be odd".into()));
    }
    if !check_real_potential_condition(&c.symbol, &fermi.eta, m)? {
        return Err(Error::ConditionFailed(m));
    }
    let grad: Vec<f64> = (0..d).map(|j| mapped.derivative(j).eval(&e1).re).collect();
    let gn = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if grad[1..].iter().any(|g| g.abs() > 1e-10 * gn) {
        return Err(Error::ConfigInvalid("the mapped normal must point along e1".into()));
    }
    let fact: f64 = (1..=m).map(|k| k as f64).product();
    let sign = if ((m + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let kappa = 1.0 / (sign * fact * coeff_m(m));
    Ok(Prepared {
        map,
        reg: RegularizationParams { n_decay: c.n_decay, m, c: c.c, kappa, chi: c.chi },
        eta: e1,
    })
}

fn psi_at(n_decay: f64, x: &[f64]) -> f64 {
    let perp: f64 = x[1..].iter().map(|v| v * v).sum();
    (1.0 + x[0] * x[0] + perp * perp).powf(-n_decay / 2.0)
}

/// `u`, `ψ` and the plane values of `f` on `spec` (whose axis-0 box must be `[−Mπ, Mπ)`).
fn assemble(c: &RealConfig, p: &Prepared, spec: &GridSpec) -> Result<(GridField, GridField, f64)> {
    let d = spec.dim();
    let mpi = c.periods as f64 * PI;
    if (spec.half_width[0] - mpi).abs() > 1e-12 * mpi || spec.points[0] % (2 * c.periods) != 0 {
        return Err(Error::GridMismatch("axis 0 must span whole periods with planes on grid lines".into()));
    }
    let aligned = GridSpec::new(spec.half_width.clone(), spec.points.clone(), {
        let mut o = spec.offset.clone();
        o[0] = 0.0;
        o
    })?;
    let op = Operator::Scalar { symbol: c.symbol.clone(), map: Some(p.map.clone()) };
    let lambda = c.lambda;
    let seed = GridField::sample_real(&aligned, "sin psi", |x| x[0].sin() * psi_at(c.n_decay, x))?;
    let f = crate::grid::apply_multiplier(&seed, |z| op.eval_scalar(z) - lambda)?;
    let f_imag = f.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / f.max_abs().max(f64::MIN_POSITIVE);

    let n1 = spec.points[0];
    let rest: usize = spec.points[1..].iter().product();
    let mm = c.periods as i64;
    let planes: Vec<(i64, usize)> = (-mm..mm).map(|k| (k, (k + mm) as usize * n1 / (2 * c.periods))).collect();
    let (m, cc, kappa, chi) = (p.reg.m as i32, p.reg.c, p.reg.kappa, p.reg.chi);
    let period = 2.0 * mpi;
    let mut vals = Vec::with_capacity(spec.len());
    let mut psis = Vec::with_capacity(spec.len());
    let mut x = vec![0.0; d];
    for q in 0..spec.len() {
        spec.point(q, &mut x);
        let perp_idx = q % rest;
        let mut w = Complex64::new(0.0, 0.0);
        for &(k, i) in &planes {
            let mut t = x[0] - k as f64 * PI;
            t -= period * (t / period).round();
            let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
            w += f.values[i * rest + perp_idx] * (sgn * t.powi(m) * chi.eval(cc, t));
        }
        let psi = psi_at(c.n_decay, &x);
        psis.push(Complex64::new(psi, 0.0));
        vals.push((Complex64::new(psi, 0.0) - kappa * w) * x[0].sin());
    }
    Ok((
        GridField::from_values(spec.clone(), 1, vals, "u")?,
        GridField::from_values(spec.clone(), 1, psis, "psi")?,
        f_imag,
    ))
}

pub fn build(c: &RealConfig) -> Result<Construction> {
    let p = prepare(c)?;
    let d = c.symbol.dim();
    let spec = c.grid()?;
    let tails = tail_check(|x| psi_at(c.n_decay, x), &spec, c.tail_limit)?;
    let (u, psi, f_imag) = assemble(c, &p, &spec)?;
    let env: Vec<f64> = psi.values.iter().map(|v| v.re).collect();
    let region = core_region(&env);
    let op = Operator::Scalar { symbol: c.symbol.clone(), map: Some(p.map.clone()) };
    let tu = op.apply_shifted(&u, c.lambda)?;
    let ratio = pointwise_ratio_within(&tu, &u, OSC_GUARD, Some(&region), Some(&env))?;
    let v = ratio.ratio.map(|z| -z, "V");

    let mut x = vec![0.0; d];
    let mut witness = f64::INFINITY;
    for q in 0..spec.len() {
        if ratio.mask[q] {
            continue;
        }
        spec.point(q, &mut x);
        let dist = (x[0] - PI * (x[0] / PI).round()).abs();
        witness = witness.min(u.values[q].norm() / (dist * env[q]));
    }
    let mut diag = BTreeMap::new();
    for (j, t) in tails.iter().enumerate() {
        diag.insert(format!("tail_ratio_{j}"), *t);
    }
    diag.insert("kappa".into(), p.reg.kappa);
    diag.insert("m".into(), p.reg.m as f64);
    diag.insert("lower_bound_witness".into(), witness);
    diag.insert("f_imag_relative".into(), f_imag);
    diag.insert("guard_masked_fraction".into(), ratio.masked_fraction);
    for (k, a) in p.map.iter().enumerate() {
        diag.insert(format!("map_{k}"), *a);
    }
    Ok(Construction {
        builder: Builder::Real,
        u,
        v,
        lambda: c.lambda,
        scale: ScaleParam::new(1)?,
        symbol: c.symbol.clone(),
        operator: op,
        weight: WeightSpec::normal_axis(d, 0),
        reg: Some(p.reg.clone()),
        mask: ratio.mask,
        recipe: Recipe::Real(c.clone()),
        eta: p.eta.clone(),
        diagnostics: diag,
        radial: None,
        dirac: None,
    })
}

/// `u` on another grid with the same axis-0 box, recomputing `f` there.
pub fn sample_u(c: &RealConfig, spec: &GridSpec) -> Result<GridField> {
    let p = prepare(c)?;
    Ok(assemble(c, &p, spec)?.0)
}
