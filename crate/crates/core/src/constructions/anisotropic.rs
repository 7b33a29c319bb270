//! Plane wave times an anisotropic profile, `u_n(x) = e^{iη·x} ρ(h x)^{−N}`.
//!
//! Built in the Fermi frame of the chosen point: the last axis is the normal
//! and the others are principal directions. The potential is computed as
//! `W_h(y) = −(T(hD + η) − λ)ψ(y)/ψ(y)` on a fixed `y`-grid and then read as
//! `V_n(x) = W_h(hx)` on the scaled physical grid, which carries the same samples.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{core_region, snap_half_width, tail_check, Builder, Construction, Operator, Recipe};
use crate::error::{Error, Result};
use crate::grid::{apply_multiplier, pointwise_ratio_within, GridField, GridSpec};
use crate::symbols::{check_gamma_condition, find_fermi_point, taylor_series, FermiPoint, SymbolSpec, TaylorSupport};
use crate::weights::{ScaleParam, WeightSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnisoKind {
    Thm1,
    /// `k` is taken from the curvature data when absent.
    Thm2 { k: Option<usize>, flat_power: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnisoConfig {
    pub symbol: SymbolSpec,
    pub lambda: f64,
    /// Direction along which the Fermi point is searched.
    pub hint: Vec<f64>,
    pub kind: AnisoKind,
    pub n_decay: f64,
    pub n: u32,
    /// Box half-widths in scaled frame coordinates `y = hx`, normal axis last.
    pub y_half: Vec<f64>,
    pub points: Vec<usize>,
    pub tail_limit: f64,
}

impl AnisoConfig {
    pub fn thm1(symbol: SymbolSpec, lambda: f64, hint: Vec<f64>) -> Self {
        let d = symbol.dim();
        let mut y_half = vec![3.0; d];
        y_half[d - 1] = 7.0;
        let mut points = vec![128; d];
        points[d - 1] = 256;
        AnisoConfig {
            symbol,
            lambda,
            hint,
            kind: AnisoKind::Thm1,
            n_decay: 12.0,
            n: 1,
            y_half,
            points,
            tail_limit: 1e-6,
        }
    }

    pub fn thm2(symbol: SymbolSpec, lambda: f64, hint: Vec<f64>, k: Option<usize>, flat_power: f64) -> Self {
        let mut c = Self::thm1(symbol, lambda, hint);
        c.kind = AnisoKind::Thm2 { k, flat_power };
        c
    }

    pub fn with_n(mut self, n: u32) -> Self {
        self.n = n;
        self
    }
}

pub(crate) struct Prepared {
    pub fermi: FermiPoint,
    pub weight: WeightSpec,
    pub eta: Vec<f64>,
    pub y_spec: GridSpec,
    pub x_spec: GridSpec,
    pub frame_t: Vec<f64>,
    pub taylor: TaylorSupport,
}

pub(crate) fn prepare(c: &AnisoConfig) -> Result<Prepared> {
    let d = c.symbol.dim();
    if c.y_half.len() != d || c.points.len() != d {
        return Err(Error::ConfigInvalid("box and points must have one entry per axis".into()));
    }
    ScaleParam::new(c.n)?;
    let fermi = find_fermi_point(&c.symbol, c.lambda, &c.hint)?;
    let k_found = fermi.k_nonvanishing;
    let weight = match &c.kind {
        AnisoKind::Thm1 => WeightSpec::thm1(d),
        AnisoKind::Thm2 { k, flat_power } => {
            if let Some(k) = k {
                if *k != k_found {
                    return Err(Error::CurvatureMismatch { requested: *k, found: k_found });
                }
            }
            if k_found + 1 >= d {
                return Err(Error::ConfigInvalid(format!(
                    "the flat-direction weight needs k < d-1 vanishing curvatures, found k = {k_found}"
                )));
            }
            WeightSpec::thm2(d, k_found, *flat_power)?
        }
    };
    let threshold = weight.gamma.iter().sum::<f64>() / 2.0;
    if !(c.n_decay > threshold) {
        return Err(Error::ConfigInvalid(format!("N must exceed {threshold} for u to be square integrable")));
    }

    let frame_t: Vec<f64> = (0..d * d).map(|p| fermi.frame[(p % d) * d + p / d]).collect();
    let series = taylor_series(&c.symbol, &fermi.eta, c.lambda, 6).compose_linear(&frame_t);
    let zero_tol = 1e-10 * series.max_coeff().max(1.0);
    let truncated = c.symbol.to_poly().is_none();
    let taylor = TaylorSupport::from_poly(&series, &fermi.eta_frame(), 6, zero_tol, truncated);

    let mut eta = fermi.eta_frame();
    for e in eta.iter_mut() {
        if e.abs() < 1e-12 {
            *e = 0.0;
        }
    }
    let mut x_half = vec![0.0; d];
    let mut y_half = vec![0.0; d];
    for j in 0..d {
        let s = (c.n as f64).powf(weight.gamma[j]);
        x_half[j] = snap_half_width(c.y_half[j] * s, eta[j]);
        y_half[j] = x_half[j] / s;
    }
    let y_spec = GridSpec::new(y_half, c.points.clone(), vec![0.0; d])?;
    let x_spec = GridSpec::new(x_half, c.points.clone(), vec![0.0; d])?;
    Ok(Prepared { fermi, weight, eta, y_spec, x_spec, frame_t, taylor })
}

pub fn build(c: &AnisoConfig) -> Result<Construction> {
    let p = prepare(c)?;
    let d = c.symbol.dim();
    let gamma = check_gamma_condition(&p.taylor, &p.weight.gamma)?;
    if !gamma.holds {
        return Err(Error::ConfigInvalid(format!(
            "the weight exponents fail the Taylor-support condition (margin {})",
            gamma.margin_exact
        )));
    }
    let half_n = c.n_decay / 2.0;
    let psi_fn = |y: &[f64]| p.weight.rho_sq(y).powf(-half_n);
    let tails = tail_check(psi_fn, &p.y_spec, c.tail_limit)?;
    let psi = GridField::sample_real(&p.y_spec, "psi", psi_fn)?;
    let env: Vec<f64> = psi.values.iter().map(|v| v.re).collect();
    let region = core_region(&env);

    let h = 1.0 / c.n as f64;
    let hf: Vec<f64> = p.weight.gamma.iter().map(|g| h.powf(*g)).collect();
    let op = Operator::Scalar { symbol: c.symbol.clone(), map: Some(p.frame_t.clone()) };
    let eta = p.eta.clone();
    let lambda = c.lambda;
    let num = apply_multiplier(&psi, |z| {
        let mut zz = [0.0f64; 8];
        for j in 0..d {
            zz[j] = hf[j] * z[j] + eta[j];
        }
        op.eval_scalar(&zz[..d]) - lambda
    })?;
    let scaled = pointwise_ratio_within(&num, &psi, 0.0, Some(&region), None)?;
    let u = sample_on(&p, c, &p.x_spec)?;
    let direct = op.apply_shifted(&u, lambda)?;
    let ratio = pointwise_ratio_within(&direct, &u, 0.0, Some(&region), None)?;
    let v = ratio.ratio.map(|z| -z, "V");
    let (mut dev, mut vmax) = (0.0f64, 0.0f64);
    for q in 0..v.len() {
        if !ratio.mask[q] {
            dev = dev.max((v.values[q] + scaled.ratio.values[q]).norm());
            vmax = vmax.max(v.values[q].norm());
        }
    }
    let mut diag = BTreeMap::new();
    for (j, t) in tails.iter().enumerate() {
        diag.insert(format!("tail_ratio_{j}"), *t);
    }
    for j in 0..d {
        diag.insert(format!("box_adjust_{j}"), p.y_spec.half_width[j] - c.y_half[j]);
    }
    diag.insert("grad_norm".into(), p.fermi.grad_norm());
    diag.insert("k_nonvanishing".into(), p.fermi.k_nonvanishing as f64);
    diag.insert("gamma_margin".into(), gamma.margin);
    for (j, k) in p.fermi.curvatures.iter().enumerate() {
        diag.insert(format!("curvature_{j}"), *k);
    }
    diag.insert("scaled_route_deviation".into(), dev / vmax);
    diag.insert("region_fraction".into(), region.iter().filter(|r| **r).count() as f64 / region.len() as f64);
    let builder = match c.kind {
        AnisoKind::Thm1 => Builder::Thm1,
        AnisoKind::Thm2 { .. } => Builder::Thm2,
    };
    Ok(Construction {
        builder,
        u,
        v,
        lambda: c.lambda,
        scale: ScaleParam::new(c.n)?,
        symbol: c.symbol.clone(),
        operator: op,
        weight: p.weight.clone(),
        reg: None,
        mask: ratio.mask,
        recipe: Recipe::Anisotropic(c.clone()),
        eta: p.eta.clone(),
        diagnostics: diag,
        radial: None,
        dirac: None,
    })
}

fn sample_on(p: &Prepared, c: &AnisoConfig, spec: &GridSpec) -> Result<GridField> {
    let h = 1.0 / c.n as f64;
    let hf: Vec<f64> = p.weight.gamma.iter().map(|g| h.powf(*g)).collect();
    let half_n = c.n_decay / 2.0;
    GridField::sample(spec, "u", |x| {
        let mut y = [0.0f64; 8];
        let mut phase = 0.0;
        for j in 0..x.len() {
            y[j] = hf[j] * x[j];
            phase += p.eta[j] * x[j];
        }
        let psi = p.weight.rho_sq(&y[..x.len()]).powf(-half_n);
        Complex64::from_polar(psi, phase)
    })
}

/// `u_n` on an arbitrary grid in physical frame coordinates.
pub fn sample_u(c: &AnisoConfig, spec: &GridSpec) -> Result<GridField> {
    let p = prepare(c)?;
    sample_on(&p, c, spec)
}

/// The weight the construction would use, without building it.
pub fn weight_of(c: &AnisoConfig) -> Result<WeightSpec> {
    Ok(prepare(c)?.weight)
}
