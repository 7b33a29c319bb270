//! Potentials for the relativistic kinetic energy `√(|ξ|² + 1) − 1`.
//!
//! Coordinates are rescaled so the Fermi sphere has radius one; for a general `λ`
//! this turns the mass into `μ = 1/κ` with `κ = √((λ+1)² − 1)`. With
//! `g(t) = t/2 − sin(2t)/4`, `w_n = (n² + |x'|⁴ + g(x_d)²)^{−N/2}`,
//! `φ_n = (S(D + e_d) + S(D − e_d))w_n` where `S(ξ) = √(|ξ|² + μ²)`, and
//! `u_n = sin(x_d)φ_n`, the potential splits as
//! `V_n = 2e^{ix_d}(∂_d w_n / sin x_d)/φ_n − (T(D − e_d) − λ)φ_n/φ_n`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{tail_check, Builder, Construction, Operator, Recipe};
use crate::error::{Error, Result};
use crate::grid::{apply_multiplier, pointwise_ratio_within, GridField, GridSpec};
use crate::symbols::SymbolSpec;
use crate::weights::{ScaleParam, WeightSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChandrasekharConfig {
    pub d: usize,
    pub lambda: f64,
    pub n_decay: f64,
    pub n: u32,
    /// `|x'|` half-width; `32√n` for `d = 2` and `4√n` otherwise when absent
    pub perp_half: Option<f64>,
    pub perp_points: usize,
    /// `x_d ∈ [−Mπ, Mπ)`; `M = 8n` when absent
    pub periods: Option<u32>,
    /// `256n` when absent
    pub normal_points: Option<usize>,
    pub tail_limit: f64,
}

impl ChandrasekharConfig {
    pub fn new(d: usize, n: u32) -> Self {
        ChandrasekharConfig {
            d,
            lambda: 2f64.sqrt() - 1.0,
            n_decay: 2.0,
            n,
            perp_half: None,
            perp_points: if d == 2 { 1024 } else { 64 },
            periods: None,
            normal_points: None,
            tail_limit: 1e-2,
        }
    }

    pub fn with_n(mut self, n: u32) -> Self {
        self.n = n;
        self
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let d = self.d;
        let n = self.n as f64;
        let wide = if d == 2 { 32.0 } else { 4.0 };
        let mut half = vec![self.perp_half.unwrap_or(wide * n.sqrt()); d];
        half[d - 1] = self.periods.unwrap_or(8 * self.n) as f64 * PI;
        let mut pts = vec![self.perp_points; d];
        pts[d - 1] = self.normal_points.unwrap_or(256 * self.n as usize);
        let mut off = vec![0.0; d];
        off[d - 1] = 0.5;
        GridSpec::new(half, pts, off)
    }

    /// `(κ, μ, λ/κ)`: Fermi radius, rescaled mass and rescaled energy.
    pub fn rescaling(&self) -> Result<(f64, f64, f64)> {
        if !(self.lambda > 0.0) {
            return Err(Error::ConfigInvalid("lambda must be positive".into()));
        }
        let k = ((self.lambda + 1.0).powi(2) - 1.0).sqrt();
        Ok((k, 1.0 / k, self.lambda / k))
    }

    fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::ConfigInvalid("d must be at least 2".into()));
        }
        ScaleParam::new(self.n)?;
        let thr = (self.d as f64 + 1.0) / 4.0;
        if !(self.n_decay > thr) {
            return Err(Error::ConfigInvalid(format!("N must exceed (d+1)/4 = {thr}")));
        }
        Ok(())
    }
}

/// `∫_0^t sin²`.
pub fn g(t: f64) -> f64 {
    t / 2.0 - (2.0 * t).sin() / 4.0
}

fn base(c: &ChandrasekharConfig, x: &[f64]) -> f64 {
    let d = x.len();
    let n = c.n as f64;
    let p2: f64 = x[..d - 1].iter().map(|v| v * v).sum();
    let gg = g(x[d - 1]);
    n * n + p2 * p2 + gg * gg
}

pub fn w_n(c: &ChandrasekharConfig, x: &[f64]) -> f64 {
    base(c, x).powf(-c.n_decay / 2.0)
}

/// Closed form of `∂_d w_n / sin(x_d)`.
pub fn first_term(c: &ChandrasekharConfig, x: &[f64]) -> f64 {
    let t = x[x.len() - 1];
    -c.n_decay * g(t) * t.sin() * base(c, x).powf(-c.n_decay / 2.0 - 1.0)
}

/// `∂_d w_n / sin(x_d)` by spectral differentiation on the offset grid.
pub fn first_term_fft(c: &ChandrasekharConfig, spec: &GridSpec) -> Result<GridField> {
    let d = spec.dim();
    let w = GridField::sample_real(spec, "w", |x| w_n(c, x))?;
    let dw = apply_multiplier(&w, |xi| Complex64::new(0.0, xi[d - 1]))?;
    let mut x = vec![0.0; d];
    let vals = (0..spec.len())
        .map(|p| {
            spec.point(p, &mut x);
            dw.values[p] / x[d - 1].sin()
        })
        .collect();
    GridField::from_values(spec.clone(), 1, vals, "first term")
}

fn pair_symbol(mu: f64, d: usize) -> impl Fn(&[f64]) -> Complex64 {
    move |xi: &[f64]| {
        let p2: f64 = xi[..d - 1].iter().map(|v| v * v).sum();
        let t = xi[d - 1];
        let s_plus = (p2 + (t + 1.0).powi(2) + mu * mu).sqrt();
        let s_minus = (p2 + (t - 1.0).powi(2) + mu * mu).sqrt();
        Complex64::new(s_plus + s_minus, 0.0)
    }
}

fn phi_field(c: &ChandrasekharConfig, spec: &GridSpec, mu: f64) -> Result<(GridField, GridField)> {
    let w = GridField::sample_real(spec, "w", |x| w_n(c, x))?;
    let phi = apply_multiplier(&w, pair_symbol(mu, spec.dim()))?;
    Ok((w, phi))
}

pub fn build(c: &ChandrasekharConfig) -> Result<Construction> {
    c.validate()?;
    let d = c.d;
    let (kappa, mu, lambda) = c.rescaling()?;
    let spec = c.grid()?;
    let tails = tail_check(|x| w_n(c, x), &spec, c.tail_limit)?;
    let (w, phi) = phi_field(c, &spec, mu)?;
    let phi_imag = phi.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / phi.max_abs();
    let phi = phi.map(|v| Complex64::new(v.re, 0.0), "phi");

    let weight = WeightSpec::thm1(d);
    let n = c.n as f64;
    let mut x = vec![0.0; d];
    let mut lower = f64::INFINITY;
    let mut witness = f64::INFINITY;
    let inner = spec.inner_region(0.8);
    for p in 0..spec.len() {
        spec.point(p, &mut x);
        let ph = phi.values[p].re;
        lower = lower.min(ph * weight.envelope_weight(n, &x).powf(c.n_decay / 2.0));
        if inner[p] {
            witness = witness.min(ph / (2.0 * 2f64.sqrt() * w.values[p].re));
        }
    }
    if !(lower > 0.0) {
        return Err(Error::LowerBoundFailed(lower));
    }
    let symbol = SymbolSpec::Chandrasekhar { d, mass: mu };
    let op = Operator::Scalar { symbol: symbol.clone(), map: None };
    let a_minus = apply_multiplier(&phi, |xi| {
        let mut s = [0.0f64; 8];
        s[..d].copy_from_slice(xi);
        s[d - 1] -= 1.0;
        symbol.evaluate(&s[..d]) - lambda
    })?;
    let second = pointwise_ratio_within(&a_minus, &phi, 0.0, None, None)?;
    let mut vals = Vec::with_capacity(spec.len());
    for p in 0..spec.len() {
        spec.point(p, &mut x);
        let t1 = Complex64::from_polar(2.0 * first_term(c, &x), x[d - 1]) / phi.values[p].re;
        vals.push(t1 - second.ratio.values[p]);
    }
    let v = GridField::from_values(spec.clone(), 1, vals, "V")?;
    let u = phi.zip_with(&GridField::sample_real(&spec, "sin", |x| x[d - 1].sin())?, |a, b| a * b, "u")?;

    let vmax = v.max_abs();
    let imag = v.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let mut diag = BTreeMap::new();
    for (j, t) in tails.iter().enumerate() {
        diag.insert(format!("tail_ratio_{j}"), *t);
    }
    diag.insert("lambda_input".into(), c.lambda);
    diag.insert("scale_factor".into(), kappa);
    diag.insert("mass".into(), mu);
    diag.insert("lower_bound_min".into(), lower);
    diag.insert("lower_bound_witness".into(), witness);
    diag.insert("phi_imag_relative".into(), phi_imag);
    diag.insert("imag_v_max".into(), imag);
    diag.insert("imag_v_relative".into(), imag / vmax);
    let mut eta = vec![0.0; d];
    eta[d - 1] = 1.0;
    Ok(Construction {
        builder: Builder::Chandrasekhar,
        u,
        v,
        lambda,
        scale: ScaleParam::new(c.n)?,
        symbol: SymbolSpec::Chandrasekhar { d, mass: 1.0 },
        operator: op,
        weight,
        reg: None,
        mask: second.mask,
        recipe: Recipe::Chandrasekhar(c.clone()),
        eta,
        diagnostics: diag,
        radial: None,
        dirac: None,
    })
}

pub fn sample_u(c: &ChandrasekharConfig, spec: &GridSpec) -> Result<GridField> {
    let (_, mu, _) = c.rescaling()?;
    let d = spec.dim();
    let (_, phi) = phi_field(c, spec, mu)?;
    let s = GridField::sample_real(spec, "sin", |x| x[d - 1].sin())?;
    phi.map(|v| Complex64::new(v.re, 0.0), "phi").zip_with(&s, |a, b| a * b, "u")
}
