//! Multipliers on `ℤ^d`, the transference identity `(T(D)f)|_{ℤ^d} = T(D)(f|_{ℤ^d})` for
//! `2π`-periodic `T`, and eigenfunction/potential pairs for the discrete Laplacian.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_multiplier, fft_nd, GridField, GridSpec};
use crate::symbols::{check_gamma_condition, find_fermi_point, taylor_series, SymbolSpec, TaylorSupport};
use crate::weights::WeightSpec;

pub const TAIL_GUARD: f64 = 1e-8;
/// Sites where `ψ` falls below this fraction of its maximum carry no potential.
pub const CORE_GUARD: f64 = 1e-6;

/// Values on the sites `{−M, …, M}^d`, last axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeField {
    pub d: usize,
    pub m: usize,
    pub values: Vec<Complex64>,
}

impl LatticeField {
    pub fn new(d: usize, m: usize, values: Vec<Complex64>) -> Result<Self> {
        if d == 0 || m < 8 {
            return Err(Error::ConfigInvalid(format!("lattice box needs d >= 1 and M >= 8, got d={d}, M={m}")));
        }
        if values.len() != (2 * m + 1).pow(d as u32) {
            return Err(Error::GridMismatch(format!("{} values for a box of radius {m} in d={d}", values.len())));
        }
        if let Some(p) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(p));
        }
        Ok(LatticeField { d, m, values })
    }

    pub fn from_fn<F: FnMut(&[i64]) -> Complex64>(d: usize, m: usize, mut f: F) -> Result<Self> {
        let side = 2 * m + 1;
        let mut n = vec![0i64; d];
        let values = (0..side.pow(d as u32))
            .map(|p| {
                site(p, d, m, &mut n);
                f(&n)
            })
            .collect();
        Self::new(d, m, values)
    }

    pub fn side(&self) -> usize {
        2 * self.m + 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Flat index of a site, `None` outside the box.
    pub fn index(&self, n: &[i64]) -> Option<usize> {
        let m = self.m as i64;
        let mut p = 0usize;
        for &v in n {
            if v.abs() > m {
                return None;
            }
            p = p * self.side() + (v + m) as usize;
        }
        Some(p)
    }

    pub fn get(&self, n: &[i64]) -> Complex64 {
        self.index(n).map_or(Complex64::new(0.0, 0.0), |p| self.values[p])
    }

    pub fn site(&self, p: usize, n: &mut [i64]) {
        site(p, self.d, self.m, n)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |f|` on the sites with `|n|_∞ = M`, relative to `max |f|`.
    pub fn boundary_ratio(&self) -> f64 {
        let mut n = vec![0i64; self.d];
        let mut b = 0.0f64;
        for p in 0..self.len() {
            self.site(p, &mut n);
            if n.iter().any(|v| v.unsigned_abs() as usize == self.m) {
                b = b.max(self.values[p].norm());
            }
        }
        let top = self.max_abs();
        if top > 0.0 {
            b / top
        } else {
            0.0
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let head: Vec<String> = (0..self.d).map(|j| format!("n{j}")).collect();
        writeln!(w, "{},re,im", head.join(","))?;
        let mut n = vec![0i64; self.d];
        for p in 0..self.len() {
            self.site(p, &mut n);
            let coords: Vec<String> = n.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{},{:e},{:e}", coords.join(","), self.values[p].re, self.values[p].im)?;
        }
        Ok(())
    }
}

fn site(mut p: usize, d: usize, m: usize, n: &mut [i64]) {
    let side = 2 * m + 1;
    for j in (0..d).rev() {
        n[j] = (p % side) as i64 - m as i64;
        p /= side;
    }
}

/// Torus length used for a box of radius `M`.
pub fn torus_points(m: usize) -> usize {
    (4 * m).next_power_of_two()
}

/// `(2π)^{−d} ∫ e^{in·ξ} T(ξ) f̂(ξ) dξ` by DFT on a zero-padded torus of `≥ 4M` points per axis.
/// `guard` rejects fields whose boundary values exceed that fraction of the maximum.
pub fn discrete_multiplier<T: Fn(&[f64]) -> Complex64>(
    t: T,
    f: &LatticeField,
    guard: Option<f64>,
) -> Result<LatticeField> {
    if let Some(g) = guard {
        let ratio = f.boundary_ratio();
        if ratio > g {
            return Err(Error::TailTooFat(ratio));
        }
    }
    let d = f.d;
    let p = torus_points(f.m);
    let shape = vec![p; d];
    let total = p.pow(d as u32);
    let mut data = vec![Complex64::new(0.0, 0.0); total];
    let mut n = vec![0i64; d];
    let wrap = |n: &[i64]| n.iter().fold(0usize, |acc, &v| acc * p + v.rem_euclid(p as i64) as usize);
    for q in 0..f.len() {
        f.site(q, &mut n);
        data[wrap(&n)] = f.values[q];
    }
    fft_nd(&mut data, &shape, 1, false);
    let mut xi = vec![0.0; d];
    let mut bad = None;
    for (q, v) in data.iter_mut().enumerate() {
        let mut r = q;
        for j in (0..d).rev() {
            xi[j] = 2.0 * std::f64::consts::PI * (r % p) as f64 / p as f64;
            r /= p;
        }
        let s = t(&xi);
        if !(s.re.is_finite() && s.im.is_finite()) {
            bad.get_or_insert_with(|| xi.clone());
        }
        *v *= s;
    }
    if let Some(xi) = bad {
        return Err(Error::SymbolSingular(xi));
    }
    fft_nd(&mut data, &shape, 1, true);
    let values = (0..f.len())
        .map(|q| {
            f.site(q, &mut n);
            data[wrap(&n)]
        })
        .collect();
    LatticeField::new(d, f.m, values)
}

/// `d f(n) − ½ Σ_j (f(n + e_j) + f(n − e_j))`, zero outside the box.
pub fn cosine_stencil(f: &LatticeField) -> LatticeField {
    let d = f.d;
    let mut n = vec![0i64; d];
    let values = (0..f.len())
        .map(|q| {
            f.site(q, &mut n);
            let mut s = f.values[q] * d as f64;
            for j in 0..d {
                n[j] += 1;
                s -= f.get(&n) * 0.5;
                n[j] -= 2;
                s -= f.get(&n) * 0.5;
                n[j] += 1;
            }
            s
        })
        .collect();
    LatticeField { d, m: f.m, values }
}

/// Continuum grid of half-width `2M` and spacing `1/4`, so that the integers are grid points.
pub fn continuum_grid(d: usize, m: usize) -> Result<GridSpec> {
    let half = 2.0 * m as f64;
    let points = (16 * m).next_power_of_two();
    let spacing = 2.0 * half / points as f64;
    if (1.0 / spacing).fract() != 0.0 {
        return Err(Error::ConfigInvalid(format!("M = {m} gives a grid that misses the integers")));
    }
    GridSpec::cube(d, half, points)
}

/// Values of a grid field at the integer sites of a box of radius `M`.
fn restrict(g: &GridField, m: usize) -> Result<LatticeField> {
    let spec = &g.spec;
    let d = spec.dim();
    let step = (1.0 / spec.spacing(0)).round() as i64;
    let mut idx = vec![0usize; d];
    LatticeField::from_fn(d, m, |n| {
        for j in 0..d {
            idx[j] = ((n[j] as f64 + spec.half_width[j]) / spec.spacing(j)).round() as usize;
            debug_assert_eq!((idx[j] as i64) % step, 0);
        }
        g.values[spec.ravel(&idx)]
    })
}

/// `max_n |T(D)(f|_{ℤ^d})(n) − (T(D)f)(n)|` with the continuum side computed spectrally on `ℝ^d`.
pub fn poisson_check<F, T>(f: F, t: T, d: usize, m: usize, guard: Option<f64>) -> Result<f64>
where
    F: Fn(&[f64]) -> Complex64,
    T: Fn(&[f64]) -> Complex64,
{
    let lat = LatticeField::from_fn(d, m, |n| {
        let x: Vec<f64> = n.iter().map(|v| *v as f64).collect();
        f(&x)
    })?;
    let discrete = discrete_multiplier(&t, &lat, guard)?;
    let spec = continuum_grid(d, m)?;
    let g = GridField::sample(&spec, "f", &f)?;
    let cont = restrict(&apply_multiplier(&g, &t)?, m)?;
    Ok(discrete.values.iter().zip(&cont.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteConfig {
    pub d: usize,
    pub lambda: f64,
    pub n: u32,
    pub n_decay: f64,
    pub m: usize,
    pub hint: Vec<f64>,
    /// exponent on the flat tangent directions when some curvature vanishes
    pub flat_power: f64,
}

impl DiscreteConfig {
    pub fn new(d: usize, lambda: f64) -> Self {
        DiscreteConfig { d, lambda, n: 1, n_decay: 6.0, m: 16, hint: vec![1.0; d], flat_power: 6.0 }
    }
}

#[derive(Clone, Debug)]
pub struct DiscreteExample {
    pub eta: Vec<f64>,
    pub weight: WeightSpec,
    pub k_nonvanishing: usize,
    pub u: LatticeField,
    pub v: LatticeField,
    /// true = `ψ` below `CORE_GUARD` of its maximum, `V` set to zero
    pub mask: Vec<bool>,
    /// `‖(H + V − λ)u‖₂/‖u‖₂` over unmasked `|n|_∞ ≤ M/2` with `H` the discrete cosine multiplier
    pub residual: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

/// `u(n) = e^{iη·n} ψ(n)` with `ψ` the anisotropic profile in the Fermi frame and
/// `V = −((T(D)u)|_{ℤ^d} − λu)/u` from the continuum action of `T(ξ + η)` on `ψ`.
pub fn build_discrete_example(c: &DiscreteConfig) -> Result<DiscreteExample> {
    let d = c.d;
    if !(c.lambda > 0.0 && c.lambda < 2.0 * d as f64) {
        return Err(Error::ConfigInvalid(format!("lambda must lie in (0, {})", 2 * d)));
    }
    let symbol = SymbolSpec::DiscreteCosine { d };
    let fermi = find_fermi_point(&symbol, c.lambda, &c.hint)?;
    let k = fermi.k_nonvanishing;
    let weight = if k + 1 == d { WeightSpec::thm1(d) } else { WeightSpec::thm2(d, k, c.flat_power)? };
    let threshold = weight.gamma.iter().sum::<f64>() / 2.0;
    if !(c.n_decay > threshold) {
        return Err(Error::ConfigInvalid(format!("N must exceed {threshold}")));
    }
    let frame = fermi.frame.clone();
    let frame_t: Vec<f64> = (0..d * d).map(|p| frame[(p % d) * d + p / d]).collect();
    let series = taylor_series(&symbol, &fermi.eta, c.lambda, 6).compose_linear(&frame_t);
    let zero_tol = 1e-10 * series.max_coeff().max(1.0);
    let taylor = TaylorSupport::from_poly(&series, &fermi.eta_frame(), 6, zero_tol, true);
    let gamma = check_gamma_condition(&taylor, &weight.gamma)?;
    if !gamma.holds {
        return Err(Error::ConfigInvalid(format!("weight fails the Taylor-support condition ({})", gamma.margin_exact)));
    }

    let h = 1.0 / c.n as f64;
    let hf: Vec<f64> = weight.gamma.iter().map(|g| h.powf(*g)).collect();
    let psi = |x: &[f64]| {
        let mut y = [0.0f64; 8];
        for i in 0..d {
            y[i] = hf[i] * (0..d).map(|j| frame[i * d + j] * x[j]).sum::<f64>();
        }
        weight.rho_sq(&y[..d]).powf(-c.n_decay / 2.0)
    };
    let spec = continuum_grid(d, c.m)?;
    let psi_grid = GridField::sample_real(&spec, "psi", psi)?;
    let eta = fermi.eta.clone();
    let lambda = c.lambda;
    let shifted = apply_multiplier(&psi_grid, |xi| {
        let mut s = [0.0f64; 8];
        for j in 0..d {
            s[j] = xi[j] + eta[j];
        }
        symbol.evaluate(&s[..d]) - lambda
    })?;
    let num = restrict(&shifted, c.m)?;
    let psi_lat = restrict(&psi_grid, c.m)?;
    let phase = |n: &[i64]| Complex64::from_polar(1.0, n.iter().zip(&eta).map(|(a, b)| *a as f64 * b).sum());
    let u = LatticeField::from_fn(d, c.m, |n| phase(n) * psi_lat.get(n))?;
    let top = psi_lat.max_abs();
    let mask: Vec<bool> = psi_lat.values.iter().map(|p| p.re < CORE_GUARD * top).collect();
    let v = LatticeField::new(
        d,
        c.m,
        num.values
            .iter()
            .zip(&psi_lat.values)
            .zip(&mask)
            .map(|((a, b), m)| if *m { Complex64::new(0.0, 0.0) } else { -a / b.re })
            .collect(),
    )?;

    let hu = discrete_multiplier(|xi| symbol.evaluate(xi), &u, None)?;
    let inner = (c.m / 2) as i64;
    let mut n = vec![0i64; d];
    let (mut num2, mut den2) = (0.0, 0.0);
    for q in 0..u.len() {
        u.site(q, &mut n);
        if mask[q] || n.iter().any(|x| x.abs() > inner) {
            continue;
        }
        num2 += (hu.values[q] + v.values[q] * u.values[q] - u.values[q] * lambda).norm_sqr();
        den2 += u.values[q].norm_sqr();
    }
    let mut diag = BTreeMap::new();
    diag.insert("boundary_ratio".into(), u.boundary_ratio());
    diag.insert("gamma_margin".into(), gamma.margin);
    diag.insert("k_nonvanishing".into(), k as f64);
    diag.insert("masked_fraction".into(), mask.iter().filter(|m| **m).count() as f64 / mask.len() as f64);
    diag.insert("v_max".into(), v.max_abs());
    diag.insert("v_imag_max".into(), v.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max));
    Ok(DiscreteExample {
        eta,
        weight,
        k_nonvanishing: k,
        u,
        v,
        mask,
        residual: (num2 / den2).sqrt(),
        diagnostics: diag,
    })
}
