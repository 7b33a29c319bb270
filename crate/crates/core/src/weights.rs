//! Anisotropic temperate weights `ρ(x)² = 1 + Σ_g |x_g|^{p_g}` over coordinate groups.
//!
//! Each group contributes exponent `γ_j = 2/p_g` on its axes, so that
//! `ρ(hx)² = 1 + h²Σ_g|x_g|^{p_g}` under the scaling `hx = (h^{γ_j} x_j)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_to_spectrum, spectrum, GridField};
use crate::poly::MultiIndex;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightGroup {
    pub axes: Vec<usize>,
    pub power: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    Thm1,
    Thm2 { k: usize, flat_power: f64 },
    Radial,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub d: usize,
    pub groups: Vec<WeightGroup>,
    pub gamma: Vec<f64>,
    pub ell: f64,
    /// temperate exponent in `ρ(x) ≤ C ρ(y)⟨x−y⟩^s`
    pub s: f64,
    pub c: f64,
}

impl WeightSpec {
    pub fn from_groups(kind: WeightKind, d: usize, groups: Vec<WeightGroup>, ell: f64) -> Result<Self> {
        let mut gamma = vec![0.0; d];
        let mut seen = vec![false; d];
        for g in &groups {
            if !(g.power >= 2.0) {
                return Err(Error::ConfigInvalid("group powers must be at least 2".into()));
            }
            for &a in &g.axes {
                if a >= d || seen[a] {
                    return Err(Error::ConfigInvalid(format!("axis {a} missing or repeated in weight groups")));
                }
                seen[a] = true;
                gamma[a] = 2.0 / g.power;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::ConfigInvalid("every axis must belong to a weight group".into()));
        }
        let pmax = groups.iter().map(|g| g.power).fold(0.0, f64::max);
        let c = (2f64.powf(pmax - 1.0) * (1.0 + groups.len() as f64)).sqrt();
        Ok(WeightSpec { kind, d, groups, gamma, ell, s: pmax / 2.0, c })
    }

    /// `(1 + |x'|⁴ + x_d²)^{1/2}`.
    pub fn thm1(d: usize) -> Self {
        let mut groups = Vec::new();
        if d > 1 {
            groups.push(WeightGroup { axes: (0..d - 1).collect(), power: 4.0 });
        }
        groups.push(WeightGroup { axes: vec![d - 1], power: 2.0 });
        Self::from_groups(WeightKind::Thm1, d, groups, 0.0).unwrap()
    }

    /// `(1 + |x'|⁴ + |x''|^{p} + x_d²)^{1/2}` with `x'` the first `k` axes; `p = 6` in the generic case.
    pub fn thm2(d: usize, k: usize, flat_power: f64) -> Result<Self> {
        if d < 2 || k + 1 >= d {
            return Err(Error::ConfigInvalid(format!("thm2 weight needs k < d-1, got k={k}, d={d}")));
        }
        let mut groups = Vec::new();
        if k > 0 {
            groups.push(WeightGroup { axes: (0..k).collect(), power: 4.0 });
        }
        groups.push(WeightGroup { axes: (k..d - 1).collect(), power: flat_power });
        groups.push(WeightGroup { axes: vec![d - 1], power: 2.0 });
        Self::from_groups(WeightKind::Thm2 { k, flat_power }, d, groups, 0.0)
    }

    /// `(1 + |x|²)^{1/2}`.
    pub fn radial(d: usize) -> Self {
        Self::from_groups(WeightKind::Radial, d, vec![WeightGroup { axes: (0..d).collect(), power: 2.0 }], 0.0)
            .unwrap()
    }

    /// `(1 + x_a² + |x_⊥|⁴)^{1/2}` with the distinguished axis `a` quadratic.
    pub fn normal_axis(d: usize, a: usize) -> Self {
        let rest: Vec<usize> = (0..d).filter(|&j| j != a).collect();
        let mut groups = vec![WeightGroup { axes: vec![a], power: 2.0 }];
        if !rest.is_empty() {
            groups.push(WeightGroup { axes: rest, power: 4.0 });
        }
        Self::from_groups(WeightKind::Custom, d, groups, 0.0).unwrap()
    }

    pub fn with_ell(mut self, ell: f64) -> Self {
        self.ell = ell;
        self
    }

    /// `Σ_g |x_g|^{p_g}`.
    pub fn anisotropic_sum(&self, x: &[f64]) -> f64 {
        self.groups
            .iter()
            .map(|g| {
                let r2: f64 = g.axes.iter().map(|&a| x[a] * x[a]).sum();
                r2.powf(g.power / 2.0)
            })
            .sum()
    }

    pub fn rho_sq(&self, x: &[f64]) -> f64 {
        1.0 + self.anisotropic_sum(x)
    }

    pub fn rho(&self, x: &[f64]) -> f64 {
        self.rho_sq(x).sqrt()
    }

    /// Decay weight `n + Σ_g |x_g|^{p_g/2}` of the potential envelopes.
    pub fn envelope_weight(&self, n: f64, x: &[f64]) -> f64 {
        n + self
            .groups
            .iter()
            .map(|g| {
                let r2: f64 = g.axes.iter().map(|&a| x[a] * x[a]).sum();
                r2.powf(g.power / 4.0)
            })
            .sum::<f64>()
    }

    /// `ρ(x) / (C ρ(y)⟨x−y⟩^s)`; at most 1 for a temperate weight.
    pub fn temperate_ratio(&self, x: &[f64], y: &[f64]) -> f64 {
        let z2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        self.rho(x) / (self.c * self.rho(y) * (1.0 + z2).powf(self.s / 2.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleParam {
    pub n: u32,
    pub h: f64,
}

impl ScaleParam {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::ConfigInvalid("n must be positive".into()));
        }
        Ok(ScaleParam { n, h: 1.0 / n as f64 })
    }
}

/// `hx = (h^{γ_1}x_1, …, h^{γ_d}x_d)`.
pub fn scale_point(h: f64, gamma: &[f64], x: &[f64]) -> Vec<f64> {
    x.iter().zip(gamma).map(|(xi, g)| h.powf(*g) * xi).collect()
}

fn multi_indices(d: usize, max_order: u32) -> Vec<MultiIndex> {
    let mut out = vec![vec![0u32; d]];
    for _ in 0..max_order {
        let mut next = Vec::new();
        for a in &out {
            for j in 0..d {
                let mut b = a.clone();
                b[j] += 1;
                next.push(b);
            }
        }
        out.extend(next);
    }
    out.sort();
    out.dedup();
    out.sort_by_key(|a| a.iter().sum::<u32>());
    out
}

/// Fraction of spectral energy with some `|k_j| > N_j/3`.
pub fn high_band_fraction(spec: &crate::grid::GridSpec, s: &[Complex64]) -> f64 {
    let d = spec.dim();
    let mut idx = vec![0usize; d];
    let (mut hi, mut tot) = (0.0, 0.0);
    for (p, v) in s.iter().enumerate() {
        spec.unravel(p, &mut idx);
        let e = v.norm_sqr();
        tot += e;
        let high = (0..d).any(|j| {
            let n = spec.points[j];
            let k = if idx[j] < n / 2 { idx[j] } else { n - idx[j] };
            3 * k > n
        });
        if high {
            hi += e;
        }
    }
    if tot == 0.0 {
        0.0
    } else {
        hi / tot
    }
}

/// Symbol-class constants `C_α = max |∂^α f| ρ^{−ℓ+Σγ_jα_j}` over the inner 80% of the box.
pub fn envelope_check(f: &GridField, w: &WeightSpec, ell: f64, max_order: u32) -> Result<Vec<(MultiIndex, f64)>> {
    let spec = &f.spec;
    let d = spec.dim();
    let s = spectrum(f);
    let inner = spec.inner_region(0.8);
    let mut x = vec![0.0; d];
    let mut out = Vec::new();
    for alpha in multi_indices(d, max_order) {
        let deriv_symbol = |xi: &[f64]| -> Complex64 {
            let mut m = Complex64::new(1.0, 0.0);
            for j in 0..d {
                for _ in 0..alpha[j] {
                    m *= Complex64::new(0.0, xi[j]);
                }
            }
            m
        };
        let order: u32 = alpha.iter().sum();
        if order > 0 {
            let ds: Vec<Complex64> = {
                let mut idx = vec![0usize; d];
                let mut xi = vec![0.0; d];
                s.iter()
                    .enumerate()
                    .map(|(p, v)| {
                        spec.unravel(p, &mut idx);
                        for j in 0..d {
                            xi[j] = spec.freq(j, idx[j]);
                        }
                        v * deriv_symbol(&xi)
                    })
                    .collect()
            };
            let frac = high_band_fraction(spec, &ds);
            if frac > 0.01 {
                return Err(Error::GridTooCoarse(frac));
            }
        }
        let df = if order == 0 { f.clone() } else { apply_to_spectrum(spec, f.channels, &s, deriv_symbol, "deriv")? };
        let shift: f64 = alpha.iter().zip(&w.gamma).map(|(&a, g)| a as f64 * g).sum();
        let mut c: f64 = 0.0;
        for p in 0..spec.len() {
            if !inner[p] {
                continue;
            }
            spec.point(p, &mut x);
            c = c.max(df.abs_at(p) * w.rho(&x).powf(-ell + shift));
        }
        out.push((alpha, c));
    }
    Ok(out)
}
