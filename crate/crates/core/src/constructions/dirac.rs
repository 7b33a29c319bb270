//! Matrix-valued potentials for the Dirac operator `α·D + β`.
//!
//! `u_n = e^{iκx_d}ψ_n v` with `ψ_n = (n² + |x'|⁴ + x_d²)^{−N/2}`, `κ = √(λ² − 1)` and
//! `(κα_d + β)v = λv`. Then `V_n = −ψ_n^{−1} Σ_j (D_jψ_n) α_j` is anti-hermitian and
//! given in closed form.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{snap_half_width, tail_check, Builder, Construction, Operator, Recipe};
use crate::error::{Error, Result};
use crate::grid::{GridField, GridSpec};
use crate::symbols::SymbolSpec;
use crate::weights::{ScaleParam, WeightSpec};

pub const TOL_CLIFFORD: f64 = 1e-14;

pub fn spinor_dim(d: usize) -> usize {
    if d <= 2 {
        2
    } else {
        4
    }
}

type Mat = Vec<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli() -> [Mat; 3] {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [vec![z, o, o, z], vec![z, -i, i, z], vec![o, z, z, -o]]
}

fn matmul(a: &[Complex64], b: &[Complex64], k: usize) -> Mat {
    let mut out = vec![c(0.0, 0.0); k * k];
    for r in 0..k {
        for s in 0..k {
            out[r * k + s] = (0..k).map(|t| a[r * k + t] * b[t * k + s]).sum();
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracData {
    pub d: usize,
    pub k: usize,
    /// row-major `K×K`
    pub alphas: Vec<Mat>,
    pub beta: Mat,
    pub v: Vec<Complex64>,
    pub lambda: f64,
    /// plane-wave frequency `√(λ² − 1)`
    pub kappa: f64,
}

impl DiracData {
    /// Standard matrices: Pauli for `d ≤ 2`, the Dirac representation for `d = 3`.
    pub fn new(d: usize, lambda: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::UnsupportedKind(format!("dirac matrices for d = {d}")));
        }
        if !(lambda.abs() > 1.0) {
            return Err(Error::ConfigInvalid("|lambda| must exceed the mass gap 1".into()));
        }
        let s = pauli();
        let (alphas, beta, k) = if d <= 2 {
            (s[..d].to_vec(), s[2].clone(), 2)
        } else {
            let z = c(0.0, 0.0);
            let alphas = (0..3)
                .map(|j| {
                    let mut m = vec![z; 16];
                    for r in 0..2 {
                        for q in 0..2 {
                            m[r * 4 + q + 2] = s[j][r * 2 + q];
                            m[(r + 2) * 4 + q] = s[j][r * 2 + q];
                        }
                    }
                    m
                })
                .collect();
            let mut beta = vec![z; 16];
            for r in 0..4 {
                beta[r * 5] = c(if r < 2 { 1.0 } else { -1.0 }, 0.0);
            }
            (alphas, beta, 4)
        };
        let kappa = (lambda * lambda - 1.0).sqrt();
        let mut data = DiracData { d, k, alphas, beta, v: vec![], lambda, kappa };
        let defect = data.clifford_defect();
        if defect > TOL_CLIFFORD {
            return Err(Error::CliffordViolation(defect));
        }
        data.v = data.eigenvector()?;
        Ok(data)
    }

    /// `κα_d + β`.
    pub fn plane_matrix(&self) -> Mat {
        let a = &self.alphas[self.d - 1];
        a.iter().zip(&self.beta).map(|(x, y)| x * self.kappa + y).collect()
    }

    /// First standard basis vector with nonzero projection onto the `λ`-eigenspace, projected and normalized.
    fn eigenvector(&self) -> Result<Vec<Complex64>> {
        let k = self.k;
        let m = self.plane_matrix();
        for i in 0..k {
            let v: Vec<Complex64> = (0..k)
                .map(|r| {
                    let id = if r == i { 1.0 } else { 0.0 };
                    (m[r * k + i] / self.lambda + id) * 0.5
                })
                .collect();
            let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nrm > 1e-8 {
                return Ok(v.into_iter().map(|z| z / nrm).collect());
            }
        }
        Err(Error::CliffordViolation(1.0))
    }

    /// Max entry of all anticommutator defects.
    pub fn clifford_defect(&self) -> f64 {
        let k = self.k;
        let mut all: Vec<&Mat> = self.alphas.iter().collect();
        all.push(&self.beta);
        let mut worst: f64 = 0.0;
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate().skip(i) {
                let ab = matmul(a, b, k);
                let ba = matmul(b, a, k);
                for r in 0..k {
                    for s in 0..k {
                        let target = if i == j && r == s { 2.0 } else { 0.0 };
                        worst = worst.max((ab[r * k + s] + ba[r * k + s] - target).norm());
                    }
                }
            }
        }
        worst
    }

    /// `max |(κα_d + β)v − λv|`.
    pub fn eigen_defect(&self) -> f64 {
        let k = self.k;
        let m = self.plane_matrix();
        (0..k)
            .map(|r| ((0..k).map(|s| m[r * k + s] * self.v[s]).sum::<Complex64>() - self.v[r] * self.lambda).norm())
            .fold(0.0, f64::max)
    }

    /// Fills `Σ ξ_j α_j + β − λI`.
    pub fn symbol_into(&self, xi: &[f64], lambda: f64, out: &mut [Complex64]) {
        let k = self.k;
        for r in 0..k * k {
            let mut s = self.beta[r];
            for j in 0..self.d {
                s += self.alphas[j][r] * xi[j];
            }
            out[r] = s;
        }
        for r in 0..k {
            out[r * k + r] -= lambda;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracConfig {
    pub d: usize,
    pub lambda: f64,
    pub n_decay: f64,
    pub n: u32,
    /// `4√n` when absent
    pub perp_half: Option<f64>,
    /// `4πn` when absent, rounded up to a period of the plane wave
    pub normal_half: Option<f64>,
    pub perp_points: usize,
    pub normal_points: usize,
}

impl DiracConfig {
    pub fn new(d: usize, n: u32) -> Self {
        DiracConfig {
            d,
            lambda: 2f64.sqrt(),
            n_decay: 8.0,
            n,
            perp_half: None,
            normal_half: None,
            perp_points: 128,
            normal_points: 256,
        }
    }

    pub fn grid(&self, kappa: f64) -> Result<GridSpec> {
        let d = self.d;
        let n = self.n as f64;
        let mut half = vec![self.perp_half.unwrap_or(4.0 * n.sqrt()); d];
        half[d - 1] = snap_half_width(self.normal_half.unwrap_or(4.0 * PI * n), kappa);
        let mut pts = vec![self.perp_points; d];
        pts[d - 1] = self.normal_points;
        GridSpec::new(half, pts, vec![0.0; d])
    }
}

fn base(n: f64, x: &[f64]) -> f64 {
    let d = x.len();
    let p2: f64 = x[..d - 1].iter().map(|v| v * v).sum();
    n * n + p2 * p2 + x[d - 1] * x[d - 1]
}

fn psi(c: &DiracConfig, x: &[f64]) -> f64 {
    base(c.n as f64, x).powf(-c.n_decay / 2.0)
}

/// `∂_j log ψ_n` in closed form.
fn dlog(c: &DiracConfig, x: &[f64], out: &mut [f64]) {
    let d = x.len();
    let b = base(c.n as f64, x);
    let p2: f64 = x[..d - 1].iter().map(|v| v * v).sum();
    for j in 0..d - 1 {
        out[j] = -0.5 * c.n_decay * 4.0 * p2 * x[j] / b;
    }
    out[d - 1] = -0.5 * c.n_decay * 2.0 * x[d - 1] / b;
}

pub fn build(c: &DiracConfig) -> Result<Construction> {
    let d = c.d;
    ScaleParam::new(c.n)?;
    let thr = (d as f64 + 1.0) / 4.0;
    if !(c.n_decay > thr) {
        return Err(Error::ConfigInvalid(format!("N must exceed (d+1)/4 = {thr}")));
    }
    let data = DiracData::new(d, c.lambda)?;
    let k = data.k;
    let spec = c.grid(data.kappa)?;
    let tails = tail_check(|x| psi(c, x), &spec, 1e-6)?;
    let u = sample_with(c, &data, &spec)?;
    let v = GridField::sample_channels(&spec, k * k, "V", |x, out| {
        let mut g = [0.0f64; 8];
        dlog(c, x, &mut g[..d]);
        for r in 0..k * k {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..d {
                s += data.alphas[j][r] * g[j];
            }
            out[r] = s * Complex64::new(0.0, 1.0);
        }
    })?;
    let mut diag = BTreeMap::new();
    for (j, t) in tails.iter().enumerate() {
        diag.insert(format!("tail_ratio_{j}"), *t);
    }
    diag.insert("clifford_defect".into(), data.clifford_defect());
    diag.insert("eigen_defect".into(), data.eigen_defect());
    diag.insert("kappa".into(), data.kappa);
    let mut eta = vec![0.0; d];
    eta[d - 1] = data.kappa;
    Ok(Construction {
        builder: Builder::Dirac,
        u,
        v,
        lambda: c.lambda,
        scale: ScaleParam::new(c.n)?,
        symbol: SymbolSpec::laplacian(d),
        operator: Operator::Dirac { d },
        weight: WeightSpec::thm1(d),
        reg: None,
        mask: vec![false; spec.len()],
        recipe: Recipe::Dirac(c.clone()),
        eta,
        diagnostics: diag,
        radial: None,
        dirac: Some(data),
    })
}

fn sample_with(c: &DiracConfig, data: &DiracData, spec: &GridSpec) -> Result<GridField> {
    let d = spec.dim();
    GridField::sample_channels(spec, data.k, "u", |x, out| {
        let s = Complex64::from_polar(psi(c, x), data.kappa * x[d - 1]);
        for (o, v) in out.iter_mut().zip(&data.v) {
            *o = s * v;
        }
    })
}

pub fn sample_u(c: &DiracConfig, spec: &GridSpec) -> Result<GridField> {
    let data = DiracData::new(c.d, c.lambda)?;
    sample_with(c, &data, spec)
}

/// `max_x ‖V(x) + V(x)†‖_F`.
pub fn antihermitian_defect(v: &GridField) -> f64 {
    let k = (v.channels as f64).sqrt().round() as usize;
    v.values
        .chunks(k * k)
        .map(|m| {
            let mut s = 0.0;
            for r in 0..k {
                for q in 0..k {
                    s += (m[r * k + q] + m[q * k + r].conj()).norm_sqr();
                }
            }
            s.sqrt()
        })
        .fold(0.0, f64::max)
}
