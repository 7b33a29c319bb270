//! Dyadic superposition of anisotropic bumps `u = Σ_{j≥1} 4^{−Nj} χ_j`.
//!
//! `χ_j` is supported where `q(x) = (|x'|⁴ + x_d²)^{1/2}` is comparable to `4^j`,
//! i.e. on a rectangle of size `2^j × 4^j`, and the `χ_j` telescope to a partition
//! of unity. The sum is then comparable to `(|x'|² + |x_d|)^{−N}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridField, GridSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnappConfig {
    pub d: usize,
    pub n_decay: f64,
    pub half_width: f64,
    pub points: usize,
    /// smallest `J` with `4^J ≥ max q` on the box when absent
    pub j_max: Option<u32>,
}

impl KnappConfig {
    pub fn new(d: usize) -> Self {
        KnappConfig { d, n_decay: 1.0, half_width: 64.0, points: 128, j_max: None }
    }
}

#[derive(Clone, Debug)]
pub struct KnappResult {
    pub u: GridField,
    pub c_lower: f64,
    pub c_upper: f64,
    /// `max |Σ_{j=0}^{J} χ_j − 1|` on the annulus
    pub partition_defect: f64,
    pub j_max: u32,
}

/// `1` on `[0, 1]`, `0` on `[1.9, ∞)`, `C^∞`.
pub fn cutoff(t: f64) -> f64 {
    let e = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    let s = (t - 1.0) / 0.9;
    e(1.0 - s) / (e(1.0 - s) + e(s))
}

fn q_of(x: &[f64]) -> f64 {
    let d = x.len();
    let p2: f64 = x[..d - 1].iter().map(|v| v * v).sum();
    (p2 * p2 + x[d - 1] * x[d - 1]).sqrt()
}

/// The tile `χ_j`; `χ_0 = Φ(q)`.
pub fn tile(j: u32, x: &[f64]) -> f64 {
    let q = q_of(x);
    if j == 0 {
        cutoff(q)
    } else {
        cutoff(q / 4f64.powi(j as i32)) - cutoff(q / 4f64.powi(j as i32 - 1))
    }
}

fn annulus(spec: &GridSpec, x: &[f64]) -> bool {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let lmin = spec.half_width.iter().cloned().fold(f64::INFINITY, f64::min);
    (2.0..=0.8 * lmin).contains(&r)
}

pub fn build_knapp(c: &KnappConfig) -> Result<KnappResult> {
    if c.d < 2 {
        return Err(Error::ConfigInvalid("d must be at least 2".into()));
    }
    let spec = GridSpec::cube(c.d, c.half_width, c.points)?;
    let l = c.half_width;
    let qmax = (((c.d - 1) as f64 * l * l).powi(2) + l * l).sqrt();
    let needed = (qmax.ln() / 4f64.ln()).ceil().max(1.0) as u32;
    let j_max = c.j_max.unwrap_or(needed);
    if 4f64.powi(j_max as i32) < qmax {
        return Err(Error::ConfigInvalid(format!("j_max must satisfy 4^j_max >= {qmax}")));
    }
    let d = c.d;
    let mut x = vec![0.0; d];
    let mut vals = Vec::with_capacity(spec.len());
    let (mut lo, mut hi, mut defect) = (f64::INFINITY, 0.0f64, 0.0f64);
    for p in 0..spec.len() {
        spec.point(p, &mut x);
        let mut u = 0.0;
        let mut total = tile(0, &x);
        for j in 1..=j_max {
            let t = tile(j, &x);
            total += t;
            u += 4f64.powf(-c.n_decay * j as f64) * t;
        }
        if annulus(&spec, &x) {
            defect = defect.max((total - 1.0).abs());
            let p2: f64 = x[..d - 1].iter().map(|v| v * v).sum();
            let ratio = u * (p2 + x[d - 1].abs()).powf(c.n_decay);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        vals.push(num_complex::Complex64::new(u, 0.0));
    }
    if defect > 1e-10 {
        return Err(Error::CoverGap(defect));
    }
    Ok(KnappResult {
        u: GridField::from_values(spec, 1, vals, "u")?,
        c_lower: lo,
        c_upper: hi,
        partition_defect: defect,
        j_max,
    })
}

/// Fraction of `χ_j`'s squared mass outside the doubled rectangle `|x'| ≤ 2·2^j, |x_d| ≤ 2·4^j`.
pub fn tile_leak(j: u32, spec: &GridSpec) -> f64 {
    let d = spec.dim();
    let (a, b) = (2.0 * 2f64.powi(j as i32), 2.0 * 4f64.powi(j as i32));
    let mut x = vec![0.0; d];
    let (mut out, mut tot) = (0.0, 0.0);
    for p in 0..spec.len() {
        spec.point(p, &mut x);
        let t = tile(j, &x).powi(2);
        tot += t;
        let p = x[..d - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
        if p > a || x[d - 1].abs() > b {
            out += t;
        }
    }
    if tot == 0.0 {
        0.0
    } else {
        out / tot
    }
}
