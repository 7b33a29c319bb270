//! Builders producing an eigenfunction `u` and a potential `V` with `(T(D) + V − λ)u = 0`.

pub mod anisotropic;
pub mod chandrasekhar;
pub mod dirac;
pub mod knapp;
pub mod radial;
pub mod real;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_matrix_multiplier_owned, apply_multiplier_owned, GridField, GridSpec};
use crate::symbols::SymbolSpec;
use crate::weights::{ScaleParam, WeightSpec};

pub use anisotropic::AnisoConfig;
pub use chandrasekhar::ChandrasekharConfig;
pub use dirac::{DiracConfig, DiracData};
pub use radial::{RadialConfig, RadialData};
pub use real::RealConfig;

/// Relative level below which a positive denominator counts as tail.
pub const TAIL_GUARD: f64 = 1e-6;
/// Relative guard for denominators with zeros, measured against the envelope.
pub const OSC_GUARD: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builder {
    Thm1,
    Thm2,
    Real,
    Radial,
    Chandrasekhar,
    Dirac,
}

impl Builder {
    pub fn name(&self) -> &'static str {
        match self {
            Builder::Thm1 => "thm1",
            Builder::Thm2 => "thm2",
            Builder::Real => "real",
            Builder::Radial => "radial",
            Builder::Chandrasekhar => "chandrasekhar",
            Builder::Dirac => "dirac",
        }
    }
}

/// Cutoff profile `χ` used by the correction terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiProfile {
    /// `exp(−t²/(2σ²))` with `σ = c/2`
    #[default]
    Gaussian,
    /// `1` on `[−c/2, c/2]`, `0` outside `(−c, c)`, `C^∞` in between
    Bump,
}

impl ChiProfile {
    pub fn eval(&self, c: f64, t: f64) -> f64 {
        match self {
            ChiProfile::Gaussian => {
                let s = 0.5 * c;
                (-t * t / (2.0 * s * s)).exp()
            }
            ChiProfile::Bump => {
                let a = t.abs();
                if a <= 0.5 * c {
                    1.0
                } else if a >= c {
                    0.0
                } else {
                    let s = (a - 0.5 * c) / (0.5 * c);
                    let e = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
                    e(1.0 - s) / (e(1.0 - s) + e(s))
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizationParams {
    /// decay exponent `N`
    pub n_decay: f64,
    pub m: u32,
    pub c: f64,
    pub kappa: f64,
    pub chi: ChiProfile,
}

/// The kinetic operator in the coordinates a construction is stored in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Operator {
    /// `ζ ↦ T(Bζ)` with `B` row-major, identity when absent.
    Scalar { symbol: SymbolSpec, map: Option<Vec<f64>> },
    /// `α·ξ + β` with the standard matrices of the given dimension.
    Dirac { d: usize },
}

impl Operator {
    pub fn channels(&self) -> usize {
        match self {
            Operator::Scalar { .. } => 1,
            Operator::Dirac { d } => dirac::spinor_dim(*d),
        }
    }

    pub fn eval_scalar(&self, z: &[f64]) -> Complex64 {
        match self {
            Operator::Scalar { symbol, map: None } => symbol.evaluate(z),
            Operator::Scalar { symbol, map: Some(b) } => {
                let d = z.len();
                let mut xi = [0.0f64; 8];
                for i in 0..d {
                    xi[i] = (0..d).map(|k| b[i * d + k] * z[k]).sum();
                }
                symbol.evaluate(&xi[..d])
            }
            Operator::Dirac { .. } => panic!("matrix operator has no scalar symbol"),
        }
    }

    /// `(T(D) − λ)u` on the grid of `u`.
    pub fn apply_shifted(&self, u: &GridField, lambda: f64) -> Result<GridField> {
        self.apply_shifted_owned(u.clone(), lambda)
    }

    /// [`Operator::apply_shifted`] reusing the storage of `u`.
    pub fn apply_shifted_owned(&self, u: GridField, lambda: f64) -> Result<GridField> {
        match self {
            Operator::Scalar { .. } => apply_multiplier_owned(u, |z| self.eval_scalar(z) - lambda),
            Operator::Dirac { d } => {
                let data = DiracData::new(*d, lambda)?;
                apply_matrix_multiplier_owned(u, |xi, m| data.symbol_into(xi, lambda, m))
            }
        }
    }
}

/// Everything needed to rebuild a construction, or its eigenfunction on another grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case")]
pub enum Recipe {
    Anisotropic(AnisoConfig),
    Real(RealConfig),
    Radial(RadialConfig),
    Chandrasekhar(ChandrasekharConfig),
    Dirac(DiracConfig),
}

impl Recipe {
    pub fn build(&self) -> Result<Construction> {
        match self {
            Recipe::Anisotropic(c) => anisotropic::build(c),
            Recipe::Real(c) => real::build(c),
            Recipe::Radial(c) => radial::build(c),
            Recipe::Chandrasekhar(c) => chandrasekhar::build(c),
            Recipe::Dirac(c) => dirac::build(c),
        }
    }

    pub fn builder(&self) -> Builder {
        match self {
            Recipe::Anisotropic(c) => match c.kind {
                anisotropic::AnisoKind::Thm1 => Builder::Thm1,
                anisotropic::AnisoKind::Thm2 { .. } => Builder::Thm2,
            },
            Recipe::Real(_) => Builder::Real,
            Recipe::Radial(_) => Builder::Radial,
            Recipe::Chandrasekhar(_) => Builder::Chandrasekhar,
            Recipe::Dirac(_) => Builder::Dirac,
        }
    }

    /// The same recipe at another scale parameter.
    pub fn at_n(&self, n: u32) -> Recipe {
        let mut r = self.clone();
        match &mut r {
            Recipe::Anisotropic(c) => c.n = n,
            Recipe::Real(_) => {}
            Recipe::Radial(c) => c.n = n,
            Recipe::Chandrasekhar(c) => c.n = n,
            Recipe::Dirac(c) => c.n = n,
        }
        r
    }
}

/// A built eigenfunction/potential pair with its provenance.
#[derive(Clone, Debug)]
pub struct Construction {
    pub builder: Builder,
    pub u: GridField,
    /// Scalar potential, or a row-major `K×K` matrix field for Dirac.
    pub v: GridField,
    pub lambda: f64,
    pub scale: ScaleParam,
    pub symbol: SymbolSpec,
    pub operator: Operator,
    pub weight: WeightSpec,
    pub reg: Option<RegularizationParams>,
    /// true = excluded by a guarded division or the tail cut
    pub mask: Vec<bool>,
    pub recipe: Recipe,
    /// Plane-wave frequency in construction coordinates.
    pub eta: Vec<f64>,
    pub diagnostics: BTreeMap<String, f64>,
    pub radial: Option<RadialData>,
    pub dirac: Option<DiracData>,
}

/// Serializable part of a construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub builder: Builder,
    pub lambda: f64,
    pub scale: ScaleParam,
    pub symbol: SymbolSpec,
    pub operator: Operator,
    pub weight: WeightSpec,
    pub reg: Option<RegularizationParams>,
    pub recipe: Recipe,
    pub eta: Vec<f64>,
    pub grid: GridSpec,
    pub u_channels: usize,
    pub v_channels: usize,
    pub masked_points: usize,
    pub diagnostics: BTreeMap<String, f64>,
    pub radial: Option<RadialData>,
    pub dirac: Option<DiracData>,
}

impl Construction {
    pub fn masked_fraction(&self) -> f64 {
        self.mask.iter().filter(|m| **m).count() as f64 / self.mask.len() as f64
    }

    /// `u` on another grid, from the recipe's closed-form ingredients.
    pub fn rebuild_u(&self, spec: &GridSpec) -> Result<GridField> {
        match &self.recipe {
            Recipe::Anisotropic(c) => anisotropic::sample_u(c, spec),
            Recipe::Real(c) => real::sample_u(c, spec),
            Recipe::Radial(c) => radial::sample_u(c, spec),
            Recipe::Chandrasekhar(c) => chandrasekhar::sample_u(c, spec),
            Recipe::Dirac(c) => dirac::sample_u(c, spec),
        }
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            builder: self.builder,
            lambda: self.lambda,
            scale: self.scale,
            symbol: self.symbol.clone(),
            operator: self.operator.clone(),
            weight: self.weight.clone(),
            reg: self.reg.clone(),
            recipe: self.recipe.clone(),
            eta: self.eta.clone(),
            grid: self.u.spec.clone(),
            u_channels: self.u.channels,
            v_channels: self.v.channels,
            masked_points: self.mask.iter().filter(|m| **m).count(),
            diagnostics: self.diagnostics.clone(),
            radial: self.radial.clone(),
            dirac: self.dirac.clone(),
        }
    }

    /// Writes `manifest.json`, `u.gf`, `V.gf` and `mask.bits` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&self.manifest())?)?;
        self.u.write_gf(&dir.join("u.gf"))?;
        self.v.write_gf(&dir.join("V.gf"))?;
        fs::write(dir.join("mask.bits"), pack_bits(&self.mask))?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Construction> {
        let m: Manifest = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
        let u = GridField::read_gf(&dir.join("u.gf"))?;
        let v = GridField::read_gf(&dir.join("V.gf"))?;
        if u.spec != m.grid || v.spec != m.grid {
            return Err(Error::GridMismatch("stored fields disagree with the manifest grid".into()));
        }
        let mask = unpack_bits(&fs::read(dir.join("mask.bits"))?, m.grid.len())?;
        Ok(Construction {
            builder: m.builder,
            u,
            v,
            lambda: m.lambda,
            scale: m.scale,
            symbol: m.symbol,
            operator: m.operator,
            weight: m.weight,
            reg: m.reg,
            mask,
            recipe: m.recipe,
            eta: m.eta,
            diagnostics: m.diagnostics,
            radial: m.radial,
            dirac: m.dirac,
        })
    }
}

pub fn pack_bits(mask: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; mask.len().div_ceil(8)];
    for (i, &b) in mask.iter().enumerate() {
        if b {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

pub fn unpack_bits(bytes: &[u8], len: usize) -> Result<Vec<bool>> {
    if bytes.len() != len.div_ceil(8) {
        return Err(Error::Format(format!("mask has {} bytes, expected {}", bytes.len(), len.div_ceil(8))));
    }
    Ok((0..len).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect())
}

/// `ψ(L_j e_j)/ψ(0)` on each axis; errors with `BoxTooSmall` above `limit`.
pub(crate) fn tail_check<F: Fn(&[f64]) -> f64>(psi: F, spec: &GridSpec, limit: f64) -> Result<Vec<f64>> {
    let d = spec.dim();
    let p0 = psi(&vec![0.0; d]);
    let mut out = Vec::with_capacity(d);
    for j in 0..d {
        let mut x = vec![0.0; d];
        x[j] = spec.half_width[j];
        let r = psi(&x) / p0;
        if r > limit {
            return Err(Error::BoxTooSmall { axis: j, ratio: r, limit });
        }
        out.push(r);
    }
    Ok(out)
}

/// Points where a positive envelope is at least `TAIL_GUARD` of its maximum.
pub(crate) fn core_region(env: &[f64]) -> Vec<bool> {
    let max = env.iter().cloned().fold(0.0, f64::max);
    env.iter().map(|&e| e >= TAIL_GUARD * max).collect()
}

/// `L` rounded up to a multiple of `π/|k|` so that `e^{ikx}` is periodic on `[−L, L)`.
pub(crate) fn snap_half_width(l: f64, k: f64) -> f64 {
    if k.abs() < 1e-14 {
        return l;
    }
    let unit = std::f64::consts::PI / k.abs();
    (l / unit - 1e-9).ceil().max(1.0) * unit
}
