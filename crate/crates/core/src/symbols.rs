//! Dispersion relations `T(ξ)` and their algebraic data: Fermi points, frames,
//! curvatures, Taylor supports and the conditions the constructions rely on.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::newton::newton_vertices;
use crate::poly::{MultiIndex, Poly};

pub const TOL_REGULAR: f64 = 1e-8;
pub const TOL_CURVATURE: f64 = 1e-8;

pub fn tol_fermi(lambda: f64) -> f64 {
    1e-12 * (1.0 + lambda.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coeff {
    pub alpha: MultiIndex,
    pub c: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub ci: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolSpec {
    Polynomial { d: usize, coeffs: Vec<Coeff> },
    /// `Σ_j c_j |ξ|^{2j}`
    RadialPolynomial { d: usize, radial: Vec<f64> },
    /// `√(|ξ|² + m²) − m`
    Chandrasekhar { d: usize, mass: f64 },
    /// `d − Σ cos ξ_j`
    DiscreteCosine { d: usize },
}

impl SymbolSpec {
    pub fn laplacian(d: usize) -> Self {
        let coeffs = (0..d)
            .map(|j| {
                let mut a = vec![0; d];
                a[j] = 2;
                Coeff { alpha: a, c: 1.0, ci: 0.0 }
            })
            .collect();
        SymbolSpec::Polynomial { d, coeffs }
    }

    /// `Σ_{j<k} ξ_j²` in dimension `d`.
    pub fn partial_laplacian(d: usize, k: usize) -> Self {
        let coeffs = (0..k)
            .map(|j| {
                let mut a = vec![0; d];
                a[j] = 2;
                Coeff { alpha: a, c: 1.0, ci: 0.0 }
            })
            .collect();
        SymbolSpec::Polynomial { d, coeffs }
    }

    pub fn dim(&self) -> usize {
        match self {
            SymbolSpec::Polynomial { d, .. }
            | SymbolSpec::RadialPolynomial { d, .. }
            | SymbolSpec::Chandrasekhar { d, .. }
            | SymbolSpec::DiscreteCosine { d } => *d,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SymbolSpec::Polynomial { .. } => "polynomial",
            SymbolSpec::RadialPolynomial { .. } => "radial_polynomial",
            SymbolSpec::Chandrasekhar { .. } => "chandrasekhar",
            SymbolSpec::DiscreteCosine { .. } => "discrete_cosine",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SymbolSpec::Polynomial { d, coeffs } => {
                for c in coeffs {
                    if c.alpha.len() != *d {
                        return Err(Error::ConfigInvalid(format!("multi-index {:?} has wrong length", c.alpha)));
                    }
                    if (c.c == 0.0 && c.ci == 0.0) || !c.c.is_finite() || !c.ci.is_finite() {
                        return Err(Error::ConfigInvalid(format!(
                            "coefficient of {:?} must be finite and nonzero",
                            c.alpha
                        )));
                    }
                }
                let mut seen: Vec<&MultiIndex> = coeffs.iter().map(|c| &c.alpha).collect();
                seen.sort();
                if seen.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::ConfigInvalid("repeated multi-index".into()));
                }
            }
            SymbolSpec::RadialPolynomial { radial, .. } => {
                if radial.last().is_none_or(|c| *c == 0.0) {
                    return Err(Error::ConfigInvalid("top radial coefficient must be nonzero".into()));
                }
            }
            SymbolSpec::Chandrasekhar { mass, .. } => {
                if !(*mass > 0.0) {
                    return Err(Error::ConfigInvalid("mass must be positive".into()));
                }
            }
            SymbolSpec::DiscreteCosine { .. } => {}
        }
        if self.dim() == 0 {
            return Err(Error::ConfigInvalid("dimension must be positive".into()));
        }
        Ok(())
    }

    /// Exact polynomial form for the polynomial and radial kinds.
    pub fn to_poly(&self) -> Option<Poly> {
        match self {
            SymbolSpec::Polynomial { d, coeffs } => {
                let mut p = Poly::zero(*d);
                for c in coeffs {
                    p.add_term(c.alpha.clone(), Complex64::new(c.c, c.ci));
                }
                Some(p)
            }
            SymbolSpec::RadialPolynomial { d, radial } => {
                let r2 = SymbolSpec::laplacian(*d).to_poly().unwrap();
                let mut p = Poly::zero(*d);
                let mut pw = Poly::constant(*d, Complex64::new(1.0, 0.0));
                for c in radial {
                    if *c != 0.0 {
                        p = p.add(&pw.scale(Complex64::new(*c, 0.0)));
                    }
                    pw = pw.mul(&r2);
                }
                Some(p)
            }
            _ => None,
        }
    }

    pub fn evaluate(&self, xi: &[f64]) -> Complex64 {
        match self {
            SymbolSpec::Polynomial { coeffs, .. } => coeffs
                .iter()
                .map(|c| {
                    let m: f64 = c.alpha.iter().zip(xi).map(|(&e, &x)| x.powi(e as i32)).product();
                    Complex64::new(c.c, c.ci) * m
                })
                .sum(),
            SymbolSpec::RadialPolynomial { radial, .. } => {
                let r2: f64 = xi.iter().map(|x| x * x).sum();
                let mut acc = 0.0;
                for c in radial.iter().rev() {
                    acc = acc * r2 + c;
                }
                Complex64::new(acc, 0.0)
            }
            SymbolSpec::Chandrasekhar { mass, .. } => {
                let r2: f64 = xi.iter().map(|x| x * x).sum();
                Complex64::new((r2 + mass * mass).sqrt() - mass, 0.0)
            }
            SymbolSpec::DiscreteCosine { d } => {
                Complex64::new(*d as f64 - xi.iter().map(|x| x.cos()).sum::<f64>(), 0.0)
            }
        }
    }

    /// Analytic gradient (real part).
    pub fn gradient(&self, xi: &[f64]) -> Vec<f64> {
        let d = self.dim();
        match self {
            SymbolSpec::Polynomial { .. } => {
                let p = self.to_poly().unwrap();
                (0..d).map(|j| p.derivative(j).eval(xi).re).collect()
            }
            SymbolSpec::RadialPolynomial { radial, .. } => {
                let r2: f64 = xi.iter().map(|x| x * x).sum();
                // d/dr² of Σ c_j r^{2j}
                let mut acc = 0.0;
                for (j, c) in radial.iter().enumerate().skip(1).rev() {
                    acc = acc * r2 + j as f64 * c;
                }
                xi.iter().map(|x| 2.0 * x * acc).collect()
            }
            SymbolSpec::Chandrasekhar { mass, .. } => {
                let r2: f64 = xi.iter().map(|x| x * x).sum();
                let s = (r2 + mass * mass).sqrt();
                xi.iter().map(|x| x / s).collect()
            }
            SymbolSpec::DiscreteCosine { .. } => xi.iter().map(|x| x.sin()).collect(),
        }
    }

    /// Analytic Hessian (real part).
    pub fn hessian(&self, xi: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        match self {
            SymbolSpec::Polynomial { .. } => {
                let p = self.to_poly().unwrap();
                DMatrix::from_fn(d, d, |i, j| p.derivative(i).derivative(j).eval(xi).re)
            }
            SymbolSpec::RadialPolynomial { radial, .. } => {
                let r2: f64 = xi.iter().map(|x| x * x).sum();
                let (mut g1, mut g2) = (0.0, 0.0);
                for (j, c) in radial.iter().enumerate().skip(1).rev() {
                    g1 = g1 * r2 + j as f64 * c;
                }
                for (j, c) in radial.iter().enumerate().skip(2).rev() {
                    g2 = g2 * r2 + (j * (j - 1)) as f64 * c;
                }
                DMatrix::from_fn(d, d, |i, j| {
                    let delta = if i == j { 2.0 * g1 } else { 0.0 };
                    delta + 4.0 * xi[i] * xi[j] * g2
                })
            }
            SymbolSpec::Chandrasekhar { mass, .. } => {
                let r2: f64 = xi.iter().map(|x| x * x).sum();
                let s = (r2 + mass * mass).sqrt();
                DMatrix::from_fn(d, d, |i, j| {
                    let delta = if i == j { 1.0 / s } else { 0.0 };
                    delta - xi[i] * xi[j] / (s * s * s)
                })
            }
            SymbolSpec::DiscreteCosine { .. } => {
                DMatrix::from_fn(d, d, |i, j| if i == j { xi[i].cos() } else { 0.0 })
            }
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            SymbolSpec::Polynomial { coeffs, .. } => coeffs.iter().all(|c| c.ci == 0.0),
            _ => true,
        }
    }

    /// `T(ξ) = T(−ξ)` checked coefficient-wise; returns the first offending multi-index.
    pub fn check_even(&self) -> Result<()> {
        if let SymbolSpec::Polynomial { coeffs, .. } = self {
            if let Some(c) = coeffs.iter().find(|c| c.alpha.iter().sum::<u32>() % 2 == 1) {
                return Err(Error::NotEven(c.alpha.clone()));
            }
        }
        Ok(())
    }

    /// Evaluator for `ζ ↦ T(Qᵀζ + shift)` with `Q` row-major orthogonal (frame coordinates).
    pub fn framed(&self, q: &[f64], shift: &[f64]) -> impl Fn(&[f64]) -> Complex64 + '_ {
        let d = self.dim();
        let q = q.to_vec();
        let shift = shift.to_vec();
        move |z: &[f64]| {
            let mut xi = [0.0f64; 8];
            for i in 0..d {
                let mut s = shift[i];
                for k in 0..d {
                    s += q[k * d + i] * z[k];
                }
                xi[i] = s;
            }
            self.evaluate(&xi[..d])
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FermiPoint {
    pub eta: Vec<f64>,
    pub lambda: f64,
    pub gradient: Vec<f64>,
    /// Householder reflection with `R ∇T(η) = |∇T(η)| e_d`, row-major.
    pub rotation: Vec<f64>,
    /// Principal curvatures sorted by descending magnitude.
    pub curvatures: Vec<f64>,
    pub k_nonvanishing: usize,
    /// Orthogonal frame, row-major: rows are the principal directions, then the unit normal.
    pub frame: Vec<f64>,
}

impl FermiPoint {
    pub fn grad_norm(&self) -> f64 {
        self.gradient.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// `η` in frame coordinates.
    pub fn eta_frame(&self) -> Vec<f64> {
        let d = self.eta.len();
        (0..d).map(|i| (0..d).map(|k| self.frame[i * d + k] * self.eta[k]).sum()).collect()
    }
}

/// Householder reflection mapping unit vector `v` to `e_target`, row-major.
pub fn householder(v: &[f64], target: usize) -> Vec<f64> {
    let d = v.len();
    let mut w: Vec<f64> = v.to_vec();
    w[target] -= 1.0;
    let n2: f64 = w.iter().map(|x| x * x).sum();
    let mut r = vec![0.0; d * d];
    for i in 0..d {
        r[i * d + i] = 1.0;
    }
    if n2 < 1e-30 {
        return r;
    }
    for i in 0..d {
        for j in 0..d {
            r[i * d + j] -= 2.0 * w[i] * w[j] / n2;
        }
    }
    r
}

fn fermi_data(symbol: &SymbolSpec, eta: Vec<f64>, lambda: f64) -> Result<FermiPoint> {
    let d = symbol.dim();
    let g = symbol.gradient(&eta);
    let gn = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    if gn <= TOL_REGULAR {
        return Err(Error::CriticalPoint(gn));
    }
    let ghat: Vec<f64> = g.iter().map(|x| x / gn).collect();
    let r = householder(&ghat, d - 1);
    let rm = DMatrix::from_row_slice(d, d, &r);
    let h = symbol.hessian(&eta);
    let b = &rm * h * rm.transpose();
    let mut curvatures = Vec::new();
    let mut frame = vec![0.0; d * d];
    if d > 1 {
        let tt = b.view((0, 0), (d - 1, d - 1)).into_owned() / gn;
        let eig = SymmetricEigen::new(tt);
        let mut order: Vec<usize> = (0..d - 1).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()).then(a.cmp(&b))
        });
        for (row, &i) in order.iter().enumerate() {
            curvatures.push(eig.eigenvalues[i]);
            // tangent direction in physical coordinates: Rᵀ (v, 0)
            let mut v = DVector::zeros(d);
            for k in 0..d - 1 {
                v[k] = eig.eigenvectors[(k, i)];
            }
            // deterministic sign: first significant component positive
            let phys = rm.transpose() * v;
            let s = phys.iter().find(|c| c.abs() > 1e-12).map_or(1.0, |c| c.signum());
            for k in 0..d {
                frame[row * d + k] = s * phys[k];
            }
        }
    }
    for k in 0..d {
        frame[(d - 1) * d + k] = ghat[k];
    }
    let k_nonvanishing = curvatures.iter().filter(|c| c.abs() > TOL_CURVATURE).count();
    Ok(FermiPoint { eta, lambda, gradient: g, rotation: r, curvatures, k_nonvanishing, frame })
}

/// Locate `η = t·hint` with `T(η) = λ` by scanning for a sign change and bisecting.
pub fn find_fermi_point(symbol: &SymbolSpec, lambda: f64, hint: &[f64]) -> Result<FermiPoint> {
    symbol.validate()?;
    let d = symbol.dim();
    if hint.len() != d {
        return Err(Error::ConfigInvalid("hint has wrong dimension".into()));
    }
    let hn = hint.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(hn > 0.0) {
        return Err(Error::ConfigInvalid("hint must be nonzero".into()));
    }
    let dir: Vec<f64> = hint.iter().map(|x| x / hn).collect();
    let at = |t: f64| -> Vec<f64> { dir.iter().map(|x| x * t).collect() };
    let phi = |t: f64| symbol.evaluate(&at(t)).re - lambda;
    let tol = tol_fermi(lambda);
    if phi(0.0).abs() <= tol {
        return fermi_data(symbol, vec![0.0; d], lambda);
    }
    let t_max = 1e4;
    let mut t0 = 0.0;
    let mut f0 = phi(t0);
    let mut dt = 1e-3;
    let mut bracket = None;
    while t0 < t_max {
        let t1 = t0 + dt;
        let f1 = phi(t1);
        if f1 == 0.0 {
            bracket = Some((t1, t1));
            break;
        }
        if f0.signum() != f1.signum() {
            bracket = Some((t0, t1));
            break;
        }
        t0 = t1;
        f0 = f1;
        if t0 > 10.0 {
            dt = 1e-2 * t0;
        }
    }
    let (mut a, mut b) = bracket.ok_or(Error::NoRoot(t_max))?;
    let fa = phi(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = phi(m);
        if fm == 0.0 {
            a = m;
            b = m;
            break;
        }
        if fm.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    let t = if phi(a).abs() <= phi(b).abs() { a } else { b };
    let eta = at(t);
    let fp = fermi_data(symbol, eta, lambda)?;
    let miss = phi(t).abs();
    if miss > tol {
        return Err(Error::NoRoot(t));
    }
    Ok(fp)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TaylorSupport {
    pub base: Vec<f64>,
    pub entries: Vec<(MultiIndex, Complex64)>,
    pub newton_vertices: Vec<MultiIndex>,
    pub zero_tol: f64,
    /// true when the expansion is a truncated series rather than exact
    pub truncated: bool,
}

impl TaylorSupport {
    pub fn from_poly(p: &Poly, base: &[f64], k_max: u32, zero_tol: f64, truncated: bool) -> Self {
        let entries: Vec<(MultiIndex, Complex64)> = p
            .prune(zero_tol)
            .terms
            .into_iter()
            .filter(|(a, _)| a.iter().sum::<u32>() <= k_max)
            .collect();
        let support: Vec<MultiIndex> = entries.iter().map(|(a, _)| a.clone()).collect();
        TaylorSupport {
            base: base.to_vec(),
            newton_vertices: newton_vertices(&support),
            entries,
            zero_tol,
            truncated,
        }
    }

    pub fn support(&self) -> Vec<MultiIndex> {
        self.entries.iter().map(|(a, _)| a.clone()).collect()
    }

    pub fn coeff(&self, alpha: &[u32]) -> Complex64 {
        self.entries.iter().find(|(a, _)| a == alpha).map_or(Complex64::new(0.0, 0.0), |(_, c)| *c)
    }

    pub fn to_poly(&self) -> Poly {
        let d = self.base.len();
        let mut p = Poly::zero(d);
        for (a, c) in &self.entries {
            p.add_term(a.clone(), *c);
        }
        p
    }
}

/// Taylor coefficients of `a(ξ) = T(η + ξ) − λ`, exact for polynomial kinds.
pub fn taylor_support(symbol: &SymbolSpec, eta: &[f64], lambda: f64, k_max: u32, zero_tol: f64) -> Result<TaylorSupport> {
    let p = symbol.to_poly().ok_or_else(|| Error::UnsupportedKind(symbol.kind_name().into()))?;
    let d = symbol.dim();
    let a = p.shift(eta).add(&Poly::constant(d, Complex64::new(-lambda, 0.0)));
    Ok(TaylorSupport::from_poly(&a, eta, k_max, zero_tol, false))
}

/// Truncated Taylor expansion of `T(η + ξ) − λ` up to total degree `k_max`, any kind.
pub fn taylor_series(symbol: &SymbolSpec, eta: &[f64], lambda: f64, k_max: u32) -> Poly {
    let d = symbol.dim();
    let shift = Poly::constant(d, Complex64::new(-lambda, 0.0));
    match symbol {
        SymbolSpec::Polynomial { .. } | SymbolSpec::RadialPolynomial { .. } => {
            let p = symbol.to_poly().unwrap().shift(eta);
            Poly { d, terms: p.terms.into_iter().filter(|(a, _)| a.iter().sum::<u32>() <= k_max).collect() }
                .add(&shift)
        }
        SymbolSpec::DiscreteCosine { .. } => {
            // cos(η_j + ξ_j) = cos η_j cos ξ_j − sin η_j sin ξ_j
            let mut p = Poly::constant(d, Complex64::new(d as f64, 0.0));
            for j in 0..d {
                let (s, c) = eta[j].sin_cos();
                let mut fact = 1.0;
                for k in 0..=k_max {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
                    let coef = if k % 2 == 0 { c } else { s } * sign / fact;
                    let mut a = vec![0; d];
                    a[j] = k;
                    p.add_term(a, Complex64::new(-coef, 0.0));
                }
            }
            p.add(&shift)
        }
        SymbolSpec::Chandrasekhar { mass, .. } => {
            // √(A + q(ξ)) − m with A = m² + |η|² and q = 2η·ξ + |ξ|²
            let a0 = mass * mass + eta.iter().map(|x| x * x).sum::<f64>();
            let lin = Poly::linear(&eta.iter().map(|x| 2.0 * x).collect::<Vec<_>>());
            let qp = lin.add(&SymbolSpec::laplacian(d).to_poly().unwrap()).scale(Complex64::new(1.0 / a0, 0.0));
            let mut out = Poly::zero(d);
            let mut pw = Poly::constant(d, Complex64::new(1.0, 0.0));
            let mut bin = 1.0;
            for k in 0..=k_max {
                if k > 0 {
                    bin *= (0.5 - (k - 1) as f64) / k as f64;
                    pw = pw.mul_trunc(&qp, Some(k_max));
                }
                out = out.add(&pw.scale(Complex64::new(bin * a0.sqrt(), 0.0)));
            }
            out.add(&Poly::constant(d, Complex64::new(-mass, 0.0))).add(&shift)
        }
    }
}

/// Rational approximation with a small denominator (continued fractions).
pub fn small_rational(x: f64) -> Ratio<i64> {
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor();
        let ai = a as i64;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > 1_000_000 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        if (x - h1 as f64 / k1 as f64).abs() < 1e-12 {
            break;
        }
        let frac = v - a;
        if frac.abs() < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    Ratio::new(h1, k1)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaCheck {
    pub holds: bool,
    pub margin: f64,
    /// exact margin as "p/q"
    pub margin_exact: String,
    pub attained_by: Vec<MultiIndex>,
}

/// `min_{α∈𝒯} Σ γ_j α_j − 1`, computed in exact rational arithmetic.
pub fn check_gamma_condition(ts: &TaylorSupport, gamma: &[f64]) -> Result<GammaCheck> {
    if ts.entries.is_empty() {
        return Err(Error::EmptySupport);
    }
    let g: Vec<Ratio<i64>> = gamma.iter().map(|&x| small_rational(x)).collect();
    let mut best: Option<Ratio<i64>> = None;
    let mut attained = Vec::new();
    for (a, _) in &ts.entries {
        let s = a.iter().zip(&g).fold(Ratio::from_integer(-1), |acc, (&e, gj)| acc + gj * e as i64);
        match best {
            Some(b) if s > b => {}
            Some(b) if s == b => attained.push(a.clone()),
            _ => {
                best = Some(s);
                attained = vec![a.clone()];
            }
        }
    }
    let m = best.unwrap();
    Ok(GammaCheck {
        holds: m >= Ratio::from_integer(0),
        margin: *m.numer() as f64 / *m.denom() as f64,
        margin_exact: format!("{}/{}", m.numer(), m.denom()),
        attained_by: attained,
    })
}

/// Linear map `A = |η| H` with `H` the Householder reflection sending `e_1` to `η/|η|`.
pub fn map_to_e1(eta: &[f64]) -> Vec<f64> {
    let n = eta.iter().map(|x| x * x).sum::<f64>().sqrt();
    let hat: Vec<f64> = eta.iter().map(|x| x / n).collect();
    householder(&hat, 0).into_iter().map(|x| x * n).collect()
}

/// The symbol in the coordinates where `η` becomes `e_1`: `ξ ↦ T(Aξ)`.
pub fn mapped_poly(symbol: &SymbolSpec, eta: &[f64]) -> Result<Poly> {
    let p = symbol.to_poly().ok_or_else(|| Error::UnsupportedKind(symbol.kind_name().into()))?;
    Ok(p.compose_linear(&map_to_e1(eta)))
}

/// The only odd-order multi-index of `𝒯(T(e_1 + ·))` with `α_1 = m` is `m e_1`.
pub fn check_real_potential_condition(symbol: &SymbolSpec, eta: &[f64], m: u32) -> Result<bool> {
    symbol.check_even()?;
    let d = symbol.dim();
    let p = mapped_poly(symbol, eta)?;
    let mut e1 = vec![0.0; d];
    e1[0] = 1.0;
    let a = p.shift(&e1);
    let tol = 1e-12 * a.max_coeff().max(1.0);
    let a = a.prune(tol);
    let mut me1 = vec![0u32; d];
    me1[0] = m;
    let odd_m: Vec<&MultiIndex> =
        a.terms.keys().filter(|al| al.iter().sum::<u32>() % 2 == 1 && al[0] == m).collect();
    Ok(odd_m.len() == 1 && odd_m[0] == &me1)
}
