//! Sparse multivariate polynomials with complex coefficients.

use std::collections::BTreeMap;

use num_complex::Complex64;

pub type MultiIndex = Vec<u32>;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub d: usize,
    pub terms: BTreeMap<MultiIndex, Complex64>,
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl Poly {
    pub fn zero(d: usize) -> Self {
        Poly { d, terms: BTreeMap::new() }
    }

    pub fn constant(d: usize, c: Complex64) -> Self {
        let mut p = Poly::zero(d);
        p.add_term(vec![0; d], c);
        p
    }

    pub fn monomial(alpha: MultiIndex, c: Complex64) -> Self {
        let mut p = Poly::zero(alpha.len());
        p.add_term(alpha, c);
        p
    }

    /// Linear form `Σ_k a_k ξ_k`.
    pub fn linear(a: &[f64]) -> Self {
        let d = a.len();
        let mut p = Poly::zero(d);
        for (k, &ak) in a.iter().enumerate() {
            let mut e = vec![0; d];
            e[k] = 1;
            p.add_term(e, Complex64::new(ak, 0.0));
        }
        p
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: Complex64) {
        let e = self.terms.entry(alpha).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|a| a.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn coeff(&self, alpha: &[u32]) -> Complex64 {
        self.terms.get(alpha).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        for (a, c) in &other.terms {
            p.add_term(a.clone(), *c);
        }
        p
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly { d: self.d, terms: self.terms.iter().map(|(a, c)| (a.clone(), c * s)).collect() }
    }

    /// Product, dropping terms of total degree above `max_deg` when given.
    pub fn mul_trunc(&self, other: &Poly, max_deg: Option<u32>) -> Poly {
        let mut p = Poly::zero(self.d);
        for (a, ca) in &self.terms {
            let da: u32 = a.iter().sum();
            for (b, cb) in &other.terms {
                if let Some(m) = max_deg {
                    if da + b.iter().sum::<u32>() > m {
                        continue;
                    }
                }
                let ab: MultiIndex = a.iter().zip(b).map(|(x, y)| x + y).collect();
                p.add_term(ab, ca * cb);
            }
        }
        p
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.mul_trunc(other, None)
    }

    pub fn pow_trunc(&self, k: u32, max_deg: Option<u32>) -> Poly {
        let mut p = Poly::constant(self.d, Complex64::new(1.0, 0.0));
        for _ in 0..k {
            p = p.mul_trunc(self, max_deg);
        }
        p
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(a, c)| c * a.iter().zip(xi).map(|(&e, &x)| x.powi(e as i32)).product::<f64>())
            .sum()
    }

    pub fn eval_complex(&self, xi: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(a, c)| c * a.iter().zip(xi).map(|(&e, &x)| x.powi(e as i32)).product::<Complex64>())
            .sum()
    }

    /// `∂_j p`.
    pub fn derivative(&self, j: usize) -> Poly {
        let mut p = Poly::zero(self.d);
        for (a, c) in &self.terms {
            if a[j] > 0 {
                let mut b = a.clone();
                b[j] -= 1;
                p.add_term(b, c * a[j] as f64);
            }
        }
        p
    }

    /// `ξ ↦ p(ξ + η)`, expanded exactly by the binomial theorem.
    pub fn shift(&self, eta: &[f64]) -> Poly {
        let mut out = Poly::zero(self.d);
        for (a, c) in &self.terms {
            let mut beta = vec![0u32; self.d];
            loop {
                let mut w = *c;
                for j in 0..self.d {
                    w *= binom(a[j], beta[j]) * eta[j].powi((a[j] - beta[j]) as i32);
                }
                out.add_term(beta.clone(), w);
                let mut j = 0;
                while j < self.d {
                    if beta[j] < a[j] {
                        beta[j] += 1;
                        break;
                    }
                    beta[j] = 0;
                    j += 1;
                }
                if j == self.d {
                    break;
                }
            }
        }
        out
    }

    /// `ζ ↦ p(Aζ)` for a row-major `d×d` matrix `A`.
    pub fn compose_linear(&self, a: &[f64]) -> Poly {
        let d = self.d;
        let forms: Vec<Poly> = (0..d).map(|j| Poly::linear(&a[j * d..(j + 1) * d])).collect();
        let mut cache: BTreeMap<(usize, u32), Poly> = BTreeMap::new();
        let mut out = Poly::zero(d);
        for (alpha, c) in &self.terms {
            let mut term = Poly::constant(d, *c);
            for j in 0..d {
                if alpha[j] == 0 {
                    continue;
                }
                let pw = cache.entry((j, alpha[j])).or_insert_with(|| forms[j].pow_trunc(alpha[j], None));
                term = term.mul(pw);
            }
            out = out.add(&term);
        }
        out
    }

    /// Drop coefficients with magnitude at or below `tol`.
    pub fn prune(&self, tol: f64) -> Poly {
        Poly {
            d: self.d,
            terms: self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(a, c)| (a.clone(), *c)).collect(),
        }
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}
