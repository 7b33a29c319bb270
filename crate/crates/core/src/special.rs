//! Bessel functions of the first kind for integer and half-integer order, and the
//! Fourier transform of the surface measure on spheres.

use std::f64::consts::PI;

/// `Γ(ν + 1)` for `2ν` a nonnegative integer.
fn gamma_1p(nu: f64) -> f64 {
    let two = (2.0 * nu).round() as i64;
    if two % 2 == 0 {
        (1..=two / 2).map(|k| k as f64).product()
    } else {
        // Γ(n + 3/2) = √π · (1/2)(3/2)…(n + 1/2)
        let n = (two - 1) / 2;
        (0..=n).map(|k| k as f64 + 0.5).product::<f64>() * PI.sqrt()
    }
}

fn assert_order(nu: f64) {
    assert!(nu >= 0.0 && ((2.0 * nu).round() - 2.0 * nu).abs() < 1e-12, "order must be a nonnegative multiple of 1/2");
}

/// `t^{−ν} J_ν(t)` by its power series (entire in `t`).
fn scaled_series(nu: f64, t: f64) -> f64 {
    let q = 0.25 * t * t;
    let mut term = 2f64.powf(-nu) / gamma_1p(nu);
    let mut sum = term;
    for k in 1..200 {
        term *= -q / (k as f64 * (k as f64 + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Hankel asymptotic expansion, summed until the terms stop decreasing.
fn asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        term *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Miller's backward recurrence normalized by `J_0 + 2Σ J_{2k} = 1`, integer order.
fn miller(n: usize, x: f64) -> f64 {
    let start = 2 * ((n.max(x as usize) + 30 + (x.sqrt() * 10.0) as usize) / 2);
    let (mut jp1, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    let mut result = 0.0;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            result *= 1e-250;
        }
        if k - 1 == n {
            result = j;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j;
        }
    }
    norm += j;
    result / norm
}

/// Spherical-Bessel route for half-integer order `ν = n + 1/2`, `x` above the series range.
fn half_integer(n: usize, x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    let mut j0 = s / x;
    if n == 0 {
        return (2.0 * x / PI).sqrt() * j0;
    }
    let mut j1 = s / (x * x) - c / x;
    for l in 1..n {
        let j2 = (2 * l + 1) as f64 / x * j1 - j0;
        j0 = j1;
        j1 = j2;
    }
    (2.0 * x / PI).sqrt() * j1
}

/// `J_ν(x)` for `x ≥ 0` and `2ν ∈ ℕ`.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    assert_order(nu);
    assert!(x >= 0.0);
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= 8.0 || x < nu {
        return x.powf(nu) * scaled_series(nu, x);
    }
    if x > 30.0 + nu * nu {
        return asymptotic(nu, x);
    }
    let two = (2.0 * nu).round() as usize;
    if two % 2 == 0 {
        miller(two / 2, x)
    } else {
        half_integer((two - 1) / 2, x)
    }
}

/// `t^{−ν} J_ν(t)`, continuous at `t = 0`.
pub fn bessel_j_scaled(nu: f64, t: f64) -> f64 {
    assert_order(nu);
    if t <= 8.0 {
        scaled_series(nu, t)
    } else {
        bessel_j(nu, t) * t.powf(-nu)
    }
}

/// Surface area of the unit sphere `S^{d−1}`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_1p(d as f64 / 2.0 - 1.0)
}

/// Fourier transform of the surface measure of the radius-`r` sphere in `ℝ^d` at `|x| = s`:
/// `r^{d−1} (2π)^{d/2} (r s)^{−(d−2)/2} J_{(d−2)/2}(r s)`.
pub fn surface_measure_ft(d: usize, r: f64, s: f64) -> f64 {
    assert!(d >= 2 && r > 0.0);
    let nu = (d as f64 - 2.0) / 2.0;
    r.powi(d as i32 - 1) * (2.0 * PI).powf(d as f64 / 2.0) * bessel_j_scaled(nu, r * s.abs())
}
