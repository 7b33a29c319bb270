//! Truncated periodic grids and FFT-based Fourier multipliers.
//!
//! A grid samples the box `[-L_j, L_j)` on each axis at `x = -L_j + (i + o_j) Δ_j`.
//! Fields are stored row-major (last axis fastest) with channels innermost.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: Vec<f64>,
    pub points: Vec<usize>,
    pub offset: Vec<f64>,
}

impl GridSpec {
    pub fn new(half_width: Vec<f64>, points: Vec<usize>, offset: Vec<f64>) -> Result<Self> {
        let d = half_width.len();
        if d == 0 || points.len() != d || offset.len() != d {
            return Err(Error::ConfigInvalid("grid axes have inconsistent lengths".into()));
        }
        for j in 0..d {
            if !(half_width[j] > 0.0 && half_width[j].is_finite()) {
                return Err(Error::ConfigInvalid(format!("half width on axis {j} must be positive")));
            }
            if points[j] < 16 || !points[j].is_power_of_two() {
                return Err(Error::ConfigInvalid(format!(
                    "points on axis {j} must be a power of two >= 16, got {}",
                    points[j]
                )));
            }
            if !(0.0..1.0).contains(&offset[j]) {
                return Err(Error::ConfigInvalid(format!("offset on axis {j} must lie in [0,1)")));
            }
        }
        Ok(GridSpec { half_width, points, offset })
    }

    /// Cube `[-l, l)^d` with `n` points per axis and no offset.
    pub fn cube(d: usize, l: f64, n: usize) -> Result<Self> {
        Self::new(vec![l; d], vec![n; d], vec![0.0; d])
    }

    pub fn with_offset(mut self, axis: usize, offset: f64) -> Result<Self> {
        self.offset[axis] = offset;
        Self::new(self.half_width, self.points, self.offset)
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_width[axis] / self.points[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|j| self.spacing(j)).product()
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        -self.half_width[axis] + (i as f64 + self.offset[axis]) * self.spacing(axis)
    }

    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.points[axis]).map(|i| self.coord(axis, i)).collect()
    }

    /// Angular frequency of FFT bin `i`, in `(π/L)·{-N/2, …, N/2-1}`.
    pub fn freq(&self, axis: usize, i: usize) -> f64 {
        let n = self.points[axis];
        let k = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
        k * PI / self.half_width[axis]
    }

    pub fn axis_freqs(&self, axis: usize) -> Vec<f64> {
        (0..self.points[axis]).map(|i| self.freq(axis, i)).collect()
    }

    pub fn unravel(&self, mut flat: usize, idx: &mut [usize]) {
        for j in (0..self.dim()).rev() {
            idx[j] = flat % self.points[j];
            flat /= self.points[j];
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.points).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn point(&self, flat: usize, x: &mut [f64]) {
        let mut rest = flat;
        for j in (0..self.dim()).rev() {
            let i = rest % self.points[j];
            rest /= self.points[j];
            x[j] = self.coord(j, i);
        }
    }

    /// True on points inside the inner `frac` of the box on every axis.
    pub fn inner_region(&self, frac: f64) -> Vec<bool> {
        let d = self.dim();
        let mut x = vec![0.0; d];
        (0..self.len())
            .map(|p| {
                self.point(p, &mut x);
                (0..d).all(|j| x[j].abs() <= frac * self.half_width[j])
            })
            .collect()
    }

    /// Same box at twice the resolution, together with the fine index of every coarse point.
    pub fn refined(&self) -> Result<(GridSpec, Vec<usize>)> {
        let d = self.dim();
        let mut shift = vec![0usize; d];
        let mut off = vec![0.0; d];
        for j in 0..d {
            let o2 = 2.0 * self.offset[j];
            shift[j] = o2.floor() as usize;
            off[j] = o2 - o2.floor();
        }
        let fine = GridSpec::new(
            self.half_width.clone(),
            self.points.iter().map(|n| 2 * n).collect(),
            off,
        )?;
        let mut idx = vec![0usize; d];
        let map = (0..self.len())
            .map(|p| {
                self.unravel(p, &mut idx);
                for j in 0..d {
                    idx[j] = 2 * idx[j] + shift[j];
                }
                fine.ravel(&idx)
            })
            .collect();
        Ok((fine, map))
    }
}

#[derive(Clone, Debug)]
pub struct GridField {
    pub spec: GridSpec,
    pub channels: usize,
    pub values: Vec<Complex64>,
    pub label: String,
}

impl GridField {
    pub fn from_values(spec: GridSpec, channels: usize, values: Vec<Complex64>, label: &str) -> Result<Self> {
        if channels == 0 || values.len() != spec.len() * channels {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                spec.len() * channels,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(GridField { spec, channels, values, label: label.to_string() })
    }

    pub fn zeros(spec: &GridSpec, channels: usize, label: &str) -> Self {
        GridField {
            spec: spec.clone(),
            channels,
            values: vec![Complex64::new(0.0, 0.0); spec.len() * channels],
            label: label.to_string(),
        }
    }

    /// Scalar field from pointwise evaluation.
    pub fn sample<F: Fn(&[f64]) -> Complex64>(spec: &GridSpec, label: &str, f: F) -> Result<Self> {
        let mut x = vec![0.0; spec.dim()];
        let values = (0..spec.len())
            .map(|p| {
                spec.point(p, &mut x);
                f(&x)
            })
            .collect();
        Self::from_values(spec.clone(), 1, values, label)
    }

    pub fn sample_real<F: Fn(&[f64]) -> f64>(spec: &GridSpec, label: &str, f: F) -> Result<Self> {
        Self::sample(spec, label, |x| Complex64::new(f(x), 0.0))
    }

    /// Multi-channel field; `f` fills one point's channel slice.
    pub fn sample_channels<F: Fn(&[f64], &mut [Complex64])>(
        spec: &GridSpec,
        channels: usize,
        label: &str,
        f: F,
    ) -> Result<Self> {
        let mut x = vec![0.0; spec.dim()];
        let mut values = vec![Complex64::new(0.0, 0.0); spec.len() * channels];
        for (p, chunk) in values.chunks_mut(channels).enumerate() {
            spec.point(p, &mut x);
            f(&x, chunk);
        }
        Self::from_values(spec.clone(), channels, values, label)
    }

    pub fn len(&self) -> usize {
        self.spec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spec.is_empty()
    }

    /// Euclidean magnitude over channels at point `p`.
    pub fn abs_at(&self, p: usize) -> f64 {
        let k = self.channels;
        if k == 1 {
            return self.values[p].norm();
        }
        self.values[p * k..(p + 1) * k].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.len()).map(|p| self.abs_at(p)).fold(0.0, f64::max)
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F, label: &str) -> GridField {
        GridField {
            spec: self.spec.clone(),
            channels: self.channels,
            values: self.values.iter().map(|&v| f(v)).collect(),
            label: label.to_string(),
        }
    }

    /// Pointwise combination of two scalar-compatible fields on the same grid.
    pub fn zip_with<F: Fn(Complex64, Complex64) -> Complex64>(
        &self,
        other: &GridField,
        f: F,
        label: &str,
    ) -> Result<GridField> {
        if self.spec != other.spec || self.channels != other.channels {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        GridField::from_values(self.spec.clone(), self.channels, values, label)
    }

    /// Values at the listed flat indices on a new grid (used for coarse restriction).
    pub fn gather(&self, spec: &GridSpec, indices: &[usize], label: &str) -> Result<GridField> {
        let k = self.channels;
        let mut values = Vec::with_capacity(indices.len() * k);
        for &i in indices {
            values.extend_from_slice(&self.values[i * k..(i + 1) * k]);
        }
        GridField::from_values(spec.clone(), k, values, label)
    }

    pub fn write_gf(&self, path: &Path) -> Result<()> {
        let header = serde_json::json!({
            "spec": self.spec,
            "channels": self.channels,
            "label": self.label,
        });
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{}", serde_json::to_string(&header)?)?;
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_gf(path: &Path) -> Result<GridField> {
        let mut r = BufReader::new(File::open(path)?);
        let mut line = String::new();
        r.read_line(&mut line)?;
        let header: serde_json::Value = serde_json::from_str(line.trim_end())?;
        let spec: GridSpec = serde_json::from_value(header["spec"].clone())?;
        let channels = header["channels"]
            .as_u64()
            .ok_or_else(|| Error::Format("missing channels".into()))? as usize;
        let label = header["label"].as_str().unwrap_or("").to_string();
        let spec = GridSpec::new(spec.half_width, spec.points, spec.offset)?;
        let count = spec.len() * channels;
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        if buf.len() != count * 16 {
            return Err(Error::Format(format!("payload has {} bytes, expected {}", buf.len(), count * 16)));
        }
        let values = buf
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[0..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..16].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        GridField::from_values(spec, channels, values, &label)
    }

    /// CSV of a scalar field on a 1-D or 2-D grid: coordinates, re, im.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let d = self.spec.dim();
        if d > 2 || self.channels != 1 {
            return Err(Error::ConfigInvalid("csv export needs a scalar 1-D or 2-D field".into()));
        }
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{}re,im", if d == 1 { "x," } else { "x,y," })?;
        let mut x = vec![0.0; d];
        for p in 0..self.len() {
            self.spec.point(p, &mut x);
            for c in &x {
                write!(w, "{c},")?;
            }
            writeln!(w, "{},{}", self.values[p].re, self.values[p].im)?;
        }
        w.flush()?;
        Ok(())
    }

    /// 2-D slice through the first two axes, other axes at the index nearest to 0.
    pub fn slice_2d(&self) -> Result<GridField> {
        let s = &self.spec;
        if s.dim() < 2 {
            return Err(Error::ConfigInvalid("slice needs at least two axes".into()));
        }
        let spec2 = GridSpec::new(s.half_width[..2].to_vec(), s.points[..2].to_vec(), s.offset[..2].to_vec())?;
        let mut idx: Vec<usize> = (0..s.dim())
            .map(|j| {
                (0..s.points[j])
                    .min_by(|&a, &b| s.coord(j, a).abs().total_cmp(&s.coord(j, b).abs()))
                    .unwrap()
            })
            .collect();
        let mut vals = Vec::with_capacity(spec2.len() * self.channels);
        for i0 in 0..s.points[0] {
            for i1 in 0..s.points[1] {
                idx[0] = i0;
                idx[1] = i1;
                let p = s.ravel(&idx);
                vals.extend_from_slice(&self.values[p * self.channels..(p + 1) * self.channels]);
            }
        }
        GridField::from_values(spec2, self.channels, vals, &self.label)
    }
}

/// In-place n-dimensional FFT over the spatial axes; channels are not transformed.
/// The inverse includes the `1/N` normalization.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], channels: usize, inverse: bool) {
    let total: usize = shape.iter().product();
    assert_eq!(data.len(), total * channels);
    let mut planner = FftPlanner::<f64>::new();
    const BLOCK: usize = 32;
    for (axis, &n) in shape.iter().enumerate() {
        let plan: std::sync::Arc<dyn Fft<f64>> =
            if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
        let stride: usize = shape[axis + 1..].iter().product::<usize>() * channels;
        let outer: usize = shape[..axis].iter().product();
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        if stride == 1 {
            plan.process_with_scratch(data, &mut scratch);
            continue;
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); n * BLOCK];
        for o in 0..outer {
            let base = o * n * stride;
            let mut i0 = 0;
            while i0 < stride {
                let b = BLOCK.min(stride - i0);
                for j in 0..n {
                    let row = base + j * stride + i0;
                    for t in 0..b {
                        buf[t * n + j] = data[row + t];
                    }
                }
                plan.process_with_scratch(&mut buf[..b * n], &mut scratch);
                for j in 0..n {
                    let row = base + j * stride + i0;
                    for t in 0..b {
                        data[row + t] = buf[t * n + j];
                    }
                }
                i0 += b;
            }
        }
    }
    if inverse {
        let s = 1.0 / total as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

/// Forward spectrum of a field (unnormalized DFT).
pub fn spectrum(f: &GridField) -> Vec<Complex64> {
    let mut data = f.values.clone();
    fft_nd(&mut data, &f.spec.points, f.channels, false);
    data
}

/// Visit every frequency vector of the grid in storage order.
fn for_each_freq<F: FnMut(usize, &[f64])>(spec: &GridSpec, mut f: F) {
    let d = spec.dim();
    let freqs: Vec<Vec<f64>> = (0..d).map(|j| spec.axis_freqs(j)).collect();
    let mut idx = vec![0usize; d];
    let mut xi = vec![0.0; d];
    for p in 0..spec.len() {
        spec.unravel(p, &mut idx);
        for j in 0..d {
            xi[j] = freqs[j][idx[j]];
        }
        f(p, &xi);
    }
}

/// Multiply a spectrum by a scalar symbol and transform back.
pub fn apply_to_spectrum<A: Fn(&[f64]) -> Complex64>(
    spec: &GridSpec,
    channels: usize,
    spectrum: &[Complex64],
    a: A,
    label: &str,
) -> Result<GridField> {
    let mut data = spectrum.to_vec();
    scale_and_invert(spec, channels, &mut data, a)?;
    GridField::from_values(spec.clone(), channels, data, label)
}

fn scale_and_invert<A: Fn(&[f64]) -> Complex64>(
    spec: &GridSpec,
    channels: usize,
    data: &mut [Complex64],
    a: A,
) -> Result<()> {
    let mut bad: Option<Vec<f64>> = None;
    for_each_freq(spec, |p, xi| {
        let s = a(xi);
        if !(s.re.is_finite() && s.im.is_finite()) {
            if bad.is_none() {
                bad = Some(xi.to_vec());
            }
            return;
        }
        for c in 0..channels {
            data[p * channels + c] *= s;
        }
    });
    if let Some(xi) = bad {
        return Err(Error::SymbolSingular(xi));
    }
    fft_nd(data, &spec.points, channels, true);
    Ok(())
}

/// `a(D) f`: forward FFT, multiply by `a(ξ)`, inverse FFT. Acts channelwise.
pub fn apply_multiplier<A: Fn(&[f64]) -> Complex64>(f: &GridField, a: A) -> Result<GridField> {
    apply_multiplier_owned(f.clone(), a)
}

/// [`apply_multiplier`] reusing the storage of `f`.
pub fn apply_multiplier_owned<A: Fn(&[f64]) -> Complex64>(mut f: GridField, a: A) -> Result<GridField> {
    fft_nd(&mut f.values, &f.spec.points, f.channels, false);
    scale_and_invert(&f.spec, f.channels, &mut f.values, a)?;
    Ok(f)
}

/// `a(hD) f` with the anisotropic scaling `hξ = (h^{γ_1} ξ_1, …, h^{γ_d} ξ_d)`.
pub fn apply_multiplier_scaled<A: Fn(&[f64]) -> Complex64>(
    f: &GridField,
    a: A,
    h: f64,
    gamma: &[f64],
) -> Result<GridField> {
    let factors: Vec<f64> = gamma.iter().map(|g| h.powf(*g)).collect();
    apply_multiplier(f, |xi: &[f64]| {
        let hx: Vec<f64> = xi.iter().zip(&factors).map(|(x, s)| x * s).collect();
        a(&hx)
    })
}

/// Matrix symbol acting on a K-channel field; `a` fills a row-major K×K block.
pub fn apply_matrix_multiplier<A: Fn(&[f64], &mut [Complex64])>(f: &GridField, a: A) -> Result<GridField> {
    apply_matrix_multiplier_owned(f.clone(), a)
}

/// [`apply_matrix_multiplier`] reusing the storage of `f`.
pub fn apply_matrix_multiplier_owned<A: Fn(&[f64], &mut [Complex64])>(mut f: GridField, a: A) -> Result<GridField> {
    let k = f.channels;
    fft_nd(&mut f.values, &f.spec.points, k, false);
    let data = &mut f.values;
    let mut m = vec![Complex64::new(0.0, 0.0); k * k];
    let mut tmp = vec![Complex64::new(0.0, 0.0); k];
    let mut bad: Option<Vec<f64>> = None;
    for_each_freq(&f.spec, |p, xi| {
        a(xi, &mut m);
        if bad.is_none() && m.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            bad = Some(xi.to_vec());
        }
        let block = &mut data[p * k..(p + 1) * k];
        for r in 0..k {
            tmp[r] = (0..k).map(|c| m[r * k + c] * block[c]).sum();
        }
        block.copy_from_slice(&tmp);
    });
    if let Some(xi) = bad {
        return Err(Error::SymbolSingular(xi));
    }
    fft_nd(&mut f.values, &f.spec.points, k, true);
    Ok(f)
}

/// Trigonometric interpolant of a scalar field at an arbitrary point, from its spectrum.
/// The Nyquist bin is split symmetrically so real data interpolate to real values.
pub fn trig_interpolate(spec: &GridSpec, spectrum: &[Complex64], x: &[f64]) -> Complex64 {
    let d = spec.dim();
    let phases: Vec<Vec<Complex64>> = (0..d)
        .map(|j| {
            let n = spec.points[j];
            let t = x[j] - spec.coord(j, 0);
            (0..n)
                .map(|i| {
                    let xi = spec.freq(j, i);
                    if i == n / 2 {
                        Complex64::new((xi * t).cos(), 0.0)
                    } else {
                        Complex64::from_polar(1.0, xi * t)
                    }
                })
                .collect()
        })
        .collect();
    let mut idx = vec![0usize; d];
    let acc = pairwise_complex(spec.len(), &mut |p| {
        spec.unravel(p, &mut idx);
        let mut ph = spectrum[p];
        for j in 0..d {
            ph *= phases[j][idx[j]];
        }
        ph
    });
    acc / spec.len() as f64
}

fn pairwise_complex<F: FnMut(usize) -> Complex64>(n: usize, f: &mut F) -> Complex64 {
    fn rec<F: FnMut(usize) -> Complex64>(lo: usize, hi: usize, f: &mut F) -> Complex64 {
        if hi - lo <= 256 {
            let mut s = Complex64::new(0.0, 0.0);
            for i in lo..hi {
                s += f(i);
            }
            return s;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, n, f)
}

/// Pairwise summation of `f(0) + … + f(n-1)`.
pub fn pairwise_sum<F: FnMut(usize) -> f64>(n: usize, f: &mut F) -> f64 {
    fn rec<F: FnMut(usize) -> f64>(lo: usize, hi: usize, f: &mut F) -> f64 {
        if hi - lo <= 256 {
            let mut s = 0.0;
            for i in lo..hi {
                s += f(i);
            }
            return s;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, n, f)
}

/// `(Σ |f|^q Δ^d)^{1/q}`, or the max norm for `q = ∞`. Masked points (true) are skipped.
pub fn lq_norm_masked(f: &GridField, q: f64, mask: Option<&[bool]>) -> f64 {
    let keep = |p: usize| mask.map_or(true, |m| !m[p]);
    if q.is_infinite() {
        return (0..f.len()).filter(|&p| keep(p)).map(|p| f.abs_at(p)).fold(0.0, f64::max);
    }
    let s = pairwise_sum(f.len(), &mut |p| if keep(p) { f.abs_at(p).powf(q) } else { 0.0 });
    (s * f.spec.cell_volume()).powf(1.0 / q)
}

pub fn lq_norm(f: &GridField, q: f64) -> f64 {
    lq_norm_masked(f, q, None)
}

/// Discrete ℓ² norm without the volume factor.
pub fn l2_sum(f: &GridField, mask: Option<&[bool]>) -> f64 {
    pairwise_sum(f.len(), &mut |p| if mask.map_or(true, |m| !m[p]) { f.abs_at(p).powi(2) } else { 0.0 })
        .sqrt()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Envelope {
    pub c: f64,
    pub argmax: Vec<f64>,
}

/// `max |f(x)|·w(x)` over the inner 80% of the box, skipping masked points.
pub fn envelope_constant_masked<W: Fn(&[f64]) -> f64>(f: &GridField, w: W, mask: Option<&[bool]>) -> Envelope {
    let spec = &f.spec;
    let d = spec.dim();
    let mut x = vec![0.0; d];
    let mut best = Envelope { c: 0.0, argmax: vec![0.0; d] };
    for p in 0..spec.len() {
        if mask.is_some_and(|m| m[p]) {
            continue;
        }
        spec.point(p, &mut x);
        if (0..d).any(|j| x[j].abs() > 0.8 * spec.half_width[j]) {
            continue;
        }
        let v = f.abs_at(p) * w(&x);
        if v > best.c {
            best.c = v;
            best.argmax.copy_from_slice(&x);
        }
    }
    best
}

pub fn envelope_constant<W: Fn(&[f64]) -> f64>(f: &GridField, w: W) -> Envelope {
    envelope_constant_masked(f, w, None)
}

#[derive(Clone, Debug)]
pub struct Ratio {
    pub ratio: GridField,
    /// true where the point was excluded
    pub mask: Vec<bool>,
    pub masked_fraction: f64,
}

/// `num/den` where `|den| > guard·max|den|`; other points are masked and set to 0.
pub fn pointwise_ratio(num: &GridField, den: &GridField, guard: f64) -> Result<Ratio> {
    pointwise_ratio_within(num, den, guard, None, None)
}

/// As [`pointwise_ratio`], restricted to `region` (true = considered). Points outside
/// the region are masked but do not count toward the 50% rule. With `envelope`, the
/// guard compares `|den|/envelope` against its maximum over the region.
pub fn pointwise_ratio_within(
    num: &GridField,
    den: &GridField,
    guard: f64,
    region: Option<&[bool]>,
    envelope: Option<&[f64]>,
) -> Result<Ratio> {
    if num.spec != den.spec || den.channels != 1 {
        return Err(Error::GridMismatch("ratio needs a scalar denominator on the same grid".into()));
    }
    let k = num.channels;
    let inside = |p: usize| region.map_or(true, |r| r[p]);
    let level = |p: usize| {
        let a = den.values[p].norm();
        envelope.map_or(a, |e| a / e[p])
    };
    let dmax = (0..den.len()).filter(|&p| inside(p)).map(level).fold(0.0, f64::max);
    let thr = guard * dmax;
    let mut mask = vec![false; den.len()];
    let mut values = vec![Complex64::new(0.0, 0.0); num.values.len()];
    let (mut n_in, mut n_guard) = (0usize, 0usize);
    for p in 0..den.len() {
        if !inside(p) {
            mask[p] = true;
            continue;
        }
        n_in += 1;
        let dv = den.values[p];
        if level(p) <= thr || dv.norm() == 0.0 {
            mask[p] = true;
            n_guard += 1;
            continue;
        }
        for c in 0..k {
            values[p * k + c] = num.values[p * k + c] / dv;
        }
    }
    let frac = if n_in == 0 { 1.0 } else { n_guard as f64 / n_in as f64 };
    if frac > 0.5 {
        return Err(Error::AllMasked(100.0 * frac));
    }
    Ok(Ratio {
        ratio: GridField::from_values(num.spec.clone(), k, values, "ratio")?,
        mask,
        masked_fraction: frac,
    })
}
