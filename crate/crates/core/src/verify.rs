//! Quantitative checks on constructions and the self-contained verification report.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constructions::dirac::antihermitian_defect;
use crate::constructions::radial::{engine_extent, interpolate_profile, profile};
use crate::constructions::{Builder, Construction, Recipe};
use crate::error::{Error, Result};
use crate::grid::{envelope_constant_masked, lq_norm_masked, pairwise_sum, Envelope, GridField};

pub const TOL_REALNESS: f64 = 1e-8;
pub const TOL_HERMITICITY: f64 = 1e-12;
pub const TOL_RADIALITY: f64 = 1e-6;
pub const TOL_SLOPE: f64 = 0.1;
pub const MAX_UNIFORMITY: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Le,
    Ge,
    Gt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub required: bool,
    pub pass: bool,
}

impl Criterion {
    pub fn new(name: &str, value: f64, comparison: Comparison, threshold: f64, required: bool) -> Self {
        let pass = value.is_finite()
            && match comparison {
                Comparison::Le => value <= threshold,
                Comparison::Ge => value >= threshold,
                Comparison::Gt => value > threshold,
            };
        Criterion { name: name.into(), value, threshold, comparison, required, pass }
    }

    /// Recomputes the verdict from the stored numbers.
    pub fn recheck(&self) -> bool {
        Criterion::new(&self.name, self.value, self.comparison, self.threshold, self.required).pass
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Residual,
    Envelope,
    Scan,
    Realness,
    Hermiticity,
    Radiality,
}

impl Check {
    pub fn parse(s: &str) -> Result<Check> {
        Ok(match s.trim() {
            "residual" => Check::Residual,
            "envelope" => Check::Envelope,
            "scan" => Check::Scan,
            "realness" => Check::Realness,
            "hermiticity" => Check::Hermiticity,
            "radiality" => Check::Radiality,
            other => return Err(Error::ConfigInvalid(format!("unknown check {other}"))),
        })
    }
}

/// Checks that decide the overall verdict for each builder.
pub fn required_checks(b: Builder) -> Vec<Check> {
    use Check::*;
    match b {
        Builder::Thm1 | Builder::Thm2 => vec![Residual, Envelope, Scan],
        Builder::Real => vec![Residual, Envelope, Realness],
        Builder::Radial => vec![Residual, Envelope, Radiality],
        Builder::Chandrasekhar => vec![Residual, Envelope],
        Builder::Dirac => vec![Residual, Envelope, Hermiticity],
    }
}

/// Same-grid and doubled-grid residual thresholds.
pub fn residual_thresholds(b: Builder) -> (f64, f64) {
    match b {
        Builder::Thm1 | Builder::Thm2 | Builder::Radial => (1e-12, 1e-6),
        Builder::Real => (1e-12, 1e-5),
        Builder::Chandrasekhar => (1e-6, 1e-6),
        Builder::Dirac => (1e-8, 1e-8),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub checks: Vec<Check>,
    pub doubled: bool,
    pub n_list: Vec<u32>,
    /// `None` stands for `q = ∞`
    pub q_list: Vec<Option<f64>>,
}

impl VerifyOptions {
    /// The doubled-grid residual is off for radial builds: a doubled 3-D grid does not fit in memory.
    pub fn for_builder(b: Builder) -> Self {
        VerifyOptions { checks: required_checks(b), doubled: b != Builder::Radial, n_list: vec![], q_list: vec![] }
    }
}

/// `V(x)·u(x)` at flat index `p` into `out`.
fn potential_times(v: &GridField, u: &[Complex64], p: usize, out: &mut [Complex64]) {
    let k = u.len();
    if v.channels == 1 {
        for (o, x) in out.iter_mut().zip(u) {
            *o = v.values[p] * x;
        }
    } else {
        let m = &v.values[p * k * k..(p + 1) * k * k];
        for r in 0..k {
            out[r] = (0..k).map(|s| m[r * k + s] * u[s]).sum();
        }
    }
}

/// `‖T(D)u + Vu − λu‖₂/‖u‖₂` on unmasked points of the build grid.
pub fn residual_same_grid(c: &Construction) -> Result<f64> {
    let tu = c.operator.apply_shifted(&c.u, c.lambda)?;
    Ok(relative_residual(c, &tu, &c.u))
}

fn relative_residual(c: &Construction, tu: &GridField, u: &GridField) -> f64 {
    let k = c.u.channels;
    let mut vu = vec![Complex64::new(0.0, 0.0); k];
    let num = pairwise_sum(c.mask.len(), &mut |p| {
        if c.mask[p] {
            return 0.0;
        }
        potential_times(&c.v, &u.values[p * k..(p + 1) * k], p, &mut vu);
        (0..k).map(|r| (tu.values[p * k + r] + vu[r]).norm_sqr()).sum()
    });
    let den = pairwise_sum(c.mask.len(), &mut |p| {
        if c.mask[p] {
            return 0.0;
        }
        (0..k).map(|r| u.values[p * k + r].norm_sqr()).sum()
    });
    (num / den).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Doubled {
    pub residual: f64,
    /// `max |(T−λ)u_fine − (T−λ)u_coarse| / max |(T−λ)u_coarse|` on common unmasked points
    pub grid_convergence: f64,
}

/// Residual with `u` rebuilt on the doubled grid and `V` taken at the common points.
pub fn residual_doubled(c: &Construction) -> Result<Doubled> {
    let (fine, map) = c.u.spec.refined()?;
    let uf = c.rebuild_u(&fine)?;
    let coarse = &c.u.spec;
    let u_common = uf.gather(coarse, &map, "u")?;
    let tf = c.operator.apply_shifted_owned(uf, c.lambda)?.gather(coarse, &map, "Tu")?;
    let residual = relative_residual(c, &tf, &u_common);
    let tc = c.operator.apply_shifted(&c.u, c.lambda)?;
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for (p, masked) in c.mask.iter().enumerate() {
        if *masked {
            continue;
        }
        for r in 0..c.u.channels {
            let q = p * c.u.channels + r;
            diff = diff.max((tf.values[q] - tc.values[q]).norm());
            scale = scale.max(tc.values[q].norm());
        }
    }
    Ok(Doubled { residual, grid_convergence: if scale > 0.0 { diff / scale } else { diff } })
}

/// `max |V|·(n + weight)` over the inner 80% of the box on unmasked points.
pub fn envelope(c: &Construction) -> Envelope {
    let n = c.scale.n as f64;
    envelope_constant_masked(&c.v, |x| c.weight.envelope_weight(n, x), Some(&c.mask))
}

/// `max |Im V| / max |V|` on unmasked points.
pub fn realness(c: &Construction) -> f64 {
    let mut im = 0.0f64;
    let mut ab = 0.0f64;
    for (p, v) in c.v.values.iter().enumerate() {
        if !c.mask[p / c.v.channels] {
            im = im.max(v.im.abs());
            ab = ab.max(v.norm());
        }
    }
    if ab > 0.0 {
        im / ab
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Radiality {
    /// on points with `ψ ≥ 10⁻³ max ψ`
    pub core: f64,
    /// on every unmasked point
    pub full: f64,
}

/// Deviation of `V` from the one-dimensional reference profile, relative to its maximum (d = 3).
pub fn radiality(c: &Construction) -> Result<Radiality> {
    let cfg = match &c.recipe {
        Recipe::Radial(cfg) => cfg,
        _ => return Err(Error::UnsupportedKind("radiality needs a radial construction".into())),
    };
    let (r_max, _) = engine_extent(cfg.n);
    let prof = profile(cfg, r_max, 1 << 18)?;
    let vmax = prof.v.iter().zip(&prof.mask).filter(|(_, m)| !**m).map(|(v, _)| v.abs()).fold(0.0, f64::max);
    let spec = &c.v.spec;
    let d = spec.dim();
    let mut x = vec![0.0; d];
    let n = cfg.n as f64;
    let (mut core, mut full) = (0.0f64, 0.0f64);
    for p in 0..spec.len() {
        if c.mask[p] {
            continue;
        }
        spec.point(p, &mut x);
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dev = (c.v.values[p].re - interpolate_profile(&prof, &prof.v, r)).abs().max(c.v.values[p].im.abs());
        full = full.max(dev);
        if (1.0 + r * r / (n * n)).powf(-cfg.n_decay / 2.0) >= 1e-3 {
            core = core.max(dev);
        }
    }
    Ok(Radiality { core: core / vmax, full: full / vmax })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LqScan {
    pub q: Option<f64>,
    pub n_list: Vec<u32>,
    pub norms: Vec<f64>,
    pub fitted_slope: f64,
    pub theoretical_slope: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub n_list: Vec<u32>,
    pub envelopes: Vec<Envelope>,
    pub uniformity: f64,
    pub lq: Vec<LqScan>,
}

/// Least-squares slope of `log y` against `log n` over `n ≥ 2`.
pub fn fit_slope(n: &[u32], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        n.iter().zip(y).filter(|(n, _)| **n >= 2).map(|(n, y)| ((*n as f64).ln(), y.ln())).collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in &pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Decay threshold `Σγ_j` of the construction's weight: `‖V_n‖_q → 0` needs `q` above it.
pub fn q_threshold(c: &Recipe) -> Result<f64> {
    let probe = match c {
        Recipe::Radial(cfg) => return Ok(cfg.symbol.dim() as f64),
        Recipe::Real(_) => return Err(Error::ConfigInvalid("the real construction has no scale parameter".into())),
        other => other.clone(),
    };
    Ok(match &probe {
        Recipe::Anisotropic(cfg) => crate::constructions::anisotropic::weight_of(cfg)?.gamma.iter().sum(),
        Recipe::Chandrasekhar(cfg) => (cfg.d as f64 + 1.0) / 2.0,
        Recipe::Dirac(cfg) => (cfg.d as f64 + 1.0) / 2.0,
        _ => unreachable!(),
    })
}

/// Envelope constants and `L^q` norms over a list of scales.
pub fn scan(recipe: &Recipe, n_list: &[u32], q_list: &[Option<f64>]) -> Result<ScanResult> {
    if n_list.len() < 2 && !q_list.is_empty() {
        return Err(Error::ConfigInvalid("a slope fit needs at least two scales".into()));
    }
    let threshold = q_threshold(recipe)?;
    for q in q_list.iter().flatten() {
        if *q <= threshold {
            return Err(Error::ThresholdViolated { q: *q, threshold });
        }
    }
    let mut envelopes = Vec::new();
    let mut norms = vec![Vec::new(); q_list.len()];
    for &n in n_list {
        let r = recipe.at_n(n);
        match &r {
            Recipe::Radial(cfg) if cfg.symbol.dim() == 3 => {
                let (r_max, pts) = engine_extent(n);
                let prof = profile(cfg, r_max, pts)?;
                let nn = n as f64;
                let h = prof.spacing;
                let mut env = Envelope { c: 0.0, argmax: vec![0.0, 0.0, 0.0] };
                for (i, &rr) in prof.r.iter().enumerate() {
                    if !prof.mask[i] && prof.v[i].abs() * (nn + rr) > env.c {
                        env.c = prof.v[i].abs() * (nn + rr);
                        env.argmax = vec![rr, 0.0, 0.0];
                    }
                }
                envelopes.push(env);
                for (k, q) in q_list.iter().enumerate() {
                    let val = match q {
                        None => prof.v.iter().zip(&prof.mask).filter(|(_, m)| !**m).map(|(v, _)| v.abs()).fold(0.0, f64::max),
                        Some(q) => {
                            let s = pairwise_sum(prof.r.len(), &mut |i| {
                                if prof.mask[i] {
                                    0.0
                                } else {
                                    4.0 * std::f64::consts::PI * prof.r[i] * prof.r[i] * prof.v[i].abs().powf(*q)
                                }
                            });
                            (s * h).powf(1.0 / q)
                        }
                    };
                    norms[k].push(val);
                }
            }
            _ => {
                let c = r.build()?;
                envelopes.push(envelope(&c));
                for (k, q) in q_list.iter().enumerate() {
                    norms[k].push(lq_norm_masked(&c.v, q.unwrap_or(f64::INFINITY), Some(&c.mask)));
                }
            }
        }
    }
    let cs: Vec<f64> = envelopes.iter().map(|e| e.c).collect();
    let hi = cs.iter().cloned().fold(0.0, f64::max);
    let lo = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    let uniformity = if lo > 0.0 { hi / lo } else if hi == 0.0 { 1.0 } else { f64::INFINITY };
    let lq = q_list
        .iter()
        .zip(norms)
        .map(|(q, y)| {
            let fitted = fit_slope(n_list, &y);
            let theory = -(1.0 - q.map_or(0.0, |q| threshold / q));
            LqScan {
                q: *q,
                n_list: n_list.to_vec(),
                norms: y,
                fitted_slope: fitted,
                theoretical_slope: theory,
                relative_error: ((fitted - theory) / theory).abs(),
            }
        })
        .collect();
    Ok(ScanResult { n_list: n_list.to_vec(), envelopes, uniformity, lq })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub builder: Builder,
    pub lambda: f64,
    pub n: u32,
    pub residual_same_grid: Option<f64>,
    pub residual_doubled: Option<f64>,
    pub grid_convergence: Option<f64>,
    pub envelope: BTreeMap<u32, Envelope>,
    pub envelope_uniformity: Option<f64>,
    pub lq_scan: Vec<LqScan>,
    pub realness: Option<f64>,
    pub hermiticity: Option<f64>,
    pub radiality: Option<Radiality>,
    pub masked_fraction: f64,
    pub diagnostics: BTreeMap<String, f64>,
    pub criteria: Vec<Criterion>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Overall verdict recomputed from the stored criteria.
    pub fn recheck(&self) -> bool {
        self.criteria.iter().filter(|c| c.required).all(|c| c.recheck())
    }
}

pub fn verify(c: &Construction, opts: &VerifyOptions) -> Result<VerificationReport> {
    let required = required_checks(c.builder);
    let req = |k: Check| required.contains(&k);
    let wants = |k: Check| opts.checks.contains(&k);
    let (t_same, t_doubled) = residual_thresholds(c.builder);
    let mut criteria = Vec::new();
    let mut rep = VerificationReport {
        builder: c.builder,
        lambda: c.lambda,
        n: c.scale.n,
        residual_same_grid: None,
        residual_doubled: None,
        grid_convergence: None,
        envelope: BTreeMap::new(),
        envelope_uniformity: None,
        lq_scan: vec![],
        realness: None,
        hermiticity: None,
        radiality: None,
        masked_fraction: c.masked_fraction(),
        diagnostics: c.diagnostics.clone(),
        criteria: vec![],
        pass: false,
    };
    if wants(Check::Residual) {
        let same = residual_same_grid(c)?;
        rep.residual_same_grid = Some(same);
        criteria.push(Criterion::new("residual_same_grid", same, Comparison::Le, t_same, req(Check::Residual)));
        if opts.doubled {
            let dbl = residual_doubled(c)?;
            rep.residual_doubled = Some(dbl.residual);
            rep.grid_convergence = Some(dbl.grid_convergence);
            criteria.push(Criterion::new(
                "residual_doubled",
                dbl.residual,
                Comparison::Le,
                t_doubled,
                req(Check::Residual),
            ));
        }
    }
    if wants(Check::Envelope) {
        let e = envelope(c);
        criteria.push(Criterion::new("envelope_finite", e.c, Comparison::Gt, 0.0, req(Check::Envelope)));
        rep.envelope.insert(c.scale.n, e);
    }
    if wants(Check::Realness) {
        let r = realness(c);
        rep.realness = Some(r);
        criteria.push(Criterion::new("realness", r, Comparison::Le, TOL_REALNESS, req(Check::Realness)));
    }
    if wants(Check::Hermiticity) && c.v.channels > 1 {
        let h = antihermitian_defect(&c.v);
        rep.hermiticity = Some(h);
        criteria.push(Criterion::new("antihermiticity", h, Comparison::Le, TOL_HERMITICITY, req(Check::Hermiticity)));
    }
    if wants(Check::Radiality) && c.builder == Builder::Radial {
        let r = radiality(c)?;
        criteria.push(Criterion::new("radiality", r.core, Comparison::Le, TOL_RADIALITY, req(Check::Radiality)));
        rep.radiality = Some(r);
    }
    if wants(Check::Scan) && !opts.n_list.is_empty() {
        let s = scan(&c.recipe, &opts.n_list, &opts.q_list)?;
        for (n, e) in s.n_list.iter().zip(&s.envelopes) {
            rep.envelope.insert(*n, e.clone());
        }
        rep.envelope_uniformity = Some(s.uniformity);
        criteria.push(Criterion::new(
            "envelope_uniformity",
            s.uniformity,
            Comparison::Le,
            MAX_UNIFORMITY,
            req(Check::Scan),
        ));
        for l in &s.lq {
            let name = match l.q {
                Some(q) => format!("lq_slope_q{q}"),
                None => "lq_slope_qinf".into(),
            };
            criteria.push(Criterion::new(&name, l.relative_error, Comparison::Le, TOL_SLOPE, req(Check::Scan)));
        }
        rep.lq_scan = s.lq;
    }
    rep.pass = criteria.iter().filter(|c| c.required).all(|c| c.pass);
    rep.criteria = criteria;
    Ok(rep)
}

/// CSV table `n, C_n, ‖V_n‖_q…` of a scan.
pub fn scan_csv(s: &ScanResult) -> String {
    let mut out = String::from("n,C_n");
    for l in &s.lq {
        match l.q {
            Some(q) => out.push_str(&format!(",norm_q{q}")),
            None => out.push_str(",norm_qinf"),
        }
    }
    out.push('\n');
    for (i, n) in s.n_list.iter().enumerate() {
        out.push_str(&format!("{n},{:e}", s.envelopes[i].c));
        for l in &s.lq {
            out.push_str(&format!(",{:e}", l.norms[i]));
        }
        out.push('\n');
    }
    out
}
