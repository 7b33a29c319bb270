//! Command-line front end: one `RunConfig` per invocation, artifacts written at the end.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constructions::anisotropic::AnisoConfig;
use crate::constructions::chandrasekhar::ChandrasekharConfig;
use crate::constructions::dirac::DiracConfig;
use crate::constructions::knapp::{build_knapp, KnappConfig};
use crate::constructions::radial::RadialConfig;
use crate::constructions::real::RealConfig;
use crate::constructions::{Builder, Construction, Recipe};
use crate::error::{Error, Result};
use crate::lattice::{build_discrete_example, poisson_check, DiscreteConfig};
use crate::plot::{line_plot, Series};
use crate::symbols::SymbolSpec;
use crate::verify::{q_threshold, scan, scan_csv, verify, Check, ScanResult, VerificationReport, VerifyOptions};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Construct,
    Verify,
    Scan,
    Lattice,
    Knapp,
    Report,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Thm1,
    Thm2,
    Real,
    Radial,
    Chandrasekhar,
    Dirac,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// per-axis half-widths, normal axis last; one value applies to every axis
    pub half_width: Vec<f64>,
    pub points: Vec<usize>,
}

/// A number or `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QValue {
    Finite(f64),
    Named(Infinity),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Infinity {
    Inf,
}

impl QValue {
    fn get(self) -> Option<f64> {
        match self {
            QValue::Finite(q) => Some(q),
            QValue::Named(_) => None,
        }
    }
}

/// Every knob of a run. Absent fields fall back to the builder defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub theorem: Option<Theorem>,
    pub symbol: Option<SymbolSpec>,
    pub lambda: Option<f64>,
    pub n: Option<u32>,
    pub n_list: Option<Vec<u32>>,
    /// decay exponent `N`
    pub decay: Option<f64>,
    pub grid: Option<GridConfig>,
    pub q_list: Option<Vec<QValue>>,
    pub checks: Option<Vec<String>>,
    pub hint: Option<Vec<f64>>,
    pub k: Option<usize>,
    pub flat_power: Option<f64>,
    pub d: Option<usize>,
    /// lattice box radius
    pub m: Option<usize>,
    pub doubled: Option<bool>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "embedded-eigen", version, about = "Construct and certify embedded eigenvalues of T(D)+V")]
pub struct Cli {
    /// What to run; may instead come from `--config`
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON RunConfig; flags given on the command line take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub theorem: Option<Theorem>,
    /// JSON file, inline JSON, or a preset such as `laplacian:3`, `partial_laplacian:3:2`,
    /// `radial_laplacian:3`, `chandrasekhar:3`, `discrete_cosine:3`
    #[arg(long)]
    pub symbol: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// scale parameter, or a comma list for scans
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    /// decay exponent N
    #[arg(long)]
    pub decay: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub half_width: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub points: Option<Vec<usize>>,
    /// comma list of exponents; `inf` allowed
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<String>>,
    /// residual, envelope, scan, realness, hermiticity, radiality
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub hint: Option<Vec<f64>>,
    /// number of nonvanishing principal curvatures (thm2)
    #[arg(long)]
    pub k: Option<usize>,
    /// exponent on flat tangent directions (thm2)
    #[arg(long)]
    pub flat_power: Option<f64>,
    /// dimension when no symbol is given
    #[arg(long)]
    pub d: Option<usize>,
    /// lattice box radius
    #[arg(long)]
    pub m: Option<usize>,
    /// skip the doubled-grid residual
    #[arg(long)]
    pub no_doubled: bool,
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_q(s: &str) -> Result<Option<f64>> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") {
        return Ok(None);
    }
    t.parse::<f64>().map(Some).map_err(|_| Error::ConfigInvalid(format!("bad q value {t:?}")))
}

fn preset(s: &str) -> Result<SymbolSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| -> Result<usize> {
        parts
            .get(i)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::ConfigInvalid(format!("symbol preset {s:?} needs an integer field {i}")))
    };
    let spec = match parts[0] {
        "laplacian" => SymbolSpec::laplacian(num(1)?),
        "partial_laplacian" => SymbolSpec::partial_laplacian(num(1)?, num(2)?),
        "radial_laplacian" => SymbolSpec::RadialPolynomial { d: num(1)?, radial: vec![0.0, 1.0] },
        "chandrasekhar" => SymbolSpec::Chandrasekhar { d: num(1)?, mass: 1.0 },
        "discrete_cosine" => SymbolSpec::DiscreteCosine { d: num(1)? },
        _ => return Err(Error::ConfigInvalid(format!("unknown symbol {s:?}"))),
    };
    spec.validate()?;
    Ok(spec)
}

/// Reads a symbol from a JSON file, inline JSON, or a preset name.
pub fn parse_symbol(s: &str) -> Result<SymbolSpec> {
    let spec: SymbolSpec = if Path::new(s).is_file() {
        serde_json::from_str(&fs::read_to_string(s)?)?
    } else if s.trim_start().starts_with('{') {
        serde_json::from_str(s)?
    } else {
        return preset(s);
    };
    spec.validate()?;
    Ok(spec)
}

impl Cli {
    /// Loads `--config` if given and overlays the flags.
    pub fn into_config(self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => serde_json::from_str::<RunConfig>(&fs::read_to_string(p)?)?,
            None => RunConfig::default(),
        };
        if self.command.is_some() {
            c.command = self.command;
        }
        if self.theorem.is_some() {
            c.theorem = self.theorem;
        }
        if let Some(s) = &self.symbol {
            c.symbol = Some(parse_symbol(s)?);
        }
        if self.lambda.is_some() {
            c.lambda = self.lambda;
        }
        if let Some(n) = self.n {
            if n.len() == 1 {
                c.n = Some(n[0]);
            }
            c.n_list = Some(n);
        }
        if self.decay.is_some() {
            c.decay = self.decay;
        }
        if self.half_width.is_some() || self.points.is_some() {
            let mut g = c.grid.take().unwrap_or_default();
            if let Some(h) = self.half_width {
                g.half_width = h;
            }
            if let Some(p) = self.points {
                g.points = p;
            }
            c.grid = Some(g);
        }
        if let Some(q) = self.q {
            let q = q
                .iter()
                .map(|s| Ok(parse_q(s)?.map_or(QValue::Named(Infinity::Inf), QValue::Finite)))
                .collect::<Result<Vec<_>>>()?;
            c.q_list = Some(q);
        }
        if self.checks.is_some() {
            c.checks = self.checks;
        }
        if self.hint.is_some() {
            c.hint = self.hint;
        }
        if self.k.is_some() {
            c.k = self.k;
        }
        if self.flat_power.is_some() {
            c.flat_power = self.flat_power;
        }
        if self.d.is_some() {
            c.d = self.d;
        }
        if self.m.is_some() {
            c.m = self.m;
        }
        if self.no_doubled {
            c.doubled = Some(false);
        }
        if self.input.is_some() {
            c.input = self.input;
        }
        if self.out.is_some() {
            c.out = self.out;
        }
        Ok(c)
    }
}

fn unit(d: usize, axis: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[axis] = 1.0;
    v
}

fn per_axis<T: Copy>(v: &[T], d: usize, what: &str) -> Result<Vec<T>> {
    match v.len() {
        1 => Ok(vec![v[0]; d]),
        l if l == d => Ok(v.to_vec()),
        l => Err(Error::ConfigInvalid(format!("grid {what} has {l} entries, expected 1 or {d}"))),
    }
}

fn periods_of(half: f64) -> Result<u32> {
    let m = (half / std::f64::consts::PI).round();
    if m < 1.0 || (half - m * std::f64::consts::PI).abs() > 1e-9 * half {
        return Err(Error::ConfigInvalid(format!(
            "normal half-width {half} must be a positive multiple of pi"
        )));
    }
    Ok(m as u32)
}

impl RunConfig {
    fn n_single(&self) -> u32 {
        self.n.or_else(|| self.n_list.as_ref().and_then(|l| l.first().copied())).unwrap_or(1)
    }

    fn need_symbol(&self) -> Result<SymbolSpec> {
        self.symbol.clone().ok_or_else(|| Error::ConfigInvalid("this theorem needs --symbol".into()))
    }

    fn need_lambda(&self) -> Result<f64> {
        self.lambda.ok_or_else(|| Error::ConfigInvalid("this theorem needs --lambda".into()))
    }

    fn dim(&self) -> Result<usize> {
        match (&self.symbol, self.d) {
            (Some(s), Some(d)) if s.dim() != d => {
                Err(Error::ConfigInvalid(format!("--d {d} disagrees with the symbol dimension {}", s.dim())))
            }
            (Some(s), _) => Ok(s.dim()),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(Error::ConfigInvalid("give --d or --symbol".into())),
        }
    }

    /// The builder configuration this run describes.
    pub fn recipe(&self) -> Result<Recipe> {
        let th = self.theorem.ok_or_else(|| Error::ConfigInvalid("--theorem is required".into()))?;
        let n = self.n_single();
        let grid = self.grid.clone().unwrap_or_default();
        let recipe = match th {
            Theorem::Thm1 | Theorem::Thm2 => {
                let sym = self.need_symbol()?;
                let d = sym.dim();
                let hint = self.hint.clone().unwrap_or_else(|| unit(d, d - 1));
                let lambda = self.need_lambda()?;
                let mut c = if th == Theorem::Thm1 {
                    AnisoConfig::thm1(sym, lambda, hint)
                } else {
                    AnisoConfig::thm2(sym, lambda, hint, self.k, self.flat_power.unwrap_or(6.0))
                };
                c = c.with_n(n);
                if let Some(nd) = self.decay {
                    c.n_decay = nd;
                }
                if !grid.half_width.is_empty() {
                    c.y_half = per_axis(&grid.half_width, d, "half_width")?;
                }
                if !grid.points.is_empty() {
                    c.points = per_axis(&grid.points, d, "points")?;
                }
                Recipe::Anisotropic(c)
            }
            Theorem::Real => {
                let sym = self.need_symbol()?;
                let d = sym.dim();
                let hint = self.hint.clone().unwrap_or_else(|| unit(d, 0));
                let mut c = RealConfig::new(sym, self.need_lambda()?, hint);
                if let Some(nd) = self.decay {
                    c.n_decay = nd;
                }
                if !grid.half_width.is_empty() {
                    let h = per_axis(&grid.half_width, d, "half_width")?;
                    c.periods = periods_of(h[0])? as usize;
                    c.perp_half = h[d - 1];
                }
                if !grid.points.is_empty() {
                    let p = per_axis(&grid.points, d, "points")?;
                    c.points_1 = p[0];
                    c.points_perp = p[d - 1];
                }
                Recipe::Real(c)
            }
            Theorem::Radial => {
                let mut c = RadialConfig::new(self.need_symbol()?, self.need_lambda()?).with_n(n);
                if let Some(nd) = self.decay {
                    c.n_decay = nd;
                }
                if let Some(h) = grid.half_width.first() {
                    c.half_width = *h;
                }
                if let Some(p) = grid.points.first() {
                    c.points = *p;
                }
                Recipe::Radial(c)
            }
            Theorem::Chandrasekhar => {
                if let Some(s) = &self.symbol {
                    if !matches!(s, SymbolSpec::Chandrasekhar { .. }) {
                        return Err(Error::UnsupportedKind(format!("{} for the relativistic builder", s.kind_name())));
                    }
                }
                let d = self.dim()?;
                let mut c = ChandrasekharConfig::new(d, n);
                if let Some(l) = self.lambda {
                    c.lambda = l;
                }
                if let Some(nd) = self.decay {
                    c.n_decay = nd;
                }
                if !grid.half_width.is_empty() {
                    let h = per_axis(&grid.half_width, d, "half_width")?;
                    c.perp_half = Some(h[0]);
                    c.periods = Some(periods_of(h[d - 1])?);
                }
                if !grid.points.is_empty() {
                    let p = per_axis(&grid.points, d, "points")?;
                    c.perp_points = p[0];
                    c.normal_points = Some(p[d - 1]);
                }
                Recipe::Chandrasekhar(c)
            }
            Theorem::Dirac => {
                let d = self.dim()?;
                let mut c = DiracConfig::new(d, n);
                if let Some(l) = self.lambda {
                    c.lambda = l;
                }
                if let Some(nd) = self.decay {
                    c.n_decay = nd;
                }
                if !grid.half_width.is_empty() {
                    let h = per_axis(&grid.half_width, d, "half_width")?;
                    c.perp_half = Some(h[0]);
                    c.normal_half = Some(h[d - 1]);
                }
                if !grid.points.is_empty() {
                    let p = per_axis(&grid.points, d, "points")?;
                    c.perp_points = p[0];
                    c.normal_points = p[d - 1];
                }
                Recipe::Dirac(c)
            }
        };
        Ok(recipe)
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    fn q_values(&self) -> Option<Vec<Option<f64>>> {
        self.q_list.as_ref().map(|l| l.iter().map(|q| q.get()).collect())
    }

    /// Verification options for a construction: requested checks, scan lists and the doubled-grid switch.
    pub fn verify_options(&self, c: &Construction) -> Result<VerifyOptions> {
        let mut o = VerifyOptions::for_builder(c.builder);
        if let Some(ch) = &self.checks {
            o.checks = ch.iter().map(|s| Check::parse(s)).collect::<Result<_>>()?;
        }
        if let Some(b) = self.doubled {
            o.doubled = b;
        }
        if o.checks.contains(&Check::Scan) {
            o.n_list = match &self.n_list {
                Some(l) if l.len() > 1 => l.clone(),
                _ => default_n_list(c.builder),
            };
            o.q_list = match self.q_values() {
                Some(q) => q,
                None => default_q_list(&c.recipe)?,
            };
        }
        Ok(o)
    }
}

pub fn default_n_list(b: Builder) -> Vec<u32> {
    match b {
        Builder::Radial => vec![4, 8, 16, 32, 64],
        Builder::Chandrasekhar => vec![4, 8, 16],
        Builder::Real => vec![1],
        _ => vec![1, 2, 4, 8, 16],
    }
}

/// Exponents above the builder's threshold: `{3, 6, ∞}` for the anisotropic builders, `{4}` for radial.
pub fn default_q_list(r: &Recipe) -> Result<Vec<Option<f64>>> {
    match r {
        Recipe::Anisotropic(_) => {
            let t = q_threshold(r)?;
            Ok([3.0, 6.0].into_iter().filter(|q| *q > t).map(Some).chain([None]).collect())
        }
        Recipe::Radial(_) => Ok(vec![Some(4.0)]),
        _ => Ok(vec![]),
    }
}

fn print_report(r: &VerificationReport) {
    for c in &r.criteria {
        let verdict = match (c.pass, c.required) {
            (true, _) => "pass",
            (false, true) => "FAIL",
            (false, false) => "fail (not required)",
        };
        println!("{:<24} {:>14.6e} {:?} {:<10.3e} {}", c.name, c.value, c.comparison, c.threshold, verdict);
    }
    println!("overall: {}", if r.pass { "pass" } else { "FAIL" });
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(p) = path.parent() {
        fs::create_dir_all(p)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn slopes_csv(s: &ScanResult) -> String {
    let mut out = String::from("q,fitted_slope,theoretical_slope,relative_error\n");
    for l in &s.lq {
        let q = l.q.map_or("inf".to_string(), |q| q.to_string());
        out.push_str(&format!("{q},{:e},{:e},{:e}\n", l.fitted_slope, l.theoretical_slope, l.relative_error));
    }
    out
}

/// `C_n` against `n`, and `log ‖V_n‖_q` against `log n` with the predicted slope through the last point.
pub fn scan_plots(s: &ScanResult) -> (String, String) {
    let env = Series {
        label: "C_n".into(),
        points: s.n_list.iter().zip(&s.envelopes).map(|(n, e)| (*n as f64, e.c)).collect(),
        dashed: false,
    };
    let envelope = line_plot("Envelope constant", "n", "C_n", &[env]);
    let mut series = Vec::new();
    for l in &s.lq {
        let q = l.q.map_or("inf".to_string(), |q| q.to_string());
        let pts: Vec<(f64, f64)> = l.n_list.iter().zip(&l.norms).map(|(n, v)| ((*n as f64).ln(), v.ln())).collect();
        if let Some(&(x1, y1)) = pts.last() {
            let x0 = pts[0].0;
            let theory = vec![(x0, y1 + l.theoretical_slope * (x0 - x1)), (x1, y1)];
            series.push(Series { label: format!("q={q}"), points: pts, dashed: false });
            series.push(Series { label: format!("slope {:.3}", l.theoretical_slope), points: theory, dashed: true });
        }
    }
    let lq = line_plot("L^q norms of the potential", "log n", "log ||V_n||_q", &series);
    (envelope, lq)
}

fn scan_passes(s: &ScanResult) -> bool {
    s.uniformity <= crate::verify::MAX_UNIFORMITY && s.lq.iter().all(|l| l.relative_error <= crate::verify::TOL_SLOPE)
}

fn write_scan(dir: &Path, s: &ScanResult) -> Result<()> {
    write(&dir.join("scan.csv"), &scan_csv(s))?;
    write(&dir.join("slopes.csv"), &slopes_csv(s))?;
    write(&dir.join("scan.json"), &serde_json::to_string_pretty(s)?)?;
    let (env, lq) = scan_plots(s);
    write(&dir.join("envelope.svg"), &env)?;
    write(&dir.join("lq.svg"), &lq)?;
    Ok(())
}

fn construct(cfg: &RunConfig) -> Result<i32> {
    let c = cfg.recipe()?.build()?;
    let dir = cfg.out_dir();
    c.save(&dir)?;
    println!("{} n={} lambda={} grid={:?}", c.builder.name(), c.scale.n, c.lambda, c.u.spec.points);
    println!("wrote {}", dir.display());
    Ok(EXIT_PASS)
}

fn run_verify(cfg: &RunConfig) -> Result<i32> {
    let (c, default_out) = match &cfg.input {
        Some(dir) => (Construction::load(dir)?, dir.join("report.json")),
        None => (cfg.recipe()?.build()?, cfg.out_dir().join("report.json")),
    };
    let opts = cfg.verify_options(&c)?;
    let report = verify(&c, &opts)?;
    let path = match &cfg.out {
        Some(o) => o.join("report.json"),
        None => default_out,
    };
    write(&path, &report.to_json()?)?;
    print_report(&report);
    println!("wrote {}", path.display());
    Ok(if report.pass { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

fn run_scan(cfg: &RunConfig) -> Result<i32> {
    let recipe = match &cfg.input {
        Some(dir) => Construction::load(dir)?.recipe,
        None => cfg.recipe()?,
    };
    let builder = recipe.builder();
    let n_list = match &cfg.n_list {
        Some(l) if l.len() > 1 => l.clone(),
        _ => default_n_list(builder),
    };
    let q_list = match cfg.q_values() {
        Some(q) => q,
        None => default_q_list(&recipe)?,
    };
    let s = scan(&recipe, &n_list, &q_list)?;
    let dir = cfg.out_dir();
    write_scan(&dir, &s)?;
    println!("envelope uniformity {:.4}", s.uniformity);
    for l in &s.lq {
        let q = l.q.map_or("inf".to_string(), |q| q.to_string());
        println!(
            "q={q:<4} slope {:.5} theory {:.5} relative error {:.4}",
            l.fitted_slope, l.theoretical_slope, l.relative_error
        );
    }
    println!("wrote {}", dir.display());
    Ok(if scan_passes(&s) { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

#[derive(Serialize)]
struct LatticeReport<'a> {
    config: &'a DiscreteConfig,
    eta: &'a [f64],
    k_nonvanishing: usize,
    residual: f64,
    masked_fraction: f64,
    boundary_ratio: f64,
    poisson_gaussian_deviation: f64,
    diagnostics: &'a std::collections::BTreeMap<String, f64>,
    pass: bool,
}

pub const TOL_LATTICE_RESIDUAL: f64 = 1e-6;
pub const TOL_POISSON: f64 = 1e-8;

fn run_lattice(cfg: &RunConfig) -> Result<i32> {
    if let Some(s) = &cfg.symbol {
        if !matches!(s, SymbolSpec::DiscreteCosine { .. }) {
            return Err(Error::UnsupportedKind(format!("{} on the lattice", s.kind_name())));
        }
    }
    let d = cfg.dim()?;
    let mut c = DiscreteConfig::new(d, cfg.need_lambda()?);
    c.n = cfg.n_single();
    if let Some(nd) = cfg.decay {
        c.n_decay = nd;
    }
    if let Some(m) = cfg.m {
        c.m = m;
    }
    if let Some(h) = &cfg.hint {
        c.hint = h.clone();
    }
    if let Some(f) = cfg.flat_power {
        c.flat_power = f;
    }
    let ex = build_discrete_example(&c)?;
    let sym = SymbolSpec::DiscreteCosine { d };
    let gauss = |x: &[f64]| Complex64::new((-x.iter().map(|v| v * v).sum::<f64>() / 8.0).exp(), 0.0);
    let poisson = poisson_check(gauss, |xi: &[f64]| sym.evaluate(xi), d, c.m, None)?;
    let masked = ex.mask.iter().filter(|m| **m).count() as f64 / ex.mask.len() as f64;
    let pass = ex.residual <= TOL_LATTICE_RESIDUAL && poisson <= TOL_POISSON;
    let rep = LatticeReport {
        config: &c,
        eta: &ex.eta,
        k_nonvanishing: ex.k_nonvanishing,
        residual: ex.residual,
        masked_fraction: masked,
        boundary_ratio: ex.u.boundary_ratio(),
        poisson_gaussian_deviation: poisson,
        diagnostics: &ex.diagnostics,
        pass,
    };
    let dir = cfg.out_dir();
    write(&dir.join("lattice.json"), &serde_json::to_string_pretty(&rep)?)?;
    ex.u.write_csv(&dir.join("u.csv"))?;
    ex.v.write_csv(&dir.join("V.csv"))?;
    println!("residual {:.3e} (threshold {TOL_LATTICE_RESIDUAL:e})", ex.residual);
    println!("poisson deviation {:.3e} (threshold {TOL_POISSON:e})", poisson);
    println!("wrote {}", dir.display());
    Ok(if pass { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

#[derive(Serialize)]
struct KnappReport<'a> {
    config: &'a KnappConfig,
    c_lower: f64,
    c_upper: f64,
    partition_defect: f64,
    j_max: u32,
}

fn run_knapp(cfg: &RunConfig) -> Result<i32> {
    let mut c = KnappConfig::new(cfg.dim()?);
    if let Some(nd) = cfg.decay {
        c.n_decay = nd;
    }
    if let Some(g) = &cfg.grid {
        if let Some(h) = g.half_width.first() {
            c.half_width = *h;
        }
        if let Some(p) = g.points.first() {
            c.points = *p;
        }
    }
    let k = build_knapp(&c)?;
    let rep = KnappReport {
        config: &c,
        c_lower: k.c_lower,
        c_upper: k.c_upper,
        partition_defect: k.partition_defect,
        j_max: k.j_max,
    };
    let dir = cfg.out_dir();
    write(&dir.join("knapp.json"), &serde_json::to_string_pretty(&rep)?)?;
    println!("comparability [{:.5}, {:.5}] partition defect {:.1e}", k.c_lower, k.c_upper, k.partition_defect);
    println!("wrote {}", dir.display());
    let ok = k.c_lower > 0.0 && k.c_upper.is_finite();
    Ok(if ok { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

fn run_report(cfg: &RunConfig) -> Result<i32> {
    let input = cfg.input.clone().ok_or_else(|| Error::ConfigInvalid("report needs --in".into()))?;
    let file = if input.is_dir() { input.join("report.json") } else { input.clone() };
    let r: VerificationReport = serde_json::from_str(&fs::read_to_string(&file)?)?;
    let pass = r.recheck();
    if pass != r.pass {
        return Err(Error::Format(format!("{} records a verdict its criteria do not support", file.display())));
    }
    print_report(&r);
    let dir = input.is_dir().then_some(input).unwrap_or_else(|| file.parent().unwrap_or(Path::new(".")).to_path_buf());
    let out = cfg.out.clone().unwrap_or(dir);
    let mut csv = String::from("criterion,value,comparison,threshold,required,pass\n");
    for c in &r.criteria {
        csv.push_str(&format!("{},{:e},{:?},{:e},{},{}\n", c.name, c.value, c.comparison, c.threshold, c.required, c.pass));
    }
    write(&out.join("criteria.csv"), &csv)?;
    let scan_file = out.join("scan.json");
    if scan_file.is_file() {
        let s: ScanResult = serde_json::from_str(&fs::read_to_string(&scan_file)?)?;
        let (env, lq) = scan_plots(&s);
        write(&out.join("envelope.svg"), &env)?;
        write(&out.join("lq.svg"), &lq)?;
    }
    Ok(if pass { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

/// Runs one configuration and returns the process exit code.
pub fn run(cfg: &RunConfig) -> Result<i32> {
    match cfg.command {
        Some(Command::Construct) => construct(cfg),
        Some(Command::Verify) => run_verify(cfg),
        Some(Command::Scan) => run_scan(cfg),
        Some(Command::Lattice) => run_lattice(cfg),
        Some(Command::Knapp) => run_knapp(cfg),
        Some(Command::Report) => run_report(cfg),
        None => Err(Error::ConfigInvalid("no command given".into())),
    }
}

/// Parses arguments, runs, and maps errors to exit codes.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.into_config().and_then(|c| run(&c)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
