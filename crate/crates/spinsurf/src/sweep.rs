//! Parameter sweeps over catalog geometries or network files.
//!
//! Grid points run on a bounded rayon pool; rows always come back in grid
//! order and a failing point is recorded in its row instead of aborting
//! the sweep. Everything written to CSV is a deterministic function of the
//! spec, so re-running a spec reproduces the file byte for byte.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use spinsurf_core::entanglement::tangle_single;
use spinsurf_core::{
    concurrence, effective_couplings, effective_density, fidelity, ground_and_gap_with,
    make_geometry, make_z0, reduce_ground, residual_tangle, trace_distance, GeometryParams, Method,
    NetworkSpectrum, SolverOptions, SpinNetwork,
};

use crate::error::{Error, Result};
use crate::io::{hex, network_hash};

pub const TOOL_VERSION: &str = concat!("spinsurf ", env!("CARGO_PKG_VERSION"));

/// Swept quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    /// Surface weight `λ` (largest surface weight for network files).
    Lambda,
    /// `Kᶻ`, with the bulk `Jᶻ` moved along with it.
    Kz,
    /// Ring size.
    Size,
    /// Number of modular blocks.
    Blocks,
    /// Weight `λ′` of the second pair of `nested_squares`.
    LambdaPrime,
    /// Hierarchy ratio of `ring8`.
    Ratio,
}

impl Parameter {
    pub fn name(self) -> &'static str {
        match self {
            Parameter::Lambda => "lambda",
            Parameter::Kz => "kz",
            Parameter::Size => "size",
            Parameter::Blocks => "blocks",
            Parameter::LambdaPrime => "lambda_prime",
            Parameter::Ratio => "ratio",
        }
    }

    fn integral(self) -> bool {
        matches!(self, Parameter::Size | Parameter::Blocks)
    }
}

impl FromStr for Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lambda" => Parameter::Lambda,
            "kz" => Parameter::Kz,
            "size" => Parameter::Size,
            "blocks" => Parameter::Blocks,
            "lambda_prime" => Parameter::LambdaPrime,
            "ratio" => Parameter::Ratio,
            _ => return Err(Error::Spec(format!("unknown parameter `{s}`"))),
        })
    }
}

/// A per-point output column.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// Concurrence of two sites; `None` means the first two surface sites.
    Concurrence(Option<(usize, usize)>),
    Gap,
    Energy,
    /// Total number of spins.
    Sites,
    /// Fidelity of the four surface spins with the two-up/two-down Dicke state.
    Fidelity,
    /// Single-site tangle `4 det ρⱼ` of the ground manifold.
    Tangle(usize),
    /// Residual tangle of a site in the (pure) ground state.
    ResidualTangle(usize),
    /// Trace distance between exact and effective surface states.
    TraceDistance,
}

impl Observable {
    pub fn column(&self) -> String {
        match self {
            Observable::Concurrence(None) => "concurrence".into(),
            Observable::Concurrence(Some((a, b))) => format!("concurrence_{a}_{b}"),
            Observable::Gap => "gap".into(),
            Observable::Energy => "energy".into(),
            Observable::Sites => "n_sites".into(),
            Observable::Fidelity => "fidelity".into(),
            Observable::Tangle(j) => format!("tangle_{j}"),
            Observable::ResidualTangle(j) => format!("residual_tangle_{j}"),
            Observable::TraceDistance => "trace_distance".into(),
        }
    }

    fn sites(&self) -> Vec<usize> {
        match *self {
            Observable::Concurrence(Some((a, b))) => vec![a, b],
            Observable::Tangle(j) | Observable::ResidualTangle(j) => vec![j],
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Concurrence(None) => f.write_str("concurrence"),
            Observable::Concurrence(Some((a, b))) => write!(f, "concurrence:{a},{b}"),
            Observable::Gap => f.write_str("gap"),
            Observable::Energy => f.write_str("energy"),
            Observable::Sites => f.write_str("n_sites"),
            Observable::Fidelity => f.write_str("fidelity"),
            Observable::Tangle(j) => write!(f, "tangle:{j}"),
            Observable::ResidualTangle(j) => write!(f, "residual_tangle:{j}"),
            Observable::TraceDistance => f.write_str("trace_distance"),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    /// `concurrence[:a,b]`, `gap`, `energy`, `n_sites`, `fidelity`,
    /// `tangle:j`, `residual_tangle:j`, `trace_distance`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Spec(format!("cannot parse observable `{s}`"));
        let site = |v: &str| v.trim().parse::<usize>().map_err(|_| bad());
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (s.trim(), None),
        };
        Ok(match (name, arg) {
            ("concurrence", None) => Observable::Concurrence(None),
            ("concurrence", Some(a)) => {
                let (x, y) = a.split_once(',').ok_or_else(bad)?;
                Observable::Concurrence(Some((site(x)?, site(y)?)))
            }
            ("gap", None) => Observable::Gap,
            ("energy", None) => Observable::Energy,
            ("n_sites", None) => Observable::Sites,
            ("fidelity", None) => Observable::Fidelity,
            ("tangle", Some(a)) => Observable::Tangle(site(a)?),
            ("residual_tangle", Some(a)) => Observable::ResidualTangle(site(a)?),
            ("trace_distance", None) => Observable::TraceDistance,
            _ => return Err(bad()),
        })
    }
}

/// Parses `v`, `v1,v2,...`, `lin:start:stop:step` or `log:start:stop:count`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Spec(format!("cannot parse grid `{s}`"));
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["lin", a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step.is_nan() || step <= 0.0 || b < a {
                return Err(bad());
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| a + k as f64 * step).collect())
        }
        ["log", a, b, n] => {
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            let (a, b) = (num(a)?, num(b)?);
            if !(a > 0.0 && b > 0.0) || n == 0 {
                return Err(bad());
            }
            Ok(logspace(a, b, n))
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

/// `n` points from `a` to `b`, evenly spaced in `log10`.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.log10(), b.log10());
    (0..n)
        .map(|k| 10f64.powf(la + (lb - la) * k as f64 / (n - 1) as f64))
        .collect()
}

#[derive(Debug, Clone)]
pub enum Source {
    /// Catalog key (family name for sized families) with fixed parameters.
    Geometry { key: String, params: GeometryParams },
    /// A loaded network; only `λ` can be swept (surface weights rescaled so
    /// the largest equals the grid value).
    Network(SpinNetwork),
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub source: Source,
    pub parameter: Parameter,
    pub grid: Vec<f64>,
    pub observables: Vec<Observable>,
    pub solver: SolverOptions,
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
}

impl SweepSpec {
    pub fn geometry(
        key: &str,
        params: GeometryParams,
        parameter: Parameter,
        grid: Vec<f64>,
    ) -> Self {
        SweepSpec {
            source: Source::Geometry {
                key: key.to_string(),
                params,
            },
            parameter,
            grid,
            observables: Vec::new(),
            solver: SolverOptions::default(),
            threads: None,
        }
    }

    pub fn observe(mut self, obs: impl IntoIterator<Item = Observable>) -> Self {
        self.observables.extend(obs);
        self
    }

    pub fn with_solver(mut self, solver: SolverOptions) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    fn label(&self) -> String {
        match &self.source {
            Source::Geometry { key, .. } => key.clone(),
            Source::Network(net) => format!("file:{}", &network_hash(net)[..12]),
        }
    }

    /// The network at one grid value.
    pub fn network_at(&self, x: f64) -> Result<SpinNetwork> {
        match &self.source {
            Source::Geometry { key, params } => {
                let mut p = *params;
                match self.parameter {
                    Parameter::Lambda => p.lambda = x,
                    Parameter::Kz => {
                        p.bulk.z = x;
                        let mut k = params.surface.unwrap_or(params.bulk);
                        k.z = x;
                        p.surface = Some(k);
                    }
                    Parameter::Size | Parameter::Blocks => p.size = Some(x as usize),
                    Parameter::LambdaPrime => p.lambda_prime = Some(x),
                    Parameter::Ratio => p.ratio = x,
                }
                Ok(make_geometry(key, &p)?)
            }
            Source::Network(net) => {
                let links = net.surface_links();
                let w_max = links.iter().map(|l| l.weight).fold(0.0, f64::max);
                let weight = |s: usize| {
                    links
                        .iter()
                        .find(|l| l.surface == s)
                        .map_or(1.0, |l| l.weight * x / w_max)
                };
                Ok(net.with_surface_weights(weight)?)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Spec("empty grid".into()));
        }
        if self.observables.is_empty() {
            return Err(Error::Spec("no observables requested".into()));
        }
        if let Some(x) = self.grid.iter().find(|x| !x.is_finite()) {
            return Err(Error::Spec(format!("non-finite grid value {x}")));
        }
        let up = self.grid.windows(2).all(|w| w[1] > w[0]);
        let down = self.grid.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::Spec("grid must be strictly monotone".into()));
        }
        if self.parameter.integral() {
            if let Some(x) = self.grid.iter().find(|x| x.fract() != 0.0 || **x < 0.0) {
                return Err(Error::Spec(format!(
                    "{} must be a non-negative integer, got {x}",
                    self.parameter.name()
                )));
            }
        }
        if let Source::Network(_) = self.source {
            if self.parameter != Parameter::Lambda {
                return Err(Error::Spec("network files can only sweep lambda".into()));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Spec("threads must be positive".into()));
        }
        let net = self.network_at(self.grid[0])?;
        for obs in &self.observables {
            if let Some(s) = obs.sites().into_iter().find(|&s| s >= net.n_sites()) {
                return Err(Error::Spec(format!(
                    "observable {obs} names site {s}, network has {}",
                    net.n_sites()
                )));
            }
        }
        Ok(())
    }
}

/// Convergence and provenance of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointDiagnostics {
    pub value: f64,
    pub network_hash: Option<String>,
    pub status: String,
    pub ground_degenerate: Option<bool>,
    pub max_residual: Option<f64>,
    pub matvecs: usize,
    pub bulk_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub value: f64,
    pub values: Vec<Option<f64>>,
    pub diagnostics: PointDiagnostics,
}

impl Row {
    pub fn ok(&self) -> bool {
        self.diagnostics.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub source: String,
    pub parameter: Parameter,
    pub grid: Vec<f64>,
    pub observables: Vec<String>,
    pub seed: u64,
    pub tol: f64,
    pub dense_threshold: usize,
    pub max_dim: usize,
    pub points: Vec<PointDiagnostics>,
    /// SHA-256 of everything above.
    pub manifest_hash: String,
    /// Not part of the hash.
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub manifest: RunManifest,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl SweepTable {
    /// Values of one observable column, in grid order.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[k]).collect())
    }

    /// The CSV text: a `#`-prefixed JSON header line, column names, rows.
    pub fn to_csv(&self) -> Result<String> {
        let header = serde_json::json!({
            "tool": self.manifest.tool,
            "manifest_hash": self.manifest.manifest_hash,
            "source": self.manifest.source,
            "parameter": self.manifest.parameter,
            "seed": self.manifest.seed,
        });
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut names = vec![self.manifest.parameter.name().to_string()];
        names.extend(self.columns.iter().cloned());
        names.extend(
            [
                "status",
                "ground_degenerate",
                "max_residual",
                "network_hash",
            ]
            .map(String::from),
        );
        w.write_record(&names)?;
        let opt = |v: Option<f64>| v.map(fmt_value).unwrap_or_default();
        for r in &self.rows {
            let d = &r.diagnostics;
            let mut rec = vec![fmt_value(r.value)];
            rec.extend(r.values.iter().map(|&v| opt(v)));
            rec.push(d.status.clone());
            rec.push(
                d.ground_degenerate
                    .map(|b| b.to_string())
                    .unwrap_or_default(),
            );
            rec.push(opt(d.max_residual));
            rec.push(
                d.network_hash
                    .as_deref()
                    .map(|h| h[..16].to_string())
                    .unwrap_or_default(),
            );
            w.write_record(&rec)?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| Error::Spec(e.to_string()))?)
            .expect("utf-8");
        Ok(format!("# {header}\n{body}"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

/// Shortest round-tripping text; exponent form outside `[1e-4, 1e15)`.
fn fmt_value(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let started = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = spec.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Spec(e.to_string()))?;
    let rows: Vec<Row> =
        pool.install(|| spec.grid.par_iter().map(|&x| evaluate(spec, x)).collect());
    let points: Vec<PointDiagnostics> = rows.iter().map(|r| r.diagnostics.clone()).collect();
    let mut manifest = RunManifest {
        tool: TOOL_VERSION.to_string(),
        source: spec.label(),
        parameter: spec.parameter,
        grid: spec.grid.clone(),
        observables: spec.observables.iter().map(|o| o.to_string()).collect(),
        seed: spec.solver.seed,
        tol: spec.solver.tol,
        dense_threshold: spec.solver.dense_threshold,
        max_dim: spec.solver.max_dim,
        points,
        manifest_hash: String::new(),
        wall_clock_seconds: 0.0,
    };
    let hashed = serde_json::to_vec(&manifest)?;
    manifest.manifest_hash = hex(&Sha256::digest(hashed));
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    Ok(SweepTable {
        manifest,
        columns: spec.observables.iter().map(|o| o.column()).collect(),
        rows,
    })
}

/// Short status tag for a failed point.
fn status_of(e: &Error) -> String {
    use spinsurf_core::Error as C;
    let tag = match e {
        Error::Core(C::TooLarge { .. }) => "skipped_too_large",
        Error::Core(C::NoConvergence { .. }) => "no_convergence",
        Error::Core(C::DegenerateBulk { .. }) => "degenerate_bulk",
        _ => "error",
    };
    format!("{tag}: {e}")
}

fn evaluate(spec: &SweepSpec, x: f64) -> Row {
    let mut diag = PointDiagnostics {
        value: x,
        network_hash: None,
        status: "ok".into(),
        ground_degenerate: None,
        max_residual: None,
        matvecs: 0,
        bulk_gap: None,
    };
    let n_obs = spec.observables.len();
    let net = match spec.network_at(x) {
        Ok(n) => n,
        Err(e) => {
            diag.status = status_of(&e);
            return Row {
                value: x,
                values: vec![None; n_obs],
                diagnostics: diag,
            };
        }
    };
    diag.network_hash = Some(network_hash(&net));
    let spectrum = match ground_and_gap_with(&net, &spec.solver) {
        Ok(s) => s,
        Err(e) => {
            diag.status = status_of(&e.into());
            return Row {
                value: x,
                values: vec![None; n_obs],
                diagnostics: diag,
            };
        }
    };
    diag.ground_degenerate = Some(spectrum.ground_degenerate);
    diag.max_residual = Some(spectrum.max_residual);
    diag.matvecs = spectrum.matvecs;
    diag.bulk_gap = spectrum.bulk_gap;
    let mut values = Vec::with_capacity(n_obs);
    let mut notes = Vec::new();
    for obs in &spec.observables {
        match observe(&net, &spectrum, obs) {
            Ok(v) => values.push(Some(v)),
            Err(e) => {
                notes.push(format!("{obs}: {e}"));
                values.push(None);
            }
        }
    }
    if !notes.is_empty() {
        diag.status = format!("partial: {}", notes.join("; "));
    }
    Row {
        value: x,
        values,
        diagnostics: diag,
    }
}

/// Evaluates one observable on a solved network.
pub fn observe(net: &SpinNetwork, spec: &NetworkSpectrum, obs: &Observable) -> Result<f64> {
    let surface = net.surface_sites();
    Ok(match *obs {
        Observable::Concurrence(pair) => {
            let (a, b) = match pair {
                Some(p) => p,
                None if surface.len() >= 2 => (surface[0], surface[1]),
                None => {
                    return Err(Error::Spec(
                        "network has fewer than two surface sites".into(),
                    ))
                }
            };
            concurrence(&reduce_ground(spec, &[a, b])?)?
        }
        Observable::Gap => spec.gap,
        Observable::Energy => spec.ground_energy(),
        Observable::Sites => net.n_sites() as f64,
        Observable::Fidelity => {
            if surface.len() != 4 {
                return Err(Error::Spec(format!(
                    "fidelity needs 4 surface sites, found {}",
                    surface.len()
                )));
            }
            fidelity(&reduce_ground(spec, &surface)?, &make_z0())?
        }
        Observable::Tangle(j) => tangle_single(&reduce_ground(spec, &[j])?)?,
        Observable::ResidualTangle(j) => {
            if spec.ground.len() != 1 {
                return Err(Error::Spec(
                    "residual tangle needs a non-degenerate ground state".into(),
                ));
            }
            let (basis, state) = spec.ground_states().next().expect("one ground state");
            residual_tangle(state, basis, j)?
        }
        Observable::TraceDistance => {
            let bulk_dim = 1usize << net.bulk_sites().len();
            let eff = effective_couplings(net, Method::auto(bulk_dim))?;
            trace_distance(&reduce_ground(spec, &surface)?, &effective_density(&eff)?)?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use spinsurf_core::{Coupling, Sign};

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.1").unwrap(), vec![0.1]);
        assert_eq!(parse_grid("1,2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        let lin = parse_grid("lin:0:1:0.25").unwrap();
        assert_eq!(lin.len(), 5);
        assert!((lin[4] - 1.0).abs() < 1e-15);
        let log = parse_grid("log:0.01:1:3").unwrap();
        assert!((log[1] - 0.1).abs() < 1e-15);
        assert!(parse_grid("log:0:1:3").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn observables_round_trip() {
        for s in [
            "concurrence",
            "concurrence:4,5",
            "gap",
            "fidelity",
            "tangle:3",
            "residual_tangle:2",
            "trace_distance",
        ] {
            assert_eq!(s.parse::<Observable>().unwrap().to_string(), s);
        }
        assert!("concurrence:4".parse::<Observable>().is_err());
    }

    #[test]
    fn spec_errors() {
        let p = GeometryParams::new(0.1, Coupling::xx(1.0), Sign::Antiferro);
        let base = SweepSpec::geometry("square2", p, Parameter::Lambda, vec![0.1, 0.2]);
        assert!(matches!(base.validate(), Err(Error::Spec(_))));
        let ok = base.clone().observe([Observable::Gap]);
        assert!(ok.validate().is_ok());
        let mut unsorted = ok.clone();
        unsorted.grid = vec![0.1, 0.3, 0.2];
        assert!(unsorted.validate().is_err());
        let mut empty = ok.clone();
        empty.grid.clear();
        assert!(empty.validate().is_err());
        let far = base.observe([Observable::Concurrence(Some((0, 9)))]);
        assert!(far.validate().is_err());
    }
}
