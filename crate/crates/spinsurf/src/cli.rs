//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use spinsurf_core::network::SYMMETRY_TOL;
use spinsurf_core::{
    build_basis, classify_symmetry, effective_couplings, effective_ground, ground_and_gap_with,
    make_geometry, Axis, Coupling, GeometryParams, Method, SectorConstraint, Sign, SolverOptions,
    SpinNetwork, CATALOG,
};

use crate::error::{exit, Error, Result};
use crate::figures::{compare_frustration, figure, FigureOptions};
use crate::io::{
    load_network, network_hash, network_to_json, validation_report, write_matrix_market,
};
use crate::sweep::{observe, parse_grid, Observable, Parameter, Source, SweepSpec, SweepTable};

#[derive(Debug, Parser)]
#[command(
    name = "spinsurf",
    version,
    about = "Surface entanglement of spin-1/2 XYZ networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SignArg {
    Ferro,
    Antiferro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Auto,
    SumOverStates,
    Resolvent,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    /// Network JSON file.
    #[arg(long, conflicts_with = "geometry")]
    pub network: Option<PathBuf>,
    /// Catalog key, e.g. square2, ring(8), modular(3).
    #[arg(long)]
    pub geometry: Option<String>,
    /// λ value, or a grid for `sweep` (v | v1,v2 | lin:a:b:step | log:a:b:n).
    #[arg(long)]
    pub lambda: Option<String>,
    /// Kᶻ (bulk Jᶻ follows it); value or grid.
    #[arg(long)]
    pub kz: Option<String>,
    /// Ring size or block count; value or grid.
    #[arg(long)]
    pub size: Option<String>,
    /// Hierarchy ratio of ring8; value or grid.
    #[arg(long)]
    pub ratio: Option<String>,
    /// λ′ of nested_squares (default λ²); value or grid.
    #[arg(long)]
    pub lambda_prime: Option<String>,
    /// Bulk Jᶻ with Jˣ = Jʸ = 1.
    #[arg(long, default_value_t = 0.0)]
    pub jz: f64,
    #[arg(long, value_enum, default_value = "antiferro")]
    pub sign: SignArg,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
    /// Largest sector dimension to attempt.
    #[arg(long, default_value_t = 1 << 20)]
    pub max_dim: usize,
    #[arg(long)]
    pub threads: Option<usize>,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            seed: self.seed,
            max_dim: self.max_dim,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a network file; the report goes to stderr as JSON.
    Validate { file: PathBuf },
    /// Ground energy, gap and sector diagnostics.
    Spectrum {
        #[command(flatten)]
        net: NetworkArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the Hamiltonian of this magnetization sector (or the full
        /// space with `full`) as Matrix Market.
        #[arg(long)]
        dump: Option<String>,
        #[arg(long)]
        dump_to: Option<PathBuf>,
    },
    /// Ground-state observables (default: surface concurrence).
    Concurrence {
        #[command(flatten)]
        net: NetworkArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        observable: Vec<String>,
    },
    /// Second-order effective surface Hamiltonian as JSON.
    Effective {
        /// Network file (alternative to --network / --geometry).
        file: Option<PathBuf>,
        #[command(flatten)]
        net: NetworkArgs,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
    },
    /// Sweep one parameter and tabulate observables.
    Sweep {
        #[command(flatten)]
        net: NetworkArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, required = true)]
        observable: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
        /// Also write the run manifest (with wall-clock time) here.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Regenerate the data of one figure (1-8) into a directory.
    Figure {
        n: u32,
        #[arg(long, default_value = "figures")]
        out: PathBuf,
        #[arg(long)]
        lambda: Option<String>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Antiferro vs ferro surface concurrence on the frustrated geometries.
    CompareFrustration {
        #[arg(long, default_value = "0.01,0.02,0.05,0.1,0.15,0.2,0.3,0.4,0.5")]
        lambda: String,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write every catalog geometry (default parameters) as network files.
    Catalog {
        #[arg(long, default_value = "catalog")]
        out: PathBuf,
    },
}

fn single(v: &Option<String>, name: &str) -> Result<Option<f64>> {
    match v {
        None => Ok(None),
        Some(s) => {
            let g = parse_grid(s)?;
            match g.as_slice() {
                [x] => Ok(Some(*x)),
                _ => Err(Error::Spec(format!("--{name} takes a single value here"))),
            }
        }
    }
}

impl NetworkArgs {
    fn geometry_params(&self) -> Result<GeometryParams> {
        let sign = match self.sign {
            SignArg::Ferro => Sign::Ferro,
            SignArg::Antiferro => Sign::Antiferro,
        };
        let mut p = GeometryParams::new(0.1, Coupling::xxz(1.0, self.jz), sign);
        if let Some(l) = single(&self.lambda, "lambda")? {
            p.lambda = l;
        }
        if let Some(kz) = single(&self.kz, "kz")? {
            p.bulk.z = kz;
            p.surface = Some(Coupling::xxz(1.0, kz));
        }
        if let Some(s) = single(&self.size, "size")? {
            p.size = Some(s as usize);
        }
        if let Some(r) = single(&self.ratio, "ratio")? {
            p.ratio = r;
        }
        if let Some(l) = single(&self.lambda_prime, "lambda-prime")? {
            p.lambda_prime = Some(l);
        }
        Ok(p)
    }

    fn network(&self) -> Result<SpinNetwork> {
        match (&self.network, &self.geometry) {
            (Some(path), _) => {
                let net = load_network(path)?;
                match single(&self.lambda, "lambda")? {
                    Some(l) => rescale_lambda(&net, l),
                    None => Ok(net),
                }
            }
            (None, Some(key)) => Ok(make_geometry(key, &self.geometry_params()?)?),
            (None, None) => Err(Error::Spec(
                "one of --network or --geometry is required".into(),
            )),
        }
    }

    /// The single swept parameter and its grid.
    fn sweep(&self) -> Result<(Parameter, Vec<f64>)> {
        let candidates = [
            (Parameter::Lambda, &self.lambda),
            (Parameter::Kz, &self.kz),
            (Parameter::Size, &self.size),
            (Parameter::Ratio, &self.ratio),
            (Parameter::LambdaPrime, &self.lambda_prime),
        ];
        let mut grids = Vec::new();
        for (p, v) in candidates {
            if let Some(s) = v {
                let g = parse_grid(s)?;
                if g.len() > 1 {
                    grids.push((p, g));
                }
            }
        }
        match grids.len() {
            0 => Ok((
                Parameter::Lambda,
                vec![single(&self.lambda, "lambda")?.unwrap_or(0.1)],
            )),
            1 => {
                let (mut p, g) = grids.pop().unwrap();
                if p == Parameter::Size
                    && self
                        .geometry
                        .as_deref()
                        .is_some_and(|g| g.starts_with("modular"))
                {
                    p = Parameter::Blocks;
                }
                Ok((p, g))
            }
            _ => Err(Error::Spec(
                "only one parameter can be swept at a time".into(),
            )),
        }
    }
}

fn rescale_lambda(net: &SpinNetwork, lambda: f64) -> Result<SpinNetwork> {
    let links = net.surface_links();
    let w_max = links.iter().map(|l| l.weight).fold(0.0, f64::max);
    Ok(net.with_surface_weights(|s| {
        links
            .iter()
            .find(|l| l.surface == s)
            .map_or(1.0, |l| l.weight * lambda / w_max)
    })?)
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json") + "\n"
}

fn write_table(table: &SweepTable, output: &OutputArgs) -> Result<()> {
    let text = match output.format {
        Format::Csv => table.to_csv()?,
        Format::Json => table.to_json()?,
    };
    emit(&text, &output.out)
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    Ok(b.build()
        .map_err(|e| Error::Spec(e.to_string()))?
        .install(f))
}

/// Runs a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!(
                "{}",
                json!({ "error": e.to_string(), "exit_code": e.exit_code() })
            );
            e.exit_code()
        }
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Validate { file } => {
            let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
            let report = validation_report(&text);
            if report.valid {
                emit(
                    &pretty(
                        &json!({ "valid": true, "network_hash": network_hash(&crate::io::parse_network(&text)?) }),
                    ),
                    &None,
                )?;
                Ok(exit::OK)
            } else {
                eprintln!("{}", serde_json::to_string(&report)?);
                Ok(exit::VALIDATION)
            }
        }
        Command::Spectrum {
            net,
            solver,
            dump,
            dump_to,
        } => {
            let network = net.network()?;
            let spec = ground_and_gap_with(&network, &solver.options())?;
            let sectors: Vec<_> = spec
                .sectors
                .iter()
                .map(|s| {
                    json!({
                        "constraint": format!("{:?}", s.basis.constraint()),
                        "dim": s.basis.dim(),
                        "energies": s.result.eigenvalues,
                        "residuals": s.result.residual_norms,
                    })
                })
                .collect();
            let out = json!({
                "network_hash": network_hash(&network),
                "symmetry": classify_symmetry(&network, SYMMETRY_TOL).tag.to_string(),
                "ground_energy": spec.ground_energy(),
                "gap": spec.gap,
                "ground_degenerate": spec.ground_degenerate,
                "ground_multiplicity": spec.ground.len(),
                "bulk_gap": spec.bulk_gap,
                "max_residual": spec.max_residual,
                "matvecs": spec.matvecs,
                "seed": solver.seed,
                "sectors": sectors,
            });
            emit(&pretty(&out), &None)?;
            if let Some(which) = dump {
                let constraint = if which == "full" {
                    SectorConstraint::None
                } else {
                    let m = which
                        .parse()
                        .map_err(|_| Error::Spec(format!("bad sector `{which}`")))?;
                    SectorConstraint::Magnetization(m)
                };
                let basis = build_basis(network.n_sites(), constraint)?;
                let op = spinsurf_core::assemble_hamiltonian(&network, &basis)?;
                let path = dump_to.unwrap_or_else(|| PathBuf::from("hamiltonian.mtx"));
                let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                write_matrix_market(&op, std::io::BufWriter::new(file))
                    .map_err(|e| Error::io(&path, e))?;
            }
            Ok(exit::OK)
        }
        Command::Concurrence {
            net,
            solver,
            observable,
        } => {
            let network = net.network()?;
            let spec = ground_and_gap_with(&network, &solver.options())?;
            let obs: Vec<Observable> = if observable.is_empty() {
                vec![Observable::Concurrence(None)]
            } else {
                observable
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<_>>()?
            };
            let mut values = serde_json::Map::new();
            for o in &obs {
                values.insert(o.to_string(), json!(observe(&network, &spec, o)?));
            }
            values.insert("ground_degenerate".into(), json!(spec.ground_degenerate));
            values.insert("gap".into(), json!(spec.gap));
            emit(&pretty(&serde_json::Value::Object(values)), &None)?;
            Ok(exit::OK)
        }
        Command::Effective { file, net, method } => {
            let network = match file {
                Some(f) => load_network(f)?,
                None => net.network()?,
            };
            let bulk_dim = 1usize << network.bulk_sites().len();
            let method = match method {
                MethodArg::Auto => Method::auto(bulk_dim),
                MethodArg::SumOverStates => Method::SumOverStates,
                MethodArg::Resolvent => Method::Resolvent,
            };
            let eff = effective_couplings(&network, method)?;
            let ground = effective_ground(&eff)?;
            let n = eff.n_surface();
            let matrix = |a: Axis| -> Vec<Vec<f64>> {
                (0..n)
                    .map(|j| (0..n).map(|k| eff.get(a, j, k) + 0.0).collect())
                    .collect()
            };
            let out = json!({
                "network_hash": network_hash(&network),
                "surface_sites": eff.surface_sites,
                "lambdas": eff.lambdas,
                "method": format!("{:?}", eff.method),
                "symmetry": eff.symmetry.tag.to_string(),
                "lambda_tensor": { "x": matrix(Axis::X), "y": matrix(Axis::Y), "z": matrix(Axis::Z) },
                "self_energies": { "x": eff.diagonal(Axis::X), "y": eff.diagonal(Axis::Y), "z": eff.diagonal(Axis::Z) },
                "bulk_energy": eff.bulk_energy,
                "bulk_gap": eff.bulk_gap,
                "validity_ratio": eff.validity_ratio,
                "effective_ground_energy": ground.eigenvalues[0],
                "effective_gap": ground.gap,
                "effective_ground_degenerate": ground.ground_degenerate,
            });
            emit(&pretty(&out), &None)?;
            Ok(exit::OK)
        }
        Command::Sweep {
            net,
            solver,
            observable,
            output,
            manifest,
        } => {
            let (parameter, grid) = net.sweep()?;
            let source = match (&net.network, &net.geometry) {
                (Some(path), _) => Source::Network(load_network(path)?),
                (None, Some(key)) => Source::Geometry {
                    key: key.clone(),
                    params: net.geometry_params_for_sweep(parameter)?,
                },
                (None, None) => {
                    return Err(Error::Spec(
                        "one of --network or --geometry is required".into(),
                    ))
                }
            };
            let spec = SweepSpec {
                source,
                parameter,
                grid,
                observables: observable
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<_>>()?,
                solver: solver.options(),
                threads: solver.threads,
            };
            let table = crate::sweep::run_sweep(&spec)?;
            write_table(&table, &output)?;
            if let Some(path) = manifest {
                fs::write(&path, serde_json::to_string_pretty(&table.manifest)? + "\n")
                    .map_err(|e| Error::io(&path, e))?;
            }
            Ok(exit::OK)
        }
        Command::Figure {
            n,
            out,
            lambda,
            solver,
        } => {
            let opts = FigureOptions {
                solver: solver.options(),
                threads: solver.threads,
                lambda_grid: lambda.as_deref().map(parse_grid).transpose()?,
            };
            for path in figure(n, &out, &opts)? {
                println!("{}", path.display());
            }
            Ok(exit::OK)
        }
        Command::CompareFrustration {
            lambda,
            solver,
            output,
        } => {
            let grid = parse_grid(&lambda)?;
            let opts = FigureOptions {
                solver: solver.options(),
                threads: solver.threads,
                lambda_grid: None,
            };
            let table = with_threads(solver.threads, || compare_frustration(&grid, &opts))??;
            let text = match output.format {
                Format::Csv => table.to_csv()?,
                Format::Json => serde_json::to_string_pretty(&table)? + "\n",
            };
            emit(&text, &output.out)?;
            let bad = table.violations();
            if bad.is_empty() {
                Ok(exit::OK)
            } else {
                eprintln!("{}", json!({ "antiferro_exceeds_ferro": bad }));
                Ok(exit::VALIDATION)
            }
        }
        Command::Catalog { out } => {
            for path in write_catalog(&out)? {
                println!("{}", path.display());
            }
            Ok(exit::OK)
        }
    }
}

impl NetworkArgs {
    /// Fixed parameters of a geometry sweep; the swept flag is ignored here.
    fn geometry_params_for_sweep(&self, swept: Parameter) -> Result<GeometryParams> {
        let mut fixed = NetworkArgs {
            network: None,
            geometry: self.geometry.clone(),
            lambda: self.lambda.clone(),
            kz: self.kz.clone(),
            size: self.size.clone(),
            ratio: self.ratio.clone(),
            lambda_prime: self.lambda_prime.clone(),
            jz: self.jz,
            sign: self.sign,
        };
        match swept {
            Parameter::Lambda => fixed.lambda = None,
            Parameter::Kz => fixed.kz = None,
            Parameter::Size | Parameter::Blocks => fixed.size = None,
            Parameter::Ratio => fixed.ratio = None,
            Parameter::LambdaPrime => fixed.lambda_prime = None,
        }
        fixed.geometry_params()
    }
}

/// Catalog instances written by `catalog`: key and file stem.
pub const CATALOG_FILES: [(&str, &str); 10] = [
    ("square2", "square2"),
    ("cube2", "cube2"),
    ("ring(6)", "ring6"),
    ("frustrated_square", "frustrated_square"),
    ("frustrated_pentagon", "frustrated_pentagon"),
    ("modular(2)", "modular2"),
    ("nested_squares", "nested_squares"),
    ("ring8", "ring8"),
    ("square4", "square4"),
    ("cube4", "cube4"),
];

fn attachment_note(key: &str) -> &'static str {
    match key {
        "square2" => "4-cycle; surface spins on opposite corners 0 and 2",
        "cube2" => "cube, v adjacent to v ^ 2^d; surface spins on antipodal vertices 0 and 7",
        "ring(6)" => "6-cycle; surface spins on opposite sites 0 and 3",
        "frustrated_square" => "4-cycle plus diagonal (0,2); surface spins on the diagonal ends",
        "frustrated_pentagon" => "5-cycle plus site 5 bonded to 0 and 2; surface spins on 3 and 4",
        "modular(2)" => {
            "two 4-cycles linked by (2,4) with strength lambda*J; surface spins on 0 and 6"
        }
        "nested_squares" => "4-cycle; inner pair on 0,1 (lambda), outer pair on 2,3 (lambda')",
        "ring8" => "8-cycle; pair p attached to sites p, p+4 with lambda*r^p",
        "square4" => "4-cycle; one surface spin per corner",
        "cube4" => "cube; surface spins on the even-parity tetrahedron 0,3,5,6",
        _ => "",
    }
}

/// Default parameters of the shipped catalog files.
pub fn catalog_params() -> GeometryParams {
    GeometryParams::new(0.1, Coupling::xx(1.0), Sign::Antiferro)
}

pub fn write_catalog(dir: &Path) -> Result<Vec<PathBuf>> {
    debug_assert_eq!(CATALOG.len(), CATALOG_FILES.len());
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let p = catalog_params();
    let mut out = Vec::new();
    for (key, stem) in CATALOG_FILES {
        let net = make_geometry(key, &p)?;
        let meta = json!({
            "geometry": key,
            "lambda": p.lambda,
            "coupling": "XX antiferro, J = 1",
            "attachment": attachment_note(key),
        });
        let path = dir.join(format!("{stem}.json"));
        fs::write(&path, network_to_json(&net, meta)).map_err(|e| Error::io(&path, e))?;
        out.push(path);
    }
    Ok(out)
}
