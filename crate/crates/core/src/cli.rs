//! Command-line front end: configuration, dispatch and file emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{
    build_disk, build_half_disk, build_rectangle, read_mesh_file, refine, validate_mesh, write_mesh, MeshDomain, ProblemKind, Tag,
};
use crate::hadamard::{cluster_matrix, fd_slopes};
use crate::perturb::{interior_bump, normal_bump, PerturbationField};
use crate::spectral::{detect_clusters, minmax_check, solve, Cluster, Pencil, Spectrum};
use crate::splitting::{find_splitting, simplify_spectrum_with, verify_split, SearchOptions, SimplifyOptions, TraceOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_NO_CANDIDATE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "sloshlab", version, about = "Mixed Steklov eigenvalues, shape derivatives and multiplicity splitting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the leading eigenvalues.
    Solve(Common),
    /// Cluster derivative matrix of one field, compared with finite differences.
    Derivative {
        #[command(flatten)]
        common: Common,
        /// Field: dilation, translate:x,y, bump:SIDE,x,y,R,amp, interior:x,y,R,amp,dx,dy, or a JSON file path.
        #[arg(long)]
        field: String,
        /// 1-based index of an eigenvalue in the cluster of interest.
        #[arg(long, default_value_t = 1)]
        index: usize,
        #[arg(long, value_delimiter = ',', default_value = "1e-3,2e-3,4e-3")]
        t_grid: Vec<f64>,
    },
    /// Search for (or take) a splitting field and verify the split.
    Split {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: Search,
        /// Use this field instead of searching.
        #[arg(long)]
        field: Option<String>,
        /// 1-based index of an eigenvalue in the cluster; defaults to the first cluster.
        #[arg(long)]
        index: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1e-3,2e-3,4e-3,8e-3")]
        t_grid: Vec<f64>,
    },
    /// Compose splitting perturbations until the leading spectrum is simple.
    Simplify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: Search,
        #[arg(long, default_value_t = 12)]
        max_iter: usize,
    },
    /// Mesh diagnostics and a small invariant suite.
    Validate(Common),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// rect:a,h,nx,ny | disk:rings,sectors | halfdisk:rings,sectors | file:path
    #[arg(long)]
    pub domain: String,
    /// Uniform refinements applied to the domain mesh.
    #[arg(long, default_value_t = 0)]
    pub refine: usize,
    /// sd, sn or steklov
    #[arg(long, default_value = "sn")]
    pub kind: String,
    #[arg(short = 'k', long = "count", default_value_t = 6)]
    pub k: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_cluster: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol_simple: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Search {
    #[arg(long, default_value = "S")]
    pub side: String,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 16)]
    pub n_candidates: usize,
}

/// Everything a run depends on. The output directory is excluded from the hash.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub common: Common,
    pub search: Option<Search>,
    pub field: Option<String>,
    pub index: Option<usize>,
    pub t_grid: Vec<f64>,
    pub max_iter: usize,
}

impl RunConfig {
    pub fn from_command(cmd: Command) -> RunConfig {
        let base = |command: &str, common: Common| RunConfig {
            command: command.into(),
            common,
            search: None,
            field: None,
            index: None,
            t_grid: Vec::new(),
            max_iter: 12,
        };
        match cmd {
            Command::Solve(c) => base("solve", c),
            Command::Validate(c) => base("validate", c),
            Command::Derivative { common, field, index, t_grid } => RunConfig {
                field: Some(field),
                index: Some(index),
                t_grid,
                ..base("derivative", common)
            },
            Command::Split { common, search, field, index, t_grid } => RunConfig {
                search: Some(search),
                field,
                index,
                t_grid,
                ..base("split", common)
            },
            Command::Simplify { common, search, max_iter } => RunConfig {
                search: Some(search),
                max_iter,
                ..base("simplify", common)
            },
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn validate(&self) -> Result<()> {
        let c = &self.common;
        for (name, v) in [("tol-cluster", c.tol_cluster), ("tol-simple", c.tol_simple)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        if c.k == 0 {
            return Err(Error::invalid("eigen count must be positive"));
        }
        if self.t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::invalid("t grid entries must be positive"));
        }
        if let Some(s) = &self.search {
            if !(s.eps > 0.0 && s.eps < 0.5) {
                return Err(Error::invalid("eps must lie in (0, 1/2)"));
            }
            if s.n_candidates == 0 {
                return Err(Error::invalid("n-candidates must be positive"));
            }
        }
        Ok(())
    }
}

/// Outcome of [`run`]: exit status and the directory holding the emitted files.
#[derive(Debug)]
pub struct RunOutcome {
    pub status: i32,
    pub dir: Option<PathBuf>,
    pub files: Vec<PathBuf>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NoCandidateFound { .. } => EXIT_NO_CANDIDATE,
        Error::SingularSystem(_)
        | Error::TrackingFailure { .. }
        | Error::NonFinite(_)
        | Error::MeshFolded { .. }
        | Error::UndefinedForSimple => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn error_name(err: &Error) -> &'static str {
    match err {
        Error::InvalidArgument(_) => "invalid-argument",
        Error::InvalidMesh(_) => "invalid-mesh",
        Error::IncompatibleKind { .. } => "incompatible-kind",
        Error::InvalidSupport(_) => "invalid-support",
        Error::Unsupported(_) => "unsupported",
        Error::AmplitudeTooLarge { .. } => "amplitude-too-large",
        Error::MeshFolded { .. } => "mesh-folded",
        Error::SingularSystem(_) => "singular-system",
        Error::TrackingFailure { .. } => "tracking-failure",
        Error::UndefinedForSimple => "undefined-for-simple",
        Error::InvalidCase(_) => "invalid-case",
        Error::NoCandidateFound { .. } => "no-candidate-found",
        Error::Parse { .. } => "parse",
        Error::NonFinite(_) => "non-finite",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let (coef, pi) = match s.strip_suffix("pi") {
        Some(c) => (c.trim_end_matches('*'), true),
        None => (s, false),
    };
    let v = if pi && coef.is_empty() {
        1.0
    } else {
        coef.parse::<f64>().map_err(|_| Error::invalid(format!("bad number '{s}'")))?
    };
    Ok(if pi { v * std::f64::consts::PI } else { v })
}

fn parse_list(s: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s.split(',').map(parse_number).collect::<Result<_>>()?;
    if v.len() != n {
        return Err(Error::invalid(format!("{what} needs {n} parameters, got {}", v.len())));
    }
    Ok(v)
}

fn parse_count(x: f64) -> Result<usize> {
    if x >= 1.0 && x.fract() == 0.0 {
        Ok(x as usize)
    } else {
        Err(Error::invalid(format!("expected a positive integer, got {x}")))
    }
}

/// Builds the mesh named by a domain spec.
pub fn build_domain(spec: &str, refinements: usize) -> Result<MeshDomain> {
    let (name, args) = spec.split_once(':').ok_or_else(|| Error::invalid(format!("domain spec '{spec}' lacks ':'")))?;
    let mut mesh = match name {
        "rect" => {
            let p = parse_list(args, 4, "rect")?;
            build_rectangle(p[0], p[1], parse_count(p[2])?, parse_count(p[3])?)?
        }
        "disk" => {
            let p = parse_list(args, 2, "disk")?;
            build_disk(parse_count(p[0])?, parse_count(p[1])?)?
        }
        "halfdisk" => {
            let p = parse_list(args, 2, "halfdisk")?;
            build_half_disk(parse_count(p[0])?, parse_count(p[1])?)?
        }
        "file" => read_mesh_file(args)?,
        _ => return Err(Error::invalid(format!("unknown domain '{name}'"))),
    };
    for _ in 0..refinements {
        mesh = refine(&mesh);
    }
    Ok(mesh)
}

/// Resolves a field spec against a mesh (bumps snap to its boundary).
pub fn parse_field(spec: &str, mesh: &MeshDomain) -> Result<PerturbationField> {
    let spec = spec.trim();
    if spec == "dilation" {
        return Ok(PerturbationField::dilation());
    }
    if spec == "zero" {
        return Ok(PerturbationField::zero());
    }
    if spec.starts_with('{') {
        return Ok(serde_json::from_str(spec)?);
    }
    match spec.split_once(':') {
        Some(("translate", a)) => {
            let p = parse_list(a, 2, "translate")?;
            Ok(PerturbationField::translation([p[0], p[1]]))
        }
        Some(("bump", a)) => {
            let (side, rest) = a.split_once(',').ok_or_else(|| Error::invalid("bump needs SIDE,x,y,R,amp"))?;
            let side: Tag = side.parse()?;
            let p = parse_list(rest, 4, "bump")?;
            normal_bump(mesh, [p[0], p[1]], p[2], p[3], side)
        }
        Some(("interior", a)) => {
            let p = parse_list(a, 6, "interior")?;
            interior_bump(mesh, [p[0], p[1]], p[2], p[3], [p[4], p[5]])
        }
        _ => {
            let text = fs::read_to_string(spec).map_err(|e| Error::invalid(format!("field '{spec}': {e}")))?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

fn cluster_at(spectrum: &Spectrum, index: usize, tol: f64) -> Result<Cluster> {
    if index == 0 || index > spectrum.len() {
        return Err(Error::invalid(format!("eigen index {index} outside 1..={}", spectrum.len())));
    }
    let i = index - 1;
    Ok(detect_clusters(spectrum, tol)
        .into_iter()
        .find(|c| c.indices().contains(&i))
        .unwrap_or_else(|| Cluster::from_range(&spectrum.lambda, i..i + 1)))
}

fn check_finite(what: &str, values: impl IntoIterator<Item = f64>) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

struct Emitter {
    dir: PathBuf,
    hash: String,
    seed: u64,
    files: Vec<PathBuf>,
}

impl Emitter {
    fn create(root: &Path, config: &RunConfig, hash: &str) -> Result<Emitter> {
        fs::create_dir_all(root)?;
        let base = format!("{}-{}-seed{}", config.command, &hash[..12], config.common.seed);
        let mut dir = root.join(&base);
        let mut n = 1;
        while dir.exists() {
            n += 1;
            dir = root.join(format!("{base}-{n}"));
        }
        fs::create_dir(&dir)?;
        Ok(Emitter { dir, hash: hash.into(), seed: config.common.seed, files: Vec::new() })
    }

    fn write(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body)?;
        self.files.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, body: &str) -> Result<()> {
        let text = format!("# config_hash={} seed={}\n{body}", self.hash, self.seed);
        self.write(name, &text)
    }

    fn json<T: Serialize>(&mut self, name: &str, config: &RunConfig, result: &T) -> Result<()> {
        #[derive(Serialize)]
        struct Envelope<'a, T> {
            config_hash: &'a str,
            seed: u64,
            config: &'a RunConfig,
            result: &'a T,
        }
        let env = Envelope { config_hash: &self.hash, seed: self.seed, config, result };
        self.write(name, &(serde_json::to_string_pretty(&env)? + "\n"))
    }

    fn svg(&mut self, name: &str, body: &str) -> Result<()> {
        let text = body.replacen('\n', &format!("\n<!-- config_hash={} seed={} -->\n", self.hash, self.seed), 1);
        self.write(name, &text)
    }
}

/// Executes one command and writes its files under a fresh subdirectory of the output root.
pub fn run(config: &RunConfig) -> RunOutcome {
    let hash = config.hash();
    let mut emitter = match config.validate().and_then(|_| Emitter::create(&config.common.out, config, &hash)) {
        Ok(e) => e,
        Err(err) => {
            report_error(&err, None);
            return RunOutcome { status: exit_code(&err), dir: None, files: Vec::new() };
        }
    };
    let status = match dispatch(config, &mut emitter) {
        Ok(status) => status,
        Err(err) => {
            report_error(&err, Some(&mut emitter));
            exit_code(&err)
        }
    };
    RunOutcome { status, dir: Some(emitter.dir), files: emitter.files }
}

fn report_error(err: &Error, emitter: Option<&mut Emitter>) {
    let record = serde_json::json!({
        "error": error_name(err),
        "message": err.to_string(),
        "exit_code": exit_code(err),
    });
    eprintln!("{record}");
    if let Some(e) = emitter {
        let _ = e.write("error.json", &(record.to_string() + "\n"));
    }
}

fn dispatch(config: &RunConfig, out: &mut Emitter) -> Result<i32> {
    let c = &config.common;
    let kind: ProblemKind = c.kind.parse()?;
    let mesh = build_domain(&c.domain, c.refine)?;
    match config.command.as_str() {
        "solve" => {
            let s = solve(&mesh, kind, c.k)?;
            check_finite("spectrum", s.lambda.iter().chain(&s.residuals).copied())?;
            out.csv("spectrum.csv", &s.to_csv())?;
            Ok(EXIT_OK)
        }
        "derivative" => {
            let field = parse_field(config.field.as_deref().unwrap_or_default(), &mesh)?;
            let index = config.index.unwrap_or(1);
            let s = solve(&mesh, kind, c.k.max(index + 1))?;
            let cluster = cluster_at(&s, index, c.tol_cluster)?;
            let cd = cluster_matrix(&mesh, &s, &cluster, &field)?;
            let fd = fd_slopes(&mesh, &field, &cluster, kind, &config.t_grid)?;
            check_finite("derivative", cd.matrix.iter().flatten().chain(&cd.lambda_slopes).chain(&fd.lambda_slopes).copied())?;
            out.json("derivative.json", config, &cd)?;
            let mut csv = String::from("branch,predicted_lambda_slope,fd_lambda_slope,fd_r2\n");
            for (k, p) in cd.lambda_slopes.iter().enumerate() {
                let _ = writeln!(csv, "{},{p:.12e},{:.12e},{:.8}", k + 1, fd.lambda_slopes[k], fd.r2[k]);
            }
            out.csv("slopes.csv", &csv)?;
            Ok(EXIT_OK)
        }
        "split" => {
            let search = config.search.clone().expect("split carries search options");
            let side: Tag = search.side.parse()?;
            let s = solve(&mesh, kind, c.k)?;
            let cluster = match config.index {
                Some(i) => cluster_at(&s, i, c.tol_cluster)?,
                None => *detect_clusters(&s, c.tol_cluster)
                    .first()
                    .ok_or_else(|| Error::invalid("no cluster among the leading eigenvalues"))?,
            };
            let field = match &config.field {
                Some(f) => parse_field(f, &mesh)?,
                None => {
                    let opts = SearchOptions { n_candidates: search.n_candidates, seed: c.seed, min_gap: c.tol_simple, ..Default::default() };
                    find_splitting(&mesh, &s, &cluster, side, search.eps, &opts)?.0
                }
            };
            let report = verify_split(&mesh, &field, &cluster, kind, &config.t_grid)?;
            check_finite("split report", report.lambda.iter().flatten().copied().chain([report.fitted_slope, report.predicted_spread]))?;
            out.json("split.json", config, &report)?;
            out.svg("branch_fan.svg", &report.to_svg())?;
            Ok(EXIT_OK)
        }
        "simplify" => {
            let search = config.search.clone().expect("simplify carries search options");
            let side: Tag = search.side.parse()?;
            let opts = SimplifyOptions {
                tol_simple: c.tol_simple,
                max_iter: config.max_iter,
                n_candidates: search.n_candidates,
                ..Default::default()
            };
            let trace = simplify_spectrum_with(&mesh, kind, c.k, search.eps, side, c.seed, &opts)?;
            check_finite("trace", trace.final_lambda.iter().chain(&trace.initial_lambda).copied().chain([trace.total_spent]))?;
            out.json("trace.json", config, &trace)?;
            out.csv("spectrum_before.csv", &lambda_csv(&trace.initial_lambda))?;
            out.csv("spectrum_after.csv", &lambda_csv(&trace.final_lambda))?;
            out.write("mesh_after.mesh", &write_mesh(&trace.final_mesh))?;
            for st in &trace.steps {
                out.svg(&format!("branch_fan_step{}.svg", st.iteration), &st.report.to_svg())?;
            }
            Ok(match trace.outcome {
                TraceOutcome::NoCandidate { .. } => EXIT_NO_CANDIDATE,
                TraceOutcome::Inconclusive { .. } | TraceOutcome::MaxIterations => EXIT_NUMERICAL,
                TraceOutcome::Simple => EXIT_OK,
            })
        }
        "validate" => {
            let report = validate_mesh(&mesh);
            let pencil = Pencil::new(&mesh, kind)?;
            let s = solve(&mesh, kind, c.k)?;
            let minmax = minmax_check(&s, 100, c.seed);
            let max_residual = s.residuals.iter().copied().fold(0.0, f64::max);
            let summary = serde_json::json!({
                "mesh": {
                    "vertices": mesh.n_vertices(),
                    "triangles": mesh.n_triangles(),
                    "area": mesh.area(),
                    "length_s": mesh.boundary_length(Some(Tag::S)),
                    "length_w": mesh.boundary_length(Some(Tag::W)),
                    "interface_vertices": mesh.interface_vertices().len(),
                    "issues": report.issues,
                },
                "pencil": {
                    "free_dofs": pencil.n_free(),
                    "stiffness_symmetry_defect": pencil.a.symmetry_defect(),
                    "mass_symmetry_defect": pencil.b.symmetry_defect(),
                },
                "spectrum": { "lambda": s.lambda, "max_residual": max_residual },
                "minmax": minmax,
                "passed": report.is_valid() && minmax.passed() && max_residual < 1e-8,
            });
            check_finite("validation", s.lambda.iter().copied().chain([max_residual, minmax.worst_margin]))?;
            out.json("validate.json", config, &summary)?;
            Ok(if summary["passed"].as_bool() == Some(true) { EXIT_OK } else { EXIT_NUMERICAL })
        }
        other => Err(Error::invalid(format!("unknown command '{other}'"))),
    }
}

fn lambda_csv(lambda: &[f64]) -> String {
    let mut s = String::from("k,lambda\n");
    for (k, l) in lambda.iter().enumerate() {
        let _ = writeln!(s, "{},{l:.12e}", k + 1);
    }
    s
}

/// Caps the global rayon pool from `SLOSHLAB_THREADS`.
pub fn init_threads() {
    if let Some(n) = std::env::var("SLOSHLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
