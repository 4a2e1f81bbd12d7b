use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use degenfem::analysis::{h1_error, necessary_lhs, sufficient_check};
use degenfem::fem::{assemble, solve_with_stats, FemError};
use degenfem::interp::{build_correction, lagrange, CorrectionOptions};
use degenfem::mesh::{classify, Triangulation};
use degenfem::meshgen::{self, Band};
use degenfem::study::{run_study, Family, StudyConfig};
use degenfem::verify::{run_suite, Suite};
use degenfem::ManufacturedSolution;

#[derive(Parser)]
#[command(name = "degenfem", version, about = "P1 finite elements on degenerating triangulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh and its JSON metadata sidecar (`<out>.json`)
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Output mesh file (native format)
        #[arg(long, global = true, default_value = "mesh.txt")]
        out: PathBuf,
    },
    /// Solve −Δu = f on a mesh with Dirichlet data from a manufactured solution
    Solve {
        #[arg(long)]
        mesh: PathBuf,
        /// quadratic, sinsin or linear
        #[arg(long, default_value = "quadratic")]
        solution: String,
        /// Output field file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a convergence study over a mesh family
    Study {
        /// uniform, single_band, babuska_aziz, subdivided_band or cluster
        #[arg(long)]
        family: String,
        /// Comma-separated values of 1/h
        #[arg(long, value_delimiter = ',', default_values_t = vec![8usize, 16, 32])]
        n: Vec<usize>,
        /// h̄ = h^beta
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        /// Target order in the necessary-condition length test
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Constant C_L in L ≥ C_L h^(2α/5)
        #[arg(long, default_value_t = 1.0)]
        c_l: f64,
        /// Maximum-angle threshold for T² (radians)
        #[arg(long)]
        alpha0: Option<f64>,
        /// Budget factor for the sum of squared diameters over T²
        #[arg(long, default_value_t = 4.0)]
        budget: f64,
        #[arg(long, default_value = "quadratic")]
        solution: String,
        /// Table output (stdout if absent)
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON summary output
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run a verification suite (identities, interp, correction, necessary, all)
    Verify {
        suite: String,
        #[arg(long, default_value_t = 20240601)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Classify a mesh and report band and correction quantities
    Report {
        #[arg(long)]
        mesh: PathBuf,
        /// Metadata sidecar written by `gen` (defaults to `<mesh>.json` if present)
        #[arg(long)]
        meta: Option<PathBuf>,
        #[arg(long)]
        alpha0: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 4.0)]
        budget: f64,
        #[arg(long, default_value = "quadratic")]
        solution: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Uniform right-triangle grid
    Uniform {
        #[arg(long)]
        n: usize,
    },
    /// Babuška-Aziz grid of nx × ny isosceles strips
    Ba {
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
    },
    /// One thin band of height hbar at y = 1/2
    Band {
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        hbar: f64,
    },
    /// Single band with its Γ-based elements split at the altitude foot
    Subdivided {
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        hbar: f64,
    },
    /// Uniform grid with a cluster of thin rows in a k×k block
    Cluster {
        #[arg(long)]
        n: usize,
        /// i,j,k: lower-left cell and block size
        #[arg(long, value_delimiter = ',', required = true)]
        block: Vec<usize>,
        #[arg(long)]
        rows: usize,
    },
}

/// Failure with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: e.into(),
    }
}

impl From<degenfem::Error> for Failure {
    fn from(e: degenfem::Error) -> Self {
        let code = match e {
            degenfem::Error::Fem(FemError::SolverBreakdown { .. }) => 3,
            _ => 2,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Gen { kind, out } => cmd_gen(kind, &out),
        Command::Solve {
            mesh,
            solution,
            out,
        } => cmd_solve(&mesh, &solution, out.as_deref()),
        Command::Study {
            family,
            n,
            beta,
            alpha,
            c_l,
            alpha0,
            budget,
            solution,
            out,
            summary,
            format,
        } => {
            let family: Family = family.parse().map_err(|e: String| usage(anyhow!(e)))?;
            let mut cfg = StudyConfig::with_ns(family, &n, beta);
            cfg.alpha_target = alpha;
            cfg.c_l = c_l;
            cfg.solution = parse_solution(&solution)?;
            if let Some(a) = alpha0 {
                cfg.alpha0 = a;
            }
            cfg.correction.budget_factor = budget;
            cmd_study(&cfg, out.as_deref(), summary.as_deref(), format)
        }
        Command::Verify {
            suite,
            seed,
            format,
        } => cmd_verify(&suite, seed, format),
        Command::Report {
            mesh,
            meta,
            alpha0,
            alpha,
            budget,
            solution,
            out,
        } => cmd_report(&mesh, meta, alpha0, alpha, budget, &solution, out.as_deref()),
    }
}

fn parse_solution(name: &str) -> Result<ManufacturedSolution, Failure> {
    ManufacturedSolution::by_name(name).ok_or_else(|| usage(anyhow!("unknown solution `{name}`")))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(usage)
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(s: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(s.as_bytes()).and_then(|_| out.flush());
}

fn sidecar_path(mesh: &Path) -> PathBuf {
    let mut s = mesh.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_json(path: &Path, v: &Value) -> Result<(), Failure> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, v)
        .map_err(anyhow::Error::from)
        .and_then(|_| writeln!(w).map_err(Into::into))
        .map_err(usage)
}

fn cmd_gen(kind: GenKind, out: &Path) -> Result<u8, Failure> {
    let gen_err = |e: meshgen::MeshGenError| Failure::from(degenfem::Error::from(e));
    let (mesh, meta) = match kind {
        GenKind::Uniform { n } => {
            let m = meshgen::unit_square_uniform(n).map_err(gen_err)?;
            (m, json!({ "family": "uniform", "n": n }))
        }
        GenKind::Ba { nx, ny } => {
            let rm = meshgen::babuska_aziz(nx, ny).map_err(gen_err)?;
            let meta = json!({
                "family": "babuska_aziz", "nx": nx, "ny": ny,
                "bands": rm.bands, "cutoffs": rm.cutoffs,
            });
            (rm.mesh, meta)
        }
        GenKind::Band { nx, hbar } => {
            let sb = meshgen::single_band_mesh(nx, hbar).map_err(gen_err)?;
            let meta = json!({
                "family": "single_band", "nx": nx, "hbar": hbar,
                "bands": [sb.band()], "cutoffs": sb.rows.cutoffs,
                "strip_elements": sb.strip_elements(), "alpha_star": sb.alpha_star,
            });
            (sb.rows.mesh, meta)
        }
        GenKind::Subdivided { nx, hbar } => {
            let sd = meshgen::subdivided_band_mesh(nx, hbar).map_err(gen_err)?;
            let mut meta = serde_json::to_value(&sd).map_err(usage)?;
            meta["family"] = json!("subdivided_band");
            meta["nx"] = json!(nx);
            (sd.mesh, meta)
        }
        GenKind::Cluster { n, block, rows } => {
            if block.len() != 3 {
                return Err(usage(anyhow!("--block takes exactly three values i,j,k")));
            }
            let cm = meshgen::cluster_mesh(n, (block[0], block[1], block[2]), rows).map_err(gen_err)?;
            let meta = json!({
                "family": "cluster", "n": n, "block": block, "rows": rows,
                "clusters": [cm.cluster], "block_diameter": cm.block_diameter,
                "diameter": cm.diameter,
            });
            (cm.mesh, meta)
        }
    };
    let mut w = create(out)?;
    mesh.write_native(&mut w)
        .and_then(|_| w.flush())
        .with_context(|| format!("cannot write {}", out.display()))
        .map_err(usage)?;
    write_json(&sidecar_path(out), &meta)?;
    println!(
        "{}: {} vertices, {} triangles",
        out.display(),
        mesh.num_vertices(),
        mesh.num_triangles()
    );
    Ok(0)
}

fn read_mesh(path: &Path) -> Result<Triangulation, Failure> {
    let f = File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))
        .map_err(usage)?;
    Triangulation::read_native(BufReader::new(f))
        .map_err(|e| usage(anyhow!("{}: {e}", path.display())))
}

fn cmd_solve(mesh_path: &Path, solution: &str, out: Option<&Path>) -> Result<u8, Failure> {
    let u = parse_solution(solution)?;
    let mesh = read_mesh(mesh_path)?;
    let sys = assemble(&mesh, &u);
    let (field, stats) = solve_with_stats(&sys).map_err(|e| Failure::from(degenfem::Error::from(e)))?;
    if let Some(p) = out {
        let mut w = create(p)?;
        field
            .write_text(&mut w)
            .and_then(|_| w.flush())
            .with_context(|| format!("cannot write {}", p.display()))
            .map_err(usage)?;
    }
    let summary = json!({
        "vertices": mesh.num_vertices(),
        "triangles": mesh.num_triangles(),
        "dofs": sys.interior.len(),
        "h": mesh.h(),
        "h1_error": h1_error(&u, &field, &mesh, None),
        "lagrange_h1_error": h1_error(&u, &lagrange(&u, &mesh), &mesh, None),
        "solver": stats,
    });
    emit(&(serde_json::to_string_pretty(&summary).map_err(usage)? + "\n"));
    Ok(0)
}

fn cmd_study(cfg: &StudyConfig, out: Option<&Path>, summary: Option<&Path>, format: Format) -> Result<u8, Failure> {
    let res = run_study(cfg)?;
    let body = match format {
        Format::Csv => res.to_csv(),
        Format::Json => serde_json::to_string_pretty(&res).map_err(usage)? + "\n",
    };
    match out {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(body.as_bytes())
                .and_then(|_| w.flush())
                .with_context(|| format!("cannot write {}", p.display()))
                .map_err(usage)?;
        }
        None => emit(&body),
    }
    if let Some(p) = summary {
        write_json(p, &serde_json::to_value(&res).map_err(usage)?)?;
    }
    if let Some(r) = res.rate {
        eprintln!("fitted rate {:.4} (log residual {:.2e})", r.slope, r.residual);
    }
    Ok(0)
}

fn cmd_verify(suite: &str, seed: u64, format: Format) -> Result<u8, Failure> {
    let suites: Vec<Suite> = if suite == "all" {
        vec![Suite::Identities, Suite::Interp, Suite::Correction, Suite::Necessary]
    } else {
        vec![suite.parse().map_err(|e: String| usage(anyhow!(e)))?]
    };
    let reports: Vec<_> = suites.into_iter().map(|s| run_suite(s, seed)).collect();
    match format {
        Format::Json => emit(&(serde_json::to_string_pretty(&reports).map_err(usage)? + "\n")),
        Format::Csv => {
            for r in &reports {
                for c in &r.checks {
                    emit(&format!(
                        "{} {:?}: {} {}\n",
                        if c.passed { "PASS" } else { "FAIL" },
                        r.suite,
                        c.name,
                        if c.detail.is_empty() { String::new() } else { format!("({})", c.detail) }
                    ));
                }
            }
        }
    }
    Ok(if reports.iter().all(|r| r.passed()) { 0 } else { 1 })
}

fn cmd_report(
    mesh_path: &Path,
    meta: Option<PathBuf>,
    alpha0: Option<f64>,
    alpha: f64,
    budget: f64,
    solution: &str,
    out: Option<&Path>,
) -> Result<u8, Failure> {
    let u = parse_solution(solution)?;
    let mesh = read_mesh(mesh_path)?;
    let meta_path = meta.or_else(|| {
        let p = sidecar_path(mesh_path);
        p.exists().then_some(p)
    });
    let meta: Value = match meta_path {
        Some(p) => {
            let f = File::open(&p)
                .with_context(|| format!("cannot open {}", p.display()))
                .map_err(usage)?;
            serde_json::from_reader(BufReader::new(f))
                .with_context(|| format!("cannot parse {}", p.display()))
                .map_err(usage)?
        }
        None => json!({}),
    };
    let bands: Vec<Band> = match meta.get("bands") {
        Some(b) => serde_json::from_value(b.clone()).map_err(usage)?,
        None => Vec::new(),
    };
    for (i, b) in bands.iter().enumerate() {
        b.validate_structure(&mesh)
            .map_err(|e| usage(anyhow!("band {i}: {e}")))?;
    }
    let clusters: Vec<Vec<usize>> = match meta.get("clusters") {
        Some(c) => serde_json::from_value(c.clone()).map_err(usage)?,
        None => Vec::new(),
    };
    let alpha0 = alpha0.unwrap_or(meshgen::DEFAULT_ALPHA0);
    let cls = classify(&mesh, alpha0);
    let opts = CorrectionOptions {
        budget_factor: budget,
        ..CorrectionOptions::default()
    };
    let spec = build_correction(&u, &mesh, &cls, &clusters, opts)
        .map_err(|e| usage(anyhow!(e)))?;
    let sufficient = sufficient_check(&mesh, &cls, &spec, &clusters);
    let max_angle = mesh.geoms().iter().map(|g| g.max_angle).fold(0.0, f64::max);
    let mut report = json!({
        "vertices": mesh.num_vertices(),
        "triangles": mesh.num_triangles(),
        "h": mesh.h(),
        "max_angle": max_angle,
        "alpha0": alpha0,
        "t1_count": cls.t1.len(),
        "t2_count": cls.t2.len(),
        "sufficient": sufficient,
        "correction": spec,
    });
    if !bands.is_empty() {
        report["necessary"] = serde_json::to_value(necessary_lhs(&bands, &mesh, alpha, 1.0)).map_err(usage)?;
    }
    let text = serde_json::to_string_pretty(&report).map_err(usage)?;
    match out {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{text}")
                .with_context(|| format!("cannot write {}", p.display()))
                .map_err(usage)?;
        }
        None => emit(&format!("{text}\n")),
    }
    Ok(0)
}
