//! `clustershape` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use clustershape::cluster::extract_boundary_faces_3d;
use clustershape::curvature::shape_score_surface;
use clustershape::fit::ControlCount;
use clustershape::ingest::{self, Format, IngestError, Input};
use clustershape::pipeline::{run_pipeline, ErrorKind, PipelineConfig, ShapeReport, MAX_QUADRATURE_ORDER};
use clustershape::quadrature::DEFAULT_QUADRATURE_ORDER;
use clustershape::svg::emit_svg;

const EXIT_INPUT: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(name = "clustershape", version, about = "Score the shape complexity of point-cloud clusters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Triangulate and group points into clusters.
    Cluster(Common),
    /// Boundary loops of each cluster, or boundary faces of a tetrahedral complex.
    Boundary(Common),
    /// Fit a closed B-spline to every boundary loop.
    Fit(Common),
    /// Per-cluster shape scores.
    Score(Common),
    /// Full report, optionally with an SVG drawing.
    Pipeline(Common),
    /// Score a NURBS surface given as JSON.
    ScoreSurface(SurfaceArgs),
}

#[derive(Args)]
struct Common {
    /// Input file (.csv, .txt, .json, .tet). Falls back to `input` in the config file.
    input: Option<PathBuf>,
    /// TOML configuration; command-line flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input format, overriding the file extension.
    #[arg(long)]
    format: Option<String>,
    /// Short/long edge threshold in standard deviations.
    #[arg(short, long)]
    m: Option<f64>,
    /// Spline order.
    #[arg(long)]
    order: Option<usize>,
    /// Fixed number of control points per loop.
    #[arg(long)]
    controls: Option<usize>,
    /// Gauss–Legendre nodes per knot span.
    #[arg(long)]
    quadrature: Option<usize>,
    /// Control-polygon smoothing weight.
    #[arg(long)]
    regularization: Option<f64>,
    /// Work in input units instead of scaling to unit bounding-box area.
    #[arg(long)]
    no_normalize: bool,
    /// Include stage timings in the report.
    #[arg(long)]
    timing: bool,
    /// Write JSON here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also draw the result as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct SurfaceArgs {
    /// Surface JSON: grid, optional weights, knots_u, knots_v, order_u, order_v.
    input: PathBuf,
    /// Gauss–Legendre nodes per knot span.
    #[arg(long, default_value_t = DEFAULT_QUADRATURE_ORDER)]
    quadrature: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        let code = match e {
            IngestError::TooFewPoints { .. } => EXIT_DEGENERATE,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Input => EXIT_INPUT,
        ErrorKind::Degenerate => EXIT_DEGENERATE,
        ErrorKind::Numerical => EXIT_NUMERICAL,
    }
}

impl Common {
    fn config(&self) -> Result<PipelineConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::from_toml(&ingest::read_to_string(path)?)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if let Some(v) = self.order {
            cfg.order = v;
        }
        if let Some(v) = self.controls {
            cfg.control_count = ControlCount::Fixed(v);
        }
        if let Some(v) = self.quadrature {
            cfg.quadrature_order = v;
        }
        if let Some(v) = self.regularization {
            cfg.regularization = v;
        }
        if self.no_normalize {
            cfg.normalize = false;
        }
        if self.timing {
            cfg.timing = true;
        }
        if self.input.is_some() {
            cfg.input.clone_from(&self.input);
        }
        if self.output.is_some() {
            cfg.output.clone_from(&self.output);
        }
        if self.svg.is_some() {
            cfg.svg.clone_from(&self.svg);
        }
        cfg.validate().map_err(Failure::input)?;
        Ok(cfg)
    }

    fn read(&self, cfg: &PipelineConfig) -> Result<Input, Failure> {
        let path = cfg
            .input
            .as_deref()
            .ok_or_else(|| Failure::input("no input file given"))?;
        let format = self.format.as_deref().map(str::parse::<Format>).transpose()?;
        Ok(ingest::ingest(path, format)?)
    }
}

fn write_output(value: &Value, path: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n";
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pick(report: &Value, cluster_keys: &[&str]) -> Vec<Value> {
    report["clusters"]
        .as_array()
        .map(|cs| {
            cs.iter()
                .map(|c| Value::Object(cluster_keys.iter().map(|&k| (k.to_string(), c[k].clone())).collect()))
                .collect()
        })
        .unwrap_or_default()
}

fn view(command: &Command, report: &ShapeReport) -> Value {
    let full = serde_json::to_value(report).expect("reports serialize");
    match command {
        Command::Cluster(_) => json!({
            "edge_stats": full["edge_stats"],
            "clusters": pick(&full, &["id", "point_count", "members", "diagnostics"]),
        }),
        Command::Boundary(_) => {
            let mut clusters = pick(&full, &["id", "loops"]);
            for c in &mut clusters {
                if let Some(loops) = c["loops"].as_array_mut() {
                    for l in loops {
                        if let Some(o) = l.as_object_mut() {
                            o.retain(|k, _| matches!(k.as_str(), "vertices" | "positions" | "depth" | "hole" | "signed_area"));
                        }
                    }
                }
            }
            json!({ "scale": full["scale"], "clusters": clusters })
        }
        Command::Fit(_) => {
            let mut clusters = pick(&full, &["id", "loops"]);
            for c in &mut clusters {
                if let Some(loops) = c["loops"].as_array_mut() {
                    for l in loops {
                        if let Some(o) = l.as_object_mut() {
                            o.retain(|k, _| matches!(k.as_str(), "vertices" | "hole" | "fit" | "diagnostics"));
                        }
                    }
                }
            }
            json!({ "scale": full["scale"], "clusters": clusters })
        }
        Command::Score(_) => json!({
            "scale": full["scale"],
            "total_score": full["total_score"],
            "clusters": pick(&full, &["id", "point_count", "score", "estimated_error", "quadrature_order"]),
        }),
        Command::Pipeline(_) | Command::ScoreSurface(_) => full,
    }
}

fn run_cloud(command: &Command, args: &Common) -> Result<(), Failure> {
    let cfg = args.config()?;
    let cloud = match args.read(&cfg)? {
        Input::Cloud(c) => c,
        Input::Complex(complex) => {
            if !matches!(command, Command::Boundary(_)) {
                return Err(Failure::input("tetrahedral complexes are only accepted by `boundary`"));
            }
            let faces = extract_boundary_faces_3d(&complex).map_err(|e| Failure::input(e.to_string()))?;
            let faces: Vec<[usize; 3]> = faces.iter().map(|t| t.0).collect();
            return write_output(&json!({ "face_count": faces.len(), "faces": faces }), cfg.output.as_deref());
        }
    };
    let report = run_pipeline(&cloud, &cfg).map_err(|e| Failure {
        code: exit_code(e.kind()),
        message: e.to_string(),
    })?;
    if let Some(path) = &cfg.svg {
        emit_svg(&report, path).map_err(|e| Failure::input(e.to_string()))?;
    }
    write_output(&view(command, &report), cfg.output.as_deref())
}

fn run_surface(args: &SurfaceArgs) -> Result<(), Failure> {
    if !(1..=MAX_QUADRATURE_ORDER).contains(&args.quadrature) {
        return Err(Failure::input(format!(
            "quadrature must be in 1..={MAX_QUADRATURE_ORDER}, got {}",
            args.quadrature
        )));
    }
    let surface = ingest::parse_surface(&ingest::read_to_string(&args.input)?)?;
    let score = shape_score_surface(&surface, None, args.quadrature).map_err(|e| Failure {
        code: EXIT_NUMERICAL,
        message: e.to_string(),
    })?;
    let value = serde_json::to_value(&score).expect("scores serialize");
    write_output(&value, args.output.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::ScoreSurface(args) => run_surface(args),
        Command::Cluster(a) | Command::Boundary(a) | Command::Fit(a) | Command::Score(a) | Command::Pipeline(a) => {
            run_cloud(&cli.command, a)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("clustershape: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
