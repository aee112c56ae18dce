//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::avd::{build_avd_cells, build_avd_points, AvdIndex};
use crate::datasets;
use crate::error::{Error, Result};
use crate::hyperbolic::{embed, normalize};
use crate::io::PointFile;
use crate::quadtree::QuadTree;
use crate::render::{render, Figure};
use crate::spanner::{build_hyperbolic_spanner, build_spanner};
use crate::tiling::{CellId, HPoint};
use crate::verify;

#[derive(Parser, Debug)]
#[command(name = "hypertile", version, about = "Binary tilings, spanners and nearest-neighbor indexes in hyperbolic space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GenKind {
    /// Continuous points, uniform in the unit box under hyperbolic volume.
    Uniform,
    /// Cells with uniformly drawn levels.
    Stratified,
    /// Cells with centers in [1/4,1/2]^(D-1), accepted by the AVD.
    Margin,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Structure {
    Quadtree,
    Spanner,
    Avd,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a random point file.
    Gen {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "uniform")]
        kind: GenKind,
        #[arg(long, default_value_t = -10, allow_hyphen_values = true)]
        min_level: i32,
        #[arg(long, env = "HYPERTILE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a structure from a point file and write it as JSON.
    Build {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        structure: Structure,
        /// Hop parameter of the hyperbolic spanner.
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nearest-neighbor queries against a built AVD index.
    Query {
        #[arg(long)]
        index: PathBuf,
        /// A query cell, e.g. '{"level":-3,"coords":[2]}'.
        #[arg(long)]
        cell: Vec<String>,
        /// A query point, e.g. '{"x":[0.3],"z":0.1}'.
        #[arg(long)]
        point: Vec<String>,
        /// A point file of queries.
        #[arg(long)]
        queries: Option<PathBuf>,
    },
    /// Run the oracle suites on seeded sets and print a report.
    Verify {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, env = "HYPERTILE_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Draw a D=2 figure as SVG.
    Render {
        #[arg(long, value_enum)]
        figure: Figure,
        /// Discrete or continuous D=2 point file; defaults to a built-in example.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Size (and optionally time) scaling table.
    Bench {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
        sizes: Vec<usize>,
        #[arg(long, env = "HYPERTILE_SEED", default_value_t = 0)]
        seed: u64,
        /// Include wall-clock build times (not reproducible).
        #[arg(long)]
        timings: bool,
    },
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Parse(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| Error::Parse(e.to_string())),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

/// Cells of a point file; continuous points are normalized and embedded.
fn cells_of(file: &PointFile) -> Result<Vec<CellId>> {
    match file {
        PointFile::Discrete(_, c) => Ok(c.clone()),
        PointFile::Continuous(_, p) => {
            let (_, moved) = normalize(p)?;
            moved.iter().map(embed).collect()
        }
    }
}

fn gen(dim: usize, n: usize, kind: GenKind, min_level: i32, seed: u64) -> Result<PointFile> {
    if dim < 2 {
        return Err(Error::BadDimension(dim));
    }
    if n == 0 {
        return Err(Error::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match kind {
        GenKind::Uniform => PointFile::Continuous(dim, datasets::uniform_in_box(&mut rng, dim, n)),
        GenKind::Stratified => PointFile::Discrete(dim, datasets::level_stratified(&mut rng, dim, n, min_level.min(-1))),
        GenKind::Margin => PointFile::Discrete(dim, datasets::in_margin(&mut rng, dim, n, min_level.min(-2))),
    })
}

fn build(file: &PointFile, structure: Structure, k: usize) -> Result<serde_json::Value> {
    if file.is_empty() {
        return Err(Error::Empty);
    }
    Ok(match (structure, file) {
        (Structure::Quadtree, f) => QuadTree::build(f.dim(), &cells_of(f)?)?.to_json(),
        (Structure::Spanner, PointFile::Discrete(_, c)) => build_spanner(c)?.to_json(),
        (Structure::Spanner, PointFile::Continuous(_, p)) => build_hyperbolic_spanner(p, k)?.to_json(),
        (Structure::Avd, PointFile::Discrete(_, c)) => build_avd_cells(c)?.to_json(),
        (Structure::Avd, PointFile::Continuous(_, p)) => build_avd_points(p)?.to_json(),
    })
}

fn query_line(ix: &AvdIndex, q: serde_json::Value, nearest: usize) -> String {
    let rec = json!({"query": q, "nearest": nearest, "cell": ix.points()[nearest]});
    let mut s = serde_json::to_string(&rec).expect("json");
    s.push('\n');
    s
}

fn query(ix: &AvdIndex, cells: &[String], points: &[String], queries: Option<PointFile>) -> Result<String> {
    let mut out = String::new();
    let parse = |s: &str| serde_json::from_str::<serde_json::Value>(s).map_err(|e| Error::Parse(e.to_string()));
    let mut qcells: Vec<CellId> = Vec::new();
    let mut qpoints: Vec<HPoint> = Vec::new();
    for s in cells {
        qcells.push(serde_json::from_value(parse(s)?).map_err(|e| Error::Parse(e.to_string()))?);
    }
    for s in points {
        let p: HPoint = serde_json::from_value(parse(s)?).map_err(|e| Error::Parse(e.to_string()))?;
        qpoints.push(HPoint::new(p.x, p.z)?);
    }
    match queries {
        Some(PointFile::Discrete(_, c)) => qcells.extend(c),
        Some(PointFile::Continuous(_, p)) => qpoints.extend(p),
        None => {}
    }
    for c in &qcells {
        let i = ix.query(c)?;
        out.push_str(&query_line(ix, json!(c), i));
    }
    for p in &qpoints {
        if p.dim() != ix.tree().dim() {
            return Err(Error::DimensionMismatch {
                expected: ix.tree().dim(),
                got: p.dim(),
            });
        }
        let i = ix.query_hyperbolic(p)?;
        out.push_str(&query_line(ix, json!(p), i));
    }
    Ok(out)
}

fn bench(dim: usize, sizes: &[usize], seed: u64, timings: bool) -> Result<serde_json::Value> {
    let mut rows = Vec::new();
    for &n in sizes {
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
        let cells = datasets::in_margin(&mut rng, dim, n, verify::margin_depth(n));
        let t0 = Instant::now();
        let t = QuadTree::build(dim, &cells)?;
        let t1 = Instant::now();
        let g = build_spanner(&cells)?;
        let t2 = Instant::now();
        let ix = build_avd_cells(&cells)?;
        let t3 = Instant::now();
        let st = ix.stats();
        let mut row = json!({
            "n": n,
            "quadtree_nodes": t.len(),
            "spanner_vertices": g.vertex_count(),
            "spanner_steiner": g.steiner_count(),
            "spanner_edges": g.edge_count(),
            "avd_refined_nodes": st.refined_nodes,
            "avd_regions": st.regions,
            "avd_regions_per_point": st.regions as f64 / n as f64,
            "avd_max_representatives": st.max_representatives,
        });
        if timings {
            row["ms"] = json!({
                "quadtree": (t1 - t0).as_secs_f64() * 1e3,
                "spanner": (t2 - t1).as_secs_f64() * 1e3,
                "avd": (t3 - t2).as_secs_f64() * 1e3,
            });
        }
        rows.push(row);
    }
    Ok(json!({"dim": dim, "seed": seed, "rows": rows}))
}

/// Runs one command; returns the process exit code.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Gen {
            dim,
            n,
            kind,
            min_level,
            seed,
            out: path,
        } => emit(out, &path, &gen(dim, n, kind, min_level, seed)?.to_text())?,
        Command::Build {
            input,
            structure,
            k,
            out: path,
        } => {
            let file = PointFile::parse(&read(&input)?)?;
            emit(out, &path, &pretty(&build(&file, structure, k)?))?
        }
        Command::Query {
            index,
            cell,
            point,
            queries,
        } => {
            let v: serde_json::Value =
                serde_json::from_str(&read(&index)?).map_err(|e| Error::Parse(e.to_string()))?;
            let ix = AvdIndex::from_json(&v)?;
            let qf = match queries {
                Some(p) => Some(PointFile::parse(&read(&p)?)?),
                None => None,
            };
            emit(out, &None, &query(&ix, &cell, &point, qf)?)?
        }
        Command::Verify { dim, n, seed } => {
            let report = verify::run(dim, n, seed)?;
            let v = serde_json::to_value(&report).expect("report");
            emit(out, &None, &pretty(&v))?;
            return Ok(if report.pass { 0 } else { 1 });
        }
        Command::Render {
            figure,
            input,
            out: path,
        } => {
            let pts = match &input {
                Some(p) => Some(cells_of(&PointFile::parse(&read(p)?)?)?),
                None => None,
            };
            let (svg, stats) = render(figure, pts.as_deref())?;
            match path {
                Some(_) => {
                    emit(out, &path, &svg)?;
                    emit(out, &None, &pretty(&stats))?
                }
                None => emit(out, &None, &svg)?,
            }
        }
        Command::Bench {
            dim,
            sizes,
            seed,
            timings,
        } => emit(out, &None, &pretty(&bench(dim, &sizes, seed, timings)?))?,
    }
    Ok(0)
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::BadDimension(_) | Error::DimensionMismatch { .. } => "dimension",
        Error::NonPositiveHeight(_) | Error::NonFinite => "invalid_point",
        Error::Empty => "empty",
        Error::OutsideRoot(_) | Error::OutsideMargin | Error::OutsideWindow => "domain",
        Error::Parse(_) => "parse",
        _ => "invalid_input",
    }
}

/// Machine-readable error object.
pub fn error_json(e: &Error) -> String {
    json!({"error": {"kind": error_kind(e), "message": e.to_string()}}).to_string()
}

/// Parses `args` (program name first) and runs. Errors are written to `err`
/// as a JSON object and yield exit code 2.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = writeln!(err, "{}", error_json(&Error::Parse(e.to_string().trim().to_string())));
            return 2;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{}", error_json(&e));
            2
        }
    }
}
