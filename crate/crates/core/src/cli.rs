//! The `pathbench` command line.
//!
//! Exit codes: 0 success, 1 usage, configuration or I/O error, 2 when the
//! planner found no path.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use image::Rgb;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bench::{
    aggregate_runs, emit_table, load_scenario_file, records_to_csv, run_scenario, BenchError, TableFormat,
};
use crate::grid_model::{CellCoord, Cost3DParams, ElevationEncoding, ElevationField, WeightEncoding, WeightedGrid};
use crate::planner::{run_planner, PlannerKind, PlannerParams, PlannerSpec};
use crate::raster_io::{
    load_grayscale_raster, palette, render_overlay, save_grayscale_raster, save_rgb_png, OverlayLayer, RasterFormat,
    RasterGrid,
};
use crate::synth;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_PATH: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pathbench", version, about = "Plan, benchmark and render paths on weighted grid maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plan one route and write it as JSON.
    Plan(PlanArgs),
    /// Run benchmark scenarios and write per-run records and a summary table.
    Bench(BenchArgs),
    /// Draw path files over a map.
    Render(RenderArgs),
    /// Generate a synthetic map.
    Gen(GenArgs),
}

fn parse_cell(s: &str) -> std::result::Result<CellCoord, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected X,Y, got {s:?}"))?;
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("expected non-negative integers X,Y, got {s:?}"))
    };
    Ok(CellCoord::new(num(x)?, num(y)?))
}

#[derive(Debug, clap::Args)]
struct MapArgs {
    /// Weight raster (PGM or PNG).
    #[arg(long)]
    weights: PathBuf,
    /// Sample value marking impassable cells.
    #[arg(long, default_value_t = 0)]
    impassable_value: u16,
    /// Multiplier from sample value to weight.
    #[arg(long, default_value_t = 1.0)]
    weight_scale: f64,
}

#[derive(Debug, clap::Args)]
struct PlanArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Elevation raster, required by the 3D planners.
    #[arg(long)]
    elevation: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    meters_per_level: f64,
    /// Meters per pixel.
    #[arg(long, default_value_t = 1.0)]
    horizontal_resolution: f64,
    /// Apply a 3x3 median filter to the elevation.
    #[arg(long)]
    median_filter: bool,
    #[arg(long, value_name = "X,Y", value_parser = parse_cell)]
    start: CellCoord,
    #[arg(long, value_name = "X,Y", value_parser = parse_cell)]
    goal: CellCoord,
    #[arg(long, value_parser = clap::value_parser!(PlannerArg))]
    planner: PlannerArg,
    /// JSON planner parameters; a `cost3d` key sets the terrain metric.
    #[arg(long)]
    params: Option<PathBuf>,
    /// RNG seed; overrides any seed in the parameter file.
    #[arg(long)]
    seed: Option<u64>,
    /// Path JSON output.
    #[arg(long)]
    out: PathBuf,
    /// Optional overlay PNG of the path.
    #[arg(long)]
    image: Option<PathBuf>,
    /// Contrast-stretch the map in the overlay.
    #[arg(long)]
    stretch: bool,
}

#[derive(Debug, Clone, Copy)]
struct PlannerArg(PlannerKind);

impl ValueEnum for PlannerArg {
    fn value_variants<'a>() -> &'a [Self] {
        const ALL: [PlannerArg; 8] = [
            PlannerArg(PlannerKind::Dijkstra),
            PlannerArg(PlannerKind::Astar),
            PlannerArg(PlannerKind::Rrtstar),
            PlannerArg(PlannerKind::Niaco),
            PlannerArg(PlannerKind::Dijkstra3d),
            PlannerArg(PlannerKind::Astar3d),
            PlannerArg(PlannerKind::Rrtconnect),
            PlannerArg(PlannerKind::Niaco3d),
        ];
        &ALL
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.0.id()))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Text,
}

impl From<FormatArg> for TableFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => TableFormat::Csv,
            FormatArg::Json => TableFormat::Json,
            FormatArg::Text => TableFormat::Text,
        }
    }
}

#[derive(Debug, clap::Args)]
struct BenchArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Format of the aggregate table file.
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

#[derive(Debug, clap::Args)]
struct RenderArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Path JSON written by `plan`; repeat for several paths.
    #[arg(long = "path")]
    paths: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// JSON object mapping planner ids to [r, g, b].
    #[arg(long)]
    palette: Option<PathBuf>,
    #[arg(long)]
    stretch: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenKind {
    Uniform,
    RandomWeights,
    Ridge,
    SmoothedNoise,
}

#[derive(Debug, clap::Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Side length in pixels (at least 2).
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output raster; `.png` writes PNG, anything else ASCII PGM.
    #[arg(long)]
    out: PathBuf,
}

/// What `plan` writes and `render` reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFile {
    pub cells: Vec<CellCoord>,
    pub total_cost: Option<f64>,
    pub planner: String,
    pub seed: u64,
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Render(a) => cmd_render(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn load_weights(m: &MapArgs) -> Result<(RasterGrid, WeightedGrid)> {
    let raster = load_grayscale_raster(&m.weights).with_context(|| format!("--weights {}", m.weights.display()))?;
    let enc = WeightEncoding {
        impassable_value: m.impassable_value,
        scale: m.weight_scale,
    };
    let grid = WeightedGrid::from_raster(&raster, enc).with_context(|| format!("--weights {}", m.weights.display()))?;
    Ok((raster, grid))
}

fn write_file(path: &FsPath, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// Split a params file into planner parameters and the optional `cost3d` block.
fn read_params(kind: PlannerKind, path: Option<&FsPath>) -> Result<(PlannerParams, Cost3DParams)> {
    let Some(path) = path else {
        return Ok((PlannerParams::default_for(kind), Cost3DParams::default()));
    };
    let text = fs::read_to_string(path).with_context(|| format!("--params {}", path.display()))?;
    let mut value: Value = serde_json::from_str(&text).with_context(|| format!("--params {}", path.display()))?;
    let cost3d = match value.as_object_mut().and_then(|o| o.remove("cost3d")) {
        Some(c) => {
            let c: Cost3DParams = serde_json::from_value(c).context("--params: field `cost3d`")?;
            c.validate().context("--params: field `cost3d`")?;
            c
        }
        None => Cost3DParams::default(),
    };
    let params = PlannerParams::from_json(kind, &value).with_context(|| format!("--params for planner {kind}"))?;
    Ok((params, cost3d))
}

fn params_seed(p: &PlannerParams) -> u64 {
    match p {
        PlannerParams::Rrt(r) => r.seed,
        PlannerParams::Niaco(n) => n.seed,
        _ => 0,
    }
}

fn check_cell(flag: &str, c: CellCoord, grid: &WeightedGrid) -> Result<()> {
    if !grid.in_bounds(c) {
        bail!("{flag} {c} is outside the {}x{} map", grid.width(), grid.height());
    }
    if !grid.is_passable(c) {
        bail!("{flag} {c} is on an impassable cell");
    }
    Ok(())
}

fn overlay(base: &RasterGrid, stretch: bool, layers: &[OverlayLayer<'_>], out: &FsPath) -> Result<()> {
    let base = if stretch { base.contrast_stretched() } else { base.clone() };
    let img = render_overlay(&base, layers)?;
    save_rgb_png(&img, out)?;
    Ok(())
}

fn cmd_plan(a: PlanArgs) -> Result<i32> {
    let kind = a.planner.0;
    let (raster, grid) = load_weights(&a.map)?;
    check_cell("--start", a.start, &grid)?;
    check_cell("--goal", a.goal, &grid)?;
    let elevation = match &a.elevation {
        Some(p) => {
            let r = load_grayscale_raster(p).with_context(|| format!("--elevation {}", p.display()))?;
            let enc = ElevationEncoding {
                meters_per_level: a.meters_per_level,
                offset: 0.0,
                horizontal_resolution: a.horizontal_resolution,
                median_filter: a.median_filter,
            };
            Some(ElevationField::from_raster(&r, enc).with_context(|| format!("--elevation {}", p.display()))?)
        }
        None if kind.is_3d() => bail!("--planner {kind} needs --elevation"),
        None => None,
    };
    let (params, cost3d) = read_params(kind, a.params.as_deref())?;
    let seed = a.seed.unwrap_or_else(|| params_seed(&params));
    let spec = PlannerSpec { kind, params, cost3d };
    let outcome = run_planner(&spec, &grid, elevation.as_ref(), a.start, a.goal, seed)?;

    let file = PathFile {
        cells: outcome.path.as_ref().map(|p| p.cells.clone()).unwrap_or_default(),
        total_cost: outcome.cost(),
        planner: kind.id().to_string(),
        seed,
    };
    write_file(&a.out, serde_json::to_string_pretty(&file)? + "\n")?;
    if let Some(img) = &a.image {
        let color = palette::for_planner(kind.id()).expect("every planner has a color");
        overlay(&raster, a.stretch, &[OverlayLayer { cells: &file.cells, color }], img)?;
    }
    match file.total_cost {
        Some(c) => {
            println!("{}: cost {c} over {} cells", kind.id(), file.cells.len());
            Ok(EXIT_OK)
        }
        None => {
            eprintln!("{}: no path from {} to {}", kind.id(), a.start, a.goal);
            Ok(EXIT_NO_PATH)
        }
    }
}

fn cmd_bench(a: BenchArgs) -> Result<i32> {
    let scenarios = match load_scenario_file(&a.scenario) {
        Ok(s) => s,
        Err(e @ BenchError::Invalid(_)) => bail!("--scenario {}: {e}", a.scenario.display()),
        Err(e) => return Err(e.into()),
    };
    let mut records = Vec::new();
    for s in &scenarios {
        records.extend(run_scenario(s)?);
    }
    let stats = aggregate_runs(&records)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("cannot create {}", a.out_dir.display()))?;
    write_file(&a.out_dir.join("records.csv"), records_to_csv(&records)?)?;
    let format = TableFormat::from(a.format);
    write_file(
        &a.out_dir.join(format!("table.{}", format.extension())),
        emit_table(&stats, format)?,
    )?;
    print!("{}", emit_table(&stats, TableFormat::Text)?);
    let failures: usize = stats.groups.iter().map(|g| g.failures).sum();
    if failures > 0 {
        eprintln!("{failures} run(s) found no path");
    }
    Ok(EXIT_OK)
}

fn read_palette(path: &FsPath) -> Result<BTreeMap<String, Rgb<u8>>> {
    let text = fs::read_to_string(path).with_context(|| format!("--palette {}", path.display()))?;
    let raw: BTreeMap<String, [u8; 3]> =
        serde_json::from_str(&text).with_context(|| format!("--palette {}", path.display()))?;
    Ok(raw.into_iter().map(|(k, v)| (k, Rgb(v))).collect())
}

fn hex(c: Rgb<u8>) -> String {
    format!("#{:02X}{:02X}{:02X}", c.0[0], c.0[1], c.0[2])
}

fn legend_path(out: &FsPath) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.legend.txt"))
}

fn cmd_render(a: RenderArgs) -> Result<i32> {
    let (raster, _) = load_weights(&a.map)?;
    let custom = match &a.palette {
        Some(p) => read_palette(p)?,
        None => BTreeMap::new(),
    };
    let mut files = Vec::new();
    for p in &a.paths {
        let text = fs::read_to_string(p).with_context(|| format!("--path {}", p.display()))?;
        let f: PathFile = serde_json::from_str(&text).with_context(|| format!("--path {}", p.display()))?;
        let color = custom
            .get(&f.planner)
            .copied()
            .or_else(|| palette::for_planner(&f.planner))
            .ok_or_else(|| anyhow!("--path {}: no color for planner {:?}; add it to --palette", p.display(), f.planner))?;
        files.push((p, f, color));
    }
    let layers: Vec<OverlayLayer<'_>> = files
        .iter()
        .map(|(_, f, color)| OverlayLayer {
            cells: &f.cells,
            color: *color,
        })
        .collect();
    overlay(&raster, a.stretch, &layers, &a.out).with_context(|| format!("rendering {}", a.out.display()))?;

    let mut legend = String::new();
    for (p, f, color) in &files {
        legend.push_str(&format!("{} {} {}\n", hex(*color), f.planner, p.display()));
    }
    write_file(&legend_path(&a.out), legend)?;
    Ok(EXIT_OK)
}

fn cmd_gen(a: GenArgs) -> Result<i32> {
    if a.size < 2 {
        bail!("--size must be at least 2, got {}", a.size);
    }
    let raster = match a.kind {
        GenKind::Uniform => synth::uniform(a.size),
        GenKind::RandomWeights => synth::random_weights(a.size, a.seed),
        GenKind::Ridge => synth::ridge(a.size),
        GenKind::SmoothedNoise => synth::smoothed_noise(a.size, a.seed),
    };
    save_grayscale_raster(&raster, &a.out, RasterFormat::from_path(&a.out))?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_parse() {
        assert_eq!(parse_cell("3,4"), Ok(CellCoord::new(3, 4)));
        assert_eq!(parse_cell(" 3, 4"), Ok(CellCoord::new(3, 4)));
        assert!(parse_cell("3").is_err());
        assert!(parse_cell("-1,2").is_err());
    }

    #[test]
    fn legend_sits_beside_output() {
        assert_eq!(legend_path(FsPath::new("out/fig.png")), PathBuf::from("out/fig.legend.txt"));
        assert_eq!(hex(palette::DIJKSTRA), "#FFD700");
    }
}
