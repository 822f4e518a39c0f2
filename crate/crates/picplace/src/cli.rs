//! Command-line front end: benchmark generation, placement, legalization,
//! metrics, and the combined pipeline.

use crate::benchgen::{self, ButterflySpec, ClementsSpec, SizeClass};
use crate::density::DensityParams;
use crate::frames;
use crate::legalize::{self, LegalizeStatus};
use crate::metrics::{self, LossModel};
use crate::netlist::{self, Design, PlacementMeta};
use crate::optimizer::OptKind;
use crate::placer::{self, InitMode, RunConfig, RunOutput, RunStatus};
use crate::spacing::{SpacingParams, SpacingVariant};
use crate::wirelength::{WirelengthParams, WlModel};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "picplace", version, about = "Routing-informed placement for photonic ICs")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark netlist
    Bench(BenchArgs),
    /// Run global placement on a netlist
    Place(PlaceArgs),
    /// Remove overlaps from a placed netlist
    Legalize(LegalizeArgs),
    /// Evaluate quality metrics of a placed netlist
    Metrics(MetricsArgs),
    /// Place, legalize, and evaluate in one invocation
    RunAll(RunAllArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SizeArg {
    S,
    L,
}

#[derive(Args)]
struct BenchArgs {
    /// Clements mesh with N modes
    #[arg(long, value_name = "N", conflicts_with = "butterfly")]
    clements: Option<usize>,
    /// Butterfly interconnect with N ports
    #[arg(long, value_name = "N")]
    butterfly: Option<usize>,
    /// Die size class
    #[arg(long, value_enum, default_value = "s")]
    size: SizeArg,
    #[arg(long, default_value_t = 300.0)]
    mzi_w: f64,
    #[arg(long, default_value_t = 50.0)]
    mzi_h: f64,
    #[arg(long, default_value_t = 20.0)]
    coupler_w: f64,
    #[arg(long, default_value_t = 10.0)]
    coupler_h: f64,
    /// Override the class utilization target
    #[arg(long)]
    utilization: Option<f64>,
    /// Butterfly stage count (defaults to log2 N)
    #[arg(long)]
    stages: Option<usize>,
    /// Nonzero shuffles the butterfly inter-stage wiring
    #[arg(long, default_value_t = 0)]
    pattern_seed: u64,
    /// Output netlist path
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum WlArg {
    Coswa,
    Wa,
    Lse,
    Quad,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpacingArg {
    None,
    Pi,
    Rbend,
    Portcount,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptArg {
    Bnag,
    NagBb,
    Nag,
    Adam,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    CenterRandom,
    Manual,
}

/// Engine knobs shared by `place` and `run-all`.
#[derive(Args)]
struct EngineFlags {
    /// Wirelength model
    #[arg(long, value_enum, default_value = "coswa")]
    wl: WlArg,
    /// Span exponent
    #[arg(long, default_value_t = 1.4)]
    alpha: f64,
    /// Base smoothing length in um (default: a tenth of the bin size)
    #[arg(long)]
    gamma0: Option<f64>,
    /// Bend penalty margin c
    #[arg(long, default_value_t = 0.0)]
    angle_margin: f64,
    /// Evaluate the second pin angle against +w instead of -w
    #[arg(long)]
    theta2_raw: bool,
    /// Spacing model variant
    #[arg(long, value_enum, default_value = "full")]
    spacing: SpacingArg,
    /// Spacing penalty weight
    #[arg(long, default_value_t = 1.0)]
    lambda_ns: f64,
    /// Congestion refresh period in iterations
    #[arg(long, default_value_t = 100)]
    spacing_refresh: usize,
    /// Penalize clearance exceeding the demand instead of falling short
    #[arg(long)]
    spacing_literal: bool,
    /// Target bin density
    #[arg(long, default_value_t = 1.0)]
    target_density: f64,
    /// Bin count per side (power of two)
    #[arg(long)]
    grid: Option<usize>,
    /// Quadratic density coefficient
    #[arg(long, default_value_t = 2000.0)]
    rho: f64,
    /// Stop when overflow falls below this value
    #[arg(long, default_value_t = 0.07)]
    overflow_stop: f64,
    /// Pin the density weight to a fixed value
    #[arg(long)]
    lambda_density: Option<f64>,
    #[arg(long, value_enum, default_value = "bnag")]
    optimizer: OptArg,
    /// Iteration budget
    #[arg(long, default_value_t = 1500)]
    iters: usize,
    #[arg(long, default_value_t = 1.0)]
    eta0: f64,
    #[arg(long, default_value_t = 0.1)]
    eta_min: f64,
    /// Initial projection sharpness
    #[arg(long, default_value_t = 0.05)]
    s0: f64,
    /// Final projection sharpness
    #[arg(long = "sT", default_value_t = 1.0)]
    s_final: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Initialization mode
    #[arg(long, value_enum, default_value = "center-random")]
    init: InitArg,
}

impl EngineFlags {
    fn config(&self) -> RunConfig {
        RunConfig {
            seed: self.seed,
            iters: self.iters,
            init: match self.init {
                InitArg::CenterRandom => InitMode::CenterRandom,
                InitArg::Manual => InitMode::Manual,
            },
            wl: WirelengthParams {
                model: match self.wl {
                    WlArg::Coswa => WlModel::CosWa,
                    WlArg::Wa => WlModel::Wa,
                    WlArg::Lse => WlModel::Lse,
                    WlArg::Quad => WlModel::Quadratic,
                },
                gamma: 1.0,
                alpha: self.alpha,
                angle_margin: self.angle_margin,
                theta2_raw: self.theta2_raw,
            },
            gamma0: self.gamma0,
            spacing: SpacingParams {
                lambda: self.lambda_ns,
                refresh_period: self.spacing_refresh.max(1),
                refresh_start: self.spacing_refresh.max(1),
                variant: match self.spacing {
                    SpacingArg::None => SpacingVariant::None,
                    SpacingArg::Pi => SpacingVariant::PortInflation,
                    SpacingArg::Rbend => SpacingVariant::RbendOnly,
                    SpacingArg::Portcount => SpacingVariant::PortCountOnly,
                    SpacingArg::Full => SpacingVariant::Full,
                },
                literal_form: self.spacing_literal,
            },
            density: DensityParams {
                grid: self.grid,
                target_density: self.target_density,
                rho: self.rho,
                stop_overflow: self.overflow_stop,
            },
            s0: self.s0,
            s_final: self.s_final,
            optimizer: match self.optimizer {
                OptArg::Bnag => OptKind::Bnag,
                OptArg::NagBb => OptKind::NagBb,
                OptArg::Nag => OptKind::Nag,
                OptArg::Adam => OptKind::Adam,
            },
            eta0: self.eta0,
            eta_min: self.eta_min,
            lambda_density_override: self.lambda_density,
            snapshot_cadence: 10,
        }
    }
}

#[derive(Args)]
struct PlaceArgs {
    /// Input netlist
    input: PathBuf,
    /// Placed netlist output
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Metrics report (JSON) of the placed result
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Per-iteration trace (JSON lines)
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Directory for SVG animation frames
    #[arg(long)]
    frames: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineFlags,
}

#[derive(Args)]
struct LegalizeArgs {
    /// Placed netlist
    input: PathBuf,
    /// Legalized netlist output
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Violation report (JSON)
    #[arg(long)]
    violations: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    /// Placed netlist
    input: PathBuf,
    /// Report output (JSON); stdout when omitted
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    prop_loss: f64,
    #[arg(long, default_value_t = 0.01)]
    bend_loss: f64,
    #[arg(long, default_value_t = 0.2)]
    crossing_loss: f64,
}

#[derive(Args)]
struct RunAllArgs {
    /// Input netlist
    input: PathBuf,
    /// Output directory
    #[arg(short, long, default_value = ".")]
    outdir: PathBuf,
    /// Number of independent seeds (seed, seed+1, ...)
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Also write the trace and frames
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    frames: bool,
    #[command(flatten)]
    engine: EngineFlags,
}

enum CliError {
    Validation(String),
    Diverged(String),
    LegalizeFailed(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Diverged(_) => 2,
            CliError::LegalizeFailed(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Diverged(m) | CliError::LegalizeFailed(m) => m,
        }
    }
}

fn validation<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Validation(e.to_string())
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.cmd {
        Command::Bench(a) => cmd_bench(&a),
        Command::Place(a) => cmd_place(&a),
        Command::Legalize(a) => cmd_legalize(&a),
        Command::Metrics(a) => cmd_metrics(&a),
        Command::RunAll(a) => cmd_run_all(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn read_design(path: &Path) -> Result<Design, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read '{}': {e}", path.display())))?;
    netlist::parse_design(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(validation)?;
        }
    }
    std::fs::write(path, content)
        .map_err(|e| CliError::Validation(format!("cannot write '{}': {e}", path.display())))
}

fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    let class = match a.size {
        SizeArg::S => SizeClass::S,
        SizeArg::L => SizeClass::L,
    };
    let design = if let Some(n) = a.clements {
        let spec = ClementsSpec {
            n,
            mzi_w: a.mzi_w,
            mzi_h: a.mzi_h,
            column_pitch: None,
            class,
            utilization: a.utilization,
        };
        benchgen::gen_clements(&spec).map_err(validation)?
    } else if let Some(n) = a.butterfly {
        let spec = ButterflySpec {
            n,
            stages: a.stages,
            coupler_w: a.coupler_w,
            coupler_h: a.coupler_h,
            pattern_seed: a.pattern_seed,
            class,
            utilization: a.utilization,
        };
        benchgen::gen_butterfly(&spec).map_err(validation)?
    } else {
        return Err(CliError::Validation(
            "one of --clements or --butterfly is required".into(),
        ));
    };
    let text = netlist::write_design(&design).map_err(validation)?;
    write_file(&a.output, &text)?;
    eprintln!(
        "generated '{}': {} components, {} nets, {} constraint groups",
        design.name,
        design.components.len(),
        design.nets.len(),
        design.groups.len()
    );
    Ok(())
}

struct PlacedArtifacts {
    design_text: String,
    output: RunOutput,
}

fn place_design(design: &Design, cfg: &RunConfig) -> Result<PlacedArtifacts, CliError> {
    let out = placer::run_global(design, cfg).map_err(validation)?;
    let meta = PlacementMeta {
        iterations: out.state.iteration,
        final_overflow: out.final_overflow,
        seed: cfg.seed,
    };
    let text = netlist::write_placement(design, &out.state.movable, meta).map_err(validation)?;
    Ok(PlacedArtifacts { design_text: text, output: out })
}

fn write_trace(path: &Path, out: &RunOutput) -> Result<(), CliError> {
    let mut body = String::new();
    for rec in &out.trace.records {
        body.push_str(&serde_json::to_string(rec).map_err(validation)?);
        body.push('\n');
    }
    write_file(path, &body)
}

fn metrics_json(design: &Design, positions: &[crate::geom::Point], loss: &LossModel) -> Result<String, CliError> {
    let report = metrics::evaluate(design, positions, loss);
    serde_json::to_string_pretty(&report).map_err(validation)
}

fn cmd_place(a: &PlaceArgs) -> Result<(), CliError> {
    let design = read_design(&a.input)?;
    let cfg = a.engine.config();
    let started = Instant::now();
    let placed = place_design(&design, &cfg)?;
    let elapsed = started.elapsed().as_secs_f64();
    if let Some(path) = &a.output {
        write_file(path, &placed.design_text)?;
    }
    if let Some(path) = &a.trace {
        write_trace(path, &placed.output)?;
    }
    if let Some(dir) = &a.frames {
        frames::emit_frames(&design, &placed.output.trace.snapshots, &placed.output.fillers, dir)
            .map_err(validation)?;
    }
    if let Some(path) = &a.metrics {
        let positions = placer::full_positions(&design, &placed.output.state);
        write_file(path, &metrics_json(&design, &positions, &LossModel::default())?)?;
    }
    eprintln!(
        "placed '{}' in {:.2}s: {} iterations, overflow {:.4}, status {:?}",
        design.name, elapsed, placed.output.state.iteration, placed.output.final_overflow,
        placed.output.status
    );
    if placed.output.status == RunStatus::Diverged {
        return Err(CliError::Diverged(format!(
            "placement diverged at iteration {}; last good state written",
            placed.output.state.iteration
        )));
    }
    Ok(())
}

fn cmd_legalize(a: &LegalizeArgs) -> Result<(), CliError> {
    let design = read_design(&a.input)?;
    let positions = design.stored_positions().map_err(validation)?;
    let halos: Vec<f64> = design.components.iter().map(|c| c.halo).collect();
    let result = legalize::legalize(&design, &positions, &halos);
    let violations = legalize::verify_legal(&design, &result.positions, &halos);
    let movable: Vec<_> = design
        .movable_indices()
        .iter()
        .map(|&i| result.positions[i])
        .collect();
    let meta = design.placement_meta.unwrap_or(PlacementMeta {
        iterations: 0,
        final_overflow: 0.0,
        seed: 0,
    });
    let text = netlist::write_placement(&design, &movable, meta).map_err(validation)?;
    if let Some(path) = &a.output {
        write_file(path, &text)?;
    }
    if let Some(path) = &a.violations {
        write_file(path, &serde_json::to_string_pretty(&violations).map_err(validation)?)?;
    }
    eprintln!(
        "legalized '{}': total displacement {:.3} um, max {:.3} um, {} violations",
        design.name,
        result.total_displacement,
        result.max_displacement,
        violations.len()
    );
    if result.status == LegalizeStatus::Failure {
        return Err(CliError::LegalizeFailed(format!(
            "legalization failed with {} residual violations",
            violations.len()
        )));
    }
    Ok(())
}

fn cmd_metrics(a: &MetricsArgs) -> Result<(), CliError> {
    let design = read_design(&a.input)?;
    let positions = design.stored_positions().map_err(validation)?;
    let loss = LossModel {
        prop_db_per_cm: a.prop_loss,
        bend_db: a.bend_loss,
        crossing_db: a.crossing_loss,
    };
    let started = Instant::now();
    let json = metrics_json(&design, &positions, &loss)?;
    eprintln!("evaluated '{}' in {:.3}s", design.name, started.elapsed().as_secs_f64());
    match &a.output {
        Some(path) => write_file(path, &json)?,
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_run_all(a: &RunAllArgs) -> Result<(), CliError> {
    let design = read_design(&a.input)?;
    for k in 0..a.seeds.max(1) {
        let mut cfg = a.engine.config();
        cfg.seed = a.engine.seed + k;
        let suffix = if a.seeds > 1 { format!("_s{}", cfg.seed) } else { String::new() };
        let started = Instant::now();
        let placed = place_design(&design, &cfg)?;
        write_file(&a.outdir.join(format!("placed{suffix}.yaml")), &placed.design_text)?;
        if a.trace {
            write_trace(&a.outdir.join(format!("trace{suffix}.jsonl")), &placed.output)?;
        }
        if a.frames {
            frames::emit_frames(
                &design,
                &placed.output.trace.snapshots,
                &placed.output.fillers,
                &a.outdir.join(format!("frames{suffix}")),
            )
            .map_err(validation)?;
        }
        if placed.output.status == RunStatus::Diverged {
            return Err(CliError::Diverged(format!(
                "placement diverged (seed {})",
                cfg.seed
            )));
        }

        let positions = placer::full_positions(&design, &placed.output.state);
        let halos: Vec<f64> = design.components.iter().map(|c| c.halo).collect();
        let result = legalize::legalize(&design, &positions, &halos);
        let movable: Vec<_> = design
            .movable_indices()
            .iter()
            .map(|&i| result.positions[i])
            .collect();
        let meta = PlacementMeta {
            iterations: placed.output.state.iteration,
            final_overflow: placed.output.final_overflow,
            seed: cfg.seed,
        };
        let legal_text = netlist::write_placement(&design, &movable, meta).map_err(validation)?;
        write_file(&a.outdir.join(format!("legalized{suffix}.yaml")), &legal_text)?;

        let json = metrics_json(&design, &result.positions, &LossModel::default())?;
        write_file(&a.outdir.join(format!("metrics{suffix}.json")), &json)?;
        eprintln!(
            "seed {}: status {:?}, displacement {:.3} um, {:.2}s",
            cfg.seed,
            placed.output.status,
            result.total_displacement,
            started.elapsed().as_secs_f64()
        );
        if result.status == LegalizeStatus::Failure {
            return Err(CliError::LegalizeFailed(format!(
                "legalization failed (seed {})",
                cfg.seed
            )));
        }
    }
    Ok(())
}
