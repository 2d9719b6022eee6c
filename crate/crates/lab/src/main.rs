use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use patsvd_core::io::{load_grid_function, load_trace, read_trace_csv, save_grid_function, save_modes, save_trace, write_trace_csv};
use patsvd_core::modal::{gram_matrix, select_modes, AngularGrid, ModeSelection};
use patsvd_core::radial::{BoundaryCondition, Dimension, RadialGrid};
use patsvd_lab::config::{Horizon, Method, RunConfig};
use patsvd_lab::image::export_image;
use patsvd_lab::pipeline::{forward_data, real_trace, recover, run_pipeline, IMAGE_SIZE};
use patsvd_lab::{make_profile, run_suite, SUITES};

#[derive(Parser)]
#[command(name = "patsvd", version, about = "Modal inversion of boundary wave data in the unit ball")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModeArgs {
    /// Sound speed: const:V, c1, c1:S, c2, c2:A:B
    #[arg(long, default_value = "c1")]
    profile: String,
    /// neumann or dirichlet
    #[arg(long, default_value = "neumann")]
    bc: BoundaryCondition,
    /// 2 or 3
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(2..=3))]
    dim: u32,
    /// N (lowest N), mu:X (frequency ball) or rect:L:K
    #[arg(long, default_value = "100", value_parser = parse_selection)]
    modes: ModeSelection,
    #[arg(long, default_value_t = 512)]
    radial_cells: usize,
}

impl ModeArgs {
    fn dimension(&self) -> Dimension {
        if self.dim == 3 {
            Dimension::Three
        } else {
            Dimension::Two
        }
    }
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON run configuration
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// desk-scale or paper-scale
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    method: Option<Method>,
    /// Number or "auto"
    #[arg(long)]
    horizon: Option<Horizon>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => RunConfig::preset(name)?,
            (None, None) => RunConfig::desk_scale(),
        };
        if let Some(m) = self.method {
            cfg.method = m;
        }
        if let Some(h) = self.horizon {
            cfg.time.horizon = h;
        }
        if let Some(out) = &self.out {
            cfg.output = out.clone();
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve for radial modes and write them to a mode file
    Modes {
        #[command(flatten)]
        modes: ModeArgs,
        #[arg(long, default_value = "modes.bin")]
        out: PathBuf,
    },
    /// Report the deviation of the discrete Gram matrix from the identity
    Gram {
        #[command(flatten)]
        modes: ModeArgs,
    },
    /// Simulate boundary data for a configuration's phantom
    Forward {
        #[command(flatten)]
        config: ConfigArgs,
        /// Also write the trace as CSV
        #[arg(long)]
        csv: bool,
    },
    /// Reconstruct from a trace file using a configuration's modes and grids
    Reconstruct {
        #[command(flatten)]
        config: ConfigArgs,
        /// Binary trace or CSV (theta_index,time_index,value)
        #[arg(long)]
        trace: PathBuf,
    },
    /// Run modes, data, recovery and export end to end
    Pipeline {
        #[command(flatten)]
        config: ConfigArgs,
        /// Validate and plan only
        #[arg(long)]
        dry_run: bool,
    },
    /// Run a validation suite (exits nonzero on failure)
    Validate {
        suite: String,
    },
    /// Export a 2D grid file as a 16-bit PGM image
    Export {
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = IMAGE_SIZE)]
        size: usize,
    },
}

fn parse_selection(s: &str) -> Result<ModeSelection, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.parse::<u32>().map_err(|_| format!("bad integer '{t}' in '{s}'"));
    match parts.as_slice() {
        [n] => Ok(ModeSelection::Count(num(n)? as usize)),
        ["mu", x] => x
            .parse()
            .map(ModeSelection::FrequencyBall)
            .map_err(|_| format!("bad frequency '{x}'")),
        ["rect", l, k] => Ok(ModeSelection::Rectangle {
            l_max: num(l)?,
            k_max: num(k)?,
        }),
        _ => Err(format!("mode selection must be N, mu:X or rect:L:K, got '{s}'")),
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("PATSVD_THREADS") {
        let n: usize = v.parse().with_context(|| format!("PATSVD_THREADS must be an integer, got '{v}'"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn solve(args: &ModeArgs) -> anyhow::Result<Vec<patsvd_core::modal::Mode>> {
    let profile = make_profile(&args.profile)?;
    let grid = RadialGrid::new(args.radial_cells)?;
    Ok(select_modes(&profile, args.modes, &grid, args.bc, args.dimension())?)
}

fn load_any_trace(path: &Path, dt: f64) -> anyhow::Result<patsvd_core::wave::BoundaryTrace> {
    if path.extension().is_some_and(|e| e == "csv") {
        let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        Ok(read_trace_csv(std::io::BufReader::new(file), dt)?)
    } else {
        Ok(load_trace(path)?)
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    configure_threads()?;
    match cli.command {
        Command::Modes { modes, out } => {
            let family = solve(&modes)?;
            let mut radial: Vec<_> = Vec::new();
            for m in &family {
                if !radial.iter().any(|r: &patsvd_core::radial::RadialMode| r.l == m.radial.l && r.k == m.radial.k) {
                    radial.push((*m.radial).clone());
                }
            }
            save_modes(&out, &radial)?;
            println!("{:>6} {:>4} {:>14}", "l", "k", "mu");
            for r in &radial {
                println!("{:>6} {:>4} {:>14.8}", r.l, r.k, r.mu);
            }
            println!("{} radial modes ({} with angular factors) written to {}", radial.len(), family.len(), out.display());
        }
        Command::Gram { modes } => {
            let family = solve(&modes)?;
            let profile = make_profile(&modes.profile)?;
            let l_max = family.iter().map(|m| m.index.radial_l()).max().unwrap_or(0);
            let g = gram_matrix(&family, &profile, &AngularGrid::for_degree(modes.dimension(), l_max))?;
            println!("modes: {}", family.len());
            println!("max |G - I|: {:.3e}", g.max_deviation_from_identity());
        }
        Command::Forward { config, csv } => {
            let cfg = config.load()?;
            let plan = cfg.plan()?;
            let (_, trace, drift, _) = forward_data(&plan)?;
            std::fs::create_dir_all(&cfg.output)?;
            let Some(real) = real_trace(&trace).filter(|_| cfg.dimension == Dimension::Two) else {
                bail!("only real 2D traces can be written");
            };
            let path = cfg.output.join("trace.bin");
            save_trace(&path, &real)?;
            if csv {
                let mut f = std::io::BufWriter::new(std::fs::File::create(cfg.output.join("trace.csv"))?);
                write_trace_csv(&mut f, &real)?;
            }
            println!(
                "trace: {} angles x {} samples, dt {}, written to {}",
                real.angular.len(),
                real.time.n_samples(),
                real.time.dt,
                path.display()
            );
            if let Some(d) = drift {
                println!("fdtd energy drift: {d:.3e}");
            }
        }
        Command::Reconstruct { config, trace } => {
            let cfg = config.load()?;
            let plan = cfg.plan()?;
            let data = load_any_trace(&trace, plan.time.dt)?;
            let (g, report) = recover(&plan, &data)?;
            std::fs::create_dir_all(&cfg.output)?;
            save_grid_function(cfg.output.join("reconstruction.grid"), &g)?;
            std::fs::write(cfg.output.join("report.json"), serde_json::to_string_pretty(&report)?)?;
            if g.dimension() == Dimension::Two {
                export_image(&g, cfg.output.join("reconstruction.pgm"), IMAGE_SIZE)?;
            }
            println!("modes: {}, residual: {:.3e}", report.mode_count, report.residual);
            println!("cross-talk bound: {:.3e}", report.crosstalk_bound);
        }
        Command::Pipeline { config, dry_run } => {
            let cfg = config.load()?;
            if dry_run {
                let plan = cfg.plan()?;
                println!("modes: {}", plan.modes.len());
                println!("horizon: {}, dt: {}, steps: {}", plan.time.horizon(), plan.time.dt, plan.time.n_steps);
                println!(
                    "cross-talk bound: {:.3e}",
                    patsvd_core::inversion::crosstalk_bound(&plan.triples, plan.time.horizon())
                );
                return Ok(ExitCode::SUCCESS);
            }
            let manifest = run_pipeline(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&manifest.metrics)?);
            println!("artifacts in {}", cfg.output.display());
        }
        Command::Validate { suite } => {
            if !SUITES.contains(&suite.as_str()) {
                bail!("unknown suite '{suite}' (one of {})", SUITES.join(", "));
            }
            let report = run_suite(&suite)?;
            println!("{report}");
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Export { grid, out, size } => {
            let g = load_grid_function(&grid)?;
            export_image(&g, &out, size)?;
            println!("{} written", out.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
