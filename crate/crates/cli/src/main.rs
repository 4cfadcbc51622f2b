//! Command-line entry point: generation, verification and reporting for the
//! point-set constructions in the `danzer` crate.
//!
//! Every run is fully determined by its flags: the only randomness is the
//! seeded segment sampler, outputs carry no timestamps, and the parallelism
//! degree does not change any result. Exit codes: 0 when all requested
//! checks pass, 1 when a check fails or an internal error occurs, 2 on
//! usage errors, 3 when a point budget is exceeded.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use danzer::forest::ForestSpec;
use danzer::geometry::AxisBox;
use danzer::io::{write_points_csv, write_sequence_csv};
use danzer::optical::{epsilon_net, NetSpec, OpticalForest};
use danzer::peres::{DigitalSequence, GoldenSequence, PeresForest};
use danzer::sud;
use danzer::verify::{
    curve_baseline, empty_box_search, largest_empty_rectangle, visibility_curve,
    visibility_probe, CurveConfig, PointSource, SegmentSampler,
};
use danzer::DEFAULT_POINT_BUDGET;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "danzer",
    version,
    about = "Deterministic dense forests, optical nets and dispersion verifiers"
)]
struct Cli {
    /// Rayon thread count (results are independent of it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Construction {
    /// Odd-ceiling dense forest with log-log visibility.
    Corollary,
    /// Optical forest with T^d log T growth.
    Optical,
    /// Rescaled epsilon-net patch of the optical forest.
    Net,
    /// Peres-type forest over the golden-ratio sequence.
    PeresGolden,
    /// Peres-type forest over the exact digital sequence.
    PeresSud,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    construction: Construction,
    /// Ambient dimension.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Schedule exponent for the corollary forest.
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Scale index for nets.
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// Window bounds, 2d values: x0 x1 y0 y1 ...
    #[arg(long, num_args = 2.., allow_negative_numbers = true)]
    window: Vec<f64>,
    /// Point budget per enumeration call.
    #[arg(long, default_value_t = DEFAULT_POINT_BUDGET)]
    budget: u64,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a point CSV for a construction.
    Gen(GenArgs),
    /// Probe segment visibility, or measure a visibility curve.
    Visibility {
        #[arg(long, value_enum)]
        construction: Construction,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        /// Accuracy for a single probe.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Segment length for a single probe (defaults to the forest's own
        /// schedule when omitted).
        #[arg(long)]
        length: Option<f64>,
        /// Measure a curve over epsilons 2^-1 .. 2^-k.
        #[arg(long)]
        curve: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        segments: u32,
        /// Ladder cap exponent: curve rungs stop at length 2^cap.
        #[arg(long, default_value_t = 22)]
        ladder_cap: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the epsilon-net hitting property: exact in the plane,
    /// heuristic in higher dimension.
    Netcheck {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Seed grid resolution for the heuristic search (d >= 3).
        #[arg(long, default_value_t = 12)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_POINT_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dispersion measurements and the block certification.
    Dispersion {
        /// Certify one block exhaustively.
        #[arg(long)]
        block_verify: bool,
        /// Block index for --block-verify.
        #[arg(long, default_value_t = 2)]
        i: u32,
        /// Plain dispersion of the first N digital-sequence terms.
        #[arg(long)]
        exact: Option<u64>,
        /// Tilted dispersion of the first N terms; reads --m and --xi.
        #[arg(long)]
        perturbed: Option<u64>,
        #[arg(long, default_value_t = 0)]
        m: u64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        xi: f64,
        /// Lower bound for the super-uniform dispersion of the first N
        /// terms over m in [0, m_max] and a dyadic tilt grid.
        #[arg(long)]
        delta_lb: Option<u64>,
        #[arg(long, default_value_t = 16)]
        m_max: u64,
        #[arg(long, default_value_t = 8)]
        xi_grid_log2: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Growth-rate fit of a construction along a radius ladder.
    Density {
        #[arg(long, value_enum)]
        construction: Construction,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[arg(long, num_args = 1.., default_values_t = vec![4.0, 8.0, 16.0, 32.0, 64.0])]
        t_ladder: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_POINT_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the digital sequence as CSV rows.
    Seq {
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    match run(cli.command) {
        Ok(all_passed) => {
            if !all_passed {
                std::process::exit(1);
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<danzer::Error>()
                .map(|e| e.exit_code())
                .unwrap_or(1);
            std::process::exit(code);
        }
    }
}

/// Output sink: a file or stdout.
fn sink(out: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(std::io::stdout()),
    })
}

fn parse_window(dim: usize, bounds: &[f64]) -> anyhow::Result<AxisBox> {
    if bounds.len() != 2 * dim {
        bail!("--window needs {} values for dimension {dim}", 2 * dim);
    }
    let lo: Vec<f64> = (0..dim).map(|a| bounds[2 * a]).collect();
    let hi: Vec<f64> = (0..dim).map(|a| bounds[2 * a + 1]).collect();
    Ok(AxisBox::new(lo, hi)?)
}

fn run(cmd: Command) -> anyhow::Result<bool> {
    match cmd {
        Command::Gen(args) => gen_cmd(args),
        Command::Visibility {
            construction,
            eta,
            epsilon,
            length,
            curve,
            seed,
            segments,
            ladder_cap,
            out,
        } => visibility_cmd(VisibilityArgs {
            construction,
            eta,
            epsilon,
            length,
            curve,
            seed,
            segments,
            ladder_cap,
            out,
        }),
        Command::Netcheck {
            dim,
            n,
            grid,
            budget,
            out,
        } => netcheck_cmd(dim, n, grid, budget, out),
        Command::Dispersion {
            block_verify,
            i,
            exact,
            perturbed,
            m,
            xi,
            delta_lb,
            m_max,
            xi_grid_log2,
            out,
        } => {
            let mut w = sink(&out)?;
            if block_verify {
                let cert = sud::certify_block(i)?;
                writeln!(w, "{}", serde_json::to_string_pretty(&cert)?)?;
                return Ok(cert.pass);
            }
            if let Some(n) = exact {
                let values: Vec<danzer::geometry::TorusPoint> = (1..=n)
                    .map(|k| Ok(danzer::geometry::TorusPoint::new(sud::term(k)?.value_f64())))
                    .collect::<danzer::error::Result<_>>()?;
                let d = sud::dispersion(&values)?;
                let doc = serde_json::json!({ "n": n, "dispersion": d });
                writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
                return Ok(true);
            }
            if let Some(n) = perturbed {
                let q = sud::DispersionQuery { n, m, xi };
                let d = sud::perturbed_dispersion(
                    |k| sud::term(k).map(|v| v.value_f64()).unwrap_or(0.0),
                    &q,
                )?;
                let doc =
                    serde_json::json!({ "n": n, "m": m, "xi": xi, "perturbed_dispersion": d });
                writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
                return Ok(true);
            }
            if let Some(n) = delta_lb {
                let lb = sud::delta_lower_bound(
                    |k| sud::term(k).map(|v| v.value_f64()).unwrap_or(0.0),
                    n,
                    m_max,
                    xi_grid_log2,
                )?;
                let doc = serde_json::json!({
                    "n": n,
                    "m_max": m_max,
                    "xi_grid_log2": xi_grid_log2,
                    "delta_lower_bound": lb.value,
                    "best_m": lb.best_m,
                    "best_xi": lb.best_xi,
                });
                writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
                return Ok(true);
            }
            bail!("dispersion requires one of --block-verify, --exact, --perturbed, --delta-lb");
        }
        Command::Density {
            construction,
            dim,
            eta,
            t_ladder,
            budget,
            out,
        } => density_cmd(construction, dim, eta, &t_ladder, budget, out),
        Command::Seq { count, out } => {
            let mut w = sink(&out)?;
            let rows = (1..=count)
                .map(|n| Ok((n, sud::term(n)?)))
                .collect::<danzer::error::Result<Vec<_>>>()?;
            write_sequence_csv(&mut w, rows)?;
            Ok(true)
        }
    }
}

fn gen_cmd(args: GenArgs) -> anyhow::Result<bool> {
    let window = if args.window.is_empty() {
        AxisBox::centered_cube(args.dim, 8.0)?
    } else {
        parse_window(args.dim, &args.window)?
    };
    let mut w = sink(&args.out)?;
    let points = match args.construction {
        Construction::Corollary => {
            ForestSpec::loglog(args.dim, args.eta)?.enumerate_points(&window, args.budget)?
        }
        Construction::Optical => {
            OpticalForest::new(args.dim)?.enumerate_points(&window, args.budget)?
        }
        Construction::Net => {
            let spec = NetSpec::new(args.dim, args.n)?;
            epsilon_net(&spec, args.budget)?.0
        }
        Construction::PeresGolden => {
            require_planar(args.dim)?;
            PeresForest::new(GoldenSequence).enumerate_points(&window, args.budget)?
        }
        Construction::PeresSud => {
            require_planar(args.dim)?;
            PeresForest::new(DigitalSequence).enumerate_points(&window, args.budget)?
        }
    };
    write_points_csv(&mut w, args.dim, points)?;
    Ok(true)
}

fn netcheck_cmd(
    dim: usize,
    n: u32,
    grid: usize,
    budget: u64,
    out: Option<PathBuf>,
) -> anyhow::Result<bool> {
    let spec = NetSpec::new(dim, n)?;
    let (points, report) = epsilon_net(&spec, budget)?;
    let cube = AxisBox::new(vec![-0.5; dim], vec![0.5; dim])?;
    let mut w = sink(&out)?;
    if dim == 2 {
        let empty = largest_empty_rectangle(&points, &cube)?;
        let pass = empty.area < spec.epsilon;
        let doc = serde_json::json!({
            "d": dim,
            "n": n,
            "epsilon": spec.epsilon,
            "tau": spec.tau,
            "cardinality": report.cardinality,
            "bound_ratio": report.bound_ratio,
            "max_empty_area": empty.area,
            "exact": true,
            "pass": pass,
        });
        writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
        Ok(pass)
    } else {
        let found = empty_box_search(&points, &cube, grid)?;
        let pass = found.volume < spec.epsilon;
        let doc = serde_json::json!({
            "d": dim,
            "n": n,
            "epsilon": spec.epsilon,
            "tau": spec.tau,
            "cardinality": report.cardinality,
            "bound_ratio": report.bound_ratio,
            "best_empty_volume_found": found.volume,
            "grid_resolution": found.grid_resolution,
            "exact": false,
            "pass": pass,
        });
        writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
        Ok(pass)
    }
}

fn density_cmd(
    construction: Construction,
    dim: usize,
    eta: f64,
    t_ladder: &[f64],
    budget: u64,
    out: Option<PathBuf>,
) -> anyhow::Result<bool> {
    let mut w = sink(&out)?;
    match construction {
        Construction::Corollary => {
            let spec = ForestSpec::loglog(dim, eta)?;
            let report =
                danzer::verify::growth_fit(|t| spec.count_in_ball(t, budget), t_ladder, dim)?;
            let bounds: Vec<f64> = t_ladder
                .iter()
                .map(|&t| spec.series_density_bound(spec.schedule_index_for_radius(t)))
                .collect();
            let pass = report
                .entries
                .iter()
                .zip(&bounds)
                .all(|(e, b)| e.power_ratio <= *b);
            let doc = serde_json::json!({
                "construction": "corollary",
                "entries": report.entries,
                "series_density_bounds": bounds,
                "power_band": report.power_band,
                "pass": pass,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
            Ok(pass)
        }
        Construction::Optical => {
            let forest = OpticalForest::new(dim)?;
            let report =
                danzer::verify::growth_fit(|t| forest.count_in_ball(t, budget), t_ladder, dim)?;
            let doc = serde_json::json!({
                "construction": "optical",
                "entries": report.entries,
                "power_band": report.power_band,
                "power_log_band": report.power_log_band,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
            Ok(true)
        }
        _ => bail!("density supports --construction corollary|optical"),
    }
}

struct VisibilityArgs {
    construction: Construction,
    eta: f64,
    epsilon: Option<f64>,
    length: Option<f64>,
    curve: Option<u32>,
    seed: u64,
    segments: u32,
    ladder_cap: u32,
    out: Option<PathBuf>,
}

fn visibility_cmd(args: VisibilityArgs) -> anyhow::Result<bool> {
    let mut w = sink(&args.out)?;
    let (source, spacings, label): (Box<dyn PointSource>, Vec<f64>, &str) = match args.construction
    {
        Construction::Corollary => {
            let spec = ForestSpec::loglog(2, args.eta)?;
            let spacings: Vec<f64> = spec
                .schedule()
                .iter()
                .take(8)
                .map(|s| s.window_len)
                .collect();
            (Box::new(spec), spacings, "corollary")
        }
        Construction::Optical => (
            Box::new(OpticalForest::new(2)?),
            vec![2.0, 4.0, 8.0],
            "optical",
        ),
        Construction::PeresGolden => (
            Box::new(PeresForest::new(GoldenSequence)),
            vec![1.0],
            "peres-golden",
        ),
        Construction::PeresSud => (
            Box::new(PeresForest::new(DigitalSequence)),
            vec![1.0],
            "peres-sud",
        ),
        Construction::Net => bail!("nets are finite patches; use netcheck instead"),
    };
    if let Some(k_max) = args.curve {
        let epsilons: Vec<f64> = (1..=k_max).map(|k| (-(k as f64)).exp2()).collect();
        let ladder = CurveConfig::geometric_ladder(
            1.0,
            std::f64::consts::SQRT_2,
            (2 * args.ladder_cap + 1) as usize,
        );
        let config = CurveConfig {
            seed: args.seed,
            count: args.segments,
            ladder,
            region_factor: 2.0,
            adversarial_spacings: spacings,
        };
        let curve = visibility_curve(source.as_ref(), &config, &epsilons)?;
        let baseline = curve_baseline(&curve, 2);
        writeln!(w, "# construction={label}")?;
        writeln!(w, "epsilon,length")?;
        for p in &curve {
            match p.min_passing_length {
                Some(len) => writeln!(w, "{},{}", p.epsilon, len)?,
                None => writeln!(w, "{},unbounded", p.epsilon)?,
            }
        }
        writeln!(
            w,
            "# baseline_floor={} complete={}",
            baseline.floor, baseline.complete
        )?;
        return Ok(baseline.complete && baseline.floor > 0.0);
    }
    let eps = args
        .epsilon
        .context("--epsilon required unless --curve is used")?;
    let len = match args.length {
        Some(l) => l,
        None => match args.construction {
            Construction::Corollary => {
                let spec = ForestSpec::loglog(2, args.eta)?;
                2.0 * (2.0f64).sqrt() * spec.visibility_at(eps)?.window_len
            }
            _ => bail!("--length required for this construction"),
        },
    };
    let region = AxisBox::centered_cube(2, 2.0 * len.max(1.0))?;
    let sampler = SegmentSampler::new(args.seed, args.segments, len, region)
        .with_adversarial_spacings(&spacings);
    let report = visibility_probe(source.as_ref(), &sampler, eps)?;
    writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?;
    Ok(report.pass)
}

fn require_planar(dim: usize) -> anyhow::Result<()> {
    if dim != 2 {
        bail!("this construction is planar (got --dim {dim})");
    }
    Ok(())
}
