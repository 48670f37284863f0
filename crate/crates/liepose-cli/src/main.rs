//! Command-line entry point. Exit codes: 0 success, 1 I/O or internal
//! failure, 2 malformed configuration, 3 violated observability or gain
//! precondition.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use liepose::filters::Gains;
use liepose::sim::check_assumption1;
use liepose_cli::config::{self, ChartSel, FilterSel, Overrides};
use liepose_cli::error::HarnessError;
use liepose_cli::stats::SeedStats;
use liepose_cli::{plot, runner, stats, trace};

#[derive(Parser)]
#[command(
    name = "liepose",
    version,
    about = "Pose estimation batch harness: runs stochastic SE(3) filters over simulated scenarios"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario batch and write traces, a report, and a summary
    Run(ScenarioArgs),
    /// Recompute statistics from previously written trace CSVs
    Stats(TraceDirArgs),
    /// Render SVG error plots from previously written trace CSVs
    Plot(TraceDirArgs),
    /// Diagnose a scenario's observability and gain preconditions
    Check {
        /// Scenario file to diagnose
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file
    #[arg(long)]
    scenario: PathBuf,
    /// Run only this filter
    #[arg(long, value_enum)]
    filter: Option<FilterSel>,
    /// Run only this attitude chart
    #[arg(long, value_enum)]
    chart: Option<ChartSel>,
    /// Comma-separated seed list with ranges, e.g. `1,2,10-14`
    #[arg(long)]
    seeds: Option<String>,
    /// Output directory (overrides the scenario's `run.out`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integration step override, s
    #[arg(long)]
    dt_override: Option<f64>,
}

#[derive(Args)]
struct TraceDirArgs {
    /// Scenario file the traces were produced from
    #[arg(long)]
    scenario: PathBuf,
    /// Directory holding the trace CSVs (default: the scenario's `run.out`)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Stats(args) => cmd_stats(args),
        Cmd::Plot(args) => cmd_plot(args),
        Cmd::Check { scenario } => cmd_check(scenario),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn overrides(args: &ScenarioArgs) -> Result<Overrides, HarnessError> {
    let seeds = match &args.seeds {
        Some(text) => Some(
            config::parse_seed_list(text).map_err(|msg| HarnessError::Invalid {
                path: args.scenario.clone(),
                field: "seeds".to_string(),
                msg,
            })?,
        ),
        None => None,
    };
    Ok(Overrides {
        filter: args.filter,
        chart: args.chart,
        seeds,
        out: args.out.clone(),
        dt: args.dt_override,
    })
}

fn cmd_run(args: &ScenarioArgs) -> Result<(), HarnessError> {
    let ov = overrides(args)?;
    let cfg = config::load(&args.scenario, &ov)?;
    let results = runner::run_scenario(&cfg, Some(&cfg.out))?;
    let per_seed: Vec<SeedStats> = results.into_iter().map(|r| r.stats).collect();
    write_and_print_report(&cfg, &per_seed)
}

fn cmd_stats(args: &TraceDirArgs) -> Result<(), HarnessError> {
    let (cfg, dir) = trace_dir(args)?;
    let traces = trace::read_trace_dir(&dir)?;
    let per_seed = traces
        .iter()
        .map(|t| stats::seed_stats_from_csv(t, cfg.window))
        .collect::<Result<Vec<_>, _>>()?;
    write_and_print_report(&cfg, &per_seed)
}

fn cmd_plot(args: &TraceDirArgs) -> Result<(), HarnessError> {
    let (cfg, dir) = trace_dir(args)?;
    let traces = trace::read_trace_dir(&dir)?;
    let written = plot::write_plots(&dir, &traces, cfg.window)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn trace_dir(args: &TraceDirArgs) -> Result<(config::Resolved, PathBuf), HarnessError> {
    let ov = Overrides {
        out: args.out.clone(),
        ..Overrides::default()
    };
    let cfg = config::load(&args.scenario, &ov)?;
    let dir = cfg.out.clone();
    Ok((cfg, dir))
}

fn write_and_print_report(
    cfg: &config::Resolved,
    per_seed: &[SeedStats],
) -> Result<(), HarnessError> {
    let pooled = stats::pool(per_seed);
    let report = stats::render_report(cfg, per_seed, &pooled);
    std::fs::create_dir_all(&cfg.out).map_err(HarnessError::io(&cfg.out))?;
    let report_path = cfg.out.join("report.txt");
    std::fs::write(&report_path, &report).map_err(HarnessError::io(&report_path))?;
    let summary = stats::summary_json(cfg, per_seed, &pooled);
    let summary_path = cfg.out.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary)
        .map_err(|e| HarnessError::Runtime(format!("summary serialization: {e}")))?;
    text.push('\n');
    std::fs::write(&summary_path, text).map_err(HarnessError::io(&summary_path))?;
    print!("{report}");
    Ok(())
}

/// Prints the full scene and gain diagnosis, then fails with the
/// precondition exit code if any check is violated. Structural problems
/// in the file itself still report as configuration errors.
fn cmd_check(scenario: &PathBuf) -> Result<(), HarnessError> {
    let file = config::parse_file(scenario)?;
    let scene = config::build_scene(scenario, &file.scene)?;
    let report = check_assumption1(&scene).map_err(|e| HarnessError::Runtime(e.to_string()))?;

    println!("scene");
    println!("  vectors (after augmentation)   {}", report.n_vectors);
    println!("  vector set rank                {} of 3", report.rank);
    println!(
        "  smallest singular value        {:.6e}",
        report.smallest_singular_value
    );
    println!("  landmarks                      {}", report.n_landmarks);
    println!(
        "  weight sums                    vectors {:.6}, landmarks {:.6}",
        report.weight_sum_vectors, report.weight_sum_landmarks
    );
    println!(
        "  observability                  {}",
        if report.satisfied {
            "ok"
        } else {
            "VIOLATED (need rank 3 and at least one landmark)"
        }
    );

    // Smallest eigenvalue lower bound of the weighted direction matrix,
    // via trace minus largest eigenvalue.
    let normalized = scene
        .normalized_inertial()
        .map_err(|e| HarnessError::Runtime(e.to_string()))?;
    let mut m_r = liepose::Mat3::zeros();
    for (v, w) in normalized.iter().zip(&scene.weights_vectors) {
        m_r += v * v.transpose() * *w;
    }
    let eig = m_r.symmetric_eigen();
    let lambda_max = eig.eigenvalues.max();
    let lambda_lower = m_r.trace() - lambda_max;
    println!("  direction matrix eigenvalue lower bound  {lambda_lower:.6}");

    let g = &file.gains;
    println!("gains");
    let gains = Gains::new(g.k_w, g.gamma_b, g.gamma_sigma, g.k_b, g.k_sigma, g.varrho);
    let gains_ok = match &gains {
        Ok(_) => {
            println!(
                "  stability requirements         ok (k_w = {} > 9/8)",
                g.k_w
            );
            true
        }
        Err(e) => {
            println!("  stability requirements         VIOLATED: {e}");
            false
        }
    };
    let direct_bound = 0.375 * lambda_lower;
    let direct_ok = g.k_w > direct_bound;
    println!(
        "  direct filter requirement      k_w = {} {} (3/8) * {lambda_lower:.6} = {direct_bound:.6}",
        g.k_w,
        if direct_ok { ">" } else { "NOT >" }
    );

    if !report.satisfied {
        return Err(HarnessError::Precondition(
            "scene violates the observability assumption".to_string(),
        ));
    }
    if !gains_ok || !direct_ok {
        return Err(HarnessError::Precondition(
            "gains violate the filter stability requirements".to_string(),
        ));
    }
    println!("all preconditions satisfied");
    Ok(())
}
