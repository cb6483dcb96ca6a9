use crate::config::ExperimentConfig;
use crate::experiment::run_experiment;
use crate::output::{write_atomic, write_json};
use clap::{Parser, Subcommand};
use linkfn::LinkFunction;
use params::{derive_observer_params, feasibility_test, ObserverInputs};
use rgg::{Capability, GeometricGraph};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "rggrecon", version, about = "Recover manifold geometry from a random geometric graph")]
struct Cli {
    /// Master seed; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON experiment config; the built-in unit-sphere setting if omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a graph and write its edge list and latent positions.
    Generate,
    /// Build the cluster-net, both weighted graphs and the measure.
    Reconstruct,
    /// Run all trials, compare with the latent geometry and apply the
    /// config's acceptance thresholds.
    Evaluate {
        /// Also write the kernel gap check as `kernel_gap.csv`.
        #[arg(long)]
        kernel_report: bool,
    },
    /// Derive the observer parameters for the unit-sphere example.
    ObserverCheck {
        /// Total vertex count |V|.
        #[arg(long, default_value_t = 1e6)]
        vertices: f64,
    },
    /// Print the built-in config as JSON.
    DefaultConfig,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let mut cfg = match &cli.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("rggrecon: {e}");
                return EXIT_USAGE;
            }
        },
        None => ExperimentConfig::sphere_practical(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let outcome = match cli.command {
        Command::Generate => generate(&cfg, &cli.out),
        Command::Reconstruct => reconstruct(&cfg, &cli.out),
        Command::Evaluate { kernel_report } => evaluate(&cfg, &cli.out, kernel_report),
        Command::ObserverCheck { vertices } => Ok(observer_check(vertices)),
        Command::DefaultConfig => {
            println!("{}", cfg.to_json());
            Ok(EXIT_OK)
        }
    };
    match outcome {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("rggrecon: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("rggrecon: {msg}");
            EXIT_FAIL
        }
    }
}

enum CliError {
    Usage(String),
    Failed(String),
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

fn generate(cfg: &ExperimentConfig, out: &Path) -> Result<i32, CliError> {
    let res = cfg.resolve().map_err(|e| CliError::Usage(e.to_string()))?;
    let g = GeometricGraph::generate(res.model, res.link, cfg.generate_vertices, cfg.seed).map_err(failed)?;
    write_atomic(&out.join("edges.txt"), |w| g.write_edge_list(w)).map_err(failed)?;
    let latents = g.latents(Capability::Evaluation).map_err(failed)?;
    write_atomic(&out.join("latents.csv"), |w| latents.write_csv(w)).map_err(failed)?;
    println!("wrote {} vertices, {} edges to {}", cfg.generate_vertices, g.edge_count(), out.display());
    Ok(EXIT_OK)
}

fn write_edges(path: &Path, edges: &[(usize, usize, f64)]) -> std::io::Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "i,j,weight")?;
        for (i, j, x) in edges {
            writeln!(w, "{i},{j},{x:.16e}")?;
        }
        Ok(())
    })
}

fn reconstruct(cfg: &ExperimentConfig, out: &Path) -> Result<i32, CliError> {
    let res = cfg.resolve().map_err(|e| CliError::Usage(e.to_string()))?;
    let rec = res.reconstruct(cfg.seed).map_err(failed)?;
    let provenance = serde_json::json!({
        "seed": cfg.seed,
        "params": res.params,
        "failure": rec.failure.as_ref().map(|e| e.to_string()),
    });
    write_json(&out.join("net.json"), &rec.net.to_json(provenance)).map_err(failed)?;
    write_edges(&out.join("gamma_geo.csv"), &rec.geo.edges()).map_err(failed)?;
    write_edges(&out.join("gamma_euc.csv"), &rec.euc.edges()).map_err(failed)?;
    write_json(&out.join("measure.json"), &rec.nu).map_err(failed)?;
    println!(
        "net of {} clusters (halted normally: {}) written to {}",
        rec.net.clusters.len(),
        rec.net.halted_normally,
        out.display()
    );
    Ok(EXIT_OK)
}

fn evaluate(cfg: &ExperimentConfig, out: &Path, kernel_report: bool) -> Result<i32, CliError> {
    let res = cfg.resolve().map_err(|e| CliError::Usage(e.to_string()))?;
    if kernel_report {
        let c1 = kernel::gap_constant(&res.model, &res.link);
        let report = kernel::k_gap_check(
            &res.model,
            &res.link,
            c1,
            cfg.evaluation.kernel_pairs,
            cfg.evaluation.kernel_samples,
            cfg.seed,
        )
        .map_err(failed)?;
        write_atomic(&out.join("kernel_gap.csv"), |w| report.write_csv(w)).map_err(failed)?;
        println!("kernel gap check: {} of {} pairs flagged", report.violations(), report.rows.len());
    }
    let summary = run_experiment(cfg, out).map_err(failed)?;
    println!(
        "{} trials: {} nets covered and separated, worst geodesic error {:.4} (limit {:.4}), worst Euclidean fraction {:.4}",
        summary.trials,
        summary.nets_ok,
        summary.worst_geodesic_error,
        summary.geodesic_limit,
        summary.worst_euclidean_fraction
    );
    Ok(if summary.passed { EXIT_OK } else { EXIT_FAIL })
}

/// The unit-sphere observer example with `|V| = vertices`.
pub fn sphere_observer_inputs(vertices: f64) -> ObserverInputs {
    ObserverInputs {
        total_vertices: vertices,
        varsigma: 0.1,
        dim: 2,
        diam_bound: 2.0,
        kappa_bound: 1.0,
        connectivity_lower: f64::INFINITY,
        measure_const: 0.25,
        link: LinkFunction::exp_decay(0.9, 1.0, 2.0).expect("valid link"),
    }
}

fn observer_check(vertices: f64) -> i32 {
    let inp = sphere_observer_inputs(vertices);
    match derive_observer_params(&inp) {
        Ok(d) => {
            for (label, value) in d.items() {
                println!("{label:<14} {value:.6e}");
            }
            if feasibility_test(&d.params(), d.r_m) {
                println!("FEASIBLE at this |V|");
            } else {
                println!("INFEASIBLE at this |V|");
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("rggrecon: {e}");
            EXIT_FAIL
        }
    }
}
