use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use rve_uq::pipeline::{self, ExperimentConfig};

/// Homogenization and surrogate-modeling workflow for woven fiber composites.
#[derive(Parser, Debug)]
#[command(name = "rve-uq", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment configuration (JSON). Defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides RVE_UQ_OUT and the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of design points.
    #[arg(long, global = true)]
    n_runs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Voxels per axis, applied to all three axes.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Worker threads for batch runs.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Retained principal components.
    #[arg(long, global = true)]
    n_components: Option<usize>,
    /// Largest total degree tried by the chaos fit.
    #[arg(long, global = true)]
    max_degree: Option<u32>,
    /// Relative residual target of the corrector solves.
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw the Latin hypercube design.
    Doe,
    /// Solve all pending design points (resumes an interrupted batch).
    Run,
    /// Fit the PCA and one chaos expansion per retained component.
    Fit,
    /// Compute Sobol indices of the fitted expansions.
    Sobol,
    /// Sample the surrogate and reconstruct stiffness entries.
    Sample {
        /// Number of surrogate samples.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Write VTK files of one run's material map and corrector fields.
    ExportVtk {
        #[arg(long)]
        run_id: usize,
    },
    /// Run doe, run, fit, sobol and sample in sequence.
    All,
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(n) = c.n_runs {
        cfg.n_runs = n;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(r) = c.resolution {
        cfg.resolution = [r; 3];
    }
    if c.workers.is_some() {
        cfg.workers = c.workers;
    }
    if let Some(k) = c.n_components {
        cfg.n_components = k;
    }
    if let Some(p) = c.max_degree {
        cfg.pce_max_degree = p;
    }
    if let Some(t) = c.rel_tol {
        cfg.solver.rel_tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cfg = load_config(&cli.common)?;
    let out = cfg.resolve_output_dir(cli.common.out.as_deref());
    info!("output directory {}", out.display());

    match cli.command {
        Command::Doe => {
            let d = pipeline::cmd_doe(&cfg, &out)?;
            println!("{} design points written", d.len());
        }
        Command::Run => run(&cfg, &out)?,
        Command::Fit => fit(&cfg, &out)?,
        Command::Sobol => sobol(&out)?,
        Command::Sample { n } => sample(&cfg, &out, n)?,
        Command::ExportVtk { run_id } => {
            for p in pipeline::cmd_export_vtk(&cfg, &out, run_id)? {
                println!("{}", p.display());
            }
        }
        Command::All => {
            pipeline::cmd_doe(&cfg, &out)?;
            run(&cfg, &out)?;
            fit(&cfg, &out)?;
            sobol(&out)?;
            sample(&cfg, &out, None)?;
        }
    }
    Ok(())
}

fn run(cfg: &ExperimentConfig, out: &std::path::Path) -> Result<()> {
    let s = pipeline::cmd_run(cfg, out)?;
    println!(
        "{} runs: {} succeeded, {} failed, {} reused",
        s.total, s.succeeded, s.failed, s.reused
    );
    Ok(())
}

fn fit(cfg: &ExperimentConfig, out: &std::path::Path) -> Result<()> {
    let r = pipeline::cmd_fit(cfg, out)?;
    println!(
        "{} runs used; first {} components explain {:.3}%",
        r.n_used,
        r.components.len(),
        100.0 * r.retained_ratio
    );
    for c in &r.components {
        println!(
            "  lambda_{}: {:6.2}% variance, LOO {:.3e}, degree {}, {} terms",
            c.component,
            100.0 * c.explained_variance_ratio,
            c.loo_error,
            c.max_index_degree,
            c.n_terms
        );
    }
    Ok(())
}

fn sobol(out: &std::path::Path) -> Result<()> {
    for c in pipeline::cmd_sobol(out)? {
        let flag = if c.low_weight { " (low weight)" } else { "" };
        println!("lambda_{}{flag}", c.component);
        for (k, name) in rve_uq::microstructure::PARAM_NAMES.iter().enumerate() {
            println!(
                "  {name:>13}  S = {:.4}  ST = {:.4}",
                c.indices.first_order[k], c.indices.total[k]
            );
        }
    }
    Ok(())
}

fn sample(cfg: &ExperimentConfig, out: &std::path::Path, n: Option<usize>) -> Result<()> {
    let r = pipeline::cmd_sample(cfg, out, n)?;
    println!(
        "{} surrogate samples, {} not positive definite",
        r.n_samples, r.non_positive_definite
    );
    Ok(())
}
