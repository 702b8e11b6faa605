use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use log::{debug, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::records::{
    read_design_csv, read_json, read_records, write_atomic, write_design_csv, write_json,
    write_records, DesignInfo, RunRecord, RunResult, RunStatus,
};
use crate::error::{Error, Result};
use crate::fem::{solve_rve, CgOptions, CorrectorSolution};
use crate::microstructure::{
    fiber_fractions, stiffness_from_engineering, voxelize, GeometryParams, PlyLayout, VoxelRVE,
    PARAM_NAMES,
};
use crate::pca::{fit_pca, flatten_with_residual, unflatten, PcaModel, FLAT_NAMES, OFF_PATTERN_TOL};
use crate::pce::{fit_lar, LarOptions, PceModel};
use crate::sampling::{lhs, RNG_NAME};
use crate::sobol::{sobol_from_pce, SobolIndices};
use crate::voigt::is_positive_definite;

pub const DESIGN_CSV: &str = "design.csv";
pub const DESIGN_JSON: &str = "design.json";
pub const RUNS_JSONL: &str = "runs.jsonl";
/// Unordered log appended while a batch is in flight; merged into `RUNS_JSONL`.
pub const RUNS_PARTIAL: &str = "runs.partial.jsonl";
/// Wall-clock times per run. Kept apart so the other outputs stay reproducible.
pub const RUN_TIMES: &str = "run_times.log";
pub const PCA_JSON: &str = "pca_model.json";
pub const FIT_REPORT: &str = "fit_report.json";
pub const SOBOL_SUMMARY: &str = "sobol_summary.json";
pub const SAMPLES_CSV: &str = "surrogate_samples.csv";
pub const SAMPLE_REPORT: &str = "sample_report.json";

/// Minimum number of successful runs for a surrogate fit.
pub const MIN_FIT_RUNS: usize = 20;
/// Components explaining less than this share of variance are flagged.
pub const LOW_WEIGHT_RATIO: f64 = 0.01;

pub fn pce_file(component: usize) -> String {
    format!("pce_lambda_{component}.json")
}

pub fn sobol_file(component: usize) -> String {
    format!("sobol_lambda_{component}.csv")
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Voxel cell of one realization, honoring the homogeneous-material override.
pub fn build_rve(cfg: &ExperimentConfig, params: &GeometryParams) -> Result<(VoxelRVE, PlyLayout)> {
    params.validate(&cfg.bounds)?;
    match &cfg.homogeneous_material {
        None => voxelize(params, &cfg.fiber, &cfg.matrix, cfg.resolution),
        Some(mat) => {
            let layout = PlyLayout::from_params(params)?;
            let c = stiffness_from_engineering(mat)?;
            Ok((VoxelRVE::homogeneous(cfg.resolution, layout.cell_lengths, c)?, layout))
        }
    }
}

/// Voxelizes and solves one realization.
pub fn run_single(cfg: &ExperimentConfig, run_id: usize, params: GeometryParams) -> RunRecord {
    let outcome = (|| -> Result<RunResult> {
        let (rve, layout) = build_rve(cfg, &params)?;
        let (corr, dh) = solve_rve(&rve, &CgOptions::from(cfg.solver))?;
        let (flattened, off_pattern_residual) = flatten_with_residual(&dh.matrix);
        if off_pattern_residual > OFF_PATTERN_TOL {
            debug!("run {run_id}: off-pattern residual {off_pattern_residual:.3e}");
        }
        Ok(RunResult {
            resolution: rve.dims(),
            cell_lengths: rve.cell_lengths(),
            homogenized: dh,
            flattened,
            off_pattern_residual,
            positive_definite: is_positive_definite(&dh.matrix),
            target_fractions: layout.target_fractions,
            achieved_fractions: fiber_fractions(&rve, &layout),
            solver: corr.reports,
        })
    })();
    match outcome {
        Ok(result) => RunRecord {
            run_id,
            params,
            status: RunStatus::Ok,
            error: None,
            result: Some(result),
        },
        Err(e) => {
            warn!("run {run_id} failed: {e}");
            RunRecord {
                run_id,
                params,
                status: RunStatus::Failed,
                error: Some(e.to_string()),
                result: None,
            }
        }
    }
}

/// Draws the Latin hypercube design and writes it with its sidecar.
pub fn cmd_doe(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<GeometryParams>> {
    cfg.validate()?;
    ensure_dir(out)?;
    let doe = lhs(cfg.n_runs, &cfg.bounds.as_array(), cfg.seed)?;
    let samples: Vec<GeometryParams> = doe
        .samples
        .iter()
        .map(|r| GeometryParams::from_array([r[0], r[1], r[2], r[3], r[4], r[5]]))
        .collect();
    write_design_csv(&out.join(DESIGN_CSV), &samples)?;
    write_json(
        &out.join(DESIGN_JSON),
        &DesignInfo {
            n_runs: cfg.n_runs,
            seed: cfg.seed,
            rng: RNG_NAME.into(),
            parameter_names: PARAM_NAMES.iter().map(|s| s.to_string()).collect(),
            bounds: cfg.bounds,
        },
    )?;
    info!("wrote {} design points to {}", samples.len(), out.display());
    Ok(samples)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub total: usize,
    pub succeeded: usize,
    pub failed: usize,
    /// Runs found complete from an earlier invocation.
    pub reused: usize,
}

fn load_existing(out: &Path) -> Result<std::collections::BTreeMap<usize, RunRecord>> {
    let mut map = std::collections::BTreeMap::new();
    for name in [RUNS_JSONL, RUNS_PARTIAL] {
        let path = out.join(name);
        if path.exists() {
            map.extend(read_records(&path)?);
        }
    }
    Ok(map)
}

/// Solves every design point not already completed, then writes the ordered log.
pub fn cmd_run(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    ensure_dir(out)?;
    let design_path = out.join(DESIGN_CSV);
    let design = if design_path.exists() {
        read_design_csv(&design_path)?
    } else {
        info!("no design found; drawing one");
        cmd_doe(cfg, out)?
    };

    let mut records = load_existing(out)?;
    records.retain(|id, rec| {
        let keep = *id < design.len() && rec.params == design[*id];
        if !keep {
            warn!("discarding stale record {id}: design differs");
        }
        keep && rec.is_ok()
    });
    let reused = records.len();
    let pending: Vec<usize> = (0..design.len()).filter(|id| !records.contains_key(id)).collect();
    info!("{} runs pending, {reused} reused", pending.len());

    let partial = Mutex::new(
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(out.join(RUNS_PARTIAL))
            .map_err(|e| Error::io(out.join(RUNS_PARTIAL), e))?,
    );
    let times = Mutex::new(
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(out.join(RUN_TIMES))
            .map_err(|e| Error::io(out.join(RUN_TIMES), e))?,
    );
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let fresh: Vec<RunRecord> = pool.install(|| {
        pending
            .par_iter()
            .map(|&id| -> Result<RunRecord> {
                let start = Instant::now();
                let rec = run_single(cfg, id, design[id]);
                let secs = start.elapsed().as_secs_f64();
                let line = serde_json::to_string(&rec)?;
                {
                    let mut f = partial.lock().expect("partial log poisoned");
                    writeln!(f, "{line}").map_err(|e| Error::io(out.join(RUNS_PARTIAL), e))?;
                    f.flush().map_err(|e| Error::io(out.join(RUNS_PARTIAL), e))?;
                }
                let _ = writeln!(times.lock().expect("time log poisoned"), "{id}\t{secs:.3}");
                info!("run {id} finished in {secs:.2} s ({:?})", rec.status);
                Ok(rec)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    for rec in fresh {
        records.insert(rec.run_id, rec);
    }
    write_records(&out.join(RUNS_JSONL), records.values())?;
    std::fs::remove_file(out.join(RUNS_PARTIAL)).map_err(|e| Error::io(out.join(RUNS_PARTIAL), e))?;

    let failed = records.values().filter(|r| !r.is_ok()).count();
    let summary = RunSummary {
        total: records.len(),
        succeeded: records.len() - failed,
        failed,
        reused,
    };
    if failed as f64 > cfg.max_failure_fraction * records.len() as f64 {
        return Err(Error::TooManyFailures {
            failed,
            total: records.len(),
        });
    }
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentFit {
    pub component: usize,
    pub explained_variance_ratio: f64,
    pub loo_error: f64,
    pub loo_error_raw: f64,
    pub normalized_mse: f64,
    pub degree: u32,
    pub max_index_degree: u32,
    pub n_terms: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub n_records: usize,
    pub n_used: usize,
    pub excluded_failed_runs: Vec<usize>,
    pub non_positive_definite_runs: Vec<usize>,
    pub explained_variance_ratio: Vec<f64>,
    pub retained_ratio: f64,
    pub components: Vec<ComponentFit>,
}

/// Fits the PCA of the homogenized stiffnesses and one chaos expansion per component.
pub fn cmd_fit(cfg: &ExperimentConfig, out: &Path) -> Result<FitReport> {
    cfg.validate()?;
    let records = read_records(&out.join(RUNS_JSONL))?;
    let ok: Vec<&RunRecord> = records.values().filter(|r| r.is_ok()).collect();
    let excluded: Vec<usize> = records.values().filter(|r| !r.is_ok()).map(|r| r.run_id).collect();
    if ok.len() < MIN_FIT_RUNS {
        return Err(Error::InsufficientData(format!(
            "{} successful runs; at least {MIN_FIT_RUNS} are needed",
            ok.len()
        )));
    }
    let result = |r: &RunRecord| r.result.clone().expect("ok records carry results");
    let flats: Vec<_> = ok.iter().map(|r| result(r).flattened).collect();
    let x: Vec<Vec<f64>> = ok.iter().map(|r| r.params.as_array().to_vec()).collect();
    let pca = fit_pca(&flats, cfg.n_components)?;

    let bounds = cfg.bounds.as_array();
    let opts = LarOptions {
        max_degree: cfg.pce_max_degree,
        patience: cfg.pce_patience,
    };
    let models: Vec<PceModel> = (0..pca.n_components())
        .into_par_iter()
        .map(|m| {
            let y: Vec<f64> = pca.coefficients.iter().map(|c| c[m]).collect();
            fit_lar(&x, &y, &bounds, &opts)
        })
        .collect::<Result<_>>()?;

    write_json(&out.join(PCA_JSON), &pca)?;
    let mut components = Vec::new();
    for (m, model) in models.iter().enumerate() {
        write_json(&out.join(pce_file(m + 1)), model)?;
        components.push(ComponentFit {
            component: m + 1,
            explained_variance_ratio: pca.explained_variance_ratio[m],
            loo_error: model.loo_error,
            loo_error_raw: model.loo_error_raw,
            normalized_mse: model.normalized_mse,
            degree: model.degree,
            max_index_degree: model.max_index_degree(),
            n_terms: model.coefficients.len(),
        });
        info!(
            "component {}: LOO {:.3e}, degree {}, {} terms",
            m + 1,
            model.loo_error,
            model.degree,
            model.coefficients.len()
        );
    }
    let report = FitReport {
        n_records: records.len(),
        n_used: ok.len(),
        excluded_failed_runs: excluded,
        non_positive_definite_runs: ok
            .iter()
            .filter(|r| !result(r).positive_definite)
            .map(|r| r.run_id)
            .collect(),
        explained_variance_ratio: pca.explained_variance_ratio.clone(),
        retained_ratio: pca.retained_ratio(),
        components,
    };
    write_json(&out.join(FIT_REPORT), &report)?;
    Ok(report)
}

fn load_models(out: &Path) -> Result<(PcaModel, Vec<PceModel>)> {
    let pca: PcaModel = read_json(&out.join(PCA_JSON))?;
    let models = (1..=pca.n_components())
        .map(|m| read_json(&out.join(pce_file(m))))
        .collect::<Result<_>>()?;
    Ok((pca, models))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSensitivity {
    pub component: usize,
    pub explained_variance_ratio: f64,
    pub low_weight: bool,
    pub indices: SobolIndices,
}

/// Sobol indices of every fitted component, one CSV per component.
pub fn cmd_sobol(out: &Path) -> Result<Vec<ComponentSensitivity>> {
    let (pca, models) = load_models(out)?;
    let mut summary = Vec::new();
    for (m, model) in models.iter().enumerate() {
        let indices = sobol_from_pce(model)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["input", "S_i", "S_Ti"])?;
        for (k, name) in PARAM_NAMES.iter().enumerate() {
            w.write_record([
                name.to_string(),
                indices.first_order[k].to_string(),
                indices.total[k].to_string(),
            ])?;
        }
        let path = out.join(sobol_file(m + 1));
        let bytes = w.into_inner().map_err(|e| Error::io(&path, e.into_error()))?;
        write_atomic(&path, &bytes)?;
        let ratio = pca.explained_variance_ratio[m];
        if ratio < LOW_WEIGHT_RATIO {
            warn!("component {} explains only {:.2}% of the variance", m + 1, 100.0 * ratio);
        }
        summary.push(ComponentSensitivity {
            component: m + 1,
            explained_variance_ratio: ratio,
            low_weight: ratio < LOW_WEIGHT_RATIO,
            indices,
        });
    }
    write_json(&out.join(SOBOL_SUMMARY), &summary)?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub n_samples: usize,
    pub seed: u64,
    pub rng: String,
    pub non_positive_definite: usize,
    pub entry_names: Vec<String>,
    pub entry_mean: Vec<f64>,
    pub entry_std: Vec<f64>,
}

/// Evaluates the surrogate on a fresh design and reconstructs the stiffness entries.
pub fn cmd_sample(cfg: &ExperimentConfig, out: &Path, n: Option<usize>) -> Result<SampleReport> {
    cfg.validate()?;
    let (pca, models) = load_models(out)?;
    let n = n.unwrap_or(cfg.n_samples);
    let seed = cfg.sample_seed();
    let doe = lhs(n, &cfg.bounds.as_array(), seed)?;
    let lambdas: Vec<Vec<f64>> = models
        .par_iter()
        .map(|m| m.evaluate(&doe.samples))
        .collect::<Result<_>>()?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["sample_id"];
    header.extend(PARAM_NAMES);
    header.extend(FLAT_NAMES);
    header.push("positive_definite");
    w.write_record(&header)?;
    let mut non_spd = 0;
    let mut sum = [0.0; 9];
    let mut sum_sq = [0.0; 9];
    for (s, x) in doe.samples.iter().enumerate() {
        let lambda: Vec<f64> = lambdas.iter().map(|l| l[s]).collect();
        let entries = pca.reconstruct(&lambda)?;
        let flat: [f64; 9] = entries.clone().try_into().expect("nine entries");
        let spd = is_positive_definite(&unflatten(&flat));
        non_spd += usize::from(!spd);
        for k in 0..9 {
            sum[k] += entries[k];
            sum_sq[k] += entries[k] * entries[k];
        }
        let mut row = vec![s.to_string()];
        row.extend(x.iter().map(|v| v.to_string()));
        row.extend(entries.iter().map(|v| v.to_string()));
        row.push(spd.to_string());
        w.write_record(&row)?;
    }
    let path = out.join(SAMPLES_CSV);
    let bytes = w.into_inner().map_err(|e| Error::io(&path, e.into_error()))?;
    write_atomic(&path, &bytes)?;
    if non_spd > 0 {
        warn!("{non_spd} of {n} surrogate samples are not positive definite");
    }
    let nf = n as f64;
    let entry_mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let entry_std = (0..9)
        .map(|k| {
            if n < 2 {
                0.0
            } else {
                ((sum_sq[k] - nf * entry_mean[k] * entry_mean[k]) / (nf - 1.0)).max(0.0).sqrt()
            }
        })
        .collect();
    let report = SampleReport {
        n_samples: n,
        seed,
        rng: RNG_NAME.into(),
        non_positive_definite: non_spd,
        entry_names: FLAT_NAMES.iter().map(|s| s.to_string()).collect(),
        entry_mean,
        entry_std,
    };
    write_json(&out.join(SAMPLE_REPORT), &report)?;
    Ok(report)
}

/// Re-solves one design point and writes its material map and corrector fields.
pub fn cmd_export_vtk(cfg: &ExperimentConfig, out: &Path, run_id: usize) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let design = read_design_csv(&out.join(DESIGN_CSV))?;
    let params = design.get(run_id).ok_or_else(|| {
        Error::InvalidArgument(format!("run {run_id} is not in the design ({} runs)", design.len()))
    })?;
    let (rve, _) = build_rve(cfg, params)?;
    let (corr, _): (CorrectorSolution, _) = solve_rve(&rve, &CgOptions::from(cfg.solver))?;
    let dir = out.join("vtk").join(format!("run_{run_id:04}"));
    ensure_dir(&dir)?;
    // Fields are written with zero volume mean rather than pinned at the anchor.
    crate::vtk::export_all(&rve, &corr.zero_mean_shifted(), &dir)
}
