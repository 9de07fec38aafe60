use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{CellSpec, ExperimentConfig, Mode};
use crate::analytic::{
    d_star, for_each_weak_composition, iter_log, joint_profile_pmf, power_degree_pmf,
    union_bound_tail, weak_composition_count, LayerComposition, DEFAULT_ENUMERATION_CAP,
};
use crate::error::{Error, Result};
use crate::graph::{sample_gnp_with_rng, GraphParams};
use crate::power::{layer_profile, max_power_degree};
use crate::stream;

/// Census rows always include profiles at least this likely under the
/// limiting law, observed or not.
pub const CENSUS_REFERENCE_FLOOR: f64 = 1e-3;

/// A cell that failed its guards and was not run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedCell {
    pub cell: usize,
    pub n: u64,
    pub c: f64,
    pub r: usize,
    pub reason: String,
}

/// One maxdeg trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub cell: usize,
    pub n: u64,
    pub c: f64,
    pub r: usize,
    pub trial: u64,
    pub seed: u64,
    pub max_degree: u64,
    pub argmax_vertex: u32,
    pub d_star: f64,
    pub ratio: f64,
    /// `Δ(G^r) > d*(1 + ε)`.
    pub exceeds_upper: bool,
    /// Vertices whose `G^r` degree exceeds `d*(1 - ε)`.
    pub high_degree_count: u64,
    #[serde(skip)]
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: usize,
    pub n: u64,
    pub c: f64,
    pub r: usize,
    pub trials: u64,
    pub d_star: f64,
    /// `1 / log_{(r+1)} n`.
    pub epsilon: f64,
    pub mean_ratio: f64,
    pub sd_ratio: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub frac_above_upper: f64,
    pub mean_high_degree_count: f64,
}

impl CellSummary {
    /// Summary of the records of one cell.
    pub fn from_records(records: &[ExperimentRecord], epsilon: f64) -> Option<Self> {
        let first = records.first()?;
        let k = records.len() as f64;
        let ratios: Vec<f64> = records.iter().map(|r| r.ratio).collect();
        let mean = ratios.iter().sum::<f64>() / k;
        let var = if records.len() > 1 {
            ratios.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        Some(Self {
            cell: first.cell,
            n: first.n,
            c: first.c,
            r: first.r,
            trials: records.len() as u64,
            d_star: first.d_star,
            epsilon,
            mean_ratio: mean,
            sd_ratio: var.sqrt(),
            min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
            max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            frac_above_upper: records.iter().filter(|r| r.exceeds_upper).count() as f64 / k,
            mean_high_degree_count: records
                .iter()
                .map(|r| r.high_degree_count as f64)
                .sum::<f64>()
                / k,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaxDegReport {
    pub records: Vec<ExperimentRecord>,
    pub summaries: Vec<CellSummary>,
    pub skipped: Vec<SkippedCell>,
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusRow {
    pub cell: usize,
    pub n: u64,
    pub c: f64,
    pub r: usize,
    pub profile: Vec<u64>,
    pub count: u64,
    pub roots: u64,
    pub empirical: f64,
    pub analytic: f64,
    pub abs_dev: f64,
    pub sigma: f64,
    /// `3σ + 10 d²/n`.
    pub tolerance: f64,
    pub within: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CensusReport {
    pub rows: Vec<CensusRow>,
    pub skipped: Vec<SkippedCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRow {
    pub cell: usize,
    pub n: u64,
    pub c: f64,
    pub r: usize,
    pub multiplier: f64,
    pub d: u64,
    pub trials: u64,
    pub exceed_count: u64,
    pub empirical: f64,
    pub union_ln: f64,
    /// `min(1, exp(union_ln))`.
    pub bound: f64,
    pub sigma: f64,
    /// `empirical <= bound + 3σ`; reported, never enforced here.
    pub consistent: bool,
}

/// Measured `Δ(G^r)` of every trial of one tailcheck cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellMaxima {
    pub cell: usize,
    pub d_star: f64,
    pub maxima: Vec<u64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TailReport {
    pub rows: Vec<TailRow>,
    pub maxima: Vec<CellMaxima>,
    pub skipped: Vec<SkippedCell>,
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

fn skipped(cell: usize, spec: &CellSpec, err: &Error) -> SkippedCell {
    SkippedCell {
        cell,
        n: spec.n,
        c: spec.c,
        r: spec.r,
        reason: err.to_string(),
    }
}

fn check_cell(spec: &CellSpec, needs_d_star: bool) -> Result<Option<f64>> {
    GraphParams::new(spec.n, spec.c, 0)?;
    if spec.r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    if needs_d_star {
        Ok(Some(d_star(spec.n as f64, spec.r)?))
    } else {
        Ok(None)
    }
}

/// Cells that pass their guards, with `d*` when the mode needs it.
fn admitted(
    cfg: &ExperimentConfig,
    needs_d_star: bool,
) -> (Vec<(usize, CellSpec, Option<f64>)>, Vec<SkippedCell>) {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for (k, spec) in cfg.cells.iter().enumerate() {
        match check_cell(spec, needs_d_star) {
            Ok(ds) => ok.push((k, *spec, ds)),
            Err(e) => bad.push(skipped(k, spec, &e)),
        }
    }
    (ok, bad)
}

fn trial_graph(
    cfg: &ExperimentConfig,
    cell: usize,
    spec: &CellSpec,
    trial: u64,
) -> Result<(crate::graph::SparseGraph, stream::StreamRng)> {
    let mut rng = stream::stream(cfg.seed, cell as u64, trial);
    let g = sample_gnp_with_rng(spec.n as usize, spec.c / spec.n as f64, &mut rng)?;
    Ok((g, rng))
}

fn epsilon(n: u64, r: usize) -> Result<f64> {
    Ok(1.0 / iter_log(r + 1, n as f64)?)
}

/// One record per (cell, trial) plus per-cell summaries.
pub fn run_maxdeg(cfg: &ExperimentConfig) -> Result<MaxDegReport> {
    cfg.validate()?;
    if cfg.mode != Mode::Maxdeg {
        return Err(Error::Config(format!(
            "run_maxdeg called with mode {}",
            cfg.mode.as_str()
        )));
    }
    let (cells, skipped) = admitted(cfg, true);
    let tasks: Vec<(usize, CellSpec, f64, u64)> = cells
        .iter()
        .flat_map(|&(k, spec, ds)| (0..cfg.trials).map(move |t| (k, spec, ds.unwrap(), t)))
        .collect();
    let records = with_workers(cfg.workers, || {
        tasks
            .par_iter()
            .map(|&(k, spec, ds, t)| -> Result<ExperimentRecord> {
                let start = Instant::now();
                let eps = epsilon(spec.n, spec.r)?;
                let (g, _) = trial_graph(cfg, k, &spec, t)?;
                let res = max_power_degree(&g, spec.r)?;
                Ok(ExperimentRecord {
                    cell: k,
                    n: spec.n,
                    c: spec.c,
                    r: spec.r,
                    trial: t,
                    seed: cfg.seed,
                    max_degree: res.max_degree,
                    argmax_vertex: res.argmax_vertex,
                    d_star: ds,
                    ratio: res.max_degree as f64 / ds,
                    exceeds_upper: res.max_degree as f64 > ds * (1.0 + eps),
                    high_degree_count: res.count_above(ds * (1.0 - eps)),
                    wall_seconds: start.elapsed().as_secs_f64(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut summaries = Vec::new();
    for &(k, spec, _) in &cells {
        let rows: Vec<ExperimentRecord> = records.iter().filter(|r| r.cell == k).cloned().collect();
        if let Some(s) = CellSummary::from_records(&rows, epsilon(spec.n, spec.r)?) {
            summaries.push(s);
        }
    }
    Ok(MaxDegReport {
        records,
        summaries,
        skipped,
        timing: cfg.timing,
    })
}

/// Profiles with limiting probability at least `floor`, found by scanning
/// degrees until the unexplored mass falls below `floor`.
pub fn reference_profiles(c: f64, r: usize, floor: f64) -> Result<Vec<Vec<u64>>> {
    let mut out = Vec::new();
    let mut explored = 0.0;
    let mut d = 0u64;
    while 1.0 - explored >= floor {
        if weak_composition_count(d, r) > DEFAULT_ENUMERATION_CAP {
            break;
        }
        explored += power_degree_pmf(c, r, d)?.value();
        let mut parts = vec![0; r];
        for_each_weak_composition(d, &mut parts, &mut |p| {
            let comp = LayerComposition::new(p.to_vec()).expect("r >= 1");
            if joint_profile_pmf(c, &comp).value() >= floor {
                out.push(p.to_vec());
            }
        });
        d += 1;
    }
    Ok(out)
}

/// Layer profiles of one uniformly chosen root per sampled graph, compared
/// with the limiting joint pmf.
pub fn run_census(cfg: &ExperimentConfig) -> Result<CensusReport> {
    cfg.validate()?;
    if cfg.mode != Mode::Census {
        return Err(Error::Config(format!(
            "run_census called with mode {}",
            cfg.mode.as_str()
        )));
    }
    let (cells, skipped) = admitted(cfg, false);
    let mut rows = Vec::new();
    for &(k, spec, _) in &cells {
        let profiles = with_workers(cfg.workers, || {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| -> Result<Vec<u64>> {
                    let (g, mut rng) = trial_graph(cfg, k, &spec, t)?;
                    let root = rng.random_range(0..spec.n as u32);
                    Ok(layer_profile(&g, root, spec.r)?.layers)
                })
                .collect::<Result<Vec<_>>>()
        })??;
        let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        for p in profiles {
            *counts.entry(p).or_insert(0) += 1;
        }
        for p in reference_profiles(spec.c, spec.r, CENSUS_REFERENCE_FLOOR)? {
            counts.entry(p).or_insert(0);
        }
        let roots = cfg.trials;
        for (profile, count) in counts {
            let comp = LayerComposition::new(profile.clone())?;
            let analytic = joint_profile_pmf(spec.c, &comp).value();
            let empirical = count as f64 / roots as f64;
            let sigma = (analytic * (1.0 - analytic) / roots as f64).sqrt();
            let d = comp.d() as f64;
            let tolerance = 3.0 * sigma + 10.0 * d * d / spec.n as f64;
            let abs_dev = (empirical - analytic).abs();
            rows.push(CensusRow {
                cell: k,
                n: spec.n,
                c: spec.c,
                r: spec.r,
                profile,
                count,
                roots,
                empirical,
                analytic,
                abs_dev,
                sigma,
                tolerance,
                within: abs_dev <= tolerance,
            });
        }
    }
    Ok(CensusReport { rows, skipped })
}

/// Empirical `P[Δ(G^r) ≥ d]` on a ladder of thresholds around `d*`,
/// against the union-bound estimate.
pub fn run_tailcheck(cfg: &ExperimentConfig) -> Result<TailReport> {
    cfg.validate()?;
    if cfg.mode != Mode::Tailcheck {
        return Err(Error::Config(format!(
            "run_tailcheck called with mode {}",
            cfg.mode.as_str()
        )));
    }
    let (cells, mut skipped) = admitted(cfg, true);
    let mut rows = Vec::new();
    let mut maxima_out = Vec::new();
    for &(k, spec, ds) in &cells {
        let ds = ds.unwrap();
        let ladder: Vec<(f64, u64)> = cfg
            .ladder
            .iter()
            .map(|&m| (m, (m * ds).ceil() as u64))
            .collect();
        let estimates = match ladder
            .iter()
            .map(|&(_, d)| union_bound_tail(spec.n, spec.c, spec.r, d))
            .collect::<Result<Vec<_>>>()
        {
            Ok(e) => e,
            Err(e @ (Error::Capacity(_) | Error::Domain(_))) => {
                skipped.push(self::skipped(k, &spec, &e));
                continue;
            }
            Err(e) => return Err(e),
        };
        let maxima = with_workers(cfg.workers, || {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| -> Result<u64> {
                    let (g, _) = trial_graph(cfg, k, &spec, t)?;
                    Ok(max_power_degree(&g, spec.r)?.max_degree)
                })
                .collect::<Result<Vec<_>>>()
        })??;
        for (&(multiplier, d), est) in ladder.iter().zip(&estimates) {
            let exceed = maxima.iter().filter(|&&m| m >= d).count() as u64;
            let empirical = exceed as f64 / cfg.trials as f64;
            let bound = est.union_probability();
            let sigma = (bound * (1.0 - bound) / cfg.trials as f64).sqrt();
            rows.push(TailRow {
                cell: k,
                n: spec.n,
                c: spec.c,
                r: spec.r,
                multiplier,
                d,
                trials: cfg.trials,
                exceed_count: exceed,
                empirical,
                union_ln: est.union_ln,
                bound,
                sigma,
                consistent: empirical <= bound + 3.0 * sigma,
            });
        }
        maxima_out.push(CellMaxima {
            cell: k,
            d_star: ds,
            maxima,
        });
    }
    skipped.sort_by_key(|s| s.cell);
    Ok(TailReport {
        rows,
        maxima: maxima_out,
        skipped,
    })
}
