//! Parallel ensembles: one independent seeded path per task, results in path order.

use std::ops::Range;

use enstrophy_core::dynamics::{SimulationConfig, Simulator, TrajectoryRecord};
use enstrophy_core::lattice::ModeIndex;
use enstrophy_core::nonlinear::DriftEngine;
use enstrophy_core::{Error, Result};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::pseudospectral::AnyDrift;

/// Simulate paths `paths` of `cfg` on at most `threads` workers.
///
/// Output is independent of the thread count: path `p` always uses stream `p`.
pub fn run_paths<E>(cfg: &SimulationConfig, engine: &E, paths: Range<u64>, threads: Option<usize>) -> Result<Vec<TrajectoryRecord>>
where
    E: DriftEngine + Clone + Send + Sync,
{
    let proto = Simulator::new(cfg.clone(), engine.clone())?;
    let job = || -> Result<Vec<TrajectoryRecord>> {
        paths
            .clone()
            .into_par_iter()
            .map_init(|| proto.clone(), |sim, p| sim.simulate_path(p))
            .collect()
    };
    match threads {
        None => job(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(job),
    }
}

/// Run the ensemble described by a [`RunConfig`].
pub fn run_ensemble(cfg: &RunConfig) -> Result<Vec<TrajectoryRecord>> {
    let engine = AnyDrift::new(cfg.engine, cfg.sim.n, cfg.grid)?;
    run_paths(&cfg.sim, &engine, 0..cfg.paths as u64, cfg.threads)
}

fn column(records: &[TrajectoryRecord], k: ModeIndex) -> Result<usize> {
    records
        .first()
        .and_then(|r| r.observables.iter().position(|&o| o == k))
        .ok_or(Error::UnknownObservable { k1: k.k1(), k2: k.k2() })
}

/// `paths[p][t]`: observable `k` along each path.
pub fn observable_paths(records: &[TrajectoryRecord], k: ModeIndex) -> Result<Vec<Vec<f64>>> {
    let o = column(records, k)?;
    Ok(records.iter().map(|r| r.mode_values.iter().map(|v| v[o]).collect()).collect())
}

/// `out[t][o][p]`: every observable at every record time, across paths.
pub fn snapshots(records: &[TrajectoryRecord]) -> Vec<Vec<Vec<f64>>> {
    let Some(first) = records.first() else { return Vec::new() };
    (0..first.times.len())
        .map(|t| {
            (0..first.observables.len())
                .map(|o| records.iter().map(|r| r.mode_values[t][o]).collect())
                .collect()
        })
        .collect()
}

/// `qv[p][t]`: realized covariation of observables `l` and `m` along each path.
pub fn qv_paths(records: &[TrajectoryRecord], l: ModeIndex, m: ModeIndex) -> Result<Vec<Vec<f64>>> {
    let (a, b) = (column(records, l)?, column(records, m)?);
    let key = (a.min(b), a.max(b));
    let p = records[0].qv_pairs.iter().position(|&q| q == key).expect("all pairs recorded");
    Ok(records.iter().map(|r| r.qv.iter().map(|q| q[p]).collect()).collect())
}
