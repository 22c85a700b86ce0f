//! Parameter sweeps and trade-off frontiers.

use serde::{Deserialize, Serialize};

use super::episode::{run_episode, EpisodeSettings};
use super::metrics::{evaluate, hybrid_score, MetricsReport, DEFAULT_SAFETY_THRESHOLD};
use super::scenario::Scenario;
use crate::controllers::{Algorithm, ControllerConfig};
use crate::dynamics::RobotModel;
use crate::safety_index::SafetyIndexParams;
use crate::{Error, Result};

/// `n` values evenly spaced in log scale from `from` to `to`. Both ends
/// must share a sign.
pub fn log_space(from: f64, to: f64, n: usize) -> Vec<f64> {
    let sign = from.signum();
    let (a, b) = (from.abs().ln(), to.abs().ln());
    match n {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..n)
            .map(|i| sign * (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub d_min: Vec<f64>,
    pub k: Vec<f64>,
    pub parameter: Vec<f64>,
}

impl SweepGrid {
    pub fn default_for(algorithm: Algorithm) -> Self {
        let parameter = match algorithm {
            Algorithm::Pfm => log_space(0.1, 10.0, 5),
            Algorithm::Sma => log_space(0.5, 50.0, 5),
            Algorithm::Ssa => log_space(-0.01, -10.0, 5),
            Algorithm::Bfm | Algorithm::Sss => log_space(-0.1, -10.0, 5),
        };
        Self {
            d_min: vec![0.5, 1.0, 1.5, 2.0, 3.0],
            k: vec![0.5, 1.0, 2.0],
            parameter,
        }
    }

    pub fn single(cfg: &ControllerConfig) -> Self {
        Self {
            d_min: vec![cfg.safety.d_min],
            k: vec![cfg.safety.k],
            parameter: vec![cfg.parameter()],
        }
    }

    pub fn len(&self) -> usize {
        self.d_min.len() * self.k.len() * self.parameter.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every grid point as a controller config, `d_min` outermost.
    pub fn configs(&self, base: &ControllerConfig) -> Result<Vec<ControllerConfig>> {
        let mut out = Vec::with_capacity(self.len());
        for &d_min in &self.d_min {
            for &k in &self.k {
                for &p in &self.parameter {
                    let cfg = ControllerConfig {
                        safety: SafetyIndexParams::new(d_min, k)?,
                        ..*base
                    }
                    .with_parameter(p);
                    cfg.validate()?;
                    out.push(cfg);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub model: RobotModel,
    /// Supplies the algorithm and the parameters that are not swept.
    pub base: ControllerConfig,
    pub grid: SweepGrid,
    pub scenarios: Vec<Scenario>,
    pub settings: EpisodeSettings,
    pub safety_threshold: f64,
}

impl SweepSpec {
    pub fn new(model: RobotModel, algorithm: Algorithm, scenarios: Vec<Scenario>) -> Self {
        Self {
            model,
            base: ControllerConfig::new(algorithm, SafetyIndexParams::default()),
            grid: SweepGrid::default_for(algorithm),
            scenarios,
            settings: EpisodeSettings::default(),
            safety_threshold: DEFAULT_SAFETY_THRESHOLD,
        }
    }
}

/// Metrics of one episode in a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub scenario_id: usize,
    pub config: ControllerConfig,
    pub metrics: MetricsReport,
    pub invalid: Option<String>,
}

/// One grid point, averaged over the scenario set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub config: ControllerConfig,
    pub safety: f64,
    pub efficiency: f64,
    pub collisions: usize,
    pub intervention_rate: f64,
    pub invalid: usize,
}

impl SweepPoint {
    pub fn any_collision(&self) -> bool {
        self.collisions > 0
    }

    /// Whether every episode ran to completion.
    pub fn is_valid(&self) -> bool {
        self.invalid == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub frontier: Vec<SweepPoint>,
    pub hybrid: Option<f64>,
}

#[cfg(feature = "parallel")]
fn map_jobs<T: Sync, R: Send>(jobs: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    jobs.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_jobs<T: Sync, R: Send>(jobs: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    jobs.iter().map(f).collect()
}

/// Runs every config on every scenario. Results are ordered by config,
/// then scenario, whatever the execution order.
pub fn run_batch(
    model: &RobotModel,
    configs: &[ControllerConfig],
    scenarios: &[Scenario],
    settings: &EpisodeSettings,
    safety_threshold: f64,
) -> Result<Vec<EpisodeResult>> {
    if safety_threshold.is_nan() || safety_threshold <= 0.0 {
        return Err(Error::Config(format!("safety threshold must be positive, got {safety_threshold}")));
    }
    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..scenarios.len()).map(move |s| (c, s)))
        .collect();
    map_jobs(&jobs, |&(c, s)| {
        let log = run_episode(model, &configs[c], &scenarios[s], settings)?;
        Ok(EpisodeResult {
            scenario_id: s,
            config: configs[c],
            metrics: evaluate(&log, safety_threshold),
            invalid: log.invalid,
        })
    })
    .into_iter()
    .collect()
}

/// Averages per-episode results into grid points, keeping config order.
pub fn aggregate(results: &[EpisodeResult]) -> Vec<SweepPoint> {
    let mut points: Vec<(SweepPoint, usize)> = Vec::new();
    for r in results {
        let idx = match points.iter().position(|(p, _)| p.config == r.config) {
            Some(i) => i,
            None => {
                points.push((
                    SweepPoint {
                        config: r.config,
                        safety: 0.0,
                        efficiency: 0.0,
                        collisions: 0,
                        intervention_rate: 0.0,
                        invalid: 0,
                    },
                    0,
                ));
                points.len() - 1
            }
        };
        let (p, n) = &mut points[idx];
        p.safety += r.metrics.safety;
        p.efficiency += r.metrics.efficiency;
        p.intervention_rate += r.metrics.intervention_rate;
        p.collisions += usize::from(r.metrics.collided);
        p.invalid += usize::from(r.invalid.is_some());
        *n += 1;
    }
    points
        .into_iter()
        .map(|(mut p, n)| {
            let n = n as f64;
            p.safety /= n;
            p.efficiency /= n;
            p.intervention_rate /= n;
            p
        })
        .collect()
}

pub fn tradeoff_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    if spec.grid.is_empty() {
        return Err(Error::Config("sweep grid has an empty axis".into()));
    }
    if spec.scenarios.is_empty() {
        return Err(Error::Config("sweep needs at least one scenario".into()));
    }
    let configs = spec.grid.configs(&spec.base)?;
    let results = run_batch(&spec.model, &configs, &spec.scenarios, &spec.settings, spec.safety_threshold)?;
    let points = aggregate(&results);
    // Aborted episodes have truncated metrics, so their points are left
    // out of both the frontier and the hybrid score.
    let valid: Vec<&SweepPoint> = points.iter().filter(|p| p.is_valid()).collect();
    let hull = tradeoff_frontier(&valid.iter().map(|p| (p.safety, p.efficiency)).collect::<Vec<_>>());
    let frontier = hull
        .iter()
        .map(|&(s, e)| {
            valid
                .iter()
                .find(|p| p.safety == s && p.efficiency == e)
                .copied()
                .cloned()
                .expect("frontier points come from the input")
        })
        .collect();
    let hybrid = hybrid_score(valid.iter().map(|p| (p.efficiency, p.any_collision())));
    Ok(SweepResult { points, frontier, hybrid })
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Upper-right convex hull of `(safety, efficiency)` points, both maximized.
///
/// Collinear hull points are kept. The result runs from the most efficient
/// point to the safest one: safety ascending, efficiency descending.
pub fn tradeoff_frontier(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    // Only the highest point at each safety value can be on the hull.
    pts.dedup_by(|later, earlier| later.0 == earlier.0);

    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) > 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let top = hull
        .iter()
        .enumerate()
        .fold(0, |best, (i, p)| if p.1 >= hull[best].1 { i } else { best });
    hull.split_off(top.min(hull.len()))
}
