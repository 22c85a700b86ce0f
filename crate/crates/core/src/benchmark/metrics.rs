use serde::{Deserialize, Serialize};

use super::episode::EpisodeLog;
use super::human::HumanKind;

/// Safety-score threshold, meters.
pub const DEFAULT_SAFETY_THRESHOLD: f64 = 2.0;

/// Floor for logged distances so a touching pair stays finite.
const MIN_SCORED_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub efficiency: f64,
    pub safety: f64,
    pub collided: bool,
    pub intervention_rate: f64,
    pub min_distance: f64,
}

/// Goals reached in the episode. With an interactive human, goals reached
/// by the human count too.
pub fn efficiency_score(log: &EpisodeLog) -> usize {
    if log.human == HumanKind::Interactive {
        log.robot_goals() + log.human_goals()
    } else {
        log.robot_goals()
    }
}

/// Sum over frames of `-min(0, ln(d / d_s)) * d_dot`. Not weighted by dt,
/// so scores only compare across runs at the same fps.
pub fn safety_score(log: &EpisodeLog, d_s: f64) -> f64 {
    safety_score_from(log.frames.iter().map(|f| (f.d, f.d_dot)), d_s)
}

pub fn safety_score_from(samples: impl IntoIterator<Item = (f64, f64)>, d_s: f64) -> f64 {
    assert!(d_s > 0.0, "safety threshold must be positive");
    samples
        .into_iter()
        .map(|(d, d_dot)| {
            let ratio = (d.max(MIN_SCORED_DISTANCE) / d_s).ln();
            -ratio.min(0.0) * d_dot
        })
        .sum()
}

/// Best mean efficiency among collision-free parameter points.
pub fn hybrid_score(results: impl IntoIterator<Item = (f64, bool)>) -> Option<f64> {
    results
        .into_iter()
        .filter(|(_, collided)| !collided)
        .map(|(eff, _)| eff)
        .fold(None, |best: Option<f64>, e| Some(best.map_or(e, |b| b.max(e))))
}

pub fn evaluate(log: &EpisodeLog, d_s: f64) -> MetricsReport {
    let frames = log.frames.len().max(1) as f64;
    MetricsReport {
        efficiency: efficiency_score(log) as f64,
        safety: safety_score(log, d_s),
        collided: log.collided(),
        intervention_rate: log.frames.iter().filter(|f| f.intervened).count() as f64 / frames,
        min_distance: log.min_distance(),
    }
}
