//! The interactive-safety benchmark: scenarios, human agents, closed-loop
//! episodes, metrics, parameter sweeps and phase portraits.

pub mod episode;
pub mod human;
pub mod metrics;
pub mod phase;
pub mod scenario;
pub mod sweep;

pub use episode::{run_episode, run_reference_episode, EpisodeLog, EpisodeSettings, FrameRecord};
pub use human::{HumanKind, HumanModel};
pub use metrics::{efficiency_score, evaluate, hybrid_score, safety_score, MetricsReport};
pub use phase::{phase_portrait, PhaseCell, PhaseReference, PhaseSlice};
pub use scenario::{generate_scenarios, Scenario, ScenarioLayout};
pub use sweep::{run_batch, tradeoff_frontier, tradeoff_sweep, SweepGrid, SweepPoint, SweepResult, SweepSpec};
