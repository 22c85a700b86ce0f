//! Parametric human agents.
//!
//! The human is a planar double integrator (a ball) chasing its own goal
//! sequence with a PD law plus Gaussian control noise. The interactive
//! variant is additionally pushed away from the robot; the passive variant
//! replays a trajectory rolled out in advance, so it is identical no matter
//! which controller drives the robot.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::dynamics::{IntegratorConfig, ModelKind, RobotModel};
use crate::{mix_seed, Result};

/// Seed stream used for the human's control noise.
pub(crate) const HUMAN_NOISE_STREAM: u64 = 0x0048_554d_414e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HumanKind {
    /// Pre-rolled goal seeking, blind to the robot.
    Passive,
    /// Goal seeking, simulated online, blind to the robot.
    GoalSeeking,
    /// Goal seeking with repulsion from the robot.
    Interactive,
    /// Stands still at its start position.
    Stationary,
}

impl std::str::FromStr for HumanKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "passive" => Ok(HumanKind::Passive),
            "goal-seeking" | "goalseeking" => Ok(HumanKind::GoalSeeking),
            "interactive" => Ok(HumanKind::Interactive),
            "stationary" | "static" => Ok(HumanKind::Stationary),
            other => Err(crate::Error::InvalidInput(format!("unknown human model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HumanModel {
    pub kind: HumanKind,
    pub kp: f64,
    pub kd: f64,
    /// Acceleration limit of the PD term and of the repulsion, m/s^2.
    pub a_max: f64,
    /// Standard deviation of the control noise, m/s^2.
    pub noise_sigma: f64,
    /// Repulsion gain (interactive only), m^3/s^2.
    pub avoid_gain: f64,
    /// Goal acceptance radius, meters.
    pub goal_radius: f64,
}

impl HumanModel {
    pub fn new(kind: HumanKind) -> Self {
        Self {
            kind,
            kp: 1.5,
            kd: 2.0,
            a_max: 3.0,
            noise_sigma: 0.2,
            avoid_gain: 2.0,
            goal_radius: 0.5,
        }
    }

    pub fn counts_toward_efficiency(&self) -> bool {
        self.kind == HumanKind::Interactive
    }
}

impl Default for HumanModel {
    fn default() -> Self {
        Self::new(HumanKind::Passive)
    }
}

/// Planar human state `[px, py, vx, vy]`.
pub type HumanState = [f64; 4];

fn clamp2(v: [f64; 2], max: f64) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    if n > max {
        [v[0] * max / n, v[1] * max / n]
    } else {
        v
    }
}

/// Repulsive acceleration `c (p_h - p_r) / |p_h - p_r|^3`, capped at `a_max`.
pub fn repulsion(model: &HumanModel, human: [f64; 2], robot: [f64; 2]) -> [f64; 2] {
    let rel = [human[0] - robot[0], human[1] - robot[1]];
    let dist = rel[0].hypot(rel[1]);
    if dist == 0.0 {
        return [0.0, 0.0];
    }
    let scale = model.avoid_gain / (dist * dist * dist);
    clamp2([rel[0] * scale, rel[1] * scale], model.a_max)
}

/// Control of an online human agent toward `goal`.
///
/// `robot` is the closest robot point in the human's plane; it is only used
/// by the interactive model. Passive replay and the stationary model are
/// handled by [`HumanAgent`].
pub fn human_step(
    model: &HumanModel,
    human: &HumanState,
    robot: Option<[f64; 2]>,
    goal: [f64; 2],
    rng: &mut impl rand::Rng,
) -> [f64; 2] {
    if model.kind == HumanKind::Stationary {
        return [0.0, 0.0];
    }
    let pd = clamp2(
        [
            model.kp * (goal[0] - human[0]) - model.kd * human[2],
            model.kp * (goal[1] - human[1]) - model.kd * human[3],
        ],
        model.a_max,
    );
    let mut a = pd;
    if model.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, model.noise_sigma).expect("finite sigma");
        a[0] += noise.sample(rng);
        a[1] += noise.sample(rng);
    }
    if model.kind == HumanKind::Interactive {
        if let Some(r) = robot {
            let push = repulsion(model, [human[0], human[1]], r);
            a[0] += push[0];
            a[1] += push[1];
        }
    }
    a
}

/// A human trajectory with its own goal bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct HumanTrack {
    /// `frames + 1` states, starting with the initial state.
    pub states: Vec<HumanState>,
    pub controls: Vec<[f64; 2]>,
    /// `(frame after which the goal was reached, goal index)`.
    pub goal_events: Vec<(usize, usize)>,
}

/// Online or replayed human agent for one episode.
#[derive(Debug, Clone)]
pub struct HumanAgent {
    model: HumanModel,
    dynamics: RobotModel,
    integrator: IntegratorConfig,
    state: HumanState,
    goals: Vec<[f64; 2]>,
    goal_index: usize,
    rng: ChaCha8Rng,
    replay: Option<HumanTrack>,
    frame: usize,
}

impl HumanAgent {
    pub fn new(model: HumanModel, scenario: &Scenario, substeps: usize) -> Result<Self> {
        let integrator = IntegratorConfig::new(scenario.dt(), substeps)?;
        let start = scenario.start.human;
        let mut agent = Self {
            model,
            dynamics: RobotModel::new(ModelKind::Ball),
            integrator,
            state: [start[0], start[1], 0.0, 0.0],
            goals: scenario.goals.human.clone(),
            goal_index: 0,
            rng: ChaCha8Rng::seed_from_u64(mix_seed(scenario.seed, HUMAN_NOISE_STREAM)),
            replay: None,
            frame: 0,
        };
        if model.kind == HumanKind::Passive {
            agent.replay = Some(agent.clone().preroll(scenario.frames())?);
        }
        Ok(agent)
    }

    /// Rolls the goal-seeking law forward without any robot.
    fn preroll(mut self, frames: usize) -> Result<HumanTrack> {
        self.model.kind = HumanKind::GoalSeeking;
        let mut track = HumanTrack {
            states: vec![self.state],
            controls: Vec::with_capacity(frames),
            goal_events: Vec::new(),
        };
        for frame in 0..frames {
            let (control, reached) = self.advance_online(None)?;
            track.controls.push(control);
            track.states.push(self.state);
            if let Some(index) = reached {
                track.goal_events.push((frame, index));
            }
        }
        Ok(track)
    }

    fn advance_online(&mut self, robot: Option<[f64; 2]>) -> Result<([f64; 2], Option<usize>)> {
        let goal = self.goals[self.goal_index % self.goals.len()];
        let control = human_step(&self.model, &self.state, robot, goal, &mut self.rng);
        let x = nalgebra::DVector::from_row_slice(&self.state);
        let u = nalgebra::DVector::from_row_slice(&control);
        let next = self.dynamics.step(&x, &u, &self.integrator)?;
        self.state = [next[0], next[1], next[2], next[3]];
        let mut reached = None;
        if self.model.kind != HumanKind::Stationary
            && (self.state[0] - goal[0]).hypot(self.state[1] - goal[1]) < self.model.goal_radius
        {
            reached = Some(self.goal_index);
            self.goal_index += 1;
        }
        Ok((control, reached))
    }

    pub fn state(&self) -> HumanState {
        self.state
    }

    pub fn current_goal(&self) -> [f64; 2] {
        self.goals[self.goal_index % self.goals.len()]
    }

    /// Advances one frame. Returns the applied control and the index of a
    /// goal reached during the frame, if any.
    pub fn advance(&mut self, robot: Option<[f64; 2]>) -> Result<([f64; 2], Option<usize>)> {
        let frame = self.frame;
        self.frame += 1;
        if let Some(track) = &self.replay {
            let control = track.controls[frame];
            self.state = track.states[frame + 1];
            let reached = track
                .goal_events
                .iter()
                .find(|(f, _)| *f == frame)
                .map(|(_, index)| *index);
            if let Some(index) = reached {
                self.goal_index = index + 1;
            }
            return Ok((control, reached));
        }
        self.advance_online(robot)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::scenario::{generate_scenarios, ScenarioLayout};

    fn scenario() -> Scenario {
        generate_scenarios(4, 1, &ScenarioLayout::for_model(&RobotModel::new(ModelKind::Ball)))
            .unwrap()
            .remove(0)
    }

    #[test]
    fn goal_seeking_at_rest_on_goal_is_zero() {
        let mut m = HumanModel::new(HumanKind::GoalSeeking);
        m.noise_sigma = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = human_step(&m, &[1.0, 2.0, 0.0, 0.0], None, [1.0, 2.0], &mut rng);
        assert_eq!(a, [0.0, 0.0]);
    }

    #[test]
    fn repulsion_decays_with_distance() {
        let m = HumanModel::new(HumanKind::Interactive);
        let far = repulsion(&m, [0.0, 0.0], [10.5, 0.0]);
        assert!(far[0].hypot(far[1]) < 1e-2 * m.a_max);
        let near = repulsion(&m, [0.0, 0.0], [0.1, 0.0]);
        assert!((near[0].hypot(near[1]) - m.a_max).abs() < 1e-12);
        assert!(near[0] < 0.0);
    }

    #[test]
    fn passive_replay_ignores_the_robot() {
        let sc = scenario();
        let model = HumanModel::new(HumanKind::Passive);
        let mut a = HumanAgent::new(model, &sc, 10).unwrap();
        let mut b = HumanAgent::new(model, &sc, 10).unwrap();
        for i in 0..sc.frames() {
            let ra = a.advance(Some([0.0, 0.0])).unwrap();
            let rb = b.advance(Some([i as f64, -3.0])).unwrap();
            assert_eq!(ra, rb);
            assert_eq!(a.state(), b.state());
        }
    }

    #[test]
    fn passive_replay_matches_online_goal_seeking() {
        let sc = scenario();
        let mut passive = HumanAgent::new(HumanModel::new(HumanKind::Passive), &sc, 10).unwrap();
        let mut online = HumanAgent::new(HumanModel::new(HumanKind::GoalSeeking), &sc, 10).unwrap();
        let mut goals = 0;
        for _ in 0..sc.frames() {
            let (_, rp) = passive.advance(None).unwrap();
            let (_, ro) = online.advance(None).unwrap();
            assert_eq!(rp, ro);
            assert_eq!(passive.state(), online.state());
            goals += usize::from(rp.is_some());
        }
        assert!(goals >= 2, "human reached {goals} goals");
    }

    #[test]
    fn stationary_human_stays_put() {
        let sc = scenario();
        let mut h = HumanAgent::new(HumanModel::new(HumanKind::Stationary), &sc, 10).unwrap();
        for _ in 0..50 {
            h.advance(Some([0.0, 0.0])).unwrap();
        }
        let s = h.state();
        assert_eq!([s[0], s[1]], sc.start.human);
    }
}
