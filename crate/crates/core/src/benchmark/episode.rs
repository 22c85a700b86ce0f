//! The closed-loop episode: sense, evaluate, control, integrate, score.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::human::{HumanAgent, HumanKind, HumanModel, HumanState};
use super::scenario::Scenario;
use crate::controllers::{reference_controller, unified_control, Algorithm, ControllerConfig, ReferenceGains};
use crate::dynamics::{IntegratorConfig, ModelKind, RobotModel};
use crate::estimation::{EstimationConfig, PointTracker};
use crate::safety_index::{critical_pair, lie_derivatives, phi_value, ObstacleState};
use crate::{mix_seed, Error, Point, Result};

const SENSOR_STREAM: u64 = 0x5345_4e53;

/// Any state component beyond this magnitude counts as a numerical blowup.
pub const STATE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSettings {
    pub substeps: usize,
    pub gains: ReferenceGains,
    /// Goal acceptance radius, meters.
    pub goal_radius: f64,
    /// Distance below which the robot and human are in collision, meters.
    pub collision_distance: f64,
    pub human: HumanModel,
    pub estimation: EstimationConfig,
}

impl Default for EpisodeSettings {
    fn default() -> Self {
        Self {
            substeps: 10,
            gains: ReferenceGains::default(),
            goal_radius: 0.5,
            collision_distance: 0.25,
            human: HumanModel::default(),
            estimation: EstimationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agent {
    Robot,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EpisodeEvent {
    GoalReached { agent: Agent, index: usize, t: f64 },
    Collision { t: f64 },
}

/// Everything logged at one control frame. `d` and `d_dot` are ground
/// truth; `phi` and the control fields are what the controller saw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: usize,
    pub t: f64,
    pub robot_state: Vec<f64>,
    pub human_state: HumanState,
    pub u0: Vec<f64>,
    pub u: Vec<f64>,
    pub phi: f64,
    pub d: f64,
    pub d_dot: f64,
    pub intervened: bool,
    pub degenerate: bool,
    pub xi: Option<f64>,
    pub predicted_phi_dot: f64,
    pub frozen: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub model: ModelKind,
    /// `None` for the unfiltered reference controller.
    pub algorithm: Option<Algorithm>,
    pub human: HumanKind,
    pub scenario_seed: u64,
    pub frames: Vec<FrameRecord>,
    pub events: Vec<EpisodeEvent>,
    /// Set when the episode aborted on a numerical failure.
    pub invalid: Option<String>,
}

impl EpisodeLog {
    pub fn robot_goals(&self) -> usize {
        self.goals_of(Agent::Robot)
    }

    pub fn human_goals(&self) -> usize {
        self.goals_of(Agent::Human)
    }

    fn goals_of(&self, who: Agent) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, EpisodeEvent::GoalReached { agent, .. } if *agent == who))
            .count()
    }

    pub fn collided(&self) -> bool {
        self.events.iter().any(|e| matches!(e, EpisodeEvent::Collision { .. }))
    }

    pub fn min_distance(&self) -> f64 {
        self.frames.iter().map(|f| f.d).fold(f64::INFINITY, f64::min)
    }
}

fn planar(p: &Point) -> [f64; 2] {
    [p.x, p.y]
}

struct Sensors {
    perfect: bool,
    noise: Option<Normal<f64>>,
    rng: ChaCha8Rng,
    robot: Option<PointTracker>,
    human: PointTracker,
}

impl Sensors {
    fn new(cfg: &EstimationConfig, model: &RobotModel, scenario: &Scenario, stream: u64) -> Result<Self> {
        let dt = scenario.dt();
        let noise = if cfg.position_sigma > 0.0 {
            Some(Normal::new(0.0, cfg.position_sigma).map_err(|e| Error::Config(e.to_string()))?)
        } else {
            None
        };
        let sigma = cfg.position_sigma.max(1e-6);
        Ok(Self {
            perfect: cfg.perfect_sensing,
            noise,
            rng: ChaCha8Rng::seed_from_u64(mix_seed(scenario.seed, stream)),
            robot: (model.kind() == ModelKind::Ball)
                .then(|| PointTracker::new(dt, cfg.robot_accel_sigma, sigma)),
            human: PointTracker::new(dt, cfg.human_accel_sigma, sigma),
        })
    }

    fn measure(&mut self, p: [f64; 2]) -> [f64; 2] {
        match &self.noise {
            Some(n) => [p[0] + n.sample(&mut self.rng), p[1] + n.sample(&mut self.rng)],
            None => p,
        }
    }

    /// Estimated robot state and human state.
    fn sense(
        &mut self,
        x: &DVector<f64>,
        last_u: &DVector<f64>,
        human: &HumanState,
    ) -> Result<(DVector<f64>, HumanState)> {
        if self.perfect {
            return Ok((x.clone(), *human));
        }
        let x_hat = match self.robot.as_mut() {
            Some(tracker) => {
                let z = match &self.noise {
                    Some(n) => [x[0] + n.sample(&mut self.rng), x[1] + n.sample(&mut self.rng)],
                    None => [x[0], x[1]],
                };
                let est = tracker.observe([last_u[0], last_u[1]], z)?;
                DVector::from_row_slice(&est)
            }
            None => x.clone(),
        };
        let z = self.measure([human[0], human[1]]);
        let h = self.human.observe([0.0, 0.0], z)?;
        Ok((x_hat, h))
    }
}

/// Runs one episode with the safe controller `cfg` filtering the reference.
pub fn run_episode(
    model: &RobotModel,
    cfg: &ControllerConfig,
    scenario: &Scenario,
    settings: &EpisodeSettings,
) -> Result<EpisodeLog> {
    cfg.validate()?;
    simulate(model, Some(cfg), scenario, settings)
}

/// Runs one episode with the bare reference controller.
pub fn run_reference_episode(
    model: &RobotModel,
    scenario: &Scenario,
    settings: &EpisodeSettings,
) -> Result<EpisodeLog> {
    simulate(model, None, scenario, settings)
}

fn simulate(
    model: &RobotModel,
    cfg: Option<&ControllerConfig>,
    scenario: &Scenario,
    settings: &EpisodeSettings,
) -> Result<EpisodeLog> {
    scenario.validate()?;
    let integrator = IntegratorConfig::new(scenario.dt(), settings.substeps)?;
    let dt = scenario.dt();
    let plane = model.task_plane_height();
    let mut human = HumanAgent::new(settings.human, scenario, settings.substeps)?;
    // One noise stream per scenario, shared by every controller and the
    // baseline: draws never depend on the control, so runs differ only
    // through the controller.
    let mut sensors = Sensors::new(&settings.estimation, model, scenario, SENSOR_STREAM)?;

    let mut x = model.initial_state(scenario.start.robot);
    let mut last_u = DVector::zeros(model.n_u());
    let mut goal_index = 0;
    let mut frozen = false;
    let mut log = EpisodeLog {
        model: model.kind(),
        algorithm: cfg.map(|c| c.algorithm),
        human: settings.human.kind,
        scenario_seed: scenario.seed,
        frames: Vec::with_capacity(scenario.frames()),
        events: Vec::new(),
        invalid: None,
    };
    let robot_goal = |i: usize| {
        let g = scenario.goals.robot[i % scenario.goals.robot.len()];
        Point::new(g[0], g[1], plane)
    };

    for frame in 0..scenario.frames() {
        let t = frame as f64 * dt;
        let h = human.state();
        let truth = ObstacleState::planar([h[0], h[1]], [h[2], h[3]], plane);
        let (d, d_dot, robot_point) = match critical_pair(model, &x, &truth) {
            Ok(pair) => (pair.d, pair.d_dot, planar(&pair.c_r)),
            Err(Error::CoincidentPoints) => (0.0, 0.0, [h[0], h[1]]),
            Err(e) => return Err(e),
        };
        if !frozen && d < settings.collision_distance {
            frozen = true;
            x = model.at_rest(&x);
            log.events.push(EpisodeEvent::Collision { t });
        }

        let (x_hat, h_hat) = sensors.sense(&x, &last_u, &h)?;
        let estimate = ObstacleState::planar([h_hat[0], h_hat[1]], [h_hat[2], h_hat[3]], plane);
        let safety = cfg.map(|c| c.safety).unwrap_or_default();
        let mut record = FrameRecord {
            frame,
            t,
            robot_state: x.iter().copied().collect(),
            human_state: h,
            u0: vec![0.0; model.n_u()],
            u: vec![0.0; model.n_u()],
            phi: phi_value(&safety, d, d_dot),
            d,
            d_dot,
            intervened: false,
            degenerate: false,
            xi: None,
            predicted_phi_dot: 0.0,
            frozen,
        };

        let u = if frozen {
            DVector::zeros(model.n_u())
        } else {
            let u0 = reference_controller(model, &x_hat, &robot_goal(goal_index), &settings.gains);
            record.u0 = u0.iter().copied().collect();
            let u = match cfg.map(|c| (c, lie_derivatives(model, &x_hat, &estimate, &c.safety))) {
                Some((c, Ok(eval))) => {
                    let out = unified_control(c, &u0, &eval);
                    record.phi = eval.phi;
                    record.intervened = out.intervened;
                    record.degenerate = out.diagnostics.degenerate;
                    record.xi = out.diagnostics.xi;
                    record.predicted_phi_dot = out.diagnostics.predicted_phi_dot;
                    out.u
                }
                Some((_, Err(_))) => {
                    record.degenerate = true;
                    u0
                }
                None => u0,
            };
            record.u = u.iter().copied().collect();
            u
        };
        log.frames.push(record);

        if !frozen {
            match model.step(&x, &u, &integrator) {
                Ok(next) if next.iter().all(|v| v.abs() <= STATE_LIMIT) => x = next,
                Ok(next) => {
                    log.invalid = Some(format!("frame {frame}: {}", Error::blowup(&next)));
                    break;
                }
                Err(e) => {
                    log.invalid = Some(format!("frame {frame}: {e}"));
                    break;
                }
            }
        }
        last_u = u;
        let after = t + dt;
        match human.advance(Some(robot_point)) {
            Ok((_, Some(index))) => log.events.push(EpisodeEvent::GoalReached {
                agent: Agent::Human,
                index,
                t: after,
            }),
            Ok(_) => {}
            Err(e) => {
                log.invalid = Some(format!("frame {frame}: human: {e}"));
                break;
            }
        }
        if !frozen && (model.end_effector(&x) - robot_goal(goal_index)).norm() < settings.goal_radius {
            log.events.push(EpisodeEvent::GoalReached {
                agent: Agent::Robot,
                index: goal_index,
                t: after,
            });
            goal_index += 1;
        }
    }
    Ok(log)
}
