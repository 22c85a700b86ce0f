use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ModelKind, RobotModel};
use crate::{mix_seed, Error, Result};

/// Axis-aligned planar bounds, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Workspace {
    pub fn square(half_width: f64) -> Self {
        Self {
            min: [-half_width; 2],
            max: [half_width; 2],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (0..2).all(|i| {
            self.min[i].is_finite() && self.max[i].is_finite() && self.max[i] > self.min[i]
        });
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("degenerate workspace {self:?}")))
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (0..2).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    /// The workspace shrunk by `fraction` of its extent on every side.
    pub fn shrunk(&self, fraction: f64) -> Self {
        let mut out = *self;
        for i in 0..2 {
            let pad = (self.max[i] - self.min[i]) * fraction;
            out.min[i] += pad;
            out.max[i] -= pad;
        }
        out
    }

    fn sample(&self, rng: &mut impl Rng) -> [f64; 2] {
        [
            rng.random_range(self.min[0]..=self.max[0]),
            rng.random_range(self.min[1]..=self.max[1]),
        ]
    }
}

/// Where robot goals are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GoalRegion {
    /// The workspace interior (after the margin).
    Interior,
    /// A ring around the arm base, uniform by area.
    Annulus { inner: f64, outer: f64 },
}

/// Everything that shapes scenario generation for one robot model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioLayout {
    pub workspace: Workspace,
    pub robot_goals: GoalRegion,
    /// Fraction of the extent kept clear at every border.
    pub margin: f64,
    pub goals_per_agent: usize,
    pub duration: f64,
    pub fps: f64,
    /// Minimum initial distance from the human to the robot start (point
    /// robots) or to the arm base (arms).
    pub start_clearance: f64,
    /// Whether the robot start is sampled (point robots) or fixed (arms).
    pub sample_robot_start: bool,
}

impl ScenarioLayout {
    pub fn for_model(model: &RobotModel) -> Self {
        let base = Self {
            workspace: Workspace::square(5.0),
            robot_goals: GoalRegion::Interior,
            margin: 0.1,
            goals_per_agent: 40,
            duration: 30.0,
            fps: 20.0,
            start_clearance: 3.5,
            sample_robot_start: true,
        };
        match model.kind() {
            ModelKind::Ball | ModelKind::Unicycle => base,
            ModelKind::Scara => Self {
                workspace: Workspace::square(3.5),
                robot_goals: GoalRegion::Annulus {
                    inner: 0.6,
                    outer: 0.9 * model.reach(),
                },
                start_clearance: model.reach() + 0.8,
                sample_robot_start: false,
                ..base
            },
            ModelKind::Arm4Dof => Self {
                workspace: Workspace::square(4.0),
                robot_goals: GoalRegion::Annulus {
                    inner: 0.8,
                    outer: 0.8 * model.reach(),
                },
                start_clearance: model.reach() + 0.5,
                sample_robot_start: false,
                ..base
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentGoals {
    pub robot: Vec<[f64; 2]>,
    pub human: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentStarts {
    pub robot: [f64; 2],
    pub human: [f64; 2],
}

/// One test scenario: goal sequences for both agents plus timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub goals: AgentGoals,
    pub start: AgentStarts,
    /// Seconds.
    pub duration: f64,
    /// Frames per second.
    pub fps: f64,
    pub workspace: Workspace,
}

impl Scenario {
    pub fn frames(&self) -> usize {
        (self.duration * self.fps).round() as usize
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.fps
    }

    pub fn validate(&self) -> Result<()> {
        self.workspace.validate()?;
        if !(self.duration > 0.0 && self.fps > 0.0) {
            return Err(Error::InvalidInput("duration and fps must be positive".into()));
        }
        if self.goals.robot.is_empty() || self.goals.human.is_empty() {
            return Err(Error::InvalidInput("scenario needs goals for both agents".into()));
        }
        Ok(())
    }
}

fn sample_goal(region: GoalRegion, interior: &Workspace, rng: &mut impl Rng) -> [f64; 2] {
    match region {
        GoalRegion::Interior => interior.sample(rng),
        GoalRegion::Annulus { inner, outer } => {
            let r = rng.random_range(inner * inner..=outer * outer).sqrt();
            let angle = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            [r * angle.cos(), r * angle.sin()]
        }
    }
}

fn generate_one(seed: u64, layout: &ScenarioLayout) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let interior = layout.workspace.shrunk(layout.margin);
    let robot_start = if layout.sample_robot_start {
        interior.sample(&mut rng)
    } else {
        [0.0, 0.0]
    };
    let mut human_start = interior.sample(&mut rng);
    let far_enough = |p: [f64; 2]| {
        (p[0] - robot_start[0]).hypot(p[1] - robot_start[1]) >= layout.start_clearance
    };
    let mut attempts = 0;
    while !far_enough(human_start) && attempts < 1000 {
        human_start = interior.sample(&mut rng);
        attempts += 1;
    }
    if !far_enough(human_start) {
        // Fall back to the interior corner farthest from the robot.
        human_start = [
            if robot_start[0] > 0.0 { interior.min[0] } else { interior.max[0] },
            if robot_start[1] > 0.0 { interior.min[1] } else { interior.max[1] },
        ];
    }
    let robot = (0..layout.goals_per_agent)
        .map(|_| sample_goal(layout.robot_goals, &interior, &mut rng))
        .collect();
    let human = (0..layout.goals_per_agent)
        .map(|_| interior.sample(&mut rng))
        .collect();
    Scenario {
        seed,
        goals: AgentGoals { robot, human },
        start: AgentStarts {
            robot: robot_start,
            human: human_start,
        },
        duration: layout.duration,
        fps: layout.fps,
        workspace: layout.workspace,
    }
}

/// Deterministic scenario set: scenario `i` is seeded from
/// `(master_seed, i)`, so sets with different counts share a prefix.
pub fn generate_scenarios(master_seed: u64, n: usize, layout: &ScenarioLayout) -> Result<Vec<Scenario>> {
    if n == 0 {
        return Err(Error::InvalidInput("scenario count must be at least 1".into()));
    }
    layout.workspace.validate()?;
    if !(0.0..0.5).contains(&layout.margin) {
        return Err(Error::InvalidInput(format!("margin {} out of range", layout.margin)));
    }
    if layout.goals_per_agent == 0 {
        return Err(Error::InvalidInput("goals_per_agent must be positive".into()));
    }
    Ok((0..n as u64)
        .map(|i| generate_one(mix_seed(master_seed, i), layout))
        .collect())
}
