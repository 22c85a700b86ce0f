//! Browser bindings for the safe-control library.
//!
//! Three operations back the demo page in `www/`: a phase field of one
//! controller, a ball episode against a walking human, and all five
//! controllers evaluated at a single state. Results cross the boundary as
//! flat `Float64Array`s; the layouts are documented on each function.

use nalgebra::DVector;
use wasm_bindgen::prelude::*;

use safectl::benchmark::{
    evaluate, generate_scenarios, phase_portrait, run_episode, EpisodeSettings, PhaseReference, PhaseSlice,
    ScenarioLayout,
};
use safectl::controllers::{reference_controller, unified_control, Algorithm, ControllerConfig, ReferenceGains};
use safectl::dynamics::{ModelKind, RobotModel};
use safectl::safety_index::{lie_derivatives, ObstacleState, SafetyIndexParams};
use safectl::Point;

/// Values per cell returned by [`phase_field`].
pub const PHASE_STRIDE: usize = 5;
/// Values per frame returned by [`Rollout::frames`].
pub const FRAME_STRIDE: usize = 6;

fn controller(algorithm: &str, parameter: f64, d_min: f64, k: f64) -> Result<ControllerConfig, String> {
    let algorithm: Algorithm = algorithm.parse().map_err(|e: safectl::Error| e.to_string())?;
    let safety = SafetyIndexParams::new(d_min, k).map_err(|e| e.to_string())?;
    let cfg = ControllerConfig::new(algorithm, safety).with_parameter(parameter);
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

pub fn phase_field_impl(
    algorithm: &str,
    parameter: f64,
    d_min: f64,
    k: f64,
    velocity: [f64; 2],
    goal: [f64; 2],
    resolution: usize,
) -> Result<Vec<f64>, String> {
    if resolution == 0 || resolution > 200 {
        return Err(format!("resolution must be in 1..=200, got {resolution}"));
    }
    let cfg = controller(algorithm, parameter, d_min, k)?;
    let slice = PhaseSlice {
        velocity,
        reference: PhaseReference::Goal { goal },
        ..PhaseSlice::default()
    };
    let cells = phase_portrait(&cfg, &slice, (resolution, resolution)).map_err(|e| e.to_string())?;
    Ok(cells
        .iter()
        .flat_map(|c| {
            let [dx, dy] = c.delta();
            [c.x, c.y, c.phi, dx, dy]
        })
        .collect())
}

/// Controller correction over a grid of ball positions in `[-3, 3]^2`
/// around an obstacle at the origin, with the ball moving at `(vx, vy)`
/// under a PD reference toward `(gx, gy)`.
///
/// Returns `[x, y, phi, du_x, du_y]` per cell.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn phase_field(
    algorithm: &str,
    parameter: f64,
    d_min: f64,
    k: f64,
    vx: f64,
    vy: f64,
    gx: f64,
    gy: f64,
    resolution: usize,
) -> Result<Vec<f64>, JsError> {
    phase_field_impl(algorithm, parameter, d_min, k, [vx, vy], [gx, gy], resolution).map_err(|e| JsError::new(&e))
}

/// A finished ball episode.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Rollout {
    frames: Vec<f64>,
    goals: usize,
    collided: bool,
    min_distance: f64,
    safety: f64,
    interventions: f64,
    invalid: bool,
}

#[wasm_bindgen]
impl Rollout {
    /// `[robot_x, robot_y, human_x, human_y, phi, intervened]` per frame.
    pub fn frames(&self) -> Vec<f64> {
        self.frames.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn goals(&self) -> usize {
        self.goals
    }

    #[wasm_bindgen(getter)]
    pub fn collided(&self) -> bool {
        self.collided
    }

    #[wasm_bindgen(getter, js_name = minDistance)]
    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    #[wasm_bindgen(getter)]
    pub fn safety(&self) -> f64 {
        self.safety
    }

    /// Fraction of frames where the controller changed the reference.
    #[wasm_bindgen(getter)]
    pub fn interventions(&self) -> f64 {
        self.interventions
    }

    /// True when the episode stopped on a numerical failure.
    #[wasm_bindgen(getter)]
    pub fn invalid(&self) -> bool {
        self.invalid
    }
}

pub fn simulate_impl(algorithm: &str, parameter: f64, d_min: f64, k: f64, seed: u32, seconds: f64) -> Result<Rollout, String> {
    let cfg = controller(algorithm, parameter, d_min, k)?;
    let model = RobotModel::new(ModelKind::Ball);
    let layout = ScenarioLayout {
        duration: seconds,
        ..ScenarioLayout::for_model(&model)
    };
    let scenario = generate_scenarios(u64::from(seed), 1, &layout)
        .map_err(|e| e.to_string())?
        .remove(0);
    let log = run_episode(&model, &cfg, &scenario, &EpisodeSettings::default()).map_err(|e| e.to_string())?;
    let metrics = evaluate(&log, 2.0);
    Ok(Rollout {
        frames: log
            .frames
            .iter()
            .flat_map(|f| {
                let h = f.human_state;
                [f.robot_state[0], f.robot_state[1], h[0], h[1], f.phi, f64::from(u8::from(f.intervened))]
            })
            .collect(),
        goals: log.robot_goals(),
        collided: metrics.collided,
        min_distance: metrics.min_distance,
        safety: metrics.safety,
        interventions: metrics.intervention_rate,
        invalid: log.invalid.is_some(),
    })
}

/// Runs one ball episode of `seconds` length on the scenario drawn from
/// `seed`, with the passive human and noisy sensing.
#[wasm_bindgen]
pub fn simulate(algorithm: &str, parameter: f64, d_min: f64, k: f64, seed: u32, seconds: f64) -> Result<Rollout, JsError> {
    simulate_impl(algorithm, parameter, d_min, k, seed, seconds).map_err(|e| JsError::new(&e))
}

pub fn compare_impl(
    position: [f64; 2],
    velocity: [f64; 2],
    obstacle: [f64; 2],
    u0: [f64; 2],
    d_min: f64,
    k: f64,
) -> Result<Vec<f64>, String> {
    let safety = SafetyIndexParams::new(d_min, k).map_err(|e| e.to_string())?;
    let x = DVector::from_vec(vec![position[0], position[1], velocity[0], velocity[1]]);
    let obstacle = ObstacleState::fixed(Point::new(obstacle[0], obstacle[1], 0.0));
    let eval = lie_derivatives(&RobotModel::new(ModelKind::Ball), &x, &obstacle, &safety).map_err(|e| e.to_string())?;
    let u0 = DVector::from_vec(u0.to_vec());
    let mut out = vec![eval.phi];
    for alg in Algorithm::ALL {
        let u = unified_control(&ControllerConfig::new(alg, safety), &u0, &eval).u;
        out.extend([u[0], u[1]]);
    }
    Ok(out)
}

/// Every controller, at its default parameter, at one ball state next to
/// a static obstacle.
///
/// Returns `[phi, u_x, u_y, ...]` with one `(u_x, u_y)` pair per algorithm
/// in the order of [`algorithms`].
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn compare(px: f64, py: f64, vx: f64, vy: f64, ox: f64, oy: f64, u0x: f64, u0y: f64, d_min: f64, k: f64) -> Result<Vec<f64>, JsError> {
    compare_impl([px, py], [vx, vy], [ox, oy], [u0x, u0y], d_min, k).map_err(|e| JsError::new(&e))
}

/// The default PD reference control of the ball toward `(gx, gy)`.
#[wasm_bindgen]
pub fn reference(px: f64, py: f64, vx: f64, vy: f64, gx: f64, gy: f64) -> Vec<f64> {
    let x = DVector::from_vec(vec![px, py, vx, vy]);
    let model = RobotModel::new(ModelKind::Ball);
    reference_controller(&model, &x, &Point::new(gx, gy, 0.0), &ReferenceGains::default())
        .iter()
        .copied()
        .collect()
}

/// Algorithm names in the order used by [`compare`].
#[wasm_bindgen]
pub fn algorithms() -> Vec<String> {
    Algorithm::ALL.iter().map(|a| a.name().to_string()).collect()
}

/// Default value of each algorithm's parameter, in the order of [`algorithms`].
#[wasm_bindgen(js_name = defaultParameters)]
pub fn default_parameters() -> Vec<f64> {
    Algorithm::ALL
        .iter()
        .map(|&a| ControllerConfig::new(a, SafetyIndexParams::default()).parameter())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_field_has_one_row_per_cell() {
        let field = phase_field_impl("ssa", 0.0, 1.5, 1.0, [1.0, 0.0], [4.0, 0.0], 20).unwrap();
        assert_eq!(field.len(), 20 * 20 * PHASE_STRIDE);
        for cell in field.chunks(PHASE_STRIDE) {
            if cell[2] < 0.0 {
                assert_eq!((cell[3], cell[4]), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn bad_inputs_are_reported() {
        assert!(phase_field_impl("nope", 0.0, 1.5, 1.0, [1.0, 0.0], [4.0, 0.0], 10).is_err());
        assert!(phase_field_impl("ssa", 0.5, 1.5, 1.0, [1.0, 0.0], [4.0, 0.0], 10).is_err());
        assert!(phase_field_impl("ssa", 0.0, 1.5, 1.0, [1.0, 0.0], [4.0, 0.0], 0).is_err());
        assert!(simulate_impl("sss", -1.0, -1.0, 1.0, 0, 5.0).is_err());
        assert!(compare_impl([0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0], 1.5, 1.0).is_err());
    }

    #[test]
    fn rollout_is_deterministic() {
        let a = simulate_impl("sss", -1.0, 1.5, 1.0, 4, 5.0).unwrap();
        let b = simulate_impl("sss", -1.0, 1.5, 1.0, 4, 5.0).unwrap();
        assert_eq!(a.frames, b.frames);
        assert_eq!(a.frames.len(), 100 * FRAME_STRIDE);
        assert!(!a.invalid);
    }

    #[test]
    fn comparison_matches_the_worked_state() {
        let out = compare_impl([1.0, 0.0], [-1.0, 0.0], [0.0, 0.0], [0.0, 0.0], 1.5, 1.0).unwrap();
        assert_eq!(out.len(), 1 + 2 * Algorithm::ALL.len());
        assert!((out[0] - 2.25).abs() < 1e-12);
        let at = |alg: Algorithm| {
            let i = Algorithm::ALL.iter().position(|&a| a == alg).unwrap();
            [out[1 + 2 * i], out[2 + 2 * i]]
        };
        assert!((at(Algorithm::Ssa)[0] - 2.0).abs() < 1e-9);
        assert!((at(Algorithm::Bfm)[0] - 4.25).abs() < 1e-9);
        assert!((at(Algorithm::Sma)[0] - 3.0).abs() < 1e-9);
        assert_eq!(algorithms().len(), default_parameters().len());
        assert_eq!(reference(4.0, 0.0, 0.0, 0.0, 4.0, 0.0), vec![0.0, 0.0]);
    }
}
