//! Helpers shared by the integration and acceptance tests.
#![allow(dead_code)]

use nalgebra::DVector;
use rand::Rng;

use safectl::controllers::{Algorithm, ControllerConfig};
use safectl::dynamics::{ModelKind, RobotModel};
use safectl::safety_index::{lie_derivatives, ObstacleState, SafetyEvaluation, SafetyIndexParams};
use safectl::Point;

/// One random ball configuration with its evaluation.
#[derive(Debug, Clone)]
pub struct BallCase {
    pub cfg: ControllerConfig,
    pub x: DVector<f64>,
    pub obstacle: ObstacleState,
    pub eval: SafetyEvaluation,
    pub u0: DVector<f64>,
}

pub fn random_config(algorithm: Algorithm, rng: &mut impl Rng) -> ControllerConfig {
    let safety = SafetyIndexParams::new(rng.random_range(0.5..3.0), rng.random_range(0.1..2.0)).unwrap();
    ControllerConfig {
        c1: rng.random_range(0.1..10.0),
        c2: rng.random_range(0.5..50.0),
        eta: -rng.random_range(0.0..2.0),
        lambda: -rng.random_range(0.1..3.0),
        ..ControllerConfig::new(algorithm, safety)
    }
}

/// Draws a ball state, moving obstacle and reference with `|Lg_phi| > 1e-6`.
pub fn random_ball_case(algorithm: Algorithm, rng: &mut impl Rng) -> BallCase {
    let model = RobotModel::new(ModelKind::Ball);
    loop {
        let cfg = random_config(algorithm, rng);
        let x = DVector::from_fn(4, |i, _| {
            if i < 2 {
                rng.random_range(-4.0..4.0)
            } else {
                rng.random_range(-2.0..2.0)
            }
        });
        let obstacle = ObstacleState {
            position: Point::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), 0.0),
            velocity: Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0),
        };
        let u0 = DVector::from_fn(2, |_, _| rng.random_range(-5.0..5.0));
        let Ok(eval) = lie_derivatives(&model, &x, &obstacle, &cfg.safety) else { continue };
        if eval.lg_phi.norm() > 1e-6 {
            return BallCase { cfg, x, obstacle, eval, u0 };
        }
    }
}

/// Brute-force minimum-norm correction over a 401 x 401 grid on
/// `[-10, 10]^2` (step 0.05). `xi = None` means unconstrained.
pub fn grid_qp(u0: [f64; 2], lf: f64, lg: [f64; 2], xi: Option<f64>) -> Option<[f64; 2]> {
    let mut best: Option<(f64, [f64; 2])> = None;
    for i in 0..=400 {
        let a = -10.0 + 0.05 * i as f64;
        for j in 0..=400 {
            let b = -10.0 + 0.05 * j as f64;
            if let Some(xi) = xi {
                if lf + lg[0] * a + lg[1] * b > xi {
                    continue;
                }
            }
            let cost = (u0[0] - a).powi(2) + (u0[1] - b).powi(2);
            if best.is_none_or(|(c, _)| cost < c) {
                best = Some((cost, [a, b]));
            }
        }
    }
    best.map(|(_, u)| u)
}

/// The optimization form of a projection law: the constraint applies always
/// (BFM) or only once `phi >= 0` (SSA, SSS).
pub fn qp_oracle(cfg: &ControllerConfig, eval: &SafetyEvaluation, u0: &DVector<f64>) -> Option<[f64; 2]> {
    let xi = cfg.slack(eval.phi)?;
    let constrained = cfg.algorithm == Algorithm::Bfm || eval.phi >= 0.0;
    let lg = [eval.lg_phi[0], eval.lg_phi[1]];
    grid_qp([u0[0], u0[1]], eval.lf_phi, lg, constrained.then_some(xi))
}

pub fn max_abs_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax()
}

/// Component of `v` orthogonal to `dir`.
pub fn orthogonal_residual(v: &DVector<f64>, dir: &DVector<f64>) -> f64 {
    let n2 = dir.norm_squared();
    (v - dir * (v.dot(dir) / n2)).norm()
}
