//! The safety index `phi = d_min^2 - d^2 - k * d_dot` and its derivatives.
//!
//! `phi` is a function of the robot state only: the obstacle is a frozen
//! parameter at each evaluation, and the critical-point velocity is taken as
//! `J * f(x)`, which does not depend on the control because every model
//! actuates accelerations.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ArcParam, ModelKind, RobotModel};
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyIndexParams {
    /// Minimum required distance, meters.
    pub d_min: f64,
    /// Weight on the approach rate, seconds.
    pub k: f64,
}

impl SafetyIndexParams {
    pub fn new(d_min: f64, k: f64) -> Result<Self> {
        let params = Self { d_min, k };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_min > 0.0 && self.d_min.is_finite()) {
            return Err(Error::Config(format!("d_min must be positive, got {}", self.d_min)));
        }
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(Error::Config(format!("k must be non-negative, got {}", self.k)));
        }
        Ok(())
    }
}

impl Default for SafetyIndexParams {
    fn default() -> Self {
        Self { d_min: 1.5, k: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleState {
    pub position: Point,
    pub velocity: Point,
}

impl ObstacleState {
    pub fn fixed(position: Point) -> Self {
        Self {
            position,
            velocity: Point::zeros(),
        }
    }

    pub fn planar(position: [f64; 2], velocity: [f64; 2], height: f64) -> Self {
        Self {
            position: Point::new(position[0], position[1], height),
            velocity: Point::new(velocity[0], velocity[1], 0.0),
        }
    }
}

/// Closest points between robot and obstacle, with distance and its rate.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPair {
    pub c_r: Point,
    pub c_o: Point,
    pub c_r_dot: Point,
    pub d: f64,
    pub d_dot: f64,
    pub arc: ArcParam,
    /// `3 x n_x` Jacobian of `c_r` at the frozen arc parameter.
    pub jacobian: nalgebra::DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SafetyEvaluation {
    pub phi: f64,
    pub grad_phi: DVector<f64>,
    /// Drift contribution to `phi_dot`.
    pub lf_phi: f64,
    /// Control sensitivity of `phi_dot`, length `n_u`.
    pub lg_phi: DVector<f64>,
}

impl SafetyEvaluation {
    /// `phi_dot` predicted for a control `u`.
    pub fn phi_dot(&self, u: &DVector<f64>) -> f64 {
        self.lf_phi + self.lg_phi.dot(u)
    }
}

pub fn critical_pair(
    model: &RobotModel,
    x: &DVector<f64>,
    obstacle: &ObstacleState,
) -> Result<CriticalPair> {
    model.check_state(x)?;
    let (c_r, arc) = model.critical_point(x, &obstacle.position);
    let jacobian = model.critical_jacobian(x, arc);
    let v = &jacobian * model.drift(x);
    let c_r_dot = Point::new(v[0], v[1], v[2]);
    let rel = c_r - obstacle.position;
    let d = rel.norm();
    if d == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let d_dot = rel.dot(&(c_r_dot - obstacle.velocity)) / d;
    Ok(CriticalPair {
        c_r,
        c_o: obstacle.position,
        c_r_dot,
        d,
        d_dot,
        arc,
        jacobian,
    })
}

pub fn phi(params: &SafetyIndexParams, pair: &CriticalPair) -> f64 {
    phi_value(params, pair.d, pair.d_dot)
}

pub fn phi_value(params: &SafetyIndexParams, d: f64, d_dot: f64) -> f64 {
    params.d_min * params.d_min - d * d - params.k * d_dot
}

fn phi_at(
    model: &RobotModel,
    x: &DVector<f64>,
    obstacle: &ObstacleState,
    params: &SafetyIndexParams,
) -> Result<f64> {
    Ok(phi(params, &critical_pair(model, x, obstacle)?))
}

/// Central-difference gradient of `phi` over the state.
///
/// The step for coordinate `i` is `1e-6 * max(1, |x_i|)`.
pub fn grad_phi(
    model: &RobotModel,
    x: &DVector<f64>,
    obstacle: &ObstacleState,
    params: &SafetyIndexParams,
) -> Result<DVector<f64>> {
    let pair = critical_pair(model, x, obstacle)?;
    let steps = x.map(|v| 1e-6 * v.abs().max(1.0));
    let max_step = steps.max();
    if pair.d <= max_step {
        return Err(Error::IllConditionedGradient {
            distance: pair.d,
            step: max_step,
        });
    }
    let mut grad = DVector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let h = steps[i];
        probe[i] = x[i] + h;
        let plus = phi_at(model, &probe, obstacle, params)?;
        probe[i] = x[i] - h;
        let minus = phi_at(model, &probe, obstacle, params)?;
        probe[i] = x[i];
        grad[i] = (plus - minus) / (2.0 * h);
    }
    Ok(grad)
}

/// Closed-form gradient for the point robots; `None` for the arms.
pub fn grad_phi_analytic(
    model: &RobotModel,
    x: &DVector<f64>,
    obstacle: &ObstacleState,
    params: &SafetyIndexParams,
) -> Option<Result<DVector<f64>>> {
    if !model.is_point_robot() {
        return None;
    }
    Some(critical_pair(model, x, obstacle).map(|pair| {
        let rel = pair.c_r - pair.c_o;
        let rel_vel = pair.c_r_dot - obstacle.velocity;
        let d = pair.d;
        let k = params.k;
        let d_pos = -2.0 * rel - k * (rel_vel - rel * (pair.d_dot / d)) / d;
        let d_vel = -k * rel / d;
        match model.kind() {
            ModelKind::Ball => DVector::from_vec(vec![d_pos.x, d_pos.y, d_vel.x, d_vel.y]),
            ModelKind::Unicycle => {
                let (speed, heading) = (x[2], x[3]);
                let (s, c) = heading.sin_cos();
                DVector::from_vec(vec![
                    d_pos.x,
                    d_pos.y,
                    d_vel.x * c + d_vel.y * s,
                    speed * (-d_vel.x * s + d_vel.y * c),
                ])
            }
            ModelKind::Scara | ModelKind::Arm4Dof => unreachable!("point robots only"),
        }
    }))
}

/// `phi` with its gradient and Lie derivatives at state `x`.
///
/// Point robots use the closed-form gradient; the arms use central
/// differences.
pub fn lie_derivatives(
    model: &RobotModel,
    x: &DVector<f64>,
    obstacle: &ObstacleState,
    params: &SafetyIndexParams,
) -> Result<SafetyEvaluation> {
    let pair = critical_pair(model, x, obstacle)?;
    let grad = match grad_phi_analytic(model, x, obstacle, params) {
        Some(g) => g?,
        None => grad_phi(model, x, obstacle, params)?,
    };
    let lf_phi = grad.dot(&model.drift(x));
    let lg_phi = grad.rows(model.actuated_rows().start, model.n_u()).into_owned();
    Ok(SafetyEvaluation {
        phi: phi(params, &pair),
        grad_phi: grad,
        lf_phi,
        lg_phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::IntegratorConfig;
    use nalgebra::dvector;
    use proptest::prelude::*;

    fn ball() -> RobotModel {
        RobotModel::new(ModelKind::Ball)
    }

    fn worked_params() -> SafetyIndexParams {
        SafetyIndexParams::new(1.5, 1.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(SafetyIndexParams::new(0.0, 1.0).is_err());
        assert!(SafetyIndexParams::new(1.0, -0.1).is_err());
        assert!(SafetyIndexParams::new(1.0, 0.0).is_ok());
    }

    #[test]
    fn collinear_approach() {
        let pair = critical_pair(&ball(), &dvector![0.0, 0.0, 1.0, 0.0], &ObstacleState::fixed(Point::new(2.0, 0.0, 0.0)))
            .unwrap();
        assert_eq!(pair.d, 2.0);
        assert_eq!(pair.d_dot, -1.0);
    }

    #[test]
    fn tangential_motion() {
        let pair = critical_pair(&ball(), &dvector![0.0, 0.0, 0.0, 1.0], &ObstacleState::fixed(Point::new(2.0, 0.0, 0.0)))
            .unwrap();
        assert_eq!(pair.d, 2.0);
        assert_eq!(pair.d_dot, 0.0);
    }

    #[test]
    fn coincident_points_error() {
        let err = critical_pair(&ball(), &dvector![1.0, 1.0, 0.0, 0.0], &ObstacleState::fixed(Point::new(1.0, 1.0, 0.0)));
        assert!(matches!(err, Err(Error::CoincidentPoints)));
    }

    #[test]
    fn scara_d_dot_matches_rollout() {
        let m = RobotModel::new(ModelKind::Scara);
        let x = dvector![0.0, 0.0, 0.0, 1.0];
        let obs = ObstacleState::fixed(Point::new(1.5, 1.0, 0.0));
        let pair = critical_pair(&m, &x, &obs).unwrap();
        assert!((pair.c_r - Point::new(1.5, 0.0, 0.0)).norm() < 1e-12);
        let dt = 1e-5;
        let next = m.step(&x, &DVector::zeros(2), &IntegratorConfig::new(dt, 1).unwrap()).unwrap();
        let d_next = critical_pair(&m, &next, &obs).unwrap().d;
        assert!(((d_next - pair.d) / dt - pair.d_dot).abs() < 1e-3);
    }

    #[test]
    fn phi_substitution() {
        let p = SafetyIndexParams::new(1.0, 1.0).unwrap();
        assert_eq!(phi_value(&p, 2.0, -1.0), -2.0);
        let p = SafetyIndexParams::new(1.5, 1.0).unwrap();
        assert_eq!(phi_value(&p, 1.0, -1.0), 2.25);
        assert_eq!(phi_value(&p, 1.5, 0.0), 0.0);
    }

    #[test]
    fn worked_state_gradient_and_lie_derivatives() {
        let x = dvector![1.0, 0.0, -1.0, 0.0];
        let obs = ObstacleState::fixed(Point::zeros());
        let analytic = grad_phi_analytic(&ball(), &x, &obs, &worked_params()).unwrap().unwrap();
        assert_eq!(analytic, dvector![-2.0, 0.0, -1.0, 0.0]);
        let numeric = grad_phi(&ball(), &x, &obs, &worked_params()).unwrap();
        assert!((&numeric - &analytic).norm() <= 1e-5 * analytic.norm());

        let eval = lie_derivatives(&ball(), &x, &obs, &worked_params()).unwrap();
        assert_eq!(eval.phi, 2.25);
        assert_eq!(eval.lf_phi, 2.0);
        assert_eq!(eval.lg_phi, dvector![-1.0, 0.0]);
    }

    #[test]
    fn zero_k_decouples_velocity() {
        let p = SafetyIndexParams::new(1.0, 0.0).unwrap();
        let x = dvector![0.3, -2.0, 1.1, 0.7];
        let obs = ObstacleState::fixed(Point::new(1.0, 1.0, 0.0));
        let g = grad_phi_analytic(&ball(), &x, &obs, &p).unwrap().unwrap();
        assert_eq!((g[2], g[3]), (0.0, 0.0));
        let eval = lie_derivatives(&ball(), &x, &obs, &p).unwrap();
        assert_eq!(eval.lg_phi, dvector![0.0, 0.0]);
    }

    #[test]
    fn resting_ball_has_no_drift_term() {
        let eval = lie_derivatives(
            &ball(),
            &dvector![2.0, 1.0, 0.0, 0.0],
            &ObstacleState::fixed(Point::new(-1.0, 0.5, 0.0)),
            &worked_params(),
        )
        .unwrap();
        assert_eq!(eval.lf_phi, 0.0);
    }

    #[test]
    fn gradient_is_odd_under_reflection() {
        let obs = ObstacleState::fixed(Point::zeros());
        let x = dvector![0.7, -1.3, 0.4, 0.9];
        let g = grad_phi_analytic(&ball(), &x, &obs, &worked_params()).unwrap().unwrap();
        let gm = grad_phi_analytic(&ball(), &(-&x), &obs, &worked_params()).unwrap().unwrap();
        assert!((g + gm).norm() < 1e-14);
    }

    #[test]
    fn ill_conditioned_gradient_near_contact() {
        let err = grad_phi(
            &ball(),
            &dvector![1e-7, 0.0, 0.0, 0.0],
            &ObstacleState::fixed(Point::zeros()),
            &worked_params(),
        );
        assert!(matches!(err, Err(Error::IllConditionedGradient { .. })));
    }

    #[test]
    fn phi_dot_matches_rollout_for_all_models() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let params = worked_params();
        let delta = 1e-4;
        let cfg = IntegratorConfig::new(delta, 1).unwrap();
        let mut checked = 0;
        while checked < 200 {
            let kind = ModelKind::ALL[checked % 4];
            let m = RobotModel::new(kind);
            let x = DVector::from_fn(m.n_x(), |_, _| rng.random_range(-1.0..1.0));
            let u = DVector::from_fn(m.n_u(), |_, _| rng.random_range(-1.0..1.0));
            let obs = ObstacleState::fixed(Point::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                m.task_plane_height(),
            ));
            let Ok(eval) = lie_derivatives(&m, &x, &obs, &params) else { continue };
            let pair = critical_pair(&m, &x, &obs).unwrap();
            if pair.d < 0.3 {
                continue;
            }
            let next = m.step(&x, &u, &cfg).unwrap();
            let next_pair = critical_pair(&m, &next, &obs).unwrap();
            if next_pair.arc.link != pair.arc.link {
                continue;
            }
            let fd = (phi(&params, &next_pair) - eval.phi) / delta;
            let err = (fd - eval.phi_dot(&u)).abs();
            assert!(err < 1e-2, "{kind}: fd {fd} predicted {} err {err}", eval.phi_dot(&u));
            checked += 1;
        }
    }

    proptest! {
        #[test]
        fn farther_obstacle_never_raises_phi_without_velocity_term(
            px in -3.0..3.0f64, py in -3.0..3.0f64, vx in -2.0..2.0f64, vy in -2.0..2.0f64,
            dir in 0.0..std::f64::consts::TAU, r in 0.1..3.0f64, extra in 0.0..2.0f64,
        ) {
            let p = SafetyIndexParams::new(1.0, 0.0).unwrap();
            let x = dvector![px, py, vx, vy];
            let offset = Point::new(dir.cos(), dir.sin(), 0.0);
            let near = ObstacleState::fixed(Point::new(px, py, 0.0) + offset * r);
            let far = ObstacleState::fixed(Point::new(px, py, 0.0) + offset * (r + extra));
            let phi_near = phi(&p, &critical_pair(&ball(), &x, &near).unwrap());
            let phi_far = phi(&p, &critical_pair(&ball(), &x, &far).unwrap());
            prop_assert!(phi_far <= phi_near + 1e-12);
        }

        #[test]
        fn swapping_velocities_negates_d_dot(
            px in -3.0..3.0f64, py in -3.0..3.0f64,
            vx in -2.0..2.0f64, vy in -2.0..2.0f64, ox in -2.0..2.0f64, oy in -2.0..2.0f64,
        ) {
            prop_assume!(px.hypot(py) > 1e-3);
            let obstacle_at = Point::zeros();
            let a = critical_pair(
                &ball(),
                &dvector![px, py, vx, vy],
                &ObstacleState { position: obstacle_at, velocity: Point::new(ox, oy, 0.0) },
            ).unwrap();
            let b = critical_pair(
                &ball(),
                &dvector![px, py, ox, oy],
                &ObstacleState { position: obstacle_at, velocity: Point::new(vx, vy, 0.0) },
            ).unwrap();
            prop_assert!((a.d_dot + b.d_dot).abs() < 1e-12);
        }
    }
}
