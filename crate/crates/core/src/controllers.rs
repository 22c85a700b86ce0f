//! Safe control laws built on the safety index.
//!
//! Every law here leaves the component of the reference control orthogonal
//! to `Lg_phi` untouched and only rescales the parallel component:
//!
//! ```text
//! u = alpha * Lg_phi^T + u0_e,    u0 = mu * Lg_phi^T + u0_e
//! ```
//!
//! [`unified_control`] computes `alpha` from the indicator functions. The
//! `direct_*` functions implement each law from its own definition (gradient
//! step or half-space projection) and serve as an independent check.

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dynamics::{wrap_angle, ModelKind, RobotModel};
use crate::safety_index::{SafetyEvaluation, SafetyIndexParams};
use crate::{Error, Point, Result};

/// `Lg_phi` norms at or below this are treated as zero.
pub const DEGENERATE_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Pfm,
    Sma,
    Ssa,
    Bfm,
    Sss,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Pfm,
        Algorithm::Sma,
        Algorithm::Ssa,
        Algorithm::Bfm,
        Algorithm::Sss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pfm => "pfm",
            Algorithm::Sma => "sma",
            Algorithm::Ssa => "ssa",
            Algorithm::Bfm => "bfm",
            Algorithm::Sss => "sss",
        }
    }

    /// Name of the algorithm-specific tuning parameter.
    pub fn parameter_name(self) -> &'static str {
        match self {
            Algorithm::Pfm => "c1",
            Algorithm::Sma => "c2",
            Algorithm::Ssa => "eta",
            Algorithm::Bfm | Algorithm::Sss => "lambda",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub algorithm: Algorithm,
    /// PFM gain.
    pub c1: f64,
    /// SMA gain.
    pub c2: f64,
    /// SSA slack, `<= 0`.
    pub eta: f64,
    /// BFM / SSS rate, `< 0`.
    pub lambda: f64,
    pub safety: SafetyIndexParams,
}

impl ControllerConfig {
    pub fn new(algorithm: Algorithm, safety: SafetyIndexParams) -> Self {
        Self {
            algorithm,
            c1: 1.0,
            c2: 3.0,
            eta: 0.0,
            lambda: -1.0,
            safety,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.safety.validate()?;
        if !(self.c1 > 0.0 && self.c1.is_finite()) {
            return Err(Error::Config(format!("c1 must be positive, got {}", self.c1)));
        }
        if !(self.c2 > 0.0 && self.c2.is_finite()) {
            return Err(Error::Config(format!("c2 must be positive, got {}", self.c2)));
        }
        if !(self.eta <= 0.0 && self.eta.is_finite()) {
            return Err(Error::Config(format!("eta must be non-positive, got {}", self.eta)));
        }
        if !(self.lambda < 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be negative, got {}", self.lambda)));
        }
        Ok(())
    }

    /// The algorithm-specific parameter.
    pub fn parameter(&self) -> f64 {
        match self.algorithm {
            Algorithm::Pfm => self.c1,
            Algorithm::Sma => self.c2,
            Algorithm::Ssa => self.eta,
            Algorithm::Bfm | Algorithm::Sss => self.lambda,
        }
    }

    pub fn with_parameter(mut self, value: f64) -> Self {
        match self.algorithm {
            Algorithm::Pfm => self.c1 = value,
            Algorithm::Sma => self.c2 = value,
            Algorithm::Ssa => self.eta = value,
            Algorithm::Bfm | Algorithm::Sss => self.lambda = value,
        }
        self
    }

    /// Slack `xi` of the `phi_dot <= xi` constraint, for the
    /// optimization-based laws.
    pub fn slack(&self, phi: f64) -> Option<f64> {
        match self.algorithm {
            Algorithm::Ssa => Some(self.eta),
            Algorithm::Bfm | Algorithm::Sss => Some(self.lambda * phi),
            Algorithm::Pfm | Algorithm::Sma => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub u0_s: DVector<f64>,
    pub u0_e: DVector<f64>,
    /// Projection coefficient of `u0` on `Lg_phi`; `None` when `Lg_phi = 0`.
    pub mu: Option<f64>,
    pub gamma: Option<f64>,
    pub ind_a: bool,
    pub ind_b: bool,
    pub alpha: Option<f64>,
    /// Always zero: no law adds an efficiency correction.
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControlWarning {
    /// SMA correction left `phi_dot > 0`; `c2` is too small for this state.
    SmaGainInsufficient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub phi: f64,
    pub lf_phi: f64,
    pub lg_phi_norm: f64,
    pub predicted_phi_dot: f64,
    pub xi: Option<f64>,
    pub degenerate: bool,
    pub warning: Option<ControlWarning>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SafeControlOutput {
    pub u: DVector<f64>,
    pub intervened: bool,
    pub decomposition: Decomposition,
    pub diagnostics: Diagnostics,
}

/// Splits `u0` into components parallel and orthogonal to `lg_phi`.
pub fn decompose(
    u0: &DVector<f64>,
    lg_phi: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>, Option<f64>) {
    let norm2 = lg_phi.norm_squared();
    if norm2.sqrt() <= DEGENERATE_NORM {
        return (DVector::zeros(u0.len()), u0.clone(), None);
    }
    let mu = lg_phi.dot(u0) / norm2;
    let u0_s = lg_phi * mu;
    let u0_e = u0 - &u0_s;
    (u0_s, u0_e, Some(mu))
}

/// Largest `alpha` with `Lf_phi + alpha * |Lg_phi|^2 <= xi`.
pub fn gamma(xi: f64, lf_phi: f64, lg_phi: &DVector<f64>) -> Result<f64> {
    let norm2 = lg_phi.norm_squared();
    if norm2.sqrt() <= DEGENERATE_NORM {
        return Err(Error::InvalidInput("Lg_phi vanishes; constraint is degenerate".into()));
    }
    Ok((xi - lf_phi) / norm2)
}

fn output(
    u0: &DVector<f64>,
    u: Option<DVector<f64>>,
    eval: &SafetyEvaluation,
    decomposition: Decomposition,
    xi: Option<f64>,
    degenerate: bool,
) -> SafeControlOutput {
    let intervened = u.is_some();
    let u = u.unwrap_or_else(|| u0.clone());
    SafeControlOutput {
        diagnostics: Diagnostics {
            phi: eval.phi,
            lf_phi: eval.lf_phi,
            lg_phi_norm: eval.lg_phi.norm(),
            predicted_phi_dot: eval.phi_dot(&u),
            xi,
            degenerate,
            warning: None,
        },
        u,
        intervened,
        decomposition,
    }
}

fn degenerate_output(u0: &DVector<f64>, eval: &SafetyEvaluation, xi: Option<f64>) -> SafeControlOutput {
    let decomposition = Decomposition {
        u0_s: DVector::zeros(u0.len()),
        u0_e: u0.clone(),
        mu: None,
        gamma: None,
        ind_a: false,
        ind_b: eval.phi >= 0.0,
        alpha: None,
        beta: 0.0,
    };
    output(u0, None, eval, decomposition, xi, true)
}

fn sma_check(mut out: SafeControlOutput) -> SafeControlOutput {
    if out.intervened && out.diagnostics.predicted_phi_dot > 0.0 {
        out.diagnostics.warning = Some(ControlWarning::SmaGainInsufficient);
    }
    out
}

/// The unified law `u = alpha * Lg_phi^T + u0_e`.
///
/// When the selected `alpha` equals `mu` the reference is returned
/// unchanged, bit for bit.
pub fn unified_control(
    cfg: &ControllerConfig,
    u0: &DVector<f64>,
    eval: &SafetyEvaluation,
) -> SafeControlOutput {
    let xi = cfg.slack(eval.phi);
    let (u0_s, u0_e, mu) = decompose(u0, &eval.lg_phi);
    let Some(mu) = mu else {
        return degenerate_output(u0, eval, xi);
    };
    let ind_b = eval.phi >= 0.0;
    let gamma = xi.map(|xi| gamma(xi, eval.lf_phi, &eval.lg_phi).expect("non-degenerate"));
    // Intervene only when the reference violates the constraint.
    let ind_a = gamma.is_some_and(|g| mu > g);
    let (alpha, active) = match cfg.algorithm {
        Algorithm::Pfm => (mu - f64::from(u8::from(ind_b)) * cfg.c1, ind_b),
        Algorithm::Sma => (mu - f64::from(u8::from(ind_b)) * cfg.c2, ind_b),
        Algorithm::Ssa | Algorithm::Sss => {
            let gate = ind_a && ind_b;
            (if gate { gamma.unwrap() } else { mu }, gate)
        }
        Algorithm::Bfm => (if ind_a { gamma.unwrap() } else { mu }, ind_a),
    };
    let u = active.then(|| &eval.lg_phi * alpha + &u0_e);
    let decomposition = Decomposition {
        u0_s,
        u0_e,
        mu: Some(mu),
        gamma,
        ind_a,
        ind_b,
        alpha: Some(alpha),
        beta: 0.0,
    };
    let out = output(u0, u, eval, decomposition, xi, false);
    if cfg.algorithm == Algorithm::Sma {
        sma_check(out)
    } else {
        out
    }
}

fn gradient_step(gain: f64, u0: &DVector<f64>, eval: &SafetyEvaluation) -> SafeControlOutput {
    let (u0_s, u0_e, mu) = decompose(u0, &eval.lg_phi);
    let ind_b = eval.phi >= 0.0;
    let u = ind_b.then(|| u0 - &eval.lg_phi * gain);
    let decomposition = Decomposition {
        u0_s,
        u0_e,
        mu,
        gamma: None,
        ind_a: false,
        ind_b,
        alpha: mu.map(|mu| if ind_b { mu - gain } else { mu }),
        beta: 0.0,
    };
    let degenerate = mu.is_none();
    output(u0, u.filter(|_| !degenerate), eval, decomposition, None, degenerate)
}

/// Potential-field law: one unit gradient step, `u = u0 - c1 * Lg_phi^T`
/// whenever `phi >= 0`.
pub fn direct_pfm(cfg: &ControllerConfig, u0: &DVector<f64>, eval: &SafetyEvaluation) -> SafeControlOutput {
    gradient_step(cfg.c1, u0, eval)
}

/// Sliding-mode law: `u = u0 - c2 * Lg_phi^T` whenever `phi >= 0`.
pub fn direct_sma(cfg: &ControllerConfig, u0: &DVector<f64>, eval: &SafetyEvaluation) -> SafeControlOutput {
    sma_check(gradient_step(cfg.c2, u0, eval))
}

/// Minimum-norm projection of `u0` onto `{u : Lf_phi + Lg_phi u <= xi}`.
///
/// With `gate_on_phi`, the constraint only applies when `phi >= 0`.
pub fn direct_projection(
    u0: &DVector<f64>,
    eval: &SafetyEvaluation,
    xi: f64,
    gate_on_phi: bool,
) -> SafeControlOutput {
    let (u0_s, u0_e, mu) = decompose(u0, &eval.lg_phi);
    if mu.is_none() {
        return degenerate_output(u0, eval, Some(xi));
    }
    let norm2 = eval.lg_phi.norm_squared();
    let violation = eval.lf_phi + eval.lg_phi.dot(u0) - xi;
    let ind_b = eval.phi >= 0.0;
    let active = violation > 0.0 && (ind_b || !gate_on_phi);
    let u = active.then(|| u0 - &eval.lg_phi * (violation / norm2));
    let decomposition = Decomposition {
        u0_s,
        u0_e,
        mu,
        gamma: Some((xi - eval.lf_phi) / norm2),
        ind_a: violation > 0.0,
        ind_b,
        alpha: None,
        beta: 0.0,
    };
    output(u0, u, eval, decomposition, Some(xi), false)
}

/// Each law evaluated from its own definition.
pub fn direct_control(cfg: &ControllerConfig, u0: &DVector<f64>, eval: &SafetyEvaluation) -> SafeControlOutput {
    match cfg.algorithm {
        Algorithm::Pfm => direct_pfm(cfg, u0, eval),
        Algorithm::Sma => direct_sma(cfg, u0, eval),
        Algorithm::Ssa => direct_projection(u0, eval, cfg.eta, true),
        Algorithm::Bfm => direct_projection(u0, eval, cfg.lambda * eval.phi, false),
        Algorithm::Sss => direct_projection(u0, eval, cfg.lambda * eval.phi, true),
    }
}

/// Gains of the nominal goal-reaching controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceGains {
    pub kp: f64,
    pub kd: f64,
    /// Heading gain (unicycle).
    pub k_theta: f64,
    /// Joint-space damping added to the arms' Jacobian-transpose law.
    pub joint_damping: f64,
    pub u_max: f64,
}

impl Default for ReferenceGains {
    fn default() -> Self {
        Self {
            kp: 4.0,
            kd: 4.0,
            k_theta: 3.0,
            joint_damping: 0.5,
            u_max: 5.0,
        }
    }
}

fn clamp_norm(mut u: DVector<f64>, max: f64) -> DVector<f64> {
    let n = u.norm();
    if n > max {
        u *= max / n;
    }
    u
}

/// Task-space PD toward `goal`, mapped to the model's control input.
pub fn reference_controller(
    model: &RobotModel,
    x: &DVector<f64>,
    goal: &Point,
    gains: &ReferenceGains,
) -> DVector<f64> {
    let u = match model.kind() {
        ModelKind::Ball => {
            let ax = gains.kp * (goal.x - x[0]) - gains.kd * x[2];
            let ay = gains.kp * (goal.y - x[1]) - gains.kd * x[3];
            DVector::from_vec(vec![ax, ay])
        }
        ModelKind::Unicycle => {
            let (dx, dy) = (goal.x - x[0], goal.y - x[1]);
            let dist = dx.hypot(dy);
            let heading_err = if dist > 0.0 {
                wrap_angle(dy.atan2(dx) - x[3])
            } else {
                0.0
            };
            let accel = gains.kp * dist * heading_err.cos() - gains.kd * x[2];
            DVector::from_vec(vec![accel, gains.k_theta * heading_err.clamp(-PI, PI)])
        }
        ModelKind::Scara | ModelKind::Arm4Dof => {
            let nq = model.n_u();
            let jac = model.end_effector_jacobian(x);
            let jq = jac.columns(0, nq);
            let qdot = x.rows(nq, nq);
            let ee = model.end_effector(x);
            let ee_vel = jq * qdot;
            let accel = (goal - ee) * gains.kp - Point::new(ee_vel[0], ee_vel[1], ee_vel[2]) * gains.kd;
            jq.transpose() * accel - qdot * gains.joint_damping
        }
    };
    clamp_norm(u, gains.u_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::IntegratorConfig;
    use nalgebra::dvector;

    fn worked_eval() -> SafetyEvaluation {
        SafetyEvaluation {
            phi: 2.25,
            grad_phi: dvector![-2.0, 0.0, -1.0, 0.0],
            lf_phi: 2.0,
            lg_phi: dvector![-1.0, 0.0],
        }
    }

    fn cfg(algorithm: Algorithm) -> ControllerConfig {
        ControllerConfig::new(algorithm, SafetyIndexParams::new(1.5, 1.0).unwrap())
    }

    #[test]
    fn decompose_axis_aligned() {
        let (s, e, mu) = decompose(&dvector![2.0, 3.0], &dvector![1.0, 0.0]);
        assert_eq!(mu, Some(2.0));
        assert_eq!(s, dvector![2.0, 0.0]);
        assert_eq!(e, dvector![0.0, 3.0]);
    }

    #[test]
    fn decompose_orthogonal_and_zero_reference() {
        let (s, _, mu) = decompose(&dvector![0.0, 5.0], &dvector![1.0, 0.0]);
        assert_eq!(mu, Some(0.0));
        assert_eq!(s, dvector![0.0, 0.0]);
        let (s, e, mu) = decompose(&dvector![0.0, 0.0], &dvector![-1.0, 0.0]);
        assert_eq!(mu.map(f64::abs), Some(0.0));
        assert_eq!(s.norm(), 0.0);
        assert_eq!(e.norm(), 0.0);
    }

    #[test]
    fn decompose_degenerate() {
        let (s, e, mu) = decompose(&dvector![1.0, 2.0], &dvector![0.0, 0.0]);
        assert_eq!(mu, None);
        assert_eq!(s, dvector![0.0, 0.0]);
        assert_eq!(e, dvector![1.0, 2.0]);
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(0.0, 2.0, &dvector![-1.0, 0.0]).unwrap(), -2.0);
        assert_eq!(gamma(1.3, 1.3, &dvector![0.4, 2.0]).unwrap(), 0.0);
        let lg = dvector![0.3, -0.8];
        let g1 = gamma(0.5, 2.0, &lg).unwrap();
        let g2 = gamma(0.5, 2.0, &(&lg * 2.0)).unwrap();
        assert!((g2 - g1 / 4.0).abs() < 1e-15);
        assert!((&lg * (2.0 * g2) - &lg * (g1 / 2.0)).norm() < 1e-15);
        assert!(gamma(0.0, 1.0, &dvector![0.0, 0.0]).is_err());
    }

    #[test]
    fn worked_state_ssa() {
        let out = unified_control(&cfg(Algorithm::Ssa), &dvector![0.0, 0.0], &worked_eval());
        assert_eq!(out.decomposition.gamma, Some(-2.0));
        assert!(out.decomposition.ind_a && out.decomposition.ind_b);
        assert_eq!(out.u, dvector![2.0, 0.0]);
        assert_eq!(out.diagnostics.predicted_phi_dot, 0.0);
        assert!(out.intervened);
    }

    #[test]
    fn worked_state_bfm() {
        let out = unified_control(&cfg(Algorithm::Bfm).with_parameter(-1.0), &dvector![0.0, 0.0], &worked_eval());
        assert_eq!(out.decomposition.gamma, Some(-4.25));
        assert_eq!(out.u, dvector![4.25, 0.0]);
        assert_eq!(out.diagnostics.predicted_phi_dot, -2.25);
    }

    #[test]
    fn sss_passes_reference_when_safe() {
        let mut eval = worked_eval();
        eval.phi = -0.5;
        let u0 = dvector![0.3, -1.7];
        let out = unified_control(&cfg(Algorithm::Sss), &u0, &eval);
        assert_eq!(out.u, u0);
        assert!(!out.intervened);
    }

    #[test]
    fn pfm_direct_and_unified() {
        let c = cfg(Algorithm::Pfm).with_parameter(3.0);
        let direct = direct_pfm(&c, &dvector![0.0, 0.0], &worked_eval());
        assert_eq!(direct.u, dvector![3.0, 0.0]);
        let unified = unified_control(&c, &dvector![0.0, 0.0], &worked_eval());
        assert!((unified.u - direct.u).norm() < 1e-12);

        let mut safe = worked_eval();
        safe.phi = -1.0;
        assert_eq!(direct_pfm(&c, &dvector![1.0, 2.0], &safe).u, dvector![1.0, 2.0]);
    }

    #[test]
    fn sma_gain_warning() {
        let out = direct_sma(&cfg(Algorithm::Sma).with_parameter(3.0), &dvector![0.0, 0.0], &worked_eval());
        assert_eq!(out.u, dvector![3.0, 0.0]);
        assert_eq!(out.diagnostics.predicted_phi_dot, -1.0);
        assert_eq!(out.diagnostics.warning, None);

        let weak = cfg(Algorithm::Sma).with_parameter(1.0);
        let out = direct_sma(&weak, &dvector![0.0, 0.0], &worked_eval());
        assert_eq!(out.diagnostics.predicted_phi_dot, 1.0);
        assert_eq!(out.diagnostics.warning, Some(ControlWarning::SmaGainInsufficient));
        let unified = unified_control(&weak, &dvector![0.0, 0.0], &worked_eval());
        assert_eq!(unified.diagnostics.warning, Some(ControlWarning::SmaGainInsufficient));
    }

    #[test]
    fn projection_inactive_when_feasible() {
        let u0 = dvector![-5.0, 1.0];
        let out = direct_projection(&u0, &worked_eval(), 0.0, true);
        // 2 + (-1)(-5) = 7 > 0 is infeasible; flip to a feasible reference.
        assert!(out.intervened);
        let u0 = dvector![5.0, 1.0];
        let out = direct_projection(&u0, &worked_eval(), 0.0, true);
        assert!(!out.intervened);
        assert_eq!(out.u, u0);
    }

    /// Brute-force minimum-norm feasible control over a 401 x 401 grid.
    fn grid_qp(u0: &DVector<f64>, eval: &SafetyEvaluation, xi: f64) -> DVector<f64> {
        let mut best = (f64::INFINITY, dvector![0.0, 0.0]);
        for i in 0..=400 {
            for j in 0..=400 {
                let u = dvector![-10.0 + 0.05 * i as f64, -10.0 + 0.05 * j as f64];
                if eval.phi_dot(&u) <= xi {
                    let cost = (u0 - &u).norm();
                    if cost < best.0 {
                        best = (cost, u);
                    }
                }
            }
        }
        best.1
    }

    #[test]
    fn projection_matches_grid_oracle_on_worked_state() {
        let eval = worked_eval();
        let u0 = dvector![0.0, 0.0];
        let ssa = direct_projection(&u0, &eval, 0.0, true);
        assert!((ssa.u.clone() - grid_qp(&u0, &eval, 0.0)).norm() <= 0.05);
        assert_eq!(ssa.u, dvector![2.0, 0.0]);
        let bfm = direct_projection(&u0, &eval, -2.25, false);
        assert!((bfm.u.clone() - grid_qp(&u0, &eval, -2.25)).norm() <= 0.05);
        assert_eq!(bfm.u, dvector![4.25, 0.0]);
    }

    #[test]
    fn degenerate_lie_derivative_returns_reference() {
        let mut eval = worked_eval();
        eval.lg_phi = dvector![0.0, 0.0];
        for alg in Algorithm::ALL {
            let out = unified_control(&cfg(alg), &dvector![1.0, -1.0], &eval);
            assert!(out.diagnostics.degenerate);
            assert!(!out.intervened);
            assert_eq!(out.u, dvector![1.0, -1.0]);
            let direct = direct_control(&cfg(alg), &dvector![1.0, -1.0], &eval);
            assert!(direct.diagnostics.degenerate);
            assert_eq!(direct.u, dvector![1.0, -1.0]);
        }
    }

    #[test]
    fn ties_follow_the_indicator_conventions() {
        // phi = 0 counts as unsafe.
        let mut eval = worked_eval();
        eval.phi = 0.0;
        let out = unified_control(&cfg(Algorithm::Pfm), &dvector![0.0, 0.0], &eval);
        assert!(out.decomposition.ind_b && out.intervened);
        // mu == gamma counts as feasible: Lf + Lg u0 == eta exactly.
        let eval = worked_eval();
        let u0 = dvector![2.0, 0.0];
        let out = unified_control(&cfg(Algorithm::Ssa), &u0, &eval);
        assert_eq!(out.decomposition.mu, out.decomposition.gamma);
        assert!(!out.intervened);
    }

    #[test]
    fn config_validation() {
        let base = cfg(Algorithm::Ssa);
        assert!(base.validate().is_ok());
        assert!(base.with_parameter(0.1).validate().is_err());
        assert!(cfg(Algorithm::Bfm).with_parameter(0.0).validate().is_err());
        assert!(cfg(Algorithm::Pfm).with_parameter(-1.0).validate().is_err());
        assert!(cfg(Algorithm::Sma).with_parameter(0.0).validate().is_err());
    }

    #[test]
    fn ball_reference_controller() {
        let m = RobotModel::new(ModelKind::Ball);
        let g = ReferenceGains::default();
        let at_goal = reference_controller(&m, &dvector![1.0, 2.0, 0.0, 0.0], &Point::new(1.0, 2.0, 0.0), &g);
        assert_eq!(at_goal, dvector![0.0, 0.0]);
        let toward = reference_controller(&m, &DVector::zeros(4), &Point::new(3.0, 0.0, 0.0), &g);
        assert!(toward[0] > 0.0 && toward[1] == 0.0);
        assert!(toward.norm() <= g.u_max + 1e-12);
    }

    fn reaches_goal(kind: ModelKind, x0: DVector<f64>, goal: Point) -> bool {
        let m = RobotModel::new(kind);
        let gains = ReferenceGains::default();
        let cfg = IntegratorConfig::default();
        let mut x = x0;
        for _ in 0..100 {
            let u = reference_controller(&m, &x, &goal, &gains);
            x = m.step(&x, &u, &cfg).unwrap();
        }
        (m.end_effector(&x) - goal).norm() < 0.1
    }

    #[test]
    fn scara_reaches_reachable_goal_within_five_seconds() {
        assert!(reaches_goal(ModelKind::Scara, dvector![0.1, 0.1, 0.0, 0.0], Point::new(0.8, 1.2, 0.0)));
        assert!(reaches_goal(ModelKind::Scara, dvector![0.1, 0.1, 0.0, 0.0], Point::new(-1.0, 0.5, 0.0)));
    }

    #[test]
    fn other_models_reach_goals() {
        assert!(reaches_goal(ModelKind::Ball, DVector::zeros(4), Point::new(2.0, -1.0, 0.0)));
        assert!(reaches_goal(ModelKind::Unicycle, DVector::zeros(4), Point::new(1.5, 1.0, 0.0)));
        let arm = RobotModel::new(ModelKind::Arm4Dof);
        assert!(reaches_goal(ModelKind::Arm4Dof, arm.initial_state([0.0, 0.0]), Point::new(1.2, 0.8, 1.0)));
    }
}
