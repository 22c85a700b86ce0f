//! Phase portraits of a safe controller on planar slices of the ball state.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::controllers::{reference_controller, unified_control, ControllerConfig, ReferenceGains};
use crate::dynamics::{ModelKind, RobotModel};
use crate::safety_index::{lie_derivatives, ObstacleState};
use crate::{Error, Point, Result};

/// Reference control used at every cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PhaseReference {
    Constant { u: [f64; 2] },
    /// The default PD reference toward a goal.
    Goal { goal: [f64; 2] },
}

/// A grid of ball positions at a fixed velocity around a static obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSlice {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub velocity: [f64; 2],
    pub obstacle: [f64; 2],
    pub reference: PhaseReference,
}

impl Default for PhaseSlice {
    fn default() -> Self {
        Self {
            x_range: [-3.0, 3.0],
            y_range: [-3.0, 3.0],
            velocity: [1.0, 0.0],
            obstacle: [0.0, 0.0],
            reference: PhaseReference::Goal { goal: [4.0, 0.0] },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub u0: [f64; 2],
    pub u: [f64; 2],
}

impl PhaseCell {
    pub fn delta(&self) -> [f64; 2] {
        [self.u[0] - self.u0[0], self.u[1] - self.u0[1]]
    }
}

fn axis(range: [f64; 2], n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (range[0] + range[1])];
    }
    (0..n)
        .map(|i| range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Evaluates the controller on an `nx` by `ny` grid, row-major in y.
/// Cells exactly on the obstacle are skipped.
pub fn phase_portrait(cfg: &ControllerConfig, slice: &PhaseSlice, resolution: (usize, usize)) -> Result<Vec<PhaseCell>> {
    cfg.validate()?;
    let (nx, ny) = resolution;
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput("phase grid resolution must be at least 1x1".into()));
    }
    let ranges_ok = [slice.x_range, slice.y_range]
        .iter()
        .all(|r| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]);
    if !ranges_ok {
        return Err(Error::InvalidInput("phase slice ranges must be finite and ordered".into()));
    }
    let model = RobotModel::new(ModelKind::Ball);
    let obstacle = ObstacleState::planar(slice.obstacle, [0.0, 0.0], 0.0);
    let gains = ReferenceGains::default();
    let mut cells = Vec::with_capacity(nx * ny);
    for &y in &axis(slice.y_range, ny) {
        for &x in &axis(slice.x_range, nx) {
            let state = DVector::from_row_slice(&[x, y, slice.velocity[0], slice.velocity[1]]);
            let u0 = match slice.reference {
                PhaseReference::Constant { u } => DVector::from_row_slice(&u),
                PhaseReference::Goal { goal } => {
                    reference_controller(&model, &state, &Point::new(goal[0], goal[1], 0.0), &gains)
                }
            };
            let eval = match lie_derivatives(&model, &state, &obstacle, &cfg.safety) {
                Ok(eval) => eval,
                Err(Error::CoincidentPoints | Error::IllConditionedGradient { .. }) => continue,
                Err(e) => return Err(e),
            };
            let out = unified_control(cfg, &u0, &eval);
            cells.push(PhaseCell {
                x,
                y,
                phi: eval.phi,
                u0: [u0[0], u0[1]],
                u: [out.u[0], out.u[1]],
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::Algorithm;
    use crate::safety_index::SafetyIndexParams;

    fn grid(alg: Algorithm) -> Vec<PhaseCell> {
        let cfg = ControllerConfig::new(alg, SafetyIndexParams::default());
        phase_portrait(&cfg, &PhaseSlice::default(), (41, 41)).unwrap()
    }

    #[test]
    fn gated_laws_leave_safe_cells_alone() {
        for alg in [Algorithm::Ssa, Algorithm::Sss] {
            let cells = grid(alg);
            assert!(cells.iter().any(|c| c.phi < 0.0));
            for c in cells.iter().filter(|c| c.phi < 0.0) {
                assert_eq!(c.delta(), [0.0, 0.0]);
            }
        }
    }

    #[test]
    fn barrier_acts_in_the_safe_set() {
        let cells = grid(Algorithm::Bfm);
        assert!(cells.iter().any(|c| c.phi < 0.0 && c.delta() != [0.0, 0.0]));
    }

    #[test]
    fn bfm_and_sss_agree_where_unsafe() {
        let bfm = grid(Algorithm::Bfm);
        let sss = grid(Algorithm::Sss);
        assert_eq!(bfm.len(), sss.len());
        for (b, s) in bfm.iter().zip(&sss) {
            if b.phi >= 0.0 {
                assert_eq!(b, s);
            }
        }
    }

    #[test]
    fn corrections_are_along_the_gradient() {
        // For the ball, Lg_phi is parallel to the relative position with
        // coefficient -k / d; check the residual against that direction.
        for alg in Algorithm::ALL {
            for c in grid(alg) {
                let (rx, ry) = (c.x, c.y);
                let n = rx.hypot(ry);
                let du = c.delta();
                let residual = (du[0] * ry - du[1] * rx) / n;
                assert!(residual.abs() <= 1e-10 * (1.0 + du[0].hypot(du[1])), "{alg}: {residual}");
            }
        }
    }

    #[test]
    fn single_cell_uses_midpoint() {
        let cfg = ControllerConfig::new(Algorithm::Sss, SafetyIndexParams::default());
        let slice = PhaseSlice {
            x_range: [1.0, 3.0],
            y_range: [-1.0, 0.0],
            ..Default::default()
        };
        let cells = phase_portrait(&cfg, &slice, (1, 1)).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!((cells[0].x, cells[0].y), (2.0, -0.5));
        assert!(phase_portrait(&cfg, &slice, (0, 3)).is_err());
    }
}
