//! Robot dynamics, kinematics and fixed-step integration.
//!
//! Every model is control-affine, `x_dot = f(x) + g u`, with a constant
//! input matrix `g` that only touches the last `n_u` rows of the state. The
//! remaining rows are driven purely by the drift `f`.
//!
//! Robots are modelled as line-segment skeletons in Cartesian space. The
//! planar models live in the `z = 0` plane; the 4-DoF arm is spatial, with a
//! vertical base column, a yaw joint at the base and three pitch joints.

use std::f64::consts::PI;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[serde(alias = "ball2d")]
    Ball,
    Unicycle,
    Scara,
    #[serde(alias = "arm")]
    Arm4Dof,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Ball,
        ModelKind::Unicycle,
        ModelKind::Scara,
        ModelKind::Arm4Dof,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ball => "ball",
            ModelKind::Unicycle => "unicycle",
            ModelKind::Scara => "scara",
            ModelKind::Arm4Dof => "arm4dof",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ball" | "ball2d" => Ok(ModelKind::Ball),
            "unicycle" => Ok(ModelKind::Unicycle),
            "scara" => Ok(ModelKind::Scara),
            "arm" | "arm4dof" => Ok(ModelKind::Arm4Dof),
            other => Err(Error::InvalidInput(format!("unknown model `{other}`"))),
        }
    }
}

/// A line segment of the robot skeleton. Degenerate (`start == end`) for
/// point robots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: Point,
    pub end: Point,
}

impl Segment {
    pub fn point_at(&self, fraction: f64) -> Point {
        self.start + (self.end - self.start) * fraction
    }

    /// Fraction in `[0, 1]` of the point on the segment closest to `p`.
    pub fn closest_fraction(&self, p: &Point) -> f64 {
        let dir = self.end - self.start;
        let len2 = dir.norm_squared();
        if len2 == 0.0 {
            return 0.0;
        }
        ((p - self.start).dot(&dir) / len2).clamp(0.0, 1.0)
    }
}

/// The region occupied by the robot, as a connected chain of segments.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGeometry {
    pub segments: Vec<Segment>,
}

/// Location of a point on the skeleton: link index plus fraction along it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcParam {
    pub link: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub control_dt: f64,
    pub substeps: usize,
}

impl IntegratorConfig {
    pub fn new(control_dt: f64, substeps: usize) -> Result<Self> {
        if !(control_dt > 0.0 && control_dt.is_finite()) {
            return Err(Error::Config(format!("control_dt must be positive, got {control_dt}")));
        }
        if substeps == 0 {
            return Err(Error::Config("substeps must be at least 1".into()));
        }
        Ok(Self { control_dt, substeps })
    }

    pub fn physics_dt(&self) -> f64 {
        self.control_dt / self.substeps as f64
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            control_dt: 0.05,
            substeps: 10,
        }
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Joint positions and rotation axes of an articulated chain.
struct Chain {
    /// `links + 1` points; joint `j` sits at `points[j]` (the base column of
    /// the arm starts at the yaw joint).
    points: Vec<Point>,
    axes: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotModel {
    kind: ModelKind,
    link_lengths: Vec<f64>,
}

impl RobotModel {
    pub fn new(kind: ModelKind) -> Self {
        let link_lengths = match kind {
            ModelKind::Ball | ModelKind::Unicycle => Vec::new(),
            ModelKind::Scara => vec![1.0; 2],
            ModelKind::Arm4Dof => vec![1.0; 4],
        };
        Self { kind, link_lengths }
    }

    pub fn with_link_lengths(kind: ModelKind, link_lengths: Vec<f64>) -> Result<Self> {
        let expected = Self::new(kind).link_lengths.len();
        if link_lengths.len() != expected {
            return Err(Error::Dimension {
                what: "link lengths",
                expected,
                actual: link_lengths.len(),
            });
        }
        if link_lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::Config("link lengths must be positive".into()));
        }
        Ok(Self { kind, link_lengths })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn link_lengths(&self) -> &[f64] {
        &self.link_lengths
    }

    pub fn n_x(&self) -> usize {
        match self.kind {
            ModelKind::Arm4Dof => 8,
            _ => 4,
        }
    }

    pub fn n_u(&self) -> usize {
        match self.kind {
            ModelKind::Arm4Dof => 4,
            _ => 2,
        }
    }

    /// Rows of the state driven directly by the control input.
    pub fn actuated_rows(&self) -> Range<usize> {
        self.n_x() - self.n_u()..self.n_x()
    }

    pub fn is_point_robot(&self) -> bool {
        matches!(self.kind, ModelKind::Ball | ModelKind::Unicycle)
    }

    /// Height of the plane the human agent and the goals live in.
    pub fn task_plane_height(&self) -> f64 {
        match self.kind {
            ModelKind::Arm4Dof => self.link_lengths[0],
            _ => 0.0,
        }
    }

    /// Horizontal reach of the end effector within the task plane.
    pub fn reach(&self) -> f64 {
        match self.kind {
            ModelKind::Ball | ModelKind::Unicycle => f64::INFINITY,
            ModelKind::Scara => self.link_lengths.iter().sum(),
            ModelKind::Arm4Dof => self.link_lengths[1..].iter().sum(),
        }
    }

    pub fn check_state(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.n_x() {
            return Err(Error::Dimension {
                what: "state",
                expected: self.n_x(),
                actual: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("state has non-finite entries".into()));
        }
        Ok(())
    }

    pub fn check_control(&self, u: &DVector<f64>) -> Result<()> {
        if u.len() != self.n_u() {
            return Err(Error::Dimension {
                what: "control",
                expected: self.n_u(),
                actual: u.len(),
            });
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("control has non-finite entries".into()));
        }
        Ok(())
    }

    /// Drift term `f(x)`. Zero on the actuated rows.
    pub fn drift(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n_x();
        let mut f = DVector::zeros(n);
        match self.kind {
            ModelKind::Unicycle => {
                let (v, theta) = (x[2], x[3]);
                f[0] = v * theta.cos();
                f[1] = v * theta.sin();
            }
            _ => {
                let half = n / 2;
                for i in 0..half {
                    f[i] = x[half + i];
                }
            }
        }
        f
    }

    /// Constant input matrix `g`: zeros over identity.
    pub fn input_matrix(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.n_x(), self.n_u());
        for (col, row) in self.actuated_rows().enumerate() {
            g[(row, col)] = 1.0;
        }
        g
    }

    pub fn eval_dynamics(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_state(x)?;
        self.check_control(u)?;
        let mut xdot = self.drift(x);
        for (col, row) in self.actuated_rows().enumerate() {
            xdot[row] += u[col];
        }
        Ok(xdot)
    }

    /// Advances the state by one control period with `u` held constant.
    ///
    /// Each substep first updates the actuated rows, then advances the
    /// remaining rows with the mean of the drift before and after that
    /// update. For constant input this reproduces double-integrator motion
    /// exactly.
    pub fn step(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
        cfg: &IntegratorConfig,
    ) -> Result<DVector<f64>> {
        self.check_state(x)?;
        self.check_control(u)?;
        let h = cfg.physics_dt();
        let actuated = self.actuated_rows();
        let mut x = x.clone();
        for _ in 0..cfg.substeps {
            let f_old = self.drift(&x);
            for (col, row) in actuated.clone().enumerate() {
                x[row] += u[col] * h;
            }
            let f_new = self.drift(&x);
            for row in 0..actuated.start {
                x[row] += 0.5 * (f_old[row] + f_new[row]) * h;
            }
            if self.kind == ModelKind::Unicycle {
                x[3] = wrap_angle(x[3]);
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::blowup(&x));
            }
        }
        Ok(x)
    }

    fn chain(&self, x: &DVector<f64>) -> Chain {
        let z = Point::z();
        match self.kind {
            ModelKind::Ball | ModelKind::Unicycle => Chain {
                points: vec![Point::new(x[0], x[1], 0.0)],
                axes: Vec::new(),
            },
            ModelKind::Scara => {
                let mut points = vec![Point::zeros()];
                let mut heading = 0.0;
                for (i, l) in self.link_lengths.iter().enumerate() {
                    heading += x[i];
                    let last = points[i];
                    points.push(last + Point::new(heading.cos(), heading.sin(), 0.0) * *l);
                }
                Chain {
                    points,
                    axes: vec![z; 2],
                }
            }
            ModelKind::Arm4Dof => {
                let yaw = x[0];
                let radial = Point::new(yaw.cos(), yaw.sin(), 0.0);
                let pitch_axis = Point::new(-yaw.sin(), yaw.cos(), 0.0);
                let mut points = vec![Point::zeros(), z * self.link_lengths[0]];
                let mut pitch = 0.0;
                for i in 1..4 {
                    pitch += x[i];
                    let dir = radial * pitch.sin() + z * pitch.cos();
                    let last = points[i];
                    points.push(last + dir * self.link_lengths[i]);
                }
                Chain {
                    points,
                    axes: vec![z, pitch_axis, pitch_axis, pitch_axis],
                }
            }
        }
    }

    /// Forward kinematics: the segments occupied by the robot.
    pub fn link_geometry(&self, x: &DVector<f64>) -> LinkGeometry {
        let chain = self.chain(x);
        let segments = if chain.points.len() == 1 {
            vec![Segment {
                start: chain.points[0],
                end: chain.points[0],
            }]
        } else {
            chain
                .points
                .windows(2)
                .map(|w| Segment {
                    start: w[0],
                    end: w[1],
                })
                .collect()
        };
        LinkGeometry { segments }
    }

    pub fn end_effector(&self, x: &DVector<f64>) -> Point {
        let chain = self.chain(x);
        *chain.points.last().expect("chain has at least one point")
    }

    pub fn end_effector_arc(&self) -> ArcParam {
        match self.kind {
            ModelKind::Ball | ModelKind::Unicycle => ArcParam {
                link: 0,
                fraction: 0.0,
            },
            _ => ArcParam {
                link: self.link_lengths.len() - 1,
                fraction: 1.0,
            },
        }
    }

    /// Closest point on the robot to `target`, with its arc parameter.
    /// Ties resolve to the lowest link index.
    pub fn critical_point(&self, x: &DVector<f64>, target: &Point) -> (Point, ArcParam) {
        let geometry = self.link_geometry(x);
        let mut best: Option<(f64, Point, ArcParam)> = None;
        for (link, seg) in geometry.segments.iter().enumerate() {
            let fraction = seg.closest_fraction(target);
            let p = seg.point_at(fraction);
            let dist = (p - target).norm();
            if best.as_ref().is_none_or(|(d, _, _)| dist < *d) {
                best = Some((dist, p, ArcParam { link, fraction }));
            }
        }
        let (_, p, arc) = best.expect("geometry has at least one segment");
        (p, arc)
    }

    /// Position of the skeleton point with a fixed arc parameter.
    pub fn point_at(&self, x: &DVector<f64>, arc: ArcParam) -> Point {
        self.link_geometry(x).segments[arc.link].point_at(arc.fraction)
    }

    /// Jacobian of the skeleton point at `arc` with respect to the full
    /// state, `3 x n_x`. The arc parameter is held fixed. Planar models have
    /// a zero third row.
    pub fn critical_jacobian(&self, x: &DVector<f64>, arc: ArcParam) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(3, self.n_x());
        match self.kind {
            ModelKind::Ball | ModelKind::Unicycle => {
                jac[(0, 0)] = 1.0;
                jac[(1, 1)] = 1.0;
            }
            ModelKind::Scara | ModelKind::Arm4Dof => {
                let chain = self.chain(x);
                let seg_start = chain.points[arc.link];
                let seg_end = chain.points[arc.link + 1];
                let p = seg_start + (seg_end - seg_start) * arc.fraction;
                for j in 0..=arc.link {
                    let col = chain.axes[j].cross(&(p - chain.points[j]));
                    jac.fixed_view_mut::<3, 1>(0, j).copy_from(&col);
                }
            }
        }
        jac
    }

    pub fn end_effector_jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.critical_jacobian(x, self.end_effector_arc())
    }

    /// A resting state with the point robot at `position`, or the arm in its
    /// home configuration.
    pub fn initial_state(&self, position: [f64; 2]) -> DVector<f64> {
        let mut x = DVector::zeros(self.n_x());
        match self.kind {
            ModelKind::Ball | ModelKind::Unicycle => {
                x[0] = position[0];
                x[1] = position[1];
            }
            ModelKind::Scara => {
                x[0] = 0.3;
                x[1] = 1.2;
            }
            ModelKind::Arm4Dof => {
                x[1] = 0.9;
                x[2] = 0.9;
                x[3] = 0.4;
            }
        }
        x
    }

    /// Velocity of the skeleton point at `arc`, `J * f(x)`.
    pub fn point_velocity(&self, x: &DVector<f64>, arc: ArcParam) -> Point {
        let v = self.critical_jacobian(x, arc) * self.drift(x);
        Point::new(v[0], v[1], v[2])
    }

    /// Zeroes all velocity-like actuated rows (used to freeze the robot).
    pub fn at_rest(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut x = x.clone();
        match self.kind {
            ModelKind::Unicycle => x[2] = 0.0,
            _ => {
                for row in self.actuated_rows() {
                    x[row] = 0.0;
                }
            }
        }
        x
    }
}
