//! Linear Kalman filter.
//!
//! Used by the benchmark to estimate agent positions and velocities from
//! noisy position measurements under a constant-velocity model.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBelief {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl GaussianBelief {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if covariance.shape() != (n, n) {
            return Err(Error::Dimension {
                what: "covariance",
                expected: n,
                actual: covariance.nrows(),
            });
        }
        Ok(Self { mean, covariance })
    }

    /// Smallest eigenvalue of the (symmetrised) covariance.
    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.covariance + self.covariance.transpose()) * 0.5;
        sym.symmetric_eigenvalues().min()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanConfig {
    pub transition: DMatrix<f64>,
    pub input: DMatrix<f64>,
    pub observation: DMatrix<f64>,
    pub process_noise: DMatrix<f64>,
    pub measurement_noise: DMatrix<f64>,
}

impl KalmanConfig {
    pub fn new(
        transition: DMatrix<f64>,
        input: DMatrix<f64>,
        observation: DMatrix<f64>,
        process_noise: DMatrix<f64>,
        measurement_noise: DMatrix<f64>,
    ) -> Result<Self> {
        let n = transition.nrows();
        let m = observation.nrows();
        let check = |what, ok: bool, expected, actual| {
            if ok {
                Ok(())
            } else {
                Err(Error::Dimension { what, expected, actual })
            }
        };
        check("transition", transition.is_square(), n, transition.ncols())?;
        check("input", input.nrows() == n, n, input.nrows())?;
        check("observation", observation.ncols() == n, n, observation.ncols())?;
        check("process noise", process_noise.shape() == (n, n), n, process_noise.nrows())?;
        check(
            "measurement noise",
            measurement_noise.shape() == (m, m),
            m,
            measurement_noise.nrows(),
        )?;
        Ok(Self {
            transition,
            input,
            observation,
            process_noise,
            measurement_noise,
        })
    }

    /// Planar constant-velocity model over `[px, py, vx, vy]` with
    /// acceleration input, position measurements and white acceleration
    /// noise of standard deviation `accel_sigma`.
    pub fn constant_velocity(dt: f64, accel_sigma: f64, position_sigma: f64) -> Self {
        let mut a = DMatrix::identity(4, 4);
        a[(0, 2)] = dt;
        a[(1, 3)] = dt;
        let mut b = DMatrix::zeros(4, 2);
        b[(0, 0)] = 0.5 * dt * dt;
        b[(1, 1)] = 0.5 * dt * dt;
        b[(2, 0)] = dt;
        b[(3, 1)] = dt;
        let mut c = DMatrix::zeros(2, 4);
        c[(0, 0)] = 1.0;
        c[(1, 1)] = 1.0;
        let q = &b * b.transpose() * (accel_sigma * accel_sigma);
        let r = DMatrix::identity(2, 2) * (position_sigma * position_sigma);
        Self {
            transition: a,
            input: b,
            observation: c,
            process_noise: q,
            measurement_noise: r,
        }
    }
}

pub fn kf_predict(cfg: &KalmanConfig, belief: &GaussianBelief, u: &DVector<f64>) -> GaussianBelief {
    let a = &cfg.transition;
    GaussianBelief {
        mean: a * &belief.mean + &cfg.input * u,
        covariance: a * &belief.covariance * a.transpose() + &cfg.process_noise,
    }
}

/// Measurement update with the Joseph-form covariance.
pub fn kf_update(cfg: &KalmanConfig, belief: &GaussianBelief, z: &DVector<f64>) -> Result<GaussianBelief> {
    let c = &cfg.observation;
    let p = &belief.covariance;
    let innovation = z - c * &belief.mean;
    let s = c * p * c.transpose() + &cfg.measurement_noise;
    let s_inv = s.try_inverse().ok_or(Error::SingularInnovation)?;
    if s_inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularInnovation);
    }
    let gain = p * c.transpose() * s_inv;
    let n = belief.mean.len();
    let i_kc = DMatrix::identity(n, n) - &gain * c;
    let covariance = &i_kc * p * i_kc.transpose() + &gain * &cfg.measurement_noise * gain.transpose();
    Ok(GaussianBelief {
        mean: &belief.mean + &gain * innovation,
        covariance: (&covariance + covariance.transpose()) * 0.5,
    })
}

/// Sensing settings for the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig {
    /// Bypass the filter and read the true states.
    pub perfect_sensing: bool,
    /// Position measurement noise, meters.
    pub position_sigma: f64,
    /// Assumed acceleration noise of the human agent, m/s^2.
    pub human_accel_sigma: f64,
    /// Assumed acceleration noise of the robot (its control is known).
    pub robot_accel_sigma: f64,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            perfect_sensing: false,
            position_sigma: 0.01,
            human_accel_sigma: 2.0,
            robot_accel_sigma: 0.05,
        }
    }
}

impl EstimationConfig {
    pub fn perfect() -> Self {
        Self {
            perfect_sensing: true,
            ..Self::default()
        }
    }
}

/// Constant-velocity tracker of one planar point.
#[derive(Debug, Clone)]
pub struct PointTracker {
    cfg: KalmanConfig,
    belief: Option<GaussianBelief>,
    velocity_prior_sigma: f64,
}

impl PointTracker {
    pub fn new(dt: f64, accel_sigma: f64, position_sigma: f64) -> Self {
        Self {
            cfg: KalmanConfig::constant_velocity(dt, accel_sigma, position_sigma),
            belief: None,
            velocity_prior_sigma: 1.0,
        }
    }

    /// Predicts with acceleration `accel` then fuses the measurement `z`.
    /// Returns `[px, py, vx, vy]`.
    pub fn observe(&mut self, accel: [f64; 2], z: [f64; 2]) -> Result<[f64; 4]> {
        let z = DVector::from_row_slice(&z);
        let belief = match &self.belief {
            None => {
                let r = self.cfg.measurement_noise[(0, 0)];
                let v = self.velocity_prior_sigma * self.velocity_prior_sigma;
                GaussianBelief::new(
                    DVector::from_vec(vec![z[0], z[1], 0.0, 0.0]),
                    DMatrix::from_diagonal(&DVector::from_vec(vec![r, r, v, v])),
                )?
            }
            Some(b) => {
                let predicted = kf_predict(&self.cfg, b, &DVector::from_row_slice(&accel));
                kf_update(&self.cfg, &predicted, &z)?
            }
        };
        let m = &belief.mean;
        let out = [m[0], m[1], m[2], m[3]];
        self.belief = Some(belief);
        Ok(out)
    }

    pub fn belief(&self) -> Option<&GaussianBelief> {
        self.belief.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn identity_cfg(q: f64, r: f64) -> KalmanConfig {
        KalmanConfig::new(
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 1),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2) * q,
            DMatrix::identity(2, 2) * r,
        )
        .unwrap()
    }

    fn belief(mean: [f64; 2], var: f64) -> GaussianBelief {
        GaussianBelief::new(DVector::from_row_slice(&mean), DMatrix::identity(2, 2) * var).unwrap()
    }

    #[test]
    fn identity_prediction_without_noise() {
        let b = belief([1.0, -2.0], 0.3);
        let next = kf_predict(&identity_cfg(0.0, 1.0), &b, &DVector::zeros(1));
        assert_eq!(next, b);
    }

    #[test]
    fn process_noise_grows_covariance() {
        let b = belief([0.0, 0.0], 0.3);
        let next = kf_predict(&identity_cfg(0.04, 1.0), &b, &DVector::zeros(1));
        assert!((next.covariance - DMatrix::identity(2, 2) * 0.34).norm() < 1e-15);
    }

    #[test]
    fn constant_velocity_prediction() {
        let cfg = KalmanConfig::constant_velocity(0.05, 0.0, 0.01);
        let b = GaussianBelief::new(DVector::from_vec(vec![1.0, 2.0, 3.0, -4.0]), DMatrix::identity(4, 4)).unwrap();
        let next = kf_predict(&cfg, &b, &DVector::zeros(2));
        assert!((next.mean[0] - 1.15).abs() < 1e-15);
        assert!((next.mean[1] - 1.8).abs() < 1e-15);
    }

    #[test]
    fn perfect_measurement_snaps_to_observation() {
        let next = kf_update(&identity_cfg(0.0, 1e-14), &belief([0.0, 0.0], 1.0), &DVector::from_vec(vec![3.0, -1.0])).unwrap();
        assert!((next.mean - DVector::from_vec(vec![3.0, -1.0])).norm() < 1e-9);
    }

    #[test]
    fn uninformative_measurement_keeps_prior() {
        let z = DVector::from_vec(vec![3.0, -1.0]);
        let prior = belief([0.0, 0.0], 1.0);
        let next = kf_update(&identity_cfg(0.0, 1e12), &prior, &z).unwrap();
        assert!((&next.mean - &prior.mean).norm() <= 1e-6 * z.norm());
    }

    #[test]
    fn singular_innovation_is_an_error() {
        let cfg = identity_cfg(0.0, 0.0);
        let err = kf_update(&cfg, &belief([0.0, 0.0], 0.0), &DVector::zeros(2));
        assert!(matches!(err, Err(Error::SingularInnovation)));
    }

    #[test]
    fn static_truth_is_recovered_within_three_sigma() {
        let cfg = KalmanConfig::new(
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 1),
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 2),
            DMatrix::identity(2, 2) * 0.01,
        )
        .unwrap();
        let truth = DVector::from_vec(vec![0.7, -1.2]);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let mut hits = 0;
        for trial in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(trial);
            let mut b = belief([0.0, 0.0], 10.0);
            for _ in 0..200 {
                let z = truth.map(|t| t + noise.sample(&mut rng));
                b = kf_update(&cfg, &b, &z).unwrap();
            }
            let within = (0..2).all(|i| (b.mean[i] - truth[i]).abs() <= 3.0 * b.covariance[(i, i)].sqrt());
            hits += usize::from(within);
        }
        assert!(hits >= 95, "{hits}/100");
    }

    #[test]
    fn covariance_stays_positive_semidefinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let dt = rng.random_range(0.001..0.2);
            let cfg = KalmanConfig::constant_velocity(dt, rng.random_range(0.0..3.0), rng.random_range(1e-4..1.0));
            let mut b = GaussianBelief::new(DVector::zeros(4), DMatrix::identity(4, 4) * rng.random_range(1e-6..10.0)).unwrap();
            for _ in 0..5 {
                b = kf_predict(&cfg, &b, &DVector::from_vec(vec![rng.random_range(-1.0..1.0), 0.0]));
                let z = DVector::from_vec(vec![rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)]);
                b = kf_update(&cfg, &b, &z).unwrap();
            }
            assert!(b.min_eigenvalue() >= -1e-10);
        }
    }

    #[test]
    fn zero_noise_tracking_is_exact() {
        // Exact constant-acceleration model, no process noise, near-zero R.
        let dt = 0.05;
        let mut cfg = KalmanConfig::constant_velocity(dt, 0.0, 1e-7);
        cfg.measurement_noise = DMatrix::identity(2, 2) * 1e-14;
        let mut truth = DVector::from_vec(vec![0.0, 0.0, 1.0, -0.5]);
        let mut b = GaussianBelief::new(truth.clone(), DMatrix::identity(4, 4) * 1e-12).unwrap();
        let u = DVector::from_vec(vec![0.3, 0.2]);
        for _ in 0..100 {
            truth = &cfg.transition * &truth + &cfg.input * &u;
            b = kf_predict(&cfg, &b, &u);
            b = kf_update(&cfg, &b, &(&cfg.observation * &truth)).unwrap();
            assert!((&b.mean - &truth).norm() < 1e-9);
        }
    }

    #[test]
    fn tracker_is_deterministic() {
        let run = || {
            let mut t = PointTracker::new(0.05, 1.0, 0.01);
            (0..20).map(|i| t.observe([0.0, 0.0], [i as f64 * 0.05, 0.0]).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
        let last = run().pop().unwrap();
        assert!((last[2] - 1.0).abs() < 0.1);
    }
}
