//! Gaussian kinematic state `[x, y, vx, vy]` under a constant-velocity model.

use nalgebra::{Matrix2x4, Vector4};

use crate::linalg::{cv_process_noise, cv_transition, position_selector, symmetrize4, Mat2, Mat4, Vec2};

#[derive(Debug, Clone, PartialEq)]
pub struct KinematicGaussian {
    pub mean: Vector4<f64>,
    pub cov: Mat4,
}

/// Result of a position-only Kalman update.
pub struct KalmanUpdate {
    pub posterior: KinematicGaussian,
    pub innovation: Vec2,
    pub innovation_cov: Mat2,
}

impl KinematicGaussian {
    pub fn new(mean: [f64; 4], cov: Mat4) -> Self {
        Self {
            mean: Vector4::from(mean),
            cov,
        }
    }

    /// Stationary-at-position prior with independent position and velocity spread.
    pub fn at_position(pos: Vec2, pos_cov: &Mat2, vel_std: f64) -> Self {
        let mut cov = Mat4::zeros();
        cov.fixed_view_mut::<2, 2>(0, 0).copy_from(pos_cov);
        cov[(2, 2)] = vel_std * vel_std;
        cov[(3, 3)] = vel_std * vel_std;
        Self {
            mean: Vector4::new(pos.x, pos.y, 0.0, 0.0),
            cov,
        }
    }

    #[inline]
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.mean[0], self.mean[1])
    }

    #[inline]
    pub fn velocity(&self) -> Vec2 {
        Vec2::new(self.mean[2], self.mean[3])
    }

    pub fn position_cov(&self) -> Mat2 {
        self.cov.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn predict(&self, dt: f64, q: f64) -> Self {
        let f = cv_transition(dt);
        Self {
            mean: f * self.mean,
            cov: symmetrize4(&(f * self.cov * f.transpose() + cv_process_noise(dt, q))),
        }
    }

    /// Innovation and its covariance for a position measurement with noise `r`.
    pub fn innovation(&self, z: &Vec2, r: &Mat2) -> (Vec2, Mat2) {
        let h = position_selector();
        let nu = z - h * self.mean;
        let s = h * self.cov * h.transpose() + r;
        (nu, s)
    }

    /// Kalman update on a position measurement `z` with noise covariance `r`.
    pub fn update(&self, z: &Vec2, r: &Mat2) -> Option<KalmanUpdate> {
        let h: Matrix2x4<f64> = position_selector();
        let (nu, s) = self.innovation(z, r);
        let s_inv = s.try_inverse()?;
        let k = self.cov * h.transpose() * s_inv;
        let mean = self.mean + k * nu;
        let cov = symmetrize4(&(self.cov - k * s * k.transpose()));
        Some(KalmanUpdate {
            posterior: Self { mean, cov },
            innovation: nu,
            innovation_cov: s,
        })
    }

    pub fn is_valid(&self) -> bool {
        let c = &self.cov;
        self.mean.iter().all(|v| v.is_finite())
            && (c - c.transpose()).abs().max() <= 1e-9 * (1.0 + c.abs().max())
            && c.cholesky().is_some()
    }
}

/// Moment-matched single Gaussian of a weighted mixture. Weights need not be
/// normalized but must sum to a positive value.
pub fn merge_gaussians(components: &[(f64, KinematicGaussian)]) -> Option<KinematicGaussian> {
    let total: f64 = components.iter().map(|(w, _)| *w).sum();
    if !(total > 0.0) {
        return None;
    }
    let mean = components
        .iter()
        .fold(Vector4::zeros(), |acc, (w, g)| acc + g.mean * (*w / total));
    let cov = components.iter().fold(Mat4::zeros(), |acc, (w, g)| {
        let d = g.mean - mean;
        acc + (g.cov + d * d.transpose()) * (*w / total)
    });
    Some(KinematicGaussian {
        mean,
        cov: symmetrize4(&cov),
    })
}
