//! Gamma Gaussian inverse-Wishart single-object model in the BEV plane.
//!
//! * Gamma `(a, b)`: Poisson rate of the number of points the object returns.
//! * Gaussian: kinematic state `[x, y, vx, vy]`.
//! * Inverse Wishart `(v, V)`: elliptical extent with expected value
//!   `V / (v - 6)`.
//!
//! Updates use the conjugate cluster statistics (count, centroid, scatter),
//! with the centroid innovation spread folded into the extent scale matrix.

use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

use crate::kinematics::KinematicGaussian;
use crate::linalg::{inv_sqrtm2, mahalanobis2, position_selector, sqrtm2, symmetrize2, symmetrize4, Mat2, Vec2};
use crate::partitioning::Cluster;

/// Degrees of freedom below which the extent mean does not exist (2D).
pub const MIN_EXTENT_DOF: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRate {
    pub shape: f64,
    pub rate: f64,
}

impl GammaRate {
    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn variance(&self) -> f64 {
        self.shape / (self.rate * self.rate)
    }

    /// Probability that a Poisson count with this gamma-distributed rate is zero.
    pub fn prob_no_points(&self) -> f64 {
        (self.rate / (self.rate + 1.0)).powf(self.shape)
    }

    pub fn is_valid(&self) -> bool {
        self.shape.is_finite() && self.rate.is_finite() && self.shape > 0.0 && self.rate > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseWishartExtent {
    pub dof: f64,
    pub scale: Mat2,
}

impl InverseWishartExtent {
    /// Extent distribution with expected value `expected` and `dof` degrees of freedom.
    pub fn with_mean(dof: f64, expected: &Mat2) -> Self {
        Self {
            dof,
            scale: expected * (dof - MIN_EXTENT_DOF),
        }
    }

    pub fn expected(&self) -> Mat2 {
        self.scale / (self.dof - MIN_EXTENT_DOF)
    }

    pub fn is_valid(&self) -> bool {
        self.dof > MIN_EXTENT_DOF && crate::linalg::is_spd2(&self.scale)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GgiwComponent {
    pub rate: GammaRate,
    pub kinematics: KinematicGaussian,
    pub extent: InverseWishartExtent,
}

/// Log of the bivariate gamma function.
pub fn ln_multigamma2(x: f64) -> f64 {
    0.5 * PI.ln() + ln_gamma(x) + ln_gamma(x - 0.5)
}

/// Log of the Poisson-gamma predictive weight of observing `n` points,
/// `Γ(a+n) b^a / (Γ(a) (b+1)^(a+n))` (set-density form, no `n!`).
pub fn ln_gamma_count_likelihood(rate: &GammaRate, n: usize) -> f64 {
    let (a, b) = (rate.shape, rate.rate);
    let n = n as f64;
    ln_gamma(a + n) - ln_gamma(a) + a * b.ln() - (a + n) * (b + 1.0).ln()
}

impl GgiwComponent {
    pub fn is_valid(&self) -> bool {
        self.rate.is_valid() && self.kinematics.is_valid() && self.extent.is_valid()
    }

    /// Gamma forgetting, constant-velocity motion, and exponential extent
    /// decay toward the minimal dof. Gamma mean and expected extent are kept.
    pub fn predict(&self, dt: f64, q: f64, forgetting: f64, extent_tau: f64) -> Self {
        let decay = (-dt / extent_tau).exp();
        Self {
            rate: GammaRate {
                shape: self.rate.shape / forgetting,
                rate: self.rate.rate / forgetting,
            },
            kinematics: self.kinematics.predict(dt, q),
            extent: InverseWishartExtent {
                dof: MIN_EXTENT_DOF + decay * (self.extent.dof - MIN_EXTENT_DOF),
                scale: self.extent.scale * decay,
            },
        }
    }

    /// `P_m`: probability that the object returns at least one point.
    pub fn measurable_prob(&self) -> f64 {
        1.0 - self.rate.prob_no_points()
    }

    /// Innovation of the cluster centroid and its covariance `HPH' + X/n`.
    pub fn centroid_innovation(&self, cluster: &Cluster) -> (Vec2, Mat2) {
        let h = position_selector();
        let n = cluster.count() as f64;
        let eps = cluster.centroid - h * self.kinematics.mean;
        let s = h * self.kinematics.cov * h.transpose() + self.extent.expected() / n;
        (eps, symmetrize2(&s))
    }

    /// Squared Mahalanobis distance of the cluster centroid.
    pub fn centroid_distance2(&self, cluster: &Cluster) -> Option<f64> {
        let (eps, s) = self.centroid_innovation(cluster);
        mahalanobis2(&eps, &s)
    }

    /// Conjugate update with a cluster. Returns the posterior and the log
    /// predictive likelihood of the cluster.
    pub fn update(&self, cluster: &Cluster) -> Option<(Self, f64)> {
        let n = cluster.count();
        if n == 0 {
            return None;
        }
        let nf = n as f64;
        let h = position_selector();
        let x_hat = self.extent.expected();
        let (eps, s) = self.centroid_innovation(cluster);
        let s_inv = s.try_inverse()?;
        let k = self.kinematics.cov * h.transpose() * s_inv;
        let mean = self.kinematics.mean + k * eps;
        let cov = symmetrize4(&(self.kinematics.cov - k * s * k.transpose()));

        let x_sqrt = sqrtm2(&x_hat);
        let s_isqrt = inv_sqrtm2(&s)?;
        let spread = x_sqrt * s_isqrt * eps * eps.transpose() * s_isqrt.transpose() * x_sqrt.transpose();
        let dof = self.extent.dof + nf;
        let scale = symmetrize2(&(self.extent.scale + spread + cluster.scatter));

        let rate = GammaRate {
            shape: self.rate.shape + nf,
            rate: self.rate.rate + 1.0,
        };

        let det_v = self.extent.scale.determinant();
        let det_v_post = scale.determinant();
        let det_x = x_hat.determinant();
        let det_s = s.determinant();
        if !(det_v > 0.0 && det_v_post > 0.0 && det_x > 0.0 && det_s > 0.0) {
            return None;
        }
        let v = self.extent.dof;
        let log_lik = ln_gamma_count_likelihood(&self.rate, n) - nf * PI.ln() - nf.ln()
            + 0.5 * det_x.ln()
            - 0.5 * det_s.ln()
            + 0.5 * (v - 3.0) * det_v.ln()
            - 0.5 * (dof - 3.0) * det_v_post.ln()
            + ln_multigamma2(0.5 * (dof - 3.0))
            - ln_multigamma2(0.5 * (v - 3.0));

        Some((
            Self {
                rate,
                kinematics: KinematicGaussian { mean, cov },
                extent: InverseWishartExtent { dof, scale },
            },
            log_lik,
        ))
    }

    /// Posterior of the missed-detection hypothesis. The object either was
    /// not detected (`1 - Pdm`) or returned no points (`Pdm * P(0)`); the two
    /// gamma branches are merged by moment matching.
    pub fn missed(&self, detection_prob: f64) -> Self {
        let w_undetected = 1.0 - detection_prob;
        let w_silent = detection_prob * self.rate.prob_no_points();
        let total = w_undetected + w_silent;
        if !(total > 0.0) || w_silent <= 0.0 {
            return self.clone();
        }
        let (a, b) = (self.rate.shape, self.rate.rate);
        let branches = [(w_undetected / total, b), (w_silent / total, b + 1.0)];
        let mean: f64 = branches.iter().map(|(w, bb)| w * a / bb).sum();
        let second: f64 = branches.iter().map(|(w, bb)| w * a * (a + 1.0) / (bb * bb)).sum();
        let var = second - mean * mean;
        let rate = if var > 0.0 {
            GammaRate {
                shape: mean * mean / var,
                rate: mean / var,
            }
        } else {
            GammaRate { shape: a, rate: b + w_silent / total }
        };
        Self {
            rate,
            ..self.clone()
        }
    }
}

/// Gamma and extent prior for newborn objects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirthPrior {
    pub rate: GammaRate,
    pub extent: InverseWishartExtent,
    pub velocity_std: f64,
}

impl BirthPrior {
    /// Log-likelihood of a cluster under a newborn object with a uniform
    /// position prior (the uniform density itself is not included), and the
    /// resulting object posterior.
    pub fn birth_from_cluster(&self, cluster: &Cluster) -> Option<(GgiwComponent, f64)> {
        let n = cluster.count();
        if n == 0 {
            return None;
        }
        let nf = n as f64;
        let v = self.extent.dof;
        let dof = v + nf - 1.0;
        let scale = symmetrize2(&(self.extent.scale + cluster.scatter));
        let det_v = self.extent.scale.determinant();
        let det_v_post = scale.determinant();
        if !(det_v > 0.0 && det_v_post > 0.0) {
            return None;
        }
        let log_lik = ln_gamma_count_likelihood(&self.rate, n) - (nf - 1.0) * PI.ln() - nf.ln()
            + 0.5 * (v - 3.0) * det_v.ln()
            - 0.5 * (dof - 3.0) * det_v_post.ln()
            + ln_multigamma2(0.5 * (dof - 3.0))
            - ln_multigamma2(0.5 * (v - 3.0));
        let extent = InverseWishartExtent { dof, scale };
        let pos_cov = extent.expected() / nf;
        let comp = GgiwComponent {
            rate: GammaRate {
                shape: self.rate.shape + nf,
                rate: self.rate.rate + 1.0,
            },
            kinematics: KinematicGaussian::at_position(cluster.centroid, &pos_cov, self.velocity_std),
            extent,
        };
        Some((comp, log_lik))
    }
}
