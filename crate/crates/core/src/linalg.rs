//! Small fixed-size linear algebra helpers on top of nalgebra.

use nalgebra::{Matrix2, Matrix2x4, Matrix4, SymmetricEigen, Vector2};

pub type Mat2 = Matrix2<f64>;
pub type Mat4 = Matrix4<f64>;
pub type Vec2 = Vector2<f64>;

/// Position selector for the `[x, y, vx, vy]` state.
pub fn position_selector() -> Matrix2x4<f64> {
    Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
}

/// Constant-velocity transition over `dt`.
pub fn cv_transition(dt: f64) -> Mat4 {
    Mat4::new(
        1.0, 0.0, dt, 0.0, //
        0.0, 1.0, 0.0, dt, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    )
}

/// Piecewise-constant white acceleration noise with spectral density `q`.
pub fn cv_process_noise(dt: f64, q: f64) -> Mat4 {
    let d3 = q * dt.powi(3) / 3.0;
    let d2 = q * dt.powi(2) / 2.0;
    let d1 = q * dt;
    Mat4::new(
        d3, 0.0, d2, 0.0, //
        0.0, d3, 0.0, d2, //
        d2, 0.0, d1, 0.0, //
        0.0, d2, 0.0, d1,
    )
}

pub fn symmetrize4(m: &Mat4) -> Mat4 {
    (m + m.transpose()) * 0.5
}

pub fn symmetrize2(m: &Mat2) -> Mat2 {
    (m + m.transpose()) * 0.5
}

/// Symmetric square root of an SPD 2x2 matrix via eigendecomposition.
pub fn sqrtm2(m: &Mat2) -> Mat2 {
    let eig = SymmetricEigen::new(symmetrize2(m));
    let d = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    eig.eigenvectors * Mat2::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Inverse symmetric square root of an SPD 2x2 matrix.
pub fn inv_sqrtm2(m: &Mat2) -> Option<Mat2> {
    let eig = SymmetricEigen::new(symmetrize2(m));
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return None;
    }
    let d = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    Some(eig.eigenvectors * Mat2::from_diagonal(&d) * eig.eigenvectors.transpose())
}

pub fn is_spd2(m: &Mat2) -> bool {
    m[(0, 0)] > 0.0 && m.determinant() > 0.0 && (m[(0, 1)] - m[(1, 0)]).abs() <= 1e-9 * m.abs().max()
}

/// Log-density of a 2D Gaussian evaluated at innovation `nu` with covariance `s`.
pub fn log_normal2(nu: &Vec2, s: &Mat2) -> Option<f64> {
    let det = s.determinant();
    if det <= 0.0 || !det.is_finite() {
        return None;
    }
    let inv = s.try_inverse()?;
    let maha = (nu.transpose() * inv * nu)[(0, 0)];
    Some(-0.5 * maha - 0.5 * det.ln() - (2.0 * std::f64::consts::PI).ln())
}

/// Squared Mahalanobis distance.
pub fn mahalanobis2(nu: &Vec2, s: &Mat2) -> Option<f64> {
    let inv = s.try_inverse()?;
    Some((nu.transpose() * inv * nu)[(0, 0)])
}

/// `log(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `log(sum(exp(x)))`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Chi-square quantile with two degrees of freedom: `-2 ln(1 - p)`.
pub fn chi2_2dof_quantile(p: f64) -> f64 {
    -2.0 * (1.0 - p).ln()
}
