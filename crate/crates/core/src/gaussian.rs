//! Gaussian modeling of rotated boxes and the box regression losses built
//! on it (Wasserstein and Kullback-Leibler), plus the parameter-space
//! baselines: IoU-modulated smooth L1 and the corner-permutation-modulated
//! loss for quads.
//!
//! A box `(cx, cy, w, h, theta)` maps to `N(mu, sigma)` with `mu = (cx, cy)`
//! and `sigma = R(theta) diag(w^2/4, h^2/4) R(theta)^T`. Swapping `w` and `h`
//! while turning `theta` by 90 degrees gives the same Gaussian, so these
//! losses see no jump at the angle-range boundaries.
//!
//! Every kernel is generic over [`Real`], so the `*_with_grad` variants get
//! exact gradients from the same code by running it on dual numbers.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Dual, Real};
use crate::error::{Error, Result};
use crate::geometry::{rotated_iou, Convention, Point, Quad, RBox};

/// Covariance eigenvalues are clamped to at least this value.
pub const EIGEN_FLOOR: f64 = 1e-7;
/// Added to the IoU inside the log of the IoU-smooth-L1 magnitude.
pub const IOU_LOG_FLOOR: f64 = 1e-7;
const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Symmetric 2x2 matrix `[[a, b], [b, c]]`.
#[derive(Debug, Clone, Copy)]
struct Sym<T> {
    a: T,
    b: T,
    c: T,
}

impl<T: Real> Sym<T> {
    fn trace(&self) -> T {
        self.a + self.c
    }

    fn det(&self) -> T {
        self.a * self.c - self.b * self.b
    }

    fn minus(&self, o: &Sym<T>) -> Sym<T> {
        Sym {
            a: self.a - o.a,
            b: self.b - o.b,
            c: self.c - o.c,
        }
    }

    /// `tr(self * o)`
    fn trace_product(&self, o: &Sym<T>) -> T {
        self.a * o.a + T::cst(2.0) * self.b * o.b + self.c * o.c
    }
}

#[derive(Debug, Clone, Copy)]
struct Gauss<T> {
    mu: [T; 2],
    sigma: Sym<T>,
}

fn gaussian_of<T: Real>(cx: T, cy: T, w: T, h: T, theta_deg: T) -> Gauss<T> {
    let l1 = (w * w * T::cst(0.25)).floor_at(EIGEN_FLOOR);
    let l2 = (h * h * T::cst(0.25)).floor_at(EIGEN_FLOOR);
    let t = theta_deg * T::cst(std::f64::consts::PI / 180.0);
    let (s, c) = (t.sin(), t.cos());
    Gauss {
        mu: [cx, cy],
        sigma: Sym {
            a: l1 * c * c + l2 * s * s,
            b: (l1 - l2) * s * c,
            c: l1 * s * s + l2 * c * c,
        },
    }
}

/// Squared 2-Wasserstein distance.
///
/// In 2-D, `tr((S1^½ S2 S1^½)^½) = sqrt(tr(S1 S2) + 2 sqrt(det S1 det S2))`
/// (trace/determinant form of the 2x2 matrix square root). The covariance
/// term `t1 + t2 - 2 sqrt(q)` is evaluated as
/// `((t1 - t2)^2 + 4 ((sqrt d1 - sqrt d2)^2 - det(S1 - S2))) / (t1 + t2 + 2 sqrt(q))`,
/// which is algebraically equal but exactly zero for equal covariances.
fn gwd_sq<T: Real>(g1: &Gauss<T>, g2: &Gauss<T>) -> T {
    let (s1, s2) = (&g1.sigma, &g2.sigma);
    let dx = g1.mu[0] - g2.mu[0];
    let dy = g1.mu[1] - g2.mu[1];
    let diff = s1.minus(s2);
    let (d1, d2) = (s1.det(), s2.det());
    let (r1, r2) = (d1.sqrt(), d2.sqrt());
    // d1 - d2 without forming either determinant twice
    let det_gap = diff.a * s1.c + s2.a * diff.c - diff.b * (s1.b + s2.b);
    let root_gap = det_gap / (r1 + r2);
    let trace_gap = diff.trace();
    let four = T::cst(4.0);
    let numerator = trace_gap * trace_gap + four * (root_gap * root_gap - diff.det());
    let q = s1.trace_product(s2) + T::cst(2.0) * r1 * r2;
    let cov_term = numerator / (s1.trace() + s2.trace() + T::cst(2.0) * q.sqrt());
    (dx * dx + dy * dy + cov_term).floor_at(0.0)
}

/// `D(g1 || g2)`, written with `A = S2^-1 (S1 - S2)`:
/// `tr(S2^-1 S1) - 2 = tr A` and `ln(det S2 / det S1) = -ln(1 + tr A + det A)`,
/// so equal covariances give exactly zero.
fn kld<T: Real>(g1: &Gauss<T>, g2: &Gauss<T>) -> T {
    let (s1, s2) = (&g1.sigma, &g2.sigma);
    let det2 = s2.det();
    let diff = s1.minus(s2);
    let two = T::cst(2.0);
    let trace_a = (s2.c * diff.a - two * s2.b * diff.b + s2.a * diff.c) / det2;
    let det_a = diff.det() / det2;
    let x = trace_a + det_a;
    let dx = g2.mu[0] - g1.mu[0];
    let dy = g2.mu[1] - g1.mu[1];
    let mahalanobis = (s2.c * dx * dx - two * s2.b * dx * dy + s2.a * dy * dy) / det2;
    let d = T::cst(0.5) * ((x - x.ln_1p()) - det_a + mahalanobis);
    d.floor_at(0.0)
}

/// 2-D Gaussian with a symmetric positive-definite covariance whose
/// eigenvalues are at least [`EIGEN_FLOOR`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian2 {
    mu: [f64; 2],
    sigma: [[f64; 2]; 2],
}

impl Gaussian2 {
    /// Validates `sigma` (finite, symmetric within 1e-12, positive definite)
    /// and lifts eigenvalues below the floor up to it.
    pub fn new(mu: [f64; 2], sigma: [[f64; 2]; 2]) -> Result<Self> {
        let all = [mu[0], mu[1], sigma[0][0], sigma[0][1], sigma[1][0], sigma[1][1]];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::MatrixDomain("non-finite Gaussian parameter".into()));
        }
        if (sigma[0][1] - sigma[1][0]).abs() > SYMMETRY_TOLERANCE {
            return Err(Error::MatrixDomain(format!("covariance not symmetric: {sigma:?}")));
        }
        let (a, b, c) = (sigma[0][0], 0.5 * (sigma[0][1] + sigma[1][0]), sigma[1][1]);
        let (l_max, l_min, angle) = sym_eigen(a, b, c);
        if l_min <= 0.0 {
            return Err(Error::MatrixDomain(format!(
                "covariance not positive definite (min eigenvalue {l_min})"
            )));
        }
        let sigma = if l_min < EIGEN_FLOOR {
            let (s, co) = angle.sin_cos();
            let l2 = EIGEN_FLOOR;
            let l1 = l_max.max(EIGEN_FLOOR);
            let off = (l1 - l2) * s * co;
            [[l1 * co * co + l2 * s * s, off], [off, l1 * s * s + l2 * co * co]]
        } else {
            [[a, b], [b, c]]
        };
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> [f64; 2] {
        self.mu
    }

    pub fn sigma(&self) -> [[f64; 2]; 2] {
        self.sigma
    }

    fn lift<T: Real>(&self) -> Gauss<T> {
        Gauss {
            mu: [T::cst(self.mu[0]), T::cst(self.mu[1])],
            sigma: Sym {
                a: T::cst(self.sigma[0][0]),
                b: T::cst(self.sigma[0][1]),
                c: T::cst(self.sigma[1][1]),
            },
        }
    }
}

/// Eigenvalues (max, min) of `[[a, b], [b, c]]` and the angle of the
/// major eigenvector.
fn sym_eigen(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let mean = 0.5 * (a + c);
    let radius = (0.5 * (a - c)).hypot(b);
    let angle = 0.5 * (2.0 * b).atan2(a - c);
    (mean + radius, mean - radius, angle)
}

pub fn box_to_gaussian(b: &RBox) -> Result<Gaussian2> {
    b.validate()?;
    let g = gaussian_of(b.cx, b.cy, b.w, b.h, b.theta);
    Ok(Gaussian2 {
        mu: g.mu,
        sigma: [[g.sigma.a, g.sigma.b], [g.sigma.b, g.sigma.c]],
    })
}

/// Squared 2-Wasserstein distance between two Gaussians, px².
pub fn gwd_distance(g1: &Gaussian2, g2: &Gaussian2) -> f64 {
    gwd_sq::<f64>(&g1.lift(), &g2.lift())
}

/// `KL(g1 || g2)` in nats.
pub fn kld_divergence(g1: &Gaussian2, g2: &Gaussian2) -> f64 {
    kld::<f64>(&g1.lift(), &g2.lift())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Transform {
    #[default]
    Sqrt,
    Log1p,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum KldDirection {
    #[default]
    PredToGt,
    GtToPred,
    MinSymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub tau: f64,
    pub transform: Transform,
    pub smooth_l1_beta: f64,
    pub kld_direction: KldDirection,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            tau: 1.0,
            transform: Transform::Sqrt,
            smooth_l1_beta: 1.0,
            kld_direction: KldDirection::PredToGt,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau >= 1.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!("tau must be finite and >= 1, got {}", self.tau)));
        }
        if !(self.smooth_l1_beta > 0.0 && self.smooth_l1_beta.is_finite()) {
            return Err(Error::Config(format!(
                "smooth_l1_beta must be finite and > 0, got {}",
                self.smooth_l1_beta
            )));
        }
        Ok(())
    }

    /// `1 - 1 / (tau + f(distance))`
    fn normalize<T: Real>(&self, distance: T) -> T {
        let f = match self.transform {
            Transform::Sqrt => distance.sqrt(),
            Transform::Log1p => distance.ln_1p(),
        };
        T::cst(1.0) - T::cst(1.0) / (T::cst(self.tau) + f)
    }
}

/// Loss value and its gradient with respect to the prediction's parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossGrad<const N: usize> {
    pub value: f64,
    pub grad: [f64; N],
}

fn box_params(b: &RBox) -> [f64; 5] {
    [b.cx, b.cy, b.w, b.h, b.theta]
}

fn gauss_from_params<T: Real>(p: &[T; 5]) -> Gauss<T> {
    gaussian_of(p[0], p[1], p[2], p[3], p[4])
}

fn lift_box<T: Real>(b: &RBox) -> Gauss<T> {
    let p = box_params(b).map(T::cst);
    gauss_from_params(&p)
}

fn gwd_loss_generic<T: Real>(pred: &[T; 5], gt: &RBox, cfg: &LossConfig) -> T {
    cfg.normalize(gwd_sq(&gauss_from_params(pred), &lift_box(gt)))
}

fn kld_loss_generic<T: Real>(pred: &[T; 5], gt: &RBox, cfg: &LossConfig) -> T {
    let p = gauss_from_params(pred);
    let g = lift_box(gt);
    let d = match cfg.kld_direction {
        KldDirection::PredToGt => kld(&p, &g),
        KldDirection::GtToPred => kld(&g, &p),
        KldDirection::MinSymmetric => kld(&p, &g).min(kld(&g, &p)),
    };
    cfg.normalize(d)
}

fn check_pair(pred: &RBox, gt: &RBox, cfg: &LossConfig) -> Result<()> {
    pred.validate()?;
    gt.validate()?;
    cfg.validate()
}

/// `1 - 1/(tau + f(d^2))` over the squared Wasserstein distance.
pub fn gwd_loss(pred: &RBox, gt: &RBox, cfg: &LossConfig) -> Result<f64> {
    check_pair(pred, gt, cfg)?;
    Ok(gwd_loss_generic(&box_params(pred), gt, cfg))
}

/// [`gwd_loss`] with its gradient in `(cx, cy, w, h, theta)` of `pred`
/// (theta in degrees). Undefined where the distance is exactly zero under
/// the square-root transform.
pub fn gwd_loss_with_grad(pred: &RBox, gt: &RBox, cfg: &LossConfig) -> Result<LossGrad<5>> {
    check_pair(pred, gt, cfg)?;
    let out = gwd_loss_generic(&Dual::seed(box_params(pred)), gt, cfg);
    Ok(LossGrad {
        value: out.v,
        grad: out.d,
    })
}

/// `1 - 1/(tau + f(D))` over the KL divergence picked by
/// `cfg.kld_direction`.
pub fn kld_loss(pred: &RBox, gt: &RBox, cfg: &LossConfig) -> Result<f64> {
    check_pair(pred, gt, cfg)?;
    Ok(kld_loss_generic(&box_params(pred), gt, cfg))
}

pub fn kld_loss_with_grad(pred: &RBox, gt: &RBox, cfg: &LossConfig) -> Result<LossGrad<5>> {
    check_pair(pred, gt, cfg)?;
    let out = kld_loss_generic(&Dual::seed(box_params(pred)), gt, cfg);
    Ok(LossGrad {
        value: out.v,
        grad: out.d,
    })
}

fn smooth_l1_generic<T: Real>(x: T, beta: f64) -> T {
    let ax = x.abs();
    if ax.value() < beta {
        T::cst(0.5 / beta) * x * x
    } else {
        ax - T::cst(0.5 * beta)
    }
}

/// Huber-style smooth L1: quadratic inside `|x| < beta`, linear outside.
pub fn smooth_l1(x: f64, beta: f64) -> f64 {
    smooth_l1_generic(x, beta)
}

/// Derivative of [`smooth_l1`] with respect to `x`.
pub fn smooth_l1_grad(x: f64, beta: f64) -> f64 {
    smooth_l1_generic(Dual::<1>::variable(x, 0), beta).d[0]
}

/// Smooth L1 summed over the five raw box parameters.
pub fn parameter_smooth_l1(pred: &RBox, gt: &RBox, beta: f64) -> f64 {
    box_params(pred)
        .iter()
        .zip(box_params(gt))
        .map(|(p, g)| smooth_l1(p - g, beta))
        .sum()
}

fn iou_log_magnitude(pred: &RBox, gt: &RBox, cfg: &LossConfig) -> Result<f64> {
    check_pair(pred, gt, cfg)?;
    if pred.convention != gt.convention {
        return Err(Error::InvalidBox(format!(
            "convention mismatch: pred {} vs gt {}",
            pred.convention, gt.convention
        )));
    }
    let iou = rotated_iou(pred, gt)?;
    Ok((-(iou + IOU_LOG_FLOOR).ln()).max(0.0))
}

/// Value of the IoU-smooth-L1 loss: `-ln(IoU + 1e-7)`, clamped at zero.
///
/// The gradient direction comes from the smooth L1 over the parameters; see
/// [`iou_smooth_l1_grad`].
pub fn iou_smooth_l1_loss(pred: &RBox, gt: &RBox, cfg: &LossConfig) -> Result<f64> {
    iou_log_magnitude(pred, gt, cfg)
}

/// Gradient of `(u / stop_grad(u)) * stop_grad(|-ln(IoU + 1e-7)|)` with
/// `u` the summed parameter smooth L1, i.e. `grad(u) / u * magnitude`. Zero
/// when `u == 0`.
pub fn iou_smooth_l1_grad(pred: &RBox, gt: &RBox, cfg: &LossConfig) -> Result<[f64; 5]> {
    let magnitude = iou_log_magnitude(pred, gt, cfg)?;
    let beta = cfg.smooth_l1_beta;
    let p = Dual::<5>::seed(box_params(pred));
    let g = box_params(gt);
    let mut u = Dual::<5>::constant(0.0);
    for i in 0..5 {
        u = u + smooth_l1_generic(p[i] - Dual::constant(g[i]), beta);
    }
    if u.v == 0.0 {
        return Ok([0.0; 5]);
    }
    Ok(u.d.map(|d| d / u.v * magnitude))
}

fn corner_loss<T: Real>(pred: &[T; 8], gt: &[f64; 8], shift: usize, beta: f64) -> T {
    let mut total = T::cst(0.0);
    for i in 0..4 {
        let j = (i + shift) % 4;
        total = total + smooth_l1_generic(pred[2 * j] - T::cst(gt[2 * i]), beta);
        total = total + smooth_l1_generic(pred[2 * j + 1] - T::cst(gt[2 * i + 1]), beta);
    }
    total
}

fn rsdet_generic<T: Real>(pred: &[T; 8], gt: &[f64; 8], beta: f64) -> T {
    (1..4).fold(corner_loss(pred, gt, 0, beta), |best, k| {
        best.min(corner_loss(pred, gt, k, beta))
    })
}

/// Corner loss between canonical quads with pred vertices cyclically
/// shifted by `shift`; `shift == 0` is the unmodulated loss.
pub fn rsdet_corner_loss(pred: &Quad, gt: &Quad, shift: usize, beta: f64) -> f64 {
    corner_loss(&pred.coords(), &gt.coords(), shift % 4, beta)
}

/// Minimum over the four cyclic vertex correspondences of the summed
/// per-coordinate smooth L1. Both quads are counterclockwise by
/// construction.
pub fn rsdet_modulated_loss(pred: &Quad, gt: &Quad, cfg: &LossConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(rsdet_generic(&pred.coords(), &gt.coords(), cfg.smooth_l1_beta))
}

/// [`rsdet_modulated_loss`] with its gradient in the canonical vertex
/// coordinates of `pred` (`x1, y1, ..., x4, y4`).
pub fn rsdet_modulated_loss_with_grad(pred: &Quad, gt: &Quad, cfg: &LossConfig) -> Result<LossGrad<8>> {
    cfg.validate()?;
    let out = rsdet_generic(&Dual::seed(pred.coords()), &gt.coords(), cfg.smooth_l1_beta);
    Ok(LossGrad {
        value: out.v,
        grad: out.d,
    })
}

/// Central finite differences:
/// `g[i] = (f(x + step e_i) - f(x - step e_i)) / (2 step)`.
pub fn numeric_gradient<F>(loss: F, at: &[f64], step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Range(format!("finite-difference step must be > 0, got {step}")));
    }
    let mut x = at.to_vec();
    let mut grad = Vec::with_capacity(at.len());
    for i in 0..at.len() {
        x[i] = at[i] + step;
        let up = loss(&x);
        x[i] = at[i] - step;
        let down = loss(&x);
        x[i] = at[i];
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}

/// The same rectangle described with `w` and `h` swapped and `theta`
/// turned by +90 degrees; the returned box is generally not canonical.
pub fn definition_twin(b: &RBox) -> RBox {
    RBox {
        w: b.h,
        h: b.w,
        theta: b.theta + 90.0,
        ..*b
    }
}

/// Quad vertices as a box parameter vector helper for finite differences.
pub fn quad_from_params(p: &[f64]) -> Result<Quad> {
    if p.len() != 8 {
        return Err(Error::Range(format!("expected 8 quad coordinates, got {}", p.len())));
    }
    Quad::new([
        Point::new(p[0], p[1]),
        Point::new(p[2], p[3]),
        Point::new(p[4], p[5]),
        Point::new(p[6], p[7]),
    ])
}

/// Box from `(cx, cy, w, h, theta)`; `convention` is only carried along.
pub fn rbox_from_params(p: &[f64], convention: Convention) -> Result<RBox> {
    if p.len() != 5 {
        return Err(Error::Range(format!("expected 5 box parameters, got {}", p.len())));
    }
    RBox::new(p[0], p[1], p[2], p[3], p[4], convention)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rbox_to_quad;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn diag(mu: [f64; 2], a: f64, c: f64) -> Gaussian2 {
        Gaussian2::new(mu, [[a, 0.0], [0.0, c]]).unwrap()
    }

    #[test]
    fn gaussian_of_axis_aligned_box() {
        let g = box_to_gaussian(&RBox::le(0.0, 0.0, 4.0, 2.0, 0.0).unwrap()).unwrap();
        assert_eq!(g.mu(), [0.0, 0.0]);
        let s = g.sigma();
        assert!(close(s[0][0], 4.0, 1e-15) && close(s[1][1], 1.0, 1e-15) && close(s[0][1], 0.0, 1e-15));
    }

    #[test]
    fn gaussian_of_square_is_isotropic() {
        for theta in [-80.0, -33.0, 0.0, 17.5, 60.0] {
            let g = box_to_gaussian(&RBox::le(0.0, 0.0, 2.0, 2.0, theta).unwrap()).unwrap();
            let s = g.sigma();
            assert!(close(s[0][0], 1.0, 1e-15) && close(s[1][1], 1.0, 1e-15) && close(s[0][1], 0.0, 1e-15));
        }
    }

    #[test]
    fn gaussian_matches_explicit_rotation_product() {
        let g = box_to_gaussian(&RBox::le(1.0, 2.0, 4.0, 2.0, 30.0).unwrap()).unwrap();
        let t = 30f64.to_radians();
        let r = [[t.cos(), -t.sin()], [t.sin(), t.cos()]];
        let d = [4.0, 1.0];
        let mut expect = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    expect[i][j] += r[i][k] * d[k] * r[j][k];
                }
            }
        }
        let s = g.sigma();
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(s[i][j], expect[i][j], 1e-14));
            }
        }
        assert_eq!(g.mu(), [1.0, 2.0]);
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        assert!(close(det, (4.0 * 2.0 / 4.0f64).powi(2), 1e-12));
    }

    #[test]
    fn gaussian_new_rejects_non_spd() {
        assert!(matches!(
            Gaussian2::new([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]]),
            Err(Error::MatrixDomain(_))
        ));
        assert!(matches!(
            Gaussian2::new([0.0, 0.0], [[1.0, 0.1], [0.2, 1.0]]),
            Err(Error::MatrixDomain(_))
        ));
        let g = Gaussian2::new([0.0, 0.0], [[1.0, 0.0], [0.0, 1e-12]]).unwrap();
        assert!(close(g.sigma()[1][1], EIGEN_FLOOR, 1e-20));
    }

    #[test]
    fn gwd_examples() {
        let a = diag([0.0, 0.0], 4.0, 1.0);
        assert_eq!(gwd_distance(&a, &a), 0.0);
        let b = diag([1.0, 0.0], 9.0, 1.0);
        assert!(close(gwd_distance(&a, &b), 2.0, 1e-12));
        assert!(close(gwd_distance(&b, &a), 2.0, 1e-12));
    }

    #[test]
    fn kld_examples() {
        let i0 = diag([0.0, 0.0], 1.0, 1.0);
        assert_eq!(kld_divergence(&i0, &i0), 0.0);
        let i1 = diag([1.0, 0.0], 1.0, 1.0);
        assert!(close(kld_divergence(&i0, &i1), 0.5, 1e-15));

        let wide = diag([0.0, 0.0], 4.0, 1.0);
        let fwd = kld_divergence(&wide, &i0);
        let rev = kld_divergence(&i0, &wide);
        assert!(close(fwd, 0.5 * (5.0 - 2.0 - 4f64.ln()), 1e-15));
        assert!(close(rev, 0.5 * (0.25 + 1.0 - 2.0 + 4f64.ln()), 1e-15));
        assert!(close(fwd, 0.8069, 1e-4) && close(rev, 0.3181, 1e-4));
    }

    #[test]
    fn gwd_loss_examples() {
        let cfg = LossConfig::default();
        let gt = RBox::le(0.0, 0.0, 4.0, 2.0, 0.0).unwrap();
        assert_eq!(gwd_loss(&gt, &gt, &cfg).unwrap(), 0.0);

        // sigma diag(4,1) vs diag(9,1) with unit center offset: d^2 = 2
        let pred = RBox::le(1.0, 0.0, 6.0, 2.0, 0.0).unwrap();
        let l = gwd_loss(&pred, &gt, &cfg).unwrap();
        assert!(close(l, 1.0 - 1.0 / (1.0 + 2f64.sqrt()), 1e-12));
        assert!(close(l, 0.58579, 1e-5));

        assert!(gwd_loss(&definition_twin(&gt), &gt, &cfg).unwrap() <= 1e-9);
    }

    #[test]
    fn kld_loss_examples() {
        let cfg = LossConfig::default();
        let gt = RBox::le(0.0, 0.0, 2.0, 2.0, 0.0).unwrap();
        assert_eq!(kld_loss(&gt, &gt, &cfg).unwrap(), 0.0);
        let pred = RBox::le(1.0, 0.0, 2.0, 2.0, 0.0).unwrap();
        let l = kld_loss(&pred, &gt, &cfg).unwrap();
        assert!(close(l, 1.0 - 1.0 / (1.0 + 0.5f64.sqrt()), 1e-12));
        assert!(close(l, 0.41421, 1e-5));

        let b = RBox::le(3.0, 1.0, 5.0, 2.0, 20.0).unwrap();
        let twin = RBox {
            w: b.h,
            h: b.w,
            theta: b.theta - 90.0,
            ..b
        };
        assert!(kld_loss(&twin, &b, &cfg).unwrap() <= 1e-9);
    }

    #[test]
    fn kld_directions() {
        let p = RBox::le(0.0, 0.0, 4.0, 2.0, 0.0).unwrap();
        let g = RBox::le(0.0, 0.0, 2.0, 2.0, 0.0).unwrap();
        let mut cfg = LossConfig::default();
        let fwd = kld_loss(&p, &g, &cfg).unwrap();
        cfg.kld_direction = KldDirection::GtToPred;
        let rev = kld_loss(&p, &g, &cfg).unwrap();
        cfg.kld_direction = KldDirection::MinSymmetric;
        let sym = kld_loss(&p, &g, &cfg).unwrap();
        assert!(fwd != rev);
        assert_eq!(sym, fwd.min(rev));
    }

    #[test]
    fn log1p_transform_and_tau() {
        let cfg = LossConfig {
            tau: 2.0,
            transform: Transform::Log1p,
            ..Default::default()
        };
        let gt = RBox::le(0.0, 0.0, 4.0, 2.0, 0.0).unwrap();
        let pred = RBox::le(1.0, 0.0, 6.0, 2.0, 0.0).unwrap();
        let l = gwd_loss(&pred, &gt, &cfg).unwrap();
        assert!(close(l, 1.0 - 1.0 / (2.0 + 2f64.ln_1p()), 1e-12));
        assert!(close(gwd_loss(&gt, &gt, &cfg).unwrap(), 0.5, 1e-15));
    }

    #[test]
    fn config_validation() {
        let gt = RBox::le(0.0, 0.0, 4.0, 2.0, 0.0).unwrap();
        let bad = LossConfig {
            tau: 0.5,
            ..Default::default()
        };
        assert!(matches!(gwd_loss(&gt, &gt, &bad), Err(Error::Config(_))));
        let bad = LossConfig {
            smooth_l1_beta: 0.0,
            ..Default::default()
        };
        assert!(matches!(kld_loss(&gt, &gt, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn smooth_l1_examples() {
        assert_eq!(smooth_l1(0.0, 1.0), 0.0);
        assert_eq!(smooth_l1(1.0, 1.0), 0.5);
        assert_eq!(smooth_l1(2.0, 1.0), 1.5);
        assert_eq!(smooth_l1(-2.0, 1.0), 1.5);
        assert_eq!(smooth_l1_grad(0.5, 1.0), 0.5);
        assert_eq!(smooth_l1_grad(-3.0, 1.0), -1.0);
        // C1 at the knee
        assert!(close(smooth_l1_grad(1.0 - 1e-12, 1.0), smooth_l1_grad(1.0, 1.0), 1e-9));
    }

    #[test]
    fn iou_smooth_l1_examples() {
        let cfg = LossConfig::default();
        let a = RBox::le(0.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        assert!(iou_smooth_l1_loss(&a, &a, &cfg).unwrap() < 1e-6);
        assert_eq!(iou_smooth_l1_grad(&a, &a, &cfg).unwrap(), [0.0; 5]);

        let b = RBox::le(0.0, 0.0, 1.0, 1.0, 45.0).unwrap();
        let l = iou_smooth_l1_loss(&b, &a, &cfg).unwrap();
        assert!(close(l, -(std::f64::consts::FRAC_1_SQRT_2 + 1e-7).ln(), 1e-12));
        assert!(close(l, 0.34657, 1e-5));

        let far = RBox::le(50.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        let l = iou_smooth_l1_loss(&far, &a, &cfg).unwrap();
        assert!(close(l, 16.118, 1e-3));

        // gradient points along the smooth-L1 direction, magnitude rescaled
        let g = iou_smooth_l1_grad(&far, &a, &cfg).unwrap();
        let u = parameter_smooth_l1(&far, &a, 1.0);
        assert!(close(g[0], 1.0 / u * l, 1e-12));
        assert_eq!(&g[1..], &[0.0; 4]);

        let oc = RBox::oc(0.0, 0.0, 1.0, 2.0, -10.0).unwrap();
        assert!(iou_smooth_l1_loss(&oc, &a, &cfg).is_err());
    }

    #[test]
    fn rsdet_examples() {
        let cfg = LossConfig::default();
        let gt = rbox_to_quad(&RBox::le(0.5, 0.5, 1.0, 1.0, 0.0).unwrap());
        assert_eq!(rsdet_modulated_loss(&gt, &gt, &cfg).unwrap(), 0.0);

        let v = gt.vertices();
        let shifted = Quad::new([v[2], v[3], v[0], v[1]]).unwrap();
        assert_eq!(rsdet_modulated_loss(&shifted, &gt, &cfg).unwrap(), 0.0);

        let mut moved = *v;
        moved[2] = Point::new(moved[2].x + 0.05, moved[2].y + 0.05);
        let pred = Quad::new(moved).unwrap();
        let l = rsdet_modulated_loss(&pred, &gt, &cfg).unwrap();
        assert!(close(l, 2.0 * 0.5 * 0.05 * 0.05, 1e-15), "{l}");
        assert!(l <= rsdet_corner_loss(&pred, &gt, 0, 1.0));
    }

    #[test]
    fn numeric_gradient_basics() {
        let g = numeric_gradient(|_| 3.0, &[1.0, 2.0], 1e-5).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
        let g = numeric_gradient(|x| 0.5 * (x[0] * x[0] + x[1] * x[1]), &[1.0, 2.0], 1e-5).unwrap();
        assert!(close(g[0], 1.0, 1e-8) && close(g[1], 2.0, 1e-8));
        assert!(numeric_gradient(|_| 0.0, &[1.0], 0.0).is_err());
    }

    #[test]
    fn gwd_gradient_matches_finite_differences() {
        let cfg = LossConfig::default();
        let pred = RBox::le(1.3, -0.4, 5.0, 2.5, 22.0).unwrap();
        let gt = RBox::le(0.0, 0.0, 4.0, 2.0, 10.0).unwrap();
        let analytic = gwd_loss_with_grad(&pred, &gt, &cfg).unwrap();
        let numeric = numeric_gradient(
            |p| gwd_loss(&rbox_from_params(p, Convention::Le).unwrap(), &gt, &cfg).unwrap(),
            &box_params(&pred),
            1e-5,
        )
        .unwrap();
        for (a, n) in analytic.grad.iter().zip(&numeric) {
            assert!((a - n).abs() <= 1e-4 * a.abs().max(n.abs()), "{a} vs {n}");
        }
    }
}
