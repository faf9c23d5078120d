//! Regularizers and their proximal mappings.
//!
//! `prox_R(y, t) = argmin_x { (1/2)||x - y||^2 + t * R(x) }`. Every prox here
//! is closed form, nonexpansive, and produces feasible points; the l1 family
//! yields exact zeros, which is what makes NNZ tracking meaningful.

use crate::error::ProxError;
use crate::vector::DenseVector;

/// A convex regularizer with a closed-form proximal mapping.
///
/// `prox_into` requires `t >= 0` and panics otherwise; the free-function
/// layer (`prox_l1` and friends) validates arguments and returns errors.
pub trait Regularizer: Send + Sync {
    /// `R(x)`, possibly `+inf` outside the effective domain.
    fn value(&self, x: &DenseVector) -> f64;

    /// Writes `prox_{tR}(y)` into `out`.
    fn prox_into(&self, y: &DenseVector, t: f64, out: &mut DenseVector);

    /// The strong-convexity parameter of `R`.
    fn mu_r(&self) -> f64;

    fn prox(&self, y: &DenseVector, t: f64) -> DenseVector {
        let mut out = DenseVector::zeros(y.len());
        self.prox_into(y, t, &mut out);
        out
    }
}

/// The zero regularizer: `R(x) = 0`, prox is the identity.
pub struct Zero;

impl Regularizer for Zero {
    fn value(&self, _x: &DenseVector) -> f64 {
        0.0
    }

    fn prox_into(&self, y: &DenseVector, t: f64, out: &mut DenseVector) {
        assert!(t >= 0.0, "prox step must be nonnegative");
        out.copy_from(y);
    }

    fn mu_r(&self) -> f64 {
        0.0
    }
}

fn soft_threshold(v: f64, threshold: f64) -> f64 {
    // Ties |v| == threshold map to exactly 0: the argmin is unique there.
    if v > threshold {
        v - threshold
    } else if v < -threshold {
        v + threshold
    } else {
        0.0
    }
}

/// `R(x) = lambda1 * ||x||_1`.
pub struct L1 {
    lambda1: f64,
}

impl L1 {
    pub fn new(lambda1: f64) -> Result<Self, ProxError> {
        if lambda1 < 0.0 {
            return Err(ProxError::NegativeWeight(lambda1));
        }
        Ok(L1 { lambda1 })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }
}

impl Regularizer for L1 {
    fn value(&self, x: &DenseVector) -> f64 {
        self.lambda1 * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    fn prox_into(&self, y: &DenseVector, t: f64, out: &mut DenseVector) {
        assert!(t >= 0.0, "prox step must be nonnegative");
        let th = t * self.lambda1;
        let os = out.as_mut_slice();
        for (o, &v) in os.iter_mut().zip(y.iter()) {
            *o = soft_threshold(v, th);
        }
    }

    fn mu_r(&self) -> f64 {
        0.0
    }
}

/// `R(x) = (lambda2/2) * ||x||_2^2`.
pub struct SquaredL2 {
    lambda2: f64,
}

impl SquaredL2 {
    pub fn new(lambda2: f64) -> Result<Self, ProxError> {
        if lambda2 < 0.0 {
            return Err(ProxError::NegativeWeight(lambda2));
        }
        Ok(SquaredL2 { lambda2 })
    }
}

impl Regularizer for SquaredL2 {
    fn value(&self, x: &DenseVector) -> f64 {
        0.5 * self.lambda2 * x.norm_sq()
    }

    fn prox_into(&self, y: &DenseVector, t: f64, out: &mut DenseVector) {
        assert!(t >= 0.0, "prox step must be nonnegative");
        let scale = 1.0 / (1.0 + t * self.lambda2);
        let os = out.as_mut_slice();
        for (o, &v) in os.iter_mut().zip(y.iter()) {
            *o = v * scale;
        }
    }

    fn mu_r(&self) -> f64 {
        self.lambda2
    }
}

/// `R(x) = lambda1 * ||x||_1 + (lambda2/2) * ||x||_2^2`.
pub struct ElasticNet {
    lambda1: f64,
    lambda2: f64,
}

impl ElasticNet {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self, ProxError> {
        if lambda1 < 0.0 {
            return Err(ProxError::NegativeWeight(lambda1));
        }
        if lambda2 < 0.0 {
            return Err(ProxError::NegativeWeight(lambda2));
        }
        Ok(ElasticNet { lambda1, lambda2 })
    }
}

impl Regularizer for ElasticNet {
    fn value(&self, x: &DenseVector) -> f64 {
        self.lambda1 * x.iter().map(|v| v.abs()).sum::<f64>()
            + 0.5 * self.lambda2 * x.norm_sq()
    }

    fn prox_into(&self, y: &DenseVector, t: f64, out: &mut DenseVector) {
        assert!(t >= 0.0, "prox step must be nonnegative");
        // Soft-threshold, then shrink.
        let th = t * self.lambda1;
        let scale = 1.0 / (1.0 + t * self.lambda2);
        let os = out.as_mut_slice();
        for (o, &v) in os.iter_mut().zip(y.iter()) {
            *o = soft_threshold(v, th) * scale;
        }
    }

    fn mu_r(&self) -> f64 {
        self.lambda2
    }
}

/// The indicator of `[lo, hi]`; prox is the componentwise clamp.
///
/// Unlike the other regularizers, the prox of an indicator does not depend
/// on the step `t` (any positive multiple of `+inf` is still `+inf`), so
/// `prox_into` ignores `t` and always projects.
pub struct BoxConstraint {
    lo: DenseVector,
    hi: DenseVector,
}

impl BoxConstraint {
    pub fn new(lo: DenseVector, hi: DenseVector) -> Result<Self, ProxError> {
        if lo.len() != hi.len() {
            return Err(ProxError::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        for j in 0..lo.len() {
            if lo[j] > hi[j] {
                return Err(ProxError::InvertedBounds { index: j });
            }
        }
        Ok(BoxConstraint { lo, hi })
    }
}

impl Regularizer for BoxConstraint {
    fn value(&self, x: &DenseVector) -> f64 {
        for j in 0..x.len() {
            if x[j] < self.lo[j] || x[j] > self.hi[j] {
                return f64::INFINITY;
            }
        }
        0.0
    }

    fn prox_into(&self, y: &DenseVector, t: f64, out: &mut DenseVector) {
        assert!(t >= 0.0, "prox step must be nonnegative");
        let os = out.as_mut_slice();
        for (j, (o, &v)) in os.iter_mut().zip(y.iter()).enumerate() {
            *o = v.clamp(self.lo[j], self.hi[j]);
        }
    }

    fn mu_r(&self) -> f64 {
        0.0
    }
}

/// `R_eps(x) = (eps/2) * ||x||^2 + R(x)` for a borrowed base regularizer.
///
/// Its prox reduces to the base prox on shrunk arguments:
/// `prox_{t R_eps}(y) = prox_{t' R}(y / (1 + t*eps))` with
/// `t' = t / (1 + t*eps)`. This is the update rule used when reducing a
/// merely convex problem to a strongly convex one.
pub struct EpsShifted<'a> {
    base: &'a dyn Regularizer,
    eps: f64,
}

impl<'a> EpsShifted<'a> {
    pub fn new(base: &'a dyn Regularizer, eps: f64) -> Result<Self, ProxError> {
        if !(eps > 0.0) {
            return Err(ProxError::NonPositiveEpsilon(eps));
        }
        Ok(EpsShifted { base, eps })
    }
}

impl Regularizer for EpsShifted<'_> {
    fn value(&self, x: &DenseVector) -> f64 {
        0.5 * self.eps * x.norm_sq() + self.base.value(x)
    }

    fn prox_into(&self, y: &DenseVector, t: f64, out: &mut DenseVector) {
        assert!(t >= 0.0, "prox step must be nonnegative");
        let shrink = 1.0 / (1.0 + t * self.eps);
        let mut scaled = y.clone();
        scaled.scale(shrink);
        self.base.prox_into(&scaled, t * shrink, out);
    }

    fn mu_r(&self) -> f64 {
        self.base.mu_r() + self.eps
    }
}

/// Componentwise soft-thresholding: `sign(y_j) * max(|y_j| - t*lambda1, 0)`.
pub fn prox_l1(y: &DenseVector, t: f64, lambda1: f64) -> Result<DenseVector, ProxError> {
    if t < 0.0 {
        return Err(ProxError::NegativeStep(t));
    }
    Ok(L1::new(lambda1)?.prox(y, t))
}

/// `y / (1 + t*lambda2)`.
pub fn prox_sq_l2(y: &DenseVector, t: f64, lambda2: f64) -> Result<DenseVector, ProxError> {
    if t < 0.0 {
        return Err(ProxError::NegativeStep(t));
    }
    Ok(SquaredL2::new(lambda2)?.prox(y, t))
}

/// Soft-threshold then shrink.
pub fn prox_elastic_net(
    y: &DenseVector,
    t: f64,
    lambda1: f64,
    lambda2: f64,
) -> Result<DenseVector, ProxError> {
    if t < 0.0 {
        return Err(ProxError::NegativeStep(t));
    }
    Ok(ElasticNet::new(lambda1, lambda2)?.prox(y, t))
}

/// Componentwise clamp to `[lo, hi]`; independent of `t`.
pub fn prox_box(
    y: &DenseVector,
    t: f64,
    lo: &DenseVector,
    hi: &DenseVector,
) -> Result<DenseVector, ProxError> {
    if t < 0.0 {
        return Err(ProxError::NegativeStep(t));
    }
    Ok(BoxConstraint::new(lo.clone(), hi.clone())?.prox(y, t))
}

/// Prox of `(eps/2)||x||^2 + R(x)` with step `eta`, via the base prox.
pub fn prox_eps_shifted(
    base: &dyn Regularizer,
    eps: f64,
    y: &DenseVector,
    eta: f64,
) -> Result<DenseVector, ProxError> {
    if !(eta > 0.0) {
        return Err(ProxError::NegativeStep(eta));
    }
    Ok(EpsShifted::new(base, eps)?.prox(y, eta))
}
