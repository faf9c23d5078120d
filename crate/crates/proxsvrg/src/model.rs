//! The composite problem `P(x) = F(x) + R(x)` where `F` is the average of
//! `n` smooth components and `R` is a proximable regularizer.
//!
//! Evaluation follows the extended-value convention: `objective` returns
//! `+inf` whenever `x` lies outside the effective domain of `R`.

use crate::error::ModelError;
use crate::prox::Regularizer;
use crate::vector::DenseVector;

/// A smooth component function `f_i` with an `L_i`-Lipschitz gradient.
pub trait SmoothComponent: Send + Sync {
    fn value(&self, x: &DenseVector) -> f64;

    /// Overwrites `out` with the gradient at `x`.
    fn gradient_into(&self, x: &DenseVector, out: &mut DenseVector);

    /// An upper bound on the Lipschitz constant of the gradient.
    fn lipschitz_bound(&self) -> f64;

    fn gradient(&self, x: &DenseVector) -> DenseVector {
        let mut out = DenseVector::zeros(x.len());
        self.gradient_into(x, &mut out);
        out
    }
}

/// The composite problem: `n` smooth components, a regularizer, and the
/// strong-convexity metadata `(mu_F, mu_R)` supplied by the caller.
///
/// Problem data is immutable after construction; evaluation methods take
/// `&self` and are safe to call concurrently from multiple solver runs.
pub struct CompositeProblem {
    components: Vec<Box<dyn SmoothComponent>>,
    regularizer: Box<dyn Regularizer>,
    dimension: usize,
    lipschitz: Vec<f64>,
    mu_f: f64,
}

impl CompositeProblem {
    /// Builds a problem from components and a regularizer.
    ///
    /// Per-component Lipschitz constants default to each component's
    /// analytic bound; `mu_F` defaults to 0 and `mu_R` is read from the
    /// regularizer. Use [`with_mu_f`](Self::with_mu_f) when the l2 term
    /// lives inside the smooth part.
    pub fn new(
        components: Vec<Box<dyn SmoothComponent>>,
        regularizer: Box<dyn Regularizer>,
        dimension: usize,
    ) -> Result<Self, ModelError> {
        if components.is_empty() {
            return Err(ModelError::EmptyProblem);
        }
        let lipschitz: Vec<f64> = components.iter().map(|c| c.lipschitz_bound()).collect();
        for (i, &l) in lipschitz.iter().enumerate() {
            if !(l > 0.0) || !l.is_finite() {
                return Err(ModelError::NonPositiveLipschitz { index: i, value: l });
            }
        }
        Ok(CompositeProblem {
            components,
            regularizer,
            dimension,
            lipschitz,
            mu_f: 0.0,
        })
    }

    /// Sets the strong-convexity parameter of the smooth part.
    ///
    /// This is caller-supplied metadata; the library never estimates it.
    /// Values larger than the Lipschitz bound are accepted unchanged.
    pub fn with_mu_f(mut self, mu_f: f64) -> Result<Self, ModelError> {
        if mu_f < 0.0 {
            return Err(ModelError::NegativeConvexityParameter(mu_f));
        }
        self.mu_f = mu_f;
        Ok(self)
    }

    /// Overrides the per-component Lipschitz constants with tighter values.
    pub fn with_lipschitz(mut self, lipschitz: Vec<f64>) -> Result<Self, ModelError> {
        if lipschitz.len() != self.components.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.components.len(),
                got: lipschitz.len(),
            });
        }
        for (i, &l) in lipschitz.iter().enumerate() {
            if !(l > 0.0) || !l.is_finite() {
                return Err(ModelError::NonPositiveLipschitz { index: i, value: l });
            }
        }
        self.lipschitz = lipschitz;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn regularizer(&self) -> &dyn Regularizer {
        self.regularizer.as_ref()
    }

    pub fn component(&self, i: usize) -> &dyn SmoothComponent {
        self.components[i].as_ref()
    }

    pub fn lipschitz(&self) -> &[f64] {
        &self.lipschitz
    }

    /// `(1/n) sum_i L_i`, the usable bound on the Lipschitz constant of
    /// `grad F`.
    pub fn lipschitz_mean(&self) -> f64 {
        self.lipschitz.iter().sum::<f64>() / self.n() as f64
    }

    pub fn lipschitz_max(&self) -> f64 {
        self.lipschitz.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mu_f(&self) -> f64 {
        self.mu_f
    }

    pub fn mu_r(&self) -> f64 {
        self.regularizer.mu_r()
    }

    /// The strong-convexity parameter of `P` available to the analysis:
    /// `mu_F + mu_R`.
    pub fn mu(&self) -> f64 {
        self.mu_f + self.regularizer.mu_r()
    }

    fn check_dim(&self, x: &DenseVector) -> Result<(), ModelError> {
        if x.len() != self.dimension {
            return Err(ModelError::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `P(x) = (1/n) sum_i f_i(x) + R(x)`; `+inf` outside `dom(R)`.
    pub fn objective(&self, x: &DenseVector) -> Result<f64, ModelError> {
        self.check_dim(x)?;
        Ok(self.objective_at(x))
    }

    pub(crate) fn objective_at(&self, x: &DenseVector) -> f64 {
        let r = self.regularizer.value(x);
        if r == f64::INFINITY {
            return f64::INFINITY;
        }
        self.smooth_value_at(x) + r
    }

    /// The smooth part `F(x)` alone.
    pub fn smooth_value(&self, x: &DenseVector) -> Result<f64, ModelError> {
        self.check_dim(x)?;
        Ok(self.smooth_value_at(x))
    }

    pub(crate) fn smooth_value_at(&self, x: &DenseVector) -> f64 {
        // Fixed left-to-right order keeps results bit-reproducible.
        let sum: f64 = self.components.iter().map(|c| c.value(x)).sum();
        sum / self.n() as f64
    }

    /// The exact average of component gradients, summed left-to-right.
    pub fn full_gradient(&self, x: &DenseVector) -> Result<DenseVector, ModelError> {
        self.check_dim(x)?;
        let mut out = DenseVector::zeros(self.dimension);
        let mut scratch = DenseVector::zeros(self.dimension);
        self.full_gradient_into(x, &mut out, &mut scratch);
        Ok(out)
    }

    pub(crate) fn full_gradient_into(
        &self,
        x: &DenseVector,
        out: &mut DenseVector,
        scratch: &mut DenseVector,
    ) {
        out.fill(0.0);
        for c in &self.components {
            c.gradient_into(x, scratch);
            out.axpy(1.0, scratch);
        }
        out.scale(1.0 / self.n() as f64);
    }

    /// `grad f_i(x)` for a single component.
    pub fn component_gradient(&self, i: usize, x: &DenseVector) -> Result<DenseVector, ModelError> {
        if i >= self.n() {
            return Err(ModelError::IndexOutOfRange { index: i, n: self.n() });
        }
        self.check_dim(x)?;
        Ok(self.components[i].gradient(x))
    }

    /// `f_i(x)` for a single component.
    pub fn component_value(&self, i: usize, x: &DenseVector) -> Result<f64, ModelError> {
        if i >= self.n() {
            return Err(ModelError::IndexOutOfRange { index: i, n: self.n() });
        }
        self.check_dim(x)?;
        Ok(self.components[i].value(x))
    }
}
