//! Concrete smooth components: logistic and least-squares losses over
//! sparse examples, with analytic Lipschitz constants.
//!
//! The l2 penalty can live either inside every component (`L2InSmooth`) or
//! inside the regularizer (`L2InReg`). The overall objective is identical
//! under both splittings; what moves is where the strong convexity is
//! accounted: `L2InSmooth` gives `(mu_F, mu_R) = (lambda2, 0)`, `L2InReg`
//! gives `(0, lambda2)`.

use crate::error::LossError;
use crate::model::{CompositeProblem, SmoothComponent};
use crate::prox::{ElasticNet, L1};
use crate::vector::{DenseVector, SparseVector};

/// Floor applied to analytic Lipschitz bounds so all-zero rows (which would
/// give `L_i = 0`) keep weighted sampling well-defined.
pub const LIPSCHITZ_FLOOR: f64 = 1e-12;

/// A training example: sparse features and a real label.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    features: SparseVector,
    label: f64,
}

impl Example {
    pub fn new(features: SparseVector, label: f64) -> Self {
        Example { features, label }
    }

    pub fn features(&self) -> &SparseVector {
        &self.features
    }

    pub fn label(&self) -> f64 {
        self.label
    }
}

/// Where the `(lambda2/2)||x||^2` term is placed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SplittingMode {
    /// Each `f_i` carries the l2 term; `R` is the l1 norm alone.
    L2InSmooth,
    /// Components are bare losses; `R` carries both penalties.
    L2InReg,
}

/// Logistic loss `log(1 + exp(-b * a^T x))`, optionally plus
/// `(lambda2/2)||x||^2`.
pub struct LogisticComponent {
    example: Example,
    l2: f64,
    lipschitz: f64,
}

/// Numerically stable `log(1 + exp(t))`.
fn log1p_exp(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `sigma(-m) = 1 / (1 + exp(m))`, stable for large `|m|`.
fn sigmoid_neg(m: f64) -> f64 {
    if m >= 0.0 {
        let e = (-m).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + m.exp())
    }
}

impl SmoothComponent for LogisticComponent {
    fn value(&self, x: &DenseVector) -> f64 {
        let margin = self.example.label() * self.example.features().dot_dense(x);
        let mut v = log1p_exp(-margin);
        if self.l2 > 0.0 {
            v += 0.5 * self.l2 * x.norm_sq();
        }
        v
    }

    fn gradient_into(&self, x: &DenseVector, out: &mut DenseVector) {
        let b = self.example.label();
        let margin = b * self.example.features().dot_dense(x);
        let p = sigmoid_neg(margin);
        if self.l2 > 0.0 {
            out.copy_from(x);
            out.scale(self.l2);
        } else {
            out.fill(0.0);
        }
        self.example.features().add_scaled_into(-b * p, out);
    }

    fn lipschitz_bound(&self) -> f64 {
        self.lipschitz
    }
}

/// Builds a logistic component.
///
/// `lipschitz_bound = ||a||^2 / 4 (+ lambda2 under L2InSmooth)`, floored at
/// [`LIPSCHITZ_FLOOR`].
pub fn logistic_component(
    example: Example,
    lambda2: f64,
    mode: SplittingMode,
) -> Result<LogisticComponent, LossError> {
    let b = example.label();
    if b != 1.0 && b != -1.0 {
        return Err(LossError::InvalidLabel(b));
    }
    if lambda2 < 0.0 {
        return Err(LossError::NegativeWeight(lambda2));
    }
    let l2 = match mode {
        SplittingMode::L2InSmooth => lambda2,
        SplittingMode::L2InReg => 0.0,
    };
    let lipschitz = (example.features().norm_sq() / 4.0 + l2).max(LIPSCHITZ_FLOOR);
    Ok(LogisticComponent { example, l2, lipschitz })
}

/// Least-squares loss `(1/2)(a^T x - b)^2`, optionally plus
/// `(lambda2/2)||x||^2`.
pub struct LeastSquaresComponent {
    example: Example,
    l2: f64,
    lipschitz: f64,
}

impl SmoothComponent for LeastSquaresComponent {
    fn value(&self, x: &DenseVector) -> f64 {
        let r = self.example.features().dot_dense(x) - self.example.label();
        let mut v = 0.5 * r * r;
        if self.l2 > 0.0 {
            v += 0.5 * self.l2 * x.norm_sq();
        }
        v
    }

    fn gradient_into(&self, x: &DenseVector, out: &mut DenseVector) {
        let r = self.example.features().dot_dense(x) - self.example.label();
        if self.l2 > 0.0 {
            out.copy_from(x);
            out.scale(self.l2);
        } else {
            out.fill(0.0);
        }
        self.example.features().add_scaled_into(r, out);
    }

    fn lipschitz_bound(&self) -> f64 {
        self.lipschitz
    }
}

/// Builds a least-squares component; `lipschitz_bound = ||a||^2 (+ lambda2
/// under L2InSmooth)`, floored at [`LIPSCHITZ_FLOOR`].
pub fn least_squares_component(
    example: Example,
    lambda2: f64,
    mode: SplittingMode,
) -> Result<LeastSquaresComponent, LossError> {
    if lambda2 < 0.0 {
        return Err(LossError::NegativeWeight(lambda2));
    }
    let l2 = match mode {
        SplittingMode::L2InSmooth => lambda2,
        SplittingMode::L2InReg => 0.0,
    };
    let lipschitz = (example.features().norm_sq() + l2).max(LIPSCHITZ_FLOOR);
    Ok(LeastSquaresComponent { example, l2, lipschitz })
}

/// Which loss a problem is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LossKind {
    Logistic,
    LeastSquares,
}

/// Assembles the full composite problem for a set of examples under the
/// requested splitting: regularized empirical risk with the elastic-net
/// pair `(lambda1, lambda2)`.
pub fn build_problem(
    examples: &[Example],
    dimension: usize,
    loss: LossKind,
    lambda1: f64,
    lambda2: f64,
    mode: SplittingMode,
) -> Result<CompositeProblem, crate::error::ModelError> {
    let mut components: Vec<Box<dyn SmoothComponent>> = Vec::with_capacity(examples.len());
    for ex in examples {
        let c: Box<dyn SmoothComponent> = match loss {
            LossKind::Logistic => Box::new(logistic_component(ex.clone(), lambda2, mode)?),
            LossKind::LeastSquares => {
                Box::new(least_squares_component(ex.clone(), lambda2, mode)?)
            }
        };
        components.push(c);
    }
    let (reg, mu_f): (Box<dyn crate::prox::Regularizer>, f64) = match mode {
        SplittingMode::L2InSmooth => (Box::new(L1::new(lambda1).expect("lambda1 >= 0")), lambda2),
        SplittingMode::L2InReg => (
            Box::new(ElasticNet::new(lambda1, lambda2).expect("lambdas >= 0")),
            0.0,
        ),
    };
    CompositeProblem::new(components, reg, dimension)?.with_mu_f(mu_f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dv(v: &[f64]) -> DenseVector {
        DenseVector::from_vec(v.to_vec()).unwrap()
    }

    fn sv(d: usize, vals: &[f64]) -> SparseVector {
        SparseVector::from_pairs(d, vals.iter().cloned().enumerate()).unwrap()
    }

    #[test]
    fn logistic_unit_norm_lipschitz_quarter() {
        let ex = Example::new(sv(2, &[0.6, 0.8]), 1.0);
        let c = logistic_component(ex, 0.0, SplittingMode::L2InReg).unwrap();
        assert!((c.lipschitz_bound() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn logistic_at_origin() {
        let ex = Example::new(sv(2, &[0.3, -0.7]), -1.0);
        let c = logistic_component(ex, 0.0, SplittingMode::L2InReg).unwrap();
        let x = DenseVector::zeros(2);
        assert!((c.value(&x) - 2f64.ln()).abs() < 1e-15);
        let g = c.gradient(&x);
        // -b * a / 2 with b = -1.
        assert!((g[0] - 0.15).abs() < 1e-15);
        assert!((g[1] + 0.35).abs() < 1e-15);
    }

    #[test]
    fn logistic_rejects_bad_label() {
        let ex = Example::new(sv(1, &[1.0]), 0.0);
        assert!(matches!(
            logistic_component(ex, 0.0, SplittingMode::L2InReg),
            Err(LossError::InvalidLabel(_))
        ));
    }

    #[test]
    fn logistic_stable_at_large_margins() {
        let ex = Example::new(sv(1, &[1.0]), 1.0);
        let c = logistic_component(ex, 0.0, SplittingMode::L2InReg).unwrap();
        let far = dv(&[800.0]);
        assert!(c.value(&far).is_finite());
        assert!(c.value(&far) < 1e-300);
        let miss = dv(&[-800.0]);
        // Loss is essentially the margin itself; gradient stays bounded.
        assert!((c.value(&miss) - 800.0).abs() < 1e-9);
        let g = c.gradient(&miss);
        assert!((g[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let d = 3;
            let vals: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let label = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let l2 = rng.gen_range(0.0..0.5);
            let c = logistic_component(
                Example::new(sv(d, &vals), label),
                l2,
                SplittingMode::L2InSmooth,
            )
            .unwrap();
            let x = dv(&[
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ]);
            let g = c.gradient(&x);
            let eps = 1e-6;
            for j in 0..d {
                let mut xp = x.clone();
                xp[j] += eps;
                let mut xm = x.clone();
                xm[j] -= eps;
                let fd = (c.value(&xp) - c.value(&xm)) / (2.0 * eps);
                assert!((fd - g[j]).abs() <= 1e-5 * (1.0 + g[j].abs()));
            }
        }
    }

    #[test]
    fn least_squares_examples() {
        let ex = Example::new(SparseVector::from_pairs(2, [(0, 1.0)]).unwrap(), 0.0);
        let c = least_squares_component(ex, 0.0, SplittingMode::L2InReg).unwrap();
        let x = dv(&[2.0, 3.0]);
        assert_eq!(c.value(&x), 2.0);
        assert_eq!(c.gradient(&x).as_slice(), &[2.0, 0.0]);
        assert!((c.lipschitz_bound() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn least_squares_exact_fit_leaves_only_l2() {
        let ex = Example::new(sv(2, &[1.0, 2.0]), 5.0);
        let l2 = 0.3;
        let c = least_squares_component(ex, l2, SplittingMode::L2InSmooth).unwrap();
        let x = dv(&[1.0, 2.0]); // a^T x = 5 = b
        assert!((c.value(&x) - 0.5 * l2 * x.norm_sq()).abs() < 1e-15);
    }

    #[test]
    fn least_squares_hessian_eigenvalue_below_bound() {
        // Power iteration on a a^T (+ lambda2 I): largest eigenvalue is
        // ||a||^2 + lambda2, which must not exceed the reported bound.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let d = 4;
            let vals: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let l2 = rng.gen_range(0.0..1.0);
            let c = least_squares_component(
                Example::new(sv(d, &vals), 0.7),
                l2,
                SplittingMode::L2InSmooth,
            )
            .unwrap();
            let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for _ in 0..200 {
                // H v = a (a^T v) + l2 v
                let av: f64 = vals.iter().zip(&v).map(|(a, b)| a * b).sum();
                let mut next: Vec<f64> =
                    vals.iter().zip(&v).map(|(a, b)| a * av + l2 * b).collect();
                let norm = next.iter().map(|t| t * t).sum::<f64>().sqrt();
                for t in &mut next {
                    *t /= norm;
                }
                v = next;
            }
            let av: f64 = vals.iter().zip(&v).map(|(a, b)| a * b).sum();
            let hv: Vec<f64> = vals.iter().zip(&v).map(|(a, b)| a * av + l2 * b).collect();
            let eig: f64 = hv.iter().zip(&v).map(|(a, b)| a * b).sum();
            assert!(eig <= c.lipschitz_bound() * (1.0 + 1e-10));
        }
    }

    #[test]
    fn splitting_modes_agree_on_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = 3;
        let examples: Vec<Example> = (0..6)
            .map(|_| {
                let vals: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let label = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                Example::new(sv(d, &vals), label)
            })
            .collect();
        let (l1, l2) = (0.07, 0.4);
        let a = build_problem(&examples, d, LossKind::Logistic, l1, l2, SplittingMode::L2InSmooth)
            .unwrap();
        let b = build_problem(&examples, d, LossKind::Logistic, l1, l2, SplittingMode::L2InReg)
            .unwrap();
        assert_eq!(a.mu_f(), l2);
        assert_eq!(a.mu_r(), 0.0);
        assert_eq!(b.mu_f(), 0.0);
        assert_eq!(b.mu_r(), l2);
        for _ in 0..20 {
            let x = dv(&[
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ]);
            let va = a.objective(&x).unwrap();
            let vb = b.objective(&x).unwrap();
            assert!((va - vb).abs() <= 1e-12 * (1.0 + va.abs()));
        }
    }

    #[test]
    fn zero_row_gets_lipschitz_floor() {
        let ex = Example::new(SparseVector::empty(3), 1.0);
        let c = logistic_component(ex, 0.0, SplittingMode::L2InReg).unwrap();
        assert_eq!(c.lipschitz_bound(), LIPSCHITZ_FLOOR);
    }
}
