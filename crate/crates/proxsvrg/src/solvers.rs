//! Solvers for the composite problem: the multi-stage variance-reduced
//! proximal stochastic gradient method (Prox-SVRG) and its baselines
//! Prox-SG, Prox-FG, Prox-AFG, the Prox-SVRG2 hybrid, and the
//! epsilon-regularized wrapper for problems that are convex but not
//! strongly convex.
//!
//! All solvers share the same cost accounting: one *effective pass* is `n`
//! component-gradient evaluations. Traces record the objective of the
//! current iterate at every pass boundary plus a point per stage, so the
//! same trace serves both per-pass plots and per-stage rate checks.
//! Objective evaluations made for the trace are diagnostics and are never
//! counted as gradient evaluations.
//!
//! Runs are deterministic: the same problem, configuration and seed
//! produce bit-identical traces.

use crate::error::SolverError;
use crate::model::CompositeProblem;
use crate::prox::{EpsShifted, Regularizer};
use crate::sampling::{SamplingDistribution, SeededRng};
use crate::theory;
use crate::vector::DenseVector;

/// How the next reference point is chosen at the end of a stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SnapshotRule {
    /// `(1/m) sum_k x_k`, the choice the convergence analysis covers.
    StageAverage,
    /// The last inner iterate; cheaper bookkeeping, similar behavior in
    /// practice.
    LastIterate,
}

/// Configuration for a Prox-SVRG run.
///
/// The solver accepts any positive step; whether `(eta, m)` actually
/// yields a contraction is the theory module's question
/// ([`theory::convergence_factor`]), not a construction error.
#[derive(Clone)]
pub struct SvrgConfig {
    /// Constant step size `eta`.
    pub step: f64,
    /// Inner iterations per stage (`m`).
    pub stage_length: usize,
    /// Number of stages (`S`).
    pub stages: usize,
    pub snapshot: SnapshotRule,
    pub sampling: SamplingDistribution,
    pub seed: u64,
    /// Record a per-stage variance estimate of the modified gradient.
    /// Exact enumeration for `n <= `[`theory::ENUMERATION_LIMIT`], sampled
    /// otherwise; uses a diagnostic RNG stream so the trajectory is
    /// unchanged.
    pub track_variance: bool,
}

impl SvrgConfig {
    pub fn new(step: f64, stage_length: usize, stages: usize, sampling: SamplingDistribution, seed: u64) -> Self {
        SvrgConfig {
            step,
            stage_length,
            stages,
            snapshot: SnapshotRule::StageAverage,
            sampling,
            seed,
            track_variance: false,
        }
    }

    fn validate(&self, problem: &CompositeProblem) -> Result<(), SolverError> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(SolverError::InvalidConfig(format!(
                "step must be positive and finite, got {}",
                self.step
            )));
        }
        if self.stage_length == 0 {
            return Err(SolverError::InvalidConfig("stage length m must be >= 1".into()));
        }
        if self.stages == 0 {
            return Err(SolverError::InvalidConfig("stage count S must be >= 1".into()));
        }
        if self.sampling.n() != problem.n() {
            return Err(SolverError::InvalidConfig(format!(
                "sampling distribution has {} outcomes but the problem has {} components",
                self.sampling.n(),
                problem.n()
            )));
        }
        Ok(())
    }
}

/// Step-size schedule for the plain proximal stochastic gradient method.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// `eta_k = 1 / (mu * k)`, the classical diminishing schedule.
    InverseMuK(f64),
}

/// One row of a solver trace.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct TracePoint {
    /// Cumulative component-gradient evaluations divided by `n`.
    pub effective_passes: f64,
    pub objective: f64,
    /// `objective - P*`; filled by [`SolverResult::with_reference`].
    pub gap: Option<f64>,
    /// Exact nonzeros of the recorded point.
    pub nnz: usize,
    pub variance_estimate: Option<f64>,
}

/// Output of a solver run.
#[derive(Clone, Debug)]
pub struct SolverResult {
    /// Final point: the last stage snapshot for Prox-SVRG, the last
    /// iterate otherwise.
    pub x: DenseVector,
    pub trace: Vec<TracePoint>,
    /// Component-gradient evaluations performed by the algorithm itself
    /// (trace diagnostics excluded). Exactly `S * (n + 2m)` for Prox-SVRG.
    pub gradient_evaluations: u64,
    /// Stage snapshots `x_tilde_1 .. x_tilde_S`; empty for non-staged
    /// solvers.
    pub snapshots: Vec<DenseVector>,
}

impl SolverResult {
    /// Fills the `gap` column from a known optimal value.
    pub fn with_reference(mut self, p_star: f64) -> SolverResult {
        for pt in &mut self.trace {
            pt.gap = Some(pt.objective - p_star);
        }
        self
    }

    pub fn final_objective(&self) -> f64 {
        self.trace.last().map(|p| p.objective).unwrap_or(f64::NAN)
    }

    pub fn total_passes(&self) -> f64 {
        self.trace.last().map(|p| p.effective_passes).unwrap_or(0.0)
    }
}

fn check_start(problem: &CompositeProblem, x0: &DenseVector) -> Result<(), SolverError> {
    if x0.len() != problem.dimension() {
        return Err(SolverError::Model(crate::error::ModelError::DimensionMismatch {
            expected: problem.dimension(),
            got: x0.len(),
        }));
    }
    if !x0.is_finite() || problem.regularizer().value(x0) == f64::INFINITY {
        return Err(SolverError::StartOutsideDomain);
    }
    Ok(())
}

fn push_point(
    trace: &mut Vec<TracePoint>,
    evals: u64,
    n: u64,
    objective: f64,
    nnz: usize,
    variance_estimate: Option<f64>,
) {
    trace.push(TracePoint {
        effective_passes: evals as f64 / n as f64,
        objective,
        gap: None,
        nnz,
        variance_estimate,
    });
}

/// The Prox-SVRG method.
///
/// Each stage computes the full gradient at the snapshot, then runs `m`
/// inner steps driven by the modified stochastic gradient
/// `v = (grad f_i(x) - grad f_i(x_tilde)) / (q_i n) + grad F(x_tilde)`
/// with `i` drawn from the configured distribution.
pub fn prox_svrg(
    problem: &CompositeProblem,
    config: &SvrgConfig,
    x0: &DenseVector,
) -> Result<SolverResult, SolverError> {
    config.validate(problem)?;
    check_start(problem, x0)?;
    let mut rng = SeededRng::new(config.seed);
    svrg_core(
        problem,
        problem.regularizer(),
        &|x| problem.objective(x).expect("dimension validated"),
        config,
        x0,
        &mut rng,
        SvrgContinuation::fresh(),
    )
}

/// State carried into the SVRG core when it continues an earlier phase
/// (the hybrid warm start).
struct SvrgContinuation {
    evals: u64,
    iterations: u64,
    trace: Vec<TracePoint>,
    record_start: bool,
}

impl SvrgContinuation {
    fn fresh() -> Self {
        SvrgContinuation { evals: 0, iterations: 0, trace: Vec::new(), record_start: true }
    }
}

fn svrg_core(
    problem: &CompositeProblem,
    prox_reg: &dyn Regularizer,
    record_objective: &dyn Fn(&DenseVector) -> f64,
    config: &SvrgConfig,
    x0: &DenseVector,
    rng: &mut SeededRng,
    cont: SvrgContinuation,
) -> Result<SolverResult, SolverError> {
    let n = problem.n();
    let d = problem.dimension();
    let n64 = n as u64;
    let nf = n as f64;
    let eta = config.step;
    let m = config.stage_length;

    let mut evals = cont.evals;
    let mut iterations = cont.iterations;
    let mut trace = cont.trace;
    let mut snapshots = Vec::with_capacity(config.stages);
    // Diagnostic draws must not perturb the trajectory stream.
    let mut diag_rng = SeededRng::new(config.seed.wrapping_add(0x9E37_79B9_7F4A_7C15));

    let mut snapshot = x0.clone();
    let mut x = DenseVector::zeros(d);
    let mut y = DenseVector::zeros(d);
    let mut v_tilde = DenseVector::zeros(d);
    let mut g_cur = DenseVector::zeros(d);
    let mut g_snap = DenseVector::zeros(d);
    let mut running_sum = DenseVector::zeros(d);
    let mut scratch = DenseVector::zeros(d);

    if cont.record_start {
        push_point(&mut trace, evals, n64, record_objective(&snapshot), snapshot.nnz(), None);
    }

    for _stage in 0..config.stages {
        problem.full_gradient_into(&snapshot, &mut v_tilde, &mut scratch);
        evals += n64;
        // The full-gradient pass shows up as a flat segment on the curve.
        push_point(&mut trace, evals, n64, record_objective(&snapshot), snapshot.nnz(), None);

        x.copy_from(&snapshot);
        running_sum.fill(0.0);
        let mut pass_mark = (evals / n64 + 1) * n64;
        for k in 1..=m {
            let i = config.sampling.sample(rng);
            let w = 1.0 / (config.sampling.probability(i) * nf);
            problem.component(i).gradient_into(&x, &mut g_cur);
            problem.component(i).gradient_into(&snapshot, &mut g_snap);
            evals += 2;
            iterations += 1;
            for j in 0..d {
                y[j] = x[j] - eta * (w * (g_cur[j] - g_snap[j]) + v_tilde[j]);
            }
            prox_reg.prox_into(&y, eta, &mut x);
            if !x.is_finite() {
                return Err(SolverError::Diverged { iteration: iterations });
            }
            running_sum.axpy(1.0, &x);
            if evals >= pass_mark && k < m {
                push_point(&mut trace, evals, n64, record_objective(&x), x.nnz(), None);
                pass_mark = (evals / n64 + 1) * n64;
            }
        }

        let old_snapshot = snapshot.clone();
        match config.snapshot {
            SnapshotRule::StageAverage => {
                snapshot.copy_from(&running_sum);
                snapshot.scale(1.0 / m as f64);
            }
            SnapshotRule::LastIterate => snapshot.copy_from(&x),
        }
        let variance_estimate = if config.track_variance {
            Some(stage_variance(problem, &config.sampling, &snapshot, &old_snapshot, &mut diag_rng))
        } else {
            None
        };
        push_point(
            &mut trace,
            evals,
            n64,
            record_objective(&snapshot),
            snapshot.nnz(),
            variance_estimate,
        );
        snapshots.push(snapshot.clone());
    }

    Ok(SolverResult { x: snapshot, trace, gradient_evaluations: evals - cont.evals + 0, snapshots })
}

/// Variance of the modified gradient at the new snapshot, against the
/// snapshot the stage just used.
fn stage_variance(
    problem: &CompositeProblem,
    sampling: &SamplingDistribution,
    x: &DenseVector,
    snapshot: &DenseVector,
    diag_rng: &mut SeededRng,
) -> f64 {
    if problem.n() <= theory::ENUMERATION_LIMIT {
        theory::exact_svrg_variance(problem, sampling, x, snapshot)
            .expect("dimensions validated by solver")
    } else {
        theory::sampled_svrg_variance(problem, sampling, x, snapshot, 1000, diag_rng)
            .expect("dimensions validated by solver")
    }
}

/// The plain proximal stochastic gradient method.
///
/// Under uniform sampling the update is the textbook
/// `x <- prox_{eta_k R}(x - eta_k grad f_i(x))`; under a non-uniform
/// distribution the gradient is importance-weighted by `1/(q_i n)` so the
/// search direction stays an unbiased estimate of `grad F`.
pub fn prox_sg(
    problem: &CompositeProblem,
    schedule: StepSchedule,
    iterations: usize,
    x0: &DenseVector,
    sampling: &SamplingDistribution,
    seed: u64,
) -> Result<SolverResult, SolverError> {
    match schedule {
        StepSchedule::Constant(eta) => {
            if !(eta > 0.0) || !eta.is_finite() {
                return Err(SolverError::InvalidConfig(format!(
                    "constant step must be positive and finite, got {eta}"
                )));
            }
        }
        StepSchedule::InverseMuK(mu) => {
            if !(mu > 0.0) {
                return Err(SolverError::InvalidConfig(format!(
                    "the 1/(mu k) schedule needs mu > 0, got {mu}"
                )));
            }
        }
    }
    if sampling.n() != problem.n() {
        return Err(SolverError::InvalidConfig(format!(
            "sampling distribution has {} outcomes but the problem has {} components",
            sampling.n(),
            problem.n()
        )));
    }
    check_start(problem, x0)?;
    let mut rng = SeededRng::new(seed);
    let mut trace = Vec::new();
    let (x, evals, _) = sg_phase(
        problem,
        problem.regularizer(),
        schedule,
        iterations,
        x0,
        sampling,
        &mut rng,
        &mut trace,
        0,
        true,
    )?;
    Ok(SolverResult { x, trace, gradient_evaluations: evals, snapshots: Vec::new() })
}

/// Shared Prox-SG loop; traces one point per effective pass.
#[allow(clippy::too_many_arguments)]
fn sg_phase(
    problem: &CompositeProblem,
    prox_reg: &dyn Regularizer,
    schedule: StepSchedule,
    iterations: usize,
    x0: &DenseVector,
    sampling: &SamplingDistribution,
    rng: &mut SeededRng,
    trace: &mut Vec<TracePoint>,
    start_evals: u64,
    record_start: bool,
) -> Result<(DenseVector, u64, u64), SolverError> {
    let n64 = problem.n() as u64;
    let nf = problem.n() as f64;
    let d = problem.dimension();
    let mut x = x0.clone();
    let mut y = DenseVector::zeros(d);
    let mut g = DenseVector::zeros(d);
    let mut evals = start_evals;
    let mut iter_count: u64 = 0;

    if record_start {
        push_point(trace, evals, n64, problem.objective_at(&x), x.nnz(), None);
    }
    for k in 1..=iterations {
        let eta = match schedule {
            StepSchedule::Constant(eta) => eta,
            StepSchedule::InverseMuK(mu) => 1.0 / (mu * k as f64),
        };
        let i = sampling.sample(rng);
        let w = 1.0 / (sampling.probability(i) * nf);
        problem.component(i).gradient_into(&x, &mut g);
        evals += 1;
        iter_count += 1;
        for j in 0..d {
            y[j] = x[j] - eta * w * g[j];
        }
        prox_reg.prox_into(&y, eta, &mut x);
        if !x.is_finite() {
            return Err(SolverError::Diverged { iteration: iter_count });
        }
        if evals % n64 == 0 || k == iterations {
            push_point(trace, evals, n64, problem.objective_at(&x), x.nnz(), None);
        }
    }
    Ok((x, evals - start_evals, iter_count))
}

/// The proximal full gradient method with a constant step.
pub fn prox_fg(
    problem: &CompositeProblem,
    eta: f64,
    iterations: usize,
    x0: &DenseVector,
) -> Result<SolverResult, SolverError> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(SolverError::InvalidConfig(format!(
            "step must be positive and finite, got {eta}"
        )));
    }
    check_start(problem, x0)?;
    let n64 = problem.n() as u64;
    let d = problem.dimension();
    let mut x = x0.clone();
    let mut y = DenseVector::zeros(d);
    let mut g = DenseVector::zeros(d);
    let mut scratch = DenseVector::zeros(d);
    let mut trace = Vec::new();
    let mut evals: u64 = 0;
    push_point(&mut trace, evals, n64, problem.objective_at(&x), x.nnz(), None);
    for k in 1..=iterations {
        problem.full_gradient_into(&x, &mut g, &mut scratch);
        evals += n64;
        for j in 0..d {
            y[j] = x[j] - eta * g[j];
        }
        problem.regularizer().prox_into(&y, eta, &mut x);
        if !x.is_finite() {
            return Err(SolverError::Diverged { iteration: k as u64 });
        }
        push_point(&mut trace, evals, n64, problem.objective_at(&x), x.nnz(), None);
    }
    Ok(SolverResult { x, trace, gradient_evaluations: evals, snapshots: Vec::new() })
}

/// Accelerated proximal gradient: the two-sequence momentum scheme with
/// `t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2` and no restarts.
///
/// The objective is not guaranteed to decrease monotonically; the trace
/// records the raw values.
pub fn prox_afg(
    problem: &CompositeProblem,
    eta: f64,
    iterations: usize,
    x0: &DenseVector,
) -> Result<SolverResult, SolverError> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(SolverError::InvalidConfig(format!(
            "step must be positive and finite, got {eta}"
        )));
    }
    check_start(problem, x0)?;
    let n64 = problem.n() as u64;
    let d = problem.dimension();
    let mut x = x0.clone();
    let mut x_prev = x0.clone();
    let mut extrapolated = x0.clone();
    let mut step_target = DenseVector::zeros(d);
    let mut g = DenseVector::zeros(d);
    let mut scratch = DenseVector::zeros(d);
    let mut t = 1.0_f64;
    let mut trace = Vec::new();
    let mut evals: u64 = 0;
    push_point(&mut trace, evals, n64, problem.objective_at(&x), x.nnz(), None);
    for k in 1..=iterations {
        problem.full_gradient_into(&extrapolated, &mut g, &mut scratch);
        evals += n64;
        for j in 0..d {
            step_target[j] = extrapolated[j] - eta * g[j];
        }
        problem.regularizer().prox_into(&step_target, eta, &mut x);
        if !x.is_finite() {
            return Err(SolverError::Diverged { iteration: k as u64 });
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for j in 0..d {
            extrapolated[j] = x[j] + beta * (x[j] - x_prev[j]);
        }
        x_prev.copy_from(&x);
        t = t_next;
        push_point(&mut trace, evals, n64, problem.objective_at(&x), x.nnz(), None);
    }
    Ok(SolverResult { x, trace, gradient_evaluations: evals, snapshots: Vec::new() })
}

/// The hybrid: one pass of constant-step Prox-SG, then Prox-SVRG from the
/// point it reached, with continuous pass accounting.
pub fn prox_svrg2(
    problem: &CompositeProblem,
    config: &SvrgConfig,
    x0: &DenseVector,
) -> Result<SolverResult, SolverError> {
    prox_svrg2_with_warmup(problem, config, x0, 1)
}

/// [`prox_svrg2`] with an explicit number of warm-up passes; zero passes
/// degenerates to plain [`prox_svrg`].
pub fn prox_svrg2_with_warmup(
    problem: &CompositeProblem,
    config: &SvrgConfig,
    x0: &DenseVector,
    warmup_passes: usize,
) -> Result<SolverResult, SolverError> {
    config.validate(problem)?;
    check_start(problem, x0)?;
    let mut rng = SeededRng::new(config.seed);
    let mut trace = Vec::new();
    let mut warm = x0.clone();
    let mut warm_evals = 0u64;
    let mut warm_iters = 0u64;
    if warmup_passes > 0 {
        let (x, evals, iters) = sg_phase(
            problem,
            problem.regularizer(),
            StepSchedule::Constant(config.step),
            warmup_passes * problem.n(),
            x0,
            &config.sampling,
            &mut rng,
            &mut trace,
            0,
            true,
        )?;
        warm = x;
        warm_evals = evals;
        warm_iters = iters;
    }
    svrg_core(
        problem,
        problem.regularizer(),
        &|x| problem.objective(x).expect("dimension validated"),
        config,
        &warm,
        &mut rng,
        SvrgContinuation {
            evals: warm_evals,
            iterations: warm_iters,
            trace,
            record_start: warmup_passes == 0,
        },
    )
    .map(|mut result| {
        result.gradient_evaluations += warm_evals;
        result
    })
}

/// Runs Prox-SVRG on the epsilon-augmented problem
/// `P_eps(x) = F(x) + (eps/2)||x||^2 + R(x)`, the reduction that makes a
/// merely convex problem strongly convex.
///
/// The prox steps use the shifted regularizer; the trace reports the
/// *original* objective `P(x)`.
pub fn solve_nonstrongly_convex(
    problem: &CompositeProblem,
    eps: f64,
    config: &SvrgConfig,
    x0: &DenseVector,
) -> Result<SolverResult, SolverError> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(SolverError::InvalidConfig(format!(
            "epsilon must be positive and finite, got {eps}"
        )));
    }
    config.validate(problem)?;
    check_start(problem, x0)?;
    let shifted = EpsShifted::new(problem.regularizer(), eps)
        .expect("eps validated above");
    let mut rng = SeededRng::new(config.seed);
    svrg_core(
        problem,
        &shifted,
        &|x| problem.objective(x).expect("dimension validated"),
        config,
        x0,
        &mut rng,
        SvrgContinuation::fresh(),
    )
}
