//! L1-penalized logistic regression along a decreasing lambda grid.
//!
//! Each class gets a one-vs-rest binary problem
//!
//! ```text
//! minimize  (1/n) sum_i [ log(1 + exp(eta_i)) - y_i eta_i ] + lambda * ||beta||_1
//! eta_i = b0 + z_i . beta
//! ```
//!
//! on standardized features `z` with an unpenalized intercept, solved by
//! cyclic coordinate descent warm-started down the grid. A coordinate first
//! tries the step from the local Newton weights `p(1-p)`; if that step would
//! raise the objective it falls back to the step from the global curvature
//! bound `1/4`, which can never raise it.

use std::io::Write;

use crate::cost::VarSet;
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PathSettings {
    pub n_lambda: usize,
    pub eps_ratio: f64,
    /// Threshold on the standardized scale for calling a coefficient nonzero.
    pub zero_tol: f64,
    pub kkt_tol: f64,
    /// Coordinate updates allowed per (class, lambda).
    pub max_iters: usize,
}

impl Default for PathSettings {
    fn default() -> Self {
        Self {
            n_lambda: 100,
            eps_ratio: 1e-3,
            zero_tol: 1e-8,
            kkt_tol: 1e-4,
            max_iters: 100_000,
        }
    }
}

/// Strictly decreasing penalties, starting at the smallest value that keeps
/// every coefficient at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    lambdas: Vec<f64>,
}

impl LambdaGrid {
    pub fn from_values(lambdas: Vec<f64>) -> Result<Self> {
        let ok = !lambdas.is_empty()
            && lambdas.iter().all(|l| l.is_finite() && *l > 0.0)
            && lambdas.windows(2).all(|w| w[1] < w[0]);
        if !ok {
            return Err(Error::InvalidConfig(
                "lambda grid must be positive and strictly decreasing".into(),
            ));
        }
        Ok(Self { lambdas })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambdas[0]
    }
}

/// Column-major standardized copy of a feature matrix.
#[derive(Debug, Clone)]
pub(crate) struct Standardized {
    pub columns: Vec<Vec<f64>>,
    pub means: Vec<f64>,
    /// Population standard deviations; 0 marks a constant column.
    pub scales: Vec<f64>,
}

impl Standardized {
    pub fn new(data: &Dataset) -> Self {
        let n = data.n() as f64;
        let mut columns = Vec::with_capacity(data.p());
        let mut means = Vec::with_capacity(data.p());
        let mut scales = Vec::with_capacity(data.p());
        for j in 0..data.p() {
            let col = data.x.column(j);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let sd = var.sqrt();
            let scale = if sd > 1e-12 * (1.0 + mean.abs()) { sd } else { 0.0 };
            let z = if scale > 0.0 {
                col.iter().map(|v| (v - mean) / scale).collect()
            } else {
                vec![0.0; col.len()]
            };
            columns.push(z);
            means.push(mean);
            scales.push(scale);
        }
        Self {
            columns,
            means,
            scales,
        }
    }
}

fn one_vs_rest(y: &[usize], class: usize) -> Vec<f64> {
    y.iter().map(|&c| if c == class { 1.0 } else { 0.0 }).collect()
}

/// `log(1 + exp(eta))` without overflow.
fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

fn soft_threshold(u: f64, t: f64) -> f64 {
    if u > t {
        u - t
    } else if u < -t {
        u + t
    } else {
        0.0
    }
}

/// Mean negative log-likelihood and its gradient with respect to
/// `(b0, beta)` for a binary logistic model on column-major `z`.
pub fn nll_and_gradient(z: &[Vec<f64>], y: &[f64], b0: f64, beta: &[f64]) -> (f64, f64, Vec<f64>) {
    let n = y.len();
    let mut loss = 0.0;
    let mut g0 = 0.0;
    let mut g = vec![0.0; beta.len()];
    for i in 0..n {
        let eta = b0 + beta.iter().zip(z).map(|(b, col)| b * col[i]).sum::<f64>();
        loss += softplus(eta) - y[i] * eta;
        let r = sigmoid(eta) - y[i];
        g0 += r;
        for (gk, col) in g.iter_mut().zip(z) {
            *gk += r * col[i];
        }
    }
    let nf = n as f64;
    g.iter_mut().for_each(|v| *v /= nf);
    (loss / nf, g0 / nf, g)
}

/// Coordinate-descent state for one binary problem.
pub(crate) struct BinarySolver<'a> {
    z: &'a [Vec<f64>],
    y: Vec<f64>,
    pub b0: f64,
    pub beta: Vec<f64>,
    eta: Vec<f64>,
    /// `(1/n) sum_i z_ik^2 / 4` per column.
    bound: Vec<f64>,
    loss: f64,
}

impl<'a> BinarySolver<'a> {
    /// Starts at `beta = 0` with the intercept at the log-odds of `y`.
    pub fn new(z: &'a [Vec<f64>], y: Vec<f64>) -> Self {
        let n = y.len() as f64;
        let ybar = y.iter().sum::<f64>() / n;
        let b0 = (ybar / (1.0 - ybar)).ln();
        let bound = z
            .iter()
            .map(|col| col.iter().map(|v| v * v).sum::<f64>() / n / 4.0)
            .collect();
        let mut s = Self {
            z,
            y,
            b0,
            beta: vec![0.0; z.len()],
            eta: vec![b0; n as usize],
            bound,
            loss: 0.0,
        };
        s.loss = s.loss_at(&s.eta);
        s
    }

    fn n(&self) -> f64 {
        self.y.len() as f64
    }

    fn loss_at(&self, eta: &[f64]) -> f64 {
        eta.iter()
            .zip(&self.y)
            .map(|(&e, &y)| softplus(e) - y * e)
            .sum::<f64>()
            / self.n()
    }

    fn loss_shifted(&self, col: Option<&[f64]>, delta: f64) -> f64 {
        let total: f64 = match col {
            Some(c) => self
                .eta
                .iter()
                .zip(c)
                .zip(&self.y)
                .map(|((&e, &z), &y)| {
                    let e = e + delta * z;
                    softplus(e) - y * e
                })
                .sum(),
            None => self
                .eta
                .iter()
                .zip(&self.y)
                .map(|(&e, &y)| {
                    let e = e + delta;
                    softplus(e) - y * e
                })
                .sum(),
        };
        total / self.n()
    }

    pub fn objective(&self, lambda: f64) -> f64 {
        self.loss + lambda * self.beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    /// Score `(1/n) sum (y - p) z` and Newton curvature `(1/n) sum w z^2`.
    fn score_and_curvature(&self, col: Option<&[f64]>) -> (f64, f64) {
        let mut score = 0.0;
        let mut curv = 0.0;
        for (i, (&e, &y)) in self.eta.iter().zip(&self.y).enumerate() {
            let p = sigmoid(e);
            let z = col.map_or(1.0, |c| c[i]);
            score += (y - p) * z;
            curv += p * (1.0 - p) * z * z;
        }
        (score / self.n(), curv / self.n())
    }

    fn apply(&mut self, col: Option<usize>, delta: f64, loss: f64) {
        match col {
            Some(k) => {
                self.beta[k] += delta;
                for (e, z) in self.eta.iter_mut().zip(&self.z[k]) {
                    *e += delta * z;
                }
            }
            None => {
                self.b0 += delta;
                self.eta.iter_mut().for_each(|e| *e += delta);
            }
        }
        self.loss = loss;
    }

    fn update_intercept(&mut self) {
        let (score, curv) = self.score_and_curvature(None);
        if score == 0.0 {
            return;
        }
        let before = self.loss;
        if curv > 1e-12 {
            let delta = score / curv;
            let loss = self.loss_shifted(None, delta);
            if loss <= before {
                self.apply(None, delta, loss);
                return;
            }
        }
        let delta = 4.0 * score;
        let loss = self.loss_shifted(None, delta);
        if loss <= before {
            self.apply(None, delta, loss);
        }
    }

    fn update_coordinate(&mut self, k: usize, lambda: f64) {
        if self.bound[k] == 0.0 {
            return;
        }
        let col = &self.z[k];
        let (score, curv) = self.score_and_curvature(Some(col));
        let old = self.beta[k];
        if old == 0.0 && score.abs() <= lambda {
            return;
        }
        let before = self.objective(lambda);
        let penalty_rest = before - self.loss - lambda * old.abs();
        if curv > 1e-12 {
            let next = soft_threshold(curv * old + score, lambda) / curv;
            let loss = self.loss_shifted(Some(col), next - old);
            if loss + penalty_rest + lambda * next.abs() <= before {
                self.apply(Some(k), next - old, loss);
                return;
            }
        }
        let h = self.bound[k];
        let next = soft_threshold(h * old + score, lambda) / h;
        let loss = self.loss_shifted(Some(col), next - old);
        if loss + penalty_rest + lambda * next.abs() <= before {
            self.apply(Some(k), next - old, loss);
        }
    }

    /// One pass over the intercept and every coordinate.
    pub fn sweep(&mut self, lambda: f64) {
        self.update_intercept();
        for k in 0..self.beta.len() {
            self.update_coordinate(k, lambda);
        }
    }

    /// Largest violation of the optimality conditions at `lambda`.
    pub fn kkt_residual(&self, lambda: f64) -> f64 {
        kkt_residual(self.z, &self.y, self.b0, &self.beta, lambda)
    }

    /// Sweeps until the KKT residual drops below `tol`.
    pub fn solve(&mut self, lambda: f64, tol: f64, max_updates: usize) -> bool {
        let per_sweep = self.beta.len() + 1;
        let mut used = 0;
        loop {
            if self.kkt_residual(lambda) <= tol {
                return true;
            }
            if used + per_sweep > max_updates {
                return false;
            }
            self.sweep(lambda);
            used += per_sweep;
        }
    }
}

/// Optimality violation of `(b0, beta)` for the penalized binary problem.
pub(crate) fn kkt_residual(z: &[Vec<f64>], y: &[f64], b0: f64, beta: &[f64], lambda: f64) -> f64 {
    let (_, g0, g) = nll_and_gradient(z, y, b0, beta);
    let mut worst = g0.abs();
    for (k, (&gk, &b)) in g.iter().zip(beta).enumerate() {
        // constant columns carry no signal and stay at zero
        if z[k].iter().all(|&v| v == 0.0) {
            continue;
        }
        let score = -gk;
        let r = if b == 0.0 {
            (score.abs() - lambda).max(0.0)
        } else {
            (score - lambda * b.signum()).abs()
        };
        worst = worst.max(r);
    }
    worst
}

pub(crate) fn lambda_max_of(std: &Standardized, y: &[usize], n_classes: usize) -> f64 {
    let n = y.len() as f64;
    let mut best: f64 = 0.0;
    for class in 1..=n_classes {
        let yc = one_vs_rest(y, class);
        let ybar = yc.iter().sum::<f64>() / n;
        for col in &std.columns {
            let s: f64 = col.iter().zip(&yc).map(|(z, y)| z * (y - ybar)).sum();
            best = best.max((s / n).abs());
        }
    }
    best
}

fn check_labels(data: &Dataset) -> Result<()> {
    if data.n() < 2 {
        return Err(Error::DatasetTooSmall { n: data.n() });
    }
    if data.y.iter().all(|&c| c == data.y[0]) {
        return Err(Error::DegenerateLabels);
    }
    Ok(())
}

/// Geometric grid from `lambda_max` down to `eps_ratio * lambda_max`.
pub fn make_lambda_grid(data: &Dataset, n_lambda: usize, eps_ratio: f64) -> Result<LambdaGrid> {
    check_labels(data)?;
    if n_lambda == 0 || !(eps_ratio > 0.0 && eps_ratio < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "bad lambda grid settings (n_lambda {n_lambda}, eps_ratio {eps_ratio})"
        )));
    }
    let std = Standardized::new(data);
    let lmax = lambda_max_of(&std, &data.y, data.n_classes);
    if lmax <= 0.0 {
        return Err(Error::DegenerateFeatures);
    }
    if n_lambda == 1 {
        return LambdaGrid::from_values(vec![lmax]);
    }
    let ratio = eps_ratio.powf(1.0 / (n_lambda - 1) as f64);
    let lambdas = (0..n_lambda).map(|k| lmax * ratio.powi(k as i32)).collect();
    LambdaGrid::from_values(lambdas)
}

/// Fitted coefficients for every (class, variable, lambda step).
#[derive(Debug, Clone, PartialEq)]
pub struct PathCoefficients {
    n_classes: usize,
    p: usize,
    lambdas: Vec<f64>,
    /// `[step][class][variable]`, standardized scale.
    theta: Vec<f64>,
    /// `[step][class]`, standardized scale.
    intercepts: Vec<f64>,
    means: Vec<f64>,
    scales: Vec<f64>,
    /// False for classes absent from (or making up all of) the training rows.
    fitted: Vec<bool>,
    zero_tol: f64,
}

impl PathCoefficients {
    pub fn n_steps(&self) -> usize {
        self.lambdas.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    fn at(&self, step: usize, class: usize, var: usize) -> usize {
        (step * self.n_classes + class) * self.p + var
    }

    /// Standardized-scale coefficient. `class` is 1-based, `var` 1-based,
    /// `step` 0-based (step 0 is lambda_max).
    pub fn standardized(&self, class: usize, var: usize, step: usize) -> f64 {
        self.theta[self.at(step, class - 1, var - 1)]
    }

    /// Coefficient on the original feature scale.
    pub fn coefficient(&self, class: usize, var: usize, step: usize) -> f64 {
        let s = self.scales[var - 1];
        if s == 0.0 {
            0.0
        } else {
            self.standardized(class, var, step) / s
        }
    }

    /// Intercept on the original feature scale.
    pub fn intercept(&self, class: usize, step: usize) -> f64 {
        let b0 = self.intercepts[step * self.n_classes + class - 1];
        let shift: f64 = (1..=self.p)
            .map(|v| self.coefficient(class, v, step) * self.means[v - 1])
            .sum();
        b0 - shift
    }

    pub fn is_fitted(&self, class: usize) -> bool {
        self.fitted[class - 1]
    }

    /// Union over classes of the variables with a nonzero coefficient.
    pub fn active_variables(&self, step: usize) -> VarSet {
        (1..=self.p)
            .filter(|&v| {
                (1..=self.n_classes).any(|c| self.standardized(c, v, step).abs() > self.zero_tol)
            })
            .collect()
    }

    /// Linear score of `class` at `step` for a raw feature vector.
    pub fn score(&self, class: usize, step: usize, x: &[f64]) -> f64 {
        self.intercept(class, step)
            + x.iter()
                .enumerate()
                .map(|(k, v)| self.coefficient(class, k + 1, step) * v)
                .sum::<f64>()
    }

    /// One-vs-rest argmax of the class scores; ties go to the smaller label.
    pub fn predict(&self, step: usize, x: &[f64]) -> Result<usize> {
        if x.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                got: x.len(),
            });
        }
        let mut best = 1;
        let mut best_score = self.score(1, step, x);
        for class in 2..=self.n_classes {
            let s = self.score(class, step, x);
            if s > best_score {
                best = class;
                best_score = s;
            }
        }
        Ok(best)
    }

    pub fn accuracy_on(&self, step: usize, data: &Dataset) -> Result<f64> {
        if data.n() == 0 {
            return Err(Error::EmptyEvaluationSet);
        }
        let mut correct = 0;
        for i in 0..data.n() {
            if self.predict(step, data.x.row(i))? == data.y[i] {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.n() as f64)
    }

    /// Largest KKT violation of each `(class, step)` slice on `train`,
    /// indexed `[step][class]`. Unfitted classes report 0.
    pub fn kkt_residuals(&self, train: &Dataset) -> Vec<Vec<f64>> {
        let std = Standardized::new(train);
        (0..self.n_steps())
            .map(|step| {
                (1..=self.n_classes)
                    .map(|class| {
                        if !self.is_fitted(class) {
                            return 0.0;
                        }
                        let y = one_vs_rest(&train.y, class);
                        let beta: Vec<f64> =
                            (1..=self.p).map(|v| self.standardized(class, v, step)).collect();
                        let b0 = self.intercepts[step * self.n_classes + class - 1];
                        kkt_residual(&std.columns, &y, b0, &beta, self.lambdas[step])
                    })
                    .collect()
            })
            .collect()
    }

    /// Delimited dump: `step,lambda,class,variable,coefficient` (original scale,
    /// 1-based step).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,lambda,class,variable,coefficient")?;
        for step in 0..self.n_steps() {
            for class in 1..=self.n_classes {
                for var in 1..=self.p {
                    writeln!(
                        out,
                        "{},{},{},{},{}",
                        step + 1,
                        self.lambdas[step],
                        class,
                        var,
                        self.coefficient(class, var, step)
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Fits every one-vs-rest problem along `grid`, warm-starting each lambda
/// from the previous solution.
pub fn fit_l1_logistic_path(data: &Dataset, grid: &LambdaGrid, settings: &PathSettings) -> Result<PathCoefficients> {
    check_labels(data)?;
    let std = Standardized::new(data);
    let n = data.n();
    let p = data.p();
    let n_classes = data.n_classes;
    let r = grid.len();
    let mut theta = vec![0.0; r * n_classes * p];
    let mut intercepts = vec![0.0; r * n_classes];
    let mut fitted = vec![true; n_classes];
    // tighter than the reporting tolerance so stored slices clear it
    let target = settings.kkt_tol * 0.1;

    for class in 1..=n_classes {
        let y = one_vs_rest(&data.y, class);
        let positives = y.iter().sum::<f64>();
        if positives == 0.0 || positives == n as f64 {
            fitted[class - 1] = false;
            let b0 = ((positives + 0.5) / (n as f64 - positives + 0.5)).ln();
            for step in 0..r {
                intercepts[step * n_classes + class - 1] = b0;
            }
            continue;
        }
        let mut solver = BinarySolver::new(&std.columns, y);
        for (step, &lambda) in grid.lambdas().iter().enumerate() {
            if !solver.solve(lambda, target, settings.max_iters) {
                return Err(Error::ConvergenceFailure { class, lambda });
            }
            for (v, &b) in solver.beta.iter().enumerate() {
                theta[(step * n_classes + class - 1) * p + v] = b;
            }
            intercepts[step * n_classes + class - 1] = solver.b0;
        }
    }

    Ok(PathCoefficients {
        n_classes,
        p,
        lambdas: grid.lambdas().to_vec(),
        theta,
        intercepts,
        means: std.means,
        scales: std.scales,
        fitted,
        zero_tol: settings.zero_tol,
    })
}
