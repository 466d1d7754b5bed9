//! C-SVC trained with sequential minimal optimization.
//!
//! The binary solver follows the second-order working set selection of
//! LIBSVM without shrinking: each step picks the maximal violating pair,
//! solves the two-variable subproblem analytically and updates the gradient.
//! Columns of `Q_ij = y_i y_j K(x_i, x_j)` are computed on demand and cached.
//!
//! The dual being solved is
//!
//! ```text
//! min_a  a^T Q a / 2 - e^T a    s.t.  y^T a = 0,  0 <= a_i <= C
//! ```
//!
//! and the decision function is `f(x) = sum_i a_i y_i K(x_i, x) - rho`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

/// Upper bound on cached kernel columns per binary problem, in bytes.
const CACHE_BYTES: usize = 256 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Rbf { gamma: f64 },
    Linear,
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        }
    }
}

/// Row-major sample matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    data: Vec<f64>,
    dim: usize,
}

impl Samples {
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::InvalidConfig(format!("{} values do not form rows of width {dim}", data.len())));
        }
        Ok(Samples { data, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub c: f64,
    /// Stop when the maximal KKT violation `m(a) - M(a)` drops below this.
    pub tol: f64,
    /// Iteration cap; `None` means `max(10^7, 100 n)`.
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct QCache<'a> {
    rows: &'a [&'a [f64]],
    y: &'a [f64],
    kernel: Kernel,
    columns: Vec<Option<Box<[f64]>>>,
    cached: usize,
    capacity: usize,
}

impl QCache<'_> {
    fn column(&mut self, i: usize) -> &[f64] {
        if self.columns[i].is_none() {
            if self.cached >= self.capacity {
                self.columns.iter_mut().for_each(|c| *c = None);
                self.cached = 0;
            }
            let xi = self.rows[i];
            let yi = self.y[i];
            let col: Box<[f64]> =
                self.rows.iter().zip(self.y).map(|(xk, &yk)| yi * yk * self.kernel.eval(xi, xk)).collect();
            self.columns[i] = Some(col);
            self.cached += 1;
        }
        self.columns[i].as_deref().unwrap()
    }
}

/// Solves one binary C-SVC problem; `y` holds `+1.0` or `-1.0`.
pub fn solve_binary(rows: &[&[f64]], y: &[f64], kernel: Kernel, params: &SolverParams) -> BinarySolution {
    let n = rows.len();
    let c = params.c;
    let max_iter = params.max_iter.unwrap_or_else(|| 10_000_000.max(100 * n));
    let qd: Vec<f64> = rows.iter().map(|x| kernel.eval(x, x)).collect();
    let mut cache =
        QCache { rows, y, kernel, columns: vec![None; n], cached: 0, capacity: (CACHE_BYTES / (8 * n.max(1))).max(2) };
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];

    let is_upper = |a: f64| a >= c;
    let is_lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // i: maximal violator among the "up" set
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let movable = if y[t] > 0.0 { !is_upper(alpha[t]) } else { !is_lower(alpha[t]) };
            if movable && v >= gmax {
                gmax = v;
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else {
            converged = true;
            break;
        };

        // j: second-order choice among the "low" set
        let q_i = cache.column(i).to_vec();
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut obj_min = f64::INFINITY;
        for t in 0..n {
            let movable = if y[t] > 0.0 { !is_lower(alpha[t]) } else { !is_upper(alpha[t]) };
            if !movable {
                continue;
            }
            let v = y[t] * grad[t];
            if v >= gmax2 {
                gmax2 = v;
            }
            let grad_diff = gmax + v;
            if grad_diff > 0.0 {
                let quad = qd[i] + qd[t] - 2.0 * y[i] * y[t] * q_i[t];
                let quad = if quad > 0.0 { quad } else { TAU };
                let obj = -(grad_diff * grad_diff) / quad;
                if obj <= obj_min {
                    obj_min = obj;
                    j_sel = Some(t);
                }
            }
        }
        if gmax + gmax2 < params.tol {
            converged = true;
            break;
        }
        let Some(j) = j_sel else {
            converged = true;
            break;
        };
        iterations += 1;

        let q_j = cache.column(j).to_vec();
        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_ai, old_aj);
        if y[i] != y[j] {
            let quad = qd[i] + qd[j] + 2.0 * q_i[j];
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = qd[i] + qd[j] - 2.0 * q_i[j];
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (dai, daj) = (ai - old_ai, aj - old_aj);
        for t in 0..n {
            grad[t] += q_i[t] * dai + q_j[t] * daj;
        }
    }

    let rho = compute_rho(&alpha, &grad, y, c);
    BinarySolution { alpha, rho, iterations, converged }
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut n_free = 0usize;
    let mut sum_free = 0.0;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    }
}

/// One machine of the one-vs-one ensemble, separating `positive` (f > 0)
/// from `negative`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMachine {
    pub positive: u16,
    pub negative: u16,
    /// Indices of support vectors into the model's training samples.
    pub support: Vec<usize>,
    /// `alpha_i` of each support vector, in `(0, C]`.
    pub alpha: Vec<f64>,
    /// `alpha_i * y_i` of each support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// RBF width; `None` means `1 / n_features`.
    pub gamma: Option<f64>,
    pub linear: bool,
    pub tol: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 100.0, gamma: None, linear: false, tol: 1e-3 }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!("SVM C must be positive, got {}", self.c)));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidConfig(format!("SVM gamma must be positive, got {g}")));
            }
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!("SVM tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    pub fn kernel(&self, n_features: usize) -> Kernel {
        if self.linear {
            Kernel::Linear
        } else {
            Kernel::Rbf { gamma: self.gamma.unwrap_or(1.0 / n_features as f64) }
        }
    }
}

/// Multi-class SVM over already-scaled samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneVsOne {
    pub kernel: Kernel,
    pub c: f64,
    pub classes: Vec<u16>,
    pub machines: Vec<BinaryMachine>,
    /// Union of all support vectors, ascending; rows kept in `sv_rows`.
    sv_index: Vec<usize>,
    sv_rows: Samples,
}

impl OneVsOne {
    pub fn train(samples: &Samples, labels: &[u16], params: &SvmParams) -> Result<Self> {
        params.validate()?;
        if samples.len() != labels.len() {
            return Err(Error::LengthMismatch(samples.len(), labels.len()));
        }
        let mut classes: Vec<u16> = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::TooFewClasses(classes.len()));
        }
        let kernel = params.kernel(samples.dim());
        let solver = SolverParams { c: params.c, tol: params.tol, max_iter: None };

        let pairs: Vec<(u16, u16)> =
            classes.iter().enumerate().flat_map(|(a, &p)| classes[a + 1..].iter().map(move |&q| (p, q))).collect();
        let machines: Vec<BinaryMachine> = pairs
            .par_iter()
            .map(|&(pos, neg)| {
                let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == pos || labels[i] == neg).collect();
                let rows: Vec<&[f64]> = members.iter().map(|&i| samples.row(i)).collect();
                let y: Vec<f64> = members.iter().map(|&i| if labels[i] == pos { 1.0 } else { -1.0 }).collect();
                let sol = solve_binary(&rows, &y, kernel, &solver);
                let mut m = BinaryMachine {
                    positive: pos,
                    negative: neg,
                    support: Vec::new(),
                    alpha: Vec::new(),
                    coef: Vec::new(),
                    rho: sol.rho,
                    iterations: sol.iterations,
                    converged: sol.converged,
                };
                for (k, &a) in sol.alpha.iter().enumerate() {
                    if a > 0.0 {
                        m.support.push(members[k]);
                        m.alpha.push(a);
                        m.coef.push(a * y[k]);
                    }
                }
                m
            })
            .collect();

        let mut sv_index: Vec<usize> = machines.iter().flat_map(|m| m.support.iter().copied()).collect();
        sv_index.sort_unstable();
        sv_index.dedup();
        let mut data = Vec::with_capacity(sv_index.len() * samples.dim());
        for &i in &sv_index {
            data.extend_from_slice(samples.row(i));
        }
        let sv_rows = Samples::new(data, samples.dim()).unwrap_or(Samples { data: Vec::new(), dim: samples.dim() });
        Ok(OneVsOne { kernel, c: params.c, classes, machines, sv_index, sv_rows })
    }

    fn kernel_row(&self, x: &[f64]) -> Vec<f64> {
        (0..self.sv_index.len()).map(|s| self.kernel.eval(self.sv_rows.row(s), x)).collect()
    }

    fn decisions_from(&self, k: &[f64]) -> Vec<f64> {
        self.machines
            .iter()
            .map(|m| {
                let sum: f64 = m
                    .support
                    .iter()
                    .zip(&m.coef)
                    .map(|(sv, c)| {
                        let pos = self.sv_index.binary_search(sv).expect("support vector in union");
                        c * k[pos]
                    })
                    .sum();
                sum - m.rho
            })
            .collect()
    }

    /// Decision value of every machine for `x`, in `machines` order.
    pub fn decision_values(&self, x: &[f64]) -> Vec<f64> {
        self.decisions_from(&self.kernel_row(x))
    }

    /// Majority vote over all machines; ties go to the lowest class id.
    pub fn predict(&self, x: &[f64]) -> u16 {
        let decisions = self.decision_values(x);
        let mut votes = vec![0usize; self.classes.len()];
        for (m, d) in self.machines.iter().zip(decisions) {
            let winner = if d > 0.0 { m.positive } else { m.negative };
            let idx = self.classes.binary_search(&winner).expect("known class");
            votes[idx] += 1;
        }
        let mut best = 0;
        for (i, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = i;
            }
        }
        self.classes[best]
    }

    pub fn predict_all(&self, samples: &Samples) -> Vec<u16> {
        (0..samples.len()).into_par_iter().map(|i| self.predict(samples.row(i))).collect()
    }
}
