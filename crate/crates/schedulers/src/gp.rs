use std::time::{Duration, Instant};

use dpp_core::Subset;
use numerics::{LuFactors, Matrix};
use serde::{Deserialize, Serialize};

use network_sim::{sinr, sum_rate, NetworkInstance};

use crate::monomial::{monomial_params, monomial_validity};
use crate::{Result, SchedError};

/// Configuration of the successive-monomial GP solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GpConfig {
    /// Outer stopping tolerance on `max_i |gamma*_i - gamma'_i|`.
    pub tolerance: f64,
    pub max_outer_iters: usize,
    /// Quantization threshold: links with continuous power at or above this
    /// become active at the high level.
    pub p_threshold_watts: f64,
    /// Power lower bound keeping the log change of variables well-defined;
    /// `None` uses `1e-6 * p_high`.
    pub p_floor_watts: Option<f64>,
    /// Barrier parameter multiplier per centering stage.
    pub barrier_mu: f64,
    /// Inner stopping tolerance (barrier duality gap and Newton decrement).
    pub inner_tol: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-3,
            max_outer_iters: 500,
            p_threshold_watts: 10f64.powf((3.0 - 30.0) / 10.0), // 3 dBm
            p_floor_watts: None,
            barrier_mu: 10.0,
            inner_tol: 1e-8,
        }
    }
}

impl GpConfig {
    pub fn with_threshold_dbm(mut self, dbm: f64) -> Self {
        self.p_threshold_watts = 10f64.powf((dbm - 30.0) / 10.0);
        self
    }

    fn validate(&self, p_high: f64) -> Result<f64> {
        if !(self.tolerance > 0.0) {
            return Err(SchedError::Config("tolerance must be positive".into()));
        }
        let p_floor = self.p_floor_watts.unwrap_or(1e-6 * p_high);
        if !(0.0 < p_floor && p_floor < self.p_threshold_watts && self.p_threshold_watts < p_high)
        {
            return Err(SchedError::Config(format!(
                "need 0 < pFloor ({p_floor}) < pThreshold ({}) < pHigh ({p_high})",
                self.p_threshold_watts
            )));
        }
        Ok(p_floor)
    }
}

/// Outcome of a scheduling run.
#[derive(Debug, Clone)]
pub struct ScheduleResult {
    pub active: Subset,
    pub continuous_powers: Vec<f64>,
    pub achieved_sum_rate: f64,
    pub outer_iters: usize,
    pub wall_time: Duration,
    pub solver_tag: String,
}

impl ScheduleResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "active": self.active.indices(),
            "continuousPowersWatts": self.continuous_powers,
            "achievedSumRate": self.achieved_sum_rate,
            "outerIters": self.outer_iters,
            "wallTimeMicros": self.wall_time.as_micros() as u64,
            "solverTag": self.solver_tag,
        })
    }
}

/// Inner GP subproblem in log variables `u = log P`, `v = log gamma`:
/// maximize `sum alpha_i v_i` subject to the posynomial SINR constraints
/// `c_i = lse_i(u, v) <= 0` and the box `lo <= u <= hi`.
struct InnerProblem {
    m: usize,
    /// log(N / zeta_ii)
    log_noise_coef: Vec<f64>,
    /// log(zeta_ji / zeta_ii), row j, receiver i (diagonal unused)
    log_cross_coef: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl InnerProblem {
    fn new(inst: &NetworkInstance, alpha: Vec<f64>, lo: f64, hi: f64) -> Self {
        let m = inst.m();
        let log_noise_coef = (0..m)
            .map(|i| (inst.noise_watts / inst.gain[(i, i)]).ln())
            .collect();
        let log_cross_coef = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        if j == i {
                            f64::NEG_INFINITY
                        } else {
                            (inst.gain[(j, i)] / inst.gain[(i, i)]).ln()
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            m,
            log_noise_coef,
            log_cross_coef,
            alpha,
            lo,
            hi,
        }
    }

    /// Constraint value plus softmax weights over its posynomial terms.
    /// Term 0 is the noise term, term j (j != i) the cross-interference term.
    fn constraint(&self, i: usize, u: &[f64], v: &[f64]) -> (f64, Vec<f64>) {
        let mut w = Vec::with_capacity(self.m);
        w.push(self.log_noise_coef[i] + v[i] - u[i]);
        for j in 0..self.m {
            if j != i {
                w.push(self.log_cross_coef[i][j] + u[j] - u[i] + v[i]);
            }
        }
        let wmax = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for x in w.iter_mut() {
            *x = (*x - wmax).exp();
            total += *x;
        }
        let c = wmax + total.ln();
        for x in w.iter_mut() {
            *x /= total;
        }
        (c, w)
    }

    /// Barrier objective at parameter `t`; infinite when infeasible.
    fn barrier_value(&self, t: f64, u: &[f64], v: &[f64]) -> f64 {
        let mut phi = -t * self.alpha.iter().zip(v).map(|(a, vi)| a * vi).sum::<f64>();
        for i in 0..self.m {
            let (c, _) = self.constraint(i, u, v);
            if c >= 0.0 {
                return f64::INFINITY;
            }
            phi -= (-c).ln();
            if u[i] <= self.lo || u[i] >= self.hi {
                return f64::INFINITY;
            }
            phi -= (u[i] - self.lo).ln();
            phi -= (self.hi - u[i]).ln();
        }
        phi
    }

    /// Barrier gradient and Hessian over the stacked variables (u, v).
    fn barrier_grad_hess(&self, t: f64, u: &[f64], v: &[f64]) -> (Vec<f64>, Matrix) {
        let m = self.m;
        let dim = 2 * m;
        let mut grad = vec![0.0; dim];
        let mut hess = Matrix::zeros(dim, dim);

        for i in 0..m {
            grad[m + i] -= t * self.alpha[i];
            // Box barrier on u_i.
            grad[i] += -1.0 / (u[i] - self.lo) + 1.0 / (self.hi - u[i]);
            hess[(i, i)] += 1.0 / (u[i] - self.lo).powi(2) + 1.0 / (self.hi - u[i]).powi(2);
        }

        // Gradient of c_i is supported on u_i (-1), v_i (+1) and u_j (s_j).
        let mut gc = vec![0.0; dim];
        let mut touched: Vec<usize> = Vec::with_capacity(m + 2);
        for i in 0..m {
            let (c, s) = self.constraint(i, u, v);
            let inv = -1.0 / c; // positive since c < 0
            gc.iter_mut().for_each(|x| *x = 0.0);
            touched.clear();
            gc[i] = -1.0;
            touched.push(i);
            gc[m + i] = 1.0;
            touched.push(m + i);
            let mut idx = 1;
            for j in 0..m {
                if j == i {
                    continue;
                }
                gc[j] = s[idx];
                touched.push(j);
                idx += 1;
            }

            // (1/c^2) gc gc^T
            let w1 = 1.0 / (c * c);
            for &a in &touched {
                if gc[a] == 0.0 {
                    continue;
                }
                for &b in &touched {
                    hess[(a, b)] += w1 * gc[a] * gc[b];
                }
                grad[a] += inv * gc[a];
            }

            // (-1/c) * hess(c_i) with hess(c_i) = sum_k s_k a_k a_k^T - gc gc^T.
            // Term 0 touches (u_i, v_i); term j touches (u_j, u_i, v_i).
            let add = |h: &mut Matrix, a: usize, b: usize, val: f64| {
                h[(a, b)] += val;
            };
            let s0 = s[0] * inv;
            add(&mut hess, i, i, s0);
            add(&mut hess, m + i, m + i, s0);
            add(&mut hess, i, m + i, -s0);
            add(&mut hess, m + i, i, -s0);
            let mut idx = 1;
            for j in 0..m {
                if j == i {
                    continue;
                }
                let sj = s[idx] * inv;
                idx += 1;
                if sj == 0.0 {
                    continue;
                }
                add(&mut hess, j, j, sj);
                add(&mut hess, i, i, sj);
                add(&mut hess, m + i, m + i, sj);
                add(&mut hess, j, i, -sj);
                add(&mut hess, i, j, -sj);
                add(&mut hess, j, m + i, sj);
                add(&mut hess, m + i, j, sj);
                add(&mut hess, i, m + i, -sj);
                add(&mut hess, m + i, i, -sj);
            }
            for &a in &touched {
                for &b in &touched {
                    hess[(a, b)] -= inv * gc[a] * gc[b];
                }
            }
        }

        (grad, hess)
    }

    /// Damped-Newton minimization of the barrier objective at fixed `t`.
    fn center(&self, t: f64, u: &mut Vec<f64>, v: &mut Vec<f64>, inner_tol: f64) -> Result<()> {
        let m = self.m;
        for _step in 0..60 {
            let (grad, mut hess) = self.barrier_grad_hess(t, u, v);
            let dim = 2 * m;
            // Jacobi scaling: barrier curvature spans many orders of
            // magnitude near the boundary, which would otherwise trip the
            // relative pivot floor of the LU factorization.
            let scale_d: Vec<f64> = (0..dim)
                .map(|d| {
                    let h = hess[(d, d)];
                    if h > 0.0 && h.is_finite() {
                        h.sqrt()
                    } else {
                        1.0
                    }
                })
                .collect();
            for a in 0..dim {
                for b in 0..dim {
                    hess[(a, b)] /= scale_d[a] * scale_d[b];
                }
                hess[(a, a)] += 1e-12; // ridge against exact rank deficiency
            }
            let rhs = Matrix::from_rows(
                dim,
                1,
                grad.iter().zip(&scale_d).map(|(g, d)| -g / d).collect(),
            )
            .map_err(|e| SchedError::InnerSolver(format!("Newton rhs: {e}")))?;
            let scaled_step = LuFactors::factor(&hess)?
                .solve(&rhs)
                .map_err(|e| SchedError::InnerSolver(format!("Newton system: {e}")))?;
            let step: Vec<f64> = (0..dim).map(|d| scaled_step[(d, 0)] / scale_d[d]).collect();
            // Newton decrement^2 = -grad . step
            let decrement2: f64 = grad.iter().zip(&step).map(|(g, s)| -g * s).sum();
            if !decrement2.is_finite() {
                return Err(SchedError::InnerSolver("non-finite Newton decrement".into()));
            }
            if decrement2 / 2.0 <= inner_tol {
                return Ok(());
            }
            // Backtracking line search (Armijo 1e-4, halving).
            let phi0 = self.barrier_value(t, u, v);
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let u_try: Vec<f64> = (0..m).map(|d| u[d] + scale * step[d]).collect();
                let v_try: Vec<f64> = (0..m).map(|d| v[d] + scale * step[m + d]).collect();
                let phi = self.barrier_value(t, &u_try, &v_try);
                if phi <= phi0 - 1e-4 * scale * decrement2 {
                    *u = u_try;
                    *v = v_try;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted {
                // Stalled at numerical precision; the iterate is centered
                // as far as the arithmetic allows.
                return Ok(());
            }
        }
        Ok(())
    }

    /// Full barrier solve starting from a strictly feasible point.
    fn solve(&self, u: &mut Vec<f64>, v: &mut Vec<f64>, mu: f64, inner_tol: f64) -> Result<()> {
        let n_constraints = (3 * self.m) as f64;
        if self.barrier_value(1.0, u, v).is_infinite() {
            return Err(SchedError::InnerSolver("infeasible start".into()));
        }
        let mut t = 1.0;
        loop {
            self.center(t, u, v, inner_tol)?;
            if n_constraints / t <= inner_tol {
                return Ok(());
            }
            t *= mu;
        }
    }
}

/// Iterative GP scheduler: successive monomial approximation around the
/// previous SINR iterate, binary quantization of the converged powers at the
/// activity threshold, sum-rate recomputed with the quantized powers.
pub fn gp_schedule(inst: &NetworkInstance, cfg: &GpConfig) -> Result<ScheduleResult> {
    let start = Instant::now();
    let m = inst.m();
    if m < 1 {
        return Err(SchedError::Domain("instance has no links".into()));
    }
    let p_high = inst.p_high_watts;
    let p_floor = cfg.validate(p_high)?;
    let lo = p_floor.ln();
    let hi = p_high.ln();

    let full = Subset::new((0..m).collect()).expect("distinct indices");
    let mut gamma_prev = sinr(inst, &full);
    // Strictly interior start: just inside the power box, SINR slack below
    // the constraint surface.
    let mut u = vec![hi - 1e-3 * (hi - lo); m];
    let mut v: Vec<f64> = {
        let p0: Vec<f64> = u.iter().map(|&x| x.exp()).collect();
        (0..m)
            .map(|i| {
                let interference: f64 = (0..m)
                    .filter(|&j| j != i)
                    .map(|j| p0[j] * inst.gain[(j, i)])
                    .sum();
                (p0[i] * inst.gain[(i, i)] / (interference + inst.noise_watts)).ln() - 1e-2
            })
            .collect()
    };

    let mut outer_iters = 0;
    let mut converged = false;
    let mut last_delta = f64::INFINITY;
    while outer_iters < cfg.max_outer_iters {
        outer_iters += 1;
        let (_, alpha) = monomial_params(&gamma_prev)?;
        let problem = InnerProblem::new(inst, alpha, lo, hi);
        problem.solve(&mut u, &mut v, cfg.barrier_mu, cfg.inner_tol)?;
        let gamma_star: Vec<f64> = v.iter().map(|&x| x.exp()).collect();
        if !monomial_validity(&gamma_star, &gamma_prev) {
            return Err(SchedError::InnerSolver(
                "monomial lower bound violated at the accepted iterate".into(),
            ));
        }
        // Relative change: absolute SINR deltas are meaningless when the
        // interference-free links sit at SNRs of 1e4 and above.
        last_delta = gamma_star
            .iter()
            .zip(&gamma_prev)
            .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max);
        gamma_prev = gamma_star;
        if last_delta <= cfg.tolerance {
            converged = true;
            break;
        }
        // (u, v) stays a strictly feasible warm start: the constraints do
        // not depend on the monomial exponents.
    }
    if !converged {
        return Err(SchedError::OuterNonConvergence {
            iters: outer_iters,
            delta: last_delta,
        });
    }

    let continuous_powers: Vec<f64> = u.iter().map(|&x| x.exp()).collect();
    let active = Subset::new(
        continuous_powers
            .iter()
            .enumerate()
            .filter(|(_, &p)| p >= cfg.p_threshold_watts)
            .map(|(i, _)| i)
            .collect(),
    )
    .expect("distinct indices");
    let achieved_sum_rate = sum_rate(inst, &active);

    Ok(ScheduleResult {
        active,
        continuous_powers,
        achieved_sum_rate,
        outer_iters,
        wall_time: start.elapsed(),
        solver_tag: "gp".into(),
    })
}
