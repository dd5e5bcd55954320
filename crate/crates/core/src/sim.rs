//! Time-domain oracle: method-of-steps RK4 integration and decay-rate
//! estimation.
//!
//! Lower-confidence than the winding-number count (it sees only one
//! trajectory over a finite horizon) but entirely independent of both the
//! closed-form criterion and the contour arithmetic.

use crate::model::{SystemParams, Trajectory};
use std::io::{self, Write};
use thiserror::Error;

/// Norm at which integration stops and the trajectory is truncated; the
/// decay estimator reports such runs as strong growth.
pub const OVERFLOW_NORM: f64 = 1e150;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("step must satisfy 0 < step <= tau/10, got step = {step}, tau = {tau}")]
    BadStep { step: f64, tau: f64 },
    #[error("horizon must satisfy horizon >= 20 tau, got horizon = {horizon}, tau = {tau}")]
    BadHorizon { horizon: f64, tau: f64 },
    #[error("trajectory spans {span} but decay estimation needs >= 20 tau = {required}")]
    TooShort { span: f64, required: f64 },
    #[error("degenerate trajectory: norm below 1e-300 over the whole fit window")]
    Degenerate,
}

/// Initial data on `[-tau, 0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum History {
    Constant { x: f64, y: f64 },
    /// Cubic polynomials in `s = t/tau` (so `s` runs over `[-1, 0]`):
    /// `x(t) = sum x_coeffs[i] s^i`, likewise for `y`. Used to excite modes
    /// a constant history might miss.
    Cubic { x: [f64; 4], y: [f64; 4] },
}

impl History {
    fn value(&self, t: f64, tau: f64) -> [f64; 2] {
        match self {
            History::Constant { x, y } => [*x, *y],
            History::Cubic { x, y } => {
                let s = t / tau;
                [poly(x, s), poly(y, s)]
            }
        }
    }

    fn deriv(&self, t: f64, tau: f64) -> [f64; 2] {
        match self {
            History::Constant { .. } => [0.0, 0.0],
            History::Cubic { x, y } => {
                let s = t / tau;
                [poly_deriv(x, s) / tau, poly_deriv(y, s) / tau]
            }
        }
    }
}

fn poly(c: &[f64; 4], s: f64) -> f64 {
    ((c[3] * s + c[2]) * s + c[1]) * s + c[0]
}

fn poly_deriv(c: &[f64; 4], s: f64) -> f64 {
    (3.0 * c[3] * s + 2.0 * c[2]) * s + c[1]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Requested step; rounded down so an integer number of steps spans tau.
    pub step: f64,
    /// Final time; must allow at least 20 delay intervals.
    pub horizon: f64,
    pub history: History,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayHint {
    Decaying,
    Growing,
    /// `|rate| * horizon < 2`: the fitted trend is below what the horizon
    /// can resolve.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DecayEstimate {
    /// Least-squares slope of `log ||(x, y)||` over the last half of the
    /// trajectory.
    pub rate: f64,
    pub verdict_hint: DecayHint,
}

/// Integrate the system by the method of steps with classical RK4 on a
/// uniform grid of `m = ceil(tau/step)` nodes per delay interval.
///
/// Delayed values fall either on grid nodes (taken exactly) or halfway
/// between two nodes (cubic Hermite from stored values and derivatives,
/// preserving RK4's order); while the delayed time is still inside the
/// history segment the history function is evaluated directly. If the
/// norm exceeds [`OVERFLOW_NORM`] the trajectory is truncated there and
/// returned; the decay estimator treats that as decisive growth.
pub fn simulate(params: &SystemParams, config: &SimConfig) -> Result<Trajectory, SimError> {
    let tau = params.tau;
    if !(config.step > 0.0 && config.step.is_finite()) || config.step > tau / 10.0 {
        return Err(SimError::BadStep {
            step: config.step,
            tau,
        });
    }
    if !config.horizon.is_finite() || config.horizon < 20.0 * tau {
        return Err(SimError::BadHorizon {
            horizon: config.horizon,
            tau,
        });
    }

    let m = (tau / config.step).ceil() as usize; // >= 10 by the step bound
    let h = tau / m as f64;
    let n_steps = (config.horizon / h).ceil() as usize;
    let total = m + n_steps + 1;

    let rhs = |state: [f64; 2], delayed: [f64; 2]| -> [f64; 2] {
        [
            -params.a * state[0] - params.alpha * delayed[0] - params.b * state[1],
            -params.a * state[1] - params.c * state[0] - params.alpha * delayed[1],
        ]
    };

    let time_at = |j: usize| -> f64 { (j as f64 - m as f64) * h };

    let mut states: Vec<[f64; 2]> = Vec::with_capacity(total);
    let mut derivs: Vec<[f64; 2]> = Vec::with_capacity(total);
    for j in 0..=m {
        let t = time_at(j);
        states.push(config.history.value(t, tau));
        derivs.push(config.history.deriv(t, tau));
    }
    // At t = 0 the stored slope switches from the history's derivative to
    // the right-hand side, so Hermite data for [0, h] is consistent.
    derivs[m] = rhs(states[m], config.history.value(-tau, tau));

    for j in m..m + n_steps {
        let u = states[j];
        // Delayed samples for the three stage times t_j, t_j + h/2, t_j+1.
        let base = j - m;
        let z0 = states[base];
        let z1 = states[base + 1];
        let z_mid = if base + 1 <= m {
            // Base interval still inside the history segment: exact value.
            config.history.value(time_at(base) + 0.5 * h, tau)
        } else {
            hermite_mid(states[base], states[base + 1], derivs[base], derivs[base + 1], h)
        };

        let k1 = rhs(u, z0);
        let k2 = rhs(
            [u[0] + 0.5 * h * k1[0], u[1] + 0.5 * h * k1[1]],
            z_mid,
        );
        let k3 = rhs(
            [u[0] + 0.5 * h * k2[0], u[1] + 0.5 * h * k2[1]],
            z_mid,
        );
        let k4 = rhs([u[0] + h * k3[0], u[1] + h * k3[1]], z1);
        let next = [
            u[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            u[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];

        if !next[0].is_finite() || !next[1].is_finite() {
            break;
        }
        states.push(next);
        derivs.push(rhs(next, z1));
        if next[0].hypot(next[1]) > OVERFLOW_NORM {
            break;
        }
    }

    let times = (0..states.len()).map(time_at).collect();
    Ok(Trajectory {
        times,
        states,
        step: h,
    })
}

/// Cubic Hermite interpolant at the midpoint of `[t0, t0 + h]`.
fn hermite_mid(y0: [f64; 2], y1: [f64; 2], f0: [f64; 2], f1: [f64; 2], h: f64) -> [f64; 2] {
    [
        0.5 * (y0[0] + y1[0]) + 0.125 * h * (f0[0] - f1[0]),
        0.5 * (y0[1] + y1[1]) + 0.125 * h * (f0[1] - f1[1]),
    ]
}

/// Least-squares decay rate of `log ||(x, y)||` over the last half of the
/// trajectory (history excluded), with a resolution-aware hint.
pub fn estimate_decay(traj: &Trajectory) -> Result<DecayEstimate, SimError> {
    let tau = -traj.times[0];
    let t_last = traj.last_time();
    let overflowed = traj.norm(traj.len() - 1) > OVERFLOW_NORM;
    if t_last < 20.0 * tau && !overflowed {
        return Err(SimError::TooShort {
            span: t_last,
            required: 20.0 * tau,
        });
    }

    let cut = t_last / 2.0;
    let mut n = 0usize;
    let mut sum_t = 0.0;
    let mut sum_l = 0.0;
    let mut sum_tt = 0.0;
    let mut sum_tl = 0.0;
    let mut any_signal = false;
    for i in 0..traj.len() {
        let t = traj.times[i];
        if t < cut {
            continue;
        }
        let norm = traj.norm(i);
        if norm > 1e-300 {
            any_signal = true;
        }
        let l = norm.max(1e-300).ln();
        n += 1;
        sum_t += t;
        sum_l += l;
        sum_tt += t * t;
        sum_tl += t * l;
    }
    if !any_signal || n < 2 {
        return Err(SimError::Degenerate);
    }
    let n = n as f64;
    let rate = (n * sum_tl - sum_t * sum_l) / (n * sum_tt - sum_t * sum_t);
    let verdict_hint = if (rate * t_last).abs() < 2.0 {
        DecayHint::Inconclusive
    } else if rate < 0.0 {
        DecayHint::Decaying
    } else {
        DecayHint::Growing
    };
    Ok(DecayEstimate { rate, verdict_hint })
}

/// CSV export: header `t,x,y`, one row per sample, 17-significant-digit
/// floats (round-trip exact for f64).
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    writeln!(out, "t,x,y")?;
    for i in 0..traj.len() {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e}",
            traj.times[i], traj.states[i][0], traj.states[i][1]
        )?;
    }
    Ok(())
}
