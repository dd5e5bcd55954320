//! Closed-form stability decision and τ-window enumeration.
//!
//! For `bc >= 0` the characteristic function splits into two real scalar
//! factors `lambda + alpha e^{-lambda tau} + (a ± sqrt(bc))` and the classic
//! scalar delay criterion applies to each. For `bc < 0` the factor acquires
//! an imaginary shift `i d`, its roots cross the imaginary axis at the two
//! frequencies `omega_{1,2} = -d ∓ sqrt(D)`, and stability holds exactly on
//! a finite-or-infinite union of open delay intervals with endpoints
//! `r_{1.n}`, `r_{2.n}` computed below.

use crate::model::{
    Coefficients, DerivedQuantities, Interval, Stability, SystemParams, TauWindows, Verdict,
    EPS_EQ,
};
use std::f64::consts::PI;
use thiserror::Error;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum CriterionError {
    /// `bc < 0` with `alpha^2 = a^2`: the criterion makes no claim here.
    #[error("excluded by hypothesis: bc < 0 with alpha^2 = a^2")]
    ExcludedByHypothesis,
    /// `sqrt(D) = d` makes `omega2 = 0`; the `r_2` family does not exist.
    #[error("undefined at resonance: sqrt(D) = d, so omega2 = 0")]
    UndefinedAtResonance,
    #[error("switch times require bc < 0, D >= 0 and alpha != 0")]
    SwitchTimesUnavailable,
}

/// Largest delay for which the scalar equation `lambda + p + q e^{-lambda
/// tau} = 0` keeps all roots in the open left half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HayesThreshold {
    /// Stable for every positive delay.
    AllTau,
    /// Stable exactly for `tau` strictly below the bound.
    UpTo(f64),
    /// Unstable already at `tau -> 0`.
    Never,
}

/// Delay-stability threshold of `lambda + p + q e^{-lambda tau}`.
///
/// `AllTau` iff `-p < q <= p`; `UpTo(arccos(-p/q)/sqrt(q^2-p^2))` iff
/// `|p| < q`; `Never` otherwise (there is then a root with nonnegative real
/// part for every delay, starting from `lambda = -(p+q) >= 0` at `tau = 0`).
pub fn hayes_threshold(p: f64, q: f64) -> HayesThreshold {
    if -p < q && q <= p {
        HayesThreshold::AllTau
    } else if p.abs() < q {
        HayesThreshold::UpTo((-p / q).acos() / (q * q - p * p).sqrt())
    } else {
        HayesThreshold::Never
    }
}

/// True iff every root of `lambda + p + q e^{-lambda tau}` has negative
/// real part at this delay.
pub fn hayes_stable(p: f64, q: f64, tau: f64) -> bool {
    match hayes_threshold(p, q) {
        HayesThreshold::AllTau => true,
        HayesThreshold::UpTo(t) => tau < t,
        HayesThreshold::Never => false,
    }
}

/// n-th positive delay at which a root of the shifted factor sits at
/// `i omega`: solves `cos(omega tau) = E`, `sin(omega tau) = (omega+d)/alpha`
/// for the n-th smallest positive `tau`.
fn crossing_delay(omega: f64, sin_sign: f64, e: f64, n: u32) -> f64 {
    let acos_e = e.clamp(-1.0, 1.0).acos();
    let theta = if sin_sign >= 0.0 { acos_e } else { -acos_e };
    if omega < 0.0 {
        // Normalize the angle into (-2*pi, 0] so tau_0 is the first hit.
        let theta = if theta > 0.0 { theta - TWO_PI } else { theta };
        (theta - TWO_PI * f64::from(n)) / omega
    } else {
        let theta = if theta < 0.0 { theta + TWO_PI } else { theta };
        (theta + TWO_PI * f64::from(n)) / omega
    }
}

fn require_crossing_data(
    dq: &DerivedQuantities,
    alpha_sign: f64,
) -> Result<(f64, f64, f64), CriterionError> {
    match (dq.d, dq.sqrt_disc, dq.crossing_cos) {
        (Some(d), Some(s), Some(e)) if alpha_sign != 0.0 && alpha_sign.is_finite() => {
            Ok((d, s, e))
        }
        _ => Err(CriterionError::SwitchTimesUnavailable),
    }
}

/// n-th delay at which roots cross the imaginary axis at `omega1` (the
/// destabilizing family). Requires `bc < 0`, `D >= 0`, `alpha != 0`; only
/// the sign of `alpha_sign` is consulted.
pub fn switch_time_r1(
    dq: &DerivedQuantities,
    alpha_sign: f64,
    n: u32,
) -> Result<f64, CriterionError> {
    let (_, _, e) = require_crossing_data(dq, alpha_sign)?;
    let omega1 = dq.omega1.expect("omega1 exists whenever sqrtD does");
    // sin(omega1 tau) = (omega1 + d)/alpha = -sqrt(D)/alpha.
    Ok(crossing_delay(omega1, -alpha_sign.signum(), e, n))
}

/// n-th delay for the `omega2` crossing family (stabilizing when
/// `sqrt(D) < d`). Additionally rejects the resonance `sqrt(D) = d`,
/// where `omega2 = 0` and no such delay exists.
pub fn switch_time_r2(
    dq: &DerivedQuantities,
    alpha_sign: f64,
    n: u32,
) -> Result<f64, CriterionError> {
    let (d, s, e) = require_crossing_data(dq, alpha_sign)?;
    if (d - s).abs() < EPS_EQ {
        return Err(CriterionError::UndefinedAtResonance);
    }
    let omega2 = dq.omega2.expect("omega2 exists whenever sqrtD does");
    // sin(omega2 tau) = (omega2 + d)/alpha = +sqrt(D)/alpha.
    Ok(crossing_delay(omega2, alpha_sign.signum(), e, n))
}

/// Stability windows together with the label of the deciding branch.
pub fn classify(coeffs: &Coefficients) -> Result<(TauWindows, String), CriterionError> {
    let Coefficients { a, alpha, .. } = *coeffs;
    let bc = coeffs.bc();

    if alpha.abs() < EPS_EQ {
        // No delayed term: the spectrum is {-a ± sqrt(bc)}, independent of
        // tau.
        let stable = if bc >= -EPS_EQ {
            -a + bc.max(0.0).sqrt() < 0.0
        } else {
            a > 0.0
        };
        let w = if stable {
            TauWindows::all_tau()
        } else {
            TauWindows::empty()
        };
        return Ok((w, "alpha-zero".to_string()));
    }

    if bc >= -EPS_EQ {
        let beta = bc.max(0.0).sqrt();
        let windows = match (hayes_threshold(a + beta, alpha), hayes_threshold(a - beta, alpha)) {
            (HayesThreshold::Never, _) | (_, HayesThreshold::Never) => {
                return Ok((TauWindows::empty(), "i-never".to_string()));
            }
            (HayesThreshold::AllTau, HayesThreshold::AllTau) => {
                return Ok((TauWindows::all_tau(), "i-first".to_string()));
            }
            (HayesThreshold::UpTo(t), HayesThreshold::AllTau)
            | (HayesThreshold::AllTau, HayesThreshold::UpTo(t)) => t,
            (HayesThreshold::UpTo(t1), HayesThreshold::UpTo(t2)) => t1.min(t2),
        };
        return Ok((
            TauWindows::from_intervals(vec![Interval::bounded(0.0, windows)]),
            "i-tau-bound".to_string(),
        ));
    }

    // bc < 0 from here on.
    let disc = alpha * alpha - a * a;
    if disc.abs() < EPS_EQ {
        return Err(CriterionError::ExcludedByHypothesis);
    }
    if disc < 0.0 {
        // |alpha| < |a|: the delayed term is too weak to move roots across
        // the axis, so the tau = 0 configuration decides everything.
        let w = if a + alpha > 0.0 {
            TauWindows::all_tau()
        } else {
            TauWindows::empty()
        };
        return Ok((w, "ii-2".to_string()));
    }

    let dq = coeffs.derived();
    let d = dq.d.expect("bc < 0");
    let s = dq.sqrt_disc.expect("D > 0");
    let resonance = (d - s).abs() < EPS_EQ;
    let stable_at_zero = a + alpha > 0.0;
    let r1 = |n: u32| switch_time_r1(&dq, alpha, n).expect("preconditions hold");
    let r2 = |n: u32| switch_time_r2(&dq, alpha, n).expect("preconditions hold");

    if s > d || resonance {
        // omega2 >= 0: every crossing after the first r1 keeps pushing
        // roots rightward, so at most the leading window survives.
        if stable_at_zero {
            let label = if resonance { "ii-1/I-2" } else { "ii-1/I-1" };
            Ok((
                TauWindows::from_intervals(vec![Interval::bounded(0.0, r1(0))]),
                label.to_string(),
            ))
        } else {
            Ok((TauWindows::empty(), "ii-1/II-1".to_string()))
        }
    } else if stable_at_zero {
        // sqrt(D) < d: r2 crossings move roots back left, producing k+1
        // windows before the families merge.
        let k = dq.k.expect("D > 0");
        let mut candidates = vec![Interval::bounded(0.0, r1(0))];
        for n in 1..=k {
            candidates.push(Interval::bounded(r2(n as u32 - 1), r1(n as u32)));
        }
        let label = if k >= 1 { "ii-1/I-3-b" } else { "ii-1/I-3-a" };
        Ok((TauWindows::from_intervals(candidates), label.to_string()))
    } else {
        // Unstable at tau = 0; delays inside (r2.n, r1.n) stabilize while
        // n <= l. Negative l means the gap closes before the first window
        // opens.
        let l = dq.l.expect("D > 0");
        let mut candidates = Vec::new();
        for n in 0..=l.max(-1) {
            candidates.push(Interval::bounded(r2(n as u32), r1(n as u32)));
        }
        Ok((TauWindows::from_intervals(candidates), "ii-1/II-2".to_string()))
    }
}

/// The exact set of delays for which the zero solution is asymptotically
/// stable, as sorted disjoint open intervals.
pub fn stability_windows(coeffs: &Coefficients) -> Result<TauWindows, CriterionError> {
    classify(coeffs).map(|(w, _)| w)
}

/// Closed-form stability decision at a specific delay.
pub fn is_asymptotically_stable(params: &SystemParams) -> Verdict {
    let coeffs = params.coefficients();
    let (windows, branch) = match classify(&coeffs) {
        Ok(pair) => pair,
        Err(_) => {
            return Verdict {
                status: Stability::ExcludedByHypothesis,
                branch: "hypothesis".to_string(),
                witness: Some(format!(
                    "bc = {} < 0 with alpha^2 = a^2 = {}: outside the criterion's hypotheses",
                    coeffs.bc(),
                    params.a * params.a
                )),
            };
        }
    };

    if windows.boundary_distance(params.tau) < EPS_EQ {
        // A purely imaginary characteristic root exists at the endpoint.
        return Verdict {
            status: Stability::Unstable,
            branch,
            witness: Some("boundary: non-asymptotic".to_string()),
        };
    }

    if let Some(iv) = windows.intervals.iter().find(|iv| iv.contains(params.tau)) {
        let hi = iv
            .hi
            .map_or_else(|| "inf".to_string(), |h| format!("{h}"));
        return Verdict {
            status: Stability::Stable,
            branch,
            witness: Some(format!(
                "tau = {} lies in stability window ({}, {})",
                params.tau, iv.lo, hi
            )),
        };
    }

    let witness = if windows.intervals.is_empty() {
        "no positive delay is stabilizing for these coefficients".to_string()
    } else {
        let mut nearest = f64::NAN;
        let mut best = f64::INFINITY;
        for iv in &windows.intervals {
            for endpoint in [Some(iv.lo), iv.hi].into_iter().flatten() {
                let dist = (params.tau - endpoint).abs();
                if dist < best {
                    best = dist;
                    nearest = endpoint;
                }
            }
        }
        format!(
            "tau = {} outside every stability window; nearest boundary at tau = {}",
            params.tau, nearest
        )
    };
    Verdict {
        status: Stability::Unstable,
        branch,
        witness: Some(witness),
    }
}
