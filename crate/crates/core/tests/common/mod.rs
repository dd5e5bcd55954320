//! Shared helpers for the integration test suites.
#![allow(dead_code)] // each test target uses a different subset

use stabswitch_core::{hayes_threshold, Coefficients, HayesThreshold, Interval, TauWindows};
use std::f64::consts::{FRAC_PI_2, PI};

pub fn fixture_switching() -> Coefficients {
    Coefficients::new(0.9, 1.0, 2.0, -2.0).unwrap()
}

pub fn fixture_delay_stabilized() -> Coefficients {
    Coefficients::new(0.9, -1.0, 1.0, -1.0).unwrap()
}

pub fn fixture_no_window() -> Coefficients {
    Coefficients::new(1.0, -2.0, 2.0, -2.0).unwrap()
}

pub fn fixture_excluded() -> Coefficients {
    Coefficients::new(1.0, 1.0, 1.0, -1.0).unwrap()
}

/// True when every branch-selector quantity of the closed-form criterion
/// is at least `margin` away from its decision boundary at these
/// parameters, and `tau` is at least `margin` from every finite window
/// endpoint. Randomized oracle-agreement tests sample under this guard so
/// that double-precision noise cannot flip a branch.
pub fn admissible(coeffs: &Coefficients, tau: f64, margin: f64) -> bool {
    let Coefficients { a, alpha, .. } = *coeffs;
    let bc = coeffs.bc();
    if bc.abs() < margin {
        return false;
    }

    if bc > 0.0 {
        let beta = bc.sqrt();
        for p in [a + beta, a - beta] {
            // Selectors of the scalar criterion: p + q and q - p.
            if (p + alpha).abs() < margin || (alpha - p).abs() < margin {
                return false;
            }
            if let HayesThreshold::UpTo(t) = hayes_threshold(p, alpha) {
                if (tau - t).abs() < margin {
                    return false;
                }
            }
        }
        return true;
    }

    // bc < 0.
    let disc = alpha * alpha - a * a;
    if disc.abs() < margin || (a + alpha).abs() < margin {
        return false;
    }
    if disc > 0.0 {
        let d = (-bc).sqrt();
        let s = disc.sqrt();
        if (d - s).abs() < margin {
            return false;
        }
        // Window-count indices come from floors; keep their arguments away
        // from integers so the index is unambiguous.
        let e = -a / alpha;
        let acos_e = e.clamp(-1.0, 1.0).acos();
        for x in [
            d * acos_e / (2.0 * s * PI),
            ((d - s) * PI - d * acos_e) / (2.0 * s * PI),
        ] {
            let frac = x - x.floor();
            if frac < 1e-9 || frac > 1.0 - 1e-9 {
                return false;
            }
        }
    }
    match stabswitch_core::stability_windows(coeffs) {
        Ok(w) => w.boundary_distance(tau) >= margin,
        Err(_) => false,
    }
}

/// Stability windows for `a = 0` computed from scratch with the crossing
/// cosine fixed at 0 and `arccos(0) = pi/2`, mirroring the specialized
/// form of the criterion. `None` when the case analysis does not apply
/// (`alpha = 0` or the excluded set).
pub fn specialized_zero_a_windows(alpha: f64, bc: f64) -> Option<TauWindows> {
    assert!(bc < 0.0);
    if alpha * alpha < 1e-12 {
        // alpha-zero baseline or the excluded set; no crossing analysis.
        return None;
    }
    let d = (-bc).sqrt();
    let s = alpha.abs(); // sqrt(D) with a = 0
    let omega1 = -d - s;
    let omega2 = -d + s;
    let two_pi = 2.0 * PI;
    // Crossing angles with E = 0: theta = ±pi/2 by the sign of
    // sin(omega tau) = (omega + d)/alpha.
    let r1 = |n: u32| -> f64 {
        let theta = if alpha > 0.0 {
            -FRAC_PI_2
        } else {
            FRAC_PI_2 - two_pi
        };
        (theta - two_pi * f64::from(n)) / omega1
    };
    let r2 = |n: u32| -> f64 {
        if omega2 < 0.0 {
            let theta = if alpha > 0.0 {
                FRAC_PI_2 - two_pi
            } else {
                -FRAC_PI_2
            };
            (theta - two_pi * f64::from(n)) / omega2
        } else {
            let theta = if alpha > 0.0 {
                FRAC_PI_2
            } else {
                two_pi - FRAC_PI_2
            };
            (theta + two_pi * f64::from(n)) / omega2
        }
    };

    let windows = if alpha > 0.0 {
        // Stable at tau = 0.
        if s >= d - 1e-12 {
            TauWindows::from_intervals(vec![Interval::bounded(0.0, r1(0))])
        } else {
            let k = (d * FRAC_PI_2 / (2.0 * s * PI)).floor() as u32;
            let mut iv = vec![Interval::bounded(0.0, r1(0))];
            for n in 1..=k {
                iv.push(Interval::bounded(r2(n - 1), r1(n)));
            }
            TauWindows::from_intervals(iv)
        }
    } else {
        // Unstable at tau = 0: only the delay-stabilized windows remain.
        if s >= d - 1e-12 {
            TauWindows::empty()
        } else {
            let l = (((d - s) * PI - d * FRAC_PI_2) / (2.0 * s * PI)).floor() as i64;
            let mut iv = Vec::new();
            for n in 0..=l.max(-1) {
                iv.push(Interval::bounded(r2(n as u32), r1(n as u32)));
            }
            TauWindows::from_intervals(iv)
        }
    };
    Some(windows)
}

/// Absolute-difference comparison of window lists, endpoint by endpoint.
pub fn windows_close(a: &TauWindows, b: &TauWindows, tol: f64) -> bool {
    if a.intervals.len() != b.intervals.len() {
        return false;
    }
    a.intervals.iter().zip(&b.intervals).all(|(x, y)| {
        if (x.lo - y.lo).abs() > tol {
            return false;
        }
        match (x.hi, y.hi) {
            (None, None) => true,
            (Some(p), Some(q)) => (p - q).abs() <= tol,
            _ => false,
        }
    })
}
