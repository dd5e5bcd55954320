//! Shared parameter and result types.
//!
//! The system under study is the planar linear delay system
//!
//! ```text
//! x'(t) + a x(t) + alpha x(t - tau) + b y(t) = 0
//! y'(t) + a y(t) + c x(t) + alpha y(t - tau) = 0
//! ```
//!
//! Its characteristic function `(lambda + alpha e^{-lambda tau} + a)^2 - bc`
//! factors into two scalar quasi-polynomials, and every quantity the
//! stability criterion needs is a closed-form function of `(a, alpha, bc)`.
//! This module holds those value types; the decision logic lives in
//! [`crate::criterion`], the numerical oracles in [`crate::spectrum`] and
//! [`crate::sim`].

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Absolute tolerance for the criterion's branch selectors (the tests
/// `bc = 0`, `D = 0`, `alpha = 0`, `sqrt(D) = d`).
///
/// These selectors split an exact theorem into cases. Exactly representable
/// inputs must land in the exact branch, so the tolerance sits at round-off
/// scale rather than at any modelling scale.
pub const EPS_EQ: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parameter {name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("delay tau must be positive, got {0}")]
    NonPositiveDelay(f64),
}

/// The four coefficients of the system, without the delay.
///
/// Stability windows are a property of the coefficients alone; the delay
/// `tau` then selects a point inside or outside them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
    pub c: f64,
}

impl Coefficients {
    pub fn new(a: f64, alpha: f64, b: f64, c: f64) -> Result<Self, ModelError> {
        for (name, value) in [("a", a), ("alpha", alpha), ("b", b), ("c", c)] {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { name, value });
            }
        }
        Ok(Self { a, alpha, b, c })
    }

    /// The coupling product `b*c`; the characteristic function depends on
    /// `b` and `c` only through it.
    pub fn bc(&self) -> f64 {
        self.b * self.c
    }

    pub fn with_tau(&self, tau: f64) -> Result<SystemParams, ModelError> {
        SystemParams::new(self.a, self.alpha, self.b, self.c, tau)
    }

    /// Compute every derived quantity whose defining condition holds.
    pub fn derived(&self) -> DerivedQuantities {
        let bc = self.bc();
        let mut dq = DerivedQuantities {
            bc,
            beta: None,
            d: None,
            disc: None,
            sqrt_disc: None,
            crossing_cos: None,
            omega1: None,
            omega2: None,
            k: None,
            l: None,
        };
        if bc >= -EPS_EQ {
            dq.beta = Some(bc.max(0.0).sqrt());
            return dq;
        }
        let d = (-bc).sqrt();
        dq.d = Some(d);
        if self.alpha.abs() < EPS_EQ {
            // Everything below involves E = -a/alpha.
            return dq;
        }
        let disc = self.alpha * self.alpha - self.a * self.a;
        dq.disc = Some(disc);
        let e = -self.a / self.alpha;
        dq.crossing_cos = Some(e);
        // Raw values are stored so populated fields satisfy their formulas
        // exactly; the tolerance only decides which fields exist.
        let disc_snapped = if disc.abs() < EPS_EQ { 0.0 } else { disc };
        if disc_snapped < 0.0 {
            return dq;
        }
        let s = disc.max(0.0).sqrt();
        dq.sqrt_disc = Some(s);
        dq.omega1 = Some(-d - s);
        dq.omega2 = Some(-d + s);
        if disc_snapped > 0.0 {
            let acos_e = e.clamp(-1.0, 1.0).acos();
            dq.k = Some(floor_snapped(d * acos_e / (2.0 * s * PI)));
            dq.l = Some(floor_snapped(((d - s) * PI - d * acos_e) / (2.0 * s * PI)));
        }
        dq
    }
}

/// Floor with a guard: arguments within `EPS_EQ` of an integer snap to that
/// integer first. The window-count case split is boundary-sensitive.
fn floor_snapped(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() < EPS_EQ {
        r as i64
    } else {
        x.floor() as i64
    }
}

/// Full parameter set `(a, alpha, b, c, tau)` of the delay system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
    pub c: f64,
    /// Delay, strictly positive. The spectral oracle additionally accepts
    /// `tau = 0` (constructed directly, bypassing `new`) as a limit check.
    pub tau: f64,
}

impl SystemParams {
    pub fn new(a: f64, alpha: f64, b: f64, c: f64, tau: f64) -> Result<Self, ModelError> {
        Coefficients::new(a, alpha, b, c)?;
        if !tau.is_finite() {
            return Err(ModelError::NonFinite {
                name: "tau",
                value: tau,
            });
        }
        if tau <= 0.0 {
            return Err(ModelError::NonPositiveDelay(tau));
        }
        Ok(Self { a, alpha, b, c, tau })
    }

    pub fn coefficients(&self) -> Coefficients {
        Coefficients {
            a: self.a,
            alpha: self.alpha,
            b: self.b,
            c: self.c,
        }
    }
}

/// Quantities the criterion branches on, derived from the coefficients.
///
/// A field is `None` exactly when its defining condition fails (it is never
/// NaN): `beta` needs `bc >= 0`; `d` needs `bc < 0`; the remaining symbols
/// describe imaginary-axis crossings and need `bc < 0` and `alpha != 0`,
/// with `sqrtD`/`omega1`/`omega2` additionally requiring `D >= 0` and
/// `k`/`l` requiring `D > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedQuantities {
    pub bc: f64,
    /// `sqrt(bc)` for `bc >= 0`; both characteristic factors are then real
    /// shifts of the same scalar quasi-polynomial.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// `sqrt(-bc)` for `bc < 0`; the imaginary shift of the factor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    /// `D = alpha^2 - a^2`. Crossings exist only when it is nonnegative.
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    pub disc: Option<f64>,
    #[serde(rename = "sqrtD", skip_serializing_if = "Option::is_none")]
    pub sqrt_disc: Option<f64>,
    /// `E = -a/alpha`, the cosine of the crossing angle `omega*tau`.
    #[serde(rename = "E", skip_serializing_if = "Option::is_none")]
    pub crossing_cos: Option<f64>,
    /// Lower crossing frequency `-d - sqrt(D)`; always negative.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega1: Option<f64>,
    /// Upper crossing frequency `-d + sqrt(D)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega2: Option<f64>,
    /// Index of the last stability window when `a + alpha > 0` and
    /// `sqrt(D) < d`: `floor(d*acos(E) / (2 sqrt(D) pi))`, always >= 0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    /// Index of the last stability window when `a + alpha < 0`; negative
    /// means no window exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<i64>,
}

/// Convenience wrapper over [`Coefficients::derived`].
pub fn derive(params: &SystemParams) -> DerivedQuantities {
    params.coefficients().derived()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    /// `bc < 0` with `alpha^2 = a^2`: the crossing analysis degenerates and
    /// the criterion makes no claim.
    ExcludedByHypothesis,
}

/// Outcome of the closed-form decision, with the branch that fired and a
/// human-readable witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Stability,
    /// Label of the deciding case, e.g. "alpha-zero", "i-first",
    /// "i-tau-bound", "ii-2", "ii-1/I-3-b", "hypothesis".
    pub branch: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Open interval of delays; `hi = None` means unbounded above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
}

impl Interval {
    pub fn bounded(lo: f64, hi: f64) -> Self {
        Self { lo, hi: Some(hi) }
    }

    pub fn unbounded(lo: f64) -> Self {
        Self { lo, hi: None }
    }

    /// Open-interval membership.
    pub fn contains(&self, tau: f64) -> bool {
        tau > self.lo && self.hi.map_or(true, |h| tau < h)
    }
}

/// Sorted disjoint open intervals of `tau` on which the zero solution is
/// asymptotically stable.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TauWindows {
    pub intervals: Vec<Interval>,
    /// Notes attached when a degenerate (lo >= hi) window was dropped.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub diagnostics: Vec<String>,
}

impl TauWindows {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The single window `(0, +inf)`.
    pub fn all_tau() -> Self {
        Self {
            intervals: vec![Interval::unbounded(0.0)],
            diagnostics: Vec::new(),
        }
    }

    /// Build from candidate intervals, dropping any with `lo >= hi` (these
    /// only arise from floating-point degeneracy at branch boundaries).
    pub fn from_intervals(candidates: Vec<Interval>) -> Self {
        let mut intervals = Vec::with_capacity(candidates.len());
        let mut diagnostics = Vec::new();
        for iv in candidates {
            match iv.hi {
                Some(hi) if iv.lo >= hi => diagnostics.push(format!(
                    "dropped degenerate window ({}, {})",
                    iv.lo, hi
                )),
                _ => intervals.push(iv),
            }
        }
        debug_assert!(intervals.windows(2).all(|w| match w[0].hi {
            Some(h) => h <= w[1].lo,
            None => false,
        }));
        Self {
            intervals,
            diagnostics,
        }
    }

    pub fn contains(&self, tau: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(tau))
    }

    /// Distance from `tau` to the nearest positive finite endpoint
    /// (infinite when there is none).
    pub fn boundary_distance(&self, tau: f64) -> f64 {
        let mut best = f64::INFINITY;
        for iv in &self.intervals {
            if iv.lo > 0.0 {
                best = best.min((tau - iv.lo).abs());
            }
            if let Some(hi) = iv.hi {
                best = best.min((tau - hi).abs());
            }
        }
        best
    }

    /// Clip to `(0, tau_max]` for display. The flag reports whether any
    /// window actually extended past `tau_max`.
    pub fn truncated(&self, tau_max: f64) -> (TauWindows, bool) {
        let mut out = Vec::new();
        let mut clipped = false;
        for iv in &self.intervals {
            if iv.lo >= tau_max {
                clipped = true;
                continue;
            }
            match iv.hi {
                Some(hi) if hi <= tau_max => out.push(*iv),
                _ => {
                    clipped = true;
                    out.push(Interval::bounded(iv.lo, tau_max));
                }
            }
        }
        (
            TauWindows {
                intervals: out,
                diagnostics: self.diagnostics.clone(),
            },
            clipped,
        )
    }
}

/// Discretized solution of the system, history segment included.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// Sample times, uniformly spaced by `step`, starting at `-tau`.
    pub times: Vec<f64>,
    /// Matching `(x, y)` samples.
    pub states: Vec<[f64; 2]>,
    /// Integration step actually used (the requested step rounded down so
    /// that it divides `tau`).
    pub step: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    /// Euclidean norm of the state at sample `i`.
    pub fn norm(&self, i: usize) -> f64 {
        let [x, y] = self.states[i];
        x.hypot(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derive_switching_fixture() {
        // a=0.9, alpha=1, b=2, c=-2: the two-window switching fixture.
        let c = Coefficients::new(0.9, 1.0, 2.0, -2.0).unwrap();
        let dq = c.derived();
        assert_eq!(dq.bc, -4.0);
        assert!(dq.beta.is_none());
        assert_relative_eq!(dq.d.unwrap(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(dq.disc.unwrap(), 0.19, epsilon = 1e-12);
        assert_relative_eq!(dq.crossing_cos.unwrap(), -0.9, max_relative = 1e-15);
        assert_relative_eq!(dq.sqrt_disc.unwrap(), 0.435_889_894_354_067_3, epsilon = 1e-12);
        assert_relative_eq!(dq.omega1.unwrap(), -2.435_889_894_354_067, epsilon = 1e-12);
        assert_relative_eq!(dq.omega2.unwrap(), -1.564_110_105_645_932_8, epsilon = 1e-12);
        assert_eq!(dq.k, Some(1));
        assert_eq!(dq.l, Some(-1));
    }

    #[test]
    fn derive_resonance_fixture() {
        // a=0, alpha=1, b=1, c=-1: sqrt(D) = d, so omega2 = 0.
        let dq = Coefficients::new(0.0, 1.0, 1.0, -1.0).unwrap().derived();
        assert_eq!(dq.d, Some(1.0));
        assert_eq!(dq.disc, Some(1.0));
        assert_eq!(dq.sqrt_disc, Some(1.0));
        assert_eq!(dq.crossing_cos, Some(0.0));
        assert_eq!(dq.omega1, Some(-2.0));
        assert_eq!(dq.omega2, Some(0.0));
        assert_eq!(dq.k, Some(0));
        assert_eq!(dq.l, Some(-1));
    }

    #[test]
    fn derive_alpha_zero_keeps_only_bc_family() {
        let dq = Coefficients::new(1.0, 0.0, 4.0, 1.0).unwrap().derived();
        assert_eq!(dq.bc, 4.0);
        assert_eq!(dq.beta, Some(2.0));
        assert!(dq.d.is_none());
        assert!(dq.disc.is_none());
        assert!(dq.crossing_cos.is_none());
        assert!(dq.omega1.is_none());
        assert!(dq.k.is_none());

        // bc < 0 with alpha = 0: d exists, crossing symbols do not.
        let dq = Coefficients::new(1.0, 0.0, 1.0, -4.0).unwrap().derived();
        assert_eq!(dq.d, Some(2.0));
        assert!(dq.disc.is_none());
        assert!(dq.omega2.is_none());
    }

    #[test]
    fn derive_bc_zero_populates_beta_zero() {
        let dq = Coefficients::new(1.0, 0.5, 0.0, 3.0).unwrap().derived();
        assert_eq!(dq.beta, Some(0.0));
        assert!(dq.d.is_none());
    }

    #[test]
    fn omega_product_identity() {
        // omega1 * omega2 = d^2 - D for any bc<0, alpha^2 > a^2.
        let dq = Coefficients::new(0.9, 1.0, 2.0, -2.0).unwrap().derived();
        let lhs = dq.omega1.unwrap() * dq.omega2.unwrap();
        let rhs = dq.d.unwrap().powi(2) - dq.disc.unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }

    #[test]
    fn derive_depends_on_bc_only() {
        let p = Coefficients::new(0.9, 1.0, 2.0, -2.0).unwrap().derived();
        let q = Coefficients::new(0.9, 1.0, -2.0, 2.0).unwrap().derived();
        let r = Coefficients::new(0.9, 1.0, -4.0, 1.0).unwrap().derived();
        assert_eq!(p, q);
        assert_eq!(p, r);
    }

    #[test]
    fn params_validation() {
        assert!(SystemParams::new(1.0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, 1.0, 1.0, -1.0).is_err());
        assert!(SystemParams::new(f64::NAN, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, 1.0, f64::INFINITY, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, 1.0, 1.0, 0.5).is_ok());
    }

    #[test]
    fn windows_membership_and_boundaries() {
        let w = TauWindows::from_intervals(vec![
            Interval::bounded(0.0, 1.1),
            Interval::bounded(2.3, 3.7),
        ]);
        assert!(w.contains(0.5));
        assert!(!w.contains(1.1));
        assert!(!w.contains(2.0));
        assert!(w.contains(3.0));
        assert!(!w.contains(4.0));
        assert!(w.boundary_distance(1.1) < 1e-15);
        assert!((w.boundary_distance(2.0) - 0.3).abs() < 1e-12);
        // lo = 0 is not a boundary: every positive tau below 1.1 is interior.
        assert!(w.boundary_distance(1e-9) > 1.0);
    }

    #[test]
    fn windows_drop_degenerate() {
        let w = TauWindows::from_intervals(vec![
            Interval::bounded(0.0, 1.0),
            Interval::bounded(2.0, 2.0),
        ]);
        assert_eq!(w.intervals.len(), 1);
        assert_eq!(w.diagnostics.len(), 1);
    }

    #[test]
    fn windows_truncation() {
        let w = TauWindows {
            intervals: vec![Interval::bounded(0.0, 1.0), Interval::unbounded(2.0)],
            diagnostics: Vec::new(),
        };
        let (t, clipped) = w.truncated(3.0);
        assert!(clipped);
        assert_eq!(t.intervals, vec![
            Interval::bounded(0.0, 1.0),
            Interval::bounded(2.0, 3.0)
        ]);
        let (t, clipped) = w.truncated(0.5);
        assert!(clipped);
        assert_eq!(t.intervals, vec![Interval::bounded(0.0, 0.5)]);
    }

    #[test]
    fn json_field_names_and_omission() {
        let dq = Coefficients::new(0.9, 1.0, 2.0, -2.0).unwrap().derived();
        let v: serde_json::Value = serde_json::to_value(&dq).unwrap();
        let obj = v.as_object().unwrap();
        for key in ["bc", "d", "D", "sqrtD", "E", "omega1", "omega2", "k", "l"] {
            assert!(obj.contains_key(key), "missing {key}");
        }
        assert!(!obj.contains_key("beta"));

        let dq = Coefficients::new(1.0, 0.0, 4.0, 1.0).unwrap().derived();
        let v: serde_json::Value = serde_json::to_value(&dq).unwrap();
        let obj = v.as_object().unwrap();
        assert_eq!(obj.len(), 2); // bc and beta only
        assert!(obj.contains_key("beta"));

        let verdict = Verdict {
            status: Stability::ExcludedByHypothesis,
            branch: "hypothesis".into(),
            witness: None,
        };
        let s = serde_json::to_string(&verdict).unwrap();
        assert!(s.contains("\"excluded_by_hypothesis\""));
        assert!(!s.contains("witness"));

        let w = TauWindows::all_tau();
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"intervals":[{"lo":0.0}]}"#);
    }

    #[test]
    fn floor_snapping() {
        assert_eq!(floor_snapped(1.9999999999999999), 2); // within 1e-12 of 2
        assert_eq!(floor_snapped(2.0 - 1e-9), 1);
        assert_eq!(floor_snapped(-0.25), -1);
        assert_eq!(floor_snapped(-1e-15), 0);
        assert_eq!(floor_snapped(3.0), 3);
    }
}
