//! Numerical spectral oracle, independent of the closed-form criterion.
//!
//! Counts right-half-plane characteristic roots with the argument principle
//! over a D-shaped contour, locates imaginary-axis crossings, classifies
//! crossing directions, and Newton-refines individual roots. The criterion
//! module never calls into this one; tests compare the two sides.
//!
//! Every characteristic factor handled here has the shape
//! `f(lambda) = lambda + q e^{-lambda tau} + p` with real `q` and complex
//! `p`: for `bc >= 0` the full characteristic function is the product of
//! two such factors with `p = a ± sqrt(bc)`, and for `bc < 0` it is
//! `F(lambda) conj(F(conj(lambda)))` with `F` the factor `p = a + i d`,
//! `d = sqrt(-bc)`. Counting roots of `F` alone gives the number of
//! right-half-plane root *pairs* of the full function.

use crate::criterion::{switch_time_r1, switch_time_r2};
use crate::model::{Coefficients, SystemParams, EPS_EQ};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

const TWO_PI: f64 = 2.0 * PI;
/// Contour evaluations below this magnitude abort the winding computation.
const MIN_CONTOUR_ABS: f64 = 1e-6;
const NEWTON_MAX_ITERS: usize = 50;
const NEWTON_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum SpectrumError {
    #[error("char_F requires bc < 0, got bc = {0}")]
    RequiresNegativeBc(f64),
    #[error("root near contour: |f| = {min_abs:.3e} at contour parameter {at:.6}")]
    RootNearContour { min_abs: f64, at: f64 },
    #[error("insufficient samples: a phase step of {step:.3} rad could not be resolved")]
    InsufficientSamples { step: f64 },
    #[error("contour radius {radius} below the root bound {required}")]
    ContourTooSmall { radius: f64, required: f64 },
    #[error("winding number {value} is not close to an integer")]
    WindingNotIntegral { value: f64 },
    #[error("no purely imaginary roots: D = {0} < 0")]
    NoImaginaryRoots(f64),
    #[error("crossing enumeration requires bc < 0 and alpha != 0")]
    CrossingDataUnavailable,
    #[error("({omega}, {tau}) is not a crossing: |F(i omega)| = {f_abs:.3e}")]
    NotACrossing { omega: f64, tau: f64, f_abs: f64 },
    #[error("Newton iteration did not reach |f| <= 1e-12 in {0} steps")]
    NewtonDiverged(usize),
}

/// One scalar quasi-polynomial factor `lambda + q e^{-lambda tau} + p`.
#[derive(Debug, Clone, Copy)]
struct Factor {
    p: Complex64,
    q: f64,
    tau: f64,
}

impl Factor {
    fn eval(&self, z: Complex64) -> Complex64 {
        z + self.q * (-z * self.tau).exp() + self.p
    }

    fn deriv(&self, z: Complex64) -> Complex64 {
        Complex64::new(1.0, 0.0) - self.q * self.tau * (-z * self.tau).exp()
    }

    /// On `Re z >= 0` every root satisfies `|z| <= |p| + |q|`.
    fn root_bound(&self) -> f64 {
        self.p.norm() + self.q.abs()
    }
}

/// The characteristic factors of the system at the given parameters: two
/// real-shifted factors for `bc >= 0`, the single complex-shifted `F` for
/// `bc < 0`.
fn factors(params: &SystemParams) -> Vec<Factor> {
    let bc = params.b * params.c;
    if bc < 0.0 {
        vec![Factor {
            p: Complex64::new(params.a, (-bc).sqrt()),
            q: params.alpha,
            tau: params.tau,
        }]
    } else {
        let beta = bc.sqrt();
        [params.a + beta, params.a - beta]
            .into_iter()
            .map(|p| Factor {
                p: Complex64::new(p, 0.0),
                q: params.alpha,
                tau: params.tau,
            })
            .collect()
    }
}

/// Full characteristic function `(lambda + alpha e^{-lambda tau} + a)^2 - bc`.
pub fn char_g(lambda: Complex64, params: &SystemParams) -> Complex64 {
    let w = lambda + params.alpha * (-lambda * params.tau).exp() + params.a;
    w * w - params.b * params.c
}

/// Shifted factor `F(lambda) = lambda + alpha e^{-lambda tau} + a + i d`
/// with `d = sqrt(-bc)`; only defined for `bc < 0`.
///
/// Satisfies `G(lambda) = F(lambda) * conj(F(conj(lambda)))`.
pub fn char_f(lambda: Complex64, params: &SystemParams) -> Result<Complex64, SpectrumError> {
    let bc = params.b * params.c;
    if bc >= 0.0 {
        return Err(SpectrumError::RequiresNegativeBc(bc));
    }
    Ok(Factor {
        p: Complex64::new(params.a, (-bc).sqrt()),
        q: params.alpha,
        tau: params.tau,
    }
    .eval(lambda))
}

/// D-shaped integration contour: right semicircular arc of the given
/// radius joined to a vertical segment at `Re = left_edge`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub radius: f64,
    pub left_edge: f64,
    pub samples: usize,
}

impl ContourSpec {
    /// Contour certified to enclose every right-half-plane root: radius
    /// `|a| + |alpha| + sqrt(|bc|) + 1`, edge on the imaginary axis.
    pub fn for_params(params: &SystemParams) -> Self {
        let shift = (params.b * params.c).abs().sqrt();
        ContourSpec {
            radius: params.a.abs() + params.alpha.abs() + shift + 1.0,
            left_edge: 0.0,
            samples: 2048,
        }
    }

    pub fn with_left_edge(self, left_edge: f64) -> Self {
        ContourSpec { left_edge, ..self }
    }

    /// Point at parameter `t in [0, 2]`: `[0, 1]` sweeps the arc
    /// counterclockwise from bottom to top, `[1, 2]` descends the vertical
    /// segment, closing the loop.
    pub fn point(&self, t: f64) -> Complex64 {
        let half_height = (self.radius * self.radius - self.left_edge * self.left_edge).sqrt();
        let theta_max = half_height.atan2(self.left_edge);
        if t <= 1.0 {
            Complex64::from_polar(self.radius, -theta_max + t * 2.0 * theta_max)
        } else {
            Complex64::new(self.left_edge, half_height * (1.0 - 2.0 * (t - 1.0)))
        }
    }
}

/// Winding number of `f` along the contour, by adaptive phase tracking:
/// segments are bisected until each phase increment is below pi/2.
fn winding_number<F>(f: &F, spec: &ContourSpec) -> Result<i64, SpectrumError>
where
    F: Fn(Complex64) -> Complex64,
{
    const MAX_DEPTH: u32 = 48;

    fn checked_eval<F>(f: &F, spec: &ContourSpec, t: f64) -> Result<Complex64, SpectrumError>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let v = f(spec.point(t));
        if v.norm() < MIN_CONTOUR_ABS {
            Err(SpectrumError::RootNearContour {
                min_abs: v.norm(),
                at: t,
            })
        } else {
            Ok(v)
        }
    }

    fn phase_between<F>(
        f: &F,
        spec: &ContourSpec,
        t0: f64,
        f0: Complex64,
        t1: f64,
        f1: Complex64,
        depth: u32,
    ) -> Result<f64, SpectrumError>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let step = (f1 / f0).arg();
        if step.abs() < FRAC_PI_2 {
            return Ok(step);
        }
        if depth >= MAX_DEPTH {
            return Err(SpectrumError::InsufficientSamples { step: step.abs() });
        }
        let tm = 0.5 * (t0 + t1);
        let fm = checked_eval(f, spec, tm)?;
        Ok(phase_between(f, spec, t0, f0, tm, fm, depth + 1)?
            + phase_between(f, spec, tm, fm, t1, f1, depth + 1)?)
    }

    let base = spec.samples.max(1000);
    let base = base + (base & 1);
    let mut total = 0.0_f64;
    let mut prev_t = 0.0;
    let mut prev_f = checked_eval(f, spec, 0.0)?;
    let first = prev_f;
    for i in 1..=base {
        let t = 2.0 * i as f64 / base as f64;
        let ft = if i == base {
            first // closed loop: reuse the exact starting value
        } else {
            checked_eval(f, spec, t)?
        };
        total += phase_between(f, spec, prev_t, prev_f, t, ft, 0)?;
        prev_t = t;
        prev_f = ft;
    }

    let turns = total / TWO_PI;
    if (turns - turns.round()).abs() > 0.25 {
        return Err(SpectrumError::WindingNotIntegral { value: turns });
    }
    Ok(turns.round() as i64)
}

fn count_factor(factor: &Factor, spec: &ContourSpec) -> Result<usize, SpectrumError> {
    let required = factor.root_bound() + 1.0;
    if spec.radius < required - 1e-9 {
        return Err(SpectrumError::ContourTooSmall {
            radius: spec.radius,
            required,
        });
    }
    let w = winding_number(&|z| factor.eval(z), spec)?;
    usize::try_from(w).map_err(|_| SpectrumError::WindingNotIntegral { value: w as f64 })
}

/// Number of roots (with multiplicity) strictly right of the contour's
/// vertical edge: roots of `F` for `bc < 0` (one per conjugate pair of the
/// full characteristic function), summed over both scalar factors for
/// `bc >= 0` (the full count).
pub fn count_rhp_roots(params: &SystemParams, spec: &ContourSpec) -> Result<usize, SpectrumError> {
    factors(params)
        .iter()
        .map(|fac| count_factor(fac, spec))
        .sum()
}

/// Left edges tried in order by [`count_rhp_roots_auto`] when a root sits
/// on or near the imaginary axis.
pub const LEFT_EDGE_LADDER: [f64; 5] = [0.0, 1e-6, 1e-5, 1e-4, 1e-3];

/// [`count_rhp_roots`] with the default contour and automatic retries: the
/// vertical edge moves right through [`LEFT_EDGE_LADDER`] until the contour
/// clears every root; roots the shifted edge would exclude are recovered by
/// Newton refinement along the axis and added back.
pub fn count_rhp_roots_auto(params: &SystemParams) -> Result<usize, SpectrumError> {
    let base = ContourSpec::for_params(params);
    let mut last = None;
    for sigma in LEFT_EDGE_LADDER {
        match count_rhp_roots(params, &base.with_left_edge(sigma)) {
            Ok(n) => {
                let missed = if sigma > 0.0 {
                    strip_roots(params, sigma, base.radius).len()
                } else {
                    0
                };
                return Ok(n + missed);
            }
            Err(e @ SpectrumError::RootNearContour { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("ladder is non-empty"))
}

/// Roots with real part strictly inside `(0, sigma)`: these are genuine
/// right-half-plane roots that a contour with `left_edge = sigma` excludes.
fn strip_roots(params: &SystemParams, sigma: f64, radius: f64) -> Vec<Complex64> {
    let mut found: Vec<Complex64> = Vec::new();
    for factor in factors(params) {
        // |f| dips along the imaginary axis once per vertical oscillation
        // of the exponential; sample finely enough to see every dip.
        let n = ((2.0 * radius * (params.tau + 1.0)).ceil() as usize).clamp(256, 8192);
        let abs_at = |i: usize| {
            let y = -radius + 2.0 * radius * i as f64 / n as f64;
            factor.eval(Complex64::new(0.0, y)).norm()
        };
        let mut prev2 = abs_at(0);
        let mut prev = abs_at(1);
        for i in 2..=n {
            let cur = abs_at(i);
            if prev <= prev2 && prev <= cur {
                let y = -radius + 2.0 * radius * (i - 1) as f64 / n as f64;
                if let Ok(root) = newton(&factor, Complex64::new(0.0, y)) {
                    let fresh = found
                        .iter()
                        .all(|r| (r - root).norm() > 1e-6 * (1.0 + root.norm()));
                    // Real parts below 1e-9 are indistinguishable from
                    // exact axis roots at Newton's tolerance; those are
                    // boundary roots, not right-half-plane roots.
                    if fresh && root.re > 1e-9 && root.re < sigma {
                        found.push(root);
                    }
                }
            }
            prev2 = prev;
            prev = cur;
        }
    }
    found
}

/// Right-half-plane root count of the scalar equation
/// `lambda + q e^{-lambda tau} + p = 0`, with the same automatic edge
/// retries as [`count_rhp_roots_auto`].
pub fn count_scalar_rhp_roots(p: f64, q: f64, tau: f64) -> Result<usize, SpectrumError> {
    let factor = Factor {
        p: Complex64::new(p, 0.0),
        q,
        tau,
    };
    let base = ContourSpec {
        radius: factor.root_bound() + 1.0,
        left_edge: 0.0,
        samples: 2048,
    };
    let mut last = None;
    for sigma in LEFT_EDGE_LADDER {
        match count_factor(&factor, &base.with_left_edge(sigma)) {
            Ok(n) => return Ok(n),
            Err(e @ SpectrumError::RootNearContour { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("ladder is non-empty"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingDirection {
    /// Roots move into the right half-plane as tau increases.
    LeftToRight,
    RightToLeft,
    /// `omega (omega + d) = 0`: the transversality formula vanishes and
    /// the motion is not determined at first order.
    Degenerate,
}

/// A purely imaginary characteristic root `i omega` occurring at delay
/// `tau`, with its crossing direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub omega: f64,
    pub tau: f64,
    pub direction: CrossingDirection,
}

fn direction_of(omega: f64, d: f64) -> CrossingDirection {
    let product = omega * (omega + d);
    if product.abs() < 1e-12 {
        CrossingDirection::Degenerate
    } else if product > 0.0 {
        CrossingDirection::LeftToRight
    } else {
        CrossingDirection::RightToLeft
    }
}

/// All imaginary-axis crossings with `tau <= tau_max`, sorted by delay.
/// Requires `bc < 0`, `alpha != 0` and `D >= 0`; when `sqrt(D) = d` the
/// `omega2` family is omitted (`omega2 = 0` admits no crossing delay).
pub fn imaginary_crossings(
    coeffs: &Coefficients,
    tau_max: f64,
) -> Result<Vec<Crossing>, SpectrumError> {
    let dq = coeffs.derived();
    let d = dq.d.ok_or(SpectrumError::CrossingDataUnavailable)?;
    if coeffs.alpha.abs() < EPS_EQ {
        return Err(SpectrumError::CrossingDataUnavailable);
    }
    if let Some(disc) = dq.disc {
        if dq.sqrt_disc.is_none() {
            return Err(SpectrumError::NoImaginaryRoots(disc));
        }
    }
    let s = dq.sqrt_disc.expect("checked above");
    let resonance = (d - s).abs() < EPS_EQ;

    let mut out = Vec::new();
    let mut push_family = |omega: f64, r2_family: bool| -> Result<(), SpectrumError> {
        for n in 0.. {
            let tau = if r2_family {
                switch_time_r2(&dq, coeffs.alpha, n)
            } else {
                switch_time_r1(&dq, coeffs.alpha, n)
            }
            .map_err(|_| SpectrumError::CrossingDataUnavailable)?;
            if tau > tau_max {
                break;
            }
            let params = SystemParams {
                a: coeffs.a,
                alpha: coeffs.alpha,
                b: coeffs.b,
                c: coeffs.c,
                tau,
            };
            let f_abs = char_f(Complex64::new(0.0, omega), &params)?.norm();
            if f_abs >= 1e-9 {
                return Err(SpectrumError::NotACrossing { omega, tau, f_abs });
            }
            out.push(Crossing {
                omega,
                tau,
                direction: direction_of(omega, d),
            });
        }
        Ok(())
    };

    push_family(dq.omega1.expect("D >= 0"), false)?;
    // At resonance omega2 = 0; with D = 0 the two families coincide.
    if !resonance && s >= EPS_EQ {
        push_family(dq.omega2.expect("D >= 0"), true)?;
    }
    out.sort_by(|x, y| x.tau.total_cmp(&y.tau));
    Ok(out)
}

/// Direction in which roots cross the axis at a verified crossing
/// `(omega, tau)`: the sign of `omega (omega + d)`. The delay in `params`
/// is ignored in favor of the explicit `tau`.
pub fn crossing_direction(
    omega: f64,
    tau: f64,
    params: &SystemParams,
) -> Result<CrossingDirection, SpectrumError> {
    let at_crossing = SystemParams { tau, ..*params };
    let f_abs = char_f(Complex64::new(0.0, omega), &at_crossing)?.norm();
    if f_abs >= MIN_CONTOUR_ABS {
        return Err(SpectrumError::NotACrossing { omega, tau, f_abs });
    }
    let d = (-(params.b * params.c)).sqrt();
    Ok(direction_of(omega, d))
}

fn newton(factor: &Factor, seed: Complex64) -> Result<Complex64, SpectrumError> {
    let mut z = seed;
    for _ in 0..NEWTON_MAX_ITERS {
        let fz = factor.eval(z);
        if fz.norm() <= NEWTON_TOL {
            return Ok(z);
        }
        let dz = factor.deriv(z);
        if dz.norm() == 0.0 {
            break;
        }
        z -= fz / dz;
        if !z.re.is_finite() || !z.im.is_finite() {
            break;
        }
    }
    if z.re.is_finite() && z.im.is_finite() && factor.eval(z).norm() <= NEWTON_TOL {
        Ok(z)
    } else {
        Err(SpectrumError::NewtonDiverged(NEWTON_MAX_ITERS))
    }
}

/// Newton-refine a characteristic root from `seed`, using the factor of
/// the characteristic function closest to zero there. Exact derivative
/// `1 - alpha tau e^{-lambda tau}`, tolerance 1e-12 on `|f|`.
pub fn refine_root(params: &SystemParams, seed: Complex64) -> Result<Complex64, SpectrumError> {
    let factor = factors(params)
        .into_iter()
        .min_by(|x, y| x.eval(seed).norm().total_cmp(&y.eval(seed).norm()))
        .expect("at least one factor");
    newton(&factor, seed)
}

/// Best available estimate of the rightmost characteristic root (of `F`
/// for `bc < 0`, of either scalar factor otherwise), from a grid of Newton
/// seeds. `None` when no seed converges.
pub fn rightmost_root(params: &SystemParams) -> Option<Complex64> {
    let radius = ContourSpec::for_params(params).radius;
    let n_im = ((2.0 * radius * (params.tau + 1.0) / PI).ceil() as usize).clamp(16, 512);
    let re_seeds: [f64; 9] = [-2.0, -1.0, -0.5, -0.2, 0.0, 0.2, 0.5, 1.0, 2.0];
    let mut best: Option<Complex64> = None;
    for factor in factors(params) {
        for i in 0..=n_im {
            let im = -radius + 2.0 * radius * i as f64 / n_im as f64;
            for re in re_seeds {
                if re.abs() > radius {
                    continue;
                }
                if let Ok(root) = newton(&factor, Complex64::new(re, im)) {
                    if root.norm() > radius + 1.0 {
                        continue; // wandered outside the certified region
                    }
                    if best.map_or(true, |b| root.re > b.re) {
                        best = Some(root);
                    }
                }
            }
        }
    }
    best
}
