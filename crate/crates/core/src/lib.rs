//! Stability analysis for the planar linear delay system
//!
//! ```text
//! x'(t) + a x(t) + alpha x(t - tau) + b y(t) = 0
//! y'(t) + a y(t) + c x(t) + alpha y(t - tau) = 0
//! ```
//!
//! Three independent views of the same question:
//!
//! * [`criterion`] — the closed-form answer: a complete case analysis of
//!   the characteristic equation deciding asymptotic stability and
//!   enumerating every stability window in the delay, including the
//!   stability-switching regimes where windows open and close finitely
//!   many times.
//! * [`spectrum`] — a numerical oracle: argument-principle root counting
//!   over a certified contour, imaginary-axis crossing enumeration,
//!   crossing directions, Newton root refinement.
//! * [`sim`] — a time-domain oracle: method-of-steps RK4 integration with
//!   decay-rate estimation.
//!
//! The test suite holds the three against each other; the numerical sides
//! never feed the closed-form side.

pub mod criterion;
pub mod model;
pub mod sim;
pub mod spectrum;

pub use num_complex::Complex64;

pub use criterion::{
    classify, hayes_stable, hayes_threshold, is_asymptotically_stable, stability_windows,
    switch_time_r1, switch_time_r2, CriterionError, HayesThreshold,
};
pub use model::{
    derive, Coefficients, DerivedQuantities, Interval, ModelError, Stability, SystemParams,
    TauWindows, Trajectory, Verdict, EPS_EQ,
};
pub use sim::{
    estimate_decay, simulate, write_trajectory_csv, DecayEstimate, DecayHint, History, SimConfig,
    SimError,
};
pub use spectrum::{
    char_f, char_g, count_rhp_roots, count_rhp_roots_auto, count_scalar_rhp_roots,
    crossing_direction, imaginary_crossings, refine_root, rightmost_root, ContourSpec, Crossing,
    CrossingDirection, SpectrumError,
};
