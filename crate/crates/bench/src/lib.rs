//! Fixtures shared by the benchmark targets.

use stabswitch_core::{Coefficients, SystemParams};

/// Coefficients with two stability windows separated by an unstable gap.
pub fn switching() -> Coefficients {
    Coefficients::new(0.9, 1.0, 2.0, -2.0).unwrap()
}

/// Same system inside the unstable gap, where the contour oracle has one
/// root to find.
pub fn switching_at(tau: f64) -> SystemParams {
    switching().with_tau(tau).unwrap()
}
