//! Local phase-shift design for an IRS handed to one operator.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::config::NetworkConfig;

/// Reflection coefficients of one IRS as seen by one operator.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShiftVector {
    theta: DVector<Complex64>,
    tunable: bool,
}

impl PhaseShiftVector {
    /// Uncontrolled reflection, `Theta = I`.
    pub fn identity(elements: usize) -> Self {
        Self {
            theta: DVector::from_element(elements, Complex64::new(1.0, 0.0)),
            tunable: false,
        }
    }

    pub fn from_angles(angles: &[f64]) -> Self {
        Self {
            theta: DVector::from_iterator(
                angles.len(),
                angles.iter().map(|&a| Complex64::from_polar(1.0, a)),
            ),
            tunable: true,
        }
    }

    /// Designed phases whose every element equals one keep the identity values
    /// but are still marked tunable.
    pub fn tunable_identity(elements: usize) -> Self {
        Self {
            tunable: true,
            ..Self::identity(elements)
        }
    }

    pub fn theta(&self) -> &DVector<Complex64> {
        &self.theta
    }

    pub fn is_tunable(&self) -> bool {
        self.tunable
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// Per-element coherent alignment of `diag(h_r^H) G` onto the direct channel.
///
/// The vector channel is reduced to scalars by projecting on the direct
/// channel's direction `v = h_d / |h_d|`: `d = h_d^H v` and
/// `c_m = conj(h_r[m]) (G[m,:] v)`. Each `theta_m` rotates `c_m` onto `arg d`;
/// elements with `c_m = 0` keep `theta_m = 1`.
pub fn align_to_direct(
    h_r: &DVector<Complex64>,
    g: &DMatrix<Complex64>,
    h_d: &DVector<Complex64>,
) -> PhaseShiftVector {
    let nt = h_d.len();
    let norm = h_d.norm();
    let v = if norm > 0.0 {
        h_d.map(|z| z / norm)
    } else {
        let mut e = DVector::zeros(nt);
        e[0] = Complex64::new(1.0, 0.0);
        e
    };
    let d = h_d.dotc(&v);
    let gv = g * &v;
    let theta = DVector::from_iterator(
        h_r.len(),
        h_r.iter().zip(gv.iter()).map(|(hr, gv)| {
            let c = hr.conj() * gv;
            if c.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, d.arg() - c.arg())
            }
        }),
    );
    PhaseShiftVector {
        theta,
        tunable: true,
    }
}

/// `(bs, user)` whose cascade the operator aligns through `irs`: among the
/// operator's BSs, the one with the largest aggregate cascaded gain
/// `sum_k |diag(h_r^H) G|_F^2`; within it, the user with the strongest direct
/// channel. Ties go to the lowest index.
pub fn anchor_user(
    channels: &ChannelSet,
    config: &NetworkConfig,
    operator: usize,
    irs: usize,
) -> (usize, usize) {
    let cascade_gain = |b: usize| -> f64 {
        let g = channels.g(irs, b);
        let row_power: Vec<f64> = g.row_iter().map(|r| r.norm_squared()).collect();
        (0..config.users_per_bs)
            .map(|k| {
                channels
                    .h_r(irs, b, k)
                    .iter()
                    .zip(&row_power)
                    .map(|(h, p)| h.norm_sqr() * p)
                    .sum::<f64>()
            })
            .sum()
    };
    let bs = argmax_first(
        (0..config.bs_per_operator).map(|n| cascade_gain(config.bs_index(operator, n))),
    );
    let bs = config.bs_index(operator, bs);
    let user = argmax_first((0..config.users_per_bs).map(|k| channels.h_d(bs, k).norm()));
    (bs, user)
}

fn argmax_first(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Phases `operator` applies to `irs` when it holds it.
pub fn design_phases_local(
    channels: &ChannelSet,
    config: &NetworkConfig,
    operator: usize,
    irs: usize,
) -> PhaseShiftVector {
    let (bs, user) = anchor_user(channels, config, operator, irs);
    align_to_direct(channels.h_r(irs, bs, user), channels.g(irs, bs), channels.h_d(bs, user))
}
