//! Zero-forcing precoding with an equal power split.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative diagonal floor of the Cholesky factor below which the Gram matrix
/// is treated as rank deficient.
const RANK_TOL: f64 = 1e-12;
/// Tikhonov weight, relative to `trace(H H^H) / K`, used for rank-deficient channels.
pub const REGULARIZER: f64 = 1e-12;

/// Precoder of one BS: column `k` is `w_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    pub w: DMatrix<Complex64>,
    /// Set when the channel matrix was rank deficient and a regularized
    /// inverse was used instead of the pseudo-inverse.
    pub regularized: bool,
}

impl Beamformer {
    pub fn column(&self, k: usize) -> DVector<Complex64> {
        self.w.column(k).into_owned()
    }

    pub fn total_power(&self) -> f64 {
        self.w.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Designs ZF directions for `channels` (one `h_k` per user, so the user
/// sees `h_k^H w`) and gives every user `power_w / K`.
pub fn design_beamformer_zf(channels: &[DVector<Complex64>], power_w: f64) -> Result<Beamformer> {
    let k = channels.len();
    if k == 0 {
        return Err(Error::Dimension("zero-forcing needs at least one user".into()));
    }
    let nt = channels[0].len();
    if channels.iter().any(|h| h.len() != nt) {
        return Err(Error::Dimension("user channels differ in length".into()));
    }
    if k > nt {
        return Err(Error::Dimension(format!(
            "zero-forcing needs K <= Nt, got K = {k}, Nt = {nt}"
        )));
    }

    // Rows of `h` are h_k^H.
    let h = DMatrix::from_fn(k, nt, |i, t| channels[i][t].conj());
    let gram = &h * h.adjoint();

    let direct = gram.clone().cholesky().filter(|chol| {
        let diag: Vec<f64> = chol.l_dirty().diagonal().iter().map(|z| z.re).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        max > 0.0 && (min / max).powi(2) > RANK_TOL
    });
    let (solved, regularized) = match direct {
        Some(chol) => (chol.solve(&h), false),
        None => {
            let trace: f64 = gram.diagonal().iter().map(|z| z.re).sum();
            let delta = (REGULARIZER * trace / k as f64).max(f64::MIN_POSITIVE);
            let reg = &gram + DMatrix::identity(k, k) * Complex64::new(delta, 0.0);
            let solved = match reg.cholesky() {
                Some(chol) => chol.solve(&h),
                None => DMatrix::zeros(k, nt),
            };
            (solved, true)
        }
    };
    // Pseudo-inverse H^H (H H^H)^-1 = ((H H^H)^-1 H)^H.
    let mut w = solved.adjoint();
    let per_user = (power_w / k as f64).sqrt();
    for mut col in w.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col *= Complex64::new(per_user / norm, 0.0);
        } else {
            col.fill(Complex64::new(0.0, 0.0));
        }
    }
    Ok(Beamformer { w, regularized })
}
