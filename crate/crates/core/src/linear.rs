//! Spectral analysis of the linearised network: growth rates, stability and
//! the stalled-transport region.

use faer::Mat;
use num_complex::Complex64;
use thiserror::Error;

use crate::model::NetworkSpec;

#[derive(Debug, Error)]
pub enum LinearError {
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
}

/// Eigenvalues of the linearised drift matrix, sorted by descending real part.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    /// Largest real part over all eigenvalues.
    pub spectral_abscissa: f64,
    /// True when every mode is damped (`spectral_abscissa < 0`).
    pub stable: bool,
}

/// Eigenvalues of `drift_matrix(spec)` with deterministic ordering.
pub fn spectrum(spec: &NetworkSpec) -> Result<SpectrumReport, LinearError> {
    let m = spec.drift_matrix();
    let n = spec.n_sites();
    let fm = Mat::<Complex64>::from_fn(n, n, |i, j| m[(i, j)]);
    let mut eigenvalues = fm
        .eigenvalues()
        .map_err(|e| LinearError::Eigensolver(format!("{e:?}")))?;
    eigenvalues.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    let spectral_abscissa = eigenvalues.first().map_or(f64::NEG_INFINITY, |e| e.re);
    Ok(SpectrumReport { eigenvalues, spectral_abscissa, stable: spectral_abscissa < 0.0 })
}

/// Stalled-transport condition for a chain with end terminals: every linear
/// mode is damped iff `Γ_i < g` and `Γ_i ≤ Γ_e < g²/Γ_i`.
pub fn is_stalled(gamma_i: f64, gamma_e: f64, g: f64) -> bool {
    gamma_i < g && gamma_i <= gamma_e && gamma_e < g * g / gamma_i
}
