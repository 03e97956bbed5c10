//! Gaussian fluctuations about a stable attractor.
//!
//! Two independent routes to the rotating-frame quadrature spectrum are
//! provided: the resolvent of the drift matrix acting on the stationary
//! second moments ([`spectrum_matrix`]), and the closed-form lineshape
//! ([`re_n_plus_minus`], [`re_n_minus_plus`]). All frequencies are in units
//! of |δω|; spectra carry one factor of λ_S and one of 1/|δω|.

use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::attractors::{drift_matrix, Attractor};
use crate::error::{Error, Result};
use crate::model::HBAR;
use crate::rates::Transition;

/// Default spectrum grid: ω̃ ∈ [−5, 5] with 2001 points.
pub const DEFAULT_GRID: (f64, f64, usize) = (-5.0, 5.0, 2001);

/// Stationary Weyl-symmetrized second moments ⟨Z_n Z_m⟩ of the deviations
/// Z = (Q − Q_a, P − P_a).
///
/// Stored with the sign that makes it positive definite, i.e. it solves
/// `𝒦Σ + Σ𝒦ᵀ = −λ_S κ̃ (2n̄+1) I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix {
    pub sigma: Matrix2<f64>,
    /// Diffusion strength λ_S κ̃ (2n̄+1).
    pub source: f64,
}

impl CovarianceMatrix {
    /// Frobenius norm of `𝒦Σ + Σ𝒦ᵀ + source·I`.
    pub fn residual(&self, k: &Matrix2<f64>) -> f64 {
        (k * self.sigma + self.sigma * k.transpose() + Matrix2::identity() * self.source).norm()
    }

    pub fn trace(&self) -> f64 {
        self.sigma.trace()
    }
}

/// Spectrum matrix and the two quadrature combinations at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub omega: f64,
    /// N(ω̃), one-sided transform of ⟨Z_n(t) Z_m(0)⟩.
    pub n: Matrix2<Complex64>,
    /// Re N₊₋(ω̃).
    pub re_plus_minus: f64,
    /// Re N₋₊(−ω̃).
    pub re_minus_plus: f64,
}

/// Solves the 2×2 Lyapunov equation for a stable drift matrix.
pub fn stationary_covariance(k: &Matrix2<f64>, lambda_s: f64, kappa: f64, nbar: f64) -> Result<CovarianceMatrix> {
    if !(k.trace() < 0.0 && k.determinant() > 0.0) {
        return Err(Error::NotPositiveDefinite(format!(
            "drift matrix is not stable (trace {}, determinant {})",
            k.trace(),
            k.determinant()
        )));
    }
    let source = lambda_s * kappa * (2.0 * nbar + 1.0);
    // Unknowns (σ11, σ12, σ22).
    let a = Matrix3::new(
        2.0 * k[(0, 0)], 2.0 * k[(0, 1)], 0.0,
        k[(1, 0)], k[(0, 0)] + k[(1, 1)], k[(0, 1)],
        0.0, 2.0 * k[(1, 0)], 2.0 * k[(1, 1)],
    );
    let rhs = Vector3::new(-source, 0.0, -source);
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NotPositiveDefinite("Lyapunov system is singular".into()))?;
    let sigma = Matrix2::new(x[0], x[1], x[1], x[2]);
    if !(sigma[(0, 0)] > 0.0 && sigma.determinant() > 0.0) {
        return Err(Error::NotPositiveDefinite(format!("{sigma:?}")));
    }
    Ok(CovarianceMatrix { sigma, source })
}

/// Covariance of the fluctuations about a stable attractor.
pub fn attractor_covariance(a: &Attractor, lambda_s: f64, nbar: f64) -> Result<CovarianceMatrix> {
    a.ensure_stable()?;
    stationary_covariance(&drift_matrix(a), lambda_s, a.kappa, nbar)
}

/// `ε` with ε₁₂ = +1.
fn levi_civita() -> Matrix2<Complex64> {
    Matrix2::new(Complex64::ZERO, Complex64::ONE, -Complex64::ONE, Complex64::ZERO)
}

/// Equal-time correlator ⟨Z_n Z_m⟩ including the commutator [Q, P] = iλ_S.
pub fn equal_time_correlator(cov: &CovarianceMatrix, lambda_s: f64) -> Matrix2<Complex64> {
    cov.sigma.map(|x| Complex64::new(x, 0.0)) + levi_civita() * Complex64::new(0.0, 0.5 * lambda_s)
}

/// N(ω̃) = −(iω̃ + 𝒦)⁻¹ C(0), with C(0) the equal-time correlator.
pub fn spectrum_matrix(k: &Matrix2<f64>, cov: &CovarianceMatrix, lambda_s: f64, omega: f64) -> Result<Matrix2<Complex64>> {
    let resolvent = k.map(|x| Complex64::new(x, 0.0)) + Matrix2::identity() * Complex64::new(0.0, omega);
    let inv = resolvent
        .try_inverse()
        .ok_or_else(|| Error::NotPositiveDefinite(format!("resolvent singular at ω̃ = {omega}")))?;
    Ok(-(inv * equal_time_correlator(cov, lambda_s)))
}

/// N₊₋ = N₁₁ + N₂₂ + i(N₂₁ − N₁₂), from Z± = Z₁ ± iZ₂.
pub fn plus_minus(n: &Matrix2<Complex64>) -> Complex64 {
    n[(0, 0)] + n[(1, 1)] + Complex64::i() * (n[(1, 0)] - n[(0, 1)])
}

/// N₋₊ = N₁₁ + N₂₂ − i(N₂₁ − N₁₂).
pub fn minus_plus(n: &Matrix2<Complex64>) -> Complex64 {
    n[(0, 0)] + n[(1, 1)] - Complex64::i() * (n[(1, 0)] - n[(0, 1)])
}

/// Evaluates the matrix route at ω̃, including Re N₋₊ at the mirrored frequency.
pub fn spectrum_point(k: &Matrix2<f64>, cov: &CovarianceMatrix, lambda_s: f64, omega: f64) -> Result<SpectrumPoint> {
    let n = spectrum_matrix(k, cov, lambda_s, omega)?;
    let mirrored = spectrum_matrix(k, cov, lambda_s, -omega)?;
    Ok(SpectrumPoint {
        omega,
        n,
        re_plus_minus: plus_minus(&n).re,
        re_minus_plus: minus_plus(&mirrored).re,
    })
}

/// Closed-form one-quantum lineshape. `transition` selects which thermal
/// factor multiplies the curly bracket (n̄+1 for decay) and which the u² term.
pub(crate) fn one_quantum_lineshape(
    omega: f64,
    u: f64,
    nu: f64,
    kappa: f64,
    lambda_s: f64,
    occupation: f64,
    transition: Transition,
) -> f64 {
    let bracket_weight = transition.factor(true, occupation);
    let amplitude_weight = transition.factor(false, occupation);
    let shift = omega - (2.0 * u - 1.0);
    let numerator = bracket_weight * (shift * shift + kappa * kappa) + amplitude_weight * u * u;
    let detune = omega * omega - nu * nu;
    let denominator = detune * detune + 4.0 * kappa * kappa * omega * omega;
    2.0 * lambda_s * kappa * numerator / denominator
}

/// Re N₊₋(ω̃) in closed form.
pub fn re_n_plus_minus(omega: f64, u: f64, nu: f64, kappa: f64, lambda_s: f64, nbar: f64) -> f64 {
    one_quantum_lineshape(omega, u, nu, kappa, lambda_s, nbar, Transition::Decay)
}

/// Re N₋₊(−ω̃) in closed form: thermal factors n̄+1 and n̄ interchanged.
pub fn re_n_minus_plus(omega: f64, u: f64, nu: f64, kappa: f64, lambda_s: f64, nbar: f64) -> f64 {
    one_quantum_lineshape(omega, u, nu, kappa, lambda_s, nbar, Transition::Excitation)
}

/// Re G of the squared displacement near the two-quantum resonance ω_q ≈ 2ω₀, m⁴·s.
pub fn two_quantum_g(omega_q: f64, omega0: f64, kappa: f64, nbar: f64, mass: f64, transition: Transition) -> f64 {
    let thermal = transition.factor(true, nbar);
    let zpf = HBAR / (mass * omega0);
    let d = omega_q - 2.0 * omega0;
    zpf * zpf * kappa * thermal * thermal / (d * d + 4.0 * kappa * kappa)
}

/// Linear grid helper used for spectra.
pub fn linear_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}
