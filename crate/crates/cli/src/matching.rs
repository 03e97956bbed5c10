//! Resonant vs nonresonant one-quantum rates in their common range of
//! validity ν̃, κ̃ ≪ |ω̃| ≪ ω_F/|δω|.
//!
//! For a hierarchy factor h the scaled detuning is ω̃ = h·max(ν̃, κ̃, 1) and
//! the drive frequency ω_F = h·|ω̃|·|δω|, so both inequalities deepen
//! together as h grows. The two rate expressions should then agree to O(1/h).

use jba_core::attractors::Attractor;
use jba_core::model::{PhysicalParams, ScaledParams, HBAR, K_B};
use jba_core::rates::{gamma_nonresonant, gamma_resonant_1q, QubitParams, ValidityFlag};
use jba_core::Result;

/// Oscillator eigenfrequency used to build the laboratory set, rad/s.
pub const OMEGA0: f64 = 2.0 * std::f64::consts::PI * 5e9;
pub const MASS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MatchPoint {
    pub h: f64,
    pub omega_scaled: f64,
    /// ω_F/|δω|.
    pub drive_ratio: f64,
    pub resonant: (f64, f64),
    pub nonresonant: (f64, f64),
    pub validity: Vec<ValidityFlag>,
}

impl MatchPoint {
    pub fn ratio_e(&self) -> f64 {
        self.resonant.0 / self.nonresonant.0
    }

    pub fn ratio_g(&self) -> f64 {
        self.resonant.1 / self.nonresonant.1
    }
}

/// Temperature at which the Planck occupation at ω equals `nbar`.
fn temperature_for(nbar: f64, omega: f64) -> f64 {
    if nbar == 0.0 {
        0.0
    } else {
        HBAR * omega / (K_B * (1.0 / nbar).ln_1p())
    }
}

/// Builds the laboratory set for hierarchy factor `h` about attractor `a` and
/// evaluates both rate expressions there. `s` supplies λ_S and n̄.
pub fn match_point(h: f64, a: &Attractor, s: &ScaledParams) -> Result<MatchPoint> {
    a.ensure_stable()?;
    let nu = a.nu().unwrap_or(0.0);
    let omega_scaled = h * nu.max(a.kappa).max(1.0);
    let drive_ratio = h * omega_scaled.abs();
    let dw = OMEGA0 / (1.0 + drive_ratio);
    let omega_f = OMEGA0 - dw;
    let temperature = temperature_for(s.nbar, omega_f);
    let p = PhysicalParams::from_scaled(MASS, OMEGA0, omega_f, a.beta, a.kappa, s.lambda_s, temperature, 100.0 * OMEGA0)?;
    let omega_q = 2.0 * omega_f + omega_scaled * dw;
    let q = QubitParams::with_frequency(omega_q, 0.05 * omega_q, 1e-8 * OMEGA0)?;
    let res = gamma_resonant_1q(&q, a, &p)?;
    let non = gamma_nonresonant(&q, a, &p, &p.ohmic_bath())?;
    let mut validity = res.validity.clone();
    for f in non.validity {
        if !validity.iter().any(|g| g.kind == f.kind) {
            validity.push(f);
        }
    }
    Ok(MatchPoint {
        h,
        omega_scaled,
        drive_ratio,
        resonant: (res.gamma_e, res.gamma_g),
        nonresonant: (non.gamma_e, non.gamma_g),
        validity,
    })
}

/// True when |ratio − 1| strictly decreases along `points` (sorted by h).
pub fn converges(points: &[MatchPoint]) -> bool {
    let dev = |p: &MatchPoint| (p.ratio_e() - 1.0).abs().max((p.ratio_g() - 1.0).abs());
    points.windows(2).all(|w| dev(&w[1]) < dev(&w[0]))
}
