//! Qubit decay (Γ_e) and excitation (Γ_g) rates mediated by the driven oscillator.
//!
//! Every channel is written once in terms of thermal factors; Γ_g follows
//! from Γ_e by interchanging n̄+1 ↔ n̄ in each factor, which is what
//! [`Transition`] encodes. Regimes are never chosen automatically: the
//! caller picks one and inspects [`RateResult::validity`].

use serde::{Deserialize, Serialize};

use crate::attractors::Attractor;
use crate::error::{Error, Result};
use crate::fluctuations::{attractor_covariance, one_quantum_lineshape, spectrum_matrix, two_quantum_g};
use crate::model::{bath_j, planck, scale_params, BathSpec, PhysicalParams, ScaledParams, HBAR, K_B};

/// Nonresonant channels are refused when |ω₀² − ω_i²| falls below this many κω₀.
pub const NEAR_RESONANCE_GUARD: f64 = 10.0;

/// Direction of the qubit transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transition {
    /// Excited → ground (Γ_e).
    Decay,
    /// Ground → excited (Γ_g).
    Excitation,
}

impl Transition {
    /// Thermal factor of a channel: `n+1` if a quantum is emitted into the
    /// bath, `n` if one is absorbed. `emits_on_decay` describes the channel
    /// for [`Transition::Decay`]; excitation runs it backwards.
    pub fn factor(self, emits_on_decay: bool, n: f64) -> f64 {
        let emits = match self {
            Transition::Decay => emits_on_decay,
            Transition::Excitation => !emits_on_decay,
        };
        if emits {
            n + 1.0
        } else {
            n
        }
    }
}

/// Qubit constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    /// Longitudinal splitting w, rad/s.
    pub w: f64,
    /// Transverse term δ, rad/s.
    pub delta: f64,
    /// Oscillator frequency shift Δ_q of the quadratic coupling, rad/s.
    pub delta_q: f64,
    /// Linear σ_x·x coupling energy, J/m.
    pub v_x: f64,
    /// Linear σ_z·x coupling energy, J/m.
    pub v_z: f64,
}

impl QubitParams {
    pub fn quadratic(w: f64, delta: f64, delta_q: f64) -> Self {
        QubitParams { w, delta, delta_q, v_x: 0.0, v_z: 0.0 }
    }

    /// A qubit with splitting chosen so that √(w² + δ²) = ω_q.
    pub fn with_frequency(omega_q: f64, delta: f64, delta_q: f64) -> Result<Self> {
        if !(omega_q > delta.abs()) {
            return Err(Error::param("omega_q", "must exceed |delta|"));
        }
        Ok(Self::quadratic((omega_q * omega_q - delta * delta).sqrt(), delta, delta_q))
    }

    /// Transition frequency ω_q = √(w² + δ²).
    pub fn omega_q(&self) -> f64 {
        self.w.hypot(self.delta)
    }

    /// C_Γ = ½(mω₀Δ_qδ/ħω_q)², s⁻¹·m⁻⁴.
    pub fn c_gamma(&self, p: &PhysicalParams) -> f64 {
        let x = p.mass * p.omega0 * self.delta_q * self.delta / (HBAR * self.omega_q());
        0.5 * x * x
    }

    /// Transverse part of the linear coupling in the qubit eigenbasis,
    /// (V_x w − V_z δ)/ω_q, J/m.
    pub fn linear_transverse(&self) -> f64 {
        (self.v_x * self.w - self.v_z * self.delta) / self.omega_q()
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("w", self.w), ("delta", self.delta), ("delta_q", self.delta_q), ("v_x", self.v_x), ("v_z", self.v_z)] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if !(self.omega_q() > 0.0) {
            return Err(Error::param("w", "qubit frequency must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Resonant1Q,
    Resonant2Q,
    Nonresonant,
    Nonresonant2Q,
    LinearResonant,
    LinearNonresonant,
    Combined,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Resonant1Q => "resonant-1q",
            Regime::Resonant2Q => "resonant-2q",
            Regime::Nonresonant => "nonresonant",
            Regime::Nonresonant2Q => "nonresonant-2q",
            Regime::LinearResonant => "linear-resonant",
            Regime::LinearNonresonant => "linear-nonresonant",
            Regime::Combined => "combined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlagKind {
    /// The drive pumps the qubit resonantly through the coupling.
    ResonantPumping,
    /// λ_S(2n̄+1) is not small.
    SemiclassicalBreakdown,
    /// κ̃ ≥ ν̃_a: no underdamped quasienergy motion.
    WeakDampingViolated,
    /// |δω| or κ is not small compared with ω₀.
    RwaViolated,
    /// The qubit relaxes faster than the oscillator.
    QubitFasterThanOscillator,
    /// |δ| is not small compared with w.
    TransverseNotSmall,
    /// Forced amplitude comparable to fluctuations; two-quantum channel matters.
    TwoQuantumCrossover,
    /// |ω_q − 2ω_F| (or |ω_q − ω_F|) is not small compared with ω_F.
    DetuningNotSmall,
    /// ν_a or κ is not small compared with |ω_q − 2ω_F|.
    NotFarFromResonance,
    /// Γ_e = Γ_g, T_eff infinite.
    EffectiveTemperatureDivergent,
}

impl FlagKind {
    /// Ratio at or above which the flag is raised.
    pub fn threshold(self) -> f64 {
        match self {
            FlagKind::WeakDampingViolated | FlagKind::QubitFasterThanOscillator => 1.0,
            FlagKind::EffectiveTemperatureDivergent => 0.0,
            _ => 0.1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FlagKind::ResonantPumping => "resonant-pumping",
            FlagKind::SemiclassicalBreakdown => "semiclassical-breakdown",
            FlagKind::WeakDampingViolated => "weak-damping-violated",
            FlagKind::RwaViolated => "rwa-violated",
            FlagKind::QubitFasterThanOscillator => "qubit-faster-than-oscillator",
            FlagKind::TransverseNotSmall => "transverse-not-small",
            FlagKind::TwoQuantumCrossover => "two-quantum-crossover",
            FlagKind::DetuningNotSmall => "detuning-not-small",
            FlagKind::NotFarFromResonance => "not-far-from-resonance",
            FlagKind::EffectiveTemperatureDivergent => "teff-divergent",
        }
    }
}

/// A raised validity flag and the dimensionless ratio that triggered it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityFlag {
    pub kind: FlagKind,
    pub ratio: f64,
}

fn push_flag(out: &mut Vec<ValidityFlag>, kind: FlagKind, ratio: f64) {
    if ratio >= kind.threshold() || ratio.is_nan() {
        out.push(ValidityFlag { kind, ratio });
    }
}

/// Rates in units of Γ₀ = ħC_Γu/6γ_S, for dimensionless parameter sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledRates {
    pub gamma_e: f64,
    pub gamma_g: f64,
    /// k_B T_eff / ħω_q = 1/ln(Γ_e/Γ_g).
    pub t_eff_scaled: f64,
    pub validity: Vec<ValidityFlag>,
}

/// Rates in laboratory units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub regime: Regime,
    /// Decay rate, 1/s.
    pub gamma_e: f64,
    /// Excitation rate, 1/s.
    pub gamma_g: f64,
    /// (Γ_e/Γ₀, Γ_g/Γ₀) for channels carrying the r_a² factor.
    pub scaled: Option<(f64, f64)>,
    /// 1/(Γ_e + Γ_g), s.
    pub t1: f64,
    /// Present when the dc spectrum Re G(0) is available (leading one-quantum
    /// dc channel of the quadratic coupling).
    pub t2: Option<f64>,
    /// Effective qubit temperature, K (signed, possibly infinite).
    pub t_eff: f64,
    pub validity: Vec<ValidityFlag>,
}

impl RateResult {
    fn assemble(
        regime: Regime,
        q: &QubitParams,
        p: &PhysicalParams,
        gamma_e: f64,
        gamma_g: f64,
        dephasing_g0: Option<f64>,
    ) -> Result<Self> {
        let (t1, t2) = match dephasing_g0 {
            Some(g0) => {
                let (t1, t2) = bloch_redfield(gamma_e, gamma_g, q, p, g0)?;
                (t1, Some(t2))
            }
            None => (1.0 / (gamma_e + gamma_g), None),
        };
        let t_eff = effective_temperature(gamma_e, gamma_g, q.omega_q());
        let mut validity = Vec::new();
        if gamma_e == gamma_g {
            validity.push(ValidityFlag { kind: FlagKind::EffectiveTemperatureDivergent, ratio: 1.0 });
        }
        Ok(RateResult { regime, gamma_e, gamma_g, scaled: None, t1, t2, t_eff, validity })
    }

    pub fn has_flag(&self, kind: FlagKind) -> bool {
        self.validity.iter().any(|f| f.kind == kind)
    }
}

/// k_B T_eff/ħω_q from the rate ratio.
pub fn scaled_effective_temperature(gamma_e: f64, gamma_g: f64) -> f64 {
    if gamma_g == 0.0 {
        return 0.0;
    }
    1.0 / (gamma_e / gamma_g).ln()
}

/// T_eff = ħω_q / [k_B ln(Γ_e/Γ_g)], K. Infinite when Γ_e = Γ_g, negative under inversion.
pub fn effective_temperature(gamma_e: f64, gamma_g: f64, omega_q: f64) -> f64 {
    HBAR * omega_q / K_B * scaled_effective_temperature(gamma_e, gamma_g)
}

/// (T1, T2) from the Bloch–Redfield relations. `dephasing_g0` is Re G(0), m⁴·s.
pub fn bloch_redfield(gamma_e: f64, gamma_g: f64, q: &QubitParams, p: &PhysicalParams, dephasing_g0: f64) -> Result<(f64, f64)> {
    if gamma_e < 0.0 || gamma_g < 0.0 || dephasing_g0 < 0.0 {
        return Err(Error::param("rates", "rates and Re G(0) must be non-negative"));
    }
    let inv_t1 = gamma_e + gamma_g;
    let dephasing = if dephasing_g0 == 0.0 {
        0.0
    } else {
        if q.delta == 0.0 {
            return Err(Error::param("delta", "δ = 0 makes the dephasing prefactor (w/δ)² divergent"));
        }
        let r = q.w / q.delta;
        2.0 * q.c_gamma(p) * r * r * dephasing_g0
    };
    Ok((1.0 / inv_t1, 1.0 / (0.5 * inv_t1 + dephasing)))
}

/// Flags for the assumptions behind the rate expressions. Inputs that are
/// not available (dimensionless runs, rates not yet known) are skipped.
pub fn validity_flags(
    q: Option<&QubitParams>,
    a: Option<&Attractor>,
    s: &ScaledParams,
    p: Option<&PhysicalParams>,
    t1: Option<f64>,
    t2: Option<f64>,
) -> Vec<ValidityFlag> {
    let mut out = Vec::new();
    push_flag(&mut out, FlagKind::SemiclassicalBreakdown, s.semiclassical_parameter());
    if let Some(a) = a {
        let ratio = match a.nu() {
            Some(nu) if nu > 0.0 => a.kappa / nu,
            _ => f64::INFINITY,
        };
        push_flag(&mut out, FlagKind::WeakDampingViolated, ratio);
    }
    if let Some(p) = p {
        let dw = (p.omega0 - p.omega_f).abs();
        push_flag(&mut out, FlagKind::RwaViolated, dw.max(p.kappa) / p.omega0);
        if let Some(t1) = t1 {
            push_flag(&mut out, FlagKind::QubitFasterThanOscillator, 1.0 / (t1 * p.kappa));
        }
    }
    if let Some(q) = q {
        push_flag(&mut out, FlagKind::TransverseNotSmall, (q.delta / q.w).abs());
        if let (Some(p), Some(a), Some(units), Some(t1), Some(t2)) = (p, a, s.units, t1, t2) {
            if t1.is_finite() && t2.is_finite() {
                let omega_q = q.omega_q();
                let pump = p.mass * p.omega0 * q.delta_q * q.delta * units.c_res * units.c_res * a.u / (HBAR * omega_q);
                let detuning = omega_q - 2.0 * p.omega_f;
                let ratio = pump * pump * t1 * t2 / (1.0 + detuning * detuning * t2 * t2);
                push_flag(&mut out, FlagKind::ResonantPumping, ratio);
            }
        }
    }
    out
}

fn check_consistent(a: &Attractor, s: &ScaledParams) -> Result<()> {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1e-300);
    if !close(a.kappa, s.kappa) || !close(a.beta, s.beta) {
        return Err(Error::param(
            "attractor",
            format!("solved for (β, κ̃) = ({}, {}) but parameters give ({}, {})", a.beta, a.kappa, s.beta, s.kappa),
        ));
    }
    Ok(())
}

/// One-quantum resonant rates in units of Γ₀, at scaled detuning ω̃ = (ω_q − 2ω_F)/|δω|.
pub fn resonant_1q_scaled(detuning: f64, a: &Attractor, lambda_s: f64, nbar: f64) -> Result<ScaledRates> {
    a.ensure_stable()?;
    let nu = a.nu().unwrap_or(0.0);
    let rate = |t| one_quantum_lineshape(detuning, a.u, nu, a.kappa, lambda_s, nbar, t) / lambda_s;
    let (gamma_e, gamma_g) = (rate(Transition::Decay), rate(Transition::Excitation));
    let s = ScaledParams::dimensionless(a.beta, a.kappa, lambda_s, nbar)?;
    let mut validity = validity_flags(None, Some(a), &s, None, None, None);
    if gamma_e == gamma_g {
        validity.push(ValidityFlag { kind: FlagKind::EffectiveTemperatureDivergent, ratio: 1.0 });
    }
    Ok(ScaledRates {
        gamma_e,
        gamma_g,
        t_eff_scaled: scaled_effective_temperature(gamma_e, gamma_g),
        validity,
    })
}

/// Re G(0) of the quadratic coupling from the slow part 2x_aδx → C_res²(Q_aZ₁ + P_aZ₂).
pub fn dephasing_spectrum(a: &Attractor, s: &ScaledParams) -> Result<f64> {
    let units = s
        .units
        .ok_or_else(|| Error::param("units", "laboratory scale needed for Re G(0)"))?;
    let cov = attractor_covariance(a, s.lambda_s, s.nbar)?;
    let n0 = spectrum_matrix(&crate::attractors::drift_matrix(a), &cov, s.lambda_s, 0.0)?;
    let v = [a.q, a.p];
    let mut acc = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            acc += v[i] * n0[(i, j)].re * v[j];
        }
    }
    Ok(units.c_res.powi(4) * acc / units.detuning)
}

/// One-quantum resonant decay, |ω_q − 2ω_F| ≪ ω_F.
pub fn gamma_resonant_1q(q: &QubitParams, a: &Attractor, p: &PhysicalParams) -> Result<RateResult> {
    q.validate()?;
    let s = scale_params(p)?;
    check_consistent(a, &s)?;
    let units = s.units.expect("scale_params sets units");
    let omega_q = q.omega_q();
    let detuning = (omega_q - 2.0 * p.omega_f) / units.detuning;
    let scaled = resonant_1q_scaled(detuning, a, s.lambda_s, s.nbar)?;
    // Re G = (C_res⁴/4) u Re N₊₋ / |δω|; Γ₀ = ħ C_Γ u / 6γ_S.
    let gamma0 = HBAR * q.c_gamma(p) * a.u / (6.0 * p.gamma_s);
    let g0 = dephasing_spectrum(a, &s)?;
    let mut r = RateResult::assemble(Regime::Resonant1Q, q, p, scaled.gamma_e * gamma0, scaled.gamma_g * gamma0, Some(g0))?;
    r.scaled = Some((scaled.gamma_e, scaled.gamma_g));
    r.validity.extend(validity_flags(Some(q), Some(a), &s, Some(p), Some(r.t1), r.t2));
    push_flag(&mut r.validity, FlagKind::DetuningNotSmall, (omega_q - 2.0 * p.omega_f).abs() / p.omega_f);
    Ok(r)
}

/// Two-quantum resonant decay, |ω_q − 2ω₀| ≪ ω₀. `nbar` is the oscillator occupation.
pub fn gamma_resonant_2q(q: &QubitParams, p: &PhysicalParams, nbar: f64) -> Result<RateResult> {
    q.validate()?;
    p.validate()?;
    let omega_q = q.omega_q();
    let c = q.c_gamma(p);
    let rate = |t| c * two_quantum_g(omega_q, p.omega0, p.kappa, nbar, p.mass, t);
    let mut r = RateResult::assemble(Regime::Resonant2Q, q, p, rate(Transition::Decay), rate(Transition::Excitation), None)?;
    push_flag(&mut r.validity, FlagKind::DetuningNotSmall, (omega_q - 2.0 * p.omega0).abs() / p.omega0);
    push_flag(&mut r.validity, FlagKind::RwaViolated, (p.omega0 - p.omega_f).abs().max(p.kappa) / p.omega0);
    Ok(r)
}

/// Sum of the one- and two-quantum resonant channels.
pub fn gamma_total_resonant(q: &QubitParams, a: &Attractor, p: &PhysicalParams) -> Result<RateResult> {
    let one = gamma_resonant_1q(q, a, p)?;
    let two = gamma_resonant_2q(q, p, planck(p.omega0, p.temperature)?)?;
    let s = scale_params(p)?;
    let (ge, gg) = (one.gamma_e + two.gamma_e, one.gamma_g + two.gamma_g);
    let g0 = dephasing_spectrum(a, &s)?;
    let mut r = RateResult::assemble(Regime::Combined, q, p, ge, gg, Some(g0))?;
    let gamma0 = HBAR * q.c_gamma(p) * a.u / (6.0 * p.gamma_s);
    r.scaled = Some((ge / gamma0, gg / gamma0));
    r.validity.extend(validity_flags(Some(q), Some(a), &s, Some(p), Some(r.t1), r.t2));
    push_flag(&mut r.validity, FlagKind::DetuningNotSmall, (q.omega_q() - 2.0 * p.omega_f).abs() / p.omega_f);
    push_flag(&mut r.validity, FlagKind::TwoQuantumCrossover, s.semiclassical_parameter() / a.u);
    Ok(r)
}

/// One bath channel of a nonresonant sum: frequency, and whether decay emits into it.
#[derive(Debug, Clone, Copy)]
struct Channel {
    omega: f64,
    emits_on_decay: bool,
    /// Extra oscillator-quantum factor for two-quantum channels: Some(emits).
    oscillator_quantum: Option<bool>,
}

/// Σ J(ω_i) Φ(ω_i) / (ω₀² − ω_i²)² over the open channels.
fn channel_sum(
    channels: &[Channel],
    omega0: f64,
    kappa: f64,
    bath: &BathSpec,
    occupation: &dyn Fn(f64) -> Result<f64>,
    oscillator_occupation: f64,
    transition: Transition,
) -> Result<f64> {
    let mut acc = 0.0;
    for ch in channels {
        let j = bath_j(bath, ch.omega);
        if j == 0.0 {
            continue;
        }
        let gap = omega0 * omega0 - ch.omega * ch.omega;
        if gap.abs() < NEAR_RESONANCE_GUARD * kappa * omega0 {
            return Err(Error::NearResonance { omega: ch.omega, omega0 });
        }
        let mut phi = transition.factor(ch.emits_on_decay, occupation(ch.omega)?);
        if let Some(emits) = ch.oscillator_quantum {
            phi *= transition.factor(emits, oscillator_occupation);
        }
        acc += j * phi / (gap * gap);
    }
    Ok(acc)
}

fn one_quantum_channels(omega_q: f64, omega_f: f64) -> [Channel; 3] {
    [
        Channel { omega: omega_q + omega_f, emits_on_decay: true, oscillator_quantum: None },
        Channel { omega: omega_q - omega_f, emits_on_decay: true, oscillator_quantum: None },
        Channel { omega: omega_f - omega_q, emits_on_decay: false, oscillator_quantum: None },
    ]
}

fn two_quantum_channels(omega_q: f64, omega0: f64) -> [Channel; 3] {
    [
        Channel { omega: omega_q - omega0, emits_on_decay: true, oscillator_quantum: Some(true) },
        Channel { omega: omega0 - omega_q, emits_on_decay: false, oscillator_quantum: Some(true) },
        Channel { omega: omega_q + omega0, emits_on_decay: true, oscillator_quantum: Some(false) },
    ]
}

fn thermal(temperature: f64) -> impl Fn(f64) -> Result<f64> {
    move |w| planck(w, temperature)
}

/// Drive-stimulated decay into the bath at ω_q ± ω_F, far from the 2ω₀ resonance.
pub fn gamma_nonresonant(q: &QubitParams, a: &Attractor, p: &PhysicalParams, b: &BathSpec) -> Result<RateResult> {
    q.validate()?;
    let s = scale_params(p)?;
    check_consistent(a, &s)?;
    a.ensure_stable()?;
    let omega_q = q.omega_q();
    let dw = p.omega0 - p.omega_f;
    let prefactor = 2.0 * p.omega_f * dw / (3.0 * p.mass * p.gamma_s) * a.u;
    let channels = one_quantum_channels(omega_q, p.omega_f);
    let occ = thermal(p.temperature);
    let c = q.c_gamma(p);
    let rate = |t| -> Result<f64> { Ok(c * prefactor * channel_sum(&channels, p.omega0, p.kappa, b, &occ, 0.0, t)?) };
    let (ge, gg) = (rate(Transition::Decay)?, rate(Transition::Excitation)?);
    let g0 = dephasing_spectrum(a, &s)?;
    let mut r = RateResult::assemble(Regime::Nonresonant, q, p, ge, gg, Some(g0))?;
    let gamma0 = HBAR * c * a.u / (6.0 * p.gamma_s);
    if gamma0 > 0.0 {
        r.scaled = Some((ge / gamma0, gg / gamma0));
    }
    r.validity.extend(validity_flags(Some(q), Some(a), &s, Some(p), Some(r.t1), r.t2));
    let nu = a.nu().unwrap_or(0.0) * dw;
    let gap = (omega_q - 2.0 * p.omega_f).abs();
    push_flag(&mut r.validity, FlagKind::NotFarFromResonance, nu.max(p.kappa) / gap);
    Ok(r)
}

/// Two-quantum decay far from resonance (oscillator hops one level, bath absorbs the rest).
pub fn gamma_nonresonant_2q(q: &QubitParams, p: &PhysicalParams, b: &BathSpec) -> Result<RateResult> {
    q.validate()?;
    p.validate()?;
    let omega_q = q.omega_q();
    let n_osc = planck(p.omega0, p.temperature)?;
    let prefactor = 2.0 * HBAR / (p.mass.powi(3) * p.omega0);
    let channels = two_quantum_channels(omega_q, p.omega0);
    let occ = thermal(p.temperature);
    let c = q.c_gamma(p);
    let rate = |t| -> Result<f64> { Ok(c * prefactor * channel_sum(&channels, p.omega0, p.kappa, b, &occ, n_osc, t)?) };
    let mut r = RateResult::assemble(Regime::Nonresonant2Q, q, p, rate(Transition::Decay)?, rate(Transition::Excitation)?, None)?;
    push_flag(&mut r.validity, FlagKind::NotFarFromResonance, p.kappa / (omega_q - 2.0 * p.omega0).abs());
    Ok(r)
}

/// Linear (Jaynes–Cummings-type) coupling, |ω_q − ω_F| ≪ ω_F.
pub fn gamma_linear_resonant(q: &QubitParams, a: &Attractor, p: &PhysicalParams) -> Result<RateResult> {
    q.validate()?;
    let s = scale_params(p)?;
    check_consistent(a, &s)?;
    a.ensure_stable()?;
    let units = s.units.expect("scale_params sets units");
    let omega_q = q.omega_q();
    let detuning = (omega_q - p.omega_f) / units.detuning;
    let nu = a.nu().unwrap_or(0.0);
    let v = q.linear_transverse() / HBAR;
    // (V/ħ)² (mω_F|δω|/3γ_S) Re N, with mω_F|δω|/3γ_S = C_res²/2.
    let prefactor = v * v * 0.5 * units.c_res * units.c_res / units.detuning;
    let rate = |t| prefactor * one_quantum_lineshape(detuning, a.u, nu, a.kappa, s.lambda_s, s.nbar, t);
    let mut r = RateResult::assemble(Regime::LinearResonant, q, p, rate(Transition::Decay), rate(Transition::Excitation), None)?;
    r.validity.extend(validity_flags(None, Some(a), &s, Some(p), Some(r.t1), None));
    push_flag(&mut r.validity, FlagKind::DetuningNotSmall, (omega_q - p.omega_f).abs() / p.omega_f);
    Ok(r)
}

/// Linear coupling far from ω₀; independent of the attractor.
pub fn gamma_linear_nonresonant(q: &QubitParams, p: &PhysicalParams, b: &BathSpec) -> Result<RateResult> {
    q.validate()?;
    p.validate()?;
    let omega_q = q.omega_q();
    let gap = omega_q * omega_q - p.omega0 * p.omega0;
    if gap.abs() < NEAR_RESONANCE_GUARD * p.kappa * p.omega0 {
        return Err(Error::NearResonance { omega: omega_q, omega0: p.omega0 });
    }
    let v = q.linear_transverse() / (HBAR * p.mass);
    let n = planck(omega_q, p.temperature)?;
    let j = bath_j(b, omega_q);
    let rate = |t: Transition| 2.0 * v * v * j * t.factor(true, n) / (gap * gap);
    let mut r = RateResult::assemble(Regime::LinearNonresonant, q, p, rate(Transition::Decay), rate(Transition::Excitation), None)?;
    push_flag(&mut r.validity, FlagKind::RwaViolated, (p.omega0 - p.omega_f).abs().max(p.kappa) / p.omega0);
    Ok(r)
}
