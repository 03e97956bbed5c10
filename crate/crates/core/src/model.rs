//! Laboratory parameters, the rotating-frame scaling and the bath spectrum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Laboratory-frame constants of the driven oscillator and its bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Oscillator mass, kg.
    pub mass: f64,
    /// Eigenfrequency ω₀ (already renormalized by the bath), rad/s.
    pub omega0: f64,
    /// Drive frequency ω_F, rad/s.
    pub omega_f: f64,
    /// Quartic (softening) coefficient γ_S, J/m⁴.
    pub gamma_s: f64,
    /// Drive amplitude F₀, N.
    pub f0: f64,
    /// Damping κ, rad/s.
    pub kappa: f64,
    /// Bath temperature, K.
    pub temperature: f64,
    /// Ohmic cutoff ω_c, rad/s.
    pub omega_c: f64,
}

impl PhysicalParams {
    /// Signed drive detuning δω = ω_F − ω₀.
    pub fn detuning(&self) -> f64 {
        self.omega_f - self.omega0
    }

    pub fn validate(&self) -> Result<()> {
        positive("mass", self.mass)?;
        positive("omega0", self.omega0)?;
        positive("omega_f", self.omega_f)?;
        positive("gamma_s", self.gamma_s)?;
        positive("kappa", self.kappa)?;
        if !self.f0.is_finite() {
            return Err(Error::param("f0", "must be finite"));
        }
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(Error::param("temperature", format!("must be finite and >= 0, got {}", self.temperature)));
        }
        if !(self.omega_c > self.omega0) {
            return Err(Error::param("omega_c", format!("cutoff {} must exceed omega0 {}", self.omega_c, self.omega0)));
        }
        if !(self.detuning() < 0.0) {
            return Err(Error::param(
                "omega_f",
                format!(
                    "soft Duffing oscillator is bistable only for ω_F < ω₀ (got ω_F − ω₀ = {})",
                    self.detuning()
                ),
            ));
        }
        Ok(())
    }

    /// Builds laboratory parameters that reproduce the given dimensionless set.
    ///
    /// `mass`, `omega0`, `omega_f`, `temperature` and `omega_c` are taken as
    /// given; γ_S is fixed by λ_S, F₀ by β and κ by κ̃.
    #[allow(clippy::too_many_arguments)]
    pub fn from_scaled(
        mass: f64,
        omega0: f64,
        omega_f: f64,
        beta: f64,
        kappa_scaled: f64,
        lambda_s: f64,
        temperature: f64,
        omega_c: f64,
    ) -> Result<Self> {
        let dw = omega0 - omega_f;
        if !(dw > 0.0) {
            return Err(Error::param("omega_f", "must be below omega0"));
        }
        positive("lambda_s", lambda_s)?;
        if !(beta >= 0.0) {
            return Err(Error::param("beta", "must be >= 0"));
        }
        let gamma_s = 2.0 * lambda_s * mass * mass * omega_f * omega_f * dw / (3.0 * HBAR);
        let f0 = (2.0 * beta * (mass * omega_f * dw).powi(3) / (3.0 * gamma_s)).sqrt();
        let p = PhysicalParams {
            mass,
            omega0,
            omega_f,
            gamma_s,
            f0,
            kappa: kappa_scaled * dw,
            temperature,
            omega_c,
        };
        p.validate()?;
        Ok(p)
    }

    /// The Ohmic bath implied by κ, m and ω_c.
    pub fn ohmic_bath(&self) -> BathSpec {
        BathSpec::ohmic(self.kappa, self.mass, self.omega_c)
    }
}

/// Conversion factors between scaled and laboratory quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    /// |δω| = ω₀ − ω_F, rad/s. Scaled frequencies are multiples of this.
    pub detuning: f64,
    /// Resonant amplitude scale C_res, m.
    pub c_res: f64,
}

/// Dimensionless rotating-frame parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    /// Drive intensity β.
    pub beta: f64,
    /// Damping κ̃ = κ/|δω|.
    pub kappa: f64,
    /// Effective Planck constant λ_S.
    pub lambda_s: f64,
    /// Planck occupation at the drive frequency.
    pub nbar: f64,
    /// Present when the set was derived from laboratory parameters.
    pub units: Option<Units>,
}

impl ScaledParams {
    /// A purely dimensionless parameter set with no laboratory scale attached.
    pub fn dimensionless(beta: f64, kappa: f64, lambda_s: f64, nbar: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::param("beta", format!("must be finite and >= 0, got {beta}")));
        }
        positive("kappa_scaled", kappa)?;
        positive("lambda_s", lambda_s)?;
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::param("nbar", format!("must be finite and >= 0, got {nbar}")));
        }
        Ok(ScaledParams { beta, kappa, lambda_s, nbar, units: None })
    }

    /// Area of the fluctuation cloud, λ_S(2n̄+1); must be small for the Gaussian theory.
    pub fn semiclassical_parameter(&self) -> f64 {
        self.lambda_s * (2.0 * self.nbar + 1.0)
    }
}

/// Maps laboratory parameters onto the rotating-frame dimensionless set.
pub fn scale_params(p: &PhysicalParams) -> Result<ScaledParams> {
    p.validate()?;
    let dw = p.omega0 - p.omega_f;
    let m_wf = p.mass * p.omega_f;
    let beta = 3.0 * p.gamma_s * p.f0 * p.f0 / (2.0 * (m_wf * dw).powi(3));
    let lambda_s = 3.0 * HBAR * p.gamma_s / (2.0 * m_wf * m_wf * dw);
    let c_res = (2.0 * m_wf * dw / (3.0 * p.gamma_s)).sqrt();
    Ok(ScaledParams {
        beta,
        kappa: p.kappa / dw,
        lambda_s,
        nbar: planck(p.omega_f, p.temperature)?,
        units: Some(Units { detuning: dw, c_res }),
    })
}

/// Bose occupation 1/(e^{ħω/k_BT} − 1).
pub fn planck(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::param("omega", format!("occupation needs ω > 0, got {omega}")));
    }
    if !(temperature >= 0.0) {
        return Err(Error::param("temperature", format!("must be >= 0, got {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (HBAR * omega / (K_B * temperature)).exp_m1())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BathKind {
    /// J(ω) = 2ħmκω Θ(ω_c − ω).
    Ohmic,
    /// Piecewise-linear J(ω) through sorted (ω, J) samples.
    Tabulated(Vec<(f64, f64)>),
}

/// Spectral density of the bath weighted with its coupling to the oscillator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub kind: BathKind,
    pub kappa: f64,
    pub mass: f64,
    pub omega_c: f64,
}

impl BathSpec {
    pub fn ohmic(kappa: f64, mass: f64, omega_c: f64) -> Self {
        BathSpec { kind: BathKind::Ohmic, kappa, mass, omega_c }
    }

    /// A tabulated spectrum. Frequencies must be non-negative and strictly increasing,
    /// densities non-negative.
    pub fn tabulated(kappa: f64, mass: f64, table: Vec<(f64, f64)>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::BathTable("empty table".into()));
        }
        for (i, &(w, j)) in table.iter().enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::BathTable(format!("entry {i}: frequency {w} is negative or not finite")));
            }
            if !(j >= 0.0) || !j.is_finite() {
                return Err(Error::BathTable(format!("entry {i}: density {j} is negative or not finite")));
            }
        }
        if let Some(i) = table.windows(2).position(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::BathTable(format!("frequencies not strictly increasing at entry {}", i + 1)));
        }
        let omega_c = table.last().map(|e| e.0).unwrap_or(0.0);
        Ok(BathSpec { kind: BathKind::Tabulated(table), kappa, mass, omega_c })
    }
}

/// Evaluates the bath spectral density; zero for negative frequencies.
pub fn bath_j(b: &BathSpec, omega: f64) -> f64 {
    if !(omega > 0.0) {
        return 0.0;
    }
    match &b.kind {
        BathKind::Ohmic => {
            if omega < b.omega_c {
                2.0 * HBAR * b.mass * b.kappa * omega
            } else {
                0.0
            }
        }
        BathKind::Tabulated(table) => {
            let first = table[0];
            let last = table[table.len() - 1];
            if omega < first.0 || omega > last.0 {
                return 0.0;
            }
            let k = table.partition_point(|e| e.0 <= omega);
            if k == 0 || k == table.len() {
                return if k == table.len() { last.1 } else { first.1 };
            }
            let (w0, j0) = table[k - 1];
            let (w1, j1) = table[k];
            j0 + (j1 - j0) * (omega - w0) / (w1 - w0)
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}
