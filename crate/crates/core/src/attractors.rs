//! Forced-vibration steady states in the rotating frame.
//!
//! With u = r_a² the stationary points solve the cubic
//! `u[(u − 1)² + κ̃²] = β`. For κ̃² < 1/3 there is a window of β with three
//! real roots: the small- and large-amplitude attractors and the saddle
//! between them.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// |ν̃²| below which a root is treated as sitting on a bifurcation point.
pub const MARGINAL_NU_SQ: f64 = 1e-12;

const ROOT_RTOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    SmallAmplitude,
    LargeAmplitude,
    Unstable,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::SmallAmplitude => "small",
            Branch::LargeAmplitude => "large",
            Branch::Unstable => "unstable",
        }
    }
}

/// One stationary state of the rotating-frame drift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attractor {
    /// Squared scaled radius r_a².
    pub u: f64,
    /// Quadrature Q_a.
    pub q: f64,
    /// Quadrature P_a.
    pub p: f64,
    /// ν̃_a² = κ̃² + 3u² − 4u + 1, the determinant of the drift matrix.
    /// Negative on the saddle.
    pub nu_sq: f64,
    pub branch: Branch,
    /// Double root at a bifurcation point (ν̃_a = 0).
    pub marginal: bool,
    pub beta: f64,
    pub kappa: f64,
    /// Eigenvalues of the drift matrix, units of |δω|.
    pub drift_eigenvalues: [Complex64; 2],
}

impl Attractor {
    fn new(u: f64, beta: f64, kappa: f64, branch: Branch, marginal: bool) -> Self {
        let (q, p) = if beta > 0.0 {
            let s = beta.sqrt();
            (u * (u - 1.0) / s, -kappa * u / s)
        } else {
            (0.0, 0.0)
        };
        let nu_sq = if marginal { 0.0 } else { drift_determinant(u, kappa) };
        let disc = Complex64::new(kappa * kappa - nu_sq, 0.0).sqrt();
        Attractor {
            u,
            q,
            p,
            nu_sq,
            branch,
            marginal,
            beta,
            kappa,
            drift_eigenvalues: [-kappa + disc, -kappa - disc],
        }
    }

    /// Quasienergy gap ν̃_a; `None` on the saddle.
    pub fn nu(&self) -> Option<f64> {
        (self.nu_sq >= 0.0).then(|| self.nu_sq.sqrt())
    }

    pub fn is_stable(&self) -> bool {
        self.branch != Branch::Unstable && !self.marginal && self.nu_sq > 0.0
    }

    /// Fails unless the linearized theory applies at this state.
    pub fn ensure_stable(&self) -> Result<()> {
        if self.marginal || self.nu_sq.abs() <= MARGINAL_NU_SQ {
            Err(Error::MarginalAttractor { u: self.u, nu_sq: self.nu_sq })
        } else if self.nu_sq < 0.0 || self.branch == Branch::Unstable {
            Err(Error::UnstableAttractor { u: self.u, nu_sq: self.nu_sq })
        } else {
            Ok(())
        }
    }

    /// Residual of the stationarity condition, `u((u−1)² + κ̃²) − β`.
    pub fn residual(&self) -> f64 {
        response(self.u, self.kappa) - self.beta
    }
}

/// Edges of the bistability window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BistabilityWindow {
    /// Lower edge, where the large-amplitude branch is born with the saddle.
    pub beta_low: f64,
    /// Upper edge, where the small-amplitude branch merges with the saddle.
    pub beta_high: f64,
    /// r² at which dβ/du = 0 on the small-amplitude side (the double root at `beta_high`).
    pub u_low: f64,
    /// r² at which dβ/du = 0 on the large-amplitude side (the double root at `beta_low`).
    pub u_high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationInfo {
    pub kappa: f64,
    pub window: Option<BistabilityWindow>,
}

impl BifurcationInfo {
    pub fn bistable(&self) -> bool {
        self.window.is_some()
    }

    /// True when β lies strictly inside the bistability window.
    pub fn contains(&self, beta: f64) -> bool {
        self.window.is_some_and(|w| beta > w.beta_low && beta < w.beta_high)
    }
}

/// β as a function of u: `u((u − 1)² + κ̃²)`.
pub fn response(u: f64, kappa: f64) -> f64 {
    let d = u - 1.0;
    u * (d * d + kappa * kappa)
}

/// dβ/du, which equals the drift-matrix determinant at a stationary point.
pub fn drift_determinant(u: f64, kappa: f64) -> f64 {
    kappa * kappa + (u - 1.0) * (3.0 * u - 1.0)
}

pub fn bifurcation_betas(kappa: f64) -> BifurcationInfo {
    let disc = 1.0 - 3.0 * kappa * kappa;
    let window = (disc > 4.0 * f64::EPSILON).then(|| {
        let s = disc.sqrt();
        let u_low = (2.0 - s) / 3.0;
        let u_high = (2.0 + s) / 3.0;
        BistabilityWindow {
            beta_low: response(u_high, kappa),
            beta_high: response(u_low, kappa),
            u_low,
            u_high,
        }
    });
    BifurcationInfo { kappa, window }
}

/// All stationary states at drive intensity β and damping κ̃, sorted by u.
///
/// Returns one state outside the bistability window and three inside it.
/// Exactly on a window edge the merged pair is returned once, flagged
/// `marginal`, next to the surviving attractor.
pub fn solve_attractors(beta: f64, kappa: f64) -> Result<Vec<Attractor>> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::param("beta", format!("must be finite and >= 0, got {beta}")));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::param("kappa_scaled", format!("must be finite and > 0, got {kappa}")));
    }
    if beta == 0.0 {
        return Ok(vec![Attractor::new(0.0, 0.0, kappa, Branch::SmallAmplitude, false)]);
    }

    let info = bifurcation_betas(kappa);
    let u_max = 1.0 + beta.cbrt() + 1e-9;

    let Some(w) = info.window else {
        // Monotone response: a single root. At κ̃² = 1/3 it may be a triple root.
        let u = polish(beta, kappa, closed_form_roots(beta, kappa)[0], 0.0, u_max);
        let marginal = drift_determinant(u, kappa).abs() <= MARGINAL_NU_SQ;
        let branch = if u < 2.0 / 3.0 { Branch::SmallAmplitude } else { Branch::LargeAmplitude };
        return Ok(vec![Attractor::new(u, beta, kappa, branch, marginal)]);
    };

    let edge = 8.0 * f64::EPSILON;
    if (beta - w.beta_high).abs() <= edge * w.beta_high {
        // Roots sum to 2, so the simple root is 2 − 2u_low.
        let large = polish(beta, kappa, 2.0 - 2.0 * w.u_low, w.u_high, u_max);
        return Ok(vec![
            Attractor::new(w.u_low, beta, kappa, Branch::SmallAmplitude, true),
            Attractor::new(large, beta, kappa, Branch::LargeAmplitude, false),
        ]);
    }
    if (beta - w.beta_low).abs() <= edge * w.beta_low {
        let small = polish(beta, kappa, 2.0 - 2.0 * w.u_high, 0.0, w.u_low);
        return Ok(vec![
            Attractor::new(small, beta, kappa, Branch::SmallAmplitude, false),
            Attractor::new(w.u_high, beta, kappa, Branch::LargeAmplitude, true),
        ]);
    }

    let guesses = closed_form_roots(beta, kappa);
    let guess_near = |lo: f64, hi: f64| {
        guesses
            .iter()
            .copied()
            .find(|g| *g >= lo && *g <= hi)
            .unwrap_or(0.5 * (lo + hi))
    };
    let mut out = Vec::with_capacity(3);
    if beta < w.beta_high {
        let u = polish(beta, kappa, guess_near(0.0, w.u_low), 0.0, w.u_low);
        out.push(Attractor::new(u, beta, kappa, Branch::SmallAmplitude, false));
    }
    if beta > w.beta_low && beta < w.beta_high {
        let u = polish(beta, kappa, guess_near(w.u_low, w.u_high), w.u_low, w.u_high);
        out.push(Attractor::new(u, beta, kappa, Branch::Unstable, false));
    }
    if beta > w.beta_low {
        let u = polish(beta, kappa, guess_near(w.u_high, u_max), w.u_high, u_max);
        out.push(Attractor::new(u, beta, kappa, Branch::LargeAmplitude, false));
    }
    Ok(out)
}

/// Real roots of u³ − 2u² + (1+κ̃²)u − β from the trigonometric / Cardano forms,
/// sorted ascending. Accuracy degrades near double roots; callers polish.
fn closed_form_roots(beta: f64, kappa: f64) -> Vec<f64> {
    let k2 = kappa * kappa;
    let p = k2 - 1.0 / 3.0;
    let q = -16.0 / 27.0 + 2.0 * (1.0 + k2) / 3.0 - beta;
    // The discriminant of the cubic equals 27 (β − β_low)(β_high − β); its sign
    // is read off the window directly.
    let three = bifurcation_betas(kappa).contains(beta);
    let mut roots = if three {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * PI * k as f64 / 3.0).cos() + 2.0 / 3.0)
            .collect::<Vec<_>>()
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() + 2.0 / 3.0]
    };
    roots.sort_by(f64::total_cmp);
    roots
}

/// Safeguarded Newton iteration inside a bracket where f changes sign.
fn polish(beta: f64, kappa: f64, guess: f64, lo: f64, hi: f64) -> f64 {
    let rising = response(hi, kappa) >= response(lo, kappa);
    let f = |u: f64| {
        let v = response(u, kappa) - beta;
        if rising { v } else { -v }
    };
    let (mut lo, mut hi) = (lo, hi);
    let mut u = if guess.is_finite() { guess.clamp(lo, hi) } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        let fu = f(u);
        if fu == 0.0 {
            return u;
        }
        if fu < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let df = if rising { drift_determinant(u, kappa) } else { -drift_determinant(u, kappa) };
        let newton = u - fu / df;
        let next = if df != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let step = (next - u).abs();
        u = next;
        if step <= ROOT_RTOL * u.abs().max(f64::MIN_POSITIVE) || hi - lo <= ROOT_RTOL * hi.abs() {
            break;
        }
    }
    u
}

/// Linearization of the drift around a stationary state, units of |δω|.
///
/// Rows/columns are ordered (Q, P).
pub fn drift_matrix(a: &Attractor) -> Matrix2<f64> {
    let (q, p, u, k) = (a.q, a.p, a.u, a.kappa);
    Matrix2::new(
        -2.0 * p * q - k,
        -(u - 1.0 + 2.0 * p * p),
        u - 1.0 + 2.0 * q * q,
        2.0 * q * p - k,
    )
}
