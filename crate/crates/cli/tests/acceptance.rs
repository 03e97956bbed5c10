//! Acceptance suite: one line per criterion, with tolerances pinned below.
//!
//! Where a criterion's literal wording cannot hold for this model the line
//! reads FAIL together with the measured numbers, and the run exits non-zero
//! only if one of the attainable checks breaks.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use jba_core::attractors::{bifurcation_betas, drift_matrix, solve_attractors, Attractor, Branch};
use jba_core::fluctuations::{attractor_covariance, re_n_minus_plus, re_n_plus_minus, spectrum_point};
use jba_core::model::{planck, scale_params, PhysicalParams, HBAR, K_B};
use jba_core::rates::{
    gamma_linear_nonresonant, gamma_linear_resonant, gamma_nonresonant, gamma_nonresonant_2q, gamma_resonant_1q,
    gamma_resonant_2q, gamma_total_resonant, resonant_1q_scaled, QubitParams, RateResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const BIN: &str = env!("CARGO_BIN_EXE_jba");

const BIFURCATION_TOL: f64 = 1e-10;
const ROUTE_TOL: f64 = 1e-8;
const EM_TOL: f64 = 0.01;
const PEAK_TOL_FACTOR: f64 = 0.5;
const ASYMPTOTE_TOL: f64 = 0.05;
const DOMINANCE: f64 = 100.0;
const SINGLE_CHANNEL_TOL: f64 = 1e-3;
const MATCH_TOL: f64 = 0.05;
const TWO_QUANTUM_TOL: f64 = 0.05;
const SLOPE: (f64, f64) = (0.5, 0.05);
const LYAPUNOV_TOL: f64 = 1e-10;

const W0: f64 = 2.0 * PI * 5.0e9;
const MASS: f64 = 1e-12;

/// Outcome of one criterion. `literal` is false when the stated form is
/// unattainable; `ok` covers everything that is asserted.
struct Outcome {
    ok: bool,
    literal: bool,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, detail: String) -> Self {
        Outcome { ok, literal: true, detail }
    }
}

fn main() {
    let criteria: [(u8, &str, Duration, fn() -> Outcome); 8] = [
        (1, "bifurcation diagram", Duration::from_secs(1), bifurcation),
        (2, "dual-route spectrum", Duration::from_secs(5), dual_route),
        (3, "stochastic oracle", Duration::from_secs(60), stochastic),
        (4, "quasienergy resonances", Duration::from_secs(60), resonances),
        (5, "effective temperature", Duration::from_secs(60), effective_temperature),
        (6, "asymptotic matching", Duration::from_secs(5), matching),
        (7, "two-quantum consistency", Duration::from_secs(60), two_quantum),
        (8, "property suite", Duration::from_secs(60), properties),
    ];
    let mut broken = 0;
    for (id, name, budget, run) in criteria {
        let t0 = Instant::now();
        let out = run();
        let took = t0.elapsed();
        let in_time = took <= budget;
        let verdict = if out.ok && out.literal && in_time { "PASS" } else { "FAIL" };
        let timing = format!("{:.2}s of {}s", took.as_secs_f64(), budget.as_secs());
        println!("criterion {id} {verdict}: {name}: {} [{timing}]", out.detail);
        if !out.ok || !in_time {
            broken += 1;
        }
    }
    if broken > 0 {
        eprintln!("{broken} criteria broke an attainable check");
        std::process::exit(1);
    }
}

// Shared helpers.

fn stable(beta: f64, kappa: f64) -> Vec<Attractor> {
    solve_attractors(beta, kappa).unwrap().into_iter().filter(|a| a.is_stable()).collect()
}

fn branch(beta: f64, kappa: f64, b: Branch) -> Attractor {
    stable(beta, kappa).into_iter().find(|a| a.branch == b).expect("branch exists")
}

fn temperature_for(nbar: f64, omega: f64) -> f64 {
    HBAR * omega / (K_B * (1.0 + 1.0 / nbar).ln())
}

fn lab(beta: f64, kappa: f64, lambda: f64, nbar: f64, ratio: f64) -> PhysicalParams {
    let wf = W0 * (1.0 - ratio);
    PhysicalParams::from_scaled(MASS, W0, wf, beta, kappa, lambda, temperature_for(nbar, wf), 50.0 * W0).unwrap()
}

fn pick(p: &PhysicalParams, large: bool) -> Attractor {
    let s = scale_params(p).unwrap();
    let all = stable(s.beta, s.kappa);
    if large {
        *all.last().unwrap()
    } else {
        all[0]
    }
}

/// Curly bracket and amplitude term of the one-quantum lineshape.
fn bracket(w: f64, u: f64, kappa: f64) -> f64 {
    (w - (2.0 * u - 1.0)).powi(2) + kappa * kappa
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn local_maxima(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    (1..ys.len() - 1).filter(|&i| ys[i] > ys[i - 1] && ys[i] > ys[i + 1]).map(|i| xs[i]).collect()
}

fn argmax(xs: &[f64], ys: &[f64]) -> f64 {
    let i = (0..ys.len()).max_by(|&a, &b| ys[a].total_cmp(&ys[b])).unwrap();
    xs[i]
}

fn grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect()
}

struct Table {
    header: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn meta(&self, key: &str) -> &str {
        &self.header.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no header {key}")).1
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let i = self.columns.iter().position(|c| c == name).unwrap();
        self.rows.iter().map(|r| r[i].parse().unwrap()).collect()
    }
}

/// Pole bracket `lo:hi` from the teff header.
fn bracket_of(t: &Table, key: &str) -> (f64, f64) {
    let (lo, hi) = t.meta(key).split_once(':').unwrap();
    (lo.parse().unwrap(), hi.parse().unwrap())
}

fn jba(args: &[&str]) -> (i32, Table) {
    let out = Command::new(BIN).args(args).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let mut header = Vec::new();
    let mut body = String::new();
    for line in text.lines() {
        match line.strip_prefix("# ") {
            Some(kv) => {
                let (k, v) = kv.split_once('=').unwrap();
                header.push((k.into(), v.into()));
            }
            None => {
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    let mut lines = body.lines();
    let columns = lines.next().unwrap_or("").split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (out.status.code().unwrap(), Table { header, columns, rows })
}

// 1. Bistability window against a direct extremization of β(u).

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    // Minimizes f on [a, b].
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-13 {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

fn bifurcation() -> Outcome {
    let kappa = 0.3;
    let beta_of = |u: f64| u * ((u - 1.0).powi(2) + kappa * kappa);
    let u_max = golden(|u| -beta_of(u), 0.0, 2.0 / 3.0);
    let u_min = golden(beta_of, 2.0 / 3.0, 2.0);
    let w = bifurcation_betas(kappa).window.expect("bistable at κ̃ = 0.3");
    let err = (w.beta_high - beta_of(u_max)).abs().max((w.beta_low - beta_of(u_min)).abs());

    // ν̃ of the merging pair as β approaches each fold from inside.
    let mut gaps = Vec::new();
    for (fold, sign, merging) in [(w.beta_low, 1.0, Branch::LargeAmplitude), (w.beta_high, -1.0, Branch::SmallAmplitude)] {
        let seq: Vec<f64> = [1e-3, 1e-5, 1e-7, 1e-9]
            .iter()
            .map(|d| branch(fold + sign * d, kappa, merging).nu().unwrap())
            .collect();
        gaps.push(seq);
    }
    let gaps_close = gaps.iter().all(|s| s.windows(2).all(|p| p[1] < p[0]) && *s.last().unwrap() < 0.01);
    let at_fold = [w.beta_low, w.beta_high]
        .iter()
        .all(|&b| solve_attractors(b, kappa).unwrap().iter().any(|a| a.marginal && a.nu_sq == 0.0));

    let mut counts_ok = true;
    let (mut small, mut large) = (Vec::new(), Vec::new());
    for beta in grid(0.0, 0.25, 2501) {
        let all = solve_attractors(beta, kappa).unwrap();
        let inside = beta > w.beta_low && beta < w.beta_high;
        if inside && all.len() != 3 || !inside && beta != w.beta_low && beta != w.beta_high && all.len() != 1 {
            counts_ok = false;
        }
        for a in all.iter().filter(|a| a.is_stable()) {
            match a.branch {
                Branch::SmallAmplitude => small.push(a.u),
                Branch::LargeAmplitude => large.push(a.u),
                Branch::Unstable => {}
            }
        }
    }
    let shapes = small[0] == 0.0
        && small.windows(2).all(|p| p[1] > p[0])
        && large.windows(2).all(|p| p[1] > p[0])
        && large[0] > w.u_high - 1e-2;
    let ok = err <= BIFURCATION_TOL && gaps_close && at_fold && counts_ok && shapes;
    Outcome::new(
        ok,
        format!(
            "β_low = {:.12}, β_high = {:.12}, oracle error {err:.1e} (tol {BIFURCATION_TOL:.0e}); ν̃ 1e-9 inside folds = {:.2e}, {:.2e}; 3 states inside, 1 outside: {counts_ok}; branch shapes: {shapes}",
            w.beta_low,
            w.beta_high,
            gaps[0].last().unwrap(),
            gaps[1].last().unwrap()
        ),
    )
}

// 2. Closed form against the matrix route.

fn dual_route() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    let (mut small, mut large) = (0, 0);
    for kappa in [0.05, 0.15, 0.3, 0.45] {
        let w = bifurcation_betas(kappa).window.unwrap();
        let span = w.beta_high - w.beta_low;
        for beta in [0.5 * w.beta_low, w.beta_low + 0.25 * span, w.beta_low + 0.5 * span, w.beta_low + 0.75 * span, 1.5 * w.beta_high]
        {
            for nbar in [0.0, 0.5, 3.0] {
                for a in stable(beta, kappa) {
                    let cov = attractor_covariance(&a, 0.01, nbar).unwrap();
                    let k = drift_matrix(&a);
                    let nu = a.nu().unwrap();
                    let mut ws = grid(-3.0, 3.0, 7);
                    ws.extend([nu, -nu]);
                    for om in ws {
                        let m = spectrum_point(&k, &cov, 0.01, om).unwrap();
                        let pm = re_n_plus_minus(om, a.u, nu, kappa, 0.01, nbar);
                        let mp = re_n_minus_plus(om, a.u, nu, kappa, 0.01, nbar);
                        worst = worst.max(rel(pm, m.re_plus_minus)).max(rel(mp, m.re_minus_plus));
                        count += 1;
                        match a.branch {
                            Branch::SmallAmplitude => small += 1,
                            _ => large += 1,
                        }
                    }
                }
            }
        }
    }
    Outcome::new(
        worst <= ROUTE_TOL && count >= 200 && small > 0 && large > 0,
        format!("{count} points ({small} small, {large} large), max relative difference {worst:.1e} (tol {ROUTE_TOL:.0e})"),
    )
}

// 3. Euler–Maruyama integration of the linearized fluctuations.

fn stochastic() -> Outcome {
    let (beta, kappa, lambda, nbar) = (0.12, 0.3, 0.01, 0.5);
    let a = branch(beta, kappa, Branch::LargeAmplitude);
    let k = drift_matrix(&a);
    let cov = attractor_covariance(&a, lambda, nbar).unwrap();
    let dt = 0.002;
    let burn = (50.0 / kappa / dt) as usize;
    let steps: usize = 400_000_000;
    let noise = (cov.source * dt).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let (k11, k12, k21, k22) = (k[(0, 0)], k[(0, 1)], k[(1, 0)], k[(1, 1)]);
    let (mut x, mut y) = (0.0f64, 0.0f64);
    let step = |rng: &mut ChaCha8Rng, x: &mut f64, y: &mut f64| {
        let (n1, n2): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        let nx = *x + (k11 * *x + k12 * *y) * dt + noise * n1;
        let ny = *y + (k21 * *x + k22 * *y) * dt + noise * n2;
        *x = nx;
        *y = ny;
    };
    for _ in 0..burn {
        step(&mut rng, &mut x, &mut y);
    }
    // Batch means give the statistical error of each moment.
    let batches = 40;
    let per = steps / batches;
    let mut means = Vec::with_capacity(batches);
    for _ in 0..batches {
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for _ in 0..per {
            step(&mut rng, &mut x, &mut y);
            sxx += x * x;
            sxy += x * y;
            syy += y * y;
        }
        let n = per as f64;
        means.push([sxx / n, sxy / n, syy / n]);
    }
    let s = cov.sigma;
    let exact = [s[(0, 0)], s[(0, 1)], s[(1, 1)]];
    let scale = s.norm();
    let mut worst = 0.0f64;
    let mut stderr = 0.0f64;
    for j in 0..3 {
        let m = means.iter().map(|b| b[j]).sum::<f64>() / batches as f64;
        let var = means.iter().map(|b| (b[j] - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
        stderr = stderr.max((var / batches as f64).sqrt() / scale);
        worst = worst.max((m - exact[j]).abs() / scale);
    }
    Outcome::new(
        worst <= EM_TOL,
        format!(
            "large state β = {beta}, κ̃ = {kappa}, λ_S = {lambda}, n̄ = {nbar}; dt = {dt}, {steps} steps; max |ΔΣ|/‖Σ‖ = {:.2}% (tol {:.0}%), batch standard error {:.2}%",
            100.0 * worst,
            100.0 * EM_TOL,
            100.0 * stderr
        ),
    )
}

// 4. Resonances of Γ_e/Γ₀ and Γ_g/Γ₀ at ±ν̃.

struct Curves {
    ws: Vec<f64>,
    ge: Vec<f64>,
    gg: Vec<f64>,
    a: Attractor,
}

fn curves(beta: f64, kappa: f64, b: Branch) -> Curves {
    let a = branch(beta, kappa, b);
    let ws = grid(-3.0, 3.0, 60001);
    let (mut ge, mut gg) = (Vec::new(), Vec::new());
    for &w in &ws {
        let r = resonant_1q_scaled(w, &a, 0.01, 0.5).unwrap();
        ge.push(r.gamma_e);
        gg.push(r.gamma_g);
    }
    Curves { ws, ge, gg, a }
}

fn near(peaks: &[f64], target: f64, tol: f64) -> bool {
    peaks.iter().any(|p| (p - target).abs() <= tol)
}

fn resonances() -> Outcome {
    let cases = [(0.14, Branch::SmallAmplitude), (0.12, Branch::LargeAmplitude)];
    let mut literal = true;
    let mut ok = true;
    let mut notes = Vec::new();
    for (beta, b) in cases {
        let c = curves(beta, 0.3, b);
        let nu = c.a.nu().unwrap();
        let tol = PEAK_TOL_FACTOR * 0.3;
        let (pe, pg) = (local_maxima(&c.ws, &c.ge), local_maxima(&c.ws, &c.gg));
        let both = |p: &[f64]| near(p, nu, tol) && near(p, -nu, tol);
        let ordered = c.ge.iter().zip(&c.gg).all(|(e, g)| e > g);
        literal &= both(&pe) && both(&pg) && ordered;
        // Attainable: each global maximum sits at a resonance, and Γ_e > Γ_g
        // exactly where the bracket outweighs the u² term.
        let global = (argmax(&c.ws, &c.ge), argmax(&c.ws, &c.gg));
        let at_resonance = |x: f64| (x.abs() - nu).abs() <= tol;
        let sign_law = c.ws.iter().enumerate().all(|(i, &w)| {
            let excess = bracket(w, c.a.u, 0.3) - c.a.u * c.a.u;
            excess.abs() < 1e-9 || (c.ge[i] > c.gg[i]) == (excess > 0.0)
        });
        ok &= at_resonance(global.0) && at_resonance(global.1) && sign_law;
        if b == Branch::SmallAmplitude {
            ok &= ordered;
        }
        let inverted: Vec<f64> = c.ws.iter().zip(c.ge.iter().zip(&c.gg)).filter(|(_, (e, g))| e <= g).map(|(w, _)| *w).collect();
        notes.push(format!(
            "{} β = {beta}: ν̃ = {nu:.3}, Γ_e maxima {:?}, Γ_g maxima {:?}, Γ_e ≤ Γ_g on {}",
            b.label(),
            pe.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>(),
            pg.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>(),
            match (inverted.first(), inverted.last()) {
                (Some(lo), Some(hi)) => format!("[{lo:.2}, {hi:.2}]"),
                _ => "nowhere".into(),
            }
        ));
    }
    // Weak damping: every ±ν̃ resonance present and within κ̃/2.
    let kappa = 0.03;
    let mut weak = true;
    for (beta, b) in cases {
        let c = curves(beta, kappa, b);
        let nu = c.a.nu().unwrap();
        for ys in [&c.ge, &c.gg] {
            let p = local_maxima(&c.ws, ys);
            weak &= near(&p, nu, PEAK_TOL_FACTOR * kappa) && near(&p, -nu, PEAK_TOL_FACTOR * kappa);
        }
    }
    ok &= weak;
    Outcome {
        ok,
        literal,
        detail: format!(
            "literal form (maxima at both ±ν̃ for each rate, Γ_e > Γ_g everywhere) {} at κ̃ = 0.3; {}; global maxima within κ̃/2 of ±ν̃ and sign(Γ_e − Γ_g) = sign(bracket − u²): {}; at κ̃ = 0.03 all ±ν̃ maxima present within κ̃/2: {weak}",
            if literal { "holds" } else { "does not hold" },
            notes.join("; "),
            if ok { "yes" } else { "no" }
        ),
    }
}

// 5. Effective temperature sweeps.

fn effective_temperature() -> Outcome {
    let asym = 1.0 / 3f64.ln();
    let mut ok = true;
    let mut notes = Vec::new();

    // Small attractor, ω̃ = −0.2: increases with β, diverges, turns negative.
    let (code, t) = jba(&["teff", "--attractor", "small", "--detuning", "-0.2", "--grid", "0.001:0.18:180"]);
    ok &= code == 0;
    let (betas, temps, us) = (t.col("beta"), t.col("t_eff_scaled"), t.col("u"));
    let (lo, hi) = bracket_of(&t, "pole_small");
    let before: Vec<f64> = betas.iter().zip(&temps).filter(|(b, _)| **b <= lo).map(|(_, t)| *t).collect();
    let after: Vec<f64> = betas.iter().zip(&temps).filter(|(b, _)| **b > lo).map(|(_, t)| *t).collect();
    let shape_small = before.windows(2).all(|w| w[1] > w[0])
        && before.iter().all(|t| *t > 0.0)
        && after.iter().all(|t| *t < 0.0)
        && *before.last().unwrap() > 10.0 * before[0];
    ok &= shape_small;
    let dominant: Vec<f64> = (0..betas.len())
        .filter(|&i| bracket(-0.2, us[i], 0.3) >= DOMINANCE * us[i] * us[i])
        .map(|i| temps[i])
        .collect();
    let pos_err = dominant.iter().map(|t| (t / asym - 1.0).abs()).fold(0.0, f64::max);
    ok &= !dominant.is_empty() && pos_err <= ASYMPTOTE_TOL;
    notes.push(format!(
        "small ω̃ = −0.2: pole in β ∈ [{lo:.4}, {hi:.4}], T* rises {:.3} → {:.1} then negative; +2T asymptote {asym:.4} met to {:.2}% on {} dominance rows",
        before[0],
        before.last().unwrap(),
        100.0 * pos_err,
        dominant.len()
    ));

    // Large attractor, ω̃ = +0.1, swept downward in β.
    let (code, t) = jba(&["teff", "--attractor", "large", "--detuning", "0.1", "--grid", "0.088:0.25:163"]);
    ok &= code == 0;
    let (betas, temps) = (t.col("beta"), t.col("t_eff_scaled"));
    let (lo, hi) = bracket_of(&t, "pole_large");
    let down_before: Vec<f64> = betas.iter().zip(&temps).rev().filter(|(b, _)| **b >= hi).map(|(_, t)| *t).collect();
    let down_after: Vec<f64> = betas.iter().zip(&temps).rev().filter(|(b, _)| **b < hi).map(|(_, t)| *t).collect();
    let shape_large = down_before.windows(2).all(|w| w[1] > w[0])
        && down_before.iter().all(|t| *t > 0.0)
        && !down_after.is_empty()
        && down_after.iter().all(|t| *t < 0.0);
    ok &= shape_large;
    notes.push(format!("large ω̃ = +0.1 (decreasing β): pole in β ∈ [{lo:.4}, {hi:.4}], same rise–pole–negative pattern: {shape_large}"));

    // Negative asymptote where u² dominates: needs u ≳ 3 at κ̃ = 0.3.
    let (code, t) = jba(&["teff", "--attractor", "large", "--detuning", "7", "--grid", "30:45:31"]);
    ok &= code == 0;
    let (temps, us) = (t.col("t_eff_scaled"), t.col("u"));
    let dominant: Vec<f64> =
        (0..temps.len()).filter(|&i| us[i] * us[i] >= DOMINANCE * bracket(7.0, us[i], 0.3)).map(|i| temps[i]).collect();
    let neg_err = dominant.iter().map(|t| (t / -asym - 1.0).abs()).fold(0.0, f64::max);
    ok &= !dominant.is_empty() && neg_err <= ASYMPTOTE_TOL;
    notes.push(format!(
        "−2T asymptote at ω̃ = 7, β ∈ [30, 45] met to {:.2}% on {} rows",
        100.0 * neg_err,
        dominant.len()
    ));

    // Single open nonresonant channel.
    let mut p = lab(0.12, 0.3, 0.01, 0.5, 0.01);
    let a = pick(&p, true);
    let wq = 3.0 * p.omega0;
    p.omega_c = wq;
    let q = QubitParams::with_frequency(wq, 1e-3 * p.omega0, 1e6).unwrap();
    let r = gamma_nonresonant(&q, &a, &p, &p.ohmic_bath()).unwrap();
    let up = rel(r.t_eff, p.temperature * wq / (wq - p.omega_f));
    let wq = 0.3 * p.omega0;
    p.omega_c = 1.1 * p.omega0;
    let q = QubitParams::with_frequency(wq, 1e-4 * p.omega0, 1e6).unwrap();
    let r = gamma_nonresonant(&q, &a, &p, &p.ohmic_bath()).unwrap();
    let down = rel(r.t_eff, -p.temperature * wq / (p.omega_f - wq));
    ok &= up <= SINGLE_CHANNEL_TOL && down <= SINGLE_CHANNEL_TOL && r.t_eff < 0.0;
    notes.push(format!(
        "single channel T·ω_q/(ω_q−ω_F) to {up:.1e}, −T·ω_q/(ω_F−ω_q) to {down:.1e} (tol {SINGLE_CHANNEL_TOL:.0e})"
    ));
    Outcome::new(ok, notes.join("; "))
}

// 6. Resonant vs nonresonant rates through the CLI.

fn matching() -> Outcome {
    let (code, t) = jba(&["match", "--h", "10,30,100"]);
    let (de, dg) = (t.col("deviation_e"), t.col("deviation_g"));
    let dev: Vec<f64> = de.iter().zip(&dg).map(|(e, g)| e.abs().max(g.abs())).collect();
    let monotone = dev.windows(2).all(|w| w[1] < w[0]);
    let ok = code == 0 && monotone && dev.len() == 3 && de[2].abs() < MATCH_TOL && dg[2].abs() < MATCH_TOL;
    Outcome::new(
        ok,
        format!(
            "|Γ_e ratio − 1| = {:.1e}, {:.1e}, {:.1e}; |Γ_g ratio − 1| = {:.1e}, {:.1e}, {:.1e} at h = 10, 30, 100 (tol {MATCH_TOL} at h = 100); exit {code}",
            de[0].abs(),
            de[1].abs(),
            de[2].abs(),
            dg[0].abs(),
            dg[1].abs(),
            dg[2].abs()
        ),
    )
}

// 7. Nonresonant two-quantum rate against the resonant two-quantum lineshape.

fn two_quantum() -> Outcome {
    let mut p = lab(0.12, 0.3, 0.01, 0.5, 0.01);
    p.kappa = 1e-5 * p.omega0;
    let b = p.ohmic_bath();
    let n0 = planck(p.omega0, p.temperature).unwrap();
    let mut worst = 0.0f64;
    for i in 0..=20 {
        let d = 20.0 * p.kappa * 10f64.powf(0.1 * i as f64);
        for sign in [1.0, -1.0] {
            let q = QubitParams::with_frequency(2.0 * p.omega0 + sign * d, 1e-3 * p.omega0, 1e6).unwrap();
            let far = gamma_nonresonant_2q(&q, &p, &b).unwrap();
            let near = gamma_resonant_2q(&q, &p, n0).unwrap();
            worst = worst.max(rel(far.gamma_e, near.gamma_e)).max(rel(far.gamma_g, near.gamma_g));
        }
    }
    Outcome::new(
        worst <= TWO_QUANTUM_TOL,
        format!("κ = 1e-5 ω₀, |ω_q − 2ω₀| from 20κ to 2000κ, both signs, 42 points: max relative difference {:.2}% (tol {:.0}%)", 100.0 * worst, 100.0 * TWO_QUANTUM_TOL),
    )
}

// 8. Properties.

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Every SI channel for one qubit frequency set; `scale` multiplies all couplings.
fn all_channels(p: &PhysicalParams, a: &Attractor, scale: f64) -> Vec<(&'static str, RateResult)> {
    let b = p.ohmic_bath();
    let dw = p.omega0 - p.omega_f;
    let n0 = planck(p.omega0, p.temperature).unwrap();
    let res = QubitParams::with_frequency(2.0 * p.omega_f + 0.4 * dw, 1e-3 * p.omega0, scale * 1e6).unwrap();
    let two = QubitParams::with_frequency(2.0 * p.omega0 + 0.5 * dw, 1e-3 * p.omega0, scale * 1e6).unwrap();
    let far = QubitParams::with_frequency(3.3 * p.omega0, 1e-3 * p.omega0, scale * 1e6).unwrap();
    let lin_far = QubitParams { v_x: scale * 2e-20, v_z: scale * 1e-20, ..far };
    let lin_res = QubitParams {
        v_x: scale * 2e-20,
        v_z: scale * 1e-20,
        ..QubitParams::with_frequency(p.omega_f + 0.4 * dw, 1e-3 * p.omega0, 0.0).unwrap()
    };
    vec![
        ("resonant-1q", gamma_resonant_1q(&res, a, p).unwrap()),
        ("combined", gamma_total_resonant(&res, a, p).unwrap()),
        ("resonant-2q", gamma_resonant_2q(&two, p, n0).unwrap()),
        ("nonresonant", gamma_nonresonant(&far, a, p, &b).unwrap()),
        ("nonresonant-2q", gamma_nonresonant_2q(&far, p, &b).unwrap()),
        ("linear-resonant", gamma_linear_resonant(&lin_res, a, p).unwrap()),
        ("linear-nonresonant", gamma_linear_nonresonant(&lin_far, p, &b).unwrap()),
    ]
}

fn properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut notes = Vec::new();

    // Positivity of spectra and scaled rates, Lyapunov residual.
    let (mut positive, mut worst_lyap, mut samples) = (true, 0.0f64, 0);
    while samples < 2000 {
        let kappa = rng.random_range(0.02..0.55);
        let beta = rng.random_range(0.0..0.5);
        let nbar = rng.random_range(0.0..4.0);
        let w = rng.random_range(-4.0..4.0);
        for a in stable(beta, kappa).into_iter().filter(|a| a.nu_sq > 1e-6) {
            let cov = attractor_covariance(&a, 0.01, nbar).unwrap();
            let k = drift_matrix(&a);
            worst_lyap = worst_lyap.max(cov.residual(&k));
            let m = spectrum_point(&k, &cov, 0.01, w).unwrap();
            let nu = a.nu().unwrap();
            let r = resonant_1q_scaled(w, &a, 0.01, nbar).unwrap();
            let tiny = 1e-14 * m.n.norm();
            positive &= re_n_plus_minus(w, a.u, nu, kappa, 0.01, nbar) > 0.0
                && re_n_minus_plus(w, a.u, nu, kappa, 0.01, nbar) >= 0.0
                && m.re_plus_minus > -tiny
                && m.re_minus_plus > -tiny
                && r.gamma_e > 0.0
                && r.gamma_g >= 0.0;
            samples += 1;
        }
    }
    notes.push(format!("{samples} random spectra positive: {positive}; max Lyapunov residual {worst_lyap:.1e} (tol {LYAPUNOV_TOL:.0e})"));

    // SI channels: positivity, coupling-squared scaling, swap symmetry.
    let (mut si_positive, mut worst_scale) = (true, 0.0f64);
    let mut swap_err = 0.0f64;
    for _ in 0..20 {
        let beta = rng.random_range(0.095..0.17);
        let nbar = rng.random_range(0.2..3.0);
        let p = lab(beta, 0.3, 0.01, nbar, 0.01);
        for large in [false, true] {
            let a = pick(&p, large);
            let base = all_channels(&p, &a, 1.0);
            let scaled = all_channels(&p, &a, 3.7);
            for ((_, r1), (_, r2)) in base.iter().zip(&scaled) {
                si_positive &= r1.gamma_e > 0.0 && r1.gamma_g >= 0.0;
                worst_scale = worst_scale.max(rel(r2.gamma_e, 3.7 * 3.7 * r1.gamma_e)).max(rel(r2.gamma_g, 3.7 * 3.7 * r1.gamma_g));
            }
            // One-quantum channels: each factor pair differs by exactly one
            // quantum, so Γ_e − Γ_g cannot depend on temperature.
            let mut hot = p;
            hot.temperature *= 2.5;
            let hot_a = a;
            let warm = all_channels(&hot, &hot_a, 1.0);
            let one_quantum = ["nonresonant", "linear-nonresonant"];
            for ((name, r1), (_, r2)) in base.iter().zip(&warm) {
                if one_quantum.contains(name) {
                    swap_err = swap_err.max(rel(r1.gamma_e - r1.gamma_g, r2.gamma_e - r2.gamma_g));
                }
            }
            // Two-quantum resonance: both factors swap, ratio (n/(n+1))².
            let (_, two) = &base[2];
            let n0 = planck(p.omega0, p.temperature).unwrap();
            swap_err = swap_err.max(rel(two.gamma_g / two.gamma_e, (n0 / (n0 + 1.0)).powi(2)));
        }
        // Scaled one-quantum lineshape: Γ_e − Γ_g independent of n̄.
        let a = pick(&p, true);
        let w = rng.random_range(-2.0..2.0);
        let r1 = resonant_1q_scaled(w, &a, 0.01, nbar).unwrap();
        let r2 = resonant_1q_scaled(w, &a, 0.01, 2.0 * nbar + 1.0).unwrap();
        swap_err = swap_err.max(rel(r1.gamma_e - r1.gamma_g, r2.gamma_e - r2.gamma_g));
    }
    // Two-quantum nonresonant: no excitation at T = 0; ratio (n/(n+1))² close to 2ω₀.
    let mut p = lab(0.12, 0.3, 0.01, 0.5, 0.01);
    p.kappa = 1e-5 * p.omega0;
    let q = QubitParams::with_frequency(2.0 * p.omega0 + 20.0 * p.kappa, 1e-3 * p.omega0, 1e6).unwrap();
    let r = gamma_nonresonant_2q(&q, &p, &p.ohmic_bath()).unwrap();
    let n0 = planck(p.omega0, p.temperature).unwrap();
    let ratio_err = rel(r.gamma_g / r.gamma_e, (n0 / (n0 + 1.0)).powi(2));
    let mut cold = p;
    cold.temperature = 0.0;
    let zero = gamma_nonresonant_2q(&q, &cold, &cold.ohmic_bath()).unwrap().gamma_g;
    let swap_ok = swap_err < 1e-9 && ratio_err < 1e-3 && zero == 0.0;
    notes.push(format!(
        "7 SI channels positive: {si_positive}; Δ_q² and V² scaling exact to {worst_scale:.1e}; n̄-swap: one-quantum Γ_e − Γ_g temperature-independent and two-quantum (n/(n+1))² to {swap_err:.1e}, nonresonant two-quantum ratio to {ratio_err:.1e}, Γ_g = 0 at T = 0"
    ));

    // Detailed balance in the linear nonresonant channel.
    let mut db = 0.0f64;
    for _ in 0..200 {
        let mut p = lab(0.12, 0.3, 0.01, 0.5, 0.01);
        p.temperature = rng.random_range(0.005..1.0);
        let f = rng.random_range(0.1..0.8);
        let q = QubitParams { v_x: 1e-20, ..QubitParams::with_frequency(f * p.omega0, 1e-4 * p.omega0, 0.0).unwrap() };
        let r = gamma_linear_nonresonant(&q, &p, &p.ohmic_bath()).unwrap();
        db = db.max(rel(r.t_eff, p.temperature));
    }
    notes.push(format!("linear nonresonant T_eff = T to {db:.1e}"));

    // Scaling at both folds.
    let kappa = 0.3;
    let w = bifurcation_betas(kappa).window.unwrap();
    let ds: Vec<f64> = (0..9).map(|i| 1e-8 * 10f64.powf(0.5 * i as f64)).collect();
    let logd: Vec<f64> = ds.iter().map(|d| d.ln()).collect();
    let mut fits = Vec::new();
    for (fold, sign, merging) in [(w.beta_low, 1.0, Branch::LargeAmplitude), (w.beta_high, -1.0, Branch::SmallAmplitude)] {
        let states: Vec<Attractor> = ds.iter().map(|d| branch(fold + sign * d, kappa, merging)).collect();
        let nu: Vec<f64> = states.iter().map(|a| a.nu().unwrap().ln()).collect();
        let nu_sq: Vec<f64> = states.iter().map(|a| a.nu_sq.ln()).collect();
        // Width of the slow spectral peak: the smaller drift decay rate.
        let width: Vec<f64> = states.iter().map(|a| (kappa - (kappa * kappa - a.nu_sq).sqrt()).ln()).collect();
        fits.push((slope(&logd, &nu), slope(&logd, &nu_sq), slope(&logd, &width)));
    }
    let literal = fits.iter().all(|f| (f.0 - SLOPE.0).abs() <= SLOPE.1);
    let corrected = fits.iter().all(|f| (f.1 - SLOPE.0).abs() <= SLOPE.1 && (f.2 - SLOPE.0).abs() <= SLOPE.1);
    notes.push(format!(
        "fold slopes vs |β − β_b| (low, high): ν̃ {:.3}, {:.3} (literal 0.5 ± 0.05 {}); ν̃² {:.3}, {:.3} and peak width {:.3}, {:.3} (0.5 ± 0.05)",
        fits[0].0,
        fits[1].0,
        if literal { "met" } else { "not met: ν̃ ∝ |β − β_b|^(1/4)" },
        fits[0].1,
        fits[1].1,
        fits[0].2,
        fits[1].2
    ));

    let ok = positive
        && worst_lyap < LYAPUNOV_TOL
        && si_positive
        && worst_scale < 1e-12
        && swap_ok
        && db < 1e-9
        && corrected;
    Outcome { ok, literal, detail: notes.join("; ") }
}
