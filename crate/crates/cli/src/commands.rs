//! Subcommand implementations. Each builds a [`Table`]; rows are evaluated in
//! parallel and collected in sweep order.

use rayon::prelude::*;

use jba_core::attractors::{bifurcation_betas, drift_matrix, solve_attractors, Attractor, Branch};
use jba_core::fluctuations::{attractor_covariance, re_n_minus_plus, re_n_plus_minus, spectrum_point};
use jba_core::model::{planck, PhysicalParams, ScaledParams};
use jba_core::rates::{
    effective_temperature, gamma_linear_nonresonant, gamma_linear_resonant, gamma_nonresonant, gamma_nonresonant_2q,
    gamma_resonant_1q, gamma_resonant_2q, gamma_total_resonant, resonant_1q_scaled, scaled_effective_temperature,
    validity_flags, RateResult, Regime, ValidityFlag,
};

use crate::config::{
    AttractorsArgs, Cli, Command, Common, MatchArgs, RatesArgs, Selection, Setup, SpectrumArgs, SweepVar,
    TeffArgs, ValidateArgs,
};
use crate::error::{input, CliError, Result};
use crate::matching::{converges, match_point};
use crate::output::{format_f64, Cell, Table};
use crate::sweep::GridSpec;

/// Dual-route tolerance applied by `--check`.
pub const CHECK_TOL: f64 = 1e-6;
/// Tolerances of the `validate` subcommand.
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const ROUTE_TOL: f64 = 1e-8;

pub struct Report {
    pub table: Table,
    /// Set when a self-check failed; the table is still written.
    pub check_failure: Option<String>,
    /// Whether flagged rows deserve a warning on stderr.
    pub warn_flags: bool,
}

impl Report {
    fn new(table: Table) -> Self {
        Report { table, check_failure: None, warn_flags: true }
    }
}

pub fn execute(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Attractors(a) => attractors(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Rates(a) => rates(a),
        Command::Teff(a) => teff(a),
        Command::Match(a) => matching(a),
        Command::Validate(a) => validate(a),
    }
}

type Values = (Vec<Cell>, Vec<String>);

fn fatal_label(e: &jba_core::Error) -> &'static str {
    match e {
        jba_core::Error::MarginalAttractor { .. } => "marginal-attractor",
        jba_core::Error::UnstableAttractor { .. } => "unstable-attractor",
        jba_core::Error::NotPositiveDefinite(_) => "not-positive-definite",
        jba_core::Error::NearResonance { .. } => "near-resonance",
        _ => "error",
    }
}

fn labels(v: &[ValidityFlag]) -> Vec<String> {
    v.iter().map(|f| f.kind.label().to_string()).collect()
}

/// Evaluates `eval` for every item in parallel and appends one row per item:
/// key cells, value cells, then the flags column. Validity-fatal failures
/// become NaN rows carrying the failure as a flag; if every row fails that
/// way the first failure is returned.
fn fill<T: Sync>(
    table: &mut Table,
    items: &[T],
    keys: impl Fn(&T) -> Vec<Cell> + Sync,
    eval: impl Fn(&T) -> jba_core::Result<Values> + Sync,
) -> Result<()> {
    let results: Vec<_> = items.par_iter().map(|it| (keys(it), eval(it))).collect();
    let mut first_fatal = None;
    let mut ok = 0usize;
    for (mut row, res) in results {
        let width = table.columns.len() - row.len() - 1;
        match res {
            Ok((values, flags)) => {
                ok += 1;
                row.extend(values);
                row.push(Cell::Text(flags.join(";")));
            }
            Err(e) if e.is_validity_fatal() => {
                row.extend(std::iter::repeat_n(Cell::Num(f64::NAN), width));
                row.push(Cell::Text(fatal_label(&e).into()));
                first_fatal.get_or_insert(e);
            }
            Err(e) => return Err(e.into()),
        }
        table.rows.push(row);
    }
    match first_fatal {
        Some(e) if ok == 0 => Err(e.into()),
        _ => Ok(()),
    }
}

fn opt(x: Option<f64>) -> Cell {
    x.map(Cell::Num).unwrap_or_else(|| Cell::Text(String::new()))
}

fn describe(table: &mut Table, common: &Common, setup: &Setup, sel: Selection) {
    let s = &setup.scaled;
    table.param("kappa_scaled", format_f64(s.kappa));
    table.param("lambda_s", format_f64(s.lambda_s));
    table.param("nbar", format_f64(s.nbar));
    table.param("attractor", sel.label());
    if let Some(p) = &setup.physical {
        for (k, v) in [
            ("mass", p.mass),
            ("omega0", p.omega0),
            ("omega_f", p.omega_f),
            ("gamma_s", p.gamma_s),
            ("kappa", p.kappa),
            ("temperature", p.temperature),
            ("omega_c", p.omega_c),
        ] {
            table.param(k, format_f64(v));
        }
    }
    table.param("check", common.check);
}

fn stable_selection(s: &ScaledParams, sel: Selection) -> Result<Vec<Attractor>> {
    let all = solve_attractors(s.beta, s.kappa)?;
    let picked: Vec<_> = all.into_iter().filter(|a| sel.keep(a)).collect();
    if picked.is_empty() {
        return Err(input(format!("no {} attractor at β = {}, κ̃ = {}", sel.label(), s.beta, s.kappa)));
    }
    Ok(picked)
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Largest relative difference in `column` among unflagged-by-failure rows.
fn column_max(table: &Table, column: &str) -> f64 {
    let i = table.column(column).expect("column exists");
    table
        .rows
        .iter()
        .filter_map(|r| r[i].as_f64())
        .filter(|x| !x.is_nan())
        .fold(0.0, f64::max)
}

fn attractors(args: &AttractorsArgs) -> Result<Report> {
    let c = &args.common;
    let setup = c.setup(false)?;
    let kappa = setup.scaled.kappa;
    let sel = c.selection(Selection::All);
    let grid = c.grid(GridSpec::linear(0.0, 0.25, 251));
    let mut t = Table::new(
        "attractors",
        &["beta", "branch", "u", "q", "p", "nu_sq", "nu", "residual", "stable", "flags"],
    );
    describe(&mut t, c, &setup, sel);
    t.param("grid", grid);
    let info = bifurcation_betas(kappa);
    t.meta("bistable", info.bistable());
    if let Some(w) = info.window {
        t.meta("beta_low", format_f64(w.beta_low));
        t.meta("beta_high", format_f64(w.beta_high));
        t.meta("u_low", format_f64(w.u_low));
        t.meta("u_high", format_f64(w.u_high));
    }
    let betas = grid.points();
    let solved: Vec<jba_core::Result<Vec<Attractor>>> = betas.par_iter().map(|&b| solve_attractors(b, kappa)).collect();
    let mut worst = 0.0f64;
    for (beta, res) in betas.iter().zip(solved) {
        for a in res?.into_iter().filter(|a| sel.keep(a)) {
            let residual = a.residual();
            worst = worst.max(residual);
            let flag = if a.marginal {
                "marginal-attractor"
            } else if a.branch == Branch::Unstable {
                "saddle"
            } else {
                ""
            };
            t.rows.push(vec![
                Cell::Num(*beta),
                a.branch.label().into(),
                Cell::Num(a.u),
                Cell::Num(a.q),
                Cell::Num(a.p),
                Cell::Num(a.nu_sq),
                Cell::Num(a.nu().unwrap_or(f64::NAN)),
                Cell::Num(residual),
                Cell::Text(a.is_stable().to_string()),
                flag.into(),
            ]);
        }
    }
    let mut report = Report::new(t);
    report.warn_flags = false;
    if c.check && !(worst < RESIDUAL_TOL) {
        report.check_failure = Some(format!("stationarity residual {worst:e} exceeds {RESIDUAL_TOL:e}"));
    }
    Ok(report)
}

fn spectrum(args: &SpectrumArgs) -> Result<Report> {
    let c = &args.common;
    let setup = c.setup(true)?;
    let s = setup.scaled;
    let sel = c.selection(Selection::Both);
    let grid = c.grid(GridSpec::linear(-5.0, 5.0, 2001));
    let picked = stable_selection(&s, sel)?;
    let mut t = Table::new(
        "spectrum",
        &[
            "omega",
            "attractor",
            "u",
            "nu",
            "re_n_plus_minus",
            "re_n_minus_plus",
            "matrix_plus_minus",
            "matrix_minus_plus",
            "rel_diff",
            "flags",
        ],
    );
    describe(&mut t, c, &setup, sel);
    t.param("beta", format_f64(s.beta));
    t.param("grid", grid);
    for a in &picked {
        if let Some(nu) = a.nu() {
            t.meta(&format!("nu_{}", a.branch.label()), format_f64(nu));
        }
    }
    let items: Vec<(f64, &Attractor)> = grid.points().into_iter().flat_map(|w| picked.iter().map(move |a| (w, a))).collect();
    fill(
        &mut t,
        &items,
        |&(w, a)| vec![Cell::Num(w), a.branch.label().into(), Cell::Num(a.u)],
        |&(w, a)| {
            let cov = attractor_covariance(a, s.lambda_s, s.nbar)?;
            let nu = a.nu().unwrap_or(0.0);
            let pm = re_n_plus_minus(w, a.u, nu, a.kappa, s.lambda_s, s.nbar);
            let mp = re_n_minus_plus(w, a.u, nu, a.kappa, s.lambda_s, s.nbar);
            let m = spectrum_point(&drift_matrix(a), &cov, s.lambda_s, w)?;
            let diff = rel_diff(pm, m.re_plus_minus).max(rel_diff(mp, m.re_minus_plus));
            let flags = labels(&validity_flags(None, Some(a), &s, None, None, None));
            Ok((
                vec![
                    Cell::Num(nu),
                    Cell::Num(pm),
                    Cell::Num(mp),
                    Cell::Num(m.re_plus_minus),
                    Cell::Num(m.re_minus_plus),
                    Cell::Num(diff),
                ],
                flags,
            ))
        },
    )?;
    let mut report = Report::new(t);
    let worst = column_max(&report.table, "rel_diff");
    report.table.meta("max_rel_diff", format_f64(worst));
    if c.check && !(worst <= CHECK_TOL) {
        report.check_failure = Some(format!("closed form and matrix route differ by {worst:e} > {CHECK_TOL:e}"));
    }
    Ok(report)
}

/// Matrix-route Γ_e/Γ₀ and Γ_g/Γ₀ at scaled detuning `w`.
fn matrix_rates(a: &Attractor, s: &ScaledParams, w: f64) -> jba_core::Result<(f64, f64)> {
    let cov = attractor_covariance(a, s.lambda_s, s.nbar)?;
    let m = spectrum_point(&drift_matrix(a), &cov, s.lambda_s, w)?;
    Ok((m.re_plus_minus / s.lambda_s, m.re_minus_plus / s.lambda_s))
}

fn rates(args: &RatesArgs) -> Result<Report> {
    let c = &args.common;
    let setup = c.setup(true)?;
    let regime = args.regime.regime();
    match setup.physical {
        None => rates_scaled(args, setup, regime),
        Some(p) => rates_si(args, setup, p, regime),
    }
}

fn rates_scaled(args: &RatesArgs, setup: Setup, regime: Regime) -> Result<Report> {
    let c = &args.common;
    if regime != Regime::Resonant1Q {
        return Err(input(format!("regime {} needs the SI parameter flags", regime.label())));
    }
    if args.sweep != SweepVar::Detuning {
        return Err(input("sweeping omega-q needs the SI parameter flags"));
    }
    let s = setup.scaled;
    let sel = c.selection(Selection::Both);
    let grid = c.grid(GridSpec::linear(-3.0, 3.0, 601));
    let picked = stable_selection(&s, sel)?;
    let mut t = Table::new(
        "rates",
        &[
            "omega_scaled",
            "attractor",
            "u",
            "nu",
            "gamma_e_scaled",
            "gamma_g_scaled",
            "t_eff_scaled",
            "route_diff",
            "flags",
        ],
    );
    describe(&mut t, c, &setup, sel);
    t.param("beta", format_f64(s.beta));
    t.param("regime", regime.label());
    t.param("sweep", "detuning");
    t.param("grid", grid);
    let items: Vec<(f64, &Attractor)> = grid.points().into_iter().flat_map(|w| picked.iter().map(move |a| (w, a))).collect();
    fill(
        &mut t,
        &items,
        |&(w, a)| vec![Cell::Num(w), a.branch.label().into(), Cell::Num(a.u)],
        |&(w, a)| {
            let r = resonant_1q_scaled(w, a, s.lambda_s, s.nbar)?;
            let (me, mg) = matrix_rates(a, &s, w)?;
            let diff = rel_diff(r.gamma_e, me).max(rel_diff(r.gamma_g, mg));
            Ok((
                vec![
                    Cell::Num(a.nu().unwrap_or(f64::NAN)),
                    Cell::Num(r.gamma_e),
                    Cell::Num(r.gamma_g),
                    Cell::Num(r.t_eff_scaled),
                    Cell::Num(diff),
                ],
                labels(&r.validity),
            ))
        },
    )?;
    let mut report = Report::new(t);
    let worst = column_max(&report.table, "route_diff");
    if c.check && !(worst <= CHECK_TOL) {
        report.check_failure = Some(format!("closed form and matrix route differ by {worst:e} > {CHECK_TOL:e}"));
    }
    Ok(report)
}

fn needs_attractor(regime: Regime) -> bool {
    !matches!(regime, Regime::Resonant2Q | Regime::Nonresonant2Q | Regime::LinearNonresonant)
}

/// Frequency that the scaled detuning of each regime is measured from.
fn reference_frequency(regime: Regime, p: &PhysicalParams) -> f64 {
    match regime {
        Regime::Resonant1Q | Regime::Combined | Regime::Nonresonant => 2.0 * p.omega_f,
        Regime::LinearResonant => p.omega_f,
        Regime::Resonant2Q | Regime::Nonresonant2Q => 2.0 * p.omega0,
        Regime::LinearNonresonant => p.omega0,
    }
}

fn rates_si(args: &RatesArgs, setup: Setup, p: PhysicalParams, regime: Regime) -> Result<Report> {
    let c = &args.common;
    let s = setup.scaled;
    let dw = p.omega0 - p.omega_f;
    let reference = reference_frequency(regime, &p);
    let grid = match (c.grid, args.sweep) {
        (Some(g), _) => g,
        (None, SweepVar::Detuning) => GridSpec::linear(-3.0, 3.0, 601),
        (None, SweepVar::OmegaQ) => GridSpec::linear(reference - 3.0 * dw, reference + 3.0 * dw, 601),
    };
    let sel = c.selection(Selection::Both);
    let picked: Vec<Option<Attractor>> = if needs_attractor(regime) {
        stable_selection(&s, sel)?.into_iter().map(Some).collect()
    } else {
        vec![None]
    };
    let mut t = Table::new(
        "rates",
        &[
            "omega_q",
            "omega_scaled",
            "attractor",
            "u",
            "nu",
            "gamma_e",
            "gamma_g",
            "gamma_e_scaled",
            "gamma_g_scaled",
            "t1",
            "t2",
            "t_eff",
            "t_eff_scaled",
            "flags",
        ],
    );
    describe(&mut t, c, &setup, sel);
    t.param("beta", format_f64(s.beta));
    t.param("f0", format_f64(p.f0));
    t.param("regime", regime.label());
    t.param("sweep", match args.sweep {
        SweepVar::Detuning => "detuning",
        SweepVar::OmegaQ => "omega-q",
    });
    t.param("grid", grid);
    t.param("reference_frequency", format_f64(reference));
    t.param("delta", args.qubit.delta.map(format_f64).unwrap_or_default());
    t.param("delta_q", args.qubit.delta_q.map(format_f64).unwrap_or_default());
    t.param("v_x", format_f64(args.qubit.v_x));
    t.param("v_z", format_f64(args.qubit.v_z));
    let omega_qs: Vec<(f64, f64)> = grid
        .points()
        .into_iter()
        .map(|x| match args.sweep {
            SweepVar::Detuning => (reference + x * dw, x),
            SweepVar::OmegaQ => (x, (x - reference) / dw),
        })
        .collect();
    // Validate the qubit once so a missing flag is an input error, not a row flag.
    args.qubit.qubit(omega_qs[0].0.max(f64::MIN_POSITIVE), regime)?;
    let bath = p.ohmic_bath();
    let items: Vec<((f64, f64), Option<&Attractor>)> = omega_qs
        .iter()
        .flat_map(|&wq| picked.iter().map(move |a| (wq, a.as_ref())))
        .collect();
    fill(
        &mut t,
        &items,
        |&((wq, w), a)| {
            vec![
                Cell::Num(wq),
                Cell::Num(w),
                a.map(|a| a.branch.label()).unwrap_or("none").into(),
                opt(a.map(|a| a.u)),
                opt(a.and_then(|a| a.nu())),
            ]
        },
        |&((wq, _), a)| {
            let q = args.qubit.qubit(wq, regime).map_err(|e| match e {
                CliError::Model(m) => m,
                other => jba_core::Error::InvalidParameter { name: "qubit".into(), reason: other.to_string() },
            })?;
            let r: RateResult = match (regime, a) {
                (Regime::Resonant1Q, Some(a)) => gamma_resonant_1q(&q, a, &p)?,
                (Regime::Combined, Some(a)) => gamma_total_resonant(&q, a, &p)?,
                (Regime::Nonresonant, Some(a)) => gamma_nonresonant(&q, a, &p, &bath)?,
                (Regime::LinearResonant, Some(a)) => gamma_linear_resonant(&q, a, &p)?,
                (Regime::Resonant2Q, _) => gamma_resonant_2q(&q, &p, planck(p.omega0, p.temperature)?)?,
                (Regime::Nonresonant2Q, _) => gamma_nonresonant_2q(&q, &p, &bath)?,
                (Regime::LinearNonresonant, _) => gamma_linear_nonresonant(&q, &p, &bath)?,
                _ => unreachable!("attractor presence follows needs_attractor"),
            };
            Ok((
                vec![
                    Cell::Num(r.gamma_e),
                    Cell::Num(r.gamma_g),
                    opt(r.scaled.map(|x| x.0)),
                    opt(r.scaled.map(|x| x.1)),
                    Cell::Num(r.t1),
                    opt(r.t2),
                    Cell::Num(r.t_eff),
                    Cell::Num(scaled_effective_temperature(r.gamma_e, r.gamma_g)),
                ],
                labels(&r.validity),
            ))
        },
    )?;
    let mut report = Report::new(t);
    if c.check && regime == Regime::Resonant1Q {
        let worst = items
            .iter()
            .zip(&report.table.rows)
            .filter_map(|(((_, w), a), row)| {
                let a = (*a)?;
                let (me, mg) = matrix_rates(a, &s, *w).ok()?;
                Some(rel_diff(row[7].as_f64()?, me).max(rel_diff(row[8].as_f64()?, mg)))
            })
            .fold(0.0, f64::max);
        if !(worst <= CHECK_TOL) {
            report.check_failure = Some(format!("closed form and matrix route differ by {worst:e} > {CHECK_TOL:e}"));
        }
    }
    Ok(report)
}

fn teff(args: &TeffArgs) -> Result<Report> {
    let c = &args.common;
    if c.beta.is_some() {
        return Err(input("teff sweeps β; use --grid instead of --beta"));
    }
    let setup = c.setup(false)?;
    let s = setup.scaled;
    let w = args.detuning;
    let sel = c.selection(Selection::Both);
    let grid = c.grid(GridSpec::linear(0.001, 0.25, 250));
    let mut columns = vec!["beta", "attractor", "u", "nu", "gamma_e_scaled", "gamma_g_scaled", "log_ratio", "t_eff_scaled"];
    let omega_q = setup.physical.map(|p| 2.0 * p.omega_f + w * (p.omega0 - p.omega_f));
    if omega_q.is_some() {
        columns.push("t_eff");
    }
    columns.push("flags");
    let mut t = Table::new("teff", &columns);
    describe(&mut t, c, &setup, sel);
    t.param("detuning", format_f64(w));
    t.param("grid", grid);
    if let Some(wq) = omega_q {
        t.param("omega_q", format_f64(wq));
    }
    let betas = grid.points();
    let solved: Vec<jba_core::Result<Vec<Attractor>>> = betas.par_iter().map(|&b| solve_attractors(b, s.kappa)).collect();
    let mut items = Vec::new();
    for res in solved {
        items.extend(res?.into_iter().filter(|a| sel.keep(a)));
    }
    if items.is_empty() {
        return Err(input(format!("no {} attractor anywhere on the β grid", sel.label())));
    }
    fill(
        &mut t,
        &items,
        |a| vec![Cell::Num(a.beta), a.branch.label().into(), Cell::Num(a.u)],
        |a| {
            let r = resonant_1q_scaled(w, a, s.lambda_s, s.nbar)?;
            let mut values = vec![
                Cell::Num(a.nu().unwrap_or(f64::NAN)),
                Cell::Num(r.gamma_e),
                Cell::Num(r.gamma_g),
                Cell::Num((r.gamma_e / r.gamma_g).ln()),
                Cell::Num(r.t_eff_scaled),
            ];
            if let Some(wq) = omega_q {
                values.push(Cell::Num(effective_temperature(r.gamma_e, r.gamma_g, wq)));
            }
            Ok((values, labels(&r.validity)))
        },
    )?;
    for branch in [Branch::SmallAmplitude, Branch::LargeAmplitude] {
        if !items.iter().any(|a| a.branch == branch) {
            continue;
        }
        let poles = poles(&t, branch.label());
        let text = if poles.is_empty() {
            "none".to_string()
        } else {
            poles.iter().map(|(lo, hi)| format!("{}:{}", format_f64(*lo), format_f64(*hi))).collect::<Vec<_>>().join(",")
        };
        t.meta(&format!("pole_{}", branch.label()), text);
    }
    let mut report = Report::new(t);
    if c.check {
        let worst = items
            .par_iter()
            .filter_map(|a| {
                let r = resonant_1q_scaled(w, a, s.lambda_s, s.nbar).ok()?;
                let (me, mg) = matrix_rates(a, &s, w).ok()?;
                Some(rel_diff(r.gamma_e, me).max(rel_diff(r.gamma_g, mg)))
            })
            .reduce(|| 0.0, f64::max);
        if !(worst <= CHECK_TOL) {
            report.check_failure = Some(format!("closed form and matrix route differ by {worst:e} > {CHECK_TOL:e}"));
        }
    }
    Ok(report)
}

/// β intervals on which ln(Γ_e/Γ_g) changes sign between consecutive rows of one branch.
pub fn poles(t: &Table, branch: &str) -> Vec<(f64, f64)> {
    let (ib, ia, il) = (t.column("beta").unwrap(), t.column("attractor").unwrap(), t.column("log_ratio").unwrap());
    let rows: Vec<(f64, f64)> = t
        .rows
        .iter()
        .filter(|r| matches!(&r[ia], Cell::Text(x) if x == branch))
        .filter_map(|r| Some((r[ib].as_f64()?, r[il].as_f64()?)))
        .collect();
    rows.windows(2)
        .filter(|w| w[0].1.is_finite() && w[1].1.is_finite() && w[0].1 * w[1].1 <= 0.0 && w[0].1 != w[1].1)
        .map(|w| (w[0].0, w[1].0))
        .collect()
}

fn matching(args: &MatchArgs) -> Result<Report> {
    let c = &args.common;
    if c.is_si() {
        return Err(input("match builds its own laboratory parameters; SI flags are not accepted"));
    }
    if c.grid.is_some() {
        return Err(input("match takes --h, not --grid"));
    }
    let setup = c.setup(false)?;
    let s = setup.scaled;
    let sel = c.selection(Selection::Small);
    if !matches!(sel, Selection::Small | Selection::Large) {
        return Err(input("match needs --attractor small or large"));
    }
    let a = stable_selection(&s, sel)?[0];
    let mut hs = args.hierarchy.clone();
    if hs.is_empty() || hs.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(input("--h values must be positive and finite"));
    }
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    let mut t = Table::new(
        "match",
        &[
            "h",
            "omega_scaled",
            "drive_ratio",
            "gamma_e_resonant",
            "gamma_e_nonresonant",
            "ratio_e",
            "deviation_e",
            "gamma_g_resonant",
            "gamma_g_nonresonant",
            "ratio_g",
            "deviation_g",
            "flags",
        ],
    );
    describe(&mut t, c, &setup, sel);
    t.param("beta", format_f64(s.beta));
    t.param("omega0", format_f64(crate::matching::OMEGA0));
    t.param("mass", format_f64(crate::matching::MASS));
    let points: Vec<_> = hs.par_iter().map(|&h| match_point(h, &a, &s)).collect::<jba_core::Result<_>>()?;
    for m in &points {
        let (re, rg) = (m.ratio_e(), m.ratio_g());
        t.rows.push(vec![
            Cell::Num(m.h),
            Cell::Num(m.omega_scaled),
            Cell::Num(m.drive_ratio),
            Cell::Num(m.resonant.0),
            Cell::Num(m.nonresonant.0),
            Cell::Num(re),
            Cell::Num(re - 1.0),
            Cell::Num(m.resonant.1),
            Cell::Num(m.nonresonant.1),
            Cell::Num(rg),
            Cell::Num(rg - 1.0),
            Cell::Text(labels(&m.validity).join(";")),
        ]);
    }
    let mut report = Report::new(t);
    report.warn_flags = false;
    let ok = converges(&points);
    report.table.meta("converges", ok);
    if !ok {
        report.check_failure = Some("deviation from 1 does not decrease with h".into());
    }
    Ok(report)
}

fn validate(args: &ValidateArgs) -> Result<Report> {
    let c = &args.common;
    let setup = c.setup(true)?;
    let s = setup.scaled;
    let sel = c.selection(Selection::Both);
    let grid = c.grid(GridSpec::linear(-5.0, 5.0, 2001));
    let picked = stable_selection(&s, sel)?;
    let mut t = Table::new("validate", &["check", "attractor", "value", "tolerance", "pass", "flags"]);
    describe(&mut t, c, &setup, sel);
    t.param("beta", format_f64(s.beta));
    t.param("grid", grid);
    let mut failures = Vec::new();
    let mut push = |t: &mut Table, name: &str, a: &Attractor, value: f64, tol: f64, flags: String| {
        let pass = value <= tol;
        if !pass {
            failures.push(format!("{name} ({}) = {value:e} > {tol:e}", a.branch.label()));
        }
        t.rows.push(vec![
            name.into(),
            a.branch.label().into(),
            Cell::Num(value),
            Cell::Num(tol),
            Cell::Text(pass.to_string()),
            flags.into(),
        ]);
    };
    let points = grid.points();
    for a in &picked {
        push(&mut t, "stationarity-residual", a, a.residual(), RESIDUAL_TOL, String::new());
        let k = drift_matrix(a);
        let invariants = (k.trace() + 2.0 * a.kappa).abs() + (k.determinant() - a.nu_sq).abs();
        push(&mut t, "drift-trace-determinant", a, invariants, RESIDUAL_TOL, String::new());
        if a.branch == Branch::Unstable {
            continue;
        }
        let flags = labels(&validity_flags(None, Some(a), &s, None, None, None)).join(";");
        let cov = attractor_covariance(a, s.lambda_s, s.nbar)?;
        push(&mut t, "lyapunov-residual", a, cov.residual(&k), RESIDUAL_TOL, flags.clone());
        let nu = a.nu().unwrap_or(0.0);
        let worst = points
            .par_iter()
            .map(|&w| -> jba_core::Result<f64> {
                let m = spectrum_point(&k, &cov, s.lambda_s, w)?;
                let pm = re_n_plus_minus(w, a.u, nu, a.kappa, s.lambda_s, s.nbar);
                let mp = re_n_minus_plus(w, a.u, nu, a.kappa, s.lambda_s, s.nbar);
                Ok(rel_diff(pm, m.re_plus_minus).max(rel_diff(mp, m.re_minus_plus)))
            })
            .collect::<jba_core::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        push(&mut t, "dual-route", a, worst, ROUTE_TOL, flags);
    }
    let mut report = Report::new(t);
    report.warn_flags = false;
    if !failures.is_empty() {
        report.check_failure = Some(failures.join("; "));
    }
    Ok(report)
}
