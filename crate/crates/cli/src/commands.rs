//! Experiment drivers. Each returns a JSON result and its tabular form.

use std::path::Path;

use nlperim::autocorr::{autocorrelation_fft, Pattern, RadialAutocorrelation, TorusConfig, TorusFile};
use nlperim::energy::{davila_limit, energy_of_config_with, energy_radial, epsilon_sweep};
use nlperim::minimize::{anneal_with, annealing_radial_options, fraenkel_asymmetry, isoperimetric_deficit, AnnealOptions, Proposal, Schedule};
use nlperim::patterns::{
    ball_lattice_energy, optimal_ball_lattice, optimal_stripe, phase_sweep, stripe_energy, BallLattice, BravaisLattice, Phase,
    StripePattern,
};
use nlperim::specfun::unit_ball_volume;
use nlperim::verify::{run_property_suite, VerifyOptions};
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::output::{emit, Table};
use crate::params::*;
use crate::spec::Job;

pub struct Report {
    pub result: Value,
    pub table: Table,
    /// False when the command ran but found a failure (only `verify`).
    pub ok: bool,
}

impl Report {
    fn new(result: Value, table: Table) -> Self {
        Self { result, table, ok: true }
    }
}

/// Checks that need no computation, so a bad spec fails before any work starts.
pub fn validate(job: &Job) -> Result<()> {
    match job {
        Job::Energy(p) => p.geometry.check(),
        Job::Gamma(p) => {
            p.geometry.check()?;
            no_single_epsilon(&p.kernel)
        }
        Job::Davila(p) => {
            p.geometry.check()?;
            no_single_epsilon(&p.kernel)
        }
        Job::Stripes(p) => match (p.optimal, p.width) {
            (true, Some(_)) => Err(CliError::usage("--optimal and --width are mutually exclusive")),
            (false, None) => Err(CliError::usage("pass --optimal or --width")),
            _ => Ok(()),
        },
        Job::Balls(p) => lattice(&p.lattice, p.d).map(|_| ()),
        Job::Phase(p) => {
            if p.lattices.is_empty() {
                return Err(CliError::usage("--lattices must name at least one lattice"));
            }
            for name in &p.lattices {
                lattice(name, p.d)?;
            }
            parse_grid(&p.lambda_grid).map(|_| ())
        }
        Job::Anneal(p) => {
            if p.seed.is_none() {
                return Err(CliError::usage("anneal needs an explicit --seed"));
            }
            if p.init == InitKind::File && p.config.is_none() {
                return Err(CliError::usage("--init file needs --config"));
            }
            Ok(())
        }
        Job::Verify(_) => Ok(()),
    }
}

fn no_single_epsilon(k: &KernelArgs) -> Result<()> {
    match k.epsilon {
        Some(_) => Err(CliError::usage("sweeps take --epsilons, not --epsilon")),
        None => Ok(()),
    }
}

fn lattice(name: &str, d: usize) -> Result<BravaisLattice> {
    let l = BravaisLattice::named(name)?;
    if l.dimension() != d {
        return Err(CliError::usage(format!("lattice {name} has dimension {}, not {d}", l.dimension())));
    }
    Ok(l)
}

/// Short column name of a lattice.
fn lattice_tag(name: &str) -> String {
    match name.trim().to_ascii_lowercase().as_str() {
        "triangular" | "tri" | "hexagonal" => "tri".into(),
        other => other.to_string(),
    }
}

pub fn execute(job: &Job) -> Result<Report> {
    validate(job)?;
    match job {
        Job::Energy(p) => energy(p),
        Job::Stripes(p) => stripes(p),
        Job::Balls(p) => balls(p),
        Job::Phase(p) => phase(p),
        Job::Gamma(p) => gamma(p),
        Job::Davila(p) => davila(p),
        Job::Anneal(p) => anneal(p),
        Job::Verify(p) => verify(p),
    }
}

fn read_config(path: &Path) -> Result<TorusConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: TorusFile = serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok(TorusConfig::try_from(file)?)
}

fn profile(g: &GeometryArgs) -> Result<RadialAutocorrelation> {
    if g.analytic {
        return Ok(match g.pattern {
            PatternKind::Ball => RadialAutocorrelation::ball(g.radius, g.ell, g.d, &[])?,
            _ => RadialAutocorrelation::stripes(&StripePattern::new(g.d, g.width, g.gap)?, &[])?,
        });
    }
    let cfg = match g.pattern {
        PatternKind::File => {
            let cfg = read_config(g.config.as_deref().expect("checked"))?;
            if cfg.dimension() != g.d {
                return Err(CliError::usage(format!("configuration has dimension {}, not {}", cfg.dimension(), g.d)));
            }
            cfg
        }
        kind => {
            let pattern = match kind {
                PatternKind::Ball => Pattern::Ball { radius: g.radius },
                PatternKind::Stripes => Pattern::Stripes { width: g.width, gap: g.gap },
                PatternKind::TwoBalls => Pattern::TwoBalls { radius: g.radius, distance: g.distance },
                _ => Pattern::Random { fraction: g.fraction, seed: g.seed.expect("checked") },
            };
            pattern.build(g.d, g.ell, g.n)?
        }
    };
    Ok(autocorrelation_fft(&cfg)?.1)
}

fn energy(p: &EnergyParams) -> Result<Report> {
    let rad = profile(&p.geometry)?;
    let kernel = p.kernel.build(p.geometry.d, 0.1)?;
    let e = energy_radial(&rad, &kernel)?;
    let result = json!({
        "energy": e.value,
        "near_field": e.near_field,
        "far_field": e.far_field,
        "quadrature_error": e.quadrature_error,
        "kernel": e.kernel,
        "volume_fraction": rad.value_at_zero,
        "slope_at_zero": rad.slope_at_zero,
        "warnings": rad.warnings,
    });
    let mut t = Table::new(&["energy", "near_field", "far_field", "quadrature_error", "volume_fraction", "slope_at_zero"]);
    t.push(vec![e.value.into(), e.near_field.into(), e.far_field.into(), e.quadrature_error.into(), rad.value_at_zero.into(), rad.slope_at_zero.into()]);
    Ok(Report::new(result, t))
}

fn stripes(p: &StripesParams) -> Result<Report> {
    if let Some(width) = p.width {
        let s = StripePattern::with_fraction(p.d, p.lambda, width)?;
        let e = stripe_energy(&s)?;
        let mut t = Table::new(&["lambda", "width", "gap", "e_S"]);
        t.push(vec![p.lambda.into(), s.width.into(), s.gap.into(), e.into()]);
        return Ok(Report::new(json!({"lambda": p.lambda, "width": s.width, "gap": s.gap, "e_S": e}), t));
    }
    let opt = optimal_stripe(p.lambda, p.d)?;
    let mut t = Table::new(&["lambda", "d_opt", "e_S"]);
    t.push(vec![p.lambda.into(), opt.d_opt.into(), opt.e_s.into()]);
    Ok(Report::new(json!({"d_opt": opt.d_opt, "e_S": opt.e_s}), t))
}

fn balls(p: &BallsParams) -> Result<Report> {
    let lat = lattice(&p.lattice, p.d)?;
    let tag = lattice_tag(&p.lattice);
    match p.scale {
        None => {
            let opt = optimal_ball_lattice(p.lambda, &lat, p.d)?;
            let mut t = Table::new(&["lattice", "lambda", "rho_opt", "e_B", "scale", "error"]);
            t.push(vec![tag.clone().into(), p.lambda.into(), opt.rho_opt.into(), opt.e_b.into(), opt.scale.into(), opt.error.into()]);
            let result = json!({"lattice": tag, "lambda": p.lambda, "rho_opt": opt.rho_opt, "e_B": opt.e_b, "scale": opt.scale, "error": opt.error});
            Ok(Report::new(result, t))
        }
        Some(a) => {
            let scaled = lat.normalized().scaled(a)?;
            let radius = a * (p.lambda / unit_ball_volume(p.d)).powf(1.0 / p.d as f64);
            let e = ball_lattice_energy(&BallLattice::new(scaled, radius)?)?;
            let mut t = Table::new(&["lattice", "lambda", "scale", "radius", "e_B", "self_energy", "interaction", "error"]);
            t.push(vec![
                tag.clone().into(),
                p.lambda.into(),
                a.into(),
                radius.into(),
                e.value.into(),
                e.self_energy.into(),
                e.interaction.into(),
                e.error.into(),
            ]);
            let result = json!({
                "lattice": tag, "lambda": p.lambda, "scale": a, "radius": radius, "e_B": e.value,
                "self_energy": e.self_energy, "interaction": e.interaction, "error": e.error,
            });
            Ok(Report::new(result, t))
        }
    }
}

fn phase(p: &PhaseParams) -> Result<Report> {
    let lambdas = parse_grid(&p.lambda_grid)?;
    let lattices: Vec<BravaisLattice> = p.lattices.iter().map(|n| lattice(n, p.d)).collect::<Result<_>>()?;
    let tags: Vec<String> = p.lattices.iter().map(|n| lattice_tag(n)).collect();
    let rows = phase_sweep(&lambdas, &lattices, p.d)?;

    let mut header = vec!["lambda".to_string(), "e_S".to_string()];
    header.extend(tags.iter().map(|t| format!("e_B_{t}")));
    header.push("winner".into());
    let mut table = Table { header, rows: Vec::new() };
    let mut out = Vec::with_capacity(rows.len());
    for c in &rows {
        let winner = match c.verdict {
            Phase::Stripes => "stripes".to_string(),
            Phase::Balls { lattice } => format!("balls_{}", tags[lattice]),
        };
        let mut row = vec![c.lambda.into(), c.e_s.into()];
        row.extend(c.e_b.iter().map(|&e| e.into()));
        row.push(winner.clone().into());
        table.push(row);
        let e_b: serde_json::Map<String, Value> = tags.iter().zip(&c.e_b).map(|(t, e)| (t.clone(), json!(e))).collect();
        let rho: serde_json::Map<String, Value> = tags.iter().zip(&c.rho_opt).map(|(t, r)| (t.clone(), json!(r))).collect();
        out.push(json!({
            "lambda": c.lambda, "e_S": c.e_s, "d_opt": c.d_opt, "e_B": e_b, "rho_opt": rho,
            "winner": winner, "margin": c.margin,
        }));
    }
    Ok(Report::new(Value::Array(out), table))
}

fn gamma(p: &GammaParams) -> Result<Report> {
    let rad = profile(&p.geometry)?;
    let first = p.epsilons.first().copied().ok_or_else(|| CliError::usage("--epsilons is empty"))?;
    let kernel = p.kernel.build(p.geometry.d, first)?;
    let sweep = epsilon_sweep(&rad, &kernel, &p.epsilons)?;
    let mut t = Table::new(&["epsilon", "energy", "near_field", "far_field", "quadrature_error", "gap"]);
    let limit = sweep.limit.map(|l| l.value);
    for pt in sweep.points.iter().chain(sweep.limit.iter()) {
        let gap = limit.map(|l| l - pt.value);
        t.push(vec![pt.epsilon.into(), pt.value.into(), pt.near.into(), pt.far.into(), pt.err.into(), gap.into()]);
    }
    Ok(Report::new(serde_json::to_value(&sweep)?, t))
}

fn davila(p: &DavilaParams) -> Result<Report> {
    let rad = profile(&p.geometry)?;
    let first = p.epsilons.first().copied().ok_or_else(|| CliError::usage("--epsilons is empty"))?;
    let kernel = p.kernel.build(p.geometry.d, first)?;
    let rep = davila_limit(&rad, &kernel, &p.epsilons)?;
    let mut t = Table::new(&["epsilon", "ratio", "limit", "relative_error"]);
    for pt in &rep.points {
        t.push(vec![pt.epsilon.into(), pt.ratio.into(), rep.limit.into(), pt.relative_error.into()]);
    }
    Ok(Report::new(serde_json::to_value(&rep)?, t))
}

fn anneal(p: &AnnealParams) -> Result<Report> {
    let seed = p.seed.expect("checked");
    let total = p.n.checked_pow(p.d as u32).ok_or_else(|| CliError::usage("grid too large"))?;
    let count = p.count.unwrap_or_else(|| (p.fraction * total as f64).round() as usize);
    let centre = vec![0.5 * p.ell; p.d];
    let initial = match p.init {
        InitKind::Ball => TorusConfig::ball_with_count(p.d, p.ell, p.n, count, &centre)?,
        InitKind::Random => TorusConfig::random_with_count(p.d, p.ell, p.n, count, seed)?,
        InitKind::File => read_config(p.config.as_deref().expect("checked"))?,
    };
    let h = initial.cell_size();
    let kernel = p.kernel.build(initial.dimension(), 2.0 * h)?;
    let cooling = match p.cooling {
        Some(c) => c,
        None => {
            if !(p.t_final > 0.0 && p.t_final < p.t0) || p.steps == 0 {
                return Err(CliError::usage("need 0 < t_final < t0 and steps > 0 to derive the cooling factor"));
            }
            (p.t_final / p.t0).powf(1.0 / p.steps as f64)
        }
    };
    let schedule = Schedule { t0: p.t0, cooling_factor: cooling, steps: p.steps };
    let options = AnnealOptions {
        refresh_interval: p.refresh_interval,
        proposal: match p.proposal {
            ProposalKind::Boundary => Proposal::Boundary,
            ProposalKind::Uniform => Proposal::Uniform,
        },
        log_interval: if p.trajectory.is_some() { p.log_interval.max(1) } else { 0 },
    };
    let radial = annealing_radial_options(&initial)?;
    let initial_energy = energy_of_config_with(&initial, &kernel, &radial)?.value;
    let outcome = anneal_with(&initial, &kernel, &schedule, seed, &options)?;
    let s = &outcome.state;

    if let Some(path) = &p.trajectory {
        let mut traj = Table::new(&["step", "T", "energy", "best_energy", "asymmetry"]);
        for pt in &outcome.trajectory {
            traj.push(vec![pt.step.into(), pt.temperature.into(), pt.energy.into(), pt.best_energy.into(), pt.asymmetry.into()]);
        }
        emit(Some(path), &traj.to_csv())?;
    }

    let occupied = s.best_config.occupied_count();
    let ball = TorusConfig::ball_with_count(initial.dimension(), initial.side_length(), initial.cells_per_side(), occupied, &vec![0.5 * initial.side_length(); initial.dimension()])?;
    let ball_energy = energy_of_config_with(&ball, &kernel, &radial)?.value;
    let asymmetry = fraenkel_asymmetry(&s.best_config)?;
    let deficit = isoperimetric_deficit(&s.best_config)?;
    let relative_gap = (s.best_energy - ball_energy) / ball_energy.abs();

    let mut t = Table::new(&["initial_energy", "energy", "best_energy", "ball_energy", "relative_gap", "asymmetry", "deficit", "accepted", "steps"]);
    t.push(vec![
        initial_energy.into(),
        s.energy.into(),
        s.best_energy.into(),
        ball_energy.into(),
        relative_gap.into(),
        asymmetry.into(),
        deficit.into(),
        s.accepted.into(),
        s.step_count.into(),
    ]);
    let result = json!({
        "kernel": kernel,
        "schedule": schedule,
        "initial_energy": initial_energy,
        "energy": s.energy,
        "best_energy": s.best_energy,
        "ball_energy": ball_energy,
        "relative_gap": relative_gap,
        "asymmetry": asymmetry,
        "deficit": deficit,
        "accepted": s.accepted,
        "steps": s.step_count,
        "max_drift": outcome.max_drift,
        "best_config": s.best_config.to_file(),
    });
    Ok(Report::new(result, t))
}

fn verify(p: &VerifyParams) -> Result<Report> {
    let options = VerifyOptions { seed: p.seed, configurations: p.configurations, pairs: p.pairs, epsilon: p.epsilon };
    let report = run_property_suite(&options)?;
    let summaries = report.summaries();
    let mut t = Table::new(&["suite", "cases", "failures", "worst_slack"]);
    for s in &summaries {
        t.push(vec![s.suite.into(), (s.cases as u64).into(), (s.failures as u64).into(), s.worst_slack.into()]);
    }
    let failures: Vec<_> = report.failures().collect();
    let result = json!({"passed": report.all_passed(), "suites": summaries, "failures": failures});
    Ok(Report { result, table: t, ok: report.all_passed() })
}
