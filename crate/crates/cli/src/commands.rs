use dkw_core::bands::{data_band, delta_for_confidence, envelope};
use dkw_core::binom::{
    bennett_log_bound, deviation_log_prob, fixed_t_lower_check, no_cancel_check, ProbeConstants, TailQuery, TailSide,
};
use dkw_core::experiments::{
    bennett_grid, calibrate_constants, coverage_experiment, fixed_t_sweep, lil_curve, no_cancel_sweep, zm_curve,
    ProbeSweep,
};
use dkw_core::rademacher::block_surface;
use dkw_core::stats::pearson;
use dkw_core::{loglog, BandSpec, ConstantSet};
use serde::Serialize;

use crate::config::{
    BandArgs, BlocksArgs, CalibrateArgs, CheckArg, Command, ConstantArgs, CoverageArgs, DeltaArgs, EnvelopeArgs,
    LilArgs, OracleArgs, RunConfig, ZmArgs,
};
use crate::input::parse_sample_file;
use crate::report::{Report, Val};
use crate::CliError;

const NO_CANCEL_P_GRID: [f64; 10] = [1e-3, 1e-5, 1e-10, 1e-20, 1e-40, 1e-50, 1e-80, 1e-120, 1e-200, 1e-300];

/// Runs the configured command. `argv` is echoed into the report.
pub fn run_command(cfg: &RunConfig, argv: Vec<String>) -> Result<Report, CliError> {
    let trials = cfg.trials.or(cfg.command.default_trials());
    let mut config = match Val::of(&cfg.command)? {
        Val::Map(entries) => entries,
        other => vec![("args".to_string(), other)],
    };
    config.push(("seed".into(), Val::UInt(cfg.seed)));
    config.push(("trials".into(), trials.map_or(Val::Null, Val::UInt)));
    let report = Report::new(cfg.command.name(), argv, Val::Map(config));
    let seed = cfg.seed;
    let trials = trials.unwrap_or(0);
    match &cfg.command {
        Command::Band(a) => band(report, a),
        Command::Envelope(a) => envelope_cmd(report, a),
        Command::Coverage(a) => coverage(report, a, trials, seed),
        Command::Calibrate(a) => calibrate(report, a, trials, seed),
        Command::Zm(a) => zm(report, a, trials, seed),
        Command::Lil(a) => lil(report, a, trials, seed),
        Command::Oracle(a) => oracle(report, a),
        Command::Blocks(a) => blocks(report, a, trials, seed),
    }
}

fn load_constants(a: &ConstantArgs) -> Result<ConstantSet, CliError> {
    match &a.constants {
        None => Ok(ConstantSet::calibrated()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io { path: path.clone(), message: e.to_string() })?;
            Ok(ConstantSet::from_json(&text)?)
        }
    }
}

/// Delta from `--delta` or `--failure-prob`, and whether the floor set it.
fn resolve_delta(d: &DeltaArgs, m: u64, consts: &ConstantSet) -> Result<(f64, bool), CliError> {
    match (d.delta, d.failure_prob) {
        (Some(delta), None) => Ok((delta, false)),
        (None, Some(fp)) => {
            let c = delta_for_confidence(m, fp, consts)?;
            Ok((c.delta, c.floor_active))
        }
        _ => Err(CliError::Usage("give exactly one of --delta and --failure-prob".into())),
    }
}

fn band_spec(kind: dkw_core::BandKind, m: u64, d: &DeltaArgs, ca: &ConstantArgs) -> Result<(BandSpec, bool), CliError> {
    let consts = load_constants(ca)?;
    let (delta, floor_active) = resolve_delta(d, m, &consts)?;
    let spec = BandSpec { kind, m, delta, consts, enforce_floor: !ca.no_floor };
    spec.validate()?;
    Ok((spec, floor_active))
}

fn spec_summary(report: Report, spec: &BandSpec, floor_active: bool) -> Result<Report, CliError> {
    Ok(report
        .summary("kind", spec.kind.name())
        .summary("m", spec.m)
        .summary("delta", spec.delta)
        .summary("floor_active", floor_active)
        .summary("constants", Val::of(&spec.consts)?))
}

fn band(report: Report, a: &BandArgs) -> Result<Report, CliError> {
    let sample = parse_sample_file(&a.input)?;
    let (spec, floor_active) = band_spec(a.kind, sample.len() as u64, &a.delta, &a.consts)?;
    let rows = data_band(&sample, &spec, a.model.as_ref())?;
    spec_summary(report, &spec, floor_active)?.rows(&rows)
}

fn envelope_cmd(report: Report, a: &EnvelopeArgs) -> Result<Report, CliError> {
    let (spec, floor_active) = band_spec(a.kind, a.m, &a.delta, &a.consts)?;
    let rows = envelope(&spec, a.points)?;
    spec_summary(report, &spec, floor_active)?.rows(&rows)
}

fn coverage(report: Report, a: &CoverageArgs, trials: u64, seed: u64) -> Result<Report, CliError> {
    let r = coverage_experiment(a.kind, a.m, a.delta, &a.model, trials, seed)?;
    report.summary("wilson_half_width", r.wilson_half_width()).rows(&[r])
}

fn calibrate(report: Report, a: &CalibrateArgs, trials: u64, seed: u64) -> Result<Report, CliError> {
    let r = calibrate_constants(a.kind, &a.m_grid, a.target.into(), seed, trials)?;
    if let Some(path) = &a.write {
        std::fs::write(path, r.consts.to_json() + "\n").map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    }
    report
        .summary("c0", r.consts.c0)
        .summary("c1", r.consts.c1)
        .summary("c2", r.consts.c2)
        .summary("constants", Val::of(&r.consts)?)
        .summary("target_family", r.target_family.as_str())
        .summary("grid", Val::of(&r.grid)?)
        .summary("achieved", Val::of(&r.achieved)?)
        .rows(&r.cells)
}

fn curve_summary(report: Report, points: &[dkw_core::experiments::CurvePoint]) -> Report {
    let est: Vec<f64> = points.iter().map(|p| p.estimate).collect();
    let lls: Vec<f64> = points.iter().map(|p| loglog(p.x).max(0.0).sqrt()).collect();
    let corr = if points.len() >= 2 { pearson(&est, &lls) } else { f64::NAN };
    let monotone = est.windows(2).all(|w| w[0] <= w[1]);
    report.summary("pearson_sqrt_loglog", corr).summary("nondecreasing", monotone)
}

fn zm(report: Report, a: &ZmArgs, trials: u64, seed: u64) -> Result<Report, CliError> {
    let rule = a.delta_rule();
    let points = zm_curve(&a.m_grid, rule, trials, seed)?;
    let hi = points.iter().map(|p| p.estimate).fold(f64::NEG_INFINITY, f64::max);
    let lo = points.iter().map(|p| p.estimate).fold(f64::INFINITY, f64::min);
    curve_summary(report.summary("max_over_min", hi / lo), &points).rows(&points)
}

fn lil(report: Report, a: &LilArgs, trials: u64, seed: u64) -> Result<Report, CliError> {
    let points = lil_curve(&a.r_grid, trials, seed)?;
    let c = points.iter().filter_map(|p| p.ratio).fold(f64::INFINITY, f64::min);
    curve_summary(report.summary("min_ratio", c), &points).rows(&points)
}

fn required<T: Copy>(v: Option<T>, flag: &str, check: CheckArg) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--check {check:?} needs --{flag}").to_lowercase()))
}

#[derive(Serialize)]
struct BennettRow {
    m: u64,
    p: f64,
    eps: f64,
    exact_prob: f64,
    log_exact_prob: f64,
    bound_value: f64,
    log_bound: f64,
    dominated: bool,
}

#[derive(Serialize)]
struct SweepRow {
    c1: f64,
    c2: f64,
    satisfied: usize,
    cells: usize,
    all_satisfied: bool,
}

fn sweep_report(report: Report, s: &ProbeSweep) -> Result<Report, CliError> {
    let rows: Vec<SweepRow> = s
        .rows
        .iter()
        .map(|r| SweepRow {
            c1: r.consts.c1,
            c2: r.consts.c2,
            satisfied: r.satisfied,
            cells: r.cells,
            all_satisfied: r.all_satisfied(),
        })
        .collect();
    report
        .summary("check", s.check.as_str())
        .summary("grid", Val::of(&s.grid)?)
        .summary("admissible", Val::of(&s.admissible)?)
        .rows(&rows)
}

fn oracle(report: Report, a: &OracleArgs) -> Result<Report, CliError> {
    let consts = ProbeConstants { c1: a.c1, c2: a.c2 };
    let check = a.check;
    if a.sweep {
        return match check {
            CheckArg::Prop14 => {
                let ms = a.m_grid.clone().unwrap_or_else(|| vec![100, 1000]);
                let ps = a.p_grid.clone().unwrap_or_else(|| vec![0.1, 0.25, 0.5]);
                let s = fixed_t_sweep(&ms, &a.delta_m_grid, &ps, a.c2, a.min_delta_m)?;
                sweep_report(report, &s)
            }
            CheckArg::Thm51 | CheckArg::Prop52 => {
                let m = required(a.m, "m", check)?;
                let delta = required(a.delta, "delta", check)?;
                let ps = a.p_grid.clone().unwrap_or_else(|| NO_CANCEL_P_GRID.to_vec());
                let dir = check.direction().expect("small-variance check has a direction");
                sweep_report(report, &no_cancel_sweep(m, delta, &ps, dir)?)
            }
            CheckArg::Bennett => {
                let ms = a.m_grid.clone().unwrap_or_else(|| vec![10, 100, 1000]);
                let ps = a.p_grid.clone().unwrap_or_else(|| vec![0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5]);
                let g = bennett_grid(&ms, &ps, &a.eps_grid)?;
                let rows: Vec<BennettRow> = g
                    .cells
                    .iter()
                    .map(|c| bennett_row(c.m, c.p, c.eps, c.log_exact, c.log_bound))
                    .collect();
                report.summary("violations", g.violations as u64).rows(&rows)
            }
        };
    }
    let m = required(a.m, "m", check)?;
    let p = required(a.p, "p", check)?;
    match check {
        CheckArg::Bennett => {
            let eps = required(a.eps, "eps", check)?;
            let log_exact = deviation_log_prob(&TailQuery::new(m, p, eps, TailSide::TwoSided))?;
            let log_bound = bennett_log_bound(m, p, eps)?.min(0.0);
            report.rows(&[bennett_row(m, p, eps, log_exact, log_bound)])
        }
        CheckArg::Prop14 => {
            let delta = required(a.delta, "delta", check)?;
            report.rows(&[fixed_t_lower_check(m, p, delta, consts, a.min_delta_m)?])
        }
        CheckArg::Thm51 | CheckArg::Prop52 => {
            let delta = required(a.delta, "delta", check)?;
            let dir = check.direction().expect("small-variance check has a direction");
            report.rows(&[no_cancel_check(m, p, delta, consts, dir)?])
        }
    }
}

fn bennett_row(m: u64, p: f64, eps: f64, log_exact: f64, log_bound: f64) -> BennettRow {
    BennettRow {
        m,
        p,
        eps,
        exact_prob: log_exact.exp(),
        log_exact_prob: log_exact,
        bound_value: log_bound.exp(),
        log_bound,
        dominated: log_exact <= log_bound + 1e-12,
    }
}

fn blocks(report: Report, a: &BlocksArgs, trials: u64, seed: u64) -> Result<Report, CliError> {
    let rows = block_surface(&a.xi, &a.eta, a.s0, trials, seed)?;
    report.rows(&rows)
}
