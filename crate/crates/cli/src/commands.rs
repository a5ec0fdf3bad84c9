//! Verb implementations.

use num_rational::BigRational;
use rmbec::codes::min_distance_bruteforce;
use rmbec::exit::{average_exit_exact, exit_exact, exit_exact_all, exit_monte_carlo, rational_to_f64, verify_area_theorem, CurvePoint, ExitCurve, MAX_EXACT_N};
use rmbec::symmetry::{symmetry_report, verify_exit_equality};
use rmbec::threshold::{estimate_crossings_exact, fit_constant_c, threshold_monte_carlo, ConstantFit, ThresholdReport};
use rmbec::{monotonicity_check, ExitPolynomial, Focus, LinearCode};
use serde::Serialize;

use crate::config::{load_code, rm_params, slug, RunConfig};
use crate::output::OutputDir;
use crate::svg::{overlay, Series};
use crate::CliError;

/// Whether every check of a verb passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

/// Brute-force distance is attempted when `2^K · N` stays below this.
const BRUTE_FORCE_BUDGET: u128 = 1 << 28;

/// Dominance checks run by `verify`.
const VERIFY_MONOTONE_CHECKS: usize = 2000;

fn require_codes(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.codes.is_empty() {
        return Err(CliError::Usage("no code given (use --code rm:n,r or a generator file)".into()));
    }
    Ok(())
}

fn capacity(code: &LinearCode) -> f64 {
    1.0 - rational_to_f64(&code.rate())
}

fn ratio_string(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        q.to_string()
    }
}

pub fn code_info(cfg: &RunConfig) -> Result<Outcome, CliError> {
    require_codes(cfg)?;
    for spec in &cfg.codes {
        let code = load_code(spec)?;
        let (n, k) = (code.len(), code.dimension());
        let brute = k < 64 && (1u128 << k) * n as u128 <= BRUTE_FORCE_BUDGET;
        let (d, how) = if brute {
            (Some(min_distance_bruteforce(&code)?), "exhaustive")
        } else if let Some(p) = rm_params(&code) {
            (Some(p.min_distance()), "formula")
        } else {
            (None, "unknown")
        };
        let d = d.map_or_else(|| "?".to_string(), |d| d.to_string());
        println!(
            "code={} N={n} K={k} d={d} R={} distance={how}",
            code.label(),
            ratio_string(&code.rate())
        );
    }
    Ok(Outcome::Pass)
}

fn exact_polynomial(code: &LinearCode, focus: Focus) -> Result<ExitPolynomial, CliError> {
    Ok(match focus {
        Focus::Bit(i) => exit_exact(code, i)?,
        Focus::Average => average_exit_exact(code)?,
    })
}

fn exact_curve(p: &ExitPolynomial, label: &str, grid: &[f64]) -> ExitCurve<f64> {
    ExitCurve {
        label: label.to_string(),
        focus: p.focus(),
        seed: 0,
        points: grid
            .iter()
            .map(|&eps| CurvePoint {
                eps,
                h: p.eval(eps),
                half_width: 0.0,
                trials: 0,
            })
            .collect(),
    }
}

pub fn exit(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    require_codes(cfg)?;
    for spec in &cfg.codes {
        let code = load_code(spec)?;
        let focus = cfg.focus_for(&code)?;
        let name = slug(code.label());
        if cfg.exact {
            let p = exact_polynomial(&code, focus)?;
            let mut json = serde_json::to_string_pretty(&p.to_json()).map_err(|e| CliError::Io(e.to_string()))?;
            json.push('\n');
            out.write(&format!("{name}.exit.json"), json.as_bytes())?;
            out.write(&format!("{name}.csv"), exact_curve(&p, code.label(), &cfg.grid).to_csv().as_bytes())?;
            println!("{}: exact EXIT (focus {focus}), area {}", code.label(), ratio_string(&p.area()));
        } else {
            let curve = exit_monte_carlo::<f64>(&code, focus, &cfg.grid, cfg.trials, cfg.seed)?;
            out.write(&format!("{name}.csv"), curve.to_csv().as_bytes())?;
            println!(
                "{}: Monte Carlo EXIT (focus {focus}), {} points x {} trials",
                code.label(),
                curve.points.len(),
                cfg.trials
            );
        }
    }
    Ok(Outcome::Pass)
}

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    pass: bool,
    detail: String,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    code: String,
    blocklength: usize,
    dimension: usize,
    rate: String,
    area: String,
    checks: Vec<Check>,
    pass: bool,
}

fn verify_one(code: &LinearCode, cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    if code.len() > MAX_EXACT_N {
        return Err(CliError::Cap(format!(
            "{}: the exact suite needs N <= {MAX_EXACT_N} (N = {}); use `exit` or `threshold` for Monte Carlo",
            code.label(),
            code.len()
        )));
    }
    let mut checks = Vec::new();
    let area = verify_area_theorem(code)?;
    for c in &area.checks {
        checks.push(Check {
            name: c.name.clone(),
            pass: c.pass,
            detail: format!("{} vs {}", c.lhs, c.rhs),
        });
    }
    let equal = verify_exit_equality(code)?;
    checks.push(Check {
        name: "exit_equality".into(),
        pass: equal,
        detail: if equal { "all bits share one EXIT function".into() } else { "EXIT functions differ between bits".into() },
    });
    let profiles = exit_exact_all(code)?;
    let bad: Vec<usize> = (0..profiles.len()).filter(|&i| !profiles[i].has_monotone_profile()).collect();
    checks.push(Check {
        name: "monotone_profile".into(),
        pass: bad.is_empty(),
        detail: format!("{} of {} bits with decreasing normalized weights", bad.len(), profiles.len()),
    });
    let mono = monotonicity_check(code, VERIFY_MONOTONE_CHECKS, cfg.seed)?;
    checks.push(Check {
        name: "failure_set_monotone".into(),
        pass: mono.pass(),
        detail: format!("{} violations in {} dominance checks", mono.violations, mono.checks),
    });
    if let Some(p) = rm_params(code) {
        let sym = symmetry_report(code, p.n(), cfg.quads, cfg.seed)?;
        checks.push(Check {
            name: "affine_symmetry".into(),
            pass: sym.pass,
            detail: format!(
                "{} witness and {} closure failures over {} quadruples",
                sym.witness_failures, sym.closure_failures, sym.quads
            ),
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        code: code.label().to_string(),
        blocklength: code.len(),
        dimension: code.dimension(),
        rate: area.rate.clone(),
        area: area.area.clone(),
        checks,
        pass,
    })
}

pub fn verify(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    require_codes(cfg)?;
    let mut all = true;
    for spec in &cfg.codes {
        let code = load_code(spec)?;
        let report = verify_one(&code, cfg)?;
        out.write_json(&format!("verify_{}.json", slug(code.label())), &report)?;
        for c in &report.checks {
            println!("{} {:<24} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        println!(
            "{}: {} (area {}, rate {})",
            report.code,
            if report.pass { "pass" } else { "FAIL" },
            report.area,
            report.rate
        );
        all &= report.pass;
    }
    Ok(if all { Outcome::Pass } else { Outcome::Fail })
}

pub fn symmetry(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    require_codes(cfg)?;
    let mut all = true;
    for spec in &cfg.codes {
        let code = load_code(spec)?;
        let p = rm_params(&code).ok_or_else(|| {
            CliError::Usage(format!("{}: symmetry checks need a Reed-Muller code", code.label()))
        })?;
        let report = symmetry_report(&code, p.n(), cfg.quads, cfg.seed)?;
        out.write_json(&format!("symmetry_{}.json", slug(code.label())), &report)?;
        println!(
            "{}: {} ({} quadruples, {} witness failures, {} closure failures)",
            report.label,
            if report.pass { "pass" } else { "FAIL" },
            report.quads,
            report.witness_failures,
            report.closure_failures
        );
        all &= report.pass;
    }
    Ok(if all { Outcome::Pass } else { Outcome::Fail })
}

/// One code at one δ: exact crossings when `--exact`, otherwise Monte Carlo
/// with a refinement pass.
fn threshold_one(code: &LinearCode, cfg: &RunConfig, delta: f64) -> Result<(ExitCurve<f64>, ThresholdReport<f64>), CliError> {
    let focus = cfg.focus_for(code)?;
    if cfg.exact {
        let p = exact_polynomial(code, focus)?;
        let report = estimate_crossings_exact(&p, code.label(), capacity(code), delta)?;
        Ok((exact_curve(&p, code.label(), &cfg.grid), report))
    } else {
        Ok(threshold_monte_carlo(code, focus, &cfg.grid, cfg.trials, cfg.seed, delta)?)
    }
}

fn curve_file(name: &str, delta: f64, many: bool) -> String {
    if many {
        format!("{name}.delta-{delta}.csv")
    } else {
        format!("{name}.csv")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.5}"))
}

fn print_table(reports: &[ThresholdReport<f64>]) {
    println!(
        "{:<14} {:>7} {:>6} {:>9} {:>9} {:>9} {:>9} {:>8}",
        "code", "N", "delta", "eps_low", "eps_mid", "eps_up", "width", "1-R"
    );
    for r in reports {
        println!(
            "{:<14} {:>7} {:>6} {:>9} {:>9} {:>9} {:>9} {:>8.5}",
            r.label,
            r.blocklength,
            r.delta,
            fmt_opt(r.eps_lower),
            fmt_opt(r.eps_mid),
            fmt_opt(r.eps_upper),
            fmt_opt(r.width),
            r.capacity
        );
    }
}

#[derive(Debug, Serialize)]
struct ThresholdFile<'a> {
    reports: &'a [ThresholdReport<f64>],
}

pub fn threshold(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    require_codes(cfg)?;
    let many = cfg.deltas.len() > 1;
    let mut reports = Vec::new();
    for spec in &cfg.codes {
        let code = load_code(spec)?;
        for &delta in &cfg.deltas {
            let (curve, report) = threshold_one(&code, cfg, delta)?;
            out.write(&curve_file(&slug(code.label()), delta, many), curve.to_csv().as_bytes())?;
            reports.push(report);
        }
    }
    out.write_json("threshold.json", &ThresholdFile { reports: &reports })?;
    print_table(&reports);
    Ok(Outcome::Pass)
}

#[derive(Debug, Serialize)]
struct SweepFailure {
    code: String,
    error: String,
}

#[derive(Debug, Serialize)]
struct SweepFit {
    delta: f64,
    fit: Option<ConstantFit<f64>>,
    note: Option<String>,
}

#[derive(Debug, Serialize)]
struct SweepFile<'a> {
    reports: &'a [ThresholdReport<f64>],
    fits: Vec<SweepFit>,
    failures: Vec<SweepFailure>,
}

pub fn sweep(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    require_codes(cfg)?;
    let many = cfg.deltas.len() > 1;
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    let mut curves: Vec<(String, ExitCurve<f64>)> = Vec::new();
    let mut capacities: Vec<f64> = Vec::new();
    for spec in &cfg.codes {
        let mut run = || -> Result<(), CliError> {
            let code = load_code(spec)?;
            let mut first = None;
            let mut local = Vec::new();
            for &delta in &cfg.deltas {
                let (curve, report) = threshold_one(&code, cfg, delta)?;
                local.push((curve_file(&slug(code.label()), delta, many), curve.to_csv(), report));
                first.get_or_insert(curve);
            }
            for (file, csv, report) in local {
                out.write(&file, csv.as_bytes())?;
                reports.push(report);
            }
            let cap = capacity(&code);
            if !capacities.contains(&cap) {
                capacities.push(cap);
            }
            curves.push((code.label().to_string(), first.expect("at least one delta")));
            Ok(())
        };
        if let Err(e) = run() {
            eprintln!("{spec}: {e}");
            failures.push(SweepFailure {
                code: spec.clone(),
                error: e.to_string(),
            });
        }
    }
    let fits = cfg
        .deltas
        .iter()
        .map(|&delta| {
            let subset: Vec<ThresholdReport<f64>> = reports.iter().filter(|r| r.delta == delta).cloned().collect();
            match fit_constant_c(&subset) {
                Ok(fit) => SweepFit { delta, fit: Some(fit), note: None },
                Err(e) => SweepFit { delta, fit: None, note: Some(e.to_string()) },
            }
        })
        .collect::<Vec<_>>();
    let failed = failures.len();
    out.write_json("sweep.json", &SweepFile { reports: &reports, fits, failures })?;
    let series: Vec<Series<'_>> = curves
        .iter()
        .map(|(label, c)| Series {
            label,
            points: c.points.iter().map(|p| (p.eps, p.h)).collect(),
        })
        .collect();
    out.write("sweep.svg", overlay(&series, &capacities).as_bytes())?;
    print_table(&reports);
    if failed > 0 {
        println!("{failed} of {} codes failed", cfg.codes.len());
        return Ok(Outcome::Fail);
    }
    Ok(Outcome::Pass)
}
