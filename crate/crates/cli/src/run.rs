//! `point`, `sweep` and `selftest`.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use fblb::montecarlo::{mc_point, point_seed};
use fblb::saddlepoint::{eps_at_rate, rate_at_eps};
use fblb::{BoundKind, BoundPoint, CgfEvaluator, ChannelConfig, Error, Settings, Target};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::DefaultsFile;
use crate::{usage, Axis, Format, Request, EXIT_INFEASIBLE, EXIT_OK, EXIT_SELFTEST, EXIT_USAGE};

/// Column order of the sweep CSV.
pub const CSV_HEADER: [&str; 12] =
    ["axis", "kind", "rate", "eps", "s", "tau", "xi", "exponent", "prefactor", "std_err", "n_samples", "status"];

/// One fully specified evaluation point.
#[derive(Debug, Clone, Copy)]
struct Problem {
    axis: Option<f64>,
    coherence: usize,
    blocks: usize,
    snr_db: f64,
    target: Target,
}

struct Plan {
    kinds: Vec<BoundKind>,
    settings: Settings,
    jobs: usize,
    out: Option<std::path::PathBuf>,
}

fn plan(req: &Request, defaults: &DefaultsFile) -> Result<Plan> {
    let names = req.kinds.clone().unwrap_or_else(|| defaults.run.kinds.clone());
    let mut kinds = Vec::new();
    for name in names.iter().map(|n| n.trim()).filter(|n| !n.is_empty()) {
        let k: BoundKind = name.parse().map_err(|e: Error| usage(e.to_string()))?;
        if !kinds.contains(&k) {
            kinds.push(k);
        }
    }
    if kinds.is_empty() {
        return Err(usage("no bound kinds requested"));
    }
    let mut settings = defaults.settings.clone();
    if let Some(n) = req.samples {
        settings.montecarlo.samples = n;
    }
    if let Some(seed) = req.seed {
        settings.montecarlo.seed = seed;
    }
    if req.fast_s {
        settings.search.fast_s = true;
    }
    settings.validate().map_err(|e| usage(e.to_string()))?;
    Ok(Plan {
        kinds,
        settings,
        jobs: req.jobs.unwrap_or(defaults.run.jobs),
        out: req.out.clone(),
    })
}

/// `(T, L)` from `--T`, `--L` and `--n`, with `blocks` overriding `--L`.
fn shape(req: &Request, defaults: &DefaultsFile, blocks: Option<usize>) -> Result<(usize, usize)> {
    let l = blocks.or(req.blocks);
    match (req.blocklength, l) {
        (Some(n), Some(l)) => {
            if l == 0 || n % l != 0 {
                return Err(usage(format!("L = {l} does not divide n = {n}")));
            }
            if let Some(t) = req.coherence.filter(|&t| t * l != n) {
                return Err(usage(format!("T = {t}, L = {l} and n = {n} are inconsistent")));
            }
            Ok((n / l, l))
        }
        (Some(n), None) => {
            let t = req.coherence.unwrap_or(defaults.run.coherence);
            if t == 0 || n % t != 0 {
                return Err(usage(format!("T = {t} does not divide n = {n}")));
            }
            Ok((t, n / t))
        }
        (None, l) => Ok((req.coherence.unwrap_or(defaults.run.coherence), l.unwrap_or(defaults.run.blocks))),
    }
}

fn target(req: &Request, axis: Option<Axis>) -> Result<Option<Target>> {
    match (axis, req.eps, req.rate) {
        (Some(Axis::Eps), Some(_), _) | (Some(Axis::Rate), _, Some(_)) => {
            Err(usage("the swept quantity cannot also be fixed"))
        }
        (Some(Axis::Eps | Axis::Rate), None, None) => Ok(None),
        (Some(Axis::Eps | Axis::Rate), _, _) => Err(usage("give no --eps/--rate when sweeping eps or rate")),
        (_, Some(e), None) => Ok(Some(Target::Eps(e))),
        (_, None, Some(r)) => Ok(Some(Target::Rate(r))),
        (_, Some(_), Some(_)) => Err(usage("give exactly one of --eps and --rate")),
        (_, None, None) => Err(usage("one of --eps and --rate is required")),
    }
}

fn check(problem: &Problem, settings: &Settings) -> Result<()> {
    match problem.target {
        Target::Eps(e) if !(e > 0.0 && e < 1.0) => return Err(usage(format!("eps = {e} must lie in (0, 1)"))),
        Target::Rate(r) if !(r >= 0.0 && r.is_finite()) => return Err(usage(format!("rate = {r} must be nonnegative"))),
        _ => {}
    }
    let cfg = ChannelConfig::from_db(problem.coherence, problem.blocks, problem.snr_db).map_err(|e| usage(e.to_string()))?;
    settings.check_rho(cfg.snr()).map_err(|e| usage(e.to_string()))
}

fn evaluator(problem: &Problem, settings: &Settings) -> fblb::Result<CgfEvaluator> {
    let cfg = ChannelConfig::from_db(problem.coherence, problem.blocks, problem.snr_db)?;
    CgfEvaluator::try_new(cfg, settings.quadrature)?.with_margin(settings.tau_margin)
}

fn evaluate(kind: BoundKind, eval: &CgfEvaluator, target: Target, settings: &Settings, seed: u64) -> fblb::Result<BoundPoint> {
    if kind.is_monte_carlo() {
        return mc_point(kind, eval, target, &settings.search, &settings.montecarlo, seed);
    }
    match target {
        Target::Eps(e) => rate_at_eps(kind, eval, e, &settings.search),
        Target::Rate(r) => eps_at_rate(kind, eval, r, &settings.search),
    }
}

/// Evaluates every `(problem, kind)` pair on `jobs` threads; the result
/// order is problem-major, kind-minor.
fn evaluate_all(problems: &[Problem], plan: &Plan) -> Result<Vec<(usize, BoundKind, fblb::Result<BoundPoint>)>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(plan.jobs).build()?;
    let evals: Vec<fblb::Result<CgfEvaluator>> = problems.iter().map(|p| evaluator(p, &plan.settings)).collect();
    let tasks: Vec<(usize, BoundKind)> =
        (0..problems.len()).flat_map(|i| plan.kinds.iter().map(move |&k| (i, k))).collect();
    let mc = &plan.settings.montecarlo;
    Ok(pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, kind)| {
                let r = match &evals[i] {
                    Ok(e) => evaluate(kind, e, problems[i].target, &plan.settings, point_seed(mc.seed, i, mc.crn)),
                    Err(e) => Err(e.clone()),
                };
                (i, kind, r)
            })
            .collect()
    }))
}

#[derive(Serialize)]
struct ErrorRecord {
    #[serde(rename = "type")]
    kind: &'static str,
    message: String,
    /// Feasible interval of the target, when the solver could tell.
    feasible: Option<[f64; 2]>,
}

impl ErrorRecord {
    fn new(e: &Error) -> Self {
        let kind = match e {
            Error::SaddleNotFound { .. } | Error::NoSolution(_) => "infeasible",
            Error::Domain { .. } => "domain",
            Error::Numeric { .. } => "numeric",
        };
        let feasible = match e {
            Error::SaddleNotFound { lo, hi, .. } => Some([*lo, *hi]),
            _ => None,
        };
        Self { kind, message: e.to_string(), feasible }
    }
}

fn exit_code(errors: &[&Error]) -> u8 {
    if errors.iter().any(|e| matches!(e, Error::Domain { .. })) {
        EXIT_USAGE
    } else if errors.is_empty() {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    }
}

#[derive(Serialize)]
struct PointRecord<'a> {
    coherence: usize,
    blocks: usize,
    snr_db: f64,
    kind: BoundKind,
    point: Option<&'a BoundPoint>,
    error: Option<ErrorRecord>,
}

/// A CSV row; also the JSON sweep record.
#[derive(Serialize)]
struct Row {
    axis: Option<f64>,
    kind: BoundKind,
    rate: Option<f64>,
    eps: Option<f64>,
    s: Option<f64>,
    tau: Option<f64>,
    xi: Option<f64>,
    exponent: Option<f64>,
    prefactor: Option<f64>,
    std_err: Option<f64>,
    n_samples: Option<u64>,
    status: &'static str,
}

impl Row {
    fn new(axis: Option<f64>, kind: BoundKind, r: &fblb::Result<BoundPoint>) -> Self {
        match r {
            Ok(p) => Row {
                axis,
                kind,
                rate: Some(p.rate),
                eps: Some(p.eps),
                s: p.witness.s,
                tau: p.witness.tau,
                xi: p.witness.log_xi,
                exponent: p.diagnostics.exponent,
                prefactor: p.diagnostics.prefactor,
                std_err: p.diagnostics.std_err,
                n_samples: p.diagnostics.n_samples,
                status: if p.diagnostics.vacuous { "vacuous" } else { "ok" },
            },
            Err(e) => Row {
                axis,
                kind,
                rate: None,
                eps: None,
                s: None,
                tau: None,
                xi: None,
                exponent: None,
                prefactor: None,
                std_err: None,
                n_samples: None,
                status: ErrorRecord::new(e).kind,
            },
        }
    }

    fn fields(&self) -> Vec<String> {
        fn f(x: Option<f64>) -> String {
            x.map(|v| v.to_string()).unwrap_or_default()
        }
        vec![
            f(self.axis),
            self.kind.to_string(),
            f(self.rate),
            f(self.eps),
            f(self.s),
            f(self.tau),
            f(self.xi),
            f(self.exponent),
            f(self.prefactor),
            f(self.std_err),
            self.n_samples.map(|n| n.to_string()).unwrap_or_default(),
            self.status.to_string(),
        ]
    }
}

fn csv_bytes(rows: &[Row]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    Ok(w.into_inner()?)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            Ok(stdout.flush()?)
        }
    }
}

pub fn point(req: &Request, defaults: &DefaultsFile) -> Result<u8> {
    let plan = plan(req, defaults)?;
    let (coherence, blocks) = shape(req, defaults, None)?;
    let target = target(req, None)?.expect("fixed target");
    let problem = Problem { axis: None, coherence, blocks, snr_db: req.snr_db.unwrap_or(defaults.run.snr_db), target };
    check(&problem, &plan.settings)?;
    let results = evaluate_all(&[problem], &plan)?;
    let errors: Vec<&Error> = results.iter().filter_map(|(_, _, r)| r.as_ref().err()).collect();
    let bytes = match req.format.unwrap_or(Format::Json) {
        Format::Json => {
            let records: Vec<PointRecord> = results
                .iter()
                .map(|(_, kind, r)| PointRecord {
                    coherence,
                    blocks,
                    snr_db: problem.snr_db,
                    kind: *kind,
                    point: r.as_ref().ok(),
                    error: r.as_ref().err().map(ErrorRecord::new),
                })
                .collect();
            let mut b = serde_json::to_vec_pretty(&records)?;
            b.push(b'\n');
            b
        }
        Format::Csv => csv_bytes(&results.iter().map(|(_, k, r)| Row::new(None, *k, r)).collect::<Vec<_>>())?,
    };
    emit(plan.out.as_deref(), &bytes)?;
    Ok(exit_code(&errors))
}

/// Values `start, start + step, …` up to `stop`, on a 1e-12 grid.
pub fn parse_range(range: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = range.split(':').collect();
    let [a, b, step] = parts[..] else {
        return Err(usage(format!("range {range:?} is not start:stop:step")));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| usage(format!("bad number {s:?} in range {range:?}")));
    let (a, b, step) = (num(a)?, num(b)?, num(step)?);
    if !(a.is_finite() && b.is_finite() && step > 0.0 && b >= a) {
        return Err(usage(format!("range {range:?} needs start ≤ stop and step > 0")));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(usage(format!("range {range:?} has {count} points")));
    }
    Ok((0..count).map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12).collect())
}

fn pow10(x: f64) -> f64 {
    if x == x.round() {
        format!("1e{}", x as i64).parse().unwrap_or_else(|_| 10f64.powf(x))
    } else {
        10f64.powf(x)
    }
}

fn problems(req: &Request, axis: Axis, values: &[f64], defaults: &DefaultsFile) -> Result<Vec<Problem>> {
    let fixed = target(req, Some(axis))?;
    let snr_db = req.snr_db.unwrap_or(defaults.run.snr_db);
    let mut out = Vec::new();
    for &v in values {
        let p = match axis {
            Axis::Blocks => {
                if v < 1.0 || v != v.round() {
                    return Err(usage(format!("L = {v} is not a positive integer")));
                }
                let l = v as usize;
                if req.blocklength.is_some_and(|n| n % l != 0) {
                    continue;
                }
                let (t, l) = shape(req, defaults, Some(l))?;
                Problem { axis: Some(v), coherence: t, blocks: l, snr_db, target: fixed.expect("fixed target") }
            }
            Axis::Snr => {
                let (t, l) = shape(req, defaults, None)?;
                Problem { axis: Some(v), coherence: t, blocks: l, snr_db: v, target: fixed.expect("fixed target") }
            }
            Axis::Eps => {
                let (t, l) = shape(req, defaults, None)?;
                let e = pow10(v);
                Problem { axis: Some(e), coherence: t, blocks: l, snr_db, target: Target::Eps(e) }
            }
            Axis::Rate => {
                let (t, l) = shape(req, defaults, None)?;
                Problem { axis: Some(v), coherence: t, blocks: l, snr_db, target: Target::Rate(v) }
            }
        };
        out.push(p);
    }
    if out.is_empty() {
        return Err(usage("the sweep has no valid points"));
    }
    Ok(out)
}

pub fn sweep(req: &Request, axis: Axis, range: &str, defaults: &DefaultsFile) -> Result<u8> {
    let plan = plan(req, defaults)?;
    let values = parse_range(range)?;
    let problems = problems(req, axis, &values, defaults)?;
    for p in &problems {
        check(p, &plan.settings)?;
    }
    let results = evaluate_all(&problems, &plan)?;
    let rows: Vec<Row> = results.iter().map(|(i, k, r)| Row::new(problems[*i].axis, *k, r)).collect();
    for (i, kind, r) in &results {
        if let Err(e) = r {
            let record = serde_json::json!({ "axis": problems[*i].axis, "kind": kind, "error": ErrorRecord::new(e) });
            eprintln!("{record}");
        }
    }
    let bytes = match req.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_bytes(&rows)?,
        Format::Json => {
            let mut b = serde_json::to_vec_pretty(&rows)?;
            b.push(b'\n');
            b
        }
    };
    emit(plan.out.as_deref(), &bytes)?;
    let any_ok = results.iter().any(|(_, _, r)| r.is_ok());
    Ok(if any_ok { EXIT_OK } else { EXIT_INFEASIBLE })
}

pub fn selftest() -> Result<u8> {
    let report = fblb::selftest::run();
    println!("{}", serde_json::to_string_pretty(&report)?);
    for c in report.failures() {
        eprintln!("selftest failed: {}: {}", c.name, c.detail);
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_SELFTEST })
}
