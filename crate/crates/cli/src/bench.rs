//! Timing of the saddlepoint and Monte-Carlo evaluations at two values of L.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::Args;
use fblb::montecarlo::rcus_mc;
use fblb::saddlepoint::rate_at_eps;
use fblb::{BoundKind, CgfEvaluator, ChannelConfig, QuadratureSpec};
use serde::Serialize;

use crate::config::DefaultsFile;
use crate::EXIT_OK;

const SHORT: usize = 10;
const LONG: usize = 100;

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[arg(long = "T", env = "FBLB_T")]
    coherence: Option<usize>,
    #[arg(long, env = "FBLB_SNR_DB", allow_negative_numbers = true)]
    snr_db: Option<f64>,
    /// Error target of the saddlepoint solves.
    #[arg(long, env = "FBLB_EPS", default_value_t = 1e-5)]
    eps: f64,
    /// Monte-Carlo samples per timing.
    #[arg(long, env = "FBLB_SAMPLES", default_value_t = 100_000)]
    samples: u64,
    /// Repetitions; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, env = "FBLB_JOBS")]
    jobs: Option<usize>,
    #[arg(long, env = "FBLB_OUT")]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Timing {
    seconds_short: f64,
    seconds_long: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct Report {
    coherence: usize,
    snr_db: f64,
    blocks: [usize; 2],
    quadrature: QuadratureSpec,
    /// Rule actually used at s = 1 after the doubled-node check.
    effective_quadrature: QuadratureSpec,
    saddlepoint_eps: f64,
    saddlepoint_kinds: [BoundKind; 2],
    saddlepoint: Timing,
    mc_samples: u64,
    mc_rate: f64,
    montecarlo: Timing,
}

fn fastest(reps: usize, mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    let mut best = f64::INFINITY;
    for _ in 0..reps.max(1) {
        let t0 = Instant::now();
        f()?;
        best = best.min(t0.elapsed().as_secs_f64());
    }
    Ok(best)
}

pub fn run(args: &BenchArgs, defaults: &DefaultsFile) -> Result<u8> {
    let settings = &defaults.settings;
    let t = args.coherence.unwrap_or(defaults.run.coherence);
    let snr_db = args.snr_db.unwrap_or(defaults.run.snr_db);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs.unwrap_or(defaults.run.jobs)).build()?;
    let kinds = [BoundKind::RcusSp, BoundKind::McSp];
    let fresh = |l: usize| -> Result<CgfEvaluator> {
        Ok(CgfEvaluator::try_new(ChannelConfig::from_db(t, l, snr_db)?, settings.quadrature)?.with_margin(settings.tau_margin)?)
    };
    let sp_time = |l: usize| {
        fastest(args.reps, || {
            let e = fresh(l)?;
            for k in kinds {
                rate_at_eps(k, &e, args.eps, &settings.search)?;
            }
            Ok(())
        })
    };
    let probe = fresh(SHORT)?;
    let rate = 0.5 * probe.stats(1.0)?.i_s / t as f64;
    let mc_time = |l: usize| {
        let cfg = ChannelConfig::from_db(t, l, snr_db)?;
        pool.install(|| fastest(args.reps, || Ok(rcus_mc(&cfg, 1.0, rate, args.samples, settings.montecarlo.seed).map(|_| ())?)))
    };
    let timing = |short: f64, long: f64| Timing { seconds_short: short, seconds_long: long, ratio: long / short };
    let report = Report {
        coherence: t,
        snr_db,
        blocks: [SHORT, LONG],
        quadrature: settings.quadrature,
        effective_quadrature: probe.effective_rule(1.0)?,
        saddlepoint_eps: args.eps,
        saddlepoint_kinds: kinds,
        saddlepoint: timing(sp_time(SHORT)?, sp_time(LONG)?),
        mc_samples: args.samples,
        mc_rate: rate,
        montecarlo: timing(mc_time(SHORT)?, mc_time(LONG)?),
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match &args.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}
