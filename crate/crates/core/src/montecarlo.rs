//! Monte-Carlo evaluation of the RCUs and meta-converse bounds.
//!
//! Samples are drawn in blocks of [`BLOCK_SIZE`]. Block `b` uses a ChaCha8
//! generator seeded with the user seed and switched to stream `b`, so every
//! estimate depends only on `(seed, N)` and not on how blocks are spread
//! over threads. One pass evaluates any number of thresholds on the same
//! samples, which is how rate sweeps get common random numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cgf::{CgfEvaluator, TiltPoint};
use crate::channel::{sample_gamma_pair, ChannelConfig, InfoDensityKernel};
use crate::saddlepoint::{eps_at_rate, rate_at_eps, BoundKind, BoundPoint, SearchOptions, Target, Witness};
use crate::settings::McSettings;
use crate::{Error, Real, Result};

/// Samples per independently seeded block.
pub const BLOCK_SIZE: u64 = 1 << 16;

/// Smallest accepted sample count.
pub const MIN_SAMPLES: u64 = 10_000;

/// A tail-probability estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_count(hits: u64, n: u64, seed: u64) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            value: p,
            std_err: (p * (1.0 - p) / n as f64).sqrt(),
            n_samples: n,
            seed,
        }
    }
}

/// Meta-converse estimate together with the `ln ξ` that attained it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McBoundEstimate {
    pub estimate: McEstimate,
    pub log_xi: f64,
    /// Every `ξ` on the ladder gave a negative bound.
    pub vacuous: bool,
}

fn check_samples(n: u64) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::domain("montecarlo", format!("N = {n} must be at least {MIN_SAMPLES}")));
    }
    Ok(())
}

/// Counts, for every threshold `c_k`, the samples with
/// `Σ_ℓ i_{ℓ,s} (+ ln U) ≤ c_k`.
pub fn count_below<T: Real>(
    cfg: &ChannelConfig<T>,
    s: T,
    thresholds: &[T],
    with_log_u: bool,
    n: u64,
    seed: u64,
) -> Result<Vec<u64>> {
    let kernel = InfoDensityKernel::new(cfg, s)?;
    let blocks = cfg.blocks();
    let coherence = cfg.coherence();
    let n_blocks = n.div_ceil(BLOCK_SIZE);
    let per_block: Vec<Vec<u64>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let len = BLOCK_SIZE.min(n - b * BLOCK_SIZE);
            let mut counts = vec![0u64; thresholds.len()];
            for _ in 0..len {
                let mut sum = T::zero();
                for _ in 0..blocks {
                    let pair = sample_gamma_pair::<T, _>(&mut rng, coherence);
                    sum = sum + kernel.eval(pair.u1, pair.u2);
                }
                // Always drawn, so runs with and without `U` share a stream.
                let log_u = T::lit((1.0 - rng.gen::<f64>()).ln());
                if with_log_u {
                    sum = sum + log_u;
                }
                for (c, &thr) in counts.iter_mut().zip(thresholds) {
                    if sum <= thr {
                        *c += 1;
                    }
                }
            }
            counts
        })
        .collect();
    let mut total = vec![0u64; thresholds.len()];
    for counts in per_block {
        for (t, c) in total.iter_mut().zip(counts) {
            *t += c;
        }
    }
    Ok(total)
}

/// `P[Σ_ℓ (I_s − i_{ℓ,s}) ≥ γ (+ ln U)]`.
pub fn tail_prob<T: Real>(eval: &CgfEvaluator<T>, s: T, gamma: T, with_log_u: bool, n: u64, seed: u64) -> Result<McEstimate> {
    check_samples(n)?;
    let cfg = eval.config();
    let l = T::of(cfg.blocks());
    let i_s = eval.stats(s)?.i_s;
    let c = count_below(cfg, s, &[l * i_s - gamma], with_log_u, n, seed)?;
    Ok(McEstimate::from_count(c[0], n, seed))
}

/// RCUs bound at every rate of `rates` on one set of samples.
///
/// The event `Σ(I_s − i) ≥ L I_s + ln U − LTR` is `Σ i + ln U ≤ LTR`, so
/// the estimate needs no quadrature.
pub fn rcus_mc_sweep<T: Real>(cfg: &ChannelConfig<T>, s: T, rates: &[T], n: u64, seed: u64) -> Result<Vec<McEstimate>> {
    check_samples(n)?;
    if rates.iter().any(|&r| !(r >= T::zero())) {
        return Err(Error::domain("rcus_mc", "rates must be nonnegative"));
    }
    let lt = T::of(cfg.blocklength());
    let thr: Vec<T> = rates.iter().map(|&r| lt * r).collect();
    let c = count_below(cfg, s, &thr, true, n, seed)?;
    Ok(c.into_iter().map(|k| McEstimate::from_count(k, n, seed)).collect())
}

/// RCUs bound at rate `rate` (nats per channel use).
pub fn rcus_mc<T: Real>(cfg: &ChannelConfig<T>, s: T, rate: T, n: u64, seed: u64) -> Result<McEstimate> {
    Ok(rcus_mc_sweep(cfg, s, &[rate], n, seed)?[0])
}

/// The saddlepoint choice `ln ξ = L J_s − L ψ′(τ)/s`.
pub fn saddlepoint_log_xi<T: Real>(eval: &CgfEvaluator<T>, s: T, tau: T) -> Result<T> {
    let b = eval.cgf_bundle(TiltPoint { s, tau })?;
    Ok(T::of(eval.config().blocks()) * (b.stats.j_s - b.psi1 / s))
}

/// Offsets `ln ξ − LTR` of the default ladder: −0.5, −1, …, −25.
pub fn default_xi_offsets() -> Vec<f64> {
    (1..=50).map(|k| -0.5 * k as f64).collect()
}

/// Meta-converse bound at rate `rate`, maximised over a ladder of `ln ξ`
/// values. The saddlepoint choice at `tau` is always added to the ladder.
///
/// The event `Σ(I_s − i) ≥ sLJ_s − s ln ξ` is `Σ i ≤ s ln ξ − sL ln μ(s)`.
#[allow(clippy::too_many_arguments)]
pub fn mc_bound_mc<T: Real>(
    eval: &CgfEvaluator<T>,
    s: T,
    tau: Option<T>,
    rate: T,
    log_xi_ladder: &[T],
    n: u64,
    seed: u64,
) -> Result<McBoundEstimate> {
    check_samples(n)?;
    if !(rate >= T::zero()) {
        return Err(Error::domain("mc_bound_mc", format!("rate = {rate:?} must be nonnegative")));
    }
    let mut ladder = log_xi_ladder.to_vec();
    if let Some(tau) = tau {
        ladder.push(saddlepoint_log_xi(eval, s, tau)?);
    }
    if ladder.is_empty() {
        return Err(Error::domain("mc_bound_mc", "empty ξ ladder"));
    }
    let cfg = eval.config();
    let l = T::of(cfg.blocks());
    let ln_mu = eval.mu(s)?.ln();
    let thr: Vec<T> = ladder.iter().map(|&x| s * x - s * l * ln_mu).collect();
    let counts = count_below(cfg, s, &thr, false, n, seed)?;
    let lt_r = T::of(cfg.blocklength()) * rate;
    let mut best: Option<(f64, usize)> = None;
    for (k, (&x, &c)) in ladder.iter().zip(&counts).enumerate() {
        let v = c as f64 / n as f64 - (x - lt_r).f64().exp();
        if best.map_or(true, |(bv, _)| v > bv) {
            best = Some((v, k));
        }
    }
    let (v, k) = best.expect("nonempty ladder");
    let base = McEstimate::from_count(counts[k], n, seed);
    Ok(McBoundEstimate {
        estimate: McEstimate { value: v.max(0.0), ..base },
        log_xi: ladder[k].f64(),
        vacuous: v <= 0.0,
    })
}

/// Ladder `LTR + offsets` for [`mc_bound_mc`].
pub fn xi_ladder<T: Real>(cfg: &ChannelConfig<T>, rate: T, offsets: &[f64]) -> Vec<T> {
    let lt_r = T::of(cfg.blocklength()) * rate;
    offsets.iter().map(|&o| lt_r + T::lit(o)).collect()
}

/// Monte-Carlo kinds as points: the bound is evaluated at the `s`, `τ` and
/// rate chosen by the matching saddlepoint kind for `target`, so an error
/// target yields the MC estimate at the saddlepoint rate.
pub fn mc_point<T: Real>(
    kind: BoundKind,
    eval: &CgfEvaluator<T>,
    target: Target,
    opts: &SearchOptions,
    mc: &McSettings,
    seed: u64,
) -> Result<BoundPoint> {
    let sp_kind = match kind {
        BoundKind::RcusMc => BoundKind::RcusSp,
        BoundKind::McMc => BoundKind::McSp,
        _ => return Err(Error::domain("mc_point", format!("{kind} is not a Monte-Carlo kind"))),
    };
    let sp = match target {
        Target::Eps(e) => rate_at_eps(sp_kind, eval, T::lit(e), opts)?,
        Target::Rate(r) => eps_at_rate(sp_kind, eval, T::lit(r), opts)?,
    };
    let s = sp.witness.s.unwrap_or(1.0);
    let rate = match target {
        Target::Eps(_) => sp.rate,
        Target::Rate(r) => r,
    };
    let n = mc.samples;
    let (est, log_xi, vacuous) = if kind == BoundKind::RcusMc {
        (rcus_mc(eval.config(), T::lit(s), T::lit(rate), n, seed)?, None, false)
    } else {
        let ladder = xi_ladder(eval.config(), T::lit(rate), &mc.xi_offsets);
        let tau = sp.witness.tau.map(T::lit);
        let b = mc_bound_mc(eval, T::lit(s), tau, T::lit(rate), &ladder, n, seed)?;
        (b.estimate, Some(b.log_xi), b.vacuous)
    };
    let mut p = BoundPoint::new(kind, rate, est.value);
    p.witness = Witness { s: Some(s), tau: sp.witness.tau, log_xi };
    p.diagnostics.vacuous = vacuous;
    p.diagnostics.std_err = Some(est.std_err);
    p.diagnostics.n_samples = Some(est.n_samples);
    p.diagnostics.seed = Some(est.seed);
    Ok(p)
}

/// Seed of the `index`-th point of a sweep: the base seed under common
/// random numbers, otherwise a distinct seed per point.
pub fn point_seed(seed: u64, index: usize, crn: bool) -> u64 {
    if crn {
        seed
    } else {
        seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}
