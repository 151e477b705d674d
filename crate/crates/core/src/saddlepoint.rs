//! Saddlepoint approximations of the RCUs and meta-converse bounds, their
//! prefactor/exponent forms, and the searches over `(s, τ)` that turn them
//! into rate-versus-error trade-offs.
//!
//! All `o(1/√L)` remainders are dropped. Error probabilities are carried in
//! log form until the very end, so exponents far below the `f64` range only
//! ever show up as `eps = 0` with a finite `log_eps`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cgf::{CgfBundle, CgfEvaluator, TiltPoint};
use crate::roots::{brent_root, golden_min, scan_then_brent};
use crate::special::q_scaled;
use crate::{asymptotics, Error, Real, Result};

/// Which bound or approximation a [`BoundPoint`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// Saddlepoint approximation of the RCUs achievability bound.
    RcusSp,
    /// Saddlepoint approximation of the meta-converse bound.
    McSp,
    /// RCUs bound by Monte-Carlo.
    RcusMc,
    /// Meta-converse bound by Monte-Carlo.
    McMc,
    /// Normal approximation with numerically computed capacity and dispersion.
    Na,
    /// Normal approximation with the high-SNR closed forms.
    Hsna,
    /// Error-exponent approximation `ε ≈ e^{−L E_r(R)}`.
    Eea,
    /// Error-exponent approximation with the `L^{−(1+τ)/2}` prefactor.
    EeaPref,
    /// Prefactor times exponent, upper (achievability) side.
    PeeaUpper,
    /// Prefactor times exponent, lower (converse) side.
    PeeaLower,
}

impl BoundKind {
    pub const ALL: [BoundKind; 10] = [
        BoundKind::RcusSp,
        BoundKind::McSp,
        BoundKind::RcusMc,
        BoundKind::McMc,
        BoundKind::Na,
        BoundKind::Hsna,
        BoundKind::Eea,
        BoundKind::EeaPref,
        BoundKind::PeeaUpper,
        BoundKind::PeeaLower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::RcusSp => "rcus-sp",
            BoundKind::McSp => "mc-sp",
            BoundKind::RcusMc => "rcus-mc",
            BoundKind::McMc => "mc-mc",
            BoundKind::Na => "na",
            BoundKind::Hsna => "hsna",
            BoundKind::Eea => "eea",
            BoundKind::EeaPref => "eea-pref",
            BoundKind::PeeaUpper => "peea-upper",
            BoundKind::PeeaLower => "peea-lower",
        }
    }

    /// True for the kinds evaluated by sampling.
    pub fn is_monte_carlo(self) -> bool {
        matches!(self, BoundKind::RcusMc | BoundKind::McMc)
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::domain("BoundKind", format!("unknown bound kind {s:?}")))
    }
}

/// What an optimisation holds fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// Rate in nats per channel use; the search returns an error probability.
    Rate(f64),
    /// Error probability; the search returns a rate.
    Eps(f64),
}

/// Auxiliary parameters that produced a [`BoundPoint`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub s: Option<f64>,
    pub tau: Option<f64>,
    /// `ln ξ` of the meta-converse bound.
    pub log_xi: Option<f64>,
}

/// Exponent/prefactor breakdown and sampling metadata.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `L·[ψ(τ) − τψ′(τ)]`.
    pub exponent: Option<f64>,
    /// The factor multiplying `e^{exponent}`.
    pub prefactor: Option<f64>,
    /// Natural log of the unclamped error probability.
    pub log_eps: Option<f64>,
    /// The lower bound was negative and has been reported as zero.
    pub vacuous: bool,
    pub std_err: Option<f64>,
    pub n_samples: Option<u64>,
    pub seed: Option<u64>,
}

/// One evaluated `(rate, ε)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub kind: BoundKind,
    /// Nats per channel use.
    pub rate: f64,
    pub eps: f64,
    pub witness: Witness,
    pub diagnostics: Diagnostics,
}

impl BoundPoint {
    pub(crate) fn new(kind: BoundKind, rate: f64, eps: f64) -> Self {
        Self {
            kind,
            rate: rate.max(0.0),
            eps: eps.clamp(0.0, 1.0),
            witness: Witness::default(),
            diagnostics: Diagnostics::default(),
        }
    }

    fn from_log(kind: BoundKind, rate: f64, log_eps: f64) -> Self {
        let mut p = Self::new(kind, rate, if log_eps.is_nan() { 0.0 } else { log_eps.exp() });
        p.diagnostics.log_eps = Some(log_eps);
        p
    }
}

/// The pieces of one saddlepoint expansion term at `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionTerms<T> {
    /// `L·[ψ(τ) − τψ′(τ)]`.
    pub exponent: T,
    /// `Ψ(u, τ)`.
    pub psi_u_tau: T,
    /// `K(u, τ, L)`.
    pub k_term: T,
    pub u: T,
}

/// Search grids and tolerances of the `(s, τ)` optimisations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchOptions {
    /// RCUs saddles are restricted to `τ ≤ 1 − delta`.
    pub delta: f64,
    /// Coarse grid of `s`, refined by golden sections around the best point.
    pub s_grid: Vec<f64>,
    pub s_xtol: f64,
    /// Points of the coarse `τ` scan in the meta-converse search.
    pub tau_scan: usize,
    pub tau_xtol: f64,
    /// Replace the `s` search by the fixed point `s = 1/(1+τ)`.
    pub fast_s: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            delta: 0.01,
            s_grid: (1..=20).map(|k| k as f64 / 10.0).collect(),
            s_xtol: 1e-3,
            tau_scan: 12,
            tau_xtol: 1e-7,
            fast_s: false,
        }
    }
}

impl SearchOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::domain("SearchOptions", format!("delta = {} must lie in (0, 1)", self.delta)));
        }
        if self.s_grid.is_empty() || self.s_grid.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::domain("SearchOptions", "s grid must be nonempty and positive"));
        }
        if self.s_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("SearchOptions", "s grid must be strictly increasing"));
        }
        if !(self.s_xtol > 0.0 && self.tau_xtol > 0.0) || self.tau_scan < 3 {
            return Err(Error::domain("SearchOptions", "tolerances must be positive and tau_scan ≥ 3"));
        }
        Ok(())
    }
}

/// `Ψ(u, τ) = e^{L u² ψ″/2} Q(u √(L ψ″))`.
pub fn psi_fn<T: Real>(u: T, blocks: usize, psi2: T) -> T {
    q_scaled(u * (T::of(blocks) * psi2).sqrt())
}

/// Switch point of the asymptotic form of the bracket in [`k_fn`].
const K_ASYMPTOTIC_FROM: f64 = 8.0;

/// `−1/√(2π) + x²/√(2π) − x³ e^{x²/2} Q(x)`.
fn k_bracket<T: Real>(x: T) -> T {
    let inv_sqrt_2pi = T::FRAC_1_SQRT_2() * T::FRAC_2_SQRT_PI() * T::lit(0.5);
    if x <= T::lit(K_ASYMPTOTIC_FROM) {
        return inv_sqrt_2pi * (x * x - T::one()) - x * x * x * q_scaled(x);
    }
    // The three terms cancel to O(x⁻²); sum the Mills-ratio series instead:
    // bracket·√(2π) = −Σ_{k≥2} (−1)^k (2k−1)!! x^{2−2k}.
    let inv_x2 = (x * x).recip();
    let mut term = T::lit(3.0) * inv_x2;
    let mut sum = T::zero();
    for k in 2..200usize {
        sum = sum + term;
        let next = -term * T::of(2 * k + 1) * inv_x2;
        if next.abs() >= term.abs() || next.abs() < sum.abs() * T::epsilon() {
            break;
        }
        term = next;
    }
    -sum * inv_sqrt_2pi
}

/// `ψ‴/(6ψ″^{3/2})`, zero for a degenerate (`ψ″ = 0`) law.
fn skew<T: Real>(b: &CgfBundle<T>) -> T {
    if b.psi2 > T::zero() {
        b.psi3 / (T::lit(6.0) * b.psi2 * b.psi2.sqrt())
    } else {
        T::zero()
    }
}

/// `K(u, τ, L)`, the `1/√L` correction of the saddlepoint expansion.
pub fn k_fn<T: Real>(u: T, blocks: usize, bundle: &CgfBundle<T>) -> T {
    let c = skew(bundle);
    if c == T::zero() {
        return T::zero();
    }
    c * k_bracket(u * (T::of(blocks) * bundle.psi2).sqrt())
}

/// `K̂(τ) = ψ‴/(6ψ″^{3/2}√(2π))`.
pub fn k_hat<T: Real>(bundle: &CgfBundle<T>) -> T {
    skew(bundle) * T::FRAC_1_SQRT_2() * T::FRAC_2_SQRT_PI() * T::lit(0.5)
}

/// The expansion pieces at `u` for a bundle.
pub fn expansion_terms<T: Real>(u: T, blocks: usize, bundle: &CgfBundle<T>) -> ExpansionTerms<T> {
    ExpansionTerms {
        exponent: T::of(blocks) * bundle.exponent(),
        psi_u_tau: psi_fn(u, blocks, bundle.psi2),
        k_term: k_fn(u, blocks, bundle),
        u,
    }
}

fn checked_exponent<T: Real>(blocks: usize, b: &CgfBundle<T>) -> Result<T> {
    let e = b.exponent();
    let slack = T::lit(1e-9) * T::one().max(b.psi.abs()).max((b.point.tau * b.psi1).abs());
    if e > slack {
        return Err(Error::numeric(
            "saddlepoint",
            format!("positive exponent ψ − τψ′ = {e:?} at {:?}", b.point),
        ));
    }
    Ok(T::of(blocks) * e.min(T::zero()))
}

fn ln_pos<T: Real>(x: T) -> T {
    if x > T::zero() {
        x.ln()
    } else {
        T::neg_infinity()
    }
}

fn blocks_and_len<T: Real>(eval: &CgfEvaluator<T>) -> (usize, T) {
    let cfg = eval.config();
    (cfg.blocks(), T::of(cfg.coherence()))
}

/// `(ln ε, exponent, bracket)` of the RCUs expansion at a bundle.
fn rcus_log_eps<T: Real>(blocks: usize, b: &CgfBundle<T>) -> Result<(T, T, T)> {
    let exponent = checked_exponent(blocks, b)?;
    let tau = b.point.tau;
    let bracket = psi_fn(tau, blocks, b.psi2)
        + psi_fn(T::one() - tau, blocks, b.psi2)
        + k_hat(b) / T::of(blocks).sqrt();
    Ok((exponent + ln_pos(bracket), exponent, bracket))
}

/// `(ln tail, exponent, bracket, ln subtrahend)` of the meta-converse expansion.
fn mc_parts<T: Real>(blocks: usize, len: T, b: &CgfBundle<T>, rate: T) -> Result<(T, T, T, T)> {
    let exponent = checked_exponent(blocks, b)?;
    let tau = b.point.tau;
    let l = T::of(blocks);
    let bracket = psi_fn(tau, blocks, b.psi2) + k_fn(tau, blocks, b) / l.sqrt();
    let ln_sub = l * (b.stats.j_s - b.psi1 / b.point.s - len * rate);
    Ok((exponent + ln_pos(bracket), exponent, bracket, ln_sub))
}

/// `ln(e^a − e^b)`, `−∞` when `a ≤ b`.
fn ln_diff_exp<T: Real>(a: T, b: T) -> T {
    if !(a > b) {
        return T::neg_infinity();
    }
    a + (-(b - a).exp()).ln_1p()
}

fn rcus_top<T: Real>(eval: &CgfEvaluator<T>, s: T, delta: T) -> Result<T> {
    Ok(eval.tau_domain(s)?.cap.min(T::one() - delta))
}

/// Saddlepoint RCUs bound at `(s, τ)`: the rate `(I_s − ψ′(τ))/T` and its
/// error-probability upper bound.
pub fn rcus_sp<T: Real>(eval: &CgfEvaluator<T>, s: T, tau: T, delta: T) -> Result<BoundPoint> {
    let top = rcus_top(eval, s, delta)?;
    if !(tau >= T::zero()) || tau > top {
        return Err(Error::domain(
            "rcus_sp",
            format!("tau = {tau:?} outside [0, {top:?}] (1 − delta = {:?})", T::one() - delta),
        ));
    }
    let (blocks, len) = blocks_and_len(eval);
    let b = eval.cgf_bundle(TiltPoint { s, tau })?;
    let (ln_eps, exponent, bracket) = rcus_log_eps(blocks, &b)?;
    let rate = (b.stats.i_s - b.psi1) / len;
    let mut p = BoundPoint::from_log(BoundKind::RcusSp, rate.f64(), ln_eps.f64());
    p.witness.s = Some(s.f64());
    p.witness.tau = Some(tau.f64());
    p.diagnostics.exponent = Some(exponent.f64());
    p.diagnostics.prefactor = Some(bracket.f64());
    Ok(p)
}

/// Saddlepoint meta-converse bound at `(s, τ)` and rate `rate`, with
/// `ln ξ = L J_s − L ψ′(τ)/s`. A negative value is reported as a vacuous 0.
pub fn mc_sp<T: Real>(eval: &CgfEvaluator<T>, s: T, tau: T, rate: T) -> Result<BoundPoint> {
    if !(rate >= T::zero()) {
        return Err(Error::domain("mc_sp", format!("rate = {rate:?} must be nonnegative")));
    }
    let (blocks, len) = blocks_and_len(eval);
    let b = eval.cgf_bundle(TiltPoint { s, tau })?;
    let (ln_tail, exponent, bracket, ln_sub) = mc_parts(blocks, len, &b, rate)?;
    let ln_eps = ln_diff_exp(ln_tail, ln_sub);
    let mut p = BoundPoint::from_log(BoundKind::McSp, rate.f64(), ln_eps.f64());
    p.diagnostics.vacuous = ln_eps == T::neg_infinity();
    p.witness.s = Some(s.f64());
    p.witness.tau = Some(tau.f64());
    p.witness.log_xi = Some((T::of(blocks) * (b.stats.j_s - b.psi1 / s)).f64());
    p.diagnostics.exponent = Some(exponent.f64());
    p.diagnostics.prefactor = Some(bracket.f64());
    Ok(p)
}

/// Best RCUs point at fixed `s`.
fn rcus_at_s<T: Real>(eval: &CgfEvaluator<T>, s: T, target: Target, opts: &SearchOptions) -> Result<BoundPoint> {
    let delta = T::lit(opts.delta);
    let (blocks, len) = blocks_and_len(eval);
    let top = rcus_top(eval, s, delta)?;
    let tau = match target {
        Target::Rate(r) => {
            let stats = eval.stats(s)?;
            let gamma = stats.i_s - len * T::lit(r);
            if gamma < T::zero() {
                return Err(Error::NoSolution(format!(
                    "rate {r} exceeds I_s/T = {} at s = {s:?}",
                    (stats.i_s / len).f64()
                )));
            }
            let tau = eval.solve_saddle(s, gamma)?;
            if tau > top {
                return Err(Error::NoSolution(format!(
                    "rate {r} is below the RCUs range at s = {s:?} (saddle tau = {tau:?} > {top:?})"
                )));
            }
            tau
        }
        Target::Eps(eps) => {
            let target = T::lit(eps).ln();
            let f = |tau: T| -> Result<T> {
                let b = eval.cgf_bundle(TiltPoint { s, tau })?;
                Ok(rcus_log_eps(blocks, &b)?.0 - target)
            };
            if f(T::zero())? <= T::zero() {
                T::zero()
            } else if f(top)? > T::zero() {
                return Err(Error::NoSolution(format!(
                    "eps {eps} is below the RCUs range at s = {s:?}"
                )));
            } else {
                brent_root(f, T::zero(), top, T::lit(opts.tau_xtol), 200)?
            }
        }
    };
    rcus_sp(eval, s, tau, delta)
}

/// Best meta-converse point at fixed `s`, maximising the bound over `τ`
/// for a rate target and minimising the rate for an error target.
fn mc_at_s<T: Real>(eval: &CgfEvaluator<T>, s: T, target: Target, opts: &SearchOptions) -> Result<BoundPoint> {
    let (blocks, len) = blocks_and_len(eval);
    let cap = eval.tau_domain(s)?.cap;
    let l = T::of(blocks);
    let xtol = T::lit(opts.tau_xtol);
    match target {
        Target::Rate(r) => {
            let rate = T::lit(r);
            let neg_ln_eps = |tau: T| -> Result<T> {
                let b = eval.cgf_bundle(TiltPoint { s, tau })?;
                let (ln_tail, _, _, ln_sub) = mc_parts(blocks, len, &b, rate)?;
                Ok(-ln_diff_exp(ln_tail, ln_sub))
            };
            // The nonvacuous window can be narrow; refine the scan before giving up.
            let mut found = None;
            for k in 0..3 {
                if let Ok((tau, _)) = scan_then_brent(neg_ln_eps, T::zero(), cap, opts.tau_scan << (2 * k), xtol) {
                    found = Some(tau);
                    break;
                }
            }
            // Vacuous everywhere: report the τ = 0 point, which carries ε = 0.
            mc_sp(eval, s, found.unwrap_or(T::zero()), rate)
        }
        Target::Eps(eps) => {
            let ln_eps = T::lit(eps).ln();
            let rate_of = |tau: T| -> Result<T> {
                let b = eval.cgf_bundle(TiltPoint { s, tau })?;
                let (ln_tail, _, _, _) = mc_parts(blocks, len, &b, T::zero())?;
                let gap = ln_diff_exp(ln_tail, ln_eps);
                Ok((b.stats.j_s - b.psi1 / s - gap / l) / len)
            };
            // The rate is finite only where the tail exceeds ε, which is [0, τ_ε).
            let excess = |tau: T| -> Result<T> {
                let b = eval.cgf_bundle(TiltPoint { s, tau })?;
                Ok(mc_parts(blocks, len, &b, T::zero())?.0 - ln_eps)
            };
            if !(excess(T::zero())? > T::zero()) {
                return Err(Error::NoSolution(format!("eps {eps} not reachable by the tail at s = {s:?}")));
            }
            let hi = if excess(cap)? > T::zero() { cap } else { brent_root(excess, T::zero(), cap, xtol, 200)? };
            let (tau, rate) = scan_then_brent(rate_of, T::zero(), hi, opts.tau_scan, xtol)
                .map_err(|_| Error::NoSolution(format!("eps {eps} not reachable by the tail at s = {s:?}")))?;
            let mut p = mc_sp(eval, s, tau, rate.max(T::zero()))?;
            p.eps = eps;
            p.diagnostics.log_eps = Some(eps.ln());
            p.diagnostics.vacuous = false;
            Ok(p)
        }
    }
}

/// Objective minimised by the `s` search: `ln ε` for rate targets (negated
/// for lower bounds) and the rate for error targets (negated for upper
/// bounds on the error, i.e. achievability).
fn objective(p: &BoundPoint, target: Target, achievability: bool) -> f64 {
    match target {
        Target::Rate(_) => {
            let l = p.diagnostics.log_eps.unwrap_or(p.eps.ln());
            if achievability {
                l
            } else {
                -l
            }
        }
        Target::Eps(_) => {
            if achievability {
                -p.rate
            } else {
                p.rate
            }
        }
    }
}

fn optimize_over_s<T, F>(eval: &CgfEvaluator<T>, target: Target, opts: &SearchOptions, achievability: bool, at_s: F) -> Result<BoundPoint>
where
    T: Real,
    F: Fn(T) -> Result<BoundPoint> + Sync,
{
    opts.validate()?;
    match target {
        Target::Rate(r) if !(r >= 0.0 && r.is_finite()) => {
            return Err(Error::domain("optimize", format!("rate = {r} must be finite and nonnegative")))
        }
        Target::Eps(e) if !(e > 0.0 && e < 1.0) => {
            return Err(Error::domain("optimize", format!("eps = {e} must lie in (0, 1)")))
        }
        _ => {}
    }
    if eval.config().coherence() == 1 {
        return degenerate_point(eval, target, achievability);
    }
    if opts.fast_s {
        return fast_s(opts, at_s);
    }
    let scored = |s: f64| -> Result<(f64, BoundPoint)> {
        let p = at_s(T::lit(s))?;
        let v = objective(&p, target, achievability);
        if v.is_nan() {
            return Err(Error::numeric("optimize", format!("objective undefined at s = {s}")));
        }
        Ok((v, p))
    };
    let results: Vec<Result<(f64, BoundPoint)>> = opts.s_grid.par_iter().map(|&s| scored(s)).collect();
    let mut best: Option<(usize, f64, BoundPoint)> = None;
    let mut first_err = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok((v, p)) => {
                if best.as_ref().map_or(true, |b| v < b.1) {
                    best = Some((i, v, p));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let Some((i, v, p)) = best else {
        let e = first_err.unwrap_or_else(|| Error::NoSolution("empty s grid".into()));
        return Err(if e.is_infeasible() { infeasible(eval, target, opts, achievability, e) } else { e });
    };
    let grid = &opts.s_grid;
    let lo = if i == 0 { grid[0] } else { grid[i - 1] };
    let hi = if i + 1 == grid.len() { grid[i] } else { grid[i + 1] };
    if hi - lo <= opts.s_xtol || !v.is_finite() {
        return Ok(p);
    }
    let (s_best, v_best) = golden_min(
        |s: f64| Ok(scored(s).map(|(v, _)| v).unwrap_or(f64::INFINITY)),
        lo,
        hi,
        opts.s_xtol,
        200,
    )?;
    if v_best < v {
        Ok(scored(s_best)?.1)
    } else {
        Ok(p)
    }
}

/// Fixed point `s = 1/(1+τ)`.
fn fast_s<T, F>(opts: &SearchOptions, at_s: F) -> Result<BoundPoint>
where
    T: Real,
    F: Fn(T) -> Result<BoundPoint>,
{
    let mut s = 1.0f64;
    let mut last = None;
    for _ in 0..100 {
        let p = at_s(T::lit(s))?;
        let tau = p.witness.tau.unwrap_or(0.0);
        let next = 1.0 / (1.0 + tau);
        let done = (next - s).abs() <= opts.s_xtol * 1e-2;
        last = Some(p);
        if done {
            return Ok(last.unwrap());
        }
        s = next;
    }
    last.ok_or_else(|| Error::numeric("fast_s", "no iterate"))
}

/// Points for a channel with `T = 1`, which carries no information: the
/// only achievable rate is 0.
fn degenerate_point<T: Real>(eval: &CgfEvaluator<T>, target: Target, achievability: bool) -> Result<BoundPoint> {
    let kind = if achievability { BoundKind::RcusSp } else { BoundKind::McSp };
    match target {
        Target::Eps(e) => Ok(BoundPoint::new(kind, 0.0, e)),
        Target::Rate(r) if r == 0.0 => Ok(BoundPoint::new(kind, 0.0, if achievability { 1.0 } else { 0.0 })),
        Target::Rate(r) => {
            if achievability {
                Err(Error::SaddleNotFound { what: "rate", target: r, lo: 0.0, hi: 0.0 })
            } else {
                // ε* → 1 for every positive rate; the expansion gives
                // 1/2 − e^{−LTR}.
                let l = eval.config().blocks() as f64;
                let t = eval.config().coherence() as f64;
                let v = 0.5 - (-l * t * r).exp();
                let mut p = BoundPoint::new(kind, r, v);
                p.diagnostics.vacuous = v <= 0.0;
                Ok(p)
            }
        }
    }
}

/// Rewrites an infeasibility error with the range of rates the search can
/// reach: from the RCUs rate at the top of the `τ` range to `max I_s/T`.
fn infeasible<T: Real>(eval: &CgfEvaluator<T>, target: Target, opts: &SearchOptions, achievability: bool, e: Error) -> Error {
    let Target::Rate(r) = target else {
        return e;
    };
    if !achievability {
        return e;
    }
    let len = eval.config().coherence() as f64;
    let delta = T::lit(opts.delta);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &s in &opts.s_grid {
        let s = T::lit(s);
        if let Ok(st) = eval.stats(s) {
            hi = hi.max(st.i_s.f64() / len);
        }
        if let Ok(top) = rcus_top(eval, s, delta) {
            if let Ok(b) = eval.cgf_bundle(TiltPoint { s, tau: top }) {
                lo = lo.min((b.stats.i_s - b.psi1).f64() / len);
            }
        }
    }
    if lo.is_finite() && hi.is_finite() {
        Error::SaddleNotFound { what: "rate", target: r, lo: lo.max(0.0), hi }
    } else {
        e
    }
}

/// RCUs saddlepoint bound optimised over `s` (and the matching saddle `τ`).
pub fn optimize_rcus<T: Real>(eval: &CgfEvaluator<T>, target: Target, opts: &SearchOptions) -> Result<BoundPoint> {
    optimize_over_s(eval, target, opts, true, |s| rcus_at_s(eval, s, target, opts))
}

/// Meta-converse saddlepoint bound optimised over `(s, τ)`.
pub fn optimize_mc<T: Real>(eval: &CgfEvaluator<T>, target: Target, opts: &SearchOptions) -> Result<BoundPoint> {
    optimize_over_s(eval, target, opts, false, |s| mc_at_s(eval, s, target, opts))
}

/// The rate and the two prefactor-times-exponent error bounds at `τ`, with
/// `s = 1/(1+τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrefactorBounds {
    pub tau: f64,
    pub s: f64,
    pub rate: f64,
    pub exponent: f64,
    pub a_upper: f64,
    pub a_lower: f64,
    pub log_eps_upper: f64,
    pub log_eps_lower: f64,
}

impl PrefactorBounds {
    pub fn eps_upper(&self) -> f64 {
        self.log_eps_upper.exp().min(1.0)
    }

    pub fn eps_lower(&self) -> f64 {
        self.log_eps_lower.exp().min(1.0)
    }

    pub fn point(&self, kind: BoundKind) -> BoundPoint {
        let (log_eps, pref) = match kind {
            BoundKind::PeeaLower => (self.log_eps_lower, self.a_lower),
            _ => (self.log_eps_upper, self.a_upper),
        };
        let mut p = BoundPoint::from_log(kind, self.rate, log_eps);
        p.witness.s = Some(self.s);
        p.witness.tau = Some(self.tau);
        p.diagnostics.exponent = Some(self.exponent);
        p.diagnostics.prefactor = Some(pref);
        p
    }
}

/// Prefactor bounds `A̲ e^{L[ψ−τψ′]} ≤ ε ≤ Ā e^{L[ψ−τψ′]}` at `τ ∈ (0, 1)`.
pub fn prefactor_bounds<T: Real>(eval: &CgfEvaluator<T>, tau: T) -> Result<PrefactorBounds> {
    if !(tau > T::zero() && tau < T::one()) {
        return Err(Error::domain("prefactor_bounds", format!("tau = {tau:?} must lie in (0, 1)")));
    }
    let (blocks, len) = blocks_and_len(eval);
    let s = (T::one() + tau).recip();
    let b = eval.cgf_bundle(TiltPoint { s, tau })?;
    let exponent = checked_exponent(blocks, &b)?;
    let l = T::of(blocks);
    let two_pi_l_v = T::lit(2.0) * T::PI() * l * b.psi2;
    let a_upper = (two_pi_l_v * tau * tau).sqrt().recip()
        + k_hat(&b).abs() / l.sqrt()
        + (two_pi_l_v * (T::one() - tau) * (T::one() - tau)).sqrt().recip();
    let a_lower = s.powf(s.recip()) / (tau * two_pi_l_v.powf((T::lit(2.0) * s).recip()));
    let rate = (b.stats.i_s - b.psi1) / len;
    Ok(PrefactorBounds {
        tau: tau.f64(),
        s: s.f64(),
        rate: rate.max(T::zero()).f64(),
        exponent: exponent.f64(),
        a_upper: a_upper.f64(),
        a_lower: a_lower.f64(),
        log_eps_upper: (exponent + ln_pos(a_upper)).f64(),
        log_eps_lower: (exponent + ln_pos(a_lower)).f64(),
    })
}

/// Inverts the prefactor bounds along `τ` for an error target (`ln ε`
/// decreases as `τ` grows) or a rate target (the rate decreases in `τ`).
fn prefactor_solve<T: Real>(eval: &CgfEvaluator<T>, kind: BoundKind, target: Target) -> Result<BoundPoint> {
    const EDGE: f64 = 1e-6;
    let lo = T::lit(EDGE);
    let hi = T::lit(1.0 - EDGE);
    let value = |tau: T| -> Result<f64> {
        let pb = prefactor_bounds(eval, tau)?;
        Ok(match (target, kind) {
            (Target::Eps(e), BoundKind::PeeaLower) => pb.log_eps_lower - e.ln(),
            (Target::Eps(e), _) => pb.log_eps_upper - e.ln(),
            (Target::Rate(r), _) => pb.rate - r,
        })
    };
    // Both prefactors blow up near τ = 0 and Ā also near τ = 1, so an error
    // target is solved on the decreasing branch left of the minimum.
    let hi = match target {
        Target::Eps(_) => scan_then_brent(|t| value(t).map(T::lit), lo, hi, 24, T::lit(1e-8)).map_or(hi, |(t, _)| t),
        Target::Rate(_) => hi,
    };
    let (vlo, vhi) = (value(lo)?, value(hi)?);
    if vlo.signum() == vhi.signum() {
        let what = match target {
            Target::Eps(_) => "eps",
            Target::Rate(_) => "rate",
        };
        let (a, b) = (prefactor_bounds(eval, lo)?, prefactor_bounds(eval, hi)?);
        let (x, lo_v, hi_v) = match (target, kind) {
            (Target::Eps(e), BoundKind::PeeaLower) => (e, b.eps_lower(), a.eps_lower()),
            (Target::Eps(e), _) => (e, b.eps_upper(), a.eps_upper()),
            (Target::Rate(r), _) => (r, b.rate, a.rate),
        };
        return Err(Error::SaddleNotFound { what, target: x, lo: lo_v, hi: hi_v });
    }
    let tau = brent_root(|t| value(t).map(T::lit), lo, hi, T::lit(1e-10), 200)?;
    let pb = prefactor_bounds(eval, tau)?;
    Ok(pb.point(kind))
}

/// Largest rate whose bound (or approximation) of kind `kind` meets `eps`.
///
/// Monte-Carlo kinds are not handled here; see [`crate::montecarlo::mc_point`].
pub fn rate_at_eps<T: Real>(kind: BoundKind, eval: &CgfEvaluator<T>, eps: T, opts: &SearchOptions) -> Result<BoundPoint> {
    let e = eps.f64();
    if !(e > 0.0 && e < 1.0) {
        return Err(Error::domain("rate_at_eps", format!("eps = {e} must lie in (0, 1)")));
    }
    let target = Target::Eps(e);
    match kind {
        BoundKind::RcusSp => optimize_rcus(eval, target, opts),
        BoundKind::McSp => optimize_mc(eval, target, opts),
        BoundKind::PeeaUpper | BoundKind::PeeaLower => prefactor_solve(eval, kind, target),
        BoundKind::Na => asymptotics::normal_approx(eval, eps).map(|r| BoundPoint::new(kind, r.f64(), e)),
        BoundKind::Hsna => asymptotics::high_snr_na(eval.config(), eps).map(|r| BoundPoint::new(kind, r.f64(), e)),
        BoundKind::Eea => asymptotics::eea_point(eval, eps, asymptotics::EeaVariant::Plain),
        BoundKind::EeaPref => asymptotics::eea_point(eval, eps, asymptotics::EeaVariant::Prefactor),
        BoundKind::RcusMc | BoundKind::McMc => Err(Error::domain(
            "rate_at_eps",
            format!("{kind} is a Monte-Carlo kind; use the montecarlo module"),
        )),
    }
}

/// Error probability of the bound (or approximation) of kind `kind` at `rate`.
pub fn eps_at_rate<T: Real>(kind: BoundKind, eval: &CgfEvaluator<T>, rate: T, opts: &SearchOptions) -> Result<BoundPoint> {
    let r = rate.f64();
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::domain("eps_at_rate", format!("rate = {r} must be finite and nonnegative")));
    }
    let target = Target::Rate(r);
    let exact = |p: Result<BoundPoint>| {
        p.map(|mut p| {
            p.rate = r;
            p
        })
    };
    match kind {
        BoundKind::RcusSp => exact(optimize_rcus(eval, target, opts)),
        BoundKind::McSp => exact(optimize_mc(eval, target, opts)),
        BoundKind::PeeaUpper | BoundKind::PeeaLower => exact(prefactor_solve(eval, kind, target)),
        BoundKind::Na | BoundKind::Hsna => {
            let (c, v) = match kind {
                BoundKind::Na => {
                    let cd = asymptotics::capacity_dispersion(eval)?;
                    (cd.c, cd.v)
                }
                _ => asymptotics::high_snr_capacity_dispersion(eval.config())?,
            };
            let cfg = eval.config();
            let len = T::of(cfg.coherence());
            let l = T::of(cfg.blocks());
            let x = (c / len - rate) * (l * len * len / v).sqrt();
            Ok(BoundPoint::new(kind, r, crate::special::q_func(x).f64()))
        }
        BoundKind::Eea | BoundKind::EeaPref => {
            let variant = if kind == BoundKind::Eea {
                asymptotics::EeaVariant::Plain
            } else {
                asymptotics::EeaVariant::Prefactor
            };
            exact(asymptotics::eea_eps_at_rate(eval, rate, variant))
        }
        BoundKind::RcusMc | BoundKind::McMc => Err(Error::domain(
            "eps_at_rate",
            format!("{kind} is a Monte-Carlo kind; use the montecarlo module"),
        )),
    }
}
