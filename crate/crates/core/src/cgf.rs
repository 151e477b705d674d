//! Moments and cumulant generating function of the per-interval variable
//! `Z = I_s − i_s`, by deterministic quadrature over the gamma pair.
//!
//! Every quantity is an expectation `E[e^{c(z₀ − i_s)}·f(Z)]` for some tilt
//! `c ≥ 0`. In the coordinates `W = (1 + Tρ)Υ₁ + Υ₂` and `θ = Υ₂/W` the
//! tilt only changes the rate of the exponential factor in `W`:
//!
//! `E[e^{c(z₀ − i_s)}] = e^{c z₀} (T − 1)/(1 + Tρ) ∫₀¹ θ^{T−2} β(θ)^{−T}
//!   E_Y[e^{−c·h(κ(θ) Y)}] dθ`
//!
//! with `Y ~ Gamma(T, 1)`, `β(θ) = (1 − θ)/(1 + Tρ) + θ(1 − c·a)`,
//! `a = sTρ/(1 + Tρ)`, `κ = a/β` and `h(v) = (T−1)ln v − lnΓ(T) − ln γ̃(T−1, v)`.
//! Both integrals are done by the trapezoidal rule, in `logit θ` and in
//! `ln Y`, on windows located by scanning the log-integrand so that the
//! nodes sit where the tilted mass is, however far it has moved. For
//! `c = 1/s` the share integral is trivial and `μ(s)` reduces to a single
//! radial integral.
//!
//! `ψ(τ) = ln E[e^{τZ}]` and its first three derivatives are the log-weight
//! and the first three cumulants of the tilted law on the same nodes.

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelConfig;
use crate::roots::newton_increasing;
use crate::special::{ln_lower_gamma_excess, log_gamma_pos, log_sum_exp};
use crate::{Error, Real, Result};

/// Fraction of `τ_max` excluded from every CGF evaluation.
pub const DEFAULT_TAU_MARGIN: f64 = 0.005;

/// Auxiliary parameters: `s` of the generalized information density and
/// the tilt `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltPoint<T> {
    pub s: T,
    pub tau: T,
}

/// Mean, variance and normalizer of `i_s` for one `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoDensityStats<T> {
    pub s: T,
    /// `I_s = E[i_s]`, nats per interval.
    pub i_s: T,
    /// `V_s = Var[i_s]`.
    pub v_s: T,
    /// `J_s = ln μ(s) + I_s/s`.
    pub j_s: T,
    /// `μ(s) = E[e^{−i_s/s}]`.
    pub mu_s: T,
}

/// `ψ` and its first three derivatives at one tilt point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CgfBundle<T> {
    pub point: TiltPoint<T>,
    pub psi: T,
    pub psi1: T,
    pub psi2: T,
    pub psi3: T,
    pub stats: InfoDensityStats<T>,
}

impl<T: Real> CgfBundle<T> {
    /// `ψ(τ) − τψ′(τ)`, the per-interval exponent of the saddlepoint terms.
    pub fn exponent(&self) -> T {
        self.psi - self.point.tau * self.psi1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureScheme {
    /// Trapezoidal rules in `logit θ` and `ln Y` on scanned windows.
    AdaptiveTrapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Nodes on the energy-share axis `θ`.
    pub n1: usize,
    /// Nodes on the radial axis `Y`, per share node.
    pub n2: usize,
    pub scheme: QuadratureScheme,
    /// Largest accepted change of `I_s`, `V_s` and `ln μ(s)` when the node
    /// counts are doubled, relative to `max(1, |value|)`.
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n1: 96,
            n2: 24,
            scheme: QuadratureScheme::AdaptiveTrapezoid,
            tol: 1e-8,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n1 < 16 || self.n2 < 16 {
            return Err(Error::domain(
                "QuadratureSpec",
                format!("node counts ({}, {}) must be at least 16", self.n1, self.n2),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::domain("QuadratureSpec", "tolerance must be positive"));
        }
        Ok(())
    }

    fn doubled(&self) -> Self {
        Self {
            n1: 2 * self.n1,
            n2: 2 * self.n2,
            ..*self
        }
    }
}

/// Admissible tilts `[0, τ_max)` and the cap actually used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauDomain<T> {
    pub tau_max: T,
    pub cap: T,
}

impl<T: Real> TauDomain<T> {
    pub fn contains(&self, tau: T) -> bool {
        tau >= T::zero() && tau <= self.cap
    }
}

/// `τ_max = min{T/(T−1), (1 + Tρ)/(sTρ)}`, the first term absent for `T = 1`.
pub fn tau_domain<T: Real>(cfg: &ChannelConfig<T>, s: T) -> Result<TauDomain<T>> {
    tau_domain_with_margin(cfg, s, T::lit(DEFAULT_TAU_MARGIN))
}

pub fn tau_domain_with_margin<T: Real>(cfg: &ChannelConfig<T>, s: T, margin: T) -> Result<TauDomain<T>> {
    if !(s > T::zero()) || !s.is_finite() {
        return Err(Error::domain("tau_domain", format!("s = {s:?} must be positive")));
    }
    let t_rho = cfg.t_rho();
    let mut tau_max = (T::one() + t_rho) / (s * t_rho);
    if cfg.coherence() >= 2 {
        let t = T::of(cfg.coherence());
        tau_max = tau_max.min(t / (t - T::one()));
    }
    Ok(TauDomain {
        tau_max,
        cap: (T::one() - margin) * tau_max,
    })
}

/// Log-weight and first three cumulants of a tilted law.
#[derive(Debug, Clone, Copy)]
struct Tilted<T> {
    ln_m: T,
    k1: T,
    k2: T,
    k3: T,
}

struct Shared<T> {
    stats: RwLock<HashMap<u64, (InfoDensityStats<T>, QuadratureSpec)>>,
    bundles: RwLock<HashMap<(u64, u64), CgfBundle<T>>>,
}

const CACHE_LIMIT: usize = 1 << 16;

/// Extra doublings of the quadrature rule tried when the self-check fails.
pub const MAX_REFINEMENTS: usize = 2;

fn doubling_check<T: Real>(rule: &QuadratureSpec, s: T, coarse: &InfoDensityStats<T>, fine: &InfoDensityStats<T>) -> Result<()> {
    let tol = T::lit(rule.tol);
    let check = |name: &str, a: T, b: T| -> Result<()> {
        if (a - b).abs() > tol * T::one().max(a.abs()) {
            return Err(Error::numeric(
                "stats",
                format!(
                    "{name} changes from {a:?} to {b:?} when doubling the nodes ({}x{} to {}x{}) at s = {s:?}",
                    rule.n1,
                    rule.n2,
                    2 * rule.n1,
                    2 * rule.n2
                ),
            ));
        }
        Ok(())
    };
    check("I_s", coarse.i_s, fine.i_s)?;
    check("V_s", coarse.v_s, fine.v_s)?;
    check("ln mu", coarse.mu_s.ln(), fine.mu_s.ln())
}

/// Evaluates `I_s`, `V_s`, `μ(s)` and `ψ` with derivatives for one `(T, ρ)`
/// and quadrature rule. Results are memoized per `s` and `(s, τ)`; the
/// memo is shared by clones and by [`CgfEvaluator::with_blocks`], since none
/// of these quantities depends on `L`.
#[derive(Clone)]
pub struct CgfEvaluator<T: Real> {
    cfg: ChannelConfig<T>,
    quad: QuadratureSpec,
    margin: T,
    cache: bool,
    shared: Arc<Shared<T>>,
}

impl<T: Real> std::fmt::Debug for CgfEvaluator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CgfEvaluator")
            .field("cfg", &self.cfg)
            .field("quad", &self.quad)
            .field("margin", &self.margin)
            .field("cache", &self.cache)
            .finish()
    }
}

impl<T: Real> CgfEvaluator<T> {
    /// Builds the quadrature rules.
    ///
    /// # Panics
    ///
    /// Panics if `quad` is invalid; use [`CgfEvaluator::try_new`] to get
    /// the error instead.
    pub fn new(cfg: ChannelConfig<T>, quad: QuadratureSpec) -> Self {
        Self::try_new(cfg, quad).expect("invalid quadrature specification")
    }

    pub fn try_new(cfg: ChannelConfig<T>, quad: QuadratureSpec) -> Result<Self> {
        quad.validate()?;
        Ok(Self {
            cfg,
            quad,
            margin: T::lit(DEFAULT_TAU_MARGIN),
            cache: true,
            shared: Arc::new(Shared {
                stats: RwLock::new(HashMap::new()),
                bundles: RwLock::new(HashMap::new()),
            }),
        })
    }

    pub fn config(&self) -> &ChannelConfig<T> {
        &self.cfg
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    /// Same `(T, ρ)` and shared memo, different `L`.
    pub fn with_blocks(&self, blocks: usize) -> Result<Self> {
        Ok(Self {
            cfg: self.cfg.with_blocks(blocks)?,
            ..self.clone()
        })
    }

    /// Turns memoization on or off. Results do not depend on it.
    pub fn with_cache(mut self, enabled: bool) -> Self {
        self.cache = enabled;
        self
    }

    /// Fraction of `τ_max` kept out of reach (default 0.005).
    pub fn with_margin(mut self, margin: T) -> Result<Self> {
        if !(margin > T::zero() && margin < T::one()) {
            return Err(Error::domain("CgfEvaluator::with_margin", format!("margin {margin:?} not in (0, 1)")));
        }
        self.margin = margin;
        Ok(self)
    }

    pub fn tau_domain(&self, s: T) -> Result<TauDomain<T>> {
        tau_domain_with_margin(&self.cfg, s, self.margin)
    }

    /// `I_s`, `V_s`, `J_s` and `μ(s)`. The values are recomputed with twice
    /// the nodes on both axes and compared against `quad.tol`; on a
    /// mismatch the rule is doubled up to [`MAX_REFINEMENTS`] times.
    pub fn stats(&self, s: T) -> Result<InfoDensityStats<T>> {
        Ok(self.stats_and_rule(s)?.0)
    }

    /// The rule that passed the doubling check at `s`, used for every
    /// bundle at that `s`.
    pub fn effective_rule(&self, s: T) -> Result<QuadratureSpec> {
        Ok(self.stats_and_rule(s)?.1)
    }

    fn stats_and_rule(&self, s: T) -> Result<(InfoDensityStats<T>, QuadratureSpec)> {
        if !(s > T::zero()) || !s.is_finite() {
            return Err(Error::domain("stats", format!("s = {s:?} must be positive")));
        }
        let key = s.f64().to_bits();
        if self.cache {
            if let Some(hit) = self.shared.stats.read().get(&key) {
                return Ok(*hit);
            }
        }
        let mut rule = self.quad;
        let mut coarse = self.stats_with(&rule, s)?;
        for k in 0.. {
            let fine = self.stats_with(&rule.doubled(), s)?;
            match doubling_check(&rule, s, &coarse, &fine) {
                Ok(()) => break,
                Err(e) if k == MAX_REFINEMENTS => return Err(e),
                Err(_) => {
                    rule = rule.doubled();
                    coarse = fine;
                }
            }
        }
        if self.cache {
            let mut map = self.shared.stats.write();
            if map.len() >= CACHE_LIMIT {
                map.clear();
            }
            map.insert(key, (coarse, rule));
        }
        Ok((coarse, rule))
    }

    fn stats_with(&self, rule: &QuadratureSpec, s: T) -> Result<InfoDensityStats<T>> {
        let plain = self.tilted(rule, s, T::zero(), T::zero())?;
        let i_s = -plain.k1;
        let v_s = plain.k2.max(T::zero());
        let ln_mu = self.tilted(rule, s, s.recip(), T::zero())?.ln_m;
        Ok(InfoDensityStats {
            s,
            i_s,
            v_s,
            j_s: ln_mu + i_s / s,
            mu_s: ln_mu.exp(),
        })
    }

    /// `μ(s) = E[e^{−i_s/s}]`.
    pub fn mu(&self, s: T) -> Result<T> {
        Ok(self.stats(s)?.mu_s)
    }

    /// `ψ(τ)`, `ψ′`, `ψ″`, `ψ‴` at `point`, as the log-normalizer and the
    /// cumulants of the tilted law.
    pub fn cgf_bundle(&self, point: TiltPoint<T>) -> Result<CgfBundle<T>> {
        let TiltPoint { s, tau } = point;
        let dom = self.tau_domain(s)?;
        if !dom.contains(tau) {
            return Err(Error::domain(
                "cgf_bundle",
                format!("tau = {tau:?} outside [0, {:?}] (tau_max = {:?}) at s = {s:?}", dom.cap, dom.tau_max),
            ));
        }
        let key = (s.f64().to_bits(), tau.f64().to_bits());
        if self.cache {
            if let Some(hit) = self.shared.bundles.read().get(&key) {
                return Ok(*hit);
            }
        }
        let (stats, rule) = self.stats_and_rule(s)?;
        let t = self.tilted(&rule, s, tau, stats.i_s)?;
        let bundle = CgfBundle {
            point,
            psi: t.ln_m,
            psi1: t.k1,
            psi2: t.k2,
            psi3: t.k3,
            stats,
        };
        let finite = bundle.psi.is_finite() && bundle.psi1.is_finite() && bundle.psi3.is_finite();
        if !finite || !(bundle.psi2 > T::zero() || self.cfg.coherence() == 1) {
            return Err(Error::numeric("cgf_bundle", format!("non-finite or non-convex CGF at {point:?}: {bundle:?}")));
        }
        if self.cache {
            let mut map = self.shared.bundles.write();
            if map.len() >= CACHE_LIMIT {
                map.clear();
            }
            map.insert(key, bundle);
        }
        Ok(bundle)
    }

    /// The `τ` with `ψ′(τ) = target`, by safeguarded Newton steps.
    pub fn solve_saddle(&self, s: T, target: T) -> Result<T> {
        if !(target >= T::zero()) {
            return Err(Error::domain("solve_saddle", format!("target {target:?} must be nonnegative")));
        }
        if target == T::zero() {
            return Ok(T::zero());
        }
        let dom = self.tau_domain(s)?;
        let top = self.cgf_bundle(TiltPoint { s, tau: dom.cap })?;
        if target >= top.psi1 {
            return Err(Error::SaddleNotFound {
                what: "psi1",
                target: target.f64(),
                lo: 0.0,
                hi: top.psi1.f64(),
            });
        }
        let stats = self.stats(s)?;
        let guess = if stats.v_s > T::zero() { target / stats.v_s } else { dom.cap * T::lit(0.5) };
        let ftol = T::lit(1e-10) * T::one().max(target);
        newton_increasing(
            |tau| {
                let b = self.cgf_bundle(TiltPoint { s, tau })?;
                Ok((b.psi1 - target, b.psi2))
            },
            T::zero(),
            dom.cap,
            guess,
            ftol,
            200,
        )
    }

    /// `ln E[e^{c(z₀ − i_s)}]` and the cumulants of `z₀ − i_s` under the
    /// tilted law.
    fn tilted(&self, rule: &QuadratureSpec, s: T, coef: T, center: T) -> Result<Tilted<T>> {
        if self.cfg.coherence() == 1 {
            return Ok(Tilted {
                ln_m: coef * center,
                k1: center,
                k2: T::zero(),
                k3: T::zero(),
            });
        }
        if !(s > T::zero()) || !s.is_finite() {
            return Err(Error::domain("cgf", format!("s = {s:?} must be positive")));
        }
        let tilt = TiltedIntegrand::new(&self.cfg, s, coef)?;
        let (lt, zs) = tilt.nodes(rule.n1, rule.n2, center)?;
        let ln_m = log_sum_exp(&lt);
        if !ln_m.is_finite() {
            return Err(Error::numeric("cgf", format!("log-MGF not finite at s = {s:?}, tilt {coef:?}")));
        }
        let ps: Vec<T> = lt.iter().map(|&l| (l - ln_m).exp()).collect();
        let total = ps.iter().fold(T::zero(), |acc, &p| acc + p);
        let k1 = ps.iter().zip(&zs).fold(T::zero(), |acc, (&p, &z)| acc + p * z) / total;
        let (mut m2, mut m3) = (T::zero(), T::zero());
        for (&p, &z) in ps.iter().zip(&zs) {
            let d = z - k1;
            m2 = m2 + p * d * d;
            m3 = m3 + p * d * d * d;
        }
        Ok(Tilted {
            ln_m,
            k1,
            k2: m2 / total,
            k3: m3 / total,
        })
    }
}

/// Largest node spacing in `ln Y`, in units of `1/√T`.
const RADIAL_RESOLUTION: f64 = 0.5;
/// Log-integrand drop, in nats, below which a window is cut off.
const WINDOW_DROP: f64 = 46.0;
const SCAN_LIMIT: usize = 2000;

/// The tilted integrand in `(θ, Y)` coordinates for one `(s, c)`, `T ≥ 2`.
struct TiltedIntegrand<T> {
    coef: T,
    /// `T − 1`.
    shape: T,
    ln_gamma_t: T,
    /// `sTρ/(1 + Tρ)`.
    slope: T,
    /// `1/(1 + Tρ)`.
    inv_gain: T,
    /// `1 − c·slope`.
    lambda: T,
}

impl<T: Real> TiltedIntegrand<T> {
    fn new(cfg: &ChannelConfig<T>, s: T, coef: T) -> Result<Self> {
        let t_rho = cfg.t_rho();
        let inv_gain = (T::one() + t_rho).recip();
        let slope = s * t_rho * inv_gain;
        let lambda = T::one() - coef * slope;
        if !(lambda > T::zero()) {
            return Err(Error::domain(
                "cgf",
                format!("tilt {coef:?} at s = {s:?} leaves the region of convergence"),
            ));
        }
        Ok(Self {
            coef,
            shape: T::of(cfg.coherence() - 1),
            ln_gamma_t: log_gamma_pos(T::of(cfg.coherence())),
            slope,
            inv_gain,
            lambda,
        })
    }

    #[inline]
    fn h(&self, v: T) -> T {
        ln_lower_gamma_excess(self.shape, v, self.ln_gamma_t)
    }

    /// `(ln θ, β(θ))` at `z = logit θ`.
    fn share(&self, z: T) -> (T, T, T) {
        let ln_theta = -(-z).exp().ln_1p();
        let ln_rest = -z.exp().ln_1p();
        let theta = ln_theta.exp();
        let beta = ln_rest.exp() * self.inv_gain + theta * self.lambda;
        (ln_theta, ln_rest, beta)
    }

    /// Log-density of the share integrand in `z = logit θ`, without the
    /// radial factor.
    fn ln_share(&self, z: T) -> (T, T) {
        let (ln_theta, ln_rest, beta) = self.share(z);
        let a = self.shape;
        let val = a * ln_theta + ln_rest - (a + T::one()) * beta.ln() + self.inv_gain.ln() + a.ln();
        (val, self.slope / beta)
    }

    /// Log-density of the tilted radial integrand in `y`, where
    /// `Y = exp(y − e^{−y})`, together with `Y` and `h(κY)`.
    #[inline]
    fn ln_radial(&self, kappa: T, y: T) -> (T, T, T) {
        let e = (-y).exp();
        let ln_y = y - e;
        let big_y = ln_y.exp();
        let hv = self.h(kappa * big_y);
        let val = (self.shape + T::one()) * ln_y - big_y - self.ln_gamma_t + e.ln_1p() - self.coef * hv;
        (val, big_y, hv)
    }

    fn radial_window(&self, kappa: T) -> Result<(T, T, T)> {
        let start = (self.shape + T::one()).ln();
        window(|y| self.ln_radial(kappa, y).0, start, T::lit(0.5))
    }

    /// At least `n`, and enough that the spacing in `ln Y` resolves the
    /// `1/√T` wide transition of the regularized gamma function.
    fn radial_nodes(&self, kappa: T, ylo: T, yhi: T, peak: T, n: usize) -> usize {
        // The transition sits where `κY = T`; it only matters inside the window.
        let target = ((self.shape + T::one()) / kappa).ln();
        let mut y = target;
        for _ in 0..8 {
            let e = (-y).exp();
            y = y - (y - e - target) / (T::one() + e);
        }
        let at = if y > ylo && y < yhi { peak.min(y) } else { peak };
        let stretch = T::one() + (-at).exp();
        let need = (yhi - ylo) * stretch * (self.shape + T::one()).sqrt() / T::lit(RADIAL_RESOLUTION);
        need.to_usize().map_or(n, |k| k.max(n))
    }

    /// `ln E_Y[e^{−c h(κY)}]` on `n` nodes.
    fn ln_radial_mass(&self, kappa: T, n: usize) -> Result<T> {
        let (lo, hi, _) = self.radial_window(kappa)?;
        let h = (hi - lo) / T::of(n - 1);
        let terms: Vec<T> = (0..n).map(|k| self.ln_radial(kappa, lo + h * T::of(k)).0).collect();
        Ok(log_sum_exp(&terms) + h.ln())
    }

    /// Log-weights (including `c·z₀`) and values of `Z` on all nodes.
    ///
    /// The share axis is scanned in `z = logit θ` and then integrated in
    /// `x` with `z = z* + sinh x`, which turns the exponential tails in `z`
    /// into double-exponential ones.
    fn nodes(&self, n1: usize, n2: usize, center: T) -> Result<(Vec<T>, Vec<T>)> {
        let scan = |z: T| -> T {
            let (val, kappa) = self.ln_share(z);
            match self.ln_radial_mass(kappa, 16) {
                Ok(m) => val + m,
                Err(_) => T::nan(),
            }
        };
        let z0 = (-(self.lambda / self.inv_gain).ln()).max(T::lit(-40.0)).min(T::lit(40.0));
        let (zlo, zhi, zc) = window(scan, z0, T::one())?;
        let xlo = (zlo - zc).asinh();
        let xhi = (zhi - zc).asinh();
        let hx = (xhi - xlo) / T::of(n1 - 1);
        let mut lt = Vec::with_capacity(n1 * n2);
        let mut zs = Vec::with_capacity(n1 * n2);
        for j in 0..n1 {
            let x = xlo + hx * T::of(j);
            let z = zc + x.sinh();
            let (ln_theta, _, _) = self.share(z);
            let theta = ln_theta.exp();
            let (val, kappa) = self.ln_share(z);
            let (ylo, yhi, peak) = self.radial_window(kappa)?;
            let m = self.radial_nodes(kappa, ylo, yhi, peak, n2);
            let hy = (yhi - ylo) / T::of(m - 1);
            let base = val + x.cosh().ln() + hx.ln() + hy.ln() + self.coef * center;
            for k in 0..m {
                let y = ylo + hy * T::of(k);
                let (lr, big_y, hv) = self.ln_radial(kappa, y);
                lt.push(base + lr);
                zs.push(center - hv + theta * kappa * big_y);
            }
        }
        Ok((lt, zs))
    }
}

/// Interval around the mode of the log-integrand `f` outside of which `f`
/// is more than [`WINDOW_DROP`] below its largest scanned value, and the
/// best scanned point. Scans outwards from `start` in steps of `step`.
fn window<T: Real, F: Fn(T) -> T>(f: F, start: T, step: T) -> Result<(T, T, T)> {
    let drop = T::lit(WINDOW_DROP);
    let f0 = f(start);
    if !f0.is_finite() {
        return Err(Error::numeric("cgf", format!("integrand not finite at window start {start:?}")));
    }
    let mut best = (f0, start);
    let edge = |dir: T, best: &mut (T, T)| -> Result<T> {
        let mut x = start;
        for _ in 0..SCAN_LIMIT {
            x = x + dir * step;
            let v = f(x);
            if v.is_nan() {
                return Err(Error::numeric("cgf", format!("integrand undefined at {x:?}")));
            }
            if v > best.0 {
                *best = (v, x);
            }
            if v < best.0 - drop {
                return Ok(x);
            }
        }
        Err(Error::numeric("cgf", "integrand window did not close"))
    };
    let lo = edge(-T::one(), &mut best)?;
    let hi = edge(T::one(), &mut best)?;
    Ok((lo, hi, best.1))
}
