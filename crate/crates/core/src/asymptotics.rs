//! Normal approximations and error-exponent approximations.

use serde::{Deserialize, Serialize};

use crate::cgf::{CgfEvaluator, TiltPoint};
use crate::channel::ChannelConfig;
use crate::roots::brent_root;
use crate::saddlepoint::{BoundKind, BoundPoint};
use crate::special::{digamma, hyp2f1_1b, log_gamma, q_inv};
use crate::{Error, Real, Result};

/// Capacity `C` (nats per block) and dispersion `V` (nats² per block).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityDispersion<T> {
    pub c: T,
    pub v: T,
}

/// `C = I_1` and `V = V_1` by quadrature.
pub fn capacity_dispersion<T: Real>(eval: &CgfEvaluator<T>) -> Result<CapacityDispersion<T>> {
    let st = eval.stats(T::one())?;
    Ok(CapacityDispersion { c: st.i_s, v: st.v_s })
}

/// High-SNR closed forms of `C` and `V` with the `o(1)` terms dropped.
pub fn high_snr_capacity_dispersion<T: Real>(cfg: &ChannelConfig<T>) -> Result<(T, T)> {
    if cfg.coherence() < 2 {
        return Err(Error::domain("high_snr_na", "requires T ≥ 2"));
    }
    let t = T::of(cfg.coherence());
    let a = t - T::one();
    let tr = cfg.t_rho();
    let z = tr / (T::one() + tr);
    let c = a * tr.ln() - log_gamma(t)? - a * ((T::one() + tr).ln() + z - digamma(a)?) + hyp2f1_1b(a, t, z)?;
    let v = a * a * T::PI() * T::PI() / T::lit(6.0) + a;
    Ok((c, v))
}

fn na_rate<T: Real>(cfg: &ChannelConfig<T>, c: T, v: T, eps: T) -> Result<T> {
    let t = T::of(cfg.coherence());
    let l = T::of(cfg.blocks());
    Ok(c / t - (v / (l * t * t)).sqrt() * q_inv(eps)?)
}

/// Normal approximation `C/T − √(V/(LT²)) Q⁻¹(ε)`.
pub fn normal_approx<T: Real>(eval: &CgfEvaluator<T>, eps: T) -> Result<T> {
    let cd = capacity_dispersion(eval)?;
    na_rate(eval.config(), cd.c, cd.v, eps)
}

/// Normal approximation with the high-SNR closed forms of `C` and `V`.
pub fn high_snr_na<T: Real>(cfg: &ChannelConfig<T>, eps: T) -> Result<T> {
    let (c, v) = high_snr_capacity_dispersion(cfg)?;
    na_rate(cfg, c, v, eps)
}

/// `(E_r, R)` at `τ ∈ (0, 1)` with `s = 1/(1+τ)`.
pub fn reliability_function<T: Real>(eval: &CgfEvaluator<T>, tau: T) -> Result<(T, T)> {
    if !(tau > T::zero() && tau < T::one()) {
        return Err(Error::domain("reliability_function", format!("tau = {tau:?} must lie in (0, 1)")));
    }
    let s = (T::one() + tau).recip();
    let b = eval.cgf_bundle(TiltPoint { s, tau })?;
    let e_r = (tau * b.psi1 - b.psi).max(T::zero());
    let rate = (b.stats.i_s - b.psi1) / T::of(eval.config().coherence());
    Ok((e_r, rate))
}

/// Which error-exponent approximation to invert.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EeaVariant {
    /// `ε ≈ e^{−L E_r}`.
    Plain,
    /// `ε ≈ L^{−(1+τ)/2} e^{−L E_r}`.
    Prefactor,
}

const TAU_EDGE: f64 = 1e-6;

fn eea_log_eps<T: Real>(eval: &CgfEvaluator<T>, tau: T, variant: EeaVariant) -> Result<(T, T)> {
    let (e_r, rate) = reliability_function(eval, tau)?;
    let l = T::of(eval.config().blocks());
    let mut ln_eps = -l * e_r;
    if variant == EeaVariant::Prefactor {
        ln_eps = ln_eps - (T::one() + tau) * T::lit(0.5) * l.ln();
    }
    Ok((ln_eps, rate))
}

fn eea_point_at<T: Real>(eval: &CgfEvaluator<T>, tau: T, variant: EeaVariant) -> Result<BoundPoint> {
    let (ln_eps, rate) = eea_log_eps(eval, tau, variant)?;
    let kind = match variant {
        EeaVariant::Plain => BoundKind::Eea,
        EeaVariant::Prefactor => BoundKind::EeaPref,
    };
    let mut p = BoundPoint::new(kind, rate.f64(), ln_eps.exp().f64());
    p.witness.s = Some((T::one() + tau).recip().f64());
    p.witness.tau = Some(tau.f64());
    p.diagnostics.log_eps = Some(ln_eps.f64());
    p.diagnostics.exponent = Some((-T::of(eval.config().blocks()) * reliability_function(eval, tau)?.0).f64());
    Ok(p)
}

/// Solves the error-exponent approximation for the rate at `eps`, as a
/// [`BoundPoint`] carrying the matching `τ`.
pub fn eea_point<T: Real>(eval: &CgfEvaluator<T>, eps: T, variant: EeaVariant) -> Result<BoundPoint> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::domain("eea_rate", format!("eps = {eps:?} must lie in (0, 1)")));
    }
    if eval.config().coherence() == 1 {
        return Err(Error::NoSolution("E_r ≡ 0 for T = 1".into()));
    }
    let target = eps.ln();
    let g = |tau: T| -> Result<T> { Ok(eea_log_eps(eval, tau, variant)?.0 - target) };
    let (lo, hi) = (T::lit(TAU_EDGE), T::lit(1.0 - TAU_EDGE));
    let (glo, ghi) = (g(lo)?, g(hi)?);
    if !(glo >= T::zero() && ghi <= T::zero()) {
        return Err(Error::SaddleNotFound {
            what: "eps",
            target: eps.f64(),
            lo: (ghi + target).exp().f64(),
            hi: (glo + target).exp().f64(),
        });
    }
    let tau = brent_root(g, lo, hi, T::lit(1e-9), 200)?;
    eea_point_at(eval, tau, variant)
}

/// Rate solving the error-exponent approximation at `eps`.
pub fn eea_rate<T: Real>(eval: &CgfEvaluator<T>, eps: T, variant: EeaVariant) -> Result<T> {
    Ok(T::lit(eea_point(eval, eps, variant)?.rate))
}

/// Error probability of the error-exponent approximation at `rate`.
pub fn eea_eps_at_rate<T: Real>(eval: &CgfEvaluator<T>, rate: T, variant: EeaVariant) -> Result<BoundPoint> {
    let g = |tau: T| -> Result<T> { Ok(reliability_function(eval, tau)?.1 - rate) };
    let (lo, hi) = (T::lit(TAU_EDGE), T::lit(1.0 - TAU_EDGE));
    let (glo, ghi) = (g(lo)?, g(hi)?);
    if !(glo >= T::zero() && ghi <= T::zero()) {
        return Err(Error::SaddleNotFound {
            what: "rate",
            target: rate.f64(),
            lo: (ghi + rate).f64(),
            hi: (glo + rate).f64(),
        });
    }
    let tau = brent_root(g, lo, hi, T::lit(1e-9), 200)?;
    eea_point_at(eval, tau, variant)
}
