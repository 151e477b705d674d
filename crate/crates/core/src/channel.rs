//! The noncoherent Rayleigh block-fading channel with unitary space-time
//! modulated (USTM) inputs.
//!
//! Within each coherence interval of `T` channel uses the output is
//! `y = h·x + w` with `h ~ CN(0, 1)` and `w ~ CN(0, I_T)`, and the input is
//! uniform on the sphere `‖x‖² = Tρ`.
//!
//! The generalized information density `i_s` of one interval is available
//! in two forms. [`info_density_direct`] evaluates the defining log-ratio
//! on a channel realization, with the input average estimated by sampling
//! the sphere. [`info_density`] evaluates the same random variable as a
//! function of two independent gamma variables, which is what every other
//! module uses.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cgf::{CgfEvaluator, QuadratureSpec};
use crate::special::{ln_lower_gamma_excess, log_gamma_pos, log_sum_exp};
use crate::{Error, Real, Result};

/// Coherence length `T`, number of coherence intervals `L` and linear SNR `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig<T> {
    coherence: usize,
    blocks: usize,
    snr: T,
}

impl<T: Real> ChannelConfig<T> {
    pub fn new(coherence: usize, blocks: usize, snr: T) -> Result<Self> {
        if coherence == 0 {
            return Err(Error::domain("ChannelConfig::new", "coherence length T must be at least 1"));
        }
        if blocks == 0 {
            return Err(Error::domain("ChannelConfig::new", "number of blocks L must be at least 1"));
        }
        if !(snr > T::zero()) || !snr.is_finite() {
            return Err(Error::domain("ChannelConfig::new", format!("SNR {snr:?} must be positive and finite")));
        }
        Ok(Self { coherence, blocks, snr })
    }

    /// Same as [`ChannelConfig::new`] with the SNR given in dB.
    pub fn from_db(coherence: usize, blocks: usize, snr_db: T) -> Result<Self> {
        Self::new(coherence, blocks, T::lit(10.0).powf(snr_db / T::lit(10.0)))
    }

    /// `T`, channel uses per coherence interval.
    pub fn coherence(&self) -> usize {
        self.coherence
    }

    /// `L`, number of coherence intervals per codeword.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// `ρ` on a linear scale.
    pub fn snr(&self) -> T {
        self.snr
    }

    /// Blocklength `n = L·T`.
    pub fn blocklength(&self) -> usize {
        self.coherence * self.blocks
    }

    pub fn with_blocks(&self, blocks: usize) -> Result<Self> {
        Self::new(self.coherence, blocks, self.snr)
    }

    /// Per-interval SNR `Tρ`.
    pub(crate) fn t_rho(&self) -> T {
        T::of(self.coherence) * self.snr
    }
}

/// One realization of `(Υ₁, Υ₂)` with `Υ₁ ~ Exp(1)` and `Υ₂ ~ Gamma(T − 1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPair<T> {
    pub u1: T,
    pub u2: T,
}

/// Input and output of one coherence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSample<T> {
    pub x: Vec<Complex<T>>,
    pub y: Vec<Complex<T>>,
}

/// Evaluates `i_s` as a function of the gamma pair for a fixed `(T, ρ, s)`.
///
/// With `w = (1 + Tρ)u₁ + u₂`, `v = sTρ·w/(1 + Tρ)` and `a = T − 1`,
///
/// `i_s = a·ln v − lnΓ(T) − ln γ̃(a, v) − sTρ·u₂/(1 + Tρ)`.
///
/// The first three terms are combined so that nothing cancels as `v → 0`.
#[derive(Debug, Clone, Copy)]
pub struct InfoDensityKernel<T> {
    shape: T,
    ln_gamma_t: T,
    /// `sTρ/(1 + Tρ)`.
    slope: T,
    /// `1 + Tρ`.
    gain: T,
    degenerate: bool,
}

impl<T: Real> InfoDensityKernel<T> {
    pub fn new(cfg: &ChannelConfig<T>, s: T) -> Result<Self> {
        if !(s > T::zero()) || !s.is_finite() {
            return Err(Error::domain("info_density", format!("s = {s:?} must be positive")));
        }
        let t_rho = cfg.t_rho();
        let gain = T::one() + t_rho;
        Ok(Self {
            shape: T::of(cfg.coherence() - 1),
            ln_gamma_t: log_gamma_pos(T::of(cfg.coherence())),
            slope: s * t_rho / gain,
            gain,
            degenerate: cfg.coherence() == 1,
        })
    }

    /// `sTρ/(1 + Tρ)`, the coefficient of `u₂` in `−i_s`.
    pub fn slope(&self) -> T {
        self.slope
    }

    /// `1 + Tρ`.
    pub fn gain(&self) -> T {
        self.gain
    }

    #[inline]
    pub fn eval(&self, u1: T, u2: T) -> T {
        if self.degenerate {
            return T::zero();
        }
        let v = self.slope * (self.gain * u1 + u2);
        ln_lower_gamma_excess(self.shape, v, self.ln_gamma_t) - self.slope * u2
    }
}

/// `i_s` evaluated at one gamma pair. Identically zero when `T = 1`.
pub fn info_density<T: Real>(cfg: &ChannelConfig<T>, s: T, pair: GammaPair<T>) -> Result<T> {
    if !(pair.u1 >= T::zero()) || !(pair.u2 >= T::zero()) {
        return Err(Error::domain("info_density", format!("gamma pair {pair:?} must be nonnegative")));
    }
    Ok(InfoDensityKernel::new(cfg, s)?.eval(pair.u1, pair.u2))
}

/// Uniform draw on `(0, 1]`, so its logarithm is always finite.
#[inline]
fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// Draws `(Υ₁, Υ₂)` as `−ln U₀` and `−ln(U₁⋯U_{T−1})` from `T` uniforms.
pub fn sample_gamma_pair<T: Real, R: Rng + ?Sized>(rng: &mut R, coherence: usize) -> GammaPair<T> {
    let u1 = -open_uniform(rng).ln();
    let mut u2 = 0.0;
    let mut prod = 1.0;
    for k in 1..coherence {
        prod *= open_uniform(rng);
        // flush the running product before it can underflow
        if k % 16 == 0 {
            u2 -= prod.ln();
            prod = 1.0;
        }
    }
    u2 -= prod.ln();
    GammaPair { u1: T::lit(u1), u2: T::lit(u2) }
}

fn norm_sqr<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

/// `ln p(y | x) = −T ln π − ln(1 + ‖x‖²) − ‖y‖² + |yᴴx|²/(1 + ‖x‖²)`.
pub fn log_cond_pdf<T: Real>(cfg: &ChannelConfig<T>, x: &[Complex<T>], y: &[Complex<T>]) -> Result<T> {
    let t = cfg.coherence();
    if x.len() != t || y.len() != t {
        return Err(Error::domain(
            "log_cond_pdf",
            format!("x and y must have length T = {t}, got {} and {}", x.len(), y.len()),
        ));
    }
    Ok(log_cond_pdf_unchecked(t, x, y))
}

fn log_cond_pdf_unchecked<T: Real>(t: usize, x: &[Complex<T>], y: &[Complex<T>]) -> T {
    let gain = T::one() + norm_sqr(x);
    let inner = y
        .iter()
        .zip(x)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (yi, xi)| acc + yi.conj() * xi);
    -T::of(t) * T::PI().ln() - gain.ln() - norm_sqr(y) + inner.norm_sqr() / gain
}

fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex<T> {
    let sd = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(sd * re), T::lit(sd * im))
}

/// Uniform point on the sphere of radius `√(Tρ)` in `ℂ^T`.
pub fn sample_ustm_input<T: Real, R: Rng + ?Sized>(rng: &mut R, cfg: &ChannelConfig<T>) -> Vec<Complex<T>> {
    let g: Vec<Complex<T>> = (0..cfg.coherence()).map(|_| complex_gaussian(rng, 1.0)).collect();
    let scale = cfg.t_rho().sqrt() / norm_sqr(&g).sqrt();
    g.into_iter().map(|z| z * scale).collect()
}

/// One USTM input and the channel output for a fresh fading gain and noise.
pub fn sample_ustm_block<T: Real, R: Rng + ?Sized>(rng: &mut R, cfg: &ChannelConfig<T>) -> BlockSample<T> {
    let x = sample_ustm_input(rng, cfg);
    let h: Complex<T> = complex_gaussian(rng, 1.0);
    let y = x.iter().map(|&xi| h * xi + complex_gaussian::<T, R>(rng, 1.0)).collect();
    BlockSample { x, y }
}

/// `i_s` from its definition, `ln p(y|x)^s − ln E_x̄[p(y|x̄)^s]`, with the
/// input average replaced by an average over `m_sphere` fresh USTM inputs.
/// Intended as a test oracle.
pub fn info_density_direct<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &ChannelConfig<T>,
    s: T,
    block: &BlockSample<T>,
    m_sphere: usize,
) -> Result<T> {
    if m_sphere == 0 {
        return Err(Error::domain("info_density_direct", "m_sphere must be positive"));
    }
    let num = s * log_cond_pdf(cfg, &block.x, &block.y)?;
    let terms: Vec<T> = (0..m_sphere)
        .map(|_| {
            let xb = sample_ustm_input(rng, cfg);
            s * log_cond_pdf_unchecked(cfg.coherence(), &xb, &block.y)
        })
        .collect();
    let den = log_sum_exp(&terms) - T::of(m_sphere).ln();
    Ok(num - den)
}

/// `μ(s) = E[exp(−i_s / s)]`, by the same quadrature as the CGF.
pub fn mu_factor<T: Real>(cfg: &ChannelConfig<T>, s: T, quad: QuadratureSpec) -> Result<T> {
    CgfEvaluator::new(*cfg, quad).mu(s)
}
