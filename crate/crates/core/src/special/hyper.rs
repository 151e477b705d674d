use super::gamma::digamma;
use crate::{Error, Real, Result};

/// Gauss hypergeometric function `₂F₁(1, b; b + 1; z)` for `0 ≤ z < 1`.
///
/// Only the `c = b + 1` family is supported. For `z ≤ 0.95` the defining
/// series `b Σ z^k / (b + k)` is summed directly; above that the logarithmic
/// `1 − z` expansion for `c = a + b` is used, which converges geometrically
/// in `1 − z`. The expansion is only taken while `b (1 − z) ≤ 1/2`; for larger
/// `b` its leading coefficients grow and cancel, so the direct series is kept.
pub fn hyp2f1_1b<T: Real>(b: T, c: T, z: T) -> Result<T> {
    if !(b > T::zero()) || !b.is_finite() {
        return Err(Error::domain("hyp2f1_1b", format!("b = {b:?} must be positive")));
    }
    if (c - (b + T::one())).abs() > T::lit(1e-12) * c.abs().max(T::one()) {
        return Err(Error::domain("hyp2f1_1b", format!("requires c = b + 1, got b = {b:?}, c = {c:?}")));
    }
    if !(z >= T::zero()) || !(z < T::one()) {
        return Err(Error::domain("hyp2f1_1b", format!("z = {z:?} must lie in [0, 1)")));
    }
    if z == T::zero() {
        return Ok(T::one());
    }
    if z <= T::lit(0.95) || b * (T::one() - z) > T::lit(0.5) {
        Ok(direct_series(b, z))
    } else {
        one_minus_z_expansion(b, z)
    }
}

fn direct_series<T: Real>(b: T, z: T) -> T {
    let mut sum = T::zero();
    let mut zk = T::one();
    let mut k = T::zero();
    for _ in 0..1_000_000 {
        let term = zk / (b + k);
        sum = sum + term;
        if term < sum * T::epsilon() * T::lit(0.25) {
            break;
        }
        zk = zk * z;
        k = k + T::one();
    }
    b * sum
}

/// `b Σ_n (b)_n / n! · [ψ(n+1) − ψ(b+n) − ln(1−z)] (1−z)^n`.
fn one_minus_z_expansion<T: Real>(b: T, z: T) -> Result<T> {
    let w = T::one() - z;
    let ln_w = w.ln();
    let mut psi_n1 = digamma(T::one())?;
    let mut psi_bn = digamma(b)?;
    let mut coeff = T::one(); // (b)_n / n! · w^n
    let mut sum = T::zero();
    let mut n = T::zero();
    for _ in 0..10_000 {
        let term = coeff * (psi_n1 - psi_bn - ln_w);
        sum = sum + term;
        if term.abs() < sum.abs() * T::epsilon() * T::lit(0.25) && n > b {
            return Ok(b * sum);
        }
        coeff = coeff * (b + n) / (n + T::one()) * w;
        psi_n1 = psi_n1 + (n + T::one()).recip();
        psi_bn = psi_bn + (b + n).recip();
        n = n + T::one();
    }
    Err(Error::numeric("hyp2f1_1b", "1 − z expansion did not converge"))
}
