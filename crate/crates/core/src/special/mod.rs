//! Scalar special functions used throughout the crate.
//!
//! All functions are generic over [`Real`]. Tail quantities are available
//! in log form so that exponents of a few hundred nats never round to zero
//! before they are combined.

mod gamma;
mod hyper;
mod normal;

pub use gamma::{digamma, ln_reg_lower_inc_gamma, log_gamma, reg_lower_inc_gamma, reg_upper_inc_gamma};
pub use hyper::hyp2f1_1b;
pub use normal::{ln_q_func, q_func, q_inv, q_scaled};

pub(crate) use gamma::{ln_lower_gamma_excess, log_gamma_pos};

use crate::Real;

/// `ln Σ exp(x_i)`, returning `-∞` for an empty or all `-∞` input.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let m = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return m;
    }
    if m == T::infinity() {
        return m;
    }
    let s = xs.iter().fold(T::zero(), |acc, &x| acc + (x - m).exp());
    m + s.ln()
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == T::neg_infinity() {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}
