//! A fast battery of invariants, run by `fblb selftest`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cgf::{tau_domain, CgfEvaluator, QuadratureSpec, TiltPoint};
use crate::channel::ChannelConfig;
use crate::special::{q_func, q_inv, reg_lower_inc_gamma};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// The functions under test. Replacing one simulates a faulty build.
#[derive(Clone, Copy)]
pub struct Battery {
    pub reg_lower_inc_gamma: fn(f64, f64) -> f64,
    pub quadrature: QuadratureSpec,
}

impl Default for Battery {
    fn default() -> Self {
        Self {
            reg_lower_inc_gamma: |a, x| reg_lower_inc_gamma(a, x).unwrap_or(f64::NAN),
            quadrature: QuadratureSpec::default(),
        }
    }
}

type Check = fn(&Battery) -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q_inv_round_trip(_: &Battery) -> Result<String, String> {
    let mut worst = 0.0f64;
    for k in 1..=9 {
        let eps = 10f64.powi(-k);
        let x = q_inv(eps).map_err(|e| e.to_string())?;
        worst = worst.max((q_func(x) - eps).abs() / eps);
    }
    ensure(worst <= 1e-8, || format!("relative round-trip error {worst:e}"))?;
    Ok(format!("worst relative error {worst:.1e}"))
}

fn inc_gamma(b: &Battery) -> Result<String, String> {
    let g = b.reg_lower_inc_gamma;
    for &x in &[0.1, 1.0, 3.0, 10.0] {
        let want = -(-x as f64).exp_m1();
        ensure((g(1.0, x) - want).abs() <= 1e-14, || format!("γ̃(1, {x}) = {} ≠ 1 − e^−x", g(1.0, x)))?;
    }
    for &a in &[1.0, 2.0, 5.0, 11.0] {
        let mut prev = 0.0;
        for i in 0..=500 {
            let x = 0.1 * i as f64;
            let p = g(a, x);
            ensure((0.0..=1.0).contains(&p) && p + 1e-15 >= prev, || format!("γ̃({a}, ·) not a CDF at x = {x}"))?;
            prev = p;
        }
    }
    let v = g(3.0, 2.5);
    ensure((v - 0.456_186_884_116_670_5).abs() <= 1e-13, || format!("γ̃(3, 2.5) = {v}"))?;
    Ok("closed form, CDF shape and reference value".into())
}

fn tau_domain_edges(_: &Battery) -> Result<String, String> {
    let cases = [(2usize, 1.0, 1.0, 1.5), (12, 4.0, 1.0, 49.0 / 48.0), (12, 4.0, 1e-3, 12.0 / 11.0)];
    for (t, rho, s, want) in cases {
        let cfg = ChannelConfig::<f64>::new(t, 1, rho).map_err(|e| e.to_string())?;
        let got = tau_domain(&cfg, s).map_err(|e| e.to_string())?.tau_max;
        ensure((got - want).abs() <= 1e-14, || format!("tau_max(T={t}, rho={rho}, s={s}) = {got}, want {want}"))?;
    }
    Ok("three reference edges".into())
}

fn mu_at_one(b: &Battery) -> Result<String, String> {
    let cfg = ChannelConfig::<f64>::new(12, 14, 4.0).map_err(|e| e.to_string())?;
    let mu = CgfEvaluator::new(cfg, b.quadrature).mu(1.0).map_err(|e| e.to_string())?;
    ensure((mu - 1.0).abs() <= 1e-6, || format!("mu(1) = {mu}"))?;
    Ok(format!("mu(1) - 1 = {:.1e}", mu - 1.0))
}

fn cgf_derivatives(b: &Battery) -> Result<String, String> {
    let cfg = ChannelConfig::<f64>::new(12, 14, 4.0).map_err(|e| e.to_string())?;
    let eval = CgfEvaluator::new(cfg, b.quadrature);
    let at = |tau: f64| eval.cgf_bundle(TiltPoint { s: 1.0, tau }).map_err(|e| e.to_string());
    let origin = at(0.0)?;
    ensure(origin.psi.abs() <= 1e-10 && origin.psi1.abs() <= 1e-10, || format!("psi(0) = {}, psi'(0) = {}", origin.psi, origin.psi1))?;
    let (tau, h) = (0.5, 1e-4);
    let c = at(tau)?;
    let (m1, p1) = (at(tau - h)?, at(tau + h)?);
    let d1 = (p1.psi - m1.psi) / (2.0 * h);
    let d2 = (p1.psi1 - m1.psi1) / (2.0 * h);
    let d3 = (p1.psi2 - m1.psi2) / (2.0 * h);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let worst = rel(d1, c.psi1).max(rel(d2, c.psi2)).max(rel(d3, c.psi3));
    ensure(worst <= 1e-4 && c.psi2 > 0.0, || format!("finite-difference mismatch {worst:e}"))?;
    Ok(format!("worst relative finite-difference gap {worst:.1e}"))
}

const CHECKS: [(&str, Check); 5] = [
    ("q-inv-round-trip", q_inv_round_trip),
    ("inc-gamma", inc_gamma),
    ("tau-domain-edges", tau_domain_edges),
    ("mu-at-one", mu_at_one),
    ("cgf-derivatives", cgf_derivatives),
];

/// Runs every check against `battery`.
pub fn run_with(battery: &Battery) -> SelftestReport {
    let checks: Vec<CheckResult> = CHECKS
        .iter()
        .map(|(name, f)| {
            let t0 = Instant::now();
            let r = f(battery);
            CheckResult {
                name: (*name).to_string(),
                passed: r.is_ok(),
                detail: r.unwrap_or_else(|e| e),
                seconds: t0.elapsed().as_secs_f64(),
            }
        })
        .collect();
    SelftestReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

pub fn run() -> SelftestReport {
    run_with(&Battery::default())
}
