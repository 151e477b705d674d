use fblb::channel::{sample_gamma_pair, InfoDensityKernel};
use fblb::{cgf, CgfEvaluator, ChannelConfig, QuadratureSpec, TiltPoint};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn eval(t: usize, rho: f64) -> CgfEvaluator {
    CgfEvaluator::new(ChannelConfig::new(t, 14, rho).unwrap(), QuadratureSpec::default())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn derivatives_match_central_differences() {
    let h = 1e-4;
    for &rho in &[0.5, 4.0, 100.0] {
        let e = eval(12, rho);
        for &s in &[0.5, 1.0, 1.5] {
            let cap = e.tau_domain(s).unwrap().cap;
            for &frac in &[0.1, 0.4, 0.7] {
                let tau = frac * cap;
                let at = |t: f64| e.cgf_bundle(TiltPoint { s, tau: t }).unwrap();
                let (m, c, p) = (at(tau - h), at(tau), at(tau + h));
                let d1 = (p.psi - m.psi) / (2.0 * h);
                let d2 = (p.psi1 - m.psi1) / (2.0 * h);
                let d3 = (p.psi2 - m.psi2) / (2.0 * h);
                let here = format!("rho {rho} s {s} tau {tau}");
                assert!(rel(d1, c.psi1) < 1e-4, "{here}: psi' {} vs {d1}", c.psi1);
                assert!(rel(d2, c.psi2) < 1e-4, "{here}: psi'' {} vs {d2}", c.psi2);
                assert!(rel(d3, c.psi3) < 1e-4, "{here}: psi''' {} vs {d3}", c.psi3);
            }
        }
    }
}

#[test]
fn cgf_vanishes_at_origin() {
    for &(t, rho, s) in &[(2, 1.0, 1.0), (12, 4.0, 0.5), (168, 1e3, 2.0)] {
        let b = eval(t, rho).cgf_bundle(TiltPoint { s, tau: 0.0 }).unwrap();
        assert!(b.psi.abs() < 1e-10 && b.psi1.abs() < 1e-10, "T={t}: {b:?}");
        assert!(rel(b.psi2, b.stats.v_s) < 1e-10);
    }
}

#[test]
fn convex_on_a_grid() {
    for &t in &[2usize, 5, 12, 40, 168] {
        for &rho in &[0.1, 1.0, 10.0, 1e2, 1e4] {
            let e = eval(t, rho);
            for &s in &[0.05, 0.3, 1.0, 1.5, 2.0] {
                let cap = e.tau_domain(s).unwrap().cap;
                let mut prev = f64::NEG_INFINITY;
                for k in 0..=4 {
                    let b = e.cgf_bundle(TiltPoint { s, tau: cap * k as f64 / 4.0 }).unwrap();
                    assert!(b.psi2 > 0.0, "T={t} rho={rho} s={s}: {b:?}");
                    assert!(b.psi1 > prev);
                    assert!(b.exponent() <= 1e-10 * b.psi.abs().max(1.0), "T={t} rho={rho} s={s}: exponent {}", b.exponent());
                    prev = b.psi1;
                }
            }
        }
    }
}

#[test]
fn tilted_mean_by_reweighting() {
    let (t, rho, s, tau) = (2, 1.0, 1.0, 0.3);
    let e = eval(t, rho);
    let b = e.cgf_bundle(TiltPoint { s, tau }).unwrap();
    let cfg = ChannelConfig::new(t, 1, rho).unwrap();
    let kernel = InfoDensityKernel::new(&cfg, s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 1_000_000;
    let (mut sw, mut swz, mut sw2, mut sw2z, mut sw2z2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let p = sample_gamma_pair::<f64, _>(&mut rng, t);
        let z = b.stats.i_s - kernel.eval(p.u1, p.u2);
        let w = (tau * z).exp();
        sw += w;
        swz += w * z;
        sw2 += w * w;
        sw2z += w * w * z;
        sw2z2 += w * w * z * z;
    }
    let mean = swz / sw;
    // Delta-method variance of the ratio estimator.
    let nf = n as f64;
    let wbar = sw / nf;
    let var = (sw2z2 - 2.0 * mean * sw2z + mean * mean * sw2) / nf / (wbar * wbar) / nf;
    assert!((mean - b.psi1).abs() < 4.0 * var.sqrt(), "{mean} ± {} vs {}", var.sqrt(), b.psi1);
    let ln_m = (sw / nf).ln();
    assert!((ln_m - b.psi).abs() < 0.01 * b.psi.abs().max(1e-3), "{ln_m} vs {}", b.psi);
}

#[test]
fn doubling_the_nodes_changes_nothing() {
    let fine = QuadratureSpec {
        n1: 192,
        n2: 48,
        ..QuadratureSpec::default()
    };
    for &(t, rho) in &[(2, 1.0), (12, 4.0), (168, 1.0)] {
        let cfg = ChannelConfig::new(t, 1, rho).unwrap();
        let (a, b) = (CgfEvaluator::new(cfg, QuadratureSpec::default()), CgfEvaluator::new(cfg, fine));
        for &s in &[0.5, 1.0] {
            let tau = 0.8 * a.tau_domain(s).unwrap().cap;
            let (x, y) = (a.cgf_bundle(TiltPoint { s, tau }).unwrap(), b.cgf_bundle(TiltPoint { s, tau }).unwrap());
            for (u, v) in [(x.psi, y.psi), (x.psi1, y.psi1), (x.psi2, y.psi2), (x.psi3, y.psi3)] {
                assert!((u - v).abs() <= 1e-8 * u.abs().max(1.0), "T={t} s={s}: {u} vs {v}");
            }
        }
    }
}

#[test]
fn dispersion_increases_in_snr_and_s() {
    for &t in &[2usize, 12] {
        let mut prev = 0.0;
        for &rho in &[0.1, 0.5, 1.0, 4.0, 20.0, 100.0, 1e3] {
            let v = eval(t, rho).stats(1.0).unwrap().v_s;
            assert!(v > prev, "T={t} rho={rho}");
            prev = v;
        }
        let e = eval(t, 4.0);
        let mut prev = 0.0;
        for k in 1..=20 {
            let v = e.stats(0.1 * k as f64).unwrap().v_s;
            assert!(v > prev, "T={t} s={}", 0.1 * k as f64);
            prev = v;
        }
    }
}

#[test]
fn saddle_round_trip() {
    let e = eval(12, 4.0);
    for k in 0..20 {
        let s = 0.3 + 0.08 * k as f64;
        let cap = e.tau_domain(s).unwrap().cap;
        let tau = cap * (0.02 + 0.045 * k as f64);
        let target = e.cgf_bundle(TiltPoint { s, tau }).unwrap().psi1;
        let back = e.solve_saddle(s, target).unwrap();
        assert!((back - tau).abs() < 1e-7, "s={s}: {tau} -> {back}");
    }
    let top = e.cgf_bundle(TiltPoint { s: 1.0, tau: e.tau_domain(1.0).unwrap().cap }).unwrap().psi1;
    assert!(e.solve_saddle(1.0, 2.0 * top).is_err());
}

#[test]
fn cache_does_not_change_results() {
    let cfg = ChannelConfig::new(12, 14, 4.0).unwrap();
    let cached = CgfEvaluator::new(cfg, QuadratureSpec::default());
    let plain = CgfEvaluator::new(cfg, QuadratureSpec::default()).with_cache(false);
    for &(s, tau) in &[(1.0, 0.3), (0.5, 0.9), (1.0, 0.3)] {
        let a = cached.cgf_bundle(TiltPoint { s, tau }).unwrap();
        let b = plain.cgf_bundle(TiltPoint { s, tau }).unwrap();
        assert_eq!(a, b);
    }
    let other_l = cached.with_blocks(100).unwrap();
    assert_eq!(other_l.stats(1.0).unwrap(), cached.stats(1.0).unwrap());
}

#[test]
fn tilts_outside_the_domain_are_rejected() {
    let e = eval(12, 4.0);
    let dom = e.tau_domain(1.0).unwrap();
    assert!((dom.cap - 0.995 * dom.tau_max).abs() < 1e-15);
    assert!(e.cgf_bundle(TiltPoint { s: 1.0, tau: dom.cap }).is_ok());
    assert!(e.cgf_bundle(TiltPoint { s: 1.0, tau: dom.tau_max }).is_err());
    assert!(e.cgf_bundle(TiltPoint { s: 1.0, tau: -0.1 }).is_err());
    assert!(e.stats(0.0).is_err());
}

#[test]
fn single_precision_tracks_double() {
    let cfg = cgf::CgfEvaluator::<f32>::new(fblb::channel::ChannelConfig::<f32>::new(12, 14, 4.0).unwrap(), QuadratureSpec {
        tol: 1e-3,
        ..QuadratureSpec::default()
    });
    let lo = cfg.stats(1.0).unwrap();
    let hi = eval(12, 4.0).stats(1.0).unwrap();
    assert!(rel(lo.i_s as f64, hi.i_s) < 1e-4, "{} vs {}", lo.i_s, hi.i_s);
    assert!(rel(lo.v_s as f64, hi.v_s) < 1e-3, "{} vs {}", lo.v_s, hi.v_s);
}

#[test]
fn hard_corners_refine_the_rule() {
    let cfg = ChannelConfig::new(168, 1, 1e4).unwrap();
    let e = CgfEvaluator::new(cfg, QuadratureSpec::default());
    let rule = e.effective_rule(0.05).unwrap();
    assert!(rule.n1 > QuadratureSpec::default().n1);
    let reference = CgfEvaluator::new(cfg, QuadratureSpec { n1: 768, n2: 192, tol: 1.0, ..QuadratureSpec::default() });
    let (a, b) = (e.stats(0.05).unwrap(), reference.stats(0.05).unwrap());
    let tol = 2.0 * QuadratureSpec::default().tol;
    assert!(rel(a.v_s, b.v_s) < tol && rel(a.i_s, b.i_s) < tol, "{a:?} vs {b:?}");
    assert_eq!(eval(12, 4.0).effective_rule(1.0).unwrap(), QuadratureSpec::default());
}
