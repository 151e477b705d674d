//! Scalar root finding and one-dimensional minimisation.

use crate::{Error, Real, Result};

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping once the
/// bracket is narrower than `xtol`.
pub fn bisect<T: Real, F>(mut f: F, mut lo: T, mut hi: T, xtol: T, max_iter: usize) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::numeric(
            "bisect",
            format!("no sign change on [{lo:?}, {hi:?}]: f = {flo:?}, {fhi:?}"),
        ));
    }
    for _ in 0..max_iter {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if (hi - lo).abs() <= xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == T::zero() {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(lo + (hi - lo) * T::lit(0.5))
}

/// Newton iteration kept inside a shrinking bracket `[lo, hi]` for an
/// increasing function. `fdf` returns the value and the derivative.
/// Falls back to bisection whenever a Newton step leaves the bracket.
pub fn newton_increasing<T: Real, F>(
    mut fdf: F,
    mut lo: T,
    mut hi: T,
    x0: T,
    ftol: T,
    max_iter: usize,
) -> Result<T>
where
    F: FnMut(T) -> Result<(T, T)>,
{
    let mut x = x0.max(lo).min(hi);
    for _ in 0..max_iter {
        let (fx, dfx) = fdf(x)?;
        if fx.abs() <= ftol {
            return Ok(x);
        }
        if fx > T::zero() {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - fx / dfx;
        x = if dfx > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            lo + (hi - lo) * T::lit(0.5)
        };
        if hi - lo <= T::epsilon() * hi.abs().max(T::one()) {
            return Ok(x);
        }
    }
    Err(Error::numeric("newton_increasing", format!("no convergence in [{lo:?}, {hi:?}]")))
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
/// Returns `(x_min, f_min)`.
pub fn golden_min<T: Real, F>(mut f: F, mut a: T, mut b: T, xtol: T, max_iter: usize) -> Result<(T, T)>
where
    F: FnMut(T) -> Result<T>,
{
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..max_iter {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// Grid scan followed by golden-section refinement around the best grid
/// point. Ties keep the first grid point. Points where `f` fails are
/// skipped; if every grid point fails, the first error is returned.
pub fn grid_then_golden<T: Real, F>(mut f: F, grid: &[T], xtol: T) -> Result<(T, T)>
where
    F: FnMut(T) -> Result<T>,
{
    let mut best: Option<(usize, T)> = None;
    let mut first_err = None;
    for (i, &x) in grid.iter().enumerate() {
        match f(x) {
            Ok(v) if v.is_finite() => {
                if best.map_or(true, |(_, bv)| v < bv) {
                    best = Some((i, v));
                }
            }
            Ok(_) => {}
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let Some((i, v)) = best else {
        return Err(first_err.unwrap_or_else(|| Error::NoSolution("empty search grid".into())));
    };
    let lo = if i == 0 { grid[0] } else { grid[i - 1] };
    let hi = if i + 1 == grid.len() { grid[i] } else { grid[i + 1] };
    if hi - lo <= xtol {
        return Ok((grid[i], v));
    }
    // Failed evaluations inside the bracket count as +∞.
    let (x, fx) = golden_min(
        |x| Ok(f(x).ok().filter(|v| v.is_finite()).unwrap_or(T::infinity())),
        lo,
        hi,
        xtol,
        200,
    )?;
    Ok(if fx < v { (x, fx) } else { (grid[i], v) })
}

/// Brent's method for a root of `f` on a bracket `[a, b]` with a sign
/// change. Stops when the bracket is narrower than `xtol` (plus a few ulps).
pub fn brent_root<T: Real, F>(mut f: F, mut a: T, mut b: T, xtol: T, max_iter: usize) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::numeric(
            "brent_root",
            format!("no sign change on [{a:?}, {b:?}]: f = {fa:?}, {fb:?}"),
        ));
    }
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * T::epsilon() * b.abs() + half * xtol;
        let m = half * (c - b);
        if m.abs() <= tol || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (T::lit(3.0) * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = b + if d.abs() > tol { d } else { tol * m.signum() };
        fb = f(b)?;
    }
    Err(Error::numeric("brent_root", format!("no convergence near {b:?}")))
}

/// Brent's minimiser on `[a, b]`. Non-finite values of `f` are tolerated:
/// they fail every parabolic-step test, so the search falls back to golden
/// sections. Returns `(x_min, f_min)`.
pub fn brent_min<T: Real, F>(mut f: F, mut a: T, mut b: T, xtol: T, max_iter: usize) -> Result<(T, T)>
where
    F: FnMut(T) -> Result<T>,
{
    let cgold = (T::lit(3.0) - T::lit(5.0).sqrt()) * T::lit(0.5);
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let mut x = a + cgold * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x)?;
    let mut fw = fx;
    let mut fv = fx;
    let mut d = T::zero();
    let mut e = T::zero();
    for _ in 0..max_iter {
        let xm = half * (a + b);
        let tol1 = T::epsilon().sqrt() * x.abs() * T::lit(1e-3) + xtol / T::lit(3.0);
        let tol2 = two * tol1;
        if (x - xm).abs() <= tol2 - half * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = two * (q - r);
            if q > T::zero() {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            if p.abs() < (half * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1 * (xm - x).signum();
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = cgold * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1 * d.signum() };
        let fu = f(u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok((x, fx))
}

/// Evaluates `f` on `n` equispaced points of `[lo, hi]` and refines the
/// best one with [`brent_min`] between its neighbours. Failed or non-finite
/// evaluations count as `+∞`.
pub fn scan_then_brent<T: Real, F>(mut f: F, lo: T, hi: T, n: usize, xtol: T) -> Result<(T, T)>
where
    F: FnMut(T) -> Result<T>,
{
    let n = n.max(3);
    let step = (hi - lo) / T::of(n - 1);
    let mut g = |x: T| f(x).ok().filter(|v| !v.is_nan()).unwrap_or(T::infinity());
    let mut best = (0usize, T::infinity());
    for i in 0..n {
        let v = g(lo + step * T::of(i));
        if v < best.1 {
            best = (i, v);
        }
    }
    let (i, v) = best;
    if !v.is_finite() {
        return Err(Error::NoSolution("objective infinite on the whole scan".into()));
    }
    let a = lo + step * T::of(i.saturating_sub(1));
    let b = lo + step * T::of((i + 1).min(n - 1));
    let (x, fx) = brent_min(|x| Ok(g(x)), a, b, xtol, 100)?;
    Ok(if fx < v { (x, fx) } else { (lo + step * T::of(i), v) })
}
