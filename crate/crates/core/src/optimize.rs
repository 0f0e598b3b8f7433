//! Bounded scalar maximization by Brent's method: golden-section steps,
//! switching to parabolic interpolation when the fit is trustworthy.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// Maximizes `f` on `[lo, hi]` until the bracket is narrower than `width`.
///
/// `start` may carry an interior point and its value, e.g. the best node of a
/// coarse grid; otherwise the first golden-section point is used.
pub fn brent_maximize<F>(mut f: F, lo: f64, hi: f64, start: Option<(f64, f64)>, width: f64) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    debug_assert!(lo < hi);
    // bracket on exit is at most 4·tol1 wide
    let tol = 0.6 * width;
    let eps = 1e-10;
    let mut evaluations = 0;
    let mut eval = |x: f64| {
        evaluations += 1;
        let v = f(x);
        // minimize the negated objective; NaN counts as worst
        if v.is_nan() {
            f64::INFINITY
        } else {
            -v
        }
    };

    let (mut a, mut b) = (lo, hi);
    let (mut x, mut fx) = match start {
        Some((x0, f0)) if x0 >= lo && x0 <= hi => (x0, if f0.is_nan() { f64::INFINITY } else { -f0 }),
        _ => {
            let x0 = a + GOLDEN * (b - a);
            (x0, eval(x0))
        }
    };
    let (mut w, mut fw, mut v, mut fv) = (x, fx, x, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);

    for _ in 0..500 {
        let xm = 0.5 * (a + b);
        let tol1 = eps * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = eval(u);
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
    Maximum {
        x,
        value: -fx,
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let m = brent_maximize(|x| -(x - 0.3).powi(2), -1.0, 1.0, None, 1e-7);
        assert!((m.x - 0.3).abs() < 1e-7, "{m:?}");
    }

    #[test]
    fn finds_log_peak_near_edge() {
        // maximum of log(1 - x^2) - 3x on (-1, 1)
        let f = |x: f64| (1.0 - x * x).ln() - 3.0 * x;
        let exact = (-2.0 + (4.0f64 + 36.0).sqrt()) / -6.0;
        let m = brent_maximize(f, -0.999, 0.999, None, 1e-7);
        assert!((m.x - exact).abs() < 1e-7, "{} vs {exact}", m.x);
    }

    #[test]
    fn monotone_goes_to_boundary() {
        let m = brent_maximize(|x| x, 0.0, 1.0, None, 1e-7);
        assert!(1.0 - m.x < 1e-7);
    }

    #[test]
    fn honours_start_point() {
        let m = brent_maximize(|x| -(x - 2.0).abs(), 0.0, 4.0, Some((2.0, 0.0)), 1e-7);
        assert!((m.x - 2.0).abs() < 1e-7);
        assert_eq!(m.value, 0.0);
    }
}
