use super::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootControl {
    /// Final bracket width target.
    pub abs_tol: f64,
    pub max_iterations: usize,
}

impl Default for RootControl {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_iterations: 200,
        }
    }
}

/// Root of `f` inside `[lo, hi]`, where `f(lo)` and `f(hi)` differ in sign.
pub fn find_root_bracketed<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    find_root_bracketed_with(
        f,
        lo,
        hi,
        RootControl {
            abs_tol: tol,
            ..RootControl::default()
        },
    )
}

/// Brent's method: secant / inverse quadratic steps guarded by bisection,
/// so the bracket always shrinks and the result never leaves `[lo, hi]`.
pub fn find_root_bracketed_with<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    ctrl: RootControl,
) -> Result<f64, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(NumericsError::NoSignChange {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..ctrl.max_iterations {
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
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * ctrl.abs_tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(NumericsError::MaxIterations {
        iterations: ctrl.max_iterations,
        lo: b.min(c),
        hi: b.max(c),
    })
}
