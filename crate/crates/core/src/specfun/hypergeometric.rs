use super::dd::Dd;
use super::{NumericsError, SeriesControl};

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Generalized hypergeometric function ₁F₂(a; b1, b2; z) by its ascending
/// series.
///
/// Terms and partial sums are carried in double-double precision so the
/// alternating series for large negative `z` (where intermediate terms grow
/// like e^{2√|z|}) still returns close to full f64 accuracy for
/// `|z|` up to a few hundred.
pub fn hyp1f2(a: f64, b1: f64, b2: f64, z: f64, ctrl: SeriesControl) -> Result<f64, NumericsError> {
    hyp1f2_dd(a, b1, b2, z, ctrl).map(Dd::to_f64)
}

/// Same series, returning the double-double partial sum so callers can
/// cancel it against other large terms without rounding first.
pub(crate) fn hyp1f2_dd(a: f64, b1: f64, b2: f64, z: f64, ctrl: SeriesControl) -> Result<Dd, NumericsError> {
    for b in [b1, b2] {
        if is_nonpositive_integer(b) {
            return Err(NumericsError::Pole {
                function: "hyp1f2",
                x: b,
            });
        }
    }
    if z == 0.0 {
        return Ok(Dd::ONE);
    }
    let zdd = Dd::from_f64(z);
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    for k in 0..ctrl.max_terms {
        let kf = k as f64;
        let num = Dd::from_f64(a + kf) * zdd;
        let den = Dd::from_f64(b1 + kf) * Dd::from_f64(b2 + kf) * (kf + 1.0);
        term = term * num / den;
        if term.hi == 0.0 {
            // terminating series (a is a non-positive integer)
            return Ok(sum);
        }
        sum = sum + term;
        // Past the peak the term ratio is below one; stop once small.
        let ratio_bound = ((a + kf + 1.0) * z).abs()
            / ((b1 + kf + 1.0) * (b2 + kf + 1.0) * (kf + 2.0)).abs();
        if ratio_bound < 1.0 && term.abs().hi <= ctrl.rel_tol * sum.abs().hi {
            return Ok(sum);
        }
    }
    Err(NumericsError::SeriesNotConverged {
        function: "hyp1f2",
        terms: ctrl.max_terms,
        last_term: term.to_f64(),
    })
}
