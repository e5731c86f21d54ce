use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::NumericsError;

// Kronrod abscissae on [-1, 1]; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_958_109_831,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_subdivisions: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<F>(f: &mut F, lo: f64, hi: f64) -> Result<Panel, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    let eval = |f: &mut F, x: f64| -> Result<f64, NumericsError> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericsError::NonFinite { x, value: v })
        }
    };
    let fc = eval(f, centre)?;
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut abs_sum = WGK[10] * fc.abs();
    for i in 0..10 {
        let dx = half * XGK[i];
        let f1 = eval(f, centre - dx)?;
        let f2 = eval(f, centre + dx)?;
        fv1[i] = f1;
        fv2[i] = f2;
        kronrod += WGK[i] * (f1 + f2);
        abs_sum += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for i in 0..10 {
        asc += WGK[i] * ((fv1[i] - mean).abs() + (fv2[i] - mean).abs());
    }
    let value = kronrod * half;
    let abs_value = abs_sum * half.abs();
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_value > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_value);
    }
    Ok(Panel {
        lo,
        hi,
        value,
        error,
        abs_value,
    })
}

/// Single 21-point Gauss-Kronrod panel on `[lo, hi]` with the usual
/// Kronrod-minus-Gauss error estimate.
pub fn gauss_kronrod_21<F>(mut f: F, lo: f64, hi: f64) -> Result<QuadResult, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    let p = kronrod_panel(&mut f, lo, hi)?;
    Ok(QuadResult {
        value: p.value,
        abs_error: p.error,
        evaluations: 21,
    })
}

/// Adaptive integral of `f` over `[lo, hi]` to relative accuracy `rel_tol`.
pub fn integrate_adaptive<F>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<QuadResult, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    integrate_adaptive_with(
        f,
        lo,
        hi,
        QuadControl {
            rel_tol,
            ..QuadControl::default()
        },
    )
}

/// Globally adaptive Gauss-Kronrod quadrature: the panel with the largest
/// error estimate is bisected until the summed estimate meets
/// `max(abs_tol, rel_tol |I|)`.
///
/// `hi = +inf` is mapped onto `[0, 1)` by `u = lo + t/(1-t)`. A reversed
/// interval returns the negated integral.
pub fn integrate_adaptive_with<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    ctrl: QuadControl,
) -> Result<QuadResult, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    if lo.is_nan() || hi.is_nan() || lo == f64::NEG_INFINITY || (hi == f64::INFINITY && lo == hi) {
        return Err(NumericsError::Domain {
            function: "integrate_adaptive",
            x: lo,
            domain: "finite lower limit",
        });
    }
    if lo == hi {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    if hi == f64::INFINITY {
        let mapped = move |t: f64| {
            let s = 1.0 - t;
            f(lo + t / s) / (s * s)
        };
        return adaptive_finite(mapped, 0.0, 1.0, ctrl);
    }
    if hi < lo {
        let r = integrate_adaptive_with(f, hi, lo, ctrl)?;
        return Ok(QuadResult {
            value: -r.value,
            ..r
        });
    }
    adaptive_finite(f, lo, hi, ctrl)
}

fn adaptive_finite<F>(mut f: F, lo: f64, hi: f64, ctrl: QuadControl) -> Result<QuadResult, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    let first = kronrod_panel(&mut f, lo, hi)?;
    let mut evaluations = 21;
    let mut value = first.value;
    let mut error = first.error;
    let mut abs_value = first.abs_value;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 0;
    loop {
        let target = ctrl.abs_tol.max(ctrl.rel_tol * value.abs());
        // roundoff floor: no panel split can resolve below this
        let floor = 50.0 * f64::EPSILON * abs_value;
        if error <= target || error <= floor {
            return Ok(QuadResult {
                value,
                abs_error: error,
                evaluations,
            });
        }
        if subdivisions >= ctrl.max_subdivisions {
            return Err(NumericsError::QuadratureTolerance {
                lo,
                hi,
                estimate: value,
                abs_error: error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // interval exhausted at machine resolution
            heap.push(worst);
            return Err(NumericsError::QuadratureTolerance {
                lo,
                hi,
                estimate: value,
                abs_error: error,
                subdivisions,
            });
        }
        let left = kronrod_panel(&mut f, worst.lo, mid)?;
        let right = kronrod_panel(&mut f, mid, worst.hi)?;
        evaluations += 42;
        subdivisions += 1;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        abs_value += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
        // running sums drift; resum now and then
        if subdivisions % 64 == 0 {
            value = heap.iter().map(|p| p.value).sum();
            error = heap.iter().map(|p| p.error).sum();
            abs_value = heap.iter().map(|p| p.abs_value).sum();
        }
    }
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums. Returns
/// the last entry of the highest even column, which for alternating
/// sequences is usually far closer to the limit than the last partial sum.
pub fn wynn_epsilon(partial_sums: &[f64]) -> Result<f64, NumericsError> {
    let n = partial_sums.len();
    if n == 0 {
        return Err(NumericsError::Acceleration {
            detail: "empty sequence".to_string(),
        });
    }
    if n < 3 {
        return Ok(partial_sums[n - 1]);
    }
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut curr: Vec<f64> = partial_sums.to_vec();
    let mut best = partial_sums[n - 1];
    for k in 1..n {
        let len = n - k;
        let mut next = Vec::with_capacity(len);
        for i in 0..len {
            let diff = curr[i + 1] - curr[i];
            if diff == 0.0 {
                // sequence already converged at this column
                return Ok(if k % 2 == 1 { curr[i + 1] } else { best });
            }
            next.push(prev[i + 1] + 1.0 / diff);
        }
        prev = curr;
        curr = next;
        if k % 2 == 0 {
            let candidate = curr[len - 1];
            if !candidate.is_finite() {
                break;
            }
            best = candidate;
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(NumericsError::Acceleration {
            detail: format!("non-finite extrapolation from {n} terms"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::bessel::{bessel_j0, bessel_j0_zero};
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn linear() {
        let r = integrate_adaptive(|x| x, 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gaussian_half_line() {
        let r = integrate_adaptive(|x| (-x * x).exp(), 0.0, f64::INFINITY, 1e-12).unwrap();
        assert!((r.value - PI.sqrt() / 2.0).abs() < 1e-12);
        assert!(r.abs_error <= 1e-12 * r.value);
    }

    #[test]
    fn reversed_interval_negates() {
        let f = |x: f64| x.sin() * x.exp();
        let a = integrate_adaptive(f, 0.3, 2.7, 1e-12).unwrap();
        let b = integrate_adaptive(f, 2.7, 0.3, 1e-12).unwrap();
        assert_eq!(a.value, -b.value);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let ctrl = QuadControl {
            rel_tol: 1e-14,
            abs_tol: 0.0,
            max_subdivisions: 3,
        };
        assert!(matches!(
            integrate_adaptive_with(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, ctrl),
            Err(NumericsError::QuadratureTolerance { .. })
        ));
    }

    #[test]
    fn non_finite_integrand() {
        assert!(matches!(
            integrate_adaptive(|x: f64| 1.0 / (x - 0.5), 0.0, 1.0, 1e-8),
            Err(NumericsError::NonFinite { .. })
        ));
    }

    #[test]
    fn wynn_accelerates_alternating_log2() {
        let mut sums = Vec::new();
        let mut s = 0.0;
        for k in 1..=15 {
            s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            sums.push(s);
        }
        let est = wynn_epsilon(&sums).unwrap();
        assert!((est - 2f64.ln()).abs() < 1e-10);
        assert!((sums[14] - 2f64.ln()).abs() > 1e-2);
    }

    /// ∫₁^∞ J0(2u) u^{-4} du by summing lobes between Bessel zeros and
    /// accelerating the alternating tail.
    fn partitioned_oracle() -> f64 {
        let f = |u: f64| bessel_j0(2.0 * u) / u.powi(4);
        let mut points = vec![1.0];
        for k in 2..=40 {
            points.push(bessel_j0_zero(k).unwrap() / 2.0);
        }
        let mut sums = Vec::new();
        let mut total = 0.0;
        for w in points.windows(2) {
            total += integrate_adaptive(f, w[0], w[1], 1e-14).unwrap().value;
            sums.push(total);
        }
        wynn_epsilon(&sums[10..]).unwrap()
    }

    #[test]
    fn bessel_weighted_tail() {
        let oracle = partitioned_oracle();
        let ctrl = QuadControl {
            rel_tol: 1e-11,
            abs_tol: 0.0,
            max_subdivisions: 20_000,
        };
        let r = integrate_adaptive_with(|u| bessel_j0(2.0 * u) / u.powi(4), 1.0, f64::INFINITY, ctrl).unwrap();
        assert!((r.value - oracle).abs() < 1e-10 * oracle.abs(), "{} vs {oracle}", r.value);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn polynomials_are_exact(c in proptest::collection::vec(-3.0f64..3.0, 1..8), a in -2.0f64..0.0, b in 0.1f64..2.0) {
                let f = |x: f64| c.iter().rev().fold(0.0, |acc, ci| acc * x + ci);
                let prim = |x: f64| c.iter().enumerate().map(|(k, ci)| ci * x.powi(k as i32 + 1) / (k as f64 + 1.0)).sum::<f64>();
                let exact = prim(b) - prim(a);
                let r = integrate_adaptive_with(f, a, b, QuadControl { rel_tol: 1e-12, abs_tol: 1e-13, max_subdivisions: 100 }).unwrap();
                prop_assert!((r.value - exact).abs() < 1e-11 * exact.abs().max(1.0));
            }

            #[test]
            fn reversal_antisymmetry(a in -3.0f64..3.0, w in 0.1f64..4.0, k in 0.5f64..5.0) {
                let f = |x: f64| (k * x).cos() + x * x;
                let fwd = integrate_adaptive(f, a, a + w, 1e-10).unwrap().value;
                let rev = integrate_adaptive(f, a + w, a, 1e-10).unwrap().value;
                prop_assert_eq!(fwd, -rev);
            }
        }
    }
}
