//! Globally adaptive Gauss–Kronrod (G7/K15) quadrature.
//!
//! Every analytic metric in this crate is a one- or two-dimensional integral
//! of sharply peaked densities (the nearest-neighbour law concentrates on an
//! O(1/sqrt(N_s)) window), so the integrator bisects the sub-interval with the
//! largest error estimate until the global estimate meets the tolerance.
//! Two-dimensional integrals are done by nesting: the inner integral is a
//! fallible closure of the outer variable.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::QuadratureError;

/// Positive Kronrod abscissae, outermost first; the last node is the centre.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 4000;

/// Absolute/relative stopping rule: stop when `error <= max(abs, rel * |I|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub const fn new(rel: f64, abs: f64) -> Self {
        Tolerance { rel, abs }
    }
}

/// Tolerance used for probability-valued integrals.
pub const PROBABILITY: Tolerance = Tolerance::new(1e-8, 1e-12);
/// Tolerance used for latency-valued integrals.
pub const LATENCY: Tolerance = Tolerance::new(1e-6, 1e-12);

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F>(f: &mut F, a: f64, b: f64) -> Result<Segment, QuadratureError>
where
    F: FnMut(f64) -> Result<f64, QuadratureError>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64, QuadratureError> {
        let y = f(x)?;
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadratureError::NonFinite(x))
        }
    };

    let fc = eval(centre)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = WGK[7] * fc.abs();
    let mut pairs = [(0.0, 0.0); 7];
    for (j, pair) in pairs.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = eval(centre - dx)?;
        let f2 = eval(centre + dx)?;
        *pair = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (j, (f1, f2)) in pairs.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }

    let value = kronrod * half;
    let resasc = asc * half.abs();
    let resabs = abs_sum * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    let roundoff = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(roundoff);
    }
    Ok(Segment { a, b, value, error })
}

/// Integrate a fallible integrand over the union of `[points[i], points[i+1]]`.
///
/// `points` must be sorted ascending with at least two entries; interior
/// points mark known peaks or kinks and are used as initial subdivisions.
pub fn try_integrate_pts<F>(mut f: F, points: &[f64], tol: Tolerance) -> Result<f64, QuadratureError>
where
    F: FnMut(f64) -> Result<f64, QuadratureError>,
{
    assert!(points.len() >= 2, "need at least one interval");
    let lower = points[0];
    let upper = points[points.len() - 1];
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod15(&mut f, w[0], w[1])?);
        }
    }
    if heap.is_empty() {
        return Ok(0.0);
    }

    loop {
        let (value, error) = totals(&heap);
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(value);
        }
        if heap.len() >= MAX_SEGMENTS {
            return Err(QuadratureError::NoConvergence {
                lower,
                upper,
                estimate: value,
                error,
                subdivisions: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at floating-point resolution; cannot refine further.
            let (value, error) = totals(&heap);
            let (value, error) = (value + worst.value, error + worst.error);
            if error <= 1e3 * (tol.abs.max(tol.rel * value.abs())) {
                return Ok(value);
            }
            return Err(QuadratureError::NoConvergence {
                lower,
                upper,
                estimate: value,
                error,
                subdivisions: heap.len() + 1,
            });
        }
        heap.push(kronrod15(&mut f, worst.a, mid)?);
        heap.push(kronrod15(&mut f, mid, worst.b)?);
    }
}

fn totals(heap: &BinaryHeap<Segment>) -> (f64, f64) {
    let mut sum = crate::stats::NeumaierSum::default();
    let mut err = 0.0;
    for s in heap.iter() {
        sum.add(s.value);
        err += s.error;
    }
    (sum.total(), err)
}

/// Integrate a fallible integrand over `[a, b]`.
pub fn try_integrate<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64, QuadratureError>
where
    F: FnMut(f64) -> Result<f64, QuadratureError>,
{
    if b < a {
        return try_integrate(f, b, a, tol).map(|v| -v);
    }
    try_integrate_pts(f, &[a, b], tol)
}

/// Integrate an infallible integrand over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), a, b, tol)
}

/// Build a sorted break-point list from `[a, b]` plus any interior points.
pub fn breakpoints(a: f64, b: f64, interior: &[f64]) -> Vec<f64> {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = interior.iter().copied().filter(|&p| p > a && p < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(b);
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let k: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((k - 2.0).abs() < 1e-14);
        assert!((g - 2.0).abs() < 1e-14);
    }

    #[test]
    fn polynomials_are_exact() {
        // K15 integrates degree-22 polynomials exactly.
        let v = integrate(|x| x.powi(10) - 3.0 * x.powi(3), -1.0, 2.0, PROBABILITY).unwrap();
        let exact = (2f64.powi(11) + 1.0) / 11.0 - 3.0 * (16.0 - 1.0) / 4.0;
        assert!((v - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn sharp_gaussian_peak() {
        let s = 1e-3;
        let v = try_integrate_pts(
            |x: f64| Ok((-(x - 0.3).powi(2) / (2.0 * s * s)).exp()),
            &breakpoints(0.0, 1.0, &[0.3]),
            PROBABILITY,
        )
        .unwrap();
        let exact = s * (2.0 * std::f64::consts::PI).sqrt();
        assert!((v - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀¹ x^{-1/2} dx = 2
        let v = integrate(|x| if x > 0.0 { x.powf(-0.5) } else { 0.0 }, 0.0, 1.0, LATENCY).unwrap();
        assert!((v - 2.0).abs() < 1e-5);
    }

    #[test]
    fn reversed_bounds_negate() {
        let v = integrate(|x| x, 1.0, 0.0, PROBABILITY).unwrap();
        assert!((v + 0.5).abs() < 1e-14);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let r = integrate(|x| 1.0 / (x - 0.5), 0.0, 1.0, PROBABILITY);
        assert!(r.is_err());
    }
}
