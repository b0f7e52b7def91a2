//! Vector-valued adaptive Gauss–Kronrod (10/21) integration.
//!
//! Several integrands that share the same expensive factors are integrated
//! over one common partition. Each bisection is driven by the component
//! whose error is largest relative to its own magnitude.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Requested accuracy for every component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    /// Error a component may carry given its value and L1 norm.
    ///
    /// The L1 floor keeps strongly cancelling oscillatory integrals from
    /// chasing accuracy below the rounding level of their own terms.
    pub fn allowed(&self, value: f64, l1: f64) -> f64 {
        self.abs.max(self.rel * value.abs()).max(50.0 * f64::EPSILON * l1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub l1: [f64; N],
    pub subdivisions: usize,
    pub intervals: usize,
    pub converged: bool,
}

impl<const N: usize> Estimate<N> {
    /// Component with the largest error relative to its tolerance.
    pub fn worst_component(&self, tol: Tolerance) -> usize {
        (0..N)
            .max_by(|&i, &j| {
                let ri = self.error[i] / tol.allowed(self.value[i], self.l1[i]);
                let rj = self.error[j] / tol.allowed(self.value[j], self.l1[j]);
                ri.total_cmp(&rj)
            })
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    l1: [f64; N],
    priority: f64,
}

impl<const N: usize> PartialEq for Segment<N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<const N: usize> Eq for Segment<N> {}

impl<const N: usize> PartialOrd for Segment<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<const N: usize> Ord for Segment<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
fn kronrod21<const N: usize, F>(f: &F, a: f64, b: f64) -> ([f64; N], [f64; N], [f64; N])
where
    F: Fn(f64) -> [f64; N],
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let mut fv1 = [[0.0; N]; 10];
    let mut fv2 = [[0.0; N]; 10];
    let fc = f(centre);

    let mut resk = [0.0; N];
    let mut resg = [0.0; N];
    let mut resabs = [0.0; N];
    for c in 0..N {
        resk[c] = WGK[10] * fc[c];
        resabs[c] = WGK[10] * fc[c].abs();
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let lo = f(centre - dx);
        let hi = f(centre + dx);
        for c in 0..N {
            let sum = lo[c] + hi[c];
            resk[c] += WGK[j] * sum;
            resabs[c] += WGK[j] * (lo[c].abs() + hi[c].abs());
            if j % 2 == 1 {
                resg[c] += WG[j / 2] * sum;
            }
        }
        fv1[j] = lo;
        fv2[j] = hi;
    }

    let mut err = [0.0; N];
    for c in 0..N {
        let mean = 0.5 * resk[c];
        let mut resasc = WGK[10] * (fc[c] - mean).abs();
        for j in 0..10 {
            resasc += WGK[j] * ((fv1[j][c] - mean).abs() + (fv2[j][c] - mean).abs());
        }
        let resasc = resasc * half.abs();
        let abs = resabs[c] * half.abs();
        let mut e = ((resk[c] - resg[c]) * half).abs();
        if resasc != 0.0 && e != 0.0 {
            e = resasc * (200.0 * e / resasc).powf(1.5).min(1.0);
        }
        if abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            e = e.max(50.0 * f64::EPSILON * abs);
        }
        resk[c] *= half;
        resabs[c] = abs;
        err[c] = e;
    }
    (resk, err, resabs)
}

fn priority<const N: usize>(error: &[f64; N], scale: &[f64; N]) -> f64 {
    error
        .iter()
        .zip(scale)
        .map(|(e, s)| e / s)
        .fold(0.0, f64::max)
}

/// Integrates `f` over the partition given by the sorted `points`.
///
/// `max_subdivisions` bounds the number of bisections performed after the
/// initial partition. The returned estimate carries `converged = false`
/// when that budget runs out.
pub fn integrate<const N: usize, F>(
    f: F,
    points: &[f64],
    tol: Tolerance,
    max_subdivisions: usize,
) -> Estimate<N>
where
    F: Fn(f64) -> [f64; N],
{
    let mut segments: Vec<Segment<N>> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (value, error, l1) = kronrod21(&f, w[0], w[1]);
            Segment {
                a: w[0],
                b: w[1],
                value,
                error,
                l1,
                priority: 0.0,
            }
        })
        .collect();

    let mut total = [0.0; N];
    let mut total_err = [0.0; N];
    let mut total_l1 = [0.0; N];
    for s in &segments {
        for c in 0..N {
            total[c] += s.value[c];
            total_err[c] += s.error[c];
            total_l1[c] += s.l1[c];
        }
    }
    let scale = total_l1.map(|v| v.max(f64::MIN_POSITIVE));
    for s in &mut segments {
        s.priority = priority(&s.error, &scale);
    }
    let mut heap: BinaryHeap<Segment<N>> = segments.into();

    let done = |value: &[f64; N], err: &[f64; N], l1: &[f64; N]| {
        (0..N).all(|c| err[c] <= tol.allowed(value[c], l1[c]))
    };

    let mut subdivisions = 0;
    let mut converged = done(&total, &total_err, &total_l1);
    while !converged && subdivisions < max_subdivisions {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || worst.priority == 0.0 {
            // Cannot be refined further; keep it and stop.
            heap.push(Segment {
                priority: f64::NEG_INFINITY,
                ..worst
            });
            break;
        }
        subdivisions += 1;
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error, l1) = kronrod21(&f, a, b);
            for c in 0..N {
                total[c] += value[c];
                total_err[c] += error[c];
                total_l1[c] += l1[c];
            }
            heap.push(Segment {
                a,
                b,
                value,
                error,
                l1,
                priority: priority(&error, &scale),
            });
        }
        for c in 0..N {
            total[c] -= worst.value[c];
            total_err[c] -= worst.error[c];
            total_l1[c] -= worst.l1[c];
        }
        converged = done(&total, &total_err, &total_l1);
    }

    // Resum in order of position so the result does not depend on the
    // history of running updates.
    let mut parts = heap.into_vec();
    parts.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let mut l1 = [0.0; N];
    for s in &parts {
        for c in 0..N {
            value[c] += s.value[c];
            error[c] += s.error[c];
            l1[c] += s.l1[c];
        }
    }
    Estimate {
        value,
        error,
        l1,
        subdivisions,
        intervals: parts.len(),
        converged: done(&value, &error, &l1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const TOL: Tolerance = Tolerance {
        rel: 1e-12,
        abs: 1e-14,
    };

    #[test]
    fn polynomial_is_exact_on_one_panel() {
        let est = integrate(|x| [x.powi(5) - 3.0 * x * x], &[0.0, 2.0], TOL, 0);
        assert_relative_eq!(est.value[0], 64.0 / 6.0 - 8.0, epsilon = 1e-14);
        assert!(est.converged);
    }

    #[test]
    fn vector_components_share_partition() {
        let est = integrate(
            |x: f64| [x.sin(), x.cos(), (-x).exp()],
            &[0.0, std::f64::consts::PI],
            TOL,
            200,
        );
        assert_relative_eq!(est.value[0], 2.0, epsilon = 1e-13);
        assert!(est.value[1].abs() < 1e-13);
        assert_relative_eq!(
            est.value[2],
            1.0 - (-std::f64::consts::PI).exp(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn sharp_peak_needs_refinement() {
        let w = 1e-3;
        let est = integrate(
            |x: f64| [w / ((x - 0.3).powi(2) + w * w)],
            &[0.0, 1.0],
            TOL,
            500,
        );
        let exact = (0.7 / w).atan() + (0.3 / w).atan();
        assert!(est.converged);
        assert!(est.subdivisions > 0);
        assert_relative_eq!(est.value[0], exact, max_relative = 1e-11);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let est = integrate(|x: f64| [x.sqrt().recip()], &[0.0, 1.0], TOL, 3);
        assert!(!est.converged);
        assert_eq!(est.subdivisions, 3);
    }

    #[test]
    fn degenerate_partition_is_zero() {
        let est = integrate(|x: f64| [x], &[1.0, 1.0], TOL, 10);
        assert_eq!(est.value[0], 0.0);
        assert_eq!(est.intervals, 0);
    }
}
