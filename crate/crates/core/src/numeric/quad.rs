//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! integrands over a union of intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

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
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance { abs: 0.0, rel }
    }
}

#[derive(Debug, Clone)]
pub struct QuadOutput {
    pub values: Vec<f64>,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Piece {
    segment: usize,
    a: f64,
    b: f64,
    values: Vec<f64>,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F>(f: &mut F, segment: usize, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> (Vec<f64>, f64)
where
    F: FnMut(usize, f64, &mut [f64]),
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut k15 = vec![0.0; dim];
    let mut g7 = vec![0.0; dim];
    f(segment, centre, buf);
    for i in 0..dim {
        k15[i] += WGK[7] * buf[i];
        g7[i] += WG[3] * buf[i];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        for x in [centre - dx, centre + dx] {
            f(segment, x, buf);
            for i in 0..dim {
                k15[i] += WGK[j] * buf[i];
                if j % 2 == 1 {
                    g7[i] += WG[j / 2] * buf[i];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    for i in 0..dim {
        k15[i] *= half;
        g7[i] *= half;
        err = err.max((k15[i] - g7[i]).abs());
    }
    (k15, err)
}

/// Integrates `f(segment, x, out)` over every `intervals[segment]`, summing
/// all segments. Subintervals with the largest error estimate are bisected
/// until the total error falls below `tol` (relative to the largest component
/// of the result) or `max_pieces` subintervals exist.
pub fn integrate_intervals<F>(
    intervals: &[(f64, f64)],
    dim: usize,
    mut f: F,
    tol: Tolerance,
    max_pieces: usize,
) -> QuadOutput
where
    F: FnMut(usize, f64, &mut [f64]),
{
    let mut buf = vec![0.0; dim];
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for (segment, &(a, b)) in intervals.iter().enumerate() {
        let (values, error) = kronrod(&mut f, segment, a, b, dim, &mut buf);
        evaluations += 15;
        heap.push(Piece { segment, a, b, values, error });
    }
    let total = |heap: &BinaryHeap<Piece>| {
        let mut values = vec![0.0; dim];
        let mut error = 0.0;
        for p in heap.iter() {
            for i in 0..dim {
                values[i] += p.values[i];
            }
            error += p.error;
        }
        (values, error)
    };
    let (mut values, mut error) = total(&heap);
    let mut converged = false;
    loop {
        let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if error <= tol.abs.max(tol.rel * scale) {
            converged = true;
            break;
        }
        if heap.len() >= max_pieces {
            break;
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval cannot be split further in floating point.
            heap.push(worst);
            break;
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (v, e) = kronrod(&mut f, worst.segment, a, b, dim, &mut buf);
            evaluations += 15;
            for i in 0..dim {
                values[i] += v[i];
            }
            error += e;
            heap.push(Piece { segment: worst.segment, a, b, values: v, error: e });
        }
        for i in 0..dim {
            values[i] -= worst.values[i];
        }
        error -= worst.error;
        if heap.len() % 256 == 0 {
            (values, error) = total(&heap);
        }
    }
    let (values, error) = total(&heap);
    QuadOutput { values, error, evaluations, converged }
}

/// Scalar convenience wrapper over a single interval.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> QuadOutput {
    integrate_intervals(&[(a, b)], 1, |_, x, out| out[0] = f(x), tol, 2000)
}
