//! Small numeric kernels shared across the crate: logarithmic grids,
//! golden-section extrema, monotone bisection and fixed Gauss-Legendre
//! quadrature.

/// Logarithmically spaced grid with `count` points covering `[lo, hi]`,
/// endpoints included. Requires `0 < lo < hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                (a + step * i as f64).exp()
            }
        })
        .collect()
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimizer of `f` on `[a, b]`. Returns `(argmin, min)`.
/// `f` need not be exactly unimodal; for flat functions any interior point
/// of the plateau is returned.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Golden-section maximizer, see [`golden_min`].
pub fn golden_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, iters: usize) -> (f64, f64) {
    let (x, neg) = golden_min(|t| -f(t), a, b, iters);
    (x, -neg)
}

/// Solves `f(x) = target` for increasing continuous `f` by bracketed
/// bisection, growing the initial bracket `[lo, hi]` geometrically when it
/// does not straddle the target. Relative tolerance on `x`.
///
/// Panics never; returns `None` when a bracket cannot be established within
/// 200 growth steps (caller decides how to report).
pub fn invert_increasing<F: Fn(f64) -> f64>(
    f: F,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
) -> Option<f64> {
    debug_assert!(lo > 0.0 && hi > lo);
    let mut flo = f(lo);
    let mut fhi = f(hi);
    let mut guard = 0;
    while flo > target {
        hi = lo;
        fhi = flo;
        lo *= 0.5;
        flo = f(lo);
        guard += 1;
        if guard > 200 {
            return None;
        }
    }
    while fhi < target {
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        fhi = f(hi);
        guard += 1;
        if guard > 200 {
            return None;
        }
    }
    let _ = (flo, fhi);
    // bisection in log space keeps relative accuracy uniform over decades
    let mut la = lo.ln();
    let mut lb = hi.ln();
    for _ in 0..200 {
        if (lb - la) <= rel_tol {
            break;
        }
        let lm = 0.5 * (la + lb);
        if f(lm.exp()) < target {
            la = lm;
        } else {
            lb = lm;
        }
    }
    Some((0.5 * (la + lb)).exp())
}

/// Solves `g(x) = target` for strictly decreasing `g` with the same bracket
/// growth policy as [`invert_increasing`].
pub fn invert_decreasing<F: Fn(f64) -> f64>(
    g: F,
    target: f64,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Option<f64> {
    invert_increasing(|x| -g(x), -target, lo, hi, rel_tol)
}

/// 16-point Gauss-Legendre nodes on (-1, 1), positive half; weights beside.
const GL16_X: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_7,
    0.755_404_408_355_003_0,
    0.865_631_202_387_831_7,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL16_W: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_54,
    0.149_595_988_816_576_73,
    0.124_628_971_255_533_87,
    0.095_158_511_682_492_79,
    0.062_253_523_938_647_89,
    0.027_152_459_411_754_095,
];

/// Fixed 16-point Gauss-Legendre quadrature of `f` over `[a, b]`.
pub fn gauss16<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for k in 0..8 {
        let dx = half * GL16_X[k];
        acc += GL16_W[k] * (f(mid - dx) + f(mid + dx));
    }
    acc * half
}

/// Deterministic parallel-friendly sum: fixed-size chunks are summed
/// sequentially and the chunk totals are folded in index order, so the
/// result does not depend on the number of worker threads.
pub fn chunked_sum(values: impl Iterator<Item = f64>) -> f64 {
    const CHUNK: usize = 1024;
    let mut totals: Vec<f64> = Vec::new();
    let mut acc = 0.0;
    let mut k = 0;
    for v in values {
        acc += v;
        k += 1;
        if k == CHUNK {
            totals.push(acc);
            acc = 0.0;
            k = 0;
        }
    }
    if k > 0 {
        totals.push(acc);
    }
    totals.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_covers_endpoints() {
        let g = log_grid(1e-3, 1e3, 7);
        assert_eq!(g.len(), 7);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert!((g[6] - 1e3).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn golden_finds_parabola_min() {
        let (x, v) = golden_min(|t| (t - 2.3) * (t - 2.3) + 1.0, 0.0, 10.0, 80);
        // localization saturates at sqrt(eps) for quadratic minima; the
        // value itself is far more accurate
        assert!((x - 2.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invert_increasing_grows_bracket() {
        let x = invert_increasing(|t| t * t * t, 27.0, 0.5, 1.0, 1e-13).unwrap();
        assert!((x - 3.0).abs() < 1e-10);
    }

    #[test]
    fn gauss16_is_exact_on_cubics() {
        let v = gauss16(|x| 4.0 * x * x * x - x + 2.0, -1.0, 3.0);
        // antiderivative x^4 - x^2/2 + 2x
        let exact = (81.0 - 4.5 + 6.0) - (1.0 - 0.5 - 2.0);
        assert!((v - exact).abs() < 1e-12);
    }
}
