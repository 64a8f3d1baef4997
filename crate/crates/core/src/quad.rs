//! Numerical integration on `(0, 1)` and on finite intervals.
//!
//! Quantile functions of unbounded laws blow up at both ends of `(0, 1)`, so
//! the unit interval is cut into cells that shrink geometrically toward each
//! endpoint. Each cell gets a composite Gauss-Legendre rule whose panel count
//! doubles until two successive estimates agree. Nodes are interior, so the
//! integrand is never evaluated at 0 or 1.

use std::sync::OnceLock;

const GL_ORDER: usize = 16;
/// Cells reach down to `2^-DEPTH` on each side; `1 - 2^-k` stays representable.
const DEPTH: i32 = 50;
const MAX_DOUBLINGS: u32 = 14;

fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut rule = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        rule
    })
}

fn composite_gl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let half = 0.5 * h;
        let mid = lo + half;
        let mut s = 0.0;
        for &(x, w) in rule {
            s += w * f(mid + half * x);
        }
        total += half * s;
    }
    total
}

/// Integrates a smooth `f` over `[a, b]`, doubling panels until successive
/// estimates differ by at most `abs_tol`.
pub(crate) fn integrate_cell<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> f64 {
    let mut panels = 1;
    let mut prev = composite_gl(f, a, b, panels);
    for _ in 0..MAX_DOUBLINGS {
        panels *= 2;
        let next = composite_gl(f, a, b, panels);
        if (next - prev).abs() <= abs_tol {
            return next;
        }
        prev = next;
    }
    prev
}

/// Cell boundaries on `[0, 1]`, geometric toward both ends, plus `extra` points.
fn unit_cells(extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![0.0, 0.5, 1.0];
    for k in 2..=DEPTH {
        let h = 2f64.powi(-k);
        pts.push(h);
        pts.push(1.0 - h);
    }
    pts.extend(extra.iter().copied().filter(|t| *t > 0.0 && *t < 1.0));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `∫₀¹ f(t) dt` to relative tolerance `rel_tol`. `breaks` are interior points
/// where `f` is not smooth (kinks), used as additional cell boundaries.
pub fn integrate_unit_interval<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rel_tol: f64) -> f64 {
    integrate_unit_interval_floor(f, breaks, rel_tol, 0.0)
}

/// As [`integrate_unit_interval`], but stops refining once the error estimate
/// is below `abs_floor`, which keeps tiny integrals from chasing roundoff.
pub fn integrate_unit_interval_floor<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    rel_tol: f64,
    abs_floor: f64,
) -> f64 {
    // Nodes in the outermost cells can round onto 0 or 1.
    const TOP: f64 = 1.0 - f64::EPSILON / 2.0;
    let f = |t: f64| f(t.clamp(f64::MIN_POSITIVE, TOP));
    let pts = unit_cells(breaks);
    let cells = pts.len() - 1;
    let scale: f64 = pts
        .windows(2)
        .map(|w| composite_gl(&f, w[0], w[1], 1).abs())
        .sum();
    if scale == 0.0 {
        return 0.0;
    }
    let abs_tol = (rel_tol * scale).max(abs_floor) / cells as f64;
    pts.windows(2)
        .map(|w| integrate_cell(&f, w[0], w[1], abs_tol))
        .sum()
}

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) on a finite interval to absolute tolerance.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate_adaptive(f, b, a, abs_tol);
    }
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (value, err) = gk15(f, a, b);
        if err <= tol || depth == 0 || (b - a) <= 1e-15 * a.abs().max(b.abs()).max(1.0) {
            return value;
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, 0.5 * tol, depth - 1) + recurse(f, m, b, 0.5 * tol, depth - 1)
    }
    recurse(&f, a, b, abs_tol, 40)
}
