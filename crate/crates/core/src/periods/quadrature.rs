//! Gauss-Legendre rules and contour integration of `dx / y` on
//! `y^2 = -prod (x - r)` with `y` continued analytically along the path.

use num_complex::Complex64;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(x), p0 = P_{n-1}(x)
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn y_squared(x: Complex64, roots: &[Complex64]) -> Complex64 {
    -roots.iter().fold(Complex64::new(1.0, 0.0), |acc, r| acc * (x - r))
}

/// The square root of `w` closest to `reference`.
fn branch_near(w: Complex64, reference: Complex64) -> Complex64 {
    let s = w.sqrt();
    if (s * reference.conj()).re >= 0.0 {
        s
    } else {
        -s
    }
}

/// Upper bound on the change of `arg y` along the straight step `z0 -> z1`:
/// half the summed |arg| changes of the linear factors, each of which is
/// monotone along a line.
fn arg_change_bound(z0: Complex64, z1: Complex64, roots: &[Complex64]) -> f64 {
    0.5 * roots.iter().map(|r| ((z1 - r) / (z0 - r)).arg().abs()).sum::<f64>()
}

pub struct ContourIntegral {
    pub value: Complex64,
    /// `y` at the start point after continuation around the whole contour.
    pub y_end: Complex64,
    pub y_start: Complex64,
}

/// Integrate `dx / y` around the closed polygon `corners`, subdividing each
/// edge into pieces of length at most `max_piece` and further so that
/// `arg y` moves by less than pi/4 per piece.
pub fn integrate_closed(
    corners: &[Complex64],
    roots: &[Complex64],
    max_piece: f64,
    nodes: &[f64],
    weights: &[f64],
) -> ContourIntegral {
    let y_start = y_squared(corners[0], roots).sqrt();
    let mut y = y_start;
    let mut total = Complex64::new(0.0, 0.0);
    let k = corners.len();
    for e in 0..k {
        let (a, b) = (corners[e], corners[(e + 1) % k]);
        let pieces = ((b - a).norm() / max_piece).ceil().max(1.0) as usize;
        for p in 0..pieces {
            let z0 = a + (b - a) * (p as f64 / pieces as f64);
            let z1 = a + (b - a) * ((p + 1) as f64 / pieces as f64);
            let (part, y1) = integrate_piece(z0, z1, y, roots, nodes, weights);
            total += part;
            y = y1;
        }
    }
    ContourIntegral {
        value: total,
        y_end: y,
        y_start,
    }
}

fn integrate_piece(
    z0: Complex64,
    z1: Complex64,
    y0: Complex64,
    roots: &[Complex64],
    nodes: &[f64],
    weights: &[f64],
) -> (Complex64, Complex64) {
    if arg_change_bound(z0, z1, roots) >= std::f64::consts::FRAC_PI_4 {
        let mid = (z0 + z1) * 0.5;
        let (s0, ym) = integrate_piece(z0, mid, y0, roots, nodes, weights);
        let (s1, y1) = integrate_piece(mid, z1, ym, roots, nodes, weights);
        return (s0 + s1, y1);
    }
    let half = (z1 - z0) * 0.5;
    let mid = (z0 + z1) * 0.5;
    let mut sum = Complex64::new(0.0, 0.0);
    for (t, w) in nodes.iter().zip(weights) {
        let x = mid + half * *t;
        let yx = branch_near(y_squared(x, roots), y0);
        sum += *w / yx;
    }
    let y1 = branch_near(y_squared(z1, roots), y0);
    (sum * half, y1)
}
