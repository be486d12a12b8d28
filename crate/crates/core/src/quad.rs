//! Gauss–Legendre nodes and weights.
//!
//! Nodes are roots of the Legendre polynomial P_n, found by Newton iteration
//! from the Chebyshev-like initial guess; weights are 2/((1-x²)P_n'(x)²).
//! Accurate to machine precision for the orders used here (n ≤ a few thousand).

/// Legendre polynomial value and derivative at `x` via the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule of order `n` on [-1, 1], returned as (node, weight) pairs
/// sorted by increasing node.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "quadrature order must be positive");
    if n == 1 {
        return vec![(0.0, 2.0)];
    }
    let mut rule = Vec::with_capacity(n);
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_pair(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    // Mirror the positive half; drop the duplicated zero for odd n.
    let mut full: Vec<(f64, f64)> = rule.iter().map(|&(x, w)| (-x, w)).collect();
    if n % 2 == 1 {
        full.pop();
        full.push((0.0, rule.last().unwrap().1));
    }
    let mut pos: Vec<(f64, f64)> = rule.into_iter().map(|(x, w)| (x, w)).collect();
    pos.reverse();
    full.extend(pos.into_iter().filter(|&(x, _)| x > 0.0));
    full.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    full
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre(n)
        .into_iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Composite rule: `panels` equal panels on [a, b], each carrying an
/// `n`-point Gauss–Legendre rule.
pub fn gauss_legendre_panels(n: usize, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    assert!(panels >= 1);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(n * panels);
    for p in 0..panels {
        out.extend(gauss_legendre_on(n, a + p as f64 * h, a + (p + 1) as f64 * h));
    }
    out
}
