//! Discretized complex integration contours.
//!
//! Three families cover everything needed downstream: circles around finite
//! pole sets (trapezoid rule — spectrally accurate for analytic periodic
//! integrands), ray pairs at ±π/3 to complex infinity for cubic-exponential
//! integrands (Gauss–Legendre per ray), and vertical lines (Gauss–Legendre).
//!
//! Node weights absorb the `dz/(2πi)` factor, so `integrate` returns the
//! plain weighted sum Σ wᵢ f(zᵢ).

use num_complex::Complex64;
use serde_json::json;
use thiserror::Error;

use crate::quad::gauss_legendre_on;

#[derive(Debug, Error)]
pub enum ContourError {
    #[error("infeasible pole spec: {0}")]
    InfeasiblePoleSpec(String),
    #[error("integrand evaluated to a non-finite value at z = {0}")]
    NonfiniteIntegrand(Complex64),
    #[error("contours too close for a 1/(z-w) integrand: min separation {min_sep:.3e} < {required:.3e}")]
    ContourCollision { min_sep: f64, required: f64 },
    #[error("refinement did not converge: relative delta {delta:.3e} at {nodes} nodes")]
    NoConvergence { delta: f64, nodes: usize },
}

pub type Result<T> = std::result::Result<T, ContourError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayDirection {
    Down,
    Up,
}

#[derive(Debug, Clone, Copy)]
pub enum ContourKind {
    Circle { center: Complex64, radius: f64 },
    Airy { direction: RayDirection, anchor: f64, ray_length: f64 },
    Vertical { abscissa: f64, half_height: f64 },
    /// Disjoint union of simple contours, one winding per component.
    Union { extent: f64 },
}

/// A discretized contour: quadrature nodes plus weights encoding both the
/// rule and the orientation. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Contour {
    pub kind: ContourKind,
    nodes: Vec<(Complex64, Complex64)>,
}

/// Poles a circle must wind around once (`enclosed`) versus not at all
/// (`excluded`).
#[derive(Debug, Clone, Default)]
pub struct PoleSpec {
    pub enclosed: Vec<Complex64>,
    pub excluded: Vec<Complex64>,
}

impl PoleSpec {
    pub fn new(enclosed: &[f64], excluded: &[f64]) -> Self {
        Self {
            enclosed: enclosed.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            excluded: excluded.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    fn centroid(&self) -> Complex64 {
        self.enclosed.iter().sum::<Complex64>() / self.enclosed.len() as f64
    }
}

impl Contour {
    pub fn nodes(&self) -> &[(Complex64, Complex64)] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Same path, opposite orientation.
    pub fn reversed(&self) -> Contour {
        Contour {
            kind: self.kind,
            nodes: self.nodes.iter().map(|&(z, w)| (z, -w)).collect(),
        }
    }

    /// A length scale of the path, used for separation checks.
    pub fn extent(&self) -> f64 {
        match self.kind {
            ContourKind::Circle { radius, .. } => radius,
            ContourKind::Airy { ray_length, .. } => ray_length,
            ContourKind::Vertical { half_height, .. } => half_height,
            ContourKind::Union { extent } => extent,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self.kind {
            ContourKind::Circle { .. } => "circle",
            ContourKind::Airy { direction: RayDirection::Down, .. } => "airy_down",
            ContourKind::Airy { direction: RayDirection::Up, .. } => "airy_up",
            ContourKind::Vertical { .. } => "vertical",
            ContourKind::Union { .. } => "union",
        };
        let geometry = match self.kind {
            ContourKind::Circle { center, radius } => {
                json!({"center": {"re": center.re, "im": center.im}, "radius": radius})
            }
            ContourKind::Airy { anchor, ray_length, .. } => {
                json!({"anchor": anchor, "ray_length": ray_length})
            }
            ContourKind::Vertical { abscissa, half_height } => {
                json!({"abscissa": abscissa, "half_height": half_height})
            }
            ContourKind::Union { extent } => json!({"extent": extent}),
        };
        json!({
            "kind": kind,
            "geometry": geometry,
            "nodes": self.nodes.iter().map(|(z, w)| json!({
                "re": z.re, "im": z.im, "wre": w.re, "wim": w.im,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Counter-clockwise circle, trapezoid nodes offset by half a step so no node
/// sits on the real axis.
pub fn circle(center: Complex64, radius: f64, node_count: usize) -> Contour {
    assert!(radius > 0.0 && node_count >= 4);
    let n = node_count;
    let nodes = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            let dir = Complex64::new(theta.cos(), theta.sin());
            // dz/(2πi) = R e^{iθ} dθ / (2π) with dθ = 2π/n
            (center + radius * dir, radius * dir / n as f64)
        })
        .collect();
    Contour {
        kind: ContourKind::Circle { center, radius },
        nodes,
    }
}

/// Circle around the enclosed poles: centroid-centered, radius the maximal
/// enclosed distance plus a quarter of the gap to the nearest excluded pole.
pub fn make_circle(poles: &PoleSpec, node_count: usize) -> Result<Contour> {
    if poles.enclosed.is_empty() {
        return Err(ContourError::InfeasiblePoleSpec("no enclosed poles".into()));
    }
    let c = poles.centroid();
    let max_dist = poles
        .enclosed
        .iter()
        .map(|p| (p - c).norm())
        .fold(0.0, f64::max);
    let gap = poles
        .excluded
        .iter()
        .map(|e| (e - c).norm())
        .fold(f64::INFINITY, f64::min);
    let gap = if gap.is_finite() { gap } else { 0.1 };
    let radius = max_dist + 0.25 * gap;
    for e in &poles.excluded {
        if (e - c).norm() <= radius {
            return Err(ContourError::InfeasiblePoleSpec(format!(
                "excluded pole {e} inside the candidate circle (center {c}, radius {radius:.4})"
            )));
        }
    }
    if radius <= 0.0 {
        return Err(ContourError::InfeasiblePoleSpec("degenerate radius".into()));
    }
    let contour = circle(c, radius, node_count);
    // Winding self-check for every pole in the spec.
    for (p, want) in poles
        .enclosed
        .iter()
        .map(|p| (p, 1.0))
        .chain(poles.excluded.iter().map(|p| (p, 0.0)))
    {
        let w = winding_number(&contour, *p)?;
        if (w - want).abs() > 1e-6 {
            return Err(ContourError::InfeasiblePoleSpec(format!(
                "winding check failed at {p}: got {w:.3e}, want {want}"
            )));
        }
    }
    Ok(contour)
}

/// Circle enclosing `enclosed` and excluding `excluded`, with center and
/// radius chosen to minimize the maximum of `logmag` along the path. Keeps
/// trapezoid cancellation under control when the integrand carries large
/// exponentials (big lattice size or far tails).
pub fn sized_circle(
    enclosed: &[Complex64],
    excluded: &[Complex64],
    node_count: usize,
    mut logmag: impl FnMut(Complex64) -> f64,
) -> Result<Contour> {
    assert!(!enclosed.is_empty());
    let re_min = enclosed.iter().map(|p| p.re).fold(f64::INFINITY, f64::min);
    let re_max = enclosed.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(f64, Complex64, f64)> = None;
    let n_c = 41;
    let n_r = 25;
    for ic in 0..n_c {
        let c = Complex64::new(
            re_min - 0.55 + (re_max - re_min + 1.1) * ic as f64 / (n_c - 1) as f64,
            0.0,
        );
        // proportional margins keep pole-to-path distances at ≥ 15% of the
        // radius, so 128 trapezoid nodes resolve them to ~e^{-19}
        let r_lo = enclosed
            .iter()
            .map(|p| (p - c).norm())
            .fold(0.0, f64::max)
            .max(1e-4)
            * 1.15
            + 0.01;
        let r_hi = excluded
            .iter()
            .map(|e| ((e - c).norm() - 0.01) / 1.18)
            .fold(r_lo + 1.2, f64::min);
        if r_hi <= r_lo {
            continue;
        }
        for ir in 0..n_r {
            let r = r_lo + (r_hi - r_lo) * ir as f64 / (n_r - 1) as f64;
            let peak = (0..48)
                .map(|k| {
                    let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 48.0;
                    logmag(c + r * Complex64::new(th.cos(), th.sin()))
                })
                .fold(f64::NEG_INFINITY, f64::max);
            if best.map_or(true, |(b, _, _)| peak < b) {
                best = Some((peak, c, r));
            }
        }
    }
    let (_, c, r) = best.ok_or_else(|| {
        ContourError::InfeasiblePoleSpec("no circle separates enclosed from excluded poles".into())
    })?;
    Ok(circle(c, r, node_count))
}

/// Disjoint union of contours; integration sums over the components.
pub fn union(parts: Vec<Contour>) -> Contour {
    let extent = parts.iter().map(|c| c.extent()).fold(0.0, f64::max);
    let nodes = parts.into_iter().flat_map(|c| c.nodes).collect();
    Contour {
        kind: ContourKind::Union { extent },
        nodes,
    }
}

/// Ray pair from `anchor` toward e^{±iπ/3}·∞ (down) or its left mirror (up),
/// truncated at `ray_length`, Gauss–Legendre nodes per ray.
pub fn make_airy(
    direction: RayDirection,
    anchor: f64,
    ray_length: f64,
    nodes_per_ray: usize,
) -> Contour {
    assert!(ray_length > 0.0);
    let third = std::f64::consts::FRAC_PI_3;
    let (e_in, e_out) = match direction {
        // from e^{iπ/3}∞ down to the anchor, out to e^{-iπ/3}∞
        RayDirection::Down => (Complex64::cis(third), Complex64::cis(-third)),
        // from e^{-2iπ/3}∞ up to the anchor, out to e^{2iπ/3}∞
        RayDirection::Up => (Complex64::cis(-2.0 * third), Complex64::cis(2.0 * third)),
    };
    let a = Complex64::new(anchor, 0.0);
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let mut nodes = Vec::with_capacity(2 * nodes_per_ray);
    // incoming ray traversed from t = L to 0: dz = -e_in dt
    for &(t, w) in &gauss_legendre_on(nodes_per_ray, 0.0, ray_length) {
        nodes.push((a + t * e_in, -w * e_in / two_pi_i));
    }
    // outgoing ray from t = 0 to L
    for &(t, w) in &gauss_legendre_on(nodes_per_ray, 0.0, ray_length) {
        nodes.push((a + t * e_out, w * e_out / two_pi_i));
    }
    Contour {
        kind: ContourKind::Airy { direction, anchor, ray_length },
        nodes,
    }
}

/// Vertical segment Re z = `abscissa`, |Im z| ≤ `half_height`, oriented with
/// increasing imaginary part.
pub fn make_vertical(abscissa: f64, half_height: f64, node_count: usize) -> Contour {
    assert!(half_height > 0.0);
    let nodes = gauss_legendre_on(node_count, -half_height, half_height)
        .into_iter()
        // dz/(2πi) = i dt/(2πi) = dt/(2π)
        .map(|(t, w)| {
            (
                Complex64::new(abscissa, t),
                Complex64::new(w / (2.0 * std::f64::consts::PI), 0.0),
            )
        })
        .collect();
    Contour {
        kind: ContourKind::Vertical { abscissa, half_height },
        nodes,
    }
}

/// ∮ f(z) dz/(2πi) over the contour's node rule.
pub fn integrate(mut f: impl FnMut(Complex64) -> Complex64, c: &Contour) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for &(z, w) in &c.nodes {
        let v = f(z);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(ContourError::NonfiniteIntegrand(z));
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Tensor-product double contour integral ∮∮ f(z, w) dz dw/(2πi)².
///
/// `singular` declares a 1/(z-w) factor; the contours must then keep a
/// relative separation of at least 5% of the geometric scale.
pub fn integrate2(
    mut f: impl FnMut(Complex64, Complex64) -> Complex64,
    cz: &Contour,
    cw: &Contour,
    singular: bool,
) -> Result<Complex64> {
    if singular {
        let required = 0.05 * cz.extent().max(cw.extent());
        let mut min_sep = f64::INFINITY;
        for &(z, _) in &cz.nodes {
            for &(w, _) in &cw.nodes {
                min_sep = min_sep.min((z - w).norm());
            }
        }
        if min_sep < required {
            return Err(ContourError::ContourCollision { min_sep, required });
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for &(z, wz) in &cz.nodes {
        let mut inner = Complex64::new(0.0, 0.0);
        for &(w, ww) in &cw.nodes {
            let v = f(z, w);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(ContourError::NonfiniteIntegrand(z));
            }
            inner += ww * v;
        }
        acc += wz * inner;
    }
    Ok(acc)
}

/// Doubles the node count until two successive values agree to `rel_tol`
/// (capped at 2¹³ nodes). Returns the final value and the last delta.
pub fn refine_until(
    mut eval: impl FnMut(usize) -> Result<Complex64>,
    start_nodes: usize,
    rel_tol: f64,
) -> Result<(Complex64, f64)> {
    assert!(rel_tol > 0.0, "rel_tol must be positive");
    let mut n = start_nodes.max(8);
    let mut prev = eval(n)?;
    while n <= 1 << 12 {
        n *= 2;
        let cur = eval(n)?;
        let delta = (cur - prev).norm() / cur.norm().max(1e-300);
        if delta < rel_tol {
            return Ok((cur, delta));
        }
        prev = cur;
    }
    Err(ContourError::NoConvergence {
        delta: f64::NAN,
        nodes: n,
    })
}

/// Numeric winding number of the contour around `p` via ∮ dz/(z-p)/(2πi).
pub fn winding_number(c: &Contour, p: Complex64) -> Result<f64> {
    integrate(|z| 1.0 / (z - p), c).map(|v| v.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Ai(x) for small |x| by the standard power series around 0.
    /// Independent of any contour machinery.
    fn airy_ai_series(x: f64) -> f64 {
        let c1 = 0.355028053887817239; // Ai(0) = 3^(-2/3)/Γ(2/3)
        let c2 = -0.258819403792806798; // Ai'(0) = -3^(-1/3)/Γ(1/3)
        let (mut f, mut g) = (1.0, 1.0);
        let (mut sum_f, mut sum_g) = (f, g);
        for k in 1..40 {
            let k3 = 3.0 * k as f64;
            f *= x * x * x / (k3 * (k3 - 1.0));
            g *= x * x * x / (k3 * (k3 + 1.0));
            sum_f += f;
            sum_g += g;
        }
        c1 * sum_f + c2 * x * sum_g
    }

    #[test]
    fn circle_nodes_on_radius_and_unit_residue() {
        let poles = PoleSpec::new(&[0.5], &[0.1]);
        let c = make_circle(&poles, 64).unwrap();
        if let ContourKind::Circle { center, radius } = c.kind {
            assert!(radius < 0.4);
            assert_abs_diff_eq!(center.re, 0.5, epsilon = 1e-14);
            for &(z, _) in c.nodes() {
                assert_abs_diff_eq!((z - center).norm(), radius, epsilon = 1e-13);
            }
        } else {
            panic!("expected circle");
        }
        let res = integrate(|z| 1.0 / (z - c64(0.5, 0.0)), &c).unwrap();
        assert_abs_diff_eq!(res.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(res.im, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(winding_number(&c, c64(0.1, 0.0)).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn circle_around_two_poles() {
        let poles = PoleSpec::new(&[0.5, 0.1], &[-0.1]);
        let c = make_circle(&poles, 128).unwrap();
        assert_abs_diff_eq!(winding_number(&c, c64(0.5, 0.0)).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(winding_number(&c, c64(0.1, 0.0)).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(winding_number(&c, c64(-0.1, 0.0)).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn coincident_enclosed_and_excluded_is_infeasible() {
        let poles = PoleSpec::new(&[0.5], &[0.5]);
        assert!(matches!(
            make_circle(&poles, 64),
            Err(ContourError::InfeasiblePoleSpec(_))
        ));
    }

    #[test]
    fn closed_contour_of_entire_function_vanishes() {
        let c = make_circle(&PoleSpec::new(&[0.0], &[]), 64).unwrap();
        let v = integrate(|_| c64(1.0, 0.0), &c).unwrap();
        assert_abs_diff_eq!(v.norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn residue_with_phi_like_factor_matches_hand_residue() {
        // f(z) = e^{-z} ((1/2+z)/(1/2-z))^2 / (z-1/2) has a third-order pole
        // at 1/2. Res = lim d²/dz² [e^{-z}(1/2+z)²·(-1)]/2! ... computed by
        // hand: Res_{z=1/2} = -e^{-1/2}(1/2 - 2·2·(1/2+z)→... ) — frozen:
        // g(z) = -e^{-z}(1/2+z)², Res = g''(1/2)/2 = -e^{-1/2}(1 - 4 + 1/2)·…
        // g'' = -e^{-z}[(1/2+z)² - 4(1/2+z) + 2], at z=1/2: -e^{-1/2}[1-4+2] = e^{-1/2}.
        // Res = e^{-1/2}/2.
        let expected = 0.5 * (-0.5_f64).exp();
        let c = make_circle(&PoleSpec::new(&[0.5], &[-0.5]), 256).unwrap();
        let v = integrate(
            |z| (-z).exp() * ((0.5 + z) / (0.5 - z)).powi(2) / (z - 0.5),
            &c,
        )
        .unwrap();
        // ((1/2+z)/(1/2-z))²/(z-1/2) = -(1/2+z)²/(z-1/2)³
        assert_abs_diff_eq!(v.re, -expected, epsilon = 1e-10);
    }

    #[test]
    fn airy_contour_reproduces_ai_of_one() {
        // ∮ e^{ζ³/3 - ζ} dζ/(2πi) over the down contour = -Ai(1): the down
        // orientation reverses the classical Airy contour.
        let want = -airy_ai_series(1.0);
        let c = make_airy(RayDirection::Down, 0.0, 10.0, 40);
        let v = integrate(|z| (z * z * z / 3.0 - z).exp(), &c).unwrap();
        assert_abs_diff_eq!(v.re, want, epsilon = 1e-10);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(want, -0.135292416312881, epsilon = 1e-10);
    }

    #[test]
    fn airy_up_mirror_flips_sign() {
        let down = make_airy(RayDirection::Down, 0.0, 10.0, 40);
        let up = make_airy(RayDirection::Up, 0.0, 10.0, 40);
        let f = |z: Complex64| (z * z * z / 3.0 - z).exp();
        let a = integrate(|z| f(-z), &up).unwrap();
        let b = integrate(f, &down).unwrap();
        // substituting z -> -z maps the down contour onto the reversed up contour
        assert_abs_diff_eq!((a + b).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn ray_truncation_tail_is_negligible() {
        let f = |z: Complex64| (z * z * z / 3.0 - z).exp();
        let short = integrate(f, &make_airy(RayDirection::Down, 0.0, 10.0, 80)).unwrap();
        let long = integrate(f, &make_airy(RayDirection::Down, 0.0, 20.0, 160)).unwrap();
        assert!((short - long).norm() < 1e-12);
    }

    #[test]
    fn reversal_negates_integrals_exactly() {
        let c = make_circle(&PoleSpec::new(&[0.3], &[]), 64).unwrap();
        let r = c.reversed();
        let f = |z: Complex64| z.exp() / (z - 0.3);
        let a = integrate(f, &c).unwrap();
        let b = integrate(f, &r).unwrap();
        assert_eq!(a, -b);
    }

    #[test]
    fn double_integral_product_of_residues() {
        let cz = make_circle(&PoleSpec::new(&[0.2], &[]), 64).unwrap();
        let cw = make_circle(&PoleSpec::new(&[3.0], &[]), 64).unwrap();
        let v = integrate2(
            |z, w| 1.0 / ((z - 0.2) * (w - 3.0)),
            &cz,
            &cw,
            false,
        )
        .unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn double_integral_iterated_residue_of_cauchy_factor() {
        // w-circle strictly inside the z-circle. Iterated residues: for the
        // geometric expansion 1/(z-w) = Σ w^k/z^{k+1}, only k=0 survives the
        // z-integral and the plain w-integral then kills it, so the bare
        // Cauchy factor integrates to 0; with the extra 1/w the k=0 term
        // pairs residues at w=0 and z=0 and gives exactly 1.
        let cz = circle(c64(0.0, 0.0), 1.0, 96);
        let cw = circle(c64(0.0, 0.0), 0.4, 96);
        let bare = integrate2(|z, w| 1.0 / (z - w), &cz, &cw, true).unwrap();
        assert_abs_diff_eq!(bare.norm(), 0.0, epsilon = 1e-12);
        let paired = integrate2(|z, w| 1.0 / (w * (z - w)), &cz, &cw, true).unwrap();
        assert_abs_diff_eq!(paired.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(paired.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn double_integral_antisymmetric_swap_flips_sign() {
        let cz = circle(c64(0.0, 0.0), 1.0, 64);
        let cw = circle(c64(0.0, 0.0), 0.4, 64);
        let f = |z: Complex64, w: Complex64| (z * z - w * w) / ((z - 0.1) * (w - 0.1));
        let a = integrate2(f, &cz, &cw, false).unwrap();
        let b = integrate2(|z, w| f(w, z), &cw, &cz, false).unwrap();
        assert_abs_diff_eq!((a + b).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn collision_is_detected_for_singular_integrands() {
        let cz = circle(c64(0.0, 0.0), 1.0, 32);
        let cw = circle(c64(0.0, 0.0), 0.99, 32);
        assert!(matches!(
            integrate2(|z, w| 1.0 / (z - w), &cz, &cw, true),
            Err(ContourError::ContourCollision { .. })
        ));
    }

    #[test]
    fn nonfinite_integrand_is_an_error() {
        let c = circle(c64(0.0, 0.0), 1.0, 16);
        assert!(matches!(
            integrate(|z| 1.0 / (z - z), &c),
            Err(ContourError::NonfiniteIntegrand(_))
        ));
    }

    #[test]
    fn refine_until_converges_on_smooth_residue() {
        let eval = |n: usize| {
            let c = circle(c64(0.5, 0.0), 0.3, n);
            integrate(|z| z.exp() / (z - 0.5), &c)
        };
        let (v, delta) = refine_until(eval, 8, 1e-10).unwrap();
        assert!(delta < 1e-10);
        assert_abs_diff_eq!(v.re, (0.5_f64).exp(), epsilon = 1e-10);
        // already-converged case stays put under further refinement
        let (v2, _) = refine_until(eval, 128, 1e-10).unwrap();
        assert_abs_diff_eq!(v.re, v2.re, epsilon = 1e-12);
    }

    #[test]
    fn refine_until_zero_tolerance_never_converges() {
        let eval = |n: usize| {
            let c = circle(c64(0.5, 0.0), 0.3, n);
            integrate(|z| z.exp() / (z - 0.5), &c)
        };
        assert!(matches!(
            refine_until(eval, 8, 1e-300),
            Err(ContourError::NoConvergence { .. })
        ));
    }

    #[test]
    fn sized_circle_respects_constraints() {
        // heavy exponential: the optimizer should hug the low-magnitude region
        let enclosed = [c64(0.5, 0.0)];
        let excluded = [c64(0.05, 0.0), c64(-0.05, 0.0)];
        let x = 180.0;
        let c = sized_circle(&enclosed, &excluded, 512, |z| {
            (-x * z).re + 19.0 * ((0.5 + z) / (0.5 - z)).norm().ln()
        })
        .unwrap();
        assert_abs_diff_eq!(winding_number(&c, enclosed[0]).unwrap(), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(winding_number(&c, excluded[0]).unwrap(), 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(winding_number(&c, excluded[1]).unwrap(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn vertical_line_gaussian_integral() {
        // (1/2πi)∫ e^{z²} dz over Re z = 0 upward = (1/2π)∫ e^{-t²} dt = 1/(2√π)
        let c = make_vertical(0.0, 8.0, 96);
        let v = integrate(|z| (z * z).exp(), &c).unwrap();
        assert_abs_diff_eq!(v.re, 0.5 / std::f64::consts::PI.sqrt(), epsilon = 1e-12);
    }
}
