//! Scalar building-block functions entering the distribution formulas.
//!
//! Finite-size family: Φ, f±, the g-functions, eᵅ, jᵅ and the ε kernel
//! additions. Asymptotic family: the cubic-exponential analogues on Airy
//! ray contours, plus the shifted-Airy-kernel ingredients used for the
//! stationary full-space limit law.
//!
//! All contour-defined functions are real; evaluation checks the residual
//! imaginary part against 1e-9·(1+|Re|) and returns the real part.
//!
//! A `tilt` argument multiplies a function of x by e^{tilt·x}, folded into
//! the integrand exponent so conjugated quantities are computed without
//! overflow. The pure functions correspond to `tilt = 0`.

use num_complex::Complex64;
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::contours::{self, make_airy, Contour, RayDirection};
use crate::dint::DoubleTerm;

#[derive(Debug, Error)]
pub enum SpecialError {
    #[error("parameter domain violation: {0}")]
    Domain(String),
    #[error("pole evaluation: Φ(x, z) has a pole at z = 1/2 for N > 1")]
    PoleEvaluation,
    #[error("contour-defined function returned a non-real value: re = {re:.6e}, im = {im:.6e}")]
    ResidualImaginary { re: f64, im: f64 },
    #[error(transparent)]
    Contour(#[from] contours::ContourError),
}

pub type Result<T> = std::result::Result<T, SpecialError>;

/// Model parameters of the finite system: lattice size, offset of the end
/// point from the diagonal, and boundary rates.
#[derive(Debug, Clone, Copy)]
pub struct FiniteParams {
    pub size: usize,
    pub offset: usize,
    pub alpha: f64,
    pub beta: Option<f64>,
}

impl FiniteParams {
    pub fn new(size: usize, offset: usize, alpha: f64) -> Result<Self> {
        if size < 1 {
            return Err(SpecialError::Domain("size must be >= 1".into()));
        }
        if offset + 1 > size {
            return Err(SpecialError::Domain(format!(
                "offset must satisfy 0 <= offset <= size-1, got offset = {offset}, size = {size}"
            )));
        }
        if !(alpha.abs() < 0.5) {
            return Err(SpecialError::Domain(format!("|alpha| < 1/2 required, got {alpha}")));
        }
        Ok(FiniteParams { size, offset, alpha, beta: None })
    }

    pub fn with_beta(size: usize, offset: usize, alpha: f64, beta: f64) -> Result<Self> {
        let mut p = FiniteParams::new(size, offset, alpha)?;
        if !(beta.abs() < 0.5) {
            return Err(SpecialError::Domain(format!("|beta| < 1/2 required, got {beta}")));
        }
        if alpha + beta <= 0.0 {
            return Err(SpecialError::Domain(format!(
                "alpha + beta > 0 required, got {} + {}",
                alpha, beta
            )));
        }
        p.beta = Some(beta);
        Ok(p)
    }

    pub fn beta_or_err(&self) -> Result<f64> {
        self.beta
            .ok_or_else(|| SpecialError::Domain("two-parameter mode requires beta".into()))
    }
}

/// Critical-scaling parameters: boundary-strength `delta` and diagonal
/// distance `u`.
#[derive(Debug, Clone, Copy)]
pub struct AsympParams {
    pub delta: f64,
    pub u: f64,
}

impl AsympParams {
    pub fn new(delta: f64, u: f64) -> Result<Self> {
        if !(u > 0.0) {
            return Err(SpecialError::Domain(format!("u > 0 required, got {u}")));
        }
        if !delta.is_finite() {
            return Err(SpecialError::Domain("delta must be finite".into()));
        }
        Ok(AsympParams { delta, u })
    }
}

/// Map (delta, u, S) to finite-size parameters (alpha, offset, s). The
/// offset is rounded to an integer lattice distance and the centering uses
/// the rounded value, so the returned s matches the actual end point.
pub fn scaling_to_finite(delta: f64, u: f64, s_scaled: f64, size: usize) -> (f64, usize, f64) {
    let nf = size as f64;
    let alpha = delta * 2f64.powf(-4.0 / 3.0) * nf.powf(-1.0 / 3.0);
    let offset_f = u * 2f64.powf(5.0 / 3.0) * nf.powf(2.0 / 3.0);
    let offset = offset_f.round().max(0.0) as usize;
    let u_eff = offset as f64 / (2f64.powf(5.0 / 3.0) * nf.powf(2.0 / 3.0));
    let s = 4.0 * nf - 2.0 * u_eff * 2f64.powf(5.0 / 3.0) * nf.powf(2.0 / 3.0)
        + s_scaled * 2f64.powf(4.0 / 3.0) * nf.powf(1.0 / 3.0);
    (alpha, offset, s)
}

/// Fluctuation scale 2^{4/3} N^{1/3}.
pub fn fluctuation_scale(size: usize) -> f64 {
    2f64.powf(4.0 / 3.0) * (size as f64).powf(1.0 / 3.0)
}

pub(crate) fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// sgn with sgn(0) = 0.
pub(crate) fn sgn(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// log of ((1/2+z)/(1/2-z))^{N-1}, as (N-1)·Log of the ratio. Integer powers
/// make the principal branch safe under exponentiation.
pub(crate) fn log_phi_ratio(z: Complex64, size: usize) -> Complex64 {
    ((0.5 + z) / (0.5 - z)).ln() * (size as f64 - 1.0)
}

/// Φ(x, z) = e^{-xz}((1/2+z)/(1/2-z))^{N-1}.
pub fn phi_cap(x: f64, z: Complex64, p: &FiniteParams) -> Result<Complex64> {
    if p.size > 1 && (z - c64(0.5, 0.0)).norm() < 1e-14 {
        return Err(SpecialError::PoleEvaluation);
    }
    Ok((-x * z + log_phi_ratio(z, p.size)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// f₊ʳ(x) = Φ(x,r)(1/2-r)ⁿ and f₋ʳ(x) = Φ(x,r)/(1/2+r)ⁿ, evaluated through
/// a combined exponent. `tilt` multiplies by e^{tilt·x}.
pub fn f_pm_tilted(sign: Sign, rate: f64, x: f64, p: &FiniteParams, tilt: f64) -> Result<f64> {
    if !(rate.abs() < 0.5) {
        return Err(SpecialError::Domain(format!("|rate| < 1/2 required, got {rate}")));
    }
    let nn = p.offset as f64;
    let pow = match sign {
        Sign::Plus => nn * (0.5 - rate).ln(),
        Sign::Minus => -nn * (0.5 + rate).ln(),
    };
    let log_phi = -x * rate + (p.size as f64 - 1.0) * ((0.5 + rate) / (0.5 - rate)).ln();
    Ok((log_phi + pow + tilt * x).exp())
}

pub fn f_pm(sign: Sign, rate: f64, x: f64, p: &FiniteParams) -> Result<f64> {
    f_pm_tilted(sign, rate, x, p, 0.0)
}

/// Extract the real part, checking the conjugate-symmetry residual.
fn realize(v: Complex64) -> Result<f64> {
    // relative check with an absolute floor: far-tail values sit at the
    // quadrature roundoff scale where a relative test is meaningless, while
    // genuine contour-convention bugs produce |Im| comparable to the value
    if v.im.abs() > 1e-7 + 1e-9 * v.re.abs() {
        return Err(SpecialError::ResidualImaginary { re: v.re, im: v.im });
    }
    Ok(v.re)
}

/// Node count for a circle of the given radius when integrands carry
/// oscillation up to |x|·R plus the pole-order phase near ±1/2.
fn auto_nodes(radius: f64, x_absmax: f64, p: &FiniteParams) -> usize {
    let osc = radius * x_absmax + (p.size as f64) * radius / 0.2 + (p.offset as f64);
    let want = (3.0 * osc) as usize;
    want.next_power_of_two().clamp(256, 4096)
}

/// One circle of the union: enclose `cluster`, stay away from each keep-out
/// point by the given fraction of the center distance, minimize the peak of
/// the integrand exponent.
pub(crate) fn plan_one_circle(
    cluster: &[f64],
    keep_out: &[(f64, f64)],
    logmag: impl Fn(Complex64) -> f64,
) -> Result<(f64, f64)> {
    let lo = cluster.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = cluster.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(f64, f64, f64)> = None;
    let n_c = 41;
    let n_r = 25;
    for ic in 0..n_c {
        let c = lo - 0.55 + (hi - lo + 1.1) * ic as f64 / (n_c - 1) as f64;
        let r_hi = keep_out
            .iter()
            .map(|&(q, frac)| frac * (q - c).abs())
            .fold(f64::INFINITY, f64::min);
        let r_lo = cluster
            .iter()
            .map(|&q| (q - c).abs())
            .fold(0.0, f64::max)
            .mul_add(1.25, 0.0)
            .max((0.02f64).min(0.35 * r_hi))
            .max(1e-4);
        let r_hi = r_hi.min(r_lo + 1.2);
        if r_hi <= r_lo {
            continue;
        }
        for ir in 0..n_r {
            let r = r_lo + (r_hi - r_lo) * ir as f64 / (n_r - 1) as f64;
            let peak = (0..48)
                .map(|k| {
                    let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 48.0;
                    logmag(c64(c + r * th.cos(), r * th.sin()))
                })
                .fold(f64::NEG_INFINITY, f64::max);
            if best.map_or(true, |(b, _, _)| peak < b) {
                best = Some((peak, c, r));
            }
        }
    }
    best.map(|(_, c, r)| (c, r)).ok_or_else(|| {
        SpecialError::Domain(format!(
            "no circle encloses {cluster:?} clear of {keep_out:?}"
        ))
    })
}

/// Circle union through the low-magnitude region. Enclosed poles are grouped
/// into clusters (split at gaps and wherever an excluded or separator point
/// falls between them); each cluster gets its own tuned circle, excluding the
/// other clusters. `separators` are poles of the partner variable in a
/// 1/(z-w) pairing and get a wider berth.
pub(crate) fn tuned_circle(
    enclosed: &[f64],
    excluded: &[f64],
    separators: &[f64],
    xs: &[f64],
    tilt: f64,
    p: &FiniteParams,
    extra_pow: impl Fn(Complex64) -> f64 + Copy,
) -> Result<Contour> {
    let x_lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let logmag = move |z: Complex64| -> f64 {
        let base = log_phi_ratio(z, p.size).re + extra_pow(z);
        (-x_lo * (z.re - tilt) + base).max(-x_hi * (z.re - tilt) + base)
    };
    tuned_circle_union(enclosed, excluded, separators, logmag, x_lo.abs().max(x_hi.abs()), p)
}

/// Variant for the second integration variable, where the integrand carries
/// e^{+y(w+tilt)}/φ(w) instead of e^{-x(z-tilt)}φ(z).
pub(crate) fn tuned_circle_y(
    enclosed: &[f64],
    excluded: &[f64],
    separators: &[f64],
    ys: &[f64],
    tilt: f64,
    p: &FiniteParams,
    extra_pow: impl Fn(Complex64) -> f64 + Copy,
) -> Result<Contour> {
    let y_lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let y_hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let logmag = move |w: Complex64| -> f64 {
        let base = -log_phi_ratio(w, p.size).re + extra_pow(w);
        (y_lo * (w.re + tilt) + base).max(y_hi * (w.re + tilt) + base)
    };
    tuned_circle_union(enclosed, excluded, separators, logmag, y_lo.abs().max(y_hi.abs()), p)
}

fn tuned_circle_union(
    enclosed: &[f64],
    excluded: &[f64],
    separators: &[f64],
    logmag: impl Fn(Complex64) -> f64 + Copy,
    x_absmax: f64,
    p: &FiniteParams,
) -> Result<Contour> {
    let mut sorted: Vec<f64> = enclosed.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    debug_assert!(!sorted.is_empty());
    let splitter = |a: f64, b: f64| -> bool {
        b - a > 0.15
            || excluded
                .iter()
                .chain(separators)
                .any(|&q| q > a + 1e-12 && q < b - 1e-12)
    };
    let mut clusters: Vec<Vec<f64>> = vec![vec![sorted[0]]];
    for w in sorted.windows(2) {
        if splitter(w[0], w[1]) {
            clusters.push(vec![w[1]]);
        } else {
            clusters.last_mut().unwrap().push(w[1]);
        }
    }
    let mut parts = Vec::with_capacity(clusters.len());
    for (k, cluster) in clusters.iter().enumerate() {
        let mut keep_out: Vec<(f64, f64)> = excluded.iter().map(|&q| (q, 0.85)).collect();
        keep_out.extend(separators.iter().map(|&q| (q, 0.45)));
        for (k2, other) in clusters.iter().enumerate() {
            if k2 != k {
                keep_out.extend(other.iter().map(|&q| (q, 0.6)));
            }
        }
        let (c, r) = plan_one_circle(cluster, &keep_out, logmag)?;
        parts.push(contours::circle(c64(c, 0.0), r, auto_nodes(r, x_absmax, p)));
    }
    Ok(if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        contours::union(parts)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GIndex {
    G1,
    G2,
    G3,
    G4,
    G5,
    G6,
    /// β → -α limit of G3
    Gs3,
    /// β → -α limit of G4
    Gs4,
}

/// Pole layout and integrand of the requested g function.
struct GSpec {
    enclosed: Vec<f64>,
    excluded: Vec<f64>,
    /// power of (1/2-z) (positive) or (1/2+z) (negative) in the integrand
    upper_power: bool,
    rational: Box<dyn Fn(Complex64) -> Complex64 + Sync>,
}

fn g_spec(idx: GIndex, p: &FiniteParams) -> Result<GSpec> {
    let a = p.alpha;
    let spec = match idx {
        GIndex::G1 => GSpec {
            enclosed: vec![0.5],
            excluded: vec![0.0],
            upper_power: true,
            rational: Box::new(move |z| (z + a) / (2.0 * z)),
        },
        GIndex::G2 => GSpec {
            enclosed: vec![0.5, a],
            excluded: vec![-0.5],
            upper_power: false,
            rational: Box::new(move |z| 1.0 / (z - a)),
        },
        GIndex::G3 => {
            let b = p.beta_or_err()?;
            GSpec {
                enclosed: vec![0.5],
                excluded: vec![b],
                upper_power: true,
                rational: Box::new(move |z| 1.0 / (z - b)),
            }
        }
        GIndex::G4 => {
            let b = p.beta_or_err()?;
            GSpec {
                enclosed: vec![0.5, a, -a, b],
                excluded: vec![-0.5],
                upper_power: false,
                rational: Box::new(move |z| 2.0 * z / ((z - a) * (z + a) * (z - b))),
            }
        }
        GIndex::G5 => {
            let b = p.beta_or_err()?;
            GSpec {
                enclosed: vec![0.5],
                excluded: vec![0.0, b],
                upper_power: true,
                rational: Box::new(move |z| (z - a) * (z + b) / (2.0 * z * (z - b))),
            }
        }
        GIndex::G6 => {
            let b = p.beta_or_err()?;
            GSpec {
                enclosed: vec![0.5],
                excluded: vec![-a, b, -0.5],
                upper_power: false,
                rational: Box::new(move |z| (z + b) / ((z + a) * (z - b))),
            }
        }
        GIndex::Gs3 => GSpec {
            enclosed: vec![0.5],
            excluded: vec![-a],
            upper_power: true,
            rational: Box::new(move |z| 1.0 / (z + a)),
        },
        GIndex::Gs4 => GSpec {
            enclosed: if a == 0.0 { vec![0.5, 0.0] } else { vec![0.5, a, -a] },
            excluded: vec![-0.5],
            upper_power: false,
            rational: Box::new(move |z| 2.0 * z / ((z - a) * (z + a) * (z + a))),
        },
    };
    Ok(spec)
}

/// g function values on a batch of points, sharing one tuned contour.
pub fn g_finite_on(idx: GIndex, xs: &[f64], p: &FiniteParams, tilt: f64) -> Result<Vec<f64>> {
    let spec = g_spec(idx, p)?;
    let nn = p.offset as f64;
    let pow = move |z: Complex64| -> Complex64 {
        if spec.upper_power {
            (0.5 - z).ln() * nn
        } else {
            -(0.5 + z).ln() * nn
        }
    };
    let contour = tuned_circle(&spec.enclosed, &spec.excluded, &[], xs, tilt, p, |z| pow(z).re)?;
    let rational = &spec.rational;
    let size = p.size;
    xs.iter()
        .map(|&x| {
            let v = contours::integrate(
                |z| (-x * (z - tilt) + log_phi_ratio(z, size) + pow(z)).exp() * rational(z),
                &contour,
            )?;
            realize(v)
        })
        .collect()
}

pub fn g_finite(idx: GIndex, x: f64, p: &FiniteParams) -> Result<f64> {
    Ok(g_finite_on(idx, &[x], p, 0.0)?[0])
}

/// eᵅ(s): the double-pole contour integral normalized by Φ(s, α).
pub fn e_alpha(s: f64, p: &FiniteParams) -> Result<f64> {
    let a = p.alpha;
    let nn = p.offset as f64;
    let size = p.size;
    // combined exponent: -s(z-α) + logφ(z) - logφ(α) + n[ln(1/2+α) - Log(1/2+z)]
    let base = -log_phi_ratio(c64(a, 0.0), size) + nn * (0.5 + a).ln();
    let contour = tuned_circle(&[0.5, a], &[-0.5], &[], &[s], a, p, |z| (-(0.5 + z).ln() * nn).re)?;
    let v = contours::integrate(
        |z| {
            -((-s * (z - a) + log_phi_ratio(z, size) + base - nn * (0.5 + z).ln()).exp())
                / ((z - a) * (z - a))
        },
        &contour,
    )?;
    realize(v)
}

/// jᵅ(s, y) = [sinh(α(y-s))/α + (y-s)e^{α(y-s)}]·f₋^{-α}(s), with the
/// removable α = 0 singularity handled by series. `tilt` scales by e^{tilt·y}.
pub fn j_alpha_tilted(s: f64, y: f64, p: &FiniteParams, tilt: f64) -> Result<f64> {
    let a = p.alpha;
    let t = y - s;
    let sinh_ratio = if a.abs() < 1e-5 {
        // sinh(at)/a = t(1 + (at)²/6 + (at)⁴/120)
        let at = a * t;
        t * (1.0 + at * at / 6.0 + at.powi(4) / 120.0)
    } else {
        (a * t).sinh() / a
    };
    let bracket = sinh_ratio + t * (a * t).exp();
    Ok(bracket * f_pm(Sign::Minus, -a, s, p)? * (tilt * y).exp())
}

pub fn j_alpha(s: f64, y: f64, p: &FiniteParams) -> Result<f64> {
    j_alpha_tilted(s, y, p, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsKind {
    E0,
    E1,
    E2,
}

/// ε kernel additions. All antisymmetric via an explicit sgn(x-y) factor.
pub fn eps(kind: EpsKind, x: f64, y: f64, p: &FiniteParams) -> Result<f64> {
    let a = p.alpha;
    let nn = p.offset as f64;
    let m = (x - y).abs();
    let s = sgn(x - y);
    if s == 0.0 {
        return Ok(0.0);
    }
    match kind {
        EpsKind::E0 => Ok(-s * (a * m - nn * (0.25 - a * a).ln()).exp()),
        EpsKind::E2 => Ok(-s * (-a * m - nn * (0.25 - a * a).ln()).exp()),
        EpsKind::E1 => {
            if p.offset == 0 {
                // integrand analytic inside Γ_{1/2}
                return Ok(0.0);
            }
            let contour = tuned_circle(&[0.5], &[a, -a, -0.5], &[], &[m], 0.0, p, |z| (-((0.25 - z * z).ln()) * nn).re)?;
            let v = contours::integrate(
                |z| {
                    2.0 * z * (-z * m - nn * (0.25 - z * z).ln()).exp() / (z * z - a * a)
                },
                &contour,
            )?;
            Ok(-s * realize(v)?)
        }
    }
}

// ---------------------------------------------------------------------------
// Asymptotic family (Airy ray contours)
// ---------------------------------------------------------------------------

pub(crate) const RAY_LEN: f64 = 12.0;
pub(crate) const RAY_NODES: usize = 288;

pub(crate) fn airy_down(anchor: f64) -> Contour {
    make_airy(RayDirection::Down, anchor, RAY_LEN, RAY_NODES)
}

pub(crate) fn airy_up(anchor: f64) -> Contour {
    make_airy(RayDirection::Up, anchor, RAY_LEN, RAY_NODES)
}

/// e^{-δ³/3 - δ²u + δX}.
pub fn asymp_f(delta: f64, u: f64, x: f64) -> f64 {
    (-delta.powi(3) / 3.0 - delta * delta * u + delta * x).exp()
}

/// The asymptotic analogue of eᵅ.
pub fn asymp_e(p: &AsympParams, s: f64) -> Result<f64> {
    let (d, u) = (p.delta, p.u);
    let contour = airy_down(d - 0.35);
    let norm = d.powi(3) / 3.0 + d * d * u - d * s;
    let v = contours::integrate(
        |z| -((z * z * z / 3.0 + z * z * u - z * s - norm).exp()) / ((z - d) * (z - d)),
        &contour,
    )?;
    realize(v)
}

/// The asymptotic analogue of jᵅ.
pub fn asymp_j(p: &AsympParams, s: f64, x: f64, tilt: f64) -> f64 {
    let d = p.delta;
    let t = x - s;
    let sinh_ratio = if d.abs() < 1e-5 {
        let dt = d * t;
        t * (1.0 + dt * dt / 6.0 + dt.powi(4) / 120.0)
    } else {
        (d * t).sinh() / d
    };
    (sinh_ratio + t * (d * t).exp()) * asymp_f(d, -p.u, s) * (tilt * x).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsympG {
    G1,
    G2,
    G3,
    G4,
}

/// Airy-contour g functions, batched. `tilt` multiplies by e^{tilt·x}.
///
/// The two entries whose contours sit right of every pole have Airy-type
/// decay; their anchors follow the saddle √x so the integrand peak stays at
/// the scale of the value (a fixed anchor loses all precision by x ≈ 15).
pub fn asymp_g_on(idx: AsympG, xs: &[f64], p: &AsympParams, tilt: f64) -> Result<Vec<f64>> {
    let (d, u) = (p.delta, p.u);
    let u_sign: f64 = match idx {
        AsympG::G1 | AsympG::G3 => -1.0,
        AsympG::G2 | AsympG::G4 => 1.0,
    };
    let base_anchor = match idx {
        AsympG::G1 => 0.35,
        AsympG::G2 => d - 0.35,
        AsympG::G3 => -d + 0.35,
        AsympG::G4 => -d.abs() - 0.35,
    };
    let movable = matches!(idx, AsympG::G1 | AsympG::G3);
    let rational = move |z: Complex64| -> Complex64 {
        match idx {
            AsympG::G1 => (z + d) / (2.0 * z),
            AsympG::G2 => 1.0 / (z - d),
            AsympG::G3 => 1.0 / (z + d),
            AsympG::G4 => 2.0 * z / ((z - d) * (z + d) * (z + d)),
        }
    };
    let fixed = airy_down(base_anchor);
    xs.iter()
        .map(|&x| {
            let saddle = 0.85 * x.max(0.0).sqrt();
            let local;
            let contour = if movable && saddle > base_anchor + 0.5 {
                local = airy_down(saddle);
                &local
            } else {
                &fixed
            };
            let v = contours::integrate(
                |z| {
                    (z * z * z / 3.0 + u_sign * z * z * u - (z - tilt) * x).exp() * rational(z)
                },
                contour,
            )?;
            realize(v)
        })
        .collect()
}

pub fn asymp_g(idx: AsympG, x: f64, p: &AsympParams) -> Result<f64> {
    Ok(asymp_g_on(idx, &[x], p, 0.0)?[0])
}

/// ℰ₀(X,Y) = -sgn(X-Y) e^{δ|X-Y| + 2δ²u}.
pub fn asymp_eps0(p: &AsympParams, x: f64, y: f64) -> f64 {
    let m = (x - y).abs();
    -sgn(x - y) * (p.delta * m + 2.0 * p.delta * p.delta * p.u).exp()
}

/// ℰ₁(X,Y): the contour deforms to a vertical line right of |δ| and the two
/// simple-pole pieces evaluate in closed form through erfc. Vanishes at
/// u = 0 where the contour closes to the right.
pub fn asymp_eps1(p: &AsympParams, x: f64, y: f64) -> f64 {
    let (d, u) = (p.delta, p.u);
    let m = (x - y).abs();
    let s = sgn(x - y);
    if s == 0.0 || u == 0.0 {
        return 0.0;
    }
    let den = 2.0 * (2.0 * u).sqrt();
    let t1 = (2.0 * u * d * d - m * d).exp() * 0.5 * erfc((m - 4.0 * u * d) / den);
    let t2 = (2.0 * u * d * d + m * d).exp() * 0.5 * erfc((m + 4.0 * u * d) / den);
    s * (t1 + t2)
}


/// ∫ₛ^∞ ε₁(y, V) f₊^{-α}(V) dV in closed contour form: the V integral
/// against the pure exponential is done analytically inside the z integral,
/// which removes the sgn jump from all quadratures. Returns the values
/// multiplied by e^{tilt·y} (constants of f₊ included).
pub fn eps1_conv_finite(p: &FiniteParams, s: f64, ys: &[f64], tilt: f64) -> Result<Vec<f64>> {
    let a = p.alpha;
    let nn = p.offset as f64;
    if p.offset == 0 {
        return Ok(vec![0.0; ys.len()]);
    }
    // f₊^{-α}(V) = C e^{αV}, log C = logφ(-α) + n ln(1/2+α)
    let log_c = (p.size as f64 - 1.0) * ((0.5 - a) / (0.5 + a)).ln() + nn * (0.5 + a).ln();
    let contour = tuned_circle(&[0.5], &[a, -a, -0.5], &[], &[0.0], 0.0, p, |z| {
        (-((0.25 - z * z).ln()) * nn).re
    })?;
    ys.iter()
        .map(|&y| {
            let v = contours::integrate(
                |z| {
                    let g = 2.0 * z * (-nn * (0.25 - z * z).ln()).exp() / (z * z - a * a);
                    let inner = ((a * y + log_c).exp() - (-z * (y - s) + a * s + log_c).exp())
                        / (z + a)
                        + (a * y + log_c).exp() / (a - z);
                    -g * inner
                },
                &contour,
            )?;
            Ok(realize(v)? * (tilt * y).exp())
        })
        .collect()
}

/// ∫_S^∞ ℰ₀(Y, V) 𝒻^{-δ,u}(V) dV in closed form; the tail requires δ < 0.
pub fn eps0_conv_asymp(p: &AsympParams, s: f64, ys: &[f64], tilt: f64) -> Vec<f64> {
    let (d, u) = (p.delta, p.u);
    assert!(d < 0.0, "the ℰ₀ convolution tail converges only for δ < 0");
    ys.iter()
        .map(|&y| {
            -(-d.powi(3) / 3.0 + d * d * u + d * y + tilt * y).exp() * ((y - s) + 1.0 / (2.0 * d))
        })
        .collect()
}

/// Asymptotic analogue: ∫_S^∞ ℰ₁(Y, V) 𝒻^{-δ,u}(V) dV, via the vertical-line
/// representation right of ±δ. Zero at u = 0.
pub fn eps1_conv_asymp(p: &AsympParams, s: f64, ys: &[f64], tilt: f64) -> Result<Vec<f64>> {
    let (d, u) = (p.delta, p.u);
    if u == 0.0 {
        return Ok(vec![0.0; ys.len()]);
    }
    let log_c = -d.powi(3) / 3.0 - d * d * u;
    let sigma = d.abs() + 0.6;
    let hv = (36.0f64 / (2.0 * u)).sqrt().max(4.0);
    let line = crate::contours::make_vertical(sigma, hv, 256);
    ys.iter()
        .map(|&y| {
            let v = contours::integrate(
                |z| {
                    let g = 2.0 * z * (2.0 * z * z * u).exp() / (z * z - d * d);
                    let inner = ((d * y + log_c).exp() - (-z * (y - s) + d * s + log_c).exp())
                        / (z + d)
                        + (d * y + log_c).exp() / (d - z);
                    g * inner
                },
                &line,
            )?;
            Ok(realize(v)? * (tilt * y).exp())
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Stationary full-space limit ingredients
// ---------------------------------------------------------------------------

/// ℛ_τ(s).
pub fn br_r(tau: f64, s: f64) -> Result<f64> {
    let contour = airy_down(-tau - 0.35);
    let norm = -2.0 * tau.powi(3) / 3.0 - s * tau;
    let v = contours::integrate(
        |z| -((z * z * z / 3.0 - z * (s + tau * tau) + norm).exp()) / ((z + tau) * (z + tau)),
        &contour,
    )?;
    realize(v)
}

/// Ψ_τ(x), optionally tilted by e^{tilt·x}.
pub fn br_psi_on(tau: f64, xs: &[f64], tilt: f64) -> Result<Vec<f64>> {
    let contour = airy_down(-tau - 0.35);
    xs.iter()
        .map(|&x| {
            let v = contours::integrate(
                |z| (z * z * z / 3.0 - (z - tilt) * x - z * tau * tau).exp() / (z + tau),
                &contour,
            )?;
            realize(v)
        })
        .collect()
}

pub fn br_psi(tau: f64, x: f64) -> Result<f64> {
    Ok(br_psi_on(tau, &[x], 0.0)?[0])
}

/// Φ_τ(y) (depends on the domain edge s as well).
pub fn br_phi_on(tau: f64, s: f64, ys: &[f64]) -> Result<Vec<f64>> {
    // diverging ray pairs separate by at least the anchor gap
    let cz = airy_down(tau + 0.85);
    let cw = airy_up(tau + 0.35);
    let term = DoubleTerm::new(&cz, &cw, false, |z, w| 1.0 / ((z - w) * (w - tau)))?;
    let norm = -2.0 * tau.powi(3) / 3.0 - s * tau;
    ys.iter()
        .map(|&y| {
            let v = term.eval(
                |z| (z * z * z / 3.0 - z * (y + tau * tau)).exp(),
                |w| (-w * w * w / 3.0 + w * (s + tau * tau) + norm).exp(),
            );
            realize(v)
        })
        .collect()
}

pub fn br_phi(tau: f64, s: f64, y: f64) -> Result<f64> {
    Ok(br_phi_on(tau, s, &[y])?[0])
}

/// Shifted Airy kernel K_Ai,τ(x,y) = K_Ai(x+τ², y+τ²).
pub struct ShiftedAiryKernel {
    term: DoubleTerm,
    tau2: f64,
}

impl ShiftedAiryKernel {
    pub fn new(tau: f64) -> Result<Self> {
        let cz = airy_down(0.4);
        let cw = airy_up(-0.4);
        let term = DoubleTerm::new(&cz, &cw, false, |z, w| 1.0 / (z - w))?;
        Ok(ShiftedAiryKernel { term, tau2: tau * tau })
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let t2 = self.tau2;
        let v = -self.term.eval(
            |z| (z * z * z / 3.0 - z * (x + t2)).exp(),
            |w| (-w * w * w / 3.0 + w * (y + t2)).exp(),
        );
        realize(v)
    }

    /// Full table on a node set.
    pub fn table(&self, xs: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
        let t2 = self.tau2;
        let tab = self.term.eval_table(
            xs,
            xs,
            |x, z| (z * z * z / 3.0 - z * (x + t2)).exp(),
            |y, w| (-w * w * w / 3.0 + w * (y + t2)).exp(),
        );
        let mut out = nalgebra::DMatrix::zeros(xs.len(), xs.len());
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                out[(i, j)] = realize(-tab[(i, j)])?;
            }
        }
        Ok(out)
    }
}

pub fn k_ai_shift(tau: f64, x: f64, y: f64) -> Result<f64> {
    ShiftedAiryKernel::new(tau)?.eval(x, y)
}
