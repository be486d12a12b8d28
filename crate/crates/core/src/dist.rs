//! End-user distribution functions: the two-parameter CDF, the stationary
//! finite-size CDF (with its outer s-derivative), the limiting family, the
//! stationary full-space limit law and the GUE edge law, plus the moment
//! machinery and the consistency checks tying them together.

use rayon::prelude::*;
use serde::Serialize;

use crate::geo::GeoKernel;
use crate::kernels::{
    asymp_borders, asymp_kernel, br_path_borders, br_path_kernel, default_asymp_conj,
    default_finite_conj, default_finite_cutoff, finite_kernel, AsympMode, Conjugation, FiniteMode,
    HVariant,
};
use crate::pfaffian::{
    bracket_det_scalar, bracket_pf, fredholm_det_scalar, fredholm_pf, fredholm_pf_discrete,
    make_grid_panels, BorderPair, QuadratureGrid,
};
use crate::sim::GeoParams;
use crate::special::{
    self, asymp_e, br_phi_on, br_psi_on, br_r, e_alpha, AsympParams, FiniteParams, GIndex, Result,
    ShiftedAiryKernel, Sign, SpecialError,
};

/// Default quadrature layout: composite panels keep the error of the
/// sgn-kernel kinks local.
pub const DEFAULT_PANELS: usize = 12;
pub const DEFAULT_PANEL_NODES: usize = 10;
pub const DEFAULT_ASYMP_CUTOFF: f64 = 16.0;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DistPoint {
    pub s: f64,
    pub f: f64,
    pub err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionCurve {
    pub params: serde_json::Value,
    pub method: serde_json::Value,
    pub points: Vec<DistPoint>,
}

impl DistributionCurve {
    /// Monotone within the error slack and inside [0,1] up to it.
    pub fn is_valid_cdf(&self) -> bool {
        let mut ok = true;
        for w in self.points.windows(2) {
            ok &= w[1].f >= w[0].f - 2.0 * (w[0].err + w[1].err);
        }
        for p in &self.points {
            ok &= p.f >= -p.err - 1e-9 && p.f <= 1.0 + p.err + 1e-9;
        }
        ok
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,F,err\n");
        for p in &self.points {
            out.push_str(&format!("{:.15e},{:.15e},{:.15e}\n", p.s, p.f, p.err));
        }
        out
    }

    pub fn sup_distance_to(&self, mut cdf: impl FnMut(f64) -> f64) -> f64 {
        self.points
            .iter()
            .map(|p| (p.f - cdf(p.s)).abs())
            .fold(0.0, f64::max)
    }
}

/// Numerical knobs shared by the curve evaluators.
#[derive(Debug, Clone, Copy)]
pub struct NumericOpts {
    pub panels: usize,
    pub panel_nodes: usize,
    pub cutoff: Option<f64>,
    /// outer-derivative step in units of the fluctuation scale
    pub deriv_step: f64,
}

impl Default for NumericOpts {
    fn default() -> Self {
        NumericOpts {
            panels: DEFAULT_PANELS,
            panel_nodes: DEFAULT_PANEL_NODES,
            cutoff: None,
            deriv_step: 1e-2,
        }
    }
}

fn grid_for(s: f64, cutoff: f64, opts: &NumericOpts, mu: f64) -> Result<QuadratureGrid> {
    let mut g = make_grid_panels(s, cutoff, opts.panels, opts.panel_nodes)
        .map_err(|e| SpecialError::Domain(e.to_string()))?;
    g.mu = mu;
    Ok(g)
}

fn pfaffian_err(e: crate::pfaffian::PfaffianError) -> SpecialError {
    SpecialError::Domain(e.to_string())
}

// ---------------------------------------------------------------------------
// Two-parameter model
// ---------------------------------------------------------------------------

/// pf(J - K) at one point of the two-parameter model.
pub fn two_param_cdf_at(p: &FiniteParams, s: f64, opts: &NumericOpts) -> Result<f64> {
    let beta = p.beta_or_err()?;
    if !(beta > 0.0 && beta < 0.5) {
        return Err(SpecialError::Domain(format!(
            "two-parameter CDF requires beta in (0, 1/2), got {beta}"
        )));
    }
    if s < 0.0 {
        return Ok(0.0);
    }
    let cutoff = opts.cutoff.unwrap_or_else(|| default_finite_cutoff(p));
    let conj = default_finite_conj(p, s);
    let grid = grid_for(s, cutoff, opts, conj.rate)?;
    let kern = finite_kernel(p, FiniteMode::TwoParam, conj, (s, s + cutoff))?;
    fredholm_pf(&kern, &grid).map_err(pfaffian_err)
}

pub fn cdf_two_param(
    s_grid: &[f64],
    p: &FiniteParams,
    opts: &NumericOpts,
) -> Result<DistributionCurve> {
    let points: Result<Vec<DistPoint>> = s_grid
        .par_iter()
        .map(|&s| {
            let f = two_param_cdf_at(p, s, opts)?;
            Ok(DistPoint { s, f, err: quadrature_error_estimate() })
        })
        .collect();
    Ok(DistributionCurve {
        params: serde_json::json!({
            "model": "two_param", "N": p.size, "n": p.offset,
            "alpha": p.alpha, "beta": p.beta,
        }),
        method: method_json(opts),
        points: points?,
    })
}

/// Error budget of the defaults: tail truncation plus kink-limited
/// quadrature, measured empirically by grid/cutoff doubling on the
/// acceptance configurations.
fn quadrature_error_estimate() -> f64 {
    2e-5
}

fn method_json(opts: &NumericOpts) -> serde_json::Value {
    serde_json::json!({
        "panels": opts.panels,
        "panel_nodes": opts.panel_nodes,
        "cutoff": opts.cutoff,
        "deriv_step": opts.deriv_step,
    })
}

// ---------------------------------------------------------------------------
// Stationary finite-size model
// ---------------------------------------------------------------------------

/// The inner function G(s) = pf(J-K̄)·eᵅ(s) - pf·⟨bracket⟩ whose s-derivative
/// is the stationary CDF.
pub fn stationary_g(p: &FiniteParams, s: f64, opts: &NumericOpts) -> Result<f64> {
    let cutoff = opts.cutoff.unwrap_or_else(|| default_finite_cutoff(p));
    let conj = default_finite_conj(p, s);
    let grid = grid_for(s, cutoff, opts, conj.rate)?;
    let kern = finite_kernel(p, FiniteMode::Limit, conj, (s, s + cutoff))?;
    let (left, right) = crate::kernels::finite_borders(p, conj, &grid)?;
    let pf = fredholm_pf(&kern, &grid).map_err(pfaffian_err)?;
    let brk = bracket_pf(&kern, &left, &right, &grid).map_err(pfaffian_err)?;
    Ok(pf * e_alpha(s, p)? - brk)
}

/// Five-point central derivative with one Richardson step; returns the
/// derivative and a disagreement-based error estimate.
fn stencil_derivative(
    mut g: impl FnMut(f64) -> Result<f64>,
    s: f64,
    h: f64,
) -> Result<(f64, f64)> {
    let five = |v: [f64; 4], h: f64| (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h);
    let d_h = five(
        [g(s - 2.0 * h)?, g(s - h)?, g(s + h)?, g(s + 2.0 * h)?],
        h,
    );
    let d_h2 = five(
        [g(s - h)?, g(s - 0.5 * h)?, g(s + 0.5 * h)?, g(s + h)?],
        0.5 * h,
    );
    let richardson = (16.0 * d_h2 - d_h) / 15.0;
    Ok((richardson, (richardson - d_h2).abs()))
}

pub fn cdf_stationary_finite_at(
    p: &FiniteParams,
    s: f64,
    opts: &NumericOpts,
) -> Result<(f64, f64)> {
    let h = opts.deriv_step * special::fluctuation_scale(p.size);
    stencil_derivative(|t| stationary_g(p, t, opts), s, h)
}

pub fn cdf_stationary_finite(
    s_grid: &[f64],
    p: &FiniteParams,
    opts: &NumericOpts,
) -> Result<DistributionCurve> {
    let points: Result<Vec<DistPoint>> = s_grid
        .par_iter()
        .map(|&s| {
            let (f, derr) = cdf_stationary_finite_at(p, s, opts)?;
            Ok(DistPoint { s, f, err: derr + quadrature_error_estimate() })
        })
        .collect();
    Ok(DistributionCurve {
        params: serde_json::json!({
            "model": "stationary_finite", "N": p.size, "n": p.offset, "alpha": p.alpha,
        }),
        method: method_json(opts),
        points: points?,
    })
}

// ---------------------------------------------------------------------------
// Shift identity and analytic continuation
// ---------------------------------------------------------------------------

/// P(L ≤ s) for the corner-removed two-parameter model via the shift
/// identity: pf(J-K) + ∂ₛ[(α+β)⁻¹ pf(J-K)].
pub fn shifted_two_param_at(p: &FiniteParams, s: f64, opts: &NumericOpts) -> Result<(f64, f64)> {
    let beta = p.beta_or_err()?;
    let inv = 1.0 / (p.alpha + beta);
    let f0 = two_param_cdf_at(p, s, opts)?;
    let h = opts.deriv_step * special::fluctuation_scale(p.size);
    let (d, derr) = stencil_derivative(|t| two_param_cdf_at(p, t, opts), s, h)?;
    Ok((f0 + inv * d, inv * derr))
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftCheckReport {
    pub s_values: Vec<f64>,
    pub formula: Vec<f64>,
    pub mc_cdf: Vec<f64>,
    pub sup_distance: f64,
}

/// Compare the shift-identity left side against the Monte Carlo law of the
/// corner-removed passage time.
pub fn shift_check(
    s_grid: &[f64],
    p: &FiniteParams,
    samples: usize,
    seed: u64,
    opts: &NumericOpts,
) -> Result<ShiftCheckReport> {
    let mc = crate::sim::sample_cdf(
        &crate::sim::ModelParams::TwoParam(*p),
        crate::sim::Target::MinusCorner,
        samples,
        seed,
    )
    .map_err(|e| SpecialError::Domain(e.to_string()))?;
    let formula: Result<Vec<f64>> = s_grid
        .par_iter()
        .map(|&s| Ok(shifted_two_param_at(p, s, opts)?.0))
        .collect();
    let formula = formula?;
    let mc_cdf: Vec<f64> = s_grid.iter().map(|&s| mc.cdf(s)).collect();
    // the s = 0 endpoint carries the boundary atom of the removed corner
    let sup_distance = s_grid
        .iter()
        .zip(formula.iter().zip(&mc_cdf))
        .filter(|(s, _)| **s > 1e-9)
        .map(|(_, (a, b))| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(ShiftCheckReport { s_values: s_grid.to_vec(), formula, mc_cdf, sup_distance })
}

/// The corner-removed CDF evaluated through the analytic split
/// pf(J-K̄)(1 - ε·B) + ∂ₛ{pf(J-K̄)(1/ε - B)} with B the plain-border
/// bracket; well-defined for β = -α + ε even when β < 0.
pub fn continued_two_param_at(p: &FiniteParams, s: f64, opts: &NumericOpts) -> Result<(f64, f64)> {
    let beta = p.beta_or_err()?;
    let eps = p.alpha + beta;
    let cutoff = opts.cutoff.unwrap_or_else(|| default_finite_cutoff(p));

    let eval = |t: f64| -> Result<(f64, f64)> {
        let conj = default_finite_conj(p, t);
        let grid = grid_for(t, cutoff, opts, conj.rate)?;
        let kern = finite_kernel(p, FiniteMode::TwoParamBar, conj, (t, t + cutoff))?;
        let pf = fredholm_pf(&kern, &grid).map_err(pfaffian_err)?;
        // left = (-g₁, g₂), right = X₂ = (0, f₊^β), conjugation-consistent
        let cc = conj.offset - conj.rate * conj.base;
        let g1 = special::g_finite_on(GIndex::G1, &grid.nodes, p, conj.rate)?;
        let g2 = special::g_finite_on(GIndex::G2, &grid.nodes, p, -conj.rate)?;
        let left = BorderPair {
            first: g1.iter().map(|v| -v * cc.exp()).collect(),
            second: g2.iter().map(|v| v * (-cc).exp()).collect(),
        };
        let fp: Result<Vec<f64>> = grid
            .nodes
            .iter()
            .map(|&x| Ok(special::f_pm_tilted(Sign::Plus, beta, x, p, conj.rate)? * cc.exp()))
            .collect();
        let right = BorderPair { first: vec![0.0; grid.len()], second: fp? };
        let pfb = bracket_pf(&kern, &left, &right, &grid).map_err(pfaffian_err)?;
        Ok((pf, pfb))
    };

    let (pf0, pfb0) = eval(s)?;
    let h = opts.deriv_step * special::fluctuation_scale(p.size);
    let (d, derr) = stencil_derivative(
        |t| {
            let (pf, pfb) = eval(t)?;
            Ok(pf / eps - pfb)
        },
        s,
        h,
    )?;
    Ok((pf0 - eps * pfb0 + d, derr))
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationReport {
    pub eps_values: Vec<f64>,
    pub continued: Vec<f64>,
    pub limit_value: f64,
    pub differences: Vec<f64>,
    pub ill_conditioned: bool,
}

/// β → -α continuation: the corner-removed formula at β = -α + ε against
/// the boundary-limit formula, with the empirical convergence recorded.
pub fn continuation_check(
    s: f64,
    alpha: f64,
    size: usize,
    offset: usize,
    eps_seq: &[f64],
    opts: &NumericOpts,
) -> Result<ContinuationReport> {
    let p_lim = FiniteParams::new(size, offset, alpha)?;
    let limit_value = cdf_stationary_finite_at(&p_lim, s, opts)?.0;
    let mut continued = Vec::new();
    let mut ill = false;
    for &e in eps_seq {
        if e < 1e-4 {
            ill = true;
        }
        let p = FiniteParams::with_beta(size, offset, alpha, -alpha + e)?;
        continued.push(continued_two_param_at(&p, s, opts)?.0);
    }
    let differences: Vec<f64> = continued.iter().map(|v| (v - limit_value).abs()).collect();
    Ok(ContinuationReport {
        eps_values: eps_seq.to_vec(),
        continued,
        limit_value,
        differences,
        ill_conditioned: ill,
    })
}

// ---------------------------------------------------------------------------
// Limiting family
// ---------------------------------------------------------------------------

/// G(S) of the limiting distribution: pf(J-Ā)·[𝑒(S) - ⟨bracket⟩].
pub fn asymp_g_fn(p: &AsympParams, s: f64, variant: HVariant, opts: &NumericOpts) -> Result<f64> {
    let cutoff = opts.cutoff.unwrap_or(DEFAULT_ASYMP_CUTOFF);
    let conj = default_asymp_conj(p, s);
    let grid = grid_for(s, cutoff, opts, conj.rate)?;
    let kern = asymp_kernel(p, AsympMode::Bar, conj)?;
    let (left, right) = asymp_borders(p, conj, &grid, variant)?;
    let pf = fredholm_pf(&kern, &grid).map_err(pfaffian_err)?;
    let brk = bracket_pf(&kern, &left, &right, &grid).map_err(pfaffian_err)?;
    Ok(pf * asymp_e(p, s)? - brk)
}

/// pf(J - Ā) alone on L²(S, ∞)² (the boundary-crossover law).
pub fn asymp_pf_at(p: &AsympParams, s: f64, opts: &NumericOpts) -> Result<f64> {
    let cutoff = opts.cutoff.unwrap_or(DEFAULT_ASYMP_CUTOFF);
    let conj = default_asymp_conj(p, s);
    let grid = grid_for(s, cutoff, opts, conj.rate)?;
    let kern = asymp_kernel(p, AsympMode::Bar, conj)?;
    fredholm_pf(&kern, &grid).map_err(pfaffian_err)
}

pub fn cdf_limit_at(
    p: &AsympParams,
    s: f64,
    variant: HVariant,
    opts: &NumericOpts,
) -> Result<(f64, f64)> {
    stencil_derivative(|t| asymp_g_fn(p, t, variant, opts), s, opts.deriv_step)
}

pub fn cdf_limit(
    s_grid: &[f64],
    p: &AsympParams,
    variant: HVariant,
    opts: &NumericOpts,
) -> Result<DistributionCurve> {
    let points: Result<Vec<DistPoint>> = s_grid
        .par_iter()
        .map(|&s| {
            let (f, derr) = cdf_limit_at(p, s, variant, opts)?;
            Ok(DistPoint { s, f, err: derr + quadrature_error_estimate() })
        })
        .collect();
    Ok(DistributionCurve {
        params: serde_json::json!({
            "model": "limit", "delta": p.delta, "u": p.u,
            "variant": match variant { HVariant::Standard => "standard", HVariant::DeltaNeg => "delta_neg" },
        }),
        method: method_json(opts),
        points: points?,
    })
}

/// ℓ-th raw moment of the limit law, derivative-free: the mean comes from
/// the G plateau and higher moments from the centered integral identity.
pub fn moments_limit(p: &AsympParams, ell: usize, opts: &NumericOpts) -> Result<f64> {
    if ell < 1 {
        return Err(SpecialError::Domain("moment order must be >= 1".into()));
    }
    let g = |s: f64| asymp_g_fn(p, s, HVariant::Standard, opts);
    // locate the plateaus: G → 0 on the left, G - s → -mean on the right
    let mut t = 6.0;
    let mean;
    loop {
        let gl = g(-t)?;
        let gr = g(t)?;
        let m = t - gr + gl;
        let gr2 = g(t + 1.5)?;
        let m2 = t + 1.5 - gr2 + gl;
        if (m - m2).abs() < 2e-6 || t > 13.0 {
            mean = m2;
            break;
        }
        t += 2.0;
    }
    if ell == 1 {
        return Ok(mean);
    }
    // centered moments via μ_ℓ = ℓ(ℓ-1)[∫₀^T S^{ℓ-2}(G_c(S)-S)dS + ∫_{-T}^0 S^{ℓ-2}G_c(S)dS],
    // G_c(S) = G(S + mean)
    let tmax = t + 1.5;
    let mut centered = vec![0.0; ell + 1];
    for l in 2..=ell {
        let mut acc = 0.0;
        for &(x, w) in &crate::quad::gauss_legendre_on(20, 0.0, tmax) {
            acc += w * x.powi(l as i32 - 2) * (g(x + mean)? - x - mean);
        }
        for &(x, w) in &crate::quad::gauss_legendre_on(20, -tmax, 0.0) {
            acc += w * x.powi(l as i32 - 2) * g(x + mean)?;
        }
        centered[l] = (l * (l - 1)) as f64 * acc;
    }
    // raw moment from mean + centered moments (μ₀ = 1, μ₁ = 0)
    let mut raw = 0.0;
    for k in 0..=ell {
        let binom = (0..k).fold(1.0, |acc, i| acc * (ell - i) as f64 / (i + 1) as f64);
        let mu = match ell - k {
            0 => 1.0,
            1 => 0.0,
            l => centered[l],
        };
        raw += binom * mean.powi(k as i32) * mu;
    }
    Ok(raw)
}

// ---------------------------------------------------------------------------
// Edge laws
// ---------------------------------------------------------------------------

fn det_from_table(table: &nalgebra::DMatrix<f64>, grid: &QuadratureGrid) -> f64 {
    let m = grid.len();
    let sqw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let mut sys = nalgebra::DMatrix::<f64>::identity(m, m);
    for i in 0..m {
        for j in 0..m {
            sys[(i, j)] -= sqw[i] * sqw[j] * table[(i, j)];
        }
    }
    sys.lu().determinant()
}

/// GUE Tracy–Widom CDF via the Fredholm determinant of the Airy kernel.
pub fn f_gue(s: f64) -> Result<f64> {
    let grid = make_grid_panels(s, 16.0, 4, 12).map_err(pfaffian_err)?;
    let k = ShiftedAiryKernel::new(0.0)?;
    let table = k.table(&grid.nodes)?;
    Ok(det_from_table(&table, &grid))
}

/// G(s) of the stationary full-space limit law at parameter tau.
fn br_g_fn(s: f64, tau: f64) -> Result<f64> {
    let grid = make_grid_panels(s, 16.0, 4, 12).map_err(pfaffian_err)?;
    let k = ShiftedAiryKernel::new(tau)?;
    let table = k.table(&grid.nodes)?;
    let det = det_from_table(&table, &grid);
    let psi = br_psi_on(tau, &grid.nodes, 0.0)?;
    let phi = br_phi_on(tau, s, &grid.nodes)?;
    let mut next = 0usize;
    let brk = bracket_det_scalar(
        |_, _| {
            let (i, j) = (next / grid.len(), next % grid.len());
            next += 1;
            table[(i, j)]
        },
        &psi,
        &phi,
        &grid,
    );
    Ok(det * br_r(tau, s)? - brk)
}

/// The stationary full-space limit distribution F at (s, tau).
pub fn f_br(s: f64, tau: f64) -> Result<f64> {
    Ok(stencil_derivative(|t| br_g_fn(t, tau), s, 0.01)?.0)
}

/// The limit-family value F^{(δ,u)}(s + δ(2u+δ)) with δ = τ - u, evaluated
/// through the conjugated/shifted kernels (stable for large u).
pub fn limit_via_br_path(s: f64, u: f64, tau: f64, opts: &NumericOpts) -> Result<(f64, f64)> {
    let g = |t: f64| -> Result<f64> {
        let br = br_path_kernel(u, tau)?;
        let cutoff = opts.cutoff.unwrap_or(DEFAULT_ASYMP_CUTOFF);
        let grid = grid_for(t, cutoff, opts, 0.0)?;
        let (left, right) = br_path_borders(&br, &grid)?;
        let pf = fredholm_pf(&br.kernel, &grid).map_err(pfaffian_err)?;
        let brk = bracket_pf(&br.kernel, &left, &right, &grid).map_err(pfaffian_err)?;
        Ok(pf * br_r(-tau, t)? - brk)
    };
    stencil_derivative(g, s, opts.deriv_step)
}

// ---------------------------------------------------------------------------
// Geometric model
// ---------------------------------------------------------------------------

/// P(L ≤ s) of the geometric model as a discrete Fredholm Pfaffian.
pub fn geo_cdf_at(g: &GeoParams, s: i64) -> Result<f64> {
    if s < 0 {
        return Ok(0.0);
    }
    let kern = GeoKernel::new(g, None)?;
    let rate = kern.decay_rate();
    let cutoff = ((30.0 / rate).ceil() as usize).clamp(40, 400);
    let vals: std::sync::Mutex<Option<SpecialError>> = std::sync::Mutex::new(None);
    let pf = fredholm_pf_discrete(
        |k, l| match kern.eval(k, l) {
            Ok(b) => b,
            Err(e) => {
                *vals.lock().unwrap() = Some(e);
                [[0.0; 2]; 2]
            }
        },
        s,
        cutoff,
    )
    .map_err(pfaffian_err)?;
    if let Some(e) = vals.into_inner().unwrap() {
        return Err(e);
    }
    Ok(pf)
}

pub fn cdf_geometric(s_grid: &[i64], g: &GeoParams) -> Result<DistributionCurve> {
    let points: Result<Vec<DistPoint>> = s_grid
        .par_iter()
        .map(|&s| {
            Ok(DistPoint {
                s: s as f64,
                f: geo_cdf_at(g, s)?,
                err: quadrature_error_estimate(),
            })
        })
        .collect();
    Ok(DistributionCurve {
        params: serde_json::json!({
            "model": "geometric", "a": g.a, "b": g.b, "q": g.q, "N": g.size, "n": g.offset,
        }),
        method: serde_json::json!({"kind": "discrete"}),
        points: points?,
    })
}

/// Quantile-spanning evaluation grid from a pilot Monte Carlo run.
pub fn pilot_s_grid(
    model: &crate::sim::ModelParams,
    points: usize,
    lo_q: f64,
    hi_q: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let mc = crate::sim::sample_cdf(model, crate::sim::Target::Plain, 20_000, seed)
        .map_err(|e| SpecialError::Domain(e.to_string()))?;
    Ok((0..points)
        .map(|i| {
            let q = lo_q + (hi_q - lo_q) * i as f64 / (points - 1).max(1) as f64;
            mc.quantile(q)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn f_gue_anchor_and_shape() {
        // independent anchor: truncated Fredholm series oracle lives in the
        // acceptance suite; here the library value against the literature
        // digits and CDF shape
        let v0 = f_gue(0.0).unwrap();
        assert_abs_diff_eq!(v0, 0.9693728283837, epsilon = 5e-7);
        assert!(f_gue(-6.0).unwrap() < 0.01);
        assert!(f_gue(4.0).unwrap() > 0.999);
        let mut prev = 0.0;
        for i in 0..=10 {
            let s = -6.0 + i as f64;
            let v = f_gue(s).unwrap();
            assert!(v >= prev - 1e-9);
            prev = v;
        }
    }

    #[test]
    fn limit_pf_is_a_probability() {
        let opts = NumericOpts::default();
        for (d, u) in [(0.0, 0.5), (-0.5, 0.5), (0.5, 0.5)] {
            let p = AsympParams { delta: d, u };
            let lo = asymp_pf_at(&p, -6.0, &opts).unwrap();
            let hi = asymp_pf_at(&p, 6.0, &opts).unwrap();
            assert!(lo > -1e-4 && lo < 1.0, "low end {lo}");
            assert!(hi > 0.999 && hi < 1.0 + 1e-6, "high end {hi}");
            let mid = asymp_pf_at(&p, 2.0, &opts).unwrap();
            assert!(mid > 0.9 && mid < 1.0, "pf at 2.0 = {mid}");
        }
    }

    #[test]
    fn limit_cdf_shape_and_mean() {
        let opts = NumericOpts::default();
        let p = AsympParams::new(0.3, 0.5).unwrap();
        let s_grid: Vec<f64> = (0..13).map(|i| -5.0 + 10.0 * i as f64 / 12.0).collect();
        let curve = cdf_limit(&s_grid, &p, HVariant::Standard, &opts).unwrap();
        assert!(curve.is_valid_cdf());
        assert!(curve.points[0].f < 0.02);
        assert!(curve.points[12].f > 0.97);
        let mean = moments_limit(&p, 1, &opts).unwrap();
        assert_abs_diff_eq!(mean, 0.3 * (2.0 * 0.5 + 0.3), epsilon = 5e-3);
    }

    #[test]
    fn br_distribution_is_cdf_and_symmetric() {
        for s in [-3.0, -1.0, 0.5, 2.0] {
            let a = f_br(s, 0.4).unwrap();
            let b = f_br(s, -0.4).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-6);
        }
        let mut prev = -1e-9;
        for i in 0..=8 {
            let s = -4.0 + i as f64;
            let v = f_br(s, 0.0).unwrap();
            assert!(v >= prev - 1e-7, "not monotone at {s}");
            prev = v;
        }
        assert!(f_br(-5.0, 0.0).unwrap() < 0.01);
        assert!(f_br(5.0, 0.0).unwrap() > 0.99);
    }
}
