//! Correlation kernel of the geometric-weights model on the integer lattice.
//!
//! Two contour layouts: the reformulated split (separate circles per pole
//! group plus the explicit antisymmetric part E) when the boundary
//! parameters a, b, √q are pairwise distinct, and the plain layout with
//! origin-centered circles otherwise. Entries are conjugated by c^{±k±l}
//! so that everything decays on ℓ²({s+1, s+2, ...}).

use num_complex::Complex64;

use crate::contours::{self, circle, union, Contour};
use crate::dint::DoubleTerm;
use crate::sim::GeoParams;
use crate::special::{c64, sgn, Result, SpecialError};

/// Circle union around real pole clusters: cluster boundaries at relative
/// gaps or intervening excluded poles, and each circle placed to maximize
/// its distances from every pole (log-sum objective).
fn pole_circles_w(enclosed: &[f64], excluded: &[f64], heavy: &[f64], nodes: usize) -> Result<Contour> {
    let mut sorted = enclosed.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sorted.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let gap_rel = |a: f64, b: f64| (b - a) > 0.12 * (1.0 + a.abs());
    let mut clusters: Vec<Vec<f64>> = vec![vec![sorted[0]]];
    for w in sorted.windows(2) {
        if gap_rel(w[0], w[1]) || excluded.iter().any(|&q| q > w[0] && q < w[1]) {
            clusters.push(vec![w[1]]);
        } else {
            clusters.last_mut().unwrap().push(w[1]);
        }
    }
    let all_poles: Vec<f64> = enclosed.iter().chain(excluded).cloned().collect();
    let mut parts = Vec::new();
    for (i, cl) in clusters.iter().enumerate() {
        let mut keep_out: Vec<(f64, f64)> = excluded.iter().map(|&q| (q, 0.8)).collect();
        for (j, other) in clusters.iter().enumerate() {
            if j != i {
                keep_out.extend(other.iter().map(|&q| (q, 0.55)));
            }
        }
        let poles = all_poles.clone();
        let hv = heavy.to_vec();
        let logmag = move |z: Complex64| -> f64 {
            let base: f64 = poles.iter().map(|&p| (z - p).norm().max(1e-12).ln()).sum();
            let extra: f64 = hv.iter().map(|&p| (z - p).norm().max(1e-12).ln()).sum();
            -(base + 4.0 * extra)
        };
        let (c, r) = crate::special::plan_one_circle(cl, &keep_out, logmag)?;
        parts.push(circle(c64(c, 0.0), r, nodes));
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { union(parts) })
}

fn pole_circles(enclosed: &[f64], excluded: &[f64], nodes: usize) -> Result<Contour> {
    pole_circles_w(enclosed, excluded, &[], nodes)
}

type GFun = Box<dyn Fn(f64, Complex64) -> Complex64 + Sync + Send>;

struct GeoTerm {
    dt: DoubleTerm,
    fk: GFun,
    fl: GFun,
}

impl GeoTerm {
    fn eval(&self, k: f64, l: f64) -> Complex64 {
        self.dt.eval(|z| (self.fk)(k, z), |w| (self.fl)(l, w))
    }

    fn table(&self, ks: &[f64]) -> nalgebra::DMatrix<Complex64> {
        self.dt
            .eval_table(ks, ks, |k, z| (self.fk)(k, z), |l, w| (self.fl)(l, w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeoLayout {
    /// split contours with the explicit antisymmetric part (a, b, √q distinct)
    Reformulated,
    /// origin-centered circles, always valid
    Plain,
}

pub struct GeoKernel {
    pub params: GeoParams,
    pub layout: GeoLayout,
    /// conjugation base: entries are scaled by c^{±k±l}
    pub log_c: f64,
    e11: Vec<GeoTerm>,
    e12: Vec<GeoTerm>,
    e22: Vec<GeoTerm>,
    e_contour: Option<Contour>,
}

impl GeoKernel {
    pub fn new(g: &GeoParams, layout_req: Option<GeoLayout>) -> Result<Self> {
        let sq = g.q.sqrt();
        let distinct = (g.a - g.b).abs() > 1e-9
            && (g.a - sq).abs() > 1e-9
            && (g.b - sq).abs() > 1e-9
            && g.a > 0.0;
        let layout = layout_req.unwrap_or(if distinct {
            GeoLayout::Reformulated
        } else {
            GeoLayout::Plain
        });
        if layout == GeoLayout::Reformulated && !distinct {
            return Err(SpecialError::Domain(
                "reformulated contours need a, b, √q pairwise distinct and a > 0".into(),
            ));
        }
        match layout {
            GeoLayout::Reformulated => Self::new_reformulated(g),
            GeoLayout::Plain => Self::new_plain(g),
        }
    }

    fn conj_rate(g: &GeoParams, layout: GeoLayout) -> f64 {
        let sq = g.q.sqrt();
        let zmin = (1.0 / sq).min(1.0 / g.b);
        match layout {
            GeoLayout::Reformulated => {
                let lo = (1.1 * sq.max(g.a).max(g.b)).max(1.0);
                let hi = (0.9 * zmin).min(1.0 / (1.1 * sq.max(g.b)));
                (lo * hi).sqrt()
            }
            GeoLayout::Plain => {
                let r0 = (1.1 * sq.max(g.a).max(g.b)).max(1.05);
                let r11 = 1.0 + 0.70 * (zmin - 1.0);
                (r0 * r11).sqrt()
            }
        }
        .ln()
    }

    fn new_reformulated(g: &GeoParams) -> Result<Self> {
        let sq = g.q.sqrt();
        let (a, b) = (g.a, g.b);
        let nn = g.offset as f64;
        let nm1 = g.size as f64 - 1.0;
        let log_c = Self::conj_rate(g, GeoLayout::Reformulated);
        // z-side fixed factors (log-space), per entry family
        let hb = move |z: Complex64| -> Complex64 {
            // log H(z)B(z)
            nm1 * ((1.0 - sq / z).ln() - (1.0 - sq * z).ln()) + (1.0 - b / z).ln()
                - (1.0 - b * z).ln()
        };
        let fk_of = move |zpart: Box<dyn Fn(Complex64) -> Complex64 + Sync + Send>| -> GFun {
            Box::new(move |k, z| (-(k) * (z.ln() - log_c) + zpart(z)).exp())
        };
        let fl_of = move |wpart: Box<dyn Fn(Complex64) -> Complex64 + Sync + Send>| -> GFun {
            Box::new(move |l, w| ((l) * (w.ln() + log_c) + wpart(w)).exp())
        };
        let fl_of_neg = move |wpart: Box<dyn Fn(Complex64) -> Complex64 + Sync + Send>| -> GFun {
            Box::new(move |l, w| ((l) * (w.ln() - log_c) + wpart(w)).exp())
        };

        let nodes = 384;
        // entry 11: integrand -(w^{l-1}/z^k) h11/(z-w) over (w, z) circles
        let heavy = [sq, 1.0 / sq];
        let zc11 = pole_circles_w(&[1.0 / sq], &[1.0 / b, 1.0, -1.0, sq, b, a], &heavy, nodes)?;
        let zc11b = pole_circles_w(&[1.0 / b], &[1.0 / sq, 1.0, -1.0, sq, b, a], &heavy, nodes)?;
        let wc11 = pole_circles_w(&[sq], &[b, 1.0, -1.0, a, 1.0 / sq, 1.0 / b], &heavy, nodes)?;
        let wc11b = pole_circles_w(&[b], &[sq, 1.0, -1.0, a, 1.0 / sq, 1.0 / b], &heavy, nodes)?;
        let coup11 = move |z: Complex64, w: Complex64| -> Complex64 {
            // remaining rational factors; the w^{-1} folds the l-1 power
            -((z * w - 1.0) * (z - a) * (1.0 - w * a))
                / ((z * z - 1.0) * (1.0 - w * w) * (z - w) * w)
        };
        let z11 = move |z: Complex64| hb(z) + nn * (1.0 - sq * z).ln();
        let w11 = move |w: Complex64| -hb(w) + nn * (1.0 - sq / w).ln();
        let mut e11 = Vec::new();
        for (zc, wc) in [(&zc11, &wc11), (&zc11, &wc11b), (&zc11b, &wc11)] {
            e11.push(GeoTerm {
                dt: DoubleTerm::new(zc, wc, false, coup11)?,
                fk: fk_of(Box::new(z11)),
                fl: fl_of(Box::new(w11)),
            });
        }

        // entry 12
        let zc12 = pole_circles_w(&[1.0 / sq], &[1.0 / b, 1.0, -1.0, sq, a, b], &heavy, nodes)?;
        let zc12b = pole_circles_w(&[1.0 / b], &[1.0 / sq, 1.0, -1.0, sq, a, b], &heavy, nodes)?;
        let wc12 = pole_circles_w(&[sq, a, b], &[1.0, -1.0, 1.0 / sq, 1.0 / b], &heavy, nodes)?;
        let wc12b = pole_circles_w(&[sq, a], &[b, 1.0, -1.0, 1.0 / sq, 1.0 / b], &heavy, nodes)?;
        let coup12 = move |z: Complex64, w: Complex64| -> Complex64 {
            -((z * w - 1.0) * (z - a)) / ((z * z - 1.0) * (w - a) * (z - w) * w)
        };
        let z12 = move |z: Complex64| hb(z) + nn * (1.0 - sq * z).ln();
        let w12 = move |w: Complex64| -hb(w) - nn * (1.0 - sq * w).ln();
        let mut e12 = Vec::new();
        for (zc, wc) in [(&zc12, &wc12), (&zc12b, &wc12b)] {
            e12.push(GeoTerm {
                dt: DoubleTerm::new(zc, wc, false, coup12)?,
                fk: fk_of(Box::new(z12)),
                fl: fl_of_neg(Box::new(w12)),
            });
        }

        // entry 22 (double-integral part; E is added analytically)
        let zc22 = pole_circles_w(&[1.0 / sq, 1.0 / a, 1.0 / b], &[sq, a, b], &heavy, nodes)?;
        let zc22b = pole_circles_w(&[1.0 / sq, 1.0 / b], &[1.0 / a, sq, a, b], &heavy, nodes)?;
        let zc22c = pole_circles_w(&[1.0 / sq, 1.0 / a], &[1.0 / b, sq, a, b], &heavy, nodes)?;
        let wc22 = pole_circles_w(&[sq], &[a, b, 1.0 / sq, 1.0 / a, 1.0 / b], &heavy, nodes)?;
        let wc22b = pole_circles_w(&[a], &[sq, b, 1.0 / sq, 1.0 / a, 1.0 / b], &heavy, nodes)?;
        let wc22c = pole_circles_w(&[b], &[sq, a, 1.0 / sq, 1.0 / a, 1.0 / b], &heavy, nodes)?;
        let coup22 = move |z: Complex64, w: Complex64| -> Complex64 {
            -(z * w - 1.0) / ((w - a) * (1.0 - a * z) * (z - w) * w)
        };
        let z22 = move |z: Complex64| hb(z) - nn * (1.0 - sq / z).ln();
        let w22 = move |w: Complex64| -hb(w) - nn * (1.0 - sq * w).ln();
        let mut e22 = Vec::new();
        for (zc, wc) in [(&zc22, &wc22), (&zc22b, &wc22b), (&zc22c, &wc22c)] {
            e22.push(GeoTerm {
                dt: DoubleTerm::new(zc, wc, false, coup22)?,
                fk: Box::new(move |k, z| (-(k) * (z.ln() + log_c) + z22(z)).exp()),
                fl: Box::new(move |l, w| ((l) * (w.ln() - log_c) + w22(w)).exp()),
            });
        }
        let e_contour = Some(pole_circles(&[1.0 / a, 1.0 / sq], &[a, sq, 0.0], nodes)?);
        Ok(GeoKernel {
            params: *g,
            layout: GeoLayout::Reformulated,
            log_c,
            e11,
            e12,
            e22,
            e_contour,
        })
    }

    fn new_plain(g: &GeoParams) -> Result<Self> {
        let sq = g.q.sqrt();
        let (a, b) = (g.a, g.b);
        let nn = g.size as f64 - g.offset as f64 - 1.0; // √q factors downstairs
        let nm1 = g.size as f64 - 1.0;
        let log_c = Self::conj_rate(g, GeoLayout::Plain);
        let zmin = (1.0 / sq).min(1.0 / b);
        // log F(z) = log(1-b/z) + (N-1)log(1-√q/z) - log(1-bz) - (N-n-1)log(1-√qz)
        let log_f = move |z: Complex64| -> Complex64 {
            (1.0 - b / z).ln() + nm1 * (1.0 - sq / z).ln() - (1.0 - b * z).ln()
                - nn * (1.0 - sq * z).ln()
        };
        let nodes = 512;
        let r11z = 1.0 + 0.70 * (zmin - 1.0);
        let r11w = 1.0 + 0.60 * (zmin - 1.0);
        let c0 = c64(0.0, 0.0);
        let e11 = vec![GeoTerm {
            dt: DoubleTerm::new(&circle(c0, r11z, nodes), &circle(c0, r11w, nodes), false, {
                move |z, w| {
                    (z - w) * (z - a) * (w - a) / ((z * z - 1.0) * (w * w - 1.0) * (z * w - 1.0))
                }
            })?,
            fk: Box::new(move |k, z| (-(k) * (z.ln() - log_c) + log_f(z)).exp()),
            fl: Box::new(move |l, w| (-(l) * (w.ln() - log_c) + log_f(w)).exp()),
        }];
        let r12w = 0.5 * (sq.max(a).max(b) + 1.0);
        let e12 = vec![GeoTerm {
            dt: DoubleTerm::new(&circle(c0, r11z, nodes), &circle(c0, r12w, nodes), false, {
                move |z, w| (z * w - 1.0) * (z - a) / ((z - w) * (z * z - 1.0) * (w - a) * w)
            })?,
            fk: Box::new(move |k, z| (-(k) * (z.ln() - log_c) + log_f(z)).exp()),
            fl: Box::new(move |l, w| ((l) * (w.ln() - log_c) - log_f(w)).exp()),
        }];
        let r0 = (1.1 * sq.max(a).max(b)).max(1.05);
        let e22 = vec![GeoTerm {
            dt: DoubleTerm::new(
                &circle(c0, r0 * 1.02, nodes),
                &circle(c0, r0 / 1.02, nodes),
                false,
                move |z, w| (z - w) / ((z * w - 1.0) * (z - a) * (w - a) * z * w),
            )?,
            fk: Box::new(move |k, z| ((k) * (z.ln() - log_c) - log_f(z)).exp()),
            fl: Box::new(move |l, w| ((l) * (w.ln() - log_c) - log_f(w)).exp()),
        }];
        Ok(GeoKernel {
            params: *g,
            layout: GeoLayout::Plain,
            log_c,
            e11,
            e12,
            e22,
            e_contour: None,
        })
    }

    /// The explicit antisymmetric part (reformulated layout), conjugated.
    pub fn e_part(&self, k: i64, l: i64) -> Result<f64> {
        let contour = match &self.e_contour {
            Some(c) => c,
            None => return Ok(0.0),
        };
        let s = sgn((k - l) as f64);
        if s == 0.0 {
            return Ok(0.0);
        }
        // antisymmetry: evaluate on the decaying side k > l
        let (kk, ll, flip) = if k > l { (k, l, 1.0) } else { (l, k, -1.0) };
        let g = self.params;
        let sq = g.q.sqrt();
        let nn = g.offset as f64;
        let v = contours::integrate(
            |z| {
                (((ll - kk) as f64) * z.ln()
                    - nn * ((1.0 - sq / z).ln() + (1.0 - sq * z).ln()))
                .exp()
                    * (1.0 / z - z)
                    / ((1.0 - g.a * z) * (z - g.a))
            },
            contour,
        )?;
        let im_ok = v.im.abs() <= 1e-9 * (1.0 + v.re.abs());
        if !im_ok {
            return Err(SpecialError::ResidualImaginary { re: v.re, im: v.im });
        }
        Ok(-flip * v.re * (-self.log_c * (k + l) as f64).exp())
    }

    /// Conjugated kernel block at integer sites (k, l ≥ 1).
    pub fn eval(&self, k: i64, l: i64) -> Result<[[f64; 2]; 2]> {
        let sum = |terms: &[GeoTerm], a: f64, b: f64| -> Result<f64> {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in terms {
                acc += t.eval(a, b);
            }
            if acc.im.abs() > 1e-9 * (1.0 + acc.re.abs()) {
                return Err(SpecialError::ResidualImaginary { re: acc.re, im: acc.im });
            }
            Ok(acc.re)
        };
        let (kf, lf) = (k as f64, l as f64);
        let k11 = sum(&self.e11, kf, lf)?;
        let k12 = sum(&self.e12, kf, lf)?;
        let k21 = -sum(&self.e12, lf, kf)?;
        let k22 = sum(&self.e22, kf, lf)? + self.e_part(k, l)?;
        Ok([[k11, k12], [k21, k22]])
    }

    /// Site decay rate of the conjugated entries (for cutoff choices).
    pub fn decay_rate(&self) -> f64 {
        let g = self.params;
        let sq = g.q.sqrt();
        let zmin = (1.0 / sq).min(1.0 / g.b);
        match self.layout {
            GeoLayout::Reformulated => {
                (self.log_c).min((0.9 * zmin).ln() - self.log_c).max(0.05)
            }
            GeoLayout::Plain => {
                let r0 = (1.1 * sq.max(g.a).max(g.b)).max(1.05);
                let r11 = 1.0 + 0.70 * (zmin - 1.0);
                (self.log_c - r0.ln()).min(r11.ln() - self.log_c).max(0.02)
            }
        }
    }
}
