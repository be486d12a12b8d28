//! Separable double contour integrals.
//!
//! Every double integral appearing in the matrix kernels has the shape
//!
//!   ∮∮ fx(x, z) · c(z, w) · fy(y, w) dz dw / (2πi)²
//!
//! where only `c` couples the two variables. Discretized, that is
//! u(x)ᵀ C v(y) with C[i,j] = wz_i·c(z_i, w_j)·ww_j precomputed once per
//! contour pair, so a full M×M kernel table is two thin matrix products
//! instead of M²·(nodes²) integrand evaluations.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::contours::Contour;

pub struct DoubleTerm {
    z_points: Vec<Complex64>,
    w_points: Vec<Complex64>,
    coupling: DMatrix<Complex64>,
}

impl DoubleTerm {
    /// Precompute the coupling matrix. `check_sep` enforces a minimal
    /// node separation when `c` contains a 1/(z-w) factor.
    pub fn new(
        cz: &Contour,
        cw: &Contour,
        check_sep: bool,
        mut c: impl FnMut(Complex64, Complex64) -> Complex64,
    ) -> crate::contours::Result<Self> {
        let zn = cz.nodes();
        let wn = cw.nodes();
        if check_sep {
            let required = 0.05 * cz.extent().max(cw.extent());
            let mut min_sep = f64::INFINITY;
            for &(z, _) in zn {
                for &(w, _) in wn {
                    min_sep = min_sep.min((z - w).norm());
                }
            }
            if min_sep < required {
                return Err(crate::contours::ContourError::ContourCollision { min_sep, required });
            }
        }
        let mut coupling = DMatrix::zeros(zn.len(), wn.len());
        for (i, &(z, wz)) in zn.iter().enumerate() {
            for (j, &(w, ww)) in wn.iter().enumerate() {
                coupling[(i, j)] = wz * c(z, w) * ww;
            }
        }
        Ok(DoubleTerm {
            z_points: zn.iter().map(|&(z, _)| z).collect(),
            w_points: wn.iter().map(|&(w, _)| w).collect(),
            coupling,
        })
    }

    pub fn z_points(&self) -> &[Complex64] {
        &self.z_points
    }

    pub fn w_points(&self) -> &[Complex64] {
        &self.w_points
    }

    /// Single value u(x)ᵀ C v(y).
    pub fn eval(
        &self,
        mut fx: impl FnMut(Complex64) -> Complex64,
        mut fy: impl FnMut(Complex64) -> Complex64,
    ) -> Complex64 {
        let u: Vec<Complex64> = self.z_points.iter().map(|&z| fx(z)).collect();
        let v: Vec<Complex64> = self.w_points.iter().map(|&w| fy(w)).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &ui) in u.iter().enumerate() {
            if ui == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut inner = Complex64::new(0.0, 0.0);
            for (j, &vj) in v.iter().enumerate() {
                inner += self.coupling[(i, j)] * vj;
            }
            acc += ui * inner;
        }
        acc
    }

    /// Full table: out[a][b] = u(xs[a])ᵀ C v(ys[b]) as a dense matrix.
    pub fn eval_table(
        &self,
        xs: &[f64],
        ys: &[f64],
        mut fx: impl FnMut(f64, Complex64) -> Complex64,
        mut fy: impl FnMut(f64, Complex64) -> Complex64,
    ) -> DMatrix<Complex64> {
        let mut u = DMatrix::zeros(xs.len(), self.z_points.len());
        for (a, &x) in xs.iter().enumerate() {
            for (i, &z) in self.z_points.iter().enumerate() {
                u[(a, i)] = fx(x, z);
            }
        }
        let mut v = DMatrix::zeros(self.w_points.len(), ys.len());
        for (b, &y) in ys.iter().enumerate() {
            for (j, &w) in self.w_points.iter().enumerate() {
                v[(j, b)] = fy(y, w);
            }
        }
        &u * &self.coupling * v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contours::{circle, make_circle, PoleSpec};
    use approx::assert_abs_diff_eq;

    #[test]
    fn matches_direct_tensor_quadrature() {
        let cz = make_circle(&PoleSpec::new(&[0.5], &[]), 48).unwrap();
        let cw = make_circle(&PoleSpec::new(&[-0.5], &[]), 48).unwrap();
        let term = DoubleTerm::new(&cz, &cw, true, |z, w| 1.0 / (z - w)).unwrap();
        let x = 1.3;
        let y = 0.7;
        let got = term.eval(|z| (-x * z).exp(), |w| (y * w).exp());
        let want = crate::contours::integrate2(
            |z, w| (-x * z).exp() * (y * w).exp() / (z - w),
            &cz,
            &cw,
            true,
        )
        .unwrap();
        assert_abs_diff_eq!((got - want).norm(), 0.0, epsilon = 1e-13);
        // residue oracle: inner pole only at z = 1/2 (w-circle separated),
        // ∮∮ e^{-xz} e^{yw} / (z-w) picks no w-pole: value is analytic in w
        // inside Γ_{-1/2} → 0.
        assert_abs_diff_eq!(got.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn table_matches_pointwise() {
        let cz = circle(Complex64::new(0.5, 0.0), 0.3, 32);
        let cw = circle(Complex64::new(-0.5, 0.0), 0.3, 32);
        let term = DoubleTerm::new(&cz, &cw, false, |z, w| z * w + 1.0).unwrap();
        let xs = [0.1, 0.5, 2.0];
        let ys = [0.3, 0.9];
        let table = term.eval_table(
            &xs,
            &ys,
            |x, z| (-x * z).exp(),
            |y, w| (y * w).exp(),
        );
        for (a, &x) in xs.iter().enumerate() {
            for (b, &y) in ys.iter().enumerate() {
                let p = term.eval(|z| (-x * z).exp(), |w| (y * w).exp());
                assert_abs_diff_eq!((table[(a, b)] - p).norm(), 0.0, epsilon = 1e-13);
            }
        }
    }
}
