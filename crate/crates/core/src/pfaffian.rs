//! Dense Pfaffians and Fredholm Pfaffians of 2×2 matrix kernels.
//!
//! The dense routine is skew-symmetric Gaussian elimination with partial
//! pivoting (Parlett–Reid style): each step is a congruence, so the Pfaffian
//! is the product of the super-diagonal pivots times the permutation sign.
//!
//! Fredholm Pfaffians over L²(s, s+T) are Nyström discretizations: the
//! 2M×2M antisymmetric matrix with 2×2 block (i,j) equal to
//! √(wᵢwⱼ)·K(xᵢ,xⱼ), and pf(J - A) approximates pf(J - K). The √w weighting
//! is itself a conjugation, so it does not move the Pfaffian.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::quad::{gauss_legendre_on, gauss_legendre_panels};

#[derive(Debug, Error)]
pub enum PfaffianError {
    #[error("matrix dimension {0} is odd")]
    OddDimension(usize),
    #[error("matrix is not antisymmetric: ‖A+Aᵀ‖ = {0:.3e} exceeds tolerance")]
    NotAntisymmetric(f64),
    #[error("grid parameters invalid: {0}")]
    BadGrid(String),
    #[error("discretized resolvent system is singular (grid too coarse or bad region)")]
    SingularSystem,
}

pub type Result<T> = std::result::Result<T, PfaffianError>;

/// Pfaffian value in guarded form: `value = sign * exp(log_scale)` when the
/// product over- or underflows, with `pivot_growth` as a conditioning hint.
#[derive(Debug, Clone, Copy)]
pub struct PfaffianResult {
    pub value: f64,
    pub log_scale: f64,
    pub sign: f64,
    pub pivot_growth: f64,
}

/// Quadrature discretization of L²(s, s+T), nodes strictly inside the
/// interval, plus the conjugation exponent the kernel was evaluated with.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub base: f64,
    pub cutoff: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub mu: f64,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∫ f over the grid.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss–Legendre grid on (s, s+cutoff).
pub fn make_grid(s: f64, cutoff: f64, m: usize) -> Result<QuadratureGrid> {
    if m < 4 || cutoff <= 0.0 {
        return Err(PfaffianError::BadGrid(format!(
            "need m >= 4 and cutoff > 0, got m = {m}, cutoff = {cutoff}"
        )));
    }
    let (nodes, weights) = gauss_legendre_on(m, s, s + cutoff).into_iter().unzip();
    Ok(QuadratureGrid { base: s, cutoff, nodes, weights, mu: 0.0 })
}

/// Composite grid: `panels` panels of `m` Gauss–Legendre nodes each. Kernels
/// with a sgn(x-y) part are only piecewise smooth across the diagonal, and
/// panels keep the quadrature error of those kinks local.
pub fn make_grid_panels(s: f64, cutoff: f64, panels: usize, m: usize) -> Result<QuadratureGrid> {
    if m < 2 || panels < 1 || cutoff <= 0.0 {
        return Err(PfaffianError::BadGrid(format!(
            "need m >= 2, panels >= 1, cutoff > 0; got m = {m}, panels = {panels}, cutoff = {cutoff}"
        )));
    }
    let (nodes, weights) = gauss_legendre_panels(m, s, s + cutoff, panels)
        .into_iter()
        .unzip();
    Ok(QuadratureGrid { base: s, cutoff, nodes, weights, mu: 0.0 })
}

/// Pfaffian of a dense antisymmetric matrix, O(n³).
///
/// The input is antisymmetrized as (A - Aᵀ)/2 after checking that the
/// violation is small relative to the matrix scale.
pub fn pfaffian_dense(a: &DMatrix<f64>) -> Result<PfaffianResult> {
    let n = a.nrows();
    if n != a.ncols() || n % 2 == 1 {
        return Err(PfaffianError::OddDimension(n.max(a.ncols())));
    }
    if n == 0 {
        return Ok(PfaffianResult { value: 1.0, log_scale: 0.0, sign: 1.0, pivot_growth: 1.0 });
    }
    let scale = a.amax();
    let viol = (a + a.transpose()).amax();
    if scale > 0.0 && viol > 1e-10 * scale {
        return Err(PfaffianError::NotAntisymmetric(viol));
    }
    // flat row-major working copy of (A - Aᵀ)/2
    let mut m = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = 0.5 * (a[(i, j)] - a[(j, i)]);
        }
    }
    let idx = |i: usize, j: usize| i * n + j;

    let mut sign = 1.0f64;
    let mut log_sum = 0.0f64;
    let mut max_piv: f64 = 0.0;
    let mut min_piv = f64::INFINITY;
    for k in (0..n - 1).step_by(2) {
        // pivot: largest |m[j, k]| for j > k
        let mut p = k + 1;
        let mut best = m[idx(k + 1, k)].abs();
        for j in k + 2..n {
            let v = m[idx(j, k)].abs();
            if v > best {
                best = v;
                p = j;
            }
        }
        if best == 0.0 {
            return Ok(PfaffianResult {
                value: 0.0,
                log_scale: f64::NEG_INFINITY,
                sign: 0.0,
                pivot_growth: f64::INFINITY,
            });
        }
        if p != k + 1 {
            for c in 0..n {
                m.swap(idx(k + 1, c), idx(p, c));
            }
            for r in 0..n {
                m.swap(idx(r, k + 1), idx(r, p));
            }
            sign = -sign;
        }
        let piv = m[idx(k + 1, k)];
        max_piv = max_piv.max(piv.abs());
        min_piv = min_piv.min(piv.abs());
        // pf picks up the super-diagonal entry m[k, k+1] = -piv
        let entry = m[idx(k, k + 1)];
        sign *= entry.signum();
        log_sum += entry.abs().ln();
        // congruence: zero out column k below row k+1 (and row k by symmetry)
        for j in k + 2..n {
            let f = m[idx(j, k)] / piv;
            if f == 0.0 {
                continue;
            }
            for c in k..n {
                m[idx(j, c)] -= f * m[idx(k + 1, c)];
            }
            for r in k..n {
                m[idx(r, j)] -= f * m[idx(r, k + 1)];
            }
        }
    }
    Ok(PfaffianResult {
        value: sign * log_sum.exp(),
        log_scale: log_sum,
        sign,
        pivot_growth: if min_piv > 0.0 { max_piv / min_piv } else { f64::INFINITY },
    })
}

/// Anything that can produce the 2×2 kernel block at a pair of points.
/// Implementations are expected to be pure and thread-safe.
pub trait KernelEval: Sync {
    fn eval(&self, x: f64, y: f64) -> [[f64; 2]; 2];

    /// Full M×M table of blocks on a node set. The default is pointwise;
    /// implementations override it when a factorized assembly is cheaper.
    fn eval_table(&self, xs: &[f64]) -> Vec<[[f64; 2]; 2]> {
        let m = xs.len();
        let mut out = Vec::with_capacity(m * m);
        for &x in xs {
            for &y in xs {
                out.push(self.eval(x, y));
            }
        }
        out
    }
}

/// The 2M×2M Nyström matrix A with block (i,j) = √(wᵢwⱼ) K(xᵢ, xⱼ).
pub fn assemble_blocks<K: KernelEval + ?Sized>(kern: &K, grid: &QuadratureGrid) -> DMatrix<f64> {
    let m = grid.len();
    let table = kern.eval_table(&grid.nodes);
    let sqw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let mut a = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let b = table[i * m + j];
            let f = sqw[i] * sqw[j];
            a[(2 * i, 2 * j)] = f * b[0][0];
            a[(2 * i, 2 * j + 1)] = f * b[0][1];
            a[(2 * i + 1, 2 * j)] = f * b[1][0];
            a[(2 * i + 1, 2 * j + 1)] = f * b[1][1];
        }
    }
    // enforce exact antisymmetry (kernel evaluations carry ~1e-14 noise)
    let at = a.transpose();
    0.5 * (a - at)
}

fn j_matrix(m: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        j[(2 * i, 2 * i + 1)] = 1.0;
        j[(2 * i + 1, 2 * i)] = -1.0;
    }
    j
}

/// pf(J - K) over L²(s, s+T)², with K already conjugated so every entry
/// decays on the grid.
pub fn fredholm_pf<K: KernelEval + ?Sized>(kern: &K, grid: &QuadratureGrid) -> Result<f64> {
    let a = assemble_blocks(kern, grid);
    let jm = j_matrix(grid.len());
    Ok(pfaffian_dense(&(jm - a))?.value)
}

/// pf(J - K) on ℓ²({s+1, s+2, …}) truncated at `cutoff` sites, unit weights.
pub fn fredholm_pf_discrete(
    kern: impl Fn(i64, i64) -> [[f64; 2]; 2],
    s: i64,
    cutoff: usize,
) -> Result<f64> {
    let m = cutoff;
    let mut a = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let b = kern(s + 1 + i as i64, s + 1 + j as i64);
            a[(2 * i, 2 * j)] = b[0][0];
            a[(2 * i, 2 * j + 1)] = b[0][1];
            a[(2 * i + 1, 2 * j)] = b[1][0];
            a[(2 * i + 1, 2 * j + 1)] = b[1][1];
        }
    }
    let at = a.transpose();
    let a = 0.5 * (a - at);
    Ok(pfaffian_dense(&(j_matrix(m) - a))?.value)
}

/// Border vector pair sampled on the grid nodes.
#[derive(Debug, Clone)]
pub struct BorderPair {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl BorderPair {
    pub fn sample(grid: &QuadratureGrid, mut f1: impl FnMut(f64) -> f64, mut f2: impl FnMut(f64) -> f64) -> Self {
        BorderPair {
            first: grid.nodes.iter().map(|&x| f1(x)).collect(),
            second: grid.nodes.iter().map(|&x| f2(x)).collect(),
        }
    }

    fn sup(&self) -> f64 {
        self.first
            .iter()
            .chain(&self.second)
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// pf(J-K)·⟨(c,d) | (1 - J⁻¹K)⁻¹ (a,b)⟩ as a difference of two Fredholm
/// Pfaffians: the rank-two augmentation |b,-a⟩⟨c,d| + |c,d⟩⟨-b,a| keeps the
/// matrix antisymmetric and avoids any operator inversion.
///
/// `left` is (c, d); `right` is (a, b).
pub fn bracket_pf<K: KernelEval + ?Sized>(
    kern: &K,
    left: &BorderPair,
    right: &BorderPair,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let a_mat = assemble_blocks(kern, grid);
    let jm = j_matrix(grid.len());
    let pf_plain = pfaffian_dense(&(&jm - &a_mat))?.value;

    let sup_r = right.sup();
    let sup_l = left.sup();
    if sup_r == 0.0 || sup_l == 0.0 {
        return Ok(0.0);
    }
    // balance the two rank-one columns so the augmented matrix does not mix
    // wildly different scales; the bracket is invariant under this rescaling
    let lambda = (sup_r / sup_l).sqrt();
    let m = grid.len();
    let sqw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let mut aug = a_mat;
    for i in 0..m {
        let (ai, bi) = (right.first[i] / lambda, right.second[i] / lambda);
        let (ci, di) = (left.first[i] * lambda, left.second[i] * lambda);
        for j in 0..m {
            let (aj, bj) = (right.first[j] / lambda, right.second[j] / lambda);
            let (cj, dj) = (left.first[j] * lambda, left.second[j] * lambda);
            let f = sqw[i] * sqw[j];
            // |b,-a⟩⟨c,d| + |c,d⟩⟨-b,a|
            aug[(2 * i, 2 * j)] += f * (bi * cj - ci * bj);
            aug[(2 * i, 2 * j + 1)] += f * (bi * dj + ci * aj);
            aug[(2 * i + 1, 2 * j)] += f * (-ai * cj - di * bj);
            aug[(2 * i + 1, 2 * j + 1)] += f * (-ai * dj + di * aj);
        }
    }
    let pf_aug = pfaffian_dense(&(jm - aug))?.value;
    Ok(pf_plain - pf_aug)
}

/// ⟨(c,d) | (1 - J⁻¹K)⁻¹ (a,b)⟩ by a direct Nyström linear solve.
/// Cross-check oracle for `bracket_pf`; not used in production paths.
pub fn resolvent_inner<K: KernelEval + ?Sized>(
    kern: &K,
    left: &BorderPair,
    right: &BorderPair,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let m = grid.len();
    let table = kern.eval_table(&grid.nodes);
    // (J⁻¹K)(x,y) = [[-K21, -K22], [K11, K12]], Nyström-weighted by w_j
    let mut sys = DMatrix::identity(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let b = table[i * m + j];
            let w = grid.weights[j];
            sys[(2 * i, 2 * j)] -= -b[1][0] * w;
            sys[(2 * i, 2 * j + 1)] -= -b[1][1] * w;
            sys[(2 * i + 1, 2 * j)] -= b[0][0] * w;
            sys[(2 * i + 1, 2 * j + 1)] -= b[0][1] * w;
        }
    }
    let mut rhs = DMatrix::zeros(2 * m, 1);
    for j in 0..m {
        rhs[(2 * j, 0)] = right.first[j];
        rhs[(2 * j + 1, 0)] = right.second[j];
    }
    let lu = sys.lu();
    let sol = lu.solve(&rhs).ok_or(PfaffianError::SingularSystem)?;
    let mut acc = 0.0;
    for i in 0..m {
        acc += grid.weights[i] * (left.first[i] * sol[(2 * i, 0)] + left.second[i] * sol[(2 * i + 1, 0)]);
    }
    Ok(acc)
}

/// det(1 - J⁻¹K) on the grid (block Fredholm determinant), for pf² = det
/// cross-checks.
pub fn fredholm_det_block<K: KernelEval + ?Sized>(kern: &K, grid: &QuadratureGrid) -> f64 {
    let m = grid.len();
    let table = kern.eval_table(&grid.nodes);
    let mut sys = DMatrix::identity(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let b = table[i * m + j];
            let w = grid.weights[j];
            sys[(2 * i, 2 * j)] -= -b[1][0] * w;
            sys[(2 * i, 2 * j + 1)] -= -b[1][1] * w;
            sys[(2 * i + 1, 2 * j)] -= b[0][0] * w;
            sys[(2 * i + 1, 2 * j + 1)] -= b[0][1] * w;
        }
    }
    sys.lu().determinant()
}

/// Scalar Fredholm determinant det(1 - K) on L²(s, s+T) with the symmetric
/// √w weighting.
pub fn fredholm_det_scalar(mut k: impl FnMut(f64, f64) -> f64, grid: &QuadratureGrid) -> f64 {
    let m = grid.len();
    let sqw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let mut sys = DMatrix::identity(m, m);
    for i in 0..m {
        for j in 0..m {
            sys[(i, j)] -= sqw[i] * sqw[j] * k(grid.nodes[i], grid.nodes[j]);
        }
    }
    sys.lu().determinant()
}

/// det(1-K)·⟨ψ|(1-K)⁻¹φ⟩ = det(1-K) - det(1-K-|φ⟩⟨ψ|), the scalar analogue
/// of `bracket_pf`.
pub fn bracket_det_scalar(
    mut k: impl FnMut(f64, f64) -> f64,
    psi: &[f64],
    phi: &[f64],
    grid: &QuadratureGrid,
) -> f64 {
    let m = grid.len();
    let sqw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let mut plain = DMatrix::<f64>::identity(m, m);
    let mut aug = DMatrix::<f64>::identity(m, m);
    for i in 0..m {
        for j in 0..m {
            let f = sqw[i] * sqw[j];
            let kv = f * k(grid.nodes[i], grid.nodes[j]);
            plain[(i, j)] -= kv;
            aug[(i, j)] -= kv + f * phi[i] * psi[j];
        }
    }
    plain.lu().determinant() - aug.lu().determinant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_antisym(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = rng.gen_range(-1.0..1.0);
                a[(i, j)] = v;
                a[(j, i)] = -v;
            }
        }
        a
    }

    #[test]
    fn pfaffian_2x2() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 7.0, -7.0, 0.0]);
        assert_abs_diff_eq!(pfaffian_dense(&a).unwrap().value, 7.0, epsilon = 1e-14);
    }

    #[test]
    fn pfaffian_4x4_classical_expansion() {
        // upper entries (a,b,c,d,e,f) = (1..6): pf = af - be + cd = 8
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 2.0, 3.0, //
                -1.0, 0.0, 4.0, 5.0, //
                -2.0, -4.0, 0.0, 6.0, //
                -3.0, -5.0, -6.0, 0.0,
            ],
        );
        assert_abs_diff_eq!(pfaffian_dense(&a).unwrap().value, 8.0, epsilon = 1e-13);
    }

    #[test]
    fn pfaffian_squared_is_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in (2..=40).step_by(2) {
            let a = random_antisym(n, &mut rng);
            let pf = pfaffian_dense(&a).unwrap().value;
            let det = a.clone().lu().determinant();
            assert!(
                (pf * pf - det).abs() <= 1e-8 * det.abs().max(1e-12),
                "n={n}: pf²={} det={}",
                pf * pf,
                det
            );
        }
    }

    #[test]
    fn odd_dimension_and_symmetry_violations_are_errors() {
        let a = DMatrix::zeros(3, 3);
        assert!(matches!(pfaffian_dense(&a), Err(PfaffianError::OddDimension(3))));
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(pfaffian_dense(&b), Err(PfaffianError::NotAntisymmetric(_))));
    }

    #[test]
    fn singular_matrix_gives_zero_with_breakdown_flag() {
        let a = DMatrix::zeros(4, 4);
        let r = pfaffian_dense(&a).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.pivot_growth.is_infinite());
    }

    #[test]
    fn pfaffian_of_congruence_with_permutation() {
        // pf(BABᵀ) = det(B)·pf(A) on a random case
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_antisym(6, &mut rng);
        let mut b = DMatrix::zeros(6, 6);
        for i in 0..6 {
            for j in 0..6 {
                b[(i, j)] = rng.gen_range(-1.0..1.0);
            }
        }
        let lhs = pfaffian_dense(&(&b * &a * b.transpose())).unwrap().value;
        let rhs = b.clone().lu().determinant() * pfaffian_dense(&a).unwrap().value;
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn grid_reproduces_flat_and_exponential_integrals() {
        let g = make_grid(0.0, 12.0, 48).unwrap();
        assert_abs_diff_eq!(g.integrate(|_| 1.0), 12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.integrate(|x| (-x).exp()), 1.0 - (-12.0f64).exp(), epsilon = 1e-12);
        // degree 2m-1 exactness on the shifted interval
        let g4 = make_grid(2.0, 1.0, 4).unwrap();
        let exact = (3.0f64.powi(8) - 2.0f64.powi(8)) / 8.0;
        assert_abs_diff_eq!(g4.integrate(|x| x.powi(7)), exact, epsilon = 1e-9);
        // nodes strictly inside
        assert!(g.nodes.iter().all(|&x| x > 0.0 && x < 12.0));
        let gp = make_grid_panels(1.0, 10.0, 7, 6).unwrap();
        assert_abs_diff_eq!(gp.integrate(|_| 1.0), 10.0, epsilon = 1e-12);
    }

    struct TestKernel<F: Fn(f64, f64) -> [[f64; 2]; 2] + Sync>(F);
    impl<F: Fn(f64, f64) -> [[f64; 2]; 2] + Sync> KernelEval for TestKernel<F> {
        fn eval(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
            (self.0)(x, y)
        }
    }

    #[test]
    fn zero_kernel_fredholm_pfaffian_is_one() {
        let g = make_grid(0.0, 5.0, 16).unwrap();
        let k = TestKernel(|_, _| [[0.0, 0.0], [0.0, 0.0]]);
        assert_abs_diff_eq!(fredholm_pf(&k, &g).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn symmetric_offdiagonal_kernel_reduces_to_scalar_determinant() {
        // K12(x,y) = k(x,y) symmetric, K11 = K22 = 0:
        // pf(J-K) = det(1 - k) on the same grid.
        let g = make_grid(0.0, 6.0, 24).unwrap();
        let k12 = |x: f64, y: f64| 0.7 * (-(x + y)).exp();
        let k = TestKernel(move |x, y| [[0.0, k12(x, y)], [-k12(x, y), 0.0]]);
        let pf = fredholm_pf(&k, &g).unwrap();
        let det = fredholm_det_scalar(k12, &g);
        assert_abs_diff_eq!(pf, det, epsilon = 1e-10);
        // rank-one k: det(1-k) = 1 - ∫0.7 e^{-2x} dx = 1 - 0.35(1-e^{-12})
        assert_abs_diff_eq!(pf, 1.0 - 0.35 * (1.0 - (-12.0f64).exp()), epsilon = 1e-10);
    }

    #[test]
    fn pf_squared_matches_block_determinant() {
        let g = make_grid(0.0, 6.0, 20).unwrap();
        let k = TestKernel(|x: f64, y: f64| {
            let e = (-(x * x + y * y) / 4.0).exp();
            [[(x - y) * e, e + 0.2 * x * y * e], [-(e + 0.2 * x * y * e), 0.3 * (x - y) * e]]
        });
        let pf = fredholm_pf(&k, &g).unwrap();
        let det = fredholm_det_block(&k, &g);
        assert!((pf * pf - det).abs() < 1e-8 * det.abs().max(1.0));
    }

    #[test]
    fn conjugation_leaves_discrete_pfaffian_invariant() {
        let g = make_grid(0.0, 8.0, 24).unwrap();
        let base = |x: f64, y: f64| {
            let e = (-(x + y) / 2.0).exp();
            [[(x - y) * e, e], [-e, 0.1 * (y - x) * e]]
        };
        let k0 = TestKernel(base);
        let pf0 = fredholm_pf(&k0, &g).unwrap();
        for mu in [0.2, 0.3] {
            let k = TestKernel(move |x: f64, y: f64| {
                let b = base(x, y);
                [
                    [b[0][0] * (mu * (x + y)).exp(), b[0][1] * (mu * (x - y)).exp()],
                    [b[1][0] * (-mu * (x - y)).exp(), b[1][1] * (-mu * (x + y)).exp()],
                ]
            });
            let pf = fredholm_pf(&k, &g).unwrap();
            assert_abs_diff_eq!(pf, pf0, epsilon = 1e-9);
        }
    }

    #[test]
    fn cyclic_identity_for_finite_rank_factors() {
        // pf(J + λ J A B) = pf(J' + λ J' B A) with B = J' Aᵀ J, which makes
        // both matrices antisymmetric for any A.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let big = 20usize; // 2M
        for &k in &[1usize, 2, 3] {
            let small = 2 * k;
            let mut a = DMatrix::<f64>::zeros(big, small);
            for i in 0..big {
                for j in 0..small {
                    a[(i, j)] = rng.gen_range(-1.0..1.0);
                }
            }
            let jb = {
                let mut j = DMatrix::zeros(big, big);
                for i in 0..big / 2 {
                    j[(2 * i, 2 * i + 1)] = 1.0;
                    j[(2 * i + 1, 2 * i)] = -1.0;
                }
                j
            };
            let js = {
                let mut j = DMatrix::zeros(small, small);
                for i in 0..k {
                    j[(2 * i, 2 * i + 1)] = 1.0;
                    j[(2 * i + 1, 2 * i)] = -1.0;
                }
                j
            };
            let b = &js * a.transpose() * &jb;
            for &lambda in &[0.3, 1.0] {
                let lhs = pfaffian_dense(&(&jb + lambda * &jb * &a * &b)).unwrap().value;
                let rhs = pfaffian_dense(&(&js + lambda * &js * &b * &a)).unwrap().value;
                assert!(
                    (lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0),
                    "k={k} λ={lambda}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn bracket_pf_agrees_with_resolvent_solve() {
        let g = make_grid(0.0, 8.0, 32).unwrap();
        let k = TestKernel(|x: f64, y: f64| {
            let e = (-(x + y) / 2.0).exp();
            [[0.1 * (x - y) * e, 0.8 * e], [-0.8 * e, 0.05 * (y - x) * e]]
        });
        let left = BorderPair::sample(&g, |x| (-x).exp(), |x| (-0.5 * x).exp() * x);
        let right = BorderPair::sample(&g, |x| (-0.7 * x).exp(), |x| (-x * x / 3.0).exp());
        let prod = bracket_pf(&k, &left, &right, &g).unwrap();
        let pf = fredholm_pf(&k, &g).unwrap();
        let inner = resolvent_inner(&k, &left, &right, &g).unwrap();
        assert_abs_diff_eq!(prod, pf * inner, epsilon = 1e-7 * inner.abs().max(1.0));
    }

    #[test]
    fn bracket_pf_zero_right_vector_vanishes() {
        let g = make_grid(0.0, 4.0, 12).unwrap();
        let k = TestKernel(|x: f64, y: f64| [[0.0, (-(x + y)).exp()], [-(-(x + y) as f64).exp(), 0.0]]);
        let left = BorderPair::sample(&g, |x| x, |x| x * x);
        let right = BorderPair::sample(&g, |_| 0.0, |_| 0.0);
        assert_eq!(bracket_pf(&k, &left, &right, &g).unwrap(), 0.0);
    }

    #[test]
    fn bracket_augmentation_of_zero_kernel_on_two_nodes() {
        // K = 0 on a 2-node grid: bracket = ⟨c|a⟩ + ⟨d|b⟩ by direct expansion
        let g = make_grid(0.0, 2.0, 4).unwrap();
        let k = TestKernel(|_, _| [[0.0; 2]; 2]);
        let left = BorderPair::sample(&g, |x| 1.0 + x, |x| x);
        let right = BorderPair::sample(&g, |x| 2.0 - x, |x| x * 0.5);
        let got = bracket_pf(&k, &left, &right, &g).unwrap();
        let want = g.integrate(|x| (1.0 + x) * (2.0 - x)) + g.integrate(|x| x * x * 0.5);
        assert_abs_diff_eq!(got, want, epsilon = 1e-10);
    }

    #[test]
    fn resolvent_inner_zero_kernel_is_plain_inner_product() {
        let g = make_grid(1.0, 3.0, 16).unwrap();
        let k = TestKernel(|_, _| [[0.0; 2]; 2]);
        let left = BorderPair::sample(&g, |x| x.sin(), |x| x.cos());
        let right = BorderPair::sample(&g, |x| x, |x| 1.0 / x);
        let got = resolvent_inner(&k, &left, &right, &g).unwrap();
        let want = g.integrate(|x| x.sin() * x) + g.integrate(|x| x.cos() / x);
        assert_abs_diff_eq!(got, want, epsilon = 1e-12);
    }

    #[test]
    fn discrete_pfaffian_zero_kernel_is_one() {
        let v = fredholm_pf_discrete(|_, _| [[0.0; 2]; 2], 3, 17).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
    }
}
