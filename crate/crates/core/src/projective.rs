//! Desk-scale curved testbed: H^0(CP^n, O(p)) with the Fubini-Study metric,
//! jets along a point, a linear CP^1 in CP^2, or a conic, minimal-norm
//! extension, multiplicative defect, jet map, and Bergman-type projectors.
//!
//! Sections are stored as coefficient vectors over the homogeneous monomial
//! basis. The L2 Gram of that basis is diagonal with exact rational entries
//! alpha!/(p+n)! (torus-action orthogonality plus iterated Beta reduction of
//! the chart integral); the diagonal is cross-validated against chart
//! quadrature on construction.
//!
//! Volume conventions: dv_X and dv_Y are the Riemannian volume forms of the
//! metric induced by the curvature form, so the normal volume ratio along Y
//! is 1 and every theoretical constant below is explicit.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;

use crate::coeff::rational_to_f64;
use crate::error::{Error, Result};
use crate::geometry::{covector_norm_sq, cp1_grid, cp1_grid_for_degree};
use crate::kernels::multi_indices;
use crate::quad::gauss_legendre_01;

type C64 = Complex64;

/// H^0(CP^n, O(p)) in the homogeneous monomial basis.
#[derive(Clone, Debug)]
pub struct HomogSpace {
    pub n: usize,
    pub p: u32,
    /// exponent vectors alpha over n+1 variables, |alpha| = p, sorted
    pub basis: Vec<Vec<u16>>,
    /// exact diagonal Gram alpha!/(p+n)!
    pub gram_exact: Vec<BigRational>,
    /// f64 mirror of the Gram diagonal
    pub gram: DVector<f64>,
}

fn factorial_big(n: u64) -> BigInt {
    let mut f = BigInt::one();
    for i in 2..=n {
        f *= BigInt::from(i);
    }
    f
}

impl HomogSpace {
    /// Build the space and cross-validate the Gram against chart quadrature.
    pub fn new(n: usize, p: u32) -> Result<Self> {
        if !(1..=2).contains(&n) || p < 1 {
            return Err(Error::Config(format!(
                "HomogSpace expects n in {{1,2}}, p >= 1; got n={n}, p={p}"
            )));
        }
        let basis = multi_indices(n + 1, p);
        let denom = factorial_big((p as u64) + n as u64);
        let gram_exact: Vec<BigRational> = basis
            .iter()
            .map(|alpha| {
                let mut num = BigInt::one();
                for &a in alpha {
                    num *= factorial_big(a as u64);
                }
                BigRational::new(num, denom.clone())
            })
            .collect();
        let gram = DVector::from_iterator(gram_exact.len(), gram_exact.iter().map(rational_to_f64));
        let space = HomogSpace {
            n,
            p,
            basis,
            gram_exact,
            gram,
        };
        space.validate_gram()?;
        Ok(space)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, alpha: &[u16]) -> Option<usize> {
        self.basis.iter().position(|b| b == alpha)
    }

    /// The Gram as a (diagonal) Hermitian matrix.
    pub fn gram_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                C64::new(self.gram[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Chart value of the monomial Z^alpha at [1 : w_1 : ... : w_n].
    pub fn chart_value(&self, idx: usize, w: &[C64]) -> C64 {
        let alpha = &self.basis[idx];
        let mut v = C64::new(1.0, 0.0);
        for i in 0..self.n {
            v *= w[i].powu(alpha[i + 1] as u32);
        }
        v
    }

    /// Pointwise metric factor of the unit chart frame of O(p).
    pub fn h_half(&self, w: &[C64]) -> f64 {
        let s = 1.0 + w.iter().map(|x| x.norm_sqr()).sum::<f64>();
        s.powf(-(self.p as f64) / 2.0)
    }

    /// Unitarized section value at a chart point.
    pub fn section_value(&self, coeffs: &DVector<C64>, w: &[C64]) -> C64 {
        let h = self.h_half(w);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            acc += coeffs[i] * self.chart_value(i, w);
        }
        acc * h
    }

    /// Quadrature cross-check of Gram diagonal entries. The chart integral
    /// factorizes radially; each factor is polynomial after u = r^2/(1+r^2),
    /// so Gauss-Legendre is exact up to float roundoff.
    fn validate_gram(&self) -> Result<()> {
        let mut worst = 0.0f64;
        let stride = (self.dim() / 24).max(1);
        match self.n {
            1 => {
                let grid = cp1_grid_for_degree(self.p);
                for (idx, alpha) in self.basis.iter().enumerate().step_by(stride) {
                    let a = alpha[1] as i32;
                    let quad: f64 = grid
                        .iter()
                        .map(|node| {
                            let r2 = node.w.norm_sqr();
                            node.weight * r2.powi(a) * (1.0 + r2).powi(-(self.p as i32))
                        })
                        .sum();
                    let exact = self.gram[idx];
                    worst = worst.max((quad - exact).abs() / exact.max(1e-300));
                }
            }
            2 => {
                // <Z^alpha, Z^alpha> = B(a1+1, a2+1)-type simplex factor times
                // a radial Beta integral; both 1D and polynomial after the
                // standard substitutions.
                let gl = gauss_legendre_01(((self.p as usize) + 16).max(32));
                for (idx, alpha) in self.basis.iter().enumerate().step_by(stride) {
                    let (a1, a2) = (alpha[1] as i32, alpha[2] as i32);
                    let total = a1 + a2;
                    let simplex: f64 = gl
                        .nodes
                        .iter()
                        .zip(&gl.weights)
                        .map(|(s, w)| w * s.powi(a1) * (1.0 - s).powi(a2))
                        .sum();
                    let radial: f64 = gl
                        .nodes
                        .iter()
                        .zip(&gl.weights)
                        .map(|(t, w)| w * t.powi(total + 1) * (1.0 - t).powi(self.p as i32 - total))
                        .sum();
                    let quad = simplex * radial;
                    let exact = self.gram[idx];
                    worst = worst.max((quad - exact).abs() / exact.max(1e-300));
                }
            }
            _ => unreachable!(),
        }
        if worst > 1e-6 {
            return Err(Error::GramValidation(worst));
        }
        if worst > 1e-8 {
            // cross-validation targets 1e-8; only discrepancies above 1e-6 abort
            eprintln!("warning: Gram quadrature agreement only {worst:.3e}");
        }
        Ok(())
    }
}

/// Which submanifold the jets live on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubmanifoldKind {
    /// the point [1:0] in CP^1
    PointCp1,
    /// the line {Z_2 = 0} in CP^2, totally geodesic
    LinearCp2,
    /// the conic {2 Z_0 Z_2 = Z_1^2} in CP^2, image of [s:t] -> [s^2 : sqrt2 st : t^2],
    /// not totally geodesic
    ConicCp2,
}

impl SubmanifoldKind {
    pub fn ambient_n(&self) -> usize {
        match self {
            SubmanifoldKind::PointCp1 => 1,
            _ => 2,
        }
    }

    pub fn m(&self) -> usize {
        match self {
            SubmanifoldKind::PointCp1 => 0,
            _ => 1,
        }
    }

    pub fn is_totally_geodesic(&self) -> bool {
        !matches!(self, SubmanifoldKind::ConicCp2)
    }

    pub fn name(&self) -> &'static str {
        match self {
            SubmanifoldKind::PointCp1 => "point",
            SubmanifoldKind::LinearCp2 => "line",
            SubmanifoldKind::ConicCp2 => "conic",
        }
    }
}

/// Everything needed to run the order-k operators for one (Y, k, p).
#[derive(Clone, Debug)]
pub struct JetSetup {
    pub y: SubmanifoldKind,
    pub k: u32,
    pub space: HomogSpace,
    /// ambient_dim x vk_dim basis matrix of H^0 vanishing to order k on Y
    pub ideal_basis: DMatrix<C64>,
    /// jet_dim x vk_dim restriction on V_k coordinates (includes the k! factor)
    pub res_vk: DMatrix<C64>,
    /// jet-space Gram (Hermitian positive definite)
    pub jet_gram: DMatrix<C64>,
}

fn selector_matrix(rows: usize, keep: &[usize]) -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::zeros(rows, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        m[(i, j)] = C64::new(1.0, 0.0);
    }
    m
}

/// Conic chart data at the parameter point t: ambient chart point and the
/// Sym-metric factor of the conormal frame (dq in the chart, twisted by O(2)).
pub fn conic_point(t: C64) -> Vec<C64> {
    vec![C64::new(2.0f64.sqrt(), 0.0) * t, t * t]
}

pub fn conic_conormal_factor(t: C64) -> f64 {
    let w = conic_point(t);
    let dq = vec![C64::new(-2.0 * 2.0f64.sqrt(), 0.0) * t, C64::new(2.0, 0.0)];
    let s = 1.0 + w.iter().map(|x| x.norm_sqr()).sum::<f64>();
    covector_norm_sq(&w, &dq) / (s * s)
}

impl JetSetup {
    pub fn new(y: SubmanifoldKind, k: u32, p: u32) -> Result<Self> {
        let n = y.ambient_n();
        let space = HomogSpace::new(n, p)?;
        match y {
            SubmanifoldKind::PointCp1 => {
                // monomials Z0^{p-a} Z1^a; V_k = {a >= k}
                if p < k {
                    return Err(Error::RankDeficient { rank: 0, dim: 1, p });
                }
                let keep: Vec<usize> = (0..space.dim())
                    .filter(|&i| space.basis[i][1] as u32 >= k)
                    .collect();
                let ideal_basis = selector_matrix(space.dim(), &keep);
                let mut res_vk = DMatrix::<C64>::zeros(1, keep.len());
                let kfact: f64 = (1..=k).map(|x| x as f64).product::<f64>().max(1.0);
                for (j, &i) in keep.iter().enumerate() {
                    if space.basis[i][1] as u32 == k {
                        res_vk[(0, j)] = C64::new(kfact, 0.0);
                    }
                }
                let two_pi_k = (2.0 * std::f64::consts::PI).powi(k as i32);
                let jet_gram = DMatrix::from_element(1, 1, C64::new(two_pi_k, 0.0));
                Ok(JetSetup {
                    y,
                    k,
                    space,
                    ideal_basis,
                    res_vk,
                    jet_gram,
                })
            }
            SubmanifoldKind::LinearCp2 => {
                if p < k {
                    return Err(Error::RankDeficient {
                        rank: 0,
                        dim: (p + 1) as usize,
                        p,
                    });
                }
                let keep: Vec<usize> = (0..space.dim())
                    .filter(|&i| space.basis[i][2] as u32 >= k)
                    .collect();
                let ideal_basis = selector_matrix(space.dim(), &keep);
                // jet basis: monomials Z0^{g0} Z1^{g1}, g0 + g1 = p - k
                let jet_dim = (p - k + 1) as usize;
                let kfact: f64 = (1..=k).map(|x| x as f64).product::<f64>().max(1.0);
                let mut res_vk = DMatrix::<C64>::zeros(jet_dim, keep.len());
                for (j, &i) in keep.iter().enumerate() {
                    let alpha = &space.basis[i];
                    if alpha[2] as u32 == k {
                        let g1 = alpha[1] as usize;
                        res_vk[(g1, j)] = C64::new(kfact, 0.0);
                    }
                }
                let jet_gram = linear_jet_gram(p, k)?;
                Ok(JetSetup {
                    y,
                    k,
                    space,
                    ideal_basis,
                    res_vk,
                    jet_gram,
                })
            }
            SubmanifoldKind::ConicCp2 => {
                if p < 2 * k {
                    return Err(Error::RankDeficient { rank: 0, dim: 1, p });
                }
                let dsub = (p - 2 * k) as usize;
                let deltas = multi_indices(3, p - 2 * k);
                // Q^k coefficients: (2 Z0 Z2 - Z1^2)^k
                let qk = conic_power(k);
                let mut ideal_basis = DMatrix::<C64>::zeros(space.dim(), deltas.len());
                for (j, delta) in deltas.iter().enumerate() {
                    for (mono, c) in &qk {
                        let alpha = [mono[0] + delta[0], mono[1] + delta[1], mono[2] + delta[2]];
                        let idx = space.index_of(&alpha).expect("degree matches");
                        ideal_basis[(idx, j)] += C64::new(*c, 0.0);
                    }
                }
                let jet_dim = 2 * dsub + 1;
                let kfact: f64 = (1..=k).map(|x| x as f64).product::<f64>().max(1.0);
                let mut res_vk = DMatrix::<C64>::zeros(jet_dim, deltas.len());
                for (j, delta) in deltas.iter().enumerate() {
                    let row = delta[1] as usize + 2 * delta[2] as usize;
                    let coeff = kfact * 2.0f64.powf(delta[1] as f64 / 2.0);
                    res_vk[(row, j)] += C64::new(coeff, 0.0);
                }
                let jet_gram = conic_jet_gram(p, k)?;
                Ok(JetSetup {
                    y,
                    k,
                    space,
                    ideal_basis,
                    res_vk,
                    jet_gram,
                })
            }
        }
    }

    pub fn vk_dim(&self) -> usize {
        self.ideal_basis.ncols()
    }

    pub fn jet_dim(&self) -> usize {
        self.res_vk.nrows()
    }

    fn gram_c(&self) -> DVector<C64> {
        self.space.gram.map(|x| C64::new(x, 0.0))
    }

    /// Gram of the V_k basis: M^dagger G M.
    pub fn gram_vk(&self) -> DMatrix<C64> {
        let g = self.gram_c();
        let mut gm = self.ideal_basis.clone();
        for i in 0..gm.nrows() {
            for j in 0..gm.ncols() {
                gm[(i, j)] *= g[i];
            }
        }
        self.ideal_basis.adjoint() * gm
    }

    /// Orthogonal projector onto V_k in ambient coordinates.
    pub fn projector(&self) -> Result<DMatrix<C64>> {
        let gvk = self.gram_vk();
        let chol = Cholesky::new(gvk)
            .ok_or_else(|| Error::Config("V_k Gram not positive definite".into()))?;
        let g = self.gram_c();
        let mut mg = self.ideal_basis.adjoint();
        for j in 0..mg.ncols() {
            for i in 0..mg.nrows() {
                mg[(i, j)] *= g[j];
            }
        }
        let solved = chol.solve(&mg);
        Ok(&self.ideal_basis * solved)
    }

    /// Coordinates in the V_k basis of the projection of an ambient vector.
    pub fn project_coords(&self) -> Result<DMatrix<C64>> {
        let gvk = self.gram_vk();
        let chol = Cholesky::new(gvk)
            .ok_or_else(|| Error::Config("V_k Gram not positive definite".into()))?;
        let g = self.gram_c();
        let mut mg = self.ideal_basis.adjoint();
        for j in 0..mg.ncols() {
            for i in 0..mg.nrows() {
                mg[(i, j)] *= g[j];
            }
        }
        Ok(chol.solve(&mg))
    }

    /// Res_k composed with the projector onto V_k: jets of arbitrary ambient
    /// sections (the restriction of the order-k logarithmic projector).
    pub fn res_full(&self) -> Result<DMatrix<C64>> {
        Ok(&self.res_vk * self.project_coords()?)
    }

    /// Rank of the jet map, with the pseudo-inverse tolerance 1e-12 x largest
    /// singular value.
    pub fn jet_map_rank(&self) -> usize {
        let svd = self.res_vk.clone().svd(false, false);
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        svd.singular_values
            .iter()
            .filter(|&&s| s > 1e-12 * smax)
            .count()
    }

    /// Minimal-norm extension: jet coefficients -> ambient coefficients.
    /// Errors when the jet map is not surjective at this p.
    pub fn extension(&self) -> Result<DMatrix<C64>> {
        let rank = self.jet_map_rank();
        if rank < self.jet_dim() {
            return Err(Error::RankDeficient {
                rank,
                dim: self.jet_dim(),
                p: self.space.p,
            });
        }
        let gvk = self.gram_vk();
        let chol_gvk = Cholesky::new(gvk)
            .ok_or_else(|| Error::Config("V_k Gram not positive definite".into()))?;
        let rh = self.res_vk.adjoint();
        let ginv_rh = chol_gvk.solve(&rh);
        let bracket = &self.res_vk * &ginv_rh;
        let chol_b = Cholesky::new(bracket).ok_or_else(|| Error::RankDeficient {
            rank,
            dim: self.jet_dim(),
            p: self.space.p,
        })?;
        let evk = ginv_rh * chol_b.inverse();
        Ok(&self.ideal_basis * evk)
    }

    /// Multiplicative defect A = T T^* with T = Res_k B^{X,kY}, the
    /// Gram-adjoint taken against the ambient and jet inner products.
    pub fn defect(&self) -> Result<DMatrix<C64>> {
        let t = self.res_full()?;
        // T* = G^{-1} T^dagger J ; A = T T* = T G^{-1} T^dagger J
        let mut tg = t.adjoint();
        for i in 0..tg.nrows() {
            let ginv = 1.0 / self.space.gram[i];
            for j in 0..tg.ncols() {
                tg[(i, j)] *= C64::new(ginv, 0.0);
            }
        }
        Ok(t * tg * &self.jet_gram)
    }

    /// Jet-space norm squared.
    pub fn jet_norm_sq(&self, g: &DVector<C64>) -> f64 {
        (g.adjoint() * &self.jet_gram * g)[(0, 0)].re
    }

    /// Ambient norm squared.
    pub fn ambient_norm_sq(&self, f: &DVector<C64>) -> f64 {
        (0..f.len())
            .map(|i| f[i].norm_sqr() * self.space.gram[i])
            .sum()
    }

    /// Operator norm of the extension with respect to the jet and ambient
    /// inner products.
    pub fn extension_norm(&self) -> Result<f64> {
        let e = self.extension()?;
        op_norm_weighted(&e, &self.space.gram, &self.jet_gram)
    }

    /// Operator norm of (defect/scale - identity) on the jet space.
    pub fn defect_deviation(&self, scale: f64) -> Result<f64> {
        let a = self.defect()?;
        let dim = self.jet_dim();
        let mut m = a / C64::new(scale, 0.0);
        for i in 0..dim {
            m[(i, i)] -= C64::new(1.0, 0.0);
        }
        op_norm_hermitian_metric(&m, &self.jet_gram)
    }
}

/// sup ||M x||_{G_out} / ||x||_{G_in} with diagonal G_out and Hermitian G_in.
pub fn op_norm_weighted(
    m: &DMatrix<C64>,
    g_out_diag: &DVector<f64>,
    g_in: &DMatrix<C64>,
) -> Result<f64> {
    let chol_in = Cholesky::new(g_in.clone())
        .ok_or_else(|| Error::Config("Gram not positive definite".into()))?;
    // B = G_out^{1/2} M L_in^{-dagger}: operator norm is sigma_max(B)
    let mut b = m.clone();
    for i in 0..b.nrows() {
        let s = g_out_diag[i].sqrt();
        for j in 0..b.ncols() {
            b[(i, j)] *= C64::new(s, 0.0);
        }
    }
    let linv_t = chol_in
        .l()
        .adjoint()
        .try_inverse()
        .ok_or_else(|| Error::Config("Cholesky factor not invertible".into()))?;
    let b2 = b * linv_t;
    let svd = b2.svd(false, false);
    Ok(svd.singular_values.iter().cloned().fold(0.0f64, f64::max))
}

/// Operator norm of a jet-space endomorphism with respect to the (same)
/// Hermitian metric on both sides.
pub fn op_norm_hermitian_metric(m: &DMatrix<C64>, gram: &DMatrix<C64>) -> Result<f64> {
    let chol = Cholesky::new(gram.clone())
        .ok_or_else(|| Error::Config("Gram not positive definite".into()))?;
    let l = chol.l();
    let linv_t = l
        .adjoint()
        .try_inverse()
        .ok_or_else(|| Error::Config("Cholesky factor not invertible".into()))?;
    let b = l.adjoint() * m * linv_t;
    let svd = b.svd(false, false);
    Ok(svd.singular_values.iter().cloned().fold(0.0f64, f64::max))
}

fn conic_power(k: u32) -> Vec<(Vec<u16>, f64)> {
    // (2 Z0 Z2 - Z1^2)^k expanded
    let mut terms: Vec<(Vec<u16>, f64)> = vec![(vec![0, 0, 0], 1.0)];
    for _ in 0..k {
        let mut next: Vec<(Vec<u16>, f64)> = Vec::new();
        for (mono, c) in &terms {
            for (delta, dc) in [(vec![1u16, 0, 1], 2.0), (vec![0u16, 2, 0], -1.0)] {
                let m2: Vec<u16> = mono.iter().zip(&delta).map(|(a, b)| a + b).collect();
                match next.iter_mut().find(|(m, _)| *m == m2) {
                    Some((_, acc)) => *acc += c * dc,
                    None => next.push((m2, c * dc)),
                }
            }
        }
        terms = next;
    }
    terms
}

/// Jet-space Gram for the linear CP^1 in CP^2: quadrature over Y of the
/// monomial products against the O(p) metric and the k-th power of the
/// conormal metric factor. Stabilized by doubling the grid.
fn linear_jet_gram(p: u32, k: u32) -> Result<DMatrix<C64>> {
    let dim = (p - k + 1) as usize;
    let build = |scale: u32| -> DMatrix<C64> {
        let grid = cp1_grid(
            ((p + 12 * scale) as usize).max(24),
            ((2 * p + 9 * scale) as usize).max(24),
        );
        let mut j = DMatrix::<C64>::zeros(dim, dim);
        for node in &grid {
            let r2 = node.w.norm_sqr();
            let hp = (1.0 + r2).powi(-(p as i32));
            let normco = (2.0 * std::f64::consts::PI * (1.0 + r2)).powi(k as i32);
            let weight = node.weight * hp * normco;
            // diagonal by rotation symmetry, but assembled generically
            let powers: Vec<C64> = (0..dim).map(|g1| node.w.powu(g1 as u32)).collect();
            for a in 0..dim {
                for b in 0..dim {
                    j[(a, b)] += C64::new(weight, 0.0) * powers[a] * powers[b].conj();
                }
            }
        }
        j
    };
    let coarse = build(1);
    let fine = build(2);
    let drift = (&fine - &coarse).norm();
    if drift > 1e-9 * fine.norm().max(1.0) {
        return Err(Error::QuadratureUnstable(drift));
    }
    Ok(fine)
}

/// Jet-space Gram for the conic: parameter-sphere quadrature with the induced
/// area form (total mass 2) and the conormal factor of 2 Z0 Z2 - Z1^2.
fn conic_jet_gram(p: u32, k: u32) -> Result<DMatrix<C64>> {
    let dsub = p - 2 * k;
    let dim = (2 * dsub + 1) as usize;
    let build = |scale: u32| -> DMatrix<C64> {
        let grid = cp1_grid(
            ((2 * p + 16 * scale) as usize).max(32),
            ((4 * dsub + 9 * scale) as usize).max(24),
        );
        let mut j = DMatrix::<C64>::zeros(dim, dim);
        for node in &grid {
            let t = node.w;
            let tt = t.norm_sqr();
            let hsub = (1.0 + tt).powi(-2 * dsub as i32);
            let normco = conic_conormal_factor(t).powi(k as i32);
            // induced area form of the conic = 2 x parameter FS area form
            let weight = 2.0 * node.weight * hsub * normco;
            let powers: Vec<C64> = (0..dim).map(|jj| t.powu(jj as u32)).collect();
            for a in 0..dim {
                for b in 0..dim {
                    j[(a, b)] += C64::new(weight, 0.0) * powers[a] * powers[b].conj();
                }
            }
        }
        j
    };
    let coarse = build(1);
    let fine = build(2);
    let drift = (&fine - &coarse).norm();
    if drift > 1e-9 * fine.norm().max(1.0) {
        return Err(Error::QuadratureUnstable(drift));
    }
    Ok(fine)
}

// ---------------------------------------------------------------------------
// Higher-level operations
// ---------------------------------------------------------------------------

/// Jets plus projector ladder context for a fixed (Y, p) across orders.
/// Construction factors every operator once; the per-section maps below are
/// then plain matrix products.
pub struct Lab {
    pub y: SubmanifoldKind,
    pub p: u32,
    setups: Vec<JetSetup>,
    res_full: Vec<DMatrix<C64>>,
    extensions: Vec<DMatrix<C64>>,
    /// projectors onto V_l for l = 0..=max_k+1
    projectors: Vec<DMatrix<C64>>,
}

impl Lab {
    pub fn new(y: SubmanifoldKind, p: u32, max_k: u32) -> Result<Self> {
        let setups = (0..=max_k)
            .map(|k| JetSetup::new(y, k, p))
            .collect::<Result<Vec<_>>>()?;
        let res_full = setups
            .iter()
            .map(|s| s.res_full())
            .collect::<Result<Vec<_>>>()?;
        let extensions = setups
            .iter()
            .map(|s| s.extension())
            .collect::<Result<Vec<_>>>()?;
        let mut projectors: Vec<DMatrix<C64>> = setups
            .iter()
            .map(|s| s.projector())
            .collect::<Result<Vec<_>>>()?;
        projectors.push(JetSetup::new(y, max_k + 1, p)?.projector()?);
        Ok(Lab {
            y,
            p,
            setups,
            res_full,
            extensions,
            projectors,
        })
    }

    pub fn setup(&self, k: u32) -> &JetSetup {
        &self.setups[k as usize]
    }

    pub fn space(&self) -> &HomogSpace {
        &self.setups[0].space
    }

    pub fn extension_matrix(&self, k: u32) -> &DMatrix<C64> {
        &self.extensions[k as usize]
    }

    pub fn res_full_matrix(&self, k: u32) -> &DMatrix<C64> {
        &self.res_full[k as usize]
    }

    /// Orthogonal projector of order l: P_l - P_{l+1} in ambient coordinates.
    pub fn ortho_projector(&self, l: u32) -> Result<DMatrix<C64>> {
        let l = l as usize;
        if l + 1 >= self.projectors.len() {
            return Err(Error::Config(format!("Lab built without order {l}")));
        }
        Ok(&self.projectors[l] - &self.projectors[l + 1])
    }

    /// Restriction of f to its order-r jet after subtracting lower-order
    /// extensions: the inductive jet map.
    pub fn jet_map(&self, k: u32, f: &DVector<C64>) -> Result<Vec<DVector<C64>>> {
        let mut jets = Vec::with_capacity(k as usize + 1);
        let mut remainder = f.clone();
        for r in 0..=k {
            let g = &self.res_full[r as usize] * &remainder;
            remainder -= &self.extensions[r as usize] * &g;
            jets.push(g);
        }
        Ok(jets)
    }

    /// Weighted jet norm squared: sum_r (r! (2 pi)^r)^{-1} p^{-(n-m+r)} |g_r|^2.
    pub fn jet_norm_weighted_sq(&self, jets: &[DVector<C64>]) -> f64 {
        let n = self.y.ambient_n() as f64;
        let m = self.y.m() as f64;
        let p = self.p as f64;
        let mut acc = 0.0;
        for (r, g) in jets.iter().enumerate() {
            let rf: f64 = (1..=r).map(|x| x as f64).product::<f64>().max(1.0);
            let w = 1.0 / (rf * (2.0 * std::f64::consts::PI).powi(r as i32))
                * p.powf(-(n - m + r as f64));
            acc += w * self.setup(r as u32).jet_norm_sq(g);
        }
        acc
    }

    /// Quotient norm squared: sum over l <= k of |B_l^perp f|^2.
    pub fn quotient_norm_sq(&self, k: u32, f: &DVector<C64>) -> Result<f64> {
        let mut acc = 0.0;
        for l in 0..=k {
            let bl = self.ortho_projector(l)?;
            let comp = &bl * f;
            acc += self.setup(0).ambient_norm_sq(&comp);
        }
        Ok(acc)
    }

    /// Check that a section lies in the order-k ideal subspace: lower-order
    /// jets must vanish within tolerance relative to the section norm.
    pub fn check_in_ideal(&self, k: u32, f: &DVector<C64>, tol: f64) -> Result<()> {
        let fnorm = self.setup(0).ambient_norm_sq(f).sqrt().max(1e-300);
        for l in 0..k {
            let g = &self.res_full[l as usize] * f;
            let gnorm = self.setup(l).jet_norm_sq(&g).sqrt();
            if gnorm > tol * fnorm {
                return Err(Error::NotInIdealPower(gnorm / fnorm));
            }
        }
        Ok(())
    }

    /// Restriction with the ideal-membership precondition: jets of order
    /// below k must vanish to the given tolerance.
    pub fn restrict_jet(&self, k: u32, f: &DVector<C64>, tol: f64) -> Result<DVector<C64>> {
        self.check_in_ideal(k, f, tol)?;
        Ok(&self.res_full[k as usize] * f)
    }
}

/// Both Bergman-type kernel values at a point pair: the full projector and
/// the order-k logarithmic projector. Points are chart coordinates; chart
/// infinity is rejected.
pub fn bergman_and_logbk_eval(setup: &JetSetup, w1: &[C64], w2: &[C64]) -> Result<(C64, C64)> {
    for w in [w1, w2] {
        if w.iter().any(|x| !x.is_finite() || x.norm() > 1e8) {
            return Err(Error::Config("evaluation point at chart infinity".into()));
        }
    }
    let full = projector_kernel_value(&setup.space, None, w1, w2);
    let log = projector_kernel_value(&setup.space, Some(&setup.projector()?), w1, w2);
    Ok((full, log))
}

/// Minimal-norm peak section with the given order-k jet coefficient at the
/// chart origin of CP^1, together with its worst jet-constraint residual.
pub fn peak_section(k: u32, p: u32, v: C64) -> Result<(DVector<C64>, f64)> {
    let setup = JetSetup::new(SubmanifoldKind::PointCp1, k, p)?;
    let e = setup.extension()?;
    let s = &e * DVector::from_element(1, v);
    let kfact: f64 = (1..=k).map(|x| x as f64).product::<f64>().max(1.0);
    let mut residual = 0.0f64;
    for i in 0..setup.space.dim() {
        let a = setup.space.basis[i][1] as u32;
        if a < k {
            residual = residual.max(s[i].norm());
        } else if a == k {
            residual = residual.max((s[i] * C64::new(kfact, 0.0) - v).norm());
        }
    }
    Ok((s, residual))
}

/// Schwartz kernel value of a projector-type operator in ambient coordinates.
/// With unit matrix this is the full Bergman kernel. Values are taken in the
/// unitarized chart frames, so moduli are frame-independent.
pub fn projector_kernel_value(
    space: &HomogSpace,
    matrix: Option<&DMatrix<C64>>,
    w1: &[C64],
    w2: &[C64],
) -> C64 {
    let dim = space.dim();
    let v1: Vec<C64> = (0..dim).map(|i| space.chart_value(i, w1)).collect();
    let v2: Vec<C64> = (0..dim).map(|i| space.chart_value(i, w2)).collect();
    let h = space.h_half(w1) * space.h_half(w2);
    let mut acc = C64::new(0.0, 0.0);
    match matrix {
        None => {
            for i in 0..dim {
                acc += v1[i] * v2[i].conj() / C64::new(space.gram[i], 0.0);
            }
        }
        Some(p) => {
            // kernel matrix P G^{-1}
            for i in 0..dim {
                for j in 0..dim {
                    let pg = p[(i, j)] / C64::new(space.gram[j], 0.0);
                    if pg.norm_sqr() == 0.0 {
                        continue;
                    }
                    acc += v1[i] * pg * v2[j].conj();
                }
            }
        }
    }
    acc * h
}

/// Unitarized value of a jet-basis element at a point of Y, used to evaluate
/// extension kernels against dv_Y.
pub fn jet_basis_value(setup: &JetSetup, idx: usize, param: C64) -> C64 {
    match setup.y {
        SubmanifoldKind::PointCp1 => {
            // single basis element; unit frame has norm (2 pi)^{k/2}
            C64::new((2.0 * std::f64::consts::PI).powf(setup.k as f64 / 2.0), 0.0)
        }
        SubmanifoldKind::LinearCp2 => {
            let p = setup.space.p;
            let r2 = param.norm_sqr();
            let h = (1.0 + r2).powf(-(p as f64) / 2.0);
            let normco = (2.0 * std::f64::consts::PI * (1.0 + r2)).powf(setup.k as f64 / 2.0);
            param.powu(idx as u32) * h * normco
        }
        SubmanifoldKind::ConicCp2 => {
            let dsub = setup.space.p - 2 * setup.k;
            let tt = param.norm_sqr();
            let h = (1.0 + tt).powi(-(dsub as i32));
            let normco = conic_conormal_factor(param).powf(setup.k as f64 / 2.0);
            param.powu(idx as u32) * h * normco
        }
    }
}

/// Extension kernel value E(x, y) with x an ambient chart point and y a point
/// of Y given in its parameter chart; evaluated against dv_Y.
pub fn extension_kernel_value(
    setup: &JetSetup,
    ext: &DMatrix<C64>,
    jet_gram_inv: &DMatrix<C64>,
    x: &[C64],
    y_param: C64,
) -> C64 {
    let space = &setup.space;
    let dim = space.dim();
    let jdim = setup.jet_dim();
    // u = J^{-1} conj(jet basis values)
    let u = DVector::from_iterator(
        jdim,
        (0..jdim).map(|j| jet_basis_value(setup, j, y_param).conj()),
    );
    let coeffs = ext * (jet_gram_inv * u);
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..dim {
        acc += coeffs[i] * space.chart_value(i, x);
    }
    acc * space.h_half(x)
}
