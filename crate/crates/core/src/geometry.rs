//! Fubini-Study geometry of CP^n in an affine chart.
//!
//! The Kaehler form is normalized so that CP^1 has total area 1 (the curvature
//! convention that matches the model-kernel constants: at the chart origin the
//! Hermitian matrix on T^{1,0} is I/(2 pi), geodesic distance from the origin
//! is arctan(|w|)/sqrt(pi), and a covector dw_i has squared norm 2 pi).
//!
//! All pointwise metric quantities are evaluated numerically from these chart
//! formulas; there are no global symbolic frames.

use num_complex::Complex64;

use crate::quad::gauss_legendre_01;

pub const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Hermitian metric matrix H_{i jbar} on T^{1,0} CP^n at chart point w:
/// H = [(1 + |w|^2) I - wbar w^T] / (2 pi (1 + |w|^2)^2).
pub fn fs_metric(w: &[Complex64]) -> Vec<Vec<Complex64>> {
    let n = w.len();
    let s = 1.0 + w.iter().map(|x| x.norm_sqr()).sum::<f64>();
    let denom = 2.0 * std::f64::consts::PI * s * s;
    let mut h = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            let kron = if i == j { s } else { 0.0 };
            h[i][j] = (Complex64::new(kron, 0.0) - w[i].conj() * w[j]) / denom;
        }
    }
    h
}

/// Inverse metric: H^{-1}_{ij} = 2 pi (1 + |w|^2) (delta_ij + wbar_i w_j),
/// the rank-one Sherman-Morrison update of the diagonal part.
pub fn fs_metric_inv(w: &[Complex64]) -> Vec<Vec<Complex64>> {
    let n = w.len();
    let s = 1.0 + w.iter().map(|x| x.norm_sqr()).sum::<f64>();
    let c = 2.0 * std::f64::consts::PI * s;
    let mut h = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            let kron = if i == j { 1.0 } else { 0.0 };
            h[i][j] = c * (Complex64::new(kron, 0.0) + w[i].conj() * w[j]);
        }
    }
    h
}

/// Squared norm of a (1,0)-covector xi = sum xi_i dw_i at w.
pub fn covector_norm_sq(w: &[Complex64], xi: &[Complex64]) -> f64 {
    let hinv = fs_metric_inv(w);
    let n = w.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += hinv[i][j] * xi[i].conj() * xi[j];
        }
    }
    acc.re
}

/// Geodesic distance from the chart origin to |w| = r.
pub fn dist_from_origin(r: f64) -> f64 {
    r.atan() / SQRT_PI
}

/// Chart radius of the point at geodesic distance rho from the origin
/// (along any complex-line direction).
pub fn chart_radius(rho: f64) -> f64 {
    (SQRT_PI * rho).tan()
}

/// Volume density of geodesic normal coordinates at distance rho from a point
/// of CP^1 with total area 1 (round sphere of radius 1/(2 sqrt(pi))):
/// kappa(rho) = sin(2 sqrt(pi) rho) / (2 sqrt(pi) rho).
pub fn cp1_normal_density(rho: f64) -> f64 {
    if rho.abs() < 1e-14 {
        return 1.0;
    }
    let t = 2.0 * SQRT_PI * rho;
    t.sin() / t
}

/// Quadrature node on CP^1: chart point and weight for the area form of total
/// mass 1.
#[derive(Clone, Copy, Debug)]
pub struct Cp1Node {
    pub w: Complex64,
    pub weight: f64,
}

/// Tensor rule for integrals over CP^1 against the Fubini-Study area form:
/// radial Gauss-Legendre in u = r^2/(1 + r^2) (the substitution flattens
/// r dr/(1 + r^2)^2 to du/2) and a uniform angular grid, exact for
/// trigonometric polynomials below the angular order.
pub fn cp1_grid(n_radial: usize, n_angular: usize) -> Vec<Cp1Node> {
    let gl = gauss_legendre_01(n_radial);
    let mut nodes = Vec::with_capacity(n_radial * n_angular);
    for (u, wu) in gl.nodes.iter().zip(&gl.weights) {
        let r = (u / (1.0 - u)).sqrt();
        for a in 0..n_angular {
            let theta = 2.0 * std::f64::consts::PI * a as f64 / n_angular as f64;
            nodes.push(Cp1Node {
                w: Complex64::from_polar(r, theta),
                weight: wu / n_angular as f64,
            });
        }
    }
    nodes
}

/// Pick grid orders that resolve monomial integrands of homogeneous degree p
/// comfortably, then verify stability by doubling.
pub fn cp1_grid_for_degree(p: u32) -> Vec<Cp1Node> {
    let n_rad = (p as usize + 12).max(24);
    let n_ang = (2 * p as usize + 9).max(24);
    cp1_grid(n_rad, n_ang)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_at_origin() {
        let w = vec![Complex64::new(0.0, 0.0); 2];
        let h = fs_metric(&w);
        let expect = 1.0 / (2.0 * std::f64::consts::PI);
        assert!((h[0][0].re - expect).abs() < 1e-15);
        assert!(h[0][1].norm() < 1e-15);
        // dw_2 norm at origin
        let xi = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!((covector_norm_sq(&w, &xi) - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn inverse_really_inverts() {
        let w = vec![Complex64::new(0.4, -0.7), Complex64::new(-0.2, 0.9)];
        let h = fs_metric(&w);
        let hinv = fs_metric_inv(&w);
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    acc += h[i][k] * hinv[k][j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((acc - Complex64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn covector_norm_against_direct_maximization() {
        // sup |xi(v)|^2 over ||v|| = 1 computed by brute maximization over a
        // dense direction sweep; catches index-convention slips
        let w = vec![Complex64::new(0.5, 0.2), Complex64::new(-0.3, 0.6)];
        let xi = vec![Complex64::new(0.8, -1.1), Complex64::new(0.4, 0.9)];
        let h = fs_metric(&w);
        let mut best: f64 = 0.0;
        let steps = 60;
        for a in 0..steps {
            for b in 0..steps {
                for c in 0..steps / 4 {
                    let t = std::f64::consts::PI * a as f64 / steps as f64;
                    let p1 = 2.0 * std::f64::consts::PI * b as f64 / steps as f64;
                    let p2 = 2.0 * std::f64::consts::PI * c as f64 / (steps / 4) as f64;
                    let v = [
                        Complex64::from_polar(t.cos(), p1),
                        Complex64::from_polar(t.sin(), p2),
                    ];
                    let mut norm_sq = Complex64::new(0.0, 0.0);
                    for i in 0..2 {
                        for j in 0..2 {
                            norm_sq += h[i][j] * v[i] * v[j].conj();
                        }
                    }
                    let pairing = (xi[0] * v[0] + xi[1] * v[1]).norm_sqr();
                    best = best.max(pairing / norm_sq.re);
                }
            }
        }
        let got = covector_norm_sq(&w, &xi);
        assert!(
            (got - best).abs() < 2e-2 * best,
            "norm {got} vs swept {best}"
        );
    }

    #[test]
    fn normal_metric_along_linear_submanifold() {
        // on CP^2 at (w1, 0), |dw2|^2 = 2 pi (1 + |w1|^2)
        let w1 = Complex64::new(0.83, -0.41);
        let w = vec![w1, Complex64::new(0.0, 0.0)];
        let xi = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let got = covector_norm_sq(&w, &xi);
        let expect = 2.0 * std::f64::consts::PI * (1.0 + w1.norm_sqr());
        assert!((got - expect).abs() < 1e-10);
    }

    #[test]
    fn distances() {
        assert!((dist_from_origin(1.0) - std::f64::consts::PI / 4.0 / SQRT_PI).abs() < 1e-15);
        // antipode at distance sqrt(pi)/2
        assert!((dist_from_origin(1e12) - SQRT_PI / 2.0).abs() < 1e-6);
        let rho = 0.21;
        assert!((dist_from_origin(chart_radius(rho)) - rho).abs() < 1e-13);
    }

    #[test]
    fn grid_mass_and_moments() {
        let grid = cp1_grid(32, 16);
        let mass: f64 = grid.iter().map(|n| n.weight).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        // int |w|^2 / (1 + |w|^2)^2-free moments: check the FS monomial norm
        // <Z0^p, Z0^p> = p! 0!/(p+1)! = 1/(p+1) for p = 3 on CP^1
        let p = 3;
        let val: f64 = grid
            .iter()
            .map(|n| n.weight * (1.0 + n.w.norm_sqr()).powi(-(p as i32)))
            .sum();
        assert!((val - 1.0 / (p as f64 + 1.0)).abs() < 1e-12);
    }
}
