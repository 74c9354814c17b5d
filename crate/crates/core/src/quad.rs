//! Gauss quadrature rules and the numeric composition oracle.
//!
//! The oracle integrates kernel compositions directly, giving a path to the
//! composed values that never touches the symbolic reduction rules. Nodes and
//! weights come from the symmetric-tridiagonal Jacobi matrices of the Hermite
//! and Legendre families.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{JetKernel, KernelKind};

/// Nodes and weights of a 1D rule.
#[derive(Clone, Debug)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn golub_welsch(diag: &[f64], offdiag: &[f64], mu0: f64) -> Rule1d {
    let n = diag.len();
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = diag[i];
        if i + 1 < n {
            jac[(i, i + 1)] = offdiag[i];
            jac[(i + 1, i)] = offdiag[i];
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Rule1d {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss-Hermite rule: integrates f against exp(-x^2) dx exactly for
/// polynomials of degree <= 2n - 1.
pub fn gauss_hermite(n: usize) -> Rule1d {
    let diag = vec![0.0; n];
    let offdiag: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    golub_welsch(&diag, &offdiag, std::f64::consts::PI.sqrt())
}

/// Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Rule1d {
    let diag = vec![0.0; n];
    let offdiag: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    golub_welsch(&diag, &offdiag, 2.0)
}

/// Gauss-Legendre rescaled to [0, 1].
pub fn gauss_legendre_01(n: usize) -> Rule1d {
    let base = gauss_legendre(n);
    Rule1d {
        nodes: base.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights: base.weights.iter().map(|w| 0.5 * w).collect(),
    }
}

/// Complex dimension of the intermediate integral for a base pair.
fn oracle_domain(k1: &JetKernel, k2: &JetKernel) -> Result<usize> {
    use KernelKind::*;
    let b1 = &k1.base;
    let b2 = &k2.base;
    let w = match (b1.kind, b2.kind) {
        (OrthoProj0, OrthoProj0) | (BargmannProj, BargmannProj) | (Res0, Ext0) => b1.n,
        (SubProj, SubProj) | (Ext0, SubProj) | (Ext0, Res0) | (SubProj, Res0) => b1.m,
        _ => return Err(Error::NonComposable(b1.to_string(), b2.to_string())),
    };
    Ok(w)
}

fn log_gaussian(kernel: &JetKernel, z: &[Complex64], zp: &[Complex64]) -> Complex64 {
    let pi = std::f64::consts::PI;
    let b = kernel.base;
    let mut e = Complex64::new(0.0, 0.0);
    let tang = |e: &mut Complex64, count: usize| {
        for i in 0..count {
            *e += z[i].norm_sqr() + zp[i].norm_sqr() - 2.0 * z[i] * zp[i].conj();
        }
    };
    match b.kind {
        KernelKind::BargmannProj => tang(&mut e, b.n),
        KernelKind::SubProj => tang(&mut e, b.m),
        KernelKind::OrthoProj0 => {
            tang(&mut e, b.m);
            for i in b.m..b.n {
                e += z[i].norm_sqr() + zp[i].norm_sqr();
            }
        }
        KernelKind::Ext0 => {
            tang(&mut e, b.m);
            for i in b.m..b.n {
                e += z[i].norm_sqr();
            }
        }
        KernelKind::Res0 => {
            tang(&mut e, b.m);
            for i in b.m..b.n {
                e += zp[i].norm_sqr();
            }
        }
    }
    -0.5 * pi * e
}

/// Tensor Gauss-Hermite composition of two jet kernels at the given sample
/// points. The Gaussian weight exp(-pi |w|^2) of the intermediate variable is
/// absorbed into the rule; exponents are summed analytically so no overflow
/// occurs. Contraction over a shared Sym index uses the same pairing weights
/// as the symbolic composition.
pub fn quadrature_oracle_compose(
    k1: &JetKernel,
    k2: &JetKernel,
    samples: &[(Vec<Complex64>, Vec<Complex64>)],
    order: usize,
) -> Result<Vec<Vec<Vec<Complex64>>>> {
    let w_dim = oracle_domain(k1, k2)?;
    if k1.cols.len() != k2.rows.len() || k1.cols.order() != k2.rows.order() {
        return Err(Error::ShapeMismatch(
            k1.rows.len(),
            k1.cols.len(),
            k2.rows.len(),
            k2.cols.len(),
        ));
    }
    if w_dim == 0 {
        // point integral: single evaluation at the empty W
        let w: Vec<Complex64> = vec![];
        let mut out = Vec::with_capacity(samples.len());
        for (z, zp) in samples {
            let g = (log_gaussian(k1, z, &w) + log_gaussian(k2, &w, zp)).exp();
            let rows = k1.rows.len();
            let cols = k2.cols.len();
            let mut acc = vec![vec![Complex64::new(0.0, 0.0); cols]; rows];
            for r in 0..rows {
                for cc in 0..cols {
                    for i in 0..k1.cols.len() {
                        let pw = k1.cols.pairing_weight(i).eval().re;
                        let a1 = k1.entries[r][i].eval(z, &w)?;
                        let a2 = k2.entries[i][cc].eval(&w, zp)?;
                        acc[r][cc] += pw * a1 * a2 * g;
                    }
                }
            }
            out.push(acc);
        }
        return Ok(out);
    }
    let gh = gauss_hermite(order);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let pi = std::f64::consts::PI;

    let dims = 2 * w_dim;
    let total: usize = order.pow(dims as u32);

    let pair_weights: Vec<f64> = (0..k1.cols.len())
        .map(|i| k1.cols.pairing_weight(i).eval().re)
        .collect();
    // float mirrors of the amplitudes; the exact coefficients convert once
    let c1: Vec<Vec<crate::poly::CompiledPoly>> = k1
        .entries
        .iter()
        .map(|row| row.iter().map(|a| a.compile()).collect())
        .collect();
    let c2: Vec<Vec<crate::poly::CompiledPoly>> = k2
        .entries
        .iter()
        .map(|row| row.iter().map(|a| a.compile()).collect())
        .collect();

    let results: Vec<Vec<Vec<Complex64>>> = samples
        .par_iter()
        .map(|(z, zp)| {
            let rows = k1.rows.len();
            let cols = k2.cols.len();
            let mut acc = vec![vec![Complex64::new(0.0, 0.0); cols]; rows];
            let mut idx = vec![0usize; dims];
            for flat in 0..total {
                let mut rem = flat;
                for d in 0..dims {
                    idx[d] = rem % order;
                    rem /= order;
                }
                let mut w = vec![Complex64::new(0.0, 0.0); w_dim];
                let mut weight = 1.0;
                for c in 0..w_dim {
                    let xr = gh.nodes[idx[2 * c]];
                    let xi = gh.nodes[idx[2 * c + 1]];
                    weight *= gh.weights[idx[2 * c]] * gh.weights[idx[2 * c + 1]];
                    w[c] = Complex64::new(xr / sqrt_pi, xi / sqrt_pi);
                }
                // substitution x = sqrt(pi) u per real coordinate
                weight /= pi.powi(w_dim as i32);
                let wsq: f64 = w.iter().map(|x| x.norm_sqr()).sum();
                let log_g = log_gaussian(k1, z, &w)
                    + log_gaussian(k2, &w, zp)
                    + Complex64::new(pi * wsq, 0.0);
                let g = log_g.exp() * weight;
                for r in 0..rows {
                    for cc in 0..cols {
                        let mut inner = Complex64::new(0.0, 0.0);
                        for i in 0..k1.cols.len() {
                            if c1[r][i].is_zero() || c2[i][cc].is_zero() {
                                continue;
                            }
                            let a1 = c1[r][i].eval(z, &w);
                            let a2 = c2[i][cc].eval(&w, zp);
                            inner += pair_weights[i] * a1 * a2;
                        }
                        acc[r][cc] += inner * g;
                    }
                }
            }
            acc
        })
        .collect();
    Ok(results)
}

/// Oracle with the doubling self-check: flags quadrature orders whose results
/// move by more than `stability_tol` when the order doubles.
pub fn quadrature_oracle_checked(
    k1: &JetKernel,
    k2: &JetKernel,
    samples: &[(Vec<Complex64>, Vec<Complex64>)],
    order: usize,
    stability_tol: f64,
) -> Result<Vec<Vec<Vec<Complex64>>>> {
    let coarse = quadrature_oracle_compose(k1, k2, samples, order)?;
    let fine = quadrature_oracle_compose(k1, k2, samples, order * 2)?;
    let mut max_shift = 0.0f64;
    for (a, b) in coarse.iter().zip(&fine) {
        for (ra, rb) in a.iter().zip(b) {
            for (x, y) in ra.iter().zip(rb) {
                max_shift = max_shift.max((x - y).norm());
            }
        }
    }
    if max_shift > stability_tol {
        return Err(Error::QuadratureUnstable(max_shift));
    }
    Ok(fine)
}

/// Default oracle order per real dimension: 40 for the 2-real-dimensional
/// intermediate integrals, lowered for the 4-dimensional ones (the doubling
/// check remains in force).
pub fn default_oracle_order(w_dim: usize) -> usize {
    if w_dim <= 1 {
        40
    } else {
        20
    }
}

pub fn oracle_w_dim(k1: &JetKernel, k2: &JetKernel) -> Result<usize> {
    oracle_domain(k1, k2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{build_model_kernel, compose, ModelKind};

    #[test]
    fn hermite_moments() {
        let r = gauss_hermite(20);
        let m0: f64 = r.weights.iter().sum();
        assert!((m0 - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        let m2: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| x * x * w).sum();
        assert!((m2 - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
        let m4: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| x.powi(4) * w)
            .sum();
        assert!((m4 - 0.75 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn legendre_exactness() {
        let r = gauss_legendre_01(16);
        for k in 0..8u32 {
            let got: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(x, w)| x.powi(k as i32) * w)
                .sum();
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-13, "moment {k}");
        }
    }

    #[test]
    fn oracle_projector_idempotence() {
        let p = build_model_kernel(ModelKind::P, 1, 1, 0).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let samples: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..10)
            .map(|_| {
                (
                    vec![Complex64::new(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    )],
                    vec![Complex64::new(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    )],
                )
            })
            .collect();
        let vals = quadrature_oracle_checked(&p, &p, &samples, 40, 1e-6).unwrap();
        for (i, (z, zp)) in samples.iter().enumerate() {
            let direct = p.eval(z, zp).unwrap()[0][0];
            assert!(
                (vals[i][0][0] - direct).norm() < 1e-8,
                "idempotence failed at sample {i}"
            );
        }
    }

    #[test]
    fn oracle_matches_symbolic_composition() {
        // (z1 Pperp0) o (zb1 Pperp0) against the composed amplitude
        use crate::kernels::{JetKernel, KernelBase, PolyKernel};
        use crate::poly::{MultiPoly, Var};
        let base = KernelBase::ortho0(2, 1).unwrap();
        let dims = base.amplitude_dims();
        let a = JetKernel::scalar(
            PolyKernel::new(base, MultiPoly::var(dims, Var::Z(0)).unwrap()).unwrap(),
        );
        let b = JetKernel::scalar(
            PolyKernel::new(base, MultiPoly::var(dims, Var::Zb(0)).unwrap()).unwrap(),
        );
        let sym = compose(&a, &b).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let samples: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..5)
            .map(|_| {
                let mut pt = || {
                    (0..2)
                        .map(|_| Complex64::new(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)))
                        .collect::<Vec<_>>()
                };
                let a = pt();
                let b = pt();
                (a, b)
            })
            .collect();
        let oracle = quadrature_oracle_compose(&a, &b, &samples, 24).unwrap();
        for (i, (z, zp)) in samples.iter().enumerate() {
            let s = sym.eval(z, zp).unwrap()[0][0];
            assert!(
                (oracle[i][0][0] - s).norm() < 1e-8,
                "sample {i}: {} vs {}",
                oracle[i][0][0],
                s
            );
        }
    }
}
