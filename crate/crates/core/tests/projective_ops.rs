//! Operator-level checks on the projective testbed: the defining relation of
//! the multiplicative defect, the adjoint identities, restriction-norm
//! growth, surjectivity onset, and the jet map.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jetext_core::analysis::trend_fit;
use jetext_core::projective::{op_norm_weighted, JetSetup, Lab, SubmanifoldKind};

fn gram_adjoint_ambient_to_jet(setup: &JetSetup, t: &DMatrix<C64>) -> DMatrix<C64> {
    // T: ambient -> jets; T* = G^{-1} T^dagger J
    let mut tg = t.adjoint();
    for i in 0..tg.nrows() {
        let ginv = 1.0 / setup.space.gram[i];
        for j in 0..tg.ncols() {
            tg[(i, j)] *= C64::new(ginv, 0.0);
        }
    }
    tg * &setup.jet_gram
}

#[test]
fn defect_defining_relation_and_identity_pair() {
    for (y, k, p) in [
        (SubmanifoldKind::LinearCp2, 0u32, 12u32),
        (SubmanifoldKind::LinearCp2, 1, 12),
        (SubmanifoldKind::ConicCp2, 1, 12),
        (SubmanifoldKind::PointCp1, 2, 14),
    ] {
        let setup = JetSetup::new(y, k, p).unwrap();
        let t = setup.res_full().unwrap();
        let t_star = gram_adjoint_ambient_to_jet(&setup, &t);
        let e = setup.extension().unwrap();
        let a = setup.defect().unwrap();

        // (Res o nabla^k B)^* = E o A
        let lhs = &t_star;
        let rhs = &e * &a;
        let scale = lhs.norm().max(1e-300);
        assert!(
            (lhs - &rhs).norm() / scale < 1e-8,
            "defining relation fails for {y:?} k={k} p={p}: {}",
            (lhs - &rhs).norm() / scale
        );

        // Res o Res* = A
        let rr = &t * &t_star;
        assert!(
            (&rr - &a).norm() / a.norm().max(1e-300) < 1e-8,
            "Res Res* != A for {y:?} k={k}"
        );

        // E* E = (A*)^{-1}
        let mut eg = e.adjoint();
        for i in 0..eg.nrows() {
            // E* = J^{-1} E^dagger G
            for j in 0..eg.ncols() {
                eg[(i, j)] *= C64::new(setup.space.gram[j], 0.0);
            }
        }
        let jinv = Cholesky::new(setup.jet_gram.clone()).unwrap().inverse();
        let e_star = &jinv * eg;
        let ee = &e_star * &e;
        let a_star = &jinv * a.adjoint() * &setup.jet_gram;
        let a_star_inv = a_star.clone().try_inverse().expect("defect invertible");
        assert!(
            (&ee - &a_star_inv).norm() / a_star_inv.norm() < 1e-8,
            "E*E != (A*)^{{-1}} for {y:?} k={k}"
        );
    }
}

#[test]
fn restriction_norm_growth_rate() {
    // ||Res_k o B^{X,kY}|| grows like p^{(n-m+k)/2} on the line in CP^2
    for k in [0u32, 1] {
        let mut series = Vec::new();
        for p in (6..=24).step_by(2) {
            let setup = JetSetup::new(SubmanifoldKind::LinearCp2, k, p).unwrap();
            let t = setup.res_full().unwrap();
            // sup ||T f||_J / ||f||_G: weighted norm with jet Gram output
            let chol_j = Cholesky::new(setup.jet_gram.clone()).unwrap();
            let mut b = chol_j.l().adjoint() * &t;
            for j in 0..b.ncols() {
                let s = 1.0 / setup.space.gram[j].sqrt();
                for i in 0..b.nrows() {
                    b[(i, j)] *= C64::new(s, 0.0);
                }
            }
            let norm = b
                .svd(false, false)
                .singular_values
                .iter()
                .cloned()
                .fold(0.0, f64::max);
            series.push((p as f64, norm));
        }
        let fit = trend_fit(&series).unwrap();
        let expect = (1.0 + k as f64) / 2.0;
        assert!(
            (fit.exponent - expect).abs() <= 0.3,
            "restriction norm exponent {} vs {expect} at k={k}",
            fit.exponent
        );
    }
}

#[test]
fn surjectivity_onset_is_monotone() {
    // once the jet map attains full rank it keeps it for all larger p
    let k = 2u32;
    let mut seen_full = false;
    for p in 4..=20u32 {
        match JetSetup::new(SubmanifoldKind::ConicCp2, k, p) {
            Err(_) => {
                assert!(!seen_full, "rank regressed after onset at p={p}");
            }
            Ok(setup) => {
                let full = setup.jet_map_rank() == setup.jet_dim();
                if seen_full {
                    assert!(full, "rank regressed after onset at p={p}");
                }
                seen_full |= full;
            }
        }
    }
    assert!(seen_full, "jet map never reached full rank");
}

#[test]
fn minimal_extension_of_zero_and_orthogonality() {
    let setup = JetSetup::new(SubmanifoldKind::LinearCp2, 1, 10).unwrap();
    let e = setup.extension().unwrap();
    let zero = DVector::<C64>::zeros(setup.jet_dim());
    let f = &e * &zero;
    assert!(f.norm() < 1e-14);

    // optimality residual: <E(g), h> = 0 for 50 random h in the next ideal
    // power
    let next = JetSetup::new(SubmanifoldKind::LinearCp2, 2, 10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let g = DVector::from_fn(setup.jet_dim(), |i, _| C64::new(0.3 + i as f64, -0.4));
    let ext = &e * &g;
    for _ in 0..50 {
        let coeffs = DVector::from_fn(next.vk_dim(), |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let h = &next.ideal_basis * coeffs;
        let mut inner = C64::new(0.0, 0.0);
        for i in 0..ext.len() {
            inner += ext[i].conj() * C64::new(setup.space.gram[i], 0.0) * h[i];
        }
        assert!(inner.norm() < 1e-10, "residual {inner}");
    }
}

#[test]
fn jet_map_examples() {
    let p = 12u32;
    let k = 2u32;
    let lab = Lab::new(SubmanifoldKind::LinearCp2, p, k).unwrap();
    let dim = lab.space().dim();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // g_0 = f|_Y for any f: order-zero jet is plain restriction
    let f = DVector::from_fn(dim, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let jets = lab.jet_map(k, &f).unwrap();
    let g0_direct = lab.res_full_matrix(0) * &f;
    assert!((&jets[0] - g0_direct).norm() < 1e-12);

    // f in the (k+1)-st ideal power: all jets vanish and both norms vanish
    let deep = JetSetup::new(SubmanifoldKind::LinearCp2, k + 1, p).unwrap();
    let coeffs = DVector::from_fn(deep.vk_dim(), |i, _| C64::new(1.0 / (1.0 + i as f64), 0.2));
    let f_deep = &deep.ideal_basis * coeffs;
    let jets_deep = lab.jet_map(k, &f_deep).unwrap();
    for g in &jets_deep {
        assert!(g.norm() < 1e-10, "jet not annihilated: {}", g.norm());
    }
    assert!(lab.quotient_norm_sq(k, &f_deep).unwrap().sqrt() < 1e-10);
    assert!(lab.jet_norm_weighted_sq(&jets_deep).sqrt() < 1e-10);

    // restriction precondition: a section with nonzero low-order jet is
    // rejected at order k
    assert!(lab.restrict_jet(k, &f, 1e-10).is_err());
    assert!(lab.restrict_jet(k, &f_deep, 1e-10).is_ok());
}

#[test]
fn restriction_of_named_monomials() {
    // order 0: Z0^p restricts to the monomial Z0^p on the line
    let p = 9u32;
    let s0 = JetSetup::new(SubmanifoldKind::LinearCp2, 0, p).unwrap();
    let idx = s0.space.index_of(&[p as u16, 0, 0]).unwrap();
    let f = DVector::from_fn(s0.space.dim(), |i, _| {
        C64::new(if i == idx { 1.0 } else { 0.0 }, 0.0)
    });
    let g = s0.res_full().unwrap() * &f;
    // jet basis is Z0^{g0} Z1^{g1}; only gamma = (p, 0) survives
    for j in 0..s0.jet_dim() {
        let expect = if j == 0 { 1.0 } else { 0.0 };
        assert!((g[j] - C64::new(expect, 0.0)).norm() < 1e-12);
    }

    // order 1: Z2 Z0^{p-1} has jet 1! * Z0^{p-1} against the normal frame
    let s1 = JetSetup::new(SubmanifoldKind::LinearCp2, 1, p).unwrap();
    let idx1 = s1.space.index_of(&[(p - 1) as u16, 0, 1]).unwrap();
    let f1 = DVector::from_fn(s1.space.dim(), |i, _| {
        C64::new(if i == idx1 { 1.0 } else { 0.0 }, 0.0)
    });
    let g1 = s1.res_full().unwrap() * &f1;
    for j in 0..s1.jet_dim() {
        let expect = if j == 0 { 1.0 } else { 0.0 };
        assert!((g1[j] - C64::new(expect, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn projector_ladder_orthogonality() {
    let p = 10u32;
    let k = 2u32;
    let lab = Lab::new(SubmanifoldKind::ConicCp2, p, k).unwrap();
    let dim = lab.space().dim();
    let mut sum = DMatrix::<C64>::zeros(dim, dim);
    let mut projs = Vec::new();
    for l in 0..=k {
        let bl = lab.ortho_projector(l).unwrap();
        sum += &bl;
        projs.push(bl);
    }
    // mutually orthogonal idempotents
    for (i, bi) in projs.iter().enumerate() {
        for (j, bj) in projs.iter().enumerate() {
            let prod = bi * bj;
            if i == j {
                assert!(
                    (&prod - bi).norm() < 1e-8 * (1.0 + bi.norm()),
                    "B_{i} not idempotent"
                );
            } else {
                assert!(prod.norm() < 1e-8 * (1.0 + bi.norm()), "B_{i} B_{j} != 0");
            }
        }
    }
    // ladder sums with the order-(k+1) log projector to the identity
    let logp = JetSetup::new(SubmanifoldKind::ConicCp2, k + 1, p)
        .unwrap()
        .projector()
        .unwrap();
    let total = &sum + &logp;
    let ident = DMatrix::<C64>::identity(dim, dim);
    assert!((&total - &ident).norm() < 1e-8, "ladder completeness fails");
}

#[test]
fn extension_norm_against_brute_force() {
    // the weighted operator norm matches a brute-force Rayleigh sweep
    let setup = JetSetup::new(SubmanifoldKind::LinearCp2, 1, 8).unwrap();
    let e = setup.extension().unwrap();
    let norm = op_norm_weighted(&e, &setup.space.gram, &setup.jet_gram).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut best: f64 = 0.0;
    for _ in 0..4000 {
        let g = DVector::from_fn(setup.jet_dim(), |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let num = setup.ambient_norm_sq(&(&e * &g));
        let den = setup.jet_norm_sq(&g);
        best = best.max((num / den).sqrt());
    }
    assert!(best <= norm * (1.0 + 1e-9), "sweep exceeded operator norm");
    assert!(
        best >= norm * 0.95,
        "sweep far below operator norm: {best} vs {norm}"
    );
}
