//! The model-identity verification suite: exact symbolic identities, the
//! quadrature-oracle equivalence for every composition-table pair, and the
//! truncated Bargmann-space matrix ladder.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coeff::PiCoeff;
use crate::fock::{
    kernel_to_matrix, log_projector_reference, ortho_projector_reference, FockBasis, JetBasis,
    OperatorMatrix, SideBasis,
};
use crate::kernels::{
    build_model_kernel, compose, multi_factorial, JetKernel, KernelBase, ModelKind, PolyKernel,
};
use crate::poly::{random_poly, random_poly_with_parity, MultiPoly, Parity, Var};
use crate::quad::{default_oracle_order, oracle_w_dim, quadrature_oracle_checked};

/// Options for the verification suite.
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub n_max: usize,
    pub k_max: u32,
    pub seed: u64,
    pub fock_cutoff: u32,
    pub oracle_tol: f64,
    /// quadrature order override; 0 picks defaults by dimension
    pub oracle_order: usize,
    /// negative-control fixture: corrupt one composition before comparing
    pub corrupt_fixture: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            n_max: 3,
            k_max: 3,
            seed: 17,
            fock_cutoff: 6,
            oracle_tol: 1e-8,
            oracle_order: 0,
            corrupt_fixture: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IdentityResult {
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
    pub detail: String,
}

impl IdentityResult {
    fn exact(name: String, ok: bool, detail: String) -> Self {
        IdentityResult {
            name,
            passed: ok,
            max_error: if ok { 0.0 } else { f64::INFINITY },
            detail,
        }
    }

    fn numeric(name: String, err: f64, tol: f64, detail: String) -> Self {
        IdentityResult {
            name,
            passed: err <= tol,
            max_error: err,
            detail,
        }
    }
}

fn corrupt(poly: &MultiPoly) -> MultiPoly {
    // test fixture: inject a stray 1/pi term into a composed amplitude
    let dims = poly.dims();
    let bogus = MultiPoly::var(dims, Var::Z(0))
        .map(|z| z.scale(&PiCoeff::pi_pow(-1)))
        .unwrap_or_else(|_| MultiPoly::constant(dims, PiCoeff::pi_pow(-1)));
    poly.add(&bogus).expect("same dims")
}

/// Exact symbolic identity suite over all n <= n_max, m < n, k <= k_max.
pub fn verify_symbolic(opts: &VerifyOptions) -> Vec<IdentityResult> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    for n in 1..=opts.n_max {
        for m in 0..n {
            for k in 0..=opts.k_max {
                let e = build_model_kernel(ModelKind::E, n, m, k).expect("dims");
                let r = build_model_kernel(ModelKind::Res, n, m, k).expect("dims");
                let pperp = build_model_kernel(ModelKind::Pperp, n, m, k).expect("dims");

                // factorization
                let mut er = compose(&e, &r).expect("composable");
                if opts.corrupt_fixture && n == 2 && m == 1 && k == 1 {
                    er.entries[0][0] = corrupt(&er.entries[0][0]);
                }
                out.push(IdentityResult::exact(
                    format!("factorization E^{k} o Res^{k} = Pperp^{k} (n={n}, m={m})"),
                    er == pperp,
                    "exact amplitude comparison".into(),
                ));

                // adjoint duality
                let adj = r.adjoint().expect("adjoint");
                let factor = PiCoeff::pi_pow(k as i32)
                    .mul(&PiCoeff::from_int(1 << k))
                    .mul(&PiCoeff::factorial(k));
                out.push(IdentityResult::exact(
                    format!("duality (Res^{k})* = (2pi)^{k} {k}! E^{k} (n={n}, m={m})"),
                    adj == e.scale(&factor),
                    "exact amplitude comparison".into(),
                ));

                // reproducing relation: Res^k o E^k has delta blocks k!/beta! P_m
                let re = compose(&r, &e).expect("composable");
                let mut ok = true;
                let idx = re.rows.indices();
                for (a, beta) in idx.iter().enumerate() {
                    for b in 0..idx.len() {
                        let expect = if a == b {
                            MultiPoly::constant(
                                re.entries[a][b].dims(),
                                PiCoeff::factorial(k)
                                    .mul(&multi_factorial(beta).inv_monomial().expect("nonzero")),
                            )
                        } else {
                            MultiPoly::zero(re.entries[a][b].dims())
                        };
                        ok &= re.entries[a][b] == expect;
                    }
                }
                out.push(IdentityResult::exact(
                    format!("reproducing Res^{k} o E^{k} = Id blocks (n={n}, m={m})"),
                    ok,
                    "delta_(beta beta') k!/beta! sub-projector blocks".into(),
                ));

                // self-adjoint orthogonal projector
                out.push(IdentityResult::exact(
                    format!("self-adjoint Pperp^{k} (n={n}, m={m})"),
                    pperp.adjoint().expect("adjoint") == pperp,
                    "conjugate-swap symmetry".into(),
                ));
            }

            // orthogonality ladder
            let mut ok = true;
            for j in 0..=opts.k_max {
                for l in 0..=opts.k_max {
                    let pj = build_model_kernel(ModelKind::Pperp, n, m, j).expect("dims");
                    let pl = build_model_kernel(ModelKind::Pperp, n, m, l).expect("dims");
                    let c = compose(&pj, &pl).expect("composable");
                    ok &= if j == l { c == pj } else { c.is_zero() };
                }
            }
            out.push(IdentityResult::exact(
                format!("ladder Pperp^j o Pperp^l = delta_jl Pperp^j (n={n}, m={m})"),
                ok,
                format!("all j, l <= {}", opts.k_max),
            ));

            // mixed jet orders annihilate
            let mut ok = true;
            for j in 0..=opts.k_max.min(2) {
                for l in 0..=opts.k_max.min(2) {
                    if j == l {
                        continue;
                    }
                    let r = build_model_kernel(ModelKind::Res, n, m, j).expect("dims");
                    let e = build_model_kernel(ModelKind::E, n, m, l).expect("dims");
                    ok &= compose(&r, &e).expect("composable").is_zero();
                }
            }
            out.push(IdentityResult::exact(
                format!("mixed orders Res^j o E^l = 0, j != l (n={n}, m={m})"),
                ok,
                "normal moment selection".into(),
            ));

            // degree and parity rules on random definite-parity amplitudes
            let base = KernelBase::ortho0(n, m).expect("dims");
            let dims = base.amplitude_dims();
            let mut deg_ok = true;
            let mut par_ok = true;
            for _ in 0..10 {
                let odd1 = rng.gen_bool(0.5);
                let odd2 = rng.gen_bool(0.5);
                let a1 = random_poly_with_parity(&mut rng, dims, 4, 4, odd1);
                let a2 = random_poly_with_parity(&mut rng, dims, 4, 4, odd2);
                let c = crate::kernels::compose_projector_amplitudes(&base, &a1, &a2)
                    .expect("composable");
                if !a1.is_zero() && !a2.is_zero() {
                    deg_ok &= c.total_degree() <= a1.total_degree() + a2.total_degree();
                }
                if !c.is_zero() {
                    let expect = a1.parity().combine(a2.parity());
                    if expect != Parity::Neither {
                        par_ok &= c.parity() == expect;
                    }
                }
            }
            out.push(IdentityResult::exact(
                format!("degree bound of compositions (n={n}, m={m})"),
                deg_ok,
                "deg K[A1,A2] <= deg A1 + deg A2".into(),
            ));
            out.push(IdentityResult::exact(
                format!("parity rule of compositions (n={n}, m={m})"),
                par_ok,
                "even/odd multiplication".into(),
            ));
        }
    }

    // adjoint involution on random jet kernels
    let mut rng2 = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5ca1ab1e);
    let mut ok = true;
    for _ in 0..8 {
        let n = rng2.gen_range(1..=opts.n_max);
        let m = rng2.gen_range(0..n);
        let k = rng2.gen_range(0..=opts.k_max);
        let kind = [ModelKind::E, ModelKind::Res, ModelKind::Pperp][rng2.gen_range(0..3)];
        let kern = build_model_kernel(kind, n, m, k).expect("dims");
        ok &= kern
            .adjoint()
            .and_then(|a| a.adjoint())
            .map(|a| a == kern)
            .unwrap_or(false);
    }
    out.push(IdentityResult::exact(
        "adjoint involution on random jet kernels".into(),
        ok,
        "(K*)* = K".into(),
    ));

    out
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)))
        .collect()
}

fn random_kernel(rng: &mut ChaCha8Rng, base: KernelBase, max_degree: u32) -> JetKernel {
    let amp = random_poly(rng, base.amplitude_dims(), max_degree, 4);
    JetKernel::scalar(PolyKernel::new(base, amp).expect("legal support"))
}

/// Oracle equivalence: each composition-table pair with random amplitudes of
/// degree <= 4 must match the Gauss-Hermite oracle at 20 random point pairs.
pub fn verify_oracle(opts: &VerifyOptions) -> Vec<IdentityResult> {
    let mut results = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
    let n = 2usize;
    let m = 1usize;

    struct PairCase {
        name: &'static str,
        k1: JetKernel,
        k2: JetKernel,
        left_dim: usize,
        right_dim: usize,
    }

    let cases = vec![
        PairCase {
            name: "Pperp0 o Pperp0 (n=2, m=1)",
            k1: random_kernel(&mut rng, KernelBase::ortho0(n, m).unwrap(), 4),
            k2: random_kernel(&mut rng, KernelBase::ortho0(n, m).unwrap(), 4),
            left_dim: n,
            right_dim: n,
        },
        PairCase {
            name: "P o P (n=1)",
            k1: random_kernel(&mut rng, KernelBase::bargmann(1), 4),
            k2: random_kernel(&mut rng, KernelBase::bargmann(1), 4),
            left_dim: 1,
            right_dim: 1,
        },
        PairCase {
            name: "Psub o Psub (m=1)",
            k1: random_kernel(&mut rng, KernelBase::sub(m), 4),
            k2: random_kernel(&mut rng, KernelBase::sub(m), 4),
            left_dim: m,
            right_dim: m,
        },
        PairCase {
            name: "E0 o Psub (n=2, m=1)",
            k1: random_kernel(&mut rng, KernelBase::ext0(n, m).unwrap(), 4),
            k2: random_kernel(&mut rng, KernelBase::sub(m), 4),
            left_dim: n,
            right_dim: m,
        },
        PairCase {
            name: "E0 o Res0 (n=2, m=1)",
            k1: random_kernel(&mut rng, KernelBase::ext0(n, m).unwrap(), 4),
            k2: random_kernel(&mut rng, KernelBase::res0(n, m).unwrap(), 4),
            left_dim: n,
            right_dim: n,
        },
        PairCase {
            name: "Psub o Res0 (n=2, m=1)",
            k1: random_kernel(&mut rng, KernelBase::sub(m), 4),
            k2: random_kernel(&mut rng, KernelBase::res0(n, m).unwrap(), 4),
            left_dim: m,
            right_dim: n,
        },
        PairCase {
            name: "Res0 o E0 (n=2, m=1)",
            k1: random_kernel(&mut rng, KernelBase::res0(n, m).unwrap(), 4),
            k2: random_kernel(&mut rng, KernelBase::ext0(n, m).unwrap(), 4),
            left_dim: m,
            right_dim: m,
        },
    ];
    let mut cases = cases;
    if opts.k_max >= 1 {
        cases.push(PairCase {
            name: "E1 o Res1 jet matrix (n=2, m=1)",
            k1: build_model_kernel(ModelKind::E, n, m, 1).unwrap(),
            k2: build_model_kernel(ModelKind::Res, n, m, 1).unwrap(),
            left_dim: n,
            right_dim: n,
        });
    }

    for case in cases {
        let sym = match compose(&case.k1, &case.k2) {
            Ok(s) => s,
            Err(e) => {
                results.push(IdentityResult::numeric(
                    format!("oracle equivalence: {}", case.name),
                    f64::INFINITY,
                    opts.oracle_tol,
                    format!("symbolic composition failed: {e}"),
                ));
                continue;
            }
        };
        let samples: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..20)
            .map(|_| {
                (
                    random_point(&mut rng, case.left_dim),
                    random_point(&mut rng, case.right_dim),
                )
            })
            .collect();
        let w = oracle_w_dim(&case.k1, &case.k2).expect("composable");
        let order = if opts.oracle_order > 0 {
            opts.oracle_order
        } else {
            default_oracle_order(w)
        };
        match quadrature_oracle_checked(&case.k1, &case.k2, &samples, order, 1e-6) {
            Ok(oracle_vals) => {
                let mut max_err = 0.0f64;
                for (i, (z, zp)) in samples.iter().enumerate() {
                    let direct = sym.eval(z, zp).expect("eval");
                    for r in 0..direct.len() {
                        for c in 0..direct[0].len() {
                            max_err = max_err.max((direct[r][c] - oracle_vals[i][r][c]).norm());
                        }
                    }
                }
                results.push(IdentityResult::numeric(
                    format!("oracle equivalence: {}", case.name),
                    max_err,
                    opts.oracle_tol,
                    format!("20 random point pairs, GH order {order} doubled"),
                ));
            }
            Err(e) => {
                results.push(IdentityResult::numeric(
                    format!("oracle equivalence: {}", case.name),
                    f64::INFINITY,
                    opts.oracle_tol,
                    format!("oracle failed: {e}"),
                ));
            }
        }
    }
    results
}

/// Exact matrix ladder on the truncated Bargmann space.
pub fn verify_fock(opts: &VerifyOptions) -> Vec<IdentityResult> {
    let mut out = Vec::new();
    let d = opts.fock_cutoff;
    let combos: Vec<(usize, usize)> = match opts.n_max {
        1 => vec![(1, 0)],
        2 => vec![(1, 0), (2, 1)],
        _ => vec![(1, 0), (2, 1), (3, 1), (3, 2)],
    };

    for &(n, m) in &combos {
        let ambient = FockBasis::new(n, d);
        let amb_side = SideBasis::Ambient(ambient.clone());
        let amb_gram = ambient.gram_diag();

        // Bergman projector is the identity on any truncation
        let p = build_model_kernel(ModelKind::P, n, n, 0).expect("dims");
        let pm = kernel_to_matrix(&p, &amb_side, &amb_side).expect("matrix");
        out.push(IdentityResult::exact(
            format!("fock: P matrix = identity (n={n}, D={d})"),
            pm == OperatorMatrix::identity(ambient.len()),
            "reproducing kernel".into(),
        ));

        for k in 0..=opts.k_max {
            let pperp = build_model_kernel(ModelKind::Pperp, n, m, k).expect("dims");
            let pperp_m = kernel_to_matrix(&pperp, &amb_side, &amb_side).expect("matrix");
            let reference = ortho_projector_reference(&ambient, m, k);
            out.push(IdentityResult::exact(
                format!("fock: Pperp^{k} matrix = normal-degree selector (n={n}, m={m})"),
                pperp_m == reference,
                "diagonal 0/1 on monomials with |beta_N| = k".into(),
            ));

            // idempotent and self-adjoint after truncation
            let sq = pperp_m.mul(&pperp_m).expect("shape");
            out.push(IdentityResult::exact(
                format!("fock: Pperp^{k} idempotent (n={n}, m={m})"),
                sq == pperp_m,
                "M^2 = M exactly".into(),
            ));

            if k <= d {
                let jets = JetBasis::new(m, d - k, n - m, k);
                let jet_side = SideBasis::Jet(jets.clone());
                let jet_gram = jets.gram_diag();

                let e = build_model_kernel(ModelKind::E, n, m, k).expect("dims");
                let r = build_model_kernel(ModelKind::Res, n, m, k).expect("dims");
                let em = kernel_to_matrix(&e, &jet_side, &amb_side).expect("matrix");
                let rm = kernel_to_matrix(&r, &amb_side, &jet_side).expect("matrix");

                // E o Res = Pperp on the truncation (no spill: degrees shift by k)
                let er = em.mul(&rm).expect("shape");
                let pperp_m2 = kernel_to_matrix(&pperp, &amb_side, &amb_side).expect("matrix");
                out.push(IdentityResult::exact(
                    format!(
                        "fock: matrix(E^{k}) matrix(Res^{k}) = matrix(Pperp^{k}) (n={n}, m={m})"
                    ),
                    er == pperp_m2,
                    "exact arithmetic on D <= 6".into(),
                ));

                // duality constant via Gram adjoint
                let adj = rm.gram_adjoint(&amb_gram, &jet_gram).expect("grams");
                let factor = PiCoeff::pi_pow(k as i32)
                    .mul(&PiCoeff::from_int(1 << k))
                    .mul(&PiCoeff::factorial(k));
                out.push(IdentityResult::exact(
                    format!("fock: matrix(Res^{k})* = (2pi)^{k} {k}! matrix(E^{k}) (n={n}, m={m})"),
                    adj == em.scale(&factor),
                    "Gram adjoint with Sym weights 2^k beta!/k!".into(),
                ));

                // minimality: extension images have normal degree exactly k
                let mut minimal = true;
                for (row, beta) in ambient.elements.iter().enumerate() {
                    let normal_deg: u32 = beta[m..].iter().map(|&x| x as u32).sum();
                    if normal_deg != k {
                        minimal &= em.entries[row].iter().all(|e| e.is_zero());
                    }
                }
                out.push(IdentityResult::exact(
                    format!("fock: minimality of E^{k} images (n={n}, m={m})"),
                    minimal,
                    "orthogonal to every monomial divisible by z_N^(k+1)".into(),
                ));

                // Sym-row x Sym-col kernels: the matrix of the composed
                // Res^k o E^k equals the product of the factor matrices
                let re = compose(&r, &e).expect("composable");
                let re_m = kernel_to_matrix(&re, &jet_side, &jet_side).expect("matrix");
                let product = rm.mul(&em).expect("shape");
                out.push(IdentityResult::exact(
                    format!(
                        "fock: matrix(Res^{k} o E^{k}) = matrix(Res^{k}) matrix(E^{k}) (n={n}, m={m})"
                    ),
                    re_m == product,
                    "composition consistency with Sym contraction weights".into(),
                ));
            }

            if k > 0 {
                // completeness: P = logBK(k) + sum_{l<k} Pperp^l with the
                // log projector realized independently as a basis selector
                let mut sum = log_projector_reference(&ambient, m, k);
                for l in 0..k {
                    let pl = build_model_kernel(ModelKind::Pperp, n, m, l).expect("dims");
                    let plm = kernel_to_matrix(&pl, &amb_side, &amb_side).expect("matrix");
                    sum = sum.add(&plm).expect("shape");
                }
                out.push(IdentityResult::exact(
                    format!("fock: completeness P = logBK({k}) + ladder (n={n}, m={m})"),
                    sum == OperatorMatrix::identity(ambient.len()),
                    "independent selector realization of the log projector".into(),
                ));
            }
        }
    }
    out
}

/// Run the full suite.
pub fn verify_all(opts: &VerifyOptions) -> Vec<IdentityResult> {
    let mut results = verify_symbolic(opts);
    results.extend(verify_fock(opts));
    results.extend(verify_oracle(opts));
    results
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbolic_suite_passes_small() {
        let opts = VerifyOptions {
            n_max: 2,
            k_max: 2,
            ..Default::default()
        };
        let results = verify_symbolic(&opts);
        assert!(!results.is_empty());
        for r in &results {
            assert!(r.passed, "failed: {}", r.name);
        }
    }

    #[test]
    fn corrupted_rule_is_reported_by_name() {
        let opts = VerifyOptions {
            n_max: 2,
            k_max: 1,
            corrupt_fixture: true,
            ..Default::default()
        };
        let results = verify_symbolic(&opts);
        let failed: Vec<&IdentityResult> = results.iter().filter(|r| !r.passed).collect();
        assert_eq!(failed.len(), 1);
        assert!(
            failed[0].name.contains("factorization E^1 o Res^1"),
            "name: {}",
            failed[0].name
        );
    }

    #[test]
    fn fock_suite_small_cutoff() {
        let opts = VerifyOptions {
            n_max: 2,
            k_max: 2,
            fock_cutoff: 4,
            ..Default::default()
        };
        for r in verify_fock(&opts) {
            assert!(r.passed, "failed: {} ({})", r.name, r.detail);
        }
    }
}
