//! Truncated Bargmann-space matrix realizations of the model operators.
//!
//! Matrices are expressed in the raw monomial basis z^beta, |beta| <= D, so
//! every entry stays an exact [`PiCoeff`]: the monomial Gram is the diagonal
//! beta!/pi^{|beta|}, and the weighted orthonormal family is never formed
//! explicitly (its sqrt(pi) factors would leave the coefficient ring).
//! Entries come from exact Gaussian moments: per complex coordinate,
//! int z^a zb^b exp(-pi |z|^2) = delta_{ab} a!/pi^a
//! (the radial moment table a!/pi^{a+1} times the angular factor pi).
//!
//! Jet-valued sides use the dz^{. beta} frame with the Sym metric weights
//! 2^k beta!/k!, kept as an explicit diagonal Gram for the same reason.

use num_complex::Complex64;

use crate::coeff::PiCoeff;
use crate::error::{Error, Result};
use crate::kernels::{multi_factorial, multi_indices, IndexSet, JetKernel, KernelKind};

/// Ordered monomial basis of the truncated Bargmann space on C^n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockBasis {
    pub n: usize,
    pub cutoff: u32,
    pub elements: Vec<Vec<u16>>,
}

impl FockBasis {
    pub fn new(n: usize, cutoff: u32) -> Self {
        let mut elements = Vec::new();
        for d in 0..=cutoff {
            elements.extend(multi_indices(n, d));
        }
        elements.sort_by(|a, b| {
            let da: u32 = a.iter().map(|&x| x as u32).sum();
            let db: u32 = b.iter().map(|&x| x as u32).sum();
            da.cmp(&db).then(a.cmp(b))
        });
        FockBasis {
            n,
            cutoff,
            elements,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, beta: &[u16]) -> Option<usize> {
        self.elements.iter().position(|e| e == beta)
    }

    /// Monomial norm <z^beta, z^beta> = beta!/pi^{|beta|}.
    pub fn monomial_norm(&self, beta: &[u16]) -> PiCoeff {
        let total: u32 = beta.iter().map(|&x| x as u32).sum();
        multi_factorial(beta).mul(&PiCoeff::pi_pow(-(total as i32)))
    }

    /// Diagonal Gram of the raw monomial basis.
    pub fn gram_diag(&self) -> Vec<PiCoeff> {
        self.elements
            .iter()
            .map(|b| self.monomial_norm(b))
            .collect()
    }
}

/// Basis of a jet space: monomials on C^m tensored with normal multi-indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetBasis {
    pub base: FockBasis,
    pub sym: IndexSet,
    /// flattened (monomial, sym index) pairs, sym-major within monomial order
    pub pairs: Vec<(usize, usize)>,
}

impl JetBasis {
    pub fn new(m: usize, cutoff: u32, normal_dim: usize, order: u32) -> Self {
        let base = FockBasis::new(m, cutoff);
        let sym = if order == 0 && normal_dim == 0 {
            IndexSet::Scalar
        } else {
            IndexSet::sym(normal_dim, order)
        };
        let mut pairs = Vec::new();
        for g in 0..base.len() {
            for s in 0..sym.len() {
                pairs.push((g, s));
            }
        }
        JetBasis { base, sym, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Gram diagonal: monomial norm times the Sym metric weight 2^k beta!/k!.
    pub fn gram_diag(&self) -> Vec<PiCoeff> {
        self.pairs
            .iter()
            .map(|&(g, s)| {
                self.base
                    .monomial_norm(&self.base.elements[g])
                    .mul(&self.sym.metric_weight(s))
            })
            .collect()
    }
}

/// Dense matrix with exact coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<PiCoeff>>,
}

impl OperatorMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        OperatorMatrix {
            rows,
            cols,
            entries: vec![vec![PiCoeff::zero(); cols]; rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i][i] = PiCoeff::one();
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.entries[i][k].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    if other.entries[k][j].is_zero() {
                        continue;
                    }
                    let prod = self.entries[i][k].mul(&other.entries[k][j]);
                    out.entries[i][j] = out.entries[i][j].add(&prod);
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[i][j] = out.entries[i][j].sub(&other.entries[i][j]);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[i][j] = out.entries[i][j].add(&other.entries[i][j]);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &PiCoeff) -> Self {
        let mut out = self.clone();
        for row in &mut out.entries {
            for e in row {
                *e = e.mul(c);
            }
        }
        out
    }

    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[j][i] = self.entries[i][j].conj();
            }
        }
        out
    }

    /// Gram adjoint of a map source -> target with diagonal Grams:
    /// M* = G_source^{-1} M^dagger G_target.
    pub fn gram_adjoint(&self, gram_source: &[PiCoeff], gram_target: &[PiCoeff]) -> Result<Self> {
        if gram_source.len() != self.cols || gram_target.len() != self.rows {
            return Err(Error::ShapeMismatch(
                self.rows,
                self.cols,
                gram_target.len(),
                gram_source.len(),
            ));
        }
        let mut out = self.conj_transpose();
        for i in 0..out.rows {
            let inv = gram_source[i]
                .inv_monomial()
                .ok_or_else(|| Error::InvalidKernel("non-monomial Gram entry".into()))?;
            for j in 0..out.cols {
                out.entries[i][j] = inv.mul(&out.entries[i][j]).mul(&gram_target[j]);
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|r| r.iter().all(|e| e.is_zero()))
    }

    pub fn to_complex(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.entries[i][j].eval())
    }

    /// Restrict to rows/cols whose basis degree stays within a bound; the
    /// truncation-safe block for identity checks.
    pub fn block(&self, row_keep: &[bool], col_keep: &[bool]) -> Self {
        let ridx: Vec<usize> = (0..self.rows).filter(|&i| row_keep[i]).collect();
        let cidx: Vec<usize> = (0..self.cols).filter(|&j| col_keep[j]).collect();
        let mut out = Self::zeros(ridx.len(), cidx.len());
        for (a, &i) in ridx.iter().enumerate() {
            for (b, &j) in cidx.iter().enumerate() {
                out.entries[a][b] = self.entries[i][j].clone();
            }
        }
        out
    }
}

/// How a kernel side is indexed for matrix assembly.
#[derive(Clone, Debug)]
pub enum SideBasis {
    Ambient(FockBasis),
    Jet(JetBasis),
}

impl SideBasis {
    pub fn len(&self) -> usize {
        match self {
            SideBasis::Ambient(b) => b.len(),
            SideBasis::Jet(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn gram_diag(&self) -> Vec<PiCoeff> {
        match self {
            SideBasis::Ambient(b) => b.gram_diag(),
            SideBasis::Jet(b) => b.gram_diag(),
        }
    }
}

/// Exact matrix of a jet kernel between monomial bases. Output components are
/// L2-projected back onto the holomorphic monomials, which is the identity
/// for every model operator (they commute with the Bergman projector).
pub fn kernel_to_matrix(
    kernel: &JetKernel,
    input: &SideBasis,
    output: &SideBasis,
) -> Result<OperatorMatrix> {
    // tangential coordinates carry the reproducing series exp(pi z w-bar)
    let tangential = match kernel.base.kind {
        KernelKind::BargmannProj => kernel.base.n,
        _ => kernel.base.m,
    };
    let (out_dim_check, in_dim_check) = {
        let d = kernel.base.amplitude_dims();
        (d.left, d.right)
    };
    let out_n = match output {
        SideBasis::Ambient(b) => b.n,
        SideBasis::Jet(b) => b.base.n,
    };
    let in_n = match input {
        SideBasis::Ambient(b) => b.n,
        SideBasis::Jet(b) => b.base.n,
    };
    if out_n != out_dim_check || in_n != in_dim_check {
        return Err(Error::ShapeMismatch(
            out_n,
            in_n,
            out_dim_check,
            in_dim_check,
        ));
    }

    let mut mat = OperatorMatrix::zeros(output.len(), input.len());

    // enumerate (row object, col object) through the kernel's index sets
    let row_syms = kernel.rows.len();
    let col_syms = kernel.cols.len();

    let col_items: Vec<(usize, Vec<u16>, usize)> = match input {
        SideBasis::Ambient(b) => {
            if col_syms != 1 {
                return Err(Error::InvalidKernel(
                    "ambient input for Sym-column kernel".into(),
                ));
            }
            b.elements
                .iter()
                .enumerate()
                .map(|(i, e)| (i, e.clone(), 0usize))
                .collect()
        }
        SideBasis::Jet(b) => {
            if b.sym.len() != col_syms {
                return Err(Error::InvalidKernel(
                    "jet input Sym set differs from kernel columns".into(),
                ));
            }
            b.pairs
                .iter()
                .enumerate()
                .map(|(i, &(g, s))| (i, b.base.elements[g].clone(), s))
                .collect()
        }
    };

    for (col_pos, in_mono, col_sym) in &col_items {
        // action on the basis element includes the pairing weight beta!/k!
        let pair_w = kernel.cols.pairing_weight(*col_sym);
        for row_sym in 0..row_syms {
            let amp = &kernel.entries[row_sym][*col_sym];
            if amp.is_zero() {
                continue;
            }
            for (mono, coeff) in amp.terms() {
                // amplitude exponents: u, v on the output side; up, vp on the
                // input side
                let d = amp.dims();
                let u = &mono.0[0..d.left];
                let v = &mono.0[d.left..2 * d.left];
                let up = &mono.0[2 * d.left..2 * d.left + d.right];
                let vp = &mono.0[2 * d.left + d.right..];

                // input-side moments fix the series exponent gamma per
                // tangential coordinate; normal input coordinates must match
                // outright
                let mut gamma = vec![0i64; tangential.min(d.right)];
                let mut ok = true;
                let mut moment = coeff.mul(&pair_w);
                for j in 0..d.right {
                    let hol = up[j] as i64 + in_mono.get(j).map(|&x| x as i64).unwrap_or(0);
                    let anti = vp[j] as i64;
                    if j < tangential && j < gamma.len() {
                        // w^hol wb^{anti + gamma_j}: moment needs hol = anti + gamma_j
                        let g = hol - anti;
                        if g < 0 {
                            ok = false;
                            break;
                        }
                        gamma[j] = g;
                        // series coefficient pi^g / g! and moment hol!/pi^hol
                        moment = moment
                            .mul(&PiCoeff::pi_pow(g as i32))
                            .mul(&factorial_inv(g as u32))
                            .mul(&factorial(hol as u32))
                            .mul(&PiCoeff::pi_pow(-(hol as i32)));
                    } else {
                        // normal coordinate: plain moment delta
                        if hol != anti {
                            ok = false;
                            break;
                        }
                        moment = moment
                            .mul(&factorial(hol as u32))
                            .mul(&PiCoeff::pi_pow(-(hol as i32)));
                    }
                }
                if !ok {
                    continue;
                }

                // output-side: the produced section has monomial
                // z^{u} z-bar^{v} z^{gamma}; L2 projection onto z^alpha needs
                // alpha = u + gamma - v componentwise, with moment
                // (u + gamma)!/pi^{.} / <z^alpha, z^alpha>
                let mut alpha = vec![0u16; out_n];
                let mut factor = moment.clone();
                let mut ok2 = true;
                for i in 0..d.left {
                    let g = if i < gamma.len() { gamma[i] } else { 0 };
                    let hol = u[i] as i64 + g;
                    let anti = v[i] as i64;
                    let a = hol - anti;
                    if a < 0 {
                        ok2 = false;
                        break;
                    }
                    alpha[i] = a as u16;
                    // integral against zb^alpha: moment hol!/pi^hol with
                    // hol = anti + alpha; normalize by alpha!/pi^alpha
                    factor = factor
                        .mul(&factorial(hol as u32))
                        .mul(&PiCoeff::pi_pow(-(hol as i32)))
                        .mul(&factorial_inv(a as u32))
                        .mul(&PiCoeff::pi_pow(a as i32));
                }
                if !ok2 {
                    continue;
                }

                let row_pos = match output {
                    SideBasis::Ambient(b) => {
                        if row_syms != 1 {
                            return Err(Error::InvalidKernel(
                                "ambient output for Sym-row kernel".into(),
                            ));
                        }
                        match b.index_of(&alpha) {
                            Some(i) => i,
                            None => continue, // beyond cutoff: truncation spill
                        }
                    }
                    SideBasis::Jet(b) => {
                        let g = match b.base.index_of(&alpha) {
                            Some(i) => i,
                            None => continue,
                        };
                        g * b.sym.len() + row_sym
                    }
                };
                mat.entries[row_pos][*col_pos] = mat.entries[row_pos][*col_pos].add(&factor);
            }
        }
    }
    Ok(mat)
}

fn factorial(n: u32) -> PiCoeff {
    PiCoeff::factorial(n)
}

fn factorial_inv(n: u32) -> PiCoeff {
    PiCoeff::factorial(n)
        .inv_monomial()
        .expect("factorial is nonzero")
}

/// Hermitian pairing on Sym^k coefficient vectors with the metric weights
/// 2^k beta!/k!.
pub fn sym_pairing(
    k: u32,
    normal_dim: usize,
    u: &[Complex64],
    v: &[Complex64],
) -> Result<Complex64> {
    let set = IndexSet::sym(normal_dim, k);
    if u.len() != set.len() || v.len() != set.len() {
        return Err(Error::ShapeMismatch(u.len(), 1, v.len(), set.len()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..set.len() {
        acc += set.metric_weight(i).eval() * u[i] * v[i].conj();
    }
    Ok(acc)
}

/// Independent characterization of the order-k orthogonal projector: diagonal
/// 0/1 on monomials whose normal degree is exactly k.
pub fn ortho_projector_reference(basis: &FockBasis, m: usize, k: u32) -> OperatorMatrix {
    let mut mat = OperatorMatrix::zeros(basis.len(), basis.len());
    for (i, beta) in basis.elements.iter().enumerate() {
        let normal_deg: u32 = beta[m..].iter().map(|&x| x as u32).sum();
        if normal_deg == k {
            mat.entries[i][i] = PiCoeff::one();
        }
    }
    mat
}

/// Independent characterization of the logarithmic projector: diagonal 0/1 on
/// monomials with normal degree >= k.
pub fn log_projector_reference(basis: &FockBasis, m: usize, k: u32) -> OperatorMatrix {
    let mut mat = OperatorMatrix::zeros(basis.len(), basis.len());
    for (i, beta) in basis.elements.iter().enumerate() {
        let normal_deg: u32 = beta[m..].iter().map(|&x| x as u32).sum();
        if normal_deg >= k {
            mat.entries[i][i] = PiCoeff::one();
        }
    }
    mat
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{build_model_kernel, ModelKind};

    #[test]
    fn basis_sizes_and_norms() {
        let b = FockBasis::new(1, 0);
        assert_eq!(b.len(), 1);
        assert_eq!(b.monomial_norm(&[0]), PiCoeff::one());

        let b2 = FockBasis::new(1, 2);
        // norms 1, 1/pi, 2/pi^2
        assert_eq!(b2.monomial_norm(&[0]), PiCoeff::one());
        assert_eq!(b2.monomial_norm(&[1]), PiCoeff::pi_pow(-1));
        assert_eq!(
            b2.monomial_norm(&[2]),
            PiCoeff::factorial(2).mul(&PiCoeff::pi_pow(-2))
        );

        let b3 = FockBasis::new(3, 6);
        assert_eq!(b3.len(), 84); // C(3+6, 3)
    }

    #[test]
    fn bergman_projector_is_identity() {
        for n in 1..=2usize {
            let basis = FockBasis::new(n, 4);
            let p = build_model_kernel(ModelKind::P, n, n, 0).unwrap();
            let m = kernel_to_matrix(
                &p,
                &SideBasis::Ambient(basis.clone()),
                &SideBasis::Ambient(basis.clone()),
            )
            .unwrap();
            assert_eq!(m, OperatorMatrix::identity(basis.len()));
        }
    }

    #[test]
    fn ortho_projector_matrix_is_diagonal_selector() {
        let (n, m) = (2usize, 1usize);
        let basis = FockBasis::new(n, 5);
        for k in 0..=3u32 {
            let pperp = build_model_kernel(ModelKind::Pperp, n, m, k).unwrap();
            let mat = kernel_to_matrix(
                &pperp,
                &SideBasis::Ambient(basis.clone()),
                &SideBasis::Ambient(basis.clone()),
            )
            .unwrap();
            let expect = ortho_projector_reference(&basis, m, k);
            assert_eq!(mat, expect, "Pperp^{k} selector mismatch");
        }
    }

    #[test]
    fn sym_pairing_values() {
        // k = 1, one normal dim: <dz, dz> = 2
        let one = [Complex64::new(1.0, 0.0)];
        let v = sym_pairing(1, 1, &one, &one).unwrap();
        assert!((v.re - 2.0).abs() < 1e-15);
        // k = 2, beta = (2): norm 2^2 * 2!/2! = 4
        let v2 = sym_pairing(2, 1, &one, &one).unwrap();
        assert!((v2.re - 4.0).abs() < 1e-15);
        // distinct beta are orthogonal
        let u = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let w = [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let v3 = sym_pairing(2, 2, &u, &w).unwrap();
        assert!(v3.norm() < 1e-15);
    }
}
