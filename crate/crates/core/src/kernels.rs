//! Model kernels on the Bargmann space and their exact composition calculus.
//!
//! Five Gaussian bases are supported. Writing the tangential factor
//! T(Z, Z') = exp(-pi/2 * sum_{i<=m} (|z_i|^2 + |z'_i|^2 - 2 z_i conj(z'_i))),
//! they are:
//!
//! - `BargmannProj(n)`: T over all n coordinates (the Bergman kernel of C^n);
//! - `OrthoProj0(n,m)`: T over the first m coordinates times
//!   exp(-pi/2 sum_{i>m} (|z_i|^2 + |z'_i|^2));
//! - `Ext0(n,m)`:  T times exp(-pi/2 |z_N|^2), kernel from C^m to C^n;
//! - `Res0(n,m)`:  T times exp(-pi/2 |z'_N|^2), kernel from C^n to C^m;
//! - `SubProj(m)`: T on the submanifold factor C^m.
//!
//! A composition of two polynomial amplitudes against these bases is again a
//! polynomial amplitude; the reduction works per W-coordinate of the
//! intermediate integral. Tangential coordinates obey the reproducing rule
//!
//!   [1, z^a zb^b]  ->  sum_{k <= min(a,b)} pi^-k a! b! / ((a-k)! (b-k)! k!)
//!                      * z^{a-k} zb'^{b-k},
//!
//! and normal coordinates contract to the Gaussian moment delta_{ab} a!/pi^a.
//! Sym^k-valued kernels are matrices of scalar amplitudes indexed by normal
//! multi-indices; contraction over a Sym index carries the pairing weight
//! beta!/k!.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;

use crate::coeff::{GaussRat, PiCoeff};
use crate::error::{Error, Result};
use crate::poly::{Monomial, MultiPoly, Var, VarDims};

/// Kind tags for [`KernelBase`]. `LogBK` is deliberately absent: logarithmic
/// kernels are handled by [`LogKernel`] as a finite difference of projectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    BargmannProj,
    OrthoProj0,
    Ext0,
    Res0,
    SubProj,
}

/// One of the five Gaussian model bases with its dimensions n >= m >= 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelBase {
    pub kind: KernelKind,
    pub n: usize,
    pub m: usize,
}

impl KernelBase {
    pub fn new(kind: KernelKind, n: usize, m: usize) -> Result<Self> {
        if m > n {
            return Err(Error::InvalidKernel(format!("m = {m} exceeds n = {n}")));
        }
        Ok(KernelBase { kind, n, m })
    }

    pub fn bargmann(n: usize) -> Self {
        KernelBase {
            kind: KernelKind::BargmannProj,
            n,
            m: n,
        }
    }

    pub fn ortho0(n: usize, m: usize) -> Result<Self> {
        Self::new(KernelKind::OrthoProj0, n, m)
    }

    pub fn ext0(n: usize, m: usize) -> Result<Self> {
        Self::new(KernelKind::Ext0, n, m)
    }

    pub fn res0(n: usize, m: usize) -> Result<Self> {
        Self::new(KernelKind::Res0, n, m)
    }

    pub fn sub(m: usize) -> Self {
        KernelBase {
            kind: KernelKind::SubProj,
            n: m,
            m,
        }
    }

    /// Variable dimensions a legal amplitude must have.
    pub fn amplitude_dims(&self) -> VarDims {
        match self.kind {
            KernelKind::BargmannProj | KernelKind::OrthoProj0 => VarDims::new(self.n, self.n),
            KernelKind::Ext0 => VarDims::new(self.n, self.m),
            KernelKind::Res0 => VarDims::new(self.m, self.n),
            KernelKind::SubProj => VarDims::new(self.m, self.m),
        }
    }

    pub fn normal_dim(&self) -> usize {
        self.n - self.m
    }

    /// Numeric value of the Gaussian factor.
    pub fn eval(&self, z: &[Complex64], zp: &[Complex64]) -> Complex64 {
        let pi = std::f64::consts::PI;
        let tang = |count: usize| -> Complex64 {
            let mut e = Complex64::new(0.0, 0.0);
            for i in 0..count {
                e += z[i].norm_sqr() + zp[i].norm_sqr() - 2.0 * z[i] * zp[i].conj();
            }
            (-0.5 * pi * e).exp()
        };
        match self.kind {
            KernelKind::BargmannProj => tang(self.n),
            KernelKind::SubProj => tang(self.m),
            KernelKind::OrthoProj0 => {
                let mut e = 0.0;
                for i in self.m..self.n {
                    e += z[i].norm_sqr() + zp[i].norm_sqr();
                }
                tang(self.m) * (-0.5 * pi * e).exp()
            }
            KernelKind::Ext0 => {
                let mut e = 0.0;
                for i in self.m..self.n {
                    e += z[i].norm_sqr();
                }
                tang(self.m) * (-0.5 * pi * e).exp()
            }
            KernelKind::Res0 => {
                let mut e = 0.0;
                for i in self.m..self.n {
                    e += zp[i].norm_sqr();
                }
                tang(self.m) * (-0.5 * pi * e).exp()
            }
        }
    }

    fn adjoint(&self) -> Result<KernelBase> {
        Ok(match self.kind {
            KernelKind::BargmannProj | KernelKind::OrthoProj0 | KernelKind::SubProj => *self,
            KernelKind::Ext0 => KernelBase::res0(self.n, self.m)?,
            KernelKind::Res0 => KernelBase::ext0(self.n, self.m)?,
        })
    }
}

impl fmt::Display for KernelBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            KernelKind::BargmannProj => write!(f, "P {}", self.n),
            KernelKind::OrthoProj0 => write!(f, "Pperp0 {} {}", self.n, self.m),
            KernelKind::Ext0 => write!(f, "E0 {} {}", self.n, self.m),
            KernelKind::Res0 => write!(f, "Res0 {} {}", self.n, self.m),
            KernelKind::SubProj => write!(f, "Psub {}", self.m),
        }
    }
}

/// A polynomial amplitude attached to a base.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyKernel {
    pub base: KernelBase,
    pub amplitude: MultiPoly,
}

impl PolyKernel {
    pub fn new(base: KernelBase, amplitude: MultiPoly) -> Result<Self> {
        if amplitude.dims() != base.amplitude_dims() {
            return Err(Error::IllegalSupport {
                base: base.to_string(),
                reason: format!(
                    "amplitude dims ({}, {}) do not match base dims ({}, {})",
                    amplitude.dims().left,
                    amplitude.dims().right,
                    base.amplitude_dims().left,
                    base.amplitude_dims().right
                ),
            });
        }
        Ok(PolyKernel { base, amplitude })
    }

    pub fn eval(&self, z: &[Complex64], zp: &[Complex64]) -> Result<Complex64> {
        Ok(self.amplitude.eval(z, zp)? * self.base.eval(z, zp))
    }
}

impl fmt::Display for PolyKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {}", self.amplitude, self.base)
    }
}

/// Row/column index of a [`JetKernel`]: either scalar-valued or the sorted
/// set of normal multi-indices beta with |beta| = order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexSet {
    Scalar,
    Sym {
        normal_dim: usize,
        order: u32,
        indices: Vec<Vec<u16>>,
    },
}

impl IndexSet {
    pub fn scalar() -> Self {
        IndexSet::Scalar
    }

    pub fn sym(normal_dim: usize, order: u32) -> Self {
        IndexSet::Sym {
            normal_dim,
            order,
            indices: multi_indices(normal_dim, order),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            IndexSet::Scalar => 1,
            IndexSet::Sym { indices, .. } => indices.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn order(&self) -> u32 {
        match self {
            IndexSet::Scalar => 0,
            IndexSet::Sym { order, .. } => *order,
        }
    }

    /// Pairing weight beta!/k! used when contracting over this index.
    pub fn pairing_weight(&self, i: usize) -> PiCoeff {
        match self {
            IndexSet::Scalar => PiCoeff::one(),
            IndexSet::Sym { order, indices, .. } => factorial_ratio(&indices[i], *order),
        }
    }

    /// Sym metric weight 2^k beta!/k! (the squared norm of dz^{. beta}).
    pub fn metric_weight(&self, i: usize) -> PiCoeff {
        let two_k = PiCoeff::from_int(1 << (self.order() as i64).min(62));
        match self {
            IndexSet::Scalar => PiCoeff::one(),
            IndexSet::Sym { order, indices, .. } => {
                two_k.mul(&factorial_ratio(&indices[i], *order))
            }
        }
    }

    pub fn indices(&self) -> Vec<Vec<u16>> {
        match self {
            IndexSet::Scalar => vec![vec![]],
            IndexSet::Sym { indices, .. } => indices.clone(),
        }
    }
}

/// beta!/k! as an exact coefficient.
fn factorial_ratio(beta: &[u16], k: u32) -> PiCoeff {
    let mut num = BigInt::one();
    for &b in beta {
        for i in 2..=b as u64 {
            num *= BigInt::from(i);
        }
    }
    let mut den = BigInt::one();
    for i in 2..=k as u64 {
        den *= BigInt::from(i);
    }
    PiCoeff::from_gauss(GaussRat::new(
        BigRational::new(num, den),
        BigRational::from_integer(0.into()),
    ))
}

/// All beta in N^d with |beta| = k, lexicographically sorted.
pub fn multi_indices(d: usize, k: u32) -> Vec<Vec<u16>> {
    fn rec(d: usize, k: u32, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if d == 1 {
            cur.push(k as u16);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in (0..=k).rev() {
            cur.push(first as u16);
            rec(d - 1, k - first, cur, out);
            cur.pop();
        }
    }
    if d == 0 {
        return if k == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    rec(d, k, &mut cur, &mut out);
    out.sort();
    out
}

pub fn multi_factorial(beta: &[u16]) -> PiCoeff {
    let mut f = BigInt::one();
    for &b in beta {
        for i in 2..=b as u64 {
            f *= BigInt::from(i);
        }
    }
    PiCoeff::from_gauss(GaussRat::new(
        BigRational::from_integer(f),
        BigRational::from_integer(0.into()),
    ))
}

/// A beta-indexed matrix of amplitudes over a shared base. Scalar kernels are
/// the 1x1 case with both indices [`IndexSet::Scalar`].
#[derive(Clone, Debug, PartialEq)]
pub struct JetKernel {
    pub base: KernelBase,
    pub rows: IndexSet,
    pub cols: IndexSet,
    /// entries[r][c], amplitudes with the base's variable dims
    pub entries: Vec<Vec<MultiPoly>>,
}

impl JetKernel {
    pub fn new(
        base: KernelBase,
        rows: IndexSet,
        cols: IndexSet,
        entries: Vec<Vec<MultiPoly>>,
    ) -> Result<Self> {
        if entries.len() != rows.len() || entries.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::ShapeMismatch(
                entries.len(),
                entries.first().map(|r| r.len()).unwrap_or(0),
                rows.len(),
                cols.len(),
            ));
        }
        for row in &entries {
            for a in row {
                if a.dims() != base.amplitude_dims() {
                    return Err(Error::IllegalSupport {
                        base: base.to_string(),
                        reason: "entry dims differ from base dims".into(),
                    });
                }
            }
        }
        Ok(JetKernel {
            base,
            rows,
            cols,
            entries,
        })
    }

    pub fn scalar(kernel: PolyKernel) -> Self {
        JetKernel {
            base: kernel.base,
            rows: IndexSet::Scalar,
            cols: IndexSet::Scalar,
            entries: vec![vec![kernel.amplitude]],
        }
    }

    pub fn zero_like(base: KernelBase, rows: IndexSet, cols: IndexSet) -> Self {
        let z = MultiPoly::zero(base.amplitude_dims());
        let entries = vec![vec![z; cols.len()]; rows.len()];
        JetKernel {
            base,
            rows,
            cols,
            entries,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|r| r.iter().all(|a| a.is_zero()))
    }

    pub fn scale(&self, c: &PiCoeff) -> Self {
        let mut out = self.clone();
        for row in &mut out.entries {
            for a in row {
                *a = a.scale(c);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.base != other.base || self.rows != other.rows || self.cols != other.cols {
            return Err(Error::NonComposable(
                self.base.to_string(),
                other.base.to_string(),
            ));
        }
        let mut out = self.clone();
        for (r, row) in out.entries.iter_mut().enumerate() {
            for (c, a) in row.iter_mut().enumerate() {
                *a = a.add(&other.entries[r][c])?;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&PiCoeff::from_int(-1)))
    }

    pub fn max_degree(&self) -> u32 {
        self.entries
            .iter()
            .flat_map(|r| r.iter().map(|a| a.total_degree()))
            .max()
            .unwrap_or(0)
    }

    /// Evaluate all entries at a point pair; amplitude times Gaussian base.
    pub fn eval(&self, z: &[Complex64], zp: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
        let g = self.base.eval(z, zp);
        let mut out = vec![vec![Complex64::new(0.0, 0.0); self.cols.len()]; self.rows.len()];
        for (r, row) in self.entries.iter().enumerate() {
            for (c, a) in row.iter().enumerate() {
                out[r][c] = a.eval(z, zp)? * g;
            }
        }
        Ok(out)
    }

    /// Adjoint with respect to the L2 structures, including the Sym^k metric
    /// weights: entries conj-swap and transpose, the base flips Ext0 <-> Res0,
    /// and the matrix picks up 2^{k_rows - k_cols}.
    pub fn adjoint(&self) -> Result<JetKernel> {
        let base = self.base.adjoint()?;
        let k_r = self.rows.order() as i64;
        let k_c = self.cols.order() as i64;
        let factor = if k_r >= k_c {
            PiCoeff::from_int(1i64 << (k_r - k_c))
        } else {
            PiCoeff::from_ratio(1, 1i64 << (k_c - k_r))
        };
        let mut entries =
            vec![vec![MultiPoly::zero(base.amplitude_dims()); self.rows.len()]; self.cols.len()];
        for (r, row) in self.entries.iter().enumerate() {
            for (c, a) in row.iter().enumerate() {
                entries[c][r] = a.conj_swap().scale(&factor);
            }
        }
        JetKernel::new(base, self.cols.clone(), self.rows.clone(), entries)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "base": self.base.to_string(),
            "rows": self.rows.indices(),
            "cols": self.cols.indices(),
            "entries": self.entries.iter().map(|row| {
                row.iter().map(|a| a.to_string()).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for JetKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows.len() == 1 && self.cols.len() == 1 {
            return write!(f, "{} | {}", self.entries[0][0], self.base);
        }
        writeln!(
            f,
            "[{}x{}] over {}",
            self.rows.len(),
            self.cols.len(),
            self.base
        )?;
        for row in &self.entries {
            for a in row {
                writeln!(f, "  {}", a)?;
            }
        }
        Ok(())
    }
}

/// Builder kinds understood by [`build_model_kernel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Bergman projector of C^n
    P,
    /// orthogonal projector of order k
    Pperp,
    /// minimal L2 jet extension of order k
    E,
    /// jet restriction of order k
    Res,
}

/// Construct the model kernel of the requested kind and jet order.
pub fn build_model_kernel(kind: ModelKind, n: usize, m: usize, k: u32) -> Result<JetKernel> {
    if m > n {
        return Err(Error::InvalidKernel(format!("m = {m} exceeds n = {n}")));
    }
    let d = n - m;
    match kind {
        ModelKind::P => {
            let base = KernelBase::bargmann(n);
            Ok(JetKernel::scalar(PolyKernel::new(
                base,
                MultiPoly::one(base.amplitude_dims()),
            )?))
        }
        ModelKind::Pperp => {
            let base = KernelBase::ortho0(n, m)?;
            let dims = base.amplitude_dims();
            let mut amp = MultiPoly::zero(dims);
            for beta in multi_indices(d, k) {
                let mut term = MultiPoly::one(dims);
                for (i, &b) in beta.iter().enumerate() {
                    if b > 0 {
                        let zp = MultiPoly::var_pow(dims, Var::Z(m + i), b)?;
                        let zbp = MultiPoly::var_pow(dims, Var::Zbp(m + i), b)?;
                        term = term.mul(&zp)?.mul(&zbp)?;
                    }
                }
                let coeff =
                    PiCoeff::pi_pow(k as i32).mul(&multi_factorial(&beta).inv_monomial().unwrap());
                amp = amp.add(&term.scale(&coeff))?;
            }
            Ok(JetKernel::scalar(PolyKernel::new(base, amp)?))
        }
        ModelKind::E => {
            let base = KernelBase::ext0(n, m)?;
            let dims = base.amplitude_dims();
            let cols = IndexSet::sym(d, k);
            let mut entries = vec![Vec::with_capacity(cols.len())];
            for beta in cols.indices() {
                let mut term = MultiPoly::one(dims);
                for (i, &b) in beta.iter().enumerate() {
                    if b > 0 {
                        term = term.mul(&MultiPoly::var_pow(dims, Var::Z(m + i), b)?)?;
                    }
                }
                let coeff = multi_factorial(&beta).inv_monomial().unwrap();
                entries[0].push(term.scale(&coeff));
            }
            JetKernel::new(base, IndexSet::Scalar, cols, entries)
        }
        ModelKind::Res => {
            let base = KernelBase::res0(n, m)?;
            let dims = base.amplitude_dims();
            let rows = IndexSet::sym(d, k);
            let mut entries = Vec::with_capacity(rows.len());
            for beta in rows.indices() {
                let mut term = MultiPoly::one(dims);
                for (i, &b) in beta.iter().enumerate() {
                    if b > 0 {
                        term = term.mul(&MultiPoly::var_pow(dims, Var::Zbp(m + i), b)?)?;
                    }
                }
                let coeff = PiCoeff::pi_pow(k as i32)
                    .mul(&PiCoeff::factorial(k))
                    .mul(&multi_factorial(&beta).inv_monomial().unwrap());
                entries.push(vec![term.scale(&coeff)]);
            }
            JetKernel::new(base, rows, IndexSet::Scalar, entries)
        }
    }
}

/// Logarithmic Bergman kernel of order k: the full projector minus the finite
/// ladder of orthogonal projectors of orders below k. The amplitude of the
/// remainder is an infinite series, so the pair representation is kept and
/// only numeric evaluation sums the difference.
#[derive(Clone, Debug)]
pub struct LogKernel {
    pub n: usize,
    pub m: usize,
    pub k: u32,
}

impl LogKernel {
    pub fn new(n: usize, m: usize, k: u32) -> Result<Self> {
        if m > n {
            return Err(Error::InvalidKernel(format!("m = {m} exceeds n = {n}")));
        }
        Ok(LogKernel { n, m, k })
    }

    pub fn full(&self) -> JetKernel {
        build_model_kernel(ModelKind::P, self.n, self.m, 0).expect("valid dims")
    }

    pub fn ladder(&self) -> Vec<JetKernel> {
        (0..self.k)
            .map(|l| build_model_kernel(ModelKind::Pperp, self.n, self.m, l).expect("valid dims"))
            .collect()
    }

    pub fn eval(&self, z: &[Complex64], zp: &[Complex64]) -> Result<Complex64> {
        let mut v = self.full().eval(z, zp)?[0][0];
        for p in self.ladder() {
            v -= p.eval(z, zp)?[0][0];
        }
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// Composition
// ---------------------------------------------------------------------------

/// How the intermediate integral treats W-coordinates, together with the
/// output base.
struct PairSpec {
    w_dim: usize,
    w_tangential: usize,
    out: KernelBase,
}

fn pair_spec(b1: &KernelBase, b2: &KernelBase) -> Result<PairSpec> {
    use KernelKind::*;
    let err = || Error::NonComposable(b1.to_string(), b2.to_string());
    let spec = match (b1.kind, b2.kind) {
        (OrthoProj0, OrthoProj0) => {
            if (b1.n, b1.m) != (b2.n, b2.m) {
                return Err(err());
            }
            PairSpec {
                w_dim: b1.n,
                w_tangential: b1.m,
                out: *b1,
            }
        }
        (BargmannProj, BargmannProj) => {
            if b1.n != b2.n {
                return Err(err());
            }
            PairSpec {
                w_dim: b1.n,
                w_tangential: b1.n,
                out: *b1,
            }
        }
        (SubProj, SubProj) => {
            if b1.m != b2.m {
                return Err(err());
            }
            PairSpec {
                w_dim: b1.m,
                w_tangential: b1.m,
                out: *b1,
            }
        }
        (Ext0, SubProj) => {
            if b1.m != b2.m {
                return Err(err());
            }
            PairSpec {
                w_dim: b1.m,
                w_tangential: b1.m,
                out: *b1,
            }
        }
        (Ext0, Res0) => {
            if (b1.n, b1.m) != (b2.n, b2.m) {
                return Err(err());
            }
            PairSpec {
                w_dim: b1.m,
                w_tangential: b1.m,
                out: KernelBase::ortho0(b1.n, b1.m)?,
            }
        }
        (SubProj, Res0) => {
            if b1.m != b2.m {
                return Err(err());
            }
            PairSpec {
                w_dim: b1.m,
                w_tangential: b1.m,
                out: *b2,
            }
        }
        (Res0, Ext0) => {
            if (b1.n, b1.m) != (b2.n, b2.m) {
                return Err(err());
            }
            // integrate over all of C^n: m tangential coords reproduce,
            // n - m normal coords contract to moments
            PairSpec {
                w_dim: b1.n,
                w_tangential: b1.m,
                out: KernelBase::sub(b1.m),
            }
        }
        _ => return Err(err()),
    };
    Ok(spec)
}

/// Tangential reproducing rule for one coordinate: combined exponents (a, b)
/// of w, wb produce a polynomial in z_i, zb'_i.
fn tangential_rule(out_dims: VarDims, i: usize, a: u16, b: u16) -> MultiPoly {
    let mut out = MultiPoly::zero(out_dims);
    let amax = a.min(b);
    for k in 0..=amax {
        // a! b! / ((a-k)! (b-k)! k!) / pi^k
        let mut num = BigInt::one();
        for t in (a - k + 1)..=a {
            num *= BigInt::from(t as u64);
        }
        for t in (b - k + 1)..=b {
            num *= BigInt::from(t as u64);
        }
        let mut den = BigInt::one();
        for t in 2..=k {
            den *= BigInt::from(t as u64);
        }
        let coeff = PiCoeff::gauss_pi(
            GaussRat::new(
                BigRational::new(num, den),
                BigRational::from_integer(0.into()),
            ),
            -(k as i32),
        );
        // z_i^{a-k} * zb'_i^{b-k}
        let mut p = MultiPoly::one(out_dims);
        if a - k > 0 {
            p = p
                .mul(&MultiPoly::var_pow(out_dims, Var::Z(i), a - k).expect("in range"))
                .expect("dims");
        }
        if b - k > 0 {
            p = p
                .mul(&MultiPoly::var_pow(out_dims, Var::Zbp(i), b - k).expect("in range"))
                .expect("dims");
        }
        out = out.add(&p.scale(&coeff)).expect("dims");
    }
    out
}

/// Normal moment rule: delta_{ab} a! / pi^a.
fn normal_moment(a: u16, b: u16) -> PiCoeff {
    if a != b {
        return PiCoeff::zero();
    }
    let mut f = BigInt::one();
    for t in 2..=a {
        f *= BigInt::from(t as u64);
    }
    PiCoeff::gauss_pi(
        GaussRat::new(
            BigRational::from_integer(f),
            BigRational::from_integer(0.into()),
        ),
        -(a as i32),
    )
}

/// Composition of two scalar amplitudes over a base pair. a1's first family
/// passes out front, its second family migrates into the W slot; a2's second
/// family passes out front. Each W coordinate then applies the reproducing or
/// the moment rule.
fn compose_scalar(a1: &MultiPoly, a2: &MultiPoly, spec: &PairSpec) -> Result<MultiPoly> {
    let out_dims = spec.out.amplitude_dims();
    let d1 = a1.dims();
    let d2 = a2.dims();
    if d1.right != spec.w_dim || d2.left != spec.w_dim {
        return Err(Error::DimensionMismatch(
            (d1.left, d1.right),
            (d2.left, d2.right),
        ));
    }
    let mut result = MultiPoly::zero(out_dims);
    let width_out = 2 * out_dims.left + 2 * out_dims.right;

    for (m1, c1) in a1.terms() {
        // split m1 into out-front left part and W exponents
        let mut front1 = Monomial::unit(width_out);
        for i in 0..d1.left {
            front1.0[i] = m1.0[i]; // z_i
            front1.0[out_dims.left + i] = m1.0[d1.left + i]; // zb_i
        }
        let w1_hol = &m1.0[2 * d1.left..2 * d1.left + d1.right];
        let w1_anti = &m1.0[2 * d1.left + d1.right..];

        for (m2, c2) in a2.terms() {
            let w2_hol = &m2.0[0..d2.left];
            let w2_anti = &m2.0[d2.left..2 * d2.left];
            // out-front right part
            let mut front = front1.clone();
            for j in 0..d2.right {
                front.0[2 * out_dims.left + j] += m2.0[2 * d2.left + j];
                front.0[2 * out_dims.left + out_dims.right + j] += m2.0[2 * d2.left + d2.right + j];
            }

            let mut piece = MultiPoly::zero(out_dims);
            piece.add_term(front, c1.mul(c2));

            for i in 0..spec.w_dim {
                let a = w1_hol[i] + w2_hol[i];
                let b = w1_anti[i] + w2_anti[i];
                if i < spec.w_tangential {
                    if a == 0 && b == 0 {
                        continue;
                    }
                    piece = piece.mul(&tangential_rule(out_dims, i, a, b))?;
                } else {
                    let c = normal_moment(a, b);
                    if c.is_zero() {
                        piece = MultiPoly::zero(out_dims);
                        break;
                    }
                    piece = piece.scale(&c);
                }
                if piece.is_zero() {
                    break;
                }
            }
            result = result.add(&piece)?;
        }
    }
    Ok(result)
}

/// Compose two jet kernels, contracting the shared index with the Sym pairing
/// weights. `k1` acts after `k2`. A scalar kernel composes against a
/// Sym-indexed one by acting as scalar times the identity on the Sym factor.
pub fn compose(k1: &JetKernel, k2: &JetKernel) -> Result<JetKernel> {
    let spec = pair_spec(&k1.base, &k2.base)?;
    let scalar_shape = |k: &JetKernel| k.rows == IndexSet::Scalar && k.cols == IndexSet::Scalar;
    if k1.cols != k2.rows && scalar_shape(k2) {
        // broadcast k2 over the Sym index of k1: entrywise composition
        let mut entries =
            vec![vec![MultiPoly::zero(spec.out.amplitude_dims()); k1.cols.len()]; k1.rows.len()];
        for r in 0..k1.rows.len() {
            for c in 0..k1.cols.len() {
                entries[r][c] = compose_scalar(&k1.entries[r][c], &k2.entries[0][0], &spec)?;
            }
        }
        return JetKernel::new(spec.out, k1.rows.clone(), k1.cols.clone(), entries);
    }
    if k1.cols != k2.rows && scalar_shape(k1) {
        let mut entries =
            vec![vec![MultiPoly::zero(spec.out.amplitude_dims()); k2.cols.len()]; k2.rows.len()];
        for r in 0..k2.rows.len() {
            for c in 0..k2.cols.len() {
                entries[r][c] = compose_scalar(&k1.entries[0][0], &k2.entries[r][c], &spec)?;
            }
        }
        return JetKernel::new(spec.out, k2.rows.clone(), k2.cols.clone(), entries);
    }
    if k1.cols.len() != k2.rows.len() || k1.cols.order() != k2.rows.order() {
        return Err(Error::ShapeMismatch(
            k1.rows.len(),
            k1.cols.len(),
            k2.rows.len(),
            k2.cols.len(),
        ));
    }
    let rows = k1.rows.clone();
    let cols = k2.cols.clone();
    let mut entries =
        vec![vec![MultiPoly::zero(spec.out.amplitude_dims()); cols.len()]; rows.len()];
    for r in 0..rows.len() {
        for c in 0..cols.len() {
            let mut acc = MultiPoly::zero(spec.out.amplitude_dims());
            for i in 0..k1.cols.len() {
                if k1.entries[r][i].is_zero() || k2.entries[i][c].is_zero() {
                    continue;
                }
                let w = k1.cols.pairing_weight(i);
                let part = compose_scalar(&k1.entries[r][i], &k2.entries[i][c], &spec)?;
                acc = acc.add(&part.scale(&w))?;
            }
            entries[r][c] = acc;
        }
    }
    JetKernel::new(spec.out, rows, cols, entries)
}

/// Scalar composition rule restricted to same-base projector pairs; the
/// K_{n,m}[A1, A2] of the composition lemma.
pub fn compose_projector_amplitudes(
    base: &KernelBase,
    a1: &MultiPoly,
    a2: &MultiPoly,
) -> Result<MultiPoly> {
    let spec = pair_spec(base, base)?;
    compose_scalar(a1, a2, &spec)
}

// ---------------------------------------------------------------------------
// Second-order profiles
// ---------------------------------------------------------------------------

/// Coefficients of the cubic g(z_N, A(zb_Y - zb'_Y)(zb_Y - zb'_Y)):
/// entry ((i, j, l), c) contributes c * z_{N,i} (zb_{Y,j} - zb'_{Y,j})
/// (zb_{Y,l} - zb'_{Y,l}).
pub type SecondFundamentalTensor = Vec<((usize, usize, usize), GaussRat)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileKind {
    Ext,
    Perp,
    Res,
}

/// First-order correction profiles: the second-fundamental-form cubic times
/// the matching degree-k jet factor over the appropriate base.
pub fn build_second_order_profile(
    kind: ProfileKind,
    n: usize,
    m: usize,
    k: u32,
    a_tensor: &SecondFundamentalTensor,
) -> Result<JetKernel> {
    for ((i, j, l), _) in a_tensor {
        if *i >= n - m || *j >= m || *l >= m {
            return Err(Error::InvalidKernel(format!(
                "tensor component ({i},{j},{l}) outside normal dim {} / tangential dim {m}",
                n - m
            )));
        }
    }
    // cubic in the target dims; negation handles the primed differences
    let cubic = |dims: VarDims| -> Result<MultiPoly> {
        let mut acc = MultiPoly::zero(dims);
        for ((i, j, l), c) in a_tensor {
            let zn = MultiPoly::var(dims, Var::Z(m + i))?;
            let dj =
                MultiPoly::var(dims, Var::Zb(*j))?.sub(&MultiPoly::var(dims, Var::Zbp(*j))?)?;
            let dl =
                MultiPoly::var(dims, Var::Zb(*l))?.sub(&MultiPoly::var(dims, Var::Zbp(*l))?)?;
            acc = acc.add(
                &zn.mul(&dj)?
                    .mul(&dl)?
                    .scale(&PiCoeff::from_gauss(c.clone())),
            )?;
        }
        Ok(acc)
    };
    match kind {
        ProfileKind::Ext => {
            let template = build_model_kernel(ModelKind::E, n, m, k)?;
            let dims = template.base.amplitude_dims();
            let cu = cubic(dims)?;
            let entries = vec![template.entries[0]
                .iter()
                .map(|e| e.mul(&cu).expect("dims"))
                .collect()];
            JetKernel::new(template.base, IndexSet::Scalar, template.cols, entries)
        }
        ProfileKind::Perp => {
            let template = build_model_kernel(ModelKind::Pperp, n, m, k)?;
            let dims = template.base.amplitude_dims();
            let cu = cubic(dims)?;
            let both = cu.add(&cu.conj_swap())?;
            let amp = template.entries[0][0]
                .mul(&both)?
                .scale(&PiCoeff::pi_pow(1));
            JetKernel::new(
                template.base,
                IndexSet::Scalar,
                IndexSet::Scalar,
                vec![vec![amp]],
            )
        }
        ProfileKind::Res => {
            let template = build_model_kernel(ModelKind::Res, n, m, k)?;
            let dims = template.base.amplitude_dims();
            // partner cubic lives in the Res dims directly: conj-swap of the
            // Ext-side cubic built in (n, m)
            let ext_dims = VarDims::new(n, m);
            let partner = {
                let mut acc = MultiPoly::zero(ext_dims);
                for ((i, j, l), c) in a_tensor {
                    let zn = MultiPoly::var(ext_dims, Var::Z(m + i))?;
                    let dj = MultiPoly::var(ext_dims, Var::Zb(*j))?
                        .sub(&MultiPoly::var(ext_dims, Var::Zbp(*j))?)?;
                    let dl = MultiPoly::var(ext_dims, Var::Zb(*l))?
                        .sub(&MultiPoly::var(ext_dims, Var::Zbp(*l))?)?;
                    acc = acc.add(
                        &zn.mul(&dj)?
                            .mul(&dl)?
                            .scale(&PiCoeff::from_gauss(c.clone())),
                    )?;
                }
                acc.conj_swap()
            };
            debug_assert_eq!(partner.dims(), dims);
            let entries: Vec<Vec<MultiPoly>> = template
                .entries
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|e| e.mul(&partner).expect("dims").scale(&PiCoeff::pi_pow(1)))
                        .collect()
                })
                .collect();
            JetKernel::new(template.base, template.rows, IndexSet::Scalar, entries)
        }
    }
}
