//! Exact multivariate polynomials in the formal variables z_i, zb_i (first
//! argument) and zp_j, zbp_j (second argument), with [`PiCoeff`] coefficients.
//!
//! z and zb are independent symbols; conjugation symmetry is imposed only at
//! evaluation time. Terms are stored densely in a map keyed by packed exponent
//! vectors in graded-lexicographic order, which also fixes the canonical text
//! serialization.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::coeff::{GaussRat, PiCoeff};
use crate::error::{Error, Result};

/// Identifier of a formal variable. Indices are zero-based internally;
/// the text form is one-based (`z1`, `zb1`, `z'1`, `zb'1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    /// z_i, first argument, holomorphic
    Z(usize),
    /// zb_i, first argument, antiholomorphic
    Zb(usize),
    /// z'_j, second argument, holomorphic
    Zp(usize),
    /// zb'_j, second argument, antiholomorphic
    Zbp(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Z(i) => write!(f, "z{}", i + 1),
            Var::Zb(i) => write!(f, "zb{}", i + 1),
            Var::Zp(i) => write!(f, "z'{}", i + 1),
            Var::Zbp(i) => write!(f, "zb'{}", i + 1),
        }
    }
}

/// Dimensions of the two variable families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VarDims {
    /// complex dimension of the first (unprimed) argument
    pub left: usize,
    /// complex dimension of the second (primed) argument
    pub right: usize,
}

impl VarDims {
    pub fn new(left: usize, right: usize) -> Self {
        VarDims { left, right }
    }

    fn width(&self) -> usize {
        2 * self.left + 2 * self.right
    }

    fn slot(&self, v: Var) -> Option<usize> {
        match v {
            Var::Z(i) if i < self.left => Some(i),
            Var::Zb(i) if i < self.left => Some(self.left + i),
            Var::Zp(j) if j < self.right => Some(2 * self.left + j),
            Var::Zbp(j) if j < self.right => Some(2 * self.left + self.right + j),
            _ => None,
        }
    }

    fn var_at(&self, slot: usize) -> Var {
        if slot < self.left {
            Var::Z(slot)
        } else if slot < 2 * self.left {
            Var::Zb(slot - self.left)
        } else if slot < 2 * self.left + self.right {
            Var::Zp(slot - 2 * self.left)
        } else {
            Var::Zbp(slot - 2 * self.left - self.right)
        }
    }
}

/// Packed exponent vector, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial(pub Vec<u16>);

impl Monomial {
    pub fn unit(width: usize) -> Self {
        Monomial(vec![0; width])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// Exact polynomial in canonical form: no stored zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    dims: VarDims,
    terms: BTreeMap<Monomial, PiCoeff>,
}

/// Parity of a polynomial under Z -> -Z, Z' -> -Z'.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Neither,
}

impl Parity {
    pub fn of_degree(d: u32) -> Parity {
        if d % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn combine(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::Even, p) | (p, Parity::Even) => p,
            (Parity::Odd, Parity::Odd) => Parity::Even,
            _ => Parity::Neither,
        }
    }
}

impl MultiPoly {
    pub fn zero(dims: VarDims) -> Self {
        MultiPoly {
            dims,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dims: VarDims, c: PiCoeff) -> Self {
        let mut p = MultiPoly::zero(dims);
        p.add_term(Monomial::unit(dims.width()), c);
        p
    }

    pub fn one(dims: VarDims) -> Self {
        MultiPoly::constant(dims, PiCoeff::one())
    }

    /// Single variable to the first power.
    pub fn var(dims: VarDims, v: Var) -> Result<Self> {
        Self::var_pow(dims, v, 1)
    }

    pub fn var_pow(dims: VarDims, v: Var, e: u16) -> Result<Self> {
        let slot = dims
            .slot(v)
            .ok_or_else(|| Error::UnknownVariable(v.to_string()))?;
        let mut m = Monomial::unit(dims.width());
        m.0[slot] = e;
        let mut p = MultiPoly::zero(dims);
        p.add_term(m, PiCoeff::one());
        Ok(p)
    }

    pub fn dims(&self) -> VarDims {
        self.dims
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &PiCoeff)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: Monomial, c: PiCoeff) {
        debug_assert_eq!(m.0.len(), self.dims.width());
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(slot) => {
                *slot = slot.add(&c);
                if slot.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn parity(&self) -> Parity {
        let mut even = false;
        let mut odd = false;
        for m in self.terms.keys() {
            if m.degree() % 2 == 0 {
                even = true;
            } else {
                odd = true;
            }
        }
        match (even, odd) {
            (true, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (false, false) => Parity::Even, // zero polynomial
            (true, true) => Parity::Neither,
        }
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(
                (self.dims.left, self.dims.right),
                (other.dims.left, other.dims.right),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        MultiPoly {
            dims: self.dims,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &PiCoeff) -> Self {
        let mut out = MultiPoly::zero(self.dims);
        for (m, g) in &self.terms {
            out.add_term(m.clone(), g.mul(c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let mut out = MultiPoly::zero(self.dims);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m: Vec<u16> = m1.0.iter().zip(&m2.0).map(|(a, b)| a + b).collect();
                out.add_term(Monomial(m), c1.mul(c2));
            }
        }
        Ok(out)
    }

    /// Formal partial derivative of the given order.
    pub fn diff(&self, v: Var, order: u32) -> Result<Self> {
        let slot = self
            .dims
            .slot(v)
            .ok_or_else(|| Error::UnknownVariable(v.to_string()))?;
        let mut out = self.clone();
        for _ in 0..order {
            let mut next = MultiPoly::zero(self.dims);
            for (m, c) in &out.terms {
                let e = m.0[slot];
                if e == 0 {
                    continue;
                }
                let mut m2 = m.clone();
                m2.0[slot] = e - 1;
                next.add_term(m2, c.mul(&PiCoeff::from_int(e as i64)));
            }
            out = next;
        }
        Ok(out)
    }

    /// Rename variables through a map; target dims may differ. Every term's
    /// variables must land inside the target family.
    pub fn rename<F>(&self, target: VarDims, f: F) -> Result<Self>
    where
        F: Fn(Var) -> Var,
    {
        let mut out = MultiPoly::zero(target);
        for (m, c) in &self.terms {
            let mut m2 = Monomial::unit(target.width());
            for (slot, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let v = f(self.dims.var_at(slot));
                let s2 = target
                    .slot(v)
                    .ok_or_else(|| Error::UnknownVariable(v.to_string()))?;
                m2.0[s2] += e;
            }
            out.add_term(m2, c.clone());
        }
        Ok(out)
    }

    /// Swap the two argument families (Z <-> Z') and conjugate coefficients,
    /// mapping z^u zb^v z'^u' zb'^v' to z^{v'} zb^{u'} z'^v zb'^u.
    /// This is the amplitude transform of the kernel adjoint.
    pub fn conj_swap(&self) -> Self {
        let target = VarDims::new(self.dims.right, self.dims.left);
        let mut out = MultiPoly::zero(target);
        for (m, c) in &self.terms {
            let mut m2 = Monomial::unit(target.width());
            for (slot, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let v = match self.dims.var_at(slot) {
                    Var::Z(i) => Var::Zbp(i),
                    Var::Zb(i) => Var::Zp(i),
                    Var::Zp(j) => Var::Zb(j),
                    Var::Zbp(j) => Var::Z(j),
                };
                m2.0[target.slot(v).expect("dims swapped")] += e;
            }
            out.add_term(m2, c.conj());
        }
        out
    }

    /// Largest variable index in use, per family side. Used by support checks.
    pub fn support(&self) -> SupportInfo {
        let mut info = SupportInfo::default();
        let d = self.dims;
        for m in self.terms.keys() {
            for (slot, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match d.var_at(slot) {
                    Var::Z(i) | Var::Zb(i) => info.max_left = info.max_left.max(i as i64 + 1),
                    Var::Zp(j) | Var::Zbp(j) => info.max_right = info.max_right.max(j as i64 + 1),
                }
            }
        }
        info
    }

    /// Numeric evaluation with zb/zb' defaulting to conjugates of z/z'.
    pub fn eval(&self, z: &[Complex64], zp: &[Complex64]) -> Result<Complex64> {
        self.eval_full(z, &conj_all(z), zp, &conj_all(zp))
    }

    /// Numeric evaluation with explicit values for all four families.
    pub fn eval_full(
        &self,
        z: &[Complex64],
        zb: &[Complex64],
        zp: &[Complex64],
        zbp: &[Complex64],
    ) -> Result<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut v = c.eval();
            for (slot, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let var = self.dims.var_at(slot);
                let x = match var {
                    Var::Z(i) => z.get(i),
                    Var::Zb(i) => zb.get(i),
                    Var::Zp(j) => zp.get(j),
                    Var::Zbp(j) => zbp.get(j),
                }
                .ok_or_else(|| Error::MissingAssignment(var.to_string()))?;
                v *= x.powu(e as u32);
            }
            total += v;
        }
        Ok(total)
    }

    /// Smallest pi-exponent over all coefficients (None for the zero poly).
    pub fn min_pi_exponent(&self) -> Option<i32> {
        self.terms
            .values()
            .filter_map(|c| c.min_pi_exponent())
            .min()
    }
}

pub fn conj_all(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|x| x.conj()).collect()
}

/// Float-coefficient mirror of a polynomial for evaluation in hot loops;
/// coefficients are converted from exact form once.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    dims: VarDims,
    terms: Vec<(Vec<u16>, Complex64)>,
}

impl CompiledPoly {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluation with zb/zb' tied to conjugates of z/z'.
    pub fn eval(&self, z: &[Complex64], zp: &[Complex64]) -> Complex64 {
        let d = self.dims;
        let mut total = Complex64::new(0.0, 0.0);
        for (exps, coeff) in &self.terms {
            let mut v = *coeff;
            for i in 0..d.left {
                let (ez, ezb) = (exps[i], exps[d.left + i]);
                if ez > 0 {
                    v *= z[i].powu(ez as u32);
                }
                if ezb > 0 {
                    v *= z[i].conj().powu(ezb as u32);
                }
            }
            for j in 0..d.right {
                let (ez, ezb) = (exps[2 * d.left + j], exps[2 * d.left + d.right + j]);
                if ez > 0 {
                    v *= zp[j].powu(ez as u32);
                }
                if ezb > 0 {
                    v *= zp[j].conj().powu(ezb as u32);
                }
            }
            total += v;
        }
        total
    }
}

impl MultiPoly {
    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            dims: self.dims,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.0.clone(), c.eval()))
                .collect(),
        }
    }
}

// canonical text form: terms in descending graded-lexicographic order
impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mut vars = String::new();
            for (slot, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !vars.is_empty() {
                    vars.push('*');
                }
                vars.push_str(&self.dims.var_at(slot).to_string());
                if e > 1 {
                    vars.push_str(&format!("^{}", e));
                }
            }
            let coeff = format!("{}", c);
            if vars.is_empty() {
                write!(f, "{}", coeff)?;
            } else if coeff == "1" {
                write!(f, "{}", vars)?;
            } else if c.iter().count() > 1 {
                write!(f, "({})*{}", coeff, vars)?;
            } else {
                write!(f, "{}*{}", coeff, vars)?;
            }
        }
        Ok(())
    }
}

/// Which variables a polynomial actually touches.
#[derive(Clone, Copy, Debug, Default)]
pub struct SupportInfo {
    pub max_left: i64,
    pub max_right: i64,
}

/// Naive coefficient-wise product over raw term lists; the independent
/// reference multiplier for oracle tests.
pub fn naive_mul_reference(a: &MultiPoly, b: &MultiPoly) -> Result<Vec<(Vec<u16>, PiCoeff)>> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch(
            (a.dims().left, a.dims().right),
            (b.dims().left, b.dims().right),
        ));
    }
    let mut flat: Vec<(Vec<u16>, PiCoeff)> = Vec::new();
    for (m1, c1) in a.terms() {
        for (m2, c2) in b.terms() {
            let m: Vec<u16> = m1.0.iter().zip(&m2.0).map(|(x, y)| x + y).collect();
            let c = c1.mul(c2);
            match flat.iter_mut().find(|(k, _)| *k == m) {
                Some((_, acc)) => *acc = acc.add(&c),
                None => flat.push((m, c)),
            }
        }
    }
    flat.retain(|(_, c)| !c.is_zero());
    flat.sort_by(|(a, _), (b, _)| Monomial(a.clone()).cmp(&Monomial(b.clone())));
    Ok(flat)
}

/// Seeded random polynomial with full (Z, Z') support and small coefficients.
pub fn random_poly<R: rand::Rng>(
    rng: &mut R,
    dims: VarDims,
    max_degree: u32,
    max_terms: usize,
) -> MultiPoly {
    let width = dims.width();
    let mut p = MultiPoly::zero(dims);
    for _ in 0..max_terms {
        let mut m = Monomial::unit(width);
        let mut budget = rng.gen_range(0..=max_degree);
        while budget > 0 {
            let slot = rng.gen_range(0..width);
            m.0[slot] += 1;
            budget -= 1;
        }
        let num = rng.gen_range(-4i64..=4);
        let den = rng.gen_range(1i64..=3);
        let im = rng.gen_range(-2i64..=2);
        let j = rng.gen_range(-1i32..=1);
        p.add_term(
            m,
            PiCoeff::gauss_pi(
                GaussRat::new(
                    num_rational::BigRational::new(num.into(), den.into()),
                    num_rational::BigRational::from_integer(im.into()),
                ),
                j,
            ),
        );
    }
    p
}

/// Seeded random polynomial whose monomials all have the requested parity.
pub fn random_poly_with_parity<R: rand::Rng>(
    rng: &mut R,
    dims: VarDims,
    max_degree: u32,
    max_terms: usize,
    want_odd: bool,
) -> MultiPoly {
    let width = dims.width();
    let mut p = MultiPoly::zero(dims);
    for _ in 0..max_terms {
        let mut m = Monomial::unit(width);
        let mut d = rng.gen_range(0..=max_degree);
        if (d % 2 == 1) != want_odd {
            d = if d < max_degree {
                d + 1
            } else {
                d.saturating_sub(1)
            };
        }
        if (d % 2 == 1) != want_odd {
            continue;
        }
        for _ in 0..d {
            let slot = rng.gen_range(0..width);
            m.0[slot] += 1;
        }
        p.add_term(m, PiCoeff::from_int(rng.gen_range(-3i64..=3)));
    }
    p
}
