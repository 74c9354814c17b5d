//! Coefficient ring for kernel amplitudes: Laurent polynomials in pi over the
//! Gaussian rationals.
//!
//! Composition rules for model kernels produce exact factors pi^k and 1/pi^k,
//! so identity checks stay in exact arithmetic and never depend on a float
//! tolerance. Numeric evaluation substitutes pi = 3.14159... at the very end.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact Gaussian rational a + b*i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GaussRat::new(BigRational::one(), BigRational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat::new(
            BigRational::from_integer(BigInt::from(n)),
            BigRational::zero(),
        )
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        GaussRat::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        GaussRat::new(&self.re + &other.re, &self.im + &other.im)
    }

    pub fn neg(&self) -> Self {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        GaussRat::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
}

/// BigRational -> f64 via long division with 64-bit mantissa headroom.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    rat_to_f64(r)
}

fn rat_to_f64(r: &BigRational) -> f64 {
    // BigRational -> f64 via long division with 64-bit mantissa headroom.
    let num = r.numer();
    let den = r.denom();
    let (sign, num) = if num.is_negative() {
        (-1.0, -num.clone())
    } else {
        (1.0, num.clone())
    };
    if num.is_zero() {
        return 0.0;
    }
    let shift = 128i64 - (num.bits() as i64 - den.bits() as i64);
    let scaled = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let mut x = 0.0f64;
    for digit in scaled.to_u64_digits().1.iter().rev() {
        x = x * 1.8446744073709552e19 + *digit as f64;
    }
    sign * x * (2f64).powi(-shift as i32)
}

/// A dimensionless coefficient: finite sum of g_j * pi^j with exact Gaussian
/// rational g_j, stored in canonical form (no zero terms).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PiCoeff {
    terms: BTreeMap<i32, GaussRat>,
}

impl PiCoeff {
    pub fn zero() -> Self {
        PiCoeff {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        PiCoeff::from_gauss(GaussRat::one())
    }

    pub fn from_gauss(g: GaussRat) -> Self {
        let mut c = PiCoeff::zero();
        c.add_term(0, g);
        c
    }

    pub fn from_int(n: i64) -> Self {
        PiCoeff::from_gauss(GaussRat::from_int(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        PiCoeff::from_gauss(GaussRat::from_ratio(num, den))
    }

    /// g * pi^j.
    pub fn gauss_pi(g: GaussRat, j: i32) -> Self {
        let mut c = PiCoeff::zero();
        c.add_term(j, g);
        c
    }

    /// pi^j.
    pub fn pi_pow(j: i32) -> Self {
        PiCoeff::gauss_pi(GaussRat::one(), j)
    }

    /// n! as an exact coefficient.
    pub fn factorial(n: u32) -> Self {
        let mut f = BigInt::one();
        for i in 2..=n {
            f *= BigInt::from(i);
        }
        PiCoeff::from_gauss(GaussRat::new(
            BigRational::from_integer(f),
            BigRational::zero(),
        ))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, j: i32, g: GaussRat) {
        if g.is_zero() {
            return;
        }
        let entry = self.terms.entry(j).or_insert_with(GaussRat::zero);
        *entry = entry.add(&g);
        if entry.is_zero() {
            self.terms.remove(&j);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (j, g) in &other.terms {
            out.add_term(*j, g.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        PiCoeff {
            terms: self.terms.iter().map(|(j, g)| (*j, g.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = PiCoeff::zero();
        for (j1, g1) in &self.terms {
            for (j2, g2) in &other.terms {
                out.add_term(j1 + j2, g1.mul(g2));
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        PiCoeff {
            terms: self.terms.iter().map(|(j, g)| (*j, g.conj())).collect(),
        }
    }

    /// Multiplicative inverse for single-term coefficients (g * pi^j).
    /// Composition rules only ever divide by factorials and pi powers.
    pub fn inv_monomial(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (j, g) = self.terms.iter().next().unwrap();
        let norm = &g.re * &g.re + &g.im * &g.im;
        if norm.is_zero() {
            return None;
        }
        Some(PiCoeff::gauss_pi(
            GaussRat::new(&g.re / &norm, -(&g.im / &norm)),
            -j,
        ))
    }

    /// Smallest pi-exponent present, if any. Used by the grading checks.
    pub fn min_pi_exponent(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn eval(&self) -> Complex64 {
        let mut v = Complex64::new(0.0, 0.0);
        for (j, g) in &self.terms {
            v += g.to_complex() * PI.powi(*j);
        }
        v
    }

    pub fn iter(&self) -> impl Iterator<Item = (&i32, &GaussRat)> {
        self.terms.iter()
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", fmt_rational(&self.re))
        } else if self.re.is_zero() {
            write!(f, "{} i", fmt_rational(&self.im))
        } else if self.im.is_negative() {
            write!(
                f,
                "({} - {} i)",
                fmt_rational(&self.re),
                fmt_rational(&(-self.im.clone()))
            )
        } else {
            write!(
                f,
                "({} + {} i)",
                fmt_rational(&self.re),
                fmt_rational(&self.im)
            )
        }
    }
}

impl fmt::Display for PiCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, g) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let unit_gauss = g.im.is_zero() && g.re.is_one();
            match (*j, unit_gauss) {
                (0, _) => write!(f, "{}", g)?,
                (_, true) => write!(f, "pi^{}", j)?,
                (_, false) => write!(f, "{}*pi^{}", g, j)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_strips_zeros() {
        let mut c = PiCoeff::pi_pow(2);
        c.add_term(2, GaussRat::from_int(-1));
        assert!(c.is_zero());
    }

    #[test]
    fn multiplication_adds_pi_exponents() {
        let a = PiCoeff::gauss_pi(GaussRat::from_int(2), 3);
        let b = PiCoeff::gauss_pi(GaussRat::from_ratio(1, 2), -1);
        let p = a.mul(&b);
        assert_eq!(p, PiCoeff::pi_pow(2));
    }

    #[test]
    fn eval_matches_exact_products() {
        // numeric evaluation agrees with exact arithmetic on products of <= 10 factors
        let mut exact = PiCoeff::one();
        let mut float = Complex64::new(1.0, 0.0);
        for k in 1..=10i64 {
            let f = PiCoeff::gauss_pi(
                GaussRat::from_ratio(k, k + 1),
                if k % 2 == 0 { 1 } else { -1 },
            );
            float *= f.eval();
            exact = exact.mul(&f);
        }
        let d = (exact.eval() - float).norm();
        assert!(d <= 1e-12 * float.norm().max(1.0), "drift {d}");
    }

    #[test]
    fn inv_monomial_round_trip() {
        let c = PiCoeff::gauss_pi(
            GaussRat::new(
                BigRational::from_integer(BigInt::from(3)),
                BigRational::from_integer(BigInt::from(4)),
            ),
            2,
        );
        let inv = c.inv_monomial().unwrap();
        assert_eq!(c.mul(&inv), PiCoeff::one());
    }

    #[test]
    fn rational_to_f64_precision() {
        let r = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert!((rat_to_f64(&r) - 1.0 / 3.0).abs() < 1e-15);
        let big = BigRational::new(BigInt::from(10).pow(40) + 7, BigInt::from(3).pow(50));
        let expect = 1e40 / 3f64.powi(50);
        assert!((rat_to_f64(&big) - expect).abs() < 1e-12 * expect);
    }
}
