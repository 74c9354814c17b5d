//! Parser for the canonical kernel text syntax, the inverse of the Display
//! implementations on [`MultiPoly`] and [`KernelBase`]:
//!
//!   chain  := kernel ( 'o' kernel )*
//!   kernel := '(' poly '|' base ')'
//!   base   := 'P' n | 'Pperp0' n m | 'E0' n m | 'Res0' n m | 'Psub' m
//!   poly   := ['-'] term ( ('+'|'-') term )*
//!   term   := factor ( '*' factor )*
//!   factor := rational | '(' complex ')' | 'pi' ['^' int] | var ['^' uint]
//!   var    := 'z' i | 'zb' i | "z'" i | "zb'" i     (one-based indices)
//!
//! Errors carry the byte position of the offending token.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::coeff::{GaussRat, PiCoeff};
use crate::error::{Error, Result};
use crate::kernels::{JetKernel, KernelBase, PolyKernel};
use crate::poly::{MultiPoly, Var, VarDims};

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_char() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{token}'")))
        }
    }

    fn parse_uint(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self
            .peek_char()
            .map(|c| c.is_ascii_digit())
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| self.err("number out of range"))
    }

    fn parse_int(&mut self) -> Result<i64> {
        self.skip_ws();
        let neg = self.eat("-");
        let v = self.parse_uint()? as i64;
        Ok(if neg { -v } else { v })
    }

    fn parse_rational(&mut self) -> Result<BigRational> {
        let num = self.parse_int()?;
        if self.eat("/") {
            let den = self.parse_uint()?;
            if den == 0 {
                return Err(self.err("zero denominator"));
            }
            Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
        } else {
            Ok(BigRational::from_integer(BigInt::from(num)))
        }
    }

    fn at_digit_or_minus(&mut self) -> bool {
        self.skip_ws();
        matches!(self.peek_char(), Some(c) if c.is_ascii_digit() || c == '-')
    }
}

fn parse_var(lx: &mut Lexer) -> Result<Option<Var>> {
    lx.skip_ws();
    let rest = &lx.src[lx.pos..];
    let (family, len): (fn(usize) -> Var, usize) = if rest.starts_with("zb'") {
        (Var::Zbp, 3)
    } else if rest.starts_with("zb") {
        (Var::Zb, 2)
    } else if rest.starts_with("z'") {
        (Var::Zp, 2)
    } else if rest.starts_with('z') {
        (Var::Z, 1)
    } else {
        return Ok(None);
    };
    lx.pos += len;
    let idx = lx.parse_uint()? as usize;
    if idx == 0 {
        return Err(lx.err("variable indices are one-based"));
    }
    Ok(Some(family(idx - 1)))
}

fn parse_factor(lx: &mut Lexer, dims: VarDims) -> Result<MultiPoly> {
    lx.skip_ws();
    if lx.eat("pi") {
        let e = if lx.eat("^") {
            lx.parse_int()? as i32
        } else {
            1
        };
        return Ok(MultiPoly::constant(dims, PiCoeff::pi_pow(e)));
    }
    if let Some(v) = parse_var(lx)? {
        let e = if lx.eat("^") {
            lx.parse_uint()? as u16
        } else {
            1
        };
        return MultiPoly::var_pow(dims, v, e)
            .map_err(|_| lx.err(format!("variable {v} outside base dimensions")));
    }
    if lx.at_digit_or_minus() {
        let r = lx.parse_rational()?;
        return Ok(MultiPoly::constant(
            dims,
            PiCoeff::from_gauss(GaussRat::new(r, BigRational::from_integer(0.into()))),
        ));
    }
    if lx.eat("(") {
        // complex coefficient (a [+|-] b i)
        let re = lx.parse_rational()?;
        let mut im = BigRational::from_integer(0.into());
        lx.skip_ws();
        if lx.eat("+") || {
            lx.skip_ws();
            matches!(lx.peek_char(), Some('-'))
        } {
            let b = lx.parse_rational()?;
            lx.expect("i")?;
            im = b;
        }
        lx.expect(")")?;
        return Ok(MultiPoly::constant(
            dims,
            PiCoeff::from_gauss(GaussRat::new(re, im)),
        ));
    }
    Err(lx.err("expected a coefficient, pi power, or variable"))
}

fn parse_poly(lx: &mut Lexer, dims: VarDims) -> Result<MultiPoly> {
    let mut acc = MultiPoly::zero(dims);
    let mut negate = lx.eat("-");
    loop {
        let mut term = parse_factor(lx, dims)?;
        while lx.eat("*") {
            term = term
                .mul(&parse_factor(lx, dims)?)
                .map_err(|e| lx.err(e.to_string()))?;
        }
        if negate {
            term = term.neg();
        }
        acc = acc.add(&term).map_err(|e| lx.err(e.to_string()))?;
        lx.skip_ws();
        if lx.eat("+") {
            negate = false;
        } else if {
            lx.skip_ws();
            matches!(lx.peek_char(), Some('-'))
        } {
            lx.expect("-")?;
            negate = true;
        } else {
            break;
        }
    }
    Ok(acc)
}

fn parse_base(lx: &mut Lexer) -> Result<KernelBase> {
    lx.skip_ws();
    if lx.eat("Pperp0") {
        let n = lx.parse_uint()? as usize;
        let m = lx.parse_uint()? as usize;
        return KernelBase::ortho0(n, m).map_err(|e| lx.err(e.to_string()));
    }
    if lx.eat("Psub") {
        let m = lx.parse_uint()? as usize;
        return Ok(KernelBase::sub(m));
    }
    if lx.eat("E0") {
        let n = lx.parse_uint()? as usize;
        let m = lx.parse_uint()? as usize;
        return KernelBase::ext0(n, m).map_err(|e| lx.err(e.to_string()));
    }
    if lx.eat("Res0") {
        let n = lx.parse_uint()? as usize;
        let m = lx.parse_uint()? as usize;
        return KernelBase::res0(n, m).map_err(|e| lx.err(e.to_string()));
    }
    if lx.eat("P") {
        let n = lx.parse_uint()? as usize;
        return Ok(KernelBase::bargmann(n));
    }
    Err(lx.err("expected a base tag: P, Pperp0, E0, Res0, or Psub"))
}

fn parse_kernel(lx: &mut Lexer) -> Result<JetKernel> {
    lx.expect("(")?;
    // the base fixes amplitude dims, but it appears after the polynomial;
    // scan ahead for the '|' to parse the base first
    let bar = lx.src[lx.pos..]
        .find('|')
        .ok_or_else(|| lx.err("expected '|' separating amplitude and base"))?;
    let poly_src = &lx.src[lx.pos..lx.pos + bar];
    let mut base_lexer = Lexer {
        src: lx.src,
        pos: lx.pos + bar + 1,
    };
    let base = parse_base(&mut base_lexer)?;

    let mut poly_lexer = Lexer {
        src: poly_src,
        pos: 0,
    };
    let dims = base.amplitude_dims();
    let amp = parse_poly(&mut poly_lexer, dims).map_err(|e| match e {
        Error::Parse { pos, msg } => Error::Parse {
            pos: lx.pos + pos,
            msg,
        },
        other => other,
    })?;
    poly_lexer.skip_ws();
    if poly_lexer.pos != poly_src.len() {
        return Err(Error::Parse {
            pos: lx.pos + poly_lexer.pos,
            msg: "trailing input in amplitude".into(),
        });
    }

    lx.pos = base_lexer.pos;
    lx.expect(")")?;
    let pk = PolyKernel::new(base, amp)?;
    Ok(JetKernel::scalar(pk))
}

/// Parse a composition chain of scalar kernels.
pub fn parse_kernel_chain(src: &str) -> Result<Vec<JetKernel>> {
    let mut lx = Lexer::new(src);
    let mut kernels = vec![parse_kernel(&mut lx)?];
    loop {
        lx.skip_ws();
        if lx.eat("∘") || lx.eat("o") {
            kernels.push(parse_kernel(&mut lx)?);
        } else {
            break;
        }
    }
    lx.skip_ws();
    if lx.pos != lx.src.len() {
        return Err(Error::Parse {
            pos: lx.pos,
            msg: "trailing input".into(),
        });
    }
    Ok(kernels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::compose;

    #[test]
    fn parses_the_reference_example() {
        let kernels = parse_kernel_chain("(1|Pperp0 2 1) o (z1*zb1|Pperp0 2 1)").unwrap();
        assert_eq!(kernels.len(), 2);
        let out = compose(&kernels[0], &kernels[1]).unwrap();
        assert_eq!(format!("{}", out), "z1*zb'1 + pi^-1 | Pperp0 2 1");
    }

    #[test]
    fn unicode_composition_sign() {
        let kernels = parse_kernel_chain("(1|P 1) ∘ (1|P 1)").unwrap();
        assert_eq!(kernels.len(), 2);
    }

    #[test]
    fn round_trips_printed_amplitudes() {
        let kernels =
            parse_kernel_chain("((1/2 + -1/3 i)*pi^-2*z1^2*zb'1 + 5/7 - z2|Pperp0 2 2)").unwrap();
        let printed = format!("{}", kernels[0].entries[0][0]);
        let reparsed = parse_kernel_chain(&format!("({printed}|Pperp0 2 2)")).unwrap();
        assert_eq!(reparsed[0].entries[0][0], kernels[0].entries[0][0]);
    }

    #[test]
    fn position_reported_on_malformed_input() {
        let err = parse_kernel_chain("(z1**2|P 1)").unwrap_err();
        match err {
            Error::Parse { pos, .. } => assert!(pos > 0 && pos < 8),
            other => panic!("unexpected error {other}"),
        }
        assert!(parse_kernel_chain("(zb'9|Pperp0 2 1)").is_err());
        assert!(parse_kernel_chain("(1|Frob 2 1)").is_err());
    }

    #[test]
    fn identity_composition_prints_input() {
        let kernels = parse_kernel_chain("(z1*zb'1|Psub 1) o (1|Psub 1)").unwrap();
        let out = compose(&kernels[0], &kernels[1]).unwrap();
        assert_eq!(format!("{}", out), "z1*zb'1 | Psub 1");
    }
}
