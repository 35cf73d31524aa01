use crate::exact::{RationalFn, UniPoly};
use num_bigint::BigInt;

/// Parses an arithmetic expression in the variable `m`: integers, `m`,
/// `+ - * /`, `^` with a nonnegative integer exponent, and parentheses.
pub fn parse_expr(src: &str) -> Result<RationalFn, String> {
    let mut p = Parser { s: src.as_bytes(), pos: 0 };
    let v = p.sum()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(format!("unexpected {:?} at offset {} in {src:?}", p.s[p.pos] as char, p.pos));
    }
    Ok(v)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<RationalFn, String> {
        let mut acc = self.product()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = if c == b'+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<RationalFn, String> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            if c == b'*' {
                acc = acc * rhs;
            } else {
                if rhs.is_zero() {
                    return Err("division by zero".into());
                }
                acc = acc / rhs;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RationalFn, String> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<RationalFn, String> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let k = self.integer()?;
            let k: usize = k.try_into().map_err(|_| "exponent too large".to_string())?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt, String> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format!("expected a number at offset {start}"));
        }
        let t = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        t.parse().map_err(|_| format!("bad number {t:?}"))
    }

    fn atom(&mut self) -> Result<RationalFn, String> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(format!("missing ')' at offset {}", self.pos));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b'm') => {
                self.pos += 1;
                Ok(RationalFn::from_poly(UniPoly::x()))
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(RationalFn::constant(num_rational::BigRational::from_integer(n)))
            }
            Some(c) => Err(format!("unexpected {:?} at offset {}", c as char, self.pos)),
            None => Err("unexpected end of expression".into()),
        }
    }
}
