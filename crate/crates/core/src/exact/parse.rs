use num_bigint::BigInt;
use num_traits::One;

use super::coeff::Rational;
use super::poly::Poly;

type P = Poly<Rational>;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

pub(crate) fn parse_poly(src: &str) -> Result<P, String> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(format!("unexpected input at byte {}: {:?}", p.pos, &src[p.pos..]));
    }
    Ok(out)
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<P, String> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                b'-' => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<P, String> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                b'/' => {
                    self.pos += 1;
                    let d = self.unary()?;
                    if d.degree() != Some(0) {
                        return Err("division only by nonzero constants".into());
                    }
                    let c = d.coeff(&[0; 4]);
                    acc = acc.scale(&(Rational::one() / c));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<P, String> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        if self.peek() == Some(b'+') {
            self.pos += 1;
            return self.unary();
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let k = self.uint()?;
            let k: u32 = k.try_into().map_err(|_| "exponent too large".to_string())?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<BigInt, String> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format!("expected a number at byte {start}"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn atom(&mut self) -> Result<P, String> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(format!("expected ')' at byte {}", self.pos));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.uint()?;
                Ok(P::constant(Rational::from_integer(n)))
            }
            Some(b'x') => {
                self.pos += 1;
                match self.src.get(self.pos) {
                    Some(d @ b'1'..=b'4') => {
                        self.pos += 1;
                        Ok(P::var((d - b'1') as usize))
                    }
                    _ => Ok(P::var(0)),
                }
            }
            Some(b'y') => {
                self.pos += 1;
                Ok(P::var(1))
            }
            Some(b'z') => {
                self.pos += 1;
                Ok(P::var(2))
            }
            Some(b'w') => {
                self.pos += 1;
                Ok(P::var(3))
            }
            other => Err(format!("unexpected {:?} at byte {}", other.map(char::from), self.pos)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::coeff::ratio;

    #[test]
    fn parses_basic_expressions() {
        let p = parse_poly("3*x1^2*x2 - x4^3/2 + 1/3").unwrap();
        assert_eq!(p.coeff(&[2, 1, 0, 0]), ratio(3, 1));
        assert_eq!(p.coeff(&[0, 0, 0, 3]), ratio(-1, 2));
        assert_eq!(p.coeff(&[0, 0, 0, 0]), ratio(1, 3));
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn letter_variables_and_parentheses() {
        let a = parse_poly("(x + y)^2 - 2*x*y").unwrap();
        let b = parse_poly("x1^2 + x2^2").unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_poly("z*w").unwrap(), parse_poly("x3*x4").unwrap());
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_poly("x1 +* 2").is_err());
        assert!(parse_poly("x1 / x2").is_err());
        assert!(parse_poly("(x1").is_err());
    }
}
