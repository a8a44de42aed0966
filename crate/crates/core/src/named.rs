//! Built-in symbols and a small polynomial expression parser.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbol::{MatrixPoly, MatrixSymbol, Monomial, Variable};

/// `eta^{ab} k_a k_b` as a scalar polynomial.
pub fn minkowski_square() -> MatrixPoly {
    let mut q = MatrixPoly::zero(1);
    for (mu, sign) in [1.0, -1.0, -1.0, -1.0].into_iter().enumerate() {
        let mut k = [0; 4];
        k[mu] = 2;
        q = q
            .add(&MatrixPoly::scalar_monomial(
                Monomial::new([0; 4], k),
                Complex64::new(sign, 0.0),
            ))
            .expect("scalar");
    }
    q
}

/// `k^2 * 1_4`, the wave operator acting on the four potential components.
pub fn flat_maxwell() -> MatrixSymbol {
    let p = MatrixPoly::scalar_times_identity(&minkowski_square(), 4).expect("scalar");
    MatrixSymbol::new(2, p, MatrixPoly::zero(4)).expect("homogeneous")
}

/// Scalar `k^2`.
pub fn scalar_wave() -> MatrixSymbol {
    MatrixSymbol::new(2, minkowski_square(), MatrixPoly::zero(1)).expect("homogeneous")
}

/// `f(x) k^2` for a scalar polynomial `f` in `x` only.
pub fn scaled_wave(f: &MatrixPoly) -> Result<MatrixSymbol> {
    f.require_scalar()?;
    if f.terms().any(|(m, _)| m.k_degree() != 0) {
        return Err(Error::InvalidSymbol("scaled-wave factor must depend on x only".into()));
    }
    MatrixSymbol::new(2, f.mul(&minkowski_square())?, MatrixPoly::zero(1))
}

/// Looks up `flat-maxwell`, `scalar-wave` or `scaled-wave` (the latter needs
/// the factor expression).
pub fn by_name(name: &str, factor: Option<&str>) -> Result<MatrixSymbol> {
    match name {
        "flat-maxwell" => Ok(flat_maxwell()),
        "scalar-wave" => Ok(scalar_wave()),
        "scaled-wave" => {
            let expr =
                factor.ok_or_else(|| Error::InvalidSymbol("scaled-wave requires a factor polynomial f(x)".into()))?;
            scaled_wave(&parse_polynomial(expr)?)
        }
        other => Err(Error::InvalidSymbol(format!("unknown symbol '{other}'"))),
    }
}

/// Human-readable form of a scalar symbol, with `k^2` spelled as such.
pub fn describe_scalar(q: &MatrixPoly) -> String {
    let k2 = minkowski_square();
    if *q == k2 {
        return "k^2".into();
    }
    for c in [2.0, -1.0, 0.5] {
        if *q == k2.scale(Complex64::new(c, 0.0)) {
            return format!("{c}*k^2");
        }
    }
    q.to_string()
}

/// Parses a real scalar polynomial in `x0..x3` (alias `t` for `x0`) and
/// `k0..k3` with `+ - * ^` and parentheses, e.g. `1 + x3^2` or
/// `2*x1*(k0^2 - k3^2)`.
pub fn parse_polynomial(src: &str) -> Result<MatrixPoly> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let out = p.sum()?;
    if p.pos != p.tokens.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Var(Variable),
    Plus,
    Minus,
    Star,
    Caret,
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let bad = |i: usize, m: &str| Error::InvalidSymbol(format!("polynomial '{src}', column {}: {m}", i + 1));
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1
            }
            '-' => {
                out.push(Token::Minus);
                i += 1
            }
            '*' => {
                out.push(Token::Star);
                i += 1
            }
            '^' => {
                out.push(Token::Caret);
                i += 1
            }
            '(' => {
                out.push(Token::Open);
                i += 1
            }
            ')' => {
                out.push(Token::Close);
                i += 1
            }
            'x' | 'k' => {
                let idx = chars
                    .get(i + 1)
                    .and_then(|d| d.to_digit(10))
                    .filter(|d| *d < 4)
                    .ok_or_else(|| bad(i, "expected index 0..3"))? as usize;
                out.push(Token::Var(if c == 'x' { Variable::X(idx) } else { Variable::K(idx) }));
                i += 2;
            }
            't' => {
                out.push(Token::Var(Variable::X(0)));
                i += 1
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || chars[i] == 'e'
                        || chars[i] == 'E'
                        || ((chars[i] == '-' || chars[i] == '+') && matches!(chars[i - 1], 'e' | 'E')))
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let v = text.parse::<f64>().map_err(|_| bad(start, "bad number"))?;
                out.push(Token::Num(v));
            }
            _ => return Err(bad(i, &format!("unexpected character '{c}'"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn error(&self, msg: &str) -> Error {
        Error::InvalidSymbol(format!("polynomial token {}: {msg}", self.pos + 1))
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn sum(&mut self) -> Result<MatrixPoly> {
        let mut acc = match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                self.product()?.scale(Complex64::new(-1.0, 0.0))
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.product()?
            }
            _ => self.product()?,
        };
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.product()?)?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.product()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<MatrixPoly> {
        let mut acc = self.power()?;
        while let Some(Token::Star) = self.peek() {
            self.pos += 1;
            acc = acc.mul(&self.power()?)?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<MatrixPoly> {
        let base = self.atom()?;
        if let Some(Token::Caret) = self.peek() {
            self.pos += 1;
            let e = match self.tokens.get(self.pos) {
                Some(Token::Num(v)) if v.fract() == 0.0 && *v >= 0.0 && *v <= 64.0 => *v as u32,
                _ => return Err(self.error("exponent must be a small non-negative integer")),
            };
            self.pos += 1;
            let mut out = MatrixPoly::scalar_constant(1.0);
            for _ in 0..e {
                out = out.mul(&base)?;
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MatrixPoly> {
        let tok = self.peek().cloned().ok_or_else(|| self.error("unexpected end"))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(MatrixPoly::scalar_constant(v)),
            Token::Var(v) => Ok(MatrixPoly::variable(v)),
            Token::Open => {
                let inner = self.sum()?;
                match self.peek() {
                    Some(Token::Close) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(self.error("missing ')'")),
                }
            }
            Token::Minus => Ok(self.atom()?.scale(Complex64::new(-1.0, 0.0))),
            _ => Err(self.error("expected number, variable or '('")),
        }
    }
}
