//! Arithmetic expressions over coordinates `x1..xd`, used to describe
//! non-radial weights.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'pi' | 'e' | 'x'k | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Functions: `exp`, `log`, `sqrt`, `abs`, `norm`. `norm(x)` is the Euclidean
//! norm of the whole point; `norm(a, b, ...)` that of its arguments.

use crate::error::{BmError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    /// The whole point; only meaningful inside `norm`.
    Point,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Norm,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            _ if c.is_whitespace() => i += 1,
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // exponent part, e.g. 1e-3
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v = s.parse::<f64>().map_err(|_| BmError::Parse(format!("bad number '{s}'")))?;
                out.push(Tok::Num(v));
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' | ',' => {
                out.push(Tok::Op(c));
                i += 1;
            }
            '\u{2212}' => {
                out.push(Tok::Op('-'));
                i += 1;
            }
            '\u{00d7}' => {
                out.push(Tok::Op('*'));
                i += 1;
            }
            '\u{00f7}' => {
                out.push(Tok::Op('/'));
                i += 1;
            }
            _ => return Err(BmError::Parse(format!("unexpected character '{c}' in expression"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(BmError::Parse(format!("expected '{op}' at token {}", self.pos)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let func = match name.as_str() {
                        "exp" => Func::Exp,
                        "log" | "ln" => Func::Log,
                        "sqrt" => Func::Sqrt,
                        "abs" => Func::Abs,
                        "norm" => Func::Norm,
                        _ => return Err(BmError::Parse(format!("unknown function '{name}'"))),
                    };
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    if func != Func::Norm && args.len() != 1 {
                        return Err(BmError::Parse(format!("'{name}' takes one argument")));
                    }
                    return Ok(Expr::Call(func, args));
                }
                match name.as_str() {
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "e" => Ok(Expr::Num(std::f64::consts::E)),
                    "x" => Ok(Expr::Point),
                    _ => {
                        let k = name
                            .strip_prefix('x')
                            .and_then(|s| s.parse::<usize>().ok())
                            .filter(|&k| k >= 1)
                            .ok_or_else(|| BmError::Parse(format!("unknown variable '{name}'")))?;
                        Ok(Expr::Var(k - 1))
                    }
                }
            }
            other => Err(BmError::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser { toks: lex(src)?, pos: 0 };
        if p.toks.is_empty() {
            return Err(BmError::Parse("empty expression".into()));
        }
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(BmError::Parse(format!("trailing input at token {}", p.pos)));
        }
        e.check_point_usage(false)?;
        Ok(e)
    }

    fn check_point_usage(&self, in_norm: bool) -> Result<()> {
        match self {
            Expr::Point if !in_norm => Err(BmError::Parse("'x' is only allowed as norm(x)".into())),
            Expr::Neg(a) => a.check_point_usage(false),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.check_point_usage(false)?;
                b.check_point_usage(false)
            }
            Expr::Call(f, args) => args.iter().try_for_each(|a| a.check_point_usage(*f == Func::Norm)),
            _ => Ok(()),
        }
    }

    /// Largest coordinate index used, 1-based (0 when none).
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Var(k) => k + 1,
            Expr::Neg(a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.max_var().max(b.max_var())
            }
            Expr::Call(_, args) => args.iter().map(Expr::max_var).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(k) => x.get(*k).copied().unwrap_or(f64::NAN),
            Expr::Point => f64::NAN,
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Expr::Call(f, args) => match f {
                Func::Exp => args[0].eval(x).exp(),
                Func::Log => args[0].eval(x).ln(),
                Func::Sqrt => args[0].eval(x).sqrt(),
                Func::Abs => args[0].eval(x).abs(),
                Func::Norm => args
                    .iter()
                    .map(|a| match a {
                        Expr::Point => x.iter().map(|v| v * v).sum::<f64>(),
                        _ => a.eval(x).powi(2),
                    })
                    .sum::<f64>()
                    .sqrt(),
            },
        }
    }

    /// `log(self)` without forming `self` where the structure allows it, so
    /// that `exp(-big)` keeps its logarithm instead of underflowing.
    pub fn log_eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Call(Func::Exp, args) => args[0].eval(x),
            Expr::Mul(a, b) => a.log_eval(x) + b.log_eval(x),
            Expr::Div(a, b) => a.log_eval(x) - b.log_eval(x),
            Expr::Pow(a, b) => b.eval(x) * a.log_eval(x),
            Expr::Call(Func::Sqrt, args) => 0.5 * args[0].log_eval(x),
            _ => self.eval(x).ln(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_functions() {
        let e = Expr::parse("1 + 2*3^2 - -4/2").unwrap();
        assert_eq!(e.eval(&[]), 1.0 + 18.0 + 2.0);
        let e = Expr::parse("-x1^2").unwrap();
        assert_eq!(e.eval(&[3.0]), -9.0);
        let e = Expr::parse("2^3^2").unwrap();
        assert_eq!(e.eval(&[]), 512.0);
        let e = Expr::parse("exp(−sqrt(abs(x1)))").unwrap();
        assert!((e.eval(&[-4.0, 7.0]) - (-2.0f64).exp()).abs() < 1e-15);
        let e = Expr::parse("norm(x) + norm(x2, 1e-3*0)").unwrap();
        assert!((e.eval(&[3.0, 4.0]) - 9.0).abs() < 1e-15);
        assert_eq!(Expr::parse("x1 * x3").unwrap().max_var(), 3);
        assert!((Expr::parse("log(e) + pi").unwrap().eval(&[]) - 1.0 - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in ["", "1 +", "foo(1)", "x0", "y", "(1", "1 2", "x + 1", "exp(1, 2)", "1 $ 2"] {
            assert!(matches!(Expr::parse(bad), Err(BmError::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn log_eval_survives_underflow() {
        let e = Expr::parse("exp(-norm(x))").unwrap();
        assert_eq!(e.eval(&[1e6, 0.0]), 0.0);
        assert_eq!(e.log_eval(&[1e6, 0.0]), -1e6);
        let e = Expr::parse("2*exp(-x1)^2/sqrt(exp(x2))").unwrap();
        let x = [800.0, 600.0];
        assert!((e.log_eval(&x) - (2f64.ln() - 1600.0 - 300.0)).abs() < 1e-9);
        let e = Expr::parse("1/(1+x1^2)").unwrap();
        assert!((e.log_eval(&[2.0]) + 5f64.ln()).abs() < 1e-15);
    }
}
