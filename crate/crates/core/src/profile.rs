//! Coefficient functions of x drawn from a small auditable registry.
//!
//! Weights such as `2π e^{2t}` overflow long before the grids end, so every
//! profile also reports `ln|f(x)|` computed without forming `f(x)`.

use std::fmt;
use std::sync::Arc;

use crate::grid::{lerp, GridFunction};

/// Names accepted by [`parse_profile`].
pub const VALID_TAGS: &[&str] = &[
    "<number>", "pi", "x^k", "abs_x^k", "exp(c)", "sinh^k", "cosh^k", "log", "cos(w,phase)",
    "sin(w,phase)", "piecewise(b1: expr; b2: expr; ...; expr)",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Const(f64),
    /// x^k, sign-preserving for integer k.
    Pow(f64),
    /// |x|^k.
    AbsPow(f64),
    /// e^{c x}.
    Exp(f64),
    /// sinh(x)^k for x > 0.
    SinhPow(f64),
    /// cosh(x)^k.
    CoshPow(f64),
    /// ln x.
    Log,
    Cos { freq: f64, phase: f64 },
    Sin { freq: f64, phase: f64 },
    Product(Vec<Profile>),
    Sum(Vec<Profile>),
    /// `(upper, piece)` pairs tried in order; `rest` applies beyond the last bound.
    Piecewise { pieces: Vec<(f64, Profile)>, rest: Box<Profile> },
    Sampled(Arc<Sampled>),
}

/// Tabulated function: log-linear interpolation of values, linear of slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    nodes: Vec<f64>,
    sign: Vec<i8>,
    ln_abs: Vec<f64>,
    slope: Vec<f64>,
}

impl Sampled {
    pub fn new(values: &GridFunction, slope: &GridFunction) -> Self {
        Self {
            nodes: values.grid().nodes().to_vec(),
            sign: values.values().iter().map(|v| v.signum() as i8).collect(),
            ln_abs: values.values().iter().map(|v| v.abs().ln()).collect(),
            slope: slope.values().to_vec(),
        }
    }

    /// Positive function given by its logarithm and its derivative.
    pub fn from_log(nodes: Vec<f64>, ln_abs: Vec<f64>, slope: Vec<f64>) -> Self {
        let sign = vec![1; nodes.len()];
        Self { nodes, sign, ln_abs, slope }
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let k = self.nodes.partition_point(|&t| t <= x).clamp(1, self.nodes.len() - 1) - 1;
        let t = ((x - self.nodes[k]) / (self.nodes[k + 1] - self.nodes[k])).clamp(0.0, 1.0);
        (k, t)
    }

    fn ln_abs(&self, x: f64) -> f64 {
        let (k, t) = self.locate(x);
        if self.sign[k] != self.sign[k + 1] {
            return self.eval(x).abs().ln();
        }
        lerp(&self.ln_abs, k, t)
    }

    fn eval(&self, x: f64) -> f64 {
        let (k, t) = self.locate(x);
        if self.sign[k] == self.sign[k + 1] {
            self.sign[k] as f64 * lerp(&self.ln_abs, k, t).exp()
        } else {
            let a = self.sign[k] as f64 * self.ln_abs[k].exp();
            let b = self.sign[k + 1] as f64 * self.ln_abs[k + 1].exp();
            a + t * (b - a)
        }
    }

    fn deriv(&self, x: f64) -> f64 {
        let (k, t) = self.locate(x);
        lerp(&self.slope, k, t)
    }
}

fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a - std::f64::consts::LN_2 + (-2.0 * a).exp().ln_1p()
}

impl Profile {
    pub fn one() -> Self {
        Profile::Const(1.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Const(c) => *c,
            Profile::Pow(k) => x.powf(*k),
            Profile::AbsPow(k) => x.abs().powf(*k),
            Profile::Exp(c) => (c * x).exp(),
            Profile::SinhPow(k) => x.sinh().powf(*k),
            Profile::CoshPow(k) => x.cosh().powf(*k),
            Profile::Log => x.ln(),
            Profile::Cos { freq, phase } => (freq * x + phase).cos(),
            Profile::Sin { freq, phase } => (freq * x + phase).sin(),
            Profile::Product(fs) => fs.iter().map(|f| f.eval(x)).product(),
            Profile::Sum(fs) => fs.iter().map(|f| f.eval(x)).sum(),
            Profile::Piecewise { .. } => self.piece(x).eval(x),
            Profile::Sampled(s) => s.eval(x),
        }
    }

    /// ln|f(x)|, stable where f itself over- or underflows.
    pub fn ln_abs(&self, x: f64) -> f64 {
        match self {
            Profile::Const(c) => c.abs().ln(),
            Profile::Pow(k) | Profile::AbsPow(k) => k * x.abs().ln(),
            Profile::Exp(c) => c * x,
            Profile::SinhPow(k) => k * ln_sinh(x),
            Profile::CoshPow(k) => k * ln_cosh(x),
            Profile::Product(fs) => fs.iter().map(|f| f.ln_abs(x)).sum(),
            Profile::Piecewise { .. } => self.piece(x).ln_abs(x),
            Profile::Sampled(s) => s.ln_abs(x),
            _ => self.eval(x).abs().ln(),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            Profile::Const(_) => 0.0,
            Profile::Pow(k) => {
                if *k == 0.0 {
                    0.0
                } else {
                    k * x.powf(k - 1.0)
                }
            }
            Profile::AbsPow(k) => {
                if *k == 0.0 {
                    0.0
                } else {
                    k * x.abs().powf(k - 1.0) * x.signum()
                }
            }
            Profile::Exp(c) => c * (c * x).exp(),
            Profile::SinhPow(k) => k * x.sinh().powf(k - 1.0) * x.cosh(),
            Profile::CoshPow(k) => k * x.cosh().powf(k - 1.0) * x.sinh(),
            Profile::Log => 1.0 / x,
            Profile::Cos { freq, phase } => -freq * (freq * x + phase).sin(),
            Profile::Sin { freq, phase } => freq * (freq * x + phase).cos(),
            Profile::Product(fs) => {
                let vals: Vec<f64> = fs.iter().map(|f| f.eval(x)).collect();
                (0..fs.len())
                    .map(|i| {
                        fs[i].deriv(x)
                            * vals.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).product::<f64>()
                    })
                    .sum()
            }
            Profile::Sum(fs) => fs.iter().map(|f| f.deriv(x)).sum(),
            Profile::Piecewise { .. } => self.piece(x).deriv(x),
            Profile::Sampled(s) => s.deriv(x),
        }
    }

    /// Logarithmic derivative f'/f.
    pub fn log_deriv(&self, x: f64) -> f64 {
        match self {
            Profile::Const(_) => 0.0,
            Profile::Pow(k) | Profile::AbsPow(k) => k / x,
            Profile::Exp(c) => *c,
            Profile::SinhPow(k) => k / x.tanh(),
            Profile::CoshPow(k) => k * x.tanh(),
            Profile::Product(fs) => fs.iter().map(|f| f.log_deriv(x)).sum(),
            _ => self.deriv(x) / self.eval(x),
        }
    }

    fn piece(&self, x: f64) -> &Profile {
        match self {
            Profile::Piecewise { pieces, rest } => {
                pieces.iter().find(|(b, _)| x < *b).map(|(_, p)| p).unwrap_or(rest)
            }
            p => p,
        }
    }

    pub fn product(factors: Vec<Profile>) -> Profile {
        Profile::Product(factors)
    }

    pub fn is_const_zero(&self) -> bool {
        matches!(self, Profile::Const(c) if *c == 0.0)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Const(c) => write!(f, "{c}"),
            Profile::Pow(k) => write!(f, "x^{k}"),
            Profile::AbsPow(k) => write!(f, "abs_x^{k}"),
            Profile::Exp(c) => write!(f, "exp({c})"),
            Profile::SinhPow(k) => write!(f, "sinh^{k}"),
            Profile::CoshPow(k) => write!(f, "cosh^{k}"),
            Profile::Log => write!(f, "log"),
            Profile::Cos { freq, phase } => write!(f, "cos({freq},{phase})"),
            Profile::Sin { freq, phase } => write!(f, "sin({freq},{phase})"),
            Profile::Product(fs) => join(f, fs, "*"),
            Profile::Sum(fs) => join(f, fs, " + "),
            Profile::Piecewise { pieces, rest } => {
                write!(f, "piecewise(")?;
                for (b, p) in pieces {
                    write!(f, "{b}: {p}; ")?;
                }
                write!(f, "{rest})")
            }
            Profile::Sampled(_) => write!(f, "<sampled>"),
        }
    }
}

fn join(f: &mut fmt::Formatter<'_>, fs: &[Profile], sep: &str) -> fmt::Result {
    for (i, p) in fs.iter().enumerate() {
        if i > 0 {
            write!(f, "{sep}")?;
        }
        match p {
            Profile::Sum(_) => write!(f, "({p})")?,
            _ => write!(f, "{p}")?,
        }
    }
    Ok(())
}

/// Error from [`parse_profile`]: byte column (1-based) and message.
#[derive(Debug, Clone, PartialEq)]
pub struct TagError {
    pub column: usize,
    pub message: String,
    pub unknown: Option<String>,
}

/// Parse an expression tag such as `2*pi*exp(2)`, `abs_x^3` or `sinh^2`.
pub fn parse_profile(src: &str) -> Result<Profile, TagError> {
    let mut p = Parser { s: src.as_bytes(), pos: 0 };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.s.len() {
        return Err(p.err(format!("unexpected '{}'", p.s[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, message: String) -> TagError {
        TagError { column: self.pos + 1, message, unknown: None }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), TagError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn sum(&mut self) -> Result<Profile, TagError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    terms.push(Profile::Product(vec![Profile::Const(-1.0), t]));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Profile::Sum(terms) })
    }

    fn term(&mut self) -> Result<Profile, TagError> {
        let mut factors = vec![self.factor()?];
        while self.peek() == Some(b'*') {
            self.pos += 1;
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { Profile::Product(factors) })
    }

    fn number(&mut self) -> Result<f64, TagError> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.s.get(self.pos), Some(b'-' | b'+')) {
            self.pos += 1;
        }
        while self.pos < self.s.len() {
            let c = self.s[self.pos];
            let exp_sign = matches!(c, b'-' | b'+')
                && self.pos > start
                && matches!(self.s[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
        if text == "pi" {
            return Ok(std::f64::consts::PI);
        }
        text.parse::<f64>().map_err(|_| {
            self.pos = start;
            self.err(format!("expected a number, found '{text}'"))
        })
    }

    fn signed_number(&mut self) -> Result<f64, TagError> {
        self.skip_ws();
        if self.s[self.pos..].starts_with(b"pi") {
            self.pos += 2;
            return Ok(std::f64::consts::PI);
        }
        if self.s[self.pos..].starts_with(b"-pi") {
            self.pos += 3;
            return Ok(-std::f64::consts::PI);
        }
        self.number()
    }

    fn power(&mut self) -> Result<f64, TagError> {
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.signed_number()
        } else {
            Ok(1.0)
        }
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }

    fn factor(&mut self) -> Result<Profile, TagError> {
        match self.peek() {
            None => Err(self.err("unexpected end of expression".into())),
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' || c == b'-' => Ok(Profile::Const(self.number()?)),
            Some(_) => {
                let start = self.pos;
                let name = self.ident();
                match name.as_str() {
                    "pi" => Ok(Profile::Const(std::f64::consts::PI)),
                    "x" => Ok(Profile::Pow(self.power()?)),
                    "abs_x" => Ok(Profile::AbsPow(self.power()?)),
                    "sinh" => Ok(Profile::SinhPow(self.power()?)),
                    "cosh" => Ok(Profile::CoshPow(self.power()?)),
                    "log" => Ok(Profile::Log),
                    "exp" => {
                        self.expect(b'(')?;
                        let c = self.signed_number()?;
                        self.expect(b')')?;
                        Ok(Profile::Exp(c))
                    }
                    "cos" | "sin" => {
                        self.expect(b'(')?;
                        let freq = self.signed_number()?;
                        let phase = if self.peek() == Some(b',') {
                            self.pos += 1;
                            self.signed_number()?
                        } else {
                            0.0
                        };
                        self.expect(b')')?;
                        Ok(if name == "cos" { Profile::Cos { freq, phase } } else { Profile::Sin { freq, phase } })
                    }
                    "piecewise" => self.piecewise(),
                    _ => Err(TagError {
                        column: start + 1,
                        message: format!("unknown tag '{name}'; valid tags: {}", VALID_TAGS.join(", ")),
                        unknown: Some(name),
                    }),
                }
            }
        }
    }

    fn piecewise(&mut self) -> Result<Profile, TagError> {
        self.expect(b'(')?;
        let mut pieces = Vec::new();
        loop {
            let save = self.pos;
            // A bound is a number followed by ':'; otherwise this is the final piece.
            if let Ok(b) = self.signed_number() {
                if self.peek() == Some(b':') {
                    self.pos += 1;
                    let e = self.sum()?;
                    self.expect(b';')?;
                    pieces.push((b, e));
                    continue;
                }
            }
            self.pos = save;
            let rest = self.sum()?;
            self.expect(b')')?;
            return Ok(Profile::Piecewise { pieces, rest: Box::new(rest) });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_registry_tags() {
        assert_eq!(parse_profile("abs_x^3").unwrap(), Profile::AbsPow(3.0));
        let p = parse_profile("2*pi*exp(2)").unwrap();
        assert_relative_eq!(p.eval(0.5), 2.0 * std::f64::consts::PI * 1f64.exp(), max_relative = 1e-14);
        assert_relative_eq!(p.ln_abs(1e5), (2.0 * std::f64::consts::PI).ln() + 2e5, max_relative = 1e-14);
        let p = parse_profile("sinh^2").unwrap();
        assert_relative_eq!(p.ln_abs(400.0), 2.0 * (400.0 - 2f64.ln()), max_relative = 1e-14);
        let p = parse_profile("-0.25").unwrap();
        assert_eq!(p.eval(3.0), -0.25);
        let p = parse_profile("x^2 - 1").unwrap();
        assert_relative_eq!(p.eval(3.0), 8.0);
        let p = parse_profile("piecewise(1: 0; 2: x; 1)").unwrap();
        assert_eq!((p.eval(0.5), p.eval(1.5), p.eval(5.0)), (0.0, 1.5, 1.0));
        let p = parse_profile("cos(2, 0.5)").unwrap();
        assert_relative_eq!(p.eval(1.0), 2.5f64.cos());
        assert_relative_eq!(p.deriv(1.0), -2.0 * 2.5f64.sin());
    }

    #[test]
    fn unknown_tag_lists_valid_tags() {
        let e = parse_profile("foo").unwrap_err();
        assert_eq!(e.unknown.as_deref(), Some("foo"));
        assert!(e.message.contains("abs_x^k"));
        let e = parse_profile("x^2 )").unwrap_err();
        assert_eq!(e.column, 5);
    }

    #[test]
    fn derivatives_match_differences() {
        for tag in ["x^3", "abs_x^-2", "exp(-1.5)", "sinh^2", "cosh^3", "log", "sin(3,1)", "2*x^2*exp(0.5) + cosh^1"] {
            let p = parse_profile(tag).unwrap();
            for x in [0.7, 1.3, 2.9] {
                let h = 1e-6;
                let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
                assert!((p.deriv(x) - fd).abs() < 1e-6 * (1.0 + fd.abs()), "{tag} at {x}");
                if p.eval(x) != 0.0 {
                    assert_relative_eq!(p.log_deriv(x), p.deriv(x) / p.eval(x), max_relative = 1e-9);
                    assert_relative_eq!(p.ln_abs(x), p.eval(x).abs().ln(), max_relative = 1e-12, epsilon = 1e-14);
                }
            }
        }
    }
}
