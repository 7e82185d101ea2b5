//! Registry syntax for spaces, Young functions and gains.
//!
//! ```text
//! term  := ident [ '(' arg { ',' arg } ')' ]
//! arg   := [ ident '=' ] ( number | term )
//! ```
//!
//! Identifiers may contain `:` so that `example:b(2,2)` is a single term.

use crate::error::{Error, Result};
use crate::gain::{GainFunction, SlowlyVarying};
use crate::norms::RiSpace;
use crate::young::YoungFunction;

/// A parsed term. Numbers are leaves with `name == ""`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub name: String,
    pub key: Option<String>,
    pub number: Option<f64>,
    pub args: Vec<Term>,
    pub column: usize,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { column: self.pos + 1, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_alphanumeric() || c == b'_' || c == b':' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start || self.src[start].is_ascii_digit() {
            self.pos = start;
            return None;
        }
        Some(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let exp_sign = (c == b'-' || c == b'+') && self.pos > start && matches!(self.src[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign || ((c == b'-' || c == b'+') && self.pos == start) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().or_else(|_| {
            self.pos = start;
            self.err(format!("expected a number, found `{}`", self.rest()))
        })
    }

    fn rest(&self) -> String {
        String::from_utf8_lossy(&self.src[self.pos..]).chars().take(16).collect()
    }

    fn term(&mut self) -> Result<Term> {
        self.skip_ws();
        let column = self.pos + 1;
        let Some(name) = self.ident() else {
            if matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'-' || c == b'+' || c == b'.') {
                let v = self.number()?;
                return Ok(Term { name: String::new(), key: None, number: Some(v), args: vec![], column });
            }
            return self.err(format!("expected a name or number, found `{}`", self.rest()));
        };
        if name == "inf" {
            return Ok(Term { name: String::new(), key: None, number: Some(f64::INFINITY), args: vec![], column });
        }
        let mut args = Vec::new();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            if self.peek() == Some(b')') {
                self.pos += 1;
            } else {
                loop {
                    args.push(self.arg()?);
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return self.err("expected `,` or `)`"),
                    }
                }
            }
        }
        Ok(Term { name, key: None, number: None, args, column })
    }

    fn arg(&mut self) -> Result<Term> {
        let save = self.pos;
        if let Some(key) = self.ident() {
            if self.peek() == Some(b'=') {
                self.pos += 1;
                let mut t = self.term()?;
                t.key = Some(key);
                return Ok(t);
            }
        }
        self.pos = save;
        self.term()
    }
}

/// Parses a single term, rejecting trailing input.
pub fn parse_term(text: &str) -> Result<Term> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let t = p.term()?;
    if p.peek().is_some() {
        return p.err(format!("unexpected trailing input `{}`", p.rest()));
    }
    Ok(t)
}

impl Term {
    fn arity(&self, n: usize) -> Result<()> {
        if self.args.len() != n {
            return Err(Error::Syntax {
                column: self.column,
                message: format!("`{}` takes {n} argument(s), got {}", self.name, self.args.len()),
            });
        }
        Ok(())
    }

    fn num(&self, i: usize) -> Result<f64> {
        let a = &self.args[i];
        a.number.ok_or_else(|| Error::Syntax { column: a.column, message: format!("argument {} of `{}` must be a number", i + 1, self.name) })
    }

    fn count(&self, i: usize) -> Result<usize> {
        let v = self.num(i)?;
        if v < 0.0 || v.fract() != 0.0 || v > 1e6 {
            return Err(Error::InvalidParameter(format!("argument {} of `{}` must be a nonnegative integer, got {v}", i + 1, self.name)));
        }
        Ok(v as usize)
    }
}

pub fn space_from_term(t: &Term) -> Result<RiSpace> {
    match t.name.as_str() {
        "Lp" | "L" => {
            t.arity(1)?;
            RiSpace::lp(t.num(0)?)
        }
        "Lorentz" => {
            t.arity(2)?;
            RiSpace::lorentz(t.num(0)?, t.num(1)?)
        }
        "LZ" => {
            t.arity(3)?;
            RiSpace::lorentz_zygmund(t.num(0)?, t.num(1)?, t.num(2)?)
        }
        "Orlicz" => {
            t.arity(1)?;
            RiSpace::orlicz(young_from_term(&t.args[0])?)
        }
        "M" => {
            t.arity(1)?;
            Ok(RiSpace::marcinkiewicz(space_from_term(&t.args[0])?))
        }
        "Lambda" => {
            t.arity(1)?;
            Ok(RiSpace::lambda(space_from_term(&t.args[0])?))
        }
        "" => Err(Error::Syntax { column: t.column, message: "expected a space, found a number".into() }),
        other => Err(Error::UnknownIdentifier(other.to_string())),
    }
}

pub fn young_from_term(t: &Term) -> Result<YoungFunction> {
    match t.name.as_str() {
        "power" => {
            t.arity(1)?;
            YoungFunction::power(t.num(0)?)
        }
        "exp_minus_one" => {
            t.arity(0)?;
            Ok(YoungFunction::ExpMinusOne)
        }
        "t_log_alpha" => {
            t.arity(1)?;
            YoungFunction::t_log_alpha(t.num(0)?)
        }
        "power_log" => {
            t.arity(2)?;
            YoungFunction::power_log(t.num(0)?, t.num(1)?)
        }
        "" => Err(Error::Syntax { column: t.column, message: "expected a Young function, found a number".into() }),
        other => Err(Error::UnknownIdentifier(other.to_string())),
    }
}

pub fn gain_from_term(t: &Term) -> Result<GainFunction> {
    match t.name.as_str() {
        "log_alpha" => {
            t.arity(1)?;
            GainFunction::log_alpha(t.num(0)?)
        }
        "pow" => {
            t.arity(1)?;
            GainFunction::pow(t.num(0)?)
        }
        "psi_of" => {
            t.arity(2)?;
            GainFunction::psi_of(space_from_term(&t.args[0])?, space_from_term(&t.args[1])?)
        }
        "example:c" => {
            t.arity(2)?;
            GainFunction::example(SlowlyVarying::C { k: t.count(0)?, m: t.count(1)? })
        }
        "example:d" => {
            let alphas = (0..t.args.len()).map(|i| t.num(i)).collect::<Result<Vec<_>>>()?;
            GainFunction::example(SlowlyVarying::D(alphas))
        }
        "example:b" => {
            t.arity(2)?;
            GainFunction::example(SlowlyVarying::B { m: t.count(0)?, alpha: t.num(1)? })
        }
        "example:L" => {
            t.arity(1)?;
            GainFunction::example(SlowlyVarying::IteratedLog(t.count(0)?))
        }
        "" => Err(Error::Syntax { column: t.column, message: "expected a gain, found a number".into() }),
        other => Err(Error::UnknownIdentifier(other.to_string())),
    }
}

pub fn parse_space(text: &str) -> Result<RiSpace> {
    space_from_term(&parse_term(text)?)
}

pub fn parse_young(text: &str) -> Result<YoungFunction> {
    young_from_term(&parse_term(text)?)
}

pub fn parse_gain(text: &str) -> Result<GainFunction> {
    gain_from_term(&parse_term(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spaces_round_trip_through_display() {
        for s in [
            "Lp(2)",
            "Lp(inf)",
            "Lorentz(2,1)",
            "LZ(2,2,1.5)",
            "Orlicz(power(2))",
            "Orlicz(exp_minus_one)",
            "Orlicz(t_log_alpha(2))",
            "Orlicz(power_log(2,0.5))",
            "M(of=Lp(1))",
            "Lambda(of=Lorentz(3,2))",
        ] {
            let x = parse_space(s).unwrap();
            assert_eq!(x.to_string(), s);
            assert_eq!(parse_space(&x.to_string()).unwrap(), x);
        }
        assert_eq!(parse_space(" M( Lp( 2 ) ) ").unwrap(), RiSpace::marcinkiewicz(RiSpace::Lp(2.0)));
    }

    #[test]
    fn gains_resolve() {
        assert_eq!(parse_gain("log_alpha(2)").unwrap().name(), "log_alpha(2)");
        assert_eq!(parse_gain("psi_of(Lp(4),Lp(2))").unwrap().name(), "psi_of(Lp(4),Lp(2))");
        assert_eq!(parse_gain("example:b(2,2)").unwrap().name(), "example:b(2,2)/normalized");
        assert_eq!(parse_gain("example:d(0.5,0.25)").unwrap().name(), "example:d(0.5,0.25)/normalized");
        assert!(parse_gain("pow(1e-1)").is_ok());
    }

    #[test]
    fn errors_name_the_problem() {
        assert_eq!(parse_space("Lq(2)"), Err(Error::UnknownIdentifier("Lq".into())));
        assert_eq!(parse_space("Orlicz(square)"), Err(Error::UnknownIdentifier("square".into())));
        match parse_space("Lp(2") {
            Err(Error::Syntax { column, .. }) => assert_eq!(column, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_space("Lp(2) x"), Err(Error::Syntax { column: 7, .. })));
        assert!(matches!(parse_space("Lp(0.5)"), Err(Error::InvalidParameter(_))));
        assert!(matches!(parse_gain("example:c(2,1)"), Err(Error::InvalidParameter(_))));
        assert!(matches!(parse_space("Lorentz(2)"), Err(Error::Syntax { .. })));
    }
}
