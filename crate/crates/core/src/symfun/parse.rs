//! Text grammar for ψ-functions and spaces used in config files.
//!
//! ```text
//! psi   := pow(a) | pow(a/b) | pwl[(t,v),...] | min_id(psi) | scale(c,psi) | log_pwl(k)
//! space := linf | ln1(n) | cap_inf(space) | lorentz(psi) | psi
//! ```
//!
//! `pow(1/2)` is `t^{1/2}`; `log_pwl(k)` interpolates `log(1+t)` at `0, 1, 2, ..., 2^k`.

use super::psi::PsiFunction;
use super::space::SpaceSpec;
use crate::{Error, Result};

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { offset: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().map_or(0, char::len_utf8);
        }
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
            self.err(format!("expected `{token}`"))
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        if len == 0 {
            return self.err("expected a name");
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '-' | '+')))
            .unwrap_or(rest.len());
        match rest[..len].parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos += len;
                Ok(v)
            }
            _ => self.err(format!("expected a number, found `{}`", &rest[..len.max(1).min(rest.len())])),
        }
    }

    fn integer(&mut self) -> Result<u32> {
        let start = self.pos;
        let v = self.number()?;
        if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
            self.pos = start;
            return self.err(format!("expected a nonnegative integer, found {v}"));
        }
        Ok(v as u32)
    }

    fn psi_named(&mut self, name: &str) -> Result<PsiFunction> {
        match name {
            "pow" => {
                self.expect("(")?;
                let num = self.number()?;
                let den = if self.eat("/") { self.number()? } else { 1.0 };
                self.expect(")")?;
                let exp = num / den;
                if !(exp > 0.0 && exp <= 1.0) {
                    return self.err(format!("exponent {exp} must lie in (0, 1]"));
                }
                Ok(PsiFunction::PowerRoot(den / num))
            }
            "pwl" => {
                self.expect("[")?;
                let mut pts = Vec::new();
                loop {
                    self.expect("(")?;
                    let t = self.number()?;
                    self.expect(",")?;
                    let v = self.number()?;
                    self.expect(")")?;
                    pts.push((t, v));
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect("]")?;
                Ok(PsiFunction::PiecewiseLinear(pts))
            }
            "min_id" => {
                self.expect("(")?;
                let inner = self.psi()?;
                self.expect(")")?;
                Ok(inner.min_with_identity())
            }
            "scale" => {
                self.expect("(")?;
                let c = self.number()?;
                self.expect(",")?;
                let inner = self.psi()?;
                self.expect(")")?;
                Ok(inner.scaled(c))
            }
            "log_pwl" => {
                self.expect("(")?;
                let k = self.integer()?;
                self.expect(")")?;
                if k > 1000 {
                    return self.err("log_pwl exponent too large");
                }
                Ok(PsiFunction::log_like(k))
            }
            other => self.err(format!("unknown psi form `{other}`")),
        }
    }

    fn psi(&mut self) -> Result<PsiFunction> {
        let name = self.ident()?;
        self.psi_named(name)
    }

    fn space(&mut self) -> Result<SpaceSpec> {
        let name = self.ident()?;
        match name {
            "linf" => Ok(SpaceSpec::LInfinity),
            "ln1" => {
                self.expect("(")?;
                let n = self.integer()?;
                self.expect(")")?;
                if n == 0 {
                    return self.err("ln1 needs n >= 1");
                }
                Ok(SpaceSpec::Ln1(n))
            }
            "cap_inf" => {
                self.expect("(")?;
                let base = self.space()?;
                self.expect(")")?;
                Ok(base.cap_inf())
            }
            "lorentz" => {
                self.expect("(")?;
                let psi = self.psi()?;
                self.expect(")")?;
                Ok(SpaceSpec::Lorentz(psi))
            }
            other => Ok(SpaceSpec::Lorentz(self.psi_named(other)?)),
        }
    }

    fn finish(&mut self) -> Result<()> {
        self.skip_ws();
        if self.pos == self.src.len() {
            Ok(())
        } else {
            self.err("trailing input")
        }
    }
}

pub fn parse_psi(src: &str) -> Result<PsiFunction> {
    let mut p = Parser::new(src);
    let psi = p.psi()?;
    p.finish()?;
    psi.validate()?;
    Ok(psi)
}

pub fn parse_space(src: &str) -> Result<SpaceSpec> {
    let mut p = Parser::new(src);
    let space = p.space()?;
    p.finish()?;
    space.validate()?;
    Ok(space)
}
