//! Parsers for command-line values: numeric expressions such as `16pi`,
//! `1+1/(8pi)` or `2^-8`, lists, geometric ranges and density or field specs.

use std::path::PathBuf;

use loghls_core::Profile;

use crate::error::{HarnessError, Result};

/// Evaluates `+ − * / ^`, parentheses, `pi`, `e` and implicit products (`16pi`).
pub fn number(input: &str) -> Result<f64> {
    let mut p = Expr { s: input.as_bytes(), i: 0 };
    let v = p.sum().ok_or_else(|| HarnessError::parse("number", input))?;
    p.skip_ws();
    if p.i != p.s.len() || !v.is_finite() {
        return Err(HarnessError::parse("number", input));
    }
    Ok(v)
}

struct Expr<'a> {
    s: &'a [u8],
    i: usize,
}

impl Expr<'_> {
    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.i).copied()
    }

    fn sum(&mut self) -> Option<f64> {
        let mut v = self.product()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.i += 1;
            let rhs = self.product()?;
            v = if c == b'+' { v + rhs } else { v - rhs };
        }
        Some(v)
    }

    fn product(&mut self) -> Option<f64> {
        let mut v = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.i += 1;
                    v *= self.unary()?;
                }
                Some(b'/') => {
                    self.i += 1;
                    v /= self.unary()?;
                }
                Some(c) if c == b'(' || c.is_ascii_alphabetic() => v *= self.power()?,
                _ => return Some(v),
            }
        }
    }

    fn unary(&mut self) -> Option<f64> {
        match self.peek() {
            Some(b'-') => {
                self.i += 1;
                Some(-self.unary()?)
            }
            Some(b'+') => {
                self.i += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Option<f64> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.i += 1;
            let exp = self.unary()?;
            return Some(base.powf(exp));
        }
        Some(base)
    }

    fn atom(&mut self) -> Option<f64> {
        match self.peek()? {
            b'(' => {
                self.i += 1;
                let v = self.sum()?;
                if self.peek() != Some(b')') {
                    return None;
                }
                self.i += 1;
                Some(v)
            }
            c if c.is_ascii_alphabetic() => {
                let start = self.i;
                while self.i < self.s.len() && self.s[self.i].is_ascii_alphabetic() {
                    self.i += 1;
                }
                match &self.s[start..self.i] {
                    b"pi" => Some(std::f64::consts::PI),
                    b"e" => Some(std::f64::consts::E),
                    _ => None,
                }
            }
            _ => {
                let start = self.i;
                while self.i < self.s.len() {
                    let c = self.s[self.i];
                    let exponent_sign = (c == b'-' || c == b'+')
                        && self.i > start
                        && matches!(self.s[self.i - 1], b'e' | b'E')
                        && self.s[start..self.i - 1].iter().all(|d| d.is_ascii_digit() || *d == b'.');
                    let exponent_mark = matches!(c, b'e' | b'E')
                        && self.s.get(self.i + 1).is_some_and(|n| n.is_ascii_digit() || *n == b'-' || *n == b'+');
                    if c.is_ascii_digit() || c == b'.' || exponent_sign || exponent_mark {
                        self.i += 1;
                    } else {
                        break;
                    }
                }
                std::str::from_utf8(&self.s[start..self.i]).ok()?.parse().ok()
            }
        }
    }
}

/// Comma-separated numbers.
pub fn number_list(input: &str) -> Result<Vec<f64>> {
    input.split(',').filter(|s| !s.trim().is_empty()).map(|s| number(s.trim())).collect()
}

/// `start:end[:factor]`, a geometric sequence from `start` towards `end`
/// (factor 2 by default, in the direction of `end`), both ends included.
pub fn geometric(input: &str) -> Result<Vec<f64>> {
    let bad = || HarnessError::parse("geometric range", input);
    let parts: Vec<&str> = input.split(':').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let start = number(parts[0])?;
    let end = number(parts[1])?;
    let factor = if parts.len() == 3 { number(parts[2])? } else { 2.0 };
    if !(start > 0.0 && end > 0.0 && factor > 1.0) {
        return Err(bad());
    }
    let steps = (end / start).ln().abs() / factor.ln();
    let count = steps.round();
    if (steps - count).abs() > 1e-9 || count > 1e4 {
        return Err(bad());
    }
    let ratio = if end < start { 1.0 / factor } else { factor };
    Ok((0..=count as usize).map(|k| start * ratio.powi(k as i32)).collect())
}

/// Where a density comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    Profile(Profile),
    File(PathBuf),
}

/// `gaussian:σ`, `reference` (or `mu`), `dilated:λ`, `bump:inner:outer`,
/// `mixture:c1:σ1:c2:σ2…` or `file:path`.
pub fn density_spec(input: &str) -> Result<DensitySpec> {
    let bad = || HarnessError::parse("density", input);
    let (kind, rest) = input.split_once(':').unwrap_or((input, ""));
    let args = || -> Result<Vec<f64>> {
        if rest.is_empty() {
            Ok(Vec::new())
        } else {
            rest.split(':').map(number).collect()
        }
    };
    let profile = match kind {
        "file" if !rest.is_empty() => return Ok(DensitySpec::File(PathBuf::from(rest))),
        "reference" | "mu" if rest.is_empty() => Profile::Reference,
        "gaussian" => match args()?.as_slice() {
            [s] => Profile::Gaussian { sigma: *s },
            _ => return Err(bad()),
        },
        "dilated" => match args()?.as_slice() {
            [l] => Profile::DilatedReference { lambda: *l },
            _ => return Err(bad()),
        },
        "bump" => match args()?.as_slice() {
            [a, b] => Profile::Bump { inner: *a, outer: *b },
            _ => return Err(bad()),
        },
        "mixture" => {
            let v = args()?;
            if v.is_empty() || v.len() % 2 != 0 {
                return Err(bad());
            }
            Profile::Mixture(v.chunks(2).map(|c| (c[0], c[1])).collect())
        }
        _ => return Err(bad()),
    };
    Ok(DensitySpec::Profile(profile))
}

/// Radial test functions for the dual inequality.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Constant(f64),
    /// `a e^{−r²/w²}`.
    Gauss { amplitude: f64, width: f64 },
    /// `−t log(1 + r²)`, truncated at `r_max`.
    LogDecay(f64),
}

impl FieldSpec {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            FieldSpec::Constant(c) => c,
            FieldSpec::Gauss { amplitude, width } => amplitude * (-(r * r) / (width * width)).exp(),
            FieldSpec::LogDecay(t) => -t * (r * r).ln_1p(),
        }
    }
}

/// `zero`, `const:c`, `gauss:a:w` or `logdecay:t`.
pub fn field_spec(input: &str) -> Result<FieldSpec> {
    let bad = || HarnessError::parse("field", input);
    let (kind, rest) = input.split_once(':').unwrap_or((input, ""));
    let args: Vec<f64> = if rest.is_empty() { Vec::new() } else { rest.split(':').map(number).collect::<Result<_>>()? };
    Ok(match (kind, args.as_slice()) {
        ("zero", []) => FieldSpec::Constant(0.0),
        ("const", [c]) => FieldSpec::Constant(*c),
        ("gauss", [a, w]) if *w > 0.0 => FieldSpec::Gauss { amplitude: *a, width: *w },
        ("logdecay", [t]) => FieldSpec::LogDecay(*t),
        _ => return Err(bad()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn expressions() {
        assert_eq!(number("16pi").unwrap(), 16.0 * PI);
        assert_eq!(number("8*pi").unwrap(), 8.0 * PI);
        assert_eq!(number("2^-8").unwrap(), 1.0 / 256.0);
        assert_eq!(number("-0.5").unwrap(), -0.5);
        assert_eq!(number("1e-3").unwrap(), 1e-3);
        assert_eq!(number("2.5E+2").unwrap(), 250.0);
        assert!((number("1+1/(8pi)").unwrap() - (1.0 + 1.0 / (8.0 * PI))).abs() < 1e-15);
        assert_eq!(number("2*3^2").unwrap(), 18.0);
        for bad in ["", "pie", "1+", "(1", "1)", "abc", "1/0"] {
            assert!(number(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn ranges_and_lists() {
        assert_eq!(number_list("0,1,2").unwrap(), vec![0.0, 1.0, 2.0]);
        let g = geometric("1:2^-8").unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[8], 1.0 / 256.0);
        assert_eq!(geometric("1:8").unwrap(), vec![1.0, 2.0, 4.0, 8.0]);
        assert!(geometric("1:3").is_err());
    }

    #[test]
    fn specs() {
        assert_eq!(density_spec("gaussian:1").unwrap(), DensitySpec::Profile(Profile::Gaussian { sigma: 1.0 }));
        assert_eq!(density_spec("mu").unwrap(), DensitySpec::Profile(Profile::Reference));
        assert_eq!(
            density_spec("bump:0.5:2").unwrap(),
            DensitySpec::Profile(Profile::Bump { inner: 0.5, outer: 2.0 })
        );
        assert!(density_spec("gaussian").is_err());
        assert!(density_spec("cauchy:1").is_err());
        assert_eq!(field_spec("const:2").unwrap(), FieldSpec::Constant(2.0));
        assert!(field_spec("gauss:1:0").is_err());
    }
}
