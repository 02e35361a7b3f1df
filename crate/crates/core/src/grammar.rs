//! Text form of distribution and mixture specifications.
//!
//! ```text
//! spec     := dist | mixture
//! dist     := name "(" number ("," number)* ")"
//! mixture  := ("tsp" | "directed") "(" field ("," field)* ")"
//! field    := ("n" "=" number) | ("w" "=" dist) | ("x1" "=" dist) | ("x2" "=" dist)
//! ```
//!
//! Distribution names and their arguments:
//! `uniform(lo,hi)`, `arcsin(lo,hi)`, `semicircle(lo,hi)`, `beta(a,b)`,
//! `beta(a,b,lo,hi)`, `power(n)`, `triangular(lo,mode,hi)`,
//! `cauchy(location,scale)`, `normal(mean,sd)`, `point_mass(at)`.
//!
//! Printing produces the canonical form, which parses back to the same value.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::basedist::DistributionSpec;
use crate::error::{Error as SpecError, Result};
use crate::mixture::{Family, MixtureSpec, Weight};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {position}: expected {expected}, found {found}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub position: usize,
    pub expected: String,
    pub found: String,
}

/// Either kind of specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spec {
    Distribution(DistributionSpec),
    Mixture(MixtureSpec),
}

const DISTRIBUTIONS: &[&str] = &[
    "uniform",
    "arcsin",
    "semicircle",
    "beta",
    "power",
    "triangular",
    "cauchy",
    "normal",
    "point_mass",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    LParen,
    RParen,
    Comma,
    Eq,
    End,
}

impl Tok {
    fn show(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(x) => format!("number {x}"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    peeked: Option<(usize, Tok)>,
}

fn perr(position: usize, expected: &str, found: &Tok) -> ParseError {
    ParseError {
        position,
        expected: expected.into(),
        found: found.show(),
    }
}

fn err<T>(position: usize, expected: &str, found: &Tok) -> std::result::Result<T, ParseError> {
    Err(perr(position, expected, found))
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            pos: 0,
            peeked: None,
        }
    }

    fn lex(&mut self) -> std::result::Result<(usize, Tok), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        let single = match c {
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            b'=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(t) = single {
            self.pos += 1;
            return Ok((start, t));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            return Ok((start, Tok::Ident(self.src[start..self.pos].to_string())));
        }
        if c.is_ascii_digit() || c == b'-' || c == b'+' || c == b'.' {
            let mut end = self.pos + 1;
            while end < bytes.len() {
                let b = bytes[end];
                let exp_sign = (b == b'-' || b == b'+') && matches!(bytes[end - 1], b'e' | b'E');
                if b.is_ascii_digit() || b == b'.' || b == b'e' || b == b'E' || exp_sign {
                    end += 1;
                } else {
                    break;
                }
            }
            let text = &self.src[start..end];
            return match text.parse::<f64>() {
                Ok(x) if x.is_finite() => {
                    self.pos = end;
                    Ok((start, Tok::Num(x)))
                }
                _ => Err(ParseError {
                    position: start,
                    expected: "a finite number".into(),
                    found: format!("`{text}`"),
                }),
            };
        }
        let ch = self.src[start..].chars().next().unwrap();
        Err(ParseError {
            position: start,
            expected: "a name, number or punctuation".into(),
            found: format!("`{ch}`"),
        })
    }

    fn next(&mut self) -> std::result::Result<(usize, Tok), ParseError> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lex(),
        }
    }

    fn peek(&mut self) -> std::result::Result<&(usize, Tok), ParseError> {
        if self.peeked.is_none() {
            let t = self.lex()?;
            self.peeked = Some(t);
        }
        Ok(self.peeked.as_ref().unwrap())
    }

    fn expect(&mut self, want: Tok, expected: &str) -> std::result::Result<usize, ParseError> {
        let (p, t) = self.next()?;
        if t == want {
            Ok(p)
        } else {
            err(p, expected, &t)
        }
    }

    fn number(&mut self) -> std::result::Result<f64, ParseError> {
        match self.next()? {
            (_, Tok::Num(x)) => Ok(x),
            (p, t) => err(p, "a number", &t),
        }
    }

    fn ident(&mut self, expected: &str) -> std::result::Result<(usize, String), ParseError> {
        match self.next()? {
            (p, Tok::Ident(s)) => Ok((p, s)),
            (p, t) => err(p, expected, &t),
        }
    }

    fn spec(&mut self) -> Result<Spec> {
        let (p, name) = self.ident("a distribution or mixture name")?;
        let out = match name.as_str() {
            "tsp" | "directed" => Spec::Mixture(self.mixture_body(&name)?),
            _ if DISTRIBUTIONS.contains(&name.as_str()) => Spec::Distribution(self.dist_body(p, &name)?),
            _ => {
                return Err(ParseError {
                    position: p,
                    expected: "a distribution or mixture name".into(),
                    found: format!("`{name}`"),
                }
                .into())
            }
        };
        self.end()?;
        Ok(out)
    }

    fn end(&mut self) -> std::result::Result<(), ParseError> {
        match self.next()? {
            (_, Tok::End) => Ok(()),
            (p, t) => err(p, "end of input", &t),
        }
    }

    fn dist(&mut self) -> Result<DistributionSpec> {
        let (p, name) = self.ident("a distribution name")?;
        if !DISTRIBUTIONS.contains(&name.as_str()) {
            return Err(ParseError {
                position: p,
                expected: "a distribution name".into(),
                found: format!("`{name}`"),
            }
            .into());
        }
        self.dist_body(p, &name)
    }

    fn dist_body(&mut self, p: usize, name: &str) -> Result<DistributionSpec> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = vec![self.number()?];
        loop {
            match self.next()? {
                (_, Tok::Comma) => args.push(self.number()?),
                (_, Tok::RParen) => break,
                (q, t) => return Err(perr(q, "`,` or `)`", &t).into()),
            }
        }
        let arity = |n: &[usize]| -> std::result::Result<(), ParseError> {
            if n.contains(&args.len()) {
                Ok(())
            } else {
                let want = n.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" or ");
                Err(ParseError {
                    position: p,
                    expected: format!("{want} arguments to {name}"),
                    found: format!("{} arguments", args.len()),
                })
            }
        };
        let a = &args;
        Ok(match name {
            "uniform" => {
                arity(&[2])?;
                DistributionSpec::uniform(a[0], a[1])?
            }
            "arcsin" => {
                arity(&[2])?;
                DistributionSpec::arcsin(a[0], a[1])?
            }
            "semicircle" => {
                arity(&[2])?;
                DistributionSpec::semicircle(a[0], a[1])?
            }
            "beta" => {
                arity(&[2, 4])?;
                if a.len() == 2 {
                    DistributionSpec::beta(a[0], a[1])?
                } else {
                    DistributionSpec::beta_on(a[0], a[1], a[2], a[3])?
                }
            }
            "power" => {
                arity(&[1])?;
                DistributionSpec::power(a[0])?
            }
            "triangular" => {
                arity(&[3])?;
                DistributionSpec::triangular(a[0], a[1], a[2])?
            }
            "cauchy" => {
                arity(&[2])?;
                DistributionSpec::cauchy(a[0], a[1])?
            }
            "normal" => {
                arity(&[2])?;
                DistributionSpec::normal(a[0], a[1])?
            }
            "point_mass" => {
                arity(&[1])?;
                DistributionSpec::point_mass(a[0])?
            }
            _ => unreachable!("checked by caller"),
        })
    }

    fn mixture_body(&mut self, family: &str) -> Result<MixtureSpec> {
        let open = self.expect(Tok::LParen, "`(`")?;
        let mut n = None;
        let mut w = None;
        let mut x1 = None;
        let mut x2 = None;
        loop {
            let (p, key) = self.ident("one of `n`, `w`, `x1`, `x2`")?;
            self.expect(Tok::Eq, "`=`")?;
            let dup = |taken: bool| -> std::result::Result<(), ParseError> {
                if taken {
                    Err(ParseError {
                        position: p,
                        expected: "each field at most once".into(),
                        found: format!("a second `{key}`"),
                    })
                } else {
                    Ok(())
                }
            };
            match key.as_str() {
                "n" => {
                    dup(n.is_some())?;
                    n = Some(self.number()?);
                }
                "w" => {
                    dup(w.is_some())?;
                    w = Some(self.dist()?);
                }
                "x1" => {
                    dup(x1.is_some())?;
                    x1 = Some(self.dist()?);
                }
                "x2" => {
                    dup(x2.is_some())?;
                    x2 = Some(self.dist()?);
                }
                _ => {
                    return Err(ParseError {
                        position: p,
                        expected: "one of `n`, `w`, `x1`, `x2`".into(),
                        found: format!("`{key}`"),
                    }
                    .into())
                }
            }
            let (q, t) = self.next()?;
            match t {
                Tok::Comma => continue,
                Tok::RParen => break,
                t => return Err(perr(q, "`,` or `)`", &t).into()),
            }
        }
        let missing = |what: &str| ParseError {
            position: open,
            expected: format!("field `{what}` in {family}(...)"),
            found: "none".into(),
        };
        let x1 = x1.ok_or_else(|| missing("x1"))?;
        let x2 = x2.ok_or_else(|| missing("x2"))?;
        let weight = match (n, w) {
            (Some(n), None) => Weight::Power(n),
            (None, Some(w)) => Weight::Custom(w),
            (None, None) => return Err(missing("n").into()),
            (Some(_), Some(_)) => {
                return Err(ParseError {
                    position: open,
                    expected: "either `n` or `w`".into(),
                    found: "both".into(),
                }
                .into())
            }
        };
        let family = if family == "tsp" {
            Family::Undirected
        } else {
            Family::Directed
        };
        MixtureSpec {
            family,
            x1,
            x2,
            weight,
        }
        .validated()
    }
}

/// Parse either a distribution or a mixture.
pub fn parse_spec(src: &str) -> Result<Spec> {
    Parser::new(src).spec()
}

pub fn parse_distribution(src: &str) -> Result<DistributionSpec> {
    let mut p = Parser::new(src);
    let d = p.dist()?;
    p.end()?;
    Ok(d)
}

pub fn parse_mixture(src: &str) -> Result<MixtureSpec> {
    let mut p = Parser::new(src);
    let start = p.peek()?.0;
    match p.spec()? {
        Spec::Mixture(m) => Ok(m),
        Spec::Distribution(d) => Err(ParseError {
            position: start,
            expected: "`tsp` or `directed`".into(),
            found: format!("`{}`", d.name()),
        }
        .into()),
    }
}

/// Shortest text that parses back to `x`.
pub fn format_number(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{x}")
    } else {
        format!("{x:?}")
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DistributionSpec::*;
        let args: Vec<f64> = match *self {
            Uniform { lo, hi } | Arcsin { lo, hi } | Semicircle { lo, hi } => vec![lo, hi],
            Beta { alpha, beta, lo, hi } => {
                if lo == 0.0 && hi == 1.0 && lo.is_sign_positive() {
                    vec![alpha, beta]
                } else {
                    vec![alpha, beta, lo, hi]
                }
            }
            Power { n } => vec![n],
            Triangular { lo, mode, hi } => vec![lo, mode, hi],
            Cauchy { location, scale } => vec![location, scale],
            Normal { mean, sd } => vec![mean, sd],
            PointMass { at } => vec![at],
        };
        let args: Vec<String> = args.into_iter().map(format_number).collect();
        write!(f, "{}({})", self.name(), args.join(","))
    }
}

impl fmt::Display for MixtureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = match self.family {
            Family::Undirected => "tsp",
            Family::Directed => "directed",
        };
        let weight = match self.weight {
            Weight::Power(n) => format!("n={}", format_number(n)),
            Weight::Custom(w) => format!("w={w}"),
        };
        write!(f, "{family}({weight}, x1={}, x2={})", self.x1, self.x2)
    }
}

impl fmt::Display for Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spec::Distribution(d) => d.fmt(f),
            Spec::Mixture(m) => m.fmt(f),
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = SpecError;
    fn from_str(s: &str) -> Result<Self> {
        parse_distribution(s)
    }
}

impl FromStr for MixtureSpec {
    type Err = SpecError;
    fn from_str(s: &str) -> Result<Self> {
        parse_mixture(s)
    }
}

impl FromStr for Spec {
    type Err = SpecError;
    fn from_str(s: &str) -> Result<Self> {
        parse_spec(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse_error(src: &str) -> ParseError {
        match parse_spec(src) {
            Err(SpecError::Parse(e)) => e,
            other => panic!("expected a parse error for {src:?}, got {other:?}"),
        }
    }

    #[test]
    fn documented_forms() {
        for src in [
            "uniform(0,1)",
            "tsp(n=2, x1=uniform(0,1), x2=uniform(0,1))",
            "directed(n=2, x1=uniform(-1,1), x2=arcsin(-1,1))",
            "tsp(w=beta(3,1), x1=beta(1,2), x2=beta(1,2))",
        ] {
            let s = parse_spec(src).unwrap();
            assert_eq!(s.to_string(), src);
        }
    }

    #[test]
    fn parsed_values() {
        let m = parse_mixture(" directed( x2 = arcsin(-1, 1), n=2 ,x1=uniform(-1,1) ) ").unwrap();
        assert_eq!(
            m,
            MixtureSpec::directed(
                2.0,
                DistributionSpec::uniform(-1.0, 1.0).unwrap(),
                DistributionSpec::arcsin(-1.0, 1.0).unwrap()
            )
            .unwrap()
        );
        assert_eq!(
            parse_distribution("beta(2,2,-1,1)").unwrap(),
            DistributionSpec::beta_on(2.0, 2.0, -1.0, 1.0).unwrap()
        );
        assert_eq!(
            parse_distribution("normal(1.5e-3,+2)").unwrap(),
            DistributionSpec::normal(1.5e-3, 2.0).unwrap()
        );
    }

    #[test]
    fn malformed_value() {
        let e = parse_error("tsp(n=)");
        assert_eq!(e.position, 6);
        assert_eq!(e.expected, "a number");
        assert!(e.to_string().contains("position 6"));
    }

    #[test]
    fn error_positions() {
        assert_eq!(parse_error("").position, 0);
        assert_eq!(parse_error("gamma(1,2)").position, 0);
        assert_eq!(parse_error("uniform(0 1)").position, 10);
        assert_eq!(parse_error("uniform(0,1) x").position, 13);
        assert_eq!(parse_error("tsp(n=1, x1=uniform(0,1))").expected, "field `x2` in tsp(...)");
        assert_eq!(parse_error("tsp(n=1, n=2, x1=uniform(0,1), x2=uniform(0,1))").position, 9);
        assert_eq!(parse_error("tsp(q=1)").position, 4);
        assert_eq!(parse_error("uniform(0,1,2)").position, 0);
        assert_eq!(parse_error("uniform(0,1e999)").position, 10);
        assert_eq!(parse_error("uniform(0,#)").position, 10);
        assert!(matches!(parse_mixture("uniform(0,1)"), Err(SpecError::Parse(_))));
        assert!(matches!(parse_distribution("tsp(n=1, x1=uniform(0,1), x2=uniform(0,1))"), Err(SpecError::Parse(_))));
    }

    #[test]
    fn semantic_errors_are_not_parse_errors() {
        assert!(matches!(parse_spec("uniform(1,0)"), Err(SpecError::InvalidSpec(_))));
        assert!(matches!(
            parse_spec("tsp(n=0.5, x1=uniform(0,1), x2=uniform(0,1))"),
            Err(SpecError::InvalidSpec(_))
        ));
        assert!(matches!(
            parse_spec("directed(w=beta(2,2), x1=uniform(0,1), x2=uniform(0,1))"),
            Err(SpecError::InvalidSpec(_))
        ));
    }

    fn number() -> impl Strategy<Value = f64> {
        prop_oneof![
            (-50i32..50).prop_map(f64::from),
            -1e6..1e6f64,
            (-1e-3..1e-3f64),
            (1e-300..1e300f64),
        ]
    }

    fn positive() -> impl Strategy<Value = f64> {
        prop_oneof![(1i32..20).prop_map(f64::from), 1e-3..1e3f64]
    }

    fn interval() -> impl Strategy<Value = (f64, f64)> {
        (number(), positive()).prop_map(|(lo, w)| (lo, lo + w)).prop_filter("nonempty", |(lo, hi)| lo < hi)
    }

    fn distribution() -> impl Strategy<Value = DistributionSpec> {
        prop_oneof![
            interval().prop_map(|(a, b)| DistributionSpec::uniform(a, b).unwrap()),
            interval().prop_map(|(a, b)| DistributionSpec::arcsin(a, b).unwrap()),
            interval().prop_map(|(a, b)| DistributionSpec::semicircle(a, b).unwrap()),
            (positive(), positive()).prop_map(|(a, b)| DistributionSpec::beta(a, b).unwrap()),
            (positive(), positive(), interval())
                .prop_map(|(a, b, (lo, hi))| DistributionSpec::beta_on(a, b, lo, hi).unwrap()),
            (1.0..10.0f64).prop_map(|n| DistributionSpec::power(n).unwrap()),
            (interval(), 0.0..=1.0f64).prop_map(|((lo, hi), t)| {
                DistributionSpec::triangular(lo, (lo + t * (hi - lo)).clamp(lo, hi), hi).unwrap()
            }),
            (number(), positive()).prop_map(|(a, b)| DistributionSpec::cauchy(a, b).unwrap()),
            (number(), positive()).prop_map(|(a, b)| DistributionSpec::normal(a, b).unwrap()),
            number().prop_map(|a| DistributionSpec::point_mass(a).unwrap()),
        ]
    }

    fn weight_law() -> impl Strategy<Value = DistributionSpec> {
        prop_oneof![
            (positive(), positive()).prop_map(|(a, b)| DistributionSpec::beta(a, b).unwrap()),
            (1.0..10.0f64).prop_map(|n| DistributionSpec::power(n).unwrap()),
            Just(DistributionSpec::uniform(0.0, 1.0).unwrap()),
        ]
    }

    fn mixture() -> impl Strategy<Value = MixtureSpec> {
        prop_oneof![
            (1.0..20.0f64, distribution(), distribution()).prop_map(|(n, a, b)| MixtureSpec::tsp(n, a, b).unwrap()),
            (1.0..20.0f64, distribution(), distribution())
                .prop_map(|(n, a, b)| MixtureSpec::directed(n, a, b).unwrap()),
            (weight_law(), distribution(), distribution())
                .prop_map(|(w, a, b)| MixtureSpec::tsp_with_weight(w, a, b).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn distribution_round_trip(d in distribution()) {
            let text = d.to_string();
            let back: DistributionSpec = text.parse().unwrap();
            prop_assert_eq!(back, d);
            prop_assert_eq!(back.to_string(), text);
        }

        #[test]
        fn mixture_round_trip(m in mixture()) {
            let text = m.to_string();
            let back: MixtureSpec = text.parse().unwrap();
            prop_assert_eq!(back, m);
            prop_assert_eq!(back.to_string(), text);
        }

        #[test]
        fn number_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let text = format_number(x);
            prop_assert_eq!(text.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }

        #[test]
        fn garbage_never_panics(s in "[a-z0-9(),=. +-]{0,40}") {
            let _ = parse_spec(&s);
        }
    }
}
