//! Text declarations for systems and splittings.
//!
//! ```text
//! system    := factor | "product" "(" item ("," item)* ")"
//! item      := [label ":"] factor
//! factor    := "circle_g" "(" expr "," expr ["," "table" "=" int] ")"
//!            | "toral" "(" row ("," row)* ")"            row := "[" int ("," int)* "]"
//!            | "rotation" "(" expr ("," expr)* [";" flag] ")"
//!            | "product" "(" item ("," item)* ")"        (flattened)
//! flag      := "minimal" | "non-minimal" | "unknown"
//! expr      := arithmetic over numbers, "sqrt(…)", "pi", "golden" = (√5−1)/2,
//!              "lambda_s" = (3−√5)/2, "lambda_u" = (3+√5)/2
//!
//! splitting := "E" "=" sel ("+" sel)* ";" "F" "=" sel ("+" sel)*
//! sel       := name ["[" int ("," int)* "]"] | "stable" "(" name ")"
//!            | "unstable" "(" name ")" | "span" "(" vec ("," vec)* ")"
//! ```
//!
//! A `name` is a factor label or, when unambiguous, a kind name
//! (`circle`, `toral`, `rotation`). Unlabelled factors are called `f0`, `f1`, ….

use crate::error::{Error, Result};
use crate::splittings::{Selector, SplittingSpec};
use crate::systems::{
    golden_contraction, golden_expansion, CircleMapG, FactorKind, Minimality, RotationSystem,
    ToralAutomorphism, TorusMapSystem, DEFAULT_TABLE_RESOLUTION,
};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Sym(char),
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

fn err(column: usize, message: impl Into<String>) -> Error {
    Error::Declaration {
        column,
        message: message.into(),
    }
}

impl Lexer {
    fn new(src: &str) -> Result<Self> {
        let chars: Vec<char> = src.chars().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
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
                let v = s.parse::<f64>().map_err(|_| err(col, format!("bad number `{s}`")))?;
                toks.push((Tok::Num(v), col));
            } else if c.is_alphabetic() || c == '_' {
                let start = i;
                // identifiers may contain '-' (for `non-minimal`)
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '_' || (chars[i] == '-' && chars.get(i + 1).is_some_and(|n| n.is_alphabetic())))
                {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), col));
            } else if "()[],;:=+-*/".contains(c) {
                toks.push((Tok::Sym(c), col));
                i += 1;
            } else {
                return Err(err(col, format!("unexpected character `{c}`")));
            }
        }
        Ok(Lexer {
            toks,
            pos: 0,
            end_col: chars.len() + 1,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        let col = self.col();
        match self.next() {
            Some(Tok::Sym(s)) if s == c => Ok(()),
            Some(t) => Err(err(col, format!("expected `{c}`, found {}", describe(&t)))),
            None => Err(err(col, format!("expected `{c}`, found end of input"))),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String> {
        let col = self.col();
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            Some(t) => Err(err(col, format!("expected a name, found {}", describe(&t)))),
            None => Err(err(col, "expected a name, found end of input")),
        }
    }

    fn int(&mut self) -> Result<i64> {
        let col = self.col();
        let neg = self.eat_sym('-');
        match self.next() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() < 1e15 => {
                Ok(if neg { -(v as i64) } else { v as i64 })
            }
            _ => Err(err(col, "expected an integer")),
        }
    }

    fn finish(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            return Err(err(self.col(), "unexpected trailing input"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        loop {
            if self.eat_sym('+') {
                v += self.term()?;
            } else if self.eat_sym('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.unary()?;
        loop {
            if self.eat_sym('*') {
                v *= self.unary()?;
            } else if self.eat_sym('/') {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64> {
        if self.eat_sym('-') {
            return Ok(-self.unary()?);
        }
        let col = self.col();
        match self.next() {
            Some(Tok::Num(v)) => Ok(v),
            Some(Tok::Sym('(')) => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "sqrt" => {
                    self.expect_sym('(')?;
                    let v = self.expr()?;
                    self.expect_sym(')')?;
                    Ok(v.sqrt())
                }
                "pi" => Ok(std::f64::consts::PI),
                "golden" => Ok((5f64.sqrt() - 1.0) / 2.0),
                "lambda_s" => Ok(golden_contraction()),
                "lambda_u" => Ok(golden_expansion()),
                other => Err(err(col, format!("unknown constant `{other}`"))),
            },
            Some(t) => Err(err(col, format!("expected a number, found {}", describe(&t)))),
            None => Err(err(col, "expected a number, found end of input")),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(v) => format!("number {v}"),
        Tok::Sym(c) => format!("`{c}`"),
    }
}

fn parse_factor(lx: &mut Lexer, out: &mut Vec<(Option<String>, FactorKind)>, label: Option<String>) -> Result<()> {
    let col = lx.col();
    let kind = lx.ident()?;
    lx.expect_sym('(')?;
    let wrap_err = |e: Error| match e {
        Error::Declaration { .. } => e,
        other => err(col, other.to_string()),
    };
    match kind.as_str() {
        "circle_g" => {
            let alpha = lx.expr()?;
            lx.expect_sym(',')?;
            let beta = lx.expr()?;
            let mut table = DEFAULT_TABLE_RESOLUTION;
            if lx.eat_sym(',') {
                let key_col = lx.col();
                let key = lx.ident()?;
                if key != "table" {
                    return Err(err(key_col, format!("unknown circle_g option `{key}`")));
                }
                lx.expect_sym('=')?;
                let t = lx.int()?;
                table = usize::try_from(t).map_err(|_| err(key_col, "table must be positive"))?;
            }
            lx.expect_sym(')')?;
            let g = CircleMapG::build(alpha, beta, table).map_err(wrap_err)?;
            out.push((label, FactorKind::Circle(g)));
        }
        "toral" => {
            let mut rows = Vec::new();
            loop {
                lx.expect_sym('[')?;
                let mut row = vec![lx.int()?];
                while lx.eat_sym(',') {
                    row.push(lx.int()?);
                }
                lx.expect_sym(']')?;
                rows.push(row);
                if !lx.eat_sym(',') {
                    break;
                }
            }
            lx.expect_sym(')')?;
            let t = ToralAutomorphism::new(rows).map_err(wrap_err)?;
            out.push((label, FactorKind::Toral(t)));
        }
        "rotation" => {
            let mut freqs = vec![lx.expr()?];
            while lx.eat_sym(',') {
                freqs.push(lx.expr()?);
            }
            let mut flag = Minimality::Unknown;
            if lx.eat_sym(';') {
                let fcol = lx.col();
                flag = match lx.ident()?.as_str() {
                    "minimal" => Minimality::KnownMinimal,
                    "non-minimal" => Minimality::KnownNonMinimal,
                    "unknown" => Minimality::Unknown,
                    other => return Err(err(fcol, format!("unknown minimality flag `{other}`"))),
                };
            }
            lx.expect_sym(')')?;
            let r = RotationSystem::new(freqs, flag).map_err(wrap_err)?;
            out.push((label, FactorKind::Rotation(r)));
        }
        "product" => {
            if label.is_some() {
                return Err(err(col, "nested products cannot be labelled"));
            }
            parse_items(lx, out)?;
            lx.expect_sym(')')?;
        }
        other => return Err(err(col, format!("unknown factor kind `{other}`"))),
    }
    Ok(())
}

fn parse_items(lx: &mut Lexer, out: &mut Vec<(Option<String>, FactorKind)>) -> Result<()> {
    loop {
        let label = if matches!(lx.peek(), Some(Tok::Ident(_))) && lx.peek2() == Some(&Tok::Sym(':')) {
            let l = lx.ident()?;
            lx.expect_sym(':')?;
            Some(l)
        } else {
            None
        };
        parse_factor(lx, out, label)?;
        if !lx.eat_sym(',') {
            return Ok(());
        }
    }
}

/// Parses a system declaration such as
/// `product(g: circle_g(lambda_s, lambda_u), h: toral([2,1],[1,1]))`.
pub fn parse_system(src: &str) -> Result<TorusMapSystem> {
    let mut lx = Lexer::new(src)?;
    let mut factors = Vec::new();
    parse_items(&mut lx, &mut factors)?;
    lx.finish()?;
    let named = factors
        .into_iter()
        .enumerate()
        .map(|(i, (l, k))| (l.unwrap_or_else(|| format!("f{i}")), k))
        .collect();
    TorusMapSystem::product(named).map_err(|e| err(1, e.to_string()))
}

fn parse_selectors(lx: &mut Lexer) -> Result<Vec<Selector>> {
    let mut out = Vec::new();
    loop {
        let col = lx.col();
        let name = lx.ident()?;
        let sel = match name.as_str() {
            "stable" | "unstable" => {
                lx.expect_sym('(')?;
                let f = lx.ident()?;
                lx.expect_sym(')')?;
                if name == "stable" {
                    Selector::Stable(f)
                } else {
                    Selector::Unstable(f)
                }
            }
            "span" => {
                lx.expect_sym('(')?;
                let mut vs = Vec::new();
                loop {
                    lx.expect_sym('[')?;
                    let mut v = vec![lx.expr()?];
                    while lx.eat_sym(',') {
                        v.push(lx.expr()?);
                    }
                    lx.expect_sym(']')?;
                    vs.push(v);
                    if !lx.eat_sym(',') {
                        break;
                    }
                }
                lx.expect_sym(')')?;
                Selector::Span(vs)
            }
            _ if lx.eat_sym('[') => {
                let mut axes = Vec::new();
                loop {
                    let a = lx.int()?;
                    axes.push(usize::try_from(a).map_err(|_| err(col, "negative axis"))?);
                    if !lx.eat_sym(',') {
                        break;
                    }
                }
                lx.expect_sym(']')?;
                Selector::Axes(name, axes)
            }
            _ => Selector::Factor(name),
        };
        out.push(sel);
        if !lx.eat_sym('+') {
            return Ok(out);
        }
    }
}

/// Parsed `E = …; F = …` before it is bound to a system.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingDecl {
    pub e: Vec<Selector>,
    pub f: Vec<Selector>,
}

pub fn parse_splitting_decl(src: &str) -> Result<SplittingDecl> {
    let mut lx = Lexer::new(src)?;
    let side = |lx: &mut Lexer, name: &str| -> Result<Vec<Selector>> {
        let col = lx.col();
        let id = lx.ident()?;
        if id != name {
            return Err(err(col, format!("expected `{name} =`")));
        }
        lx.expect_sym('=')?;
        parse_selectors(lx)
    };
    let e = side(&mut lx, "E")?;
    lx.expect_sym(';')?;
    let f = side(&mut lx, "F")?;
    lx.eat_sym(';');
    lx.finish()?;
    Ok(SplittingDecl { e, f })
}

/// Parses `E = …; F = …` against `system`.
pub fn parse_splitting(src: &str, label: &str, system: &TorusMapSystem) -> Result<SplittingSpec> {
    let d = parse_splitting_decl(src)?;
    SplittingSpec::from_selectors(label, system, &d.e, &d.f)
}
