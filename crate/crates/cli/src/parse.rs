//! Expression syntax.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := factor ('^' '-'? INT)?
//! factor := NUMBER | IDENT | IDENT '[' idx ']' | IDENT '^' '[' idx ']' ('[' idx ']')?
//!         | 'd' '(' expr ',' IDENT ')' | '(' expr ')'
//! ```
//!
//! Identifiers are chart coordinates (`x1`, `th1`, jets `t_1`, `tau_m1`, …),
//! `rho`, or indexed atoms. `g[i,j]` is the metric, `g^[i,j]` and `ginv[i,j]`
//! its inverse.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use superharm_core::berezin::DENSITY_ATOM;
use superharm_core::sgeometry::METRIC_ATOM;
use superharm_core::superalg::{Coord, GradedExpr, SuperChart};
use superharm_core::symscalar::{FuncAtom, Rational, ScalarExpr};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnknownSymbol,
    UnbalancedParens,
    OddExponent,
    Syntax,
    Math,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Byte offset into the source.
pub type Span = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ast {
    Num(Rational),
    Ident(String, Span),
    Atom {
        name: String,
        upper: Vec<u32>,
        lower: Vec<u32>,
        span: Span,
    },
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Neg(Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>, Span),
    Pow(Box<Ast>, i32, Span),
    Deriv(Box<Ast>, String, Span),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
    End,
}

fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, Span)>,
    pos: usize,
    opens: Vec<Span>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut toks = Vec::new();
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                toks.push((Tok::Num(src[start..i].parse().expect("digits")), start));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((Tok::Ident(src[start..i].to_string()), start));
            } else if "+-*/^()[],".contains(c) {
                toks.push((Tok::Op(c), i));
                i += 1;
            } else {
                return Err(err_at(src, i, ParseErrorKind::Syntax, format!("unexpected character `{c}`")));
            }
        }
        toks.push((Tok::End, src.len()));
        Ok(Self {
            src,
            toks,
            pos: 0,
            opens: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, kind: ParseErrorKind, at: Span, msg: impl Into<String>) -> ParseError {
        err_at(self.src, at, kind, msg.into())
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Tok::End => match self.opens.last() {
                Some(&open) => self.error(ParseErrorKind::UnbalancedParens, open, "unclosed `(`"),
                None => self.error(ParseErrorKind::Syntax, self.span(), "unexpected end of input"),
            },
            Tok::Op(')') if self.opens.is_empty() => {
                self.error(ParseErrorKind::UnbalancedParens, self.span(), "unmatched `)`")
            }
            t => self.error(ParseErrorKind::Syntax, self.span(), format!("unexpected {}", describe(t))),
        }
    }

    fn expect(&mut self, c: char) -> Result<Span, ParseError> {
        if *self.peek() == Tok::Op(c) {
            return Ok(self.bump().1);
        }
        if *self.peek() == Tok::End {
            if let Some(&open) = self.opens.last() {
                return Err(self.error(ParseErrorKind::UnbalancedParens, open, "unclosed `(`"));
            }
        }
        let found = describe(self.peek());
        Err(self.error(ParseErrorKind::Syntax, self.span(), format!("expected `{c}`, found {found}")))
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Op('/') => {
                    let at = self.bump().1;
                    lhs = Ast::Div(Box::new(lhs), Box::new(self.unary()?), at);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Ast, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast, ParseError> {
        let base = self.factor()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        let at = self.bump().1;
        let neg = if *self.peek() == Tok::Op('-') {
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            (Tok::Num(n), sp) => {
                let e: i32 = n
                    .try_into()
                    .map_err(|_| self.error(ParseErrorKind::Syntax, sp, "exponent too large"))?;
                Ok(Ast::Pow(Box::new(base), if neg { -e } else { e }, at))
            }
            (t, sp) => Err(self.error(
                ParseErrorKind::Syntax,
                sp,
                format!("expected an integer exponent, found {}", describe(&t)),
            )),
        }
    }

    fn indices(&mut self) -> Result<Vec<u32>, ParseError> {
        self.expect('[')?;
        let mut out = Vec::new();
        if *self.peek() == Tok::Op(']') {
            self.bump();
            return Ok(out);
        }
        loop {
            match self.bump() {
                (Tok::Num(n), sp) => out.push(
                    n.try_into()
                        .map_err(|_| self.error(ParseErrorKind::Syntax, sp, "index too large"))?,
                ),
                (t, sp) => {
                    return Err(self.error(ParseErrorKind::Syntax, sp, format!("expected an index, found {}", describe(&t))))
                }
            }
            match self.bump() {
                (Tok::Op(','), _) => {}
                (Tok::Op(']'), _) => return Ok(out),
                (t, sp) => {
                    return Err(self.error(ParseErrorKind::Syntax, sp, format!("expected `,` or `]`, found {}", describe(&t))))
                }
            }
        }
    }

    fn factor(&mut self) -> Result<Ast, ParseError> {
        let start = self.pos;
        let (tok, span) = self.bump();
        match tok {
            Tok::Num(n) => Ok(Ast::Num(Rational::from_integer(n))),
            Tok::Op('(') => {
                self.opens.push(span);
                let e = self.expr()?;
                self.expect(')')?;
                self.opens.pop();
                Ok(e)
            }
            Tok::Ident(name) if name == "d" && *self.peek() == Tok::Op('(') => {
                let open = self.bump().1;
                self.opens.push(open);
                let inner = self.expr()?;
                self.expect(',')?;
                let coord = match self.bump() {
                    (Tok::Ident(c), _) => c,
                    (t, sp) => {
                        return Err(self.error(ParseErrorKind::Syntax, sp, format!("expected a coordinate, found {}", describe(&t))))
                    }
                };
                self.expect(')')?;
                self.opens.pop();
                Ok(Ast::Deriv(Box::new(inner), coord, span))
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Op('[') {
                    let lower = self.indices()?;
                    return Ok(Ast::Atom {
                        name,
                        upper: vec![],
                        lower,
                        span,
                    });
                }
                if *self.peek() == Tok::Op('^') && *self.peek_at(1) == Tok::Op('[') {
                    self.bump();
                    let upper = self.indices()?;
                    let lower = if *self.peek() == Tok::Op('[') { self.indices()? } else { vec![] };
                    return Ok(Ast::Atom {
                        name,
                        upper,
                        lower,
                        span,
                    });
                }
                Ok(Ast::Ident(name, span))
            }
            _ => {
                self.pos = start;
                Err(self.unexpected())
            }
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n) => format!("number `{n}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    }
}

fn err_at(src: &str, at: Span, kind: ParseErrorKind, message: String) -> ParseError {
    let (line, column) = position(src, at);
    ParseError {
        kind,
        line,
        column,
        message,
    }
}

/// Parse to a tree without resolving symbols.
pub fn parse_ast(src: &str) -> Result<Ast, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected());
    }
    Ok(e)
}

fn atom_for(name: &str, upper: Vec<u32>, lower: Vec<u32>) -> FuncAtom {
    match (name, upper.len(), lower.len()) {
        (METRIC_ATOM, 0, 2) => FuncAtom::symmetric_lower(METRIC_ATOM, lower[0], lower[1]),
        (METRIC_ATOM, 2, 0) => FuncAtom::symmetric_upper(METRIC_ATOM, upper[0], upper[1]),
        ("ginv", 0, 2) => FuncAtom::symmetric_upper(METRIC_ATOM, lower[0], lower[1]),
        _ => FuncAtom::new(name, upper, lower),
    }
}

struct Eval<'a> {
    src: &'a str,
    chart: &'a Arc<SuperChart>,
}

impl Eval<'_> {
    fn err(&self, kind: ParseErrorKind, at: Span, msg: impl Into<String>) -> ParseError {
        err_at(self.src, at, kind, msg.into())
    }

    fn eval(&self, ast: &Ast) -> Result<GradedExpr, ParseError> {
        let chart = self.chart;
        Ok(match ast {
            Ast::Num(n) => GradedExpr::constant(chart, n.clone()),
            Ast::Ident(name, span) => {
                if let Some(c) = chart.lookup(name) {
                    GradedExpr::coord(chart, c)
                } else if name == DENSITY_ATOM {
                    GradedExpr::scalar(chart, ScalarExpr::atom(FuncAtom::plain(DENSITY_ATOM)))
                } else {
                    return Err(self.err(ParseErrorKind::UnknownSymbol, *span, format!("unknown symbol `{name}`")));
                }
            }
            Ast::Atom { name, upper, lower, span } => {
                if chart.lookup(name).is_some() {
                    return Err(self.err(
                        ParseErrorKind::Syntax,
                        *span,
                        format!("coordinate `{name}` cannot carry indices"),
                    ));
                }
                GradedExpr::scalar(chart, ScalarExpr::atom(atom_for(name, upper.clone(), lower.clone())))
            }
            Ast::Add(a, b) => &self.eval(a)? + &self.eval(b)?,
            Ast::Sub(a, b) => &self.eval(a)? - &self.eval(b)?,
            Ast::Neg(a) => -&self.eval(a)?,
            Ast::Mul(a, b) => &self.eval(a)? * &self.eval(b)?,
            Ast::Div(a, b, span) => {
                let num = self.eval(a)?;
                let den = self.eval(b)?;
                let inv = den
                    .as_scalar()
                    .and_then(|s| s.inverse())
                    .ok_or_else(|| self.err(ParseErrorKind::Math, *span, format!("cannot divide by `{den}`")))?;
                num.mul_scalar(&inv)
            }
            Ast::Pow(base, e, span) => {
                let b = self.eval(base)?;
                let single_odd = b.size() == 1
                    && b.terms().all(|(m, s)| m.len() == 1 && s.as_constant().is_some());
                if single_odd && *e >= 2 {
                    return Err(self.err(
                        ParseErrorKind::OddExponent,
                        *span,
                        format!("odd generator `{b}` raised to {e}"),
                    ));
                }
                if *e < 0 {
                    let s = b
                        .as_scalar()
                        .ok_or_else(|| self.err(ParseErrorKind::Math, *span, "negative power of a non-scalar"))?;
                    let p = s
                        .pow(*e)
                        .map_err(|x| self.err(ParseErrorKind::Math, *span, x.to_string()))?;
                    GradedExpr::scalar(chart, p)
                } else {
                    (0..*e).fold(GradedExpr::one(chart), |acc, _| &acc * &b)
                }
            }
            Ast::Deriv(inner, coord, span) => {
                let c = chart
                    .lookup(coord)
                    .ok_or_else(|| self.err(ParseErrorKind::UnknownSymbol, *span, format!("unknown coordinate `{coord}`")))?;
                self.eval(inner)?
                    .partial(c)
                    .map_err(|x| self.err(ParseErrorKind::Math, *span, x.to_string()))?
            }
        })
    }
}

/// Parse and normalize on `chart`.
pub fn parse_expr(src: &str, chart: &Arc<SuperChart>) -> Result<GradedExpr, ParseError> {
    let ast = parse_ast(src)?;
    Eval { src, chart }.eval(&ast)
}

/// Parse an expression that must not involve odd generators.
pub fn parse_scalar(src: &str, chart: &Arc<SuperChart>) -> Result<ScalarExpr, ParseError> {
    let e = parse_expr(src, chart)?;
    e.as_scalar().ok_or_else(|| ParseError {
        kind: ParseErrorKind::Math,
        line: 1,
        column: 1,
        message: format!("`{src}` involves odd generators"),
    })
}

/// `coord: expr; coord: expr`. Unlisted components are zero.
pub fn parse_vfield(
    src: &str,
    chart: &Arc<SuperChart>,
) -> Result<superharm_core::superalg::GradedDerivation, ParseError> {
    let mut comps = vec![GradedExpr::zero(chart); chart.coord_count()];
    let mut offset = 0;
    for piece in src.split(';') {
        let start = offset;
        offset += piece.len() + 1;
        if piece.trim().is_empty() {
            continue;
        }
        let colon = piece.find(':').ok_or_else(|| {
            err_at(src, start, ParseErrorKind::Syntax, "expected `coordinate: expression`".into())
        })?;
        let name = piece[..colon].trim();
        let name_at = start + piece[..colon].find(name).unwrap_or(0);
        let c: Coord = chart.lookup(name).ok_or_else(|| {
            err_at(src, name_at, ParseErrorKind::UnknownSymbol, format!("unknown coordinate `{name}`"))
        })?;
        let body_at = start + colon + 1;
        let body = &piece[colon + 1..];
        let e = parse_expr(body, chart).map_err(|mut e| {
            let (l, col) = position(src, body_at);
            if e.line == 1 {
                e.column += col - 1;
            }
            e.line += l - 1;
            e
        })?;
        let k = chart.coord_index(c);
        comps[k] = &comps[k] + &e;
    }
    superharm_core::superalg::GradedDerivation::from_components(chart, comps).map_err(|e| ParseError {
        kind: ParseErrorKind::Math,
        line: 1,
        column: 1,
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use superharm_core::superalg::Parity;
    use superharm_core::symscalar::rat;

    fn chart() -> Arc<SuperChart> {
        SuperChart::standard(2, 2)
    }

    #[test]
    fn reorders_generators() {
        let c = chart();
        let e = parse_expr("th2*th1", &c).unwrap();
        let want = -&(&GradedExpr::generator(&c, 0) * &GradedExpr::generator(&c, 1));
        assert_eq!(e, want);
    }

    #[test]
    fn mixed_parity() {
        let c = chart();
        let e = parse_expr("g[1,1]*th1 + x1", &c).unwrap();
        assert_eq!(e.homogeneous_parts().len(), 2);
        assert_eq!(e.part(Parity::Even), GradedExpr::even_coord(&c, 0));
    }

    #[test]
    fn derivative() {
        let c = chart();
        assert_eq!(parse_expr("d(x1*th1, x1)", &c).unwrap(), GradedExpr::generator(&c, 0));
        assert_eq!(parse_expr("d(x1*th1, th1)", &c).unwrap(), GradedExpr::even_coord(&c, 0));
    }

    #[test]
    fn metric_spellings() {
        let c = chart();
        let a = parse_expr("g[2,1]", &c).unwrap();
        assert_eq!(a, parse_expr("g[1,2]", &c).unwrap());
        assert_eq!(parse_expr("g^[2,1]", &c).unwrap(), parse_expr("ginv[1,2]", &c).unwrap());
        assert_eq!(parse_expr("rho", &c).unwrap(), parse_expr("rho[]", &c).unwrap());
        assert_eq!(parse_expr("rho^-1*rho", &c).unwrap(), GradedExpr::one(&c));
    }

    #[test]
    fn rationals_and_powers() {
        let c = chart();
        let e = parse_expr("3/4*x1^2 - -x2", &c).unwrap();
        let x1 = GradedExpr::even_coord(&c, 0);
        let want = &(&x1 * &x1).scale(&superharm_core::symscalar::ratio(3, 4)) + &GradedExpr::even_coord(&c, 1);
        assert_eq!(e, want);
        assert_eq!(parse_expr("(x1 + 1)^0", &c).unwrap(), GradedExpr::constant(&c, rat(1)));
    }

    #[test]
    fn errors_carry_positions() {
        let c = chart();
        let e = parse_expr("x1 + y7", &c).unwrap_err();
        assert_eq!((e.kind.clone(), e.line, e.column), (ParseErrorKind::UnknownSymbol, 1, 6));
        let e = parse_expr("(x1 + th1", &c).unwrap_err();
        assert_eq!((e.kind.clone(), e.column), (ParseErrorKind::UnbalancedParens, 1));
        let e = parse_expr("x1 + th1)", &c).unwrap_err();
        assert_eq!((e.kind.clone(), e.column), (ParseErrorKind::UnbalancedParens, 9));
        let e = parse_expr("x1*\n  th1^2", &c).unwrap_err();
        assert_eq!((e.kind.clone(), e.line, e.column), (ParseErrorKind::OddExponent, 2, 6));
        assert!(parse_expr("x1 $", &c).is_err());
        assert!(parse_expr("x1/th1", &c).is_err());
    }

    #[test]
    fn vector_fields() {
        let c = chart();
        let v = parse_vfield("x1: th1*x2; th2: 1", &c).unwrap();
        assert_eq!(v.component(Coord::Even(0)), &(&GradedExpr::generator(&c, 0) * &GradedExpr::even_coord(&c, 1)));
        assert_eq!(v.component(Coord::Odd(1)), &GradedExpr::one(&c));
        let e = parse_vfield("x1: 1; z: 2", &c).unwrap_err();
        assert_eq!((e.kind, e.column), (ParseErrorKind::UnknownSymbol, 8));
        let e = parse_vfield("x1: 1; th1: q", &c).unwrap_err();
        assert_eq!((e.kind, e.column), (ParseErrorKind::UnknownSymbol, 13));
    }
}
