//! Commutative coefficient ring: rational linear combinations of Laurent
//! monomials in even symbols and opaque function atoms.
//!
//! Function atoms (`g_{ij}`, `g^{ij}`, `|G|`, generic component functions)
//! depend on every [`SymbolKind::Coordinate`] symbol and carry a formal
//! derivative record, so `∂g^{12}/∂x1` is itself an atom. Every value of
//! [`ScalarExpr`] is kept in normal form, which makes structural equality
//! the zero test.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("unsupported expression: {0}")]
    Unsupported(String),
    #[error("cannot differentiate with respect to parameter `{0}`")]
    ParameterDerivative(String),
    #[error("cannot bind derivative atom `{0}`; bind the underlying atom instead")]
    BindDerivativeAtom(String),
    #[error("`{0}` appears with a negative power but its replacement is not invertible")]
    NotInvertible(String),
}

/// Role of an even symbol.
///
/// Function atoms depend on coordinates only. Jet symbols are independent
/// variables of a jet chart (`t`, `t_1`, `τ_{-1}`, ...) that function atoms do
/// not depend on. Parameters are constants and cannot be differentiated by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    Coordinate,
    Jet,
    Parameter,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EvenSymbol {
    name: Arc<str>,
    kind: SymbolKind,
}

impl EvenSymbol {
    pub fn new(name: impl Into<Arc<str>>, kind: SymbolKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }

    pub fn coordinate(name: impl Into<Arc<str>>) -> Self {
        Self::new(name, SymbolKind::Coordinate)
    }

    pub fn parameter(name: impl Into<Arc<str>>) -> Self {
        Self::new(name, SymbolKind::Parameter)
    }

    pub fn jet(name: impl Into<Arc<str>>) -> Self {
        Self::new(name, SymbolKind::Jet)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }
}

/// Opaque indexed function of the coordinates, e.g. `g_{12}` or `∂²g^{11}/∂x1∂x2`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuncAtom {
    name: Arc<str>,
    upper: Vec<u32>,
    lower: Vec<u32>,
    deriv: BTreeMap<Arc<str>, u32>,
}

impl FuncAtom {
    pub fn new(name: impl Into<Arc<str>>, upper: Vec<u32>, lower: Vec<u32>) -> Self {
        Self {
            name: name.into(),
            upper,
            lower,
            deriv: BTreeMap::new(),
        }
    }

    pub fn plain(name: impl Into<Arc<str>>) -> Self {
        Self::new(name, Vec::new(), Vec::new())
    }

    /// Component `g_{ij}` of a symmetric tensor, indices stored sorted.
    pub fn symmetric_lower(name: impl Into<Arc<str>>, i: u32, j: u32) -> Self {
        Self::new(name, Vec::new(), vec![i.min(j), i.max(j)])
    }

    /// Component `g^{ij}` of a symmetric tensor, indices stored sorted.
    pub fn symmetric_upper(name: impl Into<Arc<str>>, i: u32, j: u32) -> Self {
        Self::new(name, vec![i.min(j), i.max(j)], Vec::new())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn upper(&self) -> &[u32] {
        &self.upper
    }

    pub fn lower(&self) -> &[u32] {
        &self.lower
    }

    pub fn deriv(&self) -> &BTreeMap<Arc<str>, u32> {
        &self.deriv
    }

    pub fn has_derivatives(&self) -> bool {
        !self.deriv.is_empty()
    }

    /// The same atom with its derivative record cleared.
    pub fn underived(&self) -> FuncAtom {
        FuncAtom {
            deriv: BTreeMap::new(),
            ..self.clone()
        }
    }

    pub fn differentiated(&self, coord: &str) -> FuncAtom {
        let mut out = self.clone();
        *out.deriv.entry(Arc::from(coord)).or_insert(0) += 1;
        out
    }

    pub fn with_deriv(mut self, deriv: BTreeMap<Arc<str>, u32>) -> Self {
        deriv.into_iter().filter(|(_, n)| *n > 0).for_each(|(k, n)| {
            self.deriv.insert(k, n);
        });
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Sym(EvenSymbol),
    Func(FuncAtom),
}

impl Atom {
    fn is_invertible(&self) -> bool {
        matches!(self, Atom::Func(_))
    }
}

impl From<EvenSymbol> for Atom {
    fn from(s: EvenSymbol) -> Self {
        Atom::Sym(s)
    }
}

impl From<FuncAtom> for Atom {
    fn from(f: FuncAtom) -> Self {
        Atom::Func(f)
    }
}

/// Product of atom powers, sorted by atom with no zero exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Atom, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom, exp: i32) -> Self {
        if exp == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(a, exp)])
        }
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|(_, e)| *e as i64).sum()
    }

    pub fn exponent_of(&self, a: &Atom) -> i32 {
        self.0
            .binary_search_by(|(x, _)| x.cmp(a))
            .map(|k| self.0[k].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = self.0[i].1 + other.0[j].1;
                    if e != 0 {
                        out.push((self.0[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// Multiply by `a^delta`.
    pub fn shifted(&self, a: &Atom, delta: i32) -> Monomial {
        self.mul(&Monomial::atom(a.clone(), delta))
    }

    fn inverse(&self) -> Option<Monomial> {
        if self.0.iter().all(|(a, _)| a.is_invertible()) {
            Some(Monomial(
                self.0.iter().map(|(a, e)| (a.clone(), -e)).collect(),
            ))
        } else {
            None
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Normal-form commutative expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct ScalarExpr {
    terms: BTreeMap<Monomial, Rational>,
}

impl ScalarExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn int(n: i64) -> Self {
        Self::constant(rat(n))
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { terms }
    }

    pub fn symbol(s: EvenSymbol) -> Self {
        Self::term(Monomial::atom(Atom::Sym(s), 1), Rational::one())
    }

    pub fn atom(f: FuncAtom) -> Self {
        Self::term(Monomial::atom(Atom::Func(f), 1), Rational::one())
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut out = Self::zero();
        for (m, c) in it {
            out.add_term(m, c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &ScalarExpr) -> ScalarExpr {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &ScalarExpr) -> ScalarExpr {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> ScalarExpr {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, k: &Rational) -> ScalarExpr {
        if k.is_zero() {
            return ScalarExpr::zero();
        }
        ScalarExpr {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * k))
                .collect(),
        }
    }

    pub fn mul(&self, other: &ScalarExpr) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn mul_monomial(&self, m: &Monomial) -> ScalarExpr {
        ScalarExpr {
            terms: self
                .terms
                .iter()
                .map(|(m1, c)| (m1.mul(m), c.clone()))
                .collect(),
        }
    }

    /// Multiplicative inverse; defined for nonzero constants times products
    /// of function atoms.
    pub fn inverse(&self) -> Option<ScalarExpr> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        Some(ScalarExpr::term(m.inverse()?, c.recip()))
    }

    pub fn pow(&self, exp: i32) -> Result<ScalarExpr, ScalarError> {
        let base = if exp < 0 {
            self.inverse().ok_or_else(|| {
                ScalarError::Unsupported(format!("negative power of non-invertible `{self}`"))
            })?
        } else {
            self.clone()
        };
        let mut out = ScalarExpr::one();
        for _ in 0..exp.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }

    /// Formal partial derivative with respect to an even symbol.
    pub fn diff(&self, x: &EvenSymbol) -> Result<ScalarExpr, ScalarError> {
        if x.kind() == SymbolKind::Parameter {
            return Err(ScalarError::ParameterDerivative(x.name().to_string()));
        }
        let mut out = ScalarExpr::zero();
        for (m, c) in &self.terms {
            for (a, e) in m.factors() {
                let inner = match a {
                    Atom::Sym(s) if s == x => None,
                    Atom::Sym(_) => continue,
                    Atom::Func(f) if x.kind() == SymbolKind::Coordinate => {
                        Some(Atom::Func(f.differentiated(x.name())))
                    }
                    Atom::Func(_) => continue,
                };
                let mut mono = m.shifted(a, -1);
                if let Some(inner) = inner {
                    mono = mono.shifted(&inner, 1);
                }
                out.add_term(mono, c * rat(*e as i64));
            }
        }
        Ok(out)
    }

    /// True when some factor is the given symbol or a function atom (any
    /// function atom counts when `x` is a coordinate).
    pub fn depends_on(&self, x: &EvenSymbol) -> bool {
        self.terms.keys().any(|m| {
            m.factors().iter().any(|(a, _)| match a {
                Atom::Sym(s) => s == x,
                Atom::Func(_) => x.kind() == SymbolKind::Coordinate,
            })
        })
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.terms.keys().flat_map(|m| m.factors().iter().map(|(a, _)| a))
    }

    /// Simultaneous substitution. Function atoms carrying a derivative
    /// record are replaced by the correspondingly differentiated binding.
    pub fn subst(&self, bindings: &Bindings) -> Result<ScalarExpr, ScalarError> {
        for key in bindings.map.keys() {
            if let Atom::Func(f) = key {
                if f.has_derivatives() {
                    return Err(ScalarError::BindDerivativeAtom(f.to_string()));
                }
            }
        }
        let mut cache: BTreeMap<Atom, Option<ScalarExpr>> = BTreeMap::new();
        let mut out = ScalarExpr::zero();
        for (m, c) in &self.terms {
            let mut acc = ScalarExpr::constant(c.clone());
            for (a, e) in m.factors() {
                if !cache.contains_key(a) {
                    let r = bindings.replacement(a)?;
                    cache.insert(a.clone(), r);
                }
                let factor = match &cache[a] {
                    Some(r) => r.pow(*e).map_err(|_| ScalarError::NotInvertible(atom_text(a)))?,
                    None => ScalarExpr::term(Monomial::atom(a.clone(), *e), Rational::one()),
                };
                acc = acc.mul(&factor);
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    /// Brute-force rewrite of `Σ_k g^{ik} g_{kj}` to `δ^i_j` for a
    /// symmetric two-index atom family `name` over indices `1..=dim`.
    pub fn apply_inverse_rule(&self, name: &str, dim: u32) -> ScalarExpr {
        let mut cur = self.clone();
        'outer: loop {
            let snapshot: Vec<(Monomial, Rational)> =
                cur.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
            for (m, c) in &snapshot {
                for (ua, ue) in m.factors() {
                    let Atom::Func(u) = ua else { continue };
                    if *ue < 1 || u.name() != name || u.upper().len() != 2 || !u.lower().is_empty() || u.has_derivatives() {
                        continue;
                    }
                    for (la, le) in m.factors() {
                        let Atom::Func(l) = la else { continue };
                        if *le < 1 || l.name() != name || l.lower().len() != 2 || !l.upper().is_empty() || l.has_derivatives() {
                            continue;
                        }
                        for pu in 0..2 {
                            let (i, k) = (u.upper()[1 - pu], u.upper()[pu]);
                            for pl in 0..2 {
                                if l.lower()[pl] != k {
                                    continue;
                                }
                                let j = l.lower()[1 - pl];
                                let rest = m.shifted(ua, -1).shifted(la, -1);
                                let family: Vec<Monomial> = (1..=dim)
                                    .map(|kk| {
                                        rest.shifted(&Atom::Func(FuncAtom::symmetric_upper(name, i, kk)), 1)
                                            .shifted(&Atom::Func(FuncAtom::symmetric_lower(name, kk, j)), 1)
                                    })
                                    .collect();
                                if family.iter().all(|fm| cur.terms.get(fm) == Some(c)) {
                                    for fm in family {
                                        cur.terms.remove(&fm);
                                    }
                                    if i == j {
                                        cur.add_term(rest, c.clone());
                                    }
                                    continue 'outer;
                                }
                            }
                        }
                    }
                }
            }
            return cur;
        }
    }
}

/// Substitution map from symbols and underived function atoms to scalars.
#[derive(Clone, Debug, Default)]
pub struct Bindings {
    map: BTreeMap<Atom, ScalarExpr>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(mut self, key: impl Into<Atom>, value: ScalarExpr) -> Self {
        self.map.insert(key.into(), value);
        self
    }

    pub fn insert(&mut self, key: impl Into<Atom>, value: ScalarExpr) {
        self.map.insert(key.into(), value);
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &Atom> {
        self.map.keys()
    }

    fn replacement(&self, a: &Atom) -> Result<Option<ScalarExpr>, ScalarError> {
        match a {
            Atom::Sym(_) => Ok(self.map.get(a).cloned()),
            Atom::Func(f) => {
                let base = Atom::Func(f.underived());
                let Some(r) = self.map.get(&base) else {
                    return Ok(None);
                };
                let mut r = r.clone();
                for (coord, n) in f.deriv() {
                    let x = EvenSymbol::coordinate(coord.clone());
                    for _ in 0..*n {
                        r = r.diff(&x)?;
                    }
                }
                Ok(Some(r))
            }
        }
    }
}

/// Unnormalized scalar expression tree.
#[derive(Clone, Debug)]
pub enum ScalarTree {
    Num(Rational),
    Sym(EvenSymbol),
    Func(FuncAtom),
    Add(Vec<ScalarTree>),
    Mul(Vec<ScalarTree>),
    Neg(Box<ScalarTree>),
    Pow(Box<ScalarTree>, Rational),
}

/// Normalize a raw tree. Exponents must be integers; negative exponents
/// require an invertible base.
pub fn normalize_scalar(tree: &ScalarTree) -> Result<ScalarExpr, ScalarError> {
    Ok(match tree {
        ScalarTree::Num(r) => ScalarExpr::constant(r.clone()),
        ScalarTree::Sym(s) => ScalarExpr::symbol(s.clone()),
        ScalarTree::Func(f) => ScalarExpr::atom(f.clone()),
        ScalarTree::Add(xs) => {
            let mut acc = ScalarExpr::zero();
            for x in xs {
                acc = acc.add(&normalize_scalar(x)?);
            }
            acc
        }
        ScalarTree::Mul(xs) => {
            let mut acc = ScalarExpr::one();
            for x in xs {
                acc = acc.mul(&normalize_scalar(x)?);
            }
            acc
        }
        ScalarTree::Neg(x) => normalize_scalar(x)?.neg(),
        ScalarTree::Pow(base, e) => {
            if !e.is_integer() {
                return Err(ScalarError::Unsupported(format!("non-integer exponent {e}")));
            }
            let e = e
                .to_integer()
                .to_i32()
                .ok_or_else(|| ScalarError::Unsupported(format!("exponent {e} out of range")))?;
            normalize_scalar(base)?.pow(e)?
        }
    })
}

fn atom_text(a: &Atom) -> String {
    match a {
        Atom::Sym(s) => s.name().to_string(),
        Atom::Func(f) => f.to_string(),
    }
}

fn join(ix: &[u32]) -> String {
    ix.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for FuncAtom {
    /// `name[lower]`, `name^[upper]`, wrapped in `d(…, x)` per derivative.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = self.name.to_string();
        if !self.upper.is_empty() {
            s.push_str(&format!("^[{}]", join(&self.upper)));
        }
        if !self.lower.is_empty() || self.upper.is_empty() {
            s.push_str(&format!("[{}]", join(&self.lower)));
        }
        for (x, n) in &self.deriv {
            for _ in 0..*n {
                s = format!("d({s}, {x})");
            }
        }
        f.write_str(&s)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(a, e)| {
                let base = atom_text(a);
                if *e == 1 {
                    base
                } else {
                    format!("{base}^{e}")
                }
            })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

pub(crate) fn fmt_coeff_times(c: &Rational, body: &str, first: bool) -> String {
    let neg = c.is_negative();
    let mag = c.abs();
    let mut s = String::new();
    if first {
        if neg {
            s.push('-');
        }
    } else {
        s.push_str(if neg { " - " } else { " + " });
    }
    if body.is_empty() {
        s.push_str(&mag.to_string());
    } else if mag.is_one() {
        s.push_str(body);
    } else {
        s.push_str(&format!("{mag}*{body}"));
    }
    s
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            f.write_str(&fmt_coeff_times(c, &m.to_string(), k == 0))?;
        }
        Ok(())
    }
}
