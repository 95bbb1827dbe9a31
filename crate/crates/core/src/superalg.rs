//! Superfunctions on a single split chart `(x^1..x^m | θ_1..θ_n)`.
//!
//! A [`GradedExpr`] is a finite sum `Σ_I c_I(x) θ_I` over strictly increasing
//! odd monomials. Products pick up the Koszul sign of the sorting
//! permutation; odd partials are left derivatives.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::symscalar::{fmt_coeff_times, rat, Atom, Bindings, EvenSymbol, Rational, ScalarExpr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(b: usize) -> Self {
        if b.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> u8 {
        self as u8
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// `(-1)^{|a||b|}` as an integer.
    pub fn koszul(a: Parity, b: Parity) -> i64 {
        if a.is_odd() && b.is_odd() {
            -1
        } else {
            1
        }
    }
}

impl Add for Parity {
    type Output = Parity;
    fn add(self, rhs: Parity) -> Parity {
        Parity::from_bit((self.bit() + rhs.bit()) as usize)
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// Result of [`GradedExpr::parity`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParityOf {
    Homogeneous(Parity),
    Mixed,
}

/// A coordinate of a chart, addressed by position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coord {
    Even(usize),
    Odd(usize),
}

impl Coord {
    pub fn parity(self) -> Parity {
        match self {
            Coord::Even(_) => Parity::Even,
            Coord::Odd(_) => Parity::Odd,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SuperChart {
    even: Vec<EvenSymbol>,
    odd: Vec<Arc<str>>,
}

impl SuperChart {
    pub fn new(even: Vec<EvenSymbol>, odd: Vec<Arc<str>>) -> Result<Arc<Self>> {
        let mut seen = std::collections::BTreeSet::new();
        for name in even.iter().map(|s| s.name()).chain(odd.iter().map(|s| s.as_ref())) {
            if !seen.insert(name.to_string()) {
                return Err(Error::InvalidChart(format!("duplicate name `{name}`")));
            }
        }
        Ok(Arc::new(Self { even, odd }))
    }

    /// `(x1..xm | th1..thn)` with all even symbols of coordinate kind.
    pub fn standard(m: usize, n: usize) -> Arc<Self> {
        let even = (1..=m).map(|i| EvenSymbol::coordinate(format!("x{i}"))).collect();
        let odd = (1..=n).map(|j| Arc::from(format!("th{j}"))).collect();
        Self::new(even, odd).expect("standard names are distinct")
    }

    pub fn even(&self) -> &[EvenSymbol] {
        &self.even
    }

    pub fn odd(&self) -> &[Arc<str>] {
        &self.odd
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.even.len(), self.odd.len())
    }

    /// All coordinates, even ones first.
    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.even.len())
            .map(Coord::Even)
            .chain((0..self.odd.len()).map(Coord::Odd))
    }

    pub fn coord_count(&self) -> usize {
        self.even.len() + self.odd.len()
    }

    /// Position of a coordinate in [`Self::coords`] order.
    pub fn coord_index(&self, c: Coord) -> usize {
        match c {
            Coord::Even(i) => i,
            Coord::Odd(j) => self.even.len() + j,
        }
    }

    pub fn coord_at(&self, k: usize) -> Coord {
        if k < self.even.len() {
            Coord::Even(k)
        } else {
            Coord::Odd(k - self.even.len())
        }
    }

    pub fn lookup(&self, name: &str) -> Option<Coord> {
        if let Some(i) = self.even.iter().position(|s| s.name() == name) {
            return Some(Coord::Even(i));
        }
        self.odd.iter().position(|s| s.as_ref() == name).map(Coord::Odd)
    }

    pub fn coord_name(&self, c: Coord) -> &str {
        match c {
            Coord::Even(i) => self.even[i].name(),
            Coord::Odd(j) => &self.odd[j],
        }
    }

    pub fn even_symbol(&self, i: usize) -> &EvenSymbol {
        &self.even[i]
    }

    pub(crate) fn same(a: &Arc<Self>, b: &Arc<Self>) -> bool {
        Arc::ptr_eq(a, b) || **a == **b
    }
}

/// Strictly increasing list of odd generator positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct OddMonomial(Vec<u16>);

impl OddMonomial {
    pub fn unit() -> Self {
        Self(Vec::new())
    }

    pub fn generator(j: usize) -> Self {
        Self(vec![j as u16])
    }

    /// Sort an arbitrary product of generators. Returns the permutation sign,
    /// or `None` when a generator repeats.
    pub fn from_product(gens: &[usize]) -> Option<(i64, OddMonomial)> {
        let mut v: Vec<u16> = gens.iter().map(|&g| g as u16).collect();
        let mut sign = 1;
        // insertion sort counting transpositions
        for i in 1..v.len() {
            let mut k = i;
            while k > 0 && v[k - 1] > v[k] {
                v.swap(k - 1, k);
                sign = -sign;
                k -= 1;
            }
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some((sign, OddMonomial(v)))
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&i| i as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parity(&self) -> Parity {
        Parity::from_bit(self.0.len())
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.contains(&(j as u16))
    }

    pub fn mul(&self, other: &OddMonomial) -> Option<(i64, OddMonomial)> {
        // merge, counting inversions: each element of `other` passes the
        // remaining larger elements of `self`
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        let mut swaps = 0usize;
        while i < a.len() && j < b.len() {
            if a[i] == b[j] {
                return None;
            }
            if a[i] < b[j] {
                out.push(a[i]);
                i += 1;
            } else {
                swaps += a.len() - i;
                out.push(b[j]);
                j += 1;
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Some((if swaps.is_multiple_of(2) { 1 } else { -1 }, OddMonomial(out)))
    }

    /// Left derivative: `(sign, monomial without j)`.
    pub fn left_derivative(&self, j: usize) -> Option<(i64, OddMonomial)> {
        let p = self.0.iter().position(|&g| g as usize == j)?;
        let mut rest = self.0.clone();
        rest.remove(p);
        Some((if p % 2 == 0 { 1 } else { -1 }, OddMonomial(rest)))
    }
}

impl Ord for OddMonomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for OddMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Superfunction on a chart, in normal form.
#[derive(Clone, Debug)]
pub struct GradedExpr {
    chart: Arc<SuperChart>,
    terms: BTreeMap<OddMonomial, ScalarExpr>,
}

impl PartialEq for GradedExpr {
    fn eq(&self, other: &Self) -> bool {
        SuperChart::same(&self.chart, &other.chart) && self.terms == other.terms
    }
}

impl Eq for GradedExpr {}

impl GradedExpr {
    pub fn zero(chart: &Arc<SuperChart>) -> Self {
        Self {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(chart: &Arc<SuperChart>, s: ScalarExpr) -> Self {
        Self::term(chart, OddMonomial::unit(), s)
    }

    pub fn constant(chart: &Arc<SuperChart>, c: Rational) -> Self {
        Self::scalar(chart, ScalarExpr::constant(c))
    }

    pub fn int(chart: &Arc<SuperChart>, n: i64) -> Self {
        Self::constant(chart, rat(n))
    }

    pub fn one(chart: &Arc<SuperChart>) -> Self {
        Self::int(chart, 1)
    }

    pub fn term(chart: &Arc<SuperChart>, m: OddMonomial, s: ScalarExpr) -> Self {
        let mut terms = BTreeMap::new();
        if !s.is_zero() {
            terms.insert(m, s);
        }
        Self {
            chart: chart.clone(),
            terms,
        }
    }

    /// The odd generator `θ_j` (0-based position).
    pub fn generator(chart: &Arc<SuperChart>, j: usize) -> Self {
        Self::term(chart, OddMonomial::generator(j), ScalarExpr::one())
    }

    /// The even chart symbol at position `i`.
    pub fn even_coord(chart: &Arc<SuperChart>, i: usize) -> Self {
        Self::scalar(chart, ScalarExpr::symbol(chart.even_symbol(i).clone()))
    }

    pub fn coord(chart: &Arc<SuperChart>, c: Coord) -> Self {
        match c {
            Coord::Even(i) => Self::even_coord(chart, i),
            Coord::Odd(j) => Self::generator(chart, j),
        }
    }

    pub fn from_terms(chart: &Arc<SuperChart>, it: impl IntoIterator<Item = (OddMonomial, ScalarExpr)>) -> Self {
        let mut out = Self::zero(chart);
        for (m, s) in it {
            out.add_term(m, s);
        }
        out
    }

    pub fn chart(&self) -> &Arc<SuperChart> {
        &self.chart
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OddMonomial, &ScalarExpr)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &OddMonomial) -> ScalarExpr {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The θ-free part as a scalar.
    pub fn body(&self) -> ScalarExpr {
        self.coefficient(&OddMonomial::unit())
    }

    pub fn as_scalar(&self) -> Option<ScalarExpr> {
        self.terms.keys().all(|m| m.is_empty()).then(|| self.body())
    }

    /// Number of scalar terms after flattening.
    pub fn size(&self) -> usize {
        self.terms.values().map(|s| s.len()).sum()
    }

    fn add_term(&mut self, m: OddMonomial, s: ScalarExpr) {
        if s.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&m) {
            Some(prev) => prev.add(&s),
            None => s,
        };
        if !sum.is_zero() {
            self.terms.insert(m, sum);
        }
    }

    fn check_chart(&self, other: &GradedExpr) -> Result<()> {
        if SuperChart::same(&self.chart, &other.chart) {
            Ok(())
        } else {
            Err(Error::ChartMismatch)
        }
    }

    pub fn try_add(&self, other: &GradedExpr) -> Result<GradedExpr> {
        self.check_chart(other)?;
        let mut out = self.clone();
        for (m, s) in &other.terms {
            out.add_term(m.clone(), s.clone());
        }
        Ok(out)
    }

    /// Supercommutative product with Koszul signs.
    pub fn gmul(&self, other: &GradedExpr) -> Result<GradedExpr> {
        self.check_chart(other)?;
        let mut out = GradedExpr::zero(&self.chart);
        for (m1, s1) in &self.terms {
            for (m2, s2) in &other.terms {
                if let Some((sign, m)) = m1.mul(m2) {
                    out.add_term(m, s1.mul(s2).scale(&rat(sign)));
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, k: &Rational) -> GradedExpr {
        GradedExpr::from_terms(&self.chart, self.terms.iter().map(|(m, s)| (m.clone(), s.scale(k))))
    }

    pub fn scale_int(&self, k: i64) -> GradedExpr {
        self.scale(&rat(k))
    }

    pub fn mul_scalar(&self, k: &ScalarExpr) -> GradedExpr {
        GradedExpr::from_terms(&self.chart, self.terms.iter().map(|(m, s)| (m.clone(), s.mul(k))))
    }

    pub fn parity(&self) -> ParityOf {
        let mut ps = self.terms.keys().map(|m| m.parity());
        match ps.next() {
            None => ParityOf::Homogeneous(Parity::Even),
            Some(p) => {
                if ps.all(|q| q == p) {
                    ParityOf::Homogeneous(p)
                } else {
                    ParityOf::Mixed
                }
            }
        }
    }

    pub fn part(&self, p: Parity) -> GradedExpr {
        GradedExpr {
            chart: self.chart.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.parity() == p)
                .map(|(m, s)| (m.clone(), s.clone()))
                .collect(),
        }
    }

    /// Nonzero homogeneous components, even first.
    pub fn homogeneous_parts(&self) -> Vec<(Parity, GradedExpr)> {
        [Parity::Even, Parity::Odd]
            .into_iter()
            .map(|p| (p, self.part(p)))
            .filter(|(_, e)| !e.is_zero())
            .collect()
    }

    pub fn map_coefficients(
        &self,
        mut f: impl FnMut(&ScalarExpr) -> std::result::Result<ScalarExpr, crate::symscalar::ScalarError>,
    ) -> Result<GradedExpr> {
        let mut out = GradedExpr::zero(&self.chart);
        for (m, s) in &self.terms {
            out.add_term(m.clone(), f(s)?);
        }
        Ok(out)
    }

    /// Coefficient-wise `∂/∂x` for an even chart symbol.
    pub fn partial_even(&self, i: usize) -> Result<GradedExpr> {
        let x = self
            .chart
            .even
            .get(i)
            .ok_or_else(|| Error::UnknownCoordinate(format!("even #{i}")))?
            .clone();
        self.map_coefficients(|s| s.diff(&x))
    }

    /// Left derivative `∂/∂θ_j`.
    pub fn partial_odd(&self, j: usize) -> Result<GradedExpr> {
        if j >= self.chart.odd.len() {
            return Err(Error::UnknownCoordinate(format!("odd #{j}")));
        }
        let mut out = GradedExpr::zero(&self.chart);
        for (m, s) in &self.terms {
            if let Some((sign, rest)) = m.left_derivative(j) {
                out.add_term(rest, s.scale(&rat(sign)));
            }
        }
        Ok(out)
    }

    pub fn partial(&self, c: Coord) -> Result<GradedExpr> {
        match c {
            Coord::Even(i) => self.partial_even(i),
            Coord::Odd(j) => self.partial_odd(j),
        }
    }

    pub fn partial_by_name(&self, name: &str) -> Result<GradedExpr> {
        let c = self
            .chart
            .lookup(name)
            .ok_or_else(|| Error::UnknownCoordinate(name.to_string()))?;
        self.partial(c)
    }

    /// Coefficient-wise scalar substitution; odd generators cannot be bound.
    pub fn substitute(&self, bindings: &Bindings) -> Result<GradedExpr> {
        for key in bindings.keys() {
            if let Atom::Sym(s) = key {
                if self.chart.odd.iter().any(|o| o.as_ref() == s.name()) {
                    return Err(Error::OddBinding(s.name().to_string()));
                }
            }
        }
        self.map_coefficients(|s| s.subst(bindings))
    }

    /// Apply the inverse-metric rewrite to every coefficient.
    pub fn apply_inverse_rule(&self, name: &str, dim: u32) -> GradedExpr {
        GradedExpr::from_terms(
            &self.chart,
            self.terms.iter().map(|(m, s)| (m.clone(), s.apply_inverse_rule(name, dim))),
        )
    }

    /// Move to another chart that contains every symbol used here, by name.
    pub fn transplant(&self, target: &Arc<SuperChart>) -> Result<GradedExpr> {
        let map = self
            .chart
            .odd
            .iter()
            .map(|name| match target.lookup(name) {
                Some(Coord::Odd(j)) => Ok(j),
                _ => Err(Error::UnknownCoordinate(name.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = GradedExpr::zero(target);
        for (m, s) in &self.terms {
            let gens: Vec<usize> = m.indices().map(|j| map[j]).collect();
            if let Some((sign, mono)) = OddMonomial::from_product(&gens) {
                out.add_term(mono, s.scale(&rat(sign)));
            }
        }
        Ok(out)
    }

    /// Superalgebra homomorphism into `target`: even symbols found in
    /// `even_map` and every odd generator are replaced; all other scalar
    /// atoms are kept. Images in `even_map` must be even and images of
    /// generators odd.
    pub fn map_coordinates(
        &self,
        target: &Arc<SuperChart>,
        even_map: &BTreeMap<EvenSymbol, GradedExpr>,
        odd_map: &[GradedExpr],
    ) -> Result<GradedExpr> {
        if odd_map.len() != self.chart.odd.len() {
            return Err(Error::Dimension("odd map must cover every generator".into()));
        }
        for (k, v) in even_map {
            if matches!(v.parity(), ParityOf::Homogeneous(Parity::Odd) | ParityOf::Mixed) && !v.is_zero() {
                return Err(Error::Parity(format!("image of even `{}` is not even", k.name())));
            }
        }
        for (j, v) in odd_map.iter().enumerate() {
            if !v.is_zero() && v.parity() != ParityOf::Homogeneous(Parity::Odd) {
                return Err(Error::Parity(format!("image of `{}` is not odd", self.chart.odd[j])));
            }
        }
        let mut out = GradedExpr::zero(target);
        for (m, s) in &self.terms {
            let mut body = GradedExpr::zero(target);
            for (mono, c) in s.terms() {
                let mut acc = GradedExpr::constant(target, c.clone());
                let mut kept = crate::symscalar::Monomial::one();
                for (a, e) in mono.factors() {
                    match a {
                        Atom::Sym(sym) if even_map.contains_key(sym) => {
                            if *e < 0 {
                                return Err(Error::Unsupported(format!("negative power of `{}`", sym.name())));
                            }
                            for _ in 0..*e {
                                acc = &acc * &even_map[sym];
                            }
                        }
                        _ => kept = kept.shifted(a, *e),
                    }
                }
                body = &body + &acc.mul_scalar(&ScalarExpr::term(kept, Rational::from_integer(1.into())));
            }
            let mut odd_part = GradedExpr::one(target);
            for j in m.indices() {
                odd_part = &odd_part * &odd_map[j];
            }
            out = &out + &(&body * &odd_part);
        }
        Ok(out)
    }
}

impl Add for &GradedExpr {
    type Output = GradedExpr;
    fn add(self, rhs: &GradedExpr) -> GradedExpr {
        self.try_add(rhs).expect("chart mismatch in GradedExpr addition")
    }
}

impl Sub for &GradedExpr {
    type Output = GradedExpr;
    fn sub(self, rhs: &GradedExpr) -> GradedExpr {
        self.try_add(&-rhs).expect("chart mismatch in GradedExpr subtraction")
    }
}

impl Neg for &GradedExpr {
    type Output = GradedExpr;
    fn neg(self) -> GradedExpr {
        self.scale_int(-1)
    }
}

impl Mul for &GradedExpr {
    type Output = GradedExpr;
    fn mul(self, rhs: &GradedExpr) -> GradedExpr {
        self.gmul(rhs).expect("chart mismatch in GradedExpr product")
    }
}

impl fmt::Display for GradedExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, s) in &self.terms {
            let gens: Vec<&str> = m.indices().map(|j| self.chart.odd[j].as_ref()).collect();
            for (sm, c) in s.terms() {
                let mut parts = Vec::new();
                if !sm.is_one() {
                    parts.push(sm.to_string());
                }
                parts.extend(gens.iter().map(|g| g.to_string()));
                f.write_str(&fmt_coeff_times(c, &parts.join("*"), first))?;
                first = false;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// `D = Σ_α D^α ∂/∂x^α`, coefficients to the left, indexed in
/// [`SuperChart::coords`] order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedDerivation {
    chart: Arc<SuperChart>,
    comps: Vec<GradedExpr>,
}

impl GradedDerivation {
    pub fn zero(chart: &Arc<SuperChart>) -> Self {
        Self {
            chart: chart.clone(),
            comps: vec![GradedExpr::zero(chart); chart.coord_count()],
        }
    }

    /// The coordinate field `∂/∂x^α`.
    pub fn coordinate(chart: &Arc<SuperChart>, c: Coord) -> Self {
        let mut d = Self::zero(chart);
        d.comps[chart.coord_index(c)] = GradedExpr::one(chart);
        d
    }

    pub fn from_components(chart: &Arc<SuperChart>, comps: Vec<GradedExpr>) -> Result<Self> {
        if comps.len() != chart.coord_count() {
            return Err(Error::Dimension(format!(
                "expected {} components, got {}",
                chart.coord_count(),
                comps.len()
            )));
        }
        if comps.iter().any(|c| !SuperChart::same(c.chart(), chart)) {
            return Err(Error::ChartMismatch);
        }
        Ok(Self {
            chart: chart.clone(),
            comps,
        })
    }

    pub fn chart(&self) -> &Arc<SuperChart> {
        &self.chart
    }

    pub fn component(&self, c: Coord) -> &GradedExpr {
        &self.comps[self.chart.coord_index(c)]
    }

    pub fn set_component(&mut self, c: Coord, v: GradedExpr) {
        let k = self.chart.coord_index(c);
        self.comps[k] = v;
    }

    pub fn components(&self) -> impl Iterator<Item = (Coord, &GradedExpr)> {
        self.chart.coords().zip(self.comps.iter())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// `a · D`, multiplying every coefficient on the left.
    pub fn left_mul(&self, a: &GradedExpr) -> Result<Self> {
        let comps = self.comps.iter().map(|c| a.gmul(c)).collect::<Result<Vec<_>>>()?;
        Self::from_components(&self.chart, comps)
    }

    pub fn add(&self, other: &GradedDerivation) -> Result<Self> {
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.try_add(b))
            .collect::<Result<Vec<_>>>()?;
        Self::from_components(&self.chart, comps)
    }

    /// Parity of `D`: component `D^α` must have parity `|D| + |α|`.
    pub fn parity(&self) -> ParityOf {
        let mut found: Option<Parity> = None;
        for (c, v) in self.components() {
            for (p, _) in v.homogeneous_parts() {
                let dp = p + c.parity();
                match found {
                    None => found = Some(dp),
                    Some(q) if q != dp => return ParityOf::Mixed,
                    _ => {}
                }
            }
        }
        ParityOf::Homogeneous(found.unwrap_or(Parity::Even))
    }

    /// Split into homogeneous derivations, even first; zero parts omitted.
    pub fn homogeneous_parts(&self) -> Vec<(Parity, GradedDerivation)> {
        [Parity::Even, Parity::Odd]
            .into_iter()
            .filter_map(|p| {
                let comps: Vec<GradedExpr> = self
                    .components()
                    .map(|(c, v)| v.part(p + c.parity()))
                    .collect();
                let d = GradedDerivation {
                    chart: self.chart.clone(),
                    comps,
                };
                (!d.is_zero()).then_some((p, d))
            })
            .collect()
    }

    /// `D(a) = Σ_α D^α · ∂_α a`.
    pub fn apply(&self, a: &GradedExpr) -> Result<GradedExpr> {
        if !SuperChart::same(&self.chart, a.chart()) {
            return Err(Error::ChartMismatch);
        }
        let mut out = GradedExpr::zero(&self.chart);
        for (c, v) in self.components() {
            if v.is_zero() {
                continue;
            }
            out = &out + &v.gmul(&a.partial(c)?)?;
        }
        Ok(out)
    }

    pub fn map_components(&self, mut f: impl FnMut(&GradedExpr) -> GradedExpr) -> Self {
        Self {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(&mut f).collect(),
        }
    }
}

impl fmt::Display for GradedDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components()
            .filter(|(_, v)| !v.is_zero())
            .map(|(c, v)| format!("({v})*d/d{}", self.chart.coord_name(c)))
            .collect();
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symscalar::FuncAtom;

    fn chart() -> Arc<SuperChart> {
        SuperChart::standard(2, 3)
    }

    fn th(c: &Arc<SuperChart>, j: usize) -> GradedExpr {
        GradedExpr::generator(c, j)
    }

    fn x(c: &Arc<SuperChart>, i: usize) -> GradedExpr {
        GradedExpr::even_coord(c, i)
    }

    #[test]
    fn product_signs() {
        let c = chart();
        let t12 = &th(&c, 0) * &th(&c, 1);
        assert_eq!(t12.terms().count(), 1);
        assert_eq!(&th(&c, 1) * &th(&c, 0), -&t12);
        assert!((&th(&c, 0) * &th(&c, 0)).is_zero());
    }

    #[test]
    fn parity_examples() {
        let c = chart();
        assert_eq!((&th(&c, 0) * &th(&c, 1)).parity(), ParityOf::Homogeneous(Parity::Even));
        assert_eq!((&x(&c, 0) * &th(&c, 0)).parity(), ParityOf::Homogeneous(Parity::Odd));
        assert_eq!((&GradedExpr::one(&c) + &th(&c, 0)).parity(), ParityOf::Mixed);
    }

    #[test]
    fn even_partials() {
        let c = chart();
        assert_eq!((&x(&c, 0) * &th(&c, 0)).partial_even(0).unwrap(), th(&c, 0));
        assert!((&th(&c, 0) * &th(&c, 1)).partial_even(0).unwrap().is_zero());
        let g = GradedExpr::scalar(&c, ScalarExpr::atom(FuncAtom::symmetric_lower("g", 1, 1)));
        let dg = GradedExpr::scalar(
            &c,
            ScalarExpr::atom(FuncAtom::symmetric_lower("g", 1, 1).differentiated("x1")),
        );
        assert_eq!((&g * &th(&c, 0)).partial_even(0).unwrap(), &dg * &th(&c, 0));
    }

    #[test]
    fn odd_partials_left_convention() {
        let c = chart();
        assert_eq!(th(&c, 0).partial_odd(0).unwrap(), GradedExpr::one(&c));
        let t12 = &th(&c, 0) * &th(&c, 1);
        assert_eq!(t12.partial_odd(1).unwrap(), -&th(&c, 0));
        assert_eq!(t12.partial_odd(0).unwrap(), th(&c, 1));
    }

    #[test]
    fn unknown_coordinate() {
        let c = chart();
        assert!(matches!(th(&c, 0).partial_odd(7), Err(Error::UnknownCoordinate(_))));
        assert!(matches!(th(&c, 0).partial_by_name("y9"), Err(Error::UnknownCoordinate(_))));
    }

    #[test]
    fn chart_mismatch() {
        let a = GradedExpr::one(&SuperChart::standard(1, 1));
        let b = GradedExpr::one(&SuperChart::standard(2, 1));
        assert_eq!(a.gmul(&b), Err(Error::ChartMismatch));
    }

    #[test]
    fn derivation_examples() {
        let c = SuperChart::standard(1, 1);
        let dx = GradedDerivation::coordinate(&c, Coord::Even(0));
        let x1t1 = &x(&c, 0) * &th(&c, 0);
        assert_eq!(dx.apply(&x1t1).unwrap(), th(&c, 0));
        let euler = GradedDerivation::coordinate(&c, Coord::Odd(0)).left_mul(&th(&c, 0)).unwrap();
        assert_eq!(euler.apply(&th(&c, 0)).unwrap(), th(&c, 0));
        assert_eq!(euler.parity(), ParityOf::Homogeneous(Parity::Even));
    }

    #[test]
    fn substitute_rules() {
        let c = SuperChart::standard(1, 1);
        let g = FuncAtom::symmetric_lower("g", 1, 1);
        let e = &GradedExpr::scalar(&c, ScalarExpr::atom(g.clone())) * &th(&c, 0);
        let b = Bindings::new().bind(g, ScalarExpr::one());
        assert_eq!(e.substitute(&b).unwrap(), th(&c, 0));
        assert_eq!(e.substitute(&Bindings::new()).unwrap(), e);
        let bad = Bindings::new().bind(EvenSymbol::coordinate("th1"), ScalarExpr::one());
        assert!(matches!(e.substitute(&bad), Err(Error::OddBinding(_))));
    }

    #[test]
    fn from_product_sign() {
        assert_eq!(OddMonomial::from_product(&[2, 0, 1]).unwrap().0, 1);
        assert_eq!(OddMonomial::from_product(&[1, 0]).unwrap().0, -1);
        assert!(OddMonomial::from_product(&[1, 1]).is_none());
    }
}
