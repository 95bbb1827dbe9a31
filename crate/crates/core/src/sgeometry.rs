//! Graded metrics on a chart, the odd metric built from a Riemannian `g`,
//! musical isomorphisms, and the sigma-model pullback `σ*Q` with its
//! supertrace and `(1,1)` contraction.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jets::{Field, JetChart};
use crate::linalg;
use crate::superalg::{Coord, GradedDerivation, GradedExpr, Parity, ParityOf, SuperChart};
use crate::symscalar::{FuncAtom, ScalarExpr};

/// Atom family used for `g_{ij}` and `g^{ij}`.
pub const METRIC_ATOM: &str = "g";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricMode {
    /// Entries are formal atoms. With `inverse_rule`, products
    /// `Σ_k g^{ik} g_{kj}` are rewritten to `δ^i_j`.
    Opaque { inverse_rule: bool },
    /// Entries are concrete expressions; inverses are computed.
    Explicit,
}

impl MetricMode {
    pub fn name(self) -> &'static str {
        match self {
            MetricMode::Opaque { .. } => "opaque",
            MetricMode::Explicit => "explicit",
        }
    }
}

/// `g` and `g^{-1}` for a metric of the form `[[0, g], [g, 0]]`.
#[derive(Clone, Debug)]
struct Kappa {
    lower: Vec<Vec<ScalarExpr>>,
    upper: Vec<Vec<ScalarExpr>>,
}

#[derive(Clone, Debug)]
pub struct Supermetric {
    chart: Arc<SuperChart>,
    entries: Vec<Vec<GradedExpr>>,
    parity: Parity,
    mode: MetricMode,
    kappa: Option<Kappa>,
}

fn block_label(c: Coord) -> String {
    match c {
        Coord::Even(i) => format!("x{}", i + 1),
        Coord::Odd(j) => format!("th{}", j + 1),
    }
}

impl Supermetric {
    /// Validate a matrix `G_{αβ} = ⟨∂_α, ∂_β⟩` against graded symmetry,
    /// homogeneity and the block shape of its parity.
    pub fn new(chart: &Arc<SuperChart>, entries: Vec<Vec<GradedExpr>>, parity: Parity, mode: MetricMode) -> Result<Self> {
        let n = chart.coord_count();
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension(format!("metric must be {n}x{n}")));
        }
        for a in chart.coords() {
            for b in chart.coords() {
                let (ka, kb) = (chart.coord_index(a), chart.coord_index(b));
                let e = &entries[ka][kb];
                let sign = Parity::koszul(a.parity(), b.parity());
                if *e != entries[kb][ka].scale_int(sign) {
                    return Err(Error::NotSymmetric(format!("entry ({}, {})", block_label(a), block_label(b))));
                }
                if e.is_zero() {
                    continue;
                }
                let want = parity + a.parity() + b.parity();
                if e.parity() != ParityOf::Homogeneous(want) {
                    return Err(Error::Parity(format!(
                        "entry ({}, {}) should be {want}",
                        block_label(a),
                        block_label(b)
                    )));
                }
                let off_diagonal_block = a.parity() != b.parity();
                if off_diagonal_block != parity.is_odd() {
                    return Err(Error::Parity(format!(
                        "{parity} metric has a nonzero entry in block ({}, {})",
                        block_label(a),
                        block_label(b)
                    )));
                }
            }
        }
        Ok(Self {
            chart: chart.clone(),
            entries,
            parity,
            mode,
            kappa: None,
        })
    }

    /// Odd metric `d x^i ⊗ d θ_j · g_{ij} + d θ_i ⊗ d x^j · g_{ji}` from a
    /// symmetric `g`. In opaque mode `g^{ij}` are the formal inverse atoms;
    /// in explicit mode the inverse is computed.
    pub fn from_g(chart: &Arc<SuperChart>, g: Vec<Vec<ScalarExpr>>, mode: MetricMode) -> Result<Self> {
        let (m, n) = chart.dim();
        if m != n {
            return Err(Error::Dimension(format!("an odd metric needs dimension (n|n), got ({m}|{n})")));
        }
        if g.len() != m || g.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension(format!("g must be {m}x{m}")));
        }
        for i in 0..m {
            for j in 0..i {
                if g[i][j] != g[j][i] {
                    return Err(Error::NotSymmetric(format!("g[{},{}] != g[{},{}]", i + 1, j + 1, j + 1, i + 1)));
                }
            }
        }
        let upper = match mode {
            MetricMode::Opaque { .. } => (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| ScalarExpr::atom(FuncAtom::symmetric_upper(METRIC_ATOM, i as u32 + 1, j as u32 + 1)))
                        .collect()
                })
                .collect(),
            MetricMode::Explicit => {
                let lifted: Vec<Vec<GradedExpr>> = g
                    .iter()
                    .map(|r| r.iter().map(|s| GradedExpr::scalar(chart, s.clone())).collect())
                    .collect();
                linalg::inverse(&lifted)
                    .map_err(|e| Error::NotInvertible(e.to_string()))?
                    .into_iter()
                    .map(|r| {
                        r.into_iter()
                            .map(|e| e.as_scalar().expect("inverse of a scalar matrix is scalar"))
                            .collect()
                    })
                    .collect()
            }
        };
        let size = chart.coord_count();
        let mut entries = vec![vec![GradedExpr::zero(chart); size]; size];
        for i in 0..m {
            for j in 0..m {
                let (xi, tj) = (chart.coord_index(Coord::Even(i)), chart.coord_index(Coord::Odd(j)));
                entries[xi][tj] = GradedExpr::scalar(chart, g[i][j].clone());
                entries[tj][xi] = GradedExpr::scalar(chart, g[i][j].clone());
            }
        }
        let mut out = Self::new(chart, entries, Parity::Odd, mode)?;
        out.kappa = Some(Kappa { lower: g, upper });
        Ok(out)
    }

    /// Odd metric with fully symbolic `g_{ij}` atoms.
    pub fn opaque(chart: &Arc<SuperChart>, inverse_rule: bool) -> Result<Self> {
        let m = chart.dim().0;
        let g = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| ScalarExpr::atom(FuncAtom::symmetric_lower(METRIC_ATOM, i as u32 + 1, j as u32 + 1)))
                    .collect()
            })
            .collect();
        Self::from_g(chart, g, MetricMode::Opaque { inverse_rule })
    }

    /// Odd metric from the identity `g`.
    pub fn flat(chart: &Arc<SuperChart>) -> Result<Self> {
        let m = chart.dim().0;
        let g = (0..m)
            .map(|i| (0..m).map(|j| ScalarExpr::int((i == j) as i64)).collect())
            .collect();
        Self::from_g(chart, g, MetricMode::Explicit)
    }

    /// Even metric `[[g, 0], [0, ω]]`, `g` symmetric and `ω` antisymmetric.
    pub fn even_block(chart: &Arc<SuperChart>, g: Vec<Vec<ScalarExpr>>, omega: Vec<Vec<ScalarExpr>>) -> Result<Self> {
        let (m, n) = chart.dim();
        if g.len() != m || omega.len() != n {
            return Err(Error::Dimension("block sizes must match the chart".into()));
        }
        let size = chart.coord_count();
        let mut entries = vec![vec![GradedExpr::zero(chart); size]; size];
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                entries[i][j] = GradedExpr::scalar(chart, v.clone());
            }
        }
        for (i, row) in omega.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                entries[m + i][m + j] = GradedExpr::scalar(chart, v.clone());
            }
        }
        Self::new(chart, entries, Parity::Even, MetricMode::Explicit)
    }

    /// Canonical odd metric `Q = dt ⊗ dτ + dτ ⊗ dt` on `R^{1|1}`.
    pub fn canonical_q() -> Result<Self> {
        let chart = SuperChart::new(
            vec![crate::symscalar::EvenSymbol::coordinate("t")],
            vec![Arc::from("tau")],
        )?;
        let one = GradedExpr::one(&chart);
        let zero = GradedExpr::zero(&chart);
        Self::new(
            &chart,
            vec![vec![zero.clone(), one.clone()], vec![one, zero]],
            Parity::Odd,
            MetricMode::Explicit,
        )
    }

    pub fn chart(&self) -> &Arc<SuperChart> {
        &self.chart
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn mode(&self) -> MetricMode {
        self.mode
    }

    pub fn entry(&self, a: Coord, b: Coord) -> &GradedExpr {
        &self.entries[self.chart.coord_index(a)][self.chart.coord_index(b)]
    }

    pub fn entries(&self) -> &[Vec<GradedExpr>] {
        &self.entries
    }

    /// True for metrics built by [`Self::from_g`].
    pub fn has_g_form(&self) -> bool {
        self.kappa.is_some()
    }

    fn kappa(&self) -> Result<&Kappa> {
        self.kappa
            .as_ref()
            .ok_or_else(|| Error::Unsupported("operation needs an odd metric built from g".into()))
    }

    /// `g_{ij}`, 0-based.
    pub fn g_lower(&self, i: usize, j: usize) -> Result<ScalarExpr> {
        Ok(self.kappa()?.lower[i][j].clone())
    }

    /// `g^{ij}`, 0-based.
    pub fn g_upper(&self, i: usize, j: usize) -> Result<ScalarExpr> {
        Ok(self.kappa()?.upper[i][j].clone())
    }

    /// `⟨D1, D2; G⟩ = Σ (−1)^{|D2^β||α|} D1^α D2^β G_{αβ}`.
    pub fn eval(&self, d1: &GradedDerivation, d2: &GradedDerivation) -> Result<GradedExpr> {
        if !SuperChart::same(d1.chart(), &self.chart) || !SuperChart::same(d2.chart(), &self.chart) {
            return Err(Error::ChartMismatch);
        }
        let mut out = GradedExpr::zero(&self.chart);
        for (a, v1) in d1.components() {
            if v1.is_zero() {
                continue;
            }
            for (b, v2) in d2.components() {
                let gab = self.entry(a, b);
                if gab.is_zero() {
                    continue;
                }
                for (p, part) in v2.homogeneous_parts() {
                    let term = &(v1 * &part) * gab;
                    out = &out + &term.scale_int(Parity::koszul(p, a.parity()));
                }
            }
        }
        Ok(out)
    }

    /// `G♭(X)`, the one-form `D ↦ ⟨X, D⟩`.
    pub fn flat_of(&self, x: &GradedDerivation) -> Result<OneForm> {
        let comps = self
            .chart
            .coords()
            .map(|b| self.eval(x, &GradedDerivation::coordinate(&self.chart, b)))
            .collect::<Result<Vec<_>>>()?;
        Ok(OneForm {
            chart: self.chart.clone(),
            comps,
        })
    }

    /// `G♯(ω)`: the derivation `X` with `⟨X, ∂_β⟩ = ω(∂_β)` for all `β`.
    pub fn sharp_of(&self, w: &OneForm) -> Result<GradedDerivation> {
        match self.mode {
            MetricMode::Explicit => self.solve_sharp(&w.comps),
            MetricMode::Opaque { inverse_rule: false } => Err(Error::NotInvertible(
                "opaque metric without the inverse rewrite rule".into(),
            )),
            MetricMode::Opaque { inverse_rule: true } => {
                let inv = self.inverse_matrix(&self.chart)?;
                let m = self.chart.dim().0 as u32;
                let comps = self
                    .chart
                    .coords()
                    .map(|a| {
                        let ka = self.chart.coord_index(a);
                        let s = (0..self.chart.coord_count()).fold(GradedExpr::zero(&self.chart), |acc, kb| {
                            &acc + &(&w.comps[kb] * &inv.rows[kb][ka])
                        });
                        s.apply_inverse_rule(METRIC_ATOM, m)
                    })
                    .collect();
                GradedDerivation::from_components(&self.chart, comps)
            }
        }
    }

    /// Solve `Σ_α X^α G_{αβ} = rhs_β` by elimination.
    pub fn solve_sharp(&self, rhs: &[GradedExpr]) -> Result<GradedDerivation> {
        let n = self.chart.coord_count();
        let transposed: Vec<Vec<GradedExpr>> = (0..n)
            .map(|b| (0..n).map(|a| self.entries[a][b].clone()).collect())
            .collect();
        let x = linalg::solve(&transposed, rhs)?;
        GradedDerivation::from_components(&self.chart, x)
    }

    /// `G^{-1}` in the block form `[[0, g^{ij}], [g^{ij}, 0]]` on `target`.
    pub fn inverse_matrix(&self, target: &Arc<SuperChart>) -> Result<SuperMatrix> {
        let k = self.kappa()?;
        let (m, _) = self.chart.dim();
        let size = 2 * m;
        let mut rows = vec![vec![GradedExpr::zero(target); size]; size];
        for i in 0..m {
            for j in 0..m {
                rows[i][m + j] = GradedExpr::scalar(target, k.upper[i][j].clone());
                rows[m + j][i] = GradedExpr::scalar(target, k.upper[i][j].clone());
            }
        }
        SuperMatrix::new(m, m, rows)
    }
}

/// Graded one-form given by its values `ω(∂_β)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneForm {
    chart: Arc<SuperChart>,
    comps: Vec<GradedExpr>,
}

impl OneForm {
    pub fn new(chart: &Arc<SuperChart>, comps: Vec<GradedExpr>) -> Result<Self> {
        if comps.len() != chart.coord_count() {
            return Err(Error::Dimension("one-form needs a value per coordinate".into()));
        }
        Ok(Self {
            chart: chart.clone(),
            comps,
        })
    }

    pub fn component(&self, c: Coord) -> &GradedExpr {
        &self.comps[self.chart.coord_index(c)]
    }
}

impl fmt::Display for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .chart
            .coords()
            .zip(&self.comps)
            .filter(|(_, v)| !v.is_zero())
            .map(|(c, v)| format!("d{}*({v})", self.chart.coord_name(c)))
            .collect();
        f.write_str(&if parts.is_empty() { "0".into() } else { parts.join(" + ") })
    }
}

/// Square supermatrix over an `(m|n)` index set, even indices first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperMatrix {
    m: usize,
    n: usize,
    rows: Vec<Vec<GradedExpr>>,
}

impl SuperMatrix {
    pub fn new(m: usize, n: usize, rows: Vec<Vec<GradedExpr>>) -> Result<Self> {
        let size = m + n;
        if rows.len() != size || rows.iter().any(|r| r.len() != size) {
            return Err(Error::Dimension(format!("supermatrix must be square of size {size}")));
        }
        Ok(Self { m, n, rows })
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn rows(&self) -> &[Vec<GradedExpr>] {
        &self.rows
    }

    pub fn entry(&self, r: usize, c: usize) -> &GradedExpr {
        &self.rows[r][c]
    }

    /// Entry `(α, γ) = Σ_β A_{αβ} B_{βγ}`.
    pub fn product(&self, other: &SuperMatrix) -> Result<SuperMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension("supermatrix shapes differ".into()));
        }
        let size = self.m + self.n;
        let chart = self.rows[0][0].chart().clone();
        let rows = (0..size)
            .map(|a| {
                (0..size)
                    .map(|c| {
                        (0..size).try_fold(GradedExpr::zero(&chart), |acc, b| {
                            Ok::<_, Error>(&acc + &self.rows[a][b].gmul(&other.rows[b][c])?)
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        SuperMatrix::new(self.m, self.n, rows)
    }

    /// `Str A = Σ_i A_{ii} − Σ_j A_{−j,−j}`.
    pub fn supertrace(&self) -> GradedExpr {
        let chart = self.rows[0][0].chart().clone();
        let mut out = GradedExpr::zero(&chart);
        for k in 0..self.m + self.n {
            out = if k < self.m {
                &out + &self.rows[k][k]
            } else {
                &out - &self.rows[k][k]
            };
        }
        out
    }

    /// Sign-free sum of the diagonal.
    pub fn trace(&self) -> GradedExpr {
        let chart = self.rows[0][0].chart().clone();
        (0..self.m + self.n).fold(GradedExpr::zero(&chart), |acc, k| &acc + &self.rows[k][k])
    }
}

/// Supertrace of an arbitrary square matrix given as rows.
pub fn supertrace(m: usize, n: usize, rows: Vec<Vec<GradedExpr>>) -> Result<GradedExpr> {
    Ok(SuperMatrix::new(m, n, rows)?.supertrace())
}

/// Pullback of `Q` along a section, written in first-jet symbols:
/// `(σ*Q)_{αβ} = (−1)^{|α||β|} t_α τ_β + (−1)^{(|α|+1)|β|} τ_α t_β`.
pub fn pullback_sigma_q(jets: &JetChart) -> Result<SuperMatrix> {
    let base = jets.base();
    let (m, n) = base.dim();
    let coords: Vec<Coord> = base.coords().collect();
    let rows = coords
        .iter()
        .map(|&a| {
            coords
                .iter()
                .map(|&b| {
                    let t_a = jets.jet(Field::T, &[a])?;
                    let tau_b = jets.jet(Field::Tau, &[b])?;
                    let tau_a = jets.jet(Field::Tau, &[a])?;
                    let t_b = jets.jet(Field::T, &[b])?;
                    let first = (&t_a * &tau_b).scale_int(Parity::koszul(a.parity(), b.parity()));
                    let second =
                        (&tau_a * &t_b).scale_int(Parity::koszul(a.parity() + Parity::Odd, b.parity()));
                    Ok(&first + &second)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    SuperMatrix::new(m, n, rows)
}

/// `C^1_1(G^{-1} · B)`: the plain trace of the product.
pub fn contract_11(g_inv: &SuperMatrix, b: &SuperMatrix) -> Result<GradedExpr> {
    Ok(g_inv.product(b)?.trace())
}
