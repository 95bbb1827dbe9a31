//! Gauss–Jordan elimination over even superfunctions.
//!
//! A pivot is usable when it is even and its body is a nonzero constant or a
//! product of function atoms; the nilpotent remainder is inverted by the
//! finite geometric series.

use crate::error::{Error, Result};
use crate::superalg::{GradedExpr, Parity, ParityOf};

/// Inverse of an even superfunction with invertible body.
pub fn invert(p: &GradedExpr) -> Option<GradedExpr> {
    if p.parity() != ParityOf::Homogeneous(Parity::Even) {
        return None;
    }
    let body = p.body();
    let body_inv = body.inverse()?;
    let chart = p.chart();
    let b_inv = GradedExpr::scalar(chart, body_inv);
    // p = b (1 + n), n nilpotent
    let n = &(&b_inv * p) - &GradedExpr::one(chart);
    let mut sum = GradedExpr::one(chart);
    let mut power = GradedExpr::one(chart);
    let neg_n = -&n;
    loop {
        power = &power * &neg_n;
        if power.is_zero() {
            break;
        }
        sum = &sum + &power;
    }
    Some(&sum * &b_inv)
}

/// Solve `A x = b` for square `A` with even entries.
pub fn solve(a: &[Vec<GradedExpr>], b: &[GradedExpr]) -> Result<Vec<GradedExpr>> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) || b.len() != n {
        return Err(Error::Dimension("solve needs a square system".into()));
    }
    if a.iter().flatten().any(|e| !e.is_zero() && e.parity() != ParityOf::Homogeneous(Parity::Even)) {
        return Err(Error::Unsupported("linear solve with odd matrix entries".into()));
    }
    let mut m: Vec<Vec<GradedExpr>> = a.to_vec();
    let mut rhs: Vec<GradedExpr> = b.to_vec();
    for col in 0..n {
        let (row, inv) = (col..n)
            .find_map(|r| invert(&m[r][col]).map(|inv| (r, inv)))
            .ok_or_else(|| Error::Singular(format!("no invertible pivot in column {}", col + 1)))?;
        m.swap(col, row);
        rhs.swap(col, row);
        for k in 0..n {
            m[col][k] = &inv * &m[col][k];
        }
        rhs[col] = &inv * &rhs[col];
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for k in 0..n {
                let delta = &factor * &m[col][k];
                m[r][k] = &m[r][k] - &delta;
            }
            let delta = &factor * &rhs[col];
            rhs[r] = &rhs[r] - &delta;
        }
    }
    Ok(rhs)
}

/// Matrix inverse by solving against unit vectors.
pub fn inverse(a: &[Vec<GradedExpr>]) -> Result<Vec<Vec<GradedExpr>>> {
    let n = a.len();
    let chart = a
        .first()
        .and_then(|r| r.first())
        .map(|e| e.chart().clone())
        .ok_or_else(|| Error::Dimension("empty matrix".into()))?;
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let e: Vec<GradedExpr> = (0..n)
            .map(|i| GradedExpr::int(&chart, (i == k) as i64))
            .collect();
        cols.push(solve(a, &e)?);
    }
    Ok((0..n).map(|i| (0..n).map(|k| cols[k][i].clone()).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalg::SuperChart;

    #[test]
    fn invert_with_nilpotent_part() {
        let c = SuperChart::standard(1, 2);
        let t12 = &GradedExpr::generator(&c, 0) * &GradedExpr::generator(&c, 1);
        let p = &GradedExpr::int(&c, 2) + &t12;
        let q = invert(&p).unwrap();
        assert_eq!(&p * &q, GradedExpr::one(&c));
        assert!(invert(&GradedExpr::generator(&c, 0)).is_none());
    }

    #[test]
    fn unimodular_polynomial_inverse() {
        let c = SuperChart::standard(1, 0);
        let x = GradedExpr::even_coord(&c, 0);
        let one = GradedExpr::one(&c);
        let a = vec![vec![one.clone(), x.clone()], vec![x.clone(), &one + &(&x * &x)]];
        let inv = inverse(&a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s = (0..2).fold(GradedExpr::zero(&c), |acc, k| &acc + &(&a[i][k] * &inv[k][j]));
                assert_eq!(s, GradedExpr::int(&c, (i == j) as i64));
            }
        }
    }

    #[test]
    fn singular_detected() {
        let c = SuperChart::standard(1, 0);
        let x = GradedExpr::even_coord(&c, 0);
        let a = vec![vec![x.clone(), x.clone()], vec![x.clone(), x]];
        assert!(matches!(inverse(&a), Err(Error::Singular(_))));
    }
}
