//! Exact cluster-size law of site percolation on Z^2 for small clusters.
//!
//! Everything is first reduced to integer perimeter polynomials (how many
//! animals of size `n` have site perimeter `t`) and only then evaluated at
//! an occupation probability, in any [`Scalar`].

mod animals;
mod joint;

use std::collections::BTreeMap;
use std::io;

pub use animals::{AnimalEnumerator, AnimalView, Rooting, DEFAULT_BUDGET};
pub use joint::{
    exact_joint_counts, verify_swap_identity, JointCountPolynomials, JointCountTable, SwapCheck,
};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `Σ_t count(n, t) · p^n (1-p)^t` for each size `n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PerimeterPolynomial {
    /// `by_size[n - 1][t]` = number of animals of size `n` with perimeter `t`.
    by_size: Vec<BTreeMap<usize, u64>>,
}

impl PerimeterPolynomial {
    pub fn n_max(&self) -> usize {
        self.by_size.len()
    }

    pub fn add(&mut self, n: usize, t: usize, count: u64) {
        if self.by_size.len() < n {
            self.by_size.resize(n, BTreeMap::new());
        }
        *self.by_size[n - 1].entry(t).or_insert(0) += count;
    }

    pub fn merge(&mut self, other: &PerimeterPolynomial) {
        for (k, terms) in other.by_size.iter().enumerate() {
            for (&t, &c) in terms {
                self.add(k + 1, t, c);
            }
        }
    }

    pub fn terms(&self, n: usize) -> Option<&BTreeMap<usize, u64>> {
        n.checked_sub(1).and_then(|k| self.by_size.get(k))
    }

    /// Number of animals of size `n`.
    pub fn count(&self, n: usize) -> u64 {
        self.terms(n).map_or(0, |m| m.values().sum())
    }

    pub fn evaluate<T: Scalar>(&self, n: usize, p: &T) -> T {
        eval_terms(self.terms(n).into_iter().flatten(), n, p)
    }
}

pub(crate) fn eval_terms<'a, T: Scalar>(
    terms: impl IntoIterator<Item = (&'a usize, &'a u64)>,
    n: usize,
    p: &T,
) -> T {
    let q = T::one() - p.clone();
    let pn = p.powu(n);
    terms.into_iter().fold(T::zero(), |acc, (&t, &c)| {
        acc + T::from_count(c) * pn.clone() * q.powu(t)
    })
}

/// Perimeter polynomial of the fixed polyominoes (left-endpoint anchored).
pub fn anchored_polynomial(n_max: usize, budget: usize) -> Result<PerimeterPolynomial> {
    let en = AnimalEnumerator::with_budget(n_max, Rooting::LeftEndpointAtOrigin, budget)?;
    let parts = en.fold(PerimeterPolynomial::default, |acc, a| {
        acc.add(a.size(), a.perimeter, 1)
    });
    let mut out = PerimeterPolynomial::default();
    for p in &parts {
        out.merge(p);
    }
    Ok(out)
}

/// Perimeter polynomials of all animals containing the origin, and of those
/// among them whose left-endpoint is the origin.
pub fn rooted_polynomials(
    n_max: usize,
    budget: usize,
) -> Result<(PerimeterPolynomial, PerimeterPolynomial)> {
    let en = AnimalEnumerator::with_budget(n_max, Rooting::ContainsOrigin, budget)?;
    let parts = en.fold(
        || {
            (
                PerimeterPolynomial::default(),
                PerimeterPolynomial::default(),
            )
        },
        |(all, le), a| {
            all.add(a.size(), a.perimeter, 1);
            if a.left_endpoint() == (0, 0) {
                le.add(a.size(), a.perimeter, 1);
            }
        },
    );
    let mut all = PerimeterPolynomial::default();
    let mut le = PerimeterPolynomial::default();
    for (a, l) in &parts {
        all.merge(a);
        le.merge(l);
    }
    Ok((all, le))
}

/// Exact `c_n = P(|C| = n)`, `c*_n = P(|C^le(0)| = n)` and
/// `p_n = P(|C| ≥ n)` for `n ≤ n_max`. Below the percolation threshold `p_n`
/// is also `P(n ≤ |C| < ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactTail<T> {
    pub p: T,
    pub n_max: usize,
    /// Index `n - 1`.
    pub c: Vec<T>,
    pub c_star: Vec<T>,
    pub p_tail: Vec<T>,
}

impl<T: Scalar> ExactTail<T> {
    fn from_parts(p: T, c: Vec<T>, c_star: Vec<T>) -> Self {
        let n_max = c.len();
        let mut p_tail = Vec::with_capacity(n_max);
        let mut acc = p.clone();
        for cn in &c {
            p_tail.push(acc.clone());
            acc = acc - cn.clone();
        }
        Self {
            p,
            n_max,
            c,
            c_star,
            p_tail,
        }
    }

    /// `c*_n` from the anchored enumeration and `c_n = n c*_n`.
    pub fn from_anchored(poly: &PerimeterPolynomial, p: T) -> Self {
        let c_star: Vec<T> = (1..=poly.n_max()).map(|n| poly.evaluate(n, &p)).collect();
        let c = c_star
            .iter()
            .enumerate()
            .map(|(k, cs)| T::from_count(k as u64 + 1) * cs.clone())
            .collect();
        Self::from_parts(p, c, c_star)
    }

    /// `c_n` and `c*_n` each straight from their definitions.
    pub fn from_rooted(all: &PerimeterPolynomial, le: &PerimeterPolynomial, p: T) -> Self {
        let c = (1..=all.n_max()).map(|n| all.evaluate(n, &p)).collect();
        let c_star = (1..=le.n_max()).map(|n| le.evaluate(n, &p)).collect();
        Self::from_parts(p, c, c_star)
    }

    pub fn c(&self, n: usize) -> Result<&T> {
        self.get(&self.c, n)
    }

    pub fn c_star(&self, n: usize) -> Result<&T> {
        self.get(&self.c_star, n)
    }

    pub fn p_tail(&self, n: usize) -> Result<&T> {
        self.get(&self.p_tail, n)
    }

    fn get<'a>(&self, v: &'a [T], n: usize) -> Result<&'a T> {
        n.checked_sub(1)
            .and_then(|k| v.get(k))
            .ok_or_else(|| Error::Degenerate(format!("n = {n} is outside 1..={}", self.n_max)))
    }

    /// `max_n |c_n / (n c*_n) - 1|`.
    pub fn max_identity_error(&self) -> f64 {
        self.c
            .iter()
            .zip(&self.c_star)
            .enumerate()
            .map(|(k, (c, cs))| {
                let rhs = T::from_count(k as u64 + 1) * cs.clone();
                if rhs == T::zero() {
                    return if *c == T::zero() { 0.0 } else { f64::INFINITY };
                }
                ((c.clone() - rhs.clone()) / rhs).abs_value().approx()
            })
            .fold(0.0, f64::max)
    }

    pub fn sizes(&self) -> Vec<usize> {
        (1..=self.n_max).collect()
    }

    /// Columns: `n,c_n,c_star_n,p_n`.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "n,c_n,c_star_n,p_n")?;
        for k in 0..self.n_max {
            writeln!(
                w,
                "{},{:e},{:e},{:e}",
                k + 1,
                self.c[k].approx(),
                self.c_star[k].approx(),
                self.p_tail[k].approx()
            )?;
        }
        Ok(())
    }
}

pub fn exact_tail<T: Scalar>(n_max: usize, p: T) -> Result<ExactTail<T>> {
    Ok(ExactTail::from_anchored(
        &anchored_polynomial(n_max, DEFAULT_BUDGET)?,
        p,
    ))
}

pub fn exact_cn<T: Scalar>(n: usize, p: T) -> Result<T> {
    if n == 0 {
        return Err(Error::Degenerate("cluster sizes start at 1".into()));
    }
    let poly = anchored_polynomial(n, DEFAULT_BUDGET)?;
    Ok(T::from_count(n as u64) * poly.evaluate(n, &p))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupermultiCheck<T> {
    /// `min (c_{n+m}/(n+m)) / ((c_n/n)(c_m/m))` over checked pairs.
    pub a_hat: T,
    pub argmin: (usize, usize),
    pub pairs: usize,
}

/// Best constant in `c_{n+m}/(n+m) ≥ A (c_n/n)(c_m/m)` over `n + m ≤ n_max`.
pub fn verify_supermulti<T: Scalar>(tail: &ExactTail<T>) -> Result<SupermultiCheck<T>> {
    let per_site = |n: usize| -> Result<T> { Ok(tail.c(n)?.clone() / T::from_count(n as u64)) };
    let mut best: Option<(T, (usize, usize))> = None;
    let mut pairs = 0;
    for n in 1..tail.n_max {
        for m in n..=tail.n_max - n {
            let den = per_site(n)? * per_site(m)?;
            if den == T::zero() {
                return Err(Error::ZeroDenominator(format!("c_{n} c_{m} is zero")));
            }
            let ratio = per_site(n + m)? / den;
            pairs += 1;
            if best.as_ref().is_none_or(|(b, _)| ratio < *b) {
                best = Some((ratio, (n, m)));
            }
        }
    }
    let (a_hat, argmin) =
        best.ok_or_else(|| Error::Degenerate("need n_max >= 2 for any pair".into()))?;
    Ok(SupermultiCheck {
        a_hat,
        argmin,
        pairs,
    })
}
