//! Exact joint law of `|C|`, `N_P` and `N_P'` for cluster-determined pairs.
//!
//! An animal `A` anchored at its left-endpoint stands for the `n`
//! translates `A - s`, `s ∈ A`, all with probability `p^n (1-p)^t`. Seen
//! from `A - s`, the grid `V` is `{x : x - 1 ≡ s mod (r + 2)}`, so the
//! occurrence counts only depend on the residue class of `s`.

use std::collections::BTreeMap;
use std::io;

use super::{eval_terms, AnimalEnumerator, AnimalView, Rooting};
use crate::error::{Error, Result};
use crate::pattern::{box_probability, cluster_contribution, is_cluster_determined, Pattern};
use crate::sampler::ProductMeasureSpec;
use crate::scalar::Scalar;

type Bucket = (usize, usize, usize);

/// `(n, i, j) ↦ {t ↦ count}` where each count already includes the number
/// of translates that land in the bucket.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointCountPolynomials {
    p: Pattern,
    p_prime: Pattern,
    n_max: usize,
    terms: BTreeMap<Bucket, BTreeMap<usize, u64>>,
}

struct Scratch {
    half: i64,
    side: usize,
    grid: Vec<bool>,
    terms: BTreeMap<Bucket, BTreeMap<usize, u64>>,
}

impl Scratch {
    fn slot(&self, a: i64, b: i64) -> Option<usize> {
        let (u, v) = (a + self.half, b + self.half);
        let side = self.side as i64;
        (0..side)
            .contains(&u)
            .then_some(())
            .filter(|_| (0..side).contains(&v))
            .map(|_| (u * side + v) as usize)
    }

    fn has(&self, a: i64, b: i64) -> bool {
        self.slot(a, b).is_some_and(|s| self.grid[s])
    }
}

struct PairShape {
    m: i64,
    ring: Vec<(i64, i64)>,
    cube: Vec<(i64, i64)>,
    values: [Vec<u8>; 2],
}

impl PairShape {
    fn class(&self, a: i64, b: i64) -> usize {
        (a.rem_euclid(self.m) * self.m + b.rem_euclid(self.m)) as usize
    }

    fn visit(&self, acc: &mut Scratch, animal: &AnimalView) {
        let classes = (self.m * self.m) as usize;
        for &(a, b) in animal.sites {
            let s = acc
                .slot(a as i64, b as i64)
                .expect("scratch covers animals");
            acc.grid[s] = true;
        }
        let mut sites = vec![0u64; classes];
        let mut hits = [vec![0usize; classes], vec![0usize; classes]];
        for &(a, b) in animal.sites {
            let (a, b) = (a as i64, b as i64);
            sites[self.class(a, b)] += 1;
            // `a` plays the first ring site; this names each placement once.
            let x = (a - self.ring[0].0, b - self.ring[0].1);
            if !self.ring.iter().all(|&(u, v)| acc.has(x.0 + u, x.1 + v)) {
                continue;
            }
            let occupied: Vec<bool> = self
                .cube
                .iter()
                .map(|&(u, v)| acc.has(x.0 + u, x.1 + v))
                .collect();
            let class = self.class(x.0 - 1, x.1 - 1);
            for (k, values) in self.values.iter().enumerate() {
                if occupied.iter().zip(values).all(|(&o, &v)| o == (v == 1)) {
                    hits[k][class] += 1;
                }
            }
        }
        let n = animal.size();
        for (k, &count) in sites.iter().enumerate() {
            if count > 0 {
                *acc.terms
                    .entry((n, hits[0][k], hits[1][k]))
                    .or_default()
                    .entry(animal.perimeter)
                    .or_insert(0) += count;
            }
        }
        for &(a, b) in animal.sites {
            let s = acc
                .slot(a as i64, b as i64)
                .expect("scratch covers animals");
            acc.grid[s] = false;
        }
    }
}

impl JointCountPolynomials {
    /// Enumerate anchored animals up to `n_max` and bucket them by the
    /// pattern counts of every translate.
    pub fn enumerate(p: &Pattern, p_prime: &Pattern, n_max: usize, budget: usize) -> Result<Self> {
        for pat in [p, p_prime] {
            if pat.d() != 2 || pat.q() != 2 {
                return Err(Error::Unsupported(
                    "exact joint counts need d = 2, q = 2 patterns".into(),
                ));
            }
            if !is_cluster_determined(pat) {
                return Err(Error::InvalidPattern(
                    "pattern is not cluster-determined".into(),
                ));
            }
        }
        if p.r() != p_prime.r() {
            return Err(Error::InvalidPattern("pattern pair must share r".into()));
        }
        let en = AnimalEnumerator::with_budget(n_max, Rooting::LeftEndpointAtOrigin, budget)?;
        let g = p.geometry();
        let pair = |v: &Vec<i64>| (v[0], v[1]);
        let shape = PairShape {
            m: p.r() as i64 + 2,
            ring: g.boundary.iter().map(pair).collect(),
            cube: g.cube.iter().map(pair).collect(),
            values: [p.values().to_vec(), p_prime.values().to_vec()],
        };
        let half = (n_max + p.r() + 2) as i64;
        let side = (2 * half + 1) as usize;
        let parts = en.fold(
            || Scratch {
                half,
                side,
                grid: vec![false; side * side],
                terms: BTreeMap::new(),
            },
            |acc, a| shape.visit(acc, a),
        );
        let mut terms: BTreeMap<Bucket, BTreeMap<usize, u64>> = BTreeMap::new();
        for part in parts {
            for (bucket, poly) in part.terms {
                let dst = terms.entry(bucket).or_default();
                for (t, c) in poly {
                    *dst.entry(t).or_insert(0) += c;
                }
            }
        }
        Ok(Self {
            p: p.clone(),
            p_prime: p_prime.clone(),
            n_max,
            terms,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn patterns(&self) -> (&Pattern, &Pattern) {
        (&self.p, &self.p_prime)
    }

    pub fn table<T: Scalar>(&self, n: usize, p: T) -> Result<JointCountTable<T>> {
        if n == 0 || n > self.n_max {
            return Err(Error::Degenerate(format!(
                "n = {n} is outside 1..={}",
                self.n_max
            )));
        }
        let entries = self
            .terms
            .range((n, 0, 0)..(n + 1, 0, 0))
            .map(|(&(_, i, j), poly)| ((i, j), eval_terms(poly, n, &p)))
            .collect();
        Ok(JointCountTable { n, p, entries })
    }
}

/// `c_n(i, j) = P(|C| = n, N_P = i, N_P' = j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointCountTable<T> {
    pub n: usize,
    pub p: T,
    pub entries: BTreeMap<(usize, usize), T>,
}

impl<T: Scalar> JointCountTable<T> {
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(T::zero)
    }

    pub fn total(&self) -> T {
        self.entries.values().fold(T::zero(), |a, b| a + b.clone())
    }

    /// Columns: `n,i,j,probability`.
    pub fn write_csv<W: io::Write>(&self, mut w: W, header: bool) -> io::Result<()> {
        if header {
            writeln!(w, "n,i,j,probability")?;
        }
        for (&(i, j), v) in &self.entries {
            writeln!(w, "{},{},{},{:e}", self.n, i, j, v.approx())?;
        }
        Ok(())
    }
}

/// One-shot `exact_joint_counts(n, p, P, P')`.
pub fn exact_joint_counts<T: Scalar>(
    n: usize,
    p: T,
    pat: &Pattern,
    pat_prime: &Pattern,
) -> Result<JointCountTable<T>> {
    JointCountPolynomials::enumerate(pat, pat_prime, n, super::DEFAULT_BUDGET)?.table(n, p)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwapCheck {
    pub n: usize,
    /// `max |LHS / RHS - 1|` over populated buckets with `i ≥ 1`.
    pub max_rel_error: f64,
    pub buckets: usize,
    /// Buckets of size `n + 1` with `i ≥ 0, j ≥ 1` reached by no bucket of
    /// size `n`; these carry zero mass when the identity holds.
    pub orphans: usize,
}

/// Check `c_{n+1}(i-1, j+1) = i/(j+1) · □P'/□P · c_n(i, j)` for `i ≥ 1`.
pub fn verify_swap_identity<T: Scalar>(
    polys: &JointCountPolynomials,
    n: usize,
    p: T,
) -> Result<SwapCheck> {
    let (pat, pat_prime) = polys.patterns();
    let delta_c = cluster_contribution(pat_prime) as i64 - cluster_contribution(pat) as i64;
    if delta_c != 1 {
        return Err(Error::InvalidPattern(format!(
            "the swap identity needs c_P' - c_P = 1, got {delta_c}"
        )));
    }
    let measure = ProductMeasureSpec::bernoulli(p.clone())?;
    let box_p = box_probability(pat, &measure)?;
    let box_pp = box_probability(pat_prime, &measure)?;
    if box_p == T::zero() {
        return Err(Error::ZeroDenominator("□P is zero".into()));
    }
    let small = polys.table(n, p.clone())?;
    let big = polys.table(n + 1, p)?;
    let mut worst = 0.0f64;
    let mut buckets = 0;
    for (&(i, j), v) in &small.entries {
        if i == 0 || *v == T::zero() {
            continue;
        }
        let rhs = T::from_count(i as u64) / T::from_count(j as u64 + 1)
            * (box_pp.clone() / box_p.clone())
            * v.clone();
        let lhs = big.get(i - 1, j + 1);
        let err = ((lhs - rhs.clone()) / rhs).abs_value().approx();
        worst = worst.max(err);
        buckets += 1;
    }
    let orphans = big
        .entries
        .keys()
        .filter(|&&(i, j)| j >= 1 && small.get(i + 1, j - 1) == T::zero())
        .count();
    Ok(SwapCheck {
        n,
        max_rel_error: worst,
        buckets,
        orphans,
    })
}
