//! Samplers for product measures and nearest-neighbour Markov fields.
//!
//! Randomness comes from one ChaCha8 stream per replicate derived from a
//! master seed, and each configuration is filled sequentially in raster
//! order, so results never depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{parse_err, Error, Result};
use crate::lattice::{Configuration, Window};
use crate::scalar::Scalar;

const SUM_TOL: f64 = 1e-12;

fn check_distribution(probs: &[f64], what: &str) -> Result<()> {
    if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidMeasure(format!(
            "{what}: probabilities must be finite and non-negative, got {probs:?}"
        )));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidMeasure(format!(
            "{what}: probabilities sum to {sum}, not 1"
        )));
    }
    Ok(())
}

/// I.i.d. site states with the given per-state probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductMeasureSpec<T = f64> {
    probs: Vec<T>,
}

impl<T: Scalar> ProductMeasureSpec<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.len() < 2 || probs.len() > crate::lattice::MAX_STATES as usize {
            return Err(Error::InvalidMeasure(format!(
                "need between 2 and 256 states, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|p| *p < T::zero()) {
            return Err(Error::InvalidMeasure(
                "probabilities must be non-negative".into(),
            ));
        }
        let approx: Vec<f64> = probs.iter().map(Scalar::approx).collect();
        check_distribution(&approx, "product measure")?;
        Ok(Self { probs })
    }

    /// Site percolation: `(1 - p, p)`.
    pub fn bernoulli(p: T) -> Result<Self> {
        Self::new(vec![T::one() - p.clone(), p])
    }

    pub fn q(&self) -> u32 {
        self.probs.len() as u32
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn prob(&self, state: u8) -> &T {
        &self.probs[state as usize]
    }
}

/// Translation and symmetry invariant conditional law of a site given the
/// multiset of its `2d` nearest-neighbour states.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovConditionalSpec {
    q: u32,
    d: usize,
    keys: Vec<Vec<u8>>,
    rows: Vec<Vec<f64>>,
    lookup: Vec<u32>,
}

const LOOKUP_LIMIT: usize = 1 << 22;

/// All count vectors of length `q` summing to `total`, in lexicographic order.
fn count_vectors(q: usize, total: usize) -> Vec<Vec<u8>> {
    fn rec(q: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() + 1 == q {
            cur.push(left as u8);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k as u8);
            rec(q, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(q, total, &mut Vec::new(), &mut out);
    out
}

impl MarkovConditionalSpec {
    /// `rows` pairs a neighbour count vector (one count per state, summing
    /// to `2d`) with the conditional distribution of the centre site.
    pub fn from_rows(q: u32, d: usize, rows: Vec<(Vec<u8>, Vec<f64>)>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidMeasure(format!("d must be >= 2, got {d}")));
        }
        if !(2..=crate::lattice::MAX_STATES).contains(&q) {
            return Err(Error::InvalidMeasure(format!(
                "q must be in [2, 256], got {q}"
            )));
        }
        let base = 2 * d + 1;
        let size = (0..q).try_fold(1usize, |acc, _| {
            acc.checked_mul(base).filter(|&s| s <= LOOKUP_LIMIT)
        });
        let size = size.ok_or_else(|| {
            Error::Unsupported(format!(
                "conditional table for q = {q}, d = {d} is too large"
            ))
        })?;
        let mut lookup = vec![u32::MAX; size];
        let mut keys = Vec::with_capacity(rows.len());
        let mut probs = Vec::with_capacity(rows.len());
        for (key, row) in rows {
            if key.len() != q as usize || key.iter().map(|&c| c as usize).sum::<usize>() != 2 * d {
                return Err(Error::InvalidMeasure(format!(
                    "row key {key:?} must have {q} counts summing to {}",
                    2 * d
                )));
            }
            if row.len() != q as usize {
                return Err(Error::InvalidMeasure(format!(
                    "row for {key:?} has {} entries, expected {q}",
                    row.len()
                )));
            }
            check_distribution(&row, &format!("row {key:?}"))?;
            let slot = Self::slot(&key, base);
            if lookup[slot] != u32::MAX {
                return Err(Error::InvalidMeasure(format!("duplicate row {key:?}")));
            }
            lookup[slot] = keys.len() as u32;
            keys.push(key);
            probs.push(row);
        }
        if let Some(missing) = count_vectors(q as usize, 2 * d)
            .into_iter()
            .find(|k| lookup[Self::slot(k, base)] == u32::MAX)
        {
            return Err(Error::InvalidMeasure(format!(
                "no row for neighbour counts {missing:?}"
            )));
        }
        Ok(Self {
            q,
            d,
            keys,
            rows: probs,
            lookup,
        })
    }

    fn slot(key: &[u8], base: usize) -> usize {
        key.iter().rev().fold(0, |acc, &c| acc * base + c as usize)
    }

    /// Rows built from a function of the neighbour counts.
    pub fn from_fn(q: u32, d: usize, f: impl Fn(&[u8]) -> Vec<f64>) -> Result<Self> {
        let rows = count_vectors(q as usize, 2 * d)
            .into_iter()
            .map(|k| {
                let row = f(&k);
                (k, row)
            })
            .collect();
        Self::from_rows(q, d, rows)
    }

    /// Conditionals that ignore the neighbours.
    pub fn independent(d: usize, probs: &[f64]) -> Result<Self> {
        Self::from_fn(probs.len() as u32, d, |_| probs.to_vec())
    }

    /// Ising heat-bath conditionals with state 0 as spin -1 and state 1 as
    /// spin +1: odds of +1 are `exp(2 beta (h_loc + field))`.
    pub fn ising(d: usize, beta: f64, field: f64) -> Result<Self> {
        Self::from_fn(2, d, |k| {
            let h_loc = k[1] as f64 - k[0] as f64 + field;
            let up = 1.0 / (1.0 + (-2.0 * beta * h_loc).exp());
            vec![1.0 - up, up]
        })
    }

    /// q-state Potts heat-bath: `P(s) ∝ exp(beta · #neighbours in s)`.
    pub fn potts(q: u32, d: usize, beta: f64) -> Result<Self> {
        Self::from_fn(q, d, |k| {
            let w: Vec<f64> = k.iter().map(|&c| (beta * c as f64).exp()).collect();
            let z: f64 = w.iter().sum();
            w.into_iter().map(|x| x / z).collect()
        })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[u8], &[f64])> {
        self.keys
            .iter()
            .map(Vec::as_slice)
            .zip(self.rows.iter().map(Vec::as_slice))
    }

    pub fn conditional(&self, counts: &[u8]) -> &[f64] {
        let slot = Self::slot(counts, 2 * self.d + 1);
        &self.rows[self.lookup[slot] as usize]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Product(ProductMeasureSpec<f64>),
    Markov(MarkovConditionalSpec),
}

impl ModelSpec {
    pub fn q(&self) -> u32 {
        match self {
            ModelSpec::Product(p) => p.q(),
            ModelSpec::Markov(m) => m.q(),
        }
    }

    /// Parse the flat `key=value` model grammar.
    ///
    /// ```text
    /// model=bernoulli          p=0.3
    /// model=product            probs=0.2,0.5,0.3
    /// model=independent        d=2  probs=0.7,0.3
    /// model=ising              d=2  beta=0.1  [field=0]
    /// model=potts              q=3  d=2  beta=0.5
    /// model=markov_table       q=2  d=2  then one line per neighbour multiset:
    /// row=4 0 : 0.9 0.1
    /// ```
    ///
    /// One `key=value` per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: Vec<(usize, String, String)> = Vec::new();
        let mut rows: Vec<(Vec<u8>, Vec<f64>)> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(ln + 1, format!("expected key=value, got {line:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            if k == "row" {
                let (counts, probs) = v
                    .split_once(':')
                    .ok_or_else(|| parse_err(ln + 1, "row needs `counts : probabilities`"))?;
                let counts = counts
                    .split_whitespace()
                    .map(|c| c.parse::<u8>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| parse_err(ln + 1, format!("bad neighbour count: {e}")))?;
                let probs = probs
                    .split_whitespace()
                    .map(|c| c.parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| parse_err(ln + 1, format!("bad probability: {e}")))?;
                rows.push((counts, probs));
            } else {
                if kv.iter().any(|(_, key, _)| key == k) {
                    return Err(parse_err(ln + 1, format!("duplicate key {k:?}")));
                }
                kv.push((ln + 1, k.to_string(), v.to_string()));
            }
        }
        let get = |key: &str| kv.iter().find(|(_, k, _)| k == key);
        let req = |key: &str| -> Result<(usize, &str)> {
            get(key)
                .map(|(l, _, v)| (*l, v.as_str()))
                .ok_or_else(|| parse_err(0, format!("missing key {key:?}")))
        };
        fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            v.parse::<T>()
                .map_err(|e| parse_err(line, format!("{key}: {e}")))
        }
        let list = |key: &str| -> Result<Vec<f64>> {
            let (l, v) = req(key)?;
            v.split(',').map(|x| num::<f64>(l, key, x.trim())).collect()
        };
        let int = |key: &str| -> Result<usize> {
            let (l, v) = req(key)?;
            num(l, key, v)
        };
        let float = |key: &str| -> Result<f64> {
            let (l, v) = req(key)?;
            num(l, key, v)
        };
        let (model_line, model) = req("model")?;
        let allowed: &[&str] = match model {
            "bernoulli" => &["model", "p"],
            "product" => &["model", "probs"],
            "independent" => &["model", "d", "probs"],
            "ising" => &["model", "d", "beta", "field"],
            "potts" => &["model", "q", "d", "beta"],
            "markov_table" => &["model", "q", "d"],
            other => return Err(parse_err(model_line, format!("unknown model {other:?}"))),
        };
        if let Some((l, k, _)) = kv.iter().find(|(_, k, _)| !allowed.contains(&k.as_str())) {
            return Err(parse_err(
                *l,
                format!("key {k:?} is not valid for model {model}"),
            ));
        }
        if model != "markov_table" && !rows.is_empty() {
            return Err(parse_err(0, "rows are only valid for model=markov_table"));
        }
        Ok(match model {
            "bernoulli" => ModelSpec::Product(ProductMeasureSpec::bernoulli(float("p")?)?),
            "product" => ModelSpec::Product(ProductMeasureSpec::new(list("probs")?)?),
            "independent" => ModelSpec::Markov(MarkovConditionalSpec::independent(
                int("d")?,
                &list("probs")?,
            )?),
            "ising" => {
                let field = if get("field").is_some() {
                    float("field")?
                } else {
                    0.0
                };
                ModelSpec::Markov(MarkovConditionalSpec::ising(
                    int("d")?,
                    float("beta")?,
                    field,
                )?)
            }
            "potts" => ModelSpec::Markov(MarkovConditionalSpec::potts(
                int("q")? as u32,
                int("d")?,
                float("beta")?,
            )?),
            _ => ModelSpec::Markov(MarkovConditionalSpec::from_rows(
                int("q")? as u32,
                int("d")?,
                rows,
            )?),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteEnergy {
    /// Smallest conditional probability of any state given any neighbourhood.
    pub h: f64,
    pub has_finite_energy: bool,
}

pub fn finite_energy_h(spec: &ModelSpec) -> FiniteEnergy {
    let h = match spec {
        ModelSpec::Product(p) => p.probs().iter().copied().fold(f64::INFINITY, f64::min),
        ModelSpec::Markov(m) => m
            .rows()
            .flat_map(|(_, r)| r.iter().copied())
            .fold(f64::INFINITY, f64::min),
    };
    FiniteEnergy {
        h,
        has_finite_energy: h > 0.0,
    }
}

/// Seed bookkeeping: replicate `i` always reads stream `i` of the master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngPolicy {
    pub master_seed: u64,
}

impl RngPolicy {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn stream(&self, replicate: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(replicate);
        rng
    }

    /// Run `f` for replicates `0..count` in parallel, results in index order.
    pub fn par_replicates<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
    {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = self.stream(i as u64);
                f(i, &mut rng)
            })
            .collect()
    }
}

pub fn sample_product_with<R: Rng + ?Sized>(
    window: &Window,
    spec: &ProductMeasureSpec<f64>,
    rng: &mut R,
) -> Result<Configuration> {
    let window = if window.q() == spec.q() {
        window.clone()
    } else {
        window.with_q(spec.q())?
    };
    let mut config = Configuration::new(window);
    let states = config.states_mut();
    if spec.q() == 2 {
        let p = spec.probs()[1];
        for s in states.iter_mut() {
            *s = u8::from(rng.gen::<f64>() < p);
        }
    } else {
        let mut cum = Vec::with_capacity(spec.probs().len());
        let mut acc = 0.0;
        for &p in spec.probs() {
            acc += p;
            cum.push(acc);
        }
        let last = spec.probs().iter().rposition(|&p| p > 0.0).unwrap_or(0) as u8;
        for s in states.iter_mut() {
            let u = rng.gen::<f64>();
            *s = cum.iter().position(|&c| u < c).map_or(last, |k| k as u8);
        }
    }
    Ok(config)
}

pub fn sample_product(
    window: &Window,
    spec: &ProductMeasureSpec<f64>,
    seed: u64,
) -> Result<Configuration> {
    sample_product_with(window, spec, &mut RngPolicy::new(seed).stream(0))
}

/// Heat-bath sweeps in raster order, exterior sites fixed at state 0.
pub fn sample_markov_with<R: Rng + ?Sized>(
    spec: &MarkovConditionalSpec,
    init: Configuration,
    sweeps: usize,
    rng: &mut R,
) -> Result<Configuration> {
    let window = init.window().clone();
    if window.dim() != spec.d() {
        return Err(Error::InvalidMeasure(format!(
            "spec is for d = {} but the window has d = {}",
            spec.d(),
            window.dim()
        )));
    }
    if window.q() != spec.q() {
        return Err(Error::InvalidMeasure(format!(
            "spec has q = {} but the configuration has q = {}",
            spec.q(),
            window.q()
        )));
    }
    let mut config = init;
    let d = window.dim();
    let q = spec.q() as usize;
    let strides = window.strides().to_vec();
    let extents: Vec<usize> = (0..d).map(|a| window.extent(a)).collect();
    let mut counts = vec![0u8; q];
    let mut coord = vec![0usize; d];
    for _ in 0..sweeps {
        coord.iter_mut().for_each(|c| *c = 0);
        let states = config.states_mut();
        for idx in 0..states.len() {
            if idx > 0 {
                let mut a = d - 1;
                loop {
                    coord[a] += 1;
                    if coord[a] < extents[a] {
                        break;
                    }
                    coord[a] = 0;
                    a -= 1;
                }
            }
            counts.iter_mut().for_each(|c| *c = 0);
            for a in 0..d {
                let below = if coord[a] > 0 {
                    states[idx - strides[a]]
                } else {
                    0
                };
                let above = if coord[a] + 1 < extents[a] {
                    states[idx + strides[a]]
                } else {
                    0
                };
                counts[below as usize] += 1;
                counts[above as usize] += 1;
            }
            let row = spec.conditional(&counts);
            let u = rng.gen::<f64>();
            let mut acc = 0.0;
            let mut chosen = row.iter().rposition(|&p| p > 0.0).unwrap_or(0);
            for (s, &p) in row.iter().enumerate() {
                acc += p;
                if u < acc {
                    chosen = s;
                    break;
                }
            }
            states[idx] = chosen as u8;
        }
    }
    Ok(config)
}

pub fn sample_markov(
    spec: &MarkovConditionalSpec,
    init: Configuration,
    seed: u64,
    sweeps: usize,
) -> Result<Configuration> {
    sample_markov_with(spec, init, sweeps, &mut RngPolicy::new(seed).stream(0))
}

/// One configuration from either kind of model. Markov fields start from the
/// all-vacant configuration.
pub fn sample_model<R: Rng + ?Sized>(
    window: &Window,
    model: &ModelSpec,
    sweeps: usize,
    rng: &mut R,
) -> Result<Configuration> {
    match model {
        ModelSpec::Product(p) => sample_product_with(window, p, rng),
        ModelSpec::Markov(m) => {
            let init = Configuration::new(window.with_q(m.q())?);
            sample_markov_with(m, init, sweeps, rng)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_bernoulli() {
        let w = Window::cube(2, 20, 2).unwrap();
        let c = sample_product(&w, &ProductMeasureSpec::bernoulli(0.0).unwrap(), 1).unwrap();
        assert_eq!(c.occupied_count(), 0);
        let c = sample_product(&w, &ProductMeasureSpec::bernoulli(1.0).unwrap(), 1).unwrap();
        assert_eq!(c.occupied_count(), 400);
    }

    #[test]
    fn occupied_fraction_within_four_sigma() {
        let w = Window::cube(2, 1000, 2).unwrap();
        let c = sample_product(&w, &ProductMeasureSpec::bernoulli(0.3).unwrap(), 7).unwrap();
        let frac = c.occupied_count() as f64 / 1e6;
        let sigma = (0.3f64 * 0.7 / 1e6).sqrt();
        assert!((frac - 0.3).abs() < 4.0 * sigma, "{frac}");
    }

    #[test]
    fn three_state_product_frequencies() {
        let w = Window::cube(3, 60, 3).unwrap();
        let spec = ProductMeasureSpec::new(vec![0.2, 0.5, 0.3]).unwrap();
        let c = sample_product(&w, &spec, 3).unwrap();
        let n = w.len() as f64;
        for (s, &p) in spec.probs().iter().enumerate() {
            let f = c.count_state(s as u8) as f64 / n;
            assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / n).sqrt());
        }
    }

    #[test]
    fn invalid_measures_rejected() {
        assert!(ProductMeasureSpec::new(vec![0.5, 0.6]).is_err());
        assert!(ProductMeasureSpec::new(vec![1.0]).is_err());
        assert!(ProductMeasureSpec::new(vec![-0.1, 1.1]).is_err());
        assert!(
            MarkovConditionalSpec::from_rows(2, 2, vec![(vec![4, 0], vec![0.5, 0.5])]).is_err()
        );
        assert!(MarkovConditionalSpec::from_fn(2, 2, |_| vec![0.5, 0.4]).is_err());
    }

    #[test]
    fn finite_energy_constants() {
        let h = |p: f64| {
            finite_energy_h(&ModelSpec::Product(
                ProductMeasureSpec::bernoulli(p).unwrap(),
            ))
        };
        assert_eq!(h(0.3).h, 0.3);
        assert_eq!(h(0.5).h, 0.5);
        assert!(h(0.3).has_finite_energy);
        let det = MarkovConditionalSpec::from_fn(2, 2, |k| {
            if k[1] == 4 {
                vec![0.0, 1.0]
            } else {
                vec![0.5, 0.5]
            }
        })
        .unwrap();
        let fe = finite_energy_h(&ModelSpec::Markov(det));
        assert_eq!(fe.h, 0.0);
        assert!(!fe.has_finite_energy);
    }

    #[test]
    fn zero_sweeps_returns_init() {
        let spec = MarkovConditionalSpec::ising(2, 0.3, 0.0).unwrap();
        let w = Window::cube(2, 8, 2).unwrap();
        let mut init = Configuration::new(w);
        init.set(&[3, 3], 1).unwrap();
        assert_eq!(sample_markov(&spec, init.clone(), 9, 0).unwrap(), init);
    }

    #[test]
    fn markov_independence_matches_product() {
        let p = 0.3;
        let w = Window::cube(2, 300, 2).unwrap();
        let ind = MarkovConditionalSpec::independent(2, &[1.0 - p, p]).unwrap();
        let a = sample_markov(&ind, Configuration::new(w.clone()), 11, 3).unwrap();
        let b = sample_product(&w, &ProductMeasureSpec::bernoulli(p).unwrap(), 12).unwrap();
        let n = w.len() as f64;
        let (fa, fb) = (a.occupied_count() as f64 / n, b.occupied_count() as f64 / n);
        let sigma = (2.0 * p * (1.0 - p) / n).sqrt();
        assert!((fa - fb).abs() < 4.0 * sigma, "{fa} vs {fb}");
    }

    #[test]
    fn high_temperature_ising_magnetization_near_zero() {
        let spec = MarkovConditionalSpec::ising(2, 0.1, 0.0).unwrap();
        let w = Window::cube(2, 128, 2).unwrap();
        let policy = RngPolicy::new(2024);
        let mags: Vec<f64> = policy.par_replicates(8, |_, rng| {
            let c = sample_markov_with(&spec, Configuration::new(w.clone()), 500, rng).unwrap();
            2.0 * c.occupied_count() as f64 / w.len() as f64 - 1.0
        });
        let k = mags.len() as f64;
        let mean = mags.iter().sum::<f64>() / k;
        let var = mags.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
        let se = (var / k).sqrt();
        assert!(mean.abs() < 4.0 * se.max(1e-3), "mean {mean}, se {se}");
    }

    #[test]
    fn reproducible_regardless_of_threads() {
        let w = Window::cube(2, 40, 2).unwrap();
        let spec = ModelSpec::Markov(MarkovConditionalSpec::ising(2, 0.3, 0.0).unwrap());
        let policy = RngPolicy::new(5);
        let run = || policy.par_replicates(6, |_, rng| sample_model(&w, &spec, 5, rng).unwrap());
        let many = run();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(run);
        assert_eq!(many, one);
        assert_ne!(many[0], many[1]);
    }

    #[test]
    fn potts_and_three_dimensions() {
        let spec = MarkovConditionalSpec::potts(3, 3, 0.4).unwrap();
        assert_eq!(spec.rows().count(), 28); // multisets of 6 over 3 states
        let c = sample_markov(
            &spec,
            Configuration::new(Window::cube(3, 10, 3).unwrap()),
            1,
            4,
        )
        .unwrap();
        assert!(c.states().iter().all(|&s| s < 3));
    }

    #[test]
    fn parse_model_files() {
        let m = ModelSpec::parse("# percolation\nmodel=bernoulli\np=0.3\n").unwrap();
        assert_eq!(
            m,
            ModelSpec::Product(ProductMeasureSpec::bernoulli(0.3).unwrap())
        );
        let text = "model=markov_table\nq=2\nd=2\n\
            row=4 0 : 0.9 0.1\nrow=3 1 : 0.8 0.2\nrow=2 2 : 0.5 0.5\nrow=1 3 : 0.2 0.8\nrow=0 4 : 0.1 0.9\n";
        match ModelSpec::parse(text).unwrap() {
            ModelSpec::Markov(m) => assert_eq!(m.conditional(&[1, 3]), &[0.2, 0.8]),
            _ => panic!(),
        }
        assert!(ModelSpec::parse("model=ising\nd=2\nbeta=0.1\np=3").is_err());
        assert!(ModelSpec::parse("model=markov_table\nq=2\nd=2\nrow=4 0 : 0.9 0.1\n").is_err());
        let err = ModelSpec::parse("model=bernoulli\np=abc").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
