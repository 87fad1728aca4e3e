//! Tail constants, conditional pattern statistics and ratio-limit reports.

use std::io;

use serde::{Deserialize, Serialize};

use crate::cluster::SizeCensus;
use crate::error::{Error, Result};
use crate::exact::ExactTail;
use crate::pattern::ClusterPatternCounts;
use crate::scalar::{Real, Scalar};

fn check_tail<T: Real>(tail: &[(usize, T)]) -> Result<()> {
    if tail.is_empty() {
        return Err(Error::Degenerate("empty tail".into()));
    }
    for w in tail.windows(2) {
        if w[1].0 != w[0].0 + 1 {
            return Err(Error::Degenerate(format!(
                "tail sizes must be consecutive, got {} then {}",
                w[0].0, w[1].0
            )));
        }
    }
    if let Some(&(n, c)) = tail.iter().find(|&&(n, c)| n == 0 || !(c > T::zero())) {
        return Err(Error::Degenerate(format!(
            "need c_n > 0 and n >= 1, got c_{n} = {c:?}"
        )));
    }
    Ok(())
}

/// Two estimator sequences for `μ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MuEstimates<T> {
    pub n: Vec<usize>,
    /// `c_n^{1/n}`.
    pub root: Vec<T>,
    /// `c_{n+1} / c_n`, one shorter than `root`.
    pub ratio: Vec<T>,
    pub last_root: T,
    pub last_ratio: Option<T>,
}

pub fn estimate_mu<T: Real>(tail: &[(usize, T)]) -> Result<MuEstimates<T>> {
    check_tail(tail)?;
    let root: Vec<T> = tail
        .iter()
        .map(|&(n, c)| c.powf(T::one() / T::lit(n as f64)))
        .collect();
    let ratio: Vec<T> = tail.windows(2).map(|w| w[1].1 / w[0].1).collect();
    Ok(MuEstimates {
        n: tail.iter().map(|t| t.0).collect(),
        last_root: *root.last().expect("non-empty"),
        last_ratio: ratio.last().copied(),
        root,
        ratio,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StretchedFit<T> {
    pub beta: T,
    pub nu: T,
    pub points: usize,
}

/// Least squares of `log(-log c_n)` on `log n`: the slope is `β` and the
/// intercept `b` gives `ν = exp(-e^b)`.
pub fn fit_stretched<T: Real>(tail: &[(usize, T)]) -> Result<StretchedFit<T>> {
    if tail.len() < 5 {
        return Err(Error::Degenerate(format!(
            "need at least 5 points, got {}",
            tail.len()
        )));
    }
    let mut xs = Vec::with_capacity(tail.len());
    let mut ys = Vec::with_capacity(tail.len());
    for &(n, c) in tail {
        if n == 0 || !(c > T::zero() && c < T::one()) {
            return Err(Error::Degenerate(format!("c_{n} = {c:?} is not in (0, 1)")));
        }
        xs.push(T::lit(n as f64).ln());
        ys.push((-c.ln()).ln());
    }
    let (slope, intercept) = least_squares(&xs, &ys, None)?;
    Ok(StretchedFit {
        beta: slope,
        nu: (-intercept.exp()).exp(),
        points: tail.len(),
    })
}

/// Weighted least squares line `y = slope x + intercept`.
pub(crate) fn least_squares<T: Real>(xs: &[T], ys: &[T], w: Option<&[T]>) -> Result<(T, T)> {
    let weight = |i: usize| w.map_or(T::one(), |w| w[i]);
    let sw = (0..xs.len()).fold(T::zero(), |a, i| a + weight(i));
    let mx = (0..xs.len()).fold(T::zero(), |a, i| a + weight(i) * xs[i]) / sw;
    let my = (0..xs.len()).fold(T::zero(), |a, i| a + weight(i) * ys[i]) / sw;
    let sxx = (0..xs.len()).fold(T::zero(), |a, i| a + weight(i) * (xs[i] - mx).powi(2));
    let sxy = (0..xs.len()).fold(T::zero(), |a, i| {
        a + weight(i) * (xs[i] - mx) * (ys[i] - my)
    });
    if !(sxx > T::zero()) {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSource {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailRow<T> {
    pub n: usize,
    pub c: T,
    pub c_se: Option<T>,
    /// `P(n ≤ |C| < ∞)`.
    pub p_tail: T,
    pub p_tail_se: Option<T>,
    pub mu_root: Option<T>,
    /// `c_{n+1} / c_n`.
    pub c_ratio: Option<T>,
    /// `p_{n+1} / p_n`.
    pub p_ratio: Option<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailReport<T> {
    pub source: TailSource,
    pub rows: Vec<TailRow<T>>,
    /// Largest `n` whose `p_{n+1} / p_n` is statistically usable.
    pub reliable_n: Option<usize>,
    /// `c_N^{1/N}` at `N = reliable_n`.
    pub mu_root: Option<T>,
    /// `p_{k+1}/p_k` averaged geometrically over `k ∈ [N/2, N]`.
    pub mu_ratio: Option<T>,
    pub stretched: Option<StretchedFit<T>>,
}

/// Relative standard error up to which a Monte Carlo tail entry counts as
/// reliable for the ratio route.
pub const RELIABLE_REL_SE: f64 = 0.05;

impl<T: Real + Serialize> TailReport<T> {
    fn build(
        source: TailSource,
        c: Vec<(usize, T, Option<T>)>,
        p_tail: Vec<(T, Option<T>)>,
    ) -> Self {
        let mut rows: Vec<TailRow<T>> = c
            .iter()
            .zip(&p_tail)
            .map(|(&(n, c, c_se), &(pt, pt_se))| TailRow {
                n,
                c,
                c_se,
                p_tail: pt,
                p_tail_se: pt_se,
                mu_root: (c > T::zero()).then(|| c.powf(T::one() / T::lit(n as f64))),
                c_ratio: None,
                p_ratio: None,
            })
            .collect();
        for k in 0..rows.len().saturating_sub(1) {
            let (a, b) = (&rows[k], &rows[k + 1]);
            let c_ratio = (a.c > T::zero()).then(|| b.c / a.c);
            let p_ratio = (a.p_tail > T::zero()).then(|| b.p_tail / a.p_tail);
            rows[k].c_ratio = c_ratio;
            rows[k].p_ratio = p_ratio;
        }
        let usable = |r: &TailRow<T>| {
            r.p_tail > T::zero()
                && r.p_tail_se
                    .is_none_or(|se| se / r.p_tail <= T::lit(RELIABLE_REL_SE))
        };
        let reliable_n = (0..rows.len().saturating_sub(1))
            .take_while(|&k| usable(&rows[k]) && usable(&rows[k + 1]))
            .last()
            .map(|k| rows[k].n);
        let at = |n: usize| rows.iter().find(|r| r.n == n);
        // Geometric mean of p_{k+1}/p_k over the upper half of the reliable
        // range, i.e. (p_{N+1} / p_h)^{1/(N+1-h)}.
        let mu_ratio = reliable_n.and_then(|n| {
            let h = (n / 2).max(rows[0].n);
            let (lo, hi) = (at(h)?, at(n + 1)?);
            let steps = T::lit((n + 1 - h) as f64);
            (lo.p_tail > T::zero()).then(|| (hi.p_tail / lo.p_tail).powf(T::one() / steps))
        });
        let mu_root = reliable_n.and_then(|n| at(n).and_then(|r| r.mu_root));
        let positive: Vec<(usize, T)> = rows
            .iter()
            .take_while(|r| r.c > T::zero())
            .map(|r| (r.n, r.c))
            .collect();
        let stretched = fit_stretched(&positive).ok();
        Self {
            source,
            rows,
            reliable_n,
            mu_root,
            mu_ratio,
            stretched,
        }
    }

    pub fn from_exact<S: Scalar>(tail: &ExactTail<S>) -> Self {
        let c = tail
            .c
            .iter()
            .enumerate()
            .map(|(k, c)| (k + 1, T::lit(c.approx()), None))
            .collect();
        let p = tail
            .p_tail
            .iter()
            .map(|v| (T::lit(v.approx()), None))
            .collect();
        Self::build(TailSource::Exact, c, p)
    }

    /// `ĉ_n = n · count_n / |region|` per configuration, averaged over
    /// configurations with the standard error of the mean. Counting clusters
    /// by left-endpoint estimates `c*_n`; the factor `n` is the size bias.
    pub fn from_censuses(
        censuses: &[SizeCensus],
        region_sites: usize,
        n_max: usize,
    ) -> Result<Self> {
        if censuses.is_empty() || region_sites == 0 || n_max == 0 {
            return Err(Error::Degenerate(
                "need at least one census, a non-empty region and n_max >= 1".into(),
            ));
        }
        let k = censuses.len() as f64;
        let area = region_sites as f64;
        let mut c_rows = Vec::with_capacity(n_max);
        let mut p_rows = Vec::with_capacity(n_max);
        // Per-configuration tails Σ_{m ≥ n} ĉ_m, built from the top down.
        let mut tails: Vec<f64> = censuses
            .iter()
            .map(|c| {
                c.counts
                    .range(n_max + 1..)
                    .map(|(&m, &v)| m as f64 * v as f64 / area)
                    .sum()
            })
            .collect();
        for n in (1..=n_max).rev() {
            let per: Vec<f64> = censuses
                .iter()
                .map(|c| n as f64 * c.count(n) as f64 / area)
                .collect();
            for (t, v) in tails.iter_mut().zip(&per) {
                *t += v;
            }
            let (cm, cse) = mean_se(&per, k);
            let (pm, pse) = mean_se(&tails, k);
            c_rows.push((n, T::lit(cm), Some(T::lit(cse))));
            p_rows.push((T::lit(pm), Some(T::lit(pse))));
        }
        c_rows.reverse();
        p_rows.reverse();
        Ok(Self::build(TailSource::MonteCarlo, c_rows, p_rows))
    }

    pub fn series(&self) -> Vec<(usize, T)> {
        self.rows.iter().map(|r| (r.n, r.c)).collect()
    }

    pub fn p_tail_series(&self) -> Vec<(usize, T)> {
        self.rows.iter().map(|r| (r.n, r.p_tail)).collect()
    }

    /// Columns: `n,c_n,c_n_se,p_n,p_n_se,mu_root,c_ratio,p_ratio`.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        let opt = |v: Option<T>| {
            v.map_or(String::new(), |x| {
                format!("{:e}", x.to_f64().unwrap_or(f64::NAN))
            })
        };
        let f = |v: T| format!("{:e}", v.to_f64().unwrap_or(f64::NAN));
        writeln!(w, "n,c_n,c_n_se,p_n,p_n_se,mu_root,c_ratio,p_ratio")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.n,
                f(r.c),
                opt(r.c_se),
                f(r.p_tail),
                opt(r.p_tail_se),
                opt(r.mu_root),
                opt(r.c_ratio),
                opt(r.p_ratio)
            )?;
        }
        Ok(())
    }
}

fn mean_se(xs: &[f64], k: f64) -> (f64, f64) {
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Pattern counts of one cluster, split into shift classes that each see
/// their own translate of the grid `V`. A class weighs as many translates
/// as it has cluster sites, so weights of one cluster add up to its size.
/// A sample of the origin's cluster is a single class of weight one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternObservation {
    pub size: usize,
    pub classes: Vec<ClassCounts>,
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ClassCounts {
    pub weight: f64,
    pub n_p: u32,
    pub n_p_prime: u32,
}

impl PatternObservation {
    pub fn origin(size: usize, n_p: u32, n_p_prime: u32) -> Self {
        Self {
            size,
            classes: vec![ClassCounts {
                weight: 1.0,
                n_p,
                n_p_prime,
            }],
        }
    }

    /// Uses patterns `0` and `1` of the harvest as `P` and `P'`.
    pub fn from_harvest(h: &ClusterPatternCounts) -> Result<Self> {
        if h.counts.len() < 2 {
            return Err(Error::InvalidPattern(
                "harvest needs counts for two patterns".into(),
            ));
        }
        let classes = h
            .class_sites
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .map(|(k, &s)| ClassCounts {
                weight: s as f64,
                n_p: h.counts[0][k],
                n_p_prime: h.counts[1][k],
            })
            .collect();
        Ok(Self {
            size: h.size,
            classes,
        })
    }

    pub fn total_weight(&self) -> f64 {
        self.classes.iter().map(|c| c.weight).sum()
    }
}

/// Geometric bin edges `lo = e_0 < e_1 < .. < e_k = hi`, rounded to
/// integers; a bin is `[e_i, e_{i+1})` except the last, which includes `hi`.
pub fn geometric_bins(lo: usize, hi: usize, bins: usize) -> Result<Vec<usize>> {
    if lo == 0 || hi <= lo || bins == 0 {
        return Err(Error::Degenerate(format!(
            "bins need 1 <= lo < hi and at least one bin, got [{lo}, {hi}] with {bins}"
        )));
    }
    let ratio = (hi as f64 / lo as f64).powf(1.0 / bins as f64);
    let mut edges = vec![lo];
    for i in 1..bins {
        let e = (lo as f64 * ratio.powi(i as i32)).round() as usize;
        if e > *edges.last().expect("non-empty") && e < hi {
            edges.push(e);
        }
    }
    edges.push(hi);
    Ok(edges)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinStats {
    pub lo: usize,
    /// Inclusive upper end.
    pub hi: usize,
    pub clusters: usize,
    pub weight: f64,
    pub mean_size: f64,
    pub mean_np: f64,
    pub var_np: f64,
    pub mean_npp: f64,
    pub var_npp: f64,
    /// `mean(N_P) / mean(N_P')`.
    pub ratio_of_means: Option<f64>,
    /// Weighted mean of `N_P / N_P'` over samples with `N_P' > 0`.
    pub mean_ratio: Option<f64>,
    pub excluded_fraction: f64,
    /// `(mean(N_P) - γ mean(N_P')) / mean(|C|)`.
    pub normalized_gap: f64,
    /// `P_n(N_P ≤ a n)` for each entry of the report's `a_grid`.
    pub below: Vec<f64>,
}

impl BinStats {
    pub fn is_empty(&self) -> bool {
        self.clusters == 0
    }

    /// Occurrence density `mean(N_P) / mean(|C|)`.
    pub fn density(&self) -> f64 {
        self.mean_np / self.mean_size
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub gamma: f64,
    pub a_grid: Vec<f64>,
    pub bins: Vec<BinStats>,
}

fn bin_of(edges: &[usize], n: usize) -> Option<usize> {
    let last = edges.len() - 1;
    if n < edges[0] || n > edges[last] {
        return None;
    }
    Some(edges[1..].partition_point(|&e| e <= n).min(last - 1))
}

/// Statistics of `N_P`, `N_P'` conditioned on `|C|` falling in each bin.
/// Observations are sorted before summation, so the result does not depend
/// on the order or the split of the input.
pub fn conditional_pattern_stats(
    samples: &[PatternObservation],
    gamma: f64,
    edges: &[usize],
    a_grid: &[f64],
) -> Result<ConcentrationReport> {
    if edges.len() < 2 || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Degenerate(
            "bin edges must be strictly increasing".into(),
        ));
    }
    let mut per_bin: Vec<Vec<&PatternObservation>> = vec![Vec::new(); edges.len() - 1];
    for s in samples {
        if let Some(b) = bin_of(edges, s.size) {
            per_bin[b].push(s);
        }
    }
    let bins = per_bin
        .into_iter()
        .enumerate()
        .map(|(b, mut obs)| {
            obs.sort_by(|x, y| {
                (x.size, &x.classes)
                    .partial_cmp(&(y.size, &y.classes))
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            let hi = if b + 2 == edges.len() {
                edges[b + 1]
            } else {
                edges[b + 1] - 1
            };
            bin_stats(&obs, edges[b], hi, gamma, a_grid)
        })
        .collect();
    Ok(ConcentrationReport {
        gamma,
        a_grid: a_grid.to_vec(),
        bins,
    })
}

fn bin_stats(
    obs: &[&PatternObservation],
    lo: usize,
    hi: usize,
    gamma: f64,
    a_grid: &[f64],
) -> BinStats {
    let mut w = 0.0;
    let (mut s_n, mut s_p, mut s_pp, mut s_p2, mut s_pp2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut r_w, mut r_sum) = (0.0, 0.0);
    let mut below = vec![0.0; a_grid.len()];
    for o in obs {
        for c in &o.classes {
            let (np, npp) = (c.n_p as f64, c.n_p_prime as f64);
            w += c.weight;
            s_n += c.weight * o.size as f64;
            s_p += c.weight * np;
            s_pp += c.weight * npp;
            s_p2 += c.weight * np * np;
            s_pp2 += c.weight * npp * npp;
            if c.n_p_prime > 0 {
                r_w += c.weight;
                r_sum += c.weight * np / npp;
            }
            for (b, &a) in below.iter_mut().zip(a_grid) {
                if np <= a * o.size as f64 {
                    *b += c.weight;
                }
            }
        }
    }
    if obs.is_empty() || w <= 0.0 {
        return BinStats {
            lo,
            hi,
            clusters: 0,
            weight: 0.0,
            mean_size: f64::NAN,
            mean_np: f64::NAN,
            var_np: f64::NAN,
            mean_npp: f64::NAN,
            var_npp: f64::NAN,
            ratio_of_means: None,
            mean_ratio: None,
            excluded_fraction: f64::NAN,
            normalized_gap: f64::NAN,
            below: vec![f64::NAN; a_grid.len()],
        };
    }
    let (mean_np, mean_npp) = (s_p / w, s_pp / w);
    let mean_size = s_n / w;
    BinStats {
        lo,
        hi,
        clusters: obs.len(),
        weight: w,
        mean_size,
        mean_np,
        var_np: (s_p2 / w - mean_np * mean_np).max(0.0),
        mean_npp,
        var_npp: (s_pp2 / w - mean_npp * mean_npp).max(0.0),
        ratio_of_means: (mean_npp > 0.0).then(|| mean_np / mean_npp),
        mean_ratio: (r_w > 0.0).then(|| r_sum / r_w),
        excluded_fraction: 1.0 - r_w / w,
        normalized_gap: (mean_np - gamma * mean_npp) / mean_size,
        below: below.into_iter().map(|b| b / w).collect(),
    }
}

/// `P_n(N_P ≤ a n)` per bin and per `a`; `out[bin][k]` pairs with `a_grid[k]`.
pub fn pattern_theorem_report(
    samples: &[PatternObservation],
    edges: &[usize],
    a_grid: &[f64],
) -> Result<Vec<Vec<f64>>> {
    Ok(conditional_pattern_stats(samples, f64::NAN, edges, a_grid)?
        .bins
        .into_iter()
        .map(|b| b.below)
        .collect())
}

impl ConcentrationReport {
    /// Columns: `lo,hi,clusters,weight,mean_size,mean_np,var_np,mean_npp,
    /// var_npp,ratio_of_means,mean_ratio,excluded_fraction,gamma,
    /// normalized_gap`, then one `below_a=<a>` column per grid value.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        write!(
            w,
            "lo,hi,clusters,weight,mean_size,mean_np,var_np,mean_npp,var_npp,\
             ratio_of_means,mean_ratio,excluded_fraction,gamma,normalized_gap"
        )?;
        for a in &self.a_grid {
            write!(w, ",below_a={a}")?;
        }
        writeln!(w)?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for b in &self.bins {
            write!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                b.lo,
                b.hi,
                b.clusters,
                b.weight,
                b.mean_size,
                b.mean_np,
                b.var_np,
                b.mean_npp,
                b.var_npp,
                opt(b.ratio_of_means),
                opt(b.mean_ratio),
                b.excluded_fraction,
                self.gamma,
                b.normalized_gap
            )?;
            for v in &b.below {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow<T> {
    pub n: usize,
    pub c_ratio: T,
    pub p_ratio: Option<T>,
    /// `|c_{n+1}/c_n - μ̂|`.
    pub deviation: T,
    /// `|c_{n+1}/c_n - p_{n+1}/p_n|`.
    pub route_gap: Option<T>,
    /// `n^{(1-β)/2} |c_{n+1}/c_n - 1|`.
    pub strengthened: Option<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioLimitReport<T> {
    pub mu_reference: T,
    pub rows: Vec<RatioRow<T>>,
}

/// `tail` holds `c_n`, `p_tail` optionally `p_n` on the same sizes. Without
/// an explicit reference `μ̂` the root estimate at the last size is used.
pub fn ratio_limit_report<T: Real>(
    tail: &[(usize, T)],
    p_tail: Option<&[(usize, T)]>,
    mu_reference: Option<T>,
    beta: Option<T>,
) -> Result<RatioLimitReport<T>> {
    let mu = estimate_mu(tail)?;
    let reference = mu_reference.unwrap_or(mu.last_root);
    let p_ratio: Option<Vec<T>> = match p_tail {
        Some(pt) => {
            check_tail(pt)?;
            if pt.len() != tail.len() || pt.iter().zip(tail).any(|(a, b)| a.0 != b.0) {
                return Err(Error::Degenerate(
                    "c_n and p_n must cover the same sizes".into(),
                ));
            }
            Some(pt.windows(2).map(|w| w[1].1 / w[0].1).collect())
        }
        None => None,
    };
    let rows = mu
        .ratio
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let n = tail[k].0;
            let pr = p_ratio.as_ref().map(|v| v[k]);
            RatioRow {
                n,
                c_ratio: r,
                p_ratio: pr,
                deviation: (r - reference).abs(),
                route_gap: pr.map(|p| (r - p).abs()),
                strengthened: beta.map(|b| {
                    T::lit(n as f64).powf((T::one() - b) / T::lit(2.0)) * (r - T::one()).abs()
                }),
            }
        })
        .collect();
    Ok(RatioLimitReport {
        mu_reference: reference,
        rows,
    })
}

impl<T: Real> RatioLimitReport<T> {
    /// Columns: `n,c_ratio,p_ratio,deviation,route_gap,strengthened`.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        let f = |v: T| format!("{:e}", v.to_f64().unwrap_or(f64::NAN));
        let opt = |v: Option<T>| v.map_or(String::new(), f);
        writeln!(w, "n,c_ratio,p_ratio,deviation,route_gap,strengthened")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.n,
                f(r.c_ratio),
                opt(r.p_ratio),
                f(r.deviation),
                opt(r.route_gap),
                opt(r.strengthened)
            )?;
        }
        Ok(())
    }
}

/// Whether `xs` never increases.
pub fn non_increasing<T: PartialOrd>(xs: &[T]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0])
}
