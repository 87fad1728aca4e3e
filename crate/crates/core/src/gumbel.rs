//! Maximal clusters in boxes and their double-exponential law.

use std::io;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::{
    extract_clusters, max_cluster_size_labeled, size_census, MaxMode, SizeCensus,
};
use crate::error::{Error, Result};
use crate::estimators::least_squares;
use crate::lattice::Window;
use crate::sampler::{sample_product_with, ProductMeasureSpec, RngPolicy};

/// Largest window, in sites, a single replicate may allocate.
pub const MAX_WINDOW_SITES: usize = 1 << 28;

/// `|C_max|` over `B_n = [-n, n]^d` in a window padded by `margin`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxClusterRun {
    pub p: f64,
    pub half_width: usize,
    pub d: usize,
    pub replicates: usize,
    pub seed: u64,
    pub mode: MaxMode,
    pub margin: usize,
    /// Also record a size census of clusters with left-endpoint in `B_n`.
    pub census: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxClusterSample {
    pub p: f64,
    pub half_width: usize,
    pub d: usize,
    pub mode: MaxMode,
    pub seed: u64,
    pub values: Vec<usize>,
}

impl MaxClusterSample {
    pub fn replicates(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<usize>() as f64 / self.values.len().max(1) as f64
    }

    /// Columns: `replicate,value`.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "replicate,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{i},{v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxClusterOutput {
    pub sample: MaxClusterSample,
    /// One census per replicate when requested.
    pub censuses: Vec<SizeCensus>,
    /// Sites of `B_n`, the census region.
    pub box_sites: usize,
}

impl MaxClusterRun {
    pub fn new(p: f64, half_width: usize, replicates: usize, seed: u64, mode: MaxMode) -> Self {
        Self {
            p,
            half_width,
            d: 2,
            replicates,
            seed,
            mode,
            margin: 32,
            census: false,
        }
    }

    pub fn box_sites(&self) -> usize {
        (2 * self.half_width + 1).pow(self.d as u32)
    }

    pub fn window_sites(&self) -> usize {
        (2 * (self.half_width + self.margin) + 1).pow(self.d as u32)
    }

    pub fn run(&self) -> Result<MaxClusterOutput> {
        if self.replicates == 0 {
            return Err(Error::Degenerate("need at least one replicate".into()));
        }
        if self.d == 0 {
            return Err(Error::InvalidGeometry("d must be at least 1".into()));
        }
        let side = 2 * (self.half_width + self.margin) + 1;
        if side
            .checked_pow(self.d as u32)
            .is_none_or(|s| s > MAX_WINDOW_SITES)
        {
            return Err(Error::BudgetExceeded {
                requested: side.saturating_pow(self.d as u32),
                budget: MAX_WINDOW_SITES,
            });
        }
        let spec = ProductMeasureSpec::bernoulli(self.p)?;
        let window = Window::centered(self.d, (self.half_width + self.margin) as i64, 2)?;
        let bx = Window::centered(self.d, self.half_width as i64, 2)?;
        let results = RngPolicy::new(self.seed).par_replicates(self.replicates, |_, rng| {
            let config = sample_product_with(&window, &spec, rng)?;
            let labeling = extract_clusters(&config);
            let max = max_cluster_size_labeled(&labeling, &bx, self.mode)?;
            let census = self.census.then(|| size_census(&labeling, &bx));
            Ok::<_, Error>((max, census))
        });
        let mut values = Vec::with_capacity(self.replicates);
        let mut censuses = Vec::new();
        for r in results {
            let (v, c) = r?;
            values.push(v);
            censuses.extend(c);
        }
        Ok(MaxClusterOutput {
            sample: MaxClusterSample {
                p: self.p,
                half_width: self.half_width,
                d: self.d,
                mode: self.mode,
                seed: self.seed,
                values,
            },
            censuses,
            box_sites: bx.len(),
        })
    }
}

pub fn simulate_max_clusters(
    p: f64,
    half_width: usize,
    replicates: usize,
    seed: u64,
    mode: MaxMode,
) -> Result<MaxClusterSample> {
    Ok(MaxClusterRun::new(p, half_width, replicates, seed, mode)
        .run()?
        .sample)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Centering {
    pub u: usize,
    /// Every size of the tail passed the test, so `u` is only a lower bound.
    pub saturated: bool,
}

/// `u_n = max{k : |B_n| p_k ≥ 1}` with `|B_n| = (2n + 1)^d`.
pub fn choose_un(p_tail: &[(usize, f64)], half_width: usize, d: usize) -> Result<Centering> {
    centering_for_sites(p_tail, ((2 * half_width + 1) as f64).powi(d as i32))
}

/// `max{k : sites · p_k ≥ 1}`.
pub fn centering_for_sites(p_tail: &[(usize, f64)], sites: f64) -> Result<Centering> {
    let passing: Vec<usize> = p_tail
        .iter()
        .filter(|&&(_, p)| sites * p >= 1.0)
        .map(|&(k, _)| k)
        .collect();
    let Some(&u) = passing.iter().max() else {
        return Err(Error::Degenerate(
            "tail range insufficient: no size has |B_n| p_k >= 1".into(),
        ));
    };
    Ok(Centering {
        u,
        saturated: passing.len() == p_tail.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EcdfPoint {
    pub x: i64,
    pub empirical: f64,
    pub fitted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GumbelReport {
    pub u_n: usize,
    pub mu: f64,
    pub a_n: f64,
    pub sup_distance: f64,
    pub usable_offsets: usize,
    pub replicates: usize,
    pub ecdf: Vec<EcdfPoint>,
}

impl GumbelReport {
    /// Columns: `x,empirical,fitted`.
    pub fn write_ecdf_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,empirical,fitted")?;
        for e in &self.ecdf {
            writeln!(w, "{},{},{}", e.x, e.empirical, e.fitted)?;
        }
        Ok(())
    }
}

/// Fit `F(u_n + x) = exp(-a_n μ^x)` with `μ` held fixed. On the scale
/// `log(-log F̂(u_n + x)) = log a_n + x log μ` only the intercept is free;
/// offsets are weighted by the inverse delta-method variance
/// `F (1 - F) / (N (F log F)^2)`.
pub fn gumbel_compare(values: &[usize], u_n: usize, mu: f64) -> Result<GumbelReport> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::Degenerate(format!("μ must lie in (0, 1), got {mu}")));
    }
    if values.is_empty() {
        return Err(Error::Degenerate("empty sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let total = sorted.len() as f64;
    let (lo, hi) = (sorted[0] as i64, sorted[sorted.len() - 1] as i64);
    let u = u_n as i64;
    let ecdf_at = |k: i64| sorted.partition_point(|&v| v as i64 <= k) as f64 / total;

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for k in lo..=hi {
        let f = ecdf_at(k);
        if f > 0.0 && f < 1.0 {
            let x = (k - u) as f64;
            xs.push(x);
            ys.push((-f.ln()).ln() - x * mu.ln());
            ws.push(total * (f * f.ln()).powi(2) / (f * (1.0 - f)));
        }
    }
    if xs.len() < 3 {
        return Err(Error::Degenerate(format!(
            "need at least 3 offsets with 0 < F < 1, got {}",
            xs.len()
        )));
    }
    let sw: f64 = ws.iter().sum();
    let log_a = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let a_n = log_a.exp();
    let fitted = |x: i64| (-a_n * mu.powf(x as f64)).exp();
    let ecdf: Vec<EcdfPoint> = (lo - 1..=hi)
        .map(|k| EcdfPoint {
            x: k - u,
            empirical: ecdf_at(k),
            fitted: fitted(k - u),
        })
        .collect();
    let sup_distance = ecdf
        .iter()
        .map(|e| (e.empirical - e.fitted).abs())
        .fold(0.0, f64::max);
    Ok(GumbelReport {
        u_n,
        mu,
        a_n,
        sup_distance,
        usable_offsets: xs.len(),
        replicates: values.len(),
        ecdf,
    })
}

/// Free-slope variant: fits both `log a` and `log μ`. Returns `(a, μ)`.
pub fn fit_gumbel_free(values: &[usize], u_n: usize) -> Result<(f64, f64)> {
    let report = gumbel_compare(values, u_n, 0.5)?;
    let pts: Vec<(f64, f64)> = report
        .ecdf
        .iter()
        .filter(|e| e.empirical > 0.0 && e.empirical < 1.0)
        .map(|e| (e.x as f64, (-e.empirical.ln()).ln()))
        .collect();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (slope, intercept) = least_squares(&xs, &ys, None)?;
    Ok((intercept.exp(), slope.exp()))
}

/// Integer draws with `P(X ≤ u + k) = exp(-a μ^k)`: the ceiling of a
/// continuous draw from that law, shifted by `u`.
pub fn synthetic_gumbel<R: Rng + ?Sized>(
    a: f64,
    mu: f64,
    u: usize,
    count: usize,
    rng: &mut R,
) -> Vec<usize> {
    (0..count)
        .map(|_| {
            let v: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let y = ((-v.ln()) / a).ln() / mu.ln();
            (u as f64 + y.ceil()).max(0.0) as usize
        })
        .collect()
}
