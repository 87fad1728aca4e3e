//! One runner per experiment kind.

use std::fs;
use std::io::Write;

use clusterlab::cluster::{extract_clusters, size_census, MaxMode, SizeCensus};
use clusterlab::estimators::{
    conditional_pattern_stats, estimate_mu, fit_stretched, geometric_bins, ratio_limit_report,
    PatternObservation, TailReport,
};
use clusterlab::exact::{
    anchored_polynomial, verify_supermulti, verify_swap_identity, ExactTail, JointCountPolynomials,
    DEFAULT_BUDGET,
};
use clusterlab::gumbel::{choose_un, gumbel_compare, MaxClusterRun};
use clusterlab::lattice::Window;
use clusterlab::pattern::{
    box_probability, box_probability_mc, cluster_contribution, gamma_from_boxes,
    harvest_pattern_counts, Pattern,
};
use clusterlab::sampler::{sample_model, ModelSpec, RngPolicy};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Kind, Validated};
use crate::output::Staging;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] clusterlab::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Failed(String),
}

pub struct Outcome {
    /// Kind-specific summary for the manifest.
    pub summary: Value,
    /// Seeds used, one per sweep point.
    pub seeds: Vec<u64>,
    /// A check the run performs did not hold; outputs are still written.
    pub check_failed: Option<String>,
}

/// Master seed of sweep point `k`.
fn point_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn tag(x: f64) -> String {
    format!("{x}")
}

pub fn run(v: &Validated, st: &mut Staging) -> Result<Outcome, RunError> {
    match v.raw.kind {
        Kind::Sample => sample(v, st),
        Kind::Census => census(v, st),
        Kind::Patterns => patterns(v, st),
        Kind::Exact => exact(v, st),
        Kind::Verify => verify(v, st),
        Kind::Estimate => estimate(v, st),
        Kind::Gumbel => gumbel(v, st),
    }
}

fn window_of(v: &Validated, model: &ModelSpec) -> Result<Window, RunError> {
    let (d, side, _) = v.geometry();
    Ok(Window::new(vec![0; d], side, model.q())?)
}

fn model_of(v: &Validated) -> &ModelSpec {
    v.model.as_ref().expect("validated")
}

fn sweeps_of(v: &Validated) -> usize {
    v.raw
        .sampling
        .as_ref()
        .and_then(|s| s.sweeps)
        .unwrap_or(100) as usize
}

fn replicates_of(v: &Validated) -> usize {
    v.raw.sampling.as_ref().map_or(1, |s| s.replicates) as usize
}

fn sample(v: &Validated, st: &mut Staging) -> Result<Outcome, RunError> {
    let model = model_of(v);
    let window = window_of(v, model)?;
    let sweeps = sweeps_of(v);
    let configs = RngPolicy::new(v.seed).par_replicates(replicates_of(v), |_, rng| {
        sample_model(&window, model, sweeps, rng)
    });
    let mut rows = Vec::new();
    for (i, c) in configs.into_iter().enumerate() {
        let c = c?;
        let labeling = extract_clusters(&c);
        let largest = labeling
            .clusters()
            .iter()
            .map(|k| k.size)
            .max()
            .unwrap_or(0);
        rows.push((i, c.occupied_count(), labeling.len(), largest));
        let snap = c.to_snapshot();
        st.write(&format!("sample_{i:04}.snap"), |w| {
            w.write_all(snap.as_bytes())
        })?;
    }
    st.write("samples.csv", |w| {
        writeln!(w, "replicate,occupied,clusters,largest")?;
        for (i, o, k, l) in &rows {
            writeln!(w, "{i},{o},{k},{l}")?;
        }
        Ok(())
    })?;
    Ok(Outcome {
        summary: json!({ "replicates": rows.len(), "sweeps": sweeps }),
        seeds: vec![v.seed],
        check_failed: None,
    })
}

fn census(v: &Validated, st: &mut Staging) -> Result<Outcome, RunError> {
    let model = model_of(v);
    let window = window_of(v, model)?;
    let (_, _, margin) = v.geometry();
    let region = window
        .shrink(margin)
        .ok_or_else(|| RunError::Failed("census region is empty".into()))?;
    let sweeps = sweeps_of(v);
    let censuses: Vec<SizeCensus> = RngPolicy::new(v.seed)
        .par_replicates(replicates_of(v), |_, rng| {
            sample_model(&window, model, sweeps, rng)
                .map(|c| size_census(&extract_clusters(&c), &region))
        })
        .into_iter()
        .collect::<Result<_, _>>()?;
    let mut merged = SizeCensus::default();
    for c in &censuses {
        merged.merge(c);
    }
    st.write("census.csv", |w| merged.write_csv(w))?;
    let n_max = merged.counts.keys().max().copied().unwrap_or(1);
    let tail = TailReport::<f64>::from_censuses(&censuses, region.len(), n_max)?;
    st.write("tail.csv", |w| tail.write_csv(w))?;
    st.write_json("tail.json", &tail_summary(&tail))?;
    Ok(Outcome {
        summary: json!({
            "replicates": censuses.len(),
            "region_sites": region.len(),
            "clusters": merged.total(),
            "boundary_touching": merged.boundary_touching,
            "mu_ratio": tail.mu_ratio,
            "mu_root": tail.mu_root,
            "reliable_n": tail.reliable_n,
        }),
        seeds: vec![v.seed],
        check_failed: None,
    })
}

fn tail_summary(tail: &TailReport<f64>) -> Value {
    json!({
        "source": tail.source,
        "reliable_n": tail.reliable_n,
        "mu_root": tail.mu_root,
        "mu_ratio": tail.mu_ratio,
        "stretched": tail.stretched,
        "points": tail.rows.len(),
    })
}

/// `□P`, `□P'` and, for Monte Carlo estimates, their standard errors.
type Boxes = (f64, f64, Option<(f64, f64)>);

fn pair_boxes(pair: &(Pattern, Pattern), model: &ModelSpec, seed: u64) -> Result<Boxes, RunError> {
    match model {
        ModelSpec::Product(m) => Ok((
            box_probability(&pair.0, m)?,
            box_probability(&pair.1, m)?,
            None,
        )),
        ModelSpec::Markov(_) => {
            let a = box_probability_mc(&pair.0, model, 20_000, 200, 4, seed)?;
            let b = box_probability_mc(&pair.1, model, 20_000, 200, 4, seed.wrapping_add(1))?;
            Ok((a.estimate, b.estimate, Some((a.std_error, b.std_error))))
        }
    }
}

fn patterns(v: &Validated, st: &mut Staging) -> Result<Outcome, RunError> {
    let model = model_of(v);
    let window = window_of(v, model)?;
    let pair = v.pair.as_ref().expect("validated");
    let bins = v.raw.bins.as_ref().expect("validated");
    let mu = v.raw.patterns.as_ref().and_then(|p| p.mu).unwrap_or(1.0);
    let (box_p, box_pp, box_se) = pair_boxes(pair, model, point_seed(v.seed, 1))?;
    let (c_p, c_pp) = (cluster_contribution(&pair.0), cluster_contribution(&pair.1));
    let gamma = gamma_from_boxes(c_p, c_pp, box_p, box_pp, mu)?;
    let edges = geometric_bins(bins.lo as usize, bins.hi as usize, bins.count as usize)?;
    let (lo, hi) = (edges[0], *edges.last().expect("non-empty"));
    let sweeps = sweeps_of(v);
    let patterns = [pair.0.clone(), pair.1.clone()];
    let harvested = RngPolicy::new(v.seed).par_replicates(replicates_of(v), |_, rng| {
        let c = sample_model(&window, model, sweeps, rng)?;
        let labeling = extract_clusters(&c);
        harvest_pattern_counts(&c, &labeling, &patterns, |k| {
            !k.touches_boundary && (lo..=hi).contains(&k.size)
        })
    });
    let mut obs = Vec::new();
    for h in harvested {
        for cl in h? {
            obs.push(PatternObservation::from_harvest(&cl)?);
        }
    }
    let a_grid = bins
        .a_grid
        .clone()
        .unwrap_or_else(|| vec![0.0, 0.001, 0.002, 0.005, 0.01, 0.05]);
    let report = conditional_pattern_stats(&obs, gamma, &edges, &a_grid)?;
    st.write("concentration.csv", |w| report.write_csv(w))?;
    let summary = json!({
        "gamma": gamma,
        "mu": mu,
        "c_p": c_p,
        "c_p_prime": c_pp,
        "box_p": box_p,
        "box_p_prime": box_pp,
        "box_std_errors": box_se,
        "clusters": obs.len(),
        "bins": report.bins,
    });
    st.write_json("concentration.json", &summary)?;
    Ok(Outcome {
        summary: json!({ "gamma": gamma, "clusters": obs.len() }),
        seeds: vec![v.seed],
        check_failed: None,
    })
}

fn exact(v: &Validated, st: &mut Staging) -> Result<Outcome, RunError> {
    let e = v.raw.exact.as_ref().expect("validated");
    let n_max = e.n_max as usize;
    let budget = e.budget.map_or(DEFAULT_BUDGET, |b| b as usize);
    let poly = anchored_polynomial(n_max, budget)?;
    let joint = match &v.pair {
        Some((a, b)) => Some(JointCountPolynomials::enumerate(a, b, n_max, budget)?),
        None => None,
    };
    let mut points = Vec::new();
    for &p in &e.p {
        let tail = ExactTail::from_anchored(&poly, p);
        st.write(&format!("exact_tail_p{}.csv", tag(p)), |w| {
            tail.write_csv(w)
        })?;
        let supermulti = if n_max >= 2 && p > 0.0 {
            verify_supermulti(&tail).ok().map(|s| {
                json!({
                    "a_hat": s.a_hat, "argmin": s.argmin, "pairs": s.pairs
                })
            })
        } else {
            None
        };
        if let Some(j) = &joint {
            st.write(&format!("joint_p{}.csv", tag(p)), |w| {
                writeln!(w, "n,i,j,probability")?;
                for n in 1..=n_max {
                    j.table(n, p)
                        .expect("n in range")
                        .write_csv(&mut *w, false)?;
                }
                Ok(())
            })?;
        }
        points.push(json!({
            "p": p,
            "c_identity_error": tail.max_identity_error(),
            "supermulti": supermulti,
        }));
    }
    st.write_json("exact.json", &json!({ "n_max": n_max, "points": points }))?;
    Ok(Outcome {
        summary: json!({ "n_max": n_max, "points": e.p.len() }),
        seeds: Vec::new(),
        check_failed: None,
    })
}

#[derive(Serialize)]
struct VerifyRow {
    n: usize,
    p: f64,
    max_rel_error: f64,
    buckets: usize,
    orphans: usize,
    pass: bool,
}

fn verify(v: &Validated, st: &mut Staging) -> Result<Outcome, RunError> {
    let cfg = v.raw.verify.as_ref().expect("validated");
    let (a, b) = v.pair.as_ref().expect("validated");
    let tol = cfg.tolerance.unwrap_or(1e-10);
    let top = cfg.n.iter().copied().max().expect("validated") as usize + 1;
    let polys = JointCountPolynomials::enumerate(a, b, top, DEFAULT_BUDGET)?;
    let mut rows = Vec::new();
    for &p in &cfg.p {
        for &n in &cfg.n {
            let chk = verify_swap_identity(&polys, n as usize, p)?;
            rows.push(VerifyRow {
                n: n as usize,
                p,
                max_rel_error: chk.max_rel_error,
                buckets: chk.buckets,
                orphans: chk.orphans,
                pass: chk.max_rel_error <= tol && chk.orphans == 0,
            });
        }
    }
    st.write("verify.csv", |w| {
        writeln!(w, "n,p,max_rel_error,buckets,orphans,pass")?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{:e},{},{},{}",
                r.n, r.p, r.max_rel_error, r.buckets, r.orphans, r.pass
            )?;
        }
        Ok(())
    })?;
    let worst = rows.iter().map(|r| r.max_rel_error).fold(0.0, f64::max);
    let all_pass = rows.iter().all(|r| r.pass);
    st.write_json(
        "verify.json",
        &json!({ "tolerance": tol, "max_rel_error": worst, "pass": all_pass, "rows": rows }),
    )?;
    Ok(Outcome {
        summary: json!({ "max_rel_error": worst, "pass": all_pass }),
        seeds: Vec::new(),
        check_failed: (!all_pass)
            .then(|| format!("swap identity error {worst:e} exceeds tolerance {tol:e}")),
    })
}

type Series = Vec<(usize, f64)>;

fn read_tail_csv(text: &str) -> Result<(Series, Option<Series>), RunError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| RunError::Failed("estimate.input: empty file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| cols.iter().position(|&c| c == name);
    let (Some(ni), Some(ci)) = (find("n"), find("c_n")) else {
        return Err(RunError::Failed(
            "estimate.input: header needs columns n and c_n".into(),
        ));
    };
    let pi = find("p_n");
    let mut c = Vec::new();
    let mut p = Vec::new();
    for (ln, line) in lines {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || RunError::Failed(format!("estimate.input: line {}: malformed row", ln + 1));
        let n: usize = f.get(ni).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let cv: f64 = f.get(ci).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        c.push((n, cv));
        if let Some(pi) = pi {
            let pv: f64 = f.get(pi).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            p.push((n, pv));
        }
    }
    Ok((c, pi.map(|_| p)))
}

fn estimate(v: &Validated, st: &mut Staging) -> Result<Outcome, RunError> {
    let e = v.raw.estimate.as_ref().expect("validated");
    let (c, p) = match (&e.input, e.exact_p) {
        (Some(_), _) => {
            let path = v.inputs.last().expect("input recorded");
            read_tail_csv(&fs::read_to_string(path)?)?
        }
        (None, Some(prob)) => {
            let n = e.n_max.unwrap_or(DEFAULT_BUDGET as i64) as usize;
            let tail = ExactTail::from_anchored(&anchored_polynomial(n, DEFAULT_BUDGET)?, prob);
            let c = (1..=n).map(|k| (k, tail.c[k - 1])).collect();
            let p = (1..=n).map(|k| (k, tail.p_tail[k - 1])).collect();
            (c, Some(p))
        }
        (None, None) => unreachable!("validated"),
    };
    let mu = estimate_mu(&c)?;
    let stretched = fit_stretched(&c).ok();
    let ratio = ratio_limit_report(&c, p.as_deref(), None, e.beta)?;
    st.write("ratio_limit.csv", |w| ratio.write_csv(w))?;
    st.write("mu.csv", |w| {
        writeln!(w, "n,mu_root,mu_ratio")?;
        for (k, n) in mu.n.iter().enumerate() {
            let r = mu.ratio.get(k).map_or(String::new(), |x| format!("{x:e}"));
            writeln!(w, "{n},{:e},{r}", mu.root[k])?;
        }
        Ok(())
    })?;
    let summary = json!({
        "last_root": mu.last_root,
        "last_ratio": mu.last_ratio,
        "stretched": stretched,
        "mu_reference": ratio.mu_reference,
    });
    st.write_json("estimate.json", &summary)?;
    Ok(Outcome {
        summary,
        seeds: Vec::new(),
        check_failed: None,
    })
}

fn gumbel(v: &Validated, st: &mut Staging) -> Result<Outcome, RunError> {
    let g = v.raw.gumbel.as_ref().expect("validated");
    let mode = g.mode.unwrap_or(MaxMode::All);
    let mut seeds = Vec::new();
    let mut reports = Vec::new();
    let mut k = 0;
    for &p in &g.p {
        for &n in &g.n {
            let seed = point_seed(v.seed, k);
            k += 1;
            seeds.push(seed);
            let run = MaxClusterRun {
                d: g.d.unwrap_or(2) as usize,
                margin: g.margin.unwrap_or(32) as usize,
                census: true,
                ..MaxClusterRun::new(p, n as usize, g.replicates as usize, seed, mode)
            };
            let out = run.run()?;
            let stem = format!("gumbel_p{}_n{n}", tag(p));
            st.write(&format!("{stem}_samples.csv"), |w| out.sample.write_csv(w))?;
            let n_max = g.n_max.unwrap_or(400) as usize;
            let tail = TailReport::<f64>::from_censuses(&out.censuses, out.box_sites, n_max)?;
            st.write(&format!("{stem}_tail.csv"), |w| tail.write_csv(w))?;
            let mu = match g.mu.or(tail.mu_ratio) {
                Some(m) if m > 0.0 && m < 1.0 => m,
                other => {
                    return Err(RunError::Failed(format!(
                        "p = {p}, n = {n}: no usable μ from the ratio route ({other:?})"
                    )))
                }
            };
            let centering = choose_un(&tail.p_tail_series(), n as usize, run.d)?;
            let report = gumbel_compare(&out.sample.values, centering.u, mu)?;
            st.write(&format!("{stem}_ecdf.csv"), |w| report.write_ecdf_csv(w))?;
            let summary = json!({
                "u_n": report.u_n,
                "u_n_saturated": centering.saturated,
                "a_n": report.a_n,
                "sup_distance": report.sup_distance,
                "mu": report.mu,
                "n": n,
                "p": p,
                "mode": mode,
                "seed": seed,
                "replicates": report.replicates,
            });
            st.write_json(&format!("{stem}.json"), &summary)?;
            reports.push(summary);
        }
    }
    let a_min = reports
        .iter()
        .filter_map(|r| r["a_n"].as_f64())
        .fold(f64::INFINITY, f64::min);
    let bounded = reports
        .iter()
        .filter_map(|r| r["a_n"].as_f64())
        .all(|a| a >= a_min && a <= 1.0);
    let summary = json!({ "points": reports, "a_min": a_min, "a_n_within_bounds": bounded });
    st.write_json("gumbel.json", &summary)?;
    Ok(Outcome {
        summary: json!({ "points": reports.len(), "a_min": a_min, "a_n_within_bounds": bounded }),
        seeds,
        check_failed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_csv_with_and_without_p() {
        let (c, p) =
            read_tail_csv("n,c_n,c_star_n,p_n\n1,0.5,0.5,0.9\n2,0.25,0.125,0.4\n").unwrap();
        assert_eq!(c, vec![(1, 0.5), (2, 0.25)]);
        assert_eq!(p, Some(vec![(1, 0.9), (2, 0.4)]));
        let (c, p) = read_tail_csv("c_n, n\n0.5, 3\n\n").unwrap();
        assert_eq!(c, vec![(3, 0.5)]);
        assert!(p.is_none());
    }

    #[test]
    fn tail_csv_errors_name_the_line() {
        assert!(read_tail_csv("").is_err());
        assert!(read_tail_csv("n,p_n\n1,0.3\n").is_err());
        let e = read_tail_csv("n,c_n\n1,0.5\n2,x\n")
            .err()
            .unwrap()
            .to_string();
        assert!(e.contains("line 3"), "{e}");
    }

    #[test]
    fn point_seeds_are_distinct() {
        let s: std::collections::HashSet<u64> = (0..100).map(|k| point_seed(42, k)).collect();
        assert_eq!(s.len(), 100);
        assert_eq!(point_seed(42, 0), 42);
    }
}
