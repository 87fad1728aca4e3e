//! Experiment configuration: TOML with one table per concern.

use std::fs;
use std::path::{Path, PathBuf};

use clusterlab::cluster::MaxMode;
use clusterlab::pattern::{is_cluster_determined, Pattern};
use clusterlab::sampler::{ModelSpec, ProductMeasureSpec};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Sample,
    Census,
    Patterns,
    Exact,
    Verify,
    Estimate,
    Gumbel,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Model file.
    pub file: Option<PathBuf>,
    /// Shorthand for a Bernoulli product measure.
    pub p: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub d: Option<i64>,
    /// Window side lengths; a single entry is used for every axis.
    pub side: Vec<i64>,
    /// Census region is the window shrunk by this many sites.
    pub margin: Option<i64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSection {
    /// `"r1_pair"`: P = vacant site, P' = occupied site.
    pub builtin: Option<String>,
    pub p: Option<PathBuf>,
    pub p_prime: Option<PathBuf>,
    /// μ inside γ_PP'; defaults to 1.
    pub mu: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    pub replicates: i64,
    pub sweeps: Option<i64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactSection {
    pub n_max: i64,
    pub p: Vec<f64>,
    pub budget: Option<i64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub n: Vec<i64>,
    pub p: Vec<f64>,
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinsSection {
    pub lo: i64,
    pub hi: i64,
    pub count: i64,
    pub a_grid: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GumbelSection {
    pub p: Vec<f64>,
    pub n: Vec<i64>,
    pub replicates: i64,
    pub mode: Option<MaxMode>,
    pub d: Option<i64>,
    pub margin: Option<i64>,
    /// Largest size kept in the census that feeds `u_n` and `μ̂`.
    pub n_max: Option<i64>,
    /// Fixed μ instead of the census ratio route.
    pub mu: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    /// CSV with columns `n,c_n` and optionally `p_n`.
    pub input: Option<PathBuf>,
    /// Use the exact tail at this `p` instead.
    pub exact_p: Option<f64>,
    pub n_max: Option<i64>,
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: Option<i64>,
    pub out: Option<PathBuf>,
    pub workers: Option<i64>,
    pub model: Option<ModelSection>,
    pub geometry: Option<GeometrySection>,
    pub patterns: Option<PatternSection>,
    pub sampling: Option<SamplingSection>,
    pub exact: Option<ExactSection>,
    pub verify: Option<VerifySection>,
    pub bins: Option<BinsSection>,
    pub gumbel: Option<GumbelSection>,
    pub estimate: Option<EstimateSection>,
}

/// A configuration that passed validation, with every referenced file
/// loaded.
#[derive(Clone, Debug)]
pub struct Validated {
    pub raw: ExperimentConfig,
    pub text: String,
    pub path: PathBuf,
    pub seed: u64,
    pub model: Option<ModelSpec>,
    pub pair: Option<(Pattern, Pattern)>,
    pub inputs: Vec<PathBuf>,
}

impl Validated {
    pub fn geometry(&self) -> (usize, Vec<i64>, i64) {
        let g = self.raw.geometry.clone().unwrap_or_default();
        let d = g.d.unwrap_or(2) as usize;
        let side = if g.side.len() == 1 {
            vec![g.side[0]; d]
        } else {
            g.side.clone()
        };
        (d, side, g.margin.unwrap_or(0))
    }
}

struct Diagnostics(Vec<String>);

impl Diagnostics {
    fn push(&mut self, field: &str, msg: impl std::fmt::Display) {
        self.0.push(format!("{field}: {msg}"));
    }

    fn require<T>(&mut self, v: &Option<T>, field: &str, kind: Kind) {
        if v.is_none() {
            self.push(
                field,
                format!("required for kind = {kind:?}").to_lowercase(),
            );
        }
    }

    fn positive(&mut self, v: i64, field: &str) {
        if v < 1 {
            self.push(field, format!("must be at least 1, got {v}"));
        }
    }

    fn probabilities(&mut self, ps: &[f64], field: &str) {
        if ps.is_empty() {
            self.push(field, "must list at least one value");
        }
        for p in ps {
            if !(0.0..=1.0).contains(p) {
                self.push(field, format!("{p} is not a probability"));
            }
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Parse and check a configuration file. Every problem is reported, not
/// just the first.
pub fn validate(path: &Path) -> Result<Validated, Vec<String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| vec![format!("config: cannot read {}: {e}", path.display())])?;
    let raw: ExperimentConfig = toml::from_str(&text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start].matches('\n').count() + 1)
            .map_or(String::new(), |l| format!("line {l}: "));
        vec![format!("config: {line}{}", e.message())]
    })?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut diag = Diagnostics(Vec::new());
    let kind = raw.kind;
    let mut inputs = vec![path.to_path_buf()];

    let seed = match raw.seed {
        Some(s) if s < 0 => {
            diag.push("seed", format!("must be non-negative, got {s}"));
            0
        }
        Some(s) => s as u64,
        None => 0,
    };
    if let Some(w) = raw.workers {
        if w < 0 {
            diag.push("workers", format!("must be non-negative, got {w}"));
        }
    }

    let needs_model = matches!(kind, Kind::Sample | Kind::Census | Kind::Patterns);
    let mut model = None;
    if needs_model {
        diag.require(&raw.model, "model", kind);
        diag.require(&raw.geometry, "geometry", kind);
        diag.require(&raw.sampling, "sampling", kind);
    }
    if let Some(m) = &raw.model {
        match (&m.file, m.p) {
            (Some(_), Some(_)) => diag.push("model", "give either file or p, not both"),
            (None, None) => diag.push("model", "needs file or p"),
            (None, Some(p)) => match ProductMeasureSpec::bernoulli(p) {
                Ok(s) => model = Some(ModelSpec::Product(s)),
                Err(e) => diag.push("model.p", e),
            },
            (Some(f), None) => {
                let f = resolve(&base, f);
                match fs::read_to_string(&f) {
                    Ok(t) => match ModelSpec::parse(&t) {
                        Ok(s) => model = Some(s),
                        Err(e) => diag.push("model.file", format!("{}: {e}", f.display())),
                    },
                    Err(e) => diag.push("model.file", format!("cannot read {}: {e}", f.display())),
                }
                inputs.push(f);
            }
        }
    }
    if let Some(g) = &raw.geometry {
        let d = g.d.unwrap_or(2);
        if !(2..=3).contains(&d) {
            diag.push("geometry.d", format!("must be 2 or 3, got {d}"));
        }
        if g.side.is_empty() || (g.side.len() != 1 && g.side.len() as i64 != d) {
            diag.push("geometry.side", format!("needs 1 or {d} entries"));
        }
        for &s in &g.side {
            diag.positive(s, "geometry.side");
        }
        if let Some(m) = g.margin {
            if m < 0 || g.side.iter().any(|&s| 2 * m >= s) {
                diag.push(
                    "geometry.margin",
                    "must be non-negative and leave a non-empty region",
                );
            }
        }
    }
    if let Some(s) = &raw.sampling {
        diag.positive(s.replicates, "sampling.replicates");
        if let Some(sw) = s.sweeps {
            if sw < 0 {
                diag.push("sampling.sweeps", format!("must be non-negative, got {sw}"));
            }
        }
    }

    let mut pair = None;
    if matches!(kind, Kind::Patterns | Kind::Verify) {
        diag.require(&raw.patterns, "patterns", kind);
    }
    if let Some(ps) = &raw.patterns {
        match (&ps.builtin, &ps.p, &ps.p_prime) {
            (Some(b), None, None) if b == "r1_pair" => {
                pair = Some((Pattern::vacant_site(2), Pattern::occupied_site(2)))
            }
            (Some(b), None, None) => diag.push(
                "patterns.builtin",
                format!("unknown builtin {b:?}, expected \"r1_pair\""),
            ),
            (None, Some(a), Some(b)) => {
                let mut load = |field: &str, f: &PathBuf| {
                    let f = resolve(&base, f);
                    let r = match fs::read_to_string(&f) {
                        Ok(t) => Pattern::parse(&t)
                            .map_err(|e| diag.push(field, format!("{}: {e}", f.display())))
                            .ok(),
                        Err(e) => {
                            diag.push(field, format!("cannot read {}: {e}", f.display()));
                            None
                        }
                    };
                    inputs.push(f);
                    r
                };
                let pa = load("patterns.p", a);
                let pb = load("patterns.p_prime", b);
                if let (Some(pa), Some(pb)) = (pa, pb) {
                    if (pa.r(), pa.d(), pa.q()) != (pb.r(), pb.d(), pb.q()) {
                        diag.push("patterns", "P and P' must share r, d and q");
                    }
                    pair = Some((pa, pb));
                }
            }
            _ => diag.push("patterns", "give builtin, or both p and p_prime"),
        }
        if let Some(mu) = ps.mu {
            if !(mu > 0.0 && mu <= 1.0) {
                diag.push("patterns.mu", format!("must lie in (0, 1], got {mu}"));
            }
        }
    }
    if let (Some((pa, _)), Some(m)) = (&pair, &model) {
        if pa.q() != m.q() {
            diag.push(
                "patterns",
                format!("pattern q = {} does not match model q = {}", pa.q(), m.q()),
            );
        }
    }
    if let (Some((pa, _)), Some(g)) = (&pair, &raw.geometry) {
        if pa.d() as i64 != g.d.unwrap_or(2) {
            diag.push(
                "patterns",
                format!("pattern d = {} does not match geometry.d", pa.d()),
            );
        }
    }

    match kind {
        Kind::Patterns => diag.require(&raw.bins, "bins", kind),
        Kind::Exact => diag.require(&raw.exact, "exact", kind),
        Kind::Verify => diag.require(&raw.verify, "verify", kind),
        Kind::Estimate => diag.require(&raw.estimate, "estimate", kind),
        Kind::Gumbel => diag.require(&raw.gumbel, "gumbel", kind),
        _ => {}
    }
    if let Some(b) = &raw.bins {
        if b.lo < 1 || b.hi <= b.lo || b.count < 1 {
            diag.push("bins", "need 1 <= lo < hi and count >= 1");
        }
    }
    if let Some(e) = &raw.exact {
        diag.positive(e.n_max, "exact.n_max");
        diag.probabilities(&e.p, "exact.p");
        let budget = e.budget.unwrap_or(clusterlab::exact::DEFAULT_BUDGET as i64);
        if e.n_max > budget {
            diag.push(
                "exact.n_max",
                format!("{} exceeds the budget {budget}", e.n_max),
            );
        }
    }
    if let Some(v) = &raw.verify {
        if v.n.is_empty() {
            diag.push("verify.n", "must list at least one size");
        }
        for &n in &v.n {
            if !(1..clusterlab::exact::DEFAULT_BUDGET as i64).contains(&n) {
                diag.push(
                    "verify.n",
                    format!("{n} must lie in 1..{}", clusterlab::exact::DEFAULT_BUDGET),
                );
            }
        }
        diag.probabilities(&v.p, "verify.p");
        if let Some((pa, pb)) = &pair {
            if !is_cluster_determined(pa) || !is_cluster_determined(pb) {
                diag.push("patterns", "verify needs a cluster-determined pair");
            }
        }
    }
    if let Some(g) = &raw.gumbel {
        diag.probabilities(&g.p, "gumbel.p");
        if g.n.is_empty() {
            diag.push("gumbel.n", "must list at least one box half-width");
        }
        for &n in &g.n {
            if n < 0 {
                diag.push("gumbel.n", format!("must be non-negative, got {n}"));
            }
        }
        diag.positive(g.replicates, "gumbel.replicates");
        if let Some(m) = g.margin {
            if m < 0 {
                diag.push("gumbel.margin", format!("must be non-negative, got {m}"));
            }
        }
        if let Some(n) = g.n_max {
            diag.positive(n, "gumbel.n_max");
        }
        if let Some(mu) = g.mu {
            if !(mu > 0.0 && mu < 1.0) {
                diag.push("gumbel.mu", format!("must lie in (0, 1), got {mu}"));
            }
        }
    }
    if let Some(e) = &raw.estimate {
        match (&e.input, e.exact_p) {
            (Some(f), None) => {
                let f = resolve(&base, f);
                if !f.is_file() {
                    diag.push("estimate.input", format!("{} does not exist", f.display()));
                }
                inputs.push(f);
            }
            (None, Some(p)) => {
                diag.probabilities(&[p], "estimate.exact_p");
                let n = e.n_max.unwrap_or(clusterlab::exact::DEFAULT_BUDGET as i64);
                if !(5..=clusterlab::exact::DEFAULT_BUDGET as i64).contains(&n) {
                    diag.push("estimate.n_max", "must lie in 5..=12 for an exact tail");
                }
            }
            _ => diag.push("estimate", "give exactly one of input or exact_p"),
        }
    }

    if diag.0.is_empty() {
        Ok(Validated {
            raw,
            text,
            path: path.to_path_buf(),
            seed,
            model,
            pair,
            inputs,
        })
    } else {
        Err(diag.0)
    }
}
