//! Patterns on the cube `Q`, their occurrences on the origin's cluster, the
//! counts `N_P` over the grid `V`, cluster contributions `c_P`, box
//! probabilities and the two-pattern ratio `γ_PP'`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;

use crate::cluster::{ClusterInfo, ClusterLabeling, SiteSet, OCCUPIED};
use crate::error::{parse_err, Error, Result};
use crate::lattice::{cube_geometry, grid_v_sites, Configuration, CubeGeometry, GridFit, Window};
use crate::sampler::{sample_model, ModelSpec, ProductMeasureSpec, RngPolicy};
use crate::scalar::Scalar;

/// A state assignment on `Q = [0, r)^d`, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    r: usize,
    d: usize,
    q: u32,
    values: Vec<u8>,
}

impl Pattern {
    pub fn new(r: usize, d: usize, q: u32, values: Vec<u8>) -> Result<Self> {
        if r < 1 || d < 2 {
            return Err(Error::InvalidPattern(format!(
                "need r >= 1 and d >= 2, got r = {r}, d = {d}"
            )));
        }
        if !(2..=crate::lattice::MAX_STATES).contains(&q) {
            return Err(Error::InvalidPattern(format!(
                "q must be in [2, 256], got {q}"
            )));
        }
        let expected = r.pow(d as u32);
        if values.len() != expected {
            return Err(Error::InvalidPattern(format!(
                "expected {expected} values for r = {r}, d = {d}, got {}",
                values.len()
            )));
        }
        if let Some(&v) = values.iter().find(|&&v| u32::from(v) >= q) {
            return Err(Error::InvalidPattern(format!(
                "value {v} is not below q = {q}"
            )));
        }
        Ok(Self { r, d, q, values })
    }

    pub fn from_fn(r: usize, d: usize, q: u32, mut f: impl FnMut(&[i64]) -> u8) -> Result<Self> {
        let g = cube_geometry(r, d)?;
        Self::new(r, d, q, g.cube.iter().map(|y| f(y)).collect())
    }

    pub fn uniform(r: usize, d: usize, q: u32, state: u8) -> Result<Self> {
        Self::from_fn(r, d, q, |_| state)
    }

    /// `r = 1`, the single site occupied.
    pub fn occupied_site(d: usize) -> Self {
        Self::uniform(1, d, 2, 1).expect("valid")
    }

    /// `r = 1`, the single site vacant.
    pub fn vacant_site(d: usize) -> Self {
        Self::uniform(1, d, 2, 0).expect("valid")
    }

    /// `r = 3`, only the centre `(1, .., 1)` occupied.
    pub fn centre_occupied(d: usize) -> Self {
        Self::from_fn(3, d, 2, |y| u8::from(y.iter().all(|&c| c == 1))).expect("valid")
    }

    /// `r = 3`, only the corner `(0, .., 0)` occupied.
    pub fn corner_occupied(d: usize) -> Self {
        Self::from_fn(3, d, 2, |y| u8::from(y.iter().all(|&c| c == 0))).expect("valid")
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn geometry(&self) -> CubeGeometry {
        cube_geometry(self.r, self.d).expect("validated at construction")
    }

    fn offset_index(&self, y: &[i64]) -> Option<usize> {
        let r = self.r as i64;
        if y.len() != self.d || y.iter().any(|&c| c < 0 || c >= r) {
            return None;
        }
        Some(y.iter().fold(0usize, |acc, &c| acc * self.r + c as usize))
    }

    pub fn value(&self, y: &[i64]) -> Option<u8> {
        self.offset_index(y).map(|i| self.values[i])
    }

    /// Apply a lattice symmetry: axis permutation `perm` followed by
    /// reflections on the axes flagged in `flip`.
    pub fn transform(&self, perm: &[usize], flip: &[bool]) -> Result<Self> {
        let r = self.r as i64;
        Self::from_fn(self.r, self.d, self.q, |y| {
            let mut src = vec![0i64; self.d];
            for (a, &pa) in perm.iter().enumerate() {
                src[pa] = if flip[a] { r - 1 - y[a] } else { y[a] };
            }
            self.value(&src).expect("in range")
        })
    }

    /// Parse the text format: optional `d=..`/`q=..` header lines, then rows
    /// of state digits. For `d = 3` the slices are separated by blank lines.
    /// `#` starts a comment.
    ///
    /// ```text
    /// # centre occupied, r = 3
    /// 000
    /// 010
    /// 000
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut d_hdr: Option<usize> = None;
        let mut q_hdr: Option<u32> = None;
        let mut blocks: Vec<Vec<(usize, String)>> = vec![Vec::new()];
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                if !blocks.last().expect("non-empty").is_empty() {
                    blocks.push(Vec::new());
                }
                continue;
            }
            if let Some((k, v)) = line.split_once('=') {
                let v = v.trim();
                match k.trim() {
                    "d" => {
                        d_hdr = Some(
                            v.parse()
                                .map_err(|e| parse_err(ln + 1, format!("d: {e}")))?,
                        )
                    }
                    "q" => {
                        q_hdr = Some(
                            v.parse()
                                .map_err(|e| parse_err(ln + 1, format!("q: {e}")))?,
                        )
                    }
                    other => return Err(parse_err(ln + 1, format!("unknown header {other:?}"))),
                }
                continue;
            }
            blocks
                .last_mut()
                .expect("non-empty")
                .push((ln + 1, line.to_string()));
        }
        blocks.retain(|b| !b.is_empty());
        if blocks.is_empty() {
            return Err(parse_err(0, "pattern has no rows"));
        }
        let d = d_hdr.unwrap_or(if blocks.len() > 1 { 3 } else { 2 });
        let r = blocks[0].len();
        let (expected_blocks, expected_rows) = match d {
            2 => (1, r),
            3 => (r, r),
            _ => {
                return Err(Error::Unsupported(format!(
                    "pattern files support d = 2 or 3, got {d}"
                )))
            }
        };
        if blocks.len() != expected_blocks {
            return Err(parse_err(
                0,
                format!(
                    "expected {expected_blocks} slice(s) for d = {d}, r = {r}, got {}",
                    blocks.len()
                ),
            ));
        }
        let mut values = Vec::with_capacity(r.pow(d as u32));
        for block in &blocks {
            if block.len() != expected_rows {
                return Err(parse_err(
                    block[0].0,
                    format!("slice has {} rows, expected {r}", block.len()),
                ));
            }
            for (ln, row) in block {
                if row.chars().count() != r {
                    return Err(parse_err(
                        *ln,
                        format!(
                            "row {row:?} has length {}, expected {r}",
                            row.chars().count()
                        ),
                    ));
                }
                for ch in row.chars() {
                    let v = ch
                        .to_digit(10)
                        .ok_or_else(|| parse_err(*ln, format!("{ch:?} is not a state digit")))?;
                    values.push(v as u8);
                }
            }
        }
        let max = values.iter().copied().max().unwrap_or(0) as u32;
        let q = q_hdr.unwrap_or((max + 1).max(2));
        Self::new(r, d, q, values)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "d={}", self.d);
        let _ = writeln!(out, "q={}", self.q);
        let rows = self.values.chunks(self.r);
        for (i, row) in rows.enumerate() {
            if self.d == 3 && i > 0 && i % self.r == 0 {
                out.push('\n');
            }
            for v in row {
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }
}

fn check_dims(config: &Configuration, pattern: &Pattern) -> Result<()> {
    if config.window().dim() != pattern.d() {
        return Err(Error::InvalidPattern(format!(
            "pattern has d = {} but the configuration has d = {}",
            pattern.d(),
            config.window().dim()
        )));
    }
    Ok(())
}

fn translated(x: &[i64], y: &[i64]) -> Vec<i64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

/// `ω(x + y) = P(y)` for all `y ∈ Q`.
pub fn occurs_at(config: &Configuration, pattern: &Pattern, x: &[i64]) -> Result<bool> {
    check_dims(config, pattern)?;
    let g = pattern.geometry();
    let mut matches = true;
    for (y, &v) in g.cube.iter().zip(pattern.values()) {
        let site = translated(x, y);
        let s = config
            .get(&site)
            .map_err(|_| Error::InvalidGeometry(format!("Q_x at {x:?} leaves the window")))?;
        matches &= s == v;
    }
    Ok(matches)
}

/// `P` occurs at `x` and `∂Q_x ⊂ C`.
pub fn occurs_on_c_at(
    config: &Configuration,
    pattern: &Pattern,
    x: &[i64],
    c: &SiteSet,
) -> Result<bool> {
    check_dims(config, pattern)?;
    let g = pattern.geometry();
    for y in &g.boundary {
        if !config.window().contains(&translated(x, y)) {
            return Err(Error::InvalidGeometry(format!(
                "extended cube at {x:?} leaves the window"
            )));
        }
    }
    if !occurs_at(config, pattern, x)? {
        return Ok(false);
    }
    Ok(g.boundary.iter().all(|y| c.contains(&translated(x, y))))
}

/// `N_P`: occurrences on `C` at sites of `V` whose extended cube fits in the
/// window.
pub fn count_np(config: &Configuration, pattern: &Pattern, c: &SiteSet) -> Result<usize> {
    check_dims(config, pattern)?;
    if c.is_empty() {
        return Ok(0);
    }
    let mut n = 0;
    for x in grid_v_sites(config.window(), pattern.r(), GridFit::Extended) {
        if occurs_on_c_at(config, pattern, &x, c)? {
            n += 1;
        }
    }
    Ok(n)
}

/// Occupied pattern sites joined to `∂Q` through occupied pattern sites,
/// as a mask over the cube.
fn boundary_connected(pattern: &Pattern) -> Vec<bool> {
    let r = pattern.r() as i64;
    let g = pattern.geometry();
    let mut joined = vec![false; pattern.values().len()];
    let mut queue: VecDeque<Vec<i64>> = VecDeque::new();
    let neighbours = |y: &[i64]| -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        for a in 0..y.len() {
            for step in [-1, 1] {
                let mut z = y.to_vec();
                z[a] += step;
                out.push(z);
            }
        }
        out
    };
    // seed with occupied sites adjacent to the boundary shell
    for y in &g.cube {
        let touches = y.iter().any(|&c| c == 0 || c == r - 1);
        if touches && pattern.value(y) == Some(OCCUPIED) {
            let i = pattern.offset_index(y).expect("in cube");
            if !joined[i] {
                joined[i] = true;
                queue.push_back(y.clone());
            }
        }
    }
    while let Some(y) = queue.pop_front() {
        for z in neighbours(&y) {
            if let Some(i) = pattern.offset_index(&z) {
                if !joined[i] && pattern.values()[i] == OCCUPIED {
                    joined[i] = true;
                    queue.push_back(z);
                }
            }
        }
    }
    joined
}

/// `c_P`: occupied sites of `P` that join the surrounding cluster when `∂Q`
/// is fully occupied.
pub fn cluster_contribution(pattern: &Pattern) -> usize {
    boundary_connected(pattern).iter().filter(|&&b| b).count()
}

/// Whether an occurrence on `C` is decided by `C` alone under the
/// convention that every non-cluster neighbour of `C` is vacant: every
/// occupied site is boundary-connected, and every other site is state 0 and
/// adjacent to `∂Q` or to a boundary-connected occupied site.
pub fn is_cluster_determined(pattern: &Pattern) -> bool {
    let r = pattern.r() as i64;
    let joined = boundary_connected(pattern);
    let g = pattern.geometry();
    g.cube
        .iter()
        .enumerate()
        .all(|(i, y)| match pattern.values()[i] {
            OCCUPIED => joined[i],
            0 => {
                y.iter().any(|&c| c == 0 || c == r - 1)
                    || (0..y.len()).any(|a| {
                        [-1, 1].iter().any(|&s| {
                            let mut z = y.clone();
                            z[a] += s;
                            pattern.offset_index(&z).is_some_and(|j| joined[j])
                        })
                    })
            }
            _ => false,
        })
}

/// `P(□P) = Π_{y∈Q} P(ω(y) = P(y)) · P(ω = 1)^{|∂Q|}` for a product measure.
pub fn box_probability<T: Scalar>(pattern: &Pattern, measure: &ProductMeasureSpec<T>) -> Result<T> {
    if pattern.q() != measure.q() {
        return Err(Error::InvalidPattern(format!(
            "pattern has q = {} but the measure has q = {}",
            pattern.q(),
            measure.q()
        )));
    }
    let g = pattern.geometry();
    let inside = pattern
        .values()
        .iter()
        .fold(T::one(), |acc, &v| acc * measure.prob(v).clone());
    Ok(inside * measure.prob(OCCUPIED).powu(g.boundary.len()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Monte Carlo frequency of `□P` at the centre of a window with `margin`
/// extra layers around the extended cube.
pub fn box_probability_mc(
    pattern: &Pattern,
    model: &ModelSpec,
    samples: usize,
    sweeps: usize,
    margin: i64,
    seed: u64,
) -> Result<BoxEstimate> {
    if samples == 0 {
        return Err(Error::Degenerate(
            "Monte Carlo box probability needs samples > 0".into(),
        ));
    }
    if pattern.q() != model.q() {
        return Err(Error::InvalidPattern(
            "pattern and model disagree on q".into(),
        ));
    }
    let d = pattern.d();
    let r = pattern.r() as i64;
    let window = Window::new(vec![-1 - margin; d], vec![r + 1 + margin; d], model.q())?;
    let g = pattern.geometry();
    let origin = vec![0i64; d];
    let hits: Vec<bool> = RngPolicy::new(seed).par_replicates(samples, |_, rng| {
        let config = sample_model(&window, model, sweeps, rng).expect("validated window");
        let inner = occurs_at(&config, pattern, &origin).expect("cube fits");
        inner
            && g.boundary
                .iter()
                .all(|y| config.state_or_vacant(y) == OCCUPIED)
    });
    let k = hits.iter().filter(|&&h| h).count() as f64;
    let n = samples as f64;
    let est = k / n;
    Ok(BoxEstimate {
        estimate: est,
        std_error: (est * (1.0 - est) / n).sqrt(),
        samples,
    })
}

/// `γ_PP' = μ^{c_P'} P(□P) / (μ^{c_P} P(□P'))` from precomputed pieces.
pub fn gamma_from_boxes<T: Scalar>(
    c_p: usize,
    c_p_prime: usize,
    box_p: T,
    box_p_prime: T,
    mu: T,
) -> Result<T> {
    if !(mu > T::zero() && mu <= T::one()) {
        return Err(Error::InvalidMeasure(format!(
            "mu must lie in (0, 1], got {mu:?}"
        )));
    }
    let den = mu.powu(c_p) * box_p_prime;
    if den == T::zero() {
        return Err(Error::ZeroDenominator("P(□P') is zero".into()));
    }
    Ok(mu.powu(c_p_prime) * box_p / den)
}

pub fn gamma<T: Scalar>(
    p: &Pattern,
    p_prime: &Pattern,
    mu: T,
    measure: &ProductMeasureSpec<T>,
) -> Result<T> {
    gamma_from_boxes(
        cluster_contribution(p),
        cluster_contribution(p_prime),
        box_probability(p, measure)?,
        box_probability(p_prime, measure)?,
        mu,
    )
}

/// Everything the two-pattern statements need about a pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternPairContext<T> {
    pub p: Pattern,
    pub p_prime: Pattern,
    pub c_p: usize,
    pub c_p_prime: usize,
    /// `c_P' - c_P`.
    pub delta_c: i64,
    pub box_p: T,
    pub box_p_prime: T,
    pub gamma: T,
}

impl<T: Scalar> PatternPairContext<T> {
    pub fn new(
        p: Pattern,
        p_prime: Pattern,
        measure: &ProductMeasureSpec<T>,
        mu: T,
    ) -> Result<Self> {
        if p.r() != p_prime.r() || p.d() != p_prime.d() || p.q() != p_prime.q() {
            return Err(Error::InvalidPattern(
                "pattern pair must share r, d and q".into(),
            ));
        }
        let c_p = cluster_contribution(&p);
        let c_p_prime = cluster_contribution(&p_prime);
        let box_p = box_probability(&p, measure)?;
        let box_p_prime = box_probability(&p_prime, measure)?;
        let gamma = gamma_from_boxes(c_p, c_p_prime, box_p.clone(), box_p_prime.clone(), mu)?;
        Ok(Self {
            p,
            p_prime,
            c_p,
            c_p_prime,
            delta_c: c_p_prime as i64 - c_p as i64,
            box_p,
            box_p_prime,
            gamma,
        })
    }
}

/// Occurrence counts of several patterns on one cluster, split by the
/// residue class of the translation that would put a cluster site at the
/// origin. For a shift `s ∈ C`, the grid `V` seen from `C - s` consists of
/// the sites `x ≡ s + (1, .., 1) mod (r + 2)`, so only `s mod (r + 2)`
/// matters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterPatternCounts {
    pub label: u32,
    pub size: usize,
    /// Number of cluster sites in each shift class.
    pub class_sites: Vec<u32>,
    /// `counts[k][class]`: occurrences of pattern `k` on the cluster that
    /// lie on the grid of that shift class.
    pub counts: Vec<Vec<u32>>,
}

/// Number of shift classes, `(r + 2)^d`.
pub fn shift_classes(r: usize, d: usize) -> usize {
    (r + 2).pow(d as u32)
}

fn class_of(coord: &[i64], m: i64, offset: i64) -> usize {
    coord.iter().fold(0usize, |acc, &c| {
        acc * m as usize + (c - offset).rem_euclid(m) as usize
    })
}

/// Scan every placement whose extended cube fits in the window and record,
/// per selected cluster, occurrences on that cluster of each pattern.
pub fn harvest_pattern_counts(
    config: &Configuration,
    labeling: &ClusterLabeling,
    patterns: &[Pattern],
    select: impl Fn(&ClusterInfo) -> bool,
) -> Result<Vec<ClusterPatternCounts>> {
    let Some(first) = patterns.first() else {
        return Ok(Vec::new());
    };
    let (r, d) = (first.r(), first.d());
    if patterns.iter().any(|p| p.r() != r || p.d() != d) {
        return Err(Error::InvalidPattern(
            "harvested patterns must share r and d".into(),
        ));
    }
    for p in patterns {
        check_dims(config, p)?;
    }
    let window = config.window();
    let m = r as i64 + 2;
    let classes = shift_classes(r, d);
    let g = first.geometry();
    let ring = window.linear_offsets(&g.boundary);
    let cube = window.linear_offsets(&g.cube);

    let mut slot: Vec<Option<usize>> = vec![None; labeling.len()];
    let mut out: Vec<ClusterPatternCounts> = Vec::new();
    for (label, info) in labeling.clusters().iter().enumerate() {
        if select(info) {
            slot[label] = Some(out.len());
            out.push(ClusterPatternCounts {
                label: label as u32,
                size: info.size,
                class_sites: vec![0; classes],
                counts: vec![vec![0; classes]; patterns.len()],
            });
        }
    }
    if out.is_empty() {
        return Ok(out);
    }

    let states = config.states();
    let mut x = vec![0i64; d];
    for idx in 0..window.len() {
        let Some(l) = labeling.label(idx) else {
            continue;
        };
        if let Some(s) = slot[l as usize] {
            window.coords_into(idx, &mut x);
            out[s].class_sites[class_of(&x, m, 0)] += 1;
        }
    }

    // Placements x with Q̄_x inside the window.
    let inner = Window::new(
        window.lo().iter().map(|l| l + 1).collect(),
        window.hi().iter().map(|h| h - r as i64).collect(),
        window.q(),
    );
    let Ok(inner) = inner else {
        return Ok(out);
    };
    for j in 0..inner.len() {
        inner.coords_into(j, &mut x);
        let base = window.index(&x).expect("inner box inside window") as isize;
        let Some(l) = labeling.label((base + ring[0]) as usize) else {
            continue;
        };
        let Some(s) = slot[l as usize] else {
            continue;
        };
        if !ring
            .iter()
            .all(|&o| labeling.label((base + o) as usize) == Some(l))
        {
            continue;
        }
        let class = class_of(&x, m, 1);
        for (k, p) in patterns.iter().enumerate() {
            if cube
                .iter()
                .zip(p.values())
                .all(|(&o, &v)| states[(base + o) as usize] == v)
            {
                out[s].counts[k][class] += 1;
            }
        }
    }
    Ok(out)
}

/// `P(□P)` for site percolation by summing over all `2^{|Q̄|}` local states.
/// Independent of [`box_probability`]; only for small cubes.
pub fn enumerate_box_probability(pattern: &Pattern, p: f64) -> f64 {
    let g = pattern.geometry();
    let sites: Vec<&Vec<i64>> = g.extended.iter().collect();
    let n = sites.len();
    assert!(n <= 25, "local enumeration is for small cubes");
    let mut total = 0.0;
    for mask in 0u64..(1u64 << n) {
        let state = |i: usize| ((mask >> i) & 1) as u8;
        let hit = sites
            .iter()
            .enumerate()
            .all(|(i, y)| match pattern.value(y) {
                Some(v) => state(i) == v,
                None => state(i) == OCCUPIED,
            });
        if hit {
            let k = mask.count_ones() as i32;
            total += p.powi(k) * (1.0 - p).powi(n as i32 - k);
        }
    }
    total
}

/// A pattern with i.i.d. uniform states.
pub fn random_pattern<R: Rng + ?Sized>(r: usize, d: usize, q: u32, rng: &mut R) -> Pattern {
    Pattern::from_fn(r, d, q, |_| rng.gen_range(0..q) as u8).expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{cluster_of_origin, extract_clusters};
    use num_rational::BigRational;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn ring_config(center_occupied: bool) -> Configuration {
        // 8-ring around V-site (1,1) joined to the origin through (0,0) itself.
        let w = Window::new(vec![-2, -2], vec![6, 6], 2).unwrap();
        let mut c = Configuration::new(w);
        for x in 0..3 {
            for y in 0..3 {
                if (x, y) != (1, 1) || center_occupied {
                    c.set(&[x, y], 1).unwrap();
                }
            }
        }
        c
    }

    #[test]
    fn occurrence_examples() {
        let w = Window::cube(2, 6, 2).unwrap();
        let vacant = Configuration::new(w.clone());
        let all_vacant = Pattern::uniform(2, 2, 2, 0).unwrap();
        assert!(occurs_at(&vacant, &all_vacant, &[1, 1]).unwrap());
        assert!(occurs_at(&vacant, &all_vacant, &[5, 5]).is_err());

        let mut c = Configuration::new(w);
        c.set(&[2, 3], 1).unwrap();
        assert!(occurs_at(&c, &Pattern::occupied_site(2), &[2, 3]).unwrap());
        assert!(!occurs_at(&c, &Pattern::occupied_site(2), &[2, 2]).unwrap());
        assert!(!occurs_at(&c, &Pattern::uniform(2, 2, 2, 0).unwrap(), &[1, 2]).unwrap());
    }

    #[test]
    fn ring_fixture_counts() {
        let vac = Pattern::vacant_site(2);
        let occ = Pattern::occupied_site(2);
        let c = ring_config(false);
        let cl = cluster_of_origin(&c).unwrap();
        assert_eq!(cl.len(), 8);
        assert!(occurs_on_c_at(&c, &vac, &[1, 1], &cl).unwrap());
        assert_eq!(count_np(&c, &vac, &cl).unwrap(), 1);
        assert_eq!(count_np(&c, &occ, &cl).unwrap(), 0);

        let c = ring_config(true);
        let cl = cluster_of_origin(&c).unwrap();
        assert_eq!(count_np(&c, &occ, &cl).unwrap(), 1);
        assert_eq!(count_np(&c, &vac, &cl).unwrap(), 0);
        assert_eq!(
            count_np(&c, &occ, &SiteSet::empty(c.window().clone())).unwrap(),
            0
        );
    }

    #[test]
    fn ring_in_other_cluster_is_not_on_c() {
        // Same ring but the origin sits in a separate cluster.
        let w = Window::new(vec![-2, -2], vec![8, 8], 2).unwrap();
        let mut c = Configuration::new(w);
        c.set(&[-1, -1], 1).unwrap();
        for x in 3..6 {
            for y in 3..6 {
                if (x, y) != (4, 4) {
                    c.set(&[x, y], 1).unwrap();
                }
            }
        }
        let origin = crate::cluster::cluster_at(&c, &[-1, -1]).unwrap();
        let vac = Pattern::vacant_site(2);
        assert!(occurs_at(&c, &vac, &[4, 4]).unwrap());
        assert!(!occurs_on_c_at(&c, &vac, &[4, 4], &origin).unwrap());
    }

    #[test]
    fn figure_one_style_occurrence() {
        // q = 3 pattern of diameter 3 with a gray site, surrounded by the
        // origin's cluster.
        let p = Pattern::parse("q=3\n010\n201\n000\n").unwrap();
        let w = Window::new(vec![-3, -3], vec![8, 8], 3).unwrap();
        let mut c = Configuration::new(w);
        for x in 0..5 {
            for y in 0..5 {
                c.set(&[x, y], 1).unwrap();
            }
        }
        for (i, y) in p.geometry().cube.iter().enumerate() {
            c.set(&[1 + y[0], 1 + y[1]], p.values()[i]).unwrap();
        }
        let cl = cluster_of_origin(&c).unwrap();
        assert!(occurs_on_c_at(&c, &p, &[1, 1], &cl).unwrap());
        assert_eq!(count_np(&c, &p, &cl).unwrap(), 1);
    }

    #[test]
    fn contributions() {
        assert_eq!(cluster_contribution(&Pattern::occupied_site(2)), 1);
        assert_eq!(cluster_contribution(&Pattern::vacant_site(2)), 0);
        assert_eq!(cluster_contribution(&Pattern::centre_occupied(2)), 0);
        assert_eq!(cluster_contribution(&Pattern::corner_occupied(2)), 1);
        assert_eq!(
            cluster_contribution(&Pattern::uniform(3, 2, 2, 0).unwrap()),
            0
        );
        let plus = Pattern::parse("010\n111\n010\n").unwrap();
        assert_eq!(cluster_contribution(&plus), 5);
    }

    #[test]
    fn cluster_determined_predicate() {
        assert!(is_cluster_determined(&Pattern::occupied_site(2)));
        assert!(is_cluster_determined(&Pattern::vacant_site(2)));
        assert!(!is_cluster_determined(&Pattern::centre_occupied(2)));
        // the all-vacant 3x3 has a free centre
        assert!(!is_cluster_determined(
            &Pattern::uniform(3, 2, 2, 0).unwrap()
        ));
        assert!(!is_cluster_determined(&Pattern::corner_occupied(2)));
        assert!(is_cluster_determined(
            &Pattern::parse("010\n111\n010\n").unwrap()
        ));
        assert!(is_cluster_determined(
            &Pattern::uniform(2, 2, 2, 0).unwrap()
        ));
    }

    #[test]
    fn box_probability_examples() {
        let m = ProductMeasureSpec::bernoulli(0.5).unwrap();
        let b = box_probability(&Pattern::occupied_site(2), &m).unwrap();
        assert!((b - 0.001953125f64).abs() < 1e-18);
        assert!((b - enumerate_box_probability(&Pattern::occupied_site(2), 0.5)).abs() < 1e-15);
        for &p in &[0.2f64, 0.65] {
            let m = ProductMeasureSpec::bernoulli(p).unwrap();
            let v = box_probability(&Pattern::vacant_site(2), &m).unwrap();
            assert!((v - (1.0 - p) * p.powi(8)).abs() < 1e-15);
            assert!((v - enumerate_box_probability(&Pattern::vacant_site(2), p)).abs() < 1e-15);
        }
        let one = ProductMeasureSpec::bernoulli(1.0).unwrap();
        assert_eq!(
            box_probability(&Pattern::vacant_site(2), &one).unwrap(),
            0.0
        );
        let three = ProductMeasureSpec::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert!(box_probability(&Pattern::vacant_site(2), &three).is_err());
    }

    #[test]
    fn box_probability_monte_carlo() {
        let model = ModelSpec::Product(ProductMeasureSpec::bernoulli(0.7).unwrap());
        let est = box_probability_mc(&Pattern::occupied_site(2), &model, 20000, 0, 1, 3).unwrap();
        let exact = 0.7f64.powi(9);
        assert!(
            (est.estimate - exact).abs() < 4.0 * est.std_error,
            "{est:?}"
        );
        assert!(box_probability_mc(&Pattern::occupied_site(2), &model, 0, 0, 1, 3).is_err());
    }

    #[test]
    fn gamma_examples() {
        let occ = Pattern::occupied_site(2);
        let vac = Pattern::vacant_site(2);
        let m = ProductMeasureSpec::bernoulli(0.65f64).unwrap();
        assert!((gamma(&occ, &occ, 1.0, &m).unwrap() - 1.0).abs() < 1e-15);
        let g = gamma(&occ, &vac, 1.0, &m).unwrap();
        assert!((g - 0.65 / 0.35).abs() < 1e-12);
        assert!((g - 1.857142857142857).abs() < 1e-12);
        let mu_hat = 0.4f64;
        let g = gamma(&occ, &vac, mu_hat, &m).unwrap();
        assert!((g - 0.65 / 0.35 / mu_hat).abs() < 1e-12);
        let zero = ProductMeasureSpec::bernoulli(1.0).unwrap();
        assert!(matches!(
            gamma(&occ, &vac, 1.0, &zero),
            Err(Error::ZeroDenominator(_))
        ));
        assert!(gamma(&occ, &vac, 1.5, &m).is_err());

        // exact rationals
        let p = BigRational::new(13.into(), 20.into());
        let mr = ProductMeasureSpec::bernoulli(p).unwrap();
        let g = gamma(&occ, &vac, BigRational::from_count(1), &mr).unwrap();
        assert_eq!(g, BigRational::new(13.into(), 7.into()));
    }

    #[test]
    fn pair_context() {
        let m = ProductMeasureSpec::bernoulli(0.3).unwrap();
        let ctx = PatternPairContext::new(
            Pattern::centre_occupied(2),
            Pattern::corner_occupied(2),
            &m,
            0.5,
        )
        .unwrap();
        assert_eq!((ctx.c_p, ctx.c_p_prime, ctx.delta_c), (0, 1, 1));
        assert!(ctx.gamma > 0.0);
        assert!(PatternPairContext::new(
            Pattern::occupied_site(2),
            Pattern::centre_occupied(2),
            &m,
            0.5
        )
        .is_err());
    }

    #[test]
    fn swapping_occurrence_changes_cluster_by_delta_c() {
        // P' = occupied centre, P = vacant centre: replacing P' by P on C
        // removes exactly c_P' - c_P = 1 site.
        let mut c = ring_config(true);
        let occ = Pattern::occupied_site(2);
        let vac = Pattern::vacant_site(2);
        let before = cluster_of_origin(&c).unwrap().len();
        assert_eq!(
            count_np(&c, &occ, &cluster_of_origin(&c).unwrap()).unwrap(),
            1
        );
        c.set(&[1, 1], 0).unwrap();
        let cl = cluster_of_origin(&c).unwrap();
        assert_eq!(before as i64 - cl.len() as i64, 1);
        assert_eq!(count_np(&c, &vac, &cl).unwrap(), 1);

        // r = 3 pair from the ratio-limit construction: centre -> corner
        let w = Window::new(vec![-2, -2], vec![8, 8], 2).unwrap();
        let mut c = Configuration::new(w);
        for x in 0..5 {
            for y in 0..5 {
                if x == 0 || y == 0 || x == 4 || y == 4 {
                    c.set(&[x, y], 1).unwrap();
                }
            }
        }
        c.set(&[2, 2], 1).unwrap();
        let p = Pattern::centre_occupied(2);
        let pp = Pattern::corner_occupied(2);
        let cl = cluster_of_origin(&c).unwrap();
        assert_eq!(count_np(&c, &p, &cl).unwrap(), 1);
        c.set(&[2, 2], 0).unwrap();
        c.set(&[1, 1], 1).unwrap();
        let cl2 = cluster_of_origin(&c).unwrap();
        assert_eq!(count_np(&c, &pp, &cl2).unwrap(), 1);
        assert_eq!(cl2.len() as i64 - cl.len() as i64, 1);
    }

    #[test]
    fn pattern_file_roundtrip_and_errors() {
        let p = Pattern::centre_occupied(2);
        assert_eq!(Pattern::parse(&p.to_text()).unwrap(), p);
        let p3 = Pattern::corner_occupied(3);
        assert_eq!(Pattern::parse(&p3.to_text()).unwrap(), p3);
        let text = "# comment\n010 # trailing\n000\n000\n";
        assert_eq!(Pattern::parse(text).unwrap().values()[1], 1);
        assert!(Pattern::parse("01\n0\n").is_err());
        assert!(Pattern::parse("0a\n00\n").is_err());
        assert!(Pattern::parse("").is_err());
        assert!(Pattern::parse("q=2\n02\n00\n").is_err());
    }

    #[test]
    fn harvest_agrees_with_origin_count() {
        let occ = Pattern::occupied_site(2);
        let vac = Pattern::vacant_site(2);
        let c = ring_config(false);
        let l = extract_clusters(&c);
        let h = harvest_pattern_counts(&c, &l, &[occ, vac], |_| true).unwrap();
        assert_eq!(h.len(), 1);
        let rec = &h[0];
        assert_eq!(rec.class_sites.iter().sum::<u32>(), 8);
        // the occurrence at (1,1) is seen from shifts s ≡ (0,0) mod 3,
        // e.g. the origin itself
        assert_eq!(rec.counts[1][0], 1);
        assert_eq!(rec.counts[1].iter().sum::<u32>(), 1);
        assert_eq!(rec.counts[0].iter().sum::<u32>(), 0);
    }

    proptest! {
        #[test]
        fn contribution_is_symmetry_invariant(seed in any::<u64>(), r in 1usize..5, flips in any::<[bool; 2]>(), swap in any::<bool>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let p = random_pattern(r, 2, 2, &mut rng);
            let perm = if swap { [1, 0] } else { [0, 1] };
            let t = p.transform(&perm, &flips).unwrap();
            prop_assert_eq!(cluster_contribution(&p), cluster_contribution(&t));
            prop_assert_eq!(is_cluster_determined(&p), is_cluster_determined(&t));
        }

        #[test]
        fn on_c_implies_occurs_and_count_bounded(
            bits in proptest::collection::vec(proptest::bool::weighted(0.7), 144),
            pbits in proptest::collection::vec(any::<bool>(), 1)
        ) {
            let w = Window::new(vec![-4, -4], vec![8, 8], 2).unwrap();
            let c = Configuration::from_states(w.clone(), bits.iter().map(|&b| b as u8).collect()).unwrap();
            let cl = cluster_of_origin(&c).unwrap();
            let pat = if pbits[0] { Pattern::occupied_site(2) } else { Pattern::vacant_site(2) };
            let v = grid_v_sites(&w, 1, GridFit::Extended);
            for x in &v {
                if occurs_on_c_at(&c, &pat, x, &cl).unwrap() {
                    prop_assert!(occurs_at(&c, &pat, x).unwrap());
                }
            }
            prop_assert!(count_np(&c, &pat, &cl).unwrap() <= v.len());
        }
    }
}
