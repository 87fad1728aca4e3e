//! Occupied clusters: labeling, the cluster of a site, left-endpoint
//! clusters, size censuses and maximal cluster sizes in boxes.
//!
//! Only state 1 counts as occupied. Two occupied sites are in the same
//! cluster iff they are joined by a nearest-neighbour path of occupied sites.

use std::collections::{BTreeMap, VecDeque};
use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Configuration, Window};

pub const OCCUPIED: u8 = 1;
const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClusterInfo {
    pub size: usize,
    /// Linear index of the lexicographically smallest site.
    pub left_endpoint: usize,
    /// The cluster has a site on a face of the window.
    pub touches_boundary: bool,
}

/// Partition of the occupied sites into clusters. Cluster ids are assigned in
/// order of left-endpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterLabeling {
    window: Window,
    labels: Vec<u32>,
    clusters: Vec<ClusterInfo>,
}

impl ClusterLabeling {
    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn clusters(&self) -> &[ClusterInfo] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Cluster id of the site with linear index `idx`, if occupied.
    pub fn label(&self, idx: usize) -> Option<u32> {
        match self.labels[idx] {
            NONE => None,
            l => Some(l),
        }
    }

    pub fn label_at(&self, x: &[i64]) -> Option<u32> {
        self.window.index(x).and_then(|i| self.label(i))
    }

    pub fn raw_labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn sites_of(&self, label: u32) -> SiteSet {
        let start = self.clusters[label as usize].left_endpoint;
        let sites = (start..self.labels.len())
            .filter(|&i| self.labels[i] == label)
            .collect();
        SiteSet {
            window: self.window.clone(),
            sites,
        }
    }
}

/// Raster-scan union-find labeling (Hoshen–Kopelman style).
pub fn extract_clusters(config: &Configuration) -> ClusterLabeling {
    let window = config.window().clone();
    let states = config.states();
    let n = states.len();
    let d = window.dim();
    let strides = window.strides().to_vec();
    let extents: Vec<usize> = (0..d).map(|a| window.extent(a)).collect();

    // Roots are always the smallest index of their set, so the root of a
    // cluster is its left-endpoint.
    let mut parent: Vec<u32> = vec![NONE; n];
    fn find(parent: &mut [u32], mut i: u32) -> u32 {
        while parent[i as usize] != i {
            let p = parent[i as usize];
            parent[i as usize] = parent[p as usize];
            i = p;
        }
        i
    }

    let mut coord = vec![0usize; d];
    for idx in 0..n {
        if idx > 0 {
            // advance the coordinate odometer
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
        if states[idx] != OCCUPIED {
            continue;
        }
        let mut root = NONE;
        for a in 0..d {
            if coord[a] == 0 {
                continue;
            }
            let nb = idx - strides[a];
            if states[nb] != OCCUPIED {
                continue;
            }
            let other = find(&mut parent, nb as u32);
            if root == NONE {
                root = other;
            } else if other != root {
                let (lo, hi) = if other < root {
                    (other, root)
                } else {
                    (root, other)
                };
                parent[hi as usize] = lo;
                root = lo;
            }
        }
        parent[idx] = if root == NONE { idx as u32 } else { root };
    }

    let mut labels = vec![NONE; n];
    let mut clusters: Vec<ClusterInfo> = Vec::new();
    for idx in 0..n {
        let p = parent[idx];
        if p == NONE {
            continue;
        }
        let label = if p as usize == idx {
            clusters.push(ClusterInfo {
                size: 0,
                left_endpoint: idx,
                touches_boundary: false,
            });
            (clusters.len() - 1) as u32
        } else {
            // parents precede children, so the parent is already labelled
            let root = find(&mut parent, p);
            labels[root as usize]
        };
        labels[idx] = label;
        clusters[label as usize].size += 1;
    }
    for idx in border_indices(&window) {
        if labels[idx] != NONE {
            clusters[labels[idx] as usize].touches_boundary = true;
        }
    }

    ClusterLabeling {
        window,
        labels,
        clusters,
    }
}

/// Linear indices of the window's border sites, possibly repeated.
fn border_indices(window: &Window) -> impl Iterator<Item = usize> + '_ {
    let d = window.dim();
    (0..d).flat_map(move |axis| {
        let s = window.strides()[axis];
        let ext = window.extent(axis);
        let outer = window.len() / (s * ext);
        let faces = if ext > 1 { vec![0, ext - 1] } else { vec![0] };
        faces.into_iter().flat_map(move |c| {
            (0..outer).flat_map(move |o| {
                let base = o * s * ext + c * s;
                base..base + s
            })
        })
    })
}

/// A set of sites of a window, kept as sorted linear indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteSet {
    window: Window,
    sites: Vec<usize>,
}

impl SiteSet {
    pub fn empty(window: Window) -> Self {
        Self {
            window,
            sites: Vec::new(),
        }
    }

    pub fn from_indices(window: Window, mut sites: Vec<usize>) -> Self {
        sites.sort_unstable();
        sites.dedup();
        Self { window, sites }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.sites
    }

    pub fn contains_index(&self, idx: usize) -> bool {
        self.sites.binary_search(&idx).is_ok()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.window.index(x).is_some_and(|i| self.contains_index(i))
    }

    pub fn coords(&self) -> Vec<Vec<i64>> {
        self.sites.iter().map(|&i| self.window.coords(i)).collect()
    }

    /// Lexicographically smallest site.
    pub fn left_endpoint(&self) -> Option<Vec<i64>> {
        self.sites.first().map(|&i| self.window.coords(i))
    }
}

/// `C(x)`: the occupied cluster of `x`, empty when `x` is not occupied.
pub fn cluster_at(config: &Configuration, x: &[i64]) -> Result<SiteSet> {
    let window = config.window();
    let start = window
        .index(x)
        .ok_or_else(|| Error::OutOfWindow { site: x.to_vec() })?;
    if config.get_index(start) != OCCUPIED {
        return Ok(SiteSet::empty(window.clone()));
    }
    let d = window.dim();
    let strides = window.strides();
    let mut seen = std::collections::HashSet::new();
    let mut queue = VecDeque::from([start]);
    seen.insert(start);
    let mut coord = vec![0i64; d];
    while let Some(i) = queue.pop_front() {
        window.coords_into(i, &mut coord);
        for a in 0..d {
            if coord[a] > window.lo()[a] {
                let nb = i - strides[a];
                if config.get_index(nb) == OCCUPIED && seen.insert(nb) {
                    queue.push_back(nb);
                }
            }
            if coord[a] + 1 < window.hi()[a] {
                let nb = i + strides[a];
                if config.get_index(nb) == OCCUPIED && seen.insert(nb) {
                    queue.push_back(nb);
                }
            }
        }
    }
    Ok(SiteSet::from_indices(
        window.clone(),
        seen.into_iter().collect(),
    ))
}

/// `C = C(0)`.
pub fn cluster_of_origin(config: &Configuration) -> Result<SiteSet> {
    cluster_at(config, &vec![0; config.window().dim()])
}

/// `C^le(x)`: `C(x)` if `x` is its left-endpoint, otherwise empty.
pub fn left_endpoint_cluster(config: &Configuration, x: &[i64]) -> Result<SiteSet> {
    let c = cluster_at(config, x)?;
    let idx = config.window().index(x).expect("checked by cluster_at");
    if c.indices().first() == Some(&idx) {
        Ok(c)
    } else {
        Ok(SiteSet::empty(config.window().clone()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxMode {
    /// Every cluster meeting the box.
    All,
    /// Only clusters that do not touch the window border.
    FiniteOnly,
}

/// Largest cluster meeting `bx` (0 if none).
pub fn max_cluster_size_labeled(
    labeling: &ClusterLabeling,
    bx: &Window,
    mode: MaxMode,
) -> Result<usize> {
    let window = labeling.window();
    if !window.contains_box(bx) {
        return Err(Error::InvalidWindow(
            "box must lie inside the configuration window".into(),
        ));
    }
    let mut best = 0usize;
    let d = window.dim();
    let last = d - 1;
    let row_len = bx.extent(last);
    // Walk the box row by row along the last axis.
    let rows = bx.len() / row_len;
    let mut x = vec![0i64; d];
    for row in 0..rows {
        bx.coords_into(row * row_len, &mut x);
        let start = window.index(&x).expect("box inside window");
        for i in start..start + row_len {
            if let Some(l) = labeling.label(i) {
                let info = &labeling.clusters()[l as usize];
                if mode == MaxMode::FiniteOnly && info.touches_boundary {
                    continue;
                }
                best = best.max(info.size);
            }
        }
    }
    Ok(best)
}

pub fn max_cluster_size(config: &Configuration, bx: &Window, mode: MaxMode) -> Result<usize> {
    max_cluster_size_labeled(&extract_clusters(config), bx, mode)
}

/// Cluster counts by size for clusters whose left-endpoint lies in a census
/// region and which do not touch the window border.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeCensus {
    pub counts: BTreeMap<usize, u64>,
    /// All border-touching clusters of the window, excluded from `counts`.
    pub boundary_touching: u64,
}

impl SizeCensus {
    pub fn count(&self, n: usize) -> u64 {
        self.counts.get(&n).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn merge(&mut self, other: &SizeCensus) {
        for (&n, &c) in &other.counts {
            *self.counts.entry(n).or_insert(0) += c;
        }
        self.boundary_touching += other.boundary_touching;
    }

    /// Columns: `size,count,boundary_touching_excluded`.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "size,count,boundary_touching_excluded")?;
        for (n, c) in &self.counts {
            writeln!(w, "{n},{c},{}", self.boundary_touching)?;
        }
        Ok(())
    }
}

pub fn size_census(labeling: &ClusterLabeling, region: &Window) -> SizeCensus {
    let mut census = SizeCensus::default();
    let window = labeling.window();
    let mut x = vec![0i64; window.dim()];
    for info in labeling.clusters() {
        if info.touches_boundary {
            census.boundary_touching += 1;
            continue;
        }
        window.coords_into(info.left_endpoint, &mut x);
        if region.contains(&x) {
            *census.counts.entry(info.size).or_insert(0) += 1;
        }
    }
    census
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn config_with(window: Window, occ: &[[i64; 2]]) -> Configuration {
        Configuration::from_occupied(window, occ.iter().map(|s| &s[..])).unwrap()
    }

    #[test]
    fn labeling_examples() {
        let w = Window::centered(2, 4, 2).unwrap();
        assert!(extract_clusters(&Configuration::new(w.clone())).is_empty());

        let l = extract_clusters(&config_with(w.clone(), &[[0, 0]]));
        assert_eq!(l.len(), 1);
        assert_eq!(l.clusters()[0].size, 1);
        assert_eq!(w.coords(l.clusters()[0].left_endpoint), vec![0, 0]);

        let l = extract_clusters(&config_with(w, &[[0, 0], [0, 2]]));
        assert_eq!(l.len(), 2);
        assert!(l.clusters().iter().all(|c| c.size == 1));
    }

    #[test]
    fn u_shape_merges_late() {
        // Two arms joined only at the bottom row: the scan sees them as separate
        // until the last row.
        let w = Window::cube(2, 5, 2).unwrap();
        let l = extract_clusters(&config_with(
            w,
            &[
                [0, 0],
                [1, 0],
                [2, 0],
                [0, 3],
                [1, 3],
                [2, 3],
                [2, 1],
                [2, 2],
            ],
        ));
        assert_eq!(l.len(), 1);
        assert_eq!(l.clusters()[0].size, 8);
        assert_eq!(l.clusters()[0].left_endpoint, 0);
    }

    #[test]
    fn origin_cluster_examples() {
        let w = Window::centered(2, 3, 2).unwrap();
        assert!(cluster_of_origin(&Configuration::new(w.clone()))
            .unwrap()
            .is_empty());
        let plus = config_with(w.clone(), &[[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]]);
        assert_eq!(cluster_of_origin(&plus).unwrap().len(), 5);
        let single = config_with(w.clone(), &[[0, 0], [1, 1], [-1, -1]]);
        assert_eq!(cluster_of_origin(&single).unwrap().len(), 1);
        let outside = Configuration::new(Window::cube(2, 3, 2).unwrap());
        assert!(cluster_of_origin(&outside).unwrap().is_empty());
        assert!(cluster_at(&outside, &[-1, 0]).is_err());
    }

    #[test]
    fn left_endpoint_examples() {
        let w = Window::centered(2, 3, 2).unwrap();
        let domino = config_with(w, &[[0, 0], [1, 0]]);
        assert_eq!(left_endpoint_cluster(&domino, &[0, 0]).unwrap().len(), 2);
        assert!(left_endpoint_cluster(&domino, &[1, 0]).unwrap().is_empty());
        assert!(left_endpoint_cluster(&domino, &[2, 2]).unwrap().is_empty());
    }

    #[test]
    fn max_cluster_examples() {
        let w = Window::centered(2, 10, 2).unwrap();
        let bx = Window::centered(2, 3, 2).unwrap();
        let empty = Configuration::new(w.clone());
        assert_eq!(max_cluster_size(&empty, &bx, MaxMode::All).unwrap(), 0);

        // size 7 cluster poking into the box from outside
        let seven = config_with(
            w.clone(),
            &[[3, 0], [4, 0], [5, 0], [6, 0], [7, 0], [8, 0], [8, 1]],
        );
        assert_eq!(max_cluster_size(&seven, &bx, MaxMode::All).unwrap(), 7);
        assert!(
            max_cluster_size(&seven, &Window::centered(2, 11, 2).unwrap(), MaxMode::All).is_err()
        );
    }

    #[test]
    fn finite_only_skips_spanning_cluster() {
        // A spanning cross touching all four faces, plus islands of size 3 and 2.
        let w = Window::centered(2, 6, 2).unwrap();
        let mut occ: Vec<[i64; 2]> = Vec::new();
        for t in -6..=6 {
            occ.push([t, 0]);
            if t != 0 {
                occ.push([0, t]);
            }
        }
        occ.extend_from_slice(&[[2, 2], [2, 3], [3, 3], [-3, -3], [-3, -2]]);
        let c = config_with(w, &occ);
        let bx = Window::centered(2, 4, 2).unwrap();
        assert_eq!(max_cluster_size(&c, &bx, MaxMode::All).unwrap(), 25);
        assert_eq!(max_cluster_size(&c, &bx, MaxMode::FiniteOnly).unwrap(), 3);
    }

    #[test]
    fn census_examples() {
        let w = Window::cube(2, 10, 2).unwrap();
        let empty = extract_clusters(&Configuration::new(w.clone()));
        assert_eq!(size_census(&empty, &w), SizeCensus::default());

        let region = w.shrink(1).unwrap();
        let dominoes = config_with(
            w.clone(),
            &[
                [2, 2],
                [2, 3],
                [5, 5],
                [6, 5],
                [7, 1],
                [7, 2],
                [9, 4],
                [9, 5],
            ],
        );
        let census = size_census(&extract_clusters(&dominoes), &region);
        assert_eq!(census.counts, BTreeMap::from([(2, 3)]));
        assert_eq!(census.boundary_touching, 1);

        let mut buf = Vec::new();
        census.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "size,count,boundary_touching_excluded\n2,3,1\n"
        );
    }

    #[test]
    fn three_dimensional_labeling() {
        let w = Window::cube(3, 4, 2).unwrap();
        let occ: Vec<[i64; 3]> = vec![[0, 0, 0], [0, 0, 1], [1, 0, 1], [3, 3, 3], [2, 3, 3]];
        let c = Configuration::from_occupied(w, occ.iter().map(|s| &s[..])).unwrap();
        let l = extract_clusters(&c);
        let mut sizes: Vec<_> = l.clusters().iter().map(|c| c.size).collect();
        sizes.sort();
        assert_eq!(sizes, vec![2, 3]);
    }

    fn brute_force_partition(c: &Configuration) -> Vec<Vec<usize>> {
        let w = c.window();
        let mut seen = vec![false; w.len()];
        let mut parts = Vec::new();
        for i in 0..w.len() {
            if c.get_index(i) == OCCUPIED && !seen[i] {
                let set = cluster_at(c, &w.coords(i)).unwrap();
                for &j in set.indices() {
                    seen[j] = true;
                }
                parts.push(set.indices().to_vec());
            }
        }
        parts
    }

    proptest! {
        #[test]
        fn labeling_matches_bfs_partition(
            bits in proptest::collection::vec(proptest::bool::weighted(0.55), 64)
        ) {
            let w = Window::cube(2, 8, 2).unwrap();
            let states = bits.iter().map(|&b| b as u8).collect();
            let c = Configuration::from_states(w, states).unwrap();
            let l = extract_clusters(&c);
            let parts = brute_force_partition(&c);
            prop_assert_eq!(l.len(), parts.len());
            for (k, part) in parts.iter().enumerate() {
                // BFS parts come out in left-endpoint order too
                let set = l.sites_of(k as u32);
                prop_assert_eq!(set.indices(), &part[..]);
                prop_assert_eq!(l.clusters()[k].left_endpoint, part[0]);
            }
            let total: usize = l.clusters().iter().map(|c| c.size).sum();
            prop_assert_eq!(total, c.occupied_count());
            prop_assert_eq!(extract_clusters(&c), l.clone());
            // every cluster has exactly one left-endpoint
            let le = (0..c.window().len())
                .filter(|&i| !left_endpoint_cluster(&c, &c.window().coords(i)).unwrap().is_empty())
                .count();
            prop_assert_eq!(le, l.len());
            let bx = Window::new(vec![2, 2], vec![6, 6], 2).unwrap();
            prop_assert!(
                max_cluster_size_labeled(&l, &bx, MaxMode::All).unwrap()
                    >= max_cluster_size_labeled(&l, &bx, MaxMode::FiniteOnly).unwrap()
            );
        }

        #[test]
        fn max_cluster_monotone_under_adding_sites(
            bits in proptest::collection::vec(proptest::bool::weighted(0.4), 100),
            extra in 0usize..100
        ) {
            let w = Window::cube(2, 10, 2).unwrap();
            let bx = Window::new(vec![3, 3], vec![7, 7], 2).unwrap();
            let mut c = Configuration::from_states(w, bits.iter().map(|&b| b as u8).collect()).unwrap();
            let before = max_cluster_size(&c, &bx, MaxMode::All).unwrap();
            c.set_index(extra, 1).unwrap();
            prop_assert!(max_cluster_size(&c, &bx, MaxMode::All).unwrap() >= before);
        }
    }
}
