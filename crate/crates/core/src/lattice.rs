//! Windows of Z^d, q-state configurations on them, and the cube geometry
//! used by patterns.
//!
//! Sites are addressed by integer coordinates. Storage is a dense row-major
//! byte array, last axis fastest, so increasing linear index coincides with
//! the lexicographic order on coordinates. Every site outside the window is
//! treated as state 0 (vacant).

use std::fmt::Write as _;
use std::io;

use crate::error::{parse_err, Error, Result};

/// Largest supported number of states; one byte per site.
pub const MAX_STATES: u32 = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    lo: Vec<i64>,
    hi: Vec<i64>,
    q: u32,
    strides: Vec<usize>,
    len: usize,
}

impl Window {
    /// Half-open box `[lo, hi)` with `q` states per site.
    pub fn new(lo: Vec<i64>, hi: Vec<i64>, q: u32) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::InvalidWindow(format!(
                "lo has {} axes but hi has {}",
                lo.len(),
                hi.len()
            )));
        }
        if lo.len() < 2 {
            return Err(Error::InvalidWindow(format!(
                "dimension must be at least 2, got {}",
                lo.len()
            )));
        }
        if !(2..=MAX_STATES).contains(&q) {
            return Err(Error::InvalidWindow(format!(
                "q must be in [2, {MAX_STATES}], got {q}"
            )));
        }
        let mut len: usize = 1;
        let mut extents = Vec::with_capacity(lo.len());
        for (axis, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if h <= l {
                return Err(Error::InvalidWindow(format!(
                    "axis {axis}: hi ({h}) must exceed lo ({l})"
                )));
            }
            let extent = usize::try_from(h - l)
                .map_err(|_| Error::InvalidWindow(format!("axis {axis} is too long")))?;
            len = len
                .checked_mul(extent)
                .ok_or_else(|| Error::InvalidWindow("site count overflows".into()))?;
            extents.push(extent);
        }
        let mut strides = vec![1usize; extents.len()];
        for axis in (0..extents.len() - 1).rev() {
            strides[axis] = strides[axis + 1] * extents[axis + 1];
        }
        Ok(Self {
            lo,
            hi,
            q,
            strides,
            len,
        })
    }

    /// `[0, side)^d`.
    pub fn cube(d: usize, side: i64, q: u32) -> Result<Self> {
        Self::new(vec![0; d], vec![side; d], q)
    }

    /// `[-half, half]^d`, the box of width `2 half + 1` centred at the origin.
    pub fn centered(d: usize, half: i64, q: u32) -> Result<Self> {
        Self::new(vec![-half; d], vec![half + 1; d], q)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn extent(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis]) as usize
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Same box, different number of states.
    pub fn with_q(&self, q: u32) -> Result<Self> {
        Self::new(self.lo.clone(), self.hi.clone(), q)
    }

    /// The window shrunk by `margin` on every side, if anything is left.
    pub fn shrink(&self, margin: i64) -> Option<Self> {
        let lo: Vec<i64> = self.lo.iter().map(|l| l + margin).collect();
        let hi: Vec<i64> = self.hi.iter().map(|h| h - margin).collect();
        Self::new(lo, hi, self.q).ok()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&c, (&l, &h))| c >= l && c < h)
    }

    /// True if `inner` is a sub-box of `self`.
    pub fn contains_box(&self, inner: &Window) -> bool {
        inner.dim() == self.dim()
            && (0..self.dim()).all(|a| inner.lo[a] >= self.lo[a] && inner.hi[a] <= self.hi[a])
    }

    pub fn index(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        Some(
            x.iter()
                .zip(&self.lo)
                .zip(&self.strides)
                .map(|((&c, &l), &s)| (c - l) as usize * s)
                .sum(),
        )
    }

    pub fn coords_into(&self, mut idx: usize, out: &mut [i64]) {
        for axis in 0..self.dim() {
            let s = self.strides[axis];
            out[axis] = self.lo[axis] + (idx / s) as i64;
            idx %= s;
        }
    }

    pub fn coords(&self, idx: usize) -> Vec<i64> {
        let mut out = vec![0; self.dim()];
        self.coords_into(idx, &mut out);
        out
    }

    /// True if the site with linear index `idx` lies on a face of the window.
    pub fn on_border(&self, mut idx: usize) -> bool {
        for axis in 0..self.dim() {
            let s = self.strides[axis];
            let c = idx / s;
            idx %= s;
            if c == 0 || c + 1 == self.extent(axis) {
                return true;
            }
        }
        false
    }

    /// All sites in raster (lexicographic) order.
    pub fn sites(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len).map(move |i| self.coords(i))
    }

    /// Linear index offsets corresponding to coordinate offsets.
    pub fn linear_offsets(&self, offsets: &[Vec<i64>]) -> Vec<isize> {
        offsets
            .iter()
            .map(|o| {
                o.iter()
                    .zip(&self.strides)
                    .map(|(&c, &s)| c as isize * s as isize)
                    .sum()
            })
            .collect()
    }
}

/// A q-state field on a window. Sites outside read as 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    window: Window,
    states: Vec<u8>,
}

impl Configuration {
    pub fn new(window: Window) -> Self {
        let states = vec![0; window.len()];
        Self { window, states }
    }

    pub fn from_states(window: Window, states: Vec<u8>) -> Result<Self> {
        if states.len() != window.len() {
            return Err(Error::InvalidWindow(format!(
                "expected {} states, got {}",
                window.len(),
                states.len()
            )));
        }
        if let Some(&bad) = states.iter().find(|&&s| u32::from(s) >= window.q()) {
            return Err(Error::StateOutOfRange {
                state: bad.into(),
                q: window.q(),
            });
        }
        Ok(Self { window, states })
    }

    /// Configuration whose state-1 sites are exactly `occupied`.
    pub fn from_occupied<'a>(
        window: Window,
        occupied: impl IntoIterator<Item = &'a [i64]>,
    ) -> Result<Self> {
        let mut config = Self::new(window);
        for x in occupied {
            config.set(x, 1)?;
        }
        Ok(config)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn states(&self) -> &[u8] {
        &self.states
    }

    pub(crate) fn states_mut(&mut self) -> &mut [u8] {
        &mut self.states
    }

    pub fn get(&self, x: &[i64]) -> Result<u8> {
        self.window
            .index(x)
            .map(|i| self.states[i])
            .ok_or_else(|| Error::OutOfWindow { site: x.to_vec() })
    }

    /// State at `x`, with the vacant-exterior convention.
    pub fn state_or_vacant(&self, x: &[i64]) -> u8 {
        self.window.index(x).map_or(0, |i| self.states[i])
    }

    pub fn set(&mut self, x: &[i64], state: u8) -> Result<()> {
        if u32::from(state) >= self.window.q() {
            return Err(Error::StateOutOfRange {
                state: state.into(),
                q: self.window.q(),
            });
        }
        let i = self
            .window
            .index(x)
            .ok_or_else(|| Error::OutOfWindow { site: x.to_vec() })?;
        self.states[i] = state;
        Ok(())
    }

    pub fn get_index(&self, idx: usize) -> u8 {
        self.states[idx]
    }

    pub fn set_index(&mut self, idx: usize, state: u8) -> Result<()> {
        if u32::from(state) >= self.window.q() {
            return Err(Error::StateOutOfRange {
                state: state.into(),
                q: self.window.q(),
            });
        }
        self.states[idx] = state;
        Ok(())
    }

    /// `(coordinates, state)` for every site in raster order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, u8)> + '_ {
        self.states
            .iter()
            .enumerate()
            .map(move |(i, &s)| (self.window.coords(i), s))
    }

    pub fn count_state(&self, state: u8) -> usize {
        self.states.iter().filter(|&&s| s == state).count()
    }

    pub fn occupied_count(&self) -> usize {
        self.count_state(1)
    }

    /// Text snapshot: `key=value` header lines then run-length encoded rows.
    ///
    /// ```text
    /// # clusterlab snapshot v1
    /// d=2
    /// q=2
    /// lo=0,0
    /// hi=3,4
    /// data
    /// 2:0 2:1
    /// 4:1
    /// 1:0 3:1
    /// ```
    ///
    /// Each data line covers one row along the last axis, rows in raster
    /// order; tokens are `count:state`.
    pub fn to_snapshot(&self) -> String {
        let w = &self.window;
        let join = |v: &[i64]| {
            v.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut out = String::new();
        out.push_str("# clusterlab snapshot v1\n");
        let _ = writeln!(out, "d={}", w.dim());
        let _ = writeln!(out, "q={}", w.q());
        let _ = writeln!(out, "lo={}", join(w.lo()));
        let _ = writeln!(out, "hi={}", join(w.hi()));
        out.push_str("data\n");
        let row_len = w.extent(w.dim() - 1);
        for row in self.states.chunks(row_len) {
            let mut first = true;
            let mut i = 0;
            while i < row.len() {
                let s = row[i];
                let mut j = i;
                while j < row.len() && row[j] == s {
                    j += 1;
                }
                if !first {
                    out.push(' ');
                }
                let _ = write!(out, "{}:{}", j - i, s);
                first = false;
                i = j;
            }
            out.push('\n');
        }
        out
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let mut d = None;
        let mut q = None;
        let mut lo = None;
        let mut hi = None;
        let mut lines = text.lines().enumerate();
        let parse_vec = |v: &str, line: usize| -> Result<Vec<i64>> {
            v.split(',')
                .map(|c| {
                    c.trim()
                        .parse::<i64>()
                        .map_err(|e| parse_err(line, format!("bad coordinate {c:?}: {e}")))
                })
                .collect()
        };
        for (ln, raw) in lines.by_ref() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == "data" {
                break;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(ln + 1, format!("expected key=value, got {line:?}")))?;
            match key.trim() {
                "d" => {
                    d = Some(
                        value
                            .trim()
                            .parse::<usize>()
                            .map_err(|e| parse_err(ln + 1, format!("bad dimension: {e}")))?,
                    )
                }
                "q" => {
                    q = Some(
                        value
                            .trim()
                            .parse::<u32>()
                            .map_err(|e| parse_err(ln + 1, format!("bad q: {e}")))?,
                    )
                }
                "lo" => lo = Some(parse_vec(value, ln + 1)?),
                "hi" => hi = Some(parse_vec(value, ln + 1)?),
                other => return Err(parse_err(ln + 1, format!("unknown key {other:?}"))),
            }
        }
        let missing = |k: &str| parse_err(0, format!("snapshot header is missing {k}"));
        let (d, q, lo, hi) = (
            d.ok_or_else(|| missing("d"))?,
            q.ok_or_else(|| missing("q"))?,
            lo.ok_or_else(|| missing("lo"))?,
            hi.ok_or_else(|| missing("hi"))?,
        );
        if lo.len() != d || hi.len() != d {
            return Err(parse_err(0, "lo/hi length does not match d"));
        }
        let window = Window::new(lo, hi, q)?;
        let row_len = window.extent(d - 1);
        let mut states = Vec::with_capacity(window.len());
        for (ln, raw) in lines {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let before = states.len();
            for tok in line.split_whitespace() {
                let (count, state) = tok
                    .split_once(':')
                    .ok_or_else(|| parse_err(ln + 1, format!("bad run {tok:?}")))?;
                let count: usize = count
                    .parse()
                    .map_err(|e| parse_err(ln + 1, format!("bad run length: {e}")))?;
                let state: u8 = state
                    .parse()
                    .map_err(|e| parse_err(ln + 1, format!("bad state: {e}")))?;
                states.extend(std::iter::repeat_n(state, count));
            }
            if states.len() - before != row_len {
                return Err(parse_err(
                    ln + 1,
                    format!(
                        "row has {} sites, expected {row_len}",
                        states.len() - before
                    ),
                ));
            }
        }
        Self::from_states(window, states)
    }

    /// Debug dump: one CSV row per site, `x0,..,x{d-1},state`.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.window.dim();
        let header: Vec<String> = (0..d).map(|a| format!("x{a}")).collect();
        writeln!(w, "{},state", header.join(","))?;
        let mut x = vec![0; d];
        for (i, &s) in self.states.iter().enumerate() {
            self.window.coords_into(i, &mut x);
            for c in &x {
                write!(w, "{c},")?;
            }
            writeln!(w, "{s}")?;
        }
        Ok(())
    }
}

/// Offsets of the cube `Q = [0, r)^d`, its extension `Q̄ = [-1, r+1)^d`, and the
/// two boundary shells `∂Q = Q̄ \ Q` and `∂Q̄ = [-2, r+2)^d \ Q̄`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeGeometry {
    pub r: usize,
    pub d: usize,
    pub cube: Vec<Vec<i64>>,
    pub extended: Vec<Vec<i64>>,
    pub boundary: Vec<Vec<i64>>,
    pub outer_boundary: Vec<Vec<i64>>,
}

fn box_offsets(d: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let side = (hi - lo) as usize;
    let total = side.pow(d as u32);
    let mut out = Vec::with_capacity(total);
    for mut k in 0..total {
        let mut x = vec![0i64; d];
        for axis in (0..d).rev() {
            x[axis] = lo + (k % side) as i64;
            k /= side;
        }
        out.push(x);
    }
    out
}

pub fn cube_geometry(r: usize, d: usize) -> Result<CubeGeometry> {
    if r < 1 {
        return Err(Error::InvalidGeometry(format!("r must be >= 1, got {r}")));
    }
    if d < 2 {
        return Err(Error::InvalidGeometry(format!("d must be >= 2, got {d}")));
    }
    let r_i = r as i64;
    let in_box = |x: &[i64], lo: i64, hi: i64| x.iter().all(|&c| c >= lo && c < hi);
    let cube = box_offsets(d, 0, r_i);
    let extended = box_offsets(d, -1, r_i + 1);
    let boundary = extended
        .iter()
        .filter(|x| !in_box(x, 0, r_i))
        .cloned()
        .collect();
    let outer_boundary = box_offsets(d, -2, r_i + 2)
        .into_iter()
        .filter(|x| !in_box(x, -1, r_i + 1))
        .collect();
    Ok(CubeGeometry {
        r,
        d,
        cube,
        extended,
        boundary,
        outer_boundary,
    })
}

/// Whether `x` lies on the grid `V = (r+2) Z^d + (1, ..., 1)`.
pub fn in_grid_v(x: &[i64], r: usize) -> bool {
    let m = r as i64 + 2;
    x.iter().all(|&c| (c - 1).rem_euclid(m) == 0)
}

/// Which part of the translated cube must fit in the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridFit {
    /// `Q_x` inside the window.
    Cube,
    /// `Q̄_x` inside the window (what occurrence counting needs).
    Extended,
}

/// Sites of V in the window, in raster order, filtered by `fit`.
pub fn grid_v_sites(window: &Window, r: usize, fit: GridFit) -> Vec<Vec<i64>> {
    let m = r as i64 + 2;
    let (pad_lo, pad_hi) = match fit {
        GridFit::Cube => (0, r as i64),
        GridFit::Extended => (1, r as i64 + 1),
    };
    let d = window.dim();
    // Per-axis admissible coordinates.
    let axes: Vec<Vec<i64>> = (0..d)
        .map(|a| {
            let lo = window.lo()[a] + pad_lo;
            let hi = window.hi()[a] - pad_hi;
            let first = lo + (1 - lo).rem_euclid(m);
            let mut v = Vec::new();
            let mut c = first;
            while c <= hi {
                v.push(c);
                c += m;
            }
            v
        })
        .collect();
    if axes.iter().any(|v| v.is_empty()) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        out.push((0..d).map(|a| axes[a][idx[a]]).collect());
        let mut axis = d;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < axes[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cube_cardinalities() {
        let g = cube_geometry(3, 2).unwrap();
        assert_eq!(
            (g.cube.len(), g.extended.len(), g.boundary.len()),
            (9, 25, 16)
        );
        assert_eq!(g.outer_boundary.len(), 49 - 25);
        let g = cube_geometry(1, 2).unwrap();
        assert_eq!((g.cube.len(), g.boundary.len()), (1, 8));
        let g = cube_geometry(1, 3).unwrap();
        assert_eq!((g.cube.len(), g.boundary.len()), (1, 26));
        assert!(cube_geometry(0, 2).is_err());
        assert!(cube_geometry(2, 1).is_err());
    }

    #[test]
    fn grid_v_examples() {
        let w = Window::cube(2, 9, 2).unwrap();
        let v = grid_v_sites(&w, 1, GridFit::Cube);
        let expect: Vec<Vec<i64>> = [1, 4, 7]
            .iter()
            .flat_map(|&a| [1, 4, 7].iter().map(move |&b| vec![a, b]))
            .collect();
        assert_eq!(v, expect);
        assert_eq!(grid_v_sites(&w, 1, GridFit::Extended), expect);
        assert!(!in_grid_v(&[0, 0], 1));
        assert!(in_grid_v(&[-2, 4], 1));

        let w = Window::cube(2, 6, 2).unwrap();
        assert_eq!(grid_v_sites(&w, 3, GridFit::Cube), vec![vec![1, 1]]);
        assert_eq!(grid_v_sites(&w, 3, GridFit::Extended), vec![vec![1, 1]]);
    }

    #[test]
    fn fresh_configuration_is_vacant_and_roundtrips() {
        let w = Window::new(vec![-2, 0], vec![3, 4], 3).unwrap();
        let mut c = Configuration::new(w.clone());
        assert!(c.states().iter().all(|&s| s == 0));
        c.set(&[-2, 3], 2).unwrap();
        assert_eq!(c.get(&[-2, 3]).unwrap(), 2);
        assert!(c.get(&[3, 0]).is_err());
        assert!(c.set(&[0, 0], 3).is_err());
        assert_eq!(c.state_or_vacant(&[100, 100]), 0);
        let seen: Vec<_> = c.iter().map(|(x, _)| x).collect();
        assert_eq!(seen.len(), w.len());
        let mut dedup = seen.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), seen.len());
        // raster order is lexicographic order
        assert!(seen.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn window_validation() {
        assert!(Window::new(vec![0, 0], vec![0, 3], 2).is_err());
        assert!(Window::new(vec![0], vec![3], 2).is_err());
        assert!(Window::new(vec![0, 0], vec![3, 3], 1).is_err());
        assert!(Window::new(vec![0, 0], vec![3, 3], 257).is_err());
        let w = Window::centered(2, 2, 2).unwrap();
        assert_eq!(w.len(), 25);
        assert!(w.on_border(0));
        assert!(!w.on_border(w.index(&[0, 0]).unwrap()));
    }

    #[test]
    fn snapshot_parse_errors() {
        assert!(Configuration::from_snapshot("d=2\nq=2\nlo=0,0\nhi=2,2\ndata\n2:0\n").is_err());
        assert!(Configuration::from_snapshot("d=2\nq=2\nlo=0,0\ndata\n").is_err());
        assert!(Configuration::from_snapshot("d=2\nq=2\nlo=0,0\nhi=1,2\ndata\n1:0 1:5\n").is_err());
    }

    #[test]
    fn csv_dump_has_header_and_all_sites() {
        let c = Configuration::new(Window::cube(2, 3, 2).unwrap());
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("x0,x1,state"));
        assert_eq!(text.lines().count(), 10);
    }

    proptest! {
        #[test]
        fn boundary_size_matches_formula(r in 1usize..6, d in 2usize..4) {
            let g = cube_geometry(r, d).unwrap();
            let p = |k: usize| k.pow(d as u32);
            prop_assert_eq!(g.cube.len(), p(r));
            prop_assert_eq!(g.extended.len(), p(r + 2));
            prop_assert_eq!(g.boundary.len(), p(r + 2) - p(r));
            prop_assert_eq!(g.outer_boundary.len(), p(r + 4) - p(r + 2));
        }

        #[test]
        fn v_sites_have_disjoint_extended_cubes_and_avoid_origin(
            r in 1usize..5, side in 4i64..20, shift in -5i64..5
        ) {
            let w = Window::new(vec![shift, -shift], vec![shift + side, side - shift], 2).unwrap();
            let g = cube_geometry(r, 2).unwrap();
            let v = grid_v_sites(&w, r, GridFit::Cube);
            let mut seen = std::collections::HashSet::new();
            for x in &v {
                prop_assert!(in_grid_v(x, r));
                for o in &g.cube {
                    prop_assert!(x[0] + o[0] != 0 || x[1] + o[1] != 0);
                }
                for o in &g.extended {
                    prop_assert!(seen.insert((x[0] + o[0], x[1] + o[1])));
                }
            }
        }

        #[test]
        fn snapshot_roundtrip(
            h in 1i64..6, w in 1i64..7, lo0 in -3i64..3, q in 2u32..5,
            seed in proptest::collection::vec(0u8..255, 42)
        ) {
            let win = Window::new(vec![lo0, 0], vec![lo0 + h, w], q).unwrap();
            let states: Vec<u8> = (0..win.len()).map(|i| seed[i % seed.len()] % q as u8).collect();
            let c = Configuration::from_states(win, states).unwrap();
            let back = Configuration::from_snapshot(&c.to_snapshot()).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
