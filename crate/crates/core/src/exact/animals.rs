//! Redelmeier enumeration of square-lattice animals with site perimeters.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default cap on the enumerated size.
pub const DEFAULT_BUDGET: usize = 12;

/// Which animals the enumeration produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rooting {
    /// Each fixed polyomino once, translated so its lexicographically
    /// smallest site is the origin.
    LeftEndpointAtOrigin,
    /// Every connected set that contains the origin.
    ContainsOrigin,
}

/// One enumerated animal, valid for the duration of the callback.
#[derive(Debug)]
pub struct AnimalView<'a> {
    /// Sites in insertion order; the origin comes first.
    pub sites: &'a [(i32, i32)],
    /// Number of vacant sites adjacent to the animal.
    pub perimeter: usize,
}

impl AnimalView<'_> {
    pub fn size(&self) -> usize {
        self.sites.len()
    }

    pub fn left_endpoint(&self) -> (i32, i32) {
        *self.sites.iter().min().expect("animals are non-empty")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnimalEnumerator {
    n_max: usize,
    rooting: Rooting,
}

struct State {
    half: i32,
    side: usize,
    rooting: Rooting,
    n_max: usize,
    reached: Vec<bool>,
    occupied: Vec<bool>,
    adjacent: Vec<u8>,
    perimeter: usize,
    sites: Vec<(i32, i32)>,
}

const STEPS: [(i32, i32); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];

impl State {
    fn new(n_max: usize, rooting: Rooting) -> Self {
        let half = n_max as i32 + 1;
        let side = (2 * half + 1) as usize;
        Self {
            half,
            side,
            rooting,
            n_max,
            reached: vec![false; side * side],
            occupied: vec![false; side * side],
            adjacent: vec![0; side * side],
            perimeter: 0,
            sites: Vec::with_capacity(n_max),
        }
    }

    fn slot(&self, (a, b): (i32, i32)) -> usize {
        (a + self.half) as usize * self.side + (b + self.half) as usize
    }

    fn allowed(&self, (a, b): (i32, i32)) -> bool {
        match self.rooting {
            Rooting::LeftEndpointAtOrigin => a > 0 || (a == 0 && b >= 0),
            Rooting::ContainsOrigin => true,
        }
    }

    fn push(&mut self, c: (i32, i32)) {
        let s = self.slot(c);
        if self.adjacent[s] > 0 {
            self.perimeter -= 1;
        }
        self.occupied[s] = true;
        for (da, db) in STEPS {
            let nb = self.slot((c.0 + da, c.1 + db));
            if !self.occupied[nb] && self.adjacent[nb] == 0 {
                self.perimeter += 1;
            }
            self.adjacent[nb] += 1;
        }
        self.sites.push(c);
    }

    fn pop(&mut self) {
        let c = self.sites.pop().expect("non-empty");
        let s = self.slot(c);
        for (da, db) in STEPS {
            let nb = self.slot((c.0 + da, c.1 + db));
            self.adjacent[nb] -= 1;
            if !self.occupied[nb] && self.adjacent[nb] == 0 {
                self.perimeter -= 1;
            }
        }
        self.occupied[s] = false;
        if self.adjacent[s] > 0 {
            self.perimeter += 1;
        }
    }

    /// New untried cells created by the last pushed cell.
    fn expand(&mut self, untried: &[(i32, i32)]) -> (Vec<(i32, i32)>, Vec<usize>) {
        let c = *self.sites.last().expect("non-empty");
        let mut next = untried.to_vec();
        let mut marked = Vec::new();
        for (da, db) in STEPS {
            let nb = (c.0 + da, c.1 + db);
            let s = self.slot(nb);
            if self.allowed(nb) && !self.reached[s] {
                self.reached[s] = true;
                marked.push(s);
                next.push(nb);
            }
        }
        (next, marked)
    }

    fn grow<F: FnMut(&AnimalView)>(&mut self, mut untried: Vec<(i32, i32)>, f: &mut F) {
        while let Some(c) = untried.pop() {
            self.push(c);
            f(&AnimalView {
                sites: &self.sites,
                perimeter: self.perimeter,
            });
            if self.sites.len() < self.n_max {
                let (next, marked) = self.expand(&untried);
                self.grow(next, f);
                for s in marked {
                    self.reached[s] = false;
                }
            }
            self.pop();
        }
    }
}

impl AnimalEnumerator {
    pub fn new(n_max: usize, rooting: Rooting) -> Result<Self> {
        Self::with_budget(n_max, rooting, DEFAULT_BUDGET)
    }

    pub fn with_budget(n_max: usize, rooting: Rooting, budget: usize) -> Result<Self> {
        if n_max > budget {
            return Err(Error::BudgetExceeded {
                requested: n_max,
                budget,
            });
        }
        if n_max == 0 {
            return Err(Error::Degenerate("n_max must be at least 1".into()));
        }
        Ok(Self { n_max, rooting })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn rooting(&self) -> Rooting {
        self.rooting
    }

    /// Visit every animal of size `1..=n_max` exactly once, sequentially.
    pub fn for_each<F: FnMut(&AnimalView)>(&self, mut f: F) {
        let mut st = State::new(self.n_max, self.rooting);
        let origin = (0, 0);
        let s = st.slot(origin);
        st.reached[s] = true;
        st.grow(vec![origin], &mut f);
    }

    /// Fold over all animals in parallel, one accumulator per first-growth
    /// branch. Accumulators come back in a fixed branch order.
    pub fn fold<A, I, F>(&self, init: I, fold: F) -> Vec<A>
    where
        A: Send,
        I: Fn() -> A + Sync,
        F: Fn(&mut A, &AnimalView) + Sync,
    {
        let mut root = State::new(self.n_max, self.rooting);
        let origin = (0, 0);
        let s = root.slot(origin);
        root.reached[s] = true;
        root.push(origin);
        let mut single = init();
        fold(
            &mut single,
            &AnimalView {
                sites: &root.sites,
                perimeter: root.perimeter,
            },
        );
        if self.n_max == 1 {
            return vec![single];
        }
        let (first, _) = root.expand(&[]);
        // Branch k grows first[k] with untried first[..k]; the later cells
        // stay marked as reached.
        let branches: Vec<A> = (0..first.len())
            .into_par_iter()
            .map(|k| {
                let mut st = State::new(self.n_max, self.rooting);
                let s = st.slot(origin);
                st.reached[s] = true;
                st.push(origin);
                for &c in &first {
                    let s = st.slot(c);
                    st.reached[s] = true;
                }
                let mut acc = init();
                let mut visit = |a: &AnimalView| fold(&mut acc, a);
                let mut untried = first[..k].to_vec();
                untried.push(first[k]);
                // Only the last entry is grown at this level.
                let c = untried.pop().expect("non-empty");
                st.push(c);
                visit(&AnimalView {
                    sites: &st.sites,
                    perimeter: st.perimeter,
                });
                if st.sites.len() < st.n_max {
                    let (next, _) = st.expand(&untried);
                    st.grow(next, &mut visit);
                }
                acc
            })
            .collect();
        std::iter::once(single).chain(branches).collect()
    }
}
