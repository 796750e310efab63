//! Search for bicovering arcs in small planes.
//!
//! Affine maps preserve both arcs and segment positions, and adding points to
//! an arc only adds secants, so an arc is bicovering as soon as some arc it
//! contains is. The exhaustive search therefore only looks at complete arcs
//! through the triangle `(0,0), (1,0), (0,1)`. Points are encoded by dense
//! index; every secant's point set and class split is precomputed as a
//! bitset.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::FieldSpec;
use crate::plane::{ArcSet, Point2};

/// Pair tables grow as `q⁶`; beyond this the search refuses to start.
pub const SEARCH_MAX_Q: u64 = 19;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("q = {q} exceeds the search limit {limit}")]
    TooLarge { q: u64, limit: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "strategy")]
pub enum ArcStrategy {
    /// Every complete arc through the base triangle, up to `budget` search
    /// nodes.
    Exhaustive,
    /// `budget` random saturations of the base triangle.
    Greedy { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcSearchReport {
    pub q: u64,
    pub strategy: ArcStrategy,
    pub found: Option<ArcSet>,
    /// Complete arcs examined.
    pub complete_arcs: u64,
    pub nodes: u64,
    /// The search space was covered without hitting the budget.
    pub exhausted: bool,
    /// Fewest points off the arc that fail to be bicovered, over all complete
    /// arcs examined, with an arc attaining it.
    pub min_failures: Option<u64>,
    pub best: Option<ArcSet>,
}

type Bits = Vec<u64>;

struct Tables {
    f: FieldSpec,
    n: usize,
    words: usize,
    line: Vec<u64>,
    ext: Vec<u64>,
    int: Vec<u64>,
}

impl Tables {
    fn new(f: &FieldSpec) -> Self {
        let q = f.q();
        let n = (q * q) as usize;
        let words = n.div_ceil(64);
        let mut line = vec![0u64; n * n * words];
        let mut ext = vec![0u64; n * n * words];
        let mut int = vec![0u64; n * n * words];
        let chi: Vec<i8> = f.elements().map(|s| f.chi(f.mul(s, f.sub(s, f.one())))).collect();
        for i in 0..n {
            let p1 = Point2::from_index(f, i as u64);
            for j in 0..n {
                if i == j {
                    continue;
                }
                let p2 = Point2::from_index(f, j as u64);
                let (dx, dy) = (f.sub(p2.x, p1.x), f.sub(p2.y, p1.y));
                let base = (i * n + j) * words;
                for s in f.elements() {
                    let k = Point2::new(f.add(p1.x, f.mul(s, dx)), f.add(p1.y, f.mul(s, dy))).index(q) as usize;
                    line[base + k / 64] |= 1 << (k % 64);
                    match chi[s.code() as usize] {
                        1 => ext[base + k / 64] |= 1 << (k % 64),
                        -1 => int[base + k / 64] |= 1 << (k % 64),
                        _ => {}
                    }
                }
            }
        }
        Tables { f: f.clone(), n, words, line, ext, int }
    }

    fn pair<'a>(&self, t: &'a [u64], i: usize, j: usize) -> &'a [u64] {
        let base = (i * self.n + j) * self.words;
        &t[base..base + self.words]
    }

    fn blocked_by(&self, arc: &[usize]) -> Bits {
        let mut b = vec![0u64; self.words];
        for (x, &i) in arc.iter().enumerate() {
            for &j in &arc[x + 1..] {
                or_into(&mut b, self.pair(&self.line, i, j));
            }
        }
        b
    }

    /// Points off `arc` that are not both external and internal somewhere.
    fn failures(&self, arc: &[usize]) -> u64 {
        let mut e = vec![0u64; self.words];
        let mut i = vec![0u64; self.words];
        for (x, &a) in arc.iter().enumerate() {
            for &b in &arc[x + 1..] {
                or_into(&mut e, self.pair(&self.ext, a, b));
                or_into(&mut i, self.pair(&self.int, a, b));
            }
        }
        let mut member = vec![0u64; self.words];
        for &a in arc {
            member[a / 64] |= 1 << (a % 64);
        }
        let full = self.n;
        (0..self.words)
            .map(|w| {
                let valid = if (w + 1) * 64 <= full { u64::MAX } else { (1u64 << (full - w * 64)) - 1 };
                (!(e[w] & i[w]) & !member[w] & valid).count_ones() as u64
            })
            .sum()
    }

    fn to_arc(&self, arc: &[usize]) -> ArcSet {
        ArcSet::new(self.f.clone(), arc.iter().map(|&k| Point2::from_index(&self.f, k as u64)).collect(), None)
    }
}

fn or_into(a: &mut [u64], b: &[u64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x |= y);
}

#[inline]
fn bit(a: &[u64], k: usize) -> bool {
    a[k / 64] >> (k % 64) & 1 == 1
}

fn base_triangle(q: u64) -> Vec<usize> {
    vec![0, q as usize, 1]
}

#[derive(Default)]
struct Branch {
    found: Option<Vec<usize>>,
    complete: u64,
    best: Option<(u64, Vec<usize>)>,
}

impl Branch {
    fn leaf(&mut self, t: &Tables, arc: &[usize]) {
        self.complete += 1;
        let fails = t.failures(arc);
        if self.best.as_ref().map_or(true, |(b, _)| fails < *b) {
            self.best = Some((fails, arc.to_vec()));
        }
        if fails == 0 && self.found.is_none() {
            self.found = Some(arc.to_vec());
        }
    }
}

struct Limits<'a> {
    budget: u64,
    nodes: &'a AtomicU64,
    stop: &'a AtomicBool,
}

fn dfs(t: &Tables, arc: &mut Vec<usize>, blocked: &Bits, start: usize, lim: &Limits, out: &mut Branch) {
    if out.found.is_some() || lim.stop.load(Ordering::Relaxed) {
        return;
    }
    if lim.nodes.fetch_add(1, Ordering::Relaxed) >= lim.budget {
        lim.stop.store(true, Ordering::Relaxed);
        return;
    }
    let mut extendable = false;
    for k in 0..t.n {
        if bit(blocked, k) || arc.contains(&k) {
            continue;
        }
        extendable = true;
        if k < start {
            // a smaller free point means this set is reached in another branch
            continue;
        }
        let mut nb = blocked.clone();
        for &x in arc.iter() {
            or_into(&mut nb, t.pair(&t.line, x, k));
        }
        arc.push(k);
        dfs(t, arc, &nb, k + 1, lim, out);
        arc.pop();
        if out.found.is_some() {
            return;
        }
    }
    if !extendable {
        out.leaf(t, arc);
    }
}

/// Looks for a bicovering arc of `AG(2,q)`.
pub fn search_bicovering_arc(f: &FieldSpec, budget: u64, strategy: ArcStrategy) -> Result<ArcSearchReport, SearchError> {
    let q = f.q();
    if q > SEARCH_MAX_Q {
        return Err(SearchError::TooLarge { q, limit: SEARCH_MAX_Q });
    }
    let t = Tables::new(f);
    let base = base_triangle(q);
    let blocked = t.blocked_by(&base);
    let nodes = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let lim = Limits { budget, nodes: &nodes, stop: &stop };
    let branches: Vec<Branch> = match strategy {
        ArcStrategy::Exhaustive => {
            let firsts: Vec<usize> = (0..t.n).filter(|&k| !bit(&blocked, k) && !base.contains(&k)).collect();
            if firsts.is_empty() {
                let mut b = Branch::default();
                b.leaf(&t, &base);
                vec![b]
            } else {
                firsts
                    .par_iter()
                    .map(|&k| {
                        let mut out = Branch::default();
                        let mut arc = base.clone();
                        let mut nb = blocked.clone();
                        for &x in &arc {
                            or_into(&mut nb, t.pair(&t.line, x, k));
                        }
                        arc.push(k);
                        // the branch must not revisit sets containing a smaller first point
                        dfs(&t, &mut arc, &nb, k + 1, &lim, &mut out);
                        out
                    })
                    .collect()
            }
        }
        ArcStrategy::Greedy { seed } => (0..budget)
            .into_par_iter()
            .map(|r| {
                nodes.fetch_add(1, Ordering::Relaxed);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r);
                let mut arc = base.clone();
                let mut blocked = blocked.clone();
                loop {
                    let free: Vec<usize> = (0..t.n).filter(|&k| !bit(&blocked, k) && !arc.contains(&k)).collect();
                    let Some(&k) = free.choose(&mut rng) else { break };
                    for &x in &arc {
                        or_into(&mut blocked, t.pair(&t.line, x, k));
                    }
                    arc.push(k);
                }
                let mut out = Branch::default();
                out.leaf(&t, &arc);
                out
            })
            .collect(),
    };
    let found = branches.iter().find_map(|b| b.found.clone());
    let best = branches
        .iter()
        .filter_map(|b| b.best.clone())
        .min_by(|(a, x), (b, y)| a.cmp(b).then_with(|| x.cmp(y)));
    let exhausted = matches!(strategy, ArcStrategy::Exhaustive) && !stop.load(Ordering::Relaxed);
    Ok(ArcSearchReport {
        q,
        strategy,
        found: found.map(|a| t.to_arc(&a)),
        complete_arcs: branches.iter().map(|b| b.complete).sum(),
        nodes: nodes.load(Ordering::Relaxed).min(budget),
        exhausted: exhausted && branches.iter().all(|b| b.found.is_none()),
        min_failures: best.as_ref().map(|(f, _)| *f),
        best: best.map(|(_, a)| t.to_arc(&a)),
    })
}
