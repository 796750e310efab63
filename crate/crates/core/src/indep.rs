//! Maximal 3-independent subsets of `Z_m`.
//!
//! `M ⊆ Z_m` is 3-independent when no `x1 + x2 + x3` with `x_i ∈ M`
//! (repetition allowed) vanishes, maximal when every `y ∉ M` completes some
//! pair of `M` to zero, and good when that pair can always be chosen with
//! distinct entries. [`verify`] is the ground truth; every generator in this
//! module filters its output through it.

use std::collections::HashSet;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndepError {
    #[error("no maximal 3-independent subset of Z_{m} found after examining {examined} candidates")]
    NotFound { m: u64, examined: u64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndepFlags {
    pub three_independent: bool,
    pub maximal: bool,
    pub good: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndepSet {
    pub m: u64,
    pub members: Vec<u64>,
    pub flags: IndepFlags,
}

impl IndepSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Clauses (a) and (b) both hold.
    pub fn is_maximal_three_independent(&self) -> bool {
        self.flags.three_independent && self.flags.maximal
    }
}

/// Verification verdict with witnesses for every failed clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndepReport {
    pub set: IndepSet,
    /// A triple of members summing to zero, when clause (a) fails.
    pub zero_sum: Option<[u64; 3]>,
    /// Non-members `y` with no `x1, x2 ∈ M` such that `x1 + x2 + y = 0`.
    pub unreached: Vec<u64>,
    /// Non-members reached only by pairs with `x1 = x2`.
    pub only_repeated: Vec<u64>,
    /// For each reached non-member, a completing pair `(y, x1, x2)`, distinct
    /// when possible.
    pub completions: Vec<(u64, u64, u64)>,
}

impl std::ops::Deref for IndepReport {
    type Target = IndepSet;

    fn deref(&self) -> &IndepSet {
        &self.set
    }
}

/// Checks clauses (a), (b) and goodness for `members ⊆ Z_m` (entries are
/// reduced mod `m`).
pub fn verify(m: u64, members: &[u64]) -> IndepReport {
    if m == 0 {
        return IndepReport {
            set: IndepSet { m, members: Vec::new(), flags: IndepFlags::default() },
            zero_sum: None,
            unreached: Vec::new(),
            only_repeated: Vec::new(),
            completions: Vec::new(),
        };
    }
    let mut set: Vec<u64> = members.iter().map(|x| x % m).collect();
    set.sort_unstable();
    set.dedup();
    let n = m as usize;
    let mut in_set = vec![false; n];
    for &x in &set {
        in_set[x as usize] = true;
    }
    // some pair (x1, x2) with x1 + x2 = s, preferring x1 != x2
    let mut any_pair: Vec<Option<(u64, u64)>> = vec![None; n];
    let mut distinct_pair: Vec<Option<(u64, u64)>> = vec![None; n];
    for (i, &x1) in set.iter().enumerate() {
        for &x2 in &set[i..] {
            let s = ((x1 + x2) % m) as usize;
            any_pair[s].get_or_insert((x1, x2));
            if x1 != x2 {
                distinct_pair[s].get_or_insert((x1, x2));
            }
        }
    }
    let neg = |x: u64| (m - x % m) % m;
    let zero_sum = set
        .iter()
        .find_map(|&x3| any_pair[neg(x3) as usize].map(|(x1, x2)| [x1, x2, x3]))
        .map(|mut t| {
            t.sort_unstable();
            t
        });

    let mut unreached = Vec::new();
    let mut only_repeated = Vec::new();
    let mut completions = Vec::new();
    for y in (0..m).filter(|&y| !in_set[y as usize]) {
        let target = neg(y) as usize;
        match (distinct_pair[target], any_pair[target]) {
            (Some((a, b)), _) => completions.push((y, a, b)),
            (None, Some((a, b))) => {
                only_repeated.push(y);
                completions.push((y, a, b));
            }
            (None, None) => unreached.push(y),
        }
    }
    let flags = IndepFlags {
        three_independent: zero_sum.is_none(),
        maximal: unreached.is_empty(),
        good: unreached.is_empty() && only_repeated.is_empty(),
    };
    IndepReport { set: IndepSet { m, members: set, flags }, zero_sum, unreached, only_repeated, completions }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "strategy")]
pub enum Strategy {
    /// Depth-first over subsets by increasing size; returns a minimum-size set,
    /// lexicographically first among those. Budget counts search nodes.
    Exhaustive,
    /// Saturating greedy passes from every starting residue in natural order.
    /// Budget caps the number of passes.
    Greedy,
    /// Saturating greedy passes over seeded random orders. Budget counts passes.
    Randomized { seed: u64 },
}

/// Running pair-sum counts for incremental 3-independence checks.
struct PairSums {
    m: u64,
    members: Vec<u64>,
    counts: Vec<u32>,
}

impl PairSums {
    fn new(m: u64) -> Self {
        PairSums { m, members: Vec::new(), counts: vec![0; m as usize] }
    }

    fn neg(&self, x: u64) -> usize {
        ((self.m - x) % self.m) as usize
    }

    /// Whether adding `x` keeps every triple sum nonzero.
    fn can_add(&self, x: u64) -> bool {
        let m = self.m;
        (3 * x) % m != 0
            && self.counts[self.neg(x)] == 0
            && self.members.iter().all(|&y| (2 * x + y) % m != 0)
    }

    fn push(&mut self, x: u64) {
        let m = self.m;
        for &y in &self.members {
            self.counts[((x + y) % m) as usize] += 1;
        }
        self.counts[((2 * x) % m) as usize] += 1;
        self.members.push(x);
    }

    fn pop(&mut self) {
        let m = self.m;
        let x = self.members.pop().expect("nonempty");
        self.counts[((2 * x) % m) as usize] -= 1;
        for &y in &self.members {
            self.counts[((x + y) % m) as usize] -= 1;
        }
    }

    fn is_maximal(&self) -> bool {
        let mut in_set = vec![false; self.m as usize];
        for &x in &self.members {
            in_set[x as usize] = true;
        }
        (0..self.m).all(|y| in_set[y as usize] || self.counts[self.neg(y)] > 0)
    }
}

/// Searches `Z_m` for a maximal 3-independent subset.
pub fn search(m: u64, budget: u64, strategy: Strategy) -> Result<IndepSet, IndepError> {
    let found = match strategy {
        Strategy::Exhaustive => exhaustive(m, budget),
        Strategy::Greedy => {
            let orders = (0..m.min(budget)).map(|s| (0..m).map(|i| (s + i) % m).collect::<Vec<_>>());
            best_greedy(m, orders)
        }
        Strategy::Randomized { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let orders = (0..budget)
                .map(|_| {
                    let mut v: Vec<u64> = (0..m).collect();
                    v.shuffle(&mut rng);
                    v
                })
                .collect::<Vec<_>>();
            best_greedy(m, orders.into_iter())
        }
    };
    found.map_err(|examined| IndepError::NotFound { m, examined })
}

fn exhaustive(m: u64, budget: u64) -> Result<IndepSet, u64> {
    if m == 0 {
        return Err(0);
    }
    let mut nodes = 0u64;
    for size in 1..=m as usize {
        let mut sums = PairSums::new(m);
        match dfs(&mut sums, 0, size, &mut nodes, budget) {
            Some(members) => {
                let report = verify(m, &members);
                debug_assert!(report.is_maximal_three_independent());
                return Ok(report.set);
            }
            None if nodes >= budget => return Err(nodes),
            None => {}
        }
    }
    Err(nodes)
}

fn dfs(sums: &mut PairSums, start: u64, size: usize, nodes: &mut u64, budget: u64) -> Option<Vec<u64>> {
    if sums.members.len() == size {
        return sums.is_maximal().then(|| sums.members.clone());
    }
    let need = (size - sums.members.len()) as u64;
    let mut x = start;
    while x + need <= sums.m {
        if *nodes >= budget {
            return None;
        }
        *nodes += 1;
        if sums.can_add(x) {
            sums.push(x);
            let found = dfs(sums, x + 1, size, nodes, budget);
            sums.pop();
            if found.is_some() {
                return found;
            }
        }
        x += 1;
    }
    None
}

fn best_greedy(m: u64, orders: impl Iterator<Item = Vec<u64>>) -> Result<IndepSet, u64> {
    if m == 0 {
        return Err(0);
    }
    let mut best: Option<Vec<u64>> = None;
    let mut examined = 0;
    for order in orders {
        examined += 1;
        let mut sums = PairSums::new(m);
        for x in order {
            if sums.can_add(x) {
                sums.push(x);
            }
        }
        if !sums.is_maximal() {
            continue;
        }
        let mut cand = sums.members;
        cand.sort_unstable();
        let better = match &best {
            None => true,
            Some(b) => (cand.len(), &cand) < (b.len(), b),
        };
        if better {
            best = Some(cand);
        }
    }
    match best {
        Some(members) => Ok(verify(m, &members).set),
        None => Err(examined),
    }
}

/// Chinese-remainder image of `(a mod m1, b mod m2)` in `Z_{m1 m2}`.
fn crt(a: u64, b: u64, m1: u64, m2: u64) -> u64 {
    (0..m2).map(|k| a + k * m1).find(|r| r % m2 == b).expect("coprime moduli")
}

/// Verified maximal 3-independent sets of `Z_{m1 m2} ≅ Z_m1 × Z_m2` of the
/// shape `(A × {b}) ∪ ({a} × B)`, smallest `|A| + |B|` first, without
/// repetition. Empty unless `m1, m2 ≥ 2` are coprime.
pub fn product_candidates(m1: u64, m2: u64) -> impl Iterator<Item = IndepSet> {
    let valid = m1 >= 2 && m2 >= 2 && arith::gcd(m1, m2) == 1;
    let m = m1 * m2;
    let totals = if valid { 2..=(m1 + m2) } else { 1..=0 };
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    totals
        .flat_map(move |total| {
            (1..total)
                .filter(move |&ka| ka <= m1 && total - ka <= m2)
                .flat_map(move |ka| {
                    let kb = total - ka;
                    (0..m1).combinations(ka as usize).flat_map(move |a_set| {
                        (0..m2).combinations(kb as usize).flat_map(move |b_set| {
                            let a_set = a_set.clone();
                            (0..m1).flat_map(move |a| {
                                let a_set = a_set.clone();
                                let b_set = b_set.clone();
                                (0..m2).map(move |b| {
                                    let mut s: Vec<u64> = a_set
                                        .iter()
                                        .map(|&x| crt(x, b, m1, m2))
                                        .chain(b_set.iter().map(|&y| crt(a, y, m1, m2)))
                                        .collect();
                                    s.sort_unstable();
                                    s.dedup();
                                    s
                                })
                            })
                        })
                    })
                })
        })
        .filter(move |s| seen.insert(s.clone()))
        .filter_map(move |s| {
            let r = verify(m, &s);
            r.is_maximal_three_independent().then_some(r.set)
        })
}

/// Smallest image of `members` under the automorphisms `x ↦ u·x` of `Z_m`.
pub fn canonical_under_units(m: u64, members: &[u64]) -> Vec<u64> {
    (1..m.max(2))
        .filter(|&u| arith::gcd(u, m) == 1)
        .map(|u| {
            let mut img: Vec<u64> = members.iter().map(|&x| (u * x) % m).collect();
            img.sort_unstable();
            img
        })
        .min()
        .unwrap_or_default()
}
