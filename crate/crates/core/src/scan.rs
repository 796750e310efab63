//! Parameter tables: for each admissible `(q, m)` and each coprime split
//! `m = m1·m2`, the gate verdicts and the size bounds for the arc and its lifts.

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::cubic;
use crate::indep::{self, Strategy};

/// Above this index the table does not search for an independent set.
pub const SCAN_INDEP_MAX_M: u64 = 200;
const SCAN_INDEP_BUDGET: u64 = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapBound {
    #[serde(rename = "N")]
    pub n: usize,
    /// `(m1+m2)(q-1)/(m1 m2) · q^((N-2)/2)`, absent on overflow.
    pub bound: Option<u128>,
    /// `|M|(q-1)/m · q^((N-2)/2)` for the set found, if any.
    pub size: Option<u128>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRow {
    pub q: u64,
    pub p: u64,
    pub h: u32,
    pub m: u64,
    pub m1: u64,
    pub m2: u64,
    pub exact: bool,
    pub quartic: bool,
    /// `(m1+m2)(q-1)/(m1 m2)`.
    pub set_bound: u128,
    /// A maximal 3-independent subset of `Z_m` and how it was obtained.
    pub members: Option<Vec<u64>>,
    pub method: Option<String>,
    /// `|M|(q-1)/m`, the size of the corresponding union of cosets.
    pub arc_size: Option<u128>,
    pub caps: Vec<CapBound>,
}

/// Prime powers `q = p^h` in `[lo, hi]` with `p > 3`.
pub fn prime_powers(lo: u64, hi: u64) -> impl Iterator<Item = (u64, u64, u32)> {
    (lo.max(2)..=hi).filter_map(|q| arith::prime_power(q).filter(|&(p, _)| p > 3).map(|(p, h)| (q, p, h)))
}

/// Unordered splits `m = m1·m2` with `gcd(m1, m2) = 1` and `m1 ≤ m2`,
/// including `(1, m)`.
pub fn coprime_splits(m: u64) -> Vec<(u64, u64)> {
    arith::divisors(m)
        .into_iter()
        .map(|d| (d, m / d))
        .filter(|&(a, b)| a <= b && arith::gcd(a, b) == 1)
        .collect()
}

/// Finds a small maximal 3-independent set: a product set for a proper
/// split, otherwise an exhaustive search that falls back to greedy passes.
fn find_set(m1: u64, m2: u64) -> Option<(Vec<u64>, &'static str)> {
    let m = m1 * m2;
    if m > SCAN_INDEP_MAX_M {
        return None;
    }
    if m1 > 1 {
        return indep::product_candidates(m1, m2).next().map(|s| (s.members, "product"));
    }
    match indep::search(m, SCAN_INDEP_BUDGET, Strategy::Exhaustive) {
        Ok(s) => Some((s.members, "exhaustive")),
        Err(_) => indep::search(m, m, Strategy::Greedy).ok().map(|s| (s.members, "greedy")),
    }
}

fn lifted(base: u128, q: u64, n: usize) -> Option<u128> {
    arith::checked_pow_u128(q, ((n - 2) / 2) as u32).and_then(|f| f.checked_mul(base))
}

/// Rows for one field order, ordered by `m` then `m1`.
pub fn scan_q(q: u64, ns: &[usize]) -> Vec<ScanRow> {
    let Some((p, h)) = arith::prime_power(q) else { return Vec::new() };
    if p <= 3 {
        return Vec::new();
    }
    let mut rows = Vec::new();
    for m in arith::divisors(q - 1).into_iter().filter(|&m| m > 1 && arith::gcd(m, 6) == 1) {
        let gate = cubic::check_hypotheses(q, m).expect("m divides q-1 and is prime to 6");
        for (m1, m2) in coprime_splits(m) {
            let set_bound = (m1 + m2) as u128 * (q - 1) as u128 / m as u128;
            let found = find_set(m1, m2);
            let arc_size = found.as_ref().map(|(s, _)| s.len() as u128 * ((q - 1) / m) as u128);
            let caps = ns
                .iter()
                .map(|&n| CapBound { n, bound: lifted(set_bound, q, n), size: arc_size.and_then(|s| lifted(s, q, n)) })
                .collect();
            rows.push(ScanRow {
                q,
                p,
                h,
                m,
                m1,
                m2,
                exact: gate.exact,
                quartic: gate.quartic,
                set_bound,
                method: found.as_ref().map(|(_, how)| how.to_string()),
                members: found.map(|(s, _)| s),
                arc_size,
                caps,
            });
        }
    }
    rows
}

pub fn scan(qs: impl IntoIterator<Item = u64>, ns: &[usize]) -> Vec<ScanRow> {
    let mut qs: Vec<u64> = qs.into_iter().collect();
    qs.sort_unstable();
    qs.dedup();
    qs.into_iter().flat_map(|q| scan_q(q, ns)).collect()
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

/// Renders rows as CSV; members are separated by `;`.
pub fn to_csv(rows: &[ScanRow], ns: &[usize]) -> String {
    let mut out = String::from("q,p,h,m,m1,m2,exact,quartic,set_bound,members,method,arc_size");
    for n in ns {
        out.push_str(&format!(",cap_bound_N{n},cap_size_N{n}"));
    }
    out.push('\n');
    for r in rows {
        let members = r.members.as_ref().map(|s| s.iter().map(u64::to_string).collect::<Vec<_>>().join(";"));
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.q,
            r.p,
            r.h,
            r.m,
            r.m1,
            r.m2,
            r.exact,
            r.quartic,
            r.set_bound,
            opt(&members),
            opt(&r.method),
            opt(&r.arc_size)
        ));
        for c in &r.caps {
            out.push_str(&format!(",{},{}", opt(&c.bound), opt(&c.size)));
        }
        out.push('\n');
    }
    out
}
