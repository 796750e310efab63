//! Fixtures shared by the benchmarks.

use capforge::{ArcSet, FieldSpec, NodalCubic};

/// Union of the cubic cosets `g^i·K`, `i ∈ members`, for index `m`.
pub fn coset_union(q: u64, m: u64, members: &[u64]) -> ArcSet {
    let c = NodalCubic::new(FieldSpec::with_order(q).expect("prime power")).expect("characteristic above 3");
    c.union_arc(m, members, true).expect("valid residues")
}
