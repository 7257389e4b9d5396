//! Constructions of large copies, almost disjoint families and antichains
//! of copies.

mod ad;
mod antichains;
mod diagonal;
mod greedy;

pub use ad::{ad_member, ad_separation, AdFamily, AdMember, AdParams, AdTerm, DenseClass, FiberMap, Separation};
pub use antichains::{
    bn_antichain, bn_refinement, cn_lift_antichain, cn_refinement, d_antichain, d_compat_witness, interval_refinement,
    q_interval_antichain, supp, DCompat, LiftRefinement, Refinement,
};
pub use diagonal::{
    column_head, cs_diagonal, family_by_name, CantorColumns, ColumnsWithOverlap, Diagonal, DiagonalCert, FinitePoset,
    ProductFamily, TreeBranches, FAMILIES, SCAN_LIMIT,
};
pub use greedy::{default_horizon, greedy_table, partition_large_copies, partition_with_horizon, GreedyTable, Partition};
