//! Bicovering arcs in `AG(2,q)` from cosets of the nodal cubic
//! `XY = (X-1)³`, their lifts to complete caps in `AG(N,q)`, and brute-force
//! verifiers for both.

pub mod arith;
pub mod auxcurve;
pub mod cubic;
pub mod field;
pub mod indep;
pub mod lift;
pub mod plane;
pub mod scan;
pub mod search;
pub mod verify;

pub use cubic::{check_hypotheses, CubicError, GateReport, GateRule, NodalCubic};
pub use field::{FieldElement, FieldError, FieldSpec};
pub use indep::{IndepError, IndepSet};
pub use lift::{lift_arc, Cap, LiftError, LiftedCap};
pub use plane::{ArcSet, Point2, PointN, SegmentPosition};
pub use verify::{Mode, VerifyConfig, VerifyError, VerifyReport};
