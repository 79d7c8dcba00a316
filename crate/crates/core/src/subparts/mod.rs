//! Star joinings, sub-part divisions and k-dominating sets.

pub mod cole_vishkin;
mod division;
mod division_det;
mod division_rand;
mod kdom;
pub mod star_join;

pub use division::SubPartDivision;
pub use star_join::{star_joining_det, star_joining_random, ClusterComm, Designation, ForestComm, StarJoining};
pub use division_det::{ceil_log2, subpart_division_det, DivisionError, DivisionStats, C_IT};
pub use division_rand::{subpart_division_random, C_P};
pub use kdom::{domination_radius, k_dominating_set};
