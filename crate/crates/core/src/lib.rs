//! Route-first / cluster-second solvers for capacitated vehicle routing.
//!
//! The toolkit covers sixteen CVRP variants obtained by independently
//! toggling open routes, backhauls, a per-route distance limit and time
//! windows. A solution is built in two stages: a *giant tour* visiting
//! every customer once is constructed first (by a heuristic or by a small
//! trained policy), then an exact dynamic program splits the tour into
//! feasible vehicle routes of minimum total cost. Because the split is
//! optimal for any tour, tour construction can be optimized directly
//! against the split cost instead of the tour length.
//!
//! Modules:
//! - [`instance`]: problem data, seeded generators, variant flags.
//! - [`files`]: JSON instance/solution files.
//! - [`validate`]: standalone feasibility checker for solutions.
//! - [`split`]: the exact giant-tour splitter.
//! - [`routefirst`]: nearest-neighbor construction and local search.
//! - [`policy`]: masked softmax policy trained with REINFORCE against
//!   the split reward.
//! - [`oracle`]: brute-force references for small instances.

pub mod files;
pub mod instance;
pub mod oracle;
pub mod policy;
pub mod routefirst;
pub mod split;
pub mod validate;

pub use instance::{generate_instance, Instance, ScaleProfile, Solution, VariantFlags};
pub use split::{split, split_reward, ConstraintSemantics, GiantTour, LMode, SplitResult, TwMode};
