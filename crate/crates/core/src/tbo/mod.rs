//! Tree-based optimization: recursive splitting of the search box with a
//! region-local search in every child and a biased descent into one of them.

mod entry;
mod run;
mod schedule;
mod split;
mod theory;

pub use entry::{entry_probabilities, select_region, select_region_with};
pub use run::{run_tbo, EntryContext, EntryFn, EntryRule, IterationRecord, TboConfig, TboResult, TboRun};
pub use schedule::{
    allocate_particles_by_size, schedule_particles, schedule_subiters, update_global_best, Best, Schedule,
};
pub use split::{
    apply_split, plan_split, shrink_bounds, BranchingContext, BranchingFn, BranchingSchedule, Cut, Orientation,
    SplitPlan, SplitPointRule, SplitWindow, TboVariant,
};
pub use theory::{required_depth, time_complexity_class, total_iterations, RequiredDepth, TreeKind};
