//! Monte Carlo certification of the inequalities against their bounds.

mod decoupling;
mod dominance;
mod inequalities;
mod tail;

pub use decoupling::{
    decoupling_exact, distinct_tuples, estimate_decoupling, CouplingKernel, DecouplingReport, Kernel, ProductKernel,
    ZeroKernel,
};
pub use dominance::{
    evaluate_bounds, run_dominance_experiment, BlockSource, BoundReport, BoundRow, ChernoffAssumptionReport, DeclaredOverrides, DominanceConfig, DominanceMode,
    DominanceReport, DominanceRow, Verdict, WeightGenerator,
};
pub use inequalities::{
    apply_functional, check_bernoulli_chaos, check_paley_zygmund, check_scalar_hanson_wright, check_symmetrization,
    check_symmetrization_exact, norming_functional, ChaosReport, ChaosRow, ChaosTerm, Enumeration, PaleyZygmundReport,
    ScalarHwReport, ScalarHwRow, SymmetrizationReport, SymmetrizationRow, ZeroMeanFamily,
};
pub use tail::{
    clopper_pearson, draw_statistic, empirical_tail, tails_from_values, Draws, TailEstimate, CONFIDENCE,
    MAX_EXCLUDED_FRACTION, MIN_TRIALS,
};
