//! Reproducible random tensor ensembles and the moment statistic they feed
//! into the Chernoff-type bounds.

mod sampling;
mod seeds;
mod xi;

pub use sampling::{
    conjugate_diagonal, independent_copies, random_unitary, sample_commuting_family, sample_hermitian,
    sample_pd_bounded, sample_symmetric_bernoulli, EigenLaw, Ensemble, EnsembleSpec, Family,
};
pub use seeds::{SeedPolicy, Stream, StreamRng};
pub use xi::{xi_closed_form, xi_closed_form_diagonal, xi_from_samples, xi_monte_carlo, XiEstimate, XiStatistic};
