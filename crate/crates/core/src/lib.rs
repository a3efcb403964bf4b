//! Exact and numerical toolkit for the dynamics of rational self-maps of P³:
//! blowup intersection theory, pullback actions on cohomology, degree growth
//! and dynamical degrees, invariant classes, Green potentials with Lelong
//! probes, and Monte Carlo wedge-product experiments.

pub mod cohomology;
pub mod degrees;
pub mod maps;
pub mod poly;
pub mod potentials;
pub mod ratmat;
pub mod rational;
mod rootcert;
pub mod sampling;
pub mod spectral;
pub mod wedge;

pub use cohomology::{cup11, make_blowup_space, pair, triple, BlowupSpace, Class11, Class22};
pub use degrees::{
    check_log_concavity, degree_sequence, dyn_degree_estimate, dynamical_lambdas,
    spectral_radius, stability_report, DegreeSequence, SpectralRadius, StabilityReport,
};
pub use maps::{
    catalog, catalog_map, compose, cremona_catalog_entry, evaluate, monomial_map, reduce,
    CohAction, EvalResult, MapFlags, RationalMap,
};
pub use poly::Poly;
pub use potentials::{
    green_iterate, invariance_residual, lelong_probe, phi1, raw_iterate, LelongReport,
    PotentialField,
};
pub use ratmat::RatMat;
pub use rational::Rat;
pub use sampling::{fixed_directions, pairwise_sum, sphere_samples};
pub use spectral::{
    cesaro_means, check_pseudo_identities, holomorphic_like_check, null_self_intersection_class,
    perron_pair, perron_pair_cesaro, CesaroReport, HolomorphicLikeReport, InvariantPair,
    PairMethod, PseudoIdentityReport,
};
pub use wedge::{
    involution_experiment, pair_left, pair_right, positivity_scan, push_measure,
    slice_experiment, slice_oracle, PairEstimate, WedgeExperiment,
};

use thiserror::Error;

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Errors shared across the toolkit. Validation-style errors name what was
/// wrong with the input; guard-style errors describe the numerical abort.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("classes live on blowups at {0} and {1} points")]
    MismatchedSpaces(usize, usize),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("intermediate polynomial exceeded the term budget of {0}")]
    TermBudget(usize),
    #[error("all four components are zero")]
    ZeroMap,
    #[error("cannot evaluate a map at the zero point")]
    ZeroPoint,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("no inverse map declared")]
    MissingInverse,
    #[error("no cohomology action or monomial matrix available")]
    MissingAction,
    #[error("NONSIMPLE_DOMINANT: dominant eigenvalue is not a simple real root")]
    NonsimpleDominant,
    #[error("ORTHOGONAL_PAIR: pairing of the eigenclasses is zero; normalization impossible")]
    OrthogonalPair,
    #[error("UNSTABLE_MAP: map is not flagged 1-stable downstairs")]
    UnstableMap,
    #[error("lambda {got} does not match the first degree {expected} within 1e-9")]
    LambdaMismatch { expected: f64, got: f64 },
    #[error("INDETERMINATE_PROXIMITY: point is too close to the indeterminacy locus")]
    IndeterminateProximity,
    #[error("NOT_CONVERGED: last sup delta {last_sup_delta:e} is not below 1e-6")]
    NotConverged { last_sup_delta: f64 },
    #[error("UNRELIABLE: {masked_fraction:.3} of probe samples were masked (limit 0.2)")]
    Unreliable { masked_fraction: f64 },
    #[error("guard abort: {fraction:.3} of samples fell inside the indeterminacy guard (limit 0.05)")]
    GuardAbort { fraction: f64 },
}

impl CoreError {
    /// True for numerical guard aborts (as opposed to input validation).
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            CoreError::TermBudget(_)
                | CoreError::IndeterminateProximity
                | CoreError::NotConverged { .. }
                | CoreError::Unreliable { .. }
                | CoreError::GuardAbort { .. }
        )
    }
}
