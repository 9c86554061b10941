//! Left-invariant sub-Riemannian geometry on `SO₀(2,1)`.
//!
//! The distribution is spanned by the boosts `a`, `b` at the identity with
//! the metric making them orthonormal. The crate evaluates geodesics in
//! closed form, computes the distance between arbitrary elements by a case
//! analysis on `(c11, |η|)`, classifies elements against the cut locus and
//! the conjugate set, and ships a brute-force shooting oracle that checks
//! the solver without sharing any of its logic.
//!
//! ```
//! use so21::{distance_from_identity, boost, CaseLabel};
//!
//! let r = distance_from_identity(&boost(1.0)).unwrap();
//! assert_eq!(r.case, CaseLabel::Sim);
//! assert!((r.d - 1.0).abs() < 1e-12);
//! ```
//!
//! Matrix entries are named `c_ij` with 1-based indices and listed
//! row-major everywhere in the public interface.

pub mod distance;
pub mod error;
pub mod exec;
pub mod geodesic;
pub mod io;
pub mod lorentz;
pub mod oracle;
pub mod roots;
pub mod sample;
pub mod structure;

pub use distance::{
    classify_case, distance, distance_batch, distance_from_identity, minimizing_geodesics, solve_beta, CaseLabel,
    DistanceResult, SolverOptions,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use geodesic::{geodesic_point, geodesic_point_product, geodesic_trace, mn_scalars, recover_phi, GeodesicParams};
pub use lorentz::{boost, exp_algebra, rotation, AlgebraElement, GroupElement, DEFAULT_TOL};
pub use oracle::{shoot_min_time, verify_distance, GridSpec, OracleReport};
pub use structure::{classify, cut_time, decompose, first_conjugate_time, in_conjugate_set, in_cut_locus};
