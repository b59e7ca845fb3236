//! Numerical laboratory for the Iwasawa A-projection on matrix groups.
//!
//! The crate factors invertible matrices as g = vbar a k (unit lower
//! triangular, positive diagonal, orthogonal/unitary), evaluates the weight
//! functionals a^{Lambda_i}, a^{mu_j}, a^rho and their closed polynomial
//! forms on explicit unipotent families, fuzzes the exponent inequalities
//! those forms satisfy, and runs seeded Monte-Carlo scans that probe the
//! convergence of Harish-Chandra-type integrals over a unipotent group and
//! its commutator subgroup.
//!
//! Everything stochastic is counter-based: results depend only on (seed,
//! sample index), never on thread count or scheduling.

pub mod error;
pub mod matrix;
pub mod logspace;
pub mod rng;
pub mod iwasawa;
pub mod forms;
pub mod bounds;
pub mod quadrature;
pub mod integrate;
pub mod checks;

pub use bounds::BoundReport;
pub use error::{Error, Result};
pub use forms::{GroupSpec, RankOneParams};
pub use integrate::{Classification, DomainTag, IntegrandSpec, Sampler, ScanConfig, ScanReport};
pub use iwasawa::{IwasawaFactors, Ratio, WeightBasis, WeightCombo};
pub use matrix::{Field, Matrix, Scalar};
