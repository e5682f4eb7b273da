//! Graded decompositions of closed subspaces of truncated vector-valued Hardy
//! spaces on the polydisk, and numerical verification of the near-inner /
//! full-projection characterization of invariant subspaces.
//!
//! The space `H²_d(Dⁿ)` is truncated at total degree `N` and treated as the
//! quotient by the monomials of degree above `N`: products are truncated and
//! the part that falls off is tracked as an ℓ² tail bound on every
//! [`Element`]. Checks report [`Verdict::Inconclusive`] rather than guess when
//! that bound is too large to decide.
//!
//! ```
//! use hardy_beurling::corpus::{example, ExampleParams};
//! use hardy_beurling::properties::Verdict;
//!
//! let sc = example("ex6.2", &ExampleParams::default()).unwrap();
//! let v = sc.verify().unwrap();
//! assert_eq!(v.triple(), (Verdict::Pass, Verdict::Pass, Verdict::Pass));
//! ```

pub mod algebra;
pub mod beurling;
pub mod corpus;
pub mod decomposition;
pub mod elements;
pub mod grading;
pub mod io;
mod linalg;
pub mod properties;
pub mod subspaces;
pub mod tolerance;

pub use algebra::Poly;
pub use beurling::{synthesize, verify_beurling, SynthesisTrace, TheoremVerdict};
pub use corpus::Scenario;
pub use decomposition::{decompose_subspace, GradedDecomposition};
pub use elements::{Element, Space, Valuation};
pub use grading::MultiIndex;
pub use properties::{CheckOptions, PropertyId, PropertyReport, Verdict};
pub use subspaces::SubspaceBasis;
pub use tolerance::Tolerances;
