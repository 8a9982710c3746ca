//! Exact identification analysis for the random utility model.
//!
//! A complete system of choice probabilities is mapped to its probability
//! flow diagram on the subset lattice, whose edge weights are the
//! Block–Marschak polynomials. From the diagram the crate decides
//! rationalizability, decides whether the rationalizing distribution over
//! linear orders is unique, and builds representations and explicit
//! non-uniqueness witnesses. All arithmetic is exact.
//!
//! ```
//! use rumflow::{fixtures, induce_choice_system, is_unique};
//!
//! let (_, nu1, nu2) = fixtures::fishburn();
//! let sys = induce_choice_system(&nu1);
//! assert_eq!(sys, induce_choice_system(&nu2));
//! assert!(!is_unique(&sys).unwrap().is_unique());
//! ```

pub mod decomposition;
pub mod error;
pub mod fixtures;
pub mod flow;
pub mod identification;
pub mod io;
pub mod model;
pub mod oracle;

/// Exact rational with arbitrary-precision numerator and denominator.
pub type Rational = num_rational::BigRational;

pub use decomposition::{
    alternative_representations, enumerate_representations, greedy_representation, scrum_check,
    DecompositionTrace, Enumeration, ExogenousOrder, ScrumVerdict,
};
pub use error::{Error, Result, Violation};
pub use flow::{
    bm_polynomial, bm_polynomial_mobius, build_flow_diagram, contour_mass, is_rationalizable,
    path_supported, FlowDiagram, Rationalizability,
};
pub use identification::{
    find_branching_pair, is_unique, restrict_system, support_identified, theorem2_check,
    BranchingWitness, SupportVerdict, Theorem2Verdict, Theorem2Witness, Uniqueness,
};
pub use model::{
    best_in_menu, induce_choice_system, order_to_path, path_to_order, upper_contour_set,
    ChoiceSystem, LinearOrder, Menu, Mixture, Path, Universe,
};
