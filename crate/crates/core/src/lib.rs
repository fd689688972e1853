//! Dissociation bounds for propositional formulas.
//!
//! Expressions are parsed from a small text syntax, evaluated exactly over
//! rational probabilities, and bounded by replacing a variable with fresh
//! independent copies.

pub mod bounds;
pub mod dissociation;
pub mod error;
pub mod eval;
pub mod events;
pub mod expr;
pub mod figures;
pub mod identities;
pub mod parser;
pub mod prob;
pub mod verify;

pub use bounds::{
    assign_symmetric, compute_bound, dissociate_bound_multi, refute_better_assignment,
    validate_assignment, BoundOutcome, BoundReport, Direction, MultiBoundReport, PlanChoice,
};
pub use dissociation::{
    check_dissociation, dissociate, extract_template, DissociationResult, Grouping, Template,
    TemplateKind,
};
pub use error::{Error, Result};
pub use eval::{eval_enumerate, eval_shannon};
pub use events::{correlated_pair, correlation_of, encode_disjoint, DisjointDeclaration};
pub use expr::{complement, Expr};
pub use identities::{verify_identities, IdentityReport};
pub use parser::{format_expr, parse_expr, parse_probs};
pub use prob::{Prob, ProbAssignment};
