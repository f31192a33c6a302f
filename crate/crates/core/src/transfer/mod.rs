//! The transfer operator `F` on functions over the projection interval.

pub mod cantor;
pub mod conditions;
pub mod grid;
pub mod operator;

pub use cantor::{cantor_function, cantor_function_rational};
pub use conditions::{
    check_condition_A, check_condition_B, ConditionCertificate, ConditionKind, Verdict,
};
pub use grid::{tent, trapezoid, GridFunction, DEFAULT_GRID};
pub use operator::{
    apply_F, apply_F_power, cantor_carpet_density, closed_form_density_cantor_carpet,
    eigen_residual, normalized_iterate, psi_map, AffineMap, Iterates,
};
