//! Randomized lattice cubature and the ordered-region integrals behind the spacing tests.

pub mod lattice;
pub mod regions;

pub use lattice::{lattice_integrate, lattice_ratio, shift_means, LatticeRule, QmcBudget, QmcEstimate};
pub use regions::{
    consecutive_gaussian_pvalue, consecutive_student_pvalue, f_abc, gaussian_spacing_qmc, nested_i,
    ortho_pvalue_shortcut, ortho_pvalue_survival, rho_equal, student_spacing_qmc, tilde_f_abc,
};
