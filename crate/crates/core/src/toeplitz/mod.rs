//! Toeplitz systems and their l^p-optimal circulant preconditioners.

mod circulant;
mod diagnostics;
mod operator;
mod pcg;

pub use circulant::{
    circulant_solve, circulant_spectrum, correct_spectrum, frobenius_circulant, lp_circulant_minimizer,
    model_circulant_spectrum, strang_type_correction, weighted_lp_center, CirculantMatrix, CirculantSpectrum,
    SINGULAR_REL_TOL,
};
pub use diagnostics::{
    preconditioned_spectrum_diagnostic, select_p_tilde, symmetric_eigenvalues, ClusterReport, PTildeMode,
    DEFAULT_EPSILON, DENSE_LIMIT,
};
pub use operator::{build_toeplitz, lp_matrix_norm, ModelSymbol, ToeplitzOperator, ToeplitzSymbol};
pub use pcg::{pcg_solve, PcgOptions, SolveReport, SolveStatus, DEFAULT_TOL};
