//! Defect polynomials, joint spectra and m-inverses of commuting matrix tuples.

pub mod defects;
pub mod error;
pub mod generators;
pub mod interface;
pub mod linalg;
pub mod minverse;
pub mod multiindex;
pub mod report;
pub mod reproduce;
pub mod rng;
pub mod spectra;
pub mod tuples;

pub use defects::{
    classify, isometry_defect, partial_isometry_defect, probe_states, scalar_defect,
    shifted_scalar_defect, ClassificationReport, DefectResult, DefectSummary, SignConvention,
};
pub use error::{Error, Result};
pub use generators::{
    random_commuting_tuple, random_instance, scaled_single, worked_example, GeneratorSpec, Scheme,
    WorkedExample,
};
pub use interface::{
    load_tuple_file, parse_tuple_file, run_audit, serialize_tuple, to_json, AuditInput,
    ParsedTuple, TupleFile,
};
pub use linalg::{
    adjoint, eigendecomposition, frobenius_norm, null_space_basis, unitary_triangularize,
    ComplexMatrix, SubspaceBasis, ToleranceModel, C64,
};
pub use minverse::{
    beta, beta_sided, expand_power_sum, is_left_m_inverse, is_right_m_inverse, BetaMethod,
    BetaResult, CoefficientMode, PowerSumExpansion,
};
pub use multiindex::{
    binomial, enumerate_multiindices, factorial, multinomial_weight, pascal_multinomial,
    pochhammer_descending, MultiIndex,
};
pub use report::{notes, AuditReport, Claim, Verdict, Witness};
pub use reproduce::{reproduce_example, Reproduction, ReproductionRow};
pub use spectra::{
    joint_point_spectrum, joint_spectrum, simultaneous_triangularize, spectral_radius,
    zero_variety_member, JointEigenpair, JointSpectrumResult, Triangularization,
};
pub use tuples::{OperatorTuple, QuasinormalFlags, ReducingCheck};
