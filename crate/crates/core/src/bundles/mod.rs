//! Bundles over chart nerves: transition cocycles with rational-function
//! entries, Atiyah cocycles, connections, curvature and characteristic forms.

pub mod atiyah;
pub mod cocycle;
pub mod curvature;
pub mod forms;
pub mod nerve;
pub mod picard;
pub mod poly;
pub mod ratfunc;

pub use atiyah::{
    atiyah_cocycles, check_connection_law, gh_connection_search, AtiyahData, ConnectionData, ConnectionKind, SearchOutcome,
};
pub use cocycle::{check_gh_cocycle, validate_cocycle, CocycleReport, GhReport, OverlapCheck, PrincipalCocycle, TransitionCocycle};
pub use curvature::{
    chern_connection, chern_weil, curvature, elementary_invariant, transgression, CharacteristicClass, ChernConvention,
    ChernData, CurvatureData, TransgressionReport,
};
pub use forms::{FormShape, MForm, RForm};
pub use nerve::{BundleError, ChartNerve, GlueSpec};
pub use picard::{bott_dims, cech_oracle_p1, default_truncation, dual, residue_degree, tensor, triviality, OracleResult, Triviality};
pub use poly::{Poly, Var, VarNames};
pub use ratfunc::RationalFunction;
