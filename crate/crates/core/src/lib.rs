//! Exact arithmetic for classes on blowups of the plane and of the
//! Hirzebruch surfaces `F0`, `F1`, with the degeneration machinery used to
//! bound the Seshadri-type constant of very general points.

pub mod cache;
pub mod cremona;
pub mod error;
pub mod interp;
pub mod mosaic;
pub mod nagata;
pub mod nef;
pub mod notation;
pub mod picard;
pub mod quadratic;

pub use cremona::{
    apply_rule, elementary_quadratic, reduce, rule1, rule2, rule3, rule4, ReduceStatus,
    Reduction, Rule, TransformKind, TransformLog, TransformParams, TransformStep,
};
pub use error::{Error, Result};
pub use notation::{parse_class, AnyClass};
pub use picard::{
    canonical_class, chi, chi_class, from_ruled, isqrt, nagata_deficit, to_ruled, NagataDeficit,
    PicardClass, RuledClass, Sign, Surface,
};
pub use quadratic::{QuadraticExpr, Rational};
pub use nef::{is_nef_small, lemma_step5, minus_one_classes, LemmaReport, NefVerdict};
pub use mosaic::{
    check_good, conservation_report, general_fibre, restrict, restrict_axis, CandidateCycle,
    Direction, Mosaic, MosaicBundle, MosaicData, SubaxisId,
};
pub use nagata::trace::{trace, Claim, Check, Relation, TraceReport, Verdict};
pub use nagata::{
    corollary_condition, nef_target, profile, scan, theorem_covers, CorollaryReport, Coverage,
    NagataProfile, NefTarget,
};
pub use interp::{
    cremona_invariance_check, h0_class, h0_generic, hr_check, nef_cross_check, H0Result,
    InterpolationProblem, OracleParams, TransformSpec,
};
