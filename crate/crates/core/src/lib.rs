//! Index of sequences over finite cyclic groups.
//!
//! For a sequence `S = (n_1 g) ... (n_k g)` over `Z/nZ` the index is the
//! minimum over units `m` of `(sum |m n_i|_n) / n`. This crate computes it
//! exactly, enumerates minimal zero-sum sequences, and produces checkable
//! certificates (a unit `m` with transformed sum `n`) that the index is one.

pub mod error;
pub mod harness;
pub mod normal_form;
pub mod residue;
pub mod sequence;
pub mod witness;

pub use error::{Error, Result};
pub use harness::{
    enumerate_minimal, orbit_canonical, search_high_index, verify_conjecture, VerificationReport,
    VerifyOptions,
};
pub use normal_form::{
    check_reduction_constraints, content, min_prime_powers, reduce_by_content,
    sufficient_condition_onesided, sufficient_condition_sum3n, to_normal_form, ConstraintReport,
    NormalForm, NormalizationOutcome, PrimePowerParams, Trail,
};
pub use residue::{factorize, mod_inverse, reduce_mod, units, GroupOrder, Residue};
pub use sequence::{
    apply_unit, index, is_minimal_zero_sum, is_zero_sum, norm_under, IndexValue, Sequence,
};
pub use witness::{
    candidate_multipliers, compute_k1, compute_l, condition_a, condition_b, find_witness,
    interval_integers, verify_witness, CandidateTag, Certificate, HighIndexEvidence,
    IntervalDiagnostics, Rule, Witness, WitnessOutcome,
};
