//! Parametric Presburger families `S_t = {x ∈ N^d : F(x, t)}` and
//! parametric Frobenius numbers.

pub mod eval;
pub mod formula;
pub mod frobenius;
pub mod props;

pub use eval::{containing_box, enumerate_set, eval_membership, sample_set, Cardinality, Compiled, Containment, EnumeratedSet, Membership};
pub use formula::{Atom, Family, Formula, Quant};
pub use frobenius::{certify, frobenius_fit, frobenius_number, frobenius_of, Frobenius, SemigroupSpec};
pub use props::{
    check_property1, check_property2, check_property3, check_property4, CheckConfig, FamilyReport, GfCheck, NamedFit, PeriodicSet,
    Property, Sample, Verdict, Witness, WitnessCheck,
};
