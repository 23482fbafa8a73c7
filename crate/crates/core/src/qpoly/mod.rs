//! Exact univariate quasi-polynomials and the common tools built on them:
//! eventual comparison, rounding, both division statements, gcds with
//! Bézout witnesses and fit-and-verify.

pub mod division;
pub mod euclid;
pub mod fit;
pub mod order;
pub mod poly;
pub mod quasi;
pub mod ratfun;

/// Residue-class splitting refuses to build periods beyond this.
pub const DEFAULT_PERIOD_CAP: u64 = 10_000;

pub use division::{divmod_degree, divmod_numeric, floor_ratio, ratio_limit_poly, DegreeDivision};
pub use euclid::{gcd_bezout, GcdResult};
pub use fit::{fit_eventual_qp, fit_integer_oracle, interpolate, FitReport, FitSearch, Residual};
pub use order::{compare_eventual, ClassVerdict, Comparison};
pub use poly::{parse_rational, rat, rat_frac, rational_to_string, Poly};
pub use quasi::{parse_qp, EventualQP, QuasiPolynomial, ResidueClass};
pub use ratfun::RationalFunction;
