//! Remainders `a`, `a_s`, step approximants `f_n`, `g_n` and limit
//! functions `λ`, `λ_s`: exact at b-adic points where a closed form exists,
//! certified enclosures otherwise.

pub mod certified;
mod profile;
mod ql;
mod rho;
mod step;

pub use certified::{pow_enclosure, CertifiedSummary, CertifiedValue};
pub use profile::{derive_tail_law, tail_sum, ProfileSummary, QLProfile, TailLaw};
pub use ql::{a_s_certified, a_s_exact, c_term, g_n, lambda_s_certified};
pub use rho::{
    a_certified, a_coeff, a_exact, digit_weight, f_n, f_n_numerator, lambda_rho, rho_profile, tail_identity_gate,
};
pub use step::{Cell, CoverKind, Frac, StepApprox, StepModel};

pub(crate) use step::{cmp_frac, ipow};
