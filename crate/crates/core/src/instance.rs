//! Named instances: a sequence, its profile and the step model used for
//! covers, measures and box counts.

use std::sync::Arc;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::limitfn::certified::rat;
use crate::limitfn::{rho_profile, QLProfile, StepModel};
use crate::quasilinear::verify_quasilinear;
use crate::seq::{builtin, SequenceEngine};

pub const INSTANCE_NAMES: [&str; 5] = ["rho", "tm_sum", "rs_sum", "tm_double_sum", "constant"];

/// Range over which instance profiles take their `C`.
pub const PROFILE_RANGE: u64 = 1 << 14;

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub engine: Arc<SequenceEngine>,
    pub profile: Option<QLProfile>,
    pub model: Arc<StepModel>,
}

/// The declared `(α, β)` of a shipped profile instance.
pub fn declared_exponents(name: &str) -> Option<(BigRational, BigRational)> {
    match name {
        "tm_sum" => Some((rat(1, 1), rat(0, 1))),
        "rs_sum" => Some((rat(1, 2), rat(0, 1))),
        "tm_double_sum" => Some((rat(2, 1), rat(1, 1))),
        _ => None,
    }
}

impl Instance {
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "rho" => {
                let engine = Arc::new(builtin("rho")?);
                let model = StepModel::f_family(engine.clone())?;
                Ok(Instance {
                    name: name.into(),
                    engine,
                    profile: Some(rho_profile()),
                    model: Arc::new(model),
                })
            }
            "constant" => {
                let model = StepModel::constant(4)?;
                Ok(Instance {
                    name: name.into(),
                    engine: model.engine().clone(),
                    profile: None,
                    model: Arc::new(model),
                })
            }
            _ => {
                let (a, b) = declared_exponents(name).ok_or_else(|| Error::UnknownBuiltin(name.into()))?;
                Self::from_engine(name, Arc::new(builtin(name)?), &a, &b, None)
            }
        }
    }

    /// A profile instance over any engine; `C` is verified on
    /// `1 <= n <= PROFILE_RANGE` and the E family uses `D_4` unless overridden.
    pub fn from_engine(
        name: &str,
        engine: Arc<SequenceEngine>,
        alpha: &BigRational,
        beta: &BigRational,
        d4_override: Option<BigRational>,
    ) -> Result<Self> {
        let (_, profile) = verify_quasilinear(&engine, alpha, beta, PROFILE_RANGE)?;
        let model = StepModel::e_family(engine.clone(), &profile, d4_override)?;
        Ok(Instance {
            name: name.into(),
            engine,
            profile: Some(profile),
            model: Arc::new(model),
        })
    }

    /// The same instance with `D_4` replaced (E families only).
    pub fn with_d4(&self, d4: BigRational) -> Result<Self> {
        let profile = self
            .profile
            .as_ref()
            .filter(|_| self.model.kind() == crate::limitfn::CoverKind::E)
            .ok_or_else(|| Error::InvalidArgument(format!("`{}` has no E family", self.name)))?;
        let model = StepModel::e_family(self.engine.clone(), profile, Some(d4))?;
        Ok(Instance {
            model: Arc::new(model),
            ..self.clone()
        })
    }
}
