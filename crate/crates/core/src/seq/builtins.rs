use super::SequenceEngine;
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: [&str; 6] = [
    "rudin_shapiro",
    "rho",
    "thue_morse",
    "tm_sum",
    "tm_double_sum",
    "rs_sum",
];

/// Source text of a shipped `.seq` file.
pub fn builtin_source(name: &str) -> Result<&'static str> {
    Ok(match name {
        "rudin_shapiro" => include_str!("../../specs/rudin_shapiro.seq"),
        "rho" => include_str!("../../specs/rho.seq"),
        "thue_morse" => include_str!("../../specs/thue_morse.seq"),
        "tm_sum" => include_str!("../../specs/tm_sum.seq"),
        "tm_double_sum" => include_str!("../../specs/tm_double_sum.seq"),
        "rs_sum" => include_str!("../../specs/rs_sum.seq"),
        _ => return Err(Error::UnknownBuiltin(name.to_string())),
    })
}

pub fn builtin(name: &str) -> Result<SequenceEngine> {
    SequenceEngine::from_source(builtin_source(name)?)
}
