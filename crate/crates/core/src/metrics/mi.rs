use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiFormula {
    /// `max(0, 171 - 5.2 log2 V - 0.23 CC - 16.2 log2 LOC + 50 sin(sqrt(2.46 C)))`
    /// with `C` the comment ratio. Range `[0, 221]`.
    #[default]
    Classic,
    /// radon's variant: natural logs, `C` in percent converted to radians,
    /// rescaled to `[0, 100]`.
    RadonCompat,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MiError {
    #[error("comment density {0} outside [0, 1]")]
    CommentDensity(f64),
    #[error("{0} must be finite and non-negative")]
    Negative(&'static str),
}

fn log2_or_zero(x: f64) -> f64 {
    if x <= 1.0 {
        0.0
    } else {
        x.log2()
    }
}

pub fn maintainability_index(
    volume: f64,
    cyclomatic: f64,
    loc: f64,
    comment_density: f64,
    formula: MiFormula,
) -> Result<f64, MiError> {
    if !(0.0..=1.0).contains(&comment_density) {
        return Err(MiError::CommentDensity(comment_density));
    }
    for (name, v) in [("volume", volume), ("cyclomatic", cyclomatic), ("loc", loc)] {
        if !v.is_finite() || v < 0.0 {
            return Err(MiError::Negative(name));
        }
    }
    Ok(match formula {
        MiFormula::Classic => {
            let raw =
                171.0 - 5.2 * log2_or_zero(volume) - 0.23 * cyclomatic - 16.2 * log2_or_zero(loc)
                    + 50.0 * (2.46 * comment_density).sqrt().sin();
            raw.max(0.0)
        }
        MiFormula::RadonCompat => {
            if volume <= 0.0 || loc <= 0.0 {
                return Ok(100.0);
            }
            let c = (2.46 * (comment_density * 100.0).to_radians()).sqrt();
            let raw =
                171.0 - 5.2 * volume.ln() - 0.23 * cyclomatic - 16.2 * loc.ln() + 50.0 * c.sin();
            (raw * 100.0 / 171.0).clamp(0.0, 100.0)
        }
    })
}
