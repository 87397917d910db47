//! Static metrics for Python sources: line counts, cyclomatic complexity,
//! Halstead volume, maintainability index and function count, all computed
//! from the token stream.

mod cyclomatic;
mod expr;
mod halstead;
pub mod lexer;
mod lines;
mod mi;

use serde::{Deserialize, Serialize};

pub use cyclomatic::{cyclomatic_complexity, cyclomatic_in, decision_points};
pub use halstead::{
    classic_counts, halstead_counts, halstead_volume, reference_counts, ClassificationTable,
    HalsteadConvention, HalsteadCounts, LexemeClass, TableError,
};
pub use lexer::{tokenize, Token, TokenKind, TokenStream};
pub use lines::{function_count, function_count_in, line_counts, sloc_and_comments, LineCounts};
pub use mi::{maintainability_index, MiError, MiFormula};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeMetrics {
    pub halstead_volume: f64,
    pub cyclomatic: usize,
    pub sloc: usize,
    pub comment_density: f64,
    pub maintainability: f64,
    pub function_count: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsConfig {
    pub halstead: HalsteadConvention,
    pub mi: MiFormula,
    /// Count only definitions at column 0.
    pub top_level_only: bool,
}

pub fn analyze(source: &str) -> CodeMetrics {
    analyze_with(source, &MetricsConfig::default())
}

pub fn analyze_with(source: &str, config: &MetricsConfig) -> CodeMetrics {
    let stream = tokenize(source);
    let lines = line_counts(&stream);
    let halstead_volume = halstead_counts(&stream, config.halstead).volume();
    let cyclomatic = cyclomatic_in(&stream);
    let maintainability = maintainability_index(
        halstead_volume,
        cyclomatic as f64,
        lines.sloc as f64,
        lines.comment_density,
        config.mi,
    )
    .expect("line counts yield a density in [0, 1]");
    CodeMetrics {
        halstead_volume,
        cyclomatic,
        sloc: lines.sloc,
        comment_density: lines.comment_density,
        maintainability,
        function_count: function_count_in(&stream, config.top_level_only),
    }
}
