use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph `{graph_id}`: property `{property}` failed: {source}")]
    Property {
        graph_id: String,
        property: String,
        #[source]
        source: Box<Error>,
    },

    #[error("every node is isolated, no reachable pairs")]
    NoReachablePairs,

    #[error("base dataset is empty")]
    EmptyBase,

    #[error("projected dataset is empty")]
    EmptyTest,

    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("split {split} received no samples")]
    EmptySplit { split: usize },

    #[error("held-out values have zero standard deviation; supply an explicit kernel gamma")]
    DegenerateHeld,

    #[error("all weights are zero")]
    AllZeroWeights,

    #[error("test property {test} must differ from split property {split}")]
    PropertyIndexMismatch { split: usize, test: usize },

    #[error("property index {index} out of range for {count} registered properties")]
    PropertyOutOfRange { index: usize, count: usize },

    #[error("no cells in the requested aggregation slice")]
    EmptySlice,

    #[error("property column {index} is constant")]
    ConstantProperty { index: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("sample manifest split hash {found} does not match requested cell hash {expected}")]
    ManifestMismatch { expected: String, found: String },

    #[error("weighted sample is degenerate: {0}")]
    DegenerateSample(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by the requested configuration rather than
    /// by the data.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::PropertyOutOfRange { .. }
                | Error::PropertyIndexMismatch { .. }
        )
    }
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}
