//! Knowledge discovery over Unsupervised Cognition models.
//!
//! The crate grows a tree of running-average prototypes from a stream of
//! inputs ([`UcModel`]), snapshots its most generic representations as
//! patterns ([`patterns`]), correlates pattern features with a target
//! ([`stats`]), and turns those correlations into feature selections and
//! dimensionality reductions ([`selection`]), either from a single model or
//! from an ensemble of input orders. The [`pipeline`] module composes the
//! whole knowledge-discovery loop and hosts the evaluation harnesses that
//! compare it against the [`baselines`] (PCA and SOM).
//!
//! The `ucog` binary in this workspace exposes every step as a subcommand;
//! the guide under `book/` walks through the concepts chapter by chapter,
//! and its code snippets compile and run as this crate's doc-tests.
//!
//! ```
//! use ucog::{Dataset, Target, UcConfig, UcModel, Prediction};
//!
//! let data = Dataset::from_rows(
//!     vec!["size".into(), "weight".into()],
//!     vec![vec![1.0, 0.1], vec![0.1, 1.0]],
//!     "kind",
//!     Target::Categorical(vec!["a".into(), "b".into()]),
//! )?;
//! let model = UcModel::train(&data, UcConfig::default())?;
//! assert_eq!(model.classify(&[0.9, 0.2])?, Prediction::Label("a".into()));
//! # Ok::<(), ucog::Error>(())
//! ```

pub mod baselines;
pub mod dataset;
pub mod error;
pub mod model;
pub mod patterns;
pub mod pipeline;
pub mod selection;
pub mod stats;

pub use dataset::{Dataset, FeatureSet, NormParams, SampleTarget, SynthSpec, Target, TargetKind};
pub use error::{Error, Result};
pub use model::{Metric, Prediction, UcConfig, UcModel};
pub use patterns::Pattern;
pub use pipeline::{PipelineConfig, PipelineReport};
pub use selection::{ConfidenceMap, SelectionThresholds};
pub use stats::{CorrelationResult, FeatureCorrelationReport};

/// Version stamped into every serialized report and model document.
pub const SCHEMA_VERSION: u32 = 1;

// The guide's code blocks double as doc-tests; each chapter compiles against
// the public API, so the book can never drift from the crate.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/tree.md")]
    pub mod tree {}
    #[doc = include_str!("../../../book/src/patterns.md")]
    pub mod patterns {}
    #[doc = include_str!("../../../book/src/correlations.md")]
    pub mod correlations {}
    #[doc = include_str!("../../../book/src/selection.md")]
    pub mod selection {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    pub mod pipeline {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    pub mod baselines {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
