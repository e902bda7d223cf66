//! Multilingual deletion-discussion corpus builder: archive ingest, wikitext
//! parsing, stance and policy normalization, cross-language policy alignment,
//! corpus emission, metrics and linear baselines.

pub mod align;
pub mod corpus;
pub mod eval;
pub mod ingest;
pub mod labels;
pub mod lang;
pub mod pipeline;
pub mod policies;
pub mod scalar;
pub mod synth;
pub mod textmodels;
pub mod wikitext;

pub use lang::Language;
pub use scalar::Scalar;

pub type FeatureVectorF32 = textmodels::FeatureVector<f32>;
pub type FeatureVectorF64 = textmodels::FeatureVector<f64>;
pub type VocabularyF32 = textmodels::Vocabulary<f32>;
pub type VocabularyF64 = textmodels::Vocabulary<f64>;
pub type SoftmaxHeadF32 = textmodels::SoftmaxHead<f32>;
pub type SoftmaxHeadF64 = textmodels::SoftmaxHead<f64>;
pub type MultiTaskModelF32 = textmodels::MultiTaskLinearModel<f32>;
pub type MultiTaskModelF64 = textmodels::MultiTaskLinearModel<f64>;
pub type LinearTextModelF32 = textmodels::LinearTextModel<f32>;
pub type LinearTextModelF64 = textmodels::LinearTextModel<f64>;

/// Broad failure class, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Network,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Network => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Config => "config",
            ErrorKind::Data => "data",
            ErrorKind::Network => "network",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Lexicon(#[from] labels::LexiconError),
    #[error(transparent)]
    Policy(#[from] policies::PolicyError),
    #[error(transparent)]
    Align(#[from] align::AlignError),
    #[error(transparent)]
    Corpus(#[from] corpus::CorpusError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
    #[error(transparent)]
    Model(#[from] textmodels::ModelError),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use ingest::IngestError as I;
        match self {
            Error::Ingest(I::NetworkUnavailable(_) | I::RateLimited { .. } | I::MalformedResponse(_)) => ErrorKind::Network,
            Error::Ingest(I::InvalidDateRange { .. }) => ErrorKind::Config,
            Error::Lexicon(labels::LexiconError::MissingLexicon(_)) => ErrorKind::Config,
            Error::Policy(policies::PolicyError::ZeroThreshold) => ErrorKind::Config,
            Error::Corpus(corpus::CorpusError::InvalidPlan(_)) => ErrorKind::Config,
            Error::Model(textmodels::ModelError::InvalidRatio(..)) => ErrorKind::Config,
            Error::Config(_) => ErrorKind::Config,
            _ => ErrorKind::Data,
        }
    }
}
