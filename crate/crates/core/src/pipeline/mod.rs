//! Dataset mechanics: corpus files, splits, retrieval-augmented SFT and DPO
//! records, complexity buckets and prediction scoring.

mod buckets;
mod corpus;
mod eval;
mod records;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

pub use buckets::{bucket_by_complexity, bucket_sizes, ComplexityBucket};
pub use corpus::{
    corpus_to_jsonl, load_corpus, parse_corpus, split_corpus, split_point, CorpusRecord,
    LoadedCorpus, Sample,
};
pub use eval::{
    evaluate_predictions, parse_predictions, strip_fences, BucketSummary, EvalReport,
    PredictionRecord, SampleScore, ScoreStatus,
};
pub use records::{
    build_augmented_input, emit_dpo_records, emit_sft_records, system_prompt, DpoOutput,
    DpoRecord, SftRecord, SkippedSample, FINAL_INSTRUCTION,
};

use crate::editops::EditError;
use crate::retrieval::RetrievalError;

/// A per-record problem, keyed by sample id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecordError {
    pub sample_id: String,
    pub message: String,
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.sample_id, self.message)
    }
}

fn list(errs: &[RecordError]) -> String {
    errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{} bad record(s): {}", .0.len(), list(.0))]
    Records(Vec<RecordError>),
    #[error("sample {sample_id}: {message}")]
    Invariant { sample_id: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Edit(#[from] EditError),
}

impl PipelineError {
    /// Whether the error comes from how the run was invoked rather than
    /// from the data.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            PipelineError::Usage(_)
                | PipelineError::Edit(EditError::BadTau(_) | EditError::NoSeeds)
                | PipelineError::Retrieval(RetrievalError::DuplicateId(_))
        )
    }
}

pub fn read_text(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), PipelineError> {
    std::fs::write(path, text).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One compact JSON object per line.
pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("record serializes"));
        out.push('\n');
    }
    out
}
