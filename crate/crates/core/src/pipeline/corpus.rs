use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{read_text, PipelineError, RecordError};
use crate::codecs::FormatKind;
use crate::graph::LdGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub sample_id: String,
    pub program_description: String,
    pub detailed_description: String,
    pub graph: LdGraph,
}

impl Sample {
    /// The two description fields joined by a newline.
    pub fn prompt(&self) -> String {
        format!("{}\n{}", self.program_description, self.detailed_description)
    }
}

/// One line of a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub sample_id: String,
    pub program_description: String,
    pub detailed_description: String,
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LoadedCorpus {
    pub samples: Vec<Sample>,
    /// Records dropped in lenient mode.
    pub skipped: Vec<RecordError>,
}

fn record_to_sample(rec: CorpusRecord, format: FormatKind) -> Result<Sample, String> {
    if rec.sample_id.is_empty() {
        return Err("empty sample_id".into());
    }
    if rec.program_description.trim().is_empty() && rec.detailed_description.trim().is_empty() {
        return Err("both descriptions are empty".into());
    }
    let graph = format.parse(&rec.code).map_err(|e| e.to_string())?;
    Ok(Sample {
        sample_id: rec.sample_id,
        program_description: rec.program_description,
        detailed_description: rec.detailed_description,
        graph,
    })
}

/// Parse corpus JSONL text. Strict mode fails with every bad record listed;
/// lenient mode drops them and reports them in [`LoadedCorpus::skipped`].
pub fn parse_corpus(text: &str, format: FormatKind, lenient: bool) -> Result<LoadedCorpus, PipelineError> {
    let mut out = LoadedCorpus::default();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        let rec: CorpusRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                out.skipped.push(RecordError {
                    sample_id: format!("<line {line_no}>"),
                    message: e.to_string(),
                });
                continue;
            }
        };
        let id = rec.sample_id.clone();
        if !seen.insert(id.clone()) {
            out.skipped.push(RecordError {
                sample_id: id,
                message: "duplicate sample_id".into(),
            });
            continue;
        }
        match record_to_sample(rec, format) {
            Ok(s) => out.samples.push(s),
            Err(message) => out.skipped.push(RecordError {
                sample_id: id,
                message,
            }),
        }
    }
    if !lenient && !out.skipped.is_empty() {
        return Err(PipelineError::Records(out.skipped));
    }
    Ok(out)
}

pub fn load_corpus(path: &Path, format: FormatKind, lenient: bool) -> Result<LoadedCorpus, PipelineError> {
    parse_corpus(&read_text(path)?, format, lenient)
}

/// Render samples as corpus JSONL with code in `format`.
pub fn corpus_to_jsonl(samples: &[Sample], format: FormatKind) -> Result<String, PipelineError> {
    let mut out = String::new();
    for s in samples {
        let code = format.render(&s.graph).map_err(|e| PipelineError::Invariant {
            sample_id: s.sample_id.clone(),
            message: e.to_string(),
        })?;
        let rec = CorpusRecord {
            sample_id: s.sample_id.clone(),
            program_description: s.program_description.clone(),
            detailed_description: s.detailed_description.clone(),
            code,
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    Ok(out)
}

/// Number of samples that go to the first part: `floor(fraction * n)`.
pub fn split_point(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64) + 1e-9).floor() as usize
}

/// Shuffle with ChaCha8 seeded by `seed`, then cut at [`split_point`].
pub fn split_corpus<T: Clone>(
    samples: &[T],
    sft_fraction: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>), PipelineError> {
    if !(sft_fraction > 0.0 && sft_fraction < 1.0) {
        return Err(PipelineError::Usage(format!(
            "split fraction must lie strictly between 0 and 1, got {sft_fraction}"
        )));
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = split_point(sft_fraction, samples.len());
    let pick = |ix: &[usize]| ix.iter().map(|&i| samples[i].clone()).collect::<Vec<T>>();
    Ok((pick(&order[..cut]), pick(&order[cut..])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, EdgeType, ElementType, Node};

    fn chain() -> LdGraph {
        LdGraph::from_parts(
            vec![
                Node::new(0, ElementType::NormallyOpen, "X0"),
                Node::new(1, ElementType::StandardCoil, "Y0"),
            ],
            vec![Edge::new(0, 1, EdgeType::Flow)],
        )
    }

    fn sample(id: &str) -> Sample {
        Sample {
            sample_id: id.into(),
            program_description: "motor".into(),
            detailed_description: "start X0".into(),
            graph: chain(),
        }
    }

    #[test]
    fn corpus_round_trip_all_formats() {
        let samples = vec![sample("a"), sample("b"), sample("c")];
        for f in [FormatKind::Xml, FormatKind::Json, FormatKind::Metaprogram] {
            let text = corpus_to_jsonl(&samples, f).unwrap();
            let loaded = parse_corpus(&text, f, false).unwrap();
            assert_eq!(loaded.samples, samples);
        }
    }

    #[test]
    fn cyclic_record_names_id() {
        let bad = CorpusRecord {
            sample_id: "cyc".into(),
            program_description: "p".into(),
            detailed_description: "d".into(),
            code: "G.add_node(0, ElementType=\"NormallyOpen\", Name=\"A\")\n\
                   G.add_node(1, ElementType=\"NormallyOpen\", Name=\"B\")\n\
                   G.add_edge(0, 1, type=\"Flow\")\nG.add_edge(1, 0, type=\"Flow\")\n"
                .into(),
        };
        let good = corpus_to_jsonl(&[sample("ok")], FormatKind::Metaprogram).unwrap();
        let text = format!("{}{}\n", good, serde_json::to_string(&bad).unwrap());
        match parse_corpus(&text, FormatKind::Metaprogram, false) {
            Err(PipelineError::Records(errs)) => {
                assert_eq!(errs.len(), 1);
                assert_eq!(errs[0].sample_id, "cyc");
            }
            other => panic!("expected record error, got {other:?}"),
        }
        let lenient = parse_corpus(&text, FormatKind::Metaprogram, true).unwrap();
        assert_eq!(lenient.samples.len(), 1);
        assert_eq!(lenient.skipped.len(), 1);
    }

    #[test]
    fn split_sizes() {
        let v: Vec<usize> = (0..10).collect();
        let (a, b) = split_corpus(&v, 0.8, 3).unwrap();
        assert_eq!((a.len(), b.len()), (8, 2));
        let (a2, b2) = split_corpus(&v, 0.8, 3).unwrap();
        assert_eq!((a.clone(), b.clone()), (a2, b2));
        let mut all: Vec<usize> = a.into_iter().chain(b).collect();
        all.sort();
        assert_eq!(all, v);
        assert_eq!(split_point(0.8, 13124), 10499);
        assert!(split_corpus(&v, 1.0, 0).is_err());
    }
}
