use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PipelineError, Sample};
use crate::codecs::FormatKind;
use crate::editops::{
    generate_negatives, select_hard_negative, EditConfig, EditError, GedConfig, PairProvenance,
};
use crate::graph::{graph_equal, LdGraph};
use crate::retrieval::Bm25Index;

pub const FINAL_INSTRUCTION: &str = "Based on the given input, generate the corresponding code: ";

const USER: &str = "<|user|>";
const ASSISTANT: &str = "<|assistant|>";

pub fn system_prompt(format: FormatKind) -> &'static str {
    match format {
        FormatKind::Xml => include_str!("../../assets/system_prompts/xml.txt"),
        FormatKind::Json => include_str!("../../assets/system_prompts/json.txt"),
        FormatKind::Metaprogram => include_str!("../../assets/system_prompts/metaprogram.txt"),
    }
}

/// Conversation text: one user/assistant turn pair per retrieved example
/// (at most `k`, in the given order), then the final user turn carrying
/// the query. Turns are `marker + "\n" + content`, joined by `"\n"`.
pub fn build_augmented_input<P: AsRef<str>, C: AsRef<str>>(
    query: &str,
    retrieved: &[(P, C)],
    k: usize,
) -> String {
    let mut turns = Vec::with_capacity(2 * k.min(retrieved.len()) + 1);
    for (prompt, code) in retrieved.iter().take(k) {
        turns.push(format!("{USER}\n{}", prompt.as_ref()));
        turns.push(format!("{ASSISTANT}\n{}", code.as_ref()));
    }
    turns.push(format!("{USER}\n{FINAL_INSTRUCTION}{query}"));
    turns.join("\n")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftRecord {
    pub sample_id: String,
    pub system: String,
    /// Sample ids of the retrieved examples, best first.
    pub retrieved: Vec<String>,
    pub input: String,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpoRecord {
    pub sample_id: String,
    pub system: String,
    pub retrieved: Vec<String>,
    pub input: String,
    pub chosen: String,
    pub rejected: String,
    pub provenance: PairProvenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedSample {
    pub sample_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DpoOutput {
    pub records: Vec<DpoRecord>,
    pub skipped: Vec<SkippedSample>,
}

fn invariant(sample_id: &str, message: impl Into<String>) -> PipelineError {
    PipelineError::Invariant {
        sample_id: sample_id.to_string(),
        message: message.into(),
    }
}

/// Render `graph` and confirm the text decodes back to an equal graph.
fn render_checked(graph: &LdGraph, format: FormatKind) -> Result<String, String> {
    let text = format.render(graph).map_err(|e| e.to_string())?;
    let back = format.parse(&text).map_err(|e| e.to_string())?;
    if !graph_equal(&back, graph) {
        return Err(format!("{} rendering does not decode to the same graph", format.as_str()));
    }
    Ok(text)
}

/// Renderings of the retrieval pool, keyed by sample id.
struct Pool<'a> {
    samples: BTreeMap<&'a str, (&'a Sample, String)>,
}

impl<'a> Pool<'a> {
    fn new(pool: &'a [Sample], format: FormatKind) -> Result<Pool<'a>, PipelineError> {
        let rendered: Vec<_> = pool
            .par_iter()
            .map(|s| {
                render_checked(&s.graph, format)
                    .map(|code| (s.sample_id.as_str(), (s, code)))
                    .map_err(|m| invariant(&s.sample_id, m))
            })
            .collect();
        let samples = rendered.into_iter().collect::<Result<_, _>>()?;
        Ok(Pool { samples })
    }

    fn augment(
        &self,
        sample: &Sample,
        index: &Bm25Index,
        k: usize,
    ) -> Result<(Vec<String>, String), PipelineError> {
        let hits = index.top_k(&sample.prompt(), k, Some(&sample.sample_id));
        let mut ids = Vec::with_capacity(hits.len());
        let mut pairs = Vec::with_capacity(hits.len());
        for h in hits {
            let (s, code) = self.samples.get(h.sample_id.as_str()).ok_or_else(|| {
                invariant(
                    &sample.sample_id,
                    format!("retrieved `{}` is not in the retrieval pool", h.sample_id),
                )
            })?;
            pairs.push((s.prompt(), code.as_str()));
            ids.push(h.sample_id);
        }
        Ok((ids, build_augmented_input(&sample.prompt(), &pairs, k)))
    }
}

fn by_id(samples: &[Sample]) -> Vec<&Sample> {
    let mut v: Vec<&Sample> = samples.iter().collect();
    v.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    v
}

/// One SFT record per sample, in sample-id order, retrieving from
/// `samples` themselves with the sample left out of its own results.
pub fn emit_sft_records(
    samples: &[Sample],
    index: &Bm25Index,
    format: FormatKind,
    k: usize,
) -> Result<Vec<SftRecord>, PipelineError> {
    let pool = Pool::new(samples, format)?;
    let system = system_prompt(format);
    by_id(samples)
        .into_par_iter()
        .map(|s| {
            let (retrieved, input) = pool.augment(s, index, k)?;
            let output = pool.samples[s.sample_id.as_str()].1.clone();
            Ok(SftRecord {
                sample_id: s.sample_id.clone(),
                system: system.to_string(),
                retrieved,
                input,
                output,
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// One preference record per sample of `samples`, retrieving examples from
/// `pool` through `index`. Only edited candidates that render in `format`
/// compete for the rejected side; samples left without a usable candidate
/// are reported in [`DpoOutput::skipped`].
pub fn emit_dpo_records(
    samples: &[Sample],
    pool: &[Sample],
    index: &Bm25Index,
    format: FormatKind,
    k: usize,
    edit: &EditConfig,
    ged: &GedConfig,
) -> Result<DpoOutput, PipelineError> {
    edit.check()?;
    let pool = Pool::new(pool, format)?;
    let system = system_prompt(format);
    let results: Vec<Result<Result<DpoRecord, SkippedSample>, PipelineError>> = by_id(samples)
        .into_par_iter()
        .map(|s| {
            let skip = |reason: String| {
                Ok(Err(SkippedSample {
                    sample_id: s.sample_id.clone(),
                    reason,
                }))
            };
            let chosen = match render_checked(&s.graph, format) {
                Ok(t) => t,
                Err(m) => return Err(invariant(&s.sample_id, m)),
            };
            let candidates = match generate_negatives(&s.graph, edit) {
                Ok(c) => c,
                Err(EditError::EmptyGraph) => return skip("empty graph".into()),
                Err(e) => return Err(e.into()),
            };
            let usable: Vec<_> = candidates
                .into_iter()
                .filter(|c| render_checked(&c.graph, format).is_ok())
                .collect();
            if usable.is_empty() {
                return skip(format!("no edited candidate renders as {}", format.as_str()));
            }
            let pair = match select_hard_negative(&s.graph, &usable, edit.tau, ged) {
                Ok(p) => p,
                Err(e @ (EditError::Degenerate | EditError::NoCandidates)) => {
                    return skip(e.to_string())
                }
                Err(e) => return Err(e.into()),
            };
            let rejected = format
                .render(&pair.rejected)
                .map_err(|e| invariant(&s.sample_id, e.to_string()))?;
            if rejected == chosen {
                return Err(invariant(&s.sample_id, "rejected text equals chosen text"));
            }
            let (retrieved, input) = pool.augment(s, index, k)?;
            Ok(Ok(DpoRecord {
                sample_id: s.sample_id.clone(),
                system: system.to_string(),
                retrieved,
                input,
                chosen,
                rejected,
                provenance: pair.provenance,
            }))
        })
        .collect();
    let mut out = DpoOutput::default();
    for r in results {
        match r? {
            Ok(rec) => out.records.push(rec),
            Err(skip) => out.skipped.push(skip),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::Bm25Params;
    use crate::synthgen::{generate_corpus, SynthParams};

    #[test]
    fn augmented_input_shapes() {
        let none: [(&str, &str); 0] = [];
        assert_eq!(
            build_augmented_input("q", &none, 3),
            format!("<|user|>\n{FINAL_INSTRUCTION}q")
        );
        let one = build_augmented_input("q", &[("p1", "c1"), ("p2", "c2")], 1);
        assert_eq!(
            one,
            format!("<|user|>\np1\n<|assistant|>\nc1\n<|user|>\n{FINAL_INSTRUCTION}q")
        );
        let three = build_augmented_input("q", &[("a", "1"), ("b", "2"), ("c", "3")], 3);
        assert_eq!(three.matches("<|user|>").count(), 4);
        assert_eq!(three.matches("<|assistant|>").count(), 3);
        assert!(three.find("\na\n").unwrap() < three.find("\nb\n").unwrap());
    }

    fn corpus(n: usize) -> Vec<Sample> {
        generate_corpus(&SynthParams {
            n_samples: n,
            min_nodes: 4,
            max_nodes: 14,
            seed: 5,
            ..SynthParams::default()
        })
        .unwrap()
    }

    fn index(samples: &[Sample]) -> Bm25Index {
        Bm25Index::build(
            samples.iter().map(|s| (s.sample_id.clone(), s.prompt())),
            Bm25Params::default(),
        )
        .unwrap()
    }

    #[test]
    fn sft_records_leave_one_out() {
        let samples = corpus(8);
        let idx = index(&samples);
        for f in FormatKind::ALL {
            let recs = emit_sft_records(&samples, &idx, f, 1).unwrap();
            assert_eq!(recs.len(), 8);
            for r in &recs {
                assert_eq!(r.retrieved.len(), 1);
                assert_ne!(r.retrieved[0], r.sample_id);
                let s = samples.iter().find(|s| s.sample_id == r.sample_id).unwrap();
                assert!(graph_equal(&f.parse(&r.output).unwrap(), &s.graph));
            }
            assert_eq!(recs, emit_sft_records(&samples, &idx, f, 1).unwrap());
        }
    }

    #[test]
    fn dpo_records_differ_from_gt() {
        let samples = corpus(10);
        let (sft, pref) = samples.split_at(7);
        let idx = index(sft);
        let cfg = EditConfig::default();
        for f in FormatKind::ALL {
            let out = emit_dpo_records(pref, sft, &idx, f, 1, &cfg, &GedConfig::default()).unwrap();
            assert_eq!(out.records.len() + out.skipped.len(), 3);
            for r in &out.records {
                assert_ne!(r.chosen, r.rejected);
                assert!(r.provenance.ged > 0);
                let g = f.parse(&r.rejected).unwrap();
                assert!(!graph_equal(&g, &f.parse(&r.chosen).unwrap()));
            }
        }
    }
}
