use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bucket_by_complexity, to_jsonl, PipelineError, RecordError, Sample};
use crate::codecs::FormatKind;
use crate::metrics::{aggregate, evaluate, EvalResult, EvalSummary};

/// One line of a prediction file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub sample_id: String,
    pub prediction: String,
}

pub fn parse_predictions(text: &str) -> Result<Vec<PredictionRecord>, PipelineError> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<PredictionRecord>(line) {
            Ok(r) if !seen.insert(r.sample_id.clone()) => errors.push(RecordError {
                sample_id: r.sample_id,
                message: "duplicate prediction".into(),
            }),
            Ok(r) => out.push(r),
            Err(e) => errors.push(RecordError {
                sample_id: format!("<line {}>", i + 1),
                message: e.to_string(),
            }),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(PipelineError::Records(errors))
    }
}

/// Drop a leading ```` ```lang ```` line and a trailing ```` ``` ```` line.
pub fn strip_fences(text: &str) -> &str {
    let mut t = text.trim();
    if t.starts_with("```") {
        t = t.find('\n').map_or("", |i| &t[i + 1..]);
    }
    let trimmed = t.trim_end();
    if let Some(body) = trimmed.strip_suffix("```") {
        t = body;
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreStatus {
    Ok,
    Unparseable,
    Missing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleScore {
    pub sample_id: String,
    pub status: ScoreStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(flatten)]
    pub result: EvalResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketSummary {
    pub label: usize,
    pub min_complexity: usize,
    pub max_complexity: usize,
    #[serde(flatten)]
    pub summary: EvalSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_sample: Vec<SampleScore>,
    pub summary: EvalSummary,
    pub unparseable: usize,
    pub missing: usize,
    /// Prediction ids with no ground truth; ignored in scoring.
    pub extra: Vec<String>,
    pub buckets: Option<Vec<BucketSummary>>,
}

#[derive(Serialize)]
struct SummaryLine<'a> {
    summary: &'a EvalSummary,
    unparseable: usize,
    missing: usize,
    extra: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    buckets: Option<&'a [BucketSummary]>,
}

impl EvalReport {
    /// Per-sample lines in sample-id order, then one summary line.
    pub fn to_jsonl(&self) -> String {
        let mut out = to_jsonl(&self.per_sample);
        out.push_str(
            &serde_json::to_string(&SummaryLine {
                summary: &self.summary,
                unparseable: self.unparseable,
                missing: self.missing,
                extra: &self.extra,
                buckets: self.buckets.as_deref(),
            })
            .expect("summary serializes"),
        );
        out.push('\n');
        out
    }
}

fn mean_summary(results: &[EvalResult]) -> Result<EvalSummary, PipelineError> {
    aggregate(results).map_err(|e| PipelineError::Usage(e.to_string()))
}

/// Score predictions against ground truth. A prediction that fails to
/// decode, and a sample with no prediction, both score zero on every
/// metric and are flagged in the report.
pub fn evaluate_predictions(
    predictions: &[PredictionRecord],
    gt: &[Sample],
    format: FormatKind,
    strip: bool,
    n_buckets: Option<usize>,
) -> Result<EvalReport, PipelineError> {
    let by_id: BTreeMap<&str, &str> = predictions
        .iter()
        .map(|p| (p.sample_id.as_str(), p.prediction.as_str()))
        .collect();
    let mut samples: Vec<&Sample> = gt.iter().collect();
    samples.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    let per_sample: Vec<SampleScore> = samples
        .par_iter()
        .map(|s| {
            let score = |status, error, result| SampleScore {
                sample_id: s.sample_id.clone(),
                status,
                error,
                result,
            };
            match by_id.get(s.sample_id.as_str()) {
                None => score(ScoreStatus::Missing, None, EvalResult::zero(&s.graph)),
                Some(text) => {
                    let text = if strip { strip_fences(text) } else { text };
                    match format.parse(text) {
                        Ok(pred) => score(ScoreStatus::Ok, None, evaluate(&s.graph, &pred)),
                        Err(e) => score(
                            ScoreStatus::Unparseable,
                            Some(e.to_string()),
                            EvalResult::zero(&s.graph),
                        ),
                    }
                }
            }
        })
        .collect();
    let results: Vec<EvalResult> = per_sample.iter().map(|s| s.result).collect();
    let summary = mean_summary(&results)?;
    let gt_ids: BTreeSet<&str> = gt.iter().map(|s| s.sample_id.as_str()).collect();
    let extra = by_id
        .keys()
        .filter(|id| !gt_ids.contains(*id))
        .map(|id| id.to_string())
        .collect();
    let buckets = match n_buckets {
        None => None,
        Some(nb) => {
            let position: BTreeMap<&str, usize> = per_sample
                .iter()
                .enumerate()
                .map(|(i, s)| (s.sample_id.as_str(), i))
                .collect();
            let mut out = Vec::new();
            for b in bucket_by_complexity(gt, nb)? {
                let rs: Vec<EvalResult> = b
                    .sample_ids
                    .iter()
                    .map(|id| results[position[id.as_str()]])
                    .collect();
                out.push(BucketSummary {
                    label: b.label,
                    min_complexity: b.min_complexity,
                    max_complexity: b.max_complexity,
                    summary: mean_summary(&rs)?,
                });
            }
            Some(out)
        }
    };
    Ok(EvalReport {
        unparseable: per_sample
            .iter()
            .filter(|s| s.status == ScoreStatus::Unparseable)
            .count(),
        missing: per_sample
            .iter()
            .filter(|s| s.status == ScoreStatus::Missing)
            .count(),
        per_sample,
        summary,
        extra,
        buckets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{generate_corpus, SynthParams};

    fn corpus() -> Vec<Sample> {
        generate_corpus(&SynthParams {
            n_samples: 10,
            seed: 2,
            ..SynthParams::default()
        })
        .unwrap()
    }

    #[test]
    fn fences() {
        assert_eq!(strip_fences("```xml\n<Program>\n</Program>\n```\n"), "<Program>\n</Program>\n");
        assert_eq!(strip_fences("plain"), "plain");
        assert_eq!(strip_fences("```\n```"), "");
    }

    #[test]
    fn perfect_predictions_score_100() {
        let gt = corpus();
        for f in FormatKind::ALL {
            let preds: Vec<PredictionRecord> = gt
                .iter()
                .map(|s| PredictionRecord {
                    sample_id: s.sample_id.clone(),
                    prediction: f.render(&s.graph).unwrap(),
                })
                .collect();
            let r = evaluate_predictions(&preds, &gt, f, false, Some(5)).unwrap();
            assert_eq!(r.summary.program_em, 100.0);
            assert_eq!(r.summary.node_f1, 100.0);
            assert_eq!(r.buckets.as_ref().unwrap().len(), 5);
        }
    }

    #[test]
    fn missing_and_garbage_score_zero() {
        let gt = corpus();
        let preds = vec![PredictionRecord {
            sample_id: gt[0].sample_id.clone(),
            prediction: "not code".into(),
        }];
        let r = evaluate_predictions(&preds, &gt, FormatKind::Json, false, None).unwrap();
        assert_eq!(r.unparseable, 1);
        assert_eq!(r.missing, gt.len() - 1);
        assert_eq!(r.summary.node_f1, 0.0);
        assert!(r.to_jsonl().lines().last().unwrap().starts_with("{\"summary\""));
    }

    #[test]
    fn duplicate_prediction_rejected() {
        let line = r#"{"sample_id":"a","prediction":"x"}"#;
        assert!(parse_predictions(&format!("{line}\n{line}\n")).is_err());
        assert_eq!(parse_predictions(line).unwrap().len(), 1);
    }
}
