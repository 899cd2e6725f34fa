//! Okapi BM25 over sample prompts.
//!
//! Scoring for a query token list `q` and document `d`:
//!
//! ```text
//! score(q, d) = sum over t in q of
//!     idf(t) * tf(t,d) * (k1 + 1) / (tf(t,d) + k1 * (1 - b + b * |d| / avgdl))
//! idf(t) = ln((N - df(t) + 0.5) / (df(t) + 0.5) + 1)
//! ```
//!
//! Repeated query tokens count once per occurrence.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RetrievalError {
    #[error("cannot build an index over an empty corpus")]
    EmptyCorpus,
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
    #[error("unknown document id `{0}`")]
    UnknownDoc(String),
    #[error("malformed index file at line {line}: {message}")]
    BadIndexFile { line: usize, message: String },
}

fn is_cjk(c: char) -> bool {
    matches!(c,
        '\u{1100}'..='\u{11FF}'     // Hangul Jamo
        | '\u{3040}'..='\u{30FF}'   // Hiragana, Katakana
        | '\u{3130}'..='\u{318F}'   // Hangul Compatibility Jamo
        | '\u{3400}'..='\u{4DBF}'   // CJK Extension A
        | '\u{4E00}'..='\u{9FFF}'   // CJK Unified Ideographs
        | '\u{A960}'..='\u{A97F}'   // Hangul Jamo Extended-A
        | '\u{AC00}'..='\u{D7AF}'   // Hangul Syllables
        | '\u{D7B0}'..='\u{D7FF}'   // Hangul Jamo Extended-B
        | '\u{F900}'..='\u{FAFF}'   // CJK Compatibility Ideographs
        | '\u{20000}'..='\u{2FA1F}' // CJK Extensions B-F and supplements
    )
}

/// Lowercase, split into maximal alphanumeric runs, and after each run emit
/// the character bigrams of every CJK/Hangul stretch of two or more
/// characters inside it.
///
/// `"조그 고속"` gives `["조그", "조그", "고속", "고속"]`.
pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut out = Vec::new();
    let mut run: Vec<char> = Vec::new();
    let flush = |run: &mut Vec<char>, out: &mut Vec<String>| {
        if run.is_empty() {
            return;
        }
        out.push(run.iter().collect());
        let mut i = 0;
        while i < run.len() {
            if !is_cjk(run[i]) {
                i += 1;
                continue;
            }
            let start = i;
            while i < run.len() && is_cjk(run[i]) {
                i += 1;
            }
            if i - start >= 2 {
                for w in run[start..i].windows(2) {
                    out.push(w.iter().collect());
                }
            }
        }
        run.clear();
    };
    for c in lower.chars() {
        if c.is_alphanumeric() {
            run.push(c);
        } else {
            flush(&mut run, &mut out);
        }
    }
    flush(&mut run, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedHit {
    pub sample_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bm25Index {
    params: Bm25Params,
    ids: Vec<String>,
    position: BTreeMap<String, usize>,
    doc_len: Vec<usize>,
    tf: Vec<BTreeMap<String, usize>>,
    df: BTreeMap<String, usize>,
    avg_doc_len: f64,
}

impl Bm25Index {
    pub fn build<I, S, T>(corpus: I, params: Bm25Params) -> Result<Bm25Index, RetrievalError>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: AsRef<str>,
    {
        let docs = corpus
            .into_iter()
            .map(|(id, text)| {
                let mut counts = BTreeMap::new();
                let tokens = tokenize(text.as_ref());
                for t in &tokens {
                    *counts.entry(t.clone()).or_insert(0) += 1;
                }
                (id.into(), tokens.len(), counts)
            })
            .collect();
        Bm25Index::from_counts(docs, params)
    }

    fn from_counts(
        docs: Vec<(String, usize, BTreeMap<String, usize>)>,
        params: Bm25Params,
    ) -> Result<Bm25Index, RetrievalError> {
        if docs.is_empty() {
            return Err(RetrievalError::EmptyCorpus);
        }
        let mut position = BTreeMap::new();
        let mut ids = Vec::with_capacity(docs.len());
        let mut doc_len = Vec::with_capacity(docs.len());
        let mut tf = Vec::with_capacity(docs.len());
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for (i, (id, len, counts)) in docs.into_iter().enumerate() {
            if position.insert(id.clone(), i).is_some() {
                return Err(RetrievalError::DuplicateId(id));
            }
            for t in counts.keys() {
                *df.entry(t.clone()).or_insert(0) += 1;
            }
            ids.push(id);
            doc_len.push(len);
            tf.push(counts);
        }
        let avg_doc_len = doc_len.iter().sum::<usize>() as f64 / ids.len() as f64;
        Ok(Bm25Index {
            params,
            ids,
            position,
            doc_len,
            tf,
            df,
            avg_doc_len,
        })
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn doc_count(&self) -> usize {
        self.ids.len()
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_doc_len
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn df(&self, term: &str) -> usize {
        self.df.get(term).copied().unwrap_or(0)
    }

    pub fn tf(&self, doc_id: &str, term: &str) -> Option<usize> {
        let &i = self.position.get(doc_id)?;
        Some(self.tf[i].get(term).copied().unwrap_or(0))
    }

    pub fn doc_len(&self, doc_id: &str) -> Option<usize> {
        self.position.get(doc_id).map(|&i| self.doc_len[i])
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.ids.len() as f64;
        let df = self.df(term) as f64;
        ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
    }

    fn score_at(&self, i: usize, query: &[String]) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let norm = if self.avg_doc_len > 0.0 {
            self.doc_len[i] as f64 / self.avg_doc_len
        } else {
            1.0
        };
        query
            .iter()
            .map(|t| match self.tf[i].get(t) {
                None => 0.0,
                Some(&tf) => {
                    let tf = tf as f64;
                    self.idf(t) * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm))
                }
            })
            .sum()
    }

    pub fn score(&self, query_tokens: &[String], doc_id: &str) -> Result<f64, RetrievalError> {
        let &i = self
            .position
            .get(doc_id)
            .ok_or_else(|| RetrievalError::UnknownDoc(doc_id.to_string()))?;
        Ok(self.score_at(i, query_tokens))
    }

    /// Every document ranked by `(score desc, id asc)`, minus `exclude`.
    pub fn rank(&self, query: &str, exclude: Option<&str>) -> Vec<RankedHit> {
        let tokens = tokenize(query);
        let mut hits: Vec<RankedHit> = self
            .ids
            .iter()
            .enumerate()
            .filter(|(_, id)| Some(id.as_str()) != exclude)
            .map(|(i, id)| RankedHit {
                sample_id: id.clone(),
                score: self.score_at(i, &tokens),
            })
            .collect();
        hits.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.sample_id.cmp(&b.sample_id))
        });
        hits
    }

    /// The first `k` entries of [`Bm25Index::rank`].
    pub fn top_k(&self, query: &str, k: usize, exclude: Option<&str>) -> Vec<RankedHit> {
        let mut hits = self.rank(query, exclude);
        hits.truncate(k);
        hits
    }

    /// Line-delimited JSON: one parameter record, then one record per
    /// document with its token count and sorted term counts.
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&IndexHeader {
            kind: "bm25".into(),
            k1: self.params.k1,
            b: self.params.b,
            doc_count: self.ids.len(),
            avg_doc_len: self.avg_doc_len,
        })
        .expect("header serializes");
        out.push('\n');
        for (i, id) in self.ids.iter().enumerate() {
            let line = serde_json::to_string(&IndexDoc {
                id: id.clone(),
                len: self.doc_len[i],
                terms: self.tf[i].clone(),
            })
            .expect("doc serializes");
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Bm25Index, RetrievalError> {
        let bad = |line: usize, message: String| RetrievalError::BadIndexFile { line, message };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or_else(|| bad(1, "empty file".into()))?;
        let header: IndexHeader =
            serde_json::from_str(header).map_err(|e| bad(hl + 1, e.to_string()))?;
        if header.kind != "bm25" {
            return Err(bad(hl + 1, format!("unexpected kind `{}`", header.kind)));
        }
        let mut docs = Vec::new();
        for (ln, line) in lines {
            let d: IndexDoc = serde_json::from_str(line).map_err(|e| bad(ln + 1, e.to_string()))?;
            if d.terms.values().sum::<usize>() != d.len {
                return Err(bad(ln + 1, format!("term counts of `{}` do not sum to len", d.id)));
            }
            docs.push((d.id, d.len, d.terms));
        }
        if docs.len() != header.doc_count {
            return Err(bad(
                hl + 1,
                format!("header says {} documents, found {}", header.doc_count, docs.len()),
            ));
        }
        Bm25Index::from_counts(
            docs,
            Bm25Params {
                k1: header.k1,
                b: header.b,
            },
        )
    }

    /// Distinct terms in the index.
    pub fn vocabulary(&self) -> BTreeSet<&str> {
        self.df.keys().map(String::as_str).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct IndexHeader {
    kind: String,
    k1: f64,
    b: f64,
    doc_count: usize,
    avg_doc_len: f64,
}

#[derive(Serialize, Deserialize)]
struct IndexDoc {
    id: String,
    len: usize,
    terms: BTreeMap<String, usize>,
}
