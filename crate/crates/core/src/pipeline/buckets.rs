use serde::{Deserialize, Serialize};

use super::{PipelineError, Sample};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityBucket {
    /// 1-based, increasing with complexity.
    pub label: usize,
    pub sample_ids: Vec<String>,
    pub min_complexity: usize,
    pub max_complexity: usize,
}

/// Sizes of `n_buckets` contiguous groups over `n` items; the first
/// `n % n_buckets` groups get one extra item.
pub fn bucket_sizes(n: usize, n_buckets: usize) -> Vec<usize> {
    (0..n_buckets)
        .map(|i| n / n_buckets + usize::from(i < n % n_buckets))
        .collect()
}

/// Sort by `(complexity, sample_id)` and cut into `n_buckets` groups.
pub fn bucket_by_complexity(
    samples: &[Sample],
    n_buckets: usize,
) -> Result<Vec<ComplexityBucket>, PipelineError> {
    if n_buckets == 0 {
        return Err(PipelineError::Usage("number of buckets must be positive".into()));
    }
    if samples.len() < n_buckets {
        return Err(PipelineError::Usage(format!(
            "{} samples cannot fill {n_buckets} buckets",
            samples.len()
        )));
    }
    let mut keyed: Vec<(usize, &str)> = samples
        .iter()
        .map(|s| (s.graph.complexity(), s.sample_id.as_str()))
        .collect();
    keyed.sort();
    let mut rest = keyed.as_slice();
    let mut out = Vec::with_capacity(n_buckets);
    for (i, size) in bucket_sizes(samples.len(), n_buckets).into_iter().enumerate() {
        let (group, tail) = rest.split_at(size);
        rest = tail;
        out.push(ComplexityBucket {
            label: i + 1,
            sample_ids: group.iter().map(|(_, id)| id.to_string()).collect(),
            min_complexity: group.first().map_or(0, |g| g.0),
            max_complexity: group.last().map_or(0, |g| g.0),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, EdgeType, ElementType, LdGraph, Node};

    fn chain_sample(id: usize, len: usize) -> Sample {
        let nodes = (0..len)
            .map(|i| Node::new(i, ElementType::NormallyOpen, format!("X{i}")))
            .collect();
        let edges = (1..len).map(|i| Edge::new(i - 1, i, EdgeType::Flow)).collect();
        Sample {
            sample_id: format!("S{id:03}"),
            program_description: "p".into(),
            detailed_description: "d".into(),
            graph: LdGraph::from_parts(nodes, edges),
        }
    }

    #[test]
    fn remainder_goes_first() {
        assert_eq!(bucket_sizes(7, 5), [2, 2, 1, 1, 1]);
        assert_eq!(bucket_sizes(10, 5), [2; 5]);
        assert_eq!(bucket_sizes(500, 5), [100; 5]);
    }

    #[test]
    fn buckets_partition_in_order() {
        let samples: Vec<Sample> = (0..7).map(|i| chain_sample(i, 7 - i)).collect();
        let b = bucket_by_complexity(&samples, 5).unwrap();
        let sizes: Vec<usize> = b.iter().map(|x| x.sample_ids.len()).collect();
        assert_eq!(sizes, [2, 2, 1, 1, 1]);
        assert_eq!(b[0].sample_ids, ["S006", "S005"]);
        for w in b.windows(2) {
            assert!(w[0].max_complexity <= w[1].min_complexity);
        }
        assert!(bucket_by_complexity(&samples, 8).is_err());
        assert!(bucket_by_complexity(&samples, 0).is_err());
    }
}
