//! Speaker-embedding anonymization: farthest-N selection from a pool and
//! random N*-subset averaging.

use std::collections::HashMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::mcadams::keyed_digest;

/// Pool of identified embedding vectors, all of one dimension.
#[derive(Debug, Clone)]
pub struct EmbeddingPool {
    pub entries: Vec<(String, Vec<f64>)>,
    pub dimension: usize,
}

impl EmbeddingPool {
    pub fn new(entries: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let dimension = match entries.first() {
            Some((_, v)) => v.len(),
            None => return Err(Error::Data("embedding pool is empty".into())),
        };
        for (id, v) in &entries {
            if v.len() != dimension {
                return Err(Error::Data(format!(
                    "pool entry {id} has dimension {} but expected {dimension}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Data(format!("pool entry {id} has non-finite values")));
            }
        }
        Ok(EmbeddingPool { entries, dimension })
    }

    /// Parse tab-separated `id<TAB>v1 v2 ... vd` lines.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (id, rest) = line.split_once('\t').ok_or_else(|| {
                Error::parse(path.display().to_string(), lineno + 1, "expected id<TAB>values")
            })?;
            let vector: Vec<f64> = rest
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>().map_err(|_| {
                        Error::parse(
                            path.display().to_string(),
                            lineno + 1,
                            format!("bad number {t:?}"),
                        )
                    })
                })
                .collect::<Result<_>>()?;
            entries.push((id.to_string(), vector));
        }
        EmbeddingPool::new(entries)
    }
}

/// A source embedding to anonymize, identified so that precomputed affinity
/// scores can be looked up.
#[derive(Debug, Clone)]
pub struct SourceEmbedding {
    pub id: String,
    pub vector: Vec<f64>,
}

/// How source-to-pool affinity is measured. Precomputed scores follow the
/// LLR convention: higher means more similar, so "farthest" means lowest.
#[derive(Debug, Clone)]
pub enum DistanceSpec {
    CosineDistance,
    PrecomputedScores(HashMap<(String, String), f64>),
}

impl DistanceSpec {
    /// Parse tab-separated `source_id<TAB>pool_id<TAB>score` lines.
    pub fn precomputed_from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut scores = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (src, pool, val) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), Some(c), None) => (a, b, c),
                _ => {
                    return Err(Error::parse(
                        path.display().to_string(),
                        lineno + 1,
                        "expected source_id pool_id score",
                    ))
                }
            };
            let score: f64 = val.parse().map_err(|_| {
                Error::parse(path.display().to_string(), lineno + 1, format!("bad score {val:?}"))
            })?;
            scores.insert((src.to_string(), pool.to_string()), score);
        }
        Ok(DistanceSpec::PrecomputedScores(scores))
    }
}

fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        1.0 // zero vector carries no direction; treat as orthogonal
    } else {
        1.0 - dot / (na * nb)
    }
}

/// Ids of the `n` pool entries farthest from the source, ties broken by
/// ascending id.
pub fn select_farthest(
    source: &SourceEmbedding,
    pool: &EmbeddingPool,
    dist: &DistanceSpec,
    n: usize,
) -> Result<Vec<String>> {
    if n > pool.entries.len() {
        return Err(Error::InvalidArgument(format!(
            "requested {n} farthest entries from a pool of {}",
            pool.entries.len()
        )));
    }
    let mut scored: Vec<(f64, &str)> = pool
        .entries
        .iter()
        .map(|(id, vec)| {
            let farness = match dist {
                DistanceSpec::CosineDistance => Ok(cosine_distance(&source.vector, vec)),
                DistanceSpec::PrecomputedScores(scores) => scores
                    .get(&(source.id.clone(), id.clone()))
                    .map(|&s| -s)
                    .ok_or_else(|| {
                        Error::Data(format!("no precomputed score for ({}, {id})", source.id))
                    }),
            }?;
            Ok((farness, id.as_str()))
        })
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.1.cmp(b.1))
    });
    Ok(scored.into_iter().take(n).map(|(_, id)| id.to_string()).collect())
}

/// Anonymized embedding: the mean of a seeded random `n_star`-subset of the
/// `n` farthest pool vectors. Deterministic given (seed, key).
pub fn anonymize_embedding(
    source: &SourceEmbedding,
    pool: &EmbeddingPool,
    dist: &DistanceSpec,
    n: usize,
    n_star: usize,
    seed: u64,
    key: &str,
) -> Result<Vec<f64>> {
    if n_star > n {
        return Err(Error::InvalidArgument(format!(
            "subset size {n_star} exceeds candidate count {n}"
        )));
    }
    if n_star == 0 {
        return Err(Error::InvalidArgument("subset size must be positive".into()));
    }
    let farthest = select_farthest(source, pool, dist, n)?;
    let mut rng = ChaCha20Rng::from_seed(keyed_digest(seed, key));
    let mut chosen: Vec<usize> = rand::seq::index::sample(&mut rng, n, n_star).into_iter().collect();
    // Accumulate in candidate order so the sum does not depend on the
    // permutation the sampler happened to produce.
    chosen.sort_unstable();
    let by_id: HashMap<&str, &Vec<f64>> =
        pool.entries.iter().map(|(id, v)| (id.as_str(), v)).collect();
    let mut mean = vec![0.0f64; pool.dimension];
    for idx in chosen {
        let v = by_id[farthest[idx].as_str()];
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n_star as f64;
    }
    Ok(mean)
}
