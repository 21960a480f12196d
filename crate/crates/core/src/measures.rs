//! The five candidate breadth measures and harmonic authorship credit.
//!
//! Similarity-based measures (`mean_pairwise`, `fn_avg`, `wfn_avg`,
//! `nn_avg`) are *higher for narrower* profiles. The average shortest path
//! length over `1 - similarity` distances is higher for broader ones.
//!
//! For every matrix the per-row chain `min <= mean <= max` gives
//! `fn_avg <= mean_pairwise <= nn_avg`, since the average of row means over
//! a symmetric matrix equals the average over unordered pairs.

use std::fmt;
use std::str::FromStr;

use crate::corpus::{AuthorProfile, Corpus};
use crate::error::{Error, Result};
use crate::knowledge_space::{similarity_matrix, to_distance, DistanceMatrix, SimilarityMatrix};

/// Share of credit for the author at `position` (1-based) among `n_authors`:
/// `(1/position) / sum_{k=1..n} 1/k`.
pub fn harmonic_credit(position: usize, n_authors: usize) -> Result<f64> {
    if position == 0 || position > n_authors {
        return Err(Error::PositionOutOfRange { position, n_authors });
    }
    let harmonic: f64 = (1..=n_authors).map(|k| 1.0 / k as f64).sum();
    Ok((1.0 / position as f64) / harmonic)
}

/// Per-paper credit weights of one author, aligned to matrix rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CreditWeights(Vec<f64>);

impl CreditWeights {
    /// Weights must be finite and positive.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidWeights(format!("weight {w} is not positive")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    /// Harmonic credit of the focal author on each paper of `ids`, in order.
    pub fn for_papers(profile: &AuthorProfile, ids: &[String]) -> Result<Self> {
        ids.iter()
            .map(|id| {
                let paper = profile
                    .get(id)
                    .ok_or_else(|| Error::InvalidArgument(format!("paper `{id}` not in profile")))?;
                harmonic_credit(paper.position, paper.n_authors)
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn require_pairs(order: usize) -> Result<()> {
    if order < 2 {
        return Err(Error::TooFewPapers {
            needed: 2,
            found: order,
        });
    }
    Ok(())
}

/// Mean over the `n(n-1)/2` unordered off-diagonal pairs.
pub fn mean_pairwise(sim: &SimilarityMatrix) -> Result<f64> {
    let n = sim.order();
    require_pairs(n)?;
    let sum: f64 = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| sim.get(i, j))
        .sum();
    Ok(sum / (n * (n - 1) / 2) as f64)
}

/// Similarity of each paper to its furthest (least similar) other paper.
pub fn furthest_neighbor_scores(sim: &SimilarityMatrix) -> Result<Vec<f64>> {
    require_pairs(sim.order())?;
    Ok((0..sim.order())
        .map(|i| sim.neighbors(i).fold(f64::INFINITY, f64::min))
        .collect())
}

/// Similarity of each paper to its nearest other paper.
pub fn nearest_neighbor_scores(sim: &SimilarityMatrix) -> Result<Vec<f64>> {
    require_pairs(sim.order())?;
    Ok((0..sim.order())
        .map(|i| sim.neighbors(i).fold(f64::NEG_INFINITY, f64::max))
        .collect())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn furthest_neighbor_avg(sim: &SimilarityMatrix) -> Result<f64> {
    furthest_neighbor_scores(sim).map(|s| mean(&s))
}

/// Credit-weighted average of furthest-neighbor scores.
///
/// The weights only enter the final average. A paper with little credit
/// still counts as the furthest neighbor of the others.
pub fn weighted_furthest_neighbor_avg(sim: &SimilarityMatrix, weights: &CreditWeights) -> Result<f64> {
    if weights.len() != sim.order() {
        return Err(Error::LengthMismatch {
            expected: sim.order(),
            found: weights.len(),
        });
    }
    let scores = furthest_neighbor_scores(sim)?;
    let total: f64 = weights.as_slice().iter().sum();
    let weighted: f64 = scores.iter().zip(weights.as_slice()).map(|(s, w)| s * w).sum();
    Ok(weighted / total)
}

pub fn nearest_neighbor_avg(sim: &SimilarityMatrix) -> Result<f64> {
    nearest_neighbor_scores(sim).map(|s| mean(&s))
}

/// Shortest-path lengths from `source` over the complete graph with weights `dist`.
///
/// Dense Dijkstra, `O(n^2)`, which is optimal for a complete graph.
fn single_source(dist: &DistanceMatrix, source: usize) -> Vec<f64> {
    let n = dist.order();
    let mut best = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    best[source] = 0.0;
    for _ in 0..n {
        let Some(u) = (0..n)
            .filter(|&v| !done[v])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
        else {
            break;
        };
        done[u] = true;
        let row = dist.row(u);
        for v in 0..n {
            if !done[v] {
                let via = best[u] + row[v];
                if via < best[v] {
                    best[v] = via;
                }
            }
        }
    }
    best
}

/// All-pairs shortest-path lengths, row-major.
pub fn shortest_paths(dist: &DistanceMatrix) -> Result<Vec<f64>> {
    if let Some(w) = dist.values().iter().find(|w| **w < 0.0) {
        return Err(Error::InvalidMatrix(format!("negative edge weight {w}")));
    }
    Ok((0..dist.order()).flat_map(|s| single_source(dist, s)).collect())
}

/// Average shortest path length over unordered pairs.
pub fn avg_shortest_path(dist: &DistanceMatrix) -> Result<f64> {
    let n = dist.order();
    require_pairs(n)?;
    let paths = shortest_paths(dist)?;
    // Average the two directions so the result is exactly symmetric in
    // floating point regardless of traversal order.
    let sum: f64 = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| 0.5 * (paths[i * n + j] + paths[j * n + i]))
        .sum();
    Ok(sum / (n * (n - 1) / 2) as f64)
}

/// Selector for one of the five candidate measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    MeanPairwise,
    FurthestNeighbor,
    WeightedFurthestNeighbor,
    NearestNeighbor,
    AvgShortestPath,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::MeanPairwise,
        Measure::FurthestNeighbor,
        Measure::WeightedFurthestNeighbor,
        Measure::NearestNeighbor,
        Measure::AvgShortestPath,
    ];

    /// Short name used in flags and file headers.
    pub fn key(self) -> &'static str {
        match self {
            Measure::MeanPairwise => "mean",
            Measure::FurthestNeighbor => "fn",
            Measure::WeightedFurthestNeighbor => "wfn",
            Measure::NearestNeighbor => "nn",
            Measure::AvgShortestPath => "aspl",
        }
    }

    /// Column name in the scores file.
    pub fn column(self) -> &'static str {
        match self {
            Measure::MeanPairwise => "mean_pairwise",
            Measure::FurthestNeighbor => "fn_avg",
            Measure::WeightedFurthestNeighbor => "wfn_avg",
            Measure::NearestNeighbor => "nn_avg",
            Measure::AvgShortestPath => "aspl",
        }
    }

    /// Row label in effect-size reports.
    pub fn description(self) -> &'static str {
        match self {
            Measure::MeanPairwise => "arithmetic average (baseline)",
            Measure::FurthestNeighbor => "furthest neighbor per paper average",
            Measure::WeightedFurthestNeighbor => "weighted furthest neighbor per paper average",
            Measure::NearestNeighbor => "nearest neighbor per paper average (contrast)",
            Measure::AvgShortestPath => "similarity graph distance average",
        }
    }

    /// True for the measures where a higher value means a narrower profile.
    pub fn is_similarity(self) -> bool {
        self != Measure::AvgShortestPath
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.key() == s || m.column() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown measure `{s}`")))
    }
}

/// The five measure values for one author.
#[derive(Debug, Clone, PartialEq)]
pub struct BreadthScores {
    pub author_id: String,
    pub n_papers: usize,
    pub mean_pairwise: f64,
    pub fn_avg: f64,
    pub wfn_avg: f64,
    pub nn_avg: f64,
    pub aspl: f64,
}

impl BreadthScores {
    pub fn get(&self, measure: Measure) -> f64 {
        match measure {
            Measure::MeanPairwise => self.mean_pairwise,
            Measure::FurthestNeighbor => self.fn_avg,
            Measure::WeightedFurthestNeighbor => self.wfn_avg,
            Measure::NearestNeighbor => self.nn_avg,
            Measure::AvgShortestPath => self.aspl,
        }
    }

    pub fn csv_header(measures: &[Measure]) -> String {
        let mut header = String::from("author_id,n_papers");
        for m in measures {
            header.push(',');
            header.push_str(m.column());
        }
        header
    }

    /// One scores row, six-decimal fixed point.
    pub fn csv_row(&self, measures: &[Measure]) -> String {
        let mut row = format!("{},{}", self.author_id, self.n_papers);
        for &m in measures {
            row.push_str(&format!(",{:.6}", self.get(m)));
        }
        row
    }
}

/// All five measures from a similarity matrix and aligned weights.
pub fn score_matrix(author_id: &str, sim: &SimilarityMatrix, weights: &CreditWeights) -> Result<BreadthScores> {
    Ok(BreadthScores {
        author_id: author_id.to_owned(),
        n_papers: sim.order(),
        mean_pairwise: mean_pairwise(sim)?,
        fn_avg: furthest_neighbor_avg(sim)?,
        wfn_avg: weighted_furthest_neighbor_avg(sim, weights)?,
        nn_avg: nearest_neighbor_avg(sim)?,
        aspl: avg_shortest_path(&to_distance(sim))?,
    })
}

/// Scores an author's embedded papers.
///
/// `n_papers` counts the papers that entered the similarity matrix.
pub fn score_author(profile: &AuthorProfile, corpus: &Corpus) -> Result<BreadthScores> {
    let sim = similarity_matrix(profile, corpus)?;
    let weights = CreditWeights::for_papers(profile, sim.paper_ids())?;
    score_matrix(&profile.author_id, &sim, &weights)
}
