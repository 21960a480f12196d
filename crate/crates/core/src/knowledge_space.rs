//! Pairwise cosine similarities between an author's papers.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::{AuthorProfile, Corpus};
use crate::error::{Error, Result};

/// Cosine similarity of two vectors, accumulated in `f64` and clamped to `[-1, 1]`.
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InvalidArgument("cosine of a zero-norm vector".into()));
    }
    // sqrt(x * x) == x exactly, so identical vectors give exactly 1.
    Ok((dot / (na * nb).sqrt()).clamp(-1.0, 1.0))
}

/// Square, symmetric, row-major matrix labelled by paper id.
#[derive(Debug, Clone, PartialEq)]
struct Labelled {
    ids: Vec<String>,
    values: Vec<f64>,
}

impl Labelled {
    fn new(ids: Vec<String>, values: Vec<f64>, diagonal: f64, range: (f64, f64)) -> Result<Self> {
        let n = ids.len();
        if values.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                found: values.len(),
            });
        }
        for i in 0..n {
            if values[i * n + i] != diagonal {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry {i} is {}, expected {diagonal}",
                    values[i * n + i]
                )));
            }
            for j in (i + 1)..n {
                let v = values[i * n + j];
                if v != values[j * n + i] {
                    return Err(Error::InvalidMatrix(format!("not symmetric at ({i}, {j})")));
                }
                if !(range.0..=range.1).contains(&v) {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({i}, {j}) = {v} outside [{}, {}]",
                        range.0, range.1
                    )));
                }
            }
        }
        Ok(Self { ids, values })
    }

    fn order(&self) -> usize {
        self.ids.len()
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.order() + j]
    }

    fn row(&self, i: usize) -> &[f64] {
        let n = self.order();
        &self.values[i * n..(i + 1) * n]
    }

    fn to_csv(&self) -> String {
        let mut out = String::from("paper_id");
        for id in &self.ids {
            out.push(',');
            out.push_str(id);
        }
        out.push('\n');
        for (i, id) in self.ids.iter().enumerate() {
            out.push_str(id);
            for v in self.row(i) {
                let _ = write!(out, ",{v:.6}");
            }
            out.push('\n');
        }
        out
    }
}

/// Pairwise cosine similarities among one author's papers.
///
/// Symmetric, unit diagonal, every entry in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix(Labelled);

impl SimilarityMatrix {
    /// Wraps row-major `values`, validating the matrix invariants.
    pub fn from_values(ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        Labelled::new(ids, values, 1.0, (-1.0, 1.0)).map(Self)
    }

    /// Cosines of the given embeddings, rows in input order.
    pub fn from_embeddings(ids: Vec<String>, vectors: &[&[f32]]) -> Result<Self> {
        let n = ids.len();
        if vectors.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: vectors.len(),
            });
        }
        // Each row only fills its upper triangle, so the schedule cannot
        // change any value.
        let upper: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                ((i + 1)..n)
                    .map(|j| cosine(vectors[i], vectors[j]))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let mut values = vec![1.0; n * n];
        for (i, row) in upper.iter().enumerate() {
            for (k, &s) in row.iter().enumerate() {
                let j = i + 1 + k;
                values[i * n + j] = s;
                values[j * n + i] = s;
            }
        }
        Ok(Self(Labelled { ids, values }))
    }

    pub fn order(&self) -> usize {
        self.0.order()
    }

    pub fn paper_ids(&self) -> &[String] {
        &self.0.ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    /// Off-diagonal entries of row `i`.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.row(i)
            .iter()
            .enumerate()
            .filter(move |&(j, _)| j != i)
            .map(|(_, &v)| v)
    }

    /// Simultaneously permutes rows and columns: new row `k` is old row `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let (ids, values) = permute(&self.0, perm)?;
        Ok(Self(Labelled { ids, values }))
    }

    pub fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::File::create(path)?.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// `1 - similarity`, the edge weights of the similarity network.
///
/// Symmetric, zero diagonal, every entry in `[0, 2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix(Labelled);

impl DistanceMatrix {
    pub fn from_values(ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        Labelled::new(ids, values, 0.0, (0.0, 2.0)).map(Self)
    }

    pub fn order(&self) -> usize {
        self.0.order()
    }

    pub fn paper_ids(&self) -> &[String] {
        &self.0.ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    /// Row-major entries.
    pub fn values(&self) -> &[f64] {
        &self.0.values
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let (ids, values) = permute(&self.0, perm)?;
        Ok(Self(Labelled { ids, values }))
    }

    pub fn to_csv(&self) -> String {
        self.0.to_csv()
    }
}

fn permute(m: &Labelled, perm: &[usize]) -> Result<(Vec<String>, Vec<f64>)> {
    let n = m.order();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidArgument("not a permutation".into()));
    }
    let ids = perm.iter().map(|&p| m.ids[p].clone()).collect();
    let mut values = Vec::with_capacity(n * n);
    for &pi in perm {
        values.extend(perm.iter().map(|&pj| m.get(pi, pj)));
    }
    Ok((ids, values))
}

/// Similarity matrix of the author's embedded papers, ordered by `(year, paper_id)`.
pub fn similarity_matrix(profile: &AuthorProfile, corpus: &Corpus) -> Result<SimilarityMatrix> {
    let (ids, vectors): (Vec<String>, Vec<&[f32]>) = profile
        .papers
        .iter()
        .filter_map(|p| corpus.embedding(&p.paper_id).map(|v| (p.paper_id.clone(), v)))
        .unzip();
    if ids.len() < 2 {
        return Err(Error::TooFewPapers {
            needed: 2,
            found: ids.len(),
        });
    }
    SimilarityMatrix::from_embeddings(ids, &vectors)
}

/// Elementwise `d = 1 - s`.
pub fn to_distance(sim: &SimilarityMatrix) -> DistanceMatrix {
    let n = sim.order();
    let mut values: Vec<f64> = sim.0.values.iter().map(|s| 1.0 - s).collect();
    for i in 0..n {
        values[i * n + i] = 0.0;
    }
    DistanceMatrix(Labelled {
        ids: sim.0.ids.clone(),
        values,
    })
}
