//! Classical (Torgerson) multidimensional scaling.
//!
//! The squared distances are double-centered, `B = -1/2 J D² J`, and the
//! layout takes the top `k` eigenvectors of `B` scaled by the square roots
//! of their eigenvalues. `1 - cosine` distances are generally not Euclidean,
//! so `B` can have negative eigenvalues; those are dropped and their total
//! magnitude is reported in [`StressNote`].

use std::collections::HashSet;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::knowledge_space::{to_distance, DistanceMatrix, SimilarityMatrix};
use crate::measures::harmonic_credit;

/// How much of the double-centered spectrum the layout leaves out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressNote {
    /// Sum of the retained eigenvalues (negative ones truncated to zero).
    pub retained: f64,
    /// Sum of positive eigenvalues beyond the first `k`.
    pub discarded_positive: f64,
    /// Sum of magnitudes of negative eigenvalues.
    pub negative_mass: f64,
}

impl StressNote {
    /// Share of positive spectrum captured by the layout.
    pub fn explained(&self) -> f64 {
        let total = self.retained + self.discarded_positive;
        if total > 0.0 {
            self.retained / total
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutPoint {
    pub paper_id: String,
    pub x: f64,
    pub y: f64,
}

/// A two-dimensional layout, one point per paper.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout2D {
    pub points: Vec<LayoutPoint>,
    pub stress_note: StressNote,
}

/// Coordinates in `k` dimensions, centered at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Coordinates {
    pub paper_ids: Vec<String>,
    /// `coords[i]` has `k` entries.
    pub coords: Vec<Vec<f64>>,
    /// All eigenvalues of the double-centered matrix, descending.
    pub eigenvalues: Vec<f64>,
    pub stress_note: StressNote,
}

/// Embeds `dist` in `k` dimensions. `k` may not exceed the matrix order.
pub fn classical_mds_k(dist: &DistanceMatrix, k: usize) -> Result<Coordinates> {
    let n = dist.order();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot embed {n} points in {k} dimensions"
        )));
    }
    let squared = DMatrix::from_fn(n, n, |i, j| dist.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| squared.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (squared[(i, j)] - row_means[i] - row_means[j] + grand)
    });

    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    // Descending by value, index as tie-break for a fixed axis order.
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let mut coords = vec![vec![0.0; k]; n];
    for (axis, &col) in order.iter().take(k).enumerate() {
        let lambda = eig.eigenvalues[col].max(0.0);
        let scale = lambda.sqrt();
        let v = eig.eigenvectors.column(col);
        // Fix the sign so the largest-magnitude component is positive.
        let pivot = (0..n)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .unwrap_or(0);
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (i, c) in coords.iter_mut().enumerate() {
            c[axis] = sign * v[i] * scale;
        }
    }

    let retained = eigenvalues.iter().take(k).map(|l| l.max(0.0)).sum();
    let discarded_positive = eigenvalues.iter().skip(k).filter(|l| **l > 0.0).sum();
    let negative_mass = eigenvalues.iter().filter(|l| **l < 0.0).map(|l| -l).sum();
    Ok(Coordinates {
        paper_ids: dist.paper_ids().to_vec(),
        coords,
        eigenvalues,
        stress_note: StressNote {
            retained,
            discarded_positive,
            negative_mass,
        },
    })
}

/// Two-dimensional classical MDS. Two points land on the x axis.
pub fn classical_mds(dist: &DistanceMatrix) -> Result<Layout2D> {
    let n = dist.order();
    if n == 0 {
        return Err(Error::TooFewPapers { needed: 1, found: 0 });
    }
    let c = classical_mds_k(dist, n.min(2))?;
    let points = c
        .paper_ids
        .into_iter()
        .zip(c.coords)
        .map(|(paper_id, xy)| LayoutPoint {
            paper_id,
            x: xy[0],
            y: xy.get(1).copied().unwrap_or(0.0),
        })
        .collect();
    Ok(Layout2D {
        points,
        stress_note: c.stress_note,
    })
}

/// `paper_id,group,x,y,weight` rows for a labelled layout.
pub fn coordinates_csv(layout: &Layout2D, groups: &[&str], weights: Option<&[f64]>) -> Result<String> {
    let n = layout.points.len();
    if groups.len() != n || weights.is_some_and(|w| w.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            found: groups.len(),
        });
    }
    let mut out = String::from("paper_id,group,x,y,weight\n");
    for (i, p) in layout.points.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        let _ = writeln!(out, "{},{},{:.6},{:.6},{:.6}", p.paper_id, groups[i], p.x, p.y, w);
    }
    Ok(out)
}

/// A layout of several authors' papers in one frame, with a group tag and
/// the author's harmonic credit per paper.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupLayout {
    pub layout: Layout2D,
    pub groups: Vec<String>,
    pub weights: Vec<f64>,
}

impl GroupLayout {
    pub fn to_csv(&self) -> Result<String> {
        let groups: Vec<&str> = self.groups.iter().map(String::as_str).collect();
        coordinates_csv(&self.layout, &groups, Some(&self.weights))
    }
}

/// Lays out the embedded papers of every `(author_id, group)` entry
/// together. A paper shared by two authors keeps the first entry's group.
pub fn group_layout(corpus: &Corpus, authors: &[(&str, &str)], min_papers: usize) -> Result<GroupLayout> {
    let mut ids = Vec::new();
    let mut vectors = Vec::new();
    let mut groups = Vec::new();
    let mut weights = Vec::new();
    let mut seen = HashSet::new();
    for &(author_id, group) in authors {
        let profile = corpus.author_profile(author_id, min_papers)?;
        for p in &profile.papers {
            let Some(v) = corpus.embedding(&p.paper_id) else {
                continue;
            };
            if !seen.insert(p.paper_id.clone()) {
                continue;
            }
            ids.push(p.paper_id.clone());
            vectors.push(v);
            groups.push(group.to_owned());
            weights.push(harmonic_credit(p.position, p.n_authors)?);
        }
    }
    if ids.is_empty() {
        return Err(Error::TooFewPapers { needed: 1, found: 0 });
    }
    let sim = SimilarityMatrix::from_embeddings(ids, &vectors)?;
    Ok(GroupLayout {
        layout: classical_mds(&to_distance(&sim))?,
        groups,
        weights,
    })
}
