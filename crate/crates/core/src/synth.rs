//! Synthetic author careers with known breadth.
//!
//! Papers live in a latent space. A career has `n_topics` topic centers,
//! each at distance `topic_separation` from every other (exactly, while
//! `n_topics + 1 <= dim`), offset from a shared anchor direction. A paper's
//! latent position is its topic center plus Gaussian noise whose expected
//! squared norm is `within_topic_spread` squared, isotropic or confined to a
//! random per-topic subspace of rank `noise_rank`; its embedding is that position
//! normalized to unit length. The ground truth for an author is the mean
//! pairwise Euclidean distance of the latent positions.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corpus::{self, AuthorProfile, Corpus, Embedding, PaperRecord};
use crate::error::{Error, Result};

/// Optional self-citation wiring.
///
/// Each paper cites each earlier own paper of the same topic with
/// probability `p_within`, and of another topic with `p_cross`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfCiteWiring {
    pub p_within: f64,
    pub p_cross: f64,
    /// Inclusive range of references to papers outside the corpus, per paper.
    pub external_refs: (usize, usize),
}

impl Default for SelfCiteWiring {
    fn default() -> Self {
        Self {
            p_within: 0.3,
            p_cross: 0.02,
            external_refs: (15, 35),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_papers: usize,
    pub n_topics: usize,
    pub topic_separation: f64,
    pub within_topic_spread: f64,
    /// Rank of each topic's noise subspace; `0` spreads noise over every dimension.
    pub noise_rank: usize,
    pub dim: usize,
    /// Inclusive range of byline lengths.
    pub authors_per_paper: (usize, usize),
    pub first_year: i32,
    pub last_year: i32,
    pub field_label: String,
    pub selfcite: Option<SelfCiteWiring>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_papers: 20,
            n_topics: 1,
            topic_separation: 1.5,
            within_topic_spread: 0.8,
            noise_rank: 8,
            dim: 64,
            authors_per_paper: (1, 5),
            first_year: 2005,
            last_year: 2015,
            field_label: "GEN".into(),
            selfcite: None,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InfeasibleConfig(msg));
        if self.n_papers < 2 {
            return fail(format!("n_papers = {} < 2", self.n_papers));
        }
        if self.n_topics == 0 || self.n_topics > self.n_papers {
            return fail(format!("n_topics = {} not in [1, n_papers]", self.n_topics));
        }
        if !(self.topic_separation.is_finite() && self.topic_separation > 0.0) {
            return fail("topic_separation must be positive".into());
        }
        if !(self.within_topic_spread.is_finite() && self.within_topic_spread >= 0.0) {
            return fail("within_topic_spread must be non-negative".into());
        }
        if self.dim < 2 {
            return fail(format!("dim = {} < 2", self.dim));
        }
        if self.noise_rank > self.dim {
            return fail(format!("noise_rank = {} exceeds dim = {}", self.noise_rank, self.dim));
        }
        let (lo, hi) = self.authors_per_paper;
        if lo == 0 || lo > hi {
            return fail(format!("authors_per_paper range [{lo}, {hi}] invalid"));
        }
        if self.first_year > self.last_year {
            return fail("first_year after last_year".into());
        }
        if let Some(w) = &self.selfcite {
            let prob = 0.0..=1.0;
            if !prob.contains(&w.p_within) || !prob.contains(&w.p_cross) {
                return fail("self-citation probabilities must lie in [0, 1]".into());
            }
            if w.external_refs.0 > w.external_refs.1 {
                return fail("external_refs range invalid".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub author_id: String,
    pub n_topics: usize,
    /// Mean pairwise Euclidean distance among latent paper positions.
    pub latent_dispersion: f64,
    /// Topic index of each paper, aligned with [`SynthAuthor::papers`].
    pub topics: Vec<usize>,
}

/// One generated career.
#[derive(Debug, Clone)]
pub struct SynthAuthor {
    pub author_id: String,
    /// Papers in `(year, paper_id)` order.
    pub papers: Vec<PaperRecord>,
    pub embeddings: Vec<Embedding>,
    pub truth: GroundTruth,
}

impl SynthAuthor {
    /// A corpus holding just this author's papers.
    pub fn corpus(&self) -> Result<Corpus> {
        Corpus::from_parts(self.papers.clone(), self.embeddings.clone())
    }

    pub fn profile(&self, corpus: &Corpus) -> Result<AuthorProfile> {
        corpus.author_profile(&self.author_id, 1)
    }
}

fn gaussian(rng: &mut impl Rng, dim: usize, sd: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            sd * z
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `count` unit vectors, orthonormal as far as the dimension allows.
fn orthonormal(rng: &mut impl Rng, dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v = gaussian(rng, dim, 1.0);
        if basis.len() < dim {
            for b in &basis {
                let p = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let n = norm(&v);
        if n > 1e-9 {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    basis
}

/// Generates one career for `author_id` from `config.seed`.
pub fn generate_author(config: &SynthConfig, author_id: &str) -> Result<SynthAuthor> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dim = config.dim;

    // First basis vector is the shared anchor, the rest are topic offsets.
    let basis = orthonormal(&mut rng, dim, config.n_topics + 1);
    let offset = config.topic_separation / std::f64::consts::SQRT_2;
    let centers: Vec<Vec<f64>> = basis[1..]
        .iter()
        .map(|u| basis[0].iter().zip(u).map(|(a, b)| a + offset * b).collect())
        .collect();

    let n = config.n_papers;
    let mut topics: Vec<usize> = (0..n).map(|i| i % config.n_topics).collect();
    topics.shuffle(&mut rng);

    let mut years: Vec<i32> = (0..n)
        .map(|i| match i {
            0 => config.first_year,
            1 => config.last_year,
            _ => rng.random_range(config.first_year..=config.last_year),
        })
        .collect();
    years.sort_unstable();

    // Either way the expected squared noise norm is the spread squared.
    let rank = config.noise_rank;
    let subspaces: Vec<Vec<Vec<f64>>> = if rank == 0 {
        Vec::new()
    } else {
        (0..config.n_topics).map(|_| orthonormal(&mut rng, dim, rank)).collect()
    };
    let latent: Vec<Vec<f64>> = topics
        .iter()
        .map(|&t| {
            let mut x = centers[t].clone();
            if rank == 0 {
                let noise = gaussian(&mut rng, dim, config.within_topic_spread / (dim as f64).sqrt());
                x.iter_mut().zip(noise).for_each(|(c, e)| *c += e);
            } else {
                let coeffs = gaussian(&mut rng, rank, config.within_topic_spread / (rank as f64).sqrt());
                for (b, z) in subspaces[t].iter().zip(coeffs) {
                    x.iter_mut().zip(b).for_each(|(c, e)| *c += z * e);
                }
            }
            x
        })
        .collect();

    let ids: Vec<String> = (0..n).map(|i| format!("{author_id}-p{i:03}")).collect();
    let mut papers = Vec::with_capacity(n);
    let mut embeddings = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = config.authors_per_paper;
        let n_authors = rng.random_range(lo..=hi);
        let focal = rng.random_range(0..n_authors);
        let authors = (0..n_authors)
            .map(|k| {
                if k == focal {
                    author_id.to_owned()
                } else {
                    format!("{author_id}-p{i:03}-co{k}")
                }
            })
            .collect();

        let mut references = Vec::new();
        if let Some(w) = &config.selfcite {
            for j in 0..i {
                let p = if topics[j] == topics[i] { w.p_within } else { w.p_cross };
                if rng.random_bool(p) {
                    references.push(ids[j].clone());
                }
            }
            let external = rng.random_range(w.external_refs.0..=w.external_refs.1);
            references.extend((0..external).map(|k| format!("ext:{author_id}-p{i:03}-r{k}")));
        }

        let length = norm(&latent[i]);
        let vector: Vec<f32> = latent[i].iter().map(|x| (x / length) as f32).collect();
        embeddings.push(Embedding::new(ids[i].clone(), vector)?);
        papers.push(PaperRecord {
            paper_id: ids[i].clone(),
            year: years[i],
            authors,
            references,
            title: None,
            r#abstract: None,
            field_label: Some(config.field_label.clone()),
        });
    }

    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d: f64 = latent[i].iter().zip(&latent[j]).map(|(a, b)| (a - b).powi(2)).sum();
            total += d.sqrt();
        }
    }
    let latent_dispersion = total / (n * (n - 1) / 2) as f64;

    Ok(SynthAuthor {
        author_id: author_id.to_owned(),
        papers,
        embeddings,
        truth: GroundTruth {
            author_id: author_id.to_owned(),
            n_topics: config.n_topics,
            latent_dispersion,
            topics,
        },
    })
}

/// A population with a planted broad (treatment) group.
#[derive(Debug, Clone)]
pub struct Cohort {
    pub authors: Vec<SynthAuthor>,
    /// Ids of the broad authors.
    pub treatment: Vec<String>,
}

impl Cohort {
    pub fn corpus(&self) -> Result<Corpus> {
        let papers = self.authors.iter().flat_map(|a| a.papers.iter().cloned()).collect();
        let embeddings = self.authors.iter().flat_map(|a| a.embeddings.iter().cloned()).collect();
        Corpus::from_parts(papers, embeddings)
    }

    pub fn ground_truth_csv(&self) -> String {
        let mut out = String::from("author_id,n_topics,latent_dispersion\n");
        for a in &self.authors {
            let _ = writeln!(
                out,
                "{},{},{:.6}",
                a.author_id, a.truth.n_topics, a.truth.latent_dispersion
            );
        }
        out
    }

    /// Writes `papers.jsonl`, `embeddings.jsonl`, `ground_truth.csv` and `treatment.txt`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let papers: Vec<PaperRecord> = self.authors.iter().flat_map(|a| a.papers.iter().cloned()).collect();
        let embeddings: Vec<Embedding> = self.authors.iter().flat_map(|a| a.embeddings.iter().cloned()).collect();
        corpus::write_papers(dir.join("papers.jsonl"), &papers)?;
        corpus::write_embeddings(dir.join("embeddings.jsonl"), &embeddings)?;
        std::fs::write(dir.join("ground_truth.csv"), self.ground_truth_csv())?;
        let mut treatment = self.treatment.join("\n");
        if !treatment.is_empty() {
            treatment.push('\n');
        }
        std::fs::write(dir.join("treatment.txt"), treatment)?;
        Ok(())
    }
}

/// Broad authors get at least four topics at `base.topic_separation`
/// (jittered ±25%); narrow authors get one. Paper counts are drawn from
/// `[n, floor(1.1 n)]` and career bounds from `{year, year + 1}`, so any
/// broad author can be matched to any narrow one under the default
/// matching criteria. Spread and self-citation probabilities are jittered
/// per author.
pub fn generate_cohort(n_broad: usize, n_narrow: usize, base: &SynthConfig, seed: u64) -> Result<Cohort> {
    base.validate()?;
    if n_broad + n_narrow == 0 {
        return Err(Error::InfeasibleConfig("empty cohort".into()));
    }
    let broad_topics = base.n_topics.max(4);
    let max_papers = (base.n_papers as f64 * 1.1).floor() as usize;
    if broad_topics > base.n_papers {
        return Err(Error::InfeasibleConfig(format!(
            "{broad_topics} topics for broad authors exceed {} papers",
            base.n_papers
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut authors = Vec::with_capacity(n_broad + n_narrow);
    let mut treatment = Vec::with_capacity(n_broad);
    for k in 0..(n_broad + n_narrow) {
        let broad = k < n_broad;
        let author_id = if broad {
            format!("broad-{:04}", k + 1)
        } else {
            format!("narrow-{:04}", k - n_broad + 1)
        };
        let mut config = base.clone();
        config.seed = rng.next_u64();
        config.n_papers = rng.random_range(base.n_papers..=max_papers);
        config.first_year = base.first_year + rng.random_range(0..=1);
        config.last_year = base.last_year + rng.random_range(0..=1);
        config.within_topic_spread = base.within_topic_spread * rng.random_range(0.6..1.4);
        if broad {
            config.n_topics = rng.random_range(broad_topics..=(broad_topics + 2).min(config.n_papers));
            config.topic_separation = base.topic_separation * rng.random_range(0.75..1.25);
        } else {
            config.n_topics = 1;
        }
        if let Some(w) = &mut config.selfcite {
            w.p_within = (w.p_within * rng.random_range(0.5..1.5)).min(1.0);
            w.p_cross = (w.p_cross * rng.random_range(0.5..1.5)).min(w.p_within);
        }
        if broad {
            treatment.push(author_id.clone());
        }
        authors.push(generate_author(&config, &author_id)?);
    }
    Ok(Cohort { authors, treatment })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge_space::cosine;
    use crate::measures::score_author;

    #[test]
    fn degenerate_narrow_author() {
        let config = SynthConfig {
            within_topic_spread: 0.0,
            ..Default::default()
        };
        let a = generate_author(&config, "x").unwrap();
        let corpus = a.corpus().unwrap();
        let s = score_author(&a.profile(&corpus).unwrap(), &corpus).unwrap();
        for v in [s.mean_pairwise, s.fn_avg, s.wfn_avg, s.nn_avg] {
            assert!((v - 1.0).abs() < 1e-6, "{s:?}");
        }
        assert_eq!(a.truth.latent_dispersion, 0.0);
    }

    #[test]
    fn two_separated_clusters() {
        let config = SynthConfig {
            n_topics: 2,
            topic_separation: 6.0,
            within_topic_spread: 0.0,
            ..Default::default()
        };
        let a = generate_author(&config, "x").unwrap();
        let t = &a.truth.topics;
        let i = t.iter().position(|&k| k == 0).unwrap();
        let j = t.iter().position(|&k| k == 1).unwrap();
        let cross = cosine(&a.embeddings[i].vector, &a.embeddings[j].vector).unwrap();
        // Centers at anchor + (s / sqrt 2) u_k: cosine 1 / (1 + s² / 2).
        assert!((cross - 1.0 / 19.0).abs() < 1e-6, "cross {cross}");

        let corpus = a.corpus().unwrap();
        let s = score_author(&a.profile(&corpus).unwrap(), &corpus).unwrap();
        assert!((s.fn_avg - cross).abs() < 1e-6);
        assert!((s.nn_avg - 1.0).abs() < 1e-6);
    }

    #[test]
    fn seed_determinism_and_variation() {
        let config = SynthConfig {
            n_topics: 3,
            selfcite: Some(SelfCiteWiring::default()),
            ..Default::default()
        };
        let a = generate_author(&config, "x").unwrap();
        let b = generate_author(&config, "x").unwrap();
        assert_eq!(a.papers, b.papers);
        assert_eq!(a.embeddings, b.embeddings);
        let c = generate_author(&SynthConfig { seed: 1, ..config }, "x").unwrap();
        assert_ne!(a.embeddings, c.embeddings);
    }

    #[test]
    fn profile_shape() {
        let config = SynthConfig {
            n_papers: 15,
            authors_per_paper: (2, 4),
            ..Default::default()
        };
        let a = generate_author(&config, "x").unwrap();
        let corpus = a.corpus().unwrap();
        let p = a.profile(&corpus).unwrap();
        assert_eq!(p.n_papers(), 15);
        assert_eq!((p.first_year, p.last_year), (2005, 2015));
        assert!(p
            .papers
            .iter()
            .all(|q| (2..=4).contains(&q.n_authors) && q.position <= q.n_authors));
        assert_eq!(p.field_code.as_deref(), Some("GEN"));
    }

    #[test]
    fn infeasible_configs() {
        let bad = [
            SynthConfig {
                n_topics: 30,
                ..Default::default()
            },
            SynthConfig {
                n_papers: 1,
                ..Default::default()
            },
            SynthConfig {
                topic_separation: 0.0,
                ..Default::default()
            },
            SynthConfig {
                dim: 1,
                ..Default::default()
            },
            SynthConfig {
                authors_per_paper: (3, 2),
                ..Default::default()
            },
            SynthConfig {
                noise_rank: 65,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(
                matches!(generate_author(&c, "x"), Err(Error::InfeasibleConfig(_))),
                "{c:?}"
            );
        }
        assert!(generate_cohort(0, 0, &SynthConfig::default(), 1).is_err());
        let few = SynthConfig {
            n_papers: 3,
            ..Default::default()
        };
        assert!(generate_cohort(1, 1, &few, 1).is_err());
    }

    #[test]
    fn cohort_counts() {
        let cohort = generate_cohort(100, 100, &SynthConfig::default(), 7).unwrap();
        assert_eq!(cohort.authors.len(), 200);
        assert_eq!(cohort.treatment.len(), 100);
        assert!(cohort.authors[..100].iter().all(|a| a.truth.n_topics >= 4));
        assert!(cohort.authors[100..].iter().all(|a| a.truth.n_topics == 1));
    }

    #[test]
    fn wiring_favours_narrow_authors() {
        let base = SynthConfig {
            selfcite: Some(SelfCiteWiring::default()),
            ..Default::default()
        };
        let cohort = generate_cohort(20, 20, &base, 3).unwrap();
        let own_refs = |a: &SynthAuthor| -> usize {
            a.papers
                .iter()
                .map(|p| p.references.iter().filter(|r| !r.starts_with("ext:")).count())
                .sum()
        };
        let broad: usize = cohort.authors[..20].iter().map(own_refs).sum();
        let narrow: usize = cohort.authors[20..].iter().map(own_refs).sum();
        assert!(narrow > broad, "narrow {narrow} broad {broad}");
    }

    #[test]
    fn noise_rank_keeps_spread_and_lowers_nearest_neighbor_distance() {
        // Single topic, so dispersion only reflects the noise: mean pairwise
        // distance approaches sqrt(2) * spread either way.
        let truth = |rank| {
            let config = SynthConfig {
                n_papers: 200,
                noise_rank: rank,
                within_topic_spread: 1.0,
                ..Default::default()
            };
            generate_author(&config, "x").unwrap().truth.latent_dispersion
        };
        for rank in [0, 8] {
            let d = truth(rank);
            assert!((d - 2f64.sqrt()).abs() < 0.15, "rank {rank}: {d}");
        }

        let nn = |rank| {
            let config = SynthConfig {
                noise_rank: rank,
                ..Default::default()
            };
            let a = generate_author(&config, "x").unwrap();
            let corpus = a.corpus().unwrap();
            score_author(&a.profile(&corpus).unwrap(), &corpus).unwrap().nn_avg
        };
        assert!(nn(2) > nn(0));
    }
}
