//! Epistemic-breadth indicators for researchers.
//!
//! Every paper has a location in an embedding ("knowledge") space. The
//! cosine similarities among one author's papers form a complete weighted
//! network, and summaries of that network measure how widely the author's
//! work is spread:
//!
//! * [`measures::mean_pairwise`]: mean similarity over all pairs;
//! * [`measures::furthest_neighbor_avg`]: mean of each paper's lowest similarity;
//! * [`measures::weighted_furthest_neighbor_avg`]: the same, weighted by
//!   harmonic authorship credit;
//! * [`measures::nearest_neighbor_avg`]: mean of each paper's highest similarity;
//! * [`measures::avg_shortest_path`]: mean shortest path over `1 - similarity`.
//!
//! The [`validation`] and [`selfcite`] modules hold the machinery used to
//! check those measures against known topic changers and against
//! self-citation behaviour, [`mds`] and [`plot`] draw layouts, and
//! [`synth`] generates careers with known breadth.
//!
//! ```
//! use breadth::corpus::{Corpus, Embedding, PaperRecord};
//! use breadth::measures::score_author;
//!
//! let papers = vec![
//!     PaperRecord::new("p1", 2010, vec!["ada".into()]),
//!     PaperRecord::new("p2", 2012, vec!["ada".into(), "bo".into()]),
//! ];
//! let embeddings = vec![
//!     Embedding::new("p1", vec![1.0, 0.0])?,
//!     Embedding::new("p2", vec![0.0, 1.0])?,
//! ];
//! let corpus = Corpus::from_parts(papers, embeddings)?;
//! let profile = corpus.author_profile("ada", 2)?;
//! let scores = score_author(&profile, &corpus)?;
//! assert_eq!(scores.mean_pairwise, 0.0);
//! assert_eq!(scores.aspl, 1.0);
//! # Ok::<(), breadth::Error>(())
//! ```

pub mod corpus;
mod error;
pub mod knowledge_space;
pub mod mds;
pub mod measures;
pub mod plot;
pub mod population;
pub mod selfcite;
pub mod synth;
pub mod validation;

pub use error::{Error, Result};
