//! Publication, authorship and embedding data.
//!
//! A [`Corpus`] is built once, from files or from in-memory records, and is
//! read-only afterwards. Papers without an embedding are kept: they still
//! take part in the self-citation indicators, but are left out of every
//! similarity-based measure.
//!
//! Two embedding encodings are understood:
//!
//! * line-delimited JSON, `{"paper_id": "...", "vector": [...]}` per line,
//!   optionally preceded by a `{"dim": D}` header line;
//! * a packed binary form: the magic `EMB1`, a little-endian `u32` dimension,
//!   then records of `u16` id length, id bytes and `dim` little-endian `f32`s.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default inclusion threshold on the number of papers per author.
pub const DEFAULT_MIN_PAPERS: usize = 10;

const MIN_YEAR: i32 = 1900;
const MAX_YEAR: i32 = 2100;
const BINARY_MAGIC: &[u8; 4] = b"EMB1";

/// One publication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub paper_id: String,
    pub year: i32,
    /// Author ids in byline order; position 1 is the first author.
    pub authors: Vec<String>,
    #[serde(default)]
    pub references: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r#abstract: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_label: Option<String>,
}

impl PaperRecord {
    pub fn new(paper_id: impl Into<String>, year: i32, authors: Vec<String>) -> Self {
        Self {
            paper_id: paper_id.into(),
            year,
            authors,
            references: Vec::new(),
            title: None,
            r#abstract: None,
            field_label: None,
        }
    }

    pub fn with_references(mut self, references: Vec<String>) -> Self {
        self.references = references;
        self
    }

    pub fn with_field_label(mut self, label: impl Into<String>) -> Self {
        self.field_label = Some(label.into());
        self
    }

    /// 1-based byline position of `author_id`, if present.
    pub fn position_of(&self, author_id: &str) -> Option<usize> {
        self.authors.iter().position(|a| a == author_id).map(|i| i + 1)
    }

    fn validate(&self) -> Result<()> {
        let invalid = |reason: String| Error::InvalidPaper {
            paper_id: self.paper_id.clone(),
            reason,
        };
        if self.paper_id.is_empty() {
            return Err(invalid("empty paper_id".into()));
        }
        if self.authors.is_empty() {
            return Err(invalid("author list is empty".into()));
        }
        if !(MIN_YEAR..=MAX_YEAR).contains(&self.year) {
            return Err(invalid(format!("year {} outside [{MIN_YEAR}, {MAX_YEAR}]", self.year)));
        }
        let mut seen = HashSet::with_capacity(self.authors.len());
        for author in &self.authors {
            if author.is_empty() {
                return Err(invalid("empty author id".into()));
            }
            if !seen.insert(author.as_str()) {
                return Err(invalid(format!("author `{author}` listed twice")));
            }
        }
        Ok(())
    }
}

/// A document vector keyed by paper id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub paper_id: String,
    pub vector: Vec<f32>,
}

impl Embedding {
    /// Checks that every element is finite and the norm is positive.
    pub fn new(paper_id: impl Into<String>, vector: Vec<f32>) -> Result<Self> {
        let paper_id = paper_id.into();
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(paper_id));
        }
        if vector.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroNorm(paper_id));
        }
        Ok(Self { paper_id, vector })
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

/// Summary of a corpus load.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub papers: usize,
    pub embeddings: usize,
    /// Papers with no embedding, in corpus order.
    pub papers_without_embedding: Vec<String>,
    /// Embeddings whose paper id is not in the papers file, in file order.
    pub embeddings_without_paper: Vec<String>,
}

impl LoadReport {
    pub fn unmatched(&self) -> usize {
        self.papers_without_embedding.len() + self.embeddings_without_paper.len()
    }
}

/// Indexed, immutable collection of papers and their embeddings.
#[derive(Debug, Clone)]
pub struct Corpus {
    papers: Vec<PaperRecord>,
    index: HashMap<String, usize>,
    embeddings: Vec<Option<Vec<f32>>>,
    dim: Option<usize>,
    by_author: BTreeMap<String, Vec<(usize, usize)>>,
    report: LoadReport,
}

impl Corpus {
    /// Builds a corpus from records already in memory.
    pub fn from_parts(papers: Vec<PaperRecord>, embeddings: Vec<Embedding>) -> Result<Self> {
        let mut index = HashMap::with_capacity(papers.len());
        let mut by_author: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
        for (i, paper) in papers.iter().enumerate() {
            paper.validate()?;
            if index.insert(paper.paper_id.clone(), i).is_some() {
                return Err(Error::DuplicatePaper(paper.paper_id.clone()));
            }
            for (pos, author) in paper.authors.iter().enumerate() {
                by_author.entry(author.clone()).or_default().push((i, pos + 1));
            }
        }

        let mut slots: Vec<Option<Vec<f32>>> = vec![None; papers.len()];
        let mut dim = None;
        let mut seen = HashSet::with_capacity(embeddings.len());
        let mut embeddings_without_paper = Vec::new();
        let n_embeddings = embeddings.len();
        for emb in embeddings {
            let expected = *dim.get_or_insert(emb.dim());
            if emb.dim() != expected {
                return Err(Error::DimMismatch {
                    paper_id: emb.paper_id,
                    expected,
                    found: emb.vector.len(),
                });
            }
            if !seen.insert(emb.paper_id.clone()) {
                return Err(Error::DuplicateEmbedding(emb.paper_id));
            }
            match index.get(&emb.paper_id) {
                Some(&i) => slots[i] = Some(emb.vector),
                None => embeddings_without_paper.push(emb.paper_id),
            }
        }

        let papers_without_embedding = papers
            .iter()
            .zip(&slots)
            .filter(|(_, e)| e.is_none())
            .map(|(p, _)| p.paper_id.clone())
            .collect();

        let report = LoadReport {
            papers: papers.len(),
            embeddings: n_embeddings,
            papers_without_embedding,
            embeddings_without_paper,
        };
        Ok(Self {
            papers,
            index,
            embeddings: slots,
            dim,
            by_author,
            report,
        })
    }

    /// Loads a papers file and an embeddings file (JSON lines or `EMB1` binary).
    pub fn load(papers_path: impl AsRef<Path>, embeddings_path: impl AsRef<Path>) -> Result<Self> {
        let papers = read_papers(papers_path)?;
        let embeddings = read_embeddings(embeddings_path)?;
        Self::from_parts(papers, embeddings)
    }

    /// Loads papers only; every similarity-based measure will be unavailable.
    pub fn load_papers(papers_path: impl AsRef<Path>) -> Result<Self> {
        Self::from_parts(read_papers(papers_path)?, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn report(&self) -> &LoadReport {
        &self.report
    }

    pub fn papers(&self) -> &[PaperRecord] {
        &self.papers
    }

    pub fn paper(&self, paper_id: &str) -> Option<&PaperRecord> {
        self.index.get(paper_id).map(|&i| &self.papers[i])
    }

    pub fn embedding(&self, paper_id: &str) -> Option<&[f32]> {
        self.index.get(paper_id).and_then(|&i| self.embeddings[i].as_deref())
    }

    /// Embeddings in corpus order, for serialization.
    pub fn embeddings(&self) -> impl Iterator<Item = Embedding> + '_ {
        self.papers.iter().zip(&self.embeddings).filter_map(|(p, e)| {
            e.as_ref().map(|v| Embedding {
                paper_id: p.paper_id.clone(),
                vector: v.clone(),
            })
        })
    }

    /// All author ids, sorted.
    pub fn author_ids(&self) -> impl Iterator<Item = &str> {
        self.by_author.keys().map(String::as_str)
    }

    pub fn paper_count(&self, author_id: &str) -> usize {
        self.by_author.get(author_id).map_or(0, Vec::len)
    }

    /// Collects the papers of `author_id`.
    ///
    /// Fails with [`Error::UnknownAuthor`] if the author is on no paper and
    /// with [`Error::BelowThreshold`] if they are on fewer than `min_papers`.
    pub fn author_profile(&self, author_id: &str, min_papers: usize) -> Result<AuthorProfile> {
        let incidences = self
            .by_author
            .get(author_id)
            .ok_or_else(|| Error::UnknownAuthor(author_id.to_owned()))?;
        if incidences.len() < min_papers {
            return Err(Error::BelowThreshold {
                author_id: author_id.to_owned(),
                found: incidences.len(),
                required: min_papers,
            });
        }
        let mut papers: Vec<AuthoredPaper> = incidences
            .iter()
            .map(|&(i, position)| {
                let p = &self.papers[i];
                AuthoredPaper {
                    paper_id: p.paper_id.clone(),
                    year: p.year,
                    position,
                    n_authors: p.authors.len(),
                    field_label: p.field_label.clone(),
                    has_embedding: self.embeddings[i].is_some(),
                }
            })
            .collect();
        papers.sort_by(|a, b| (a.year, &a.paper_id).cmp(&(b.year, &b.paper_id)));

        let first_year = papers.first().map(|p| p.year).unwrap_or_default();
        let last_year = papers.last().map(|p| p.year).unwrap_or_default();
        let mut profile = AuthorProfile {
            author_id: author_id.to_owned(),
            papers,
            field_code: None,
            first_year,
            last_year,
        };
        profile.field_code = derive_field_code(&profile).ok();
        Ok(profile)
    }

    pub fn write_papers(&self, path: impl AsRef<Path>) -> Result<()> {
        write_papers(path, &self.papers)
    }

    pub fn write_embeddings(&self, path: impl AsRef<Path>) -> Result<()> {
        let embeddings: Vec<Embedding> = self.embeddings().collect();
        write_embeddings(path, &embeddings)
    }
}

/// A paper as seen from one of its authors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthoredPaper {
    pub paper_id: String,
    pub year: i32,
    /// 1-based byline position of the focal author.
    pub position: usize,
    pub n_authors: usize,
    pub field_label: Option<String>,
    pub has_embedding: bool,
}

/// One researcher's body of work, ordered by `(year, paper_id)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorProfile {
    pub author_id: String,
    pub papers: Vec<AuthoredPaper>,
    /// Modal field label, see [`derive_field_code`].
    pub field_code: Option<String>,
    pub first_year: i32,
    pub last_year: i32,
}

impl AuthorProfile {
    pub fn n_papers(&self) -> usize {
        self.papers.len()
    }

    pub fn n_embedded(&self) -> usize {
        self.papers.iter().filter(|p| p.has_embedding).count()
    }

    pub fn get(&self, paper_id: &str) -> Option<&AuthoredPaper> {
        self.papers.iter().find(|p| p.paper_id == paper_id)
    }
}

/// Free-function form of [`Corpus::author_profile`].
pub fn build_author_profile(corpus: &Corpus, author_id: &str, min_papers: usize) -> Result<AuthorProfile> {
    corpus.author_profile(author_id, min_papers)
}

/// The field label most often assigned to the author's papers.
///
/// Ties go to the lexicographically smallest label.
pub fn derive_field_code(profile: &AuthorProfile) -> Result<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for label in profile.papers.iter().filter_map(|p| p.field_label.as_deref()) {
        *counts.entry(label).or_default() += 1;
    }
    // BTreeMap iterates in ascending key order; keep the first maximum.
    let mut best: Option<(&str, usize)> = None;
    for (label, n) in counts {
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((label, n));
        }
    }
    best.map(|(label, _)| label.to_owned())
        .ok_or_else(|| Error::NoFieldLabel(profile.author_id.clone()))
}

fn malformed(path: &Path, line: usize, message: impl ToString) -> Error {
    Error::Malformed {
        path: path.to_owned(),
        line,
        message: message.to_string(),
    }
}

/// Reads a line-delimited papers file. Blank lines are skipped.
pub fn read_papers(path: impl AsRef<Path>) -> Result<Vec<PaperRecord>> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut papers = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let paper: PaperRecord = serde_json::from_str(&line).map_err(|e| malformed(path, i + 1, e))?;
        paper.validate().map_err(|e| malformed(path, i + 1, e))?;
        papers.push(paper);
    }
    Ok(papers)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EmbeddingLine {
    Header { dim: usize },
    Record { paper_id: String, vector: Vec<f32> },
}

/// Reads an embeddings file, detecting the binary form by its magic bytes.
pub fn read_embeddings(path: impl AsRef<Path>) -> Result<Vec<Embedding>> {
    let path = path.as_ref();
    let mut reader = BufReader::new(File::open(path)?);
    if reader.fill_buf()?.starts_with(BINARY_MAGIC) {
        return read_embeddings_binary(path, reader);
    }

    let mut out = Vec::new();
    let mut dim: Option<usize> = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: EmbeddingLine = serde_json::from_str(&line).map_err(|e| malformed(path, i + 1, e))?;
        match parsed {
            EmbeddingLine::Header { dim: d } => {
                if !out.is_empty() || dim.is_some() {
                    return Err(malformed(path, i + 1, "header must be the first record"));
                }
                if d == 0 {
                    return Err(malformed(path, i + 1, "header dim must be positive"));
                }
                dim = Some(d);
            }
            EmbeddingLine::Record { paper_id, vector } => {
                let expected = *dim.get_or_insert(vector.len());
                if vector.len() != expected {
                    return Err(Error::DimMismatch {
                        paper_id,
                        expected,
                        found: vector.len(),
                    });
                }
                out.push(Embedding::new(paper_id, vector)?);
            }
        }
    }
    Ok(out)
}

fn read_embeddings_binary(path: &Path, mut reader: impl Read) -> Result<Vec<Embedding>> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    let mut word = [0u8; 4];
    reader.read_exact(&mut word)?;
    let dim = u32::from_le_bytes(word) as usize;
    if dim == 0 {
        return Err(malformed(path, 0, "binary header dim must be positive"));
    }

    let mut out = Vec::new();
    let mut len_buf = [0u8; 2];
    let mut floats = vec![0u8; dim * 4];
    loop {
        // Record index doubles as the "line" in error messages.
        let record = out.len() + 1;
        match reader.read_exact(&mut len_buf) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        let mut id = vec![0u8; u16::from_le_bytes(len_buf) as usize];
        reader
            .read_exact(&mut id)
            .and_then(|_| reader.read_exact(&mut floats))
            .map_err(|e| malformed(path, record, e))?;
        let paper_id = String::from_utf8(id).map_err(|e| malformed(path, record, e))?;
        let vector = floats
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        out.push(Embedding::new(paper_id, vector)?);
    }
    Ok(out)
}

pub fn write_papers(path: impl AsRef<Path>, papers: &[PaperRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for paper in papers {
        serde_json::to_writer(&mut w, paper).map_err(io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes JSON lines with a leading `{"dim": D}` header.
pub fn write_embeddings(path: impl AsRef<Path>, embeddings: &[Embedding]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    if let Some(first) = embeddings.first() {
        writeln!(w, "{{\"dim\":{}}}", first.dim())?;
    }
    for emb in embeddings {
        serde_json::to_writer(&mut w, emb).map_err(io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the packed `EMB1` form. All embeddings must share one dimension.
pub fn write_embeddings_binary(path: impl AsRef<Path>, embeddings: &[Embedding]) -> Result<()> {
    let dim = embeddings.first().map_or(0, Embedding::dim);
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&(dim as u32).to_le_bytes())?;
    for emb in embeddings {
        if emb.dim() != dim {
            return Err(Error::DimMismatch {
                paper_id: emb.paper_id.clone(),
                expected: dim,
                found: emb.dim(),
            });
        }
        let id = emb.paper_id.as_bytes();
        let len = u16::try_from(id.len())
            .map_err(|_| Error::InvalidArgument(format!("paper id `{}` longer than 65535 bytes", emb.paper_id)))?;
        w.write_all(&len.to_le_bytes())?;
        w.write_all(id)?;
        for v in &emb.vector {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}
