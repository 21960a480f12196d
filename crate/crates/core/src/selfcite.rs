//! Self-citation networks and the three self-citation indicators.
//!
//! A reference is a self-reference when it names a paper of the focal
//! author's own profile. References to ids outside the corpus only count
//! toward the total number of references.

use std::collections::{HashMap, HashSet};

use crate::corpus::{AuthorProfile, Corpus};
use crate::error::{Error, Result};

/// Undirected citation links among one author's papers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelfCiteNetwork {
    /// Paper ids, in profile order.
    pub nodes: Vec<String>,
    /// Node index pairs `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Connected components as sorted node indices, ordered by smallest member.
    pub components: Vec<Vec<usize>>,
}

impl SelfCiteNetwork {
    /// Builds the network over `nodes` from their reference lists.
    pub fn from_references<'a>(nodes: Vec<String>, references: impl Fn(&str) -> &'a [String]) -> Self {
        let index: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut edges = HashSet::new();
        for (i, id) in nodes.iter().enumerate() {
            for target in references(id) {
                if let Some(&j) = index.get(target.as_str()) {
                    if i != j {
                        edges.insert((i.min(j), i.max(j)));
                    }
                }
            }
        }
        let mut edges: Vec<_> = edges.into_iter().collect();
        edges.sort_unstable();
        let components = components(nodes.len(), &edges);
        Self {
            nodes,
            edges,
            components,
        }
    }

    pub fn n_papers(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn component_sizes(&self) -> Vec<usize> {
        self.components.iter().map(Vec::len).collect()
    }

    /// Returns a copy with one more undirected edge.
    pub fn with_edge(&self, a: usize, b: usize) -> Self {
        let mut edges = self.edges.clone();
        if a != b {
            edges.push((a.min(b), a.max(b)));
            edges.sort_unstable();
            edges.dedup();
        }
        let components = components(self.nodes.len(), &edges);
        Self {
            nodes: self.nodes.clone(),
            edges,
            components,
        }
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

fn components(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut set = DisjointSet::new(n);
    for &(a, b) in edges {
        set.union(a, b);
    }
    let mut by_root: HashMap<usize, usize> = HashMap::new();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let root = set.find(v);
        let slot = *by_root.entry(root).or_insert_with(|| {
            out.push(Vec::new());
            out.len() - 1
        });
        out[slot].push(v);
    }
    out
}

fn references<'a>(corpus: &'a Corpus, paper_id: &str) -> &'a [String] {
    corpus.paper(paper_id).map_or(&[][..], |p| p.references.as_slice())
}

/// Self-citation network over every paper of the profile, isolates included.
pub fn build_network(profile: &AuthorProfile, corpus: &Corpus) -> SelfCiteNetwork {
    let nodes = profile.papers.iter().map(|p| p.paper_id.clone()).collect();
    SelfCiteNetwork::from_references(nodes, |id| references(corpus, id))
}

/// Self-references over all cited references.
pub fn self_reference_rate(profile: &AuthorProfile, corpus: &Corpus) -> Result<f64> {
    let own: HashSet<&str> = profile.papers.iter().map(|p| p.paper_id.as_str()).collect();
    let (mut own_refs, mut total) = (0usize, 0usize);
    for paper in &profile.papers {
        for target in references(corpus, &paper.paper_id) {
            total += 1;
            if own.contains(target.as_str()) {
                own_refs += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::NoReferences(profile.author_id.clone()));
    }
    Ok(own_refs as f64 / total as f64)
}

/// How per-paper self-reference counts are turned into one rate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum RealizedRate {
    /// Total self-references over total citable opportunities.
    #[default]
    Aggregate,
    /// Mean of per-paper quotients over papers with at least one opportunity.
    PerPaper,
}

/// Self-references over the own papers that could have been cited.
///
/// For paper `p`, the citable papers are the author's other papers `q` with
/// `year(q) <= year(p)`. Repeated references to one target within a paper
/// count once.
pub fn realized_self_reference_rate(profile: &AuthorProfile, corpus: &Corpus, mode: RealizedRate) -> Result<f64> {
    let own: HashSet<&str> = profile.papers.iter().map(|p| p.paper_id.as_str()).collect();
    let mut quotients = Vec::new();
    let (mut cited, mut citable) = (0usize, 0usize);
    for paper in &profile.papers {
        let targets: HashSet<&str> = references(corpus, &paper.paper_id)
            .iter()
            .map(String::as_str)
            .filter(|t| *t != paper.paper_id && own.contains(t))
            .collect();
        let opportunities = profile
            .papers
            .iter()
            .filter(|q| q.paper_id != paper.paper_id && q.year <= paper.year)
            .count();
        cited += targets.len();
        citable += opportunities;
        if opportunities > 0 {
            quotients.push(targets.len() as f64 / opportunities as f64);
        }
    }
    if citable == 0 {
        return Err(Error::NoCitableOpportunities(profile.author_id.clone()));
    }
    Ok(match mode {
        RealizedRate::Aggregate => cited as f64 / citable as f64,
        RealizedRate::PerPaper => quotients.iter().sum::<f64>() / quotients.len() as f64,
    })
}

/// Normalized average component size, `(P / C) / P = 1 / C`.
///
/// One for a connected network, `1 / P` when there are no self-citations.
pub fn component_indicator(network: &SelfCiteNetwork) -> Result<f64> {
    if network.nodes.is_empty() {
        return Err(Error::TooFewPapers { needed: 1, found: 0 });
    }
    let papers = network.n_papers() as f64;
    let average_size = papers / network.n_components() as f64;
    Ok(average_size / papers)
}

/// The three indicators for one author. Rates are `None` when undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfCiteIndicators {
    pub author_id: String,
    pub n_papers: usize,
    pub srr: Option<f64>,
    pub realized_srr: Option<f64>,
    pub component_indicator: f64,
}

impl SelfCiteIndicators {
    pub const CSV_HEADER: &'static str = "author_id,P,srr,realized_srr,component_indicator";

    pub fn csv_row(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_owned(), |v| format!("{v:.6}"));
        format!(
            "{},{},{},{},{:.6}",
            self.author_id,
            self.n_papers,
            fmt(self.srr),
            fmt(self.realized_srr),
            self.component_indicator
        )
    }
}

pub fn indicators(profile: &AuthorProfile, corpus: &Corpus, mode: RealizedRate) -> Result<SelfCiteIndicators> {
    let network = build_network(profile, corpus);
    Ok(SelfCiteIndicators {
        author_id: profile.author_id.clone(),
        n_papers: profile.n_papers(),
        srr: self_reference_rate(profile, corpus).ok(),
        realized_srr: realized_self_reference_rate(profile, corpus, mode).ok(),
        component_indicator: component_indicator(&network)?,
    })
}
