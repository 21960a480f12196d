//! Whole-population drivers: scoring, self-citation indicators and the
//! matched-pair validation run.
//!
//! Authors are processed in parallel on the current rayon pool; results are
//! always returned sorted by author id.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::corpus::{AuthorProfile, Corpus};
use crate::error::{Error, Result};
use crate::measures::{score_author, BreadthScores, Measure};
use crate::selfcite::{indicators, RealizedRate, SelfCiteIndicators};
use crate::validation::{
    cohens_d, d_to_r, match_all, pair_dominance_fraction, Dominance, EffectSize, MatchCriteria, MatchedPair,
};

/// An author left out, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skip {
    pub author_id: String,
    pub reason: String,
}

impl Skip {
    fn new(author_id: &str, reason: impl ToString) -> Self {
        Self {
            author_id: author_id.to_owned(),
            reason: reason.to_string(),
        }
    }
}

pub fn skip_report_csv(skipped: &[Skip]) -> String {
    let mut out = String::from("author_id,reason\n");
    for s in skipped {
        let _ = writeln!(out, "{},\"{}\"", s.author_id, s.reason.replace('"', "\"\""));
    }
    out
}

fn partition<T: Send>(results: Vec<(String, Result<T>)>) -> (Vec<T>, Vec<Skip>) {
    let mut ok = Vec::new();
    let mut skipped = Vec::new();
    for (id, r) in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => skipped.push(Skip::new(&id, e)),
        }
    }
    (ok, skipped)
}

/// Scores for every author in `ids` (all corpus authors when `None`).
pub fn score_population(corpus: &Corpus, ids: Option<&[String]>, min_papers: usize) -> (Vec<BreadthScores>, Vec<Skip>) {
    let mut ids: Vec<String> = match ids {
        Some(ids) => ids.to_vec(),
        None => corpus.author_ids().map(str::to_owned).collect(),
    };
    ids.sort();
    ids.dedup();
    let results: Vec<(String, Result<BreadthScores>)> = ids
        .into_par_iter()
        .map(|id| {
            let r = corpus
                .author_profile(&id, min_papers)
                .and_then(|p| score_author(&p, corpus));
            (id, r)
        })
        .collect();
    partition(results)
}

/// Self-citation indicators for every author.
///
/// Authors whose first publication year falls in `exclude_first_years` are
/// skipped.
pub fn selfcite_population(
    corpus: &Corpus,
    min_papers: usize,
    exclude_first_years: Option<RangeInclusive<i32>>,
    mode: RealizedRate,
) -> (Vec<SelfCiteIndicators>, Vec<Skip>) {
    let ids: Vec<String> = corpus.author_ids().map(str::to_owned).collect();
    let results: Vec<(String, Result<SelfCiteIndicators>)> = ids
        .into_par_iter()
        .map(|id| {
            let r = corpus.author_profile(&id, min_papers).and_then(|p| {
                if let Some(window) = &exclude_first_years {
                    if window.contains(&p.first_year) {
                        return Err(Error::InvalidArgument(format!(
                            "first publication year {} in excluded window {}-{}",
                            p.first_year,
                            window.start(),
                            window.end()
                        )));
                    }
                }
                indicators(&p, corpus, mode)
            });
            (id, r)
        })
        .collect();
    partition(results)
}

/// One row of the validation report.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureComparison {
    pub measure: Measure,
    /// Treatment minus control.
    pub effect: EffectSize,
    pub r: f64,
    pub dominance: Dominance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub pairs: Vec<MatchedPair>,
    pub unmatched: Vec<String>,
    /// Treatment authors that could not be scored.
    pub skipped_treatment: Vec<Skip>,
    /// Empty when fewer than two pairs were found.
    pub comparisons: Vec<MeasureComparison>,
}

impl ValidationReport {
    pub fn pairs_csv(&self) -> String {
        let mut out = String::from("treatment_id,control_id\n");
        for p in &self.pairs {
            let _ = writeln!(out, "{},{}", p.treatment_id, p.control_id);
        }
        out
    }

    pub fn effect_sizes_csv(&self) -> String {
        let mut out = String::from("measure,d,ci_low,ci_high\n");
        for c in &self.comparisons {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6}",
                c.measure.key(),
                c.effect.d,
                c.effect.ci_low,
                c.effect.ci_high
            );
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("measure,n_pairs,r,control_higher,ties,control_higher_fraction\n");
        for c in &self.comparisons {
            let _ = writeln!(
                out,
                "{},{},{:.6},{},{},{:.6}",
                c.measure.key(),
                c.dominance.pairs,
                c.r,
                c.dominance.control_higher,
                c.dominance.ties,
                c.dominance.fraction
            );
        }
        out
    }

    /// Aligned text table: description, d with interval, r, dominance.
    pub fn text_table(&self) -> String {
        let width = Measure::ALL.iter().map(|m| m.description().len()).max().unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:width$}  {:>24}  {:>7}  {:>9}",
            "candidate measure", "Cohen's d [95% CI]", "r", "C > T"
        );
        for c in &self.comparisons {
            let d = format!("{:.2} [{:.2}, {:.2}]", c.effect.d, c.effect.ci_low, c.effect.ci_high);
            let _ = writeln!(
                out,
                "{:width$}  {:>24}  {:>7.2}  {:>8.0}%",
                c.measure.description(),
                d,
                c.r,
                100.0 * c.dominance.fraction
            );
        }
        let _ = writeln!(
            out,
            "\n{} pairs matched, {} treatment authors unmatched, {} not scorable",
            self.pairs.len(),
            self.unmatched.len(),
            self.skipped_treatment.len()
        );
        out
    }
}

/// Matches each scorable treatment author to a control and compares the
/// two groups on every measure.
pub fn run_validation(
    corpus: &Corpus,
    treatment_ids: &[String],
    min_papers: usize,
    criteria: &MatchCriteria,
) -> Result<ValidationReport> {
    if treatment_ids.is_empty() {
        return Err(Error::InvalidArgument("empty treatment list".into()));
    }
    let (scores, _) = score_population(corpus, None, min_papers);
    let by_id: HashMap<&str, &BreadthScores> = scores.iter().map(|s| (s.author_id.as_str(), s)).collect();
    let treated: HashSet<&str> = treatment_ids.iter().map(String::as_str).collect();

    let mut treatments: Vec<AuthorProfile> = Vec::new();
    let mut skipped_treatment = Vec::new();
    let mut seen = HashSet::new();
    for id in treatment_ids {
        if !seen.insert(id.as_str()) {
            continue;
        }
        if by_id.contains_key(id.as_str()) {
            treatments.push(corpus.author_profile(id, min_papers)?);
        } else {
            let reason = match corpus.author_profile(id, min_papers) {
                Err(e) => e.to_string(),
                Ok(_) => "fewer than two papers with embeddings".to_owned(),
            };
            skipped_treatment.push(Skip::new(id, reason));
        }
    }
    if treatments.is_empty() {
        return Err(Error::InvalidArgument("no treatment author could be scored".into()));
    }

    let pool: Vec<AuthorProfile> = scores
        .iter()
        .filter(|s| !treated.contains(s.author_id.as_str()))
        .map(|s| corpus.author_profile(&s.author_id, min_papers))
        .collect::<Result<_>>()?;
    let outcome = match_all(&treatments, &pool, criteria);

    let mut comparisons = Vec::new();
    if outcome.pairs.len() >= 2 {
        for measure in Measure::ALL {
            let t: Vec<f64> = outcome
                .pairs
                .iter()
                .map(|p| by_id[p.treatment_id.as_str()].get(measure))
                .collect();
            let c: Vec<f64> = outcome
                .pairs
                .iter()
                .map(|p| by_id[p.control_id.as_str()].get(measure))
                .collect();
            let effect = cohens_d(&t, &c)?;
            let values: HashMap<String, f64> = outcome
                .pairs
                .iter()
                .flat_map(|p| [&p.treatment_id, &p.control_id])
                .map(|id| (id.clone(), by_id[id.as_str()].get(measure)))
                .collect();
            comparisons.push(MeasureComparison {
                measure,
                r: d_to_r(effect.d, effect.n_treatment, effect.n_control)?,
                dominance: pair_dominance_fraction(&outcome.pairs, &values)?,
                effect,
            });
        }
    }
    Ok(ValidationReport {
        pairs: outcome.pairs,
        unmatched: outcome.unmatched,
        skipped_treatment,
        comparisons,
    })
}
