use std::collections::BTreeSet;

use proptest::prelude::*;

use breadth::corpus::{Corpus, Embedding, PaperRecord};

const AUTHORS: [&str; 5] = ["ada", "bo", "cy", "di", "ed"];

fn corpus_strategy() -> impl Strategy<Value = (Vec<PaperRecord>, Vec<Embedding>)> {
    let paper = (
        1990..2020i32,
        proptest::sample::subsequence(AUTHORS.to_vec(), 1..=AUTHORS.len()).prop_shuffle(),
        proptest::collection::vec(0..30usize, 0..4),
        proptest::option::of(proptest::sample::select(vec!["BIO", "PHYS"])),
        proptest::collection::vec(-1.0f32..1.0, 3),
        any::<bool>(),
    );
    proptest::collection::vec(paper, 1..25).prop_map(|raw| {
        let mut papers = Vec::new();
        let mut embeddings = Vec::new();
        for (i, (year, authors, refs, label, mut v, embedded)) in raw.into_iter().enumerate() {
            let id = format!("p{i}");
            let mut p = PaperRecord::new(&id, year, authors.into_iter().map(String::from).collect())
                .with_references(refs.into_iter().map(|r| format!("p{r}")).collect());
            p.title = Some(format!("Paper {i}"));
            if let Some(l) = label {
                p = p.with_field_label(l);
            }
            papers.push(p);
            v[0] += 2.0;
            if embedded {
                embeddings.push(Embedding::new(id, v).unwrap());
            }
        }
        (papers, embeddings)
    })
}

proptest! {
    #[test]
    fn write_then_load_is_identity((papers, embeddings) in corpus_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let (pp, ep) = (dir.path().join("papers.jsonl"), dir.path().join("embeddings.jsonl"));
        let corpus = Corpus::from_parts(papers.clone(), embeddings.clone()).unwrap();
        corpus.write_papers(&pp).unwrap();
        corpus.write_embeddings(&ep).unwrap();

        let reloaded = Corpus::load(&pp, &ep).unwrap();
        prop_assert_eq!(reloaded.papers(), &papers[..]);
        let again: Vec<Embedding> = reloaded.embeddings().collect();
        prop_assert_eq!(again, embeddings);
        prop_assert_eq!(reloaded.report(), corpus.report());

        let twice = Corpus::load(&pp, &ep).unwrap();
        prop_assert_eq!(twice.report(), reloaded.report());
        prop_assert_eq!(twice.author_ids().collect::<Vec<_>>(), reloaded.author_ids().collect::<Vec<_>>());
    }

    #[test]
    fn profiles_cover_every_incidence((papers, embeddings) in corpus_strategy()) {
        let corpus = Corpus::from_parts(papers.clone(), embeddings).unwrap();
        let expected: BTreeSet<(String, String, usize)> = papers
            .iter()
            .flat_map(|p| {
                p.authors
                    .iter()
                    .enumerate()
                    .map(move |(k, a)| (a.clone(), p.paper_id.clone(), k + 1))
            })
            .collect();
        let mut found = BTreeSet::new();
        for author in corpus.author_ids() {
            let profile = corpus.author_profile(author, 1).unwrap();
            prop_assert!(profile.first_year <= profile.last_year);
            for p in &profile.papers {
                let record = corpus.paper(&p.paper_id).unwrap();
                prop_assert_eq!(&record.authors[p.position - 1], author);
                prop_assert!(found.insert((author.to_owned(), p.paper_id.clone(), p.position)));
            }
        }
        prop_assert_eq!(found, expected);
    }
}
