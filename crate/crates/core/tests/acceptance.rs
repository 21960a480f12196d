//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs under `cargo test` with a custom harness.

use std::collections::HashMap;
use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use breadth::corpus::Corpus;
use breadth::knowledge_space::{to_distance, DistanceMatrix, SimilarityMatrix};
use breadth::mds::{classical_mds, group_layout};
use breadth::measures::{
    avg_shortest_path, furthest_neighbor_avg, harmonic_credit, mean_pairwise, nearest_neighbor_avg, score_author,
    BreadthScores, Measure,
};
use breadth::plot::{render_svg, PlotPanel, PlotStyle};
use breadth::population::{run_validation, score_population, selfcite_population, ValidationReport};
use breadth::selfcite::{component_indicator, RealizedRate, SelfCiteNetwork};
use breadth::synth::{generate_author, generate_cohort, SelfCiteWiring, SynthConfig};
use breadth::validation::{cohens_d_interval, d_to_r, fisher_interval, pearson_with_ci, spearman, MatchCriteria};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_budget(start: Instant, budget: Duration, detail: String) -> Outcome {
    let elapsed = start.elapsed();
    let detail = format!("{detail}; {:.2}s", elapsed.as_secs_f64());
    check(elapsed < budget, detail)
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

fn random_similarity(rng: &mut impl Rng, n: usize) -> SimilarityMatrix {
    let mut v = vec![1.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s = rng.random_range(-1.0..=1.0);
            v[i * n + j] = s;
            v[j * n + i] = s;
        }
    }
    SimilarityMatrix::from_values(ids(n), v).unwrap()
}

fn effect_size_interval() -> Outcome {
    let start = Instant::now();
    let (lo, hi) = cohens_d_interval(-0.81, 86, 86, 0.95).map_err(|e| e.to_string())?;
    let ok = (lo + 1.12).abs() <= 0.01 && (hi + 0.50).abs() <= 0.01;
    within_budget(start, Duration::from_secs(1), format!("[{lo:.4}, {hi:.4}]")).and_then(|d| check(ok, d))
}

fn d_to_r_conversion() -> Outcome {
    let start = Instant::now();
    let r = d_to_r(-0.85, 500, 500).map_err(|e| e.to_string())?;
    let ok = (r.abs() - 0.39).abs() <= 0.005;
    within_budget(start, Duration::from_secs(1), format!("|r| = {:.4}", r.abs())).and_then(|d| check(ok, d))
}

fn fisher_ci() -> Outcome {
    let start = Instant::now();
    let (lo, hi) = fisher_interval(0.40, 179_298, 0.95).map_err(|e| e.to_string())?;
    let ok = (lo - 0.396).abs() <= 0.001 && (hi - 0.404).abs() <= 0.001;
    within_budget(start, Duration::from_secs(1), format!("[{lo:.4}, {hi:.4}]")).and_then(|d| check(ok, d))
}

fn component_bounds() -> Outcome {
    let refs: HashMap<String, Vec<String>> = HashMap::new();
    let none: Vec<String> = Vec::new();
    for p in 2..=50usize {
        let nodes = ids(p);
        let edgeless = SelfCiteNetwork::from_references(nodes.clone(), |id| refs.get(id).unwrap_or(&none));
        let chained: HashMap<String, Vec<String>> =
            (1..p).map(|i| (format!("p{i}"), vec![format!("p{}", i - 1)])).collect();
        let chain = SelfCiteNetwork::from_references(nodes, |id| chained.get(id).unwrap_or(&none));
        let low = component_indicator(&edgeless).map_err(|e| e.to_string())?;
        let high = component_indicator(&chain).map_err(|e| e.to_string())?;
        if low != 1.0 / p as f64 || high != 1.0 {
            return Err(format!("P = {p}: edgeless {low}, chained {high}"));
        }
    }
    Ok("P in 2..=50 exact".into())
}

fn measure_ordering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    for _ in 0..1000 {
        let n = rng.random_range(2..=30);
        let sim = random_similarity(&mut rng, n);
        let (f, m, nn) = (
            furthest_neighbor_avg(&sim).unwrap(),
            mean_pairwise(&sim).unwrap(),
            nearest_neighbor_avg(&sim).unwrap(),
        );
        if f > m + 1e-12 || m > nn + 1e-12 {
            violations += 1;
        }
    }
    check(violations == 0, format!("{violations} violations in 1000 matrices"))
}

/// Minimum over all simple paths, by exhaustive depth-first enumeration.
fn brute_force_aspl(d: &DistanceMatrix) -> f64 {
    fn walk(d: &DistanceMatrix, at: usize, length: f64, visited: &mut Vec<bool>, best: &mut [f64]) {
        for next in 0..d.order() {
            if !visited[next] {
                let l = length + d.get(at, next);
                best[next] = best[next].min(l);
                visited[next] = true;
                walk(d, next, l, visited, best);
                visited[next] = false;
            }
        }
    }
    let n = d.order();
    let mut total = 0.0;
    for s in 0..n {
        let mut best = vec![f64::INFINITY; n];
        let mut visited = vec![false; n];
        visited[s] = true;
        walk(d, s, 0.0, &mut visited, &mut best);
        total += best
            .iter()
            .enumerate()
            .filter(|(t, _)| *t > s)
            .map(|(_, b)| b)
            .sum::<f64>();
    }
    total / (n * (n - 1) / 2) as f64
}

fn shortest_path_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let d = to_distance(&random_similarity(&mut rng, n));
        let diff = (avg_shortest_path(&d).unwrap() - brute_force_aspl(&d)).abs();
        worst = worst.max(diff);
    }
    // Triangle with a shortcut: 0-2 directly costs 1.8, via 1 only 0.4.
    let tri = DistanceMatrix::from_values(ids(3), vec![0.0, 0.2, 1.8, 0.2, 0.0, 0.2, 1.8, 0.2, 0.0]).unwrap();
    let aspl = avg_shortest_path(&tri).unwrap();
    let direct = (0.2 + 0.2 + 1.8) / 3.0;
    let shortcut = aspl < direct && (aspl - brute_force_aspl(&tri)).abs() < 1e-12;
    check(
        worst <= 1e-9 && shortcut,
        format!("max discrepancy {worst:.2e}; shortcut triangle {aspl:.4} < {direct:.4}"),
    )
}

fn discrimination_base() -> SynthConfig {
    SynthConfig {
        n_papers: 20,
        topic_separation: 1.5,
        within_topic_spread: 0.8,
        noise_rank: 8,
        dim: 64,
        ..Default::default()
    }
}

fn synthetic_discrimination() -> Outcome {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let report: ValidationReport = pool
        .install(|| {
            let cohort = generate_cohort(100, 100, &discrimination_base(), 7)?;
            let corpus = cohort.corpus()?;
            run_validation(&corpus, &cohort.treatment, 10, &MatchCriteria::default())
        })
        .map_err(|e| e.to_string())?;
    let by: HashMap<Measure, _> = report.comparisons.iter().map(|c| (c.measure, c)).collect();
    let mut ok = report.pairs.len() >= 90;
    let mut parts = vec![format!("{} pairs", report.pairs.len())];
    for m in Measure::ALL {
        let c = by.get(&m).ok_or("missing comparison")?;
        // Broad authors should score lower on similarities and higher on path length.
        let dom = &c.dominance;
        let fraction = if m.is_similarity() {
            dom.fraction
        } else {
            (dom.pairs - dom.control_higher - dom.ties) as f64 / dom.pairs as f64
        };
        ok &= c.effect.d.abs() >= 0.8 && fraction > 0.6;
        parts.push(format!("{} d={:.2} dom={:.2}", m.key(), c.effect.d, fraction));
    }
    let fn_d = by[&Measure::FurthestNeighbor].effect.d.abs();
    let nn_d = by[&Measure::NearestNeighbor].effect.d.abs();
    ok &= fn_d > nn_d;
    within_budget(start, Duration::from_secs(60), parts.join(", ")).and_then(|d| check(ok, d))
}

fn oracle_monotonicity() -> Outcome {
    let start = Instant::now();
    let points = 50;
    let replicates = 20;
    let mut dispersion = Vec::with_capacity(points);
    let mut breadth = Vec::with_capacity(points);
    for k in 0..points {
        let separation = 0.1 + 2.9 * k as f64 / (points - 1) as f64;
        let (mut truth, mut score) = (0.0, 0.0);
        for r in 0..replicates {
            let config = SynthConfig {
                n_topics: 4,
                topic_separation: separation,
                seed: (k * replicates + r) as u64,
                ..Default::default()
            };
            let author = generate_author(&config, "a").map_err(|e| e.to_string())?;
            let corpus = author.corpus().map_err(|e| e.to_string())?;
            let s = score_author(&author.profile(&corpus).map_err(|e| e.to_string())?, &corpus)
                .map_err(|e| e.to_string())?;
            truth += author.truth.latent_dispersion;
            score += 1.0 - s.wfn_avg;
        }
        dispersion.push(truth / replicates as f64);
        breadth.push(score / replicates as f64);
    }
    let rho = spearman(&dispersion, &breadth).map_err(|e| e.to_string())?;
    within_budget(start, Duration::from_secs(120), format!("rho = {rho:.4}")).and_then(|d| check(rho >= 0.9, d))
}

/// RMS distance between `x` and the best rotation/reflection of centered `y`.
fn procrustes_rms(x: &[[f64; 2]], y: &[[f64; 2]]) -> f64 {
    let center = |p: &[[f64; 2]]| {
        let n = p.len() as f64;
        let (cx, cy) = p.iter().fold((0.0, 0.0), |a, q| (a.0 + q[0], a.1 + q[1]));
        p.iter().map(|q| [q[0] - cx / n, q[1] - cy / n]).collect::<Vec<_>>()
    };
    let (x, y) = (center(x), center(y));
    let mut cross = Matrix2::<f64>::zeros();
    for (a, b) in x.iter().zip(&y) {
        for i in 0..2 {
            for j in 0..2 {
                cross[(i, j)] += b[i] * a[j];
            }
        }
    }
    let svd = cross.svd(true, true);
    let rotation: Matrix2<f64> = svd.u.unwrap() * svd.v_t.unwrap();
    let sq: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| {
            let rb = rotation.transpose() * Vector2::new(b[0], b[1]);
            (rb[0] - a[0]).powi(2) + (rb[1] - a[1]).powi(2)
        })
        .sum();
    (sq / x.len() as f64).sqrt()
}

fn mds_recovery() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(3..=40);
        let points: Vec<[f64; 2]> = (0..n)
            .map(|_| loop {
                let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                if p[0] * p[0] + p[1] * p[1] <= 1.0 {
                    break p;
                }
            })
            .collect();
        let dist = DMatrix::from_fn(n, n, |i, j| {
            ((points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2)).sqrt()
        });
        let values: Vec<f64> = (0..n * n).map(|k| dist[(k / n, k % n)]).collect();
        let d = DistanceMatrix::from_values(ids(n), values).map_err(|e| e.to_string())?;
        let layout = classical_mds(&d).map_err(|e| e.to_string())?;
        let recovered: Vec<[f64; 2]> = layout.points.iter().map(|p| [p.x, p.y]).collect();
        worst = worst.max(procrustes_rms(&points, &recovered));
    }
    within_budget(start, Duration::from_secs(10), format!("worst RMS {worst:.2e}")).and_then(|d| check(worst < 1e-9, d))
}

fn harmonic_credit_shares() -> Outcome {
    for n in 1..=100 {
        let shares: Vec<f64> = (1..=n).map(|i| harmonic_credit(i, n).unwrap()).collect();
        let total: f64 = shares.iter().sum();
        if (total - 1.0).abs() > 1e-12 || shares.windows(2).any(|w| w[1] >= w[0]) {
            return Err(format!("N = {n}: sum {total}"));
        }
    }
    let first = harmonic_credit(1, 2).unwrap();
    check(first == 2.0 / 3.0, format!("(1, 2) -> {first}; N in 1..=100 sum to 1"))
}

fn selfcite_sign() -> Outcome {
    let base = SynthConfig {
        selfcite: Some(SelfCiteWiring::default()),
        ..discrimination_base()
    };
    let cohort = generate_cohort(100, 100, &base, 11).map_err(|e| e.to_string())?;
    let corpus = cohort.corpus().map_err(|e| e.to_string())?;
    let ids: Vec<String> = cohort.authors.iter().map(|a| a.author_id.clone()).collect();
    let (scores, _) = score_population(&corpus, Some(&ids), 10);
    let (ind, _) = selfcite_population(&corpus, 10, None, RealizedRate::Aggregate);
    let ind: HashMap<&str, _> = ind.iter().map(|i| (i.author_id.as_str(), i)).collect();
    let (mut wfn, mut realized, mut component) = (Vec::new(), Vec::new(), Vec::new());
    for s in &scores {
        let Some(i) = ind.get(s.author_id.as_str()) else {
            continue;
        };
        let Some(r) = i.realized_srr else { continue };
        wfn.push(s.wfn_avg);
        realized.push(r);
        component.push(i.component_indicator);
    }
    let a = pearson_with_ci(&wfn, &realized, 0.95).map_err(|e| e.to_string())?;
    let b = pearson_with_ci(&wfn, &component, 0.95).map_err(|e| e.to_string())?;
    check(
        a.ci_low > 0.0 && b.ci_low > 0.0,
        format!(
            "n = {}; realized r = {:.3} [{:.3}, {:.3}]; component r = {:.3} [{:.3}, {:.3}]",
            a.n, a.r, a.ci_low, a.ci_high, b.r, b.ci_low, b.ci_high
        ),
    )
}

/// synth -> files -> load -> measure -> validate -> mds, written to `dir`.
fn pipeline(dir: &Path) -> breadth::Result<()> {
    let cohort = generate_cohort(20, 20, &discrimination_base(), 3)?;
    cohort.write(dir)?;
    let corpus = Corpus::load(dir.join("papers.jsonl"), dir.join("embeddings.jsonl"))?;
    let (scores, _) = score_population(&corpus, None, 10);
    let mut csv = BreadthScores::csv_header(&Measure::ALL) + "\n";
    for s in &scores {
        csv += &(s.csv_row(&Measure::ALL) + "\n");
    }
    std::fs::write(dir.join("scores.csv"), csv)?;
    let report = run_validation(&corpus, &cohort.treatment, 10, &MatchCriteria::default())?;
    std::fs::write(dir.join("pairs.csv"), report.pairs_csv())?;
    std::fs::write(dir.join("effect_sizes.csv"), report.effect_sizes_csv())?;
    std::fs::write(dir.join("report.txt"), report.text_table())?;
    let pair = &report.pairs[0];
    let g = group_layout(&corpus, &[(&pair.treatment_id, "T"), (&pair.control_id, "C")], 10)?;
    std::fs::write(dir.join("layout.csv"), g.to_csv()?)?;
    let groups: Vec<&str> = g.groups.iter().map(String::as_str).collect();
    let panel = PlotPanel::from_layout("pair", &g.layout, &groups, Some(&g.weights))?;
    std::fs::write(dir.join("layout.svg"), render_svg(&[panel], &PlotStyle::default())?)?;
    Ok(())
}

fn end_to_end_determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    pipeline(a.path()).map_err(|e| e.to_string())?;
    pipeline(b.path()).map_err(|e| e.to_string())?;
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    for name in &names {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).map_err(|e| e.to_string())?;
        if x != y {
            return Err(format!("{} differs", name.to_string_lossy()));
        }
    }
    check(names.len() == 10, format!("{} files identical", names.len()))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("effect-size interval", effect_size_interval),
        ("d to r conversion", d_to_r_conversion),
        ("Fisher interval", fisher_ci),
        ("component indicator bounds", component_bounds),
        ("measure ordering", measure_ordering),
        ("shortest-path oracle", shortest_path_oracle),
        ("synthetic discrimination", synthetic_discrimination),
        ("oracle monotonicity", oracle_monotonicity),
        ("MDS recovery", mds_recovery),
        ("harmonic credit", harmonic_credit_shares),
        ("self-citation sign", selfcite_sign),
        ("end-to-end determinism", end_to_end_determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
