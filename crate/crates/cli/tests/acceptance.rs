//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! fails.
//!
//! ```text
//! cargo test -p atlas-forge-cli --test acceptance
//! ```

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use atlas_forge_core::ingest::{merge_similar, merge_similar_with};
use atlas_forge_core::layout::{pairwise_affinities, tsne_with, FallbackEmbedder, TsneParams};
use atlas_forge_core::metrics::{icc, sus_score, MetricsError, RatingsMatrix, SusResponse};
use atlas_forge_core::model::{
    assign_categories, parse_atlas, serialize_atlas, validate_dataset, validate_use, Affected, AssessmentItem, AtlasDataset, Coord,
    ImpactCard, ImplementationPotential, Mitigation, RiskLevel, RuleTable, SocioTechnicalLayer, UseCase,
};
use atlas_forge_core::Execution;
use atlas_forge_service::{load_atlas, router};
use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tower::ServiceExt;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mock_pipeline_count() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("atlas.json");
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_atlas-forge"))
        .args(["generate", "--technology", "facial recognition", "--mock-seed", "1", "--domains-file"])
        .arg(repo("data/default-domains.txt"))
        .arg("--out")
        .arg(&out)
        .env("RUST_LOG", "warn")
        .status()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure(status.success(), || format!("generate exited with {status}"))?;
    let d = parse_atlas(&std::fs::read(&out).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let invalid = d.uses.iter().filter(|u| !validate_use(u).is_valid()).count();
    ensure(d.uses.len() == 138, || format!("{} uses", d.uses.len()))?;
    ensure(invalid == 0, || format!("{invalid} uses fail validate_use"))?;
    ensure(elapsed < 30.0, || format!("took {elapsed:.1}s"))?;
    Ok(format!("138 uses, all valid, {elapsed:.2}s"))
}

fn sample_stats() -> Check {
    let out = Command::new(env!("CARGO_BIN_EXE_atlas-forge"))
        .args(["stats", "--atlas"])
        .arg(repo("data/sample/facial-recognition.atlas.json"))
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("stats exited with {}", out.status))?;
    let text = String::from_utf8_lossy(&out.stdout);
    let count = |label: &str| -> Option<usize> {
        text.lines().find_map(|l| l.trim_start().strip_prefix(label)?.split_whitespace().next()?.parse().ok())
    };
    let risk = ["unacceptable", "high", "limited-low"].map(count);
    let potential = ["existing", "upcoming", "unlikely"].map(count);
    ensure(risk == [Some(10), Some(66), Some(62)], || format!("risk histogram {risk:?}"))?;
    ensure(potential == [Some(91), Some(39), Some(8)], || format!("implementation histogram {potential:?}"))?;
    Ok("risk 10/66/62, implementation 91/39/8".into())
}

fn layout_quality() -> Check {
    let (labels, points) = common::cluster_fixture();
    let params = TsneParams::default();
    let start = Instant::now();
    let a = tsne_with(&points, &params, Execution::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let b = tsne_with(&points, &params, Execution::default()).map_err(|e| e.to_string())?;
    let s = common::silhouette(&a.coords, &labels);
    let (kl250, last) = (a.kl_trace[249], *a.kl_trace.last().unwrap());
    let bit_equal = a.coords.iter().flatten().zip(b.coords.iter().flatten()).all(|(x, y)| x.to_bits() == y.to_bits());
    ensure(s > 0.5, || format!("silhouette {s:.4}"))?;
    ensure(last < kl250, || format!("final KL {last:.4} >= {kl250:.4} at iteration 250"))?;
    ensure(bit_equal, || "two runs differ".into())?;
    ensure(elapsed < 10.0, || format!("took {elapsed:.1}s"))?;
    Ok(format!("silhouette {s:.3}, KL {kl250:.3} -> {last:.3}, bit-equal, {elapsed:.2}s"))
}

fn affinity_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(656);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut worst_sum: f64 = 0.0;
    let mut worst_perp: f64 = 0.0;
    for case in 0..50 {
        let n = rng.random_range(3..=200);
        let dim = rng.random_range(1..=16);
        let points: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| normal.sample(&mut rng)).collect()).collect();
        let target = TsneParams { perplexity: rng.random_range(1.0..50.0), ..Default::default() }.effective_perplexity(n);
        let p = pairwise_affinities(&points, target, 1e-5).map_err(|e| format!("case {case}: {e}"))?;
        let mut sum = 0.0;
        for i in 0..n {
            ensure(p.get(i, i) == 0.0, || format!("case {case}: diagonal {i}"))?;
            for j in 0..n {
                ensure(p.get(i, j) == p.get(j, i), || format!("case {case}: asymmetric at ({i}, {j})"))?;
                sum += p.get(i, j);
            }
        }
        worst_sum = worst_sum.max((sum - 1.0).abs());
        for perp in p.achieved_perplexities() {
            worst_perp = worst_perp.max((perp - target).abs());
        }
    }
    ensure(worst_sum <= 1e-9, || format!("|sum - 1| up to {worst_sum:e}"))?;
    ensure(worst_perp <= 1e-3, || format!("perplexity off by up to {worst_perp:e}"))?;
    Ok(format!("50 datasets, max |sum-1| {worst_sum:.1e}, max perplexity error {worst_perp:.1e}"))
}

const WORDS: [&str; 12] = ["face", "faces", "camera", "cameras", "loan", "loans", "school", "schools", "police", "road", "roads", "video"];

fn random_corpus(rng: &mut ChaCha8Rng) -> Vec<UseCase> {
    let n = rng.random_range(1..30);
    (0..n)
        .map(|i| {
            let w = [(); 5].map(|_| *WORDS.choose(rng).unwrap());
            let mut u = UseCase::new(w[0], w[1], w[2], w[3], w[4], "d");
            u.source_incident_ids.insert(i as u64);
            u
        })
        .collect()
}

fn incident_ids(uses: &[UseCase]) -> BTreeSet<u64> {
    uses.iter().flat_map(|u| u.source_incident_ids.iter().copied()).collect()
}

fn merge_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(657);
    for case in 0..100 {
        let uses = random_corpus(&mut rng);
        let t: f64 = rng.random_range(0.3..1.0);
        let (once, _) = merge_similar_with(&uses, &FallbackEmbedder, t, Execution::default()).map_err(|e| e.to_string())?;
        let total: usize = once.iter().map(|u| u.source_incident_ids.len()).sum();
        ensure(incident_ids(&once) == incident_ids(&uses) && total == uses.len(), || format!("corpus {case}: incident ids not conserved"))?;
        let (twice, _) = merge_similar_with(&once, &FallbackEmbedder, t, Execution::default()).map_err(|e| e.to_string())?;
        ensure(twice == once, || format!("corpus {case}: merge is not idempotent at {t}"))?;
        let t2: f64 = rng.random_range(0.3..1.0);
        let (lo, hi) = if t <= t2 { (t, t2) } else { (t2, t) };
        let n_lo = merge_similar(&uses, &FallbackEmbedder, lo).map_err(|e| e.to_string())?.0.len();
        let n_hi = merge_similar(&uses, &FallbackEmbedder, hi).map_err(|e| e.to_string())?.0.len();
        ensure(n_lo <= n_hi, || format!("corpus {case}: {n_lo} clusters at {lo} > {n_hi} at {hi}"))?;
    }

    let rows = common::planted_rows();
    let uses: Vec<UseCase> = rows
        .iter()
        .enumerate()
        .map(|(i, (_, [p, c, u, s, d]))| {
            let mut uc = UseCase::new(p.as_str(), c.as_str(), u.as_str(), s.as_str(), d.as_str(), p.as_str());
            uc.source_incident_ids.insert(i as u64 + 1);
            uc
        })
        .collect();
    let (_, report) = merge_similar(&uses, &FallbackEmbedder, 0.92).map_err(|e| e.to_string())?;
    // oracle from tools/fixtures.py: within-template cosine >= 0.9626, across
    // templates <= 0.5466, hence exactly the 20 templates at 0.92
    let template_sets: BTreeSet<BTreeSet<u64>> = (0..20)
        .map(|t| rows.iter().enumerate().filter(|(_, (tt, _))| *tt == t).map(|(i, _)| i as u64 + 1).collect())
        .collect();
    let got: BTreeSet<BTreeSet<u64>> = report.clusters.iter().map(|c| c.member_incident_ids.clone()).collect();
    ensure(report.clusters.len() == 20, || format!("planted fixture gave {} clusters", report.clusters.len()))?;
    ensure(got == template_sets, || "planted clusters do not match the templates".into())?;
    Ok("100 corpora conserved/idempotent/monotone, planted 60 -> 20".into())
}

fn icc_oracle(x: &[Vec<f64>]) -> f64 {
    let (n, k) = (x.len() as f64, x[0].len() as f64);
    let grand: f64 = x.iter().flatten().sum::<f64>() / (n * k);
    let ss_total: f64 = x.iter().flatten().map(|v| (v - grand).powi(2)).sum();
    let ss_rows: f64 = x.iter().map(|r| k * (r.iter().sum::<f64>() / k - grand).powi(2)).sum();
    let ss_cols: f64 = (0..x[0].len()).map(|j| n * (x.iter().map(|r| r[j]).sum::<f64>() / n - grand).powi(2)).sum();
    let msr = ss_rows / (n - 1.0);
    let msc = ss_cols / (k - 1.0);
    let mse = (ss_total - ss_rows - ss_cols) / ((n - 1.0) * (k - 1.0));
    (msr - mse) / (msr + (k - 1.0) * mse + k * (msc - mse) / n)
}

fn metrics_oracles() -> Check {
    let sus = |items: [u8; 10]| SusResponse::new(items).map(|r| sus_score(&r)).map_err(|e| e.to_string());
    for (items, expected) in [([3; 10], 50.0), ([5, 1, 5, 1, 5, 1, 5, 1, 5, 1], 100.0), ([1, 5, 1, 5, 1, 5, 1, 5, 1, 5], 0.0)] {
        let got = sus(items)?;
        ensure(got == expected, || format!("sus {items:?} = {got}, expected {expected}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(658);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    while compared < 20 {
        let n = rng.random_range(2..=30);
        let k = rng.random_range(2..=6);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| rng.random_range(1..=7) as f64).collect()).collect();
        match icc(&RatingsMatrix::new(rows.clone()).map_err(|e| e.to_string())?) {
            Ok(v) => {
                worst = worst.max((v - icc_oracle(&rows)).abs());
                compared += 1;
            }
            Err(MetricsError::DegenerateMatrix) => {}
            Err(e) => return Err(e.to_string()),
        }
    }
    ensure(worst <= 1e-9, || format!("icc differs from the oracle by {worst:e}"))?;
    let flat = RatingsMatrix::new(vec![vec![4.0, 4.0], vec![4.0, 4.0]]).map_err(|e| e.to_string())?;
    ensure(matches!(icc(&flat), Err(MetricsError::DegenerateMatrix)), || "constant matrix not rejected".into())?;
    ensure(matches!(RatingsMatrix::new(vec![vec![1.0, 2.0]]), Err(MetricsError::MatrixShape(_))), || "single subject not rejected".into())?;
    ensure(matches!(SusResponse::new([0; 10]), Err(MetricsError::OutOfRange { .. })), || "out-of-range SUS item not rejected".into())?;
    ensure(matches!(SusResponse::from_slice(&[3; 11]), Err(MetricsError::SusLength(11))), || "11-item SUS not rejected".into())?;
    Ok(format!("sus 3/3, icc max error {worst:.1e} over 20 matrices, degenerate inputs rejected"))
}

fn random_text(rng: &mut ChaCha8Rng) -> String {
    const T: [&str; 8] = ["border", "school", "bank", "children", "grid", "police", "ünïcode", "\"quoted\""];
    (0..rng.random_range(1..4)).map(|_| *T.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn random_dataset(rng: &mut ChaCha8Rng, rules: &RuleTable) -> AtlasDataset {
    let mut d = AtlasDataset::new(random_text(rng));
    for i in 0..rng.random_range(0..10) {
        let mut u = UseCase::new(format!("{} {i}", random_text(rng)), random_text(rng), random_text(rng), random_text(rng), random_text(rng), random_text(rng));
        u.daily = rng.random_bool(0.3);
        u.implementation_potential = ImplementationPotential::ALL[rng.random_range(0..3)];
        u.risk_level = RiskLevel::ALL[rng.random_range(0..3)];
        u.categories = assign_categories(&u, rules);
        let item = |rng: &mut ChaCha8Rng| AssessmentItem {
            text: random_text(rng),
            layer: SocioTechnicalLayer::ALL[rng.random_range(0..3)],
            affected: [Affected::ALL[rng.random_range(0..3)]].into_iter().collect(),
            basis: rng.random_bool(0.5).then(|| format!("UDHR Article {}", rng.random_range(1..=30))),
        };
        let card = ImpactCard {
            use_id: u.id.clone(),
            risks: (0..rng.random_range(1..3)).map(|_| item(rng)).collect(),
            benefits: (0..rng.random_range(0..3)).map(|_| item(rng)).collect(),
            mitigations: vec![Mitigation { text: random_text(rng), layer: SocioTechnicalLayer::Capability }],
            mitigated_description: random_text(rng),
            mitigated_risk_level: RiskLevel::LimitedLow,
            risk_reasoning: random_text(rng),
            illustration_prompt: format!("Generate an image for the {}", u.short_description),
            illustration_ref: None,
        };
        let c = Coord::new(rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0)).quantized();
        d.coords.insert(u.id.clone(), c);
        d.split_coords.insert(u.id.clone(), Coord::new(rng.random_range(0.0..=1.0), c.y).quantized());
        d.uses.push(u);
        d.cards.push(card);
    }
    d.sort();
    d
}

fn serialization_round_trip() -> Check {
    let rules = RuleTable::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(659);
    for case in 0..1000 {
        let d = random_dataset(&mut rng, &rules);
        let report = validate_dataset(&d, true);
        ensure(report.is_valid(), || format!("generator produced an invalid dataset {case}: {report}"))?;
        let bytes = serialize_atlas(&d);
        let again = serialize_atlas(&parse_atlas(&bytes).map_err(|e| format!("case {case}: {e}"))?);
        ensure(again == bytes, || format!("case {case} is not byte-identical"))?;
    }
    Ok("1000 datasets byte-identical".into())
}

fn service_contract() -> Check {
    let dataset = load_atlas(&repo("data/sample/facial-recognition.atlas.json")).map_err(|e| e.to_string())?;
    let app = router(dataset, None);
    let golden_dir = repo("crates/service/tests/golden");
    let runtime = tokio::runtime::Builder::new_current_thread().build().map_err(|e| e.to_string())?;
    let get = |uri: &str| {
        runtime.block_on(async {
            let resp = app.clone().oneshot(Request::get(uri).body(Body::empty()).unwrap()).await.unwrap();
            let status = resp.status();
            let body = resp.into_body().collect().await.unwrap().to_bytes();
            (status, String::from_utf8(body.to_vec()).unwrap())
        })
    };
    let cases = [
        ("/api/meta", "meta.json"),
        ("/api/uses?risk=unacceptable", "uses_risk_unacceptable.json"),
        ("/api/uses?category=subject:children&q=CHILD&risk=high", "uses_children_high.json"),
        ("/api/uses/use-53c629f3dd435b4b", "use_detail.json"),
    ];
    for (uri, file) in cases {
        let (status, body) = get(uri);
        ensure(status == StatusCode::OK, || format!("{uri}: {status}"))?;
        let expected = std::fs::read_to_string(golden_dir.join(file)).map_err(|e| format!("{file}: {e}"))?;
        ensure(body == expected, || format!("{uri} differs from {file}"))?;
    }
    let (_, body) = get("/api/uses?risk=unacceptable");
    let v: serde_json::Value = serde_json::from_str(&body).map_err(|e| e.to_string())?;
    let n = v["uses"].as_array().map_or(0, Vec::len);
    ensure(n == 10, || format!("risk=unacceptable returned {n} uses"))?;
    ensure(get("/api/uses?category=nonexistent").0 == StatusCode::BAD_REQUEST, || "unknown category not 400".into())?;
    ensure(get("/api/uses/use-0000000000000000").0 == StatusCode::NOT_FOUND, || "unknown id not 404".into())?;
    Ok("4 golden bodies match, risk=unacceptable -> 10, 400/404 paths".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("mock pipeline count", mock_pipeline_count),
        ("sample dataset stats", sample_stats),
        ("layout quality", layout_quality),
        ("affinity properties", affinity_properties),
        ("merge conservation and idempotence", merge_properties),
        ("metrics oracles", metrics_oracles),
        ("serialization round trip", serialization_round_trip),
        ("service contract", service_contract),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of 8 criteria failed");
        ExitCode::FAILURE
    }
}
