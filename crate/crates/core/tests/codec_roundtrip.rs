use std::collections::BTreeSet;

use atlas_forge_core::model::{
    assign_categories, parse_atlas, serialize_atlas, validate_dataset, Affected, AssessmentItem, AtlasDataset, Coord, ImpactCard,
    ImplementationPotential, Mitigation, RiskLevel, RuleTable, SocioTechnicalLayer, UseCase,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: [&str; 10] = ["border", "school", "bank", "children", "workers", "grid", "game", "hospital", "police", "ünïcode \"quoted\""];

fn text(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..4);
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn item(rng: &mut ChaCha8Rng) -> AssessmentItem {
    let mut affected = BTreeSet::new();
    while affected.is_empty() {
        for a in Affected::ALL {
            if rng.random_bool(0.5) {
                affected.insert(a);
            }
        }
    }
    AssessmentItem {
        text: text(rng),
        layer: SocioTechnicalLayer::ALL[rng.random_range(0..3)],
        affected,
        basis: rng.random_bool(0.5).then(|| format!("SDG {}", rng.random_range(1..=17))),
    }
}

fn coord(rng: &mut ChaCha8Rng) -> Coord {
    match rng.random_range(0..5) {
        0 => Coord::new(0.0, 1.0),
        1 => Coord::new(-0.0, 0.5),
        _ => Coord::new(rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0)),
    }
}

fn random_dataset(rng: &mut ChaCha8Rng, rules: &RuleTable) -> AtlasDataset {
    let mut d = AtlasDataset::new(if rng.random_bool(0.5) { "multi".to_string() } else { text(rng) });
    let n = rng.random_range(0..12);
    for i in 0..n {
        let mut u = UseCase::new(format!("{} {i}", text(rng)), text(rng), text(rng), text(rng), text(rng), text(rng));
        u.long_description = format!("{}\nsecond line", text(rng));
        u.daily = rng.random_bool(0.3);
        u.implementation_potential = ImplementationPotential::ALL[rng.random_range(0..3)];
        u.risk_level = RiskLevel::ALL[rng.random_range(0..3)];
        u.categories = assign_categories(&u, rules);
        for _ in 0..rng.random_range(0..3) {
            u.source_incident_ids.insert(rng.random_range(1..1000));
        }
        let allowed: Vec<RiskLevel> = RiskLevel::ALL.into_iter().filter(|l| *l <= u.risk_level).collect();
        let card = ImpactCard {
            use_id: u.id.clone(),
            risks: (0..rng.random_range(1..4)).map(|_| item(rng)).collect(),
            benefits: (0..rng.random_range(0..3)).map(|_| item(rng)).collect(),
            mitigations: (0..rng.random_range(0..3))
                .map(|_| Mitigation { text: text(rng), layer: SocioTechnicalLayer::ALL[rng.random_range(0..3)] })
                .collect(),
            mitigated_description: text(rng),
            mitigated_risk_level: *allowed.choose(rng).unwrap(),
            risk_reasoning: text(rng),
            illustration_prompt: format!("Generate an image for the {}", u.short_description),
            illustration_ref: rng.random_bool(0.3).then(|| format!("img/{i}.png")),
        };
        d.coords.insert(u.id.clone(), coord(rng));
        d.split_coords.insert(u.id.clone(), coord(rng));
        d.uses.push(u);
        d.cards.push(card);
    }
    d.sort();
    d
}

#[test]
fn thousand_random_datasets_round_trip() {
    let rules = RuleTable::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for case in 0..1000 {
        let d = random_dataset(&mut rng, &rules);
        let report = validate_dataset(&d, true);
        assert!(report.is_valid(), "case {case}: {report}");
        let bytes = serialize_atlas(&d);
        let parsed = parse_atlas(&bytes).unwrap();
        assert_eq!(serialize_atlas(&parsed), bytes, "case {case}");
        assert_eq!(parsed.uses, d.uses);
        assert_eq!(parsed.cards, d.cards);
    }
}
