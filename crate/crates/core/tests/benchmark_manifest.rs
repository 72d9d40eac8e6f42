use std::collections::BTreeSet;

use compcolor::benchmark::{
    build_pairs, classify_pair, derive_variants, generate_manifest, shipped_objects, simplify_text,
    BenchmarkManifest, ManifestOptions, PairClass, PairType, VariantMode,
};
use compcolor::color::{delta_e_76, final_color_set, named_color_lookup, srgb_to_lab, NameStyle};
use compcolor::Error;

fn final_names() -> Vec<String> {
    final_color_set().iter().map(|c| c.name.clone()).collect()
}

fn full_manifest(seed: u64) -> BenchmarkManifest {
    let pairs = build_pairs(&final_names(), 3).unwrap().pairs;
    generate_manifest(&pairs, &shipped_objects(), ManifestOptions::default(), seed).unwrap()
}

#[test]
fn shipped_set_sizes() {
    assert_eq!(final_names().len(), 35);
    let objects = shipped_objects();
    assert_eq!(objects.len(), 19);
    assert_eq!(&objects[..3], ["chair", "backpack", "shirt"]);
}

#[test]
fn pair_partners_are_ranked() {
    let set = build_pairs(&final_names(), 3).unwrap();
    for main in final_names() {
        let close: Vec<f64> = set
            .pairs
            .iter()
            .filter(|p| p.main == main && p.pair_type == PairType::Close)
            .map(|p| p.delta_e_ab)
            .collect();
        let distant: Vec<f64> = set
            .pairs
            .iter()
            .filter(|p| p.main == main && p.pair_type == PairType::Distant)
            .map(|p| p.delta_e_ab)
            .collect();
        assert!(close.len() <= 3 && distant.len() <= 3);
        assert!(close.windows(2).all(|w| w[0] <= w[1]));
        assert!(distant.windows(2).all(|w| w[0] >= w[1]));
        if close.len() < 3 {
            assert!(
                set.warnings
                    .iter()
                    .any(|w| w.starts_with(&format!("{main}: only"))),
                "{main}"
            );
        }
    }
}

#[test]
fn emitted_pairs_satisfy_thresholds() {
    for p in build_pairs(&final_names(), 3).unwrap().pairs {
        let want = match p.pair_type {
            PairType::Close => PairClass::Close,
            _ => PairClass::Distant,
        };
        assert_eq!(
            classify_pair(&p.main, &p.partner).unwrap(),
            want,
            "{} {}",
            p.main,
            p.partner
        );
        let (a, b) = (
            named_color_lookup(&p.main).unwrap(),
            named_color_lookup(&p.partner).unwrap(),
        );
        assert_eq!(
            p.delta_e_ab,
            delta_e_76(srgb_to_lab(a.rgb), srgb_to_lab(b.rgb))
        );
    }
}

#[test]
fn black_and_white_palette() {
    let set = build_pairs(&["Black", "White"], 3).unwrap();
    let black: Vec<_> = set.pairs.iter().filter(|p| p.main == "Black").collect();
    assert_eq!(black.len(), 1);
    assert_eq!(
        (black[0].partner.as_str(), black[0].pair_type),
        ("White", PairType::Distant)
    );
    assert!(
        set.warnings
            .iter()
            .any(|w| w.starts_with("Black: only 0 close of 3")),
        "{:?}",
        set.warnings
    );
}

#[test]
fn entry_count_is_pairs_times_prompts() {
    let pairs = build_pairs(&final_names(), 3).unwrap().pairs;
    // Count by walking the color set directly, independent of build_pairs.
    let names = final_names();
    let mut expected_pairs = 0;
    for main in &names {
        let (mut close, mut distant) = (0, 0);
        for other in names.iter().filter(|o| *o != main) {
            match classify_pair(main, other).unwrap() {
                PairClass::Close => close += 1,
                PairClass::Distant => distant += 1,
                PairClass::Neither => {}
            }
        }
        expected_pairs += close.min(3) + distant.min(3);
    }
    assert_eq!(pairs.len(), expected_pairs);
    assert_eq!(full_manifest(0).entries.len(), expected_pairs * 5);
}

#[test]
fn same_seed_same_bytes_other_seed_differs() {
    let a = full_manifest(4).to_json().unwrap();
    assert_eq!(a, full_manifest(4).to_json().unwrap());
    assert_ne!(a, full_manifest(5).to_json().unwrap());
    assert!(a.ends_with("}\n"));
    let back = BenchmarkManifest::from_json(&a).unwrap();
    assert_eq!(back.to_json().unwrap(), a);
}

#[test]
fn seeded_backpack_and_chair_prompt() {
    // Seed 25 is the first whose draws pair (backpack, chair) for SkyBlue/HotPink.
    let m = full_manifest(25);
    let e = m.entry("SkyBlue_HotPink_2").unwrap();
    assert_eq!(
        e.text,
        "a skyblue colored backpack and a hotpink colored chair."
    );
    assert_eq!(e.simplified_text, "a backpack and a chair.");
    assert_eq!(e.slots[0].base_color_token, "blue");
    assert_eq!(e.slots[1].rgb, named_color_lookup("HotPink").unwrap().rgb);
    for s in 0..25 {
        let m = full_manifest(s);
        let hit = m.entries.iter().any(|e| {
            e.id.starts_with("SkyBlue_HotPink_")
                && e.slots[0].object_noun == "backpack"
                && e.slots[1].object_noun == "chair"
        });
        assert!(!hit, "seed {s} already yields the pair");
    }
}

#[test]
fn object_pairs_do_not_repeat_within_a_color_pair() {
    let m = full_manifest(8);
    let mut seen = BTreeSet::new();
    for e in &m.entries {
        let prefix = e.id.rsplit_once('_').unwrap().0.to_string();
        assert!(
            seen.insert((
                prefix,
                e.slots[0].object_noun.clone(),
                e.slots[1].object_noun.clone()
            )),
            "{}",
            e.id
        );
    }
}

#[test]
fn hyphenated_names() {
    let pairs = build_pairs(&["SkyBlue", "HotPink"], 1).unwrap().pairs;
    let options = ManifestOptions {
        name_style: NameStyle::Hyphenated,
        ..ManifestOptions::default()
    };
    let m = generate_manifest(&pairs, &shipped_objects(), options, 0).unwrap();
    assert!(
        m.entries[0].text.contains("sky-blue colored"),
        "{}",
        m.entries[0].text
    );
    assert!(!m.entries[0].simplified_text.contains("blue"));
}

#[test]
fn variants() {
    let base = full_manifest(3);
    let single = derive_variants(&base, VariantMode::Single, 3).unwrap();
    assert_eq!(single.entries.len(), base.entries.len());
    assert!(single
        .entries
        .iter()
        .all(|e| e.slots.len() == 1 && e.pair_type == PairType::Single));
    let e = &single.entries[0];
    assert_eq!(
        e.text,
        format!(
            "a {} colored {}.",
            e.slots[0].color_name.to_lowercase(),
            e.slots[0].object_noun
        )
    );
    let again = derive_variants(&single, VariantMode::Single, 3).unwrap();
    assert_eq!(again.entries, single.entries);

    let triple = derive_variants(&base, VariantMode::Triple, 3).unwrap();
    assert!(!triple.entries.is_empty());
    for e in &triple.entries {
        assert_eq!(e.slots.len(), 3);
        let third = &e.slots[2];
        for s in &e.slots[..2] {
            assert_eq!(
                classify_pair(&third.color_name, &s.color_name).unwrap(),
                PairClass::Distant
            );
            assert_ne!(third.object_noun, s.object_noun);
        }
    }
    let skipped = base.entries.len() - triple.entries.len();
    assert_eq!(
        triple.provenance.warnings.len() - base.provenance.warnings.len(),
        skipped
    );
}

#[test]
fn simplify_handles_every_spelling() {
    assert_eq!(
        simplify_text("a light sky blue colored hat and a teal colored bowl."),
        "a hat and a bowl."
    );
    assert_eq!(simplify_text("a light-sky-blue colored hat."), "a hat.");
}

#[test]
fn invalid_inputs() {
    let pairs = build_pairs(&["SkyBlue", "HotPink"], 1).unwrap().pairs;
    let one = vec!["chair".to_string()];
    assert!(generate_manifest(&pairs, &one, ManifestOptions::default(), 0).is_err());
    let dup = vec!["chair".to_string(), "chair".to_string()];
    assert!(generate_manifest(&pairs, &dup, ManifestOptions::default(), 0).is_err());
    assert!(matches!(
        build_pairs(&["NotAColor"], 3),
        Err(Error::UnknownColor { .. })
    ));
    assert!(BenchmarkManifest::from_json("{\"version\": 1}").is_err());
}
