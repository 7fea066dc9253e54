//! Property tests for the crate-wide invariants.

use proptest::collection::vec;
use proptest::prelude::*;

use latentlens::archive::{load_archive, write_archive, LatentArchive};
use latentlens::curation::{bbox_track_filter, weighted_diversity_sample, BBox};
use latentlens::editing::{morph, style_mix};
use latentlens::metrics::{holm_adjust, masked_mse, Raster};
use latentlens::types::{LatentRecord, Layout, Origin, Split, StyleCode};

fn small_layout() -> impl Strategy<Value = Layout> {
    vec(1usize..5, 1..4).prop_map(|per_layer| Layout::new(per_layer).unwrap())
}

/// Values that survive the f32 narrowing on disk.
fn f32_value() -> impl Strategy<Value = f64> {
    (-1000i32..1000).prop_map(|k| (k as f32 / 16.0) as f64)
}

fn archive_strategy() -> impl Strategy<Value = LatentArchive> {
    small_layout().prop_flat_map(|layout| {
        let d = layout.total_channels();
        vec(
            (vec(f32_value(), d..=d), any::<bool>(), any::<bool>()),
            0..12,
        )
        .prop_map(move |rows| {
            let records = rows
                .into_iter()
                .enumerate()
                .map(|(i, (flat, test_split, transferred))| {
                    let mut rec = LatentRecord::new(
                        format!("id{i}"),
                        StyleCode::from_flat(&layout, &flat).unwrap(),
                    );
                    rec.split = if test_split {
                        Split::Test
                    } else {
                        Split::Train
                    };
                    if transferred {
                        rec.origin = Origin::Transferred;
                        rec.source_id = Some(format!("src{}", i / 2));
                        rec.expression = Some("Yawn".to_string());
                    }
                    rec
                })
                .collect();
            LatentArchive::new(layout.clone(), records).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn archive_round_trip_is_bit_exact(archive in archive_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        write_archive(&archive, dir.path()).unwrap();
        let loaded = load_archive(dir.path()).unwrap();
        prop_assert_eq!(loaded.len(), archive.len());
        for (a, b) in archive.records().iter().zip(loaded.records()) {
            prop_assert_eq!(&a.id, &b.id);
            prop_assert_eq!(a.split, b.split);
            prop_assert_eq!(a.origin, b.origin);
            prop_assert_eq!(&a.expression, &b.expression);
            prop_assert_eq!(&a.source_id, &b.source_id);
            for (x, y) in a.code.iter_flat().zip(b.code.iter_flat()) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn sampler_returns_n_unique_ids(
        values in vec(-100.0f64..100.0, 1..40),
        seed in any::<u64>(),
        exponent in prop_oneof![Just(0.0), Just(1.0), Just(2.0)],
    ) {
        let layout = Layout::new(vec![1]).unwrap();
        let records: Vec<LatentRecord> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                LatentRecord::new(format!("r{i}"), StyleCode::from_flat(&layout, &[v]).unwrap())
            })
            .collect();
        let archive = LatentArchive::new(layout, records).unwrap();
        let n = 1 + (seed as usize) % values.len();
        let selection = weighted_diversity_sample(&archive, n, seed, exponent).unwrap();
        prop_assert_eq!(selection.ids.len(), n);
        let mut unique = selection.ids.clone();
        unique.sort();
        unique.dedup();
        prop_assert_eq!(unique.len(), n);
    }

    #[test]
    fn masked_mse_is_additive_over_disjoint_masks(
        a in vec(0.0f64..1.0, 16),
        b in vec(0.0f64..1.0, 16),
        picks in vec(0usize..3, 16),
    ) {
        // picks: 0 = neither mask, 1 = mask one, 2 = mask two
        let img = Raster::new(4, 4, 1, a).unwrap();
        let reference = Raster::new(4, 4, 1, b).unwrap();
        let mask_of = |want: usize| {
            Raster::new(4, 4, 1, picks.iter().map(|&p| f64::from(p == want)).collect()).unwrap()
        };
        let m1 = mask_of(1);
        let m2 = mask_of(2);
        let union = Raster::new(
            4,
            4,
            1,
            picks.iter().map(|&p| f64::from(p == 1 || p == 2)).collect(),
        )
        .unwrap();
        prop_assume!(m1.mask_sum() > 0.0 && m2.mask_sum() > 0.0);

        let s1 = m1.mask_sum() * masked_mse(&img, &reference, &m1, 1.0).unwrap();
        let s2 = m2.mask_sum() * masked_mse(&img, &reference, &m2, 1.0).unwrap();
        let s = union.mask_sum() * masked_mse(&img, &reference, &union, 1.0).unwrap();
        prop_assert!((s - s1 - s2).abs() < 1e-12);

        // symmetry in (img, ref)
        let ab = masked_mse(&img, &reference, &union, 1.0).unwrap();
        let ba = masked_mse(&reference, &img, &union, 1.0).unwrap();
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn holm_dominates_raw_and_stays_in_range(ps in vec(0.0f64..=1.0, 0..12)) {
        let adjusted = holm_adjust(&ps).unwrap();
        prop_assert_eq!(adjusted.len(), ps.len());
        for (raw, adj) in ps.iter().zip(&adjusted) {
            prop_assert!(adj >= raw);
            prop_assert!(*adj <= 1.0);
        }
        let mut order: Vec<usize> = (0..ps.len()).collect();
        order.sort_by(|&i, &j| ps[i].total_cmp(&ps[j]));
        for w in order.windows(2) {
            prop_assert!(adjusted[w[0]] <= adjusted[w[1]]);
        }
    }

    #[test]
    fn morph_and_mix_identities(
        a in vec(-10.0f64..10.0, 6),
        b in vec(-10.0f64..10.0, 6),
        t in 0.0f64..=1.0,
        layers in vec(any::<bool>(), 3),
    ) {
        let layout = Layout::new(vec![2, 2, 2]).unwrap();
        let code_a = StyleCode::from_flat(&layout, &a).unwrap();
        let code_b = StyleCode::from_flat(&layout, &b).unwrap();
        prop_assert_eq!(morph(&code_a, &code_a, t).unwrap(), code_a.clone());

        let chosen: Vec<usize> = (0..3).filter(|&l| layers[l]).collect();
        let complement: Vec<usize> = (0..3).filter(|&l| !layers[l]).collect();
        let mixed = style_mix(&code_a, &code_b, &chosen).unwrap();
        let mirrored = style_mix(&code_b, &code_a, &complement).unwrap();
        prop_assert_eq!(mixed, mirrored);
    }

    #[test]
    fn track_segments_partition_the_frames(
        offsets in vec((0.0f64..4.0, 1u64..4), 1..30),
        threshold in 0.05f64..0.95,
    ) {
        let mut frames = Vec::new();
        let mut index = 0u64;
        for (offset, gap) in offsets {
            frames.push((index, BBox::new(offset, 0.0, offset + 1.0, 1.0).unwrap()));
            index += gap;
        }
        let segments = bbox_track_filter(&frames, threshold).unwrap();
        let flattened: Vec<(u64, BBox)> = segments.iter().flatten().copied().collect();
        prop_assert_eq!(flattened, frames);
        for segment in &segments {
            prop_assert!(!segment.is_empty());
        }
    }
}
