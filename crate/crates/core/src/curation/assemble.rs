//! Dataset assembly bookkeeping: source-grouped train/test splitting and the
//! second-round manifest builder.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::archive::LatentArchive;
use crate::rng::{derive_seed, seeded_rng};
use crate::types::{LatentRecord, Origin, Split};

use super::{weighted_diversity_sample, CurationError};

/// Assigns whole groups to one split, targeting `train_fraction` of the
/// records. Groups are shuffled by seed and assigned to train until the
/// target record count is reached.
pub fn split_groups(
    groups: &[(String, usize)],
    train_fraction: f64,
    seed: u64,
) -> Result<BTreeMap<String, Split>, CurationError> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(CurationError::InvalidFraction(train_fraction));
    }
    let total: usize = groups.iter().map(|(_, size)| size).sum();
    let target = (train_fraction * total as f64).round() as usize;

    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.shuffle(&mut seeded_rng(seed));

    let mut assignment = BTreeMap::new();
    let mut train_count = 0usize;
    for i in order {
        let (key, size) = &groups[i];
        let split = if train_count < target {
            train_count += size;
            Split::Train
        } else {
            Split::Test
        };
        assignment.insert(key.clone(), split);
    }
    Ok(assignment)
}

/// Splits an archive by source group: records sharing a `source_id` (or their
/// own id when absent) always land in the same split. Returns the per-record
/// assignment.
pub fn split_dataset(
    archive: &LatentArchive,
    train_fraction: f64,
    seed: u64,
) -> Result<BTreeMap<String, Split>, CurationError> {
    let mut groups: BTreeMap<&str, usize> = BTreeMap::new();
    for rec in archive.records() {
        let key = rec.source_id.as_deref().unwrap_or(&rec.id);
        *groups.entry(key).or_default() += 1;
    }
    let group_list: Vec<(String, usize)> = groups
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let by_group = split_groups(&group_list, train_fraction, seed)?;

    Ok(archive
        .records()
        .iter()
        .map(|rec| {
            let key = rec.source_id.as_deref().unwrap_or(&rec.id);
            (rec.id.clone(), by_group[key])
        })
        .collect())
}

/// A motion-transferred record together with the id of the driving frame
/// that animated it.
#[derive(Debug, Clone)]
pub struct TransferredFrame {
    pub record: LatentRecord,
    pub driving_id: String,
}

/// One quota line: how many driving frames to select from the pool of the
/// named expressions.
#[derive(Debug, Clone, Serialize)]
pub struct DrivingQuota {
    pub expressions: Vec<String>,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct SecondRoundParams {
    /// Frames to keep from the real-video pool.
    pub n_real: usize,
    pub driving_quotas: Vec<DrivingQuota>,
    pub seed: u64,
    pub exponent: f64,
}

impl Default for SecondRoundParams {
    fn default() -> Self {
        Self {
            n_real: 2000,
            driving_quotas: Vec::new(),
            seed: 0,
            exponent: super::DEFAULT_WEIGHT_EXPONENT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompositionRow {
    pub origin: Origin,
    pub expression: Option<String>,
    pub split: Split,
    pub count: usize,
}

/// What went into the assembled manifest, per origin × expression × split.
#[derive(Debug, Clone, Serialize)]
pub struct CompositionReport {
    pub rows: Vec<CompositionRow>,
    pub train_total: usize,
    pub test_total: usize,
    pub selected_driving_ids: Vec<String>,
}

fn weighted_subset(
    pool: &[LatentRecord],
    n: usize,
    seed: u64,
    exponent: f64,
    pool_name: &str,
) -> Result<Vec<LatentRecord>, CurationError> {
    if n > pool.len() {
        return Err(CurationError::QuotaExceedsAvailable {
            wanted: n,
            available: pool.len(),
            pool: pool_name.to_string(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let layout = pool[0].code.layout();
    let archive = LatentArchive::new(layout, pool.to_vec())?;
    let selection = weighted_diversity_sample(&archive, n, seed, exponent)?;
    Ok(selection
        .ids
        .iter()
        .map(|id| archive.get(id).expect("selected from pool").clone())
        .collect())
}

/// Assembles the second-round training manifest.
///
/// Selects `n_real` real-video frames by diversity-weighted sampling, selects
/// driving frames per quota with the same procedure, keeps only transferred
/// records whose driving frame was selected, propagates each transferred
/// record's split from its source still, and unions the result with the
/// stills. Fails if any source would end up in both splits.
pub fn build_second_round_manifest(
    stills: &[LatentRecord],
    real_video_frames: &[LatentRecord],
    driving_frames: &[LatentRecord],
    transferred: &[TransferredFrame],
    params: &SecondRoundParams,
) -> Result<(LatentArchive, CompositionReport), CurationError> {
    let layout = stills
        .first()
        .or_else(|| real_video_frames.first())
        .map(|r| r.code.layout())
        .ok_or(CurationError::EmptyArchive)?;
    let all_inputs = stills
        .iter()
        .chain(real_video_frames)
        .chain(driving_frames)
        .chain(transferred.iter().map(|t| &t.record));
    if all_inputs
        .into_iter()
        .any(|r| !r.code.matches_layout(&layout))
    {
        return Err(CurationError::MixedLayouts);
    }

    let selected_real = weighted_subset(
        real_video_frames,
        params.n_real,
        derive_seed(params.seed, 0),
        params.exponent,
        "real video frames",
    )?;

    let mut selected_driving: Vec<String> = Vec::new();
    let mut driving_set: HashSet<&str> = HashSet::new();
    for (index, quota) in params.driving_quotas.iter().enumerate() {
        let pool: Vec<LatentRecord> = driving_frames
            .iter()
            .filter(|r| {
                r.expression
                    .as_deref()
                    .is_some_and(|e| quota.expressions.iter().any(|q| q == e))
            })
            .cloned()
            .collect();
        let picked = weighted_subset(
            &pool,
            quota.count,
            derive_seed(params.seed, 1 + index as u64),
            params.exponent,
            &quota.expressions.join("+"),
        )?;
        for rec in picked {
            selected_driving.push(rec.id.clone());
        }
    }
    let owned_ids: Vec<String> = selected_driving.clone();
    driving_set.extend(owned_ids.iter().map(String::as_str));

    let stills_by_id: HashMap<&str, &LatentRecord> =
        stills.iter().map(|r| (r.id.as_str(), r)).collect();

    let mut kept_transferred = Vec::new();
    for frame in transferred {
        if !driving_set.contains(frame.driving_id.as_str()) {
            continue;
        }
        let mut rec = frame.record.clone();
        let source = rec
            .source_id
            .clone()
            .ok_or_else(|| CurationError::MissingSourceId { id: rec.id.clone() })?;
        let still =
            stills_by_id
                .get(source.as_str())
                .ok_or_else(|| CurationError::UnknownSource {
                    id: rec.id.clone(),
                    source_id: source.clone(),
                })?;
        rec.split = still.split;
        kept_transferred.push(rec);
    }

    let mut records: Vec<LatentRecord> = Vec::new();
    records.extend(stills.iter().cloned());
    records.extend(selected_real);
    records.extend(kept_transferred);

    // no source may straddle the split boundary
    let mut splits_by_source: HashMap<&str, Split> = HashMap::new();
    for rec in &records {
        let key = rec.source_id.as_deref().unwrap_or(&rec.id);
        match splits_by_source.get(key) {
            None => {
                splits_by_source.insert(key, rec.split);
            }
            Some(&seen) if seen != rec.split => {
                return Err(CurationError::SplitContamination {
                    source_id: key.to_string(),
                });
            }
            Some(_) => {}
        }
    }
    drop(splits_by_source);

    let mut counts: BTreeMap<(Origin, Option<String>, Split), usize> = BTreeMap::new();
    let mut train_total = 0;
    let mut test_total = 0;
    for rec in &records {
        *counts
            .entry((rec.origin, rec.expression.clone(), rec.split))
            .or_default() += 1;
        match rec.split {
            Split::Train => train_total += 1,
            Split::Test => test_total += 1,
        }
    }
    let rows = counts
        .into_iter()
        .map(|((origin, expression, split), count)| CompositionRow {
            origin,
            expression,
            split,
            count,
        })
        .collect();

    let archive = LatentArchive::new(layout, records)?;
    Ok((
        archive,
        CompositionReport {
            rows,
            train_total,
            test_total,
            selected_driving_ids: selected_driving,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Layout, StyleCode};

    fn record(id: &str, value: f64) -> LatentRecord {
        let layout = Layout::new(vec![2]).unwrap();
        LatentRecord::new(id, StyleCode::from_flat(&layout, &[value, -value]).unwrap())
    }

    #[test]
    fn hundred_singletons_split_95_5() {
        let groups: Vec<(String, usize)> = (0..100).map(|i| (format!("g{i}"), 1)).collect();
        let assignment = split_groups(&groups, 0.95, 4).unwrap();
        let train = assignment.values().filter(|&&s| s == Split::Train).count();
        assert_eq!(train, 95);
    }

    #[test]
    fn single_group_goes_whole_to_train() {
        let groups = vec![("only".to_string(), 10)];
        let assignment = split_groups(&groups, 0.95, 0).unwrap();
        assert_eq!(assignment["only"], Split::Train);
    }

    #[test]
    fn split_is_seed_deterministic_and_group_consistent() {
        let layout = Layout::new(vec![2]).unwrap();
        let mut records = Vec::new();
        for g in 0..20 {
            for i in 0..3 {
                let mut rec = LatentRecord::new(
                    format!("r{g}-{i}"),
                    StyleCode::from_flat(&layout, &[g as f64, i as f64]).unwrap(),
                );
                rec.source_id = Some(format!("src{g}"));
                records.push(rec);
            }
        }
        let archive = LatentArchive::new(layout, records).unwrap();
        let a = split_dataset(&archive, 0.8, 9).unwrap();
        let b = split_dataset(&archive, 0.8, 9).unwrap();
        assert_eq!(a, b);
        for g in 0..20 {
            let splits: HashSet<Split> = (0..3).map(|i| a[&format!("r{g}-{i}")]).collect();
            assert_eq!(splits.len(), 1, "group {g} was split");
        }
        let train = a.values().filter(|&&s| s == Split::Train).count();
        assert_eq!(train, 48);
    }

    #[test]
    fn invalid_fraction_is_rejected() {
        assert!(matches!(
            split_groups(&[("a".into(), 1)], 1.5, 0),
            Err(CurationError::InvalidFraction(_))
        ));
    }

    fn driving(id: &str, expression: &str, value: f64) -> LatentRecord {
        let mut rec = record(id, value);
        rec.expression = Some(expression.to_string());
        rec.origin = Origin::CgVideoFrame;
        rec
    }

    #[test]
    fn grouped_expression_quotas_yield_130_driving_frames() {
        let cg_expressions = [
            "Bared-teeth",
            "Bark",
            "Blink",
            "Brow-raise",
            "Chewing",
            "Coo",
            "Lip-smack",
            "Scream",
            "Threat",
            "Tongue-protrusion",
            "Yawn",
        ];
        let mut driving_frames = Vec::new();
        for (e, name) in cg_expressions.iter().enumerate() {
            for i in 0..12 {
                driving_frames.push(driving(
                    &format!("cg-{name}-{i}"),
                    name,
                    (e * 13 + i) as f64,
                ));
            }
        }
        for name in ["Look-up", "Look-down", "Tongue-show"] {
            for i in 0..8 {
                driving_frames.push(driving(&format!("rv-{name}-{i}"), name, i as f64 + 0.5));
            }
        }
        for name in ["Look-left", "Look-right"] {
            for i in 0..15 {
                driving_frames.push(driving(&format!("rv-{name}-{i}"), name, i as f64 + 0.25));
            }
        }

        let stills = vec![record("still-0", 0.0)];
        let reals: Vec<LatentRecord> = (0..10)
            .map(|i| {
                let mut r = record(&format!("real-{i}"), i as f64 * 0.1);
                r.origin = Origin::RealVideoFrame;
                r
            })
            .collect();

        let params = SecondRoundParams {
            n_real: 5,
            driving_quotas: vec![
                DrivingQuota {
                    expressions: cg_expressions.iter().map(|s| s.to_string()).collect(),
                    count: 100,
                },
                DrivingQuota {
                    expressions: ["Look-up", "Look-down", "Tongue-show"]
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                    count: 10,
                },
                DrivingQuota {
                    expressions: ["Look-left", "Look-right"]
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                    count: 20,
                },
            ],
            seed: 3,
            exponent: 2.0,
        };
        let (_, report) =
            build_second_round_manifest(&stills, &reals, &driving_frames, &[], &params).unwrap();
        assert_eq!(report.selected_driving_ids.len(), 130);
    }

    #[test]
    fn transferred_records_inherit_the_source_split() {
        // 10 stills, 8 train / 2 test; 4 transferred frames from a test
        // source all land in test
        let mut stills: Vec<LatentRecord> = (0..10)
            .map(|i| {
                let mut r = record(&format!("still-{i}"), i as f64);
                r.split = if i < 8 { Split::Train } else { Split::Test };
                r
            })
            .collect();
        stills[8].split = Split::Test;
        stills[9].split = Split::Test;

        let driving_frames = vec![driving("drive-0", "Yawn", 1.0)];
        let transferred: Vec<TransferredFrame> = (0..4)
            .map(|i| {
                let mut rec = record(&format!("tr-{i}"), 100.0 + i as f64);
                rec.origin = Origin::Transferred;
                rec.source_id = Some("still-9".to_string());
                rec.split = Split::Train; // wrong on purpose; must be repaired
                TransferredFrame {
                    record: rec,
                    driving_id: "drive-0".to_string(),
                }
            })
            .collect();

        let params = SecondRoundParams {
            n_real: 0,
            driving_quotas: vec![DrivingQuota {
                expressions: vec!["Yawn".into()],
                count: 1,
            }],
            seed: 0,
            exponent: 2.0,
        };
        let (archive, report) =
            build_second_round_manifest(&stills, &[], &driving_frames, &transferred, &params)
                .unwrap();
        for i in 0..4 {
            assert_eq!(archive.get(&format!("tr-{i}")).unwrap().split, Split::Test);
        }
        assert_eq!(report.test_total, 6);
        assert_eq!(report.train_total, 8);
    }

    #[test]
    fn quota_exceeding_pool_and_unknown_source_fail() {
        let stills = vec![record("s0", 0.0)];
        let driving_frames = vec![driving("d0", "Yawn", 1.0)];
        let params = SecondRoundParams {
            n_real: 0,
            driving_quotas: vec![DrivingQuota {
                expressions: vec!["Yawn".into()],
                count: 2,
            }],
            seed: 0,
            exponent: 2.0,
        };
        assert!(matches!(
            build_second_round_manifest(&stills, &[], &driving_frames, &[], &params),
            Err(CurationError::QuotaExceedsAvailable { .. })
        ));

        let mut orphan = record("t0", 5.0);
        orphan.source_id = Some("missing".into());
        let transferred = vec![TransferredFrame {
            record: orphan,
            driving_id: "d0".into(),
        }];
        let params = SecondRoundParams {
            n_real: 0,
            driving_quotas: vec![DrivingQuota {
                expressions: vec!["Yawn".into()],
                count: 1,
            }],
            seed: 0,
            exponent: 2.0,
        };
        assert!(matches!(
            build_second_round_manifest(&stills, &[], &driving_frames, &transferred, &params),
            Err(CurationError::UnknownSource { .. })
        ));
    }

    #[test]
    fn contaminated_sources_are_detected() {
        // two stills claim the same source but different splits
        let mut a = record("a", 0.0);
        a.source_id = Some("shared".into());
        a.split = Split::Train;
        let mut b = record("b", 1.0);
        b.source_id = Some("shared".into());
        b.split = Split::Test;
        let params = SecondRoundParams {
            n_real: 0,
            driving_quotas: vec![],
            seed: 0,
            exponent: 2.0,
        };
        assert!(matches!(
            build_second_round_manifest(&[a, b], &[], &[], &[], &params),
            Err(CurationError::SplitContamination { .. })
        ));
    }
}
