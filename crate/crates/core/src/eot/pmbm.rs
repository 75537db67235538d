//! Track-oriented Poisson multi-Bernoulli mixture with GGIW objects.
//!
//! Each track owns a list of local hypotheses; a global hypothesis picks at
//! most one local hypothesis per track (`None` means the track does not exist
//! under that hypothesis). Undetected objects follow a spatially uniform
//! Poisson intensity with the birth GGIW template.
//!
//! Per update, every (global hypothesis, partition) pair contributes its k
//! best cluster-to-track associations, with k proportional to the prior
//! hypothesis weight. Clusters that fall in no track gate are forced to the
//! new-object column and kept out of the assignment problem.

use std::collections::HashMap;

use crate::assignment::{murty_k_best, CostMatrix};
use crate::error::FilterError;
use crate::linalg::{log_add_exp, log_sum_exp};
use crate::partitioning::{Cluster, Partition};
use crate::types::{Box3D, ClassLabel, TrackRecord};

use super::extract::{extent_to_box, heuristic_classify, nms_boxes};
use super::ggiw::GgiwComponent;
use super::EotConfig;

const LOG_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalOrigin {
    /// Supplied from outside the filter.
    Prior,
    /// Created from a cluster of `cluster_size` points.
    Birth { cluster_size: usize },
    /// Missed-detection child of local hypothesis `parent` of the same track.
    Missed { parent: usize },
    /// Child of `parent` updated with a cluster of `cluster_size` points.
    Detected { parent: usize, cluster_size: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalHypothesis {
    pub existence: f64,
    pub ggiw: GgiwComponent,
    /// Detector class, `None` for unclassified (point-only) tracking.
    pub class_label: Option<ClassLabel>,
    pub origin: LocalOrigin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    pub hyps: Vec<LocalHypothesis>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalHypothesis {
    pub weight: f64,
    /// Local hypothesis index per track, aligned with `PmbmDensity::tracks`.
    pub selection: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmbmDensity {
    /// Undetected-object intensity per m^2.
    pub undetected: f64,
    pub tracks: Vec<Track>,
    /// Never empty; weights sum to one.
    pub hypotheses: Vec<GlobalHypothesis>,
    next_track_id: u64,
}

impl PmbmDensity {
    pub fn new(cfg: &EotConfig) -> Self {
        Self {
            undetected: cfg.birth.initial_intensity,
            tracks: Vec::new(),
            hypotheses: vec![GlobalHypothesis {
                weight: 1.0,
                selection: Vec::new(),
            }],
            next_track_id: 1,
        }
    }

    /// Single global hypothesis holding the given objects.
    pub fn with_objects(cfg: &EotConfig, objects: Vec<(u64, LocalHypothesis)>) -> Self {
        let next_track_id = objects.iter().map(|(id, _)| id + 1).max().unwrap_or(1);
        let selection = vec![Some(0); objects.len()];
        let tracks = objects.into_iter().map(|(id, h)| Track { id, hyps: vec![h] }).collect();
        Self {
            tracks,
            hypotheses: vec![GlobalHypothesis { weight: 1.0, selection }],
            next_track_id,
            ..Self::new(cfg)
        }
    }

    pub fn best_hypothesis(&self) -> &GlobalHypothesis {
        // first of the maxima, so ties resolve to the earlier hypothesis
        self.hypotheses
            .iter()
            .reduce(|best, h| if h.weight > best.weight { h } else { best })
            .expect("at least one global hypothesis")
    }

    pub fn next_track_id(&self) -> u64 {
        self.next_track_id
    }
}

/// Partitions of one scan. `point_classes`, when present, gives the detector
/// class of every point; each cluster must then be single-class.
#[derive(Debug, Clone, Default)]
pub struct PartitionedScan {
    pub num_points: usize,
    pub partitions: Vec<Partition>,
    pub point_classes: Option<Vec<ClassLabel>>,
}

/// `P_d = P_dm * P_m` for a component of the given class.
pub fn eot_predicted_detection_prob(component: &GgiwComponent, cfg: &EotConfig, class: Option<ClassLabel>) -> f64 {
    (cfg.detection_prob(class) * component.measurable_prob()).clamp(0.0, 1.0)
}

pub fn eot_predict(density: &PmbmDensity, dt: f64, cfg: &EotConfig) -> Result<PmbmDensity, FilterError> {
    if !(dt > 0.0) {
        return Err(FilterError::NonPositiveDt(dt));
    }
    let ps = cfg.survival_prob;
    let tracks = density
        .tracks
        .iter()
        .map(|t| Track {
            id: t.id,
            hyps: t
                .hyps
                .iter()
                .map(|h| LocalHypothesis {
                    existence: ps * h.existence,
                    ggiw: h.ggiw.predict(dt, cfg.process_noise, cfg.forgetting_factor, cfg.extent_time_constant),
                    ..h.clone()
                })
                .collect(),
        })
        .collect();
    Ok(PmbmDensity {
        undetected: ps * density.undetected + cfg.birth.intensity,
        tracks,
        hypotheses: density.hypotheses.clone(),
        next_track_id: density.next_track_id,
    })
}

struct UniqueCluster {
    cluster: Cluster,
    class: Option<ClassLabel>,
    /// `ln(e + κ^n)`: weight of the cluster starting a new track or being clutter.
    log_new: f64,
    birth: Option<LocalHypothesis>,
}

/// Detection option of one local hypothesis.
struct DetectOption {
    cluster: usize,
    /// Log weight relative to the missed-detection option.
    log_ratio: f64,
    posterior: GgiwComponent,
}

struct LocalOptions {
    log_missed: f64,
    missed: LocalHypothesis,
    detections: Vec<DetectOption>,
}

fn classes_compatible(a: Option<ClassLabel>, b: Option<ClassLabel>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x == y,
        _ => true,
    }
}

fn validate_scan(scan: &PartitionedScan) -> Result<(), FilterError> {
    if let Some(pc) = &scan.point_classes {
        if pc.len() != scan.num_points {
            return Err(FilterError::InvalidPartition {
                index: 0,
                reason: format!("{} point classes for {} points", pc.len(), scan.num_points),
            });
        }
    }
    for (index, p) in scan.partitions.iter().enumerate() {
        p.check_cover(scan.num_points)
            .map_err(|reason| FilterError::InvalidPartition { index, reason })?;
        if let Some(pc) = &scan.point_classes {
            for c in &p.clusters {
                let first = pc[c.indices[0]];
                if c.indices.iter().any(|&i| pc[i] != first) {
                    return Err(FilterError::InvalidPartition {
                        index,
                        reason: "cluster mixes detector classes".into(),
                    });
                }
            }
        }
    }
    Ok(())
}

fn new_cluster(cluster: &Cluster, class: Option<ClassLabel>, undetected: f64, cfg: &EotConfig) -> UniqueCluster {
    let n = cluster.count() as f64;
    let log_clutter = n * cfg.clutter_intensity(class).ln();
    let born = if undetected > 0.0 {
        cfg.birth_prior(class).birth_from_cluster(cluster)
    } else {
        None
    };
    match born {
        Some((ggiw, log_lik)) => {
            let log_e = undetected.ln() + cfg.detection_prob(class).ln() + log_lik;
            let log_new = log_add_exp(log_e, log_clutter);
            UniqueCluster {
                cluster: cluster.clone(),
                class,
                log_new,
                birth: Some(LocalHypothesis {
                    existence: (log_e - log_new).exp().clamp(0.0, 1.0),
                    ggiw,
                    class_label: class,
                    origin: LocalOrigin::Birth {
                        cluster_size: cluster.count(),
                    },
                }),
            }
        }
        None => UniqueCluster {
            cluster: cluster.clone(),
            class,
            log_new: log_clutter,
            birth: None,
        },
    }
}

fn local_options(
    parent: usize,
    h: &LocalHypothesis,
    clusters: &[UniqueCluster],
    cfg: &EotConfig,
) -> LocalOptions {
    let pdm = cfg.detection_prob(h.class_label);
    let pd = eot_predicted_detection_prob(&h.ggiw, cfg, h.class_label);
    let r = h.existence;
    let log_missed = (1.0 - r * pd).max(LOG_FLOOR).ln();
    let missed_r = if 1.0 - r * pd > LOG_FLOOR {
        (r * (1.0 - pd) / (1.0 - r * pd)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let missed = LocalHypothesis {
        existence: missed_r,
        ggiw: h.ggiw.missed(pdm),
        class_label: h.class_label,
        origin: LocalOrigin::Missed { parent },
    };
    let mut detections = Vec::new();
    if r > 0.0 {
        let gate = cfg.gate_threshold();
        for (u, uc) in clusters.iter().enumerate() {
            if !classes_compatible(h.class_label, uc.class) {
                continue;
            }
            match h.ggiw.centroid_distance2(&uc.cluster) {
                Some(d2) if d2 <= gate => {}
                _ => continue,
            }
            let Some((posterior, log_lik)) = h.ggiw.update(&uc.cluster) else { continue };
            let log_det = r.ln() + pdm.ln() + log_lik;
            if log_det.is_finite() {
                detections.push(DetectOption {
                    cluster: u,
                    log_ratio: log_det - log_missed,
                    posterior,
                });
            }
        }
    }
    LocalOptions {
        log_missed,
        missed,
        detections,
    }
}

/// Posterior global hypothesis before compaction. Entries index into the
/// per-track child lists; new tracks are appended after the prior tracks.
struct Candidate {
    log_weight: f64,
    selection: Vec<Option<usize>>,
}

/// Child local hypotheses of every prior track, created on first use.
struct Children {
    /// (parent, cluster) -> child index, cluster `None` for missed.
    index: HashMap<(usize, Option<usize>), usize>,
    hyps: Vec<LocalHypothesis>,
}

impl Children {
    fn get(&mut self, parent: usize, cluster: Option<usize>, make: impl FnOnce() -> LocalHypothesis) -> usize {
        *self.index.entry((parent, cluster)).or_insert_with(|| {
            self.hyps.push(make());
            self.hyps.len() - 1
        })
    }
}

/// Measurement update over competing partitions of the scan.
pub fn eot_update_with_partitions(
    density: &PmbmDensity,
    scan: &PartitionedScan,
    cfg: &EotConfig,
) -> Result<PmbmDensity, FilterError> {
    validate_scan(scan)?;

    // unique clusters across partitions, in order of first appearance
    let mut key_to_cluster: HashMap<&[usize], usize> = HashMap::new();
    let mut clusters: Vec<UniqueCluster> = Vec::new();
    let mut partitions: Vec<Vec<usize>> = Vec::with_capacity(scan.partitions.len().max(1));
    for p in &scan.partitions {
        let mut ids = Vec::with_capacity(p.clusters.len());
        for c in &p.clusters {
            let id = *key_to_cluster.entry(c.indices.as_slice()).or_insert_with(|| {
                let class = scan.point_classes.as_ref().map(|pc| pc[c.indices[0]]);
                clusters.push(new_cluster(c, class, density.undetected, cfg));
                clusters.len() - 1
            });
            ids.push(id);
        }
        partitions.push(ids);
    }
    if partitions.is_empty() {
        partitions.push(Vec::new());
    }

    let n_old = density.tracks.len();
    let n_new = clusters.len();

    // local options for every local hypothesis in use
    let mut options: Vec<Vec<Option<LocalOptions>>> =
        density.tracks.iter().map(|t| (0..t.hyps.len()).map(|_| None).collect()).collect();
    for g in &density.hypotheses {
        for (t, sel) in g.selection.iter().enumerate() {
            if let Some(h) = *sel {
                if options[t][h].is_none() {
                    options[t][h] = Some(local_options(h, &density.tracks[t].hyps[h], &clusters, cfg));
                }
            }
        }
    }
    let mut children: Vec<Children> = (0..n_old)
        .map(|_| Children {
            index: HashMap::new(),
            hyps: Vec::new(),
        })
        .collect();

    let mut candidates: Vec<Candidate> = Vec::new();
    for g in &density.hypotheses {
        if !(g.weight > 0.0) {
            continue;
        }
        let log_wg = g.weight.ln();
        let present: Vec<(usize, usize)> = g
            .selection
            .iter()
            .enumerate()
            .filter_map(|(t, s)| s.map(|h| (t, h)))
            .collect();
        let log_missed_all: f64 = present
            .iter()
            .map(|&(t, h)| options[t][h].as_ref().expect("options computed").log_missed)
            .sum();
        let k = ((cfg.max_hypotheses as f64 * g.weight).ceil() as usize).max(1);

        for part in &partitions {
            // clusters reachable by some present track enter the assignment
            let mut gated_rows: Vec<usize> = Vec::new();
            let mut forced_log = 0.0;
            for &u in part {
                let reachable = present.iter().any(|&(t, h)| {
                    options[t][h]
                        .as_ref()
                        .expect("options computed")
                        .detections
                        .iter()
                        .any(|d| d.cluster == u)
                });
                if reachable {
                    gated_rows.push(u);
                } else {
                    forced_log += clusters[u].log_new;
                }
            }
            let cols: Vec<(usize, usize)> = present
                .iter()
                .copied()
                .filter(|&(t, h)| {
                    options[t][h]
                        .as_ref()
                        .expect("options computed")
                        .detections
                        .iter()
                        .any(|d| gated_rows.contains(&d.cluster))
                })
                .collect();

            let base = log_wg + log_missed_all + forced_log;
            let assignments: Vec<(f64, Vec<usize>)> = if gated_rows.is_empty() {
                vec![(0.0, Vec::new())]
            } else {
                let m = gated_rows.len();
                let nc = cols.len();
                let mut costs = CostMatrix::forbidden(m, nc + m);
                for (j, &u) in gated_rows.iter().enumerate() {
                    for (c, &(t, h)) in cols.iter().enumerate() {
                        let opts = options[t][h].as_ref().expect("options computed");
                        if let Some(d) = opts.detections.iter().find(|d| d.cluster == u) {
                            costs.set(j, c, -d.log_ratio);
                        }
                    }
                    costs.set(j, nc + j, -clusters[u].log_new);
                }
                murty_k_best(&costs, k)
                    .expect("new-object columns keep the association feasible")
                    .into_iter()
                    .map(|a| (a.total, a.row_to_col))
                    .collect()
            };

            for (total, row_to_col) in assignments {
                let mut selection: Vec<Option<usize>> = vec![None; n_old + n_new];
                let mut detected_by: HashMap<usize, usize> = HashMap::new();
                for (j, &c) in row_to_col.iter().enumerate() {
                    let u = gated_rows[j];
                    if c < cols.len() {
                        detected_by.insert(cols[c].0, u);
                    } else {
                        selection[n_old + u] = Some(0);
                    }
                }
                for &u in part {
                    if !gated_rows.contains(&u) {
                        selection[n_old + u] = Some(0);
                    }
                }
                for &(t, h) in &present {
                    let opts = options[t][h].as_ref().expect("options computed");
                    let child = match detected_by.get(&t) {
                        Some(&u) => children[t].get(h, Some(u), || {
                            let d = opts.detections.iter().find(|d| d.cluster == u).expect("gated option");
                            let parent = &density.tracks[t].hyps[h];
                            LocalHypothesis {
                                existence: 1.0,
                                ggiw: d.posterior.clone(),
                                class_label: parent.class_label.or(clusters[u].class),
                                origin: LocalOrigin::Detected {
                                    parent: h,
                                    cluster_size: clusters[u].cluster.count(),
                                },
                            }
                        }),
                        None => children[t].get(h, None, || opts.missed.clone()),
                    };
                    selection[t] = Some(child);
                }
                // clusters that start a track without a valid birth density are clutter only
                for u in 0..n_new {
                    if selection[n_old + u].is_some() && clusters[u].birth.is_none() {
                        selection[n_old + u] = None;
                    }
                }
                candidates.push(Candidate {
                    log_weight: base - total,
                    selection,
                });
            }
        }
    }

    let mut tracks: Vec<Track> = density
        .tracks
        .iter()
        .zip(children)
        .map(|(t, ch)| Track { id: t.id, hyps: ch.hyps })
        .collect();
    let mut fresh_ids = Vec::with_capacity(n_new);
    for uc in clusters {
        // ids are provisional until compaction drops unused tracks
        fresh_ids.push(tracks.len());
        tracks.push(Track {
            id: 0,
            hyps: uc.birth.into_iter().collect(),
        });
    }

    let hypotheses = reduce_hypotheses(candidates, &tracks, cfg);
    let mut out = compact(tracks, hypotheses, n_old, density.next_track_id);

    let base_pd = cfg.detection_prob(None) * (1.0 - cfg.birth_prior(None).rate.prob_no_points());
    out.undetected = density.undetected * (1.0 - base_pd);
    Ok(out)
}

/// Normalization, existence pruning, merging of duplicates, weight pruning
/// and capping.
fn reduce_hypotheses(candidates: Vec<Candidate>, tracks: &[Track], cfg: &EotConfig) -> Vec<GlobalHypothesis> {
    let mut merged: Vec<(f64, Vec<Option<usize>>)> = Vec::with_capacity(candidates.len());
    let mut seen: HashMap<Vec<Option<usize>>, usize> = HashMap::new();
    for mut c in candidates {
        for (t, sel) in c.selection.iter_mut().enumerate() {
            if let Some(h) = *sel {
                let r = tracks[t].hyps[h].existence;
                if r <= 0.0 || r < cfg.existence_prune_threshold {
                    *sel = None;
                }
            }
        }
        match seen.get(&c.selection) {
            Some(&i) => merged[i].0 = log_add_exp(merged[i].0, c.log_weight),
            None => {
                seen.insert(c.selection.clone(), merged.len());
                merged.push((c.log_weight, c.selection));
            }
        }
    }
    let norm = log_sum_exp(&merged.iter().map(|(w, _)| *w).collect::<Vec<_>>());
    // stable: equal weights keep creation order
    merged.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut kept: Vec<(f64, Vec<Option<usize>>)> = Vec::new();
    for (lw, sel) in merged {
        if kept.len() >= cfg.max_hypotheses {
            break;
        }
        if !kept.is_empty() && (lw - norm).exp() < cfg.hypothesis_prune_weight {
            break;
        }
        kept.push((lw, sel));
    }
    let norm = log_sum_exp(&kept.iter().map(|(w, _)| *w).collect::<Vec<_>>());
    kept.into_iter()
        .map(|(lw, selection)| GlobalHypothesis {
            weight: (lw - norm).exp(),
            selection,
        })
        .collect()
}

/// Drops unreferenced local hypotheses and tracks, and assigns ids to the
/// surviving new tracks.
fn compact(tracks: Vec<Track>, mut hypotheses: Vec<GlobalHypothesis>, n_old: usize, mut next_id: u64) -> PmbmDensity {
    let mut remap: Vec<Vec<Option<usize>>> = tracks.iter().map(|t| vec![None; t.hyps.len()]).collect();
    let mut used: Vec<Vec<usize>> = vec![Vec::new(); tracks.len()];
    for g in &hypotheses {
        for (t, sel) in g.selection.iter().enumerate() {
            if let Some(h) = *sel {
                if remap[t][h].is_none() {
                    remap[t][h] = Some(used[t].len());
                    used[t].push(h);
                }
            }
        }
    }
    // keep children in creation order so indices are reproducible
    for (t, u) in used.iter_mut().enumerate() {
        u.sort_unstable();
        for (new_idx, &h) in u.iter().enumerate() {
            remap[t][h] = Some(new_idx);
        }
    }
    let live: Vec<usize> = (0..tracks.len()).filter(|&t| !used[t].is_empty()).collect();
    for g in &mut hypotheses {
        g.selection = live
            .iter()
            .map(|&t| g.selection[t].map(|h| remap[t][h].expect("referenced hypothesis")))
            .collect();
    }
    let mut out_tracks = Vec::with_capacity(live.len());
    let mut tracks: Vec<Option<Track>> = tracks.into_iter().map(Some).collect();
    for &t in &live {
        let mut track = tracks[t].take().expect("each track taken once");
        let mut hyps: Vec<Option<LocalHypothesis>> = track.hyps.into_iter().map(Some).collect();
        track.hyps = used[t].iter().map(|&h| hyps[h].take().expect("unique")).collect();
        if t >= n_old {
            track.id = next_id;
            next_id += 1;
        }
        out_tracks.push(track);
    }
    PmbmDensity {
        undetected: 0.0,
        tracks: out_tracks,
        hypotheses,
        next_track_id: next_id,
    }
}

/// Boxes of the confident objects under the most likely global hypothesis,
/// after NMS, ordered by track id.
pub fn eot_extract(density: &PmbmDensity, frame_idx: u64, cfg: &EotConfig) -> Vec<TrackRecord> {
    let best = density.best_hypothesis();
    let mut records = Vec::new();
    for (t, sel) in best.selection.iter().enumerate() {
        let Some(h) = *sel else { continue };
        let lh = &density.tracks[t].hyps[h];
        if lh.existence < cfg.existence_extract_threshold {
            continue;
        }
        let Ok(bev) = extent_to_box(&lh.ggiw, cfg.axis_scale) else { continue };
        let class_label = lh.class_label.unwrap_or_else(|| heuristic_classify(&bev, &cfg.size_table));
        let height = *cfg.box_height.get(class_label);
        records.push(TrackRecord {
            seq_id: String::new(),
            track_id: density.tracks[t].id,
            frame_idx,
            bbox: Box3D {
                cz: 0.5 * height,
                height,
                ..bev
            },
            class_label,
            existence: lh.existence.clamp(0.0, 1.0),
        });
    }
    let mut kept = nms_boxes(records, cfg.nms_iou_threshold);
    kept.sort_by_key(|r| r.track_id);
    kept
}
