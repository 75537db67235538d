//! Reference implementations and drivers shared by the integration tests.
//! The reference computations never call into the library's algorithms.

#![allow(dead_code)]

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Vector2, Vector4};

/// Minimum total over every injective row-to-column map, by enumeration.
/// `None` when no finite assignment exists.
pub fn brute_force_min(costs: &[Vec<f64>]) -> Option<f64> {
    all_assignment_totals(costs).into_iter().next()
}

/// Totals of every finite assignment, ascending.
pub fn all_assignment_totals(costs: &[Vec<f64>]) -> Vec<f64> {
    let rows = costs.len();
    let cols = costs.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    let mut used = vec![false; cols];
    fn rec(r: usize, acc: f64, costs: &[Vec<f64>], used: &mut [bool], out: &mut Vec<f64>) {
        if r == costs.len() {
            out.push(acc);
            return;
        }
        for c in 0..used.len() {
            if !used[c] && costs[r][c].is_finite() {
                used[c] = true;
                rec(r + 1, acc + costs[r][c], costs, used, out);
                used[c] = false;
            }
        }
    }
    if rows <= cols {
        rec(0, 0.0, costs, &mut used, &mut out);
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Closed-form principal square root of a 2x2 SPD matrix.
pub fn sqrt_spd2(m: &Matrix2<f64>) -> Matrix2<f64> {
    let s = m.determinant().sqrt();
    let t = (m.trace() + 2.0 * s).sqrt();
    (m + Matrix2::identity() * s) / t
}

/// Single-object GGIW recursion written out from the model equations.
#[derive(Debug, Clone)]
pub struct RefGgiw {
    pub a: f64,
    pub b: f64,
    pub m: Vector4<f64>,
    pub p: Matrix4<f64>,
    pub v: f64,
    pub big_v: Matrix2<f64>,
}

impl RefGgiw {
    pub fn predict(&mut self, dt: f64, q: f64, eta: f64, tau: f64) {
        self.a /= eta;
        self.b /= eta;
        let mut f = Matrix4::identity();
        f[(0, 2)] = dt;
        f[(1, 3)] = dt;
        let mut qm = Matrix4::zeros();
        for i in 0..2 {
            qm[(i, i)] = q * dt * dt * dt / 3.0;
            qm[(i, i + 2)] = q * dt * dt / 2.0;
            qm[(i + 2, i)] = q * dt * dt / 2.0;
            qm[(i + 2, i + 2)] = q * dt;
        }
        self.m = f * self.m;
        self.p = f * self.p * f.transpose() + qm;
        let decay = (-dt / tau).exp();
        self.v = 6.0 + decay * (self.v - 6.0);
        self.big_v *= decay;
    }

    pub fn update(&mut self, points: &[[f64; 2]]) {
        let n = points.len() as f64;
        let zbar = points.iter().fold(Vector2::zeros(), |acc, p| acc + Vector2::new(p[0], p[1])) / n;
        let scatter = points.iter().fold(Matrix2::zeros(), |acc, p| {
            let d = Vector2::new(p[0], p[1]) - zbar;
            acc + d * d.transpose()
        });
        let h = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        let x_hat = self.big_v / (self.v - 6.0);
        let eps = zbar - h * self.m;
        let s = h * self.p * h.transpose() + x_hat / n;
        let s_inv = s.try_inverse().expect("innovation covariance invertible");
        let k = self.p * h.transpose() * s_inv;
        self.m += k * eps;
        self.p -= k * s * k.transpose();
        let xs = sqrt_spd2(&x_hat);
        let si = sqrt_spd2(&s).try_inverse().expect("invertible");
        let spread = xs * si * eps * eps.transpose() * si.transpose() * xs.transpose();
        self.v += n;
        self.big_v += spread + scatter;
        self.a += n;
        self.b += 1.0;
    }
}

/// Largest relative difference, measured against `1 + |reference|`.
pub fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / (1.0 + reference.abs())
}

/// One frame of a toy evaluation: `(id, x, y)` for ground truth and estimates.
pub struct ToyFrame {
    pub gt: Vec<(u64, f64, f64)>,
    pub est: Vec<(u64, f64, f64)>,
}

#[derive(Debug, Clone, Copy)]
pub struct RefHota {
    pub hota: f64,
    pub det_a: f64,
    pub ass_a: f64,
    pub loc_a: f64,
}

fn sim(a: (f64, f64), b: (f64, f64), d0: f64) -> f64 {
    let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    (1.0 - d / d0).max(0.0)
}

/// Best-scoring one-to-one matching by enumerating every injective map of
/// the smaller side into the larger one.
fn best_matching(score: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let ng = score.len();
    let ne = score.first().map_or(0, Vec::len);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let transpose = ng > ne;
    let (rows, cols) = if transpose { (ne, ng) } else { (ng, ne) };
    let at = |r: usize, c: usize| if transpose { score[c][r] } else { score[r][c] };
    let mut used = vec![false; cols];
    let mut cur = Vec::new();
    fn rec(
        r: usize,
        rows: usize,
        at: &dyn Fn(usize, usize) -> f64,
        used: &mut [bool],
        cur: &mut Vec<(usize, usize)>,
        best: &mut (f64, Vec<(usize, usize)>),
    ) {
        if r == rows {
            let total: f64 = cur.iter().map(|&(a, b)| at(a, b)).sum();
            if total > best.0 {
                *best = (total, cur.clone());
            }
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                cur.push((r, c));
                rec(r + 1, rows, at, used, cur, best);
                cur.pop();
                used[c] = false;
            }
        }
    }
    rec(0, rows, &at, &mut used, &mut cur, &mut best);
    best.1
        .into_iter()
        .map(|(r, c)| if transpose { (c, r) } else { (r, c) })
        .filter(|&(g, e)| score[g][e] > 0.0)
        .collect()
}

/// HOTA with global alignment, by brute force.
pub fn reference_hota(frames: &[ToyFrame], d0: f64, alphas: &[f64]) -> RefHota {
    use std::collections::BTreeMap;
    let mut pot: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    let mut gt_count: BTreeMap<u64, f64> = BTreeMap::new();
    let mut tr_count: BTreeMap<u64, f64> = BTreeMap::new();
    let sims: Vec<Vec<Vec<f64>>> = frames
        .iter()
        .map(|f| {
            f.gt.iter()
                .map(|g| f.est.iter().map(|e| sim((g.1, g.2), (e.1, e.2), d0)).collect())
                .collect()
        })
        .collect();
    for (f, s) in frames.iter().zip(&sims) {
        for g in &f.gt {
            *gt_count.entry(g.0).or_default() += 1.0;
        }
        for e in &f.est {
            *tr_count.entry(e.0).or_default() += 1.0;
        }
        for (i, g) in f.gt.iter().enumerate() {
            let row: f64 = s[i].iter().sum();
            for (j, e) in f.est.iter().enumerate() {
                let col: f64 = s.iter().map(|r| r[j]).sum();
                let denom = row + col - s[i][j];
                if denom > 0.0 {
                    *pot.entry((g.0, e.0)).or_default() += s[i][j] / denom;
                }
            }
        }
    }
    let align = |g: u64, t: u64| {
        let p = pot.get(&(g, t)).copied().unwrap_or(0.0);
        p / (gt_count[&g] + tr_count[&t] - p)
    };
    let matches: Vec<Vec<(usize, usize)>> = frames
        .iter()
        .zip(&sims)
        .map(|(f, s)| {
            let score: Vec<Vec<f64>> = f
                .gt
                .iter()
                .enumerate()
                .map(|(i, g)| f.est.iter().enumerate().map(|(j, e)| align(g.0, e.0) * s[i][j]).collect())
                .collect();
            best_matching(&score)
        })
        .collect();
    let total_gt: f64 = gt_count.values().sum();
    let total_tr: f64 = tr_count.values().sum();
    let mut acc = RefHota {
        hota: 0.0,
        det_a: 0.0,
        ass_a: 0.0,
        loc_a: 0.0,
    };
    for &alpha in alphas {
        let mut tp = 0.0;
        let mut loc = 0.0;
        let mut counts: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        for ((f, s), m) in frames.iter().zip(&sims).zip(&matches) {
            for &(i, j) in m {
                if s[i][j] >= alpha {
                    tp += 1.0;
                    loc += s[i][j];
                    *counts.entry((f.gt[i].0, f.est[j].0)).or_default() += 1.0;
                }
            }
        }
        let det_a = tp / (total_gt + total_tr - tp);
        let (ass_a, loc_a) = if tp > 0.0 {
            let ass: f64 = counts
                .iter()
                .map(|(&(g, t), &c)| c * c / (gt_count[&g] + tr_count[&t] - c))
                .sum();
            (ass / tp, loc / tp)
        } else {
            (0.0, 0.0)
        };
        acc.det_a += det_a;
        acc.ass_a += ass_a;
        acc.loc_a += loc_a;
        acc.hota += (det_a * ass_a).sqrt();
    }
    let n = alphas.len() as f64;
    RefHota {
        hota: acc.hota / n,
        det_a: acc.det_a / n,
        ass_a: acc.ass_a / n,
        loc_a: acc.loc_a / n,
    }
}

/// Ten frames, two objects, one identity switch on the first object at
/// frame 5, one missed estimate and one false estimate.
pub fn toy_id_switch_frames() -> Vec<ToyFrame> {
    (0..10u64)
        .map(|k| {
            let kf = k as f64;
            let g1 = (1, 2.0 + 0.5 * kf, 1.0);
            let g2 = (2, 10.0, -3.0 + 0.3 * kf);
            let mut est = Vec::new();
            let id1 = if k < 5 { 10 } else { 11 };
            est.push((id1, g1.1 + 0.11 * (kf + 1.0) / 3.0, g1.2 - 0.07 * kf));
            if k != 7 {
                est.push((20, g2.1 - 0.23 + 0.041 * kf, g2.2 + 0.17));
            }
            if k == 3 {
                est.push((30, 30.0, 30.0));
            }
            ToyFrame { gt: vec![g1, g2], est }
        })
        .collect()
}

/// Library frames and records for a toy sequence; every object is a car.
pub fn toy_to_library(frames: &[ToyFrame]) -> (Vec<radar_mot::types::Frame>, Vec<radar_mot::types::TrackRecord>) {
    use radar_mot::types::{Box3D, ClassLabel, Frame, GroundTruthObject, TrackRecord};
    let mut out_frames = Vec::new();
    let mut records = Vec::new();
    for (k, f) in frames.iter().enumerate() {
        let mut frame = Frame::new("toy", k as u64, k as f64 * 0.1);
        frame.ground_truth = Some(
            f.gt.iter()
                .map(|&(id, x, y)| GroundTruthObject {
                    gt_id: id,
                    bbox: Box3D::bev(x, y, 4.0, 1.8, 0.0),
                    class_label: ClassLabel::Car,
                })
                .collect(),
        );
        out_frames.push(frame);
        records.extend(f.est.iter().map(|&(id, x, y)| TrackRecord {
            seq_id: "toy".into(),
            track_id: id,
            frame_idx: k as u64,
            bbox: Box3D::bev(x, y, 4.0, 1.8, 0.0),
            class_label: ClassLabel::Car,
            existence: 1.0,
        }));
    }
    (out_frames, records)
}

/// Clutter-free sequence of one car returning on average `mean_points` points.
pub fn single_car_scenario(frames: u64, mean_points: f64, seed: u64) -> radar_mot::scenario::ScenarioConfig {
    let text = format!(
        r#"
seq_id = "single"
frames = {frames}
frame_rate = 10.0
seed = {seed}
clutter_rate = 0.0

[field_of_view]
x_min = 0.0
x_max = 60.0
y_min = -25.0
y_max = 25.0

[detector]
fn_rate = 0.0
fp_rate = 0.0
center_noise = 0.0
size_noise = 0.0
yaw_noise = 0.0
tp_score = [1.0, 1.0]
fp_score = [0.5, 0.5]

[[objects]]
class = "car"
birth_frame = 0
position = [15.0, -5.0]
velocity = [3.0, 1.0]
length = 4.5
width = 1.8
mean_points = {mean_points}
"#
    );
    radar_mot::scenario::ScenarioConfig::from_toml(&text).expect("valid scenario")
}

/// Runs the PMBM filter on a single-object sequence with the whole scan as
/// one cluster and compares the object's posterior, under the best global
/// hypothesis, with [`RefGgiw`]. Returns the largest relative parameter error
/// and the number of frames compared.
pub fn single_object_ggiw_max_error(frames: u64, mean_points: f64, seed: u64) -> (f64, usize) {
    use radar_mot::config::PipelineConfig;
    use radar_mot::eot::{
        eot_predict, eot_update_with_partitions, GammaRate, GgiwComponent, InverseWishartExtent, LocalHypothesis,
        LocalOrigin, PartitionedScan, PmbmDensity,
    };
    use radar_mot::kinematics::KinematicGaussian;
    use radar_mot::partitioning::{Cluster, Partition};

    let scan_frames = radar_mot::scenario::simulate(&single_car_scenario(frames, mean_points, seed)).expect("simulates");
    let cfg = PipelineConfig::default().eot;
    let gt0 = scan_frames[0].ground_truth()[0].bbox;
    let mut p0 = Matrix4::zeros();
    p0[(0, 0)] = 1.0;
    p0[(1, 1)] = 1.0;
    p0[(2, 2)] = 25.0;
    p0[(3, 3)] = 25.0;
    let x0 = Matrix2::new(1.2, 0.0, 0.0, 0.2);
    let mut reference = RefGgiw {
        a: 20.0,
        b: 2.0,
        m: Vector4::new(gt0.cx, gt0.cy, 0.0, 0.0),
        p: p0,
        v: 12.0,
        big_v: x0 * 6.0,
    };
    let prior = LocalHypothesis {
        existence: 1.0,
        ggiw: GgiwComponent {
            rate: GammaRate { shape: reference.a, rate: reference.b },
            kinematics: KinematicGaussian { mean: reference.m, cov: reference.p },
            extent: InverseWishartExtent { dof: reference.v, scale: reference.big_v },
        },
        class_label: None,
        origin: LocalOrigin::Prior,
    };
    let mut density = PmbmDensity::with_objects(&cfg, vec![(1, prior)]);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    let mut last_t = scan_frames[0].timestamp;
    for (k, f) in scan_frames.iter().enumerate() {
        let pts = f.points();
        assert!(!pts.is_empty(), "frame {k} has no points; pick another seed");
        if k > 0 {
            let dt = f.timestamp - last_t;
            density = eot_predict(&density, dt, &cfg).expect("predicts");
            reference.predict(dt, cfg.process_noise, cfg.forgetting_factor, cfg.extent_time_constant);
        }
        last_t = f.timestamp;
        let cluster = Cluster::from_indices(pts, (0..pts.len()).collect());
        let scan = PartitionedScan {
            num_points: pts.len(),
            partitions: vec![Partition::canonical(vec![cluster])],
            point_classes: None,
        };
        density = eot_update_with_partitions(&density, &scan, &cfg).expect("updates");
        let coords: Vec<[f64; 2]> = pts.iter().map(|p| [p.x, p.y]).collect();
        reference.update(&coords);

        let best = density.best_hypothesis();
        let t = density.tracks.iter().position(|t| t.id == 1).expect("object track survives");
        let h = &density.tracks[t].hyps[best.selection[t].expect("object exists under the best hypothesis")];
        assert!(matches!(h.origin, LocalOrigin::Detected { .. }), "frame {k}: object not detected");
        let g = &h.ggiw;
        let mut errs = vec![
            rel_err(g.rate.shape, reference.a),
            rel_err(g.rate.rate, reference.b),
            rel_err(g.extent.dof, reference.v),
        ];
        errs.extend(g.kinematics.mean.iter().zip(reference.m.iter()).map(|(x, y)| rel_err(*x, *y)));
        errs.extend(g.kinematics.cov.iter().zip(reference.p.iter()).map(|(x, y)| rel_err(*x, *y)));
        errs.extend(g.extent.scale.iter().zip(reference.big_v.iter()).map(|(x, y)| rel_err(*x, *y)));
        worst = errs.into_iter().fold(worst, f64::max);
        compared += 1;
    }
    (worst, compared)
}

#[derive(Debug, Default)]
pub struct ConjugacyStats {
    pub steps: usize,
    pub detected_children: usize,
    pub births: usize,
    pub missed_children: usize,
    pub max_weight_sum_error: f64,
    pub max_hypotheses: usize,
    pub violations: Vec<String>,
}

/// Randomized predict/update steps on scenes of a few objects plus clutter.
/// Every child local hypothesis is checked against its parent: a detection
/// with `n` points adds `n` to the gamma shape and to the extent dof, a miss
/// leaves the extent untouched, and a birth adds `n` to the template shape
/// and `n - 1` to the template dof.
pub fn conjugacy_run(runs: u64, steps_per_run: usize, seed: u64) -> ConjugacyStats {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal, Poisson};
    use radar_mot::config::PipelineConfig;
    use radar_mot::eot::{eot_predict, eot_update_with_partitions, LocalOrigin, PartitionedScan, PmbmDensity};
    use radar_mot::partitioning::generate_partitions;
    use radar_mot::types::RadarPoint;

    let base = PipelineConfig::default();
    let mut stats = ConjugacyStats::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for run in 0..runs {
        let mut cfg = base.eot.clone();
        cfg.max_hypotheses = rng.random_range(1..=30);
        cfg.detection_prob = rng.random_range(0.6..0.99);
        cfg.clutter_intensity = 10f64.powf(rng.random_range(-4.0..-1.5));
        let birth = cfg.birth_prior(None);
        let mut objects: Vec<([f64; 2], [f64; 2], f64)> = (0..rng.random_range(1..=4))
            .map(|_| {
                (
                    [rng.random_range(5.0..25.0), rng.random_range(-10.0..10.0)],
                    [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
                    rng.random_range(2.0..12.0),
                )
            })
            .collect();
        let mut density = PmbmDensity::new(&cfg);
        for step in 0..steps_per_run {
            let dt = 0.1;
            let predicted = if step == 0 { density.clone() } else { eot_predict(&density, dt, &cfg).expect("predicts") };
            let mut points = Vec::new();
            for (pos, vel, rate) in objects.iter_mut() {
                pos[0] += vel[0] * dt;
                pos[1] += vel[1] * dt;
                let n = Poisson::new(*rate).unwrap().sample(&mut rng) as usize;
                let nx = Normal::new(pos[0], 0.8).unwrap();
                let ny = Normal::new(pos[1], 0.4).unwrap();
                points.extend((0..n).map(|_| RadarPoint::new(nx.sample(&mut rng), ny.sample(&mut rng))));
            }
            let clutter = Poisson::new(3.0).unwrap().sample(&mut rng) as usize;
            points.extend(
                (0..clutter).map(|_| RadarPoint::new(rng.random_range(0.0..30.0), rng.random_range(-15.0..15.0))),
            );
            let scan = PartitionedScan {
                num_points: points.len(),
                partitions: generate_partitions(&points, &base.clustering),
                point_classes: None,
            };
            let updated = eot_update_with_partitions(&predicted, &scan, &cfg).expect("updates");
            stats.steps += 1;

            let wsum: f64 = updated.hypotheses.iter().map(|g| g.weight).sum();
            stats.max_weight_sum_error = stats.max_weight_sum_error.max((wsum - 1.0).abs());
            stats.max_hypotheses = stats.max_hypotheses.max(updated.hypotheses.len());
            if updated.hypotheses.len() > cfg.max_hypotheses {
                stats
                    .violations
                    .push(format!("run {run} step {step}: {} hypotheses", updated.hypotheses.len()));
            }
            let tol = 1e-9;
            for t in &updated.tracks {
                let parent_track = predicted.tracks.iter().find(|p| p.id == t.id);
                for h in &t.hyps {
                    let g = &h.ggiw;
                    match (h.origin, parent_track) {
                        (LocalOrigin::Detected { parent, cluster_size }, Some(pt)) => {
                            let p = &pt.hyps[parent].ggiw;
                            let n = cluster_size as f64;
                            stats.detected_children += 1;
                            if (g.rate.shape - (p.rate.shape + n)).abs() > tol
                                || (g.extent.dof - (p.extent.dof + n)).abs() > tol
                            {
                                stats.violations.push(format!(
                                    "run {run} step {step} track {}: shape {} -> {}, dof {} -> {}, n = {cluster_size}",
                                    t.id, p.rate.shape, g.rate.shape, p.extent.dof, g.extent.dof
                                ));
                            }
                        }
                        (LocalOrigin::Missed { parent }, Some(pt)) => {
                            let p = &pt.hyps[parent].ggiw;
                            stats.missed_children += 1;
                            if g.extent != p.extent || g.kinematics != p.kinematics {
                                stats
                                    .violations
                                    .push(format!("run {run} step {step} track {}: miss changed the extent", t.id));
                            }
                        }
                        (LocalOrigin::Birth { cluster_size }, None) => {
                            let n = cluster_size as f64;
                            stats.births += 1;
                            if (g.rate.shape - (birth.rate.shape + n)).abs() > tol
                                || (g.extent.dof - (birth.extent.dof + n - 1.0)).abs() > tol
                            {
                                stats
                                    .violations
                                    .push(format!("run {run} step {step} track {}: birth counters off", t.id));
                            }
                        }
                        (origin, _) => stats
                            .violations
                            .push(format!("run {run} step {step} track {}: unexpected origin {origin:?}", t.id)),
                    }
                }
            }
            density = updated;
        }
    }
    stats
}
