use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use radar_mot::scenario::{preset, simulate, skew_point_distribution};
use radar_mot::types::RadarPoint;

fn sensor_facing(points: &[RadarPoint], center: [f64; 2], sensor: [f64; 2]) -> usize {
    points
        .iter()
        .filter(|p| (p.x - center[0]) * (sensor[0] - center[0]) + (p.y - center[1]) * (sensor[1] - center[1]) >= 0.0)
        .count()
}

#[test]
fn half_skew_favours_the_sensor_side() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let center = [20.0, 5.0];
    let sensor = [0.0, 0.0];
    let nx = Normal::new(center[0], 1.0).unwrap();
    let ny = Normal::new(center[1], 0.5).unwrap();
    let (mut facing, mut total) = (0usize, 0usize);
    for _ in 0..2000 {
        let pts: Vec<RadarPoint> = (0..8).map(|_| RadarPoint::new(nx.sample(&mut rng), ny.sample(&mut rng))).collect();
        let skewed = skew_point_distribution(&pts, center, sensor, 0.5, &mut rng);
        facing += sensor_facing(&skewed, center, sensor);
        total += skewed.len();
    }
    let share = facing as f64 / total as f64;
    // far-side mass halves: expected share 0.75
    assert!(share > 0.5, "share {share}");
    assert!((share - 0.75).abs() < 0.02, "share {share}");
}

#[test]
fn skew_limits() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pts: Vec<RadarPoint> = (0..50).map(|i| RadarPoint::new(10.0 + (i as f64 * 0.7).sin(), (i as f64 * 1.3).cos())).collect();
    assert_eq!(skew_point_distribution(&pts, [10.0, 0.0], [0.0, 0.0], 0.0, &mut rng), pts);
    let all = skew_point_distribution(&pts, [10.0, 0.0], [0.0, 0.0], 1.0, &mut rng);
    assert_eq!(sensor_facing(&all, [10.0, 0.0], [0.0, 0.0]), pts.len());
}

#[test]
fn different_seeds_differ_and_equal_seeds_agree() {
    let mut a = preset("default").unwrap();
    a.frames = 10;
    let mut b = a.clone();
    b.seed = 1;
    assert_eq!(simulate(&a).unwrap(), simulate(&a).unwrap());
    assert_ne!(simulate(&a).unwrap(), simulate(&b).unwrap());
}

#[test]
fn roadside_clutter_stays_near_the_edges() {
    let mut sc = preset("roadside").unwrap();
    sc.objects.clear();
    sc.clutter_rate = 0.0;
    sc.frames = 20;
    let frames = simulate(&sc).unwrap();
    let fov = sc.field_of_view;
    let n: usize = frames.iter().map(|f| f.points().len()).sum();
    assert!(n > 0);
    for f in &frames {
        for p in f.points() {
            let edge = (p.y - fov.y_min).min(fov.y_max - p.y);
            assert!(edge < 4.0, "point {p:?} far from the edges");
        }
    }
}
