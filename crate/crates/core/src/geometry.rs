//! BEV rectangle geometry.

use crate::types::Box3D;

/// Boundary slack for the inclusive containment test.
const EDGE_EPS: f64 = 1e-9;

/// Whether the BEV point lies inside the yaw-rotated rectangle of `bbox`
/// (boundary included, `z` ignored).
pub fn point_in_rotated_box(point: [f64; 2], bbox: &Box3D) -> bool {
    let (s, c) = bbox.yaw.sin_cos();
    let dx = point[0] - bbox.cx;
    let dy = point[1] - bbox.cy;
    let u = c * dx + s * dy;
    let v = -s * dx + c * dy;
    u.abs() <= 0.5 * bbox.length + EDGE_EPS && v.abs() <= 0.5 * bbox.width + EDGE_EPS
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..n {
        let [x0, y0] = poly[i];
        let [x1, y1] = poly[(i + 1) % n];
        twice += x0 * y1 - x1 * y0;
    }
    0.5 * twice.abs()
}

// Sutherland-Hodgman clipping of `subject` by the convex CCW polygon `clip`.
fn clip_convex(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut output = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let inside = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0;
        let intersect = |p: [f64; 2], q: [f64; 2]| {
            let r = [q[0] - p[0], q[1] - p[1]];
            let e = [b[0] - a[0], b[1] - a[1]];
            let denom = r[0] * e[1] - r[1] * e[0];
            if denom.abs() < 1e-300 {
                return p;
            }
            let t = ((a[0] - p[0]) * e[1] - (a[1] - p[1]) * e[0]) / denom;
            [p[0] + t * r[0], p[1] + t * r[1]]
        };
        let input = std::mem::take(&mut output);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            match (inside(prev), inside(cur)) {
                (true, true) => output.push(cur),
                (true, false) => output.push(intersect(prev, cur)),
                (false, true) => {
                    output.push(intersect(prev, cur));
                    output.push(cur);
                }
                (false, false) => {}
            }
        }
    }
    output
}

/// Area of the BEV intersection of two rotated rectangles.
pub fn bev_intersection_area(a: &Box3D, b: &Box3D) -> f64 {
    // cheap reject on circumscribed circles
    let ra = 0.5 * a.length.hypot(a.width);
    let rb = 0.5 * b.length.hypot(b.width);
    if (a.cx - b.cx).hypot(a.cy - b.cy) > ra + rb {
        return 0.0;
    }
    polygon_area(&clip_convex(&a.corners(), &b.corners()))
}

/// BEV intersection over union of two rotated rectangles.
pub fn bev_iou(a: &Box3D, b: &Box3D) -> f64 {
    let inter = bev_intersection_area(a, b);
    let union = a.length * a.width + b.length * b.width - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn containment() {
        let b = Box3D::bev(0.0, 0.0, 4.0, 2.0, 0.0);
        assert!(point_in_rotated_box([0.0, 0.0], &b));
        assert!(point_in_rotated_box([2.0, 1.0], &b));
        assert!(!point_in_rotated_box([2.1, 0.0], &b));
        assert!(!point_in_rotated_box([0.0, 1.1], &b));
    }

    #[test]
    fn containment_rotated_long_axis() {
        let r = FRAC_PI_4;
        let p = [2.0 * r.cos(), 2.0 * r.sin()];
        assert!(point_in_rotated_box(p, &Box3D::bev(0.0, 0.0, 4.0, 2.0, r)));
        assert!(!point_in_rotated_box(p, &Box3D::bev(0.0, 0.0, 4.0, 2.0, 0.0)));
    }

    #[test]
    fn rotated_corner_is_inside() {
        let b = Box3D::bev(3.0, -1.0, 4.5, 1.8, 0.7);
        for c in b.corners() {
            assert!(point_in_rotated_box(c, &b));
        }
    }

    #[test]
    fn iou_cases() {
        let a = Box3D::bev(0.0, 0.0, 2.0, 2.0, 0.0);
        assert!((bev_iou(&a, &a) - 1.0).abs() < 1e-12);
        let b = Box3D::bev(1.0, 0.0, 2.0, 2.0, 0.0);
        assert!((bev_iou(&a, &b) - 2.0 / 6.0).abs() < 1e-12);
        let c = Box3D::bev(5.0, 0.0, 2.0, 2.0, 0.0);
        assert_eq!(bev_iou(&a, &c), 0.0);
        // square rotated by 45 degrees inside a bigger square
        let d = Box3D::bev(0.0, 0.0, 2.0, 2.0, FRAC_PI_4);
        let big = Box3D::bev(0.0, 0.0, 4.0, 4.0, 0.0);
        assert!((bev_iou(&d, &big) - 4.0 / 16.0).abs() < 1e-12);
        // rotated square against itself-sized axis square: octagon of area 8(sqrt2-1)
        let oct = 8.0 * (2f64.sqrt() - 1.0);
        assert!((bev_intersection_area(&a, &d) - oct).abs() < 1e-12);
    }
}
