//! Turning extent estimates into labelled boxes.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::FilterError;
use crate::geometry::bev_iou;
use crate::linalg::{symmetrize2, Mat2};
use crate::types::{normalize_yaw, Box3D, ClassLabel, TrackRecord};

use super::ggiw::GgiwComponent;

/// Relative eigenvalue gap below which an extent counts as isotropic.
const ISOTROPY_TOL: f64 = 1e-9;

/// Half-open interval `(min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeInterval {
    pub min: f64,
    pub max: f64,
}

impl SizeInterval {
    pub fn contains(&self, x: f64) -> bool {
        x > self.min && x <= self.max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeRule {
    pub class: ClassLabel,
    pub width: SizeInterval,
    pub length: SizeInterval,
}

/// Ordered size rules; the first rule containing the box wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeTable {
    pub rules: Vec<SizeRule>,
}

/// Class from BEV box size alone, `Other` when no rule matches.
pub fn heuristic_classify(bbox: &Box3D, table: &SizeTable) -> ClassLabel {
    table
        .rules
        .iter()
        .find(|r| r.width.contains(bbox.width) && r.length.contains(bbox.length))
        .map_or(ClassLabel::Other, |r| r.class)
}

/// Rectangle spanned by the axes of the expected extent ellipse, scaled so
/// that each half-side is `axis_scale` standard deviations. Yaw is the
/// direction of the major axis, in `[-π/2, π/2)`, and 0 for isotropic extents.
pub fn extent_matrix_to_box(extent: &Mat2, center: [f64; 2], axis_scale: f64) -> Result<Box3D, FilterError> {
    let x = symmetrize2(extent);
    if !(x[(0, 0)] > 0.0 && x.determinant() > 0.0 && x.iter().all(|v| v.is_finite())) {
        return Err(FilterError::DegenerateExtent);
    }
    let eig = SymmetricEigen::new(x);
    let (i_major, i_minor) = if eig.eigenvalues[0] >= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let l1 = eig.eigenvalues[i_major];
    let l2 = eig.eigenvalues[i_minor];
    let yaw = if (l1 - l2) <= ISOTROPY_TOL * l1 {
        0.0
    } else {
        let v = eig.eigenvectors.column(i_major);
        let mut yaw = v[1].atan2(v[0]);
        // an axis is only defined modulo π
        if yaw >= std::f64::consts::FRAC_PI_2 {
            yaw -= std::f64::consts::PI;
        } else if yaw < -std::f64::consts::FRAC_PI_2 {
            yaw += std::f64::consts::PI;
        }
        yaw
    };
    Ok(Box3D::bev(
        center[0],
        center[1],
        2.0 * axis_scale * l1.sqrt(),
        2.0 * axis_scale * l2.sqrt(),
        normalize_yaw(yaw),
    ))
}

/// Box of a GGIW component: center from the kinematic mean, axes from the
/// expected extent.
pub fn extent_to_box(component: &GgiwComponent, axis_scale: f64) -> Result<Box3D, FilterError> {
    if !(component.extent.dof > super::ggiw::MIN_EXTENT_DOF) {
        return Err(FilterError::DegenerateExtent);
    }
    let p = component.kinematics.position();
    extent_matrix_to_box(&component.extent.expected(), [p.x, p.y], axis_scale)
}

/// Extent matrix whose box (at the same axis scale) is `bbox`.
pub fn box_to_extent_matrix(bbox: &Box3D, axis_scale: f64) -> Mat2 {
    let l1 = (bbox.length / (2.0 * axis_scale)).powi(2);
    let l2 = (bbox.width / (2.0 * axis_scale)).powi(2);
    let (s, c) = bbox.yaw.sin_cos();
    let r = Mat2::new(c, -s, s, c);
    r * Mat2::new(l1, 0.0, 0.0, l2) * r.transpose()
}

/// Greedy suppression by descending existence: a record is dropped when its
/// BEV IoU with an already kept record reaches `iou_threshold`.
pub fn nms_boxes(mut records: Vec<TrackRecord>, iou_threshold: f64) -> Vec<TrackRecord> {
    // stable: equal existence keeps input order
    records.sort_by(|a, b| b.existence.total_cmp(&a.existence));
    let mut kept: Vec<TrackRecord> = Vec::with_capacity(records.len());
    for r in records {
        if kept.iter().all(|k| bev_iou(&k.bbox, &r.bbox) < iou_threshold) {
            kept.push(r);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn default_table() -> SizeTable {
        crate::eot::EotConfig::default().size_table
    }

    fn rec(id: u64, b: Box3D, e: f64) -> TrackRecord {
        TrackRecord {
            seq_id: String::new(),
            track_id: id,
            frame_idx: 0,
            bbox: b,
            class_label: ClassLabel::Other,
            existence: e,
        }
    }

    #[test]
    fn axis_aligned_extent() {
        let b = extent_matrix_to_box(&Mat2::new(4.0, 0.0, 0.0, 1.0), [0.0, 0.0], 2.0).unwrap();
        assert!((b.length - 8.0).abs() < 1e-12);
        assert!((b.width - 4.0).abs() < 1e-12);
        assert!(b.yaw.abs() < 1e-12);
    }

    #[test]
    fn isotropic_extent_has_zero_yaw() {
        let b = extent_matrix_to_box(&Mat2::identity(), [1.0, 2.0], 2.0).unwrap();
        assert_eq!(b.yaw, 0.0);
        assert_eq!((b.cx, b.cy), (1.0, 2.0));
    }

    #[test]
    fn rotated_extent_recovers_angle() {
        for &theta in &[0.3, 1.2, -0.9, 2.5, -2.8] {
            let (s, c) = f64::sin_cos(theta);
            let r = Mat2::new(c, -s, s, c);
            let x = r * Mat2::new(4.0, 0.0, 0.0, 1.0) * r.transpose();
            let b = extent_matrix_to_box(&x, [0.0, 0.0], 2.0).unwrap();
            let diff = (b.yaw - theta).rem_euclid(PI);
            assert!(diff < 1e-9 || PI - diff < 1e-9, "theta {theta} yaw {}", b.yaw);
        }
    }

    #[test]
    fn degenerate_extent_rejected() {
        assert_eq!(
            extent_matrix_to_box(&Mat2::new(1.0, 0.0, 0.0, 0.0), [0.0, 0.0], 2.0),
            Err(FilterError::DegenerateExtent)
        );
    }

    #[test]
    fn classification_table() {
        let t = default_table();
        assert_eq!(heuristic_classify(&Box3D::bev(0.0, 0.0, 0.7, 0.6, 0.0), &t), ClassLabel::Pedestrian);
        assert_eq!(heuristic_classify(&Box3D::bev(0.0, 0.0, 4.5, 1.8, 0.0), &t), ClassLabel::Car);
        assert_eq!(heuristic_classify(&Box3D::bev(0.0, 0.0, 9.0, 3.5, 0.0), &t), ClassLabel::Other);
        assert_eq!(heuristic_classify(&Box3D::bev(0.0, 0.0, 1.8, 0.7, 0.0), &t), ClassLabel::Cyclist);
    }

    #[test]
    fn nms_cases() {
        let a = Box3D::bev(0.0, 0.0, 4.0, 2.0, 0.0);
        let out = nms_boxes(vec![rec(2, a, 0.8), rec(1, a, 0.9)], 0.5);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].track_id, 1);

        let far = Box3D::bev(10.0, 0.0, 4.0, 2.0, 0.0);
        assert_eq!(nms_boxes(vec![rec(1, a, 0.9), rec(2, far, 0.8)], 0.5).len(), 2);

        // A overlaps B, B overlaps C, A and C disjoint: greedy keeps A and C
        let b = Box3D::bev(0.0, 0.0, 2.0, 2.0, 0.0);
        let boxes = [
            Box3D::bev(-0.6, 0.0, 2.0, 2.0, 0.0),
            b,
            Box3D::bev(1.5, 0.0, 2.0, 2.0, 0.0),
        ];
        assert!(bev_iou(&boxes[0], &boxes[1]) > 0.1);
        assert!(bev_iou(&boxes[1], &boxes[2]) > 0.1);
        assert_eq!(bev_iou(&boxes[0], &boxes[2]), 0.0);
        let out = nms_boxes(
            vec![rec(1, boxes[0], 0.9), rec(2, boxes[1], 0.8), rec(3, boxes[2], 0.7)],
            0.1,
        );
        let ids: Vec<u64> = out.iter().map(|r| r.track_id).collect();
        assert_eq!(ids, vec![1, 3]);
    }

    #[test]
    fn box_extent_roundtrip() {
        let x = Mat2::new(3.0, 0.8, 0.8, 1.2);
        let b = extent_matrix_to_box(&x, [0.0, 0.0], 2.0).unwrap();
        let back = box_to_extent_matrix(&b, 2.0);
        assert!((back - x).abs().max() < 1e-9);
    }
}
