//! Extended-object tracking with a GGIW Poisson multi-Bernoulli mixture.

pub mod extract;
pub mod ggiw;
pub mod pmbm;

use serde::{Deserialize, Serialize};

use crate::error::FilterError;
use crate::linalg::{chi2_2dof_quantile, is_spd2, Mat2};
use crate::per_class::PerClass;
use crate::types::ClassLabel;

pub use extract::{extent_matrix_to_box, extent_to_box, heuristic_classify, nms_boxes, SizeInterval, SizeRule, SizeTable};
pub use ggiw::{BirthPrior, GammaRate, GgiwComponent, InverseWishartExtent, MIN_EXTENT_DOF};
pub use pmbm::{
    eot_extract, eot_predict, eot_predicted_detection_prob, eot_update_with_partitions, GlobalHypothesis,
    LocalHypothesis, LocalOrigin, PartitionedScan, PmbmDensity, Track,
};

/// Gamma rate and expected extent of a newborn object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GgiwTemplate {
    pub gamma_shape: f64,
    pub gamma_rate: f64,
    pub extent_dof: f64,
    /// Expected extent matrix (m^2).
    pub extent: [[f64; 2]; 2],
}

impl GgiwTemplate {
    pub fn extent_matrix(&self) -> Mat2 {
        let e = &self.extent;
        Mat2::new(e[0][0], e[0][1], e[1][0], e[1][1])
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.gamma_shape > 0.0 && self.gamma_rate > 0.0) {
            return Err("gamma shape and rate must be positive".into());
        }
        if !(self.extent_dof > MIN_EXTENT_DOF) {
            return Err(format!("extent_dof must exceed {MIN_EXTENT_DOF}"));
        }
        let x = self.extent_matrix();
        if (x[(0, 1)] - x[(1, 0)]).abs() > 1e-12 || !is_spd2(&x) {
            return Err("extent must be symmetric positive definite".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EotBirth {
    /// Undetected-object birth intensity per m^2 per frame.
    pub intensity: f64,
    /// Undetected-object intensity per m^2 before the first frame.
    pub initial_intensity: f64,
    pub velocity_std: f64,
    pub template: GgiwTemplate,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EotClassOverride {
    pub detection_prob: Option<f64>,
    pub clutter_intensity: Option<f64>,
    pub template: Option<GgiwTemplate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EotConfig {
    pub survival_prob: f64,
    /// Detection probability of a measurable object.
    pub detection_prob: f64,
    /// Clutter point intensity per m^2.
    pub clutter_intensity: f64,
    pub process_noise: f64,
    /// Gamma forgetting factor, > 1.
    pub forgetting_factor: f64,
    /// Extent decay time constant (s).
    pub extent_time_constant: f64,
    /// Gate probability for cluster centroids.
    pub gate_prob: f64,
    pub max_hypotheses: usize,
    pub hypothesis_prune_weight: f64,
    pub existence_prune_threshold: f64,
    pub existence_extract_threshold: f64,
    pub nms_iou_threshold: f64,
    /// Half box side in extent standard deviations.
    pub axis_scale: f64,
    pub birth: EotBirth,
    pub class_overrides: PerClass<EotClassOverride>,
    /// Box height reported per class (m); boxes rest on the ground plane.
    pub box_height: PerClass<f64>,
    pub size_table: SizeTable,
}

impl Default for EotConfig {
    fn default() -> Self {
        crate::config::PipelineConfig::default().eot
    }
}

fn is_prob(p: f64) -> bool {
    p > 0.0 && p <= 1.0
}

impl EotConfig {
    pub fn validate(&self) -> Result<(), FilterError> {
        let bad = |msg: String| Err(FilterError::InvalidConfig(format!("eot: {msg}")));
        if !is_prob(self.survival_prob) || !is_prob(self.detection_prob) {
            return bad("survival_prob and detection_prob must be in (0, 1]".into());
        }
        if !(self.clutter_intensity > 0.0) {
            return bad("clutter_intensity must be positive".into());
        }
        if !(self.process_noise >= 0.0) {
            return bad("process_noise must be non-negative".into());
        }
        if !(self.forgetting_factor > 1.0) {
            return bad("forgetting_factor must exceed 1".into());
        }
        if !(self.extent_time_constant > 0.0) {
            return bad("extent_time_constant must be positive".into());
        }
        if !(self.gate_prob > 0.0 && self.gate_prob < 1.0) {
            return bad("gate_prob must be in (0, 1)".into());
        }
        if self.max_hypotheses == 0 {
            return bad("max_hypotheses must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.hypothesis_prune_weight) {
            return bad("hypothesis_prune_weight must be in [0, 1)".into());
        }
        if !(0.0..=1.0).contains(&self.existence_prune_threshold)
            || !(0.0..=1.0).contains(&self.existence_extract_threshold)
            || self.existence_prune_threshold > self.existence_extract_threshold
        {
            return bad("existence thresholds must satisfy 0 <= prune <= extract <= 1".into());
        }
        if !(self.nms_iou_threshold > 0.0 && self.nms_iou_threshold < 1.0) {
            return bad("nms_iou_threshold must be in (0, 1)".into());
        }
        if !(self.axis_scale > 0.0) {
            return bad("axis_scale must be positive".into());
        }
        if !(self.birth.intensity >= 0.0 && self.birth.initial_intensity >= 0.0 && self.birth.velocity_std > 0.0) {
            return bad("birth parameters out of range".into());
        }
        for class in ClassLabel::ALL {
            if let Err(e) = self.template(Some(class)).validate() {
                return bad(format!("{class} birth template: {e}"));
            }
            if !is_prob(self.detection_prob(Some(class))) || !(self.clutter_intensity(Some(class)) > 0.0) {
                return bad(format!("{class} override out of range"));
            }
            if !(*self.box_height.get(class) > 0.0) {
                return bad(format!("{class} box height must be positive"));
            }
        }
        Ok(())
    }

    pub fn detection_prob(&self, class: Option<ClassLabel>) -> f64 {
        class
            .and_then(|c| self.class_overrides.get(c).detection_prob)
            .unwrap_or(self.detection_prob)
    }

    pub fn clutter_intensity(&self, class: Option<ClassLabel>) -> f64 {
        class
            .and_then(|c| self.class_overrides.get(c).clutter_intensity)
            .unwrap_or(self.clutter_intensity)
    }

    pub fn template(&self, class: Option<ClassLabel>) -> GgiwTemplate {
        class
            .and_then(|c| self.class_overrides.get(c).template)
            .unwrap_or(self.birth.template)
    }

    pub fn birth_prior(&self, class: Option<ClassLabel>) -> BirthPrior {
        let t = self.template(class);
        BirthPrior {
            rate: GammaRate {
                shape: t.gamma_shape,
                rate: t.gamma_rate,
            },
            extent: InverseWishartExtent::with_mean(t.extent_dof, &t.extent_matrix()),
            velocity_std: self.birth.velocity_std,
        }
    }

    pub fn gate_threshold(&self) -> f64 {
        chi2_2dof_quantile(self.gate_prob)
    }
}
