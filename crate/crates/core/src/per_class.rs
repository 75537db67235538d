use serde::{Deserialize, Serialize};

use crate::types::ClassLabel;

/// One value per object class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerClass<T> {
    pub car: T,
    pub pedestrian: T,
    pub cyclist: T,
    pub other: T,
}

impl<T: Copy> PerClass<T> {
    pub fn uniform(value: T) -> Self {
        Self {
            car: value,
            pedestrian: value,
            cyclist: value,
            other: value,
        }
    }
}

impl<T> PerClass<T> {
    pub fn get(&self, class: ClassLabel) -> &T {
        match class {
            ClassLabel::Car => &self.car,
            ClassLabel::Pedestrian => &self.pedestrian,
            ClassLabel::Cyclist => &self.cyclist,
            ClassLabel::Other => &self.other,
        }
    }

    pub fn get_mut(&mut self, class: ClassLabel) -> &mut T {
        match class {
            ClassLabel::Car => &mut self.car,
            ClassLabel::Pedestrian => &mut self.pedestrian,
            ClassLabel::Cyclist => &mut self.cyclist,
            ClassLabel::Other => &mut self.other,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClassLabel, &T)> {
        ClassLabel::ALL.into_iter().map(move |c| (c, self.get(c)))
    }
}

impl<T: Default> Default for PerClass<T> {
    fn default() -> Self {
        Self {
            car: T::default(),
            pedestrian: T::default(),
            cyclist: T::default(),
            other: T::default(),
        }
    }
}
