use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::descriptors::{DescriptorKind, Exclusion};
use crate::engine::Tuple;
use crate::table::{ColumnData, ColumnKind, Dataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub tuple: Tuple,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exclusion: Option<Exclusion>,
}

/// Every tuple a descriptor is defined on, in lexicographic order, with
/// column-level degeneracy already flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSet {
    pub descriptor: DescriptorKind,
    pub instances: Vec<Instance>,
}

impl InstanceSet {
    pub fn admissible(&self) -> impl Iterator<Item = &Tuple> {
        self.instances.iter().filter(|i| i.exclusion.is_none()).map(|i| &i.tuple)
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// Columns a descriptor ranges over: numeric columns, or for frequency
/// heterogeneity categorical and integer-valued numeric columns.
pub(crate) fn domain(dataset: &Dataset, descriptor: DescriptorKind) -> Vec<usize> {
    dataset
        .columns()
        .iter()
        .filter(|c| match descriptor {
            DescriptorKind::HeterogeneousFrequencies => {
                c.meta.kind == ColumnKind::Categorical || c.meta.integer_valued
            }
            _ => c.meta.kind == ColumnKind::Numeric,
        })
        .map(|c| c.meta.index)
        .collect()
}

struct Profile {
    present: usize,
    constant: bool,
    distinct_at_most_one: bool,
}

fn profile(dataset: &Dataset, index: usize) -> Profile {
    let col = &dataset.columns()[index];
    let present = dataset.n() - col.meta.missing_count;
    match &col.data {
        ColumnData::Numeric(c) => {
            let mut it = c.iter().flatten();
            let constant = match it.next() {
                Some(first) => it.all(|v| v == first),
                None => true,
            };
            Profile { present, constant, distinct_at_most_one: constant }
        }
        ColumnData::Categorical(c) => {
            let single = c.distinct_count() <= 1;
            Profile { present, constant: single, distinct_at_most_one: single }
        }
    }
}

fn unary_exclusion(descriptor: DescriptorKind, p: &Profile) -> Option<Exclusion> {
    match descriptor {
        DescriptorKind::Dispersion if p.present < 2 => Some(Exclusion::TooFewValues),
        DescriptorKind::Skew | DescriptorKind::HeavyTails if p.present == 0 => Some(Exclusion::TooFewValues),
        DescriptorKind::Skew | DescriptorKind::HeavyTails if p.constant => Some(Exclusion::Constant),
        DescriptorKind::Outliers if p.present < 4 => Some(Exclusion::TooFewValues),
        DescriptorKind::HeterogeneousFrequencies if p.distinct_at_most_one => Some(Exclusion::SingleCategory),
        _ => None,
    }
}

/// Deterministic instance enumeration with column-level exclusions. Pair
/// exclusions that depend on the joint presence pattern surface when the
/// metric is evaluated.
pub fn enumerate_instances(dataset: &Dataset, descriptor: DescriptorKind) -> InstanceSet {
    let columns = domain(dataset, descriptor);
    let profiles: Vec<Profile> = columns.iter().map(|&i| profile(dataset, i)).collect();
    let mut instances = Vec::new();
    if descriptor.arity() == 1 {
        for (&i, p) in columns.iter().zip(&profiles) {
            instances.push(Instance { tuple: Tuple::unary(i), exclusion: unary_exclusion(descriptor, p) });
        }
    } else {
        for a in 0..columns.len() {
            for b in a + 1..columns.len() {
                let (pa, pb) = (&profiles[a], &profiles[b]);
                let exclusion = if pa.present < 3 || pb.present < 3 {
                    Some(Exclusion::TooFewValues)
                } else if pa.constant || pb.constant {
                    Some(Exclusion::Constant)
                } else {
                    None
                };
                instances.push(Instance { tuple: Tuple::pair(columns[a], columns[b]), exclusion });
            }
        }
    }
    InstanceSet { descriptor, instances }
}
