//! Serializable summaries of constructed maps and resonance sets.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::Serialize;

use super::{EquivariantMap, MapKind, Resonance};
use crate::ring::{render_rational, Field, SingularKind};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceEntry {
    pub value: String,
    pub kind: SingularKind,
    pub bidegrees: Vec<[u32; 2]>,
}

/// Sorted resonance set; each value keeps its strongest failure kind.
#[derive(Debug, Clone, Serialize)]
pub struct ResonanceReport {
    pub schema_version: u32,
    pub kind: MapKind,
    pub signature: [usize; 2],
    pub max_k: u32,
    pub max_kappa: usize,
    pub resonances: Vec<ResonanceEntry>,
    #[serde(skip)]
    pub values: Vec<(BigRational, SingularKind)>,
}

impl ResonanceReport {
    pub fn from_map<F: Field>(map: &EquivariantMap<F>) -> Self {
        let mut by_value: BTreeMap<BigRational, (SingularKind, Vec<[u32; 2]>)> = BTreeMap::new();
        for Resonance { value, kind, bidegree } in &map.singular {
            let e = by_value.entry(value.clone()).or_insert((*kind, Vec::new()));
            e.0 = e.0.min(*kind);
            e.1.push([bidegree.0, bidegree.1 as u32]);
        }
        let values: Vec<(BigRational, SingularKind)> = by_value.iter().map(|(v, (k, _))| (v.clone(), *k)).collect();
        let resonances = by_value
            .into_iter()
            .map(|(v, (kind, bidegrees))| ResonanceEntry { value: render_rational(&v), kind, bidegrees })
            .collect();
        ResonanceReport {
            schema_version: SCHEMA_VERSION,
            kind: map.kind,
            signature: [map.sig.p, map.sig.q],
            max_k: map.bound.max_k,
            max_kappa: map.bound.max_kappa,
            resonances,
            values,
        }
    }

    /// Values where existence or uniqueness fails at some bidegree.
    pub fn resonant_values(&self) -> Vec<BigRational> {
        self.values
            .iter()
            .filter(|(_, k)| *k != SingularKind::DataPole)
            .map(|(v, _)| v.clone())
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    pub bidegree: [u32; 2],
    pub corrections: Vec<(String, String)>,
}

/// Coefficients of a constructed map, rendered with `var` as the parameter.
#[derive(Debug, Clone, Serialize)]
pub struct MapReport {
    pub schema_version: u32,
    pub kind: MapKind,
    pub signature: [usize; 2],
    pub components: Vec<ComponentReport>,
    pub singular: Vec<ResonanceEntry>,
}

impl MapReport {
    pub fn new<F: Field>(map: &EquivariantMap<F>, var: &str) -> Self {
        let components = map
            .components
            .iter()
            .map(|(b, c)| ComponentReport {
                bidegree: [b.0, b.1 as u32],
                corrections: c
                    .ops
                    .iter()
                    .zip(&c.coeffs)
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(o, v)| (o.to_string(), v.render(var)))
                    .collect(),
            })
            .collect();
        MapReport {
            schema_version: SCHEMA_VERSION,
            kind: map.kind,
            signature: [map.sig.p, map.sig.q],
            components,
            singular: ResonanceReport::from_map(map).resonances,
        }
    }
}
