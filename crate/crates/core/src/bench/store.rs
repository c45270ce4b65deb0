//! Persistent best-known weights, keyed by instance id.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MapError, Result};
use crate::model::{Assignment, Family, Instance, InstanceId};

/// Tolerance when checking a certificate against its claimed weight.
const WEIGHT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestKnown {
    pub weight: f64,
    /// Vectors of the certifying assignment, 1-based.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<Vec<usize>>>,
}

/// Smallest weight seen per instance. Updates only ever decrease entries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BestKnownStore {
    entries: BTreeMap<String, BestKnown>,
}

fn random_floor(id: &InstanceId) -> Option<f64> {
    (id.family == Family::Random).then_some(id.n as f64)
}

impl BestKnownStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads a store; a missing file gives an empty store.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Ok(Self::new());
        }
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let store: BestKnownStore =
            serde_json::from_str(text).map_err(|e| MapError::Config(format!("best-known store: {e}")))?;
        for (key, entry) in &store.entries {
            let id = InstanceId::parse(key)?;
            if random_floor(&id).is_some_and(|floor| entry.weight < floor) {
                return Err(MapError::Integrity(format!(
                    "stored weight {} for {key} is below the minimum possible {}",
                    entry.weight, id.n
                )));
            }
        }
        Ok(store)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("plain data serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn get(&self, id: InstanceId) -> Option<f64> {
        self.entries.get(&id.to_string()).map(|e| e.weight)
    }

    pub fn entry(&self, id: InstanceId) -> Option<&BestKnown> {
        self.entries.get(&id.to_string())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Random instances start at their minimum possible weight `n`.
    pub fn seed_random(&mut self, id: InstanceId) {
        if let Some(floor) = random_floor(&id) {
            self.entries
                .entry(id.to_string())
                .or_insert(BestKnown { weight: floor, certificate: None });
        }
    }

    /// Records `weight` for `id` if it beats the stored value. A certificate,
    /// when given, must fit the instance and have exactly that weight.
    /// Returns whether the entry changed.
    pub fn update(&mut self, id: InstanceId, weight: f64, certificate: Option<(&Instance, &Assignment)>) -> Result<bool> {
        if !weight.is_finite() {
            return Err(MapError::Integrity(format!("non-finite weight {weight} for {id}")));
        }
        if let Some(floor) = random_floor(&id) {
            if weight < floor {
                return Err(MapError::Integrity(format!("{id}: weight {weight} is below the minimum possible {floor}")));
            }
        }
        if let Some((inst, a)) = certificate {
            let actual = inst
                .assignment_weight(a)
                .map_err(|e| MapError::Integrity(format!("{id}: certificate does not fit the instance: {e}")))?;
            if (actual - weight).abs() > WEIGHT_EPS * weight.abs().max(1.0) {
                return Err(MapError::Integrity(format!("{id}: certificate weighs {actual}, claimed {weight}")));
            }
        }
        let key = id.to_string();
        if self.entries.get(&key).is_some_and(|e| e.weight <= weight) {
            return Ok(false);
        }
        self.entries.insert(key, BestKnown { weight, certificate: certificate.map(|(_, a)| a.to_one_based()) });
        Ok(true)
    }
}

/// Functional form of [`BestKnownStore::update`].
pub fn update_best_known(
    mut store: BestKnownStore,
    id: InstanceId,
    weight: f64,
    certificate: Option<(&Instance, &Assignment)>,
) -> Result<BestKnownStore> {
    store.update(id, weight, certificate)?;
    Ok(store)
}
