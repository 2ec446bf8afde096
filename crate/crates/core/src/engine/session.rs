use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::descriptors::DescriptorKind;
use crate::engine::{EngineError, Explorer, QuerySettings};
use crate::table::DatasetId;

pub const SESSION_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bookmark {
    pub id: String,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
}

/// Saved exploration state: bookmarks, focus and per-descriptor settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionState {
    pub version: u32,
    pub dataset: DatasetId,
    /// In the order they were added; ids are unique.
    #[serde(default)]
    pub bookmarks: Vec<Bookmark>,
    #[serde(default)]
    pub focus: Option<String>,
    #[serde(default)]
    pub settings: BTreeMap<DescriptorKind, QuerySettings>,
}

impl SessionState {
    pub fn new(dataset: DatasetId) -> Self {
        Self { version: SESSION_VERSION, dataset, bookmarks: Vec::new(), focus: None, settings: BTreeMap::new() }
    }

    fn check_dataset(&self, explorer: &Explorer<'_>) -> Result<(), EngineError> {
        if &self.dataset != explorer.dataset().id() {
            return Err(EngineError::SessionDataset(self.dataset.to_string()));
        }
        Ok(())
    }

    pub fn is_bookmarked(&self, id: &str) -> bool {
        self.bookmarks.iter().any(|b| b.id == id)
    }

    /// Adds a bookmark; returns false if it was already present.
    pub fn bookmark(&mut self, explorer: &Explorer<'_>, id: &str, created_at: u64) -> Result<bool, EngineError> {
        self.check_dataset(explorer)?;
        explorer.resolve(id)?;
        if self.is_bookmarked(id) {
            return Ok(false);
        }
        self.bookmarks.push(Bookmark { id: String::from(id), created_at });
        Ok(true)
    }

    /// Removes a bookmark; returns false if it was not present.
    pub fn unbookmark(&mut self, id: &str) -> bool {
        let before = self.bookmarks.len();
        self.bookmarks.retain(|b| b.id != id);
        self.bookmarks.len() != before
    }

    pub fn set_focus(&mut self, explorer: &Explorer<'_>, id: Option<&str>) -> Result<(), EngineError> {
        self.check_dataset(explorer)?;
        if let Some(id) = id {
            explorer.resolve(id)?;
        }
        self.focus = id.map(String::from);
        Ok(())
    }

    pub fn settings_for(&self, descriptor: DescriptorKind) -> QuerySettings {
        self.settings.get(&descriptor).copied().unwrap_or_default()
    }

    pub fn set_settings(&mut self, descriptor: DescriptorKind, settings: QuerySettings) -> Result<(), EngineError> {
        settings.validate(descriptor)?;
        self.settings.insert(descriptor, settings);
        Ok(())
    }

    /// Checks a session received from outside against the dataset.
    pub fn validate(&self, explorer: &Explorer<'_>) -> Result<(), EngineError> {
        if self.version != SESSION_VERSION {
            return Err(EngineError::SessionVersion(self.version));
        }
        self.check_dataset(explorer)?;
        for (i, b) in self.bookmarks.iter().enumerate() {
            explorer.resolve(&b.id)?;
            if self.bookmarks[..i].iter().any(|o| o.id == b.id) {
                return Err(EngineError::InvalidQuery(alloc::format!("duplicate bookmark {}", b.id)));
            }
        }
        if let Some(f) = &self.focus {
            explorer.resolve(f)?;
        }
        for (d, s) in &self.settings {
            s.validate(*d)?;
        }
        Ok(())
    }
}
