//! Name-keyed registries of interchangeable strategies.

use std::sync::Arc;

use crate::error::{Error, Result};

pub struct Registry<T: ?Sized> {
    what: &'static str,
    entries: Vec<(&'static str, Arc<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(what: &'static str) -> Self {
        Registry {
            what,
            entries: Vec::new(),
        }
    }

    /// Adds or replaces the entry under `name`.
    pub fn register(&mut self, name: &'static str, item: Arc<T>) {
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = item,
            None => self.entries.push((name, item)),
        }
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, item)| Arc::clone(item))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown {} `{name}` (available: {})",
                    self.what,
                    self.names().join(", ")
                ))
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }
}
