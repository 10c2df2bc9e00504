//! The corrector interface and a name-keyed registry of implementations.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::baselines::{DictCorrector, DummyCorrector, FrequencyDictionary, NgramCorrector, NgramModel};
use crate::error::{Error, Result};

/// A spelling corrector operating on whole sentences.
pub trait Corrector {
    fn name(&self) -> &str;

    fn correct(&self, text: &str) -> String;

    /// Whether the system can repair syllable-level corruption at all.
    fn corrects_syllable_level(&self) -> bool {
        true
    }
}

/// Artifact locations a corrector factory may need.
#[derive(Debug, Clone, Default)]
pub struct SystemArgs {
    pub dict: Option<PathBuf>,
    pub ngram: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

impl SystemArgs {
    fn require(path: &Option<PathBuf>, flag: &str, system: &str) -> Result<PathBuf> {
        path.clone()
            .ok_or_else(|| Error::Config(format!("system `{system}` requires {flag}")))
    }

    pub fn dict_path(&self, system: &str) -> Result<PathBuf> {
        Self::require(&self.dict, "--dict", system)
    }

    pub fn ngram_path(&self, system: &str) -> Result<PathBuf> {
        Self::require(&self.ngram, "--ngram", system)
    }

    pub fn model_path(&self, system: &str) -> Result<PathBuf> {
        Self::require(&self.model, "--model", system)
    }
}

pub type CorrectorFactory = Box<dyn Fn(&SystemArgs) -> Result<Box<dyn Corrector>> + Send + Sync>;

pub struct CorrectorRegistry {
    factories: BTreeMap<String, CorrectorFactory>,
}

impl Default for CorrectorRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl CorrectorRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// `dummy`, `dict` and `ngram`.
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("dummy", |_| Ok(Box::new(DummyCorrector)));
        r.register("dict", |args| {
            let dict = FrequencyDictionary::load(&args.dict_path("dict")?)?;
            Ok(Box::new(DictCorrector::new(dict)))
        });
        r.register("ngram", |args| {
            let dict = FrequencyDictionary::load(&args.dict_path("ngram")?)?;
            let model = NgramModel::load(&args.ngram_path("ngram")?)?;
            Ok(Box::new(NgramCorrector::new(model, dict)))
        });
        r
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&SystemArgs) -> Result<Box<dyn Corrector>> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn build(&self, name: &str, args: &SystemArgs) -> Result<Box<dyn Corrector>> {
        let factory = self.factories.get(name).ok_or_else(|| Error::Unknown {
            kind: "system",
            name: name.to_string(),
        })?;
        factory(args)
    }
}
