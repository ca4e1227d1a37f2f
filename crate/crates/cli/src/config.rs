//! The run configuration file. Relative paths resolve against the directory holding the
//! file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toxiscope::graph::{GeodesicMode, RelationKind};
use toxiscope::topics::TopicConfig;
use toxiscope::toxicity::ToxicityConfig;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderChoice {
    #[default]
    Stub,
    Remote,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToxicitySection {
    pub provider: ProviderChoice,
    #[serde(flatten)]
    pub client: ToxicityConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub relations: Vec<RelationKind>,
    pub top: usize,
    pub geodesics: GeodesicMode,
}

impl Default for NetworkSection {
    fn default() -> Self {
        NetworkSection {
            relations: RelationKind::ALL.to_vec(),
            top: 30,
            geodesics: GeodesicMode::Undirected,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrendsSection {
    pub hashtags: usize,
    pub peaks: usize,
}

impl Default for TrendsSection {
    fn default() -> Self {
        TrendsSection {
            hashtags: 20,
            peaks: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub toxicity: ToxicitySection,
    #[serde(default)]
    pub topics: TopicConfig,
    pub category_map: PathBuf,
    #[serde(default)]
    pub profiles: Option<PathBuf>,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub trends: TrendsSection,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("invalid config {}: {e}", path.display())))?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn input_path(&self) -> PathBuf {
        self.resolve(&self.input)
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn category_map_path(&self) -> PathBuf {
        self.resolve(&self.category_map)
    }

    pub fn profiles_path(&self) -> Option<PathBuf> {
        self.profiles.as_deref().map(|p| self.resolve(p))
    }

    /// Checks values and that every referenced input exists, before any work starts.
    pub fn validate(&self) -> Result<(), CliError> {
        self.toxicity
            .client
            .validate()
            .map_err(CliError::from_core)?;
        self.topics.validate().map_err(CliError::from_core)?;
        if self.network.relations.is_empty() {
            return Err(CliError::input("network.relations is empty"));
        }
        let mut files = vec![
            ("input", self.input_path()),
            ("category_map", self.category_map_path()),
        ];
        files.extend(self.profiles_path().map(|p| ("profiles", p)));
        for (what, p) in files {
            if !p.is_file() {
                return Err(CliError::input(format!(
                    "{what} {} does not exist",
                    p.display()
                )));
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form, with the output directory left out so the
    /// same run can target any location.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("output_dir");
        }
        hash_value(&value)
    }
}

/// Short hex digest identifying a parameter set.
pub fn hash_value(value: &serde_json::Value) -> String {
    let digest = Sha256::digest(value.to_string().as_bytes());
    hex::encode(&digest[..8])
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}
