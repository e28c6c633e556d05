mod agree;
mod aggregate;
mod evaluate;
mod fixture;
mod plot;
mod sample;
mod simulate;
mod weigh;

use std::path::{Path, PathBuf};

use tg_core::annotation::{validate_all, MediumCategories};
use tg_core::corpus_io::{self, DateWindow};
use tg_core::{Annotation, RawAnnotation, TweetRecord, VolumeTable, WeightAssignment};

use crate::config::{config_hash, LoadedConfig, RunConfig};
use crate::error::{CliError, CliResult};
use crate::run::{Recorder, RunInfo};

pub use agree::agree;
pub use aggregate::aggregate;
pub use evaluate::evaluate;
pub use fixture::fixture;
pub use plot::{plot, PlotKind};
pub use sample::sample;
pub use simulate::{simulate, SimKind};
pub use weigh::weigh;

pub struct Context {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub config_hash: String,
}

impl Context {
    pub fn new(loaded: LoadedConfig, seed: Option<u64>, out_dir: Option<PathBuf>) -> Self {
        let config_hash = config_hash(&loaded.document, seed);
        let out_dir = out_dir.unwrap_or_else(|| {
            loaded
                .base_dir
                .join(loaded.config.paths.out_dir.clone().unwrap_or_else(|| PathBuf::from("out")))
        });
        Context {
            config: loaded.config,
            base_dir: loaded.base_dir,
            out_dir,
            seed,
            config_hash,
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    /// A configured input path, or a usage error naming the key.
    pub fn input(&self, key: &str, p: &Option<PathBuf>) -> CliResult<PathBuf> {
        p.as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| CliError::Usage(format!("config key paths.{key} is required for this command")))
    }

    /// A configured path, or the default location of an earlier step's output.
    pub fn input_or_output(&self, p: &Option<PathBuf>, step: &str, name: &str) -> PathBuf {
        p.as_deref()
            .map(|p| self.resolve(p))
            .unwrap_or_else(|| self.out_dir.join(step).join(name))
    }

    pub fn require_seed(&self, command: &str) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| CliError::Usage(format!("missing required flag --seed: `{command}` is stochastic and needs a seed")))
    }

    pub fn recorder(&self, command: &str) -> Recorder {
        Recorder::new(
            self.out_dir.join(command),
            RunInfo {
                command: command.to_string(),
                config_hash: self.config_hash.clone(),
                seed: self.seed,
            },
        )
    }

    pub fn volumes(&self) -> CliResult<VolumeTable> {
        Ok(corpus_io::load_volumes(&self.input("volumes", &self.config.paths.volumes)?)?)
    }

    /// The campaign window: configured, or spanning the volume table.
    pub fn window(&self, volumes: &VolumeTable) -> CliResult<DateWindow> {
        Ok(match self.config.window {
            Some(w) => DateWindow::new(w.start, w.end)?,
            None => {
                let mut days = volumes.iter().map(|(d, _)| d);
                let first = days.next().expect("volume table is never empty");
                DateWindow::new(first, days.last().unwrap_or(first))?
            }
        })
    }

    pub fn corpus(&self) -> CliResult<(Vec<TweetRecord>, VolumeTable, DateWindow)> {
        let volumes = self.volumes()?;
        let window = self.window(&volumes)?;
        let c = corpus_io::load_tweets(&self.input("corpus", &self.config.paths.corpus)?, window)?;
        Ok((c, volumes, window))
    }

    pub fn raw_annotations(&self) -> CliResult<Vec<RawAnnotation>> {
        Ok(corpus_io::load_annotations(&self.input("annotations", &self.config.paths.annotations)?)?)
    }

    pub fn media(&self) -> CliResult<MediumCategories> {
        Ok(MediumCategories::new(self.config.medium_categories.iter().cloned())?)
    }

    pub fn annotations(&self) -> CliResult<Vec<Annotation>> {
        Ok(validate_all(&self.raw_annotations()?, &self.media()?)?)
    }

    pub fn weights_path(&self) -> PathBuf {
        self.input_or_output(&self.config.paths.weights, "weigh", "weights.csv")
    }

    pub fn load_weights(&self) -> CliResult<WeightAssignment> {
        Ok(tg_core::weights::load_weights(&self.weights_path())?)
    }
}
