//! Run configuration: a JSON file overlaid by command-line flags.

use std::fmt;
use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sketchseg::augment::AugmentConfig;
use sketchseg::bezier::PerturbParams;
use sketchseg::metrics::{LowessConfig, SizeRangeFilter};
use sketchseg::transport::SinkhornConfig;

use crate::error::{CliError, CliResult};

/// Worker thread count; `auto` lets rayon pick.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ThreadsRepr", into = "ThreadsRepr")]
pub enum Threads {
    #[default]
    Auto,
    Count(NonZeroUsize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ThreadsRepr {
    Count(usize),
    Word(String),
}

impl TryFrom<ThreadsRepr> for Threads {
    type Error = String;

    fn try_from(r: ThreadsRepr) -> Result<Self, String> {
        match r {
            ThreadsRepr::Count(n) => NonZeroUsize::new(n)
                .map(Threads::Count)
                .ok_or_else(|| "threads must be >= 1 or \"auto\"".to_string()),
            ThreadsRepr::Word(w) => w.parse(),
        }
    }
}

impl From<Threads> for ThreadsRepr {
    fn from(t: Threads) -> Self {
        match t {
            Threads::Auto => ThreadsRepr::Word("auto".into()),
            Threads::Count(n) => ThreadsRepr::Count(n.get()),
        }
    }
}

impl FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Threads::Auto);
        }
        s.parse::<NonZeroUsize>()
            .map(Threads::Count)
            .map_err(|_| format!("expected a positive integer or \"auto\", got {s:?}"))
    }
}

impl Threads {
    pub fn count(self) -> usize {
        match self {
            Threads::Auto => 0,
            Threads::Count(n) => n.get(),
        }
    }
}

/// Patch grid `rows x cols`, written as `16x16`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self { rows: 16, cols: 16 }
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected a grid like 16x16, got {s:?}");
        let (r, c) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let rows: usize = r.trim().parse().map_err(|_| bad())?;
        let cols: usize = c.trim().parse().map_err(|_| bad())?;
        if rows == 0 || cols == 0 {
            return Err(bad());
        }
        Ok(Self { rows, cols })
    }
}

impl TryFrom<String> for Grid {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> Self {
        g.to_string()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentSettings {
    pub input: Option<PathBuf>,
    pub variants: usize,
    pub perturb_k: f64,
    pub perturb_c: usize,
    pub block_size: usize,
    pub thickness: usize,
    pub binarize_threshold: u8,
    pub min_component_pixels: usize,
    pub sample_interval: usize,
}

impl Default for AugmentSettings {
    fn default() -> Self {
        let core = AugmentConfig::default();
        Self {
            input: None,
            variants: core.perturb.num_variants,
            perturb_k: core.perturb.k_step,
            perturb_c: core.perturb.c,
            block_size: core.block_size,
            thickness: core.render_thickness,
            binarize_threshold: core.binarize_threshold,
            min_component_pixels: core.min_component_pixels,
            sample_interval: core.sample_interval,
        }
    }
}

impl AugmentSettings {
    /// Library configuration for one input file, whose stream seed is `seed`.
    pub fn to_core(&self, seed: u64) -> AugmentConfig {
        AugmentConfig {
            binarize_threshold: self.binarize_threshold,
            block_size: self.block_size,
            min_component_pixels: self.min_component_pixels,
            sample_interval: self.sample_interval,
            render_thickness: self.thickness,
            perturb: PerturbParams {
                c: self.perturb_c,
                k_step: self.perturb_k,
                num_variants: self.variants,
                seed,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportSettings {
    pub image: Option<PathBuf>,
    pub sketches: Vec<PathBuf>,
    pub grid: Grid,
    pub dim: usize,
    pub epsilon: f64,
    pub max_iter: usize,
    pub tolerance: f64,
}

impl Default for TransportSettings {
    fn default() -> Self {
        let s = SinkhornConfig::default();
        Self {
            image: None,
            sketches: Vec::new(),
            grid: Grid::default(),
            dim: 4,
            epsilon: s.epsilon,
            max_iter: s.max_iter,
            tolerance: s.tolerance,
        }
    }
}

impl TransportSettings {
    pub fn sinkhorn(&self) -> SinkhornConfig {
        SinkhornConfig {
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            tolerance: self.tolerance,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub pred: Option<PathBuf>,
    pub gt: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaleSettings {
    pub csv: Option<PathBuf>,
    pub frac: f64,
    pub bin_size: u64,
    pub samples_per_bin: usize,
    pub size_filter: SizeRangeFilter,
}

impl Default for ScaleSettings {
    fn default() -> Self {
        let l = LowessConfig::default();
        Self {
            csv: None,
            frac: l.frac,
            bin_size: l.bin_size,
            samples_per_bin: l.samples_per_bin,
            size_filter: SizeRangeFilter::default(),
        }
    }
}

impl ScaleSettings {
    pub fn lowess(&self) -> LowessConfig {
        LowessConfig {
            frac: self.frac,
            bin_size: self.bin_size,
            samples_per_bin: self.samples_per_bin,
        }
    }
}

/// Everything a run needs. Sections not used by the chosen command are ignored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: Threads,
    pub out: Option<PathBuf>,
    pub augment: AugmentSettings,
    pub transport: TransportSettings,
    pub eval: EvalSettings,
    pub scale_analysis: ScaleSettings,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn out_dir(&self) -> CliResult<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Config("an output directory is required (--out)".into()))
    }
}
