use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Grid, RunConfig, Threads};

#[derive(Debug, Parser)]
#[command(name = "sketchseg", version, about = "Sketch augmentation, prompt transport and segmentation evaluation")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads, or `auto`.
    #[arg(long, global = true)]
    pub threads: Option<Threads>,

    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write perturbed variants of every sketch PNG in a directory.
    Augment(AugmentArgs),
    /// Score an image against sketch prompts through entropic transport.
    Transport(TransportArgs),
    /// Compare prediction masks with ground truth masks by filename.
    Eval(EvalArgs),
    /// Fit IoU against ground-truth mask size from an eval CSV.
    ScaleAnalysis(ScaleArgs),
}

#[derive(Debug, Default, Args)]
pub struct AugmentArgs {
    /// Directory of sketch PNGs.
    #[arg(long, value_name = "DIR")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub variants: Option<usize>,
    #[arg(long)]
    pub perturb_k: Option<f64>,
    #[arg(long)]
    pub perturb_c: Option<usize>,
    #[arg(long)]
    pub block_size: Option<usize>,
    #[arg(long)]
    pub thickness: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct TransportArgs {
    #[arg(long, value_name = "PNG")]
    pub image: Option<PathBuf>,
    /// Sketch prompt PNG; repeat for several prompts.
    #[arg(long = "sketch", value_name = "PNG")]
    pub sketches: Vec<PathBuf>,
    /// Patch grid, e.g. `16x16`.
    #[arg(long)]
    pub grid: Option<Grid>,
    /// Patch feature dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct EvalArgs {
    /// Directory of prediction PNGs.
    #[arg(long, value_name = "DIR")]
    pub pred: Option<PathBuf>,
    /// Directory of ground-truth PNGs.
    #[arg(long, value_name = "DIR")]
    pub gt: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct ScaleArgs {
    /// Per-sample CSV written by `eval`.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub frac: Option<f64>,
    #[arg(long)]
    pub bin_size: Option<u64>,
    #[arg(long)]
    pub samples_per_bin: Option<usize>,
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

impl CommonArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.threads, self.threads);
        if self.out.is_some() {
            cfg.out.clone_from(&self.out);
        }
    }
}

impl Command {
    /// Overlays the command's flags on `cfg`.
    pub fn apply(&self, cfg: &mut RunConfig) {
        match self {
            Command::Augment(a) => {
                let s = &mut cfg.augment;
                if a.input.is_some() {
                    s.input.clone_from(&a.input);
                }
                set(&mut s.variants, a.variants);
                set(&mut s.perturb_k, a.perturb_k);
                set(&mut s.perturb_c, a.perturb_c);
                set(&mut s.block_size, a.block_size);
                set(&mut s.thickness, a.thickness);
            }
            Command::Transport(a) => {
                let s = &mut cfg.transport;
                if a.image.is_some() {
                    s.image.clone_from(&a.image);
                }
                if !a.sketches.is_empty() {
                    s.sketches.clone_from(&a.sketches);
                }
                set(&mut s.grid, a.grid);
                set(&mut s.dim, a.dim);
                set(&mut s.epsilon, a.epsilon);
                set(&mut s.max_iter, a.max_iter);
                set(&mut s.tolerance, a.tolerance);
            }
            Command::Eval(a) => {
                if a.pred.is_some() {
                    cfg.eval.pred.clone_from(&a.pred);
                }
                if a.gt.is_some() {
                    cfg.eval.gt.clone_from(&a.gt);
                }
            }
            Command::ScaleAnalysis(a) => {
                let s = &mut cfg.scale_analysis;
                if a.csv.is_some() {
                    s.csv.clone_from(&a.csv);
                }
                set(&mut s.frac, a.frac);
                set(&mut s.bin_size, a.bin_size);
                set(&mut s.samples_per_bin, a.samples_per_bin);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_the_file() {
        let cli = Cli::try_parse_from([
            "sketchseg",
            "transport",
            "--seed",
            "3",
            "--epsilon",
            "0.2",
            "--sketch",
            "a.png",
            "--sketch",
            "b.png",
            "--grid",
            "8x4",
        ])
        .unwrap();
        let mut cfg: RunConfig = serde_json::from_str(r#"{"seed": 1, "transport": {"epsilon": 0.5, "max_iter": 7}}"#).unwrap();
        cli.common.apply(&mut cfg);
        cli.command.apply(&mut cfg);
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.transport.epsilon, 0.2);
        assert_eq!(cfg.transport.max_iter, 7);
        assert_eq!(cfg.transport.sketches.len(), 2);
        assert_eq!(cfg.transport.grid, Grid { rows: 8, cols: 4 });
    }

    #[test]
    fn global_flags_work_before_the_subcommand() {
        let cli = Cli::try_parse_from(["sketchseg", "--threads", "auto", "eval", "--out", "o"]).unwrap();
        assert_eq!(cli.common.threads, Some(Threads::Auto));
        assert_eq!(cli.common.out, Some(PathBuf::from("o")));
    }
}
