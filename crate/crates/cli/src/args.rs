use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "tispell",
    version,
    about = "Tibetan spelling corruption, correction and evaluation"
)]
pub struct Cli {
    /// Only print warnings and errors on standard error.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split sentences into tab-separated syllables.
    Segment(SegmentArgs),
    /// Synthesize a corruption dataset (JSON lines) from a clean corpus.
    Corrupt(CorruptArgs),
    /// Generate the synthetic fixture corpus.
    Fixtures(FixtureArgs),
    /// Build the dictionary and n-gram baselines from a clean corpus.
    TrainBaseline(BaselineArgs),
    /// Score a correction system on a dataset, per bucket.
    Eval(EvalArgs),
    /// Correct sentences with a trained model.
    Correct(CorrectArgs),
    /// Export one attention matrix as CSV.
    Attention(AttentionArgs),
    /// Train the neural corrector.
    Train(TrainArgs),
    /// Train and evaluate one model per final-loss weight.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Input file; standard input when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorruptArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// clean, mixed, single, buckets, uniform or an operator name.
    #[arg(long, default_value = "mixed")]
    pub mode: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Script table file; defaults to $TISPELL_TABLE, then the builtin table.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Characters random insertion draws from (literal or U+XXXX list).
    #[arg(long, conflicts_with = "fixture_alphabet")]
    pub alphabet: Option<String>,
    /// Draw insertions from the fixture alphabet.
    #[arg(long)]
    pub fixture_alphabet: bool,
    #[arg(long, default_value_t = 1.0)]
    pub corruption_rate: f64,
    #[arg(long, default_value_t = 128)]
    pub max_syllables: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[arg(long, default_value_t = 2000)]
    pub sentences: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 40)]
    pub lexicon_size: usize,
    #[arg(long, default_value_t = 2)]
    pub branching: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Where to write the frequency dictionary.
    #[arg(long)]
    pub dict: PathBuf,
    /// Where to write the trigram model.
    #[arg(long)]
    pub ngram: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub max_edit_distance: usize,
    /// Add-k smoothing constant.
    #[arg(long, default_value_t = tispell_core::baselines::DEFAULT_K)]
    pub k: f64,
}

#[derive(Debug, Args, Clone)]
pub struct SystemFlags {
    #[arg(long)]
    pub dict: Option<PathBuf>,
    #[arg(long)]
    pub ngram: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// dummy, dict, ngram or tispell.
    #[arg(long)]
    pub system: String,
    #[command(flatten)]
    pub artifacts: SystemFlags,
    /// CSV output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrectArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Print the semi-masked intermediate line before each correction.
    #[arg(long)]
    pub show_semimask: bool,
}

#[derive(Debug, Args)]
pub struct AttentionArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Layer and head as `LAYER:HEAD`, both 0-based.
    #[arg(long, value_name = "LAYER:HEAD")]
    pub export_attention: String,
    #[arg(long)]
    pub text: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct TrainArgs {
    /// Fixed JSON-lines dataset.
    #[arg(long, required_unless_present = "corpus", conflicts_with = "corpus")]
    pub dataset: Option<PathBuf>,
    /// Clean corpus, corrupted afresh every epoch.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Corruption mode when training from a corpus.
    #[arg(long, default_value = "mixed")]
    pub mode: String,
    /// Draw insertions from the fixture alphabet when training from a corpus.
    #[arg(long)]
    pub fixture_alphabet: bool,
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Checkpoint to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Per-epoch metrics CSV; defaults to the checkpoint path with `.metrics.csv`.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Dataset scored after every epoch; adds per-bucket F1 columns.
    #[arg(long)]
    pub eval_dataset: Option<PathBuf>,
    /// `key = value` file of model and training settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Continue from a checkpoint that carries optimizer state.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Weight of the final-output loss term.
    #[arg(long)]
    pub w_c: Option<f64>,
    /// Put the weight on the semi-mask term instead.
    #[arg(long)]
    pub swap_loss_weight: bool,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub head_layers: Option<u8>,
    /// Drop the character head and train the final output only.
    #[arg(long, conflicts_with = "no_residual")]
    pub single_head: bool,
    /// Final logits from the syllable head alone, without the residual sum.
    #[arg(long)]
    pub no_residual: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub train: TrainArgs,
    /// Comma-separated loss weights.
    #[arg(long, value_delimiter = ',', default_values_t = tispell_neural::W_C_SWEEP.to_vec())]
    pub values: Vec<f64>,
}
