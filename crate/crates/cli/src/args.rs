use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "moran", version, about = "Moran sets, their arithmetic images and interval certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Level sets E_0..E_k of one construction.
    Build(BuildArgs),
    /// Outer images f_U(E_k, E_k) for k = 1..=kmax.
    Image(ImageArgs),
    /// Search for a certificate that f_U(E, E) contains an interval.
    Certify(CertifyArgs),
    /// Run a named case study.
    Case(CaseArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Exact,
    Float,
}

#[derive(Args, Debug)]
pub struct SpecArgs {
    /// Moran spec JSON file.
    #[arg(long)]
    pub spec: PathBuf,

    /// Spec of the second factor; defaults to --spec.
    #[arg(long)]
    pub spec2: Option<PathBuf>,

    /// Replaces the seed of random layouts.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    /// Built-in model (add, sub, mul, div, sqrtsum) or {"poly": [[...]]}.
    #[arg(long = "f")]
    pub f: String,

    /// Open box "xlo,xhi,ylo,yhi" of U; repeat for a union. Omit for the plane.
    #[arg(long = "u")]
    pub u: Vec<String>,

    #[arg(long, value_enum, default_value_t = Backend::Exact)]
    pub backend: Backend,

    /// Merge and image tolerance of the floating backend.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long)]
    pub spec: PathBuf,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Highest rank.
    #[arg(long, visible_alias = "kmax")]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct ImageArgs {
    #[command(flatten)]
    pub specs: SpecArgs,

    #[command(flatten)]
    pub model: ModelArgs,

    /// Highest rank.
    #[arg(long, visible_alias = "kmax")]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub specs: SpecArgs,

    #[command(flatten)]
    pub model: ModelArgs,

    /// Highest rank of the witness search grid.
    #[arg(long, visible_alias = "kmax")]
    pub k: Option<usize>,

    /// Exit with status 2 unless the certificate is satisfied.
    #[arg(long)]
    pub require: bool,
}

#[derive(Args, Debug)]
pub struct CaseArgs {
    /// steinhaus, cantor_product, kk_product, sqrt_sum or kk_div.
    pub name: String,

    /// λ of the overlapping attractor; with --c. Defaults to the first preset.
    #[arg(long)]
    pub lambda: Option<String>,

    #[arg(long)]
    pub c: Option<String>,

    #[arg(long, visible_alias = "k", default_value_t = 6)]
    pub kmax: usize,
}
