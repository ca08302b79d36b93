use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dignet::kappa::KappaVector;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "dignet",
    version,
    about = "Scrambled base-2 digital nets: quality parameters, exact oracles and Monte Carlo probes",
    long_about = "Scrambled base-2 digital nets: quality parameters, exact oracles and Monte Carlo probes.\n\n\
        Walsh indices are written as comma-separated integers, one per coordinate: \
        `8,8,0` selects digit 4 in the first two coordinates and nothing in the third.\n\n\
        Reports are JSON on stdout unless --out is given. A relative --out path is \
        resolved against $DIGNET_OUT_DIR when that variable is set.\n\n\
        Exit status: 0 on success, 1 when a probe or check fails, 2 on usage or input errors."
)]
pub struct Cli {
    /// Worker threads; results do not depend on this
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Output format; JSON by default, CSV for points
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Create and inspect generator matrices
    #[command(subcommand)]
    Net(NetCommand),
    /// Emit the points of a (scrambled) digital net
    Points(PointsArgs),
    /// Replicated RQMC estimates of an integral
    Estimate(EstimateArgs),
    /// Skewness and higher moments of the RQMC estimate, with the exact third moment for x² on request
    Skewness(SkewnessArgs),
    /// Exact variance series for x² with the identity generator, optionally against Monte Carlo
    Variance(VarianceArgs),
    /// Probability that a Walsh term survives the scramble, alone or jointly with a second term
    Zprob(ZprobArgs),
    /// Monte Carlo probes of the probability bounds
    #[command(subcommand)]
    Probe(ProbeCommand),
    /// Empirical coverage of Student-t confidence intervals from replicated estimates
    CiCoverage(CiCoverageArgs),
    /// Exhaustive check of the finite triple-sum bound and its symmetry
    LemmaT(LemmaTArgs),
}

#[derive(Subcommand, Debug)]
pub enum NetCommand {
    /// Quality parameter t, and for s = 3 the triple-intersection parameter T
    Quality(GenArgs),
    /// Write a generator set in the text file format
    Gen(GenArgs),
    /// Build the three-dimensional block counterexample from a (1, m-1, 3) base
    EmbedCounterexample(EmbedArgs),
}

/// Where generator matrices come from.
#[derive(Args, Debug, Clone, Serialize)]
pub struct GenArgs {
    /// identity, random, counterexample, or a path to a net file
    #[arg(long = "gen", default_value = "identity")]
    pub source: String,
    /// Number of index digits (2^m points)
    #[arg(long)]
    pub m: Option<usize>,
    /// Dimension
    #[arg(long)]
    pub s: Option<usize>,
    /// Seed for random generators and for the counterexample base search
    #[arg(long)]
    pub gen_seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EmbedArgs {
    /// Even number of digits of the embedded net
    #[arg(long)]
    pub m: usize,
    /// File holding a (t <= 1, m-1, 3) base; searched for when absent
    #[arg(long)]
    pub base: Option<PathBuf>,
    /// Seed of the base search
    #[arg(long, default_value_t = 3)]
    pub gen_seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PointsArgs {
    #[command(flatten)]
    pub gen: GenArgs,
    /// Digits kept per coordinate
    #[arg(long, default_value_t = 64)]
    pub precision: u32,
    /// Scramble seed
    #[arg(long, required_unless_present = "unscrambled")]
    pub seed: Option<u64>,
    /// Emit the raw net without scrambling
    #[arg(long)]
    pub unscrambled: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CenteringArg {
    /// Center at the exact integral
    Known,
    /// Center at the mean of the replicates
    Sample,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EstimateArgs {
    /// xsq, prod_xsq or const:<value>
    #[arg(long, default_value = "xsq")]
    pub integrand: String,
    #[command(flatten)]
    pub gen: GenArgs,
    #[arg(long, default_value_t = 64)]
    pub precision: u32,
    /// Independent scrambles
    #[arg(long)]
    pub replicates: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SkewnessArgs {
    #[arg(long, default_value = "xsq")]
    pub integrand: String,
    #[command(flatten)]
    pub gen: GenArgs,
    #[arg(long, default_value_t = 64)]
    pub precision: u32,
    /// Independent scrambles; omit to report only the oracle
    #[arg(long, requires = "seed")]
    pub replicates: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = CenteringArg::Known)]
    pub centering: CenteringArg,
    /// Include the exact third central moment (x², identity generator, s = 1)
    #[arg(long)]
    pub oracle: bool,
    /// Largest digit position kept in the exact series; defaults to m + 24
    #[arg(long)]
    pub cutoff: Option<u32>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VarianceArgs {
    #[arg(long)]
    pub m: u32,
    /// Largest digit position summed term by term; defaults to m + 24
    #[arg(long)]
    pub cutoff: Option<u32>,
    /// Also estimate by Monte Carlo with this many scrambles
    #[arg(long, requires = "seed")]
    pub replicates: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 64)]
    pub precision: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZprobMethod {
    /// Closed rule for one identity generator (s = 1, at most two digits per index)
    Identity,
    /// Enumerate every relevant scramble bit
    Enum,
    /// Gaussian elimination on the same system
    Linear,
    /// Sample scrambles
    Mc,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ZprobArgs {
    #[command(flatten)]
    pub gen: GenArgs,
    #[arg(long, value_parser = parse_kvec)]
    pub k1: KappaVector,
    /// Second index for the joint probability
    #[arg(long, value_parser = parse_kvec)]
    pub k2: Option<KappaVector>,
    #[arg(long, value_enum, default_value_t = ZprobMethod::Linear)]
    pub method: ZprobMethod,
    #[arg(long, default_value_t = 64)]
    pub precision: u32,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    /// Required by the mc method
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum ProbeCommand {
    /// Frequency of one surviving Walsh term against 2^(-m+t+s)
    SingleEvent(SingleEventArgs),
    /// Joint frequency of two surviving terms against the pair bounds
    PairEvent(PairEventArgs),
    /// Quality parameters of random generators against 1/((s-1)! m)
    TDistribution(TDistributionArgs),
    /// Joint frequency over random generators and scrambles against 2^(-2m)
    PairLaw(PairLawArgs),
    /// Fraction of random generator sets with a sampled pair above 2^(-2(1-eps)m)
    Cstar(CstarArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SingleEventArgs {
    #[command(flatten)]
    pub gen: GenArgs,
    #[arg(long, value_parser = parse_kvec)]
    pub k: KappaVector,
    #[arg(long, default_value_t = 64)]
    pub precision: u32,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PairEventArgs {
    #[command(flatten)]
    pub gen: GenArgs,
    #[arg(long, value_parser = parse_kvec)]
    pub k1: KappaVector,
    #[arg(long, value_parser = parse_kvec)]
    pub k2: KappaVector,
    #[arg(long, default_value_t = 64)]
    pub precision: u32,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    /// Also require the joint frequency to reach this value
    #[arg(long)]
    pub at_least: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TDistributionArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub s: usize,
    /// Random generator sets to draw
    #[arg(long, default_value_t = 4000)]
    pub draws: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PairLawArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub s: usize,
    /// Defaults to digit m-1 in the first coordinate
    #[arg(long, value_parser = parse_kvec)]
    pub k1: Option<KappaVector>,
    /// Defaults to digit m in the last coordinate
    #[arg(long, value_parser = parse_kvec)]
    pub k2: Option<KappaVector>,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CstarArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub eps: f64,
    /// Random generator sets to draw
    #[arg(long, default_value_t = 200)]
    pub c_draws: u64,
    /// Index pairs sampled per generator set
    #[arg(long, default_value_t = 300)]
    pub pair_samples: u64,
    #[arg(long)]
    pub seed: u64,
    /// Test one fixed generator set (counterexample or a net file) instead of random ones
    #[arg(long = "gen")]
    pub fixed: Option<String>,
    /// Extra pair always tested, written `K1/K2`
    #[arg(long = "pair", value_parser = parse_pair)]
    pub pairs: Vec<(KappaVector, KappaVector)>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CiCoverageArgs {
    #[arg(long, default_value = "xsq")]
    pub integrand: String,
    #[command(flatten)]
    pub gen: GenArgs,
    #[arg(long, default_value_t = 64)]
    pub precision: u32,
    /// Scrambles per interval
    #[arg(long, default_value_t = 8)]
    pub replicates: u64,
    /// Intervals to build
    #[arg(long, default_value_t = 10_000)]
    pub repetitions: u64,
    /// Nominal coverage
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LemmaTArgs {
    /// Largest argument checked
    #[arg(long, default_value_t = 10)]
    pub max_l: u32,
}

fn parse_kvec(text: &str) -> Result<KappaVector, String> {
    text.parse().map_err(|e: dignet::Error| e.to_string())
}

fn parse_pair(text: &str) -> Result<(KappaVector, KappaVector), String> {
    let (a, b) = text
        .split_once('/')
        .ok_or_else(|| format!("expected K1/K2, got {text:?}"))?;
    Ok((parse_kvec(a)?, parse_kvec(b)?))
}
