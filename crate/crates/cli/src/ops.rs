//! Subcommand implementations.
//!
//! Each command resolves its flags into a serializable parameter record,
//! writes that record as `config.json` beside its outputs, and accepts
//! `--config <file>` to re-run from a previously written record; replayed
//! runs reproduce all outputs byte for byte. Output files never contain
//! timestamps, and every collection is emitted in a deterministic order.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use ssdl::gadgets::{
    kolmogorov_identity_audit, measured_sup_error, pl_interpolant_net, product_net, square_net,
    tent_iterate, GadgetNetwork,
};
use ssdl::harness::{
    canonical_tiny_instance, deep_vs_shallow, make_dataset, pattern_tv, rate_study,
    target_by_name, tiny_posterior_oracle, BenchmarkConfig, DesignKind, ModelReport,
    RateStudyConfig, TINY_INSTANCE_SEED,
};
use ssdl::mcmc::{run_chain, MoveCounters, MoveProbabilities, SamplerConfig};
use ssdl::network::Architecture;
use ssdl::prior::{sample_prior, sample_prior_adaptive, PriorHyperParams};
use ssdl::regression::RegressionDataset;
use ssdl::seeds;
use ssdl::theory::{theory_report, ProblemSpec, TheoryConstants, TheoryReport};
use ssdl::{Error, Result};

use crate::plot::{scatter_svg, FitLine, Series};

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn write_str(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content)?;
    Ok(())
}

fn write_config<P: Serialize>(dir: &Path, params: &P) -> Result<()> {
    let mut doc = serde_json::to_string_pretty(params)?;
    doc.push('\n');
    write_str(&dir.join("config.json"), &doc)
}

fn write_json<P: Serialize>(path: &Path, doc: &P) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    write_str(path, &text)
}

/// Resolve the run parameters: from `--config` when given (all other
/// parameter flags are ignored), otherwise from the flags.
fn resolve<P: DeserializeOwned>(
    config: &Option<PathBuf>,
    from_flags: impl FnOnce() -> Result<P>,
) -> Result<P> {
    match config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            Ok(serde_json::from_str(&text)?)
        }
        None => from_flags(),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|_| Error::Parse(format!("bad {what} entry {tok:?} in {s:?}")))
        })
        .collect()
}

fn parse_design(s: &str) -> Result<DesignKind> {
    match s {
        "uniform" => Ok(DesignKind::Uniform),
        "grid" => Ok(DesignKind::Grid),
        other => Err(Error::InvalidArgument(format!(
            "design must be \"uniform\" or \"grid\", got {other:?}"
        ))),
    }
}

/// Prior hyperparameter flags shared by several subcommands.
#[derive(Args, Clone, Debug)]
pub struct HyperFlags {
    /// Width-prior rate (positive-Poisson lambda).
    #[arg(long, default_value_t = 1.0)]
    lambda_width: f64,
    /// Sparsity-prior decay rate.
    #[arg(long, default_value_t = 1.0)]
    lambda_sparsity: f64,
    /// Sup-norm clip bound applied to network outputs.
    #[arg(long, default_value_t = 10.0)]
    clip_bound: f64,
    /// Width-prior truncation.
    #[arg(long, default_value_t = 64)]
    prior_n_max: u64,
    /// Optional cap on the sparsity support.
    #[arg(long)]
    s_cap: Option<u64>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct HyperDoc {
    lambda_width: f64,
    lambda_sparsity: f64,
    clip_bound: f64,
    prior_n_max: u64,
    s_cap: Option<u64>,
}

impl HyperFlags {
    fn to_doc(&self) -> HyperDoc {
        HyperDoc {
            lambda_width: self.lambda_width,
            lambda_sparsity: self.lambda_sparsity,
            clip_bound: self.clip_bound,
            prior_n_max: self.prior_n_max,
            s_cap: self.s_cap,
        }
    }
}

impl HyperDoc {
    fn to_core(&self) -> PriorHyperParams<f64> {
        PriorHyperParams {
            lambda_width: self.lambda_width,
            lambda_sparsity: self.lambda_sparsity,
            clip_bound: self.clip_bound,
            n_max: self.prior_n_max,
            s_cap: self.s_cap,
        }
    }
}

// ---------------------------------------------------------------------------
// theory
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct TheoryCmd {
    /// Re-run from a resolved-config document (other parameter flags are ignored).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sample size.
    #[arg(long, required_unless_present = "config")]
    n: Option<u64>,
    /// Input dimension.
    #[arg(long, required_unless_present = "config")]
    p: Option<usize>,
    /// Smoothness of the regression function.
    #[arg(long, required_unless_present = "config")]
    alpha: Option<f64>,
    /// Log-power delta in the rate.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Bound on the Hölder norm of the regression function.
    #[arg(long, default_value_t = 1.0)]
    holder_norm: f64,
    /// Width constant C_N in the recipe width.
    #[arg(long, default_value_t = 1.0)]
    c_n: f64,
    /// Sieve constant C̃_N.
    #[arg(long, default_value_t = 1.0)]
    c_tilde_n: f64,
    #[command(flatten)]
    hyper: HyperFlags,
    /// Print the report as JSON instead of text.
    #[arg(long)]
    json: bool,
    /// When set, write report.json, report.txt, and config.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct TheoryParams {
    n: u64,
    p: usize,
    alpha: f64,
    delta: f64,
    holder_norm: f64,
    c_n: f64,
    c_tilde_n: f64,
    hyper: HyperDoc,
}

fn render_theory_text(report: &TheoryReport<f64>) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    line("n", report.spec.n.to_string());
    line("p", report.spec.p.to_string());
    line("alpha", report.spec.alpha.to_string());
    line("delta", report.spec.delta.to_string());
    line("holder_norm", report.spec.holder_norm.to_string());
    line("l_star", report.l_star.to_string());
    line("n_star", report.n_star.to_string());
    line("s_star", report.s_star.to_string());
    line("t_at_n_star", report.t_at_n_star.to_string());
    line("eps_n", report.eps_n.to_string());
    line("n_eps2", report.n_eps2.to_string());
    line("n_n", report.n_n.to_string());
    line("s_n", report.s_n.to_string());
    line("approx_bound_at_n_star", report.approx_bound_at_n_star.to_string());
    line("approx_precondition_met", report.approx_precondition_met.to_string());
    line("entropy_at_recipe", report.entropy_at_recipe.to_string());
    line("entropy_at_sieve", report.entropy_at_sieve.to_string());
    line("chernoff_tail_log", report.chernoff_tail_log.to_string());
    line("chernoff_tail", report.chernoff_tail.to_string());
    for w in &report.warnings {
        line("warning", w.clone());
    }
    out
}

impl TheoryCmd {
    pub fn run(&self) -> Result<()> {
        let params: TheoryParams = resolve(&self.config, || {
            Ok(TheoryParams {
                n: self.n.expect("clap enforces --n"),
                p: self.p.expect("clap enforces --p"),
                alpha: self.alpha.expect("clap enforces --alpha"),
                delta: self.delta,
                holder_norm: self.holder_norm,
                c_n: self.c_n,
                c_tilde_n: self.c_tilde_n,
                hyper: self.hyper.to_doc(),
            })
        })?;
        let spec = ProblemSpec {
            n: params.n,
            p: params.p,
            alpha: params.alpha,
            delta: params.delta,
            holder_norm: params.holder_norm,
            constants: TheoryConstants {
                c_n: params.c_n,
                c_tilde_n: params.c_tilde_n,
                ..TheoryConstants::default()
            },
        };
        let report = theory_report(&spec, &params.hyper.to_core())?;
        let text = render_theory_text(&report);
        if self.json {
            let mut doc = serde_json::to_string_pretty(&report)?;
            doc.push('\n');
            print!("{doc}");
        } else {
            print!("{text}");
        }
        if let Some(dir) = &self.out {
            fs::create_dir_all(dir)?;
            write_json(&dir.join("report.json"), &report)?;
            write_str(&dir.join("report.txt"), &text)?;
            write_config(dir, &params)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// sample-prior
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct SamplePriorCmd {
    /// Re-run from a resolved-config document (other parameter flags are ignored).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Explicit architecture widths, e.g. "1,24,1".
    #[arg(long, conflicts_with = "template")]
    widths: Option<String>,
    /// Templated architecture "p,N,L" (widths 12·p·N per hidden layer).
    #[arg(long)]
    template: Option<String>,
    /// Number of draws.
    #[arg(long, required_unless_present = "config")]
    draws: Option<u64>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Draw the width from its prior too (requires --template; the template
    /// width index is ignored).
    #[arg(long)]
    adaptive: bool,
    #[command(flatten)]
    hyper: HyperFlags,
    /// Output directory.
    #[arg(long, default_value = "sample-prior-out")]
    out: PathBuf,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct SamplePriorParams {
    widths: Option<Vec<usize>>,
    template: Option<(usize, usize, usize)>,
    draws: u64,
    seed: u64,
    adaptive: bool,
    hyper: HyperDoc,
}

impl SamplePriorCmd {
    pub fn run(&self) -> Result<()> {
        let params: SamplePriorParams = resolve(&self.config, || {
            let widths = self.widths.as_deref().map(|s| parse_list(s, "width")).transpose()?;
            let template = match self.template.as_deref() {
                Some(s) => {
                    let v: Vec<usize> = parse_list(s, "template")?;
                    if v.len() != 3 {
                        return Err(Error::InvalidArgument(format!(
                            "--template wants \"p,N,L\", got {s:?}"
                        )));
                    }
                    Some((v[0], v[1], v[2]))
                }
                None => None,
            };
            Ok(SamplePriorParams {
                widths,
                template,
                draws: self.draws.expect("clap enforces --draws"),
                seed: self.seed,
                adaptive: self.adaptive,
                hyper: self.hyper.to_doc(),
            })
        })?;

        let hyper = params.hyper.to_core();
        let arch = match (&params.widths, params.template) {
            (Some(w), None) => Architecture::new(w.clone())?,
            (None, Some((p, n, l))) => Architecture::template(p, n, l)?,
            (None, None) => {
                return Err(Error::InvalidArgument(
                    "one of --widths or --template is required".into(),
                ))
            }
            (Some(_), Some(_)) => {
                return Err(Error::InvalidArgument(
                    "--widths and --template are mutually exclusive".into(),
                ))
            }
        };
        if params.adaptive && params.template.is_none() {
            return Err(Error::InvalidArgument(
                "--adaptive draws the width from its prior and needs --template".into(),
            ));
        }

        let mut rng = seeds::stream_rng(params.seed, 0);
        let mut out = String::new();
        for i in 0..params.draws {
            let net = if params.adaptive {
                let (p, _, l) = params.template.expect("checked above");
                sample_prior_adaptive(p, l, &hyper, &mut rng)?.net
            } else {
                sample_prior(&arch, &hyper, &mut rng)?
            };
            out.push_str(&format!("# draw {i}\n"));
            out.push_str(&net.to_text());
            out.push('\n');
        }
        fs::create_dir_all(&self.out)?;
        write_str(&self.out.join("draws.txt"), &out)?;
        write_config(&self.out, &params)?;
        println!("wrote {} draws to {}", params.draws, self.out.join("draws.txt").display());
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// oracle-check
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct OracleCheckCmd {
    /// Re-run from a resolved-config document (other parameter flags are ignored).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Observations in the generated dataset.
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Gauss–Legendre order per half-slab panel.
    #[arg(long, default_value_t = 32)]
    order: usize,
    /// Largest acceptable total-variation distance.
    #[arg(long, default_value_t = 0.05)]
    tv_bound: f64,
    /// Master seed of the instance.
    #[arg(long, default_value_t = TINY_INSTANCE_SEED)]
    seed: u64,
    /// When set, write oracle-check.json and config.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct OracleCheckParams {
    n: usize,
    order: usize,
    tv_bound: f64,
    seed: u64,
}

#[derive(Serialize, Debug)]
struct OracleCheckDoc {
    order: usize,
    kept_draws: usize,
    doubling_delta: f64,
    log_evidence: f64,
    tv: f64,
    /// Rows `(pattern, oracle probability, chain frequency)`.
    patterns: Vec<(Vec<u32>, f64, f64)>,
    sparsity_probs: Vec<f64>,
    /// Rows `(probe point, oracle mean, chain mean)`.
    probes: Vec<(Vec<f64>, f64, f64)>,
}

impl OracleCheckCmd {
    pub fn run(&self) -> Result<()> {
        let params: OracleCheckParams = resolve(&self.config, || {
            Ok(OracleCheckParams {
                n: self.n,
                order: self.order,
                tv_bound: self.tv_bound,
                seed: self.seed,
            })
        })?;
        let mut inst = canonical_tiny_instance::<f64>()?;
        if params.n != inst.data.len() || params.seed != TINY_INSTANCE_SEED {
            let target = target_by_name::<f64>("cusp-one")?;
            inst.data = make_dataset(
                &target,
                params.n,
                DesignKind::Uniform,
                true,
                seeds::derive(params.seed, 0),
            )?;
            inst.sampler.seed = seeds::derive(params.seed, 1);
        }
        inst.oracle.order = params.order;

        let oracle = tiny_posterior_oracle(&inst.data, &inst.arch, &inst.hyper, &inst.oracle)?;
        let summary = run_chain(&inst.data, &inst.arch, &inst.hyper, &inst.sampler)?;
        let counts = summary.pattern_counts();
        let tv = pattern_tv(&oracle, &counts)?;
        let kept = summary.kept.len();

        let patterns: Vec<(Vec<u32>, f64, f64)> = oracle
            .pattern_probs
            .iter()
            .map(|(pat, prob)| {
                let emp = counts.get(pat).copied().unwrap_or(0) as f64 / kept as f64;
                (pat.clone(), *prob, emp)
            })
            .collect();
        let p = inst.data.input_dim();
        let probes: Vec<(Vec<f64>, f64, f64)> = inst
            .sampler
            .probes
            .chunks(p)
            .zip(oracle.probe_means.iter().zip(&summary.probe_means))
            .map(|(x, (&om, &cm))| (x.to_vec(), om, cm))
            .collect();
        let doc = OracleCheckDoc {
            order: oracle.order,
            kept_draws: kept,
            doubling_delta: oracle.doubling_delta,
            log_evidence: oracle.log_evidence,
            tv,
            patterns,
            sparsity_probs: oracle.sparsity_probs.clone(),
            probes: probes.clone(),
        };

        println!("oracle order {} (doubling delta {:.3e})", doc.order, doc.doubling_delta);
        println!("chain kept {} draws", doc.kept_draws);
        println!("pattern TV distance = {tv:.4} (bound {})", params.tv_bound);
        for (x, om, cm) in &probes {
            println!("probe {x:?}: oracle mean {om:.4}, chain mean {cm:.4}");
        }
        if let Some(dir) = &self.out {
            fs::create_dir_all(dir)?;
            write_json(&dir.join("oracle-check.json"), &doc)?;
            write_config(dir, &params)?;
        }
        if tv > params.tv_bound {
            return Err(Error::Numerical(format!(
                "pattern TV distance {tv:.4} exceeds the bound {}",
                params.tv_bound
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct FitCmd {
    /// Re-run from a resolved-config document (other parameter flags are ignored).
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV dataset "x1,...,xp,y" per line; when absent a dataset is generated
    /// from --target.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Library target used to generate data.
    #[arg(long, default_value = "cusp-one")]
    target: String,
    /// Generated sample size.
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Design of the generated data: "uniform" or "grid".
    #[arg(long, default_value = "uniform")]
    design: String,
    /// Generate noiseless responses.
    #[arg(long)]
    no_noise: bool,
    /// Seed of the generated dataset.
    #[arg(long, default_value_t = 11)]
    data_seed: u64,
    /// Architecture widths, e.g. "1,12,1".
    #[arg(long, required_unless_present = "config")]
    widths: Option<String>,
    #[command(flatten)]
    hyper: HyperFlags,
    #[arg(long, default_value_t = 50_000)]
    iterations: u64,
    #[arg(long, default_value_t = 10_000)]
    burn_in: u64,
    #[arg(long, default_value_t = 10)]
    thinning: u64,
    /// Chain seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Std of the reflected coefficient proposal.
    #[arg(long, default_value_t = 0.1)]
    beta_std: f64,
    /// Width cap for grow/shrink moves.
    #[arg(long, default_value_t = 8)]
    chain_n_max: usize,
    /// Enable trans-width moves (requires templated widths).
    #[arg(long)]
    width_moves: bool,
    /// Probe point "x1,...,xp" whose posterior-mean prediction is reported
    /// (repeatable).
    #[arg(long)]
    probe: Vec<String>,
    /// Also write every kept draw to draws.txt.
    #[arg(long)]
    record: bool,
    /// Output directory.
    #[arg(long, default_value = "fit-out")]
    out: PathBuf,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct FitParams {
    data: Option<PathBuf>,
    target: String,
    n: usize,
    design: String,
    noise: bool,
    data_seed: u64,
    widths: Vec<usize>,
    hyper: HyperDoc,
    iterations: u64,
    burn_in: u64,
    thinning: u64,
    seed: u64,
    beta_std: f64,
    chain_n_max: usize,
    width_moves: bool,
    probes: Vec<Vec<f64>>,
    record: bool,
}

#[derive(Serialize, Debug)]
struct FitDoc {
    kept_draws: usize,
    mean_n_width: f64,
    mean_s: f64,
    final_log_post: f64,
    probe_means: Vec<(Vec<f64>, f64)>,
    counters: MoveCounters,
    /// Rows `(pattern, kept-draw count)`.
    pattern_counts: Vec<(Vec<u32>, u64)>,
    width_counts: Vec<(usize, u64)>,
    sparsity_counts: Vec<(u64, u64)>,
}

fn read_csv_dataset(path: &Path, p: usize) -> Result<RegressionDataset<f64>> {
    let text = fs::read_to_string(path)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = parse_list(line, "dataset value")?;
        if fields.len() != p + 1 {
            return Err(Error::Parse(format!(
                "line {}: expected {} fields (x1..x{p}, y), got {}",
                lineno + 1,
                p + 1,
                fields.len()
            )));
        }
        xs.extend_from_slice(&fields[..p]);
        ys.push(fields[p]);
    }
    RegressionDataset::new(xs, ys, p)
}

impl FitCmd {
    pub fn run(&self) -> Result<()> {
        let params: FitParams = resolve(&self.config, || {
            let widths: Vec<usize> =
                parse_list(self.widths.as_deref().expect("clap enforces --widths"), "width")?;
            let probes = self
                .probe
                .iter()
                .map(|s| parse_list(s, "probe coordinate"))
                .collect::<Result<Vec<Vec<f64>>>>()?;
            Ok(FitParams {
                data: self.data.clone(),
                target: self.target.clone(),
                n: self.n,
                design: self.design.clone(),
                noise: !self.no_noise,
                data_seed: self.data_seed,
                widths,
                hyper: self.hyper.to_doc(),
                iterations: self.iterations,
                burn_in: self.burn_in,
                thinning: self.thinning,
                seed: self.seed,
                beta_std: self.beta_std,
                chain_n_max: self.chain_n_max,
                width_moves: self.width_moves,
                probes,
                record: self.record,
            })
        })?;

        let arch = Architecture::new(params.widths.clone())?;
        let p = arch.input_dim();
        let data = match &params.data {
            Some(path) => read_csv_dataset(path, p)?,
            None => {
                let target = target_by_name::<f64>(&params.target)?;
                make_dataset(
                    &target,
                    params.n,
                    parse_design(&params.design)?,
                    params.noise,
                    params.data_seed,
                )?
            }
        };

        fs::create_dir_all(&self.out)?;
        let cfg = SamplerConfig {
            iterations: params.iterations,
            burn_in: params.burn_in,
            thinning: params.thinning,
            moves: if params.width_moves {
                MoveProbabilities::default()
            } else {
                MoveProbabilities::without_width_moves()
            },
            beta_std: params.beta_std,
            n_max: params.chain_n_max,
            seed: params.seed,
            probes: params.probes.iter().flatten().copied().collect(),
            supnorm_grid: 0,
            record_path: params.record.then(|| self.out.join("draws.txt")),
            ..SamplerConfig::default()
        };
        let summary = run_chain(&data, &arch, &params.hyper.to_core(), &cfg)?;

        let doc = FitDoc {
            kept_draws: summary.kept.len(),
            mean_n_width: summary.mean_n_width,
            mean_s: summary.mean_s,
            final_log_post: summary.final_log_post,
            probe_means: params
                .probes
                .iter()
                .cloned()
                .zip(summary.probe_means.iter().copied())
                .collect(),
            counters: summary.counters,
            pattern_counts: summary.pattern_counts().into_iter().collect(),
            width_counts: summary.width_counts().into_iter().collect(),
            sparsity_counts: summary.sparsity_counts().into_iter().collect(),
        };
        write_json(&self.out.join("summary.json"), &doc)?;
        write_config(&self.out, &params)?;
        println!(
            "kept {} draws; posterior mean width {:.3}, mean active slots {:.3}",
            doc.kept_draws, doc.mean_n_width, doc.mean_s
        );
        for (x, m) in &doc.probe_means {
            println!("probe {x:?}: posterior mean {m:.4}");
        }
        println!("summary written to {}", self.out.join("summary.json").display());
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// rate-study
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct RateStudyCmd {
    /// Re-run from a resolved-config document (other parameter flags are ignored).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Library target.
    #[arg(long, default_value = "cusp-one")]
    target: String,
    /// Sample sizes, e.g. "128,512,2048".
    #[arg(long, default_value = "128,512,2048")]
    ns: String,
    #[arg(long, default_value_t = 10)]
    replicates: u64,
    /// Hidden depth of the width template the sampler moves on.
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// Width index the chain starts from.
    #[arg(long, default_value_t = 1)]
    n_width0: usize,
    /// Generate noiseless responses.
    #[arg(long)]
    no_noise: bool,
    /// Neighborhood radius multiplier.
    #[arg(long, default_value_t = 1.0)]
    mass_multiplier: f64,
    /// Log-power delta in the rate.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 1791)]
    seed: u64,
    #[arg(long, default_value_t = 200_000)]
    iterations: u64,
    #[arg(long, default_value_t = 50_000)]
    burn_in: u64,
    #[arg(long, default_value_t = 50)]
    thinning: u64,
    #[arg(long, default_value_t = 0.25)]
    beta_std: f64,
    /// Width cap for grow/shrink moves.
    #[arg(long, default_value_t = 8)]
    chain_n_max: usize,
    /// Output directory (per-cell rows under cells/ resume interrupted runs).
    #[arg(long, default_value = "rate-study-out")]
    out: PathBuf,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct RateStudyParams {
    target: String,
    ns: Vec<u64>,
    replicates: u64,
    depth: usize,
    n_width0: usize,
    noise: bool,
    mass_multiplier: f64,
    delta: f64,
    seed: u64,
    iterations: u64,
    burn_in: u64,
    thinning: u64,
    beta_std: f64,
    chain_n_max: usize,
}

#[derive(Serialize, Debug)]
struct RateStudyDoc {
    medians: Vec<(u64, f64)>,
    fitted_slope: f64,
    slope_stderr: f64,
    theory_slope: f64,
    cells: usize,
    failures: Vec<String>,
}

impl RateStudyCmd {
    pub fn run(&self) -> Result<()> {
        let params: RateStudyParams = resolve(&self.config, || {
            Ok(RateStudyParams {
                target: self.target.clone(),
                ns: parse_list(&self.ns, "sample size")?,
                replicates: self.replicates,
                depth: self.depth,
                n_width0: self.n_width0,
                noise: !self.no_noise,
                mass_multiplier: self.mass_multiplier,
                delta: self.delta,
                seed: self.seed,
                iterations: self.iterations,
                burn_in: self.burn_in,
                thinning: self.thinning,
                beta_std: self.beta_std,
                chain_n_max: self.chain_n_max,
            })
        })?;

        let target = target_by_name::<f64>(&params.target)?;
        let mut cfg = RateStudyConfig::<f64>::desk_scale();
        cfg.ns = params.ns.clone();
        cfg.replicates = params.replicates;
        cfg.depth = params.depth;
        cfg.n_width0 = params.n_width0;
        cfg.noise = params.noise;
        cfg.mass_multiplier = params.mass_multiplier;
        cfg.delta = params.delta;
        cfg.seed = params.seed;
        cfg.sampler.iterations = params.iterations;
        cfg.sampler.burn_in = params.burn_in;
        cfg.sampler.thinning = params.thinning;
        cfg.sampler.beta_std = params.beta_std;
        cfg.sampler.n_max = params.chain_n_max;
        fs::create_dir_all(&self.out)?;
        cfg.out_dir = Some(self.out.join("cells"));

        let t0 = std::time::Instant::now();
        let result = rate_study(&target, &cfg)?;
        eprintln!("rate study finished in {:?}", t0.elapsed());

        let mut cells_csv = String::from(ssdl::harness::CellResult::<f64>::CSV_HEADER);
        cells_csv.push('\n');
        for cell in &result.cells {
            cells_csv.push_str(&cell.csv_row());
            cells_csv.push('\n');
        }
        write_str(&self.out.join("cells.csv"), &cells_csv)?;

        let mut medians_csv = String::from("n,median_d_n\n");
        for &(n, d) in &result.medians {
            medians_csv.push_str(&format!("{n},{d}\n"));
        }
        write_str(&self.out.join("medians.csv"), &medians_csv)?;

        let doc = RateStudyDoc {
            medians: result.medians.clone(),
            fitted_slope: result.fitted_slope,
            slope_stderr: result.slope_stderr,
            theory_slope: result.theory_slope,
            cells: result.cells.len(),
            failures: result.failures.iter().map(|f| format!("{f:?}")).collect(),
        };
        write_json(&self.out.join("summary.json"), &doc)?;

        // Log-log median plot with the fitted slope line.
        let pts: Vec<(f64, f64)> =
            result.medians.iter().map(|&(n, d)| ((n as f64).ln(), d.max(1e-12).ln())).collect();
        let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let fit = FitLine {
            slope: result.fitted_slope,
            intercept: mean_y - result.fitted_slope * mean_x,
            label: format!(
                "fit slope {:.3} (idealized {:.3})",
                result.fitted_slope, result.theory_slope
            ),
        };
        let svg = scatter_svg(
            &format!("median distance vs sample size ({})", params.target),
            "ln n",
            "ln median d_n",
            &[Series { label: "median d_n", points: &pts, color: "#1f5fa8" }],
            Some(&fit),
        );
        write_str(&self.out.join("study.svg"), &svg)?;
        write_config(&self.out, &params)?;

        for &(n, d) in &result.medians {
            println!("n = {n}: median d_n = {d:.4}");
        }
        println!(
            "fitted slope {:.3} ± {:.3} (idealized {:.3}); outputs in {}",
            result.fitted_slope,
            result.slope_stderr,
            result.theory_slope,
            self.out.display()
        );
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// approx-demo
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct ApproxDemoCmd {
    /// Re-run from a resolved-config document (other parameter flags are ignored).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Largest gadget index m for the sawtooth/square/product families.
    #[arg(long, default_value_t = 8)]
    max_m: usize,
    /// Knot counts for the interpolants, e.g. "8,16,32,64,128".
    #[arg(long, default_value = "8,16,32,64,128")]
    ks: String,
    /// Measurement grid (points per axis) for one-dimensional gadgets.
    #[arg(long, default_value_t = 10_000)]
    grid: usize,
    /// Measurement grid (points per axis) for two-dimensional gadgets.
    #[arg(long, default_value_t = 301)]
    grid_2d: usize,
    /// Grid for the superposition-identity audit.
    #[arg(long, default_value_t = 201)]
    audit_grid: usize,
    /// Output directory.
    #[arg(long, default_value = "approx-demo-out")]
    out: PathBuf,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct ApproxDemoParams {
    max_m: usize,
    ks: Vec<usize>,
    grid: usize,
    grid_2d: usize,
    audit_grid: usize,
}

#[derive(Serialize, Debug)]
struct AuditDoc {
    grid_resolution: usize,
    cubic_max_residual: f64,
    cubic_argmax: [f64; 2],
    quartic_max_residual: f64,
    quartic_argmax: [f64; 2],
    corrected_cubic_max_residual: f64,
    corrected_quartic_max_residual: f64,
    /// Coarse residual table rows `(x1, x2, |rhs − lhs|)` for the quoted
    /// quartic identity.
    quartic_table: Vec<(f64, f64, f64)>,
}

impl ApproxDemoCmd {
    pub fn run(&self) -> Result<()> {
        let params: ApproxDemoParams = resolve(&self.config, || {
            Ok(ApproxDemoParams {
                max_m: self.max_m,
                ks: parse_list(&self.ks, "knot count")?,
                grid: self.grid,
                grid_2d: self.grid_2d,
                audit_grid: self.audit_grid,
            })
        })?;

        // `claimed_bound` is filled only when the reference is the gadget's
        // own construction target; interpolant rows measure the distance to
        // the sampled function instead, about which the gadget claims nothing.
        let mut csv = String::from("gadget,parameter,reference,claimed_bound,measured_error\n");
        let mut row = |g: &GadgetNetwork<f64>, label: &str, reference: &str, measured: f64| {
            let claim = if reference == "sampled-target" {
                String::new()
            } else {
                g.claimed_bound.to_string()
            };
            csv.push_str(&format!("{label},{},{reference},{claim},{measured}\n", g.parameter));
        };
        let mut square_pts = Vec::new();
        let mut square_bound_pts = Vec::new();
        for m in 1..=params.max_m {
            let g = ssdl::gadgets::sawtooth_net::<f64>(m)?;
            let err = measured_sup_error(&g, |x: &[f64]| tent_iterate(x[0], m), params.grid)?;
            row(&g, "sawtooth", "tent-composition", err);

            let g = square_net::<f64>(m)?;
            let err = measured_sup_error(&g, |x: &[f64]| x[0] * x[0], params.grid)?;
            row(&g, "square", "x^2", err);
            square_pts.push((m as f64, err.max(1e-300).log2()));
            square_bound_pts.push((m as f64, g.claimed_bound.log2()));

            let g = product_net::<f64>(m)?;
            let err = measured_sup_error(&g, |x: &[f64]| x[0] * x[1], params.grid_2d)?;
            row(&g, "product", "x1*x2", err);
        }
        for &k in &params.ks {
            for name in ["cusp-one", "cusp-half"] {
                let target = target_by_name::<f64>(name)?;
                let g = pl_interpolant_net(|x: &[f64]| target.eval(x), k, 1)?;
                let err = measured_sup_error(&g, |x: &[f64]| target.eval(x), params.grid)?;
                row(&g, &format!("interpolant-{name}"), "sampled-target", err);
            }
        }
        fs::create_dir_all(&self.out)?;
        write_str(&self.out.join("gadgets.csv"), &csv)?;

        let audit = kolmogorov_identity_audit::<f64>(params.audit_grid)?;
        let doc = AuditDoc {
            grid_resolution: audit.grid_resolution,
            cubic_max_residual: audit.cubic_max_residual,
            cubic_argmax: audit.cubic_argmax,
            quartic_max_residual: audit.quartic_max_residual,
            quartic_argmax: audit.quartic_argmax,
            corrected_cubic_max_residual: audit.corrected_cubic_max_residual,
            corrected_quartic_max_residual: audit.corrected_quartic_max_residual,
            quartic_table: audit.quartic_table.clone(),
        };
        write_json(&self.out.join("audit.json"), &doc)?;

        let svg = scatter_svg(
            "squaring gadget: measured error vs depth index",
            "m",
            "log2 sup error",
            &[
                Series { label: "measured", points: &square_pts, color: "#1f5fa8" },
                Series { label: "claimed bound", points: &square_bound_pts, color: "#b3541e" },
            ],
            None,
        );
        write_str(&self.out.join("square-error.svg"), &svg)?;
        write_config(&self.out, &params)?;

        print!("{csv}");
        println!(
            "identity audit: quoted residual maxima {:.3} / {:.3}, corrected {:.1e} / {:.1e}",
            doc.cubic_max_residual,
            doc.quartic_max_residual,
            doc.corrected_cubic_max_residual,
            doc.corrected_quartic_max_residual
        );
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// deep-vs-shallow
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct DeepVsShallowCmd {
    /// Re-run from a resolved-config document (other parameter flags are ignored).
    #[arg(long)]
    config: Option<PathBuf>,
    /// The target is sampled on a grid-side² lattice.
    #[arg(long, default_value_t = 201)]
    grid_side: usize,
    /// Every stride-th grid point is held out for validation.
    #[arg(long, default_value_t = 5)]
    stride: usize,
    /// Independent restarts per model; the best train MSE wins.
    #[arg(long, default_value_t = 3)]
    restarts: u64,
    #[arg(long, default_value_t = 5309)]
    seed: u64,
    /// Training epochs of the deep model.
    #[arg(long, default_value_t = 3000)]
    deep_epochs: u64,
    /// Training epochs of the shallow model.
    #[arg(long, default_value_t = 120)]
    shallow_epochs: u64,
    /// When set, write report.json and config.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct DeepVsShallowParams {
    grid_side: usize,
    stride: usize,
    restarts: u64,
    seed: u64,
    deep_epochs: u64,
    shallow_epochs: u64,
}

#[derive(Serialize, Debug)]
struct ModelDoc {
    label: String,
    widths: Vec<usize>,
    train_mse: f64,
    validation_mse: f64,
    reference_train_mse: f64,
    reference_validation_mse: f64,
    restarts_attempted: u64,
    restarts_diverged: u64,
}

impl ModelDoc {
    fn of(report: &ModelReport<f64>) -> Self {
        ModelDoc {
            label: report.label.to_string(),
            widths: report.widths.clone(),
            train_mse: report.train_mse,
            validation_mse: report.validation_mse,
            reference_train_mse: report.reference_train_mse,
            reference_validation_mse: report.reference_validation_mse,
            restarts_attempted: report.restarts_attempted,
            restarts_diverged: report.restarts_diverged,
        }
    }
}

#[derive(Serialize, Debug)]
struct BenchmarkDoc {
    deep: ModelDoc,
    shallow: ModelDoc,
    baseline_validation_mse: f64,
    n_train: usize,
    n_validation: usize,
}

impl DeepVsShallowCmd {
    pub fn run(&self) -> Result<()> {
        let params: DeepVsShallowParams = resolve(&self.config, || {
            Ok(DeepVsShallowParams {
                grid_side: self.grid_side,
                stride: self.stride,
                restarts: self.restarts,
                seed: self.seed,
                deep_epochs: self.deep_epochs,
                shallow_epochs: self.shallow_epochs,
            })
        })?;
        let mut cfg = BenchmarkConfig::<f64>::default();
        cfg.grid_side = params.grid_side;
        cfg.validation_stride = params.stride;
        cfg.restarts = params.restarts;
        cfg.seed = params.seed;
        cfg.deep.epochs = params.deep_epochs;
        cfg.shallow.epochs = params.shallow_epochs;

        let t0 = std::time::Instant::now();
        let report = deep_vs_shallow(&cfg)?;
        eprintln!("benchmark finished in {:?}", t0.elapsed());

        let doc = BenchmarkDoc {
            deep: ModelDoc::of(&report.deep),
            shallow: ModelDoc::of(&report.shallow),
            baseline_validation_mse: report.baseline_validation_mse,
            n_train: report.n_train,
            n_validation: report.n_validation,
        };
        for m in [&doc.deep, &doc.shallow] {
            println!(
                "{}: train MSE {:.4}, validation MSE {:.4} (reference {:.4}/{:.4}), \
                 {} of {} restarts diverged",
                m.label,
                m.train_mse,
                m.validation_mse,
                m.reference_train_mse,
                m.reference_validation_mse,
                m.restarts_diverged,
                m.restarts_attempted
            );
        }
        println!(
            "baseline (constant mean) validation MSE {:.4}; {} train / {} validation points",
            doc.baseline_validation_mse, doc.n_train, doc.n_validation
        );
        if let Some(dir) = &self.out {
            fs::create_dir_all(dir)?;
            write_json(&dir.join("report.json"), &doc)?;
            write_config(dir, &params)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Tests of small pure helpers (the end-to-end paths live in tests/cli.rs)
// ---------------------------------------------------------------------------
