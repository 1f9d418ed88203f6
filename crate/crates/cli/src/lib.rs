//! Command-line surface for `binlab`: argument parsing, one handler per
//! subcommand, and the acceptance battery.

pub mod report;
pub mod suite;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use binlab::clustering::{price_of_clustering, PriceMode};
use binlab::construction::{
    families_label, generate_construction, inequality_checks, k3_finite_prediction, k3_limit, lb_formula,
    verify_construction, GeneratorParams, Perturbation,
};
use binlab::delays::{
    check_bound, compute_rho, offline_optimal, phase_delay_errors, simulate, TimedItem, DEFAULT_OFFLINE_LIMIT,
    DEFAULT_PI_TERMS,
};
use binlab::format::{emit_certificate, emit_instance, parse_certificate, parse_instance, CertificateFile, Instance};
use binlab::packing::{exact_optimal, expand, ffd, first_fit, verify_packing, Item, Packing, DEFAULT_ITEM_LIMIT};
use binlab::rng::trial_rng;
use binlab::size::{ceil_u64, fmt_q, parse_rational, Q};
use binlab::weights::{
    bin_weight_cap_check, builtin_cap, cluster_weight_dominates_ffd, ffd_v_bound_check, grid_bins, make_builtin,
    pi_sequence, random_bin, random_cluster, random_multiset, Dominance, BUILTIN_NAMES,
};
use binlab::{Error, Size};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use report::{OutputFormat, Report};

#[derive(Parser, Debug)]
#[command(name = "binlab", version, about = "Exact-arithmetic bin packing lab")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    pub format: OutputFormat,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Pack a plain instance with FF, FFD or the exact solver.
    Pack(PackArgs),
    /// Price of clustering of a clustered instance.
    Price(PriceArgs),
    /// Generate a worst-case clustered construction and verify it.
    GenLb(GenLbArgs),
    /// Re-verify an emitted construction from its instance and certificate files.
    VerifyLb(VerifyLbArgs),
    /// Lower bound on the price of clustering for k >= 4.
    LbFormula {
        #[arg(long)]
        k: u32,
    },
    /// Limit of the k = 3 construction, optionally at finite N and M.
    K3Limit(K3LimitArgs),
    /// Weight-function suites: bin caps, W >= A on clusters, FFD <= V + 1.
    VerifyWeights(VerifyWeightsArgs),
    /// Partial sums and certified bound of sum 1/c_i.
    Pi {
        #[arg(long, default_value_t = 30)]
        terms: usize,
    },
    /// The delay parameter rho and the competitive bound.
    Rho {
        #[arg(long, default_value_t = 30)]
        terms: usize,
    },
    /// Run the phase algorithm on a timed instance.
    Simulate(SimulateArgs),
    /// Offline optimum of a small timed instance.
    Oracle(OracleArgs),
    /// Simulate, solve offline and check the competitive bound.
    CheckBound(CheckBoundArgs),
    /// The full acceptance battery.
    Suite(SuiteArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Ff,
    Ffd,
    Exact,
}

#[derive(Args, Debug)]
pub struct PackArgs {
    pub file: PathBuf,
    #[arg(long, value_enum, default_value_t = Algorithm::Ffd)]
    pub algorithm: Algorithm,
    #[arg(long, default_value_t = DEFAULT_ITEM_LIMIT)]
    pub limit: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    FfdUpper,
}

#[derive(Args, Debug)]
pub struct PriceArgs {
    pub file: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Certificate file fixing the global optimum.
    #[arg(long)]
    pub certificate: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ITEM_LIMIT)]
    pub limit: usize,
}

#[derive(Args, Debug)]
pub struct GenLbArgs {
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    #[arg(long = "N")]
    pub n: u64,
    #[arg(long = "M", default_value_t = 1)]
    pub m: u32,
    /// Comma-separated subset of 2,3,6,7,43,1807.
    #[arg(long, default_value = "2,3", value_delimiter = ',')]
    pub families: Vec<u32>,
    /// Explicit base unit `n/d` instead of the default ladder.
    #[arg(long)]
    pub base_unit: Option<String>,
    /// Write the instance here and the certificate to `<path>.cert`.
    #[arg(long)]
    pub emit: Option<PathBuf>,
    /// Skip verification (generation only).
    #[arg(long)]
    pub no_verify: bool,
}

#[derive(Args, Debug)]
pub struct VerifyLbArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub certificate: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ITEM_LIMIT)]
    pub limit: usize,
}

#[derive(Args, Debug)]
pub struct K3LimitArgs {
    #[arg(long = "N")]
    pub n: Option<u64>,
    #[arg(long = "M")]
    pub m: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<u32>>,
}

#[derive(Args, Debug)]
pub struct VerifyWeightsArgs {
    /// One of w195, wk3, wk4, v, or all.
    #[arg(long, default_value = "all")]
    pub function: String,
    /// Random bins (and a tenth as many clusters and multisets).
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    /// Also check every grid bin of at most three items above 1/4.
    #[arg(long)]
    pub exhaustive_grid: bool,
    #[arg(long, default_value_t = 420)]
    pub grid_den: i64,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    pub file: PathBuf,
    /// Defaults to the value computed from 30 sequence terms.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Flush time for bounded delays that never reach rho.
    #[arg(long)]
    pub horizon: Option<String>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = DEFAULT_OFFLINE_LIMIT)]
    pub limit: usize,
}

#[derive(Args, Debug)]
pub struct CheckBoundArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub horizon: Option<String>,
    #[arg(long, default_value_t = DEFAULT_OFFLINE_LIMIT)]
    pub limit: usize,
    #[arg(long, default_value_t = DEFAULT_PI_TERMS)]
    pub pi_terms: usize,
}

#[derive(Args, Debug)]
pub struct SuiteArgs {
    #[arg(long)]
    pub seed: u64,
    /// One percent of the random trials.
    #[arg(long)]
    pub quick: bool,
    /// Run only these criteria (comma-separated ids).
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<u32>>,
}

/// Rendered output and process exit status.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Parses `argv` (program name first) and runs the command. Exit status 0
/// means every check passed, 1 that a violation was found, 2 a usage or
/// input error.
pub fn run_command<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let echo = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            return if code == EXIT_PASS {
                Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code,
                }
            } else {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code,
                }
            };
        }
    };
    let start = Instant::now();
    match execute(&cli.command, echo) {
        Ok(mut report) => {
            report.wall_time = start.elapsed();
            Outcome {
                stdout: report.render(cli.format),
                stderr: String::new(),
                code: if report.passed() { EXIT_PASS } else { EXIT_VIOLATION },
            }
        }
        Err(e) => Outcome {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: EXIT_USAGE,
        },
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

fn rational_arg(text: &str) -> Result<Q, Error> {
    parse_rational(text).map(|(v, _)| v)
}

fn execute(command: &Command, echo: String) -> Result<Report, Error> {
    let mut r = Report::new(echo);
    match command {
        Command::Pack(a) => pack(&mut r, a)?,
        Command::Price(a) => price(&mut r, a)?,
        Command::GenLb(a) => gen_lb(&mut r, a)?,
        Command::VerifyLb(a) => verify_lb(&mut r, a)?,
        Command::LbFormula { k } => {
            r.param("k", k);
            let v = lb_formula(*k)?;
            r.exact(format!("lb({k})"), &v);
        }
        Command::K3Limit(a) => k3(&mut r, a)?,
        Command::VerifyWeights(a) => verify_weights(&mut r, a)?,
        Command::Pi { terms } => pi(&mut r, *terms)?,
        Command::Rho { terms } => {
            r.param("terms", terms);
            let (rho, bound) = compute_rho(*terms)?;
            r.float("pi_hat", pi_sequence(*terms).partial_f64());
            r.float("rho", rho);
            r.float("ratio_bound", bound);
        }
        Command::Simulate(a) => {
            let items = timed(&a.file)?;
            let (rho, horizon) = rho_and_horizon(a.rho, a.horizon.as_deref())?;
            r.param("rho", rho);
            simulate_into(&mut r, &items, rho, horizon.as_ref())?;
        }
        Command::Oracle(a) => {
            let items = timed(&a.file)?;
            r.param("limit", a.limit);
            oracle_into(&mut r, &items, a.limit)?;
        }
        Command::CheckBound(a) => {
            let items = timed(&a.file)?;
            let (rho, horizon) = rho_and_horizon(a.rho, a.horizon.as_deref())?;
            r.param("rho", rho);
            r.param("pi_terms", a.pi_terms);
            let trace = simulate_into(&mut r, &items, rho, horizon.as_ref())?;
            let off = oracle_into(&mut r, &items, a.limit)?;
            let c = check_bound(&trace, &off, a.pi_terms);
            r.float("ratio_bound", c.ratio);
            let mode = if c.exact { "exact" } else { "float, tol 1e-9" };
            r.check(
                "ALG <= (1+1/rho) D + (1+rho+pi) B",
                c.split_holds,
                format!("{:.9} <= {:.9} ({mode})", c.alg, c.split_bound),
            );
            r.check(
                "ALG <= ratio (B + D)",
                c.ratio_holds,
                format!("{:.9} <= {:.9} ({mode})", c.alg, c.ratio_bound),
            );
        }
        Command::Suite(a) => {
            let cfg = if a.quick {
                suite::SuiteConfig::quick(a.seed)
            } else {
                suite::SuiteConfig::full(a.seed)
            };
            r.seed = Some(a.seed);
            r.param("mode", if a.quick { "quick" } else { "full" });
            let ids: Vec<u32> = a.only.clone().unwrap_or_else(|| (1..=11).collect());
            for id in ids {
                if !(1..=11).contains(&id) {
                    return Err(Error::InvalidArgument(format!("no criterion {id}")));
                }
                let o = suite::run_criterion(id, &cfg);
                r.check(
                    format!("[{}] {}", o.id, o.title),
                    o.passed,
                    format!("{} ({:.1}s)", o.detail, o.elapsed.as_secs_f64()),
                );
            }
        }
    }
    Ok(r)
}

fn bin_lines(r: &mut Report, items: &[Item], packing: &Packing) {
    for (b, bin) in packing.bins.iter().enumerate() {
        let sizes: Vec<String> = bin.items.iter().map(|&p| items[p].size.to_string()).collect();
        r.line(format!("bin {b}: {} (load {})", sizes.join(" "), fmt_q(&bin.load)));
    }
}

fn pack(r: &mut Report, a: &PackArgs) -> Result<(), Error> {
    let classes = match parse_instance(&read(&a.file)?)? {
        Instance::Plain(c) => c,
        other => {
            return Err(Error::InvalidInstance(format!(
                "pack expects a plain instance, got {}",
                other.kind().as_str()
            )))
        }
    };
    let items = expand(&classes);
    r.param("file", a.file.display());
    r.param("algorithm", format!("{:?}", a.algorithm).to_lowercase());
    r.count("items", items.len() as u64);
    let sizes: Vec<Size> = items.iter().map(|i| i.size.clone()).collect();
    r.exact("total_size", &binlab::packing::total_size(&sizes));
    let packing = match a.algorithm {
        Algorithm::Ff => first_fit(&items),
        Algorithm::Ffd => {
            let t = ffd(&items);
            r.count("tau", t.tau as u64);
            if let Some(theta) = &t.theta {
                r.exact("theta", theta.value());
            }
            t.packing
        }
        Algorithm::Exact => {
            let opt = exact_optimal(&items, a.limit)?;
            let lower = ceil_u64(&binlab::packing::total_size(&sizes));
            r.check(
                "optimum >= ceil(total size)",
                opt.bins >= lower,
                format!("{} >= {lower}", opt.bins),
            );
            opt.packing
        }
    };
    r.count("bins", packing.bin_count() as u64);
    bin_lines(r, &items, &packing);
    let v = verify_packing(&items, &packing);
    r.check(
        "packing feasible and complete",
        v.ok,
        v.violation.unwrap_or_else(|| "every item once, loads <= 1".into()),
    );
    Ok(())
}

fn clustered(path: &Path) -> Result<binlab::clustering::ClusteredInstance, Error> {
    match parse_instance(&read(path)?)? {
        Instance::Clustered(c) => Ok(c),
        other => Err(Error::InvalidInstance(format!(
            "expected a clustered instance, got {}",
            other.kind().as_str()
        ))),
    }
}

fn price(r: &mut Report, a: &PriceArgs) -> Result<(), Error> {
    let inst = clustered(&a.file)?;
    let cert = match &a.certificate {
        Some(p) => Some(parse_certificate(&read(p)?)?),
        None => None,
    };
    let mode = match a.mode {
        Mode::Exact => PriceMode::Exact,
        Mode::FfdUpper => PriceMode::FfdUpper,
    };
    r.param("file", a.file.display());
    r.param(
        "mode",
        if mode == PriceMode::Exact {
            "exact"
        } else {
            "ffd-upper (upper-bound estimate)"
        },
    );
    r.param("k", inst.k);
    let report = price_of_clustering(&inst, mode, cert.as_ref().map(|c| &c.certificate), a.limit)?;
    r.count("clusters", inst.clusters.len() as u64);
    r.count("sum_cluster_opt", report.sum_cluster_opt);
    r.count("global_opt", report.global_opt);
    r.line(format!("global_opt_method: {}", report.global_method.as_str()));
    r.exact("ratio", &report.ratio);
    for c in report.per_cluster.iter().take(50) {
        let opt = c.opt.map_or("-".to_string(), |o| o.to_string());
        r.line(format!("cluster {}: OPT {opt}, FFD {}", c.id, c.ffd_bins));
    }
    if report.per_cluster.len() > 50 {
        r.line(format!("... {} more clusters", report.per_cluster.len() - 50));
    }
    if mode == PriceMode::Exact {
        r.check(
            format!("every cluster OPT >= k = {}", inst.k),
            report.is_valid_instance(),
            if report.below_k.is_empty() {
                "instance valid".to_string()
            } else {
                format!("below k: {}", report.below_k.join(", "))
            },
        );
        r.check(
            "sum of cluster optima >= global optimum",
            report.sum_cluster_opt >= report.global_opt,
            format!("{} >= {}", report.sum_cluster_opt, report.global_opt),
        );
    }
    Ok(())
}

fn gen_lb(r: &mut Report, a: &GenLbArgs) -> Result<(), Error> {
    let mut params = GeneratorParams::new(a.k, a.n, a.m, &a.families);
    if let Some(b) = &a.base_unit {
        params.perturbation = Perturbation::BaseUnit(rational_arg(b)?);
    }
    r.param("k", a.k);
    r.param("N", a.n);
    r.param("M", a.m);
    r.param("families", families_label(&params.families));
    let c = generate_construction(&params)?;
    r.exact("base_unit", &c.nu);
    r.count("clusters", c.instance.clusters.len() as u64);
    r.count("large_items", c.large_item_count);
    r.count("certificate_bins", c.certificate.bin_count());
    r.count("predicted_sum", c.predicted_sum());
    if let Some(path) = &a.emit {
        let cert_path = cert_path(path);
        write(path, &emit_instance(&Instance::Clustered(c.instance.clone())))?;
        let file = CertificateFile {
            certificate: c.certificate.clone(),
            predicted: c
                .instance
                .clusters
                .iter()
                .zip(&c.predicted)
                .map(|(cl, &p)| (cl.id.clone(), p))
                .collect(),
        };
        write(&cert_path, &emit_certificate(&file))?;
        r.line(format!("wrote {} and {}", path.display(), cert_path.display()));
    }
    if a.no_verify {
        return Ok(());
    }
    let v = verify_construction(&c);
    r.count("global_opt", v.global_opt);
    r.count("sum_cluster_opt", v.sum_cluster_opt);
    r.exact("ratio", &v.ratio);
    for e in &v.checks {
        r.check(e.name.clone(), e.passed, e.detail.clone());
    }
    let n = Q::from_integer(a.n.into());
    if a.k == 3 {
        let merged_extra = c.predicted[0] as i64 - 3;
        let formula = (k3_finite_prediction(a.n, a.m, &params.families) + Q::from_integer(merged_extra.into())) / &n;
        r.exact("finite_formula_ratio", &formula);
        r.exact("k3_limit", &k3_limit());
        r.check(
            "ratio equals the finite-parameter formula (merged cluster included)",
            v.ratio == formula,
            format!("{} vs {}", fmt_q(&v.ratio), fmt_q(&formula)),
        );
    } else {
        r.exact(format!("lb_formula({})", a.k), &lb_formula(a.k)?);
    }
    Ok(())
}

fn cert_path(instance: &Path) -> PathBuf {
    let mut s = instance.as_os_str().to_owned();
    s.push(".cert");
    PathBuf::from(s)
}

fn verify_lb(r: &mut Report, a: &VerifyLbArgs) -> Result<(), Error> {
    let inst = clustered(&a.instance)?;
    let file = parse_certificate(&read(&a.certificate)?)?;
    r.param("instance", a.instance.display());
    r.param("certificate", a.certificate.display());
    let report = price_of_clustering(&inst, PriceMode::Exact, Some(&file.certificate), a.limit)?;
    r.count("global_opt", report.global_opt);
    r.count("sum_cluster_opt", report.sum_cluster_opt);
    r.exact("ratio", &report.ratio);
    r.check(
        "certificate conserves items, fits, and meets the large-item bound",
        true,
        format!("{} bins", report.global_opt),
    );
    let mismatches: Vec<String> = report
        .per_cluster
        .iter()
        .zip(&file.predicted)
        .filter(|(c, (id, p))| &c.id != id || c.opt != Some(*p))
        .map(|(c, (id, p))| format!("{id}: predicted {p}, solver {:?}", c.opt))
        .collect();
    let count_ok = file.predicted.len() == report.per_cluster.len();
    r.check(
        "cluster optima match predictions",
        mismatches.is_empty() && count_ok,
        if count_ok {
            mismatches
                .first()
                .cloned()
                .unwrap_or_else(|| format!("{} clusters", file.predicted.len()))
        } else {
            format!(
                "{} predictions for {} clusters",
                file.predicted.len(),
                report.per_cluster.len()
            )
        },
    );
    r.check(
        format!("every cluster OPT >= k = {}", inst.k),
        report.is_valid_instance(),
        format!("{} below k", report.below_k.len()),
    );
    for e in inequality_checks(&file.certificate.kinds) {
        r.check(e.name, e.passed, e.detail);
    }
    Ok(())
}

fn k3(r: &mut Report, a: &K3LimitArgs) -> Result<(), Error> {
    r.exact("k3_limit", &k3_limit());
    if let Some(n) = a.n {
        let m = a.m.unwrap_or(1);
        let fams: BTreeSet<u32> = a
            .families
            .clone()
            .unwrap_or_else(|| vec![2, 3, 6, 7, 43, 1807])
            .into_iter()
            .collect();
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument("N and M must be positive".into()));
        }
        r.param("N", n);
        r.param("M", m);
        r.param("families", families_label(&fams));
        let total = k3_finite_prediction(n, m, &fams);
        r.exact("finite_total", &total);
        r.exact("finite_ratio", &(total / Q::from_integer(n.into())));
    }
    Ok(())
}

fn verify_weights(r: &mut Report, a: &VerifyWeightsArgs) -> Result<(), Error> {
    let names: Vec<&str> = if a.function == "all" {
        BUILTIN_NAMES.to_vec()
    } else {
        vec![a.function.as_str()]
    };
    r.seed = Some(a.seed);
    r.param("function", &a.function);
    r.param("trials", a.trials);
    let side_trials = (a.trials / 10).max(1);
    for name in names {
        let f = make_builtin(name)?;
        let cap = builtin_cap(&f)?;
        r.exact(format!("{name}_cap"), &cap);
        if a.exhaustive_grid {
            let mut n = 0u64;
            let bins = grid_bins(a.grid_den, 3, &binlab::size::q(1, 4)).inspect(|_| n += 1);
            let v = bin_weight_cap_check(&f, &cap, bins)?;
            r.check(
                format!("{name}: grid bins within cap"),
                v.is_empty(),
                match v.first() {
                    None => format!("{n} bins (den {})", a.grid_den),
                    Some(x) => format!("{} violations, first {:?} weighs {}", v.len(), x.bin, fmt_q(&x.weight)),
                },
            );
        }
        let bins = (0..a.trials).map(|t| random_bin(&mut trial_rng(a.seed, t)));
        let v = bin_weight_cap_check(&f, &cap, bins)?;
        r.check(
            format!("{name}: random bins within cap"),
            v.is_empty(),
            match v.first() {
                None => format!("{} bins", a.trials),
                Some(x) => format!("{} violations, first {:?}", v.len(), x.bin),
            },
        );
        let k = match name {
            "wk3" => Some(3),
            "wk4" => Some(4),
            _ => None,
        };
        if let Some(k) = k {
            let (mut checked, mut bad) = (0u64, Vec::new());
            for t in 0..side_trials {
                let mut rng = trial_rng(a.seed, (1 << 40) | t);
                let items = binlab::packing::items_from_sizes(&random_cluster(&mut rng, 12));
                match cluster_weight_dominates_ffd(&f, &items, k, DEFAULT_ITEM_LIMIT)? {
                    Dominance::Holds { .. } => checked += 1,
                    Dominance::Violated { .. } => {
                        checked += 1;
                        bad.push(t);
                    }
                    Dominance::PreconditionFailed { .. } => {}
                }
            }
            r.check(
                format!("{name}: W >= A on clusters with OPT >= {k}"),
                bad.is_empty(),
                format!(
                    "{checked} of {side_trials} clusters qualified, {} violations",
                    bad.len()
                ),
            );
        }
        if name == "v" {
            let bad = (0..side_trials)
                .filter(|&t| {
                    let sizes = random_multiset(&mut trial_rng(a.seed, (2 << 40) | t), 40);
                    !ffd_v_bound_check(&sizes).holds
                })
                .count();
            r.check(
                "v: FFD <= V + 1",
                bad == 0,
                format!("{side_trials} multisets, {bad} violations"),
            );
        }
    }
    Ok(())
}

fn pi(r: &mut Report, terms: usize) -> Result<(), Error> {
    if terms == 0 {
        return Err(Error::InvalidArgument("terms must be positive".into()));
    }
    r.param("terms", terms);
    let s = pi_sequence(terms);
    for (i, c) in s.terms.iter().enumerate().take(8) {
        r.line(format!("c_{} = {c}", i + 1));
    }
    match &s.partial_sum {
        Some(p) => r.exact("partial_sum", p),
        None => {
            r.line(format!(
                "exact sum over the first {} terms; the rest is covered by the tail bound",
                s.terms.len()
            ));
            r.exact("partial_sum_lower", &s.partial_lower);
        }
    }
    r.values.push(report::Value {
        name: "tail_bound".into(),
        exact: Some(format!("2/c_{}", s.terms.len() + 1)),
        decimal: format!("< 1e-{}", s.tail_bound.denom().to_string().len() - 1),
    });
    r.exact("certified_upper", &s.upper_rounded);
    Ok(())
}

fn timed(path: &Path) -> Result<Vec<TimedItem>, Error> {
    match parse_instance(&read(path)?)? {
        Instance::Timed(items) => Ok(items),
        other => Err(Error::InvalidInstance(format!(
            "expected a timed instance, got {}",
            other.kind().as_str()
        ))),
    }
}

fn rho_and_horizon(rho: Option<f64>, horizon: Option<&str>) -> Result<(f64, Option<Q>), Error> {
    let rho = match rho {
        Some(x) => x,
        None => compute_rho(DEFAULT_PI_TERMS)?.0,
    };
    let horizon = horizon.map(rational_arg).transpose()?;
    Ok((rho, horizon))
}

fn simulate_into(
    r: &mut Report,
    items: &[TimedItem],
    rho: f64,
    horizon: Option<&Q>,
) -> Result<binlab::delays::SimulationTrace, Error> {
    let t = simulate(items, rho, horizon)?;
    r.count("phases", t.phase_count() as u64);
    for (i, p) in t.phases.iter().enumerate() {
        let idx: Vec<String> = p.items.iter().map(|&x| items[x].item.index.to_string()).collect();
        let when = match &p.exact {
            Some((time, d)) => format!("t = {} delay = {}", fmt_q(time), fmt_q(d)),
            None => format!("t = {:.12} delay = {:.12}", p.trigger_time, p.accumulated_delay),
        };
        let flush = if p.flushed { " (horizon flush)" } else { "" };
        r.line(format!(
            "phase {i}: items [{}] {when} bins {}{flush}",
            idx.join(","),
            p.bins
        ));
    }
    match &t.total_cost_exact {
        Some(c) => r.exact("online_cost", c),
        None => r.float("online_cost", t.total_cost),
    }
    let errs = phase_delay_errors(&t);
    r.check(
        "each triggered phase accumulates exactly rho",
        errs.is_empty(),
        errs.first().cloned().unwrap_or_else(|| {
            if t.is_exact() {
                "exact".into()
            } else {
                "within 1e-12 relative".into()
            }
        }),
    );
    Ok(t)
}

fn oracle_into(r: &mut Report, items: &[TimedItem], limit: usize) -> Result<binlab::delays::OfflineSolution, Error> {
    let off = offline_optimal(items, limit)?;
    r.count("offline_bins", off.bin_count as u64);
    match &off.exact {
        Some((d, c)) => {
            r.exact("offline_delay", d);
            r.exact("offline_cost", c);
        }
        None => {
            r.float("offline_delay", off.total_delay);
            r.float("offline_cost", off.cost);
        }
    }
    for (b, bin) in off.partition.iter().enumerate() {
        let idx: Vec<String> = bin.iter().map(|&x| items[x].item.index.to_string()).collect();
        r.line(format!("offline bin {b}: items [{}]", idx.join(",")));
    }
    Ok(off)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certificate_sits_next_to_instance() {
        assert_eq!(cert_path(Path::new("out/k3.txt")), PathBuf::from("out/k3.txt.cert"));
    }

    #[test]
    fn families_flag_splits_on_commas() {
        let cli = Cli::try_parse_from(["binlab", "gen-lb", "--N", "90", "--families", "2,3,6"]).unwrap();
        match cli.command {
            Command::GenLb(a) => assert_eq!(a.families, vec![2, 3, 6]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn help_is_not_an_error() {
        let out = run_command(["binlab", "--help"]);
        assert_eq!(out.code, EXIT_PASS);
        assert!(out.stdout.contains("gen-lb"));
    }
}
