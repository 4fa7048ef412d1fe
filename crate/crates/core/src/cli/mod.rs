//! The `ebtkit` command line: argument parsing, analysis reports and exit codes.
//!
//! Exit codes: 0 success, 2 parse or usage error, 3 invalid channel (or a
//! request that needs an entanglement-breaking channel), 4 a numerical
//! tolerance check failed.

pub mod format;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{ebt_diag_necessary, gell_mann_basis, transfer_matrix, wu_factorization};
use crate::channels::{
    choi_of, kraus_from_choi, kraus_from_holevo, simulate_measure_prepare, Channel, HolevoChannel,
    QuantumChannel,
};
use crate::ebt::{classify_with, ClassifyOptions, EbtVerdict, PPT_TOL};
use crate::error::{Error, Result};
use crate::extremality::{
    analyze_structure, cpt_extremality, ebt_extremality_hints, verify_tetrahedron, EbtExtremeHint,
};
use crate::linalg::{basis_vector, trace_distance, ComplexMatrix};
use crate::states::{DensityMatrix, PureState};

use format::{
    builtin, matrix_to_json, parse_spec, parse_state, to_canonical_json, ChannelSpec,
    ChannelSpecFile, MatrixJson,
};

#[derive(Debug, Parser)]
#[command(
    name = "ebtkit",
    version,
    about = "Analyze quantum channels and entanglement-breaking maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Emit machine-readable JSON
    #[arg(long, global = true)]
    pub json: bool,
    /// Tolerance for the partial-transpose test
    #[arg(long, global = true, default_value_t = PPT_TOL)]
    pub tol: f64,
    /// Seed for randomized steps and simulation
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of files classified concurrently
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Channel spec files
    pub files: Vec<PathBuf>,
    /// Use a builtin channel instead of a file (see `ebtkit builtins`)
    #[arg(long)]
    pub builtin: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Kraus,
    Holevo,
    Choi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisName {
    Gellmann,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether channels are entanglement breaking
    Classify(Input),
    /// Rewrite a channel in another representation
    Convert {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        to: Target,
    },
    /// Extremality among all channels and among entanglement-breaking ones
    Extremal(Input),
    /// Transfer matrix in an operator basis
    Tmatrix {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "gellmann")]
        basis: BasisName,
    },
    /// Monte-Carlo measure-and-prepare simulation
    Simulate {
        #[command(flatten)]
        input: Input,
        /// Input state file; defaults to |0><0|
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// List builtin channels
    Builtins,
}

pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Parse { .. } | Error::Io(_) => 2,
        Error::ReconstructionFailed { .. } | Error::MergeStall { .. } => 4,
        _ => 3,
    }
}

/// Runs the CLI with the given arguments (including the program name) and
/// returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok(outputs) => {
            let mut code = 0;
            for o in outputs {
                match o {
                    Ok(text) => {
                        let _ = out.write_all(text.as_bytes());
                    }
                    Err((source, e)) => {
                        let _ = writeln!(err, "error: {source}: {e}");
                        code = code.max(exit_code(&e));
                    }
                }
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

type Output = std::result::Result<String, (String, Error)>;

struct Loaded {
    source: String,
    channel: Channel,
}

fn load_file(path: &Path) -> Result<Loaded> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let spec = parse_spec(&text)?;
    Ok(Loaded {
        source: path.display().to_string(),
        channel: spec.channel.build()?,
    })
}

fn load_builtin(name: &str) -> Result<Loaded> {
    Ok(Loaded {
        source: format!("builtin {name}"),
        channel: builtin(name, None)?,
    })
}

fn single_input(input: &Input) -> Result<Loaded> {
    match (&input.builtin, input.files.as_slice()) {
        (Some(name), []) => load_builtin(name),
        (None, [path]) => load_file(path),
        _ => Err(Error::Parse {
            line: 0,
            column: 0,
            message: "expected exactly one spec file or --builtin".into(),
        }),
    }
}

fn execute(cli: &Cli) -> Result<Vec<Output>> {
    let wrap = |r: Result<String>, source: &str| r.map_err(|e| (source.to_string(), e));
    match &cli.command {
        Command::Classify(input) => classify_inputs(cli, input),
        Command::Convert { input, to } => {
            let loaded = single_input(input)?;
            Ok(vec![wrap(convert(&loaded, *to, cli), &loaded.source)])
        }
        Command::Extremal(input) => {
            let loaded = single_input(input)?;
            Ok(vec![wrap(extremal(&loaded, cli.json), &loaded.source)])
        }
        Command::Tmatrix { input, basis } => {
            let loaded = single_input(input)?;
            Ok(vec![wrap(
                tmatrix(&loaded, *basis, cli.json),
                &loaded.source,
            )])
        }
        Command::Simulate {
            input,
            state,
            samples,
        } => {
            let loaded = single_input(input)?;
            Ok(vec![wrap(
                simulate(&loaded, state.as_deref(), *samples, cli),
                &loaded.source,
            )])
        }
        Command::Builtins => Ok(vec![Ok(builtins(cli.json))]),
    }
}

fn classify_inputs(cli: &Cli, input: &Input) -> Result<Vec<Output>> {
    let mut sources: Vec<Option<&Path>> = input.files.iter().map(|p| Some(p.as_path())).collect();
    if input.builtin.is_some() {
        sources.insert(0, None);
    }
    if sources.is_empty() {
        return Err(Error::Parse {
            line: 0,
            column: 0,
            message: "expected spec files or --builtin".into(),
        });
    }
    let one = |src: &Option<&Path>| -> Output {
        let label = src.map_or_else(
            || format!("builtin {}", input.builtin.as_deref().unwrap_or_default()),
            |p| p.display().to_string(),
        );
        let loaded = match src {
            Some(p) => load_file(p),
            None => load_builtin(input.builtin.as_deref().unwrap_or_default()),
        };
        loaded
            .and_then(|l| classify_report(&l, cli))
            .map_err(|e| (label, e))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| sources.par_iter().map(one).collect()))
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
pub struct ChannelSummary {
    pub source: String,
    pub representation: &'static str,
    pub dim_in: usize,
    pub dim_out: usize,
    pub structural_class: String,
}

fn summary(l: &Loaded) -> ChannelSummary {
    ChannelSummary {
        source: l.source.clone(),
        representation: l.channel.representation(),
        dim_in: l.channel.dim_in(),
        dim_out: l.channel.dim_out(),
        structural_class: analyze_structure(&l.channel).class.to_string(),
    }
}

#[derive(Debug, Serialize)]
pub struct Evidence {
    pub choi_rank: usize,
    pub input_marginal_rank: usize,
    pub output_marginal_rank: usize,
    pub max_eigenvalue: f64,
    pub marginal_max_eigenvalue: f64,
    pub min_pt_eigenvalue: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diag_sum: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct WitnessReport {
    pub test: &'static str,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct CertificateReport {
    pub source: String,
    pub branches: usize,
    pub choi_residual: f64,
    pub holevo: ChannelSpec,
}

#[derive(Debug, Serialize)]
pub struct ClassifyReport {
    pub channel: ChannelSummary,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub evidence: Evidence,
    pub cpt_extreme: String,
    pub timing_ms: f64,
}

fn classify_report(l: &Loaded, cli: &Cli) -> Result<String> {
    let start = Instant::now();
    let opts = ClassifyOptions {
        ppt_tol: cli.tol,
        seed: cli.seed,
    };
    let verdict = classify_with(&l.channel, &opts)?;
    let diag = verdict.diagnostics();
    let diag_sum = diag_sum_if_qubit(&l.channel)?;
    let cpt = cpt_extremality(&l.channel.to_kraus()?);
    let report = ClassifyReport {
        channel: summary(l),
        verdict: verdict.status().to_string(),
        witness: verdict.witness().map(|w| WitnessReport {
            test: w.test_name(),
            detail: w.to_string(),
        }),
        certificate: verdict.certificate().map(|c| CertificateReport {
            source: c.source.to_string(),
            branches: c.holevo.len(),
            choi_residual: c.choi_residual,
            holevo: ChannelSpec::from_channel(&Channel::Holevo(c.holevo.clone())),
        }),
        reason: match &verdict {
            EbtVerdict::Undecided { reason, .. } => Some(reason.clone()),
            _ => None,
        },
        evidence: Evidence {
            choi_rank: diag.choi_rank,
            input_marginal_rank: diag.input_marginal_rank,
            output_marginal_rank: diag.output_marginal_rank,
            max_eigenvalue: diag.max_eigenvalue,
            marginal_max_eigenvalue: diag.marginal_max_eigenvalue,
            min_pt_eigenvalue: diag.min_pt_eigenvalue,
            diag_sum,
        },
        cpt_extreme: cpt.cpt_extreme.to_string(),
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    if cli.json {
        return Ok(json_line(&report));
    }
    let mut s = String::new();
    let c = &report.channel;
    let _ = writeln!(s, "source: {}", c.source);
    let _ = writeln!(
        s,
        "channel: {} form, {} -> {}, structural class {}",
        c.representation, c.dim_in, c.dim_out, c.structural_class
    );
    let _ = writeln!(s, "verdict: {}", report.verdict);
    if let Some(w) = &report.witness {
        let _ = writeln!(s, "witness: {}", w.detail);
    }
    if let Some(cert) = &report.certificate {
        let _ = writeln!(
            s,
            "certificate: {} rank-one branches from {} (Choi residual {:.2e})",
            cert.branches, cert.source, cert.choi_residual
        );
    }
    if let Some(r) = &report.reason {
        let _ = writeln!(s, "reason: {r}");
    }
    let e = &report.evidence;
    let _ = writeln!(
        s,
        "evidence: Choi rank {}, marginal ranks {}/{}, largest eigenvalue {:.6} (marginal bound {:.6}), smallest partial-transpose eigenvalue {:.3e}",
        e.choi_rank, e.input_marginal_rank, e.output_marginal_rank, e.max_eigenvalue, e.marginal_max_eigenvalue, e.min_pt_eigenvalue
    );
    if let Some(sum) = e.diag_sum {
        let _ = writeln!(s, "sum |t_jj| (j >= 1): {sum:.6}");
    }
    let _ = writeln!(s, "CPT-extreme: {}", report.cpt_extreme);
    Ok(s)
}

fn diag_sum_if_qubit(ch: &Channel) -> Result<Option<f64>> {
    if ch.dim_in() != 2 || ch.dim_out() != 2 {
        return Ok(None);
    }
    let t = transfer_matrix(ch, &gell_mann_basis(2)?)?;
    Ok(Some(ebt_diag_necessary(&t)?.1))
}

fn certificate_holevo(ch: &Channel, cli: &Cli) -> Result<HolevoChannel> {
    if let Channel::Holevo(h) = ch {
        return Ok(h.clone());
    }
    let opts = ClassifyOptions {
        ppt_tol: cli.tol,
        seed: cli.seed,
    };
    match classify_with(ch, &opts)? {
        EbtVerdict::Ebt { certificate, .. } => Ok(certificate.holevo),
        EbtVerdict::NotEbt { witness, .. } => Err(Error::NotEbt(witness.to_string())),
        EbtVerdict::Undecided { reason, .. } => Err(Error::Undecided(reason)),
    }
}

fn convert(l: &Loaded, to: Target, cli: &Cli) -> Result<String> {
    let converted = match to {
        // Holevo input keeps its rank-one operators so that a later
        // conversion back to Holevo form can read them off directly
        Target::Kraus => Channel::Kraus(match &l.channel {
            Channel::Kraus(k) => k.clone(),
            Channel::Holevo(h) => kraus_from_holevo(h),
            Channel::Choi(c) => kraus_from_choi(c)?,
        }),
        Target::Choi => Channel::Choi(choi_of(&l.channel)),
        Target::Holevo => Channel::Holevo(certificate_holevo(&l.channel, cli)?),
    };
    Ok(to_canonical_json(&ChannelSpecFile::new(
        ChannelSpec::from_channel(&converted),
    )))
}

#[derive(Debug, Serialize)]
pub struct TetrahedronSummary {
    pub povm_residual: f64,
    pub max_output_residual: f64,
    pub output_ranks: Vec<usize>,
    pub max_complementary_overlap: f64,
}

#[derive(Debug, Serialize)]
pub struct ExtremalReport {
    pub channel: ChannelSummary,
    pub cpt_extreme: String,
    pub gram_min_singular_value: f64,
    pub threshold: f64,
    pub kraus_rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cq_overlaps: Option<MatrixJson>,
    pub ebt: bool,
    pub ebt_extreme: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ebt_extreme_reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split_weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistency: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tetrahedron_check: Option<TetrahedronSummary>,
}

fn extremal(l: &Loaded, json: bool) -> Result<String> {
    let cpt = cpt_extremality(&l.channel.to_kraus()?);
    let hints = match ebt_extremality_hints(&l.channel) {
        Ok(h) => Some(h),
        Err(Error::NotEbt(_) | Error::Undecided(_)) => None,
        Err(e) => return Err(e),
    };
    let (ebt_extreme, reason, split) = match hints.as_ref().map(|h| &h.hint) {
        None => ("not applicable".to_string(), None, None),
        Some(EbtExtremeHint::Extreme(why)) => ("yes".to_string(), Some(why.clone()), None),
        Some(EbtExtremeHint::NotExtreme(split)) => (
            "no".to_string(),
            Some(format!(
                "explicit split into {} channels (residual {:.2e})",
                split.parts.len(),
                split.residual
            )),
            Some(split.weights.clone()),
        ),
        Some(EbtExtremeHint::Inconclusive) => ("inconclusive".to_string(), None, None),
    };
    let tetrahedron_check = hints
        .as_ref()
        .filter(|h| h.builtin == Some("tetrahedron"))
        .map(|_| {
            let r = verify_tetrahedron();
            TetrahedronSummary {
                povm_residual: r.povm_residual,
                max_output_residual: r
                    .pairs
                    .iter()
                    .map(|p| p.output_residual)
                    .fold(0.0, f64::max),
                output_ranks: r.pairs.iter().map(|p| p.output_rank).collect(),
                max_complementary_overlap: r
                    .pairs
                    .iter()
                    .map(|p| p.complementary_overlap)
                    .fold(0.0, f64::max),
            }
        });
    let report = ExtremalReport {
        channel: summary(l),
        cpt_extreme: cpt.cpt_extreme.to_string(),
        gram_min_singular_value: cpt.gram_min_singular_value,
        threshold: cpt.threshold,
        kraus_rank: cpt.kraus_rank,
        cq_overlaps: cpt.cq_overlap_matrix.as_ref().map(matrix_to_json),
        ebt: hints.is_some(),
        ebt_extreme,
        ebt_extreme_reason: reason,
        split_weights: split,
        consistency: hints.as_ref().and_then(|h| h.consistency),
        tetrahedron_check,
    };
    if json {
        return Ok(json_line(&report));
    }
    let mut s = String::new();
    let c = &report.channel;
    let _ = writeln!(s, "source: {}", c.source);
    let _ = writeln!(s, "structural class: {}", c.structural_class);
    let _ = writeln!(
        s,
        "CPT-extreme: {} (smallest singular value of the A_j^dagger A_k system {:.3e}, threshold {:.3e}, {} Kraus operators)",
        report.cpt_extreme, report.gram_min_singular_value, report.threshold, report.kraus_rank
    );
    if let Some(g) = &cpt.cq_overlap_matrix {
        let _ = writeln!(s, "CQ overlaps <psi_j|psi_k>:");
        s.push_str(&format_matrix(g));
    }
    let _ = writeln!(
        s,
        "entanglement breaking: {}",
        if report.ebt { "yes" } else { "no" }
    );
    match &report.ebt_extreme_reason {
        Some(r) => {
            let _ = writeln!(
                s,
                "extreme among entanglement-breaking channels: {} ({r})",
                report.ebt_extreme
            );
        }
        None => {
            let _ = writeln!(
                s,
                "extreme among entanglement-breaking channels: {}",
                report.ebt_extreme
            );
        }
    }
    if let Some(ok) = report.consistency {
        let _ = writeln!(
            s,
            "CPT-extreme and entanglement breaking implies extreme CQ: {}",
            if ok { "consistent" } else { "INCONSISTENT" }
        );
    }
    if let Some(t) = &report.tetrahedron_check {
        let _ = writeln!(
            s,
            "tetrahedron check: POVM residual {:.2e}, output residual {:.2e}, output ranks {:?}, complementary overlap {:.2e}",
            t.povm_residual, t.max_output_residual, t.output_ranks, t.max_complementary_overlap
        );
    }
    Ok(s)
}

#[derive(Debug, Serialize)]
pub struct TmatrixReport {
    pub channel: ChannelSummary,
    pub basis: &'static str,
    pub t: Vec<Vec<f64>>,
    pub rank: usize,
    pub first_row_residual: f64,
    pub trace_preserving: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diag_sum: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diag_condition_holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wu_residual: Option<f64>,
}

fn tmatrix(l: &Loaded, basis: BasisName, json: bool) -> Result<String> {
    let BasisName::Gellmann = basis;
    if l.channel.dim_in() != l.channel.dim_out() {
        return Err(Error::DimensionMismatch(format!(
            "transfer matrix needs equal input and output dimensions, got {} -> {}",
            l.channel.dim_in(),
            l.channel.dim_out()
        )));
    }
    let b = gell_mann_basis(l.channel.dim_in())?;
    let t = transfer_matrix(&l.channel, &b)?;
    let diag = (t.dim() == 2).then(|| ebt_diag_necessary(&t)).transpose()?;
    let wu_residual = match &l.channel {
        Channel::Holevo(h) => Some((wu_factorization(h, &b)?.product() - t.matrix()).norm()),
        _ => None,
    };
    let m = t.matrix();
    let report = TmatrixReport {
        channel: summary(l),
        basis: "gellmann",
        t: (0..m.nrows())
            .map(|i| m.row(i).iter().copied().collect())
            .collect(),
        rank: t.rank(),
        first_row_residual: t.first_row_residual(),
        trace_preserving: t.first_row_residual() <= 1e-9,
        diag_sum: diag.map(|d| d.1),
        diag_condition_holds: diag.map(|d| d.0),
        wu_residual,
    };
    if json {
        return Ok(json_line(&report));
    }
    let mut s = String::new();
    let _ = writeln!(s, "source: {}", report.channel.source);
    let _ = writeln!(s, "T (generalized Gell-Mann basis):");
    for row in &report.t {
        let cells: Vec<String> = row.iter().map(|x| format!("{:>10.6}", clean(*x))).collect();
        let _ = writeln!(s, "  {}", cells.join(" "));
    }
    let _ = writeln!(s, "rank(T): {}", report.rank);
    let _ = writeln!(
        s,
        "first row (1, 0, ..., 0): {} (residual {:.2e})",
        if report.trace_preserving { "yes" } else { "no" },
        report.first_row_residual
    );
    if let (Some(sum), Some(ok)) = (report.diag_sum, report.diag_condition_holds) {
        let _ = writeln!(
            s,
            "sum |t_jj| (j >= 1): {sum:.6} ({})",
            if ok {
                "necessary condition for entanglement breaking holds"
            } else {
                "exceeds 1: not entanglement breaking"
            }
        );
    }
    if let Some(r) = report.wu_residual {
        let _ = writeln!(s, "|W U^T - T|_F: {r:.2e}");
    }
    Ok(s)
}

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub channel: ChannelSummary,
    pub samples: u64,
    pub seed: u64,
    pub counts: Vec<u64>,
    pub empirical: MatrixJson,
    pub exact: MatrixJson,
    pub trace_distance: f64,
}

fn simulate(l: &Loaded, state: Option<&Path>, samples: u64, cli: &Cli) -> Result<String> {
    let h = certificate_holevo(&l.channel, cli)?;
    let rho = match state {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            parse_state(&text)?
        }
        None => DensityMatrix::pure(&PureState::new(basis_vector(h.dim_in(), 0))?),
    };
    let sim = simulate_measure_prepare(&h, &rho, samples, cli.seed)?;
    let exact = l.channel.apply(&rho)?;
    let distance = trace_distance(sim.empirical.matrix(), exact.matrix())?;
    let report = SimulateReport {
        channel: summary(l),
        samples,
        seed: cli.seed,
        counts: sim.outcome_counts.clone(),
        empirical: matrix_to_json(sim.empirical.matrix()),
        exact: matrix_to_json(exact.matrix()),
        trace_distance: distance,
    };
    if cli.json {
        return Ok(json_line(&report));
    }
    let mut s = String::new();
    let _ = writeln!(s, "source: {}", report.channel.source);
    let _ = writeln!(s, "samples: {samples}, seed: {}", cli.seed);
    let _ = writeln!(s, "outcome histogram:");
    for (k, &n) in report.counts.iter().enumerate() {
        let freq = n as f64 / samples as f64;
        let bar = "#".repeat((freq * 50.0).round() as usize);
        let _ = writeln!(s, "  {k:>3}: {n:>10} {freq:>8.5} {bar}");
    }
    let _ = writeln!(s, "empirical output:");
    s.push_str(&format_matrix(sim.empirical.matrix()));
    let _ = writeln!(s, "exact output:");
    s.push_str(&format_matrix(exact.matrix()));
    let _ = writeln!(s, "trace distance: {distance:.6}");
    Ok(s)
}

#[derive(Debug, Serialize)]
struct BuiltinEntry {
    name: &'static str,
    description: &'static str,
}

fn builtins(json: bool) -> String {
    if json {
        let list: Vec<BuiltinEntry> = format::BUILTINS
            .iter()
            .map(|&(name, description)| BuiltinEntry { name, description })
            .collect();
        return json_line(&list);
    }
    format::BUILTINS
        .iter()
        .map(|(name, desc)| format!("{name:<24} {desc}\n"))
        .collect()
}

fn clean(x: f64) -> f64 {
    if x.abs() < 5e-13 {
        0.0
    } else {
        x
    }
}

fn format_matrix(m: &ComplexMatrix) -> String {
    let complex = m.to_rows().iter().flatten().any(|z| clean(z.im) != 0.0);
    let mut s = String::new();
    for row in m.to_rows() {
        let cells: Vec<String> = row
            .iter()
            .map(|z| {
                if complex {
                    format!("{:>9.5}{:+.5}i", clean(z.re), clean(z.im))
                } else {
                    format!("{:>9.5}", clean(z.re))
                }
            })
            .collect();
        let _ = writeln!(s, "  {}", cells.join(" "));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("ebtkit").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn classify_builtins() {
        let (code, out, _) = run_args(&["classify", "--builtin", "tetrahedron"]);
        assert_eq!(code, 0);
        assert!(out.contains("verdict: EBT"));
        let (_, out, _) = run_args(&["classify", "--builtin", "identity:3"]);
        assert!(out.contains("verdict: NotEBT") && out.contains("Kraus-rank test"));
        let (_, out, _) = run_args(&["classify", "--builtin", "depolarizing:2:0.2", "--json"]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "EBT");
        assert!((v["evidence"]["diag_sum"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&["classify"]).0, 2);
        assert_eq!(run_args(&["frobnicate"]).0, 2);
        assert_eq!(run_args(&["classify", "/nonexistent/file.json"]).0, 2);
        assert_eq!(run_args(&["--help"]).0, 0);
    }

    #[test]
    fn convert_identity_to_holevo_fails() {
        let (code, _, err) = run_args(&["convert", "--builtin", "identity:2", "--to", "holevo"]);
        assert_eq!(code, 3);
        assert!(err.contains("not entanglement breaking"));
    }

    #[test]
    fn tmatrix_depolarizing() {
        let (code, out, _) = run_args(&["tmatrix", "--builtin", "depolarizing:2:0.5", "--json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["diag_sum"].as_f64().unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(v["diag_condition_holds"], false);
        assert!((v["t"][1][1].as_f64().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn extremal_trine4() {
        let (code, out, _) = run_args(&["extremal", "--builtin", "trine4"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("structural class: QC"));
        assert!(out.contains("CPT-extreme: no"));
    }

    #[test]
    fn simulate_is_seeded() {
        let a = run_args(&[
            "simulate",
            "--builtin",
            "tetrahedron",
            "--samples",
            "20000",
            "--seed",
            "3",
            "--json",
        ]);
        let b = run_args(&[
            "simulate",
            "--builtin",
            "tetrahedron",
            "--samples",
            "20000",
            "--seed",
            "3",
            "--json",
        ]);
        assert_eq!(a.0, 0);
        assert_eq!(a.1, b.1);
        let v: serde_json::Value = serde_json::from_str(&a.1).unwrap();
        assert!(v["trace_distance"].as_f64().unwrap() < 0.05);
    }
}
