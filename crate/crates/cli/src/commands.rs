use std::fs;
use std::path::{Path, PathBuf};

use envelope_core::convolution::{apply_system, convolve, ConvolutionContext, ConvolutionError, SystemPolynomial};
use envelope_core::extension::{
    cayley_adjacency, cayley_eigensystem, cayley_hint, ConnectionSet, ExtensionError,
};
use envelope_core::graph::{load_edge_list, load_edge_list_sized};
use envelope_core::linalg::to_complex;
use envelope_core::metrics::{pagerank, structural_report, MetricsError, StructuralReport};
use envelope_core::pipeline::{
    apply_filters, count_candidates, detect_duplicate_rows, emit_reports, line_closure,
    load_scorecards, run_enumeration, FilterOutcome, FilterSpec, FilterStatus, PipelineError,
    RunConfig,
};
use envelope_core::spectral::{AdmissibilityTolerances, SpectralError};
use envelope_core::{Digraph, Edge, EdgeListFormat, GraphError, Signal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::{Cli, Command, Global, GraphInput, Thresholds};

/// Largest relative disagreement tolerated by `repro-line`.
const LINE_TOLERANCE: f64 = 1e-9;
/// Largest Cayley diagonalization residual tolerated by `cayley`.
const CAYLEY_TOLERANCE: f64 = 1e-10;

pub enum Failure {
    Validation(String),
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<SpectralError> for Failure {
    fn from(e: SpectralError) -> Self {
        Failure::Numerical(e.to_string())
    }
}

impl From<ExtensionError> for Failure {
    fn from(e: ExtensionError) -> Self {
        match e {
            ExtensionError::Spectral(_) | ExtensionError::NoPerfectMatching { .. } => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<ConvolutionError> for Failure {
    fn from(e: ConvolutionError) -> Self {
        match e {
            ConvolutionError::Graph(g) => g.into(),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<MetricsError> for Failure {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::NonConvergence { .. } => Failure::Numerical(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| invalid(format!("{}: {e}", path.display()))
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable output"));
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable output");
    fs::write(path, text + "\n").map_err(io_err(path))
}

fn load_graph(input: &GraphInput) -> Result<Digraph> {
    let format = input.format.unwrap_or_else(|| EdgeListFormat::from_path(&input.graph));
    let g = match input.nodes {
        Some(n) => load_edge_list_sized(&input.graph, format, n),
        None => load_edge_list(&input.graph, format),
    }
    .map_err(|e| invalid(format!("{}: {e}", input.graph.display())))?;
    Ok(if input.reverse_edges { g.reversed() } else { g })
}

/// Whitespace or comma separated indices; `#` starts a comment.
fn read_row_set(path: &Path, n: usize) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut rows = Vec::new();
    for line in text.lines() {
        let content = line.split('#').next().unwrap_or("");
        for tok in content.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let r: usize = tok
                .parse()
                .map_err(|_| invalid(format!("{}: invalid row index `{tok}`", path.display())))?;
            if r >= n {
                return Err(invalid(format!("{}: row {r} out of range for {n} vertices", path.display())));
            }
            rows.push(r);
        }
    }
    rows.sort_unstable();
    rows.dedup();
    if rows.is_empty() {
        return Err(invalid(format!("{}: no row indices", path.display())));
    }
    Ok(rows)
}

fn tolerances(global: &Global) -> Result<AdmissibilityTolerances> {
    for (name, v) in [("--tol-zero", global.tol_zero), ("--tol-gap", global.tol_gap)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(AdmissibilityTolerances {
        zero: global.tol_zero,
        gap: global.tol_gap,
        ..AdmissibilityTolerances::default()
    })
}

fn restrict_rows(global: &Global, g: &Digraph) -> Result<Option<Vec<usize>>> {
    if let Some(path) = &global.restrict_rows {
        return read_row_set(path, g.n()).map(Some);
    }
    if global.detect_duplicate_rows {
        let rows = detect_duplicate_rows(g);
        if rows.is_empty() {
            return Err(invalid("--detect-duplicate-rows: the graph has no duplicate rows"));
        }
        log::info!("duplicate rows: {rows:?}");
        return Ok(Some(rows));
    }
    Ok(None)
}

fn config(global: &Global, thresholds: &Thresholds, g: &Digraph) -> Result<RunConfig> {
    if !(-1.0..=1.0).contains(&thresholds.tau_min) {
        return Err(invalid(format!("--tau-min must lie in [-1, 1], got {}", thresholds.tau_min)));
    }
    if !(thresholds.cond_max >= 1.0) {
        return Err(invalid(format!("--cond-max must be at least 1, got {}", thresholds.cond_max)));
    }
    let filter = FilterSpec {
        tau_min: thresholds.tau_min,
        cond_max: thresholds.cond_max,
        restrict_rows: restrict_rows(global, g)?,
        allow_multi: global.allow_multi,
        weight: global.weight,
    };
    filter.validate()?;
    Ok(RunConfig {
        filter,
        tolerances: tolerances(global)?,
        jobs: global.jobs,
        ..RunConfig::default()
    })
}

fn ensure_out(global: &Global) -> Result<&Path> {
    fs::create_dir_all(&global.out).map_err(io_err(&global.out))?;
    Ok(&global.out)
}

fn base_report(g: &Digraph, config: &RunConfig) -> Result<StructuralReport> {
    Ok(structural_report(g, None, &config.motifs, &config.pagerank)?)
}

fn filter_json(outcome: &FilterOutcome, base: &StructuralReport) -> serde_json::Value {
    json!({
        "status": outcome.status,
        "considered": outcome.considered,
        "tau_passing": outcome.tau_passing,
        "passing": outcome.selected.len(),
        "selected": outcome.selected.iter().map(|c| json!({
            "candidate_id": c.candidate_id,
            "tau": c.tau,
            "cond": c.cond,
        })).collect::<Vec<_>>(),
        "max_tau": outcome.max_tau.as_ref().map(|c| json!({
            "candidate_id": c.candidate_id,
            "tau": c.tau,
            "cond": c.cond,
        })),
        "targets": outcome.targets(base),
    })
}

fn filter_stage(g: &Digraph, config: &RunConfig, out: &Path) -> Result<(FilterOutcome, StructuralReport)> {
    let cards = load_scorecards(out)?;
    let outcome = apply_filters(&cards, &config.filter)?;
    let base = base_report(g, config)?;
    write_json(&out.join("filter.json"), &filter_json(&outcome, &base))?;
    Ok((outcome, base))
}

/// Filter the stored scorecards and write the figure files under `out/reports`.
fn report_stage(g: &Digraph, config: &RunConfig, out: &Path) -> Result<Option<Vec<PathBuf>>> {
    let cards = load_scorecards(out)?;
    let outcome = apply_filters(&cards, &config.filter)?;
    if outcome.status == FilterStatus::NoCandidates {
        return Ok(None);
    }
    let base = base_report(g, config)?;
    let selection = outcome.report_order(&base);
    let manifest = emit_reports(&selection, &cards, g, config, &out.join("reports"))?;
    Ok(Some(manifest.files))
}

fn print_manifest(files: Option<Vec<PathBuf>>) {
    match files {
        Some(files) => files.iter().for_each(|f| println!("{}", f.display())),
        None => println!("no candidates pass the filters; no reports written"),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let global = &cli.global;
    match &cli.command {
        Command::Enumerate {
            input,
            thresholds,
            count_only,
            limit,
            resume,
            no_cayley_hints,
        } => {
            let g = load_graph(input)?;
            let mut config = config(global, thresholds, &g)?;
            if *count_only {
                print_json(&count_candidates(&g, &config)?);
                return Ok(());
            }
            config.limit = *limit;
            config.resume = *resume;
            config.cayley_hints = !no_cayley_hints;
            let (summary, _) = run_enumeration(&g, &config, ensure_out(global)?)?;
            print_json(&summary);
        }
        Command::Filter { input, thresholds } => {
            let g = load_graph(input)?;
            let config = config(global, thresholds, &g)?;
            let (outcome, base) = filter_stage(&g, &config, &global.out)?;
            print_json(&filter_json(&outcome, &base));
        }
        Command::Report { input, thresholds } => {
            let g = load_graph(input)?;
            let config = config(global, thresholds, &g)?;
            print_manifest(report_stage(&g, &config, &global.out)?);
        }
        Command::Convolve { input, x, y, system } => {
            let g = load_graph(input)?;
            let ctx = ConvolutionContext::from_adjacency(&g.adjacency(), &tolerances(global)?)?;
            let x = Signal::parse(x, g.n())?;
            let result = match (y, system) {
                (Some(y), _) => convolve(&ctx, &x, &Signal::parse(y, g.n())?)?,
                (None, Some(h)) => {
                    let h = SystemPolynomial::parse(h).map_err(|e| invalid(format!("--system: {e}")))?;
                    apply_system(&ctx, &h, &x)?
                }
                (None, None) => return Err(invalid("one of --y or --system is required")),
            };
            println!("{result}");
        }
        Command::Metrics {
            input,
            reference,
            motifs,
        } => {
            let g = load_graph(input)?;
            let config = RunConfig::default();
            let reference_pr = match reference {
                Some(path) => {
                    let r = load_graph(&GraphInput {
                        graph: path.clone(),
                        format: input.format,
                        nodes: Some(g.n()),
                        reverse_edges: input.reverse_edges,
                    })?;
                    Some(pagerank(&r, &config.pagerank)?)
                }
                None => None,
            };
            print_json(&structural_report(&g, reference_pr.as_deref(), motifs, &config.pagerank)?);
        }
        Command::Cayley { n, gamma, graph } => {
            let tol = tolerances(global)?;
            if let Some(path) = graph {
                let g = load_graph(&GraphInput {
                    graph: path.clone(),
                    format: None,
                    nodes: None,
                    reverse_edges: false,
                })?;
                print_json(&cayley_hint(&g, global.weight, &tol)?);
                return Ok(());
            }
            let n = n.ok_or_else(|| invalid("--n is required"))?;
            let gamma = ConnectionSet::new(n, gamma.iter().copied())?;
            let sys = cayley_eigensystem(&gamma);
            let residual = sys.max_residual(&to_complex(&cayley_adjacency(&gamma).adjacency()));
            println!("j\tre\tim");
            for (j, z) in sys.values.iter().enumerate() {
                println!("{j}\t{:.12}\t{:.12}", z.re, z.im);
            }
            println!("verdict\t{}", envelope_core::spectral::spectrum_verdict(&sys.values, &tol));
            println!("dft_residual\t{residual:.3e}");
            if residual > CAYLEY_TOLERANCE {
                return Err(Failure::Numerical(format!(
                    "DFT does not diagonalize the Cayley digraph (residual {residual:.3e})"
                )));
            }
        }
        Command::ReproLine { n, weights } => {
            let rows = line_closure(*n, weights, &tolerances(global)?)?;
            println!("weight\tDelta\tdelta\tcond\tcond_numeric\tcond_formula\tmax_rel_err");
            let mut worst: f64 = 0.0;
            for r in &rows {
                let err = r.max_relative_error();
                worst = worst.max(err);
                println!(
                    "{}\t{:.10}\t{:.10}\t{:.10}\t{:.10}\t{:.10}\t{:.2e}",
                    r.weight, r.big_delta, r.delta, r.cond, r.cond_numeric, r.cond_formula, err
                );
            }
            if worst > LINE_TOLERANCE {
                return Err(Failure::Numerical(format!(
                    "closed forms disagree (relative error {worst:.3e})"
                )));
            }
        }
        Command::ReproFriendship { input, thresholds } => {
            let g = load_graph(input)?;
            let out = ensure_out(global)?;
            let mut unrestricted = config(global, thresholds, &g)?;
            unrestricted.filter.restrict_rows = None;
            let counts = count_candidates(&g, &unrestricted)?;
            write_json(&out.join("counts.json"), &counts)?;
            println!(
                "rank {} nullity {} row lists {} column lists {} total {}",
                counts.rank, counts.nullity, counts.row_lists, counts.col_lists, counts.total_inv
            );
            println!("zero columns {:?}", counts.mandatory_cols);

            let mut config = config(global, thresholds, &g)?;
            if config.filter.restrict_rows.is_none() {
                let rows = detect_duplicate_rows(&g);
                if !rows.is_empty() {
                    config.filter.restrict_rows = Some(rows);
                }
            }
            println!("restricting row lists to {:?}", config.filter.restrict_rows);
            let (summary, _) = run_enumeration(&g, &config, out)?;
            println!(
                "restricted: row lists {} total {} nonsingular {} without multi-edges {} admissible {}",
                summary.row_lists,
                summary.total_inv,
                summary.nonsingular,
                summary.considered - summary.multi_edge,
                summary.admissible
            );
            let (outcome, base) = filter_stage(&g, &config, out)?;
            println!("tau passing {} envelopes {}", outcome.tau_passing, outcome.selected.len());
            if let Some(best) = outcome.selected.first() {
                println!("best envelope {} tau {:?} cond {:?}", best.candidate_id, best.tau, best.cond);
            }
            if let Some(m) = &outcome.max_tau {
                println!("max tau {} tau {:?} cond {:?}", m.candidate_id, m.tau, m.cond);
            }
            if let Some(t) = outcome.targets(&base) {
                println!("targets pagerank {} motif {} core {}", t.pagerank, t.motif, t.core);
            }
            print_manifest(report_stage(&g, &config, out)?);
        }
        Command::Demo {
            n,
            p,
            tau_min,
            cond_max,
        } => {
            if *n < 2 {
                return Err(invalid("--n must be at least 2"));
            }
            if !(0.0..=1.0).contains(p) {
                return Err(invalid(format!("--p must lie in [0, 1], got {p}")));
            }
            let g = random_digraph(*n, *p, global.seed)?;
            let out = ensure_out(global)?;
            fs::write(out.join("demo_graph.json"), g.to_json() + "\n").map_err(io_err(out))?;
            let thresholds = Thresholds {
                tau_min: *tau_min,
                cond_max: *cond_max,
            };
            let config = config(global, &thresholds, &g)?;
            let (summary, _) = run_enumeration(&g, &config, out)?;
            print_json(&summary);
            if summary.evaluated > 0 {
                let (outcome, base) = filter_stage(&g, &config, out)?;
                print_json(&filter_json(&outcome, &base));
                print_manifest(report_stage(&g, &config, out)?);
            }
        }
    }
    Ok(())
}

/// Loop-free digraph with each ordered pair present with probability `p`.
fn random_digraph(n: usize, p: f64, seed: u64) -> Result<Digraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for s in 0..n {
        for d in 0..n {
            if s != d && rng.random_bool(p) {
                edges.push(Edge::unit(s, d));
            }
        }
    }
    Ok(Digraph::new(n, edges)?)
}
