use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fusion_width::convert::{fusion_to_cw, prune_useless_vertices_certified};
use fusion_width::expr::{expression_stats, validate_expression, Expression};
use fusion_width::graph::{check_correspondence, isomorphic_small, try_evaluate, ConversionCertificate, LabeledGraph};
use fusion_width::isp::{brute_force_labeled_isp, extract_univariate, labeled_isp, IspError, DEFAULT_ORACLE_LIMIT};
use fusion_width::par;
use fusion_width::treedec::{parse_gr, parse_td, td_to_fusion, validate_td, TdError};

/// Evaluation refuses expressions creating more vertices than this.
const MAX_CREATIONS: u128 = 1 << 24;

#[derive(Parser, Debug)]
#[command(name = "fwtool", version, about = "Fusion-tree expression toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Input file; standard input when absent.
    #[arg(short, long, global = true)]
    input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Largest graph handed to the enumeration oracle.
    #[arg(long, global = true, default_value_t = DEFAULT_ORACLE_LIMIT as u64, value_parser = clap::value_parser!(u64).range(1..))]
    oracle_limit: u64,
    /// Largest graph checked by isomorphism search after a conversion.
    #[arg(long, global = true, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    iso_limit: u64,
    /// Use the oracle when the dynamic program rejects an instance.
    #[arg(long, global = true)]
    fallback_oracle: bool,
    /// Where to write the vertex correspondence of a conversion.
    #[arg(long, global = true)]
    certificate: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Evaluate an expression and print the graph in .gr format with a label dump.
    Eval(Batch),
    /// Independent-set polynomial of the graph of an expression.
    Isp {
        /// Also print the labeled polynomial.
        #[arg(long)]
        labeled: bool,
        #[command(flatten)]
        batch: Batch,
    },
    /// Independent-set polynomial of a .gr graph by enumeration.
    Oracle(Batch),
    /// Build a fusion-tree expression from a .gr graph and a .td decomposition.
    FromTd {
        /// The tree decomposition.
        #[arg(long)]
        td: PathBuf,
    },
    /// Convert an expression to clique-width form.
    ToCw(Batch),
    /// Localize merges and drop useless vertices.
    Normalize(Batch),
    /// Validate an expression, or a .gr graph against a decomposition.
    Check {
        /// Validate a tree decomposition of the input graph.
        #[arg(long)]
        td: Option<PathBuf>,
        /// Require clique-width form.
        #[arg(long)]
        cw: bool,
        #[command(flatten)]
        batch: Batch,
    },
    /// Expression statistics as key:value lines.
    Stats(Batch),
}

#[derive(Args, Debug, Clone)]
struct Batch {
    /// Further input files, processed concurrently.
    files: Vec<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn parse(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn unsupported(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }

    fn too_large(message: impl Into<String>) -> Self {
        Failure {
            code: 4,
            message: message.into(),
        }
    }
}

/// Output of one instance; validation failures still print their witness.
struct Outcome {
    text: String,
    code: u8,
}

type Step = Result<Outcome, Failure>;

fn ok(text: String) -> Step {
    Ok(Outcome { text, code: 0 })
}

fn read_source(path: Option<&Path>) -> Result<String, Failure> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| Failure::parse(format!("{}: {e}", p.display()))),
        None => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::parse(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn parse_expr(text: &str) -> Result<Expression, Failure> {
    text.parse::<Expression>().map_err(|e| Failure::parse(e.to_string()))
}

fn td_failure(e: TdError) -> Failure {
    match e {
        TdError::Invalid(_) | TdError::NotATree(_) => Failure::validation(e.to_string()),
        _ => Failure::parse(e.to_string()),
    }
}

fn eval_graph(e: &Expression) -> Result<LabeledGraph, Failure> {
    try_evaluate(e, MAX_CREATIONS).map_err(|err| Failure::too_large(err.to_string()))
}

fn write_certificate(common: &Common, cert: &ConversionCertificate) -> Result<(), Failure> {
    if let Some(p) = &common.certificate {
        fs::write(p, cert.to_text()).map_err(|e| Failure::parse(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

/// Re-checks a conversion: the certificate always, isomorphism on small graphs.
fn verify(common: &Common, input: &LabeledGraph, output: &Expression, cert: &ConversionCertificate) -> Result<(), Failure> {
    let out = eval_graph(output)?;
    match check_correspondence(input, &out, cert) {
        Ok(true) => {}
        Ok(false) => return Err(Failure::validation("conversion certificate does not hold")),
        Err(e) => return Err(Failure::validation(format!("conversion certificate: {e}"))),
    }
    if input.vertex_count() as u64 <= common.iso_limit {
        let a = input.with_uniform_label(fusion_width::LabelId::new(1).expect("positive"));
        let b = out.with_uniform_label(fusion_width::LabelId::new(1).expect("positive"));
        if !isomorphic_small(&a, &b, common.iso_limit as usize).unwrap_or(true) {
            return Err(Failure::validation("converted graph is not isomorphic to the input"));
        }
    }
    Ok(())
}

fn isp(common: &Common, text: &str, labeled: bool) -> Step {
    let e = parse_expr(text)?;
    let p = match labeled_isp(&e) {
        Ok(p) => p,
        Err(IspError::AdjacentMergeUnsupported { node }) if common.fallback_oracle => {
            let g = eval_graph(&e)?;
            brute_force_labeled_isp(&g, common.oracle_limit as usize).map_err(|err| match err {
                IspError::TooLarge { .. } => Failure::too_large(err.to_string()),
                _ => Failure::unsupported(format!("adjacent merge at node {node}: {err}")),
            })?
        }
        Err(err @ IspError::AdjacentMergeUnsupported { .. }) => return Err(Failure::unsupported(err.to_string())),
        Err(err) => return Err(Failure::validation(err.to_string())),
    };
    let uni = extract_univariate(&p).to_text();
    if labeled {
        ok(format!("{}\n{}", p.to_text(), uni))
    } else {
        ok(uni)
    }
}

fn oracle(common: &Common, text: &str) -> Step {
    let g = parse_gr(text).map_err(td_failure)?.to_labeled_graph();
    let p = brute_force_labeled_isp(&g, common.oracle_limit as usize).map_err(|e| Failure::too_large(e.to_string()))?;
    ok(extract_univariate(&p).to_text())
}

fn stats(text: &str) -> Step {
    let e = parse_expr(text)?;
    let s = expression_stats(&e);
    ok(format!(
        "node_count: {}\ndistinct_labels: {}\nmax_label: {}\nvertex_creations: {}\nhas_fuse: {}\nhas_multi_verts: {}\n",
        s.node_count, s.distinct_labels, s.max_label, s.vertex_creations, s.has_fuse, s.has_multi_verts
    ))
}

fn check(text: &str, td: Option<&Path>, cw: bool) -> Step {
    if let Some(td_path) = td {
        let g = parse_gr(text).map_err(td_failure)?;
        let td = parse_td(&read_source(Some(td_path))?).map_err(td_failure)?;
        let report = validate_td(&g, &td);
        if report.is_valid() {
            return ok("valid\n".to_string());
        }
        let text: String = report.violations.iter().map(|v| format!("{v}\n")).collect();
        return Ok(Outcome { text, code: 1 });
    }
    let e = parse_expr(text)?;
    let report = validate_expression(&e, cw);
    if report.is_valid() {
        return ok("valid\n".to_string());
    }
    let text: String = report.violations.iter().map(|v| format!("{v}\n")).collect();
    Ok(Outcome { text, code: 1 })
}

fn process(cmd: &Command, common: &Common, text: &str) -> Step {
    match cmd {
        Command::Eval(_) => {
            let e = parse_expr(text)?;
            ok(eval_graph(&e)?.to_gr(true))
        }
        Command::Isp { labeled, .. } => isp(common, text, *labeled),
        Command::Oracle(_) => oracle(common, text),
        Command::FromTd { td } => {
            let g = parse_gr(text).map_err(td_failure)?;
            let td = parse_td(&read_source(Some(td))?).map_err(td_failure)?;
            let (e, cert) = td_to_fusion(&g, &td).map_err(td_failure)?;
            verify(common, &g.to_labeled_graph(), &e, &cert)?;
            write_certificate(common, &cert)?;
            ok(format!("{e}\n"))
        }
        Command::ToCw(_) => {
            let e = parse_expr(text)?;
            let input = eval_graph(&e)?;
            let (out, cert) = fusion_to_cw(&e);
            verify(common, &input, &out, &cert)?;
            write_certificate(common, &cert)?;
            if validate_expression(&e, true).is_valid() {
                // already in clique-width form: echo the input unchanged
                return ok(text.to_string());
            }
            ok(format!("{out}\n"))
        }
        Command::Normalize(_) => {
            let e = parse_expr(text)?;
            let (out, cert) = prune_useless_vertices_certified(&e);
            write_certificate(common, &cert)?;
            ok(format!("{out}\n"))
        }
        Command::Check { td, cw, .. } => check(text, td.as_deref(), *cw),
        Command::Stats(_) => stats(text),
    }
}

fn batch_files(cmd: &Command) -> &[PathBuf] {
    match cmd {
        Command::Eval(b) | Command::Oracle(b) | Command::ToCw(b) | Command::Normalize(b) | Command::Stats(b) => &b.files,
        Command::Isp { batch, .. } | Command::Check { batch, .. } => &batch.files,
        Command::FromTd { .. } => &[],
    }
}

fn emit(common: &Common, text: &str) -> Result<(), Failure> {
    match &common.output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::parse(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::parse(format!("stdout: {e}")))
        }
    }
}

fn run(cli: &Cli) -> u8 {
    let mut inputs: Vec<Option<PathBuf>> = cli.common.input.iter().cloned().map(Some).collect();
    inputs.extend(batch_files(&cli.command).iter().cloned().map(Some));
    if inputs.is_empty() {
        inputs.push(None);
    }
    if inputs.len() > 1 && cli.common.certificate.is_some() {
        eprintln!("error: --certificate takes a single input");
        return 2;
    }
    let results = par::map(&inputs, |path| {
        read_source(path.as_deref()).and_then(|text| process(&cli.command, &cli.common, &text))
    });
    let mut code = 0;
    let mut text = String::new();
    let many = inputs.len() > 1;
    for (path, result) in inputs.iter().zip(results) {
        if many {
            let name = path.as_ref().map_or("-".to_string(), |p| p.display().to_string());
            text.push_str(&format!("# {name}\n"));
        }
        match result {
            Ok(o) => {
                text.push_str(&o.text);
                code = code.max(o.code);
            }
            Err(f) => {
                eprintln!("error: {}", f.message);
                code = code.max(f.code);
            }
        }
    }
    if let Err(f) = emit(&cli.common, &text) {
        eprintln!("error: {}", f.message);
        return code.max(f.code);
    }
    code
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    ExitCode::from(run(&cli))
}
