//! Command-line front end: build transition graphs from the flow catalog or
//! expression files, persist them, and run the analyses with JSON reports
//! and optional PPM rasters.

mod raster;
mod report;
mod source;

use chainscope::class::CohomologyClass;
use chainscope::cone::{cone_equivalence_check, direction_cone};
use chainscope::cycles::{eulerian_reduce, open_walk_reduce};
use chainscope::error::Error as CsError;
use chainscope::lyapunov::{lyapunov_potential, prescribed_pre_lyapunov, real_alpha_potential};
use chainscope::quasi::{
    alpha_recurrent, face_rec_map, is_quasi_lyapunov, open_face, DEFAULT_DENOMINATOR_CAP,
};
use chainscope::recurrence::{chain_decompose, conley_order};
use chainscope::storage;
use clap::{Args, Parser, Subcommand};
use num::bigint::BigInt;
use num::rational::BigRational;
use report::Report;
use serde_json::json;
use source::GraphSource;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "chainscope", about = "chain-recurrence toolkit for torus flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a transition graph and persist it
    Build(BuildArgs),
    /// Build at doubled resolution and halved jump radius
    Refine(BuildArgs),
    /// Chain decomposition: recurrent nodes, chains, Conley order
    Rec(RecArgs),
    /// Quasi-Lyapunov test with certificate
    Qltest(AlphaArgs),
    /// Recurrent set of a class
    Arec(RecAlphaArgs),
    /// Direction cone with witnesses
    Cone(ConeArgs),
    /// Open faces of classes and their recurrent-set map
    Faces(FacesArgs),
    /// Equivariant Lyapunov potential
    Lyap(AlphaArgs),
    /// Pre-Lyapunov potential with prescribed chain values
    Prescribe(PrescribeArgs),
    /// Reduce a walk into simple pieces
    Reduce(ReduceArgs),
    /// Cone equivalence checks: circulation duality and orbit sampling
    VerifyAppendix(VerifyArgs),
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    source: GraphSource,
    /// output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// also write the JSON mirror of the graph
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RecArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long)]
    out: Option<PathBuf>,
    /// paint the recurrent set, one pixel per box (2-torus graphs)
    #[arg(long)]
    raster: Option<PathBuf>,
}

#[derive(Args)]
struct AlphaArgs {
    #[command(flatten)]
    source: GraphSource,
    /// class entries, comma separated; fractions switch to exact mode
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    /// snap floating entries to rationals before the verdict
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RecAlphaArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    raster: Option<PathBuf>,
}

#[derive(Args)]
struct ConeArgs {
    #[command(flatten)]
    source: GraphSource,
    /// probe budget for the support search
    #[arg(long)]
    probes: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FacesArgs {
    #[command(flatten)]
    source: GraphSource,
    /// one class per occurrence
    #[arg(long = "alpha", required = true, allow_hyphen_values = true)]
    alphas: Vec<String>,
    #[arg(long)]
    probes: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PrescribeArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    /// JSON file: {"chain_values": ["p/q", ...]} indexed by chain
    #[arg(long)]
    values: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    source: GraphSource,
    /// JSON file: {"edges": [edge ids]}
    #[arg(long)]
    walk: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, default_value_t = 16)]
    trials: usize,
    /// seeds for the orbit-closure sampling
    #[arg(long, default_value_t = 8)]
    orbit_samples: usize,
    /// orbit length for the closure sampling
    #[arg(long, default_value_t = 100.0)]
    orbit_length: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    // die quietly when a pipe closes, as line tools are expected to
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &CsError) -> u8 {
    match err {
        CsError::Io(_) | CsError::Json(_) | CsError::Format(_) | CsError::Version(_) => 4,
        CsError::NotQuasiLyapunov { .. }
        | CsError::Acyclic
        | CsError::InfeasiblePrescription { .. }
        | CsError::ApproxFailed(_)
        | CsError::LpInfeasible
        | CsError::NumericOverflow(_) => 3,
        _ => 2,
    }
}

fn parse_alpha(text: &str, exact: bool, dim: usize) -> Result<CohomologyClass, CsError> {
    let alpha = CohomologyClass::parse(text)?;
    if alpha.dimension() != dim {
        return Err(CsError::DimensionMismatch {
            expected: dim,
            got: alpha.dimension(),
        });
    }
    if exact && !alpha.is_rational() {
        let entries = alpha
            .as_f64()
            .iter()
            .map(|&x| chainscope::quasi::approx_rational(x, DEFAULT_DENOMINATOR_CAP))
            .collect();
        return CohomologyClass::rational(entries);
    }
    Ok(alpha)
}

fn run(cli: Cli) -> Result<(), CsError> {
    match cli.command {
        Command::Build(args) => {
            let mut report = Report::start("build", args.source.echo());
            let tg = args.source.build()?;
            let out_dir = report::ensure_dir(args.out.as_deref())?;
            let path = out_dir.join("graph.csgr");
            storage::save(&tg, &path)?;
            if args.json {
                let doc = storage::to_json(&tg);
                std::fs::write(
                    out_dir.join("graph.json"),
                    serde_json::to_string_pretty(&doc)?,
                )?;
            }
            println!(
                "built {} nodes, {} edges -> {}",
                tg.node_count(),
                tg.edge_count(),
                path.display()
            );
            report.finish(
                &tg,
                json!({
                    "nodes": tg.node_count(),
                    "edges": tg.edge_count(),
                    "graph_file": path.display().to_string(),
                }),
            );
            report.write(&out_dir)
        }
        Command::Refine(args) => {
            let mut report = Report::start("refine", args.source.echo());
            let tg = args.source.build_refined()?;
            let out_dir = report::ensure_dir(args.out.as_deref())?;
            let path = out_dir.join("graph.csgr");
            storage::save(&tg, &path)?;
            println!(
                "refined to {} nodes, {} edges -> {}",
                tg.node_count(),
                tg.edge_count(),
                path.display()
            );
            report.finish(
                &tg,
                json!({
                    "nodes": tg.node_count(),
                    "edges": tg.edge_count(),
                    "graph_file": path.display().to_string(),
                }),
            );
            report.write(&out_dir)
        }
        Command::Rec(args) => {
            let mut report = Report::start("rec", args.source.echo());
            let tg = args.source.load()?;
            let dec = chain_decompose(tg.digraph());
            let order = conley_order(&dec);
            let recurrent: Vec<u64> = (0..tg.node_count())
                .filter(|&v| dec.recurrent[v as usize])
                .collect();
            if let Some(path) = &args.raster {
                raster::write_node_set(&tg, &dec.recurrent, path)?;
            }
            println!(
                "{} recurrent nodes in {} chains",
                recurrent.len(),
                dec.chain_ids.len()
            );
            report.finish(&tg, dec.export_json(&order));
            report.write(&report::ensure_dir(args.out.as_deref())?)
        }
        Command::Qltest(args) => {
            let mut report = Report::start("qltest", args.source.echo_with_alpha(&args.alpha));
            let tg = args.source.load()?;
            let alpha = parse_alpha(&args.alpha, args.exact, tg.grid().dimension())?;
            let cert = is_quasi_lyapunov(tg.digraph(), &alpha)?;
            cert.revalidate(tg.digraph())?;
            println!(
                "verdict: {} (epsilon = {})",
                if cert.is_ql() { "QL" } else { "NotQL" },
                tg.epsilon()
            );
            let mut payload = cert.export_json(tg.epsilon());
            // refinement trend when the graph came from a flow build: a
            // NotQL verdict may flip at finer scales, a QL one is reported
            // per epsilon
            if args.source.graph.is_none() && args.source.flow.is_some() {
                let fine = args.source.build_refined()?;
                let fine_cert = is_quasi_lyapunov(fine.digraph(), &alpha)?;
                println!(
                    "refined verdict: {} (epsilon = {})",
                    if fine_cert.is_ql() { "QL" } else { "NotQL" },
                    fine.epsilon()
                );
                payload["refined"] = serde_json::json!({
                    "epsilon": fine.epsilon(),
                    "verdict": if fine_cert.is_ql() { "QL" } else { "NotQL" },
                });
            }
            report.finish(&tg, payload);
            report.write(&report::ensure_dir(args.out.as_deref())?)
        }
        Command::Arec(args) => {
            let mut report = Report::start("arec", args.source.echo_with_alpha(&args.alpha));
            let tg = args.source.load()?;
            let alpha = parse_alpha(&args.alpha, args.exact, tg.grid().dimension())?;
            let rec = alpha_recurrent(tg.digraph(), &alpha)?;
            if let Some(path) = &args.raster {
                raster::write_node_set(&tg, &rec.node_flags, path)?;
            }
            println!(
                "{} recurrent nodes in {} chains",
                rec.nodes.len(),
                rec.chains.len()
            );
            report.finish(
                &tg,
                json!({
                    "alpha": alpha.as_f64(),
                    "nodes": rec.nodes,
                    "chains": rec.chains,
                }),
            );
            report.write(&report::ensure_dir(args.out.as_deref())?)
        }
        Command::Cone(args) => {
            let mut report = Report::start("cone", args.source.echo());
            let tg = args.source.load()?;
            let cone = direction_cone(tg.digraph(), tg.epsilon(), args.probes)?;
            println!(
                "{} extreme rays, diameter {}",
                cone.rays.len(),
                cone.diameter()
            );
            report.finish(&tg, cone.export_json());
            report.write(&report::ensure_dir(args.out.as_deref())?)
        }
        Command::Faces(args) => {
            let mut report = Report::start("faces", args.source.echo());
            let tg = args.source.load()?;
            let cone = direction_cone(tg.digraph(), tg.epsilon(), args.probes)?;
            let mut faces = Vec::new();
            for text in &args.alphas {
                let alpha = parse_alpha(text, false, tg.grid().dimension())?;
                faces.push(open_face(tg.digraph(), &alpha, &cone)?);
            }
            let map = face_rec_map(tg.digraph(), &faces, &cone)?;
            println!(
                "{} faces, {} violations",
                map.entries.len(),
                map.violations.len()
            );
            report.finish(
                &tg,
                json!({
                    "cone": cone.export_json(),
                    "faces": map.entries.iter().map(|e| e.face.export_json()).collect::<Vec<_>>(),
                    "rec_sets": map.entries.iter().map(|e| e.rec_nodes.clone()).collect::<Vec<_>>(),
                    "violations": map.violations,
                }),
            );
            report.write(&report::ensure_dir(args.out.as_deref())?)
        }
        Command::Lyap(args) => {
            let mut report = Report::start("lyap", args.source.echo_with_alpha(&args.alpha));
            let tg = args.source.load()?;
            let alpha = parse_alpha(&args.alpha, args.exact, tg.grid().dimension())?;
            let potential = if alpha.is_rational() {
                match lyapunov_potential(tg.digraph(), &alpha)? {
                    Ok(p) => p,
                    Err(cycle) => {
                        return Err(CsError::NotQuasiLyapunov {
                            cycle_len: cycle.0.len(),
                        })
                    }
                }
            } else {
                let cone = direction_cone(tg.digraph(), tg.epsilon(), None)?;
                real_alpha_potential(tg.digraph(), &alpha, 1e-6, DEFAULT_DENOMINATOR_CAP, &cone)?
            };
            println!("strong potential on {} nodes", tg.node_count());
            report.finish(&tg, potential.export_json());
            report.write(&report::ensure_dir(args.out.as_deref())?)
        }
        Command::Prescribe(args) => {
            let mut report = Report::start("prescribe", args.source.echo_with_alpha(&args.alpha));
            let tg = args.source.load()?;
            let alpha = parse_alpha(&args.alpha, true, tg.grid().dimension())?;
            let doc: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(&args.values)?)?;
            let values = doc
                .get("chain_values")
                .and_then(|v| v.as_array())
                .ok_or_else(|| CsError::Parse("expected {\"chain_values\": [..]}".into()))?;
            let prescription = values
                .iter()
                .map(parse_rational_value)
                .collect::<Result<Vec<_>, _>>()?;
            match prescribed_pre_lyapunov(tg.digraph(), &alpha, &prescription)? {
                Ok(potential) => {
                    println!("pre potential extends the prescription");
                    report.finish(&tg, potential.export_json());
                    report.write(&report::ensure_dir(args.out.as_deref())?)
                }
                Err(witness) => Err(CsError::InfeasiblePrescription {
                    reason: format!(
                        "prescription increases from chain {} to chain {}",
                        witness.from_chain, witness.to_chain
                    ),
                    witness_len: witness.path.len(),
                }),
            }
        }
        Command::Reduce(args) => {
            let mut report = Report::start("reduce", args.source.echo());
            let tg = args.source.load()?;
            let doc: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(&args.walk)?)?;
            let walk: Vec<usize> = doc
                .get("edges")
                .and_then(|v| v.as_array())
                .ok_or_else(|| CsError::Parse("expected {\"edges\": [..]}".into()))?
                .iter()
                .map(|v| v.as_u64().map(|x| x as usize))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| CsError::Parse("edge ids must be integers".into()))?;
            let first = walk.first().copied().unwrap_or(0);
            let closed = !walk.is_empty()
                && tg.digraph().edge(*walk.last().unwrap()).dst == tg.digraph().edge(first).src;
            let payload = if closed {
                let pieces = eulerian_reduce(tg.digraph(), &walk)?;
                println!("closed walk -> {} simple cycles", pieces.len());
                json!({
                    "closed": true,
                    "pieces": pieces.iter().map(|p| json!({
                        "edges": p.edges,
                        "h": p.class.h,
                        "edge_count": p.class.edge_count,
                    })).collect::<Vec<_>>(),
                })
            } else {
                let (path, cycles) = open_walk_reduce(tg.digraph(), &walk)?;
                println!(
                    "open walk -> simple path of {} edges plus {} cycles",
                    path.edges.len(),
                    cycles.len()
                );
                json!({
                    "closed": false,
                    "path": { "edges": path.edges, "h": path.class.h },
                    "pieces": cycles.iter().map(|p| json!({
                        "edges": p.edges,
                        "h": p.class.h,
                        "edge_count": p.class.edge_count,
                    })).collect::<Vec<_>>(),
                })
            };
            report.finish(&tg, payload);
            report.write(&report::ensure_dir(args.out.as_deref())?)
        }
        Command::VerifyAppendix(args) => {
            let mut report = Report::start("verify-appendix", args.source.echo());
            let tg = args.source.load()?;
            let field = args.source.field()?;
            let check = cone_equivalence_check(
                &tg,
                field.as_ref(),
                args.trials,
                args.orbit_samples,
                args.orbit_length,
                0x5eed,
            )?;
            println!(
                "duality violations: {}, orbit samples outside hull: {}",
                check.duality_violations.len(),
                check.orbit_outside.len()
            );
            report.finish(&tg, serde_json::to_value(&check)?);
            report.write(&report::ensure_dir(args.out.as_deref())?)
        }
    }
}

fn parse_rational_value(v: &serde_json::Value) -> Result<BigRational, CsError> {
    if let Some(s) = v.as_str() {
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p
                .trim()
                .parse()
                .map_err(|_| CsError::Parse(format!("bad numerator {s:?}")))?;
            let q: i64 = q
                .trim()
                .parse()
                .map_err(|_| CsError::Parse(format!("bad denominator {s:?}")))?;
            if q == 0 {
                return Err(CsError::Parse("zero denominator".into()));
            }
            return Ok(BigRational::new(BigInt::from(p), BigInt::from(q)));
        }
        let n: i64 = s
            .trim()
            .parse()
            .map_err(|_| CsError::Parse(format!("bad value {s:?}")))?;
        return Ok(BigRational::from_integer(BigInt::from(n)));
    }
    if let Some(n) = v.as_i64() {
        return Ok(BigRational::from_integer(BigInt::from(n)));
    }
    Err(CsError::Parse(format!("bad prescription value {v}")))
}
