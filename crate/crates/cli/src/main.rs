use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use forge_core::annotation_pipeline::mock::MockClient;
use forge_core::annotation_pipeline::{
    export, filter_candidate, read_candidates, read_records, run_pipeline, DirSink,
    GenerationPolicy, Route,
};
use forge_core::llm::{HttpClient, LlmClient};
use forge_core::metadata_serializer::serialize;
use forge_core::molgraph::{classify_difficulty_notation, emit_linear};
use forge_core::parse_name;
use forge_core::validation_service::mock::NameEchoValidator;
use forge_core::validation_service::{default_validator_route, serve, TaskStore, DEFAULT_PASS_K};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "forge",
    version,
    about = "Name parsing, structural metadata and description dataset tooling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Screen candidates and print one verdict per line.
    Filter {
        #[arg(long)]
        input: PathBuf,
    },
    /// Tokenize a name and build its structure.
    Parse { name: String },
    /// Print the metadata XML for a name.
    Metadata { name: String },
    /// Print the difficulty class of a structure notation.
    Classify { notation: String },
    /// Generate descriptions for candidates.
    Generate {
        #[arg(long)]
        input: PathBuf,
        /// Policy file; the built-in routing is used when omitted.
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Use the scripted generator with this script file instead of the model endpoint.
        #[arg(long)]
        mock: Option<PathBuf>,
    },
    /// Write a run's records as JSON lines.
    Export {
        /// Directory written by `generate`.
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        only_passed: bool,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load passing records into a validation store and run model validation.
    Validate {
        /// Directory written by `generate`.
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PASS_K)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        concurrency: usize,
        /// Model and effort, e.g. "gpt-5.2 medium".
        #[arg(long)]
        route: Option<String>,
        /// Reconstruct from mock-generated descriptions instead of calling the model endpoint.
        #[arg(long)]
        mock: bool,
    },
    /// Serve the validator HTTP API over a store.
    Serve {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
    /// Print the validation report for a store.
    Report {
        #[arg(long)]
        store: PathBuf,
    },
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Filter { input } => {
            let out = io::stdout();
            let mut out = out.lock();
            let (mut accepted, mut total) = (0, 0);
            for c in
                read_candidates(&input).with_context(|| format!("reading {}", input.display()))?
            {
                let v = filter_candidate(&c);
                total += 1;
                accepted += usize::from(v.accepted);
                serde_json::to_writer(
                    &mut out,
                    &json!({ "id": c.id, "accepted": v.accepted, "reason": v.reason }),
                )?;
                writeln!(out)?;
            }
            eprintln!("{accepted} of {total} accepted");
        }
        Command::Parse { name } => {
            let parsed = parse_name(&name)?;
            print_json(&json!({
                "name": name,
                "tokens": parsed.tokens,
                "notation": emit_linear(&parsed.graph)?,
                "heavyAtoms": parsed.graph.heavy_atom_count(),
            }))?;
        }
        Command::Metadata { name } => print!("{}", serialize(&parse_name(&name)?.tree)),
        Command::Classify { notation } => println!("{}", classify_difficulty_notation(&notation)?),
        Command::Generate {
            input,
            policy,
            out,
            mock,
        } => {
            let policy = match policy {
                Some(p) => fs::read_to_string(&p)
                    .with_context(|| format!("reading {}", p.display()))?
                    .parse::<GenerationPolicy>()?,
                None => GenerationPolicy::default(),
            };
            let client: Box<dyn LlmClient> = match mock {
                Some(script) => Box::new(
                    MockClient::from_script(&fs::read_to_string(&script)?)
                        .map_err(anyhow::Error::msg)?,
                ),
                None => Box::new(HttpClient::from_env()?),
            };
            let candidates =
                read_candidates(&input).with_context(|| format!("reading {}", input.display()))?;
            let mut sink = DirSink::create(&out)?;
            let report = run_pipeline(candidates, &policy, client.as_ref(), &mut sink);
            print_json(&report)?;
        }
        Command::Export {
            run,
            only_passed,
            out,
        } => {
            let n = match out {
                Some(path) => {
                    let mut w = BufWriter::new(File::create(&path)?);
                    let n = export(&run, only_passed, &mut w)?;
                    w.flush()?;
                    n
                }
                None => export(&run, only_passed, &mut io::stdout().lock())?,
            };
            eprintln!("exported {n} records");
        }
        Command::Validate {
            run,
            store,
            k,
            concurrency,
            route,
            mock,
        } => {
            let route = match route {
                Some(r) => {
                    let Some((model, effort)) = r.trim().rsplit_once(char::is_whitespace) else {
                        bail!("route must be \"<model> <effort>\"");
                    };
                    Route {
                        model: model.trim().into(),
                        effort: effort.into(),
                    }
                }
                None => default_validator_route(),
            };
            let client: Box<dyn LlmClient> = if mock {
                Box::new(NameEchoValidator)
            } else {
                Box::new(HttpClient::from_env()?)
            };
            let store = TaskStore::open(&store)?;
            let mut added = 0;
            for r in read_records(&run)?
                .into_iter()
                .filter(|r| r.atom_match_passed)
            {
                if store.get(&r.id).is_err() {
                    store.add_task(&r.id, &r.description, r.difficulty, &r.reference_notation)?;
                    added += 1;
                }
            }
            let validated = store.run_llm_validation(client.as_ref(), k, &route, concurrency)?;
            store.snapshot()?;
            eprintln!("added {added} tasks, model-validated {validated}");
            print_json(&store.report())?;
        }
        Command::Serve { store, addr } => {
            let store = Arc::new(TaskStore::open(&store)?);
            let runtime = tokio::runtime::Runtime::new()?;
            eprintln!("listening on http://{addr}");
            runtime.block_on(serve(store, addr))?;
        }
        Command::Report { store } => print_json(&TaskStore::open(&store)?.report())?,
    }
    Ok(())
}
