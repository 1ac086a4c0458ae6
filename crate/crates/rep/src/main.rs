use std::io::Read as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rep::bench::{bench_compile, bench_match};
use rep::formats;
use rep::service::{AssetPaths, Assets, IdSource, ManualClock, Service, ServiceOptions, SystemClock};
use rep::simulate::{simulate, UserPlan};
use rep::traits::TraitEngine;
use rep_core::pattern::{compile, CompileOptions, GapPolicy, Lemmatizer};
use rep_core::personality::{fit_trait, EmOptions, GeneratorSpec, SyntheticGenerator, TraitModel, TRAITS};
use serde_json::json;

#[derive(Parser)]
#[command(name = "rep", version, about = "Virtual interviewer: pattern compiler, trait model, interview service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a pattern table (`id<TAB>pattern` lines) into a matcher blob.
    Compile {
        #[arg(long)]
        patterns: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Implicit wildcard tokens allowed between elements; `none` for contiguous.
        #[arg(long, default_value = "3")]
        max_gap: String,
    },
    /// Time compilation of synthetic patterns.
    BenchCompile {
        #[arg(long, default_value_t = 100_000)]
        patterns: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Time matching of a synthetic message stream.
    BenchMatch {
        #[arg(long, default_value_t = 10_000)]
        patterns: usize,
        #[arg(long, default_value_t = 100_000_000)]
        tokens: u64,
        #[arg(long, default_value_t = 25)]
        message_len: usize,
        #[arg(long, default_value_t = 40_000)]
        pool: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Fit per-trait item parameters to an evidence corpus.
    Fit {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
    },
    /// Score a text on all traits.
    Infer {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Text file, or `-` for stdin.
        #[arg(long, default_value = "-")]
        text: PathBuf,
    },
    /// Sample a synthetic evidence corpus from random item parameters.
    GenCorpus {
        /// Draw parameters for this lexicon's items; otherwise synthetic cue words.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        items_per_trait: usize,
        #[arg(long, value_enum, default_value_t = Strength::Sparse)]
        strength: Strength,
        #[arg(long, default_value_t = 500)]
        users: usize,
        #[arg(long, default_value_t = 2000)]
        words: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the generating model.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Write the synthetic lexicon (when no lexicon is given).
        #[arg(long)]
        lexicon_out: Option<PathBuf>,
    },
    /// Run the HTTP interview service.
    Serve {
        #[arg(long, env = "REP_LISTEN", default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        #[arg(long, env = "REP_DATA_DIR", default_value = "rep-data")]
        data_dir: PathBuf,
        #[arg(long = "script", env = "REP_SCRIPTS", value_delimiter = ',', required = true)]
        scripts: Vec<PathBuf>,
        #[arg(long = "persona", env = "REP_PERSONAS", value_delimiter = ',', required = true)]
        personas: Vec<PathBuf>,
        #[arg(long, env = "REP_LEXICON")]
        lexicon: Option<PathBuf>,
        #[arg(long, env = "REP_MODEL")]
        model: Option<PathBuf>,
        #[arg(long, env = "REP_STATIC_DIR")]
        static_dir: Option<PathBuf>,
        /// Idle seconds before a session is marked abandoned.
        #[arg(long, env = "REP_SESSION_TTL")]
        session_ttl: Option<u64>,
    },
    /// Drive one interview with a scripted user and write its transcript and report.
    Simulate {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        persona: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Session store; a temporary directory when omitted.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        transcript: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Strength {
    Strong,
    Sparse,
}

fn print(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn gap_policy(s: &str) -> Result<GapPolicy> {
    if s == "none" {
        return Ok(GapPolicy::CONTIGUOUS);
    }
    Ok(GapPolicy::bounded(s.parse().with_context(|| format!("--max-gap takes a number or `none`, not `{s}`"))?))
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    Ok(formats::read_text(path)?)
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Compile { patterns, out, max_gap } => {
            let sources = formats::parse_patterns(&formats::read_text(&patterns)?)?;
            let opts = CompileOptions { gap_policy: gap_policy(&max_gap)?, ..Default::default() };
            let m = compile(&sources, Lemmatizer::Rules, &opts)?;
            formats::write_blob(&out, &m)?;
            print(&json!({ "out": out, "stats": m.stats() }));
        }
        Command::BenchCompile { patterns, seed } => {
            print(&serde_json::to_value(bench_compile(patterns, seed)?)?);
        }
        Command::BenchMatch { patterns, tokens, message_len, pool, seed } => {
            if message_len == 0 || pool == 0 {
                bail!("--message-len and --pool must be positive");
            }
            print(&serde_json::to_value(bench_match(patterns, tokens, message_len, pool, seed)?)?);
        }
        Command::Fit { corpus, lexicon, out, tol, max_iter } => {
            let lexicon = formats::parse_lexicon(&formats::read_text(&lexicon)?)?;
            let (ids, corpus) = formats::parse_corpus(&formats::read_text(&corpus)?)?;
            let lex_ids: Vec<String> = lexicon.entries().iter().map(|e| e.evidence_id.clone()).collect();
            if ids != lex_ids {
                bail!("the corpus evidence ids differ from the lexicon's");
            }
            let opts = EmOptions { tol, max_iter, ..Default::default() };
            let mut model = TraitModel::empty(ids);
            let mut reports = Vec::new();
            for (ti, t) in TRAITS.iter().enumerate() {
                let (params, r) = fit_trait(&corpus, &lexicon, t.id, &opts)?;
                model.traits[ti] = params;
                reports.push(json!({
                    "trait": t.id,
                    "items": model.traits[ti].items.len(),
                    "dropped": r.dropped,
                    "identifiable": r.identifiable,
                    "iterations": r.iterations,
                    "converged": r.converged,
                    "loglik": r.trace.last(),
                }));
            }
            model.validate()?;
            formats::write_file(&out, formats::format_model(&model))?;
            print(&json!({ "out": out, "users": corpus.users.len(), "traits": reports }));
        }
        Command::Infer { lexicon, model, text } => {
            let engine = TraitEngine::load(&lexicon, &model)?;
            let text = read_input(&text)?;
            let traits: Vec<_> = engine
                .score(&text)
                .into_iter()
                .map(|(id, s)| json!({ "trait": id, "theta": s.theta, "sd": s.sd, "evidence_used": s.evidence_used }))
                .collect();
            print(&json!({ "word_count": rep_core::text::word_count(&text), "traits": traits }));
        }
        Command::GenCorpus { lexicon, items_per_trait, strength, users, words, seed, out, truth, lexicon_out } => {
            let mut spec = match strength {
                Strength::Strong => GeneratorSpec::strong(&[], items_per_trait),
                Strength::Sparse => GeneratorSpec::all_traits(items_per_trait),
            };
            spec.traits = TRAITS.iter().map(|t| t.id.to_string()).collect();
            let g = match &lexicon {
                Some(p) => SyntheticGenerator::random_over(formats::parse_lexicon(&formats::read_text(p)?)?, &spec, seed)?,
                None => SyntheticGenerator::random(&spec, seed)?,
            };
            let sample = g.generate(users, words, seed.wrapping_add(1), false);
            formats::write_file(&out, formats::format_corpus(&g.model.evidence_ids, &sample.corpus))?;
            if let Some(t) = &truth {
                formats::write_file(t, formats::format_model(&g.model))?;
            }
            if let Some(l) = &lexicon_out {
                formats::write_file(l, formats::format_lexicon(&g.lexicon))?;
            }
            print(&json!({ "out": out, "users": users, "items": g.lexicon.len(), "words": words, "truth": truth }));
        }
        Command::Serve { listen, data_dir, scripts, personas, lexicon, model, static_dir, session_ttl } => {
            let assets = Assets::load(&AssetPaths { scripts, personas, lexicon, model })?;
            let opts = ServiceOptions { session_ttl_ms: session_ttl.map(|s| s * 1000), ..Default::default() };
            let svc = Arc::new(Service::open(&data_dir, assets, Arc::new(SystemClock), IdSource::Os, opts)?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                if let Some(ttl) = session_ttl {
                    let sweeper = svc.clone();
                    tokio::spawn(async move {
                        let mut tick = tokio::time::interval(Duration::from_secs(ttl.clamp(1, 60)));
                        loop {
                            tick.tick().await;
                            let s = sweeper.clone();
                            if let Ok(Err(e)) = tokio::task::spawn_blocking(move || s.sweep()).await {
                                eprintln!("{}", json!({ "warning": format!("abandonment sweep: {e}") }));
                            }
                        }
                    });
                }
                let listener = tokio::net::TcpListener::bind(listen).await?;
                eprintln!("{}", json!({ "listening": listener.local_addr()?.to_string() }));
                axum::serve(listener, rep::http::router(svc, static_dir))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                anyhow::Ok(())
            })?;
        }
        Command::Simulate { script, persona, plan, lexicon, model, seed, data_dir, transcript, report } => {
            let plan: UserPlan = toml::from_str(&formats::read_text(&plan)?).context("user plan")?;
            let script_id = script.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let persona_id = persona.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let assets = Assets::load(&AssetPaths { scripts: vec![script], personas: vec![persona], lexicon, model })?;
            let scratch;
            let dir = match data_dir {
                Some(d) => d,
                None => {
                    scratch = tempfile::tempdir()?;
                    scratch.path().to_path_buf()
                }
            };
            let svc = Service::open(
                &dir,
                assets,
                Arc::new(ManualClock::new(0, 1000)),
                IdSource::seeded(seed),
                ServiceOptions::default(),
            )?;
            let sim = simulate(&svc, &script_id, &persona_id, &plan)?;
            if let Some(p) = &transcript {
                formats::write_file(p, &sim.transcript)?;
            }
            if let Some(p) = &report {
                formats::write_file(p, serde_json::to_string_pretty(&sim.report)? + "\n")?;
            }
            print(&json!({
                "session_id": sim.session_id,
                "turns": sim.turns,
                "transcript": transcript,
                "report": sim.report,
            }));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": format!("{e:#}") }));
            ExitCode::FAILURE
        }
    }
}
