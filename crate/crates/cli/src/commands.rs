use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use procap_core::bank::BankError;
use procap_core::reporting::render_report;
use procap_core::selection::{score_processes, SelectionInput, Weights};
use procap_core::survey::ResponseBatch;
use procap_core::{
    simulate, AssessmentId, CapabilityLevel, ContentBank, MeasurementConfig, ProcessId, ReportFormat,
    SimulationProfile, Store, StoreError,
};
use procap_service::ServiceConfig;
use serde_json::json;
use tracing_subscriber::filter::LevelFilter;

use crate::output::{self, emit};
use crate::{AssessmentCmd, BankCmd, Cli, Command, OutputMode, ReportCmd, UsageError};

struct Ctx {
    bank: Option<PathBuf>,
    data_dir: Option<PathBuf>,
}

impl Ctx {
    fn bank_path(&self) -> anyhow::Result<&Path> {
        self.bank
            .as_deref()
            .ok_or_else(|| UsageError("no content bank given (use --bank or BANK_PATH)".into()).into())
    }

    fn bank(&self) -> anyhow::Result<Arc<ContentBank>> {
        let path = self.bank_path()?;
        let bank = ContentBank::load_path(path).with_context(|| format!("loading bank {}", path.display()))?;
        Ok(Arc::new(bank))
    }

    fn store(&self) -> anyhow::Result<Store> {
        let dir = self
            .data_dir
            .as_deref()
            .ok_or_else(|| UsageError("no data directory given (use --data-dir or DATA_DIR)".into()))?;
        match Store::open(dir, self.bank()?) {
            Err(StoreError::Locked(p)) => {
                bail!("data directory {} is in use by another process (is the server running?)", p.display())
            }
            other => Ok(other?),
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let ctx = Ctx { bank: cli.bank, data_dir: cli.data_dir };
    match cli.command {
        Command::Bank(cmd) => bank(&ctx, cmd),
        Command::Select(args) => {
            let input: SelectionInput = read_json(&args.input)?;
            let weights = match args.weights {
                Some((i, g)) => Weights::new(i, g)?,
                None => Weights::default(),
            };
            let mut scores = score_processes(&input.drivers, &input.gaps, weights)?;
            if let Some(k) = args.top {
                scores.truncate(k);
            }
            match args.output {
                OutputMode::Text => print!("{}", output::scores_text(&scores)),
                OutputMode::Structured => output::json(&scores)?,
            }
            Ok(())
        }
        Command::Assessment(cmd) => assessment(&ctx, cmd),
        Command::Respond(args) => {
            let mut store = ctx.store()?;
            let batch: ResponseBatch = read_json(&args.file)?;
            let summary = store.import_batch(&AssessmentId(args.assessment), &batch, args.at.get())?;
            println!(
                "registered {} participants, recorded {} responses",
                summary.participants_registered, summary.responses_recorded
            );
            Ok(())
        }
        Command::Simulate(args) => {
            let profile: SimulationProfile = read_json(&args.profile)?;
            let mut store = ctx.store()?;
            let id = AssessmentId(args.assessment);
            let batch = simulate(store.bank(), store.assessment(&id)?, &profile, args.seed)?;
            let mut text = serde_json::to_string_pretty(&batch)?;
            text.push('\n');
            if let Some(out) = &args.out {
                emit(text.as_bytes(), Some(out))?;
            }
            if args.apply {
                let summary = store.import_batch(&id, &batch, args.at.get())?;
                eprintln!(
                    "registered {} participants, recorded {} responses",
                    summary.participants_registered, summary.responses_recorded
                );
            } else if args.out.is_none() {
                emit(text.as_bytes(), None)?;
            }
            Ok(())
        }
        Command::Progress(args) => {
            let store = ctx.store()?;
            let snap = store.assessment(&AssessmentId(args.assessment))?.progress(store.bank());
            match args.output {
                OutputMode::Text => print!("{}", output::progress_text(&snap)),
                OutputMode::Structured => output::json(&snap)?,
            }
            Ok(())
        }
        Command::Measure(args) => {
            let store = ctx.store()?;
            let results = store.measure(&AssessmentId(args.assessment), &MeasurementConfig::default())?;
            match args.output {
                OutputMode::Text => print!("{}", output::results_text(&results)),
                OutputMode::Structured => output::json(&results)?,
            }
            Ok(())
        }
        Command::Report(ReportCmd::Generate { assessment, format, out, at }) => {
            let format: ReportFormat = format.parse().map_err(|e| UsageError(format!("{e}")))?;
            let mut store = ctx.store()?;
            let id = AssessmentId(assessment);
            let report = match store.report(&id) {
                Ok(r) => r.clone(),
                Err(StoreError::NoReport(_)) => store.build_report(&id, &MeasurementConfig::default(), at.get())?,
                Err(e) => return Err(e.into()),
            };
            emit(&render_report(&report, format), out.as_deref())
        }
        Command::Serve(args) => serve(&ctx, args.port),
    }
}

fn bank(ctx: &Ctx, cmd: BankCmd) -> anyhow::Result<()> {
    match cmd {
        BankCmd::Validate { output } => {
            let path = ctx.bank_path()?;
            match ContentBank::load_path(path) {
                Ok(b) => {
                    match output {
                        OutputMode::Text => println!(
                            "valid: {} processes, {} questions, {} knowledge items (fingerprint {})",
                            b.processes().len(),
                            b.questions().len(),
                            b.knowledge_items().len(),
                            b.fingerprint()
                        ),
                        OutputMode::Structured => output::json(&json!({
                            "valid": true,
                            "fingerprint": b.fingerprint(),
                            "diagnostics": [],
                        }))?,
                    }
                    Ok(())
                }
                Err(BankError::Validation(diags)) => {
                    match output {
                        OutputMode::Text => {
                            for d in &diags {
                                println!("{d}");
                            }
                        }
                        OutputMode::Structured => output::json(&json!({
                            "valid": false,
                            "diagnostics": diags
                                .iter()
                                .map(|d| json!({"path": d.path, "message": d.message}))
                                .collect::<Vec<_>>(),
                        }))?,
                    }
                    bail!("bank has {} problem(s)", diags.len())
                }
                Err(e) => Err(e).with_context(|| format!("loading bank {}", path.display())),
            }
        }
        BankCmd::Stats { output } => {
            let stats = ctx.bank()?.stats();
            match output {
                OutputMode::Text => print!("{}", output::stats_text(&stats)),
                OutputMode::Structured => output::json(&stats)?,
            }
            Ok(())
        }
    }
}

fn assessment(ctx: &Ctx, cmd: AssessmentCmd) -> anyhow::Result<()> {
    let mut store = ctx.store()?;
    match cmd {
        AssessmentCmd::Create { id, org, processes, target, at } => {
            let processes = processes.iter().map(|p| ProcessId::new(p.trim())).collect();
            let target = CapabilityLevel::new(target).map_err(|e| UsageError(e.to_string()))?;
            let a = store.create_assessment(AssessmentId(id), &org, processes, target, at.get())?;
            println!("created assessment {} ({})", a.id(), a.state());
        }
        AssessmentCmd::Register { assessment, name, assignments, output } => {
            let pairs: Vec<_> = assignments.into_iter().map(|(p, r)| (ProcessId::new(p), r)).collect();
            let (p, token) = store.register_participant(&AssessmentId(assessment), &name, &pairs)?;
            match output {
                OutputMode::Text => {
                    println!("participant {}", p.id);
                    println!("token {}", token.expose());
                }
                OutputMode::Structured => output::json(&json!({"participant": p.id, "token": token.expose()}))?,
            }
        }
        AssessmentCmd::Open { assessment, at } => {
            store.open_assessment(&AssessmentId(assessment.clone()), at.get())?;
            println!("opened assessment {assessment}");
        }
        AssessmentCmd::Close { assessment, at } => {
            store.close_assessment(&AssessmentId(assessment.clone()), at.get())?;
            println!("closed assessment {assessment}");
        }
        AssessmentCmd::List { output } => {
            let rows: Vec<_> = store
                .assessments()
                .map(|a| {
                    json!({
                        "id": a.id(),
                        "org_profile": a.org_profile(),
                        "processes": a.processes(),
                        "target_level": a.target_level(),
                        "state": a.state(),
                        "participants": a.participants().len(),
                        "responses": a.response_count(),
                    })
                })
                .collect();
            match output {
                OutputMode::Text => {
                    for a in store.assessments() {
                        println!(
                            "{}  {}  {} participants  {} responses",
                            a.id(),
                            a.state(),
                            a.participants().len(),
                            a.response_count()
                        );
                    }
                }
                OutputMode::Structured => output::json(&rows)?,
            }
        }
    }
    Ok(())
}

fn serve(ctx: &Ctx, port: Option<u16>) -> anyhow::Result<()> {
    // RUST_LOG takes a single level here (error, warn, info, debug, trace).
    let level = std::env::var("RUST_LOG")
        .ok()
        .and_then(|v| v.parse::<LevelFilter>().ok())
        .unwrap_or(LevelFilter::INFO);
    tracing_subscriber::fmt().with_max_level(level).with_writer(std::io::stderr).init();
    let mut config = ServiceConfig::from_lookup(|k| match k {
        "BANK_PATH" => ctx.bank.as_ref().map(|p| p.display().to_string()),
        "DATA_DIR" => ctx.data_dir.as_ref().map(|p| p.display().to_string()),
        _ => std::env::var(k).ok(),
    })
    .map_err(|e| UsageError(e.to_string()))?;
    if let Some(p) = port {
        config.port = p;
    }
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(procap_service::serve(config))?;
    Ok(())
}
