//! `spat`: assemble, describe, chat, validate, bench and serve.
//!
//! Exit codes: 0 valid, 1 invalid plan, 2 pipeline error, 3 usage error.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use spat_core::emit::{export_with_palette, ExportFormat};
use spat_core::plan_ir::parse_llm_output;
use spat_core::validate::validate;
use spat_core::{ColorTable, Diagnostic, IntersectionConfig};
use spat_gateway::{
    turn, ChatSession, CompletionConfig, HttpTransport, Language, PromptAssets, RecordingTransport,
    ReplayTransport, Transport,
};
use spat_workbench::bench::{run_bench, Source};
use spat_workbench::dataset::load_dataset;
use spat_workbench::pipeline::{assemble, Assembly};
use spat_workbench::server::{serve, AppState};

const VALID: u8 = 0;
const INVALID: u8 = 1;
const PIPELINE: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "spat",
    version,
    about = "Signal plan compiler and chat workbench"
)]
struct Cli {
    /// Intersection configuration (movements, conflicts, inter-green defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a plan IR file into a colour table.
    Assemble {
        #[arg(long)]
        ir: PathBuf,
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Send a plan description to the model and compile the reply.
    Describe {
        #[arg(long, conflicts_with = "file", required_unless_present = "file")]
        text: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, default_value = "en")]
        lang: String,
        #[arg(long, default_value = "text")]
        format: String,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Interactive session; prints the times table after each turn.
    Chat {
        #[arg(long, default_value = "en")]
        lang: String,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Check a colour table (json or csv export) for conflicts and walk times.
    Validate {
        #[arg(long)]
        table: PathBuf,
    },
    /// Exact-match evaluation over a case corpus.
    Bench {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 3)]
        runs: u32,
        #[arg(long, default_value_t = 4)]
        workers: usize,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// HTTP session API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[command(flatten)]
        model: ModelArgs,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// `live`, `replay:DIR` or `record:DIR`; `bench` also accepts `ir` (recorded plans).
    #[arg(long, default_value = "live")]
    transport: String,
    /// Completion settings (endpoint, model, temperature, retries) as JSON.
    #[arg(long)]
    completion: Option<PathBuf>,
    /// Directory holding `system.<lang>.md` prompts.
    #[arg(long)]
    prompts: Option<PathBuf>,
}

struct Fail(u8, String);

impl Fail {
    fn usage(message: impl ToString) -> Self {
        Fail(USAGE, message.to_string())
    }

    fn pipeline(message: impl ToString) -> Self {
        Fail(PIPELINE, message.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { VALID };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Fail> {
    let cfg = match &cli.config {
        Some(path) => IntersectionConfig::load(path).map_err(Fail::usage)?,
        None => IntersectionConfig::default(),
    };
    match cli.command {
        Command::Assemble { ir, format } => {
            let format = parse_format(&format)?;
            let text = read(&ir)?;
            let parsed = parse_llm_output(&text).map_err(Fail::pipeline)?;
            print_diagnostics(&parsed.warnings);
            let assembly = assemble_or_fail(&parsed.ir, &cfg)?;
            emit(&assembly, format, &cfg)
        }
        Command::Describe {
            text,
            file,
            lang,
            format,
            model,
        } => {
            let format = parse_format(&format)?;
            let lang: Language = lang.parse().map_err(Fail::usage)?;
            let text = match (text, file) {
                (Some(t), _) => t,
                (None, Some(f)) => read(&f)?,
                (None, None) => return Err(Fail::usage("either --text or --file is required")),
            };
            let text = text.trim();
            if text.is_empty() {
                return Err(Fail::usage("the description is empty"));
            }
            let model = Model::open(&model)?;
            let mut session = ChatSession::new(lang);
            let outcome = turn(
                &mut session,
                &model.assets,
                text,
                &model.completion,
                model.transport.as_ref(),
            )
            .map_err(Fail::pipeline)?;
            print_diagnostics(&outcome.warnings);
            let ir = outcome.result.map_err(|diags| {
                print_diagnostics(&diags);
                Fail::pipeline("the reply holds no usable plan")
            })?;
            let assembly = assemble_or_fail(&ir, &cfg)?;
            emit(&assembly, format, &cfg)
        }
        Command::Chat { lang, model } => {
            let lang: Language = lang.parse().map_err(Fail::usage)?;
            let model = Model::open(&model)?;
            chat(lang, &model, &cfg)
        }
        Command::Validate { table } => {
            let text = read(&table)?;
            let parsed = if text.trim_start().starts_with('{') {
                ColorTable::from_json(&text)
            } else {
                ColorTable::from_csv(&text)
            };
            let table = parsed.map_err(Fail::pipeline)?;
            let report = validate(&table, &cfg);
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            Ok(if report.is_valid() { VALID } else { INVALID })
        }
        Command::Bench {
            dataset,
            runs,
            workers,
            out,
            model,
        } => {
            if runs == 0 {
                return Err(Fail::usage("--runs must be at least 1"));
            }
            let cases = load_dataset(&dataset).map_err(Fail::usage)?;
            let report = if model.transport == "ir" {
                run_bench(&cases, runs, &cfg, Source::RecordedIr, workers)
            } else {
                let m = Model::open(&model)?;
                let source = Source::Chat {
                    transport: m.transport.as_ref(),
                    completion: &m.completion,
                    assets: &m.assets,
                };
                run_bench(&cases, runs, &cfg, source, workers)
            }
            .map_err(Fail::usage)?;
            let json = report.to_json();
            match out {
                Some(path) => std::fs::write(&path, &json)
                    .map_err(|e| Fail::usage(format!("{}: {e}", path.display())))?,
                None => print!("{json}"),
            }
            let summary: Vec<String> = report
                .overall
                .accuracy_per_run
                .iter()
                .map(|a| format!("{a:.4}"))
                .collect();
            eprintln!(
                "{} cases, accuracy per run [{}], mean {:.4}",
                report.overall.cases,
                summary.join(", "),
                report.overall.mean_accuracy
            );
            Ok(if report.overall.every_run_accuracy == 1.0 {
                VALID
            } else {
                INVALID
            })
        }
        Command::Serve { port, model } => {
            let m = Model::open(&model)?;
            let state = Arc::new(AppState::new(cfg, m.assets, m.completion, m.transport));
            let rt = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(Fail::usage)?;
            eprintln!("listening on 0.0.0.0:{port}");
            rt.block_on(serve(state, port)).map_err(Fail::usage)?;
            Ok(VALID)
        }
    }
}

struct Model {
    transport: Arc<dyn Transport>,
    completion: CompletionConfig,
    assets: PromptAssets,
}

impl Model {
    fn open(args: &ModelArgs) -> Result<Self, Fail> {
        let completion = match &args.completion {
            Some(path) => CompletionConfig::load(path).map_err(Fail::usage)?,
            None => CompletionConfig::default(),
        }
        .with_env();
        let assets = match &args.prompts {
            Some(dir) => PromptAssets::from_dir(dir).map_err(Fail::usage)?,
            None => PromptAssets::builtin(),
        };
        let live = || {
            HttpTransport::new(
                &completion.endpoint,
                completion.api_key.clone(),
                Duration::from_secs(completion.timeout_secs),
            )
            .map_err(Fail::usage)
        };
        let transport: Arc<dyn Transport> = match args.transport.split_once(':') {
            None if args.transport == "live" => Arc::new(live()?),
            Some(("replay", dir)) => {
                Arc::new(ReplayTransport::from_dir(Path::new(dir)).map_err(Fail::usage)?)
            }
            Some(("record", dir)) => Arc::new(RecordingTransport::new(live()?, dir)),
            _ => {
                return Err(Fail::usage(format!(
                    "unknown transport `{}`",
                    args.transport
                )))
            }
        };
        Ok(Model {
            transport,
            completion,
            assets,
        })
    }
}

fn chat(lang: Language, model: &Model, cfg: &IntersectionConfig) -> Result<u8, Fail> {
    let mut session = ChatSession::new(lang);
    let stdin = std::io::stdin();
    let mut last = VALID;
    prompt();
    for line in stdin.lock().lines() {
        let line = line.map_err(Fail::usage)?;
        let text = line.trim();
        if text.is_empty() {
            prompt();
            continue;
        }
        if text == "/quit" || text == "/exit" {
            break;
        }
        match turn(
            &mut session,
            &model.assets,
            text,
            &model.completion,
            model.transport.as_ref(),
        ) {
            Err(e) => eprintln!("error: {e}"),
            Ok(outcome) => {
                print_diagnostics(&outcome.warnings);
                match outcome.result {
                    Err(diags) => {
                        print_diagnostics(&diags);
                        eprintln!("the previous plan is kept; please rephrase");
                    }
                    Ok(ir) => match assemble(&ir, cfg) {
                        Ok(a) => {
                            last = emit(&a, ExportFormat::Text, cfg)?;
                            session.latest_table = Some(a.table);
                            session.latest_report = Some(a.report);
                        }
                        Err(e) => print_diagnostics(&e.all_diagnostics()),
                    },
                }
            }
        }
        prompt();
    }
    Ok(last)
}

fn prompt() {
    eprint!("> ");
    let _ = std::io::stderr().flush();
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail::usage(format!("{}: {e}", path.display())))
}

fn parse_format(s: &str) -> Result<ExportFormat, Fail> {
    s.parse().map_err(Fail::usage)
}

fn assemble_or_fail(ir: &spat_core::PlanIR, cfg: &IntersectionConfig) -> Result<Assembly, Fail> {
    assemble(ir, cfg).map_err(|e| {
        print_diagnostics(&e.diagnostics);
        Fail::pipeline(format!("[{}] {e}", e.code()))
    })
}

/// Prints the table to stdout, diagnostics and findings to stderr.
fn emit(a: &Assembly, format: ExportFormat, cfg: &IntersectionConfig) -> Result<u8, Fail> {
    print_diagnostics(&a.warnings);
    let bytes = export_with_palette(&a.table, format, &cfg.palette);
    let mut out = std::io::stdout().lock();
    out.write_all(&bytes).map_err(Fail::usage)?;
    out.flush().map_err(Fail::usage)?;
    for f in a.report.errors.iter().chain(&a.report.warnings) {
        eprintln!("{}: {}", f.code, f.message);
    }
    Ok(if a.report.is_valid() { VALID } else { INVALID })
}

fn print_diagnostics(diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{d}");
    }
}
