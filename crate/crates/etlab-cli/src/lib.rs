//! The `etlab` command line: configuration-driven batch verification of
//! Einstein-type structures, catalog listing, and a per-point tensor
//! microscope.
//!
//! Exit codes: 0 all identities pass, 1 an identity failed, 2 configuration
//! error, 3 numeric or domain error during evaluation.

pub mod config;
pub mod describe;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use etlab_core::catalog;
use etlab_core::error::CoreError;
use etlab_core::geometry::convention_self_test;
use etlab_core::suites;

use config::{ConfigFile, ReportFormat};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_IDENTITY_FAILURE: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;
pub const EXIT_NUMERIC_ERROR: i32 = 3;

#[derive(Parser)]
#[command(
    name = "etlab",
    about = "Curvature tensors and residual certification for Einstein-type structures",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites from a JSON config file.
    Run {
        /// Path to the config file.
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of sample points.
        #[arg(long)]
        samples: Option<usize>,
        /// Override the jet truncation order.
        #[arg(long = "jet-order")]
        jet_order: Option<usize>,
        /// Report format: text or json.
        #[arg(long, value_parser = ["text", "json"])]
        report: Option<String>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in structure catalog.
    ListCatalog {
        #[arg(long)]
        json: bool,
    },
    /// Print every curvature object and residual of a catalog structure at
    /// one point.
    Describe {
        /// Catalog entry name.
        name: String,
        /// Parameter overrides, repeatable: --param n=5
        #[arg(long = "param", value_parser = parse_key_value)]
        params: Vec<(String, f64)>,
        /// Evaluation point, comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Jet truncation order.
        #[arg(long = "jet-order", default_value_t = 6)]
        jet_order: usize,
        #[arg(long)]
        json: bool,
    },
}

fn parse_key_value(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let value: f64 = v
        .parse()
        .map_err(|_| format!("parameter `{k}` has a non-numeric value `{v}`"))?;
    Ok((k.to_string(), value))
}

fn exit_code_for(e: &CoreError) -> i32 {
    match e {
        CoreError::Parse { .. }
        | CoreError::InvalidArgument(_)
        | CoreError::UnknownCatalogEntry(_) => EXIT_CONFIG_ERROR,
        _ => EXIT_NUMERIC_ERROR,
    }
}

fn fail(e: &CoreError) -> i32 {
    eprintln!("error: {e}");
    exit_code_for(e)
}

/// Entry point shared by the binary and the integration tests.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message; usage errors exit 2
            let code = if e.use_stderr() { EXIT_CONFIG_ERROR } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Run {
            config,
            seed,
            samples,
            jet_order,
            report,
            out,
        } => run_command(config, seed, samples, jet_order, report, out),
        Command::ListCatalog { json } => list_catalog_command(json),
        Command::Describe {
            name,
            params,
            point,
            jet_order,
            json,
        } => describe::describe_command(&name, &params, &point, jet_order, json),
    }
}

fn run_command(
    config_path: PathBuf,
    seed: Option<u64>,
    samples: Option<usize>,
    jet_order: Option<usize>,
    report: Option<String>,
    out: Option<PathBuf>,
) -> i32 {
    let text = match std::fs::read_to_string(&config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return EXIT_CONFIG_ERROR;
        }
    };
    let mut parsed: ConfigFile = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => {
            // serde_json errors carry line and column
            eprintln!(
                "error: config parse error at {}:{}: {e}",
                e.line(),
                e.column()
            );
            return EXIT_CONFIG_ERROR;
        }
    };
    if let Some(s) = seed {
        parsed.seed = s;
    }
    if let Some(s) = samples {
        parsed.samples = s;
    }
    if let Some(k) = jet_order {
        parsed.jet_order = k;
    }
    if let Some(r) = report {
        parsed.report_format = if r == "text" {
            ReportFormat::Text
        } else {
            ReportFormat::Json
        };
    }
    let spec = match parsed.build_run_spec() {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    if let Err(e) = convention_self_test() {
        eprintln!("error: {e}");
        return EXIT_NUMERIC_ERROR;
    }
    let run_report = match suites::run(&spec) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let rendered = match parsed.report_format {
        ReportFormat::Json => format!("{}\n", run_report.to_json()),
        ReportFormat::Text => run_report.to_text(),
    };
    if let Some(path) = out {
        if let Err(e) = std::fs::write(&path, rendered.as_bytes()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_NUMERIC_ERROR;
        }
    } else {
        print!("{rendered}");
    }
    if run_report.overall_pass {
        EXIT_PASS
    } else {
        EXIT_IDENTITY_FAILURE
    }
}

fn list_catalog_command(json: bool) -> i32 {
    let entries = catalog::entries();
    if json {
        let doc: Vec<serde_json::Value> = entries
            .iter()
            .map(|e| {
                let params: BTreeMap<&str, f64> = e.params.iter().copied().collect();
                serde_json::json!({
                    "name": e.name,
                    "params": params,
                    "summary": e.summary,
                })
            })
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({ "catalog": doc }))
                .expect("catalog serialization")
        );
    } else {
        for e in &entries {
            let params: Vec<String> = e
                .params
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            println!("{:<22} [{}]", e.name, params.join(", "));
            println!("    {}", e.summary);
        }
    }
    EXIT_PASS
}
