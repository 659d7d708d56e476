use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gcgw_cli::problem::{self, Problem, SchemaError};
use gcgw_cli::report::Report;
use gcgw_cli::tasks::{self, Runner, TaskCall};
use gcgw_cli::fixtures;
use serde_json::{json, Value};

/// Exact generalized complex geometry checks on JSON problem files.
#[derive(Parser)]
#[command(name = "gcgw", version)]
struct Cli {
    /// Emit the JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Add decimal approximations of scalar results (not authoritative).
    #[arg(long, global = true)]
    approx: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FileArg {
    /// A problem file, or the name of a bundled fixture.
    file: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    D,
    #[value(name = "dL")]
    DL,
    #[value(name = "dLbar")]
    DLbar,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Principal,
    Vector,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks listed in the file.
    Run(FileArg),
    /// Structural checks for every block present.
    Check(FileArg),
    /// Type of the generalized complex structure.
    Type {
        #[command(flatten)]
        f: FileArg,
        #[arg(long)]
        expect: Option<usize>,
    },
    /// Calabi-Yau check of the pure spinor.
    Cy {
        #[command(flatten)]
        f: FileArg,
        #[arg(long)]
        strong: bool,
    },
    /// Transverse cohomology dimensions.
    Cohomology {
        #[command(flatten)]
        f: FileArg,
        #[arg(long, value_enum, default_value = "D")]
        flavor: FlavorArg,
    },
    /// Operator identities, Hodge star, adjoints, Kahler identities, duality.
    Hodge(FileArg),
    /// Atiyah cocycle and the search for a GH connection.
    Atiyah {
        #[command(flatten)]
        f: FileArg,
        #[arg(long, default_value_t = 4)]
        connection_bound: i64,
    },
    /// Chern-Weil form of the given degree.
    Chern {
        #[command(flatten)]
        f: FileArg,
        #[arg(long)]
        degree: usize,
        #[arg(long, value_enum, default_value = "vector")]
        convention: ConventionArg,
        /// Connection index, "chern[:N]", "zero" or "search[:BOUND]".
        #[arg(long)]
        connection: Option<String>,
    },
    /// Degree, dual and tensor products of a line bundle cocycle.
    Picard(FileArg),
    /// Bott formula for dim H^q(P^n, Omega^p(m)).
    Bott {
        #[arg(long)]
        n: i64,
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, default_value_t = 0)]
        p: i64,
        #[arg(long, default_value_t = 0)]
        q: i64,
    },
    /// Independent Cech computations.
    #[command(subcommand)]
    Oracle(Oracle),
    /// List the bundled fixtures.
    Fixtures,
}

#[derive(Subcommand)]
enum Oracle {
    /// Cech cohomology of Omega^p(m) on the projective line.
    P1 {
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long)]
        q: u8,
        #[arg(long, default_value_t = 0)]
        p: u8,
        #[arg(long)]
        truncation: Option<i64>,
    },
}

/// Writes to stdout; a closed pipe is not an error.
fn out(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn fail(json_mode: bool, code: u8, location: Option<&str>, message: &str) -> ExitCode {
    if json_mode {
        let v = json!({"schema": gcgw_cli::report::REPORT_SCHEMA, "error": {"location": location, "message": message}});
        out(&format!("{}\n", serde_json::to_string_pretty(&v).expect("serializes")));
    } else {
        match location {
            Some(l) => eprintln!("error: {}: {}", l, message),
            None => eprintln!("error: {}", message),
        }
    }
    ExitCode::from(code)
}

fn schema_fail(json_mode: bool, e: &SchemaError) -> ExitCode {
    fail(json_mode, 2, Some(&e.location), &e.message)
}

fn finish(cli: &Cli, mut report: Report) -> ExitCode {
    if cli.approx {
        report.add_approximations();
    }
    if cli.json {
        out(&format!("{}\n", report.to_json()));
    } else {
        out(&report.render());
    }
    ExitCode::from(report.exit_code() as u8)
}

fn load(cli: &Cli, arg: &str) -> Result<Problem, ExitCode> {
    let (name, text) = fixtures::source(arg).map_err(|m| fail(cli.json, 2, None, &m))?;
    let mut p = problem::load(&text).map_err(|e| schema_fail(cli.json, &e))?;
    if p.name == "problem" {
        p.name = name;
    }
    Ok(p)
}

/// Runs the given calls against a problem instead of its own task list.
fn run_calls(cli: &Cli, p: &Problem, calls: Vec<(&str, Vec<(&str, Value)>)>) -> ExitCode {
    let mut resolved: Vec<TaskCall> = Vec::new();
    for (name, params) in calls {
        let call = match tasks::call(name, &params) {
            Ok(c) => c,
            Err(e) => return schema_fail(cli.json, &e),
        };
        if let Err(e) = tasks::check_requirements(p, &call) {
            return schema_fail(cli.json, &e);
        }
        resolved.push(call);
    }
    let runner = Runner::new(p);
    let results = resolved.iter().map(|c| runner.run(c)).collect();
    finish(cli, Report::new(&p.name, results))
}

fn with_file(cli: &Cli, f: &FileArg, calls: impl FnOnce(&Problem) -> Vec<(&'static str, Vec<(&'static str, Value)>)>) -> ExitCode {
    match load(cli, &f.file) {
        Ok(p) => {
            let c = calls(&p);
            run_calls(cli, &p, c)
        }
        Err(code) => code,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(f) => match load(&cli, &f.file) {
            Ok(p) => finish(&cli, gcgw_cli::run_problem(&p)),
            Err(code) => code,
        },
        Command::Check(f) => with_file(&cli, f, |p| {
            let mut c = Vec::new();
            if p.lie.is_some() {
                c.push(("validate", vec![]));
            }
            if p.gcs.is_some() {
                c.push(("check_axioms", vec![]));
            }
            if p.has_splitting() {
                c.push(("build_operators", vec![]));
            }
            if p.bundle.is_some() {
                c.push(("validate_cocycle", vec![]));
                c.push(("check_gh_cocycle", vec![]));
            }
            c
        }),
        Command::Type { f, expect } => {
            let params = expect.map(|e| vec![("expect", json!(e))]).unwrap_or_default();
            with_file(&cli, f, |_| vec![("eigenbundle_and_type", params)])
        }
        Command::Cy { f, strong } => with_file(&cli, f, |_| {
            vec![("check_calabi_yau", vec![("strong", json!(strong))]), ("leaf_distribution", vec![])]
        }),
        Command::Cohomology { f, flavor } => {
            let name = match flavor {
                FlavorArg::D => "D",
                FlavorArg::DL => "dL",
                FlavorArg::DLbar => "dLbar",
            };
            with_file(&cli, f, |_| vec![("cohomology_dims", vec![("flavor", json!(name))])])
        }
        Command::Hodge(f) => with_file(&cli, f, |_| vec![("hodge_summary", vec![])]),
        Command::Atiyah { f, connection_bound } => with_file(&cli, f, |_| {
            vec![("atiyah_cocycles", vec![]), ("gh_connection_search", vec![("bound", json!(connection_bound))])]
        }),
        Command::Chern { f, degree, convention, connection } => {
            let mut params = vec![
                ("degree", json!(degree)),
                (
                    "convention",
                    json!(match convention {
                        ConventionArg::Principal => "principal",
                        ConventionArg::Vector => "vector",
                    }),
                ),
            ];
            if let Some(c) = connection {
                params.push(("connection", c.parse::<u64>().map(Value::from).unwrap_or_else(|_| json!(c))));
            }
            with_file(&cli, f, |_| vec![("chern_weil", params)])
        }
        Command::Picard(f) => with_file(&cli, f, |_| vec![("picard_ops", vec![])]),
        Command::Bott { n, m, p, q } => {
            let params = vec![("n", json!(n)), ("m", json!(m)), ("p", json!(p)), ("q", json!(q))];
            run_calls(&cli, &Problem::empty("bott"), vec![("bott_dims", params)])
        }
        Command::Oracle(Oracle::P1 { m, q, p, truncation }) => {
            let mut params = vec![("m", json!(m)), ("p", json!(p)), ("q", json!(q))];
            if let Some(t) = truncation {
                params.push(("truncation", json!(t)));
            }
            run_calls(&cli, &Problem::empty("oracle p1"), vec![("cech_oracle_p1", params)])
        }
        Command::Fixtures => match fixtures::all() {
            Ok(list) => {
                if cli.json {
                    let names: Vec<&str> = list.iter().map(|(n, _)| n.as_str()).collect();
                    out(&format!("{}\n", serde_json::to_string_pretty(&json!({"fixtures": names})).expect("serializes")));
                } else {
                    for (n, src) in &list {
                        let desc = serde_json::from_str::<Value>(src)
                            .ok()
                            .and_then(|v| v.get("description").and_then(|d| d.as_str()).map(str::to_string));
                        match desc {
                            Some(d) => out(&format!("{:<18} {}\n", n, d)),
                            None => out(&format!("{}\n", n)),
                        }
                    }
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(cli.json, 2, None, &format!("reading {}: {}", fixtures::ENV, e)),
        },
    }
}
