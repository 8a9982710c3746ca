//! `rumflow` command-line interface.
//!
//! Machine-readable JSON goes to standard output, a one-line human summary
//! to standard error. Exit codes: 0 success (including non-unique
//! verdicts), 2 malformed input, 3 not rationalizable, 4 cap exceeded.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use rumflow::decomposition::DEFAULT_ORDERING_CAP;
use rumflow::flow::{to_dot, DotOptions, FlowDiagram};
use rumflow::io::{
    branching_witness_json, mixture_from_json, mixture_to_json, scrum_json, system_from_json,
    system_to_json, theorem2_witness_json, to_pretty, trace_json, violation_json,
};
use rumflow::oracle::exhaustive_uniqueness;
use rumflow::{
    alternative_representations, build_flow_diagram, enumerate_representations,
    find_branching_pair, greedy_representation, induce_choice_system, is_rationalizable,
    scrum_check, support_identified, theorem2_check, ChoiceSystem, Error, ExogenousOrder, Mixture,
    Rationalizability, SupportVerdict, Theorem2Verdict, Universe,
};

#[derive(Parser)]
#[command(
    name = "rumflow",
    version,
    about = "Uniqueness analysis for random utility data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Choice system induced by a distribution over orders
    Induce {
        #[arg(long)]
        dist: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Block–Marschak non-negativity test
    Check {
        #[arg(long)]
        system: String,
    },
    /// Branching-path uniqueness test on a choice system
    Unique {
        #[arg(long)]
        system: String,
        #[arg(long, hide = true)]
        oracle: bool,
    },
    /// Contour-set uniqueness test on a distribution
    Theorem2 {
        #[arg(long)]
        dist: String,
    },
    /// Whether every representation has the same support
    Support {
        #[arg(long)]
        system: String,
    },
    /// Greedy path-flow representation
    Represent {
        #[arg(long)]
        system: String,
        /// Comma-separated order whose path is decomposed first
        #[arg(long, value_delimiter = ',')]
        seed_order: Option<Vec<String>>,
        #[arg(long)]
        trace: bool,
    },
    /// Two representations with different supports, when they exist
    Alternatives {
        #[arg(long)]
        system: String,
        /// Also write PREFIX.1.json and PREFIX.2.json
        #[arg(long)]
        write: Option<String>,
    },
    /// Candidate extreme points from path-priority decompositions
    Extreme {
        #[arg(long)]
        system: String,
        #[arg(long, default_value_t = DEFAULT_ORDERING_CAP)]
        cap: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
    },
    /// Single-crossing check against an exogenous order
    Scrum {
        #[arg(long)]
        dist: String,
        #[arg(long, value_delimiter = ',', required = true)]
        order: Vec<String>,
    },
    /// Graphviz export of the probability flow diagram
    Dot {
        #[arg(long)]
        system: String,
        #[arg(long)]
        reduced: bool,
        /// Include zero-weight edges
        #[arg(long)]
        all_edges: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Core(Error),
    Io(String),
    Violation(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// A finished command: stdout payload, stderr summary, exit code.
struct Outcome {
    stdout: String,
    summary: String,
    code: u8,
}

impl Outcome {
    fn json(value: &Value, summary: impl Into<String>) -> Self {
        Self {
            stdout: to_pretty(value),
            summary: summary.into(),
            code: 0,
        }
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Io(format!("{path}: {e}")))
    }
}

fn load_system(path: &str) -> Result<ChoiceSystem, Failure> {
    Ok(system_from_json(&read_input(path)?)?)
}

fn load_mixture(path: &str) -> Result<Mixture, Failure> {
    Ok(mixture_from_json(&read_input(path)?)?)
}

/// Flow diagram of a rationalizable system; otherwise a labeled violation.
fn rationalizable_diagram(sys: &ChoiceSystem) -> Result<FlowDiagram, Failure> {
    match is_rationalizable(sys) {
        Rationalizability::Yes => Ok(build_flow_diagram(sys)),
        Rationalizability::No(v) => Err(Failure::Violation(violation_json(sys.universe(), &v))),
    }
}

fn parse_order(universe: &Universe, labels: &[String]) -> Result<rumflow::LinearOrder, Failure> {
    Ok(universe.order_from_labels(labels)?)
}

fn run(command: Command) -> Result<Outcome, Failure> {
    match command {
        Command::Induce { dist, output } => {
            let mix = load_mixture(&dist)?;
            let text = to_pretty(&system_to_json(&induce_choice_system(&mix)));
            let summary = format!(
                "induced a choice system on {} alternatives from {} orders",
                mix.universe().len(),
                mix.support_len()
            );
            Ok(match output {
                Some(path) => {
                    fs::write(&path, text)?;
                    Outcome {
                        stdout: String::new(),
                        summary,
                        code: 0,
                    }
                }
                None => Outcome {
                    stdout: text,
                    summary,
                    code: 0,
                },
            })
        }
        Command::Check { system } => {
            let sys = load_system(&system)?;
            Ok(match is_rationalizable(&sys) {
                Rationalizability::Yes => {
                    Outcome::json(&json!({ "rationalizable": true }), "rationalizable")
                }
                Rationalizability::No(v) => {
                    let value = json!({
                        "rationalizable": false,
                        "violation": violation_json(sys.universe(), &v),
                    });
                    Outcome {
                        code: 3,
                        ..Outcome::json(&value, "not rationalizable: negative Block–Marschak value")
                    }
                }
            })
        }
        Command::Unique { system, oracle } => {
            let sys = load_system(&system)?;
            let diag = rationalizable_diagram(&sys)?;
            let mut value = match find_branching_pair(&diag)? {
                None => json!({ "verdict": "unique" }),
                Some(w) => json!({
                    "verdict": "non-unique",
                    "witness": branching_witness_json(sys.universe(), &w),
                }),
            };
            if oracle {
                value["oracle"] = match exhaustive_uniqueness(&diag) {
                    Ok(v) if v.is_unique() => json!("unique"),
                    Ok(_) => json!("non-unique"),
                    Err(e) => json!(format!("unavailable: {e}")),
                };
            }
            let summary = format!(
                "representation is {}",
                value["verdict"].as_str().unwrap_or("")
            );
            Ok(Outcome::json(&value, summary))
        }
        Command::Theorem2 { dist } => {
            let mix = load_mixture(&dist)?;
            let value = match theorem2_check(&mix) {
                Theorem2Verdict::Unique => json!({ "verdict": "unique" }),
                Theorem2Verdict::NonUnique(w) => json!({
                    "verdict": "non-unique",
                    "witness": theorem2_witness_json(mix.universe(), &w),
                }),
            };
            let summary = format!(
                "distribution is {}",
                value["verdict"].as_str().unwrap_or("")
            );
            Ok(Outcome::json(&value, summary))
        }
        Command::Support { system } => {
            let sys = load_system(&system)?;
            rationalizable_diagram(&sys)?;
            let value = match support_identified(&sys)? {
                SupportVerdict::Identified => json!({ "verdict": "identified" }),
                SupportVerdict::NotIdentified {
                    first,
                    second,
                    witness,
                } => json!({
                    "verdict": "not-identified",
                    "first": mixture_to_json(&first),
                    "second": mixture_to_json(&second),
                    "witness": branching_witness_json(sys.universe(), &witness),
                }),
            };
            let summary = format!("support is {}", value["verdict"].as_str().unwrap_or(""));
            Ok(Outcome::json(&value, summary))
        }
        Command::Represent {
            system,
            seed_order,
            trace,
        } => {
            let sys = load_system(&system)?;
            let seed = seed_order
                .map(|labels| parse_order(sys.universe(), &labels).map(|o| o.to_path()))
                .transpose()?;
            let diag = rationalizable_diagram(&sys)?;
            let (mix, steps) = greedy_representation(&diag, seed.as_ref())?;
            let summary = format!("representation with {} orders", mix.support_len());
            let value = if trace {
                json!({
                    "mixture": mixture_to_json(&mix),
                    "trace": trace_json(sys.universe(), &steps),
                })
            } else {
                mixture_to_json(&mix)
            };
            Ok(Outcome::json(&value, summary))
        }
        Command::Alternatives { system, write } => {
            let sys = load_system(&system)?;
            let diag = rationalizable_diagram(&sys)?;
            let Some(w) = find_branching_pair(&diag)? else {
                return Ok(Outcome::json(
                    &json!({ "verdict": "unique" }),
                    "representation is unique; no alternatives exist",
                ));
            };
            let (first, second) = alternative_representations(&diag, &w)?;
            let (first, second) = (mixture_to_json(&first), mixture_to_json(&second));
            if let Some(prefix) = write {
                fs::write(format!("{prefix}.1.json"), to_pretty(&first))?;
                fs::write(format!("{prefix}.2.json"), to_pretty(&second))?;
            }
            let value = json!({
                "verdict": "non-unique",
                "first": first,
                "second": second,
                "witness": branching_witness_json(sys.universe(), &w),
            });
            Ok(Outcome::json(
                &value,
                "two representations with different supports",
            ))
        }
        Command::Extreme {
            system,
            cap,
            rng_seed,
        } => {
            let sys = load_system(&system)?;
            let e = enumerate_representations(&rationalizable_diagram(&sys)?, cap, rng_seed)?;
            let value = json!({
                "representations": e.representations.iter().map(mixture_to_json).collect::<Vec<_>>(),
                "supported_paths": e.supported_paths,
                "orderings_tried": e.orderings_tried,
                "exhaustive": e.exhaustive,
            });
            let summary = format!(
                "{} distinct representations from {} orderings",
                e.representations.len(),
                e.orderings_tried
            );
            Ok(Outcome::json(&value, summary))
        }
        Command::Scrum { dist, order } => {
            let mix = load_mixture(&dist)?;
            let exo = ExogenousOrder::new(mix.universe(), parse_order(mix.universe(), &order)?)?;
            let verdict = scrum_check(&mix, &exo)?;
            let summary = if verdict.is_single_crossing() {
                "single-crossing"
            } else {
                "not single-crossing"
            };
            Ok(Outcome::json(
                &scrum_json(mix.universe(), &verdict),
                summary,
            ))
        }
        Command::Dot {
            system,
            reduced,
            all_edges,
            output,
        } => {
            let sys = load_system(&system)?;
            let dot = to_dot(&build_flow_diagram(&sys), DotOptions { reduced, all_edges })?;
            let summary = format!("{} edges", dot.matches("->").count());
            Ok(match output {
                Some(path) => {
                    fs::write(&path, dot)?;
                    Outcome {
                        stdout: String::new(),
                        summary,
                        code: 0,
                    }
                }
                None => Outcome {
                    stdout: dot,
                    summary,
                    code: 0,
                },
            })
        }
    }
}

fn failure_outcome(failure: Failure) -> Outcome {
    match failure {
        Failure::Violation(violation) => Outcome {
            stdout: to_pretty(&json!({ "rationalizable": false, "violation": violation })),
            summary: "error: not rationalizable: negative Block–Marschak value".to_string(),
            code: 3,
        },
        Failure::Io(msg) => Outcome {
            stdout: String::new(),
            summary: format!("error: {msg}"),
            code: 2,
        },
        Failure::Core(err) => {
            let code = match &err {
                Error::NotRationalizable(_) => 3,
                Error::Refused(_) => 4,
                _ => 2,
            };
            let value = json!({ "error": err.to_string() });
            Outcome {
                stdout: to_pretty(&value),
                summary: format!("error: {err}"),
                code,
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(cli.command).unwrap_or_else(failure_outcome);
    let mut stdout = io::stdout().lock();
    let _ = stdout.write_all(outcome.stdout.as_bytes());
    let _ = stdout.flush();
    eprintln!("{}", outcome.summary);
    ExitCode::from(outcome.code)
}
