//! Command-line front end: mechanism and QBF file ingestion, analysis
//! subcommands, and text or JSON reports.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 parse error, 3 validation
//! error, 4 cross-check mismatch, 5 budget or size guard exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use respgap::error::Error;
use respgap::game::{default_controller, win_moralist};
use respgap::mechanism::{parse_mechanism_file, ActionProfile, Mechanism, DEFAULT_VAR_BUDGET};
use respgap::oracle;
use respgap::reduction::{parse_qbf_file, reduce, verify_reduction};
use respgap::responsibility::{compute_levels, gap_set, is_gap_free, min_gap_free_degree, MinDegree};

#[derive(Parser)]
#[command(
    name = "respgap",
    version,
    about = "Higher-order responsibility analysis for sequential decision-making mechanisms"
)]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Maximum total variable count for exhaustive enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_VAR_BUDGET,
          value_parser = clap::value_parser!(u32).range(1..=32))]
    budget: u32,

    /// Seed for randomized corpora; the analysis commands themselves are
    /// deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the constraint and per-agent responsibility bits under a
    /// profile.
    Eval {
        /// Mechanism file.
        mech: PathBuf,
        /// Action profile literal, e.g. `pa=1,pb=0`.
        #[arg(long)]
        profile: String,
        /// Highest responsibility order to report (default: agent count).
        #[arg(long)]
        degree: Option<usize>,
    },
    /// List the order-d responsibility gap and the responsible agents at
    /// every violating profile.
    Gap {
        mech: PathBuf,
        #[arg(long)]
        degree: usize,
        /// Cross-check against the syntactic oracle; mismatch exits 4.
        #[arg(long)]
        oracle: bool,
    },
    /// Decide order-d gap-freeness; prints a witness when the gap is
    /// non-empty.
    Gapfree {
        mech: PathBuf,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        oracle: bool,
    },
    /// Smallest order at which the mechanism is gap-free.
    Mindegree {
        mech: PathBuf,
        #[arg(long)]
        oracle: bool,
    },
    /// Build the canonical mechanism of a QBF instance.
    Reduce {
        qbf: PathBuf,
        /// Write the mechanism file here instead of stdout.
        #[arg(short)]
        out: Option<PathBuf>,
    },
    /// Check that a QBF's truth matches gap-freeness of its reduction.
    VerifyReduction { qbf: PathBuf },
    /// Compute the Moralist win set of the Devil/Moralist game.
    Game { mech: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::EmptyInput | Error::InvalidVarName(_) => 2,
            Error::BudgetExceeded { .. } | Error::FormulaTooLarge { .. } => 5,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Eval {
            mech,
            profile,
            degree,
        } => cmd_eval(&cli, mech, profile, *degree),
        Command::Gap {
            mech,
            degree,
            oracle,
        } => cmd_gap(&cli, mech, *degree, *oracle),
        Command::Gapfree {
            mech,
            degree,
            oracle,
        } => cmd_gapfree(&cli, mech, *degree, *oracle),
        Command::Mindegree { mech, oracle } => cmd_mindegree(&cli, mech, *oracle),
        Command::Reduce { qbf, out } => cmd_reduce(&cli, qbf, out.as_deref()),
        Command::VerifyReduction { qbf } => cmd_verify_reduction(&cli, qbf),
        Command::Game { mech } => cmd_game(&cli, mech),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })
}

fn load_mechanism(path: &Path) -> Result<Mechanism, Failure> {
    Ok(parse_mechanism_file(&read_file(path)?)?)
}

fn mechanism_json(m: &Mechanism) -> Value {
    json!({
        "agents": m.agent_count(),
        "families": m.families()
            .iter()
            .map(|f| f.iter().map(|v| v.as_str()).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "constraint": m.gamma().to_string(),
    })
}

fn profile_bits(s: &ActionProfile) -> Vec<u8> {
    s.flat_bits().iter().map(|&b| b as u8).collect()
}

fn cmd_eval(
    cli: &Cli,
    path: &Path,
    profile: &str,
    degree: Option<usize>,
) -> Result<(), Failure> {
    let mech = load_mechanism(path)?;
    let s = mech.parse_profile_literal(profile)?;
    let degree = degree.unwrap_or(mech.agent_count());
    let levels = compute_levels(&mech, degree, cli.budget)?;
    let idx = mech.index_of(&s)?;
    let gamma = mech.substitute(mech.gamma(), &s)?;
    let table: Vec<Vec<u8>> = (1..=mech.agent_count())
        .map(|agent| {
            (1..=degree)
                .map(|d| levels.resp(d, agent).get(idx) as u8)
                .collect()
        })
        .collect();
    if cli.json {
        println!(
            "{}",
            json!({
                "mechanism": mechanism_json(&mech),
                "degree": degree,
                "profile": profile_bits(&s),
                "gamma": gamma as u8,
                "responsibility": table,
            })
        );
    } else {
        println!("gamma: {}", gamma as u8);
        if degree > 0 {
            println!("responsibility orders 1..={degree}:");
            for (agent0, row) in table.iter().enumerate() {
                let bits: Vec<String> = row.iter().map(|b| b.to_string()).collect();
                println!("  agent {}: {}", agent0 + 1, bits.join(" "));
            }
        }
    }
    Ok(())
}

fn cmd_gap(cli: &Cli, path: &Path, degree: usize, oracle_check: bool) -> Result<(), Failure> {
    let mech = load_mechanism(path)?;
    let report = gap_set(&mech, degree, cli.budget)?;
    if oracle_check {
        let formula = oracle::build_gap_formula(&mech, degree)?;
        let expected: Vec<usize> = (0..mech.all_profiles(cli.budget)?.len())
            .filter(|&k| {
                mech.substitute(&formula, &mech.profile_at(k))
                    .expect("gap formula is closed over the mechanism variables")
            })
            .collect();
        let got: Vec<usize> = report
            .gap_profiles
            .iter()
            .map(|p| mech.index_of(p).expect("reported profiles fit the mechanism"))
            .collect();
        if expected != got {
            return Err(Failure {
                code: 4,
                message: format!(
                    "oracle mismatch: engine gap has {} profiles, oracle gap has {}",
                    got.len(),
                    expected.len()
                ),
            });
        }
    }
    let responsible: Vec<(String, Value, Vec<(usize, usize)>)> = report
        .per_profile_responsibility
        .iter()
        .filter(|(_, pairs)| !pairs.is_empty())
        .map(|(p, pairs)| {
            (
                mech.profile_literal(p).unwrap(),
                json!(profile_bits(p)),
                pairs.clone(),
            )
        })
        .collect();
    if cli.json {
        let pairs: Vec<Value> = responsible
            .iter()
            .flat_map(|(_, bits, pairs)| {
                pairs
                    .iter()
                    .map(move |(agent, order)| {
                        json!({"profile": bits, "agent": agent, "order": order})
                    })
            })
            .collect();
        println!(
            "{}",
            json!({
                "mechanism": mechanism_json(&mech),
                "degree": degree,
                "gap": report.gap_profiles.iter().map(profile_bits).collect::<Vec<_>>(),
                "responsible": pairs,
            })
        );
    } else {
        println!("degree: {degree}");
        println!("gap profiles ({}):", report.gap_profiles.len());
        for p in &report.gap_profiles {
            println!("  {}", mech.profile_literal(p).unwrap());
        }
        if !responsible.is_empty() {
            println!("responsible at violating profiles:");
            for (literal, _, pairs) in &responsible {
                let rendered: Vec<String> = pairs
                    .iter()
                    .map(|(agent, order)| format!("agent {agent} order {order}"))
                    .collect();
                println!("  {literal}: {}", rendered.join(", "));
            }
        }
    }
    Ok(())
}

fn cmd_gapfree(cli: &Cli, path: &Path, degree: usize, oracle_check: bool) -> Result<(), Failure> {
    let mech = load_mechanism(path)?;
    let verdict = is_gap_free(&mech, degree, cli.budget)?;
    if oracle_check {
        let oracle_verdict = oracle::oracle_check(&mech, degree)?;
        if oracle_verdict != verdict.gap_free {
            return Err(Failure {
                code: 4,
                message: format!(
                    "oracle mismatch: engine says gap_free={}, oracle says {}",
                    verdict.gap_free, oracle_verdict
                ),
            });
        }
    }
    if cli.json {
        println!(
            "{}",
            json!({
                "mechanism": mechanism_json(&mech),
                "degree": degree,
                "gap_free": verdict.gap_free,
                "witness": verdict.witness.as_ref().map(profile_bits),
            })
        );
    } else {
        println!("degree: {degree}");
        println!("gap-free: {}", if verdict.gap_free { "yes" } else { "no" });
        if let Some(w) = &verdict.witness {
            println!("witness: {}", mech.profile_literal(w).unwrap());
        }
    }
    Ok(())
}

fn cmd_mindegree(cli: &Cli, path: &Path, oracle_check: bool) -> Result<(), Failure> {
    let mech = load_mechanism(path)?;
    let result = min_gap_free_degree(&mech, cli.budget)?;
    if oracle_check {
        match result {
            MinDegree::Degree(d) => {
                if !oracle::oracle_check(&mech, d)? {
                    return Err(Failure {
                        code: 4,
                        message: format!("oracle mismatch: not gap-free at reported degree {d}"),
                    });
                }
                if d > 0 && oracle::oracle_check(&mech, d - 1)? {
                    return Err(Failure {
                        code: 4,
                        message: format!("oracle mismatch: already gap-free at degree {}", d - 1),
                    });
                }
            }
            MinDegree::Never => {
                // A satisfiable constraint is gap-free by the agent count.
                if oracle::oracle_check(&mech, mech.agent_count())? {
                    return Err(Failure {
                        code: 4,
                        message: "oracle mismatch: gap-free despite the never verdict".to_string(),
                    });
                }
            }
        }
    }
    if cli.json {
        let (degree, never) = match result {
            MinDegree::Degree(d) => (Some(d), false),
            MinDegree::Never => (None, true),
        };
        println!(
            "{}",
            json!({
                "mechanism": mechanism_json(&mech),
                "min_gap_free_degree": degree,
                "never": never,
            })
        );
    } else {
        match result {
            MinDegree::Degree(d) => println!("min gap-free degree: {d}"),
            MinDegree::Never => println!("min gap-free degree: never (constraint unsatisfiable)"),
        }
    }
    Ok(())
}

fn cmd_reduce(cli: &Cli, path: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let instance = parse_qbf_file(&read_file(path)?)?;
    let reduced = reduce(&instance);
    let file_text = reduced.mechanism.to_file_string();
    if let Some(out) = out {
        fs::write(out, &file_text).map_err(|e| Failure {
            code: 1,
            message: format!("{}: {e}", out.display()),
        })?;
    }
    if cli.json {
        println!(
            "{}",
            json!({
                "mechanism": mechanism_json(&reduced.mechanism),
                "degree": instance.degree(),
                "q_vars": reduced.q_vars.iter().map(|v| v.as_str()).collect::<Vec<_>>(),
            })
        );
    } else if let Some(out) = out {
        println!("wrote {}", out.display());
    } else {
        print!("{file_text}");
    }
    Ok(())
}

fn cmd_verify_reduction(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let instance = parse_qbf_file(&read_file(path)?)?;
    let report = verify_reduction(&instance, cli.budget)?;
    if cli.json {
        println!(
            "{}",
            json!({
                "qbf_truth": report.qbf_truth as u8,
                "gap_free": report.gap_free as u8,
                "agree": report.agree as u8,
            })
        );
    } else {
        println!("qbf_truth: {}", report.qbf_truth as u8);
        println!("gap_free: {}", report.gap_free as u8);
        println!("agree: {}", report.agree as u8);
    }
    if !report.agree {
        return Err(Failure {
            code: 4,
            message: "qbf truth and gap-freeness disagree".to_string(),
        });
    }
    Ok(())
}

fn cmd_game(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let mech = load_mechanism(path)?;
    let controller = default_controller(mech.agent_count());
    let win = win_moralist(&mech, &controller, cli.budget)?;
    let labels = win.labels();
    if cli.json {
        println!(
            "{}",
            json!({
                "mechanism": mechanism_json(&mech),
                "moralist_wins_root": win.contains_root(),
                "win_moralist": labels,
            })
        );
    } else {
        println!(
            "moralist wins from the root: {}",
            if win.contains_root() { "yes" } else { "no" }
        );
        println!("win(moralist) nodes ({}):", win.node_count());
        for (depth, level) in labels.iter().enumerate() {
            if !level.is_empty() {
                println!("  depth {depth}: {}", level.join(" "));
            }
        }
    }
    Ok(())
}
