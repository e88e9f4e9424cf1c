use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use gapos::bwb::{bott_formula, bwb_cohomology, twists_to_weight, CohomologyTable, WeightVector};
use gapos::dsl::{parse, pretty_print, to_json_ast, validate};
use gapos::engine::{
    self, rule_catalog_hash, verify_split, Options, SplitInstance, DEFAULT_MAX_DEPTH,
};
use gapos::harness::{self, DEFAULT_SEED};
use gapos::schur::{
    check_construction, littlewood_richardson, monomial_expansion, schur_apply, schur_dim,
    schur_quotient,
};
use gapos::symalg::tensor_cap_from_env;
use gapos::{Partition, Rational};

const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "gad",
    version,
    about = "Schur-Weyl functors, Borel-Weil-Bott and the GA/positivity calculus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Schur-Weyl powers of a vector space.
    Schur {
        #[command(subcommand)]
        mode: SchurMode,
    },
    /// Cohomology of line bundles on full flag varieties.
    Bwb(BwbArgs),
    /// Parse a .gad file and print it back canonically or as a JSON AST.
    Parse {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Answer the queries of a .gad file.
    Derive(DeriveArgs),
    /// Run the seeded split-bundle soundness harness.
    Verify {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        necessity: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct ShapeArgs {
    #[arg(long, value_parser = parse_partition)]
    lambda: Partition,
    #[arg(long)]
    rank: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum SchurMode {
    /// Hook-content dimension of S^λ(C^e).
    Dim(ShapeArgs),
    /// Build the image of the Young symmetrizer and report its dimension.
    Construct(ShapeArgs),
    /// Dimension of the quotient by the image of 1 - e_λ.
    Quotient(ShapeArgs),
    /// Littlewood-Richardson decomposition of S^λ ⊗ S^μ.
    Lr {
        #[arg(long, value_parser = parse_partition)]
        lambda: Partition,
        #[arg(long, value_parser = parse_partition)]
        mu: Partition,
        #[arg(long)]
        json: bool,
    },
    /// Monomial expansion of the Schur polynomial in r variables.
    Monomial(ShapeArgs),
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct BwbArgs {
    #[command(subcommand)]
    bott: Option<BottCmd>,
    #[arg(long)]
    rank: Option<usize>,
    /// Comma-separated weight, e.g. `-1,1`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "twists")]
    weight: Option<String>,
    /// Comma-separated `k:a` pairs, the twist `π_k^* O(a)`.
    #[arg(long, allow_hyphen_values = true)]
    twists: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum BottCmd {
    /// H^q(P^n, Ω^p(k)).
    Bott {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct DeriveArgs {
    file: PathBuf,
    /// Answer only the N-th query (1-based).
    #[arg(long)]
    query: Option<usize>,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    explain: bool,
    #[arg(long)]
    pos_strict: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: usize,
    /// Split instantiation on P^n, e.g. `n=1;E=1,1;H=1`.
    #[arg(long, value_parser = parse_split)]
    verify_split: Option<SplitInstance>,
}

fn parse_partition(s: &str) -> Result<Partition, String> {
    s.parse::<Partition>().map_err(|e| e.to_string())
}

fn parse_split(s: &str) -> Result<SplitInstance, String> {
    s.parse()
}

fn parse_ints(s: &str) -> Result<Vec<i64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| format!("malformed integer `{}`", t.trim()))
        })
        .collect()
}

fn envelope(command: &str, inputs: Value, results: Value) -> String {
    let v = json!({
        "command": command,
        "inputs": inputs,
        "results": results,
        "version": env!("CARGO_PKG_VERSION"),
        "rule_catalog": rule_catalog_hash(),
    });
    serde_json::to_string_pretty(&v).expect("json")
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Schur { mode } => cmd_schur(mode),
        Command::Bwb(args) => cmd_bwb(args),
        Command::Parse { file, json } => cmd_parse(&file, json),
        Command::Derive(args) => cmd_derive(args),
        Command::Verify {
            seed,
            count,
            necessity,
            json,
        } => cmd_verify(seed, count, necessity, json),
    }
}

fn cmd_schur(mode: SchurMode) -> ExitCode {
    let cap = tensor_cap_from_env();
    let (name, inputs, result, text, json_out) = match mode {
        SchurMode::Dim(a) => {
            let d = schur_dim(&a.lambda, a.rank);
            (
                "schur dim",
                shape_inputs(&a),
                json!(d.to_string()),
                d.to_string(),
                a.json,
            )
        }
        SchurMode::Construct(a) => {
            if let Err(e) = check_construction(&a.lambda, a.rank, cap) {
                return fail(e);
            }
            match schur_apply::<Rational>(&a.lambda, a.rank, cap) {
                Ok(m) => (
                    "schur construct",
                    shape_inputs(&a),
                    json!({"dim": m.dim, "ambient_dim": a.rank.pow(a.lambda.weight() as u32)}),
                    m.dim.to_string(),
                    a.json,
                ),
                Err(e) => return fail(e),
            }
        }
        SchurMode::Quotient(a) => match schur_quotient::<Rational>(&a.lambda, a.rank, cap) {
            Ok(d) => (
                "schur quotient",
                shape_inputs(&a),
                json!(d),
                d.to_string(),
                a.json,
            ),
            Err(e) => return fail(e),
        },
        SchurMode::Lr { lambda, mu, json } => {
            let d = littlewood_richardson(&lambda, &mu);
            let inputs = json!({"lambda": lambda.to_string(), "mu": mu.to_string()});
            ("schur lr", inputs, d.to_json(), d.to_string(), json)
        }
        SchurMode::Monomial(a) => {
            let m = monomial_expansion(&a.lambda, a.rank);
            let lines: Vec<String> = m
                .iter()
                .map(|(exp, c)| {
                    let e: Vec<String> = exp.iter().map(usize::to_string).collect();
                    format!("x^({}): {c}", e.join(","))
                })
                .collect();
            let res: Vec<Value> = m
                .iter()
                .map(|(exp, c)| json!({"exponent": exp, "coefficient": c}))
                .collect();
            (
                "schur monomial",
                shape_inputs(&a),
                json!(res),
                lines.join("\n"),
                a.json,
            )
        }
    };
    if json_out {
        println!("{}", envelope(name, inputs, result));
    } else {
        println!("{text}");
    }
    ExitCode::SUCCESS
}

fn shape_inputs(a: &ShapeArgs) -> Value {
    json!({"lambda": a.lambda.to_string(), "rank": a.rank})
}

fn print_table(name: &str, inputs: Value, t: &CohomologyTable, json_out: bool) {
    if json_out {
        println!("{}", envelope(name, inputs, t.to_json()));
    } else {
        println!("{t}");
    }
}

fn cmd_bwb(args: BwbArgs) -> ExitCode {
    if let Some(BottCmd::Bott { n, p, k, json }) = args.bott {
        if p > n {
            return fail(format!("p = {p} exceeds n = {n}"));
        }
        let t = bott_formula(n, p, k);
        print_table("bwb bott", json!({"n": n, "p": p, "k": k}), &t, json);
        return ExitCode::SUCCESS;
    }
    let weight = match (&args.weight, &args.twists, args.rank) {
        (Some(w), None, _) => match parse_ints(w) {
            Ok(v) => {
                if args.rank.is_some_and(|r| r != v.len()) {
                    return fail(format!(
                        "weight has {} entries but rank is {}",
                        v.len(),
                        args.rank.unwrap()
                    ));
                }
                WeightVector(v)
            }
            Err(e) => return fail(e),
        },
        (None, Some(tw), Some(r)) => {
            let pairs: Result<Vec<(usize, i64)>, String> = tw
                .split(',')
                .map(|item| {
                    let (k, a) = item
                        .split_once(':')
                        .ok_or(format!("malformed twist `{item}`"))?;
                    let k = k
                        .trim()
                        .parse()
                        .map_err(|_| format!("malformed index `{k}`"))?;
                    let a = a
                        .trim()
                        .parse()
                        .map_err(|_| format!("malformed degree `{a}`"))?;
                    Ok((k, a))
                })
                .collect();
            match pairs
                .map_err(|e| e.to_string())
                .and_then(|p| twists_to_weight(&p, r).map_err(|e| e.to_string()))
            {
                Ok(w) => w,
                Err(e) => return fail(e),
            }
        }
        (None, Some(_), None) => return fail("--twists needs --rank"),
        _ => return fail("give --weight, --twists with --rank, or the bott subcommand"),
    };
    let t = bwb_cohomology(&weight);
    let inputs = json!({"rank": weight.0.len(), "weight": weight.0});
    print_table("bwb", inputs, &t, args.json);
    ExitCode::SUCCESS
}

fn read(file: &PathBuf) -> Result<String, ExitCode> {
    std::fs::read_to_string(file).map_err(|e| fail(format!("{}: {e}", file.display())))
}

fn cmd_parse(file: &PathBuf, json_out: bool) -> ExitCode {
    let text = match read(file) {
        Ok(t) => t,
        Err(c) => return c,
    };
    match parse(&text) {
        Ok(doc) => {
            if json_out {
                println!(
                    "{}",
                    envelope(
                        "parse",
                        json!({"file": file.display().to_string()}),
                        to_json_ast(&doc)
                    )
                );
            } else {
                print!("{}", pretty_print(&doc));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}:{e}", file.display());
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn cmd_derive(args: DeriveArgs) -> ExitCode {
    let text = match read(&args.file) {
        Ok(t) => t,
        Err(c) => return c,
    };
    let mut doc = match parse(&text) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{}:{e}", args.file.display());
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let val = validate(&doc);
    for w in &val.warnings {
        eprintln!("{}:{w} (warning)", args.file.display());
    }
    if !val.is_ok() {
        for e in &val.errors {
            eprintln!("{}:{e}", args.file.display());
        }
        return ExitCode::from(EXIT_INPUT);
    }
    if let Some(i) = args.query {
        if i == 0 || i > doc.queries.len() {
            return fail(format!(
                "query {i} out of range (file has {})",
                doc.queries.len()
            ));
        }
        doc.queries = vec![doc.queries[i - 1].clone()];
    }
    let opts = Options {
        max_depth: args.max_depth,
        pos_strict: args.pos_strict,
    };
    let results = engine::run_queries(&doc, &val, opts);
    let verdicts: Vec<Vec<(String, String)>> = results
        .iter()
        .map(|r| match &args.verify_split {
            Some(inst) => r
                .claims
                .iter()
                .map(|(c, _)| {
                    (
                        c.to_string(),
                        verify_split(c, &val.context, inst).to_string(),
                    )
                })
                .collect(),
            None => Vec::new(),
        })
        .collect();
    if args.json {
        let res: Vec<Value> = results
            .iter()
            .zip(&verdicts)
            .map(|(r, v)| {
                let mut j = r.to_json();
                if args.verify_split.is_some() {
                    j["split"] = json!(v
                        .iter()
                        .map(|(c, s)| json!({"claim": c, "verdict": s}))
                        .collect::<Vec<_>>());
                }
                j
            })
            .collect();
        let inputs = json!({
            "file": args.file.display().to_string(),
            "max_depth": args.max_depth,
            "pos_strict": args.pos_strict,
            "query": args.query,
            "verify_split": args.verify_split.as_ref().map(|_| text_of_split(&args)),
        });
        println!("{}", envelope("derive", inputs, json!(res)));
    } else {
        for (r, v) in results.iter().zip(&verdicts) {
            println!("{}: {}", r.query, r.outcome.status());
            if args.explain {
                for line in r.explain().lines() {
                    println!("  {line}");
                }
            } else if let engine::Outcome::Derived(c) = &r.outcome {
                println!("  certificate: {} (height {})", c.rule, c.height());
            }
            for (c, rule) in &r.claims {
                println!("  claim [{rule}] {c}");
            }
            for (c, s) in v {
                println!("  {s}: {c}");
            }
        }
    }
    ExitCode::from(engine::exit_code(&results) as u8)
}

fn text_of_split(args: &DeriveArgs) -> Value {
    let inst = args.verify_split.as_ref().expect("present");
    json!({"n": inst.n, "degrees": inst.degrees})
}

fn cmd_verify(seed: u64, count: usize, necessity: usize, json_out: bool) -> ExitCode {
    let reports = harness::run(seed, count, necessity, Options::default());
    let all_ok = reports.iter().all(|r| r.ok);
    if json_out {
        let res: Vec<Value> = reports.iter().map(|r| r.to_json()).collect();
        let inputs = json!({"seed": seed, "count": count, "necessity": necessity});
        println!("{}", envelope("verify", inputs, json!(res)));
    } else {
        for (i, r) in reports.iter().enumerate() {
            let c = &r.case;
            let kind = if c.necessity {
                "necessity"
            } else {
                "soundness"
            };
            println!(
                "{:>3} {kind:<9} n={} E={:?} lambda=({}) t={} claims={} {}",
                i + 1,
                c.n,
                c.degrees,
                c.lambda,
                c.twist,
                r.emitted,
                if r.ok { "ok" } else { "MISMATCH" }
            );
        }
        let bad = reports.iter().filter(|r| !r.ok).count();
        println!("{} instances, {bad} mismatches", reports.len());
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
