use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sanov_core::exact2::is_prime;
use sanov_core::forge::omega_count;
use sanov_core::girth::{
    build_gl_spec, component_size, even_girth, even_girth_oracle, girth_bfs, girth_oracle,
    margulis_genset, DEFAULT_BUDGET,
};
use sanov_core::harness::{parse_primes, parse_sources, survey, to_csv, CellStatus};
use sanov_core::lattice::{prim_count, sl2_ball_count};
use sanov_core::{
    build_genset, verify_genset, CayleySpec, CountMode, Error, GeneratorSet, LabeledGraph, Prime,
};

#[derive(Parser)]
#[command(
    name = "sanov",
    version,
    about = "Free generating sets in SL2(Z) and Cayley graph girth over SL2(F_p)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and verify the generating set for a radius; writes JSON.
    Forge {
        #[arg(long)]
        radius: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exact freeness check depth (words over the set).
        #[arg(long, default_value_t = 2)]
        freeness_depth: usize,
    },
    /// Girth of the Cayley graph of a generating set mod p.
    Girth {
        #[arg(long)]
        genset: PathBuf,
        #[arg(long)]
        prime: u64,
        #[command(flatten)]
        opts: GirthOpts,
    },
    /// Girth for the generators A, B of the Sanov subgroup and their inverses.
    Margulis {
        #[arg(long)]
        prime: u64,
        #[command(flatten)]
        opts: GirthOpts,
    },
    /// Lattice and ball counts.
    Count {
        #[arg(long, value_enum)]
        what: What,
        #[arg(long)]
        radius: u64,
        #[arg(long, value_enum, default_value_t = Mode::Quadrant)]
        mode: Mode,
    },
    /// Run the (R, p) grid and write a CSV report.
    Survey {
        /// Comma-separated radii; `margulis` selects the Sanov generators.
        #[arg(long)]
        radii: String,
        /// `p1,p2,...` or `START:END`.
        #[arg(long)]
        primes: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Spanning tree and fundamental group basis of a labeled graph file.
    Graph {
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(clap::Args)]
struct GirthOpts {
    /// Shortest even relation instead.
    #[arg(long)]
    even: bool,
    /// Use the generators `w J` in the det +-1 group.
    #[arg(long)]
    gl: bool,
    /// Cross-check with the exhaustive word search up to this length.
    #[arg(long)]
    oracle_maxlen: Option<usize>,
    /// Also report the size of the generated subgroup.
    #[arg(long)]
    component: bool,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Prim,
    Sl2,
    Omega,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Quadrant,
    All,
}

/// Exit 1: a check failed. Exit 2: the input was unusable.
enum Failure {
    Check(anyhow::Error),
    Input(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invariant(_) | Error::UnpairedSlot(_) | Error::BudgetExceeded { .. } => {
                Failure::Check(e.into())
            }
            _ => Failure::Input(e.into()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Input(e.into())
}

fn prime(p: u64) -> Result<Prime, Failure> {
    Prime::new(p).map_err(Failure::from)
}

fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn forge(radius: u64, out: Option<&Path>, depth: usize) -> Outcome {
    if radius == 0 {
        return Err(input(anyhow!("radius must be at least 1")));
    }
    let set = build_genset(radius)?;
    let check_prime = (36 * radius * radius + 1..)
        .find(|&p| is_prime(p))
        .expect("primes are unbounded");
    let report = verify_genset(&set, Prime::new(check_prime).ok(), depth);
    let text = set.to_json();
    match out {
        Some(path) => fs::write(path, &text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(input)?,
        None => print!("{text}"),
    }
    eprintln!(
        "radius {radius}: {} generators, max norm {}",
        set.len(),
        set.max_norm
    );
    for c in report.failures() {
        eprintln!("check {} failed: {}", c.name, c.detail);
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check(anyhow!("generator set failed verification")))
    }
}

fn run_girth(set: &GeneratorSet, p: u64, opts: &GirthOpts) -> Outcome {
    let p = prime(p)?;
    let spec = if opts.gl {
        build_gl_spec(set, p)?
    } else {
        CayleySpec::from_genset(set, p)?
    };
    let result = if opts.even {
        even_girth(&spec)?
    } else {
        girth_bfs(&spec)?
    };
    if !spec.eval_witness(&result.witness).is_identity() {
        return Err(Failure::Check(anyhow!(
            "witness does not evaluate to the identity"
        )));
    }
    let mut out = json!({
        "prime": p.get(),
        "degree": spec.degree(),
        "even": opts.even,
        "gl": opts.gl,
        "girth": result.girth,
        "degenerate": result.degenerate,
        "witness": result.witness,
        "witness_word": spec.witness_label(&result.witness),
    });
    if opts.component {
        out["component_size"] = json!(component_size(&spec, opts.budget)?);
    }
    let mut mismatch = None;
    if let Some(max_len) = opts.oracle_maxlen {
        let oracle = if opts.even {
            even_girth_oracle(&spec, max_len)
        } else {
            girth_oracle(&spec, max_len)
        };
        let g = oracle.as_ref().map(|r| r.girth);
        out["oracle_girth"] = json!(g);
        match g {
            Some(g) if g != result.girth => mismatch = Some(g),
            None if result.girth as usize <= max_len => mismatch = Some(0),
            _ => {}
        }
    }
    print(&out);
    match mismatch {
        Some(g) => Err(Failure::Check(anyhow!(
            "oracle disagrees: search found {}, oracle {g}",
            result.girth
        ))),
        None => Ok(()),
    }
}

fn count(what: What, radius: u64, mode: Mode) -> Outcome {
    if radius == 0 {
        return Err(input(anyhow!("radius must be at least 1")));
    }
    let r2 = (radius * radius) as f64;
    let (name, count, density) = match what {
        What::Prim => {
            let (m, area) = match mode {
                Mode::Quadrant => (CountMode::Quadrant, r2),
                Mode::All => (CountMode::All, 4.0 * r2),
            };
            let c = prim_count(radius, m);
            ("prim", c, c as f64 / area)
        }
        What::Sl2 => {
            let c = sl2_ball_count(radius);
            ("sl2", c, c as f64 / r2)
        }
        What::Omega => {
            let c = omega_count(radius)?;
            ("omega", c, c as f64 / r2)
        }
    };
    print(&json!({ "what": name, "R": radius, "count": count, "density": density }));
    Ok(())
}

fn run_survey(radii: &str, primes: &str, out: &Path, budget: u64) -> Outcome {
    let sources = parse_sources(radii)?;
    let primes = parse_primes(primes)?;
    if sources.is_empty() || primes.is_empty() {
        return Err(input(anyhow!("empty radius or prime list")));
    }
    let cells = survey(&sources, &primes, budget)?;
    fs::write(out, to_csv(&cells))
        .with_context(|| format!("writing {}", out.display()))
        .map_err(input)?;
    let failed: Vec<_> = cells
        .iter()
        .filter(|c| matches!(c.status, CellStatus::Fail(_)))
        .collect();
    let skipped = cells
        .iter()
        .filter(|c| matches!(c.status, CellStatus::Skipped(_)))
        .count();
    eprintln!(
        "{} cells, {} failed, {} skipped",
        cells.len(),
        failed.len(),
        skipped
    );
    for c in &failed {
        eprintln!("R={} p={}: {}", c.source, c.p, c.flags());
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(anyhow!("survey has failing cells")))
    }
}

fn graph(file: &Path) -> Outcome {
    let text = fs::read_to_string(file)
        .with_context(|| format!("reading {}", file.display()))
        .map_err(input)?;
    let g = LabeledGraph::parse_text(&text)?;
    let tree = g.spanning_tree()?;
    let basis: Vec<String> = g.pi1_basis()?.iter().map(|w| w.to_string()).collect();
    print(&json!({
        "vertices": g.vertices().len(),
        "edges": g.edges().len(),
        "stallings": g.is_stallings(),
        "cover": g.is_cover(),
        "tree": tree,
        "basis": basis,
    }));
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Forge {
            radius,
            out,
            freeness_depth,
        } => forge(radius, out.as_deref(), freeness_depth),
        Command::Girth {
            genset,
            prime,
            opts,
        } => {
            let text = fs::read_to_string(&genset)
                .with_context(|| format!("reading {}", genset.display()))
                .map_err(input)?;
            let set = GeneratorSet::from_json(&text)?;
            run_girth(&set, prime, &opts)
        }
        Command::Margulis { prime, opts } => run_girth(&margulis_genset(), prime, &opts),
        Command::Count { what, radius, mode } => count(what, radius, mode),
        Command::Survey {
            radii,
            primes,
            out,
            budget,
        } => run_survey(&radii, &primes, &out, budget),
        Command::Graph { file } => graph(&file),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
