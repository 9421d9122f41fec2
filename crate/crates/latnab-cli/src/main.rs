//! Command-line front end for the latnab lattice workbench.
//!
//! Every subcommand resolves its lattice argument first against the built-in
//! catalog and then as a path to a lattice file. Data commands print JSON
//! with sorted keys, so output is byte-for-byte reproducible across runs and
//! thread counts. Exit codes: 0 success, 1 domain error, 2 resource budget
//! exceeded, 3 reference-table mismatch from `reproduce`.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use latnab::designs::{self, DEFAULT_PAIRWISE_BUDGET, DEFAULT_T_CAP};
use latnab::exact::{rat_display, rat_parse, Rat};
use latnab::isometry::{is_isometric, IsometryStatus, Policy};
use latnab::lattice::{catalog, io, Frame, Lattice};
use latnab::overlattice::{census, census_json, classify_census, DEFAULT_CENSUS_BUDGET};
use latnab::quotient::{class_table, DEFAULT_CLASS_BOUND};
use latnab::shells::{self, DEFAULT_BUDGET};
use latnab::venkov::venkov_project;
use latnab::{Error, Result};

use latnab_cli::reproduce;

#[derive(Parser)]
#[command(
    name = "latnab",
    version,
    about = "Exact-arithmetic workbench for Euclidean lattices",
    max_term_width = 100
)]
struct Cli {
    /// Worker threads (default: LATNAB_THREADS, then all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the built-in lattice catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Print basis, Gram matrix, determinant, parity, minimum, and kissing
    /// number of a lattice.
    Show {
        /// Catalog name or lattice file.
        lattice: String,
        /// Emit JSON instead of the pretty listing.
        #[arg(long)]
        json: bool,
    },
    /// Theta series coefficients up to a norm bound.
    Theta {
        /// Catalog name or lattice file.
        lattice: String,
        /// Largest vector norm to include (a rational, e.g. 12 or 25/2).
        #[arg(long, value_name = "Q")]
        max_norm: String,
        /// Enumeration budget in lattice vectors.
        #[arg(long, value_name = "N")]
        budget: Option<u64>,
    },
    /// Count the vectors of one norm shell, optionally dumping them.
    Shell {
        /// Catalog name or lattice file.
        lattice: String,
        /// Shell norm (a rational).
        #[arg(short = 'm', long = "norm", value_name = "Q")]
        norm: String,
        /// Write the shell vectors (frame coordinates) to a JSON file.
        #[arg(long, value_name = "PATH")]
        dump: Option<PathBuf>,
        /// Enumeration budget in lattice vectors.
        #[arg(long, value_name = "N")]
        budget: Option<u64>,
    },
    /// Class table of the dual quotient L*/L.
    Classes {
        /// Catalog name or lattice file.
        lattice: String,
        /// Enumeration budget in lattice vectors.
        #[arg(long, value_name = "N")]
        budget: Option<u64>,
    },
    /// Adjoin half of a lattice vector: the index-2 neighbor construction.
    Neighbor {
        /// Catalog name or lattice file.
        lattice: String,
        /// Coset vector in frame coordinates, e.g. "1/2,0,1/2".
        #[arg(long, value_name = "a/b,...")]
        vector: String,
        /// Write the resulting lattice here instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Enumerate all integral overlattices and group them into isometry
    /// classes.
    Census {
        /// Catalog name or lattice file.
        lattice: String,
        /// Classification policy (omit to skip classification).
        #[arg(long, value_enum, value_name = "POLICY")]
        classify: Option<PolicyArg>,
        /// Subgroup enumeration budget.
        #[arg(long, value_name = "N")]
        budget: Option<u64>,
    },
    /// Decide whether two lattices are isometric.
    Isometric {
        /// Catalog name or lattice file.
        a: String,
        /// Catalog name or lattice file.
        b: String,
        /// How hard to try before answering "indeterminate".
        #[arg(long, value_enum, default_value = "fast")]
        policy: PolicyArg,
        /// Enumeration budget in lattice vectors.
        #[arg(long, value_name = "N")]
        budget: Option<u64>,
    },
    /// Spherical-design report (d, n, s, t) for one shell.
    Design {
        /// Catalog name or lattice file.
        lattice: String,
        /// Shell norm (a rational).
        #[arg(short = 'm', long = "norm", value_name = "Q")]
        norm: String,
        /// Largest design strength to test.
        #[arg(long, default_value_t = DEFAULT_T_CAP, value_name = "N")]
        t_cap: u32,
        /// Largest shell size the pairwise path accepts.
        #[arg(long, default_value_t = DEFAULT_PAIRWISE_BUDGET, value_name = "N")]
        budget: u64,
    },
    /// Project along a minimal vector onto its hyperplane section.
    Venkov {
        /// Catalog name or lattice file.
        lattice: String,
        /// Minimal vector in frame coordinates (default: the first one).
        #[arg(long, value_name = "a/b,...")]
        vector: Option<String>,
        /// Write the projected lattice here instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Regenerate the bundled reference tables and diff them.
    Reproduce {
        /// Check a single table section (1 through 8).
        #[arg(long, value_name = "N")]
        section: Option<u8>,
        /// Skip the large rank-16 shells and use fingerprint classification.
        #[arg(long)]
        fast: bool,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// List every built-in lattice with its dimension and determinant.
    List,
}

#[derive(Copy, Clone, ValueEnum)]
enum PolicyArg {
    Fast,
    Strict,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Policy {
        match p {
            PolicyArg::Fast => Policy::Fast,
            PolicyArg::Strict => Policy::Strict,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads(cli.threads);
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_budget() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Configure the global worker pool before any parallel work runs.
/// Precedence: --threads, then LATNAB_THREADS, then all cores.
fn init_threads(flag: Option<usize>) {
    let env = std::env::var("LATNAB_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok());
    if let Some(n) = flag.or(env) {
        if n > 0 {
            // Ignore failure: the pool can only be set once, which is fine.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Catalog { action } => match action {
            CatalogAction::List => catalog_list(),
        },
        Command::Show { lattice, json } => show(&lattice, json),
        Command::Theta {
            lattice,
            max_norm,
            budget,
        } => theta(&lattice, &max_norm, budget.unwrap_or(DEFAULT_BUDGET)),
        Command::Shell {
            lattice,
            norm,
            dump,
            budget,
        } => shell(&lattice, &norm, dump.as_deref(), budget.unwrap_or(DEFAULT_BUDGET)),
        Command::Classes { lattice, budget } => {
            classes(&lattice, budget.unwrap_or(DEFAULT_BUDGET))
        }
        Command::Neighbor {
            lattice,
            vector,
            out,
        } => neighbor(&lattice, &vector, out.as_deref()),
        Command::Census {
            lattice,
            classify,
            budget,
        } => census_cmd(&lattice, classify, budget.unwrap_or(DEFAULT_CENSUS_BUDGET)),
        Command::Isometric {
            a,
            b,
            policy,
            budget,
        } => isometric(&a, &b, policy.into(), budget.unwrap_or(DEFAULT_BUDGET)),
        Command::Design {
            lattice,
            norm,
            t_cap,
            budget,
        } => design(&lattice, &norm, t_cap, budget),
        Command::Venkov {
            lattice,
            vector,
            out,
        } => venkov(&lattice, vector.as_deref(), out.as_deref()),
        Command::Reproduce { section, fast } => {
            let ok = reproduce::run(section, fast)?;
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
    }
}

/// Resolve a lattice argument: catalog name first, then a file path.
fn load(label: &str) -> Result<(Lattice, String)> {
    match catalog::build(label) {
        Ok(lat) => Ok((lat, label.to_string())),
        Err(Error::UnknownName(_)) if Path::new(label).is_file() => {
            let lat = io::read_file(Path::new(label))?;
            let name = Path::new(label)
                .file_stem()
                .map_or_else(|| label.to_string(), |s| s.to_string_lossy().into_owned());
            Ok((lat, name))
        }
        Err(e) => Err(e),
    }
}

/// Parse "a/b,c,..." into frame coordinates.
fn parse_vector(s: &str) -> Result<Vec<Rat>> {
    s.split(',')
        .map(|part| rat_parse(part.trim()))
        .collect()
}

fn print_value(value: &serde_json::Value) {
    // serde_json objects iterate in sorted key order, so this is stable.
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn catalog_list() -> Result<ExitCode> {
    println!("{:<18} {:>4} {:>12}  {}", "name", "dim", "det", "parity");
    for name in catalog::all_names() {
        let lat = name.build()?;
        let parity = if !lat.is_integral() {
            "fractional"
        } else if lat.is_even() {
            "even"
        } else {
            "odd"
        };
        println!(
            "{:<18} {:>4} {:>12}  {}",
            name.to_string(),
            lat.dim(),
            rat_display(lat.det()),
            parity
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn matrix_json(m: &latnab::exact::QMat) -> serde_json::Value {
    serde_json::Value::Array(
        m.rows_iter()
            .map(|row| {
                serde_json::Value::Array(
                    row.iter()
                        .map(|x| serde_json::Value::String(rat_display(x)))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn show(label: &str, json: bool) -> Result<ExitCode> {
    let (lat, name) = load(label)?;
    let (min, kissing) = shells::minimum(&lat, DEFAULT_BUDGET)?;
    let frame = match lat.frame() {
        Frame::Orthonormal => "orthonormal",
        Frame::Form(_) => "form",
    };
    if json {
        print_value(&serde_json::json!({
            "name": name,
            "dim": lat.dim(),
            "frame": frame,
            "basis": matrix_json(lat.basis()),
            "gram": matrix_json(lat.gram()),
            "det": rat_display(lat.det()),
            "integral": lat.is_integral(),
            "even": lat.is_even(),
            "minimum": rat_display(&min),
            "kissing": kissing,
        }));
    } else {
        println!("{name}  (dim {}, {frame} frame)", lat.dim());
        println!("basis:");
        for row in lat.basis().rows_iter() {
            let cells: Vec<String> = row.iter().map(rat_display).collect();
            println!("  [ {} ]", cells.join(" "));
        }
        println!("gram:");
        for row in lat.gram().rows_iter() {
            let cells: Vec<String> = row.iter().map(rat_display).collect();
            println!("  [ {} ]", cells.join(" "));
        }
        println!("det: {}", rat_display(lat.det()));
        let parity = if !lat.is_integral() {
            "fractional"
        } else if lat.is_even() {
            "even"
        } else {
            "odd"
        };
        println!("parity: {parity}");
        println!("minimum: {} (kissing {kissing})", rat_display(&min));
    }
    Ok(ExitCode::SUCCESS)
}

fn theta(label: &str, max_norm: &str, budget: u64) -> Result<ExitCode> {
    let (lat, name) = load(label)?;
    let bound = rat_parse(max_norm)?;
    let series = shells::theta(&lat, &bound, budget)?;
    let mut coeffs = serde_json::Map::new();
    for (norm, count) in &series.coefficients {
        coeffs.insert(rat_display(norm), serde_json::json!(count));
    }
    print_value(&serde_json::json!({
        "lattice": name,
        "max_norm": rat_display(&bound),
        "coefficients": coeffs,
    }));
    Ok(ExitCode::SUCCESS)
}

fn shell(label: &str, norm: &str, dump: Option<&Path>, budget: u64) -> Result<ExitCode> {
    let (lat, name) = load(label)?;
    let m = rat_parse(norm)?;
    let sh = shells::shell(&lat, &m, budget, dump.is_some())?;
    if let Some(path) = dump {
        let vectors: Vec<Vec<String>> = sh
            .vectors
            .iter()
            .map(|v| v.iter().map(rat_display).collect())
            .collect();
        let payload = serde_json::json!({
            "lattice": name,
            "norm": rat_display(&sh.norm),
            "count": sh.count,
            "vectors": vectors,
        });
        let mut file = std::fs::File::create(path)?;
        writeln!(file, "{}", serde_json::to_string_pretty(&payload).expect("serializable"))?;
    }
    print_value(&serde_json::json!({
        "lattice": name,
        "norm": rat_display(&m),
        "count": sh.count,
    }));
    Ok(ExitCode::SUCCESS)
}

fn classes(label: &str, budget: u64) -> Result<ExitCode> {
    let (lat, name) = load(label)?;
    let table = class_table(&lat, DEFAULT_CLASS_BOUND, budget)?;
    let rows: Vec<serde_json::Value> = table
        .rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "count": r.count,
                "paired": r.paired,
                "norm": rat_display(&r.norm),
                "order": r.order.to_string(),
            })
        })
        .collect();
    print_value(&serde_json::json!({
        "lattice": name,
        "quotient_order": table.order.to_string(),
        "rows": rows,
    }));
    Ok(ExitCode::SUCCESS)
}

fn neighbor(label: &str, vector: &str, out: Option<&Path>) -> Result<ExitCode> {
    let (lat, name) = load(label)?;
    let v = parse_vector(vector)?;
    let result = lat.neighbor(&v)?;
    let result_name = format!("{name}+[{vector}]");
    emit_lattice(&result, &result_name, out)
}

fn emit_lattice(lat: &Lattice, name: &str, out: Option<&Path>) -> Result<ExitCode> {
    match out {
        Some(path) => io::write_file(path, lat, Some(name))?,
        None => print!("{}", io::to_json(lat, Some(name))),
    }
    Ok(ExitCode::SUCCESS)
}

fn census_cmd(label: &str, classify: Option<PolicyArg>, budget: u64) -> Result<ExitCode> {
    let (lat, name) = load(label)?;
    let result = census(&lat, budget)?;
    match classify {
        Some(policy) => {
            let buckets = classify_census(&result, policy.into(), DEFAULT_BUDGET)?;
            println!("{}", census_json(&name, &result, &buckets));
        }
        None => {
            let orders: Vec<serde_json::Value> = result
                .members
                .iter()
                .map(|m| {
                    serde_json::json!({
                        "index": m.order,
                        "determinant": rat_display(&m.determinant),
                        "even": m.even,
                    })
                })
                .collect();
            print_value(&serde_json::json!({
                "base": name,
                "dim": result.base.dim(),
                "total": result.total(),
                "members": orders,
            }));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn isometric(a: &str, b: &str, policy: Policy, budget: u64) -> Result<ExitCode> {
    let (lat_a, name_a) = load(a)?;
    let (lat_b, name_b) = load(b)?;
    let verdict = is_isometric(&lat_a, &lat_b, policy, budget)?;
    let status = match verdict.status {
        IsometryStatus::Isometric => "isometric",
        IsometryStatus::NotIsometric => "not_isometric",
        IsometryStatus::Indeterminate => "indeterminate",
    };
    print_value(&serde_json::json!({
        "a": name_a,
        "b": name_b,
        "status": status,
        "witness": verdict.witness,
        "certificate": verdict.certificate.as_ref().map(matrix_json),
    }));
    Ok(ExitCode::SUCCESS)
}

fn design(label: &str, norm: &str, t_cap: u32, budget: u64) -> Result<ExitCode> {
    let (lat, _) = load(label)?;
    let m = rat_parse(norm)?;
    let report = designs::configuration(&lat, &m, t_cap, budget)?;
    print_value(&report.to_json());
    Ok(ExitCode::SUCCESS)
}

fn venkov(label: &str, vector: Option<&str>, out: Option<&Path>) -> Result<ExitCode> {
    let (lat, name) = load(label)?;
    let e = match vector {
        Some(s) => parse_vector(s)?,
        None => {
            let (min, _) = shells::minimum(&lat, DEFAULT_BUDGET)?;
            let sh = shells::shell(&lat, &min, DEFAULT_BUDGET, true)?;
            sh.vectors.into_iter().next().ok_or_else(|| {
                Error::EmptyShell(rat_display(&min))
            })?
        }
    };
    let result = venkov_project(&lat, &e)?;
    let (min, kissing) = shells::minimum(&result.projected, DEFAULT_BUDGET)?;
    let meta = serde_json::json!({
        "base": name,
        "case": result.assumption,
        "det_ratio": rat_display(&result.det_ratio),
        "projected_dim": result.projected.dim(),
        "projected_det": rat_display(result.projected.det()),
        "projected_minimum": rat_display(&min),
        "projected_kissing": kissing,
    });
    eprintln!("{}", serde_json::to_string_pretty(&meta).expect("serializable"));
    emit_lattice(&result.projected, &format!("{name}-projected"), out)
}
