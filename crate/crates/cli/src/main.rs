//! `agflats`: command-line access to spectra, constructions, energy
//! statistics, hypercube cuts and the self-check suites.
//!
//! Exit codes: 0 success, 1 a check or cross-check failed, 2 usage error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use agflats::analysis::{
    additive_energy, closed_form_spectrum, diff_counts, energy_bound_check, f23_from_energy,
    flat_statistics, forces, is_sidon, profile, spectrum, SearchOptions,
};
use agflats::constructions::{
    combine_difference, combine_union, evasive_random, is_evasive, lexicographic,
    lexicographic_flats, CombinedSet, EvasiveParams,
};
use agflats::field::bose_set;
use agflats::gf2::{check_scan_cap, PointSet};
use agflats::hypercube::{
    crossing_edges, cut_lower_bound, exhaustive_cube_extremes, induced_edges, min_cut_size, CubeCut,
};
use agflats::numerals::{psi, s2, s2_star};
use agflats::verify::{run_suite, Suite};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Seed used by randomized commands when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20240611;

/// Largest cube dimension for the full `cube` table.
const MAX_CUBE_TABLE_DIM: u32 = 12;

#[derive(Parser, Debug)]
#[command(
    name = "agflats",
    version,
    about = "Intersection sizes of k-flats with point sets in AG(n, 2)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,

    /// Worker threads for exhaustive searches (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Seed for randomized constructions.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Lex,
    Evasive,
    Bose,
    CombineUnion,
    CombineDiff,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exhaustive spectrum Sp(n; k, t), cross-checked against known closed forms.
    Spectrum {
        #[arg(short)]
        n: u32,
        #[arg(short)]
        k: u32,
        #[arg(short)]
        t: u32,
        /// Search one set per affine orbit (needed for n = 5).
        #[arg(long)]
        orbit_pruning: bool,
    },
    /// Whether every m-set induces a [k, t]-flat, with a witness otherwise.
    Forces {
        #[arg(short)]
        n: u32,
        #[arg(short)]
        m: u64,
        #[arg(short)]
        k: u32,
        #[arg(short)]
        t: u32,
        #[arg(long)]
        orbit_pruning: bool,
    },
    /// Build a point set and certify it.
    Construct {
        #[arg(value_enum)]
        kind: Kind,
        #[arg(short)]
        n: u32,
        /// Lexicographic size (lex, combine-*).
        #[arg(short)]
        m: Option<u64>,
        /// Flat dimension.
        #[arg(short, default_value_t = 2)]
        k: u32,
        /// Evasiveness threshold: at most c points per k-flat.
        #[arg(short, default_value_t = 3)]
        c: u32,
        /// Sampling attempts for the evasive construction.
        #[arg(long, default_value_t = 1)]
        retries: u32,
    },
    /// Run a self-check suite.
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(Suite::NAMES))]
        suite: String,
    },
    /// Additive energy and F_{2,3} statistics of a point set file.
    Energy {
        /// JSON point set (`{"n": .., "points": [..]}`), or `-` for standard input.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
    },
    /// Hypercube cut sizes: a table over t, or the cut given by a point set file.
    Cube {
        #[arg(short)]
        n: u32,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Intersection profile of a point set file, or of the lexicographic set L_m.
    Profile {
        #[arg(short)]
        k: u32,
        #[arg(short)]
        n: Option<u32>,
        #[arg(short)]
        m: Option<u64>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

/// A finished report: JSON body, CSV table, and whether all checks passed.
struct Report {
    json: Value,
    csv: Vec<Vec<String>>,
    ok: bool,
}

type CmdResult = Result<Report, String>;

fn header(command: &str, params: Value) -> serde_json::Map<String, Value> {
    let mut map = serde_json::Map::new();
    map.insert("tool".into(), json!("agflats"));
    map.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    map.insert("command".into(), json!(command));
    map.insert("params".into(), params);
    map
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn read_set(path: &PathBuf) -> Result<PointSet, String> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())
            .map_err(|e| format!("cannot read standard input: {e}"))?
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?
    };
    PointSet::from_json_str(&text).map_err(err)
}

fn words_field(set: &PointSet) -> String {
    set.iter()
        .map(|w| w.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_spectrum(n: u32, k: u32, t: u32, orbit_pruning: bool) -> CmdResult {
    let sp = spectrum(n, k, t, SearchOptions { orbit_pruning }).map_err(err)?;
    let closed = closed_form_spectrum(n, k, t);
    let check = match &closed {
        Some(c) if c.members == sp.members => "MATCH",
        Some(_) => "MISMATCH",
        None => "UNKNOWN",
    };
    let mut body = header(
        "spectrum",
        json!({ "n": n, "k": k, "t": t, "orbit_pruning": orbit_pruning }),
    );
    body.insert("spectrum".into(), json!(sp));
    body.insert(
        "closed_form".into(),
        json!(closed.as_ref().map(|c| &c.members)),
    );
    body.insert("check".into(), json!(check));
    let mut csv = vec![vec!["m".into(), "forced".into(), "closed_form".into()]];
    for m in 0..=1u64 << n {
        let cf = closed
            .as_ref()
            .map_or(String::new(), |c| c.contains(m).to_string());
        csv.push(vec![m.to_string(), sp.contains(m).to_string(), cf]);
    }
    eprintln!("{check}: Sp({n};{k},{t}) has {} members", sp.members.len());
    Ok(Report {
        json: Value::Object(body),
        csv,
        ok: check != "MISMATCH",
    })
}

fn cmd_forces(n: u32, m: u64, k: u32, t: u32, orbit_pruning: bool) -> CmdResult {
    let f = forces(n, m, k, t, SearchOptions { orbit_pruning }).map_err(err)?;
    let mut ok = true;
    if let Some(w) = &f.witness {
        // re-certify the witness independently of the search
        ok = w.len() as u64 == m && !profile(w, k).map_err(err)?.contains(t);
    }
    let mut body = header(
        "forces",
        json!({ "n": n, "m": m, "k": k, "t": t, "orbit_pruning": orbit_pruning }),
    );
    body.insert("forced".into(), json!(f.forced));
    body.insert("witness".into(), json!(f.witness));
    body.insert("witness_certified".into(), json!(ok));
    let csv = vec![
        vec!["n", "m", "k", "t", "forced", "witness"]
            .into_iter()
            .map(String::from)
            .collect(),
        vec![
            n.to_string(),
            m.to_string(),
            k.to_string(),
            t.to_string(),
            f.forced.to_string(),
            f.witness.as_ref().map_or(String::new(), words_field),
        ],
    ];
    Ok(Report {
        json: Value::Object(body),
        csv,
        ok,
    })
}

fn combined_certificate(comb: &CombinedSet, k: u32, c: u32) -> Result<(Value, bool), String> {
    let evasive = is_evasive(&comb.evasive.set, k, c).map_err(err)?;
    let base = profile(&comb.base, k).map_err(err)?;
    let result = profile(&comb.result, k).map_err(err)?;
    // union: pf(result) ⊆ pf(base) + [0, c]; difference: pf(result) ⊆ pf(base) - [0, c]
    let contained = result.sizes.iter().all(|&t| match comb.mode {
        agflats::constructions::CombineMode::Union => (0..=c.min(t)).any(|j| base.contains(t - j)),
        agflats::constructions::CombineMode::Difference => (0..=c).any(|j| base.contains(t + j)),
    });
    let ok = evasive.evasive && contained;
    let cert = json!({
        "evasive": evasive.evasive,
        "witness": evasive.witness,
        "translate": comb.translate,
        "base_size": comb.base_size,
        "evasive_size": comb.evasive.set.len(),
        "evasive_part_size": comb.evasive_part.len(),
        "mode": comb.mode,
        "base_profile": base.sizes,
        "profile": result.sizes,
        "profile_contained": contained,
    });
    Ok((cert, ok))
}

fn cmd_construct(
    kind: Kind,
    n: u32,
    m: Option<u64>,
    k: u32,
    c: u32,
    retries: u32,
    seed: u64,
) -> CmdResult {
    let need_m = || m.ok_or_else(|| "this construction needs -m".to_string());
    let (name, params, set, certificate, ok): (&str, Value, PointSet, Value, bool) = match kind {
        Kind::Lex => {
            let m = need_m()?;
            let set = lexicographic(n, m).map_err(err)?;
            let flats = lexicographic_flats(n, m).map_err(err)?;
            let k = k.min(n);
            let pf = if check_scan_cap(n, k).is_ok() {
                Some(profile(&set, k).map_err(err)?.sizes)
            } else {
                None
            };
            let ok = pf.as_ref().is_none_or(|p| {
                p.iter()
                    .all(|&t| s2(t.into()) <= s2(m) && s2_star(t.into()) <= s2_star(m as i64))
            });
            let cert = json!({ "flats": flats, "s2": s2(m), "s2_star": s2_star(m as i64), "profile_k": k, "profile": pf, "digit_bound_holds": ok });
            ("lex", json!({ "n": n, "m": m, "k": k }), set, cert, ok)
        }
        Kind::Evasive => {
            let out = evasive_random(&EvasiveParams {
                n,
                k,
                c,
                seed,
                retries,
            })
            .map_err(err)?;
            let cert = is_evasive(&out.set, k, c).map_err(err)?;
            let json_cert = json!({
                "evasive": cert.evasive,
                "witness": cert.witness,
                "max_intersection": cert.max_intersection,
                "sampled": out.sampled,
                "floor": out.floor,
                "attempts": out.attempts,
                "met_floor": out.met_floor,
            });
            (
                "evasive",
                json!({ "n": n, "k": k, "c": c, "retries": retries }),
                out.set,
                json_cert,
                cert.evasive,
            )
        }
        Kind::Bose => {
            let set = bose_set(n).map_err(err)?;
            let check = is_sidon(&set).map_err(err)?;
            let cert = json!({ "sidon": check.sidon, "witness": check.witness });
            ("bose", json!({ "n": n }), set, cert, check.sidon)
        }
        Kind::CombineUnion | Kind::CombineDiff => {
            let m = need_m()?;
            let comb = if kind == Kind::CombineUnion {
                combine_union(n, m, k, c, seed)
            } else {
                combine_difference(n, m, k, c, seed)
            }
            .map_err(err)?;
            let (cert, ok) = combined_certificate(&comb, k, c)?;
            let name = if kind == Kind::CombineUnion {
                "combine-union"
            } else {
                "combine-diff"
            };
            (
                name,
                json!({ "n": n, "m": m, "k": k, "c": c }),
                comb.result,
                cert,
                ok,
            )
        }
    };
    let mut body = header("construct", params);
    body.insert("construction".into(), json!(name));
    body.insert("seed".into(), json!(seed));
    body.insert("set".into(), json!(set));
    body.insert("certificate".into(), certificate);
    let mut csv = vec![vec!["point".to_string()]];
    csv.extend(set.iter().map(|w| vec![w.to_string()]));
    Ok(Report {
        json: Value::Object(body),
        csv,
        ok,
    })
}

fn cmd_verify(suite: &str) -> CmdResult {
    let suite: Suite = suite.parse().map_err(err)?;
    let checks = run_suite(suite).map_err(err)?;
    for c in &checks {
        eprintln!(
            "{} {} ({})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let ok = checks.iter().all(|c| c.passed);
    let mut body = header("verify", json!({ "suite": suite }));
    body.insert("checks".into(), json!(checks));
    body.insert("passed".into(), json!(ok));
    body.insert(
        "first_failure".into(),
        json!(checks.iter().find(|c| !c.passed).map(|c| &c.name)),
    );
    let mut csv = vec![vec!["name".to_string(), "passed".into(), "detail".into()]];
    csv.extend(
        checks
            .iter()
            .map(|c| vec![c.name.clone(), c.passed.to_string(), c.detail.clone()]),
    );
    Ok(Report {
        json: Value::Object(body),
        csv,
        ok,
    })
}

fn cmd_energy(input: &PathBuf, alpha: f64, eps: f64) -> CmdResult {
    let set = read_set(input)?;
    let n = set.ambient_dim();
    let energy = additive_energy(&set);
    let f23 = f23_from_energy(&set);
    let direct = if check_scan_cap(n, 2).is_ok() {
        Some(flat_statistics(&set, 2).map_err(err)?.get(3))
    } else {
        None
    };
    let agree = direct.is_none_or(|d| u128::from(d) == f23);
    let diffs = diff_counts(&set);
    let mut histogram: BTreeMap<u64, u64> = BTreeMap::new();
    for v in 1..set.space_size() as u32 {
        *histogram.entry(diffs.get(v)).or_default() += 1;
    }
    let bound = if set.is_empty() {
        None
    } else {
        Some(energy_bound_check(&set, alpha, eps).map_err(err)?)
    };
    let mut body = header(
        "energy",
        json!({ "input": input.display().to_string(), "alpha": alpha, "eps": eps }),
    );
    body.insert("n".into(), json!(n));
    body.insert("m".into(), json!(set.len()));
    body.insert("energy".into(), json!(energy.to_string()));
    body.insert("f23_from_energy".into(), json!(f23.to_string()));
    body.insert("f23_direct".into(), json!(direct));
    body.insert("f23_agree".into(), json!(agree));
    body.insert(
        "diff_histogram".into(),
        json!(histogram
            .iter()
            .map(|(p, c)| json!({ "p": p, "count": c }))
            .collect::<Vec<_>>()),
    );
    body.insert("energy_bound".into(), json!(bound));
    let csv = vec![
        vec!["metric".to_string(), "value".into()],
        vec!["n".into(), n.to_string()],
        vec!["m".into(), set.len().to_string()],
        vec!["energy".into(), energy.to_string()],
        vec!["f23_from_energy".into(), f23.to_string()],
        vec![
            "f23_direct".into(),
            direct.map_or(String::new(), |d| d.to_string()),
        ],
        vec!["f23_agree".into(), agree.to_string()],
    ];
    Ok(Report {
        json: Value::Object(body),
        csv,
        ok: agree && bound.as_ref().is_none_or(|b| b.weak_bound_holds),
    })
}

fn cmd_cube(n: u32, input: Option<&PathBuf>) -> CmdResult {
    if let Some(path) = input {
        let set = read_set(path)?;
        if set.ambient_dim() != n {
            return Err(format!("input has n = {}, expected {n}", set.ambient_dim()));
        }
        let cut = CubeCut::new(set).map_err(err)?;
        let size = cut.side_a.len() as u64;
        let smaller = size.min((1u64 << n) - size);
        let (bound, ok) = if smaller == 0 {
            (None, true)
        } else {
            let d = (63 - smaller.leading_zeros()).min(n - 1);
            let b = cut_lower_bound(n, d).map_err(err)?;
            (
                Some(b),
                cut.crossing_edges >= b
                    && u128::from(cut.crossing_edges) >= min_cut_size(n, smaller).map_err(err)?,
            )
        };
        let mut body = header(
            "cube",
            json!({ "n": n, "input": path.display().to_string() }),
        );
        body.insert("cut".into(), json!(cut));
        body.insert("lower_bound".into(), json!(bound));
        body.insert("bound_holds".into(), json!(ok));
        let csv = vec![
            vec![
                "size".to_string(),
                "internal_edges".into(),
                "crossing_edges".into(),
                "lower_bound".into(),
            ],
            vec![
                size.to_string(),
                cut.internal_edges_a.to_string(),
                cut.crossing_edges.to_string(),
                bound.map_or(String::new(), |b| b.to_string()),
            ],
        ];
        return Ok(Report {
            json: Value::Object(body),
            csv,
            ok,
        });
    }
    if n == 0 || n > MAX_CUBE_TABLE_DIM {
        return Err(format!(
            "the cut table needs 1 <= n <= {MAX_CUBE_TABLE_DIM}"
        ));
    }
    let exhaustive = exhaustive_cube_extremes(n).ok();
    let mut rows = Vec::new();
    let mut ok = true;
    for t in 1..1u64 << n {
        let lex = lexicographic(n, t).map_err(err)?;
        let induced = induced_edges(n, &lex).map_err(err)?;
        let crossing = crossing_edges(n, &lex).map_err(err)?;
        let p = psi(t).map_err(err)?;
        let min_cut = min_cut_size(n, t).map_err(err)?;
        let brute = exhaustive.as_ref().map(|e| e.min_crossing[t as usize]);
        let row_ok = u128::from(induced) == p
            && u128::from(crossing) == min_cut
            && brute.is_none_or(|b| u128::from(b) == min_cut);
        ok &= row_ok;
        rows.push(json!({
            "t": t, "psi": p.to_string(), "min_cut": min_cut.to_string(),
            "lex_induced": induced, "lex_crossing": crossing, "exhaustive_min_cut": brute, "match": row_ok,
        }));
    }
    let mut body = header("cube", json!({ "n": n }));
    body.insert("rows".into(), json!(rows));
    body.insert("all_match".into(), json!(ok));
    let mut csv = vec![vec![
        "t",
        "psi",
        "min_cut",
        "lex_induced",
        "lex_crossing",
        "exhaustive_min_cut",
        "match",
    ]
    .into_iter()
    .map(String::from)
    .collect::<Vec<_>>()];
    for r in &rows {
        csv.push(
            [
                "t",
                "psi",
                "min_cut",
                "lex_induced",
                "lex_crossing",
                "exhaustive_min_cut",
                "match",
            ]
            .iter()
            .map(|key| match &r[*key] {
                Value::Null => String::new(),
                Value::String(s) => s.clone(),
                v => v.to_string(),
            })
            .collect(),
        );
    }
    Ok(Report {
        json: Value::Object(body),
        csv,
        ok,
    })
}

fn cmd_profile(k: u32, n: Option<u32>, m: Option<u64>, input: Option<&PathBuf>) -> CmdResult {
    let (set, params) = match (input, n, m) {
        (Some(path), None, None) => (
            read_set(path)?,
            json!({ "k": k, "input": path.display().to_string() }),
        ),
        (None, Some(n), Some(m)) => (
            lexicographic(n, m).map_err(err)?,
            json!({ "k": k, "n": n, "m": m }),
        ),
        _ => return Err("give either --input or both -n and -m".into()),
    };
    let pf = profile(&set, k).map_err(err)?;
    let mut body = header("profile", params);
    body.insert("size".into(), json!(set.len()));
    body.insert("profile".into(), json!(pf));
    let mut csv = vec![vec!["t".to_string()]];
    csv.extend(pf.sizes.iter().map(|t| vec![t.to_string()]));
    Ok(Report {
        json: Value::Object(body),
        csv,
        ok: true,
    })
}

fn render(report: &Report, format: Format) -> Result<Vec<u8>, String> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(&report.json).map_err(err)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &report.csv {
                w.write_record(row).map_err(err)?;
            }
            w.into_inner().map_err(err)
        }
    }
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Spectrum {
            n,
            k,
            t,
            orbit_pruning,
        } => cmd_spectrum(*n, *k, *t, *orbit_pruning),
        Command::Forces {
            n,
            m,
            k,
            t,
            orbit_pruning,
        } => cmd_forces(*n, *m, *k, *t, *orbit_pruning),
        Command::Construct {
            kind,
            n,
            m,
            k,
            c,
            retries,
        } => cmd_construct(*kind, *n, *m, *k, *c, *retries, cli.seed),
        Command::Verify { suite } => cmd_verify(suite),
        Command::Energy { input, alpha, eps } => cmd_energy(input, *alpha, *eps),
        Command::Cube { n, input } => cmd_cube(*n, input.as_ref()),
        Command::Profile { k, n, m, input } => cmd_profile(*k, *n, *m, input.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let bytes = match render(&report, cli.format) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().write_all(&bytes).map_err(err),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if report.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
