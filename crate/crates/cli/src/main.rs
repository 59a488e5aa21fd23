//! `germnf`: analyze and normalize commuting families of germs.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use germnf::classify::{classify_family, ClassificationReport, ClassifyOptions, Decision, Verdict};
use germnf::exactnum::PrecisionBudget;
use germnf::germ::{FamilyFile, FAMILY_SCHEMA_VERSION};
use germnf::normalform::{
    self, division_check, extract_integrable_certificate, first_integrals, generate_integrable_nf,
    normalize_real_family, poincare_dulac_normalize, verify_first_integral_support, verify_pd_nf,
    NormalizeOptions,
};
use germnf::resonance::{lattice_report, relation_lattice, EigenData};
use germnf::{Family, RealFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Decide every hypothesis of the normal form theorem.
    Analyze,
    /// Simultaneous Poincaré–Dulac normalization.
    Normalize,
    /// Relation lattice, Ω and resonant sets.
    Lattice,
    /// Polynomial first integrals up to the truncation degree.
    FirstIntegrals,
    /// Commutativity, normal form, divisibility and product checks.
    Verify,
    /// Generate a family in integrable normal form from the input's linear parts.
    Generate,
    /// Normalize a real family with rotation-scaling blocks.
    Realcase,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Normalize => "normalize",
            Command::Lattice => "lattice",
            Command::FirstIntegrals => "first-integrals",
            Command::Verify => "verify",
            Command::Generate => "generate",
            Command::Realcase => "realcase",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "germnf", version, about = "Exact normal forms for commuting families of germs")]
struct Cli {
    command: Command,
    /// Family file (JSON, `"schema": 1`).
    input: PathBuf,
    /// Truncation degree; defaults to the file's degree.
    #[arg(long)]
    degree: Option<u32>,
    /// Degree bound for Ω enumeration (default 2·degree).
    #[arg(long)]
    bound_omega: Option<u32>,
    /// Bound on branch integers for generator search.
    #[arg(long, default_value_t = 10)]
    bound_branch: u32,
    /// Bound on torsion orders for Poincaré-type certificates.
    #[arg(long, default_value_t = 64)]
    bound_torsion: u64,
    /// Normalize compatibly with the pairing of conjugate eigenvalues.
    #[arg(long)]
    rho_equivariant: bool,
    /// Eliminate all monomials of one degree in a single conjugation.
    #[arg(long)]
    batched: bool,
    /// Seed for `generate`.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

struct Outcome {
    payload: Value,
    text: String,
    indeterminate: bool,
}

fn precision() -> anyhow::Result<PrecisionBudget> {
    match std::env::var("GERMNF_PRECISION_BITS") {
        Ok(v) => {
            let bits: u32 = v
                .trim()
                .parse()
                .with_context(|| format!("GERMNF_PRECISION_BITS: `{v}` is not a positive integer"))?;
            if bits == 0 {
                bail!("GERMNF_PRECISION_BITS: must be positive");
            }
            Ok(PrecisionBudget::capped(bits))
        }
        Err(_) => Ok(PrecisionBudget::default()),
    }
}

fn parse_file(text: &str) -> anyhow::Result<FamilyFile> {
    let file: FamilyFile = serde_json::from_str(text).map_err(|e| anyhow::anyhow!("parse error: {e}"))?;
    if file.schema != FAMILY_SCHEMA_VERSION {
        bail!(
            "parse error: schema: unsupported version {}, expected {FAMILY_SCHEMA_VERSION}",
            file.schema
        );
    }
    Ok(file)
}

/// Applies `--degree`: lowering truncates, raising is refused.
fn effective_degree(cli: &Cli, file: &FamilyFile) -> anyhow::Result<u32> {
    let d = cli.degree.unwrap_or(file.degree);
    if d < 2 {
        bail!("usage error: --degree must be at least 2, got {d}");
    }
    if d > file.degree && cli.command != Command::Generate {
        bail!(
            "usage error: --degree {d} exceeds the degree {} of the input jet",
            file.degree
        );
    }
    Ok(d)
}

fn complex_family(file: &FamilyFile, d: u32) -> anyhow::Result<Family> {
    let fam: Family = file.to_family()?;
    Ok(if d < fam.degree() { fam.truncate(d)? } else { fam })
}

fn verdict_line(name: &str, v: &Verdict) -> String {
    let word = match v.verdict {
        Decision::Yes => "yes",
        Decision::No => "no",
        Decision::Indeterminate => "indeterminate",
    };
    match &v.reason {
        Some(r) => format!("{name}: {word} ({r})"),
        None => format!("{name}: {word}"),
    }
}

fn analyze(cli: &Cli, fam: &Family, budget: PrecisionBudget) -> anyhow::Result<Outcome> {
    let mut opts = ClassifyOptions::for_degree(fam.degree());
    if let Some(b) = cli.bound_omega {
        opts.omega_bound = b;
    }
    opts.branch_bound = cli.bound_branch;
    opts.torsion_bound = cli.bound_torsion;
    opts.precision = budget;
    let report: ClassificationReport = classify_family(fam, &opts)?;
    let mut text = vec![format!(
        "family of {} germ(s) in {} variables, degree {}",
        report.p,
        report.n,
        fam.degree()
    )];
    text.push(format!(
        "commuting: {}",
        if report.commutativity.commuting { "yes" } else { "no" }
    ));
    text.push(format!("relation lattice rank: {}", report.rank_lattice));
    for (name, v) in report.verdicts() {
        text.push(verdict_line(name, v));
    }
    text.push(format!(
        "normal form theorem applies: {}",
        if report.theorem_hypotheses_hold() { "yes" } else { "not established" }
    ));
    let mut payload = serde_json::to_value(&report)?;
    payload["theorem_hypotheses_hold"] = json!(report.theorem_hypotheses_hold());
    Ok(Outcome {
        payload,
        text: text.join("\n"),
        indeterminate: report.any_indeterminate(),
    })
}

fn family_text(label: &str, fam: &germnf::germ::Family<impl germnf::Scalar>) -> String {
    fam.germs()
        .iter()
        .enumerate()
        .map(|(i, g)| format!("{label}{} = {}", subscript(i + 1), g.display_string()))
        .collect::<Vec<_>>()
        .join("\n")
}

fn subscript(k: usize) -> String {
    k.to_string()
        .chars()
        .map(|c| char::from_u32(0x2080 + c.to_digit(10).unwrap_or(0)).unwrap_or(c))
        .collect()
}

fn normalize(cli: &Cli, fam: &Family) -> anyhow::Result<Outcome> {
    let rho_pairing = if cli.rho_equivariant {
        Some(normalform::pairing_from_eigenvalues(fam)?)
    } else {
        None
    };
    let opts = NormalizeOptions {
        rho_pairing,
        batched: cli.batched,
    };
    let r = poincare_dulac_normalize(fam, &opts)?;
    let text = format!(
        "{}\nψ = {}\neliminated monomials: {}",
        family_text("Φ̂", &r.normalized),
        r.psi.display_string(),
        r.elimination_log.len()
    );
    Ok(Outcome {
        payload: r.to_json(),
        text,
        indeterminate: false,
    })
}

fn lattice(cli: &Cli, fam: &Family) -> anyhow::Result<Outcome> {
    let e = EigenData::from_family(fam)?;
    let bound = cli.bound_omega.unwrap_or(2 * fam.degree());
    let report = lattice_report(&e, bound)?;
    let payload = serde_json::to_value(&report)?;
    let text = format!(
        "relation lattice basis: {}\nΩ points up to degree {bound}: {}\nrank of Vect Ω: {} (lattice rank {})",
        payload["basis"], payload["omega_points"], report.rank_enumerated, report.rank_lattice
    );
    Ok(Outcome {
        payload,
        text,
        indeterminate: false,
    })
}

fn first_integrals_cmd(fam: &Family) -> anyhow::Result<Outcome> {
    let basis = first_integrals(fam)?;
    let diagonal = fam.diagonals().is_ok();
    let mut entries = Vec::new();
    let mut text = vec![format!("{} first integral(s) up to degree {}", basis.len(), fam.degree())];
    for f in &basis {
        let support = if diagonal {
            verify_first_integral_support(fam, f)?.map(|g| json!(g.to_vec()))
        } else {
            None
        };
        text.push(format!("F = {f}"));
        entries.push(json!({
            "terms": serde_json::to_value(f.to_term_list())?,
            "support_outside_omega": support,
        }));
    }
    Ok(Outcome {
        payload: json!({ "basis": entries, "support_checked": diagonal }),
        text: text.join("\n"),
        indeterminate: false,
    })
}

fn verify(fam: &Family) -> anyhow::Result<Outcome> {
    let defect = germnf::classify::commutativity_report(fam)?;
    let pd = verify_pd_nf(fam)?;
    let division = division_check(fam);
    let division_ok = division.iter().all(|d| d.passes);
    let mut text = vec![
        format!("commuting: {}", if defect.commuting { "yes" } else { "no" }),
        match &pd {
            None => "Poincaré–Dulac normal form: pass".to_string(),
            Some((i, m, g)) => format!("Poincaré–Dulac normal form: fail at (Φ{}, component {m}, {})", subscript(*i), g.monomial_string()),
        },
    ];
    match division.iter().find(|d| !d.passes) {
        None => text.push("division by x_m: pass".into()),
        Some(d) => text.push(format!(
            "division by x_m: fail at (Φ{}, component {}, {})",
            subscript(d.germ),
            d.component,
            d.offending.as_ref().map(|g| g.monomial_string()).unwrap_or_default()
        )),
    }
    let certificate = if division_ok {
        let e = EigenData::from_family(fam)?;
        let lat = relation_lattice(&e)?;
        let cert = extract_integrable_certificate(fam, &lat)?;
        text.push(format!(
            "integrable normal form certificate: {}",
            if cert.is_valid() { "valid" } else { "residuals nonzero" }
        ));
        Some(cert.to_json())
    } else {
        None
    };
    Ok(Outcome {
        payload: json!({
            "commutativity": serde_json::to_value(&defect)?,
            "pd_nf": pd.map(|(i, m, g)| json!({"germ": i, "component": m, "exponents": g.to_vec()})),
            "division": serde_json::to_value(&division)?,
            "certificate": certificate,
        }),
        text: text.join("\n"),
        indeterminate: false,
    })
}

fn generate(cli: &Cli, fam: &Family, d: u32) -> anyhow::Result<Outcome> {
    let e = EigenData::from_family(fam)?;
    let lat = relation_lattice(&e)?;
    let out = generate_integrable_nf(&e, &lat, d, cli.seed)?;
    Ok(Outcome {
        payload: json!({
            "seed": cli.seed,
            "family": serde_json::to_value(FamilyFile::from_family(&out))?,
        }),
        text: family_text("Φ", &out),
        indeterminate: false,
    })
}

fn realcase(cli: &Cli, file: &FamilyFile, d: u32) -> anyhow::Result<Outcome> {
    let fam: RealFamily = file.to_family()?;
    let fam = if d < fam.degree() { fam.truncate(d)? } else { fam };
    let r = normalize_real_family(&fam, cli.batched)?;
    let text = format!(
        "{}\nT = {}",
        family_text("Φ̂", &r.real_normal_form),
        r.real_conjugator.display_string()
    );
    Ok(Outcome {
        payload: r.to_json(),
        text,
        indeterminate: false,
    })
}

fn run(cli: &Cli) -> anyhow::Result<(Value, String, bool)> {
    let started = Instant::now();
    let raw = std::fs::read(&cli.input).with_context(|| format!("cannot read {}", cli.input.display()))?;
    let digest = hex::encode(Sha256::digest(&raw));
    let text = String::from_utf8(raw).context("input is not UTF-8")?;
    let file = parse_file(&text)?;
    let d = effective_degree(cli, &file)?;
    if cli.bound_omega == Some(0) || cli.bound_branch == 0 || cli.bound_torsion == 0 {
        bail!("usage error: bounds must be positive");
    }
    let budget = precision()?;
    let outcome = match cli.command {
        Command::Realcase => realcase(cli, &file, d)?,
        Command::Generate => {
            let fam: Family = file.to_family()?;
            generate(cli, &fam, d)?
        }
        other => {
            let fam = complex_family(&file, d)?;
            match other {
                Command::Analyze => analyze(cli, &fam, budget)?,
                Command::Normalize => normalize(cli, &fam)?,
                Command::Lattice => lattice(cli, &fam)?,
                Command::FirstIntegrals => first_integrals_cmd(&fam)?,
                Command::Verify => verify(&fam)?,
                Command::Realcase | Command::Generate => unreachable!(),
            }
        }
    };
    let report = json!({
        "tool": "germnf",
        "version": env!("CARGO_PKG_VERSION"),
        "input_digest": format!("sha256:{digest}"),
        "command": cli.command.name(),
        "config": {
            "degree": d,
            "bound_omega": cli.bound_omega.unwrap_or(2 * d),
            "bound_branch": cli.bound_branch,
            "bound_torsion": cli.bound_torsion,
            "rho_equivariant": cli.rho_equivariant,
            "batched": cli.batched,
            "seed": cli.seed,
            "precision_bits": budget.max_bits,
        },
        "payload": outcome.payload,
        "timing": { "elapsed_ms": started.elapsed().as_millis() as u64 },
    });
    Ok((report, outcome.text, outcome.indeterminate))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, text, indeterminate)) => {
            let body = match cli.format {
                Format::Json => serde_json::to_string_pretty(&report).expect("serializable") + "\n",
                Format::Text => text + "\n",
            };
            let written = match &cli.output {
                Some(path) => std::fs::write(path, body)
                    .with_context(|| format!("cannot write {}", path.display())),
                None => {
                    print!("{body}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
            ExitCode::from(if indeterminate { 2 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
