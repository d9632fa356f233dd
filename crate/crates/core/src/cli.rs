//! The `orbit` command-line front end.

use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bundles::{pi1_component_order, BundleModel, Twist};
use crate::error::{Error, Result};
use crate::hyperg::{kernel_coefficients, matrix_coefficient};
use crate::jordan::{all_pass, lookup_case, sweep_ids, validate_case, CaseRecord, JordanCase};
use crate::ladder::{evaluate_bundles, extract_ab, ladder_norms, r_equals_x_sweep, seed_from_env};
use crate::models::{build_model, hw_norm_agrees, solve_gram, verify_brackets, ModelKind};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "orbit", about = "Exact ladder data for strongly minimal real nilpotent orbits")]
struct Cli {
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List registry cases with their block data.
    Cases {
        #[arg(long)]
        case: Option<String>,
        #[arg(long, default_value_t = 12)]
        pmax: u32,
        #[arg(long, default_value_t = 12)]
        nmax: u32,
    },
    /// Half-form bundles with r0, a, b and validity.
    Table {
        #[arg(long, conflicts_with = "all")]
        case: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = 12)]
        pmax: u32,
        #[arg(long, default_value_t = 12)]
        nmax: u32,
    },
    /// Bracket closure of a model's operators.
    Verify {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 3)]
        levels: u32,
    },
    /// gamma_k and the norms of f0^n s0 / n!.
    Norms {
        #[arg(long)]
        case: String,
        #[arg(long, default_value = "L0")]
        twist: String,
        #[arg(long, default_value_t = 5)]
        n: u32,
    },
    /// Reproducing-kernel coefficients.
    Kernel {
        #[arg(long)]
        case: String,
        #[arg(long, default_value = "L0")]
        twist: String,
        #[arg(long, default_value_t = 10)]
        terms: u32,
    },
    /// Matrix coefficient series at y = sinh(t)^2.
    Matcoef {
        #[arg(long)]
        case: String,
        #[arg(long, default_value = "L0")]
        twist: String,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 30)]
        terms: u32,
    },
    /// Invariant Gram matrices of a model.
    Gram {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 3)]
        levels: u32,
    },
    /// Seeded random test of the R = X identity (seed from ORBITQ_SEED).
    Sweep {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 500)]
        identities: usize,
    },
}

/// One row of the bundle table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub case_id: String,
    pub twist: Twist,
    pub r0: Rational,
    pub a: Option<Rational>,
    pub b: Option<Rational>,
    pub valid: bool,
    pub vacuum_label: String,
    pub alpha: u32,
    pub pi1_order: u32,
}

impl TableRow {
    pub fn new(c: &JordanCase, bm: &BundleModel) -> Self {
        TableRow {
            case_id: bm.case_id.clone(),
            twist: bm.twist,
            r0: bm.r0.clone(),
            a: bm.a.clone(),
            b: bm.b.clone(),
            valid: bm.valid,
            vacuum_label: bm.vacuum_label.clone(),
            alpha: bm.alpha,
            pi1_order: pi1_component_order(c),
        }
    }
}

pub const CSV_HEADER: &str = "case_id,twist,r0,a,b,valid,vacuum_label,alpha,pi1_order";

fn opt(r: &Option<Rational>) -> String {
    r.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Serializes table rows. Output depends only on the rows.
pub fn emit_table(rows: &[TableRow], format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from(CSV_HEADER);
            s.push('\n');
            for r in rows {
                let fields = [
                    r.case_id.clone(),
                    r.twist.to_string(),
                    r.r0.to_string(),
                    opt(&r.a),
                    opt(&r.b),
                    r.valid.to_string(),
                    r.vacuum_label.clone(),
                    r.alpha.to_string(),
                    r.pi1_order.to_string(),
                ];
                let line: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
                s.push_str(&line.join(","));
                s.push('\n');
            }
            s
        }
        Format::Text => {
            let mut s = format!(
                "{:<10} {:<5} {:>6} {:>6} {:>6} {:<6} {:>5} {:>4}  {}\n",
                "case", "twist", "r0", "a", "b", "valid", "alpha", "pi1", "vacuum"
            );
            for r in rows {
                let star = |x: &Option<Rational>| x.as_ref().map(|v| v.to_string()).unwrap_or_else(|| "*".into());
                s.push_str(&format!(
                    "{:<10} {:<5} {:>6} {:>6} {:>6} {:<6} {:>5} {:>4}  {}\n",
                    r.case_id,
                    r.twist.to_string(),
                    r.r0.to_string(),
                    star(&r.a),
                    star(&r.b),
                    r.valid,
                    r.alpha,
                    r.pi1_order,
                    r.vacuum_label
                ));
            }
            s
        }
    }
}

/// Table rows for one case.
pub fn table_rows(c: &JordanCase) -> Vec<TableRow> {
    evaluate_bundles(c).iter().map(|bm| TableRow::new(c, bm)).collect()
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

enum Outcome {
    Ok,
    Failed,
}

fn bundle_for(case: &str, twist: &str) -> Result<(JordanCase, BundleModel)> {
    let c = lookup_case(case)?;
    let twist: Twist = twist.parse()?;
    let bm = evaluate_bundles(&c)
        .into_iter()
        .find(|b| b.twist == twist)
        .ok_or_else(|| Error::InvalidInput(format!("{case} has no {twist} half-form bundle")))?;
    if !bm.valid {
        // Surfaces the extraction failure itself.
        extract_ab(&c, &bm.r0)?;
    }
    Ok((c, bm))
}

fn emit_json(io: &mut Io, v: &serde_json::Value) -> Result<()> {
    let s = serde_json::to_string_pretty(v).expect("json value serializes");
    writeln!(io.out, "{s}").map_err(|e| Error::InvalidInput(e.to_string()))
}

fn w(io: &mut Io, s: &str) -> Result<()> {
    io.out
        .write_all(s.as_bytes())
        .map_err(|e| Error::InvalidInput(e.to_string()))
}

fn cmd_cases(io: &mut Io, fmt: Format, case: Option<String>, pmax: u32, nmax: u32) -> Result<Outcome> {
    let ids = match case {
        Some(id) => vec![id],
        None => sweep_ids(pmax, nmax),
    };
    let cases = ids.iter().map(|id| lookup_case(id)).collect::<Result<Vec<_>>>()?;
    let ok = cases.iter().all(|c| all_pass(&validate_case(c)));
    match fmt {
        Format::Json => {
            let recs: Vec<CaseRecord> = cases.iter().map(CaseRecord::from).collect();
            emit_json(io, &serde_json::to_value(recs).unwrap())?;
        }
        Format::Csv => {
            let mut s = String::from("id,blocks,m,k,p,g,group\n");
            for c in &cases {
                let blocks: Vec<String> = c.blocks.iter().map(|b| format!("({} {} {})", b.q, b.d, b.w)).collect();
                let f = [
                    c.id.clone(),
                    blocks.join(" "),
                    c.m.to_string(),
                    c.labels.k.clone(),
                    c.labels.p.clone(),
                    c.labels.g.clone(),
                    c.labels.group.clone(),
                ];
                s.push_str(&f.iter().map(|x| csv_field(x)).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
            w(io, &s)?;
        }
        Format::Text => {
            let mut s = String::new();
            for c in &cases {
                let blocks: Vec<String> = c.blocks.iter().map(|b| format!("({},{},{})", b.q, b.d, b.w)).collect();
                let verdict = if all_pass(&validate_case(c)) { "ok" } else { "FAIL" };
                s.push_str(&format!(
                    "{:<10} m={:<3} blocks {:<28} {:<12} {}\n",
                    c.id,
                    c.m,
                    blocks.join(" "),
                    c.labels.group,
                    verdict
                ));
            }
            w(io, &s)?;
        }
    }
    Ok(if ok { Outcome::Ok } else { Outcome::Failed })
}

fn cmd_table(
    io: &mut Io,
    fmt: Format,
    case: Option<String>,
    all: bool,
    pmax: u32,
    nmax: u32,
) -> Result<Outcome> {
    let ids = match (case, all) {
        (Some(id), _) => vec![id],
        (None, true) => sweep_ids(pmax, nmax),
        (None, false) => {
            return Err(Error::InvalidInput("table needs --case ID or --all".into()));
        }
    };
    let mut rows = Vec::new();
    let mut ok = true;
    for id in &ids {
        let c = lookup_case(id)?;
        if !all_pass(&validate_case(&c)) {
            ok = false;
        }
        let r = table_rows(&c);
        if r.is_empty() && ids.len() == 1 {
            let msg = format!("{id}: no half-form bundle\n");
            if fmt == Format::Text {
                w(io, &msg)?;
                return Ok(Outcome::Ok);
            }
            let _ = io.err.write_all(msg.as_bytes());
        }
        rows.extend(r);
    }
    w(io, &emit_table(&rows, fmt))?;
    Ok(if ok { Outcome::Ok } else { Outcome::Failed })
}

fn cmd_verify(io: &mut Io, fmt: Format, model: &str, levels: u32) -> Result<Outcome> {
    let m = build_model(model.parse::<ModelKind>()?)?;
    let rep = verify_brackets(&m, levels)?;
    match fmt {
        Format::Json | Format::Csv => {
            let mut v = serde_json::to_value(&rep).unwrap();
            v["passed"] = json!(rep.passed());
            emit_json(io, &v)?;
        }
        Format::Text => {
            let mut s = format!(
                "{}: levels 0..{} ({} monomials), {} operators\n",
                rep.model, rep.max_level, rep.basis_size, rep.count
            );
            if rep.closed {
                s.push_str(&format!("closed rank {}\n", rep.rank));
            } else {
                s.push_str(&format!("NOT closed, rank {}\n", rep.rank));
                for (a, b) in &rep.failures {
                    s.push_str(&format!("  [{a}, {b}] leaves the span\n"));
                }
            }
            s.push_str(&format!("stable {}\n", rep.stable));
            s.push_str(&format!("degree contract {}\n", rep.degree_contract));
            s.push_str(&format!("grading r0 + n {}\n", rep.grading_ok));
            s.push_str(&format!(
                "sl2 [{}, {}]: compact {}, diagonal {}, lambda {}\n",
                rep.sl2.raising,
                rep.sl2.lowering,
                rep.sl2.in_compact_span,
                rep.sl2.diagonal,
                rep.sl2.lambda.as_ref().map(|l| l.to_string()).unwrap_or_else(|| "none".into())
            ));
            s.push_str(if rep.passed() { "PASS\n" } else { "FAIL\n" });
            w(io, &s)?;
        }
    }
    Ok(if rep.passed() { Outcome::Ok } else { Outcome::Failed })
}

fn cmd_norms(io: &mut Io, fmt: Format, case: &str, twist: &str, n: u32) -> Result<Outcome> {
    let (_, bm) = bundle_for(case, twist)?;
    let (a, b) = (bm.a.clone().unwrap(), bm.b.clone().unwrap());
    let (gammas, _) = ladder_norms(&bm.r0, &a, &b, n)?;
    let norms: Vec<Rational> = (0..=n)
        .map(|k| ladder_norms(&bm.r0, &a, &b, k).map(|x| x.1))
        .collect::<Result<_>>()?;
    match fmt {
        Format::Json => emit_json(
            io,
            &json!({
                "case_id": case, "twist": bm.twist, "r0": bm.r0, "a": a, "b": b,
                "gamma": gammas, "norm": norms,
            }),
        )?,
        Format::Csv => {
            let mut s = String::from("n,gamma,norm\n");
            for (k, nm) in norms.iter().enumerate() {
                let g = if k == 0 { String::new() } else { gammas[k - 1].to_string() };
                s.push_str(&format!("{k},{g},{nm}\n"));
            }
            w(io, &s)?;
        }
        Format::Text => {
            let mut s = format!("{case} {}: r0 = {}, a = {a}, b = {b}\n", bm.twist, bm.r0);
            for (k, nm) in norms.iter().enumerate() {
                let g = if k == 0 { "-".to_string() } else { gammas[k - 1].to_string() };
                s.push_str(&format!("n={k:<3} gamma {g:>14}  ||f0^n s0/n!||^2 = {nm}\n"));
            }
            w(io, &s)?;
        }
    }
    Ok(Outcome::Ok)
}

fn cmd_kernel(io: &mut Io, fmt: Format, case: &str, twist: &str, terms: u32) -> Result<Outcome> {
    let (_, bm) = bundle_for(case, twist)?;
    let (a, b) = (bm.a.clone().unwrap(), bm.b.clone().unwrap());
    let p = kernel_coefficients(&bm.r0, &a, &b, terms)?;
    // p_n ||f0^n s0||^2 = 1, with ||f0^n s0||^2 = gamma_1 ... gamma_n.
    let (gammas, _) = ladder_norms(&bm.r0, &a, &b, terms)?;
    let mut prod = Rational::one();
    let mut ok = p[0].is_one();
    for (k, g) in gammas.iter().enumerate() {
        prod = &prod * g;
        ok &= (&p[k + 1] * &prod).is_one();
    }
    match fmt {
        Format::Json => emit_json(
            io,
            &json!({"case_id": case, "twist": bm.twist, "p": p, "reciprocal_check": ok}),
        )?,
        Format::Csv => {
            let mut s = String::from("n,p\n");
            for (k, x) in p.iter().enumerate() {
                s.push_str(&format!("{k},{x}\n"));
            }
            w(io, &s)?;
        }
        Format::Text => {
            let mut s = format!("{case} {}: kernel coefficients\n", bm.twist);
            for (k, x) in p.iter().enumerate() {
                s.push_str(&format!("p_{k} = {x}\n"));
            }
            s.push_str(&format!("p_n ||f0^n s0||^2 = 1: {ok}\n"));
            w(io, &s)?;
        }
    }
    Ok(if ok { Outcome::Ok } else { Outcome::Failed })
}

fn cmd_matcoef(io: &mut Io, fmt: Format, case: &str, twist: &str, t: f64, terms: u32) -> Result<Outcome> {
    let (_, bm) = bundle_for(case, twist)?;
    if !t.is_finite() {
        return Err(Error::InvalidInput("t must be finite".into()));
    }
    let yf = t.sinh().powi(2);
    let y = Rational::from_f64(yf).ok_or_else(|| Error::Domain("sinh(t)^2 overflows".into()))?;
    // sinh and the square each contribute a few units in the last place.
    let conv = Rational::from_f64(yf * 4.0 * f64::EPSILON + f64::MIN_POSITIVE).unwrap();
    let v = matrix_coefficient(&bm.r0, bm.a.as_ref().unwrap(), bm.b.as_ref().unwrap(), &y, terms)?;
    match fmt {
        Format::Json | Format::Csv => emit_json(
            io,
            &json!({
                "case_id": case, "twist": bm.twist, "t": t, "y": y,
                "conversion_error_bound": conv, "terms": terms,
                "value": v.value, "remainder_bound": v.remainder_bound,
                "value_f64": v.value.to_f64(),
            }),
        )?,
        Format::Text => {
            let s = format!(
                "{case} {}: t = {t}, y = sinh(t)^2 ~ {yf:e} (surrogate error <= {:e})\n\
                 2F1 partial sum ({terms} terms) = {:.15} (tail <= {:e})\n",
                bm.twist,
                conv.to_f64(),
                v.value.to_f64(),
                v.remainder_bound.to_f64()
            );
            w(io, &s)?;
        }
    }
    Ok(Outcome::Ok)
}

fn cmd_gram(io: &mut Io, fmt: Format, model: &str, levels: u32) -> Result<Outcome> {
    let m = build_model(model.parse::<ModelKind>()?)?;
    let rep = solve_gram(&m, levels)?;
    let mut failures = rep.failures.clone();
    let mut hw = Vec::new();
    for n in 0..=levels {
        if m.ladder_case().is_some() {
            match hw_norm_agrees(&m, &rep, n) {
                Ok(x) => hw.push(x),
                Err(e) => {
                    failures.push(e.to_string());
                    hw.push(crate::models::model_hw_norm(&m, &rep, n)?);
                }
            }
        } else {
            hw.push(crate::models::model_hw_norm(&m, &rep, n)?);
        }
    }
    let passed = failures.is_empty() && rep.passed();
    match fmt {
        Format::Json | Format::Csv => {
            let levels_json: Vec<_> = rep
                .levels
                .iter()
                .map(|g| {
                    let entries: Vec<_> = (0..g.dim())
                        .flat_map(|i| (0..g.dim()).map(move |j| (i, j)))
                        .filter_map(|(i, j)| {
                            let v = g.get(i, j);
                            (!v.is_zero()).then(|| {
                                json!([m.ctx.format_monomial(&g.basis[i]), m.ctx.format_monomial(&g.basis[j]), v])
                            })
                        })
                        .collect();
                    json!({"level": g.level, "dim": g.dim(), "diagonal": g.is_diagonal(), "entries": entries})
                })
                .collect();
            emit_json(
                io,
                &json!({
                    "model": rep.model, "levels": levels_json, "hw_norms": hw,
                    "well_defined": rep.well_defined, "symmetric": rep.symmetric,
                    "positive": rep.positive, "adjoint": rep.adjoint,
                    "compact_invariant": rep.compact_invariant,
                    "failures": failures, "passed": passed,
                }),
            )?
        }
        Format::Text => {
            let mut s = format!("{}: invariant form on levels 0..{levels}\n", rep.model);
            for (g, h) in rep.levels.iter().zip(&hw) {
                s.push_str(&format!(
                    "level {}: dim {}, diagonal {}, hw norm / (n!)^2 = {h}\n",
                    g.level,
                    g.dim(),
                    g.is_diagonal()
                ));
            }
            s.push_str(&format!(
                "well-defined {}, symmetric {}, positive {}, adjoint {}, compact-invariant {}\n",
                rep.well_defined, rep.symmetric, rep.positive, rep.adjoint, rep.compact_invariant
            ));
            for f in &failures {
                s.push_str(&format!("  {f}\n"));
            }
            s.push_str(if passed { "PASS\n" } else { "FAIL\n" });
            w(io, &s)?;
        }
    }
    Ok(if passed { Outcome::Ok } else { Outcome::Failed })
}

fn cmd_sweep(io: &mut Io, fmt: Format, samples: usize, identities: usize) -> Result<Outcome> {
    let seed = seed_from_env();
    let rep = r_equals_x_sweep(seed, samples, identities)?;
    match fmt {
        Format::Json | Format::Csv => {
            let mut v = serde_json::to_value(&rep).unwrap();
            v["passed"] = json!(rep.passed());
            emit_json(io, &v)?;
        }
        Format::Text => {
            let mut s = format!(
                "seed {seed}: {samples} ladder points, {identities} J-identity samples, {} failures\n",
                rep.failures.len()
            );
            for f in &rep.failures {
                s.push_str(&format!("  {} p={} t={:?}: {}\n", f.case_id, f.p, f.t, f.detail));
            }
            w(io, &s)?;
        }
    }
    Ok(if rep.passed() { Outcome::Ok } else { Outcome::Failed })
}

/// Runs the CLI on `argv` (including the program name), writing to the given
/// streams. Returns the process exit code: 0 on success, 1 when a
/// verification fails, 2 on invalid input.
pub fn run_with(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return 0;
                }
                _ => 2,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let mut io = Io { out, err };
    let fmt = cli.format;
    let res = match cli.command {
        Command::Cases { case, pmax, nmax } => cmd_cases(&mut io, fmt, case, pmax, nmax),
        Command::Table { case, all, pmax, nmax } => cmd_table(&mut io, fmt, case, all, pmax, nmax),
        Command::Verify { model, levels } => cmd_verify(&mut io, fmt, &model, levels),
        Command::Norms { case, twist, n } => cmd_norms(&mut io, fmt, &case, &twist, n),
        Command::Kernel { case, twist, terms } => cmd_kernel(&mut io, fmt, &case, &twist, terms),
        Command::Matcoef { case, twist, t, terms } => cmd_matcoef(&mut io, fmt, &case, &twist, t, terms),
        Command::Gram { model, levels } => cmd_gram(&mut io, fmt, &model, levels),
        Command::Sweep { samples, identities } => cmd_sweep(&mut io, fmt, samples, identities),
    };
    match res {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Failed) => 1,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e}");
            match e {
                Error::Consistency(_) | Error::Extraction(_) => 1,
                _ => 2,
            }
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run(argv: &[String]) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    run_with(argv, &mut out, &mut err)
}

