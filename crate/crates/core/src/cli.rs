//! The `gwcert` command line: argument parsing, dispatch and report rendering.

use crate::bt_tree::Tree;
use crate::certificate::{build_and_verify, element_label, CaseVerdict, Certificate, CertificateConfig};
use crate::error::{Error, Result};
use crate::fieldspec::FieldSpec;
use crate::group::{SemidirectGroup, Verdict, DEFAULT_ORDER_CAP};
use crate::numberfield::{Field, FieldElement};
use crate::residue::{t_order_prime, t_order_rational, Modulus, ResidueRing};
use crate::valuation::{OwRing, Ring};
use crate::verify::{verify_all, VerifyConfig, VerifyReport};
use crate::word::{GeneratingSet, Gw, DEFAULT_BFS_CAP};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COUNTEREXAMPLE: i32 = 2;
pub const EXIT_SKIPPED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INTERNAL: i32 = 70;

pub const SCHEMA: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "gwcert", version, about = "Finite checks for G_w = Z[w, 1/w] x| Z")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Degree, integral basis and unit data of the field
    FieldInfo,
    /// The primes M_w where w is not a unit, with S-unit generators
    Mw,
    /// DOT export of a ball in the tree of one prime of M_w
    Tree,
    /// The residue ring O_w/q^m and the order of w in it
    Quotient,
    /// Hyper-elementary subgroups of O_w/𝔮^m x| Z/t and their verdicts
    Classify,
    /// Select (q, m), build F_n and check every hyper-elementary subgroup
    Certificate,
    /// Every randomized suite plus the certificate
    VerifyAll,
}

#[derive(clap::Args, Debug, Clone)]
struct Opts {
    /// TOML field spec; Q when omitted
    #[arg(long, global = true)]
    field: Option<PathBuf>,
    /// w as a rational or an expression like "1+1*w"
    #[arg(long, global = true)]
    w: Option<String>,
    /// Scale n (tree: ball radius)
    #[arg(long, global = true, default_value_t = 1)]
    n: u32,
    /// Generators "x,z;x,z;..." of S; the standard set when omitted
    #[arg(long, global = true)]
    gens: Option<String>,
    #[arg(long, global = true)]
    q: Option<u64>,
    #[arg(long, global = true, default_value_t = 1)]
    m: u32,
    /// Index of the prime ideal above q (tree: index into M_w)
    #[arg(long, global = true)]
    prime: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_ORDER_CAP)]
    cap_order: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_BFS_CAP)]
    cap_bfs: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Samples per randomized suite
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    #[arg(long, global = true)]
    json: bool,
}

/// A finished command: exit code, JSON body and text rendering.
struct Report {
    code: i32,
    json: Value,
    text: String,
}

/// Parses `argv` (program name first), runs the command and writes the report to `out`.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{}", e.render()) } else { write!(err, "{}", e.render()) };
            return code;
        }
    };
    let report = dispatch(&cli).unwrap_or_else(|e| error_report(&cli.opts, &e));
    let failed = report.code == EXIT_USAGE || report.code == EXIT_INTERNAL;
    if cli.opts.json {
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report.json).expect("reports serialize"));
    } else if !failed {
        let _ = out.write_all(report.text.as_bytes());
    }
    if failed {
        let _ = writeln!(err, "error: {}", report.json["error"].as_str().unwrap_or("unknown"));
    }
    report.code
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CounterexampleFound(_) | Error::NoConjugatorFound => EXIT_COUNTEREXAMPLE,
        Error::GroupTooLarge { .. } | Error::CapExceeded(_) | Error::BallTooLarge(_) | Error::BusemannCap(_) => EXIT_SKIPPED,
        Error::Anomaly(_) => EXIT_INTERNAL,
        _ => EXIT_USAGE,
    }
}

fn error_report(opts: &Opts, e: &Error) -> Report {
    let code = exit_code(e);
    let kind = if code == EXIT_SKIPPED { "skipped" } else { "error" };
    Report {
        code,
        json: json!({ "schema": SCHEMA, "seed": opts.seed, kind: e.to_string() }),
        text: format!("{kind}: {e}\n"),
    }
}

fn dispatch(cli: &Cli) -> Result<Report> {
    let o = &cli.opts;
    let (field, ring) = load_field(o)?;
    match cli.command {
        Command::FieldInfo => field_info(o, &field, &ring),
        Command::Mw => mw(o, &ow_ring(o, &field, &ring)?),
        Command::Tree => tree(o, &ow_ring(o, &field, &ring)?),
        Command::Quotient => quotient(o, &ow_ring(o, &field, &ring)?),
        Command::Classify => classify(o, &ow_ring(o, &field, &ring)?),
        Command::Certificate => {
            let ow = ow_ring(o, &field, &ring)?;
            let s = generators(o, &ow)?;
            let cc = CertificateConfig { cap_order: o.cap_order, cap_bfs: o.cap_bfs, seed: o.seed, ..Default::default() };
            Ok(certificate_report(o, &build_and_verify(&ow, o.n, &s, &cc)?))
        }
        Command::VerifyAll => {
            let ow = ow_ring(o, &field, &ring)?;
            let s = generators(o, &ow)?;
            let cfg = VerifyConfig { seed: o.seed, samples: o.samples, n: o.n, cap_order: o.cap_order, cap_bfs: o.cap_bfs };
            Ok(verify_report(&verify_all(&ow, &s, &cfg)?))
        }
    }
}

fn load_field(o: &Opts) -> Result<(Field, Ring)> {
    match &o.field {
        Some(path) => FieldSpec::load(path)?.build(),
        None => FieldSpec::rationals().build(),
    }
}

fn ow_ring(o: &Opts, field: &Field, ring: &Ring) -> Result<OwRing> {
    let text = o.w.as_deref().ok_or_else(|| Error::Parse("--w is required".into()))?;
    OwRing::new(ring, &FieldElement::parse(field, text)?)
}

/// Parses "x,z;x,z;..." into a generating set.
pub fn parse_generators(gw: &Gw, text: &str) -> Result<GeneratingSet> {
    let mut gens = Vec::new();
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (x, z) = part.rsplit_once(',').ok_or_else(|| Error::Parse(format!("generator {part:?} is not x,z")))?;
        let z: i64 = z.trim().parse().map_err(|_| Error::Parse(format!("bad exponent in {part:?}")))?;
        gens.push(gw.element(FieldElement::parse(gw.ow().field(), x.trim())?, z)?);
    }
    if gens.is_empty() {
        return Err(Error::Parse("empty generator list".into()));
    }
    Ok(GeneratingSet::new(gw, gens))
}

fn generators(o: &Opts, ow: &OwRing) -> Result<GeneratingSet> {
    let gw = Gw::new(ow)?;
    match &o.gens {
        Some(t) => parse_generators(&gw, t),
        None => Ok(gw.standard_generators()),
    }
}

fn strings<T: ToString>(v: &[T]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn field_info(o: &Opts, field: &Field, ring: &Ring) -> Result<Report> {
    let units = ring.unit_data()?;
    let json = json!({
        "schema": SCHEMA,
        "seed": o.seed,
        "min_poly": field.min_poly_string(),
        "degree": field.degree(),
        "integral_basis": strings(ring.integral_basis()),
        "unit_rank": units.rank,
        "torsion_order": units.torsion_order,
        "torsion_generator": units.torsion_generator.to_string(),
        "fundamental_units": strings(&units.fundamental_units),
    });
    let mut text = String::new();
    let _ = writeln!(text, "field        {}", field.min_poly_string());
    let _ = writeln!(text, "degree       {}", field.degree());
    let _ = writeln!(text, "basis        {}", strings(ring.integral_basis()).join(", "));
    let _ = writeln!(text, "unit rank    {}", units.rank);
    let _ = writeln!(text, "torsion      {} (generator {})", units.torsion_order, units.torsion_generator);
    let _ = writeln!(text, "fund. units  {}", strings(&units.fundamental_units).join(", "));
    Ok(Report { code: EXIT_OK, json, text })
}

fn mw(o: &Opts, ow: &OwRing) -> Result<Report> {
    let gens = ow.mw_generators()?;
    let mut primes = Vec::new();
    let mut text = format!("w = {}\n", ow.w());
    for (p, (k, y)) in ow.mw().iter().zip(&gens) {
        let v = ow.valuation(ow.w(), p).fin();
        primes.push(json!({ "prime": p.label(), "e": p.e, "f": p.f, "v_w": v, "k": k, "generator": y.to_string() }));
        let _ = writeln!(text, "{:<20} e={} f={} v(w)={:<3} p^{} = ({})", p.label(), p.e, p.f, v, k, y);
    }
    let nw = ow.rank_nw()?;
    let _ = writeln!(text, "n_w (rank of O^x): {nw}, rank of O_w^x: {}", nw + gens.len());
    let json = json!({ "schema": SCHEMA, "seed": o.seed, "w": ow.w().to_string(), "mw": primes, "n_w": nw, "rank_ow_units": nw + gens.len() });
    Ok(Report { code: EXIT_OK, json, text })
}

fn tree(o: &Opts, ow: &OwRing) -> Result<Report> {
    let idx = o.prime.unwrap_or(0);
    let prime = match o.q {
        Some(q) => ow.ring().primes_above(q)?.get(idx).cloned(),
        None => ow.mw().get(idx).cloned(),
    }
    .ok_or_else(|| Error::Parse(format!("no prime with index {idx}")))?;
    let t = Tree::new(ow.ring(), &prime)?;
    let center = t.identity();
    let radius = o.n as u64;
    let dot = t.to_dot(&center, radius);
    let vertices: Vec<String> = t.ball(&center, radius).iter().map(|l| l.label()).collect();
    let json = json!({ "schema": SCHEMA, "seed": o.seed, "prime": prime.label(), "radius": radius, "vertices": vertices, "dot": dot });
    Ok(Report { code: EXIT_OK, json, text: dot })
}

fn modulus(o: &Opts, ow: &OwRing) -> Result<(u64, Option<crate::valuation::PrimeIdeal>)> {
    let q = o.q.ok_or_else(|| Error::Parse("--q is required".into()))?;
    let prime = match o.prime {
        Some(i) => Some(ow.ring().primes_above(q)?.get(i).cloned().ok_or_else(|| Error::Parse(format!("no prime {i} above {q}")))?),
        None => None,
    };
    Ok((q, prime))
}

fn quotient(o: &Opts, ow: &OwRing) -> Result<Report> {
    let (q, prime) = modulus(o, ow)?;
    let (label, md) = match &prime {
        Some(p) => (format!("{}^{}", p.label(), o.m), Modulus::Prime(p.clone())),
        None => (format!("({q})^{}", o.m), Modulus::Rational(q)),
    };
    let ring = ResidueRing::new(ow, md, o.m)?;
    let mut orders = Vec::new();
    for s in 1..=o.m {
        orders.push(match &prime {
            Some(p) => t_order_prime(ow, p, s)?,
            None => t_order_rational(ow, q, s)?,
        });
    }
    let t = ring.t_order();
    let json = json!({
        "schema": SCHEMA,
        "seed": o.seed,
        "modulus": label,
        "size": ring.size(),
        "additive_orders": ring.additive_orders(),
        "t": t,
        "t_by_exponent": orders,
        "group_order": ring.size() * t,
    });
    let mut text = String::new();
    let _ = writeln!(text, "O_w / {label}: {} elements, invariants {:?}", ring.size(), ring.additive_orders());
    let _ = writeln!(text, "order of w: {t}  (s = 1..{}: {orders:?})", o.m);
    let _ = writeln!(text, "|F| = {}", ring.size() * t);
    Ok(Report { code: EXIT_OK, json, text })
}

fn classify(o: &Opts, ow: &OwRing) -> Result<Report> {
    let (q, prime) = modulus(o, ow)?;
    let idx = o.prime.unwrap_or(0);
    let prime = match prime {
        Some(p) => p,
        None => ow.ring().primes_above(q)?.get(idx).cloned().ok_or_else(|| Error::Parse(format!("no prime above {q}")))?,
    };
    let group = SemidirectGroup::new(ResidueRing::new(ow, Modulus::Prime(prime.clone()), o.m)?, o.cap_order)?;
    let t1 = t_order_prime(ow, &prime, 1)?;
    let subgroups = group.enumerate_subgroups(o.cap_order)?;
    let mut verdicts = Vec::new();
    let mut text = format!("F = O_w/{}^{} x| Z/{}, order {}, t1 = {t1}\n", prime.label(), o.m, group.t(), group.order());
    let mut bad = 0;
    for h in subgroups.iter().filter(|h| group.is_hyperelementary(h).is_some()) {
        let v = group.classify(h, t1)?;
        let gens: Vec<String> = h.generators().iter().map(|&g| element_label(&group, g)).collect();
        let witness = match v {
            Verdict::ConjugateToCyclic { x } => Some(format!("({}, 0)", group.ring().lift(x))),
            _ => None,
        };
        bad += usize::from(v == Verdict::NotClassifiable);
        let _ = writeln!(text, "{:>5}  {:<18} {:<40} {}", h.order(), v.name(), gens.join(" "), witness.as_deref().unwrap_or(""));
        verdicts.push(json!({ "generators": gens, "order": h.order(), "case": v.name(), "witness": witness }));
    }
    let _ = writeln!(text, "{} subgroups, {} hyper-elementary", subgroups.len(), verdicts.len());
    let json = json!({
        "schema": SCHEMA,
        "seed": o.seed,
        "prime": prime.label(),
        "m": o.m,
        "t": group.t(),
        "t1": t1,
        "order": group.order(),
        "subgroup_count": subgroups.len(),
        "hyperelementary_count": verdicts.len(),
        "verdicts": verdicts,
    });
    Ok(Report { code: if bad > 0 { EXIT_COUNTEREXAMPLE } else { EXIT_OK }, json, text })
}

fn certificate_text(c: &Certificate) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "w = {}, n = {}, S = {{{}}}, m2 = {}", c.w, c.n, c.s.join(", "), c.m2);
    let _ = writeln!(text, "q = {}, m = {}, t = {}, |F| = {}", c.q, c.m, c.t, c.group_order);
    for p in &c.splitting {
        let _ = writeln!(text, "  {} e={} f={} t1={} tm={}", p.label, p.e, p.f, p.t1, p.tm);
    }
    let _ = writeln!(text, "{} subgroups, {} hyper-elementary, {} base elements", c.subgroup_count, c.hyperelementary_count, c.base_elements);
    let (mut c1, mut c2) = (0, 0);
    for v in &c.verdicts {
        match &v.verdict {
            CaseVerdict::Case1 { .. } => c1 += 1,
            CaseVerdict::Case2 { .. } => c2 += 1,
            CaseVerdict::Counterexample { reason } => {
                let _ = writeln!(text, "COUNTEREXAMPLE {}: {reason}", v.generators.join(" "));
            }
        }
    }
    let _ = writeln!(text, "case 1: {c1}, case 2: {c2}, counterexamples: {}", c.counterexamples().len());
    let _ = writeln!(text, "not checked: {}", c.skipped_conditions.join(", "));
    text
}

fn certificate_report(o: &Opts, c: &Certificate) -> Report {
    let mut json = serde_json::to_value(c).expect("certificate serializes");
    json["schema"] = json!(SCHEMA);
    json["seed"] = json!(o.seed);
    let code = if c.counterexamples().is_empty() { EXIT_OK } else { EXIT_COUNTEREXAMPLE };
    Report { code, json, text: certificate_text(c) }
}

fn verify_report(r: &VerifyReport) -> Report {
    let mut text = String::new();
    for s in &r.suites {
        match &s.skipped {
            Some(why) => {
                let _ = writeln!(text, "SKIP {:<16} {why}", s.name);
            }
            None => {
                let tag = if s.failures == 0 { "PASS" } else { "FAIL" };
                let _ = writeln!(text, "{tag} {:<16} {} checks, {} failures", s.name, s.checks, s.failures);
                for n in &s.notes {
                    let _ = writeln!(text, "     {n}");
                }
            }
        }
    }
    if let Some(c) = &r.certificate {
        text.push_str(&certificate_text(c));
    }
    let code = if r.failures() > 0 {
        EXIT_COUNTEREXAMPLE
    } else if r.skips() > 0 {
        EXIT_SKIPPED
    } else {
        EXIT_OK
    };
    Report { code, json: serde_json::to_value(r).expect("report serializes"), text }
}
