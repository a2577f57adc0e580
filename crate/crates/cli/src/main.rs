use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use nagata_core::cache::JsonlCache;
use nagata_core::interp::field::DEFAULT_PRIME;
use nagata_core::interp::{
    h0_class, hr_check, nef_cross_check, run_batch, H0Cache, OracleParams, DEFAULT_TRIALS,
    SEED_ENV,
};
use nagata_core::mosaic::{axis_consistency, AxisCheck};
use nagata_core::nagata::trace::{trace, Check, Claim, TraceReport, Verdict};
use nagata_core::nef::negative_family_members;
use nagata_core::{
    check_good, conservation_report, corollary_condition,
    general_fibre, is_nef_small, lemma_step5, minus_one_classes, nef_target, parse_class,
    profile, reduce, restrict, AnyClass, CandidateCycle, Coverage, Error, MosaicData,
    NagataProfile, PicardClass, Rule, RuledClass, TransformLog,
};

#[derive(Parser)]
#[command(
    name = "nagata",
    version,
    about = "Divisor-class arithmetic, Cremona transformations, mosaic checks and interpolation for the Nagata bound"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Table)]
    format: Format,
    /// Exit with status 1 when the verdict is negative.
    #[arg(long, global = true)]
    strict: bool,
    /// Report cache counters on standard error.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = DEFAULT_PRIME)]
    prime: u64,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u32,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
}

impl OracleArgs {
    fn params(&self) -> OracleParams {
        OracleParams {
            prime: self.prime,
            trials: self.trials,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Copy)]
enum RuleArg {
    Rule(Rule),
    Elementary,
}

fn parse_rule(s: &str) -> Result<RuleArg, String> {
    match s {
        "elem" | "elementary" => Ok(RuleArg::Elementary),
        _ => s
            .parse::<u8>()
            .ok()
            .and_then(Rule::from_number)
            .map(RuleArg::Rule)
            .ok_or_else(|| format!("expected 1, 2, 3, 4 or elem, got {s:?}")),
    }
}

fn parse_step(s: &str) -> Result<u8, String> {
    let digits = s.strip_prefix("step").unwrap_or(s);
    match digits.parse::<u8>() {
        Ok(n @ 1..=5) => Ok(n),
        _ => Err(format!("expected step1..step5, got {s:?}")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// k, alpha, eps and coverage of r.
    Profile { r: u64 },
    /// Profiles for every r in a range.
    Scan {
        r_min: u64,
        r_max: u64,
        /// JSON-lines cache, reread on later runs.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Apply one Cremona rule or an elementary quadratic transformation.
    Cremona {
        class: String,
        #[arg(long, value_parser = parse_rule)]
        rule: RuleArg,
        #[arg(long)]
        s: Option<u32>,
        /// Three point indices for `--rule elem`.
        #[arg(long, value_delimiter = ',')]
        indices: Option<Vec<usize>>,
        /// Positions the rule acts on (default: the leading ones).
        #[arg(long, value_delimiter = ',')]
        designate: Option<Vec<usize>>,
    },
    /// Reduce a plane class to standard form.
    Reduce { class: String },
    /// Nef test for at most 8 points.
    Nef { class: String },
    /// All (-1)-classes on r <= 8 points.
    MinusOne { r: usize },
    /// Generic h0 by interpolation over a prime field.
    H0 {
        class: String,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Whether r general mu-fold points impose independent conditions in degree d.
    Hr {
        d: u64,
        mu: u64,
        r: u64,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Run a JSON-lines file of h0 requests.
    Batch {
        file: PathBuf,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Compare the nef test with an exhaustive scan of effective classes.
    NefCross {
        class: String,
        #[arg(long, default_value_t = 3)]
        bound: i64,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Replay one degeneration step for (r, mu, j).
    Trace {
        #[arg(value_parser = parse_step)]
        step: u8,
        r: u64,
        mu: u64,
        j: u64,
    },
    /// Restrictions, conservation and (optionally) goodness of a cycle.
    MosaicCheck { file: PathBuf },
    /// chi(d, mu, r) against r mu / 2 - 4.
    Corollary { d: u64, mu: u64, r: u64 },
    /// Smallest d with d^2 > r mu^2.
    NefTarget { r: u64, mu: u64 },
    /// Nefness of (a x b : c, c) on F0 blown up at two points.
    Lemma { a: i64, b: i64, c: i64 },
}

const EXIT_NEGATIVE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            msg: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        msg: msg.into(),
    }
}

fn internal(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INTERNAL,
        msg: msg.into(),
    }
}

struct Outcome {
    output: Value,
    table: String,
    csv: Option<String>,
    negative: bool,
}

fn to_value<T: Serialize>(x: &T) -> Result<Value, Failure> {
    serde_json::to_value(x).map_err(|e| internal(format!("serialization: {e}")))
}

fn class_arg(s: &str) -> Result<AnyClass, Failure> {
    parse_class(s).map_err(Failure::from)
}

fn picard_arg(s: &str) -> Result<PicardClass, Failure> {
    match class_arg(s)? {
        AnyClass::Picard(p) => Ok(p),
        AnyClass::Ruled(_) => Err(usage("expected a plane class such as (4; 2,2,2,2,2)")),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Profile { .. } => "profile",
        Command::Scan { .. } => "scan",
        Command::Cremona { .. } => "cremona",
        Command::Reduce { .. } => "reduce",
        Command::Nef { .. } => "nef",
        Command::MinusOne { .. } => "minus-one",
        Command::H0 { .. } => "h0",
        Command::Hr { .. } => "hr",
        Command::Batch { .. } => "batch",
        Command::NefCross { .. } => "nef-cross",
        Command::Trace { .. } => "trace",
        Command::MosaicCheck { .. } => "mosaic-check",
        Command::Corollary { .. } => "corollary",
        Command::NefTarget { .. } => "nef-target",
        Command::Lemma { .. } => "lemma",
    }
}

fn echo_class(s: &str) -> Value {
    match parse_class(s) {
        Ok(c) => json!(c.to_string()),
        Err(_) => json!(s),
    }
}

fn inputs(c: &Command, strict: bool) -> Value {
    let oracle = |o: &OracleArgs| json!({"prime": o.prime, "trials": o.trials, "seed": o.seed});
    let mut v = match c {
        Command::Profile { r } => json!({ "r": r }),
        Command::Scan { r_min, r_max, cache } => {
            json!({ "r_min": r_min, "r_max": r_max, "cache": cache.is_some() })
        }
        Command::Cremona {
            class,
            rule,
            s,
            indices,
            designate,
        } => json!({
            "class": echo_class(class),
            "rule": match rule { RuleArg::Rule(r) => r.name(), RuleArg::Elementary => "elementary" },
            "s": s,
            "indices": indices,
            "designate": designate,
        }),
        Command::Reduce { class } | Command::Nef { class } => json!({ "class": echo_class(class) }),
        Command::MinusOne { r } => json!({ "r": r }),
        Command::H0 { class, oracle: o } => {
            json!({ "class": echo_class(class), "oracle": oracle(o) })
        }
        Command::Hr { d, mu, r, oracle: o } => {
            json!({ "d": d, "mu": mu, "r": r, "oracle": oracle(o) })
        }
        Command::Batch { file, cache } => {
            json!({ "file": file.display().to_string(), "cache": cache.is_some() })
        }
        Command::NefCross { class, bound, oracle: o } => {
            json!({ "class": echo_class(class), "bound": bound, "oracle": oracle(o) })
        }
        Command::Trace { step, r, mu, j } => json!({ "step": step, "r": r, "mu": mu, "j": j }),
        Command::MosaicCheck { file } => json!({ "file": file.display().to_string() }),
        Command::Corollary { d, mu, r } => json!({ "d": d, "mu": mu, "r": r }),
        Command::NefTarget { r, mu } => json!({ "r": r, "mu": mu }),
        Command::Lemma { a, b, c } => json!({ "a": a, "b": b, "c": c }),
    };
    v["strict"] = json!(strict);
    v
}

fn profile_row(p: &NagataProfile) -> [String; 6] {
    [
        p.r.to_string(),
        p.k.to_string(),
        p.alpha.to_string(),
        p.square.to_string(),
        p.epsilon_decimal(12),
        p.coverage.to_string(),
    ]
}

const PROFILE_HEADER: [&str; 6] = ["r", "k", "alpha", "square", "epsilon", "coverage"];

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
    };
    line(header.to_vec(), &mut out);
    for row in rows {
        line(row.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

fn cmd_profile(r: u64) -> Result<Outcome, Failure> {
    let p = profile(r)?;
    let mut t = String::new();
    writeln!(t, "r = {}  k = {}  alpha = {}", p.r, p.k, p.alpha).unwrap();
    writeln!(t, "eps = sqrt({}) - {} = {}", p.r, p.k, p.epsilon_decimal(20)).unwrap();
    writeln!(t, "coverage: {}", p.coverage).unwrap();
    Ok(Outcome {
        negative: p.coverage == Coverage::NotCovered,
        output: to_value(&p)?,
        table: t,
        csv: Some(csv(&PROFILE_HEADER, &[profile_row(&p).to_vec()])),
    })
}

fn cmd_scan(r_min: u64, r_max: u64, cache: Option<&PathBuf>, verbose: u8) -> Result<Outcome, Failure> {
    if r_min < 2 || r_min > r_max {
        return Err(usage(format!("bad range {r_min}..{r_max}: need 2 <= r_min <= r_max")));
    }
    let mut store: JsonlCache<u64, NagataProfile> = match cache {
        Some(path) => JsonlCache::open(path)?,
        None => JsonlCache::in_memory(),
    };
    let mut profiles = Vec::new();
    for r in r_min..=r_max {
        profiles.push(store.get_or_try_insert_with(r, || profile(r))?);
    }
    if verbose > 0 {
        eprintln!(
            "scan: {} computed, {} from cache",
            store.misses(),
            store.hits()
        );
    }
    let rows: Vec<Vec<String>> = profiles.iter().map(|p| profile_row(p).to_vec()).collect();
    Ok(Outcome {
        output: to_value(&profiles)?,
        table: table(&PROFILE_HEADER, &rows),
        csv: Some(csv(&PROFILE_HEADER, &rows)),
        negative: false,
    })
}

fn log_table(log: &TransformLog) -> String {
    let mut t = String::new();
    for (n, step) in log.steps().iter().enumerate() {
        writeln!(t, "  {}. {:?}: {} -> {}", n + 1, step.kind, step.before, step.after).unwrap();
    }
    t
}

fn cmd_cremona(
    class: &str,
    rule: RuleArg,
    s: Option<u32>,
    indices: Option<&[usize]>,
    designate: Option<&[usize]>,
) -> Result<Outcome, Failure> {
    let c = class_arg(class)?;
    let mut log = TransformLog::new();
    let image: AnyClass = match (rule, &c) {
        (RuleArg::Elementary, AnyClass::Picard(p)) => {
            let Some(&[i, j, k]) = indices else {
                return Err(usage("--rule elem needs --indices i,j,k (three indices)"));
            };
            log.elementary(p, i, j, k)?.into()
        }
        (RuleArg::Rule(r), AnyClass::Ruled(rc)) => {
            let Some(s) = s else {
                return Err(usage(format!("{} needs --s", r.name())));
            };
            log.rule(r, rc, s, designate)?.into()
        }
        (RuleArg::Elementary, AnyClass::Ruled(_)) => {
            return Err(usage("--rule elem acts on plane classes"))
        }
        (RuleArg::Rule(r), AnyClass::Picard(_)) => {
            return Err(usage(format!("{} acts on F0/F1 classes such as (4:2; 1,1)@F1", r.name())))
        }
    };
    match log.replay() {
        Ok(Some(last)) if last == image => {}
        _ => return Err(internal("transform log does not replay to the image")),
    }
    let mut t = format!("{c} -> {image}\n");
    t.push_str(&log_table(&log));
    Ok(Outcome {
        output: json!({ "image": image.to_string(), "log": to_value(&log)? }),
        table: t,
        csv: None,
        negative: false,
    })
}

fn cmd_reduce(class: &str) -> Result<Outcome, Failure> {
    let l = picard_arg(class)?;
    let red = reduce(&l);
    let status = to_value(&red.status)?;
    let mut t = format!("{} {}\n", red.result, status.as_str().unwrap_or_default().replace('_', " "));
    t.push_str(&log_table(&red.log));
    Ok(Outcome {
        output: to_value(&red)?,
        table: t,
        csv: None,
        negative: false,
    })
}

fn cmd_nef(class: &str) -> Result<Outcome, Failure> {
    let l = picard_arg(class)?;
    let v = is_nef_small(&l)?;
    let negative_on = negative_family_members(&l)?;
    let t = match &v.violator {
        None => format!("nef (tested against {} classes)\n", v.tested_count),
        Some(c) => format!(
            "not nef: {} meets {} in {}\n",
            l,
            c,
            l.intersect(c)?
        ),
    };
    Ok(Outcome {
        negative: !v.nef,
        output: json!({
            "nef": v.nef,
            "violator": v.violator.as_ref().map(|c| c.to_string()),
            "tested_count": v.tested_count,
            "negative_on": negative_on.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        }),
        table: t,
        csv: None,
    })
}

fn cmd_minus_one(r: usize) -> Result<Outcome, Failure> {
    let classes = minus_one_classes(r)?;
    let rows: Vec<Vec<String>> = classes.iter().map(|c| vec![c.to_string()]).collect();
    let mut t = format!("{} classes\n", classes.len());
    for c in &classes {
        writeln!(t, "{c}").unwrap();
    }
    Ok(Outcome {
        output: json!({ "count": classes.len(), "classes": to_value(&classes)? }),
        table: t,
        csv: Some(csv(&["class"], &rows)),
        negative: false,
    })
}

fn cmd_h0(class: &str, params: &OracleParams) -> Result<Outcome, Failure> {
    let l = picard_arg(class)?;
    let res = h0_class(&l, params)?;
    let t = format!(
        "h0 = {} (expected {}, {}); matrix {} x {}, coranks {:?}\n",
        res.h0,
        res.expected,
        if res.special { "special" } else { "non-special" },
        res.rows,
        res.cols,
        res.coranks
    );
    Ok(Outcome {
        negative: res.special,
        output: to_value(&res)?,
        table: t,
        csv: None,
    })
}

fn cmd_hr(d: u64, mu: u64, r: u64, params: &OracleParams) -> Result<Outcome, Failure> {
    let rep = hr_check(d, mu, r, params)?;
    let t = format!(
        "{} (h0 = {}, chi = {})\n",
        if rep.independent { "independent" } else { "not independent" },
        rep.h0,
        rep.chi
    );
    Ok(Outcome {
        negative: !rep.independent,
        output: to_value(&rep)?,
        table: t,
        csv: None,
    })
}

fn cmd_batch(file: &PathBuf, cache: Option<&PathBuf>, verbose: u8) -> Result<Outcome, Failure> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| usage(format!("{}: {e}", file.display())))?;
    let mut store: H0Cache = match cache {
        Some(path) => JsonlCache::open(path)?,
        None => JsonlCache::in_memory(),
    };
    let results = run_batch(&text, &mut store)?;
    if verbose > 0 {
        eprintln!("batch: {} computed, {} from cache", store.misses(), store.hits());
    }
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.d.to_string(),
                format!("{:?}", r.mults),
                r.h0.to_string(),
                r.expected.to_string(),
                r.special.to_string(),
            ]
        })
        .collect();
    let header = ["d", "mults", "h0", "expected", "special"];
    Ok(Outcome {
        negative: results.iter().any(|r| r.special),
        output: to_value(&results)?,
        table: table(&header, &rows),
        csv: None,
    })
}

fn cmd_nef_cross(class: &str, bound: i64, params: &OracleParams) -> Result<Outcome, Failure> {
    let l = picard_arg(class)?;
    let rep = nef_cross_check(&l, bound, params)?;
    let t = format!(
        "{}; is_nef_small says {}; {} effective classes scanned{}\n",
        if rep.consistent { "consistent" } else { "INCONSISTENT" },
        if rep.nef { "nef" } else { "not nef" },
        rep.effective_count,
        rep.counterexample
            .as_ref()
            .map(|c| format!("; most negative effective class {c}"))
            .unwrap_or_default()
    );
    Ok(Outcome {
        negative: !rep.consistent,
        output: to_value(&rep)?,
        table: t,
        csv: None,
    })
}

fn check_text(c: &Check) -> String {
    match c {
        Check::Compare { lhs, relation, rhs } => {
            let op = match serde_json::to_value(relation).ok().and_then(|v| v.as_str().map(String::from)) {
                Some(s) => match s.as_str() {
                    "lt" => "<",
                    "le" => "<=",
                    "eq" => "=",
                    "ge" => ">=",
                    _ => ">",
                },
                None => "?",
            };
            format!("{lhs} {op} {rhs}")
        }
        Check::ClassEqual {
            computed,
            expected,
            up_to_permutation,
        } => format!(
            "{computed} = {expected}{}",
            if *up_to_permutation { " up to order" } else { "" }
        ),
        Check::Flag { value } => value.to_string(),
    }
}

fn claim_lines(t: &mut String, title: &str, claims: &[Claim]) {
    if claims.is_empty() {
        return;
    }
    writeln!(t, "{title}:").unwrap();
    for c in claims {
        writeln!(
            t,
            "  [{}] {}: {}",
            if c.holds { "ok" } else { "FAIL" },
            c.name,
            check_text(&c.check)
        )
        .unwrap();
    }
}

fn trace_table(rep: &TraceReport) -> String {
    let p = &rep.params;
    let mut t = String::new();
    writeln!(
        t,
        "step {}: r = {}, mu = {}, j = {}, k = {}, alpha = {}, d = {}",
        rep.step, p.r, p.mu, p.j, p.k, p.alpha, p.d
    )
    .unwrap();
    writeln!(t, "eps = {} ({}), coverage {}", rep.epsilon, rep.epsilon.to_decimal(12), rep.coverage).unwrap();
    claim_lines(&mut t, "hypotheses", &rep.hypotheses);
    if !rep.classes.is_empty() {
        writeln!(t, "classes:").unwrap();
        for c in &rep.classes {
            writeln!(t, "  {} = {}", c.name, c.class).unwrap();
        }
    }
    if !rep.values.is_empty() {
        writeln!(t, "values:").unwrap();
        for v in &rep.values {
            writeln!(t, "  {} = {}", v.name, v.value).unwrap();
        }
    }
    claim_lines(&mut t, "claims", &rep.claims);
    if !rep.observations.is_empty() {
        writeln!(t, "observations:").unwrap();
        for o in &rep.observations {
            writeln!(t, "  {} = {} ({:?})", o.name, o.value.to_decimal(12), o.sign).unwrap();
        }
    }
    if !rep.transforms.is_empty() {
        writeln!(t, "transforms:").unwrap();
        t.push_str(&log_table(&rep.transforms));
    }
    for n in &rep.notes {
        writeln!(t, "note: {n}").unwrap();
    }
    writeln!(
        t,
        "verdict: {}{}",
        if rep.verdict == Verdict::Pass { "pass" } else { "fail" },
        if rep.hypothetical { " (hypothetical: some hypothesis fails)" } else { "" }
    )
    .unwrap();
    t
}

fn cmd_trace(step: u8, r: u64, mu: u64, j: u64) -> Result<Outcome, Failure> {
    let rep = trace(step, r, mu, j)?;
    if !rep.recheck() {
        return Err(internal("trace report does not recheck"));
    }
    Ok(Outcome {
        negative: rep.verdict == Verdict::Fail,
        table: trace_table(&rep),
        output: to_value(&rep)?,
        csv: None,
    })
}

fn cmd_mosaic_check(file: &PathBuf) -> Result<Outcome, Failure> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| usage(format!("{}: {e}", file.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", file.display())))?;
    let data: MosaicData = serde_json::from_value(doc.clone()).map_err(|e| usage(e.to_string()))?;
    let cycle: Option<CandidateCycle> = match doc.get("cycle") {
        Some(c) => Some(serde_json::from_value(c.clone()).map_err(|e| usage(format!("cycle: {e}")))?),
        None => None,
    };
    let (m, l) = (&data.mosaic, &data.bundle);
    let mut restrictions = Vec::new();
    let mut t = format!("mosaic {m}\n");
    for (i, j) in m.components() {
        let c: RuledClass = restrict(m, l, i, j)?;
        writeln!(t, "  L|S_{i},{j} = {c}").unwrap();
        restrictions.push(json!({ "component": [i, j], "class": c.to_string() }));
    }
    let gen = general_fibre(m, l)?;
    let cons = conservation_report(m, l)?;
    let axes = axis_consistency(m, l)?;
    let axes_ok = axes.iter().all(AxisCheck::consistent);
    writeln!(t, "  L_gen = {gen}").unwrap();
    writeln!(
        t,
        "conservation: {} (L^2: {} = {}, K.L: {} = {})",
        if cons.holds() { "holds" } else { "FAILS" },
        cons.sum_self_int,
        cons.gen_self_int,
        cons.sum_adjoint,
        cons.gen_adjoint
    )
    .unwrap();
    writeln!(t, "subaxes: {}", if axes_ok { "consistent" } else { "INCONSISTENT" }).unwrap();
    let mut negative = !cons.holds() || !axes_ok;
    let goodness = match &cycle {
        Some(z) => {
            let g = check_good(m, z)?;
            writeln!(t, "cycle: {}", if g.good { "good" } else { "not good" }).unwrap();
            for f in &g.failures {
                writeln!(t, "  {f:?}").unwrap();
            }
            negative |= !g.good;
            Some(to_value(&g)?)
        }
        None => None,
    };
    Ok(Outcome {
        output: json!({
            "mosaic": m.to_string(),
            "restrictions": restrictions,
            "general_fibre": gen.to_string(),
            "conservation": to_value(&cons)?,
            "conservation_holds": cons.holds(),
            "axes": to_value(&axes)?,
            "axes_consistent": axes_ok,
            "goodness": goodness,
        }),
        table: t,
        csv: None,
        negative,
    })
}

fn cmd_corollary(d: u64, mu: u64, r: u64) -> Result<Outcome, Failure> {
    let rep = corollary_condition(d, mu, r)?;
    let t = format!(
        "chi = {} {} r mu/2 - 4 = {}: {} (coverage of r: {})\n",
        rep.chi,
        if rep.holds { ">" } else { "<=" },
        rep.threshold,
        if rep.holds { "holds" } else { "fails" },
        rep.coverage
    );
    Ok(Outcome {
        negative: !rep.holds,
        output: to_value(&rep)?,
        table: t,
        csv: None,
    })
}

fn cmd_nef_target(r: u64, mu: u64) -> Result<Outcome, Failure> {
    let n = nef_target(r, mu)?;
    let t = format!(
        "d = {}: d^2 = {} > r mu^2 = {} >= (d-1)^2 = {}\n",
        n.d, n.d_squared, n.r_mu_squared, n.previous_squared
    );
    Ok(Outcome {
        output: to_value(&n)?,
        table: t,
        csv: None,
        negative: false,
    })
}

fn cmd_lemma(a: i64, b: i64, c: i64) -> Result<Outcome, Failure> {
    let rep = lemma_step5(a, b, c)?;
    let witness: Vec<String> = rep.witness.iter().map(|w| w.to_string()).collect();
    let t = format!(
        "{}: {:?} branch, {:?}; witness {}; nef test {}\n",
        rep.class,
        rep.branch,
        rep.verdict,
        witness.join(" + "),
        if rep.consistent { "agrees" } else { "DISAGREES" }
    );
    Ok(Outcome {
        negative: !rep.consistent,
        output: to_value(&rep)?,
        table: t,
        csv: None,
    })
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Profile { r } => cmd_profile(*r),
        Command::Scan { r_min, r_max, cache } => cmd_scan(*r_min, *r_max, cache.as_ref(), cli.verbose),
        Command::Cremona {
            class,
            rule,
            s,
            indices,
            designate,
        } => cmd_cremona(class, *rule, *s, indices.as_deref(), designate.as_deref()),
        Command::Reduce { class } => cmd_reduce(class),
        Command::Nef { class } => cmd_nef(class),
        Command::MinusOne { r } => cmd_minus_one(*r),
        Command::H0 { class, oracle } => cmd_h0(class, &oracle.params()),
        Command::Hr { d, mu, r, oracle } => cmd_hr(*d, *mu, *r, &oracle.params()),
        Command::Batch { file, cache } => cmd_batch(file, cache.as_ref(), cli.verbose),
        Command::NefCross { class, bound, oracle } => cmd_nef_cross(class, *bound, &oracle.params()),
        Command::Trace { step, r, mu, j } => cmd_trace(*step, *r, *mu, *j),
        Command::MosaicCheck { file } => cmd_mosaic_check(file),
        Command::Corollary { d, mu, r } => cmd_corollary(*d, *mu, *r),
        Command::NefTarget { r, mu } => cmd_nef_target(*r, *mu),
        Command::Lemma { a, b, c } => cmd_lemma(*a, *b, *c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    let echo = inputs(&cli.command, cli.strict);
    let (code, output, text) = match run(&cli) {
        Ok(out) => {
            let code = if cli.strict && out.negative { EXIT_NEGATIVE } else { 0 };
            let text = match cli.format {
                Format::Table => Ok(out.table),
                Format::Csv => out
                    .csv
                    .ok_or_else(|| usage(format!("{name} has no CSV form; use --format json or table"))),
                Format::Json => Ok(String::new()),
            };
            match text {
                Ok(text) => (code, out.output, text),
                Err(f) => (f.code, json!({ "error": f.msg }), format!("error: {}\n", f.msg)),
            }
        }
        Err(f) => (f.code, json!({ "error": f.msg }), format!("error: {}\n", f.msg)),
    };
    if cli.format == Format::Json {
        let result = json!({
            "command": name,
            "inputs": echo,
            "output": output,
            "exit_code": code,
        });
        let text = serde_json::to_string_pretty(&result).expect("json value");
        let _ = writeln!(std::io::stdout().lock(), "{text}");
    } else if code >= EXIT_USAGE {
        let _ = write!(std::io::stderr().lock(), "{text}");
    } else {
        let _ = write!(std::io::stdout().lock(), "{text}");
    }
    ExitCode::from(code)
}
