use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use capforge::auxcurve::{self, CurveParams};
use capforge::indep::{self, IndepSet, Strategy};
use capforge::lift::{self, Cap, LiftedCap};
use capforge::search::{self, ArcStrategy, SearchError};
use capforge::verify::{self, VerifyConfig, VerifyError, VerifyReport};
use capforge::{arith, cubic, scan, ArcSet, FieldSpec, NodalCubic};

/// Bicovering arcs from nodal cubic cosets and their complete-cap lifts.
#[derive(Debug, Parser)]
#[command(name = "capforge", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a union of cubic cosets as an arc.
    Construct(ConstructArgs),
    /// Check an arc for bicovering or a cap for completeness.
    Verify(VerifyArgs),
    /// Lift an arc to a cap in AG(N,q).
    Lift(LiftArgs),
    /// Tabulate admissible parameters, gate verdicts and size bounds.
    Scan(ScanArgs),
    /// Count affine points of the auxiliary curve or its quartic.
    Count(CountArgs),
    /// Write a cap as a parity-check matrix.
    Export(ExportArgs),
    /// Find a maximal 3-independent subset of Z_m.
    SearchIndep(SearchIndepArgs),
    /// Search small planes for a bicovering arc.
    SearchArc(SearchArcArgs),
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Field order.
    #[arg(long)]
    q: Option<u64>,
    /// Characteristic, with --h.
    #[arg(long, conflicts_with = "q", requires = "h")]
    p: Option<u64>,
    /// Extension degree, with --p.
    #[arg(long, requires = "p")]
    h: Option<u32>,
}

impl FieldArgs {
    fn field(&self) -> anyhow::Result<FieldSpec> {
        match (self.q, self.p, self.h) {
            (Some(q), _, _) => FieldSpec::with_order(q).with_context(|| format!("q = {q}")),
            (None, Some(p), Some(h)) => FieldSpec::new(p, h, None).with_context(|| format!("p = {p}, h = {h}")),
            _ => bail!("give --q or --p with --h"),
        }
    }
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    m: u64,
    /// Comma-separated residues mod m, or `auto`.
    #[arg(long = "M", default_value = "auto")]
    members: String,
    /// Also require the (q, m) hypotheses and a passing exact gate.
    #[arg(long)]
    gate: bool,
    /// Search budget for `auto`.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Full,
    Sampled,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Arc or cap JSON.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Full)]
    mode: ModeArg,
    /// Points drawn in sampled mode.
    #[arg(long, default_value_t = 10_000)]
    sample: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// For lifted caps: decide completeness on the translation slice only.
    #[arg(long)]
    slice: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    /// Arc JSON.
    input: PathBuf,
    #[arg(long = "N")]
    n: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Field orders, comma-separated.
    #[arg(long, value_delimiter = ',')]
    q: Vec<u64>,
    /// Inclusive range start; with --to.
    #[arg(long, requires = "to")]
    from: Option<u64>,
    #[arg(long, requires = "from")]
    to: Option<u64>,
    /// Cap dimensions, comma-separated.
    #[arg(long = "N", value_delimiter = ',', default_value = "4,8")]
    n: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    F,
    Quartic,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, default_value_t = 1)]
    m: u64,
    #[arg(long)]
    a: u64,
    #[arg(long)]
    b: u64,
    #[arg(long)]
    t: u64,
    #[arg(long, value_enum, default_value_t = Target::F)]
    target: Target,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Cap JSON.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IndepStrategyArg {
    Exhaustive,
    Greedy,
    Randomized,
}

#[derive(Debug, Args)]
pub struct SearchIndepArgs {
    #[arg(long)]
    m: u64,
    /// Coprime split `m1,m2` for product-shaped candidates.
    #[arg(long, value_delimiter = ',')]
    split: Option<Vec<u64>>,
    #[arg(long, value_enum, default_value_t = IndepStrategyArg::Exhaustive)]
    strategy: IndepStrategyArg,
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArcStrategyArg {
    Exhaustive,
    Greedy,
}

#[derive(Debug, Args)]
pub struct SearchArcArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, value_enum, default_value_t = ArcStrategyArg::Exhaustive)]
    strategy: ArcStrategyArg,
    /// Search nodes (exhaustive) or random saturations (greedy).
    #[arg(long, default_value_t = u64::MAX)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    TooLarge(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let too_large = e.chain().any(|c| {
            matches!(c.downcast_ref::<VerifyError>(), Some(VerifyError::TooLarge { .. }))
                || matches!(c.downcast_ref::<SearchError>(), Some(SearchError::TooLarge { .. }))
        });
        if too_large {
            Failure::TooLarge(e)
        } else {
            Failure::Input(e)
        }
    }
}

pub fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let code = match cli.command {
        Command::Construct(a) => construct(a)?,
        Command::Verify(a) => verify_cmd(a)?,
        Command::Lift(a) => lift_cmd(a)?,
        Command::Scan(a) => scan_cmd(a)?,
        Command::Count(a) => count(a)?,
        Command::Export(a) => export(a)?,
        Command::SearchIndep(a) => search_indep(a)?,
        Command::SearchArc(a) => search_arc(a)?,
    };
    Ok(code)
}

fn verdict(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn emit_text(out: &OutArgs, text: &str) -> anyhow::Result<()> {
    match &out.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit<T: Serialize>(out: &OutArgs, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit_text(out, &text)
}

fn read_json(path: &Path) -> anyhow::Result<serde_json::Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_members(raw: &str) -> anyhow::Result<Vec<u64>> {
    raw.split(',')
        .map(|s| s.trim().parse::<u64>().with_context(|| format!("bad residue {s:?}")))
        .collect()
}

/// A small maximal 3-independent set: product-shaped when `m` splits into
/// coprime factors, otherwise the exhaustive minimum with greedy fallback.
fn auto_members(m: u64, budget: u64) -> anyhow::Result<IndepSet> {
    let split = scan::coprime_splits(m).into_iter().find(|&(a, _)| a > 1);
    if let Some(s) = split.and_then(|(a, b)| indep::product_candidates(a, b).next()) {
        return Ok(s);
    }
    indep::search(m, budget, Strategy::Exhaustive)
        .or_else(|_| indep::search(m, m, Strategy::Greedy))
        .map_err(|e| anyhow!(e))
}

fn construct(a: ConstructArgs) -> anyhow::Result<ExitCode> {
    let f = a.field.field()?;
    let q = f.q();
    if a.gate {
        let gate = cubic::check_hypotheses(q, a.m)?;
        if !gate.exact {
            bail!("(q, m) = ({q}, {}) fails the gate: {gate:?}", a.m);
        }
    }
    let c = NodalCubic::new(f)?;
    let members = if a.members.trim() == "auto" { auto_members(a.m, a.budget)?.members } else { parse_members(&a.members)? };
    let arc = c.union_arc(a.m, &members, true)?;
    emit(&a.out, &arc)?;
    Ok(ExitCode::SUCCESS)
}

fn verify_cmd(a: VerifyArgs) -> anyhow::Result<ExitCode> {
    let value = read_json(&a.input)?;
    let config = VerifyConfig::default();
    let report: VerifyReport = if value.get("N").is_some() {
        let cap: Cap = serde_json::from_value(value).context("not a cap")?;
        if a.mode == ModeArg::Sampled {
            bail!("sampled mode applies to arcs only");
        }
        if a.slice {
            let source = cap.source.clone().ok_or_else(|| anyhow!("--slice needs a cap carrying its source arc"))?;
            let lifted = lift::lift_arc(&source.arc, cap.dim)?;
            if lifted.cap != cap {
                bail!("cap differs from the lift of its recorded arc");
            }
            lift::verify_lift_complete(&lifted, &config)?
        } else {
            verify::verify_complete_cap(&cap.field, cap.points(), &config)?
        }
    } else {
        let arc: ArcSet = serde_json::from_value(value).context("not an arc")?;
        match a.mode {
            ModeArg::Full => verify::verify_bicovering_full(&arc, &config)?,
            ModeArg::Sampled => verify::verify_bicovering_sampled(&arc, a.sample, a.seed)?,
        }
    };
    emit(&a.out, &report)?;
    Ok(verdict(report.verdict))
}

fn lift_cmd(a: LiftArgs) -> anyhow::Result<ExitCode> {
    let arc: ArcSet = serde_json::from_value(read_json(&a.input)?).context("not an arc")?;
    let LiftedCap { cap, .. } = lift::lift_arc(&arc, a.n)?;
    emit(&a.out, &cap)?;
    Ok(ExitCode::SUCCESS)
}

fn scan_cmd(a: ScanArgs) -> anyhow::Result<ExitCode> {
    let mut qs = a.q.clone();
    if let (Some(lo), Some(hi)) = (a.from, a.to) {
        qs.extend(scan::prime_powers(lo, hi).map(|(q, _, _)| q));
    }
    if qs.is_empty() {
        bail!("give --q or --from/--to");
    }
    if let Some(&bad) = a.n.iter().find(|&&n| n < 4 || n % 4 != 0) {
        bail!("N = {bad} is not a multiple of 4 that is at least 4");
    }
    let rows = scan::scan(qs, &a.n);
    match a.format {
        Format::Json => emit(&a.out, &rows)?,
        Format::Csv => emit_text(&a.out, &scan::to_csv(&rows, &a.n))?,
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CountReport {
    q: u64,
    target: &'static str,
    a: u64,
    b: u64,
    t: u64,
    m: u64,
    count: u64,
    genus: u64,
    slack: u64,
    lower: i128,
    upper: i128,
    in_window: bool,
}

fn count(a: CountArgs) -> anyhow::Result<ExitCode> {
    let f = a.field.field()?;
    let q = f.q();
    let [x, y, t] = [a.a, a.b, a.t].map(|c| f.element(c));
    let (x, y, t) = (x?, y?, t?);
    let (target, m, count, genus, slack) = match a.target {
        Target::Quartic => {
            let n = auxcurve::count_quartic_points(&f, x, y, t)?;
            ("quartic", 1, n, auxcurve::QUARTIC_GENUS, auxcurve::QUARTIC_SLACK)
        }
        Target::F => {
            let cp = CurveParams::new(x, y, t, a.m)?;
            cp.validate(&f)?;
            if cp.on_cubic(&f) {
                bail!("P = ({}, {}) lies on the cubic", a.a, a.b);
            }
            let n = auxcurve::count_curve_points(&f, &cp);
            ("f", a.m, n, auxcurve::curve_genus_bound(a.m), auxcurve::curve_slack(a.m))
        }
    };
    let (lower, upper) = auxcurve::weil_bounds(q, genus, slack);
    let in_window = auxcurve::in_weil_window(q, count, genus, slack);
    emit(&a.out, &CountReport { q, target, a: a.a, b: a.b, t: a.t, m, count, genus, slack, lower, upper, in_window })?;
    Ok(verdict(in_window))
}

fn export(a: ExportArgs) -> anyhow::Result<ExitCode> {
    let cap: Cap = serde_json::from_value(read_json(&a.input)?).context("not a cap")?;
    let h = lift::export_parity_check(&cap)?;
    match a.format {
        Format::Json => emit(&a.out, &h)?,
        Format::Csv => emit_text(&a.out, &h.to_csv())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn search_indep(a: SearchIndepArgs) -> anyhow::Result<ExitCode> {
    let set = match a.split.as_deref() {
        Some(&[m1, m2]) => {
            if m1 * m2 != a.m || arith::gcd(m1, m2) != 1 {
                bail!("{m1}·{m2} is not a coprime split of {}", a.m);
            }
            indep::product_candidates(m1, m2).take(a.budget as usize).next()
        }
        Some(_) => bail!("--split takes two factors"),
        None => {
            let strategy = match a.strategy {
                IndepStrategyArg::Exhaustive => Strategy::Exhaustive,
                IndepStrategyArg::Greedy => Strategy::Greedy,
                IndepStrategyArg::Randomized => Strategy::Randomized { seed: a.seed },
            };
            match indep::search(a.m, a.budget, strategy) {
                Ok(s) => Some(s),
                Err(indep::IndepError::NotFound { .. }) => None,
            }
        }
    };
    emit(&a.out, &set)?;
    Ok(verdict(set.is_some()))
}

fn search_arc(a: SearchArcArgs) -> anyhow::Result<ExitCode> {
    let f = a.field.field()?;
    let strategy = match a.strategy {
        ArcStrategyArg::Exhaustive => ArcStrategy::Exhaustive,
        ArcStrategyArg::Greedy => ArcStrategy::Greedy { seed: a.seed },
    };
    let budget = if a.strategy == ArcStrategyArg::Greedy && a.budget == u64::MAX { 1000 } else { a.budget };
    let report = search::search_bicovering_arc(&f, budget, strategy)?;
    emit(&a.out, &report)?;
    Ok(verdict(report.found.is_some()))
}
