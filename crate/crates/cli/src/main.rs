use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sepscope::criteria::any_entangled;
use sepscope::states::{
    horodecki_3x3, load_state, load_state_unchecked, random_density, random_separable, state_to_json, werner,
    LabeledState, RngSeed,
};
use sepscope::sweep::{
    emit, run_sweep, run_sweep_with_threads, summarize, write_csv, write_json, Axis, Family, GridSpec, OutputFormat,
};
use sepscope::{
    evaluate, evaluate_all_y, ppt_check, realignment_check, reduction_check, Complex64, CriterionVerdict, Error,
    GptOpSet, ReductionParams, SubsystemDims,
};

const EXIT_CLEAN: u8 = 0;
const EXIT_DETECTED: u8 = 1;
const EXIT_ERROR: u8 = 2;

/// The (a, b) values tried by `compare`.
const COMPARE_GRID: [f64; 6] = [-1.0, -1.0 / 3.0, 0.0, 0.5, 2.0 / 3.0, 1.0];

#[derive(Parser)]
#[command(
    name = "sepscope",
    version,
    about = "Entanglement detection with the generalized reduction criterion"
)]
#[command(
    after_help = "Exit codes: 0 = finished, no entanglement detected; 1 = entanglement detected (check only); \
                        2 = input or usage error.\n\"not entangled\" means not detected by these necessary criteria; \
                        it never proves separability."
)]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate criteria on one state and print a verdict table.
    ///
    /// Exits 1 if any selected criterion detects entanglement, 0 otherwise.
    /// "not entangled" means not detected by these necessary criteria.
    Check(CheckArgs),
    /// Evaluate the generalized reduction criterion over a (family parameter, b) grid.
    Sweep(SweepArgs),
    /// Write a state file for a builtin or random family.
    Gen(GenArgs),
    /// Run every criterion over an ensemble and report where they disagree.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Builtin {
    Werner,
    Horodecki,
    Separable,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Criterion {
    Grc,
    Ppt,
    Reduction,
    Realignment,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args, Clone)]
struct StateArgs {
    /// Builtin state family.
    #[arg(long, value_enum, conflicts_with = "file")]
    builtin: Option<Builtin>,
    /// State file (JSON with fields m, n, re, im).
    #[arg(long)]
    file: Option<PathBuf>,
    /// Load the file without checking the density-matrix invariants.
    #[arg(long, requires = "file")]
    unchecked: bool,
    /// Werner local dimension.
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Werner parameter f in [-1, 1].
    #[arg(long, allow_hyphen_values = true)]
    f: Option<f64>,
    /// Horodecki parameter c in (0, 1).
    #[arg(long)]
    c: Option<f64>,
    /// Dimension of subsystem A for random families.
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Dimension of subsystem B for random families.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Number of product terms in a separable state.
    #[arg(long, default_value_t = 12)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ParamArgs {
    /// Real part of a.
    #[arg(
        long = "a",
        visible_alias = "a-re",
        default_value_t = 0.0,
        allow_hyphen_values = true
    )]
    a: f64,
    /// Imaginary part of a.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    a_im: f64,
    /// Real part of b.
    #[arg(
        long = "b",
        visible_alias = "b-re",
        default_value_t = 0.0,
        allow_hyphen_values = true
    )]
    b: f64,
    /// Imaginary part of b.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    b_im: f64,
}

impl ParamArgs {
    fn params(&self) -> ReductionParams {
        ReductionParams::new(Complex64::new(self.a, self.a_im), Complex64::new(self.b, self.b_im))
    }
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, value_enum, default_value = "all")]
    criterion: Criterion,
    #[command(flatten)]
    params: ParamArgs,
    /// Transposition set for grc: codes from rA,cA,rB,cB joined by commas, "none" or "all".
    #[arg(long, default_value = "all")]
    yset: String,
    /// Threshold on N (or on minus the smallest eigenvalue) above which a verdict reads entangled.
    #[arg(long)]
    tol_verdict: Option<f64>,
    /// Print verdicts as JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Swept family: werner or horodecki. A --file is swept along b only.
    #[arg(long, value_enum, conflicts_with = "file")]
    builtin: Option<Builtin>,
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long, requires = "file")]
    unchecked: bool,
    /// Werner local dimension.
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Fixed value of a.
    #[arg(
        long = "a",
        visible_alias = "a-re",
        default_value_t = 0.0,
        allow_hyphen_values = true
    )]
    a: f64,
    #[arg(long, allow_hyphen_values = true)]
    b_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b_stop: Option<f64>,
    #[arg(long)]
    b_step: Option<f64>,
    /// First value of the family parameter (f or c).
    #[arg(long, allow_hyphen_values = true)]
    param_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    param_stop: Option<f64>,
    #[arg(long)]
    param_step: Option<f64>,
    /// A single transposition set.
    #[arg(long, default_value = "cA,rB")]
    yset: String,
    /// Output file; records go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Output file; the state is printed when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Ensemble family. werner and horodecki walk their parameter grid;
    /// separable and random draw --count states from consecutive seeds.
    #[arg(long, value_enum)]
    builtin: Builtin,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 12)]
    k: usize,
    #[arg(long, default_value_t = 50)]
    count: u64,
    /// First seed of the ensemble.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Parameter spacing for werner and horodecki ensembles.
    #[arg(long, default_value_t = 0.1)]
    step: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn required(value: Option<f64>, flag: &str, family: &str) -> sepscope::Result<f64> {
    value.ok_or_else(|| Error::ParamOutOfRange(format!("{family} needs --{flag}")))
}

fn resolve_state(args: &StateArgs) -> sepscope::Result<LabeledState> {
    if let Some(path) = &args.file {
        return if args.unchecked {
            load_state_unchecked(path)
        } else {
            load_state(path)
        };
    }
    match args.builtin {
        None => Err(Error::ParamOutOfRange("give a state with --builtin or --file".into())),
        Some(Builtin::Werner) => werner(args.d, required(args.f, "f", "werner")?),
        Some(Builtin::Horodecki) => horodecki_3x3(required(args.c, "c", "horodecki")?),
        Some(Builtin::Separable) => random_separable(SubsystemDims::new(args.m, args.n)?, args.k, RngSeed(args.seed)),
        Some(Builtin::Random) => {
            let dims = SubsystemDims::new(args.m, args.n)?;
            let state = random_density(dims, RngSeed(args.seed))?;
            let params = [("m", args.m as f64), ("n", args.n as f64), ("seed", args.seed as f64)];
            Ok(LabeledState::new("random", &params, state))
        }
    }
}

fn cmd_check(args: CheckArgs) -> sepscope::Result<u8> {
    let ysets = GptOpSet::parse_selection(&args.yset)?;
    let p = args.params.params();
    if !p.is_finite() {
        return Err(Error::ParamOutOfRange("a and b must be finite".into()));
    }
    let state = resolve_state(&args.state)?.state;

    let wants = |c: Criterion| args.criterion == c || args.criterion == Criterion::All;
    let mut verdicts: Vec<CriterionVerdict> = Vec::new();
    if wants(Criterion::Grc) {
        if ysets.len() == 16 {
            verdicts.extend(evaluate_all_y(&state, p)?);
        } else {
            for &y in &ysets {
                verdicts.push(evaluate(&state, p, y)?);
            }
        }
    }
    if wants(Criterion::Ppt) {
        verdicts.push(ppt_check(&state)?);
    }
    if wants(Criterion::Reduction) {
        verdicts.push(reduction_check(&state)?);
    }
    if wants(Criterion::Realignment) {
        verdicts.push(realignment_check(&state)?);
    }
    if let Some(tol) = args.tol_verdict {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(Error::ParamOutOfRange(format!(
                "--tol-verdict must be a non-negative number, got {tol}"
            )));
        }
        verdicts = verdicts.into_iter().map(|v| v.with_tolerance(tol)).collect();
    }

    let detected = any_entangled(&verdicts);
    let mut out = io::stdout().lock();
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&verdicts)?)?;
    } else {
        print_table(&mut out, &verdicts)?;
        if detected {
            writeln!(out, "verdict: entangled")?;
        } else {
            writeln!(out, "verdict: not entangled (not detected by these necessary criteria)")?;
        }
    }
    Ok(if detected { EXIT_DETECTED } else { EXIT_CLEAN })
}

/// Shortest round-trip text for `x`, in exponent form outside `[1e-4, 1e15)`.
fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn complex(z: Complex64) -> String {
    if z.im == 0.0 {
        num(z.re)
    } else {
        format!("{}{}{}i", num(z.re), if z.im < 0.0 { "" } else { "+" }, num(z.im))
    }
}

fn print_table(out: &mut impl Write, verdicts: &[CriterionVerdict]) -> io::Result<()> {
    writeln!(out, "criterion\tyset\ta\tb\tstatistic\tbound\tN\tentangled")?;
    for v in verdicts {
        let yset = v.yset.map_or_else(|| "-".to_string(), |y| y.to_string());
        let (a, b) = v
            .params
            .map_or_else(|| ("-".into(), "-".into()), |p| (complex(p.a), complex(p.b)));
        writeln!(
            out,
            "{}\t{yset}\t{a}\t{b}\t{}\t{}\t{}\t{}",
            v.criterion.name(),
            num(v.statistic),
            num(v.bound),
            num(v.violation),
            v.entangled
        )?;
    }
    Ok(())
}

fn axis(start: Option<f64>, stop: Option<f64>, step: Option<f64>, default: Axis) -> sepscope::Result<Axis> {
    Axis::new(
        start.unwrap_or(default.start),
        stop.unwrap_or(default.stop),
        step.unwrap_or(default.step),
    )
}

fn thread_cap() -> sepscope::Result<Option<usize>> {
    match std::env::var("SEPSCOPE_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::ParamOutOfRange(format!(
                "SEPSCOPE_THREADS must be a positive integer, got {s:?}"
            ))),
        },
    }
}

fn cmd_sweep(args: SweepArgs) -> sepscope::Result<u8> {
    let ysets = GptOpSet::parse_selection(&args.yset)?;
    let [yset] = ysets[..] else {
        return Err(Error::ParamOutOfRange("sweep takes a single --yset".into()));
    };
    let family = match (&args.file, args.builtin) {
        (Some(path), _) => {
            let loaded = if args.unchecked {
                load_state_unchecked(path)?
            } else {
                load_state(path)?
            };
            Family::Fixed(Box::new(loaded.state))
        }
        (None, Some(Builtin::Werner)) => Family::Werner { d: args.d },
        (None, Some(Builtin::Horodecki)) => Family::Horodecki,
        (None, Some(_)) => {
            return Err(Error::ParamOutOfRange(
                "sweep supports werner, horodecki or --file".into(),
            ))
        }
        (None, None) => return Err(Error::ParamOutOfRange("give a family with --builtin or --file".into())),
    };
    let defaults = GridSpec::default_for(family.clone(), args.a);
    let spec = GridSpec {
        b_axis: axis(args.b_start, args.b_stop, args.b_step, defaults.b_axis)?,
        param_axis: axis(args.param_start, args.param_stop, args.param_step, defaults.param_axis)?,
        yset,
        ..defaults
    };
    let records = match thread_cap()? {
        Some(threads) => run_sweep_with_threads(&spec, threads)?,
        None => run_sweep(&spec)?,
    };
    let summary = summarize(&records).ok_or(Error::EmptyRecords)?;
    let param_count = records.len() / spec.b_axis.points().len();
    let line = format!(
        "{}: grid {}x{} = {} points, max N = {} at param = {}, b = {}",
        family.tag(),
        param_count,
        spec.b_axis.points().len(),
        summary.points,
        num(summary.max_violation),
        num(summary.argmax.0),
        num(summary.argmax.1)
    );
    match &args.out {
        Some(path) => {
            emit(&records, args.format.into(), path)?;
            println!("{line}");
        }
        None => {
            let stdout = io::stdout().lock();
            match args.format {
                Format::Csv => write_csv(&records, stdout)?,
                Format::Json => write_json(&records, stdout)?,
            }
            eprintln!("{line}");
        }
    }
    Ok(EXIT_CLEAN)
}

fn cmd_gen(args: GenArgs) -> sepscope::Result<u8> {
    let state = resolve_state(&args.state)?;
    let text = state_to_json(&state);
    match &args.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(EXIT_CLEAN)
}

struct Flags {
    label: String,
    ppt: bool,
    reduction: bool,
    realignment: bool,
    grc: bool,
}

impl Flags {
    fn as_array(&self) -> [bool; 4] {
        [self.ppt, self.reduction, self.realignment, self.grc]
    }
}

const COMPARE_NAMES: [&str; 4] = ["ppt", "reduction", "realignment", "grc"];

fn grid_values(start: f64, stop: f64, step: f64) -> sepscope::Result<Vec<f64>> {
    Ok(Axis::new(start, stop, step)?.points())
}

fn ensemble(args: &CompareArgs) -> sepscope::Result<Vec<LabeledState>> {
    let dims = || SubsystemDims::new(args.m, args.n);
    match args.builtin {
        Builtin::Werner => grid_values(-1.0, 1.0, args.step)?
            .into_iter()
            .map(|f| werner(args.d, f))
            .collect(),
        Builtin::Horodecki => {
            let first = args.step.min(0.5);
            grid_values(first, 1.0 - first, args.step)?
                .into_iter()
                .map(horodecki_3x3)
                .collect()
        }
        Builtin::Separable => (0..args.count)
            .map(|i| random_separable(dims()?, args.k, RngSeed(args.seed + i)))
            .collect(),
        Builtin::Random => (0..args.count)
            .map(|i| {
                let seed = args.seed + i;
                let params = [("seed", seed as f64)];
                Ok(LabeledState::new(
                    "random",
                    &params,
                    random_density(dims()?, RngSeed(seed))?,
                ))
            })
            .collect(),
    }
}

fn classify(s: &LabeledState) -> sepscope::Result<Flags> {
    let rho = &s.state;
    let mut grc = false;
    for &a in &COMPARE_GRID {
        for &b in &COMPARE_GRID {
            grc |= any_entangled(&evaluate_all_y(rho, ReductionParams::real(a, b))?);
        }
    }
    let label = match s.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>() {
        p if p.is_empty() => s.name.clone(),
        p => format!("{}[{}]", s.name, p.join(",")),
    };
    Ok(Flags {
        label,
        ppt: ppt_check(rho)?.entangled,
        reduction: reduction_check(rho)?.entangled,
        realignment: realignment_check(rho)?.entangled,
        grc,
    })
}

fn cmd_compare(args: CompareArgs) -> sepscope::Result<u8> {
    let states = ensemble(&args)?;
    let flags = states.iter().map(classify).collect::<sepscope::Result<Vec<_>>>()?;

    let mut out = io::stdout().lock();
    writeln!(out, "state\t{}", COMPARE_NAMES.join("\t"))?;
    for f in &flags {
        let marks: Vec<&str> = f.as_array().iter().map(|&x| if x { "x" } else { "." }).collect();
        writeln!(out, "{}\t{}", f.label, marks.join("\t"))?;
    }

    writeln!(out)?;
    let marks: Vec<[bool; 4]> = flags.iter().map(Flags::as_array).collect();
    let counts: Vec<String> = COMPARE_NAMES
        .iter()
        .enumerate()
        .map(|(c, name)| format!("{name}={}", marks.iter().filter(|m| m[c]).count()))
        .collect();
    writeln!(out, "flagged ({} states): {}", flags.len(), counts.join(" "))?;

    // entry (r, c): states flagged by r but not by c
    writeln!(out, "flagged by row, missed by column:")?;
    writeln!(out, "\t{}", COMPARE_NAMES.join("\t"))?;
    for (r, name) in COMPARE_NAMES.iter().enumerate() {
        let row: Vec<String> = (0..4)
            .map(|c| marks.iter().filter(|m| m[r] && !m[c]).count().to_string())
            .collect();
        writeln!(out, "{name}\t{}", row.join("\t"))?;
    }
    Ok(EXIT_CLEAN)
}
