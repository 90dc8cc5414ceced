//! Command-line front end for the cayleylab modules.
//!
//! One binary, one subcommand tree: `group`, `go`, `complex`, `life`,
//! `trunc`, `circle`, `lab`.  Every subcommand validates its inputs under
//! `--dry-run`, reads defaults from a `key = value` config file (flags win),
//! and writes its artifacts as deterministic text files into the output
//! directory (`--out`, config key `out`, `$CAYLEYLAB_OUT`, `.` in that
//! order).  Exit codes: 0 success, 2 bad usage, 3 cap exhausted, 4 file
//! error, 1 internal; failures also emit a one-line JSON record on stderr.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use cayleylab::circle::{
    eval_word, measure_experiments, random_reduced_word, relation_defect, CircleError, CircleWord,
};
use cayleylab::complex::{
    cell_types_and_neighbors, export_dot, export_graphml, maximal_cells, ComplexError,
    ComplexOptions, ComplexReport,
};
use cayleylab::go::{
    bind_state, enumerate_admissible, move_matrix, play, read_state_document,
    write_state_document, Color, GoError, GoState,
};
use cayleylab::group::{ball, icc_evidence, GroupError, MarkedGroup, Window};
use cayleylab::life::{
    enumerate_states, parse_rule, parse_state, state_to_string, step, step_matrix, LifeComplex,
    LifeError, LifeState,
};
use cayleylab::oplab::{
    commutant_dim_estimate, read_matrix_market_file, spectrum, write_matrix_market, OpError,
    SparseOperator,
};
use cayleylab::trunc::{generator_operators, identity_defect, TruncError};

// ---------------------------------------------------------------------------
// failure classification

#[derive(Debug)]
enum Failure {
    /// Bad flags, unparsable inputs, out-of-range parameters.  Exit 2.
    Usage(String),
    /// A configured cap or budget was exhausted.  Exit 3.
    Caps(String),
    /// The file system said no.  Exit 4.
    Io(String),
    /// Anything else.  Exit 1.
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Caps(_) => 3,
            Failure::Io(_) => 4,
            Failure::Internal(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Caps(_) => "caps",
            Failure::Io(_) => "io",
            Failure::Internal(_) => "internal",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Caps(m) | Failure::Io(m) | Failure::Internal(m) => m,
        }
    }

    fn record(&self) -> String {
        serde_json::json!({
            "error": self.message(),
            "kind": self.kind(),
            "code": self.code(),
        })
        .to_string()
    }
}

impl From<GroupError> for Failure {
    fn from(e: GroupError) -> Failure {
        match &e {
            GroupError::BallCap { .. } | GroupError::CompletionBudget { .. } => {
                Failure::Caps(e.to_string())
            }
            GroupError::Parse { .. } | GroupError::WordParse { .. } => Failure::Usage(e.to_string()),
        }
    }
}

impl From<OpError> for Failure {
    fn from(e: OpError) -> Failure {
        match e {
            OpError::DenseCap { .. } => Failure::Caps(e.to_string()),
            OpError::Io(_) => Failure::Io(e.to_string()),
            OpError::Parse { .. } | OpError::BasisMismatch { .. } | OpError::EmptyOperands => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<GoError> for Failure {
    fn from(e: GoError) -> Failure {
        match e {
            GoError::EnumerationCap { .. } => Failure::Caps(e.to_string()),
            GoError::Group(g) => g.into(),
            GoError::Operator(o) => o.into(),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<ComplexError> for Failure {
    fn from(e: ComplexError) -> Failure {
        match e {
            ComplexError::SearchBudget { .. } => Failure::Caps(e.to_string()),
            ComplexError::Group(g) => g.into(),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<LifeError> for Failure {
    fn from(e: LifeError) -> Failure {
        match e {
            LifeError::StateSpace { .. } => Failure::Caps(e.to_string()),
            LifeError::Complex(c) => c.into(),
            LifeError::Group(g) => g.into(),
            LifeError::Operator(o) => o.into(),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<TruncError> for Failure {
    fn from(e: TruncError) -> Failure {
        match e {
            TruncError::Group(g) => g.into(),
            TruncError::Operator(o) => o.into(),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<CircleError> for Failure {
    fn from(e: CircleError) -> Failure {
        Failure::Usage(e.to_string())
    }
}

fn io_fail(context: &str, e: std::io::Error) -> Failure {
    Failure::Io(format!("{context}: {e}"))
}

// ---------------------------------------------------------------------------
// config file and flag resolution

/// `key = value` lines; `#` starts a comment; flags override file values.
struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    fn load(path: Option<&Path>) -> Result<Config, Failure> {
        let mut values = BTreeMap::new();
        if let Some(p) = path {
            let text = fs::read_to_string(p)
                .map_err(|e| io_fail(&format!("config file {}", p.display()), e))?;
            for (i, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(Failure::Usage(format!(
                        "config file {} line {}: expected `key = value`",
                        p.display(),
                        i + 1
                    )));
                };
                values.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Config { values })
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Failure> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Failure::Usage(format!("config key `{key}`: cannot parse value `{raw}`"))
            }),
        }
    }
}

struct Ctx {
    cfg: Config,
    out: PathBuf,
    dry_run: bool,
    seed: u64,
}

impl Ctx {
    /// Flag, then config key, then the built-in default.
    fn pick<T: FromStr + Clone>(
        &self,
        flag: &Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, Failure> {
        if let Some(v) = flag {
            return Ok(v.clone());
        }
        Ok(self.cfg.get::<T>(key)?.unwrap_or(default))
    }

    /// Flag, then config key; no default.
    fn pick_opt<T: FromStr + Clone>(&self, flag: &Option<T>, key: &str) -> Result<Option<T>, Failure> {
        if let Some(v) = flag {
            return Ok(Some(v.clone()));
        }
        self.cfg.get::<T>(key)
    }

    fn pick_req<T: FromStr + Clone>(&self, flag: &Option<T>, key: &str) -> Result<T, Failure> {
        self.pick_opt(flag, key)?.ok_or_else(|| {
            Failure::Usage(format!("missing --{key} (no flag and no config key `{key}`)"))
        })
    }

    fn write(&self, name: &str, text: &str) -> Result<(), Failure> {
        fs::create_dir_all(&self.out)
            .map_err(|e| io_fail(&format!("output directory {}", self.out.display()), e))?;
        let path = self.out.join(name);
        fs::write(&path, text).map_err(|e| io_fail(&format!("writing {}", path.display()), e))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn write_mtx(&self, name: &str, op: &SparseOperator) -> Result<(), Failure> {
        let mut buf = Vec::new();
        write_matrix_market(op, &mut buf)?;
        let text = String::from_utf8(buf)
            .map_err(|e| Failure::Internal(format!("matrix text is not UTF-8: {e}")))?;
        self.write(name, &text)
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_fail(&format!("reading {}", path.display()), e))
}

fn read_mtx(path: &Path) -> Result<SparseOperator, Failure> {
    read_matrix_market_file(path).map_err(|e| match e {
        OpError::Io(io) => io_fail(&format!("reading {}", path.display()), io),
        other => other.into(),
    })
}

// ---------------------------------------------------------------------------
// command tree

#[derive(Parser)]
#[command(
    name = "cayleylab",
    version,
    about = "Marked groups, Go positions, block complexes, life rules, \
             truncated operators and circle actions from one binary",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    /// Config file with `key = value` defaults; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory for artifacts (then config `out`, then $CAYLEYLAB_OUT, then `.`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Size of the rayon thread pool (0 = library default).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Seed for every randomized sweep.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Validate inputs and report what would run, but compute and write nothing.
    #[arg(long, global = true)]
    dry_run: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cayley windows and conjugacy-growth evidence.
    #[command(subcommand)]
    Group(GroupCmd),
    /// Go positions on Cayley graphs.
    #[command(subcommand)]
    Go(GoCmd),
    /// Irreducible block complexes.
    #[command(subcommand)]
    Complex(ComplexCmd),
    /// Generalized life on cell complexes.
    #[command(subcommand)]
    Life(LifeCmd),
    /// Truncated word-length creation operators.
    #[command(subcommand)]
    Trunc(TruncCmd),
    /// Piecewise circle actions.
    #[command(subcommand)]
    Circle(CircleCmd),
    /// Operator utilities: spectra and commutant estimates.
    #[command(subcommand)]
    Lab(LabCmd),
}

#[derive(Args)]
struct GroupArgs {
    /// Presentation, e.g. `<a,b|[a,b]>`.
    #[arg(long)]
    group: Option<String>,
    /// Ball radius.
    #[arg(long)]
    radius: Option<u32>,
    /// Maximum number of ball elements [default: 2000000].
    #[arg(long)]
    ball_cap: Option<usize>,
}

#[derive(Subcommand)]
enum GroupCmd {
    /// Enumerate the ball; writes ball.txt (one element per line).
    Ball(GroupArgs),
    /// Conjugacy-class growth of ball representatives; writes icc.txt.
    Icc(GroupArgs),
}

#[derive(Args)]
struct GoEnumerateArgs {
    #[command(flatten)]
    group: GroupArgs,
    /// Maximum number of stones per state.
    #[arg(long)]
    depth: Option<u32>,
    /// Maximum number of admissible states [default: 2000000].
    #[arg(long)]
    enum_cap: Option<usize>,
}

#[derive(Args)]
struct GoPlayArgs {
    /// Presentation; defaults to the one recorded in the state document.
    #[arg(long)]
    group: Option<String>,
    /// Window radius; defaults to the one recorded in the state document.
    #[arg(long)]
    radius: Option<u32>,
    #[arg(long)]
    ball_cap: Option<usize>,
    /// State document to start from (from `go play` or written by hand).
    #[arg(long, value_name = "FILE")]
    state: Option<PathBuf>,
    /// `black` or `white`.
    #[arg(long)]
    color: Option<String>,
    /// Word naming the vertex to play on, e.g. `a b^-1`.
    #[arg(long)]
    vertex: Option<String>,
}

#[derive(Args)]
struct GoMatrixArgs {
    #[command(flatten)]
    enumerate: GoEnumerateArgs,
    /// `black` or `white`.
    #[arg(long)]
    color: Option<String>,
    /// Word naming the vertex to play on.
    #[arg(long)]
    vertex: Option<String>,
}

#[derive(Subcommand)]
enum GoCmd {
    /// All positions reachable by at most `depth` legal moves; writes go_states.txt.
    Enumerate(GoEnumerateArgs),
    /// Play one move on a state document; writes go_after.txt.
    Play(GoPlayArgs),
    /// The partial isometry of one move over the admissible basis; writes go_matrix.mtx.
    Matrix(GoMatrixArgs),
}

#[derive(Args)]
struct ComplexArgs {
    #[command(flatten)]
    group: GroupArgs,
    /// Largest member count explored per block [default: 12].
    #[arg(long)]
    size_cap: Option<usize>,
    /// Search budget for the block enumeration [default: 5000000].
    #[arg(long)]
    budget: Option<u64>,
    /// Stop the level ladder at this dimension.
    #[arg(long)]
    max_dim: Option<u32>,
}

#[derive(Subcommand)]
enum ComplexCmd {
    /// Maximal cells in the window; writes complex_cells.txt.
    Build(ComplexArgs),
    /// Translation types with certified neighbor counts; writes
    /// complex_types.txt, complex.dot and complex.graphml.
    Types(ComplexArgs),
}

#[derive(Args)]
struct LifeArgs {
    #[command(flatten)]
    complex: ComplexArgs,
    /// Radius of the type-discovery window [default: 4].
    #[arg(long)]
    discovery_radius: Option<u32>,
    /// Rule text, e.g. `B={3} S={2,3}` (per-type lines use `type_0: ...`).
    #[arg(long)]
    rule: Option<String>,
}

#[derive(Args)]
struct LifeRunArgs {
    #[command(flatten)]
    life: LifeArgs,
    /// Initial state file (one cell per line, as written to life_final.txt).
    #[arg(long, value_name = "FILE")]
    state: Option<PathBuf>,
    /// With no --state: scatter this many live cells at random [default: 16].
    #[arg(long)]
    random: Option<usize>,
    /// Generations to run [default: 8].
    #[arg(long)]
    steps: Option<u32>,
}

#[derive(Args)]
struct LifeMatrixArgs {
    #[command(flatten)]
    life: LifeArgs,
    /// Number of certified cells in the state patch [default: 4].
    #[arg(long)]
    patch: Option<usize>,
    /// Maximum number of basis states [default: 1048576].
    #[arg(long)]
    state_cap: Option<usize>,
}

#[derive(Subcommand)]
enum LifeCmd {
    /// Run a rule; writes life_final.txt and life_populations.csv.
    Run(LifeRunArgs),
    /// Step operator on all states of a small patch; writes life_matrix.mtx.
    Matrix(LifeMatrixArgs),
}

#[derive(Args)]
struct TruncArgs {
    #[command(flatten)]
    group: GroupArgs,
    /// Generator name, e.g. `s`.
    #[arg(long)]
    generator: Option<String>,
}

#[derive(Subcommand)]
enum TruncCmd {
    /// Truncated shift and word-length creation operator; writes trunc_u.mtx, trunc_x.mtx.
    Ops(TruncArgs),
    /// Defect of the creation identity on interior columns; writes
    /// trunc_defect.txt and trunc_defect.mtx.
    Defect(TruncArgs),
}

#[derive(Args)]
struct CircleEvalArgs {
    /// Word in `a` (squaring) and `b`, `b2`, ... (rotations), e.g. `a b^-1`.
    #[arg(long)]
    word: Option<String>,
    /// Rotation angle [default: the golden rotation].
    #[arg(long)]
    theta: Option<f64>,
    /// Point of the circle [0, 1).
    #[arg(long)]
    x: Option<f64>,
}

#[derive(Args)]
struct CircleDefectArgs {
    /// Words to test; repeatable.  Without any, a random sweep runs instead.
    #[arg(long)]
    word: Vec<String>,
    #[arg(long)]
    theta: Option<f64>,
    /// Sample points per word [default: 2048].
    #[arg(long)]
    samples: Option<usize>,
    /// Number of random reduced words when no --word is given [default: 100].
    #[arg(long)]
    random: Option<usize>,
    /// Length of the random words [default: 12].
    #[arg(long)]
    length: Option<usize>,
}

#[derive(Args)]
struct CircleMeasureArgs {
    #[arg(long)]
    theta: Option<f64>,
    /// Dyadic grid size for the mass table [default: 16].
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Subcommand)]
enum CircleCmd {
    /// Evaluate a word at a point; writes circle_eval.txt.
    Eval(CircleEvalArgs),
    /// Sup-distance of words from the identity; writes circle_defect.csv.
    Defect(CircleDefectArgs),
    /// Invariance experiments for Lebesgue measure; writes
    /// circle_measure.csv and circle_measure.txt.
    Measure(CircleMeasureArgs),
}

#[derive(Args)]
struct LabSpectrumArgs {
    /// Operator in Matrix Market format.
    #[arg(long, value_name = "FILE")]
    matrix: Option<PathBuf>,
    /// Largest dimension the dense eigensolver accepts [default: 600].
    #[arg(long)]
    dense_cap: Option<u32>,
}

#[derive(Args)]
struct LabCommutantArgs {
    /// Generating operators in Matrix Market format; repeatable.
    #[arg(long, value_name = "FILE", required = true)]
    matrix: Vec<PathBuf>,
    #[arg(long)]
    dense_cap: Option<u32>,
}

#[derive(Subcommand)]
enum LabCmd {
    /// Eigenvalues via a dense solve; writes spectrum.csv.
    Spectrum(LabSpectrumArgs),
    /// Commutant dimension of a family; writes commutant.txt.
    Commutant(LabCommutantArgs),
}

// ---------------------------------------------------------------------------
// shared helpers

const DEFAULT_BALL_CAP: usize = 2_000_000;
const DEFAULT_ENUM_CAP: usize = 2_000_000;
const DEFAULT_DENSE_CAP: u32 = 600;
const DEFAULT_STATE_CAP: usize = 1 << 20;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

struct GroupSetup {
    group: Arc<MarkedGroup>,
    radius: u32,
    ball_cap: usize,
}

fn group_setup(ctx: &Ctx, args: &GroupArgs) -> Result<GroupSetup, Failure> {
    let text: String = ctx.pick_req(&args.group, "group")?;
    let radius = ctx.pick_req(&args.radius, "radius")?;
    let ball_cap = ctx.pick(&args.ball_cap, "ball-cap", DEFAULT_BALL_CAP)?;
    let group = MarkedGroup::parse(&text)?;
    Ok(GroupSetup { group, radius, ball_cap })
}

fn complex_options(ctx: &Ctx, args: &ComplexArgs) -> Result<ComplexOptions, Failure> {
    Ok(ComplexOptions {
        size_cap: ctx.pick(&args.size_cap, "size-cap", 12)?,
        search_budget: ctx.pick(&args.budget, "budget", 5_000_000)?,
        max_dimension: ctx.pick_opt(&args.max_dim, "max-dim")?,
    })
}

fn parse_color(text: &str) -> Result<Color, Failure> {
    Color::parse(text)
        .ok_or_else(|| Failure::Usage(format!("color must be `black` or `white`, got `{text}`")))
}

fn vertex_id(window: &Window, word: &str) -> Result<u32, Failure> {
    let e = window.group().parse_word(word)?;
    window.index_of(&e).ok_or_else(|| {
        Failure::Usage(format!(
            "vertex `{word}` lies outside the radius-{} window",
            window.radius()
        ))
    })
}

fn render_state(window: &Window, state: &GoState) -> String {
    if state.is_vacuum() {
        return "-".to_string();
    }
    let group = window.group();
    let stones: Vec<String> = state
        .stones()
        .map(|(v, c)| format!("{}:{}", group.render(window.element(v)), c.name()))
        .collect();
    stones.join(" ")
}

/// Largest word-metric diameter over the type representatives of a report.
fn max_type_diameter(group: &MarkedGroup, report: &ComplexReport) -> usize {
    let mut d = 0usize;
    for t in &report.types {
        let support: Vec<_> = t.representative.support().into_iter().collect();
        for a in &support {
            let ainv = group.inverse(a);
            for b in &support {
                d = d.max(group.multiply(&ainv, b).len());
            }
        }
    }
    d
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.17e}")
}

// ---------------------------------------------------------------------------
// handlers

fn cmd_group_ball(ctx: &Ctx, args: &GroupArgs) -> Result<(), Failure> {
    let setup = group_setup(ctx, args)?;
    if ctx.dry_run {
        println!(
            "dry-run: group ball (group = {}, radius = {}, ball cap = {})",
            setup.group.presentation().text(),
            setup.radius,
            setup.ball_cap
        );
        return Ok(());
    }
    let w = ball(&setup.group, setup.radius, setup.ball_cap)?;
    let mut text = String::new();
    let _ = writeln!(text, "group = {}", setup.group.presentation().text());
    let _ = writeln!(text, "radius = {}", w.radius());
    let _ = writeln!(text, "size = {}", w.len());
    let spheres: Vec<String> = (0..=w.radius())
        .map(|r| w.sphere_size(r).to_string())
        .collect();
    let _ = writeln!(text, "spheres = {}", spheres.join(" "));
    for e in w.elements() {
        let _ = writeln!(text, "{}", setup.group.render(e));
    }
    ctx.write("ball.txt", &text)?;
    println!("ball size = {}", w.len());
    Ok(())
}

fn cmd_group_icc(ctx: &Ctx, args: &GroupArgs) -> Result<(), Failure> {
    let setup = group_setup(ctx, args)?;
    if ctx.dry_run {
        println!(
            "dry-run: group icc (group = {}, radius = {}, ball cap = {})",
            setup.group.presentation().text(),
            setup.radius,
            setup.ball_cap
        );
        return Ok(());
    }
    let report = icc_evidence(&setup.group, setup.radius, setup.ball_cap)?;
    ctx.write("icc.txt", &report.to_string())?;
    println!("verdict = {:?}", report.verdict);
    Ok(())
}

fn cmd_go_enumerate(ctx: &Ctx, args: &GoEnumerateArgs) -> Result<(), Failure> {
    let setup = group_setup(ctx, &args.group)?;
    let depth = ctx.pick_req(&args.depth, "depth")?;
    let enum_cap = ctx.pick(&args.enum_cap, "enum-cap", DEFAULT_ENUM_CAP)?;
    if ctx.dry_run {
        println!(
            "dry-run: go enumerate (group = {}, radius = {}, depth = {}, state cap = {})",
            setup.group.presentation().text(),
            setup.radius,
            depth,
            enum_cap
        );
        return Ok(());
    }
    let w = ball(&setup.group, setup.radius, setup.ball_cap)?;
    let adm = enumerate_admissible(&w, depth, enum_cap)?;
    let mut per_depth = vec![0usize; depth as usize + 1];
    for i in 0..adm.len() as u32 {
        per_depth[adm.discovery_depth(i) as usize] += 1;
    }
    let mut text = String::new();
    let _ = writeln!(text, "group = {}", setup.group.presentation().text());
    let _ = writeln!(text, "radius = {}", w.radius());
    let _ = writeln!(text, "depth = {}", depth);
    let _ = writeln!(text, "states = {}", adm.len());
    for (d, n) in per_depth.iter().enumerate() {
        let _ = writeln!(text, "depth {d}: {n}");
    }
    for i in 0..adm.len() as u32 {
        let _ = writeln!(
            text,
            "{i}\t{}\t{}",
            adm.discovery_depth(i),
            render_state(&w, adm.state(i))
        );
    }
    ctx.write("go_states.txt", &text)?;
    println!("admissible states = {}", adm.len());
    Ok(())
}

fn cmd_go_play(ctx: &Ctx, args: &GoPlayArgs) -> Result<(), Failure> {
    let state_path: PathBuf = ctx.pick_req(&args.state, "state")?;
    let color = parse_color(&ctx.pick_req(&args.color, "color")?)?;
    let vertex: String = ctx.pick_req(&args.vertex, "vertex")?;
    let doc = read_state_document(&read_input(&state_path)?)?;
    let group_text = ctx
        .pick_opt(&args.group, "group")?
        .unwrap_or_else(|| doc.group.clone());
    let radius = ctx.pick(&args.radius, "radius", doc.radius)?;
    let ball_cap = ctx.pick(&args.ball_cap, "ball-cap", DEFAULT_BALL_CAP)?;
    let group = MarkedGroup::parse(&group_text)?;
    if ctx.dry_run {
        println!(
            "dry-run: go play (group = {}, radius = {}, stones = {}, {} at `{}`)",
            group.presentation().text(),
            radius,
            doc.stones.len(),
            color.name(),
            vertex
        );
        return Ok(());
    }
    let w = ball(&group, radius, ball_cap)?;
    let state = bind_state(&doc, &w)?;
    let v = vertex_id(&w, &vertex)?;
    let after = play(&state, color, v, &w)?;
    ctx.write("go_after.txt", &write_state_document(&after, &w))?;
    println!("stones = {}", after.len());
    Ok(())
}

fn cmd_go_matrix(ctx: &Ctx, args: &GoMatrixArgs) -> Result<(), Failure> {
    let setup = group_setup(ctx, &args.enumerate.group)?;
    let depth = ctx.pick_req(&args.enumerate.depth, "depth")?;
    let enum_cap = ctx.pick(&args.enumerate.enum_cap, "enum-cap", DEFAULT_ENUM_CAP)?;
    let color = parse_color(&ctx.pick_req(&args.color, "color")?)?;
    let vertex: String = ctx.pick_req(&args.vertex, "vertex")?;
    if ctx.dry_run {
        println!(
            "dry-run: go matrix (group = {}, radius = {}, depth = {}, {} at `{}`)",
            setup.group.presentation().text(),
            setup.radius,
            depth,
            color.name(),
            vertex
        );
        return Ok(());
    }
    let w = ball(&setup.group, setup.radius, setup.ball_cap)?;
    let v = vertex_id(&w, &vertex)?;
    let adm = enumerate_admissible(&w, depth, enum_cap)?;
    let op = move_matrix(&adm, color, v)?;
    ctx.write_mtx("go_matrix.mtx", &op)?;
    println!("dimension = {}, moves = {}", op.dim(), op.nnz());
    Ok(())
}

fn cmd_complex_build(ctx: &Ctx, args: &ComplexArgs) -> Result<(), Failure> {
    let setup = group_setup(ctx, &args.group)?;
    let opts = complex_options(ctx, args)?;
    if ctx.dry_run {
        println!(
            "dry-run: complex build (group = {}, radius = {}, size cap = {}, budget = {})",
            setup.group.presentation().text(),
            setup.radius,
            opts.size_cap,
            opts.search_budget
        );
        return Ok(());
    }
    let w = ball(&setup.group, setup.radius, setup.ball_cap)?;
    let mc = maximal_cells(&w, &opts)?;
    let mut text = String::new();
    let _ = writeln!(text, "group = {}", setup.group.presentation().text());
    let _ = writeln!(text, "radius = {}", w.radius());
    let _ = writeln!(text, "dimension bound = {}", mc.dimension_bound);
    let _ = writeln!(text, "truncated = {}", mc.truncated);
    for (level, n) in mc.per_level.iter().enumerate().skip(1) {
        let _ = writeln!(text, "level {level} irreducible blocks = {n}");
    }
    let _ = writeln!(text, "maximal cells = {}", mc.cells.len());
    for c in &mc.cells {
        let _ = writeln!(text, "{}\t{}", c.dimension(), c.render(&setup.group));
    }
    ctx.write("complex_cells.txt", &text)?;
    println!(
        "dimension bound = {}, maximal cells = {}",
        mc.dimension_bound,
        mc.cells.len()
    );
    Ok(())
}

fn cmd_complex_types(ctx: &Ctx, args: &ComplexArgs) -> Result<(), Failure> {
    let setup = group_setup(ctx, &args.group)?;
    let opts = complex_options(ctx, args)?;
    if ctx.dry_run {
        println!(
            "dry-run: complex types (group = {}, radius = {}, size cap = {}, budget = {})",
            setup.group.presentation().text(),
            setup.radius,
            opts.size_cap,
            opts.search_budget
        );
        return Ok(());
    }
    let w = ball(&setup.group, setup.radius, setup.ball_cap)?;
    let mc = maximal_cells(&w, &opts)?;
    let base = cell_types_and_neighbors(&w, &mc.cells)?;
    // Neighbor counts are certified on an enlarged window: one diameter of
    // head room guarantees whole neighborhoods of the requested window's
    // interior cells are present, whatever the requested radius.
    let head = max_type_diameter(&setup.group, &base) as u32;
    let stats_radius = setup.radius + head;
    let enlarged = if head == 0 {
        None
    } else {
        Some(LifeComplex::build(
            &setup.group,
            stats_radius,
            setup.radius,
            setup.ball_cap,
            &opts,
        )?)
    };
    let stats = enlarged.as_ref().map(|lc| lc.report()).unwrap_or(&base);

    let mut text = String::new();
    let _ = writeln!(text, "group = {}", setup.group.presentation().text());
    let _ = writeln!(text, "radius = {}", setup.radius);
    let _ = writeln!(text, "stats radius = {stats_radius}");
    let _ = writeln!(text, "dimension bound = {}", mc.dimension_bound);
    let _ = writeln!(text, "types = {}", base.types.len());
    for (i, t) in base.types.iter().enumerate() {
        let rep = t.representative.render(&setup.group);
        let counts = stats
            .types
            .iter()
            .find(|s| s.representative.render(&setup.group) == rep)
            .map(|s| s.neighbor_counts.clone())
            .unwrap_or_default();
        let shown: Vec<String> = counts.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(
            text,
            "type {i}: dimension = {}, cells = {}, neighbors = [{}], representative = {}",
            t.dimension,
            t.cell_count,
            shown.join(" "),
            rep
        );
    }
    ctx.write("complex_types.txt", &text)?;
    ctx.write("complex.dot", &export_dot(&base))?;
    ctx.write("complex.graphml", &export_graphml(&base))?;
    println!("types = {}", base.types.len());
    Ok(())
}

fn life_setup(ctx: &Ctx, args: &LifeArgs) -> Result<LifeComplex, Failure> {
    let setup = group_setup(ctx, &args.complex.group)?;
    let opts = complex_options(ctx, &args.complex)?;
    let discovery = ctx.pick(&args.discovery_radius, "discovery-radius", 4)?;
    Ok(LifeComplex::build(&setup.group, setup.radius, discovery, setup.ball_cap, &opts)?)
}

fn cmd_life_run(ctx: &Ctx, args: &LifeRunArgs) -> Result<(), Failure> {
    let setup = group_setup(ctx, &args.life.complex.group)?;
    let steps = ctx.pick(&args.steps, "steps", 8u32)?;
    let rule_text: String = ctx.pick_req(&args.life.rule, "rule")?;
    let state_path = ctx.pick_opt(&args.state, "state")?;
    if ctx.dry_run {
        if let Some(p) = &state_path {
            read_input(p)?;
        }
        println!(
            "dry-run: life run (group = {}, radius = {}, rule = `{}`, steps = {})",
            setup.group.presentation().text(),
            setup.radius,
            rule_text,
            steps
        );
        return Ok(());
    }
    let life = life_setup(ctx, &args.life)?;
    let rule = parse_rule(life.report(), &rule_text)?;
    let state0 = match &state_path {
        Some(p) => parse_state(&life, &read_input(p)?)?,
        None => {
            let k = ctx.pick(&args.random, "random", 16usize)?;
            let certified: Vec<usize> = (0..life.cells().len())
                .filter(|&i| life.report().complete[i])
                .collect();
            if certified.len() < k {
                return Err(Failure::Usage(format!(
                    "only {} certified cells available for {k} random live cells; \
                     enlarge --radius",
                    certified.len()
                )));
            }
            let mut rng = ctx.rng();
            let picked = certified.choose_multiple(&mut rng, k).copied();
            LifeState::from_cells(picked)
        }
    };
    let mut populations = vec![state0.len()];
    let mut state = state0;
    for _ in 0..steps {
        state = step(&life, &rule, &state)?;
        populations.push(state.len());
    }
    let mut csv = String::from("generation,population\n");
    for (g, p) in populations.iter().enumerate() {
        let _ = writeln!(csv, "{g},{p}");
    }
    ctx.write("life_populations.csv", &csv)?;
    ctx.write("life_final.txt", &state_to_string(&life, &state))?;
    println!(
        "generations = {steps}, final population = {}",
        populations.last().unwrap()
    );
    Ok(())
}

fn cmd_life_matrix(ctx: &Ctx, args: &LifeMatrixArgs) -> Result<(), Failure> {
    let setup = group_setup(ctx, &args.life.complex.group)?;
    let patch = ctx.pick(&args.patch, "patch", 4usize)?;
    let state_cap = ctx.pick(&args.state_cap, "state-cap", DEFAULT_STATE_CAP)?;
    let rule_text: String = ctx.pick_req(&args.life.rule, "rule")?;
    if ctx.dry_run {
        println!(
            "dry-run: life matrix (group = {}, radius = {}, rule = `{}`, patch = {})",
            setup.group.presentation().text(),
            setup.radius,
            rule_text,
            patch
        );
        return Ok(());
    }
    let life = life_setup(ctx, &args.life)?;
    let rule = parse_rule(life.report(), &rule_text)?;
    // Patch = the `patch` certified cells closest to the identity, ties in
    // canonical cell order, so the basis is reproducible.
    let mut certified: Vec<usize> = (0..life.cells().len())
        .filter(|&i| life.report().complete[i])
        .collect();
    certified.sort_by_key(|&i| {
        let far = life.cells()[i]
            .support()
            .iter()
            .map(|e| e.len())
            .max()
            .unwrap_or(0);
        (far, i)
    });
    if certified.len() < patch {
        return Err(Failure::Usage(format!(
            "only {} certified cells available for a patch of {patch}; enlarge --radius",
            certified.len()
        )));
    }
    let cells: Vec<usize> = certified.into_iter().take(patch).collect();
    let basis = enumerate_states(&cells, state_cap)?;
    let op = step_matrix(&life, &rule, &basis)?;
    ctx.write_mtx("life_matrix.mtx", &op)?;
    println!("dimension = {}, transitions = {}", op.dim(), op.nnz());
    Ok(())
}

fn cmd_trunc(ctx: &Ctx, args: &TruncArgs, defect: bool) -> Result<(), Failure> {
    let setup = group_setup(ctx, &args.group)?;
    let generator: String = match ctx.pick_opt(&args.generator, "generator")? {
        Some(g) => g,
        None if setup.group.generator_count() == 1 => {
            setup.group.presentation().generators()[0].clone()
        }
        None => {
            return Err(Failure::Usage(
                "missing --generator (required when the group has several generators)".to_string(),
            ))
        }
    };
    if ctx.dry_run {
        println!(
            "dry-run: trunc {} (group = {}, radius = {}, generator = {})",
            if defect { "defect" } else { "ops" },
            setup.group.presentation().text(),
            setup.radius,
            generator
        );
        return Ok(());
    }
    let w = ball(&setup.group, setup.radius, setup.ball_cap)?;
    if defect {
        let report = identity_defect(&w, &generator)?;
        ctx.write("trunc_defect.txt", &report.render())?;
        ctx.write_mtx("trunc_defect.mtx", &report.operator)?;
        println!(
            "interior columns = {}, defect entries = {}, identity only = {}",
            report.interior_columns,
            report.entries.len(),
            report.identity_only
        );
    } else {
        let ops = generator_operators(&w, &generator)?;
        ctx.write_mtx("trunc_u.mtx", &ops.u)?;
        ctx.write_mtx("trunc_x.mtx", &ops.x)?;
        println!("dimension = {}", ops.u.dim());
    }
    Ok(())
}

fn cmd_circle_eval(ctx: &Ctx, args: &CircleEvalArgs) -> Result<(), Failure> {
    let word_text: String = ctx.pick_req(&args.word, "word")?;
    let theta = ctx.pick(&args.theta, "theta", GOLDEN)?;
    let x = ctx.pick(&args.x, "x", 0.0f64)?;
    let word = CircleWord::parse(&word_text)?;
    if !(0.0..1.0).contains(&x) {
        return Err(Failure::Usage(format!("--x must lie in [0, 1), got {x}")));
    }
    if ctx.dry_run {
        println!(
            "dry-run: circle eval (word = {word}, theta = {}, x = {})",
            fmt_f64(theta),
            fmt_f64(x)
        );
        return Ok(());
    }
    let value = eval_word(&word, theta, x);
    let mut text = String::new();
    let _ = writeln!(text, "word = {word}");
    let _ = writeln!(text, "theta = {}", fmt_f64(theta));
    let _ = writeln!(text, "x = {}", fmt_f64(x));
    let _ = writeln!(text, "value = {}", fmt_f64(value));
    ctx.write("circle_eval.txt", &text)?;
    println!("value = {}", fmt_f64(value));
    Ok(())
}

fn cmd_circle_defect(ctx: &Ctx, args: &CircleDefectArgs) -> Result<(), Failure> {
    let theta = ctx.pick(&args.theta, "theta", GOLDEN)?;
    let samples = ctx.pick(&args.samples, "samples", 2048usize)?;
    let words: Vec<CircleWord> = if args.word.is_empty() {
        let count = ctx.pick(&args.random, "random", 100usize)?;
        let length = ctx.pick(&args.length, "length", 12usize)?;
        if length == 0 {
            return Err(Failure::Usage("--length must be positive".to_string()));
        }
        let mut rng = ctx.rng();
        (0..count).map(|_| random_reduced_word(&mut rng, length)).collect()
    } else {
        args.word
            .iter()
            .map(|t| CircleWord::parse(t))
            .collect::<Result<_, _>>()?
    };
    if ctx.dry_run {
        println!(
            "dry-run: circle defect ({} words, theta = {}, samples = {samples})",
            words.len(),
            fmt_f64(theta)
        );
        return Ok(());
    }
    let defects: Vec<_> = words
        .par_iter()
        .map(|w| relation_defect(w, theta, samples))
        .collect();
    let mut csv = String::from("word,sup,argmax,near_zero,sign_changes,samples\n");
    let mut worst = 0.0f64;
    for (w, d) in words.iter().zip(&defects) {
        worst = worst.max(d.sup);
        let _ = writeln!(
            csv,
            "{w},{},{},{:.6},{},{}",
            fmt_f64(d.sup),
            fmt_f64(d.argmax),
            d.near_zero,
            d.sign_changes,
            d.samples
        );
    }
    ctx.write("circle_defect.csv", &csv)?;
    println!("words = {}, largest sup = {}", words.len(), fmt_f64(worst));
    Ok(())
}

fn cmd_circle_measure(ctx: &Ctx, args: &CircleMeasureArgs) -> Result<(), Failure> {
    let theta = ctx.pick(&args.theta, "theta", GOLDEN)?;
    let grid = ctx.pick(&args.grid, "grid", 16usize)?;
    if grid < 4 {
        return Err(Failure::Usage(format!("--grid must be at least 4, got {grid}")));
    }
    if ctx.dry_run {
        println!(
            "dry-run: circle measure (theta = {}, grid = {grid})",
            fmt_f64(theta)
        );
        return Ok(());
    }
    let report = measure_experiments(theta, grid);
    ctx.write("circle_measure.csv", &report.to_csv())?;
    ctx.write("circle_measure.txt", &report.summary())?;
    println!(
        "mass ratio = {}, scaling defect = {}",
        fmt_f64(report.ratio),
        fmt_f64(report.scaling_defect)
    );
    Ok(())
}

fn cmd_lab_spectrum(ctx: &Ctx, args: &LabSpectrumArgs) -> Result<(), Failure> {
    let path: PathBuf = ctx.pick_req(&args.matrix, "matrix")?;
    let dense_cap = ctx.pick(&args.dense_cap, "dense-cap", DEFAULT_DENSE_CAP)?;
    let op = read_mtx(&path)?;
    if ctx.dry_run {
        println!(
            "dry-run: lab spectrum (matrix = {}, dimension = {}, dense cap = {dense_cap})",
            path.display(),
            op.dim()
        );
        return Ok(());
    }
    let report = spectrum(&op, dense_cap)?;
    let mut csv = String::from("re,im\n");
    for ev in &report.eigenvalues {
        let _ = writeln!(csv, "{},{}", fmt_f64(ev.re), fmt_f64(ev.im));
    }
    ctx.write("spectrum.csv", &csv)?;
    println!(
        "eigenvalues = {}, tolerance = {}",
        report.eigenvalues.len(),
        fmt_f64(report.tolerance)
    );
    Ok(())
}

fn cmd_lab_commutant(ctx: &Ctx, args: &LabCommutantArgs) -> Result<(), Failure> {
    let dense_cap = ctx.pick(&args.dense_cap, "dense-cap", DEFAULT_DENSE_CAP)?;
    let mut ops = Vec::new();
    for p in &args.matrix {
        ops.push(read_mtx(p)?);
    }
    if ctx.dry_run {
        println!(
            "dry-run: lab commutant ({} operators, dense cap = {dense_cap})",
            ops.len()
        );
        return Ok(());
    }
    let report = commutant_dim_estimate(&ops, dense_cap)?;
    ctx.write("commutant.txt", &report.to_string())?;
    println!("commutant dimension = {}", report.dimension);
    Ok(())
}

// ---------------------------------------------------------------------------
// entry

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = Config::load(cli.config.as_deref())?;
    let threads = match cli.threads {
        Some(n) => n,
        None => cfg.get::<usize>("threads")?.unwrap_or(0),
    };
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Internal(format!("thread pool: {e}")))?;
    }
    let seed = match cli.seed {
        Some(s) => s,
        None => cfg.get::<u64>("seed")?.unwrap_or(0),
    };
    let out = match &cli.out {
        Some(p) => p.clone(),
        None => match cfg.get::<PathBuf>("out")? {
            Some(p) => p,
            None => match std::env::var("CAYLEYLAB_OUT") {
                Ok(v) if !v.is_empty() => PathBuf::from(v),
                _ => PathBuf::from("."),
            },
        },
    };
    let ctx = Ctx { cfg, out, dry_run: cli.dry_run, seed };
    match &cli.cmd {
        Cmd::Group(GroupCmd::Ball(a)) => cmd_group_ball(&ctx, a),
        Cmd::Group(GroupCmd::Icc(a)) => cmd_group_icc(&ctx, a),
        Cmd::Go(GoCmd::Enumerate(a)) => cmd_go_enumerate(&ctx, a),
        Cmd::Go(GoCmd::Play(a)) => cmd_go_play(&ctx, a),
        Cmd::Go(GoCmd::Matrix(a)) => cmd_go_matrix(&ctx, a),
        Cmd::Complex(ComplexCmd::Build(a)) => cmd_complex_build(&ctx, a),
        Cmd::Complex(ComplexCmd::Types(a)) => cmd_complex_types(&ctx, a),
        Cmd::Life(LifeCmd::Run(a)) => cmd_life_run(&ctx, a),
        Cmd::Life(LifeCmd::Matrix(a)) => cmd_life_matrix(&ctx, a),
        Cmd::Trunc(TruncCmd::Ops(a)) => cmd_trunc(&ctx, a, false),
        Cmd::Trunc(TruncCmd::Defect(a)) => cmd_trunc(&ctx, a, true),
        Cmd::Circle(CircleCmd::Eval(a)) => cmd_circle_eval(&ctx, a),
        Cmd::Circle(CircleCmd::Defect(a)) => cmd_circle_defect(&ctx, a),
        Cmd::Circle(CircleCmd::Measure(a)) => cmd_circle_measure(&ctx, a),
        Cmd::Lab(LabCmd::Spectrum(a)) => cmd_lab_spectrum(&ctx, a),
        Cmd::Lab(LabCmd::Commutant(a)) => cmd_lab_commutant(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            let summary = e.to_string().lines().next().unwrap_or("bad usage").to_string();
            let failure = Failure::Usage(summary);
            eprintln!("{}", failure.record());
            return ExitCode::from(failure.code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            eprintln!("{}", failure.record());
            ExitCode::from(failure.code())
        }
    }
}
