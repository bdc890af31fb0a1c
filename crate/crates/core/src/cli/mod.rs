//! Command-line interface. Exit codes: 0 success, 2 a check or verdict
//! failed, 1 usage or construction error.

pub mod presets;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::complexes::{
    bass_serre_ball, coned_off_ball, coset_ball, relative_ball, relative_ball_checked, BallParams, LabeledGraph,
};
use crate::error::{Error, Result};
use crate::groups::{Group, GroupSpec, Parabolic, SubgroupSpec};
use crate::hyperbolicity::{delta_four_point, delta_series, delta_slim, FourPointMode, Verdict};
use crate::isoperimetry::{fill_cycle, hnn_decompose, identity_vertex, path_of_word};
use crate::qi::{check_qi_map, eqdef_check};
use crate::Rational;

#[derive(Parser, Debug)]
#[command(name = "relhyp", version, about = "Relative Cayley graphs, HNN extensions and desk-scale hyperbolicity checks")]
pub struct Cli {
    /// Seed for every sampled procedure; recorded in all artifacts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for pair and quadruple scans (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Ball of the relative Cayley graph.
    Ball(BallCmd),
    /// Ball of the left coset graph.
    Coset(BallCmd),
    /// Ball of the coned-off Cayley graph.
    Coned(BallCmd),
    /// Ball of the Bass–Serre tree of an HNN extension or amalgam.
    Tree(TreeCmd),
    /// Hyperbolicity constant of one ball.
    Delta(DeltaCmd),
    /// Four-point δ over increasing radii, with a trend verdict.
    DeltaSeries(SeriesCmd),
    /// Compares the relative ball with the coset and coned-off balls.
    QiEqdef(EqdefCmd),
    /// Checks an explicit vertex map between two saved graphs.
    QiMap(QiMapCmd),
    /// Britton reduction in an HNN extension.
    Britton(WordCmd),
    /// Subgroup membership.
    Member(MemberCmd),
    /// Canonical form of a word.
    Reduce(WordCmd),
    /// Cycle decomposition (pinch splitting for HNN extensions).
    Decompose(DecomposeCmd),
    /// Run a named experiment.
    Experiment(ExperimentCmd),
}

#[derive(Args, Debug)]
pub struct GroupArg {
    /// Group description: a JSON file or inline JSON.
    #[arg(long)]
    pub group: String,
}

#[derive(Args, Debug)]
pub struct BallArgs {
    #[command(flatten)]
    pub group: GroupArg,
    /// Relative generators by name, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    pub x: Vec<String>,
    /// Parabolic subgroup: JSON spec, JSON file, or a JSON list of words.
    #[arg(long = "parabolic")]
    pub parabolics: Vec<String>,
    /// Ball radius.
    #[arg(short, long)]
    pub r: usize,
    /// Parabolic truncation radius.
    #[arg(long = "rh", default_value_t = 2)]
    pub r_h: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Dot,
    Json,
    Both,
}

#[derive(Args, Debug)]
pub struct BallCmd {
    #[command(flatten)]
    pub ball: BallArgs,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
    /// Also run the truncation check (relative balls only).
    #[arg(long)]
    pub checked: bool,
}

#[derive(Args, Debug)]
pub struct TreeCmd {
    #[command(flatten)]
    pub group: GroupArg,
    #[arg(short, long)]
    pub r: usize,
    #[arg(long = "rh", default_value_t = 2)]
    pub r_h: usize,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphKindArg {
    Relative,
    Coset,
    Coned,
    Tree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    FourPoint,
    Slim,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Basepoint,
    Auto,
}

impl From<ModeArg> for FourPointMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => FourPointMode::Exact,
            ModeArg::Basepoint => FourPointMode::Basepoint,
            ModeArg::Auto => FourPointMode::Auto,
        }
    }
}

#[derive(Args, Debug)]
pub struct DeltaCmd {
    /// Saved graph (JSON) instead of building one.
    #[arg(long, conflicts_with_all = ["group", "r"])]
    pub load: Option<PathBuf>,
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub x: Vec<String>,
    #[arg(long = "parabolic")]
    pub parabolics: Vec<String>,
    #[arg(short, long)]
    pub r: Option<usize>,
    #[arg(long = "rh", default_value_t = 2)]
    pub r_h: usize,
    #[arg(long, value_enum, default_value_t = GraphKindArg::Relative)]
    pub graph: GraphKindArg,
    #[arg(long, value_enum, default_value_t = MethodArg::FourPoint)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    /// Triangle budget for the slim-triangle method.
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct SeriesCmd {
    #[command(flatten)]
    pub group: GroupArg,
    #[arg(long, value_delimiter = ',')]
    pub x: Vec<String>,
    #[arg(long = "parabolic")]
    pub parabolics: Vec<String>,
    /// Radii, comma separated and increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    pub radii: Vec<usize>,
    #[arg(long = "rh", default_value_t = 2)]
    pub r_h: usize,
    #[arg(long, value_enum, default_value_t = GraphKindArg::Relative)]
    pub graph: GraphKindArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    /// Exit with status 2 unless the verdict matches.
    #[arg(long, value_enum)]
    pub expect: Option<ExpectArg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExpectArg {
    Bounded,
    Growing,
}

#[derive(Args, Debug)]
pub struct EqdefCmd {
    #[command(flatten)]
    pub ball: BallArgs,
}

#[derive(Args, Debug)]
pub struct QiMapCmd {
    /// Source graph (JSON).
    #[arg(long)]
    pub source: PathBuf,
    /// Target graph (JSON).
    #[arg(long)]
    pub target: PathBuf,
    /// JSON array giving the image of each source vertex.
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, default_value = "1", value_parser = parse_rational)]
    pub lambda: Rational,
    #[arg(long, default_value = "0", value_parser = parse_rational)]
    pub c: Rational,
    #[arg(long, default_value = "0", value_parser = parse_rational)]
    pub epsilon: Rational,
}

#[derive(Args, Debug)]
pub struct WordCmd {
    #[command(flatten)]
    pub group: GroupArg,
    #[arg(long)]
    pub word: String,
}

#[derive(Args, Debug)]
pub struct MemberCmd {
    #[command(flatten)]
    pub group: GroupArg,
    /// Subgroup: JSON list of generator words or a subgroup spec.
    #[arg(long)]
    pub subgroup: String,
    #[arg(long)]
    pub word: String,
}

#[derive(Args, Debug)]
pub struct DecomposeCmd {
    #[command(flatten)]
    pub group: GroupArg,
    /// Label of the cycle, read from the identity.
    #[arg(long)]
    pub word: String,
    /// Parabolics for a non-HNN group (HNN extensions use `A` and `B`).
    #[arg(long = "parabolic")]
    pub parabolics: Vec<String>,
    #[arg(short, long)]
    pub r: usize,
    #[arg(long = "rh", default_value_t = 0)]
    pub r_h: usize,
    /// Piece diameter bound `M`.
    #[arg(short = 'm', long = "max-diameter", default_value_t = 4)]
    pub m: u32,
}

#[derive(Args, Debug)]
pub struct ExperimentCmd {
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(presets::PRESETS))]
    pub preset: String,
}

/// Parses `p`, `p/q` or a decimal-free integer into a rational.
pub fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    let bad = || format!("not a rational: {s:?}");
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => s.trim().parse::<i64>().map(Rational::from_integer).map_err(|_| bad()),
    }
}

/// Outcome of a command: artifacts are already written; `ok` decides the
/// exit status.
struct Outcome {
    ok: bool,
}

const SUCCESS: Outcome = Outcome { ok: true };

fn read_source(s: &str) -> Result<String> {
    let t = s.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        Ok(s.to_string())
    } else {
        Ok(fs::read_to_string(s)?)
    }
}

pub fn load_group(s: &str) -> Result<Group> {
    let spec: GroupSpec = serde_json::from_str(&read_source(s)?)?;
    Group::from_spec(&spec)
}

/// A subgroup spec, or a JSON list of words meaning the subgroup they
/// generate.
pub fn load_subgroup(s: &str) -> Result<SubgroupSpec> {
    let text = read_source(s)?;
    if text.trim_start().starts_with('[') {
        let gens: Vec<String> = serde_json::from_str(&text)?;
        Ok(SubgroupSpec::folded(gens))
    } else {
        Ok(serde_json::from_str(&text)?)
    }
}

fn resolve_x(g: &Group, names: &[String]) -> Result<Vec<u32>> {
    if names.is_empty() {
        return Ok((0..g.rank() as u32).collect());
    }
    names
        .iter()
        .map(|n| g.alphabet().index(n.trim()).ok_or_else(|| Error::Alphabet(format!("unknown generator {n:?}"))))
        .collect()
}

fn resolve_parabolics(g: &Group, specs: &[String]) -> Result<Vec<Parabolic>> {
    specs.iter().map(|s| g.parabolic(&load_subgroup(s)?)).collect()
}

struct Artifacts {
    dir: PathBuf,
    seed: u64,
}

impl Artifacts {
    fn path(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        Ok(self.dir.join(name))
    }

    fn json(&self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        let mut v = serde_json::to_value(value)?;
        match &mut v {
            Value::Object(m) => {
                m.insert("seed".into(), self.seed.into());
            }
            other => {
                *other = serde_json::json!({ "seed": self.seed, "result": other.clone() });
            }
        }
        let p = self.path(name)?;
        fs::write(&p, serde_json::to_string_pretty(&v)? + "\n")?;
        Ok(p)
    }

    fn csv(&self, name: &str, body: &str) -> Result<PathBuf> {
        let mut out = String::new();
        for (i, line) in body.lines().enumerate() {
            out.push_str(line);
            out.push_str(if i == 0 { ",seed" } else { "," });
            if i > 0 {
                out.push_str(&self.seed.to_string());
            }
            out.push('\n');
        }
        let p = self.path(name)?;
        fs::write(&p, out)?;
        Ok(p)
    }

    fn graph(&self, stem: &str, g: &LabeledGraph, group: &Group, format: Format) -> Result<()> {
        if matches!(format, Format::Dot | Format::Both) {
            let p = self.path(&format!("{stem}.dot"))?;
            let dot = format!("// seed={}\n{}", self.seed, g.to_dot(group.alphabet(), group.key_alphabet()));
            fs::write(&p, dot)?;
            println!("wrote {}", p.display());
        }
        if matches!(format, Format::Json | Format::Both) {
            let v: Value = serde_json::from_str(&g.to_json(group.alphabet(), group.key_alphabet())?)?;
            let p = self.json(&format!("{stem}.json"), &v)?;
            println!("wrote {}", p.display());
        }
        Ok(())
    }
}

fn build_kind(g: &Group, kind: GraphKindArg, x: &[u32], pars: &[Parabolic], p: BallParams) -> Result<LabeledGraph> {
    match kind {
        GraphKindArg::Relative => relative_ball(g, x, pars, p),
        GraphKindArg::Coset => coset_ball(g, x, pars, p),
        GraphKindArg::Coned => coned_off_ball(g, x, pars, p),
        GraphKindArg::Tree => bass_serre_ball(g, p),
    }
}

fn show(v: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run_ball(art: &Artifacts, c: &BallCmd, kind: GraphKindArg) -> Result<Outcome> {
    let g = load_group(&c.ball.group.group)?;
    let x = resolve_x(&g, &c.ball.x)?;
    let pars = resolve_parabolics(&g, &c.ball.parabolics)?;
    let p = BallParams::new(c.ball.r, c.ball.r_h);
    let graph = if c.checked && kind == GraphKindArg::Relative {
        relative_ball_checked(&g, &x, &pars, p)?
    } else {
        build_kind(&g, kind, &x, &pars, p)?
    };
    let stem = match kind {
        GraphKindArg::Relative => "ball",
        GraphKindArg::Coset => "coset",
        GraphKindArg::Coned => "coned",
        GraphKindArg::Tree => "tree",
    };
    println!("vertices {} edges {} exact {:?}", graph.vertex_count(), graph.edge_count(), graph.meta().exact);
    art.graph(stem, &graph, &g, c.format)?;
    Ok(SUCCESS)
}

fn run_tree(art: &Artifacts, c: &TreeCmd) -> Result<Outcome> {
    let g = load_group(&c.group.group)?;
    let t = bass_serre_ball(&g, BallParams::new(c.r, c.r_h))?;
    let acyclic = t.is_acyclic();
    println!("vertices {} edges {} acyclic {acyclic}", t.vertex_count(), t.edge_count());
    art.graph("tree", &t, &g, c.format)?;
    Ok(Outcome { ok: acyclic })
}

fn run_delta(art: &Artifacts, c: &DeltaCmd) -> Result<Outcome> {
    let graph = match (&c.load, &c.group, c.r) {
        (Some(p), _, _) => LabeledGraph::from_json(&fs::read_to_string(p)?)?,
        (None, Some(gs), Some(r)) => {
            let g = load_group(gs)?;
            let x = resolve_x(&g, &c.x)?;
            let pars = resolve_parabolics(&g, &c.parabolics)?;
            build_kind(&g, c.graph, &x, &pars, BallParams::new(r, c.r_h))?
        }
        _ => return Err(Error::Precondition("give --load, or --group with -r".into())),
    };
    let rep = match c.method {
        MethodArg::FourPoint => delta_four_point(&graph, c.mode.into())?,
        MethodArg::Slim => delta_slim(&graph, c.samples, art.seed)?,
    };
    println!("delta {} ({} on {} vertices)", rep.delta(), rep.method.as_str(), rep.n_vertices);
    let p = art.json("delta.json", &serde_json::json!({ "report": rep, "delta": rep.delta().to_string() }))?;
    println!("wrote {}", p.display());
    Ok(SUCCESS)
}

fn run_series(art: &Artifacts, c: &SeriesCmd) -> Result<Outcome> {
    let g = load_group(&c.group.group)?;
    let x = resolve_x(&g, &c.x)?;
    let pars = resolve_parabolics(&g, &c.parabolics)?;
    let s = delta_series(|r| build_kind(&g, c.graph, &x, &pars, BallParams::new(r, c.r_h)), &c.radii, c.mode.into())?;
    print!("{}", s.to_csv());
    let p = art.csv("delta-series.csv", &s.to_csv())?;
    println!("wrote {}", p.display());
    let ok = match c.expect {
        None => true,
        Some(ExpectArg::Bounded) => s.verdict == Verdict::Bounded,
        Some(ExpectArg::Growing) => s.verdict == Verdict::Growing,
    };
    Ok(Outcome { ok })
}

fn run_eqdef(art: &Artifacts, c: &EqdefCmd) -> Result<Outcome> {
    let g = load_group(&c.ball.group.group)?;
    let x = resolve_x(&g, &c.ball.x)?;
    let pars = resolve_parabolics(&g, &c.ball.parabolics)?;
    let rep = eqdef_check(&g, &x, &pars, c.ball.r, c.ball.r_h)?;
    println!(
        "eq1 {} eq2 {} density {} iota {} exact {}",
        rep.eq1.ok,
        rep.eq2.ok,
        rep.alpha.density.ok,
        rep.iota.as_ref().map_or("n/a".to_string(), |v| v.passed().to_string()),
        rep.exact
    );
    let p = art.json("qi-eqdef.json", &rep)?;
    println!("wrote {}", p.display());
    Ok(Outcome { ok: rep.passed() })
}

fn run_qi_map(art: &Artifacts, c: &QiMapCmd) -> Result<Outcome> {
    let g1 = LabeledGraph::from_json(&fs::read_to_string(&c.source)?)?;
    let g2 = LabeledGraph::from_json(&fs::read_to_string(&c.target)?)?;
    let map: Vec<usize> = serde_json::from_str(&fs::read_to_string(&c.map)?)?;
    let mut v = check_qi_map(&map, &g1, &g2, c.lambda, c.c, c.epsilon)?;
    v.label_with(|i| g1.render_payload(i, &empty_alphabet(), &empty_alphabet()), |i| {
        g2.render_payload(i, &empty_alphabet(), &empty_alphabet())
    });
    println!("lower {} upper {} density {}", v.lower.ok, v.upper.ok, v.density.ok);
    let p = art.json("qi-map.json", &v)?;
    println!("wrote {}", p.display());
    Ok(Outcome { ok: v.passed() })
}

fn empty_alphabet() -> crate::words::Alphabet {
    crate::words::Alphabet::standard(0)
}

fn run_britton(c: &WordCmd) -> Result<Outcome> {
    let g = load_group(&c.group.group)?;
    let w = g.parse(&c.word)?;
    let r = g.britton_reduce(&w)?;
    println!("{}", g.format(&r));
    Ok(SUCCESS)
}

fn run_reduce(c: &WordCmd) -> Result<Outcome> {
    let g = load_group(&c.group.group)?;
    let w = g.parse(&c.word)?;
    let e = g.canonical_form(&w);
    println!("{}", g.key_alphabet().format(&e.key));
    Ok(SUCCESS)
}

fn run_member(c: &MemberCmd) -> Result<Outcome> {
    let g = load_group(&c.group.group)?;
    let p = g.parabolic(&load_subgroup(&c.subgroup)?)?;
    let w = g.parse(&c.word)?;
    println!("{}", g.parabolic_contains(&p, &w)?);
    Ok(SUCCESS)
}

fn run_decompose(art: &Artifacts, c: &DecomposeCmd) -> Result<Outcome> {
    let g = load_group(&c.group.group)?;
    let letters = g.alphabet().parse_raw(&c.word)?;
    let x: Vec<u32> = (0..g.rank() as u32).collect();
    let p = BallParams::new(c.r, c.r_h);
    let rep = match g.hnn_parabolics() {
        Some(pars) => {
            let ball = relative_ball(&g, &x, &pars, p)?;
            let cyc = path_of_word(&ball, identity_vertex(&ball)?, &letters)?;
            hnn_decompose(&g, &ball, &cyc, c.m)?
        }
        None => {
            let pars = resolve_parabolics(&g, &c.parabolics)?;
            let ball = relative_ball(&g, &x, &pars, p)?;
            let cyc = path_of_word(&ball, identity_vertex(&ball)?, &letters)?;
            fill_cycle(&ball, &cyc, c.m)?
        }
    };
    println!(
        "k {} n {} l {} max diameter {} chain {} bound {} bookkeeping {}",
        rep.k, rep.n, rep.l, rep.max_diameter, rep.chain_ok, rep.bound_ok, rep.bookkeeping_ok
    );
    let path = art.json("decompose.json", &rep)?;
    println!("wrote {}", path.display());
    Ok(Outcome { ok: rep.chain_ok && rep.diameter_ok && rep.bound_ok && rep.bookkeeping_ok })
}

fn run_experiment(art: &Artifacts, c: &ExperimentCmd) -> Result<Outcome> {
    let ok = match c.preset.as_str() {
        "z-chain" => {
            let z = presets::z_chain()?;
            print!("{}", z.to_csv());
            println!("Z2 rel Z: {}; Z3 rel Z: {}", z.z2.verdict.as_str(), z.z3.verdict.as_str());
            art.csv("z-chain.csv", &z.to_csv())?;
            art.json("z-chain.json", &z)?;
            z.passed()
        }
        "tree-comparison" => {
            let cases = presets::tree_comparison()?;
            for t in &cases {
                println!(
                    "{}: coset {} tree {} acyclic {} delta {} orbit M {} pass {}",
                    t.name,
                    t.coset_vertices,
                    t.tree_vertices,
                    t.tree_acyclic,
                    t.coset_delta.as_ref().map_or("n/a".into(), |d| d.delta().to_string()),
                    t.orbit_bound.as_ref().map_or("n/a".into(), |o| o.forward.m.to_string()),
                    t.passed()
                );
            }
            art.json("tree-comparison.json", &cases)?;
            cases.iter().all(|t| t.passed())
        }
        "comm-kernel" => {
            let k = presets::comm_kernel(art.seed, 200)?;
            show(&k)?;
            art.json("comm-kernel.json", &k)?;
            k.passed()
        }
        "free-relative" => {
            let f = presets::free_relative()?;
            print!("{}", f.series.to_csv());
            art.csv("free-relative.csv", &f.series.to_csv())?;
            f.passed()
        }
        other => return Err(Error::Precondition(format!("unknown preset {other:?}"))),
    };
    println!("{}", if ok { "PASS" } else { "FAIL" });
    Ok(Outcome { ok })
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let art = Artifacts { dir: cli.out.clone(), seed: cli.seed };
    match &cli.command {
        Command::Ball(c) => run_ball(&art, c, GraphKindArg::Relative),
        Command::Coset(c) => run_ball(&art, c, GraphKindArg::Coset),
        Command::Coned(c) => run_ball(&art, c, GraphKindArg::Coned),
        Command::Tree(c) => run_tree(&art, c),
        Command::Delta(c) => run_delta(&art, c),
        Command::DeltaSeries(c) => run_series(&art, c),
        Command::QiEqdef(c) => run_eqdef(&art, c),
        Command::QiMap(c) => run_qi_map(&art, c),
        Command::Britton(c) => run_britton(c),
        Command::Member(c) => run_member(c),
        Command::Reduce(c) => run_reduce(c),
        Command::Decompose(c) => run_decompose(&art, c),
        Command::Experiment(c) => run_experiment(&art, c),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return 1;
        }
    }
    match dispatch(&cli) {
        Ok(o) if o.ok => 0,
        Ok(_) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
