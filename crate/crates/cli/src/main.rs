mod selftest;
mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use solspec::dynamics::{self, LoopSpec, PhasePoint};
use solspec::manifold::{self, FibreMetric, Geometry, GluingMap};
use solspec::output::fmt12;
use solspec::spectrum::{self, FieldSpec};
use solspec::statistics::{self, Involution, SymmetryMode};
use solspec::{qforms, semiclassics, Error, ErrorKind, IntMat2, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use svg::Plot;

#[derive(Parser)]
#[command(name = "solspec", version, about = "Laplace spectra and geodesic flow of Sol-manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Arithmetic of the dual quadratic form: discriminant, Pell unit, class number, representation counts.
    Forms(FormsArgs),
    /// Assemble, group and check the spectrum below an energy cut.
    Spectrum(SpectrumArgs),
    /// Empirical counting function against the Weyl prediction.
    Weyl(WeylArgs),
    /// Integer spacing histogram and growth of represented values.
    Spacing(SpacingArgs),
    /// Flower of the dual lattice and monodromy transport.
    Flower(FlowerArgs),
    /// Integrate a geodesic and compare with the caustics.
    Geodesic(GeodesicArgs),
    /// Sample an averaged eigenfunction on a slice.
    Field(FieldArgs),
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
#[serde(rename_all = "kebab-case")]
struct Common {
    /// Gluing matrix, row-major: a11,a12,a21,a22.
    #[arg(long, default_value = "2,1,1,1", allow_hyphen_values = true)]
    matrix: String,
    /// Fibre metric alpha,beta,gamma.
    #[arg(long, default_value = "1,0,1", allow_hyphen_values = true)]
    metric: String,
    /// Directory for CSV, JSON and SVG output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON object whose keys override the flags of the same name.
    #[arg(long)]
    #[serde(skip)]
    json_config: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Run the invariant suite of this subcommand instead.
    #[arg(long)]
    selftest: bool,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
#[serde(rename_all = "kebab-case")]
struct FormsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Value of the primitive form whose representations are counted.
    #[arg(long, allow_negative_numbers = true)]
    n: Option<i64>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
#[serde(rename_all = "kebab-case")]
struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1000.0)]
    energy_cut: f64,
    /// Absolute tolerance of each Mathieu level.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Relative gap below which lines are merged.
    #[arg(long, default_value_t = 1e-7)]
    grouping_tol: f64,
    /// Largest |n| of the primitive form checked against the prediction.
    #[arg(long, default_value_t = 200)]
    nmax: u64,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
#[serde(rename_all = "kebab-case")]
struct WeylArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, default_value_t = 2000.0)]
    energy: f64,
    /// Number of equally spaced sample energies up to `--energy`.
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum Mode {
    /// All orbits, both signs.
    Orbit,
    /// Orbits with p > 0, Q > 0 modulo an extra involution.
    Extra,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
#[serde(rename_all = "kebab-case")]
struct SpacingArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, default_value_t = 8100)]
    qmax: u64,
    #[arg(long, value_enum, default_value_t = Mode::Orbit)]
    mode: Mode,
    /// First involution factor, row-major; searched for when omitted.
    #[arg(long, allow_hyphen_values = true)]
    r1: Option<String>,
    /// Second involution factor with A = R2 R1.
    #[arg(long, allow_hyphen_values = true)]
    r2: Option<String>,
    /// Remove repeated values before taking spacings.
    #[arg(long)]
    drop_degenerate: bool,
    /// Comma-separated growth checkpoints; powers of ten up to qmax by default.
    #[arg(long)]
    checkpoints: Option<String>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
#[serde(rename_all = "kebab-case")]
struct FlowerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, default_value_t = 3600)]
    qmax: u64,
    /// Carry a lattice cell around a loop and print the monodromy matrix.
    #[arg(long)]
    transport: bool,
    #[arg(long, default_value_t = 25.0)]
    radius: f64,
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    center: String,
    #[arg(long)]
    clockwise: bool,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
#[serde(rename_all = "kebab-case")]
struct GeodesicArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Initial point u,v,z,p_u,p_v,p_z.
    #[arg(long, default_value = "0.1,-0.2,0.15,0.8,0.6,0.3", allow_hyphen_values = true)]
    point: String,
    #[arg(long, default_value_t = 100.0)]
    time: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Write every n-th sample.
    #[arg(long, default_value_t = 100)]
    stride: usize,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
#[serde(rename_all = "kebab-case")]
struct FieldArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
    gamma: String,
    #[arg(long, default_value_t = 15)]
    level: usize,
    /// Fixed fibre coordinate of the slice.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    x: f64,
    /// y range as start,end,count.
    #[arg(long, default_value = "0,1,101", allow_hyphen_values = true)]
    y: String,
    /// z range as start,end,count.
    #[arg(long, default_value = "-2,2,201", allow_hyphen_values = true)]
    z: String,
    #[arg(long, default_value_t = 1e-8)]
    trunc: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {}", e.label(), e.to_string().replace('\n', " "));
            ExitCode::from(match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Resource => 3,
            })
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Forms(a) => forms(configure(a, |a| &a.common)?),
        Command::Spectrum(a) => spectrum_cmd(configure(a, |a| &a.common)?),
        Command::Weyl(a) => weyl(configure(a, |a| &a.common)?),
        Command::Spacing(a) => spacing(configure(a, |a| &a.common)?),
        Command::Flower(a) => flower(configure(a, |a| &a.common)?),
        Command::Geodesic(a) => geodesic(configure(a, |a| &a.common)?),
        Command::Field(a) => field(configure(a, |a| &a.common)?),
    }
}

/// Applies `--json-config` and `--threads`.
fn configure<T: Serialize + DeserializeOwned>(args: T, common: impl Fn(&T) -> &Common) -> Result<T> {
    let args = match common(&args).json_config.clone() {
        Some(path) => merge_config(&args, &path)?,
        None => args,
    };
    if let Some(n) = common(&args).threads {
        if n == 0 {
            return Err(Error::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    }
    Ok(args)
}

fn merge_config<T: Serialize + DeserializeOwned>(args: &T, path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let cfg: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Validation(format!("config {} is not JSON: {e}", path.display())))?;
    let Value::Object(cfg) = cfg else {
        return Err(Error::Validation("config must be a JSON object".into()));
    };
    let mut base = serde_json::to_value(args).map_err(|e| Error::Inconsistency(e.to_string()))?;
    let slots = base.as_object_mut().ok_or_else(|| Error::Inconsistency("flags are not an object".into()))?;
    for (key, value) in cfg {
        let slot = slots
            .get_mut(&key.replace('_', "-"))
            .ok_or_else(|| Error::Validation(format!("unknown config key {key}")))?;
        *slot = match value {
            // list-valued flags are comma-separated strings on the command line
            Value::Array(items) => Value::String(
                items.iter().map(|v| v.as_str().map_or_else(|| v.to_string(), str::to_string)).collect::<Vec<_>>().join(","),
            ),
            v => v,
        };
    }
    serde_json::from_value(base).map_err(|e| Error::Validation(format!("config {}: {e}", path.display())))
}

fn parse_list<T: FromStr>(s: &str, len: usize, what: &str) -> Result<Vec<T>> {
    let v: Vec<T> = s
        .split(',')
        .map(|x| x.trim().parse::<T>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Validation(format!("cannot parse {what} from '{s}'")))?;
    if v.len() != len {
        return Err(Error::Validation(format!("{what} needs {len} comma-separated entries, got {}", v.len())));
    }
    Ok(v)
}

fn range3(s: &str, what: &str) -> Result<(f64, f64, usize)> {
    let v: Vec<f64> = parse_list(s, 3, what)?;
    if v[2] < 1.0 || v[2].fract() != 0.0 {
        return Err(Error::Validation(format!("{what} count must be a positive integer")));
    }
    Ok((v[0], v[1], v[2] as usize))
}

fn int_matrix(s: &str, what: &str) -> Result<IntMat2> {
    let v: Vec<i128> = parse_list(s, 4, what)?;
    Ok(IntMat2::new(v[0], v[1], v[2], v[3]))
}

fn geometry_of(c: &Common) -> Result<Geometry> {
    let m: Vec<i64> = parse_list(&c.matrix, 4, "matrix")?;
    let g: Vec<f64> = parse_list(&c.metric, 3, "metric")?;
    manifold::geometry(GluingMap::new(m[0], m[1], m[2], m[3])?, FibreMetric::new(g[0], g[1], g[2])?)
}

struct Output<'a>(Option<&'a Path>);

impl Output<'_> {
    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let Some(dir) = self.0 else { return Ok(()) };
        let io = |e: std::io::Error| Error::Resource(format!("writing {}: {e}", dir.join(name).display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join(name), contents).map_err(io)?;
        println!("wrote {}", dir.join(name).display());
        Ok(())
    }
}

fn selftest(name: &str, geom: &Geometry) -> Result<()> {
    for line in selftest::run(name, geom)? {
        println!("{line}");
    }
    println!("selftest {name}: passed");
    Ok(())
}

fn matrix_str(m: &[[i64; 2]; 2]) -> String {
    format!("[[{},{}],[{},{}]]", m[0][0], m[0][1], m[1][0], m[1][1])
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::Inconsistency(e.to_string()))
}

#[derive(Serialize)]
struct FormsReport {
    matrix: [i64; 4],
    dual_form: [i128; 3],
    discriminant: i128,
    content: i128,
    primitive_form: [i128; 3],
    pell: [i128; 2],
    automorph: [i128; 4],
    r: u32,
    class_number: u64,
    n: Option<i64>,
    orbit_count: Option<u64>,
    formula_count: Option<i64>,
    multiplicity: Option<u64>,
}

fn forms(a: FormsArgs) -> Result<()> {
    let geom = geometry_of(&a.common)?;
    if a.common.selftest {
        return selftest("forms", &geom);
    }
    let q = geom.dual_form();
    let (qh, l) = qforms::primitive_part(&q);
    let d = qh.discriminant();
    let pell = qforms::pell_fundamental(d)?;
    let prim = qforms::primitivity_index(&geom.gluing.dual())?;
    let gen = qforms::automorph_generator(&qh)?;
    let h = qforms::class_number(d)?;
    let g = gen.matrix;
    println!("Q_A*=({},{},{})", q.a, q.b, q.c);
    println!("D={}", q.discriminant());
    println!("l={}", l.abs());
    println!("Q_hat=({},{},{}) D_hat={d}", qh.a, qh.b, qh.c);
    println!("pell=({},{})", pell.x0, pell.y0);
    println!("automorph={g}");
    println!("r={}", prim.r);
    println!("h={h}");
    let mut report = FormsReport {
        matrix: geom.gluing.entries(),
        dual_form: [q.a, q.b, q.c],
        discriminant: q.discriminant(),
        content: l.abs(),
        primitive_form: [qh.a, qh.b, qh.c],
        pell: [pell.x0, pell.y0],
        automorph: [g.m[0][0], g.m[0][1], g.m[1][0], g.m[1][1]],
        r: prim.r,
        class_number: h,
        n: None,
        orbit_count: None,
        formula_count: None,
        multiplicity: None,
    };
    if let Some(n) = a.n {
        if n == 0 {
            return Err(Error::Validation("--n must be nonzero".into()));
        }
        let count = qforms::rep_count_bruteforce(&qh, n as i128, &gen.matrix)?;
        let formula = if h == 1 && qforms::gcd(n as i128, d) == 1 {
            Some(qforms::rep_count_formula(d as i64, n.unsigned_abs())?)
        } else {
            None
        };
        let m = 2 * prim.r as u64 * count;
        println!("n={n}");
        println!("N={count}");
        if let Some(f) = formula {
            println!("N_formula={f}");
        }
        println!("m={m}");
        report.n = Some(n);
        report.orbit_count = Some(count);
        report.formula_count = formula;
        report.multiplicity = Some(m);
    }
    Output(a.common.out.as_deref()).write("forms.json", &to_json(&report)?)
}

fn spectrum_cmd(a: SpectrumArgs) -> Result<()> {
    let geom = geometry_of(&a.common)?;
    if a.common.selftest {
        return selftest("spectrum", &geom);
    }
    let table = spectrum::assemble(&geom, a.energy_cut, a.tol)?;
    let grouped = spectrum::group_degenerate(&geom, &table, a.grouping_tol)?;
    let report = spectrum::check_multiplicities(&geom, &table, &grouped, a.nmax)?;
    let mismatches = report.mismatches().count();
    println!("lines={}", table.lines.len());
    println!("states={}", table.lines.iter().map(|l| l.multiplicity).sum::<u64>());
    println!("groups={}", grouped.groups.len());
    println!("non_generic={}", grouped.non_generic);
    println!("sign_symmetric={}", report.sign_symmetric);
    println!("accidental={}", report.accidental);
    println!("checked={}", report.checks.len());
    println!("mismatches={mismatches}");
    println!("geometry_hash={}", table.geometry_hash);
    let mut groups = String::from("energy,multiplicity,kind,lines\n");
    for g in &grouped.groups {
        let _ = writeln!(groups, "{},{},{},{}", fmt12(g.energy), g.multiplicity, kind_name(g.kind), g.members.len());
    }
    let mut checks = String::from("energy,observed,predicted,kind,values\n");
    for c in &report.checks {
        let vals: Vec<String> = c.values.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(checks, "{},{},{},{},{}", fmt12(c.energy), c.observed, c.predicted, kind_name(c.kind), vals.join(" "));
    }
    let out = Output(a.common.out.as_deref());
    out.write("spectrum.csv", &table.to_csv())?;
    out.write("spectrum.json", &(table.to_json()? + "\n"))?;
    out.write("groups.csv", &groups)?;
    out.write("multiplicities.csv", &checks)
}

fn kind_name(k: spectrum::MergeKind) -> &'static str {
    match k {
        spectrum::MergeKind::Single => "single",
        spectrum::MergeKind::Predicted => "predicted",
        spectrum::MergeKind::SignSymmetric => "sign_symmetric",
        spectrum::MergeKind::Accidental => "accidental",
    }
}

fn weyl(a: WeylArgs) -> Result<()> {
    let geom = geometry_of(&a.common)?;
    if a.common.selftest {
        return selftest("weyl", &geom);
    }
    if a.points == 0 || !(a.energy > 0.0) {
        return Err(Error::Validation("need --energy > 0 and --points >= 1".into()));
    }
    let table = spectrum::assemble(&geom, a.energy, a.tol)?;
    let lambdas: Vec<f64> = (1..=a.points).map(|i| a.energy * i as f64 / a.points as f64).collect();
    let pts = semiclassics::weyl_curve(&table, geom.area, &lambdas)?;
    let last = pts.last().ok_or_else(|| Error::Inconsistency("empty Weyl curve".into()))?;
    println!("lambda={}", fmt12(last.lambda));
    println!("N={}", last.empirical);
    println!("predicted={}", fmt12(last.predicted));
    println!("ratio={}", fmt12(last.ratio));
    let top = pts.iter().map(|p| p.predicted.max(p.empirical as f64)).fold(1.0, f64::max);
    let mut plot = Plot::new("counting function and Weyl prediction", (0.0, a.energy), (0.0, top));
    plot.polyline(&pts.iter().map(|p| (p.lambda, p.predicted)).collect::<Vec<_>>(), "gray");
    plot.points(&pts.iter().map(|p| (p.lambda, p.empirical as f64)).collect::<Vec<_>>(), 3.0, "black");
    let out = Output(a.common.out.as_deref());
    out.write("weyl.csv", &semiclassics::weyl_csv(&pts))?;
    out.write("weyl.svg", &plot.finish())
}

fn spacing(a: SpacingArgs) -> Result<()> {
    let geom = geometry_of(&a.common)?;
    if a.common.selftest {
        return selftest("spacing", &geom);
    }
    let mode = match a.mode {
        Mode::Orbit => SymmetryMode::OrbitOnly,
        Mode::Extra => {
            let inv = match (&a.r1, &a.r2) {
                (Some(r1), Some(r2)) => Involution::new(int_matrix(r1, "r1")?, int_matrix(r2, "r2")?, &geom.gluing)?,
                (None, None) => statistics::find_involution(&geom.gluing)
                    .ok_or_else(|| Error::Validation("A is not a product of two integer involutions".into()))?,
                _ => return Err(Error::Validation("give both --r1 and --r2 or neither".into())),
            };
            SymmetryMode::ExtraInvolution(inv)
        }
    };
    let vs = statistics::value_sequence(&geom, a.qmax, mode)?;
    let hist = statistics::spacing_histogram(&vs, a.drop_degenerate)?;
    let checkpoints: Vec<u64> = match &a.checkpoints {
        Some(s) => s
            .split(',')
            .map(|x| x.trim().parse::<u64>().map_err(|_| Error::Validation(format!("bad checkpoint '{x}'"))))
            .collect::<Result<_>>()?,
        None => {
            let mut v: Vec<u64> = std::iter::successors(Some(10u64), |k| k.checked_mul(10)).take_while(|&k| k <= a.qmax).collect();
            if v.last() != Some(&a.qmax) && a.qmax >= 2 {
                v.push(a.qmax);
            }
            v
        }
    };
    let growth = statistics::represented_growth(&vs, &checkpoints)?;
    if let SymmetryMode::ExtraInvolution(inv) = mode {
        println!("R1={}", inv.r1);
        println!("R2={}", inv.r2);
    }
    println!("values={}", vs.values.len());
    println!("values_per_qmax={}", fmt12(vs.values.len() as f64 / a.qmax as f64));
    println!("spacings={}", hist.total);
    println!("zero_fraction={}", fmt12(hist.zero_fraction()));
    let shown: Vec<(u64, u64)> = hist.bins.iter().map(|(k, v)| (*k, *v)).take_while(|(k, _)| *k <= 40).collect();
    let top = shown.iter().map(|(_, v)| *v as f64 / hist.total as f64).fold(0.0, f64::max);
    let mut plot = Plot::new("integer spacings", (-0.5, 40.5), (0.0, top.max(1e-3)));
    plot.bars(&shown.iter().map(|(k, v)| (*k as f64, *v as f64 / hist.total as f64)).collect::<Vec<_>>(), 0.8, "steelblue");
    let out = Output(a.common.out.as_deref());
    out.write("spacing.csv", &hist.to_csv())?;
    out.write("growth.csv", &statistics::growth_csv(&growth))?;
    out.write("spacing.svg", &plot.finish())
}

fn flower(a: FlowerArgs) -> Result<()> {
    let geom = geometry_of(&a.common)?;
    if a.common.selftest {
        return selftest("flower", &geom);
    }
    let center: Vec<f64> = parse_list(&a.center, 2, "center")?;
    let pts = dynamics::flower(&geom, a.qmax)?;
    println!("points={}", pts.len());
    let half = pts.iter().map(|p| p.f1.abs().max(p.f2.abs())).fold(1.0, f64::max);
    let mut plot = Plot::square("flower of the dual lattice", half);
    plot.points(&pts.iter().map(|p| (p.f1, p.f2)).collect::<Vec<_>>(), 1.2, "black");
    let b = dynamics::bifurcation_radii(&geom);
    plot.circle((0.0, 0.0), b.r_plus, "red");
    plot.circle((0.0, 0.0), b.r_minus, "blue");
    if a.transport {
        let spec = LoopSpec { center: [center[0], center[1]], radius: a.radius, counterclockwise: !a.clockwise };
        let t = dynamics::monodromy_transport(&geom, &pts, &spec)?;
        plot.circle((center[0], center[1]), a.radius, "green");
        println!("transport={}", matrix_str(&t.matrix));
        println!("steps={}", t.steps);
        println!("start=({},{})", t.start[0], t.start[1]);
        let e = geom.gluing.entries();
        println!("equals_gluing={}", t.matrix == [[e[0], e[1]], [e[2], e[3]]]);
    }
    let out = Output(a.common.out.as_deref());
    out.write("flower.csv", &dynamics::flower_csv(&pts))?;
    out.write("flower.svg", &plot.finish())
}

fn geodesic(a: GeodesicArgs) -> Result<()> {
    let geom = geometry_of(&a.common)?;
    if a.common.selftest {
        return selftest("geodesic", &geom);
    }
    let p: Vec<f64> = parse_list(&a.point, 6, "point")?;
    let pt = PhasePoint { u: p[0], v: p[1], z: p[2], pu: p[3], pv: p[4], pz: p[5] };
    let tr = dynamics::integrate(&pt, &geom, a.time, a.step)?;
    let energy = dynamics::hamiltonian(&pt, &geom);
    let (zmin, zmax) = tr.z_extrema();
    println!("energy={}", fmt12(energy));
    println!("energy_drift={}", fmt12(tr.energy_drift));
    println!("q_drift={}", fmt12(tr.q_drift));
    println!("status={}", if tr.status == dynamics::DriftStatus::Ok { "ok" } else { "warning" });
    println!("z_min={} z_max={}", fmt12(zmin), fmt12(zmax));
    if pt.pu * pt.pv != 0.0 {
        let (lo, hi) = dynamics::turning_points(pt.pu, pt.pv, energy, &geom)?;
        println!("caustics={} {}", fmt12(lo), fmt12(hi));
        println!("caustic_error={}", fmt12((zmin - lo).abs().max((zmax - hi).abs())));
        let inv = dynamics::invariants(&pt, &geom);
        println!("Q={} F=({},{})", fmt12(inv.q), fmt12(inv.f1), fmt12(inv.f2));
    }
    let zs: Vec<(f64, f64)> = tr.times.iter().zip(&tr.points).step_by(a.stride.max(1)).map(|(t, p)| (*t, p.z)).collect();
    let mut plot = Plot::new("height along the geodesic", (0.0, a.time.max(a.step)), (zmin, zmax));
    plot.polyline(&zs, "black");
    let out = Output(a.common.out.as_deref());
    out.write("geodesic.csv", &tr.to_csv(&geom, a.stride))?;
    out.write("geodesic.svg", &plot.finish())
}

fn field(a: FieldArgs) -> Result<()> {
    let geom = geometry_of(&a.common)?;
    if a.common.selftest {
        return selftest("field", &geom);
    }
    let g: Vec<i64> = parse_list(&a.gamma, 2, "gamma")?;
    let spec = FieldSpec { x: a.x, y: range3(&a.y, "y")?, z: range3(&a.z, "z")? };
    let samples = spectrum::eigenfunction_field(&geom, [g[0], g[1]], a.level, &spec, a.trunc)?;
    let peak = samples.iter().map(|s| s.re.hypot(s.im)).fold(0.0, f64::max);
    println!("samples={}", samples.len());
    println!("max_abs={}", fmt12(peak));
    Output(a.common.out.as_deref()).write("field.csv", &spectrum::field_csv(&samples))
}
