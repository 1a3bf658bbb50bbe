use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tgeo_core::ensemble::{bohm_potential, free_gaussian_width, residuals, run_trajectory, stochastic_velocity};
use tgeo_core::equivalence::{
    equivalent_family, scalar_multiply, solve_equivalent_null, solve_equivalent_timelike, solve_skeleton_equivalence,
    ExistenceReport, MultiplyVersion, SolutionFamily, SolverConfig, SumOrder, TimelikeCase,
};
use tgeo_core::objects::{objects_equivalent, sample_tube_surface};
use tgeo_core::vector_algebra::{
    euclideaness_check, gram_matrix, is_antiparallel, is_collinear, is_equivalent, is_linearly_dependent, is_parallel,
    SampleConfig, Skeleton,
};
use tgeo_core::world_chain::{run_ensemble, simulate_chain};
use tgeo_core::{ChainConfig, EnsembleConfig, PairVector, Point, Scene, WorldFunctionSpec};

use crate::input::{
    from_json, num, opt_num, parse_point, parse_points, parse_spec, parse_vector, read_input, to_json, write_to,
    CliError, CliResult, Sink,
};

pub struct Globals {
    pub sink: Sink,
    pub seed: Option<u64>,
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct SigmaArgs {
    /// World function, `kind:n[:d]` or JSON
    #[arg(long, value_parser = parse_spec)]
    pub spec: WorldFunctionSpec,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub p: Point,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub q: Point,
}

pub fn sigma(a: SigmaArgs, g: &Globals) -> CliResult<()> {
    let v = a.spec.sigma(&a.p, &a.q)?;
    g.sink.write_text(&format!("{}\n", num(v)))
}

#[derive(Args, Debug)]
pub struct ProductArgs {
    #[arg(long, value_parser = parse_spec)]
    pub spec: WorldFunctionSpec,
    /// First vector as `origin;end`, e.g. `0,0;1,0`
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub v1: PairVector,
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub v2: PairVector,
}

pub fn product(a: ProductArgs, g: &Globals) -> CliResult<()> {
    let v = a.spec.scalar_product(&a.v1, &a.v2)?;
    g.sink.write_text(&format!("{}\n", num(v)))
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Relation {
    Equivalent,
    Parallel,
    Antiparallel,
    Collinear,
}

#[derive(Args, Debug)]
pub struct EquivArgs {
    #[arg(long, value_parser = parse_spec)]
    pub spec: WorldFunctionSpec,
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub v1: PairVector,
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub v2: PairVector,
    #[arg(long, value_enum, default_value = "equivalent")]
    pub relation: Relation,
}

pub fn equiv(a: EquivArgs, g: &Globals) -> CliResult<()> {
    let f = match a.relation {
        Relation::Equivalent => is_equivalent,
        Relation::Parallel => is_parallel,
        Relation::Antiparallel => is_antiparallel,
        Relation::Collinear => is_collinear,
    };
    let r = f(&a.spec, &a.v1, &a.v2, g.tol)?;
    g.sink.write_text(&format!("{r}\n"))
}

#[derive(Args, Debug)]
pub struct GramArgs {
    #[arg(long, value_parser = parse_spec)]
    pub spec: WorldFunctionSpec,
    /// Skeleton points separated by `;`
    #[arg(long, value_parser = parse_points, allow_hyphen_values = true)]
    pub points: std::vec::Vec<Point>,
}

pub fn gram(a: GramArgs, g: &Globals) -> CliResult<()> {
    let sk = Skeleton::new(a.points)?;
    let m = gram_matrix(&a.spec, &sk)?;
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    g.sink.write_json(&json!({
        "matrix": rows,
        "determinant": m.determinant(),
        "linearly_dependent": is_linearly_dependent(&a.spec, &sk, g.tol)?,
    }))
}

#[derive(Args, Debug)]
pub struct EuclidArgs {
    #[arg(long, value_parser = parse_spec)]
    pub spec: WorldFunctionSpec,
    /// Claimed dimension (defaults to the spec dimension)
    #[arg(long)]
    pub n_claim: Option<usize>,
    /// Sampling configuration (JSON file or inline)
    #[arg(long)]
    pub config: Option<String>,
}

pub fn euclid_check(a: EuclidArgs, g: &Globals) -> CliResult<()> {
    let mut cfg: SampleConfig = match &a.config {
        Some(src) => from_json(&read_input(src)?)?,
        None => SampleConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if a.config.is_none() {
        cfg.tol = g.tol;
    }
    let report = euclideaness_check(&a.spec, a.n_claim.unwrap_or(a.spec.n), &cfg);
    g.sink.write_json(&report)
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct SolveRequest {
    #[serde(default)]
    task: Option<String>,
    spec: WorldFunctionSpec,
    skeleton: Skeleton,
    q0: Point,
    #[serde(default)]
    config: Option<SolverConfig>,
}

#[derive(Serialize)]
struct FamilyOut<'a> {
    dof: usize,
    params: Value,
    representatives: Vec<Vec<Point>>,
    family: &'a SolutionFamily,
}

fn family_out(fam: &SolutionFamily, samples: usize) -> FamilyOut<'_> {
    FamilyOut {
        dof: fam.dof,
        params: serde_json::to_value(&fam.free_parameters).expect("serializable"),
        representatives: fam.sample_representatives(samples),
        family: fam,
    }
}

#[derive(Serialize)]
struct SolveResponse<'a> {
    families: Vec<FamilyOut<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    existence: Option<ExistenceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<Value>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum CaseArg {
    #[value(name = "I")]
    One,
    #[value(name = "II")]
    Two,
    Null,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Numeric request `{"spec", "skeleton", "q0", "config"?}` (file, `-`, or inline JSON)
    #[arg(long, conflicts_with_all = ["case"])]
    pub input: Option<String>,
    /// Closed-form configuration instead of a numeric request
    #[arg(long, value_enum)]
    pub case: Option<CaseArg>,
    #[arg(long, value_parser = parse_spec, default_value = "distorted:4:0.01")]
    pub spec: WorldFunctionSpec,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub b: f64,
    /// Transverse direction for the reported point `Q1`
    #[arg(long, value_parser = crate::input::parse_coords, default_value = "1,0,0", allow_hyphen_values = true)]
    pub q: std::vec::Vec<f64>,
    /// Representatives to sample per family
    #[arg(long, default_value_t = 8)]
    pub samples: usize,
}

pub fn solve(a: SolveArgs, g: &Globals) -> CliResult<()> {
    if let Some(src) = &a.input {
        let req: SolveRequest = from_json(&read_input(src)?)?;
        if let Some(t) = &req.task {
            if t != "solve" {
                return Err(CliError::Usage(format!("unsupported task {t:?}")));
            }
        }
        let cfg = req.config.unwrap_or_default();
        let (fam, report) = solve_skeleton_equivalence(&req.spec, &req.skeleton, &req.q0, &cfg)?;
        let resp = SolveResponse {
            families: vec![family_out(&fam, a.samples)],
            existence: Some(report),
            closed_form: None,
        };
        return g.sink.write_json(&resp);
    }
    let case = a
        .case
        .ok_or_else(|| CliError::Usage("solve needs --input or --case".into()))?;
    let q: [f64; 3] = a
        .q
        .as_slice()
        .try_into()
        .map_err(|_| CliError::Usage("--q needs 3 components".into()))?;
    let (fam, extra) = match case {
        CaseArg::Null => (solve_equivalent_null(&a.spec, a.s)?, None),
        CaseArg::One | CaseArg::Two => {
            let c = if matches!(case, CaseArg::One) { TimelikeCase::I } else { TimelikeCase::II };
            let sol = solve_equivalent_timelike(&a.spec, a.s, a.a, a.b, q, c)?;
            let mut v = serde_json::to_value(&sol).expect("serializable");
            v.as_object_mut().expect("object").remove("family");
            (sol.family, Some(v))
        }
    };
    let resp = SolveResponse {
        families: vec![family_out(&fam, a.samples)],
        existence: None,
        closed_form: extra,
    };
    g.sink.write_json(&resp)
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum OrderArg {
    #[value(name = "12")]
    Forward,
    #[value(name = "21")]
    Backward,
}

#[derive(Args, Debug)]
pub struct SumArgs {
    #[arg(long, value_parser = parse_spec)]
    pub spec: WorldFunctionSpec,
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub v1: PairVector,
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub v2: PairVector,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub r0: Point,
    #[arg(long, value_enum, default_value = "12")]
    pub order: OrderArg,
    #[arg(long, default_value_t = 8)]
    pub samples: usize,
}

pub fn sum(a: SumArgs, g: &Globals) -> CliResult<()> {
    let order = match a.order {
        OrderArg::Forward => SumOrder::FirstSecond,
        OrderArg::Backward => SumOrder::SecondFirst,
    };
    let fam = tgeo_core::equivalence::vector_sum(&a.spec, &a.v1, &a.v2, &a.r0, order)?;
    g.sink.write_json(&json!({
        "families": [family_out(&fam, a.samples)],
        "order_dependent": fam.order_dependent,
    }))
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum VersionArg {
    A,
    B,
}

#[derive(Args, Debug)]
pub struct ScaleArgs {
    #[arg(long, value_parser = parse_spec)]
    pub spec: WorldFunctionSpec,
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub v: PairVector,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub p0: Point,
    #[arg(long, value_enum, default_value = "a")]
    pub version: VersionArg,
    #[arg(long, default_value_t = 8)]
    pub samples: usize,
}

pub fn scale(a: ScaleArgs, g: &Globals) -> CliResult<()> {
    let version = match a.version {
        VersionArg::A => MultiplyVersion::A,
        VersionArg::B => MultiplyVersion::B,
    };
    let fam = if a.alpha == 1.0 && matches!(version, MultiplyVersion::A) {
        equivalent_family(&a.spec, &a.v, &a.p0)?
    } else {
        scalar_multiply(&a.spec, &a.v, a.alpha, &a.p0, version)?
    };
    g.sink.write_json(&json!({ "families": [family_out(&fam, a.samples)] }))
}

#[derive(Args, Debug)]
pub struct ObjectArgs {
    /// Scene JSON `{"spec", "points", "objects"}` (file, `-`, or inline)
    #[arg(long)]
    pub scene: String,
    /// Object name or index
    #[arg(long, default_value = "0")]
    pub object: String,
    /// Evaluate the envelope at these points (`;`-separated)
    #[arg(long, value_parser = parse_points, allow_hyphen_values = true)]
    pub at: Option<std::vec::Vec<Point>>,
    /// Compare with another object of the scene
    #[arg(long)]
    pub compare: Option<String>,
}

fn pick(scene: &Scene, key: &str) -> CliResult<tgeo_core::ElementaryObject> {
    let r = match key.parse::<usize>() {
        Ok(i) => scene.object(i),
        Err(_) => scene.object_by_name(key),
    };
    Ok(r?)
}

pub fn object(a: ObjectArgs, g: &Globals) -> CliResult<()> {
    let scene = Scene::from_json(&read_input(&a.scene)?)?;
    let obj = pick(&scene, &a.object)?;
    let mut out = json!({ "object": obj });
    if let Some(pts) = &a.at {
        let mut evals = Vec::new();
        for p in pts {
            let v = obj.envelope_value(p);
            evals.push(json!({
                "point": p,
                "envelope": v.as_ref().ok(),
                "contains": obj.contains(p, g.tol),
                "error": v.err().map(|e| e.to_string()),
            }));
        }
        out["evaluations"] = Value::Array(evals);
    }
    if let Some(other) = &a.compare {
        let b = pick(&scene, other)?;
        out["relation"] = serde_json::to_value(objects_equivalent(&obj, &b, g.tol)?).expect("serializable");
    }
    g.sink.write_json(&out)
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct TubeArgs {
    #[arg(long)]
    pub mu: f64,
    #[arg(long)]
    pub lambda0: f64,
    #[arg(long, default_value_t = 64)]
    pub nt: usize,
    #[arg(long, default_value_t = 64)]
    pub nphi: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

pub fn tube(a: TubeArgs, g: &Globals) -> CliResult<()> {
    let spec = WorldFunctionSpec::distorted_lambda(a.lambda0).validated()?;
    let t = sample_tube_surface(&spec, a.mu, a.nt, a.nphi)?;
    if a.format == Format::Json {
        return g.sink.write_json(&t);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["ct", "x1", "x2", "x3", "r", "envelope_residual"])?;
    for p in &t.points {
        w.write_record([
            num(p.ct),
            num(p.x[0]),
            num(p.x[1]),
            num(p.x[2]),
            num(p.r),
            opt_num(p.envelope_residual),
        ])?;
    }
    g.sink.write_text(&csv_text(w)?)
}

fn csv_text(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Args, Debug)]
pub struct ChainArgs {
    /// Chain configuration JSON (a statistics document is accepted too);
    /// flags override its fields
    #[arg(long)]
    pub config: Option<String>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub b_coeff: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Write the points of one chain as CSV here (`-` for standard output)
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Which chain to export
    #[arg(long, default_value_t = 0)]
    pub chain_index: usize,
}

pub fn chain(a: ChainArgs, g: &Globals) -> CliResult<()> {
    let mut cfg: ChainConfig = match &a.config {
        Some(src) => {
            let v: Value = from_json(&read_input(src)?)?;
            let inner = v.get("config").cloned().unwrap_or(v);
            serde_json::from_value(inner).map_err(|e| CliError::Usage(format!("invalid chain config: {e}")))?
        }
        None => {
            let (Some(mu), Some(lambda0)) = (a.mu, a.lambda0) else {
                return Err(CliError::Usage("chain needs --mu and --lambda0 (or --config)".into()));
            };
            from_json(&json!({ "mu": mu, "lambda0": lambda0 }).to_string())?
        }
    };
    if let Some(x) = a.mu {
        cfg.mu = x;
    }
    if let Some(x) = a.lambda0 {
        cfg.lambda0 = x;
    }
    if let Some(x) = a.steps {
        cfg.n_steps = x;
    }
    if let Some(x) = a.chains {
        cfg.n_chains = x;
    }
    if let Some(x) = a.b_coeff {
        cfg.b_coeff = x;
    }
    if let Some(x) = a.c {
        cfg.c = x;
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    let stats = run_ensemble(&cfg)?;
    if let Some(path) = &a.csv {
        if a.chain_index >= cfg.n_chains {
            return Err(CliError::Usage(format!("--chain-index must be < {}", cfg.n_chains)));
        }
        let st = simulate_chain(&cfg, a.chain_index)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["step", "ct", "x1", "x2", "x3", "cosh_theta_M"])?;
        let links = st.links();
        for (k, p) in st.points.iter().enumerate() {
            // angle between the links meeting at this point
            let cosh = if k >= 1 && k < links.len() {
                let (u, v) = (links[k - 1].components(), links[k].components());
                let d = tgeo_core::lorentz::minkowski_dot;
                num(d(&u, &v) / (d(&u, &u) * d(&v, &v)).sqrt())
            } else {
                String::new()
            };
            let c = p.coords();
            w.write_record([k.to_string(), num(c[0]), num(c[1]), num(c[2]), num(c[3]), cosh])?;
        }
        let text = csv_text(w)?;
        let target = (path.as_os_str() != "-").then_some(path.as_path());
        write_to(target, &text)?;
    }
    g.sink.write_json(&stats)
}

#[derive(Args, Debug)]
pub struct EnsembleArgs {
    /// Initial value problem JSON; flags override its fields
    #[arg(long)]
    pub config: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub dx: Option<f64>,
    #[arg(long)]
    pub s0: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub every: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

pub fn ensemble(a: EnsembleArgs, g: &Globals) -> CliResult<()> {
    let mut cfg: EnsembleConfig = match &a.config {
        Some(src) => {
            let v: Value = from_json(&read_input(src)?)?;
            let inner = v.get("config").cloned().unwrap_or(v);
            serde_json::from_value(inner).map_err(|e| CliError::Usage(format!("invalid ensemble config: {e}")))?
        }
        None => EnsembleConfig::default(),
    };
    macro_rules! over {
        ($($f:ident => $g:ident),*) => { $( if let Some(x) = a.$f { cfg.$g = x; } )* };
    }
    over!(x_min => x_min, x_max => x_max, dx => dx, s0 => s0, hbar => hbar, m => m, t_end => t_end, every => output_every);
    if a.dt.is_some() {
        cfg.dt = a.dt;
    }
    let traj = run_trajectory(&cfg)?;
    let last = traj.last().expect("trajectory holds the initial state");
    if a.format == Format::Json {
        let res = if traj.len() >= 3 { Some(residuals(&traj)?) } else { None };
        return g.sink.write_json(&json!({
            "config": cfg,
            "states": traj.len(),
            "t": last.t,
            "mass": last.mass(),
            "width": last.width(),
            "free_width": free_gaussian_width(cfg.s0, cfg.hbar, cfg.m, last.t),
            "residuals": res,
        }));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "x", "rho", "v", "u", "U_B"])?;
    for st in &traj {
        let u = stochastic_velocity(st).values;
        let ub = bohm_potential(st).values;
        for (i, x) in st.grid.xs().iter().enumerate() {
            w.write_record([num(st.t), num(*x), num(st.rho[i]), num(st.v[i]), num(u[i]), num(ub[i])])?;
        }
    }
    g.sink.write_text(&csv_text(w)?)
}

#[allow(dead_code)]
pub fn pretty<T: Serialize>(v: &T) -> String {
    to_json(v)
}
