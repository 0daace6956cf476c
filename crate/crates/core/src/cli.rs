//! Batch front end: a JSON run configuration selects one subcommand, whose
//! built-in verdicts decide the exit status. Reports are JSON with sorted
//! keys, tables are CSV.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cr_operators::{
    assemble_disk_maslov, assemble_sphere_ek, assemble_torus_dbar, kernel_cokernel_dims, sphere_bundle_kernel, sphere_weight, RankReport,
    TorusPotential, MIN_GAP, RANK_TOL,
};
use crate::error::{Error, Result};
use crate::flows::{
    flow_with_jacobian, gray_isotopy, moser_isotopy, reeb_field, reeb_orbit_class, symplecticity_residual, torus_grid, upward_crossing_time,
    ContactFormT3, ContactInterpolation, FnTwoForm, GrayOptions, HamiltonianField, MoserOptions, OrbitClass, PhaseShiftedContact,
    PulledBackContact, ScalarHamiltonian, TimeDependentOneForm,
};
use crate::holomorphic_solver::{
    cr_residual, energy, local_jet_solve, newton_solve, node_rows, tangent_prescription, BallTarget, CayleyPathJ, Collocation,
    DiscreteSphereMap, EnergyOptions, JetData, MarkedPoint, NewtonOptions, ProductForm, TargetPoint, NODE_HEADER,
};
use crate::moduli_calc::{curve_index, teichmueller_dimension, torus_isotropy_order, torus_modulus_reduce, CurveTopology, MoebiusMap};
use crate::nonsqueezing::{
    boundary_flux_crosscheck, bubble_rescale, continuation_find_sphere, energy_quantization_check, hofer_select, monotonicity_profile,
    product_transversality_check, AnalyticCurve, BubbleReport, FiniteMetricSample, HomotopyJ, ProductTarget, Quantization, SampleGrid,
};
use crate::symplectic_linear::{standard_j, AlmostComplexField, BilinearForm};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    RrVerify,
    CrSolve,
    Flow,
    Moser,
    Gray,
    Reeb,
    Moduli,
    Jet,
    Nonsqueeze,
    Monotonicity,
    Hofer,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::RrVerify => "rr-verify",
            Subcommand::CrSolve => "cr-solve",
            Subcommand::Flow => "flow",
            Subcommand::Moser => "moser",
            Subcommand::Gray => "gray",
            Subcommand::Reeb => "reeb",
            Subcommand::Moduli => "moduli",
            Subcommand::Jet => "jet",
            Subcommand::Nonsqueeze => "nonsqueeze",
            Subcommand::Monotonicity => "monotonicity",
            Subcommand::Hofer => "hofer",
        }
    }
}

/// A run configuration. `params` is checked against the parameter struct of
/// the chosen subcommand; missing fields take their defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: Value,
}

impl RunConfig {
    pub fn new(subcommand: Subcommand) -> Self {
        Self { subcommand, seed: 0, out: None, params: Value::Null }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::Config("empty configuration".into()));
        }
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses and validates the parameters without running anything.
    pub fn validate(&self) -> Result<()> {
        match self.subcommand {
            Subcommand::RrVerify => parse::<RrParams>(&self.params).map(drop),
            Subcommand::CrSolve => parse::<CrSolveParams>(&self.params).map(drop),
            Subcommand::Flow => parse::<FlowParams>(&self.params).map(drop),
            Subcommand::Moser => parse::<MoserParams>(&self.params).map(drop),
            Subcommand::Gray => parse::<GrayParams>(&self.params).map(drop),
            Subcommand::Reeb => parse::<ReebParams>(&self.params).map(drop),
            Subcommand::Moduli => parse::<ModuliParams>(&self.params).map(drop),
            Subcommand::Jet => parse::<JetParams>(&self.params).map(drop),
            Subcommand::Nonsqueeze => parse::<NonsqueezeParams>(&self.params).map(drop),
            Subcommand::Monotonicity => parse::<MonotonicityParams>(&self.params).map(drop),
            Subcommand::Hofer => parse::<HoferParams>(&self.params).map(drop),
        }
    }
}

fn parse<T: DeserializeOwned + Default>(v: &Value) -> Result<T> {
    match v {
        Value::Null => Ok(T::default()),
        v => serde_json::from_value(v.clone()).map_err(|e| Error::Config(e.to_string())),
    }
}

/// A rectangular numeric table, written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub subcommand: String,
    pub seed: u64,
    pub inputs: Value,
    pub outputs: BTreeMap<String, Value>,
    pub verdicts: BTreeMap<String, bool>,
    /// File names of the emitted tables.
    pub tables: Vec<String>,
    pub wall_time_seconds: f64,
    #[serde(skip)]
    pub table_data: Vec<Table>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|v| *v)
    }

    /// The report without its wall time, as serialized for comparison.
    pub fn determinism_payload(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Value::Object(m) = &mut v {
            m.remove("wall_time_seconds");
        }
        Ok(serde_json::to_string(&v)?)
    }
}

/// Collects outputs, verdicts and tables while a subcommand runs.
#[derive(Default)]
struct Recorder {
    outputs: BTreeMap<String, Value>,
    verdicts: BTreeMap<String, bool>,
    tables: Vec<Table>,
}

impl Recorder {
    fn out(&mut self, key: &str, v: impl Serialize) -> Result<()> {
        self.outputs.insert(key.into(), serde_json::to_value(v)?);
        Ok(())
    }

    fn verdict(&mut self, name: &str, ok: bool) {
        let e = self.verdicts.entry(name.into()).or_insert(true);
        *e &= ok;
    }
}

/// Runs exactly one subcommand.
pub fn dispatch(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let mut rec = Recorder::default();
    let seed = config.seed;
    let inputs = match config.subcommand {
        Subcommand::RrVerify => run_rr(parse(&config.params)?, &mut rec)?,
        Subcommand::CrSolve => run_cr_solve(parse(&config.params)?, &mut rec)?,
        Subcommand::Flow => run_flow(parse(&config.params)?, &mut rec)?,
        Subcommand::Moser => run_moser(parse(&config.params)?, &mut rec)?,
        Subcommand::Gray => run_gray(parse(&config.params)?, &mut rec)?,
        Subcommand::Reeb => run_reeb(parse(&config.params)?, &mut rec)?,
        Subcommand::Moduli => run_moduli(parse(&config.params)?, &mut rec)?,
        Subcommand::Jet => run_jet(parse(&config.params)?, &mut rec)?,
        Subcommand::Nonsqueeze => run_nonsqueeze(parse(&config.params)?, seed, &mut rec)?,
        Subcommand::Monotonicity => run_monotonicity(parse(&config.params)?, &mut rec)?,
        Subcommand::Hofer => run_hofer(parse(&config.params)?, seed, &mut rec)?,
    };
    Ok(RunReport {
        subcommand: config.subcommand.name().into(),
        seed,
        inputs,
        outputs: rec.outputs,
        verdicts: rec.verdicts,
        tables: rec.tables.iter().map(|t| format!("{}.csv", t.name)).collect(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        table_data: rec.tables,
    })
}

/// RFC 4180 CSV with a header row, 17 significant digits and LF line endings.
pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    if let Some(r) = table.rows.iter().find(|r| r.len() != table.header.len()) {
        return Err(Error::Dimension(format!("table {} has a row of length {} under {} columns", table.name, r.len(), table.header.len())));
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|x| format!("{x:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with keys in sorted order.
pub fn emit_json_report(report: &RunReport, path: &Path) -> Result<()> {
    let v = serde_json::to_value(report)?;
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes `report.json` and one CSV per table into `dir`.
pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for t in &report.table_data {
        emit_csv(t, &dir.join(format!("{}.csv", t.name)))?;
    }
    emit_json_report(report, &dir.join("report.json"))
}

#[derive(Debug, Parser)]
#[command(name = "holocurves", about = "Run one experiment from a JSON configuration")]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for report.json and CSV tables.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Exit status for configuration and usage errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit status when a verdict fails or a computation errors.
pub const EXIT_FAILURE: i32 = 1;

/// Entry point of the binary; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return EXIT_USAGE;
        }
    };
    let mut config = match RunConfig::from_json(&text).and_then(|c| c.validate().map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("usage error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    let out = cli.out.or_else(|| config.out.clone());
    let report = match dispatch(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    };
    let written = match &out {
        Some(dir) => write_outputs(&report, dir),
        None => serde_json::to_value(&report).and_then(|v| serde_json::to_string_pretty(&v)).map(|s| println!("{s}")).map_err(Error::from),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_FAILURE;
    }
    for (name, ok) in &report.verdicts {
        eprintln!("{} {name}", if *ok { "pass" } else { "FAIL" });
    }
    if report.passed() {
        0
    } else {
        EXIT_FAILURE
    }
}

fn rank_row(label: i64, r: &RankReport) -> Vec<f64> {
    let ind = r.dim_ker as i64 - r.dim_coker as i64;
    vec![label as f64, r.dim_ker as f64, r.dim_coker as f64, ind as f64, r.gap]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RrParams {
    k_range: [i64; 2],
    mu_range: [i64; 2],
    disk_truncation: usize,
    torus_truncation: usize,
    tau: f64,
}

impl Default for RrParams {
    fn default() -> Self {
        Self { k_range: [-3, 5], mu_range: [-3, 5], disk_truncation: 10, torus_truncation: 8, tau: RANK_TOL }
    }
}

fn run_rr(p: RrParams, rec: &mut Recorder) -> Result<Value> {
    let mut sphere = Table::new("sphere", &["k", "ker", "coker", "ind", "gap"]);
    for k in p.k_range[0]..=p.k_range[1] {
        let r = kernel_cokernel_dims(&assemble_sphere_ek(k, sphere_weight(k))?, p.tau);
        let exact = sphere_bundle_kernel(k);
        rec.verdict("sphere_index_is_2_plus_2k", r.index == 2 + 2 * k && r.dim_ker as i64 - r.dim_coker as i64 == 2 + 2 * k);
        rec.verdict("sphere_kernel_matches_holomorphic_sections", (r.dim_ker, r.dim_coker) == (exact.dim_ker, exact.dim_coker));
        rec.verdict("spectral_gap", r.gap >= MIN_GAP);
        sphere.rows.push(rank_row(k, &r));
    }
    let mut disk = Table::new("disk", &["mu", "ker", "coker", "ind", "gap"]);
    for mu in p.mu_range[0]..=p.mu_range[1] {
        let r = kernel_cokernel_dims(&assemble_disk_maslov(mu, p.disk_truncation)?, p.tau);
        let ind = r.dim_ker as i64 - r.dim_coker as i64;
        rec.verdict("disk_index_is_1_plus_mu", ind == 1 + mu);
        rec.verdict("disk_kernel_is_max_0_1_plus_mu", r.dim_ker as i64 == (1 + mu).max(0));
        rec.verdict("spectral_gap", r.gap >= MIN_GAP);
        disk.rows.push(rank_row(mu, &r));
    }
    let torus = kernel_cokernel_dims(&assemble_torus_dbar(p.torus_truncation, 1, &TorusPotential::zero(1))?, p.tau);
    rec.verdict("torus_kernel_cokernel_2_2", (torus.dim_ker, torus.dim_coker) == (2, 2) && torus.dim_ker as i64 - torus.dim_coker as i64 == 0);
    rec.verdict("spectral_gap", torus.gap >= MIN_GAP);
    rec.out("torus", &torus)?;
    rec.tables.push(sphere);
    rec.tables.push(disk);
    Ok(serde_json::to_value(&p)?)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointSpec {
    chart: u8,
    w: C,
    x: C,
}

impl PointSpec {
    fn point(&self) -> Result<TargetPoint> {
        if self.chart != 1 && self.chart != 2 {
            return Err(Error::Config(format!("target chart must be 1 or 2, got {}", self.chart)));
        }
        Ok(TargetPoint::new(self.chart, self.w, self.x))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CrSolveParams {
    amplitude: f64,
    t: f64,
    truncation: usize,
    /// Torus component of the initial product curve.
    m: C,
    /// Without a marked point the torus translations are a kernel direction
    /// and Newton reports a rank-deficient linearization.
    marked: Option<PointSpec>,
    hbar: f64,
    tol: f64,
    max_iter: usize,
}

impl Default for CrSolveParams {
    fn default() -> Self {
        Self { amplitude: 0.1, t: 1.0, truncation: 12, m: C::new(0.5, 0.5), marked: Some(PointSpec { chart: 1, w: C::new(0.3, -0.2), x: C::new(0.5, 0.5) }), hbar: 1.0, tol: 1e-8, max_iter: 50 }
    }
}

fn run_cr_solve(p: CrSolveParams, rec: &mut Recorder) -> Result<Value> {
    let j = CayleyPathJ::new(p.amplitude, p.t);
    let initial = DiscreteSphereMap::product(p.truncation, p.m)?;
    let marked = p.marked.map(|s| s.point()).transpose()?.map(|target| MarkedPoint { guess: target.in_chart(1).ok().map(|q| q.w), target });
    let opts = NewtonOptions { tol: p.tol, max_iter: p.max_iter, ..Default::default() };
    let sol = newton_solve(&initial, &j, marked.as_ref(), &opts)?;
    let colloc = Collocation::new(&sol.map);
    let residual = cr_residual(&sol.map, &j, &colloc)?.sup;
    let form = ProductForm::new(p.hbar)?;
    let e = energy(&sol.map, &form, Some(&j), &EnergyOptions::default())?;
    rec.verdict("residual_below_tolerance", residual < p.tol);
    rec.verdict("energy_is_positive_multiple_of_hbar", matches!(energy_quantization_check(e.energy, p.hbar, 1e-10), Quantization::Multiple { .. }));
    rec.verdict("tamed_along_curve", e.taming_warnings.is_empty() && e.min_density >= 0.0);
    rec.out("newton", &sol.report)?;
    rec.out("residual", residual)?;
    rec.out("energy", e.energy)?;
    rec.out("min_density", e.min_density)?;
    rec.out("marked", sol.marked)?;
    rec.out("chart_compatibility", sol.map.chart_compatibility(64)?)?;
    let mut nodes = Table::new("nodes", &NODE_HEADER);
    nodes.rows = node_rows(&sol.map, &colloc)?;
    rec.tables.push(nodes);
    Ok(serde_json::to_value(&p)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FlowParams {
    /// Symmetric matrix `S` of `H = ½ xᵀSx`; absent means the harmonic oscillator in `R²`.
    quadratic: Option<Vec<Vec<f64>>>,
    initial: Vec<f64>,
    duration: f64,
    step: f64,
    /// Coarse step for the convergence-order check (halved once).
    order_check_step: f64,
    tol: f64,
    /// Every `record_every`-th sample goes into the trajectory table.
    record_every: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self { quadratic: None, initial: vec![1.0, 0.0], duration: 10.0, step: 1e-3, order_check_step: 0.1, tol: 1e-8, record_every: 1 }
    }
}

fn run_flow(p: FlowParams, rec: &mut Recorder) -> Result<Value> {
    let dim = p.initial.len();
    let oscillator = p.quadratic.is_none();
    let ham = match &p.quadratic {
        None => ScalarHamiltonian::harmonic_oscillator(dim),
        Some(rows) => ScalarHamiltonian::quadratic(crate::symplectic_linear::matrix_from_rows(rows)?, DVector::zeros(dim)),
    };
    if ham.dim() != dim {
        return Err(Error::Config("initial point and Hamiltonian differ in dimension".into()));
    }
    let omega = BilinearForm::standard(dim)?;
    let field = HamiltonianField::new(&ham, &omega)?;
    let p0 = DVector::from_vec(p.initial.clone());
    let r = flow_with_jacobian(&field, &p0, p.duration, p.step)?;
    let residual = symplecticity_residual(&r, &omega);
    let h0 = ham.value(&p0);
    let drift = r.samples.iter().map(|s| (ham.value(&s.point_vector()) - h0).abs()).fold(0.0, f64::max);
    let coarse = symplecticity_residual(&flow_with_jacobian(&field, &p0, p.duration, p.order_check_step)?, &omega);
    let fine = symplecticity_residual(&flow_with_jacobian(&field, &p0, p.duration, 0.5 * p.order_check_step)?, &omega);
    rec.verdict("symplecticity", residual < p.tol);
    rec.verdict("energy_conservation", drift < p.tol);
    rec.verdict("fourth_order_halving", coarse / fine >= 12.0);
    if oscillator {
        let period = upward_crossing_time(&r, 1);
        rec.verdict("period_is_2pi", period.is_some_and(|t| (t - 2.0 * PI).abs() < 1e-6));
        rec.out("period", period)?;
    }
    rec.out("symplecticity_residual", residual)?;
    rec.out("energy_drift", drift)?;
    rec.out("halving_ratio", coarse / fine)?;
    rec.out("truncated", r.truncated)?;
    let mut header = vec!["t".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    let mut table = Table { name: "trajectory".into(), header, rows: Vec::new() };
    for s in r.samples.iter().step_by(p.record_every.max(1)) {
        let mut row = vec![s.t];
        row.extend(&s.point);
        table.rows.push(row);
    }
    rec.tables.push(table);
    Ok(serde_json::to_value(&p)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MoserParams {
    /// `ω = (1 + a x² + b xy + c y²) dx∧dy` with `[a, b, c]`.
    density: [f64; 3],
    radius: f64,
    /// Sample points lie on rings up to this radius.
    sample_radius: f64,
    rings: usize,
    per_ring: usize,
    steps: usize,
    tol: f64,
}

impl Default for MoserParams {
    fn default() -> Self {
        Self { density: [1.0, 0.0, 1.0], radius: 0.2, sample_radius: 0.1, rings: 3, per_ring: 8, steps: 40, tol: 1e-6 }
    }
}

fn run_moser(p: MoserParams, rec: &mut Recorder) -> Result<Value> {
    let [a, b, c] = p.density;
    let omega = FnTwoForm::area_density(move |x, y| 1.0 + a * x * x + b * x * y + c * y * y);
    let mut pts = vec![DVector::zeros(2)];
    for ring in 1..=p.rings {
        let rho = p.sample_radius * ring as f64 / p.rings as f64;
        for k in 0..p.per_ring {
            let th = 2.0 * PI * k as f64 / p.per_ring as f64 + 0.1 * ring as f64;
            pts.push(DVector::from_vec(vec![rho * th.cos(), rho * th.sin()]));
        }
    }
    let r = moser_isotopy(&omega, None, &pts, &MoserOptions { radius: p.radius, steps: p.steps, ..Default::default() })?;
    rec.verdict("pullback_equals_standard_form", r.max_residual < p.tol);
    rec.verdict("nondegenerate_along_path", r.pfaffian_margin > 0.0);
    rec.out("max_residual", r.max_residual)?;
    rec.out("pfaffian_margin", r.pfaffian_margin)?;
    rec.out("samples", pts.len())?;
    let mut table = Table::new("moser", &["x", "y", "phi_x", "phi_y", "residual"]);
    for s in &r.samples {
        table.rows.push(vec![s.x[0], s.x[1], s.phi[0], s.phi[1], s.residual]);
    }
    rec.tables.push(table);
    Ok(serde_json::to_value(&p)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum GrayFamily {
    /// `α_t = ψ_t* α_N` for a shear `ψ_t`.
    PulledBack,
    /// Linear interpolation from `α_N` to its phase-rotated copy.
    PhaseInterpolation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GrayParams {
    families: Vec<GrayFamily>,
    n: u32,
    amplitude: f64,
    /// Phase shift of the end form, in radians; below π the path stays contact.
    phase: f64,
    grid: usize,
    steps: usize,
    times: Vec<f64>,
    tol: f64,
}

impl Default for GrayParams {
    fn default() -> Self {
        Self {
            families: vec![GrayFamily::PulledBack, GrayFamily::PhaseInterpolation],
            n: 2,
            amplitude: 0.05,
            phase: 1.0,
            grid: 8,
            steps: 32,
            times: vec![0.25, 0.5, 1.0],
            tol: 1e-6,
        }
    }
}

fn run_gray(p: GrayParams, rec: &mut Recorder) -> Result<Value> {
    let alpha = ContactFormT3::new(p.n)?;
    let points = torus_grid(p.grid);
    let opts = GrayOptions { steps: p.steps, record_times: p.times.clone() };
    let mut table = Table::new("gray", &["family", "t", "theta", "phi", "eta", "log_f", "wedge_residual"]);
    let mut summary = BTreeMap::new();
    for (idx, fam) in p.families.iter().enumerate() {
        let pulled;
        let interp;
        let family: &dyn TimeDependentOneForm = match fam {
            GrayFamily::PulledBack => {
                pulled = PulledBackContact { form: alpha, amplitude: p.amplitude };
                &pulled
            }
            GrayFamily::PhaseInterpolation => {
                interp = ContactInterpolation { start: alpha, end: PhaseShiftedContact { n: p.n, phase: p.phase } };
                &interp
            }
        };
        let r = gray_isotopy(family, &points, &opts)?;
        let name = serde_json::to_value(fam)?.as_str().unwrap_or_default().to_string();
        rec.verdict("pullback_proportional_to_alpha0", r.max_wedge_residual < p.tol);
        summary.insert(name, serde_json::json!({"max_wedge_residual": r.max_wedge_residual, "max_pullback_residual": r.max_pullback_residual}));
        for s in &r.samples {
            table.rows.push(vec![idx as f64, s.t, s.phi[0], s.phi[1], s.phi[2], s.log_f, s.wedge_residual]);
        }
    }
    rec.out("families", summary)?;
    rec.out("points", points.len())?;
    rec.tables.push(table);
    Ok(serde_json::to_value(&p)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ReebParams {
    n_values: Vec<u32>,
    grid: usize,
    duration: f64,
    step: f64,
}

impl Default for ReebParams {
    fn default() -> Self {
        Self { n_values: vec![1, 2, 3], grid: 8, duration: 1.0, step: 0.1 }
    }
}

fn run_reeb(p: ReebParams, rec: &mut Recorder) -> Result<Value> {
    let mut table = Table::new("reeb", &["n", "theta", "phi", "eta", "closed", "class_theta", "class_phi", "class_eta", "period"]);
    let mut field_error: f64 = 0.0;
    let (mut closed, mut open, mut contractible) = (0usize, 0usize, 0usize);
    for &n in &p.n_values {
        let alpha = ContactFormT3::new(n)?;
        for x in torus_grid(p.grid) {
            // α_N(R) = 1 and dα_N(R, ·) = 0 force R = (cos 2πNη, sin 2πNη, 0).
            let k = 2.0 * PI * n as f64 * x[2];
            let exact = Vector3::new(k.cos(), k.sin(), 0.0);
            field_error = field_error.max((reeb_field(&alpha, &x)? - exact).norm());
            let o = reeb_orbit_class(&alpha, &x, p.duration, p.step)?;
            let row = match o.class {
                OrbitClass::Closed { class, period, .. } => {
                    closed += 1;
                    if class == [0, 0, 0] {
                        contractible += 1;
                    }
                    [1.0, class[0] as f64, class[1] as f64, class[2] as f64, period]
                }
                OrbitClass::NonClosed { .. } => {
                    open += 1;
                    [0.0, f64::NAN, f64::NAN, f64::NAN, f64::NAN]
                }
            };
            let mut r = vec![n as f64, x[0], x[1], x[2]];
            r.extend(row);
            table.rows.push(r);
        }
    }
    rec.verdict("reeb_field_matches_symbolic_solution", field_error < 1e-12);
    rec.verdict("no_contractible_closed_orbits", contractible == 0);
    rec.out("field_error", field_error)?;
    rec.out("closed", closed)?;
    rec.out("non_closed", open)?;
    rec.out("contractible", contractible)?;
    rec.tables.push(table);
    Ok(serde_json::to_value(&p)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModuliCase {
    g: u32,
    m: u32,
    n: u32,
    c1a: i64,
    #[serde(default)]
    expected_index: Option<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ModuliParams {
    curves: Vec<ModuliCase>,
    /// Torus moduli to reduce to the fundamental domain.
    lambdas: Vec<C>,
}

impl Default for ModuliParams {
    fn default() -> Self {
        Self { curves: vec![ModuliCase { g: 0, m: 1, n: 2, c1a: 2, expected_index: Some(4) }], lambdas: vec![] }
    }
}

fn run_moduli(p: ModuliParams, rec: &mut Recorder) -> Result<Value> {
    let mut table = Table::new("moduli", &["g", "m", "n", "c1a", "index", "dim_t", "dim_aut"]);
    for c in &p.curves {
        let ind = curve_index(&CurveTopology { g: c.g, m: c.m, n: c.n, c1a: c.c1a });
        let t = teichmueller_dimension(c.g, c.m);
        if let Some(e) = c.expected_index {
            rec.verdict("index_matches_expected", ind == e);
        }
        let chi = 2 - 2 * c.g as i64;
        rec.verdict("teichmueller_minus_automorphisms", t.dim_t - t.dim_aut == -(3 * chi - 2 * c.m as i64));
        table.rows.push(vec![c.g as f64, c.m as f64, c.n as f64, c.c1a as f64, ind as f64, t.dim_t as f64, t.dim_aut as f64]);
    }
    let mut reductions = Vec::new();
    for l in &p.lambdas {
        let r = torus_modulus_reduce(*l)?;
        let order = torus_isotropy_order(r.reduced)?;
        rec.verdict("reduced_in_fundamental_domain", crate::moduli_calc::in_fundamental_domain(r.reduced) && r.witness.det() == 1);
        reductions.push(serde_json::json!({"lambda": l, "reduced": r.reduced, "witness": [r.witness.a, r.witness.b, r.witness.c, r.witness.d], "isotropy_order": order}));
    }
    rec.out("torus_moduli", reductions)?;
    rec.tables.push(table);
    Ok(serde_json::to_value(&p)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct JetParams {
    /// Strength of a quadratic antilinear perturbation of `i` on `R⁴`.
    perturbation: f64,
    /// `jets[k][c]` is `∂_z^k u_c(0)`.
    jets: Vec<Vec<C>>,
    eps: f64,
    degree: usize,
    /// Optional point and tangent vector for a tangent prescription.
    tangent: Option<[Vec<f64>; 2]>,
    tol: f64,
}

impl Default for JetParams {
    fn default() -> Self {
        let z = C::new(0.0, 0.0);
        Self { perturbation: 1.0, jets: vec![vec![z, z], vec![C::new(1.0, 0.0), z]], eps: 0.3, degree: 14, tangent: None, tol: 1e-8 }
    }
}

/// `J = (1 + Y)i(1 + Y)⁻¹` with `Y` antilinear, of size `s|y|²`.
pub fn quadratic_ball_structure(s: f64) -> Result<BallTarget> {
    if s == 0.0 {
        return BallTarget::new(AlmostComplexField::new(4, |_| Ok(standard_j(4))));
    }
    BallTarget::new(AlmostComplexField::from_cayley(4, move |y: &DVector<f64>| {
        let r2 = y.norm_squared();
        let (a, b) = (s * (0.3 * r2 + 0.2 * y[0] * y[2]), s * (0.1 * y[1] * y[3] - 0.2 * r2));
        let mut m = DMatrix::zeros(4, 4);
        for (r, cc, w) in [(0, 0, 1.0), (0, 1, 0.5), (1, 0, -0.7), (1, 1, 0.3)] {
            m[(2 * r, 2 * cc)] = w * a;
            m[(2 * r, 2 * cc + 1)] = w * b;
            m[(2 * r + 1, 2 * cc)] = w * b;
            m[(2 * r + 1, 2 * cc + 1)] = -w * a;
        }
        m
    }))
}

fn run_jet(p: JetParams, rec: &mut Recorder) -> Result<Value> {
    let j = quadratic_ball_structure(p.perturbation)?;
    let jets = JetData::new(p.jets.clone())?;
    let s = local_jet_solve(&j, &jets, p.eps, p.degree)?;
    rec.verdict("residual_below_tolerance", s.residual < p.tol);
    rec.verdict("jets_reproduced", s.jet_defect < 1e-10);
    rec.out("residual", s.residual)?;
    rec.out("jet_defect", s.jet_defect)?;
    rec.out("newton", &s.report)?;
    let mut table = Table::new("jet_boundary", &["theta", "re_u0", "im_u0", "re_u1", "im_u1"]);
    for k in 0..64 {
        let th = 2.0 * PI * k as f64 / 64.0;
        let (u, _, _) = s.map.eval(C::from_polar(p.eps, th));
        table.rows.push(vec![th, u[0].re, u[0].im, u[1].re, u[1].im]);
    }
    rec.tables.push(table);
    if let Some([pt, x]) = &p.tangent {
        if pt.len() != 4 || x.len() != 4 {
            return Err(Error::Config("tangent point and vector must have four entries".into()));
        }
        let t = tangent_prescription(&j, &DVector::from_column_slice(pt), &DVector::from_column_slice(x), p.eps, p.degree)?;
        rec.verdict("tangent_point_hit", t.point_defect < 1e-12);
        rec.verdict("tangent_vector_hit", t.tangent_defect < 1e-6);
        rec.out("tangent", serde_json::json!({"point_defect": t.point_defect, "tangent_defect": t.tangent_defect, "residual": t.solution.residual}))?;
    }
    Ok(serde_json::to_value(&p)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct NonsqueezeParams {
    hbar: f64,
    amplitude: f64,
    steps: usize,
    truncation: usize,
    /// Explicit targets; when empty, `random_targets` points are drawn from the seed.
    targets: Vec<PointSpec>,
    random_targets: usize,
    transversality_truncations: Vec<usize>,
    m: C,
    tol: f64,
}

impl Default for NonsqueezeParams {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            amplitude: 0.1,
            steps: 10,
            truncation: 12,
            targets: vec![],
            random_targets: 1,
            transversality_truncations: vec![8, 12, 16],
            m: C::new(0.5, 0.5),
            tol: 1e-8,
        }
    }
}

/// A point of `S² × T²` drawn uniformly in the chart discs and torus square.
pub fn random_target(rng: &mut ChaCha8Rng) -> TargetPoint {
    TargetPoint::new(
        rng.gen_range(1..=2),
        C::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0 * PI)),
        C::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
    )
}

fn run_nonsqueeze(p: NonsqueezeParams, seed: u64, rec: &mut Recorder) -> Result<Value> {
    let target = ProductTarget::new(p.hbar)?;
    let mut trans = Vec::new();
    for &n in &p.transversality_truncations {
        let t = product_transversality_check(p.m, n)?;
        rec.verdict("product_kernel_dimension_8", t.kernel_dim == 8);
        rec.verdict("spectral_gap", t.full.gap >= MIN_GAP && t.reliable);
        trans.push(serde_json::json!({"truncation": n, "kernel_dim": t.kernel_dim, "gap": t.full.gap, "smallest_nonzero": t.smallest_nonzero}));
    }
    let product = crate::nonsqueezing::product_moduli_curve(p.m, Some(C::new(0.0, 0.0)), p.truncation)?;
    let e0 = energy(&product.map, &target.form, None, &EnergyOptions::default())?.energy;
    rec.verdict("energy_quantized", matches!(energy_quantization_check(e0, p.hbar, 1e-10), Quantization::Multiple { k: 1 }));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<TargetPoint> = if p.targets.is_empty() {
        (0..p.random_targets).map(|_| random_target(&mut rng)).collect()
    } else {
        p.targets.iter().map(|s| s.point()).collect::<Result<_>>()?
    };
    let h = HomotopyJ::cayley(p.amplitude);
    let opts = NewtonOptions { tol: p.tol, ..Default::default() };
    let mut runs = Vec::new();
    let mut table = Table::new("continuation", &["target", "t", "iterations", "residual", "energy"]);
    for (i, pt) in points.iter().enumerate() {
        match continuation_find_sphere(&h, &target, pt, p.steps, p.truncation, &opts) {
            Ok(r) => {
                rec.verdict("continuation_succeeds", true);
                rec.verdict("final_residual_below_tolerance", r.final_residual < p.tol);
                rec.verdict("marked_point_hits_target", r.ev_defect < p.tol);
                for s in &r.steps {
                    rec.verdict("energy_equals_hbar", (s.energy - p.hbar).abs() < 1e-6);
                    rec.verdict(
                        "energy_quantized",
                        matches!(energy_quantization_check(s.energy, p.hbar, 1e-10), Quantization::Multiple { k: 1 }),
                    );
                    let last = s.report.residual_history.last().copied().unwrap_or(f64::NAN);
                    table.rows.push(vec![i as f64, s.t, s.report.iterations as f64, last, s.energy]);
                }
                runs.push(serde_json::json!({
                    "target": pt,
                    "final_residual": r.final_residual,
                    "ev_defect": r.ev_defect,
                    "step_residuals": r.steps.iter().map(|s| s.report.residual_history.clone()).collect::<Vec<_>>(),
                    "energies": r.steps.iter().map(|s| s.energy).collect::<Vec<_>>(),
                }));
            }
            Err(e) => {
                rec.verdict("continuation_succeeds", false);
                runs.push(serde_json::json!({"target": pt, "error": e.to_string()}));
            }
        }
    }
    rec.out("transversality", trans)?;
    rec.out("product_energy", e0)?;
    rec.out("continuation", runs)?;
    rec.out("homotopy", h.descriptor())?;
    rec.tables.push(table);
    Ok(serde_json::to_value(&p)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MonotonicityParams {
    /// Polynomial coefficients of each component of `u: D → C^n`.
    components: Vec<Vec<C>>,
    domain_radius: f64,
    origin_preimage: C,
    r_min: f64,
    r_max: f64,
    r_count: usize,
    resolution: (usize, usize),
    flux: bool,
}

impl Default for MonotonicityParams {
    fn default() -> Self {
        let (z, o) = (C::new(0.0, 0.0), C::new(1.0, 0.0));
        Self {
            components: vec![vec![z, o], vec![z, o]],
            domain_radius: 1.5,
            origin_preimage: z,
            r_min: 0.02,
            r_max: 1.0,
            r_count: 50,
            resolution: (128, 6),
            flux: true,
        }
    }
}

fn run_monotonicity(p: MonotonicityParams, rec: &mut Recorder) -> Result<Value> {
    if p.r_count < 1 || !(p.r_min > 0.0 && p.r_max >= p.r_min) {
        return Err(Error::Config("need 0 < r_min ≤ r_max and at least one radius".into()));
    }
    let u = AnalyticCurve::new(p.components.clone(), p.domain_radius, p.origin_preimage)?;
    let radii: Vec<f64> = if p.r_count == 1 {
        vec![p.r_min]
    } else {
        (0..p.r_count).map(|k| p.r_min + (p.r_max - p.r_min) * k as f64 / (p.r_count - 1) as f64).collect()
    };
    let prof = monotonicity_profile(&u, &radii, p.resolution)?;
    rec.verdict("nondecreasing", prof.nondecreasing);
    rec.verdict("at_least_pi", prof.min_f >= PI - 1e-3);
    let mut table = Table::new("monotonicity", &["r", "F_area", "F_flux"]);
    let mut worst: f64 = 0.0;
    for (r, f) in radii.iter().zip(&prof.f) {
        let flux = if p.flux {
            let x = boundary_flux_crosscheck(&u, *r, p.resolution)?;
            if x.conclusive {
                worst = worst.max(x.difference);
                x.flux
            } else {
                f64::NAN
            }
        } else {
            f64::NAN
        };
        table.rows.push(vec![*r, *f, flux]);
    }
    if p.flux {
        rec.verdict("area_matches_boundary_flux", worst < 1e-3);
        rec.out("max_flux_difference", worst)?;
    }
    rec.out("min_f", prof.min_f)?;
    rec.tables.push(table);
    Ok(serde_json::to_value(&p)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct HoferParams {
    /// Random instances drawn from the seed.
    instances: usize,
    min_points: usize,
    max_points: usize,
    /// Degenerating Möbius family `z ↦ kz` for the rescaling check.
    bubble_scales: Vec<f64>,
    grid: usize,
    hbar: f64,
}

impl Default for HoferParams {
    fn default() -> Self {
        Self { instances: 100, min_points: 5, max_points: 60, bubble_scales: vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0], grid: 41, hbar: 1.0 }
    }
}

fn run_hofer(p: HoferParams, seed: u64, rec: &mut Recorder) -> Result<Value> {
    if p.min_points == 0 || p.max_points < p.min_points {
        return Err(Error::Config("need 1 ≤ min_points ≤ max_points".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new("hofer", &["instance", "points", "x0", "eps0", "x", "eps", "steps"]);
    let mut failures = 0usize;
    for i in 0..p.instances {
        let n = rng.gen_range(p.min_points..=p.max_points);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0f64..1.0).powi(4) * 100.0).collect();
        let s = FiniteMetricSample::from_points(&pts, g)?;
        let x0 = rng.gen_range(0..n);
        let eps0 = rng.gen_range(0.05..1.5);
        let h = hofer_select(&s, x0, eps0)?;
        if !h.verified() {
            failures += 1;
        }
        table.rows.push(vec![i as f64, n as f64, x0 as f64, eps0, h.x as f64, h.eps, (h.trail.len() - 1) as f64]);
    }
    rec.verdict("hofer_conditions_hold", failures == 0);
    rec.out("failures", failures)?;
    rec.tables.push(table);
    if !p.bubble_scales.is_empty() {
        let family = p
            .bubble_scales
            .iter()
            .map(|k| MoebiusMap::new(C::new(*k, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)))
            .collect::<Result<Vec<_>>>()?;
        let grid = SampleGrid { centre: C::new(0.0, 0.0), half_width: 1.0, n: p.grid };
        let report = bubble_rescale(&family, &grid, C::new(0.0, 0.0), p.hbar)?;
        if let BubbleReport::Bubble { members, total_energy } = &report {
            rec.verdict("rescaled_gradient_bounded", members.iter().all(|m| m.sup_gradient <= 2.0 + 1e-6 && (m.normalization - 1.0).abs() < 1e-6));
            rec.verdict("window_energy_bounded", members.iter().all(|m| m.window_energy <= *total_energy));
        }
        rec.out("bubble", &report)?;
    }
    Ok(serde_json::to_value(&p)?)
}
