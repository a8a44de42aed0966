use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use polarwave::gauge::{classify_mode, field_strength_mode, lorenz_residual, radiation_fix, CVec4, FourierMode};
use polarwave::io::{
    estimates_from_csv, estimates_from_json, estimates_to_csv, estimates_to_json, orbit_from_csv, orbit_to_csv,
    ray_from_csv, ray_to_csv, write_grid_field, Metadata,
};
use polarwave::lab::{compare, estimate_polarization_set, synthesize, GridSpec, Tolerances, WavePacketSpec};
use polarwave::linalg::CVector;
use polarwave::named::{by_name, describe_scalar};
use polarwave::principal::{
    char_membership, decompose_principal_type, is_real_principal_type, kernel_basis, DEFAULT_KERNEL_TOL,
};
use polarwave::ray::{null_project, trace_ray, Branch, Method, Ray};
use polarwave::symbol::{MatrixSymbol, SymbolSpec};
use polarwave::transport::{transport_with, TransportOptions};
use polarwave::{Error, PhaseSpacePoint, SpacetimePoint, WaveCovector};

use crate::args::{
    CheckTypeArgs, Command, CompareArgs, EstimateArgs, Format, GaugeArgs, RayArgs, Reals, SymbolArgs, SynthArgs,
    TraceArgs, TransportArgs,
};

const DEFAULT_SYMBOL: &str = "flat-maxwell";
const DEFAULT_TOL: f64 = 1e-10;
const DEFAULT_THRESHOLD: f64 = 0.1;
/// Magnitude below which gauge components count as absent in the label.
const LABEL_TOL: f64 = 1e-12;

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Core(Error),
    CompareFailed(usize),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Core(e) if e.is_numerical() => 2,
            Failure::Core(_) => 1,
            Failure::CompareFailed(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::CompareFailed(n) => write!(f, "comparison failed for {n} estimate(s)"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Res<T> = Result<T, Failure>;

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn required<T>(v: Option<T>, flag: &str) -> Res<T> {
    v.ok_or_else(|| input(format!("--{flag} is required")))
}

fn positive(v: f64, flag: &str) -> Res<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(input(format!("--{flag} must be positive, got {v}")))
    }
}

fn four(v: Option<Reals>, flag: &str) -> Res<[f64; 4]> {
    required(v, flag)?.exact::<4>(flag).map_err(input)
}

fn read_text(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))
}

fn emit(output: Option<&PathBuf>, bytes: &[u8]) -> Res<()> {
    match output {
        Some(p) => fs::write(p, bytes).map_err(|e| input(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| input(format!("cannot write output: {e}")))
        }
    }
}

fn emit_json<T: Serialize>(output: Option<&PathBuf>, value: &T) -> Res<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    emit(output, text.as_bytes())
}

pub fn run(command: Command) -> Res<()> {
    match command {
        Command::CheckType(a) => check_type(a),
        Command::Trace(a) => trace(a),
        Command::Transport(a) => transport_cmd(a),
        Command::Gauge(a) => gauge(a),
        Command::Synth(a) => synth(a),
        Command::Estimate(a) => estimate(a),
        Command::Compare(a) => compare_cmd(a),
    }
}

fn load_spec_file(path: &Path) -> Res<MatrixSymbol> {
    let spec: SymbolSpec =
        serde_json::from_str(&read_text(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok(spec.to_symbol()?)
}

/// Symbol plus a label for metadata.
fn load_symbol(a: &SymbolArgs) -> Res<(MatrixSymbol, String)> {
    match (&a.symbol, &a.symbol_file) {
        (Some(_), Some(_)) => Err(input("--symbol and --symbol-file are mutually exclusive")),
        (None, Some(p)) => Ok((load_spec_file(p)?, p.display().to_string())),
        (name, None) => {
            let name = name.as_deref().unwrap_or(DEFAULT_SYMBOL);
            Ok((by_name(name, a.factor.as_deref())?, name.to_string()))
        }
    }
}

fn load_hint(a: &SymbolArgs) -> Res<Option<MatrixSymbol>> {
    a.hint_file.as_deref().map(load_spec_file).transpose()
}

#[derive(Serialize)]
struct CheckTypeReport {
    symbol: String,
    dim: usize,
    order: i32,
    q: String,
    p_tilde: SymbolSpec,
    point: [f64; 4],
    k: [f64; 4],
    q_value: f64,
    on_char: bool,
    real_principal_type: bool,
    kernel_dim: usize,
}

fn check_type(a: CheckTypeArgs) -> Res<()> {
    let tol = positive(a.tol.unwrap_or(DEFAULT_TOL), "tol")?;
    let x = four(a.point, "point")?;
    let k = four(a.k, "k")?;
    let (p, name) = load_symbol(&a.symbol)?;
    let hint = load_hint(&a.symbol)?;
    let pt = PhaseSpacePoint::from_arrays(x, k)?;
    let d = decompose_principal_type(&p, hint.as_ref())?;
    let report = CheckTypeReport {
        symbol: name,
        dim: p.dim(),
        order: p.order(),
        q: describe_scalar(d.q().principal()),
        p_tilde: SymbolSpec::from_symbol(d.p_tilde()),
        point: x,
        k,
        q_value: d.q().principal().eval_scalar(&x, &k).re,
        on_char: char_membership(&d, &pt, tol),
        real_principal_type: is_real_principal_type(d.q(), &pt, tol)?,
        kernel_dim: kernel_basis(&p, &pt, DEFAULT_KERNEL_TOL).dim(),
    };
    emit_json(a.output.as_ref(), &report)
}

fn ray_metadata(symbol: &str, a: &RayArgs) -> Metadata {
    let mut m = Metadata::new();
    m.insert("symbol".into(), symbol.into());
    if a.null_project {
        m.insert("branch".into(), a.branch.clone().unwrap_or_else(|| "+".into()));
    }
    m
}

fn trace_from(q: &MatrixSymbol, a: &RayArgs) -> Res<Ray> {
    let x0 = four(a.x0.clone(), "x0")?;
    let mut k = WaveCovector(four(a.k.clone(), "k")?);
    let span = required(a.tau, "tau")?;
    if !(span.1 > span.0) || !span.0.is_finite() || !span.1.is_finite() {
        return Err(input(format!("--tau {}:{} is empty", span.0, span.1)));
    }
    let step = positive(required(a.step, "step")?, "step")?;
    let method: Method = a.method.as_deref().unwrap_or("rk4").parse()?;
    let branch: Branch = a.branch.as_deref().unwrap_or("+").parse()?;
    if a.null_project {
        k = null_project(k, branch)?;
    }
    Ok(trace_ray(q, SpacetimePoint(x0), k, (span.0, span.1), step, method)?)
}

fn trace(a: TraceArgs) -> Res<()> {
    let (p, name) = load_symbol(&a.symbol)?;
    let hint = load_hint(&a.symbol)?;
    let d = decompose_principal_type(&p, hint.as_ref())?;
    let r = trace_from(d.q(), &a.ray)?;
    emit(
        a.output.as_ref(),
        ray_to_csv(&r, &ray_metadata(&name, &a.ray)).as_bytes(),
    )
}

fn transport_cmd(a: TransportArgs) -> Res<()> {
    let (p, name) = load_symbol(&a.symbol)?;
    let hint = load_hint(&a.symbol)?;
    let d = decompose_principal_type(&p, hint.as_ref())?;
    let mut meta = ray_metadata(&name, &a.ray);
    let r = match &a.ray_file {
        Some(path) => {
            if a.ray.x0.is_some() || a.ray.k.is_some() || a.ray.tau.is_some() {
                return Err(input("--ray-file replaces --x0, --k and --tau"));
            }
            let (r, m) = ray_from_csv(&read_text(path)?)?;
            meta.extend(m.into_iter().filter(|(k, _)| k == "method" || k == "step"));
            r
        }
        None => trace_from(d.q(), &a.ray)?,
    };
    let n = p.dim();
    let re = required(a.omega, "omega")?.0;
    let im = a.omega_im.map(|v| v.0).unwrap_or_else(|| vec![0.0; n]);
    if re.len() != n || im.len() != n {
        return Err(input(format!("--omega and --omega-im need {n} values for this symbol")));
    }
    let w0 = CVector::from_iterator(n, re.iter().zip(&im).map(|(r, i)| Complex64::new(*r, *i)));
    let opts = TransportOptions {
        reproject: a.reproject,
        ..TransportOptions::default()
    };
    let orbit = transport_with(&d, &r, &w0, &opts)?;
    emit(a.output.as_ref(), orbit_to_csv(&orbit, &meta).as_bytes())
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn pairs(v: &CVec4) -> [[f64; 2]; 4] {
    v.map(pair)
}

#[derive(Serialize)]
struct Classification {
    label: &'static str,
    transverse: [[f64; 2]; 4],
    pure_gauge: [f64; 2],
    constraint_violation: [f64; 2],
}

#[derive(Serialize)]
struct FixedMode {
    eps: [[f64; 2]; 4],
    amplitude: [f64; 2],
    chi_hat: [f64; 2],
    lorenz_residual: [f64; 2],
    spatial_transversality: [f64; 2],
}

#[derive(Serialize)]
struct GaugeReport {
    k: [f64; 4],
    eps: [[f64; 2]; 4],
    amplitude: [f64; 2],
    lorenz_residual: [f64; 2],
    classification: Classification,
    radiation_gauge: FixedMode,
    field_strength: [[[f64; 2]; 4]; 4],
}

fn gauge(a: GaugeArgs) -> Res<()> {
    let v = required(a.mode, "mode")?.exact::<9>("mode").map_err(input)?;
    let im = match a.eps_im {
        Some(r) => r.exact::<4>("eps-im").map_err(input)?,
        None => [0.0; 4],
    };
    let k = WaveCovector([v[0], v[1], v[2], v[3]]);
    let eps: CVec4 = std::array::from_fn(|mu| Complex64::new(v[4 + mu], im[mu]));
    let m = FourierMode::new(k, eps, Complex64::new(v[8], a.amp_im.unwrap_or(0.0)))?;
    let cl = classify_mode(&m)?;
    let fix = radiation_fix(&m)?;
    let kv = k.wave_vector();
    // k . eps' with the physical wave vector and eps'_i = -eps'^i
    let dot: Complex64 = (0..3).map(|i| -fix.mode.eps[i + 1] * kv[i]).sum();
    let f = field_strength_mode(&m);
    let report = GaugeReport {
        k: k.0,
        eps: pairs(&m.eps),
        amplitude: pair(m.amplitude),
        lorenz_residual: pair(lorenz_residual(&m)),
        classification: Classification {
            label: cl.label(LABEL_TOL * k.euclidean_norm().max(1.0)),
            transverse: pairs(&cl.transverse),
            pure_gauge: pair(cl.pure_gauge),
            constraint_violation: pair(cl.constraint_violation),
        },
        radiation_gauge: FixedMode {
            eps: pairs(&fix.mode.eps),
            amplitude: pair(fix.mode.amplitude),
            chi_hat: pair(fix.gauge.chi_hat),
            lorenz_residual: pair(fix.lorenz_residual),
            spatial_transversality: pair(dot),
        },
        field_strength: f.f.map(|row| row.map(pair)),
    };
    emit_json(a.output.as_ref(), &report)
}

fn synth(a: SynthArgs) -> Res<()> {
    let output = required(a.output, "output")?;
    let samples = required(a.samples, "samples")?.exact::<3>("samples").map_err(input)?;
    if samples.iter().any(|s| s.fract() != 0.0 || *s < 1.0) {
        return Err(input("--samples must be positive integers"));
    }
    let extent = required(a.extent, "extent")?.exact::<3>("extent").map_err(input)?;
    let origin = match a.origin {
        Some(o) => o.exact::<3>("origin").map_err(input)?,
        None => [0.0; 3],
    };
    let slices = a.slices.unwrap_or(1);
    let samples = samples.map(|s| s as usize);
    let min_dx = (0..3)
        .map(|i| extent[i] / samples[i] as f64)
        .fold(f64::INFINITY, f64::min);
    let grid = GridSpec {
        origin,
        extent,
        samples,
        t0: a.t0.unwrap_or(0.0),
        dt: a.dt.unwrap_or(min_dx),
        slices,
    };
    grid.validate()?;
    let k = WaveCovector(four(a.k, "k")?);
    let re = four(a.eps, "eps")?;
    let im = match a.eps_im {
        Some(v) => v.exact::<4>("eps-im").map_err(input)?,
        None => [0.0; 4],
    };
    let eps: CVec4 = std::array::from_fn(|mu| Complex64::new(re[mu], im[mu]));
    let amp = Complex64::new(a.amp.unwrap_or(1.0), a.amp_im.unwrap_or(0.0));
    let mode = FourierMode::new(k, eps, amp)?;
    let center = SpacetimePoint(four(a.center, "center")?);
    let mut spec = WavePacketSpec::new(mode, center, positive(required(a.sigma, "sigma")?, "sigma")?);
    spec.conjugate = a.conjugate;
    let field = synthesize(&spec, &grid)?;
    let mut bytes = Vec::new();
    write_grid_field(&mut bytes, &field)?;
    emit(Some(&output), &bytes)
}

fn parse_centers(s: &str) -> Res<Vec<SpacetimePoint>> {
    s.split(';')
        .filter(|c| !c.trim().is_empty())
        .map(|c| {
            let r: Reals = c.parse().map_err(input)?;
            Ok(SpacetimePoint(r.exact::<4>("centers").map_err(input)?))
        })
        .collect()
}

fn estimate(a: EstimateArgs) -> Res<()> {
    let path = required(a.field, "field")?;
    let centers = parse_centers(&required(a.centers, "centers")?)?;
    if centers.is_empty() {
        return Err(input("--centers lists no window"));
    }
    let width = positive(required(a.window, "window")?, "window")?;
    let threshold = positive(a.threshold.unwrap_or(DEFAULT_THRESHOLD), "threshold")?;
    let bytes = fs::read(&path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    let field = polarwave::io::parse_grid_field(&bytes)?;
    let est = estimate_polarization_set(&field, &centers, width, threshold)?;
    let format = a
        .format
        .unwrap_or_else(|| match a.output.as_ref().and_then(|p| p.extension()) {
            Some(e) if e == "json" => Format::Json,
            _ => Format::Csv,
        });
    let text = match format {
        Format::Csv => {
            let mut m = Metadata::new();
            m.insert("window".into(), format!("{width}"));
            m.insert("threshold".into(), format!("{threshold}"));
            estimates_to_csv(&est, &m)
        }
        Format::Json => {
            let mut s = estimates_to_json(&est);
            s.push('\n');
            s
        }
    };
    emit(a.output.as_ref(), text.as_bytes())
}

fn compare_cmd(a: CompareArgs) -> Res<()> {
    let est_path = required(a.estimates, "estimates")?;
    let orbit_path = required(a.orbit, "orbit")?;
    let d = Tolerances::default();
    let tol = Tolerances {
        position: positive(a.position_tol.unwrap_or(d.position), "position-tol")?,
        angle_deg: positive(a.angle_tol.unwrap_or(d.angle_deg), "angle-tol")?,
        overlap: positive(a.overlap_tol.unwrap_or(d.overlap), "overlap-tol")?,
        suppression_db: a.suppression_db.unwrap_or(d.suppression_db),
    };
    tol.validate()?;
    let text = read_text(&est_path)?;
    let estimates = if est_path.extension().is_some_and(|e| e == "json") {
        estimates_from_json(&text)?
    } else {
        estimates_from_csv(&text)?.0
    };
    let (orbit, _) = orbit_from_csv(&read_text(&orbit_path)?)?;
    let report = compare(&estimates, &orbit, tol)?;
    emit_json(a.output.as_ref(), &report)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::CompareFailed(
            report.entries.iter().filter(|e| !e.pass).count(),
        ))
    }
}
