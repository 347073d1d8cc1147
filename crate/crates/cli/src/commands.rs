use std::fmt::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::json;

use symspace::geometry::{self, SolveStatus, SolverOptions};
use symspace::lts::{self, Field, LtsModule, LtsStructure};
use symspace::model_spaces::{ModelSpace, Symmetric, SymmetricSpace};
use symspace::spectral::locally_exponential_sample_test;
use symspace::suite::{self, VerifyOptions};
use symspace::Error;

use crate::output::{self, num, point, sci, Polygon};
use crate::{Format, GlobalOpts};

pub struct Output {
    pub code: u8,
    pub stdout: String,
    pub stderr: Option<String>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::Parse { .. } | Error::Io(_) | Error::Range { .. } => 2,
            Error::PropertyViolation(_) => 1,
            Error::Unsupported(_) | Error::NumericalAmbiguity { .. } | Error::Ambiguity { .. } => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<Output, CliError>;

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

fn done(code: u8, stdout: String) -> CliResult {
    Ok(Output {
        code,
        stdout,
        stderr: None,
    })
}

/// Text or pretty JSON; SVG only where a command draws something.
fn render<T: Serialize>(g: &GlobalOpts, text: String, data: &T) -> Result<String, CliError> {
    match g.format {
        Format::Text => Ok(text),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(data).expect("serializable report");
            s.push('\n');
            Ok(s)
        }
        Format::Svg => Err(usage("--format svg is only available for double and plot")),
    }
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Unique | SolveStatus::Multiple => 0,
        SolveStatus::NoneFound => 1,
        SolveStatus::Diverged => 3,
    }
}

fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Unique => "unique",
        SolveStatus::Multiple => "multiple",
        SolveStatus::NoneFound => "none-found",
        SolveStatus::Diverged => "diverged",
    }
}

// ---- inputs ----

fn load_lts(g: &GlobalOpts, file: Option<&Path>) -> Result<LtsStructure, CliError> {
    let lts = match (file, &g.space) {
        (Some(path), _) => lts::read_lts_file(path)?,
        (None, Some(sel)) => ModelSpace::parse(sel)?.lts(),
        (None, None) => return Err(usage("give a structure-constant file or --space")),
    };
    match g.tol {
        Some(t) if !(t.is_finite() && t > 0.0) => Err(usage("--tol must be positive")),
        Some(t) => Ok(lts.with_tol(t)),
        None => Ok(lts),
    }
}

fn model(g: &GlobalOpts) -> Result<ModelSpace, CliError> {
    let sel = g
        .space
        .as_deref()
        .ok_or_else(|| usage("this command needs --space"))?;
    Ok(ModelSpace::parse(sel)?)
}

fn parse_json(what: &str, s: &str) -> Result<serde_json::Value, CliError> {
    serde_json::from_str(s).map_err(|e| {
        usage(format!(
            "{what}: parse error at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

fn as_vector(what: &str, v: &serde_json::Value) -> Result<Vec<f64>, CliError> {
    match v {
        serde_json::Value::Number(n) => Ok(vec![n.as_f64().expect("finite JSON number")]),
        serde_json::Value::Array(items) => items
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| usage(format!("{what}: expected numbers"))))
            .collect(),
        _ => Err(usage(format!("{what}: expected a number or an array of numbers"))),
    }
}

fn parse_vector(what: &str, s: &str) -> Result<Vec<f64>, CliError> {
    as_vector(what, &parse_json(what, s)?)
}

/// Chart coordinates to a validated point of the space.
fn chart_point(space: &ModelSpace, what: &str, c: &[f64]) -> Result<Vec<f64>, CliError> {
    if c.len() != space.chart_dim() {
        return Err(usage(format!(
            "{what}: {} has {} chart coordinates, got {}",
            space.name(),
            space.chart_dim(),
            c.len()
        )));
    }
    let p = space
        .from_chart(c)
        .ok_or_else(|| usage(format!("{what}: outside the chart of {}", space.name())))?;
    space.validate(&p)?;
    Ok(p)
}

fn parse_point(space: &ModelSpace, what: &str, s: &str) -> Result<Vec<f64>, CliError> {
    chart_point(space, what, &parse_vector(what, s)?)
}

fn solver_opts(g: &GlobalOpts) -> SolverOptions {
    let d = SolverOptions::default();
    SolverOptions {
        tol: g.tol.unwrap_or(d.tol),
        starts: g.starts.unwrap_or(d.starts),
        seed: g.seed,
        max_iter: g.max_iter,
        dedup_radius: d.dedup_radius,
    }
}

/// Plane coordinates for drawing: the Poincaré disk for the hyperboloid,
/// the chart otherwise.
fn project(space: &ModelSpace, p: &[f64]) -> Result<[f64; 2], CliError> {
    if let ModelSpace::Hyperbolic(_) = space {
        if p.len() == 3 {
            return Ok([p[0] / (1.0 + p[2]), p[1] / (1.0 + p[2])]);
        }
    }
    let c = space.to_chart(p);
    match c.len() {
        1 => Ok([c[0], 0.0]),
        2 => Ok([c[0], c[1]]),
        d => Err(usage(format!("cannot draw a {d}-dimensional chart"))),
    }
}

fn polygon(space: &ModelSpace, pts: &[Vec<f64>], stroke: &'static str, label: String) -> Result<Polygon, CliError> {
    Ok(Polygon {
        points: pts.iter().map(|p| project(space, p)).collect::<Result<_, _>>()?,
        stroke,
        label,
    })
}

fn charts(space: &ModelSpace, pts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    pts.iter().map(|p| space.to_chart(p)).collect()
}

// ---- commands ----

pub fn lts_check(g: &GlobalOpts, file: Option<&Path>) -> CliResult {
    let lts = load_lts(g, file)?;
    let rep = lts::verify_lts_axioms(&lts)?;
    let passed = rep.passed();
    let solvable = if passed { Some(lts::is_solvable(&lts)?) } else { None };

    let mut text = String::new();
    writeln!(text, "dim: {}", lts.dim()).unwrap();
    writeln!(text, "tol: {}", sci(lts.tol())).unwrap();
    for (name, what, c) in [
        ("Lts1", "skew symmetry", rep.lts1),
        ("Lts2", "cyclic identity", rep.lts2),
        ("Lts3", "derivation rule", rep.lts3),
    ] {
        let verdict = if c.passed { "pass" } else { "FAIL" };
        writeln!(text, "{name} ({what}): {verdict}, residual {}", sci(c.residual)).unwrap();
    }
    match solvable {
        Some(s) => writeln!(text, "solvable: {s}").unwrap(),
        None => writeln!(text, "violated: {}", rep.violated().join(", ")).unwrap(),
    }
    let data = json!({
        "dim": lts.dim(),
        "tol": lts.tol(),
        "passed": passed,
        "axioms": rep,
        "violated": rep.violated(),
        "solvable": solvable,
    });
    done(if passed { 0 } else { 1 }, render(g, text, &data)?)
}

pub fn embed(g: &GlobalOpts, file: Option<&Path>) -> CliResult {
    let lts = load_lts(g, file)?;
    let emb = lts::standard_embedding(&lts)?;
    let series = lts::derived_series_dims(&emb);
    let solvable = *series.last().expect("non-empty") == 0;
    let residuals = json!({
        "jacobi": emb.jacobi_residual(),
        "sigma": emb.sigma_residual(),
        "grading": emb.grading_residual(),
        "restriction": emb.restriction_residual(&lts),
        "closure": emb.closure_residual(),
    });

    let mut text = String::new();
    writeln!(text, "dim m: {}", emb.dim_m()).unwrap();
    writeln!(text, "dim h: {}", emb.dim_h()).unwrap();
    writeln!(text, "dim g: {}", emb.dim_g()).unwrap();
    writeln!(text, "derived series: {series:?}").unwrap();
    writeln!(text, "solvable: {solvable}").unwrap();
    for key in ["jacobi", "sigma", "grading", "restriction", "closure"] {
        writeln!(text, "{key} residual: {}", sci(residuals[key].as_f64().unwrap())).unwrap();
    }

    let n = emb.dim_g();
    let constants: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| (0..n).map(|c| emb.structure_constant(a, b, c)).collect())
                .collect()
        })
        .collect();
    let data = json!({
        "dim_m": emb.dim_m(),
        "dim_h": emb.dim_h(),
        "dim_g": n,
        "derived_series": series,
        "solvable": solvable,
        "residuals": residuals,
        "sigma": emb.sigma(),
        "structure_constants": constants,
    });
    done(0, render(g, text, &data)?)
}

pub fn roots(g: &GlobalOpts, file: Option<&Path>) -> CliResult {
    let lts = load_lts(g, file)?;
    if !lts::is_solvable(&lts)? {
        return Err(Error::Unsupported("roots are only defined for solvable systems".into()).into());
    }
    let adjoint = LtsModule::adjoint(&lts);
    let real = lts::jordan_holder_series(&adjoint, Field::Real)?;
    let complex = lts::jordan_holder_series(&adjoint, Field::Complexified)?;
    let rs = lts::roots(&lts)?;
    let n = lts.dim();

    let mut text = String::new();
    writeln!(text, "real quotient dims: {:?}", real.quotient_dims()).unwrap();
    writeln!(text, "complex quotient dims: {:?}", complex.quotient_dims()).unwrap();
    for (k, r) in rs.iter().enumerate() {
        let vals: Vec<String> = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                let z = r.value(&e);
                if z.im == 0.0 {
                    num(z.re)
                } else {
                    format!("{}{:+}i", num(z.re), num(z.im).parse::<f64>().unwrap())
                }
            })
            .collect();
        writeln!(text, "root {k}: values on basis [{}]", vals.join(", ")).unwrap();
    }
    let data = json!({
        "real_quotient_dims": real.quotient_dims(),
        "complex_quotient_dims": complex.quotient_dims(),
        "roots": rs,
    });
    done(0, render(g, text, &data)?)
}

pub fn exponential(g: &GlobalOpts, file: Option<&Path>, samples: usize) -> CliResult {
    let lts = load_lts(g, file)?;
    let mut text = String::new();
    if lts::is_solvable(&lts)? {
        let v = lts::solvable_exponentiality(&lts, g.seed)?;
        writeln!(text, "solvable: true").unwrap();
        let verdict = if v.exponential { "exponential" } else { "not exponential" };
        writeln!(text, "verdict: {verdict}").unwrap();
        if let Some(w) = &v.witness {
            writeln!(
                text,
                "witness: root {}, X = {}, φ(X) = {}",
                w.root_index,
                point(&w.x),
                num(w.value)
            )
            .unwrap();
        }
        if v.sampled {
            writeln!(text, "sampled: true (complex roots searched numerically)").unwrap();
        }
        let data = json!({ "solvable": true, "verdict": v });
        return done(if v.exponential { 0 } else { 1 }, render(g, text, &data)?);
    }

    let v = locally_exponential_sample_test(&lts, samples, g.seed)?;
    writeln!(text, "solvable: false").unwrap();
    let code = if let Some(w) = &v.witness {
        writeln!(text, "verdict: not exponential").unwrap();
        writeln!(
            text,
            "witness: X = {}, [·,X,X] has eigenvalue {}",
            point(&w.x),
            num(w.eigenvalue)
        )
        .unwrap();
        1
    } else {
        writeln!(
            text,
            "verdict: inconclusive (no negative eigenvalue in {} sampled directions)",
            v.samples_checked
        )
        .unwrap();
        3
    };
    writeln!(text, "sampled: true").unwrap();
    let data = json!({ "solvable": false, "verdict": v });
    done(code, render(g, text, &data)?)
}

fn solutions_text(text: &mut String, status: SolveStatus, sols: &[Vec<f64>], residuals: &[f64]) {
    writeln!(text, "status: {}", status_name(status)).unwrap();
    for (s, r) in sols.iter().zip(residuals) {
        writeln!(text, "{}  residual {}", point(s), sci(*r)).unwrap();
    }
}

pub fn midpoint(g: &GlobalOpts, x: &str, y: &str) -> CliResult {
    let space = model(g)?;
    let x = parse_point(&space, "x", x)?;
    let y = parse_point(&space, "y", y)?;
    let r = geometry::midpoint(&space, &x, &y, &solver_opts(g))?;
    let sols = charts(&space, &r.solutions);
    let mut text = String::new();
    solutions_text(&mut text, r.status, &sols, &r.residuals);
    let data = json!({
        "space": space.selector(),
        "status": r.status,
        "solutions": sols,
        "residuals": r.residuals,
        "starts": r.starts,
        "converged": r.converged,
        "escaped": r.escaped,
    });
    done(status_code(r.status), render(g, text, &data)?)
}

pub fn double(g: &GlobalOpts, mids: &[String]) -> CliResult {
    let space = model(g)?;
    let mids: Vec<Vec<f64>> = mids
        .iter()
        .enumerate()
        .map(|(k, s)| parse_point(&space, &format!("midpoint {}", k + 1), s))
        .collect::<Result<_, _>>()?;
    if mids.len().is_multiple_of(2) {
        return Err(usage(format!(
            "doubles are only defined for an odd number of midpoints, got {}",
            mids.len()
        )));
    }

    let criterion = match (&space, mids.len()) {
        (ModelSpace::Hyperbolic(h), 3) if h.dim() == 2 => {
            Some(geometry::hyperbolic_double_exists(&mids[0], &mids[1], &mids[2])?)
        }
        _ => None,
    };
    let r = geometry::double_ngon_solve(&space, &mids, &solver_opts(g))?;
    let polys: Vec<Vec<Vec<f64>>> = r.solutions.iter().map(|p| charts(&space, p)).collect();

    let mut text = String::new();
    let mut message = None;
    let mut code = status_code(r.status);
    if let Some(c) = criterion {
        let det2 = c.det * c.det;
        writeln!(text, "det² = {}", num(det2)).unwrap();
        if c.exists {
            // The criterion is authoritative; a solver miss is inconclusive.
            if r.solutions.is_empty() {
                code = 3;
            }
        } else {
            message = Some(format!("no double triangle (det² = {} ≥ 1)", num(det2)));
            code = 1;
        }
    }
    if let Some(m) = &message {
        writeln!(text, "{m}").unwrap();
    }
    writeln!(text, "status: {}", status_name(r.status)).unwrap();
    for (poly, res) in polys.iter().zip(&r.residuals) {
        let pts: Vec<String> = poly.iter().map(|p| point(p)).collect();
        writeln!(text, "{}  residual {}", pts.join(" "), sci(*res)).unwrap();
    }

    let stdout = if g.format == Format::Svg {
        let mut drawn = vec![polygon(&space, &mids, "gray", "midpoints".into())?];
        for (k, p) in r.solutions.iter().enumerate() {
            drawn.push(polygon(&space, p, "black", format!("double {}", k + 1))?);
        }
        output::svg(&drawn, matches!(space, ModelSpace::Hyperbolic(_)))
    } else {
        let data = json!({
            "space": space.selector(),
            "n": mids.len(),
            "det": criterion.map(|c| c.det),
            "det2": criterion.map(|c| c.det * c.det),
            "exists": criterion.map(|c| c.exists),
            "message": message,
            "status": r.status,
            "solutions": polys,
            "residuals": r.residuals,
            "starts": r.starts,
            "converged": r.converged,
            "escaped": r.escaped,
        });
        render(g, text, &data)?
    };
    Ok(Output {
        code,
        stdout,
        stderr: message.filter(|_| g.format != Format::Text),
    })
}

fn parse_matrix(s: &str) -> Result<DMatrix<f64>, CliError> {
    let v = parse_json("--group", s)?;
    let rows = v
        .as_array()
        .ok_or_else(|| usage("--group: expected a list of rows"))?
        .iter()
        .map(|r| as_vector("--group", r))
        .collect::<Result<Vec<_>, _>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(usage("--group: rows must be non-empty and of equal length"));
    }
    let flat: Vec<f64> = rows.concat();
    Ok(DMatrix::from_row_slice(n, rows[0].len(), &flat))
}

pub fn place(g: &GlobalOpts, z: &str, group: Option<&str>, tangent: Option<&str>) -> CliResult {
    let space = model(g)?;
    let z = parse_point(&space, "z", z)?;
    let real = space
        .realization()
        .ok_or_else(|| Error::Unsupported(format!("{} has no group realization", space.name())))?;
    let elem = match (group, tangent) {
        (Some(m), _) => parse_matrix(m)?,
        (None, Some(t)) => {
            let x = parse_vector("--tangent", t)?;
            if x.len() != space.tangent_dim() {
                return Err(usage(format!(
                    "--tangent: expected {} components",
                    space.tangent_dim()
                )));
            }
            real.exp_algebra(&x)
        }
        (None, None) => return Err(usage("give --group or --tangent")),
    };
    let r = geometry::transvection_placement(&space, &elem, &z, &solver_opts(g))?;
    let sols = charts(&space, &r.solutions);
    let mut text = String::new();
    solutions_text(&mut text, r.status, &sols, &r.residuals);
    let data = json!({
        "space": space.selector(),
        "status": r.status,
        "solutions": sols,
        "residuals": r.residuals,
        "starts": r.starts,
        "converged": r.converged,
        "escaped": r.escaped,
    });
    done(status_code(r.status), render(g, text, &data)?)
}

pub fn verify(g: &GlobalOpts, target: Option<&str>, samples: usize) -> CliResult {
    let target = target.or(g.space.as_deref()).unwrap_or("all");
    let spaces = if target == "all" {
        ModelSpace::all()
    } else {
        vec![ModelSpace::parse(target)?]
    };
    let opts = VerifyOptions {
        seed: g.seed,
        tol: g.tol,
        samples,
    };
    let report = suite::verify(&spaces, &opts)?;

    let mut text = String::new();
    for s in &report.spaces {
        writeln!(text, "{}: {}", s.space, if s.passed { "pass" } else { "FAIL" }).unwrap();
        for t in &s.suites {
            writeln!(
                text,
                "  {:<12} {}  residual {} (tol {}, {} samples)",
                t.name,
                if t.passed { "pass" } else { "FAIL" },
                sci(t.max_residual),
                sci(t.tol),
                t.samples
            )
            .unwrap();
        }
    }
    writeln!(
        text,
        "{}",
        if report.passed { "all suites passed" } else { "some suites failed" }
    )
    .unwrap();
    done(if report.passed { 0 } else { 1 }, render(g, text, &report)?)
}

pub fn plot(g: &GlobalOpts, points: &str) -> CliResult {
    let space = model(g)?;
    let v = parse_json("--points", points)?;
    let pts: Vec<Vec<f64>> = v
        .as_array()
        .ok_or_else(|| usage("--points: expected a list of points"))?
        .iter()
        .enumerate()
        .map(|(k, p)| chart_point(&space, &format!("point {}", k + 1), &as_vector("--points", p)?))
        .collect::<Result<_, _>>()?;
    if pts.is_empty() {
        return Err(usage("--points: need at least one point"));
    }
    let mut drawn = vec![polygon(&space, &pts, "black", "polygon".into())?];
    let mut stderr = None;
    match geometry::gamma_n(&space, &pts, &solver_opts(g)) {
        Ok(mids) => drawn.push(polygon(&space, &mids, "gray", "midpoints".into())?),
        Err(e) => stderr = Some(format!("midpoint polygon skipped: {e}")),
    }
    Ok(Output {
        code: 0,
        stdout: output::svg(&drawn, matches!(space, ModelSpace::Hyperbolic(_))),
        stderr,
    })
}
