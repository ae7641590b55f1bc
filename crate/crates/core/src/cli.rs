//! Command line front end. `run` does all the work and returns what would
//! be printed together with the exit code, so it can be tested in-process.

use std::ffi::OsString;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::analytic::{
    kronecker_closed, kronecker_integral, torus_spectrum, transform_defect, transform_defect_gen, SeriesParams,
};
use crate::dedekind::{classical_sum, generalized_sum};
use crate::moduli::{circle_moduli_summary, connection_from_nu, enumerate_torus_connections, CircleFlatConnection};
use crate::rational::{canonical, int, is_integer, parse, rat, to_f64, Rational};
use crate::rho::{chern_simons_mod1, eta_untwisted_torus, rho_circle, rho_hyperbolic_prep, rho_torus};
use crate::sl2z::{classify, SL2ZMatrix, UpperHalfPoint};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

pub const TOLERANCE_ENV: &str = "RHO_CALC_TOL";

#[derive(Debug, Parser)]
#[command(name = "rho-calc", version, about = "Rho, Eta and Chern-Simons invariants of circle bundles and torus mapping tori")]
struct Cli {
    /// Emit a JSON document instead of a table
    #[arg(long, global = true)]
    json: bool,
    /// Quadrature tolerance (overrides RHO_CALC_TOL)
    #[arg(long, global = true)]
    quad_tol: Option<f64>,
    /// Series tail tolerance
    #[arg(long, global = true)]
    tail_tol: Option<f64>,
    /// Maximum number of series terms
    #[arg(long, global = true)]
    max_terms: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rho invariants
    #[command(subcommand)]
    Rho(RhoCmd),
    /// Untwisted Eta invariants
    #[command(subcommand)]
    Eta(EtaCmd),
    /// Dedekind sums
    #[command(subcommand)]
    Dedekind(DedekindCmd),
    /// Flat connection moduli
    #[command(subcommand)]
    Moduli(ModuliCmd),
    /// Laplace spectrum of a flat torus
    #[command(subcommand)]
    Spectrum(SpectrumCmd),
    /// Numerical and exact cross-checks
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Debug, Args)]
struct MatrixArg {
    /// Monodromy a,b,c,d (row-major)
    #[arg(long, allow_hyphen_values = true, value_parser = parse_matrix)]
    matrix: [i64; 4],
}

#[derive(Debug, Args)]
struct CircleArgs {
    /// Degree l of the circle bundle
    #[arg(long, allow_hyphen_values = true)]
    degree: i64,
    /// Degree k of the line bundle defining the connection
    #[arg(long, allow_hyphen_values = true)]
    chern: i64,
}

#[derive(Debug, Subcommand)]
enum RhoCmd {
    Circle {
        #[command(flatten)]
        circle: CircleArgs,
        /// The connection itself is trivial
        #[arg(long)]
        trivial: bool,
    },
    Torus {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_pair, required_unless_present = "enumerate")]
        nu: Option<(Rational, Rational)>,
        /// Constant gauge phase, only for integral nu
        #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
        lambda: Option<Rational>,
        /// Every class of flat connections, with Chern-Simons classes
        #[arg(long, conflicts_with = "nu")]
        enumerate: bool,
    },
}

#[derive(Debug, Subcommand)]
enum EtaCmd {
    Torus {
        #[command(flatten)]
        matrix: MatrixArg,
    },
}

#[derive(Debug, Subcommand)]
enum DedekindCmd {
    Classic {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        c: i64,
    },
    General {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        c: i64,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
        x: Rational,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
        y: Rational,
    },
}

#[derive(Debug, Subcommand)]
enum ModuliCmd {
    Torus {
        #[command(flatten)]
        matrix: MatrixArg,
    },
    Circle {
        #[arg(long)]
        genus: i64,
        #[arg(long, allow_hyphen_values = true)]
        degree: i64,
    },
}

#[derive(Debug, Subcommand)]
enum SpectrumCmd {
    Torus {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_sigma)]
        sigma: (f64, f64),
        #[arg(long, allow_hyphen_values = true, value_parser = parse_pair, default_value = "0,0")]
        nu: (Rational, Rational),
        /// Lattice box half-width
        #[arg(long, default_value_t = 4)]
        max_norm: i64,
        /// Number of distinct eigenvalues to print
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

#[derive(Debug, Subcommand)]
enum VerifyCmd {
    Kronecker {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_sigma)]
        sigma: (f64, f64),
        #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
        nu: (Rational, Rational),
    },
    EtaTransform {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_sigma)]
        sigma: (f64, f64),
    },
    EtaTransformGen {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
        g: Rational,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
        h: Rational,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_sigma)]
        sigma: (f64, f64),
    },
    TwoPath {
        #[command(flatten)]
        matrix: MatrixArg,
    },
    ParabolicCircle {
        #[command(flatten)]
        circle: CircleArgs,
    },
}

fn parse_matrix(s: &str) -> Result<[i64; 4], String> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse::<i64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| "expected four integers a,b,c,d".to_string())
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    parse(s).map_err(|e| e.to_string())
}

fn parse_pair(s: &str) -> Result<(Rational, Rational), String> {
    let (a, b) = s.split_once(',').ok_or("expected two rationals p/q,p/q")?;
    Ok((parse_rational(a)?, parse_rational(b)?))
}

fn parse_sigma(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected re,im")?;
    let re = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let im = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((re, im))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultEntry {
    pub name: String,
    pub exact: Option<String>,
    pub float: Option<f64>,
    pub branch: String,
}

impl ResultEntry {
    fn exact(name: impl Into<String>, value: &Rational, branch: impl Into<String>) -> Self {
        ResultEntry { name: name.into(), exact: Some(canonical(value)), float: Some(to_f64(value)), branch: branch.into() }
    }

    fn float(name: impl Into<String>, value: f64, branch: impl Into<String>) -> Self {
        ResultEntry { name: name.into(), exact: None, float: Some(value), branch: branch.into() }
    }

    fn note(name: impl Into<String>, branch: impl Into<String>) -> Self {
        ResultEntry { name: name.into(), exact: None, float: None, branch: branch.into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub terms_used: Option<usize>,
    pub achieved_tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultDocument {
    pub schema_version: &'static str,
    pub command: String,
    pub inputs: serde_json::Value,
    pub results: Vec<ResultEntry>,
    pub diagnostics: Diagnostics,
}

impl ResultDocument {
    fn new(command: &str, inputs: serde_json::Value) -> Self {
        ResultDocument {
            schema_version: "1",
            command: command.to_string(),
            inputs,
            results: Vec::new(),
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let width = self.results.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
        for r in &self.results {
            let exact = r.exact.clone().unwrap_or_else(|| "-".into());
            let float = r.float.map(|f| format!("{f:.12}")).unwrap_or_else(|| "-".into());
            out.push_str(&format!("{:width$}  {:>14}  {:>20}  {}\n", r.name, exact, float, r.branch));
        }
        if let Some(t) = self.diagnostics.terms_used {
            out.push_str(&format!("terms used: {t}\n"));
        }
        if let Some(t) = self.diagnostics.achieved_tolerance {
            out.push_str(&format!("achieved tolerance: {t:e}\n"));
        }
        out
    }
}

/// Outcome of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

enum Failure {
    Lib(Error),
    Check(String, Box<ResultDocument>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn matrix(m: &MatrixArg) -> Result<SL2ZMatrix, Error> {
    let [a, b, c, d] = m.matrix;
    SL2ZMatrix::new(a, b, c, d)
}

fn pair_json(p: &(Rational, Rational)) -> serde_json::Value {
    json!([canonical(&p.0), canonical(&p.1)])
}

fn nu_label(nu: &(Rational, Rational)) -> String {
    format!("({},{})", canonical(&nu.0), canonical(&nu.1))
}

/// Parses `args` (including the program name) and runs the command.
/// `env_tolerance` is the value of `RHO_CALC_TOL`, if set.
pub fn run<I, T>(args: I, env_tolerance: Option<String>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { stdout: text, stderr: String::new(), code }
            } else {
                Outcome { stdout: String::new(), stderr: text, code }
            };
        }
    };
    let mut params = SeriesParams::default();
    if let (None, Some(raw)) = (cli.quad_tol, env_tolerance) {
        match raw.trim().parse::<f64>() {
            Ok(t) if t > 0.0 => params.quad_tolerance = t,
            _ => {
                return Outcome { stdout: String::new(), stderr: format!("invalid {TOLERANCE_ENV}={raw:?}\n"), code: EXIT_USAGE }
            }
        }
    }
    if let Some(t) = cli.quad_tol {
        params.quad_tolerance = t;
    }
    if let Some(t) = cli.tail_tol {
        params.tail_tolerance = t;
    }
    if let Some(n) = cli.max_terms {
        params.max_terms = n;
    }
    if !(params.quad_tolerance > 0.0 && params.tail_tolerance > 0.0 && params.max_terms > 0) {
        return Outcome { stdout: String::new(), stderr: "tolerances must be positive\n".into(), code: EXIT_USAGE };
    }
    let render = |doc: &ResultDocument| {
        if cli.json {
            serde_json::to_string_pretty(doc).expect("serializable") + "\n"
        } else {
            doc.to_table()
        }
    };
    match execute(&cli.command, &params) {
        Ok(doc) => Outcome { stdout: render(&doc), stderr: String::new(), code: EXIT_OK },
        Err(Failure::Lib(e)) => {
            let code = if e.is_numeric() { EXIT_NUMERIC } else { EXIT_DOMAIN };
            Outcome { stdout: String::new(), stderr: format!("error: {e}\n"), code }
        }
        Err(Failure::Check(msg, doc)) => {
            Outcome { stdout: render(&doc), stderr: format!("verification failed: {msg}\n"), code: EXIT_NUMERIC }
        }
    }
}

fn sigma_point(s: (f64, f64)) -> Result<UpperHalfPoint, Error> {
    UpperHalfPoint::new(s.0, s.1)
}

fn complex_entries(doc: &mut ResultDocument, name: &str, z: Complex64, branch: &str) {
    doc.results.push(ResultEntry::float(format!("{name}.re"), z.re, branch));
    doc.results.push(ResultEntry::float(format!("{name}.im"), z.im, branch));
}

fn execute(cmd: &Command, params: &SeriesParams) -> Result<ResultDocument, Failure> {
    match cmd {
        Command::Rho(RhoCmd::Circle { circle, trivial }) => {
            let conn = CircleFlatConnection::new(circle.degree, circle.chern, *trivial)?;
            let mut doc = ResultDocument::new(
                "rho circle",
                json!({"degree": circle.degree, "chern": circle.chern, "trivial": trivial}),
            );
            let r = rho_circle(&conn);
            doc.results.push(ResultEntry::exact("rho", &r.value, r.branch.as_str()));
            Ok(doc)
        }
        Command::Rho(RhoCmd::Torus { matrix: m, nu, lambda, enumerate }) => {
            let mat = matrix(m)?;
            let mut doc = ResultDocument::new(
                "rho torus",
                json!({
                    "matrix": m.matrix,
                    "nu": nu.as_ref().map(pair_json),
                    "lambda": lambda.as_ref().map(canonical),
                    "enumerate": enumerate,
                }),
            );
            if *enumerate {
                enumerate_rho(&mat, &mut doc)?;
            } else {
                let nu = nu.as_ref().expect("required by clap");
                let conn = connection_from_nu(&mat, nu, lambda.clone())?;
                let r = rho_torus(&mat, &conn)?;
                doc.results.push(ResultEntry::exact("rho", &r.value, r.branch.as_str()));
                let cs = chern_simons_mod1(&mat, &conn)?;
                doc.results.push(ResultEntry::exact("chern-simons", &cs, "mod-1"));
            }
            Ok(doc)
        }
        Command::Eta(EtaCmd::Torus { matrix: m }) => {
            let mat = matrix(m)?;
            let class = classify(&mat)?;
            let mut doc = ResultDocument::new("eta torus", json!({"matrix": m.matrix}));
            doc.results.push(ResultEntry::exact("eta", &eta_untwisted_torus(&mat)?, class.name()));
            Ok(doc)
        }
        Command::Dedekind(DedekindCmd::Classic { a, c }) => {
            let mut doc = ResultDocument::new("dedekind classic", json!({"a": a, "c": c}));
            doc.results.push(ResultEntry::exact("s(a,c)", &classical_sum(*a, *c)?, "classical"));
            Ok(doc)
        }
        Command::Dedekind(DedekindCmd::General { a, c, x, y }) => {
            let mut doc = ResultDocument::new(
                "dedekind general",
                json!({"a": a, "c": c, "x": canonical(x), "y": canonical(y)}),
            );
            doc.results.push(ResultEntry::exact("s_{x,y}(a,c)", &generalized_sum(x, y, *a, *c)?, "generalized"));
            Ok(doc)
        }
        Command::Moduli(ModuliCmd::Torus { matrix: m }) => {
            let mat = matrix(m)?;
            let set = enumerate_torus_connections(&mat)?;
            let mut doc = ResultDocument::new("moduli torus", json!({"matrix": m.matrix}));
            for c in &set.isolated {
                let kind = if c.restriction_trivial {
                    "trivial-restriction"
                } else if c.bundle_trivial {
                    "bundle-trivial"
                } else {
                    "bundle-nontrivial"
                };
                doc.results.push(ResultEntry::note(format!("nu={} m=({},{})", nu_label(&c.nu), c.m.0, c.m.1), kind));
            }
            for f in &set.families {
                doc.results.push(ResultEntry::note(
                    format!("nu1={} nu2 free (conjugator {})", canonical(&f.nu1), f.conjugator),
                    "family",
                ));
            }
            Ok(doc)
        }
        Command::Moduli(ModuliCmd::Circle { genus, degree }) => {
            let s = circle_moduli_summary(*genus, *degree)?;
            let mut doc = ResultDocument::new("moduli circle", json!({"genus": genus, "degree": degree}));
            doc.results.push(ResultEntry::exact("torus_rank", &int(s.torus_rank), "U(1)^rank"));
            doc.results.push(ResultEntry::exact("torsion_order", &int(s.torsion_order), "Z_|l|"));
            Ok(doc)
        }
        Command::Spectrum(SpectrumCmd::Torus { sigma, nu, max_norm, count }) => {
            let s = sigma_point(*sigma)?;
            let sp = torus_spectrum(s, nu, *max_norm);
            let mut doc = ResultDocument::new(
                "spectrum torus",
                json!({"sigma": [sigma.0, sigma.1], "nu": pair_json(nu), "max_norm": max_norm}),
            );
            for (v, k) in sp.functions.iter().take(*count) {
                doc.results.push(ResultEntry::float("eigenvalue", *v, format!("multiplicity {k}, 1-forms {}", 2 * k)));
            }
            Ok(doc)
        }
        Command::Verify(v) => verify(v, params),
    }
}

fn enumerate_rho(mat: &SL2ZMatrix, doc: &mut ResultDocument) -> Result<(), Failure> {
    let set = enumerate_torus_connections(mat)?;
    let mut classes: Vec<_> = set.isolated.iter().filter(|c| !c.restriction_trivial).cloned().collect();
    for f in &set.families {
        let nu2 = if f.nu1 == int(0) { rat(1, 2) } else { int(0) };
        classes.push(connection_from_nu(mat, &f.member(&nu2), None)?);
    }
    for c in classes {
        let label = nu_label(&c.nu);
        let r = rho_torus(mat, &c)?;
        doc.results.push(ResultEntry::exact(format!("rho nu={label}"), &r.value, r.branch.as_str()));
        doc.results.push(ResultEntry::exact(format!("cs nu={label}"), &chern_simons_mod1(mat, &c)?, "mod-1"));
    }
    Ok(())
}

fn verify(cmd: &VerifyCmd, params: &SeriesParams) -> Result<ResultDocument, Failure> {
    match cmd {
        VerifyCmd::Kronecker { sigma, nu } => {
            let s = sigma_point(*sigma)?;
            let mut doc = ResultDocument::new("verify kronecker", json!({"sigma": [sigma.0, sigma.1], "nu": pair_json(nu)}));
            let quad = kronecker_integral(s, nu, params)?;
            let closed = kronecker_closed(s, nu, params)?;
            complex_entries(&mut doc, "integral", quad.value, "quadrature");
            complex_entries(&mut doc, "closed", closed.value, "series");
            let diff = (quad.value - closed.value).norm();
            doc.diagnostics = Diagnostics { terms_used: Some(quad.terms_used + closed.terms_used), achieved_tolerance: Some(diff) };
            check(diff < 1e-6, format!("|integral - closed| = {diff:e}"), doc)
        }
        VerifyCmd::EtaTransform { matrix: m, sigma } => {
            let mat = matrix(m)?;
            let s = sigma_point(*sigma)?;
            let mut doc = ResultDocument::new("verify eta-transform", json!({"matrix": m.matrix, "sigma": [sigma.0, sigma.1]}));
            let d = transform_defect(&mat, s, params)?;
            complex_entries(&mut doc, "defect", d.value, "log-eta");
            doc.diagnostics = Diagnostics { terms_used: Some(d.terms_used), achieved_tolerance: Some(d.value.norm()) };
            check(d.value.norm() < 1e-9, format!("defect {:e}", d.value.norm()), doc)
        }
        VerifyCmd::EtaTransformGen { matrix: m, g, h, sigma } => {
            let mat = matrix(m)?;
            let s = sigma_point(*sigma)?;
            let mut doc = ResultDocument::new(
                "verify eta-transform-gen",
                json!({"matrix": m.matrix, "g": canonical(g), "h": canonical(h), "sigma": [sigma.0, sigma.1]}),
            );
            let d = transform_defect_gen(&mat, g, h, s, params)?;
            complex_entries(&mut doc, "defect", d.value, "generalized-log-eta");
            doc.diagnostics = Diagnostics { terms_used: Some(d.terms_used), achieved_tolerance: Some(d.value.norm()) };
            check(d.value.norm() < 1e-8, format!("defect {:e}", d.value.norm()), doc)
        }
        VerifyCmd::TwoPath { matrix: m } => {
            let mat = matrix(m)?;
            let mut doc = ResultDocument::new("verify two-path", json!({"matrix": m.matrix}));
            let set = enumerate_torus_connections(&mat)?;
            let mut ok = true;
            for c in set.isolated.iter().filter(|c| !c.restriction_trivial) {
                let a = rho_torus(&mat, c)?;
                let b = rho_hyperbolic_prep(&mat, c)?;
                ok &= a.value == b.value;
                let label = nu_label(&c.nu);
                doc.results.push(ResultEntry::exact(format!("rho nu={label}"), &a.value, a.branch.as_str()));
                doc.results.push(ResultEntry::exact(format!("rho nu={label}"), &b.value, b.branch.as_str()));
            }
            check(ok, "closed formula and Dedekind sum path differ".into(), doc)
        }
        VerifyCmd::ParabolicCircle { circle } => {
            let (l, k) = (circle.degree, circle.chern);
            if l == 0 {
                return Err(Error::ZeroDegree.into());
            }
            let mat = SL2ZMatrix::new(1, l, 0, 1)?;
            let nu1 = rat(k, l);
            let nu2 = if is_integer(&nu1) { rat(1, 2) } else { int(0) };
            let conn = connection_from_nu(&mat, &(nu1, nu2), None)?;
            let torus = rho_torus(&mat, &conn)?;
            let circ = rho_circle(&CircleFlatConnection::new(l, k, false)?);
            let mut doc = ResultDocument::new("verify parabolic-circle", json!({"degree": l, "chern": k}));
            doc.results.push(ResultEntry::exact("rho torus", &torus.value, torus.branch.as_str()));
            doc.results.push(ResultEntry::exact("rho circle", &circ.value, circ.branch.as_str()));
            check(torus.value == circ.value, "parabolic and circle values differ".into(), doc)
        }
    }
}

fn check(ok: bool, msg: String, doc: ResultDocument) -> Result<ResultDocument, Failure> {
    if ok {
        Ok(doc)
    } else {
        Err(Failure::Check(msg, Box::new(doc)))
    }
}
