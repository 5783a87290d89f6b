//! Subcommand arguments and their implementations.
//!
//! Argument structs keep every field optional so that config-file values can fill the
//! gaps; defaults are applied after merging and echoed in the output header.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use hyperboot::bounds::{self, SearchOptions};
use hyperboot::equations::{self, EquationId, Hb6Mode, Tolerance};
use hyperboot::hypergeom::{self, ComplexQ, Precision};
use hyperboot::indexset::Window;
use hyperboot::orbifold::TopologicalType;
use hyperboot::recurrences::{self, MatrixRegime, SignGrid};
use hyperboot::spectrum::{self, Spectrum, SpectrumFile};
use hyperboot::{parse_decimal, BiPoly, Rational, UniPoly};

/// What a command produced: the resolved config, the result and the exit code.
pub struct Outcome {
    header: Value,
    result: Value,
    code: u8,
    /// Text written to standard output in place of the JSON document.
    text: Option<String>,
    diagnostics: Vec<String>,
}

impl Outcome {
    fn new(header: Value, result: Value, code: u8) -> Self {
        Self { header, result, code, text: None, diagnostics: Vec::new() }
    }

    pub fn emit(self) -> anyhow::Result<u8> {
        for d in &self.diagnostics {
            eprintln!("{d}");
        }
        let body = match self.text {
            Some(t) => t,
            None => {
                let doc = json!({ "config": self.header, "result": self.result });
                format!("{}\n", serde_json::to_string_pretty(&doc)?)
            }
        };
        let mut out = std::io::stdout().lock();
        match out.write_all(body.as_bytes()).and_then(|_| out.flush()) {
            // A closed pipe (e.g. `| head`) is not an error of the run itself.
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(self.code),
        }
    }
}

fn need<T>(v: Option<T>, flag: &str) -> anyhow::Result<T> {
    v.ok_or_else(|| anyhow!("missing required flag --{flag} (or `{flag}` in the config file)"))
}

fn rational(s: &str, what: &str) -> anyhow::Result<Rational> {
    parse_decimal(s).with_context(|| format!("invalid {what} `{s}`"))
}

/// Parses `a`, `bi`, `a+bi` or `a-bi` into an exact complex rational.
pub fn parse_complex(s: &str) -> anyhow::Result<ComplexQ> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let zero = Rational::from_integer(0.into());
    let Some(body) = t.strip_suffix('i') else {
        return Ok(ComplexQ::new(rational(&t, "complex number")?, zero));
    };
    // Split at the last sign that is not leading and not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&p| (bytes[p] == b'+' || bytes[p] == b'-') && !matches!(bytes[p - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(p) => (&body[..p], &body[p..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    Ok(ComplexQ::new(rational(re, "complex number")?, rational(im, "complex number")?))
}

fn show_complex(z: &ComplexQ) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn uni_json(p: &UniPoly) -> Value {
    json!(p.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>())
}

fn bi_json(p: &BiPoly) -> Value {
    json!(p
        .terms()
        .map(|(&(a, b), c)| json!({ "lambda": a, "mu": b, "coeff": c.to_string() }))
        .collect::<Vec<_>>())
}

// ---------------------------------------------------------------- spectrum check

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct CheckArgs {
    /// Spectrum file to check.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Restrict the checks to |i1| ≤ r1 (default: the file's window).
    #[arg(long)]
    pub r1: Option<u32>,
    /// Restrict the checks to |i2| ≤ r2 (default: the file's window).
    #[arg(long)]
    pub r2: Option<u32>,
    /// Absolute residual tolerance [1e-9].
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Relative tolerance, scaled by the sum of term magnitudes [1e-9].
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// HB6 quadruples: none, diagonal or exhaustive [diagonal].
    #[arg(long)]
    pub hb6: Option<String>,
    /// Count HB6 residuals toward the verdict [false].
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub include_hb6: Option<bool>,
    /// Output format: json or table [json].
    #[arg(long)]
    pub format: Option<String>,
}

fn load_spectrum(path: &PathBuf) -> anyhow::Result<(SpectrumFile, Spectrum)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let file = SpectrumFile::parse(&text).with_context(|| format!("{}", path.display()))?;
    let spec = Spectrum::from_file(&file).with_context(|| format!("{}", path.display()))?;
    Ok((file, spec))
}

pub fn spectrum_check(a: CheckArgs) -> anyhow::Result<Outcome> {
    let input = need(a.input, "input")?;
    let tol = Tolerance { abs: a.abs_tol.unwrap_or(1e-9), rel: a.rel_tol.unwrap_or(1e-9) };
    let mode_name = a.hb6.unwrap_or_else(|| "diagonal".into());
    let mode = match mode_name.as_str() {
        "none" => Hb6Mode::ListOnly,
        "diagonal" => Hb6Mode::Diagonal,
        "exhaustive" => Hb6Mode::Exhaustive,
        other => bail!("unknown --hb6 mode `{other}` (expected none, diagonal or exhaustive)"),
    };
    let include_hb6 = a.include_hb6.unwrap_or(false);
    let format = a.format.unwrap_or_else(|| "json".into());
    if format != "json" && format != "table" {
        bail!("unknown --format `{format}` (expected json or table)");
    }
    let (file, spec) = load_spectrum(&input)?;
    let window = Window::new(a.r1.unwrap_or(spec.window().r1), a.r2.unwrap_or(spec.window().r2));
    let spec = if window == spec.window() { spec } else { restrict(&spec, window)? };

    let mut report = equations::check_all(&spec, &tol, &[], mode)?;
    let raw = equations::check_hb1_raw(&file, &tol)?;
    if let Some(slot) = report.equations.iter_mut().find(|e| e.id == EquationId::Hb1) {
        *slot = raw;
    }
    let passes = report.passes(include_hb6);
    let header = json!({
        "command": "spectrum check",
        "input": input,
        "window": window,
        "tolerance": tol,
        "hb6": mode_name,
        "include-hb6": include_hb6,
        "format": format,
    });
    let mut out = Outcome::new(header.clone(), serde_json::to_value(&report)?, if passes { 0 } else { 2 });
    for e in &report.equations {
        let counted = e.id != EquationId::Hb6 || include_hb6;
        if counted && !e.passes() {
            out.diagnostics.push(format!(
                "{}: {} of {} instances exceed tolerance; worst residual {:e} at {}",
                e.id.name(),
                e.violations,
                e.instances,
                e.max_residual,
                e.worst.as_deref().unwrap_or("?")
            ));
        }
    }
    if format == "table" {
        out.text = Some(format!("# config: {header}\n{}", report.to_table()));
    }
    Ok(out)
}

fn restrict(spec: &Spectrum, window: Window) -> anyhow::Result<Spectrum> {
    let mut out = Spectrum::new(spec.ctx().clone(), window)?;
    for (&(i, j, l), v) in spec.entries() {
        if window.contains(i) && window.contains(j) && window.contains(l) {
            out.set(i, j, l, *v)?;
        }
    }
    Ok(out)
}

// ------------------------------------------------------------- spectrum generate

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct GenerateArgs {
    /// Topological type, `g` or `[g; m1, m2, …]` [2].
    #[arg(long = "type")]
    #[serde(rename = "type")]
    pub topology: Option<String>,
    /// Window bound on |i1| [6].
    #[arg(long)]
    pub r1: Option<u32>,
    /// Window bound on |i2| [12].
    #[arg(long)]
    pub r2: Option<u32>,
    /// ChaCha seed [0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Only build ladders of half-weight k (weight 2k).
    #[arg(long)]
    pub k: Option<u32>,
    /// Where to write the spectrum (default: standard output).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn spectrum_generate(a: GenerateArgs) -> anyhow::Result<Outcome> {
    let topology = a.topology.unwrap_or_else(|| "2".into());
    let window = Window::new(a.r1.unwrap_or(6), a.r2.unwrap_or(12));
    let seed = a.seed.unwrap_or(0);
    let t = TopologicalType::parse(&topology)?;
    let spec = spectrum::generate_fixture(&t, window, seed, a.k)?;
    let text = spec.serialize();
    let header = json!({
        "command": "spectrum generate",
        "type": t.to_string(),
        "window": window,
        "seed": seed,
        "k": a.k,
        "output": a.output,
    });
    let result = json!({ "entries": spec.len(), "holomorphic": spec.ctx().holomorphic.entries() });
    let mut out = Outcome::new(header.clone(), result, 0);
    match &a.output {
        Some(path) => std::fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?,
        None => {
            out.diagnostics.push(format!("# config: {header}"));
            out.text = Some(text);
        }
    }
    Ok(out)
}

// ------------------------------------------------------------------------ bounds

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ClosedFormArgs {
    /// Half-weight k ≥ 1.
    #[arg(long)]
    pub k: Option<u32>,
    /// Width of the certified root enclosure [1e-9].
    #[arg(long)]
    pub precision: Option<String>,
}

pub fn bound_closed_form(a: ClosedFormArgs) -> anyhow::Result<Outcome> {
    let k = need(a.k, "k")?;
    let precision = a.precision.unwrap_or_else(|| "1e-9".into());
    let eps = rational(&precision, "precision")?;
    let quad = bounds::closed_form_quadratic(k)?;
    let thr = bounds::positivity_threshold(&quad, &eps)?;
    let bound = match bounds::closed_form_bound_exact(k)? {
        Some(x) => x.to_string(),
        None => format!("{:.12}", bounds::closed_form_bound(k)?),
    };
    let header = json!({ "command": "bound closed-form", "k": k, "precision": precision });
    let result = json!({
        "k": k,
        "quadratic": uni_json(&quad),
        "bound": bound,
        "exact": thr.exact.is_some(),
        "threshold": thr,
    });
    Ok(Outcome::new(header, result, 0))
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SearchArgs {
    /// Half-weight k ≥ 1.
    #[arg(long)]
    pub k: Option<u32>,
    /// Functional order N ≥ 1.
    #[arg(long)]
    pub order: Option<u32>,
    /// Width of the certified root enclosure [1e-9].
    #[arg(long)]
    pub precision: Option<String>,
    /// Nelder–Mead restarts per order [48].
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Iteration cap per Nelder–Mead run [4000].
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Seed for starting points [0].
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn bound_search(a: SearchArgs) -> anyhow::Result<Outcome> {
    let k = need(a.k, "k")?;
    let order = need(a.order, "order")?;
    let precision = a.precision.unwrap_or_else(|| "1e-9".into());
    let d = SearchOptions::default();
    let opts = SearchOptions {
        precision: rational(&precision, "precision")?,
        restarts: a.restarts.unwrap_or(d.restarts),
        max_iterations: a.max_iterations.unwrap_or(d.max_iterations),
        seed: a.seed.unwrap_or(d.seed),
    };
    let f = bounds::search_functional(k, order, &opts)?;
    let header = json!({
        "command": "bound search",
        "k": k,
        "order": order,
        "precision": precision,
        "restarts": opts.restarts,
        "max-iterations": opts.max_iterations,
        "seed": opts.seed,
    });
    Ok(Outcome::new(header, serde_json::to_value(&f)?, 0))
}

// ------------------------------------------------------------------- recurrences

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TableArgs {
    /// Polynomial family: p, s, r, q or b.
    #[arg(long)]
    pub family: Option<String>,
    /// Index n.
    #[arg(long)]
    pub n: Option<u32>,
    /// Half-weight k, for the q and b families.
    #[arg(long)]
    pub k: Option<u32>,
}

pub fn recur_table(a: TableArgs) -> anyhow::Result<Outcome> {
    let family = need(a.family, "family")?;
    let n = need(a.n, "n")?;
    let need_k = || -> anyhow::Result<u32> {
        let k = need(a.k, "k")?;
        if k == 0 {
            bail!("--k must be at least 1");
        }
        Ok(k)
    };
    let (variables, coefficients) = match family.as_str() {
        "p" => (json!(["lambda", "mu"]), bi_json(&recurrences::p(n))),
        "s" => (json!(["lambda", "mu"]), bi_json(&recurrences::s(n))),
        "r" => {
            let r = recurrences::r(n);
            (json!(["lambda", "mu"]), json!({ "base": bi_json(&r.base), "gated": bi_json(&r.gated) }))
        }
        "q" => (json!(["mu"]), uni_json(&recurrences::q_poly(need_k()?, n))),
        "b" => (json!(["lambda"]), uni_json(&recurrences::b_poly(need_k()?, n))),
        other => bail!("unknown family `{other}` (expected p, s, r, q or b)"),
    };
    let header = json!({ "command": "recur table", "family": family, "n": n, "k": a.k });
    let result = json!({ "family": family, "n": n, "k": a.k, "variables": variables, "coefficients": coefficients });
    Ok(Outcome::new(header, result, 0))
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SignArgs {
    /// Family: p or q.
    #[arg(long)]
    pub family: Option<String>,
    /// Largest n [40].
    #[arg(long)]
    pub n_max: Option<u32>,
    /// λ values (p) or weights k (q), comma separated [family default].
    #[arg(long, value_delimiter = ',')]
    pub params: Option<Vec<String>>,
    /// μ grid reaches 10^e [5].
    #[arg(long)]
    pub mu_max_exponent: Option<u32>,
    /// Number of log-spaced μ values [61].
    #[arg(long)]
    pub mu_count: Option<usize>,
}

pub fn recur_sign(a: SignArgs) -> anyhow::Result<Outcome> {
    let family_name = need(a.family, "family")?;
    let (family, default) = match family_name.as_str() {
        "p" => (recurrences::Family::P, SignGrid::default_p()),
        "q" => (recurrences::Family::Q, SignGrid::default_q()),
        other => bail!("unknown family `{other}` (expected p or q)"),
    };
    let params = match &a.params {
        Some(list) => list.iter().map(|s| rational(s, "parameter")).collect::<anyhow::Result<Vec<_>>>()?,
        None => default.params.clone(),
    };
    if params.is_empty() {
        bail!("--params must not be empty");
    }
    if family == recurrences::Family::Q && params.iter().any(|k| !k.is_integer() || *k < Rational::from_integer(1.into())) {
        bail!("q-family parameters are weights k and must be positive integers");
    }
    let exponent = a.mu_max_exponent.unwrap_or(5);
    let count = a.mu_count.unwrap_or(61);
    if count == 0 {
        bail!("--mu-count must be positive");
    }
    let grid = SignGrid { n_max: a.n_max.unwrap_or(default.n_max), params, mu: SignGrid::log_mu(exponent, count) };
    let header = json!({
        "command": "recur sign-certify",
        "family": family_name,
        "n-max": grid.n_max,
        "params": grid.params.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "mu-max-exponent": exponent,
        "mu-count": count,
    });
    match recurrences::certify_sign_threshold(family, &grid) {
        Ok(t) => Ok(Outcome::new(header, serde_json::to_value(&t)?, 0)),
        Err(e) => {
            let mut out = Outcome::new(header, json!({ "certified": false, "reason": e.to_string() }), 2);
            out.diagnostics.push(format!("sign law not certified: {e}"));
            Ok(out)
        }
    }
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct MatrixArgs {
    /// Number of factors [20].
    #[arg(long)]
    pub n: Option<u32>,
    /// λ [1].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// μ [1e6].
    #[arg(long)]
    pub mu: Option<f64>,
    /// Largest admissible δ_m, ε_m [1e-2].
    #[arg(long)]
    pub admissible: Option<f64>,
    /// Pass when error ≤ factor × comparison [100].
    #[arg(long)]
    pub factor: Option<f64>,
}

pub fn recur_matrix(a: MatrixArgs) -> anyhow::Result<Outcome> {
    let n = a.n.unwrap_or(20);
    let lambda = a.lambda.unwrap_or(1.0);
    let mu = a.mu.unwrap_or(1e6);
    let regime = MatrixRegime { admissible: a.admissible.unwrap_or(MatrixRegime::default().admissible) };
    let factor = a.factor.unwrap_or(100.0);
    let r = recurrences::verify_matrix_product(n, lambda, mu, regime)?;
    let ok = r.error <= factor * r.comparison;
    let header = json!({
        "command": "recur matrix-check",
        "n": n,
        "lambda": lambda,
        "mu": mu,
        "admissible": regime.admissible,
        "factor": factor,
        "precision": "f64",
    });
    let mut out = Outcome::new(header, json!({ "passes": ok, "report": r }), if ok { 0 } else { 2 });
    if !ok {
        out.diagnostics.push(format!("error {:e} exceeds {factor} × {:e}", r.error, r.comparison));
    }
    Ok(out)
}

// ------------------------------------------------------------------ hypergeometric

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TblockArgs {
    /// Half-weight k ≥ 1.
    #[arg(long)]
    pub k: Option<u32>,
    /// λ ≥ 0, as a decimal.
    #[arg(long)]
    pub lambda: Option<String>,
    /// z with |z| < 1/2, e.g. 0.3 or 0.3+0.2i.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    /// Working precision in decimal digits [50].
    #[arg(long)]
    pub digits: Option<u32>,
    /// Largest accepted residual [1e-10].
    #[arg(long)]
    pub tolerance: Option<f64>,
}

pub fn hyp_tblock(a: TblockArgs) -> anyhow::Result<Outcome> {
    let k = need(a.k, "k")?;
    let lambda_s = need(a.lambda, "lambda")?;
    let z_s = need(a.z, "z")?;
    let lambda = rational(&lambda_s, "λ")?;
    let z = parse_complex(&z_s)?;
    let prec = Precision { digits: a.digits.unwrap_or(50) };
    let tol = a.tolerance.unwrap_or(1e-10);
    let r = hypergeom::verify_tblock(k, &lambda, &z, prec)?;
    let ok = r.residual < tol;
    let header = json!({
        "command": "hyp verify-tblock",
        "k": k,
        "lambda": lambda_s,
        "z": show_complex(&z),
        "digits": prec.digits,
        "tolerance": tol,
    });
    let mut out = Outcome::new(header, json!({ "passes": ok, "report": r }), if ok { 0 } else { 2 });
    if !ok {
        out.diagnostics.push(format!("t-block residual {:e} ≥ {tol:e}", r.residual));
    }
    Ok(out)
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct CrossingArgs {
    /// Spectrum file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Ladder index ρ; i = (−ρ, k_ρ).
    #[arg(long)]
    pub rho: Option<u32>,
    /// z values with |z| < 1/2, comma separated [0.1,0.25,0.3+0.2i].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub z: Option<Vec<String>>,
    /// Working precision in decimal digits [30].
    #[arg(long)]
    pub digits: Option<u32>,
}

pub fn hyp_crossing(a: CrossingArgs) -> anyhow::Result<Outcome> {
    let input = need(a.input, "input")?;
    let rho = need(a.rho, "rho")?;
    let zs_s = a.z.unwrap_or_else(|| vec!["0.1".into(), "0.25".into(), "0.3+0.2i".into()]);
    let zs = zs_s.iter().map(|s| parse_complex(s)).collect::<anyhow::Result<Vec<_>>>()?;
    let prec = Precision { digits: a.digits.unwrap_or(30) };
    let (_, spec) = load_spectrum(&input)?;
    let points = hypergeom::check_kmp_crossing(&spec, rho, &zs, prec)?;
    let header = json!({
        "command": "hyp crossing",
        "input": input,
        "rho": rho,
        "z": zs.iter().map(show_complex).collect::<Vec<_>>(),
        "digits": prec.digits,
    });
    Ok(Outcome::new(header, json!({ "diagnostic": true, "points": points }), 0))
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AsymptoticArgs {
    /// λ values, comma separated [400,900,1600].
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    /// Real z in [0, 1) [0.99].
    #[arg(long)]
    pub z: Option<f64>,
    /// Required exponent is π − δ [1].
    #[arg(long)]
    pub delta: Option<f64>,
}

pub fn hyp_asymptotic(a: AsymptoticArgs) -> anyhow::Result<Outcome> {
    let lambdas = a.lambda.unwrap_or_else(|| vec![400.0, 900.0, 1600.0]);
    let z = a.z.unwrap_or(0.99);
    let delta = a.delta.unwrap_or(1.0);
    let points = hypergeom::check_asymptotic(&lambdas, z, delta)?;
    let increasing = points.windows(2).all(|w| w[0].exponent < w[1].exponent);
    let ok = increasing && points.iter().all(|p| p.passes);
    let header = json!({
        "command": "hyp asymptotic",
        "lambda": lambdas,
        "z": z,
        "delta": delta,
        "precision": "f64",
    });
    let mut out = Outcome::new(header, json!({ "passes": ok, "increasing": increasing, "points": points }), if ok { 0 } else { 2 });
    if !ok {
        out.diagnostics.push("measured exponents fall below π − δ or are not increasing".into());
    }
    Ok(out)
}
