use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use spinquant::applications::{
    dirac, invariant_scan, ky_bracket_test, ky_pde_oracle, ky_superization, symbol_of_form, Invariant,
    InvariantElement, InvariantWeights, KyClass, ModuleTag, SkewForm,
};
use spinquant::conformal::generators;
use spinquant::diffop::adjoint_action;
use spinquant::expr::parse_symbol;
use spinquant::ring::{Field, RatFunc, Scalar, XPoly};
use spinquant::solver::{
    build_quantization_with, build_superization_with, resonances, Bidegree, Bound, EquivariantMap, MapKind,
    NonUnique, Solvable, SolverError, Weights, SCHEMA_VERSION,
};
use spinquant::symalg::{superbracket, BracketConvention, MetricSignature, SuperSymbol};

#[derive(Parser)]
#[command(name = "spinquant")]
#[command(about = "Conformally equivariant superization and quantization on the flat spin phase space")]
#[command(version)]
struct Cli {
    /// Dimension, Euclidean unless --pq is given
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Metric signature as `p,q`
    #[arg(long, global = true)]
    pq: Option<String>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Highest p-degree for resonance and invariant searches
    #[arg(long, global = true, default_value_t = 2)]
    max_deg: u32,

    /// `1` or `formal`
    #[arg(long, global = true, default_value = "1")]
    hbar: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    S,
    Q,
}

#[derive(Clone, Copy, ValueEnum)]
enum Module {
    /// Tensorial symbols
    T,
    /// Symbols with the Hamiltonian action
    S,
    /// Differential operators on spinor densities
    D,
}

#[derive(Subcommand)]
enum Command {
    /// Poisson superbracket of two symbols
    Bracket { a: String, b: String },
    /// Apply the equivariant quantization `S^(mu - lambda) -> D^(lambda, mu)`
    Quantize {
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        expr: String,
        /// Treat a non-unique solution as resonant
        #[arg(long)]
        strict: bool,
    },
    /// Apply the equivariant superization `T^delta -> S^delta`
    Superize {
        #[arg(long)]
        delta: String,
        #[arg(long)]
        expr: String,
    },
    /// Resonant weights of a map
    Resonances {
        #[arg(long, value_enum, ignore_case = true)]
        kind: Kind,
    },
    /// Conformal invariants of a module
    Invariants {
        #[arg(long, value_enum, ignore_case = true)]
        module: Module,
    },
    /// Classify a form given as `sum f_I(x) xi^I`
    KyCheck {
        #[arg(long)]
        form: String,
    },
    /// The Dirac operator and its invariance
    Dirac,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Unavailable(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Unavailable(_) => 2,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn from_solver(e: SolverError) -> CliError {
    match e {
        SolverError::GeneratingSetIncomplete { bidegree } => {
            CliError::Unavailable(format!("resonant: no solution at bidegree ({}, {})", bidegree.0, bidegree.1))
        }
        other => CliError::Unavailable(other.to_string()),
    }
}

/// Result of a command: text lines and the JSON document.
struct Output {
    text: String,
    json: Value,
}

fn signature(cli: &Cli) -> Result<MetricSignature, CliError> {
    let sig = match &cli.pq {
        Some(pq) => {
            let (p, q) = pq.split_once(',').ok_or_else(|| usage("--pq expects `p,q`"))?;
            let p: usize = p.trim().parse().map_err(|_| usage("--pq expects `p,q`"))?;
            let q: usize = q.trim().parse().map_err(|_| usage("--pq expects `p,q`"))?;
            MetricSignature::new(p, q).map_err(usage)?
        }
        None => MetricSignature::new(cli.n.unwrap_or(3), 0).map_err(usage)?,
    };
    if let Some(n) = cli.n {
        if n != sig.dim() {
            return Err(usage(format!("--n {n} disagrees with --pq {}", cli.pq.as_deref().unwrap_or(""))));
        }
    }
    Ok(sig)
}

fn scalar(flag: &str, text: &str) -> Result<Scalar, CliError> {
    text.trim().parse().map_err(|_| usage(format!("--{flag} expects a rational `a/b`, got `{text}`")))
}

fn formal_hbar(cli: &Cli) -> Result<bool, CliError> {
    match cli.hbar.as_str() {
        "1" => Ok(false),
        "formal" => Ok(true),
        other => Err(usage(format!("--hbar expects `1` or `formal`, got `{other}`"))),
    }
}

/// Field-generic pieces of the commands that accept a formal hbar.
struct Ctx<F: Field> {
    sig: MetricSignature,
    hbar: F,
    var: &'static str,
}

impl<F: Solvable> Ctx<F> {
    fn parse(&self, text: &str) -> Result<SuperSymbol<F>, CliError> {
        parse_symbol(text, self.sig, &self.hbar).map_err(usage)
    }

    fn conv(&self) -> BracketConvention<F> {
        BracketConvention::standard(self.hbar.clone())
    }

    fn bracket(&self, a: &str, b: &str) -> Result<Output, CliError> {
        let arg = |name: &str, text: &str| {
            self.parse(text).map_err(|e| usage(format!("argument {name}: {e}")))
        };
        let r = superbracket(&arg("A", a)?, &arg("B", b)?, &self.conv()).map_err(usage)?;
        let text = r.render_with(self.var);
        Ok(Output { json: json!({ "schema_version": SCHEMA_VERSION, "bracket": text }), text })
    }

    fn superize(&self, delta: &Scalar, expr: &str) -> Result<Output, CliError> {
        let s = self.parse(expr)?;
        let bound = Bound::new(max_p(&s), self.sig.dim());
        let map = build_superization_with(self.sig, F::from_scalar(delta), bound, self.conv(), NonUnique::Reject)
            .map_err(from_solver)?;
        let image = map.apply_symbol(&s).map_err(from_solver)?.render_with(self.var);
        Ok(Output {
            json: json!({
                "schema_version": SCHEMA_VERSION,
                "delta": delta.to_string(),
                "input": s.render_with(self.var),
                "superization": image,
            }),
            text: image,
        })
    }

    fn quantize(&self, lambda: &Scalar, mu: &Scalar, expr: &str, strict: bool) -> Result<Output, CliError> {
        let s = self.parse(expr)?;
        let bound = Bound::new(max_p(&s), self.sig.dim());
        let w = Weights::quantization(F::from_scalar(lambda), F::from_scalar(mu));
        let policy = if strict { NonUnique::Reject } else { NonUnique::Particular };
        let map: EquivariantMap<F> =
            build_quantization_with(self.sig, w, bound, self.conv(), policy).map_err(from_solver)?;
        for (b, dim) in &map.kernels {
            eprintln!("note: not unique at bidegree ({}, {}), kernel dimension {dim}; using a particular solution", b.0, b.1);
        }
        let op = map.apply_operator(&s).map_err(from_solver)?.render_with(self.var);
        Ok(Output {
            json: json!({
                "schema_version": SCHEMA_VERSION,
                "lambda": lambda.to_string(),
                "mu": mu.to_string(),
                "input": s.render_with(self.var),
                "operator": op,
                "non_unique": kernels_json(&map.kernels),
            }),
            text: op,
        })
    }
}

fn kernels_json(k: &BTreeMap<Bidegree, usize>) -> Value {
    Value::Array(k.iter().map(|(b, d)| json!({ "bidegree": [b.0, b.1], "kernel_dim": d })).collect())
}

fn max_p<F: Field>(s: &SuperSymbol<F>) -> u32 {
    s.terms().map(|(m, _)| m.p_degree()).max().unwrap_or(0)
}

fn run_resonances(sig: MetricSignature, kind: Kind, max_deg: u32) -> Result<Output, CliError> {
    let kind = match kind {
        Kind::S => MapKind::Superization,
        Kind::Q => MapKind::Quantization,
    };
    let report = resonances(sig, kind, Bound::new(max_deg, sig.dim())).map_err(from_solver)?;
    let text = report
        .resonances
        .iter()
        .map(|e| {
            let bs: Vec<String> = e.bidegrees.iter().map(|b| format!("({}, {})", b[0], b[1])).collect();
            format!("{} {:?} {}", e.value, e.kind, bs.join(" "))
        })
        .collect::<Vec<_>>()
        .join("\n");
    let json = serde_json::to_value(&report).expect("report serializes");
    Ok(Output { text, json })
}

fn weights_json(w: &InvariantWeights) -> Value {
    match w {
        InvariantWeights::Delta(d) => json!({ "delta": d.to_string() }),
        InvariantWeights::Densities { lambda, mu_minus_lambda } => json!({
            "lambda": lambda.as_ref().map(|l| l.to_string()),
            "mu_minus_lambda": mu_minus_lambda.to_string(),
        }),
    }
}

fn weights_text(w: &InvariantWeights) -> String {
    match w {
        InvariantWeights::Delta(d) => format!("delta = {d}"),
        InvariantWeights::Densities { lambda: Some(l), mu_minus_lambda } => {
            format!("lambda = {l}, mu = {}", l.add(mu_minus_lambda))
        }
        InvariantWeights::Densities { lambda: None, mu_minus_lambda } => {
            format!("any lambda, mu - lambda = {mu_minus_lambda}")
        }
    }
}

fn element_text(inv: &Invariant) -> String {
    match &inv.element {
        InvariantElement::Symbol(s) => s.to_string(),
        InvariantElement::Operator(d) => d.to_string(),
    }
}

fn run_invariants(sig: MetricSignature, module: Module, max_deg: u32) -> Result<Output, CliError> {
    let tag = match module {
        Module::T => ModuleTag::TensorSymbols,
        Module::S => ModuleTag::HamiltonianSymbols,
        Module::D => ModuleTag::SpinorOperators,
    };
    let found = invariant_scan(sig, tag, Bound::new(max_deg, sig.dim()));
    let text = found
        .iter()
        .map(|inv| format!("{}: {}", weights_text(&inv.weights), element_text(inv)))
        .collect::<Vec<_>>()
        .join("\n");
    let items: Vec<Value> = found
        .iter()
        .map(|inv| json!({ "weights": weights_json(&inv.weights), "element": element_text(inv) }))
        .collect();
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "module": tag,
        "signature": [sig.p, sig.q],
        "max_deg": max_deg,
        "invariants": items,
    });
    Ok(Output { text, json })
}

/// Reads `sum f_I(x) xi^I`, homogeneous in xi and free of p.
fn form_from_symbol(s: &SuperSymbol<Scalar>) -> Result<SkewForm, CliError> {
    let mut degree = None;
    for (m, _) in s.terms() {
        if m.p_degree() != 0 {
            return Err(usage("a form may not contain p"));
        }
        if *degree.get_or_insert(m.xi_degree()) != m.xi_degree() {
            return Err(usage("a form must be homogeneous in xi"));
        }
    }
    let degree = degree.ok_or_else(|| usage("the zero form has no degree"))?;
    let mut f = SkewForm::new(s.signature(), degree as usize).map_err(usage)?;
    for (m, c) in s.terms() {
        let idx: Vec<usize> = (0..s.signature().dim()).filter(|i| m.xi & (1 << i) != 0).collect();
        let term = XPoly::monomial(m.x, c.clone());
        f.set(&idx, f.component(&idx).add(&term)).map_err(usage)?;
    }
    Ok(f)
}

fn class_name(c: KyClass) -> &'static str {
    match c {
        KyClass::KillingYano => "killing-yano",
        KyClass::ConformalKY => "conformal-killing-yano",
        KyClass::Neither => "neither",
    }
}

fn run_ky_check(sig: MetricSignature, form: &str) -> Result<Output, CliError> {
    let s = parse_symbol(form, sig, &Scalar::one()).map_err(usage)?;
    let f = form_from_symbol(&s)?;
    let s0 = ky_superization(sig).map_err(from_solver)?;
    let bracket = ky_bracket_test(&f, &s0).map_err(usage)?;
    let oracle = ky_pde_oracle(&f);
    let text = format!(
        "symbol: {}\nbracket test: {}\npde oracle: {}",
        symbol_of_form(&f),
        class_name(bracket),
        class_name(oracle)
    );
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "symbol": symbol_of_form(&f).to_string(),
        "bracket_test": class_name(bracket),
        "pde_oracle": class_name(oracle),
        "agree": bracket == oracle,
    });
    Ok(Output { text, json })
}

fn run_dirac(sig: MetricSignature) -> Result<Output, CliError> {
    let n = sig.dim() as i64;
    let (lambda, mu) = (Scalar::frac(n - 1, 2 * n), Scalar::frac(n + 1, 2 * n));
    let d = dirac(sig);
    let invariant = generators(sig).iter().all(|g| adjoint_action(g, &lambda, &mu, &d).is_zero());
    let text = format!("{d}\nlambda = {lambda}, mu = {mu}\ninvariant: {invariant}");
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "operator": d.to_string(),
        "lambda": lambda.to_string(),
        "mu": mu.to_string(),
        "invariant": invariant,
    });
    Ok(Output { text, json })
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    let sig = signature(cli)?;
    let formal = formal_hbar(cli)?;
    let needs_unit = !matches!(cli.command, Command::Bracket { .. } | Command::Quantize { .. } | Command::Superize { .. });
    if formal && needs_unit {
        return Err(usage("--hbar formal applies to bracket, quantize and superize"));
    }
    let unit = Ctx { sig, hbar: Scalar::one(), var: "hbar" };
    let formal_ctx = Ctx { sig, hbar: RatFunc::var(), var: "hbar" };
    match &cli.command {
        Command::Bracket { a, b } if formal => formal_ctx.bracket(a, b),
        Command::Bracket { a, b } => unit.bracket(a, b),
        Command::Superize { delta, expr } => {
            let delta = scalar("delta", delta)?;
            if formal {
                formal_ctx.superize(&delta, expr)
            } else {
                unit.superize(&delta, expr)
            }
        }
        Command::Quantize { lambda, mu, expr, strict } => {
            let (lambda, mu) = (scalar("lambda", lambda)?, scalar("mu", mu)?);
            if formal {
                formal_ctx.quantize(&lambda, &mu, expr, *strict)
            } else {
                unit.quantize(&lambda, &mu, expr, *strict)
            }
        }
        Command::Resonances { kind } => run_resonances(sig, *kind, cli.max_deg),
        Command::Invariants { module } => run_invariants(sig, *module, cli.max_deg),
        Command::KyCheck { form } => run_ky_check(sig, form),
        Command::Dirac => run_dirac(sig),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            match cli.format {
                Format::Text => println!("{}", out.text),
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).expect("json renders")),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

