//! Command dispatch and report rendering shared by the `pdmod` binary and the C interface.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::cc::{build_sequence, generate_cc_fixed_coords, generate_cc_seeded, verify_cc};
use crate::duality::{differential_rank, double_duality_test, minimum_parametrization};
use crate::error::{Error, Result};
use crate::format::print_operator_file;
use crate::gallery::{self, Metric};
use crate::jet::{
    characters, complete_to_involution, find_delta_regular, involutive_completion, is_involutive, janet_tabular,
    CharacterTable, Completion, JetSystem,
};
use crate::operators::OpMatrix;

pub const COMMANDS: &[&str] = &[
    "adjoint",
    "compose",
    "cc",
    "involution",
    "characters",
    "tabular",
    "symbol",
    "rank",
    "torsion",
    "parametrize",
    "min-parametrize",
    "sequence",
    "gallery",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoordsMode {
    /// Search for delta-regular coordinates when the symbol test fails.
    Auto,
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Json,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub max_order: Option<usize>,
    pub seed: u64,
    pub coords: CoordsMode,
    pub format: OutputFormat,
    pub steps: usize,
}

impl Default for Options {
    fn default() -> Options {
        Options { max_order: None, seed: 0, coords: CoordsMode::Auto, format: OutputFormat::Table, steps: 2 }
    }
}

/// Tries used by the coordinate search.
const TRIES: usize = 16;

/// An input operator together with a short description of where it came from.
#[derive(Clone, Debug)]
pub struct Input {
    pub source: String,
    pub op: OpMatrix,
}

/// Default dimension for gallery operators that take one.
pub fn default_dimension(name: &str) -> usize {
    match name {
        "einstein" | "ricci" | "riemann" => 4,
        _ => 3,
    }
}

/// Parses `euclid`, `minkowski` or `diag:a,b,...`.
pub fn parse_metric(spec: &str, n: usize) -> Result<Metric> {
    match spec {
        "euclid" => Ok(Metric::euclid(n)),
        "minkowski" => Ok(Metric::minkowski(n)),
        other => {
            let Some(list) = other.strip_prefix("diag:") else {
                return Err(Error::Unknown(format!("metric `{other}`")));
            };
            let d = list
                .split(',')
                .map(|s| s.trim().parse::<i64>().map_err(|_| Error::Parse(format!("metric entry `{s}`"))))
                .collect::<Result<Vec<_>>>()?;
            if d.len() != n {
                return Err(Error::DegenerateMetric(format!("{} diagonal entries for n = {n}", d.len())));
            }
            Metric::diagonal(&d)
        }
    }
}

pub fn gallery_input(name: &str, n: Option<usize>, metric: &str) -> Result<Input> {
    let n = n.unwrap_or_else(|| default_dimension(name));
    let m = parse_metric(metric, n)?;
    let op = gallery::by_name(name, n, &m)?;
    Ok(Input { source: format!("gallery:{name} n={n} metric={metric}"), op })
}

/// Result of one command: a JSON payload plus the process exit status.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub value: Value,
    pub exit_code: i32,
}

impl Report {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.value).expect("json");
                s.push('\n');
                s
            }
            OutputFormat::Table => {
                let mut s = String::new();
                render_table(&self.value, 0, &mut s);
                s
            }
        }
    }
}

fn render_table(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                match val {
                    Value::Object(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_table(val, depth + 1, out);
                    }
                    Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        for (i, item) in items.iter().enumerate() {
                            out.push_str(&format!("{pad}  [{i}]\n"));
                            render_table(item, depth + 2, out);
                        }
                    }
                    Value::String(s) if s.contains('\n') => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        for line in s.lines() {
                            out.push_str(&format!("{pad}  | {line}\n"));
                        }
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(val))),
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => format!("[{}]", items.iter().map(scalar).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

pub fn digest(inputs: &[Input]) -> String {
    let mut h = Sha256::new();
    for i in inputs {
        h.update(print_operator_file(&i.op).as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Operator as a labelled table plus its file form.
pub fn operator_json(a: &OpMatrix) -> Value {
    let rows: Vec<Value> = (0..a.nrows())
        .map(|i| {
            let mut cells = Map::new();
            for j in 0..a.ncols() {
                if let Some(op) = a.get(i, j) {
                    cells.insert(a.source_labels()[j].clone(), json!(op.to_string()));
                }
            }
            json!({ "name": a.target_labels()[i], "entries": Value::Object(cells) })
        })
        .collect();
    json!({
        "n": a.n(),
        "shape": [a.nrows(), a.ncols()],
        "order": a.order(),
        "unknowns": a.source_labels(),
        "rows": rows,
        "file": print_operator_file(a),
    })
}

fn characters_json(c: &CharacterTable) -> Value {
    json!({
        "q": c.q,
        "alpha": c.alpha,
        "beta": c.beta,
        "dim_g_q": c.dim_g_q,
        "dim_g_q_plus_1": c.dim_g_q1,
    })
}

fn coords_json(c: &crate::coords::CoordinateChange) -> Value {
    if c.is_identity() {
        json!("identity")
    } else {
        json!(c.to_string())
    }
}

fn budget(a: &OpMatrix, opts: &Options) -> usize {
    opts.max_order.unwrap_or(a.order() + 5).max(a.order())
}

fn complete(a: &OpMatrix, opts: &Options) -> Result<Completion> {
    let s = JetSystem::from_operator_untracked(&a.plain());
    match opts.coords {
        CoordsMode::Auto => involutive_completion(&s, budget(a, opts), opts.seed, TRIES),
        CoordsMode::Identity => complete_to_involution(&s, budget(a, opts)),
    }
}

fn single<'a>(cmd: &str, inputs: &'a [Input]) -> Result<&'a OpMatrix> {
    match inputs {
        [one] => Ok(&one.op),
        _ => Err(Error::PreconditionFailed(format!("`{cmd}` takes exactly one operator, got {}", inputs.len()))),
    }
}

fn error_json(e: &Error) -> Value {
    let kind = match e {
        Error::Domain(_) => "domain",
        Error::Shape(_) => "shape",
        Error::Parse(_) => "parse",
        Error::Syntax { .. } => "syntax",
        Error::UndeclaredSymbol { .. } => "undeclared_symbol",
        Error::NonRationalCoefficient { .. } => "non_rational_coefficient",
        Error::OrderBudgetExceeded { .. } => "order_budget_exceeded",
        Error::PreconditionFailed(_) => "precondition_failed",
        Error::NotTorsionFree { .. } => "not_torsion_free",
        Error::DegenerateMetric(_) => "degenerate_metric",
        Error::UnsupportedDimension(_) => "unsupported_dimension",
        Error::Unknown(_) => "unknown",
        Error::Io(_) => "io",
    };
    json!({ "kind": kind, "message": e.to_string() })
}

/// Report for a failure that happened before any command ran (bad input file, unknown name).
pub fn error_report(command: &str, e: &Error) -> Report {
    Report { value: json!({ "command": command, "error": error_json(e) }), exit_code: 2 }
}

/// Runs `cmd` on the inputs; mathematical negative verdicts exit with 1, errors with 2.
pub fn run_command(cmd: &str, inputs: &[Input], opts: &Options) -> Report {
    let mut head = Map::new();
    head.insert("command".into(), json!(cmd));
    head.insert("inputs".into(), json!(inputs.iter().map(|i| i.source.clone()).collect::<Vec<_>>()));
    head.insert("input_sha256".into(), json!(digest(inputs)));
    head.insert("seed".into(), json!(opts.seed));
    match dispatch(cmd, inputs, opts) {
        Ok((result, exit_code)) => {
            head.insert("result".into(), result);
            Report { value: Value::Object(head), exit_code }
        }
        Err(e) => {
            head.insert("error".into(), error_json(&e));
            Report { value: Value::Object(head), exit_code: 2 }
        }
    }
}

fn dispatch(cmd: &str, inputs: &[Input], opts: &Options) -> Result<(Value, i32)> {
    match cmd {
        "adjoint" => Ok((json!({ "adjoint": operator_json(&single(cmd, inputs)?.adjoint()) }), 0)),
        "compose" => {
            let [a, b] = inputs else {
                return Err(Error::PreconditionFailed(format!("`compose` takes two operators, got {}", inputs.len())));
            };
            Ok((json!({ "product": operator_json(&a.op.matmul(&b.op)?) }), 0))
        }
        "cc" => {
            let a = single(cmd, inputs)?;
            let r = match opts.coords {
                CoordsMode::Auto => generate_cc_seeded(a, budget(a, opts), opts.seed)?,
                CoordsMode::Identity => generate_cc_fixed_coords(a, budget(a, opts))?,
            };
            let verified = verify_cc(&r.cc, a)?;
            Ok((
                json!({
                    "cc": operator_json(&r.cc),
                    "rows": r.cc.nrows(),
                    "order": r.order,
                    "completion_order": r.completion_order,
                    "coordinates": coords_json(&r.coords),
                    "verified": verified,
                }),
                0,
            ))
        }
        "involution" => {
            let a = single(cmd, inputs)?;
            let s = JetSystem::from_operator_untracked(&a.plain());
            let given = is_involutive(&s);
            let mut out = json!({
                "involutive": given.is_involutive(),
                "reason": match &given { crate::jet::Involution::NotInvolutive(r) => json!(r), _ => Value::Null },
                "characters": characters_json(&characters(&s)),
                "tabular": janet_tabular(&s).render(),
            });
            let mut ok = given.is_involutive();
            if !ok && opts.coords == CoordsMode::Auto {
                let (t, c) = find_delta_regular(&s, opts.seed, TRIES);
                let after = is_involutive(&c);
                ok = after.is_involutive();
                out["delta_regular"] = json!({
                    "coordinates": coords_json(&t),
                    "involutive": ok,
                    "characters": characters_json(&characters(&c)),
                    "tabular": janet_tabular(&c).render(),
                });
            }
            Ok((out, if ok { 0 } else { 1 }))
        }
        "characters" | "tabular" => {
            let a = single(cmd, inputs)?;
            let c = complete(a, opts)?;
            let t = janet_tabular(&c.system);
            let mut out = json!({
                "completion_order": c.system.q(),
                "coordinates": coords_json(&c.coords),
                "characters": characters_json(&c.characters),
            });
            if cmd == "tabular" {
                out["tabular"] = json!(t.render());
                out["class_counts"] = json!(t.beta);
                out["delta_irregular"] = json!(t.delta_irregular);
            }
            Ok((out, 0))
        }
        "symbol" => {
            let a = single(cmd, inputs)?;
            let sym = a.principal_symbol(a.order());
            let entries: Vec<Vec<String>> =
                (0..sym.nrows()).map(|i| (0..sym.ncols()).map(|j| sym.entry_string(i, j)).collect()).collect();
            let det = if sym.nrows() == sym.ncols() { json!(sym.determinant()?.to_string()) } else { Value::Null };
            Ok((json!({ "order": sym.order(), "entries": entries, "generic_rank": sym.generic_rank(), "determinant": det }), 0))
        }
        "rank" => {
            let r = differential_rank(single(cmd, inputs)?)?;
            Ok((
                json!({
                    "rank": r.rank,
                    "module_rank": r.module_rank,
                    "witness_rows": r.witness_rows,
                    "characters": characters_json(&r.character_table),
                }),
                0,
            ))
        }
        "torsion" | "parametrize" => {
            let a = single(cmd, inputs)?;
            let rep = double_duality_test(a, budget(a, opts))?;
            let generators: Vec<Value> = rep
                .torsion_rows
                .iter()
                .zip(rep.certificates())
                .map(|(&i, cert)| {
                    json!({
                        "row": rep.d1_prime.row_string(i),
                        "certificate": serde_json::to_value(cert).expect("json"),
                    })
                })
                .collect();
            let mut out = json!({
                "torsion_free": rep.torsion_free,
                "torsion_generators": rep.torsion_generators.len(),
                "generators": generators,
                "ad_d_rows": rep.ad_d.nrows(),
                "d1_prime_rows": rep.d1_prime.nrows(),
            });
            if cmd == "parametrize" && rep.torsion_free {
                out["parametrization"] = operator_json(&rep.d);
            }
            Ok((out, if rep.torsion_free { 0 } else { 1 }))
        }
        "min-parametrize" => {
            let a = single(cmd, inputs)?;
            match minimum_parametrization(a, budget(a, opts)) {
                Ok(p) => Ok((json!({ "potentials": p.ncols(), "parametrization": operator_json(&p) }), 0)),
                Err(Error::NotTorsionFree { generators }) => {
                    Ok((json!({ "torsion_free": false, "torsion_generators": generators }), 1))
                }
                Err(e) => Err(e),
            }
        }
        "sequence" => {
            let a = single(cmd, inputs)?;
            let seq = build_sequence(a, opts.steps, budget(a, opts))?;
            let summary = seq.summary();
            let ops: Vec<Value> = seq.operators.iter().map(operator_json).collect();
            Ok((
                json!({
                    "fiber_dims": summary.fiber_dims,
                    "orders": summary.orders,
                    "euler_poincare": summary.euler_poincare,
                    "complex": seq.is_complex()?,
                    "operators": ops,
                }),
                0,
            ))
        }
        "gallery" => match inputs {
            [] => Ok((json!({ "operators": gallery::GALLERY_NAMES }), 0)),
            [one] => {
                let f = gallery::dim_formulas(one.op.n());
                Ok((
                    json!({
                        "operator": operator_json(&one.op),
                        "dimension_formulas": {
                            "n": f.n,
                            "killing_target": f.killing_target,
                            "riemann": f.riemann,
                            "bianchi": f.bianchi,
                            "ricci_vs_riemann_gap": f.ricci_vs_riemann_gap,
                        },
                    }),
                    0,
                ))
            }
            _ => Err(Error::PreconditionFailed("`gallery` shows one operator at a time".into())),
        },
        other => Err(Error::Unknown(format!("command `{other}`"))),
    }
}
