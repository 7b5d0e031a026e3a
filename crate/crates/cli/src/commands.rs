//! One function per subcommand. Each returns a table for the CSV output and
//! a serializable result for the JSON sidecar.

use std::ops::RangeInclusive;

use serde::Serialize;
use serde_json::{json, Value};

use survivordim_core::asymptotics::{
    deficit_scan, derivative_relation_check, fp_ratio_scan, maximizing_permutations, z_constant_at,
    Z_AGREEMENT,
};
use survivordim_core::measures::{kaenmaki_measure, mu_d_at, BernoulliMeasure};
use survivordim_core::pressure::{full_dimension, survivor_dimension, PressureFunction};
use survivordim_core::{
    AffineIFS, AvoidanceAutomaton, Error, HoleSpec, Permutation, Result, Tolerances, Word,
};

use crate::config::LoadedSystem;
use crate::output::{Cell, Table};

pub struct CommandOutput {
    pub table: Table,
    pub result: Value,
    /// Extra plot for `--svg`.
    pub svg: Option<String>,
    /// False when a `verify` check failed.
    pub passed: bool,
}

impl CommandOutput {
    fn new(table: Table, result: impl Serialize) -> Result<Self> {
        Ok(CommandOutput {
            table,
            result: serde_json::to_value(result)
                .map_err(|e| Error::Internal(format!("cannot serialize result: {e}")))?,
            svg: None,
            passed: true,
        })
    }
}

/// Which measure `escape` and `fp-ratio` use.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasureChoice {
    Kaenmaki,
    Permutation(Permutation),
    Weights(Vec<f64>),
}

impl MeasureChoice {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("kaenmaki") {
            return Ok(MeasureChoice::Kaenmaki);
        }
        if let Some(rest) = t.strip_prefix("d=").or_else(|| t.strip_prefix("D=")) {
            return Ok(MeasureChoice::Permutation(Permutation::parse(rest)?));
        }
        let weights = t
            .split(',')
            .map(|w| crate::config::Entry::Text(w.to_string()).value())
            .collect::<Result<Vec<_>>>()
            .map_err(|_| {
                Error::validation(
                    None,
                    format!("measure {text:?} is not `kaenmaki`, `d=<permutation>` or a weight list"),
                )
            })?;
        Ok(MeasureChoice::Weights(weights))
    }

    fn resolve(&self, ifs: &AffineIFS, tol: &Tolerances) -> Result<BernoulliMeasure> {
        match self {
            MeasureChoice::Kaenmaki => kaenmaki_measure(ifs),
            MeasureChoice::Permutation(p) => {
                let s0 = full_dimension(ifs, tol)?.s0;
                mu_d_at(ifs, p, s0)
            }
            MeasureChoice::Weights(w) => {
                if w.len() != ifs.len() {
                    return Err(Error::validation(
                        None,
                        format!("{} weights for {} maps", w.len(), ifs.len()),
                    ));
                }
                BernoulliMeasure::new(w.clone())
            }
        }
    }
}

fn require_hole(sys: &LoadedSystem, command: &str) -> Result<HoleSpec> {
    sys.hole
        .clone()
        .ok_or_else(|| Error::validation(None, format!("`{command}` needs a [hole] section")))
}

fn label(p: &Permutation) -> String {
    p.entries().iter().map(|e| e.to_string()).collect::<Vec<_>>().join("")
}

pub fn dim(sys: &LoadedSystem) -> Result<CommandOutput> {
    let full = full_dimension(&sys.ifs, &sys.tolerances)?;
    let mut table = Table::new(["quantity", "permutation", "value", "capped"]);
    table.push(vec!["s0".into(), "all".into(), full.s0.into(), full.capped.into()]);
    table.push(vec![
        "dimension".into(),
        "all".into(),
        full.dimension.min(sys.ifs.dim() as f64).into(),
        full.capped.into(),
    ]);
    for row in &full.per_permutation {
        table.push(vec![
            "s0_d".into(),
            row.permutation.to_string().into(),
            row.root.into(),
            row.capped.into(),
        ]);
    }
    let result = json!({
        "dimension": full.dimension,
        "s0": full.s0,
        "capped": full.capped,
        "kind": full.kind,
        "diagonal": sys.ifs.is_diagonal(),
        "same_order": sys.ifs.is_same_order(),
        "per_permutation": full.per_permutation,
    });
    CommandOutput::new(table, result)
}

fn hole_at(spec: &HoleSpec, q: usize) -> Result<Word> {
    spec.prefix(q)
}

pub fn survivor(sys: &LoadedSystem, q: usize) -> Result<CommandOutput> {
    let spec = require_hole(sys, "survivor")?;
    let hole = hole_at(&spec, q)?;
    let sd = survivor_dimension(&sys.ifs, &hole, &sys.tolerances)?;
    let mut table = Table::new(["quantity", "permutation", "value", "capped"]);
    table.push(vec!["t_q".into(), "all".into(), sd.dimension.into(), sd.capped.into()]);
    for row in &sd.per_permutation {
        table.push(vec![
            "t_q_d".into(),
            row.permutation.to_string().into(),
            row.root.into(),
            row.capped.into(),
        ]);
    }
    let result = json!({
        "q": q,
        "hole": hole.to_string(),
        "dimension": sd.dimension,
        "capped": sd.capped,
        "per_permutation": sd.per_permutation,
    });
    CommandOutput::new(table, result)
}

pub fn escape(
    sys: &LoadedSystem,
    measure: &MeasureChoice,
    q_range: RangeInclusive<usize>,
) -> Result<CommandOutput> {
    let spec = require_hole(sys, "escape")?;
    let m = measure.resolve(&sys.ifs, &sys.tolerances)?;
    let opts = sys.tolerances.perron();
    let mut table = Table::new(["q", "hole", "mass", "escape_rate"]);
    let mut rows = Vec::new();
    for q in q_range {
        let hole = hole_at(&spec, q)?;
        let mass = m.cylinder_mass(&hole)?;
        let rate = m.escape_rate(&hole, &opts)?;
        table.push(vec![q.into(), hole.to_string().into(), mass.into(), rate.into()]);
        rows.push(json!({ "q": q, "hole": hole.to_string(), "mass": mass, "escape_rate": rate }));
    }
    CommandOutput::new(table, json!({ "weights": m.weights(), "rows": rows }))
}

pub fn pressure_curve(
    sys: &LoadedSystem,
    points: usize,
    q: Option<usize>,
    svg: bool,
) -> Result<CommandOutput> {
    if points < 2 {
        return Err(Error::validation(None, "--points must be at least 2"));
    }
    let depth = sys.tolerances.depth_for(sys.ifs.len());
    let full = if sys.ifs.is_diagonal() {
        PressureFunction::full(&sys.ifs)?
    } else {
        PressureFunction::general(&sys.ifs, None, depth)?
    };
    let hole = match (&sys.hole, q) {
        (Some(spec), Some(q)) => Some(hole_at(spec, q)?),
        (Some(spec), None) => Some(hole_at(spec, spec.max_depth().unwrap_or(sys.scan.q_max).min(sys.scan.q_max))?),
        (None, _) => None,
    };
    let reduced = hole
        .as_ref()
        .map(|h| {
            if sys.ifs.is_diagonal() {
                PressureFunction::reduced(&sys.ifs, h)
            } else {
                PressureFunction::general(&sys.ifs, Some(h), depth)
            }
        })
        .transpose()?
        .map(|f| f.with_perron(sys.tolerances.perron()));
    let d = sys.ifs.dim() as f64;
    let mut table = Table::new(["s", "pressure", "reduced_pressure"]);
    let mut p_series = Vec::with_capacity(points);
    let mut q_series = Vec::new();
    for i in 0..points {
        let s = d * i as f64 / (points - 1) as f64;
        let p = full.eval(s)?;
        let pq = reduced.as_ref().map(|f| f.eval(s)).transpose()?;
        p_series.push((s, p));
        if let Some(v) = pq {
            q_series.push((s, v));
        }
        table.push(vec![s.into(), p.into(), pq.into()]);
    }
    let result = json!({
        "kind": full.kind(),
        "hole": hole.as_ref().map(|h| h.to_string()),
        "s": p_series.iter().map(|p| p.0).collect::<Vec<_>>(),
        "pressure": p_series.iter().map(|p| p.1).collect::<Vec<_>>(),
        "reduced_pressure": q_series.iter().map(|p| p.1).collect::<Vec<_>>(),
    });
    let mut out = CommandOutput::new(table, result)?;
    if svg {
        let mut series: Vec<(&str, &[(f64, f64)])> = vec![("P(s)", &p_series)];
        if !q_series.is_empty() {
            series.push(("P_q(s)", &q_series));
        }
        out.svg = Some(crate::output::svg_plot("pressure curves", &series));
    }
    Ok(out)
}

pub fn deficit(sys: &LoadedSystem, q_range: RangeInclusive<usize>) -> Result<CommandOutput> {
    let spec = require_hole(sys, "deficit")?;
    let report = deficit_scan(&sys.ifs, &spec, q_range, &sys.tolerances)?;
    let mut header: Vec<String> = [
        "q",
        "hole",
        "t_q",
        "deficit",
        "denominator",
        "ratio",
        "ratio_inverse_z",
        "predicted_limit",
        "periodic",
        "period",
        "precision_warning",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for m in &report.maximizing {
        let l = label(&m.permutation);
        header.push(format!("mass_d{l}"));
        header.push(format!("ratio_d{l}"));
    }
    let mut table = Table::new(header);
    for row in &report.rows {
        let mut cells: Vec<Cell> = vec![
            row.q.into(),
            row.hole.clone().into(),
            row.t_q.into(),
            row.deficit.into(),
            row.denominator.into(),
            row.ratio.into(),
            row.ratio_inverse_z.into(),
            row.predicted_limit.into(),
            report.periodic.into(),
            report.period.into(),
            row.precision_warning.into(),
        ];
        for p in &row.per_permutation {
            cells.push(p.mass.into());
            cells.push(p.ratio.into());
        }
        table.push(cells);
    }
    CommandOutput::new(table, &report)
}

pub fn fp_ratio(
    sys: &LoadedSystem,
    measure: &MeasureChoice,
    q_range: RangeInclusive<usize>,
) -> Result<CommandOutput> {
    let spec = require_hole(sys, "fp-ratio")?;
    let m = measure.resolve(&sys.ifs, &sys.tolerances)?;
    let report = fp_ratio_scan(&m, &spec, q_range, &sys.tolerances)?;
    let mut table = Table::new([
        "q",
        "hole",
        "mass",
        "escape_rate",
        "ratio",
        "predicted_limit",
        "precision_warning",
    ]);
    for row in &report.rows {
        table.push(vec![
            row.q.into(),
            row.hole.clone().into(),
            row.mass.into(),
            row.escape_rate.into(),
            row.ratio.into(),
            report.predicted_limit.into(),
            row.precision_warning.into(),
        ]);
    }
    CommandOutput::new(table, json!({ "weights": m.weights(), "table": report }))
}

/// Identity checks bound: pressure gap against escape rate.
pub const GAP_TOL: f64 = 1e-12;

#[derive(Serialize)]
struct CheckRow {
    check: &'static str,
    permutation: String,
    q: Option<usize>,
    lhs: f64,
    rhs: f64,
    discrepancy: f64,
    passed: bool,
}

/// The built-in identity suite over every maximizing permutation and every
/// `q` in range. The hole defaults to the fixed point of symbol 1.
pub fn verify(sys: &LoadedSystem, q_range: RangeInclusive<usize>) -> Result<CommandOutput> {
    let ifs = &sys.ifs;
    let tol = &sys.tolerances;
    ifs.is_diagonal()
        .then_some(())
        .ok_or_else(|| Error::domain("`verify` needs a diagonal system"))?;
    let spec = match &sys.hole {
        Some(h) => h.clone(),
        None => HoleSpec::periodic(Word::new(&[1], ifs.len())?)?,
    };
    let q_range = match spec.max_depth() {
        Some(max) => *q_range.start()..=(*q_range.end()).min(max),
        None => q_range,
    };
    let s0 = full_dimension(ifs, tol)?.s0;
    let opts = tol.perron();
    let mut checks = Vec::new();
    for perm in maximizing_permutations(ifs, s0)? {
        let mu = mu_d_at(ifs, &perm, s0)?;
        for q in q_range.clone() {
            let hole = spec.prefix(q)?;
            let aut = AvoidanceAutomaton::new(&hole)?;
            let weights: Vec<f64> = survivordim_core::potential::a_vector(ifs, &perm, s0)?
                .into_iter()
                .map(f64::exp)
                .collect();
            let lhs = -survivordim_core::avoidance::reduced_growth_rate(&aut, &weights, &opts)?;
            let rhs = mu.escape_rate(&hole, &opts)?;
            checks.push(CheckRow {
                check: "pressure_gap_identity",
                permutation: perm.to_string(),
                q: Some(q),
                lhs,
                rhs,
                discrepancy: (lhs - rhs).abs(),
                passed: (lhs - rhs).abs() <= GAP_TOL,
            });
        }
        let z = match z_constant_at(ifs, &perm, s0) {
            Ok(z) => (z.value, z.finite_difference),
            Err(Error::Internal(_)) => (f64::NAN, f64::NAN),
            Err(other) => return Err(other),
        };
        let discrepancy = (z.0 - z.1).abs();
        checks.push(CheckRow {
            check: "z_constant",
            permutation: perm.to_string(),
            q: None,
            lhs: z.0,
            rhs: z.1,
            discrepancy,
            passed: discrepancy <= Z_AGREEMENT * z.0.abs().max(1.0),
        });
        let report = derivative_relation_check(ifs, &perm, &spec, q_range.clone(), tol)?;
        for row in &report.rows {
            checks.push(CheckRow {
                check: "derivative_relation",
                permutation: perm.to_string(),
                q: Some(row.q),
                lhs: row.ratio,
                rhs: report.target,
                discrepancy: row.relative_error,
                passed: row.ratio.is_finite() && row.in_bracket,
            });
        }
    }
    let mut table = Table::new(["check", "permutation", "q", "lhs", "rhs", "discrepancy", "passed"]);
    for c in &checks {
        table.push(vec![
            c.check.into(),
            c.permutation.clone().into(),
            c.q.into(),
            c.lhs.into(),
            c.rhs.into(),
            c.discrepancy.into(),
            c.passed.into(),
        ]);
    }
    let passed = checks.iter().all(|c| c.passed);
    let mut out = CommandOutput::new(
        table,
        json!({ "hole": spec.describe(), "s0": s0, "passed": passed, "checks": checks }),
    )?;
    out.passed = passed;
    Ok(out)
}
