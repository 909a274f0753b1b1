//! The staged workflow: validate → quotient → dynamics → K-theory.
//!
//! Every stage lands in the report with a status. A failed stage never
//! aborts the run; stages that depend on it are marked skipped instead.

use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};
use solenoidk::dynamics::{
    fix_count_oracle, fix_count_rose, forward_expansive_witness, wieler_axiom_witness, zeta_series,
    CoverSpec, DynamicsError,
};
use solenoidk::germ::{
    circle_cover_degree, covering_time, is_hausdorff, is_local_homeomorphism, k0_constant,
    periodic_germs, shift_equivalence_check,
};
use solenoidk::ktheory::{k_report, MODEL_BOUNDARY, MODEL_GERM, MODEL_WRONG_WAY};
use solenoidk::{EntropyError, GermError, QuotientPresentation, SubstitutionSystem};

use crate::config::{Options, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const MODEL_SAMPLING: &str =
    "sampling: Wieler and expansiveness results are witnesses on finite samples, not proofs";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Skipped,
    /// A sampled search found no witness; not a refutation.
    Inconclusive,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageError {
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stage {
    pub status: StageStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<StageError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl Stage {
    fn ok(result: Value) -> Self {
        Stage {
            status: StageStatus::Ok,
            result: Some(result),
            error: None,
            reason: None,
        }
    }

    fn inconclusive(result: Value) -> Self {
        Stage {
            status: StageStatus::Inconclusive,
            ..Stage::ok(result)
        }
    }

    fn error(kind: &str, message: impl ToString, partial: Option<Value>) -> Self {
        Stage {
            status: StageStatus::Error,
            result: partial,
            error: Some(StageError {
                kind: kind.into(),
                message: message.to_string(),
            }),
            reason: None,
        }
    }

    fn skipped(reason: &str) -> Self {
        Stage {
            status: StageStatus::Skipped,
            result: None,
            error: None,
            reason: Some(reason.into()),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == StageStatus::Ok
    }

    /// Field of the result object, if any.
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.result.as_ref()?.get(key)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stages {
    pub validation: Stage,
    pub quotient: Stage,
    pub shift_equivalence: Stage,
    pub zeta: Stage,
    pub wieler: Stage,
    pub expansive: Stage,
    pub ktheory: Stage,
}

impl Stages {
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &Stage)> {
        [
            ("validation", &self.validation),
            ("quotient", &self.quotient),
            ("shift_equivalence", &self.shift_equivalence),
            ("zeta", &self.zeta),
            ("wieler", &self.wieler),
            ("expansive", &self.expansive),
            ("ktheory", &self.ktheory),
        ]
        .into_iter()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub edges: Vec<String>,
    pub substitution: Vec<(String, String)>,
    pub orientation: &'static str,
    pub options: Options,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub config: ConfigEcho,
    pub stages: Stages,
    pub model_assumptions: Vec<&'static str>,
    pub exit_status: i32,
}

impl Report {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "solenoidk {} report for {}\n",
            self.tool_version,
            self.config
                .substitution
                .iter()
                .map(|(e, w)| format!("{e}->{w}"))
                .collect::<Vec<_>>()
                .join(", ")
        );
        for (name, stage) in self.stages.iter() {
            out.push_str(&render_stage(name, stage));
        }
        out.push_str("model assumptions:\n");
        for m in &self.model_assumptions {
            out.push_str(&format!("  - {m}\n"));
        }
        out
    }
}

/// `name: status` followed by the result as indented `key: value` lines.
pub fn render_stage(name: &str, stage: &Stage) -> String {
    let status = serde_json::to_value(stage.status).expect("status serializes");
    let mut out = format!("{name}: {}\n", status.as_str().unwrap_or_default());
    if let Some(e) = &stage.error {
        out.push_str(&format!("  error ({}): {}\n", e.kind, e.message));
    }
    if let Some(r) = &stage.reason {
        out.push_str(&format!("  reason: {r}\n"));
    }
    if let Some(v) = &stage.result {
        render_value(&mut out, v, 1);
    }
    out
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.iter().all(|x| !x.is_object() && is_flat(x)),
        Value::Object(_) => false,
        _ => true,
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => format!("[{}]", a.iter().map(inline).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

fn render_value(out: &mut String, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if is_flat(x) {
                    out.push_str(&format!("{pad}{k}: {}\n", inline(x)));
                } else {
                    out.push_str(&format!("{pad}{k}:\n"));
                    render_value(out, x, depth + 1);
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                if is_flat(x) {
                    out.push_str(&format!("{pad}- {}\n", inline(x)));
                } else {
                    out.push_str(&format!("{pad}-\n"));
                    render_value(out, x, depth + 1);
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", inline(other))),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("stage result serializes")
}

fn germ_error_kind(e: &GermError) -> &'static str {
    match e {
        GermError::InadmissibleGerm(_) => "InadmissibleGerm",
        GermError::NoFlattening { .. } => "NoFlattening",
        GermError::IdentityViolation { .. } => "IdentityViolation",
        GermError::NeverCovers { .. } => "NeverCovers",
    }
}

pub fn validation_stage(sys: &SubstitutionSystem, opts: &Options) -> Stage {
    let report = sys.validate();
    let base = json!({
        "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "mixing": sys.is_mixing(),
        "substitution_matrix": to_value(&sys.substitution_matrix()),
    });
    if !report.is_ok() {
        return Stage::error(
            "ValidationFailed",
            "system violates the pre-solenoid conditions",
            Some(base),
        );
    }
    let width = solenoidk::poly::Q::new(1.into(), BigInt::from(10).pow(opts.entropy_digits));
    let mut result = base;
    match sys.entropy(&width) {
        Ok(h) => {
            result["entropy"] = to_value(&h);
            result["entropy"]["certified_by_sign_change"] =
                Value::Bool(h.certified_by_sign_change());
            Stage::ok(result)
        }
        Err(e) => {
            let kind = match e {
                EntropyError::PrecisionUnreachable(_) => "PrecisionUnreachable",
                EntropyError::NotExpanding => "NotExpanding",
            };
            Stage::error(kind, e, Some(result))
        }
    }
}

/// Germs, germ map, separation data and the flattening constant. An error
/// here only when `τ` never flattens; the combinatorial summary is kept.
pub fn quotient_stage(sys: &SubstitutionSystem) -> Stage {
    let pres = QuotientPresentation::new(sys);
    let name = |i: usize| pres.germs[i].render(sys);
    let covering: Option<Vec<(String, usize)>> = sys
        .edges()
        .map(|e| {
            covering_time(sys, e)
                .ok()
                .map(|n| (sys.label(e).to_string(), n))
        })
        .collect();
    let mut result = json!({
        "arcs": sys.labels().iter().map(ToString::to_string).collect::<Vec<_>>(),
        "germs": (0..pres.germs.len()).map(name).collect::<Vec<_>>(),
        "tau": (0..pres.germs.len()).map(|i| [name(i), name(pres.tau[i])]).collect::<Vec<_>>(),
        "non_separated": pres.nonsep.iter().map(|&(i, j)| [name(i), name(j)]).collect::<Vec<_>>(),
        "clusters": pres.clusters().iter()
            .map(|c| c.iter().map(|&i| name(i)).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "hausdorff": is_hausdorff(sys),
        "local_homeomorphism": is_local_homeomorphism(sys),
        "circle_degree": circle_cover_degree(sys),
        "periodic_germs": periodic_germs(sys).iter().map(|g| g.render(sys)).collect::<Vec<_>>(),
        "covering_times": covering,
        "k0_constant": Value::Null,
    });
    match k0_constant(sys) {
        Ok(k) => {
            result["k0_constant"] = json!(k.value());
            Stage::ok(result)
        }
        Err(e) => Stage::error(germ_error_kind(&e), e, Some(result)),
    }
}

pub fn shift_equivalence_stage(sys: &SubstitutionSystem, opts: &Options) -> Stage {
    match shift_equivalence_check(sys, opts.samples, opts.seed) {
        Ok(r) => {
            let mut v = to_value(&r);
            v["kind"] = json!("exact check on all germs and seeded points");
            Stage::ok(v)
        }
        Err(e) => Stage::error(germ_error_kind(&e), e, None),
    }
}

pub fn zeta_stage(sys: &SubstitutionSystem, opts: &Options) -> Stage {
    let z = zeta_series(sys, opts.zeta_max_n);
    let oracle: Vec<BigInt> = (1..=opts.zeta_max_n)
        .map(|n| fix_count_oracle(sys, n))
        .collect();
    let rose: Vec<String> = (1..=opts.zeta_max_n)
        .map(|n| fix_count_rose(sys, n).to_string())
        .collect();
    let agrees = oracle == z.counts;
    let mut v = to_value(&z);
    v["oracle_agrees"] = json!(agrees);
    v["rose_counts"] = json!(rose);
    if agrees {
        Stage::ok(v)
    } else {
        Stage::error(
            "OracleMismatch",
            "closed-form fixed-point counts disagree with the branch solver",
            Some(v),
        )
    }
}

pub fn wieler_stage(sys: &SubstitutionSystem, opts: &Options) -> Stage {
    match wieler_axiom_witness(sys, opts.k_max, opts.wieler_samples, opts.seed) {
        Ok(w) => {
            let mut v = to_value(&w);
            v["kind"] = json!("witness");
            Stage::ok(v)
        }
        Err(DynamicsError::NoWitnessFound { last_violation }) => Stage::inconclusive(json!({
            "kind": "no witness found",
            "last_violation": last_violation,
        })),
        Err(e) => Stage::error("Dynamics", e, None),
    }
}

pub fn expansive_stage(sys: &SubstitutionSystem, opts: &Options) -> Stage {
    let cover = CoverSpec::new(sys, opts.cover_level);
    let rep = forward_expansive_witness(sys, &cover, opts.n_max, opts.grid_density);
    let mut v = to_value(&rep);
    v["cover_cells"] = json!(cover.cell_count());
    if rep.all_separated() {
        v["kind"] = json!("witness");
        Stage::ok(v)
    } else {
        v["kind"] = json!("unseparated pairs remain");
        Stage::inconclusive(v)
    }
}

pub fn ktheory_stage(sys: &SubstitutionSystem, opts: &Options) -> Stage {
    match k_report(sys, opts.user_matrices()) {
        Ok(r) => Stage::ok(to_value(&r)),
        Err(e) => {
            let kind = match &e {
                solenoidk::ktheory::KError::NeedUserMatrices(_) => "NeedUserMatrices",
                solenoidk::ktheory::KError::NotFree => "NotFree",
                solenoidk::ktheory::KError::UserShape { .. } => "UserShape",
                solenoidk::ktheory::KError::Abelian(_) => "Abelian",
            };
            Stage::error(kind, e, None)
        }
    }
}

/// Runs every stage. Deterministic in `(config, seed)`; the independent
/// dynamics stages run concurrently but are merged in a fixed order.
pub fn run_pipeline(config: &RunConfig) -> Report {
    let sys = &config.system;
    let opts = &config.options;
    let validation = validation_stage(sys, opts);

    let stages = if validation.status == StageStatus::Error {
        let skip = || Stage::skipped("validation failed");
        Stages {
            validation,
            quotient: skip(),
            shift_equivalence: skip(),
            zeta: skip(),
            wieler: skip(),
            expansive: skip(),
            ktheory: skip(),
        }
    } else {
        let quotient = quotient_stage(sys);
        let flattened = quotient.is_ok();
        let needs_k0 = |f: &dyn Fn() -> Stage| {
            if flattened {
                f()
            } else {
                Stage::skipped("germ map does not flatten")
            }
        };
        let ((shift_equivalence, ktheory), (zeta, (wieler, expansive))) = rayon::join(
            || {
                rayon::join(
                    || needs_k0(&|| shift_equivalence_stage(sys, opts)),
                    || needs_k0(&|| ktheory_stage(sys, opts)),
                )
            },
            || {
                rayon::join(
                    || zeta_stage(sys, opts),
                    || rayon::join(|| wieler_stage(sys, opts), || expansive_stage(sys, opts)),
                )
            },
        );
        Stages {
            validation,
            quotient,
            shift_equivalence,
            zeta,
            wieler,
            expansive,
            ktheory,
        }
    };

    let exit_status = i32::from(stages.iter().any(|(_, s)| s.status == StageStatus::Error));
    Report {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION,
        config: ConfigEcho {
            edges: config.edges.clone(),
            substitution: config.rules.clone(),
            orientation: match config.orientation {
                solenoidk::Orientation::Preserving => "preserving",
                solenoidk::Orientation::Reversing => "reversing",
            },
            options: config.options.clone(),
        },
        stages,
        model_assumptions: vec![MODEL_GERM, MODEL_BOUNDARY, MODEL_WRONG_WAY, MODEL_SAMPLING],
        exit_status,
    }
}
