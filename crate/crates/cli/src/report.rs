//! Deterministic report rendering. The canonical section is byte-identical
//! across runs of the same scenario: maps are sorted (serde_json's default
//! map is a BTreeMap), lists are emitted in canonical order by the
//! producers, big integers are rendered as decimal strings, and timing
//! lives outside the canonical section.

use num_bigint::BigInt;
use serde_json::{json, Map, Value};

use frobset_core::frobmod::{FgModule, ModElement};
use frobset_core::fsets::{BoundedLatticeCoset, ExponentSet, GrouplessFSet};
use frobset_core::matrix::IntMatrix;
use frobset_core::recsolve::{Certificate, CompletenessStatus, StatusTag};

#[derive(Debug, Clone)]
pub struct Report {
    pub canonical: Value,
    pub elapsed_ms: u128,
}

impl Report {
    pub fn new(canonical: Value) -> Self {
        Report { canonical, elapsed_ms: 0 }
    }

    /// The canonical section only, compact. This is the determinism surface.
    pub fn canonical_bytes(&self) -> String {
        serde_json::to_string(&self.canonical).expect("serializable value")
    }

    /// Full report with metadata, pretty-printed.
    pub fn render(&self) -> String {
        let full = json!({
            "canonical": self.canonical,
            "meta": { "elapsed_ms": self.elapsed_ms as u64 },
        });
        let mut s = serde_json::to_string_pretty(&full).expect("serializable value");
        s.push('\n');
        s
    }
}

pub fn bigint_json(v: &BigInt) -> Value {
    Value::String(v.to_string())
}

pub fn bigvec_json(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(bigint_json).collect())
}

/// Elements render in the scenario literal syntax `([free], [torsion])`.
pub fn element_json(e: &ModElement) -> Value {
    let free: Vec<String> = e.free.iter().map(|x| x.to_string()).collect();
    let tor: Vec<String> = e.tor.iter().map(|x| x.to_string()).collect();
    Value::String(format!("([{}], [{}])", free.join(", "), tor.join(", ")))
}

pub fn matrix_json(m: &IntMatrix) -> Value {
    Value::Array((0..m.rows()).map(|r| bigvec_json(&m.row(r))).collect())
}

pub fn fset_json(fs: &GrouplessFSet) -> Value {
    json!({
        "base": element_json(&fs.base),
        "terms": fs.terms.iter().map(|(a, d)| json!({
            "point": element_json(a),
            "step": d,
        })).collect::<Vec<_>>(),
    })
}

pub fn coset_json(c: &BoundedLatticeCoset) -> Value {
    json!({
        "offset": bigvec_json(&c.offset),
        "lattice_rows": matrix_json(&c.lattice),
        "lower_bounds": bigvec_json(&c.lower_bounds),
    })
}

pub fn exponent_set_json(es: &ExponentSet) -> Value {
    json!({
        "dim": es.dim,
        "explicit": es.explicit.iter().map(|t| bigvec_json(t)).collect::<Vec<_>>(),
        "cosets": es.cosets.iter().map(coset_json).collect::<Vec<_>>(),
    })
}

fn certificate_json(c: &Certificate) -> Value {
    match c {
        Certificate::GrowthCutoff { coordinate, cutoff } => json!({
            "type": "growth_cutoff", "coordinate": coordinate, "cutoff": cutoff,
        }),
        Certificate::PeriodicCoordinate { coordinate, preperiod, period } => json!({
            "type": "periodic_coordinate", "coordinate": coordinate,
            "preperiod": preperiod, "period": period,
        }),
        Certificate::DiagonalFamily { first, second } => json!({
            "type": "diagonal_family", "first": first, "second": second,
        }),
        Certificate::SieveSummary {
            modulus,
            preperiod,
            period,
            excluded,
            total,
            excluded_samples,
        } => json!({
            "type": "sieve_summary", "modulus": modulus, "preperiod": preperiod,
            "period": period, "excluded_classes": excluded, "total_classes": total,
            "excluded_class_samples": excluded_samples,
        }),
        Certificate::SieveEmpty { moduli } => json!({
            "type": "sieve_empty", "moduli": moduli,
        }),
    }
}

pub fn status_json(status: &CompletenessStatus) -> Value {
    json!({
        "tag": match status.tag {
            StatusTag::Complete => "complete",
            StatusTag::Bounded => "bounded",
        },
        "bound": status.bound,
        "certificates": status.certificates.iter().map(certificate_json).collect::<Vec<_>>(),
    })
}

pub fn points_json(points: impl IntoIterator<Item = ModElement>) -> Value {
    Value::Array(points.into_iter().map(|p| element_json(&p)).collect())
}

/// Assembles the canonical section.
pub fn canonical(kind: &str, scenario_text: &str, results: Value) -> Value {
    let mut map = Map::new();
    map.insert("kind".into(), Value::String(kind.into()));
    map.insert("scenario".into(), Value::String(scenario_text.into()));
    map.insert("results".into(), results);
    Value::Object(map)
}

/// Validation report of a module, as stable JSON.
pub fn validation_json(module: &FgModule) -> Value {
    let report = module.validate();
    let ax = |c: &frobset_core::frobmod::AxiomCheck| {
        json!({ "passed": c.passed, "detail": c.detail })
    };
    json!({
        "axiom_ii": ax(&report.axiom_ii),
        "axiom_iii": ax(&report.axiom_iii),
        "axiom_iv": ax(&report.axiom_iv),
    })
}
