//! Scenario dispatch: every kind maps onto the owning library call and a
//! canonical report.

use std::time::Instant;

use num_bigint::BigInt;
use serde_json::json;

use frobset_core::drinfeld::{sharp_scenario, two_term_survey, DrinfeldModule, TwistedPoly};
use frobset_core::error::Error as CoreError;
use frobset_core::fq::{FqField, FqPoly, FqRat};
use frobset_core::fsets::{points_up_to_fset, verify_f_invariant, FSet, GrouplessFSet};
use frobset_core::orbit::intersect_orbit_subgroup;
use frobset_core::recsolve::{detect_period, solve_congruences, solve_equations};
use frobset_core::torus::{
    cluster_as_fsets, cluster_fsets, closure_check, intersect_hypersurface, IndependenceCert,
    LinearRelation, TorusSubgroup,
};

use crate::report::{
    canonical, coset_json, element_json, exponent_set_json, fset_json, matrix_json, points_json,
    status_json, validation_json, Report,
};
use crate::scenario::{Document, RecMode, Scenario};

#[derive(Debug)]
pub enum RunError {
    /// Input was structurally fine but the computation refused to run
    /// (e.g. a failed axiom). Exit code 1.
    Refused(String),
    /// Anything else that stops a run.
    Failed(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Refused(m) => write!(f, "refused: {m}"),
            RunError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for RunError {}

fn lift(e: CoreError) -> RunError {
    match e {
        CoreError::Refused(m) => RunError::Refused(m),
        other => RunError::Failed(other.to_string()),
    }
}

/// Optional command-line overrides for solver knobs.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n_max: Option<u64>,
    pub sieve: Option<Vec<u64>>,
    pub box_bound: Option<i64>,
}

/// Runs a typed scenario and produces the deterministic report.
pub fn run_scenario(
    doc: &Document,
    scenario: &Scenario,
    overrides: &Overrides,
) -> Result<Report, RunError> {
    let start = Instant::now();
    let echo = doc.serialize();
    let canonical_value = match scenario {
        Scenario::OrbitIntersect(sc) => {
            let mut params = sc.solver.clone();
            if let Some(n) = overrides.n_max {
                params.n_max = n;
            }
            if let Some(s) = &overrides.sieve {
                params.sieve_moduli = s.clone();
            }
            let out = intersect_orbit_subgroup(&sc.module, &sc.orbit, &sc.generators, &params)
                .map_err(lift)?;
            let results = json!({
                "validation": validation_json(&sc.module),
                "gamma1_rows": matrix_json(&out.gamma1),
                "fsets": out.fsets.iter().map(fset_json).collect::<Vec<_>>(),
                "residual": out.residual.iter().map(|r| json!({
                    "coset": coset_json(&r.coset),
                    "orbit_base": element_json(&r.orbit_base),
                    "orbit_points": r.orbit_points.iter().map(element_json).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
                "components": out.components.iter().map(|c| json!({
                    "torsion": c.torsion,
                    "exponents": exponent_set_json(&c.exponents),
                })).collect::<Vec<_>>(),
                "status": status_json(&out.status),
            });
            canonical("orbit-intersect", &echo, results)
        }
        Scenario::Fset(sc) => {
            let fset = FSet {
                groupless: GrouplessFSet::new(sc.base.clone(), sc.terms.clone())
                    .map_err(lift)?,
                subgroup: sc.subgroup.clone(),
                f_invariant: sc.f_invariant,
            };
            let bound = overrides
                .box_bound
                .map(|b| b.max(0) as u64)
                .unwrap_or(sc.orbit_bound);
            let invariance_verified = if sc.subgroup.is_empty() {
                None
            } else {
                Some(verify_f_invariant(&sc.module, &sc.subgroup).map_err(lift)?)
            };
            if sc.f_invariant && invariance_verified == Some(false) {
                return Err(RunError::Refused(
                    "f_invariant flag set but F does not preserve the subgroup".into(),
                ));
            }
            let points = points_up_to_fset(&sc.module, &fset, bound, sc.subgroup_box);
            let results = json!({
                "orbit_bound": bound,
                "subgroup_box": sc.subgroup_box,
                "point_count": points.len(),
                "points": points_json(points),
                "f_invariant_verified": invariance_verified,
            });
            canonical("fset", &echo, results)
        }
        Scenario::RecSolve(sc) => {
            let results = match &sc.mode {
                RecMode::Period { modulus } => {
                    let profile = detect_period(&sc.min_poly, *modulus).map_err(lift)?;
                    json!({
                        "mode": "period",
                        "modulus": profile.modulus,
                        "preperiod": profile.preperiod,
                        "period": profile.period,
                    })
                }
                RecMode::Congruences(cs) => {
                    let es = solve_congruences(&sc.min_poly, cs, sc.variables).map_err(lift)?;
                    json!({
                        "mode": "congruences",
                        "solutions": exponent_set_json(&es),
                        "status": { "tag": "complete", "bound": null, "certificates": [] },
                    })
                }
                RecMode::Equations(forms) => {
                    let n_max = overrides.n_max.unwrap_or(sc.solver.n_max);
                    let sieve = overrides
                        .sieve
                        .clone()
                        .unwrap_or_else(|| sc.solver.sieve_moduli.clone());
                    let (es, status) =
                        solve_equations(&sc.min_poly, forms, sc.variables, n_max, &sieve)
                            .map_err(lift)?;
                    json!({
                        "mode": "equations",
                        "solutions": exponent_set_json(&es),
                        "status": status_json(&status),
                    })
                }
            };
            canonical("recsolve", &echo, results)
        }
        Scenario::DrinfeldSurvey(sc) => {
            let field = match &sc.field_modulus {
                Some(m) => {
                    let (p, e) = frobset_core::fq::prime_power(sc.q)
                        .ok_or_else(|| RunError::Failed(format!("{} is not a prime power", sc.q)))?;
                    let want = e as usize * sc.coeff_degree;
                    if m.len() != want + 1 {
                        return Err(RunError::Failed(format!(
                            "field_modulus must have degree {want} for F_{{{}^{}}}",
                            sc.q, sc.coeff_degree
                        )));
                    }
                    FqField::with_modulus(p, m.clone()).map_err(lift)?
                }
                None => FqField::of_order_power(sc.q, sc.coeff_degree).map_err(lift)?,
            };
            let coeffs: Vec<_> = sc
                .phi_t
                .iter()
                .map(|c| field.from_coeffs(c))
                .collect::<Result<_, _>>()
                .map_err(lift)?;
            let phi_t = TwistedPoly::new(field.clone(), sc.q, coeffs).map_err(lift)?;
            let module = DrinfeldModule::new(field.clone(), sc.q, phi_t).map_err(lift)?;
            let found = two_term_survey(&module, sc.deg_bound).map_err(lift)?;
            let rendered: Vec<String> = found
                .iter()
                .map(|a| {
                    let parts: Vec<String> =
                        a.iter().map(|c| field.format_elem(c)).collect();
                    format!("[{}]", parts.join(", "))
                })
                .collect();
            let results = json!({
                "q": sc.q,
                "deg_bound": sc.deg_bound,
                "phi_t": module.phi_t.format(),
                "two_term_count": rendered.len(),
                "two_term_polys": rendered,
            });
            canonical("drinfeld-survey", &echo, results)
        }
        Scenario::DrinfeldSharp(sc) => {
            let report = sharp_scenario(sc.q, sc.deg_bound).map_err(lift)?;
            let field = FqField::of_order_power(sc.q, 2).map_err(lift)?;
            let results = json!({
                "q": report.q,
                "deg_bound": report.deg_bound,
                "lambda": field.format_elem(&report.lambda),
                "total_points": report.total_points,
                "on_x_count": report.on_x_count,
                "even_subring_count": report.even_subring_count,
                "on_x_equals_even_subring": report.on_x_equals_even_subring,
                "phi_t2_preserves_x": report.phi_t2_preserves_x,
                "phi_t_moves_generator_off_x": report.phi_t_moves_generator_off_x,
            });
            canonical("drinfeld-sharp", &echo, results)
        }
        Scenario::GmIntersect(sc) => {
            let field = match &sc.modulus {
                Some(m) => FqField::with_modulus(sc.p, m.clone()).map_err(lift)?,
                None => FqField::new(sc.p, sc.degree).map_err(lift)?,
            };
            let build_rat = |spec: &(Vec<Vec<u64>>, Vec<Vec<u64>>)| -> Result<FqRat, RunError> {
                let num = FqPoly::normalized(
                    &field,
                    spec.0
                        .iter()
                        .map(|c| field.from_coeffs(c))
                        .collect::<Result<_, _>>()
                        .map_err(lift)?,
                );
                let den = FqPoly::normalized(
                    &field,
                    spec.1
                        .iter()
                        .map(|c| field.from_coeffs(c))
                        .collect::<Result<_, _>>()
                        .map_err(lift)?,
                );
                FqRat::new(&field, num, den).map_err(lift)
            };
            let generators: Vec<Vec<FqRat>> = sc
                .generators
                .iter()
                .map(|g| g.iter().map(&build_rat).collect::<Result<Vec<_>, _>>())
                .collect::<Result<_, _>>()?;
            let group =
                TorusSubgroup::new(field.clone(), sc.ambient, generators).map_err(lift)?;
            let relation = LinearRelation {
                coeffs: sc
                    .relation_coeffs
                    .iter()
                    .map(&build_rat)
                    .collect::<Result<_, _>>()?,
                target: build_rat(&sc.relation_target)?,
            };
            let box_bound = overrides.box_bound.unwrap_or(sc.box_bound);
            let q_action = field.order();
            let solutions =
                intersect_hypersurface(&group, &relation, box_bound).map_err(lift)?;
            let closure = if relation.is_constant() {
                Some(closure_check(&solutions, q_action, box_bound))
            } else {
                None
            };
            if closure == Some(false) {
                return Err(RunError::Failed(
                    "characteristic-p closure violated; the search is inconsistent".into(),
                ));
            }
            let cluster = cluster_fsets(&solutions, q_action, box_bound);
            let (orbit_fsets, line_fsets) = cluster_as_fsets(&cluster, q_action, group.rank());
            let independence = match group.independence().map_err(lift)? {
                IndependenceCert::Independent { valuation_rank } => {
                    json!({ "certified": true, "valuation_rank": valuation_rank })
                }
                IndependenceCert::Unknown => json!({ "certified": false }),
            };
            let gamma_str = |e: &[i64]| -> Result<String, RunError> {
                let val = group.gamma_element(e).map_err(lift)?;
                let parts: Vec<String> = val.iter().map(|x| x.format(&field)).collect();
                Ok(format!("({})", parts.join(", ")))
            };
            let mut orbit_entries = Vec::new();
            for (o, fs) in cluster.orbits.iter().zip(&orbit_fsets) {
                orbit_entries.push(json!({
                    "base_exponents": o.base,
                    "base_element": gamma_str(&o.base)?,
                    "points_in_box": o.points.len(),
                    "exponent_fset": fset_json(fs),
                }));
            }
            let mut line_entries = Vec::new();
            for (l, fs) in cluster.lines.iter().zip(&line_fsets) {
                line_entries.push(json!({
                    "offset": l.offset,
                    "direction": l.direction,
                    "points_in_box": l.points.len(),
                    "exponent_fset_base": element_json(&fs.groupless.base),
                    "f_invariant": fs.f_invariant,
                }));
            }
            let results = json!({
                "box": box_bound,
                "q_action": q_action,
                "solutions": solutions,
                "solution_count": solutions.len(),
                "closure_check": closure,
                "independence": independence,
                "orbits": orbit_entries,
                "lattice_lines": line_entries,
                "unexplained": cluster.unexplained,
            });
            canonical("gm-intersect", &echo, results)
        }
    };
    let mut report = Report::new(canonical_value);
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Deterministic self-test: replays the pipeline-vs-brute-force property on
/// `count` sampled instances. Returns the failure count.
pub fn selftest(seed: u64, count: u32, verbose: bool) -> u32 {
    use frobset_core::orbit::{OrbitSum, SolverParams};
    use frobset_core::sampling::{
        sample_element, sample_generators, sample_module, SplitMix64,
    };

    let mut rng = SplitMix64::new(seed);
    let box_bound = 24u64;
    let params = SolverParams { n_max: box_bound, ..SolverParams::default() };
    let mut failures = 0;
    let mut ran = 0;
    while ran < count {
        let module = if rng.chance(1, 2) {
            sample_module(&mut rng, 3, 0, 9)
        } else {
            sample_module(&mut rng, 2, 1, 9)
        };
        if !module.validate().axiom_iii.passed {
            continue;
        }
        ran += 1;
        let k = rng.range_usize(1, 2);
        let terms: Vec<_> = (0..k)
            .map(|_| (sample_element(&mut rng, &module, 3), rng.range_i64(1, 2) as u64))
            .collect();
        let orbit = OrbitSum::new(sample_element(&mut rng, &module, 3), terms).unwrap();
        let gen_count = rng.range_usize(1, 2);
        let generators = sample_generators(&mut rng, &module, gen_count, 4);
        let out = match intersect_orbit_subgroup(&module, &orbit, &generators, &params) {
            Ok(out) => out,
            Err(e) => {
                println!("instance {ran}: pipeline error: {e}");
                failures += 1;
                continue;
            }
        };
        let mut mismatches = 0u64;
        let mut members = 0u64;
        let deltas: Vec<u64> = orbit.terms.iter().map(|(_, d)| *d).collect();
        let mut exps = vec![0u64; k];
        'outer: loop {
            let x_big: Vec<BigInt> = exps.iter().map(|&x| BigInt::from(x)).collect();
            let member = out.exponent_member(&x_big).unwrap_or(false);
            let divisible = exps.iter().zip(&deltas).all(|(x, d)| x % d == 0);
            let direct = if divisible {
                let mut point = orbit.base.clone();
                for (i, (p, _)) in orbit.terms.iter().enumerate() {
                    point = module.add(&point, &module.frob_power(p, exps[i]));
                }
                module.subgroup_contains(&generators, &point).unwrap_or(false)
            } else {
                false
            };
            if member != direct {
                mismatches += 1;
            }
            if direct {
                members += 1;
            }
            let mut i = 0;
            loop {
                if i == k {
                    break 'outer;
                }
                exps[i] += 1;
                if exps[i] <= box_bound {
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
        }
        if mismatches > 0 {
            failures += 1;
        }
        if verbose || mismatches > 0 {
            println!(
                "instance {ran}: k={k} box={box_bound} members={members} mismatches={mismatches} status={:?}",
                out.status.tag
            );
        }
    }
    failures
}
