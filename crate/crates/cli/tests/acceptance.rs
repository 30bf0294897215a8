//! Acceptance suite: each test checks one exit criterion end to end and
//! prints one PASS line (run with `--nocapture` to see them).

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use frobset_cli::run::{run_scenario, Overrides};
use frobset_cli::scenario::{build_scenario, parse_document, Document};
use frobset_core::drinfeld::{sharp_scenario, two_term_survey, DrinfeldModule, TwistedPoly};
use frobset_core::fq::FqField;
use frobset_core::frobmod::{z_block, FgModule, IntPoly, ModElement};
use frobset_core::fsets::points_up_to;
use frobset_core::matrix::IntMatrix;
use frobset_core::orbit::{intersect_orbit_subgroup, OrbitSum, SolverParams};
use frobset_core::recsolve::detect_period;
use frobset_core::sampling::{sample_element, sample_generators, sample_module, SplitMix64};
use frobset_core::torus::{cluster_fsets, intersect_hypersurface, LinearRelation, TorusSubgroup};
use frobset_core::StatusTag;

fn pass(n: u32, name: &str) {
    println!("ACCEPTANCE {n} ({name}): PASS");
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn load(name: &str) -> Document {
    let path = corpus_dir().join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path:?}: {e}"));
    parse_document(&text).unwrap_or_else(|e| panic!("{path:?}: {e}"))
}

fn gm_module(q: i64) -> FgModule {
    FgModule::new(
        1,
        vec![],
        IntMatrix::from_rows(&[vec![q]]),
        IntMatrix::zero(0, 1),
        IntMatrix::zero(0, 0),
        IntPoly::from_i64(&[-q, 1]),
    )
    .unwrap()
}

/// Criterion 1: the z-relation identity. 100 random modules with free rank
/// <= 4, torsion rank <= 2, orders <= 12, deg f <= 4; for every n <= 300 the
/// z-expansion of F^n P equals iterated application of F, exactly.
#[test]
fn acceptance_1_z_relation_identity() {
    let mut rng = SplitMix64::new(0xacce901);
    for instance in 0..100 {
        let module = if rng.chance(1, 2) {
            sample_module(&mut rng, 4, 0, 12)
        } else {
            sample_module(&mut rng, 3, 2, 12)
        };
        let g = module.min_poly().degree();
        assert!(g <= 4, "sampler degree bound");
        let p = sample_element(&mut rng, &module, 4);
        let n_max = 300u64;
        let table = z_block(module.min_poly(), n_max);
        // F^j P for j < g.
        let mut fj = Vec::with_capacity(g);
        let mut cur = p.clone();
        for _ in 0..g {
            fj.push(cur.clone());
            cur = module.apply_f(&cur);
        }
        // Sequential oracle F^n P by repeated application.
        let mut seq = p.clone();
        for n in 0..=n_max {
            if n > 0 {
                seq = module.apply_f(&seq);
            }
            let mut via_z = module.zero();
            for (j, base) in fj.iter().enumerate() {
                let c = &table[j][n as usize];
                if !c.is_zero() {
                    via_z = module.add(&via_z, &module.scale(c, base));
                }
            }
            assert_eq!(via_z, seq, "instance {instance}, n = {n}");
        }
        // The public entry points agree as well (binary powering route).
        for n in [0u64, 1, 7, 63, 150, 300] {
            assert_eq!(module.frob_power_via_z(&p, n), module.frob_power(&p, n));
        }
    }
    pass(1, "z-relation identity on 100 random modules, n <= 300");
}

/// Brute-force period oracle (plain recursion on residues).
fn period_oracle(f: &IntPoly, modulus: u64, scan: usize) -> (u64, u64) {
    let g = f.degree();
    let alphas: Vec<u64> = f
        .alphas()
        .iter()
        .map(|a| a.mod_floor(&BigInt::from(modulus)).to_u64().unwrap())
        .collect();
    let mut rows: Vec<Vec<u64>> = (0..g)
        .map(|j| (0..g).map(|n| u64::from(n == j) % modulus).collect())
        .collect();
    for n in g..scan + 2 * g {
        for row in rows.iter_mut() {
            let mut acc: u128 = 0;
            for (l, &a) in alphas.iter().enumerate() {
                acc += a as u128 * row[n - g + l] as u128;
            }
            row.push((acc % modulus as u128) as u64);
        }
    }
    let state =
        |n: usize| -> Vec<u64> { rows.iter().flat_map(|r| r[n..n + g].iter().copied()).collect() };
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    for n in 0..scan {
        let s = state(n);
        if let Some(&n1) = seen.get(&s) {
            return (n1 as u64, (n - n1) as u64);
        }
        seen.insert(s, n);
    }
    panic!("no repetition within {scan} steps");
}

/// Criterion 2: periodicity detection matches brute force; the pinned
/// Fibonacci-mod-10 profile is (0, 60).
#[test]
fn acceptance_2_periodicity() {
    let fib = IntPoly::from_i64(&[-1, -1, 1]);
    let p = detect_period(&fib, 10).unwrap();
    assert_eq!((p.preperiod, p.period), (0, 60));
    assert_eq!(period_oracle(&fib, 10, 400), (0, 60));
    let mut rng = SplitMix64::new(0xacce902);
    for _ in 0..50 {
        let g = rng.range_usize(1, 3);
        let mut coeffs: Vec<i64> = (0..g).map(|_| rng.range_i64(-3, 3)).collect();
        coeffs.push(1);
        let f = IntPoly::from_i64(&coeffs);
        let n = rng.range_i64(2, 50) as u64;
        let got = detect_period(&f, n).unwrap();
        let scan = (5 * (got.preperiod + got.period) + 50) as usize;
        assert_eq!(
            (got.preperiod, got.period),
            period_oracle(&f, n, scan),
            "f = {coeffs:?}, N = {n}"
        );
    }
    pass(2, "period profiles match brute force (Fibonacci mod 10 = (0,60); 50 random)");
}

/// Criterion 3: pipeline oracle equivalence on 50 random instances with an
/// exponent box of 64, plus the three pinned worked examples with their
/// status flags.
#[test]
fn acceptance_3_pipeline_oracle_equivalence() {
    let box_bound = 64u64;
    let params = SolverParams { n_max: box_bound, ..SolverParams::default() };
    let mut rng = SplitMix64::new(0xacce903);
    let mut ran = 0;
    while ran < 50 {
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
        let terms: Vec<(ModElement, u64)> =
            (0..k).map(|_| (sample_element(&mut rng, &module, 3), 1)).collect();
        let orbit = OrbitSum::new(sample_element(&mut rng, &module, 3), terms).unwrap();
        let gen_count = rng.range_usize(1, 2);
        let generators = sample_generators(&mut rng, &module, gen_count, 4);
        let out = intersect_orbit_subgroup(&module, &orbit, &generators, &params)
            .unwrap_or_else(|e| panic!("pipeline failed: {e}"));
        // Membership oracle: stacked generator lattice, HNF once.
        let m = module.free_rank();
        let s = module.torsion_orders().len();
        let cols: Vec<Vec<BigInt>> = generators
            .iter()
            .map(|gen| {
                let mut v = gen.free.clone();
                v.extend(gen.tor.iter().map(|&t| BigInt::from(t)));
                v
            })
            .chain(module.torsion_orders().iter().enumerate().map(|(i, &d)| {
                let mut v = vec![BigInt::zero(); m + s];
                v[m + i] = BigInt::from(d);
                v
            }))
            .collect();
        let stacked = IntMatrix::from_columns(&cols, m + s);
        let (hnf, _) = stacked.hnf();
        let in_gamma = |p: &ModElement| -> bool {
            let mut v = p.free.clone();
            v.extend(p.tor.iter().map(|&t| BigInt::from(t)));
            frobset_core::matrix::solve_echelon(&hnf, &v).is_some()
        };
        // Per-term orbit arrays.
        let orbits: Vec<Vec<ModElement>> = orbit
            .terms
            .iter()
            .map(|(p, _)| {
                let mut arr = Vec::with_capacity(box_bound as usize + 1);
                let mut cur = p.clone();
                for n in 0..=box_bound {
                    if n > 0 {
                        cur = module.apply_f(&cur);
                    }
                    arr.push(cur.clone());
                }
                arr
            })
            .collect();
        // Exact set equality over the whole box.
        let mut exps = vec![0u64; k];
        'outer: loop {
            let mut point = orbit.base.clone();
            for (i, arr) in orbits.iter().enumerate() {
                point = module.add(&point, &arr[exps[i] as usize]);
            }
            let brute = in_gamma(&point);
            let x: Vec<BigInt> = exps.iter().map(|&e| BigInt::from(e)).collect();
            let pipe = out.exponent_member(&x).unwrap();
            assert_eq!(pipe, brute, "instance {ran}, exponents {exps:?}");
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
    }

    // Worked example 1: Gamma = M returns the orbit itself, complete.
    let module = gm_module(2);
    let orbit = OrbitSum::new(
        module.element_from_i64(&[3], &[]),
        vec![(module.element_from_i64(&[1], &[]), 1)],
    )
    .unwrap();
    let out = intersect_orbit_subgroup(
        &module,
        &orbit,
        &[module.element_from_i64(&[1], &[])],
        &params,
    )
    .unwrap();
    assert_eq!(out.status.tag, StatusTag::Complete);
    assert_eq!(out.fsets.len(), 1);
    assert_eq!(out.fsets[0].base, orbit.base);
    assert_eq!(out.fsets[0].terms, orbit.terms);

    // Worked example 2: {2^n} against 3Z is empty and complete.
    let orbit = OrbitSum::new(
        module.element_from_i64(&[0], &[]),
        vec![(module.element_from_i64(&[1], &[]), 1)],
    )
    .unwrap();
    let out = intersect_orbit_subgroup(
        &module,
        &orbit,
        &[module.element_from_i64(&[3], &[])],
        &params,
    )
    .unwrap();
    assert!(out.fsets.is_empty());
    assert_eq!(out.status.tag, StatusTag::Complete);

    // Worked example 3: diag(2,2), (1,0) + S((0,1);1) against x == y mod 3
    // gives (1,0) + S((0,1); 2).
    let module = FgModule::new(
        2,
        vec![],
        IntMatrix::from_rows(&[vec![2, 0], vec![0, 2]]),
        IntMatrix::zero(0, 2),
        IntMatrix::zero(0, 0),
        IntPoly::from_i64(&[-2, 1]),
    )
    .unwrap();
    let orbit = OrbitSum::new(
        module.element_from_i64(&[1, 0], &[]),
        vec![(module.element_from_i64(&[0, 1], &[]), 1)],
    )
    .unwrap();
    let out = intersect_orbit_subgroup(
        &module,
        &orbit,
        &[module.element_from_i64(&[1, 1], &[]), module.element_from_i64(&[3, 0], &[])],
        &params,
    )
    .unwrap();
    assert_eq!(out.status.tag, StatusTag::Complete);
    assert_eq!(out.fsets.len(), 1);
    assert_eq!(out.fsets[0].base, module.element_from_i64(&[1, 0], &[]));
    assert_eq!(out.fsets[0].terms, vec![(module.element_from_i64(&[0, 1], &[]), 2)]);

    pass(3, "pipeline equals brute force on 50 random instances + 3 pinned examples");
}

/// Criterion 4: the two-term survey classification.
#[test]
fn acceptance_4_two_term_survey() {
    // q = 3, phi_t = F + F^2, deg <= 9 -> exactly {t, t^3, t^9}.
    let f3 = FqField::new(3, 1).unwrap();
    let phi_t = TwistedPoly::new(
        f3.clone(),
        3,
        vec![f3.zero(), f3.one(), f3.one()],
    )
    .unwrap();
    let module = DrinfeldModule::new(f3.clone(), 3, phi_t).unwrap();
    let found = two_term_survey(&module, 9).unwrap();
    let t_power = |field: &FqField, e: usize| {
        let mut v = vec![field.zero(); e + 1];
        v[e] = field.one();
        v
    };
    assert_eq!(
        found,
        vec![t_power(&f3, 1), t_power(&f3, 3), t_power(&f3, 9)]
    );

    // q = 2, phi_t = F + F^3, deg <= 8 -> exactly {t, t^2, t^4, t^8}, with
    // phi_{t^{2^n}} = F^{2^n} + F^{3 * 2^n}.
    let f2 = FqField::new(2, 1).unwrap();
    let phi_t = TwistedPoly::new(
        f2.clone(),
        2,
        vec![f2.zero(), f2.one(), f2.zero(), f2.one()],
    )
    .unwrap();
    let module = DrinfeldModule::new(f2.clone(), 2, phi_t).unwrap();
    let found = two_term_survey(&module, 8).unwrap();
    assert_eq!(
        found,
        vec![t_power(&f2, 1), t_power(&f2, 2), t_power(&f2, 4), t_power(&f2, 8)]
    );
    for n in 0..=3u32 {
        let e = 1u64 << n;
        let img = module.phi_t_power(e).unwrap();
        let expect = TwistedPoly::f_power(f2.clone(), 2, e as usize)
            .unwrap()
            .add(&TwistedPoly::f_power(f2.clone(), 2, 3 * e as usize).unwrap())
            .unwrap();
        assert_eq!(img, expect);
    }
    pass(4, "two-term surveys pin {t,t^3,t^9} (q=3) and {t,t^2,t^4,t^8} (q=2)");
}

/// Criterion 5: the twisted square and the sharp scenario.
#[test]
fn acceptance_5_twisted_square_and_sharp() {
    for q in [3u64, 5] {
        let field = FqField::of_order_power(q, 2).unwrap();
        let mut c = vec![field.zero(); 4];
        c[1] = field.one();
        c[3] = field.one();
        let u = TwistedPoly::new(field.clone(), q, c).unwrap();
        let sq = u.mul(&u).unwrap();
        let mut expect = vec![field.zero(); 7];
        expect[2] = field.one();
        expect[4] = field.from_u64(2);
        expect[6] = field.one();
        assert_eq!(sq.coeffs, expect, "(F + F^3)^2 over F_{{{q}^2}}");
    }
    let report = sharp_scenario(3, 6).unwrap();
    assert!(report.on_x_equals_even_subring);
    assert_eq!(report.on_x_count, report.even_subring_count);
    assert!(report.phi_t2_preserves_x);
    assert!(report.phi_t_moves_generator_off_x);
    pass(5, "(F+F^3)^2 = F^2 + 2F^4 + F^6 for q in {3,5}; sharp scenario holds");
}

/// Criterion 6: the unit-equation demo over F_2.
#[test]
fn acceptance_6_unit_equation_demo() {
    let f = FqField::new(2, 1).unwrap();
    let t = frobset_core::fq::FqRat::t(&f);
    let one = frobset_core::fq::FqRat::one(&f);
    let t_plus_1 = frobset_core::fq::FqRat::from_poly(
        &f,
        frobset_core::fq::FqPoly::normalized(&f, vec![f.one(), f.one()]),
    );
    let group = TorusSubgroup::new(
        f.clone(),
        2,
        vec![vec![t, one.clone()], vec![one.clone(), t_plus_1]],
    )
    .unwrap();
    let relation = LinearRelation { coeffs: vec![one.clone(), one.clone()], target: one };
    let sols = intersect_hypersurface(&group, &relation, 64).unwrap();
    let expect: Vec<Vec<i64>> = (0..=6).map(|n| vec![1i64 << n, 1i64 << n]).collect();
    assert_eq!(sols, expect, "solutions are exactly (2^n, 2^n), n <= 6");
    let cluster = cluster_fsets(&sols, 2, 64);
    assert_eq!(cluster.orbits.len(), 1);
    assert!(cluster.lines.is_empty());
    assert!(cluster.unexplained.is_empty());
    assert_eq!(cluster.orbits[0].base, vec![1, 1]);
    // The orbit base is the group element (t, 1+t): S((t, 1+t); 1).
    let base_elem = group.gamma_element(&cluster.orbits[0].base).unwrap();
    let expect_elem = group.gamma_element(&[1, 1]).unwrap();
    assert_eq!(base_elem, expect_elem);
    pass(6, "x + y = 1 over F_2: solutions (2^n, 2^n), one groupless F-set S((t,1+t);1)");
}

/// Criterion 7: exponent-set algebra: the intersection membership law on
/// 1000+ sampled points over 50 random pairs, and collapse soundness on
/// every convertible coset produced by the orbit corpus scenarios.
#[test]
fn acceptance_7_exponent_set_algebra() {
    use frobset_core::fsets::{BoundedLatticeCoset, ExponentSet};
    let mut rng = SplitMix64::new(0xacce907);
    let random_set = |rng: &mut SplitMix64, dim: usize| -> ExponentSet {
        let n_explicit = rng.range_usize(0, 2);
        let explicit: Vec<Vec<BigInt>> = (0..n_explicit)
            .map(|_| (0..dim).map(|_| BigInt::from(rng.range_i64(0, 8))).collect())
            .collect();
        let n_cosets = rng.range_usize(0, 2);
        let cosets: Vec<BoundedLatticeCoset> = (0..n_cosets)
            .map(|_| {
                let cols = rng.range_usize(0, dim);
                let mut lattice = IntMatrix::zero(dim, cols);
                for r in 0..dim {
                    for c in 0..cols {
                        lattice.set(r, c, BigInt::from(rng.range_i64(-2, 3)));
                    }
                }
                let offset: Vec<BigInt> =
                    (0..dim).map(|_| BigInt::from(rng.range_i64(0, 4))).collect();
                let bounds: Vec<BigInt> =
                    (0..dim).map(|_| BigInt::from(rng.range_i64(0, 2))).collect();
                BoundedLatticeCoset::new(offset, lattice, bounds).unwrap()
            })
            .collect();
        ExponentSet::from_parts(dim, explicit, cosets).unwrap()
    };
    let mut checked = 0u64;
    for _ in 0..50 {
        let a = random_set(&mut rng, 2);
        let b = random_set(&mut rng, 2);
        let inter = a.intersect(&b).unwrap();
        for _ in 0..25 {
            let x = vec![
                BigInt::from(rng.range_i64(0, 20)),
                BigInt::from(rng.range_i64(0, 20)),
            ];
            assert_eq!(
                inter.member(&x).unwrap(),
                a.member(&x).unwrap() && b.member(&x).unwrap(),
            );
            checked += 1;
        }
    }
    assert!(checked >= 1000);

    // Collapse soundness on the corpus: every coset the orbit scenarios
    // convert must enumerate to the same points as the constrained orbit.
    let mut convertible = 0;
    for name in [
        "orbit_full_subgroup.scn",
        "orbit_pow2_in_3z.scn",
        "orbit_diag_mod3.scn",
        "orbit_torsion_coset.scn",
    ] {
        let doc = load(name);
        let frobset_cli::scenario::Scenario::OrbitIntersect(sc) =
            build_scenario(&doc).unwrap()
        else {
            panic!("{name} is not orbit-intersect");
        };
        let out =
            intersect_orbit_subgroup(&sc.module, &sc.orbit, &sc.generators, &sc.solver).unwrap();
        let ps: Vec<ModElement> = sc.orbit.terms.iter().map(|(p, _)| p.clone()).collect();
        for comp in &out.components {
            let collapse = frobset_core::fsets::collapse_to_groupless(
                &sc.module,
                &sc.orbit.base,
                &ps,
                &comp.exponents,
            )
            .unwrap();
            for conv in &collapse.converted {
                convertible += 1;
                let direct: BTreeSet<ModElement> = conv
                    .source
                    .enumerate_box(24)
                    .into_iter()
                    .map(|t| {
                        let mut p = sc.orbit.base.clone();
                        for (i, e) in t.iter().enumerate() {
                            let n = e.to_u64().unwrap();
                            p = sc.module.add(&p, &sc.module.frob_power(&ps[i], n));
                        }
                        p
                    })
                    .collect();
                let enumerated = points_up_to(&sc.module, &conv.fset, 24);
                for p in &direct {
                    assert!(enumerated.contains(p), "{name}: missing {p:?}");
                }
            }
            assert!(collapse.residual.is_empty(), "{name}: unexpected residual");
        }
    }
    assert!(convertible >= 2, "corpus produced too few convertible cosets");
    pass(7, "intersection membership law (1250 points) + corpus collapse soundness");
}

/// Criterion 8: the Frobenius-ring axiom checker on the three pinned models.
#[test]
fn acceptance_8_axiom_checker() {
    let gm = gm_module(2);
    assert!(gm.validate().all_passed());

    let zero_map = FgModule::new(
        1,
        vec![],
        IntMatrix::from_rows(&[vec![0]]),
        IntMatrix::zero(0, 1),
        IntMatrix::zero(0, 0),
        IntPoly::from_i64(&[0, 1]),
    )
    .unwrap();
    let report = zero_map.validate();
    assert!(!report.axiom_iii.passed);

    let diag21 = FgModule::new(
        2,
        vec![],
        IntMatrix::from_rows(&[vec![2, 0], vec![0, 1]]),
        IntMatrix::zero(0, 2),
        IntMatrix::zero(0, 0),
        IntPoly::from_i64(&[2, -3, 1]),
    )
    .unwrap();
    let report = diag21.validate();
    assert!(!report.axiom_iv.passed);
    assert!(report.axiom_iii.passed);
    pass(8, "G_m passes all axioms; F = 0 fails (iii); diag(2,1) fails (iv)");
}

/// Criterion 9: determinism: every corpus scenario produces byte-identical
/// canonical report sections across two in-process runs, and the binary
/// produces byte-identical canonical sections across two invocations.
#[test]
fn acceptance_9_determinism() {
    let dir = corpus_dir();
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| {
            let name = e.unwrap().file_name().into_string().unwrap();
            name.ends_with(".scn").then_some(name)
        })
        .collect();
    names.sort();
    assert!(names.len() >= 14, "corpus shrank: {names:?}");
    for name in &names {
        let doc = load(name);
        let scenario = build_scenario(&doc).unwrap_or_else(|e| panic!("{name}: {e}"));
        let r1 = run_scenario(&doc, &scenario, &Overrides::default())
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        let r2 = run_scenario(&doc, &scenario, &Overrides::default()).unwrap();
        assert_eq!(
            r1.canonical_bytes(),
            r2.canonical_bytes(),
            "{name}: canonical sections differ between runs"
        );
    }
    // End-to-end through the binary on two representative scenarios.
    let exe = env!("CARGO_BIN_EXE_frobset");
    for name in ["orbit_diag_mod3.scn", "drinfeld_survey_q3.scn"] {
        let path = dir.join(name);
        let run = || {
            let out = std::process::Command::new(exe)
                .arg("run")
                .arg(&path)
                .output()
                .expect("binary runs");
            assert!(out.status.success(), "{name}: exit {:?}", out.status);
            let v: serde_json::Value =
                serde_json::from_slice(&out.stdout).expect("valid JSON report");
            serde_json::to_string(&v["canonical"]).unwrap()
        };
        assert_eq!(run(), run(), "{name}: binary canonical sections differ");
    }
    pass(9, "byte-identical canonical reports across runs (library + binary)");
}
