//! Randomized cross-validation of the solvers against exhaustive
//! enumeration: congruence systems (two algebraic routes plus brute force),
//! the bounded+sieved equation solver (soundness, in-box completeness, and
//! extended-range evidence for `complete` claims), and pipeline instances
//! that force torsion cosets and exact equations at the same time.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use frobset_core::frobmod::{z_block, FgModule, IntPoly, ModElement};
use frobset_core::matrix::IntMatrix;
use frobset_core::orbit::{intersect_orbit_subgroup, OrbitSum, SolverParams};
use frobset_core::recsolve::{
    solve_congruences, solve_equations, Congruence, EquationForm, StatusTag,
};
use frobset_core::sampling::{sample_element, sample_module, SplitMix64};

fn random_monic(rng: &mut SplitMix64, g_max: usize, nonneg: bool) -> IntPoly {
    let g = rng.range_usize(1, g_max);
    let mut coeffs: Vec<i64> = (0..g)
        .map(|_| if nonneg { rng.range_i64(0, 3) } else { rng.range_i64(-3, 3) })
        .collect();
    coeffs.push(1);
    IntPoly::from_i64(&coeffs)
}

#[test]
fn congruence_routes_agree_and_match_brute_force() {
    let mut rng = SplitMix64::new(0x57e550);
    for _ in 0..60 {
        let f = random_monic(&mut rng, 3, false);
        let g = f.degree();
        let k = rng.range_usize(1, 2);
        let n_constraints = rng.range_usize(1, 3);
        let constraints: Vec<Congruence> = (0..n_constraints)
            .map(|_| {
                let coeffs: Vec<Vec<BigInt>> = (0..g)
                    .map(|_| (0..k).map(|_| BigInt::from(rng.range_i64(-4, 4))).collect())
                    .collect();
                Congruence {
                    coeffs,
                    rhs: BigInt::from(rng.range_i64(-6, 6)),
                    modulus: BigInt::from(rng.range_i64(2, 12)),
                }
            })
            .collect();
        let Ok(joint) = solve_congruences(&f, &constraints, k) else {
            continue; // out-of-guard instance; nothing to compare
        };
        // Route two: solve each constraint alone and intersect.
        let mut chain: Option<frobset_core::ExponentSet> = None;
        let mut ok = true;
        for c in &constraints {
            match solve_congruences(&f, std::slice::from_ref(c), k) {
                Ok(es) => {
                    chain = Some(match chain {
                        None => es,
                        Some(cur) => cur.intersect(&es).unwrap(),
                    });
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let chain = chain.unwrap();
        // Brute force on the box via the z table.
        let hi = 30u64;
        let table = z_block(&f, hi);
        let satisfied = |tuple: &[u64]| -> bool {
            constraints.iter().all(|c| {
                let mut acc = BigInt::zero();
                for (j, row) in c.coeffs.iter().enumerate() {
                    for (i, d) in row.iter().enumerate() {
                        acc += d * &table[j][tuple[i] as usize];
                    }
                }
                (acc - &c.rhs).mod_floor(&c.modulus).is_zero()
            })
        };
        // Joint route vs brute force: full box when the component count is
        // modest, sampled points otherwise; the chain route on samples.
        let components = joint.explicit.len() + joint.cosets.len();
        if components <= 400 {
            let mut tuple = vec![0u64; k];
            'outer: loop {
                let x: Vec<BigInt> = tuple.iter().map(|&v| BigInt::from(v)).collect();
                let brute = satisfied(&tuple);
                assert_eq!(joint.member(&x).unwrap(), brute, "joint vs brute at {tuple:?}");
                let mut i = 0;
                loop {
                    if i == k {
                        break 'outer;
                    }
                    tuple[i] += 1;
                    if tuple[i] <= hi {
                        break;
                    }
                    tuple[i] = 0;
                    i += 1;
                }
            }
        }
        for _ in 0..150 {
            let tuple: Vec<u64> = (0..k).map(|_| rng.range_i64(0, hi as i64) as u64).collect();
            let x: Vec<BigInt> = tuple.iter().map(|&v| BigInt::from(v)).collect();
            let brute = satisfied(&tuple);
            assert_eq!(joint.member(&x).unwrap(), brute, "joint vs brute at {tuple:?}");
            assert_eq!(chain.member(&x).unwrap(), brute, "chain vs brute at {tuple:?}");
        }
    }
}

#[test]
fn equation_solver_sound_and_box_complete() {
    let mut rng = SplitMix64::new(0x57e551);
    let n_max = 20u64;
    let extended = 2 * n_max;
    let mut complete_seen = 0;
    let mut bounded_seen = 0;
    for trial in 0..60 {
        // Half the trials use growth-friendly recursions (nonnegative
        // weights), half use mixed signs to exercise the fallback path.
        let f = random_monic(&mut rng, 3, trial % 2 == 0);
        let g = f.degree();
        let k = rng.range_usize(1, 2);
        let coeffs: Vec<Vec<BigInt>> = (0..g)
            .map(|_| (0..k).map(|_| BigInt::from(rng.range_i64(-3, 3))).collect())
            .collect();
        let table = z_block(&f, extended);
        let value = |tuple: &[u64]| -> BigInt {
            let mut acc = BigInt::zero();
            for (j, row) in coeffs.iter().enumerate() {
                for (i, d) in row.iter().enumerate() {
                    acc += d * &table[j][tuple[i] as usize];
                }
            }
            acc
        };
        // Half the time aim at a reachable value so solutions exist.
        let target = if rng.chance(1, 2) {
            let tuple: Vec<u64> = (0..k).map(|_| rng.range_i64(0, 12) as u64).collect();
            value(&tuple)
        } else {
            BigInt::from(rng.range_i64(-20, 20))
        };
        let form = EquationForm { coeffs: coeffs.clone(), target: target.clone() };
        let Ok((es, status)) =
            solve_equations(&f, &[form], k, n_max, &[2, 3, 4, 5, 7, 8, 9, 11, 13])
        else {
            continue;
        };
        match status.tag {
            StatusTag::Complete => complete_seen += 1,
            StatusTag::Bounded => bounded_seen += 1,
        }
        // Sweep the extended box.
        let mut tuple = vec![0u64; k];
        'outer: loop {
            let x: Vec<BigInt> = tuple.iter().map(|&v| BigInt::from(v)).collect();
            let brute = value(&tuple) == target;
            let claimed = es.member(&x).unwrap();
            // Soundness everywhere: claimed members must satisfy the equation.
            assert!(!claimed || brute, "unsound claim at {tuple:?} (trial {trial})");
            // Completeness inside the box, and everywhere when complete.
            let inside = tuple.iter().all(|&v| v <= n_max);
            if brute && (inside || status.tag == StatusTag::Complete) {
                assert!(claimed, "missed solution {tuple:?} (trial {trial}, {status:?})");
            }
            let mut i = 0;
            loop {
                if i == k {
                    break 'outer;
                }
                tuple[i] += 1;
                if tuple[i] <= extended {
                    break;
                }
                tuple[i] = 0;
                i += 1;
            }
        }
    }
    assert!(complete_seen >= 10, "only {complete_seen} complete statuses");
    assert!(bounded_seen >= 5, "only {bounded_seen} bounded statuses");
}

#[test]
fn pipeline_with_torsion_and_equations() {
    // Force instances where the free-part lattice is rank deficient (so
    // exact equations appear) and the torsion coset table is nontrivial.
    let mut rng = SplitMix64::new(0x57e552);
    let params = SolverParams { n_max: 24, ..SolverParams::default() };
    let mut with_equations = 0;
    let mut with_cosets = 0;
    let mut ran = 0;
    while ran < 25 {
        let module = sample_module(&mut rng, 2, 1, 6);
        if module.free_rank() != 2
            || module.torsion_orders().is_empty()
            || !module.validate().axiom_iii.passed
        {
            continue;
        }
        ran += 1;
        let orbit = OrbitSum::new(
            sample_element(&mut rng, &module, 2),
            vec![(sample_element(&mut rng, &module, 2), 1)],
        )
        .unwrap();
        // One generator with a nonzero free part: Gamma_1 has rank <= 1 in
        // Z^2, so non-pivot rows yield equations.
        let generator = loop {
            let gen = sample_element(&mut rng, &module, 3);
            if gen.free.iter().any(|x| !x.is_zero()) {
                break gen;
            }
        };
        let generators = vec![generator];
        let out = intersect_orbit_subgroup(&module, &orbit, &generators, &params)
            .unwrap_or_else(|e| panic!("pipeline failed: {e}"));
        let sub = frobset_core::orbit::subgroup_analyze(&module, &generators).unwrap();
        if sub.gamma1.cols() < module.free_rank() {
            with_equations += 1;
        }
        if sub.torsion_cosets.len() > 1 {
            with_cosets += 1;
        }
        // Exact comparison on the box.
        for n in 0..=24u64 {
            let point = module.add(&orbit.base, &module.frob_power(&orbit.terms[0].0, n));
            let direct = module.subgroup_contains(&generators, &point).unwrap();
            let claimed = out.exponent_member(&[BigInt::from(n)]).unwrap();
            assert_eq!(claimed, direct, "instance {ran}, n = {n}");
        }
        // Emitted F-sets stay inside the subgroup.
        for fs in &out.fsets {
            for p in frobset_core::fsets::points_up_to(&module, fs, 2) {
                assert!(module.subgroup_contains(&generators, &p).unwrap());
            }
        }
    }
    assert!(with_equations >= 15, "only {with_equations} instances had equations");
    assert!(with_cosets >= 5, "only {with_cosets} instances had several torsion cosets");
}

#[test]
fn delta_reindexing_equals_unit_delta_on_reindexed_instances() {
    // Running with delta > 1 must equal the delta = 1 pipeline driven by
    // the substituted endomorphism F^delta, pointwise.
    let mut rng = SplitMix64::new(0x57e553);
    let params = SolverParams { n_max: 30, ..SolverParams::default() };
    let mut ran = 0;
    while ran < 15 {
        let module = sample_module(&mut rng, 2, 0, 6);
        if !module.validate().axiom_iii.passed {
            continue;
        }
        ran += 1;
        let delta = rng.range_i64(2, 3) as u64;
        let p = sample_element(&mut rng, &module, 2);
        let base = sample_element(&mut rng, &module, 2);
        let gen_elem = sample_element(&mut rng, &module, 4);
        let orbit = OrbitSum::new(base.clone(), vec![(p.clone(), delta)]).unwrap();
        let out = intersect_orbit_subgroup(&module, &orbit, &[gen_elem.clone()], &params)
            .unwrap_or_else(|e| panic!("pipeline failed: {e}"));
        // Substituted module: F' = F^delta, annihilated by the
        // characteristic polynomial of a_ff^delta.
        let mut a_pow = IntMatrix::identity(module.free_rank());
        for _ in 0..delta {
            a_pow = a_pow.mul(module.a_ff());
        }
        let f_sub = IntPoly::char_poly(&a_pow);
        let sub_module = FgModule::new(
            module.free_rank(),
            vec![],
            a_pow,
            IntMatrix::zero(0, module.free_rank()),
            IntMatrix::zero(0, 0),
            f_sub,
        )
        .unwrap();
        let sub_p = ModElement { free: p.free.clone(), tor: vec![] };
        let sub_orbit = OrbitSum::new(
            ModElement { free: base.free.clone(), tor: vec![] },
            vec![(sub_p, 1)],
        )
        .unwrap();
        let sub_gen = ModElement { free: gen_elem.free.clone(), tor: vec![] };
        let out_sub = intersect_orbit_subgroup(&sub_module, &sub_orbit, &[sub_gen], &params)
            .unwrap_or_else(|e| panic!("substituted pipeline failed: {e}"));
        // Same orbit parameter means exponent delta*n upstairs and n
        // downstairs; both must agree with each other on the box.
        for n in 0..=10u64 {
            let up = out.exponent_member(&[BigInt::from(delta * n)]).unwrap();
            let down = out_sub.exponent_member(&[BigInt::from(n)]).unwrap();
            assert_eq!(up, down, "instance {ran}, delta {delta}, n = {n}");
        }
    }
}
