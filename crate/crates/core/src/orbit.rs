//! The orbit/subgroup intersection pipeline: given a module `M`, an orbit
//! sum `O = Q + S(P_1..P_k; delta_1..delta_k)` and a finitely generated
//! subgroup `Gamma` of `M` (not necessarily F-invariant), compute
//! `O cap Gamma` as groupless F-sets plus a residual channel, with a
//! completeness status.
//!
//! Shape of the computation: split points into torsion + free parts, fix a
//! coset representative `U_h` for every torsion value `h` hit by `Gamma`,
//! turn membership into (a) torsion congruences and (b) the echelon residue
//! system of the free-part lattice `Gamma_1` (integer congruences at pivot
//! rows, exact integer equations at non-pivot rows), all with coefficients
//! applied to the sequences `z_{j,n_i}`. Congruences are solved exactly;
//! equations go through the bounded + sieved solver. Orbit steps
//! `delta_i > 1` are handled by intersecting with the sub-lattice of
//! exponents divisible by `delta_i` and collapsing in the stretched
//! exponent space.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::frobmod::{FgModule, ModElement};
use crate::fsets::{
    collapse_to_groupless, BoundedLatticeCoset, ExponentSet, GrouplessFSet,
};
use crate::matrix::IntMatrix;
use crate::recsolve::{
    solve_congruences, solve_equations, CompletenessStatus, Congruence, EquationForm,
};

/// `Q + S(P_1..P_k; delta_1..delta_k)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OrbitSum {
    pub base: ModElement,
    pub terms: Vec<(ModElement, u64)>,
}

impl OrbitSum {
    pub fn new(base: ModElement, terms: Vec<(ModElement, u64)>) -> Result<Self> {
        if terms.iter().any(|(_, d)| *d == 0) {
            return Err(Error::InvalidInput("orbit steps must be >= 1".into()));
        }
        Ok(OrbitSum { base, terms })
    }
}

/// Derived data of a finitely generated subgroup: an echelon basis of the
/// free-part intersection `Gamma_1 = Gamma cap M_1` and one representative
/// `U_h` for every torsion value `h` with `(h + M_1) cap Gamma` nonempty.
#[derive(Clone, Debug)]
pub struct SubgroupData {
    pub generators: Vec<ModElement>,
    /// HNF echelon basis of `Gamma_1`, zero columns dropped.
    pub gamma1: IntMatrix,
    /// Sorted `(h, U_h)` pairs with `h + U_h` in `Gamma`.
    pub torsion_cosets: Vec<(Vec<u64>, Vec<BigInt>)>,
}

impl SubgroupData {
    pub fn contains(&self, module: &FgModule, p: &ModElement) -> Result<bool> {
        module.subgroup_contains(&self.generators, p)
    }

    pub fn coset_rep(&self, h: &[u64]) -> Option<&[BigInt]> {
        self.torsion_cosets
            .iter()
            .find(|(hh, _)| hh == h)
            .map(|(_, u)| u.as_slice())
    }
}

/// Splits `P = T + Q` into its torsion and free parts (in that order).
pub fn split_point(_module: &FgModule, p: &ModElement) -> (ModElement, ModElement) {
    let torsion = ModElement { free: vec![BigInt::zero(); p.free.len()], tor: p.tor.clone() };
    let free = ModElement { free: p.free.clone(), tor: vec![0; p.tor.len()] };
    (torsion, free)
}

/// Computes [`SubgroupData`] for the subgroup generated by `generators`.
///
/// `Gamma_1` comes from the kernel of the torsion projection of the
/// coefficient space: `c` with `sum c_j tor(gen_j) = 0` maps to the free
/// vector `sum c_j free(gen_j)`. The torsion coset table is the exhaustive
/// closure of the (finite) torsion projection, with the first witness found
/// kept as `U_h`.
pub fn subgroup_analyze(module: &FgModule, generators: &[ModElement]) -> Result<SubgroupData> {
    let m = module.free_rank();
    let s = module.torsion_orders().len();
    let r = generators.len();
    let free_cols: Vec<Vec<BigInt>> = generators.iter().map(|g| g.free.clone()).collect();
    let gen_free = IntMatrix::from_columns(&free_cols, m);
    // Coefficient lattice K = {c : torsion part of sum c_j gen_j = 0}.
    let coeff_lattice = if s == 0 {
        IntMatrix::identity(r)
    } else {
        let tor_cols: Vec<Vec<BigInt>> = generators
            .iter()
            .map(|g| g.tor.iter().map(|&t| BigInt::from(t)).collect())
            .collect();
        let gen_tor = IntMatrix::from_columns(&tor_cols, s);
        let orders: Vec<BigInt> =
            module.torsion_orders().iter().map(|&d| BigInt::from(d)).collect();
        let stacked = gen_tor.hconcat(&IntMatrix::diagonal(&orders));
        let kernel = stacked.kernel();
        let cols: Vec<Vec<BigInt>> =
            (0..kernel.cols()).map(|j| kernel.column(j)[..r].to_vec()).collect();
        IntMatrix::from_columns(&cols, r)
    };
    let (h, _) = gen_free.mul(&coeff_lattice).hnf();
    let gamma1 = h.drop_zero_columns();

    // Exhaustive closure of the torsion projection, breadth-first, keeping
    // the first witness for each torsion value.
    let mut table: BTreeMap<Vec<u64>, Vec<BigInt>> = BTreeMap::new();
    let zero_h = vec![0u64; s];
    let zero_w = vec![BigInt::zero(); m];
    let mut queue = std::collections::VecDeque::new();
    table.insert(zero_h.clone(), zero_w.clone());
    queue.push_back((zero_h, zero_w));
    while let Some((h, w)) = queue.pop_front() {
        for gen in generators {
            let h2: Vec<u64> = h
                .iter()
                .zip(&gen.tor)
                .zip(module.torsion_orders())
                .map(|((&a, &b), &d)| (a + b) % d)
                .collect();
            if !table.contains_key(&h2) {
                let w2: Vec<BigInt> = w.iter().zip(&gen.free).map(|(a, b)| a + b).collect();
                table.insert(h2.clone(), w2.clone());
                queue.push_back((h2, w2));
            }
        }
    }
    Ok(SubgroupData {
        generators: generators.to_vec(),
        gamma1,
        torsion_cosets: table.into_iter().collect(),
    })
}

/// The constraint system of one torsion coset.
#[derive(Clone, Debug)]
pub struct MembershipSystem {
    pub congruences: Vec<Congruence>,
    pub equations: Vec<EquationForm>,
}

/// Affine function of the sequences: `constant + sum_{j,i} coeffs[j][i] z_{j,n_i}`.
#[derive(Clone)]
struct AffineForm {
    constant: BigInt,
    coeffs: Vec<Vec<BigInt>>,
}

impl AffineForm {
    fn zero(g: usize, k: usize) -> Self {
        AffineForm { constant: BigInt::zero(), coeffs: vec![vec![BigInt::zero(); k]; g] }
    }

    fn scale(&mut self, c: &BigInt) {
        self.constant *= c;
        for row in self.coeffs.iter_mut() {
            for v in row.iter_mut() {
                *v *= c;
            }
        }
    }

    fn add_scaled(&mut self, other: &AffineForm, c: &BigInt) {
        self.constant += &other.constant * c;
        for (row, orow) in self.coeffs.iter_mut().zip(&other.coeffs) {
            for (v, ov) in row.iter_mut().zip(orow) {
                *v += ov * c;
            }
        }
    }
}

/// Builds the torsion congruences and the free-part echelon residue system
/// for one torsion value `h` (which must appear in the coset table).
///
/// Orbit steps are taken as `delta = 1` here; general steps are handled by
/// the caller through exponent reindexing.
pub fn membership_system(
    module: &FgModule,
    orbit: &OrbitSum,
    sub: &SubgroupData,
    h: &[u64],
) -> Result<MembershipSystem> {
    let Some(u_h) = sub.coset_rep(h) else {
        return Err(Error::InvalidInput(format!("torsion value {h:?} not in the coset table")));
    };
    let g = module.min_poly().degree();
    let k = orbit.terms.len();
    let m = module.free_rank();
    let orders = module.torsion_orders();

    // F^j P_i, split.
    let mut tor_parts: Vec<Vec<Vec<u64>>> = Vec::with_capacity(k); // [i][j] -> torsion coords
    let mut free_parts: Vec<Vec<Vec<BigInt>>> = Vec::with_capacity(k); // [i][j] -> free coords
    for (p, _) in &orbit.terms {
        let mut tj = Vec::with_capacity(g);
        let mut fj = Vec::with_capacity(g);
        let mut cur = p.clone();
        for j in 0..g {
            tj.push(cur.tor.clone());
            fj.push(cur.free.clone());
            if j + 1 < g {
                cur = module.apply_f(&cur);
            }
        }
        tor_parts.push(tj);
        free_parts.push(fj);
    }

    let mut congruences = Vec::new();
    // Torsion conditions: one congruence per torsion coordinate.
    for (l, &d) in orders.iter().enumerate() {
        let mut coeffs = vec![vec![BigInt::zero(); k]; g];
        for i in 0..k {
            for j in 0..g {
                coeffs[j][i] = BigInt::from(tor_parts[i][j][l]);
            }
        }
        let rhs = BigInt::from(h[l]) - BigInt::from(orbit.base.tor[l]);
        congruences.push(Congruence { coeffs, rhs, modulus: BigInt::from(d) });
    }

    // Free conditions: v(n) = (Q_0 - U_h) + sum z_{j,n_i} Q_i^{(j)} must lie
    // in Gamma_1. Forward elimination along the echelon basis turns this
    // into one congruence per pivot row (modulo the running pivot product)
    // and one exact equation per non-pivot row.
    let mut coord_forms: Vec<AffineForm> = Vec::with_capacity(m);
    for l in 0..m {
        let mut a = AffineForm::zero(g, k);
        a.constant = &orbit.base.free[l] - &u_h[l];
        for i in 0..k {
            for j in 0..g {
                a.coeffs[j][i] = free_parts[i][j][l].clone();
            }
        }
        coord_forms.push(a);
    }
    let pivots = sub.gamma1.echelon_pivots();
    let mut equations = Vec::new();
    let mut psis: Vec<AffineForm> = Vec::new();
    let mut pis: Vec<BigInt> = Vec::new();
    let pivot_rows: Vec<usize> = pivots.iter().map(|&(r, _)| r).collect();
    for (t, &(r, c)) in pivots.iter().enumerate() {
        let pi_prev = if t == 0 { BigInt::one() } else { pis[t - 1].clone() };
        let mut psi = coord_forms[r].clone();
        psi.scale(&pi_prev);
        for l in 0..t {
            let factor = (&pi_prev / &pis[l]) * sub.gamma1.get(r, l);
            psi.add_scaled(&psis[l], &(-factor));
        }
        let pi_t = &pi_prev * sub.gamma1.get(r, c);
        if !pi_t.is_one() {
            congruences.push(Congruence {
                coeffs: psi.coeffs.clone(),
                rhs: -psi.constant.clone(),
                modulus: pi_t.clone(),
            });
        }
        psis.push(psi);
        pis.push(pi_t);
    }
    for rr in 0..m {
        if pivot_rows.contains(&rr) {
            continue;
        }
        let above = pivot_rows.iter().filter(|&&pr| pr < rr).count();
        let pi_above = if above == 0 { BigInt::one() } else { pis[above - 1].clone() };
        let mut e = coord_forms[rr].clone();
        e.scale(&pi_above);
        for l in 0..above {
            let factor = (&pi_above / &pis[l]) * sub.gamma1.get(rr, l);
            e.add_scaled(&psis[l], &(-factor));
        }
        equations.push(EquationForm { coeffs: e.coeffs, target: -e.constant });
    }
    Ok(MembershipSystem { congruences, equations })
}

/// Solver knobs for the equation side of the pipeline.
#[derive(Clone, Debug)]
pub struct SolverParams {
    pub n_max: u64,
    pub sieve_moduli: Vec<u64>,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams { n_max: 64, sieve_moduli: default_sieve_moduli() }
    }
}

/// All prime powers up to 64. The torsion exponent joins per instance.
pub fn default_sieve_moduli() -> Vec<u64> {
    let mut out = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61] {
        let mut q = p;
        while q <= 64 {
            out.push(q);
            q = q.saturating_mul(p);
        }
    }
    out.sort_unstable();
    out
}

/// A coset that could not be translated into a groupless F-set, kept with
/// the orbit it belongs to so nothing is silently dropped.
#[derive(Clone, Debug)]
pub struct ResidualPart {
    pub coset: BoundedLatticeCoset,
    pub orbit_base: ModElement,
    pub orbit_points: Vec<ModElement>,
}

/// Solved exponent data of one torsion coset, in the stretched exponent
/// space (coordinates are the raw Frobenius exponents).
#[derive(Clone, Debug)]
pub struct CosetSolution {
    pub torsion: Vec<u64>,
    pub exponents: ExponentSet,
}

#[derive(Clone, Debug)]
pub struct OrbitIntersection {
    pub fsets: Vec<GrouplessFSet>,
    pub residual: Vec<ResidualPart>,
    /// Per-torsion-coset exponent sets; their union describes every
    /// intersection point as `Q + sum_i F^{x_i} P_i`.
    pub components: Vec<CosetSolution>,
    pub status: CompletenessStatus,
    /// Echelon basis of `Gamma_1`, exposed for test transparency.
    pub gamma1: IntMatrix,
}

impl OrbitIntersection {
    /// Membership of a raw exponent tuple in the solved set.
    pub fn exponent_member(&self, x: &[BigInt]) -> Result<bool> {
        for c in &self.components {
            if c.exponents.member(x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// The main pipeline. Refuses modules that fail the zero-divisor axiom.
pub fn intersect_orbit_subgroup(
    module: &FgModule,
    orbit: &OrbitSum,
    generators: &[ModElement],
    params: &SolverParams,
) -> Result<OrbitIntersection> {
    let report = module.validate();
    if !report.axiom_iii.passed {
        return Err(Error::Refused(format!(
            "module fails the zero-divisor axiom (iii): {}",
            report.axiom_iii.detail
        )));
    }
    let sub = subgroup_analyze(module, generators)?;
    let k = orbit.terms.len();

    // k = 0: the orbit is the single point Q.
    if k == 0 {
        let inside = sub.contains(module, &orbit.base)?;
        let fsets = if inside {
            vec![GrouplessFSet::singleton(orbit.base.clone())]
        } else {
            vec![]
        };
        return Ok(OrbitIntersection {
            fsets,
            residual: vec![],
            components: vec![],
            status: CompletenessStatus::complete(vec![]),
            gamma1: sub.gamma1.clone(),
        });
    }

    // Work in the stretched exponent space: terms with step 1, plus the
    // divisibility lattice x_i == 0 (mod delta_i) when steps exceed 1.
    let unit_orbit = OrbitSum {
        base: orbit.base.clone(),
        terms: orbit.terms.iter().map(|(p, _)| (p.clone(), 1)).collect(),
    };
    let delta_set = if orbit.terms.iter().any(|(_, d)| *d > 1) {
        let diag: Vec<BigInt> = orbit.terms.iter().map(|(_, d)| BigInt::from(*d)).collect();
        Some(ExponentSet::from_parts(
            k,
            vec![],
            vec![BoundedLatticeCoset::new(
                vec![BigInt::zero(); k],
                IntMatrix::diagonal(&diag),
                vec![BigInt::zero(); k],
            )?],
        )?)
    } else {
        None
    };

    let f = module.min_poly();
    let ps: Vec<ModElement> = orbit.terms.iter().map(|(p, _)| p.clone()).collect();
    let mut fsets = Vec::new();
    let mut residual = Vec::new();
    let mut components = Vec::new();
    let mut status = CompletenessStatus::complete(vec![]);
    for (h, _) in &sub.torsion_cosets {
        let sys = membership_system(module, &unit_orbit, &sub, h)?;
        let cong_set = solve_congruences(f, &sys.congruences, k)?;
        let mut set = cong_set;
        if !sys.equations.is_empty() && !set.is_trivially_empty() {
            let mut sieve = params.sieve_moduli.clone();
            sieve.extend(sys.congruences.iter().filter_map(|c| c.modulus.to_u64()));
            // The torsion exponent joins the sieve.
            let exponent = module.torsion_orders().iter().fold(1u64, |acc, &d| acc.lcm(&d));
            if exponent > 1 {
                sieve.push(exponent);
            }
            let (eq_set, eq_status) =
                solve_equations(f, &sys.equations, k, params.n_max, &sieve)?;
            set = set.intersect(&eq_set)?;
            status = status.merge(eq_status);
        }
        if let Some(ds) = &delta_set {
            set = set.intersect(ds)?;
        }
        if set.is_trivially_empty() {
            continue;
        }
        let outcome = collapse_to_groupless(module, &orbit.base, &ps, &set)?;
        fsets.extend(outcome.singletons.iter().cloned());
        fsets.extend(outcome.converted.iter().map(|c| c.fset.clone()));
        for coset in outcome.residual {
            residual.push(ResidualPart {
                coset,
                orbit_base: orbit.base.clone(),
                orbit_points: ps.clone(),
            });
        }
        components.push(CosetSolution { torsion: h.clone(), exponents: set });
    }
    fsets.sort();
    fsets.dedup();

    // Soundness spot check: the first few points of every emitted F-set
    // must land in Gamma.
    #[cfg(debug_assertions)]
    for fs in &fsets {
        for p in crate::fsets::points_up_to(module, fs, 1) {
            debug_assert!(
                sub.contains(module, &p)?,
                "emitted point escapes the subgroup: {p:?} from {fs:?}"
            );
        }
    }

    Ok(OrbitIntersection { fsets, residual, components, status, gamma1: sub.gamma1.clone() })
}
