//! Solvers over the fundamental sequences `z_{j,n}`: eventual periodicity
//! modulo `N`, exact congruence systems, and a bounded-search-plus-modular-
//! sieve solver for exact linear equations in the sequences.
//!
//! Congruence systems are fully decidable: the sequences are eventually
//! periodic modulo any modulus, so the solution set is an exact finite union
//! of explicit tuples and bounded lattice cosets.
//!
//! Exact equations have no known general decision procedure. The solver
//! returns every solution inside the search box plus symbolically verified
//! infinite families, and labels the result with a completeness status:
//! `complete` only when every residue class is closed off by an exact
//! periodicity argument, a certified growth cutoff, or a sieve exclusion;
//! `bounded` otherwise. Labeled incompleteness, never silent.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::frobmod::IntPoly;
use crate::fsets::{BoundedLatticeCoset, ExponentSet};
use crate::matrix::IntMatrix;

/// Guard on the number of per-coordinate class combinations a solver will
/// enumerate.
const MAX_COMBOS: u64 = 4_000_000;
/// Guard on cycle-detection steps.
const MAX_PERIOD_STEPS: u64 = 2_000_000;
/// Guard on the exact-value scan horizon.
const MAX_SCAN: usize = 1 << 17;
/// Guard on sieve refinement size.
const MAX_SIEVE_COMPONENTS: usize = 20_000;

/// Minimal eventual period of the sequences modulo `N`: the state
/// `(z_{j,n}, ..., z_{j,n+g-1})` for every `j` simultaneously repeats with
/// `state(n + period) = state(n)` exactly when `n >= preperiod`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodProfile {
    pub modulus: u64,
    pub preperiod: u64,
    pub period: u64,
}

/// Cycle detection on the companion-matrix power modulo `N`. The first
/// repeated state gives the minimal preperiod and period at once.
pub fn detect_period(f: &IntPoly, modulus: u64) -> Result<PeriodProfile> {
    if modulus < 2 {
        return Err(Error::InvalidInput(format!("period modulus {modulus} must be >= 2")));
    }
    let g = f.degree();
    let alphas: Vec<u64> = f
        .alphas()
        .iter()
        .map(|a| a.mod_floor(&BigInt::from(modulus)).to_u64().unwrap())
        .collect();
    // state = g x g matrix C^n mod N, flattened row-major; C is the companion
    // matrix advancing a length-g window of any solution of the recursion.
    let step = |state: &[u64]| -> Vec<u64> {
        let mut next = vec![0u64; g * g];
        for col in 0..g {
            for row in 0..g - 1 {
                next[row * g + col] = state[(row + 1) * g + col];
            }
            let mut acc: u128 = 0;
            for (l, &a) in alphas.iter().enumerate() {
                acc += a as u128 * state[l * g + col] as u128;
            }
            next[(g - 1) * g + col] = (acc % modulus as u128) as u64;
        }
        next
    };
    let mut state = vec![0u64; g * g];
    for i in 0..g {
        state[i * g + i] = 1 % modulus;
    }
    let mut seen: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut n = 0u64;
    loop {
        if let Some(&n1) = seen.get(&state) {
            return Ok(PeriodProfile { modulus, preperiod: n1, period: n - n1 });
        }
        seen.insert(state.clone(), n);
        state = step(&state);
        n += 1;
        if n > MAX_PERIOD_STEPS {
            return Err(Error::TooLarge(format!(
                "no state repetition modulo {modulus} within {MAX_PERIOD_STEPS} steps"
            )));
        }
    }
}

/// One linear congruence `sum_{j,i} coeffs[j][i] * z_{j,n_i} == rhs (mod modulus)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Congruence {
    /// `coeffs[j][i]`, `0 <= j < g`, `0 <= i < k`.
    pub coeffs: Vec<Vec<BigInt>>,
    pub rhs: BigInt,
    pub modulus: BigInt,
}

/// One exact linear equation `sum_{j,i} coeffs[j][i] * z_{j,n_i} == target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationForm {
    pub coeffs: Vec<Vec<BigInt>>,
    pub target: BigInt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatusTag {
    Complete,
    Bounded,
}

/// Per-class certificates backing a completeness claim.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// Coordinate `coordinate` cannot exceed `cutoff` in any solution; the
    /// form value is certified to outgrow the target beyond it.
    GrowthCutoff { coordinate: usize, cutoff: u64 },
    /// The exact integer values contributed by this coordinate are
    /// eventually periodic, so its residue classes are enumerated exactly.
    PeriodicCoordinate { coordinate: usize, preperiod: u64, period: u64 },
    /// The coordinate pair cancels identically in every form; the diagonal
    /// is a verified infinite solution family.
    DiagonalFamily { first: usize, second: usize },
    /// Residue-class exclusions for one sieve modulus: counts plus the
    /// first few excluded class representatives.
    SieveSummary {
        modulus: u64,
        preperiod: u64,
        period: u64,
        excluded: u64,
        total: u64,
        excluded_samples: Vec<Vec<u64>>,
    },
    /// The joint sieve refinement emptied every residue class.
    SieveEmpty { moduli: Vec<u64> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletenessStatus {
    pub tag: StatusTag,
    /// Search bound, reported when `tag == Bounded`.
    pub bound: Option<u64>,
    pub certificates: Vec<Certificate>,
}

impl CompletenessStatus {
    pub fn complete(certificates: Vec<Certificate>) -> Self {
        CompletenessStatus { tag: StatusTag::Complete, bound: None, certificates }
    }

    pub fn bounded(n_max: u64, certificates: Vec<Certificate>) -> Self {
        CompletenessStatus { tag: StatusTag::Bounded, bound: Some(n_max), certificates }
    }

    pub fn is_complete(&self) -> bool {
        self.tag == StatusTag::Complete
    }

    /// Meet: complete only when both are.
    pub fn merge(self, other: CompletenessStatus) -> CompletenessStatus {
        let mut certificates = self.certificates;
        certificates.extend(other.certificates);
        match (self.tag, other.tag) {
            (StatusTag::Complete, StatusTag::Complete) => {
                CompletenessStatus::complete(certificates)
            }
            _ => CompletenessStatus {
                tag: StatusTag::Bounded,
                bound: self.bound.or(other.bound),
                certificates,
            },
        }
    }
}

fn lcm_u64(values: impl Iterator<Item = u64>) -> Result<u64> {
    let mut acc: u64 = 1;
    for v in values {
        let g = acc.gcd(&v);
        acc = acc
            .checked_mul(v / g)
            .filter(|&x| x <= 100_000_000)
            .ok_or_else(|| Error::TooLarge("lcm of congruence moduli".into()))?;
    }
    Ok(acc)
}

struct ClassCounts {
    total: u64,
    surviving: u64,
    excluded_samples: Vec<Vec<u64>>,
}

const EXCLUDED_SAMPLE_CAP: usize = 8;

/// Exact solution set of a congruence system: per-coordinate classes are the
/// explicit values below the preperiod and the residue classes through one
/// period; each class combination has a fixed value for every constraint.
fn solve_congruence_classes(
    f: &IntPoly,
    constraints: &[Congruence],
    k: usize,
) -> Result<(ExponentSet, ClassCounts)> {
    if k == 0 {
        return Err(Error::InvalidInput("congruence solving needs k >= 1".into()));
    }
    if constraints.is_empty() {
        return Ok((
            ExponentSet::full(k),
            ClassCounts { total: 1, surviving: 1, excluded_samples: vec![] },
        ));
    }
    let g = f.degree();
    for c in constraints {
        if c.modulus < BigInt::from(2) {
            return Err(Error::InvalidInput(format!("congruence modulus {} must be >= 2", c.modulus)));
        }
        if c.coeffs.len() != g {
            return Err(Error::DimensionMismatch {
                expected: g,
                got: c.coeffs.len(),
                context: "congruence coefficient rows",
            });
        }
        if c.coeffs.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidInput("congruence coefficient row length != k".into()));
        }
    }
    let moduli: Vec<u64> = constraints
        .iter()
        .map(|c| {
            c.modulus
                .to_u64()
                .ok_or_else(|| Error::TooLarge(format!("congruence modulus {}", c.modulus)))
        })
        .collect::<Result<_>>()?;
    let joint = lcm_u64(moduli.iter().copied())?;
    let profile = detect_period(f, joint)?;
    let (rho, pi) = (profile.preperiod, profile.period);
    let classes = rho + pi;
    let combos = (0..k).try_fold(1u64, |acc, _| {
        acc.checked_mul(classes).filter(|&x| x <= MAX_COMBOS).ok_or_else(|| {
            Error::TooLarge(format!("{classes}^{k} class combinations exceed the solver guard"))
        })
    })?;
    // z values modulo the joint modulus for representatives 0..rho+pi,
    // computed by the modular recursion directly (the exact values can have
    // astronomically many digits at long periods).
    let jm = BigInt::from(joint);
    let alphas_mod: Vec<u64> = f
        .alphas()
        .iter()
        .map(|a| a.mod_floor(&jm).to_u64().unwrap())
        .collect();
    let len = classes.max(g as u64) as usize;
    let mut zmod: Vec<Vec<u64>> = (0..g)
        .map(|j| {
            let mut row = Vec::with_capacity(len);
            for n in 0..g {
                row.push(u64::from(n == j) % joint);
            }
            row
        })
        .collect();
    for n in g..len {
        for row in zmod.iter_mut() {
            let mut acc: u128 = 0;
            for (l, &a) in alphas_mod.iter().enumerate() {
                acc += a as u128 * row[n - g + l] as u128;
            }
            row.push((acc % joint as u128) as u64);
        }
    }
    // Reduced constraint data: coefficient and rhs mod each constraint modulus.
    struct Reduced {
        coeffs: Vec<Vec<u64>>,
        rhs: u64,
        modulus: u64,
    }
    let reduced: Vec<Reduced> = constraints
        .iter()
        .zip(&moduli)
        .map(|(c, &m)| {
            let mb = BigInt::from(m);
            Reduced {
                coeffs: c
                    .coeffs
                    .iter()
                    .map(|row| {
                        row.iter().map(|d| d.mod_floor(&mb).to_u64().unwrap()).collect()
                    })
                    .collect(),
                rhs: c.rhs.mod_floor(&mb).to_u64().unwrap(),
                modulus: m,
            }
        })
        .collect();

    let mut survivors: Vec<Vec<u64>> = Vec::new();
    let mut surviving = 0u64;
    let mut excluded_samples: Vec<Vec<u64>> = Vec::new();
    let mut reps = vec![0u64; k];
    let mut done = false;
    while !done {
        let ok = reduced.iter().all(|c| {
            let mut acc: u128 = 0;
            for (j, row) in c.coeffs.iter().enumerate() {
                for (i, &d) in row.iter().enumerate() {
                    let zv = zmod[j][reps[i] as usize] % c.modulus;
                    acc = (acc + d as u128 * zv as u128) % c.modulus as u128;
                }
            }
            acc as u64 == c.rhs
        });
        if ok {
            surviving += 1;
            survivors.push(reps.clone());
            if survivors.len() > 1_000_000 {
                return Err(Error::TooLarge(
                    "surviving residue classes exceed the collection guard".into(),
                ));
            }
        } else if excluded_samples.len() < EXCLUDED_SAMPLE_CAP {
            excluded_samples.push(reps.clone());
        }
        // Odometer over class representatives.
        let mut i = 0;
        loop {
            if i == k {
                done = true;
                break;
            }
            reps[i] += 1;
            if reps[i] < classes {
                break;
            }
            reps[i] = 0;
            i += 1;
        }
    }
    let (explicit, cosets) = emit_classes(&survivors, k, rho, pi)?;
    Ok((
        ExponentSet::from_parts(k, explicit, cosets)?,
        ClassCounts { total: combos, surviving, excluded_samples },
    ))
}

/// Guard on emitted set components.
const MAX_COMPONENTS: usize = 20_000;

/// One per-coordinate class: an explicit value, or the progression
/// `{n >= offset : n == offset (mod step)}`.
#[derive(Clone, Copy)]
struct CoordClass {
    offset: u64,
    step: Option<u64>,
}

/// Turns surviving class-representative tuples into exponent-set
/// components. When the survivors factor as a product of per-coordinate
/// sets, each coordinate's residue representatives are merged into
/// arithmetic progressions (a full residue range becomes one free class);
/// correlated survivors fall back to one component per tuple.
fn emit_classes(
    survivors: &[Vec<u64>],
    k: usize,
    rho: u64,
    pi: u64,
) -> Result<(Vec<Vec<BigInt>>, Vec<BoundedLatticeCoset>)> {
    use std::collections::BTreeSet;
    if survivors.is_empty() {
        return Ok((vec![], vec![]));
    }
    let tuple_component = |reps: &[u64]| -> Result<(Option<Vec<BigInt>>, Option<BoundedLatticeCoset>)> {
        if reps.iter().all(|&r| r < rho) {
            Ok((Some(reps.iter().map(|&r| BigInt::from(r)).collect()), None))
        } else {
            let offset: Vec<BigInt> = reps.iter().map(|&r| BigInt::from(r)).collect();
            let cols: Vec<Vec<BigInt>> = (0..k)
                .filter(|&i| reps[i] >= rho)
                .map(|i| {
                    let mut col = vec![BigInt::zero(); k];
                    col[i] = BigInt::from(pi);
                    col
                })
                .collect();
            let lattice = IntMatrix::from_columns(&cols, k);
            Ok((None, Some(BoundedLatticeCoset::new(offset.clone(), lattice, offset)?)))
        }
    };

    let proj: Vec<BTreeSet<u64>> =
        (0..k).map(|i| survivors.iter().map(|t| t[i]).collect()).collect();
    let product_size = proj.iter().try_fold(1usize, |acc, s| acc.checked_mul(s.len()));
    let is_product = product_size == Some(survivors.len());

    let mut explicit = Vec::new();
    let mut cosets = Vec::new();
    if !is_product {
        if survivors.len() > MAX_COMPONENTS {
            return Err(Error::TooLarge(format!(
                "{} correlated residue classes exceed the representation guard",
                survivors.len()
            )));
        }
        for reps in survivors {
            match tuple_component(reps)? {
                (Some(t), _) => explicit.push(t),
                (_, Some(c)) => cosets.push(c),
                _ => unreachable!(),
            }
        }
        return Ok((explicit, cosets));
    }

    // Product structure: compress per coordinate.
    let mut coord_classes: Vec<Vec<CoordClass>> = Vec::with_capacity(k);
    for set in &proj {
        let mut classes: Vec<CoordClass> = Vec::new();
        for &v in set.iter().filter(|&&v| v < rho) {
            classes.push(CoordClass { offset: v, step: None });
        }
        let residues: Vec<u64> = set.iter().copied().filter(|&v| v >= rho).collect();
        if !residues.is_empty() {
            let merged = merge_progression(&residues, pi);
            match merged {
                Some(step) => classes.push(CoordClass { offset: residues[0], step: Some(step) }),
                None => {
                    for &r in &residues {
                        classes.push(CoordClass { offset: r, step: Some(pi) });
                    }
                }
            }
        }
        coord_classes.push(classes);
    }
    let count = coord_classes.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.len()));
    match count {
        Some(n) if n <= MAX_COMPONENTS => {}
        _ => {
            return Err(Error::TooLarge(
                "compressed residue classes exceed the representation guard".into(),
            ))
        }
    }
    let mut idx = vec![0usize; k];
    loop {
        let choice: Vec<CoordClass> =
            (0..k).map(|i| coord_classes[i][idx[i]]).collect();
        if choice.iter().all(|c| c.step.is_none()) {
            explicit.push(choice.iter().map(|c| BigInt::from(c.offset)).collect());
        } else {
            let offset: Vec<BigInt> = choice.iter().map(|c| BigInt::from(c.offset)).collect();
            let cols: Vec<Vec<BigInt>> = (0..k)
                .filter_map(|i| {
                    choice[i].step.map(|step| {
                        let mut col = vec![BigInt::zero(); k];
                        col[i] = BigInt::from(step);
                        col
                    })
                })
                .collect();
            let lattice = IntMatrix::from_columns(&cols, k);
            cosets.push(BoundedLatticeCoset::new(offset.clone(), lattice, offset)?);
        }
        let mut i = 0;
        loop {
            if i == k {
                return Ok((explicit, cosets));
            }
            idx[i] += 1;
            if idx[i] < coord_classes[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// If the sorted residue representatives form a single full arithmetic
/// progression `{r0, r0 + d, ..., r0 + (pi/d - 1) d}` with `d | pi`, the
/// class set `{n >= r0 : n == r0 (mod d)}` is exactly their union; returns
/// that `d`. (`d = 1` is the full residue range.)
fn merge_progression(residues: &[u64], pi: u64) -> Option<u64> {
    if residues.len() < 2 {
        return None;
    }
    let d = residues[1] - residues[0];
    if d == 0 || pi % d != 0 || residues.len() as u64 != pi / d {
        return None;
    }
    for (t, &r) in residues.iter().enumerate() {
        if r != residues[0] + t as u64 * d {
            return None;
        }
    }
    Some(d)
}

/// Exact, complete solution set of a linear congruence system in the
/// sequences. Congruence solving is fully decidable.
///
/// The joint solve works modulo the lcm of all the moduli; when its period
/// blows past the enumeration guard, the constraints are solved one at a
/// time and intersected, which is the same set.
pub fn solve_congruences(
    f: &IntPoly,
    constraints: &[Congruence],
    k: usize,
) -> Result<ExponentSet> {
    match solve_congruence_classes(f, constraints, k) {
        Ok((es, _)) => Ok(es),
        Err(Error::TooLarge(_)) if constraints.len() > 1 => {
            let mut acc: Option<ExponentSet> = None;
            for c in constraints {
                let (es, _) = solve_congruence_classes(f, std::slice::from_ref(c), k)?;
                let next = match acc {
                    None => es,
                    Some(cur) => cur.intersect(&es)?,
                };
                let empty = next.is_trivially_empty();
                acc = Some(next);
                if empty {
                    break;
                }
            }
            Ok(acc.expect("nonempty constraint list"))
        }
        Err(e) => Err(e),
    }
}

// ---- exact equation solving ----

/// Streaming table of the exact sequences and the per-coordinate form
/// values, extended on demand.
struct ValueTable {
    g: usize,
    alphas: Vec<BigInt>,
    /// `z[j][n]`.
    z: Vec<Vec<BigInt>>,
}

impl ValueTable {
    fn new(f: &IntPoly) -> Self {
        let g = f.degree();
        let mut z = vec![Vec::with_capacity(64); g];
        for (j, row) in z.iter_mut().enumerate() {
            for n in 0..g {
                row.push(if n == j { BigInt::one() } else { BigInt::zero() });
            }
        }
        ValueTable { g, alphas: f.alphas(), z }
    }

    fn ensure(&mut self, n: usize) -> Result<()> {
        if n >= MAX_SCAN {
            return Err(Error::TooLarge(format!("scan horizon {n} exceeds {MAX_SCAN}")));
        }
        let g = self.g;
        while self.z[0].len() <= n {
            let len = self.z[0].len();
            for j in 0..g {
                let mut acc = BigInt::zero();
                for (l, a) in self.alphas.iter().enumerate() {
                    if !a.is_zero() {
                        acc += a * &self.z[j][len - g + l];
                    }
                }
                self.z[j].push(acc);
            }
        }
        Ok(())
    }

    /// `sum_j coeffs[j] * z_{j,n}`.
    fn value(&mut self, coeffs: &[BigInt], n: usize) -> Result<BigInt> {
        self.ensure(n)?;
        let mut acc = BigInt::zero();
        for (j, d) in coeffs.iter().enumerate() {
            if !d.is_zero() {
                acc += d * &self.z[j][n];
            }
        }
        Ok(acc)
    }
}

/// How one coordinate was closed off.
enum CoordResolution {
    /// Exact integer periodicity of the stacked form values.
    Periodic { preperiod: u64, period: u64 },
    /// Certified cutoff: no solution has this coordinate above `cutoff`.
    Growth { cutoff: u64 },
    Unresolved,
}

/// Classification of one scalar sequence `z_j`.
#[derive(Clone, Copy, PartialEq)]
enum ZClass {
    /// Exactly periodic (a window of `g` consecutive values repeats).
    Periodic,
    /// Certified doubling: nonnegative recursion with weight sum >= 2 and a
    /// window of values all >= 1 was observed.
    Doubling,
    Unknown,
}

/// Exact min (or max) of the periodic part of `sum_j col[j] z_j`: the
/// linear combination restricted to the periodic `z_j`'s is itself a
/// solution of the recursion, so it cycles; the extremum over preperiod
/// plus one full cycle is global. `None` if no cycle shows up within the
/// scanned horizon.
fn periodic_part_extremum(
    table: &ValueTable,
    z_class: &[ZClass],
    col: &[BigInt],
    horizon: usize,
    want_min: bool,
) -> Option<BigInt> {
    let g = table.g;
    let mut vals = Vec::with_capacity(horizon + 1);
    for n in 0..=horizon {
        let mut acc = BigInt::zero();
        for (j, d) in col.iter().enumerate() {
            if z_class[j] == ZClass::Periodic && !d.is_zero() {
                acc += d * &table.z[j][n];
            }
        }
        vals.push(acc);
    }
    let mut seen: HashMap<Vec<BigInt>, usize> = HashMap::new();
    let mut end = None;
    for n in 0..=horizon.checked_sub(g)? {
        let w: Vec<BigInt> = vals[n..n + g].to_vec();
        if seen.contains_key(&w) {
            end = Some(n + g);
            break;
        }
        seen.insert(w, n);
    }
    let end = end?;
    let slice = &vals[..end];
    Some(if want_min {
        slice.iter().min().unwrap().clone()
    } else {
        slice.iter().max().unwrap().clone()
    })
}

/// Global lower (or upper) bound of `sum_j col[j] z_j` over all `n`: the
/// periodic part's extremum, provided every doubling `z_j` enters with the
/// harmless sign (its contribution is then bounded by 0 on that side).
/// `None` when unbounded in the requested direction or not certifiable.
fn contribution_bound(
    table: &ValueTable,
    z_class: &[ZClass],
    col: &[BigInt],
    horizon: usize,
    want_lower: bool,
) -> Option<BigInt> {
    for (j, d) in col.iter().enumerate() {
        if d.is_zero() {
            continue;
        }
        match z_class[j] {
            ZClass::Periodic => {}
            ZClass::Doubling => {
                if want_lower && d.is_negative() {
                    return None;
                }
                if !want_lower && d.is_positive() {
                    return None;
                }
            }
            ZClass::Unknown => return None,
        }
    }
    periodic_part_extremum(table, z_class, col, horizon, want_lower)
}

/// Window length used for periodicity detection of stacked values.
fn stacked_window(values: &[Vec<BigInt>], n: usize, g: usize) -> Vec<BigInt> {
    let mut w = Vec::with_capacity(values.len() * g);
    for row in values {
        for t in 0..g {
            w.push(row[n + t].clone());
        }
    }
    w
}

/// Bounded + sieved solver for exact equations
/// `sum_i L_{r,i}(n_i) = D_r` with `L_{r,i}(n) = sum_j coeffs[j][i] z_{j,n}`.
///
/// Returns all solutions with every coordinate `<= n_max` plus symbolically
/// verified infinite families, and a completeness status.
pub fn solve_equations(
    f: &IntPoly,
    forms: &[EquationForm],
    k: usize,
    n_max: u64,
    sieve_moduli: &[u64],
) -> Result<(ExponentSet, CompletenessStatus)> {
    if k == 0 {
        return Err(Error::InvalidInput("equation solving needs k >= 1".into()));
    }
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be >= 1".into()));
    }
    let g = f.degree();
    for form in forms {
        if form.coeffs.len() != g {
            return Err(Error::DimensionMismatch {
                expected: g,
                got: form.coeffs.len(),
                context: "equation coefficient rows",
            });
        }
        if form.coeffs.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidInput("equation coefficient row length != k".into()));
        }
    }
    if forms.is_empty() {
        return Ok((ExponentSet::full(k), CompletenessStatus::complete(vec![])));
    }

    // Per-(form, coordinate) coefficient columns.
    let column = |r: usize, i: usize| -> Vec<BigInt> {
        (0..g).map(|j| forms[r].coeffs[j][i].clone()).collect()
    };

    let mut table = ValueTable::new(f);

    // Exact path: try to resolve every coordinate by integer periodicity or
    // by a certified growth cutoff.
    match resolve_all_coordinates(f, forms, k, n_max, &mut table, &column) {
        Ok(Some((es, status))) => return Ok((es, status)),
        Ok(None) => {}
        Err(Error::TooLarge(_)) => {}
        Err(e) => return Err(e),
    }

    // Fallback: symbolic diagonal families + bounded enumeration + sieve.
    let mut certificates = Vec::new();
    let mut family_cosets: Vec<BoundedLatticeCoset> = Vec::new();
    for i in 0..k {
        for i2 in i + 1..k {
            let cancels = forms.iter().enumerate().all(|(r, form)| {
                form.target.is_zero()
                    && (0..g).all(|j| {
                        (&forms[r].coeffs[j][i] + &forms[r].coeffs[j][i2]).is_zero()
                    })
                    && (0..k).filter(|&l| l != i && l != i2).all(|l| {
                        (0..g).all(|j| form.coeffs[j][l].is_zero())
                    })
            });
            if cancels {
                // n_i = n_{i2}, all other coordinates free.
                let mut cols: Vec<Vec<BigInt>> = Vec::new();
                let mut diag = vec![BigInt::zero(); k];
                diag[i] = BigInt::one();
                diag[i2] = BigInt::one();
                cols.push(diag);
                for l in 0..k {
                    if l != i && l != i2 {
                        let mut e = vec![BigInt::zero(); k];
                        e[l] = BigInt::one();
                        cols.push(e);
                    }
                }
                family_cosets.push(BoundedLatticeCoset::new(
                    vec![BigInt::zero(); k],
                    IntMatrix::from_columns(&cols, k),
                    vec![BigInt::zero(); k],
                )?);
                certificates.push(Certificate::DiagonalFamily { first: i, second: i2 });
            }
        }
    }
    let families = ExponentSet::from_parts(k, vec![], family_cosets.clone())?;

    // Bounded enumeration of the box [0, n_max]^k.
    let box_size = (0..k).try_fold(1u64, |acc, _| {
        acc.checked_mul(n_max + 1).filter(|&x| x <= MAX_COMBOS).ok_or_else(|| {
            Error::TooLarge(format!("({})^{} box exceeds the solver guard", n_max + 1, k))
        })
    })?;
    let _ = box_size;
    table.ensure(n_max as usize)?;
    let mut explicit = Vec::new();
    let mut reps = vec![0u64; k];
    let mut done = false;
    while !done {
        let mut ok = true;
        for (r, form) in forms.iter().enumerate() {
            let mut acc = BigInt::zero();
            for i in 0..k {
                acc += table.value(&column(r, i), reps[i] as usize)?;
            }
            if acc != form.target {
                ok = false;
                break;
            }
        }
        if ok {
            let tuple: Vec<BigInt> = reps.iter().map(|&r| BigInt::from(r)).collect();
            if !families.member(&tuple)? {
                explicit.push(tuple);
            }
        }
        let mut i = 0;
        loop {
            if i == k {
                done = true;
                break;
            }
            reps[i] += 1;
            if reps[i] <= n_max {
                break;
            }
            reps[i] = 0;
            i += 1;
        }
    }

    // Modular sieve: per-modulus surviving class sets, then a refinement
    // fold, smallest sets first, under a global work budget (the pairwise
    // intersection cost is the product of component counts). An empty
    // refinement certifies that no solutions exist at all.
    let mut moduli: Vec<u64> = sieve_moduli.iter().copied().filter(|&m| m >= 2).collect();
    moduli.sort_unstable();
    moduli.dedup();
    let mut survivor_sets: Vec<(usize, u64, ExponentSet)> = Vec::new();
    let mut used = Vec::new();
    for &m in moduli.iter().take(64) {
        let constraints: Vec<Congruence> = forms
            .iter()
            .map(|form| Congruence {
                coeffs: form.coeffs.clone(),
                rhs: form.target.clone(),
                modulus: BigInt::from(m),
            })
            .collect();
        let Ok((set_m, counts)) = solve_congruence_classes(f, &constraints, k) else {
            continue;
        };
        let Ok(profile) = detect_period(f, m) else {
            continue;
        };
        certificates.push(Certificate::SieveSummary {
            modulus: m,
            preperiod: profile.preperiod,
            period: profile.period,
            excluded: counts.total - counts.surviving,
            total: counts.total,
            excluded_samples: counts.excluded_samples,
        });
        used.push(m);
        survivor_sets.push((set_m.explicit.len() + set_m.cosets.len(), m, set_m));
    }
    survivor_sets.sort_by_key(|(n, m, _)| (*n, *m));
    let mut survivors: Option<ExponentSet> = None;
    let mut budget: u64 = 10_000;
    for (n, _, set_m) in survivor_sets {
        let next = match &survivors {
            None => set_m,
            Some(cur) => {
                let cur_n = (cur.explicit.len() + cur.cosets.len()) as u64;
                let cost = cur_n.saturating_mul(n as u64);
                if cost > budget {
                    break;
                }
                budget -= cost;
                cur.intersect(&set_m)?
            }
        };
        if next.explicit.len() + next.cosets.len() > MAX_SIEVE_COMPONENTS {
            break;
        }
        let empty = next.is_trivially_empty();
        survivors = Some(next);
        if empty {
            break;
        }
    }

    let sieve_emptied = survivors.as_ref().map_or(false, |s| s.is_trivially_empty());
    if sieve_emptied {
        // No residue class survives, so there are no solutions anywhere.
        debug_assert!(explicit.is_empty() && family_cosets.is_empty());
        certificates.push(Certificate::SieveEmpty { moduli: used });
        return Ok((
            ExponentSet::empty(k),
            CompletenessStatus::complete(certificates),
        ));
    }

    let es = ExponentSet::from_parts(k, explicit, family_cosets)?;
    Ok((es, CompletenessStatus::bounded(n_max, certificates)))
}

/// Exact resolution: every coordinate must be closed off either by integer
/// periodicity of its stacked form values or by a certified growth cutoff
/// within the box. Returns `None` when some coordinate resists.
fn resolve_all_coordinates(
    f: &IntPoly,
    forms: &[EquationForm],
    k: usize,
    n_max: u64,
    table: &mut ValueTable,
    column: &dyn Fn(usize, usize) -> Vec<BigInt>,
) -> Result<Option<(ExponentSet, CompletenessStatus)>> {
    let g = f.degree();
    let nf = forms.len();
    let alphas = f.alphas();
    let alphas_nonneg = alphas.iter().all(|a| !a.is_negative());
    let alpha_sum: BigInt = alphas.iter().sum();
    let growth_possible = alphas_nonneg && alpha_sum >= BigInt::from(2);

    // Scan horizon for periodicity detection.
    let horizon = ((2 * n_max as usize).max(256) + 2 * g).min(MAX_SCAN - 1);
    table.ensure(horizon)?;

    // Per-coordinate stacked value rows.
    let mut value_rows: Vec<Vec<Vec<BigInt>>> = Vec::with_capacity(k);
    for i in 0..k {
        let mut rows = Vec::with_capacity(nf);
        for r in 0..nf {
            let col = column(r, i);
            let mut row = Vec::with_capacity(horizon + 1);
            for n in 0..=horizon {
                row.push(table.value(&col, n)?);
            }
            rows.push(row);
        }
        value_rows.push(rows);
    }

    // Classify the scalar sequences z_j: exactly periodic or certified
    // doubling (needs nonnegative recursion with weight sum >= 2).
    let mut z_class = vec![ZClass::Unknown; g];
    for j in 0..g {
        let row = &table.z[j];
        let mut seen: HashMap<Vec<BigInt>, usize> = HashMap::new();
        for n in 0..=horizon - g {
            let w: Vec<BigInt> = row[n..n + g].to_vec();
            if seen.contains_key(&w) {
                z_class[j] = ZClass::Periodic;
                break;
            }
            seen.insert(w, n);
        }
        if z_class[j] == ZClass::Unknown && growth_possible {
            // Window min >= 1 certifies doubling from that point on.
            for n in 0..=horizon - g {
                if row[n..n + g].iter().all(|v| v >= &BigInt::one()) {
                    z_class[j] = ZClass::Doubling;
                    break;
                }
            }
        }
    }

    // Resolve every coordinate.
    let mut resolutions: Vec<CoordResolution> = Vec::with_capacity(k);
    for i in 0..k {
        // Integer periodicity of the stacked window.
        let mut seen: HashMap<Vec<BigInt>, usize> = HashMap::new();
        let mut periodic = None;
        for n in 0..=horizon - g {
            let w = stacked_window(&value_rows[i], n, g);
            if let Some(&n1) = seen.get(&w) {
                periodic = Some((n1 as u64, (n - n1) as u64));
                break;
            }
            seen.insert(w, n);
        }
        if let Some((preperiod, period)) = periodic {
            resolutions.push(CoordResolution::Periodic { preperiod, period });
            continue;
        }
        if !growth_possible {
            resolutions.push(CoordResolution::Unresolved);
            continue;
        }
        // Growth: find a form whose value at this coordinate is certified to
        // run away while every other coordinate's contribution is bounded in
        // the needed direction.
        let mut cutoff: Option<u64> = None;
        for r in 0..nf {
            for sign in [1i64, -1] {
                // sign = 1: V_{r,i} -> +inf; solutions need V <= U.
                let col: Vec<BigInt> =
                    column(r, i).iter().map(|d| d * BigInt::from(sign)).collect();
                let pos_growth = col.iter().enumerate().any(|(j, d)| {
                    z_class[j] == ZClass::Doubling && d.is_positive()
                });
                let dir_ok = col.iter().enumerate().all(|(j, d)| match z_class[j] {
                    ZClass::Periodic => true,
                    ZClass::Doubling => !d.is_negative() || d.is_zero(),
                    ZClass::Unknown => d.is_zero(),
                });
                if !pos_growth || !dir_ok {
                    continue;
                }
                // U = sign*D - sum of lower bounds of the other coordinates
                // of sign*form.
                let mut u = &forms[r].target * BigInt::from(sign);
                let mut all_bounded = true;
                for i2 in 0..k {
                    if i2 == i {
                        continue;
                    }
                    // Lower bound of sign * V_{r,i2}.
                    let col2 = column(r, i2);
                    let b = if sign == 1 {
                        contribution_bound(table, &z_class, &col2, horizon, true)
                    } else {
                        contribution_bound(table, &z_class, &col2, horizon, false).map(|x| -x)
                    };
                    match b {
                        Some(lo) => u -= lo,
                        None => {
                            all_bounded = false;
                            break;
                        }
                    }
                }
                if !all_bounded {
                    continue;
                }
                // Split sign*V_{r,i} into periodic + doubling parts; certify
                // the tail once bounded_min + doubling window min > U.
                let Some(bounded_min) =
                    periodic_part_extremum(table, &z_class, &col, horizon, true)
                else {
                    continue;
                };
                let doubling_coeffs: Vec<(usize, BigInt)> = col
                    .iter()
                    .enumerate()
                    .filter(|(j, d)| z_class[*j] == ZClass::Doubling && d.is_positive())
                    .map(|(j, d)| (j, d.clone()))
                    .collect();
                // Scan forward: track the last n with sign*V(n) <= U and stop
                // once the doubling window clears the threshold U - bounded_min.
                let threshold = &u - &bounded_min;
                let mut last_le = None;
                let mut n = 0usize;
                let mut certified = None;
                loop {
                    if table.ensure(n + g).is_err() {
                        break;
                    }
                    let v = {
                        let mut acc = BigInt::zero();
                        for (j, d) in col.iter().enumerate() {
                            if !d.is_zero() {
                                acc += d * &table.z[j][n];
                            }
                        }
                        acc
                    };
                    if v <= u {
                        last_le = Some(n as u64);
                    }
                    // Doubling-part window minimum.
                    let mut wmin: Option<BigInt> = None;
                    for t in 0..g {
                        let mut acc = BigInt::zero();
                        for (j, d) in &doubling_coeffs {
                            acc += d * &table.z[*j][n + t];
                        }
                        wmin = Some(match wmin {
                            None => acc,
                            Some(w) => w.min(acc),
                        });
                    }
                    if wmin.map_or(false, |w| w > threshold) {
                        certified = Some(n as u64);
                        break;
                    }
                    n += 1;
                }
                if certified.is_some() {
                    let t = last_le.map_or(0, |x| x);
                    cutoff = Some(match cutoff {
                        None => t,
                        Some(old) => old.min(t),
                    });
                }
            }
        }
        match cutoff {
            Some(t) if t <= n_max => resolutions.push(CoordResolution::Growth { cutoff: t }),
            _ => resolutions.push(CoordResolution::Unresolved),
        }
    }
    if resolutions.iter().any(|r| matches!(r, CoordResolution::Unresolved)) {
        return Ok(None);
    }

    // Assemble exactly: per-coordinate classes are explicit values (below
    // the cutoff or preperiod) plus residue representatives through one
    // period for periodic coordinates.
    let mut class_count: Vec<u64> = Vec::with_capacity(k);
    for res in &resolutions {
        class_count.push(match res {
            CoordResolution::Periodic { preperiod, period } => preperiod + period,
            CoordResolution::Growth { cutoff } => cutoff + 1,
            CoordResolution::Unresolved => unreachable!(),
        });
    }
    let combos = class_count.iter().try_fold(1u64, |acc, &c| {
        acc.checked_mul(c).filter(|&x| x <= MAX_COMBOS).ok_or_else(|| {
            Error::TooLarge("class combination count exceeds the solver guard".into())
        })
    })?;
    let _ = combos;
    let mut explicit = Vec::new();
    let mut cosets = Vec::new();
    let mut reps = vec![0u64; k];
    let mut done = false;
    while !done {
        let mut ok = true;
        for (r, form) in forms.iter().enumerate() {
            let mut acc = BigInt::zero();
            for i in 0..k {
                acc += value_rows[i][r][reps[i] as usize].clone();
            }
            if acc != form.target {
                ok = false;
                break;
            }
        }
        if ok {
            let residue_coords: Vec<usize> = (0..k)
                .filter(|&i| match &resolutions[i] {
                    CoordResolution::Periodic { preperiod, .. } => reps[i] >= *preperiod,
                    _ => false,
                })
                .collect();
            let offset: Vec<BigInt> = reps.iter().map(|&x| BigInt::from(x)).collect();
            if residue_coords.is_empty() {
                explicit.push(offset);
            } else {
                let cols: Vec<Vec<BigInt>> = residue_coords
                    .iter()
                    .map(|&i| {
                        let period = match &resolutions[i] {
                            CoordResolution::Periodic { period, .. } => *period,
                            _ => unreachable!(),
                        };
                        let mut col = vec![BigInt::zero(); k];
                        col[i] = BigInt::from(period);
                        col
                    })
                    .collect();
                let lattice = IntMatrix::from_columns(&cols, k);
                cosets.push(BoundedLatticeCoset::new(offset.clone(), lattice, offset)?);
            }
        }
        let mut i = 0;
        loop {
            if i == k {
                done = true;
                break;
            }
            reps[i] += 1;
            if reps[i] < class_count[i] {
                break;
            }
            reps[i] = 0;
            i += 1;
        }
    }
    let certificates: Vec<Certificate> = resolutions
        .iter()
        .enumerate()
        .map(|(i, res)| match res {
            CoordResolution::Periodic { preperiod, period } => Certificate::PeriodicCoordinate {
                coordinate: i,
                preperiod: *preperiod,
                period: *period,
            },
            CoordResolution::Growth { cutoff } => {
                Certificate::GrowthCutoff { coordinate: i, cutoff: *cutoff }
            }
            CoordResolution::Unresolved => unreachable!(),
        })
        .collect();
    Ok(Some((
        ExponentSet::from_parts(k, explicit, cosets)?,
        CompletenessStatus::complete(certificates),
    )))
}
