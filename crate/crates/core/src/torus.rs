//! Desk-scale unit-equation machinery on a multiplicative torus:
//! finitely generated subgroups of `(F_q(t)^x)^s`, brute-force intersection
//! with a linear hypersurface over an exponent box, and clustering of the
//! solutions into Frobenius orbits (`e -> q e`) and lattice lines.

use std::collections::BTreeSet;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::fq::{FqField, FqPoly, FqRat};
use crate::frobmod::{FgModule, IntPoly, ModElement};
use crate::fsets::{FSet, GrouplessFSet};
use crate::matrix::IntMatrix;

/// Finitely generated subgroup of `(F_q(t)^x)^s` given by generator tuples.
/// The exponent map `e -> prod g_i^{e_i}` is a homomorphism from `Z^r`, and
/// the `q`-power Frobenius acts on exponents as multiplication by `q`.
#[derive(Clone, Debug)]
pub struct TorusSubgroup {
    pub field: FqField,
    pub ambient: usize,
    pub generators: Vec<Vec<FqRat>>,
}

/// Outcome of the multiplicative-independence certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndependenceCert {
    /// The valuation vectors of the generators (with respect to a coprime
    /// basis of all numerators and denominators, plus the degree at
    /// infinity) have full rank; any multiplicative relation would collapse
    /// them.
    Independent { valuation_rank: usize },
    Unknown,
}

impl TorusSubgroup {
    pub fn new(field: FqField, ambient: usize, generators: Vec<Vec<FqRat>>) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            if g.len() != ambient {
                return Err(Error::DimensionMismatch {
                    expected: ambient,
                    got: g.len(),
                    context: "torus generator tuple",
                });
            }
            if g.iter().any(|x| x.is_zero()) {
                return Err(Error::InvalidInput(format!(
                    "generator {i} has a zero coordinate; not a unit"
                )));
            }
        }
        Ok(TorusSubgroup { field, ambient, generators })
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// `prod_i g_i^{e_i}`, componentwise, reduced.
    pub fn gamma_element(&self, e: &[i64]) -> Result<Vec<FqRat>> {
        if e.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: e.len(),
                context: "gamma_element exponent vector",
            });
        }
        let f = &self.field;
        let mut out = vec![FqRat::one(f); self.ambient];
        for (i, &ei) in e.iter().enumerate() {
            if ei == 0 {
                continue;
            }
            for (l, x) in self.generators[i].iter().enumerate() {
                let p = x.pow_i64(f, ei)?;
                out[l] = out[l].mul(f, &p)?;
            }
        }
        Ok(out)
    }

    /// Multiplicative-independence certificate via valuation vectors over a
    /// gcd-refined coprime basis. Sound but not complete: `Unknown` does not
    /// mean dependent.
    pub fn independence(&self) -> Result<IndependenceCert> {
        let f = &self.field;
        let mut pieces: Vec<FqPoly> = Vec::new();
        for g in &self.generators {
            for x in g {
                pieces.push(x.num().monic(f));
                pieces.push(x.den().clone());
            }
        }
        let basis = factor_refine(f, pieces)?;
        // Valuation matrix: one row per generator; columns indexed by
        // (coordinate, basis element) plus a degree column per coordinate.
        let r = self.rank();
        let cols = self.ambient * (basis.len() + 1);
        let mut mat = IntMatrix::zero(r, cols);
        for (i, g) in self.generators.iter().enumerate() {
            for (l, x) in g.iter().enumerate() {
                for (b, piece) in basis.iter().enumerate() {
                    let v = poly_valuation(f, x.num(), piece)? as i64
                        - poly_valuation(f, x.den(), piece)? as i64;
                    mat.set(i, l * (basis.len() + 1) + b, BigInt::from(v));
                }
                let deg = x.num().degree().unwrap_or(0) as i64
                    - x.den().degree().unwrap_or(0) as i64;
                mat.set(i, l * (basis.len() + 1) + basis.len(), BigInt::from(deg));
            }
        }
        // Verify every numerator/denominator is a unit times a product of
        // basis powers, otherwise the valuation vectors are meaningless.
        for g in &self.generators {
            for x in g {
                for poly in [x.num(), x.den()] {
                    if !is_basis_product(f, poly, &basis)? {
                        return Ok(IndependenceCert::Unknown);
                    }
                }
            }
        }
        let rank = mat.rank();
        if rank == r {
            Ok(IndependenceCert::Independent { valuation_rank: rank })
        } else {
            Ok(IndependenceCert::Unknown)
        }
    }
}

/// Largest `e` with `piece^e | poly`.
fn poly_valuation(f: &FqField, poly: &FqPoly, piece: &FqPoly) -> Result<u32> {
    if poly.is_zero() {
        return Err(Error::InvalidInput("valuation of the zero polynomial".into()));
    }
    let mut v = 0;
    let mut cur = poly.clone();
    loop {
        let (q, r) = cur.divrem(f, piece)?;
        if !r.is_zero() {
            return Ok(v);
        }
        v += 1;
        cur = q;
    }
}

fn is_basis_product(f: &FqField, poly: &FqPoly, basis: &[FqPoly]) -> Result<bool> {
    let mut cur = poly.monic(f);
    for b in basis {
        loop {
            if cur.degree().unwrap_or(0) == 0 {
                return Ok(true);
            }
            let (q, r) = cur.divrem(f, b)?;
            if r.is_zero() {
                cur = q;
            } else {
                break;
            }
        }
    }
    Ok(cur.degree().unwrap_or(0) == 0)
}

/// Pairwise-coprime basis by repeated gcd splitting. Every input becomes a
/// unit times a product of basis powers.
fn factor_refine(f: &FqField, inputs: Vec<FqPoly>) -> Result<Vec<FqPoly>> {
    let mut items: Vec<FqPoly> = Vec::new();
    for p in inputs {
        if p.degree().unwrap_or(0) >= 1 {
            items.push(p.monic(f));
        }
    }
    items.sort();
    items.dedup();
    loop {
        let mut split = None;
        'search: for i in 0..items.len() {
            for j in i + 1..items.len() {
                let g = items[i].gcd(f, &items[j])?;
                if g.degree().unwrap_or(0) >= 1 {
                    split = Some((i, j, g));
                    break 'search;
                }
            }
        }
        let Some((i, j, g)) = split else { break };
        let a = items[j].clone();
        let b = items[i].clone();
        items.remove(j);
        items.remove(i);
        let mut push = |p: FqPoly| {
            if p.degree().unwrap_or(0) >= 1 {
                items.push(p.monic(f));
            }
        };
        let (qa, _) = a.divrem(f, &g)?;
        let (qb, _) = b.divrem(f, &g)?;
        push(g);
        push(qa);
        push(qb);
        items.sort();
        items.dedup();
    }
    Ok(items)
}

/// Linear relation `sum_l coeffs[l] * x_l = target` with rational-function
/// coefficients.
#[derive(Clone, Debug)]
pub struct LinearRelation {
    pub coeffs: Vec<FqRat>,
    pub target: FqRat,
}

impl LinearRelation {
    /// True when every coefficient and the target are constants (then the
    /// `q`-power Frobenius fixes the relation and `q e` is a solution
    /// whenever `e` is).
    pub fn is_constant(&self) -> bool {
        let c = |x: &FqRat| {
            x.num().degree().unwrap_or(0) == 0 && x.den().degree().unwrap_or(0) == 0
        };
        self.coeffs.iter().all(c) && c(&self.target)
    }
}

/// All exponent vectors `e in [-box_bound, box_bound]^r` whose group element
/// satisfies the relation exactly. Exhaustive within the box; sorted.
pub fn intersect_hypersurface(
    group: &TorusSubgroup,
    relation: &LinearRelation,
    box_bound: i64,
) -> Result<Vec<Vec<i64>>> {
    if relation.coeffs.len() != group.ambient {
        return Err(Error::DimensionMismatch {
            expected: group.ambient,
            got: relation.coeffs.len(),
            context: "hypersurface relation coefficients",
        });
    }
    if box_bound < 0 {
        return Err(Error::InvalidInput("box bound must be >= 0".into()));
    }
    let f = &group.field;
    let r = group.rank();
    let width = (2 * box_bound + 1) as usize;
    let guard = (0..r).try_fold(1usize, |acc, _| {
        acc.checked_mul(width).filter(|&x| x <= 2_000_000).ok_or_else(|| {
            Error::TooLarge(format!("{width}^{r} exponent box"))
        })
    })?;
    let _ = guard;
    // Power tables per generator axis.
    let mut tables: Vec<Vec<Vec<FqRat>>> = Vec::with_capacity(r);
    for g in &group.generators {
        let mut axis = Vec::with_capacity(width);
        for e in -box_bound..=box_bound {
            let tuple: Result<Vec<FqRat>> = g.iter().map(|x| x.pow_i64(f, e)).collect();
            axis.push(tuple?);
        }
        tables.push(axis);
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; r];
    loop {
        // Componentwise product across axes.
        let mut x = vec![FqRat::one(f); group.ambient];
        for (axis, &i) in tables.iter().zip(&idx) {
            for (l, v) in axis[i].iter().enumerate() {
                x[l] = x[l].mul(f, v)?;
            }
        }
        // Evaluate the relation over a common denominator without reducing:
        // only equality matters, checked by cross-multiplication.
        let mut num = FqPoly::zero();
        let mut den = FqPoly::one(f);
        for (l, c) in relation.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let tn = c.num().mul(f, x[l].num());
            let td = c.den().mul(f, x[l].den());
            num = num.mul(f, &td).add(f, &tn.mul(f, &den));
            den = den.mul(f, &td);
        }
        let holds =
            num.mul(f, relation.target.den()) == relation.target.num().mul(f, &den);
        if holds {
            out.push(idx.iter().map(|&i| i as i64 - box_bound).collect());
        }
        let mut i = 0;
        loop {
            if i == r {
                out.sort();
                return Ok(out);
            }
            idx[i] += 1;
            if idx[i] < width {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Characteristic-p closure: when the relation is fixed by Frobenius, `q e`
/// must solve it whenever `e` does. Checked for every solution whose scaled
/// image stays inside the box.
pub fn closure_check(
    solutions: &[Vec<i64>],
    q: u64,
    box_bound: i64,
) -> bool {
    let set: BTreeSet<&Vec<i64>> = solutions.iter().collect();
    for e in solutions {
        let scaled: Vec<i64> = e.iter().map(|&x| x * q as i64).collect();
        if scaled.iter().all(|&x| x.abs() <= box_bound) && !set.contains(&scaled) {
            return false;
        }
    }
    true
}

/// One Frobenius orbit `{q^n e0}` inside the box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitCluster {
    pub base: Vec<i64>,
    pub points: Vec<Vec<i64>>,
}

/// A full lattice line `{offset + n * direction}` of solutions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeLine {
    pub offset: Vec<i64>,
    pub direction: Vec<i64>,
    pub points: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Default)]
pub struct ClusterResult {
    pub orbits: Vec<OrbitCluster>,
    pub lines: Vec<LatticeLine>,
    pub unexplained: Vec<Vec<i64>>,
}

impl ClusterResult {
    /// Every clustered point, each accounted for exactly once.
    pub fn accounted_points(&self) -> BTreeSet<Vec<i64>> {
        let mut out = BTreeSet::new();
        let mut total = 0usize;
        for o in &self.orbits {
            total += o.points.len();
            out.extend(o.points.iter().cloned());
        }
        for l in &self.lines {
            total += l.points.len();
            out.extend(l.points.iter().cloned());
        }
        total += self.unexplained.len();
        out.extend(self.unexplained.iter().cloned());
        debug_assert_eq!(total, out.len(), "a point was claimed twice");
        out
    }
}

/// Greedy factoring of a solution list (from a symmetric box) into full
/// lattice lines and Frobenius orbits `e -> q e`. Every input point is
/// accounted for exactly once; what fits neither pattern is listed as
/// unexplained, never dropped.
pub fn cluster_fsets(solutions: &[Vec<i64>], q: u64, box_bound: i64) -> ClusterResult {
    let mut result = ClusterResult::default();
    if solutions.is_empty() {
        return result;
    }
    let all: BTreeSet<Vec<i64>> = solutions.iter().cloned().collect();
    let mut unclaimed: BTreeSet<Vec<i64>> = all.clone();
    let in_box = |e: &[i64]| e.iter().all(|&x| x.abs() <= box_bound);

    // Lattice lines: a direction from a pair of solutions whose full box
    // line consists of solutions. At least three points, so a bare orbit
    // pair is not misread as a line.
    let sorted: Vec<Vec<i64>> = all.iter().cloned().collect();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            if !unclaimed.contains(&sorted[i]) || !unclaimed.contains(&sorted[j]) {
                continue;
            }
            let mut dir: Vec<i64> =
                sorted[j].iter().zip(&sorted[i]).map(|(a, b)| a - b).collect();
            let g = dir.iter().fold(0i64, |acc, &x| gcd_i64(acc, x.abs()));
            if g == 0 {
                continue;
            }
            for d in dir.iter_mut() {
                *d /= g;
            }
            if dir.iter().find(|&&d| d != 0).map_or(false, |&d| d < 0) {
                for d in dir.iter_mut() {
                    *d = -*d;
                }
            }
            // Walk the full line through sorted[i] inside the box.
            let mut line_pts = Vec::new();
            let mut ok = true;
            for sign in [-1i64, 1] {
                let mut n = if sign < 0 { 1 } else { 0 };
                loop {
                    let p: Vec<i64> = sorted[i]
                        .iter()
                        .zip(&dir)
                        .map(|(a, d)| a + sign * n * d)
                        .collect();
                    if !in_box(&p) {
                        break;
                    }
                    if !all.contains(&p) {
                        ok = false;
                        break;
                    }
                    line_pts.push(p);
                    n += 1;
                }
                if !ok {
                    break;
                }
            }
            if ok && line_pts.len() >= 3 {
                line_pts.sort();
                for p in &line_pts {
                    unclaimed.remove(p);
                }
                result.lines.push(LatticeLine {
                    offset: line_pts[0].clone(),
                    direction: dir,
                    points: line_pts,
                });
            }
        }
    }

    // Frobenius orbits, smallest bases first. A base is a point that is not
    // q times another solution; its chain inside the box must consist of
    // solutions throughout.
    let candidates: Vec<Vec<i64>> = unclaimed.iter().cloned().collect();
    for base in candidates {
        if !unclaimed.contains(&base) {
            continue;
        }
        let divisible = base.iter().all(|&x| x % q as i64 == 0);
        if divisible && base.iter().any(|&x| x != 0) {
            let parent: Vec<i64> = base.iter().map(|&x| x / q as i64).collect();
            if all.contains(&parent) {
                continue; // not a base; reached from the parent
            }
        }
        let mut chain = Vec::new();
        let mut cur = base.clone();
        let mut ok = true;
        loop {
            if !in_box(&cur) {
                break;
            }
            if !all.contains(&cur) {
                ok = false;
                break;
            }
            chain.push(cur.clone());
            let next: Vec<i64> = cur.iter().map(|&x| x * q as i64).collect();
            if next == cur {
                break; // fixed point (the origin)
            }
            cur = next;
        }
        if ok && !chain.is_empty() {
            for p in &chain {
                unclaimed.remove(p);
            }
            result.orbits.push(OrbitCluster { base, points: chain });
        }
    }
    result.unexplained = unclaimed.into_iter().collect();
    result
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd_i64(b, a % b)
    }
}

/// The exponent module `Z^r` with `F = q * id` (minimal polynomial `X - q`).
pub fn exponent_module(q: u64, rank: usize) -> FgModule {
    let mut a = IntMatrix::zero(rank, rank);
    for i in 0..rank {
        a.set(i, i, BigInt::from(q));
    }
    FgModule::new(
        rank,
        vec![],
        a,
        IntMatrix::zero(0, rank),
        IntMatrix::zero(0, 0),
        IntPoly::new(vec![-BigInt::from(q), BigInt::from(1)]),
    )
    .expect("exponent module is always valid")
}

fn exp_element(module: &FgModule, e: &[i64]) -> ModElement {
    module.element_from_i64(e, &[])
}

/// Renders a cluster over the exponent module: orbits become groupless
/// F-sets `0 + S(e0; 1)`, lines become F-sets (singleton plus an invariant
/// subgroup).
pub fn cluster_as_fsets(
    cluster: &ClusterResult,
    q: u64,
    rank: usize,
) -> (Vec<GrouplessFSet>, Vec<FSet>) {
    let module = exponent_module(q, rank);
    let orbits = cluster
        .orbits
        .iter()
        .map(|o| GrouplessFSet {
            base: module.zero(),
            terms: vec![(exp_element(&module, &o.base), 1)],
        })
        .collect();
    let lines = cluster
        .lines
        .iter()
        .map(|l| FSet {
            groupless: GrouplessFSet::singleton(exp_element(&module, &l.offset)),
            subgroup: vec![exp_element(&module, &l.direction)],
            f_invariant: true,
        })
        .collect();
    (orbits, lines)
}
