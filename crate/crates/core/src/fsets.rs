//! F-sets as data: groupless F-sets (base point plus a sum of F^delta
//! orbits), F-sets with a subgroup part, and exponent sets: finite unions of
//! explicit tuples and bounded lattice cosets in `N^k`: together with their
//! algebra.
//!
//! A bounded lattice coset denotes `{x in Z^k : x - c in L, x_i >= m_i}`.
//! It is more general than a coset of a semigroup (independent offset and
//! lower bounds), which buys closure under intersection; a semigroup coset
//! `c + (L cap N^k)` is the case `m = c`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::frobmod::{FgModule, ModElement};
use crate::matrix::{lattice_member, IntMatrix};

/// `b + S(a_1..a_k; delta_1..delta_k)`. `k = 0` is allowed and denotes the
/// singleton `{b}`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct GrouplessFSet {
    pub base: ModElement,
    pub terms: Vec<(ModElement, u64)>,
}

impl GrouplessFSet {
    pub fn singleton(base: ModElement) -> Self {
        GrouplessFSet { base, terms: vec![] }
    }

    pub fn new(base: ModElement, terms: Vec<(ModElement, u64)>) -> Result<Self> {
        if let Some((_, d)) = terms.iter().find(|(_, d)| *d == 0) {
            return Err(Error::InvalidInput(format!("orbit step delta = {d} must be >= 1")));
        }
        Ok(GrouplessFSet { base, terms })
    }
}

/// A groupless F-set plus a subgroup part given by generators. The
/// `f_invariant` flag is evidence that `F` maps the subgroup into itself;
/// [`verify_f_invariant`] checks it.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct FSet {
    pub groupless: GrouplessFSet,
    pub subgroup: Vec<ModElement>,
    pub f_invariant: bool,
}

/// Checks that `F(h)` stays in the subgroup for every generator `h`.
pub fn verify_f_invariant(module: &FgModule, subgroup: &[ModElement]) -> Result<bool> {
    for h in subgroup {
        let img = module.apply_f(h);
        if !module.subgroup_contains(subgroup, &img)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `{x in Z^k : x - offset in lattice, x_i >= lower_bounds_i}`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct BoundedLatticeCoset {
    pub dim: usize,
    pub offset: Vec<BigInt>,
    /// Columns span the lattice; kept in HNF echelon form by `normalize`.
    pub lattice: IntMatrix,
    pub lower_bounds: Vec<BigInt>,
}

impl BoundedLatticeCoset {
    pub fn new(offset: Vec<BigInt>, lattice: IntMatrix, lower_bounds: Vec<BigInt>) -> Result<Self> {
        let dim = offset.len();
        if lattice.rows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: lattice.rows(),
                context: "coset lattice rows",
            });
        }
        if lower_bounds.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: lower_bounds.len(),
                context: "coset lower bounds",
            });
        }
        Ok(BoundedLatticeCoset { dim, offset, lattice, lower_bounds }.normalize())
    }

    /// A single point.
    pub fn point(offset: Vec<BigInt>) -> Self {
        let dim = offset.len();
        BoundedLatticeCoset {
            dim,
            offset: offset.clone(),
            lattice: IntMatrix::zero(dim, 0),
            lower_bounds: offset,
        }
    }

    /// All of `N^k`.
    pub fn full(dim: usize) -> Self {
        BoundedLatticeCoset {
            dim,
            offset: vec![BigInt::zero(); dim],
            lattice: IntMatrix::identity(dim),
            lower_bounds: vec![BigInt::zero(); dim],
        }
    }

    /// Canonical form: HNF lattice basis without zero columns and the offset
    /// reduced into the fundamental cell (the offset only matters modulo the
    /// lattice; the point set is unchanged).
    pub fn normalize(&self) -> Self {
        let (h, _) = self.lattice.hnf();
        let basis = h.drop_zero_columns();
        let mut offset = self.offset.clone();
        for (r, c) in basis.echelon_pivots() {
            let q = offset[r].div_floor(basis.get(r, c));
            if !q.is_zero() {
                for i in 0..self.dim {
                    let sub = basis.get(i, c) * &q;
                    offset[i] -= sub;
                }
            }
        }
        BoundedLatticeCoset {
            dim: self.dim,
            offset,
            lattice: basis,
            lower_bounds: self.lower_bounds.clone(),
        }
    }

    pub fn member(&self, x: &[BigInt]) -> Result<bool> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
                context: "coset membership",
            });
        }
        if x.iter().zip(&self.lower_bounds).any(|(xi, mi)| xi < mi) {
            return Ok(false);
        }
        let diff: Vec<BigInt> = x.iter().zip(&self.offset).map(|(a, b)| a - b).collect();
        Ok(lattice_member(&self.lattice, &diff)?.is_some())
    }

    /// All points with `max(lower_bound_i, 0) <= x_i <= hi`.
    pub fn enumerate_box(&self, hi: u64) -> Vec<Vec<BigInt>> {
        let basis = self.normalize();
        let lo: Vec<BigInt> = basis
            .lower_bounds
            .iter()
            .map(|m| if m.is_negative() { BigInt::zero() } else { m.clone() })
            .collect();
        let hi = BigInt::from(hi);
        let pivots = basis.lattice.echelon_pivots();
        let mut out = Vec::new();
        let mut coeffs: Vec<BigInt> = Vec::new();
        fn rec(
            basis: &BoundedLatticeCoset,
            pivots: &[(usize, usize)],
            lo: &[BigInt],
            hi: &BigInt,
            coeffs: &mut Vec<BigInt>,
            out: &mut Vec<Vec<BigInt>>,
        ) {
            let level = coeffs.len();
            if level == pivots.len() {
                let mut x = basis.offset.clone();
                for (l, &(_, c)) in pivots.iter().enumerate() {
                    for i in 0..basis.dim {
                        let add = basis.lattice.get(i, c) * &coeffs[l];
                        x[i] += add;
                    }
                }
                if x.iter().enumerate().all(|(i, xi)| *xi >= lo[i] && xi <= hi) {
                    out.push(x);
                }
                return;
            }
            let (r, c) = pivots[level];
            // Value at the pivot row is already determined by earlier columns.
            let mut partial = basis.offset[r].clone();
            for (l, &(_, cl)) in pivots.iter().take(level).enumerate() {
                partial += basis.lattice.get(r, cl) * &coeffs[l];
            }
            let p = basis.lattice.get(r, c);
            let y_lo = (&lo[r] - &partial).div_ceil(p);
            let y_hi = (hi - &partial).div_floor(p);
            let mut y = y_lo;
            while y <= y_hi {
                coeffs.push(y.clone());
                rec(basis, pivots, lo, hi, coeffs, out);
                coeffs.pop();
                y += 1;
            }
        }
        rec(&basis, &pivots, &lo, &hi, &mut coeffs, &mut out);
        out.sort();
        out.dedup();
        out
    }
}

/// Finite union of explicit tuples and bounded lattice cosets in `N^k`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExponentSet {
    pub dim: usize,
    pub explicit: Vec<Vec<BigInt>>,
    pub cosets: Vec<BoundedLatticeCoset>,
}

impl ExponentSet {
    pub fn empty(dim: usize) -> Self {
        ExponentSet { dim, explicit: vec![], cosets: vec![] }
    }

    pub fn full(dim: usize) -> Self {
        ExponentSet { dim, explicit: vec![], cosets: vec![BoundedLatticeCoset::full(dim)] }
    }

    pub fn from_parts(
        dim: usize,
        explicit: Vec<Vec<BigInt>>,
        cosets: Vec<BoundedLatticeCoset>,
    ) -> Result<Self> {
        for t in &explicit {
            if t.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: t.len(),
                    context: "explicit exponent tuple",
                });
            }
            if t.iter().any(|x| x.is_negative()) {
                return Err(Error::InvalidInput("exponent tuples must be componentwise >= 0".into()));
            }
        }
        for c in &cosets {
            if c.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.dim,
                    context: "coset dimension",
                });
            }
        }
        let mut set = ExponentSet { dim, explicit, cosets };
        set.canonicalize();
        Ok(set)
    }

    pub fn is_trivially_empty(&self) -> bool {
        self.explicit.is_empty() && self.cosets.is_empty()
    }

    /// Sorts components, dedups, clamps coset lower bounds into `N^k` and
    /// drops explicit tuples already covered by a coset.
    pub fn canonicalize(&mut self) {
        for c in self.cosets.iter_mut() {
            for m in c.lower_bounds.iter_mut() {
                if m.is_negative() {
                    *m = BigInt::zero();
                }
            }
            *c = c.normalize();
        }
        self.cosets.sort();
        self.cosets.dedup();
        let cosets = &self.cosets;
        self.explicit.retain(|t| {
            !cosets.iter().any(|c| c.member(t).unwrap_or(false))
        });
        self.explicit.sort();
        self.explicit.dedup();
    }

    pub fn member(&self, x: &[BigInt]) -> Result<bool> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
                context: "exponent set membership",
            });
        }
        if x.iter().any(|v| v.is_negative()) {
            return Ok(false);
        }
        if self.explicit.iter().any(|t| t == x) {
            return Ok(true);
        }
        for c in &self.cosets {
            if c.member(x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Exact set intersection.
    pub fn intersect(&self, other: &ExponentSet) -> Result<ExponentSet> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
                context: "exponent set intersection",
            });
        }
        let mut explicit = Vec::new();
        for t in &self.explicit {
            if other.member(t)? {
                explicit.push(t.clone());
            }
        }
        for t in &other.explicit {
            if self.member(t)? {
                explicit.push(t.clone());
            }
        }
        let mut cosets = Vec::new();
        for a in &self.cosets {
            for b in &other.cosets {
                if let Some(c) = coset_intersect(a, b)? {
                    cosets.push(c);
                }
            }
        }
        ExponentSet::from_parts(self.dim, explicit, cosets)
    }

    /// All members with every coordinate `<= hi`.
    pub fn enumerate_box(&self, hi: u64) -> BTreeSet<Vec<BigInt>> {
        let hi_big = BigInt::from(hi);
        let mut out: BTreeSet<Vec<BigInt>> = self
            .explicit
            .iter()
            .filter(|t| t.iter().all(|x| *x <= hi_big))
            .cloned()
            .collect();
        for c in &self.cosets {
            out.extend(c.enumerate_box(hi));
        }
        out
    }
}

/// Intersection of two bounded lattice cosets: solve the affine system over
/// the integers, intersect the lattices through the kernel of the stacked
/// basis, take componentwise max of the lower bounds.
fn coset_intersect(
    a: &BoundedLatticeCoset,
    b: &BoundedLatticeCoset,
) -> Result<Option<BoundedLatticeCoset>> {
    let dim = a.dim;
    let ra = a.lattice.cols();
    let neg_b = {
        let mut m = b.lattice.clone();
        for j in 0..m.cols() {
            m.neg_col(j);
        }
        m
    };
    let stacked = a.lattice.hconcat(&neg_b);
    let diff: Vec<BigInt> = b.offset.iter().zip(&a.offset).map(|(x, y)| x - y).collect();
    let Some(sol) = lattice_member(&stacked, &diff)? else {
        return Ok(None);
    };
    let mut offset = a.offset.clone();
    for (j, coeff) in sol.iter().take(ra).enumerate() {
        for i in 0..dim {
            let add = a.lattice.get(i, j) * coeff;
            offset[i] += add;
        }
    }
    let kernel = stacked.kernel();
    let cols: Vec<Vec<BigInt>> = (0..kernel.cols())
        .map(|j| {
            let k = kernel.column(j);
            a.lattice.mul_vec(&k[..ra])
        })
        .collect();
    let lattice = IntMatrix::from_columns(&cols, dim);
    let lower_bounds = a
        .lower_bounds
        .iter()
        .zip(&b.lower_bounds)
        .map(|(x, y)| x.max(y).clone())
        .collect();
    Ok(Some(BoundedLatticeCoset::new(offset, lattice, lower_bounds)?))
}

/// Enumerates `{b + sum_i F^{delta_i n_i} a_i : 0 <= n_i <= bound}`.
pub fn points_up_to(
    module: &FgModule,
    fset: &GrouplessFSet,
    bound: u64,
) -> BTreeSet<ModElement> {
    let orbits: Vec<Vec<ModElement>> = fset
        .terms
        .iter()
        .map(|(a, delta)| {
            let mut orbit = Vec::with_capacity(bound as usize + 1);
            let mut cur = a.clone();
            for n in 0..=bound {
                if n > 0 {
                    for _ in 0..*delta {
                        cur = module.apply_f(&cur);
                    }
                }
                orbit.push(cur.clone());
            }
            orbit
        })
        .collect();
    let mut out = BTreeSet::new();
    let k = orbits.len();
    let mut idx = vec![0usize; k];
    loop {
        let mut p = fset.base.clone();
        for (i, orbit) in orbits.iter().enumerate() {
            p = module.add(&p, &orbit[idx[i]]);
        }
        out.insert(p);
        // Odometer.
        let mut i = 0;
        loop {
            if i == k {
                return out;
            }
            idx[i] += 1;
            if idx[i] <= bound as usize {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Enumerates an F-set: groupless points plus subgroup combinations with
/// coefficients in `[-subgroup_box, subgroup_box]`.
pub fn points_up_to_fset(
    module: &FgModule,
    fset: &FSet,
    bound: u64,
    subgroup_box: u64,
) -> BTreeSet<ModElement> {
    let core = points_up_to(module, &fset.groupless, bound);
    if fset.subgroup.is_empty() {
        return core;
    }
    let mut subgroup_pts: BTreeSet<ModElement> = BTreeSet::new();
    let r = fset.subgroup.len();
    let span = subgroup_box as i64;
    let mut coeffs = vec![-span; r];
    'outer: loop {
        let mut h = module.zero();
        for (i, c) in coeffs.iter().enumerate() {
            h = module.add(&h, &module.scale(&BigInt::from(*c), &fset.subgroup[i]));
        }
        subgroup_pts.insert(h);
        let mut i = 0;
        loop {
            if i == r {
                break 'outer;
            }
            coeffs[i] += 1;
            if coeffs[i] <= span {
                break;
            }
            coeffs[i] = -span;
            i += 1;
        }
    }
    let mut out = BTreeSet::new();
    for p in &core {
        for h in &subgroup_pts {
            out.insert(module.add(p, h));
        }
    }
    out
}

/// Re-expresses an F^b-set as an F-set: the same point set with every orbit
/// step multiplied by `b`.
pub fn scale_delta(fset: &GrouplessFSet, b: u64) -> Result<GrouplessFSet> {
    if b == 0 {
        return Err(Error::InvalidInput("scale_delta needs b >= 1".into()));
    }
    Ok(GrouplessFSet {
        base: fset.base.clone(),
        terms: fset.terms.iter().map(|(a, d)| (a.clone(), d * b)).collect(),
    })
}

/// A coset successfully translated into a groupless F-set, with its source
/// kept for test transparency.
#[derive(Clone, Debug)]
pub struct CollapsedCoset {
    pub fset: GrouplessFSet,
    pub source: BoundedLatticeCoset,
}

#[derive(Clone, Debug)]
pub struct CollapseOutcome {
    /// Singletons from the explicit tuples.
    pub singletons: Vec<GrouplessFSet>,
    /// Cosets inside the disjoint-support, constant-step fragment.
    pub converted: Vec<CollapsedCoset>,
    /// Cosets outside the fragment, returned unconverted.
    pub residual: Vec<BoundedLatticeCoset>,
}

impl CollapseOutcome {
    pub fn all_fsets(&self) -> Vec<GrouplessFSet> {
        let mut out = self.singletons.clone();
        out.extend(self.converted.iter().map(|c| c.fset.clone()));
        out.sort();
        out.dedup();
        out
    }
}

/// Translates an exponent set back into groupless F-sets for the orbit
/// `{q + sum_i F^{n_i} p_i}` (steps `delta_i = 1`; general steps are handled
/// upstream by exponent reindexing).
///
/// A coset converts when its HNF basis columns have pairwise disjoint
/// supports and a constant positive value on each support: column `w` with
/// value `d` on support `S` contributes the orbit term
/// `a_w = sum_{i in S} F^{c_i} p_i` with step `d`, where `c` is the offset
/// moved to the minimal member of the coset. Everything else lands in
/// `residual`, never silently dropped. Cosets that are provably empty
/// (an out-of-range fixed coordinate) denote the empty set and produce
/// nothing.
pub fn collapse_to_groupless(
    module: &FgModule,
    q: &ModElement,
    ps: &[ModElement],
    es: &ExponentSet,
) -> Result<CollapseOutcome> {
    if es.dim != ps.len() {
        return Err(Error::DimensionMismatch {
            expected: ps.len(),
            got: es.dim,
            context: "collapse_to_groupless",
        });
    }
    let frob_of = |p: &ModElement, e: &BigInt| -> Result<ModElement> {
        let n = e
            .to_u64()
            .ok_or_else(|| Error::TooLarge(format!("exponent {e} out of range")))?;
        Ok(module.frob_power(p, n))
    };
    let mut singletons = Vec::new();
    for t in &es.explicit {
        let mut base = q.clone();
        for (i, e) in t.iter().enumerate() {
            base = module.add(&base, &frob_of(&ps[i], e)?);
        }
        singletons.push(GrouplessFSet::singleton(base));
    }
    let mut converted = Vec::new();
    let mut residual = Vec::new();
    'coset: for coset in &es.cosets {
        let c = coset.normalize();
        let lo: Vec<BigInt> = c
            .lower_bounds
            .iter()
            .map(|m| if m.is_negative() { BigInt::zero() } else { m.clone() })
            .collect();
        // Column supports and constant values. HNF pivots are positive, so a
        // constant-valued column is automatically a positive step.
        let mut supports: Vec<(Vec<usize>, BigInt)> = Vec::new();
        let mut covered = vec![false; c.dim];
        for j in 0..c.lattice.cols() {
            let col = c.lattice.column(j);
            let support: Vec<usize> =
                (0..c.dim).filter(|&i| !col[i].is_zero()).collect();
            let value = col[support[0]].clone();
            if value.is_negative() || support.iter().any(|&i| col[i] != value) {
                residual.push(coset.clone());
                continue 'coset;
            }
            for &i in &support {
                if covered[i] {
                    residual.push(coset.clone());
                    continue 'coset;
                }
                covered[i] = true;
            }
            supports.push((support, value));
        }
        // Shift the offset to the minimal member: per column, the smallest
        // integer multiple that clears every lower bound on its support.
        let mut offset = c.offset.clone();
        for (j, (support, step)) in supports.iter().enumerate() {
            let n0 = support
                .iter()
                .map(|&i| (&lo[i] - &offset[i]).div_ceil(step))
                .max()
                .expect("nonempty support");
            if !n0.is_zero() {
                for i in 0..c.dim {
                    let add = c.lattice.get(i, j) * &n0;
                    offset[i] += add;
                }
            }
        }
        // Coordinates outside every support are pinned at the offset; if one
        // is below its bound the coset is empty.
        for i in 0..c.dim {
            if !covered[i] && offset[i] < lo[i] {
                continue 'coset;
            }
        }
        let mut base = q.clone();
        for i in 0..c.dim {
            if !covered[i] {
                base = module.add(&base, &frob_of(&ps[i], &offset[i])?);
            }
        }
        let mut terms = Vec::new();
        for (support, step) in &supports {
            let mut a = module.zero();
            for &i in support {
                a = module.add(&a, &frob_of(&ps[i], &offset[i])?);
            }
            let d = step
                .to_u64()
                .ok_or_else(|| Error::TooLarge(format!("orbit step {step} out of range")))?;
            terms.push((a, d));
        }
        converted.push(CollapsedCoset {
            fset: GrouplessFSet { base, terms },
            source: coset.clone(),
        });
    }
    singletons.sort();
    singletons.dedup();
    Ok(CollapseOutcome { singletons, converted, residual })
}
