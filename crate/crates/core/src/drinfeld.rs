//! Twisted (Ore) polynomial rings over `F_{q^a}` with the rule
//! `F * c = c^q * F`, Drinfeld-module structure maps `F_q[t] -> F_{q^a}{F}`,
//! their action on rational-function points, and the survey/scenario
//! computations built on them.
//!
//! Points with doubly exponential monomial degrees (towers like `t^(q^54)`)
//! are handled through a sparse monomial representation; dense rational
//! functions are used when the degrees stay reasonable.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fq::{frobpow_rat, prime_power, FqElem, FqField, FqRat};

/// Twisted polynomial `sum c_i F^i` over a fixed field, with twist
/// `F * c = c^q * F`. Coefficients low degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TwistedPoly {
    pub field: FqField,
    pub twist: u64,
    pub coeffs: Vec<FqElem>,
}

impl TwistedPoly {
    pub fn new(field: FqField, twist: u64, mut coeffs: Vec<FqElem>) -> Result<Self> {
        match prime_power(twist) {
            Some((p, _)) if p == field.p() => {}
            _ => {
                return Err(Error::InvalidInput(format!(
                    "twist {twist} is not a power of the field characteristic {}",
                    field.p()
                )))
            }
        }
        while coeffs.last().map_or(false, |c| field.is_zero(c)) {
            coeffs.pop();
        }
        Ok(TwistedPoly { field, twist, coeffs })
    }

    pub fn zero(field: FqField, twist: u64) -> Result<Self> {
        TwistedPoly::new(field, twist, vec![])
    }

    pub fn one(field: FqField, twist: u64) -> Result<Self> {
        let one = field.one();
        TwistedPoly::new(field, twist, vec![one])
    }

    /// `F^e`.
    pub fn f_power(field: FqField, twist: u64, e: usize) -> Result<Self> {
        let mut coeffs = vec![field.zero(); e + 1];
        coeffs[e] = field.one();
        TwistedPoly::new(field, twist, coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// F-adic valuation: index of the lowest nonzero coefficient. Finite for
    /// every nonzero element: nothing is infinitely divisible by `F`.
    pub fn f_valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !self.field.is_zero(c))
    }

    fn check_compatible(&self, other: &TwistedPoly, context: &'static str) -> Result<()> {
        if self.field != other.field || self.twist != other.twist {
            return Err(Error::FieldMismatch { context });
        }
        Ok(())
    }

    pub fn add(&self, other: &TwistedPoly) -> Result<TwistedPoly> {
        self.check_compatible(other, "twisted polynomial addition")?;
        let f = &self.field;
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            let a = self.coeffs.get(i).cloned().unwrap_or_else(|| f.zero());
            let b = other.coeffs.get(i).cloned().unwrap_or_else(|| f.zero());
            out.push(f.add(&a, &b));
        }
        TwistedPoly::new(f.clone(), self.twist, out)
    }

    pub fn neg(&self) -> TwistedPoly {
        let f = &self.field;
        TwistedPoly {
            field: f.clone(),
            twist: self.twist,
            coeffs: self.coeffs.iter().map(|c| f.neg(c)).collect(),
        }
    }

    pub fn sub(&self, other: &TwistedPoly) -> Result<TwistedPoly> {
        self.add(&other.neg())
    }

    /// Left scalar multiple `c * self` (plain coefficientwise scaling:
    /// `c F^0 * sum e_j F^j = sum (c e_j) F^j`).
    pub fn scale(&self, c: &FqElem) -> Result<TwistedPoly> {
        let f = &self.field;
        TwistedPoly::new(
            f.clone(),
            self.twist,
            self.coeffs.iter().map(|e| f.mul(c, e)).collect(),
        )
    }

    /// Twisted product: `(sum c_i F^i)(sum e_j F^j) = sum c_i e_j^{q^i} F^{i+j}`.
    pub fn mul(&self, other: &TwistedPoly) -> Result<TwistedPoly> {
        self.check_compatible(other, "twisted polynomial multiplication")?;
        if self.is_zero() || other.is_zero() {
            return TwistedPoly::zero(self.field.clone(), self.twist);
        }
        let f = &self.field;
        let mut out = vec![f.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            if f.is_zero(c) {
                continue;
            }
            for (j, e) in other.coeffs.iter().enumerate() {
                if f.is_zero(e) {
                    continue;
                }
                let tw = f.frob_iter(e, self.twist, i as u32)?;
                let term = f.mul(c, &tw);
                out[i + j] = f.add(&out[i + j], &term);
            }
        }
        TwistedPoly::new(f.clone(), self.twist, out)
    }

    pub fn pow(&self, e: u64) -> Result<TwistedPoly> {
        let mut acc = TwistedPoly::one(self.field.clone(), self.twist)?;
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Action on a rational function: `sum c_i x^{q^i}`, additive in `x`.
    pub fn act(&self, x: &FqRat) -> Result<FqRat> {
        let f = &self.field;
        let mut acc = FqRat::zero(f);
        for (i, c) in self.coeffs.iter().enumerate() {
            if f.is_zero(c) {
                continue;
            }
            let powed = frobpow_rat(f, x, self.twist, i as u32)?;
            acc = acc.add(f, &powed.scale(f, c)?)?;
        }
        Ok(acc)
    }

    /// Diagonal action on a point of `G_a^g`.
    pub fn act_vec(&self, xs: &[FqRat]) -> Result<Vec<FqRat>> {
        xs.iter().map(|x| self.act(x)).collect()
    }

    /// Action on a sparse polynomial; exponents may be astronomically large.
    pub fn act_sparse(&self, x: &SparsePoly) -> Result<SparsePoly> {
        let f = &self.field;
        let mut acc: BTreeMap<u128, FqElem> = BTreeMap::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if f.is_zero(c) {
                continue;
            }
            // q^i as u128.
            let mut stretch: u128 = 1;
            for _ in 0..i {
                stretch = stretch
                    .checked_mul(self.twist as u128)
                    .ok_or_else(|| Error::TooLarge("sparse exponent overflow".into()))?;
            }
            for (e, a) in x {
                let e2 = e
                    .checked_mul(stretch)
                    .ok_or_else(|| Error::TooLarge("sparse exponent overflow".into()))?;
                let a2 = f.frob_iter(a, self.twist, i as u32)?;
                let term = f.mul(c, &a2);
                let entry = acc.entry(e2).or_insert_with(|| f.zero());
                *entry = f.add(entry, &term);
            }
        }
        Ok(acc.into_iter().filter(|(_, a)| !f.is_zero(a)).collect())
    }

    pub fn format(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if self.field.is_zero(c) {
                continue;
            }
            let cs = self.field.format_elem(c);
            let part = match (i, cs.as_str()) {
                (0, _) => cs,
                (1, "1") => "F".into(),
                (1, _) => format!("{cs}*F"),
                (_, "1") => format!("F^{i}"),
                _ => format!("{cs}*F^{i}"),
            };
            parts.push(part);
        }
        parts.join(" + ")
    }
}

/// Sparse polynomial in `t`: sorted `(exponent, coefficient)` pairs, no
/// zeros.
pub type SparsePoly = Vec<(u128, FqElem)>;

/// `c * t^e` as a sparse polynomial.
pub fn sparse_monomial(field: &FqField, c: FqElem, e: u128) -> SparsePoly {
    if field.is_zero(&c) {
        vec![]
    } else {
        vec![(e, c)]
    }
}

pub fn sparse_scale(field: &FqField, x: &SparsePoly, c: &FqElem) -> SparsePoly {
    x.iter()
        .map(|(e, a)| (*e, field.mul(a, c)))
        .filter(|(_, a)| !field.is_zero(a))
        .collect()
}

pub fn sparse_add(field: &FqField, x: &SparsePoly, y: &SparsePoly) -> SparsePoly {
    let mut acc: BTreeMap<u128, FqElem> = x.iter().cloned().collect();
    for (e, a) in y {
        let entry = acc.entry(*e).or_insert_with(|| field.zero());
        *entry = field.add(entry, a);
    }
    acc.into_iter().filter(|(_, a)| !field.is_zero(a)).collect()
}

/// Drinfeld-module structure map `phi: F_q[t] -> F_{q^a}{F}` determined by
/// the image of `t`.
#[derive(Clone, Debug)]
pub struct DrinfeldModule {
    pub field: FqField,
    /// The `q` of `F_q[t]` and of the twist.
    pub q: u64,
    pub phi_t: TwistedPoly,
}

impl DrinfeldModule {
    pub fn new(field: FqField, q: u64, phi_t: TwistedPoly) -> Result<Self> {
        if phi_t.field != field || phi_t.twist != q {
            return Err(Error::FieldMismatch { context: "Drinfeld module structure map" });
        }
        if phi_t.degree().unwrap_or(0) == 0 {
            return Err(Error::InvalidInput(
                "phi_t must have positive degree in F".into(),
            ));
        }
        Ok(DrinfeldModule { field, q, phi_t })
    }

    /// `phi_a` for `a = sum a_i t^i`; the coefficients must lie in `F_q`
    /// (fixed by the twist).
    pub fn phi(&self, a: &[FqElem]) -> Result<TwistedPoly> {
        let f = &self.field;
        for c in a {
            if f.pow(c, self.q) != *c {
                return Err(Error::InvalidInput(format!(
                    "coefficient {} is not in F_{}",
                    f.format_elem(c),
                    self.q
                )));
            }
        }
        // Horner in the twisted ring.
        let mut acc = TwistedPoly::zero(f.clone(), self.q)?;
        for c in a.iter().rev() {
            acc = acc.mul(&self.phi_t)?;
            acc = acc.add(&TwistedPoly::new(f.clone(), self.q, vec![c.clone()])?)?;
        }
        Ok(acc)
    }

    /// `phi_{t^e}`.
    pub fn phi_t_power(&self, e: u64) -> Result<TwistedPoly> {
        self.phi_t.pow(e)
    }
}

/// Binomial coefficient modulo a prime via base-p digits: the product of
/// digitwise binomials. Zero when `k > n`.
pub fn lucas_binom(n: u64, k: u64, p: u64) -> Result<u64> {
    if prime_power(p) != Some((p, 1)) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    if k > n {
        return Ok(0);
    }
    // Pascal triangle mod p for single digits.
    let pu = p as usize;
    let mut pascal = vec![vec![0u64; pu]; pu];
    for a in 0..pu {
        pascal[a][0] = 1;
        for b in 1..=a {
            pascal[a][b] =
                (pascal[a - 1][b - 1] + if b <= a - 1 { pascal[a - 1][b] } else { 0 }) % p;
        }
    }
    let (mut n, mut k) = (n, k);
    let mut acc = 1u64;
    while n > 0 || k > 0 {
        let (nd, kd) = ((n % p) as usize, (k % p) as usize);
        if kd > nd {
            return Ok(0);
        }
        acc = acc * pascal[nd][kd] % p;
        n /= p;
        k /= p;
    }
    Ok(acc)
}

/// Exhaustive scan of `a in F_q[t]` with `deg a <= deg_bound` (all
/// coefficients, not only monic) whose image `phi_a` is a sum of exactly two
/// powers of `F` with unit coefficients. Returns the polynomials low degree
/// first, sorted.
pub fn two_term_survey(module: &DrinfeldModule, deg_bound: usize) -> Result<Vec<Vec<FqElem>>> {
    let f = &module.field;
    let subfield = f.subfield_elements(module.q)?;
    // phi_t^i precomputed once.
    let mut powers = Vec::with_capacity(deg_bound + 1);
    let mut acc = TwistedPoly::one(f.clone(), module.q)?;
    for _ in 0..=deg_bound {
        powers.push(acc.clone());
        acc = acc.mul(&module.phi_t)?;
    }
    let one = f.one();
    let is_two_unit_terms = |w: &TwistedPoly| -> bool {
        let nonzero: Vec<&FqElem> =
            w.coeffs.iter().filter(|c| !f.is_zero(c)).collect();
        nonzero.len() == 2 && nonzero.iter().all(|c| **c == one)
    };
    let mut out = Vec::new();
    let mut idx = vec![0usize; deg_bound + 1];
    loop {
        if idx.iter().any(|&i| i != 0) {
            let coeffs: Vec<FqElem> = idx.iter().map(|&i| subfield[i].clone()).collect();
            // phi_a as a plain coefficient combination of the powers.
            let mut w = TwistedPoly::zero(f.clone(), module.q)?;
            for (i, c) in coeffs.iter().enumerate() {
                if !f.is_zero(c) {
                    w = w.add(&powers[i].scale(c)?)?;
                }
            }
            if is_two_unit_terms(&w) {
                let mut a = coeffs;
                while a.last().map_or(false, |c| f.is_zero(c)) {
                    a.pop();
                }
                out.push(a);
            }
        }
        let mut i = 0;
        loop {
            if i > deg_bound {
                out.sort_by_key(|a| (a.len(), a.clone()));
                return Ok(out);
            }
            idx[i] += 1;
            if idx[i] < subfield.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Report of the sharp scenario: the cyclic `F_q[t][F^2]`-module generated
/// by `(t, lambda t)` inside `G_a^2(F_{q^2}(t))`, intersected with the line
/// `y = lambda x`.
#[derive(Clone, Debug)]
pub struct SharpReport {
    pub q: u64,
    pub lambda: FqElem,
    pub deg_bound: usize,
    pub total_points: usize,
    pub on_x_count: usize,
    pub even_subring_count: usize,
    /// The on-X subset equals `{(f(t), f(lambda t)) : f in F_q[F^2]}`.
    pub on_x_equals_even_subring: bool,
    /// `phi_{t^2}` maps the on-X subset into the line `y = lambda x`.
    pub phi_t2_preserves_x: bool,
    /// `phi_t` moves the generator `(t, lambda t)` off the line.
    pub phi_t_moves_generator_off_x: bool,
}

/// Runs the sharp scenario for a prime power `q` and an operator degree
/// bound. `lambda` is the fixed generator of `F_{q^2}` over `F_q` (the class
/// of `x` for the tabulated modulus).
pub fn sharp_scenario(q: u64, deg_bound: usize) -> Result<SharpReport> {
    let field = FqField::of_order_power(q, 2)?;
    let lambda = field.gen();
    if field.pow(&lambda, q) == lambda {
        return Err(Error::InvalidInput("lambda lies in F_q; need a proper generator".into()));
    }
    let phi_t = {
        let mut c = vec![field.zero(); 4];
        c[1] = field.one();
        c[3] = field.one();
        TwistedPoly::new(field.clone(), q, c)?
    };
    DrinfeldModule::new(field.clone(), q, phi_t.clone())?;
    let subfield = field.subfield_elements(q)?;

    // F_q-basis of the operator space A[F^2] up to degree deg_bound:
    // even powers F^{2i}, and phi_t * F^{2i} = F^{2i+1} + F^{2i+3}.
    let mut basis: Vec<TwistedPoly> = Vec::new();
    let mut even_flags: Vec<bool> = Vec::new();
    for i in 0.. {
        if 2 * i > deg_bound {
            break;
        }
        basis.push(TwistedPoly::f_power(field.clone(), q, 2 * i)?);
        even_flags.push(true);
    }
    for i in 0.. {
        if 2 * i + 3 > deg_bound {
            break;
        }
        let even = TwistedPoly::f_power(field.clone(), q, 2 * i)?;
        basis.push(phi_t.mul(&even)?);
        even_flags.push(false);
    }

    // Generator point (t, lambda t), sparse.
    let gen_x = sparse_monomial(&field, field.one(), 1);
    let gen_y = sparse_monomial(&field, lambda.clone(), 1);

    let act_point = |w: &TwistedPoly| -> Result<(SparsePoly, SparsePoly)> {
        Ok((w.act_sparse(&gen_x)?, w.act_sparse(&gen_y)?))
    };
    let on_line = |pt: &(SparsePoly, SparsePoly)| -> bool {
        sparse_scale(&field, &pt.0, &lambda) == pt.1
    };

    // Enumerate all F_q-combinations of the basis operators.
    let mut on_x_points = std::collections::BTreeSet::new();
    let mut even_points = std::collections::BTreeSet::new();
    let mut on_x_ops: Vec<TwistedPoly> = Vec::new();
    let mut total = 0usize;
    let mut idx = vec![0usize; basis.len()];
    loop {
        let mut w = TwistedPoly::zero(field.clone(), q)?;
        for (b, &i) in idx.iter().enumerate() {
            if i != 0 {
                w = w.add(&basis[b].scale(&subfield[i])?)?;
            }
        }
        let pt = act_point(&w)?;
        total += 1;
        let even_only = idx
            .iter()
            .enumerate()
            .all(|(b, &i)| even_flags[b] || i == 0);
        if even_only {
            even_points.insert(pt.clone());
        }
        if on_line(&pt) {
            on_x_points.insert(pt);
            on_x_ops.push(w);
        }
        let mut b = 0;
        loop {
            if b == basis.len() {
                // Done enumerating.
                let phi_t2 = phi_t.mul(&phi_t)?;
                let mut phi_t2_preserves = true;
                for w in &on_x_ops {
                    let img = phi_t2.mul(w)?;
                    let pt = act_point(&img)?;
                    if !on_line(&pt) {
                        phi_t2_preserves = false;
                    }
                }
                let moved = {
                    let pt = act_point(&phi_t)?;
                    !on_line(&pt)
                };
                return Ok(SharpReport {
                    q,
                    lambda,
                    deg_bound,
                    total_points: total,
                    on_x_count: on_x_points.len(),
                    even_subring_count: even_points.len(),
                    on_x_equals_even_subring: on_x_points == even_points,
                    phi_t2_preserves_x: phi_t2_preserves,
                    phi_t_moves_generator_off_x: moved,
                });
            }
            idx[b] += 1;
            if idx[b] < subfield.len() {
                break;
            }
            idx[b] = 0;
            b += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fq::FqPoly;
    use crate::sampling::SplitMix64;

    fn fq(p: u64, deg: usize) -> FqField {
        FqField::new(p, deg).unwrap()
    }

    fn phi_f_f2(field: &FqField, q: u64) -> DrinfeldModule {
        // phi_t = F + F^2.
        let c = vec![field.zero(), field.one(), field.one()];
        let phi_t = TwistedPoly::new(field.clone(), q, c).unwrap();
        DrinfeldModule::new(field.clone(), q, phi_t).unwrap()
    }

    #[test]
    fn tw_mul_square_of_f_plus_f3() {
        for q in [3u64, 5] {
            let field = FqField::of_order_power(q, 2).unwrap();
            let mut c = vec![field.zero(); 4];
            c[1] = field.one();
            c[3] = field.one();
            let u = TwistedPoly::new(field.clone(), q, c).unwrap();
            let sq = u.mul(&u).unwrap();
            // F^2 + 2 F^4 + F^6.
            let mut expect = vec![field.zero(); 7];
            expect[2] = field.one();
            expect[4] = field.from_u64(2);
            expect[6] = field.one();
            assert_eq!(sq.coeffs, expect, "q={q}");
        }
    }

    #[test]
    fn tw_mul_twist_rule() {
        // F * lambda = lambda^3 F over F_9.
        let field = fq(3, 2);
        let lam = field.gen();
        let f1 = TwistedPoly::f_power(field.clone(), 3, 1).unwrap();
        let scalar = TwistedPoly::new(field.clone(), 3, vec![lam.clone()]).unwrap();
        let prod = f1.mul(&scalar).unwrap();
        let mut expect = vec![field.zero(); 2];
        expect[1] = field.pow(&lam, 3);
        assert_eq!(prod.coeffs, expect);
    }

    #[test]
    fn tw_mul_associative_random() {
        let field = fq(3, 2);
        let mut rng = SplitMix64::new(0x0a550c);
        let elems = field.all_elements();
        let rand_poly = |rng: &mut SplitMix64| {
            let deg = rng.range_usize(0, 4);
            let coeffs: Vec<FqElem> =
                (0..=deg).map(|_| elems[rng.range_usize(0, elems.len() - 1)].clone()).collect();
            TwistedPoly::new(field.clone(), 3, coeffs).unwrap()
        };
        for _ in 0..40 {
            let u = rand_poly(&mut rng);
            let v = rand_poly(&mut rng);
            let w = rand_poly(&mut rng);
            let left = u.mul(&v).unwrap().mul(&w).unwrap();
            let right = u.mul(&v.mul(&w).unwrap()).unwrap();
            assert_eq!(left, right);
            // Degree additivity on nonzero factors.
            if !u.is_zero() && !v.is_zero() {
                assert_eq!(
                    u.mul(&v).unwrap().degree().unwrap(),
                    u.degree().unwrap() + v.degree().unwrap()
                );
            }
        }
    }

    #[test]
    fn phi_eval_basics() {
        let field = fq(3, 1);
        let module = phi_f_f2(&field, 3);
        // a = t.
        let a = vec![field.zero(), field.one()];
        assert_eq!(module.phi(&a).unwrap(), module.phi_t);
        // a = t^3: phi = F^3 + F^6 (Frobenius-power identity).
        let mut a = vec![field.zero(); 4];
        a[3] = field.one();
        let img = module.phi(&a).unwrap();
        let expect = TwistedPoly::f_power(field.clone(), 3, 3)
            .unwrap()
            .add(&TwistedPoly::f_power(field.clone(), 3, 6).unwrap())
            .unwrap();
        assert_eq!(img, expect);
        // a = t^2 against the direct product oracle.
        let mut a = vec![field.zero(); 3];
        a[2] = field.one();
        let img = module.phi(&a).unwrap();
        assert_eq!(img, module.phi_t.mul(&module.phi_t).unwrap());
        // F^2 + 2F^3 + F^4.
        let mut expect = vec![field.zero(); 5];
        expect[2] = field.one();
        expect[3] = field.from_u64(2);
        expect[4] = field.one();
        assert_eq!(img.coeffs, expect);
    }

    #[test]
    fn phi_is_ring_homomorphism_random() {
        let field = fq(3, 1);
        let module = phi_f_f2(&field, 3);
        let mut rng = SplitMix64::new(0xd41f);
        let rand_a = |rng: &mut SplitMix64| -> Vec<FqElem> {
            let deg = rng.range_usize(0, 5);
            (0..=deg).map(|_| field.from_u64(rng.range_i64(0, 2) as u64)).collect()
        };
        let poly_mul = |a: &[FqElem], b: &[FqElem]| -> Vec<FqElem> {
            let mut out = vec![field.zero(); a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] = field.add(&out[i + j], &field.mul(x, y));
                }
            }
            out
        };
        let poly_add = |a: &[FqElem], b: &[FqElem]| -> Vec<FqElem> {
            let len = a.len().max(b.len());
            (0..len)
                .map(|i| {
                    let x = a.get(i).cloned().unwrap_or_else(|| field.zero());
                    let y = b.get(i).cloned().unwrap_or_else(|| field.zero());
                    field.add(&x, &y)
                })
                .collect()
        };
        for _ in 0..30 {
            let a = rand_a(&mut rng);
            let b = rand_a(&mut rng);
            let lhs = module.phi(&poly_mul(&a, &b)).unwrap();
            let rhs = module.phi(&a).unwrap().mul(&module.phi(&b).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            let lhs = module.phi(&poly_add(&a, &b)).unwrap();
            let rhs = module.phi(&a).unwrap().add(&module.phi(&b).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn f_commutes_with_phi_over_prime_field() {
        let field = fq(3, 1);
        let module = phi_f_f2(&field, 3);
        let f1 = TwistedPoly::f_power(field.clone(), 3, 1).unwrap();
        let a = vec![field.from_u64(2), field.one(), field.from_u64(2)];
        let pa = module.phi(&a).unwrap();
        assert_eq!(f1.mul(&pa).unwrap(), pa.mul(&f1).unwrap());
    }

    #[test]
    fn act_on_t_is_frobenius() {
        let field = fq(2, 1);
        let f1 = TwistedPoly::f_power(field.clone(), 2, 1).unwrap();
        let t = FqRat::t(&field);
        let img = f1.act(&t).unwrap();
        let t2 = frobpow_rat(&field, &t, 2, 1).unwrap();
        assert_eq!(img, t2);
    }

    #[test]
    fn act_additivity_random() {
        let field = fq(3, 2);
        let mut c = vec![field.zero(); 4];
        c[1] = field.one();
        c[3] = field.one();
        let phi_t = TwistedPoly::new(field.clone(), 3, c).unwrap();
        let mut rng = SplitMix64::new(0xadd);
        let elems = field.all_elements();
        let rand_rat = |rng: &mut SplitMix64| {
            let num = FqPoly::normalized(
                &field,
                (0..3).map(|_| elems[rng.range_usize(0, elems.len() - 1)].clone()).collect(),
            );
            let mut den = FqPoly::zero();
            while den.is_zero() {
                den = FqPoly::normalized(
                    &field,
                    (0..2).map(|_| elems[rng.range_usize(0, elems.len() - 1)].clone()).collect(),
                );
            }
            FqRat::new(&field, num, den).unwrap()
        };
        for _ in 0..15 {
            let x = rand_rat(&mut rng);
            let y = rand_rat(&mut rng);
            let lhs = phi_t.act(&x.add(&field, &y).unwrap()).unwrap();
            let rhs = phi_t.act(&x).unwrap().add(&field, &phi_t.act(&y).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn act_lambda_t_identity() {
        // phi_t = F + F^3 over F_{q^2}: acting on lambda*t gives
        // lambda^q * (t^q + t^{q^3}) because lambda^{q^3} = lambda^q.
        for q in [3u64, 5] {
            let field = FqField::of_order_power(q, 2).unwrap();
            let lam = field.gen();
            let mut c = vec![field.zero(); 4];
            c[1] = field.one();
            c[3] = field.one();
            let phi_t = TwistedPoly::new(field.clone(), q, c).unwrap();
            let x = FqRat::from_poly(&field, FqPoly::monomial(&field, lam.clone(), 1));
            let got = phi_t.act(&x).unwrap();
            let t = FqRat::t(&field);
            let expect = phi_t
                .act(&t)
                .unwrap()
                .scale(&field, &field.pow(&lam, q))
                .unwrap();
            assert_eq!(got, expect, "q={q}");
        }
    }

    #[test]
    fn f_valuation_finite_for_nonzero() {
        let field = fq(3, 1);
        let mut c = vec![field.zero(); 5];
        c[2] = field.from_u64(2);
        c[4] = field.one();
        let w = TwistedPoly::new(field.clone(), 3, c).unwrap();
        assert_eq!(w.f_valuation(), Some(2));
        let z = TwistedPoly::zero(field, 3).unwrap();
        assert_eq!(z.f_valuation(), None);
    }

    #[test]
    fn lucas_binom_small_cases() {
        assert_eq!(lucas_binom(4, 2, 2).unwrap(), 0);
        assert_eq!(lucas_binom(9, 9, 3).unwrap(), 1);
        assert_eq!(lucas_binom(8, 8, 2).unwrap(), 1);
        assert_eq!(lucas_binom(3, 5, 7).unwrap(), 0);
    }

    #[test]
    fn lucas_binom_matches_pascal_oracle() {
        for p in [2u64, 3, 5] {
            // Pascal recurrence mod p, no factorials.
            let n_max = 200usize;
            let mut row = vec![1u64];
            for n in 0..=n_max {
                for k in 0..=n {
                    assert_eq!(
                        lucas_binom(n as u64, k as u64, p).unwrap(),
                        row[k],
                        "n={n} k={k} p={p}"
                    );
                }
                let mut next = vec![1u64; n + 2];
                for k in 1..=n {
                    next[k] = (row[k - 1] + row[k]) % p;
                }
                row = next;
            }
        }
    }

    #[test]
    fn survey_q3_f_plus_f2() {
        let field = fq(3, 1);
        let module = phi_f_f2(&field, 3);
        let found = two_term_survey(&module, 9).unwrap();
        // Exactly t, t^3, t^9.
        let t_power = |e: usize| -> Vec<FqElem> {
            let mut v = vec![field.zero(); e + 1];
            v[e] = field.one();
            v
        };
        assert_eq!(found, vec![t_power(1), t_power(3), t_power(9)]);
    }

    #[test]
    fn survey_q2_f_plus_f3() {
        let field = fq(2, 1);
        let mut c = vec![field.zero(); 4];
        c[1] = field.one();
        c[3] = field.one();
        let phi_t = TwistedPoly::new(field.clone(), 2, c).unwrap();
        let module = DrinfeldModule::new(field.clone(), 2, phi_t).unwrap();
        let found = two_term_survey(&module, 8).unwrap();
        let t_power = |e: usize| -> Vec<FqElem> {
            let mut v = vec![field.zero(); e + 1];
            v[e] = field.one();
            v
        };
        assert_eq!(found, vec![t_power(1), t_power(2), t_power(4), t_power(8)]);
        // And phi_{t^{2^n}} = F^{2^n} + F^{3*2^n}.
        for n in 0..=3u32 {
            let e = 1u64 << n;
            let img = module.phi_t_power(e).unwrap();
            let expect = TwistedPoly::f_power(field.clone(), 2, e as usize)
                .unwrap()
                .add(&TwistedPoly::f_power(field.clone(), 2, 3 * e as usize).unwrap())
                .unwrap();
            assert_eq!(img, expect, "n={n}");
        }
    }

    #[test]
    fn survey_excludes_three_term_images() {
        // phi_{t+1} = F^0 + F + F^2 has three terms.
        let field = fq(3, 1);
        let module = phi_f_f2(&field, 3);
        let a = vec![field.one(), field.one()];
        let img = module.phi(&a).unwrap();
        let nonzero = img.coeffs.iter().filter(|c| !field.is_zero(c)).count();
        assert_eq!(nonzero, 3);
        let found = two_term_survey(&module, 2).unwrap();
        assert!(!found.contains(&a));
    }

    #[test]
    fn frobenius_power_identity_ore_level() {
        // phi_{t^{p^n}} = F^{p^n} + F^{2 p^n} for p = q = 3, n <= 3.
        let field = fq(3, 1);
        let module = phi_f_f2(&field, 3);
        for n in 0..=3u32 {
            let e = 3u64.pow(n);
            let img = module.phi_t_power(e).unwrap();
            let expect = TwistedPoly::f_power(field.clone(), 3, e as usize)
                .unwrap()
                .add(&TwistedPoly::f_power(field.clone(), 3, 2 * e as usize).unwrap())
                .unwrap();
            assert_eq!(img, expect, "n={n}");
        }
    }

    #[test]
    fn frobenius_power_identity_rational_level() {
        // As actions on points: phi_{t^{p^n}}(x) = x^{q^{p^n}} + x^{q^{2 p^n}}.
        let field = fq(3, 1);
        let module = phi_f_f2(&field, 3);
        // Dense check for n <= 1 on x = t + 1.
        let x = FqRat::from_poly(
            &field,
            FqPoly::normalized(&field, vec![field.one(), field.one()]),
        );
        for n in 0..=1u32 {
            let e = 3u64.pow(n);
            let img = module.phi_t_power(e).unwrap().act(&x).unwrap();
            let expect = frobpow_rat(&field, &x, 3, e as u32)
                .unwrap()
                .add(&field, &frobpow_rat(&field, &x, 3, 2 * e as u32).unwrap())
                .unwrap();
            assert_eq!(img, expect, "n={n}");
        }
        // Sparse check on x = t up to n = 3 (exponents up to 3^54).
        let t = sparse_monomial(&field, field.one(), 1);
        for n in 0..=3u32 {
            let e = 3u64.pow(n);
            let img = module.phi_t_power(e).unwrap().act_sparse(&t).unwrap();
            let q_e = (3u128).pow(e as u32);
            let q_2e = q_e * q_e;
            let expect = vec![(q_e, field.one()), (q_2e, field.one())];
            assert_eq!(img, expect, "n={n}");
        }
    }

    #[test]
    fn sharp_scenario_q3() {
        let report = sharp_scenario(3, 6).unwrap();
        assert_eq!(report.total_points, 729);
        assert_eq!(report.on_x_count, 81);
        assert_eq!(report.even_subring_count, 81);
        assert!(report.on_x_equals_even_subring);
        assert!(report.phi_t2_preserves_x);
        assert!(report.phi_t_moves_generator_off_x);
    }

    #[test]
    fn sharp_identity_operator_and_odd_power() {
        // f = 1 keeps (t, lambda t) on X; f = F does not.
        let q = 3u64;
        let field = FqField::of_order_power(q, 2).unwrap();
        let lam = field.gen();
        let gen_x = sparse_monomial(&field, field.one(), 1);
        let gen_y = sparse_monomial(&field, lam.clone(), 1);
        let id = TwistedPoly::one(field.clone(), q).unwrap();
        let on_line = |x: &SparsePoly, y: &SparsePoly| -> bool {
            sparse_scale(&field, x, &lam) == *y
        };
        assert!(on_line(&id.act_sparse(&gen_x).unwrap(), &id.act_sparse(&gen_y).unwrap()));
        let f1 = TwistedPoly::f_power(field.clone(), q, 1).unwrap();
        assert!(!on_line(&f1.act_sparse(&gen_x).unwrap(), &f1.act_sparse(&gen_y).unwrap()));
    }

    #[test]
    fn field_mismatch_is_error() {
        let f2 = fq(2, 1);
        let f3 = fq(3, 1);
        let a = TwistedPoly::one(f2, 2).unwrap();
        let b = TwistedPoly::one(f3, 3).unwrap();
        assert!(matches!(a.mul(&b), Err(Error::FieldMismatch { .. })));
    }
}
