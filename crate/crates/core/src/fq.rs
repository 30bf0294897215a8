//! Finite fields `F_{p^n}` as polynomial residues modulo a fixed irreducible
//! polynomial, dense univariate polynomials over them, and reduced rational
//! functions.
//!
//! Field elements are coefficient vectors over `F_p`, low degree first. The
//! moduli come from a fixed table of Conway-style polynomials for the small
//! `(p, n)` the suites use; a custom modulus can be supplied and is checked
//! for irreducibility by brute force. The class of `x` is primitive for the
//! tabulated moduli, which makes "the" generator of an extension like
//! `F_{q^2}` a deterministic choice.

use crate::error::{Error, Result};

/// Hard cap on dense polynomial length, to keep Frobenius-power stretches
/// from allocating absurd vectors.
const MAX_DENSE_LEN: usize = 1 << 22;

fn fp_add(p: u64, a: u64, b: u64) -> u64 {
    (a + b) % p
}

fn fp_sub(p: u64, a: u64, b: u64) -> u64 {
    (a + p - b) % p
}

fn fp_mul(p: u64, a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn fp_pow(p: u64, mut a: u64, mut e: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = fp_mul(p, acc, a);
        }
        a = fp_mul(p, a, a);
        e >>= 1;
    }
    acc
}

fn fp_inv(p: u64, a: u64) -> u64 {
    debug_assert!(a % p != 0);
    fp_pow(p, a, p - 2)
}

/// Tabulated irreducible moduli (low degree first, monic). The class of `x`
/// is a multiplicative generator for each entry.
fn modulus_table(p: u64, deg: usize) -> Option<Vec<u64>> {
    let m: &[u64] = match (p, deg) {
        (2, 1) => &[1, 1],
        (3, 1) => &[1, 1],
        (5, 1) => &[3, 1],
        (7, 1) => &[4, 1],
        (11, 1) => &[9, 1],
        (13, 1) => &[11, 1],
        (2, 2) => &[1, 1, 1],
        (2, 3) => &[1, 1, 0, 1],
        (2, 4) => &[1, 1, 0, 0, 1],
        (2, 5) => &[1, 0, 1, 0, 0, 1],
        (2, 6) => &[1, 1, 0, 1, 1, 0, 1],
        (2, 8) => &[1, 0, 1, 1, 1, 0, 0, 0, 1],
        (3, 2) => &[2, 2, 1],
        (3, 3) => &[1, 2, 0, 1],
        (3, 4) => &[2, 0, 0, 2, 1],
        (5, 2) => &[2, 4, 1],
        (5, 3) => &[3, 3, 0, 1],
        (7, 2) => &[3, 6, 1],
        (11, 2) => &[2, 7, 1],
        (13, 2) => &[2, 12, 1],
        _ => return None,
    };
    Some(m.to_vec())
}

/// A finite field `F_{p^deg}`.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct FqField {
    p: u64,
    deg: usize,
    modulus: Vec<u64>,
}

/// Field element: residue coefficients over `F_p`, length `deg`, low first.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct FqElem(pub Vec<u64>);

impl FqField {
    /// Field from the built-in modulus table.
    pub fn new(p: u64, deg: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        let modulus = modulus_table(p, deg).ok_or_else(|| {
            Error::InvalidInput(format!("no tabulated modulus for F_{{{p}^{deg}}}; supply one"))
        })?;
        Ok(FqField { p, deg, modulus })
    }

    /// Field with an explicit modulus (checked monic irreducible).
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        if modulus.len() < 2 {
            return Err(Error::InvalidInput("modulus must have degree >= 1".into()));
        }
        let deg = modulus.len() - 1;
        let modulus: Vec<u64> = modulus.iter().map(|&c| c % p).collect();
        if modulus[deg] != 1 {
            return Err(Error::InvalidInput("modulus must be monic".into()));
        }
        if !fp_poly_irreducible(p, &modulus) {
            return Err(Error::InvalidInput(format!(
                "modulus {modulus:?} is reducible over F_{p}"
            )));
        }
        Ok(FqField { p, deg, modulus })
    }

    /// Field of order `q^a` where `q = p^e` is any prime power.
    pub fn of_order_power(q: u64, a: usize) -> Result<Self> {
        let (p, e) = prime_power(q)
            .ok_or_else(|| Error::InvalidInput(format!("{q} is not a prime power")))?;
        FqField::new(p, e as usize * a)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.deg as u32)
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> FqElem {
        FqElem(vec![0; self.deg])
    }

    pub fn one(&self) -> FqElem {
        self.from_u64(1)
    }

    pub fn from_u64(&self, c: u64) -> FqElem {
        let mut v = vec![0; self.deg];
        v[0] = c % self.p;
        FqElem(v)
    }

    /// Element from low-first coefficients (length at most `deg`).
    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<FqElem> {
        if coeffs.len() > self.deg {
            return Err(Error::InvalidInput(format!(
                "element has {} coefficients but the field has degree {}",
                coeffs.len(),
                self.deg
            )));
        }
        let mut v = vec![0; self.deg];
        for (i, &c) in coeffs.iter().enumerate() {
            v[i] = c % self.p;
        }
        Ok(FqElem(v))
    }

    /// The residue class of `x` (a multiplicative generator for tabulated
    /// moduli). For degree 1 this is the canonical root of the tabulated
    /// linear modulus.
    pub fn gen(&self) -> FqElem {
        if self.deg == 1 {
            return self.from_u64(self.p - self.modulus[0] % self.p);
        }
        let mut v = vec![0; self.deg];
        v[1] = 1;
        FqElem(v)
    }

    pub fn is_zero(&self, a: &FqElem) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        FqElem(a.0.iter().zip(&b.0).map(|(&x, &y)| fp_add(self.p, x, y)).collect())
    }

    pub fn sub(&self, a: &FqElem, b: &FqElem) -> FqElem {
        FqElem(a.0.iter().zip(&b.0).map(|(&x, &y)| fp_sub(self.p, x, y)).collect())
    }

    pub fn neg(&self, a: &FqElem) -> FqElem {
        FqElem(a.0.iter().map(|&x| fp_sub(self.p, 0, x)).collect())
    }

    pub fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        let mut prod = vec![0u64; 2 * self.deg - 1];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                prod[i + j] = fp_add(self.p, prod[i + j], fp_mul(self.p, x, y));
            }
        }
        // Reduce modulo the monic modulus.
        for i in (self.deg..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..self.deg {
                let sub = fp_mul(self.p, c, self.modulus[j]);
                prod[i - self.deg + j] = fp_sub(self.p, prod[i - self.deg + j], sub);
            }
        }
        FqElem(prod[..self.deg].to_vec())
    }

    pub fn pow(&self, a: &FqElem, mut e: u64) -> FqElem {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &FqElem) -> Result<FqElem> {
        if self.is_zero(a) {
            return Err(Error::InvalidInput("inverse of zero".into()));
        }
        // x^(order - 2); the order fits u64 for every tabulated field.
        Ok(self.pow(a, self.order() - 2))
    }

    /// `a^(q^e)` computed as `e` successive `q`-power maps; `q` must be a
    /// power of `p`.
    pub fn frob_iter(&self, a: &FqElem, q: u64, e: u32) -> Result<FqElem> {
        if prime_power(q).map(|(p, _)| p) != Some(self.p) {
            return Err(Error::InvalidInput(format!(
                "twist {q} is not a power of the characteristic {}",
                self.p
            )));
        }
        let mut acc = a.clone();
        for _ in 0..e {
            acc = self.pow(&acc, q);
        }
        Ok(acc)
    }

    /// All field elements in lexicographic coefficient order.
    pub fn all_elements(&self) -> Vec<FqElem> {
        let mut out = vec![vec![]];
        for _ in 0..self.deg {
            let mut next = Vec::with_capacity(out.len() * self.p as usize);
            for prefix in &out {
                for c in 0..self.p {
                    let mut v = prefix.clone();
                    v.push(c);
                    next.push(v);
                }
            }
            out = next;
        }
        out.into_iter().map(FqElem).collect()
    }

    /// Elements of the subfield `F_q` (fixed points of the `q`-power map).
    pub fn subfield_elements(&self, q: u64) -> Result<Vec<FqElem>> {
        let mut out = Vec::new();
        for e in self.all_elements() {
            if self.pow(&e, q) == e {
                out.push(e);
            }
        }
        if out.len() as u64 != q {
            return Err(Error::InvalidInput(format!(
                "subfield of order {q} not contained in F_{{{}^{}}}",
                self.p, self.deg
            )));
        }
        Ok(out)
    }

    pub fn format_elem(&self, a: &FqElem) -> String {
        if self.deg == 1 {
            format!("{}", a.0[0])
        } else {
            let inner: Vec<String> = a.0.iter().map(|c| c.to_string()).collect();
            format!("[{}]", inner.join(", "))
        }
    }
}

/// `(p, e)` with `q = p^e`, or `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            let mut e = 0;
            let mut rest = q;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            return if rest == 1 { Some((p, e)) } else { None };
        }
        p += 1;
    }
    Some((q, 1))
}

fn is_prime(n: u64) -> bool {
    matches!(prime_power(n), Some((_, 1)))
}

// ---- polynomials over F_p (used only for modulus validation) ----

fn fp_poly_rem(p: u64, num: &[u64], den: &[u64]) -> Vec<u64> {
    let mut rem: Vec<u64> = num.to_vec();
    let dd = den.len() - 1;
    let lead_inv = fp_inv(p, den[dd]);
    for i in (dd..rem.len()).rev() {
        if rem[i] == 0 {
            continue;
        }
        let c = fp_mul(p, rem[i], lead_inv);
        for j in 0..=dd {
            let sub = fp_mul(p, c, den[j]);
            rem[i - dd + j] = fp_sub(p, rem[i - dd + j], sub);
        }
    }
    while rem.len() > 1 && *rem.last().unwrap() == 0 {
        rem.pop();
    }
    rem
}

fn fp_poly_irreducible(p: u64, m: &[u64]) -> bool {
    let deg = m.len() - 1;
    if deg == 1 {
        return true;
    }
    // Brute force: no monic divisor of degree 1..deg/2.
    for d in 1..=deg / 2 {
        let total = (p as u128).pow(d as u32);
        for idx in 0..total {
            let mut cand = Vec::with_capacity(d + 1);
            let mut x = idx;
            for _ in 0..d {
                cand.push((x % p as u128) as u64);
                x /= p as u128;
            }
            cand.push(1);
            let rem = fp_poly_rem(p, m, &cand);
            if rem.len() == 1 && rem[0] == 0 {
                return false;
            }
        }
    }
    true
}

// ---- dense polynomials over F_q ----

/// Dense polynomial over an [`FqField`], low degree first, no trailing zero
/// coefficients (the zero polynomial has an empty coefficient vector).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct FqPoly(pub Vec<FqElem>);

impl FqPoly {
    pub fn zero() -> Self {
        FqPoly(vec![])
    }

    pub fn normalized(field: &FqField, mut coeffs: Vec<FqElem>) -> Self {
        while coeffs.last().map_or(false, |c| field.is_zero(c)) {
            coeffs.pop();
        }
        FqPoly(coeffs)
    }

    pub fn constant(field: &FqField, c: FqElem) -> Self {
        Self::normalized(field, vec![c])
    }

    pub fn one(field: &FqField) -> Self {
        Self::constant(field, field.one())
    }

    /// The polynomial `t`.
    pub fn t(field: &FqField) -> Self {
        FqPoly(vec![field.zero(), field.one()])
    }

    pub fn monomial(field: &FqField, c: FqElem, exp: usize) -> Self {
        if field.is_zero(&c) {
            return Self::zero();
        }
        let mut v = vec![field.zero(); exp + 1];
        v[exp] = c;
        FqPoly(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }

    pub fn leading(&self) -> Option<&FqElem> {
        self.0.last()
    }

    pub fn add(&self, field: &FqField, other: &FqPoly) -> FqPoly {
        let len = self.0.len().max(other.0.len());
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            let a = self.0.get(i).cloned().unwrap_or_else(|| field.zero());
            let b = other.0.get(i).cloned().unwrap_or_else(|| field.zero());
            out.push(field.add(&a, &b));
        }
        FqPoly::normalized(field, out)
    }

    pub fn neg(&self, field: &FqField) -> FqPoly {
        FqPoly(self.0.iter().map(|c| field.neg(c)).collect())
    }

    pub fn sub(&self, field: &FqField, other: &FqPoly) -> FqPoly {
        self.add(field, &other.neg(field))
    }

    pub fn mul(&self, field: &FqField, other: &FqPoly) -> FqPoly {
        if self.is_zero() || other.is_zero() {
            return FqPoly::zero();
        }
        let mut out = vec![field.zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if field.is_zero(a) {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] = field.add(&out[i + j], &field.mul(a, b));
            }
        }
        FqPoly::normalized(field, out)
    }

    pub fn scale(&self, field: &FqField, c: &FqElem) -> FqPoly {
        FqPoly::normalized(field, self.0.iter().map(|a| field.mul(a, c)).collect())
    }

    pub fn divrem(&self, field: &FqField, den: &FqPoly) -> Result<(FqPoly, FqPoly)> {
        if den.is_zero() {
            return Err(Error::InvalidInput("polynomial division by zero".into()));
        }
        let dd = den.0.len() - 1;
        let lead_inv = field.inv(den.leading().unwrap())?;
        let mut rem = self.0.clone();
        let mut quot = vec![field.zero(); self.0.len().saturating_sub(dd)];
        for i in (dd..rem.len()).rev() {
            if field.is_zero(&rem[i]) {
                continue;
            }
            let c = field.mul(&rem[i], &lead_inv);
            quot[i - dd] = c.clone();
            for j in 0..=dd {
                let sub = field.mul(&c, &den.0[j]);
                rem[i - dd + j] = field.sub(&rem[i - dd + j], &sub);
            }
        }
        Ok((FqPoly::normalized(field, quot), FqPoly::normalized(field, rem)))
    }

    pub fn gcd(&self, field: &FqField, other: &FqPoly) -> Result<FqPoly> {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(field, &b)?;
            a = b;
            b = r;
        }
        Ok(a.monic(field))
    }

    pub fn monic(&self, field: &FqField) -> FqPoly {
        match self.leading() {
            None => FqPoly::zero(),
            Some(lead) => {
                let inv = field.inv(lead).expect("nonzero leading coefficient");
                self.scale(field, &inv)
            }
        }
    }

    pub fn pow(&self, field: &FqField, mut e: u64) -> FqPoly {
        let mut acc = FqPoly::one(field);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(field, &base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(field, &base);
            }
        }
        acc
    }

    /// `self^(q^e)` for `q` a power of the characteristic: coefficients get
    /// the `q^e`-power map, exponents stretch by `q^e`.
    pub fn frob_stretch(&self, field: &FqField, q: u64, e: u32) -> Result<FqPoly> {
        if self.is_zero() {
            return Ok(FqPoly::zero());
        }
        let mut stretch: usize = 1;
        for _ in 0..e {
            stretch = stretch
                .checked_mul(q as usize)
                .filter(|&s| s <= MAX_DENSE_LEN)
                .ok_or_else(|| Error::TooLarge("Frobenius power exponent stretch".into()))?;
        }
        let new_len = (self.0.len() - 1)
            .checked_mul(stretch)
            .and_then(|x| x.checked_add(1))
            .filter(|&s| s <= MAX_DENSE_LEN)
            .ok_or_else(|| Error::TooLarge("Frobenius power result degree".into()))?;
        let mut out = vec![field.zero(); new_len];
        for (i, c) in self.0.iter().enumerate() {
            if !field.is_zero(c) {
                out[i * stretch] = field.frob_iter(c, q, e)?;
            }
        }
        Ok(FqPoly::normalized(field, out))
    }

    pub fn format(&self, field: &FqField) -> String {
        let inner: Vec<String> = self.0.iter().map(|c| field.format_elem(c)).collect();
        format!("[{}]", inner.join(", "))
    }
}

// ---- rational functions ----

/// Reduced rational function over `F_q`: `gcd(num, den) = 1`, `den` monic and
/// nonzero. Canonical, so equality is structural.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct FqRat {
    num: FqPoly,
    den: FqPoly,
}

impl FqRat {
    pub fn new(field: &FqField, num: FqPoly, den: FqPoly) -> Result<FqRat> {
        if den.is_zero() {
            return Err(Error::InvalidInput("rational function with zero denominator".into()));
        }
        if num.is_zero() {
            return Ok(FqRat { num: FqPoly::zero(), den: FqPoly::one(field) });
        }
        let g = num.gcd(field, &den)?;
        let (num, _) = num.divrem(field, &g)?;
        let (den, _) = den.divrem(field, &g)?;
        let lead_inv = field.inv(den.leading().unwrap())?;
        Ok(FqRat { num: num.scale(field, &lead_inv), den: den.scale(field, &lead_inv) })
    }

    pub fn from_poly(field: &FqField, num: FqPoly) -> FqRat {
        FqRat { num, den: FqPoly::one(field) }
    }

    pub fn zero(field: &FqField) -> FqRat {
        FqRat { num: FqPoly::zero(), den: FqPoly::one(field) }
    }

    pub fn one(field: &FqField) -> FqRat {
        FqRat { num: FqPoly::one(field), den: FqPoly::one(field) }
    }

    /// The rational function `t`.
    pub fn t(field: &FqField) -> FqRat {
        FqRat { num: FqPoly::t(field), den: FqPoly::one(field) }
    }

    pub fn num(&self) -> &FqPoly {
        &self.num
    }

    pub fn den(&self) -> &FqPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self, field: &FqField) -> bool {
        self.num == FqPoly::one(field) && self.den == FqPoly::one(field)
    }

    pub fn add(&self, field: &FqField, other: &FqRat) -> Result<FqRat> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let num = self
            .num
            .mul(field, &other.den)
            .add(field, &other.num.mul(field, &self.den));
        FqRat::new(field, num, self.den.mul(field, &other.den))
    }

    pub fn neg(&self, field: &FqField) -> FqRat {
        FqRat { num: self.num.neg(field), den: self.den.clone() }
    }

    pub fn sub(&self, field: &FqField, other: &FqRat) -> Result<FqRat> {
        self.add(field, &other.neg(field))
    }

    pub fn mul(&self, field: &FqField, other: &FqRat) -> Result<FqRat> {
        if self.is_one(field) {
            return Ok(other.clone());
        }
        if other.is_one(field) {
            return Ok(self.clone());
        }
        FqRat::new(field, self.num.mul(field, &other.num), self.den.mul(field, &other.den))
    }

    pub fn inv(&self, field: &FqField) -> Result<FqRat> {
        if self.is_zero() {
            return Err(Error::InvalidInput("inverse of the zero rational function".into()));
        }
        FqRat::new(field, self.den.clone(), self.num.clone())
    }

    pub fn scale(&self, field: &FqField, c: &FqElem) -> Result<FqRat> {
        FqRat::new(field, self.num.scale(field, c), self.den.clone())
    }

    pub fn pow_i64(&self, field: &FqField, e: i64) -> Result<FqRat> {
        if e < 0 {
            return self.inv(field)?.pow_i64(field, -e);
        }
        Ok(FqRat {
            num: self.num.pow(field, e as u64),
            den: self.den.pow(field, e as u64),
        })
    }

    pub fn format(&self, field: &FqField) -> String {
        format!("{} / {}", self.num.format(field), self.den.format(field))
    }
}

/// `x^(q^e)` for a rational function: Frobenius stretch of numerator and
/// denominator. Exact; `q` must be a power of the field characteristic.
pub fn frobpow_rat(field: &FqField, x: &FqRat, q: u64, e: u32) -> Result<FqRat> {
    let num = x.num.frob_stretch(field, q, e)?;
    let den = x.den.frob_stretch(field, q, e)?;
    // num and den stay coprime and den stays monic under the power map, but
    // re-normalize anyway to keep the invariant locally obvious.
    FqRat::new(field, num, den)
}
