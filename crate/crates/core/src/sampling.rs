//! Deterministic pseudo-random sampling for the randomized suites and the
//! CLI self-test.
//!
//! A fixed seed reproduces the exact instance stream, so every randomized
//! check in the crate is replayable.

use num_bigint::BigInt;

use crate::frobmod::{FgModule, IntPoly, ModElement};
use crate::matrix::IntMatrix;

/// SplitMix64. Small, fast, good enough for test-instance generation.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[lo, hi]` (inclusive).
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as i64
    }

    pub fn range_usize(&mut self, lo: usize, hi: usize) -> usize {
        self.range_i64(lo as i64, hi as i64) as usize
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.next_u64() % den < num
    }
}

/// A random module with a valid supplied polynomial for the Frobenius action.
///
/// Construction guarantees `f(F) = 0`: the free block gets its characteristic
/// polynomial as a factor, and when torsion is present the torsion action is
/// a scalar `a` and `(X - a)` is appended, which annihilates the mixed block
/// as well. `det(a_ff) != 0` is enforced by redrawing.
pub fn sample_module(rng: &mut SplitMix64, m_max: usize, s_max: usize, d_max: u64) -> FgModule {
    loop {
        let s = rng.range_usize(0, s_max);
        let m_cap = if s > 0 { m_max.min(3) } else { m_max };
        let m = rng.range_usize(if s == 0 { 1 } else { 0 }, m_cap);
        if m == 0 && s == 0 {
            continue;
        }
        let mut a_ff = IntMatrix::zero(m, m);
        for r in 0..m {
            for c in 0..m {
                a_ff.set(r, c, BigInt::from(rng.range_i64(-3, 3)));
            }
        }
        if m > 0 && a_ff.det() == BigInt::from(0) {
            continue;
        }
        let torsion: Vec<u64> = (0..s).map(|_| rng.range_i64(2, d_max as i64) as u64).collect();
        let scalar = rng.range_i64(0, 5);
        let mut a_tt = IntMatrix::zero(s, s);
        for i in 0..s {
            a_tt.set(i, i, BigInt::from(scalar));
        }
        let mut a_tf = IntMatrix::zero(s, m);
        for r in 0..s {
            for c in 0..m {
                a_tf.set(r, c, BigInt::from(rng.range_i64(0, 6)));
            }
        }
        let mut f = if m > 0 { IntPoly::char_poly(&a_ff) } else { IntPoly::one() };
        if s > 0 {
            f = f.mul(&IntPoly::from_i64(&[-scalar, 1]));
        }
        if f.degree() == 0 {
            continue;
        }
        match FgModule::new(m, torsion, a_ff, a_tf, a_tt, f) {
            Ok(module) => return module,
            Err(_) => continue,
        }
    }
}

/// A random element with small coordinates.
pub fn sample_element(rng: &mut SplitMix64, module: &FgModule, span: i64) -> ModElement {
    let free: Vec<BigInt> =
        (0..module.free_rank()).map(|_| BigInt::from(rng.range_i64(-span, span))).collect();
    let tor: Vec<i64> =
        module.torsion_orders().iter().map(|&d| rng.range_i64(0, d as i64 - 1)).collect();
    module.element_from_i64(
        &free.iter().map(|b| i64::try_from(b).unwrap()).collect::<Vec<_>>(),
        &tor,
    )
}

/// Random subgroup generators with entries in `[-span, span]`.
pub fn sample_generators(
    rng: &mut SplitMix64,
    module: &FgModule,
    count: usize,
    span: i64,
) -> Vec<ModElement> {
    (0..count).map(|_| sample_element(rng, module, span)).collect()
}
