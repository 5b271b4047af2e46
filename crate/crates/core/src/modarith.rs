//! Word-size modular arithmetic.
//!
//! Products of two residues are formed as 128-bit values with a widening
//! multiply and reduced by one of four interchangeable routines:
//!
//! * [`reduce_builtin`]: native `u128 % u64` division, the correctness oracle;
//! * [`barrett_classical`]: `mu = floor(2^(2m) / q)`, up to two correctional
//!   subtractions;
//! * [`barrett_dhem`]: `mu = floor(2^(2m+3) / q)`, at most one subtraction,
//!   moduli of at most 60 bits;
//! * [`barrett_proposed`]: `mu = floor(2^(2m+1) / q)`, at most one
//!   subtraction, moduli of up to 62 bits.
//!
//! Every Barrett routine has a `_counted` twin which records the number of
//! correctional subtractions in a [`ReductionStats`].

use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Bits per machine word.
pub const WORD_BITS: u32 = 64;

/// Largest modulus bit length accepted by [`Modulus`] (`W - 2`).
pub const MAX_MODULUS_BITS: u32 = WORD_BITS - 2;

/// Largest modulus bit length for which the Dhem–Quisquater constant fits
/// in a word (`W - 4`).
pub const MAX_DHEM_BITS: u32 = WORD_BITS - 4;

/// Number of bits in the binary representation of `a`, i.e. `floor(log2 a) + 1`.
pub fn bit_length(a: u128) -> Result<u32> {
    if a == 0 {
        return Err(Error::Zero("a"));
    }
    Ok(128 - a.leading_zeros())
}

/// Which algorithm reduces a double-word product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    Builtin,
    Classical,
    Dhem,
    #[default]
    Proposed,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Builtin,
        Variant::Classical,
        Variant::Dhem,
        Variant::Proposed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Builtin => "builtin",
            Variant::Classical => "classical",
            Variant::Dhem => "dhem",
            Variant::Proposed => "proposed",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown reduction variant `{s}`"))
    }
}

/// `mu` prepared for `floor(c * mu / 2^t)` as the high word of a 64x64
/// product: `mu << (64 - t)` when `t <= 64`, else `mu` with a post-shift of
/// `t - 64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct ScaledMu {
    mu: u64,
    post: u32,
}

impl ScaledMu {
    fn new(mu: u64, t: u32) -> Self {
        if t <= 64 {
            debug_assert!(mu.leading_zeros() >= 64 - t);
            Self {
                mu: mu << (64 - t),
                post: 0,
            }
        } else {
            Self { mu, post: t - 64 }
        }
    }

    #[inline(always)]
    fn quotient(self, c: u64) -> u64 {
        ((c as u128 * self.mu as u128) >> 64) as u64 >> self.post
    }
}

/// `(x >> s) as u64` for `s < 64` when the result fits a word.
#[inline(always)]
fn shr_to_word(x: u128, s: u32) -> u64 {
    let (lo, hi) = (x as u64, (x >> 64) as u64);
    (lo >> s) | ((hi << 1) << (63 - s))
}

/// An odd modulus together with its precomputed Barrett constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Modulus {
    q: u64,
    bits: u32,
    mu_classical: u64,
    mu_dhem: Option<u64>,
    mu_proposed: u64,
    half_q_ceil: u64,
    scaled_classical: ScaledMu,
    scaled_dhem: ScaledMu,
    scaled_proposed: ScaledMu,
}

impl Modulus {
    pub fn new(q: u64) -> Result<Self> {
        if q < 3 {
            return Err(Error::ModulusTooSmall(q));
        }
        if q.is_multiple_of(2) {
            return Err(Error::EvenModulus(q));
        }
        let bits = bit_length(q as u128)?;
        if bits > MAX_MODULUS_BITS {
            return Err(Error::ModulusTooLarge {
                bits,
                max: MAX_MODULUS_BITS,
            });
        }
        let mu = |shift: u32| ((1u128 << shift) / q as u128) as u64;
        let mu_classical = mu(2 * bits);
        let mu_dhem = (bits <= MAX_DHEM_BITS).then(|| mu(2 * bits + 3));
        let mu_proposed = mu(2 * bits + 1);
        Ok(Self {
            q,
            bits,
            mu_classical,
            mu_dhem,
            mu_proposed,
            half_q_ceil: (q + 1) >> 1,
            scaled_classical: ScaledMu::new(mu_classical, bits + 1),
            scaled_dhem: mu_dhem.map_or_else(ScaledMu::default, |mu| ScaledMu::new(mu, bits + 5)),
            scaled_proposed: ScaledMu::new(mu_proposed, bits + 3),
        })
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.q
    }

    /// Bit length `m` of the modulus.
    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn mu_classical(&self) -> u64 {
        self.mu_classical
    }

    pub fn mu_dhem(&self) -> Option<u64> {
        self.mu_dhem
    }

    pub fn mu_proposed(&self) -> u64 {
        self.mu_proposed
    }

    pub fn half_q_ceil(&self) -> u64 {
        self.half_q_ceil
    }

    /// Fails if `variant` cannot be used with this modulus.
    pub fn check_variant(&self, variant: Variant) -> Result<()> {
        if variant == Variant::Dhem && self.mu_dhem.is_none() {
            return Err(Error::ModulusTooLarge {
                bits: self.bits,
                max: MAX_DHEM_BITS,
            });
        }
        Ok(())
    }

    /// Reduces a product `x < 2^(2m)` with the given variant.
    ///
    /// The variant must have passed [`Modulus::check_variant`]; this is only
    /// verified in debug builds.
    #[inline(always)]
    pub fn reduce(&self, x: u128, variant: Variant) -> u64 {
        debug_assert!(x >> (2 * self.bits) == 0, "product exceeds 2^(2m)");
        match variant {
            Variant::Builtin => (x % self.q as u128) as u64,
            Variant::Classical => classical_core(x, self).0,
            Variant::Dhem => {
                debug_assert!(self.mu_dhem.is_some(), "dhem reduction needs m <= 60");
                dhem_core(x, self).0
            }
            Variant::Proposed => proposed_core(x, self).0,
        }
    }

    /// `a * b mod q` for reduced `a`, `b`.
    #[inline(always)]
    pub fn mul(&self, a: u64, b: u64, variant: Variant) -> u64 {
        debug_assert!(a < self.q && b < self.q);
        self.reduce(a as u128 * b as u128, variant)
    }

    #[inline(always)]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        mod_add(a, b, self)
    }

    #[inline(always)]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        mod_sub(a, b, self)
    }

    #[inline(always)]
    pub fn neg(&self, a: u64) -> u64 {
        mod_neg(a, self)
    }

    #[inline(always)]
    pub fn half(&self, x: u64) -> u64 {
        half_mod(x, self)
    }

    /// `base^exp mod q` by square-and-multiply over the builtin reduction.
    pub fn pow(&self, base: u64, exp: u64) -> u64 {
        pow_mod(base, exp, self.q)
    }
}

/// `base^exp mod q` for any `q >= 1`.
pub fn pow_mod(base: u64, mut exp: u64, q: u64) -> u64 {
    let q = q as u128;
    let mut acc = 1 % q;
    let mut b = base as u128 % q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % q;
        }
        b = b * b % q;
        exp >>= 1;
    }
    acc as u64
}

/// Tally of correctional subtractions performed by counted reductions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReductionStats {
    pub calls: u64,
    pub subtractions_0: u64,
    pub subtractions_1: u64,
    pub subtractions_2: u64,
}

impl ReductionStats {
    #[inline]
    fn record(&mut self, subtractions: u8) {
        self.calls += 1;
        match subtractions {
            0 => self.subtractions_0 += 1,
            1 => self.subtractions_1 += 1,
            _ => self.subtractions_2 += 1,
        }
    }

    /// Largest number of subtractions any recorded call needed.
    pub fn max_subtractions(&self) -> u8 {
        if self.subtractions_2 > 0 {
            2
        } else if self.subtractions_1 > 0 {
            1
        } else {
            0
        }
    }

    /// Fraction of calls that needed a second correctional subtraction.
    pub fn second_subtraction_rate(&self) -> f64 {
        if self.calls == 0 {
            0.0
        } else {
            self.subtractions_2 as f64 / self.calls as f64
        }
    }
}

impl AddAssign for ReductionStats {
    fn add_assign(&mut self, rhs: Self) {
        self.calls += rhs.calls;
        self.subtractions_0 += rhs.subtractions_0;
        self.subtractions_1 += rhs.subtractions_1;
        self.subtractions_2 += rhs.subtractions_2;
    }
}

/// `(a + b) mod q` with one conditional subtraction.
#[inline(always)]
pub fn mod_add(a: u64, b: u64, md: &Modulus) -> u64 {
    debug_assert!(a < md.q && b < md.q);
    let sum = a + b;
    if sum >= md.q {
        sum - md.q
    } else {
        sum
    }
}

/// `(a - b) mod q` with one conditional addition.
#[inline(always)]
pub fn mod_sub(a: u64, b: u64, md: &Modulus) -> u64 {
    debug_assert!(a < md.q && b < md.q);
    let (diff, borrow) = a.overflowing_sub(b);
    diff.wrapping_add(md.q & (borrow as u64).wrapping_neg())
}

#[inline(always)]
pub fn mod_neg(a: u64, md: &Modulus) -> u64 {
    mod_sub(0, a, md)
}

/// `x / 2 mod q` as `(x >> 1) + (x & 1) * ((q + 1) >> 1)`.
#[inline(always)]
pub fn half_mod(x: u64, md: &Modulus) -> u64 {
    debug_assert!(x < md.q);
    (x >> 1) + (x & 1) * md.half_q_ceil
}

/// `x mod q` by native division.
pub fn reduce_builtin(x: u128, q: u64) -> Result<u64> {
    if q == 0 {
        return Err(Error::Zero("q"));
    }
    Ok((x % q as u128) as u64)
}

#[inline(always)]
fn classical_core(x: u128, md: &Modulus) -> (u64, u8) {
    let c = shr_to_word(x, md.bits - 1);
    let quot = md.scaled_classical.quotient(c);
    // The true remainder is below 3q < 2^64, so the low words suffice.
    let mut rem = (x as u64).wrapping_sub(quot.wrapping_mul(md.q));
    let mut subs = 0;
    if rem >= md.q {
        rem -= md.q;
        subs += 1;
    }
    if rem >= md.q {
        rem -= md.q;
        subs += 1;
    }
    (rem, subs)
}

#[inline(always)]
fn dhem_core(x: u128, md: &Modulus) -> (u64, u8) {
    let q = md.q;
    let c = shr_to_word(x, md.bits - 2);
    let quot = md.scaled_dhem.quotient(c);
    let mut rem = (x as u64).wrapping_sub(quot.wrapping_mul(q));
    let mut subs = 0;
    if rem >= q {
        rem -= q;
        subs += 1;
    }
    (rem, subs)
}

#[inline(always)]
fn proposed_core(x: u128, md: &Modulus) -> (u64, u8) {
    let c = shr_to_word(x, md.bits - 2);
    let quot = md.scaled_proposed.quotient(c);
    let mut rem = (x as u64).wrapping_sub(quot.wrapping_mul(md.q));
    let mut subs = 0;
    if rem >= md.q {
        rem -= md.q;
        subs += 1;
    }
    (rem, subs)
}

/// Classical Barrett reduction of `x < 2^(2m)`.
#[inline]
pub fn barrett_classical(x: u128, md: &Modulus) -> u64 {
    debug_assert!(x >> (2 * md.bits) == 0);
    classical_core(x, md).0
}

pub fn barrett_classical_counted(x: u128, md: &Modulus, stats: &mut ReductionStats) -> u64 {
    debug_assert!(x >> (2 * md.bits) == 0);
    let (rem, subs) = classical_core(x, md);
    stats.record(subs);
    rem
}

/// Dhem–Quisquater Barrett reduction of `x < 2^(2m)`; needs `m <= 60`.
#[inline]
pub fn barrett_dhem(x: u128, md: &Modulus) -> Result<u64> {
    md.check_variant(Variant::Dhem)?;
    debug_assert!(x >> (2 * md.bits) == 0);
    Ok(dhem_core(x, md).0)
}

pub fn barrett_dhem_counted(x: u128, md: &Modulus, stats: &mut ReductionStats) -> Result<u64> {
    md.check_variant(Variant::Dhem)?;
    debug_assert!(x >> (2 * md.bits) == 0);
    let (rem, subs) = dhem_core(x, md);
    stats.record(subs);
    Ok(rem)
}

/// Barrett reduction with `mu = floor(2^(2m+1) / q)` of `x < 2^(2m)`.
#[inline]
pub fn barrett_proposed(x: u128, md: &Modulus) -> u64 {
    debug_assert!(x >> (2 * md.bits) == 0);
    proposed_core(x, md).0
}

pub fn barrett_proposed_counted(x: u128, md: &Modulus, stats: &mut ReductionStats) -> u64 {
    debug_assert!(x >> (2 * md.bits) == 0);
    let (rem, subs) = proposed_core(x, md);
    stats.record(subs);
    rem
}

/// Reduces `x` with `variant`, recording subtractions for the Barrett
/// variants. Builtin reductions are not recorded.
pub fn reduce_counted(
    x: u128,
    md: &Modulus,
    variant: Variant,
    stats: &mut ReductionStats,
) -> Result<u64> {
    match variant {
        Variant::Builtin => reduce_builtin(x, md.q),
        Variant::Classical => Ok(barrett_classical_counted(x, md, stats)),
        Variant::Dhem => barrett_dhem_counted(x, md, stats),
        Variant::Proposed => Ok(barrett_proposed_counted(x, md, stats)),
    }
}

/// `a * b mod q` reduced with `variant`.
pub fn mulmod(a: u64, b: u64, md: &Modulus, variant: Variant) -> Result<u64> {
    md.check_variant(variant)?;
    Ok(md.mul(a, b, variant))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const Q30: u64 = 994_705_409;
    const Q62: u64 = (1 << 62) - 57;

    #[test]
    fn bit_length_examples() {
        assert_eq!(bit_length(1), Ok(1));
        assert_eq!(bit_length(994_705_409), Ok(30));
        assert_eq!(bit_length(1 << 61), Ok(62));
        assert_eq!(bit_length(0), Err(Error::Zero("a")));
    }

    #[test]
    fn modulus_rejects_bad_values() {
        assert_eq!(Modulus::new(16), Err(Error::EvenModulus(16)));
        assert_eq!(Modulus::new(1), Err(Error::ModulusTooSmall(1)));
        assert!(matches!(
            Modulus::new((1 << 62) + 1),
            Err(Error::ModulusTooLarge { bits: 63, .. })
        ));
        assert!(Modulus::new(Q62).unwrap().mu_dhem().is_none());
        assert!(Modulus::new(Q30).unwrap().mu_dhem().is_some());
    }

    #[test]
    fn modulus_constants() {
        let md = Modulus::new(Q30).unwrap();
        assert_eq!(md.bits(), 30);
        assert_eq!(Modulus::new(Q30).unwrap().bits(), 30);
        assert_eq!(md.mu_classical() as u128, (1u128 << 60) / Q30 as u128);
        assert_eq!(md.mu_proposed() as u128, (1u128 << 61) / Q30 as u128);
        assert_eq!(md.mu_dhem().unwrap() as u128, (1u128 << 63) / Q30 as u128);
        assert_eq!(md.half_q_ceil(), Q30.div_ceil(2));
    }

    #[test]
    fn add_sub_examples() {
        let m17 = Modulus::new(17).unwrap();
        assert_eq!(mod_add(0, 0, &m17), 0);
        assert_eq!(mod_add(16, 16, &m17), 15);
        let m62 = Modulus::new(Q62).unwrap();
        assert_eq!(mod_add(Q62 - 1, Q62 - 1, &m62), Q62 - 2);

        assert_eq!(mod_sub(5, 5, &m17), 0);
        assert_eq!(mod_sub(0, 1, &m17), 16);
        assert_eq!(mod_sub(3, 11, &m17), 9);
        assert_eq!(mod_neg(0, &m17), 0);
        assert_eq!(mod_neg(1, &m17), 16);
    }

    #[test]
    fn builtin_examples() {
        assert_eq!(reduce_builtin(0, 17), Ok(0));
        assert_eq!(
            reduce_builtin(994_674_970u128 * 994_705_408, Q30),
            Ok(30439)
        );
        // Reference value from an arbitrary-precision long division.
        assert_eq!(
            reduce_builtin(1u128 << 120, Q62),
            Ok(2_594_073_385_365_405_867)
        );
        assert_eq!(reduce_builtin(5, 0), Err(Error::Zero("q")));
    }

    #[test]
    fn named_triple_all_variants() {
        let md = Modulus::new(Q30).unwrap();
        let x = 994_674_970u128 * 994_705_408;
        let mut st = ReductionStats::default();
        assert_eq!(barrett_classical_counted(x, &md, &mut st), 30439);
        assert_eq!(barrett_dhem(x, &md), Ok(30439));
        let mut sp = ReductionStats::default();
        assert_eq!(barrett_proposed_counted(x, &md, &mut sp), 30439);
        assert!(sp.max_subtractions() <= 1);
    }

    #[test]
    fn zero_reduces_to_zero() {
        for q in [3u64, 17, Q30, Q62] {
            let md = Modulus::new(q).unwrap();
            assert_eq!(barrett_classical(0, &md), 0);
            assert_eq!(barrett_proposed(0, &md), 0);
            if q != Q62 {
                assert_eq!(barrett_dhem(0, &md), Ok(0));
            }
        }
    }

    #[test]
    fn dhem_rejects_62_bit_modulus() {
        let md = Modulus::new(Q62).unwrap();
        assert!(matches!(
            barrett_dhem(5, &md),
            Err(Error::ModulusTooLarge { bits: 62, max: 60 })
        ));
        assert!(mulmod(2, 3, &md, Variant::Dhem).is_err());
    }

    #[test]
    fn exhaustive_small_moduli() {
        for q in (3u64..=255).step_by(2) {
            let md = Modulus::new(q).unwrap();
            let (mut sc, mut sd, mut sp) = Default::default();
            for x in 0..(q as u128 * q as u128) {
                let want = reduce_builtin(x, q).unwrap();
                assert_eq!(
                    barrett_classical_counted(x, &md, &mut sc),
                    want,
                    "q={q} x={x}"
                );
                assert_eq!(
                    barrett_dhem_counted(x, &md, &mut sd),
                    Ok(want),
                    "q={q} x={x}"
                );
                assert_eq!(
                    barrett_proposed_counted(x, &md, &mut sp),
                    want,
                    "q={q} x={x}"
                );
            }
            let sd: ReductionStats = sd;
            let sp: ReductionStats = sp;
            assert_eq!(sd.subtractions_2, 0);
            assert_eq!(sp.subtractions_2, 0);
            let sc: ReductionStats = sc;
            assert_eq!(
                sc.calls,
                sc.subtractions_0 + sc.subtractions_1 + sc.subtractions_2
            );
        }
    }

    #[test]
    fn mulmod_identities() {
        for q in [17u64, 257, Q30] {
            let md = Modulus::new(q).unwrap();
            for v in Variant::ALL {
                assert_eq!(mulmod(q - 1, q - 1, &md, v), Ok(1));
                for x in [0, 1, 2, q / 2, q - 1] {
                    assert_eq!(mulmod(1, x, &md, v), Ok(x));
                }
            }
        }
    }

    #[test]
    fn half_mod_examples() {
        let md = Modulus::new(17).unwrap();
        assert_eq!(half_mod(4, &md), 2);
        assert_eq!(half_mod(5, &md), 11);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for q in [17u64, Q30, Q62] {
            let md = Modulus::new(q).unwrap();
            for _ in 0..1000 {
                let x = rng.gen_range(0..q);
                let h = half_mod(x, &md);
                assert!(h < q);
                assert_eq!(mod_add(h, h, &md), x);
                assert_eq!(half_mod(mod_add(x, x, &md), &md), x);
            }
        }
    }

    #[test]
    fn variant_names_roundtrip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>(), Ok(v));
        }
        assert!("montgomery".parse::<Variant>().is_err());
    }

    #[test]
    fn stats_merge() {
        let mut a = ReductionStats {
            calls: 3,
            subtractions_0: 1,
            subtractions_1: 1,
            subtractions_2: 1,
        };
        a += a;
        assert_eq!(a.calls, 6);
        assert_eq!(a.max_subtractions(), 2);
        assert!((a.second_subtraction_rate() - 1.0 / 3.0).abs() < 1e-12);
    }
}
