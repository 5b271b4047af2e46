//! NTT-friendly primes, roots of unity and the precomputed [`NttPlan`].

use std::fmt;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::modarith::{pow_mod, Modulus, Variant, MAX_MODULUS_BITS};
use crate::ntt::radix4::Radix4Tables;
use crate::ntt::two_d::Plan2d;

pub const MIN_PRIME_BITS: u32 = 4;

// Deterministic for every n < 3.3 * 10^24.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in MR_WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Finds a `bits`-bit prime `q` with `q = 1 (mod 2n)`.
///
/// Candidates are `2n*k + 1` for `k` descending from the largest value that
/// keeps `q` within `bits` bits. The seed moves the starting `k` down by
/// `seed mod span`, wrapping to the top of the range when the bottom is
/// reached.
pub fn generate_prime(bits: u32, n: usize, seed: u64) -> Result<u64> {
    if !(MIN_PRIME_BITS..=MAX_MODULUS_BITS).contains(&bits) {
        return Err(Error::BitsOutOfRange {
            bits,
            min: MIN_PRIME_BITS,
            max: MAX_MODULUS_BITS,
        });
    }
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let step = 2 * n as u64;
    let not_found = Error::PrimeNotFound { bits, step };
    if step >= 1u64 << bits {
        return Err(not_found);
    }
    let hi = (1u64 << bits) - 1;
    let lo = 1u64 << (bits - 1);
    let k_max = (hi - 1) / step;
    let k_min = (lo - 1).div_ceil(step);
    if k_min > k_max {
        return Err(not_found);
    }
    let span = k_max - k_min + 1;
    let start = k_max - seed % span;
    (0..span)
        .map(|t| {
            let back = t % span;
            if back <= start - k_min {
                start - back
            } else {
                k_max - (back - (start - k_min) - 1)
            }
        })
        .map(|k| step * k + 1)
        .find(|&q| is_prime(q))
        .ok_or(not_found)
}

/// Finds an element of multiplicative order exactly `order` (a power of two)
/// in `Z_q`, sampling candidates from a PRNG seeded with `seed`.
pub fn find_primitive_root(q: u64, order: u64, seed: u64) -> Result<u64> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(order as usize));
    }
    if q < 3 || !(q - 1).is_multiple_of(order) {
        return Err(Error::InvalidPlan(format!(
            "{order} does not divide q - 1 for q = {q}"
        )));
    }
    let cofactor = (q - 1) / order;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // For prime q half of all candidates succeed; the cap only trips for
    // composite q.
    for _ in 0..4096 {
        let g = rng.gen_range(2..q);
        let psi = pow_mod(g, cofactor, q);
        if pow_mod(psi, order / 2, q) == q - 1 {
            return Ok(psi);
        }
    }
    Err(Error::InvalidPlan(format!(
        "no element of order {order} found modulo {q}"
    )))
}

/// Reverses the low `bits` bits of `i`.
pub fn bit_reverse(i: usize, bits: u32) -> Result<usize> {
    if bits < usize::BITS && i >> bits != 0 {
        return Err(Error::IndexOutOfRange { index: i, bits });
    }
    Ok(reverse_bits(i, bits))
}

#[inline]
pub(crate) fn reverse_bits(i: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - bits)
    }
}

/// Where the modulus of a plan comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimeSource {
    Given(u64),
    Generate { bits: u32, seed: u64 },
}

/// Precomputed context shared by every transform of size `n` modulo `q`.
///
/// `tw_fwd[i] = psi^br(i)` and `tw_inv[i] = psi^-br(i)`, where `br` reverses
/// `log2 n` bits.
#[derive(Debug, Clone)]
pub struct NttPlan {
    n: usize,
    log_n: u32,
    modulus: Modulus,
    psi: u64,
    psi_inv: u64,
    omega: u64,
    n_inv: u64,
    tw_fwd: Vec<u64>,
    tw_inv: Vec<u64>,
    variant: Variant,
    radix4: OnceLock<Radix4Tables>,
    two_d: OnceLock<Plan2d>,
}

/// Builds and validates a plan.
///
/// With [`PrimeSource::Generate`] the seed drives both the prime search and
/// the root search; a given prime uses root seed 0.
pub fn build_plan(n: usize, source: PrimeSource, variant: Variant) -> Result<NttPlan> {
    check_size(n)?;
    let (q, seed) = match source {
        PrimeSource::Given(q) => (q, 0),
        PrimeSource::Generate { bits, seed } => (generate_prime(bits, n, seed)?, seed),
    };
    check_prime(q, n)?;
    let psi = find_primitive_root(q, 2 * n as u64, seed)?;
    NttPlan::with_root(n, q, psi, variant)
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(())
}

fn check_prime(q: u64, n: usize) -> Result<()> {
    if !is_prime(q) {
        return Err(Error::InvalidPlan(format!("{q} is not prime")));
    }
    if !(q - 1).is_multiple_of(2 * n as u64) {
        return Err(Error::InvalidPlan(format!(
            "{} does not divide {q} - 1",
            2 * n
        )));
    }
    Ok(())
}

/// Bit-reversed power tables `(psi^br(i), psi^-br(i))` for `i < n`.
///
/// Only `psi` being invertible mod `q` is checked; the root order is left
/// to [`NttPlan::validate`].
pub fn twiddle_tables(n: usize, q: u64, psi: u64) -> Result<(Vec<u64>, Vec<u64>)> {
    check_size(n)?;
    let modulus = Modulus::new(q)?;
    if psi == 0 || psi >= q {
        return Err(Error::InvalidPlan(format!(
            "psi = {psi} is not a unit mod {q}"
        )));
    }
    let log_n = n.trailing_zeros();
    let psi_inv = pow_mod(psi, q - 2, q);
    let mut pow_fwd = Vec::with_capacity(n);
    let mut pow_inv = Vec::with_capacity(n);
    let (mut f, mut g) = (1u64, 1u64);
    for _ in 0..n {
        pow_fwd.push(f);
        pow_inv.push(g);
        f = modulus.mul(f, psi, Variant::Builtin);
        g = modulus.mul(g, psi_inv, Variant::Builtin);
    }
    let tw_fwd = (0..n).map(|i| pow_fwd[reverse_bits(i, log_n)]).collect();
    let tw_inv = (0..n).map(|i| pow_inv[reverse_bits(i, log_n)]).collect();
    Ok((tw_fwd, tw_inv))
}

impl NttPlan {
    /// Builds a plan around an explicit primitive `2n`-th root `psi`.
    pub fn with_root(n: usize, q: u64, psi: u64, variant: Variant) -> Result<Self> {
        check_size(n)?;
        let modulus = Modulus::new(q)?;
        modulus.check_variant(variant)?;
        check_prime(q, n)?;
        if psi >= q {
            return Err(Error::InvalidPlan(format!(
                "psi = {psi} is not reduced mod {q}"
            )));
        }
        let log_n = n.trailing_zeros();
        let psi_inv = pow_mod(psi, q - 2, q);
        let n_inv = pow_mod(n as u64 % q, q - 2, q);
        let omega = pow_mod(psi, 2, q);
        let (tw_fwd, tw_inv) = twiddle_tables(n, q, psi)?;

        let plan = Self {
            n,
            log_n,
            modulus,
            psi,
            psi_inv,
            omega,
            n_inv,
            tw_fwd,
            tw_inv,
            variant,
            radix4: OnceLock::new(),
            two_d: OnceLock::new(),
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Re-checks every plan invariant.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPlan(msg));
        let q = self.modulus.value();
        if self.n < 2 || !self.n.is_power_of_two() || self.n != 1 << self.log_n {
            return bad(format!("size {} is not a power of two >= 2", self.n));
        }
        check_prime(q, self.n)?;
        self.modulus.check_variant(self.variant)?;
        let n = self.n as u64;
        if pow_mod(self.psi, 2 * n, q) != 1 || pow_mod(self.psi, n, q) != q - 1 {
            return bad(format!(
                "psi = {} is not a primitive {}-th root",
                self.psi,
                2 * n
            ));
        }
        let mul = |a, b| self.modulus.mul(a, b, Variant::Builtin);
        if mul(self.psi, self.psi_inv) != 1 {
            return bad("psi * psi_inv != 1".into());
        }
        if mul(n % q, self.n_inv) != 1 {
            return bad("n * n_inv != 1".into());
        }
        if self.omega != mul(self.psi, self.psi) {
            return bad("omega != psi^2".into());
        }
        if self.tw_fwd.len() != self.n || self.tw_inv.len() != self.n {
            return bad("twiddle tables do not have n entries".into());
        }
        if self.tw_fwd[0] != 1 || self.tw_inv[0] != 1 {
            return bad("twiddle tables do not start with 1".into());
        }
        for (i, (&f, &g)) in self.tw_fwd.iter().zip(&self.tw_inv).enumerate() {
            if f >= q || g >= q || mul(f, g) != 1 {
                return bad(format!("twiddle pair {i} is not an inverse pair"));
            }
        }
        for (i, &f) in self.tw_fwd.iter().enumerate() {
            if f != pow_mod(self.psi, reverse_bits(i, self.log_n) as u64, q) {
                return bad(format!("forward twiddle {i} is not psi^br({i})"));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log_n(&self) -> u32 {
        self.log_n
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn q(&self) -> u64 {
        self.modulus.value()
    }

    pub fn psi(&self) -> u64 {
        self.psi
    }

    pub fn psi_inv(&self) -> u64 {
        self.psi_inv
    }

    pub fn omega(&self) -> u64 {
        self.omega
    }

    pub fn n_inv(&self) -> u64 {
        self.n_inv
    }

    pub fn tw_fwd(&self) -> &[u64] {
        &self.tw_fwd
    }

    pub fn tw_inv(&self) -> &[u64] {
        &self.tw_inv
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Same tables, different reduction routine.
    pub fn with_variant(&self, variant: Variant) -> Result<Self> {
        self.modulus.check_variant(variant)?;
        let mut plan = self.clone();
        plan.variant = variant;
        Ok(plan)
    }

    /// Number of twiddle words stored (both directions).
    pub fn twiddle_words(&self) -> usize {
        self.tw_fwd.len() + self.tw_inv.len()
    }

    #[inline(always)]
    pub(crate) fn mul(&self, a: u64, b: u64) -> u64 {
        self.modulus.mul(a, b, self.variant)
    }

    pub(crate) fn radix4_tables(&self) -> &Radix4Tables {
        self.radix4.get_or_init(|| Radix4Tables::new(self))
    }

    pub(crate) fn plan_2d(&self) -> &Plan2d {
        self.two_d.get_or_init(|| Plan2d::new(self))
    }

    /// Mutable access to the twiddle tables, for exercising [`validate`].
    ///
    /// [`validate`]: NttPlan::validate
    #[doc(hidden)]
    pub fn twiddles_mut(&mut self) -> (&mut [u64], &mut [u64]) {
        self.radix4 = OnceLock::new();
        self.two_d = OnceLock::new();
        (&mut self.tw_fwd, &mut self.tw_inv)
    }

    /// One-line text form: `n q psi variant`.
    pub fn to_line(&self) -> String {
        format!("{} {} {} {}", self.n, self.q(), self.psi, self.variant)
    }

    /// Parses the output of [`NttPlan::to_line`] and rebuilds the tables.
    pub fn from_line(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_err = |msg: String| Error::Parse { line: 1, msg };
        if fields.len() != 4 {
            return Err(parse_err(format!(
                "expected `n q psi variant`, found {} fields",
                fields.len()
            )));
        }
        let num = |s: &str, what: &str| {
            s.parse::<u64>()
                .map_err(|e| parse_err(format!("bad {what} `{s}`: {e}")))
        };
        let n = num(fields[0], "n")? as usize;
        let q = num(fields[1], "q")?;
        let psi = num(fields[2], "psi")?;
        let variant = fields[3].parse::<Variant>().map_err(parse_err)?;
        Self::with_root(n, q, psi, variant)
    }
}

impl fmt::Display for NttPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modarith::bit_length;

    #[test]
    fn miller_rabin_small() {
        let sieve: Vec<u64> = (0..2000u64)
            .filter(|&n| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
            .collect();
        for n in 0..2000u64 {
            assert_eq!(is_prime(n), sieve.contains(&n), "n = {n}");
        }
        assert!(is_prime(994_705_409));
        assert!(is_prime((1 << 61) - 1));
        // Strong pseudoprime to bases 2..=37 except the full set.
        assert!(!is_prime(3_825_123_056_546_413_051));
        assert!(!is_prime(994_705_409 * 3));
    }

    #[test]
    fn prime_generation_examples() {
        assert_eq!(generate_prime(4, 2, 0), Ok(13));
        assert_eq!(generate_prime(4, 2, 7), Ok(13));

        let q = generate_prime(30, 1 << 15, 0).unwrap();
        assert_eq!(bit_length(q as u128), Ok(30));
        assert_eq!(q % (1 << 16), 1);
        assert!(is_prime(q));

        let q = generate_prime(62, 1 << 16, 5).unwrap();
        assert!(is_prime(q));
        assert_eq!(q % (1 << 17), 1);
        assert!(((1u64 << 61)..(1 << 62)).contains(&q));
    }

    #[test]
    fn paper_prime_is_accepted() {
        let q = 994_705_409u64;
        assert_eq!((q - 1) % (1 << 16), 0);
        let plan = build_plan(1 << 15, PrimeSource::Given(q), Variant::Proposed).unwrap();
        plan.validate().unwrap();
    }

    #[test]
    fn prime_generation_is_reproducible_and_seeded() {
        let a = generate_prime(30, 1024, 11).unwrap();
        assert_eq!(a, generate_prime(30, 1024, 11).unwrap());
        let distinct: std::collections::BTreeSet<u64> = (0..50)
            .map(|s| generate_prime(30, 1024, s).unwrap())
            .collect();
        assert!(distinct.len() > 1);
    }

    #[test]
    fn prime_generation_errors() {
        assert!(matches!(
            generate_prime(63, 4, 0),
            Err(Error::BitsOutOfRange { .. })
        ));
        assert!(matches!(
            generate_prime(3, 2, 0),
            Err(Error::BitsOutOfRange { .. })
        ));
        assert_eq!(generate_prime(10, 3, 0), Err(Error::NotPowerOfTwo(3)));
        assert!(matches!(
            generate_prime(8, 256, 0),
            Err(Error::PrimeNotFound { .. })
        ));
    }

    #[test]
    fn primitive_root_examples() {
        for seed in 0..20 {
            let psi = find_primitive_root(13, 4, seed).unwrap();
            assert!([5, 8].contains(&psi));
            let psi = find_primitive_root(17, 16, seed).unwrap();
            assert!([3, 5, 6, 7, 10, 11, 12, 14].contains(&psi));
            assert_eq!(pow_mod(psi, 8, 17), 16);
        }
        assert!(find_primitive_root(13, 8, 0).is_err());
    }

    #[test]
    fn bit_reverse_examples() {
        assert_eq!(bit_reverse(0, 5), Ok(0));
        assert_eq!(bit_reverse(1, 3), Ok(4));
        assert_eq!(bit_reverse(6, 3), Ok(3));
        assert_eq!(bit_reverse(0, 0), Ok(0));
        assert!(bit_reverse(8, 3).is_err());
        for i in 0..256 {
            assert_eq!(reverse_bits(reverse_bits(i, 8), 8), i);
        }
    }

    #[test]
    fn small_plan_tables() {
        // psi = 5 has order 4 mod 13, too small for n = 4: tables only.
        let (fwd, inv) = twiddle_tables(4, 13, 5).unwrap();
        assert_eq!(fwd, vec![1, 12, 5, 8]);
        assert_eq!(inv, vec![1, 12, 8, 5]);
        assert!(NttPlan::with_root(4, 13, 5, Variant::Proposed).is_err());

        let plan = NttPlan::with_root(4, 17, 2, Variant::Proposed).unwrap();
        assert_eq!(plan.omega(), 4);
        assert_eq!(plan.tw_fwd(), &[1, 4, 2, 8]);
        assert_eq!(plan.psi_inv(), 9);
        assert_eq!(plan.n_inv(), 13);
        for (&f, &g) in plan.tw_fwd().iter().zip(plan.tw_inv()) {
            assert_eq!(f * g % 17, 1);
        }
    }

    #[test]
    fn plan_rejects_bad_parameters() {
        assert!(NttPlan::with_root(4, 15, 2, Variant::Proposed).is_err());
        assert!(NttPlan::with_root(4, 13, 12, Variant::Proposed).is_err());
        assert!(NttPlan::with_root(8, 13, 5, Variant::Proposed).is_err());
        assert_eq!(
            build_plan(3, PrimeSource::Given(13), Variant::Proposed).unwrap_err(),
            Error::NotPowerOfTwo(3)
        );
        let q62 = generate_prime(62, 8, 0).unwrap();
        assert!(build_plan(8, PrimeSource::Given(q62), Variant::Dhem).is_err());
    }

    #[test]
    fn corrupted_twiddle_fails_validation() {
        let mut plan = build_plan(
            64,
            PrimeSource::Generate { bits: 30, seed: 1 },
            Variant::Proposed,
        )
        .unwrap();
        for i in [0usize, 1, 37, 63] {
            let mut bad = plan.clone();
            let q = bad.q();
            let (fwd, _) = bad.twiddles_mut();
            fwd[i] = (fwd[i] + 1) % q;
            let err = bad.validate().unwrap_err();
            assert!(matches!(err, Error::InvalidPlan(_)), "{err}");
        }
        let (_, inv) = plan.twiddles_mut();
        inv[5] ^= 1;
        assert!(plan.validate().is_err());
    }

    #[test]
    fn plan_line_roundtrip() {
        let plan = build_plan(
            16,
            PrimeSource::Generate { bits: 20, seed: 4 },
            Variant::Classical,
        )
        .unwrap();
        let back = NttPlan::from_line(&plan.to_line()).unwrap();
        assert_eq!(back.tw_fwd(), plan.tw_fwd());
        assert_eq!(back.variant(), Variant::Classical);
        assert!(NttPlan::from_line("16 97").is_err());
        assert!(NttPlan::from_line("16 97 x proposed").is_err());
    }
}
