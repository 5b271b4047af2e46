//! Residue number system over several word-size NTT primes.
//!
//! A coefficient modulus `Q = q_0 * ... * q_{k-1}` too wide for one word is
//! split by the CRT into `k` independent word-size multiplications.
//! Multi-word integers appear only here: at the decompose/reconstruct
//! boundary and in the schoolbook oracle.

use num_bigint::BigUint;

use crate::counter::Counter;
use crate::error::{Error, Result};
use crate::modarith::{pow_mod, Variant};
use crate::params::{build_plan, generate_prime, NttPlan, PrimeSource};
use crate::polymul::{multiply, Method};

/// Number of `m`-bit word multiplications needed to cover a `bits_q`-bit
/// modulus, `ceil(bits_q / m)`.
pub fn workload_size(bits_q: u64, m: u64) -> Result<u64> {
    if bits_q == 0 {
        return Err(Error::Zero("bits_q"));
    }
    if m == 0 {
        return Err(Error::Zero("m"));
    }
    Ok(bits_q.div_ceil(m))
}

#[derive(Debug, Clone)]
pub struct RnsBasis {
    plans: Vec<NttPlan>,
    big_q: BigUint,
    /// `Q / q_i`.
    cofactors: Vec<BigUint>,
    /// `(Q / q_i)^-1 mod q_i`.
    inverses: Vec<u64>,
}

impl RnsBasis {
    /// Builds a basis from existing plans. The plans must share `n` and have
    /// pairwise distinct moduli.
    pub fn from_plans(plans: Vec<NttPlan>) -> Result<Self> {
        let Some(first) = plans.first() else {
            return Err(Error::Zero("basis size"));
        };
        let n = first.n();
        for (i, p) in plans.iter().enumerate() {
            if p.n() != n {
                return Err(Error::Shape(format!(
                    "plan {i} has n = {}, expected {n}",
                    p.n()
                )));
            }
            if plans[..i].iter().any(|o| o.q() == p.q()) {
                return Err(Error::InvalidPlan(format!("prime {} appears twice", p.q())));
            }
        }
        let big_q = plans.iter().fold(BigUint::from(1u32), |acc, p| acc * p.q());
        let cofactors: Vec<BigUint> = plans.iter().map(|p| &big_q / p.q()).collect();
        let inverses = plans
            .iter()
            .zip(&cofactors)
            .map(|(p, c)| {
                let r = residue(c, p.q());
                pow_mod(r, p.q() - 2, p.q())
            })
            .collect();
        Ok(Self {
            plans,
            big_q,
            cofactors,
            inverses,
        })
    }

    /// `k` distinct `bits`-bit primes, `q ≡ 1 mod 2n`, from consecutive seeds
    /// starting at `seed`.
    pub fn generate(n: usize, bits: u32, k: usize, variant: Variant, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Zero("basis size"));
        }
        let mut plans: Vec<NttPlan> = Vec::with_capacity(k);
        let mut s = seed;
        let limit = seed.saturating_add(64 * k as u64);
        while plans.len() < k {
            if s >= limit {
                return Err(Error::PrimeNotFound {
                    bits,
                    step: 2 * n as u64,
                });
            }
            let q = generate_prime(bits, n, s)?;
            if !plans.iter().any(|p| p.q() == q) {
                plans.push(build_plan(
                    n,
                    PrimeSource::Generate { bits, seed: s },
                    variant,
                )?);
            }
            s += 1;
        }
        Self::from_plans(plans)
    }

    pub fn n(&self) -> usize {
        self.plans[0].n()
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }

    pub fn plans(&self) -> &[NttPlan] {
        &self.plans
    }

    pub fn primes(&self) -> Vec<u64> {
        self.plans.iter().map(NttPlan::q).collect()
    }

    pub fn big_q(&self) -> &BigUint {
        &self.big_q
    }

    pub fn cofactors(&self) -> &[BigUint] {
        &self.cofactors
    }

    pub fn crt_inverses(&self) -> &[u64] {
        &self.inverses
    }

    /// One `n q psi variant` line per prime.
    pub fn to_lines(&self) -> Vec<String> {
        self.plans.iter().map(NttPlan::to_line).collect()
    }

    pub fn from_lines<'a>(lines: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let plans = lines
            .into_iter()
            .filter(|l| !l.trim().is_empty())
            .map(NttPlan::from_line)
            .collect::<Result<Vec<_>>>()?;
        Self::from_plans(plans)
    }
}

fn residue(x: &BigUint, q: u64) -> u64 {
    (x % q).iter_u64_digits().next().unwrap_or(0)
}

/// Splits each coefficient into its residues; entry `i` of the result is the
/// polynomial modulo `q_i`.
pub fn decompose(coeffs: &[BigUint], basis: &RnsBasis) -> Result<Vec<Vec<u64>>> {
    for (index, c) in coeffs.iter().enumerate() {
        if c >= &basis.big_q {
            return Err(Error::CoefficientOutOfRange {
                index,
                value: c.to_string(),
                modulus: basis.big_q.to_string(),
            });
        }
    }
    Ok(basis
        .plans
        .iter()
        .map(|p| coeffs.iter().map(|c| residue(c, p.q())).collect())
        .collect())
}

/// CRT recombination: `sum_i [r_i * inv_i mod q_i] * (Q / q_i) mod Q`.
pub fn reconstruct(residues: &[Vec<u64>], basis: &RnsBasis) -> Result<Vec<BigUint>> {
    if residues.len() != basis.len() {
        return Err(Error::Shape(format!(
            "{} residue polynomials for a basis of {} primes",
            residues.len(),
            basis.len()
        )));
    }
    let n = residues[0].len();
    for (i, (r, p)) in residues.iter().zip(&basis.plans).enumerate() {
        if r.len() != n {
            return Err(Error::Shape(format!(
                "residue {i} has length {}, expected {n}",
                r.len()
            )));
        }
        if let Some((index, &value)) = r.iter().enumerate().find(|(_, &v)| v >= p.q()) {
            return Err(Error::CoefficientOutOfRange {
                index,
                value: value.to_string(),
                modulus: p.q().to_string(),
            });
        }
    }
    Ok((0..n)
        .map(|j| {
            let sum = basis
                .plans
                .iter()
                .enumerate()
                .fold(BigUint::default(), |acc, (i, p)| {
                    let md = p.modulus();
                    let t = md.mul(residues[i][j], basis.inverses[i], Variant::Builtin);
                    acc + &basis.cofactors[i] * t
                });
            sum % &basis.big_q
        })
        .collect())
}

/// Negacyclic product modulo `Q` through per-prime fused multiplication.
pub fn polymul_rns<C: Counter>(
    a: &[BigUint],
    b: &[BigUint],
    basis: &RnsBasis,
    ctr: &mut C,
) -> Result<Vec<BigUint>> {
    let n = basis.n();
    if a.len() != n || b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: if a.len() != n { a.len() } else { b.len() },
        });
    }
    let ra = decompose(a, basis)?;
    let rb = decompose(b, basis)?;
    let products = basis
        .plans
        .iter()
        .zip(ra.iter().zip(&rb))
        .map(|(p, (x, y))| multiply(x, y, p, Method::Fused, ctr))
        .collect::<Result<Vec<_>>>()?;
    reconstruct(&products, basis)
}

/// Schoolbook negacyclic product over arbitrary-width integers.
pub fn negacyclic_naive_big(a: &[BigUint], b: &[BigUint], q: &BigUint) -> Result<Vec<BigUint>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let n = a.len();
    let mut pos = vec![BigUint::default(); n];
    let mut neg = vec![BigUint::default(); n];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let k = i + j;
            if k < n {
                pos[k] += x * y;
            } else {
                neg[k - n] += x * y;
            }
        }
    }
    Ok(pos
        .into_iter()
        .zip(neg)
        .map(|(p, m)| {
            let m = m % q;
            (p + q - m) % q
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counter::NoCount;
    use crate::polymul::{polymul_fused, FusedPlan};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, q: &BigUint, rng: &mut ChaCha8Rng) -> Vec<BigUint> {
        let bytes = (q.bits() as usize).div_ceil(8) + 8;
        (0..n)
            .map(|_| {
                let raw: Vec<u8> = (0..bytes).map(|_| rng.gen()).collect();
                BigUint::from_bytes_le(&raw) % q
            })
            .collect()
    }

    fn small_basis() -> RnsBasis {
        let plans = vec![
            NttPlan::with_root(2, 13, 5, Variant::Proposed).unwrap(),
            NttPlan::with_root(2, 17, 4, Variant::Proposed).unwrap(),
        ];
        RnsBasis::from_plans(plans).unwrap()
    }

    #[test]
    fn workload_examples() {
        assert_eq!(workload_size(1240, 30), Ok(42));
        assert_eq!(workload_size(1240, 28), Ok(45));
        let inc = (45.0 / 42.0 - 1.0) * 100.0;
        assert!((inc - 7.14f64).abs() < 0.01);
        for m in 1..100 {
            assert!(workload_size(1240, m + 1).unwrap() <= workload_size(1240, m).unwrap());
        }
        assert!(workload_size(0, 3).is_err());
        assert!(workload_size(3, 0).is_err());
    }

    #[test]
    fn small_basis_examples() {
        let basis = small_basis();
        assert_eq!(basis.big_q(), &BigUint::from(221u32));
        let r = decompose(&[BigUint::from(13u32), BigUint::default()], &basis).unwrap();
        assert_eq!(r, vec![vec![0, 0], vec![13, 0]]);
        let v = reconstruct(&[vec![5, 0], vec![5, 0]], &basis).unwrap();
        assert_eq!(v, vec![BigUint::from(5u32), BigUint::default()]);
        let zero = vec![BigUint::default(); 2];
        assert_eq!(decompose(&zero, &basis).unwrap(), vec![vec![0; 2]; 2]);
        assert!(decompose(&[BigUint::from(221u32), BigUint::default()], &basis).is_err());
        assert!(reconstruct(&[vec![5, 0]], &basis).is_err());
    }

    #[test]
    fn crt_constants() {
        let basis = RnsBasis::generate(64, 30, 4, Variant::Proposed, 1).unwrap();
        let product = basis
            .primes()
            .iter()
            .fold(BigUint::from(1u32), |acc, &q| acc * q);
        assert_eq!(basis.big_q(), &product);
        for ((p, c), &inv) in basis
            .plans()
            .iter()
            .zip(basis.cofactors())
            .zip(basis.crt_inverses())
        {
            let r = residue(c, p.q());
            assert_eq!(r as u128 * inv as u128 % p.q() as u128, 1);
        }
        let mut primes = basis.primes();
        primes.dedup();
        assert_eq!(primes.len(), 4);
    }

    #[test]
    fn roundtrip() {
        let basis = RnsBasis::generate(16, 30, 3, Variant::Proposed, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let v = random(16, basis.big_q(), &mut rng);
            assert_eq!(
                reconstruct(&decompose(&v, &basis).unwrap(), &basis).unwrap(),
                v
            );
        }
    }

    #[test]
    fn matches_big_integer_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [2, 8, 64] {
            for k in [1, 2, 4] {
                let basis = RnsBasis::generate(n, 30, k, Variant::Proposed, 3).unwrap();
                for _ in 0..5 {
                    let a = random(n, basis.big_q(), &mut rng);
                    let b = random(n, basis.big_q(), &mut rng);
                    let want = negacyclic_naive_big(&a, &b, basis.big_q()).unwrap();
                    assert_eq!(polymul_rns(&a, &b, &basis, &mut NoCount).unwrap(), want);
                }
            }
        }
    }

    #[test]
    fn unit_operand_and_prime_order() {
        let basis = RnsBasis::generate(8, 30, 3, Variant::Proposed, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(8, basis.big_q(), &mut rng);
        let b = random(8, basis.big_q(), &mut rng);
        let mut e0 = vec![BigUint::default(); 8];
        e0[0] = BigUint::from(1u32);
        assert_eq!(polymul_rns(&e0, &b, &basis, &mut NoCount).unwrap(), b);

        let mut reversed = basis.plans().to_vec();
        reversed.reverse();
        let other = RnsBasis::from_plans(reversed).unwrap();
        assert_eq!(
            polymul_rns(&a, &b, &basis, &mut NoCount).unwrap(),
            polymul_rns(&a, &b, &other, &mut NoCount).unwrap()
        );
    }

    #[test]
    fn single_prime_is_fused() {
        let basis = RnsBasis::generate(32, 30, 1, Variant::Proposed, 5).unwrap();
        let plan = &basis.plans()[0];
        let fp = FusedPlan::from_plan(plan).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random(32, basis.big_q(), &mut rng);
        let b = random(32, basis.big_q(), &mut rng);
        let words = |v: &[BigUint]| v.iter().map(|x| residue(x, plan.q())).collect::<Vec<_>>();
        let want = polymul_fused(&words(&a), &words(&b), &fp, &mut NoCount).unwrap();
        let got = polymul_rns(&a, &b, &basis, &mut NoCount).unwrap();
        assert_eq!(words(&got), want);
    }

    #[test]
    fn lines_roundtrip_and_rejections() {
        let basis = RnsBasis::generate(16, 20, 2, Variant::Classical, 9).unwrap();
        let lines = basis.to_lines();
        let back = RnsBasis::from_lines(lines.iter().map(String::as_str)).unwrap();
        assert_eq!(back.primes(), basis.primes());
        let dup = vec![lines[0].as_str(), lines[0].as_str()];
        assert!(RnsBasis::from_lines(dup).is_err());
        assert!(RnsBasis::from_plans(Vec::new()).is_err());
    }
}
