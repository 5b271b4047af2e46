//! Four-step ("2D serial") merged NTT.
//!
//! The input is viewed as a row-major `R x C` matrix, `a[r*C + c]`, with
//! `R = 2^ceil(L/2)` and `C = 2^floor(L/2)` for `n = 2^L`. Writing the
//! spectrum index as `j = jr + R*jc`:
//!
//! 1. every column gets a size-`R` merged CT NTT with root `psi^C`, which
//!    folds the `psi^(rC)` part of the pre-scaling into the column twiddles;
//! 2. entry `(t, c)` is multiplied by `psi^(c*(2*jr + 1 - R))`, `jr = br_R(t)`;
//! 3. every row gets a size-`C` merged CT NTT with root `psi^R`.
//!
//! Both sub-transforms read the leading `R` (resp. `C`) entries of the main
//! bit-reversed twiddle table, which are exactly their own tables.
//!
//! Output order: position `t*C + u` holds the spectrum value for
//! `j = br_R(t) + R * br_C(u)` (see [`two_d_index_map`]). [`ntt_2d_inv`]
//! consumes exactly this order.

use super::{check_len, ct_stages, gs_stages, Order, Polynomial};
use crate::counter::Counter;
use crate::error::{Error, Result};
use crate::modarith::pow_mod;
use crate::params::{reverse_bits, NttPlan};

/// `(rows, cols)` of the matrix view for size `n`.
pub fn two_d_shape(n: usize) -> (usize, usize) {
    let log_n = n.trailing_zeros();
    (1 << log_n.div_ceil(2), 1 << (log_n / 2))
}

/// Natural spectrum index held at each position of the [`ntt_2d`] output.
pub fn two_d_index_map(n: usize) -> Vec<usize> {
    let (rows, cols) = two_d_shape(n);
    let (rb, cb) = (rows.trailing_zeros(), cols.trailing_zeros());
    (0..n)
        .map(|p| reverse_bits(p / cols, rb) + rows * reverse_bits(p % cols, cb))
        .collect()
}

#[derive(Debug, Clone)]
pub(crate) struct Plan2d {
    rows: usize,
    cols: usize,
    corr_fwd: Vec<u64>,
    corr_inv: Vec<u64>,
}

impl Plan2d {
    pub(crate) fn new(plan: &NttPlan) -> Self {
        let n = plan.n();
        let q = plan.q();
        let (rows, cols) = two_d_shape(n);
        let rb = rows.trailing_zeros();
        let two_n = 2 * n as i64;
        let mut corr_fwd = Vec::with_capacity(n);
        let mut corr_inv = Vec::with_capacity(n);
        for t in 0..rows {
            let jr = reverse_bits(t, rb) as i64;
            for c in 0..cols as i64 {
                let e = (c * (2 * jr + 1 - rows as i64)).rem_euclid(two_n) as u64;
                corr_fwd.push(pow_mod(plan.psi(), e, q));
                corr_inv.push(pow_mod(plan.psi_inv(), e, q));
            }
        }
        Self {
            rows,
            cols,
            corr_fwd,
            corr_inv,
        }
    }
}

fn expect(a: &Polynomial, order: Order, plan: &NttPlan) -> Result<()> {
    check_len(a.len(), plan.n())?;
    if a.order != order {
        return Err(Error::OrderMismatch {
            expected: order,
            found: a.order,
        });
    }
    Ok(())
}

pub(crate) fn forward_2d<C: Counter>(a: &mut [u64], plan: &NttPlan, ctr: &mut C) {
    let p2 = plan.plan_2d();
    let (rows, cols) = (p2.rows, p2.cols);
    let md = plan.modulus();
    let v = plan.variant();
    let tw = plan.tw_fwd();

    let mut column = vec![0u64; rows];
    for c in 0..cols {
        for (r, x) in column.iter_mut().enumerate() {
            *x = a[r * cols + c];
        }
        ct_stages(&mut column, tw, md, v, 1, rows, ctr);
        for (r, &x) in column.iter().enumerate() {
            a[r * cols + c] = x;
        }
    }
    for (x, &w) in a.iter_mut().zip(&p2.corr_fwd) {
        *x = md.mul(*x, w, v);
    }
    ctr.modmul(a.len() as u64);
    ctr.twiddle_load(a.len() as u64);
    for row in a.chunks_exact_mut(cols) {
        ct_stages(row, tw, md, v, 1, cols, ctr);
    }
}

pub(crate) fn inverse_2d<C: Counter>(a: &mut [u64], plan: &NttPlan, ctr: &mut C) {
    let p2 = plan.plan_2d();
    let (rows, cols) = (p2.rows, p2.cols);
    let md = plan.modulus();
    let v = plan.variant();
    let tw = plan.tw_inv();

    for row in a.chunks_exact_mut(cols) {
        gs_stages::<true, C>(row, tw, md, v, cols / 2, 1, ctr);
    }
    for (x, &w) in a.iter_mut().zip(&p2.corr_inv) {
        *x = md.mul(*x, w, v);
    }
    ctr.modmul(a.len() as u64);
    ctr.twiddle_load(a.len() as u64);
    let mut column = vec![0u64; rows];
    for c in 0..cols {
        for (r, x) in column.iter_mut().enumerate() {
            *x = a[r * cols + c];
        }
        gs_stages::<true, C>(&mut column, tw, md, v, rows / 2, 1, ctr);
        for (r, &x) in column.iter().enumerate() {
            a[r * cols + c] = x;
        }
    }
}

/// Four-step forward NTT, normal order to the [`two_d_index_map`] order.
pub fn ntt_2d<C: Counter>(a: &mut Polynomial, plan: &NttPlan, ctr: &mut C) -> Result<()> {
    expect(a, Order::Normal, plan)?;
    forward_2d(&mut a.coeffs, plan, ctr);
    a.order = Order::TwoD;
    Ok(())
}

/// Inverse of [`ntt_2d`], including the `1/n` factor.
pub fn ntt_2d_inv<C: Counter>(a: &mut Polynomial, plan: &NttPlan, ctr: &mut C) -> Result<()> {
    expect(a, Order::TwoD, plan)?;
    inverse_2d(&mut a.coeffs, plan, ctr);
    a.order = Order::Normal;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counter::NoCount;
    use crate::modarith::Variant;
    use crate::ntt::{bit_reversed_index_map, ntt_ct};
    use crate::params::{build_plan, PrimeSource};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn direct_spectrum(a: &[u64], plan: &NttPlan) -> Vec<u64> {
        let (q, psi) = (plan.q(), plan.psi());
        (0..a.len() as u64)
            .map(|j| {
                a.iter().enumerate().fold(0u128, |acc, (i, &x)| {
                    (acc + x as u128 * pow_mod(psi, (2 * j + 1) * i as u64, q) as u128) % q as u128
                }) as u64
            })
            .collect()
    }

    #[test]
    fn shapes() {
        assert_eq!(two_d_shape(16), (4, 4));
        assert_eq!(two_d_shape(32), (8, 4));
        assert_eq!(two_d_shape(2), (2, 1));
        let mut m = two_d_index_map(64);
        m.sort_unstable();
        assert_eq!(m, (0..64).collect::<Vec<_>>());
    }

    #[test]
    fn n16_q97_matches_direct_dft() {
        let plan = NttPlan::with_root(16, 97, 19, Variant::Proposed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            let a: Vec<u64> = (0..16).map(|_| rng.gen_range(0..97)).collect();
            let spec = direct_spectrum(&a, &plan);
            let mut p = Polynomial::new(a, &plan).unwrap();
            ntt_2d(&mut p, &plan, &mut NoCount).unwrap();
            for (pos, &j) in two_d_index_map(16).iter().enumerate() {
                assert_eq!(p.coeffs()[pos], spec[j]);
            }
        }
    }

    #[test]
    fn permutation_of_ct_output_and_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for log_n in 1..=12 {
            let n = 1 << log_n;
            let plan = build_plan(
                n,
                PrimeSource::Generate { bits: 30, seed: 3 },
                Variant::Proposed,
            )
            .unwrap();
            let a: Vec<u64> = (0..n).map(|_| rng.gen_range(0..plan.q())).collect();
            let mut ct = Polynomial::new(a.clone(), &plan).unwrap();
            ntt_ct(&mut ct, &plan, &mut NoCount).unwrap();
            let mut natural = vec![0; n];
            for (pos, &j) in bit_reversed_index_map(n).iter().enumerate() {
                natural[j] = ct.coeffs()[pos];
            }
            let mut td = Polynomial::new(a.clone(), &plan).unwrap();
            ntt_2d(&mut td, &plan, &mut NoCount).unwrap();
            for (pos, &j) in two_d_index_map(n).iter().enumerate() {
                assert_eq!(td.coeffs()[pos], natural[j], "n = {n} pos = {pos}");
            }
            ntt_2d_inv(&mut td, &plan, &mut NoCount).unwrap();
            assert_eq!(td.coeffs(), &a[..]);
        }
    }
}
