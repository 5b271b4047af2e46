//! Merged negacyclic NTTs.
//!
//! The forward transform is the merged Cooley–Tukey NTT: the `psi^i`
//! pre-multiplication is folded into the butterflies and the output comes out
//! in bit-reversed order, so that position `p` holds
//! `sum_i a[i] * psi^((2*br(p) + 1) * i)`. The inverse is the merged
//! Gentleman–Sande NTT over `psi^-1`, which consumes bit-reversed input and
//! produces normal order. The scaled inverse folds the `1/n` factor into the
//! butterflies by halving both outputs of every butterfly.
//!
//! All transforms work in place.

pub(crate) mod radix4;
pub(crate) mod two_d;

use std::thread;

use crate::counter::{Counter, OpCounter};
use crate::error::{Error, Result};
use crate::modarith::{Modulus, Variant};
use crate::params::{reverse_bits, NttPlan};

pub use radix4::{intt_radix4, intt_radix4_mixed, ntt_radix4, ntt_radix4_mixed};
pub use two_d::{ntt_2d, ntt_2d_inv, two_d_index_map, two_d_shape};

/// Layout of a coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    /// Coefficients of the polynomial.
    Normal,
    /// Full spectrum in bit-reversed order.
    BitReversed,
    /// One stage short of the full spectrum in either direction: each pair
    /// `(2i, 2i+1)` holds a residue modulo a degree-two factor of `x^n + 1`.
    Truncated,
    /// Full spectrum in the row/column order of [`ntt_2d`].
    TwoD,
}

/// A length-`n` vector of residues tagged with its layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<u64>,
    order: Order,
}

impl Polynomial {
    /// Wraps normal-order coefficients after checking them against `plan`.
    pub fn new(coeffs: Vec<u64>, plan: &NttPlan) -> Result<Self> {
        Self::with_order(coeffs, Order::Normal, plan)
    }

    pub fn with_order(coeffs: Vec<u64>, order: Order, plan: &NttPlan) -> Result<Self> {
        check_len(coeffs.len(), plan.n())?;
        let q = plan.q();
        if let Some((index, &value)) = coeffs.iter().enumerate().find(|(_, &c)| c >= q) {
            return Err(Error::CoefficientOutOfRange {
                index,
                value: value.to_string(),
                modulus: q.to_string(),
            });
        }
        Ok(Self { coeffs, order })
    }

    pub fn zero(plan: &NttPlan) -> Self {
        Self {
            coeffs: vec![0; plan.n()],
            order: Order::Normal,
        }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn into_coeffs(self) -> Vec<u64> {
        self.coeffs
    }

    fn expect(&self, order: Order, plan: &NttPlan) -> Result<()> {
        check_len(self.coeffs.len(), plan.n())?;
        if self.order != order {
            return Err(Error::OrderMismatch {
                expected: order,
                found: self.order,
            });
        }
        Ok(())
    }
}

pub(crate) fn check_len(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}

/// Runs merged CT stages `m = m_from, 2*m_from, ...` while `m < m_to` over
/// `a`, reading `xi = tw[m + i]` for group `i`.
#[inline]
pub(crate) fn ct_stages<C: Counter>(
    a: &mut [u64],
    tw: &[u64],
    md: &Modulus,
    variant: Variant,
    m_from: usize,
    m_to: usize,
    ctr: &mut C,
) {
    let n = a.len();
    let mut m = m_from;
    while m < m_to {
        let k = n / (2 * m);
        for (i, block) in a.chunks_exact_mut(2 * k).enumerate() {
            let xi = tw[m + i];
            let (lo, hi) = block.split_at_mut(k);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let t = md.mul(*y, xi, variant);
                let u = *x;
                *x = md.add(u, t);
                *y = md.sub(u, t);
            }
        }
        ctr.modmul((n / 2) as u64);
        ctr.addsub(n as u64);
        ctr.twiddle_load(m as u64);
        m *= 2;
    }
}

/// Runs merged GS stages `m = m_from, m_from/2, ...` while `m >= m_to`
/// (`m_to >= 1`), reading `xi = tw[m + i]`. With `SCALED`, both butterfly
/// outputs are halved.
#[inline]
pub(crate) fn gs_stages<const SCALED: bool, C: Counter>(
    a: &mut [u64],
    tw: &[u64],
    md: &Modulus,
    variant: Variant,
    m_from: usize,
    m_to: usize,
    ctr: &mut C,
) {
    debug_assert!(m_to >= 1);
    let n = a.len();
    let mut m = m_from;
    while m >= m_to && m > 0 {
        let k = n / (2 * m);
        for (i, block) in a.chunks_exact_mut(2 * k).enumerate() {
            let xi = tw[m + i];
            let (lo, hi) = block.split_at_mut(k);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*x, *y);
                let s = md.add(u, v);
                let d = md.mul(md.sub(u, v), xi, variant);
                if SCALED {
                    *x = md.half(s);
                    *y = md.half(d);
                } else {
                    *x = s;
                    *y = d;
                }
            }
        }
        ctr.modmul((n / 2) as u64);
        ctr.addsub(n as u64);
        if SCALED {
            ctr.half(n as u64);
        }
        ctr.twiddle_load(m as u64);
        m /= 2;
    }
}

pub(crate) fn forward_in_place<C: Counter>(a: &mut [u64], plan: &NttPlan, ctr: &mut C) {
    ct_stages(
        a,
        plan.tw_fwd(),
        plan.modulus(),
        plan.variant(),
        1,
        a.len(),
        ctr,
    );
}

pub(crate) fn inverse_scaled_in_place<C: Counter>(a: &mut [u64], plan: &NttPlan, ctr: &mut C) {
    let n = a.len();
    gs_stages::<true, C>(
        a,
        plan.tw_inv(),
        plan.modulus(),
        plan.variant(),
        n / 2,
        1,
        ctr,
    );
}

/// Merged CT forward NTT, normal to bit-reversed order.
pub fn ntt_ct<C: Counter>(a: &mut Polynomial, plan: &NttPlan, ctr: &mut C) -> Result<()> {
    a.expect(Order::Normal, plan)?;
    forward_in_place(&mut a.coeffs, plan, ctr);
    a.order = Order::BitReversed;
    Ok(())
}

/// Merged GS inverse NTT without the `1/n` factor: the result is `n` times
/// the true inverse.
pub fn intt_gs<C: Counter>(a: &mut Polynomial, plan: &NttPlan, ctr: &mut C) -> Result<()> {
    a.expect(Order::BitReversed, plan)?;
    let n = plan.n();
    gs_stages::<false, C>(
        &mut a.coeffs,
        plan.tw_inv(),
        plan.modulus(),
        plan.variant(),
        n / 2,
        1,
        ctr,
    );
    a.order = Order::Normal;
    Ok(())
}

/// Merged GS inverse NTT with the `1/n` factor folded in as a halving of
/// every butterfly output.
pub fn intt_gs_scaled<C: Counter>(a: &mut Polynomial, plan: &NttPlan, ctr: &mut C) -> Result<()> {
    a.expect(Order::BitReversed, plan)?;
    inverse_scaled_in_place(&mut a.coeffs, plan, ctr);
    a.order = Order::Normal;
    Ok(())
}

/// Multiplies every entry by `factor`.
pub fn scale_by<C: Counter>(a: &mut Polynomial, factor: u64, plan: &NttPlan, ctr: &mut C) {
    for x in a.coeffs.iter_mut() {
        *x = plan.mul(*x, factor);
    }
    ctr.modmul(a.coeffs.len() as u64);
}

fn require_truncatable(plan: &NttPlan) -> Result<()> {
    if plan.n() < 4 {
        return Err(Error::UnsupportedSize(format!(
            "n = {} has no stage to truncate (need n >= 4)",
            plan.n()
        )));
    }
    Ok(())
}

/// Merged CT NTT with the final stage (`m = n/2`) omitted.
pub fn ntt_ct_truncated<C: Counter>(a: &mut Polynomial, plan: &NttPlan, ctr: &mut C) -> Result<()> {
    require_truncatable(plan)?;
    a.expect(Order::Normal, plan)?;
    let n = plan.n();
    ct_stages(
        &mut a.coeffs,
        plan.tw_fwd(),
        plan.modulus(),
        plan.variant(),
        1,
        n / 2,
        ctr,
    );
    a.order = Order::Truncated;
    Ok(())
}

/// The stage [`ntt_ct_truncated`] leaves out.
pub fn ntt_ct_last_stage<C: Counter>(
    a: &mut Polynomial,
    plan: &NttPlan,
    ctr: &mut C,
) -> Result<()> {
    require_truncatable(plan)?;
    a.expect(Order::Truncated, plan)?;
    let n = plan.n();
    ct_stages(
        &mut a.coeffs,
        plan.tw_fwd(),
        plan.modulus(),
        plan.variant(),
        n / 2,
        n,
        ctr,
    );
    a.order = Order::BitReversed;
    Ok(())
}

/// The first (`m = n/2`) stage of the scaled GS inverse on its own.
pub fn intt_gs_scaled_first_stage<C: Counter>(
    a: &mut Polynomial,
    plan: &NttPlan,
    ctr: &mut C,
) -> Result<()> {
    require_truncatable(plan)?;
    a.expect(Order::BitReversed, plan)?;
    let n = plan.n();
    gs_stages::<true, C>(
        &mut a.coeffs,
        plan.tw_inv(),
        plan.modulus(),
        plan.variant(),
        n / 2,
        n / 2,
        ctr,
    );
    a.order = Order::Truncated;
    Ok(())
}

/// Scaled GS inverse with the first stage omitted: stages `m = n/4, ..., 1`.
pub fn intt_gs_truncated<C: Counter>(
    a: &mut Polynomial,
    plan: &NttPlan,
    ctr: &mut C,
) -> Result<()> {
    require_truncatable(plan)?;
    a.expect(Order::Truncated, plan)?;
    let n = plan.n();
    gs_stages::<true, C>(
        &mut a.coeffs,
        plan.tw_inv(),
        plan.modulus(),
        plan.variant(),
        n / 4,
        1,
        ctr,
    );
    a.order = Order::Normal;
    Ok(())
}

/// Natural spectrum index held at each position of the bit-reversed output
/// of [`ntt_ct`]: position `p` holds `sum_i a[i] psi^((2j+1)i)` for
/// `j = map[p]`.
pub fn bit_reversed_index_map(n: usize) -> Vec<usize> {
    let bits = n.trailing_zeros();
    (0..n).map(|p| reverse_bits(p, bits)).collect()
}

/// Applies [`ntt_ct`] to every row, split over at most `workers` threads.
///
/// Rows are assigned in contiguous chunks, so the output never depends on
/// the worker count. Returns the merged operation counts.
pub fn batch_ntt(rows: &mut [Polynomial], plan: &NttPlan, workers: usize) -> Result<OpCounter> {
    if workers == 0 {
        return Err(Error::Zero("workers"));
    }
    for (r, row) in rows.iter().enumerate() {
        if row.len() != plan.n() {
            return Err(Error::Shape(format!(
                "row {r} has {} entries, expected {}",
                row.len(),
                plan.n()
            )));
        }
        row.expect(Order::Normal, plan)?;
    }
    let mut total = OpCounter::default();
    if rows.is_empty() {
        return Ok(total);
    }
    let chunk = rows.len().div_ceil(workers.min(rows.len()));
    let counters: Vec<OpCounter> = thread::scope(|s| {
        let handles: Vec<_> = rows
            .chunks_mut(chunk)
            .map(|part| {
                s.spawn(move || {
                    let mut ctr = OpCounter::default();
                    for row in part {
                        forward_in_place(&mut row.coeffs, plan, &mut ctr);
                        row.order = Order::BitReversed;
                    }
                    ctr
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("batch worker panicked"))
            .collect()
    });
    for c in counters {
        total += c;
    }
    Ok(total)
}
