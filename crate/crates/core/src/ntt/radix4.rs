//! Radix-4 merged NTTs.
//!
//! Each radix-4 butterfly performs two consecutive radix-2 stages of the
//! merged transforms with three twiddle products plus one product by the
//! fourth root of unity `I = psi^(n/2)`. The result is bit-identical to the
//! radix-2 transforms, so the forward output is in the same bit-reversed
//! order as [`ntt_ct`](super::ntt_ct).
//!
//! For the CT stage pair `(m, 2m)` and group `i`, with `x1 = tw[m+i]` and
//! `x2 = tw[2m+2i]`, the butterfly twiddles are `(x2, x1, x1*x2)`; the
//! sibling group twiddle `tw[2m+2i+1]` equals `I * x2`. The GS pair
//! `(m, m/2)` uses `(xa, xc, xa*xc)` with `xa = tw_inv[m+2i]`,
//! `xc = tw_inv[m/2+i]`.

use super::{check_len, ct_stages, gs_stages, Order, Polynomial};
use crate::counter::Counter;
use crate::error::{Error, Result};
use crate::modarith::Variant;
use crate::params::NttPlan;

#[derive(Debug, Clone)]
pub(crate) struct Radix4Tables {
    fwd: Vec<u64>,
    inv: Vec<u64>,
}

impl Radix4Tables {
    pub(crate) fn new(plan: &NttPlan) -> Self {
        let n = plan.n();
        let md = plan.modulus();
        let mul = |a, b| md.mul(a, b, Variant::Builtin);
        let (tf, ti) = (plan.tw_fwd(), plan.tw_inv());

        let mut fwd = Vec::new();
        let mut m = if plan.log_n() % 2 == 1 { 2 } else { 1 };
        while m < n {
            for i in 0..m {
                let (x1, x2) = (tf[m + i], tf[2 * m + 2 * i]);
                fwd.extend([x2, x1, mul(x1, x2)]);
            }
            m *= 4;
        }

        let mut inv = Vec::new();
        let mut m = n / 2;
        while m >= 2 {
            for i in 0..m / 2 {
                let (xa, xc) = (ti[m + 2 * i], ti[m / 2 + i]);
                inv.extend([xa, xc, mul(xa, xc)]);
            }
            m /= 4;
        }
        Self { fwd, inv }
    }
}

fn forward_mixed<C: Counter>(a: &mut [u64], plan: &NttPlan, ctr: &mut C) {
    let n = a.len();
    let md = plan.modulus();
    let v = plan.variant();
    let tables = plan.radix4_tables();
    let unit = plan.tw_fwd()[1];

    let mut m = 1;
    if plan.log_n() % 2 == 1 {
        ct_stages(a, plan.tw_fwd(), md, v, 1, 2, ctr);
        m = 2;
    }
    let mut off = 0;
    while m < n {
        let k = n / (2 * m);
        let h = k / 2;
        for (i, block) in a.chunks_exact_mut(2 * k).enumerate() {
            let w = &tables.fwd[off + 3 * i..off + 3 * i + 3];
            let (lo, hi) = block.split_at_mut(k);
            let (q0, q1) = lo.split_at_mut(h);
            let (q2, q3) = hi.split_at_mut(h);
            for j in 0..h {
                let (x0, x1, x2, x3) = (q0[j], q1[j], q2[j], q3[j]);
                let t2 = md.mul(x2, w[1], v);
                let t1 = md.mul(x1, w[0], v);
                let t3 = md.mul(x3, w[2], v);
                let s = md.add(x0, t2);
                let d = md.sub(x0, t2);
                let c = md.add(t1, t3);
                let e = md.mul(md.sub(t1, t3), unit, v);
                q0[j] = md.add(s, c);
                q1[j] = md.sub(s, c);
                q2[j] = md.add(d, e);
                q3[j] = md.sub(d, e);
            }
        }
        ctr.modmul(n as u64);
        ctr.addsub(2 * n as u64);
        ctr.twiddle_load(3 * m as u64);
        off += 3 * m;
        m *= 4;
    }
}

fn inverse_mixed<C: Counter>(a: &mut [u64], plan: &NttPlan, ctr: &mut C) {
    let n = a.len();
    let md = plan.modulus();
    let v = plan.variant();
    let tables = plan.radix4_tables();
    let unit_inv = plan.tw_inv()[1];

    let mut m = n / 2;
    let mut off = 0;
    while m >= 2 {
        let k = n / (2 * m);
        for (i, block) in a.chunks_exact_mut(4 * k).enumerate() {
            let w = &tables.inv[off + 3 * i..off + 3 * i + 3];
            let (lo, hi) = block.split_at_mut(2 * k);
            let (q0, q1) = lo.split_at_mut(k);
            let (q2, q3) = hi.split_at_mut(k);
            for j in 0..k {
                let (x0, x1, x2, x3) = (q0[j], q1[j], q2[j], q3[j]);
                let s01 = md.add(x0, x1);
                let s23 = md.add(x2, x3);
                let d01 = md.sub(x0, x1);
                let d23 = md.mul(md.sub(x2, x3), unit_inv, v);
                let z0 = md.add(s01, s23);
                let z2 = md.mul(md.sub(s01, s23), w[1], v);
                let z1 = md.mul(md.add(d01, d23), w[0], v);
                let z3 = md.mul(md.sub(d01, d23), w[2], v);
                q0[j] = md.half(md.half(z0));
                q1[j] = md.half(md.half(z1));
                q2[j] = md.half(md.half(z2));
                q3[j] = md.half(md.half(z3));
            }
        }
        ctr.modmul(n as u64);
        ctr.addsub(2 * n as u64);
        ctr.half(2 * n as u64);
        ctr.twiddle_load(3 * (m / 2) as u64);
        off += 3 * (m / 2);
        m /= 4;
    }
    if m == 1 {
        gs_stages::<true, C>(a, plan.tw_inv(), md, v, 1, 1, ctr);
    }
}

fn require_even_log(plan: &NttPlan) -> Result<()> {
    if !plan.log_n().is_multiple_of(2) {
        return Err(Error::UnsupportedSize(format!(
            "radix-4 needs an even log2(n), got n = {}",
            plan.n()
        )));
    }
    Ok(())
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

/// Radix-4 merged CT NTT; requires `log2 n` even.
pub fn ntt_radix4<C: Counter>(a: &mut Polynomial, plan: &NttPlan, ctr: &mut C) -> Result<()> {
    require_even_log(plan)?;
    ntt_radix4_mixed(a, plan, ctr)
}

/// Scaled radix-4 merged GS inverse; requires `log2 n` even.
pub fn intt_radix4<C: Counter>(a: &mut Polynomial, plan: &NttPlan, ctr: &mut C) -> Result<()> {
    require_even_log(plan)?;
    intt_radix4_mixed(a, plan, ctr)
}

/// Radix-4 forward NTT for any `n`: when `log2 n` is odd a single radix-2
/// stage runs first.
pub fn ntt_radix4_mixed<C: Counter>(a: &mut Polynomial, plan: &NttPlan, ctr: &mut C) -> Result<()> {
    expect(a, Order::Normal, plan)?;
    forward_mixed(&mut a.coeffs, plan, ctr);
    a.order = Order::BitReversed;
    Ok(())
}

/// Scaled radix-4 inverse for any `n`: when `log2 n` is odd a single
/// radix-2 stage runs last.
pub fn intt_radix4_mixed<C: Counter>(
    a: &mut Polynomial,
    plan: &NttPlan,
    ctr: &mut C,
) -> Result<()> {
    expect(a, Order::BitReversed, plan)?;
    inverse_mixed(&mut a.coeffs, plan, ctr);
    a.order = Order::Normal;
    Ok(())
}
