//! Operation-count instrumentation for the transforms and multipliers.

use std::ops::{AddAssign, Sub};

/// Sink for operation counts. Kernels are generic over it so that the
/// [`NoCount`] instantiation compiles the tallies away.
pub trait Counter {
    fn modmul(&mut self, _n: u64) {}
    fn addsub(&mut self, _n: u64) {}
    fn half(&mut self, _n: u64) {}
    fn twiddle_load(&mut self, _n: u64) {}
    fn negation(&mut self, _n: u64) {}
}

/// Discards every count.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoCount;

impl Counter for NoCount {}

/// Tallies of modular products, sums/differences, half-scalings, twiddle
/// loads and negations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub modmul: u64,
    pub addsub: u64,
    pub half: u64,
    pub twiddle_loads: u64,
    pub negations: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Counter for OpCounter {
    #[inline(always)]
    fn modmul(&mut self, n: u64) {
        self.modmul += n;
    }
    #[inline(always)]
    fn addsub(&mut self, n: u64) {
        self.addsub += n;
    }
    #[inline(always)]
    fn half(&mut self, n: u64) {
        self.half += n;
    }
    #[inline(always)]
    fn twiddle_load(&mut self, n: u64) {
        self.twiddle_loads += n;
    }
    #[inline(always)]
    fn negation(&mut self, n: u64) {
        self.negations += n;
    }
}

impl AddAssign for OpCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.modmul += rhs.modmul;
        self.addsub += rhs.addsub;
        self.half += rhs.half;
        self.twiddle_loads += rhs.twiddle_loads;
        self.negations += rhs.negations;
    }
}

/// Signed difference between two snapshots, `self - rhs` field by field.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpDelta {
    pub modmul: i64,
    pub addsub: i64,
    pub half: i64,
    pub twiddle_loads: i64,
    pub negations: i64,
}

impl Sub for OpCounter {
    type Output = OpDelta;

    fn sub(self, rhs: Self) -> OpDelta {
        let d = |a: u64, b: u64| a as i64 - b as i64;
        OpDelta {
            modmul: d(self.modmul, rhs.modmul),
            addsub: d(self.addsub, rhs.addsub),
            half: d(self.half, rhs.half),
            twiddle_loads: d(self.twiddle_loads, rhs.twiddle_loads),
            negations: d(self.negations, rhs.negations),
        }
    }
}
