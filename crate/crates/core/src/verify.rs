//! Oracle-equivalence and counter-bound suites behind `nttmul verify`.
//!
//! Every randomized check derives its RNG seed from the configured master
//! seed and the cell coordinates, so a reported counterexample
//! `(n, q, seed, index)` can be replayed on its own.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::counter::{NoCount, OpCounter};
use crate::error::{Error, Result};
use crate::modarith::{
    barrett_classical_counted, barrett_dhem_counted, barrett_proposed_counted, reduce_builtin,
    Modulus, ReductionStats, Variant, MAX_DHEM_BITS,
};
use crate::ntt::{forward_in_place, inverse_scaled_in_place};
use crate::params::{build_plan, NttPlan, PrimeSource};
use crate::polymul::{negacyclic_naive, polymul_fused, polymul_ntt, Backend, FusedPlan};
use crate::rns::{decompose, negacyclic_naive_big, polymul_rns, reconstruct, RnsBasis};

/// First failing input of a suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub n: usize,
    pub q: String,
    pub seed: u64,
    pub index: usize,
    pub what: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} q={} seed={} index={}: {}",
            self.n, self.q, self.seed, self.index, self.what
        )
    }
}

type Check<T> = std::result::Result<T, Counterexample>;

/// Seed for sample `s` of the cell `(n, bits)`.
pub fn cell_seed(master: u64, n: usize, bits: u32, s: u64) -> u64 {
    // splitmix64 finalizer over the packed coordinates
    let mut z = master
        ^ (n as u64).rotate_left(17)
        ^ (bits as u64).rotate_left(41)
        ^ s.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Subtraction tallies per Barrett variant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReductionTally {
    pub inputs: u64,
    pub classical: ReductionStats,
    pub dhem: ReductionStats,
    pub proposed: ReductionStats,
}

impl ReductionTally {
    /// Classical at most two subtractions, the other two at most one.
    pub fn bounds_hold(&self) -> bool {
        self.classical.max_subtractions() <= 2
            && self.dhem.max_subtractions() <= 1
            && self.proposed.max_subtractions() <= 1
    }

    pub fn merge(&mut self, other: &ReductionTally) {
        self.inputs += other.inputs;
        self.classical += other.classical;
        self.dhem += other.dhem;
        self.proposed += other.proposed;
    }
}

fn check_reduction(
    x: u128,
    md: &Modulus,
    tally: &mut ReductionTally,
    n: usize,
    seed: u64,
    index: usize,
) -> Check<()> {
    let want = reduce_builtin(x, md.value()).expect("odd modulus");
    let fail = |name: &str, got: u64| Counterexample {
        n,
        q: md.value().to_string(),
        seed,
        index,
        what: format!("{name} reduced {x} to {got}, expected {want}"),
    };
    let got = barrett_classical_counted(x, md, &mut tally.classical);
    if got != want {
        return Err(fail("classical", got));
    }
    if md.bits() <= MAX_DHEM_BITS {
        let got = barrett_dhem_counted(x, md, &mut tally.dhem).expect("admissible");
        if got != want {
            return Err(fail("dhem", got));
        }
    }
    let got = barrett_proposed_counted(x, md, &mut tally.proposed);
    if got != want {
        return Err(fail("proposed", got));
    }
    tally.inputs += 1;
    Ok(())
}

/// Every odd `q` in `[3, max_q]` and every `x < q^2`.
pub fn reduction_exhaustive(max_q: u64) -> Check<ReductionTally> {
    let mut tally = ReductionTally::default();
    for q in (3..=max_q).step_by(2) {
        let md = Modulus::new(q).expect("odd modulus");
        for x in 0..(q as u128 * q as u128) {
            check_reduction(x, &md, &mut tally, 1, 0, x as usize)?;
        }
    }
    Ok(tally)
}

/// Random odd `bits`-bit moduli with uniform `a, b < q`; checks `a * b`.
pub fn reduction_random(bits: u32, samples: u64, seed: u64) -> Check<ReductionTally> {
    let mut tally = ReductionTally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (1u64 << (bits - 1), (1u64 << bits) - 1);
    for i in 0..samples {
        let q = rng.gen_range(lo..=hi) | 1;
        let md = Modulus::new(q).expect("odd modulus");
        let a = rng.gen_range(0..q);
        let b = rng.gen_range(0..q);
        check_reduction(a as u128 * b as u128, &md, &mut tally, 1, seed, i as usize)?;
    }
    Ok(tally)
}

/// The product `994674970 * 994705408` modulo `994705409`.
pub const NAMED_TRIPLE: (u64, u64, u64) = (994_674_970, 994_705_408, 994_705_409);
pub const NAMED_TRIPLE_RESULT: u64 = 30_439;

pub fn named_triple() -> Check<ReductionTally> {
    let (a, b, q) = NAMED_TRIPLE;
    let md = Modulus::new(q).expect("odd modulus");
    let mut tally = ReductionTally::default();
    check_reduction(a as u128 * b as u128, &md, &mut tally, 1, 0, 0)?;
    let got = reduce_builtin(a as u128 * b as u128, q).expect("odd modulus");
    if got != NAMED_TRIPLE_RESULT || tally.proposed.max_subtractions() > 1 {
        return Err(Counterexample {
            n: 1,
            q: q.to_string(),
            seed: 0,
            index: 0,
            what: format!("got {got} with {:?}", tally.proposed),
        });
    }
    Ok(tally)
}

/// Injected fault used to check that verification can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Overwrite one forward twiddle after the plan is built.
    CorruptTwiddle,
}

/// Builds the plan of a grid cell, applies `fault` and validates.
pub fn cell_plan(n: usize, bits: u32, seed: u64, fault: Option<Fault>) -> Check<NttPlan> {
    let fail = |q: String, what: String| Counterexample {
        n,
        q,
        seed,
        index: 0,
        what,
    };
    let mut plan = build_plan(n, PrimeSource::Generate { bits, seed }, Variant::Proposed)
        .map_err(|e| fail("?".into(), format!("plan construction: {e}")))?;
    if fault == Some(Fault::CorruptTwiddle) {
        let q = plan.q();
        let (fwd, _) = plan.twiddles_mut();
        let last = fwd.len() - 1;
        fwd[last] = (fwd[last] + 1) % q;
    }
    plan.validate()
        .map_err(|e| fail(plan.q().to_string(), format!("plan validation: {e}")))?;
    Ok(plan)
}

fn random_vec(n: usize, q: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    (0..n).map(|_| rng.gen_range(0..q)).collect()
}

fn first_diff(got: &[u64], want: &[u64]) -> Option<usize> {
    got.iter().zip(want).position(|(a, b)| a != b)
}

/// `intt_gs_scaled(ntt_ct(a)) == a` for `samples` random vectors.
pub fn ntt_roundtrip_cell(plan: &NttPlan, bits: u32, samples: u64, seed: u64) -> Check<u64> {
    let (n, q) = (plan.n(), plan.q());
    for s in 0..samples {
        let sseed = cell_seed(seed, n, bits, s);
        let mut rng = ChaCha8Rng::seed_from_u64(sseed);
        let a = random_vec(n, q, &mut rng);
        let mut x = a.clone();
        forward_in_place(&mut x, plan, &mut NoCount);
        inverse_scaled_in_place(&mut x, plan, &mut NoCount);
        if let Some(index) = first_diff(&x, &a) {
            return Err(Counterexample {
                n,
                q: q.to_string(),
                seed: sseed,
                index,
                what: format!("roundtrip gave {}, expected {}", x[index], a[index]),
            });
        }
    }
    Ok(samples)
}

/// Naive, radix-2, radix-4, 2D and fused multiplication agree.
pub fn polymul_cell(plan: &NttPlan, bits: u32, samples: u64, seed: u64) -> Check<u64> {
    let (n, q) = (plan.n(), plan.q());
    let fused = if n >= 4 {
        Some(FusedPlan::from_plan(plan).expect("n >= 4"))
    } else {
        None
    };
    for s in 0..samples {
        let sseed = cell_seed(seed, n, bits, s);
        let mut rng = ChaCha8Rng::seed_from_u64(sseed);
        let a = random_vec(n, q, &mut rng);
        let b = random_vec(n, q, &mut rng);
        let want = negacyclic_naive(&a, &b, q).expect("matching lengths");
        let mut results = Vec::with_capacity(4);
        for backend in Backend::ALL {
            let got = polymul_ntt(&a, &b, plan, backend, &mut NoCount).expect("valid operands");
            results.push((format!("ntt/{backend:?}"), got));
        }
        if let Some(fp) = &fused {
            let got = polymul_fused(&a, &b, fp, &mut NoCount).expect("valid operands");
            results.push(("fused".into(), got));
        }
        for (name, got) in results {
            if let Some(index) = first_diff(&got, &want) {
                return Err(Counterexample {
                    n,
                    q: q.to_string(),
                    seed: sseed,
                    index,
                    what: format!("{name} gave {}, naive gave {}", got[index], want[index]),
                });
            }
        }
    }
    Ok(samples)
}

/// Counter differences between the radix-2 pipeline and the fused one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FusionDeltas {
    pub n: usize,
    pub unfused: OpCounter,
    pub fused: OpCounter,
}

impl FusionDeltas {
    pub fn measure(plan: &NttPlan) -> Result<Self> {
        let zero = vec![0; plan.n()];
        let mut unfused = OpCounter::default();
        polymul_ntt(&zero, &zero, plan, Backend::Radix2, &mut unfused)?;
        let mut fused = OpCounter::default();
        polymul_fused(&zero, &zero, &FusedPlan::from_plan(plan)?, &mut fused)?;
        Ok(Self {
            n: plan.n(),
            unfused,
            fused,
        })
    }

    /// `(modmul, half, addsub, negations)` saved by fusion; negations
    /// come out negative since fusion adds them.
    pub fn saved(&self) -> (i64, i64, i64, i64) {
        let d = self.unfused - self.fused;
        (d.modmul, d.half, d.addsub, d.negations)
    }

    pub fn expected(n: usize) -> (i64, i64, i64, i64) {
        let n = n as i64;
        (n / 2, n, n / 2, -(n / 4))
    }

    pub fn matches_closed_form(&self) -> bool {
        self.saved() == Self::expected(self.n)
    }
}

/// Fused plan holds `n/2 + n/2` twiddle words against `n + n`.
pub fn twiddle_footprint(plan: &NttPlan) -> Result<(usize, usize)> {
    Ok((
        FusedPlan::from_plan(plan)?.twiddle_words(),
        plan.twiddle_words(),
    ))
}

fn random_big(n: usize, q: &BigUint, rng: &mut ChaCha8Rng) -> Vec<BigUint> {
    let bytes = (q.bits() as usize).div_ceil(8) + 8;
    (0..n)
        .map(|_| {
            let raw: Vec<u8> = (0..bytes).map(|_| rng.gen()).collect();
            BigUint::from_bytes_le(&raw) % q
        })
        .collect()
}

/// Decompose/reconstruct roundtrip and `polymul_rns` against the
/// multi-word schoolbook product.
pub fn rns_cell(basis: &RnsBasis, samples: u64, seed: u64) -> Check<u64> {
    let n = basis.n();
    let q = basis.big_q();
    for s in 0..samples {
        let sseed = cell_seed(seed, n, basis.len() as u32, s);
        let mut rng = ChaCha8Rng::seed_from_u64(sseed);
        let a = random_big(n, q, &mut rng);
        let b = random_big(n, q, &mut rng);
        let fail = |index: usize, what: String| Counterexample {
            n,
            q: q.to_string(),
            seed: sseed,
            index,
            what,
        };
        let back = reconstruct(&decompose(&a, basis).expect("reduced"), basis).expect("shape");
        if let Some(index) = back.iter().zip(&a).position(|(x, y)| x != y) {
            return Err(fail(index, "decompose/reconstruct roundtrip".into()));
        }
        let want = negacyclic_naive_big(&a, &b, q).expect("shape");
        let got = polymul_rns(&a, &b, basis, &mut NoCount).expect("valid operands");
        if let Some(index) = got.iter().zip(&want).position(|(x, y)| x != y) {
            return Err(fail(
                index,
                format!("rns gave {}, oracle gave {}", got[index], want[index]),
            ));
        }
    }
    Ok(samples)
}

/// Sizes and bit widths swept by [`run`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub ns: Vec<usize>,
    pub bits: Vec<u32>,
    /// Largest `n` the quadratic-time multiplication oracle is run at.
    pub polymul_max_n: usize,
    pub fusion_ns: Vec<usize>,
    pub rns_ns: Vec<usize>,
    pub rns_ks: Vec<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            ns: (1..=12).map(|l| 1 << l).collect(),
            bits: vec![28, 30, 62],
            polymul_max_n: 1 << 10,
            fusion_ns: vec![4, 1 << 11, 1 << 16],
            rns_ns: vec![8, 64],
            rns_ks: vec![2, 4],
        }
    }
}

impl FromStr for Grid {
    type Err = Error;

    /// Lines `key v1 v2 ...` with keys `n`, `bits`, `polymul-max-n`,
    /// `fusion-n`, `rns-n`, `rns-k`. Missing keys keep their defaults.
    fn from_str(text: &str) -> Result<Self> {
        let mut grid = Grid::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::Parse { line: i + 1, msg };
            let mut it = line.split_whitespace();
            let key = it.next().unwrap_or_default();
            let values = it
                .map(|v| {
                    v.parse::<usize>()
                        .map_err(|e| bad(format!("bad value `{v}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if values.is_empty() {
                return Err(bad(format!("`{key}` has no values")));
            }
            match key {
                "n" => grid.ns = values,
                "bits" => grid.bits = values.into_iter().map(|b| b as u32).collect(),
                "polymul-max-n" => grid.polymul_max_n = values[0],
                "fusion-n" => grid.fusion_ns = values,
                "rns-n" => grid.rns_ns = values,
                "rns-k" => grid.rns_ks = values,
                _ => return Err(bad(format!("unknown key `{key}`"))),
            }
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub grid: Grid,
    /// Random vectors (or vector pairs) per grid cell.
    pub samples: u64,
    /// Random inputs per bit size in the reduction suite.
    pub reduction_samples: u64,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl VerifyConfig {
    /// `samples` vectors per cell and `10_000 * samples` reduction inputs.
    pub fn new(grid: Grid, samples: u64, seed: u64) -> Self {
        Self {
            grid,
            samples,
            reduction_samples: samples.saturating_mul(10_000),
            seed,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Pass,
    Skipped(String),
    Fail(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl SuiteReport {
    fn from_check<T>(name: &'static str, r: Check<T>, detail: impl FnOnce(&T) -> String) -> Self {
        match r {
            Ok(v) => Self {
                name,
                detail: detail(&v),
                status: Status::Pass,
            },
            Err(c) => Self {
                name,
                status: Status::Fail(c.to_string()),
                detail: String::new(),
            },
        }
    }

    fn skipped(name: &'static str, why: &str) -> Self {
        Self {
            name,
            status: Status::Skipped(why.into()),
            detail: String::new(),
        }
    }

    pub fn passed(&self) -> bool {
        !matches!(self.status, Status::Fail(_))
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.status {
            Status::Pass => write!(f, "PASS {}", self.name)?,
            Status::Skipped(why) => write!(f, "SKIP {} ({why})", self.name)?,
            Status::Fail(why) => write!(f, "FAIL {}: {why}", self.name)?,
        }
        if !self.detail.is_empty() {
            write!(f, " [{}]", self.detail)?;
        }
        Ok(())
    }
}

fn tally_detail(t: &ReductionTally) -> String {
    format!(
        "{} inputs, max subtractions classical/dhem/proposed = {}/{}/{}",
        t.inputs,
        t.classical.max_subtractions(),
        t.dhem.max_subtractions(),
        t.proposed.max_subtractions()
    )
}

fn bounds(t: ReductionTally) -> Check<ReductionTally> {
    if t.bounds_hold() {
        Ok(t)
    } else {
        Err(Counterexample {
            n: 1,
            q: "-".into(),
            seed: 0,
            index: 0,
            what: format!("subtraction bound exceeded: {}", tally_detail(&t)),
        })
    }
}

fn sweep<F>(cfg: &VerifyConfig, ns: &[usize], mut cell: F) -> Check<u64>
where
    F: FnMut(&NttPlan, u32) -> Check<u64>,
{
    let mut total = 0;
    for &bits in &cfg.grid.bits {
        for &n in ns {
            let plan = cell_plan(n, bits, cfg.seed, cfg.fault)?;
            total += cell(&plan, bits)?;
        }
    }
    Ok(total)
}

/// Runs every suite and returns one report per suite.
pub fn run(cfg: &VerifyConfig) -> Vec<SuiteReport> {
    let mut out = Vec::new();
    let sampled = cfg.samples > 0;

    out.push(SuiteReport::from_check(
        "reduction-exhaustive",
        reduction_exhaustive(255).and_then(bounds),
        tally_detail,
    ));

    if cfg.reduction_samples > 0 {
        let r = [28, 29, 30, 62]
            .iter()
            .try_fold(ReductionTally::default(), |mut acc, &bits| {
                let t =
                    reduction_random(bits, cfg.reduction_samples, cell_seed(cfg.seed, 1, bits, 0))?;
                acc.merge(&t);
                Ok(acc)
            });
        out.push(SuiteReport::from_check(
            "reduction-random",
            r.and_then(bounds),
            tally_detail,
        ));
        match reduction_random(30, cfg.reduction_samples, cell_seed(cfg.seed, 1, 30, 1)) {
            Ok(t) => {
                let rate = t.classical.second_subtraction_rate();
                let status = if rate > 0.0 && rate < 0.05 {
                    Status::Pass
                } else {
                    Status::Fail(format!("second-subtraction rate {rate} outside (0, 0.05)"))
                };
                out.push(SuiteReport {
                    name: "classical-second-subtraction",
                    status,
                    detail: format!("rate {:.4}%", 100.0 * rate),
                });
            }
            Err(c) => out.push(SuiteReport {
                name: "classical-second-subtraction",
                status: Status::Fail(c.to_string()),
                detail: String::new(),
            }),
        }
    } else {
        out.push(SuiteReport::skipped("reduction-random", "no samples"));
        out.push(SuiteReport::skipped(
            "classical-second-subtraction",
            "no samples",
        ));
    }

    out.push(SuiteReport::from_check(
        "named-triple",
        named_triple(),
        |_| format!("{NAMED_TRIPLE_RESULT}"),
    ));

    if sampled {
        let r = sweep(cfg, &cfg.grid.ns, |plan, bits| {
            ntt_roundtrip_cell(plan, bits, cfg.samples, cfg.seed)
        });
        out.push(SuiteReport::from_check("ntt-roundtrip", r, |k| {
            format!("{k} vectors")
        }));

        let ns: Vec<usize> = cfg
            .grid
            .ns
            .iter()
            .copied()
            .filter(|&n| n <= cfg.grid.polymul_max_n)
            .collect();
        let r = sweep(cfg, &ns, |plan, bits| {
            polymul_cell(plan, bits, cfg.samples, cfg.seed)
        });
        out.push(SuiteReport::from_check("polymul-equality", r, |k| {
            format!("{k} pairs")
        }));
    } else {
        out.push(SuiteReport::skipped("ntt-roundtrip", "no samples"));
        out.push(SuiteReport::skipped("polymul-equality", "no samples"));
    }

    let r = cfg.grid.fusion_ns.iter().try_fold(0u64, |acc, &n| {
        let plan = cell_plan(n, 30, cfg.seed, cfg.fault)?;
        let fail = |what: String| Counterexample {
            n,
            q: plan.q().to_string(),
            seed: cfg.seed,
            index: 0,
            what,
        };
        let d = FusionDeltas::measure(&plan).map_err(|e| fail(e.to_string()))?;
        if !d.matches_closed_form() {
            return Err(fail(format!(
                "deltas {:?}, expected {:?}",
                d.saved(),
                FusionDeltas::expected(n)
            )));
        }
        let (fused, full) = twiddle_footprint(&plan).map_err(|e| fail(e.to_string()))?;
        if fused != n || full != 2 * n {
            return Err(fail(format!("twiddle words {fused} vs {full}")));
        }
        Ok(acc + 1)
    });
    out.push(SuiteReport::from_check("fusion-counts", r, |k| {
        format!("{k} sizes")
    }));

    if sampled {
        let mut r: Check<u64> = Ok(0);
        'outer: for &n in &cfg.grid.rns_ns {
            for &k in &cfg.grid.rns_ks {
                let basis = match RnsBasis::generate(n, 30, k, Variant::Proposed, cfg.seed) {
                    Ok(b) => b,
                    Err(e) => {
                        r = Err(Counterexample {
                            n,
                            q: "-".into(),
                            seed: cfg.seed,
                            index: 0,
                            what: format!("basis construction: {e}"),
                        });
                        break 'outer;
                    }
                };
                if let Err(c) = rns_cell(&basis, cfg.samples, cfg.seed) {
                    r = Err(c);
                    break 'outer;
                }
                r = r.map(|t| t + cfg.samples);
            }
        }
        out.push(SuiteReport::from_check("rns", r, |k| format!("{k} pairs")));
    } else {
        out.push(SuiteReport::skipped("rns", "no samples"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> Grid {
        Grid {
            ns: vec![2, 4, 16],
            bits: vec![20, 62],
            polymul_max_n: 16,
            fusion_ns: vec![4, 64],
            rns_ns: vec![8],
            rns_ks: vec![2],
        }
    }

    #[test]
    fn small_grid_passes() {
        let mut cfg = VerifyConfig::new(small_grid(), 2, 1);
        cfg.reduction_samples = 20_000;
        let reports = run(&cfg);
        for r in &reports {
            assert_eq!(r.status, Status::Pass, "{r}");
        }
        assert_eq!(reports.len(), 8);
    }

    #[test]
    fn zero_samples_skip_randomized_suites() {
        let cfg = VerifyConfig::new(small_grid(), 0, 1);
        let reports = run(&cfg);
        let skipped: Vec<_> = reports
            .iter()
            .filter(|r| matches!(r.status, Status::Skipped(_)))
            .map(|r| r.name)
            .collect();
        assert_eq!(
            skipped,
            [
                "reduction-random",
                "classical-second-subtraction",
                "ntt-roundtrip",
                "polymul-equality",
                "rns"
            ]
        );
        assert!(reports.iter().all(SuiteReport::passed));
    }

    #[test]
    fn corrupted_twiddle_is_reported() {
        let mut cfg = VerifyConfig::new(small_grid(), 1, 1);
        cfg.fault = Some(Fault::CorruptTwiddle);
        let reports = run(&cfg);
        let failed: Vec<_> = reports.iter().filter(|r| !r.passed()).collect();
        assert!(!failed.is_empty());
        for r in failed {
            let Status::Fail(msg) = &r.status else {
                unreachable!()
            };
            assert!(msg.contains("plan validation"), "{msg}");
            assert!(msg.starts_with("n="), "{msg}");
        }
    }

    #[test]
    fn grid_file_format() {
        let g: Grid = "# small\nn 2 4\nbits 30\n".parse().unwrap();
        assert_eq!(g.ns, vec![2, 4]);
        assert_eq!(g.bits, vec![30]);
        assert_eq!(g.polymul_max_n, Grid::default().polymul_max_n);
        assert!(matches!(
            "n 2\nsize 3\n".parse::<Grid>(),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!("bits\n".parse::<Grid>().is_err());
    }

    #[test]
    fn cell_seeds_differ() {
        let a = cell_seed(1, 16, 30, 0);
        assert_ne!(a, cell_seed(1, 16, 30, 1));
        assert_ne!(a, cell_seed(1, 32, 30, 0));
        assert_ne!(a, cell_seed(2, 16, 30, 0));
        assert_eq!(a, cell_seed(1, 16, 30, 0));
    }
}
