//! Microbenchmarks with CSV output.
//!
//! Plan construction and operand generation happen before the clock starts.
//! Reductions are timed as a dependent chain `x <- x * b mod q` in batches
//! of [`REDUCTION_BATCH`] so the clock overhead stays out of the figures;
//! transform kernels are timed one invocation per sample.

use std::fmt;
use std::fs::OpenOptions;
use std::hint::black_box;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::counter::{NoCount, OpCounter};
use crate::error::{Error, Result};
use crate::modarith::{Modulus, Variant};
use crate::ntt::{batch_ntt, forward_in_place, inverse_scaled_in_place, Polynomial};
use crate::params::{build_plan, generate_prime, NttPlan, PrimeSource};
use crate::polymul::{polymul_fused, polymul_ntt, Backend, FusedPlan};

pub const CSV_HEADER: &str =
    "kernel,n,bits,variant,reps,min_ns,mean_ns,median_ns,modmul,addsub,half,twiddle_loads";

/// Chained reductions per clock reading.
pub const REDUCTION_BATCH: u64 = 1000;

/// Rows per invocation of the `batch-ntt` kernel.
pub const BATCH_ROWS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    ReduceBuiltin,
    BarrettClassical,
    BarrettDhem,
    BarrettProposed,
    Ntt,
    Intt,
    NttRadix4,
    Ntt2d,
    Polymul,
    PolymulFused,
    BatchNtt,
}

impl Kernel {
    pub const ALL: [Kernel; 11] = [
        Kernel::ReduceBuiltin,
        Kernel::BarrettClassical,
        Kernel::BarrettDhem,
        Kernel::BarrettProposed,
        Kernel::Ntt,
        Kernel::Intt,
        Kernel::NttRadix4,
        Kernel::Ntt2d,
        Kernel::Polymul,
        Kernel::PolymulFused,
        Kernel::BatchNtt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kernel::ReduceBuiltin => "reduce-builtin",
            Kernel::BarrettClassical => "barrett-classical",
            Kernel::BarrettDhem => "barrett-dhem",
            Kernel::BarrettProposed => "barrett-proposed",
            Kernel::Ntt => "ntt",
            Kernel::Intt => "intt",
            Kernel::NttRadix4 => "ntt-radix4",
            Kernel::Ntt2d => "ntt-2d",
            Kernel::Polymul => "polymul",
            Kernel::PolymulFused => "polymul-fused",
            Kernel::BatchNtt => "batch-ntt",
        }
    }

    /// The reduction a scalar kernel exercises.
    pub fn reduction(self) -> Option<Variant> {
        match self {
            Kernel::ReduceBuiltin => Some(Variant::Builtin),
            Kernel::BarrettClassical => Some(Variant::Classical),
            Kernel::BarrettDhem => Some(Variant::Dhem),
            Kernel::BarrettProposed => Some(Variant::Proposed),
            _ => None,
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kernel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Kernel::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Kernel::ALL.iter().map(|k| k.name()).collect();
                format!(
                    "unknown kernel `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// Min/mean/median of per-operation times, in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub min_ns: f64,
    pub mean_ns: f64,
    pub median_ns: f64,
}

impl Timing {
    pub fn from_samples(samples: &mut [f64]) -> Self {
        assert!(!samples.is_empty());
        samples.sort_by(f64::total_cmp);
        let len = samples.len();
        let median_ns = if len % 2 == 1 {
            samples[len / 2]
        } else {
            (samples[len / 2 - 1] + samples[len / 2]) / 2.0
        };
        Self {
            min_ns: samples[0],
            mean_ns: samples.iter().sum::<f64>() / len as f64,
            median_ns,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub kernel: Kernel,
    pub n: usize,
    pub bits: u32,
    pub variant: Variant,
    pub reps: u64,
    pub timing: Timing,
    pub ops: OpCounter,
}

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.3},{:.3},{:.3},{},{},{},{}",
            self.kernel,
            self.n,
            self.bits,
            self.variant,
            self.reps,
            self.timing.min_ns,
            self.timing.mean_ns,
            self.timing.median_ns,
            self.ops.modmul,
            self.ops.addsub,
            self.ops.half,
            self.ops.twiddle_loads
        )
    }
}

/// Appends rows to `path`, writing the header only if the file is new or
/// empty.
pub fn append_csv(path: &Path, records: &[BenchRecord]) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    };
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err)?;
    let empty = file.metadata().map_err(io_err)?.len() == 0;
    let mut out = String::new();
    if empty {
        out.push_str(CSV_HEADER);
        out.push('\n');
    }
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    file.write_all(out.as_bytes()).map_err(io_err)
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub kernel: Kernel,
    pub n: usize,
    pub bits: u32,
    pub variant: Variant,
    pub reps: u64,
    pub warmup: u64,
    pub workers: usize,
    pub seed: u64,
}

/// Per-product latency of a chain of `reps` dependent modular products.
pub fn time_mulmod_chain(
    md: &Modulus,
    variant: Variant,
    reps: u64,
    warmup: u64,
    seed: u64,
) -> Result<Timing> {
    md.check_variant(variant)?;
    if reps == 0 {
        return Err(Error::Zero("reps"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = md.value();
    let b = rng.gen_range(1..q);
    let x = rng.gen_range(1..q);
    let md = *md;
    Ok(match variant {
        Variant::Builtin => chain(x, reps, warmup, move |x| md.mul(x, b, Variant::Builtin)),
        Variant::Classical => chain(x, reps, warmup, move |x| md.mul(x, b, Variant::Classical)),
        Variant::Dhem => chain(x, reps, warmup, move |x| md.mul(x, b, Variant::Dhem)),
        Variant::Proposed => chain(x, reps, warmup, move |x| md.mul(x, b, Variant::Proposed)),
    })
}

#[inline(never)]
fn chain(mut x: u64, reps: u64, warmup: u64, step: impl Fn(u64) -> u64) -> Timing {
    let step = black_box(step);
    let batch = REDUCTION_BATCH.min(reps);
    for _ in 0..warmup {
        x = step(x);
    }
    let mut samples = Vec::with_capacity(reps.div_ceil(batch) as usize);
    let mut done = 0;
    while done < reps {
        let len = batch.min(reps - done);
        let start = Instant::now();
        for _ in 0..len {
            x = step(x);
        }
        x = black_box(x);
        samples.push(start.elapsed().as_nanos() as f64 / len as f64);
        done += len;
    }
    Timing::from_samples(&mut samples)
}

fn time_each(reps: u64, warmup: u64, mut f: impl FnMut()) -> Result<Timing> {
    if reps == 0 {
        return Err(Error::Zero("reps"));
    }
    for _ in 0..warmup {
        f();
    }
    let mut samples = Vec::with_capacity(reps as usize);
    for _ in 0..reps {
        let start = Instant::now();
        f();
        samples.push(start.elapsed().as_nanos() as f64);
    }
    Ok(Timing::from_samples(&mut samples))
}

fn random_vec(n: usize, q: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    (0..n).map(|_| rng.gen_range(0..q)).collect()
}

/// Runs one benchmark configuration.
pub fn run(cfg: &BenchConfig) -> Result<BenchRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let record = |variant, timing, ops| BenchRecord {
        kernel: cfg.kernel,
        n: cfg.n,
        bits: cfg.bits,
        variant,
        reps: cfg.reps,
        timing,
        ops,
    };

    if let Some(variant) = cfg.kernel.reduction() {
        let q = generate_prime(cfg.bits, 1, cfg.seed)?;
        let md = Modulus::new(q)?;
        let timing = time_mulmod_chain(&md, variant, cfg.reps, cfg.warmup, cfg.seed)?;
        let ops = OpCounter {
            modmul: 1,
            ..OpCounter::default()
        };
        return Ok(record(variant, timing, ops));
    }

    let plan: NttPlan = build_plan(
        cfg.n,
        PrimeSource::Generate {
            bits: cfg.bits,
            seed: cfg.seed,
        },
        cfg.variant,
    )?;
    let (n, q) = (plan.n(), plan.q());
    let a = random_vec(n, q, &mut rng);
    let b = random_vec(n, q, &mut rng);
    let mut ops = OpCounter::default();
    let timing = match cfg.kernel {
        Kernel::Ntt => {
            forward_in_place(&mut a.clone(), &plan, &mut ops);
            let mut x = a.clone();
            time_each(cfg.reps, cfg.warmup, || {
                x.copy_from_slice(&a);
                forward_in_place(black_box(&mut x), &plan, &mut NoCount);
            })?
        }
        Kernel::Intt => {
            inverse_scaled_in_place(&mut a.clone(), &plan, &mut ops);
            let mut x = a.clone();
            time_each(cfg.reps, cfg.warmup, || {
                x.copy_from_slice(&a);
                inverse_scaled_in_place(black_box(&mut x), &plan, &mut NoCount);
            })?
        }
        Kernel::NttRadix4 => {
            let p = Polynomial::new(a.clone(), &plan)?;
            crate::ntt::ntt_radix4_mixed(&mut p.clone(), &plan, &mut ops)?;
            time_each(cfg.reps, cfg.warmup, || {
                let mut x = p.clone();
                crate::ntt::ntt_radix4_mixed(black_box(&mut x), &plan, &mut NoCount)
                    .expect("sized");
            })?
        }
        Kernel::Ntt2d => {
            let p = Polynomial::new(a.clone(), &plan)?;
            crate::ntt::ntt_2d(&mut p.clone(), &plan, &mut ops)?;
            time_each(cfg.reps, cfg.warmup, || {
                let mut x = p.clone();
                crate::ntt::ntt_2d(black_box(&mut x), &plan, &mut NoCount).expect("sized");
            })?
        }
        Kernel::Polymul => {
            polymul_ntt(&a, &b, &plan, Backend::Radix2, &mut ops)?;
            time_each(cfg.reps, cfg.warmup, || {
                black_box(
                    polymul_ntt(&a, &b, &plan, Backend::Radix2, &mut NoCount).expect("sized"),
                );
            })?
        }
        Kernel::PolymulFused => {
            let fp = FusedPlan::from_plan(&plan)?;
            polymul_fused(&a, &b, &fp, &mut ops)?;
            time_each(cfg.reps, cfg.warmup, || {
                black_box(polymul_fused(&a, &b, &fp, &mut NoCount).expect("sized"));
            })?
        }
        Kernel::BatchNtt => {
            let rows: Vec<Polynomial> = (0..BATCH_ROWS)
                .map(|_| Polynomial::new(random_vec(n, q, &mut rng), &plan))
                .collect::<Result<_>>()?;
            ops = batch_ntt(&mut rows.clone(), &plan, cfg.workers)?;
            let mut err = None;
            let t = time_each(cfg.reps, cfg.warmup, || {
                let mut x = rows.clone();
                if let Err(e) = batch_ntt(black_box(&mut x), &plan, cfg.workers) {
                    err = Some(e);
                }
            })?;
            if let Some(e) = err {
                return Err(e);
            }
            t
        }
        _ => unreachable!("reduction kernels handled above"),
    };
    Ok(record(plan.variant(), timing, ops))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kernel: Kernel, n: usize, bits: u32) -> BenchConfig {
        BenchConfig {
            kernel,
            n,
            bits,
            variant: Variant::Proposed,
            reps: 5,
            warmup: 1,
            workers: 2,
            seed: 1,
        }
    }

    #[test]
    fn kernel_names_roundtrip() {
        for k in Kernel::ALL {
            assert_eq!(k.name().parse::<Kernel>(), Ok(k));
        }
        assert!("fft".parse::<Kernel>().is_err());
    }

    #[test]
    fn every_kernel_runs() {
        for k in Kernel::ALL {
            let r = run(&cfg(k, 64, 30)).unwrap();
            assert!(r.timing.min_ns <= r.timing.mean_ns * 1.000_001, "{k}");
            assert!(r.ops.modmul > 0);
        }
        assert!(run(&cfg(Kernel::BarrettDhem, 64, 62)).is_err());
    }

    #[test]
    fn fused_modmul_column() {
        let plain = run(&cfg(Kernel::Polymul, 2048, 30)).unwrap();
        let fused = run(&cfg(Kernel::PolymulFused, 2048, 30)).unwrap();
        assert_eq!(plain.ops.modmul - fused.ops.modmul, 1024);
    }

    #[test]
    fn timing_order_statistics() {
        let t = Timing::from_samples(&mut [4.0, 1.0, 3.0, 2.0]);
        assert_eq!((t.min_ns, t.mean_ns, t.median_ns), (1.0, 2.5, 2.5));
        let t = Timing::from_samples(&mut [5.0, 1.0, 1.0]);
        assert_eq!(t.median_ns, 1.0);
    }

    #[test]
    fn csv_header_written_once() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let r = run(&cfg(Kernel::BarrettProposed, 1, 30)).unwrap();
        append_csv(&path, std::slice::from_ref(&r)).unwrap();
        append_csv(&path, &[r.clone(), r]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1..]
            .iter()
            .all(|l| l.starts_with("barrett-proposed,1,30,proposed,5,")));
        assert_eq!(lines[1].split(',').count(), CSV_HEADER.split(',').count());
    }
}
