//! Seeded batch runs of the inequality checks in [`crate::bounds`].

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, BoundError, BoundQuery, BoundReport, RemainderEstimate};
use crate::cuboid::Cuboid;
use crate::lattice::RemainderExponents;
use crate::optimizer::SearchBox;
use crate::spectrum;

/// Largest threshold drawn for counting checks.
pub const LAMBDA_MAX: f64 = 1e4;
/// Largest rank drawn for the Pólya check.
pub const POLYA_K_MAX: u64 = 1000;
/// Thresholds per box in the counting-bound suite.
pub const LAMBDAS_PER_BOX: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("sample count must be positive")]
    NoSamples,
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    Lemma31,
    Lemma32,
    Lemma41,
    Identity,
    CubeChain,
    Polya,
    All,
}

impl Suite {
    /// Every concrete suite, in the order `All` runs them.
    pub const CONCRETE: [Suite; 6] = [
        Suite::Lemma31,
        Suite::Lemma32,
        Suite::Lemma41,
        Suite::Identity,
        Suite::CubeChain,
        Suite::Polya,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Lemma31 => "lemma31",
            Suite::Lemma32 => "lemma32",
            Suite::Lemma41 => "lemma41",
            Suite::Identity => "identity",
            Suite::CubeChain => "cube-chain",
            Suite::Polya => "polya",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::CONCRETE
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.as_str() == s)
            .ok_or_else(|| VerifyError::UnknownSuite(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub suite: Suite,
    pub report: BoundReport,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifySummary {
    pub total: usize,
    pub hard_failures: usize,
    pub float_artifacts: usize,
}

impl VerifySummary {
    pub fn of(rows: &[SuiteRow]) -> Self {
        Self {
            total: rows.len(),
            hard_failures: rows.iter().filter(|r| !r.report.pass).count(),
            float_artifacts: rows.iter().filter(|r| r.report.is_float_artifact()).count(),
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Uniform draw from the optimizer's search box.
pub fn random_cuboid(rng: &mut ChaCha8Rng) -> Cuboid {
    let u: f64 = rng.gen();
    let v: f64 = rng.gen();
    SearchBox::default()
        .cuboid(u, v)
        .expect("search box maps into valid boxes")
}

fn random_query(rng: &mut ChaCha8Rng, n: u32) -> BoundQuery {
    // a fifth of the draws sit on or near the small-y end where the bounds are tight
    let y = if rng.gen_bool(0.2) {
        rng.gen_range(0.0..4.0)
    } else {
        log_uniform(rng, 1e-2, 1e4)
    };
    let a = log_uniform(rng, 0.05, 10.0);
    BoundQuery::new(y, a, n).expect("sampled parameters are valid")
}

fn rows(suite: Suite, reports: Vec<BoundReport>) -> Vec<SuiteRow> {
    reports.into_iter().map(|report| SuiteRow { suite, report }).collect()
}

fn collect<T: Send>(jobs: Vec<T>, f: impl Fn(T) -> Result<Vec<BoundReport>, BoundError> + Sync + Send) -> Result<Vec<BoundReport>, BoundError> {
    let nested: Result<Vec<Vec<BoundReport>>, BoundError> = jobs.into_par_iter().map(f).collect();
    Ok(nested?.into_iter().flatten().collect())
}

fn run_concrete(suite: Suite, samples: usize, seed: u64) -> Result<Vec<SuiteRow>, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reports = match suite {
        Suite::Lemma31 => {
            let qs: Vec<_> = (0..samples)
                .map(|_| {
                    let n = rng.gen_range(1..=2);
                    random_query(&mut rng, n)
                })
                .collect();
            collect(qs, |q| Ok(vec![bounds::lemma31_report(&q)?]))?
        }
        Suite::Lemma32 => {
            let qs: Vec<_> = (0..samples)
                .map(|_| {
                    let n = rng.gen_range(1..=6);
                    random_query(&mut rng, n)
                })
                .collect();
            collect(qs, |q| Ok(vec![bounds::lemma32_report(&q)]))?
        }
        Suite::Lemma41 => {
            let jobs: Vec<(Cuboid, Vec<f64>)> = (0..samples)
                .map(|_| {
                    let c = random_cuboid(&mut rng);
                    let ls = (0..LAMBDAS_PER_BOX).map(|_| log_uniform(&mut rng, 1.0, LAMBDA_MAX)).collect();
                    (c, ls)
                })
                .collect();
            collect(jobs, |(c, ls)| ls.iter().map(|&l| bounds::lemma41_report(&c, l)).collect())?
        }
        Suite::Identity => {
            let jobs: Vec<(Cuboid, f64)> = (0..samples)
                .map(|_| (random_cuboid(&mut rng), rng.gen_range(0.0..=LAMBDA_MAX)))
                .collect();
            collect(jobs, |(c, l)| Ok(vec![bounds::identity_report(&c, l)?]))?
        }
        Suite::CubeChain => collect((1..=samples as u64).collect(), bounds::cube_chain_reports)?,
        Suite::Polya => {
            let jobs: Vec<(Cuboid, u64)> = (0..samples)
                .map(|_| (random_cuboid(&mut rng), rng.gen_range(1..=POLYA_K_MAX)))
                .collect();
            collect(jobs, |(c, k)| {
                let lambda = spectrum::kth_eigenvalue_value(&c, k)?;
                Ok(vec![bounds::polya_report(&c, k, lambda)])
            })?
        }
        Suite::All => unreachable!("expanded by run_suite"),
    };
    Ok(rows(suite, reports))
}

/// Runs `suite` on `samples` seeded draws. `All` runs every concrete suite
/// with the same sample count, each on its own seed stream.
///
/// The cube chain is not random: it checks every rank `1..=samples`.
pub fn run_suite(suite: Suite, samples: usize, seed: u64) -> Result<Vec<SuiteRow>, VerifyError> {
    if samples == 0 {
        return Err(VerifyError::NoSamples);
    }
    match suite {
        Suite::All => {
            let mut out = Vec::new();
            for (i, s) in Suite::CONCRETE.into_iter().enumerate() {
                out.extend(run_concrete(s, samples, seed.wrapping_add(i as u64))?);
            }
            Ok(out)
        }
        s => run_concrete(s, samples, seed),
    }
}

/// Empirical remainder constants over `samples` seeded `(box, lambda)` draws
/// with `lambda` up to [`LAMBDA_MAX`].
pub fn calibrate_remainders(samples: usize, seed: u64) -> Result<RemainderEstimate, VerifyError> {
    if samples == 0 {
        return Err(VerifyError::NoSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Cuboid, f64)> = (0..samples)
        .map(|_| (random_cuboid(&mut rng), log_uniform(&mut rng, 10.0, LAMBDA_MAX)))
        .collect();
    Ok(bounds::estimate_remainder_constants(&pairs, RemainderExponents::default())?)
}
