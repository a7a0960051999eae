//! Wall-clock timing of the split and LOO routines.

use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;

use crate::dataio::Column;
use crate::error::{invalid, Error, Result};
use crate::loo::{loo_score, LooConfig};
use crate::rng::rng_from_seed;
use crate::splits::{best_split, ImpurityKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchCase {
    NumClassLoo,
    NumRegLoo,
    CatClassLoo,
    CatRegLoo,
    /// One CART split search over a numeric and a categorical column.
    CartSplit,
}

impl BenchCase {
    pub const ALL: [BenchCase; 5] = [
        BenchCase::NumClassLoo,
        BenchCase::NumRegLoo,
        BenchCase::CatClassLoo,
        BenchCase::CatRegLoo,
        BenchCase::CartSplit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BenchCase::NumClassLoo => "num-class-loo",
            BenchCase::NumRegLoo => "num-reg-loo",
            BenchCase::CatClassLoo => "cat-class-loo",
            BenchCase::CatRegLoo => "cat-reg-loo",
            BenchCase::CartSplit => "cart-split",
        }
    }
}

impl std::fmt::Display for BenchCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BenchCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BenchCase::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown bench case '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub case: BenchCase,
    pub n: usize,
    pub k: usize,
    pub median_seconds: f64,
}

pub const BENCH_RUNS: usize = 5;
/// Fast cases are repeated within a run until it lasts about this long.
const MIN_RUN_SECONDS: f64 = 0.1;

struct Instance {
    x: Vec<f64>,
    codes: Vec<u32>,
    binary: Vec<f64>,
    real: Vec<f64>,
}

fn instance(n: usize, k: usize, seed: u64) -> Instance {
    let mut rng = rng_from_seed(seed);
    let x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let codes: Vec<u32> = (0..n).map(|_| rng.random_range(0..k as u32)).collect();
    let binary = x.iter().map(|&v| (rng.random::<f64>() < v) as u8 as f64).collect();
    let real = x.iter().map(|&v| v + rng.random::<f64>()).collect();
    Instance { x, codes, binary, real }
}

fn run_case(case: BenchCase, d: &Instance, k: usize) -> Result<()> {
    let num = Column::Numeric(&d.x);
    let cat = Column::Categorical {
        codes: &d.codes,
        n_categories: k,
    };
    let gini = LooConfig::new(ImpurityKind::Gini, 1);
    let sse = LooConfig::new(ImpurityKind::SquaredError, 1);
    match case {
        BenchCase::NumClassLoo => {
            black_box(loo_score(num, &d.binary, &gini)?);
        }
        BenchCase::NumRegLoo => {
            black_box(loo_score(num, &d.real, &sse)?);
        }
        BenchCase::CatClassLoo => {
            black_box(loo_score(cat, &d.binary, &gini)?);
        }
        BenchCase::CatRegLoo => {
            black_box(loo_score(cat, &d.real, &sse)?);
        }
        BenchCase::CartSplit => {
            black_box(best_split(num, &d.real, ImpurityKind::SquaredError, 1)?);
            black_box(best_split(cat, &d.real, ImpurityKind::SquaredError, 1)?);
        }
    }
    Ok(())
}

/// Median of [`BENCH_RUNS`] per-call timings per case and grid point.
pub fn run_bench(cases: &[BenchCase], ns: &[usize], ks: &[usize], seed: u64) -> Result<Vec<BenchRow>> {
    if cases.is_empty() || ns.is_empty() || ks.is_empty() {
        return invalid("bench grids must be nonempty");
    }
    if ns.iter().any(|&n| n < 2) || ks.iter().any(|&k| k < 2) {
        return invalid("bench needs n ≥ 2 and K ≥ 2");
    }
    let mut rows = Vec::new();
    for &case in cases {
        for &k in ks {
            let instances: Vec<Instance> = ns.iter().map(|&n| instance(n, k, seed)).collect();
            let calls = instances
                .iter()
                .map(|d| {
                    let t = Instant::now();
                    run_case(case, d, k)?;
                    Ok(((MIN_RUN_SECONDS / t.elapsed().as_secs_f64().max(1e-9)).ceil() as usize).clamp(1, 10_000))
                })
                .collect::<Result<Vec<usize>>>()?;
            // grid points are interleaved within each run so drift hits all alike
            let mut times = vec![Vec::with_capacity(BENCH_RUNS); ns.len()];
            for _ in 0..BENCH_RUNS {
                for (p, d) in instances.iter().enumerate() {
                    let t = Instant::now();
                    for _ in 0..calls[p] {
                        run_case(case, d, k)?;
                    }
                    times[p].push(t.elapsed().as_secs_f64() / calls[p] as f64);
                }
            }
            for (p, mut t) in times.into_iter().enumerate() {
                t.sort_by(f64::total_cmp);
                rows.push(BenchRow {
                    case,
                    n: ns[p],
                    k,
                    median_seconds: t[BENCH_RUNS / 2],
                });
            }
        }
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("case,n,K,median_seconds\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.case.as_str(), r.n, r.k, r.median_seconds));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_names_round_trip() {
        for c in BenchCase::ALL {
            assert_eq!(c.as_str().parse::<BenchCase>().unwrap(), c);
        }
        assert!("nope".parse::<BenchCase>().is_err());
    }

    #[test]
    fn small_grid_csv() {
        let rows = run_bench(&BenchCase::ALL, &[50, 100], &[4], 1).unwrap();
        assert_eq!(rows.len(), 10);
        let csv = bench_csv(&rows);
        assert!(csv.starts_with("case,n,K,median_seconds\nnum-class-loo,50,4,"));
        assert!(rows.iter().all(|r| r.median_seconds >= 0.0));
    }
}
