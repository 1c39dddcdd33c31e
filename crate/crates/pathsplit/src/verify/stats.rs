//! Chi-square tests over discrete outcomes (paths, levels, ...).

use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::report::TestReport;
use crate::error::{RunError, RunResult};

/// Bins whose expected count falls below this are pooled.
pub const MIN_EXPECTED: f64 = 5.0;

pub type Counts<K> = BTreeMap<K, u64>;

pub fn count<K: Ord + Clone, I: IntoIterator<Item = K>>(items: I) -> Counts<K> {
    let mut c = Counts::new();
    for k in items {
        *c.entry(k).or_insert(0) += 1;
    }
    c
}

/// What the sample is compared against.
pub enum Reference<'a, K> {
    Law(&'a BTreeMap<K, f64>),
    Sample(&'a Counts<K>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chi2 {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub bins: usize,
}

fn p_value(statistic: f64, df: usize) -> RunResult<f64> {
    if !statistic.is_finite() {
        return Ok(0.0);
    }
    let dist = ChiSquared::new(df as f64).map_err(|e| RunError::Config(format!("chi-square with {df} degrees of freedom: {e}")))?;
    Ok(dist.sf(statistic))
}

/// Goodness of fit of `counts` to `law`. Any observation outside the
/// support of `law` makes the statistic infinite.
pub fn chi2_against_law<K: Ord>(counts: &Counts<K>, law: &BTreeMap<K, f64>) -> RunResult<Chi2> {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(RunError::Config("chi-square needs at least one observation".into()));
    }
    let n = total as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (k, p) in law {
        let expected = n * p;
        let observed = counts.get(k).copied().unwrap_or(0) as f64;
        if expected < MIN_EXPECTED {
            pooled.0 += observed;
            pooled.1 += expected;
        } else {
            bins.push((observed, expected));
        }
    }
    let impossible = counts.keys().any(|k| !law.contains_key(k));
    let mut chi = finish(bins, pooled)?;
    if impossible {
        chi.statistic = f64::INFINITY;
        chi.p_value = 0.0;
    }
    Ok(chi)
}

fn finish(mut bins: Vec<(f64, f64)>, pooled: (f64, f64)) -> RunResult<Chi2> {
    if pooled.0 > 0.0 || pooled.1 > 0.0 {
        if pooled.1 < MIN_EXPECTED && !bins.is_empty() {
            // fold an undersized pool into the smallest regular bin
            let (i, _) = bins
                .iter()
                .enumerate()
                .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
                .expect("non-empty");
            bins[i].0 += pooled.0;
            bins[i].1 += pooled.1;
        } else {
            bins.push(pooled);
        }
    }
    if bins.len() < 2 {
        return Err(RunError::Config(format!(
            "degenerate binning: {} bin(s) with expected count ≥ {MIN_EXPECTED}",
            bins.len()
        )));
    }
    let mut statistic = 0.0;
    for (o, e) in &bins {
        if *e > 0.0 {
            statistic += (o - e) * (o - e) / e;
        } else if *o > 0.0 {
            statistic = f64::INFINITY;
        }
    }
    let df = bins.len() - 1;
    Ok(Chi2 {
        statistic,
        df,
        p_value: p_value(statistic, df)?,
        bins: bins.len(),
    })
}

/// Homogeneity of two samples (a 2×K contingency table).
pub fn chi2_two_sample<K: Ord + Clone>(a: &Counts<K>, b: &Counts<K>) -> RunResult<Chi2> {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    if na == 0 || nb == 0 {
        return Err(RunError::Config("chi-square needs observations in both samples".into()));
    }
    let (na, nb) = (na as f64, nb as f64);
    let keys: std::collections::BTreeSet<&K> = a.keys().chain(b.keys()).collect();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for k in keys {
        let oa = a.get(k).copied().unwrap_or(0) as f64;
        let ob = b.get(k).copied().unwrap_or(0) as f64;
        let smaller = (oa + ob) * na.min(nb) / (na + nb);
        if smaller < MIN_EXPECTED {
            pooled.0 += oa;
            pooled.1 += ob;
        } else {
            cells.push((oa, ob));
        }
    }
    if pooled.0 + pooled.1 > 0.0 {
        let smaller = (pooled.0 + pooled.1) * na.min(nb) / (na + nb);
        if smaller < MIN_EXPECTED && !cells.is_empty() {
            let (i, _) = cells
                .iter()
                .enumerate()
                .min_by(|x, y| (x.1 .0 + x.1 .1).total_cmp(&(y.1 .0 + y.1 .1)))
                .expect("non-empty");
            cells[i].0 += pooled.0;
            cells[i].1 += pooled.1;
        } else {
            cells.push(pooled);
        }
    }
    if cells.len() < 2 {
        return Err(RunError::Config(format!(
            "degenerate binning: {} bin(s) with expected count ≥ {MIN_EXPECTED}",
            cells.len()
        )));
    }
    let total = na + nb;
    let mut statistic = 0.0;
    for (oa, ob) in &cells {
        let col = oa + ob;
        let ea = col * na / total;
        let eb = col * nb / total;
        statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    let df = cells.len() - 1;
    Ok(Chi2 {
        statistic,
        df,
        p_value: p_value(statistic, df)?,
        bins: cells.len(),
    })
}

/// Chi-square test of `sample` against an exact law or a second sample;
/// passes when the p-value exceeds `alpha`.
pub fn two_sample_chi2<K: Ord + Clone>(name: &str, sample: &Counts<K>, reference: Reference<'_, K>, alpha: f64) -> RunResult<TestReport> {
    let (chi, sizes) = match reference {
        Reference::Law(law) => (chi2_against_law(sample, law)?, vec![sample.values().sum::<u64>() as usize]),
        Reference::Sample(other) => (
            chi2_two_sample(sample, other)?,
            vec![sample.values().sum::<u64>() as usize, other.values().sum::<u64>() as usize],
        ),
    };
    let mut report = TestReport::at_least(name, "chi-square p-value", chi.p_value, alpha)
        .with_sizes(sizes)
        .with_detail(format!("statistic {:.4}, df {}, bins {}", chi.statistic, chi.df, chi.bins));
    report.p_value = Some(chi.p_value);
    Ok(report)
}
