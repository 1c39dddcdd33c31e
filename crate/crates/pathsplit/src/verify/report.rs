use serde::{Deserialize, Serialize};

/// Outcome of one check. `value` is compared against `threshold` in the
/// direction stated by `statistic`; statistical checks also carry a p-value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: String,
    pub value: f64,
    pub threshold: f64,
    pub p_value: Option<f64>,
    pub pass: bool,
    pub skipped: bool,
    pub seed: Option<u64>,
    pub sample_sizes: Vec<usize>,
    pub detail: String,
}

impl TestReport {
    /// `value ≤ threshold` passes.
    pub fn at_most(name: impl Into<String>, statistic: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic: statistic.into(),
            value,
            threshold,
            p_value: None,
            pass: value <= threshold,
            skipped: false,
            seed: None,
            sample_sizes: Vec::new(),
            detail: String::new(),
        }
    }

    /// `value ≥ threshold` passes.
    pub fn at_least(name: impl Into<String>, statistic: impl Into<String>, value: f64, threshold: f64) -> Self {
        let mut r = Self::at_most(name, statistic, value, threshold);
        r.pass = value >= threshold;
        r
    }

    pub fn skipped(name: impl Into<String>, detail: impl Into<String>) -> Self {
        let mut r = Self::at_most(name, "not applicable", 0.0, 0.0);
        r.skipped = true;
        r.detail = detail.into();
        r
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_sizes(mut self, sizes: Vec<usize>) -> Self {
        self.sample_sizes = sizes;
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// Fold an extra condition into `pass`.
    pub fn require(mut self, ok: bool, why: &str) -> Self {
        if !ok {
            self.pass = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(why);
        }
        self
    }

    pub fn line(&self) -> String {
        let verdict = if self.skipped {
            "SKIP"
        } else if self.pass {
            "PASS"
        } else {
            "FAIL"
        };
        let mut s = format!("{verdict} {}: {} = {:.6e} (threshold {:.6e})", self.name, self.statistic, self.value, self.threshold);
        if let Some(p) = self.p_value {
            s.push_str(&format!(", p = {p:.4e}"));
        }
        if !self.detail.is_empty() {
            s.push_str(&format!(" [{}]", self.detail));
        }
        s
    }
}

/// True when every non-skipped report passed.
pub fn all_pass(reports: &[TestReport]) -> bool {
    reports.iter().all(|r| r.skipped || r.pass)
}
