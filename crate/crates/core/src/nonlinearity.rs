//! The local nonlinearity `f` of the Kirchhoff model and its hypothesis checks.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Which of `f`, `F = ∫₀^s f` or `f′` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Value,
    Primitive,
    Derivative,
}

#[derive(Clone)]
enum Family {
    Power { q: f64 },
    Custom {
        name: String,
        f: Arc<ScalarFn>,
        primitive: Arc<ScalarFn>,
        derivative: Arc<ScalarFn>,
    },
}

#[derive(Clone)]
pub struct Nonlinearity {
    family: Family,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Power { q } => write!(fm, "Nonlinearity::Power {{ q: {q} }}"),
            Family::Custom { name, .. } => write!(fm, "Nonlinearity::Custom({name})"),
        }
    }
}

/// Upper end `2* − 1` of the admissible power range in dimension `N` (infinite for N ≤ 2).
pub fn critical_exponent(dimension: usize) -> f64 {
    if dimension <= 2 {
        f64::INFINITY
    } else {
        let n = dimension as f64;
        (n + 2.0) / (n - 2.0)
    }
}

impl Nonlinearity {
    /// `f(s) = |s|^{q-1} s` with `3 < q < 2* − 1`.
    pub fn power(q: f64, dimension: usize) -> Result<Self> {
        let upper = critical_exponent(dimension);
        if !(q > 3.0 && q < upper) {
            return Err(Error::InvalidParameter {
                name: "nonlinearity.q".into(),
                reason: format!(
                    "superquartic subcritical growth requires 3 < q < 2*-1 = {upper} for N = {dimension}, got q = {q}"
                ),
            });
        }
        Ok(Self::power_unchecked(q))
    }

    /// Power family without the admissibility check; for exercising the validators.
    pub fn power_unchecked(q: f64) -> Self {
        Self {
            family: Family::Power { q },
        }
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        primitive: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            family: Family::Custom {
                name: name.into(),
                f: Arc::new(f),
                primitive: Arc::new(primitive),
                derivative: Arc::new(derivative),
            },
        }
    }

    /// Exponent of the power family, `None` for a custom triple.
    pub fn power_exponent(&self) -> Option<f64> {
        match self.family {
            Family::Power { q } => Some(q),
            Family::Custom { .. } => None,
        }
    }

    pub fn f(&self, s: f64) -> f64 {
        match &self.family {
            Family::Power { q } => s.abs().powf(q - 1.0) * s,
            Family::Custom { f, .. } => f(s),
        }
    }

    #[allow(non_snake_case)]
    pub fn F(&self, s: f64) -> f64 {
        match &self.family {
            Family::Power { q } => s.abs().powf(q + 1.0) / (q + 1.0),
            Family::Custom { primitive, .. } => primitive(s),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match &self.family {
            Family::Power { q } => {
                if s == 0.0 {
                    0.0
                } else {
                    q * s.abs().powf(q - 1.0)
                }
            }
            Family::Custom { derivative, .. } => derivative(s),
        }
    }

    pub fn evaluate(&self, s: f64, order: Order) -> f64 {
        match order {
            Order::Value => self.f(s),
            Order::Primitive => self.F(s),
            Order::Derivative => self.derivative(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    /// A limit condition that the samples agree with but cannot certify.
    Consistent,
    Fail,
}

impl CheckStatus {
    pub fn ok(self) -> bool {
        self != CheckStatus::Fail
    }
}

#[derive(Debug, Clone)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub status: CheckStatus,
    /// Sample with the largest violation (or the smallest margin when passing).
    pub worst_sample: Option<f64>,
    pub worst_margin: f64,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.status.ok())
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const REL_TOL: f64 = 1e-12;

/// Pointwise margin check `margin(s) ≥ -tol·scale(s)` over the samples.
fn pointwise(
    name: &'static str,
    samples: &[f64],
    margin: impl Fn(f64) -> (f64, f64),
) -> ConditionCheck {
    let mut worst: Option<(f64, f64)> = None;
    let mut failed = false;
    for &s in samples {
        let (m, scale) = margin(s);
        if m < -REL_TOL * scale.max(f64::MIN_POSITIVE) {
            failed = true;
        }
        let rel = m / scale.max(f64::MIN_POSITIVE);
        if worst.is_none_or(|(_, w)| rel < w) {
            worst = Some((s, rel));
        }
    }
    ConditionCheck {
        name,
        status: if failed { CheckStatus::Fail } else { CheckStatus::Pass },
        worst_sample: worst.map(|w| w.0),
        worst_margin: worst.map_or(0.0, |w| w.1),
    }
}

/// Validate the growth conditions and `¼ f(s)s ≥ F(s) ≥ 0` along samples.
pub fn validate_conditions(nl: &Nonlinearity, sample_points: &[f64]) -> ValidationReport {
    let mut samples: Vec<f64> = sample_points.iter().copied().filter(|s| *s != 0.0 && s.is_finite()).collect();
    samples.sort_by(|a, b| a.total_cmp(b));
    samples.dedup();

    let mut checks = Vec::new();

    // Tested as (f'(s)s - 3f(s))·s ≥ 0: for odd f the bare expression is negative on s < 0,
    // and every use multiplies it by s.
    checks.push(pointwise("(f'(s)s - 3f(s))s >= 0", &samples, |s| {
        let a = nl.derivative(s) * s;
        let b = 3.0 * nl.f(s);
        ((a - b) * s.signum(), a.abs() + b.abs())
    }));

    checks.push(pointwise("f(s)s/4 >= F(s) >= 0", &samples, |s| {
        let big_f = nl.F(s);
        let quarter = nl.f(s) * s / 4.0;
        ((quarter - big_f).min(big_f), quarter.abs() + big_f.abs())
    }));

    // f(s)/|s|^3 nondecreasing on R \ {0}, along the sorted samples.
    let ratio = |s: f64| nl.f(s) / s.abs().powi(3);
    let mut monotone = ConditionCheck {
        name: "f(s)/|s|^3 nondecreasing",
        status: CheckStatus::Pass,
        worst_sample: None,
        worst_margin: f64::INFINITY,
    };
    for w in samples.windows(2) {
        let (r0, r1) = (ratio(w[0]), ratio(w[1]));
        let rise = r1 - r0;
        let rel = rise / (r0.abs() + r1.abs()).max(f64::MIN_POSITIVE);
        if rel < monotone.worst_margin {
            monotone.worst_margin = rel;
            monotone.worst_sample = Some(w[1]);
        }
        if rel < -REL_TOL {
            monotone.status = CheckStatus::Fail;
        }
    }
    checks.push(monotone);

    // |f(s)|/|s|^3 decreases toward 0 as |s| → 0.
    let mut small: Vec<f64> = samples.iter().copied().filter(|s| s.abs() <= 1.0).collect();
    small.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let small_ratios: Vec<f64> = small.iter().map(|&s| ratio(s).abs()).collect();
    let vanishing_ok = small_ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + REL_TOL))
        && small_ratios.last().is_some_and(|last| {
            *last == 0.0 || *last < small_ratios[0]
        });
    checks.push(ConditionCheck {
        name: "f(s)/|s|^3 -> 0 as s -> 0",
        status: if vanishing_ok { CheckStatus::Consistent } else { CheckStatus::Fail },
        worst_sample: small.last().copied(),
        worst_margin: small_ratios.last().copied().unwrap_or(f64::NAN),
    });

    // F(s)/s^4 grows without bound as |s| → ∞; checked as strict growth on the large-|s| half.
    let mut large: Vec<f64> = samples.iter().copied().filter(|s| s.abs() >= 1.0).collect();
    large.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let grow = |sign: f64| -> bool {
        let vals: Vec<f64> = large
            .iter()
            .filter(|s| s.signum() == sign)
            .map(|&s| nl.F(s) / s.powi(4))
            .collect();
        vals.len() < 2 || vals.windows(2).all(|w| w[1] > w[0])
    };
    let unbounded_ok = !large.is_empty() && grow(1.0) && grow(-1.0);
    checks.push(ConditionCheck {
        name: "F(s)/s^4 -> +inf as |s| -> inf",
        status: if unbounded_ok { CheckStatus::Consistent } else { CheckStatus::Fail },
        worst_sample: large.last().copied(),
        worst_margin: large.last().map_or(f64::NAN, |&s| nl.F(s) / s.powi(4)),
    });

    ValidationReport { checks }
}

/// Samples `±10^k` for `k = lo..=hi`.
pub fn log_samples(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi)
        .flat_map(|k| {
            let s = 10f64.powi(k);
            [s, -s]
        })
        .collect()
}
