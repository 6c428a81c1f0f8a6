use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::placement::{EndpointVector, PlacementPlan};

/// Redundancy scheme for one file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum Scheme {
    /// `r` full copies.
    Replication { r: usize },
    /// `k` data chunks, `m` chunks in total.
    Erasure { k: usize, m: usize },
}

impl Scheme {
    pub fn replication(r: usize) -> Result<Self, AnalysisError> {
        let s = Scheme::Replication { r };
        s.validate()?;
        Ok(s)
    }

    pub fn erasure(k: usize, m: usize) -> Result<Self, AnalysisError> {
        let s = Scheme::Erasure { k, m };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        match *self {
            Scheme::Replication { r } if r == 0 => Err(AnalysisError::InvalidScheme("replication factor must be at least 1".into())),
            Scheme::Erasure { k, m } if k == 0 || m < k => {
                Err(AnalysisError::InvalidScheme(format!("erasure scheme needs 1 <= k <= m, got k={k} m={m}")))
            }
            _ => Ok(()),
        }
    }

    /// Endpoints needed to hold every chunk or replica on its own endpoint.
    pub fn pieces(&self) -> usize {
        match *self {
            Scheme::Replication { r } => r,
            Scheme::Erasure { m, .. } => m,
        }
    }

    /// Pieces that must survive.
    pub fn needed(&self) -> usize {
        match *self {
            Scheme::Replication { .. } => 1,
            Scheme::Erasure { k, .. } => k,
        }
    }

    /// Stored bytes per logical byte.
    pub fn storage_overhead(&self) -> f64 {
        match *self {
            Scheme::Replication { r } => r as f64,
            Scheme::Erasure { k, m } => m as f64 / k as f64,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Scheme::Replication { r } => write!(f, "rep{r}"),
            Scheme::Erasure { k, m } => write!(f, "ec{k}+{}", m - k),
        }
    }
}

/// Parses `rep2`, `ec10+5` (k plus coding chunks) and `ec10/15` (k of m).
impl FromStr for Scheme {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AnalysisError::InvalidScheme(format!("cannot parse scheme {s:?}; expected e.g. rep2, ec10+5 or ec10/15"));
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let s_trim = s.trim();
        if let Some(r) = s_trim.strip_prefix("rep") {
            return Scheme::replication(num(r)?);
        }
        let body = s_trim.strip_prefix("ec").ok_or_else(bad)?;
        if let Some((k, c)) = body.split_once('+') {
            let k = num(k)?;
            return Scheme::erasure(k, k + num(c)?);
        }
        if let Some((k, m)) = body.split_once('/') {
            return Scheme::erasure(num(k)?, num(m)?);
        }
        Err(bad())
    }
}

/// Availability of one file given independent per-endpoint availability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityModel {
    pub p: f64,
    pub scheme: Scheme,
    /// Endpoints on offer. When set, a scheme needing more distinct
    /// endpoints than this is rejected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoints: Option<usize>,
}

impl AvailabilityModel {
    pub fn new(p: f64, scheme: Scheme) -> Self {
        AvailabilityModel { p, scheme, endpoints: None }
    }

    pub fn with_endpoints(mut self, endpoints: usize) -> Self {
        self.endpoints = Some(endpoints);
        self
    }
}

fn check_probability(p: f64) -> Result<(), AnalysisError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(AnalysisError::InvalidProbability(p))
    }
}

/// P(at least `need` of `n` independent trials succeed), success probability `p`.
pub fn binomial_tail(n: usize, need: usize, p: f64) -> f64 {
    if need == 0 {
        return 1.0;
    }
    if need > n {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    let q = 1.0 - p;
    // Terms from j = n down so the coefficient can be built incrementally:
    // C(n, j-1) = C(n, j) * j / (n - j + 1).
    let mut coef = 1.0_f64;
    let mut total = 0.0;
    for j in (need..=n).rev() {
        total += coef * p.powi(j as i32) * q.powi((n - j) as i32);
        coef = coef * j as f64 / (n - j + 1) as f64;
    }
    total.min(1.0)
}

/// Probability the file can be read: at least one replica, or at least `k`
/// chunks, on endpoints that are up. Each piece is on its own endpoint.
pub fn file_availability(model: &AvailabilityModel) -> Result<f64, AnalysisError> {
    check_probability(model.p)?;
    model.scheme.validate()?;
    if let Some(s) = model.endpoints {
        if model.scheme.pieces() > s {
            return Err(AnalysisError::TooFewEndpoints {
                pieces: model.scheme.pieces(),
                endpoints: s,
            });
        }
    }
    Ok(match model.scheme {
        Scheme::Replication { r } => 1.0 - (1.0 - model.p).powi(r as i32),
        Scheme::Erasure { k, m } => binomial_tail(m, k, model.p),
    })
}

/// Availability when chunks are laid out by `plan` over `endpoints`, so
/// every chunk on a down endpoint is lost with it.
pub fn placement_availability(p: f64, k: usize, plan: &PlacementPlan, endpoints: &EndpointVector) -> Result<f64, AnalysisError> {
    check_probability(p)?;
    let m = plan.assignments.len();
    if k == 0 || k > m {
        return Err(AnalysisError::InvalidScheme(format!("need 1 <= k <= {m}, got k={k}")));
    }
    // dist[c] = P(exactly c chunks reachable) over the endpoints seen so far.
    let mut dist = vec![0.0_f64; m + 1];
    dist[0] = 1.0;
    for held in plan.counts(endpoints) {
        if held == 0 {
            continue;
        }
        let mut next = vec![0.0_f64; m + 1];
        for (c, &pr) in dist.iter().enumerate() {
            if pr == 0.0 {
                continue;
            }
            next[c] += pr * (1.0 - p);
            next[c + held] += pr * p;
        }
        dist = next;
    }
    Ok(dist[k..].iter().sum::<f64>().min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverheadRow {
    pub scheme: Scheme,
    pub label: String,
    pub overhead: f64,
    pub availability: f64,
    /// Endpoint losses the scheme always survives.
    pub tolerated_losses: usize,
}

/// One row per scheme, sorted by storage overhead then availability.
pub fn overhead_resilience_table(p: f64, schemes: &[Scheme]) -> Result<Vec<OverheadRow>, AnalysisError> {
    let mut rows = Vec::with_capacity(schemes.len());
    for &scheme in schemes {
        let availability = file_availability(&AvailabilityModel::new(p, scheme))?;
        rows.push(OverheadRow {
            scheme,
            label: scheme.to_string(),
            overhead: scheme.storage_overhead(),
            availability,
            tolerated_losses: scheme.pieces() - scheme.needed(),
        });
    }
    rows.sort_by(|a, b| {
        a.overhead
            .total_cmp(&b.overhead)
            .then(a.availability.total_cmp(&b.availability))
    });
    Ok(rows)
}

/// Replication 1 to 3 against a spread of erasure schemes.
pub fn default_schemes() -> Vec<Scheme> {
    let mut v = vec![
        Scheme::Replication { r: 1 },
        Scheme::Replication { r: 2 },
        Scheme::Replication { r: 3 },
    ];
    for (k, m) in [(4, 6), (6, 9), (10, 12), (10, 13), (10, 15), (10, 20), (4, 8)] {
        v.push(Scheme::Erasure { k, m });
    }
    v
}
