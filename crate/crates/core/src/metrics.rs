//! Closed-form storage, locality and bandwidth models, as exact rationals.
//!
//! Formulas are the published ones, evaluated as written. Where the
//! simulator measures something different (group-repair bandwidth in
//! particular) both numbers are reported side by side by the harness.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn int(n: usize) -> Rational {
    Rational::from_integer(n as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "LCCR")]
    Lccr,
    #[serde(rename = "MSR_LOCAL")]
    MsrLocal,
    #[serde(rename = "MBR_LOCAL")]
    MbrLocal,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Lccr, Family::MsrLocal, Family::MbrLocal];

    pub fn name(self) -> &'static str {
        match self {
            Family::Lccr => "LCCR",
            Family::MsrLocal => "MSR_LOCAL",
            Family::MbrLocal => "MBR_LOCAL",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "lccr" => Ok(Family::Lccr),
            "msr_local" | "msr" => Ok(Family::MsrLocal),
            "mbr_local" | "mbr" => Ok(Family::MbrLocal),
            other => Err(Error::Domain(format!("unknown code family `{other}`"))),
        }
    }
}

/// Per-node storage and repair bandwidth at one end of the tradeoff curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TradeoffPoint {
    pub per_node_storage: Rational,
    pub repair_bandwidth: Rational,
}

fn check_mkd(m: i64, k: i64, d: i64) -> Result<()> {
    if m <= 0 || k <= 0 || k > d {
        return Err(Error::Domain(format!("need M > 0 and 0 < k <= d (M={m}, k={k}, d={d})")));
    }
    Ok(())
}

/// `(M/k, Md/(k(d−k+1)))`.
pub fn msr_point(m: i64, k: i64, d: i64) -> Result<TradeoffPoint> {
    check_mkd(m, k, d)?;
    Ok(TradeoffPoint {
        per_node_storage: q(m, k),
        repair_bandwidth: q(m * d, k * (d - k + 1)),
    })
}

/// Storage and bandwidth both `2Md/(2kd − k² + k)`.
pub fn mbr_point(m: i64, k: i64, d: i64) -> Result<TradeoffPoint> {
    check_mkd(m, k, d)?;
    let v = q(2 * m * d, 2 * k * d - k * k + k);
    Ok(TradeoffPoint {
        per_node_storage: v,
        repair_bandwidth: v,
    })
}

/// `(m, r, u, Δ)` for one code of a family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Shape {
    pub m: usize,
    pub r: usize,
    pub u: usize,
    pub delta: usize,
}

impl Shape {
    pub fn new(m: usize, r: usize, u: usize, delta: usize) -> Self {
        Shape { m, r, u, delta }
    }

    pub fn n_l(&self) -> usize {
        self.r + self.u - 1
    }

    fn check(&self) -> Result<()> {
        if self.m == 0 || self.r == 0 || self.u < 2 {
            return Err(Error::Domain(format!(
                "need m >= 1, r >= 1, u >= 2 (m={}, r={}, u={})",
                self.m, self.r, self.u
            )));
        }
        Ok(())
    }
}

/// `γ = 2(r+u−2)/(r+2u−3)`, the MBR-over-MSR storage factor.
pub fn gamma_factor(r: usize, u: usize) -> Result<Rational> {
    if r < 2 || u < 3 {
        return Err(Error::Domain(format!("gamma needs r >= 2 and u >= 3 (r={r}, u={u})")));
    }
    Ok(int(2 * (r + u - 2)) / int(r + 2 * u - 3))
}

pub fn code_length(family: Family, s: Shape) -> usize {
    match family {
        Family::Lccr => s.m * (s.n_l() + s.delta),
        Family::MsrLocal | Family::MbrLocal => s.m * s.n_l() + s.delta,
    }
}

pub fn d_min_formula(family: Family, s: Shape) -> usize {
    match family {
        Family::Lccr => s.u + 2 * s.delta,
        Family::MsrLocal | Family::MbrLocal => s.u + s.delta,
    }
}

pub fn storage_overhead(family: Family, s: Shape) -> Result<Rational> {
    s.check()?;
    let (nl, r, d, m) = (int(s.n_l()), int(s.r), int(s.delta), int(s.m));
    Ok(match family {
        Family::Lccr => (nl + d) / r,
        Family::MsrLocal => (nl + d / m) / r,
        Family::MbrLocal => {
            int(2) * (nl + d / m) * int(s.r + s.u - 2) / (r * int(s.r + 2 * s.u - 3))
        }
    })
}

pub fn node_locality(family: Family, s: Shape) -> Result<Rational> {
    s.check()?;
    let (nl, d) = (int(s.n_l()), int(s.delta));
    Ok(match family {
        Family::Lccr => ((nl - 1) * nl + int(2 * (s.u - 1)) * d) / (nl + d),
        Family::MsrLocal | Family::MbrLocal => {
            ((nl - 1) * nl + int(s.r) * d) / (nl + d / int(s.m))
        }
    })
}

pub fn node_bw_overhead(family: Family, s: Shape) -> Result<Rational> {
    s.check()?;
    let (nl, r, u1, d) = (int(s.n_l()), int(s.r), int(s.u - 1), int(s.delta));
    let msr_term = nl * nl * (nl - 1) / (r * r * u1);
    Ok(match family {
        Family::Lccr => msr_term + int(2) * u1 * u1 / r,
        Family::MsrLocal => msr_term + d,
        Family::MbrLocal => int(2) * nl * (nl - 1) / (r * int(s.r + 2 * s.u - 3)) + d,
    })
}

pub fn group_locality(family: Family, s: Shape) -> usize {
    match family {
        Family::Lccr => 3,
        Family::MsrLocal | Family::MbrLocal => s.m,
    }
}

pub fn group_bw_overhead(family: Family, s: Shape) -> Result<Rational> {
    s.check()?;
    let (r, d, m) = (int(s.r), int(s.delta), int(s.m));
    Ok(match family {
        Family::Lccr => int(5 * (s.u - 1)) / r,
        Family::MsrLocal => d / r + m + 1,
        Family::MbrLocal => {
            int(2) * d * int(s.r + s.u - 2) / (r * int(s.r + 2 * s.u - 3)) + m + 1
        }
    })
}

/// The closed-form single-group repair traffic for LCCR, `5(u−1)r`.
pub fn lccr_group_repair_symbols_model(u: usize, r: usize) -> usize {
    5 * (u - 1) * r
}

/// Inter-group symbols actually moved by one single-group repair chain:
/// four transfers of `Δ` parity blocks of `Γ` symbols each.
pub fn lccr_group_repair_symbols_traced(delta: usize, gamma: usize) -> usize {
    4 * delta * gamma
}

/// One point of a sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub family: Family,
    pub m: usize,
    pub r: usize,
    pub u: usize,
    pub delta: usize,
    pub n: usize,
    pub d_min: usize,
    pub storage_overhead: Rational,
    pub node_locality: Rational,
    pub node_bw_overhead: Rational,
    pub group_locality: usize,
    pub group_bw_overhead: Rational,
    /// `Δ ≥ r`: enough recoverable parity to rebuild a whole group.
    pub group_repairable: bool,
}

impl MetricsRow {
    pub fn compute(family: Family, s: Shape) -> Result<Self> {
        Ok(MetricsRow {
            family,
            m: s.m,
            r: s.r,
            u: s.u,
            delta: s.delta,
            n: code_length(family, s),
            d_min: d_min_formula(family, s),
            storage_overhead: storage_overhead(family, s)?,
            node_locality: node_locality(family, s)?,
            node_bw_overhead: node_bw_overhead(family, s)?,
            group_locality: group_locality(family, s),
            group_bw_overhead: group_bw_overhead(family, s)?,
            group_repairable: s.delta >= s.r,
        })
    }

    pub fn shape(&self) -> Shape {
        Shape::new(self.m, self.r, self.u, self.delta)
    }
}
