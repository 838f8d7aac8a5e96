//! Parameter sweeps at fixed length and distance.
//!
//! For each family every integer `(m, r, u, Δ)` meeting the length and
//! distance constraints is enumerated and scored with [`crate::metrics`]:
//!
//! ```text
//!   LCCR:       Δ = u − 1,  u + 2Δ = d_min,  m(r + u − 1 + Δ) = n
//!   baselines:  u + Δ = d_min,              m(r + u − 1) + Δ = n
//! ```

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::{code_length, d_min_formula, Family, MetricsRow, Rational, Shape};
use crate::par;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub n: usize,
    pub d_min: usize,
    pub families: Vec<Family>,
    pub min_m: usize,
    pub min_r: usize,
    pub min_u: usize,
    pub min_delta: usize,
    /// Keep only tuples with `Δ ≥ r`.
    pub require_group_repairable: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            n: 120,
            d_min: 16,
            families: Family::ALL.to_vec(),
            min_m: 3,
            min_r: 2,
            min_u: 3,
            min_delta: 1,
            require_group_repairable: false,
        }
    }
}

impl SweepSpec {
    fn admits(&self, s: &Shape) -> bool {
        s.m >= self.min_m
            && s.r >= self.min_r
            && s.u >= self.min_u
            && s.delta >= self.min_delta
            && (!self.require_group_repairable || s.delta >= s.r)
    }
}

/// All admissible tuples for `family`, sorted by `(m, r, u, Δ)`.
pub fn enumerate_params(spec: &SweepSpec, family: Family) -> Vec<Shape> {
    let mut out = Vec::new();
    for u in 2..=spec.d_min {
        let delta = match family {
            Family::Lccr => {
                if u + 2 * (u - 1) != spec.d_min {
                    continue;
                }
                u - 1
            }
            Family::MsrLocal | Family::MbrLocal => spec.d_min - u,
        };
        // length per group (LCCR) or of the local parts (baselines)
        let (budget, extra) = match family {
            Family::Lccr => (spec.n, delta),
            Family::MsrLocal | Family::MbrLocal => match spec.n.checked_sub(delta) {
                Some(b) => (b, 0),
                None => continue,
            },
        };
        for m in 1..=budget {
            if budget % m != 0 {
                continue;
            }
            let width = budget / m;
            let Some(r) = width.checked_sub(u - 1 + extra) else {
                continue;
            };
            let s = Shape::new(m, r, u, delta);
            if r >= 1 && spec.admits(&s) {
                debug_assert_eq!(code_length(family, s), spec.n);
                debug_assert_eq!(d_min_formula(family, s), spec.d_min);
                out.push(s);
            }
        }
    }
    out.sort();
    out
}

/// One row per tuple per family, ordered by family then tuple.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<MetricsRow>> {
    let mut families = spec.families.clone();
    families.sort();
    families.dedup();
    let jobs: Vec<(Family, Shape)> = families
        .iter()
        .flat_map(|&f| enumerate_params(spec, f).into_iter().map(move |s| (f, s)))
        .collect();
    par::map(&jobs, |&(f, s)| MetricsRow::compute(f, s))
        .into_iter()
        .collect()
}

pub const CSV_HEADER: &str = "family,m,r,u,delta,n,d_min,storage_overhead,node_locality,node_bw_overhead,group_locality,group_bw_overhead,group_repairable";

/// Decimal rendering with six significant digits, trailing zeros kept.
pub fn format_sig6(v: Rational) -> String {
    let x = *v.numer() as f64 / *v.denom() as f64;
    if x == 0.0 {
        return "0.00000".to_string();
    }
    let digits = |exp: i32| format!("{:.*}", (5 - exp).max(0) as usize, x);
    let exp = x.abs().log10().floor() as i32;
    let s = digits(exp);
    // rounding can carry into a new leading digit (9.999996 → 10.00000)
    let sig = s.chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
    if sig > 6 && exp < 5 {
        digits(exp + 1)
    } else {
        s
    }
}

pub fn write_csv(rows: &[MetricsRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.family,
            r.m,
            r.r,
            r.u,
            r.delta,
            r.n,
            r.d_min,
            format_sig6(r.storage_overhead),
            format_sig6(r.node_locality),
            format_sig6(r.node_bw_overhead),
            r.group_locality,
            format_sig6(r.group_bw_overhead),
            r.group_repairable
        )?;
    }
    Ok(())
}

pub fn emit_csv(rows: &[MetricsRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_csv(rows, &mut w)?;
    w.flush()?;
    Ok(())
}
