//! Dimension estimates for finitely described compact sets and finite
//! measures: box counting, separation counts, convex rate profiles, Lq
//! spectra and explicit measure constructions.

pub mod error;
pub mod exact;
pub mod geometry;

pub use error::{Error, Result};
pub mod counting;
pub mod separation;
pub mod lp;
pub mod convexdim;
pub mod measures;

/// Parses `a/b`, `b^-n` or a decimal number.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("cannot parse number '{s}'"));
    if let Some((a, b)) = s.split_once('/') {
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        if b == 0.0 {
            return Err(bad());
        }
        return Ok(a / b);
    }
    if let Some((b, e)) = s.split_once('^') {
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        let e: i32 = e.trim().parse().map_err(|_| bad())?;
        return Ok(b.powi(e));
    }
    let v: f64 = s.parse().map_err(|_| bad())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}
pub mod constructors;
