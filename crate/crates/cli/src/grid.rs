//! Grid descriptions: a number, a sorted comma list, `lo:hi:count` with
//! linear spacing, or `log:lo:hi:count` with logarithmic spacing.

use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

fn number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    s.parse::<f64>().map_err(|_| format!("'{s}' is not a number"))
}

fn count(s: &str) -> Result<usize, String> {
    let c = number(s)?;
    if c < 1.0 || c.fract() != 0.0 || c > 1e7 {
        return Err(format!("grid count must be a whole number in [1, 1e7], got '{}'", s.trim()));
    }
    Ok(c as usize)
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (log, body) = match s.trim().strip_prefix("log:") {
            Some(rest) => (true, rest),
            None => (false, s.trim()),
        };
        let parts: Vec<&str> = body.split(':').collect();
        let values = match parts.as_slice() {
            [lo, hi, n] => {
                let (lo, hi, n) = (number(lo)?, number(hi)?, count(n)?);
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(format!("grid ends must be finite in '{s}'"));
                }
                if log && !(lo > 0.0 && hi > 0.0) {
                    return Err(format!("logarithmic grid needs positive ends in '{s}'"));
                }
                if n == 1 && lo != hi {
                    return Err(format!("a one-point grid needs lo = hi in '{s}'"));
                }
                let step = |i: usize| i as f64 / (n - 1).max(1) as f64;
                (0..n)
                    .map(|i| {
                        if i == 0 {
                            lo
                        } else if i + 1 == n {
                            hi
                        } else if log {
                            10f64.powf(lo.log10() + (hi.log10() - lo.log10()) * step(i))
                        } else {
                            lo + (hi - lo) * step(i)
                        }
                    })
                    .collect()
            }
            [list] if !log => list.split(',').map(number).collect::<Result<Vec<_>, _>>()?,
            _ => return Err(format!("expected a number, a list 'a,b,..', 'lo:hi:count' or 'log:lo:hi:count', got '{s}'")),
        };
        if values.iter().any(|v| v.is_nan()) {
            return Err(format!("grid '{s}' contains NaN"));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(format!("grid '{s}' is not sorted"));
        }
        Ok(Grid(values))
    }
}

/// `lo,hi` with `-1 <= lo <= hi <= 1`.
pub fn band(s: &str) -> Result<(f64, f64), String> {
    match s.split(',').collect::<Vec<_>>().as_slice() {
        [lo, hi] => Ok((number(lo)?, number(hi)?)),
        _ => Err(format!("expected a band 'lo,hi', got '{s}'")),
    }
}

/// A path count such as `1e6` or `250000`.
pub fn whole(s: &str) -> Result<u64, String> {
    let v = number(s)?;
    if v.is_nan() || v < 1.0 || v.fract() != 0.0 || v > 9.0e15 {
        return Err(format!("expected a whole number >= 1, got '{s}'"));
    }
    Ok(v as u64)
}
