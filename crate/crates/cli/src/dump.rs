//! `dump`: function values on a 2-D grid or along a segment.

use std::fmt::Write as _;

use quasar_core::{Oracle, Point64};

use crate::bench::real;
use crate::config::Settings;
use crate::error::{usage, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum DumpMode {
    /// `[lo1, hi1] x [lo2, hi2]`, header `x1,x2,value`, `x1` outer.
    Surface { lo: [f64; 2], hi: [f64; 2] },
    /// `F(t p + (1 - t) q)` for `t` in `[0, 1]`, header `t,value`.
    Segment { p: Point64, q: Point64 },
}

impl DumpMode {
    /// `segment=p1,..,pd;q1,..,qd` takes precedence over
    /// `bounds=lo,hi` (both axes) or `bounds=lo1,hi1,lo2,hi2`.
    pub fn from_settings(s: &Settings) -> Result<Self> {
        if let Some(seg) = s.get("segment") {
            let Some((p, q)) = seg.split_once(';') else {
                return usage("segment must look like `p1,p2;q1,q2`");
            };
            let parse = |t: &str| -> Result<Point64> {
                t.split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .or_else(|e| usage(format!("bad coordinate `{v}`: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Point64::new)
            };
            return Ok(DumpMode::Segment {
                p: parse(p)?,
                q: parse(q)?,
            });
        }
        let b = s.reals("bounds")?.unwrap_or_else(|| vec![-1.0, 1.0]);
        let (lo, hi) = match b.as_slice() {
            [lo, hi] => ([*lo, *lo], [*hi, *hi]),
            [l1, h1, l2, h2] => ([*l1, *l2], [*h1, *h2]),
            _ => return usage("bounds takes 2 or 4 numbers"),
        };
        if !(lo[0] <= hi[0] && lo[1] <= hi[1]) {
            return usage("bounds must have lo <= hi");
        }
        Ok(DumpMode::Surface { lo, hi })
    }
}

/// `resolution` equally spaced nodes on `[lo, hi]`, endpoints included;
/// one node is the midpoint.
fn nodes(lo: f64, hi: f64, resolution: usize) -> Vec<f64> {
    if resolution == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..resolution)
        .map(|i| lo + (hi - lo) * i as f64 / (resolution - 1) as f64)
        .collect()
}

pub fn grid_dump(oracle: &dyn Oracle<f64>, mode: &DumpMode, resolution: usize) -> Result<String> {
    if resolution == 0 {
        return usage("resolution must be at least 1");
    }
    let mut s = String::new();
    match mode {
        DumpMode::Surface { lo, hi } => {
            if oracle.dim() != 2 {
                return usage(format!("surface mode needs a 2-D function, got dim {}", oracle.dim()));
            }
            s.push_str("x1,x2,value\n");
            for x1 in nodes(lo[0], hi[0], resolution) {
                for x2 in nodes(lo[1], hi[1], resolution) {
                    let v = oracle.value(&Point64::new(vec![x1, x2]));
                    let _ = writeln!(s, "{},{},{}", real(x1), real(x2), real(v));
                }
            }
        }
        DumpMode::Segment { p, q } => {
            if p.dim() != oracle.dim() || q.dim() != oracle.dim() {
                return usage(format!(
                    "segment endpoints need {} coordinates, got {} and {}",
                    oracle.dim(),
                    p.dim(),
                    q.dim()
                ));
            }
            s.push_str("t,value\n");
            for t in nodes(0.0, 1.0, resolution) {
                let x = Point64::lincomb(t, p, 1.0 - t, q);
                let _ = writeln!(s, "{},{}", real(t), real(oracle.value(&x)));
            }
        }
    }
    Ok(s)
}
