//! Offset lists and sweep ranges from the command line.

use std::fs;
use std::path::Path;

use crate::Failure;

/// Magnitude standing in for zero at the ends of a signed log range.
pub const LOG_FLOOR: f64 = 1e-16;

/// Parses `--offsets`: `logrange lo:hi:n`, an existing file of numbers
/// separated by commas or newlines (`#` starts a comment), or an inline
/// comma-separated list. The result is sorted ascending.
pub fn parse_offsets(spec: &str) -> Result<Vec<f64>, Failure> {
    let spec = spec.trim();
    let mut values = if let Some(range) = spec.strip_prefix("logrange") {
        logrange(range.trim())?
    } else if !spec.is_empty() && Path::new(spec).is_file() {
        let text = fs::read_to_string(spec).map_err(|e| Failure::Usage(format!("cannot read {spec}: {e}")))?;
        let body: Vec<&str> = text.lines().map(|l| l.split('#').next().unwrap_or("")).collect();
        number_list(&body.join(","))?
    } else {
        number_list(spec)?
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn number_list(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(Failure::Usage(format!("not a finite number: {s:?}"))),
        })
        .collect()
}

fn triple(text: &str) -> Result<(&str, &str, usize), Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(Failure::Usage(format!("expected lo:hi:n, got {text:?}")));
    };
    let n = n
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("point count must be a nonnegative integer, got {n:?}")))?;
    Ok((lo.trim(), hi.trim(), n))
}

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi / lo).ln() / (n - 1) as f64;
            (0..n)
                .map(|i| if i + 1 == n { hi } else { lo * (step * i as f64).exp() })
                .collect()
        }
    }
}

/// `n` log-spaced offsets from `lo` to `hi`. A range that crosses zero is
/// split at `±LOG_FLOOR`, points shared between the two sides in
/// proportion to the decades each spans.
fn logrange(text: &str) -> Result<Vec<f64>, Failure> {
    let (lo, hi, n) = triple(text)?;
    let parse = |s: &str| match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Failure::Usage(format!("not a finite number: {s:?}"))),
    };
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo >= hi {
        return Err(Failure::Usage(format!("logrange needs lo < hi, got {lo}:{hi}")));
    }
    if lo >= 0.0 || hi <= 0.0 {
        // one-signed range; a zero end is replaced by the floor
        let sign = if hi <= 0.0 { -1.0 } else { 1.0 };
        let (a, b) = if sign > 0.0 {
            (lo.max(LOG_FLOOR), hi)
        } else {
            (-hi.min(-LOG_FLOOR), -lo)
        };
        if a >= b {
            return Err(Failure::Usage(format!("logrange {lo}:{hi} lies inside ±{LOG_FLOOR:e}")));
        }
        let mut v: Vec<f64> = geometric(a, b, n).into_iter().map(|x| sign * x).collect();
        v.sort_by(f64::total_cmp);
        return Ok(v);
    }
    let neg_decades = (-lo / LOG_FLOOR).log10().max(0.0);
    let pos_decades = (hi / LOG_FLOOR).log10().max(0.0);
    let n_neg = ((n as f64) * neg_decades / (neg_decades + pos_decades)).round() as usize;
    let n_neg = n_neg.min(n);
    let mut v: Vec<f64> = geometric(LOG_FLOOR, -lo, n_neg).into_iter().map(|x| -x).collect();
    v.extend(geometric(LOG_FLOOR, hi, n - n_neg));
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `Qlo:Qhi:n` as up to `n` distinct, geometrically spaced paddings.
pub fn parse_padding_sweep(spec: &str) -> Result<Vec<usize>, Failure> {
    let (lo, hi, n) = triple(spec)?;
    let parse = |s: &str| {
        s.parse::<usize>()
            .ok()
            .filter(|&q| q >= 1)
            .ok_or_else(|| Failure::Usage(format!("padding must be a positive integer, got {s:?}")))
    };
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo > hi {
        return Err(Failure::Usage(format!("eig-sweep needs Qlo ≤ Qhi, got {lo}:{hi}")));
    }
    let mut qs: Vec<usize> = geometric(lo as f64, hi as f64, n)
        .into_iter()
        .map(|q| q.round() as usize)
        .collect();
    qs.dedup();
    Ok(qs)
}
