//! Center lists as text: an optional `# d_min = <v>` line, then one
//! `x y z` voxel index per line.

use avtseg_core::centerline::CenterSet;

#[derive(Debug, thiserror::Error)]
#[error("centers line {line}: {reason}")]
pub struct CentersError {
    pub line: usize,
    pub reason: String,
}

pub fn format_centers(set: &CenterSet) -> String {
    let mut out = format!("# d_min = {}\n", set.d_min);
    for [x, y, z] in &set.points {
        out.push_str(&format!("{x} {y} {z}\n"));
    }
    out
}

pub fn parse_centers(text: &str) -> Result<CenterSet, CentersError> {
    let mut set = CenterSet {
        points: Vec::new(),
        d_min: 0.0,
    };
    for (n, line) in text.lines().enumerate() {
        let err = |reason: &str| CentersError {
            line: n + 1,
            reason: reason.into(),
        };
        let line = line.trim();
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("d_min") {
                let v = v.trim_start().strip_prefix('=').ok_or_else(|| err("malformed d_min"))?;
                set.d_min = v.trim().parse().map_err(|_| err("malformed d_min"))?;
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let coords: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err("expected three non-negative integers")))
            .collect::<Result<_, _>>()?;
        let [x, y, z] = coords[..] else {
            return Err(err("expected three non-negative integers"));
        };
        set.points.push([x, y, z]);
    }
    Ok(set)
}
