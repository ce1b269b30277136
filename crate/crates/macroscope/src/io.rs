//! Wigner dataset CSV: header `time_us,X,P,value`, one row per pixel per snapshot.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::inference::WignerDataset;
use crate::wigner::{OscillatorState, WignerGrid};

pub const DATASET_HEADER: &str = "time_us,X,P,value";

/// Renders a dataset with 9 significant digits. The state goes in a leading comment.
pub fn dataset_to_csv(ds: &WignerDataset) -> String {
    let mut out = format!("# state={}\n{DATASET_HEADER}\n", ds.state_label.label());
    for g in &ds.snapshots {
        let t = g.time * 1e6;
        for (ip, &p) in g.ps.iter().enumerate() {
            for (ix, &x) in g.xs.iter().enumerate() {
                out.push_str(&format!("{t:.8e},{x:.8e},{p:.8e},{:.8e}\n", g.at(ix, ip)));
            }
        }
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Sorted distinct values, checked for uniform spacing and replaced by an exact lattice.
fn axis(values: &[f64], name: &str, t_us: f64, first_line: usize) -> Result<Vec<f64>> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    if v.len() < 2 {
        return Err(parse_err(first_line, format!("snapshot t={t_us} us has fewer than two {name} values")));
    }
    let n = v.len();
    let (lo, hi) = (v[0], v[n - 1]);
    let d = (hi - lo) / (n - 1) as f64;
    for (i, w) in v.windows(2).enumerate() {
        if ((w[1] - w[0]) - d).abs() > 1e-6 * d {
            return Err(parse_err(
                first_line,
                format!("non-uniform {name} spacing in snapshot t={t_us} us between {} and {} (index {i})", w[0], w[1]),
            ));
        }
    }
    Ok((0..n).map(|i| if i == n - 1 { hi } else { lo + d * i as f64 }).collect())
}

/// Parses the dataset CSV. `state` overrides the file's `# state=` comment; fock1 if neither.
pub fn dataset_from_csv(text: &str, state: Option<OscillatorState>) -> Result<WignerDataset> {
    let mut file_state = None;
    let mut header_seen = false;
    // time key (exact text) -> (time, first line, rows of (line, x, p, value))
    let mut snaps: BTreeMap<u64, (f64, usize, Vec<(usize, f64, f64, f64)>)> = BTreeMap::new();
    let mut order: Vec<u64> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(c) = l.strip_prefix('#') {
            if let Some(s) = c.trim().strip_prefix("state=") {
                file_state = Some(OscillatorState::parse(s.trim()).map_err(|e| parse_err(line, e.to_string()))?);
            }
            continue;
        }
        if !header_seen {
            let cols: Vec<String> = l.split(',').map(|c| c.trim().to_string()).collect();
            if cols != ["time_us", "X", "P", "value"] {
                return Err(parse_err(line, format!("expected header `{DATASET_HEADER}`")));
            }
            header_seen = true;
            continue;
        }
        let f: Vec<&str> = l.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(parse_err(line, format!("expected 4 columns, found {}", f.len())));
        }
        let mut nums = [0.0; 4];
        for (k, s) in f.iter().enumerate() {
            nums[k] = s.parse::<f64>().map_err(|_| parse_err(line, format!("cannot parse `{s}` as a number")))?;
            if !nums[k].is_finite() {
                return Err(parse_err(line, format!("non-finite value `{s}`")));
            }
        }
        let t = nums[0] * 1e-6;
        let key = nums[0].to_bits();
        let entry = snaps.entry(key).or_insert_with(|| {
            order.push(key);
            (t, line, Vec::new())
        });
        entry.2.push((line, nums[1], nums[2], nums[3]));
    }
    if !header_seen {
        return Err(parse_err(1, format!("missing header `{DATASET_HEADER}`")));
    }
    if snaps.is_empty() {
        return Err(parse_err(1, "no data rows"));
    }
    let mut grids: Vec<WignerGrid> = Vec::new();
    for key in &order {
        let (t, first, rows) = &snaps[key];
        let t_us = t * 1e6;
        let xs = axis(&rows.iter().map(|r| r.1).collect::<Vec<_>>(), "X", t_us, *first)?;
        let ps = axis(&rows.iter().map(|r| r.2).collect::<Vec<_>>(), "P", t_us, *first)?;
        let (nx, np) = (xs.len(), ps.len());
        let index = |v: f64, ax: &[f64]| -> usize {
            let d = (ax[ax.len() - 1] - ax[0]) / (ax.len() - 1) as f64;
            ((v - ax[0]) / d).round() as usize
        };
        let mut values = vec![f64::NAN; nx * np];
        let mut seen = vec![0usize; nx * np];
        for &(line, x, p, v) in rows {
            let k = index(p, &ps) * nx + index(x, &xs);
            if seen[k] != 0 {
                return Err(parse_err(line, format!("duplicate pixel (t={t_us} us, X={x}, P={p}), first on line {}", seen[k])));
            }
            seen[k] = line;
            values[k] = v;
        }
        if let Some(k) = seen.iter().position(|&s| s == 0) {
            return Err(parse_err(
                *first,
                format!(
                    "ragged grid: snapshot t={t_us} us is missing pixel X={}, P={} ({} of {} present)",
                    xs[k % nx],
                    ps[k / nx],
                    rows.len(),
                    nx * np
                ),
            ));
        }
        if let Some(prev) = grids.last() {
            if !(prev.xs == xs && prev.ps == ps) {
                return Err(parse_err(*first, format!("snapshot t={t_us} us uses a different grid layout")));
            }
        }
        grids.push(WignerGrid::new(xs, ps, values, *t)?);
    }
    let state = state.or(file_state).unwrap_or(OscillatorState::FockOne);
    WignerDataset::new(grids, state)
}

/// Writes via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn save_dataset(ds: &WignerDataset, path: &Path) -> Result<()> {
    write_atomic(path, dataset_to_csv(ds).as_bytes())
}

pub fn load_dataset(path: &Path, state: Option<OscillatorState>) -> Result<WignerDataset> {
    dataset_from_csv(&fs::read_to_string(path)?, state)
}
