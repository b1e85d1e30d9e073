use crate::error::{Error, Result};
use crate::grid::Field;

/// Rightmost point where `p` crosses `level`, by linear interpolation
/// between adjacent grid points.
pub fn rightmost_crossing(p: &Field, level: f64) -> Option<f64> {
    let v = p.values();
    let grid = p.grid();
    (0..v.len() - 1).rev().find_map(|i| {
        let (a, b) = (v[i], v[i + 1]);
        if (a >= level) == (b >= level) {
            return None;
        }
        let frac = (level - a) / (b - a);
        Some(grid.x(i) + frac * grid.dx())
    })
}

fn in_window(t: f64, window: (f64, f64)) -> bool {
    let tol = 1e-9 * window.1.abs().max(1.0);
    t >= window.0 - tol && t <= window.1 + tol
}

/// Front positions `(t, x)` of the snapshots inside `window`. Each crossing
/// must exist and stay at least `2 dx` away from both boundaries.
pub fn front_positions(series: &[(f64, Field)], level: f64, window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (index, (t, p)) in series.iter().enumerate() {
        if !in_window(*t, window) {
            continue;
        }
        let fail = |reason: String| Error::WaveSpeed {
            index,
            time: *t,
            reason,
        };
        let x = rightmost_crossing(p, level).ok_or_else(|| fail(format!("no crossing of level {level}")))?;
        let grid = p.grid();
        let margin = 2.0 * grid.dx();
        if x - grid.xmin() < margin || grid.xmax() - x < margin {
            return Err(fail(format!("front at x = {x} within 2 dx of the boundary")));
        }
        out.push((*t, x));
    }
    Ok(out)
}

/// Least-squares slope of the front position against time over `window`.
pub fn estimate_wave_speed(series: &[(f64, Field)], level: f64, window: (f64, f64)) -> Result<f64> {
    if !(window.1 > window.0) {
        return Err(Error::Domain(format!("empty window [{}, {}]", window.0, window.1)));
    }
    let pts = front_positions(series, level, window)?;
    if pts.len() < 2 {
        return Err(Error::WaveSpeed {
            index: 0,
            time: window.0,
            reason: format!("{} snapshots inside the window, need at least 2", pts.len()),
        });
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let xm = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, x) in &pts {
        sxy += (t - tm) * (x - xm);
        sxx += (t - tm) * (t - tm);
    }
    Ok(sxy / sxx)
}

/// Largest deviation of `p` at either domain endpoint from its value in
/// `initial`, over the snapshots inside `window`.
pub fn endpoint_drift(initial: &Field, series: &[(f64, Field)], window: (f64, f64)) -> f64 {
    let v0 = initial.values();
    let last = v0.len() - 1;
    series
        .iter()
        .filter(|(t, _)| in_window(*t, window))
        .map(|(_, p)| {
            let v = p.values();
            (v[0] - v0[0]).abs().max((v[last] - v0[last]).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    fn grid() -> Grid1D {
        Grid1D::with_spacing(-15.0, 15.0, 0.05).unwrap()
    }

    fn translating(c: f64, w: f64) -> Vec<(f64, Field)> {
        (0..=20)
            .map(|k| {
                let t = k as f64;
                (t, Field::from_fn(grid(), |x| 1.0 / (1.0 + ((x - c * t) / w).exp())))
            })
            .collect()
    }

    #[test]
    fn synthetic_translating_front() {
        let s = translating(0.37, 0.8);
        let speed = estimate_wave_speed(&s, 0.5, (0.0, 20.0)).unwrap();
        assert!((speed - 0.37).abs() < 1e-3, "{speed}");
        let sharp = translating(0.37, 0.3);
        assert!(endpoint_drift(&sharp[0].1, &sharp, (0.0, 20.0)) < 1e-6);
        assert!(endpoint_drift(&s[0].1, &s, (0.0, 20.0)) > 1e-6);
    }

    #[test]
    fn stationary_front() {
        let s = translating(0.0, 0.8);
        let speed = estimate_wave_speed(&s, 0.5, (0.0, 20.0)).unwrap();
        assert!(speed.abs() < 1e-12, "{speed}");
    }

    #[test]
    fn window_selects_snapshots() {
        let s = translating(0.37, 0.8);
        let pts = front_positions(&s, 0.5, (5.0, 10.0)).unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0].0, 5.0);
    }

    #[test]
    fn missing_or_boundary_front_names_snapshot() {
        let mut s = translating(0.37, 0.8);
        s[3].1 = Field::constant(grid(), 0.1);
        match estimate_wave_speed(&s, 0.5, (0.0, 20.0)) {
            Err(Error::WaveSpeed { index: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        let near = vec![
            (0.0, Field::from_fn(grid(), |x| if x < 14.96 { 1.0 } else { 0.0 })),
            (1.0, Field::from_fn(grid(), |x| if x < 14.96 { 1.0 } else { 0.0 })),
        ];
        assert!(matches!(
            estimate_wave_speed(&near, 0.5, (0.0, 1.0)),
            Err(Error::WaveSpeed { index: 0, .. })
        ));
    }
}
