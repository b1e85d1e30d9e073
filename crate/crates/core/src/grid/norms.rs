use super::Field;
use crate::error::{Error, Result};

fn trapezoid(f: &Field, g: impl Fn(f64) -> f64) -> f64 {
    let v = f.values();
    let n = v.len();
    let inner: f64 = v[1..n - 1].iter().map(|&x| g(x)).sum();
    f.grid().dx() * (inner + 0.5 * (g(v[0]) + g(v[n - 1])))
}

/// Composite trapezoidal `(∫ f² dx)^{1/2}`.
pub fn l2_space(f: &Field) -> f64 {
    trapezoid(f, |x| x * x).sqrt()
}

/// Composite trapezoidal `∫ f dx`.
pub fn mass(f: &Field) -> f64 {
    trapezoid(f, |x| x)
}

/// Streaming form of [`l2_spacetime`]: snapshots are pushed in time order
/// and only the running sum is kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeNorm {
    total: f64,
    last: Option<(f64, f64)>,
    count: usize,
}

impl Default for SpaceTimeNorm {
    fn default() -> Self {
        Self::new()
    }
}

impl SpaceTimeNorm {
    pub fn new() -> Self {
        Self {
            total: 0.0,
            last: None,
            count: 0,
        }
    }

    pub fn push(&mut self, t: f64, f: &Field) -> Result<()> {
        match self.last {
            None if t.abs() > 1e-9 * t.abs().max(1.0) => {
                return Err(Error::Mismatch(format!("series starts at t = {t}, not 0")));
            }
            Some((prev, _)) if t <= prev => {
                return Err(Error::Mismatch(format!("times not increasing at index {}", self.count)));
            }
            Some((prev, sq)) => self.total += sq * (t - prev),
            None => {}
        }
        let norm = l2_space(f);
        self.last = Some((t, norm * norm));
        self.count += 1;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Closes the last interval at `t_end` and returns the norm.
    pub fn finish(&self, t_end: f64) -> Result<f64> {
        if self.count < 2 {
            return Err(Error::Mismatch(format!(
                "space-time norm needs at least two snapshots, got {}",
                self.count
            )));
        }
        let (last, sq) = self.last.expect("non-empty");
        if last > t_end + 1e-9 * t_end.abs().max(1.0) {
            return Err(Error::Mismatch(format!("snapshot at t = {last} beyond t_end = {t_end}")));
        }
        Ok((self.total + sq * (t_end - last).max(0.0)).sqrt())
    }
}

/// `(∫₀^T ‖f(t)‖² dt)^{1/2}` by the left rectangle rule; the last snapshot
/// is held until `t_end`.
///
/// The series must hold at least two snapshots, start at `t = 0`, be strictly
/// increasing in time, and not extend beyond `t_end`.
pub fn l2_spacetime(series: &[(f64, Field)], t_end: f64) -> Result<f64> {
    let mut acc = SpaceTimeNorm::new();
    for (t, f) in series {
        acc.push(*t, f)?;
    }
    acc.finish(t_end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    fn domain() -> Grid1D {
        Grid1D::with_spacing(-15.0, 15.0, 0.05).unwrap()
    }

    #[test]
    fn space_norms() {
        assert_eq!(l2_space(&Field::constant(domain(), 0.0)), 0.0);
        assert!((l2_space(&Field::constant(domain(), 1.0)) - 30f64.sqrt()).abs() < 1e-12);
        let g = Grid1D::new(0.0, 1.0, 10001).unwrap();
        let f = Field::from_fn(g, |x| x);
        assert!((l2_space(&f) - (1.0f64 / 3.0).sqrt()).abs() < 1e-6);
        assert!((mass(&f) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn spacetime_norms() {
        let one = Field::constant(domain(), 1.0);
        let series = vec![(0.0, one.clone()), (1.0, one.clone()), (2.0, one.clone())];
        assert!((l2_spacetime(&series, 2.0).unwrap() - 60f64.sqrt()).abs() < 1e-10);
        let short = vec![(0.0, one.clone()), (1.0, one.clone())];
        assert!((l2_spacetime(&short, 2.0).unwrap() - 60f64.sqrt()).abs() < 1e-10);
        let zero = Field::constant(domain(), 0.0);
        assert_eq!(l2_spacetime(&[(0.0, zero.clone()), (1.0, zero)], 1.0).unwrap(), 0.0);
    }

    #[test]
    fn spacetime_rejections() {
        let one = Field::constant(domain(), 1.0);
        assert!(l2_spacetime(&[(0.0, one.clone())], 1.0).is_err());
        assert!(l2_spacetime(&[], 1.0).is_err());
        assert!(l2_spacetime(&[(0.5, one.clone()), (1.0, one.clone())], 1.0).is_err());
        assert!(l2_spacetime(&[(0.0, one.clone()), (3.0, one.clone())], 1.0).is_err());
        assert!(l2_spacetime(&[(0.0, one.clone()), (0.0, one.clone()), (1.0, one)], 1.0).is_err());
    }

    #[test]
    fn streaming_matches_batch() {
        let g = domain();
        let series: Vec<_> = (0..7).map(|k| (0.3 * k as f64, Field::from_fn(g, |x| (x + k as f64).sin()))).collect();
        let mut acc = SpaceTimeNorm::new();
        for (t, f) in &series {
            acc.push(*t, f).unwrap();
        }
        assert_eq!(acc.finish(2.0).unwrap(), l2_spacetime(&series, 2.0).unwrap());
    }
}
