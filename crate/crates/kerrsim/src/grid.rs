use crate::error::{Error, Result};

/// Uniform time grid on [t_start, t_end] with n_points samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        if !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::NonFinite { field: "time grid" });
        }
        if t_end <= t_start {
            return Err(Error::Validation(format!(
                "grid t_end ({t_end}) must exceed t_start ({t_start})"
            )));
        }
        if n_points < 2 {
            return Err(Error::Validation(format!(
                "grid needs at least 2 points (got {n_points})"
            )));
        }
        Ok(TimeGrid {
            t_start,
            t_end,
            n_points,
        })
    }

    pub fn spacing(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_points - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_start + self.spacing() * i as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.time(i))
    }
}

/// Observable samples on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    pub grid: TimeGrid,
    pub values: Vec<T>,
}

impl<T> TimeSeries<T> {
    pub fn new(grid: TimeGrid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::Dimension(format!(
                "time series has {} values for a {}-point grid",
                values.len(),
                grid.n_points
            )));
        }
        Ok(TimeSeries { grid, values })
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &T)> + '_ {
        self.values.iter().enumerate().map(|(i, v)| (self.grid.time(i), v))
    }
}

impl TimeSeries<f64> {
    /// Trapezoid integral over the full grid span.
    pub fn trapezoid(&self) -> f64 {
        let h = self.grid.spacing();
        let n = self.values.len();
        let inner: f64 = self.values[1..n - 1].iter().sum();
        h * (inner + 0.5 * (self.values[0] + self.values[n - 1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_times() {
        let g = TimeGrid::new(0.0, 10.0, 11).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.time(3), 3.0);
        assert_eq!(g.times().count(), 11);
    }

    #[test]
    fn degenerate_grids_rejected() {
        assert!(TimeGrid::new(1.0, 1.0, 10).is_err());
        assert!(TimeGrid::new(0.0, -1.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn length_mismatch_rejected() {
        let g = TimeGrid::new(0.0, 1.0, 5).unwrap();
        assert!(TimeSeries::new(g, vec![0.0; 4]).is_err());
        assert!(TimeSeries::new(g, vec![0.0; 5]).is_ok());
    }

    #[test]
    fn trapezoid_linear_exact() {
        let g = TimeGrid::new(0.0, 2.0, 21).unwrap();
        let ts = TimeSeries::new(g, g.times().map(|t| 3.0 * t).collect()).unwrap();
        assert!((ts.trapezoid() - 6.0).abs() < 1e-12);
    }
}
