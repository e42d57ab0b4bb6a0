use rayon::prelude::*;

use crate::config::{Axis, RunConfig};
use crate::output::{Cell, Table};
use crate::point::{run_point, PointRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub x: Option<Axis>,
    pub y: Option<Axis>,
    /// Row-major in `y` then `x`: entry `iy * nx + ix`.
    pub records: Vec<PointRecord>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.is_ok()).count()
    }

    fn x_values(&self) -> Vec<f64> {
        self.x.map_or(vec![f64::NAN], |a| a.values())
    }

    fn y_values(&self) -> Vec<f64> {
        self.y.map_or(vec![f64::NAN], |a| a.values())
    }

    pub fn nx(&self) -> usize {
        self.x.map_or(1, |a| a.steps)
    }

    pub fn ny(&self) -> usize {
        self.y.map_or(1, |a| a.steps)
    }

    /// `C_∞[iy][ix]`.
    pub fn concurrence_grid(&self) -> Vec<Vec<f64>> {
        self.records.chunks(self.nx()).map(|row| row.iter().map(|r| r.concurrence).collect()).collect()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new([
            "eps0", "A", "xi", "J", "C_inf", "P0", "P1", "P2", "P3", "gamma_12", "gamma_02", "gamma_23", "min_gap",
            "near_resonance", "tracking_fallback", "error",
        ]);
        for r in &self.records {
            let mut row: Vec<Cell> = vec![r.eps0.into(), r.amplitude.into(), r.xi.into(), r.coupling.into(), r.concurrence.into()];
            row.extend(r.populations.iter().map(|&p| Cell::Num(p)));
            row.extend([
                r.gamma_12.into(),
                r.gamma_02.into(),
                r.gamma_23.into(),
                r.min_gap.into(),
                r.near_resonance.into(),
                r.tracking_fallback.into(),
                Cell::Text(r.error.clone().unwrap_or_default()),
            ]);
            t.push(row);
        }
        t
    }
}

/// Evaluates every grid point on a pool of `workers` threads. The output order
/// is the grid order regardless of scheduling.
pub fn sweep(cfg: &RunConfig, workers: usize) -> SweepResult {
    let result = SweepResult {
        x: cfg.x,
        y: cfg.y,
        records: Vec::new(),
    };
    let (xs, ys) = (result.x_values(), result.y_values());
    let points: Vec<RunConfig> = ys
        .iter()
        .flat_map(|&y| {
            xs.iter().map(move |&x| {
                let mut c = cfg.clone();
                if let Some(a) = cfg.x {
                    c = c.with(a.name, x);
                }
                if let Some(a) = cfg.y {
                    c = c.with(a.name, y);
                }
                c
            })
        })
        .collect();
    let records = match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(|| points.par_iter().map(run_point).collect()),
        Err(_) => points.iter().map(run_point).collect(),
    };
    SweepResult { records, ..result }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AxisName;

    #[test]
    fn grid_order_and_coordinates() {
        let mut cfg = RunConfig::default();
        cfg.x = Some(Axis {
            name: AxisName::Xi,
            min: 0.0,
            max: 1.0,
            steps: 2,
        });
        cfg.y = Some(Axis {
            name: AxisName::Amplitude,
            min: 0.0,
            max: 0.5,
            steps: 2,
        });
        let res = sweep(&cfg, 2);
        let coords: Vec<(f64, f64)> = res.records.iter().map(|r| (r.xi, r.amplitude)).collect();
        assert_eq!(coords, vec![(0.0, 0.0), (1.0, 0.0), (0.0, 0.5), (1.0, 0.5)]);
        assert_eq!(res.failures(), 0);
        assert_eq!(res.concurrence_grid().len(), 2);
    }

    #[test]
    fn zero_axes_is_a_single_point() {
        let mut cfg = RunConfig::default();
        cfg.drive.amplitude = 0.5;
        let res = sweep(&cfg, 1);
        assert_eq!(res.records, vec![run_point(&cfg)]);
    }
}
