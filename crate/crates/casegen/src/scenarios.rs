use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use svd_core::{AggregationKind, ColumnMeta, SnapshotMatrix};

use crate::error::{CasegenError, Result};
use crate::lhs::lhs_sample;
use crate::msd::msd_solve;
use crate::rigid_body::{rigid_body_field, RigidBodyParams};
use crate::tanh_case::tanh_solution;

/// Seeded generator for a named consumer within this crate, so adding a
/// consumer never shifts the draws of another.
fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in name.as_bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(hash);
    rng
}

/// Trajectories of one or more state variables over a set of scenarios that
/// share one sample grid of the independent variable.
#[derive(Debug, Clone)]
pub struct ScenarioSet {
    /// Scenario inputs u, one vector per scenario.
    pub inputs: Vec<Vec<f64>>,
    /// Shared y samples (time instants for these cases).
    pub times: Vec<f64>,
    variables: Vec<(String, Vec<Vec<f64>>)>,
}

impl ScenarioSet {
    pub fn new(
        inputs: Vec<Vec<f64>>,
        times: Vec<f64>,
        variables: Vec<(String, Vec<Vec<f64>>)>,
    ) -> Result<Self> {
        for (name, per_scenario) in &variables {
            if per_scenario.len() != inputs.len() {
                return Err(CasegenError::InvalidData(format!(
                    "variable {name}: {} trajectories for {} scenarios",
                    per_scenario.len(),
                    inputs.len()
                )));
            }
            for traj in per_scenario {
                if traj.iter().any(|v| !v.is_finite()) {
                    return Err(CasegenError::InvalidData(format!(
                        "variable {name} has non-finite values"
                    )));
                }
            }
        }
        Ok(Self { inputs, times, variables })
    }

    pub fn variable_names(&self) -> Vec<&str> {
        self.variables.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn trajectories(&self, variable: &str) -> Option<&[Vec<f64>]> {
        self.variables
            .iter()
            .find(|(n, _)| n == variable)
            .map(|(_, v)| v.as_slice())
    }

    pub fn n_scenarios(&self) -> usize {
        self.inputs.len()
    }
}

/// Stack one variable's trajectories as the columns of a scenario-aggregated
/// snapshot matrix.
pub fn assemble_scenario_matrix(set: &ScenarioSet, variable: &str) -> Result<SnapshotMatrix> {
    let trajectories = set
        .trajectories(variable)
        .ok_or_else(|| CasegenError::InvalidData(format!("unknown variable '{variable}'")))?;
    let n = set.times.len();
    let m = trajectories.len();
    for (j, traj) in trajectories.iter().enumerate() {
        if traj.len() != n {
            return Err(CasegenError::GridRequired(format!(
                "scenario {j} has {} samples, grid has {n}",
                traj.len()
            )));
        }
    }
    let mut values = Array2::zeros((n, m));
    for (j, traj) in trajectories.iter().enumerate() {
        for (i, &v) in traj.iter().enumerate() {
            values[[i, j]] = v;
        }
    }
    let input_dim = set.inputs.first().map_or(0, Vec::len);
    let mut meta = Array2::zeros((m, input_dim));
    for (j, u) in set.inputs.iter().enumerate() {
        for (k, &v) in u.iter().enumerate() {
            meta[[j, k]] = v;
        }
    }
    Ok(SnapshotMatrix::new(
        values,
        AggregationKind::ScenarioAggregated,
        Array1::from_vec(set.times.clone()),
        ColumnMeta::Scenarios(meta),
    )?)
}

/// Stack spatial fields at successive times as the columns of a
/// time-aggregated snapshot matrix. Rows run row-major over (x, y): the row
/// for grid node (ix, iy) is `ix * ys.len() + iy`, and that flat index is the
/// stored row coordinate.
pub fn assemble_time_matrix(
    field: impl Fn(f64, f64, f64) -> f64,
    xs: &[f64],
    ys: &[f64],
    times: &[f64],
) -> Result<SnapshotMatrix> {
    let n = xs.len() * ys.len();
    let mut values = Array2::zeros((n, times.len()));
    for (jt, &t) in times.iter().enumerate() {
        for (ix, &x) in xs.iter().enumerate() {
            for (iy, &y) in ys.iter().enumerate() {
                values[[ix * ys.len() + iy, jt]] = field(x, y, t);
            }
        }
    }
    Ok(SnapshotMatrix::new(
        values,
        AggregationKind::TimeAggregated,
        Array1::from_iter((0..n).map(|i| i as f64)),
        ColumnMeta::Times(Array1::from_vec(times.to_vec())),
    )?)
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Mass-spring-damper case defaults: k = 3, c = 0.5, m = 1, one hundred
/// initial-condition pairs from (-4, 4)^2, five hundred instants on (0, 15).
#[derive(Debug, Clone)]
pub struct MsdCase {
    pub n_scenarios: usize,
    pub n_times: usize,
    pub t_end: f64,
    pub bounds: [(f64, f64); 2],
    pub k: f64,
    pub c: f64,
    pub m: f64,
    pub seed: u64,
}

impl Default for MsdCase {
    fn default() -> Self {
        Self {
            n_scenarios: 100,
            n_times: 500,
            t_end: 15.0,
            bounds: [(-4.0, 4.0), (-4.0, 4.0)],
            k: 3.0,
            c: 0.5,
            m: 1.0,
            seed: 0,
        }
    }
}

impl MsdCase {
    /// Generate trajectories for the scenario inputs drawn by LHS from the
    /// configured bounds ("train" and "test" draw from disjoint streams).
    pub fn generate(&self, stream_name: &str) -> Result<ScenarioSet> {
        let mut rng = stream(self.seed, stream_name);
        let inputs = lhs_sample(&self.bounds, self.n_scenarios, &mut rng)?;
        self.generate_for(inputs)
    }

    pub fn generate_for(&self, inputs: Vec<Vec<f64>>) -> Result<ScenarioSet> {
        let times = linspace(0.0, self.t_end, self.n_times);
        let mut xs = Vec::with_capacity(inputs.len());
        let mut vs = Vec::with_capacity(inputs.len());
        for u in &inputs {
            let (x, v) = msd_solve(u[0], u[1], self.k, self.c, self.m, &times)?;
            xs.push(x);
            vs.push(v);
        }
        ScenarioSet::new(inputs, times, vec![("x".into(), xs), ("v".into(), vs)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeSampling {
    /// Deterministic uniform grid (the default reading of "uniformly sample").
    UniformGrid,
    /// One shared draw of sorted uniform-random instants.
    RandomUniform,
}

/// Shifting-tanh case defaults: a = b = 1, x0 from (5, 10), five hundred
/// instants on (0, 15).
#[derive(Debug, Clone)]
pub struct TanhCase {
    pub n_scenarios: usize,
    pub n_times: usize,
    pub t_end: f64,
    pub x0_range: (f64, f64),
    pub a: f64,
    pub b: f64,
    pub sampling: TimeSampling,
    pub seed: u64,
}

impl Default for TanhCase {
    fn default() -> Self {
        Self {
            n_scenarios: 100,
            n_times: 500,
            t_end: 15.0,
            x0_range: (5.0, 10.0),
            a: 1.0,
            b: 1.0,
            sampling: TimeSampling::UniformGrid,
            seed: 0,
        }
    }
}

impl TanhCase {
    pub fn generate(&self, stream_name: &str) -> Result<ScenarioSet> {
        let mut rng = stream(self.seed, stream_name);
        let inputs = lhs_sample(&[self.x0_range], self.n_scenarios, &mut rng)?;
        self.generate_for(inputs)
    }

    pub fn generate_for(&self, inputs: Vec<Vec<f64>>) -> Result<ScenarioSet> {
        let times = match self.sampling {
            TimeSampling::UniformGrid => linspace(0.0, self.t_end, self.n_times),
            TimeSampling::RandomUniform => {
                let mut rng = stream(self.seed, "times");
                let mut t: Vec<f64> =
                    (0..self.n_times).map(|_| rng.random_range(0.0..self.t_end)).collect();
                t.sort_by(|a, b| a.partial_cmp(b).unwrap());
                t
            }
        };
        let values = inputs
            .iter()
            .map(|u| times.iter().map(|&t| tanh_solution(u[0], t, self.a, self.b)).collect())
            .collect();
        ScenarioSet::new(inputs, times, vec![("x".into(), values)])
    }
}

/// Point cloud for the rigid-body case: rows of (x, y, t) with field values.
#[derive(Debug, Clone)]
pub struct PointCloud {
    /// One row per sample: x, y, t.
    pub coords: Array2<f64>,
    pub values: Array1<f64>,
}

/// Rigid-body case at desk scale: a 100 x 100 x 100 snapshot grid over
/// (-15, 15)^2 and 200,000 random training points inside (-10, 10)^2.
#[derive(Debug, Clone)]
pub struct RigidBodyCase {
    pub params: RigidBodyParams,
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub grid_nt: usize,
    pub domain: (f64, f64),
    pub n_points: usize,
    pub train_domain: (f64, f64),
    pub seed: u64,
}

impl Default for RigidBodyCase {
    fn default() -> Self {
        Self {
            params: RigidBodyParams::default(),
            grid_nx: 100,
            grid_ny: 100,
            grid_nt: 100,
            domain: (-15.0, 15.0),
            n_points: 200_000,
            train_domain: (-10.0, 10.0),
            seed: 0,
        }
    }
}

impl RigidBodyCase {
    /// Time-aggregated snapshot matrix on the full-domain grid.
    pub fn snapshot_matrix(&self) -> Result<SnapshotMatrix> {
        let xs = linspace(self.domain.0, self.domain.1, self.grid_nx);
        let ys = linspace(self.domain.0, self.domain.1, self.grid_ny);
        let times = linspace(0.0, self.params.t_end, self.grid_nt);
        assemble_time_matrix(|x, y, t| rigid_body_field(x, y, t, &self.params), &xs, &ys, &times)
    }

    /// Random (x, y, t) samples from the training domain.
    pub fn random_points(&self, stream_name: &str) -> PointCloud {
        let mut rng = stream(self.seed, stream_name);
        let (lo, hi) = self.train_domain;
        let mut coords = Array2::zeros((self.n_points, 3));
        let mut values = Array1::zeros(self.n_points);
        for i in 0..self.n_points {
            let x = rng.random_range(lo..hi);
            let y = rng.random_range(lo..hi);
            let t = rng.random_range(0.0..self.params.t_end);
            coords[[i, 0]] = x;
            coords[[i, 1]] = y;
            coords[[i, 2]] = t;
            values[i] = rigid_body_field(x, y, t, &self.params);
        }
        PointCloud { coords, values }
    }

    /// Full-domain evaluation grid (including the extrapolation band outside
    /// the training square).
    pub fn evaluation_grid(&self, nx: usize, ny: usize, nt: usize) -> PointCloud {
        let xs = linspace(self.domain.0, self.domain.1, nx);
        let ys = linspace(self.domain.0, self.domain.1, ny);
        let times = linspace(0.0, self.params.t_end, nt);
        let n = nx * ny * nt;
        let mut coords = Array2::zeros((n, 3));
        let mut values = Array1::zeros(n);
        let mut row = 0;
        for &x in &xs {
            for &y in &ys {
                for &t in &times {
                    coords[[row, 0]] = x;
                    coords[[row, 1]] = y;
                    coords[[row, 2]] = t;
                    values[row] = rigid_body_field(x, y, t, &self.params);
                    row += 1;
                }
            }
        }
        PointCloud { coords, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_scenario_matrix_shape() {
        let case = MsdCase { n_scenarios: 1, n_times: 20, ..MsdCase::default() };
        let set = case.generate("train").unwrap();
        let m = assemble_scenario_matrix(&set, "x").unwrap();
        assert_eq!(m.values().dim(), (20, 1));
    }

    #[test]
    fn default_msd_matrix_is_500_by_100() {
        let set = MsdCase::default().generate("train").unwrap();
        let m = assemble_scenario_matrix(&set, "v").unwrap();
        assert_eq!(m.values().dim(), (500, 100));
    }

    #[test]
    fn columns_equal_trajectories() {
        let case = MsdCase { n_scenarios: 5, n_times: 40, ..MsdCase::default() };
        let set = case.generate("train").unwrap();
        let m = assemble_scenario_matrix(&set, "x").unwrap();
        let trajs = set.trajectories("x").unwrap();
        for (j, traj) in trajs.iter().enumerate() {
            for (i, &v) in traj.iter().enumerate() {
                assert_eq!(m.values()[[i, j]], v);
            }
        }
    }

    #[test]
    fn ragged_grid_is_rejected() {
        let set = ScenarioSet::new(
            vec![vec![1.0], vec![2.0]],
            vec![0.0, 1.0, 2.0],
            vec![("x".into(), vec![vec![0.0, 0.0, 0.0], vec![0.0, 0.0]])],
        )
        .unwrap();
        assert!(matches!(
            assemble_scenario_matrix(&set, "x"),
            Err(CasegenError::GridRequired(_))
        ));
    }

    #[test]
    fn time_matrix_row_order_documented() {
        // 2 x 2 grid: rows are (x0,y0), (x0,y1), (x1,y0), (x1,y1)
        let m = assemble_time_matrix(|x, y, _| 10.0 * x + y, &[0.0, 1.0], &[0.0, 1.0], &[0.0])
            .unwrap();
        assert_eq!(m.values().dim(), (4, 1));
        let col: Vec<f64> = m.values().column(0).to_vec();
        assert_eq!(col, vec![0.0, 1.0, 10.0, 11.0]);
    }

    #[test]
    fn desk_scale_matrix_is_10000_by_100() {
        let case = RigidBodyCase { grid_nx: 10, grid_ny: 10, grid_nt: 7, ..Default::default() };
        let m = case.snapshot_matrix().unwrap();
        assert_eq!(m.values().dim(), (100, 7));
    }

    #[test]
    fn generators_are_deterministic() {
        let a = TanhCase::default().generate("train").unwrap();
        let b = TanhCase::default().generate("train").unwrap();
        assert_eq!(a.inputs, b.inputs);
        assert_eq!(a.trajectories("x").unwrap(), b.trajectories("x").unwrap());
        let c = RigidBodyCase { n_points: 50, ..Default::default() };
        assert_eq!(c.random_points("train").coords, c.random_points("train").coords);
    }

    #[test]
    fn train_and_test_streams_differ() {
        let a = MsdCase::default().generate("train").unwrap();
        let b = MsdCase::default().generate("test").unwrap();
        assert_ne!(a.inputs, b.inputs);
    }
}
