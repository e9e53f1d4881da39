use super::{BasisInverse, LpError, Tolerances};
use crate::model::Matching;

/// What a basic column stands for in the schedule LPs.
///
/// The derived order (`Theta < ArtificialY < Surplus(k) < Matching(..)`)
/// is the variable order used by Bland's rule.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ColumnDescriptor {
    Theta,
    ArtificialY,
    Surplus(usize),
    Matching(Matching),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotOutcome {
    /// Basis position that left.
    pub leaving: usize,
    /// Primal step length.
    pub step: f64,
    pub degenerate: bool,
}

/// Basis of a standard-form LP `min f^T x, U x = g, x >= 0` whose columns
/// are supplied one at a time by the caller.
#[derive(Debug, Clone)]
pub struct SimplexState {
    basis: Vec<ColumnDescriptor>,
    columns: Vec<Vec<f64>>,
    costs: Vec<f64>,
    rhs: Vec<f64>,
    binv: BasisInverse,
    x: Vec<f64>,
    tol: Tolerances,
    since_refactor: usize,
    degenerate_run: usize,
    pivots: usize,
}

impl SimplexState {
    pub fn new(
        basis: Vec<ColumnDescriptor>,
        columns: Vec<Vec<f64>>,
        costs: Vec<f64>,
        rhs: Vec<f64>,
        tol: Tolerances,
    ) -> Result<Self, LpError> {
        let m = rhs.len();
        if basis.len() != m || columns.len() != m || costs.len() != m {
            return Err(LpError::NumericFailure(format!(
                "basis must be square: {} columns for {m} rows",
                basis.len()
            )));
        }
        let binv = BasisInverse::from_columns(&columns)?;
        let x = binv.ftran(&rhs);
        let mut state = SimplexState {
            basis,
            columns,
            costs,
            rhs,
            binv,
            x,
            tol,
            since_refactor: 0,
            degenerate_run: 0,
            pivots: 0,
        };
        state.clamp();
        Ok(state)
    }

    fn clamp(&mut self) {
        for v in &mut self.x {
            if *v < 0.0 && *v > -self.tol.feasibility {
                *v = 0.0;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn basis(&self) -> &[ColumnDescriptor] {
        &self.basis
    }

    pub fn column(&self, pos: usize) -> &[f64] {
        &self.columns[pos]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// Current basic values `x_B`, aligned with [`Self::basis`].
    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    /// `f_B^T x_B`.
    pub fn objective(&self) -> f64 {
        self.costs.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    /// Dual vector `p^T = f_B^T B^-1`.
    pub fn dual_variables(&self) -> Vec<f64> {
        self.binv.btran(&self.costs)
    }

    /// Reduced cost `f_j - p^T u_j` of a column.
    pub fn reduced_cost(&self, cost: f64, column: &[f64]) -> f64 {
        let p = self.dual_variables();
        cost - p.iter().zip(column).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Whether the anti-cycling rule is currently in force.
    pub fn bland_active(&self) -> bool {
        self.degenerate_run >= self.tol.bland_factor * self.dim()
    }

    pub fn min_value(&self) -> f64 {
        self.x.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Replaces the cost vector of the basic columns (phase change).
    pub fn set_costs(&mut self, costs: Vec<f64>) {
        assert_eq!(costs.len(), self.dim());
        self.costs = costs;
    }

    /// Replaces one basic column's descriptor and cost, keeping its values.
    pub fn relabel(&mut self, pos: usize, descriptor: ColumnDescriptor, cost: f64) {
        self.basis[pos] = descriptor;
        self.costs[pos] = cost;
    }

    /// Replaces the right-hand side and recomputes `x_B`.
    pub fn set_rhs(&mut self, rhs: Vec<f64>) -> Result<(), LpError> {
        assert_eq!(rhs.len(), self.dim());
        self.rhs = rhs;
        self.refactor()
    }

    /// Rebuilds `B^-1` from the stored columns and recomputes `x_B`.
    pub fn refactor(&mut self) -> Result<(), LpError> {
        self.binv = BasisInverse::from_columns(&self.columns)?;
        self.x = self.binv.ftran(&self.rhs);
        self.clamp();
        self.since_refactor = 0;
        if self.min_value() < -self.tol.feasibility * 1e3 {
            return Err(LpError::NumericFailure(format!("basic value {} after refactorization", self.min_value())));
        }
        Ok(())
    }

    /// `|B x_B - g|_inf`.
    pub fn residual(&self) -> f64 {
        let m = self.dim();
        let mut r = self.rhs.clone();
        for (col, x) in self.columns.iter().zip(&self.x) {
            for i in 0..m {
                r[i] -= col[i] * x;
            }
        }
        r.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Brings `column` into the basis with the min-ratio leaving rule.
    ///
    /// Ratio ties go to the lowest basis position, or to the smallest
    /// variable in [`ColumnDescriptor`] order while Bland's rule is active.
    pub fn pivot(&mut self, entering: ColumnDescriptor, column: Vec<f64>, cost: f64) -> Result<PivotOutcome, LpError> {
        if self.pivots >= self.tol.max_iterations {
            return Err(LpError::Cycling(self.pivots));
        }
        let d = self.binv.ftran(&column);
        let mut leaving: Option<usize> = None;
        let mut best = f64::INFINITY;
        let bland = self.bland_active();
        for (i, (&di, &xi)) in d.iter().zip(&self.x).enumerate() {
            if di <= self.tol.pivot {
                continue;
            }
            let ratio = xi.max(0.0) / di;
            let better = match leaving {
                None => true,
                Some(l) => {
                    let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                    if tie {
                        // prefer the numerically larger pivot unless Bland decides
                        if bland {
                            self.basis[i] < self.basis[l]
                        } else {
                            false
                        }
                    } else {
                        ratio < best
                    }
                }
            };
            if better {
                leaving = Some(i);
                best = ratio;
            }
        }
        let r = leaving.ok_or(LpError::Unbounded)?;
        let step = best;
        for (xi, di) in self.x.iter_mut().zip(&d) {
            *xi -= step * di;
        }
        self.x[r] = step;
        self.clamp();
        self.binv.update(r, &d);
        self.basis[r] = entering;
        self.columns[r] = column;
        self.costs[r] = cost;
        self.pivots += 1;
        self.since_refactor += 1;
        let degenerate = step <= self.tol.feasibility;
        if degenerate {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }
        if self.since_refactor >= self.tol.refactor_every || self.residual() > self.tol.refactor_residual {
            self.refactor()?;
        }
        Ok(PivotOutcome { leaving: r, step, degenerate })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(m: usize, k: usize, v: f64) -> Vec<f64> {
        let mut e = vec![0.0; m];
        e[k] = v;
        e
    }

    #[test]
    fn identity_duals() {
        let m = 4;
        let cols: Vec<_> = (0..m).map(|k| unit(m, k, 1.0)).collect();
        let mut costs = vec![0.0; m];
        costs[2] = -1.0;
        let st = SimplexState::new((0..m).map(ColumnDescriptor::Surplus).collect(), cols, costs, vec![1.0; m], Tolerances::default())
            .unwrap();
        assert_eq!(st.dual_variables(), unit(m, 2, -1.0));
    }

    #[test]
    fn dual_residual_on_random_basis() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let m = 5;
        let cols: Vec<Vec<f64>> = (0..m)
            .map(|j| (0..m).map(|i| rng.random_range(-1.0..1.0) + if i == j { 3.0 } else { 0.0 }).collect())
            .collect();
        let costs: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let st = SimplexState::new(
            (0..m).map(ColumnDescriptor::Surplus).collect(),
            cols.clone(),
            costs.clone(),
            vec![1.0; m],
            Tolerances::default(),
        )
        .unwrap();
        let p = st.dual_variables();
        for (j, c) in cols.iter().enumerate() {
            let pb: f64 = p.iter().zip(c).map(|(a, b)| a * b).sum();
            assert!((pb - costs[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn one_by_one_swap() {
        let mut st = SimplexState::new(vec![ColumnDescriptor::Theta], vec![vec![2.0]], vec![0.0], vec![4.0], Tolerances::default())
            .unwrap();
        assert_eq!(st.values(), &[2.0]);
        let out = st.pivot(ColumnDescriptor::Surplus(0), vec![4.0], -1.0).unwrap();
        assert_eq!(out.leaving, 0);
        assert_eq!(st.values(), &[1.0]);
        assert_eq!(st.basis(), &[ColumnDescriptor::Surplus(0)]);
    }

    #[test]
    fn degenerate_tie_goes_to_lowest_position() {
        // x_B = (0, 0): every ratio is zero
        let cols = vec![unit(2, 0, 1.0), unit(2, 1, 1.0)];
        let mut st = SimplexState::new(
            vec![ColumnDescriptor::Surplus(1), ColumnDescriptor::Surplus(0)],
            cols,
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            Tolerances::default(),
        )
        .unwrap();
        let out = st.pivot(ColumnDescriptor::Theta, vec![1.0, 1.0], -1.0).unwrap();
        assert_eq!(out.leaving, 0);
        assert!(out.degenerate);
    }

    #[test]
    fn unbounded_direction() {
        let mut st = SimplexState::new(vec![ColumnDescriptor::Theta], vec![vec![1.0]], vec![0.0], vec![1.0], Tolerances::default())
            .unwrap();
        assert_eq!(st.pivot(ColumnDescriptor::Surplus(0), vec![-1.0], -1.0), Err(LpError::Unbounded));
    }

    #[test]
    fn iteration_cap_reports_cycling() {
        let tol = Tolerances { max_iterations: 0, ..Tolerances::default() };
        let mut st = SimplexState::new(vec![ColumnDescriptor::Theta], vec![vec![1.0]], vec![0.0], vec![1.0], tol).unwrap();
        assert_eq!(st.pivot(ColumnDescriptor::Surplus(0), vec![1.0], -1.0), Err(LpError::Cycling(0)));
    }
}
