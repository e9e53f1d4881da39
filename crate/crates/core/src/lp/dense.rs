use super::{BasisInverse, LpError, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Constraint { coeffs, relation, rhs }
    }
}

/// Variable bounds; either side may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub lower: f64,
    pub upper: f64,
}

impl Bound {
    pub const NON_NEGATIVE: Bound = Bound { lower: 0.0, upper: f64::INFINITY };
    pub const FREE: Bound = Bound { lower: f64::NEG_INFINITY, upper: f64::INFINITY };

    pub fn new(lower: f64, upper: f64) -> Self {
        Bound { lower, upper }
    }
}

impl Default for Bound {
    fn default() -> Self {
        Bound::NON_NEGATIVE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub sense: Sense,
    pub rows: Vec<Constraint>,
    pub bounds: Vec<Bound>,
}

impl LinearProgram {
    /// An LP over `n` non-negative variables with no rows.
    pub fn new(n: usize, sense: Sense) -> Self {
        LinearProgram { objective: vec![0.0; n], sense, rows: Vec::new(), bounds: vec![Bound::NON_NEGATIVE; n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.rows.push(Constraint::new(coeffs, relation, rhs));
    }

    /// Adds a row given as `(variable, coefficient)` pairs.
    pub fn add_sparse_row(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            coeffs[j] += a;
        }
        self.add_row(coeffs, relation, rhs);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One multiplier per row, sign convention of the original sense: for a
    /// maximization, `Le` rows have non-negative duals.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
enum VarMap {
    // x = offset + sign * y[col]
    Shift { col: usize, offset: f64, sign: f64 },
    Split { pos: usize, neg: usize },
}

struct Standard {
    m: usize,
    // sparse columns (row, value)
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    b: Vec<f64>,
    artificial: Vec<bool>,
    basis: Vec<usize>,
    row_sign: Vec<f64>,
    maps: Vec<VarMap>,
}

fn standardize(lp: &LinearProgram) -> Result<Standard, LpError> {
    let n = lp.num_vars();
    if lp.bounds.len() != n {
        return Err(LpError::NumericFailure(format!("{} bounds for {n} variables", lp.bounds.len())));
    }
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    // extra rows for finite two-sided bounds: (col, width)
    let mut bound_rows = Vec::new();
    for bd in &lp.bounds {
        if bd.lower > bd.upper {
            return Err(LpError::Infeasible);
        }
        let map = if bd.lower.is_finite() {
            if bd.upper.is_finite() {
                bound_rows.push((ncols, bd.upper - bd.lower));
            }
            VarMap::Shift { col: ncols, offset: bd.lower, sign: 1.0 }
        } else if bd.upper.is_finite() {
            VarMap::Shift { col: ncols, offset: bd.upper, sign: -1.0 }
        } else {
            ncols += 1;
            VarMap::Split { pos: ncols - 1, neg: ncols }
        };
        ncols += 1;
        maps.push(map);
    }
    let m = lp.rows.len() + bound_rows.len();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ncols];
    let mut cost = vec![0.0; ncols];
    let sign_obj = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
    for (j, map) in maps.iter().enumerate() {
        match *map {
            VarMap::Shift { col, sign, .. } => cost[col] = sign_obj * sign * lp.objective[j],
            VarMap::Split { pos, neg } => {
                cost[pos] = sign_obj * lp.objective[j];
                cost[neg] = -sign_obj * lp.objective[j];
            }
        }
    }
    let mut b = vec![0.0; m];
    let mut relations = Vec::with_capacity(m);
    for (i, row) in lp.rows.iter().enumerate() {
        if row.coeffs.len() != n {
            return Err(LpError::NumericFailure(format!("row {i} has {} coefficients for {n} variables", row.coeffs.len())));
        }
        let mut rhs = row.rhs;
        for (j, &a) in row.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            if !a.is_finite() {
                return Err(LpError::NumericFailure(format!("non-finite coefficient in row {i}")));
            }
            match maps[j] {
                VarMap::Shift { col, offset, sign } => {
                    rhs -= a * offset;
                    cols[col].push((i, a * sign));
                }
                VarMap::Split { pos, neg } => {
                    cols[pos].push((i, a));
                    cols[neg].push((i, -a));
                }
            }
        }
        b[i] = rhs;
        relations.push(row.relation);
    }
    for (k, &(col, width)) in bound_rows.iter().enumerate() {
        let i = lp.rows.len() + k;
        cols[col].push((i, 1.0));
        b[i] = width;
        relations.push(Relation::Le);
    }
    // flip rows with negative rhs
    let mut row_sign = vec![1.0; m];
    for i in 0..m {
        if b[i] < 0.0 {
            row_sign[i] = -1.0;
            b[i] = -b[i];
        }
    }
    if row_sign.iter().any(|&s| s < 0.0) {
        for col in &mut cols {
            for e in col.iter_mut() {
                e.1 *= row_sign[e.0];
            }
        }
    }
    let mut artificial = vec![false; cols.len()];
    let mut basis = vec![usize::MAX; m];
    for i in 0..m {
        let slack = match relations[i] {
            Relation::Le => Some(1.0),
            Relation::Ge => Some(-1.0),
            Relation::Eq => None,
        };
        if let Some(s) = slack {
            let coef = s * row_sign[i];
            cols.push(vec![(i, coef)]);
            cost.push(0.0);
            artificial.push(false);
            if coef > 0.0 {
                basis[i] = cols.len() - 1;
            }
        }
    }
    for i in 0..m {
        if basis[i] == usize::MAX {
            cols.push(vec![(i, 1.0)]);
            cost.push(0.0);
            artificial.push(true);
            basis[i] = cols.len() - 1;
        }
    }
    Ok(Standard { m, cols, cost, b, artificial, basis, row_sign, maps })
}

struct Simplex<'a> {
    sf: &'a Standard,
    tol: &'a Tolerances,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: BasisInverse,
    x: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    degenerate_run: usize,
}

impl<'a> Simplex<'a> {
    fn new(sf: &'a Standard, tol: &'a Tolerances) -> Self {
        let mut in_basis = vec![false; sf.cols.len()];
        for &j in &sf.basis {
            in_basis[j] = true;
        }
        // every starting basic column is the unit vector of its own row
        let binv = BasisInverse::identity(sf.m);
        Simplex {
            sf,
            tol,
            basis: sf.basis.clone(),
            in_basis,
            binv,
            x: sf.b.clone(),
            iterations: 0,
            since_refactor: 0,
            degenerate_run: 0,
        }
    }

    fn dense(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.sf.m];
        for &(i, a) in &self.sf.cols[j] {
            v[i] = a;
        }
        v
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let cols: Vec<Vec<f64>> = self.basis.iter().map(|&j| self.dense(j)).collect();
        self.binv = BasisInverse::from_columns(&cols)?;
        self.x = self.binv.ftran(&self.sf.b);
        for v in &mut self.x {
            if *v < 0.0 && *v > -self.tol.feasibility {
                *v = 0.0;
            }
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn residual(&self) -> f64 {
        let mut r = self.sf.b.clone();
        for (pos, &j) in self.basis.iter().enumerate() {
            for &(i, a) in &self.sf.cols[j] {
                r[i] -= a * self.x[pos];
            }
        }
        r.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let cb: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
        self.binv.btran(&cb)
    }

    /// Runs simplex iterations with `cost`; `allowed` filters entering columns.
    fn optimize(&mut self, cost: &[f64], allowed: &dyn Fn(usize) -> bool) -> Result<(), LpError> {
        let m = self.sf.m;
        loop {
            if self.iterations >= self.tol.max_iterations {
                return Err(LpError::Cycling(self.iterations));
            }
            let p = self.duals(cost);
            let bland = self.degenerate_run >= self.tol.bland_factor * m.max(1);
            let mut entering = None;
            let mut best = -self.tol.optimality;
            for j in 0..self.sf.cols.len() {
                if self.in_basis[j] || !allowed(j) {
                    continue;
                }
                let rc = cost[j] - self.sf.cols[j].iter().map(|&(i, a)| p[i] * a).sum::<f64>();
                if rc < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = rc;
                }
            }
            let Some(q) = entering else {
                return Ok(());
            };
            let d = self.binv.ftran_sparse(&self.sf.cols[q]);
            let mut leave: Option<usize> = None;
            let mut ratio_best = f64::INFINITY;
            for i in 0..m {
                let art = self.sf.artificial[self.basis[i]];
                // a basic artificial at zero must not move in either direction
                let blocks = d[i] > self.tol.pivot || (art && self.x[i] <= self.tol.feasibility && d[i] < -self.tol.pivot);
                if !blocks {
                    continue;
                }
                let ratio = if d[i] > 0.0 { self.x[i].max(0.0) / d[i] } else { 0.0 };
                let better = match leave {
                    None => true,
                    Some(l) => {
                        if (ratio - ratio_best).abs() <= 1e-12 * (1.0 + ratio_best.abs()) {
                            if bland {
                                self.basis[i] < self.basis[l]
                            } else {
                                d[i].abs() > d[l].abs()
                            }
                        } else {
                            ratio < ratio_best
                        }
                    }
                };
                if better {
                    leave = Some(i);
                    ratio_best = ratio;
                }
            }
            let r = leave.ok_or(LpError::Unbounded)?;
            let step = ratio_best;
            for i in 0..m {
                self.x[i] -= step * d[i];
            }
            self.x[r] = step;
            for v in &mut self.x {
                if *v < 0.0 && *v > -self.tol.feasibility {
                    *v = 0.0;
                }
            }
            self.binv.update(r, &d);
            self.in_basis[self.basis[r]] = false;
            self.in_basis[q] = true;
            self.basis[r] = q;
            self.iterations += 1;
            self.since_refactor += 1;
            if step <= self.tol.feasibility {
                self.degenerate_run += 1;
            } else {
                self.degenerate_run = 0;
            }
            if self.since_refactor >= self.tol.refactor_every || self.residual() > self.tol.refactor_residual {
                self.refactor()?;
            }
        }
    }

    /// Tries to pivot zero-level artificials out of the basis.
    fn drive_out_artificials(&mut self) -> Result<(), LpError> {
        for r in 0..self.sf.m {
            if !self.sf.artificial[self.basis[r]] {
                continue;
            }
            // row r of B^-1 A; any non-artificial column with a usable entry will do
            let e_r: Vec<f64> = (0..self.sf.m).map(|i| if i == r { 1.0 } else { 0.0 }).collect();
            let row = self.binv.btran(&e_r);
            let mut pick = None;
            for j in 0..self.sf.cols.len() {
                if self.in_basis[j] || self.sf.artificial[j] {
                    continue;
                }
                let v: f64 = self.sf.cols[j].iter().map(|&(i, a)| row[i] * a).sum();
                if v.abs() > 1e-7 {
                    pick = Some(j);
                    break;
                }
            }
            if let Some(q) = pick {
                let d = self.binv.ftran_sparse(&self.sf.cols[q]);
                let step = self.x[r] / d[r];
                for i in 0..self.sf.m {
                    self.x[i] -= step * d[i];
                }
                self.x[r] = step;
                self.binv.update(r, &d);
                self.in_basis[self.basis[r]] = false;
                self.in_basis[q] = true;
                self.basis[r] = q;
                self.iterations += 1;
            }
        }
        self.refactor()
    }
}

/// Two-phase revised simplex for an LP given with all columns.
///
/// Bounds are removed by shifting, negating or splitting variables; finite
/// upper bounds become explicit rows. Dantzig pricing is used until
/// `bland_factor * m` consecutive degenerate pivots, then Bland's rule.
pub fn solve_dense_lp(lp: &LinearProgram, tol: &Tolerances) -> Result<LpSolution, LpError> {
    let sf = standardize(lp)?;
    let mut sx = Simplex::new(&sf, tol);
    let scale = sf.b.iter().fold(1.0f64, |a, v| a.max(v.abs()));

    if sf.artificial.iter().any(|&a| a) {
        let phase1: Vec<f64> = sf.artificial.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
        sx.optimize(&phase1, &|_| true)?;
        sx.refactor()?;
        let infeas: f64 = sx.basis.iter().zip(&sx.x).filter(|(j, _)| sf.artificial[**j]).map(|(_, v)| *v).sum();
        if infeas > tol.feasibility * 1e2 * scale {
            return Err(LpError::Infeasible);
        }
        sx.drive_out_artificials()?;
    }
    sx.degenerate_run = 0;
    let art = sf.artificial.clone();
    sx.optimize(&sf.cost, &|j| !art[j])?;
    sx.refactor()?;
    // final check with fresh factors
    sx.optimize(&sf.cost, &|j| !art[j])?;

    let mut y = vec![0.0; sf.cols.len()];
    for (pos, &j) in sx.basis.iter().enumerate() {
        y[j] = sx.x[pos].max(0.0);
    }
    let x: Vec<f64> = sf
        .maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, offset, sign } => offset + sign * y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
    let p = sx.duals(&sf.cost);
    let sign_obj = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let duals = (0..lp.rows.len()).map(|i| sign_obj * sf.row_sign[i] * p[i]).collect();
    Ok(LpSolution { x, objective, duals, iterations: sx.iterations })
}
