use super::{
    FarkasCertificate, LpProblem, LpSolution, LpStatus, Relation, Sense, CHECK_TOL,
};
use crate::error::{Error, Result};

/// Smallest entry accepted as a pivot.
pub const PIVOT_TOL: f64 = 1e-10;

/// Reduced costs above `-DUAL_TOL` count as nonnegative.
const DUAL_TOL: f64 = 1e-10;

/// Relative tolerance on the phase-one optimum.
const FEAS_TOL: f64 = 1e-9;

/// Result of a phase-one-only solve.
#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(Vec<f64>),
    Infeasible(FarkasCertificate),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Origin {
    Constraint(usize),
    UpperBound(usize),
}

/// The problem rewritten over nonnegative columns.
struct Standard {
    columns: usize,
    /// per original variable: (column, sign) pairs
    var_cols: Vec<Vec<(usize, f64)>>,
    offsets: Vec<f64>,
    rows: Vec<Vec<f64>>,
    relations: Vec<Relation>,
    rhs: Vec<f64>,
    origin: Vec<Origin>,
    costs: Vec<f64>,
}

fn standardize(p: &LpProblem) -> Standard {
    let n = p.vars();
    let mut var_cols = Vec::with_capacity(n);
    let mut offsets = Vec::with_capacity(n);
    let mut columns = 0;
    let mut upper: Vec<(usize, usize, f64)> = Vec::new();
    for (j, &(lo, hi)) in p.bounds.iter().enumerate() {
        if lo.is_finite() {
            var_cols.push(vec![(columns, 1.0)]);
            offsets.push(lo);
            if hi.is_finite() {
                upper.push((j, columns, hi - lo));
            }
            columns += 1;
        } else if hi.is_finite() {
            var_cols.push(vec![(columns, -1.0)]);
            offsets.push(hi);
            columns += 1;
        } else {
            var_cols.push(vec![(columns, 1.0), (columns + 1, -1.0)]);
            offsets.push(0.0);
            columns += 2;
        }
    }
    let mut rows = Vec::new();
    let mut relations = Vec::new();
    let mut rhs = Vec::new();
    let mut origin = Vec::new();
    for (r, c) in p.constraints.iter().enumerate() {
        let mut row = vec![0.0; columns];
        let mut b = c.rhs;
        for (j, &a) in c.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            b -= a * offsets[j];
            for &(col, s) in &var_cols[j] {
                row[col] += a * s;
            }
        }
        rows.push(row);
        relations.push(c.relation);
        rhs.push(b);
        origin.push(Origin::Constraint(r));
    }
    for (j, col, range) in upper {
        let mut row = vec![0.0; columns];
        row[col] = 1.0;
        rows.push(row);
        relations.push(Relation::Le);
        rhs.push(range);
        origin.push(Origin::UpperBound(j));
    }
    let sign = match p.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut costs = vec![0.0; columns];
    for (j, &c) in p.objective.iter().enumerate() {
        for &(col, s) in &var_cols[j] {
            costs[col] += sign * c * s;
        }
    }
    Standard {
        columns,
        var_cols,
        offsets,
        rows,
        relations,
        rhs,
        origin,
        costs,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    width: usize,
    t: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    /// per row: identity column used for the phase-one dual and its flip
    unit_col: Vec<usize>,
    flip: Vec<f64>,
    pivots: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn build(s: &Standard) -> Tableau {
        let m = s.rows.len();
        let n = s.columns;
        let mut extra = 0;
        for (r, rel) in s.relations.iter().enumerate() {
            let flipped = s.rhs[r] < 0.0;
            extra += match (rel, flipped) {
                (Relation::Eq, _) => 1,
                (Relation::Le, false) | (Relation::Ge, true) => 1,
                _ => 2,
            };
        }
        let cols = n + extra;
        let width = cols + 1;
        let mut t = vec![0.0; m * width];
        let mut kinds = vec![ColKind::Structural; n];
        kinds.resize(cols, ColKind::Slack);
        let mut basis = vec![0; m];
        let mut unit_col = vec![0; m];
        let mut flip = vec![1.0; m];
        let mut next = n;
        for r in 0..m {
            let f = if s.rhs[r] < 0.0 { -1.0 } else { 1.0 };
            flip[r] = f;
            let row = &mut t[r * width..(r + 1) * width];
            for (c, &a) in s.rows[r].iter().enumerate() {
                row[c] = f * a;
            }
            row[cols] = f * s.rhs[r];
            let rel = match (s.relations[r], f < 0.0) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (rel, _) => rel,
            };
            match rel {
                Relation::Le => {
                    row[next] = 1.0;
                    basis[r] = next;
                    unit_col[r] = next;
                    next += 1;
                }
                Relation::Ge => {
                    row[next] = -1.0;
                    row[next + 1] = 1.0;
                    kinds[next + 1] = ColKind::Artificial;
                    basis[r] = next + 1;
                    unit_col[r] = next + 1;
                    next += 2;
                }
                Relation::Eq => {
                    row[next] = 1.0;
                    kinds[next] = ColKind::Artificial;
                    basis[r] = next;
                    unit_col[r] = next;
                    next += 1;
                }
            }
        }
        Tableau {
            width,
            t,
            obj: vec![0.0; width],
            basis,
            kinds,
            unit_col,
            flip,
            pivots: 0,
        }
    }

    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    /// Sets the reduced-cost row for column costs `c`.
    fn price(&mut self, costs: &[f64]) {
        let w = self.width;
        let mut obj = vec![0.0; w];
        obj[..costs.len()].copy_from_slice(costs);
        for r in 0..self.rows() {
            let cb = if self.basis[r] < costs.len() {
                costs[self.basis[r]]
            } else {
                0.0
            };
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[r * w..(r + 1) * w];
            for (o, &a) in obj.iter_mut().zip(row) {
                *o -= cb * a;
            }
        }
        self.obj = obj;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.t[r * w + c];
        for v in &mut self.t[r * w..(r + 1) * w] {
            *v /= p;
        }
        self.t[r * w + c] = 1.0;
        let prow: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows() {
            if i == r {
                continue;
            }
            let f = self.t[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for (v, &pv) in row.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            row[c] = 0.0;
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, &pv) in self.obj.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Bland's rule iterations until optimal or unbounded.
    fn run(&mut self, allowed: impl Fn(ColKind) -> bool) -> Result<Step> {
        let rhs = self.rhs_col();
        let cap = 50 * (self.rows() + self.width) + 1000;
        for _ in 0..cap {
            let entering = (0..rhs).find(|&c| allowed(self.kinds[c]) && self.obj[c] < -DUAL_TOL);
            let Some(c) = entering else {
                return Ok(Step::Optimal);
            };
            let mut best: Option<(usize, f64)> = None;
            let mut largest: f64 = 0.0;
            for r in 0..self.rows() {
                let a = self.at(r, c);
                largest = largest.max(a);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.at(r, rhs).max(0.0) / a;
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                        if ratio < bratio && !tie
                            || tie && self.basis[r] < self.basis[br]
                        {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None if largest > 1e-12 => {
                    return Err(Error::NumericBreakdown(format!(
                        "column {c} has only sub-tolerance pivots (largest {largest:e})"
                    )))
                }
                None => return Ok(Step::Unbounded),
            }
        }
        Err(Error::NumericBreakdown(format!(
            "no convergence after {cap} pivots"
        )))
    }

    fn column_values(&self, columns: usize) -> Vec<f64> {
        let mut x = vec![0.0; columns];
        let rhs = self.rhs_col();
        for r in 0..self.rows() {
            let b = self.basis[r];
            if b < columns {
                x[b] = self.at(r, rhs).max(0.0);
            }
        }
        x
    }

    /// Phase one: minimize the sum of artificials. Returns its optimum.
    fn phase_one(&mut self) -> Result<f64> {
        let costs: Vec<f64> = self
            .kinds
            .iter()
            .map(|k| if *k == ColKind::Artificial { 1.0 } else { 0.0 })
            .collect();
        self.price(&costs);
        self.run(|_| true)?;
        Ok(-self.obj[self.rhs_col()])
    }

    /// Pivots artificials out of the basis; drops rows that are redundant.
    fn purge_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows() {
            if self.kinds[self.basis[r]] != ColKind::Artificial {
                r += 1;
                continue;
            }
            let c = (0..self.rhs_col())
                .find(|&c| self.kinds[c] != ColKind::Artificial && self.at(r, c).abs() > PIVOT_TOL);
            match c {
                Some(c) => {
                    self.pivot(r, c);
                    r += 1;
                }
                None => {
                    let w = self.width;
                    self.t.drain(r * w..(r + 1) * w);
                    self.basis.remove(r);
                    self.unit_col.remove(r);
                    self.flip.remove(r);
                }
            }
        }
    }

    /// Farkas multipliers in the orientation of the standardized rows.
    fn farkas(&self, s: &Standard) -> Vec<f64> {
        (0..self.rows())
            .map(|r| {
                let col = self.unit_col[r];
                let y = match self.kinds[col] {
                    ColKind::Artificial => 1.0 - self.obj[col],
                    _ => -self.obj[col],
                };
                debug_assert!(r < s.rows.len());
                // z = -y for the flipped row, then undo the flip
                -y * self.flip[r]
            })
            .collect()
    }
}

fn certificate(p: &LpProblem, s: &Standard, u: &[f64]) -> Result<FarkasCertificate> {
    let mut combined = vec![0.0; s.columns];
    let mut rhs = 0.0;
    let mut scale: f64 = 1.0;
    for (r, row) in s.rows.iter().enumerate() {
        let ok = match s.relations[r] {
            Relation::Le => u[r] >= -1e-9,
            Relation::Ge => u[r] <= 1e-9,
            Relation::Eq => true,
        };
        if !ok {
            return Err(Error::NumericBreakdown(format!(
                "certificate multiplier {} has the wrong sign on row {r}",
                u[r]
            )));
        }
        for (c, &a) in row.iter().enumerate() {
            combined[c] += u[r] * a;
            scale = scale.max((u[r] * a).abs());
        }
        rhs += u[r] * s.rhs[r];
    }
    if combined.iter().any(|&v| v < -1e-8 * scale) || rhs >= 0.0 {
        return Err(Error::NumericBreakdown(
            "infeasibility certificate failed verification".into(),
        ));
    }
    let mut row_multipliers = vec![0.0; p.constraints.len()];
    let mut bound_multipliers = vec![0.0; p.vars()];
    for (r, o) in s.origin.iter().enumerate() {
        match *o {
            Origin::Constraint(k) => row_multipliers[k] = u[r],
            Origin::UpperBound(j) => bound_multipliers[j] = u[r],
        }
    }
    Ok(FarkasCertificate {
        row_multipliers,
        bound_multipliers,
        combined_rhs: rhs,
    })
}

fn recover(s: &Standard, cols: &[f64]) -> Vec<f64> {
    s.var_cols
        .iter()
        .zip(&s.offsets)
        .map(|(vc, off)| off + vc.iter().map(|&(c, sg)| sg * cols[c]).sum::<f64>())
        .collect()
}

fn rhs_scale(s: &Standard) -> f64 {
    s.rhs.iter().fold(1.0f64, |m, b| m.max(b.abs()))
}

fn verify_point(p: &LpProblem, x: &[f64]) -> Result<()> {
    let scale = p
        .constraints
        .iter()
        .fold(1.0f64, |m, c| m.max(c.rhs.abs()));
    let v = p.max_violation(x);
    if v > CHECK_TOL * scale {
        return Err(Error::NumericBreakdown(format!(
            "returned point violates constraints by {v:e}"
        )));
    }
    Ok(())
}

enum PhaseOne {
    Feasible(Tableau, Standard),
    Infeasible(FarkasCertificate, usize),
}

fn run_phase_one(p: &LpProblem) -> Result<PhaseOne> {
    p.validate()?;
    let s = standardize(p);
    let mut tab = Tableau::build(&s);
    let infeas = tab.phase_one()?;
    if infeas > FEAS_TOL * rhs_scale(&s) {
        let u = tab.farkas(&s);
        let cert = certificate(p, &s, &u)?;
        return Ok(PhaseOne::Infeasible(cert, tab.pivots));
    }
    tab.purge_artificials();
    Ok(PhaseOne::Feasible(tab, s))
}

/// Two-phase primal simplex.
pub fn lp_solve(p: &LpProblem) -> Result<LpSolution> {
    let (mut tab, s) = match run_phase_one(p)? {
        PhaseOne::Infeasible(cert, pivots) => {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective: f64::NAN,
                certificate: Some(cert),
                pivots,
            })
        }
        PhaseOne::Feasible(tab, s) => (tab, s),
    };
    tab.price(&s.costs);
    let step = tab.run(|k| k != ColKind::Artificial)?;
    let x = recover(&s, &tab.column_values(s.columns));
    verify_point(p, &x)?;
    match step {
        Step::Unbounded => Ok(LpSolution {
            status: LpStatus::Unbounded,
            x,
            objective: match p.sense {
                Sense::Max => f64::INFINITY,
                Sense::Min => f64::NEG_INFINITY,
            },
            certificate: None,
            pivots: tab.pivots,
        }),
        Step::Optimal => Ok(LpSolution {
            status: LpStatus::Optimal,
            objective: p.objective_at(&x),
            x,
            certificate: None,
            pivots: tab.pivots,
        }),
    }
}

/// Phase one only: a feasible point or a certificate of infeasibility.
pub fn lp_feasible(p: &LpProblem) -> Result<Feasibility> {
    if p.constraints.is_empty() {
        p.validate()?;
        let x = p.bounds.iter().map(|&(lo, hi)| 0f64.clamp(lo, hi)).collect();
        return Ok(Feasibility::Feasible(x));
    }
    match run_phase_one(p)? {
        PhaseOne::Infeasible(cert, _) => Ok(Feasibility::Infeasible(cert)),
        PhaseOne::Feasible(tab, s) => {
            let x = recover(&s, &tab.column_values(s.columns));
            verify_point(p, &x)?;
            Ok(Feasibility::Feasible(x))
        }
    }
}
