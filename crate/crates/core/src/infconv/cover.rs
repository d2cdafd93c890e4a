//! Splitting a set of atoms among agents whose priors carry load limits.
//!
//! Agent `i` holds priors `q_ik` (atom masses) and a level `a_i`; a share
//! `s_ij` of atom `j` costs `q_ikj * s_ij` against every prior. A split is
//! admissible when every prior load stays at or below `a_i + TIE_EPS`.

use crate::capacity::TIE_EPS;
use crate::error::{Error, Result};
use crate::lp::{lp_feasible, Feasibility, LpProblem, Relation, Sense, MAX_VARS};

#[derive(Debug, Clone)]
pub(crate) struct CoverProblem {
    /// agent -> prior -> mass per atom of the full space
    pub priors: Vec<Vec<Vec<f64>>>,
    pub levels: Vec<f64>,
}

struct Search<'a> {
    p: &'a CoverProblem,
    units: &'a [Vec<Option<f64>>],
    loads: Vec<Vec<f64>>,
    nodes: u64,
    budget: u64,
    use_lp: bool,
}

impl CoverProblem {
    pub fn agents(&self) -> usize {
        self.levels.len()
    }

    fn cap(&self, i: usize) -> f64 {
        self.levels[i] + TIE_EPS
    }

    fn max_mass(&self, j: usize) -> f64 {
        self.priors
            .iter()
            .flatten()
            .map(|q| q[j])
            .fold(0.0, f64::max)
    }

    /// Largest share of atom `j` agent `i` can take given prior loads.
    fn share_bound(&self, i: usize, j: usize, loads: &[f64]) -> f64 {
        let mut ub: f64 = 1.0;
        for (q, &l) in self.priors[i].iter().zip(loads) {
            if q[j] > 0.0 {
                ub = ub.min(((self.cap(i) - l) / q[j]).max(0.0));
            }
        }
        ub
    }

    fn fits(&self, i: usize, j: usize, loads: &[f64]) -> bool {
        self.priors[i]
            .iter()
            .zip(loads)
            .all(|(q, &l)| l + q[j] <= self.cap(i))
    }

    /// A necessary condition for any split, fractional or not.
    ///
    /// Dividing each agent's prior constraint by its residual capacity and
    /// summing over agents gives `Σ_j min_i q_ij / r_i <= n` for any choice of
    /// one prior (or mixture of priors) per agent.
    fn mass_bound_violated(&self, atoms: &[usize], loads: &[Vec<f64>]) -> bool {
        let n = self.agents();
        let ratio = |q: f64, r: f64| {
            if q <= 0.0 {
                0.0
            } else if r <= 0.0 {
                f64::INFINITY
            } else {
                q / r
            }
        };
        // most constraining single prior per agent
        let pick: Vec<usize> = (0..n)
            .map(|i| {
                let mut best = (0, f64::NEG_INFINITY);
                for (k, q) in self.priors[i].iter().enumerate() {
                    let r = self.cap(i) - loads[i][k];
                    let s: f64 = atoms.iter().map(|&j| ratio(q[j], r)).sum();
                    if s > best.1 {
                        best = (k, s);
                    }
                }
                best.0
            })
            .collect();
        let single: f64 = atoms
            .iter()
            .map(|&j| {
                (0..n)
                    .map(|i| ratio(self.priors[i][pick[i]][j], self.cap(i) - loads[i][pick[i]]))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        if single > n as f64 * (1.0 + 1e-12) + 1e-12 {
            return true;
        }
        // uniform mixture of each agent's priors
        let mixed: f64 = atoms
            .iter()
            .map(|&j| {
                (0..n)
                    .map(|i| {
                        let k = self.priors[i].len() as f64;
                        let q: f64 = self.priors[i].iter().map(|q| q[j]).sum::<f64>() / k;
                        let r: f64 = loads[i].iter().map(|l| self.cap(i) - l).sum::<f64>() / k;
                        ratio(q, r)
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        mixed > n as f64 * (1.0 + 1e-12) + 1e-12
    }

    fn zero_loads(&self) -> Vec<Vec<f64>> {
        self.priors.iter().map(|p| vec![0.0; p.len()]).collect()
    }

    /// Common unit of a prior's masses, when every positive mass is a whole
    /// multiple of the smallest one (empirical measures, for instance).
    fn unit(q: &[f64]) -> Option<f64> {
        let u = q.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
        if !u.is_finite() {
            return None;
        }
        q.iter()
            .all(|&v| {
                let r = v / u;
                (r - r.round()).abs() <= 1e-6
            })
            .then_some(u)
    }

    fn units(&self) -> Vec<Vec<Option<f64>>> {
        self.priors
            .iter()
            .map(|list| list.iter().map(|q| Self::unit(q)).collect())
            .collect()
    }

    /// LP relaxation over `atoms` with prior loads already committed.
    ///
    /// With `units` the relaxation is of the whole-atom problem: a share
    /// exists only where the whole atom fits, and capacities of priors with
    /// a common unit are rounded down to whole units. Without, shares are
    /// fractional throughout.
    ///
    /// Returns `Ok(None)` when infeasible; `Err` only for LP failures. Shares
    /// are indexed `[agent][position in atoms]`.
    fn relaxation(
        &self,
        atoms: &[usize],
        loads: &[Vec<f64>],
        units: Option<&[Vec<Option<f64>>]>,
    ) -> Result<Option<Vec<Vec<f64>>>> {
        let n = self.agents();
        let t = atoms.len();
        if t == 0 {
            return Ok(Some(vec![Vec::new(); n]));
        }
        // drop variables that must be zero
        let mut index = vec![vec![None; t]; n];
        let mut owner = Vec::new();
        for (pos, &j) in atoms.iter().enumerate() {
            let mut total = 0.0;
            for i in 0..n {
                let ub = match units {
                    Some(_) => {
                        if self.fits(i, j, &loads[i]) {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    None => self.share_bound(i, j, &loads[i]),
                };
                if ub > 0.0 {
                    index[i][pos] = Some(owner.len());
                    owner.push((i, pos));
                    total += ub;
                }
            }
            if total < 1.0 - 1e-12 {
                return Ok(None);
            }
        }
        let vars = owner.len();
        if vars > MAX_VARS {
            return Err(Error::DimensionMismatch(format!(
                "relaxation needs {vars} share variables (limit {MAX_VARS})"
            )));
        }
        // share bounds are implied by the prior rows and the cover rows, so
        // the variables keep the default bounds [0, inf)
        let mut lp = LpProblem::new(Sense::Min, vec![0.0; vars]);
        for i in 0..n {
            for (k, q) in self.priors[i].iter().enumerate() {
                let unit = units.and_then(|u| u[i][k]);
                let (scale, rhs) = match unit {
                    Some(u) => {
                        let whole = (self.cap(i) / u + 1e-9).floor();
                        (u, (whole - (loads[i][k] / u).round()).max(0.0))
                    }
                    None => {
                        // fractional optima sit on the row, so aim half a
                        // tolerance low and keep the recomputed load under cap
                        let slack = if units.is_none() { 0.5 * TIE_EPS } else { 0.0 };
                        (self.cap(i) - slack - loads[i][k], 1.0)
                    }
                };
                let mut row = vec![0.0; vars];
                let mut worst = 0.0;
                for (pos, &j) in atoms.iter().enumerate() {
                    if let Some(v) = index[i][pos] {
                        let a = match unit {
                            Some(_) => (q[j] / scale).round(),
                            None => q[j] / scale,
                        };
                        row[v] = a;
                        worst += a;
                    }
                }
                if worst > rhs {
                    lp.add(row, Relation::Le, rhs);
                }
            }
        }
        for pos in 0..t {
            let mut row = vec![0.0; vars];
            for i in 0..n {
                if let Some(v) = index[i][pos] {
                    row[v] = 1.0;
                }
            }
            lp.add(row, Relation::Eq, 1.0);
        }
        match lp_feasible(&lp)? {
            Feasibility::Infeasible(_) => Ok(None),
            Feasibility::Feasible(x) => {
                let mut s = vec![vec![0.0; t]; n];
                for (v, &(i, pos)) in owner.iter().enumerate() {
                    s[i][pos] = x[v].clamp(0.0, 1.0);
                }
                Ok(Some(s))
            }
        }
    }

    /// Fractional split of `atoms`, or `None` when none exists.
    pub fn fractional(&self, atoms: &[usize]) -> Result<Option<Vec<Vec<f64>>>> {
        let loads = self.zero_loads();
        if self.mass_bound_violated(atoms, &loads) {
            return Ok(None);
        }
        self.relaxation(atoms, &loads, None)
    }

    /// Whole-atom assignment of `atoms` (agent per position), or `None`.
    ///
    /// Atoms some agent does not charge go to that agent. The rest are
    /// tried by a greedy packing, a local search from the rounded LP
    /// relaxation, a dive on the relaxation, and finally branch and bound
    /// over the relaxation, limited to `budget` nodes.
    pub fn atomic(&self, atoms: &[usize], budget: u64) -> Result<Option<Vec<usize>>> {
        let n = self.agents();
        let mut assigned: Vec<(usize, usize)> = Vec::with_capacity(atoms.len());
        let mut hard = Vec::new();
        for &j in atoms {
            match (0..n).find(|&i| self.priors[i].iter().all(|q| q[j] == 0.0)) {
                Some(i) => assigned.push((j, i)),
                None => hard.push(j),
            }
        }
        let finish = |mut assigned: Vec<(usize, usize)>| {
            assigned.sort_unstable();
            atoms
                .iter()
                .map(|&j| {
                    let k = assigned.binary_search_by(|(a, _)| a.cmp(&j)).unwrap();
                    assigned[k].1
                })
                .collect::<Vec<_>>()
        };

        let loads = self.zero_loads();
        if hard.iter().any(|&j| (0..n).all(|i| !self.fits(i, j, &loads[i]))) {
            return Ok(None);
        }
        if self.mass_bound_violated(&hard, &loads) {
            return Ok(None);
        }
        hard.sort_by(|&a, &b| self.max_mass(b).total_cmp(&self.max_mass(a)).then(a.cmp(&b)));
        if let Some(g) = self.greedy(&hard, loads.clone()) {
            assigned.extend(g);
            return Ok(Some(finish(assigned)));
        }

        let units = self.units();
        let mut search = Search {
            p: self,
            units: &units,
            loads,
            nodes: 0,
            budget,
            use_lp: true,
        };
        match search.relax(&hard) {
            Ok(None) => return Ok(None),
            Ok(Some(s)) => {
                let start: Vec<usize> = (0..hard.len())
                    .map(|p| (0..n).max_by(|&a, &b| s[a][p].total_cmp(&s[b][p]).then(b.cmp(&a))).unwrap())
                    .collect();
                if let Some(found) = self.repair(&hard, start) {
                    assigned.extend(hard.iter().copied().zip(found));
                    return Ok(Some(finish(assigned)));
                }
                if let Some(found) = search.dive(&hard, s)? {
                    assigned.extend(found);
                    return Ok(Some(finish(assigned)));
                }
            }
            Err(Error::DimensionMismatch(_)) => search.use_lp = false,
            Err(e) => return Err(e),
        }
        search.loads = self.zero_loads();
        let mut rest = hard;
        let mut out = Vec::new();
        if search.branch(&mut rest, &mut out)? {
            assigned.extend(out);
            return Ok(Some(finish(assigned)));
        }
        Ok(None)
    }

    /// Local search over whole-atom assignments of `atoms` starting from
    /// `start` (agent per position). Each step moves one atom off an
    /// overloaded agent, minimizing weighted relative overload; weights of
    /// rows still overloaded at a local minimum grow by one.
    fn repair(&self, atoms: &[usize], mut a: Vec<usize>) -> Option<Vec<usize>> {
        let n = self.agents();
        let t = atoms.len();
        let zero = self.zero_loads();
        let allowed: Vec<Vec<usize>> = atoms
            .iter()
            .map(|&j| (0..n).filter(|&i| self.fits(i, j, &zero[i])).collect())
            .collect();
        for (p, ok) in allowed.iter().enumerate() {
            if !ok.contains(&a[p]) {
                a[p] = *ok.first()?;
            }
        }
        let mut loads = zero;
        for (p, &j) in atoms.iter().enumerate() {
            for (q, l) in self.priors[a[p]].iter().zip(loads[a[p]].iter_mut()) {
                *l += q[j];
            }
        }
        let mut weight: Vec<Vec<f64>> = self.priors.iter().map(|p| vec![1.0; p.len()]).collect();
        let over = |i: usize, l: f64| ((l - self.cap(i)) / self.cap(i)).max(0.0);
        let mut tabu = vec![0usize; t];
        for step in 1..=REPAIR_STEPS {
            let hot: Vec<bool> = (0..n)
                .map(|i| loads[i].iter().any(|&l| l > self.cap(i)))
                .collect();
            if !hot.iter().any(|&h| h) {
                let exact = (0..n).all(|i| {
                    self.priors[i].iter().all(|q| {
                        let l: f64 = (0..t).filter(|&p| a[p] == i).map(|p| q[atoms[p]]).sum();
                        l <= self.cap(i)
                    })
                });
                return exact.then_some(a);
            }
            let mut best: Option<(f64, usize, usize)> = None;
            for p in 0..t {
                let i = a[p];
                if !hot[i] || tabu[p] > step {
                    continue;
                }
                let j = atoms[p];
                let gain: f64 = self.priors[i]
                    .iter()
                    .zip(&loads[i])
                    .zip(&weight[i])
                    .map(|((q, &l), w)| w * (over(i, l - q[j]) - over(i, l)))
                    .sum();
                for &b in &allowed[p] {
                    if b == i {
                        continue;
                    }
                    let cost: f64 = self.priors[b]
                        .iter()
                        .zip(&loads[b])
                        .zip(&weight[b])
                        .map(|((q, &l), w)| w * (over(b, l + q[j]) - over(b, l)))
                        .sum();
                    let d = gain + cost;
                    if best.is_none_or(|(v, _, _)| d < v) {
                        best = Some((d, p, b));
                    }
                }
            }
            let Some((d, p, b)) = best else {
                tabu.iter_mut().for_each(|v| *v = 0);
                continue;
            };
            if d >= 0.0 {
                for i in 0..n {
                    for (w, &l) in weight[i].iter_mut().zip(&loads[i]) {
                        if l > self.cap(i) {
                            *w += 1.0;
                        }
                    }
                }
                if d > 0.0 {
                    continue;
                }
            }
            let (i, j) = (a[p], atoms[p]);
            for (q, l) in self.priors[i].iter().zip(loads[i].iter_mut()) {
                *l -= q[j];
            }
            for (q, l) in self.priors[b].iter().zip(loads[b].iter_mut()) {
                *l += q[j];
            }
            a[p] = b;
            tabu[p] = step + REPAIR_TABU;
        }
        None
    }

    /// Worst-fit decreasing: each atom goes to the agent left with the most
    /// relative headroom.
    fn greedy(&self, order: &[usize], mut loads: Vec<Vec<f64>>) -> Option<Vec<(usize, usize)>> {
        let mut out = Vec::with_capacity(order.len());
        for &j in order {
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.agents() {
                if !self.fits(i, j, &loads[i]) {
                    continue;
                }
                let fill = self.priors[i]
                    .iter()
                    .zip(&loads[i])
                    .map(|(q, l)| (l + q[j]) / self.cap(i))
                    .fold(0.0, f64::max);
                if best.is_none_or(|(_, f)| fill < f) {
                    best = Some((i, fill));
                }
            }
            let (i, _) = best?;
            for (q, l) in self.priors[i].iter().zip(loads[i].iter_mut()) {
                *l += q[j];
            }
            out.push((j, i));
        }
        Some(out)
    }
}

const REPAIR_STEPS: usize = 20_000;
const REPAIR_TABU: usize = 7;

/// Share at or above which an atom counts as wholly assigned.
const WHOLE: f64 = 1.0 - 1e-9;

impl Search<'_> {
    fn place(&mut self, i: usize, j: usize, sign: f64) {
        for (q, l) in self.p.priors[i].iter().zip(self.loads[i].iter_mut()) {
            *l += sign * q[j];
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::SearchBudgetExceeded(self.budget));
        }
        Ok(())
    }

    fn relax(&self, atoms: &[usize]) -> Result<Option<Vec<Vec<f64>>>> {
        self.p.relaxation(atoms, &self.loads, Some(self.units))
    }

    /// Fixes the atoms a relaxation assigns wholly, then the largest
    /// fractional share, and re-solves on what is left. Loads are restored
    /// on return.
    fn dive(&mut self, atoms: &[usize], mut s: Vec<Vec<f64>>) -> Result<Option<Vec<(usize, usize)>>> {
        let saved = self.loads.clone();
        let mut rest = atoms.to_vec();
        let mut fixed = Vec::with_capacity(atoms.len());
        let n = self.p.agents();
        let result = loop {
            self.tick()?;
            let mut left = Vec::new();
            let mut best: Option<(f64, usize, usize)> = None;
            for (pos, &j) in rest.iter().enumerate() {
                match (0..n).find(|&i| s[i][pos] >= WHOLE) {
                    Some(i) if self.p.fits(i, j, &self.loads[i]) => {
                        self.place(i, j, 1.0);
                        fixed.push((j, i));
                    }
                    _ => {
                        for i in 0..n {
                            if best.is_none_or(|(v, _, _)| s[i][pos] > v) {
                                best = Some((s[i][pos], i, j));
                            }
                        }
                        left.push(j);
                    }
                }
            }
            if left.is_empty() {
                break Some(fixed);
            }
            if left.len() == rest.len() {
                // nothing whole: commit the largest share
                match best {
                    Some((v, i, j)) if v > 0.0 && self.p.fits(i, j, &self.loads[i]) => {
                        self.place(i, j, 1.0);
                        fixed.push((j, i));
                        left.retain(|&a| a != j);
                    }
                    _ => break None,
                }
                if left.is_empty() {
                    break Some(fixed);
                }
            }
            rest = left;
            match self.relax(&rest)? {
                Some(next) => s = next,
                None => break None,
            }
        };
        self.loads = saved;
        Ok(result)
    }

    /// Depth-first branch and bound. `rest` is restored on return; on
    /// success `out` holds the assignment of every atom in `rest`.
    fn branch(&mut self, rest: &mut Vec<usize>, out: &mut Vec<(usize, usize)>) -> Result<bool> {
        if rest.is_empty() {
            return Ok(true);
        }
        self.tick()?;
        let n = self.p.agents();
        if rest.iter().any(|&j| (0..n).all(|i| !self.p.fits(i, j, &self.loads[i]))) {
            return Ok(false);
        }
        if self.p.mass_bound_violated(rest, &self.loads) {
            return Ok(false);
        }
        let relaxed = if self.use_lp {
            match self.relax(rest) {
                Ok(None) => return Ok(false),
                Ok(Some(s)) => Some(s),
                Err(Error::DimensionMismatch(_) | Error::NumericBreakdown(_)) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        if let Some(s) = &relaxed {
            // an integral relaxation is an assignment
            let whole: Option<Vec<usize>> = (0..rest.len())
                .map(|p| (0..n).find(|&i| s[i][p] >= WHOLE))
                .collect();
            if let Some(whole) = whole {
                let saved = self.loads.clone();
                let mut ok = true;
                for (&j, &i) in rest.iter().zip(&whole) {
                    if !self.p.fits(i, j, &self.loads[i]) {
                        ok = false;
                        break;
                    }
                    self.place(i, j, 1.0);
                }
                if ok {
                    out.extend(rest.iter().copied().zip(whole));
                    return Ok(true);
                }
                self.loads = saved;
            }
        }
        // branch on the most fractional atom, best share first
        let (pos, order) = match &relaxed {
            Some(s) => {
                let top = |p: usize| (0..n).map(|i| s[i][p]).fold(0.0, f64::max);
                let pos = (0..rest.len())
                    .filter(|&p| top(p) < WHOLE)
                    .max_by(|&a, &b| top(a).total_cmp(&top(b)).then(b.cmp(&a)))
                    .unwrap_or(0);
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| s[b][pos].total_cmp(&s[a][pos]).then(a.cmp(&b)));
                (pos, order)
            }
            None => (0, (0..n).collect()),
        };
        let j = rest.remove(pos);
        for (rank, &i) in order.iter().enumerate() {
            if !self.p.fits(i, j, &self.loads[i]) {
                continue;
            }
            // agents with identical priors, levels and loads are interchangeable
            if order[..rank].iter().any(|&h| self.twin(h, i)) {
                continue;
            }
            self.place(i, j, 1.0);
            out.push((j, i));
            if self.branch(rest, out)? {
                rest.insert(pos, j);
                return Ok(true);
            }
            out.pop();
            self.place(i, j, -1.0);
        }
        rest.insert(pos, j);
        Ok(false)
    }

    fn twin(&self, a: usize, b: usize) -> bool {
        self.p.levels[a] == self.p.levels[b]
            && self.p.priors[a] == self.p.priors[b]
            && self.loads[a] == self.loads[b]
    }
}
