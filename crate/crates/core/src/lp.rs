//! Exact two-phase tableau simplex with Bland's rule.
//!
//! Small dense problems only: admissible-center search and cone-membership
//! feasibility. All variables are nonnegative; free variables must be split by
//! the caller.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize objective · x` subject to the constraints and `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars, "constraint width");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(&self.objective)
    }

    /// Feasibility only (objective ignored).
    pub fn is_feasible(&self) -> bool {
        let zero = vec![Rational::zero(); self.num_vars];
        !matches!(Tableau::build(self).run(&zero), LpOutcome::Infeasible)
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    num_vars: usize,
    /// Columns at or beyond this index are artificial.
    first_artificial: usize,
    width: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        let num_slack = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let first_artificial = lp.num_vars + num_slack;
        let normalized: Vec<(&Constraint, bool, Relation)> = lp
            .constraints
            .iter()
            .map(|c| {
                let flip = c.rhs.is_negative();
                let relation = match (c.relation, flip) {
                    (Relation::Le, true) => Relation::Ge,
                    (Relation::Ge, true) => Relation::Le,
                    (r, _) => r,
                };
                (c, flip, relation)
            })
            .collect();
        let mut basis = Vec::with_capacity(m);
        let mut slack = lp.num_vars;
        let mut artificial = first_artificial;
        let num_art = normalized
            .iter()
            .filter(|(_, _, r)| *r != Relation::Le)
            .count();
        let width = first_artificial + num_art;
        let mut out = Vec::with_capacity(m);
        for (c, flip, relation) in normalized {
            let mut row = vec![Rational::zero(); width + 1];
            for (j, a) in c.coeffs.iter().enumerate() {
                row[j] = if flip { -a.clone() } else { a.clone() };
            }
            row[width] = if flip { -c.rhs.clone() } else { c.rhs.clone() };
            match relation {
                Relation::Le => {
                    row[slack] = Rational::one();
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                    row[artificial] = Rational::one();
                    basis.push(artificial);
                    artificial += 1;
                }
                Relation::Eq => {
                    row[artificial] = Rational::one();
                    basis.push(artificial);
                    artificial += 1;
                }
            }
            out.push(row);
        }
        Tableau {
            rows: out,
            basis,
            num_vars: lp.num_vars,
            first_artificial,
            width,
        }
    }

    fn pivot(&mut self, r: usize, col: usize, obj: &mut [Rational]) {
        let inv = self.rows[r][col].recip();
        for x in self.rows[r].iter_mut() {
            *x *= &inv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, p) in row.iter_mut().zip(&prow) {
                    if !p.is_zero() {
                        *x -= &f * p;
                    }
                }
            }
        }
        if !obj[col].is_zero() {
            let f = obj[col].clone();
            for (x, p) in obj.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        self.basis[r] = col;
    }

    /// Reduced-cost row for maximizing `cost · x`: entry j is `c_j - z_j`,
    /// last entry is minus the current objective value.
    fn objective_row(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut obj = vec![Rational::zero(); self.width + 1];
        for (j, c) in cost.iter().enumerate() {
            obj[j] = c.clone();
        }
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost.get(b).cloned().unwrap_or_else(Rational::zero);
            if cb.is_zero() {
                continue;
            }
            for (x, a) in obj.iter_mut().zip(&self.rows[r]) {
                *x -= &cb * a;
            }
        }
        obj
    }

    /// Bland's rule iterations over columns `< limit`. Returns false when
    /// unbounded.
    fn optimize(&mut self, obj: &mut [Rational], limit: usize) -> bool {
        loop {
            let Some(col) = (0..limit).find(|&j| obj[j].is_positive()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[col].is_positive() {
                    continue;
                }
                let ratio = &row[self.width] / &row[col];
                let better = match &best {
                    None => true,
                    Some((br, bv)) => {
                        ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            let Some((r, _)) = best else { return false };
            self.pivot(r, col, obj);
        }
    }

    fn run(mut self, objective: &[Rational]) -> LpOutcome {
        if self.width > self.first_artificial {
            let mut cost = vec![Rational::zero(); self.width];
            for c in cost.iter_mut().skip(self.first_artificial) {
                *c = -Rational::one();
            }
            let mut obj = self.objective_row(&cost);
            self.optimize(&mut obj, self.width);
            if !obj[self.width].is_zero() {
                return LpOutcome::Infeasible;
            }
            // Drive remaining (zero-valued) artificials out of the basis.
            let mut r = 0;
            while r < self.rows.len() {
                if self.basis[r] >= self.first_artificial {
                    match (0..self.first_artificial).find(|&j| !self.rows[r][j].is_zero()) {
                        Some(col) => {
                            self.pivot(r, col, &mut obj);
                            r += 1;
                        }
                        None => {
                            self.rows.remove(r);
                            self.basis.remove(r);
                        }
                    }
                } else {
                    r += 1;
                }
            }
        }
        let mut cost = objective.to_vec();
        cost.resize(self.width, Rational::zero());
        let mut obj = self.objective_row(&cost);
        if !self.optimize(&mut obj, self.first_artificial) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); self.num_vars];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.num_vars {
                x[b] = self.rows[r][self.width].clone();
            }
        }
        let value = -obj[self.width].clone();
        LpOutcome::Optimal { x, value }
    }
}
