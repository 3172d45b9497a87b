//! A small two-phase revised simplex for equality-form programs
//! `max c.x : A x = b, x >= 0`, with columns stored sparse. The scalar is
//! generic: exact rationals give certificate-grade optima on small programs,
//! floats handle larger ones with an exact recheck of the final basis.
//!
//! Bland's rule everywhere, so no cycling.

use crate::error::{Error, Result};
use num::rational::BigRational;
use num::{One, Signed, Zero};

pub trait LpNum: Clone + PartialOrd + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// strictly positive beyond rounding noise
    fn pos(&self) -> bool;
    fn is_zero_num(&self) -> bool;
}

impl LpNum for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn pos(&self) -> bool {
        self.is_positive()
    }
    fn is_zero_num(&self) -> bool {
        self.is_zero()
    }
}

const FLOAT_PIVOT_TOL: f64 = 1e-9;

impl LpNum for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn pos(&self) -> bool {
        *self > FLOAT_PIVOT_TOL
    }
    fn is_zero_num(&self) -> bool {
        self.abs() <= FLOAT_PIVOT_TOL
    }
}

/// Equality-form program with sparse columns.
pub struct Program<T> {
    pub rows: usize,
    /// column j -> (row, coefficient) entries
    pub columns: Vec<Vec<(usize, T)>>,
    /// right-hand side, must be nonnegative
    pub rhs: Vec<T>,
    pub objective: Vec<T>,
}

pub struct Optimum<T> {
    pub value: T,
    /// primal solution over the program's columns
    pub solution: Vec<T>,
    /// final basis (column indices; values >= columns.len() are artificials)
    pub basis: Vec<usize>,
}

pub fn solve<T: LpNum>(p: &Program<T>) -> Result<Optimum<T>> {
    solve_warm(p, &[])
}

/// Solve with a warm-start hint: columns to pivot into the basis before the
/// phases run (they must be pivotable; unusable hints are skipped).
pub fn solve_warm<T: LpNum>(p: &Program<T>, hint: &[usize]) -> Result<Optimum<T>> {
    let m = p.rows;
    let n = p.columns.len();
    if p.rhs.len() != m || p.objective.len() != n {
        return Err(Error::InvalidParameter("program shape mismatch".into()));
    }
    if p.rhs.iter().any(|b| b.neg().pos()) {
        return Err(Error::InvalidParameter("rhs must be nonnegative".into()));
    }

    let mut in_basis = vec![false; n + m];
    for j in n..n + m {
        in_basis[j] = true;
    }
    let mut st = State {
        program: p,
        basis: (n..n + m).collect(),
        in_basis,
        binv: identity::<T>(m),
    };
    st.absorb_hint(hint);

    // phase 1: minimize the artificial total
    let phase1_cost: Vec<T> = (0..n + m)
        .map(|j| if j < n { T::zero() } else { T::one().neg() })
        .collect();
    st.run(&phase1_cost)?;
    let xb = st.basic_values();
    let art_total = st
        .basis
        .iter()
        .zip(&xb)
        .filter(|(&j, _)| j >= n)
        .fold(T::zero(), |acc, (_, v)| acc.add(v));
    if art_total.pos() {
        return Err(Error::LpInfeasible);
    }

    // phase 2: artificials may linger in the basis at value zero, they just
    // never enter again
    let phase2_cost: Vec<T> = (0..n + m)
        .map(|j| {
            if j < n {
                p.objective[j].clone()
            } else {
                T::zero()
            }
        })
        .collect();
    st.run(&phase2_cost)?;

    let xb = st.basic_values();
    let mut solution = vec![T::zero(); n];
    let mut value = T::zero();
    for (i, &j) in st.basis.iter().enumerate() {
        if j < n {
            solution[j] = xb[i].clone();
            value = value.add(&p.objective[j].mul(&xb[i]));
        }
    }
    Ok(Optimum {
        value,
        solution,
        basis: st.basis,
    })
}

struct State<'a, T> {
    program: &'a Program<T>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<Vec<T>>,
}

impl<'a, T: LpNum> State<'a, T> {
    fn column(&self, j: usize) -> Vec<(usize, T)> {
        let n = self.program.columns.len();
        if j < n {
            self.program.columns[j].clone()
        } else {
            vec![(j - n, T::one())]
        }
    }

    fn basic_values(&self) -> Vec<T> {
        let m = self.program.rows;
        (0..m)
            .map(|i| {
                let mut acc = T::zero();
                for k in 0..m {
                    acc = acc.add(&self.binv[i][k].mul(&self.program.rhs[k]));
                }
                acc
            })
            .collect()
    }

    /// Pivot hinted columns into the all-artificial starting basis, one at
    /// a time, each replacing an artificial row it can eliminate.
    fn absorb_hint(&mut self, hint: &[usize]) {
        let m = self.program.rows;
        let n = self.program.columns.len();
        for &j in hint {
            if j >= n || self.in_basis[j] {
                continue;
            }
            let col = self.column(j);
            let d: Vec<T> = (0..m)
                .map(|i| {
                    let mut acc = T::zero();
                    for (r, a) in &col {
                        acc = acc.add(&self.binv[i][*r].mul(a));
                    }
                    acc
                })
                .collect();
            // replace an artificial whose direction entry is usable
            let Some(row) = (0..m).find(|&i| {
                self.basis[i] >= n && (d[i].pos() || d[i].neg().pos())
            }) else {
                continue;
            };
            self.pivot(j, row, &d);
        }
    }

    fn pivot(&mut self, j: usize, leave_row: usize, d: &[T]) {
        let m = self.program.rows;
        let pivot = d[leave_row].clone();
        for k in 0..m {
            self.binv[leave_row][k] = self.binv[leave_row][k].div(&pivot);
        }
        for i in 0..m {
            if i == leave_row || d[i].is_zero_num() {
                continue;
            }
            let factor = d[i].clone();
            for k in 0..m {
                let delta = factor.mul(&self.binv[leave_row][k]);
                self.binv[i][k] = self.binv[i][k].sub(&delta);
            }
        }
        self.in_basis[self.basis[leave_row]] = false;
        self.in_basis[j] = true;
        self.basis[leave_row] = j;
    }

    fn run(&mut self, cost: &[T]) -> Result<()> {
        let m = self.program.rows;
        let n = self.program.columns.len();
        let max_iters = 200_000usize;
        // Dantzig pricing normally; Bland once degenerate pivots stall
        let mut stall = 0usize;
        let stall_limit = 4 * (m + 16);
        for _iter in 0..max_iters {
            // duals y = c_B B^-1
            let mut y = vec![T::zero(); m];
            for (i, &j) in self.basis.iter().enumerate() {
                let cb = &cost[j];
                if cb.is_zero_num() {
                    continue;
                }
                for k in 0..m {
                    y[k] = y[k].add(&cb.mul(&self.binv[i][k]));
                }
            }

            let bland = stall > stall_limit;
            let mut entering: Option<(usize, T)> = None;
            for j in 0..n {
                if self.in_basis[j] {
                    continue;
                }
                let mut yaj = T::zero();
                for (r, a) in &self.program.columns[j] {
                    yaj = yaj.add(&y[*r].mul(a));
                }
                let reduced = cost[j].sub(&yaj);
                if reduced.pos() {
                    if bland {
                        entering = Some((j, reduced));
                        break;
                    }
                    let better = match &entering {
                        None => true,
                        Some((_, best)) => reduced > *best,
                    };
                    if better {
                        entering = Some((j, reduced));
                    }
                }
            }
            let Some((j, _)) = entering else {
                return Ok(());
            };

            // direction d = B^-1 A_j
            let col = self.column(j);
            let d: Vec<T> = (0..m)
                .map(|i| {
                    let mut acc = T::zero();
                    for (r, a) in &col {
                        acc = acc.add(&self.binv[i][*r].mul(a));
                    }
                    acc
                })
                .collect();

            // ratio test with Bland tie-breaking on the leaving column
            let xb = self.basic_values();
            let mut leave: Option<(usize, T)> = None;
            for i in 0..m {
                if !d[i].pos() {
                    continue;
                }
                let ratio = xb[i].div(&d[i]);
                let replace = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if replace {
                    leave = Some((i, ratio));
                }
            }
            let Some((leave_row, ratio)) = leave else {
                return Err(Error::InvalidParameter("unbounded program".into()));
            };
            if ratio.is_zero_num() {
                stall += 1;
            } else {
                stall = 0;
            }
            self.pivot(j, leave_row, &d);
        }
        Err(Error::InvalidParameter(
            "simplex iteration limit exceeded".into(),
        ))
    }
}

fn identity<T: LpNum>(m: usize) -> Vec<Vec<T>> {
    (0..m)
        .map(|i| {
            (0..m)
                .map(|k| if i == k { T::one() } else { T::zero() })
                .collect()
        })
        .collect()
}

/// Exact optimality check of a basis found in floating point: solves the
/// basis system in rationals and verifies feasibility plus nonpositive
/// reduced costs. Returns the certified value.
pub fn verify_basis_exact(
    p: &Program<BigRational>,
    basis: &[usize],
) -> Result<Option<BigRational>> {
    let m = p.rows;
    let n = p.columns.len();
    let zero = || <BigRational as Zero>::zero();

    // dense basis matrix columns
    let mut bmat = vec![vec![zero(); m]; m];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            for (r, a) in &p.columns[j] {
                bmat[*r][i] = a.clone();
            }
        } else {
            bmat[j - n][i] = <BigRational as One>::one();
        }
    }

    let x = match solve_dense(&bmat, &p.rhs) {
        Some(x) => x,
        None => return Ok(None),
    };
    if x.iter().any(|v| v.is_negative()) {
        return Ok(None);
    }

    // duals from the transposed system
    let bt: Vec<Vec<BigRational>> = (0..m)
        .map(|i| (0..m).map(|k| bmat[k][i].clone()).collect())
        .collect();
    let cb: Vec<BigRational> = basis
        .iter()
        .map(|&j| {
            if j < n {
                p.objective[j].clone()
            } else {
                zero()
            }
        })
        .collect();
    let y = match solve_dense(&bt, &cb) {
        Some(y) => y,
        None => return Ok(None),
    };
    for j in 0..n {
        if basis.contains(&j) {
            continue;
        }
        let mut yaj = zero();
        for (r, a) in &p.columns[j] {
            yaj += &y[*r] * a;
        }
        if p.objective[j].clone() - yaj > zero() {
            return Ok(None);
        }
    }

    let mut value = zero();
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            value += &p.objective[j] * &x[i];
        }
    }
    Ok(Some(value))
}

/// Gaussian elimination; `None` when singular.
fn solve_dense(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let m = a.len();
    let mut aug: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for col in 0..m {
        let pivot_row = (col..m).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, pivot_row);
        let pivot = aug[col][col].clone();
        for k in col..=m {
            aug[col][k] = &aug[col][k] / &pivot;
        }
        for r in 0..m {
            if r == col || aug[r][col].is_zero() {
                continue;
            }
            let factor = aug[r][col].clone();
            for k in col..=m {
                let delta = &factor * &aug[col][k];
                aug[r][k] = &aug[r][k] - &delta;
            }
        }
    }
    Some(aug.into_iter().map(|row| row[m].clone()).collect())
}
