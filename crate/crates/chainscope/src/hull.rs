//! Exact convex-hull helpers over rational points: a monotone-chain hull in
//! the plane, interval hulls on the line, and an LP-based extreme-point
//! filter in higher dimension.

use crate::error::Result;
use crate::simplex::{solve, Program};
use num::rational::BigRational;
use num::{One, Signed, Zero};

fn zero() -> BigRational {
    Zero::zero()
}

/// Indices of the extreme points of a 1-d point set (min and max).
pub fn extreme_1d(points: &[Vec<BigRational>]) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    let mut min_i = 0;
    let mut max_i = 0;
    for (i, p) in points.iter().enumerate() {
        if p[0] < points[min_i][0] {
            min_i = i;
        }
        if p[0] > points[max_i][0] {
            max_i = i;
        }
    }
    if min_i == max_i {
        vec![min_i]
    } else {
        vec![min_i, max_i]
    }
}

/// cross product (b - a) x (c - a)
fn cross(a: &[BigRational], b: &[BigRational], c: &[BigRational]) -> BigRational {
    let abx = &b[0] - &a[0];
    let aby = &b[1] - &a[1];
    let acx = &c[0] - &a[0];
    let acy = &c[1] - &a[1];
    &abx * &acy - &aby * &acx
}

/// Indices of hull vertices in counterclockwise order, collinear interior
/// points dropped. Handles degenerate (single point, segment) inputs.
pub fn hull_2d(points: &[Vec<BigRational>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        points[a][0]
            .cmp(&points[b][0])
            .then_with(|| points[a][1].cmp(&points[b][1]))
    });
    idx.dedup_by(|&mut a, &mut b| points[a] == points[b]);
    if idx.len() <= 1 {
        return idx;
    }
    if idx.len() == 2 {
        return idx;
    }

    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2
            && !cross(
                &points[lower[lower.len() - 2]],
                &points[lower[lower.len() - 1]],
                &points[i],
            )
            .is_positive()
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2
            && !cross(
                &points[upper[upper.len() - 2]],
                &points[upper[upper.len() - 1]],
                &points[i],
            )
            .is_positive()
        {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 2 {
        // fully collinear set: keep the two extremes
        let first = *idx.first().unwrap();
        let last = *idx.last().unwrap();
        return vec![first, last];
    }
    lower
}

/// Outward normals of the CCW hull's edges as primitive integer vectors
/// `(i64, i64)`; for a segment, both perpendiculars and both directions
/// along the segment.
pub fn hull_2d_normals(points: &[Vec<BigRational>], hull: &[usize]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    match hull.len() {
        0 | 1 => {}
        2 => {
            let a = &points[hull[0]];
            let b = &points[hull[1]];
            let dir = primitive(&[&b[0] - &a[0], &b[1] - &a[1]]);
            out.push(vec![dir[1], -dir[0]]);
            out.push(vec![-dir[1], dir[0]]);
            out.push(dir.clone());
            out.push(vec![-dir[0], -dir[1]]);
        }
        k => {
            for i in 0..k {
                let a = &points[hull[i]];
                let b = &points[hull[(i + 1) % k]];
                let dir = primitive(&[&b[0] - &a[0], &b[1] - &a[1]]);
                // CCW polygon: outward normal is the clockwise rotation
                out.push(vec![dir[1], -dir[0]]);
            }
        }
    }
    out
}

/// Scale a rational vector to primitive integers.
pub fn primitive(v: &[BigRational]) -> Vec<i64> {
    use num::bigint::BigInt;
    use num::ToPrimitive;
    let mut lcm = BigInt::one();
    for x in v {
        lcm = num::integer::lcm(lcm, x.denom().clone());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let mut gcd = BigInt::zero();
    for x in &ints {
        gcd = num::integer::gcd(gcd, x.clone());
    }
    if gcd.is_zero() {
        return vec![0; v.len()];
    }
    ints.iter()
        .map(|x| (x / &gcd).to_i64().expect("primitive vector overflow"))
        .collect()
}

/// Support value `max_i u . p_i` over rational points.
pub fn support(points: &[Vec<BigRational>], u: &[i64]) -> Option<BigRational> {
    points
        .iter()
        .map(|p| {
            p.iter()
                .zip(u)
                .fold(zero(), |acc, (x, &c)| acc + x * BigRational::from_integer(c.into()))
        })
        .max()
}

/// Extreme-point filter in any dimension: point `i` is kept iff it is not a
/// convex combination of the others (decided by an exact feasibility LP).
pub fn extreme_filter(points: &[Vec<BigRational>]) -> Result<Vec<usize>> {
    let mut unique: Vec<usize> = Vec::new();
    for i in 0..points.len() {
        if !unique.iter().any(|&j| points[j] == points[i]) {
            unique.push(i);
        }
    }
    if unique.len() <= 2 {
        return Ok(unique);
    }
    let d = points[0].len();
    let mut keep = Vec::new();
    for &i in &unique {
        let others: Vec<usize> = unique.iter().copied().filter(|&j| j != i).collect();
        // feasibility: sum l_j p_j = p_i, sum l_j = 1, l >= 0
        let mut columns = Vec::with_capacity(others.len());
        for &j in &others {
            let mut col: Vec<(usize, BigRational)> = points[j]
                .iter()
                .enumerate()
                .map(|(r, x)| (r, x.clone()))
                .collect();
            col.push((d, One::one()));
            columns.push(col);
        }
        // shift rows so the rhs is nonnegative: add M to both sides per row
        // instead, solve with rhs p_i which may be negative; re-express each
        // row with negative rhs by negating the row
        let mut rhs: Vec<BigRational> = points[i].clone();
        rhs.push(One::one());
        for r in 0..d {
            if rhs[r].is_negative() {
                rhs[r] = -rhs[r].clone();
                for col in columns.iter_mut() {
                    for (row, x) in col.iter_mut() {
                        if *row == r {
                            *x = -x.clone();
                        }
                    }
                }
            }
        }
        let program = Program {
            rows: d + 1,
            columns,
            rhs,
            objective: vec![zero(); others.len()],
        };
        match solve(&program) {
            Ok(_) => {}                                  // representable: not extreme
            Err(crate::error::Error::LpInfeasible) => keep.push(i),
            Err(e) => return Err(e),
        }
    }
    Ok(keep)
}
