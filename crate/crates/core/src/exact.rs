//! Exact rational linear algebra on small integer matrices.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

pub type Rational = num_rational::Ratio<i128>;

/// Rank over the rationals by fraction-free (Bareiss) elimination.
///
/// Intermediate entries are minors of the input, so for frequency matrices
/// (entries bounded by the slot count, at most a handful of columns) they stay
/// far inside `i128`. Overflow panics rather than returning a wrong rank.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    let Some(first) = rows.first() else { return 0 };
    let ncols = first.len();
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let nrows = m.len();
    let mut prev: i128 = 1;
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r][c];
        let top = m[r].clone();
        for row in &mut m[r + 1..] {
            let lead = row[c];
            for (x, &t) in row.iter_mut().zip(&top).skip(c) {
                let v = pivot
                    .checked_mul(*x)
                    .and_then(|a| lead.checked_mul(t).and_then(|b| a.checked_sub(b)))
                    .expect("fraction-free elimination overflowed i128");
                *x = v / prev;
            }
            row[..c].fill(0);
        }
        prev = pivot;
        r += 1;
    }
    r
}

/// Basis of the right null space `{b : A b = 0}` over the rationals.
pub fn null_space(rows: &[Vec<i64>], ncols: usize) -> Vec<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|&x| Rational::from_integer(x as i128))
                .collect()
        })
        .collect();
    let nrows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in &mut m[r][c..] {
            *x *= inv;
        }
        let top = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c];
                for (x, t) in row.iter_mut().zip(&top).skip(c) {
                    *x -= f * t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free = (0..ncols).filter(|c| !pivots.contains(c));
    free.map(|f| {
        let mut v = vec![Rational::zero(); ncols];
        v[f] = Rational::from_integer(1);
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[row][f];
        }
        v
    })
    .collect()
}

/// `sum_j row_j * v_j` in exact arithmetic.
pub fn dot(row: &[i64], v: &[Rational]) -> Rational {
    row.iter().zip(v).fold(Rational::zero(), |acc, (&a, b)| {
        acc + *b * Rational::from_integer(a as i128)
    })
}

/// Scales a rational vector to the primitive integer vector with positive
/// leading nonzero entry. Useful to compare vectors up to a nonzero factor.
pub fn primitive(v: &[Rational]) -> Vec<i128> {
    use num_integer::Integer;
    let lcm = v.iter().fold(1i128, |acc, x| acc.lcm(x.denom()));
    let ints: Vec<i128> = v
        .iter()
        .map(|x| (x * Rational::from_integer(lcm)).to_integer())
        .collect();
    let g = ints.iter().fold(0i128, |acc, x| acc.gcd(x));
    if g == 0 {
        return ints;
    }
    let sign = ints.iter().find(|x| !x.is_zero()).map_or(1, |x| x.signum());
    ints.iter().map(|x| x / g * sign).collect()
}
