//! Exact rank and nullspace computations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// Scales a rational row to a primitive integer row with the same direction.
pub fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<BigInt> = row.iter().map(|v| v.numer() * (&lcm / v.denom())).collect();
    primitive(ints)
}

/// Divides out the gcd of the entries.
pub fn primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
    v
}

/// Rank by fraction-free (Bareiss) elimination.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows.iter().map(|r| integer_row(r)).collect();
    rank_integer(&mut m)
}

/// Bareiss elimination in place; returns the rank.
pub fn rank_integer(m: &mut [Vec<BigInt>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for i in r + 1..rows {
            let factor = m[i][c].clone();
            for j in c..cols {
                let v = (&pivot * &m[i][j] - &factor * &m[r][j]) / &prev;
                m[i][j] = v;
            }
            // entries left of c in row i are already zero
        }
        prev = pivot;
        r += 1;
    }
    r
}

/// Reduced row echelon form over the rationals. Returns pivot columns.
pub fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for j in c..cols {
            m[r][j] = &m[r][j] * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

const PRIME: u64 = (1 << 61) - 1;

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn inv_mod(a: u64) -> u64 {
    let (mut base, mut exp, mut acc) = (a, PRIME - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base);
        }
        base = mul_mod(base, base);
        exp >>= 1;
    }
    acc
}

/// Greedy independent subset of integer vectors, computed modulo a large
/// prime. Returns the indices of the chosen vectors and the pivot
/// coordinates. Independence modulo the prime implies independence over
/// the rationals, so both lists are exact; the rank may only be
/// underestimated, which callers must tolerate.
pub fn independent_mod_p(vectors: &[Vec<i64>]) -> (Vec<usize>, Vec<usize>) {
    let reduce = |x: i64| -> u64 { x.rem_euclid(PRIME as i64) as u64 };
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut chosen = Vec::new();
    for (idx, v) in vectors.iter().enumerate() {
        let mut w: Vec<u64> = v.iter().map(|&x| reduce(x)).collect();
        for (pivot, b) in &basis {
            let f = w[*pivot];
            if f != 0 {
                for (wj, bj) in w.iter_mut().zip(b) {
                    *wj = (*wj + PRIME - mul_mod(f, *bj)) % PRIME;
                }
            }
        }
        if let Some(pivot) = w.iter().position(|&x| x != 0) {
            let inv = inv_mod(w[pivot]);
            w.iter_mut().for_each(|x| *x = mul_mod(*x, inv));
            basis.push((pivot, w));
            chosen.push(idx);
        }
    }
    let pivots = basis.iter().map(|(p, _)| *p).collect();
    (chosen, pivots)
}

/// Integer basis of `{z : rows · z = 0}`, each vector primitive.
pub fn nullspace(rows: &[Vec<Rational>], cols: usize) -> Vec<Vec<BigInt>> {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let pivots = rref(&mut m);
    let mut is_pivot = vec![false; cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![Rational::zero(); cols];
        v[free] = Rational::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = -m[r][free].clone();
        }
        let mut iv = integer_row(&v);
        // keep the free coordinate positive
        if iv[free].is_negative() {
            iv.iter_mut().for_each(|x| *x = -x.clone());
        }
        basis.push(iv);
    }
    basis
}
