//! Dense polynomial helpers over [`Real`] coefficients, lowest degree first.

use crate::real::Real;

/// Drop exactly-zero trailing coefficients.
pub fn trim<T: Real>(mut p: Vec<T>) -> Vec<T> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x.clone() + y.clone(),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        })
        .collect();
    trim(out)
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    add(a, &scale(b, &-T::one()))
}

pub fn scale<T: Real>(a: &[T], s: &T) -> Vec<T> {
    trim(a.iter().map(|c| c.clone() * s.clone()).collect())
}

pub fn mul<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    trim(out)
}

/// `P(s x)`.
pub fn dilate<T: Real>(a: &[T], s: &T) -> Vec<T> {
    let mut pow = T::one();
    let mut out = Vec::with_capacity(a.len());
    for c in a {
        out.push(c.clone() * pow.clone());
        pow = pow * s.clone();
    }
    trim(out)
}

/// `x P(x)`.
pub fn shift_up<T: Real>(a: &[T]) -> Vec<T> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(a.len() + 1);
    out.push(T::zero());
    out.extend(a.iter().cloned());
    out
}

pub fn eval<T: Real>(a: &[T], x: &T) -> T {
    a.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
}

/// Largest coefficient-wise absolute difference, treating missing entries as zero.
pub fn max_abs_diff<T: Real>(a: &[T], b: &[T]) -> T {
    let n = a.len().max(b.len());
    (0..n).fold(T::zero(), |acc, i| {
        let x = a.get(i).cloned().unwrap_or_else(T::zero);
        let y = b.get(i).cloned().unwrap_or_else(T::zero);
        acc.max((x - y).abs())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let a = vec![1.0, 2.0];
        let b = vec![-1.0, 0.0, 3.0];
        assert_eq!(add(&a, &b), vec![0.0, 2.0, 3.0]);
        assert_eq!(sub(&a, &a), Vec::<f64>::new());
        assert_eq!(mul(&a, &b), vec![-1.0, -2.0, 3.0, 6.0]);
        assert_eq!(dilate(&b, &2.0), vec![-1.0, 0.0, 12.0]);
        assert_eq!(shift_up(&a), vec![0.0, 1.0, 2.0]);
        assert_eq!(eval(&b, &2.0), 11.0);
        assert_eq!(max_abs_diff(&a, &b), 3.0);
    }

    #[test]
    fn trim_keeps_interior_zeros() {
        assert_eq!(trim(vec![0.0, 1.0, 0.0, 0.0]), vec![0.0, 1.0]);
        assert!(trim(vec![0.0f64]).is_empty());
    }
}
