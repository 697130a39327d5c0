//! Banded LU factorization with partial pivoting for complex systems.

use crate::error::{Error, Result};
use crate::num::{Real, C};

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored by
/// columns with room for pivoting fill-in.
#[derive(Clone, Debug)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<C<T>>,
}

impl<T: Real> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, ld, ab: vec![C::new(T::zero(), T::zero()); ld * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, r: usize, c: usize) -> usize {
        c * self.ld + (self.kl + self.ku + r - c)
    }

    fn in_band(&self, r: usize, c: usize) -> bool {
        r < self.n && c < self.n && r + self.ku >= c && c + self.kl >= r
    }

    /// Adds `v` to entry `(r, c)`; panics outside the declared band.
    pub fn add(&mut self, r: usize, c: usize, v: C<T>) {
        assert!(self.in_band(r, c), "entry ({r}, {c}) outside band");
        let s = self.slot(r, c);
        self.ab[s] = self.ab[s] + v;
    }

    pub fn get(&self, r: usize, c: usize) -> C<T> {
        if self.in_band(r, c) {
            self.ab[self.slot(r, c)]
        } else {
            C::new(T::zero(), T::zero())
        }
    }

    /// `y = A x` using the unfactored matrix.
    pub fn mul_vec(&self, x: &[C<T>]) -> Vec<C<T>> {
        let mut y = vec![C::new(T::zero(), T::zero()); self.n];
        for c in 0..self.n {
            let lo = c.saturating_sub(self.ku);
            let hi = (c + self.kl).min(self.n - 1);
            for r in lo..=hi {
                y[r] = y[r] + self.ab[self.slot(r, c)] * x[c];
            }
        }
        y
    }

    /// Factorizes in place; the factors replace the matrix.
    pub fn factor(mut self) -> Result<BandLu<T>> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = kl + ku;
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = T::zero();
            for i in 0..=km {
                let v = self.ab[j * self.ld + kv + i].norm();
                if v > best {
                    best = v;
                    jp = i;
                }
            }
            ipiv[j] = j + jp;
            if best == T::zero() || !best.is_finite() {
                return Err(Error::Singular { row: j });
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let a = c * self.ld + kv + j - c;
                    let b = c * self.ld + kv + j + jp - c;
                    self.ab.swap(a, b);
                }
            }
            let piv = self.ab[j * self.ld + kv];
            let inv = C::new(T::one(), T::zero()) / piv;
            for i in 1..=km {
                let s = j * self.ld + kv + i;
                self.ab[s] = self.ab[s] * inv;
            }
            for c in j + 1..=ju {
                let ujc = self.ab[c * self.ld + kv + j - c];
                if ujc == C::new(T::zero(), T::zero()) {
                    continue;
                }
                for i in 1..=km {
                    let l = self.ab[j * self.ld + kv + i];
                    let s = c * self.ld + kv + j + i - c;
                    self.ab[s] = self.ab[s] - l * ujc;
                }
            }
        }
        Ok(BandLu { m: self, ipiv })
    }
}

#[derive(Clone, Debug)]
pub struct BandLu<T> {
    m: BandMatrix<T>,
    ipiv: Vec<usize>,
}

impl<T: Real> BandLu<T> {
    pub fn solve(&self, b: &[C<T>]) -> Vec<C<T>> {
        let m = &self.m;
        let (n, kl, ku) = (m.n, m.kl, m.ku);
        let kv = kl + ku;
        let mut x = b.to_vec();
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let km = kl.min(n - 1 - j);
            for i in 1..=km {
                x[j + i] = x[j + i] - m.ab[j * m.ld + kv + i] * x[j];
            }
        }
        for j in (0..n).rev() {
            x[j] = x[j] / m.ab[j * m.ld + kv];
            let lo = j.saturating_sub(kv);
            for i in lo..j {
                x[i] = x[i] - m.ab[j * m.ld + kv + i - j] * x[j];
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_random_band_system_against_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (n, kl, ku) = (40, 3, 2);
        let mut a = BandMatrix::<f64>::zeros(n, kl, ku);
        for c in 0..n {
            for r in c.saturating_sub(ku)..=(c + kl).min(n - 1) {
                // small diagonal forces pivoting
                let scale = if r == c { 0.01 } else { 1.0 };
                a.add(r, c, C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale);
            }
        }
        let x: Vec<C<f64>> = (0..n).map(|i| C::new(i as f64, 1.0 - i as f64 * 0.1)).collect();
        let b = a.mul_vec(&x);
        let got = a.clone().factor().unwrap().solve(&b);
        let err = got.iter().zip(&x).map(|(g, e)| (g - e).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = BandMatrix::<f64>::zeros(4, 1, 1);
        assert!(matches!(a.factor(), Err(Error::Singular { row: 0 })));
    }
}
