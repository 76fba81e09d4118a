//! One-dimensional mixed-radix Cooley-Tukey transform with the positive
//! exponent convention `X[k] = sum_t e^{2 pi i k t / n} x[t]`, unnormalized.
//!
//! Lengths are split by their prime factors, smallest first. A prime factor
//! is handled by the direct `O(p^2)` butterfly, which is the naive DFT when
//! the whole length is prime.

use num_complex::Complex64;

use crate::group::root_of_unity;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CyclicFft {
    n: usize,
    twiddles: Vec<Complex64>,
    factors: Vec<usize>,
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        while n.is_multiple_of(p) {
            out.push(p);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl CyclicFft {
    pub(crate) fn new(n: usize) -> Self {
        assert!(n >= 1);
        Self {
            n,
            twiddles: (0..n).map(|k| root_of_unity(k as u64, n as u64)).collect(),
            factors: prime_factors(n),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.n
    }

    /// Transforms `input` into `output`; both have length `n`.
    pub(crate) fn process(&self, input: &[Complex64], output: &mut [Complex64]) {
        debug_assert_eq!(input.len(), self.n);
        debug_assert_eq!(output.len(), self.n);
        let mut scratch = Vec::new();
        self.step(input, 0, 1, self.n, output, 1, 0, &mut scratch);
    }

    #[allow(clippy::too_many_arguments)]
    fn step(
        &self,
        input: &[Complex64],
        offset: usize,
        stride: usize,
        n: usize,
        out: &mut [Complex64],
        twiddle_step: usize,
        factor: usize,
        scratch: &mut Vec<Complex64>,
    ) {
        if n == 1 {
            out[0] = input[offset];
            return;
        }
        let r = self.factors[factor];
        let m = n / r;
        for s in 0..r {
            self.step(
                input,
                offset + s * stride,
                stride * r,
                m,
                &mut out[s * m..(s + 1) * m],
                twiddle_step * r,
                factor + 1,
                scratch,
            );
        }
        // out[s*m + k] holds the length-m transform of the s-th decimated
        // subsequence; combine with X[k + q m] = sum_s W_n^{s (k + q m)} Y_s[k].
        scratch.resize(r, Complex64::new(0.0, 0.0));
        for k in 0..m {
            for s in 0..r {
                scratch[s] = out[s * m + k];
            }
            for q in 0..r {
                let idx = k + q * m;
                let mut acc = scratch[0];
                for (s, y) in scratch.iter().enumerate().skip(1) {
                    let e = (s * idx) % n;
                    acc += y * self.twiddles[e * twiddle_step];
                }
                out[idx] = acc;
            }
        }
    }
}
