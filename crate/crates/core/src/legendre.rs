//! Legendre and associated Legendre functions by forward recurrence.

use crate::scalar::Scalar;

/// P_n(x) via Bonnet's recurrence
/// (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}.
pub fn legendre<T: Scalar>(n: usize, x: T) -> T {
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut curr = x;
    for k in 1..n {
        let kf = T::from_count(k);
        let next = ((kf + kf + T::one()) * x * curr - kf * prev) / (kf + T::one());
        prev = curr;
        curr = next;
    }
    curr
}

/// All of P_0(x)..=P_n_max(x).
pub fn legendre_all<T: Scalar>(n_max: usize, x: T) -> Vec<T> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(T::one());
    if n_max == 0 {
        return out;
    }
    out.push(x);
    for k in 1..n_max {
        let kf = T::from_count(k);
        let next = ((kf + kf + T::one()) * x * out[k] - kf * out[k - 1]) / (kf + T::one());
        out.push(next);
    }
    out
}

/// Squared rotation-matrix elements `d^l_{m,0}(beta)^2` for every
/// `0 <= m <= l <= l_max`, returned row-major as `rows[l][m]`.
///
/// Uses fully normalised associated Legendre functions
/// (∫_{-1}^{1} \bar P_l^m(x)^2 dx = 1), recursing upward in degree at fixed
/// order, which is stable for all degrees of interest here. Then
/// `d^l_{m0}(beta)^2 = 2/(2l+1) * \bar P_l^m(cos beta)^2`. Values that
/// underflow are negligible probabilities and come out as zero.
pub fn squared_d_column<T: Scalar>(l_max: usize, beta: T) -> Vec<Vec<T>> {
    let x = beta.cos();
    let s = beta.sin().abs();
    let two = T::lit(2.0);

    // \bar P[l][m], filled column by column.
    let mut p: Vec<Vec<T>> = (0..=l_max).map(|l| vec![T::zero(); l + 1]).collect();
    let mut diag = T::one() / two.sqrt();
    for m in 0..=l_max {
        if m > 0 {
            let mf = T::from_count(m);
            diag = diag * s * ((mf + mf + T::one()) / (mf + mf)).sqrt();
        }
        p[m][m] = diag;
        if m < l_max {
            let mf = T::from_count(m);
            p[m + 1][m] = (mf + mf + T::lit(3.0)).sqrt() * x * diag;
        }
        for l in (m + 2)..=l_max {
            let a = recurrence_coeff::<T>(l, m);
            let a_prev = recurrence_coeff::<T>(l - 1, m);
            p[l][m] = a * (x * p[l - 1][m] - p[l - 2][m] / a_prev);
        }
    }

    for (l, row) in p.iter_mut().enumerate() {
        let scale = two / T::from_count(2 * l + 1);
        for v in row.iter_mut() {
            *v = scale * *v * *v;
        }
    }
    p
}

fn recurrence_coeff<T: Scalar>(l: usize, m: usize) -> T {
    let l2 = T::from_count(l * l);
    let m2 = T::from_count(m * m);
    ((T::lit(4.0) * l2 - T::one()) / (l2 - m2)).sqrt()
}
