//! Integer-order Bessel functions of the first kind, as needed by the
//! Jacobi–Anger expansion `exp(j m cos θ) = Σ_k j^k J_k(m) e^{jkθ}`.
//!
//! Values are produced by Miller's backward recurrence normalized with
//! `J_0 + 2 Σ J_{2k} = 1`, which is stable for every order at once.

use crate::scalar::Scalar;

/// `J_0(x) ..= J_nmax(x)`.
pub fn bessel_j_orders<T: Scalar>(x: T, nmax: usize) -> Vec<T> {
    let mut out = vec![T::zero(); nmax + 1];
    if x == T::zero() {
        out[0] = T::one();
        return out;
    }
    let ax = x.abs();
    let reach = nmax.max(ax.ceil().to_usize().unwrap_or(0));
    let mut start = reach + 20 + ((40 * reach.max(1)) as f64).sqrt().ceil() as usize;
    start += start % 2;

    let big = T::lit(1e10);
    let small = T::lit(1e-10);
    let two_over_x = T::lit(2.0) / ax;

    let mut next = T::zero(); // J_{k+1}
    let mut cur = T::lit(1e-30); // J_k
    let mut even_sum = T::zero();
    for k in (1..=start).rev() {
        let prev = T::from_count(k) * two_over_x * cur - next; // J_{k-1}
        next = cur;
        cur = prev;
        if cur.abs() > big {
            cur = cur * small;
            next = next * small;
            even_sum = even_sum * small;
            for v in out.iter_mut() {
                *v = *v * small;
            }
        }
        let order = k - 1;
        if order <= nmax {
            out[order] = cur;
        }
        if order > 0 && order % 2 == 0 {
            even_sum = even_sum + cur;
        }
    }
    let norm = cur + T::lit(2.0) * even_sum;
    for (k, v) in out.iter_mut().enumerate() {
        *v = *v / norm;
        // J_k(-x) = (-1)^k J_k(x)
        if x < T::zero() && k % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

/// `J_n(x)` for any integer order, using `J_{-n} = (-1)^n J_n`.
pub fn bessel_j<T: Scalar>(order: i32, x: T) -> T {
    let n = order.unsigned_abs() as usize;
    let v = bessel_j_orders(x, n)[n];
    if order < 0 && n % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `J_0(m) ..= J_K(m)` where `K` is the largest order with `|J_K(m)| >= tol`;
/// every order beyond `K` has `|J_k(m)| < tol`.
pub fn jacobi_anger_orders<T: Scalar>(m: T, tol: T) -> Vec<T> {
    // Orders past |m| decay monotonically; this headroom covers tol down to ~1e-16 for m <= 50.
    let guess = m.abs().ceil().to_usize().unwrap_or(0) + 40;
    let mut values = bessel_j_orders(m, guess);
    let floor = m.abs().ceil().to_usize().unwrap_or(0);
    let mut last = 0;
    for (k, v) in values.iter().enumerate() {
        if v.abs() >= tol || k <= floor {
            last = k;
        }
    }
    values.truncate(last + 1);
    values
}
