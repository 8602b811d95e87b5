//! Fixed-step classic Runge–Kutta for small state vectors.

/// One RK4 step of `ẏ = f(y)` for an autonomous system.
pub fn step<const N: usize, F>(f: &F, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k1 = f(y);
    let k2 = f(&axpy(y, 0.5 * h, &k1));
    let k3 = f(&axpy(y, 0.5 * h, &k2));
    let k4 = f(&axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * k[i];
    }
    out
}

/// Number of whole steps of size `dt` needed to reach `t_end`, tolerant of
/// round-off in the ratio.
pub fn step_count(dt: f64, t_end: f64) -> usize {
    let n = t_end / dt;
    let r = n.round();
    if (n - r).abs() < 1e-9 * r.max(1.0) {
        r as usize
    } else {
        n.ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_fourth_order() {
        let f = |y: &[f64; 1]| [-y[0]];
        let mut errs = Vec::new();
        for n in [10usize, 20] {
            let h = 1.0 / n as f64;
            let mut y = [1.0];
            for _ in 0..n {
                y = step(&f, &y, h);
            }
            errs.push((y[0] - (-1.0f64).exp()).abs());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 4.0).abs() < 0.2, "{order}");
    }

    #[test]
    fn step_count_rounding() {
        assert_eq!(step_count(0.1, 1.0), 10);
        assert_eq!(step_count(0.3, 1.0), 4);
    }
}
