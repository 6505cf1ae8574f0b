//! Spherical Bessel functions of the first kind and their positive zeros.

use crate::error::{Error, Result};

/// `j_l(x)` for `x >= 0`.
///
/// Upward recurrence is used well inside its stable range (`x` above
/// about `1.5 l`); below that the
/// values come from Miller's downward recurrence normalized against `j_0`,
/// or from the power series for tiny arguments.
pub fn sph_jn(l: usize, x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-3 {
        return series(l, x);
    }
    let j0 = x.sin() / x;
    if l == 0 {
        return j0;
    }
    let j1 = (x.sin() / x - x.cos()) / x;
    if l == 1 {
        return j1;
    }
    if x > 1.5 * l as f64 + 10.0 {
        let (mut a, mut b) = (j0, j1);
        for k in 1..l {
            let c = (2 * k + 1) as f64 / x * b - a;
            a = b;
            b = c;
        }
        return b;
    }
    miller(l, x, j0, j1)
}

fn series(l: usize, x: f64) -> f64 {
    // x^l / (2l+1)!! * (1 - x^2/(2(2l+3)) + x^4/(8(2l+3)(2l+5)))
    let mut pref = 1.0;
    for k in 0..l {
        pref *= x / (2 * k + 3) as f64;
    }
    let lf = l as f64;
    let x2 = x * x;
    pref * (1.0 - x2 / (2.0 * (2.0 * lf + 3.0))
        + x2 * x2 / (8.0 * (2.0 * lf + 3.0) * (2.0 * lf + 5.0)))
}

fn miller(l: usize, x: f64, j0: f64, j1: f64) -> f64 {
    let start = l + 20 + (x as usize) + (((40 * l) as f64).sqrt() as usize);
    let mut above = 0.0; // j_{k+1}
    let mut cur = 1e-300; // j_k
    let mut at_l = 0.0;
    for k in (1..=start).rev() {
        let below = (2 * k + 1) as f64 / x * cur - above;
        above = cur;
        cur = below;
        if k - 1 == l {
            at_l = cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            above *= 1e-250;
            at_l *= 1e-250;
        }
    }
    // cur ~ j_0, above ~ j_1; normalize with the better conditioned one.
    if j0.abs() >= j1.abs() {
        at_l * j0 / cur
    } else {
        at_l * j1 / above
    }
}

/// Positive zeros of `j_l` below `x_max` for every order `l <= l_max`.
///
/// Zeros of `j_l` interlace those of `j_{l-1}`, so each one is bracketed by
/// consecutive zeros of the previous order (starting from `j_0`, whose zeros
/// are `n pi`) and refined by a safeguarded regula falsi to ~1e-14.
pub fn sph_jn_zero_table(l_max: usize, x_max: f64) -> Result<Vec<Vec<f64>>> {
    let pi = std::f64::consts::PI;
    // The largest retained zero drops by less than one spacing per order.
    let reach = x_max + (l_max as f64 + 2.0) * pi;
    let mut chain: Vec<f64> = (1..).map(|n| n as f64 * pi).take_while(|&z| z <= reach + pi).collect();
    let mut table = Vec::with_capacity(l_max + 1);
    table.push(chain.iter().copied().filter(|&z| z < x_max).collect::<Vec<_>>());
    for order in 1..=l_max {
        let mut next = Vec::with_capacity(chain.len().saturating_sub(1));
        for w in chain.windows(2) {
            next.push(refine(|x| sph_jn(order, x), w[0], w[1])?);
        }
        chain = next;
        table.push(chain.iter().copied().filter(|&z| z < x_max).collect());
    }
    Ok(table)
}

/// First `count` positive zeros of `j_l`.
pub fn sph_jn_zeros(l: usize, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    // The n-th zero is below (n + l/2 + 1) pi.
    let x_max = (count as f64 + 0.5 * l as f64 + 1.5) * std::f64::consts::PI;
    let mut z = sph_jn_zero_table(l, x_max)?.pop().unwrap();
    z.truncate(count);
    Ok(z)
}

/// All positive zeros of `j_l` below `x_max`.
pub fn sph_jn_zeros_below(l: usize, x_max: f64) -> Result<Vec<f64>> {
    Ok(sph_jn_zero_table(l, x_max)?.pop().unwrap())
}

fn refine(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numerical(format!(
            "Bessel zero not bracketed in [{a}, {b}]"
        )));
    }
    let mut side = 0i8;
    for _ in 0..200 {
        if b - a <= 1e-14 * b.abs().max(1.0) {
            break;
        }
        // Illinois step, falling back to bisection if it leaves the bracket.
        let mut m = (a * fb - b * fa) / (fb - fa);
        if !(m > a && m < b) {
            m = 0.5 * (a + b);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fb.signum() {
            b = m;
            fb = fm;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = m;
            fa = fm;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}
