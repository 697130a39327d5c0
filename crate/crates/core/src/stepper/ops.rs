//! Discrete curl pair and divergence on the Yee layout.

use super::layout::{Comp, Triple, YeeLayout};
use crate::num::Real;

#[inline]
fn prev(i: usize, n: usize) -> usize {
    if i == 0 {
        n - 1
    } else {
        i - 1
    }
}

#[inline]
fn next(i: usize, n: usize) -> usize {
    if i + 1 == n {
        0
    } else {
        i + 1
    }
}

/// `curl E` on one `H` level: `Hx, Hy` at half level `k`, `Hz` at node `k`.
pub(crate) fn curl_e_level<T: Real>(l: &YeeLayout<T>, e: &Triple<T>, comp: usize, k: usize, out: &mut [T]) {
    let (nx, ny) = (l.nx, l.ny);
    let (rx, ry, rz) = (T::one() / l.dx, T::one() / l.dy, T::one() / l.dz);
    let p = l.plane();
    match comp {
        0 => {
            let ez = &e[2][k * p..(k + 1) * p];
            let ey0 = &e[1][k * p..(k + 1) * p];
            let ey1 = &e[1][(k + 1) * p..(k + 2) * p];
            for j in 0..ny {
                let jn = next(j, ny);
                for i in 0..nx {
                    let a = j * nx + i;
                    out[a] = (ez[jn * nx + i] - ez[a]) * ry - (ey1[a] - ey0[a]) * rz;
                }
            }
        }
        1 => {
            let ez = &e[2][k * p..(k + 1) * p];
            let ex0 = &e[0][k * p..(k + 1) * p];
            let ex1 = &e[0][(k + 1) * p..(k + 2) * p];
            for j in 0..ny {
                for i in 0..nx {
                    let a = j * nx + i;
                    out[a] = (ex1[a] - ex0[a]) * rz - (ez[j * nx + next(i, nx)] - ez[a]) * rx;
                }
            }
        }
        _ => {
            let ex = &e[0][k * p..(k + 1) * p];
            let ey = &e[1][k * p..(k + 1) * p];
            for j in 0..ny {
                let jn = next(j, ny);
                for i in 0..nx {
                    let a = j * nx + i;
                    out[a] = (ey[j * nx + next(i, nx)] - ey[a]) * rx - (ex[jn * nx + i] - ex[a]) * ry;
                }
            }
        }
    }
}

/// `curl H` on one `E` level. For `Ex, Ey` the level must be interior.
pub(crate) fn curl_h_level<T: Real>(l: &YeeLayout<T>, h: &Triple<T>, comp: usize, k: usize, out: &mut [T]) {
    let (nx, ny) = (l.nx, l.ny);
    let (rx, ry, rz) = (T::one() / l.dx, T::one() / l.dy, T::one() / l.dz);
    let p = l.plane();
    match comp {
        0 => {
            let hz = &h[2][k * p..(k + 1) * p];
            let hy0 = &h[1][(k - 1) * p..k * p];
            let hy1 = &h[1][k * p..(k + 1) * p];
            for j in 0..ny {
                let jp = prev(j, ny);
                for i in 0..nx {
                    let a = j * nx + i;
                    out[a] = (hz[a] - hz[jp * nx + i]) * ry - (hy1[a] - hy0[a]) * rz;
                }
            }
        }
        1 => {
            let hz = &h[2][k * p..(k + 1) * p];
            let hx0 = &h[0][(k - 1) * p..k * p];
            let hx1 = &h[0][k * p..(k + 1) * p];
            for j in 0..ny {
                for i in 0..nx {
                    let a = j * nx + i;
                    out[a] = (hx1[a] - hx0[a]) * rz - (hz[a] - hz[j * nx + prev(i, nx)]) * rx;
                }
            }
        }
        _ => {
            let hx = &h[0][k * p..(k + 1) * p];
            let hy = &h[1][k * p..(k + 1) * p];
            for j in 0..ny {
                let jp = prev(j, ny);
                for i in 0..nx {
                    let a = j * nx + i;
                    out[a] = (hy[a] - hy[j * nx + prev(i, nx)]) * rx - (hx[a] - hx[jp * nx + i]) * ry;
                }
            }
        }
    }
}

/// `curl E` at every `H` position.
pub fn curl_e<T: Real>(l: &YeeLayout<T>, e: &Triple<T>) -> Triple<T> {
    let mut out = l.zeros(Comp::H);
    let p = l.plane();
    for (c, o) in out.iter_mut().enumerate() {
        for (k, lvl) in o.chunks_mut(p).enumerate() {
            curl_e_level(l, e, c, k, lvl);
        }
    }
    out
}

/// `curl H` at every `E` position; tangential components on the two
/// boundary planes are left at zero since they need exterior values.
pub fn curl_h<T: Real>(l: &YeeLayout<T>, h: &Triple<T>) -> Triple<T> {
    let mut out = l.zeros(Comp::E);
    let p = l.plane();
    for (c, o) in out.iter_mut().enumerate() {
        for (k, lvl) in o.chunks_mut(p).enumerate() {
            if c < 2 && (k == 0 || k == l.nc) {
                continue;
            }
            curl_h_level(l, h, c, k, lvl);
        }
    }
    out
}

/// `curl (0, 0, phi)` with `phi` sampled at the `Hz` positions; lands on
/// the `E` positions and is exactly divergence free.
pub fn curl_of_vertical<T: Real>(l: &YeeLayout<T>, phi: &[T]) -> Triple<T> {
    let mut out = l.zeros(Comp::E);
    let (nx, ny, p) = (l.nx, l.ny, l.plane());
    let (rx, ry) = (T::one() / l.dx, T::one() / l.dy);
    for k in 0..=l.nc {
        let f = &phi[k * p..(k + 1) * p];
        for j in 0..ny {
            for i in 0..nx {
                let a = j * nx + i;
                out[0][k * p + a] = (f[a] - f[prev(j, ny) * nx + i]) * ry;
                out[1][k * p + a] = -(f[a] - f[j * nx + prev(i, nx)]) * rx;
            }
        }
    }
    out
}

/// `div (w E)` at interior nodes (levels `1..nc`), with `w` sampled like `E`.
pub fn divergence<T: Real>(l: &YeeLayout<T>, e: &Triple<T>, w: &Triple<T>) -> Vec<T> {
    let (nx, ny, p) = (l.nx, l.ny, l.plane());
    let (rx, ry, rz) = (T::one() / l.dx, T::one() / l.dy, T::one() / l.dz);
    let mut out = vec![T::zero(); (l.nc.saturating_sub(1)) * p];
    for k in 1..l.nc {
        for j in 0..ny {
            for i in 0..nx {
                let a = k * p + j * nx + i;
                let ax = k * p + j * nx + prev(i, nx);
                let ay = k * p + prev(j, ny) * nx + i;
                let az = a - p;
                out[(k - 1) * p + j * nx + i] = (w[0][a] * e[0][a] - w[0][ax] * e[0][ax]) * rx
                    + (w[1][a] * e[1][a] - w[1][ay] * e[1][ay]) * ry
                    + (w[2][a] * e[2][a] - w[2][az] * e[2][az]) * rz;
            }
        }
    }
    out
}

/// Weighted `sum w |f|^2 dV` over three components.
pub fn weighted_sq<T: Real>(l: &YeeLayout<T>, comps: [Comp; 3], f: &Triple<T>, coef: Option<&Triple<T>>) -> T {
    let p = l.plane();
    let mut acc = T::zero();
    for (c, comp) in comps.iter().enumerate() {
        for (k, lvl) in f[c].chunks(p).enumerate() {
            let w = l.weight(*comp, k);
            let s: T = match coef {
                Some(m) => lvl.iter().zip(&m[c][k * p..(k + 1) * p]).map(|(v, m)| *m * *v * *v).sum(),
                None => lvl.iter().map(|v| *v * *v).sum(),
            };
            acc = acc + w * s;
        }
    }
    acc * l.cell_volume()
}

/// Weighted `sum w m f.g dV`.
pub fn weighted_dot<T: Real>(l: &YeeLayout<T>, comps: [Comp; 3], f: &Triple<T>, g: &Triple<T>, coef: &Triple<T>) -> T {
    let p = l.plane();
    let mut acc = T::zero();
    for (c, comp) in comps.iter().enumerate() {
        for k in 0..l.levels(*comp) {
            let r = k * p..(k + 1) * p;
            let s: T = f[c][r.clone()].iter().zip(&g[c][r.clone()]).zip(&coef[c][r]).map(|((a, b), m)| *m * *a * *b).sum();
            acc = acc + l.weight(*comp, k) * s;
        }
    }
    acc * l.cell_volume()
}
