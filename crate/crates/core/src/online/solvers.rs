//! Inner solvers for the coordinate-maximization step
//! `max_{x in F} psi(u + A x)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::cones::{Coord, FeasibleSet, OrthantObjective, StepMatrix};
use crate::num;
use crate::scalar::HingeForm;
use crate::Result;

/// Which solver produced the step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerMethod {
    Support,
    Golden,
    WaterFill,
    ExactLp,
    ProjectedGradient,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerSolution {
    pub x: Vec<f64>,
    pub method: InnerMethod,
    /// False when an iterative solver hit its iteration cap.
    pub converged: bool,
}

const GOLDEN_TOL: f64 = 1e-13;

/// Maximizer of a concave `h` on `[0, 1]`: golden section plus the given
/// kink candidates; ties go to the smaller `x`.
pub(crate) fn maximize_unit(h: &dyn Fn(f64) -> f64, kinks: &[f64]) -> f64 {
    let r = 0.5 * (num::sqrt(5.0) - 1.0);
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (h(x1), h(x2));
    while b - a > GOLDEN_TOL {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = h(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = h(x2);
        }
    }
    let mut cands: Vec<f64> = vec![0.0, 1.0, 0.5 * (a + b)];
    cands.extend(kinks.iter().copied().filter(|k| *k > 0.0 && *k < 1.0));
    cands.sort_by(|p, q| p.partial_cmp(q).expect("finite candidates"));
    let mut best = cands[0];
    let mut best_val = h(best);
    for &c in &cands[1..] {
        let v = h(c);
        if v > best_val + 1e-15 * best_val.abs().max(1.0) {
            best = c;
            best_val = v;
        }
    }
    best
}

fn coord_kinks(coord: &Coord) -> Vec<f64> {
    match coord {
        Coord::Scalar(f) => f.kinks(),
        Coord::Smoothed(_) => Vec::new(),
    }
}

/// `x_j` at which coordinate `j` reaches slope level `lo` (in u-space).
fn x_of(level: f64, u: f64, w: f64) -> f64 {
    if level.is_infinite() {
        f64::INFINITY
    } else {
        ((level - u) / w).max(0.0)
    }
}

/// Exact maximization of `sum_j psi_j(u_j + w_j x_j)` over the simplex or
/// the box, through the level sets of the coordinates.
fn waterfill(coords: &[Coord], u: &[f64], w: &[f64], simplex: bool) -> Vec<f64> {
    let k = w.len();
    let active: Vec<usize> = (0..k).filter(|&j| w[j] > 0.0).collect();
    let xs = |lam: f64| -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![0.0; k];
        let mut hi = vec![0.0; k];
        for &j in &active {
            let (a, b) = coords[j].level_set(lam / w[j]);
            lo[j] = x_of(a, u[j], w[j]);
            hi[j] = x_of(b, u[j], w[j]);
        }
        (lo, hi)
    };
    if !simplex {
        let (lo, _) = xs(0.0);
        return lo.into_iter().map(|v| v.min(1.0)).collect();
    }
    let (lo0, _) = xs(0.0);
    if lo0.iter().sum::<f64>() <= 1.0 {
        return lo0;
    }
    let lam_max = active.iter().map(|&j| w[j] * coords[j].supergrad(u[j]).hi).fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, lam_max);
    for _ in 0..200 {
        if hi - lo <= 1e-16 * lam_max {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if xs(mid).0.iter().sum::<f64>() > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (mut x, hi_x) = xs(hi);
    let (lo_x, _) = xs(lo);
    let mut rest = 1.0 - x.iter().sum::<f64>();
    for j in 0..k {
        if rest <= 0.0 {
            break;
        }
        let cap = hi_x[j].max(lo_x[j]);
        let add = (cap - x[j]).max(0.0).min(rest);
        x[j] += add;
        rest -= add;
    }
    x.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    x
}

/// Dense tableau simplex for `max c^T z` subject to `M z <= rhs`, `z >= 0`
/// with `rhs >= 0`, using Bland's rule.
pub(crate) fn simplex_max(c: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let nv = c.len();
    let nr = rows.len();
    let width = nv + nr + 1;
    let mut t = vec![0.0; (nr + 1) * width];
    for (i, row) in rows.iter().enumerate() {
        t[i * width..i * width + nv].copy_from_slice(row);
        t[i * width + nv + i] = 1.0;
        t[i * width + width - 1] = rhs[i].max(0.0);
    }
    let obj = nr * width;
    for j in 0..nv {
        t[obj + j] = -c[j];
    }
    let mut basis: Vec<usize> = (nv..nv + nr).collect();
    let eps = 1e-12;
    for _ in 0..50_000 {
        let Some(enter) = (0..nv + nr).find(|&j| t[obj + j] < -eps) else {
            let mut z = vec![0.0; nv];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < nv {
                    z[bv] = t[i * width + width - 1];
                }
            }
            return Some(z);
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..nr {
            let a = t[i * width + enter];
            if a > eps {
                let ratio = t[i * width + width - 1] / a;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis[i] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let r = leave?;
        let piv = t[r * width + enter];
        for j in 0..width {
            t[r * width + j] /= piv;
        }
        for i in 0..=nr {
            if i == r {
                continue;
            }
            let f = t[i * width + enter];
            if f != 0.0 {
                for j in 0..width {
                    t[i * width + j] -= f * t[r * width + j];
                }
            }
        }
        basis[r] = enter;
    }
    None
}

/// Exact coordinate maximization for piecewise-linear coordinates.
///
/// Each hinge `l (u_i - b)_+` gets an excess variable `e >= 0` with
/// `(A x)_i - e <= (b - u_i)_+`, which is tight at the optimum.
fn lp_coord_max(forms: &[HingeForm], u: &[f64], a: &StepMatrix, f: &FeasibleSet) -> Option<Vec<f64>> {
    let k = f.dim();
    let cols: Vec<Vec<f64>> = (0..k).map(|j| a.column(j)).collect();
    let nh: usize = forms.iter().map(|h| h.hinges.len()).sum();
    let nv = k + nh;
    let mut c = vec![0.0; nv];
    for (j, col) in cols.iter().enumerate() {
        c[j] = forms.iter().zip(col).map(|(h, aij)| h.s0 * aij).sum();
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut e = k;
    for (i, form) in forms.iter().enumerate() {
        for &(b, l) in &form.hinges {
            let mut row = vec![0.0; nv];
            for j in 0..k {
                row[j] = cols[j][i];
            }
            row[e] = -1.0;
            c[e] = -l;
            rows.push(row);
            rhs.push(num::pos(b - u[i]));
            e += 1;
        }
    }
    match f {
        FeasibleSet::Simplex { .. } => {
            let mut row = vec![0.0; nv];
            row[..k].iter_mut().for_each(|v| *v = 1.0);
            rows.push(row);
            rhs.push(1.0);
        }
        _ => {
            for j in 0..k {
                let mut row = vec![0.0; nv];
                row[j] = 1.0;
                rows.push(row);
                rhs.push(1.0);
            }
        }
    }
    let z = simplex_max(&c, &rows, &rhs)?;
    let mut x: Vec<f64> = z[..k].iter().map(|v| v.max(0.0)).collect();
    let s: f64 = x.iter().sum();
    if matches!(f, FeasibleSet::Simplex { .. }) && s > 1.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
    Some(x)
}

/// Euclidean projection onto `F`.
pub(crate) fn project(f: &FeasibleSet, x: &[f64]) -> Vec<f64> {
    match f {
        FeasibleSet::Simplex { .. } => {
            let pos: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
            if pos.iter().sum::<f64>() <= 1.0 {
                return pos;
            }
            let mut s: Vec<f64> = x.to_vec();
            s.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
            let mut cum = 0.0;
            let mut tau = 0.0;
            for (i, v) in s.iter().enumerate() {
                cum += v;
                let t = (cum - 1.0) / (i + 1) as f64;
                if v - t > 0.0 {
                    tau = t;
                }
            }
            x.iter().map(|v| (v - tau).max(0.0)).collect()
        }
        _ => x.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
    }
}

fn add_scaled(u: &[f64], inc: &[f64]) -> Vec<f64> {
    u.iter().zip(inc).map(|(a, b)| a + b).collect()
}

/// Projected gradient ascent with backtracking, started from the best
/// vertex and stopped on a Frank-Wolfe gap below `1e-13`.
fn projected_gradient(obj: &OrthantObjective, u: &[f64], a: &StepMatrix, f: &FeasibleSet) -> Result<(Vec<f64>, bool)> {
    let h = |x: &[f64]| obj.value(&add_scaled(u, &a.apply(x)));
    let k = f.dim();
    let mut x = vec![0.0; k];
    let mut hx = h(&x)?;
    for v in f.unit_vertices() {
        let hv = h(&v)?;
        if hv > hx {
            hx = hv;
            x = v;
        }
    }
    let grad = |x: &[f64]| -> Result<Vec<f64>> { Ok(a.transpose_apply(&obj.min_supergrad(&add_scaled(u, &a.apply(x)))?)) };
    let mut eta = 1.0;
    for _ in 0..20_000 {
        let g = grad(&x)?;
        let (sup, _) = f.support(&g)?;
        if sup - dot(&g, &x) <= 1e-13 * (1.0 + hx.abs()) {
            return Ok((x, true));
        }
        let step: Vec<f64> = x.iter().zip(&g).map(|(p, q)| p + eta * q).collect();
        let d: Vec<f64> = project(f, &step).iter().zip(&x).map(|(p, q)| p - q).collect();
        if dot(&g, &d) <= 0.0 {
            return Ok((x, false));
        }
        // Exact line search on the chord: the directional derivative is
        // nonincreasing along it.
        let at = |tau: f64| -> Vec<f64> { x.iter().zip(&d).map(|(p, q)| p + tau * q).collect() };
        let mut tau = 1.0;
        if dot(&grad(&at(1.0))?, &d) < 0.0 {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if dot(&grad(&at(mid))?, &d) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            tau = lo;
            eta *= 0.5;
        } else {
            eta *= 2.0;
        }
        if tau == 0.0 {
            return Ok((x, false));
        }
        x = project(f, &at(tau));
        hx = h(&x)?;
    }
    Ok((x, false))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// `argmax_{x in F} psi(u + A x)`, dispatching to the exact solver that
/// fits the structure.
pub fn coordinate_max(obj: &OrthantObjective, u: &[f64], a: &StepMatrix, f: &FeasibleSet) -> Result<InnerSolution> {
    if f.dim() == 1 {
        let col = a.column(0);
        let mut kinks = Vec::new();
        if let Some(sep) = obj.as_separable() {
            for (i, coord) in sep.coords.iter().enumerate() {
                if col[i] > 0.0 {
                    kinks.extend(coord_kinks(coord).into_iter().map(|b| (b - u[i]) / col[i]));
                }
            }
        }
        let h = |x: f64| obj.value(&add_scaled(u, &a.apply(&[x]))).unwrap_or(f64::NEG_INFINITY);
        let x = maximize_unit(&h, &kinks);
        return Ok(InnerSolution { x: vec![x], method: InnerMethod::Golden, converged: true });
    }
    if let (Some(sep), StepMatrix::Diag { w }) = (obj.as_separable(), a) {
        let simplex = matches!(f, FeasibleSet::Simplex { .. });
        return Ok(InnerSolution { x: waterfill(&sep.coords, u, w, simplex), method: InnerMethod::WaterFill, converged: true });
    }
    if let Some(sep) = obj.as_separable() {
        let forms: Option<Vec<HingeForm>> = sep.coords.iter().map(|c| c.as_scalar().and_then(|s| s.hinge_form())).collect();
        if let Some(forms) = forms {
            if let Some(x) = lp_coord_max(&forms, u, a, f) {
                return Ok(InnerSolution { x, method: InnerMethod::ExactLp, converged: true });
            }
        }
    }
    let (x, converged) = projected_gradient(obj, u, a, f)?;
    Ok(InnerSolution { x, method: InnerMethod::ProjectedGradient, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::SeparableObjective;
    use crate::scalar::ScalarConcave;

    fn brute(obj: &OrthantObjective, u: &[f64], a: &StepMatrix) -> f64 {
        // Grid over the 2-simplex.
        let mut best = f64::NEG_INFINITY;
        let n = 400;
        for i in 0..=n {
            for j in 0..=(n - i) {
                let x = [i as f64 / n as f64, j as f64 / n as f64];
                best = best.max(obj.value(&add_scaled(u, &a.apply(&x))).unwrap());
            }
        }
        best
    }

    #[test]
    fn simplex_lp_small() {
        // max x + y s.t. x + 2y <= 2, 3x + y <= 3 -> (0.8, 0.6).
        let z = simplex_max(&[1.0, 1.0], &[vec![1.0, 2.0], vec![3.0, 1.0]], &[2.0, 3.0]).unwrap();
        assert!((z[0] - 0.8).abs() < 1e-12 && (z[1] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn waterfill_matches_grid() {
        let obj = OrthantObjective::Separable(SeparableObjective::new(vec![
            ScalarConcave::cap().into(),
            ScalarConcave::log1p().into(),
        ]));
        let a = StepMatrix::Diag { w: vec![0.8, 1.5] };
        let u = [0.5, 0.2];
        let s = coordinate_max(&obj, &u, &a, &FeasibleSet::Simplex { k: 2 }).unwrap();
        assert_eq!(s.method, InnerMethod::WaterFill);
        let got = obj.value(&add_scaled(&u, &a.apply(&s.x))).unwrap();
        assert!(got >= brute(&obj, &u, &a) - 1e-9);
    }

    #[test]
    fn exact_lp_matches_grid() {
        let obj = OrthantObjective::Separable(SeparableObjective::new(vec![
            ScalarConcave::linear(1.0).into(),
            ScalarConcave::penalty(2.0, 1.0).unwrap().into(),
            ScalarConcave::penalty(2.0, 1.0).unwrap().into(),
        ]));
        let a = StepMatrix::Stacked { c: vec![1.0, 0.7], b: vec![vec![0.9, 0.2], vec![0.1, 0.8]] };
        let u = [0.0, 0.6, 0.5];
        let s = coordinate_max(&obj, &u, &a, &FeasibleSet::Simplex { k: 2 }).unwrap();
        assert_eq!(s.method, InnerMethod::ExactLp);
        let got = obj.value(&add_scaled(&u, &a.apply(&s.x))).unwrap();
        assert!(got >= brute(&obj, &u, &a) - 1e-12, "{got}");
    }

    #[test]
    fn projection_onto_simplex() {
        let p = project(&FeasibleSet::Simplex { k: 3 }, &[0.8, 0.6, -0.2]);
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.4).abs() < 1e-15 && p[2] == 0.0);
        assert_eq!(project(&FeasibleSet::Simplex { k: 2 }, &[0.2, 0.3]), vec![0.2, 0.3]);
    }

    #[test]
    fn unit_max_hits_kink() {
        let h = |x: f64| x.min(0.3) - 0.1 * x;
        let x = maximize_unit(&h, &[0.3]);
        assert_eq!(x, 0.3);
    }
}
