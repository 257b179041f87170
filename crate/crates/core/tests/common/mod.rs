//! Brute-force reference minimizers, written independently of the closed-form
//! library code.
#![allow(dead_code)]

/// Minimum value and all near-minimal candidates of a scalar function.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub value: f64,
    pub minimizers: Vec<f64>,
}

/// Grid scan of `obj` over `[lo, hi]` with spacing `step`, refined by exact
/// evaluation at `candidates` (points where a piecewise quadratic can attain
/// its minimum). Minimizers are candidates within `tie` of the best value.
pub fn scan_1d(obj: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64, candidates: &[f64], tie: f64) -> ScanResult {
    let steps = ((hi - lo) / step).ceil() as usize;
    let mut best = f64::INFINITY;
    let mut best_grid = lo;
    for i in 0..=steps {
        let u = (lo + step * i as f64).min(hi);
        let v = obj(u);
        if v < best {
            best = v;
            best_grid = u;
        }
    }
    let mut refined: Vec<f64> = candidates.iter().copied().filter(|c| *c >= lo && *c <= hi).collect();
    refined.push(best_grid);
    for &c in &refined {
        best = best.min(obj(c));
    }
    let mut minimizers: Vec<f64> = refined.into_iter().filter(|&c| obj(c) <= best + tie).collect();
    minimizers.sort_by(|a, b| a.partial_cmp(b).unwrap());
    minimizers.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    ScanResult { value: best, minimizers }
}

/// Scan interval for a possibly unbounded box: the box itself, or a window
/// around zero and the unconstrained vertex.
fn window(bound: f64, vertex: f64) -> (f64, f64) {
    if bound.is_finite() {
        (-bound, bound)
    } else {
        let r = vertex.abs() + 1.0;
        (-r, r)
    }
}

/// `g·u + (L/2)(u−u_k)² + (α/2)u² + β|u|₀` on `|u| ≤ b`.
pub fn l0_objective(u: f64, g: f64, u_k: f64, l: f64, alpha: f64, beta: f64) -> f64 {
    let d = u - u_k;
    let mut v = g * u + l / 2.0 * d * d + alpha / 2.0 * u * u;
    if u != 0.0 {
        v += beta;
    }
    v
}

pub fn oracle_prox_l0(g: f64, u_k: f64, l: f64, alpha: f64, beta: f64, bound: f64, step: f64) -> ScanResult {
    let vertex = (l * u_k - g) / (l + alpha);
    let (lo, hi) = window(bound, vertex);
    let cands = [0.0, lo, hi, vertex.clamp(lo, hi)];
    scan_1d(|u| l0_objective(u, g, u_k, l, alpha, beta), lo, hi, step, &cands, 1e-10)
}

/// `−q·u + ½u² + s|u|₀` on `|u| ≤ b`.
pub fn oracle_box_threshold(q: f64, s: f64, bound: f64, step: f64) -> ScanResult {
    let obj = |u: f64| -q * u + 0.5 * u * u + if u != 0.0 { s } else { 0.0 };
    let (lo, hi) = window(bound, q);
    let cands = [0.0, lo, hi, q.clamp(lo, hi)];
    scan_1d(obj, lo, hi, step, &cands, 1e-10)
}

pub fn l1_objective(u: f64, g: f64, u_k: f64, l: f64, alpha: f64, gamma: f64) -> f64 {
    let d = u - u_k;
    g * u + l / 2.0 * d * d + alpha / 2.0 * u * u + gamma * u.abs()
}

pub fn oracle_prox_l1(g: f64, u_k: f64, l: f64, alpha: f64, gamma: f64, bound: f64, step: f64) -> ScanResult {
    let w = l + alpha;
    let plus = (l * u_k - g - gamma) / w;
    let minus = (l * u_k - g + gamma) / w;
    let (lo, hi) = window(bound, plus.abs().max(minus.abs()));
    let cands = [0.0, lo, hi, plus.clamp(lo, hi), minus.clamp(lo, hi)];
    scan_1d(|u| l1_objective(u, g, u_k, l, alpha, gamma), lo, hi, step, &cands, 1e-10)
}

pub fn switch_objective(u: [f64; 2], g: [f64; 2], u_k: [f64; 2], l: f64, alpha: f64, beta: f64) -> f64 {
    let mut v = 0.0;
    for i in 0..2 {
        let d = u[i] - u_k[i];
        v += g[i] * u[i] + l / 2.0 * d * d + alpha / 2.0 * u[i] * u[i];
    }
    if u[0] != 0.0 && u[1] != 0.0 {
        v += beta;
    }
    v
}

#[derive(Debug, Clone)]
pub struct Scan2d {
    pub value: f64,
    pub minimizers: Vec<[f64; 2]>,
}

/// 2-D scan: a coarse grid on `[−r, r]²`, fine scans of both axes (where the
/// penalty vanishes), and exact candidates from per-coordinate stationarity.
pub fn oracle_prox_switch(g: [f64; 2], u_k: [f64; 2], l: f64, alpha: f64, beta: f64, grid: f64, axis_step: f64) -> Scan2d {
    let obj = |u: [f64; 2]| switch_objective(u, g, u_k, l, alpha, beta);
    let w = l + alpha;
    let m = [(l * u_k[0] - g[0]) / w, (l * u_k[1] - g[1]) / w];
    let r = m[0].abs().max(m[1].abs()) + 1.0;

    let mut best = f64::INFINITY;
    let mut pts: Vec<[f64; 2]> = vec![m, [0.0, m[1]], [m[0], 0.0], [0.0, 0.0]];
    let n = (2.0 * r / grid).ceil() as usize;
    for i in 0..=n {
        for j in 0..=n {
            let u = [-r + grid * i as f64, -r + grid * j as f64];
            let v = obj(u);
            if v < best {
                best = v;
                pts.push(u);
            }
        }
    }
    let na = (2.0 * r / axis_step).ceil() as usize;
    for axis in 0..2 {
        let mut axis_best = (f64::INFINITY, [0.0; 2]);
        for i in 0..=na {
            let t = -r + axis_step * i as f64;
            let u = if axis == 0 { [t, 0.0] } else { [0.0, t] };
            let v = obj(u);
            if v < axis_best.0 {
                axis_best = (v, u);
            }
        }
        pts.push(axis_best.1);
    }
    for p in &pts {
        best = best.min(obj(*p));
    }
    let minimizers = pts.into_iter().filter(|p| obj(*p) <= best + 1e-10).collect();
    Scan2d { value: best, minimizers }
}
