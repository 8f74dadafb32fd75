//! Vector-valued adaptive panel refinement shared by the quadrature drivers
//! and the Chebyshev interpolation tables.
//!
//! Integrand nodes of a refinement batch are evaluated in parallel, but the
//! choice of panels to split and every reduction run in a fixed order, so the
//! output does not depend on the worker count.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::rules::{chebyshev_nodes, gk21_nodes, gk21_weights};
use crate::error::Result;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Number of Chebyshev nodes per table panel.
pub const CHEB_N: usize = 16;

/// Panels narrower than this fraction of their position are never split.
const MIN_RELATIVE_WIDTH: f64 = 1e-13;

/// Largest number of panels split per refinement sweep.
const BATCH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    /// Gauss-Kronrod 10/21 with the QUADPACK error heuristic.
    Kronrod,
    /// Interpolation at first-kind Chebyshev points; error from the tail
    /// coefficients in the L1 sense.
    Chebyshev,
}

impl Rule {
    fn nodes(self, a: f64, b: f64) -> Vec<f64> {
        match self {
            Rule::Kronrod => gk21_nodes(a, b).to_vec(),
            Rule::Chebyshev => {
                let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
                chebyshev_nodes(CHEB_N).into_iter().map(|x| c + h * x).collect()
            }
        }
    }

    fn len(self) -> usize {
        match self {
            Rule::Kronrod => 21,
            Rule::Chebyshev => CHEB_N,
        }
    }
}

/// Componentwise acceptance: `err_i ≤ rel · max(scale_i, floor · max_j scale_j) + abs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub floor: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self { rel, floor: 1.0, abs: 0.0 }
    }

    pub fn allowed(&self, scale: &[f64]) -> Vec<f64> {
        let top = scale.iter().cloned().fold(0.0, f64::max);
        scale.iter().map(|s| self.rel * s.max(self.floor * top) + self.abs).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub integral: Vec<Complex64>,
    pub error: Vec<f64>,
    /// ∫|f_i| over the panel (Chebyshev rule only).
    pub l1: Vec<f64>,
    /// Chebyshev coefficients per component (Chebyshev rule only).
    pub coeffs: Vec<Vec<Complex64>>,
}

impl Panel {
    fn splittable(&self) -> bool {
        let w = self.b - self.a;
        w > MIN_RELATIVE_WIDTH * self.a.abs().max(self.b.abs()).max(1e-300)
    }
}

/// Adaptive mesh over a set of intervals, kept sorted by position.
pub struct Mesh<'f, F> {
    f: &'f F,
    pub dim: usize,
    pub rule: Rule,
    pub panels: Vec<Panel>,
    pub nodes_used: usize,
    pub budget: usize,
}

impl<'f, F> Mesh<'f, F>
where
    F: Fn(f64) -> Result<Vec<Complex64>> + Sync,
{
    pub fn new(f: &'f F, dim: usize, rule: Rule, budget: usize) -> Self {
        Self { f, dim, rule, panels: Vec::new(), nodes_used: 0, budget }
    }

    /// Node evaluations still affordable.
    pub fn remaining(&self) -> usize {
        self.budget.saturating_sub(self.nodes_used)
    }

    /// Evaluates a batch of intervals in parallel.
    pub fn evaluate(&mut self, intervals: &[(f64, f64)]) -> Result<Vec<Panel>> {
        let rule = self.rule;
        let nodes: Vec<f64> = intervals.iter().flat_map(|&(a, b)| rule.nodes(a, b)).collect();
        let f = self.f;
        let values = nodes.par_iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        self.nodes_used += nodes.len();
        let n = rule.len();
        Ok(intervals
            .iter()
            .enumerate()
            .map(|(p, &(a, b))| reduce(rule, self.dim, a, b, &values[p * n..(p + 1) * n]))
            .collect())
    }

    /// Appends intervals (which must lie beyond the current mesh, ascending).
    pub fn extend(&mut self, intervals: &[(f64, f64)]) -> Result<()> {
        let panels = self.evaluate(intervals)?;
        self.panels.extend(panels);
        Ok(())
    }

    /// Integral and error summed in position order.
    pub fn totals(&self) -> (Vec<Complex64>, Vec<f64>) {
        let mut value = vec![ZERO; self.dim];
        let mut error = vec![0.0; self.dim];
        for p in &self.panels {
            for i in 0..self.dim {
                value[i] += p.integral[i];
                error[i] += p.error[i];
            }
        }
        (value, error)
    }

    /// Scale against which errors are judged.
    pub fn scale(&self) -> Vec<f64> {
        match self.rule {
            Rule::Kronrod => self.totals().0.iter().map(|v| v.norm()).collect(),
            Rule::Chebyshev => {
                let mut s = vec![0.0; self.dim];
                for p in &self.panels {
                    for i in 0..self.dim {
                        s[i] += p.l1[i];
                    }
                }
                s
            }
        }
    }

    /// Splits the worst panels until the tolerance is met, the budget runs
    /// out, or no panel can be split further. Returns whether it converged.
    pub fn refine(&mut self, tol: &Tolerance) -> Result<bool> {
        self.refine_with(|scale| tol.allowed(scale))
    }

    /// As [`Mesh::refine`], with the per-component allowance computed from
    /// the current scale by `target`.
    pub fn refine_with<T>(&mut self, target: T) -> Result<bool>
    where
        T: Fn(&[f64]) -> Vec<f64>,
    {
        loop {
            let allowed = target(&self.scale());
            let (_, err) = self.totals();
            if err.iter().zip(&allowed).all(|(e, a)| e <= a) {
                return Ok(true);
            }
            // Rank panels by their worst error relative to the allowance.
            let mut ranked: Vec<(f64, usize)> = self
                .panels
                .iter()
                .enumerate()
                .filter(|(_, p)| p.splittable())
                .map(|(idx, p)| {
                    let score = p
                        .error
                        .iter()
                        .zip(&allowed)
                        .map(|(e, a)| if *a > 0.0 { e / a } else if *e > 0.0 { f64::INFINITY } else { 0.0 })
                        .fold(0.0, f64::max);
                    (score, idx)
                })
                .filter(|(score, _)| *score > 0.0)
                .collect();
            if ranked.is_empty() {
                return Ok(false);
            }
            ranked.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
            // Only panels comparable to the worst one share its batch.
            let cut = ranked[0].0 * 1e-2;
            ranked.retain(|r| r.0 >= cut);
            let per_split = 2 * self.rule.len();
            let affordable = self.remaining() / per_split;
            let take = ranked.len().min(BATCH).min(affordable);
            if take == 0 {
                return Ok(false);
            }
            let mut chosen: Vec<usize> = ranked[..take].iter().map(|r| r.1).collect();
            chosen.sort_unstable();
            let halves: Vec<(f64, f64)> = chosen
                .iter()
                .flat_map(|&i| {
                    let p = &self.panels[i];
                    let m = 0.5 * (p.a + p.b);
                    [(p.a, m), (m, p.b)]
                })
                .collect();
            let mut fresh = self.evaluate(&halves)?.into_iter();
            let mut next = Vec::with_capacity(self.panels.len() + take);
            let mut pick = chosen.iter().peekable();
            for (i, p) in self.panels.drain(..).enumerate() {
                if pick.peek() == Some(&&i) {
                    pick.next();
                    next.push(fresh.next().expect("left half"));
                    next.push(fresh.next().expect("right half"));
                } else {
                    next.push(p);
                }
            }
            self.panels = next;
        }
    }
}

fn reduce(rule: Rule, dim: usize, a: f64, b: f64, values: &[Vec<Complex64>]) -> Panel {
    match rule {
        Rule::Kronrod => reduce_kronrod(dim, a, b, values),
        Rule::Chebyshev => reduce_chebyshev(dim, a, b, values),
    }
}

fn reduce_kronrod(dim: usize, a: f64, b: f64, values: &[Vec<Complex64>]) -> Panel {
    let (wk, wg) = gk21_weights();
    let h = 0.5 * (b - a);
    let mut integral = vec![ZERO; dim];
    let mut error = vec![0.0; dim];
    for i in 0..dim {
        let mut k = ZERO;
        let mut g = ZERO;
        let mut abs = 0.0;
        for j in 0..21 {
            let v = values[j][i];
            k += wk[j] * v;
            g += wg[j] * v;
            abs += wk[j] * v.norm();
        }
        let mean = k * 0.5;
        let asc: f64 = (0..21).map(|j| wk[j] * (values[j][i] - mean).norm()).sum();
        let (k, g, abs, asc) = (k * h, g * h, abs * h.abs(), asc * h.abs());
        let mut e = (k - g).norm();
        if asc != 0.0 && e != 0.0 {
            e = asc * (200.0 * e / asc).powf(1.5).min(1.0);
        }
        if abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            e = e.max(50.0 * f64::EPSILON * abs);
        }
        integral[i] = k;
        error[i] = e;
    }
    Panel { a, b, integral, error, l1: vec![0.0; dim], coeffs: Vec::new() }
}

fn reduce_chebyshev(dim: usize, a: f64, b: f64, values: &[Vec<Complex64>]) -> Panel {
    let n = CHEB_N;
    let h = 0.5 * (b - a);
    let x = chebyshev_nodes(n);
    let theta: Vec<f64> = x.iter().map(|x| x.acos()).collect();
    let mut integral = vec![ZERO; dim];
    let mut error = vec![0.0; dim];
    let mut l1 = vec![0.0; dim];
    let mut coeffs = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut c = vec![ZERO; n];
        for (m, cm) in c.iter_mut().enumerate() {
            let mut acc = ZERO;
            for j in 0..n {
                acc += values[j][i] * (m as f64 * theta[j]).cos();
            }
            *cm = acc * (2.0 / n as f64);
        }
        c[0] *= 0.5;
        let mut q = ZERO;
        for (m, cm) in c.iter().enumerate().step_by(2) {
            q += cm * (2.0 / (1.0 - (m * m) as f64));
        }
        integral[i] = q * h;
        error[i] = 2.0 * h * (c[n - 3].norm() + c[n - 2].norm() + c[n - 1].norm());
        l1[i] = h
            * (0..n)
                .map(|j| PI / n as f64 * (1.0 - x[j] * x[j]).sqrt() * values[j][i].norm())
                .sum::<f64>();
        coeffs.push(c);
    }
    Panel { a, b, integral, error, l1, coeffs }
}

/// Clenshaw evaluation of a Chebyshev series at `t ∈ [-1, 1]`.
pub fn clenshaw(c: &[Complex64], t: f64) -> Complex64 {
    let mut b1 = ZERO;
    let mut b2 = ZERO;
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c[0] + t * b1 - b2
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums; returns
/// the last two diagonal estimates.
pub fn wynn_epsilon(s: &[Complex64]) -> Option<(Complex64, Complex64)> {
    let n = s.len();
    if n < 3 {
        return None;
    }
    // Column-wise table; keep the latest even-column entry at each stage.
    let mut prev = vec![ZERO; n + 1];
    let mut cur: Vec<Complex64> = s.to_vec();
    let mut best = Vec::new();
    let mut col = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let diff = cur[j + 1] - cur[j];
            let base = if col == 0 { ZERO } else { prev[j + 1] };
            if diff.norm() == 0.0 {
                // Converged exactly; propagate the value.
                next.push(Complex64::new(f64::INFINITY, 0.0));
            } else {
                next.push(base + 1.0 / diff);
            }
        }
        prev = cur;
        cur = next;
        col += 1;
        if col % 2 == 0 {
            if let Some(v) = cur.last() {
                if v.re.is_finite() && v.im.is_finite() {
                    best.push(*v);
                }
            }
        }
    }
    match best.len() {
        0 => None,
        1 => Some((best[0], s[n - 1])),
        k => Some((best[k - 1], best[k - 2])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar<G: Fn(f64) -> f64 + Sync>(g: G) -> impl Fn(f64) -> Result<Vec<Complex64>> + Sync {
        move |x| Ok(vec![Complex64::new(g(x), 0.0)])
    }

    #[test]
    fn kronrod_refines_an_endpoint_singularity() {
        let f = scalar(|x: f64| 1.0 / x.sqrt());
        let mut mesh = Mesh::new(&f, 1, Rule::Kronrod, 20_000);
        mesh.extend(&[(0.0, 1.0)]).unwrap();
        assert!(mesh.refine(&Tolerance::relative(1e-10)).unwrap());
        let (v, _) = mesh.totals();
        assert!((v[0].re - 2.0).abs() < 1e-9);
    }

    #[test]
    fn chebyshev_table_interpolates() {
        let f = scalar(|x: f64| (3.0 * x).sin() * (-x).exp());
        let mut mesh = Mesh::new(&f, 1, Rule::Chebyshev, 20_000);
        mesh.extend(&[(0.0, 2.0), (2.0, 6.0)]).unwrap();
        assert!(mesh.refine(&Tolerance::relative(1e-12)).unwrap());
        for p in &mesh.panels {
            let (c, h) = (0.5 * (p.a + p.b), 0.5 * (p.b - p.a));
            for t in [-0.9, -0.3, 0.1, 0.77] {
                let x = c + h * t;
                let v = clenshaw(&p.coeffs[0], t);
                assert!((v.re - (3.0 * x).sin() * (-x).exp()).abs() < 1e-11);
            }
        }
        let exact = {
            // ∫ e^{-x} sin 3x dx = -e^{-x}(sin 3x + 3 cos 3x)/10
            let anti = |x: f64| -(-x).exp() * ((3.0 * x).sin() + 3.0 * (3.0 * x).cos()) / 10.0;
            anti(6.0) - anti(0.0)
        };
        assert!((mesh.totals().0[0].re - exact).abs() < 1e-12);
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let mut s = Vec::new();
        let mut acc = 0.0;
        for k in 1..=20 {
            acc += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            s.push(Complex64::new(acc, 0.0));
        }
        let (best, _) = wynn_epsilon(&s).unwrap();
        assert!((best.re - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn batch_split_order_is_deterministic() {
        let f = scalar(|x: f64| (50.0 * x).cos() / (1.0 + x * x));
        let run = || {
            let mut mesh = Mesh::new(&f, 1, Rule::Kronrod, 20_000);
            mesh.extend(&[(0.0, 10.0)]).unwrap();
            mesh.refine(&Tolerance::relative(1e-12)).unwrap();
            mesh.totals().0[0]
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(run);
        assert_eq!(one, many);
    }
}
