//! Weighted linear quantile regression.
//!
//! [`solve_qr`] is a Frisch–Newton primal–dual interior-point method with
//! Mehrotra predictor–corrector steps applied to the bounded dual of the
//! quantile regression linear program,
//!
//! ```text
//! max_a  y'a   s.t.  X'a = (1 - tau) X'w,  0 <= a <= w,
//! ```
//!
//! whose multipliers on the equality constraints are the (negated)
//! regression coefficients. Once the duality gap is small the iterate is
//! rounded to the basic solution through the `P` observations with the
//! smallest absolute residuals; if that vertex passes the exact subgradient
//! optimality test it is returned, otherwise iterations continue until the
//! relative duality gap drops below `1e-9`.
//!
//! [`oracle_qr`] enumerates all basic solutions of tiny problems and is the
//! reference the solver is tested against.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::error::ErrorKind;

/// Relative duality gap at which the interior-point loop stops.
pub const GAP_TOL: f64 = 1e-9;
/// Iteration cap of the interior-point loop.
pub const MAX_ITER: usize = 100;
/// Numerical rank threshold on `sigma_min / sigma_max` of the design.
pub const RANK_TOL: f64 = 1e-10;

const ROUNDING_GAP: f64 = 1e-5;
const STEP_FRACTION: f64 = 0.99995;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QrError {
    #[error("design matrix is numerically rank deficient (rank {rank} < {p})")]
    RankDeficient { rank: usize, p: usize },
    #[error("quantile regression needs n >= P observations (n = {n}, P = {p})")]
    DegenerateProblem { n: usize, p: usize },
    #[error("quantile index {0} outside (0, 1)")]
    InvalidTau(f64),
    #[error("weights must be finite and positive")]
    InvalidWeights,
    #[error("non-finite data in quantile regression")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("oracle limited to n <= 14 and P <= 3 (n = {n}, P = {p})")]
    GuardExceeded { n: usize, p: usize },
    #[error("no nonsingular P-subset of observations")]
    NoNonsingularSubset,
}

impl QrError {
    pub(crate) fn kind(&self) -> ErrorKind {
        match self {
            QrError::RankDeficient { .. } | QrError::NoNonsingularSubset => ErrorKind::Numerical,
            QrError::InvalidTau(_) | QrError::GuardExceeded { .. } => ErrorKind::Usage,
            _ => ErrorKind::Data,
        }
    }
}

/// The check function `rho_tau(u) = (tau - 1{u <= 0}) u`.
#[inline]
pub fn check_loss(tau: f64, u: f64) -> f64 {
    if u > 0.0 {
        tau * u
    } else {
        (tau - 1.0) * u
    }
}

/// A weighted quantile regression instance borrowing its data.
#[derive(Debug, Clone, Copy)]
pub struct QrProblem<'a> {
    x: &'a DMatrix<f64>,
    y: &'a [f64],
    tau: f64,
    weights: Option<&'a [f64]>,
}

impl<'a> QrProblem<'a> {
    /// Validates shapes, finiteness, `tau` and `n >= P`. Rank is checked by the solvers.
    pub fn new(x: &'a DMatrix<f64>, y: &'a [f64], tau: f64) -> Result<Self, QrError> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(QrError::InvalidTau(tau));
        }
        let (n, p) = x.shape();
        if y.len() != n {
            return Err(QrError::DimensionMismatch(format!("X has {n} rows, y has {}", y.len())));
        }
        if p == 0 || n < p {
            return Err(QrError::DegenerateProblem { n, p });
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(QrError::NonFinite);
        }
        Ok(Self { x, y, tau, weights: None })
    }

    pub fn with_weights(mut self, weights: &'a [f64]) -> Result<Self, QrError> {
        if weights.len() != self.n() {
            return Err(QrError::DimensionMismatch(format!("{} weights for {} rows", weights.len(), self.n())));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(QrError::InvalidWeights);
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn x(&self) -> &DMatrix<f64> {
        self.x
    }

    pub fn y(&self) -> &[f64] {
        self.y
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights.map_or(1.0, |w| w[i])
    }

    pub fn residuals(&self, coef: &DVector<f64>) -> Vec<f64> {
        let fitted = self.x * coef;
        self.y.iter().zip(fitted.iter()).map(|(y, f)| y - f).collect()
    }

    /// `sum_i w_i rho_tau(y_i - x_i' coef)`.
    pub fn objective(&self, coef: &DVector<f64>) -> f64 {
        self.residuals(coef)
            .iter()
            .enumerate()
            .map(|(i, r)| self.weight(i) * check_loss(self.tau, *r))
            .sum()
    }

    /// Numerical rank of `X` from the singular values of its R factor.
    pub fn rank(&self) -> usize {
        numerical_rank(self.x)
    }
}

pub(crate) fn numerical_rank(x: &DMatrix<f64>) -> usize {
    let p = x.ncols();
    let r = if x.nrows() > p { x.clone().qr().r() } else { x.clone() };
    let sv = r.singular_values();
    let max = sv.max();
    if max == 0.0 || !max.is_finite() {
        return 0;
    }
    sv.iter().filter(|s| **s >= RANK_TOL * max).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QrSolution {
    pub coef: DVector<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves a weighted quantile regression.
pub fn solve_qr(problem: &QrProblem<'_>) -> Result<QrSolution, QrError> {
    let rank = problem.rank();
    if rank < problem.p() {
        return Err(QrError::RankDeficient { rank, p: problem.p() });
    }
    solve_full_rank(problem)
}

/// [`solve_qr`] for a design whose rank the caller has already verified.
pub(crate) fn solve_full_rank(problem: &QrProblem<'_>) -> Result<QrSolution, QrError> {
    let (n, p) = (problem.n(), problem.p());
    if n == p {
        let coef = problem.x.clone().lu().solve(&DVector::from_column_slice(problem.y)).ok_or(QrError::RankDeficient { rank: p - 1, p })?;
        let objective = problem.objective(&coef);
        return Ok(QrSolution { coef, objective, iterations: 0, converged: true });
    }
    Ok(FrischNewton::new(problem).run())
}

/// Scratch vectors reused across iterations.
struct Work {
    r_p: Vec<f64>,
    r_d: Vec<f64>,
    qinv: Vec<f64>,
    r_xz: Vec<f64>,
    r_sw: Vec<f64>,
    rhs: Vec<f64>,
    scaled: Vec<f64>,
    dx: Vec<f64>,
    dy: DVector<f64>,
    dz: Vec<f64>,
    dw: Vec<f64>,
}

impl Work {
    fn new(n: usize, p: usize) -> Self {
        let v = || vec![0.0; n];
        Self {
            r_p: vec![0.0; p],
            r_d: v(),
            qinv: v(),
            r_xz: v(),
            r_sw: v(),
            rhs: v(),
            scaled: v(),
            dx: v(),
            dy: DVector::zeros(p),
            dz: v(),
            dw: v(),
        }
    }
}

struct FrischNewton<'p, 'a> {
    prob: &'p QrProblem<'a>,
    n: usize,
    p: usize,
    /// column-major `n x p`
    xs: &'p [f64],
    b: Vec<f64>,
    // primal
    x: Vec<f64>,
    s: Vec<f64>,
    // dual
    yd: Vec<f64>,
    z: Vec<f64>,
    wd: Vec<f64>,
}

impl<'p, 'a> FrischNewton<'p, 'a> {
    fn new(prob: &'p QrProblem<'a>) -> Self {
        let (n, p) = (prob.n(), prob.p());
        let xs = prob.x.as_slice();
        let tau = prob.tau;
        let w: Vec<f64> = (0..n).map(|i| prob.weight(i)).collect();
        let x: Vec<f64> = w.iter().map(|wi| (1.0 - tau) * wi).collect();
        let s: Vec<f64> = w.iter().map(|wi| tau * wi).collect();
        let mut fnm = Self { prob, n, p, xs, b: vec![0.0; p], x, s, yd: vec![0.0; p], z: vec![0.0; n], wd: vec![0.0; n] };
        fnm.b = fnm.at_mul(&fnm.x);

        // least-squares start for the dual: X'X yd = -X'y
        let ones = vec![1.0; n];
        let gram = fnm.gram(&ones, &mut vec![0.0; n]);
        let rhs: Vec<f64> = fnm.at_mul(prob.y).iter().map(|v| -v).collect();
        if let Some(ch) = nalgebra::Cholesky::new(gram) {
            fnm.yd = ch.solve(&DVector::from_vec(rhs)).as_slice().to_vec();
        }
        let xy = fnm.a_t_mul(&fnm.yd);
        // r = c - A'yd with c = -y
        let r: Vec<f64> = prob.y.iter().zip(&xy).map(|(y, v)| -y - v).collect();
        let scale = r.iter().map(|v| v.abs()).sum::<f64>() / n as f64;
        let delta = (0.1 * scale).max(1e-8 * (1.0 + prob.y.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
        for ((z, w), r) in fnm.z.iter_mut().zip(fnm.wd.iter_mut()).zip(&r) {
            *z = r.max(0.0) + delta;
            *w = (-r).max(0.0) + delta;
        }
        fnm
    }

    /// `X' v`
    fn at_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.p];
        self.at_mul_into(v, &mut out);
        out
    }

    fn at_mul_into(&self, v: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.col(j).iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    /// `X v`
    fn a_t_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.a_t_mul_into(v, &mut out);
        out
    }

    fn a_t_mul_into(&self, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (j, vj) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.col(j)) {
                *o += a * vj;
            }
        }
    }

    #[inline]
    fn col(&self, j: usize) -> &[f64] {
        &self.xs[j * self.n..(j + 1) * self.n]
    }

    /// `X' diag(d) X`
    fn gram(&self, d: &[f64], scaled: &mut [f64]) -> DMatrix<f64> {
        let p = self.p;
        let mut g = DMatrix::zeros(p, p);
        for j in 0..p {
            for ((sc, a), di) in scaled.iter_mut().zip(self.col(j)).zip(d) {
                *sc = a * di;
            }
            for k in j..p {
                let v: f64 = scaled.iter().zip(self.col(k)).map(|(a, b)| a * b).sum();
                g[(j, k)] = v;
                g[(k, j)] = v;
            }
        }
        g
    }

    fn coef(&self) -> DVector<f64> {
        DVector::from_iterator(self.p, self.yd.iter().map(|v| -v))
    }

    fn gap(&self) -> f64 {
        self.x.iter().zip(&self.z).map(|(a, b)| a * b).sum::<f64>() + self.s.iter().zip(&self.wd).map(|(a, b)| a * b).sum::<f64>()
    }

    fn run(mut self) -> QrSolution {
        let (n, p) = (self.n, self.p);
        let mut best = self.coef();
        let mut best_obj = self.prob.objective(&best);
        let mut iterations = 0;
        let mut converged = false;
        let mut work = Work::new(n, p);

        while iterations < MAX_ITER {
            let coef = self.coef();
            let obj = self.prob.objective(&coef);
            if obj < best_obj {
                best_obj = obj;
                best = coef;
            }
            let gap = self.gap();
            let scale = 1.0 + best_obj.abs();
            if gap <= GAP_TOL * scale {
                converged = true;
                break;
            }
            if gap <= ROUNDING_GAP * scale {
                if let Some((vcoef, vobj)) = certified_vertex(self.prob, &best) {
                    return QrSolution { coef: vcoef, objective: vobj, iterations, converged: true };
                }
            }
            iterations += 1;

            // residuals of the equality constraints
            self.at_mul_into(&self.x, &mut work.r_p);
            for (r, b) in work.r_p.iter_mut().zip(&self.b) {
                *r = b - *r;
            }
            self.a_t_mul_into(&self.yd, &mut work.r_d);
            for i in 0..n {
                work.r_d[i] = -self.prob.y[i] - work.r_d[i] - self.z[i] + self.wd[i];
                work.qinv[i] = 1.0 / (self.z[i] / self.x[i] + self.wd[i] / self.s[i]);
            }
            let Some(chol) = nalgebra::Cholesky::new(self.gram(&work.qinv, &mut work.scaled)) else { break };

            // predictor
            for i in 0..n {
                work.r_xz[i] = -self.x[i] * self.z[i];
                work.r_sw[i] = -self.s[i] * self.wd[i];
            }
            self.direction(&chol, &mut work);
            let (ap, ad) = self.step_lengths(&work.dx, &work.dz, &work.dw, 1.0);
            let mu_aff: f64 = (0..n)
                .map(|i| {
                    let (dx, dz, dw) = (work.dx[i], work.dz[i], work.dw[i]);
                    (self.x[i] + ap * dx) * (self.z[i] + ad * dz) + (self.s[i] - ap * dx) * (self.wd[i] + ad * dw)
                })
                .sum();
            let sigma = (mu_aff / gap).clamp(0.0, 1.0).powi(3);
            let target = sigma * gap / (2 * n) as f64;

            // corrector
            for i in 0..n {
                let (dx, dz, dw) = (work.dx[i], work.dz[i], work.dw[i]);
                work.r_xz[i] = target - self.x[i] * self.z[i] - dx * dz;
                work.r_sw[i] = target - self.s[i] * self.wd[i] + dx * dw;
            }
            self.direction(&chol, &mut work);
            let (ap, ad) = self.step_lengths(&work.dx, &work.dz, &work.dw, STEP_FRACTION);
            for i in 0..n {
                self.x[i] += ap * work.dx[i];
                self.s[i] -= ap * work.dx[i];
                self.z[i] += ad * work.dz[i];
                self.wd[i] += ad * work.dw[i];
            }
            for (y, d) in self.yd.iter_mut().zip(work.dy.iter()) {
                *y += ad * d;
            }
            if !(ap > 0.0 || ad > 0.0) {
                break;
            }
        }

        let coef = self.coef();
        let obj = self.prob.objective(&coef);
        if obj < best_obj {
            best_obj = obj;
            best = coef;
        }
        if let Some((vcoef, vobj)) = certified_vertex(self.prob, &best) {
            return QrSolution { coef: vcoef, objective: vobj, iterations, converged: true };
        }
        if let Some((vcoef, vobj)) = rounded_vertex(self.prob, &best) {
            if vobj < best_obj {
                best = vcoef;
                best_obj = vobj;
            }
        }
        QrSolution { coef: best, objective: best_obj, iterations, converged }
    }

    /// Newton direction for the current residuals in `work`; writes `dx`, `dy`, `dz`, `dw`.
    fn direction(&self, chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>, work: &mut Work) {
        let n = self.n;
        for i in 0..n {
            work.rhs[i] = work.r_d[i] - work.r_xz[i] / self.x[i] + work.r_sw[i] / self.s[i];
            work.scaled[i] = work.rhs[i] * work.qinv[i];
        }
        self.at_mul_into(&work.scaled, work.dy.as_mut_slice());
        for (d, r) in work.dy.iter_mut().zip(&work.r_p) {
            *d += r;
        }
        chol.solve_mut(&mut work.dy);
        self.a_t_mul_into(work.dy.as_slice(), &mut work.dx);
        for i in 0..n {
            let dx = work.qinv[i] * (work.dx[i] - work.rhs[i]);
            work.dx[i] = dx;
            work.dz[i] = (work.r_xz[i] - self.z[i] * dx) / self.x[i];
            work.dw[i] = (work.r_sw[i] + self.wd[i] * dx) / self.s[i];
        }
    }

    fn step_lengths(&self, dx: &[f64], dz: &[f64], dw: &[f64], fraction: f64) -> (f64, f64) {
        let mut ap = f64::INFINITY;
        let mut ad = f64::INFINITY;
        for i in 0..self.n {
            if dx[i] < 0.0 {
                ap = ap.min(-self.x[i] / dx[i]);
            } else if dx[i] > 0.0 {
                ap = ap.min(self.s[i] / dx[i]);
            }
            if dz[i] < 0.0 {
                ad = ad.min(-self.z[i] / dz[i]);
            }
            if dw[i] < 0.0 {
                ad = ad.min(-self.wd[i] / dw[i]);
            }
        }
        ((fraction * ap).min(1.0), (fraction * ad).min(1.0))
    }
}

/// Basic solution through the `P` observations with the smallest absolute
/// residuals at `coef` (skipping rows that are linearly dependent on the
/// ones already chosen). Returns the coefficient, its objective and the
/// chosen rows.
fn vertex_near(prob: &QrProblem<'_>, coef: &DVector<f64>) -> Option<(DVector<f64>, Vec<usize>)> {
    let (n, p) = (prob.n(), prob.p());
    let r = prob.residuals(coef);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| r[a].abs().total_cmp(&r[b].abs()).then(a.cmp(&b)));

    // incremental Gram–Schmidt on candidate rows
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(p);
    let mut rows = Vec::with_capacity(p);
    for &i in &order {
        let xi = prob.x.row(i).transpose();
        let norm = xi.norm();
        if norm == 0.0 {
            continue;
        }
        let mut v = xi.clone();
        for q in &basis {
            let d = q.dot(&v);
            v.axpy(-d, q, 1.0);
        }
        let vn = v.norm();
        if vn > 1e-9 * norm {
            basis.push(v / vn);
            rows.push(i);
            if rows.len() == p {
                break;
            }
        }
    }
    if rows.len() < p {
        return None;
    }
    let xh = DMatrix::from_fn(p, p, |a, b| prob.x[(rows[a], b)]);
    let yh = DVector::from_iterator(p, rows.iter().map(|&i| prob.y[i]));
    let coef = xh.lu().solve(&yh)?;
    coef.iter().all(|v| v.is_finite()).then_some((coef, rows))
}

fn rounded_vertex(prob: &QrProblem<'_>, coef: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let (c, _) = vertex_near(prob, coef)?;
    let obj = prob.objective(&c);
    Some((c, obj))
}

/// The vertex near `coef` if it satisfies the subgradient optimality
/// condition: the multipliers `v_h` solving
/// `X_h' (w_h v_h) = -sum_{i not in h} w_i psi_tau(r_i) x_i` lie in `[tau - 1, tau]`.
fn certified_vertex(prob: &QrProblem<'_>, coef: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let (vcoef, rows) = vertex_near(prob, coef)?;
    let (n, p, tau) = (prob.n(), prob.p(), prob.tau);
    let r = prob.residuals(&vcoef);
    let scale = 1.0 + prob.y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut in_basis = vec![false; n];
    rows.iter().for_each(|&i| in_basis[i] = true);
    let mut g = DVector::zeros(p);
    for i in 0..n {
        if in_basis[i] {
            continue;
        }
        // a non-basic zero residual means a degenerate vertex; let the caller fall back
        if r[i].abs() <= 1e-12 * scale {
            return None;
        }
        let psi = if r[i] > 0.0 { tau } else { tau - 1.0 };
        let wi = prob.weight(i);
        for j in 0..p {
            g[j] -= wi * psi * prob.x[(i, j)];
        }
    }
    let xht = DMatrix::from_fn(p, p, |a, b| prob.x[(rows[b], a)]);
    let u = xht.lu().solve(&g)?;
    let eps = 1e-9;
    let ok = rows.iter().zip(u.iter()).all(|(&i, ui)| {
        let v = ui / prob.weight(i);
        v >= tau - 1.0 - eps && v <= tau + eps
    });
    ok.then(|| {
        let obj = prob.objective(&vcoef);
        (vcoef, obj)
    })
}

/// Exhaustive search over basic solutions. Limited to `n <= 14`, `P <= 3`.
///
/// Every `P`-subset of rows with a nonsingular design block (by the same
/// rank criterion as [`solve_qr`]) is interpolated exactly; the subset with
/// the smallest weighted check objective wins, earlier subsets (in
/// lexicographic order) winning ties within `1e-12` relative.
pub fn oracle_qr(problem: &QrProblem<'_>) -> Result<QrSolution, QrError> {
    let (n, p) = (problem.n(), problem.p());
    if n > 14 || p > 3 {
        return Err(QrError::GuardExceeded { n, p });
    }
    let mut best: Option<(DVector<f64>, f64)> = None;
    let mut count = 0;
    for subset in Combinations::new(n, p) {
        let xh = DMatrix::from_fn(p, p, |a, b| problem.x[(subset[a], b)]);
        if numerical_rank(&xh) < p {
            continue;
        }
        let yh = DVector::from_iterator(p, subset.iter().map(|&i| problem.y[i]));
        let Some(coef) = xh.lu().solve(&yh) else { continue };
        count += 1;
        let obj = problem.objective(&coef);
        match &best {
            Some((_, b)) if obj >= *b - 1e-12 * (1.0 + b.abs()) => {}
            _ => best = Some((coef, obj)),
        }
    }
    let (coef, objective) = best.ok_or(QrError::NoNonsingularSubset)?;
    Ok(QrSolution { coef, objective, iterations: count, converged: true })
}

/// Lexicographic `k`-subsets of `0..n`.
struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self { n, idx: (0..k).collect(), done: k > n }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn ones(n: usize) -> DMatrix<f64> {
        DMatrix::from_element(n, 1, 1.0)
    }

    #[test]
    fn check_loss_values() {
        assert_eq!(check_loss(0.5, 2.0), 1.0);
        assert_eq!(check_loss(0.25, -1.0), 0.75);
        for tau in [0.1, 0.5, 0.9] {
            assert_eq!(check_loss(tau, 0.0), 0.0);
        }
    }

    #[test]
    fn median_of_odd_sample() {
        let x = ones(5);
        let y = [1.0, 2.0, 3.0, 4.0, 5.0];
        let sol = solve_qr(&QrProblem::new(&x, &y, 0.5).unwrap()).unwrap();
        assert!((sol.coef[0] - 3.0).abs() < 1e-9);
        assert!(sol.converged);
    }

    #[test]
    fn lower_quantile_intercept() {
        let x = ones(5);
        let y = [1.0, 2.0, 3.0, 4.0, 5.0];
        let prob = QrProblem::new(&x, &y, 0.3).unwrap();
        let sol = solve_qr(&prob).unwrap();
        assert!((sol.coef[0] - 2.0).abs() < 1e-9, "{}", sol.coef[0]);
        let oracle = oracle_qr(&prob).unwrap();
        assert_eq!(oracle.coef[0], 2.0);
    }

    #[test]
    fn three_point_line() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0]);
        let y = [0.0, 1.0, 4.0];
        let prob = QrProblem::new(&x, &y, 0.5).unwrap();
        let oracle = oracle_qr(&prob).unwrap();
        assert_eq!(oracle.coef.as_slice(), &[0.0, 2.0]);
        assert_eq!(oracle.objective, 0.5);
        let sol = solve_qr(&prob).unwrap();
        assert!((sol.objective - 0.5).abs() < 1e-9);
        assert!((sol.coef[0]).abs() < 1e-8 && (sol.coef[1] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn oracle_intercept_only() {
        let x = ones(3);
        let y = [1.0, 2.0, 3.0];
        assert_eq!(oracle_qr(&QrProblem::new(&x, &y, 0.5).unwrap()).unwrap().coef[0], 2.0);
    }

    #[test]
    fn oracle_guard() {
        let x = ones(15);
        let y = vec![0.0; 15];
        assert_eq!(oracle_qr(&QrProblem::new(&x, &y, 0.5).unwrap()).unwrap_err(), QrError::GuardExceeded { n: 15, p: 1 });
    }

    #[test]
    fn uniform_weights_scale_objective() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.5]);
        let y = [0.3, 1.0, 4.0, 2.0];
        let base = solve_qr(&QrProblem::new(&x, &y, 0.4).unwrap()).unwrap();
        let w = [2.0; 4];
        let doubled = solve_qr(&QrProblem::new(&x, &y, 0.4).unwrap().with_weights(&w).unwrap()).unwrap();
        assert!((doubled.coef.clone() - base.coef.clone()).norm() < 1e-8);
        assert!((doubled.objective - 2.0 * base.objective).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        let y = [0.0, 1.0, 2.0];
        assert!(matches!(solve_qr(&QrProblem::new(&x, &y, 0.5).unwrap()), Err(QrError::RankDeficient { .. })));
        let x = ones(1);
        let x2 = DMatrix::from_element(1, 2, 1.0);
        assert!(matches!(QrProblem::new(&x2, &[1.0], 0.5), Err(QrError::DegenerateProblem { .. })));
        assert!(matches!(QrProblem::new(&x, &[1.0], 1.0), Err(QrError::InvalidTau(_))));
        assert!(matches!(QrProblem::new(&x, &[1.0], 0.5).unwrap().with_weights(&[0.0]), Err(QrError::InvalidWeights)));
        let x = DMatrix::zeros(3, 1);
        assert!(matches!(oracle_qr(&QrProblem::new(&x, &y, 0.5).unwrap()), Err(QrError::NoNonsingularSubset)));
    }

    #[test]
    fn combinations_are_lexicographic() {
        let c: Vec<Vec<usize>> = Combinations::new(4, 2).collect();
        assert_eq!(c, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(Combinations::new(3, 3).count(), 1);
    }

    #[test]
    fn larger_problem_matches_certificate() {
        let mut s = Stream::new(5);
        let n = 300;
        let x = DMatrix::from_fn(n, 4, |_, j| if j == 0 { 1.0 } else { s.normal() });
        let y: Vec<f64> = (0..n).map(|i| x[(i, 1)] - 0.5 * x[(i, 2)] + s.student_t(2.0)).collect();
        for tau in [0.1, 0.5, 0.9] {
            let prob = QrProblem::new(&x, &y, tau).unwrap();
            let sol = solve_qr(&prob).unwrap();
            assert!(sol.converged);
            assert!((prob.objective(&sol.coef) - sol.objective).abs() <= 1e-10 * sol.objective);
            // a small perturbation never improves the objective
            for j in 0..4 {
                for h in [-1e-6, 1e-6] {
                    let mut c = sol.coef.clone();
                    c[j] += h;
                    assert!(prob.objective(&c) >= sol.objective - 1e-10 * sol.objective);
                }
            }
        }
    }
}
