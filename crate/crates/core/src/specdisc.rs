//! Uniform-grid discretizations of one-dimensional Schrödinger operators.
//!
//! Every operator is stored as a discrete Sturm–Liouville form
//!
//! ```text
//! q(u) = delta * ( sum_e c_e (u_{e+1} - u_e)^2 + sum_j p_j u_j^2 )
//! |u|^2 = delta * sum_j w_j m_j u_j^2
//! ```
//!
//! over the unknown nodes of a [`Grid`]. `c_e` are edge conductances (an
//! edge to an eliminated Dirichlet node couples to the value 0), `p_j` is the
//! onsite part, `w_j` the trapezoid node weight and `m_j` an optional mass.
//! The matrix of `q` is symmetric tridiagonal, and the eigenproblem
//! `K u = lambda W u` is symmetrized by the diagonal similarity `W^{-1/2}`.
//! Keeping the form in difference representation lets Rayleigh quotients and
//! residuals be evaluated without the `1/delta^2` cancellation of the
//! assembled matrix.

use crate::error::{Error, Result};

/// Default absolute tolerance on eigenvalues.
pub const DEFAULT_EIG_TOL: f64 = 1e-12;

/// Cap on inverse iteration steps per eigenvector.
const INVERSE_ITERATION_CAP: usize = 50;

/// Relative tolerance on `<rhs, phi>` accepted by [`constrained_solve`].
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// A uniform grid `lo = t_0 < ... < t_{n-1} = hi`.
///
/// When the grid straddles the origin, 0 is required to be a node; node
/// abscissae are then computed relative to that node so that `node(zero)` is
/// exactly `0.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lo: f64,
    hi: f64,
    n: usize,
    delta: f64,
    zero: Option<usize>,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || hi <= lo {
            return Err(Error::InvalidGrid(format!(
                "need lo < hi, got [{lo}, {hi}]"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 nodes, got {n}"
            )));
        }
        let delta = (hi - lo) / (n - 1) as f64;
        let zero = if lo == 0.0 {
            Some(0)
        } else if hi == 0.0 {
            Some(n - 1)
        } else if lo < 0.0 && hi > 0.0 {
            let i0 = (-lo / delta).round();
            if (lo + i0 * delta).abs() > 1e-9 * delta {
                return Err(Error::InvalidGrid(format!(
                    "0 is not a node of [{lo}, {hi}] with {n} nodes"
                )));
            }
            Some(i0 as usize)
        } else {
            None
        };
        Ok(Grid {
            lo,
            hi,
            n,
            delta,
            zero,
        })
    }

    /// Grid of spacing `delta` covering at least `[-left, right]`, with the
    /// origin on a node. Lengths are rounded up to whole cells.
    pub fn aligned(left: f64, right: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !left.is_finite() || !right.is_finite() || left < 0.0 || right < 0.0 {
            return Err(Error::InvalidGrid(format!(
                "aligned grid needs delta > 0 and non-negative extents, got left={left}, right={right}, delta={delta}"
            )));
        }
        let cells = |len: f64| (len / delta - 1e-9).ceil().max(0.0) as usize;
        let nl = cells(left);
        let nr = cells(right);
        let n = nl + nr + 1;
        if n < 3 {
            return Err(Error::InvalidGrid(format!(
                "aligned grid has only {n} nodes"
            )));
        }
        Ok(Grid {
            lo: -(nl as f64) * delta,
            hi: nr as f64 * delta,
            n,
            delta,
            zero: Some(nl),
        })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Index of the node at the origin, if the grid contains it.
    pub fn zero_index(&self) -> Option<usize> {
        self.zero
    }

    pub fn node(&self, i: usize) -> f64 {
        match self.zero {
            Some(z) => (i as f64 - z as f64) * self.delta,
            None => self.lo + i as f64 * self.delta,
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// Evaluates `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes().map(f).collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }
}

/// Boundary conditions supported by [`build_fd_operator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Dirichlet at both ends: the end nodes are dropped.
    Dirichlet,
    /// `u'(lo) = gamma u(lo)` at `lo = 0` and Dirichlet at `hi`.
    RobinLeft { gamma: f64 },
}

/// Symmetric tridiagonal discrete form on the unknown nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    grid: Grid,
    first: usize,
    edges: Vec<f64>,
    onsite: Vec<f64>,
    weight: Vec<f64>,
}

impl TridiagonalSystem {
    /// Builds a system from its form data. `edges` has one more entry than
    /// `onsite`; its first and last entries couple to the (eliminated)
    /// boundary neighbours and must be 0 when that neighbour does not exist.
    pub fn from_form(
        grid: Grid,
        first: usize,
        edges: Vec<f64>,
        onsite: Vec<f64>,
        weight: Vec<f64>,
    ) -> Result<Self> {
        let m = onsite.len();
        if m < 2 || first + m > grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{m} unknowns starting at node {first} do not fit a grid of {} nodes",
                grid.len()
            )));
        }
        if edges.len() != m + 1 {
            return Err(Error::LengthMismatch {
                expected: m + 1,
                got: edges.len(),
            });
        }
        if weight.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                got: weight.len(),
            });
        }
        if first == 0 && edges[0] != 0.0 {
            return Err(Error::InvalidArgument(
                "left edge couples to a node outside the grid".into(),
            ));
        }
        if first + m == grid.len() && edges[m] != 0.0 {
            return Err(Error::InvalidArgument(
                "right edge couples to a node outside the grid".into(),
            ));
        }
        if let Some(j) = edges
            .iter()
            .chain(onsite.iter())
            .position(|v| !v.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "non-finite form coefficient at position {j}"
            )));
        }
        if weight.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(
                "node weights must be positive".into(),
            ));
        }
        Ok(TridiagonalSystem {
            grid,
            first,
            edges,
            onsite,
            weight,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Grid index of the first unknown.
    pub fn first(&self) -> usize {
        self.first
    }

    /// Number of unknowns.
    pub fn unknowns(&self) -> usize {
        self.onsite.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    /// Grid abscissae of the unknowns.
    pub fn unknown_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.unknowns()).map(move |j| self.grid.node(self.first + j))
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.unknowns())
            .map(|j| self.edges[j] + self.edges[j + 1] + self.onsite[j])
            .collect()
    }

    pub fn offdiag(&self) -> Vec<f64> {
        self.edges[1..self.unknowns()].iter().map(|c| -c).collect()
    }

    /// `K x` for a vector over the unknowns, evaluated in difference form.
    fn apply_form(&self, x: &[f64]) -> Vec<f64> {
        let m = self.unknowns();
        (0..m)
            .map(|j| {
                let left = if j > 0 { x[j] - x[j - 1] } else { x[j] };
                let right = if j + 1 < m { x[j + 1] - x[j] } else { -x[j] };
                self.edges[j] * left - self.edges[j + 1] * right + self.onsite[j] * x[j]
            })
            .collect()
    }

    /// `delta * x^T K x` in difference form.
    fn form_value(&self, x: &[f64]) -> f64 {
        let m = self.unknowns();
        let mut acc = self.edges[0] * x[0] * x[0] + self.edges[m] * x[m - 1] * x[m - 1];
        for j in 0..m {
            acc += self.onsite[j] * x[j] * x[j];
        }
        for j in 1..m {
            let d = x[j] - x[j - 1];
            acc += self.edges[j] * d * d;
        }
        acc * self.grid.delta
    }

    fn restrict(&self, f: &[f64]) -> Vec<f64> {
        f[self.first..self.first + self.unknowns()].to_vec()
    }

    fn extend(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        out[self.first..self.first + x.len()].copy_from_slice(x);
        out
    }
}

/// A tridiagonal form paired with diagonal mass weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedSystem {
    stiffness: TridiagonalSystem,
    mass: Vec<f64>,
}

impl GeneralizedSystem {
    /// `mass` is a grid function (length `grid.len()`); only the entries on
    /// unknown nodes are used, and they must be strictly positive.
    pub fn new(stiffness: TridiagonalSystem, mass: Vec<f64>) -> Result<Self> {
        stiffness.grid.check_len(mass.len())?;
        let first = stiffness.first;
        if let Some(j) = mass[first..first + stiffness.unknowns()]
            .iter()
            .position(|m| !(*m > 0.0) || !m.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "mass must be positive, got {} at node {}",
                mass[first + j],
                first + j
            )));
        }
        Ok(GeneralizedSystem { stiffness, mass })
    }

    pub fn stiffness(&self) -> &TridiagonalSystem {
        &self.stiffness
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }
}

/// Anything that defines a symmetric-definite tridiagonal pencil.
pub trait Spectral {
    fn form(&self) -> &TridiagonalSystem;

    /// Effective diagonal of `W` on the unknowns (node weight times mass).
    fn effective_mass(&self) -> Vec<f64>;
}

impl Spectral for TridiagonalSystem {
    fn form(&self) -> &TridiagonalSystem {
        self
    }

    fn effective_mass(&self) -> Vec<f64> {
        self.weight.clone()
    }
}

impl Spectral for GeneralizedSystem {
    fn form(&self) -> &TridiagonalSystem {
        &self.stiffness
    }

    fn effective_mass(&self) -> Vec<f64> {
        let s = &self.stiffness;
        s.weight
            .iter()
            .zip(&self.mass[s.first..s.first + s.unknowns()])
            .map(|(w, m)| w * m)
            .collect()
    }
}

/// An eigenvalue with its grid eigenfunction.
///
/// `vector` has one entry per grid node (zero on Dirichlet nodes) and unit
/// norm in the discrete `L^2` inner product of the system. `residual` is the
/// mass-weighted norm of `(W^{-1} K - value) vector`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// Finite-difference realization of `-d^2/dt^2 + V` on `grid`.
pub fn build_fd_operator(
    grid: &Grid,
    potential: impl Fn(f64) -> f64,
    bc: Boundary,
) -> Result<TridiagonalSystem> {
    let n = grid.len();
    let h = grid.delta();
    let inv_h2 = 1.0 / (h * h);
    let eval = |i: usize| -> Result<f64> {
        let t = grid.node(i);
        let v = potential(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinitePotential { index: i, tau: t })
        }
    };
    match bc {
        Boundary::Dirichlet => {
            if n < 4 {
                return Err(Error::InvalidGrid(
                    "Dirichlet problem needs at least 4 nodes".into(),
                ));
            }
            let onsite = (1..n - 1).map(eval).collect::<Result<Vec<_>>>()?;
            let m = onsite.len();
            TridiagonalSystem::from_form(grid.clone(), 1, vec![inv_h2; m + 1], onsite, vec![1.0; m])
        }
        Boundary::RobinLeft { gamma } => {
            if grid.lo() != 0.0 {
                return Err(Error::UnsupportedBoundary(format!(
                    "Robin condition requires the grid to start at 0, got lo = {}",
                    grid.lo()
                )));
            }
            if !gamma.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "Robin coefficient must be finite, got {gamma}"
                )));
            }
            // ghost node u_{-1} = u_1 - 2 h gamma u_0 folded into a half-weight row
            let mut onsite = (0..n - 1).map(eval).collect::<Result<Vec<_>>>()?;
            onsite[0] = 0.5 * onsite[0] + gamma / h;
            let m = onsite.len();
            let mut edges = vec![inv_h2; m + 1];
            edges[0] = 0.0;
            let mut weight = vec![1.0; m];
            weight[0] = 0.5;
            TridiagonalSystem::from_form(grid.clone(), 0, edges, onsite, weight)
        }
    }
}

/// Symmetrized pencil `S = W^{-1/2} K W^{-1/2}`.
struct Symmetrized {
    diag: Vec<f64>,
    off: Vec<f64>,
    sqrt_mass: Vec<f64>,
}

impl Symmetrized {
    fn new<S: Spectral + ?Sized>(system: &S) -> Self {
        let form = system.form();
        let mass = system.effective_mass();
        let sqrt_mass: Vec<f64> = mass.iter().map(|m| m.sqrt()).collect();
        let diag = form.diag().iter().zip(&mass).map(|(k, m)| k / m).collect();
        let off = form
            .offdiag()
            .iter()
            .enumerate()
            .map(|(j, k)| k / (sqrt_mass[j] * sqrt_mass[j + 1]))
            .collect();
        Symmetrized {
            diag,
            off,
            sqrt_mass,
        }
    }

    fn gershgorin(&self) -> (f64, f64) {
        let m = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..m {
            let r = if j > 0 { self.off[j - 1].abs() } else { 0.0 }
                + if j + 1 < m { self.off[j].abs() } else { 0.0 };
            lo = lo.min(self.diag[j] - r);
            hi = hi.max(self.diag[j] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    fn sturm_count(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE * 1e4;
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for j in 0.. {
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
            if j + 1 == self.diag.len() {
                break;
            }
            q = self.diag[j + 1] - x - self.off[j] * self.off[j] / q;
        }
        count
    }
}

/// LU factorization with partial pivoting of a tridiagonal matrix.
pub(crate) struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    pub(crate) fn factor(sub: &[f64], diag: &[f64], sup: &[f64]) -> Self {
        let n = diag.len();
        let mut dl = sub.to_vec();
        let mut d = diag.to_vec();
        let mut du = sup.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let scale = diag
            .iter()
            .chain(sub)
            .chain(sup)
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = f64::EPSILON * scale;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = f64::EPSILON * scale;
        }
        TridiagonalLu {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    pub(crate) fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let t = b[i];
                b[i] = b[i + 1];
                b[i + 1] = t - self.dl[i] * b[i + 1];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn normalize(x: &mut [f64]) {
    let norm = dot(x, x).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
}

/// The `k` smallest eigenpairs of a tridiagonal pencil, ascending.
///
/// Eigenvalues are bracketed by Sturm-sequence bisection to `tol` and the
/// vectors obtained by inverse iteration; the reported value is the Rayleigh
/// quotient of the final vector.
pub fn eigs_smallest<S: Spectral + ?Sized>(
    system: &S,
    k: usize,
    tol: f64,
) -> Result<Vec<EigenPair>> {
    let form = system.form();
    let m = form.unknowns();
    if k == 0 || k >= m {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k < {m}, got k = {k}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let sym = Symmetrized::new(system);
    let (glo, ghi) = sym.gershgorin();
    let spread = (ghi - glo).max(1.0);
    let mut lo_bound = glo - 1e-3 * spread;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut pairs = Vec::with_capacity(k);

    for idx in 0..k {
        let mut lo = lo_bound;
        let mut hi = ghi + 1e-3 * spread;
        let mut converged = false;
        for _ in 0..400 {
            if hi - lo <= tol.max(4.0 * f64::EPSILON * lo.abs().max(hi.abs())) {
                converged = true;
                break;
            }
            let mid = 0.5 * (lo + hi);
            if sym.sturm_count(mid) <= idx {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if !converged {
            return Err(Error::Bisection { lo, hi });
        }
        let shift = 0.5 * (lo + hi);
        lo_bound = lo;

        let sub = sym.off.clone();
        let diag: Vec<f64> = sym.diag.iter().map(|d| d - shift).collect();
        let lu = TridiagonalLu::factor(&sub, &diag, &sub);
        let mut x: Vec<f64> = (0..m)
            .map(|j| 1.0 + 0.5 * ((j * 7919 % 97) as f64) / 97.0)
            .collect();
        normalize(&mut x);
        for step in 0..INVERSE_ITERATION_CAP {
            let mut y = x.clone();
            lu.solve(&mut y);
            for b in &basis {
                let c = dot(&y, b);
                y.iter_mut().zip(b).for_each(|(v, bv)| *v -= c * bv);
            }
            normalize(&mut y);
            let overlap = dot(&x, &y).abs();
            x = y;
            if step > 0 && 1.0 - overlap < 1e-14 {
                break;
            }
        }
        basis.push(x.clone());

        let mut u: Vec<f64> = x.iter().zip(&sym.sqrt_mass).map(|(w, s)| w / s).collect();
        let mass = system.effective_mass();
        let norm2: f64 = form.grid.delta * u.iter().zip(&mass).map(|(v, m)| m * v * v).sum::<f64>();
        let sign = sign_convention(form, &u);
        let scale = sign / norm2.sqrt();
        u.iter_mut().for_each(|v| *v *= scale);

        let value = form.form_value(&u);
        let ku = form.apply_form(&u);
        let residual = (form.grid.delta
            * ku.iter()
                .zip(&u)
                .zip(&mass)
                .map(|((kv, uv), m)| {
                    let r = kv - value * m * uv;
                    r * r / m
                })
                .sum::<f64>())
        .sqrt();
        pairs.push(EigenPair {
            value,
            vector: form.extend(&u),
            residual,
        });
    }
    Ok(pairs)
}

/// +1 or -1 so that the eigenfunction is positive at the origin node, or,
/// when it vanishes there, positive on its first significant lobe.
fn sign_convention(form: &TridiagonalSystem, u: &[f64]) -> f64 {
    let peak = u.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if let Some(z) = form.grid.zero_index() {
        if z >= form.first && z < form.first + u.len() {
            let v = u[z - form.first];
            if v.abs() > 1e-8 * peak {
                return v.signum();
            }
        }
    }
    u.iter()
        .find(|v| v.abs() > 1e-3 * peak)
        .map(|v| v.signum())
        .unwrap_or(1.0)
}

/// Derivative of an eigenvalue with respect to a parameter that enters only
/// the onsite coefficients: `delta * sum_j d_onsite_j u_j^2`.
pub fn eigenvalue_derivative<S: Spectral + ?Sized>(
    system: &S,
    pair: &EigenPair,
    d_onsite: &[f64],
) -> Result<f64> {
    let form = system.form();
    if d_onsite.len() != form.unknowns() {
        return Err(Error::LengthMismatch {
            expected: form.unknowns(),
            got: d_onsite.len(),
        });
    }
    let u = form.restrict(&pair.vector);
    Ok(form.grid.delta * u.iter().zip(d_onsite).map(|(v, d)| d * v * v).sum::<f64>())
}

/// Discrete inner product of two grid functions in the system's weighted space.
pub fn inner<S: Spectral + ?Sized>(system: &S, f: &[f64], g: &[f64]) -> Result<f64> {
    let form = system.form();
    form.grid.check_len(f.len())?;
    form.grid.check_len(g.len())?;
    let mass = system.effective_mass();
    let fs = &f[form.first..form.first + form.unknowns()];
    let gs = &g[form.first..form.first + form.unknowns()];
    Ok(form.grid.delta
        * fs.iter()
            .zip(gs)
            .zip(&mass)
            .map(|((a, b), m)| a * b * m)
            .sum::<f64>())
}

/// Applies `W^{-1} K - shift` to a grid function, returning a grid function
/// that vanishes off the unknowns.
pub fn apply_shifted<S: Spectral + ?Sized>(system: &S, shift: f64, f: &[f64]) -> Result<Vec<f64>> {
    let form = system.form();
    form.grid.check_len(f.len())?;
    let mass = system.effective_mass();
    let x = form.restrict(f);
    let kx = form.apply_form(&x);
    let out: Vec<f64> = kx
        .iter()
        .zip(&x)
        .zip(&mass)
        .map(|((k, v), m)| k / m - shift * v)
        .collect();
    Ok(form.extend(&out))
}

/// Solves `(W^{-1} K - shift) x = rhs` with `<x, phi> = 0`.
///
/// `phi` must be the normalized ground state at energy `shift`. If `rhs` is
/// parallel to `phi` the zero function is returned; otherwise `rhs` must be
/// orthogonal to `phi` up to [`ORTHOGONALITY_TOL`] relative to its norm.
///
/// The singular system is solved by pinning `x` to zero at the peak of
/// `phi` and dropping that (redundant) equation. The two remaining blocks
/// are restrictions of `K - shift W` below its lowest eigenvalue and hence
/// positive definite. One step of iterative refinement follows.
pub fn constrained_solve<S: Spectral + ?Sized>(
    system: &S,
    shift: f64,
    rhs: &[f64],
    phi: &[f64],
) -> Result<Vec<f64>> {
    let form = system.form();
    let grid = &form.grid;
    grid.check_len(rhs.len())?;
    grid.check_len(phi.len())?;
    let rhs_norm = inner(system, rhs, rhs)?.sqrt();
    if rhs_norm == 0.0 {
        return Ok(vec![0.0; grid.len()]);
    }
    let along = inner(system, rhs, phi)?;
    let perp: Vec<f64> = rhs.iter().zip(phi).map(|(r, p)| r - along * p).collect();
    if inner(system, &perp, &perp)?.sqrt() <= 1e-10 * rhs_norm {
        return Ok(vec![0.0; grid.len()]);
    }
    if along.abs() > ORTHOGONALITY_TOL * rhs_norm {
        return Err(Error::NotOrthogonal { inner: along });
    }

    let m = form.unknowns();
    let mass = system.effective_mass();
    let phi_u = form.restrict(phi);
    let pin = phi_u
        .iter()
        .enumerate()
        .fold((0, 0.0_f64), |(bi, bv), (j, v)| {
            if v.abs() > bv {
                (j, v.abs())
            } else {
                (bi, bv)
            }
        })
        .0;
    let diag = form.diag();
    let off = form.offdiag();
    let shifted: Vec<f64> = diag.iter().zip(&mass).map(|(d, w)| d - shift * w).collect();

    let block_solve = |b: &mut [f64]| {
        // rows [0, pin) and (pin, m) decouple once x_pin = 0
        if pin > 0 {
            let lu = TridiagonalLu::factor(&off[..pin - 1], &shifted[..pin], &off[..pin - 1]);
            lu.solve(&mut b[..pin]);
        }
        if pin + 1 < m {
            let lu = TridiagonalLu::factor(&off[pin + 1..], &shifted[pin + 1..], &off[pin + 1..]);
            lu.solve(&mut b[pin + 1..]);
        }
        b[pin] = 0.0;
    };

    let target: Vec<f64> = form
        .restrict(rhs)
        .iter()
        .zip(&mass)
        .map(|(r, w)| r * w)
        .collect();
    let mut x = target.clone();
    block_solve(&mut x);
    // one refinement sweep on the residual evaluated in difference form
    let kx = form.apply_form(&x);
    let mut corr: Vec<f64> = target
        .iter()
        .zip(&kx)
        .zip(x.iter().zip(&mass))
        .map(|((t, k), (v, w))| t - (k - shift * w * v))
        .collect();
    block_solve(&mut corr);
    x.iter_mut().zip(&corr).for_each(|(v, c)| *v += c);

    let xg = form.extend(&x);
    let c = inner(system, &xg, phi)?;
    Ok(xg.iter().zip(phi).map(|(v, p)| v - c * p).collect())
}

/// Composite trapezoidal rule for `f * weight` on the grid.
pub fn quadrature(grid: &Grid, f: &[f64], weight: Option<&[f64]>) -> Result<f64> {
    grid.check_len(f.len())?;
    let n = grid.len();
    let g = |i: usize| -> f64 {
        match weight {
            Some(w) => f[i] * w[i],
            None => f[i],
        }
    };
    if let Some(w) = weight {
        grid.check_len(w.len())?;
    }
    let interior: f64 = (1..n - 1).map(g).sum();
    Ok(grid.delta() * (interior + 0.5 * (g(0) + g(n - 1))))
}

/// Which side of the origin a one-sided stencil uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// One-sided second-order derivative of a grid function at the origin.
pub fn derivative_at_zero(grid: &Grid, f: &[f64], side: Side) -> Result<f64> {
    grid.check_len(f.len())?;
    let z = grid
        .zero_index()
        .ok_or_else(|| Error::InvalidGrid("the origin is not a grid node".into()))?;
    let h = grid.delta();
    match side {
        Side::Right => {
            if z + 2 >= grid.len() {
                return Err(Error::TooFewNodes { side: "right" });
            }
            Ok((-3.0 * f[z] + 4.0 * f[z + 1] - f[z + 2]) / (2.0 * h))
        }
        Side::Left => {
            if z < 2 {
                return Err(Error::TooFewNodes { side: "left" });
            }
            Ok((3.0 * f[z] - 4.0 * f[z - 1] + f[z - 2]) / (2.0 * h))
        }
    }
}

/// Central-difference derivative of a grid function, one-sided (second
/// order) at the two ends.
pub fn gradient(grid: &Grid, f: &[f64]) -> Result<Vec<f64>> {
    grid.check_len(f.len())?;
    let n = grid.len();
    let h = grid.delta();
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    Ok(out)
}

/// Numerical resolution shared by every solver in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    /// Grid spacing.
    pub delta: f64,
    /// Absolute eigenvalue tolerance.
    pub tol: f64,
    /// Box margin beyond the potential wells.
    pub margin: f64,
    /// Fixed half-length of the box, overriding the automatic choice.
    pub length: Option<f64>,
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization {
            delta: 0.005,
            tol: DEFAULT_EIG_TOL,
            margin: 12.0,
            length: None,
        }
    }
}

impl Discretization {
    pub fn with_delta(delta: f64) -> Self {
        Discretization {
            delta,
            ..Default::default()
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "grid spacing must lie in (0, 0.5], got {}",
                self.delta
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if let Some(l) = self.length {
            if !(l > 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "box length must exceed 1, got {l}"
                )));
            }
        }
        Ok(())
    }
}

/// Three-level grid refinement with Richardson extrapolation.
///
/// Levels halve the spacing; the extrapolation removes `delta^2` and
/// `delta^4` error terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub deltas: [f64; 3],
    pub base: Discretization,
}

impl Default for Refinement {
    fn default() -> Self {
        Refinement {
            deltas: [0.01, 0.005, 0.0025],
            base: Discretization::default(),
        }
    }
}

impl Refinement {
    pub fn levels(&self) -> [Discretization; 3] {
        self.deltas
            .map(|delta| Discretization { delta, ..self.base })
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.deltas.windows(2) {
            if (w[0] - 2.0 * w[1]).abs() > 1e-12 * w[0] {
                return Err(Error::InvalidArgument(format!(
                    "refinement levels must halve the spacing, got {:?}",
                    self.deltas
                )));
            }
        }
        self.levels().iter().try_for_each(|d| d.validate())
    }
}

/// Richardson extrapolation of values at spacings `d, d/2, d/4`.
pub fn richardson(values: [f64; 3]) -> f64 {
    let r1 = (4.0 * values[1] - values[0]) / 3.0;
    let r2 = (4.0 * values[2] - values[1]) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

/// Observed convergence order from errors at spacings `d` and `d/2`.
pub fn observed_order(coarse_error: f64, fine_error: f64) -> f64 {
    (coarse_error.abs() / fine_error.abs()).log2()
}
