use std::sync::atomic::{AtomicUsize, Ordering};

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64;

use super::{ComplexField, Direction, EmError, Injection, PortRole, PortSpec, SimulationGrid};

/// Coefficients of the stretched 5-point operator, scaled by `dx^2`.
///
/// The operator is `d/dx (sy/sx d/dx) + d/dy (sx/sy d/dy) + k0^2 eps sx sy`, which
/// keeps the discrete matrix complex-symmetric.
#[derive(Debug, Clone)]
struct Stencil {
    nx: usize,
    ny: usize,
    sx: Vec<Complex64>,
    sy: Vec<Complex64>,
    sx_face: Vec<Complex64>,
    sy_face: Vec<Complex64>,
    k0dx2: f64,
}

impl Stencil {
    fn new(grid: &SimulationGrid) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let k0dx = grid.k0() * grid.dx();
        Self {
            nx,
            ny,
            sx: grid.stretch_centers(nx),
            sy: grid.stretch_centers(ny),
            sx_face: grid.stretch_faces(nx),
            sy_face: grid.stretch_faces(ny),
            k0dx2: k0dx * k0dx,
        }
    }

    /// Coupling across the x-face at position `face` (between cells `face - 1` and `face`).
    fn cx(&self, face: usize, j: usize) -> Complex64 {
        self.sy[j] / self.sx_face[face]
    }

    fn cy(&self, i: usize, face: usize) -> Complex64 {
        self.sx[i] / self.sy_face[face]
    }

    fn triplets(&self, eps: &[f64]) -> Vec<Triplet<usize, usize, Complex64>> {
        let (nx, ny) = (self.nx, self.ny);
        let mut t = Vec::with_capacity(5 * nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                let p = i * ny + j;
                let (w, e) = (self.cx(i, j), self.cx(i + 1, j));
                let (s, n) = (self.cy(i, j), self.cy(i, j + 1));
                let diag = self.k0dx2 * eps[p] * self.sx[i] * self.sy[j] - w - e - s - n;
                if i > 0 {
                    t.push(Triplet::new(p, p - ny, w));
                }
                if i + 1 < nx {
                    t.push(Triplet::new(p, p + ny, e));
                }
                if j > 0 {
                    t.push(Triplet::new(p, p - 1, s));
                }
                if j + 1 < ny {
                    t.push(Triplet::new(p, p + 1, n));
                }
                t.push(Triplet::new(p, p, diag));
            }
        }
        t
    }
}

/// Factorized system for one grid at one wavelength. Reused for every source
/// set and for the adjoint solve.
pub struct FieldSolver {
    grid: SimulationGrid,
    stencil: Stencil,
    lu: Lu<usize, Complex64>,
    solves: AtomicUsize,
}

impl std::fmt::Debug for FieldSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldSolver")
            .field("nx", &self.grid.nx())
            .field("ny", &self.grid.ny())
            .field("lambda0", &self.grid.lambda0())
            .field("solves", &self.solves())
            .finish()
    }
}

impl FieldSolver {
    /// Assemble and factorize the operator of `grid`.
    pub fn new(grid: &SimulationGrid) -> Result<Self, EmError> {
        let stencil = Stencil::new(grid);
        let n = grid.nx() * grid.ny();
        let a = SparseColMat::<usize, Complex64>::try_new_from_triplets(
            n,
            n,
            &stencil.triplets(grid.eps_values()),
        )
        .map_err(|e| EmError::SolverFailure(format!("assembly: {e:?}")))?;
        let lu = a.sp_lu().map_err(|e| EmError::SolverFailure(format!("factorization: {e:?}")))?;
        Ok(Self { grid: grid.clone(), stencil, lu, solves: AtomicUsize::new(0) })
    }

    pub fn grid(&self) -> &SimulationGrid {
        &self.grid
    }

    /// Number of back-substitutions performed so far.
    pub fn solves(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    /// Derivative of the diagonal entry of cell `(i, j)` with respect to its
    /// permittivity, in the same scaling as the assembled operator.
    pub fn eps_sensitivity(&self, i: usize, j: usize) -> Complex64 {
        self.stencil.k0dx2 * self.stencil.sx[i] * self.stencil.sy[j]
    }

    /// Right-hand side produced by the source ports; monitors are ignored.
    pub fn source_vector(&self, sources: &[PortSpec]) -> Result<Vec<Complex64>, EmError> {
        let ny = self.grid.ny();
        let mut b = vec![Complex64::new(0.0, 0.0); self.grid.nx() * ny];
        for port in sources.iter().filter(|p| p.role == PortRole::Source) {
            port.validate()?;
            let cut = port.mode.cut;
            self.grid.check_cut(&cut)?;
            let amp = port.amplitude();
            match port.injection {
                Injection::Line => {
                    for (k, j) in cut.rows().enumerate() {
                        b[cut.x * ny + j] += amp * port.mode.amplitude[k];
                    }
                }
                Injection::Directional => {
                    // Total-field / scattered-field boundary between `inner` and
                    // `outer`; the incident wave lives on the `inner` side.
                    let (inner, outer, sign) = match port.mode.direction {
                        Direction::Forward => (cut.x, cut.x - 1, 1.0),
                        Direction::Backward => (cut.x, cut.x + 1, -1.0),
                    };
                    let face = inner.max(outer);
                    let kx = port.mode.kx * self.grid.dx() * sign;
                    let phase_outer = Complex64::from_polar(1.0, kx * (outer as f64 - inner as f64));
                    for (k, j) in cut.rows().enumerate() {
                        let c = self.stencil.cx(face, j);
                        let m = amp * port.mode.amplitude[k];
                        b[inner * ny + j] -= c * m * phase_outer;
                        b[outer * ny + j] += c * m;
                    }
                }
            }
        }
        Ok(b)
    }

    /// Solve `A x = rhs`.
    pub fn solve_rhs(&self, rhs: Vec<Complex64>) -> Result<ComplexField, EmError> {
        self.back_substitute(rhs, false)
    }

    /// Solve `A^T x = rhs`.
    pub fn solve_transpose_rhs(&self, rhs: Vec<Complex64>) -> Result<ComplexField, EmError> {
        self.back_substitute(rhs, true)
    }

    /// Field excited by `sources`.
    pub fn solve(&self, sources: &[PortSpec]) -> Result<ComplexField, EmError> {
        let b = self.source_vector(sources)?;
        self.solve_rhs(b)
    }

    fn back_substitute(&self, rhs: Vec<Complex64>, transpose: bool) -> Result<ComplexField, EmError> {
        let n = self.grid.nx() * self.grid.ny();
        if rhs.len() != n {
            return Err(EmError::DimensionMismatch { expected: n, found: rhs.len() });
        }
        let mut x = Mat::<Complex64>::from_fn(n, 1, |r, _| rhs[r]);
        if transpose {
            self.lu.solve_transpose_in_place(x.as_mut());
        } else {
            self.lu.solve_in_place(x.as_mut());
        }
        self.solves.fetch_add(1, Ordering::Relaxed);
        let values: Vec<Complex64> = (0..n).map(|r| x[(r, 0)]).collect();
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(EmError::SolverFailure("non-finite field".into()));
        }
        Ok(ComplexField::from_values(self.grid.nx(), self.grid.ny(), values))
    }
}

/// Field excited by `sources` on `grid`.
pub fn solve_fields(grid: &SimulationGrid, sources: &[PortSpec]) -> Result<ComplexField, EmError> {
    FieldSolver::new(grid)?.solve(sources)
}
