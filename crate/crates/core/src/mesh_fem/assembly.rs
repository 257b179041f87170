use std::sync::Arc;

use super::linsolve::LinearSolver;
use super::sparse::CsrMatrix;
use super::{ControlField, Mesh, StateField};
use crate::error::{invalid, Result};

/// State equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PdeKind {
    /// `−Δy = u` in Ω, `y = 0` on ∂Ω.
    DirichletPoisson,
    /// `−Δy + y = u` in Ω, `∂y/∂n = 0` on ∂Ω.
    NeumannHelmholtz,
}

/// P1 discretization of a state equation with its factored operator.
#[derive(Debug, Clone)]
pub struct AssembledPde {
    mesh: Arc<Mesh>,
    kind: PdeKind,
    stiffness: CsrMatrix,
    mass: CsrMatrix,
    system: CsrMatrix,
    free: Vec<usize>,
    solver: LinearSolver,
}

fn element_matrices(mesh: &Mesh) -> (CsrMatrix, CsrMatrix) {
    let nodes = mesh.nodes();
    let area = mesh.triangle_area();
    let mut k_trip = Vec::with_capacity(9 * mesh.num_triangles());
    let mut m_trip = Vec::with_capacity(9 * mesh.num_triangles());
    for tri in mesh.triangles() {
        let p = tri.map(|v| nodes[v]);
        // edge opposite vertex a
        let e: [[f64; 2]; 3] = std::array::from_fn(|a| {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            [p[c][0] - p[b][0], p[c][1] - p[b][1]]
        });
        for a in 0..3 {
            for b in 0..3 {
                let k = (e[a][0] * e[b][0] + e[a][1] * e[b][1]) / (4.0 * area);
                let m = if a == b { area / 6.0 } else { area / 12.0 };
                k_trip.push((tri[a], tri[b], k));
                m_trip.push((tri[a], tri[b], m));
            }
        }
    }
    let n = mesh.num_nodes();
    (CsrMatrix::from_triplets(n, k_trip), CsrMatrix::from_triplets(n, m_trip))
}

impl AssembledPde {
    /// Assembles stiffness and mass, eliminates Dirichlet nodes and factors the
    /// resulting system.
    pub fn assemble(mesh: Arc<Mesh>, kind: PdeKind) -> Result<Self> {
        let (stiffness, mass) = element_matrices(&mesh);
        let (free, system) = match kind {
            PdeKind::DirichletPoisson => {
                let free: Vec<usize> =
                    (0..mesh.num_nodes()).filter(|&v| !mesh.is_boundary(v)).collect();
                let system = stiffness.submatrix(&free);
                (free, system)
            }
            PdeKind::NeumannHelmholtz => ((0..mesh.num_nodes()).collect(), stiffness.add(&mass)),
        };
        let solver = LinearSolver::new(&system)?;
        log::debug!(
            "assembled {kind:?} on n = {}: {} dofs, direct = {}",
            mesh.n(),
            free.len(),
            solver.is_direct()
        );
        Ok(Self { mesh, kind, stiffness, mass, system, free, solver })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn kind(&self) -> PdeKind {
        self.kind
    }

    /// Full nodal stiffness matrix (before boundary treatment).
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    /// Full nodal mass matrix.
    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    /// System matrix on the free nodes.
    pub fn system(&self) -> &CsrMatrix {
        &self.system
    }

    /// Node indices of the system unknowns.
    pub fn free_nodes(&self) -> &[usize] {
        &self.free
    }

    fn check_nodal(&self, len: usize) -> Result<()> {
        if len != self.mesh.num_nodes() {
            return invalid(format!(
                "nodal field has {len} values, mesh has {} nodes",
                self.mesh.num_nodes()
            ));
        }
        Ok(())
    }

    fn check_cells(&self, len: usize) -> Result<()> {
        if len != self.mesh.num_triangles() {
            return invalid(format!(
                "control field has {len} values, mesh has {} triangles",
                self.mesh.num_triangles()
            ));
        }
        Ok(())
    }

    /// Nodal load `∫ u φ_i dx` of a piecewise-constant control.
    pub fn load(&self, u: &ControlField) -> Result<Vec<f64>> {
        self.check_cells(u.len())?;
        let w = self.mesh.triangle_area() / 3.0;
        let mut b = vec![0.0; self.mesh.num_nodes()];
        for (tri, &ut) in self.mesh.triangles().iter().zip(&u.values) {
            for &v in tri {
                b[v] += w * ut;
            }
        }
        Ok(b)
    }

    /// Solves the system for a nodal right-hand side; eliminated nodes get 0.
    pub fn solve_nodal(&self, rhs: &[f64]) -> Result<StateField> {
        self.check_nodal(rhs.len())?;
        let b: Vec<f64> = self.free.iter().map(|&v| rhs[v]).collect();
        let x = self.solver.solve(&b)?;
        let mut y = StateField::zeros(self.mesh.num_nodes());
        for (&v, xv) in self.free.iter().zip(x) {
            y.values[v] = xv;
        }
        Ok(y)
    }

    pub fn solve_state(&self, u: &ControlField) -> Result<StateField> {
        self.solve_nodal(&self.load(u)?)
    }

    /// Solves `system · p = mass · residual`.
    pub fn solve_adjoint(&self, residual: &StateField) -> Result<StateField> {
        self.check_nodal(residual.len())?;
        self.solve_nodal(&self.mass.matvec(&residual.values))
    }

    /// Cell averages of a nodal field (exact cell means for P1).
    pub fn element_means(&self, p: &StateField) -> ControlField {
        assert_eq!(p.len(), self.mesh.num_nodes(), "nodal field length mismatch");
        let values = self
            .mesh
            .triangles()
            .iter()
            .map(|&[a, b, c]| (p.values[a] + p.values[b] + p.values[c]) / 3.0)
            .collect();
        ControlField::new(values)
    }

    /// Nodal interpolant of a function.
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> StateField {
        StateField::new(self.mesh.nodes().iter().map(|&[x, y]| f(x, y)).collect())
    }

    pub fn l2_norm_state(&self, y: &StateField) -> f64 {
        assert_eq!(y.len(), self.mesh.num_nodes(), "nodal field length mismatch");
        self.mass.quad_form(&y.values).max(0.0).sqrt()
    }

    pub fn l2_inner_control(&self, u: &ControlField, v: &ControlField) -> f64 {
        assert_eq!(u.len(), v.len(), "control field length mismatch");
        self.mesh.triangle_area() * u.values.iter().zip(&v.values).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn l2_norm_control(&self, u: &ControlField) -> f64 {
        self.l2_inner_control(u, u).sqrt()
    }
}
