use crate::error::{invalid, Result};

/// Uniform right-triangle mesh of the unit square.
///
/// Nodes are numbered row-major, `index = j·(n+1) + i` for the node at
/// `(i/n, j/n)`. Square `(i, j)` (lower-left corner `(i/n, j/n)`) owns
/// triangles `2(j·n + i)` (below the diagonal) and `2(j·n + i) + 1` (above it);
/// every square is split from lower-left to upper-right.
#[derive(Debug, Clone)]
pub struct Mesh {
    n: usize,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    boundary_nodes: Vec<usize>,
}

impl Mesh {
    pub fn build(n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("mesh must have at least one subdivision");
        }
        let np = n + 1;
        let nf = n as f64;
        let mut nodes = Vec::with_capacity(np * np);
        let mut boundary = Vec::with_capacity(np * np);
        for j in 0..np {
            for i in 0..np {
                nodes.push([i as f64 / nf, j as f64 / nf]);
                boundary.push(i == 0 || j == 0 || i == n || j == n);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = j * np + i;
                let v10 = v00 + 1;
                let v01 = v00 + np;
                let v11 = v01 + 1;
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        let boundary_nodes = (0..np * np).filter(|&k| boundary[k]).collect();
        Ok(Self { n, nodes, triangles, boundary, boundary_nodes })
    }

    /// Subdivisions per side.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Longest edge length `√2/n`.
    pub fn h(&self) -> f64 {
        std::f64::consts::SQRT_2 / self.n as f64
    }

    pub fn triangle_area(&self) -> f64 {
        0.5 / (self.n * self.n) as f64
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    /// Grid square `(i, j)` containing triangle `t`.
    pub fn square_of(&self, t: usize) -> (usize, usize) {
        let s = t / 2;
        (s % self.n, s / self.n)
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        [(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0]
    }

    /// Signed area of triangle `t` (positive for counter-clockwise orientation).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }
}

/// Builds the `n × n` mesh; see [`Mesh::build`].
pub fn build_mesh(n: usize) -> Result<Mesh> {
    Mesh::build(n)
}
