use super::{Mesh, StateField};
use crate::error::{invalid, Result};

/// Layout of the two switching controls on the mesh: `u₁` acts on the strip
/// `(0,1)×(0,¼)`, `u₂` on `(0,1)×(¾,1)`, each piecewise constant on the `n`
/// intervals `[i/n, (i+1)/n]` in `x₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwitchingLayout {
    n: usize,
}

/// Which strip (if any) a grid row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Strip {
    Lower,
    Upper,
    None,
}

impl SwitchingLayout {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let n = mesh.n();
        if n % 4 != 0 {
            return invalid(format!("switching problem needs n divisible by 4, got {n}"));
        }
        Ok(Self { n })
    }

    pub fn intervals(&self) -> usize {
        self.n
    }

    fn strip(&self, row: usize) -> Strip {
        if row < self.n / 4 {
            Strip::Lower
        } else if row >= 3 * self.n / 4 {
            Strip::Upper
        } else {
            Strip::None
        }
    }

    /// Control value acting on triangle `t`.
    fn value_on(&self, mesh: &Mesh, t: usize, u1: &[f64], u2: &[f64]) -> f64 {
        let (i, j) = mesh.square_of(t);
        match self.strip(j) {
            Strip::Lower => u1[i],
            Strip::Upper => u2[i],
            Strip::None => 0.0,
        }
    }
}

fn check(mesh: &Mesh, len1: usize, len2: usize) -> Result<SwitchingLayout> {
    let layout = SwitchingLayout::new(mesh)?;
    if len1 != mesh.n() || len2 != mesh.n() {
        return invalid(format!(
            "switching controls need {} interval values each, got {len1} and {len2}",
            mesh.n()
        ));
    }
    Ok(layout)
}

/// Nodal load `∫ (χ_{Ω₁}u₁ + χ_{Ω₂}u₂) φ_i dx`.
pub fn switching_loads(mesh: &Mesh, u1: &[f64], u2: &[f64]) -> Result<Vec<f64>> {
    let layout = check(mesh, u1.len(), u2.len())?;
    let w = mesh.triangle_area() / 3.0;
    let mut b = vec![0.0; mesh.num_nodes()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let v = layout.value_on(mesh, t, u1, u2);
        if v != 0.0 {
            for &node in tri {
                b[node] += w * v;
            }
        }
    }
    Ok(b)
}

/// Adjoint restriction: `(∫_{Ω₁∩S_i} p dx, ∫_{Ω₂∩S_i} p dx)` for every interval
/// strip `S_i = [i/n, (i+1)/n] × (0,1)`.
pub fn switching_restrict(mesh: &Mesh, p: &StateField) -> Result<(Vec<f64>, Vec<f64>)> {
    let layout = SwitchingLayout::new(mesh)?;
    if p.len() != mesh.num_nodes() {
        return invalid("nodal field length does not match the mesh");
    }
    let n = mesh.n();
    let area = mesh.triangle_area();
    let (mut g1, mut g2) = (vec![0.0; n], vec![0.0; n]);
    for (t, &[a, b, c]) in mesh.triangles().iter().enumerate() {
        let (i, j) = mesh.square_of(t);
        let integral = area * (p.values[a] + p.values[b] + p.values[c]) / 3.0;
        match layout.strip(j) {
            Strip::Lower => g1[i] += integral,
            Strip::Upper => g2[i] += integral,
            Strip::None => {}
        }
    }
    Ok((g1, g2))
}
