//! Discrete differential operators on triangle meshes embedded in `ℝ^D`.
//!
//! Mean curvature comes from the cotangent Laplacian normalised by mixed
//! Voronoi areas (Meyer et al.); Gaussian curvature from the angle defect.
//! Only intrinsic quantities (edge lengths, angles) enter, so the same code
//! serves meshes in `ℝ³` and `ℝ⁴`.

use std::f64::consts::TAU;

#[derive(Clone, Debug, Default)]
pub struct TriMesh<const D: usize> {
    pub vertices: Vec<[f64; D]>,
    pub triangles: Vec<[usize; 3]>,
}

/// Per-vertex quantities gathered in one pass over the triangles.
#[derive(Clone, Debug)]
pub struct VertexGeometry<const D: usize> {
    /// `Δx` at each vertex, the cotangent Laplacian of the position.
    pub laplacian: Vec<[f64; D]>,
    pub mixed_area: Vec<f64>,
    pub angle_sum: Vec<f64>,
}

fn sub<const D: usize>(a: &[f64; D], b: &[f64; D]) -> [f64; D] {
    std::array::from_fn(|i| a[i] - b[i])
}

pub(crate) fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm<const D: usize>(a: &[f64; D]) -> f64 {
    dot(a, a).sqrt()
}

/// Area of the parallelogram spanned by `u, v`, from the Gram determinant.
fn wedge<const D: usize>(u: &[f64; D], v: &[f64; D]) -> f64 {
    let (uu, vv, uv) = (dot(u, u), dot(v, v), dot(u, v));
    (uu * vv - uv * uv).max(0.0).sqrt()
}

impl<const D: usize> TriMesh<D> {
    pub fn new(vertices: Vec<[f64; D]>, triangles: Vec<[usize; 3]>) -> Self {
        TriMesh { vertices, triangles }
    }

    pub fn geometry(&self) -> VertexGeometry<D> {
        let n = self.vertices.len();
        let mut lap = vec![[0.0; D]; n];
        let mut area = vec![0.0; n];
        let mut angles = vec![0.0; n];
        for tri in &self.triangles {
            let x = tri.map(|i| self.vertices[i]);
            let twice_area = wedge(&sub(&x[1], &x[0]), &sub(&x[2], &x[0]));
            if twice_area == 0.0 {
                continue;
            }
            let a = 0.5 * twice_area;
            let mut cot = [0.0; 3];
            let mut obtuse = None;
            for c in 0..3 {
                let (u, v) = (sub(&x[(c + 1) % 3], &x[c]), sub(&x[(c + 2) % 3], &x[c]));
                let d = dot(&u, &v);
                cot[c] = d / twice_area;
                angles[tri[c]] += twice_area.atan2(d);
                if d < 0.0 {
                    obtuse = Some(c);
                }
            }
            for c in 0..3 {
                let (j, k) = ((c + 1) % 3, (c + 2) % 3);
                // the edge opposite corner c carries cot at c
                let e = sub(&x[k], &x[j]);
                for i in 0..D {
                    lap[tri[j]][i] += 0.5 * cot[c] * e[i];
                    lap[tri[k]][i] -= 0.5 * cot[c] * e[i];
                }
            }
            match obtuse {
                None => {
                    for c in 0..3 {
                        let (j, k) = ((c + 1) % 3, (c + 2) % 3);
                        let ej = dot(&sub(&x[j], &x[c]), &sub(&x[j], &x[c]));
                        let ek = dot(&sub(&x[k], &x[c]), &sub(&x[k], &x[c]));
                        area[tri[c]] += 0.125 * (ej * cot[k] + ek * cot[j]);
                    }
                }
                Some(o) => {
                    for c in 0..3 {
                        area[tri[c]] += if c == o { 0.5 * a } else { 0.25 * a };
                    }
                }
            }
        }
        for (l, &ar) in lap.iter_mut().zip(&area) {
            if ar > 0.0 {
                for v in l.iter_mut() {
                    *v /= ar;
                }
            }
        }
        VertexGeometry { laplacian: lap, mixed_area: area, angle_sum: angles }
    }

    /// Angle-defect Gaussian curvature, `(2π − Σθ)/A` at each vertex.
    /// Meaningful only for closed meshes.
    pub fn gaussian_curvature(&self) -> Vec<f64> {
        let g = self.geometry();
        g.angle_sum.iter().zip(&g.mixed_area).map(|(s, a)| (TAU - s) / a).collect()
    }

    /// Cotangent Laplacian of a scalar field.
    pub fn scalar_laplacian(&self, f: &[f64]) -> Vec<f64> {
        let g = self.geometry();
        let mut out = vec![0.0; self.vertices.len()];
        for tri in &self.triangles {
            let x = tri.map(|i| self.vertices[i]);
            let twice_area = wedge(&sub(&x[1], &x[0]), &sub(&x[2], &x[0]));
            if twice_area == 0.0 {
                continue;
            }
            for c in 0..3 {
                let (j, k) = ((c + 1) % 3, (c + 2) % 3);
                let cot = dot(&sub(&x[j], &x[c]), &sub(&x[k], &x[c])) / twice_area;
                let df = f[tri[k]] - f[tri[j]];
                out[tri[j]] += 0.5 * cot * df;
                out[tri[k]] -= 0.5 * cot * df;
            }
        }
        for (o, a) in out.iter_mut().zip(&g.mixed_area) {
            *o /= a;
        }
        out
    }

    pub fn total_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let x = t.map(|i| self.vertices[i]);
                0.5 * wedge(&sub(&x[1], &x[0]), &sub(&x[2], &x[0]))
            })
            .sum()
    }
}

/// Triangulates an `rows × cols` grid of quads by their `(0, 2)` diagonal.
pub fn split_quads(quads: &[[usize; 4]]) -> Vec<[usize; 3]> {
    quads.iter().flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn uv_sphere(r: f64, rings: usize, segs: usize) -> TriMesh<3> {
        // closed latitude/longitude sphere with explicit poles
        let mut v = vec![[0.0, 0.0, r]];
        for i in 1..rings {
            let th = PI * i as f64 / rings as f64;
            for j in 0..segs {
                let ph = TAU * j as f64 / segs as f64;
                v.push([r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()]);
            }
        }
        v.push([0.0, 0.0, -r]);
        let south = v.len() - 1;
        let idx = |i: usize, j: usize| 1 + (i - 1) * segs + j % segs;
        let mut t = Vec::new();
        for j in 0..segs {
            t.push([0, idx(1, j), idx(1, j + 1)]);
            t.push([south, idx(rings - 1, j + 1), idx(rings - 1, j)]);
        }
        for i in 1..rings - 1 {
            for j in 0..segs {
                t.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                t.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        TriMesh::new(v, t)
    }

    #[test]
    fn sphere_mean_curvature_and_gauss_bonnet() {
        let r = 1.5;
        let m = uv_sphere(r, 64, 128);
        let g = m.geometry();
        let n = m.vertices.len();
        // skip the poles, whose fans are irregular
        for i in 1..n - 1 {
            let h = 0.5 * norm(&g.laplacian[i]);
            assert!((h - 1.0 / r).abs() < 1e-2, "vertex {i}: {h}");
        }
        let total: f64 = (0..n).map(|i| TAU - g.angle_sum[i]).sum();
        assert!((total - 4.0 * PI).abs() < 1e-9);
        let area: f64 = g.mixed_area.iter().sum();
        assert!((area - m.total_area()).abs() < 1e-9 * area);
    }

    #[test]
    fn flat_torus_grid_has_zero_defect() {
        // integer lattice with periodic wrap, drawn in ℝ⁴ as a Clifford torus
        let (rows, cols) = (40, 60);
        let mut v = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                let (a, b) = (TAU * i as f64 / rows as f64, TAU * j as f64 / cols as f64);
                v.push([a.cos(), a.sin(), b.cos(), b.sin()]);
            }
        }
        let id = |i: usize, j: usize| (i % rows) * cols + j % cols;
        let mut quads = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                quads.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let m = TriMesh::new(v, split_quads(&quads));
        for k in m.gaussian_curvature() {
            assert!(k.abs() < 1e-10);
        }
    }

    #[test]
    fn scalar_laplacian_of_linear_field_vanishes_inside() {
        let n = 12;
        let mut v = Vec::new();
        for i in 0..n {
            for j in 0..n {
                v.push([i as f64 + 0.3 * j as f64, j as f64]);
            }
        }
        let id = |i: usize, j: usize| i * n + j;
        let mut quads = Vec::new();
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                quads.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let m = TriMesh::new(v.clone(), split_quads(&quads));
        let f: Vec<f64> = v.iter().map(|p| 2.0 * p[0] - p[1]).collect();
        let l = m.scalar_laplacian(&f);
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                assert!(l[id(i, j)].abs() < 1e-12);
            }
        }
    }
}
