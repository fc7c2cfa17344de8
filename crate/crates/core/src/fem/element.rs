//! Element integrals for lowest-order Nédélec edge functions on affine tets.
//!
//! Local edge e = (a, b) carries w_e = λ_a∇λ_b − λ_b∇λ_a with
//! ∇×w_e = 2∇λ_a×∇λ_b. All integrals below are exact: the integrands are
//! polynomials in the barycentrics and ∫λ_iλ_j = |T|(1 + δ_ij)/20.

use crate::mesh::LOCAL_EDGES;
use crate::tensor::{cross3, dot3, scale3, sub3, Vec3};

pub type Mat6 = [[f64; 6]; 6];

pub struct ElementGeometry {
    pub volume: f64,
    pub grads: [Vec3; 4],
    pub verts: [Vec3; 4],
}

impl ElementGeometry {
    pub fn new(verts: [Vec3; 4]) -> Option<Self> {
        let e1 = sub3(&verts[1], &verts[0]);
        let e2 = sub3(&verts[2], &verts[0]);
        let e3 = sub3(&verts[3], &verts[0]);
        let c23 = cross3(&e2, &e3);
        let det = dot3(&e1, &c23);
        if !(det.abs() > 0.0) || !det.is_finite() {
            return None;
        }
        // Rows of the inverse Jacobian are the gradients of λ1, λ2, λ3.
        let g1 = scale3(&c23, 1.0 / det);
        let g2 = scale3(&cross3(&e3, &e1), 1.0 / det);
        let g3 = scale3(&cross3(&e1, &e2), 1.0 / det);
        let g0 = [-(g1[0] + g2[0] + g3[0]), -(g1[1] + g2[1] + g3[1]), -(g1[2] + g2[2] + g3[2])];
        Some(Self { volume: det.abs() / 6.0, grads: [g0, g1, g2, g3], verts })
    }

    /// ∫ λ_i λ_j.
    pub fn lambda_mass(&self, i: usize, j: usize) -> f64 {
        self.volume * if i == j { 2.0 } else { 1.0 } / 20.0
    }

    /// Curl of each local basis function (constant on the element).
    pub fn curls(&self) -> [Vec3; 6] {
        let mut out = [[0.0; 3]; 6];
        for (e, [a, b]) in LOCAL_EDGES.iter().enumerate() {
            out[e] = scale3(&cross3(&self.grads[*a], &self.grads[*b]), 2.0);
        }
        out
    }

    /// ∫ ∇×w_e · ∇×w_f.
    pub fn curl_curl(&self) -> Mat6 {
        let c = self.curls();
        let mut k = [[0.0; 6]; 6];
        for e in 0..6 {
            for f in 0..6 {
                k[e][f] = self.volume * dot3(&c[e], &c[f]);
            }
        }
        k
    }

    /// ∫ w_e · w_f.
    pub fn mass(&self) -> Mat6 {
        let g = &self.grads;
        let mut gg = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                gg[i][j] = dot3(&g[i], &g[j]);
            }
        }
        let mut m = [[0.0; 6]; 6];
        for (e, [a, b]) in LOCAL_EDGES.iter().enumerate() {
            for (f, [c, d]) in LOCAL_EDGES.iter().enumerate() {
                m[e][f] = self.lambda_mass(*a, *c) * gg[*b][*d] - self.lambda_mass(*a, *d) * gg[*b][*c]
                    - self.lambda_mass(*b, *c) * gg[*a][*d]
                    + self.lambda_mass(*b, *d) * gg[*a][*c];
            }
        }
        m
    }

    /// ∫ λ_m w_e as a vector, for every vertex m and edge e.
    pub fn lambda_weighted_basis(&self) -> [[Vec3; 6]; 4] {
        let mut out = [[[0.0; 3]; 6]; 4];
        for (m, row) in out.iter_mut().enumerate() {
            for (e, [a, b]) in LOCAL_EDGES.iter().enumerate() {
                let pa = self.lambda_mass(m, *a);
                let pb = self.lambda_mass(m, *b);
                for k in 0..3 {
                    row[e][k] = pa * self.grads[*b][k] - pb * self.grads[*a][k];
                }
            }
        }
        out
    }

    /// ∫ (e_k × ξ) · w_e for k = 0, 1, 2.
    pub fn moment_load(&self) -> [[f64; 6]; 3] {
        let lw = self.lambda_weighted_basis();
        let mut out = [[0.0; 6]; 3];
        for (k, row) in out.iter_mut().enumerate() {
            let mut ek = [0.0; 3];
            ek[k] = 1.0;
            for (e, slot) in row.iter_mut().enumerate() {
                *slot = (0..4).map(|m| dot3(&cross3(&ek, &self.verts[m]), &lw[m][e])).sum();
            }
        }
        out
    }

    /// ∫ ξ × w_e.
    pub fn position_cross_basis(&self) -> [Vec3; 6] {
        let lw = self.lambda_weighted_basis();
        let mut out = [[0.0; 3]; 6];
        for (e, slot) in out.iter_mut().enumerate() {
            for m in 0..4 {
                let c = cross3(&self.verts[m], &lw[m][e]);
                for k in 0..3 {
                    slot[k] += c[k];
                }
            }
        }
        out
    }

    /// ∫ ξ_i ξ_j.
    pub fn second_moment(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for m in 0..4 {
            for n in 0..4 {
                let w = self.lambda_mass(m, n);
                for i in 0..3 {
                    for j in 0..3 {
                        out[i][j] += w * self.verts[m][i] * self.verts[n][j];
                    }
                }
            }
        }
        out
    }
}
