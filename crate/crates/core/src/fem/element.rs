//! Trilinear hexahedron: shape functions, strain-displacement matrix,
//! isotropic constitutive matrix and element stiffness.
//!
//! Strains are in Voigt order `(xx, yy, zz, xy, xz, yz)` with engineering
//! shear components. The element is an axis-aligned cube of edge `h`, so the
//! map from natural coordinates is affine with `∂/∂x = (2/h) ∂/∂ξ` and
//! Jacobian determinant `(h/2)³`.

use crate::error::{Error, Result};
use crate::mesh::LOCAL_NODE_SIGNS;

/// Trilinear shape functions `N_i = (1 ± ξ1)(1 ± ξ2)(1 ± ξ3) / 8`.
pub fn shape_functions(xi: [f64; 3]) -> [f64; 8] {
    LOCAL_NODE_SIGNS.map(|s| {
        0.125 * (1.0 + s[0] * xi[0]) * (1.0 + s[1] * xi[1]) * (1.0 + s[2] * xi[2])
    })
}

/// `∂N_i/∂ξ_d` as `[i][d]`.
pub fn shape_gradients_natural(xi: [f64; 3]) -> [[f64; 3]; 8] {
    LOCAL_NODE_SIGNS.map(|s| {
        let f = [1.0 + s[0] * xi[0], 1.0 + s[1] * xi[1], 1.0 + s[2] * xi[2]];
        [
            0.125 * s[0] * f[1] * f[2],
            0.125 * s[1] * f[0] * f[2],
            0.125 * s[2] * f[0] * f[1],
        ]
    })
}

pub type StrainDisplacement = [[f64; 24]; 6];

/// The 6×24 matrix `B` with `ε = B u_e`.
pub fn strain_displacement(xi: [f64; 3], h: f64) -> Result<StrainDisplacement> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "element edge length must be positive, got {h}"
        )));
    }
    let scale = 2.0 / h;
    let grads = shape_gradients_natural(xi);
    let mut b = [[0.0; 24]; 6];
    for (i, g) in grads.iter().enumerate() {
        let [dx, dy, dz] = g.map(|v| v * scale);
        let c = 3 * i;
        b[0][c] = dx;
        b[1][c + 1] = dy;
        b[2][c + 2] = dz;
        b[3][c] = dy;
        b[3][c + 1] = dx;
        b[4][c] = dz;
        b[4][c + 2] = dx;
        b[5][c + 1] = dz;
        b[5][c + 2] = dy;
    }
    Ok(b)
}

/// Isotropic Hooke matrix in Voigt form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstitutiveMatrix(pub [[f64; 6]; 6]);

impl ConstitutiveMatrix {
    pub fn isotropic(youngs: f64, poisson: f64) -> Result<Self> {
        if !(youngs > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Young's modulus must be positive, got {youngs}"
            )));
        }
        if !(0.0..0.5).contains(&poisson) {
            return Err(Error::InvalidArgument(format!(
                "Poisson ratio must lie in [0, 0.5), got {poisson}"
            )));
        }
        let f = youngs / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
        let mut h = [[0.0; 6]; 6];
        for i in 0..3 {
            for j in 0..3 {
                h[i][j] = f * if i == j { 1.0 - poisson } else { poisson };
            }
            h[i + 3][i + 3] = f * (1.0 - 2.0 * poisson) / 2.0;
        }
        Ok(ConstitutiveMatrix(h))
    }

    pub fn scaled(&self, c: f64) -> Self {
        ConstitutiveMatrix(self.0.map(|row| row.map(|v| v * c)))
    }
}

pub fn constitutive_matrix(youngs: f64, poisson: f64) -> Result<ConstitutiveMatrix> {
    ConstitutiveMatrix::isotropic(youngs, poisson)
}

/// 24×24 element stiffness, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementStiffness(pub Box<[[f64; 24]; 24]>);

impl ElementStiffness {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    /// `½ uᵀ K_e u` scaled by `modulus`.
    pub fn energy(&self, u: &[f64; 24], modulus: f64) -> f64 {
        let mut s = 0.0;
        for (i, row) in self.0.iter().enumerate() {
            let ku: f64 = row.iter().zip(u).map(|(k, x)| k * x).sum();
            s += u[i] * ku;
        }
        0.5 * modulus * s
    }
}

/// Two-point Gauss-Legendre abscissae.
const GAUSS2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

/// `K_e = ∫ Bᵀ H B dV` by 2×2×2 Gauss quadrature (unit weights).
pub fn element_stiffness(h_mat: &ConstitutiveMatrix, h: f64) -> Result<ElementStiffness> {
    let det_j = (0.5 * h).powi(3);
    let mut k = Box::new([[0.0; 24]; 24]);
    for &a in &GAUSS2 {
        for &b in &GAUSS2 {
            for &c in &GAUSS2 {
                let bm = strain_displacement([a, b, c], h)?;
                // HB, 6×24
                let mut hb = [[0.0; 24]; 6];
                for r in 0..6 {
                    for col in 0..24 {
                        hb[r][col] = (0..6).map(|s| h_mat.0[r][s] * bm[s][col]).sum();
                    }
                }
                for i in 0..24 {
                    for j in 0..24 {
                        let v: f64 = (0..6).map(|r| bm[r][i] * hb[r][j]).sum();
                        k[i][j] += v * det_j;
                    }
                }
            }
        }
    }
    // exact symmetry
    for i in 0..24 {
        for j in (i + 1)..24 {
            let avg = 0.5 * (k[i][j] + k[j][i]);
            k[i][j] = avg;
            k[j][i] = avg;
        }
    }
    Ok(ElementStiffness(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_function_values() {
        assert!(shape_functions([0.0; 3]).iter().all(|&n| n == 0.125));
        let n = shape_functions([-1.0; 3]);
        assert_eq!(n[0], 1.0);
        assert!(n[1..].iter().all(|&v| v == 0.0));
        // N7 = (1/8)(1 + ξ1)(1 + ξ2)(1 + ξ3)
        let n = shape_functions([0.5, -0.5, 0.25]);
        assert!((n[6] - 0.1171875).abs() < 1e-15);
    }

    #[test]
    fn b_matrix_center_derivative() {
        let b = strain_displacement([0.0; 3], 1.0).unwrap();
        assert!((b[0][0] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn b_matrix_rejects_bad_h() {
        assert!(strain_displacement([0.0; 3], 0.0).is_err());
        assert!(strain_displacement([0.0; 3], -1.0).is_err());
    }

    #[test]
    fn rigid_translation_zero_strain() {
        let mut u = [0.0; 24];
        for a in 0..8 {
            u[3 * a] = 0.3;
            u[3 * a + 1] = -1.1;
            u[3 * a + 2] = 2.0;
        }
        for xi in [[0.0; 3], [0.3, -0.7, 0.9]] {
            let b = strain_displacement(xi, 2.0).unwrap();
            for row in &b {
                let eps: f64 = row.iter().zip(&u).map(|(x, y)| x * y).sum();
                assert!(eps.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn linear_field_constant_strain() {
        let h = 1.0;
        let mut u = [0.0; 24];
        for a in 0..8 {
            // u_x = x, with x = (h/2) ξ
            u[3 * a] = 0.5 * h * LOCAL_NODE_SIGNS[a][0];
        }
        for xi in [[0.0; 3], [-1.0, 1.0, 0.5], [0.2, 0.4, -0.6]] {
            let b = strain_displacement(xi, h).unwrap();
            let eps: Vec<f64> = b
                .iter()
                .map(|row| row.iter().zip(&u).map(|(x, y)| x * y).sum())
                .collect();
            let expect = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
            for (e, x) in eps.iter().zip(expect) {
                assert!((e - x).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn hooke_matrix() {
        let h = constitutive_matrix(2.0, 0.0).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expect = match (i, j) {
                    (a, b) if a == b && a < 3 => 2.0,
                    (a, b) if a == b => 1.0,
                    _ => 0.0,
                };
                assert_eq!(h.0[i][j], expect);
            }
        }
        let h = constitutive_matrix(1.0, 0.3).unwrap();
        assert!((h.0[0][0] - 0.7 / 0.52).abs() < 1e-15);
        assert!((h.0[0][1] - 0.3 / 0.52).abs() < 1e-15);
        assert!((h.0[0][0] - 1.346154).abs() < 1e-6);
        assert!((h.0[0][1] - 0.576923).abs() < 1e-6);
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(h.0[i][j], h.0[j][i]);
            }
        }
        assert!(constitutive_matrix(1.0, 0.5).is_err());
        assert!(constitutive_matrix(0.0, 0.3).is_err());
    }

    #[test]
    fn stiffness_linear_in_h_matrix() {
        let h = constitutive_matrix(1.0, 0.3).unwrap();
        let k1 = element_stiffness(&h, 1.0).unwrap();
        let k3 = element_stiffness(&h.scaled(3.5), 1.0).unwrap();
        for i in 0..24 {
            for j in 0..24 {
                assert!((k3.get(i, j) - 3.5 * k1.get(i, j)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn stiffness_annihilates_rigid_modes() {
        let h = constitutive_matrix(1.0, 0.3).unwrap();
        let k = element_stiffness(&h, 1.0).unwrap();
        let mut modes: Vec<[f64; 24]> = Vec::new();
        for d in 0..3 {
            let mut u = [0.0; 24];
            for a in 0..8 {
                u[3 * a + d] = 1.0;
            }
            modes.push(u);
        }
        // infinitesimal rotations about each axis
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let mut u = [0.0; 24];
            for a in 0..8 {
                let x = LOCAL_NODE_SIGNS[a];
                u[3 * a + p] = -x[q];
                u[3 * a + q] = x[p];
            }
            modes.push(u);
        }
        for u in &modes {
            for row in k.0.iter() {
                let f: f64 = row.iter().zip(u).map(|(a, b)| a * b).sum();
                assert!(f.abs() < 1e-13);
            }
        }
    }
}
