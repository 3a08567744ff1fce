//! The surface scattering kernel `K` and the bulk-surface kernel `M`,
//! reduced to tangential components.
//!
//! For surface points `u`, `u'` with outward normal `n(u)` and interior /
//! exterior media coefficients `C_i`, `C_e` (diagonal over the (E, H) block
//! index),
//!
//! ```text
//! K(u,u') = 2 P (C_i + C_e)^{-1} n(u) × [C_i G_1(u,u') - C_e G_0(u,u')]
//! M(u,r)  = -2 P (C_i + C_e)^{-1} C_e n(u) × G_0(u,r)
//! P = [[0, -1], [1, 0]]
//! ```
//!
//! where `n(u) ×` acts on each 3×3 block from the left. Only tangential
//! projections contribute to the scattered Green tensor, so `K` is stored as
//! the 4×4 matrix over the fixed basis ordering
//! `(E⊗t_perp, E⊗t_z, H⊗t_perp, H⊗t_z)` and `M` as the 4×3 block mapping a
//! bulk electric vector to tangential (E, H) components. The default
//! coefficients `C_i = diag(ε₁, μ₁)`, `C_e = diag(ε₀, μ₀)` reduce the
//! coincidence singularity of `K` to a weak `1/|u-u'|` divergence on smooth
//! surfaces; with them the tangential reduction uses the identity
//! `t_jᵀ (n × X) t_j' = (t_j × n) · (X t_j')`.

use crate::geometry::SurfaceSample;
use crate::green::{green_blocks, Medium};
use crate::linalg::{cross, dot, mat_vec, vec_mat, Vec3};
use crate::{Error, Result};

/// Diagonal interior/exterior coefficient matrices over the (E, H) index.
/// Index 0 is the electric entry, index 1 the magnetic one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientChoice {
    pub c_i: [f64; 2],
    pub c_e: [f64; 2],
}

impl CoefficientChoice {
    /// The singularity-reducing default: `C_i = diag(ε₁, μ₁)`,
    /// `C_e = diag(ε₀, μ₀)`.
    pub fn default_for(interior: &Medium, exterior: &Medium) -> Self {
        CoefficientChoice {
            c_i: [interior.epsilon, interior.mu],
            c_e: [exterior.epsilon, exterior.mu],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for k in 0..2 {
            if self.c_i[k] == 0.0 || self.c_e[k] == 0.0 || self.c_i[k] + self.c_e[k] == 0.0 {
                return Err(Error::Config(
                    "coefficient matrices must be invertible with invertible sum".into(),
                ));
            }
        }
        Ok(())
    }

    #[inline]
    fn inv_sum(&self) -> [f64; 2] {
        [
            1.0 / (self.c_i[0] + self.c_e[0]),
            1.0 / (self.c_i[1] + self.c_e[1]),
        ]
    }
}

/// Tangentially reduced value of `K` between two surface samples, over the
/// basis ordering `(E⊗t_perp, E⊗t_z, H⊗t_perp, H⊗t_z)`.
#[derive(Debug, Clone, Copy)]
pub struct KernelBlock {
    pub matrix: [[f64; 4]; 4],
    pub from: SurfaceSample,
    pub to: SurfaceSample,
}

/// Tangentially reduced value of `M`: rows over the 4-dimensional tangential
/// (E, H) basis at `u`, columns over the bulk electric 3-vector at `r`.
#[derive(Debug, Clone, Copy)]
pub struct BulkSurfaceBlock {
    pub matrix: [[f64; 3]; 4],
}

/// Evaluates the tangential 4×4 block of `K(u, u')`.
///
/// `media` is ordered (interior, exterior).
pub fn kernel_k(
    u: &SurfaceSample,
    u_prime: &SurfaceSample,
    kappa: f64,
    media: &(Medium, Medium),
    coeffs: &CoefficientChoice,
) -> Result<KernelBlock> {
    let (interior, exterior) = media;
    let g1 = green_blocks(interior, kappa, u.position, u_prime.position)?;
    let g0 = green_blocks(exterior, kappa, u.position, u_prime.position)?;
    let d = coeffs.inv_sum();

    // Combination blocks over (row-field, column-field); the coefficient
    // index follows the row field.
    let mut comb_h = [[[0.0; 3]; 3]; 2]; // [q][.][.] = (C_i G1 - C_e G0)^{(Hq)}
    let mut comb_e = [[[0.0; 3]; 3]; 2]; // [q][.][.] = (C_i G1 - C_e G0)^{(Eq)}
    for i in 0..3 {
        for j in 0..3 {
            comb_e[0][i][j] = coeffs.c_i[0] * g1.ee[i][j] - coeffs.c_e[0] * g0.ee[i][j];
            comb_e[1][i][j] = coeffs.c_i[0] * g1.eh[i][j] - coeffs.c_e[0] * g0.eh[i][j];
            comb_h[0][i][j] = coeffs.c_i[1] * g1.he[i][j] - coeffs.c_e[1] * g0.he[i][j];
            comb_h[1][i][j] = coeffs.c_i[1] * g1.hh[i][j] - coeffs.c_e[1] * g0.hh[i][j];
        }
    }

    // t_jᵀ (n × X) t_j' = (t_j × n) · (X t_j').
    let w = [cross(u.tangent_perp, u.normal), cross(u.tangent_z, u.normal)];
    let t_prime = [u_prime.tangent_perp, u_prime.tangent_z];

    let mut matrix = [[0.0; 4]; 4];
    for (jp, tp) in t_prime.iter().enumerate() {
        for q in 0..2 {
            let col = 2 * q + jp;
            let ve = mat_vec(&comb_e[q], *tp);
            let vh = mat_vec(&comb_h[q], *tp);
            for (j, wj) in w.iter().enumerate() {
                // Rows (E, j): -2 d_H (t_j × n)·(comb_H q); rows (H, j): +2 d_E (...comb_E q).
                matrix[j][col] = -2.0 * d[1] * dot(*wj, vh);
                matrix[2 + j][col] = 2.0 * d[0] * dot(*wj, ve);
            }
        }
    }

    Ok(KernelBlock {
        matrix,
        from: *u,
        to: *u_prime,
    })
}

/// Evaluates the tangential 4×3 block of `M(u, r0)` for a bulk point `r0`
/// strictly outside the body.
pub fn kernel_m(
    u: &SurfaceSample,
    r0: Vec3,
    kappa: f64,
    media: &(Medium, Medium),
    coeffs: &CoefficientChoice,
) -> Result<BulkSurfaceBlock> {
    let (_, exterior) = media;
    let g0 = green_blocks(exterior, kappa, u.position, r0)?;
    let d = coeffs.inv_sum();

    let w_perp = cross(u.tangent_perp, u.normal);
    let w_z = cross(u.tangent_z, u.normal);

    // Rows (E, j) = +2 d_H C_e,H (t_j × n)ᵀ G0^{HE}; rows (H, j) = -2 d_E C_e,E (t_j × n)ᵀ G0^{EE}.
    let eh_scale = 2.0 * d[1] * coeffs.c_e[1];
    let ee_scale = -2.0 * d[0] * coeffs.c_e[0];
    let row_e_perp = vec_mat(w_perp, &g0.he);
    let row_e_z = vec_mat(w_z, &g0.he);
    let row_h_perp = vec_mat(w_perp, &g0.ee);
    let row_h_z = vec_mat(w_z, &g0.ee);

    let mut matrix = [[0.0; 3]; 4];
    for c in 0..3 {
        matrix[0][c] = eh_scale * row_e_perp[c];
        matrix[1][c] = eh_scale * row_e_z[c];
        matrix[2][c] = ee_scale * row_h_perp[c];
        matrix[3][c] = ee_scale * row_h_z[c];
    }
    Ok(BulkSurfaceBlock { matrix })
}
