//! Viewpoint-invariant descriptor for 3D point pairs.
//!
//! Given a center point with unit normal and a neighbor point with its own
//! unit normal, an orthonormal right-handed basis is built from the offset
//! direction and the center normal. Projections onto that basis rotate with
//! the scene, so the extracted 8-vector is rotation invariant; its first five
//! entries are additionally scale invariant.

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Length of the VI descriptor.
pub const VI_LEN: usize = 8;

/// Collinearity threshold on `1 - (r̂·n̂)²` below which the fallback basis
/// is used.
const DEGENERACY_TOL: f64 = 1e-8;

/// Right-handed orthonormal basis from an offset and a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoBasis {
    pub r_hat: Vector3<f64>,
    pub v_hat: Vector3<f64>,
    pub w_hat: Vector3<f64>,
    /// True when the offset and normal were collinear and the fallback axis
    /// rule produced `v_hat`.
    pub degenerate: bool,
}

/// The 8-entry viewpoint-invariant descriptor and the basis it used.
#[derive(Debug, Clone, PartialEq)]
pub struct VIDescriptor {
    pub beta: [f64; VI_LEN],
    pub basis: OrthoBasis,
}

/// Gram-Schmidt basis `{r̂, v̂, ŵ}` from an offset vector and a unit normal.
///
/// `r̂` is the normalized offset, `v̂` the normal component orthogonal to it,
/// and `ŵ = r̂ × v̂`. When the two directions are collinear within `tol`
/// (measured on `1 - (r̂·n̂)²`), `v̂` falls back to the coordinate axis least
/// aligned with `r̂` (ties resolved in x, y, z order), orthogonalized
/// against `r̂`.
pub fn gram_schmidt_basis(
    r_vec: &Vector3<f64>,
    n_mu: &Vector3<f64>,
    tol: f64,
) -> Result<OrthoBasis> {
    let r_len = r_vec.norm();
    if r_len == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let r_hat = r_vec / r_len;
    let proj = r_hat.dot(n_mu);
    let ortho2 = 1.0 - proj * proj;

    let (v_hat, degenerate) = if ortho2 < tol {
        let mut axis = 0;
        for a in 1..3 {
            if r_hat[a].abs() < r_hat[axis].abs() {
                axis = a;
            }
        }
        let mut e = Vector3::zeros();
        e[axis] = 1.0;
        let v = e - r_hat[axis] * r_hat;
        ((v / v.norm()), true)
    } else {
        ((n_mu - proj * r_hat) / ortho2.sqrt(), false)
    };

    let w_hat = r_hat.cross(&v_hat);
    Ok(OrthoBasis { r_hat, v_hat, w_hat, degenerate })
}

/// The viewpoint-invariant descriptor of a (center, neighbor) pair.
///
/// Entry order: `n̂_α·n̂_μ`, `(r⃗·n̂_μ)/‖r⃗‖`, `(r⃗·n̂_α)/‖r⃗‖`, `n̂_α·v̂`,
/// `n̂_α·ŵ`, `r⃗·n̂_μ`, `r⃗·(n̂_α×n̂_μ)`, `‖r⃗‖`, where `r⃗` points from the
/// center `μ` to the neighbor `α`.
pub fn vi_descriptor(
    p_mu: &Vector3<f64>,
    n_mu: &Vector3<f64>,
    p_alpha: &Vector3<f64>,
    n_alpha: &Vector3<f64>,
) -> Result<VIDescriptor> {
    let r = p_alpha - p_mu;
    let r_len = r.norm();
    if r_len == 0.0 {
        return Err(Error::ZeroOffset);
    }
    let basis = gram_schmidt_basis(&r, n_mu, DEGENERACY_TOL)?;
    let beta = [
        n_alpha.dot(n_mu),
        r.dot(n_mu) / r_len,
        r.dot(n_alpha) / r_len,
        n_alpha.dot(&basis.v_hat),
        n_alpha.dot(&basis.w_hat),
        r.dot(n_mu),
        r.dot(&n_alpha.cross(n_mu)),
        r_len,
    ];
    Ok(VIDescriptor { beta, basis })
}
