//! Shipped group presentations.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::groups::GroupPresentation;
use crate::spaces::{BoundarySet, CayleyTree, H2Point, Mobius, ModelPoint, ModelSpace};

/// Free group of the given rank acting on its unit-edge Cayley tree.
pub fn unit_tree(rank: usize) -> Result<GroupPresentation> {
    GroupPresentation::tree(ModelSpace::Tree(CayleyTree::unit(rank)))
}

/// Translation by `length` along the disk diameter from `alpha + π` to
/// `alpha` (angles on the Cayley circle).
pub fn diameter_translation(alpha: f64, length: f64) -> Mobius {
    let r = Mobius::normalizer(alpha).inverse();
    let h = (0.5 * length).exp();
    let d = Mobius::new(h, 0.0, 0.0, 1.0 / h).expect("positive determinant");
    r.mul(&d).mul(&r.inverse())
}

/// Half-width of the boundary arc cut off by the geodesic perpendicular to
/// a diameter at distance `length / 2` from the disk center.
pub fn domain_half_width(length: f64) -> f64 {
    (0.5 * length).tanh().acos()
}

/// Schottky group generated by translations along the diameters at angles
/// `alphas[i]`, with the given translation lengths. Domains are the closed
/// arcs of half-width [`domain_half_width`] around each axis endpoint; the
/// basepoint is `i`, the disk center.
pub fn diameter_schottky(alphas: &[f64], lengths: &[f64]) -> Result<GroupPresentation> {
    if alphas.len() != lengths.len() || alphas.is_empty() {
        return Err(Error::InvalidInput("need one axis angle per translation length".into()));
    }
    let mut matrices = Vec::new();
    let mut domains = Vec::new();
    for (&alpha, &len) in alphas.iter().zip(lengths) {
        if !(len > 0.0) {
            return Err(Error::InvalidInput(format!("translation length {len} must be positive")));
        }
        let phi = domain_half_width(len);
        matrices.push(diameter_translation(alpha, len));
        // letter 2i attracts towards alpha, letter 2i+1 towards alpha + π
        domains.push(BoundarySet::arc(alpha - phi, 2.0 * phi, true, true)?);
        domains.push(BoundarySet::arc(alpha + PI - phi, 2.0 * phi, true, true)?);
    }
    GroupPresentation::h2(matrices, domains, ModelPoint::H2(H2Point::I))
}

/// Translation lengths of the shipped two-generator Schottky group.
pub const SCHOTTKY_LENGTHS: [f64; 2] = [1.8, 1.85];

/// Angle of the first axis; generic so that axis endpoints avoid the dyadic
/// cell boundaries of circle partitions.
pub const SCHOTTKY_AXIS: f64 = 0.3;

/// The shipped H2 Schottky group: perpendicular axes at [`SCHOTTKY_AXIS`]
/// and `SCHOTTKY_AXIS + π/2`, translation lengths [`SCHOTTKY_LENGTHS`].
pub fn schottky() -> Result<GroupPresentation> {
    diameter_schottky(&[SCHOTTKY_AXIS, SCHOTTKY_AXIS + FRAC_PI_2], &SCHOTTKY_LENGTHS)
}

/// The elementary group generated by a single translation.
pub fn cyclic(length: f64) -> Result<GroupPresentation> {
    diameter_schottky(&[0.0], &[length])
}
