use crate::error::{DepthError, Result};

/// Godunov upwind solve of `|∇u| = f` at one node from the smaller neighbor
/// value along each axis (`None` when an axis has no usable neighbor).
pub fn upwind_update(ux: Option<f64>, uy: Option<f64>, dx: f64, f: f64) -> Result<f64> {
    let (u1, u2) = match (ux, uy) {
        (None, None) => return Err(DepthError::NoNeighbor),
        (Some(a), None) | (None, Some(a)) => return Ok(a + f * dx),
        (Some(a), Some(b)) => (a.min(b), a.max(b)),
    };
    let one_sided = u1 + f * dx;
    if one_sided <= u2 {
        return Ok(one_sided);
    }
    let disc = 2.0 * f * f * dx * dx - (u2 - u1) * (u2 - u1);
    if disc < 0.0 {
        return Ok(one_sided);
    }
    Ok(0.5 * (u1 + u2) + 0.5 * disc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert!((upwind_update(Some(0.0), None, 0.1, 1.0).unwrap() - 0.1).abs() < 1e-15);
        assert!((upwind_update(Some(0.0), Some(0.0), 0.1, 1.0).unwrap() - 0.1 / 2f64.sqrt()).abs() < 1e-15);
        assert!((upwind_update(Some(0.0), Some(0.2), 0.1, 1.0).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(upwind_update(None, None, 0.1, 1.0), Err(DepthError::NoNeighbor));
    }

    proptest! {
        #[test]
        fn satisfies_discrete_eikonal(a in 0.0..1.0f64, b in 0.0..1.0f64, f in 0.01..3.0f64) {
            let dx = 0.05;
            let u = upwind_update(Some(a), Some(b), dx, f).unwrap();
            prop_assert!(u >= a.min(b));
            let px = (u - a).max(0.0) / dx;
            let py = (u - b).max(0.0) / dx;
            prop_assert!((px.hypot(py) - f).abs() < 1e-9 * (1.0 + f));
        }

        #[test]
        fn monotone_in_neighbors(a in 0.0..1.0f64, b in 0.0..1.0f64, da in 0.0..0.5f64, f in 0.01..3.0f64) {
            let u0 = upwind_update(Some(a), Some(b), 0.05, f).unwrap();
            let u1 = upwind_update(Some(a + da), Some(b), 0.05, f).unwrap();
            prop_assert!(u1 >= u0 - 1e-15);
        }
    }
}
