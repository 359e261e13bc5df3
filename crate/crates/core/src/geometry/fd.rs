//! Central difference stencils for vector-valued curves.

use crate::{Result, Vector};

pub(crate) fn derivative<F>(h: f64, mut f: F) -> Result<Vector>
where
    F: FnMut(f64) -> Result<Vector>,
{
    let p1 = f(h)?;
    let m1 = f(-h)?;
    let p2 = f(2.0 * h)?;
    let m2 = f(-2.0 * h)?;
    Ok(((p1 - m1) * 8.0 - (p2 - m2)) / (12.0 * h))
}

/// [`derivative`] at steps `h` and `h/2` combined by one Richardson step,
/// which cancels the `h⁴` term.
pub(crate) fn extrapolated_derivative<F>(h: f64, mut f: F) -> Result<Vector>
where
    F: FnMut(f64) -> Result<Vector>,
{
    let coarse = derivative(h, &mut f)?;
    let fine = derivative(0.5 * h, &mut f)?;
    Ok((fine * 16.0 - coarse) / 15.0)
}

pub(crate) fn second_derivative<F>(h: f64, mut f: F) -> Result<Vector>
where
    F: FnMut(f64) -> Result<Vector>,
{
    let c = f(0.0)?;
    let p1 = f(h)?;
    let m1 = f(-h)?;
    let p2 = f(2.0 * h)?;
    let m2 = f(-2.0 * h)?;
    Ok(((p1 + m1) * 16.0 - (p2 + m2) - c * 30.0) / (12.0 * h * h))
}

/// Second-order central difference with a caller-chosen step.
pub(crate) fn central<F>(h: f64, mut f: F) -> Result<Vector>
where
    F: FnMut(f64) -> Result<Vector>,
{
    Ok((f(h)? - f(-h)?) / (2.0 * h))
}
