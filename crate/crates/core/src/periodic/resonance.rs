use serde::Serialize;

use crate::dae::SystemDef;
use crate::degree::ZeroRecord;
use crate::error::Result;
use crate::linalg::{expm, max_row_norm, near_singular_scaled, serialize_rows, Lu, Matrix};

/// Relative threshold on the smallest singular value of `e^{AT} - I`.
pub const RESONANCE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Resonance {
    Resonant,
    NonResonant,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResonanceVerdict {
    pub zero: ZeroRecord,
    #[serde(serialize_with = "serialize_rows")]
    pub a: Matrix,
    #[serde(serialize_with = "serialize_rows")]
    pub monodromy: Matrix,
    pub det_mi: f64,
    pub verdict: Resonance,
}

/// True when `m - I` is singular relative to the size of `m`.
pub(crate) fn unit_multiplier(m: &Matrix) -> bool {
    let n = m.nrows();
    let mi = m - Matrix::identity(n, n);
    near_singular_scaled(&mi, RESONANCE_TOL, max_row_norm(m))
}

/// A zero is resonant when `A` has an eigenvalue `2nπi/T`, i.e. when
/// `e^{AT}` has the eigenvalue 1.
pub fn classify_resonance(sys: &SystemDef, z: &ZeroRecord) -> Result<ResonanceVerdict> {
    let a = sys.reduced_linearization(&z.point)?;
    let monodromy = expm(&(&a * sys.period()))?;
    let k = a.nrows();
    let det_mi = Lu::factor_exact(&(&monodromy - Matrix::identity(k, k)))
        .map(|lu| lu.det())
        .unwrap_or(0.0);
    let verdict = if unit_multiplier(&monodromy) {
        Resonance::Resonant
    } else {
        Resonance::NonResonant
    };
    Ok(ResonanceVerdict {
        zero: z.clone(),
        a,
        monodromy,
        det_mi,
        verdict,
    })
}
