//! Composite Gauss–Legendre quadrature with panel doubling.

use crate::error::{Error, Result};

// 10-point Gauss–Legendre rule on [−1, 1] (positive half; symmetric)
const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

const START_PANELS: usize = 8;
const MAX_PANELS: usize = 1 << 16;

/// Integrates a vector-valued integrand over [a, b], doubling the panel
/// count until every component changes by less than `tol`.
///
/// Nodes never touch the endpoints.
pub(crate) fn integrate<const N: usize, F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<[f64; N]>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let mut panels = START_PANELS;
    let mut prev = composite(&mut f, a, b, panels)?;
    loop {
        panels *= 2;
        let next = composite(&mut f, a, b, panels)?;
        let change = prev.iter().zip(next.iter()).map(|(p, n)| (p - n).abs()).fold(0.0, f64::max);
        if change < tol {
            return Ok(next);
        }
        if panels >= MAX_PANELS {
            return Err(Error::NonConvergence { what: "quadrature".into(), residual: change });
        }
        prev = next;
    }
}

fn composite<const N: usize, F>(f: &mut F, a: f64, b: f64, panels: usize) -> Result<[f64; N]>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let h = (b - a) / panels as f64;
    let mut acc = [0.0; N];
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        let half = 0.5 * h;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            for node in [mid - half * x, mid + half * x] {
                let v = f(node)?;
                for (acc_j, v_j) in acc.iter_mut().zip(v.iter()) {
                    *acc_j += w * half * v_j;
                }
            }
        }
    }
    Ok(acc)
}
