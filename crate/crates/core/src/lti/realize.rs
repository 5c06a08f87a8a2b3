use nalgebra::DMatrix;

use super::{PoleResidueSystem, StateSpaceSystem};
use crate::error::Result;

// Real chains become Jordan chains of m_in-dimensional blocks:
//   ẋ_j = −d x_j + x_{j+1},  ẋ_k = −d x_k + u,  so x_j = u/(s+d)^{k−j+1}.
// A conjugate pair is realized from the member with Im[d] > 0 in real
// coordinates z_j = p_j + i q_j of the complex chain; the partner supplies
// the conjugate, so the output contribution is 2 Re(Σ R z).
pub(super) fn realize(sys: &PoleResidueSystem) -> Result<StateSpaceSystem> {
    let m = sys.inputs();
    let p = sys.outputs();
    let n: usize = sys
        .chains()
        .iter()
        .filter(|c| c.pole().im >= 0.0)
        .map(|c| c.chain_length() * if c.is_real() { 1 } else { 2 })
        .sum::<usize>()
        * m;

    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DMatrix::<f64>::zeros(n, m);
    let mut c = DMatrix::<f64>::zeros(p, n);
    let mut offset = 0;

    for chain in sys.chains().iter().filter(|c| c.pole().im >= 0.0) {
        let k = chain.chain_length();
        let lambda = -chain.pole();
        if chain.is_real() {
            for j in 0..k {
                let row = offset + j * m;
                for i in 0..m {
                    a[(row + i, row + i)] = lambda.re;
                    if j + 1 < k {
                        a[(row + i, row + m + i)] = 1.0;
                    } else {
                        b[(row + i, i)] = 1.0;
                    }
                }
                let residue = &chain.residues()[k - 1 - j];
                for r in 0..p {
                    for i in 0..m {
                        c[(r, row + i)] = residue[(r, i)].re;
                    }
                }
            }
            offset += k * m;
        } else {
            // level j occupies [p_j (m states), q_j (m states)]
            for j in 0..k {
                let pr = offset + j * 2 * m;
                let qr = pr + m;
                for i in 0..m {
                    a[(pr + i, pr + i)] = lambda.re;
                    a[(pr + i, qr + i)] = -lambda.im;
                    a[(qr + i, pr + i)] = lambda.im;
                    a[(qr + i, qr + i)] = lambda.re;
                    if j + 1 < k {
                        a[(pr + i, pr + 2 * m + i)] = 1.0;
                        a[(qr + i, qr + 2 * m + i)] = 1.0;
                    } else {
                        b[(pr + i, i)] = 1.0;
                    }
                }
                let residue = &chain.residues()[k - 1 - j];
                for r in 0..p {
                    for i in 0..m {
                        c[(r, pr + i)] = 2.0 * residue[(r, i)].re;
                        c[(r, qr + i)] = -2.0 * residue[(r, i)].im;
                    }
                }
            }
            offset += 2 * k * m;
        }
    }

    StateSpaceSystem::new(a, b, c, sys.feedthrough().clone())
}
