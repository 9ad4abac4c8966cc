use rand::Rng;

use super::frame::{low_mask, PauliFrame, MAX_SLOTS};
use crate::error::{domain, Error, Result};

/// A vector of GF(2)^{2n} stored as `(x, z)` halves.
type Vec2 = (u64, u64);

#[inline]
fn omega(a: Vec2, b: Vec2) -> bool {
    ((a.0 & b.1) ^ (a.1 & b.0)).count_ones() & 1 == 1
}

/// Sign-free Clifford as a symplectic matrix over GF(2).
///
/// Column `j` is the image of `X_j`, column `n + j` the image of `Z_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticClifford {
    n: u32,
    x_images: Vec<Vec2>,
    z_images: Vec<Vec2>,
}

impl SymplecticClifford {
    pub fn identity(n: u32) -> Result<Self> {
        PauliFrame::identity(n)?;
        Ok(Self {
            n,
            x_images: (0..n).map(|j| (1u64 << j, 0)).collect(),
            z_images: (0..n).map(|j| (0, 1u64 << j)).collect(),
        })
    }

    /// Build from the images of `X_j` and `Z_j`; rejects non-symplectic input.
    pub fn from_images(x_images: Vec<PauliFrame>, z_images: Vec<PauliFrame>) -> Result<Self> {
        let n = x_images.len() as u32;
        if z_images.len() != x_images.len() {
            return Err(Error::DimensionMismatch {
                expected: x_images.len(),
                actual: z_images.len(),
            });
        }
        PauliFrame::identity(n)?;
        for p in x_images.iter().chain(&z_images) {
            if p.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n as usize,
                    actual: p.n() as usize,
                });
            }
        }
        let c = Self {
            n,
            x_images: x_images.iter().map(|p| (p.x_mask(), p.z_mask())).collect(),
            z_images: z_images.iter().map(|p| (p.x_mask(), p.z_mask())).collect(),
        };
        if !c.is_symplectic() {
            return domain("images do not preserve the symplectic form");
        }
        Ok(c)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Checks `Sᵀ J S = J` through the pairwise symplectic products of columns.
    pub fn is_symplectic(&self) -> bool {
        let n = self.n as usize;
        for i in 0..n {
            for j in 0..n {
                if omega(self.x_images[i], self.x_images[j])
                    || omega(self.z_images[i], self.z_images[j])
                    || omega(self.x_images[i], self.z_images[j]) != (i == j)
                {
                    return false;
                }
            }
        }
        true
    }

    /// Dense `2n × 2n` matrix; row `r < n` is the X bit of slot `r`, row
    /// `n + r` its Z bit.
    pub fn matrix(&self) -> Vec<Vec<u8>> {
        let n = self.n as usize;
        let mut s = vec![vec![0u8; 2 * n]; 2 * n];
        let cols = self.x_images.iter().chain(&self.z_images);
        for (c, &(x, z)) in cols.enumerate() {
            for r in 0..n {
                s[r][c] = ((x >> r) & 1) as u8;
                s[n + r][c] = ((z >> r) & 1) as u8;
            }
        }
        s
    }

    /// `P ↦ C† P C` on the sign-free representation.
    pub fn conjugate(&self, p: &PauliFrame) -> Result<PauliFrame> {
        if p.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n as usize,
                actual: p.n() as usize,
            });
        }
        Ok(self.conjugate_unchecked(p))
    }

    #[inline]
    pub(crate) fn conjugate_unchecked(&self, p: &PauliFrame) -> PauliFrame {
        let (mut ox, mut oz) = (0u64, 0u64);
        let mut bits = p.x_mask();
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            ox ^= self.x_images[j].0;
            oz ^= self.x_images[j].1;
            bits &= bits - 1;
        }
        let mut bits = p.z_mask();
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            ox ^= self.z_images[j].0;
            oz ^= self.z_images[j].1;
            bits &= bits - 1;
        }
        PauliFrame::from_masks_unchecked(self.n, ox, oz)
    }
}

/// Uniform element of Sp(2n, 2).
///
/// Images are chosen one symplectic pair at a time: `X_j` goes to a uniform
/// nonzero vector of the symplectic complement of the pairs chosen so far and
/// `Z_j` to a uniform partner in that complement. Uniform vectors of the
/// complement come from projecting uniform vectors of the whole space.
pub fn sample_clifford<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<SymplecticClifford> {
    if n == 0 || n > MAX_SLOTS {
        return domain(format!("Clifford size {n} outside 1..={MAX_SLOTS}"));
    }
    let mask = low_mask(n);
    let mut xs: Vec<Vec2> = Vec::with_capacity(n as usize);
    let mut zs: Vec<Vec2> = Vec::with_capacity(n as usize);

    let project = |u: Vec2, xs: &[Vec2], zs: &[Vec2]| -> Vec2 {
        let mut out = u;
        for (&v, &w) in xs.iter().zip(zs) {
            if omega(u, w) {
                out.0 ^= v.0;
                out.1 ^= v.1;
            }
            if omega(u, v) {
                out.0 ^= w.0;
                out.1 ^= w.1;
            }
        }
        out
    };

    for _ in 0..n {
        let v = loop {
            let u = (rng.random::<u64>() & mask, rng.random::<u64>() & mask);
            let v = project(u, &xs, &zs);
            if v != (0, 0) {
                break v;
            }
        };
        let w = loop {
            let u = (rng.random::<u64>() & mask, rng.random::<u64>() & mask);
            let w = project(u, &xs, &zs);
            if omega(v, w) {
                break w;
            }
        };
        xs.push(v);
        zs.push(w);
    }
    Ok(SymplecticClifford {
        n,
        x_images: xs,
        z_images: zs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn mat_mul(a: &[Vec<u8>], b: &[Vec<u8>]) -> Vec<Vec<u8>> {
        let d = a.len();
        let mut c = vec![vec![0u8; d]; d];
        for i in 0..d {
            for j in 0..d {
                let mut s = 0;
                for l in 0..d {
                    s ^= a[i][l] & b[l][j];
                }
                c[i][j] = s;
            }
        }
        c
    }

    fn j_form(n: usize) -> Vec<Vec<u8>> {
        let mut j = vec![vec![0u8; 2 * n]; 2 * n];
        for i in 0..n {
            j[i][n + i] = 1;
            j[n + i][i] = 1;
        }
        j
    }

    #[test]
    fn sampled_matrices_preserve_the_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=6 {
            for _ in 0..50 {
                let c = sample_clifford(n, &mut rng).unwrap();
                let s = c.matrix();
                let st: Vec<Vec<u8>> = (0..s.len())
                    .map(|i| (0..s.len()).map(|j| s[j][i]).collect())
                    .collect();
                let lhs = mat_mul(&mat_mul(&st, &j_form(n as usize)), &s);
                assert_eq!(lhs, j_form(n as usize));
                assert!(c.is_symplectic());
            }
        }
        let c = sample_clifford(64, &mut rng).unwrap();
        assert!(c.is_symplectic());
    }

    #[test]
    fn hadamard_swaps_x_and_z() {
        let z: PauliFrame = "Z".parse().unwrap();
        let x: PauliFrame = "X".parse().unwrap();
        let h = SymplecticClifford::from_images(vec![z], vec![x]).unwrap();
        assert_eq!(h.conjugate(&x).unwrap(), z);
        assert_eq!(h.conjugate(&"Y".parse().unwrap()).unwrap().to_string(), "Y");
        assert!(SymplecticClifford::from_images(vec![x], vec![x]).is_err());
    }

    #[test]
    fn identity_and_dimension_checks() {
        let id = SymplecticClifford::identity(3).unwrap();
        let p: PauliFrame = "XYZ".parse().unwrap();
        assert_eq!(id.conjugate(&p).unwrap(), p);
        let e = PauliFrame::identity(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = sample_clifford(3, &mut rng).unwrap();
        assert!(c.conjugate(&e).unwrap().is_identity());
        assert!(c.conjugate(&PauliFrame::identity(2).unwrap()).is_err());
    }

    #[test]
    fn all_six_single_slot_elements_appear_equally() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 600_000u64;
        let mut counts: HashMap<Vec<Vec<u8>>, u64> = HashMap::new();
        for _ in 0..trials {
            *counts.entry(sample_clifford(1, &mut rng).unwrap().matrix()).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for &c in counts.values() {
            assert!((c as f64 - trials as f64 * p).abs() < 5.0 * sigma);
        }
    }
}
