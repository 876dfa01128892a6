use crate::lina::{ComplexVector, HermitianMatrix, C64};
use crate::rng::SplitMix64;

/// Hermitian matrix with standard complex normal entries on and above the diagonal.
pub fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
    let mut rng = SplitMix64::new(seed);
    HermitianMatrix::from_upper_fn(n, |_, _| {
        let (a, b) = rng.normal_pair();
        C64::new(a, b)
    })
    .unwrap()
}

pub fn random_vector(n: usize, rng: &mut SplitMix64) -> ComplexVector {
    ComplexVector::new(
        (0..n)
            .map(|_| {
                let (a, b) = rng.normal_pair();
                C64::new(a, b)
            })
            .collect(),
    )
    .unwrap()
}

pub fn random_unit_modulus(n: usize, rng: &mut SplitMix64) -> ComplexVector {
    ComplexVector::new(
        (0..n)
            .map(|_| C64::from_polar(1.0, std::f64::consts::TAU * rng.uniform()))
            .collect(),
    )
    .unwrap()
}
