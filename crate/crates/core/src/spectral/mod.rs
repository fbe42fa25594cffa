//! Periodic function spaces: mode bases, transforms, and spectral operators.

pub mod basis;
pub mod fft;
pub mod field;
pub mod snapshot;

pub use basis::{
    band_limit, build_basis, quadrature_grid, ScalarFamily, ScalarMode, SpectralBasis, Trig, VectorMode,
    MODE_ORDERING_VERSION,
};
pub use field::{
    dealias, differentiate, inner_product, leray_project, max_divergence, spectral_norm_sqr, DiffOp, Field, Rank,
    Representation,
};
pub use snapshot::{read_snapshot, write_snapshot, SnapshotHeader};

#[cfg(test)]
mod tests {
    use super::*;

    fn mode_fields(b: &SpectralBasis<f64>) -> Vec<Field<f64>> {
        (0..b.vector_modes().len())
            .map(|j| {
                let mut a = vec![0.0; j + 1];
                a[j] = 1.0;
                let s = b.vector_spectrum(&a);
                Field::vector(b.grid(), s.map(|c| b.synthesize(&c))).unwrap()
            })
            .collect()
    }

    #[test]
    fn vector_modes_orthonormal_and_solenoidal() {
        let b = build_basis(1.5, 8, 64, 33).unwrap();
        let fields = mode_fields(&b);
        for (i, f) in fields.iter().enumerate() {
            assert!(max_divergence(&b, f).unwrap() < 1e-13);
            for (j, g) in fields.iter().enumerate().take(10) {
                let ip = inner_product(&b, f, g).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12, "({i},{j}) = {ip}");
            }
        }
    }

    #[test]
    fn scalar_modes_orthonormal() {
        let b = build_basis(1.0f64, 8, 4, 33).unwrap();
        let fields: Vec<_> = (0..33)
            .map(|j| {
                let mut c = vec![0.0; j + 1];
                c[j] = 1.0;
                Field::scalar(b.grid(), b.synthesize(&b.scalar_spectrum(&c))).unwrap()
            })
            .collect();
        for (i, f) in fields.iter().enumerate() {
            for (j, g) in fields.iter().enumerate() {
                let ip = inner_product(&b, f, g).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn curl_curl_is_minus_laplacian_on_modes() {
        let b = build_basis(1.0, 8, 64, 1).unwrap();
        for (j, f) in mode_fields(&b).iter().enumerate() {
            let cc = differentiate(&b, &differentiate(&b, f, DiffOp::Curl).unwrap(), DiffOp::Curl).unwrap();
            let k2 = b.vector_modes()[j].wavenumber_sqr();
            for c in 0..3 {
                for (x, y) in cc.values(c).unwrap().iter().zip(f.values(c).unwrap()) {
                    assert!((x - k2 * y).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn identity_gram_for_unit_weight() {
        let b = build_basis(1.0f64, 8, 64, 33).unwrap();
        let one = b.analyze(&vec![1.0; b.points()]);
        let g = b.weighted_gram_vector(&one, 64);
        let s = b.weighted_gram_scalar(&one, 33);
        for i in 0..64 {
            for j in 0..64 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - e).abs() < 1e-12);
            }
        }
        for i in 0..33 {
            assert!((s[(i, i)] - 1.0).abs() < 1e-12);
        }
    }
}
