//! Counter-based pseudorandom streams.
//!
//! Every draw is a pure function of (seed, counter), so sampling can be
//! partitioned across threads in any order without changing results. The
//! generator is the splitmix64 finalizer applied to an affine counter walk;
//! it is not cryptographic.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Raw 64-bit output at position `n` of the stream with the given seed.
#[inline]
pub fn word_at(seed: u64, n: u64) -> u64 {
    mix64(seed.wrapping_add(GAMMA.wrapping_mul(n.wrapping_add(1))))
}

/// Derive an independent sub-seed, e.g. one per property or per radius.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    mix64(seed ^ mix64(label.wrapping_add(0x9E6D_1A2B_3C4D_5E6F)))
}

/// Sequential view of one sample's stream. The sample index is hashed into
/// the stream seed, so streams at distinct indices are independent and each
/// may be drawn from indefinitely.
#[derive(Clone, Copy, Debug)]
pub struct SampleStream {
    seed: u64,
    pos: u64,
}

impl SampleStream {
    pub fn at(seed: u64, index: u64) -> Self {
        let s = mix64(seed).wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
        SampleStream {
            seed: mix64(s),
            pos: 0,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let w = word_at(self.seed, self.pos);
        self.pos = self.pos.wrapping_add(1);
        w
    }

    /// Uniform in [0, 1), 53-bit resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1]; never returns zero, safe for logs and reciprocals.
    #[inline]
    pub fn next_f64_open(&mut self) -> f64 {
        1.0 - self.next_f64()
    }

    /// Uniform in [lo, hi).
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal via Box-Muller (consumes exactly two words).
    pub fn normal(&mut self) -> f64 {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Random sign, +1.0 or -1.0.
    #[inline]
    pub fn sign(&mut self) -> f64 {
        if self.next_u64() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Log-uniform magnitude in [1, 10^decades] with a random sign: the
    /// reciprocal-of-uniform heavy-tail law used by the fuzz suites.
    pub fn heavy_tailed(&mut self, decades: f64) -> f64 {
        let e = self.next_f64() * decades;
        self.sign() * 10f64.powf(e)
    }
}

use crate::matrix::{Field, Matrix, Scalar};

/// Gaussian matrix with iid standard-normal components (per real component).
pub fn gaussian_matrix(stream: &mut SampleStream, n: usize, field: Field) -> Matrix {
    Matrix::from_fn(n, field, |_, _| match field {
        Field::Real => Scalar::new(stream.normal(), 0.0),
        Field::Complex => Scalar::new(stream.normal(), stream.normal()),
    })
}

/// Random element of SL(n, F): Gaussian entries rescaled to determinant one.
///
/// Draws with condition number above 1e3 are redrawn (each attempt under its
/// own counter positions, so the result stays a pure function of the
/// arguments); the factorization contracts at 1e-9 need an ensemble whose
/// conditioning leaves that much headroom in double precision.
pub fn random_sl(seed: u64, index: u64, n: usize, field: Field) -> Matrix {
    for attempt in 0..16u64 {
        let mut stream = SampleStream::at(derive_seed(seed, 0xA11CE ^ (attempt << 32)), index);
        let mut g = gaussian_matrix(&mut stream, n, field);
        let sv = match g.singular_values() {
            Ok(sv) => sv,
            Err(_) => continue,
        };
        if sv[n - 1] < 1e-3 * sv[0] {
            continue;
        }
        let det = g.det();
        match field {
            Field::Real => {
                if det.re < 0.0 {
                    g.scale_row(0, -1.0);
                }
                let s = det.norm().powf(-1.0 / n as f64);
                for i in 0..n {
                    g.scale_row(i, s);
                }
            }
            Field::Complex => {
                // divide by any n-th root of det
                let root = Scalar::from_polar(det.norm().powf(1.0 / n as f64), det.arg() / n as f64);
                let g2 = Matrix::from_fn(n, field, |i, j| g[(i, j)] / root);
                g = g2;
            }
        }
        return g;
    }
    Matrix::identity(n, field)
}

/// Random upper unitriangular matrix with entries uniform in [-range, range].
pub fn random_unitriangular(stream: &mut SampleStream, n: usize, field: Field, range: f64) -> Matrix {
    let mut m = Matrix::identity(n, field);
    for i in 0..n {
        for j in i + 1..n {
            m[(i, j)] = match field {
                Field::Real => Scalar::new(stream.uniform(-range, range), 0.0),
                Field::Complex => {
                    Scalar::new(stream.uniform(-range, range), stream.uniform(-range, range))
                }
            };
        }
    }
    m
}

/// Random Hermitian positive-definite matrix B B* + eps I.
pub fn random_positive_definite(stream: &mut SampleStream, n: usize, field: Field) -> Matrix {
    let b = gaussian_matrix(stream, n, field);
    let mut m = b.mul(&b.adjoint());
    for i in 0..n {
        m[(i, i)] += 1e-3;
    }
    m
}

/// Random unitary/orthogonal matrix: the compact factor of a Gaussian draw,
/// polished to working-precision unitarity with one Newton step
/// k <- k (3I - k* k)/2 (block identities amplify any residual by 1/|d|^2).
pub fn random_unitary(seed: u64, index: u64, n: usize, field: Field) -> Matrix {
    let g = random_sl(seed, index, n, field);
    let k = crate::iwasawa::iwasawa(&g)
        .expect("random SL element decomposes")
        .k;
    let mut m = k.adjoint().mul(&k);
    for i in 0..n {
        m[(i, i)] -= 3.0;
    }
    let half = k.mul(&m);
    Matrix::from_fn(n, field, |i, j| -0.5 * half[(i, j)])
}
