//! Deterministic random generators for frame systems, transforms and
//! coefficient families (feature `testkit`).
//!
//! Everything is driven by a caller-supplied [`ChaCha8Rng`], so a fixed seed
//! reproduces the same systems on every platform and run.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::frame_bounds;
use crate::measure::MeasureAtom;
use crate::model::{InnerAtom, LocalSystem, RelaySystem, Subspace};
use crate::numerics::{orthonormalize, DenseMatrix, Vector, ORTHO_DROP_TOL};
use crate::ops::CoefficientFamily;

/// Seeded generator.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal draw (Box-Muller).
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Matrix of independent normals scaled by `scale`.
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = gaussian(rng) * scale;
        }
    }
    m
}

/// Vector of independent normals.
pub fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    Vector::new((0..dim).map(|_| gaussian(rng)).collect()).expect("finite normals")
}

/// Uniformly random direction.
pub fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    loop {
        let v = random_vector(rng, dim);
        let n = v.norm();
        if n > 1e-6 {
            return v.scale(1.0 / n);
        }
    }
}

/// Random `n x k` matrix with orthonormal columns.
pub fn random_orthonormal(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DenseMatrix {
    assert!(
        k <= n,
        "cannot fit {k} orthonormal columns in dimension {n}"
    );
    loop {
        let raw = random_matrix(rng, n, k, 1.0);
        if let Ok(u) = orthonormalize(&raw, ORTHO_DROP_TOL) {
            if u.cols() == k {
                return u;
            }
        }
    }
}

/// Random subspace of the given dimension.
pub fn random_subspace(rng: &mut ChaCha8Rng, ambient: usize, dim: usize) -> Subspace {
    Subspace::new(random_orthonormal(rng, ambient, dim)).expect("orthonormal by construction")
}

/// Random SPD matrix with eigenvalues log-uniform in
/// `[1/sqrt(cond), sqrt(cond)]`, so its condition number is at most `cond`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, cond: f64) -> DenseMatrix {
    let q = random_orthonormal(rng, n, n);
    let half_log = 0.5 * cond.ln();
    let mut d = DenseMatrix::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = rng.gen_range(-half_log..=half_log).exp();
    }
    let mut out = q.mul(&d).unwrap().mul(&q.transpose()).unwrap();
    out.symmetrize();
    out
}

/// Random invertible matrix with singular values log-uniform in
/// `[1/sqrt(cond), sqrt(cond)]`.
pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize, cond: f64) -> DenseMatrix {
    let u = random_orthonormal(rng, n, n);
    let v = random_orthonormal(rng, n, n);
    let half_log = 0.5 * cond.ln();
    let mut d = DenseMatrix::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = rng.gen_range(-half_log..=half_log).exp();
    }
    u.mul(&d).unwrap().mul(&v.transpose()).unwrap()
}

/// Structure limits for generated systems (defaults match desk scale:
/// up to 8 outer nodes of up to 4 inner atoms each).
#[derive(Debug, Clone)]
pub struct SystemShape {
    pub max_locals: usize,
    pub max_inner: usize,
    pub max_local_dim: usize,
}

impl Default for SystemShape {
    fn default() -> Self {
        Self {
            max_locals: 8,
            max_inner: 4,
            max_local_dim: 6,
        }
    }
}

/// Random structurally valid system; not necessarily a frame.
pub fn random_system(rng: &mut ChaCha8Rng, ambient: usize, shape: &SystemShape) -> RelaySystem {
    let n_locals = rng.gen_range(1..=shape.max_locals);
    let locals = (0..n_locals)
        .map(|li| {
            let local_dim = rng.gen_range(1..=shape.max_local_dim.min(ambient + 2));
            let dim_w = rng.gen_range(1..=ambient);
            let n_inner = rng.gen_range(1..=shape.max_inner);
            let lambda = random_matrix(rng, local_dim, ambient, 1.0 / (ambient as f64).sqrt());
            LocalSystem {
                atom: MeasureAtom::new(format!("w{li}"), rng.gen_range(0.5..2.0)),
                w: random_subspace(rng, ambient, dim_w),
                local_dim,
                lambda,
                inner: (0..n_inner)
                    .map(|vi| {
                        let dim_v = rng.gen_range(1..=local_dim);
                        InnerAtom {
                            atom: MeasureAtom::new(format!("v{vi}"), rng.gen_range(0.5..2.0)),
                            alpha: rng.gen_range(0.5..2.0),
                            v: random_subspace(rng, local_dim, dim_v),
                            lambda: None,
                        }
                    })
                    .collect(),
            }
        })
        .collect();
    RelaySystem {
        ambient_dim: ambient,
        locals,
    }
}

/// Random frame system: rejection-samples [`random_system`] until the lower
/// bound clears the frame tolerance and the condition number `B/A` stays
/// below `max_cond`.
pub fn random_frame_system(rng: &mut ChaCha8Rng, ambient: usize, max_cond: f64) -> RelaySystem {
    let shape = SystemShape::default();
    for _ in 0..10_000 {
        let sys = random_system(rng, ambient, &shape);
        // Cheap necessary condition: per-atom ranks must be able to cover H.
        let rank_budget: usize = sys
            .locals
            .iter()
            .map(|l| {
                l.inner
                    .iter()
                    .map(|i| i.v.dim().min(l.w.dim()))
                    .sum::<usize>()
            })
            .sum();
        if rank_budget < ambient {
            continue;
        }
        let bounds = frame_bounds(&sys).expect("generated system validates");
        if bounds.is_frame && bounds.b_opt <= max_cond * bounds.a_opt {
            return sys;
        }
    }
    panic!("failed to draw a frame system in dimension {ambient} with cond <= {max_cond}");
}

/// Random frame system in the fusion regime: `K_w = H`, `Lambda_w` a
/// positive multiple of the identity, every inner subspace the full local
/// space. For this family the invertible-transform sandwich and bracket
/// predictions are sound, with all operator-norm pulls adjacent.
pub fn random_fusion_regime_system(
    rng: &mut ChaCha8Rng,
    ambient: usize,
    max_cond: f64,
) -> RelaySystem {
    for _ in 0..10_000 {
        let n_locals = rng.gen_range(1..=8usize);
        let locals: Vec<LocalSystem> = (0..n_locals)
            .map(|li| {
                let dim_w = rng.gen_range(1..=ambient);
                let scale = rng.gen_range(0.5..1.5);
                let n_inner = rng.gen_range(1..=4usize);
                LocalSystem {
                    atom: MeasureAtom::new(format!("w{li}"), rng.gen_range(0.5..2.0)),
                    w: random_subspace(rng, ambient, dim_w),
                    local_dim: ambient,
                    lambda: DenseMatrix::identity(ambient).scale(scale),
                    inner: (0..n_inner)
                        .map(|vi| InnerAtom {
                            atom: MeasureAtom::new(format!("v{vi}"), rng.gen_range(0.5..2.0)),
                            alpha: rng.gen_range(0.5..2.0),
                            v: Subspace::full(ambient),
                            lambda: None,
                        })
                        .collect(),
                }
            })
            .collect();
        let sys = RelaySystem {
            ambient_dim: ambient,
            locals,
        };
        let bounds = frame_bounds(&sys).expect("generated system validates");
        if bounds.is_frame && bounds.b_opt <= max_cond * bounds.a_opt {
            return sys;
        }
    }
    panic!("failed to draw a fusion-regime frame system in dimension {ambient}");
}

/// Random invertible operator on the ambient space of `v` that maps `v`
/// onto itself: block structure in an orthonormal basis adapted to
/// `v + v_perp`, with each block drawn from [`random_invertible`].
pub fn v_preserving_invertible(rng: &mut ChaCha8Rng, v: &Subspace, cond: f64) -> DenseMatrix {
    let n = v.ambient_dim();
    let k = v.dim();
    // Orthonormal completion: the first k columns stay the basis of v.
    let mut cols = v.basis().to_columns();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(e);
    }
    let full = orthonormalize(&DenseMatrix::from_columns(&cols).unwrap(), ORTHO_DROP_TOL)
        .expect("identity completion cannot degenerate");
    assert_eq!(full.cols(), n);
    let mut block = DenseMatrix::zeros(n, n);
    let top = random_invertible(rng, k, cond);
    for i in 0..k {
        for j in 0..k {
            block[(i, j)] = top[(i, j)];
        }
    }
    if n > k {
        let bottom = random_invertible(rng, n - k, cond);
        for i in 0..n - k {
            for j in 0..n - k {
                block[(k + i, k + j)] = bottom[(i, j)];
            }
        }
    }
    full.mul(&block).unwrap().mul(&full.transpose()).unwrap()
}

/// Rotate a subspace by a Givens rotation of at most `max_angle` radians in
/// a random coordinate plane of its ambient space.
pub fn rotate_subspace(rng: &mut ChaCha8Rng, subspace: &Subspace, max_angle: f64) -> Subspace {
    let n = subspace.ambient_dim();
    if n < 2 {
        return subspace.clone();
    }
    let i = rng.gen_range(0..n);
    let j = loop {
        let j = rng.gen_range(0..n);
        if j != i {
            break j;
        }
    };
    let angle = rng.gen_range(-max_angle..=max_angle);
    let mut rot = DenseMatrix::identity(n);
    rot[(i, i)] = angle.cos();
    rot[(j, j)] = angle.cos();
    rot[(i, j)] = -angle.sin();
    rot[(j, i)] = angle.sin();
    let image = rot.mul(subspace.basis()).expect("conformable");
    Subspace::from_spanning(&image, ORTHO_DROP_TOL).expect("rotation preserves rank")
}

/// Copy of `sys` with every inner subspace rotated by at most `max_angle`.
pub fn perturb_inner_subspaces(
    rng: &mut ChaCha8Rng,
    sys: &RelaySystem,
    max_angle: f64,
) -> RelaySystem {
    let mut out = sys.clone();
    for local in &mut out.locals {
        for inner in &mut local.inner {
            inner.v = rotate_subspace(rng, &inner.v, max_angle);
        }
    }
    out
}

/// Random valid coefficient family (blocks projected into their inner
/// subspaces).
pub fn random_coefficient_family(rng: &mut ChaCha8Rng, sys: &RelaySystem) -> CoefficientFamily {
    let blocks = sys
        .locals
        .iter()
        .map(|l| {
            l.inner
                .iter()
                .map(|_| random_vector(rng, l.local_dim))
                .collect()
        })
        .collect();
    CoefficientFamily::project_into(sys, blocks).expect("layout matches by construction")
}
