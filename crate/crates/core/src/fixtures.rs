//! Hand-built systems shared by the unit tests.

use crate::measure::{DiscreteMeasureSpace, MeasureAtom};
use crate::model::{InnerAtom, LocalSystem, RelaySystem, Subspace};
use crate::numerics::{DenseMatrix, Vector};

/// 2D Parseval system: W = H = R^2, Lambda = I, two inner atoms projecting
/// onto the coordinate axes, all weights one. Its frame operator is the
/// identity.
pub(crate) fn parseval_2d() -> RelaySystem {
    let e1 = Subspace::line(&Vector::new(vec![1.0, 0.0]).unwrap()).unwrap();
    let e2 = Subspace::line(&Vector::new(vec![0.0, 1.0]).unwrap()).unwrap();
    RelaySystem {
        ambient_dim: 2,
        locals: vec![LocalSystem {
            atom: MeasureAtom::new("w0", 1.0),
            w: Subspace::full(2),
            local_dim: 2,
            lambda: DenseMatrix::identity(2),
            inner: vec![
                InnerAtom {
                    atom: MeasureAtom::new("v0", 1.0),
                    alpha: 1.0,
                    v: e1,
                    lambda: None,
                },
                InnerAtom {
                    atom: MeasureAtom::new("v1", 1.0),
                    alpha: 1.0,
                    v: e2,
                    lambda: None,
                },
            ],
        }],
    }
}

/// Plain frame of the single vector (2, 0): frame operator diag(4, 0),
/// not a frame.
pub(crate) fn single_vector_system() -> RelaySystem {
    let measure = DiscreteMeasureSpace::counting("w", 1);
    RelaySystem::from_plain_frame(&[Vector::new(vec![2.0, 0.0]).unwrap()], &measure).unwrap()
}

/// Mercedes-Benz frame: three unit vectors at 120 degrees in R^2, weights
/// one. Tight with frame operator (3/2) I.
pub(crate) fn mercedes_benz_system() -> RelaySystem {
    let measure = DiscreteMeasureSpace::counting("w", 3);
    let vectors: Vec<Vector> = [90.0f64, 210.0, 330.0]
        .iter()
        .map(|deg| {
            let rad = deg.to_radians();
            Vector::new(vec![rad.cos(), rad.sin()]).unwrap()
        })
        .collect();
    RelaySystem::from_plain_frame(&vectors, &measure).unwrap()
}

/// A deterministic non-trivial 4D frame system with two locals, mixed
/// subspace dimensions, non-unit weights and a rectangular Lambda.
pub(crate) fn mixed_4d_system() -> RelaySystem {
    let w0 = Subspace::from_spanning(
        &DenseMatrix::from_columns(&[
            vec![1.0, 0.5, 0.0, -0.25],
            vec![0.0, 1.0, 0.75, 0.5],
            vec![0.25, 0.0, 1.0, -0.5],
        ])
        .unwrap(),
        1e-10,
    )
    .unwrap();
    let w1 = Subspace::from_spanning(
        &DenseMatrix::from_columns(&[vec![0.5, -1.0, 0.25, 1.0], vec![1.0, 1.0, -0.5, 0.0]])
            .unwrap(),
        1e-10,
    )
    .unwrap();
    let lambda0 = DenseMatrix::from_rows(&[
        vec![0.8, -0.2, 0.4, 0.1],
        vec![0.1, 0.9, -0.3, 0.2],
        vec![-0.4, 0.3, 0.7, -0.1],
    ])
    .unwrap();
    let lambda1 =
        DenseMatrix::from_rows(&[vec![1.0, 0.25, -0.5, 0.3], vec![-0.2, 0.6, 0.9, -0.4]]).unwrap();
    let v00 = Subspace::from_spanning(
        &DenseMatrix::from_columns(&[vec![1.0, 0.4, -0.2], vec![0.0, 1.0, 0.6]]).unwrap(),
        1e-10,
    )
    .unwrap();
    let v01 = Subspace::from_spanning(
        &DenseMatrix::from_columns(&[vec![0.3, -1.0, 0.8]]).unwrap(),
        1e-10,
    )
    .unwrap();
    let v10 = Subspace::full(2);
    let v11 = Subspace::from_spanning(
        &DenseMatrix::from_columns(&[vec![1.0, 1.0]]).unwrap(),
        1e-10,
    )
    .unwrap();
    RelaySystem {
        ambient_dim: 4,
        locals: vec![
            LocalSystem {
                atom: MeasureAtom::new("w0", 0.8),
                w: w0,
                local_dim: 3,
                lambda: lambda0,
                inner: vec![
                    InnerAtom {
                        atom: MeasureAtom::new("v0", 1.25),
                        alpha: 1.5,
                        v: v00,
                        lambda: None,
                    },
                    InnerAtom {
                        atom: MeasureAtom::new("v1", 0.5),
                        alpha: 0.75,
                        v: v01,
                        lambda: None,
                    },
                ],
            },
            LocalSystem {
                atom: MeasureAtom::new("w1", 1.5),
                w: w1,
                local_dim: 2,
                lambda: lambda1,
                inner: vec![
                    InnerAtom {
                        atom: MeasureAtom::new("v0", 1.0),
                        alpha: 1.0,
                        v: v10,
                        lambda: None,
                    },
                    InnerAtom {
                        atom: MeasureAtom::new("v1", 2.0),
                        alpha: 0.5,
                        v: v11,
                        lambda: None,
                    },
                ],
            },
            // Anchor local covering all of H so the system is a frame.
            LocalSystem {
                atom: MeasureAtom::new("w2", 0.6),
                w: Subspace::full(4),
                local_dim: 4,
                lambda: DenseMatrix::identity(4).scale(0.7),
                inner: vec![InnerAtom {
                    atom: MeasureAtom::new("v0", 0.9),
                    alpha: 1.1,
                    v: Subspace::full(4),
                    lambda: None,
                }],
            },
        ],
    }
}

/// Deterministic vector with entries in [-1, 1] for a given seed tag.
pub(crate) fn det_vector(dim: usize, tag: u64) -> Vector {
    Vector::new(
        (0..dim)
            .map(|i| (((i as u64 * 2654435761 + tag * 40503) % 10000) as f64 / 5000.0) - 1.0)
            .collect(),
    )
    .unwrap()
}
