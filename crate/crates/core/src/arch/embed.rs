use super::model::{Body, MultimodalModel};
use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Joint representation of a batch, one row per instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding(pub Matrix);

impl Embedding {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

/// Joint representation from either or both modalities. An absent modality
/// is fed as a zero vector, except for BiDNN, which duplicates the central
/// activation of the direction it can compute into both halves.
pub fn embed(model: &MultimodalModel, x: Option<&Matrix>, y: Option<&Matrix>) -> Result<Embedding> {
    let n = match (x, y) {
        (None, None) => {
            return Err(Error::Argument("embed needs at least one modality".into()));
        }
        (Some(x), Some(y)) if x.rows() != y.rows() => {
            return Err(Error::Shape(format!(
                "modalities have {} and {} rows",
                x.rows(),
                y.rows()
            )));
        }
        (Some(x), _) => x.rows(),
        (None, Some(y)) => y.rows(),
    };
    let zx;
    let zy;
    let xin = match x {
        Some(x) => x,
        None => {
            zx = Matrix::zeros(n, model.cfg.dim_x);
            &zx
        }
    };
    let yin = match y {
        Some(y) => y,
        None => {
            zy = Matrix::zeros(n, model.cfg.dim_y);
            &zy
        }
    };
    let out = match &model.body {
        Body::CorrNet(ae) | Body::Jae { shared: ae, .. } => {
            let s = ae.enc_x.infer(xin)?.add(&ae.enc_y.infer(yin)?)?;
            ae.mixing.infer(&s)?
        }
        Body::Baseline(f) => f.mixing.infer(&f.encoder.infer(&xin.hconcat(yin)?)?)?,
        Body::Bidnn(b) => {
            let cxy = match x {
                Some(x) => Some(b.central.infer(&b.enc_x.infer(x)?)?),
                None => None,
            };
            let cyx = match y {
                Some(y) => Some(b.central_yx().infer(&b.enc_y.infer(y)?)?),
                None => None,
            };
            match (cxy, cyx) {
                (Some(a), Some(c)) => a.hconcat(&c)?,
                (Some(a), None) => a.hconcat(&a)?,
                (None, Some(c)) => c.hconcat(&c)?,
                (None, None) => unreachable!(),
            }
        }
    };
    Ok(Embedding(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::config::{ArchConfig, ArchKind};
    use crate::arch::model::build_model;
    use crate::nn::testing::random_matrix;
    use crate::nn::InitScheme;

    fn model(kind: ArchKind) -> MultimodalModel {
        let cfg = ArchConfig::new(kind, 6, 4).with_size(8, 1);
        let mut m = build_model(&cfg).unwrap();
        m.initialize(InitScheme::Kaiming, 5, None).unwrap();
        m
    }

    #[test]
    fn zero_y_equals_absent_y_for_corrnet() {
        let m = model(ArchKind::CorrNet);
        let x = random_matrix(3, 6, 1);
        let a = embed(&m, Some(&x), Some(&Matrix::zeros(3, 4))).unwrap();
        let b = embed(&m, Some(&x), None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bidnn_embedding_is_twice_as_wide() {
        let m = model(ArchKind::Bidnn);
        let x = random_matrix(3, 6, 1);
        let y = random_matrix(3, 4, 2);
        let e = embed(&m, Some(&x), Some(&y)).unwrap();
        assert_eq!(e.0.cols(), 16);
        let only_x = embed(&m, Some(&x), None).unwrap().0;
        let (l, r) = only_x.hsplit(8);
        assert_eq!(l, r);
        assert_eq!(l, e.0.hsplit(8).0);
    }

    #[test]
    fn batch_embedding_matches_single_rows() {
        for kind in [ArchKind::CorrNet, ArchKind::Jae, ArchKind::Bidnn, ArchKind::Baseline] {
            let m = model(kind);
            let x = random_matrix(3, 6, 3);
            let y = random_matrix(3, 4, 4);
            let batch = embed(&m, Some(&x), Some(&y)).unwrap().0;
            for r in 0..3 {
                let xi = x.select_rows(&[r]);
                let yi = y.select_rows(&[r]);
                let single = embed(&m, Some(&xi), Some(&yi)).unwrap().0;
                for (a, b) in batch.row(r).iter().zip(single.row(0)) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn no_modality_is_an_argument_error() {
        let m = model(ArchKind::Jae);
        assert!(matches!(embed(&m, None, None), Err(Error::Argument(_))));
    }
}
