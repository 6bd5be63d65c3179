//! Five-fold 80/10/10 plans built from shuffled deciles.
//!
//! Fold `i` tests on decile `2i`, validates on decile `2i + 1`, and trains
//! on the other eight, so test sets never overlap across folds.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FOLDS: usize = 5;
const DECILES: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
    pub seed: u64,
}

pub fn make_folds(n: usize, seed: u64) -> Result<FoldPlan> {
    if n < DECILES {
        return Err(Error::DegenerateData(format!("need at least {DECILES} rows for a fold plan, got {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    // decile d spans [d·n/10, (d+1)·n/10)
    let bounds: Vec<usize> = (0..=DECILES).map(|d| d * n / DECILES).collect();
    let decile = |d: usize| &order[bounds[d]..bounds[d + 1]];
    let folds = (0..FOLDS)
        .map(|i| Fold {
            test: decile(2 * i).to_vec(),
            val: decile(2 * i + 1).to_vec(),
            train: (0..DECILES)
                .filter(|&d| d != 2 * i && d != 2 * i + 1)
                .flat_map(|d| decile(d).iter().copied())
                .collect(),
        })
        .collect();
    Ok(FoldPlan { folds, seed })
}
