use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

/// Trailing batches smaller than this are merged into the one before, since
/// the correlation term is estimated within a batch.
pub const MIN_BATCH: usize = 8;

/// Shuffled mini-batches of `0..n`.
pub fn minibatches(n: usize, batch_size: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    chunk(order, batch_size)
}

pub(crate) fn chunk(order: Vec<usize>, batch_size: usize) -> Vec<Vec<usize>> {
    let mut batches: Vec<Vec<usize>> = order.chunks(batch_size.max(1)).map(<[usize]>::to_vec).collect();
    if batches.len() > 1 && batches.last().is_some_and(|b| b.len() < MIN_BATCH) {
        let tail = batches.pop().unwrap();
        batches.last_mut().unwrap().extend(tail);
    }
    batches
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn small_tail_is_folded() {
        let b = chunk((0..21).collect(), 10);
        assert_eq!(b.len(), 2);
        assert_eq!(b[1].len(), 11);
        let b = chunk((0..28).collect(), 10);
        assert_eq!(b.iter().map(Vec::len).collect::<Vec<_>>(), vec![10, 10, 8]);
    }

    #[test]
    fn batches_cover_every_index_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut all: Vec<usize> = minibatches(1000, 256, &mut rng).concat();
        all.sort_unstable();
        assert_eq!(all, (0..1000).collect::<Vec<_>>());
    }
}
