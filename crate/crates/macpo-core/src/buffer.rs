//! Fixed-capacity episode ring buffer with uniform sampling.
//!
//! Prioritization in this system is realized as weighted losses under
//! uniform sampling, so the buffer itself is deliberately plain: episodes
//! in, oldest out, uniform draws with replacement.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::types::{Episode, EpisodeShape};

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    shape: EpisodeShape,
    capacity: usize,
    storage: VecDeque<Episode>,
    insert_count: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, shape: EpisodeShape) -> Self {
        assert!(capacity > 0, "buffer capacity must be positive");
        Self {
            shape,
            capacity,
            storage: VecDeque::with_capacity(capacity.min(4096)),
            insert_count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Total number of accepted inserts, including evicted episodes.
    pub fn insert_count(&self) -> u64 {
        self.insert_count
    }

    pub fn shape(&self) -> &EpisodeShape {
        &self.shape
    }

    pub fn get(&self, index: usize) -> &Episode {
        &self.storage[index]
    }

    /// Validates and stores an episode, evicting the oldest at capacity.
    pub fn insert(&mut self, episode: Episode) -> Result<()> {
        episode.validate(&self.shape)?;
        if self.storage.len() == self.capacity {
            self.storage.pop_front();
        }
        self.storage.push_back(episode);
        self.insert_count += 1;
        Ok(())
    }

    /// `batch_size` episode indices drawn uniformly with replacement.
    pub fn sample_indices(&self, batch_size: usize, rng: &mut Rng) -> Result<Vec<usize>> {
        if self.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        Ok((0..batch_size).map(|_| rng.index(self.len())).collect())
    }

    /// `batch_size` episodes drawn uniformly with replacement.
    pub fn sample(&self, batch_size: usize, rng: &mut Rng) -> Result<Vec<&Episode>> {
        let indices = self.sample_indices(batch_size, rng)?;
        Ok(indices.into_iter().map(|i| self.get(i)).collect())
    }
}
