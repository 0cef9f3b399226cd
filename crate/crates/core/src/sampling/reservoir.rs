//! Single-slot reservoir sampling: after k observations the held item is a
//! uniform draw from them, replacement happening with probability 1/k at the
//! k-th observation.

use rand::Rng;

#[derive(Clone, Debug)]
pub struct Reservoir<T> {
    held: Option<T>,
    count: usize,
}

impl<T> Default for Reservoir<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> Reservoir<T> {
    pub fn new() -> Self {
        Reservoir { held: None, count: 0 }
    }

    /// Offers the next stream item; it replaces the held one with
    /// probability 1/count where count includes this item.
    pub fn observe<R: Rng + ?Sized>(&mut self, item: T, rng: &mut R) {
        self.count += 1;
        if self.count == 1 || rng.random_range(0..self.count) == 0 {
            self.held = Some(item);
        }
    }

    pub fn held(&self) -> Option<&T> {
        self.held.as_ref()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}
