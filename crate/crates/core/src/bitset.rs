//! Fixed-length bitset used for truth tables and win sets. Range queries
//! are word-parallel; ranges produced by the engines are always
//! power-of-two sized and aligned.

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Bitset {
    words: Vec<u64>,
    len: usize,
}

impl Bitset {
    pub fn zeros(len: usize) -> Self {
        Bitset {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    /// Flips every bit, keeping the unused tail of the last word zero.
    pub fn negate(&mut self) {
        for w in &mut self.words {
            *w = !*w;
        }
        self.mask_tail();
    }

    pub fn and_assign(&mut self, other: &Bitset) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn or_assign(&mut self, other: &Bitset) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// self &= !other
    pub fn and_not_assign(&mut self, other: &Bitset) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn is_all_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn first_one(&self) -> Option<usize> {
        for (i, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(i * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i * 64 + bit)
            })
        })
    }

    pub fn range_all_zero(&self, start: usize, len: usize) -> bool {
        debug_assert!(start + len <= self.len);
        if len < 64 {
            // Aligned power-of-two range inside one word.
            let w = self.words[start / 64];
            let mask = ((1u64 << len) - 1) << (start % 64);
            return w & mask == 0;
        }
        self.words[start / 64..(start + len) / 64]
            .iter()
            .all(|&w| w == 0)
    }

    pub fn range_all_one(&self, start: usize, len: usize) -> bool {
        debug_assert!(start + len <= self.len);
        if len < 64 {
            let w = self.words[start / 64];
            let mask = ((1u64 << len) - 1) << (start % 64);
            return w & mask == mask;
        }
        self.words[start / 64..(start + len) / 64]
            .iter()
            .all(|&w| w == !0)
    }

    pub fn zero_range(&mut self, start: usize, len: usize) {
        debug_assert!(start + len <= self.len);
        if len < 64 {
            let mask = ((1u64 << len) - 1) << (start % 64);
            self.words[start / 64] &= !mask;
            return;
        }
        for w in &mut self.words[start / 64..(start + len) / 64] {
            *w = 0;
        }
    }

    fn mask_tail(&mut self) {
        let tail = self.len % 64;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }
}
