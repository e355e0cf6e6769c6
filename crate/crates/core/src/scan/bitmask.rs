use crate::data::ObjectId;

/// Packed bit per object; bit `i` set iff object `i` matched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMask {
    len: usize,
    words: Vec<u64>,
}

impl BitMask {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut mask = Self {
            len,
            words: vec![u64::MAX; len.div_ceil(64)],
        };
        mask.clear_tail();
        mask
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut mask = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                mask.set(i);
            }
        }
        mask
    }

    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), len.div_ceil(64));
        let mut mask = Self { len, words };
        mask.clear_tail();
        mask
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn and_assign(&mut self, other: &BitMask) {
        assert_eq!(self.len, other.len, "mask length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    /// Set bit positions, ascending.
    pub fn to_ids(&self) -> Vec<ObjectId> {
        let mut out = Vec::with_capacity(self.count_ones());
        extract_ids(&self.words, 0, &mut out);
        out
    }
}

/// Appends the positions of set bits of `words`, where `words[0]` is word
/// number `first_word` of the full mask.
pub(crate) fn extract_ids(words: &[u64], first_word: usize, out: &mut Vec<ObjectId>) {
    for (k, &w) in words.iter().enumerate() {
        let base = ((first_word + k) * 64) as ObjectId;
        let mut w = w;
        while w != 0 {
            let bit = w.trailing_zeros();
            out.push(base + bit);
            w &= w - 1;
        }
    }
}
