use indexmap::IndexSet;

/// Dense integer handle for an interned keyword.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KeywordId(pub u32);

impl KeywordId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interned keyword dictionary shared by a document and the indices built from it.
///
/// Keyword comparison is exact and case-sensitive: `USA` and `usa` are distinct keywords.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: IndexSet<Box<str>>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, word: &str) -> KeywordId {
        if let Some(idx) = self.words.get_index_of(word) {
            return KeywordId(idx as u32);
        }
        let (idx, _) = self.words.insert_full(word.into());
        KeywordId(idx as u32)
    }

    pub fn get(&self, word: &str) -> Option<KeywordId> {
        self.words.get_index_of(word).map(|i| KeywordId(i as u32))
    }

    pub fn resolve(&self, id: KeywordId) -> &str {
        &self.words[id.index()]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Reorders keywords lexicographically. Returns the new dictionary and,
    /// indexed by old ID, each keyword's new ID.
    pub fn into_sorted(self) -> (Vocabulary, Vec<KeywordId>) {
        let mut order: Vec<usize> = (0..self.words.len()).collect();
        order.sort_unstable_by(|&a, &b| self.words[a].cmp(&self.words[b]));
        let mut remap = vec![KeywordId(0); order.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = KeywordId(new as u32);
        }
        let mut slots: Vec<Option<Box<str>>> = self.words.into_iter().map(Some).collect();
        let words = order
            .iter()
            .map(|&i| slots[i].take().expect("each index once"))
            .collect();
        (Vocabulary { words }, remap)
    }

    pub fn iter(&self) -> impl Iterator<Item = (KeywordId, &str)> {
        self.words
            .iter()
            .enumerate()
            .map(|(i, w)| (KeywordId(i as u32), &**w))
    }
}

impl<S: AsRef<str>> FromIterator<S> for Vocabulary {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut v = Vocabulary::new();
        for w in iter {
            v.intern(w.as_ref());
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_stable_and_case_sensitive() {
        let mut v = Vocabulary::new();
        let a = v.intern("USA");
        let b = v.intern("usa");
        assert_ne!(a, b);
        assert_eq!(v.intern("USA"), a);
        assert_eq!(v.get("usa"), Some(b));
        assert_eq!(v.get("Usa"), None);
        assert_eq!(v.resolve(a), "USA");
        assert_eq!(v.len(), 2);
    }
}
