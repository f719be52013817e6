use std::collections::HashMap;
use std::hash::Hash;

use sha2::{Digest, Sha256};

/// Dense id of an interned color.
pub type ColorId = u32;

/// 256-bit content digest of a color tree.
pub type ColorDigest = [u8; 32];

/// One tuple color.
///
/// `Leaf` is the iteration-0 color: the row-major `ℓ×ℓ` matrix of squared
/// distance keys. Later colors keep the previous color and the multiset of
/// neighbor records, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Color<K> {
    Leaf(Vec<K>),
    /// `ℓ = 1`: records are `(squared distance to y, color of y)`.
    Point { prev: ColorId, records: Vec<(K, ColorId)> },
    /// `ℓ ≥ 2`: records are the colors of `x[y/1] … x[y/ℓ]`, flattened in
    /// chunks of `width`.
    Tuple { prev: ColorId, width: usize, records: Vec<ColorId> },
}

impl<K: Ord + Clone> Color<K> {
    fn canonicalize(&mut self) {
        match self {
            Color::Leaf(_) => {}
            Color::Point { records, .. } => records.sort_unstable(),
            Color::Tuple { width, records, .. } => {
                let mut chunks: Vec<Vec<ColorId>> = records.chunks(*width).map(<[_]>::to_vec).collect();
                chunks.sort_unstable();
                *records = chunks.concat();
            }
        }
    }

    pub fn prev(&self) -> Option<ColorId> {
        match self {
            Color::Leaf(_) => None,
            Color::Point { prev, .. } | Color::Tuple { prev, .. } => Some(*prev),
        }
    }
}

/// Interner mapping color structures to dense ids.
///
/// Equality is structural. Each color also gets a Merkle-style SHA-256
/// digest built from the digests of the colors it refers to, with records
/// sorted by their byte encoding, so digests do not depend on the order in
/// which ids were handed out and can be compared across stores.
#[derive(Debug, Clone)]
pub struct Interner<K> {
    ids: HashMap<Color<K>, ColorId>,
    colors: Vec<Color<K>>,
    digests: Vec<ColorDigest>,
    depths: Vec<u32>,
}

impl<K> Default for Interner<K> {
    fn default() -> Self {
        Self {
            ids: HashMap::new(),
            colors: Vec::new(),
            digests: Vec::new(),
            depths: Vec::new(),
        }
    }
}

fn push_len(out: &mut Vec<u8>, len: usize) {
    out.extend_from_slice(&(len as u64).to_be_bytes());
}

impl<K: Clone + Ord + Hash + Eq> Interner<K> {
    /// Intern a color; records are sorted here, callers may pass them in any order.
    pub fn intern(&mut self, mut color: Color<K>, write_key: impl Fn(&K, &mut Vec<u8>)) -> ColorId {
        color.canonicalize();
        if let Some(&id) = self.ids.get(&color) {
            return id;
        }
        let digest = self.digest_of(&color, &write_key);
        let depth = color.prev().map_or(0, |p| self.depths[p as usize] + 1);
        let id = ColorId::try_from(self.colors.len()).expect("more than u32::MAX colors");
        self.ids.insert(color.clone(), id);
        self.colors.push(color);
        self.digests.push(digest);
        self.depths.push(depth);
        id
    }

    fn digest_of(&self, color: &Color<K>, write_key: &impl Fn(&K, &mut Vec<u8>)) -> ColorDigest {
        let mut h = Sha256::new();
        match color {
            Color::Leaf(keys) => {
                let mut buf = vec![b'L'];
                push_len(&mut buf, keys.len());
                for k in keys {
                    let mut kb = Vec::new();
                    write_key(k, &mut kb);
                    push_len(&mut buf, kb.len());
                    buf.extend_from_slice(&kb);
                }
                h.update(&buf);
            }
            Color::Point { prev, records } => {
                let mut encoded: Vec<Vec<u8>> = records
                    .iter()
                    .map(|(k, c)| {
                        let mut kb = Vec::new();
                        write_key(k, &mut kb);
                        let mut rec = Vec::with_capacity(kb.len() + 40);
                        push_len(&mut rec, kb.len());
                        rec.extend_from_slice(&kb);
                        rec.extend_from_slice(&self.digests[*c as usize]);
                        rec
                    })
                    .collect();
                encoded.sort_unstable();
                h.update(b"P");
                h.update(self.digests[*prev as usize]);
                h.update((encoded.len() as u64).to_be_bytes());
                for rec in &encoded {
                    h.update((rec.len() as u64).to_be_bytes());
                    h.update(rec);
                }
            }
            Color::Tuple { prev, width, records } => {
                let mut encoded: Vec<Vec<u8>> = records
                    .chunks(*width)
                    .map(|chunk| chunk.iter().flat_map(|c| self.digests[*c as usize]).collect())
                    .collect();
                encoded.sort_unstable();
                h.update(b"T");
                h.update(self.digests[*prev as usize]);
                h.update((*width as u64).to_be_bytes());
                h.update((encoded.len() as u64).to_be_bytes());
                for rec in &encoded {
                    h.update(rec);
                }
            }
        }
        h.finalize().into()
    }

    pub fn get(&self, id: ColorId) -> &Color<K> {
        &self.colors[id as usize]
    }

    pub fn digest(&self, id: ColorId) -> &ColorDigest {
        &self.digests[id as usize]
    }

    /// Iteration at which a color lives (0 for leaves).
    pub fn depth(&self, id: ColorId) -> u32 {
        self.depths[id as usize]
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// Ancestor of `id` at iteration `depth` (which must not exceed its own).
    pub fn ancestor(&self, mut id: ColorId, depth: u32) -> ColorId {
        assert!(depth <= self.depth(id), "requested a later iteration than the color has");
        while self.depth(id) > depth {
            id = self.colors[id as usize].prev().expect("non-leaf color");
        }
        id
    }

    /// The iteration-0 matrix below `id`.
    pub fn leaf(&self, id: ColorId) -> &[K] {
        match self.get(self.ancestor(id, 0)) {
            Color::Leaf(keys) => keys,
            _ => unreachable!("depth-0 colors are leaves"),
        }
    }
}
