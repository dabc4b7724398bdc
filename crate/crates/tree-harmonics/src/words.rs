//! Exact arithmetic and enumeration for the free group `F_r`, viewed as the
//! vertex set of the `2r`-regular homogeneous tree.
//!
//! Words are reduced sequences of signed generator letters. Letter `+k`
//! stands for the k-th generator, `-k` for its inverse (`k` in `1..=r`).
//! Enumeration of balls is breadth-first with children ordered
//! lexicographically by `(generator index, sign)`, `+` before `-`, so every
//! index assignment downstream is reproducible bit for bit.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Maximum supported rank. Letters are stored as `i8`.
pub const MAX_RANK: u32 = 63;

/// Default cap on ball sizes (vertices). Balls grow like `(2r-1)^N`.
pub const DEFAULT_BALL_CAP: usize = 2_000_000;

/// A reduced word in `F_r`: no adjacent letter cancels its neighbour.
///
/// The empty word is the group identity.
///
/// # Examples
///
/// ```
/// use tree_harmonics::words::Word;
///
/// // a b a^{-1} in F_2: letters are +1 (a), +2 (b), -1 (a^{-1}).
/// let w = Word::reduce(2, &[1, 2, -1]).unwrap();
/// assert_eq!(w.len(), 3);
/// assert_eq!(w.to_string(), "a+b+a-");
///
/// // Multiplication cancels across the seam: (a b a^{-1})(a b) = a b^2.
/// let v = Word::parse(2, "a+b+").unwrap();
/// assert_eq!(w.multiply(&v).to_string(), "a+b+b+");
///
/// // Inverses compose to the identity.
/// assert!(w.multiply(&w.inverse()).is_empty());
/// ```
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<i8>,
}

/// Position of a letter in the fixed lexicographic order
/// `(1,+) < (1,-) < (2,+) < (2,-) < ...`.
#[inline]
pub fn letter_rank(letter: i8) -> u32 {
    debug_assert!(letter != 0);
    2 * (letter.unsigned_abs() as u32 - 1) + u32::from(letter < 0)
}

fn check_rank(rank: u32) -> Result<()> {
    if !(2..=MAX_RANK).contains(&rank) {
        return Err(Error::RankOutOfRange(rank));
    }
    Ok(())
}

fn check_letter(letter: i8, rank: u32) -> Result<()> {
    let index = letter.unsigned_abs() as u32;
    if letter == 0 || index > rank {
        return Err(Error::GeneratorOutOfRange { index, rank });
    }
    Ok(())
}

impl Word {
    /// The identity (empty word).
    pub fn identity() -> Self {
        Word::default()
    }

    /// Free reduction of a raw signed-letter sequence.
    ///
    /// Idempotent: reducing an already reduced word returns it unchanged.
    pub fn reduce(rank: u32, raw: &[i8]) -> Result<Self> {
        check_rank(rank)?;
        let mut stack: Vec<i8> = Vec::with_capacity(raw.len());
        for &letter in raw {
            check_letter(letter, rank)?;
            if stack.last() == Some(&-letter) {
                stack.pop();
            } else {
                stack.push(letter);
            }
        }
        Ok(Word { letters: stack })
    }

    /// Construct from letters known to be reduced (debug-asserted).
    pub(crate) fn from_reduced(letters: Vec<i8>) -> Self {
        debug_assert!(letters
            .windows(2)
            .all(|pair| pair[0] != -pair[1] && pair[0] != 0));
        Word { letters }
    }

    pub fn letters(&self) -> &[i8] {
        &self.letters
    }

    /// Word length `|w|`, the tree distance to the base point.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Group multiplication followed by free reduction across the seam.
    pub fn multiply(&self, other: &Word) -> Word {
        let mut left = self.letters.len();
        let mut right = 0usize;
        while left > 0 && right < other.letters.len() {
            if self.letters[left - 1] == -other.letters[right] {
                left -= 1;
                right += 1;
            } else {
                break;
            }
        }
        let mut letters = Vec::with_capacity(left + other.letters.len() - right);
        letters.extend_from_slice(&self.letters[..left]);
        letters.extend_from_slice(&other.letters[right..]);
        Word { letters }
    }

    /// Group inverse: reverse the letters and flip every sign.
    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|&l| -l).collect(),
        }
    }

    /// Parse the signed-letter string format used in tree CSV files,
    /// e.g. `a+b-a+`. The identity is written `e` (the empty string is
    /// also accepted).
    pub fn parse(rank: u32, text: &str) -> Result<Self> {
        check_rank(rank)?;
        let text = text.trim();
        if text.is_empty() || text == "e" {
            return Ok(Word::identity());
        }
        let mut raw = Vec::new();
        let mut chars = text.chars();
        loop {
            let Some(c) = chars.next() else { break };
            let index = match c {
                'a'..='z' => (c as u8 - b'a') as u32 + 1,
                _ => {
                    return Err(Error::Precondition(format!(
                        "bad generator character {c:?} in word {text:?}"
                    )))
                }
            };
            let sign = match chars.next() {
                Some('+') => 1i8,
                Some('-') => -1i8,
                other => {
                    return Err(Error::Precondition(format!(
                        "expected '+' or '-' after generator in word {text:?}, got {other:?}"
                    )))
                }
            };
            if index > rank {
                return Err(Error::GeneratorOutOfRange { index, rank });
            }
            raw.push(sign * index as i8);
        }
        let word = Word::reduce(rank, &raw)?;
        if word.letters != raw {
            return Err(Error::Precondition(format!("word {text:?} is not reduced")));
        }
        Ok(word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for &l in &self.letters {
            let c = (b'a' + (l.unsigned_abs() - 1)) as char;
            write!(f, "{}{}", c, if l > 0 { '+' } else { '-' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

// Shortlex order matching the ball enumeration: by length first, then by
// the (generator index, sign) letter order.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| {
                for (&a, &b) in self.letters.iter().zip(&other.letters) {
                    match letter_rank(a).cmp(&letter_rank(b)) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                Ordering::Equal
            })
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `|B_n|`: 1 for n = 0, otherwise `2r (2r-1)^(n-1)`.
pub fn sphere_size(rank: u32, n: usize) -> Result<u128> {
    check_rank(rank)?;
    if n == 0 {
        return Ok(1);
    }
    let q = (2 * rank - 1) as u128;
    let mut size = (2 * rank) as u128;
    for _ in 1..n {
        size = size.checked_mul(q).ok_or(Error::Overflow("sphere size"))?;
    }
    Ok(size)
}

/// `|B_n|` in floating point, safe for large `n`.
pub fn sphere_size_f64(rank: u32, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let q = (2 * rank - 1) as f64;
    (2 * rank) as f64 * q.powi(n as i32 - 1)
}

/// Number of vertices in the ball of radius `radius`:
/// `1 + 2r ((2r-1)^N - 1) / (2r-2)`.
pub fn ball_size(rank: u32, radius: u32) -> Result<u128> {
    let mut total: u128 = 0;
    for n in 0..=radius as usize {
        total = total
            .checked_add(sphere_size(rank, n)?)
            .ok_or(Error::Overflow("ball size"))?;
    }
    Ok(total)
}

/// Deterministic index of the ball of radius `radius` in `F_r`.
///
/// Words are stored grouped by sphere, each sphere in lexicographic order;
/// `index_of` inverts the enumeration arithmetically in O(|w|) without a map.
///
/// # Examples
///
/// ```
/// use tree_harmonics::words::{BallIndex, Word, DEFAULT_BALL_CAP};
///
/// let ball = BallIndex::enumerate(2, 3, DEFAULT_BALL_CAP).unwrap();
/// // |S_n| = 2r (2r-1)^(n-1): spheres 1, 4, 12, 36 for r = 2.
/// assert_eq!(ball.sphere(0).len(), 1);
/// assert_eq!(ball.sphere(1).len(), 4);
/// assert_eq!(ball.sphere(2).len(), 12);
/// assert_eq!(ball.sphere(3).len(), 36);
/// assert_eq!(ball.len(), 53);
///
/// // The ordinal computation inverts the enumeration without a hash map.
/// let w = Word::parse(2, "b-a+").unwrap();
/// let i = ball.index_of(&w).unwrap();
/// assert_eq!(ball.word(i), &w);
/// ```
#[derive(Debug)]
pub struct BallIndex {
    rank: u32,
    radius: u32,
    words: Vec<Word>,
    offsets: Vec<usize>,
}

impl BallIndex {
    /// BFS enumeration of the ball. Fails if the ball exceeds `cap` vertices.
    pub fn enumerate(rank: u32, radius: u32, cap: usize) -> Result<Self> {
        check_rank(rank)?;
        let size = ball_size(rank, radius)?;
        if size > cap as u128 {
            return Err(Error::BallCapExceeded {
                rank,
                radius,
                size,
                cap,
            });
        }
        let size = size as usize;
        let mut words: Vec<Word> = Vec::with_capacity(size);
        let mut offsets = Vec::with_capacity(radius as usize + 2);
        offsets.push(0);
        words.push(Word::identity());
        offsets.push(1);
        let letters_in_order: Vec<i8> = {
            let mut v: Vec<i8> = (1..=rank as i8).flat_map(|k| [k, -k]).collect();
            v.sort_by_key(|&l| letter_rank(l));
            v
        };
        for n in 1..=radius as usize {
            let (lo, hi) = (offsets[n - 1], offsets[n]);
            for parent in lo..hi {
                let parent_letters = words[parent].letters().to_vec();
                let last = parent_letters.last().copied();
                for &l in &letters_in_order {
                    if last == Some(-l) {
                        continue;
                    }
                    let mut child = parent_letters.clone();
                    child.push(l);
                    words.push(Word::from_reduced(child));
                }
            }
            offsets.push(words.len());
        }
        Ok(BallIndex {
            rank,
            radius,
            words,
            offsets,
        })
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Total number of words in the ball.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn word(&self, index: usize) -> &Word {
        &self.words[index]
    }

    /// Words of length exactly `n`.
    pub fn sphere(&self, n: usize) -> &[Word] {
        &self.words[self.offsets[n]..self.offsets[n + 1]]
    }

    /// Start index of sphere `n` in the flat word list.
    pub fn sphere_offset(&self, n: usize) -> usize {
        self.offsets[n]
    }

    /// Ordinal of `w` in this enumeration, or `None` when `|w| > radius`.
    pub fn index_of(&self, w: &Word) -> Option<usize> {
        if w.len() > self.radius as usize {
            return None;
        }
        Some(ordinal_in_ball(self.rank, w) as usize)
    }
}

/// Ordinal of a reduced word under the BFS-lexicographic ball enumeration,
/// computed arithmetically (mixed-radix over the letter choices).
pub fn ordinal_in_ball(rank: u32, w: &Word) -> u64 {
    let letters = w.letters();
    if letters.is_empty() {
        return 0;
    }
    // Offset of the sphere |w|: ball size of radius |w|-1.
    let q = (2 * rank - 1) as u64;
    let mut offset: u64 = 1;
    let mut sphere: u64 = 2 * rank as u64;
    for _ in 1..letters.len() {
        offset += sphere;
        sphere *= q;
    }
    // Position within the sphere: first letter has 2r choices, later
    // letters 2r-1 (the cancelling letter is excluded from the order).
    let mut local: u64 = letter_rank(letters[0]) as u64;
    for pair in letters.windows(2) {
        let forbidden = letter_rank(-pair[0]);
        let mut digit = letter_rank(pair[1]);
        if digit > forbidden {
            digit -= 1;
        }
        local = local * q + digit as u64;
    }
    offset + local
}
