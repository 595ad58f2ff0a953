use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Finite group given by its multiplication table on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    identity: usize,
    generators: Vec<usize>,
    lengths: Vec<Option<usize>>,
}

impl FiniteGroup {
    /// Validates the table (Latin square, identity, inverses, associativity).
    /// `generators` defaults to all non-identity elements and determines word
    /// length.
    pub fn new(table: Vec<Vec<usize>>, inverse: Option<Vec<usize>>, generators: Option<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        let bad = |m: &str| Error::InvalidGroupTable(m.to_string());
        if n == 0 {
            return Err(bad("empty table"));
        }
        for row in &table {
            if row.len() != n || row.iter().any(|&x| x >= n) {
                return Err(bad("table is not n×n over 0..n"));
            }
            if row.iter().collect::<BTreeSet<_>>().len() != n {
                return Err(bad("row is not a permutation"));
            }
        }
        for j in 0..n {
            if (0..n).map(|i| table[i][j]).collect::<BTreeSet<_>>().len() != n {
                return Err(bad("column is not a permutation"));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| bad("no identity element"))?;
        let computed: Vec<usize> = (0..n)
            .map(|x| (0..n).find(|&y| table[x][y] == identity).unwrap())
            .collect();
        if let Some(inv) = inverse {
            if inv != computed {
                return Err(bad("inverse table disagrees with multiplication table"));
            }
        }
        // full check for small groups, strided sample otherwise
        let step = if n <= 24 { 1 } else { n / 11 + 1 };
        for a in (0..n).step_by(step) {
            for b in (0..n).step_by(step) {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(bad("multiplication is not associative"));
                    }
                }
            }
        }
        let generators = generators.unwrap_or_else(|| (0..n).filter(|&x| x != identity).collect());
        if generators.iter().any(|&g| g >= n) {
            return Err(bad("generator out of range"));
        }
        let mut lengths = vec![None; n];
        lengths[identity] = Some(0);
        let mut queue = VecDeque::from([identity]);
        while let Some(x) = queue.pop_front() {
            let l = lengths[x].unwrap();
            for &s in &generators {
                for y in [table[x][s], table[x][computed[s]]] {
                    if lengths[y].is_none() {
                        lengths[y] = Some(l + 1);
                        queue.push_back(y);
                    }
                }
            }
        }
        Ok(FiniteGroup {
            table,
            inverse: computed,
            identity,
            generators,
            lengths,
        })
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        Self::new(table, None, Some(vec![1 % n])).expect("cyclic table")
    }

    /// Dihedral group of order `2n`: element `k` is `r^k` for `k < n` and
    /// `s·r^{k−n}` otherwise; generated by `r` and `s`.
    pub fn dihedral(n: usize) -> Self {
        let elem = |refl: bool, k: usize| if refl { n + k % n } else { k % n };
        let table = (0..2 * n)
            .map(|a| {
                (0..2 * n)
                    .map(|b| {
                        let (ra, ka) = (a >= n, a % n);
                        let (rb, kb) = (b >= n, b % n);
                        // r^k s = s r^{-k}
                        let k = if rb { (n - ka % n) % n + kb } else { ka + kb };
                        elem(ra ^ rb, k)
                    })
                    .collect()
            })
            .collect();
        Self::new(table, None, Some(vec![1 % n, n])).expect("dihedral table")
    }

    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> Self {
        let (n, m) = (a.order(), b.order());
        let table = (0..n * m)
            .map(|x| {
                (0..n * m)
                    .map(|y| a.mul(x / m, y / m) * m + b.mul(x % m, y % m))
                    .collect()
            })
            .collect();
        let mut gens: Vec<usize> = a.generators.iter().map(|&g| g * m + b.identity).collect();
        gens.extend(b.generators.iter().map(|&h| a.identity * m + h));
        Self::new(table, None, Some(gens)).expect("product table")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn inverse_table(&self) -> &[usize] {
        &self.inverse
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// Word length with respect to the generators (`None` if unreachable).
    pub fn length(&self, a: usize) -> Option<usize> {
        self.lengths[a]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Free group on `rank` generators.
    Free(usize),
    /// ℤ^rank.
    FreeAbelian(usize),
    Finite(Arc<FiniteGroup>),
    /// Free *-algebra on `rank` letters; with `hermitian` the letters are
    /// self-adjoint, otherwise `y_i* = z_i` is a separate letter.
    FreeStar { rank: usize, hermitian: bool },
}

/// The *-algebra in which elements live.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraSpec {
    pub backend: Backend,
}

/// Normal-form word. Free and free *-algebra words are letter sequences
/// (`±(i+1)`), free abelian words are exponent vectors, finite words are a
/// single element index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<i32>);

fn letter_key(l: i32) -> (i32, bool) {
    (l.abs(), l < 0)
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| {
                let a = self.0.iter().map(|&l| letter_key(l));
                let b = other.0.iter().map(|&l| letter_key(l));
                a.cmp(b)
            })
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn letter_char(l: i32) -> char {
    let c = (b'a' + (l.unsigned_abs() - 1) as u8) as char;
    if l < 0 {
        c.to_ascii_uppercase()
    } else {
        c
    }
}

impl AlgebraSpec {
    pub fn new(backend: Backend) -> Arc<Self> {
        Arc::new(AlgebraSpec { backend })
    }

    pub fn free(rank: usize) -> Arc<Self> {
        Self::new(Backend::Free(rank))
    }

    pub fn free_abelian(rank: usize) -> Arc<Self> {
        Self::new(Backend::FreeAbelian(rank))
    }

    pub fn finite(group: FiniteGroup) -> Arc<Self> {
        Self::new(Backend::Finite(Arc::new(group)))
    }

    pub fn free_star(rank: usize, hermitian: bool) -> Arc<Self> {
        Self::new(Backend::FreeStar { rank, hermitian })
    }

    pub fn is_group(&self) -> bool {
        !matches!(self.backend, Backend::FreeStar { .. })
    }

    pub fn name(&self) -> &'static str {
        match self.backend {
            Backend::Free(_) => "free",
            Backend::FreeAbelian(_) => "free_abelian",
            Backend::Finite(_) => "finite",
            Backend::FreeStar { .. } => "free_star",
        }
    }

    pub fn rank(&self) -> usize {
        match &self.backend {
            Backend::Free(n) | Backend::FreeAbelian(n) => *n,
            Backend::Finite(g) => g.generators().len(),
            Backend::FreeStar { rank, .. } => *rank,
        }
    }

    pub fn identity(&self) -> Word {
        match &self.backend {
            Backend::Free(_) | Backend::FreeStar { .. } => Word(Vec::new()),
            Backend::FreeAbelian(n) => Word(vec![0; *n]),
            Backend::Finite(g) => Word(vec![g.identity() as i32]),
        }
    }

    /// The `i`-th generator (for finite groups, the `i`-th listed generator).
    pub fn generator(&self, i: usize) -> Word {
        match &self.backend {
            Backend::Free(_) | Backend::FreeStar { .. } => Word(vec![i as i32 + 1]),
            Backend::FreeAbelian(n) => {
                let mut v = vec![0; *n];
                v[i] = 1;
                Word(v)
            }
            Backend::Finite(g) => Word(vec![g.generators()[i] as i32]),
        }
    }

    /// Generators together with their inverses (adjoints for the free
    /// *-algebra), without repetition.
    pub fn symmetric_generators(&self) -> Vec<Word> {
        let mut out: Vec<Word> = Vec::new();
        for i in 0..self.rank() {
            let g = self.generator(i);
            let gi = self.star(&g);
            for w in [g, gi] {
                if !out.contains(&w) && w != self.identity() {
                    out.push(w);
                }
            }
        }
        out
    }

    pub fn is_identity(&self, w: &Word) -> bool {
        *w == self.identity()
    }

    pub fn mul(&self, a: &Word, b: &Word) -> Word {
        match &self.backend {
            Backend::Free(_) => {
                let mut out = a.0.clone();
                for &l in &b.0 {
                    if out.last() == Some(&-l) {
                        out.pop();
                    } else {
                        out.push(l);
                    }
                }
                Word(out)
            }
            Backend::FreeAbelian(_) => Word(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect()),
            Backend::Finite(g) => Word(vec![g.mul(a.0[0] as usize, b.0[0] as usize) as i32]),
            Backend::FreeStar { .. } => {
                let mut out = a.0.clone();
                out.extend_from_slice(&b.0);
                Word(out)
            }
        }
    }

    /// `w*`: the group inverse, or reversal with letterwise adjoint.
    pub fn star(&self, w: &Word) -> Word {
        match &self.backend {
            Backend::Free(_) => Word(w.0.iter().rev().map(|l| -l).collect()),
            Backend::FreeAbelian(_) => Word(w.0.iter().map(|l| -l).collect()),
            Backend::Finite(g) => Word(vec![g.inv(w.0[0] as usize) as i32]),
            Backend::FreeStar { hermitian, .. } => {
                if *hermitian {
                    Word(w.0.iter().rev().copied().collect())
                } else {
                    Word(w.0.iter().rev().map(|l| -l).collect())
                }
            }
        }
    }

    /// Word length (for finite groups, with respect to the generators).
    pub fn length(&self, w: &Word) -> usize {
        match &self.backend {
            Backend::Free(_) | Backend::FreeStar { .. } => w.0.len(),
            Backend::FreeAbelian(_) => w.0.iter().map(|l| l.unsigned_abs() as usize).sum(),
            Backend::Finite(g) => g.length(w.0[0] as usize).unwrap_or(usize::MAX),
        }
    }

    /// Checks that `w` is a normal-form word of this backend.
    pub fn validate(&self, w: &Word) -> Result<()> {
        let bad = || Error::Parse(format!("word {:?} is not in normal form for {}", w.0, self.name()));
        let ok = match &self.backend {
            Backend::Free(n) => {
                w.0.iter().all(|&l| l != 0 && l.unsigned_abs() as usize <= *n)
                    && w.0.windows(2).all(|p| p[0] != -p[1])
            }
            Backend::FreeAbelian(n) => w.0.len() == *n,
            Backend::Finite(g) => w.0.len() == 1 && (w.0[0] as usize) < g.order() && w.0[0] >= 0,
            Backend::FreeStar { rank, hermitian } => w
                .0
                .iter()
                .all(|&l| l != 0 && l.unsigned_abs() as usize <= *rank && (!hermitian || l > 0)),
        };
        if ok {
            Ok(())
        } else {
            Err(bad())
        }
    }

    pub fn format_word(&self, w: &Word) -> String {
        match &self.backend {
            Backend::Free(_) | Backend::FreeStar { .. } => w.0.iter().map(|&l| letter_char(l)).collect(),
            Backend::FreeAbelian(_) => {
                let mut s = String::new();
                for (i, &e) in w.0.iter().enumerate() {
                    let l = if e < 0 { -(i as i32 + 1) } else { i as i32 + 1 };
                    for _ in 0..e.unsigned_abs() {
                        s.push(letter_char(l));
                    }
                }
                s
            }
            Backend::Finite(_) => w.0[0].to_string(),
        }
    }

    /// Parses the textual word format; the identity is `""`.
    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let s = s.trim();
        let letters = || -> Result<Vec<i32>> {
            s.chars()
                .map(|c| {
                    if !c.is_ascii_alphabetic() {
                        return Err(Error::Parse(format!("bad letter {c:?} in word {s:?}")));
                    }
                    let l = (c.to_ascii_lowercase() as u8 - b'a') as i32 + 1;
                    Ok(if c.is_ascii_uppercase() { -l } else { l })
                })
                .collect()
        };
        match &self.backend {
            Backend::Free(_) => {
                let id = self.identity();
                let w = letters()?
                    .into_iter()
                    .try_fold(id, |acc, l| -> Result<Word> {
                        let gen = Word(vec![l]);
                        self.validate(&gen)?;
                        Ok(self.mul(&acc, &gen))
                    })?;
                Ok(w)
            }
            Backend::FreeAbelian(n) => {
                let mut v = vec![0; *n];
                for l in letters()? {
                    let i = l.unsigned_abs() as usize - 1;
                    if i >= *n {
                        return Err(Error::Parse(format!("letter out of range in {s:?}")));
                    }
                    v[i] += l.signum();
                }
                Ok(Word(v))
            }
            Backend::Finite(g) => {
                if s.is_empty() {
                    return Ok(self.identity());
                }
                let k: usize = s.parse().map_err(|_| Error::Parse(format!("bad element index {s:?}")))?;
                if k >= g.order() {
                    return Err(Error::Parse(format!("element {k} out of range")));
                }
                Ok(Word(vec![k as i32]))
            }
            Backend::FreeStar { .. } => {
                let w = Word(letters()?);
                self.validate(&w)?;
                Ok(w)
            }
        }
    }

    /// All normal-form words of length at most `d`, identity first, ordered
    /// by length.
    pub fn ball(&self, d: usize) -> Vec<Word> {
        let mut out = vec![self.identity()];
        let mut seen: BTreeSet<Word> = out.iter().cloned().collect();
        let mut frontier = out.clone();
        let steps: Vec<Word> = match &self.backend {
            Backend::Finite(g) => {
                let mut s: Vec<Word> = Vec::new();
                for &x in g.generators() {
                    for y in [x, g.inv(x)] {
                        let w = Word(vec![y as i32]);
                        if !s.contains(&w) {
                            s.push(w);
                        }
                    }
                }
                s
            }
            Backend::FreeStar { rank, hermitian } => {
                let mut s = Vec::new();
                for i in 1..=*rank as i32 {
                    s.push(Word(vec![i]));
                    if !hermitian {
                        s.push(Word(vec![-i]));
                    }
                }
                s
            }
            _ => (0..self.rank())
                .flat_map(|i| {
                    let g = self.generator(i);
                    let gi = self.star(&g);
                    [g, gi]
                })
                .collect(),
        };
        for _ in 0..d {
            let mut next = Vec::new();
            for w in &frontier {
                for s in &steps {
                    let v = self.mul(w, s);
                    if seen.insert(v.clone()) {
                        next.push(v);
                    }
                }
            }
            next.sort();
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

impl fmt::Display for AlgebraSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.backend {
            Backend::Free(n) => write!(f, "free({n})"),
            Backend::FreeAbelian(n) => write!(f, "free_abelian({n})"),
            Backend::Finite(g) => write!(f, "finite(order {})", g.order()),
            Backend::FreeStar { rank, hermitian } => write!(f, "free_star({rank}, hermitian={hermitian})"),
        }
    }
}
